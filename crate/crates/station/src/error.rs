use std::fmt;

/// Machine-readable failure class. The exit code is part of the CLI contract.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    ConfigNotFound,
    ConfigInvalid,
    LinkError,
    BindFailure,
    SchemaViolation,
    InsufficientPersonas,
    Backend,
    Analysis,
    Io,
}

impl ErrorClass {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorClass::ConfigNotFound | ErrorClass::ConfigInvalid => 2,
            ErrorClass::LinkError => 3,
            ErrorClass::BindFailure => 4,
            ErrorClass::SchemaViolation => 5,
            ErrorClass::InsufficientPersonas
            | ErrorClass::Backend
            | ErrorClass::Analysis
            | ErrorClass::Io => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ErrorClass::ConfigNotFound => "ConfigNotFound",
            ErrorClass::ConfigInvalid => "ConfigInvalid",
            ErrorClass::LinkError => "LinkError",
            ErrorClass::BindFailure => "BindFailure",
            ErrorClass::SchemaViolation => "SchemaViolation",
            ErrorClass::InsufficientPersonas => "InsufficientPersonas",
            ErrorClass::Backend => "BackendError",
            ErrorClass::Analysis => "AnalysisError",
            ErrorClass::Io => "IoError",
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    pub class: ErrorClass,
    pub message: String,
}

impl CliError {
    pub fn new(class: ErrorClass, message: impl Into<String>) -> Self {
        Self {
            class,
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.class.exit_code()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "error[{}]: {}", self.class.name(), self.message)
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::new(ErrorClass::Io, e.to_string())
    }
}
