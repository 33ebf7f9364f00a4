//! The seven-letter movement vocabulary shared by the pilot, the wire
//! protocol, the simulator and the log format.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

/// One movement command. Serialized as its single wire letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "char", into = "char")]
pub enum Action {
    Forward,
    Reverse,
    TurnLeft,
    TurnRight,
    Up,
    Down,
    Stop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("unknown action letter {0:?}")]
pub struct UnknownLetter(pub char);

impl Action {
    pub const ALL: [Action; 7] = [
        Action::Forward,
        Action::Reverse,
        Action::TurnLeft,
        Action::TurnRight,
        Action::Up,
        Action::Down,
        Action::Stop,
    ];

    pub fn from_letter(letter: char) -> Result<Self, UnknownLetter> {
        Ok(match letter {
            'f' => Action::Forward,
            'r' => Action::Reverse,
            'l' => Action::TurnLeft,
            't' => Action::TurnRight,
            'u' => Action::Up,
            'd' => Action::Down,
            's' => Action::Stop,
            other => return Err(UnknownLetter(other)),
        })
    }

    pub const fn letter(self) -> char {
        match self {
            Action::Forward => 'f',
            Action::Reverse => 'r',
            Action::TurnLeft => 'l',
            Action::TurnRight => 't',
            Action::Up => 'u',
            Action::Down => 'd',
            Action::Stop => 's',
        }
    }

    /// The letter as a one-byte ASCII string, i.e. the wire payload.
    pub const fn as_str(self) -> &'static str {
        match self {
            Action::Forward => "f",
            Action::Reverse => "r",
            Action::TurnLeft => "l",
            Action::TurnRight => "t",
            Action::Up => "u",
            Action::Down => "d",
            Action::Stop => "s",
        }
    }

    pub const fn is_turn(self) -> bool {
        matches!(self, Action::TurnLeft | Action::TurnRight)
    }
}

/// Free-function form used by the parser and the link layer.
pub fn action_from_letter(letter: char) -> Result<Action, UnknownLetter> {
    Action::from_letter(letter)
}

impl TryFrom<char> for Action {
    type Error = UnknownLetter;

    fn try_from(c: char) -> Result<Self, Self::Error> {
        Action::from_letter(c)
    }
}

impl From<Action> for char {
    fn from(a: Action) -> char {
        a.letter()
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SchemeError {
    #[error("action {0:?} is not assigned to any category")]
    Unassigned(Action),
    #[error("action {0:?} is assigned to more than one category")]
    Duplicate(Action),
    #[error("category scheme has no categories")]
    Empty,
    #[error("unknown category scheme {0:?}")]
    UnknownName(String),
}

/// A partition of the seven actions into named categories.
///
/// Fingerprint tables count actions per category; the three-way default
/// (Advance / Maneuver / Halt) gives a 3x3 table for three personas and
/// therefore four degrees of freedom. Which grouping produced the
/// published fingerprint statistic is not known, so the default is a
/// reconstruction and other partitions can be supplied.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategoryScheme {
    name: String,
    categories: Vec<(String, Vec<Action>)>,
    lookup: [usize; 7],
}

fn action_index(a: Action) -> usize {
    Action::ALL.iter().position(|x| *x == a).unwrap()
}

impl CategoryScheme {
    /// Builds a scheme, checking that every action lands in exactly one category.
    pub fn new(
        name: impl Into<String>,
        categories: Vec<(String, Vec<Action>)>,
    ) -> Result<Self, SchemeError> {
        if categories.is_empty() {
            return Err(SchemeError::Empty);
        }
        let mut lookup = [usize::MAX; 7];
        for (ci, (_, members)) in categories.iter().enumerate() {
            for &a in members {
                let slot = &mut lookup[action_index(a)];
                if *slot != usize::MAX {
                    return Err(SchemeError::Duplicate(a));
                }
                *slot = ci;
            }
        }
        if let Some(i) = lookup.iter().position(|&c| c == usize::MAX) {
            return Err(SchemeError::Unassigned(Action::ALL[i]));
        }
        Ok(Self {
            name: name.into(),
            categories,
            lookup,
        })
    }

    /// Advance = {f}, Maneuver = {l, t, u, d, r}, Halt = {s}.
    pub fn advance_maneuver_halt() -> Self {
        use Action::*;
        Self::new(
            "default",
            alloc::vec![
                ("Advance".into(), alloc::vec![Forward]),
                (
                    "Maneuver".into(),
                    alloc::vec![TurnLeft, TurnRight, Up, Down, Reverse]
                ),
                ("Halt".into(), alloc::vec![Stop]),
            ],
        )
        .expect("default scheme is a partition")
    }

    /// One category per letter.
    pub fn per_letter() -> Self {
        Self::new(
            "letters",
            Action::ALL
                .iter()
                .map(|a| (String::from(a.as_str()), alloc::vec![*a]))
                .collect(),
        )
        .expect("per-letter scheme is a partition")
    }

    /// Horizontal = {f, r, l, t}, Vertical = {u, d}, Halt = {s}.
    pub fn plane() -> Self {
        use Action::*;
        Self::new(
            "plane",
            alloc::vec![
                (
                    "Horizontal".into(),
                    alloc::vec![Forward, Reverse, TurnLeft, TurnRight]
                ),
                ("Vertical".into(), alloc::vec![Up, Down]),
                ("Halt".into(), alloc::vec![Stop]),
            ],
        )
        .expect("plane scheme is a partition")
    }

    pub fn by_name(name: &str) -> Result<Self, SchemeError> {
        match name {
            "default" | "advance-maneuver-halt" => Ok(Self::advance_maneuver_halt()),
            "letters" => Ok(Self::per_letter()),
            "plane" => Ok(Self::plane()),
            other => Err(SchemeError::UnknownName(other.into())),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn len(&self) -> usize {
        self.categories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.categories.is_empty()
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.categories.iter().map(|(n, _)| n.as_str())
    }

    pub fn categorize(&self, action: Action) -> usize {
        self.lookup[action_index(action)]
    }
}

impl Default for CategoryScheme {
    fn default() -> Self {
        Self::advance_maneuver_halt()
    }
}

/// Category index of `action` under `scheme`.
pub fn categorize_action(action: Action, scheme: &CategoryScheme) -> usize {
    scheme.categorize(action)
}
