//! JSONL flight logs and their observation sidecars.
//!
//! One `FlightRecord` per line with exactly the keys in [`RECORD_KEYS`].
//! Simulated flights also write `<stem>.obs.jsonl`, one observation per
//! record, which the stance analysis needs.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde_json::Value;
use sg_core::{FlightRecord, Observation};

use crate::error::{CliError, ErrorClass};

pub const RECORD_KEYS: [&str; 8] = [
    "t_ms",
    "persona_id",
    "action",
    "reason",
    "latency_ms",
    "pose",
    "human_visible",
    "collision",
];

const POSE_KEYS: [&str; 4] = ["x_m", "y_m", "z_m", "heading_deg"];

fn with_suffix(log: &Path, suffix: &str) -> PathBuf {
    let name = log
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let stem = name.strip_suffix(".jsonl").unwrap_or(&name);
    log.with_file_name(format!("{stem}{suffix}"))
}

pub fn obs_path(log: &Path) -> PathBuf {
    with_suffix(log, ".obs.jsonl")
}

pub fn manifest_path(log: &Path) -> PathBuf {
    with_suffix(log, ".manifest.json")
}

pub fn record_line(r: &FlightRecord) -> String {
    serde_json::to_string(r).expect("records serialize")
}

/// Streams records to disk, flushing after each one.
pub struct LogWriter {
    out: BufWriter<File>,
}

impl LogWriter {
    pub fn create(path: &Path) -> Result<Self, CliError> {
        let f = File::create(path)
            .map_err(|e| CliError::new(ErrorClass::Io, format!("{}: {e}", path.display())))?;
        Ok(Self {
            out: BufWriter::new(f),
        })
    }

    pub fn write<T: serde::Serialize>(&mut self, row: &T) -> Result<(), CliError> {
        serde_json::to_writer(&mut self.out, row)
            .map_err(|e| CliError::new(ErrorClass::Io, e.to_string()))?;
        self.out.write_all(b"\n")?;
        self.out.flush()?;
        Ok(())
    }
}

pub fn write_records(path: &Path, records: &[FlightRecord]) -> Result<(), CliError> {
    let mut w = LogWriter::create(path)?;
    for r in records {
        w.write(r)?;
    }
    Ok(())
}

pub fn write_observations(path: &Path, obs: &[Observation]) -> Result<(), CliError> {
    let mut w = LogWriter::create(path)?;
    for o in obs {
        w.write(o)?;
    }
    Ok(())
}

fn violation(origin: &str, line: usize, msg: impl std::fmt::Display) -> CliError {
    CliError::new(
        ErrorClass::SchemaViolation,
        format!("{origin}: line {line}: {msg}"),
    )
}

fn exact_keys(v: &Value, keys: &[&str], what: &str) -> Result<(), String> {
    let obj = v
        .as_object()
        .ok_or_else(|| format!("{what} is not an object"))?;
    for k in keys {
        if !obj.contains_key(*k) {
            return Err(format!("{what} lacks key {k:?}"));
        }
    }
    if let Some(k) = obj.keys().find(|k| !keys.contains(&k.as_str())) {
        return Err(format!("{what} has unexpected key {k:?}"));
    }
    Ok(())
}

/// Validates one log line against the schema.
pub fn parse_record_line(line: &str) -> Result<FlightRecord, String> {
    let v: Value = serde_json::from_str(line).map_err(|e| format!("not JSON: {e}"))?;
    exact_keys(&v, &RECORD_KEYS, "record")?;
    if let Some(pose) = v.get("pose").filter(|p| !p.is_null()) {
        exact_keys(pose, &POSE_KEYS, "pose")?;
    }
    match v.get("action").and_then(Value::as_str) {
        Some(s) if s.chars().count() == 1 => {}
        _ => return Err("action must be a single letter".into()),
    }
    serde_json::from_value(v).map_err(|e| e.to_string())
}

/// Reads a whole log. Blank lines are violations too; line numbers are 1-based.
pub fn read_records(path: &Path) -> Result<Vec<FlightRecord>, CliError> {
    let origin = path.display().to_string();
    let f = File::open(path).map_err(|e| {
        let class = if e.kind() == std::io::ErrorKind::NotFound {
            ErrorClass::ConfigNotFound
        } else {
            ErrorClass::Io
        };
        CliError::new(class, format!("{origin}: {e}"))
    })?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(|e| violation(&origin, i + 1, e))?;
        out.push(parse_record_line(&line).map_err(|m| violation(&origin, i + 1, m))?);
    }
    Ok(out)
}

pub fn read_observations(path: &Path) -> Result<Vec<Observation>, CliError> {
    let origin = path.display().to_string();
    let f =
        File::open(path).map_err(|e| CliError::new(ErrorClass::Io, format!("{origin}: {e}")))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(|e| violation(&origin, i + 1, e))?;
        out.push(serde_json::from_str(&line).map_err(|e| violation(&origin, i + 1, e))?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use sg_core::{Action, Pose};

    fn rec(pose: Option<Pose>) -> FlightRecord {
        FlightRecord {
            t_ms: 2800,
            persona_id: "gentle-cloud".into(),
            action: Action::Up,
            reason: "To gracefully ascend and avoid the person below".into(),
            latency_ms: 2800,
            pose,
            human_visible: true,
            collision: false,
        }
    }

    #[test]
    fn key_order_is_the_schema_order() {
        let line = record_line(&rec(None));
        assert_eq!(
            line,
            r#"{"t_ms":2800,"persona_id":"gentle-cloud","action":"u","reason":"To gracefully ascend and avoid the person below","latency_ms":2800,"pose":null,"human_visible":true,"collision":false}"#
        );
        let posed = rec(Some(Pose {
            x_m: 1.0,
            y_m: 2.5,
            z_m: 1.5,
            heading_deg: 90.0,
        }));
        assert_eq!(parse_record_line(&record_line(&posed)).unwrap(), posed);
    }

    #[test]
    fn rejects_schema_drift() {
        let good = record_line(&rec(None));
        assert!(parse_record_line(&good).is_ok());
        for bad in [
            good.replace(r#""collision":false"#, r#""collision":false,"extra":1"#),
            good.replace(r#","collision":false"#, ""),
            good.replace(r#""action":"u""#, r#""action":"up""#),
            good.replace(r#""action":"u""#, r#""action":"q""#),
            good.replace(r#""pose":null"#, r#""pose":{"x_m":1}"#),
            good.replace("2800,", "-1,"),
            "[]".to_string(),
            String::new(),
        ] {
            assert!(parse_record_line(&bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn reports_the_bad_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("run.jsonl");
        let mut text = String::new();
        for i in 0..20 {
            if i == 16 {
                text.push_str("{\"t_ms\": oops}\n");
            } else {
                text.push_str(&record_line(&rec(None)));
                text.push('\n');
            }
        }
        std::fs::write(&p, text).unwrap();
        let e = read_records(&p).unwrap_err();
        assert_eq!(e.class, ErrorClass::SchemaViolation);
        assert!(e.message.contains("line 17"), "{}", e.message);
    }

    #[test]
    fn sidecar_names() {
        let p = Path::new("/tmp/x/run.jsonl");
        assert_eq!(obs_path(p), Path::new("/tmp/x/run.obs.jsonl"));
        assert_eq!(manifest_path(p), Path::new("/tmp/x/run.manifest.json"));
        assert_eq!(
            manifest_path(Path::new("log")),
            Path::new("log.manifest.json")
        );
    }
}
