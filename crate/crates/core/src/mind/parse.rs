use alloc::string::{String, ToString};

use crate::action::action_from_letter;
use crate::record::Decision;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("no action letter in reply {raw:?}")]
pub struct ParseFailure {
    pub raw: String,
}

const QUOTES: &[char] = &[
    '"', '\'', '`', '\u{201c}', '\u{201d}', '\u{2018}', '\u{2019}',
];

fn strip_wrapping(s: &str) -> &str {
    s.trim().trim_matches(QUOTES).trim()
}

/// Parses a `letter,reason` reply.
///
/// Splits on the first comma. The letter must be one of the seven
/// movement letters, alone after trimming whitespace and quotes. A reply
/// that is only a letter yields an empty reason.
pub fn parse_decision(raw: &str) -> Result<Decision, ParseFailure> {
    let fail = || ParseFailure {
        raw: raw.to_string(),
    };
    let body = strip_wrapping(raw);
    let (head, reason) = match body.split_once(',') {
        Some((head, reason)) => (head, strip_wrapping(reason)),
        None => (body, ""),
    };
    let mut chars = strip_wrapping(head).chars();
    let letter = chars.next().ok_or_else(fail)?;
    if chars.next().is_some() {
        return Err(fail());
    }
    let action = action_from_letter(letter).map_err(|_| fail())?;
    Ok(Decision::new(action, reason))
}
