//! Pulling a JSON value out of free-form model output.

use serde_json::Value;

use crate::error::{Error, Result};

fn first_value(text: &str) -> Option<Value> {
    for (i, c) in text.char_indices() {
        if c == '{' || c == '[' {
            let mut it = serde_json::Deserializer::from_str(&text[i..]).into_iter::<Value>();
            if let Some(Ok(v)) = it.next() {
                return Some(v);
            }
        }
    }
    None
}

/// Fenced blocks first (```json ... ```), then the first well-formed object
/// or array anywhere in the text.
pub fn parse_json_block(text: &str) -> Result<Value> {
    let mut rest = text;
    while let Some(open) = rest.find("```") {
        let after = &rest[open + 3..];
        let body_start = after.find('\n').map_or(0, |n| n + 1);
        let Some(close) = after[body_start..].find("```") else {
            break;
        };
        let body = &after[body_start..body_start + close];
        if let Some(v) = first_value(body) {
            return Ok(v);
        }
        rest = &after[body_start + close + 3..];
    }
    first_value(text).ok_or_else(|| Error::Extraction(text.chars().take(200).collect()))
}
