//! Suite files: `{"version": string, "samples": [PromptRecord, ...]}`.

use std::path::Path;

use locot2v_core::model::{validate_suite, ValidationRules};
use locot2v_core::{Category, HerdDimension, PromptRecord};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::provider::cache::write_atomic;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Suite {
    pub version: String,
    pub samples: Vec<PromptRecord>,
}

impl Suite {
    pub fn record(&self, id: &str) -> Option<&PromptRecord> {
        self.samples.iter().find(|r| r.id == id)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self).map_err(|e| Error::json("suite", e))?;
        s.push('\n');
        Ok(s)
    }
}

/// Enum-valued fields checked on the raw document so that a bad value is
/// reported with its path instead of as a bare decoding error.
fn enum_violations(doc: &Value) -> Vec<String> {
    let mut out = Vec::new();
    let Some(samples) = doc.get("samples").and_then(Value::as_array) else {
        out.push("samples: missing or not an array".into());
        return out;
    };
    for (i, s) in samples.iter().enumerate() {
        if let Some(c) = s.get("category").and_then(Value::as_str) {
            if Category::parse(c).is_none() {
                let allowed: Vec<&str> = Category::ALL.iter().map(|c| c.as_str()).collect();
                out.push(format!("samples[{i}].category: not in {{{}}}", allowed.join(",")));
            }
        }
        let Some(qs) = s.get("herd_questions").and_then(Value::as_array) else {
            continue;
        };
        for (j, q) in qs.iter().enumerate() {
            match q.get("polarity").and_then(Value::as_str) {
                Some("positive" | "negative") => {}
                _ => out.push(format!(
                    "samples[{i}].herd_questions[{j}].polarity: not in {{positive,negative}}"
                )),
            }
            match q.get("dimension").and_then(Value::as_str) {
                Some(d) if HerdDimension::ALL.iter().any(|x| x.as_str() == d) => {}
                _ => {
                    let allowed: Vec<&str> = HerdDimension::ALL.iter().map(|d| d.as_str()).collect();
                    out.push(format!(
                        "samples[{i}].herd_questions[{j}].dimension: not in {{{}}}",
                        allowed.join(",")
                    ));
                }
            }
        }
    }
    out
}

/// Parses a suite document. Enum violations are reported together as one
/// suite error.
pub fn parse_suite(text: &str) -> Result<Suite> {
    let doc: Value = serde_json::from_str(text).map_err(|e| Error::json("suite", e))?;
    let problems = enum_violations(&doc);
    if !problems.is_empty() {
        return Err(Error::Suite(problems.join("\n")));
    }
    serde_json::from_value(doc).map_err(|e| Error::Suite(e.to_string()))
}

pub fn load_suite(path: &Path) -> Result<Suite> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_suite(&text).map_err(|e| match e {
        Error::Suite(m) => Error::Suite(format!("{}:\n{m}", path.display())),
        other => other,
    })
}

pub fn save_suite(path: &Path, suite: &Suite) -> Result<()> {
    write_atomic(path, suite.to_json()?.as_bytes())
}

/// Every violation in a suite file, decoding problems included.
pub fn validate_file(path: &Path, rules: &ValidationRules) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let doc: Value = match serde_json::from_str(&text) {
        Ok(d) => d,
        Err(e) => return Ok(vec![format!("not valid JSON: {e}")]),
    };
    let problems = enum_violations(&doc);
    if !problems.is_empty() {
        return Ok(problems);
    }
    match serde_json::from_value::<Suite>(doc) {
        Ok(suite) => Ok(validate_suite(&suite.samples, rules)),
        Err(e) => Ok(vec![format!("schema: {e}")]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn doc(polarity: &str) -> String {
        json!({
            "version": "1",
            "samples": [{
                "id": "a", "theme": "cooking", "category": "human-real-life",
                "prompt_text": "p", "prompt_base": "p",
                "ground_truth_events": [{"event": "e", "subject": "", "setting": "s", "action": "a"}],
                "herd_questions": [
                    {"dimension": "themes", "text": "q?", "polarity": "positive"},
                    {"dimension": "themes", "text": "q?", "polarity": "positive"},
                    {"dimension": "themes", "text": "q?", "polarity": "positive"},
                    {"dimension": "themes", "text": "q?", "polarity": polarity}
                ]
            }]
        })
        .to_string()
    }

    #[test]
    fn bad_polarity_names_the_field() {
        let err = parse_suite(&doc("maybe")).unwrap_err();
        assert!(
            err.to_string()
                .contains("herd_questions[3].polarity: not in {positive,negative}"),
            "{err}"
        );
    }

    #[test]
    fn camera_motion_defaults_and_round_trips() {
        let s = parse_suite(&doc("negative")).unwrap();
        assert_eq!(s.samples[0].ground_truth_events[0].camera_motion, "static");
        let again = parse_suite(&s.to_json().unwrap()).unwrap();
        assert_eq!(again, s);
        let v: Value = serde_json::from_str(&s.to_json().unwrap()).unwrap();
        assert!(v["samples"][0]["ground_truth_events"][0].get("camera motion").is_some());
    }

    #[test]
    fn validation_reports_dimension_count() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.json");
        std::fs::write(&p, doc("negative")).unwrap();
        let v = validate_file(&p, &ValidationRules::default()).unwrap();
        assert!(v.iter().any(|m| m.contains("expected 7 dimensions, found 1")), "{v:?}");
    }
}
