//! Deterministic in-process backends. Behaviour is driven by the `ProviderSpec`
//! `endpoint` and `params` so fixtures can shape every response.
//!
//! Common params for every role:
//! - `delay_ms`: sleep before answering.
//! - `fail_attempts`: answer attempts below this number with a transient error.

use std::collections::BTreeMap;

use locot2v_core::frame::GrayFrame;
use locot2v_core::model::HerdDimension;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use super::builtin::{block_flow, content_cuts, linear_midpoint};
use super::{encode_frame, ProviderKind, ProviderSpec, Request};
use crate::error::{Error, Result};
use crate::templates::TemplateId;

pub const TEXT_EMBEDDING_DIM: usize = 64;

pub const DEFAULT_DESCRIPTION: &str = "A person walks through a quiet park in the morning. \
The person stops at a bench and reads a book. Later the person stands up and walks home.";

type Params = BTreeMap<String, Value>;

pub fn respond(spec: &ProviderSpec, req: &Request) -> Result<Value> {
    let params = req.merged_params(spec);
    if let Some(ms) = params.get("delay_ms").and_then(Value::as_u64) {
        std::thread::sleep(std::time::Duration::from_millis(ms));
    }
    let attempt = params.get("attempt").and_then(Value::as_u64).unwrap_or(0);
    let fail = params.get("fail_attempts").and_then(Value::as_u64).unwrap_or(0);
    if attempt < fail {
        return Err(Error::Transient {
            kind: req.kind.to_string(),
            message: format!("injected failure on attempt {attempt}"),
        });
    }
    match req.kind {
        ProviderKind::TextEmbedder => Ok(json!({ "embedding": text_embedding(req.body_str("text"), &params) })),
        ProviderKind::FrameEmbedder => Ok(json!({ "embedding": frame_embedding(first_frame(req)?) })),
        ProviderKind::VideoDescriber => {
            // `variants` picks a description from the content of the frames.
            let variant = params
                .get("variants")
                .and_then(Value::as_array)
                .filter(|v| !v.is_empty())
                .and_then(|v| v[content_index(req, v.len())].as_str());
            let text = variant
                .or_else(|| params.get("text").and_then(Value::as_str))
                .unwrap_or(DEFAULT_DESCRIPTION);
            Ok(json!({ "text": text }))
        }
        ProviderKind::QuestionAnswerer => answer(req, &params),
        ProviderKind::SceneDetector => {
            let transitions = match params.get("transitions") {
                Some(t) => t.clone(),
                None => {
                    let threshold = params.get("threshold").and_then(Value::as_f64).unwrap_or(30.0);
                    json!(content_cuts(&req.frames, threshold)?)
                }
            };
            Ok(json!({ "transitions": transitions }))
        }
        ProviderKind::FlowEstimator => flow(spec, req, &params),
        ProviderKind::FrameInterpolator => {
            let (a, b) = frame_pair(req)?;
            let f = match spec.endpoint.as_str() {
                "identity" => a.clone(),
                "black" => GrayFrame::filled(a.width, a.height, 0),
                _ => linear_midpoint(a, b),
            };
            Ok(json!({ "frame": encode_frame(&f) }))
        }
        ProviderKind::Segmenter => segment(req, &params),
        ProviderKind::TemporalGrounder => {
            let event = req.body_str("event");
            let span = params
                .get("spans")
                .and_then(|s| s.get(event))
                .and_then(Value::as_array)
                .filter(|a| a.len() == 2)
                .ok_or_else(|| Error::provider(req.kind, format!("no span for event {event:?}")))?;
            Ok(json!({ "start_s": span[0], "end_s": span[1] }))
        }
        ProviderKind::AestheticScorer => {
            let f = first_frame(req)?;
            Ok(json!({ "score": 1.0 + 9.0 * f.mean() / 255.0 }))
        }
        ProviderKind::TechnicalScorer => {
            if req.frames.is_empty() {
                return Err(Error::provider(req.kind, "no frames"));
            }
            let m = req.frames.iter().map(GrayFrame::mean).sum::<f64>() / req.frames.len() as f64;
            Ok(json!({ "score": m / 255.0 }))
        }
        ProviderKind::ComplexityJudge => text_llm(req, &params),
    }
}

/// Index in `0..n` derived from the bytes of the request frames.
fn content_index(req: &Request, n: usize) -> usize {
    let mut h = Sha256::new();
    for f in &req.frames {
        h.update(&f.data);
    }
    let d = h.finalize();
    (u64::from_le_bytes(d[..8].try_into().expect("8 bytes")) % n as u64) as usize
}

fn first_frame(req: &Request) -> Result<&GrayFrame> {
    req.frames
        .first()
        .ok_or_else(|| Error::provider(req.kind, "request carries no frame"))
}

fn frame_pair(req: &Request) -> Result<(&GrayFrame, &GrayFrame)> {
    match req.frames.as_slice() {
        [a, b] => Ok((a, b)),
        _ => Err(Error::provider(req.kind, "expected two frames")),
    }
}

/// Hashed bag of words, or a preset from the `vectors` param.
pub fn text_embedding(text: &str, params: &Params) -> Vec<f64> {
    if let Some(v) = params
        .get("vectors")
        .and_then(|t| t.get(text))
        .and_then(Value::as_array)
    {
        return v.iter().filter_map(Value::as_f64).collect();
    }
    let mut out = vec![0.0; TEXT_EMBEDDING_DIM];
    // A small constant component keeps empty text away from the zero vector.
    out[0] = 1e-3;
    for word in words(text) {
        let h = Sha256::digest(word.as_bytes());
        let idx = (h[0] as usize) % TEXT_EMBEDDING_DIM;
        let sign = if h[1] & 1 == 0 { 1.0 } else { -1.0 };
        out[idx] += sign;
    }
    out
}

fn words(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
}

/// 8x8 grid of block means, offset so the vector is never zero.
pub fn frame_embedding(f: &GrayFrame) -> Vec<f64> {
    let mut out = Vec::with_capacity(64);
    for gy in 0..8 {
        for gx in 0..8 {
            let (x0, x1) = (gx * f.width / 8, ((gx + 1) * f.width / 8).max(gx * f.width / 8 + 1));
            let (y0, y1) = (gy * f.height / 8, ((gy + 1) * f.height / 8).max(gy * f.height / 8 + 1));
            let mut sum = 0.0;
            let mut n = 0.0;
            for y in y0..y1.min(f.height) {
                for x in x0..x1.min(f.width) {
                    sum += f.at(x, y) as f64;
                    n += 1.0;
                }
            }
            let m = if n > 0.0 { sum / n } else { 0.0 };
            out.push(m / 255.0 + 0.05);
        }
    }
    out
}

fn flow(spec: &ProviderSpec, req: &Request, params: &Params) -> Result<Value> {
    let (a, b) = frame_pair(req)?;
    let field = match spec.endpoint.as_str() {
        "zero" => locot2v_core::frame::FlowField::uniform(a.width, a.height, 0.0, 0.0),
        "uniform" => {
            let dx = params.get("dx").and_then(Value::as_f64).unwrap_or(0.0) as f32;
            let dy = params.get("dy").and_then(Value::as_f64).unwrap_or(0.0) as f32;
            locot2v_core::frame::FlowField::uniform(a.width, a.height, dx, dy)
        }
        _ => {
            let block = params.get("block").and_then(Value::as_u64).unwrap_or(8) as usize;
            let radius = params.get("radius").and_then(Value::as_i64).unwrap_or(4);
            block_flow(a, b, block, radius)
        }
    };
    serde_json::to_value(&field).map_err(|e| Error::json("flow", e))
}

fn segment(req: &Request, params: &Params) -> Result<Value> {
    let f = first_frame(req)?;
    let label = req.body_str("label");
    let range = params
        .get("subjects")
        .and_then(|s| s.get(label))
        .or_else(|| params.get("default_range"))
        .and_then(Value::as_array)
        .filter(|a| a.len() == 2)
        .map(|a| (a[0].as_u64().unwrap_or(0) as u8, a[1].as_u64().unwrap_or(0) as u8));
    let data: Vec<u8> = match range {
        Some((lo, hi)) => f.data.iter().map(|&p| u8::from(p >= lo && p <= hi)).collect(),
        None => vec![0; f.data.len()],
    };
    let mask = GrayFrame::new(f.width, f.height, data)?;
    let enc = encode_frame(&mask);
    Ok(json!({ "width": f.width, "height": f.height, "mask": enc["data"] }))
}

fn task(req: &Request) -> &str {
    req.body_str("task")
}

fn answer(req: &Request, params: &Params) -> Result<Value> {
    if task(req) == TemplateId::Clarity.name() {
        let trial = params.get("trial").and_then(Value::as_u64).unwrap_or(0) as usize;
        let scores = params
            .get("clarity_trials")
            .and_then(Value::as_array)
            .and_then(|t| t.get(trial))
            .or_else(|| params.get("clarity_scores"))
            .and_then(Value::as_array)
            .map(|a| a.iter().map(|v| v.as_u64().unwrap_or(0)).collect::<Vec<_>>())
            .unwrap_or_else(|| vec![3; 4]);
        let names = [
            "Theme Clarity",
            "Logical Structure",
            "Information Completeness",
            "Information Consistency",
        ];
        let mut obj = serde_json::Map::new();
        for (name, s) in names.iter().zip(scores.iter().chain(std::iter::repeat(&3))) {
            obj.insert((*name).into(), json!({ "score": s, "reason": "fixture" }));
        }
        return Ok(json!({ "text": format!("```json\n{}\n```", Value::Object(obj)) }));
    }
    let question = req.body_str("question_text");
    if let Some(text) = params.get("answers").and_then(|a| a.get(question)).and_then(Value::as_str) {
        return Ok(json!({ "text": text }));
    }
    // `answer_mode = "digest"` answers from a hash of question and frames.
    if params.get("answer_mode").and_then(Value::as_str) == Some("digest") {
        let mut h = Sha256::new();
        h.update(question.as_bytes());
        for f in &req.frames {
            h.update(&f.data);
        }
        let yes = h.finalize()[0] % 3 != 0;
        return Ok(json!({ "text": if yes { "Yes." } else { "No." } }));
    }
    let text = params.get("default_answer").and_then(Value::as_str).unwrap_or("yes");
    Ok(json!({ "text": text }))
}

fn sentences(text: &str) -> Vec<String> {
    text.split(['.', '!', '?', '\n'])
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect()
}

const ARTICLES: [&str; 6] = ["a", "an", "the", "then", "later", "finally"];

fn mock_event(sentence: &str) -> Value {
    let ws: Vec<&str> = sentence.split_whitespace().collect();
    let subject_at = ws
        .iter()
        .position(|w| !ARTICLES.contains(&w.to_lowercase().trim_matches(',')))
        .unwrap_or(0);
    let subject = ws.get(subject_at).map_or("", |w| w.trim_matches(','));
    let action = ws.get(subject_at + 1..).map_or(String::new(), |r| r.join(" "));
    let lower = sentence.to_lowercase();
    let setting = [" in ", " at "]
        .iter()
        .filter_map(|k| lower.find(k).map(|i| sentence[i + k.len()..].trim().to_string()))
        .next()
        .unwrap_or_default();
    json!({
        "event": format!("{sentence}."),
        "subject": subject,
        "setting": setting,
        "action": action,
        "camera motion": "static",
    })
}

const NEGATIVE_CUES: [&str; 6] = ["lack", "fail", "not", "unclear", "confusing", "weak"];

fn text_llm(req: &Request, params: &Params) -> Result<Value> {
    let text = match task(req) {
        "complexity" => {
            let c = params
                .get("complexity")
                .and_then(Value::as_array)
                .map(|a| a.iter().map(|v| v.as_u64().unwrap_or(5)).collect::<Vec<_>>())
                .unwrap_or_else(|| vec![5, 5, 5]);
            let get = |i: usize| c.get(i).copied().unwrap_or(5);
            json!({
                "semantic_complexity": {"score": get(0), "explanation": "fixture"},
                "structural_complexity": {"score": get(1), "explanation": "fixture"},
                "control_complexity": {"score": get(2), "explanation": "fixture"},
            })
            .to_string()
        }
        "events" => {
            let src = req.body_str("description_text");
            Value::Array(sentences(src).iter().map(|s| mock_event(s)).collect()).to_string()
        }
        "actions" => params.get("actions").cloned().unwrap_or(json!([])).to_string(),
        "herd_extract" => {
            let obj: serde_json::Map<String, Value> = HerdDimension::ALL
                .iter()
                .map(|d| (d.title().to_string(), json!(format!("The evaluator comments on {}.", d.title().to_lowercase()))))
                .collect();
            Value::Object(obj).to_string()
        }
        "herd_questions" => {
            // One question per aspect and call; `slot` and `regen` vary it.
            let fixed = params.get("fixed_slot").and_then(Value::as_u64);
            let slot = fixed.or_else(|| params.get("slot").and_then(Value::as_u64)).unwrap_or(0);
            let regen = params.get("regen").and_then(Value::as_u64).unwrap_or(0);
            let suffix = if regen > 0 { format!(" (variant {regen})") } else { String::new() };
            let obj: serde_json::Map<String, Value> = HerdDimension::ALL
                .iter()
                .map(|d| {
                    let q = format!(
                        "Does the video deliver on {} point {}{suffix}?",
                        d.title().to_lowercase(),
                        slot + 1
                    );
                    (d.title().to_string(), json!(q))
                })
                .collect();
            Value::Object(obj).to_string()
        }
        "polarity" => {
            let q = req.body_str("question_text").to_lowercase();
            let negative = words(&q).any(|w| NEGATIVE_CUES.contains(&w.as_str()));
            (if negative { "negative" } else { "positive" }).to_string()
        }
        "split_events" => {
            let n = req
                .body_str("event_count")
                .parse::<usize>()
                .unwrap_or(1)
                .max(1);
            let parts = sentences(req.body_str("prompt_text"));
            let groups: Vec<String> = locot2v_core::temporal::uniform_partition(parts.len(), n.min(parts.len().max(1)))
                .into_iter()
                .map(|range| format!("{}.", parts[range].join(". ")))
                .collect();
            json!(groups).to_string()
        }
        other => return Err(Error::provider(req.kind, format!("mock has no behaviour for task {other:?}"))),
    };
    Ok(json!({ "text": text }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn llm_req(task: &str, vars: &[(&str, &str)]) -> Request {
        let mut body = serde_json::Map::new();
        body.insert("task".into(), json!(task));
        for (k, v) in vars {
            body.insert((*k).into(), json!(v));
        }
        Request::new(ProviderKind::ComplexityJudge, Value::Object(body))
    }

    #[test]
    fn events_from_sentences() {
        let spec = ProviderSpec::mock("default");
        let r = respond(
            &spec,
            &llm_req("events", &[("description_text", "A chef cooks pasta in a kitchen. The chef serves it.")]),
        )
        .unwrap();
        let v: Value = serde_json::from_str(r["text"].as_str().unwrap()).unwrap();
        assert_eq!(v[0]["subject"], "chef");
        assert_eq!(v[0]["setting"], "a kitchen");
        assert_eq!(v[1]["action"], "serves it");
        assert_eq!(v.as_array().unwrap().len(), 2);
    }

    #[test]
    fn polarity_cues() {
        let spec = ProviderSpec::mock("default");
        let neg = respond(&spec, &llm_req("polarity", &[("question_text", "Does the plot lack focus?")])).unwrap();
        let pos = respond(&spec, &llm_req("polarity", &[("question_text", "Is the plot engaging?")])).unwrap();
        assert_eq!(neg["text"], "negative");
        assert_eq!(pos["text"], "positive");
    }

    #[test]
    fn injected_failures_depend_on_attempt() {
        let spec = ProviderSpec::mock("default").with_param("fail_attempts", json!(1));
        let req = Request::new(ProviderKind::TextEmbedder, json!({"text": "a"}));
        assert!(respond(&spec, &req).is_err());
        assert!(respond(&spec, &req.clone().param("attempt", json!(1))).is_ok());
    }

    #[test]
    fn frame_embedding_tracks_layout() {
        let a = GrayFrame::from_fn(16, 16, |x, _| if x < 8 { 0 } else { 255 });
        let e = frame_embedding(&a);
        assert_eq!(e.len(), 64);
        assert!((e[0] - 0.05).abs() < 1e-12);
        assert!((e[7] - 1.05).abs() < 1e-12);
    }

    #[test]
    fn segmenter_uses_luma_ranges() {
        let spec = ProviderSpec::mock("default").with_param("subjects", json!({"cat": [200, 255]}));
        let f = GrayFrame::from_fn(4, 1, |x, _| (x * 80) as u8);
        let req = Request::new(ProviderKind::Segmenter, json!({"label": "cat"})).frames(vec![f], None);
        let r = respond(&spec, &req).unwrap();
        let m = super::super::decode_frame(&json!({"width": 4, "height": 1, "data": r["mask"]})).unwrap();
        assert_eq!(m.data, vec![0, 0, 0, 1]);
    }
}
