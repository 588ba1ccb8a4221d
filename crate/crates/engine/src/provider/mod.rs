//! Uniform access to external models.
//!
//! Every role takes a JSON body plus optional frame attachments and returns
//! a JSON value with a role-specific shape (see [`ProviderKind`]). Calls go
//! through [`Hub::invoke`], which handles caching, retries, validation and
//! concurrency limits.

pub mod builtin;
pub mod cache;
pub mod mock;
pub mod remote;

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Condvar, Mutex};
use std::time::{Duration, Instant};

use base64::Engine as _;
use locot2v_core::frame::{FlowField, GrayFrame, Mask};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::jsonblock::parse_json_block;
use crate::templates::TemplateId;

pub use cache::ResponseCache;

/// Model roles and their response shapes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProviderKind {
    /// `{"embedding": [f64]}` for `{"text"}`.
    TextEmbedder,
    /// `{"embedding": [f64]}` for one frame.
    FrameEmbedder,
    /// `{"text"}` for `{"prompt"}` and frames.
    VideoDescriber,
    /// `{"text"}` for `{"task", "prompt", ...}` and frames.
    QuestionAnswerer,
    /// `{"transitions": [frame index]}` for all frames.
    SceneDetector,
    /// `{"width", "height", "dx", "dy"}` over the first frame's grid.
    FlowEstimator,
    /// `{"frame": encoded frame}` between two frames.
    FrameInterpolator,
    /// `{"width", "height", "mask": base64 bytes}` for `{"label"}` and one frame.
    Segmenter,
    /// `{"start_s", "end_s"}` for `{"event"}` and frames.
    TemporalGrounder,
    /// `{"score"}` on a 1–10 scale for one frame.
    AestheticScorer,
    /// `{"score"}` in the declared `range` param for a clip.
    TechnicalScorer,
    /// `{"text"}` for `{"task", "prompt"}`; also serves every text-only LLM task.
    ComplexityJudge,
}

impl ProviderKind {
    pub const ALL: [ProviderKind; 12] = [
        ProviderKind::TextEmbedder,
        ProviderKind::FrameEmbedder,
        ProviderKind::VideoDescriber,
        ProviderKind::QuestionAnswerer,
        ProviderKind::SceneDetector,
        ProviderKind::FlowEstimator,
        ProviderKind::FrameInterpolator,
        ProviderKind::Segmenter,
        ProviderKind::TemporalGrounder,
        ProviderKind::AestheticScorer,
        ProviderKind::TechnicalScorer,
        ProviderKind::ComplexityJudge,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ProviderKind::TextEmbedder => "text_embedder",
            ProviderKind::FrameEmbedder => "frame_embedder",
            ProviderKind::VideoDescriber => "video_describer",
            ProviderKind::QuestionAnswerer => "question_answerer",
            ProviderKind::SceneDetector => "scene_detector",
            ProviderKind::FlowEstimator => "flow_estimator",
            ProviderKind::FrameInterpolator => "frame_interpolator",
            ProviderKind::Segmenter => "segmenter",
            ProviderKind::TemporalGrounder => "temporal_grounder",
            ProviderKind::AestheticScorer => "aesthetic_scorer",
            ProviderKind::TechnicalScorer => "technical_scorer",
            ProviderKind::ComplexityJudge => "complexity_judge",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        let s = s.replace('-', "_");
        Self::ALL.into_iter().find(|k| k.as_str() == s)
    }
}

impl std::fmt::Display for ProviderKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    /// Deterministic in-process fixture behaviour.
    Mock,
    /// In-process classical algorithm (flow, cuts, interpolation).
    Builtin,
    /// External program: request JSON on stdin, response JSON on stdout.
    Command,
    /// HTTP POST of the request JSON; response JSON in the body.
    Http,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProviderSpec {
    pub backend: Backend,
    /// Mock/builtin variant name, command line, or URL.
    pub endpoint: String,
    pub version: String,
    pub params: BTreeMap<String, Value>,
    pub retries: u32,
    pub timeout_s: f64,
    /// Environment variable holding a bearer token for `http`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub api_key_env: Option<String>,
    /// Defaults to on for `command`/`http`, off for in-process backends.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cache: Option<bool>,
    /// Minimum spacing between calls to this provider.
    pub min_interval_ms: u64,
}

impl Default for ProviderSpec {
    fn default() -> Self {
        ProviderSpec {
            backend: Backend::Mock,
            endpoint: "default".into(),
            version: "1".into(),
            params: BTreeMap::new(),
            retries: 2,
            timeout_s: 120.0,
            api_key_env: None,
            cache: None,
            min_interval_ms: 0,
        }
    }
}

impl ProviderSpec {
    pub fn mock(endpoint: &str) -> Self {
        ProviderSpec {
            endpoint: endpoint.into(),
            ..Default::default()
        }
    }

    pub fn builtin(endpoint: &str) -> Self {
        ProviderSpec {
            backend: Backend::Builtin,
            endpoint: endpoint.into(),
            ..Default::default()
        }
    }

    pub fn with_param(mut self, key: &str, value: Value) -> Self {
        self.params.insert(key.into(), value);
        self
    }

    pub fn caches(&self) -> bool {
        self.cache
            .unwrap_or(matches!(self.backend, Backend::Command | Backend::Http))
    }

    /// Identity of the model behind this provider spec, part of every cache key.
    pub fn provider_version(&self) -> String {
        let backend = match self.backend {
            Backend::Mock => "mock",
            Backend::Builtin => "builtin",
            Backend::Command => "command",
            Backend::Http => "http",
        };
        format!("{backend}:{}@{}", self.endpoint, self.version)
    }

    pub fn param_f64(&self, key: &str, default: f64) -> f64 {
        self.params.get(key).and_then(Value::as_f64).unwrap_or(default)
    }

    pub fn param_str<'a>(&'a self, key: &str, default: &'a str) -> &'a str {
        self.params.get(key).and_then(Value::as_str).unwrap_or(default)
    }
}

/// One provider call.
#[derive(Debug, Clone)]
pub struct Request {
    pub kind: ProviderKind,
    pub body: Value,
    pub frames: Vec<GrayFrame>,
    pub fps: Option<f64>,
    pub template: Option<TemplateId>,
    /// Per-call parameters (trial index, retry attempt), merged over the
    /// spec's params.
    pub params: BTreeMap<String, Value>,
}

impl Request {
    pub fn new(kind: ProviderKind, body: Value) -> Self {
        Request {
            kind,
            body,
            frames: Vec::new(),
            fps: None,
            template: None,
            params: BTreeMap::new(),
        }
    }

    pub fn frames(mut self, frames: Vec<GrayFrame>, fps: Option<f64>) -> Self {
        self.frames = frames;
        self.fps = fps;
        self
    }

    pub fn template(mut self, t: TemplateId) -> Self {
        self.template = Some(t);
        self
    }

    pub fn param(mut self, key: &str, value: Value) -> Self {
        self.params.insert(key.into(), value);
        self
    }

    pub fn merged_params(&self, spec: &ProviderSpec) -> BTreeMap<String, Value> {
        let mut p = spec.params.clone();
        p.extend(self.params.clone());
        p
    }

    pub fn body_str(&self, key: &str) -> &str {
        self.body.get(key).and_then(Value::as_str).unwrap_or("")
    }
}

fn strip_paths(v: &Value) -> Value {
    match v {
        Value::Object(m) => Value::Object(
            m.iter()
                .filter(|(k, _)| k.as_str() != "path")
                .map(|(k, v)| (k.clone(), strip_paths(v)))
                .collect(),
        ),
        Value::Array(a) => Value::Array(a.iter().map(strip_paths).collect()),
        other => other.clone(),
    }
}

pub fn frame_digest(f: &GrayFrame) -> String {
    let mut h = Sha256::new();
    h.update((f.width as u64).to_le_bytes());
    h.update((f.height as u64).to_le_bytes());
    h.update(&f.data);
    hex::encode(h.finalize())
}

/// Content digest of a request: kind, provider identity, template version,
/// body (minus `path` keys), merged params, frame digests and fps.
pub fn request_digest(spec: &ProviderSpec, req: &Request) -> String {
    let canonical = json!({
        "kind": req.kind.as_str(),
        "provider": spec.provider_version(),
        "template": req.template.map(TemplateId::version),
        "body": strip_paths(&req.body),
        "params": req.merged_params(spec),
        "frames": req.frames.iter().map(frame_digest).collect::<Vec<_>>(),
        "fps": req.fps,
    });
    // serde_json maps are ordered, so this serialization is canonical.
    let bytes = serde_json::to_vec(&canonical).unwrap_or_default();
    hex::encode(Sha256::digest(&bytes))
}

pub fn encode_frame(f: &GrayFrame) -> Value {
    json!({
        "width": f.width,
        "height": f.height,
        "data": base64::engine::general_purpose::STANDARD.encode(&f.data),
    })
}

pub fn decode_frame(v: &Value) -> Result<GrayFrame> {
    let w = v.get("width").and_then(Value::as_u64).unwrap_or(0) as usize;
    let h = v.get("height").and_then(Value::as_u64).unwrap_or(0) as usize;
    let data = v
        .get("data")
        .and_then(Value::as_str)
        .and_then(|s| base64::engine::general_purpose::STANDARD.decode(s).ok())
        .ok_or_else(|| Error::provider("frame", "missing or invalid frame data"))?;
    Ok(GrayFrame::new(w, h, data)?)
}

/// The JSON document sent to command and HTTP backends.
pub fn wire_request(spec: &ProviderSpec, req: &Request) -> Value {
    json!({
        "kind": req.kind.as_str(),
        "template_version": req.template.map(TemplateId::version),
        "body": req.body,
        "params": req.merged_params(spec),
        "fps": req.fps,
        "frames": req.frames.iter().map(encode_frame).collect::<Vec<_>>(),
    })
}

#[derive(Debug)]
struct Gate {
    limit: usize,
    used: Mutex<usize>,
    cv: Condvar,
}

impl Gate {
    fn acquire(&self) -> GateGuard<'_> {
        let mut used = self.used.lock().unwrap_or_else(|e| e.into_inner());
        while *used >= self.limit {
            used = self.cv.wait(used).unwrap_or_else(|e| e.into_inner());
        }
        *used += 1;
        GateGuard(self)
    }
}

struct GateGuard<'a>(&'a Gate);

impl Drop for GateGuard<'_> {
    fn drop(&mut self) {
        let mut used = self.0.used.lock().unwrap_or_else(|e| e.into_inner());
        *used -= 1;
        self.0.cv.notify_one();
    }
}

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct HubStats {
    pub backend_calls: usize,
    pub cache_hits: usize,
}

/// Shared entry point for every provider call. Safe to use from many threads.
#[derive(Debug)]
pub struct Hub {
    specs: BTreeMap<ProviderKind, ProviderSpec>,
    cache: Option<ResponseCache>,
    gate: Gate,
    last_call: Mutex<BTreeMap<ProviderKind, Instant>>,
    backend_calls: AtomicUsize,
    cache_hits: AtomicUsize,
}

impl Hub {
    pub fn new(
        specs: BTreeMap<ProviderKind, ProviderSpec>,
        cache: Option<ResponseCache>,
        max_parallel: usize,
    ) -> Self {
        Hub {
            specs,
            cache,
            gate: Gate {
                limit: max_parallel.max(1),
                used: Mutex::new(0),
                cv: Condvar::new(),
            },
            last_call: Mutex::new(BTreeMap::new()),
            backend_calls: AtomicUsize::new(0),
            cache_hits: AtomicUsize::new(0),
        }
    }

    /// Hub with the default mock/builtin spec for every role.
    pub fn mocked() -> Self {
        Hub::new(default_specs(), None, 4)
    }

    pub fn spec(&self, kind: ProviderKind) -> ProviderSpec {
        self.specs
            .get(&kind)
            .cloned()
            .unwrap_or_else(|| default_specs().remove(&kind).unwrap_or_default())
    }

    pub fn stats(&self) -> HubStats {
        HubStats {
            backend_calls: self.backend_calls.load(Ordering::Relaxed),
            cache_hits: self.cache_hits.load(Ordering::Relaxed),
        }
    }

    fn pace(&self, kind: ProviderKind, spec: &ProviderSpec) {
        if spec.min_interval_ms == 0 {
            return;
        }
        let gap = Duration::from_millis(spec.min_interval_ms);
        loop {
            let wait = {
                let mut last = self.last_call.lock().unwrap_or_else(|e| e.into_inner());
                let now = Instant::now();
                match last.get(&kind) {
                    Some(&t) if now < t + gap => t + gap - now,
                    _ => {
                        last.insert(kind, now);
                        return;
                    }
                }
            };
            std::thread::sleep(wait);
        }
    }

    fn call_backend(&self, spec: &ProviderSpec, req: &Request) -> Result<Value> {
        let _slot = self.gate.acquire();
        self.pace(req.kind, spec);
        self.backend_calls.fetch_add(1, Ordering::Relaxed);
        match spec.backend {
            Backend::Mock | Backend::Builtin => mock::respond(spec, req),
            Backend::Command => remote::call_command(spec, req),
            Backend::Http => remote::call_http(spec, req),
        }
    }

    /// Calls the provider for `req.kind` and validates the response with
    /// `check`. Cached responses are returned as stored. Failed or invalid
    /// attempts are retried with an `attempt` param so that each retry has
    /// its own cache key.
    pub fn invoke<T>(&self, req: Request, check: impl Fn(&Value) -> Result<T>) -> Result<T> {
        let spec = self.spec(req.kind);
        let caching = spec.caches() && self.cache.is_some();
        let mut last_err = None;
        for attempt in 0..=spec.retries {
            let mut r = req.clone();
            if attempt > 0 {
                r.params.insert("attempt".into(), json!(attempt));
            }
            let digest = request_digest(&spec, &r);
            if caching {
                if let Some(entry) = self.cache.as_ref().and_then(|c| c.get(r.kind.as_str(), &digest)) {
                    if let Ok(v) = check(&entry.response) {
                        self.cache_hits.fetch_add(1, Ordering::Relaxed);
                        return Ok(v);
                    }
                }
            }
            let outcome = self
                .call_backend(&spec, &r)
                .and_then(|resp| check(&resp).map(|v| (resp, v)));
            match outcome {
                Ok((resp, v)) => {
                    if caching {
                        if let Some(c) = &self.cache {
                            c.put(r.kind.as_str(), &digest, &resp, &spec.provider_version())?;
                        }
                    }
                    return Ok(v);
                }
                Err(e) if e.is_retryable() => {
                    log::debug!("{} attempt {attempt} failed: {e}", r.kind);
                    last_err = Some(e);
                }
                Err(e) => return Err(e),
            }
        }
        Err(last_err.unwrap_or_else(|| Error::provider(req.kind, "no attempts made")))
    }

    // -- typed role calls ---------------------------------------------------

    pub fn embed_text(&self, text: &str) -> Result<Vec<f64>> {
        let req = Request::new(ProviderKind::TextEmbedder, json!({ "text": text }));
        self.invoke(req, |v| unit_embedding(ProviderKind::TextEmbedder, v))
    }

    pub fn embed_frame(&self, frame: &GrayFrame) -> Result<Vec<f64>> {
        let req = Request::new(ProviderKind::FrameEmbedder, json!({})).frames(vec![frame.clone()], None);
        self.invoke(req, |v| unit_embedding(ProviderKind::FrameEmbedder, v))
    }

    pub fn describe(&self, frames: Vec<GrayFrame>, fps: f64) -> Result<String> {
        let req = Request::new(ProviderKind::VideoDescriber, templated_body(TemplateId::Describe, &[]))
            .frames(frames, Some(fps))
        .template(TemplateId::Describe);
        self.invoke(req, |v| {
            let text = text_field(ProviderKind::VideoDescriber, v)?;
            check_paragraph(&text)?;
            Ok(text.trim().to_string())
        })
    }

    /// Answer from the question answerer to `template` rendered with `vars`.
    /// The variables are also sent as body fields.
    pub fn ask<T>(
        &self,
        template: TemplateId,
        vars: &[(&str, &str)],
        frames: Vec<GrayFrame>,
        fps: f64,
        params: &[(&str, Value)],
        parse: impl Fn(&str) -> Result<T>,
    ) -> Result<T> {
        let mut req = Request::new(ProviderKind::QuestionAnswerer, templated_body(template, vars))
            .frames(frames, Some(fps))
            .template(template);
        for (k, v) in params {
            req = req.param(k, v.clone());
        }
        self.invoke(req, |v| parse(&text_field(ProviderKind::QuestionAnswerer, v)?))
    }

    /// Text-only LLM call through the judge role.
    pub fn llm<T>(
        &self,
        template: TemplateId,
        vars: &[(&str, &str)],
        params: &[(&str, Value)],
        parse: impl Fn(&str) -> Result<T>,
    ) -> Result<T> {
        let mut req = Request::new(ProviderKind::ComplexityJudge, templated_body(template, vars)).template(template);
        for (k, v) in params {
            req = req.param(k, v.clone());
        }
        self.invoke(req, |v| parse(&text_field(ProviderKind::ComplexityJudge, v)?))
    }

    /// Like [`Hub::llm`] but parses a JSON block out of the reply first.
    pub fn llm_json<T>(
        &self,
        template: TemplateId,
        vars: &[(&str, &str)],
        params: &[(&str, Value)],
        parse: impl Fn(&Value) -> Result<T>,
    ) -> Result<T> {
        self.llm(template, vars, params, |text| parse(&parse_json_block(text)?))
    }

    pub fn scenes(&self, frames: &[GrayFrame], fps: f64) -> Result<Vec<usize>> {
        let req = Request::new(ProviderKind::SceneDetector, json!({})).frames(frames.to_vec(), Some(fps));
        let n = frames.len();
        self.invoke(req, |v| {
            let arr = v
                .get("transitions")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::provider(ProviderKind::SceneDetector, "missing transitions"))?;
            let mut out = Vec::new();
            for t in arr {
                match t.as_u64() {
                    Some(i) if (i as usize) < n => out.push(i as usize),
                    _ => return Err(Error::provider(ProviderKind::SceneDetector, format!("bad transition {t}"))),
                }
            }
            Ok(out)
        })
    }

    /// Flow over `a`'s grid into `b`.
    pub fn flow(&self, a: &GrayFrame, b: &GrayFrame) -> Result<FlowField> {
        let req = Request::new(ProviderKind::FlowEstimator, json!({})).frames(vec![a.clone(), b.clone()], None);
        self.invoke(req, |v| {
            let f: FlowField = serde_json::from_value(v.clone())
                .map_err(|e| Error::provider(ProviderKind::FlowEstimator, e.to_string()))?;
            if !f.is_valid() || f.width != a.width || f.height != a.height {
                return Err(Error::provider(ProviderKind::FlowEstimator, "flow shape mismatch"));
            }
            Ok(f)
        })
    }

    pub fn interpolate(&self, a: &GrayFrame, b: &GrayFrame) -> Result<GrayFrame> {
        let req =
            Request::new(ProviderKind::FrameInterpolator, json!({})).frames(vec![a.clone(), b.clone()], None);
        self.invoke(req, |v| {
            let f = decode_frame(v.get("frame").unwrap_or(&Value::Null))?;
            if !f.same_shape(a) {
                return Err(Error::provider(ProviderKind::FrameInterpolator, "frame shape mismatch"));
            }
            Ok(f)
        })
    }

    pub fn segment(&self, frame: &GrayFrame, label: &str) -> Result<Mask> {
        let req = Request::new(ProviderKind::Segmenter, json!({ "label": label })).frames(vec![frame.clone()], None);
        self.invoke(req, |v| {
            let m = decode_frame(&json!({
                "width": v.get("width"),
                "height": v.get("height"),
                "data": v.get("mask"),
            }))
            .map_err(|_| Error::provider(ProviderKind::Segmenter, "invalid mask"))?;
            if !m.same_shape(frame) {
                return Err(Error::provider(ProviderKind::Segmenter, "mask shape mismatch"));
            }
            Ok(Mask {
                width: m.width,
                height: m.height,
                bits: m.data.iter().map(|&b| b != 0).collect(),
            })
        })
    }

    pub fn ground(&self, frames: Vec<GrayFrame>, fps: f64, event: &str) -> Result<(f64, f64)> {
        let req = Request::new(ProviderKind::TemporalGrounder, json!({ "event": event })).frames(frames, Some(fps));
        self.invoke(req, |v| {
            let s = v.get("start_s").and_then(Value::as_f64);
            let e = v.get("end_s").and_then(Value::as_f64);
            match (s, e) {
                (Some(s), Some(e)) if s.is_finite() && e.is_finite() => Ok((s, e)),
                _ => Err(Error::provider(ProviderKind::TemporalGrounder, "missing span")),
            }
        })
    }

    pub fn aesthetic(&self, frame: &GrayFrame) -> Result<f64> {
        let req = Request::new(ProviderKind::AestheticScorer, json!({})).frames(vec![frame.clone()], None);
        self.invoke(req, |v| score_field(ProviderKind::AestheticScorer, v))
    }

    pub fn technical(&self, frames: Vec<GrayFrame>, fps: f64) -> Result<f64> {
        let req = Request::new(ProviderKind::TechnicalScorer, json!({})).frames(frames, Some(fps));
        self.invoke(req, |v| score_field(ProviderKind::TechnicalScorer, v))
    }
}

fn templated_body(template: TemplateId, vars: &[(&str, &str)]) -> Value {
    let mut body = Map::new();
    body.insert("task".into(), json!(template.name()));
    body.insert("prompt".into(), json!(template.render(vars)));
    for (k, v) in vars {
        body.insert((*k).into(), json!(v));
    }
    Value::Object(body)
}

fn text_field(kind: ProviderKind, v: &Value) -> Result<String> {
    v.get("text")
        .and_then(Value::as_str)
        .map(str::to_string)
        .ok_or_else(|| Error::provider(kind, "response has no text"))
}

fn score_field(kind: ProviderKind, v: &Value) -> Result<f64> {
    v.get("score")
        .and_then(Value::as_f64)
        .filter(|s| s.is_finite())
        .ok_or_else(|| Error::provider(kind, "response has no finite score"))
}

fn unit_embedding(kind: ProviderKind, v: &Value) -> Result<Vec<f64>> {
    let arr = v
        .get("embedding")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::provider(kind, "response has no embedding"))?;
    let vec: Vec<f64> = arr.iter().filter_map(Value::as_f64).collect();
    if vec.len() != arr.len() || vec.is_empty() || vec.iter().any(|x| !x.is_finite()) {
        return Err(Error::provider(kind, "embedding is not a finite number array"));
    }
    let n = locot2v_core::math::norm(&vec);
    if n == 0.0 {
        return Err(Error::provider(kind, "zero embedding"));
    }
    Ok(vec.iter().map(|x| x / n).collect())
}

/// Rejects empty output, list formatting and multiple paragraphs.
pub fn check_paragraph(text: &str) -> Result<()> {
    let t = text.trim();
    if t.is_empty() {
        return Err(Error::provider(ProviderKind::VideoDescriber, "empty description"));
    }
    if t.contains("\n\n") {
        return Err(Error::provider(ProviderKind::VideoDescriber, "more than one paragraph"));
    }
    for line in t.lines() {
        let l = line.trim_start();
        let numbered = l
            .split_once(['.', ')'])
            .is_some_and(|(n, _)| !n.is_empty() && n.len() <= 2 && n.chars().all(|c| c.is_ascii_digit()));
        if l.starts_with("- ") || l.starts_with("* ") || l.starts_with('#') || l.starts_with('•') || numbered {
            return Err(Error::provider(ProviderKind::VideoDescriber, "description contains list formatting"));
        }
    }
    Ok(())
}

/// In-process defaults for every role.
pub fn default_specs() -> BTreeMap<ProviderKind, ProviderSpec> {
    ProviderKind::ALL
        .into_iter()
        .map(|k| {
            let spec = match k {
                ProviderKind::SceneDetector => ProviderSpec::builtin("content"),
                ProviderKind::FlowEstimator => ProviderSpec::builtin("block"),
                ProviderKind::FrameInterpolator => ProviderSpec::builtin("linear"),
                _ => ProviderSpec::mock("default"),
            };
            (k, spec)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_ignores_paths_and_tracks_params() {
        let spec = ProviderSpec::mock("x");
        let a = Request::new(ProviderKind::TextEmbedder, json!({"text": "abc", "path": "/a"}));
        let b = Request::new(ProviderKind::TextEmbedder, json!({"text": "abc", "path": "/b"}));
        assert_eq!(request_digest(&spec, &a), request_digest(&spec, &b));
        let c = a.clone().param("trial", json!(1));
        assert_ne!(request_digest(&spec, &a), request_digest(&spec, &c));
        let other = ProviderSpec::mock("y");
        assert_ne!(request_digest(&spec, &a), request_digest(&other, &a));
    }

    #[test]
    fn embeddings_are_unit_normalized() {
        let v = unit_embedding(ProviderKind::TextEmbedder, &json!({"embedding": [3.0, 4.0]})).unwrap();
        assert_eq!(v, vec![0.6, 0.8]);
        assert!(unit_embedding(ProviderKind::TextEmbedder, &json!({"embedding": [0.0]})).is_err());
        assert!(unit_embedding(ProviderKind::TextEmbedder, &json!({"embedding": ["a"]})).is_err());
    }

    #[test]
    fn paragraph_format_check() {
        assert!(check_paragraph("A cat walks. Then it sleeps.").is_ok());
        assert!(check_paragraph("- a cat\n- a dog").is_err());
        assert!(check_paragraph("1. a cat walks").is_err());
        assert!(check_paragraph("one\n\ntwo").is_err());
        assert!(check_paragraph("  ").is_err());
    }

    #[test]
    fn cached_text_embedding_is_reused() {
        let dir = tempfile::tempdir().unwrap();
        let mut specs = default_specs();
        specs.get_mut(&ProviderKind::TextEmbedder).unwrap().cache = Some(true);
        let hub = Hub::new(specs, Some(ResponseCache::new(dir.path())), 2);
        let a = hub.embed_text("abc").unwrap();
        let b = hub.embed_text("abc").unwrap();
        assert_eq!(a, b);
        assert_eq!(hub.stats(), HubStats { backend_calls: 1, cache_hits: 1 });
    }

    #[test]
    fn frame_wire_round_trip() {
        let f = GrayFrame::from_fn(3, 2, |x, y| (x * 10 + y) as u8);
        assert_eq!(decode_frame(&encode_frame(&f)).unwrap(), f);
    }

    #[test]
    fn kind_names() {
        for k in ProviderKind::ALL {
            assert_eq!(ProviderKind::parse(k.as_str()), Some(k));
        }
        assert_eq!(ProviderKind::parse("text-embedder"), Some(ProviderKind::TextEmbedder));
    }
}
