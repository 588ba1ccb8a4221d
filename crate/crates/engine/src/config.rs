//! Layered configuration: built-in defaults, then a TOML file, then
//! `LOCOT2V_<SECTION>__<KEY>` environment variables, then `--set key=value`
//! overrides. Unknown keys are rejected so typos do not pass silently.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use locot2v_core::static_quality::{Rrub, DEFAULT_TOP_FRACTION};
use locot2v_core::temporal::{TransitionParams, DEFAULT_STATIC_MAD};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::provider::{default_specs, ProviderKind, ProviderSpec};

pub const ENV_PREFIX: &str = "LOCOT2V_";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub run: RunConfig,
    pub suite: SuiteConfig,
    pub metrics: MetricsConfig,
    pub providers: BTreeMap<ProviderKind, ProviderSpec>,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            run: RunConfig::default(),
            suite: SuiteConfig::default(),
            metrics: MetricsConfig::default(),
            providers: default_specs(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Method name recorded in the report.
    pub method: String,
    /// Samples evaluated concurrently.
    pub workers: usize,
    /// Provider calls in flight across all workers.
    pub max_parallel_calls: usize,
    /// Response cache root; relative paths resolve against the config file.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cache_dir: Option<PathBuf>,
    /// Extensions probed, in order, when locating `<id>.<ext>`.
    pub video_extensions: Vec<String>,
    /// Write per-sample intermediate artifacts next to the report.
    pub artifacts: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            method: "unnamed".into(),
            workers: 2,
            max_parallel_calls: 4,
            cache_dir: None,
            video_extensions: ["mp4", "webm", "mkv", "y4m"].map(String::from).to_vec(),
            artifacts: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteConfig {
    /// Allowed theme labels; empty accepts any nonempty theme.
    pub themes: Vec<String>,
    pub herd_questions_per_dimension: usize,
    /// Optional theme → category override used when grouping results.
    pub theme_categories: BTreeMap<String, locot2v_core::Category>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            themes: Vec::new(),
            herd_questions_per_dimension: 6,
            theme_categories: BTreeMap::new(),
        }
    }
}

impl SuiteConfig {
    pub fn rules(&self) -> locot2v_core::model::ValidationRules {
        locot2v_core::model::ValidationRules {
            herd_questions_per_dimension: self.herd_questions_per_dimension,
            themes: self.themes.clone(),
        }
    }
}

/// Every metric constant. The whole section is echoed into report metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricsConfig {
    pub rr_ub: RrubConfig,
    pub technical: TechnicalConfig,
    pub dynamic_degree: DynamicDegreeConfig,
    pub motion_smoothness: SampledConfig,
    pub warping_error: SampledConfig,
    pub semantic_consistency: SampledConfig,
    pub temporal_flickering: FlickerConfig,
    pub transition: TransitionConfig,
    pub event_clips: ClipConfig,
    pub clarity: ClarityConfig,
    /// Frames sent with describer, question and grounding requests.
    pub video_request_frames: usize,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        MetricsConfig {
            rr_ub: RrubConfig::default(),
            technical: TechnicalConfig::default(),
            dynamic_degree: DynamicDegreeConfig::default(),
            motion_smoothness: SampledConfig { max_samples: 32 },
            warping_error: SampledConfig { max_samples: 32 },
            semantic_consistency: SampledConfig { max_samples: 32 },
            temporal_flickering: FlickerConfig::default(),
            transition: TransitionConfig::default(),
            event_clips: ClipConfig::default(),
            clarity: ClarityConfig::default(),
            video_request_frames: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RrubConfig {
    /// Precomputed upper bound on the aesthetic scorer's 1–10 scale.
    pub value: f64,
    pub top_fraction: f64,
    /// Number of reference scores behind `value`, for provenance only.
    pub source_count: usize,
}

impl Default for RrubConfig {
    fn default() -> Self {
        RrubConfig {
            value: 10.0,
            top_fraction: DEFAULT_TOP_FRACTION,
            source_count: 0,
        }
    }
}

impl RrubConfig {
    pub fn rrub(&self) -> Rrub {
        Rrub {
            value: self.value,
            source_count: self.source_count,
            top_fraction: self.top_fraction,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TechnicalConfig {
    pub clip_max_s: f64,
    /// Output range of the technical scorer, mapped linearly onto [0,1].
    pub provider_range: [f64; 2],
    /// Frames sent per clip.
    pub frames_per_clip: usize,
}

impl Default for TechnicalConfig {
    fn default() -> Self {
        TechnicalConfig {
            clip_max_s: 10.0,
            provider_range: [0.0, 1.0],
            frames_per_clip: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DynamicDegreeConfig {
    /// Motion statistic (pixels) above which a video counts as dynamic.
    pub threshold: f64,
    pub max_samples: usize,
}

impl Default for DynamicDegreeConfig {
    fn default() -> Self {
        DynamicDegreeConfig {
            threshold: 1.0,
            max_samples: 32,
        }
    }
}

/// Upper bound on frames or frame pairs analysed, spread uniformly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SampledConfig {
    pub max_samples: usize,
}

impl Default for SampledConfig {
    fn default() -> Self {
        SampledConfig { max_samples: 32 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlickerConfig {
    pub static_mad: f64,
}

impl Default for FlickerConfig {
    fn default() -> Self {
        FlickerConfig {
            static_mad: DEFAULT_STATIC_MAD,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransitionConfig {
    pub k: usize,
    /// Weights of the MAE, SSIM, feature and motion cues.
    pub weights: [f64; 4],
    pub b: f64,
    pub c: f64,
    pub degenerate_eps: f64,
}

impl Default for TransitionConfig {
    fn default() -> Self {
        let p = TransitionParams::default();
        TransitionConfig {
            k: p.k,
            weights: p.weights,
            b: p.b,
            c: p.c,
            degenerate_eps: p.degenerate_eps,
        }
    }
}

impl TransitionConfig {
    pub fn params(&self) -> TransitionParams {
        TransitionParams {
            k: self.k,
            weights: self.weights,
            b: self.b,
            c: self.c,
            degenerate_eps: self.degenerate_eps,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClipConfig {
    pub frames_per_clip: usize,
    /// Dilation radius (pixels) of the subject union removed from backgrounds.
    pub mask_dilation: usize,
}

impl Default for ClipConfig {
    fn default() -> Self {
        ClipConfig {
            frames_per_clip: 16,
            mask_dilation: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClarityConfig {
    pub trials: usize,
}

impl Default for ClarityConfig {
    fn default() -> Self {
        ClarityConfig {
            trials: locot2v_core::clarity::DEFAULT_TRIALS,
        }
    }
}

impl Config {
    /// Builds the layered configuration. `file` may be absent; `env` is the
    /// environment to read (normally `std::env::vars()`).
    pub fn load(
        file: Option<&Path>,
        env: impl IntoIterator<Item = (String, String)>,
        overrides: &[String],
    ) -> Result<Config> {
        let mut root = toml::Table::try_from(Config::default())
            .map_err(|e| Error::Config(format!("serializing defaults: {e}")))?;
        if let Some(path) = file {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            let table: toml::Table = text
                .parse()
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            merge(&mut root, table);
        }
        let mut env_pairs: Vec<(String, String)> = env
            .into_iter()
            .filter_map(|(k, v)| {
                let rest = k.strip_prefix(ENV_PREFIX)?;
                rest.contains("__")
                    .then(|| (rest.to_lowercase().replace("__", "."), v))
            })
            .collect();
        env_pairs.sort();
        for (key, value) in env_pairs {
            set_path(&mut root, &key, &value)?;
        }
        for o in overrides {
            let (key, value) = o
                .split_once('=')
                .ok_or_else(|| Error::Usage(format!("--set expects key=value, got {o:?}")))?;
            set_path(&mut root, key.trim(), value.trim())?;
        }
        let mut cfg: Config = toml::Value::Table(root)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        if let (Some(dir), Some(cache)) = (file.and_then(Path::parent), cfg.run.cache_dir.as_ref()) {
            if cache.is_relative() {
                cfg.run.cache_dir = Some(dir.join(cache));
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let m = &self.metrics;
        if !(m.rr_ub.value > 0.0) {
            return Err(Error::Config("metrics.rr_ub.value must be positive".into()));
        }
        if !(m.technical.clip_max_s > 0.0) {
            return Err(Error::Config("metrics.technical.clip_max_s must be positive".into()));
        }
        let [lo, hi] = m.technical.provider_range;
        if !(hi > lo) {
            return Err(Error::Config("metrics.technical.provider_range must be increasing".into()));
        }
        m.transition
            .params()
            .validate()
            .map_err(|e| Error::Config(format!("metrics.transition: {e}")))?;
        if m.clarity.trials == 0 {
            return Err(Error::Config("metrics.clarity.trials must be at least 1".into()));
        }
        if self.run.workers == 0 || self.run.max_parallel_calls == 0 {
            return Err(Error::Config("run.workers and run.max_parallel_calls must be positive".into()));
        }
        Ok(())
    }

    /// Spec for every role, filling roles absent from the file with defaults.
    pub fn provider_specs(&self) -> BTreeMap<ProviderKind, ProviderSpec> {
        let mut specs = default_specs();
        specs.extend(self.providers.clone());
        specs
    }
}

fn merge(base: &mut toml::Table, over: toml::Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

/// Parses `raw` as a TOML value, falling back to a plain string.
fn parse_scalar(raw: &str) -> toml::Value {
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

fn set_path(root: &mut toml::Table, dotted: &str, raw: &str) -> Result<()> {
    let parts: Vec<&str> = dotted.split('.').filter(|p| !p.is_empty()).collect();
    let Some((last, parents)) = parts.split_last() else {
        return Err(Error::Usage(format!("empty config key in {dotted:?}")));
    };
    let mut table = root;
    for p in parents {
        let entry = table
            .entry((*p).to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("{dotted}: {p} is not a section")))?;
    }
    table.insert((*last).to_string(), parse_scalar(raw));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::provider::Backend;

    #[test]
    fn defaults_round_trip() {
        let cfg = Config::load(None, Vec::new(), &[]).unwrap();
        assert_eq!(cfg, Config::default());
        assert_eq!(cfg.metrics.transition.k, 8);
        assert_eq!(cfg.metrics.clarity.trials, 3);
    }

    #[test]
    fn layers_apply_in_order() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        std::fs::write(
            &path,
            "[run]\nmethod = \"file\"\nworkers = 3\ncache_dir = \"cache\"\n\
             [metrics.transition]\nk = 4\n\
             [providers.text_embedder]\nbackend = \"http\"\nendpoint = \"http://x\"\n",
        )
        .unwrap();
        let env = vec![
            ("LOCOT2V_RUN__WORKERS".to_string(), "5".to_string()),
            ("LOCOT2V_FFMPEG".to_string(), "ignored".to_string()),
        ];
        let cfg = Config::load(Some(&path), env, &["run.method=cli".to_string()]).unwrap();
        assert_eq!(cfg.run.method, "cli");
        assert_eq!(cfg.run.workers, 5);
        assert_eq!(cfg.metrics.transition.k, 4);
        assert_eq!(cfg.run.cache_dir, Some(dir.path().join("cache")));
        let te = &cfg.provider_specs()[&ProviderKind::TextEmbedder];
        assert_eq!(te.backend, Backend::Http);
        assert_eq!(te.retries, 2);
    }

    #[test]
    fn unknown_keys_and_bad_values_fail() {
        let err = Config::load(None, Vec::new(), &["metrics.transition.kk=3".into()]).unwrap_err();
        assert!(err.to_string().contains("kk"), "{err}");
        let err = Config::load(None, Vec::new(), &["metrics.transition.weights=[1,1,0,0]".into()]);
        assert!(err.is_err());
        assert!(Config::load(None, Vec::new(), &["novalue".into()]).is_err());
    }

    #[test]
    fn provider_params_accept_nested_values() {
        let cfg = Config::load(
            None,
            Vec::new(),
            &["providers.question_answerer.params.clarity_scores=[4,4,2,0]".into()],
        )
        .unwrap();
        let p = &cfg.providers[&ProviderKind::QuestionAnswerer].params["clarity_scores"];
        assert_eq!(p, &serde_json::json!([4, 4, 2, 0]));
    }
}
