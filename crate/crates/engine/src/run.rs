//! Suite-level evaluation run with per-sample checkpoints.
//!
//! Finished samples are written to `<out>.checkpoint/` as they complete. A
//! rerun with the same suite and configuration picks them up and only
//! evaluates the rest; a changed fingerprint discards them.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use locot2v_core::aggregate::{group_by_category, summarize};
use locot2v_core::{MetricId, MetricScore, MetricStatus, PromptRecord, ScoreReport};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::Config;
use crate::error::{Error, Result};
use crate::evaluate::Evaluator;
use crate::pool::par_map;
use crate::provider::cache::{write_atomic, ResponseCache};
use crate::provider::Hub;
use crate::report::{correlate_pairs, default_pairs, Report};
use crate::suite::{load_suite, Suite};
use crate::templates::TemplateId;
use crate::video::{find_video, load_video};

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub suite: PathBuf,
    pub videos: PathBuf,
    pub out: PathBuf,
    /// Overrides `run.method`.
    pub method: Option<String>,
    /// Reuse checkpoints from an interrupted run.
    pub resume: bool,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub report: Report,
    /// Samples with at least one metric in error.
    pub failed_samples: Vec<String>,
    /// Samples taken from checkpoints instead of being evaluated.
    pub resumed: usize,
}

/// `<out>.<suffix>` next to the report file.
pub fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(format!(".{suffix}"));
    out.with_file_name(name)
}

/// File-system-safe form of a sample id.
pub fn safe_id(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.') { c } else { '_' })
        .collect()
}

/// Settings and versions that determine the scores, echoed into the report.
pub fn run_metadata(cfg: &Config, suite: &Suite) -> Value {
    let templates: BTreeMap<&str, String> = TemplateId::ALL.iter().map(|t| (t.name(), t.version())).collect();
    let providers: BTreeMap<String, Value> = cfg
        .provider_specs()
        .into_iter()
        .map(|(k, s)| {
            (
                k.as_str().to_string(),
                json!({ "version": s.provider_version(), "params": s.params }),
            )
        })
        .collect();
    json!({
        "engine": { "name": env!("CARGO_PKG_NAME"), "version": env!("CARGO_PKG_VERSION") },
        "suite_version": suite.version,
        "metrics": cfg.metrics,
        "providers": providers,
        "templates": templates,
        "conventions": {
            "percent_display": "tables show normalized scores times 100 with two decimals",
            "dimension_average": "unweighted mean of ok sub-metrics",
            "overall_average": "unweighted mean of the five dimension averages",
            "method_level": "each metric averaged over samples where it is ok, dimensions over those means",
            "spearman": "average ranks for ties",
            "kendall": "tau-b",
            "regression": "ordinary least squares",
        },
    })
}

fn fingerprint(metadata: &Value, suite: &Suite, method: &str) -> Result<String> {
    let body = serde_json::to_vec(&json!({ "metadata": metadata, "suite": suite, "method": method }))
        .map_err(|e| Error::json("fingerprint", e))?;
    Ok(hex::encode(Sha256::digest(&body)))
}

/// Every metric in error with the same message.
pub fn failed_report(sample_id: &str, message: &str) -> ScoreReport {
    ScoreReport::from_metrics(sample_id, MetricId::all().map(|id| MetricScore::error(id, message)))
}

pub fn has_errors(r: &ScoreReport) -> bool {
    r.metrics.values().any(|m| m.status == MetricStatus::Error)
}

struct Checkpoints {
    dir: PathBuf,
    lock: Mutex<()>,
}

impl Checkpoints {
    fn open(dir: PathBuf, fingerprint: &str, resume: bool) -> Result<Checkpoints> {
        let stamp = dir.join("fingerprint");
        let current = std::fs::read_to_string(&stamp).ok();
        if dir.exists() && (!resume || current.as_deref() != Some(fingerprint)) {
            if resume {
                log::warn!("discarding checkpoints in {}: suite or configuration changed", dir.display());
            }
            std::fs::remove_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        }
        std::fs::create_dir_all(dir.join("samples")).map_err(|e| Error::io(&dir, e))?;
        write_atomic(&stamp, fingerprint.as_bytes())?;
        Ok(Checkpoints { dir, lock: Mutex::new(()) })
    }

    fn path(&self, id: &str) -> PathBuf {
        self.dir.join("samples").join(format!("{}.json", safe_id(id)))
    }

    fn load(&self, id: &str) -> Option<ScoreReport> {
        let text = std::fs::read_to_string(self.path(id)).ok()?;
        serde_json::from_str::<ScoreReport>(&text).ok().filter(|r| r.sample_id == id)
    }

    fn store(&self, r: &ScoreReport) -> Result<()> {
        let body = serde_json::to_vec(r).map_err(|e| Error::json("checkpoint", e))?;
        let _guard = self.lock.lock().expect("checkpoint lock poisoned");
        write_atomic(&self.path(&r.sample_id), &body)
    }
}

fn evaluate_sample(cfg: &Config, hub: &Hub, record: &PromptRecord, videos: &Path, artifacts: Option<PathBuf>) -> ScoreReport {
    let Some(path) = find_video(videos, &record.id, &cfg.run.video_extensions) else {
        log::warn!("{}: video not found in {}", record.id, videos.display());
        return failed_report(&record.id, "video not found");
    };
    let video = match load_video(&path) {
        Ok(v) => v,
        Err(e) => {
            log::warn!("{}: {e}", record.id);
            return failed_report(&record.id, &format!("cannot load video: {e}"));
        }
    };
    if let Some(dir) = &artifacts {
        if let Err(e) = std::fs::create_dir_all(dir) {
            log::warn!("{}: cannot create artifact directory: {e}", record.id);
        }
    }
    let evaluator = Evaluator {
        hub,
        metrics: &cfg.metrics,
        artifacts,
    };
    evaluator.evaluate(record, &video)
}

/// Evaluates every sample of the suite and writes the report to `opts.out`.
pub fn run_evaluation(cfg: &Config, opts: &RunOptions) -> Result<RunOutcome> {
    let suite = load_suite(&opts.suite)?;
    let problems = locot2v_core::model::validate_suite(&suite.samples, &cfg.suite.rules());
    if !problems.is_empty() {
        return Err(Error::Suite(format!("{}:\n{}", opts.suite.display(), problems.join("\n"))));
    }
    let theme_map = (!cfg.suite.theme_categories.is_empty()).then_some(&cfg.suite.theme_categories);
    if let Some(map) = theme_map {
        if let Some(r) = suite.samples.iter().find(|r| !map.contains_key(&r.theme)) {
            return Err(Error::Config(format!(
                "suite.theme_categories has no category for theme {:?} (sample {})",
                r.theme, r.id
            )));
        }
    }
    let method = opts.method.clone().unwrap_or_else(|| cfg.run.method.clone());
    let metadata = run_metadata(cfg, &suite);
    let checkpoints = Checkpoints::open(
        sibling(&opts.out, "checkpoint"),
        &fingerprint(&metadata, &suite, &method)?,
        opts.resume,
    )?;
    let cache = cfg.run.cache_dir.as_ref().map(|d| ResponseCache::new(d.clone()));
    let hub = Hub::new(cfg.provider_specs(), cache, cfg.run.max_parallel_calls);
    let artifact_root = cfg.run.artifacts.then(|| sibling(&opts.out, "artifacts"));

    let done: Vec<Option<ScoreReport>> = suite.samples.iter().map(|r| checkpoints.load(&r.id)).collect();
    let resumed = done.iter().filter(|d| d.is_some()).count();
    if resumed > 0 {
        log::info!("resuming: {resumed} of {} samples already evaluated", suite.samples.len());
    }
    let jobs: Vec<(&PromptRecord, Option<ScoreReport>)> = suite.samples.iter().zip(done).collect();
    let results = par_map(&jobs, cfg.run.workers, |_, (record, done)| -> Result<ScoreReport> {
        if let Some(r) = done {
            return Ok(r.clone());
        }
        log::info!("evaluating {}", record.id);
        let artifacts = artifact_root.as_ref().map(|d| d.join(safe_id(&record.id)));
        let report = evaluate_sample(cfg, &hub, record, &opts.videos, artifacts);
        checkpoints.store(&report)?;
        Ok(report)
    });
    let samples = results.into_iter().collect::<Result<Vec<_>>>()?;

    let summary = summarize(&samples);
    let by_category = group_by_category(&samples, &suite.samples, theme_map)?;
    let correlations = correlate_pairs(&samples, &default_pairs())
        .into_iter()
        .map(|(row, _)| row)
        .collect();
    let failed_samples = samples.iter().filter(|r| has_errors(r)).map(|r| r.sample_id.clone()).collect();
    let report = Report {
        method,
        samples,
        metric_means: summary.metric_means,
        dimension_means: summary.dimension_means,
        overall_mean: summary.overall_mean,
        by_category,
        correlations,
        metadata,
    };
    report.save(&opts.out)?;
    std::fs::remove_dir_all(&checkpoints.dir).map_err(|e| Error::io(&checkpoints.dir, e))?;
    let stats = hub.stats();
    log::info!("provider calls: {}, cache hits: {}", stats.backend_calls, stats.cache_hits);
    Ok(RunOutcome {
        report,
        failed_samples,
        resumed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sibling_paths() {
        assert_eq!(sibling(Path::new("out/report.json"), "checkpoint"), PathBuf::from("out/report.json.checkpoint"));
    }

    #[test]
    fn ids_are_made_path_safe() {
        assert_eq!(safe_id("a/b c"), "a_b_c");
        assert_eq!(safe_id("ok-1.2_x"), "ok-1.2_x");
    }

    #[test]
    fn failed_report_has_every_metric_in_error() {
        let r = failed_report("x", "video not found");
        assert_eq!(r.metrics.len(), 26);
        assert!(has_errors(&r));
        assert!(r.dimension_averages.is_empty());
        assert!(r.check_invariants(0.0).is_empty());
    }
}
