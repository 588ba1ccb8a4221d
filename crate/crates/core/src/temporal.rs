//! Temporal quality sub-metrics.
//!
//! Each function here takes already-extracted measurements (frame pairs,
//! flow statistics, embeddings, feature tracks, yes/no answers) and produces
//! a [`MetricScore`]. Model calls happen in the companion crate.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::{mean_abs_diff, top_fraction_mean, FlowField, GrayFrame};
use crate::math;
use crate::model::{MetricId, MetricScore};

// ---------------------------------------------------------------------------
// Flickering, dynamics, smoothness, warping, semantics

/// Consecutive-pair MAD at or above which a pair is not considered static.
pub const DEFAULT_STATIC_MAD: f64 = 2.0;

/// `1 - MAD/255` over consecutive pairs inside static segments. Falls back
/// to every pair (flagged `no-static-fallback`) when nothing is static.
pub fn temporal_flickering(frames: &[GrayFrame], static_threshold: f64) -> Result<MetricScore> {
    if frames.len() < 2 {
        return Err(Error::Input("temporal flickering needs at least 2 frames".into()));
    }
    let diffs = frames
        .windows(2)
        .map(|w| mean_abs_diff(&w[0], &w[1]))
        .collect::<Result<Vec<f64>>>()?;
    let statics: Vec<f64> = diffs.iter().copied().filter(|&d| d < static_threshold).collect();
    let (used, fallback) = if statics.is_empty() {
        (diffs.clone(), true)
    } else {
        (statics, false)
    };
    let mad = math::mean(&used).unwrap_or(0.0);
    let mut score = MetricScore::ok(MetricId::TemporalFlickering, mad, 1.0 - mad / 255.0)
        .with_note("pairs_used", used.len());
    if fallback {
        score = score.with_note("fallback", "no-static-fallback");
    }
    Ok(score)
}

/// Motion statistic of one flow field: mean of its top 5% magnitudes.
pub fn flow_motion_statistic(flow: &FlowField) -> f64 {
    top_fraction_mean(&flow.magnitudes(), 0.05)
}

/// Binary dynamic-degree decision: 1 when the mean per-pair motion
/// statistic exceeds `threshold` (pixels).
pub fn dynamic_degree(pair_statistics: &[f64], threshold: f64) -> Result<MetricScore> {
    let stat = math::mean(pair_statistics)
        .ok_or_else(|| Error::Input("dynamic degree needs at least one frame pair".into()))?;
    let dynamic = if stat > threshold { 1.0 } else { 0.0 };
    Ok(MetricScore::ok(MetricId::DynamicDegree, stat, dynamic).with_note("threshold", threshold))
}

/// `1 - mean(reconstruction MAE)/255` over interpolated frames.
pub fn motion_smoothness(reconstruction_errors: &[f64]) -> Result<MetricScore> {
    let e = math::mean(reconstruction_errors)
        .ok_or_else(|| Error::Input("motion smoothness needs at least 3 frames".into()))?;
    Ok(MetricScore::ok(MetricId::MotionSmoothness, e, 1.0 - e / 255.0)
        .with_note("reconstructed_frames", reconstruction_errors.len()))
}

/// Mean absolute error between `target` and `source` warped onto it,
/// restricted to valid pixels. `flow` lives on the target grid and points
/// into the source. `None` when no pixel is valid.
pub fn warp_pair_error(
    source: &GrayFrame,
    target: &GrayFrame,
    flow: &FlowField,
    occluded: Option<&[bool]>,
) -> Result<Option<f64>> {
    if !source.same_shape(target) {
        return Err(Error::Input("frame shapes differ".into()));
    }
    let (warped, valid) = crate::frame::warp_backward(source, flow, occluded)?;
    let mut sum = 0.0;
    let mut n = 0usize;
    for ((w, &ok), &t) in warped.iter().zip(&valid).zip(&target.data) {
        if ok {
            sum += libm::fabs(w - t as f64);
            n += 1;
        }
    }
    Ok((n > 0).then(|| sum / n as f64))
}

/// `1 - mean(pair warp error)/255`.
pub fn warping_error(pair_errors: &[f64]) -> Result<MetricScore> {
    let e = math::mean(pair_errors)
        .ok_or_else(|| Error::Input("warping error needs at least one valid pair".into()))?;
    Ok(MetricScore::ok(MetricId::WarpingError, e, 1.0 - e / 255.0)
        .with_note("pairs", pair_errors.len()))
}

/// Mean consecutive cosine of frame embeddings mapped by `(cos + 1)/2`.
pub fn semantic_consistency(embeddings: &[Vec<f64>]) -> Result<MetricScore> {
    if embeddings.len() < 2 {
        return Err(Error::Input("semantic consistency needs at least 2 frames".into()));
    }
    let cosines: Vec<f64> = embeddings
        .windows(2)
        .map(|w| math::cosine(&w[0], &w[1]))
        .collect();
    let c = math::mean(&cosines).unwrap_or(0.0);
    Ok(MetricScore::ok(MetricId::SemanticConsistency, c, (c + 1.0) / 2.0))
}

// ---------------------------------------------------------------------------
// Transition smoothness

/// Drops transition points within `k` frames of the previously kept one.
pub fn dedup_transitions(points: &[usize], k: usize) -> Vec<usize> {
    let mut sorted = points.to_vec();
    sorted.sort_unstable();
    let mut out: Vec<usize> = Vec::new();
    for p in sorted {
        match out.last() {
            Some(&last) if p - last <= k => {}
            _ => out.push(p),
        }
    }
    out
}

/// Frame range `[start, end)` analysed around a transition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowBounds {
    pub start: usize,
    pub end: usize,
    pub half_width: usize,
    pub truncated: bool,
}

/// Window `[t-k, t+k)`, shrunk symmetrically so that every frame in it has
/// two predecessors (motion consistency compares consecutive flows).
pub fn transition_window(t: usize, k: usize, frame_count: usize) -> Option<WindowBounds> {
    let half = k.min(t.saturating_sub(2)).min(frame_count.saturating_sub(t));
    if half == 0 {
        return None;
    }
    Some(WindowBounds {
        start: t - half,
        end: t + half,
        half_width: half,
        truncated: half < k,
    })
}

/// Raw per-frame similarity cues against the previous frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameCues {
    /// `1 - MAE/255`.
    pub mae: f64,
    pub ssim: f64,
    /// Cosine of frame embeddings.
    pub feature: f64,
    /// Cosine of mean flow vectors of the two preceding frame pairs.
    pub motion: f64,
}

/// Cosine of two mean flow vectors. Two (near) still pairs agree fully; a
/// still pair next to a moving one does not agree at all.
pub fn motion_consistency(a: (f64, f64), b: (f64, f64)) -> f64 {
    const STILL: f64 = 1e-3;
    let na = libm::sqrt(a.0 * a.0 + a.1 * a.1);
    let nb = libm::sqrt(b.0 * b.0 + b.1 * b.1);
    match (na < STILL, nb < STILL) {
        (true, true) => 1.0,
        (true, false) | (false, true) => 0.0,
        _ => ((a.0 * b.0 + a.1 * b.1) / (na * nb)).clamp(-1.0, 1.0),
    }
}

/// Transition smoothness constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionParams {
    pub k: usize,
    pub weights: [f64; 4],
    pub b: f64,
    pub c: f64,
    /// Ranges narrower than this are treated as degenerate by the in-window
    /// min-max normalization.
    pub degenerate_eps: f64,
}

impl Default for TransitionParams {
    fn default() -> Self {
        TransitionParams {
            k: 8,
            weights: [0.25; 4],
            b: 1e4,
            c: 1.0,
            degenerate_eps: 1e-9,
        }
    }
}

impl TransitionParams {
    pub fn validate(&self) -> Result<()> {
        let sum: f64 = self.weights.iter().sum();
        if libm::fabs(sum - 1.0) > 1e-9 {
            return Err(Error::Range {
                what: "transition weight sum",
                value: sum,
            });
        }
        if self.weights.iter().any(|w| *w < 0.0) {
            return Err(Error::Input("transition weights must be nonnegative".into()));
        }
        if !(self.b > 0.0) {
            return Err(Error::Range {
                what: "transition b",
                value: self.b,
            });
        }
        if !(self.c > 0.0) {
            return Err(Error::Range {
                what: "transition c",
                value: self.c,
            });
        }
        if self.k == 0 {
            return Err(Error::Input("transition k must be positive".into()));
        }
        Ok(())
    }
}

fn min_max(values: &[f64], eps: f64) -> Vec<f64> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(hi - lo > eps) {
        return alloc::vec![1.0; values.len()];
    }
    values.iter().map(|v| (v - lo) / (hi - lo)).collect()
}

/// Weighted sum of the window-normalized cues, one value per frame.
pub fn similarity_sequence(cues: &[FrameCues], params: &TransitionParams) -> Result<Vec<f64>> {
    params.validate()?;
    let cols: [Vec<f64>; 4] = [
        cues.iter().map(|c| c.mae).collect(),
        cues.iter().map(|c| c.ssim).collect(),
        cues.iter().map(|c| c.feature).collect(),
        cues.iter().map(|c| c.motion).collect(),
    ];
    let normalized: Vec<Vec<f64>> = cols
        .iter()
        .map(|c| min_max(c, params.degenerate_eps))
        .collect();
    Ok((0..cues.len())
        .map(|j| {
            (0..4)
                .map(|f| params.weights[f] * normalized[f][j])
                .sum::<f64>()
        })
        .collect())
}

/// Scored transition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionWindow {
    pub transition_frame: usize,
    pub half_width: usize,
    pub similarity_sequence: Vec<f64>,
    pub variance: f64,
    pub abruptness: f64,
    pub smoothness: f64,
}

/// Abruptness `A = Var·b / (Var·b + c)` of the sum-normalized sequence, and
/// smoothness `1 - A`.
pub fn abruptness(sequence: &[f64], b: f64, c: f64) -> Result<(f64, f64, f64)> {
    if sequence.is_empty() {
        return Err(Error::Input("empty similarity sequence".into()));
    }
    let total: f64 = sequence.iter().sum();
    let variance = if total == 0.0 {
        0.0
    } else {
        let shares: Vec<f64> = sequence.iter().map(|s| s / total).collect();
        math::variance(&shares).unwrap_or(0.0)
    };
    let a = variance * b / (variance * b + c);
    Ok((variance, a, 1.0 - a))
}

pub fn score_transition(
    transition_frame: usize,
    half_width: usize,
    sequence: Vec<f64>,
    params: &TransitionParams,
) -> Result<TransitionWindow> {
    let (variance, a, s) = abruptness(&sequence, params.b, params.c)?;
    Ok(TransitionWindow {
        transition_frame,
        half_width,
        similarity_sequence: sequence,
        variance,
        abruptness: a,
        smoothness: s,
    })
}

/// Mean smoothness over transitions; 1 with `no-transitions` when empty.
pub fn transition_smoothness(windows: &[TransitionWindow]) -> MetricScore {
    if windows.is_empty() {
        return MetricScore::ok(MetricId::TransitionSmoothness, 1.0, 1.0)
            .with_note("reason", "no-transitions");
    }
    let s: Vec<f64> = windows.iter().map(|w| w.smoothness).collect();
    let mean = math::mean(&s).unwrap_or(1.0);
    MetricScore::ok(MetricId::TransitionSmoothness, mean, mean).with_note("transitions", s.len())
}

// ---------------------------------------------------------------------------
// Human action

/// Yes/no outcomes for one action: occurrence plus the three smoothness checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionAnswers {
    pub occurred: bool,
    pub smooth: [bool; 3],
}

impl ActionAnswers {
    pub fn score(&self) -> f64 {
        (self.occurred as u8 + self.smooth.iter().filter(|&&b| b).count() as u8) as f64 / 4.0
    }
}

pub fn human_action_score(answers: &[ActionAnswers]) -> MetricScore {
    if answers.is_empty() {
        return MetricScore::not_applicable(MetricId::HumanAction, "prompt has no human actions");
    }
    let scores: Vec<f64> = answers.iter().map(ActionAnswers::score).collect();
    let m = math::mean(&scores).unwrap_or(0.0);
    MetricScore::ok(MetricId::HumanAction, m, m).with_note("actions", answers.len())
}

// ---------------------------------------------------------------------------
// Event clips and event-level consistency

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClipSource {
    Grounded,
    FallbackUniform,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventClip {
    pub event_index: usize,
    pub start_frame: usize,
    pub end_frame: usize,
    pub source: ClipSource,
    #[serde(default, skip_serializing_if = "core::ops::Not::not")]
    pub clamped: bool,
}

impl EventClip {
    pub fn len(&self) -> usize {
        self.end_frame - self.start_frame
    }

    pub fn is_empty(&self) -> bool {
        self.end_frame <= self.start_frame
    }
}

/// Partition of `frame_count` frames into `parts` contiguous spans.
pub fn uniform_partition(frame_count: usize, parts: usize) -> Vec<Range<usize>> {
    (0..parts)
        .map(|i| (i * frame_count / parts)..((i + 1) * frame_count / parts))
        .collect()
}

/// Converts a grounded `[start_s, end_s]` span into frame bounds clamped to
/// the video. Returns `None` for empty or inverted spans, else the bounds and
/// whether clamping changed them.
pub fn span_to_frames(
    start_s: f64,
    end_s: f64,
    fps: f64,
    frame_count: usize,
) -> Option<(usize, usize, bool)> {
    if !(start_s.is_finite() && end_s.is_finite()) || end_s <= start_s {
        return None;
    }
    let raw_start = libm::floor(start_s * fps);
    let raw_end = libm::ceil(end_s * fps);
    let start = raw_start.clamp(0.0, frame_count as f64) as usize;
    let end = raw_end.clamp(0.0, frame_count as f64) as usize;
    let clamped = raw_start < 0.0 || raw_end > frame_count as f64;
    (start < end).then_some((start, end, clamped))
}

/// `n` frame indices spread uniformly over `range` (all of them if shorter).
pub fn sample_uniform(range: Range<usize>, n: usize) -> Vec<usize> {
    let len = range.len();
    if len <= n {
        return range.collect();
    }
    (0..n)
        .map(|i| range.start + (i * len + len / 2) / n)
        .collect()
}

/// One appearance of a tracked element.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackEntry {
    pub event_index: usize,
    pub frame_index: usize,
    pub feature: Vec<f64>,
    pub coverage: f64,
}

/// All appearances of a subject (or of the background) across events.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureTrack {
    pub label: String,
    pub entries: Vec<TrackEntry>,
}

impl FeatureTrack {
    pub fn new(label: &str) -> Self {
        FeatureTrack {
            label: label.into(),
            entries: Vec::new(),
        }
    }

    /// Features grouped by event, each ordered by frame index.
    pub fn by_event(&self) -> BTreeMap<usize, Vec<&TrackEntry>> {
        let mut map: BTreeMap<usize, Vec<&TrackEntry>> = BTreeMap::new();
        for e in &self.entries {
            map.entry(e.event_index).or_default().push(e);
        }
        for v in map.values_mut() {
            v.sort_by_key(|e| e.frame_index);
        }
        map
    }

    pub fn max_norm_error(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| libm::fabs(math::norm(&e.feature) - 1.0))
            .fold(0.0, f64::max)
    }
}

/// Consecutive-appearance consistency within events, averaged over tracks
/// per event and then over events weighted by clip length.
pub fn intra_event_consistency(
    metric_id: MetricId,
    tracks: &[FeatureTrack],
    clips: &[EventClip],
) -> MetricScore {
    let mut per_event: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for track in tracks {
        for (event, entries) in track.by_event() {
            if entries.len() < 2 {
                continue;
            }
            let sims: Vec<f64> = entries
                .windows(2)
                .map(|w| math::cosine(&w[0].feature, &w[1].feature))
                .collect();
            per_event
                .entry(event)
                .or_default()
                .push(math::mean(&sims).unwrap_or(0.0));
        }
    }
    let mut weighted = 0.0;
    let mut weight_total = 0.0;
    let mut events = 0usize;
    for (event, scores) in &per_event {
        let Some(clip) = clips.iter().find(|c| c.event_index == *event) else {
            continue;
        };
        let w = clip.len() as f64;
        if w == 0.0 {
            continue;
        }
        weighted += w * math::mean(scores).unwrap_or(0.0);
        weight_total += w;
        events += 1;
    }
    if weight_total == 0.0 {
        return MetricScore::not_applicable(metric_id, "no element appears twice within an event");
    }
    let v = weighted / weight_total;
    MetricScore::ok(metric_id, v, v).with_note("events", events)
}

/// All-pairs cross-event similarity per track, averaged over event pairs and
/// then over tracks appearing in at least two events.
pub fn inter_event_consistency(metric_id: MetricId, tracks: &[FeatureTrack]) -> MetricScore {
    let mut per_track = Vec::new();
    for track in tracks {
        let groups: Vec<Vec<&TrackEntry>> = track.by_event().into_values().collect();
        let m = groups.len();
        if m < 2 {
            continue;
        }
        let mut pair_sum = 0.0;
        for i in 0..m {
            for j in i + 1..m {
                let mut s = 0.0;
                for a in &groups[i] {
                    for b in &groups[j] {
                        s += math::cosine(&a.feature, &b.feature);
                    }
                }
                pair_sum += s / (groups[i].len() * groups[j].len()) as f64;
            }
        }
        per_track.push(2.0 * pair_sum / (m * (m - 1)) as f64);
    }
    match math::mean(&per_track) {
        None => MetricScore::not_applicable(metric_id, "no element spans two events"),
        Some(v) => MetricScore::ok(metric_id, v, v).with_note("elements", per_track.len()),
    }
}
