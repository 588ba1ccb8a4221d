//! Per-sample evaluation: drives the providers for one video and turns the
//! measurements into metric scores through `locot2v-core`.
//!
//! A failing metric group is recorded as `error` scores for its metrics and
//! does not stop the rest of the sample.

use std::collections::hash_map::Entry;
use std::collections::{BTreeMap, HashMap};
use std::path::PathBuf;

use locot2v_core::alignment::{
    clamped_cosine, event_alignment_score, field_similarity_rule, EventMatching, FieldSims, MatchedPair,
};
use locot2v_core::clarity::{clarity_score, ClarityDimension, ClarityEntry, ClarityTrial};
use locot2v_core::frame::{masked_crop, mean_abs_diff, remove_masked, ssim, FlowField, GrayFrame, Mask};
use locot2v_core::herd::{canonicalize_answer, herd_metric_ids, herd_score, HerdAnswer, HerdResponse};
use locot2v_core::matching::match_events;
use locot2v_core::static_quality::{aesthetic_score, clip_partition, per_second_frames, technical_score};
use locot2v_core::temporal::{
    self, dedup_transitions, human_action_score, inter_event_consistency, intra_event_consistency,
    motion_consistency, sample_uniform, score_transition, similarity_sequence, span_to_frames, transition_window,
    uniform_partition, ActionAnswers, ClipSource, EventClip, FeatureTrack, FrameCues, TrackEntry,
    TransitionWindow,
};
use locot2v_core::{math, EventSpec, MetricId, MetricScore, PromptRecord, ScoreReport, SimilarityMatrix};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::MetricsConfig;
use crate::error::{Error, Result};
use crate::jsonblock::parse_json_block;
use crate::provider::cache::write_atomic;
use crate::provider::{Hub, ProviderKind};
use crate::templates::{occurrence_question, TemplateId, SMOOTHNESS_QUESTIONS};
use crate::video::Video;

/// Label of the background track in artifacts.
pub const BACKGROUND_LABEL: &str = "(background)";

pub struct Evaluator<'a> {
    pub hub: &'a Hub,
    pub metrics: &'a MetricsConfig,
    /// Directory for this sample's intermediate artifacts.
    pub artifacts: Option<PathBuf>,
}

impl std::fmt::Debug for Evaluator<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Evaluator").field("artifacts", &self.artifacts).finish()
    }
}

fn errors_for(ids: &[MetricId], e: &Error) -> Vec<MetricScore> {
    ids.iter().map(|&id| MetricScore::error(id, &e.to_string())).collect()
}

fn one(id: MetricId, r: Result<MetricScore>) -> MetricScore {
    r.unwrap_or_else(|e| MetricScore::error(id, &e.to_string()))
}

fn many(ids: &[MetricId], r: Result<Vec<MetricScore>>) -> Vec<MetricScore> {
    r.unwrap_or_else(|e| errors_for(ids, &e))
}

/// Splits a subject field into individual labels: "a chef and a waiter"
/// gives two tracks.
pub fn subject_labels(subject: &str) -> Vec<String> {
    let mut parts = vec![subject.to_lowercase()];
    for sep in [",", ";", " and "] {
        parts = parts
            .iter()
            .flat_map(|p| p.split(sep).map(str::to_string).collect::<Vec<_>>())
            .collect();
    }
    let mut out: Vec<String> = Vec::new();
    for p in parts {
        let p = p.trim().to_string();
        if !p.is_empty() && !out.contains(&p) {
            out.push(p);
        }
    }
    out
}

fn yes_no(text: &str) -> Result<bool> {
    match canonicalize_answer(text) {
        (HerdAnswer::Yes, _) => Ok(true),
        (HerdAnswer::No, _) => Ok(false),
        _ => Err(Error::Extraction(text.chars().take(200).collect())),
    }
}

#[derive(Debug, Serialize)]
struct MatchingArtifact<'a> {
    generated_events: usize,
    ground_truth_events: usize,
    similarity: Vec<Vec<f64>>,
    pairs: &'a [MatchedPair],
    inversions: u64,
    max_inversions: u64,
    score: Option<f64>,
}

#[derive(Debug, Serialize)]
struct TransitionArtifact {
    detected: Vec<usize>,
    kept: Vec<usize>,
    skipped: Vec<usize>,
    windows: Vec<TransitionWindowArtifact>,
}

#[derive(Debug, Serialize)]
struct TransitionWindowArtifact {
    start: usize,
    end: usize,
    truncated: bool,
    cues: Vec<FrameCues>,
    #[serde(flatten)]
    window: TransitionWindow,
}

#[derive(Debug, Serialize)]
struct TrackManifestEntry {
    label: String,
    kind: &'static str,
    event_index: usize,
    frame_index: usize,
    coverage: f64,
    offset: usize,
    length: usize,
}

impl Evaluator<'_> {
    fn save_json(&self, name: &str, value: &impl Serialize) -> Result<()> {
        let Some(dir) = &self.artifacts else {
            return Ok(());
        };
        let mut body = serde_json::to_vec_pretty(value).map_err(|e| Error::json(name, e))?;
        body.push(b'\n');
        write_atomic(&dir.join(name), &body)
    }

    fn save_bytes(&self, name: &str, bytes: &[u8]) -> Result<()> {
        match &self.artifacts {
            Some(dir) => write_atomic(&dir.join(name), bytes),
            None => Ok(()),
        }
    }

    /// Uniformly sampled frames for whole-video requests, with the frame
    /// rate those samples represent.
    fn request_frames(&self, video: &Video) -> (Vec<GrayFrame>, f64) {
        let n = video.frames.len();
        let idx = sample_uniform(0..n, self.metrics.video_request_frames.max(1));
        let frames: Vec<GrayFrame> = idx.iter().map(|&i| video.frames[i].clone()).collect();
        let fps = frames.len() as f64 / video.duration_s();
        (frames, fps)
    }

    /// Scores every metric for one sample.
    pub fn evaluate(&self, record: &PromptRecord, video: &Video) -> ScoreReport {
        let mut scores = Vec::new();
        scores.push(one(MetricId::AestheticQuality, self.aesthetic(video)));
        scores.push(one(MetricId::TechnicalQuality, self.technical(video)));

        let alignment_ids = [MetricId::OverallAlignment, MetricId::EventAlignment];
        let generated = match self.alignment(record, video) {
            Ok((s, events)) => {
                scores.extend(s);
                events
            }
            Err(e) => {
                scores.extend(errors_for(&alignment_ids, &e));
                Vec::new()
            }
        };

        scores.push(one(MetricId::DynamicDegree, self.dynamic_degree(video)));
        scores.push(one(MetricId::MotionSmoothness, self.motion_smoothness(video)));
        scores.push(one(MetricId::WarpingError, self.warping_error(video)));
        scores.push(one(MetricId::SemanticConsistency, self.semantic_consistency(video)));
        scores.push(one(
            MetricId::TemporalFlickering,
            temporal::temporal_flickering(&video.frames, self.metrics.temporal_flickering.static_mad)
                .map_err(Error::from),
        ));
        scores.push(one(MetricId::TransitionSmoothness, self.transition_smoothness(video)));
        scores.push(one(MetricId::HumanAction, self.human_action(record, video)));
        let events = if record.ground_truth_events.is_empty() {
            &generated
        } else {
            &record.ground_truth_events
        };
        scores.extend(many(
            &[
                MetricId::IntraEventSubjectConsistency,
                MetricId::IntraEventBackgroundConsistency,
                MetricId::InterEventSubjectConsistency,
                MetricId::InterEventBackgroundConsistency,
            ],
            self.event_consistency(events, video),
        ));
        let clarity_ids: Vec<MetricId> = ClarityDimension::ALL.iter().map(|d| d.metric_id()).collect();
        scores.extend(many(&clarity_ids, self.clarity(video)));
        let herd_ids: Vec<MetricId> = herd_metric_ids().collect();
        scores.extend(many(&herd_ids, self.herd(record, video)));
        ScoreReport::from_metrics(&record.id, scores)
    }

    // -- static quality ------------------------------------------------------

    pub fn aesthetic(&self, video: &Video) -> Result<MetricScore> {
        let idx = per_second_frames(video.fps, video.frames.len());
        let scores = idx
            .iter()
            .map(|&i| self.hub.aesthetic(&video.frames[i]))
            .collect::<Result<Vec<f64>>>()?;
        Ok(aesthetic_score(&scores, &self.metrics.rr_ub.rrub())?)
    }

    pub fn technical(&self, video: &Video) -> Result<MetricScore> {
        let t = &self.metrics.technical;
        let clips = clip_partition(video.frames.len(), video.fps, t.clip_max_s);
        let mut scores = Vec::with_capacity(clips.len());
        for clip in &clips {
            let idx = sample_uniform(clip.clone(), t.frames_per_clip.max(1));
            let frames: Vec<GrayFrame> = idx.iter().map(|&i| video.frames[i].clone()).collect();
            let fps = frames.len() as f64 * video.fps / clip.len() as f64;
            scores.push(self.hub.technical(frames, fps)?);
        }
        Ok(technical_score(&scores, (t.provider_range[0], t.provider_range[1]))?.with_note("clips", clips.len()))
    }

    // -- text-video alignment --------------------------------------------------

    pub fn describe(&self, video: &Video) -> Result<String> {
        let (frames, fps) = self.request_frames(video);
        self.hub.describe(frames, fps)
    }

    pub fn extract_events(&self, text: &str) -> Result<Vec<EventSpec>> {
        self.hub
            .llm_json(TemplateId::Events, &[("description_text", text)], &[], parse_events)
    }

    fn alignment(&self, record: &PromptRecord, video: &Video) -> Result<(Vec<MetricScore>, Vec<EventSpec>)> {
        let description = self.describe(video)?;
        self.save_bytes("description.txt", format!("{description}\n").as_bytes())?;
        let mut embed_memo: HashMap<String, Vec<f64>> = HashMap::new();
        let mut embed = |text: &str| -> Result<Vec<f64>> {
            if let Some(v) = embed_memo.get(text) {
                return Ok(v.clone());
            }
            let v = self.hub.embed_text(text)?;
            embed_memo.insert(text.to_string(), v.clone());
            Ok(v)
        };
        let cos = clamped_cosine(&embed(&description)?, &embed(&record.prompt_base)?);
        let overall = MetricScore::ok(MetricId::OverallAlignment, cos, cos);

        let generated = self.extract_events(&description);
        let event_score = match &generated {
            Err(e) => MetricScore::error(MetricId::EventAlignment, &e.to_string()),
            Ok(_) if record.ground_truth_events.is_empty() => {
                MetricScore::not_applicable(MetricId::EventAlignment, "no ground-truth events")
            }
            Ok(gen) => {
                self.save_json("events_generated.json", gen)?;
                let gt = &record.ground_truth_events;
                let gen_vecs = gen.iter().map(|e| embed(&e.event)).collect::<Result<Vec<_>>>()?;
                let gt_vecs = gt.iter().map(|e| embed(&e.event)).collect::<Result<Vec<_>>>()?;
                let rows: Vec<Vec<f64>> = gen_vecs
                    .iter()
                    .map(|g| gt_vecs.iter().map(|t| clamped_cosine(g, t)).collect())
                    .collect();
                let matrix = if rows.is_empty() {
                    SimilarityMatrix::zeros(0, gt.len())
                } else {
                    SimilarityMatrix::from_rows(&rows)?
                };
                let mut pairs = Vec::new();
                for (gi, ti) in match_events(&matrix) {
                    let (g, t) = (&gen[gi], &gt[ti]);
                    let mut field = |a: &str, b: &str| -> Result<f64> {
                        match field_similarity_rule(a, b) {
                            Some(v) => Ok(v),
                            None => Ok(clamped_cosine(&embed(a)?, &embed(b)?)),
                        }
                    };
                    let field_sims = FieldSims {
                        subject: field(&g.subject, &t.subject)?,
                        setting: field(&g.setting, &t.setting)?,
                        action: field(&g.action, &t.action)?,
                        camera: field(&g.camera_motion, &t.camera_motion)?,
                    };
                    pairs.push(MatchedPair {
                        gen_index: gi,
                        gt_index: ti,
                        semantic_sim: matrix.get(gi, ti),
                        field_sims,
                    });
                }
                let matching = EventMatching::new(pairs);
                let score = event_alignment_score(&matching);
                self.save_json(
                    "matching.json",
                    &MatchingArtifact {
                        generated_events: gen.len(),
                        ground_truth_events: gt.len(),
                        similarity: rows,
                        pairs: &matching.pairs,
                        inversions: matching.inversions,
                        max_inversions: matching.max_inversions,
                        score: score.value(),
                    },
                )?;
                score
            }
        };
        Ok((vec![overall, event_score], generated.unwrap_or_default()))
    }

    // -- temporal quality ------------------------------------------------------

    fn need_frames(video: &Video, n: usize, what: &str) -> Result<()> {
        if video.frames.len() < n {
            return Err(Error::Core(locot2v_core::Error::Input(format!(
                "{what} needs at least {n} frames, video has {}",
                video.frames.len()
            ))));
        }
        Ok(())
    }

    pub fn dynamic_degree(&self, video: &Video) -> Result<MetricScore> {
        Self::need_frames(video, 2, "dynamic degree")?;
        let cfg = &self.metrics.dynamic_degree;
        let stats = sample_uniform(0..video.frames.len() - 1, cfg.max_samples.max(1))
            .into_iter()
            .map(|i| {
                let f = self.hub.flow(&video.frames[i], &video.frames[i + 1])?;
                Ok(temporal::flow_motion_statistic(&f))
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(temporal::dynamic_degree(&stats, cfg.threshold)?)
    }

    pub fn motion_smoothness(&self, video: &Video) -> Result<MetricScore> {
        Self::need_frames(video, 3, "motion smoothness")?;
        let n = video.frames.len();
        let errors = sample_uniform(1..n - 1, self.metrics.motion_smoothness.max_samples.max(1))
            .into_iter()
            .map(|i| {
                let mid = self.hub.interpolate(&video.frames[i - 1], &video.frames[i + 1])?;
                Ok(mean_abs_diff(&mid, &video.frames[i])?)
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(temporal::motion_smoothness(&errors)?)
    }

    pub fn warping_error(&self, video: &Video) -> Result<MetricScore> {
        Self::need_frames(video, 2, "warping error")?;
        let mut errors = Vec::new();
        let mut skipped = 0usize;
        for i in sample_uniform(0..video.frames.len() - 1, self.metrics.warping_error.max_samples.max(1)) {
            let (a, b) = (&video.frames[i], &video.frames[i + 1]);
            // Flow on b's grid pointing into a, checked against a → b.
            let back = self.hub.flow(b, a)?;
            let fwd = self.hub.flow(a, b)?;
            let occluded = locot2v_core::frame::occlusion_mask(&back, &fwd);
            match temporal::warp_pair_error(a, b, &back, Some(&occluded))? {
                Some(e) => errors.push(e),
                None => skipped += 1,
            }
        }
        let mut s = temporal::warping_error(&errors)?;
        if skipped > 0 {
            s = s.with_note("pairs_without_valid_pixels", skipped);
        }
        Ok(s)
    }

    pub fn semantic_consistency(&self, video: &Video) -> Result<MetricScore> {
        Self::need_frames(video, 2, "semantic consistency")?;
        let idx = sample_uniform(0..video.frames.len(), self.metrics.semantic_consistency.max_samples.max(2));
        let embeddings = idx
            .iter()
            .map(|&i| self.hub.embed_frame(&video.frames[i]))
            .collect::<Result<Vec<_>>>()?;
        Ok(temporal::semantic_consistency(&embeddings)?)
    }

    pub fn transition_smoothness(&self, video: &Video) -> Result<MetricScore> {
        let params = self.metrics.transition.params();
        params.validate()?;
        let detected = self.hub.scenes(&video.frames, video.fps)?;
        let kept = dedup_transitions(&detected, params.k);
        let n = video.frames.len();
        let mut embeds: HashMap<usize, Vec<f64>> = HashMap::new();
        let mut flows: HashMap<usize, (f64, f64)> = HashMap::new();
        let mut windows = Vec::new();
        let mut artifacts = Vec::new();
        let mut skipped = Vec::new();
        for &t in &kept {
            let Some(bounds) = transition_window(t, params.k, n) else {
                skipped.push(t);
                continue;
            };
            let mut cues = Vec::with_capacity(bounds.end - bounds.start);
            for j in bounds.start..bounds.end {
                let (prev, cur) = (&video.frames[j - 1], &video.frames[j]);
                for i in [j - 1, j] {
                    if let Entry::Vacant(slot) = embeds.entry(i) {
                        slot.insert(self.hub.embed_frame(&video.frames[i])?);
                    }
                }
                // Mean flow of the pair starting at frame i.
                for i in [j - 2, j - 1] {
                    if let Entry::Vacant(slot) = flows.entry(i) {
                        let f: FlowField = self.hub.flow(&video.frames[i], &video.frames[i + 1])?;
                        slot.insert(f.mean_vector());
                    }
                }
                cues.push(FrameCues {
                    mae: 1.0 - mean_abs_diff(prev, cur)? / 255.0,
                    ssim: ssim(prev, cur)?,
                    feature: math::cosine(&embeds[&(j - 1)], &embeds[&j]),
                    motion: motion_consistency(flows[&(j - 2)], flows[&(j - 1)]),
                });
            }
            let seq = similarity_sequence(&cues, &params)?;
            let w = score_transition(t, bounds.half_width, seq, &params)?;
            artifacts.push(TransitionWindowArtifact {
                start: bounds.start,
                end: bounds.end,
                truncated: bounds.truncated,
                cues,
                window: w.clone(),
            });
            windows.push(w);
        }
        let truncated = artifacts.iter().filter(|a| a.truncated).count();
        self.save_json(
            "transitions.json",
            &TransitionArtifact {
                detected,
                kept,
                skipped: skipped.clone(),
                windows: artifacts,
            },
        )?;
        let mut s = temporal::transition_smoothness(&windows);
        if truncated > 0 {
            s = s.with_note("truncated_windows", truncated);
        }
        if !skipped.is_empty() {
            s = s.with_note("skipped_transitions", skipped.len());
        }
        Ok(s)
    }

    pub fn human_action(&self, record: &PromptRecord, video: &Video) -> Result<MetricScore> {
        if record.human_actions.is_empty() {
            return Ok(human_action_score(&[]));
        }
        let (frames, fps) = self.request_frames(video);
        let mut flagged = 0usize;
        let mut ask = |template: TemplateId, vars: &[(&str, &str)]| -> Result<bool> {
            match self.hub.ask(template, vars, frames.clone(), fps, &[], yes_no) {
                Ok(b) => Ok(b),
                Err(Error::Extraction(_)) => {
                    flagged += 1;
                    Ok(false)
                }
                Err(e) => Err(e),
            }
        };
        let mut answers = Vec::new();
        let mut log = Vec::new();
        for a in &record.human_actions {
            let q = occurrence_question(&a.subject, &a.action);
            let occurred = ask(TemplateId::ActionOccurrence, &[("question_text", &q)])?;
            let action_text = format!("{} {}", a.subject, a.action);
            let mut smooth = [false; 3];
            for (k, sq) in SMOOTHNESS_QUESTIONS.iter().enumerate() {
                smooth[k] = ask(
                    TemplateId::ActionSmoothness,
                    &[("action_text", &action_text), ("question_text", sq)],
                )?;
            }
            let ans = ActionAnswers { occurred, smooth };
            log.push(json!({ "subject": a.subject, "action": a.action, "answers": ans, "score": ans.score() }));
            answers.push(ans);
        }
        self.save_json("human_actions.json", &log)?;
        let mut s = human_action_score(&answers);
        if flagged > 0 {
            s = s.with_note("non_yes_no_answers", flagged);
        }
        Ok(s)
    }

    /// One clip per event; events the grounder cannot place get their share
    /// of a uniform partition.
    pub fn ground_events(&self, events: &[EventSpec], video: &Video) -> Result<Vec<EventClip>> {
        let n = video.frames.len();
        let uniform = uniform_partition(n, events.len());
        let (frames, fps) = self.request_frames(video);
        let mut clips = Vec::with_capacity(events.len());
        for (i, ev) in events.iter().enumerate() {
            let grounded = self
                .hub
                .ground(frames.clone(), fps, &ev.event)
                .map_err(|e| log::debug!("grounding event {i} failed: {e}"))
                .ok()
                .and_then(|(s, e)| span_to_frames(s, e, video.fps, n));
            clips.push(match grounded {
                Some((start, end, clamped)) => EventClip {
                    event_index: i,
                    start_frame: start,
                    end_frame: end,
                    source: ClipSource::Grounded,
                    clamped,
                },
                None => EventClip {
                    event_index: i,
                    start_frame: uniform[i].start,
                    end_frame: uniform[i].end,
                    source: ClipSource::FallbackUniform,
                    clamped: false,
                },
            });
        }
        Ok(clips)
    }

    /// Subject tracks and the background track over sampled clip frames.
    pub fn build_tracks(
        &self,
        events: &[EventSpec],
        clips: &[EventClip],
        video: &Video,
    ) -> Result<(Vec<FeatureTrack>, FeatureTrack, usize)> {
        let cfg = &self.metrics.event_clips;
        let mut subjects: BTreeMap<String, FeatureTrack> = BTreeMap::new();
        let mut background = FeatureTrack::new(BACKGROUND_LABEL);
        let mut failed_frames = 0usize;
        for clip in clips {
            let labels = subject_labels(&events[clip.event_index].subject);
            for fi in sample_uniform(clip.start_frame..clip.end_frame, cfg.frames_per_clip.max(1)) {
                let frame = &video.frames[fi];
                let masks = match labels
                    .iter()
                    .map(|l| self.hub.segment(frame, l).map(|m| (l, m)))
                    .collect::<Result<Vec<(&String, Mask)>>>()
                {
                    Ok(m) => m,
                    Err(e) => {
                        log::debug!("segmenting frame {fi} failed: {e}");
                        failed_frames += 1;
                        continue;
                    }
                };
                let mut union = Mask::empty(frame.width, frame.height);
                for (label, mask) in &masks {
                    union.union_with(mask);
                    let Some(crop) = masked_crop(frame, mask) else {
                        continue;
                    };
                    let feature = self.hub.embed_frame(&crop)?;
                    subjects
                        .entry((*label).clone())
                        .or_insert_with(|| FeatureTrack::new(label))
                        .entries
                        .push(TrackEntry {
                            event_index: clip.event_index,
                            frame_index: fi,
                            feature,
                            coverage: mask.coverage(),
                        });
                }
                let removed = union.dilate(cfg.mask_dilation);
                let bg = remove_masked(frame, &removed);
                background.entries.push(TrackEntry {
                    event_index: clip.event_index,
                    frame_index: fi,
                    feature: self.hub.embed_frame(&bg)?,
                    coverage: 1.0 - removed.coverage(),
                });
            }
        }
        Ok((subjects.into_values().collect(), background, failed_frames))
    }

    fn save_tracks(&self, subjects: &[FeatureTrack], background: &FeatureTrack) -> Result<()> {
        if self.artifacts.is_none() {
            return Ok(());
        }
        let mut bin = Vec::new();
        let mut manifest = Vec::new();
        let tagged = subjects
            .iter()
            .map(|t| (t, "subject"))
            .chain(std::iter::once((background, "background")));
        for (track, kind) in tagged {
            for e in &track.entries {
                manifest.push(TrackManifestEntry {
                    label: track.label.clone(),
                    kind,
                    event_index: e.event_index,
                    frame_index: e.frame_index,
                    coverage: e.coverage,
                    offset: bin.len() / 8,
                    length: e.feature.len(),
                });
                for v in &e.feature {
                    bin.extend_from_slice(&v.to_le_bytes());
                }
            }
        }
        self.save_bytes("tracks.bin", &bin)?;
        self.save_json(
            "tracks.json",
            &json!({ "dtype": "f64-le", "unit": "element offset", "entries": manifest }),
        )
    }

    fn event_consistency(&self, events: &[EventSpec], video: &Video) -> Result<Vec<MetricScore>> {
        let ids = [
            MetricId::IntraEventSubjectConsistency,
            MetricId::IntraEventBackgroundConsistency,
            MetricId::InterEventSubjectConsistency,
            MetricId::InterEventBackgroundConsistency,
        ];
        if events.is_empty() || video.frames.is_empty() {
            return Ok(ids
                .iter()
                .map(|&id| MetricScore::not_applicable(id, "no events to ground"))
                .collect());
        }
        let clips = self.ground_events(events, video)?;
        self.save_json("event_clips.json", &clips)?;
        let (subjects, background, failed) = self.build_tracks(events, &clips, video)?;
        self.save_tracks(&subjects, &background)?;
        let bg = std::slice::from_ref(&background);
        let fallback = clips.iter().filter(|c| c.source == ClipSource::FallbackUniform).count();
        let mut out = vec![
            intra_event_consistency(ids[0], &subjects, &clips),
            intra_event_consistency(ids[1], bg, &clips),
            inter_event_consistency(ids[2], &subjects),
            inter_event_consistency(ids[3], bg),
        ];
        for s in &mut out {
            if fallback > 0 {
                s.diagnostics.insert("fallback_clips".into(), fallback.to_string());
            }
            if failed > 0 {
                s.diagnostics.insert("segmentation_failed_frames".into(), failed.to_string());
            }
        }
        Ok(out)
    }

    // -- content clarity --------------------------------------------------------

    fn clarity(&self, video: &Video) -> Result<Vec<MetricScore>> {
        let (frames, fps) = self.request_frames(video);
        let mut trials = Vec::new();
        let mut log = Vec::new();
        for r in 0..self.metrics.clarity.trials {
            let outcome = self.hub.ask(
                TemplateId::Clarity,
                &[],
                frames.clone(),
                fps,
                &[("trial", json!(r))],
                |text| Ok((text.to_string(), parse_clarity_trial(r, text)?)),
            );
            match outcome {
                Ok((raw, trial)) => {
                    log.push(json!({ "trial_index": r, "raw": raw, "parsed": trial }));
                    trials.push(trial);
                }
                Err(e) => log.push(json!({ "trial_index": r, "error": e.to_string() })),
            }
        }
        self.save_json("clarity_trials.json", &log)?;
        let dropped = self.metrics.clarity.trials - trials.len();
        let result = clarity_score(&trials)?;
        Ok(result
            .per_dimension
            .into_iter()
            .map(|s| if dropped > 0 { s.with_note("dropped_trials", dropped) } else { s })
            .collect())
    }

    // -- HERD ----------------------------------------------------------------------

    fn herd(&self, record: &PromptRecord, video: &Video) -> Result<Vec<MetricScore>> {
        if record.herd_questions.is_empty() {
            return Ok(herd_metric_ids()
                .map(|id| MetricScore::not_applicable(id, "no HERD questions"))
                .collect());
        }
        let (frames, fps) = self.request_frames(video);
        let mut responses = Vec::new();
        let mut log = Vec::new();
        let mut flagged_by_dim: BTreeMap<MetricId, usize> = BTreeMap::new();
        for q in &record.herd_questions {
            let outcome = self.hub.ask(
                TemplateId::HerdAnswer,
                &[("question_text", &q.text)],
                frames.clone(),
                fps,
                &[],
                |text| match canonicalize_answer(text) {
                    (_, true) => Err(Error::Extraction(text.chars().take(200).collect())),
                    (a, false) => Ok((a, text.to_string())),
                },
            );
            let (answer, raw, flagged) = match outcome {
                Ok((a, raw)) => (a, raw, false),
                Err(Error::Extraction(raw)) => (HerdAnswer::Unclear, raw, true),
                Err(e) => return Err(e),
            };
            if flagged {
                *flagged_by_dim.entry(q.dimension.metric_id()).or_default() += 1;
            }
            log.push(json!({ "question": q, "answer": answer, "raw": raw, "flagged": flagged }));
            responses.push(HerdResponse {
                question: q.clone(),
                answer,
            });
        }
        self.save_json("herd_responses.json", &log)?;
        Ok(herd_score(&responses)
            .per_dimension
            .into_iter()
            .map(|s| match flagged_by_dim.get(&s.metric_id) {
                Some(&n) => s.with_note("unrecognised_answers", n),
                None => s,
            })
            .collect())
    }
}

/// Parses an event array; a missing camera motion becomes "static".
pub fn parse_events(v: &Value) -> Result<Vec<EventSpec>> {
    let arr = v
        .as_array()
        .ok_or_else(|| Error::provider(ProviderKind::ComplexityJudge, "events reply is not an array"))?;
    arr.iter()
        .enumerate()
        .map(|(i, e)| {
            let field = |k: &str| e.get(k).and_then(Value::as_str).unwrap_or("").trim().to_string();
            let event = field("event");
            if event.is_empty() {
                return Err(Error::provider(
                    ProviderKind::ComplexityJudge,
                    format!("event {i} has no description"),
                ));
            }
            let camera = e
                .get("camera motion")
                .or_else(|| e.get("camera_motion"))
                .and_then(Value::as_str)
                .unwrap_or("");
            Ok(EventSpec::new(&event, &field("subject"), &field("setting"), &field("action"), camera))
        })
        .collect()
}

/// Parses one judge reply into a validated trial.
pub fn parse_clarity_trial(trial_index: usize, text: &str) -> Result<ClarityTrial> {
    let invalid = |m: String| Error::provider(ProviderKind::QuestionAnswerer, format!("clarity trial {trial_index}: {m}"));
    let v = parse_json_block(text)?;
    let obj = v.as_object().ok_or_else(|| invalid("reply is not an object".into()))?;
    let mut entries = Vec::new();
    for (key, val) in obj {
        let Some(dimension) = ClarityDimension::parse(key) else {
            continue;
        };
        let score = val
            .get("score")
            .and_then(|s| s.as_u64().or_else(|| s.as_f64().filter(|f| f.fract() == 0.0 && *f >= 0.0).map(|f| f as u64)))
            .ok_or_else(|| invalid(format!("{key}: score is not a non-negative integer")))?;
        let score = u8::try_from(score).map_err(|_| invalid(format!("{key}: score {score} out of range")))?;
        let reason = val.get("reason").and_then(Value::as_str).unwrap_or("").to_string();
        entries.push(ClarityEntry {
            dimension,
            score,
            reason,
        });
    }
    let trial = ClarityTrial { trial_index, entries };
    trial.validate().map_err(|e| invalid(e.to_string()))?;
    Ok(trial)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subject_label_splitting() {
        assert_eq!(subject_labels("A chef and a waiter"), vec!["a chef", "a waiter"]);
        assert_eq!(subject_labels("cat, dog; bird"), vec!["cat", "dog", "bird"]);
        assert!(subject_labels("  ").is_empty());
        assert_eq!(subject_labels("fox, fox"), vec!["fox"]);
    }

    #[test]
    fn event_parsing_fills_camera_motion() {
        let v = json!([{"event": "A fox runs.", "subject": "fox", "setting": "", "action": "runs"}]);
        let e = parse_events(&v).unwrap();
        assert_eq!(e[0].camera_motion, "static");
        assert!(parse_events(&json!([{"subject": "x"}])).is_err());
        assert!(parse_events(&json!({"event": "x"})).is_err());
        assert!(parse_events(&json!([])).unwrap().is_empty());
    }

    #[test]
    fn clarity_trial_parsing() {
        let ok = r#"{"Theme Clarity": {"score": 3, "reason": "r"}, "Logical Structure": {"score": 4, "reason": ""},
                     "Information Completeness": {"score": 0, "reason": ""}, "Information Consistency": {"score": 2, "reason": ""}}"#;
        let t = parse_clarity_trial(1, ok).unwrap();
        assert_eq!(t.score(ClarityDimension::LogicalStructure), Some(4));
        let five = ok.replace("\"score\": 4", "\"score\": 5");
        assert!(parse_clarity_trial(1, &five).is_err());
        let missing = r#"{"Theme Clarity": {"score": 3}}"#;
        assert!(parse_clarity_trial(0, missing).is_err());
    }

    #[test]
    fn yes_no_canonicalization() {
        assert!(yes_no("Yes.").unwrap());
        assert!(!yes_no("no, it does not").unwrap());
        assert!(matches!(yes_no("maybe"), Err(Error::Extraction(_))));
        assert!(yes_no("unclear").is_err());
    }
}
