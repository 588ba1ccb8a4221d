//! Domain types shared by every metric, plus record validation.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math;

/// Theme category used when grouping results.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Category {
    HumanRealLife,
    NatureExploration,
    VirtualEntertainment,
}

impl Category {
    pub const ALL: [Category; 3] = [
        Category::HumanRealLife,
        Category::NatureExploration,
        Category::VirtualEntertainment,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::HumanRealLife => "human-real-life",
            Category::NatureExploration => "nature-exploration",
            Category::VirtualEntertainment => "virtual-entertainment",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.as_str() == s)
    }
}

/// One event: a description plus its four structured fields.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventSpec {
    pub event: String,
    #[serde(default)]
    pub subject: String,
    #[serde(default)]
    pub setting: String,
    #[serde(default)]
    pub action: String,
    #[serde(rename = "camera motion", default = "default_camera_motion")]
    pub camera_motion: String,
}

fn default_camera_motion() -> String {
    "static".to_string()
}

impl EventSpec {
    pub fn new(event: &str, subject: &str, setting: &str, action: &str, camera: &str) -> Self {
        let camera_motion = if camera.trim().is_empty() {
            default_camera_motion()
        } else {
            camera.to_string()
        };
        EventSpec {
            event: event.to_string(),
            subject: subject.to_string(),
            setting: setting.to_string(),
            action: action.to_string(),
            camera_motion,
        }
    }
}

/// The seven high-level HERD dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HerdDimension {
    EmotionalResponse,
    NarrativeFlow,
    CharacterDevelopment,
    VisualStyle,
    Themes,
    InterpretiveDepth,
    OverallImpression,
}

impl HerdDimension {
    pub const ALL: [HerdDimension; 7] = [
        HerdDimension::EmotionalResponse,
        HerdDimension::NarrativeFlow,
        HerdDimension::CharacterDevelopment,
        HerdDimension::VisualStyle,
        HerdDimension::Themes,
        HerdDimension::InterpretiveDepth,
        HerdDimension::OverallImpression,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            HerdDimension::EmotionalResponse => "emotional-response",
            HerdDimension::NarrativeFlow => "narrative-flow",
            HerdDimension::CharacterDevelopment => "character-development",
            HerdDimension::VisualStyle => "visual-style",
            HerdDimension::Themes => "themes",
            HerdDimension::InterpretiveDepth => "interpretive-depth",
            HerdDimension::OverallImpression => "overall-impression",
        }
    }

    /// Title-case label used as JSON key in the generation templates.
    pub fn title(self) -> &'static str {
        match self {
            HerdDimension::EmotionalResponse => "Emotional Response",
            HerdDimension::NarrativeFlow => "Narrative Flow",
            HerdDimension::CharacterDevelopment => "Character Development",
            HerdDimension::VisualStyle => "Visual Style",
            HerdDimension::Themes => "Themes",
            HerdDimension::InterpretiveDepth => "Interpretive Depth",
            HerdDimension::OverallImpression => "Overall Impression",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        let key = normalize_key(s);
        Self::ALL
            .into_iter()
            .find(|d| normalize_key(d.as_str()) == key || normalize_key(d.title()) == key)
    }

    pub fn metric_id(self) -> MetricId {
        match self {
            HerdDimension::EmotionalResponse => MetricId::HerdEmotionalResponse,
            HerdDimension::NarrativeFlow => MetricId::HerdNarrativeFlow,
            HerdDimension::CharacterDevelopment => MetricId::HerdCharacterDevelopment,
            HerdDimension::VisualStyle => MetricId::HerdVisualStyle,
            HerdDimension::Themes => MetricId::HerdThemes,
            HerdDimension::InterpretiveDepth => MetricId::HerdInterpretiveDepth,
            HerdDimension::OverallImpression => MetricId::HerdOverallImpression,
        }
    }
}

/// Lowercases and drops separators so "Emotional Response", "emotional_response"
/// and "emotional-response" compare equal.
pub fn normalize_key(s: &str) -> String {
    s.chars()
        .filter(|c| c.is_alphanumeric())
        .flat_map(|c| c.to_lowercase())
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Positive,
    Negative,
}

impl Polarity {
    pub fn as_str(self) -> &'static str {
        match self {
            Polarity::Positive => "positive",
            Polarity::Negative => "negative",
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Polarity::Positive => Polarity::Negative,
            Polarity::Negative => Polarity::Positive,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HerdQuestion {
    pub dimension: HerdDimension,
    pub text: String,
    pub polarity: Polarity,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionSpec {
    pub subject: String,
    pub action: String,
}

/// Prompt complexity on three 1–10 integer axes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexityScore {
    pub semantic: u8,
    pub structural: u8,
    pub control: u8,
    pub average: f64,
}

impl ComplexityScore {
    pub fn new(semantic: u8, structural: u8, control: u8) -> Result<Self> {
        for (what, v) in [
            ("semantic complexity", semantic),
            ("structural complexity", structural),
            ("control complexity", control),
        ] {
            if !(1..=10).contains(&v) {
                return Err(Error::Range {
                    what,
                    value: v as f64,
                });
            }
        }
        let average = (semantic as f64 + structural as f64 + control as f64) / 3.0;
        Ok(ComplexityScore {
            semantic,
            structural,
            control,
            average,
        })
    }
}

/// A test sample of the suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptRecord {
    pub id: String,
    pub theme: String,
    pub category: Category,
    pub prompt_text: String,
    pub prompt_base: String,
    #[serde(default)]
    pub ground_truth_events: Vec<EventSpec>,
    #[serde(default)]
    pub herd_questions: Vec<HerdQuestion>,
    #[serde(default)]
    pub human_actions: Vec<ActionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub complexity: Option<ComplexityScore>,
}

/// Configurable parts of record validation.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationRules {
    pub herd_questions_per_dimension: usize,
    /// Allowed theme labels; empty means any nonempty theme is accepted.
    pub themes: Vec<String>,
}

impl Default for ValidationRules {
    fn default() -> Self {
        ValidationRules {
            herd_questions_per_dimension: 6,
            themes: Vec::new(),
        }
    }
}

/// Checks the invariants a parsed record must satisfy. Returns one message per
/// violation, each prefixed with the offending field path.
pub fn validate_prompt_record(record: &PromptRecord, rules: &ValidationRules) -> Vec<String> {
    let mut out = Vec::new();
    if record.id.trim().is_empty() {
        out.push("id: must be nonempty".to_string());
    }
    if record.theme.trim().is_empty() {
        out.push("theme: must be nonempty".to_string());
    } else if !rules.themes.is_empty() && !rules.themes.iter().any(|t| t == &record.theme) {
        out.push(format!("theme: {:?} not in configured theme list", record.theme));
    }
    if record.prompt_base.trim().is_empty() {
        out.push("prompt_base: must be nonempty".to_string());
    }
    for (i, ev) in record.ground_truth_events.iter().enumerate() {
        if ev.event.trim().is_empty() {
            out.push(format!("ground_truth_events[{i}].event: must be nonempty"));
        }
        if ev.camera_motion.trim().is_empty() {
            out.push(format!("ground_truth_events[{i}].camera motion: must be nonempty"));
        }
    }
    if !record.herd_questions.is_empty() {
        let mut per_dim: BTreeMap<HerdDimension, usize> = BTreeMap::new();
        for q in &record.herd_questions {
            *per_dim.entry(q.dimension).or_default() += 1;
        }
        if per_dim.len() != HerdDimension::ALL.len() {
            out.push(format!(
                "herd_questions: expected {} dimensions, found {}",
                HerdDimension::ALL.len(),
                per_dim.len()
            ));
        }
        for (dim, n) in &per_dim {
            if *n != rules.herd_questions_per_dimension {
                out.push(format!(
                    "herd_questions[dimension={}]: expected {} questions, found {}",
                    dim.as_str(),
                    rules.herd_questions_per_dimension,
                    n
                ));
            }
        }
        for (i, q) in record.herd_questions.iter().enumerate() {
            if !q.text.trim_end().ends_with('?') {
                out.push(format!("herd_questions[{i}].text: must end with \"?\""));
            }
        }
    }
    for (i, a) in record.human_actions.iter().enumerate() {
        if a.subject.trim().is_empty() {
            out.push(format!("human_actions[{i}].subject: must be nonempty"));
        }
        if a.action.trim().is_empty() {
            out.push(format!("human_actions[{i}].action: must be nonempty"));
        }
    }
    if let Some(c) = &record.complexity {
        for (name, v) in [
            ("semantic", c.semantic),
            ("structural", c.structural),
            ("control", c.control),
        ] {
            if !(1..=10).contains(&v) {
                out.push(format!("complexity.{name}: {v} not in 1..=10"));
            }
        }
        let expected = (c.semantic as f64 + c.structural as f64 + c.control as f64) / 3.0;
        if libm::fabs(expected - c.average) > 1e-9 {
            out.push(format!(
                "complexity.average: {} differs from mean {}",
                c.average, expected
            ));
        }
    }
    out
}

/// Suite-level checks: every record plus id uniqueness.
pub fn validate_suite(records: &[PromptRecord], rules: &ValidationRules) -> Vec<String> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, r) in records.iter().enumerate() {
        if !seen.insert(r.id.as_str()) {
            out.push(format!("samples[{i}].id: duplicate id {:?}", r.id));
        }
        for v in validate_prompt_record(r, rules) {
            out.push(format!("samples[{i}].{v}"));
        }
    }
    out
}

/// Maps a normalized score in [0,1] to percent.
pub fn normalize_percent(raw: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&raw) {
        return Err(Error::Range {
            what: "normalized score",
            value: raw,
        });
    }
    Ok(raw * 100.0)
}

/// A video under evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoAsset {
    pub sample_id: String,
    pub path: String,
    pub fps: f64,
    pub frame_count: usize,
    pub duration_s: f64,
}

impl VideoAsset {
    pub fn new(sample_id: &str, path: &str, fps: f64, frame_count: usize) -> Result<Self> {
        if !(fps > 0.0) || !fps.is_finite() {
            return Err(Error::Range {
                what: "fps",
                value: fps,
            });
        }
        if frame_count == 0 {
            return Err(Error::Input("video has no frames".to_string()));
        }
        Ok(VideoAsset {
            sample_id: sample_id.to_string(),
            path: path.to_string(),
            fps,
            frame_count,
            duration_s: frame_count as f64 / fps,
        })
    }
}

/// The five top-level evaluation dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dimension {
    StaticQuality,
    TextVideoAlignment,
    TemporalQuality,
    ContentClarity,
    Herd,
}

impl Dimension {
    pub const ALL: [Dimension; 5] = [
        Dimension::StaticQuality,
        Dimension::TextVideoAlignment,
        Dimension::TemporalQuality,
        Dimension::ContentClarity,
        Dimension::Herd,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Dimension::StaticQuality => "static_quality",
            Dimension::TextVideoAlignment => "text_video_alignment",
            Dimension::TemporalQuality => "temporal_quality",
            Dimension::ContentClarity => "content_clarity",
            Dimension::Herd => "herd",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Dimension::StaticQuality => "Static Quality",
            Dimension::TextVideoAlignment => "Text-Video Alignment",
            Dimension::TemporalQuality => "Temporal Quality",
            Dimension::ContentClarity => "Content Clarity",
            Dimension::Herd => "HERD",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        let key = normalize_key(s);
        Self::ALL
            .into_iter()
            .find(|d| normalize_key(d.as_str()) == key || normalize_key(d.label()) == key)
    }

    /// Sub-dimensions in table column order.
    pub fn metrics(self) -> &'static [MetricId] {
        use MetricId::*;
        match self {
            Dimension::StaticQuality => &[AestheticQuality, TechnicalQuality],
            Dimension::TextVideoAlignment => &[OverallAlignment, EventAlignment],
            Dimension::TemporalQuality => &[
                DynamicDegree,
                MotionSmoothness,
                WarpingError,
                SemanticConsistency,
                TemporalFlickering,
                TransitionSmoothness,
                HumanAction,
                IntraEventSubjectConsistency,
                IntraEventBackgroundConsistency,
                InterEventSubjectConsistency,
                InterEventBackgroundConsistency,
            ],
            Dimension::ContentClarity => &[
                ThemeClarity,
                LogicalStructure,
                InformationCompleteness,
                InformationConsistency,
            ],
            Dimension::Herd => &[
                HerdEmotionalResponse,
                HerdNarrativeFlow,
                HerdCharacterDevelopment,
                HerdVisualStyle,
                HerdThemes,
                HerdInterpretiveDepth,
                HerdOverallImpression,
            ],
        }
    }
}

/// The 26 sub-dimension metrics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricId {
    AestheticQuality,
    TechnicalQuality,
    OverallAlignment,
    EventAlignment,
    DynamicDegree,
    MotionSmoothness,
    WarpingError,
    SemanticConsistency,
    TemporalFlickering,
    TransitionSmoothness,
    HumanAction,
    IntraEventSubjectConsistency,
    IntraEventBackgroundConsistency,
    InterEventSubjectConsistency,
    InterEventBackgroundConsistency,
    ThemeClarity,
    LogicalStructure,
    InformationCompleteness,
    InformationConsistency,
    HerdEmotionalResponse,
    HerdNarrativeFlow,
    HerdCharacterDevelopment,
    HerdVisualStyle,
    HerdThemes,
    HerdInterpretiveDepth,
    HerdOverallImpression,
}

impl MetricId {
    pub fn all() -> impl Iterator<Item = MetricId> {
        Dimension::ALL
            .into_iter()
            .flat_map(|d| d.metrics().iter().copied())
    }

    pub fn as_str(self) -> &'static str {
        use MetricId::*;
        match self {
            AestheticQuality => "aesthetic_quality",
            TechnicalQuality => "technical_quality",
            OverallAlignment => "overall_alignment",
            EventAlignment => "event_alignment",
            DynamicDegree => "dynamic_degree",
            MotionSmoothness => "motion_smoothness",
            WarpingError => "warping_error",
            SemanticConsistency => "semantic_consistency",
            TemporalFlickering => "temporal_flickering",
            TransitionSmoothness => "transition_smoothness",
            HumanAction => "human_action",
            IntraEventSubjectConsistency => "intra_event_subject_consistency",
            IntraEventBackgroundConsistency => "intra_event_background_consistency",
            InterEventSubjectConsistency => "inter_event_subject_consistency",
            InterEventBackgroundConsistency => "inter_event_background_consistency",
            ThemeClarity => "theme_clarity",
            LogicalStructure => "logical_structure",
            InformationCompleteness => "information_completeness",
            InformationConsistency => "information_consistency",
            HerdEmotionalResponse => "herd_emotional_response",
            HerdNarrativeFlow => "herd_narrative_flow",
            HerdCharacterDevelopment => "herd_character_development",
            HerdVisualStyle => "herd_visual_style",
            HerdThemes => "herd_themes",
            HerdInterpretiveDepth => "herd_interpretive_depth",
            HerdOverallImpression => "herd_overall_impression",
        }
    }

    /// Short column header as used in the result tables.
    pub fn short_label(self) -> &'static str {
        use MetricId::*;
        match self {
            AestheticQuality => "AQ",
            TechnicalQuality => "TQ",
            OverallAlignment => "OA",
            EventAlignment => "EA",
            DynamicDegree => "Dynamic Degree",
            MotionSmoothness => "Motion Smoothness",
            WarpingError => "Warping Error",
            SemanticConsistency => "Semantic Consistency",
            TemporalFlickering => "Temporal Flickering",
            TransitionSmoothness => "Transition Smoothness",
            HumanAction => "Human Action",
            IntraEventSubjectConsistency => "ITAE SC",
            IntraEventBackgroundConsistency => "ITAE BC",
            InterEventSubjectConsistency => "ITRE SC",
            InterEventBackgroundConsistency => "ITRE BC",
            ThemeClarity => "TC",
            LogicalStructure => "LS",
            InformationCompleteness => "ICP",
            InformationConsistency => "ICS",
            HerdEmotionalResponse => "Emotional Response",
            HerdNarrativeFlow => "Narrative Flow",
            HerdCharacterDevelopment => "Character Development",
            HerdVisualStyle => "Visual Style",
            HerdThemes => "Themes",
            HerdInterpretiveDepth => "Interpretive Depth",
            HerdOverallImpression => "Overall Impression",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::all().find(|m| m.as_str() == s)
    }

    pub fn dimension(self) -> Dimension {
        Dimension::ALL
            .into_iter()
            .find(|d| d.metrics().contains(&self))
            .expect("every metric belongs to a dimension")
    }
}

impl fmt::Display for MetricId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricStatus {
    Ok,
    NotApplicable,
    Error,
}

/// One metric outcome. `normalized` is present exactly when `status` is ok.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricScore {
    pub metric_id: MetricId,
    pub raw: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalized: Option<f64>,
    pub status: MetricStatus,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub diagnostics: BTreeMap<String, String>,
}

impl MetricScore {
    /// An ok score; `normalized` is clamped into [0,1].
    pub fn ok(metric_id: MetricId, raw: f64, normalized: f64) -> Self {
        MetricScore {
            metric_id,
            raw,
            normalized: Some(math::clamp01(normalized)),
            status: MetricStatus::Ok,
            diagnostics: BTreeMap::new(),
        }
    }

    pub fn not_applicable(metric_id: MetricId, reason: &str) -> Self {
        let mut s = MetricScore {
            metric_id,
            raw: 0.0,
            normalized: None,
            status: MetricStatus::NotApplicable,
            diagnostics: BTreeMap::new(),
        };
        s.diagnostics.insert("reason".to_string(), reason.to_string());
        s
    }

    pub fn error(metric_id: MetricId, message: &str) -> Self {
        let mut s = MetricScore {
            metric_id,
            raw: 0.0,
            normalized: None,
            status: MetricStatus::Error,
            diagnostics: BTreeMap::new(),
        };
        s.diagnostics.insert("error".to_string(), message.to_string());
        s
    }

    pub fn with_note(mut self, key: &str, value: impl fmt::Display) -> Self {
        self.diagnostics.insert(key.to_string(), format!("{value}"));
        self
    }

    pub fn is_ok(&self) -> bool {
        self.status == MetricStatus::Ok
    }

    /// Normalized value when ok.
    pub fn value(&self) -> Option<f64> {
        if self.is_ok() {
            self.normalized
        } else {
            None
        }
    }

    /// The status/normalized coupling and the [0,1] range.
    pub fn is_consistent(&self) -> bool {
        match (self.status, self.normalized) {
            (MetricStatus::Ok, Some(v)) => (0.0..=1.0).contains(&v),
            (MetricStatus::Ok, None) => false,
            (_, Some(_)) => false,
            (_, None) => true,
        }
    }
}

/// Per-sample roll-up of metric scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub sample_id: String,
    pub metrics: BTreeMap<MetricId, MetricScore>,
    pub dimension_averages: BTreeMap<Dimension, f64>,
    pub overall_average: Option<f64>,
}

impl ScoreReport {
    /// Builds the report and derives the dimension and overall averages.
    pub fn from_metrics(sample_id: &str, scores: impl IntoIterator<Item = MetricScore>) -> Self {
        let metrics: BTreeMap<MetricId, MetricScore> =
            scores.into_iter().map(|s| (s.metric_id, s)).collect();
        let dimension_averages = dimension_averages(&metrics);
        let overall_average = overall_from_dimensions(&dimension_averages);
        ScoreReport {
            sample_id: sample_id.to_string(),
            metrics,
            dimension_averages,
            overall_average,
        }
    }

    /// Recomputes the averages from `metrics` and compares them with the
    /// stored values within `tol`.
    pub fn check_invariants(&self, tol: f64) -> Vec<String> {
        let mut out = Vec::new();
        for (id, m) in &self.metrics {
            if *id != m.metric_id {
                out.push(format!("metrics[{id}]: keyed under wrong id {}", m.metric_id));
            }
            if !m.is_consistent() {
                out.push(format!("metrics[{id}]: status/normalized mismatch"));
            }
        }
        let recomputed = dimension_averages(&self.metrics);
        if recomputed.len() != self.dimension_averages.len() {
            out.push("dimension_averages: dimension set differs from recomputation".to_string());
        }
        for (d, v) in &recomputed {
            match self.dimension_averages.get(d) {
                Some(stored) if libm::fabs(stored - v) <= tol => {}
                other => out.push(format!(
                    "dimension_averages[{}]: stored {other:?}, recomputed {v}",
                    d.as_str()
                )),
            }
        }
        let overall = overall_from_dimensions(&recomputed);
        match (overall, self.overall_average) {
            (Some(a), Some(b)) if libm::fabs(a - b) <= tol => {}
            (None, None) => {}
            (a, b) => out.push(format!("overall_average: stored {b:?}, recomputed {a:?}")),
        }
        out
    }
}

pub(crate) fn dimension_averages(metrics: &BTreeMap<MetricId, MetricScore>) -> BTreeMap<Dimension, f64> {
    let mut out = BTreeMap::new();
    for d in Dimension::ALL {
        let vals: Vec<f64> = d
            .metrics()
            .iter()
            .filter_map(|id| metrics.get(id).and_then(MetricScore::value))
            .collect();
        if let Some(m) = math::mean(&vals) {
            out.insert(d, m);
        }
    }
    out
}

pub(crate) fn overall_from_dimensions(dims: &BTreeMap<Dimension, f64>) -> Option<f64> {
    if dims.len() == Dimension::ALL.len() {
        Some(dims.values().sum::<f64>() / dims.len() as f64)
    } else {
        None
    }
}

/// Pairwise similarities between generated (rows) and ground-truth (cols) events.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl SimilarityMatrix {
    /// Builds a matrix, clamping every value into [0,1].
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(Error::Input(format!(
                "similarity matrix {rows}x{cols} needs {} values, got {}",
                rows * cols,
                values.len()
            )));
        }
        Ok(SimilarityMatrix {
            rows,
            cols,
            values: values.into_iter().map(math::clamp01).collect(),
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Input("ragged similarity rows".to_string()));
        }
        Self::new(rows.len(), cols, rows.iter().flatten().copied().collect())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        SimilarityMatrix {
            rows,
            cols,
            values: alloc::vec![0.0; rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.values[row * self.cols + col] = math::clamp01(value);
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}
