//! Content clarity: repeated 0–4 judgments on four dimensions, averaged.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{normalize_key, MetricId, MetricScore};

pub const DEFAULT_TRIALS: usize = 3;
pub const MAX_RAW_SCORE: u8 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClarityDimension {
    ThemeClarity,
    LogicalStructure,
    InformationCompleteness,
    InformationConsistency,
}

impl ClarityDimension {
    pub const ALL: [ClarityDimension; 4] = [
        ClarityDimension::ThemeClarity,
        ClarityDimension::LogicalStructure,
        ClarityDimension::InformationCompleteness,
        ClarityDimension::InformationConsistency,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ClarityDimension::ThemeClarity => "theme-clarity",
            ClarityDimension::LogicalStructure => "logical-structure",
            ClarityDimension::InformationCompleteness => "information-completeness",
            ClarityDimension::InformationConsistency => "information-consistency",
        }
    }

    /// Accepts kebab, snake or title case ("Theme Clarity").
    pub fn parse(s: &str) -> Option<Self> {
        let key = normalize_key(s);
        Self::ALL.into_iter().find(|d| normalize_key(d.as_str()) == key)
    }

    pub fn metric_id(self) -> MetricId {
        match self {
            ClarityDimension::ThemeClarity => MetricId::ThemeClarity,
            ClarityDimension::LogicalStructure => MetricId::LogicalStructure,
            ClarityDimension::InformationCompleteness => MetricId::InformationCompleteness,
            ClarityDimension::InformationConsistency => MetricId::InformationConsistency,
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClarityEntry {
    pub dimension: ClarityDimension,
    pub score: u8,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClarityTrial {
    pub trial_index: usize,
    pub entries: Vec<ClarityEntry>,
}

impl ClarityTrial {
    /// Builds a trial from raw scores in [`ClarityDimension::ALL`] order.
    pub fn from_scores(trial_index: usize, scores: [u8; 4]) -> Self {
        ClarityTrial {
            trial_index,
            entries: ClarityDimension::ALL
                .iter()
                .zip(scores)
                .map(|(&dimension, score)| ClarityEntry {
                    dimension,
                    score,
                    reason: String::new(),
                })
                .collect(),
        }
    }

    /// Exactly one entry per dimension, every score in 0..=4.
    pub fn validate(&self) -> Result<()> {
        let mut seen = [false; 4];
        for e in &self.entries {
            if e.score > MAX_RAW_SCORE {
                return Err(Error::Clarity(format!(
                    "trial {}: {} score {} outside 0..=4",
                    self.trial_index,
                    e.dimension.as_str(),
                    e.score
                )));
            }
            if seen[e.dimension.index()] {
                return Err(Error::Clarity(format!(
                    "trial {}: duplicate dimension {}",
                    self.trial_index,
                    e.dimension.as_str()
                )));
            }
            seen[e.dimension.index()] = true;
        }
        if let Some(missing) = ClarityDimension::ALL.iter().find(|d| !seen[d.index()]) {
            return Err(Error::Clarity(format!(
                "trial {}: missing dimension {}",
                self.trial_index,
                missing.as_str()
            )));
        }
        Ok(())
    }

    pub fn score(&self, dimension: ClarityDimension) -> Option<u8> {
        self.entries
            .iter()
            .find(|e| e.dimension == dimension)
            .map(|e| e.score)
    }
}

/// Per-dimension scores and the headline clarity value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClarityResult {
    pub per_dimension: Vec<MetricScore>,
    pub overall: f64,
    pub trials: usize,
}

/// `s_d = mean(raw/4)` over trials and `S = mean(s_d)`.
pub fn clarity_score(trials: &[ClarityTrial]) -> Result<ClarityResult> {
    if trials.is_empty() {
        return Err(Error::Clarity("no valid clarity trials".into()));
    }
    for t in trials {
        t.validate()?;
    }
    let r = trials.len() as f64;
    let per_dimension: Vec<MetricScore> = ClarityDimension::ALL
        .iter()
        .map(|&d| {
            let sum: f64 = trials
                .iter()
                .map(|t| t.score(d).unwrap_or(0) as f64 / MAX_RAW_SCORE as f64)
                .sum();
            let s = sum / r;
            MetricScore::ok(d.metric_id(), s, s).with_note("trials", trials.len())
        })
        .collect();
    let overall = per_dimension.iter().filter_map(MetricScore::value).sum::<f64>() / 4.0;
    Ok(ClarityResult {
        per_dimension,
        overall,
        trials: trials.len(),
    })
}
