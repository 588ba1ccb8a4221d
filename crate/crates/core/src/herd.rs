//! HERD: polarity-aware yes/no question answering over seven dimensions.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::model::{HerdDimension, HerdQuestion, MetricId, MetricScore, Polarity};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HerdAnswer {
    Yes,
    No,
    Unclear,
}

impl HerdAnswer {
    pub fn as_str(self) -> &'static str {
        match self {
            HerdAnswer::Yes => "yes",
            HerdAnswer::No => "no",
            HerdAnswer::Unclear => "unclear",
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            HerdAnswer::Yes => HerdAnswer::No,
            HerdAnswer::No => HerdAnswer::Yes,
            HerdAnswer::Unclear => HerdAnswer::Unclear,
        }
    }
}

/// Canonicalizes a free-text answer: lowercase, punctuation stripped, and
/// only the leading token is considered. The flag is true when the text was
/// not recognisable and fell back to `unclear`.
pub fn canonicalize_answer(text: &str) -> (HerdAnswer, bool) {
    let cleaned: String = text
        .chars()
        .map(|c| if c.is_alphanumeric() { c } else { ' ' })
        .flat_map(|c| c.to_lowercase())
        .collect();
    match cleaned.split_whitespace().next() {
        Some("yes") => (HerdAnswer::Yes, false),
        Some("no") => (HerdAnswer::No, false),
        Some("unclear") => (HerdAnswer::Unclear, false),
        _ => (HerdAnswer::Unclear, true),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HerdResponse {
    pub question: HerdQuestion,
    pub answer: HerdAnswer,
}

impl HerdResponse {
    pub fn is_valid(&self) -> bool {
        self.answer != HerdAnswer::Unclear
    }

    pub fn is_consistent(&self) -> bool {
        matches!(
            (self.answer, self.question.polarity),
            (HerdAnswer::Yes, Polarity::Positive) | (HerdAnswer::No, Polarity::Negative)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HerdResult {
    /// One score per dimension, in [`HerdDimension::ALL`] order.
    pub per_dimension: Vec<MetricScore>,
    /// Mean over applicable dimensions; `None` when none is applicable.
    pub overall: Option<f64>,
}

/// Per-dimension consistent/valid ratios and their mean.
pub fn herd_score(responses: &[HerdResponse]) -> HerdResult {
    let per_dimension: Vec<MetricScore> = HerdDimension::ALL
        .iter()
        .map(|&d| {
            let mine = responses.iter().filter(|r| r.question.dimension == d);
            let (mut valid, mut consistent, mut total) = (0usize, 0usize, 0usize);
            for r in mine {
                total += 1;
                if r.is_valid() {
                    valid += 1;
                    consistent += r.is_consistent() as usize;
                }
            }
            if valid == 0 {
                return MetricScore::not_applicable(d.metric_id(), "no valid responses")
                    .with_note("responses", total);
            }
            let s = consistent as f64 / valid as f64;
            MetricScore::ok(d.metric_id(), s, s)
                .with_note("consistent", consistent)
                .with_note("valid", valid)
                .with_note("responses", total)
        })
        .collect();
    let applicable: Vec<f64> = per_dimension.iter().filter_map(MetricScore::value).collect();
    let overall = crate::math::mean(&applicable);
    HerdResult {
        per_dimension,
        overall,
    }
}

/// Metric ids of the seven HERD sub-scores.
pub fn herd_metric_ids() -> impl Iterator<Item = MetricId> {
    HerdDimension::ALL.into_iter().map(HerdDimension::metric_id)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::MetricStatus;
    use alloc::vec;

    fn resp(d: HerdDimension, p: Polarity, a: HerdAnswer) -> HerdResponse {
        HerdResponse {
            question: HerdQuestion {
                dimension: d,
                text: "Does it?".into(),
                polarity: p,
            },
            answer: a,
        }
    }

    #[test]
    fn worked_example() {
        use HerdAnswer::*;
        use Polarity::*;
        let d = HerdDimension::Themes;
        let rs = vec![
            resp(d, Positive, Yes),
            resp(d, Positive, Yes),
            resp(d, Positive, No),
            resp(d, Negative, No),
            resp(d, Negative, Yes),
            resp(d, Positive, Unclear),
        ];
        let r = herd_score(&rs);
        assert_eq!(r.overall, Some(0.6));
        let themes = &r.per_dimension[4];
        assert_eq!(themes.metric_id, MetricId::HerdThemes);
        assert_eq!(themes.diagnostics["valid"], "5");
        assert_eq!(
            r.per_dimension.iter().filter(|m| m.status == MetricStatus::NotApplicable).count(),
            6
        );
    }

    #[test]
    fn all_unclear_is_not_applicable() {
        let rs: Vec<HerdResponse> = HerdDimension::ALL
            .iter()
            .map(|&d| resp(d, Polarity::Positive, HerdAnswer::Unclear))
            .collect();
        assert_eq!(herd_score(&rs).overall, None);
    }

    #[test]
    fn flip_invariance() {
        let rs: Vec<HerdResponse> = HerdDimension::ALL
            .iter()
            .enumerate()
            .map(|(i, &d)| {
                let p = if i % 2 == 0 { Polarity::Positive } else { Polarity::Negative };
                let a = if i % 3 == 0 { HerdAnswer::Yes } else { HerdAnswer::No };
                resp(d, p, a)
            })
            .collect();
        let flipped: Vec<HerdResponse> = rs
            .iter()
            .map(|r| {
                let mut f = r.clone();
                f.question.polarity = f.question.polarity.flipped();
                f.answer = f.answer.flipped();
                f
            })
            .collect();
        assert_eq!(herd_score(&rs), herd_score(&flipped));
    }

    #[test]
    fn canonicalization() {
        assert_eq!(canonicalize_answer("Yes."), (HerdAnswer::Yes, false));
        assert_eq!(canonicalize_answer("  NO, it does not"), (HerdAnswer::No, false));
        assert_eq!(canonicalize_answer("Unclear"), (HerdAnswer::Unclear, false));
        assert_eq!(canonicalize_answer("maybe"), (HerdAnswer::Unclear, true));
        assert_eq!(canonicalize_answer(""), (HerdAnswer::Unclear, true));
        assert_eq!(canonicalize_answer("yesterday"), (HerdAnswer::Unclear, true));
    }
}
