//! Event-level text-video alignment: matched pairs, inversion penalty and
//! the per-pair semantic x field similarity product.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::matching::count_inversions;
use crate::math;
use crate::model::{MetricId, MetricScore};

/// Similarities of the four structured event fields.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldSims {
    pub subject: f64,
    pub setting: f64,
    pub action: f64,
    pub camera: f64,
}

impl FieldSims {
    pub fn uniform(v: f64) -> Self {
        FieldSims {
            subject: v,
            setting: v,
            action: v,
            camera: v,
        }
    }

    pub fn mean(&self) -> f64 {
        (self.subject + self.setting + self.action + self.camera) / 4.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchedPair {
    pub gen_index: usize,
    pub gt_index: usize,
    pub semantic_sim: f64,
    pub field_sims: FieldSims,
}

/// A matching with its order statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventMatching {
    pub pairs: Vec<MatchedPair>,
    pub inversions: u64,
    pub max_inversions: u64,
}

impl EventMatching {
    /// Sorts pairs by generated index and counts inversions of the matched
    /// ground-truth order.
    pub fn new(mut pairs: Vec<MatchedPair>) -> Self {
        pairs.sort_by_key(|p| p.gen_index);
        let order: Vec<usize> = pairs.iter().map(|p| p.gt_index).collect();
        let n = pairs.len() as u64;
        EventMatching {
            inversions: count_inversions(&order),
            max_inversions: n * n.saturating_sub(1) / 2,
            pairs,
        }
    }

    /// Mean of semantic x field-mean over pairs, before the order penalty.
    pub fn unpenalized(&self) -> f64 {
        if self.pairs.is_empty() {
            return 0.0;
        }
        self.pairs
            .iter()
            .map(|p| p.semantic_sim * p.field_sims.mean())
            .sum::<f64>()
            / self.pairs.len() as f64
    }

    /// `1 - I/I_max`, or 1 when fewer than two pairs exist.
    pub fn order_factor(&self) -> f64 {
        if self.max_inversions == 0 {
            1.0
        } else {
            1.0 - self.inversions as f64 / self.max_inversions as f64
        }
    }
}

/// Order-penalized event alignment score.
pub fn event_alignment_score(matching: &EventMatching) -> MetricScore {
    let n = matching.pairs.len();
    if n == 0 {
        return MetricScore::ok(MetricId::EventAlignment, 0.0, 0.0)
            .with_note("reason", "no events matched");
    }
    let score = matching.order_factor() * matching.unpenalized();
    MetricScore::ok(MetricId::EventAlignment, score, score)
        .with_note("matched_pairs", n)
        .with_note("inversions", matching.inversions)
        .with_note("max_inversions", matching.max_inversions)
}

/// Cosine similarity clamped to [0,1].
pub fn clamped_cosine(a: &[f64], b: &[f64]) -> f64 {
    math::clamp01(math::cosine(a, b))
}

/// Similarity of two field strings that can be decided without embeddings:
/// both empty is 1, exactly one empty is 0. `None` means both are nonempty.
pub fn field_similarity_rule(generated: &str, ground_truth: &str) -> Option<f64> {
    match (generated.trim().is_empty(), ground_truth.trim().is_empty()) {
        (true, true) => Some(1.0),
        (true, false) | (false, true) => Some(0.0),
        (false, false) => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn pair(g: usize, t: usize, sem: f64, field_mean: f64) -> MatchedPair {
        MatchedPair {
            gen_index: g,
            gt_index: t,
            semantic_sim: sem,
            field_sims: FieldSims::uniform(field_mean),
        }
    }

    #[test]
    fn single_perfect_pair() {
        let m = EventMatching::new(vec![pair(0, 0, 1.0, 1.0)]);
        assert_eq!(m.max_inversions, 0);
        assert_eq!(event_alignment_score(&m).value(), Some(1.0));
    }

    #[test]
    fn zero_field_similarity_annihilates() {
        let m = EventMatching::new(vec![pair(0, 0, 0.9, 0.0), pair(1, 1, 0.8, 0.0)]);
        assert_eq!(event_alignment_score(&m).value(), Some(0.0));
    }

    #[test]
    fn worked_example_with_one_inversion() {
        // gt order [0, 2, 1] has one inversion out of three.
        let m = EventMatching::new(vec![
            pair(0, 0, 0.8, 0.5),
            pair(1, 2, 0.6, 0.75),
            pair(2, 1, 0.9, 1.0),
        ]);
        assert_eq!((m.inversions, m.max_inversions), (1, 3));
        let expected = (2.0 / 3.0) * (0.4 + 0.45 + 0.9) / 3.0;
        let got = event_alignment_score(&m).value().unwrap();
        assert!((got - expected).abs() < 1e-12);
        assert!((got - 0.3889).abs() < 5e-5);
    }

    #[test]
    fn empty_matching_scores_zero_with_note() {
        let s = event_alignment_score(&EventMatching::new(Vec::new()));
        assert_eq!(s.value(), Some(0.0));
        assert_eq!(s.diagnostics.get("reason").map(|s| s.as_str()), Some("no events matched"));
    }

    #[test]
    fn empty_field_conventions() {
        assert_eq!(field_similarity_rule("", ""), Some(1.0));
        assert_eq!(field_similarity_rule("chef", ""), Some(0.0));
        assert_eq!(field_similarity_rule(" ", "dog"), Some(0.0));
        assert_eq!(field_similarity_rule("chef", "cook"), None);
    }

    #[test]
    fn field_sims_mean() {
        let f = FieldSims {
            subject: 1.0,
            setting: 0.5,
            action: 0.25,
            camera: 0.25,
        };
        assert_eq!(f.mean(), 0.5);
    }
}
