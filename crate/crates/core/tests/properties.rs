use locot2v_core::aggregate::{correlate, summarize};
use locot2v_core::alignment::{event_alignment_score, EventMatching, FieldSims, MatchedPair};
use locot2v_core::clarity::{clarity_score, ClarityTrial};
use locot2v_core::herd::{herd_score, HerdAnswer, HerdResponse};
use locot2v_core::matching::{count_inversions, match_events, matching_weight};
use locot2v_core::static_quality::{clip_partition, compute_rr_ub};
use locot2v_core::temporal::abruptness;
use locot2v_core::{
    HerdDimension, HerdQuestion, MetricId, MetricScore, Polarity, ScoreReport, SimilarityMatrix,
};
use proptest::prelude::*;

fn brute_best(m: &SimilarityMatrix) -> f64 {
    fn rec(m: &SimilarityMatrix, row: usize, used: &mut Vec<bool>, left: usize) -> f64 {
        if left == 0 {
            return 0.0;
        }
        if row == m.rows() {
            return f64::NEG_INFINITY;
        }
        let mut best = rec(m, row + 1, used, left);
        for c in 0..m.cols() {
            if !used[c] {
                used[c] = true;
                best = best.max(m.get(row, c) + rec(m, row + 1, used, left - 1));
                used[c] = false;
            }
        }
        best
    }
    let k = m.rows().min(m.cols());
    if k == 0 {
        0.0
    } else {
        rec(m, 0, &mut vec![false; m.cols()], k)
    }
}

fn matrix() -> impl Strategy<Value = SimilarityMatrix> {
    (1usize..6, 1usize..6).prop_flat_map(|(r, c)| {
        prop::collection::vec(0.0f64..1.0, r * c)
            .prop_map(move |v| SimilarityMatrix::new(r, c, v).unwrap())
    })
}

fn herd_responses() -> impl Strategy<Value = Vec<HerdResponse>> {
    prop::collection::vec((0usize..7, any::<bool>(), 0u8..3), 1..30).prop_map(|v| {
        v.into_iter()
            .map(|(d, pos, a)| HerdResponse {
                question: HerdQuestion {
                    dimension: HerdDimension::ALL[d],
                    text: "Is it?".into(),
                    polarity: if pos { Polarity::Positive } else { Polarity::Negative },
                },
                answer: [HerdAnswer::Yes, HerdAnswer::No, HerdAnswer::Unclear][a as usize],
            })
            .collect()
    })
}

proptest! {
    #[test]
    fn matching_is_optimal_and_injective(m in matrix()) {
        let pairs = match_events(&m);
        prop_assert_eq!(pairs.len(), m.rows().min(m.cols()));
        prop_assert!((matching_weight(&m, &pairs) - brute_best(&m)).abs() < 1e-9);
        let mut rows: Vec<usize> = pairs.iter().map(|p| p.0).collect();
        let mut cols: Vec<usize> = pairs.iter().map(|p| p.1).collect();
        rows.dedup();
        cols.sort_unstable();
        cols.dedup();
        prop_assert_eq!(rows.len(), pairs.len());
        prop_assert_eq!(cols.len(), pairs.len());
    }

    #[test]
    fn inversions_bounded(v in prop::collection::vec(0usize..20, 0..40)) {
        let n = v.len() as u64;
        let i = count_inversions(&v);
        prop_assert!(i <= n * n.saturating_sub(1) / 2);
        let mut sorted = v.clone();
        sorted.sort_unstable();
        prop_assert_eq!(count_inversions(&sorted), 0);
    }

    #[test]
    fn event_alignment_in_unit_interval(
        items in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 0..8),
        perm_seed in any::<u64>(),
    ) {
        let n = items.len();
        let mut order: Vec<usize> = (0..n).collect();
        let mut s = perm_seed | 1;
        for i in (1..n).rev() {
            s ^= s << 13; s ^= s >> 7; s ^= s << 17;
            order.swap(i, (s % (i as u64 + 1)) as usize);
        }
        let pairs: Vec<MatchedPair> = items.iter().enumerate().map(|(g, &(sem, f))| MatchedPair {
            gen_index: g,
            gt_index: order[g],
            semantic_sim: sem,
            field_sims: FieldSims::uniform(f),
        }).collect();
        let m = EventMatching::new(pairs.clone());
        let score = event_alignment_score(&m).value().unwrap();
        prop_assert!((0.0..=1.0).contains(&score));
        // Restoring ground-truth order never lowers the score.
        let sorted: Vec<MatchedPair> = pairs.into_iter().map(|mut p| { p.gt_index = p.gen_index; p }).collect();
        let best = event_alignment_score(&EventMatching::new(sorted)).value().unwrap();
        prop_assert!(best + 1e-12 >= score);
    }

    #[test]
    fn rr_ub_permutation_invariant(mut v in prop::collection::vec(0.1f64..10.0, 1..60), frac in 0.01f64..1.0) {
        let a = compute_rr_ub(&v, frac).unwrap().value;
        v.reverse();
        let b = compute_rr_ub(&v, frac).unwrap().value;
        prop_assert_eq!(a, b);
        let max = v.iter().cloned().fold(f64::MIN, f64::max);
        prop_assert!(a <= max + 1e-12);
    }

    #[test]
    fn clips_cover_and_stay_short(frames in 1usize..4000, fps in prop::sample::select(vec![8.0, 16.0, 24.0, 30.0])) {
        let clips = clip_partition(frames, fps, 10.0);
        prop_assert_eq!(clips.first().unwrap().start, 0);
        prop_assert_eq!(clips.last().unwrap().end, frames);
        for w in clips.windows(2) {
            prop_assert_eq!(w[0].end, w[1].start);
        }
        if frames as f64 / fps > 10.0 {
            prop_assert!(clips.iter().all(|c| (c.len() as f64 / fps) < 10.0));
        }
    }

    #[test]
    fn abruptness_monotone_in_variance(seq in prop::collection::vec(0.01f64..1.0, 2..20)) {
        let (var, a, s) = abruptness(&seq, 1e4, 1.0).unwrap();
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!((a + s - 1.0).abs() < 1e-12);
        let flat = vec![seq.iter().sum::<f64>() / seq.len() as f64; seq.len()];
        let (var0, a0, _) = abruptness(&flat, 1e4, 1.0).unwrap();
        prop_assert!(var0 <= var + 1e-15);
        prop_assert!(a0 <= a + 1e-12);
    }

    #[test]
    fn clarity_trial_order_invariant(scores in prop::collection::vec(prop::array::uniform4(0u8..5), 1..6)) {
        let trials: Vec<ClarityTrial> = scores.iter().enumerate().map(|(i, s)| ClarityTrial::from_scores(i, *s)).collect();
        let mut rev = trials.clone();
        rev.reverse();
        let a = clarity_score(&trials).unwrap();
        let b = clarity_score(&rev).unwrap();
        prop_assert!((a.overall - b.overall).abs() < 1e-12);
        let mean_d: f64 = a.per_dimension.iter().map(|m| m.value().unwrap()).sum::<f64>() / 4.0;
        prop_assert!((a.overall - mean_d).abs() < 1e-9);
    }

    #[test]
    fn herd_flip_invariant(rs in herd_responses()) {
        let flipped: Vec<HerdResponse> = rs.iter().map(|r| {
            let mut f = r.clone();
            f.question.polarity = f.question.polarity.flipped();
            f.answer = f.answer.flipped();
            f
        }).collect();
        prop_assert_eq!(herd_score(&rs), herd_score(&flipped));
    }

    #[test]
    fn summary_permutation_invariant(vals in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 1..10)) {
        let reports: Vec<ScoreReport> = vals.iter().enumerate().map(|(i, &(a, t))| {
            ScoreReport::from_metrics(&format!("s{i}"), [
                MetricScore::ok(MetricId::AestheticQuality, a, a),
                MetricScore::ok(MetricId::TechnicalQuality, t, t),
            ])
        }).collect();
        let a = summarize(&reports);
        let b = summarize(reports.iter().rev());
        for (k, v) in &a.dimension_means {
            prop_assert!((v - b.dimension_means[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn correlation_symmetric(pts in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 3..25)) {
        let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
        let a = correlate(&x, &y).unwrap();
        let b = correlate(&y, &x).unwrap();
        let close = |p: Option<f64>, q: Option<f64>| match (p, q) {
            (Some(p), Some(q)) => (p - q).abs() < 1e-12 && (-1.0..=1.0).contains(&p),
            (None, None) => true,
            _ => false,
        };
        prop_assert!(close(a.pearson, b.pearson));
        prop_assert!(close(a.spearman, b.spearman));
        prop_assert!(close(a.kendall, b.kendall));
        if let Some(s) = correlate(&x, &x).unwrap().pearson {
            prop_assert!((s - 1.0).abs() < 1e-12);
        }
    }
}
