//! Aesthetic and technical quality arithmetic: the reference upper bound,
//! per-second frame sampling and clip segmentation.

use alloc::format;
use alloc::vec::Vec;
use core::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math;
use crate::model::{MetricId, MetricScore};

/// Relative reference upper bound for aesthetic scores: the mean of the top
/// fraction of a reference image set's scores.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rrub {
    pub value: f64,
    pub source_count: usize,
    pub top_fraction: f64,
}

pub const DEFAULT_TOP_FRACTION: f64 = 0.10;

pub fn compute_rr_ub(reference_scores: &[f64], top_fraction: f64) -> Result<Rrub> {
    if reference_scores.is_empty() {
        return Err(Error::Input("reference score list is empty".into()));
    }
    if !(top_fraction > 0.0 && top_fraction <= 1.0) {
        return Err(Error::Range {
            what: "top_fraction",
            value: top_fraction,
        });
    }
    let mut sorted = reference_scores.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let n = sorted.len();
    let take = (math::ceil_tolerant(n as f64 * top_fraction) as usize).clamp(1, n);
    let value = sorted[..take].iter().sum::<f64>() / take as f64;
    if !(value > 0.0) {
        return Err(Error::Range {
            what: "rr_ub value",
            value,
        });
    }
    Ok(Rrub {
        value,
        source_count: n,
        top_fraction,
    })
}

/// Frame indices nearest to t = 0, 1, 2, ... seconds.
pub fn per_second_frames(fps: f64, frame_count: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut t = 0usize;
    loop {
        let idx = libm::round(t as f64 * fps) as usize;
        if idx >= frame_count {
            break;
        }
        if out.last() != Some(&idx) {
            out.push(idx);
        }
        t += 1;
    }
    out
}

/// Mean of per-frame aesthetic scores divided by the upper bound, clamped.
pub fn aesthetic_score(frame_scores: &[f64], rr_ub: &Rrub) -> Result<MetricScore> {
    let mean = math::mean(frame_scores)
        .ok_or_else(|| Error::Input("no frames were scored".into()))?;
    if !(rr_ub.value > 0.0) {
        return Err(Error::Range {
            what: "rr_ub value",
            value: rr_ub.value,
        });
    }
    Ok(
        MetricScore::ok(MetricId::AestheticQuality, mean, mean / rr_ub.value)
            .with_note("sampled_frames", frame_scores.len())
            .with_note("rr_ub", rr_ub.value),
    )
}

/// Splits `frame_count` frames into the fewest contiguous, near-equal clips
/// such that every clip is shorter than `clip_max_s` whenever the video is
/// longer than that. Videos no longer than `clip_max_s` form one clip.
pub fn clip_partition(frame_count: usize, fps: f64, clip_max_s: f64) -> Vec<Range<usize>> {
    if frame_count == 0 {
        return Vec::new();
    }
    let duration = frame_count as f64 / fps;
    let mut k = 1usize;
    if duration > clip_max_s {
        k = (math::ceil_tolerant(duration / clip_max_s) as usize).max(1);
        // Longest clip has ceil(n/k) frames; it must stay strictly below the cap.
        while (frame_count.div_ceil(k)) as f64 / fps >= clip_max_s {
            k += 1;
        }
    }
    (0..k)
        .map(|i| (i * frame_count / k)..((i + 1) * frame_count / k))
        .collect()
}

/// Unweighted mean of clip scores mapped linearly from `range` to [0,1].
pub fn technical_score(clip_scores: &[f64], range: (f64, f64)) -> Result<MetricScore> {
    let (lo, hi) = range;
    if !(hi > lo) {
        return Err(Error::Input(format!("invalid provider range {lo}..{hi}")));
    }
    let mean = math::mean(clip_scores).ok_or_else(|| Error::Input("no clips were scored".into()))?;
    Ok(
        MetricScore::ok(MetricId::TechnicalQuality, mean, (mean - lo) / (hi - lo))
            .with_note("clips", clip_scores.len()),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn rr_ub_examples() {
        assert_eq!(compute_rr_ub(&[7.5; 12], 0.1).unwrap().value, 7.5);
        let ten: Vec<f64> = (1..=10).map(|x| x as f64).collect();
        assert_eq!(compute_rr_ub(&ten, 0.1).unwrap().value, 10.0);
        let twenty: Vec<f64> = (1..=20).map(|x| x as f64).collect();
        assert_eq!(compute_rr_ub(&twenty, 0.1).unwrap().value, 19.5);
        // 30 * 0.1 must take three values, not four.
        let thirty: Vec<f64> = (1..=30).map(|x| x as f64).collect();
        assert_eq!(compute_rr_ub(&thirty, 0.1).unwrap().value, 29.0);
        assert!(compute_rr_ub(&[], 0.1).is_err());
        assert!(compute_rr_ub(&[1.0], 0.0).is_err());
        assert!(compute_rr_ub(&[1.0], 1.5).is_err());
    }

    #[test]
    fn aesthetic_examples() {
        let rr = Rrub {
            value: 8.0,
            source_count: 10,
            top_fraction: 0.1,
        };
        assert_eq!(aesthetic_score(&[8.0, 8.0], &rr).unwrap().value(), Some(1.0));
        assert_eq!(aesthetic_score(&[4.0, 6.0, 8.0], &rr).unwrap().value(), Some(0.75));
        assert_eq!(aesthetic_score(&[9.0], &rr).unwrap().value(), Some(1.0));
        assert!(aesthetic_score(&[], &rr).is_err());
    }

    #[test]
    fn per_second_sampling_is_zero_anchored() {
        assert_eq!(per_second_frames(24.0, 72), vec![0, 24, 48]);
        assert_eq!(per_second_frames(24.0, 73), vec![0, 24, 48, 72]);
        assert_eq!(per_second_frames(29.97, 61), vec![0, 30, 60]);
        assert_eq!(per_second_frames(8.0, 1), vec![0]);
    }

    #[test]
    fn thirty_five_second_video_gives_four_clips() {
        let clips = clip_partition(35 * 24, 24.0, 10.0);
        assert_eq!(clips.len(), 4);
        for c in &clips {
            assert_eq!(c.len() as f64 / 24.0, 8.75);
        }
    }

    #[test]
    fn short_video_is_one_clip() {
        assert_eq!(clip_partition(8 * 24, 24.0, 10.0), vec![0..192]);
        assert_eq!(clip_partition(240, 24.0, 10.0), vec![0..240]);
    }

    #[test]
    fn exact_multiple_still_below_cap() {
        let clips = clip_partition(20 * 24, 24.0, 10.0);
        assert_eq!(clips.len(), 3);
        assert!(clips.iter().all(|c| (c.len() as f64 / 24.0) < 10.0));
    }

    #[test]
    fn technical_mapping() {
        let s = technical_score(&[0.6, 0.6, 0.6], (0.0, 1.0)).unwrap();
        assert!((s.value().unwrap() - 0.6).abs() < 1e-12);
        let s = technical_score(&[50.0, 70.0], (0.0, 100.0)).unwrap();
        assert!((s.value().unwrap() - 0.6).abs() < 1e-12);
        assert!(technical_score(&[1.0], (1.0, 1.0)).is_err());
    }
}
