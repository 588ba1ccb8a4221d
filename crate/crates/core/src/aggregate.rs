//! Roll-ups over metrics and samples, category grouping, and correlation.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math;
use crate::model::{
    dimension_averages, overall_from_dimensions, Category, Dimension, MetricId, MetricScore,
    PromptRecord, ScoreReport,
};

/// Unweighted mean of the ok scores; `None` when there are none.
pub fn aggregate_dimension(sub_scores: &[MetricScore]) -> Option<f64> {
    let vals: Vec<f64> = sub_scores.iter().filter_map(MetricScore::value).collect();
    math::mean(&vals)
}

/// Mean of the five dimension averages, or the list of missing dimensions.
pub fn aggregate_overall(
    dimension_averages: &BTreeMap<Dimension, f64>,
) -> core::result::Result<f64, Vec<Dimension>> {
    let missing: Vec<Dimension> = Dimension::ALL
        .into_iter()
        .filter(|d| !dimension_averages.contains_key(d))
        .collect();
    if !missing.is_empty() {
        return Err(missing);
    }
    Ok(Dimension::ALL.iter().map(|d| dimension_averages[d]).sum::<f64>() / 5.0)
}

/// Method-level summary: each metric averaged over samples, dimensions
/// averaged over those metric means, overall over the five dimensions.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Summary {
    pub metric_means: BTreeMap<MetricId, f64>,
    pub dimension_means: BTreeMap<Dimension, f64>,
    pub overall_mean: Option<f64>,
    pub samples: usize,
}

pub fn summarize<'a>(reports: impl IntoIterator<Item = &'a ScoreReport>) -> Summary {
    let mut sums: BTreeMap<MetricId, (f64, usize)> = BTreeMap::new();
    let mut samples = 0;
    for r in reports {
        samples += 1;
        for (id, m) in &r.metrics {
            if let Some(v) = m.value() {
                let e = sums.entry(*id).or_insert((0.0, 0));
                e.0 += v;
                e.1 += 1;
            }
        }
    }
    let metric_means: BTreeMap<MetricId, f64> = sums
        .into_iter()
        .map(|(id, (s, n))| (id, s / n as f64))
        .collect();
    let as_scores: BTreeMap<MetricId, MetricScore> = metric_means
        .iter()
        .map(|(&id, &v)| (id, MetricScore::ok(id, v, v)))
        .collect();
    let dimension_means = dimension_averages(&as_scores);
    let overall_mean = overall_from_dimensions(&dimension_means);
    Summary {
        metric_means,
        dimension_means,
        overall_mean,
        samples,
    }
}

/// Per-category summaries. With `theme_map`, categories come from it and an
/// unmapped theme is an error; otherwise each record's own category is used.
/// Reports without a record are an input error. Empty categories are absent.
pub fn group_by_category(
    reports: &[ScoreReport],
    records: &[PromptRecord],
    theme_map: Option<&BTreeMap<String, Category>>,
) -> Result<BTreeMap<Category, Summary>> {
    let by_id: BTreeMap<&str, &PromptRecord> =
        records.iter().map(|r| (r.id.as_str(), r)).collect();
    let mut groups: BTreeMap<Category, Vec<&ScoreReport>> = BTreeMap::new();
    for rep in reports {
        let rec = by_id
            .get(rep.sample_id.as_str())
            .ok_or_else(|| Error::Input(format!("no prompt record for sample {}", rep.sample_id)))?;
        let cat = match theme_map {
            Some(map) => *map.get(&rec.theme).ok_or_else(|| Error::Grouping {
                theme: rec.theme.clone(),
            })?,
            None => rec.category,
        };
        groups.entry(cat).or_default().push(rep);
    }
    Ok(groups
        .into_iter()
        .map(|(c, reps)| (c, summarize(reps)))
        .collect())
}

/// Correlation coefficients; `None` where a series has zero variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub pearson: Option<f64>,
    pub spearman: Option<f64>,
    pub kendall: Option<f64>,
    pub n: usize,
}

fn check_series(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::Input(format!(
            "series lengths differ: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    if a.len() < 3 {
        return Err(Error::Input(format!("need at least 3 points, got {}", a.len())));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::Input("series contain non-finite values".into()));
    }
    Ok(())
}

pub fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let ma = math::mean(a)?;
    let mb = math::mean(b)?;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return None;
    }
    Some((sab / libm::sqrt(saa * sbb)).clamp(-1.0, 1.0))
}

/// 1-based ranks with ties sharing their average rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = alloc::vec![0.0; values.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

pub fn spearman(a: &[f64], b: &[f64]) -> Option<f64> {
    pearson(&average_ranks(a), &average_ranks(b))
}

/// Kendall tau-b.
pub fn kendall_tau_b(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len();
    let (mut conc, mut disc, mut tie_a, mut tie_b) = (0i64, 0i64, 0i64, 0i64);
    for i in 0..n {
        for j in i + 1..n {
            let da = a[i] - a[j];
            let db = b[i] - b[j];
            if da == 0.0 && db == 0.0 {
                continue;
            } else if da == 0.0 {
                tie_a += 1;
            } else if db == 0.0 {
                tie_b += 1;
            } else if (da > 0.0) == (db > 0.0) {
                conc += 1;
            } else {
                disc += 1;
            }
        }
    }
    let n1 = (conc + disc + tie_a) as f64;
    let n2 = (conc + disc + tie_b) as f64;
    if n1 == 0.0 || n2 == 0.0 {
        return None;
    }
    Some((((conc - disc) as f64) / libm::sqrt(n1 * n2)).clamp(-1.0, 1.0))
}

pub fn correlate(a: &[f64], b: &[f64]) -> Result<Correlation> {
    check_series(a, b)?;
    Ok(Correlation {
        pearson: pearson(a, b),
        spearman: spearman(a, b),
        kendall: kendall_tau_b(a, b),
        n: a.len(),
    })
}

/// Ordinary least squares line `y = slope·x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Line {
    pub slope: f64,
    pub intercept: f64,
}

pub fn ols(x: &[f64], y: &[f64]) -> Option<Line> {
    if x.len() != y.len() {
        return None;
    }
    let mx = math::mean(x)?;
    let my = math::mean(y)?;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
    }
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some(Line {
        slope,
        intercept: my - slope * mx,
    })
}
