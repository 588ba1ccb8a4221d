//! Small numeric helpers shared by the metric modules.

use alloc::vec::Vec;

pub fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

/// Population variance.
pub fn variance(values: &[f64]) -> Option<f64> {
    let m = mean(values)?;
    Some(values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / values.len() as f64)
}

pub fn clamp01(x: f64) -> f64 {
    if x.is_nan() {
        0.0
    } else {
        x.clamp(0.0, 1.0)
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

/// Cosine similarity; zero vectors have similarity 0 with everything.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let na = norm(a);
    let nb = norm(b);
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (dot(a, b) / (na * nb)).clamp(-1.0, 1.0)
}

/// Scales `v` to unit L2 norm. Zero vectors are returned unchanged.
pub fn unit(v: &[f64]) -> Vec<f64> {
    let n = norm(v);
    if n == 0.0 {
        v.to_vec()
    } else {
        v.iter().map(|x| x / n).collect()
    }
}

/// `ceil(x)` that ignores representation noise just above an integer,
/// e.g. `30.0 * 0.1 = 3.0000000000000004` rounds to 3.
pub fn ceil_tolerant(x: f64) -> f64 {
    let r = libm::round(x);
    if libm::fabs(x - r) < 1e-9 {
        r
    } else {
        libm::ceil(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cosine_of_parallel_and_orthogonal() {
        assert!((cosine(&[1.0, 2.0], &[2.0, 4.0]) - 1.0).abs() < 1e-12);
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 3.0]), 0.0);
        assert_eq!(cosine(&[0.0, 0.0], &[0.0, 3.0]), 0.0);
    }

    #[test]
    fn tolerant_ceiling() {
        assert_eq!(ceil_tolerant(30.0 * 0.1), 3.0);
        assert_eq!(ceil_tolerant(2.5), 3.0);
        assert_eq!(ceil_tolerant(0.2), 1.0);
    }

    #[test]
    fn population_variance() {
        assert!((variance(&[0.4, 0.1, 0.1, 0.4]).unwrap() - 0.0225).abs() < 1e-15);
    }
}
