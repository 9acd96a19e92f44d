//! Small numeric helpers shared by the profiler, the quality detectors, and
//! the remediation steps. Everything operates on plain `f64` slices so the
//! same code backs quartile fences, histograms, and summary statistics.

/// Type-7 quantile (linear interpolation at `h = (n - 1) p + 1` on the
/// 1-indexed sorted sample). This is the default used by most statistical
/// tooling and is what makes the IQR outlier fences reproducible.
///
/// `sorted` must be ascending and non-empty; `p` in `[0, 1]`.
pub fn quantile_type7(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty sample");
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    let frac = h - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// Arithmetic mean. Returns `None` on an empty slice.
pub fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    Some(values.iter().sum::<f64>() / values.len() as f64)
}

/// Population standard deviation (divide by `n`, not `n - 1`): the reports
/// describe the dataset itself, not an estimate of a larger population.
pub fn population_std_dev(values: &[f64]) -> Option<f64> {
    let m = mean(values)?;
    let var = values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / values.len() as f64;
    Some(var.sqrt())
}

/// Lower and upper Tukey fences `[Q1 - m*IQR, Q3 + m*IQR]` from a sorted
/// sample, using type-7 quartiles.
pub fn iqr_fences(sorted: &[f64], multiplier: f64) -> (f64, f64) {
    let q1 = quantile_type7(sorted, 0.25);
    let q3 = quantile_type7(sorted, 0.75);
    let iqr = q3 - q1;
    (q1 - multiplier * iqr, q3 + multiplier * iqr)
}

/// Shannon entropy (base 2) of class counts, normalized by `log2(C)` so a
/// perfectly balanced distribution scores 1.0. A single class scores 0.0.
pub fn normalized_entropy(counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    let classes = counts.iter().filter(|&&c| c > 0).count();
    if total == 0 || classes <= 1 {
        return 0.0;
    }
    let n = total as f64;
    let h: f64 = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum();
    h / (classes as f64).log2()
}

#[cfg(test)]
mod tests {
    use super::*;

    // Hand-worked type-7 values on {1..9, 100}, n = 10:
    //   Q1: h = 9 * 0.25 = 2.25 (0-indexed) -> x[2] + 0.25 * (x[3] - x[2]) = 3.25
    //   median: h = 4.5 -> 5.5
    //   Q3: h = 6.75 -> 7.75
    #[test]
    fn type7_quartiles_on_skewed_sample() {
        let x: Vec<f64> = (1..=9).map(f64::from).chain([100.0]).collect();
        assert_eq!(quantile_type7(&x, 0.25), 3.25);
        assert_eq!(quantile_type7(&x, 0.5), 5.5);
        assert_eq!(quantile_type7(&x, 0.75), 7.75);
    }

    #[test]
    fn type7_extremes_and_singleton() {
        let x = [2.0, 4.0, 9.0];
        assert_eq!(quantile_type7(&x, 0.0), 2.0);
        assert_eq!(quantile_type7(&x, 1.0), 9.0);
        assert_eq!(quantile_type7(&[7.0], 0.5), 7.0);
    }

    #[test]
    fn fences_match_hand_arithmetic() {
        // Q1 = 3.25, Q3 = 7.75, IQR = 4.5, m = 1.5 -> [-3.5, 14.5]
        let x: Vec<f64> = (1..=9).map(f64::from).chain([100.0]).collect();
        let (lo, hi) = iqr_fences(&x, 1.5);
        assert_eq!(lo, -3.5);
        assert_eq!(hi, 14.5);
    }

    #[test]
    fn population_std_dev_of_constant_is_zero() {
        assert_eq!(population_std_dev(&[5.0, 5.0, 5.0]), Some(0.0));
        assert_eq!(mean(&[5.0, 5.0, 5.0]), Some(5.0));
    }

    #[test]
    fn entropy_frozen_values() {
        // Hand-computed: -(0.9 log2 0.9 + 0.1 log2 0.1) = 0.4689955935892812
        let h = normalized_entropy(&[90, 10]);
        assert!((h - 0.468_995_593_589_281_2).abs() < 1e-12);
        assert_eq!(normalized_entropy(&[50, 50]), 1.0);
        assert_eq!(normalized_entropy(&[7]), 0.0);
        assert_eq!(normalized_entropy(&[]), 0.0);
    }
}
