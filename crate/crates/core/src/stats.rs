//! Binomial intervals and a chi-square homogeneity test for Monte Carlo
//! results.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// z for a two-sided 95% interval.
pub const Z_95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub low: f64,
    pub high: f64,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        self.low <= x && x <= self.high
    }
}

/// Wilson score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> Interval {
    if trials == 0 {
        return Interval { low: 0.0, high: 1.0 };
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    Interval { low: (centre - half).max(0.0), high: (centre + half).min(1.0) }
}

/// Standard deviation of a sample proportion with true rate `p`.
pub fn binomial_sd(p: f64, trials: u64) -> f64 {
    (p * (1.0 - p) / trials as f64).sqrt()
}

/// True when `observed` lies within `k` standard deviations of `expected`.
pub fn within_sd(observed: f64, expected: f64, trials: u64, k: f64) -> bool {
    (observed - expected).abs() <= k * binomial_sd(expected, trials)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub degrees_of_freedom: usize,
    pub p_value: f64,
}

/// Pearson chi-square test that every row of `table` is drawn from the same
/// categorical distribution.
///
/// Columns whose total is below `5 * rows` are pooled into a single column so
/// that expected cell counts stay usable; empty columns are dropped.
pub fn chi_square_homogeneity(table: &[Vec<u64>]) -> ChiSquareResult {
    let rows = table.len();
    let cols = table.iter().map(Vec::len).max().unwrap_or(0);
    let cell = |r: usize, c: usize| table[r].get(c).copied().unwrap_or(0);
    let col_total = |c: usize| (0..rows).map(|r| cell(r, c)).sum::<u64>();

    let threshold = 5 * rows as u64;
    let mut kept: Vec<Vec<u64>> = vec![Vec::new(); rows];
    let mut pooled = vec![0u64; rows];
    for c in 0..cols {
        let total = col_total(c);
        if total == 0 {
            continue;
        }
        if total < threshold {
            (0..rows).for_each(|r| pooled[r] += cell(r, c));
        } else {
            (0..rows).for_each(|r| kept[r].push(cell(r, c)));
        }
    }
    if pooled.iter().any(|&x| x > 0) {
        (0..rows).for_each(|r| kept[r].push(pooled[r]));
    }

    let k = kept.first().map_or(0, Vec::len);
    if rows < 2 || k < 2 {
        return ChiSquareResult { statistic: 0.0, degrees_of_freedom: 0, p_value: 1.0 };
    }
    let row_totals: Vec<f64> = kept.iter().map(|r| r.iter().sum::<u64>() as f64).collect();
    let col_totals: Vec<f64> = (0..k).map(|c| kept.iter().map(|r| r[c]).sum::<u64>() as f64).collect();
    let grand: f64 = row_totals.iter().sum();
    let mut statistic = 0.0;
    for r in 0..rows {
        for c in 0..k {
            let expected = row_totals[r] * col_totals[c] / grand;
            if expected > 0.0 {
                let d = kept[r][c] as f64 - expected;
                statistic += d * d / expected;
            }
        }
    }
    let dof = (rows - 1) * (k - 1);
    let dist = ChiSquared::new(dof as f64).expect("positive degrees of freedom");
    ChiSquareResult { statistic, degrees_of_freedom: dof, p_value: dist.sf(statistic) }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_contains_estimate() {
        let i = wilson_interval(250, 1000, Z_95);
        assert!(i.contains(0.25));
        assert!((i.low - 0.2241).abs() < 1e-3 && (i.high - 0.2777).abs() < 1e-3, "{i:?}");
        let all = wilson_interval(1000, 1000, Z_95);
        assert_eq!(all.high, 1.0);
        assert!(all.low > 0.99);
        assert_eq!(wilson_interval(0, 0, Z_95), Interval { low: 0.0, high: 1.0 });
    }

    #[test]
    fn sd_window() {
        assert!((binomial_sd(0.25, 100_000) - 0.001_369).abs() < 1e-6);
        assert!(within_sd(0.2541, 0.25, 100_000, 3.0));
        assert!(!within_sd(0.2542, 0.25, 100_000, 3.0));
    }

    #[test]
    fn identical_rows_are_homogeneous() {
        let r = chi_square_homogeneity(&[vec![100, 200, 300], vec![100, 200, 300]]);
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.degrees_of_freedom, 2);
        assert!((r.p_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn skewed_rows_are_rejected() {
        let r = chi_square_homogeneity(&[vec![900, 100], vec![100, 900]]);
        assert!(r.p_value < 1e-10);
        // 2x2 table: statistic = N (ad - bc)^2 / (row and column totals)
        let expected = 2000.0 * (900.0f64 * 900.0 - 100.0 * 100.0).powi(2) / (1000.0f64.powi(4));
        assert!((r.statistic - expected).abs() < 1e-6);
    }

    #[test]
    fn sparse_columns_are_pooled() {
        let r = chi_square_homogeneity(&[vec![500, 500, 1, 0], vec![500, 500, 0, 2]]);
        assert_eq!(r.degrees_of_freedom, 2);
        let r = chi_square_homogeneity(&[vec![10, 0], vec![10, 0]]);
        assert_eq!(r.degrees_of_freedom, 0);
        assert_eq!(r.p_value, 1.0);
    }
}
