//! Augmented Dickey–Fuller unit-root test.
//!
//! Critical values and p-values come from the Dickey–Fuller distribution
//! quantiles tabulated for sample sizes 25, 50, 100, 250, 500 and ∞, with
//! linear interpolation in `1/n` between rows and in the statistic between
//! quantiles. Results are approximate to about two significant figures.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::least_squares;
use crate::stats::{normal_cdf, normal_quantile};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdfRegression {
    /// Intercept only.
    Constant,
    /// Intercept and linear time trend.
    ConstantTrend,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalValues {
    pub one: f64,
    pub five: f64,
    pub ten: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdfResult {
    /// t-ratio of the lagged-level coefficient.
    pub statistic: f64,
    pub p_value: f64,
    pub critical: CriticalValues,
    pub lags_used: usize,
    pub regression_kind: AdfRegression,
    /// Observations in the final regression.
    pub n_obs: usize,
}

impl AdfResult {
    /// Unit root rejected at the 1% level with `p < 0.05`.
    pub fn strongly_stationary(&self) -> bool {
        self.statistic < self.critical.one && self.p_value < 0.05
    }
}

const SIZES: [f64; 6] = [25.0, 50.0, 100.0, 250.0, 500.0, f64::INFINITY];
const PROBS: [f64; 8] = [0.01, 0.025, 0.05, 0.10, 0.90, 0.95, 0.975, 0.99];

#[allow(clippy::approx_constant)] // -3.14 is a tabulated quantile
const TABLE_CONSTANT: [[f64; 8]; 6] = [
    [-3.75, -3.33, -3.00, -2.63, -0.37, 0.00, 0.34, 0.72],
    [-3.58, -3.22, -2.93, -2.60, -0.40, -0.03, 0.29, 0.66],
    [-3.51, -3.17, -2.89, -2.58, -0.42, -0.05, 0.26, 0.63],
    [-3.46, -3.14, -2.88, -2.57, -0.42, -0.06, 0.24, 0.62],
    [-3.44, -3.13, -2.87, -2.57, -0.43, -0.07, 0.24, 0.61],
    [-3.43, -3.12, -2.86, -2.57, -0.44, -0.07, 0.23, 0.60],
];

const TABLE_TREND: [[f64; 8]; 6] = [
    [-4.38, -3.95, -3.60, -3.24, -1.14, -0.80, -0.50, -0.15],
    [-4.15, -3.80, -3.50, -3.18, -1.19, -0.87, -0.58, -0.24],
    [-4.04, -3.73, -3.45, -3.15, -1.22, -0.90, -0.62, -0.28],
    [-3.99, -3.69, -3.43, -3.13, -1.23, -0.92, -0.64, -0.31],
    [-3.98, -3.68, -3.42, -3.13, -1.24, -0.93, -0.65, -0.32],
    [-3.96, -3.66, -3.41, -3.12, -1.25, -0.94, -0.66, -0.33],
];

/// Quantiles of the Dickey–Fuller t distribution at sample size `n`
/// (rows below 25 use the 25 row).
fn quantiles(kind: AdfRegression, n: usize) -> [f64; 8] {
    let table = match kind {
        AdfRegression::Constant => &TABLE_CONSTANT,
        AdfRegression::ConstantTrend => &TABLE_TREND,
    };
    let inv = 1.0 / (n as f64).max(SIZES[0]);
    let inv_sizes: Vec<f64> = SIZES.iter().map(|s| 1.0 / s).collect();
    // inv_sizes is decreasing: 0.04 ... 0.0
    let row = (0..5)
        .find(|&i| inv <= inv_sizes[i] && inv >= inv_sizes[i + 1])
        .unwrap_or(4);
    let (a, b) = (inv_sizes[row], inv_sizes[row + 1]);
    let w = if a == b { 0.0 } else { (a - inv) / (a - b) };
    let mut out = [0.0; 8];
    for (j, slot) in out.iter_mut().enumerate() {
        *slot = table[row][j] + w * (table[row + 1][j] - table[row][j]);
    }
    out
}

fn critical_values(kind: AdfRegression, n: usize) -> CriticalValues {
    let q = quantiles(kind, n);
    CriticalValues {
        one: q[0],
        five: q[2],
        ten: q[3],
    }
}

/// Linear interpolation inside the table; beyond it, extrapolation in
/// probit space from the two outermost quantiles so the p-value stays in (0, 1).
fn p_value(kind: AdfRegression, n: usize, stat: f64) -> f64 {
    let q = quantiles(kind, n);
    let last = q.len() - 1;
    let tail = |i: usize, j: usize| {
        let (zi, zj) = (normal_quantile(PROBS[i]), normal_quantile(PROBS[j]));
        let slope = (zj - zi) / (q[j] - q[i]);
        normal_cdf(zi + slope * (stat - q[i]))
    };
    if stat <= q[0] {
        return tail(0, 1);
    }
    if stat >= q[last] {
        return tail(last - 1, last);
    }
    let i = (0..last).find(|&i| stat <= q[i + 1]).expect("inside table");
    PROBS[i] + (stat - q[i]) / (q[i + 1] - q[i]) * (PROBS[i + 1] - PROBS[i])
}

/// `⌊12 (n/100)^{1/4}⌋`.
pub fn default_adf_max_lag(n: usize) -> usize {
    (12.0 * (n as f64 / 100.0).powf(0.25)).floor() as usize
}

struct LagFit {
    aic: f64,
    statistic: f64,
    nobs: usize,
}

/// Regresses `Δy_t` on the deterministic terms, `y_{t-1}` and `lags` lagged
/// differences, over `t` such that the first used difference index is `first`.
fn fit_lag(y: &[f64], dy: &[f64], kind: AdfRegression, lags: usize, first: usize) -> Result<LagFit> {
    let rows: Vec<usize> = (first..dy.len()).collect();
    let nobs = rows.len();
    let deterministic = match kind {
        AdfRegression::Constant => 1,
        AdfRegression::ConstantTrend => 2,
    };
    let k = deterministic + 1 + lags;
    let level_col = deterministic;
    let x = DMatrix::from_fn(nobs, k, |r, c| {
        let t = rows[r];
        match c {
            0 => 1.0,
            1 if deterministic == 2 => (t + 1) as f64,
            c if c == level_col => y[t],
            c => dy[t - (c - level_col)],
        }
    });
    let target: Vec<f64> = rows.iter().map(|&t| dy[t]).collect();
    let ls = least_squares(&x, &target).map_err(|cols| {
        Error::RankDeficient {
            columns: cols
                .into_iter()
                .map(|c| match c {
                    0 => "const".to_string(),
                    1 if deterministic == 2 => "trend".to_string(),
                    c if c == level_col => "lagged level".to_string(),
                    c => format!("lagged difference {}", c - level_col),
                })
                .collect(),
        }
    })?;
    let dof = nobs as f64 - k as f64;
    let sigma2 = ls.sse / dof;
    let se = (sigma2 * ls.unscaled_cov[(level_col, level_col)]).sqrt();
    let statistic = ls.coefficients[level_col] / se;
    let aic = nobs as f64 * (ls.sse / nobs as f64).ln() + 2.0 * k as f64;
    Ok(LagFit {
        aic,
        statistic,
        nobs,
    })
}

/// ADF test with augmentation order chosen by AIC over `0..=max_lag` on a
/// common sample, then re-estimated on all usable observations.
pub fn adf_test(values: &[f64], kind: AdfRegression, max_lag: Option<usize>) -> Result<AdfResult> {
    let n = values.len();
    let max_lag = max_lag.unwrap_or_else(|| default_adf_max_lag(n));
    if n < 20 + max_lag {
        return Err(Error::TooShort {
            needed: 20 + max_lag,
            got: n,
        });
    }
    let first = values[0];
    if values.iter().all(|&v| v == first) {
        return Err(Error::ConstantSeries);
    }
    let dy: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    let y = &values[..n - 1];

    let candidates: Vec<Result<LagFit>> = (0..=max_lag)
        .into_par_iter()
        .map(|lags| fit_lag(y, &dy, kind, lags, max_lag))
        .collect();
    let mut best: Option<(usize, f64)> = None;
    for (lags, fit) in candidates.into_iter().enumerate() {
        let fit = fit?;
        if best.is_none_or(|(_, aic)| fit.aic < aic) {
            best = Some((lags, fit.aic));
        }
    }
    let (lags_used, _) = best.expect("at least lag 0 was evaluated");
    let fit = fit_lag(y, &dy, kind, lags_used, lags_used)?;
    if !fit.statistic.is_finite() {
        return Err(Error::Degenerate(
            "lagged-level coefficient has zero standard error".into(),
        ));
    }
    Ok(AdfResult {
        statistic: fit.statistic,
        p_value: p_value(kind, fit.nobs, fit.statistic),
        critical: critical_values(kind, fit.nobs),
        lags_used,
        regression_kind: kind,
        n_obs: fit.nobs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate;

    #[test]
    fn critical_values_ordered_and_interpolated() {
        for kind in [AdfRegression::Constant, AdfRegression::ConstantTrend] {
            for n in [20, 25, 37, 100, 300, 1000, 100_000] {
                let c = critical_values(kind, n);
                assert!(c.one < c.five && c.five < c.ten && c.ten < 0.0);
            }
        }
        let c = critical_values(AdfRegression::Constant, 100);
        assert_eq!((c.one, c.five, c.ten), (-3.51, -2.89, -2.58));
        // halfway in 1/n between 100 and 250
        let n = (2.0 / (1.0 / 100.0 + 1.0 / 250.0)) as usize;
        let c = critical_values(AdfRegression::Constant, n);
        assert!((c.one - (-3.485)).abs() < 2e-3);
    }

    #[test]
    fn p_value_monotone_and_bounded() {
        for kind in [AdfRegression::Constant, AdfRegression::ConstantTrend] {
            let mut prev = 0.0;
            for i in 0..400 {
                let stat = -10.0 + i as f64 * 0.03;
                let p = p_value(kind, 150, stat);
                assert!((0.0..=1.0).contains(&p));
                assert!(p >= prev - 1e-15, "{stat}: {p} < {prev}");
                prev = p;
            }
        }
        let q = quantiles(AdfRegression::Constant, 500);
        assert!((p_value(AdfRegression::Constant, 500, q[2]) - 0.05).abs() < 1e-12);
    }

    #[test]
    fn random_walk_versus_its_difference() {
        let walk = simulate::random_walk(300, 0.0, 1.0, 42);
        let res = adf_test(&walk, AdfRegression::Constant, None).unwrap();
        assert!(res.statistic > res.critical.five, "{res:?}");
        let diff: Vec<f64> = walk.windows(2).map(|w| w[1] - w[0]).collect();
        let res = adf_test(&diff, AdfRegression::Constant, None).unwrap();
        assert!(res.statistic < res.critical.one && res.p_value < 0.05, "{res:?}");
        assert!(res.strongly_stationary());
    }

    #[test]
    fn stationary_ar1_rejects() {
        let x = simulate::arma(&[0.5], &[], 0.0, 1.0, 500, 8);
        for kind in [AdfRegression::Constant, AdfRegression::ConstantTrend] {
            let res = adf_test(&x, kind, None).unwrap();
            assert!(res.statistic < res.critical.five, "{res:?}");
        }
    }

    #[test]
    fn scale_invariant() {
        let x = simulate::arma(&[0.8], &[], 1.0, 1.0, 200, 2);
        let scaled: Vec<f64> = x.iter().map(|v| v * 37.5).collect();
        let a = adf_test(&x, AdfRegression::ConstantTrend, Some(4)).unwrap();
        let b = adf_test(&scaled, AdfRegression::ConstantTrend, Some(4)).unwrap();
        assert_eq!(a.lags_used, b.lags_used);
        assert!((a.statistic - b.statistic).abs() < 1e-9);
    }

    #[test]
    fn errors() {
        assert!(matches!(adf_test(&[1.0; 40], AdfRegression::Constant, Some(2)), Err(Error::ConstantSeries)));
        assert!(matches!(adf_test(&[1.0, 2.0, 3.0], AdfRegression::Constant, Some(0)), Err(Error::TooShort { .. })));
    }
}
