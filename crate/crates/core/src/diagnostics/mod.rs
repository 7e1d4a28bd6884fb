//! Correlation analysis, ACF/PACF correlograms, white-noise assessment and
//! the Augmented Dickey–Fuller unit-root test.

mod adf;

pub use adf::{adf_test, default_adf_max_lag, AdfRegression, AdfResult, CriticalValues};

use crate::error::{Error, Result};

/// Two-sided 95% white-noise band half-width, `1.96/√n`.
pub fn white_noise_band(n: usize) -> f64 {
    1.96 / (n as f64).sqrt()
}

/// Correlation coefficients at lags `0..=K` with the `±1.96/√n` band.
#[derive(Debug, Clone, PartialEq)]
pub struct Correlogram {
    pub lags: Vec<usize>,
    pub coefficients: Vec<f64>,
    pub band: f64,
    pub n: usize,
}

impl Correlogram {
    fn new(coefficients: Vec<f64>, n: usize) -> Self {
        Correlogram {
            lags: (0..coefficients.len()).collect(),
            coefficients,
            band: white_noise_band(n),
            n,
        }
    }

    pub fn max_lag(&self) -> usize {
        self.coefficients.len() - 1
    }

    /// Coefficient at `lag`.
    pub fn at(&self, lag: usize) -> f64 {
        self.coefficients[lag]
    }

    pub fn is_significant(&self, lag: usize) -> bool {
        self.coefficients[lag].abs() > self.band
    }

    /// Fraction of lags `1..=K` inside the band.
    pub fn fraction_inside(&self) -> f64 {
        let k = self.max_lag();
        let inside = (1..=k).filter(|&l| !self.is_significant(l)).count();
        inside as f64 / k as f64
    }
}

fn check_acf_input(values: &[f64], max_lag: usize) -> Result<f64> {
    let n = values.len();
    if n < 3 {
        return Err(Error::TooShort { needed: 3, got: n });
    }
    if max_lag == 0 || max_lag >= n {
        return Err(Error::InvalidInput(format!(
            "max_lag must lie in 1..={}, got {max_lag}",
            n - 1
        )));
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let c0 = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>();
    if c0 <= f64::EPSILON * f64::EPSILON * n as f64 * mean * mean || c0 == 0.0 {
        return Err(Error::ConstantSeries);
    }
    Ok(mean)
}

/// Sample autocorrelation `r_k = c_k / c_0` with the n-divisor autocovariance.
pub fn acf(values: &[f64], max_lag: usize) -> Result<Correlogram> {
    let mean = check_acf_input(values, max_lag)?;
    let dev: Vec<f64> = values.iter().map(|v| v - mean).collect();
    let c0: f64 = dev.iter().map(|d| d * d).sum();
    let mut coefficients = Vec::with_capacity(max_lag + 1);
    coefficients.push(1.0);
    for k in 1..=max_lag {
        let ck: f64 = dev.iter().zip(&dev[k..]).map(|(a, b)| a * b).sum();
        coefficients.push(ck / c0);
    }
    Ok(Correlogram::new(coefficients, values.len()))
}

/// Durbin–Levinson recursion from autocorrelations `r_0..r_K` to partial
/// autocorrelations `φ_00..φ_KK`.
pub fn durbin_levinson(r: &[f64]) -> Result<Vec<f64>> {
    let max_lag = r.len() - 1;
    let mut partial = vec![1.0; max_lag + 1];
    if max_lag == 0 {
        return Ok(partial);
    }
    let mut phi = vec![r[1]];
    partial[1] = r[1];
    for k in 2..=max_lag {
        let prev = partial[k - 1];
        if prev.abs() >= 1.0 {
            return Err(Error::Degenerate(format!(
                "partial autocorrelation at lag {} reached {prev}",
                k - 1
            )));
        }
        let num = r[k] - (1..k).map(|j| phi[j - 1] * r[k - j]).sum::<f64>();
        let den = 1.0 - (1..k).map(|j| phi[j - 1] * r[j]).sum::<f64>();
        if den <= 1e-14 {
            return Err(Error::Degenerate(format!(
                "prediction error variance vanished at lag {k}"
            )));
        }
        let pkk = num / den;
        let mut next = Vec::with_capacity(k);
        for j in 1..k {
            next.push(phi[j - 1] - pkk * phi[k - j - 1]);
        }
        next.push(pkk);
        phi = next;
        partial[k] = pkk;
    }
    Ok(partial)
}

/// Sample partial autocorrelation via Durbin–Levinson; requires `max_lag ≤ n/2`.
pub fn pacf(values: &[f64], max_lag: usize) -> Result<Correlogram> {
    if max_lag > values.len() / 2 {
        return Err(Error::InvalidInput(format!(
            "pacf max_lag must be at most n/2 = {}, got {max_lag}",
            values.len() / 2
        )));
    }
    let r = acf(values, max_lag)?;
    let partial = durbin_levinson(&r.coefficients)?;
    Ok(Correlogram::new(partial, values.len()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WhiteNoiseVerdict {
    pub verdict: bool,
    /// Fraction of lags whose ACF and PACF both sit inside the band.
    pub fraction_inside: f64,
}

/// White noise when at least 95% of lags `1..=max_lag` have both the
/// autocorrelation and the partial autocorrelation inside `±1.96/√n`.
pub fn is_white_noise(values: &[f64], max_lag: usize) -> Result<WhiteNoiseVerdict> {
    let a = acf(values, max_lag)?;
    let p = pacf(values, max_lag)?;
    let inside = (1..=max_lag)
        .filter(|&k| !a.is_significant(k) && !p.is_significant(k))
        .count();
    let fraction_inside = inside as f64 / max_lag as f64;
    Ok(WhiteNoiseVerdict {
        verdict: fraction_inside >= 0.95,
        fraction_inside,
    })
}

/// Pearson correlation coefficient.
pub fn correlation(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    let n = x.len();
    if n < 2 {
        return Err(Error::TooShort { needed: 2, got: n });
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::ConstantSeries);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    pub labels: Vec<String>,
    /// Row-major, symmetric, unit diagonal.
    pub values: Vec<Vec<f64>>,
}

impl CorrelationMatrix {
    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.labels.iter().position(|l| l == a)?;
        let j = self.labels.iter().position(|l| l == b)?;
        Some(self.values[i][j])
    }
}

pub fn correlation_matrix(columns: &[(String, Vec<f64>)]) -> Result<CorrelationMatrix> {
    if columns.len() < 2 {
        return Err(Error::InvalidInput(
            "correlation matrix needs at least two columns".into(),
        ));
    }
    let k = columns.len();
    let mut values = vec![vec![1.0; k]; k];
    for i in 0..k {
        for j in i + 1..k {
            let r = correlation(&columns[i].1, &columns[j].1)?;
            values[i][j] = r;
            values[j][i] = r;
        }
    }
    // surfaces constant columns even when only compared with themselves
    for (_, col) in columns {
        correlation(col, col)?;
    }
    Ok(CorrelationMatrix {
        labels: columns.iter().map(|(n, _)| n.clone()).collect(),
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate;
    use proptest::prelude::*;

    #[test]
    fn acf_basics() {
        let alternating: Vec<f64> = (0..100).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let r = acf(&alternating, 5).unwrap();
        assert_eq!(r.at(0), 1.0);
        assert!((r.at(1) + 0.99).abs() < 1e-12);
        assert!((r.band - 1.96 / 10.0).abs() < 1e-15);
        assert!(matches!(acf(&[2.0; 10], 3), Err(Error::ConstantSeries)));
        assert!(acf(&[1.0, 2.0, 3.0], 3).is_err());
        assert!(acf(&[1.0, 2.0, 3.0], 0).is_err());
        assert!(acf(&[1.0, 2.0], 1).is_err());
    }

    #[test]
    fn white_noise_acf_coverage() {
        let noise = simulate::white_noise(1000, 1.0, 11);
        let r = acf(&noise, 50).unwrap();
        assert!(r.fraction_inside() >= 0.93, "{}", r.fraction_inside());
        assert!((r.band - 0.062).abs() < 1e-3);
    }

    #[test]
    fn pacf_of_ar1_cuts_off() {
        let x = simulate::arma(&[0.7], &[], 0.0, 1.0, 1000, 3);
        let p = pacf(&x, 20).unwrap();
        assert!((p.at(1) - 0.7).abs() <= 0.08, "{}", p.at(1));
        let inside = (3..=20).filter(|&k| !p.is_significant(k)).count();
        assert!(inside as f64 / 18.0 >= 0.9);
    }

    #[test]
    fn pacf_of_white_noise() {
        let noise = simulate::white_noise(1000, 1.0, 0);
        let p = pacf(&noise, 50).unwrap();
        assert!(p.fraction_inside() >= 0.93);
        assert!(pacf(&noise, 501).is_err());
    }

    #[test]
    fn band_coverage_averages_ninety_five_percent() {
        let seeds = 0..100u64;
        let (mut a, mut p) = (0.0, 0.0);
        for seed in seeds.clone() {
            let x = simulate::white_noise(1000, 1.0, seed);
            a += acf(&x, 50).unwrap().fraction_inside();
            p += pacf(&x, 50).unwrap().fraction_inside();
        }
        let count = seeds.count() as f64;
        // standard error of the mean fraction is about 0.003
        assert!(((a / count) - 0.95).abs() < 0.015, "{}", a / count);
        assert!(((p / count) - 0.95).abs() < 0.015, "{}", p / count);
    }

    #[test]
    fn durbin_levinson_matches_yule_walker_solve() {
        // AR(2) theoretical autocorrelations: φ22 must equal the AR(2) coefficient
        let (a1, a2) = (0.5, 0.3);
        let mut r = vec![1.0, a1 / (1.0 - a2)];
        for k in 2..8 {
            r.push(a1 * r[k - 1] + a2 * r[k - 2]);
        }
        let p = durbin_levinson(&r).unwrap();
        assert!((p[2] - a2).abs() < 1e-12);
        assert!(p[3..].iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn white_noise_verdicts() {
        let noise = simulate::white_noise(1000, 1.0, 0);
        assert!(is_white_noise(&noise, 40).unwrap().verdict);

        let seasonal: Vec<f64> = simulate::white_noise(240, 0.3, 4)
            .iter()
            .enumerate()
            .map(|(t, e)| (2.0 * std::f64::consts::PI * t as f64 / 12.0).sin() * 3.0 + e)
            .collect();
        let a = acf(&seasonal, 36).unwrap();
        assert!(a.at(12) > a.band && a.at(24) > a.band);
        assert!(!is_white_noise(&seasonal, 36).unwrap().verdict);

        let ramp: Vec<f64> = (1..=100).map(f64::from).collect();
        assert!(!is_white_noise(&ramp, 20).unwrap().verdict);
    }

    #[test]
    fn correlations() {
        let x = [1.0, 2.0, 3.0];
        assert!((correlation(&x, &x).unwrap() - 1.0).abs() < 1e-15);
        assert!((correlation(&x, &[-1.0, -2.0, -3.0]).unwrap() + 1.0).abs() < 1e-15);
        // hand evaluation: sxy = 3, sxx = 2, syy = 14/3
        let expected = 3.0 / (2.0f64.sqrt() * (14.0f64 / 3.0).sqrt());
        assert!((correlation(&x, &[1.0, 2.0, 4.0]).unwrap() - expected).abs() < 1e-15);
        assert!((expected - 0.981_980_506).abs() < 1e-9);
        assert!(correlation(&x, &[1.0, 2.0]).is_err());
        assert!(correlation(&x, &[1.0, 1.0, 1.0]).is_err());

        let cols = vec![("a".to_string(), x.to_vec()), ("b".to_string(), x.to_vec())];
        let m = correlation_matrix(&cols).unwrap();
        assert!(m.values.iter().flatten().all(|v| (v - 1.0).abs() < 1e-15));
        assert!(correlation_matrix(&cols[..1]).is_err());
    }

    #[test]
    fn correlation_matrix_is_symmetric_psd() {
        let cols: Vec<(String, Vec<f64>)> = (0..4)
            .map(|i| (format!("c{i}"), simulate::white_noise(50, 1.0, 100 + i)))
            .collect();
        let m = correlation_matrix(&cols).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert!((m.values[i][j] - m.values[j][i]).abs() <= 1e-15);
            }
        }
        let mat = nalgebra::DMatrix::from_fn(4, 4, |i, j| m.values[i][j]);
        let eig = mat.symmetric_eigen();
        assert!(eig.eigenvalues.iter().all(|&e| e >= -1e-10));
    }

    proptest! {
        #[test]
        fn acf_bounded_and_affine_invariant(
            values in prop::collection::vec(-100.0f64..100.0, 10..80),
            a in prop::sample::select(vec![-3.0, -0.5, 0.25, 2.0, 7.5]),
            b in -50.0f64..50.0,
        ) {
            let max_lag = values.len() / 2;
            let Ok(r) = acf(&values, max_lag) else { return Ok(()); };
            prop_assert_eq!(r.at(0), 1.0);
            prop_assert!(r.coefficients.iter().all(|c| c.abs() <= 1.0 + 1e-12));
            let mapped: Vec<f64> = values.iter().map(|v| a * v + b).collect();
            let r2 = acf(&mapped, max_lag).unwrap();
            for (x, y) in r.coefficients.iter().zip(&r2.coefficients) {
                prop_assert!((x - y).abs() < 1e-12);
            }
            let p = pacf(&values, max_lag);
            if let Ok(p) = p {
                prop_assert_eq!(p.at(1), r.at(1));
            }
        }
    }
}
