//! Naive baselines, accuracy measures and `F ± z√MSE` intervals.

use crate::error::{Error, Result};
use crate::series::TimeSeries;

/// Interval bounds around each out-of-sample forecast.
#[derive(Debug, Clone, PartialEq)]
pub struct Intervals {
    pub z: f64,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

/// In-sample one-step forecasts plus out-of-sample point forecasts.
#[derive(Debug, Clone, PartialEq)]
pub struct ForecastResult {
    /// Aligned with the observed series; `None` where initialisation applies.
    pub fitted: Vec<Option<f64>>,
    pub future: Vec<f64>,
    pub residuals: Vec<Option<f64>>,
    pub intervals: Option<Intervals>,
    pub method: String,
}

impl ForecastResult {
    pub fn from_fitted(
        actual: &[f64],
        fitted: Vec<Option<f64>>,
        future: Vec<f64>,
        method: impl Into<String>,
    ) -> Self {
        let residuals = actual
            .iter()
            .zip(&fitted)
            .map(|(y, f)| f.map(|f| y - f))
            .collect();
        ForecastResult {
            fitted,
            future,
            residuals,
            intervals: None,
            method: method.into(),
        }
    }

    /// Pairs of (actual, fitted) where the fit is defined.
    pub fn defined_pairs(&self, actual: &[f64]) -> (Vec<f64>, Vec<f64>) {
        actual
            .iter()
            .zip(&self.fitted)
            .filter_map(|(y, f)| f.map(|f| (*y, f)))
            .unzip()
    }

    /// Error measures over every defined fitted value.
    pub fn error_report(&self, actual: &[f64]) -> Result<ErrorReport> {
        let (a, f) = self.defined_pairs(actual);
        error_measures(&a, &f)
    }

    /// Mean squared one-step residual over the defined range.
    pub fn mse(&self) -> f64 {
        let defined: Vec<f64> = self.residuals.iter().flatten().copied().collect();
        defined.iter().map(|e| e * e).sum::<f64>() / defined.len() as f64
    }

    /// Attaches `future ± z√mse` bounds.
    pub fn with_intervals(mut self, mse: f64, level: ConfidenceLevel) -> Result<Self> {
        let (lower, upper) = confidence_interval(&self.future, mse, level)?;
        self.intervals = Some(Intervals {
            z: level.z(),
            lower,
            upper,
        });
        Ok(self)
    }
}

/// The five summary accuracy measures; percentage measures are in percent and
/// `None` when an actual value is zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport {
    pub me: f64,
    pub mae: f64,
    pub mse: f64,
    pub mpe: Option<f64>,
    pub mape: Option<f64>,
}

/// Errors are `actual − forecast`; `PE_t = 100 e_t / Y_t`.
pub fn error_measures(actual: &[f64], forecast: &[f64]) -> Result<ErrorReport> {
    if actual.len() != forecast.len() {
        return Err(Error::LengthMismatch {
            expected: actual.len(),
            got: forecast.len(),
        });
    }
    if actual.is_empty() {
        return Err(Error::TooShort { needed: 1, got: 0 });
    }
    let n = actual.len() as f64;
    let errors: Vec<f64> = actual.iter().zip(forecast).map(|(y, f)| y - f).collect();
    let me = errors.iter().sum::<f64>() / n;
    let mae = errors.iter().map(|e| e.abs()).sum::<f64>() / n;
    let mse = errors.iter().map(|e| e * e).sum::<f64>() / n;
    let (mpe, mape) = if actual.contains(&0.0) {
        (None, None)
    } else {
        let pe: Vec<f64> = errors.iter().zip(actual).map(|(e, y)| 100.0 * e / y).collect();
        (
            Some(pe.iter().sum::<f64>() / n),
            Some(pe.iter().map(|p| p.abs()).sum::<f64>() / n),
        )
    };
    Ok(ErrorReport {
        me,
        mae,
        mse,
        mpe,
        mape,
    })
}

/// Coverage level for `F ± z√MSE`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConfidenceLevel {
    P80,
    P90,
    P95,
    Z(f64),
}

impl ConfidenceLevel {
    pub fn z(self) -> f64 {
        match self {
            ConfidenceLevel::P80 => 1.282,
            ConfidenceLevel::P90 => 1.645,
            ConfidenceLevel::P95 => 1.96,
            ConfidenceLevel::Z(z) => z,
        }
    }

    /// Parses `80`, `90`, `95` (optionally with `%`).
    pub fn from_percent(text: &str) -> Result<Self> {
        match text.trim().trim_end_matches('%') {
            "80" => Ok(ConfidenceLevel::P80),
            "90" => Ok(ConfidenceLevel::P90),
            "95" => Ok(ConfidenceLevel::P95),
            other => Err(Error::InvalidInput(format!(
                "unsupported confidence level {other:?}; use 80, 90 or 95"
            ))),
        }
    }
}

pub fn confidence_interval(
    point: &[f64],
    mse: f64,
    level: ConfidenceLevel,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if mse.is_nan() || mse < 0.0 {
        return Err(Error::InvalidParameter {
            name: "mse",
            value: mse,
            reason: "must be non-negative",
        });
    }
    let half = level.z() * mse.sqrt();
    Ok((
        point.iter().map(|f| f - half).collect(),
        point.iter().map(|f| f + half).collect(),
    ))
}

/// Last-value forecast: `F_{t+1} = Y_t`.
pub fn nf1(ts: &TimeSeries, h: usize) -> Result<ForecastResult> {
    let y = ts.values();
    if y.len() < 2 {
        return Err(Error::TooShort {
            needed: 2,
            got: y.len(),
        });
    }
    let fitted = std::iter::once(None)
        .chain(y[..y.len() - 1].iter().map(|&v| Some(v)))
        .collect();
    let last = *y.last().expect("non-empty");
    Ok(ForecastResult::from_fitted(y, fitted, vec![last; h], "NF1"))
}

const NF2_PERIOD: usize = 12;

/// Number of complete cycles strictly preceding 0-based index `t`; the
/// running-count reading of "complete years of data available".
fn nf2_cycles_before(t: usize) -> usize {
    t / NF2_PERIOD
}

/// Seasonal naive forecast for monthly data:
/// `F_{t+1} = Y_t − S_t + S_{t−11}` with `S_t = (m S_{t−12} + Y_t)/(m+1)`.
pub fn nf2(ts: &TimeSeries, h: usize) -> Result<ForecastResult> {
    if ts.freq().as_usize() != NF2_PERIOD {
        return Err(Error::Unsupported(format!(
            "NF2 is defined for monthly data, got frequency {}",
            ts.freq()
        )));
    }
    let y = ts.values();
    let n = y.len();
    if n <= NF2_PERIOD {
        return Err(Error::TooShort {
            needed: NF2_PERIOD + 1,
            got: n,
        });
    }
    // 0-based: index t holds Y_{t+1}; forecast[t] is F_{t+1}
    let total = n + h;
    let mut values = y.to_vec();
    values.resize(total, 0.0);
    let mut s = vec![0.0; total];
    let mut forecast: Vec<Option<f64>> = vec![None; total + 1];
    for t in 0..total {
        if t >= n {
            values[t] = forecast[t].expect("one-step forecast available");
        }
        if t < NF2_PERIOD {
            s[t] = values[t];
            forecast[t + 1] = Some(values[t]);
        } else {
            let m = nf2_cycles_before(t) as f64;
            s[t] = (m * s[t - NF2_PERIOD] + values[t]) / (m + 1.0);
            forecast[t + 1] = Some(values[t] - s[t] + s[t + 1 - NF2_PERIOD]);
        }
    }
    let fitted = forecast[..n].to_vec();
    let future = forecast[n..total].iter().map(|f| f.expect("defined")).collect();
    Ok(ForecastResult::from_fitted(y, fitted, future, "NF2"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::Frequency;
    use proptest::prelude::*;

    fn monthly(values: Vec<f64>) -> TimeSeries {
        TimeSeries::from_values(values, Frequency::MONTHLY).unwrap()
    }

    #[test]
    fn nf1_examples() {
        let r = nf1(&monthly(vec![5.0; 3]), 2).unwrap();
        assert_eq!(r.fitted, vec![None, Some(5.0), Some(5.0)]);
        assert_eq!(r.future, vec![5.0, 5.0]);
        let r = nf1(&monthly(vec![1.0, 2.0, 3.0]), 1).unwrap();
        assert_eq!(r.fitted, vec![None, Some(1.0), Some(2.0)]);
        assert_eq!(r.future, vec![3.0]);
        assert_eq!(r.residuals, vec![None, Some(1.0), Some(1.0)]);
        assert!(nf1(&monthly(vec![1.0]), 1).is_err());
    }

    #[test]
    fn nf2_constant_and_periodic() {
        let r = nf2(&monthly(vec![7.0; 24]), 5).unwrap();
        assert!(r.fitted.iter().flatten().all(|&f| f == 7.0));
        assert_eq!(r.future, vec![7.0; 5]);

        let pattern = [3.0, 5.0, 9.0, 4.0, 1.0, 8.0, 2.0, 7.0, 6.0, 10.0, 12.0, 11.0];
        let y: Vec<f64> = (0..36).map(|t| pattern[t % 12]).collect();
        let r = nf2(&monthly(y.clone()), 12).unwrap();
        // t = 14 onward (1-based) is index 13 onward
        for t in 13..36 {
            assert!(r.residuals[t].unwrap().abs() < 1e-12, "t={t}");
        }
        assert!(r.residuals[12].unwrap().abs() > 0.0);
        for (j, f) in r.future.iter().enumerate() {
            assert!((f - pattern[j]).abs() < 1e-12);
        }
    }

    #[test]
    fn nf2_initialisation_is_nf1() {
        let y: Vec<f64> = (0..20).map(|t| (t * t) as f64).collect();
        let r = nf2(&monthly(y.clone()), 0).unwrap();
        assert_eq!(r.fitted[0], None);
        for t in 1..=12 {
            assert_eq!(r.fitted[t], Some(y[t - 1]));
        }
        // hand iteration at t = 13 (1-based): S_13 = (S_1 + Y_13)/2, F_14 = Y_13 − S_13 + S_2
        let s13 = (y[0] + y[12]) / 2.0;
        assert_eq!(r.fitted[13], Some(y[12] - s13 + y[1]));
    }

    #[test]
    fn nf2_preconditions() {
        assert!(nf2(&monthly(vec![1.0; 12]), 1).is_err());
        let q = TimeSeries::from_values(vec![1.0; 30], Frequency::QUARTERLY).unwrap();
        assert!(matches!(nf2(&q, 1), Err(Error::Unsupported(_))));
    }

    #[test]
    fn error_measure_examples() {
        let r = error_measures(&[10.0, 12.0], &[11.0, 11.0]).unwrap();
        assert_eq!((r.me, r.mae, r.mse), (0.0, 1.0, 1.0));
        let mpe = (-10.0 + 100.0 / 12.0) / 2.0;
        let mape = (10.0 + 100.0 / 12.0) / 2.0;
        assert!((r.mpe.unwrap() - mpe).abs() < 1e-12);
        assert!((r.mape.unwrap() - mape).abs() < 1e-12);
        assert!((r.mpe.unwrap() + 0.833_333_333_333).abs() < 1e-9);
        assert!((r.mape.unwrap() - 9.166_666_666_666).abs() < 1e-9);

        let r = error_measures(&[1.0, 2.0], &[1.0, 2.0]).unwrap();
        assert_eq!((r.me, r.mae, r.mse, r.mpe, r.mape), (0.0, 0.0, 0.0, Some(0.0), Some(0.0)));

        let r = error_measures(&[0.0, 2.0], &[1.0, 2.0]).unwrap();
        assert_eq!(r.mape, None);
        assert_eq!(r.mae, 0.5);
        assert!(error_measures(&[1.0], &[1.0, 2.0]).is_err());
        assert!(error_measures(&[], &[]).is_err());
    }

    #[test]
    fn interval_constants() {
        assert_eq!(ConfidenceLevel::P90.z(), 1.645);
        assert_eq!(ConfidenceLevel::P80.z(), 1.282);
        assert_eq!(ConfidenceLevel::from_percent("95%").unwrap().z(), 1.96);
        assert!(ConfidenceLevel::from_percent("50").is_err());
        let (lo, hi) = confidence_interval(&[3.0], 0.0, ConfidenceLevel::P95).unwrap();
        assert_eq!((lo[0], hi[0]), (3.0, 3.0));
        assert!(confidence_interval(&[3.0], -1.0, ConfidenceLevel::P95).is_err());
        let (lo, hi) = confidence_interval(&[10.0], 4.0, ConfidenceLevel::P90).unwrap();
        assert!((hi[0] - lo[0] - 2.0 * 1.645 * 2.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn report_inequalities(pairs in prop::collection::vec((1.0f64..100.0, -100.0f64..100.0), 1..50)) {
            let (a, f): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            let r = error_measures(&a, &f).unwrap();
            prop_assert!(r.mae >= r.me.abs() - 1e-12);
            prop_assert!(r.mse >= 0.0);
            prop_assert!(r.mape.unwrap() >= r.mpe.unwrap().abs() - 1e-12);
        }

        #[test]
        fn nf1_is_shift(values in prop::collection::vec(-1e6f64..1e6, 2..40)) {
            let r = nf1(&monthly(values.clone()), 3).unwrap();
            for t in 1..values.len() {
                prop_assert_eq!(r.fitted[t], Some(values[t - 1]));
                prop_assert_eq!(r.residuals[t], Some(values[t] - values[t - 1]));
            }
        }

        #[test]
        fn interval_width_monotone(mse in 0.0f64..100.0, f in -10.0f64..10.0) {
            let width = |level| {
                let (lo, hi) = confidence_interval(&[f], mse, level).unwrap();
                hi[0] - lo[0]
            };
            let (w80, w90, w95) = (width(ConfidenceLevel::P80), width(ConfidenceLevel::P90), width(ConfidenceLevel::P95));
            prop_assert!((w90 - 2.0 * 1.645 * mse.sqrt()).abs() < 1e-12);
            prop_assert!(w80 <= w90 && w90 <= w95);
        }
    }
}
