//! Classical decomposition into trend-cycle, seasonal and remainder components.

use crate::error::{Error, Result};
use crate::series::TimeSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecompositionKind {
    Additive,
    Multiplicative,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub kind: DecompositionKind,
    /// Centred moving average; `None` within half a season of either end.
    pub trend: Vec<Option<f64>>,
    /// Seasonal index for every observation, exactly periodic.
    pub seasonal: Vec<f64>,
    pub remainder: Vec<Option<f64>>,
    /// One index per period position, starting at the period of the first observation.
    pub indices: Vec<f64>,
    pub source_n: usize,
}

/// Centred moving average of window `s`; for even `s` the 2×s average.
pub fn centered_moving_average(values: &[f64], s: usize) -> Vec<Option<f64>> {
    let n = values.len();
    let half = s / 2;
    let mut out = vec![None; n];
    if n < 2 * half + 1 {
        return out;
    }
    for (t, slot) in out.iter_mut().enumerate().take(n - half).skip(half) {
        let sum = if s.is_multiple_of(2) {
            let inner: f64 = values[t + 1 - half..t + half].iter().sum();
            inner + 0.5 * (values[t - half] + values[t + half])
        } else {
            values[t - half..=t + half].iter().sum()
        };
        *slot = Some(sum / s as f64);
    }
    out
}

pub fn classical_decompose(ts: &TimeSeries, kind: DecompositionKind) -> Result<Decomposition> {
    let s = ts.freq().as_usize();
    if s < 2 {
        return Err(Error::Unsupported(
            "decomposition requires a seasonal frequency of at least 2".into(),
        ));
    }
    let y = ts.values();
    let n = y.len();
    if n < 2 * s {
        return Err(Error::TooShort { needed: 2 * s, got: n });
    }
    if kind == DecompositionKind::Multiplicative {
        if let Some(index) = y.iter().position(|&v| v <= 0.0) {
            return Err(Error::Domain {
                index,
                value: y[index],
                reason: "multiplicative decomposition requires positive values",
            });
        }
    }

    let trend = centered_moving_average(y, s);
    let mut sums = vec![0.0; s];
    let mut counts = vec![0usize; s];
    for (t, tr) in trend.iter().enumerate() {
        if let Some(tr) = tr {
            let detrended = match kind {
                DecompositionKind::Additive => y[t] - tr,
                DecompositionKind::Multiplicative => y[t] / tr,
            };
            sums[t % s] += detrended;
            counts[t % s] += 1;
        }
    }
    let mut indices: Vec<f64> = sums
        .iter()
        .zip(&counts)
        .map(|(sum, &c)| sum / c as f64)
        .collect();
    let mean = indices.iter().sum::<f64>() / s as f64;
    for idx in &mut indices {
        match kind {
            DecompositionKind::Additive => *idx -= mean,
            DecompositionKind::Multiplicative => *idx /= mean,
        }
    }

    let seasonal: Vec<f64> = (0..n).map(|t| indices[t % s]).collect();
    let remainder = trend
        .iter()
        .enumerate()
        .map(|(t, tr)| {
            tr.map(|tr| match kind {
                DecompositionKind::Additive => y[t] - tr - seasonal[t],
                DecompositionKind::Multiplicative => y[t] / (tr * seasonal[t]),
            })
        })
        .collect();
    Ok(Decomposition {
        kind,
        trend,
        seasonal,
        remainder,
        indices,
        source_n: n,
    })
}

impl Decomposition {
    /// Recombines the components where the trend is defined.
    pub fn reconstruct(&self) -> Vec<Option<f64>> {
        self.trend
            .iter()
            .zip(&self.seasonal)
            .zip(&self.remainder)
            .map(|((t, s), e)| match (t, e) {
                (Some(t), Some(e)) => Some(match self.kind {
                    DecompositionKind::Additive => t + s + e,
                    DecompositionKind::Multiplicative => t * s * e,
                }),
                _ => None,
            })
            .collect()
    }
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
    fn linear_series_has_no_seasonality() {
        let ts = monthly((1..=48).map(|t| 3.0 + 0.5 * t as f64).collect());
        let d = classical_decompose(&ts, DecompositionKind::Additive).unwrap();
        assert!(d.indices.iter().all(|s| s.abs() < 1e-9));
        for e in d.remainder.iter().flatten() {
            assert!(e.abs() < 1e-9);
        }
        assert_eq!(d.trend.iter().filter(|t| t.is_none()).count(), 12);
        assert!(d.trend[..6].iter().all(Option::is_none));
        assert!(d.trend[42..].iter().all(Option::is_none));
        assert!(d.trend[6].is_some() && d.trend[41].is_some());
    }

    #[test]
    fn recovers_sine_pattern() {
        use std::f64::consts::PI;
        let ts = monthly((1..=60).map(|t| 10.0 + (2.0 * PI * t as f64 / 12.0).sin()).collect());
        let d = classical_decompose(&ts, DecompositionKind::Additive).unwrap();
        let truth: Vec<f64> = (1..=12).map(|t| (2.0 * PI * t as f64 / 12.0).sin()).collect();
        let mean = truth.iter().sum::<f64>() / 12.0;
        for (j, idx) in d.indices.iter().enumerate() {
            assert!((idx - (truth[j] - mean)).abs() < 0.05, "{j}: {idx}");
        }
    }

    #[test]
    fn multiplicative_synthetic() {
        let pattern = [0.9, 0.95, 1.0, 1.05, 1.1, 1.2, 1.1, 1.05, 1.0, 0.95, 0.9, 0.8];
        let mean: f64 = pattern.iter().sum::<f64>() / 12.0;
        let ts = monthly((1..=72).map(|t| (1.0 + 0.01 * t as f64) * pattern[(t - 1) % 12] / mean).collect());
        let d = classical_decompose(&ts, DecompositionKind::Multiplicative).unwrap();
        for e in d.remainder.iter().flatten() {
            assert!((0.99..=1.01).contains(e), "{e}");
        }
        assert!((d.indices.iter().sum::<f64>() / 12.0 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn odd_period_edges() {
        let ts = TimeSeries::from_values((0..21).map(|t| (t % 7) as f64 + t as f64).collect(), Frequency::new(7).unwrap()).unwrap();
        let d = classical_decompose(&ts, DecompositionKind::Additive).unwrap();
        assert!(d.trend[..3].iter().all(Option::is_none));
        assert!(d.trend[18..].iter().all(Option::is_none));
        assert!(d.trend[3..18].iter().all(Option::is_some));
    }

    #[test]
    fn errors() {
        assert!(classical_decompose(&monthly(vec![1.0; 23]), DecompositionKind::Additive).is_err());
        let mut v = vec![1.0; 24];
        v[5] = 0.0;
        assert!(matches!(classical_decompose(&monthly(v), DecompositionKind::Multiplicative), Err(Error::Domain { index: 5, .. })));
        let annual = TimeSeries::from_values(vec![1.0; 10], Frequency::ANNUAL).unwrap();
        assert!(classical_decompose(&annual, DecompositionKind::Additive).is_err());
    }

    fn arb_positive(s: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(1.0f64..100.0, 2 * s..6 * s)
    }

    proptest! {
        #[test]
        fn additive_identity_and_invariants(values in arb_positive(12), shift in -50.0f64..50.0) {
            let ts = monthly(values.clone());
            let d = classical_decompose(&ts, DecompositionKind::Additive).unwrap();
            prop_assert_eq!(d.trend.len(), values.len());
            prop_assert!(d.indices.iter().sum::<f64>().abs() < 1e-9);
            for (r, y) in d.reconstruct().iter().zip(&values) {
                if let Some(r) = r { prop_assert!((r - y).abs() < 1e-9); }
            }
            for t in 12..values.len() {
                prop_assert_eq!(d.seasonal[t], d.seasonal[t - 12]);
            }
            let shifted = monthly(values.iter().map(|v| v + shift).collect());
            let d2 = classical_decompose(&shifted, DecompositionKind::Additive).unwrap();
            for (a, b) in d.indices.iter().zip(&d2.indices) {
                prop_assert!((a - b).abs() < 1e-9);
            }
        }

        #[test]
        fn multiplicative_identity_and_invariants(values in arb_positive(4), scale in 0.1f64..10.0) {
            let ts = TimeSeries::from_values(values.clone(), Frequency::QUARTERLY).unwrap();
            let d = classical_decompose(&ts, DecompositionKind::Multiplicative).unwrap();
            prop_assert!((d.indices.iter().sum::<f64>() / 4.0 - 1.0).abs() < 1e-9);
            for (r, y) in d.reconstruct().iter().zip(&values) {
                if let Some(r) = r { prop_assert!(((r - y) / y).abs() < 1e-9); }
            }
            let scaled = TimeSeries::from_values(values.iter().map(|v| v * scale).collect(), Frequency::QUARTERLY).unwrap();
            let d2 = classical_decompose(&scaled, DecompositionKind::Multiplicative).unwrap();
            for (a, b) in d.indices.iter().zip(&d2.indices) {
                prop_assert!((a - b).abs() < 1e-9);
            }
        }
    }
}
