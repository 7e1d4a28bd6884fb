//! Variance-stabilising and calendar adjustments, plus ordinary and seasonal
//! differencing with an exact inverse for mapping forecasts back.

use crate::error::{Error, Result};
use crate::series::TimeSeries;

/// `order` applications of `Y_t - Y_{t-lag}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DifferenceSpec {
    lag: usize,
    order: usize,
}

impl DifferenceSpec {
    pub fn new(lag: usize, order: usize) -> Result<Self> {
        if lag == 0 || order == 0 {
            return Err(Error::InvalidInput(format!(
                "difference lag and order must be positive (lag={lag}, order={order})"
            )));
        }
        Ok(DifferenceSpec { lag, order })
    }

    /// Single first difference.
    pub fn first() -> Self {
        DifferenceSpec { lag: 1, order: 1 }
    }

    pub fn lag(self) -> usize {
        self.lag
    }

    pub fn order(self) -> usize {
        self.order
    }

    /// Observations consumed: `lag * order`.
    pub fn span(self) -> usize {
        self.lag * self.order
    }
}

fn map_checked(
    ts: &TimeSeries,
    valid: impl Fn(f64) -> bool,
    reason: &'static str,
    f: impl Fn(f64) -> f64,
) -> Result<TimeSeries> {
    if let Some(index) = ts.values().iter().position(|&v| !valid(v)) {
        return Err(Error::Domain {
            index,
            value: ts.values()[index],
            reason,
        });
    }
    ts.with_values(ts.values().iter().map(|&v| f(v)).collect())
}

/// Natural logarithm; every value must be strictly positive.
pub fn log_transform(ts: &TimeSeries) -> Result<TimeSeries> {
    map_checked(ts, |v| v > 0.0, "log requires positive values", f64::ln)
}

/// Inverse of [`log_transform`].
pub fn exp_transform(ts: &TimeSeries) -> Result<TimeSeries> {
    map_checked(ts, |v| v.exp().is_finite(), "exp overflows", f64::exp)
}

pub fn sqrt_transform(ts: &TimeSeries) -> Result<TimeSeries> {
    map_checked(ts, |v| v >= 0.0, "sqrt requires non-negative values", f64::sqrt)
}

/// `value^lambda`. Non-integer exponents need strictly positive data.
pub fn power_transform(ts: &TimeSeries, lambda: f64) -> Result<TimeSeries> {
    if !lambda.is_finite() {
        return Err(Error::InvalidParameter {
            name: "lambda",
            value: lambda,
            reason: "must be finite",
        });
    }
    if lambda == 0.5 {
        return sqrt_transform(ts);
    }
    let integer = lambda.fract() == 0.0;
    let out = map_checked(
        ts,
        |v| integer || v > 0.0,
        "non-integer power requires positive values",
        |v| {
            if integer && lambda.abs() <= i32::MAX as f64 {
                v.powi(lambda as i32)
            } else {
                v.powf(lambda)
            }
        },
    )?;
    if let Some(index) = out.values().iter().position(|v| !v.is_finite()) {
        return Err(Error::Domain {
            index,
            value: ts.values()[index],
            reason: "power is not finite",
        });
    }
    Ok(out)
}

/// Rescales each observation by `mean(days) / days_t`, removing month-length effects
/// while keeping the series on its original scale.
pub fn calendar_adjust(ts: &TimeSeries, days: &[f64]) -> Result<TimeSeries> {
    if days.len() != ts.len() {
        return Err(Error::LengthMismatch {
            expected: ts.len(),
            got: days.len(),
        });
    }
    if let Some(index) = days.iter().position(|&d| !(d > 0.0 && d.is_finite())) {
        return Err(Error::Domain {
            index,
            value: days[index],
            reason: "day counts must be positive",
        });
    }
    let mean = days.iter().sum::<f64>() / days.len() as f64;
    ts.with_values(
        ts.values()
            .iter()
            .zip(days)
            .map(|(&y, &d)| y * (mean / d))
            .collect(),
    )
}

/// Number of days in each month of a monthly series, for [`calendar_adjust`].
pub fn days_in_months(ts: &TimeSeries) -> Result<Vec<f64>> {
    if ts.freq().get() != 12 {
        return Err(Error::Unsupported(
            "month lengths need a monthly series".into(),
        ));
    }
    Ok((0..ts.len())
        .map(|i| {
            let p = ts.period_at(i);
            let leap = (p.year % 4 == 0 && p.year % 100 != 0) || p.year % 400 == 0;
            match p.period {
                2 if leap => 29.0,
                2 => 28.0,
                4 | 6 | 9 | 11 => 30.0,
                _ => 31.0,
            }
        })
        .collect())
}

fn difference_values(values: &[f64], lag: usize) -> Vec<f64> {
    values
        .iter()
        .skip(lag)
        .zip(values)
        .map(|(a, b)| a - b)
        .collect()
}

/// Applies `spec` to raw values.
pub fn difference_slice(values: &[f64], spec: DifferenceSpec) -> Result<Vec<f64>> {
    if values.len() <= spec.span() {
        return Err(Error::TooShort {
            needed: spec.span() + 1,
            got: values.len(),
        });
    }
    let mut out = values.to_vec();
    for _ in 0..spec.order {
        out = difference_values(&out, spec.lag);
    }
    Ok(out)
}

pub fn difference(ts: &TimeSeries, spec: DifferenceSpec) -> Result<TimeSeries> {
    let out = difference_slice(ts.values(), spec)?;
    ts.with_values_shifted(out, spec.span() as i64)
}

/// Undoes differencing on raw values. `presample` holds the `lag * order`
/// original observations immediately preceding `diffed`; the result is
/// `presample` followed by the reconstructed values.
pub fn invert_difference_slice(
    diffed: &[f64],
    spec: DifferenceSpec,
    presample: &[f64],
) -> Result<Vec<f64>> {
    if presample.len() != spec.span() {
        return Err(Error::LengthMismatch {
            expected: spec.span(),
            got: presample.len(),
        });
    }
    let lag = spec.lag;
    // seeds[k] = the last `lag` values of the presample differenced k times
    let mut seeds = Vec::with_capacity(spec.order);
    let mut level = presample.to_vec();
    for _ in 0..spec.order {
        seeds.push(level[level.len() - lag..].to_vec());
        level = difference_values(&level, lag);
    }
    let mut current = diffed.to_vec();
    for seed in seeds.into_iter().rev() {
        let mut next = seed;
        next.reserve(current.len());
        for v in current {
            let prev = next[next.len() - lag];
            next.push(v + prev);
        }
        current = next.split_off(lag);
    }
    let mut out = presample.to_vec();
    out.extend(current);
    Ok(out)
}

pub fn invert_difference(
    diffed: &TimeSeries,
    spec: DifferenceSpec,
    presample: &[f64],
) -> Result<TimeSeries> {
    let out = invert_difference_slice(diffed.values(), spec, presample)?;
    diffed.with_values_shifted(out, -(spec.span() as i64))
}
