//! Ordinary least squares with t and F inference, and forecasting through
//! forecasts of the regressors.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::arima::{arima_fit, ModelOrder};
use crate::baseline::{confidence_interval, ConfidenceLevel, ForecastResult, Intervals};
use crate::error::{Error, Result};
use crate::expsmooth::{holt_fit, ParamSpec, TrendKind};
use crate::linalg::least_squares;
use crate::series::TimeSeries;
use crate::stats::{f_survival, students_t_two_sided};

pub const INTERCEPT: &str = "const";

#[derive(Debug, Clone, PartialEq)]
pub struct OlsFit {
    /// `const` followed by the regressor names.
    pub names: Vec<String>,
    pub coefficients: Vec<f64>,
    pub stderr: Vec<f64>,
    pub t_stats: Vec<f64>,
    pub p_values: Vec<f64>,
    pub r_squared: f64,
    pub adj_r_squared: f64,
    pub f_stat: f64,
    pub f_p_value: f64,
    pub residuals: Vec<f64>,
    pub fitted: Vec<f64>,
    pub sse: f64,
    pub n: usize,
    pub k: usize,
}

impl OlsFit {
    /// `SSE/n` over the fitted range, the interval MSE.
    pub fn mse(&self) -> f64 {
        self.sse / self.n as f64
    }

    pub fn df_resid(&self) -> usize {
        self.n - self.k - 1
    }

    pub fn coefficient(&self, name: &str) -> Option<f64> {
        self.index(name).map(|i| self.coefficients[i])
    }

    pub fn p_value(&self, name: &str) -> Option<f64> {
        self.index(name).map(|i| self.p_values[i])
    }

    fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// `b₀ + Σ b_j x_j` for one row of regressor values.
    pub fn predict(&self, row: &[f64]) -> Result<f64> {
        if row.len() != self.k {
            return Err(Error::LengthMismatch {
                expected: self.k,
                got: row.len(),
            });
        }
        Ok(self.coefficients[0]
            + self.coefficients[1..]
                .iter()
                .zip(row)
                .map(|(b, x)| b * x)
                .sum::<f64>())
    }
}

fn t_and_p(b: f64, se: f64, df: f64) -> (f64, f64) {
    if se > 0.0 {
        let t = b / se;
        (t, students_t_two_sided(t, df))
    } else if b == 0.0 {
        (0.0, 1.0)
    } else {
        (b.signum() * f64::INFINITY, 0.0)
    }
}

/// Fits `y = b₀ + Σ b_j x_j + e` by Householder QR.
pub fn ols_fit(y: &[f64], regressors: &[(String, Vec<f64>)]) -> Result<OlsFit> {
    let n = y.len();
    let k = regressors.len();
    if let Some((_, col)) = regressors.iter().find(|(_, c)| c.len() != n) {
        return Err(Error::LengthMismatch {
            expected: n,
            got: col.len(),
        });
    }
    if n <= k + 1 {
        return Err(Error::TooShort {
            needed: k + 2,
            got: n,
        });
    }
    let names: Vec<String> = std::iter::once(INTERCEPT.to_string())
        .chain(regressors.iter().map(|(name, _)| name.clone()))
        .collect();
    let x = DMatrix::from_fn(n, k + 1, |i, j| if j == 0 { 1.0 } else { regressors[j - 1].1[i] });
    let ls = least_squares(&x, y).map_err(|cols| Error::RankDeficient {
        columns: cols.into_iter().map(|c| names[c].clone()).collect(),
    })?;

    let df = (n - k - 1) as f64;
    let s2 = ls.sse / df;
    let mean_y = y.iter().sum::<f64>() / n as f64;
    let sst: f64 = y.iter().map(|v| (v - mean_y).powi(2)).sum();
    let (r_squared, f_stat, f_p_value) = if sst > 0.0 {
        let r2 = (1.0 - ls.sse / sst).clamp(0.0, 1.0);
        let ssr = (sst - ls.sse).max(0.0);
        let f = if ls.sse > 0.0 {
            (ssr / k as f64) / s2
        } else {
            f64::INFINITY
        };
        let p = if k == 0 { 1.0 } else { f_survival(f, k as f64, df) };
        (r2, f, p)
    } else {
        (0.0, 0.0, 1.0)
    };
    let adj_r_squared = 1.0 - (1.0 - r_squared) * (n as f64 - 1.0) / df;

    let stderr: Vec<f64> = (0..=k).map(|j| (s2 * ls.unscaled_cov[(j, j)]).max(0.0).sqrt()).collect();
    let (t_stats, p_values) = ls
        .coefficients
        .iter()
        .zip(&stderr)
        .map(|(&b, &se)| t_and_p(b, se, df))
        .unzip();
    let fitted = y.iter().zip(&ls.residuals).map(|(a, e)| a - e).collect();
    Ok(OlsFit {
        names,
        coefficients: ls.coefficients,
        stderr,
        t_stats,
        p_values,
        r_squared,
        adj_r_squared,
        f_stat,
        f_p_value,
        residuals: ls.residuals,
        fitted,
        sse: ls.sse,
        n,
        k,
    })
}

pub const R_SQUARED_THRESHOLD: f64 = 0.50;
pub const P_VALUE_THRESHOLD: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct Significance {
    pub overall: bool,
    pub basis: String,
    /// One flag per regressor (the intercept is not assessed).
    pub per_variable: Vec<(String, bool)>,
}

/// Overall: `R² > 0.50` and F p-value `< 0.05`; per variable: p `< 0.05`.
pub fn significance_assessment(fit: &OlsFit) -> Significance {
    let r2_ok = fit.r_squared > R_SQUARED_THRESHOLD;
    let f_ok = fit.f_p_value < P_VALUE_THRESHOLD;
    let basis = match (r2_ok, f_ok) {
        (true, true) => format!(
            "R² = {:.4} > {R_SQUARED_THRESHOLD} and F p-value = {:.3e} < {P_VALUE_THRESHOLD}",
            fit.r_squared, fit.f_p_value
        ),
        (false, true) => format!("R² = {:.4} does not exceed {R_SQUARED_THRESHOLD}", fit.r_squared),
        (true, false) => format!(
            "F p-value = {:.3e} is not below {P_VALUE_THRESHOLD}",
            fit.f_p_value
        ),
        (false, false) => format!(
            "R² = {:.4} does not exceed {R_SQUARED_THRESHOLD} and F p-value = {:.3e} is not below {P_VALUE_THRESHOLD}",
            fit.r_squared, fit.f_p_value
        ),
    };
    Significance {
        overall: r2_ok && f_ok,
        basis,
        per_variable: fit.names[1..]
            .iter()
            .zip(&fit.p_values[1..])
            .map(|(name, p)| (name.clone(), *p < P_VALUE_THRESHOLD))
            .collect(),
    }
}

/// Feeds future regressor rows through the fitted equation, with
/// `F ± z√(SSE/n)` bounds.
pub fn regression_forecast(fit: &OlsFit, rows: &[Vec<f64>], level: ConfidenceLevel) -> Result<ForecastResult> {
    let future: Vec<f64> = rows.iter().map(|r| fit.predict(r)).collect::<Result<_>>()?;
    let actual: Vec<f64> = fit.fitted.iter().zip(&fit.residuals).map(|(f, e)| f + e).collect();
    let (lower, upper) = confidence_interval(&future, fit.mse(), level)?;
    let mut result = ForecastResult::from_fitted(
        &actual,
        fit.fitted.iter().map(|&f| Some(f)).collect(),
        future,
        "OLS regression",
    );
    result.intervals = Some(Intervals {
        z: level.z(),
        lower,
        upper,
    });
    Ok(result)
}

/// How each regressor is extrapolated before entering the equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RegressorMethod {
    Holt,
    Arima(ModelOrder),
}

#[derive(Debug, Clone)]
pub struct RegressionForecast {
    pub fit: OlsFit,
    pub regressor_forecasts: Vec<(String, ForecastResult)>,
    pub forecast: ForecastResult,
}

fn forecast_regressor(ts: &TimeSeries, h: usize, method: RegressorMethod) -> Result<ForecastResult> {
    match method {
        RegressorMethod::Holt => Ok(holt_fit(ts, TrendKind::Additive, &ParamSpec::OPTIMIZE)?.forecast(h)),
        RegressorMethod::Arima(order) => {
            let fit = arima_fit(ts, order, order.default_intercept())?;
            Ok(ForecastResult::from_fitted(
                ts.values(),
                fit.fitted(),
                fit.future(h),
                order.to_string(),
            ))
        }
    }
}

/// OLS on the common span, regressors extrapolated `h` steps with `method`,
/// then combined through the fitted equation.
pub fn forecast_with_regressors(
    y: &TimeSeries,
    regressors: &[TimeSeries],
    h: usize,
    method: RegressorMethod,
    level: ConfidenceLevel,
) -> Result<RegressionForecast> {
    for x in regressors {
        if x.start() != y.start() || x.freq() != y.freq() || x.len() != y.len() {
            return Err(Error::InvalidInput(format!(
                "regressor {} is not aligned with {} (same start, frequency and length required)",
                x.name(),
                y.name()
            )));
        }
    }
    let columns: Vec<(String, Vec<f64>)> = regressors
        .iter()
        .map(|x| (x.name().to_string(), x.values().to_vec()))
        .collect();
    let fit = ols_fit(y.values(), &columns)?;
    let regressor_forecasts: Vec<(String, ForecastResult)> = regressors
        .par_iter()
        .map(|x| {
            forecast_regressor(x, h, method)
                .map(|f| (x.name().to_string(), f))
                .map_err(|e| Error::Regressor {
                    name: x.name().to_string(),
                    source: Box::new(e),
                })
        })
        .collect::<Result<_>>()?;
    let rows: Vec<Vec<f64>> = (0..h)
        .map(|i| regressor_forecasts.iter().map(|(_, f)| f.future[i]).collect())
        .collect();
    let mut forecast = regression_forecast(&fit, &rows, level)?;
    forecast.method = format!("OLS regression with {} regressor forecasts", method_label(method));
    Ok(RegressionForecast {
        fit,
        regressor_forecasts,
        forecast,
    })
}

fn method_label(method: RegressorMethod) -> String {
    match method {
        RegressorMethod::Holt => "Holt linear".to_string(),
        RegressorMethod::Arima(order) => order.to_string(),
    }
}

/// `response ~ x1 + x2 + ...`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Formula {
    pub response: String,
    pub regressors: Vec<String>,
}

impl std::str::FromStr for Formula {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let bad = |why: &str| Error::InvalidInput(format!("formula {text:?}: {why}"));
        let (lhs, rhs) = text.split_once('~').ok_or_else(|| bad("missing '~'"))?;
        let response = lhs.trim();
        if response.is_empty() {
            return Err(bad("missing response name"));
        }
        let regressors: Vec<String> = rhs.split('+').map(|t| t.trim().to_string()).collect();
        if regressors.iter().any(|r| r.is_empty()) {
            return Err(bad("empty regressor term"));
        }
        for (i, r) in regressors.iter().enumerate() {
            if r.contains(|c: char| "~*:()^".contains(c)) {
                return Err(bad("terms must be plain column names"));
            }
            if r == response || regressors[..i].contains(r) {
                return Err(bad("duplicate term"));
            }
        }
        Ok(Formula {
            response: response.to_string(),
            regressors,
        })
    }
}
