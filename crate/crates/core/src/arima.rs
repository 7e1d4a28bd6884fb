//! Seasonal ARIMA by conditional sum of squares, with ψ-weight prediction
//! intervals, AIC grid search and ACF/PACF order suggestion.
//!
//! Moving-average polynomials use the minus convention `θ(B) = 1 − Σ θ_j B^j`.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::baseline::{ConfidenceLevel, ForecastResult, Intervals};
use crate::diagnostics::{acf, pacf, Correlogram};
use crate::error::{Error, Result};
use crate::optim::{multi_start, Bounds, Options};
use crate::series::TimeSeries;
use crate::stats::normal_quantile;
use crate::transform::{difference_slice, invert_difference_slice, DifferenceSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModelOrder {
    pub p: usize,
    pub d: usize,
    pub q: usize,
    pub seasonal_p: usize,
    pub seasonal_d: usize,
    pub seasonal_q: usize,
    pub s: usize,
}

impl ModelOrder {
    pub fn new(p: usize, d: usize, q: usize) -> Self {
        ModelOrder {
            p,
            d,
            q,
            seasonal_p: 0,
            seasonal_d: 0,
            seasonal_q: 0,
            s: 1,
        }
    }

    pub fn with_seasonal(self, seasonal_p: usize, seasonal_d: usize, seasonal_q: usize, s: usize) -> Self {
        ModelOrder {
            seasonal_p,
            seasonal_d,
            seasonal_q,
            s,
            ..self
        }
    }

    /// Rejects `s = 0`, seasonal terms without a season, and the all-zero model.
    pub fn validate(&self) -> Result<()> {
        if self.s == 0 {
            return Err(Error::InvalidInput("seasonal period must be at least 1".into()));
        }
        if self.s == 1 && self.seasonal_p + self.seasonal_d + self.seasonal_q > 0 {
            return Err(Error::InvalidInput(
                "seasonal orders need a seasonal period s ≥ 2".into(),
            ));
        }
        if self.arma_count() == 0 && self.d + self.seasonal_d == 0 {
            return Err(Error::InvalidInput(
                "the all-zero order has nothing to estimate".into(),
            ));
        }
        Ok(())
    }

    /// `p + q + P + Q`.
    pub fn arma_count(&self) -> usize {
        self.p + self.q + self.seasonal_p + self.seasonal_q
    }

    /// Observations consumed by differencing.
    pub fn differencing_span(&self) -> usize {
        self.d + self.s * self.seasonal_d
    }

    pub fn is_seasonal(&self) -> bool {
        self.s > 1
    }

    /// Intercept by default only without differencing.
    pub fn default_intercept(&self) -> bool {
        self.d + self.seasonal_d == 0
    }

    fn tuple(&self) -> (usize, usize, usize, usize, usize, usize) {
        (self.p, self.d, self.q, self.seasonal_p, self.seasonal_d, self.seasonal_q)
    }
}

impl std::fmt::Display for ModelOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "ARIMA({},{},{})", self.p, self.d, self.q)?;
        if self.is_seasonal() {
            write!(
                f,
                "({},{},{})[{}]",
                self.seasonal_p, self.seasonal_d, self.seasonal_q, self.s
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArimaFit {
    pub order: ModelOrder,
    pub ar: Vec<f64>,
    pub ma: Vec<f64>,
    pub seasonal_ar: Vec<f64>,
    pub seasonal_ma: Vec<f64>,
    /// `c = μ·a(1)` where `a` is the full autoregressive polynomial.
    pub intercept: Option<f64>,
    /// Mean of the differenced series, when an intercept is fitted.
    pub mean: Option<f64>,
    pub sigma2: f64,
    pub aic: f64,
    pub loglik: f64,
    /// One-step residuals on the differenced scale.
    pub residuals: Vec<f64>,
    pub n_effective: usize,
    pub optimizer_warning: bool,
    series: TimeSeries,
    differenced: Vec<f64>,
}

impl ArimaFit {
    pub fn series(&self) -> &TimeSeries {
        &self.series
    }

    /// Parameter count used by AIC, including the innovation variance.
    pub fn parameter_count(&self) -> usize {
        self.order.arma_count() + usize::from(self.intercept.is_some()) + 1
    }

    fn polynomials(&self) -> (Vec<f64>, Vec<f64>) {
        (
            lag_poly(&self.ar, &self.seasonal_ar, self.order.s),
            lag_poly(&self.ma, &self.seasonal_ma, self.order.s),
        )
    }

    /// One-step in-sample forecasts on the original scale.
    pub fn fitted(&self) -> Vec<Option<f64>> {
        let offset = self.order.differencing_span();
        let y = self.series.values();
        (0..y.len())
            .map(|t| (t >= offset).then(|| y[t] - self.residuals[t - offset]))
            .collect()
    }

    /// Forecast error variances for steps `1..=h`.
    pub fn forecast_variance(&self, h: usize) -> Vec<f64> {
        let psi = self.psi_weights(h);
        let mut acc = 0.0;
        psi.iter()
            .map(|w| {
                acc += w * w;
                self.sigma2 * acc
            })
            .collect()
    }

    /// First `h` MA(∞) weights of the full model, differencing included.
    pub fn psi_weights(&self, h: usize) -> Vec<f64> {
        let (ar, ma) = self.polynomials();
        // operator polynomial coefficients: 1 − Σ a_k B^k, times differencing
        let mut full: Vec<f64> = std::iter::once(1.0).chain(ar[1..].iter().map(|a| -a)).collect();
        for _ in 0..self.order.d {
            full = multiply(&full, &[1.0, -1.0]);
        }
        for _ in 0..self.order.seasonal_d {
            let mut seasonal = vec![0.0; self.order.s + 1];
            seasonal[0] = 1.0;
            seasonal[self.order.s] = -1.0;
            full = multiply(&full, &seasonal);
        }
        let a: Vec<f64> = full.iter().map(|c| -c).collect();
        let mut psi = Vec::with_capacity(h);
        for j in 0..h {
            if j == 0 {
                psi.push(1.0);
                continue;
            }
            let mut v = -ma.get(j).copied().unwrap_or(0.0);
            for k in 1..=j.min(a.len() - 1) {
                v += a[k] * psi[j - k];
            }
            psi.push(v);
        }
        psi
    }

    /// Point forecasts on the original scale for steps `1..=h`.
    pub fn future(&self, h: usize) -> Vec<f64> {
        let (ar, ma) = self.polynomials();
        let mu = self.mean.unwrap_or(0.0);
        let n = self.differenced.len();
        let mut z: Vec<f64> = self.differenced.iter().map(|w| w - mu).collect();
        let mut e = self.residuals.clone();
        for _ in 0..h {
            let t = z.len();
            let mut v = 0.0;
            for (k, a) in ar.iter().enumerate().skip(1) {
                if *a != 0.0 && t >= k {
                    v += a * z[t - k];
                }
            }
            for (k, m) in ma.iter().enumerate().skip(1) {
                if *m != 0.0 && t >= k {
                    v -= m * e[t - k];
                }
            }
            z.push(v);
            e.push(0.0);
        }
        let w_future: Vec<f64> = z[n..].iter().map(|v| v + mu).collect();
        undifference(self.series.values(), &self.order, &w_future)
    }
}

/// Maps differenced-scale forecasts back to the original scale.
fn undifference(y: &[f64], order: &ModelOrder, w_future: &[f64]) -> Vec<f64> {
    let mut current = w_future.to_vec();
    if order.d > 0 {
        let spec = DifferenceSpec::new(1, order.d).expect("positive order");
        let seasonal_level = match order.seasonal_d {
            0 => y.to_vec(),
            sd => difference_slice(y, DifferenceSpec::new(order.s, sd).expect("positive order"))
                .expect("length checked at fit time"),
        };
        let presample = &seasonal_level[seasonal_level.len() - order.d..];
        current = invert_difference_slice(&current, spec, presample)
            .expect("presample has span length")[order.d..]
            .to_vec();
    }
    if order.seasonal_d > 0 {
        let spec = DifferenceSpec::new(order.s, order.seasonal_d).expect("positive order");
        let presample = &y[y.len() - spec.span()..];
        current = invert_difference_slice(&current, spec, presample)
            .expect("presample has span length")[spec.span()..]
            .to_vec();
    }
    current
}

fn multiply(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Coefficients `c_k` of `1 − Σ c_k B^k = (1 − Σ φ_i B^i)(1 − Σ Φ_j B^{js})`;
/// `c_0` is unused and zero.
fn lag_poly(nonseasonal: &[f64], seasonal: &[f64], s: usize) -> Vec<f64> {
    let a: Vec<f64> = std::iter::once(1.0).chain(nonseasonal.iter().map(|c| -c)).collect();
    let mut b = vec![0.0; seasonal.len() * s + 1];
    b[0] = 1.0;
    for (j, c) in seasonal.iter().enumerate() {
        b[(j + 1) * s] = -c;
    }
    let mut out: Vec<f64> = multiply(&a, &b).iter().map(|c| -c).collect();
    out[0] = 0.0;
    out
}

/// Largest modulus among the inverse roots of `1 − Σ c_i z^i`; below one
/// means all roots lie outside the unit circle.
pub fn spectral_radius(coefficients: &[f64]) -> f64 {
    let mut c = coefficients;
    while let Some((last, rest)) = c.split_last() {
        if *last != 0.0 {
            break;
        }
        c = rest;
    }
    match c.len() {
        0 => 0.0,
        1 => c[0].abs(),
        2 => {
            let disc = c[0] * c[0] + 4.0 * c[1];
            if disc >= 0.0 {
                let r = disc.sqrt();
                ((c[0] + r) / 2.0).abs().max(((c[0] - r) / 2.0).abs())
            } else {
                (-c[1]).sqrt()
            }
        }
        p => {
            let mut m = DMatrix::<f64>::zeros(p, p);
            for (j, v) in c.iter().enumerate() {
                m[(0, j)] = *v;
            }
            for i in 1..p {
                m[(i, i - 1)] = 1.0;
            }
            m.complex_eigenvalues()
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max)
        }
    }
}

const RADIUS_LIMIT: f64 = 0.999;
const PENALTY_WEIGHT: f64 = 1e6;
const COEFFICIENT_BOUND: f64 = 4.0;

/// AR, MA, seasonal AR, seasonal MA and intercept slices of a parameter vector.
type Split<'a> = (&'a [f64], &'a [f64], &'a [f64], &'a [f64], Option<f64>);

struct Layout {
    p: usize,
    q: usize,
    sp: usize,
    sq: usize,
    intercept: bool,
}

impl Layout {
    fn dim(&self) -> usize {
        self.p + self.q + self.sp + self.sq + usize::from(self.intercept)
    }

    fn split<'a>(&self, x: &'a [f64]) -> Split<'a> {
        let (ar, rest) = x.split_at(self.p);
        let (ma, rest) = rest.split_at(self.q);
        let (sar, rest) = rest.split_at(self.sp);
        let (sma, rest) = rest.split_at(self.sq);
        (ar, ma, sar, sma, rest.first().copied())
    }
}

fn css_residuals(w: &[f64], mu: f64, ar: &[f64], ma: &[f64]) -> Vec<f64> {
    let a: Vec<(usize, f64)> = ar.iter().copied().enumerate().skip(1).filter(|(_, c)| *c != 0.0).collect();
    let m: Vec<(usize, f64)> = ma.iter().copied().enumerate().skip(1).filter(|(_, c)| *c != 0.0).collect();
    let z: Vec<f64> = w.iter().map(|v| v - mu).collect();
    let mut e = Vec::with_capacity(z.len());
    for t in 0..z.len() {
        let mut v = z[t];
        for &(k, c) in &a {
            if t >= k {
                v -= c * z[t - k];
            }
        }
        for &(k, c) in &m {
            if t >= k {
                v += c * e[t - k];
            }
        }
        e.push(v);
    }
    e
}

fn radius_penalty(polys: [&[f64]; 4]) -> f64 {
    polys
        .iter()
        .map(|c| (spectral_radius(c) - RADIUS_LIMIT).max(0.0).powi(2))
        .sum::<f64>()
        * PENALTY_WEIGHT
}

/// Yule–Walker AR(p) estimate, used as a starting point.
fn yule_walker(w: &[f64], p: usize) -> Option<Vec<f64>> {
    if p == 0 || w.len() <= p + 1 {
        return None;
    }
    let r = acf(w, p).ok()?.coefficients;
    let toeplitz = DMatrix::from_fn(p, p, |i, j| r[i.abs_diff(j)]);
    let rhs = nalgebra::DVector::from_iterator(p, r[1..=p].iter().copied());
    let phi = toeplitz.lu().solve(&rhs)?;
    let phi: Vec<f64> = phi.iter().copied().collect();
    (spectral_radius(&phi) < RADIUS_LIMIT).then_some(phi)
}

/// Conditional-sum-of-squares fit of `order`, optionally with an intercept.
pub fn arima_fit(ts: &TimeSeries, order: ModelOrder, with_intercept: bool) -> Result<ArimaFit> {
    order.validate()?;
    let y = ts.values();
    let needed = order.differencing_span()
        + (order.p + order.s * order.seasonal_p).max(order.q + order.s * order.seasonal_q)
        + 11;
    if y.len() < needed {
        return Err(Error::TooShort {
            needed,
            got: y.len(),
        });
    }
    let mut w = y.to_vec();
    if order.seasonal_d > 0 {
        w = difference_slice(&w, DifferenceSpec::new(order.s, order.seasonal_d)?)?;
    }
    if order.d > 0 {
        w = difference_slice(&w, DifferenceSpec::new(1, order.d)?)?;
    }
    let n_eff = w.len();
    let w_mean = w.iter().sum::<f64>() / n_eff as f64;
    let w_var = w.iter().map(|v| (v - w_mean).powi(2)).sum::<f64>() / n_eff as f64;
    let w_scale = if w_var > 0.0 { w_var.sqrt() } else { w_mean.abs().max(1.0) };
    let layout = Layout {
        p: order.p,
        q: order.q,
        sp: order.seasonal_p,
        sq: order.seasonal_q,
        intercept: with_intercept,
    };
    let s = order.s;
    let decode_mu = |scaled: Option<f64>| scaled.map(|m| w_mean + w_scale * m);
    let norm = w_scale * w_scale * n_eff as f64;
    let objective = |x: &[f64]| {
        let (ar, ma, sar, sma, mu) = layout.split(x);
        let e = css_residuals(&w, decode_mu(mu).unwrap_or(0.0), &lag_poly(ar, sar, s), &lag_poly(ma, sma, s));
        let sse: f64 = e.iter().map(|v| v * v).sum();
        sse / norm + radius_penalty([ar, ma, sar, sma])
    };

    let dim = layout.dim();
    let (x, warning) = if dim == 0 {
        (Vec::new(), false)
    } else {
        let mut lower = vec![-COEFFICIENT_BOUND; dim];
        let mut upper = vec![COEFFICIENT_BOUND; dim];
        if with_intercept {
            lower[dim - 1] = f64::NEG_INFINITY;
            upper[dim - 1] = f64::INFINITY;
        }
        let bounds = Bounds::new(lower, upper);
        // zeros and Yule–Walker AR, each with MA terms at 0 and ±0.3
        let mut bases = vec![vec![0.0; dim]];
        if let Some(phi) = yule_walker(&w, order.p) {
            let mut start = vec![0.0; dim];
            start[..order.p].copy_from_slice(&phi);
            bases.push(start);
        }
        let ma_slots: Vec<usize> = (order.p..order.p + order.q)
            .chain(order.p + order.q + order.seasonal_p..order.arma_count())
            .collect();
        let mut starts = Vec::new();
        for base in bases {
            starts.push(base.clone());
            if !ma_slots.is_empty() {
                for v in [0.3, -0.3] {
                    let mut start = base.clone();
                    ma_slots.iter().for_each(|&i| start[i] = v);
                    starts.push(start);
                }
            }
        }
        let opts = Options {
            initial_step: 0.1 / (2.0 * COEFFICIENT_BOUND),
            ..Options::default()
        };
        let result = multi_start(&objective, &starts, &bounds, &opts);
        if !result.best.f.is_finite() {
            return Err(Error::OptimizerFailed(format!("no finite sum of squares for {order}")));
        }
        (result.best.x, result.warning)
    };

    let (ar, ma, sar, sma, mu) = layout.split(&x);
    for (name, poly) in [("AR", ar), ("MA", ma), ("seasonal AR", sar), ("seasonal MA", sma)] {
        if spectral_radius(poly) >= 1.0 {
            return Err(Error::NonStationary { polynomial: name });
        }
    }
    let mean = decode_mu(mu);
    let full_ar = lag_poly(ar, sar, s);
    let residuals = css_residuals(&w, mean.unwrap_or(0.0), &full_ar, &lag_poly(ma, sma, s));
    let sse: f64 = residuals.iter().map(|v| v * v).sum();
    if sse <= 0.0 || !sse.is_finite() {
        return Err(Error::Degenerate(format!(
            "{order} leaves a residual sum of squares of {sse}; the likelihood is undefined"
        )));
    }
    let sigma2 = sse / n_eff as f64;
    let loglik = -(n_eff as f64 / 2.0) * ((2.0 * std::f64::consts::PI * sigma2).ln() + 1.0);
    let k = order.arma_count() + usize::from(with_intercept) + 1;
    let aic = -2.0 * loglik + 2.0 * k as f64;
    let intercept = mean.map(|m| m * (1.0 - full_ar.iter().sum::<f64>()));
    Ok(ArimaFit {
        order,
        ar: ar.to_vec(),
        ma: ma.to_vec(),
        seasonal_ar: sar.to_vec(),
        seasonal_ma: sma.to_vec(),
        intercept,
        mean,
        sigma2,
        aic,
        loglik,
        residuals,
        n_effective: n_eff,
        optimizer_warning: warning,
        series: ts.clone(),
        differenced: w,
    })
}

/// Point forecasts with `±z·√variance` bounds from the ψ-weights.
pub fn arima_forecast(fit: &ArimaFit, h: usize, level: ConfidenceLevel) -> Result<ForecastResult> {
    if h == 0 {
        return Err(Error::InvalidInput("forecast horizon must be at least 1".into()));
    }
    let future = fit.future(h);
    let z = level.z();
    let (lower, upper) = future
        .iter()
        .zip(fit.forecast_variance(h))
        .map(|(f, v)| (f - z * v.sqrt(), f + z * v.sqrt()))
        .unzip();
    let mut result = ForecastResult::from_fitted(
        fit.series.values(),
        fit.fitted(),
        future,
        fit.order.to_string(),
    );
    result.intervals = Some(Intervals { z, lower, upper });
    Ok(result)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub order: ModelOrder,
    /// AIC, or the reason the fit was skipped.
    pub outcome: std::result::Result<f64, String>,
}

#[derive(Debug, Clone)]
pub struct SearchResult {
    pub best: ModelOrder,
    pub best_fit: ArimaFit,
    pub table: Vec<Candidate>,
}

fn search(ts: &TimeSeries, orders: Vec<ModelOrder>) -> Result<SearchResult> {
    let fits: Vec<(ModelOrder, Result<ArimaFit>)> = orders
        .into_par_iter()
        .map(|o| (o, arima_fit(ts, o, o.default_intercept())))
        .collect();
    let mut best: Option<ArimaFit> = None;
    let mut table = Vec::with_capacity(fits.len());
    for (order, outcome) in fits {
        match outcome {
            Ok(fit) => {
                table.push(Candidate {
                    order,
                    outcome: Ok(fit.aic),
                });
                let replace = best.as_ref().is_none_or(|b| {
                    (fit.aic, fit.parameter_count(), order.tuple())
                        .partial_cmp(&(b.aic, b.parameter_count(), b.order.tuple()))
                        .is_some_and(|o| o.is_lt())
                });
                if replace {
                    best = Some(fit);
                }
            }
            Err(e) => table.push(Candidate {
                order,
                outcome: Err(e.to_string()),
            }),
        }
    }
    let best_fit = best.ok_or(Error::AllCandidatesFailed)?;
    Ok(SearchResult {
        best: best_fit.order,
        best_fit,
        table,
    })
}

/// Smallest-AIC `(p,d,q)` over `[0,p_max]×[0,d_max]×[0,q_max]`; failed fits
/// are recorded and skipped.
pub fn auto_order_search(ts: &TimeSeries, p_max: usize, d_max: usize, q_max: usize) -> Result<SearchResult> {
    let mut orders = Vec::new();
    for p in 0..=p_max {
        for d in 0..=d_max {
            for q in 0..=q_max {
                let o = ModelOrder::new(p, d, q);
                if o.validate().is_ok() {
                    orders.push(o);
                }
            }
        }
    }
    search(ts, orders)
}

/// Grid over `p,d,q,P,D,Q ∈ [0, bound]` at fixed seasonal period `s`.
pub fn auto_seasonal_search(ts: &TimeSeries, s: usize, bound: usize) -> Result<SearchResult> {
    if s < 2 {
        return Err(Error::InvalidInput(format!("seasonal period must be at least 2, got {s}")));
    }
    let r = 0..=bound;
    let mut orders = Vec::new();
    for p in r.clone() {
        for d in r.clone() {
            for q in r.clone() {
                for sp in r.clone() {
                    for sd in r.clone() {
                        for sq in r.clone() {
                            let o = ModelOrder::new(p, d, q).with_seasonal(sp, sd, sq, s);
                            if o.validate().is_ok() {
                                orders.push(o);
                            }
                        }
                    }
                }
            }
        }
    }
    search(ts, orders)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Suggestion {
    pub order: ModelOrder,
    pub rationale: String,
}

fn leading_run(c: &Correlogram, lags: impl Iterator<Item = usize>) -> usize {
    lags.take_while(|&k| k <= c.max_lag() && c.is_significant(k)).count()
}

/// Order implied by a cut-off: the longer of the leading run of significant
/// lags and the last strong (twice the band) spike within `max_consider`.
fn cutoff(c: &Correlogram, max_consider: usize) -> usize {
    let run = leading_run(c, 1..);
    let strong = (1..=max_consider.min(c.max_lag()))
        .filter(|&k| c.at(k).abs() > 2.0 * c.band)
        .max()
        .unwrap_or(0);
    run.max(strong)
}

/// Reads AR/MA orders off the ACF/PACF of an already stationary series.
pub fn suggest_order(values: &[f64], s: usize, max_consider: usize) -> Result<Suggestion> {
    if max_consider == 0 || max_consider > 10 {
        return Err(Error::InvalidInput(format!(
            "max_consider must lie in 1..=10, got {max_consider}"
        )));
    }
    let n = values.len();
    let seasonal = s >= 2;
    let wanted = (2 * max_consider).max(if seasonal { 3 * s } else { 0 });
    let lags = wanted.min(n / 2);
    if lags < max_consider + 1 {
        return Err(Error::TooShort {
            needed: 2 * (max_consider + 1),
            got: n,
        });
    }
    let r = acf(values, lags)?;
    let phi = pacf(values, lags)?;

    let p_star = cutoff(&phi, max_consider);
    let q_star = cutoff(&r, max_consider);
    let acf_run = leading_run(&r, 1..);
    let pacf_run = leading_run(&phi, 1..);
    let ar = p_star >= 1 && p_star <= max_consider && acf_run > p_star;
    let ma = q_star >= 1 && q_star <= max_consider && pacf_run > q_star;

    let mut order = ModelOrder::new(0, 0, 0);
    let mut notes = Vec::new();
    match (ar, ma) {
        (true, false) => {
            order.p = p_star;
            notes.push(format!(
                "PACF cuts off after lag {p_star} while the ACF decays over {acf_run} lags: AR({p_star})"
            ));
        }
        (false, true) => {
            order.q = q_star;
            notes.push(format!(
                "ACF cuts off after lag {q_star} while the PACF decays over {pacf_run} lags: MA({q_star})"
            ));
        }
        (true, true) => {
            order.p = p_star;
            order.q = q_star;
            notes.push(format!(
                "both ACF and PACF tail off (AR up to {p_star}, MA up to {q_star}); defer to AIC search"
            ));
        }
        (false, false) => notes.push("no clear pure pattern; use AIC search".to_string()),
    }

    if seasonal {
        let seasonal_lags = |c: &Correlogram| leading_run(c, (1..=3).map(|j| j * s));
        let (sp_run, sq_run) = (seasonal_lags(&phi), seasonal_lags(&r));
        if sp_run >= 1 && sq_run > sp_run {
            order = order.with_seasonal(sp_run, 0, 0, s);
            notes.push(format!(
                "seasonal PACF spikes at {sp_run} multiple(s) of {s} with decaying seasonal ACF: seasonal AR({sp_run})"
            ));
        } else if sq_run >= 1 && sp_run > sq_run {
            order = order.with_seasonal(0, 0, sq_run, s);
            notes.push(format!(
                "seasonal ACF spikes at {sq_run} multiple(s) of {s} with decaying seasonal PACF: seasonal MA({sq_run})"
            ));
        } else if sq_run >= 1 {
            order = order.with_seasonal(sp_run, 0, sq_run, s);
            notes.push(format!(
                "seasonal spikes at lag {s} in both ACF and PACF; defer to AIC search"
            ));
        } else {
            order.s = s;
        }
    }
    Ok(Suggestion {
        order,
        rationale: notes.join("; "),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    /// Bin edges from −4 to 4 in steps of 0.5; values beyond ±4 fall in the
    /// outermost bins so the counts always sum to the residual count.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArimaDiagnostics {
    pub residuals: TimeSeries,
    pub standardized: Vec<f64>,
    pub residual_acf: Correlogram,
    pub histogram: Histogram,
    /// (theoretical normal quantile, sorted standardized residual).
    pub qq_points: Vec<(f64, f64)>,
}

pub fn standardized_histogram(values: &[f64]) -> Histogram {
    let edges: Vec<f64> = (0..=16).map(|i| -4.0 + 0.5 * i as f64).collect();
    let mut counts = vec![0usize; 16];
    for v in values {
        let bin = ((v + 4.0) / 0.5).floor();
        let bin = if bin.is_nan() { 0 } else { bin.clamp(0.0, 15.0) as usize };
        counts[bin] += 1;
    }
    Histogram { edges, counts }
}

pub fn qq_points(values: &[f64]) -> Vec<(f64, f64)> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .into_iter()
        .enumerate()
        .map(|(i, v)| (normal_quantile((i as f64 + 0.5) / n), v))
        .collect()
}

/// Residual panel data: series, ACF, histogram and normal QQ pairs.
pub fn diagnostics_summary(fit: &ArimaFit) -> Result<ArimaDiagnostics> {
    let n = fit.residuals.len();
    if n < 20 {
        return Err(Error::TooShort { needed: 20, got: n });
    }
    if fit.sigma2.is_nan() || fit.sigma2 <= 0.0 {
        return Err(Error::Degenerate("residual variance is zero".into()));
    }
    let sd = fit.sigma2.sqrt();
    let standardized: Vec<f64> = fit.residuals.iter().map(|e| e / sd).collect();
    let lags = 20usize.max(2 * fit.order.s).min(n - 1);
    let residuals = fit
        .series
        .with_values_shifted(fit.residuals.clone(), fit.order.differencing_span() as i64)?
        .renamed(format!("{} residuals", fit.series.name()));
    Ok(ArimaDiagnostics {
        residuals,
        residual_acf: acf(&fit.residuals, lags)?,
        histogram: standardized_histogram(&standardized),
        qq_points: qq_points(&standardized),
        standardized,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::Frequency;
    use crate::simulate;
    use proptest::prelude::*;

    fn series(values: Vec<f64>) -> TimeSeries {
        TimeSeries::from_values(values, Frequency::MONTHLY).unwrap()
    }

    #[test]
    fn order_validation() {
        assert!(ModelOrder::new(0, 0, 0).validate().is_err());
        assert!(ModelOrder::new(0, 1, 0).validate().is_ok());
        assert!(ModelOrder::new(1, 0, 0).with_seasonal(1, 0, 0, 1).validate().is_err());
        assert!(ModelOrder::new(0, 0, 0).with_seasonal(0, 1, 0, 12).validate().is_ok());
        assert_eq!(ModelOrder::new(1, 1, 2).to_string(), "ARIMA(1,1,2)");
        assert_eq!(
            ModelOrder::new(0, 1, 1).with_seasonal(0, 1, 1, 12).to_string(),
            "ARIMA(0,1,1)(0,1,1)[12]"
        );
    }

    #[test]
    fn spectral_radius_cases() {
        assert_eq!(spectral_radius(&[]), 0.0);
        assert_eq!(spectral_radius(&[0.5, 0.0]), 0.5);
        // (1 − 0.5B)(1 − 0.4B) = 1 − 0.9B + 0.2B²
        assert!((spectral_radius(&[0.9, -0.2]) - 0.5).abs() < 1e-12);
        // complex pair of modulus √0.5
        assert!((spectral_radius(&[0.0, -0.5]) - 0.5f64.sqrt()).abs() < 1e-12);
        // (1 − 0.5B)(1 − 0.4B)(1 − 0.9B) has its largest inverse root at 0.9
        let c = lag_poly(&[0.9, -0.2], &[], 1);
        let cubic = multiply(
            &std::iter::once(1.0).chain(c[1..].iter().map(|v| -v)).collect::<Vec<_>>(),
            &[1.0, -0.9],
        );
        let coeffs: Vec<f64> = cubic[1..].iter().map(|v| -v).collect();
        assert!((spectral_radius(&coeffs) - 0.9).abs() < 1e-9);
    }

    #[test]
    fn seasonal_polynomial_product() {
        // (1 − 0.5B)(1 − 0.3B^4) = 1 − 0.5B − 0.3B^4 + 0.15B^5
        let c = lag_poly(&[0.5], &[0.3], 4);
        assert_eq!(c, vec![0.0, 0.5, 0.0, 0.0, 0.3, -0.15]);
    }

    #[test]
    fn random_walk_model_is_exact() {
        let y = simulate::random_walk(60, 100.0, 1.0, 4);
        let ts = series(y.clone());
        let fit = arima_fit(&ts, ModelOrder::new(0, 1, 0), false).unwrap();
        let diffs: Vec<f64> = y.windows(2).map(|w| w[1] - w[0]).collect();
        assert_eq!(fit.residuals, diffs);
        let sse: f64 = diffs.iter().map(|d| d * d).sum();
        let n = diffs.len() as f64;
        let loglik = -(n / 2.0) * ((2.0 * std::f64::consts::PI * sse / n).ln() + 1.0);
        assert_eq!(fit.loglik, loglik);
        assert_eq!(fit.aic, -2.0 * loglik + 2.0);
        let f = arima_forecast(&fit, 12, ConfidenceLevel::P95).unwrap();
        assert!(f.future.iter().all(|v| *v == y[59]));
        let iv = f.intervals.unwrap();
        for h in 0..12 {
            let half = iv.upper[h] - f.future[h];
            assert!((half - 1.96 * ((h + 1) as f64 * fit.sigma2).sqrt()).abs() < 1e-9);
        }
    }

    #[test]
    fn ar1_recovery_and_forecast_convergence() {
        let y = simulate::arma(&[0.7], &[], 3.0, 1.0, 500, 1);
        let fit = arima_fit(&series(y.clone()), ModelOrder::new(1, 0, 0), true).unwrap();
        assert!((fit.ar[0] - 0.7).abs() <= 0.1, "{:?}", fit.ar);
        let (c, phi) = (fit.intercept.unwrap(), fit.ar[0]);
        assert!((c / (1.0 - phi) - fit.mean.unwrap()).abs() < 1e-9);
        let f = fit.future(3);
        let mut prev = *y.last().unwrap();
        for v in f {
            let expected = c + phi * prev;
            assert!((v - expected).abs() < 1e-9);
            prev = v;
        }
        assert_eq!(fit.aic, -2.0 * fit.loglik + 2.0 * 3.0);
    }

    #[test]
    fn ma1_recovery() {
        let y = simulate::arma(&[], &[0.5], 0.0, 1.0, 500, 2);
        let fit = arima_fit(&series(y), ModelOrder::new(0, 0, 1), true).unwrap();
        assert!((fit.ma[0] - 0.5).abs() <= 0.1, "{:?}", fit.ma);
    }

    #[test]
    fn too_short_is_reported() {
        let ts = series(vec![1.0, 2.0, 3.0, 2.0, 1.0]);
        assert!(matches!(
            arima_fit(&ts, ModelOrder::new(1, 1, 2), false),
            Err(Error::TooShort { .. })
        ));
    }

    #[test]
    fn psi_weights_of_known_models() {
        let y = simulate::arma(&[0.6], &[], 0.0, 1.0, 300, 3);
        let fit = arima_fit(&series(y), ModelOrder::new(1, 0, 0), false).unwrap();
        let psi = fit.psi_weights(5);
        for (j, w) in psi.iter().enumerate() {
            assert!((w - fit.ar[0].powi(j as i32)).abs() < 1e-12);
        }
        let v = fit.forecast_variance(10);
        assert_eq!(v[0], fit.sigma2);
        assert!(v.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn seasonal_differencing_round_trip() {
        let pattern = [1.0, 4.0, 2.0, 8.0];
        let noise = simulate::white_noise(80, 0.2, 6);
        let y: Vec<f64> = (0..80).map(|t| 10.0 + 0.3 * t as f64 + pattern[t % 4] + noise[t]).collect();
        let order = ModelOrder::new(0, 1, 1).with_seasonal(0, 1, 1, 4);
        let fit = arima_fit(&series(y.clone()), order, false).unwrap();
        let f = fit.future(8);
        // continues trend and season: compare with last observed cycle shifted by trend
        for h in 0..8 {
            let same_phase = y[76 + h % 4] + 0.3 * (4 * (h / 4 + 1)) as f64;
            assert!((f[h] - same_phase).abs() < 1.5, "h={h}: {} vs {same_phase}", f[h]);
        }
        let fitted = fit.fitted();
        assert!(fitted[..5].iter().all(Option::is_none));
        assert!(fitted[5..].iter().all(Option::is_some));
    }

    #[test]
    fn search_table_sizes() {
        let y = simulate::arma(&[0.5], &[], 1.0, 1.0, 120, 7);
        let r = auto_order_search(&series(y), 1, 1, 1).unwrap();
        assert_eq!(r.table.len(), 7);
        let y: Vec<f64> = simulate::white_noise(96, 1.0, 1)
            .iter()
            .enumerate()
            .map(|(t, e)| 5.0 * (t as f64 * std::f64::consts::PI / 6.0).sin() + e)
            .collect();
        let r = auto_seasonal_search(&series(y), 12, 1).unwrap();
        assert_eq!(r.table.len(), 63);
    }

    #[test]
    fn suggestions() {
        let ar = simulate::arma(&[0.7], &[], 0.0, 1.0, 1000, 1);
        let s = suggest_order(&ar, 1, 10).unwrap();
        assert_eq!((s.order.p, s.order.d, s.order.q), (1, 0, 0), "{}", s.rationale);
        let ma = simulate::arma(&[], &[0.5], 0.0, 1.0, 1000, 1);
        let s = suggest_order(&ma, 1, 10).unwrap();
        assert_eq!((s.order.p, s.order.d, s.order.q), (0, 0, 1), "{}", s.rationale);
        let wn = simulate::white_noise(1000, 1.0, 1);
        let s = suggest_order(&wn, 1, 10).unwrap();
        assert_eq!((s.order.p, s.order.q), (0, 0));
        assert!(s.rationale.contains("no clear pure pattern"));
        assert!(suggest_order(&wn, 1, 11).is_err());
    }

    #[test]
    fn diagnostics_panels() {
        let y = simulate::arma(&[0.5], &[], 0.0, 1.0, 400, 12);
        let fit = arima_fit(&series(y), ModelOrder::new(1, 0, 0), true).unwrap();
        let d = diagnostics_summary(&fit).unwrap();
        assert_eq!(d.histogram.counts.iter().sum::<usize>(), fit.n_effective);
        let n = d.standardized.len() as f64;
        let mean = d.standardized.iter().sum::<f64>() / n;
        let var = d.standardized.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        assert!((var - 1.0).abs() < 0.1);
        assert_eq!(d.qq_points.len(), fit.n_effective);
    }

    #[test]
    fn qq_of_normal_sample_hugs_diagonal() {
        let e = simulate::white_noise(500, 1.0, 13);
        let pts = qq_points(&e);
        let lo = pts.len() / 20;
        for (t, s) in &pts[lo..pts.len() - lo] {
            assert!((t - s).abs() <= 0.3, "{t} {s}");
        }
    }

    proptest! {
        #[test]
        fn reproducible_fit(seed in 0u64..50) {
            let y = simulate::arma(&[0.4], &[0.3], 0.5, 1.0, 150, seed);
            let ts = series(y);
            let a = arima_fit(&ts, ModelOrder::new(1, 0, 1), true).unwrap();
            let b = arima_fit(&ts, ModelOrder::new(1, 0, 1), true).unwrap();
            prop_assert_eq!(&a, &b);
            prop_assert_eq!(a.aic, -2.0 * a.loglik + 2.0 * a.parameter_count() as f64);
            prop_assert!(spectral_radius(&a.ar) < 1.0 && spectral_radius(&a.ma) < 1.0);
        }

        #[test]
        fn interval_width_grows(seed in 0u64..50, d in 0usize..2) {
            let y = simulate::random_walk(80, 10.0, 1.0, seed);
            let fit = arima_fit(&series(y), ModelOrder::new(1, d, 1), d == 0).unwrap();
            let f = arima_forecast(&fit, 15, ConfidenceLevel::P90).unwrap();
            let iv = f.intervals.unwrap();
            let widths: Vec<f64> = iv.upper.iter().zip(&iv.lower).map(|(u, l)| u - l).collect();
            prop_assert!(widths.windows(2).all(|w| w[1] >= w[0] - 1e-12));
        }
    }
}
