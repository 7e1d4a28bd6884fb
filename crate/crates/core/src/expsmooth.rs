//! Exponential smoothing: SES, Holt's linear/exponential/damped trend and
//! additive or multiplicative Holt-Winters, with least-squares parameters.

use crate::baseline::{ConfidenceLevel, ForecastResult};
use crate::diagnostics::{acf, Correlogram};
use crate::error::{Error, Result};
use crate::optim::{multi_start, Bounds, Options};
use crate::series::TimeSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrendKind {
    None,
    Additive,
    Multiplicative,
    Damped,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeasonalKind {
    None,
    Additive,
    Multiplicative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelSpec {
    pub trend: TrendKind,
    pub seasonal: SeasonalKind,
    pub seasonal_periods: usize,
}

impl ModelSpec {
    pub fn ses() -> Self {
        ModelSpec {
            trend: TrendKind::None,
            seasonal: SeasonalKind::None,
            seasonal_periods: 1,
        }
    }

    pub fn holt(trend: TrendKind) -> Self {
        ModelSpec {
            trend,
            ..ModelSpec::ses()
        }
    }

    pub fn holt_winters(seasonal: SeasonalKind, seasonal_periods: usize) -> Self {
        ModelSpec {
            trend: TrendKind::Additive,
            seasonal,
            seasonal_periods,
        }
    }

    fn is_seasonal(&self) -> bool {
        self.seasonal != SeasonalKind::None
    }

    fn has_trend(&self) -> bool {
        self.trend != TrendKind::None
    }

    /// 0-based index of the first defined one-step forecast.
    fn first_fitted(&self) -> usize {
        if self.is_seasonal() {
            self.seasonal_periods + 1
        } else {
            1
        }
    }

    fn min_len(&self) -> usize {
        match (self.is_seasonal(), self.trend) {
            (true, _) => 2 * self.seasonal_periods + 1,
            (false, TrendKind::None) => 2,
            (false, _) => 3,
        }
    }

    pub fn label(&self) -> String {
        let trend = match self.trend {
            TrendKind::None => "none",
            TrendKind::Additive => "additive",
            TrendKind::Multiplicative => "multiplicative",
            TrendKind::Damped => "damped",
        };
        match (self.seasonal, self.trend) {
            (SeasonalKind::None, TrendKind::None) => "SES".to_string(),
            (SeasonalKind::None, _) => format!("Holt ({trend} trend)"),
            (seasonal, _) => format!(
                "Holt-Winters ({trend} trend, {} seasonal, s={})",
                if seasonal == SeasonalKind::Additive {
                    "additive"
                } else {
                    "multiplicative"
                },
                self.seasonal_periods
            ),
        }
    }

    fn validate(&self, values: &[f64]) -> Result<()> {
        if self.is_seasonal() {
            if self.trend != TrendKind::Additive {
                return Err(Error::Unsupported(
                    "seasonal models use an additive trend".into(),
                ));
            }
            if self.seasonal_periods < 2 {
                return Err(Error::InvalidInput(format!(
                    "seasonal period must be at least 2, got {}",
                    self.seasonal_periods
                )));
            }
        }
        if values.len() < self.min_len() {
            return Err(Error::TooShort {
                needed: self.min_len(),
                got: values.len(),
            });
        }
        let multiplicative = self.trend == TrendKind::Multiplicative
            || self.seasonal == SeasonalKind::Multiplicative;
        if multiplicative {
            if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| **v <= 0.0) {
                return Err(Error::Domain {
                    index,
                    value,
                    reason: "multiplicative components need strictly positive data",
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothingParams {
    pub alpha: f64,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    pub phi: Option<f64>,
}

/// Requested parameters; `None` marks a coordinate to optimise.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ParamSpec {
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    pub phi: Option<f64>,
}

impl ParamSpec {
    pub const OPTIMIZE: ParamSpec = ParamSpec {
        alpha: None,
        beta: None,
        gamma: None,
        phi: None,
    };

    pub fn fixed(p: SmoothingParams) -> Self {
        ParamSpec {
            alpha: Some(p.alpha),
            beta: p.beta,
            gamma: p.gamma,
            phi: p.phi,
        }
    }
}

const PHI_LOWER: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Slot {
    Alpha,
    Beta,
    Gamma,
    Phi,
}

fn slots(model: &ModelSpec) -> Vec<Slot> {
    let mut s = vec![Slot::Alpha];
    if model.has_trend() {
        s.push(Slot::Beta);
    }
    if model.is_seasonal() {
        s.push(Slot::Gamma);
    }
    if model.trend == TrendKind::Damped {
        s.push(Slot::Phi);
    }
    s
}

fn check_unit(name: &'static str, v: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(Error::InvalidParameter {
            name,
            value: v,
            reason: "must lie in [0, 1]",
        })
    }
}

fn validate_spec(model: &ModelSpec, spec: &ParamSpec) -> Result<()> {
    if let Some(a) = spec.alpha {
        check_unit("alpha", a)?;
    }
    let unused = |name: &str, what: &str| {
        Err(Error::InvalidInput(format!(
            "{name} was given but the model has no {what} component"
        )))
    };
    match spec.beta {
        Some(_) if !model.has_trend() => return unused("beta", "trend"),
        Some(b) => {
            check_unit("beta", b)?;
        }
        None => {}
    }
    match spec.gamma {
        Some(_) if !model.is_seasonal() => return unused("gamma", "seasonal"),
        Some(g) => {
            check_unit("gamma", g)?;
        }
        None => {}
    }
    match spec.phi {
        Some(_) if model.trend != TrendKind::Damped => return unused("phi", "damped trend"),
        Some(p) if !(p > 0.0 && p <= 1.0) => {
            return Err(Error::InvalidParameter {
                name: "phi",
                value: p,
                reason: "must lie in (0, 1]",
            })
        }
        _ => {}
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitialState {
    pub level: f64,
    pub trend: Option<f64>,
    pub seasonals: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
struct State {
    level: f64,
    trend: f64,
    /// Ring indexed by time modulo s; holds the latest index for each phase.
    season: Vec<f64>,
    /// Observations consumed so far (time of the next observation).
    time: usize,
}

fn damp_sum(phi: f64, h: usize) -> f64 {
    let mut acc = 0.0;
    let mut pow = 1.0;
    for _ in 0..h {
        pow *= phi;
        acc += pow;
    }
    acc
}

struct Engine<'a> {
    model: &'a ModelSpec,
    alpha: f64,
    beta: f64,
    gamma: f64,
    phi: f64,
}

impl Engine<'_> {
    fn new<'a>(model: &'a ModelSpec, p: &SmoothingParams) -> Engine<'a> {
        Engine {
            model,
            alpha: p.alpha,
            beta: p.beta.unwrap_or(0.0),
            gamma: p.gamma.unwrap_or(0.0),
            phi: p.phi.unwrap_or(1.0),
        }
    }

    fn predict(&self, st: &State, h: usize) -> f64 {
        let base = match self.model.trend {
            TrendKind::None => st.level,
            TrendKind::Additive | TrendKind::Damped => st.level + damp_sum(self.phi, h) * st.trend,
            TrendKind::Multiplicative => st.level * st.trend.powi(h as i32),
        };
        match self.model.seasonal {
            SeasonalKind::None => base,
            kind => {
                let s = self.model.seasonal_periods;
                let idx = st.season[(st.time + h - 1) % s];
                if kind == SeasonalKind::Additive {
                    base + idx
                } else {
                    base * idx
                }
            }
        }
    }

    fn update(&self, st: &mut State, y: f64) {
        let s = self.model.seasonal_periods;
        let slot = st.time % s;
        let old_season = st.season.get(slot).copied().unwrap_or(0.0);
        let deseasoned = match self.model.seasonal {
            SeasonalKind::None => y,
            SeasonalKind::Additive => y - old_season,
            SeasonalKind::Multiplicative => y / old_season,
        };
        let prior = match self.model.trend {
            TrendKind::None => st.level,
            TrendKind::Additive | TrendKind::Damped => st.level + self.phi * st.trend,
            TrendKind::Multiplicative => st.level * st.trend,
        };
        let level = self.alpha * deseasoned + (1.0 - self.alpha) * prior;
        st.trend = match self.model.trend {
            TrendKind::None => st.trend,
            TrendKind::Additive | TrendKind::Damped => {
                self.beta * (level - st.level) + (1.0 - self.beta) * self.phi * st.trend
            }
            TrendKind::Multiplicative => {
                self.beta * (level / st.level) + (1.0 - self.beta) * st.trend
            }
        };
        match self.model.seasonal {
            SeasonalKind::None => {}
            SeasonalKind::Additive => {
                st.season[slot] = self.gamma * (y - level) + (1.0 - self.gamma) * old_season
            }
            SeasonalKind::Multiplicative => {
                st.season[slot] = self.gamma * (y / level) + (1.0 - self.gamma) * old_season
            }
        }
        st.level = level;
        st.time += 1;
    }
}

/// Initial state and the reported initial components.
fn initialise(model: &ModelSpec, y: &[f64]) -> (State, InitialState) {
    if !model.is_seasonal() {
        let trend = match model.trend {
            TrendKind::None => 0.0,
            TrendKind::Multiplicative => y[1] / y[0],
            _ => y[1] - y[0],
        };
        let state = State {
            level: y[0],
            trend,
            season: Vec::new(),
            time: 1,
        };
        let initial = InitialState {
            level: y[0],
            trend: model.has_trend().then_some(trend),
            seasonals: None,
        };
        return (state, initial);
    }
    let s = model.seasonal_periods;
    let m1 = y[..s].iter().sum::<f64>() / s as f64;
    let m2 = y[s..2 * s].iter().sum::<f64>() / s as f64;
    let b0 = (m2 - m1) / s as f64;
    let centre = (s as f64 + 1.0) / 2.0;
    let line = |j: usize| m1 + b0 * ((j + 1) as f64 - centre);
    let mut seasonals: Vec<f64> = match model.seasonal {
        SeasonalKind::Additive => (0..s).map(|j| y[j] - line(j)).collect(),
        _ => (0..s).map(|j| y[j] / line(j)).collect(),
    };
    match model.seasonal {
        SeasonalKind::Additive => {
            let mean = seasonals.iter().sum::<f64>() / s as f64;
            seasonals.iter_mut().for_each(|v| *v -= mean);
        }
        _ => {
            let mean = seasonals.iter().sum::<f64>() / s as f64;
            seasonals.iter_mut().for_each(|v| *v /= mean);
        }
    }
    // level back-cast to time 0 along the first-season trend line
    let level = m1 - b0 * centre;
    let state = State {
        level,
        trend: b0,
        season: seasonals.clone(),
        time: 0,
    };
    let initial = InitialState {
        level,
        trend: Some(b0),
        seasonals: Some(seasonals),
    };
    (state, initial)
}

fn run(model: &ModelSpec, params: &SmoothingParams, y: &[f64]) -> (Vec<Option<f64>>, State, InitialState) {
    let engine = Engine::new(model, params);
    let (mut state, initial) = initialise(model, y);
    let first = model.first_fitted();
    let mut fitted = vec![None; y.len()];
    for (t, &obs) in y.iter().enumerate().skip(state.time) {
        if t >= first {
            fitted[t] = Some(engine.predict(&state, 1));
        }
        engine.update(&mut state, obs);
    }
    (fitted, state, initial)
}

fn mse_of(y: &[f64], fitted: &[Option<f64>]) -> f64 {
    let (sum, count) = y
        .iter()
        .zip(fitted)
        .filter_map(|(a, f)| f.map(|f| (a - f) * (a - f)))
        .fold((0.0, 0usize), |(s, c), e| (s + e, c + 1));
    sum / count as f64
}

/// In-sample one-step MSE for fully specified parameters.
pub fn mse_at(ts: &TimeSeries, model: &ModelSpec, params: &SmoothingParams) -> Result<f64> {
    model.validate(ts.values())?;
    validate_spec(model, &ParamSpec::fixed(*params))?;
    let (fitted, _, _) = run(model, &complete(model, params), ts.values());
    Ok(mse_of(ts.values(), &fitted))
}

fn complete(model: &ModelSpec, p: &SmoothingParams) -> SmoothingParams {
    SmoothingParams {
        alpha: p.alpha,
        beta: model.has_trend().then(|| p.beta.unwrap_or(0.0)),
        gamma: model.is_seasonal().then(|| p.gamma.unwrap_or(0.0)),
        phi: (model.trend == TrendKind::Damped).then(|| p.phi.unwrap_or(1.0)),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Optimized {
    pub params: SmoothingParams,
    pub mse: f64,
    /// No multi-start run met the convergence tolerance; params are best-so-far.
    pub warning: bool,
}

fn assemble(model: &ModelSpec, spec: &ParamSpec, free: &[Slot], x: &[f64]) -> SmoothingParams {
    let mut p = SmoothingParams {
        alpha: spec.alpha.unwrap_or(0.0),
        beta: model.has_trend().then(|| spec.beta.unwrap_or(0.0)),
        gamma: model.is_seasonal().then(|| spec.gamma.unwrap_or(0.0)),
        phi: (model.trend == TrendKind::Damped).then(|| spec.phi.unwrap_or(1.0)),
    };
    for (slot, &v) in free.iter().zip(x) {
        match slot {
            Slot::Alpha => p.alpha = v,
            Slot::Beta => p.beta = Some(v),
            Slot::Gamma => p.gamma = Some(v),
            Slot::Phi => p.phi = Some(v),
        }
    }
    p
}

fn optimize_partial(ts: &TimeSeries, model: &ModelSpec, spec: &ParamSpec) -> Result<Optimized> {
    model.validate(ts.values())?;
    validate_spec(model, spec)?;
    let y = ts.values();
    let free: Vec<Slot> = slots(model)
        .into_iter()
        .filter(|slot| match slot {
            Slot::Alpha => spec.alpha.is_none(),
            Slot::Beta => spec.beta.is_none(),
            Slot::Gamma => spec.gamma.is_none(),
            Slot::Phi => spec.phi.is_none(),
        })
        .collect();
    if free.is_empty() {
        let params = assemble(model, spec, &[], &[]);
        let (fitted, _, _) = run(model, &params, y);
        return Ok(Optimized {
            params,
            mse: mse_of(y, &fitted),
            warning: false,
        });
    }
    let bounds = Bounds::new(
        free.iter()
            .map(|s| if *s == Slot::Phi { PHI_LOWER } else { 0.0 })
            .collect(),
        vec![1.0; free.len()],
    );
    let objective = |x: &[f64]| {
        let params = assemble(model, spec, &free, x);
        let (fitted, _, _) = run(model, &params, y);
        let mse = mse_of(y, &fitted);
        if mse.is_finite() {
            mse
        } else {
            f64::INFINITY
        }
    };
    let result = multi_start(&objective, &bounds.grid(5), &bounds, &Options::default());
    if !result.best.f.is_finite() {
        return Err(Error::OptimizerFailed(format!(
            "no finite objective found for {}",
            model.label()
        )));
    }
    Ok(Optimized {
        params: assemble(model, spec, &free, &result.best.x),
        mse: result.best.f,
        warning: result.warning,
    })
}

/// Least-squares smoothing parameters for `model` (every coordinate free).
pub fn optimize_params(ts: &TimeSeries, model: &ModelSpec) -> Result<Optimized> {
    optimize_partial(ts, model, &ParamSpec::OPTIMIZE)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoothingFit {
    pub params: SmoothingParams,
    pub initial: InitialState,
    pub model: ModelSpec,
    pub fitted: Vec<Option<f64>>,
    pub mse: f64,
    pub optimizer_warning: bool,
    series: TimeSeries,
    last: State,
}

impl SmoothingFit {
    pub fn series(&self) -> &TimeSeries {
        &self.series
    }

    pub fn residuals(&self) -> Vec<Option<f64>> {
        self.series
            .values()
            .iter()
            .zip(&self.fitted)
            .map(|(y, f)| f.map(|f| y - f))
            .collect()
    }

    /// Point forecasts for `h` steps past the end of the sample.
    pub fn future(&self, h: usize) -> Vec<f64> {
        let engine = Engine::new(&self.model, &self.params);
        (1..=h).map(|k| engine.predict(&self.last, k)).collect()
    }

    pub fn forecast(&self, h: usize) -> ForecastResult {
        ForecastResult::from_fitted(
            self.series.values(),
            self.fitted.clone(),
            self.future(h),
            self.model.label(),
        )
    }

    /// Forecast with `F ± z√MSE` bounds.
    pub fn forecast_with_level(&self, h: usize, level: ConfidenceLevel) -> Result<ForecastResult> {
        self.forecast(h).with_intervals(self.mse, level)
    }
}

/// Fits `model`, optimising every coordinate left `None` in `spec`.
pub fn fit(ts: &TimeSeries, model: &ModelSpec, spec: &ParamSpec) -> Result<SmoothingFit> {
    let optimized = optimize_partial(ts, model, spec)?;
    let (fitted, last, initial) = run(model, &optimized.params, ts.values());
    let mse = mse_of(ts.values(), &fitted);
    if !mse.is_finite() {
        return Err(Error::Degenerate(format!(
            "{} produced non-finite forecasts",
            model.label()
        )));
    }
    Ok(SmoothingFit {
        params: optimized.params,
        initial,
        model: *model,
        fitted,
        mse,
        optimizer_warning: optimized.warning,
        series: ts.clone(),
        last,
    })
}

/// Single exponential smoothing; `alpha = None` optimises it.
pub fn ses_fit(ts: &TimeSeries, alpha: Option<f64>) -> Result<SmoothingFit> {
    fit(
        ts,
        &ModelSpec::ses(),
        &ParamSpec {
            alpha,
            ..ParamSpec::OPTIMIZE
        },
    )
}

/// Flat SES forecast: every step repeats the final one-step forecast.
pub fn ses_forecast(fit: &SmoothingFit, h: usize) -> Result<ForecastResult> {
    if fit.model != ModelSpec::ses() {
        return Err(Error::InvalidInput(format!(
            "ses_forecast needs an SES fit, got {}",
            fit.model.label()
        )));
    }
    Ok(fit.forecast(h))
}

pub fn holt_fit(ts: &TimeSeries, trend: TrendKind, spec: &ParamSpec) -> Result<SmoothingFit> {
    if trend == TrendKind::None {
        return Err(Error::InvalidInput("Holt's method needs a trend kind".into()));
    }
    fit(ts, &ModelSpec::holt(trend), spec)
}

pub fn holt_winters_fit(
    ts: &TimeSeries,
    seasonal: SeasonalKind,
    seasonal_periods: usize,
    spec: &ParamSpec,
) -> Result<SmoothingFit> {
    if seasonal == SeasonalKind::None {
        return Err(Error::InvalidInput("Holt-Winters needs a seasonal kind".into()));
    }
    fit(ts, &ModelSpec::holt_winters(seasonal, seasonal_periods), spec)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualDiagnostics {
    pub residuals: TimeSeries,
    /// `None` for a perfect fit, where the ACF is undefined.
    pub correlogram: Option<Correlogram>,
    pub perfect_fit: bool,
}

/// Residual series and its ACF up to `max(20, 2s)` lags (capped by length).
pub fn residual_diagnostics(fit: &SmoothingFit) -> Result<ResidualDiagnostics> {
    let offset = fit.model.first_fitted();
    let values: Vec<f64> = fit.residuals().into_iter().flatten().collect();
    if values.len() < 3 {
        return Err(Error::TooShort {
            needed: 3,
            got: values.len(),
        });
    }
    let residuals = fit
        .series
        .with_values_shifted(values.clone(), offset as i64)?
        .renamed(format!("{} residuals", fit.series.name()));
    let scale = 1.0 + fit.series.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if values.iter().all(|e| e.abs() <= 1e-12 * scale) {
        return Ok(ResidualDiagnostics {
            residuals,
            correlogram: None,
            perfect_fit: true,
        });
    }
    let lags = 20usize.max(2 * fit.model.seasonal_periods).min(values.len() - 1);
    let correlogram = acf(&values, lags)?;
    Ok(ResidualDiagnostics {
        residuals,
        correlogram: Some(correlogram),
        perfect_fit: false,
    })
}
