//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::arima::{self, ModelOrder};
use crate::baseline::{self, ConfidenceLevel, ErrorReport, ForecastResult};
use crate::decompose::{self, DecompositionKind};
use crate::diagnostics::{self, AdfRegression, Correlogram};
use crate::error::{Error, Result};
use crate::expsmooth::{self, ParamSpec, SeasonalKind, SmoothingFit, TrendKind};
use crate::plot::{self, PlotSpec, Theme};
use crate::regress::{self, Formula, RegressorMethod};
use crate::series::{self, CsvSchema, Frequency, Period, TimeSeries};
use crate::simulate;
use crate::transform::{self, DifferenceSpec};

#[derive(Parser, Debug)]
#[command(name = "chronofit", version, about = "Classical time-series forecasting")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Time plot, scatter plot or scatter matrix of CSV columns.
    Plot(PlotArgs),
    /// Seasonal plot: one line per cycle.
    Seasonal(SeriesOut),
    /// Log, square-root, power, exp, calendar or differencing transforms.
    Transform(TransformArgs),
    /// Classical additive or multiplicative decomposition.
    Decompose(DecomposeArgs),
    /// Sample autocorrelation function.
    Acf(CorrelogramArgs),
    /// Sample partial autocorrelation function.
    Pacf(CorrelogramArgs),
    /// Augmented Dickey-Fuller unit-root test.
    Adf(AdfArgs),
    /// Correlation matrix of CSV columns.
    Corr(CorrArgs),
    /// ME, MAE, MSE, MPE and MAPE of a forecast column against an actual column.
    Accuracy(AccuracyArgs),
    /// Naive baselines NF1 and NF2.
    Naive(NaiveArgs),
    /// Single exponential smoothing.
    Ses(SesArgs),
    /// Holt's linear method and its exponential and damped variants.
    Holt(HoltArgs),
    /// Holt-Winters seasonal method.
    Hw(HwArgs),
    /// ARIMA and seasonal ARIMA models.
    #[command(subcommand)]
    Arima(ArimaCommand),
    /// OLS regression and regression-based forecasting.
    Regress(RegressArgs),
}

#[derive(Args, Debug, Clone)]
struct Source {
    /// CSV file with a date column and one or more value columns.
    #[arg(long, value_name = "PATH", required_unless_present = "white_noise", conflicts_with = "white_noise")]
    data: Option<PathBuf>,
    /// Value column (default: first column after the date column).
    #[arg(long)]
    column: Option<String>,
    #[arg(long, default_value = "date")]
    date_column: String,
    /// Periods per year, overriding the frequency inferred from the dates.
    #[arg(long)]
    freq: Option<u32>,
    /// Use N seeded Gaussian white-noise observations instead of a file.
    #[arg(long, value_name = "N")]
    white_noise: Option<usize>,
    /// Seed for generated data.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl Source {
    fn load(&self) -> Result<TimeSeries> {
        let freq = self.freq.map(Frequency::new).transpose()?;
        if let Some(n) = self.white_noise {
            return TimeSeries::new(
                simulate::white_noise(n, 1.0, self.seed),
                Period::new(2000, 1),
                freq.unwrap_or(Frequency::MONTHLY),
                format!("white noise (seed {})", self.seed),
            );
        }
        let path = self.data.as_ref().expect("clap requires --data or --white-noise");
        series::load_csv(
            path,
            &CsvSchema {
                date_column: self.date_column.clone(),
                value_column: self.column.clone(),
                frequency: freq,
            },
        )
    }
}

#[derive(Args, Debug)]
struct FrameSource {
    #[arg(long, value_name = "PATH")]
    data: PathBuf,
    #[arg(long, default_value = "date")]
    date_column: String,
    #[arg(long)]
    freq: Option<u32>,
}

impl FrameSource {
    fn load(&self) -> Result<series::Frame> {
        let freq = self.freq.map(Frequency::new).transpose()?;
        series::load_frame(&self.data, &self.date_column, freq)
    }
}

#[derive(Args, Debug)]
struct SeriesOut {
    #[command(flatten)]
    source: Source,
    /// SVG output path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PlotChoice {
    Time,
    Scatter,
    ScatterMatrix,
}

#[derive(Args, Debug)]
struct PlotArgs {
    #[command(flatten)]
    source: FrameSource,
    #[arg(long, value_enum, default_value = "time")]
    kind: PlotChoice,
    /// Columns to include (default: all).
    #[arg(long, value_delimiter = ',')]
    columns: Vec<String>,
    #[arg(long)]
    title: Option<String>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TransformOp {
    Log,
    Exp,
    Sqrt,
    Power,
    Calendar,
    Diff,
}

#[derive(Args, Debug)]
struct TransformArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long, value_enum)]
    op: TransformOp,
    /// Exponent for `power`.
    #[arg(long)]
    lambda: Option<f64>,
    /// Differencing lag (1 ordinary, s seasonal).
    #[arg(long, default_value_t = 1)]
    lag: usize,
    /// Number of differencing applications.
    #[arg(long, default_value_t = 1)]
    order: usize,
    /// CSV output path (default: standard output).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Optional time plot of the transformed series.
    #[arg(long)]
    plot: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum KindChoice {
    Additive,
    Multiplicative,
}

#[derive(Args, Debug)]
struct DecomposeArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long, value_enum, default_value = "additive")]
    kind: KindChoice,
    /// CSV with columns t,observed,trend,seasonal,remainder (default: standard output).
    #[arg(long)]
    out_csv: Option<PathBuf>,
    /// Four-panel SVG.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CorrelogramArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long, default_value_t = 20)]
    lags: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum RegressionChoice {
    /// Constant only.
    C,
    /// Constant and linear trend.
    Ct,
}

#[derive(Args, Debug)]
struct AdfArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long, value_enum, default_value = "c")]
    regression: RegressionChoice,
    /// Largest augmentation lag tried (default: 12·(n/100)^¼).
    #[arg(long)]
    max_lag: Option<usize>,
    /// Apply this many first differences before testing.
    #[arg(long, default_value_t = 0)]
    diff: usize,
}

#[derive(Args, Debug)]
struct CorrArgs {
    #[command(flatten)]
    source: FrameSource,
    #[arg(long, value_delimiter = ',')]
    columns: Vec<String>,
    /// Scatter-matrix SVG.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct AccuracyArgs {
    #[command(flatten)]
    source: FrameSource,
    #[arg(long)]
    actual: String,
    #[arg(long)]
    forecast: String,
}

#[derive(Args, Debug, Clone)]
struct ForecastOut {
    #[arg(long, default_value_t = 12, visible_alias = "steps")]
    horizon: usize,
    /// Interval level in percent: 80, 90 or 95.
    #[arg(long, default_value = "95", value_parser = parse_level)]
    level: ConfidenceLevel,
    /// Forecast SVG.
    #[arg(long)]
    out: Option<PathBuf>,
    /// CSV with date,observed,fitted,forecast,lower,upper.
    #[arg(long)]
    out_csv: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum NaiveMethod {
    Nf1,
    Nf2,
}

#[derive(Args, Debug)]
struct NaiveArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long, value_enum, default_value = "nf1")]
    method: NaiveMethod,
    #[command(flatten)]
    forecast: ForecastOut,
}

#[derive(Args, Debug)]
struct SmoothingCommon {
    #[command(flatten)]
    source: Source,
    #[command(flatten)]
    forecast: ForecastOut,
    /// Correlogram SVG of the one-step residuals.
    #[arg(long)]
    residual_acf: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SesArgs {
    #[command(flatten)]
    common: SmoothingCommon,
    /// Level smoothing parameter (omit to optimise).
    #[arg(long, visible_alias = "smoothing-level")]
    alpha: Option<f64>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TrendChoice {
    #[value(alias = "add")]
    Additive,
    #[value(alias = "mul", alias = "exponential")]
    Multiplicative,
    Damped,
}

#[derive(Args, Debug)]
struct HoltArgs {
    #[command(flatten)]
    common: SmoothingCommon,
    #[arg(long, visible_alias = "smoothing-level")]
    alpha: Option<f64>,
    #[arg(long, visible_aliases = ["smoothing-trend", "smoothing-slope"])]
    beta: Option<f64>,
    /// Damping factor (damped trend only).
    #[arg(long, visible_alias = "damping-trend")]
    phi: Option<f64>,
    #[arg(long, value_enum, default_value = "additive")]
    trend: TrendChoice,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SeasonalChoice {
    #[value(alias = "add")]
    Additive,
    #[value(alias = "mul")]
    Multiplicative,
}

#[derive(Args, Debug)]
struct HwArgs {
    #[command(flatten)]
    common: SmoothingCommon,
    #[arg(long, visible_alias = "smoothing-level")]
    alpha: Option<f64>,
    #[arg(long, visible_aliases = ["smoothing-trend", "smoothing-slope"])]
    beta: Option<f64>,
    #[arg(long, visible_alias = "smoothing-seasonal")]
    gamma: Option<f64>,
    #[arg(long, value_enum, default_value = "additive")]
    seasonal: SeasonalChoice,
    /// Season length (default: the series frequency).
    #[arg(long, visible_alias = "seasonal-periods")]
    periods: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum ArimaCommand {
    /// Fit one order and print the coefficient table.
    Fit(ArimaFitArgs),
    /// AIC grid search over orders.
    Auto(ArimaAutoArgs),
    /// Fit one order and forecast with ψ-weight intervals.
    Forecast(ArimaForecastArgs),
    /// Read candidate orders off the ACF and PACF.
    Suggest(ArimaSuggestArgs),
}

#[derive(Args, Debug)]
struct OrderArgs {
    /// Non-seasonal order as p,d,q.
    #[arg(long, value_parser = parse_triple)]
    order: [usize; 3],
    /// Seasonal order as P,D,Q,s.
    #[arg(long, value_parser = parse_seasonal)]
    seasonal: Option<[usize; 4]>,
    /// Force an intercept on or off (default: on when d + D = 0).
    #[arg(long)]
    intercept: Option<bool>,
}

impl OrderArgs {
    fn order(&self) -> ModelOrder {
        let [p, d, q] = self.order;
        let order = ModelOrder::new(p, d, q);
        match self.seasonal {
            Some([sp, sd, sq, s]) => order.with_seasonal(sp, sd, sq, s),
            None => order,
        }
    }
}

#[derive(Args, Debug)]
struct ArimaFitArgs {
    #[command(flatten)]
    source: Source,
    #[command(flatten)]
    order: OrderArgs,
    /// Four-panel residual diagnostics SVG.
    #[arg(long)]
    diagnostics: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ArimaAutoArgs {
    #[command(flatten)]
    source: Source,
    /// Largest p,d,q tried.
    #[arg(long, value_parser = parse_triple, default_value = "2,2,2")]
    max: [usize; 3],
    /// Search the seasonal grid with this season length instead.
    #[arg(long)]
    seasonal_s: Option<usize>,
    /// Largest value of every seasonal-grid coordinate.
    #[arg(long, default_value_t = 1)]
    seasonal_bound: usize,
}

#[derive(Args, Debug)]
struct ArimaForecastArgs {
    #[command(flatten)]
    source: Source,
    #[command(flatten)]
    order: OrderArgs,
    #[command(flatten)]
    forecast: ForecastOut,
}

#[derive(Args, Debug)]
struct ArimaSuggestArgs {
    #[command(flatten)]
    source: Source,
    /// First differences applied before reading the correlograms.
    #[arg(long, default_value_t = 0)]
    d: usize,
    /// Seasonal differences applied before reading the correlograms.
    #[arg(long, default_value_t = 0)]
    seasonal_d: usize,
    /// Season length (default: the series frequency).
    #[arg(long)]
    s: Option<usize>,
    #[arg(long, default_value_t = 3)]
    max_consider: usize,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum RegressorChoice {
    Holt,
    Arima,
}

#[derive(Args, Debug)]
struct RegressArgs {
    #[command(flatten)]
    source: FrameSource,
    /// `response ~ x1 + x2 + ...`
    #[arg(long)]
    formula: String,
    /// Forecast horizon; omit to fit only.
    #[arg(long, value_name = "H")]
    forecast: Option<usize>,
    #[arg(long, value_enum, default_value = "holt")]
    method: RegressorChoice,
    /// Regressor ARIMA order p,d,q for `--method arima`.
    #[arg(long, value_parser = parse_triple, default_value = "1,1,0")]
    order: [usize; 3],
    #[arg(long, default_value = "80", value_parser = parse_level)]
    level: ConfidenceLevel,
    /// Directory for per-regressor and combined forecast SVGs.
    #[arg(long)]
    plot_dir: Option<PathBuf>,
    /// CSV of the combined forecast.
    #[arg(long)]
    out_csv: Option<PathBuf>,
}

fn parse_level(text: &str) -> std::result::Result<ConfidenceLevel, String> {
    ConfidenceLevel::from_percent(text).map_err(|e| e.to_string())
}

fn parse_list<const N: usize>(text: &str) -> std::result::Result<[usize; N], String> {
    let parts: Vec<usize> = text
        .split(',')
        .map(|p| p.trim().parse::<usize>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<std::result::Result<_, _>>()?;
    parts
        .try_into()
        .map_err(|_| format!("expected {N} comma-separated integers, got {text:?}"))
}

fn parse_triple(text: &str) -> std::result::Result<[usize; 3], String> {
    parse_list::<3>(text)
}

fn parse_seasonal(text: &str) -> std::result::Result<[usize; 4], String> {
    parse_list::<4>(text)
}

/// Runs the command line `argv` (program name first) against the process streams.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

/// As [`run`], writing reports to `out` and diagnostics to `err`.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().ansi().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                1
            } else {
                let _ = write!(out, "{text}");
                0
            };
        }
    };
    let mut ctx = Context {
        report: String::new(),
        warnings: Vec::new(),
        theme: Theme::from_env(),
    };
    let outcome = dispatch(cli.command, &mut ctx);
    let _ = out.write_all(ctx.report.as_bytes());
    for w in &ctx.warnings {
        let _ = writeln!(err, "warning: {w}");
    }
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_numerical() {
                3
            } else {
                2
            }
        }
    }
}

struct Context {
    report: String,
    warnings: Vec<String>,
    theme: Theme,
}

impl Context {
    fn line(&mut self, text: impl AsRef<str>) {
        self.report.push_str(text.as_ref());
        self.report.push('\n');
    }

    fn warn(&mut self, text: impl Into<String>) {
        self.warnings.push(text.into());
    }

    fn render(&mut self, mut spec: PlotSpec, path: &Path) -> Result<()> {
        spec.theme = self.theme;
        plot::render_svg(&spec, path)
    }
}

fn dispatch(command: Command, ctx: &mut Context) -> Result<()> {
    match command {
        Command::Plot(a) => cmd_plot(a, ctx),
        Command::Seasonal(a) => cmd_seasonal(a, ctx),
        Command::Transform(a) => cmd_transform(a, ctx),
        Command::Decompose(a) => cmd_decompose(a, ctx),
        Command::Acf(a) => cmd_correlogram(a, false, ctx),
        Command::Pacf(a) => cmd_correlogram(a, true, ctx),
        Command::Adf(a) => cmd_adf(a, ctx),
        Command::Corr(a) => cmd_corr(a, ctx),
        Command::Accuracy(a) => cmd_accuracy(a, ctx),
        Command::Naive(a) => cmd_naive(a, ctx),
        Command::Ses(a) => {
            let ts = a.common.source.load()?;
            let fit = expsmooth::ses_fit(&ts, a.alpha)?;
            smoothing_output(&fit, &a.common, ctx)
        }
        Command::Holt(a) => {
            let ts = a.common.source.load()?;
            let trend = match a.trend {
                TrendChoice::Additive => TrendKind::Additive,
                TrendChoice::Multiplicative => TrendKind::Multiplicative,
                TrendChoice::Damped => TrendKind::Damped,
            };
            let spec = ParamSpec {
                alpha: a.alpha,
                beta: a.beta,
                gamma: None,
                phi: a.phi,
            };
            let fit = expsmooth::holt_fit(&ts, trend, &spec)?;
            smoothing_output(&fit, &a.common, ctx)
        }
        Command::Hw(a) => {
            let ts = a.common.source.load()?;
            let seasonal = match a.seasonal {
                SeasonalChoice::Additive => SeasonalKind::Additive,
                SeasonalChoice::Multiplicative => SeasonalKind::Multiplicative,
            };
            let s = a.periods.unwrap_or(ts.freq().as_usize());
            let spec = ParamSpec {
                alpha: a.alpha,
                beta: a.beta,
                gamma: a.gamma,
                phi: None,
            };
            let fit = expsmooth::holt_winters_fit(&ts, seasonal, s, &spec)?;
            smoothing_output(&fit, &a.common, ctx)
        }
        Command::Arima(ArimaCommand::Fit(a)) => cmd_arima_fit(a, ctx),
        Command::Arima(ArimaCommand::Auto(a)) => cmd_arima_auto(a, ctx),
        Command::Arima(ArimaCommand::Forecast(a)) => cmd_arima_forecast(a, ctx),
        Command::Arima(ArimaCommand::Suggest(a)) => cmd_arima_suggest(a, ctx),
        Command::Regress(a) => cmd_regress(a, ctx),
    }
}

fn select_columns(frame: &series::Frame, wanted: &[String]) -> Result<Vec<(String, Vec<f64>)>> {
    if wanted.is_empty() {
        return Ok(frame.columns.clone());
    }
    wanted
        .iter()
        .map(|name| {
            frame
                .column(name)
                .map(|v| (name.clone(), v.to_vec()))
                .ok_or_else(|| Error::InvalidInput(format!("no column named {name:?}")))
        })
        .collect()
}

fn cmd_plot(a: PlotArgs, ctx: &mut Context) -> Result<()> {
    let frame = a.source.load()?;
    let columns = select_columns(&frame, &a.columns)?;
    let title = a.title.unwrap_or_else(|| columns.iter().map(|(n, _)| n.as_str()).collect::<Vec<_>>().join(", "));
    let spec = match a.kind {
        PlotChoice::Time => {
            let series: Vec<TimeSeries> = columns
                .iter()
                .map(|(n, v)| TimeSeries::new(v.clone(), frame.start, frame.freq, n.clone()))
                .collect::<Result<_>>()?;
            plot::time_plot(&series.iter().collect::<Vec<_>>(), title)
        }
        PlotChoice::Scatter => {
            if columns.len() != 2 {
                return Err(Error::InvalidInput("scatter needs exactly two columns (x,y)".into()));
            }
            plot::scatter_plot((&columns[0].0, &columns[0].1), (&columns[1].0, &columns[1].1), title)
        }
        PlotChoice::ScatterMatrix => plot::scatter_matrix(&columns, title),
    };
    ctx.render(spec, &a.out)?;
    ctx.line(format!("wrote {}", a.out.display()));
    Ok(())
}

fn cmd_seasonal(a: SeriesOut, ctx: &mut Context) -> Result<()> {
    let ts = a.source.load()?;
    let layout = series::seasonal_layout(&ts)?;
    ctx.line(format!("year\t{}", layout.labels.join("\t")));
    for (year, row) in layout.row_years.iter().zip(&layout.rows) {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        ctx.line(format!("{year}\t{}", cells.join("\t")));
    }
    if let Some(path) = &a.out {
        ctx.render(plot::seasonal_plot(&layout, format!("Seasonal plot: {}", ts.name())), path)?;
    }
    Ok(())
}

fn cmd_transform(a: TransformArgs, ctx: &mut Context) -> Result<()> {
    let ts = a.source.load()?;
    let result = match a.op {
        TransformOp::Log => transform::log_transform(&ts)?,
        TransformOp::Exp => transform::exp_transform(&ts)?,
        TransformOp::Sqrt => transform::sqrt_transform(&ts)?,
        TransformOp::Power => {
            let lambda = a
                .lambda
                .ok_or_else(|| Error::InvalidInput("power transform needs --lambda".into()))?;
            transform::power_transform(&ts, lambda)?
        }
        TransformOp::Calendar => transform::calendar_adjust(&ts, &transform::days_in_months(&ts)?)?,
        TransformOp::Diff => transform::difference(&ts, DifferenceSpec::new(a.lag, a.order)?)?,
    };
    match &a.out {
        Some(path) => series::save_csv(&result, path)?,
        None => {
            ctx.line("date,value");
            for (i, v) in result.values().iter().enumerate() {
                let date = result.period_at(i).label(result.freq());
                ctx.line(format!("{date},{v}"));
            }
        }
    }
    if let Some(path) = &a.plot {
        ctx.render(plot::time_plot(&[&ts, &result], result.name().to_string()), path)?;
    }
    Ok(())
}

fn cell(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn cmd_decompose(a: DecomposeArgs, ctx: &mut Context) -> Result<()> {
    let ts = a.source.load()?;
    let kind = match a.kind {
        KindChoice::Additive => DecompositionKind::Additive,
        KindChoice::Multiplicative => DecompositionKind::Multiplicative,
    };
    let d = decompose::classical_decompose(&ts, kind)?;
    let mut csv = String::from("t,observed,trend,seasonal,remainder\n");
    for i in 0..ts.len() {
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            ts.period_at(i).label(ts.freq()),
            ts.values()[i],
            cell(d.trend[i]),
            d.seasonal[i],
            cell(d.remainder[i])
        );
    }
    match &a.out_csv {
        Some(path) => std::fs::write(path, csv).map_err(|e| Error::io(path, e))?,
        None => ctx.report.push_str(&csv),
    }
    if let Some(path) = &a.out {
        let title = format!("{kind:?} decomposition: {}", ts.name());
        ctx.render(plot::decomposition_plot(&ts, &d, title), path)?;
    }
    Ok(())
}

fn correlogram_report(c: &Correlogram, ctx: &mut Context) {
    ctx.line(format!("n = {}, band = ±{:.4}", c.n, c.band));
    ctx.line("lag\tcoefficient\tsignificant");
    for (&k, &r) in c.lags.iter().zip(&c.coefficients).skip(1) {
        let flag = if c.is_significant(k) { "*" } else { "" };
        ctx.line(format!("{k}\t{r:.6}\t{flag}"));
    }
    ctx.line(format!("fraction inside band: {:.3}", c.fraction_inside()));
}

fn cmd_correlogram(a: CorrelogramArgs, partial: bool, ctx: &mut Context) -> Result<()> {
    let ts = a.source.load()?;
    let c = if partial {
        diagnostics::pacf(ts.values(), a.lags)?
    } else {
        diagnostics::acf(ts.values(), a.lags)?
    };
    correlogram_report(&c, ctx);
    if let Ok(w) = diagnostics::is_white_noise(ts.values(), a.lags) {
        ctx.line(format!(
            "white noise: {} ({:.1}% of lags have ACF and PACF inside the band)",
            if w.verdict { "yes" } else { "no" },
            100.0 * w.fraction_inside
        ));
    }
    if let Some(path) = &a.out {
        let name = if partial { "PACF" } else { "ACF" };
        ctx.render(plot::correlogram_plot(&c, format!("{name}: {}", ts.name())), path)?;
    }
    Ok(())
}

fn cmd_adf(a: AdfArgs, ctx: &mut Context) -> Result<()> {
    let mut ts = a.source.load()?;
    if a.diff > 0 {
        ts = transform::difference(&ts, DifferenceSpec::new(1, a.diff)?)?;
    }
    let kind = match a.regression {
        RegressionChoice::C => AdfRegression::Constant,
        RegressionChoice::Ct => AdfRegression::ConstantTrend,
    };
    let r = diagnostics::adf_test(ts.values(), kind, a.max_lag)?;
    ctx.line(format!("ADF Statistic: {:.6}", r.statistic));
    ctx.line(format!("p-value: {:.6}", r.p_value));
    ctx.line(format!("Lags used: {}", r.lags_used));
    ctx.line(format!("Observations: {}", r.n_obs));
    ctx.line("Critical Values:");
    ctx.line(format!("\t1%: {:.3}", r.critical.one));
    ctx.line(format!("\t5%: {:.3}", r.critical.five));
    ctx.line(format!("\t10%: {:.3}", r.critical.ten));
    let verdict = if r.strongly_stationary() {
        "unit root rejected at 1% with p < 0.05: stationary"
    } else if r.statistic < r.critical.five {
        "unit root rejected at 5%"
    } else {
        "unit root not rejected: non-stationary"
    };
    ctx.line(format!("Conclusion: {verdict}"));
    Ok(())
}

fn cmd_corr(a: CorrArgs, ctx: &mut Context) -> Result<()> {
    let frame = a.source.load()?;
    let columns = select_columns(&frame, &a.columns)?;
    let m = diagnostics::correlation_matrix(&columns)?;
    ctx.line(format!("\t{}", m.labels.join("\t")));
    for (label, row) in m.labels.iter().zip(&m.values) {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.4}")).collect();
        ctx.line(format!("{label}\t{}", cells.join("\t")));
    }
    if let Some(path) = &a.out {
        ctx.render(plot::scatter_matrix(&columns, "Scatter matrix"), path)?;
    }
    Ok(())
}

fn error_report_lines(r: &ErrorReport, ctx: &mut Context) {
    let pct = |v: Option<f64>| v.map_or("undefined (zero actual)".to_string(), |v| format!("{v:.4}%"));
    ctx.line(format!("ME\t{:.6}", r.me));
    ctx.line(format!("MAE\t{:.6}", r.mae));
    ctx.line(format!("MSE\t{:.6}", r.mse));
    ctx.line(format!("MPE\t{}", pct(r.mpe)));
    ctx.line(format!("MAPE\t{}", pct(r.mape)));
}

fn cmd_accuracy(a: AccuracyArgs, ctx: &mut Context) -> Result<()> {
    let frame = a.source.load()?;
    let get = |name: &str| {
        frame
            .column(name)
            .ok_or_else(|| Error::InvalidInput(format!("no column named {name:?}")))
    };
    let r = baseline::error_measures(get(&a.actual)?, get(&a.forecast)?)?;
    error_report_lines(&r, ctx);
    Ok(())
}

fn forecast_output(ts: &TimeSeries, r: &ForecastResult, opts: &ForecastOut, ctx: &mut Context) -> Result<()> {
    ctx.line("forecasts:");
    ctx.line("date\tforecast\tlower\tupper");
    let n = ts.len();
    for (i, f) in r.future.iter().enumerate() {
        let date = ts.period_at(n + i).label(ts.freq());
        let (lo, hi) = r
            .intervals
            .as_ref()
            .map_or((String::new(), String::new()), |iv| (format!("{:.4}", iv.lower[i]), format!("{:.4}", iv.upper[i])));
        ctx.line(format!("{date}\t{f:.4}\t{lo}\t{hi}"));
    }
    if let Some(path) = &opts.out_csv {
        write_forecast_csv(ts, r, path)?;
    }
    if let Some(path) = &opts.out {
        ctx.render(plot::forecast_plot(ts, r, format!("{}: {}", r.method, ts.name())), path)?;
    }
    Ok(())
}

fn write_forecast_csv(ts: &TimeSeries, r: &ForecastResult, path: &Path) -> Result<()> {
    let mut csv = String::from("date,observed,fitted,forecast,lower,upper\n");
    for (i, y) in ts.values().iter().enumerate() {
        let _ = writeln!(csv, "{},{y},{},,,", ts.period_at(i).label(ts.freq()), cell(r.fitted[i]));
    }
    for (i, f) in r.future.iter().enumerate() {
        let (lo, hi) = r
            .intervals
            .as_ref()
            .map_or((None, None), |iv| (Some(iv.lower[i]), Some(iv.upper[i])));
        let _ = writeln!(
            csv,
            "{},,,{f},{},{}",
            ts.period_at(ts.len() + i).label(ts.freq()),
            cell(lo),
            cell(hi)
        );
    }
    std::fs::write(path, csv).map_err(|e| Error::io(path, e))
}

fn cmd_naive(a: NaiveArgs, ctx: &mut Context) -> Result<()> {
    let ts = a.source.load()?;
    let h = a.forecast.horizon;
    let r = match a.method {
        NaiveMethod::Nf1 => baseline::nf1(&ts, h)?,
        NaiveMethod::Nf2 => baseline::nf2(&ts, h)?,
    };
    let mse = r.mse();
    let r = r.with_intervals(mse, a.forecast.level)?;
    ctx.line(format!("method: {}", r.method));
    error_report_lines(&r.error_report(ts.values())?, ctx);
    forecast_output(&ts, &r, &a.forecast, ctx)
}

fn smoothing_output(fit: &SmoothingFit, common: &SmoothingCommon, ctx: &mut Context) -> Result<()> {
    if fit.optimizer_warning {
        ctx.warn("optimizer did not meet its convergence tolerance; parameters are the best found");
    }
    let ts = fit.series();
    let p = &fit.params;
    ctx.line(format!("model: {}", fit.model.label()));
    ctx.line("parameter\tvalue");
    ctx.line(format!("alpha\t{:.6}", p.alpha));
    if let Some(b) = p.beta {
        ctx.line(format!("beta\t{b:.6}"));
    }
    if let Some(phi) = p.phi {
        ctx.line(format!("phi\t{phi:.6}"));
    }
    if let Some(g) = p.gamma {
        ctx.line(format!("gamma\t{g:.6}"));
    }
    ctx.line(format!("l0\t{:.6}", fit.initial.level));
    if let Some(b0) = fit.initial.trend {
        ctx.line(format!("b0\t{b0:.6}"));
    }
    if let Some(s) = &fit.initial.seasonals {
        for (i, v) in s.iter().enumerate() {
            ctx.line(format!("s{}\t{v:.6}", i + 1));
        }
    }
    ctx.line(format!("MSE\t{:.6}", fit.mse));
    let r = fit.forecast_with_level(common.forecast.horizon, common.forecast.level)?;
    error_report_lines(&r.error_report(ts.values())?, ctx);
    let diag = expsmooth::residual_diagnostics(fit)?;
    match &diag.correlogram {
        None => ctx.line("residuals: perfect fit, ACF undefined"),
        Some(c) => {
            let verdict = diagnostics::is_white_noise(diag.residuals.values(), c.max_lag())
                .map(|w| if w.verdict { "yes" } else { "no" })
                .unwrap_or("undetermined");
            ctx.line(format!(
                "residual ACF: {:.1}% of {} lags inside ±{:.4}; white noise: {verdict}",
                100.0 * c.fraction_inside(),
                c.max_lag(),
                c.band
            ));
            if let Some(path) = &common.residual_acf {
                ctx.render(plot::correlogram_plot(c, format!("Residual ACF: {}", fit.model.label())), path)?;
            }
        }
    }
    forecast_output(ts, &r, &common.forecast, ctx)
}

fn arima_report(fit: &arima::ArimaFit, ctx: &mut Context) {
    if fit.optimizer_warning {
        ctx.warn("optimizer did not meet its convergence tolerance; estimates are the best found");
    }
    let s = fit.order.s;
    ctx.line(format!("model: {}  (conditional sum of squares)", fit.order));
    ctx.line(format!("observations used: {}", fit.n_effective));
    ctx.line("coefficient\testimate");
    for (i, c) in fit.ar.iter().enumerate() {
        ctx.line(format!("ar.L{}\t{c:.6}", i + 1));
    }
    for (i, c) in fit.ma.iter().enumerate() {
        ctx.line(format!("ma.L{}\t{c:.6}", i + 1));
    }
    for (i, c) in fit.seasonal_ar.iter().enumerate() {
        ctx.line(format!("ar.S.L{}\t{c:.6}", (i + 1) * s));
    }
    for (i, c) in fit.seasonal_ma.iter().enumerate() {
        ctx.line(format!("ma.S.L{}\t{c:.6}", (i + 1) * s));
    }
    if let Some(c) = fit.intercept {
        ctx.line(format!("const\t{c:.6}"));
    }
    ctx.line(format!("sigma2\t{:.6}", fit.sigma2));
    ctx.line(format!("log likelihood\t{:.4}", fit.loglik));
    ctx.line(format!("AIC\t{:.4}", fit.aic));
}

fn fit_order(source: &Source, order: &OrderArgs) -> Result<(TimeSeries, arima::ArimaFit)> {
    let ts = source.load()?;
    let o = order.order();
    let fit = arima::arima_fit(&ts, o, order.intercept.unwrap_or(o.default_intercept()))?;
    Ok((ts, fit))
}

fn cmd_arima_fit(a: ArimaFitArgs, ctx: &mut Context) -> Result<()> {
    let (ts, fit) = fit_order(&a.source, &a.order)?;
    arima_report(&fit, ctx);
    if let Some(path) = &a.diagnostics {
        let d = arima::diagnostics_summary(&fit)?;
        ctx.render(plot::residual_panel(&d, format!("{} diagnostics: {}", fit.order, ts.name())), path)?;
    }
    Ok(())
}

fn cmd_arima_auto(a: ArimaAutoArgs, ctx: &mut Context) -> Result<()> {
    let ts = a.source.load()?;
    let result = match a.seasonal_s {
        Some(s) => arima::auto_seasonal_search(&ts, s, a.seasonal_bound)?,
        None => {
            let [p, d, q] = a.max;
            arima::auto_order_search(&ts, p, d, q)?
        }
    };
    ctx.line("order\tAIC");
    for c in &result.table {
        match &c.outcome {
            Ok(aic) => ctx.line(format!("{}\t{aic:.4}", c.order)),
            Err(why) => ctx.line(format!("{}\tfailed: {why}", c.order)),
        }
    }
    ctx.line(format!("best: {}", result.best));
    arima_report(&result.best_fit, ctx);
    Ok(())
}

fn cmd_arima_forecast(a: ArimaForecastArgs, ctx: &mut Context) -> Result<()> {
    let (ts, fit) = fit_order(&a.source, &a.order)?;
    arima_report(&fit, ctx);
    let r = arima::arima_forecast(&fit, a.forecast.horizon, a.forecast.level)?;
    forecast_output(&ts, &r, &a.forecast, ctx)
}

fn cmd_arima_suggest(a: ArimaSuggestArgs, ctx: &mut Context) -> Result<()> {
    let ts = a.source.load()?;
    let s = a.s.unwrap_or(ts.freq().as_usize());
    let mut values = ts.values().to_vec();
    if a.seasonal_d > 0 {
        values = transform::difference_slice(&values, DifferenceSpec::new(s, a.seasonal_d)?)?;
    }
    if a.d > 0 {
        values = transform::difference_slice(&values, DifferenceSpec::new(1, a.d)?)?;
    }
    let sug = arima::suggest_order(&values, s, a.max_consider)?;
    let mut order = sug.order;
    order.d = a.d;
    if order.s > 1 {
        order.seasonal_d = a.seasonal_d;
    }
    ctx.line(format!("suggested: {order}"));
    ctx.line(format!("rationale: {}", sug.rationale));
    Ok(())
}

fn cmd_regress(a: RegressArgs, ctx: &mut Context) -> Result<()> {
    let frame = a.source.load()?;
    let formula: Formula = a.formula.parse()?;
    let y = frame.series(&formula.response)?;
    let xs: Vec<TimeSeries> = formula
        .regressors
        .iter()
        .map(|name| frame.series(name))
        .collect::<Result<_>>()?;
    let (fit, pipeline) = match a.forecast {
        None => {
            let cols: Vec<(String, Vec<f64>)> = xs.iter().map(|x| (x.name().to_string(), x.values().to_vec())).collect();
            (regress::ols_fit(y.values(), &cols)?, None)
        }
        Some(h) => {
            let method = match a.method {
                RegressorChoice::Holt => RegressorMethod::Holt,
                RegressorChoice::Arima => {
                    let [p, d, q] = a.order;
                    RegressorMethod::Arima(ModelOrder::new(p, d, q))
                }
            };
            let r = regress::forecast_with_regressors(&y, &xs, h, method, a.level)?;
            (r.fit.clone(), Some(r))
        }
    };
    ols_report(&fit, &formula, ctx);
    if let Some(r) = pipeline {
        if let Some(dir) = &a.plot_dir {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.as_path(), e))?;
        }
        for (name, f) in &r.regressor_forecasts {
            let x = xs.iter().find(|x| x.name() == name).expect("regressor present");
            ctx.line(format!("{name} forecast ({}): {}", f.method, join_values(&f.future)));
            if let Some(dir) = &a.plot_dir {
                ctx.render(plot::forecast_plot(x, f, format!("{name} forecast")), &dir.join(format!("{name}.svg")))?;
            }
        }
        let opts = ForecastOut {
            horizon: r.forecast.future.len(),
            level: a.level,
            out: a.plot_dir.as_ref().map(|d| d.join(format!("{}.svg", formula.response))),
            out_csv: a.out_csv.clone(),
        };
        forecast_output(&y, &r.forecast, &opts, ctx)?;
    }
    Ok(())
}

fn join_values(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(", ")
}

fn ols_report(fit: &regress::OlsFit, formula: &Formula, ctx: &mut Context) {
    ctx.line(format!("OLS regression: {} ~ {}", formula.response, formula.regressors.join(" + ")));
    ctx.line(format!("observations\t{}", fit.n));
    ctx.line(format!("R-squared\t{:.4}", fit.r_squared));
    ctx.line(format!("adj. R-squared\t{:.4}", fit.adj_r_squared));
    ctx.line(format!("F-statistic\t{:.4}", fit.f_stat));
    ctx.line(format!("Prob (F-statistic)\t{:.3e}", fit.f_p_value));
    ctx.line("");
    ctx.line("variable\tcoef\tstd err\tt\tP>|t|");
    for i in 0..fit.names.len() {
        ctx.line(format!(
            "{}\t{:.6}\t{:.6}\t{:.4}\t{:.4e}",
            fit.names[i], fit.coefficients[i], fit.stderr[i], fit.t_stats[i], fit.p_values[i]
        ));
    }
    let sig = regress::significance_assessment(fit);
    ctx.line("");
    ctx.line(format!(
        "overall: {} ({})",
        if sig.overall { "significant" } else { "not significant" },
        sig.basis
    ));
    for (name, ok) in &sig.per_variable {
        ctx.line(format!("{name}: {}", if *ok { "significant" } else { "not significant" }));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn list_parsing() {
        assert_eq!(parse_triple("1, 1,2").unwrap(), [1, 1, 2]);
        assert!(parse_triple("1,2").is_err());
        assert!(parse_seasonal("0,1,1").is_err());
        assert_eq!(parse_seasonal("0,1,1,12").unwrap(), [0, 1, 1, 12]);
        assert!(parse_level("85").is_err());
    }

    #[test]
    fn help_exits_zero_and_unknown_flag_exits_one() {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        assert_eq!(run_with(["chronofit", "--help"], &mut out, &mut err), 0);
        assert!(String::from_utf8(out).unwrap().contains("arima"));
        let (mut out, mut err) = (Vec::new(), Vec::new());
        assert_eq!(run_with(["chronofit", "acf", "--bogus"], &mut out, &mut err), 1);
        assert!(!err.is_empty());
    }

    #[test]
    fn generated_white_noise_source() {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run_with(
            ["chronofit", "acf", "--white-noise", "400", "--seed", "3", "--lags", "10"],
            &mut out,
            &mut err,
        );
        assert_eq!(code, 0, "{}", String::from_utf8_lossy(&err));
        let text = String::from_utf8(out).unwrap();
        assert!(text.contains("n = 400"));
    }
}
