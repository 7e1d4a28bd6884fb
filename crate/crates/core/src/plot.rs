//! Deterministic standalone SVG charts.

use std::fmt::Write as _;
use std::path::Path;

use crate::arima::ArimaDiagnostics;
use crate::baseline::ForecastResult;
use crate::decompose::Decomposition;
use crate::diagnostics::Correlogram;
use crate::error::{Error, Result};
use crate::series::{SeasonalLayout, TimeSeries};

pub const THEME_ENV: &str = "CHRONOFIT_PLOT_THEME";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    Time,
    Seasonal,
    Decomposition,
    Correlogram,
    ForecastFan,
    Scatter,
    ScatterMatrix,
    ResidualPanel,
}

impl PlotKind {
    pub const ALL: [PlotKind; 8] = [
        PlotKind::Time,
        PlotKind::Seasonal,
        PlotKind::Decomposition,
        PlotKind::Correlogram,
        PlotKind::ForecastFan,
        PlotKind::Scatter,
        PlotKind::ScatterMatrix,
        PlotKind::ResidualPanel,
    ];

    fn columns(self, panels: usize) -> usize {
        match self {
            PlotKind::ScatterMatrix => (1..=panels).find(|c| c * c >= panels).unwrap_or(1),
            PlotKind::ResidualPanel => panels.min(2),
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Line,
    Dashed,
    Markers,
    /// Vertical segments from zero.
    Stems,
    /// Bars from zero, each as wide as the x spacing.
    Bars,
    /// Shaded region between `y` (lower) and `upper`.
    Band,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub name: String,
    pub role: Role,
    pub x: Vec<f64>,
    /// Gaps (`None`) break lines and are skipped otherwise.
    pub y: Vec<Option<f64>>,
    pub upper: Option<Vec<f64>>,
}

impl Layer {
    pub fn new(name: impl Into<String>, role: Role, x: Vec<f64>, y: Vec<Option<f64>>) -> Self {
        Layer {
            name: name.into(),
            role,
            x,
            y,
            upper: None,
        }
    }

    pub fn dense(name: impl Into<String>, role: Role, x: Vec<f64>, y: &[f64]) -> Self {
        Self::new(name, role, x, y.iter().map(|&v| Some(v)).collect())
    }

    pub fn band(name: impl Into<String>, x: Vec<f64>, lower: &[f64], upper: Vec<f64>) -> Self {
        Layer {
            upper: Some(upper),
            ..Self::dense(name, Role::Band, x, lower)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    pub title: String,
    pub layers: Vec<Layer>,
    /// Half-width of a shaded horizontal band around zero.
    pub band: Option<f64>,
}

impl Panel {
    pub fn new(title: impl Into<String>, layers: Vec<Layer>) -> Self {
        Panel {
            title: title.into(),
            layers,
            band: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Theme {
    Light,
    Dark,
}

impl Theme {
    /// `dark` selects the dark palette; anything else, or unset, is light.
    pub fn from_env() -> Self {
        match std::env::var(THEME_ENV) {
            Ok(v) if v.eq_ignore_ascii_case("dark") => Theme::Dark,
            _ => Theme::Light,
        }
    }

    fn background(self) -> &'static str {
        match self {
            Theme::Light => "#ffffff",
            Theme::Dark => "#1e1e1e",
        }
    }

    fn foreground(self) -> &'static str {
        match self {
            Theme::Light => "#222222",
            Theme::Dark => "#dddddd",
        }
    }

    fn grid(self) -> &'static str {
        match self {
            Theme::Light => "#e0e0e0",
            Theme::Dark => "#3a3a3a",
        }
    }

    fn palette(self) -> &'static [&'static str] {
        match self {
            Theme::Light => &["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"],
            Theme::Dark => &["#4fa3e0", "#ff6b6b", "#6bd36b", "#ffb347", "#c39bd3", "#d7a98c"],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub kind: PlotKind,
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub width: u32,
    pub height: u32,
    pub theme: Theme,
    pub panels: Vec<Panel>,
}

impl PlotSpec {
    pub fn new(kind: PlotKind, title: impl Into<String>, panels: Vec<Panel>) -> Self {
        let rows = panels.len().div_ceil(kind.columns(panels.len()).max(1)).max(1) as u32;
        PlotSpec {
            kind,
            title: title.into(),
            x_label: String::new(),
            y_label: String::new(),
            width: 800,
            height: 120 + 260 * rows.min(4),
            theme: Theme::Light,
            panels,
        }
    }

    pub fn labels(mut self, x: impl Into<String>, y: impl Into<String>) -> Self {
        self.x_label = x.into();
        self.y_label = y.into();
        self
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |m: String| Err(Error::InvalidInput(format!("plot {:?}: {m}", self.title)));
        if self.width == 0 || self.height == 0 {
            return invalid("dimensions must be positive".into());
        }
        if self.panels.is_empty() {
            return invalid("no panels".into());
        }
        for panel in &self.panels {
            if panel.layers.is_empty() {
                return invalid(format!("panel {:?} has no data layers", panel.title));
            }
            for layer in &panel.layers {
                if layer.x.len() != layer.y.len()
                    || layer.upper.as_ref().is_some_and(|u| u.len() != layer.x.len())
                {
                    return invalid(format!("layer {:?} has mismatched lengths", layer.name));
                }
                if layer.role == Role::Band && layer.upper.is_none() {
                    return invalid(format!("band layer {:?} has no upper bound", layer.name));
                }
                let finite = |v: f64| v.is_finite();
                if !layer.x.iter().copied().all(finite)
                    || !layer.y.iter().flatten().copied().all(finite)
                    || !layer.upper.iter().flatten().copied().all(finite)
                {
                    return invalid(format!("layer {:?} has non-finite values", layer.name));
                }
            }
        }
        Ok(())
    }
}

struct Frame {
    left: f64,
    top: f64,
    width: f64,
    height: f64,
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        self.left + (x - self.x0) / (self.x1 - self.x0) * self.width
    }

    fn py(&self, y: f64) -> f64 {
        self.top + (self.y1 - y) / (self.y1 - self.y0) * self.height
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo <= f64::EPSILON * hi.abs().max(1.0) {
        let d = hi.abs().max(1.0) * 0.5;
        return (lo - d, hi + d);
    }
    let pad = (hi - lo) * 0.05;
    (lo - pad, hi + pad)
}

/// Roughly five round-numbered ticks inside `[lo, hi]`.
fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let raw = (hi - lo) / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|i| i as f64 * step).collect()
}

fn tick_label(v: f64) -> String {
    let v = if v.abs() < 1e-12 { 0.0 } else { v };
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_string()
}

fn bounds(panel: &Panel) -> (f64, f64, f64, f64) {
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for layer in &panel.layers {
        for (i, &x) in layer.x.iter().enumerate() {
            // x spans every position so panels sharing a time axis line up
            x0 = x0.min(x);
            x1 = x1.max(x);
            let ys = layer.y[i].into_iter().chain(layer.upper.as_ref().map(|u| u[i]));
            for y in ys {
                y0 = y0.min(y);
                y1 = y1.max(y);
            }
        }
        if matches!(layer.role, Role::Stems | Role::Bars) {
            y0 = y0.min(0.0);
            y1 = y1.max(0.0);
        }
        if layer.role == Role::Bars && layer.x.len() > 1 {
            let half = (layer.x[1] - layer.x[0]).abs() / 2.0;
            x0 = x0.min(layer.x[0] - half);
            x1 = x1.max(layer.x[layer.x.len() - 1] + half);
        }
    }
    if let Some(b) = panel.band {
        y0 = y0.min(-b);
        y1 = y1.max(b);
    }
    let (x0, x1) = padded(x0, x1);
    let (y0, y1) = padded(y0, y1);
    (x0, x1, y0, y1)
}

fn draw_layer(out: &mut String, f: &Frame, layer: &Layer, color: &str) {
    let pts = |idx: &mut dyn Iterator<Item = usize>| -> String {
        idx.map(|i| format!("{:.2},{:.2}", f.px(layer.x[i]), f.py(layer.y[i].unwrap())))
            .collect::<Vec<_>>()
            .join(" ")
    };
    match layer.role {
        Role::Line | Role::Dashed => {
            let dash = if layer.role == Role::Dashed { r#" stroke-dasharray="6,4""# } else { "" };
            let mut run: Vec<usize> = Vec::new();
            let flush = |run: &mut Vec<usize>, out: &mut String| {
                if run.len() == 1 {
                    let i = run[0];
                    let _ = writeln!(
                        out,
                        r#"<circle cx="{:.2}" cy="{:.2}" r="1.50" fill="{color}"/>"#,
                        f.px(layer.x[i]),
                        f.py(layer.y[i].unwrap())
                    );
                } else if run.len() > 1 {
                    let _ = writeln!(
                        out,
                        r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.50"{dash}/>"#,
                        pts(&mut run.iter().copied())
                    );
                }
                run.clear();
            };
            for (i, y) in layer.y.iter().enumerate() {
                if y.is_some() {
                    run.push(i);
                } else {
                    flush(&mut run, out);
                }
            }
            flush(&mut run, out);
        }
        Role::Markers => {
            for (x, y) in layer.x.iter().zip(&layer.y) {
                if let Some(y) = y {
                    let _ = writeln!(
                        out,
                        r#"<circle cx="{:.2}" cy="{:.2}" r="2.50" fill="{color}" fill-opacity="0.80"/>"#,
                        f.px(*x),
                        f.py(*y)
                    );
                }
            }
        }
        Role::Stems => {
            let zero = f.py(0.0);
            for (x, y) in layer.x.iter().zip(&layer.y) {
                if let Some(y) = y {
                    let (px, py) = (f.px(*x), f.py(*y));
                    let _ = writeln!(
                        out,
                        r#"<line x1="{px:.2}" y1="{zero:.2}" x2="{px:.2}" y2="{py:.2}" stroke="{color}" stroke-width="1.50"/>"#
                    );
                    let _ = writeln!(out, r#"<circle cx="{px:.2}" cy="{py:.2}" r="2.50" fill="{color}"/>"#);
                }
            }
        }
        Role::Bars => {
            let half = if layer.x.len() > 1 {
                (layer.x[1] - layer.x[0]).abs() / 2.0
            } else {
                0.5
            };
            let zero = f.py(0.0);
            for (x, y) in layer.x.iter().zip(&layer.y) {
                if let Some(y) = y {
                    let (l, r) = (f.px(x - half), f.px(x + half));
                    let py = f.py(*y);
                    let _ = writeln!(
                        out,
                        r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{color}" fill-opacity="0.70" stroke="{color}"/>"#,
                        l,
                        py.min(zero),
                        r - l,
                        (zero - py).abs()
                    );
                }
            }
        }
        Role::Band => {
            let upper = layer.upper.as_ref().expect("validated band");
            let mut points: Vec<String> = Vec::new();
            for (i, x) in layer.x.iter().enumerate() {
                if layer.y[i].is_some() {
                    points.push(format!("{:.2},{:.2}", f.px(*x), f.py(upper[i])));
                }
            }
            for (i, x) in layer.x.iter().enumerate().rev() {
                if let Some(lo) = layer.y[i] {
                    points.push(format!("{:.2},{:.2}", f.px(*x), f.py(lo)));
                }
            }
            let _ = writeln!(
                out,
                r#"<polygon points="{}" fill="{color}" fill-opacity="0.20" stroke="none"/>"#,
                points.join(" ")
            );
        }
    }
}

fn draw_panel(out: &mut String, spec: &PlotSpec, panel: &Panel, f: &Frame, show_x_label: bool) {
    let theme = spec.theme;
    let fg = theme.foreground();
    let _ = writeln!(out, "<g>");
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" font-size="13" text-anchor="middle" fill="{fg}">{}</text>"#,
        f.left + f.width / 2.0,
        f.top - 8.0,
        escape(&panel.title)
    );
    for t in ticks(f.y0, f.y1) {
        let y = f.py(t);
        let _ = writeln!(
            out,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{}" stroke-width="1"/>"#,
            f.left,
            f.left + f.width,
            theme.grid()
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-size="10" text-anchor="end" fill="{fg}">{}</text>"#,
            f.left - 4.0,
            y + 3.5,
            tick_label(t)
        );
    }
    for t in ticks(f.x0, f.x1) {
        let x = f.px(t);
        let _ = writeln!(
            out,
            r#"<text x="{x:.2}" y="{:.2}" font-size="10" text-anchor="middle" fill="{fg}">{}</text>"#,
            f.top + f.height + 14.0,
            tick_label(t)
        );
    }
    if let Some(b) = panel.band {
        let (top, bottom) = (f.py(b), f.py(-b));
        let _ = writeln!(
            out,
            r#"<rect class="band" x="{:.2}" y="{top:.2}" width="{:.2}" height="{:.2}" fill="{}" fill-opacity="0.25"/>"#,
            f.left,
            f.width,
            bottom - top,
            theme.palette()[0]
        );
    }
    if f.y0 < 0.0 && f.y1 > 0.0 {
        let y = f.py(0.0);
        let _ = writeln!(
            out,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{fg}" stroke-width="0.75"/>"#,
            f.left,
            f.left + f.width
        );
    }
    let palette = theme.palette();
    let multi = panel.layers.len() > 1;
    for (i, layer) in panel.layers.iter().enumerate() {
        draw_layer(out, f, layer, palette[i % palette.len()]);
        if multi && !layer.name.is_empty() {
            let ly = f.top + 12.0 + 13.0 * i as f64;
            let lx = f.left + f.width - 8.0;
            let _ = writeln!(
                out,
                r#"<text x="{lx:.2}" y="{ly:.2}" font-size="10" text-anchor="end" fill="{}">{}</text>"#,
                palette[i % palette.len()],
                escape(&layer.name)
            );
        }
    }
    let _ = writeln!(
        out,
        r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="{fg}" stroke-width="1"/>"#,
        f.left, f.top, f.width, f.height
    );
    if show_x_label && !spec.x_label.is_empty() {
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="middle" fill="{fg}">{}</text>"#,
            f.left + f.width / 2.0,
            f.top + f.height + 30.0,
            escape(&spec.x_label)
        );
    }
    let _ = writeln!(out, "</g>");
}

/// Renders `spec` to an SVG document; identical specs give identical bytes.
pub fn to_svg(spec: &PlotSpec) -> Result<String> {
    spec.validate()?;
    let (w, h) = (spec.width as f64, spec.height as f64);
    let theme = spec.theme;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}" font-family="sans-serif">"#,
        spec.width, spec.height, spec.width, spec.height
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="{}"/>"#, theme.background());
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="24.00" font-size="16" text-anchor="middle" fill="{}">{}</text>"#,
        w / 2.0,
        theme.foreground(),
        escape(&spec.title)
    );
    if !spec.y_label.is_empty() {
        let _ = writeln!(
            out,
            r#"<text x="14.00" y="{:.2}" font-size="11" text-anchor="middle" fill="{}" transform="rotate(-90 14.00 {:.2})">{}</text>"#,
            h / 2.0,
            theme.foreground(),
            h / 2.0,
            escape(&spec.y_label)
        );
    }
    let n = spec.panels.len();
    let cols = spec.kind.columns(n).max(1);
    let rows = n.div_ceil(cols);
    let (margin_l, margin_r, margin_t, margin_b) = (64.0, 20.0, 44.0, 40.0);
    let cell_w = (w - margin_l - margin_r) / cols as f64;
    let cell_h = (h - margin_t - margin_b) / rows as f64;
    for (i, panel) in spec.panels.iter().enumerate() {
        let (r, c) = (i / cols, i % cols);
        let (x0, x1, y0, y1) = bounds(panel);
        let frame = Frame {
            left: margin_l + c as f64 * cell_w,
            top: margin_t + r as f64 * cell_h + 14.0,
            width: (cell_w - 24.0).max(1.0),
            height: (cell_h - 40.0).max(1.0),
            x0,
            x1,
            y0,
            y1,
        };
        draw_panel(&mut out, spec, panel, &frame, r + 1 == rows);
    }
    out.push_str("</svg>\n");
    Ok(out)
}

pub fn render_svg(spec: &PlotSpec, path: impl AsRef<Path>) -> Result<()> {
    let svg = to_svg(spec)?;
    let path = path.as_ref();
    std::fs::write(path, svg).map_err(|e| Error::io(path, e))
}

/// Decimal-year positions of observations `offset..offset + count`.
pub fn time_axis(ts: &TimeSeries, offset: i64, count: usize) -> Vec<f64> {
    let s = ts.freq().get() as f64;
    (0..count as i64)
        .map(|i| {
            let p = ts.start().shift(offset + i, ts.freq());
            p.year as f64 + (p.period as f64 - 1.0) / s
        })
        .collect()
}

pub fn time_plot(series: &[&TimeSeries], title: impl Into<String>) -> PlotSpec {
    let layers = series
        .iter()
        .map(|ts| Layer::dense(ts.name(), Role::Line, time_axis(ts, 0, ts.len()), ts.values()))
        .collect();
    PlotSpec::new(PlotKind::Time, title, vec![Panel::new("", layers)]).labels("time", "value")
}

pub fn seasonal_plot(layout: &SeasonalLayout, title: impl Into<String>) -> PlotSpec {
    let layers = layout
        .rows
        .iter()
        .zip(&layout.row_years)
        .map(|(row, year)| {
            let x = (1..=row.len()).map(|i| i as f64).collect();
            Layer::dense(year.to_string(), Role::Line, x, row)
        })
        .collect();
    let first = layout.labels.first().cloned().unwrap_or_default();
    PlotSpec::new(PlotKind::Seasonal, title, vec![Panel::new("", layers)])
        .labels(format!("position in cycle (1 = {first})"), "value")
}

pub fn decomposition_plot(ts: &TimeSeries, d: &Decomposition, title: impl Into<String>) -> PlotSpec {
    let x = time_axis(ts, 0, ts.len());
    let panel = |name: &str, y: Vec<Option<f64>>, role| Panel::new(name, vec![Layer::new(name, role, x.clone(), y)]);
    let dense = |v: &[f64]| v.iter().map(|&v| Some(v)).collect();
    PlotSpec::new(
        PlotKind::Decomposition,
        title,
        vec![
            panel("observed", dense(ts.values()), Role::Line),
            panel("trend", d.trend.clone(), Role::Line),
            panel("seasonal", dense(&d.seasonal), Role::Line),
            panel("remainder", d.remainder.clone(), Role::Markers),
        ],
    )
    .labels("time", "")
}

fn correlogram_panel(c: &Correlogram, title: impl Into<String>, skip_zero: bool) -> Panel {
    let from = usize::from(skip_zero);
    let x = c.lags[from..].iter().map(|&k| k as f64).collect();
    Panel {
        band: Some(c.band),
        ..Panel::new(title, vec![Layer::dense("", Role::Stems, x, &c.coefficients[from..])])
    }
}

pub fn correlogram_plot(c: &Correlogram, title: impl Into<String>) -> PlotSpec {
    let title = title.into();
    PlotSpec::new(PlotKind::Correlogram, title.clone(), vec![correlogram_panel(c, "", false)]).labels("lag", "coefficient")
}

/// History, fitted values, point forecasts and the interval fan.
pub fn forecast_plot(ts: &TimeSeries, r: &ForecastResult, title: impl Into<String>) -> PlotSpec {
    let n = ts.len();
    let h = r.future.len();
    let x_hist = time_axis(ts, 0, n);
    let mut layers = Vec::new();
    if let Some(iv) = &r.intervals {
        layers.push(Layer::band(
            format!("{:.0}% interval", 100.0 * crate::stats::normal_coverage(iv.z)),
            time_axis(ts, n as i64, h),
            &iv.lower,
            iv.upper.clone(),
        ));
    }
    layers.push(Layer::dense("observed", Role::Line, x_hist.clone(), ts.values()));
    layers.push(Layer::new("fitted", Role::Dashed, x_hist, r.fitted.clone()));
    if h > 0 {
        // joined to the last observation so the forecast reads as a continuation
        let mut x = time_axis(ts, n as i64 - 1, h + 1);
        let mut y = vec![Some(ts.values()[n - 1])];
        y.extend(r.future.iter().map(|&v| Some(v)));
        if n == 0 {
            x.remove(0);
            y.remove(0);
        }
        layers.push(Layer::new("forecast", Role::Line, x, y));
    }
    PlotSpec::new(PlotKind::ForecastFan, title, vec![Panel::new(r.method.clone(), layers)]).labels("time", ts.name())
}

pub fn scatter_plot(x: (&str, &[f64]), y: (&str, &[f64]), title: impl Into<String>) -> PlotSpec {
    let layer = Layer::dense("", Role::Markers, x.1.to_vec(), y.1);
    PlotSpec::new(PlotKind::Scatter, title, vec![Panel::new("", vec![layer])]).labels(x.0, y.0)
}

/// One panel per ordered pair; the diagonal shows each column against time.
pub fn scatter_matrix(columns: &[(String, Vec<f64>)], title: impl Into<String>) -> PlotSpec {
    let mut panels = Vec::new();
    for (ni, yi) in columns {
        for (nj, xj) in columns {
            let layer = if ni == nj {
                let t = (0..yi.len()).map(|t| t as f64).collect();
                Layer::dense("", Role::Line, t, yi)
            } else {
                Layer::dense("", Role::Markers, xj.clone(), yi)
            };
            panels.push(Panel::new(format!("{ni} vs {nj}"), vec![layer]));
        }
    }
    let mut spec = PlotSpec::new(PlotKind::ScatterMatrix, title, panels);
    spec.height = spec.width;
    spec
}

/// Residuals over time, histogram, normal QQ and residual correlogram.
pub fn residual_panel(d: &ArimaDiagnostics, title: impl Into<String>) -> PlotSpec {
    let r = &d.residuals;
    let centers: Vec<f64> = d.histogram.edges.windows(2).map(|w| (w[0] + w[1]) / 2.0).collect();
    let counts: Vec<f64> = d.histogram.counts.iter().map(|&c| c as f64).collect();
    let (theo, sample): (Vec<f64>, Vec<f64>) = d.qq_points.iter().copied().unzip();
    let lo = theo.first().copied().unwrap_or(-1.0);
    let hi = theo.last().copied().unwrap_or(1.0);
    let panels = vec![
        Panel::new(
            "standardized residuals",
            vec![Layer::dense("", Role::Line, time_axis(r, 0, r.len()), &d.standardized)],
        ),
        Panel::new("histogram", vec![Layer::dense("", Role::Bars, centers, &counts)]),
        Panel::new(
            "normal Q-Q",
            vec![
                Layer::dense("", Role::Markers, theo, &sample),
                Layer::dense("", Role::Line, vec![lo, hi], &[lo, hi]),
            ],
        ),
        correlogram_panel(&d.residual_acf, "correlogram", true),
    ];
    PlotSpec::new(PlotKind::ResidualPanel, title, panels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::Frequency;

    fn sample_spec(kind: PlotKind) -> PlotSpec {
        let x: Vec<f64> = (0..20).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|v| (v / 3.0).sin()).collect();
        let mut panel = Panel::new("p", vec![Layer::dense("a", Role::Line, x.clone(), &y)]);
        if kind == PlotKind::Correlogram {
            panel.band = Some(0.2);
        }
        PlotSpec::new(kind, "t", vec![panel])
    }

    #[test]
    fn deterministic_for_every_kind() {
        for kind in PlotKind::ALL {
            let spec = sample_spec(kind);
            assert_eq!(to_svg(&spec).unwrap(), to_svg(&spec.clone()).unwrap());
        }
    }

    #[test]
    fn correlogram_band_geometry() {
        let c = Correlogram {
            lags: vec![0, 1, 2, 3],
            coefficients: vec![1.0, 0.5, -0.1, 0.05],
            band: 0.2,
            n: 96,
        };
        let spec = correlogram_plot(&c, "acf");
        let svg = to_svg(&spec).unwrap();
        let (x0, x1, y0, y1) = bounds(&spec.panels[0]);
        assert!(y0 < -0.2 && y1 > 1.0 && x0 < 0.0 && x1 > 3.0);
        let line = svg.lines().find(|l| l.contains(r#"class="band""#)).unwrap();
        let attr = |name: &str| -> f64 {
            let start = line.find(&format!(" {name}=\"")).unwrap() + name.len() + 3;
            line[start..].split('"').next().unwrap().parse().unwrap()
        };
        // rebuild the frame to map the rectangle back to data units
        let height = (spec.height as f64 - 84.0) - 40.0;
        let top = 44.0 + 14.0;
        let to_data = |py: f64| y1 - (py - top) / height * (y1 - y0);
        assert!((to_data(attr("y")) - 0.2).abs() < 0.01);
        assert!((to_data(attr("y") + attr("height")) + 0.2).abs() < 0.01);
        assert!(svg.matches("<line x1=").count() >= 3);
    }

    #[test]
    fn empty_layers_rejected() {
        let spec = PlotSpec::new(PlotKind::Time, "t", vec![Panel::new("p", vec![])]);
        assert!(matches!(to_svg(&spec), Err(Error::InvalidInput(_))));
        assert!(to_svg(&PlotSpec::new(PlotKind::Time, "t", vec![])).is_err());
        let mut spec = sample_spec(PlotKind::Time);
        spec.width = 0;
        assert!(spec.validate().is_err());
        let mut spec = sample_spec(PlotKind::Time);
        spec.panels[0].layers[0].x.pop();
        assert!(spec.validate().is_err());
    }

    #[test]
    fn gaps_split_lines_and_text_is_escaped() {
        let layer = Layer::new("a<b", Role::Line, vec![0.0, 1.0, 2.0, 3.0, 4.0], vec![Some(1.0), Some(2.0), None, Some(1.0), Some(0.0)]);
        let spec = PlotSpec::new(PlotKind::Time, "x & y", vec![Panel::new("p", vec![layer.clone(), layer])]);
        let svg = to_svg(&spec).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 4);
        assert!(svg.contains("x &amp; y") && svg.contains("a&lt;b"));
    }

    #[test]
    fn builders_produce_valid_specs() {
        let ts = TimeSeries::new(
            (0..36).map(|t| 10.0 + (t % 12) as f64).collect(),
            crate::series::Period::new(2000, 1),
            Frequency::MONTHLY,
            "y",
        )
        .unwrap();
        let d = crate::decompose::classical_decompose(&ts, crate::decompose::DecompositionKind::Additive).unwrap();
        let nf = crate::baseline::nf1(&ts, 4).unwrap().with_intervals(1.0, crate::baseline::ConfidenceLevel::P80).unwrap();
        let layout = crate::series::seasonal_layout(&ts).unwrap();
        let cols = vec![("a".to_string(), vec![1.0, 2.0, 3.0]), ("b".to_string(), vec![3.0, 1.0, 2.0])];
        for spec in [
            time_plot(&[&ts], "t"),
            seasonal_plot(&layout, "s"),
            decomposition_plot(&ts, &d, "d"),
            forecast_plot(&ts, &nf, "f"),
            scatter_plot(("a", &cols[0].1), ("b", &cols[1].1), "sc"),
            scatter_matrix(&cols, "m"),
        ] {
            to_svg(&spec).unwrap();
        }
        assert_eq!(time_axis(&ts, 13, 1), vec![2001.0 + 1.0 / 12.0]);
        let svg = to_svg(&forecast_plot(&ts, &nf, "f")).unwrap();
        assert!(svg.contains("<polygon") && svg.contains("80% interval"));
    }
}
