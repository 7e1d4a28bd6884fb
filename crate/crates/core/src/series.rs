//! Time series data model, CSV ingestion/serialization and seasonal re-layout.
//!
//! The interchange format is a UTF-8 CSV with a header row. The date column
//! holds `YYYY` (annual), `YYYY-Qn` (quarterly) or `YYYY-MM` (monthly, or any
//! frequency dividing 12 when the months are evenly spaced). Every other
//! column is numeric; missing or non-finite cells are rejected.

use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};

const MONTH_NAMES: [&str; 12] = [
    "Jan", "Feb", "Mar", "Apr", "May", "Jun", "Jul", "Aug", "Sep", "Oct", "Nov", "Dec",
];

/// Number of observation periods per year.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Frequency(u32);

impl Frequency {
    pub const ANNUAL: Frequency = Frequency(1);
    pub const QUARTERLY: Frequency = Frequency(4);
    pub const MONTHLY: Frequency = Frequency(12);

    pub fn new(periods_per_year: u32) -> Result<Self> {
        if periods_per_year == 0 {
            return Err(Error::InvalidInput(
                "frequency must be at least one period per year".into(),
            ));
        }
        Ok(Frequency(periods_per_year))
    }

    pub fn get(self) -> u32 {
        self.0
    }

    pub fn as_usize(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for Frequency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// A calendar position: the year and the 1-based period inside that year.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Period {
    pub year: i32,
    pub period: u32,
}

impl Period {
    pub fn new(year: i32, period: u32) -> Self {
        Period { year, period }
    }

    fn ordinal(self, freq: Frequency) -> i64 {
        self.year as i64 * freq.0 as i64 + (self.period as i64 - 1)
    }

    fn from_ordinal(ordinal: i64, freq: Frequency) -> Self {
        let s = freq.0 as i64;
        Period {
            year: ordinal.div_euclid(s) as i32,
            period: (ordinal.rem_euclid(s) + 1) as u32,
        }
    }

    /// The period `steps` positions later (earlier when negative).
    pub fn shift(self, steps: i64, freq: Frequency) -> Self {
        Self::from_ordinal(self.ordinal(freq) + steps, freq)
    }

    /// Signed number of periods from `self` to `other`.
    pub fn periods_until(self, other: Period, freq: Frequency) -> i64 {
        other.ordinal(freq) - self.ordinal(freq)
    }

    /// Date label in the CSV format for `freq`, if that frequency has one.
    pub fn format(self, freq: Frequency) -> Option<String> {
        match freq.0 {
            1 => Some(format!("{:04}", self.year)),
            4 => Some(format!("{:04}-Q{}", self.year, self.period)),
            s if 12 % s == 0 => {
                let month = (self.period - 1) * (12 / s) + 1;
                Some(format!("{:04}-{:02}", self.year, month))
            }
            _ => None,
        }
    }

    /// Human-readable label; falls back to `YYYY:p` for frequencies without a CSV form.
    pub fn label(self, freq: Frequency) -> String {
        self.format(freq)
            .unwrap_or_else(|| format!("{}:{}", self.year, self.period))
    }
}

/// Ordered, gapless observations of one variable.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    values: Vec<f64>,
    start: Period,
    freq: Frequency,
    name: String,
}

impl TimeSeries {
    pub fn new(
        values: Vec<f64>,
        start: Period,
        freq: Frequency,
        name: impl Into<String>,
    ) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::TooShort { needed: 1, got: 0 });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain {
                index,
                value: values[index],
                reason: "observations must be finite",
            });
        }
        if start.period == 0 || start.period > freq.0 {
            return Err(Error::InvalidInput(format!(
                "start period {} outside 1..={}",
                start.period, freq.0
            )));
        }
        Ok(TimeSeries {
            values,
            start,
            freq,
            name: name.into(),
        })
    }

    /// Series starting at year 1, period 1, named `value`.
    pub fn from_values(values: Vec<f64>, freq: Frequency) -> Result<Self> {
        Self::new(values, Period::new(1, 1), freq, "value")
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn start(&self) -> Period {
        self.start
    }

    pub fn freq(&self) -> Frequency {
        self.freq
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn end(&self) -> Period {
        self.period_at(self.values.len() - 1)
    }

    pub fn period_at(&self, index: usize) -> Period {
        self.start.shift(index as i64, self.freq)
    }

    /// Same metadata, new values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(values, self.start, self.freq, self.name.clone())
    }

    /// New values whose first observation sits `offset` periods after this series' start.
    pub fn with_values_shifted(&self, values: Vec<f64>, offset: i64) -> Result<Self> {
        Self::new(
            values,
            self.start.shift(offset, self.freq),
            self.freq,
            self.name.clone(),
        )
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

/// Values re-arranged one row per seasonal cycle, for seasonal plots.
#[derive(Debug, Clone, PartialEq)]
pub struct SeasonalLayout {
    pub rows: Vec<Vec<f64>>,
    pub cycle_length: usize,
    /// Period names, starting at the period of the first observation.
    pub labels: Vec<String>,
    /// Year in which each row starts.
    pub row_years: Vec<i32>,
}

/// Partitions `ts` into consecutive cycles of `freq` observations starting at the first one.
pub fn seasonal_layout(ts: &TimeSeries) -> Result<SeasonalLayout> {
    let s = ts.freq.as_usize();
    if s < 2 {
        return Err(Error::Unsupported(
            "seasonal layout requires a frequency of at least 2".into(),
        ));
    }
    let rows: Vec<Vec<f64>> = ts.values.chunks(s).map(<[f64]>::to_vec).collect();
    let row_years = (0..rows.len())
        .map(|r| ts.period_at(r * s).year)
        .collect();
    let labels = (0..s)
        .map(|j| {
            let p = ts.start.shift(j as i64, ts.freq).period as usize;
            period_name(p, s)
        })
        .collect();
    Ok(SeasonalLayout {
        rows,
        cycle_length: s,
        labels,
        row_years,
    })
}

fn period_name(period: usize, s: usize) -> String {
    match s {
        12 => MONTH_NAMES[period - 1].to_string(),
        4 => format!("Q{period}"),
        _ => format!("P{period}"),
    }
}

/// Inclusive sub-series between two calendar positions.
pub fn slice(ts: &TimeSeries, from: Period, to: Period) -> Result<TimeSeries> {
    let lo = ts.start.periods_until(from, ts.freq);
    let hi = ts.start.periods_until(to, ts.freq);
    if lo > hi {
        return Err(Error::InvalidInput(format!(
            "slice bounds reversed: {} after {}",
            from.label(ts.freq),
            to.label(ts.freq)
        )));
    }
    if lo < 0 || hi >= ts.len() as i64 {
        return Err(Error::InvalidInput(format!(
            "slice {}..{} outside series span {}..{}",
            from.label(ts.freq),
            to.label(ts.freq),
            ts.start.label(ts.freq),
            ts.end().label(ts.freq)
        )));
    }
    let (lo, hi) = (lo as usize, hi as usize);
    ts.with_values_shifted(ts.values[lo..=hi].to_vec(), lo as i64)
}

/// Which columns to read from a CSV file.
#[derive(Debug, Clone)]
pub struct CsvSchema {
    pub date_column: String,
    /// `None` selects the first column after the date column.
    pub value_column: Option<String>,
    /// Overrides the frequency inferred from date spacing.
    pub frequency: Option<Frequency>,
}

impl Default for CsvSchema {
    fn default() -> Self {
        CsvSchema {
            date_column: "date".into(),
            value_column: None,
            frequency: None,
        }
    }
}

impl CsvSchema {
    pub fn column(name: impl Into<String>) -> Self {
        CsvSchema {
            value_column: Some(name.into()),
            ..Default::default()
        }
    }
}

/// Several aligned numeric columns sharing one date index.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub start: Period,
    pub freq: Frequency,
    pub columns: Vec<(String, Vec<f64>)>,
}

impl Frame {
    pub fn len(&self) -> usize {
        self.columns.first().map_or(0, |(_, v)| v.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
    }

    pub fn series(&self, name: &str) -> Result<TimeSeries> {
        let values = self
            .column(name)
            .ok_or_else(|| Error::InvalidInput(format!("no column named {name:?}")))?;
        TimeSeries::new(values.to_vec(), self.start, self.freq, name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum DateUnit {
    Year,
    Quarter,
    Month,
}

#[derive(Debug, Clone, Copy)]
struct RawDate {
    unit: DateUnit,
    year: i32,
    sub: u32,
}

impl RawDate {
    fn ordinal(self) -> i64 {
        match self.unit {
            DateUnit::Year => self.year as i64,
            DateUnit::Quarter => self.year as i64 * 4 + self.sub as i64 - 1,
            DateUnit::Month => self.year as i64 * 12 + self.sub as i64 - 1,
        }
    }

    fn units_per_year(self) -> i64 {
        match self.unit {
            DateUnit::Year => 1,
            DateUnit::Quarter => 4,
            DateUnit::Month => 12,
        }
    }
}

fn parse_date(text: &str) -> Option<RawDate> {
    let text = text.trim();
    let parse_year = |y: &str| {
        (y.len() == 4 && y.bytes().all(|b| b.is_ascii_digit()))
            .then(|| y.parse::<i32>().ok())
            .flatten()
    };
    match text.split_once('-') {
        None => parse_year(text).map(|year| RawDate {
            unit: DateUnit::Year,
            year,
            sub: 1,
        }),
        Some((y, rest)) => {
            let year = parse_year(y)?;
            if let Some(q) = rest.strip_prefix('Q').or_else(|| rest.strip_prefix('q')) {
                let sub: u32 = q.parse().ok()?;
                (1..=4).contains(&sub).then_some(RawDate {
                    unit: DateUnit::Quarter,
                    year,
                    sub,
                })
            } else {
                if rest.len() != 2 {
                    return None;
                }
                let sub: u32 = rest.parse().ok()?;
                (1..=12).contains(&sub).then_some(RawDate {
                    unit: DateUnit::Month,
                    year,
                    sub,
                })
            }
        }
    }
}

/// The step is the smallest positive spacing between consecutive dates, so an
/// isolated gap is reported as a gap rather than read as a coarser frequency.
fn infer_frequency(dates: &[(RawDate, u64)]) -> Result<(Frequency, i64)> {
    let first = dates[0].0;
    let per_year = first.units_per_year();
    let smallest = dates
        .windows(2)
        .map(|w| (w[1].0.ordinal() - w[0].0.ordinal(), w[1].1))
        .filter(|&(d, _)| d > 0)
        .min_by_key(|&(d, _)| d);
    let step = match smallest {
        None => 1,
        Some((step, line)) => {
            if per_year % step != 0 {
                return Err(Error::DateSequence {
                    line,
                    message: format!(
                        "cannot infer a frequency from a spacing of {step} {:?} units",
                        first.unit
                    ),
                });
            }
            step
        }
    };
    Ok((Frequency((per_year / step) as u32), step))
}

fn read_frame(path: &Path, date_column: &str, wanted: Option<&[String]>, frequency: Option<Frequency>) -> Result<Frame> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            other => Error::Parse {
                line: 1,
                message: format!("{other:?}"),
            },
        })?;
    let headers = reader
        .headers()
        .map_err(|e| Error::Parse {
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    let date_idx = headers
        .iter()
        .position(|h| h == date_column)
        .ok_or_else(|| Error::Parse {
            line: 1,
            message: format!("missing date column {date_column:?}"),
        })?;
    let value_cols: Vec<(usize, String)> = match wanted {
        Some(names) => names
            .iter()
            .map(|name| {
                headers
                    .iter()
                    .position(|h| h == name)
                    .map(|i| (i, name.clone()))
                    .ok_or_else(|| Error::Parse {
                        line: 1,
                        message: format!("missing column {name:?}"),
                    })
            })
            .collect::<Result<_>>()?,
        None => headers
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != date_idx)
            .map(|(i, h)| (i, h.to_string()))
            .collect(),
    };
    if value_cols.is_empty() {
        return Err(Error::Parse {
            line: 1,
            message: "no value column".into(),
        });
    }

    let mut dates: Vec<(RawDate, u64)> = Vec::new();
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); value_cols.len()];
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.iter().all(str::is_empty) {
            continue;
        }
        let date_text = record.get(date_idx).unwrap_or("");
        let date = parse_date(date_text).ok_or_else(|| Error::Parse {
            line,
            message: format!("unparsable date {date_text:?}"),
        })?;
        if let Some((first, _)) = dates.first() {
            if first.unit != date.unit {
                return Err(Error::Parse {
                    line,
                    message: format!("date {date_text:?} mixes formats with the first row"),
                });
            }
        }
        dates.push((date, line));
        for (slot, (idx, name)) in columns.iter_mut().zip(&value_cols) {
            let cell = record.get(*idx).unwrap_or("");
            if cell.is_empty() {
                return Err(Error::Parse {
                    line,
                    message: format!("missing value in column {name:?}"),
                });
            }
            let value: f64 = cell.parse().map_err(|_| Error::Parse {
                line,
                message: format!("unparsable number {cell:?} in column {name:?}"),
            })?;
            if !value.is_finite() {
                return Err(Error::Parse {
                    line,
                    message: format!("non-finite value {cell:?} in column {name:?}"),
                });
            }
            slot.push(value);
        }
    }
    let Some(&(first, _)) = dates.first() else {
        return Err(Error::TooShort { needed: 1, got: 0 });
    };

    let (freq, step) = match frequency {
        Some(freq) => {
            let per_year = first.units_per_year();
            if per_year % freq.0 as i64 != 0 {
                return Err(Error::InvalidInput(format!(
                    "frequency {freq} is not expressible with {:?} dates",
                    first.unit
                )));
            }
            (freq, per_year / freq.0 as i64)
        }
        None => infer_frequency(&dates)?,
    };

    for pair in dates.windows(2) {
        let (prev, _) = pair[0];
        let (next, line) = pair[1];
        let expected = prev.ordinal() + step;
        let got = next.ordinal();
        if got != expected {
            let missing = format_raw(expected, first.unit);
            let message = if got < expected {
                format!("duplicate or out-of-order date {}", format_raw(got, first.unit))
            } else {
                format!("gap at {missing}")
            };
            return Err(Error::DateSequence { line, message });
        }
    }

    let start = {
        let within_year = first.ordinal().rem_euclid(first.units_per_year());
        Period::new(
            first.ordinal().div_euclid(first.units_per_year()) as i32,
            (within_year / step) as u32 + 1,
        )
    };
    Ok(Frame {
        start,
        freq,
        columns: value_cols
            .into_iter()
            .map(|(_, name)| name)
            .zip(columns)
            .collect(),
    })
}

fn format_raw(ordinal: i64, unit: DateUnit) -> String {
    match unit {
        DateUnit::Year => format!("{ordinal:04}"),
        DateUnit::Quarter => format!("{:04}-Q{}", ordinal.div_euclid(4), ordinal.rem_euclid(4) + 1),
        DateUnit::Month => format!("{:04}-{:02}", ordinal.div_euclid(12), ordinal.rem_euclid(12) + 1),
    }
}

/// Reads one value column of a CSV file into a [`TimeSeries`].
pub fn load_csv(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<TimeSeries> {
    let path = path.as_ref();
    let wanted = schema.value_column.clone().map(|c| vec![c]);
    let mut frame = read_frame(path, &schema.date_column, wanted.as_deref(), schema.frequency)?;
    let (name, values) = frame.columns.swap_remove(0);
    TimeSeries::new(values, frame.start, frame.freq, name)
}

/// Reads every numeric column of a CSV file sharing one date column.
pub fn load_frame(path: impl AsRef<Path>, date_column: &str, frequency: Option<Frequency>) -> Result<Frame> {
    read_frame(path.as_ref(), date_column, None, frequency)
}

/// Writes `date,<name>` rows that [`load_csv`] reads back bit-exactly.
pub fn save_csv(ts: &TimeSeries, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let frame = Frame {
        start: ts.start,
        freq: ts.freq,
        columns: vec![(ts.name.clone(), ts.values.clone())],
    };
    save_frame(&frame, path)
}

/// Writes a frame with a leading `date` column.
pub fn save_frame(frame: &Frame, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if frame.start.format(frame.freq).is_none() {
        return Err(Error::Unsupported(format!(
            "frequency {} has no CSV date representation",
            frame.freq
        )));
    }
    let mut out = String::from("date");
    for (name, _) in &frame.columns {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for i in 0..frame.len() {
        let date = frame.start.shift(i as i64, frame.freq);
        out.push_str(&date.format(frame.freq).expect("checked above"));
        for (_, values) in &frame.columns {
            out.push(',');
            out.push_str(&values[i].to_string());
        }
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn write(dir: &tempfile::TempDir, body: &str) -> std::path::PathBuf {
        let path = dir.path().join("in.csv");
        std::fs::write(&path, body).unwrap();
        path
    }

    #[test]
    fn loads_monthly() {
        let dir = tempfile::tempdir().unwrap();
        let path = write(&dir, "date,value\n1990-01,10\n1990-02,11\n1990-03,12\n");
        let ts = load_csv(&path, &CsvSchema::default()).unwrap();
        assert_eq!(ts.values(), &[10.0, 11.0, 12.0]);
        assert_eq!(ts.start(), Period::new(1990, 1));
        assert_eq!(ts.freq(), Frequency::MONTHLY);
    }

    #[test]
    fn reports_gap() {
        let dir = tempfile::tempdir().unwrap();
        let path = write(&dir, "date,value\n1990-01,10\n1990-03,12\n1990-04,13\n");
        let err = load_csv(&path, &CsvSchema::default()).unwrap_err();
        match err {
            Error::DateSequence { message, .. } => assert!(message.contains("1990-02"), "{message}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn annual_inference() {
        let dir = tempfile::tempdir().unwrap();
        let path = write(&dir, "date,value\r\n1990,5\r\n1991,6\r\n");
        let ts = load_csv(&path, &CsvSchema::default()).unwrap();
        assert_eq!(ts.freq(), Frequency::ANNUAL);
        assert_eq!(ts.start(), Period::new(1990, 1));
    }

    #[test]
    fn quarterly_and_spaced_months() {
        let dir = tempfile::tempdir().unwrap();
        let path = write(&dir, "date,value\n2001-Q3,1\n2001-Q4,2\n2002-Q1,3\n");
        let ts = load_csv(&path, &CsvSchema::default()).unwrap();
        assert_eq!(ts.freq(), Frequency::QUARTERLY);
        assert_eq!(ts.start(), Period::new(2001, 3));

        let path = write(&dir, "date,value\n2001-03,1\n2001-06,2\n2001-09,3\n");
        let ts = load_csv(&path, &CsvSchema::default()).unwrap();
        assert_eq!(ts.freq(), Frequency::QUARTERLY);
        assert_eq!(ts.start(), Period::new(2001, 1));
    }

    #[test]
    fn rejects_duplicates_bad_rows_and_missing_values() {
        let dir = tempfile::tempdir().unwrap();
        let path = write(&dir, "date,value\n1990-01,1\n1990-01,2\n");
        assert!(matches!(
            load_csv(&path, &CsvSchema::default()),
            Err(Error::DateSequence { line: 3, .. })
        ));
        let path = write(&dir, "date,value\n1990-01,1\n1990-02,abc\n");
        assert!(matches!(
            load_csv(&path, &CsvSchema::default()),
            Err(Error::Parse { line: 3, .. })
        ));
        let path = write(&dir, "date,value\n1990-01,1\n1990-02,\n");
        assert!(matches!(load_csv(&path, &CsvSchema::default()), Err(Error::Parse { .. })));
        let path = write(&dir, "date,value\n1990-01,1\n1990-02,inf\n");
        assert!(matches!(load_csv(&path, &CsvSchema::default()), Err(Error::Parse { .. })));
        assert!(matches!(
            load_csv(dir.path().join("missing.csv"), &CsvSchema::default()),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn frequency_override() {
        let dir = tempfile::tempdir().unwrap();
        let path = write(&dir, "date,value\n1990-01,1\n");
        let schema = CsvSchema {
            frequency: Some(Frequency::new(4).unwrap()),
            ..Default::default()
        };
        assert_eq!(load_csv(&path, &schema).unwrap().freq().get(), 4);
    }

    #[test]
    fn save_writes_header_and_rows() {
        let dir = tempfile::tempdir().unwrap();
        let ts = TimeSeries::new((0..24).map(f64::from).collect(), Period::new(2000, 1), Frequency::MONTHLY, "value").unwrap();
        let path = dir.path().join("out.csv");
        save_csv(&ts, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 25);
        assert!(text.starts_with("date,value\n2000-01,0\n"));
        assert!(save_csv(&ts, dir.path().join("no/such/dir/out.csv")).is_err());
        assert!(save_csv(&ts, dir.path()).is_err());
    }

    #[test]
    fn layout_partitions() {
        let ts = TimeSeries::from_values((0..24).map(f64::from).collect(), Frequency::MONTHLY).unwrap();
        let layout = seasonal_layout(&ts).unwrap();
        assert_eq!(layout.rows.len(), 2);
        assert!(layout.rows.iter().all(|r| r.len() == 12));
        assert_eq!(layout.labels[0], "Jan");

        let ts = TimeSeries::from_values((0..14).map(f64::from).collect(), Frequency::MONTHLY).unwrap();
        let layout = seasonal_layout(&ts).unwrap();
        assert_eq!(layout.rows.len(), 2);
        assert_eq!(layout.rows[1].len(), 2);

        let ts = TimeSeries::from_values(vec![1.0, 2.0], Frequency::ANNUAL).unwrap();
        assert!(seasonal_layout(&ts).is_err());
    }

    #[test]
    fn layout_labels_follow_start() {
        let ts = TimeSeries::new(vec![1.0; 6], Period::new(2000, 3), Frequency::QUARTERLY, "x").unwrap();
        let layout = seasonal_layout(&ts).unwrap();
        assert_eq!(layout.labels, vec!["Q3", "Q4", "Q1", "Q2"]);
        assert_eq!(layout.row_years, vec![2000, 2001]);
    }

    #[test]
    fn slicing() {
        let ts = TimeSeries::new((0..36).map(f64::from).collect(), Period::new(2000, 1), Frequency::MONTHLY, "x").unwrap();
        assert_eq!(slice(&ts, ts.start(), ts.end()).unwrap(), ts);
        let mid = slice(&ts, Period::new(2001, 1), Period::new(2001, 12)).unwrap();
        assert_eq!(mid.len(), 12);
        assert_eq!(mid.start(), Period::new(2001, 1));
        assert_eq!(mid.values()[0], 12.0);
        assert!(slice(&ts, Period::new(2001, 5), Period::new(2001, 1)).is_err());
        assert!(slice(&ts, Period::new(1999, 12), Period::new(2001, 1)).is_err());
        assert!(slice(&ts, Period::new(2000, 1), Period::new(2003, 1)).is_err());
    }

    #[test]
    fn rejects_invalid_series() {
        assert!(TimeSeries::from_values(vec![], Frequency::MONTHLY).is_err());
        assert!(TimeSeries::from_values(vec![1.0, f64::NAN], Frequency::MONTHLY).is_err());
        assert!(TimeSeries::new(vec![1.0], Period::new(2000, 13), Frequency::MONTHLY, "x").is_err());
        assert!(Frequency::new(0).is_err());
    }

    fn arb_series() -> impl Strategy<Value = TimeSeries> {
        let freq = prop::sample::select(vec![1u32, 2, 3, 4, 6, 12]);
        (freq, 1900i32..2100, prop::collection::vec(-1e12f64..1e12, 1..80), any::<u32>())
            .prop_map(|(f, year, values, p)| {
                let freq = Frequency::new(f).unwrap();
                TimeSeries::new(values, Period::new(year, p % f + 1), freq, "value").unwrap()
            })
    }

    proptest! {
        #[test]
        fn csv_round_trip_is_exact(ts in arb_series()) {
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("rt.csv");
            save_csv(&ts, &path).unwrap();
            let schema = CsvSchema { frequency: Some(ts.freq()), ..Default::default() };
            let back = load_csv(&path, &schema).unwrap();
            prop_assert_eq!(&back, &ts);
            if ts.len() > 1 {
                prop_assert_eq!(load_csv(&path, &CsvSchema::default()).unwrap(), ts);
            }
        }

        #[test]
        fn layout_preserves_values(ts in arb_series()) {
            prop_assume!(ts.freq().get() >= 2);
            let layout = seasonal_layout(&ts).unwrap();
            let flat: Vec<f64> = layout.rows.concat();
            prop_assert_eq!(flat.as_slice(), ts.values());
            let partial = layout.rows.iter().filter(|r| r.len() != layout.cycle_length).count();
            prop_assert!(partial <= 1);
            prop_assert!(layout.rows[..layout.rows.len() - 1].iter().all(|r| r.len() == layout.cycle_length));
        }

        #[test]
        fn nested_slices_compose(ts in arb_series(), a in 0usize..80, b in 0usize..80, c in 0usize..80, d in 0usize..80) {
            let n = ts.len();
            let mut outer = [a % n, b % n];
            outer.sort();
            let span = outer[1] - outer[0] + 1;
            let mut inner = [outer[0] + c % span, outer[0] + d % span];
            inner.sort();
            let p = |i: usize| ts.period_at(i);
            let once = slice(&ts, p(inner[0]), p(inner[1])).unwrap();
            let twice = slice(&slice(&ts, p(outer[0]), p(outer[1])).unwrap(), p(inner[0]), p(inner[1])).unwrap();
            prop_assert_eq!(once, twice);
        }
    }
}
