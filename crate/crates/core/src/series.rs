//! Price ingestion, log-returns and the simple series transforms used
//! before any scaling analysis.

use std::io::{Read, Write};

use chrono::{Days, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{mean, population_variance, Scalar};

/// Dated positive price observations.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries<T> {
    timestamps: Vec<NaiveDate>,
    prices: Vec<T>,
    label: String,
}

impl<T: Scalar> PriceSeries<T> {
    /// Validates ordering, positivity and length.
    pub fn new(label: impl Into<String>, timestamps: Vec<NaiveDate>, prices: Vec<T>) -> Result<Self> {
        if timestamps.len() != prices.len() {
            return Err(Error::InvalidArgument(format!("{} timestamps for {} prices", timestamps.len(), prices.len())));
        }
        if prices.len() < 2 {
            return Err(Error::TooShort { needed: 2, got: prices.len() });
        }
        for (i, &p) in prices.iter().enumerate() {
            if !(p > T::zero()) || !p.is_finite() {
                return Err(Error::NonPositivePrice { line: i as u64 + 2, price: p.as_f64() });
            }
        }
        for (i, w) in timestamps.windows(2).enumerate() {
            if w[1] <= w[0] {
                return Err(Error::NonIncreasingDates { line: i as u64 + 3, date: w[1].to_string() });
            }
        }
        Ok(Self { timestamps, prices, label: label.into() })
    }

    pub fn timestamps(&self) -> &[NaiveDate] {
        &self.timestamps
    }

    pub fn prices(&self) -> &[T] {
        &self.prices
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.prices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prices.is_empty()
    }
}

/// Log-return values, optionally dated with the later day of each pair.
///
/// Synthetic series carry no dates; `timestamps()` is then empty.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnSeries<T> {
    values: Vec<T>,
    timestamps: Vec<NaiveDate>,
    label: String,
}

impl<T: Scalar> ReturnSeries<T> {
    pub fn new(label: impl Into<String>, values: Vec<T>, timestamps: Vec<NaiveDate>) -> Result<Self> {
        if !timestamps.is_empty() && timestamps.len() != values.len() {
            return Err(Error::InvalidArgument(format!("{} timestamps for {} values", timestamps.len(), values.len())));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { values, timestamps, label: label.into() })
    }

    pub fn undated(label: impl Into<String>, values: Vec<T>) -> Result<Self> {
        Self::new(label, values, Vec::new())
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn timestamps(&self) -> &[NaiveDate] {
        &self.timestamps
    }

    pub fn is_dated(&self) -> bool {
        !self.timestamps.is_empty()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Same dates and label, new values (used by surrogate generators).
    pub(crate) fn with_values(&self, values: Vec<T>) -> Self {
        debug_assert_eq!(values.len(), self.values.len());
        Self { values, timestamps: self.timestamps.clone(), label: self.label.clone() }
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }
}

/// Named inclusive date window, e.g. `period-I`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalysisPeriod {
    pub name: String,
    pub start: NaiveDate,
    pub end: NaiveDate,
}

impl AnalysisPeriod {
    pub fn new(name: impl Into<String>, start: NaiveDate, end: NaiveDate) -> Result<Self> {
        let name = name.into();
        if start >= end {
            return Err(Error::InvalidArgument(format!("period {name}: start {start} is not before end {end}")));
        }
        Ok(Self { name, start, end })
    }

    /// Parses `name:YYYY-MM-DD:YYYY-MM-DD`.
    pub fn parse(spec: &str) -> Result<Self> {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 || parts[0].is_empty() {
            return Err(Error::InvalidArgument(format!("period `{spec}` is not name:start:end")));
        }
        let date = |s: &str| {
            NaiveDate::parse_from_str(s, "%Y-%m-%d")
                .map_err(|e| Error::InvalidArgument(format!("period `{spec}`: bad date `{s}`: {e}")))
        };
        Self::new(parts[0], date(parts[1])?, date(parts[2])?)
    }
}

/// Reads a `date,price` CSV. LF and CRLF line endings are accepted.
pub fn load_price_csv<T: Scalar, R: Read>(source: R, label: &str) -> Result<PriceSeries<T>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(source);
    let headers = reader.headers()?.clone();
    if headers.len() != 2 || &headers[0] != "date" || &headers[1] != "price" {
        return Err(Error::MalformedRow { line: 1, message: "expected header `date,price`".into() });
    }

    let mut timestamps: Vec<NaiveDate> = Vec::new();
    let mut prices = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            Error::MalformedRow { line, message: e.to_string() }
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != 2 {
            return Err(Error::MalformedRow { line, message: format!("expected 2 fields, found {}", record.len()) });
        }
        let date = NaiveDate::parse_from_str(&record[0], "%Y-%m-%d")
            .map_err(|e| Error::MalformedRow { line, message: format!("bad date `{}`: {e}", &record[0]) })?;
        let price: f64 = record[1]
            .parse()
            .map_err(|e| Error::MalformedRow { line, message: format!("bad price `{}`: {e}", &record[1]) })?;
        if !(price > 0.0) || !price.is_finite() {
            return Err(Error::NonPositivePrice { line, price });
        }
        if let Some(&prev) = timestamps.last() {
            if date <= prev {
                return Err(Error::NonIncreasingDates { line, date: date.to_string() });
            }
        }
        timestamps.push(date);
        prices.push(T::of(price));
    }
    PriceSeries::new(label, timestamps, prices)
}

/// Writes the same `date,price` schema `load_price_csv` reads.
pub fn write_price_csv<T: Scalar, W: Write>(series: &PriceSeries<T>, sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["date", "price"])?;
    for (d, p) in series.timestamps.iter().zip(&series.prices) {
        w.write_record([d.to_string(), p.as_f64().to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// `R(T) = ln P(T+1) - ln P(T)` over consecutive rows.
pub fn log_returns<T: Scalar>(p: &PriceSeries<T>) -> ReturnSeries<T> {
    let values = p.prices.windows(2).map(|w| w[1].ln() - w[0].ln()).collect();
    ReturnSeries { values, timestamps: p.timestamps[1..].to_vec(), label: p.label.clone() }
}

/// Inverse of [`log_returns`]: cumulative exponentiation from `initial`.
///
/// Dated returns keep their dates and the initial price is placed one
/// calendar day before the first return. Undated returns are laid out on
/// consecutive calendar days from `origin`.
pub fn prices_from_returns<T: Scalar>(r: &ReturnSeries<T>, initial: T, origin: NaiveDate) -> Result<PriceSeries<T>> {
    let timestamps = if r.is_dated() {
        let first = r.timestamps[0]
            .checked_sub_days(Days::new(1))
            .ok_or_else(|| Error::InvalidArgument("date underflow".into()))?;
        std::iter::once(first).chain(r.timestamps.iter().copied()).collect()
    } else {
        (0..=r.len() as u64)
            .map(|k| {
                origin.checked_add_days(Days::new(k)).ok_or_else(|| Error::InvalidArgument("date overflow".into()))
            })
            .collect::<Result<Vec<_>>>()?
    };
    let mut log_price = initial.ln();
    let mut prices = Vec::with_capacity(r.len() + 1);
    prices.push(initial);
    for &v in &r.values {
        log_price = log_price + v;
        prices.push(log_price.exp());
    }
    PriceSeries::new(r.label.clone(), timestamps, prices)
}

/// Zero mean, unit population variance.
pub fn normalize<T: Scalar>(r: &ReturnSeries<T>) -> Result<ReturnSeries<T>> {
    if r.len() < 2 {
        return Err(Error::TooShort { needed: 2, got: r.len() });
    }
    let m = mean(&r.values);
    let sd = population_variance(&r.values).sqrt();
    if !(sd > T::zero()) {
        return Err(Error::ZeroVariance);
    }
    Ok(r.with_values(r.values.iter().map(|&x| (x - m) / sd).collect()))
}

/// Contiguous sub-series whose dates fall in `[start, end]`.
pub fn slice_period<T: Scalar>(r: &ReturnSeries<T>, period: &AnalysisPeriod) -> Result<ReturnSeries<T>> {
    if !r.is_dated() {
        return Err(Error::Undated);
    }
    let lo = r.timestamps.partition_point(|d| *d < period.start);
    let hi = r.timestamps.partition_point(|d| *d <= period.end);
    if lo >= hi {
        return Err(Error::EmptyPeriod {
            name: period.name.clone(),
            start: period.start.to_string(),
            end: period.end.to_string(),
        });
    }
    Ok(ReturnSeries {
        values: r.values[lo..hi].to_vec(),
        timestamps: r.timestamps[lo..hi].to_vec(),
        label: r.label.clone(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Extremum {
    Max,
    Min,
}

/// One extremum per non-overlapping window of `window` values; the trailing
/// partial window is dropped. The date kept is that of the chosen value.
pub fn window_extrema<T: Scalar>(r: &ReturnSeries<T>, window: usize, mode: Extremum) -> Result<ReturnSeries<T>> {
    if window < 1 {
        return Err(Error::InvalidArgument("window length must be at least 1".into()));
    }
    if r.len() < window {
        return Err(Error::TooShort { needed: window, got: r.len() });
    }
    let mut values = Vec::with_capacity(r.len() / window);
    let mut timestamps = Vec::new();
    for (j, chunk) in r.values.chunks_exact(window).enumerate() {
        let mut best = 0;
        for (i, &v) in chunk.iter().enumerate().skip(1) {
            let better = match mode {
                Extremum::Max => v > chunk[best],
                Extremum::Min => v < chunk[best],
            };
            if better {
                best = i;
            }
        }
        values.push(chunk[best]);
        if r.is_dated() {
            timestamps.push(r.timestamps[j * window + best]);
        }
    }
    Ok(ReturnSeries { values, timestamps, label: r.label.clone() })
}
