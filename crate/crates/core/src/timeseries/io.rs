//! CSV ingestion.
//!
//! Price files carry a `date,price[,rate]` header; return files
//! `date,return`. Dates are ISO-8601, numbers use a decimal point.

use std::io::{Read, Write};
use std::path::Path;

use chrono::NaiveDate;

use super::{PriceSeries, ReturnSeries};
use crate::error::{Error, Result};

/// Either kind of input file, told apart by its header.
#[derive(Debug, Clone)]
pub enum SeriesFile {
    Prices(PriceSeries),
    Returns(ReturnSeries),
}

impl SeriesFile {
    pub fn into_returns(self) -> Result<ReturnSeries> {
        match self {
            SeriesFile::Prices(p) => super::compute_excess_log_returns(&p),
            SeriesFile::Returns(r) => Ok(r),
        }
    }
}

fn parse_date(raw: &str, line: usize) -> Result<NaiveDate> {
    raw.trim()
        .parse()
        .map_err(|_| Error::Config(format!("line {line}: bad date {raw:?}")))
}

fn parse_number(raw: &str, line: usize, what: &str) -> Result<f64> {
    raw.trim()
        .parse()
        .map_err(|_| Error::Config(format!("line {line}: bad {what} {raw:?}")))
}

pub fn read_series<R: Read>(reader: R) -> Result<SeriesFile> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_ascii_lowercase()).collect();
    let col = |name: &str| header.iter().position(|h| h == name);
    let date_col = col("date").ok_or_else(|| Error::Config("missing `date` column".into()))?;

    if let Some(price_col) = col("price") {
        let rate_col = col("rate");
        let (mut dates, mut prices, mut rates) = (Vec::new(), Vec::new(), Vec::new());
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let line = i + 2;
            let date = parse_date(rec.get(date_col).unwrap_or(""), line)?;
            let raw_price = rec.get(price_col).unwrap_or("").trim();
            if raw_price.is_empty() {
                return Err(Error::MissingPrice {
                    line,
                    date: date.to_string(),
                });
            }
            prices.push(parse_number(raw_price, line, "price")?);
            if let Some(rc) = rate_col {
                rates.push(parse_number(rec.get(rc).unwrap_or(""), line, "rate")?);
            }
            dates.push(date);
        }
        let rates = rate_col.map(|_| rates);
        return Ok(SeriesFile::Prices(PriceSeries::new(dates, prices, rates)?));
    }

    let ret_col = col("return").ok_or_else(|| Error::Config("expected a `price` or `return` column".into()))?;
    let (mut dates, mut values) = (Vec::new(), Vec::new());
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        dates.push(parse_date(rec.get(date_col).unwrap_or(""), line)?);
        values.push(parse_number(rec.get(ret_col).unwrap_or(""), line, "return")?);
    }
    Ok(SeriesFile::Returns(ReturnSeries::new(dates, values)?))
}

pub fn read_series_file(path: &Path) -> Result<SeriesFile> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_series(std::io::BufReader::new(file))
}

/// Load a price or return file and return excess log returns.
pub fn load_returns(path: &Path) -> Result<ReturnSeries> {
    read_series_file(path)?.into_returns()
}

pub fn write_returns<W: Write>(series: &ReturnSeries, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["date", "return"])?;
    for (d, r) in series.dates().iter().zip(series.values()) {
        wtr.write_record([d.to_string(), r.to_string()])?;
    }
    wtr.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

pub fn write_returns_file(series: &ReturnSeries, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_returns(series, std::io::BufWriter::new(file))
}

pub fn write_prices<W: Write>(prices: &PriceSeries, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    match prices.benchmark_rate() {
        Some(rate) => {
            wtr.write_record(["date", "price", "rate"])?;
            for ((d, p), r) in prices.dates().iter().zip(prices.prices()).zip(rate) {
                wtr.write_record([d.to_string(), p.to_string(), r.to_string()])?;
            }
        }
        None => {
            wtr.write_record(["date", "price"])?;
            for (d, p) in prices.dates().iter().zip(prices.prices()) {
                wtr.write_record([d.to_string(), p.to_string()])?;
            }
        }
    }
    wtr.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}
