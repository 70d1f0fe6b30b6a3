//! Daily price files, log returns and event windows.
//!
//! Input format: a header line `date,adj_close`, then one row per trading
//! day with an ISO date (`YYYY-MM-DD`) and a positive decimal price, dates
//! strictly increasing. Return `i` (0-based) is `ln(P[i+1] / P[i])` and
//! spans date `i` to date `i+1`.

use std::path::Path;

use chrono::NaiveDate;

use crate::error::{Error, Result};
use crate::sde_sim::extract_window;
use crate::stats_core::SplitSample;

#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    dates: Vec<NaiveDate>,
    prices: Vec<f64>,
    returns: Vec<f64>,
}

impl PriceSeries {
    pub fn new(dates: Vec<NaiveDate>, prices: Vec<f64>) -> Result<Self> {
        if dates.len() != prices.len() {
            return Err(Error::Validation(format!(
                "{} dates but {} prices",
                dates.len(),
                prices.len()
            )));
        }
        if dates.len() < 2 {
            return Err(Error::Validation("need at least two prices".into()));
        }
        if let Some(w) = dates.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::Validation(format!(
                "dates must be strictly increasing: {} is followed by {}",
                w[0], w[1]
            )));
        }
        if let Some((d, p)) = dates
            .iter()
            .zip(&prices)
            .find(|(_, p)| !(**p > 0.0 && p.is_finite()))
        {
            return Err(Error::Validation(format!("non-positive price {p} on {d}")));
        }
        let returns: Vec<f64> = prices.windows(2).map(|w| (w[1] / w[0]).ln()).collect();
        if returns.iter().any(|r| !r.is_finite()) {
            return Err(Error::Validation("non-finite return".into()));
        }
        Ok(PriceSeries {
            dates,
            prices,
            returns,
        })
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn prices(&self) -> &[f64] {
        &self.prices
    }

    pub fn returns(&self) -> &[f64] {
        &self.returns
    }

    /// Index of the first trading date on or after `date`.
    pub fn resolve_date(&self, date: NaiveDate) -> Option<usize> {
        let i = self.dates.partition_point(|d| *d < date);
        (i < self.dates.len()).then_some(i)
    }

    /// Index of the return ending on the trading day `date` resolves to.
    pub fn event_return_index(&self, date: NaiveDate) -> Result<usize> {
        let day = self.resolve_date(date).ok_or_else(|| {
            Error::Range(format!(
                "event date {date} is after the last trading date {}",
                self.dates[self.dates.len() - 1]
            ))
        })?;
        if day == 0 {
            return Err(Error::Range(format!(
                "event date {date} resolves to the first trading date; no return ends there"
            )));
        }
        Ok(day - 1)
    }
}

pub fn parse_date(s: &str) -> Result<NaiveDate> {
    NaiveDate::parse_from_str(s.trim(), "%Y-%m-%d")
        .map_err(|e| Error::InvalidInput(format!("bad date {s:?}: {e} (expected YYYY-MM-DD)")))
}

pub fn load_prices(path: &Path) -> Result<PriceSeries> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_prices(&text, path)
}

fn parse_prices(text: &str, path: &Path) -> Result<PriceSeries> {
    let parse_err = |line: usize, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty file".into()))?;
    let cols: Vec<String> = header.split(',').map(|c| c.trim().to_ascii_lowercase()).collect();
    if cols != ["date", "adj_close"] {
        return Err(parse_err(1, format!("expected header `date,adj_close`, got `{header}`")));
    }
    let mut dates = Vec::new();
    let mut prices = Vec::new();
    for (i, line) in lines {
        let lineno = i + 1;
        let mut fields = line.split(',');
        let (Some(d), Some(p), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(parse_err(lineno, format!("expected 2 fields in `{line}`")));
        };
        let date = NaiveDate::parse_from_str(d.trim(), "%Y-%m-%d")
            .map_err(|e| parse_err(lineno, format!("bad date `{}`: {e}", d.trim())))?;
        let price: f64 = p
            .trim()
            .parse()
            .map_err(|e| parse_err(lineno, format!("bad price `{}`: {e}", p.trim())))?;
        dates.push(date);
        prices.push(price);
    }
    PriceSeries::new(dates, prices)
}

/// Returns before and after the event: the `k1` returns ending the day
/// before the event return, and the `k2` returns starting the day after it.
/// The event return itself is dropped unless `include_event`.
pub fn event_window(
    series: &PriceSeries,
    event_date: NaiveDate,
    k1: usize,
    k2: usize,
    include_event: bool,
) -> Result<SplitSample> {
    let r = series.event_return_index(event_date)?;
    extract_window(series.returns(), r, k1, k2, include_event).map_err(|e| match e {
        Error::Range(msg) => Error::Range(format!("event {event_date}: {msg}")),
        other => other,
    })
}

/// Event dates of the COVID-19 case study (early 2020 S&P 500).
pub const COVID_EVENTS: [(&str, &str); 5] = [
    ("2019-12-31", "first reports of pneumonia cases in China"),
    ("2020-01-20", "cases confirmed outside China, including the US"),
    ("2020-01-30", "WHO declares a global health emergency"),
    ("2020-02-21", "outbreaks in South Korea and Italy"),
    ("2020-03-11", "WHO declares a pandemic"),
];

#[cfg(test)]
mod tests {
    use super::*;

    fn d(s: &str) -> NaiveDate {
        parse_date(s).unwrap()
    }

    fn parse(text: &str) -> Result<PriceSeries> {
        parse_prices(text, Path::new("mem.csv"))
    }

    #[test]
    fn two_rows_one_return() {
        let s = parse("date,adj_close\n2020-01-02,100\n2020-01-03,105\n").unwrap();
        assert_eq!(s.returns().len(), 1);
        assert!((s.returns()[0] - 1.05f64.ln()).abs() < 1e-15);
        assert!((s.returns()[0] - 0.04879).abs() < 1e-5);
    }

    #[test]
    fn flat_prices_zero_return() {
        let s = parse("date,adj_close\n2020-01-02,50\n2020-01-03,50\n").unwrap();
        assert_eq!(s.returns(), &[0.0]);
    }

    #[test]
    fn validation_errors() {
        assert!(matches!(
            parse("date,adj_close\n2020-01-03,100\n2020-01-02,105\n"),
            Err(Error::Validation(_))
        ));
        assert!(matches!(
            parse("date,adj_close\n2020-01-02,100\n2020-01-03,0\n"),
            Err(Error::Validation(_))
        ));
        match parse("date,adj_close\n2020-01-02,100\n2020-01-03,abc\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        match parse("date,adj_close\n2020-13-02,100\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse("day,close\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(
            parse("date,adj_close\n2020-01-02,100,7\n"),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    /// 13 consecutive days starting 2020-03-02 with prices 100, 101, ...
    fn thirteen_days() -> PriceSeries {
        let start = d("2020-03-02");
        let dates: Vec<NaiveDate> = (0..13).map(|i| start + chrono::Days::new(i)).collect();
        let prices: Vec<f64> = (0..13).map(|i| 100.0 + i as f64).collect();
        PriceSeries::new(dates, prices).unwrap()
    }

    #[test]
    fn window_around_day_seven() {
        let s = thirteen_days();
        // day 7 (1-based) is 2020-03-08; returns are numbered from 1
        let w = event_window(&s, d("2020-03-08"), 5, 5, false).unwrap();
        let r = s.returns();
        assert_eq!(w.pre(), &r[0..5]);
        assert_eq!(w.post(), &r[6..11]);
    }

    #[test]
    fn weekend_snaps_forward() {
        // Fri 2020-02-21, Mon 2020-02-24
        let dates = ["2020-02-19", "2020-02-20", "2020-02-21", "2020-02-24", "2020-02-25"];
        let s = PriceSeries::new(dates.iter().map(|x| d(x)).collect(), vec![1.0, 2.0, 3.0, 4.0, 5.0])
            .unwrap();
        assert_eq!(s.resolve_date(d("2020-02-23")), Some(3));
        assert_eq!(s.event_return_index(d("2020-02-22")).unwrap(), 2);
        assert_eq!(s.event_return_index(d("2020-02-21")).unwrap(), 1);
        assert!(s.event_return_index(d("2020-02-26")).is_err());
        assert!(s.event_return_index(d("2020-02-19")).is_err());
    }

    #[test]
    fn too_close_to_start() {
        let s = thirteen_days();
        let err = event_window(&s, d("2020-03-04"), 5, 5, false).unwrap_err();
        assert!(matches!(err, Error::Range(ref m) if m.contains("before")), "{err}");
        let err = event_window(&s, d("2020-03-12"), 5, 5, false).unwrap_err();
        assert!(matches!(err, Error::Range(ref m) if m.contains("after")), "{err}");
    }

    #[test]
    fn window_partitions_a_block() {
        let s = thirteen_days();
        let w = event_window(&s, d("2020-03-08"), 5, 5, false).unwrap();
        let r = s.returns();
        let mut block: Vec<f64> = w.pre().to_vec();
        block.push(r[5]);
        block.extend_from_slice(w.post());
        assert_eq!(block, r[0..11].to_vec());
        let inc = event_window(&s, d("2020-03-08"), 5, 5, true).unwrap();
        assert_eq!(inc.post()[0], r[5]);
    }
}
