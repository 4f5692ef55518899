//! Parsing of daily per-year series and synthetic dataset generation.
//!
//! The canonical CSV format is `year,day,area` with a header row. `day` is
//! the naive day-of-year (1..=366; 366 only in leap years). Areas are in
//! million km²; the literal `NA` marks a missing observation and the row is
//! skipped, leaving a sparse series. Feb 29 is dropped on parse and later
//! days of leap years shift down by one, so every parsed year lives on the
//! day domain 1..=365.

use crate::basis::FourierBasis;
use crate::error::{Error, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::collections::BTreeMap;
use std::fmt;

/// Which polar ocean a dataset describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Arctic,
    Antarctic,
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Region::Arctic => write!(f, "arctic"),
            Region::Antarctic => write!(f, "antarctic"),
        }
    }
}

impl std::str::FromStr for Region {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "arctic" => Ok(Region::Arctic),
            "antarctic" => Ok(Region::Antarctic),
            other => Err(Error::config(format!(
                "unknown region {other:?} (expected arctic or antarctic)"
            ))),
        }
    }
}

/// One calendar year's observed (day, area) pairs, possibly sparse.
#[derive(Debug, Clone, PartialEq)]
pub struct RawYearSeries {
    year: i32,
    days: Vec<u16>,
    areas: Vec<f64>,
}

impl RawYearSeries {
    /// Build a series from (day, area) samples. Days must be strictly
    /// increasing in 1..=365 and areas non-negative and finite.
    pub fn new(year: i32, samples: Vec<(u16, f64)>) -> Result<Self> {
        let mut days = Vec::with_capacity(samples.len());
        let mut areas = Vec::with_capacity(samples.len());
        let mut prev = 0u16;
        for (day, area) in samples {
            if !(1..=365).contains(&day) {
                return Err(Error::arg(format!(
                    "year {year}: day {day} outside 1..=365"
                )));
            }
            if day <= prev {
                return Err(if day == prev {
                    Error::DuplicateDay { year, day }
                } else {
                    Error::arg(format!("year {year}: days not strictly increasing at {day}"))
                });
            }
            if !area.is_finite() || area < 0.0 {
                return Err(Error::arg(format!(
                    "year {year}, day {day}: area must be non-negative and finite, got {area}"
                )));
            }
            prev = day;
            days.push(day);
            areas.push(area);
        }
        Ok(RawYearSeries { year, days, areas })
    }

    pub fn year(&self) -> i32 {
        self.year
    }

    /// Number of observations `n_i`.
    pub fn len(&self) -> usize {
        self.days.len()
    }

    pub fn is_empty(&self) -> bool {
        self.days.is_empty()
    }

    /// Observed days of year, strictly increasing.
    pub fn days(&self) -> &[u16] {
        &self.days
    }

    /// Observed areas, aligned with `days`.
    pub fn areas(&self) -> &[f64] {
        &self.areas
    }

    /// Observed days as floating-point grid values.
    pub fn day_grid(&self) -> Vec<f64> {
        self.days.iter().map(|&d| f64::from(d)).collect()
    }
}

/// An ordered, gap-free run of yearly series for one region.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    region: Region,
    years: Vec<RawYearSeries>,
}

impl Dataset {
    /// Build a dataset; years must be strictly increasing with no gaps.
    pub fn new(region: Region, years: Vec<RawYearSeries>) -> Result<Self> {
        if years.is_empty() {
            return Err(Error::EmptyDataset);
        }
        for pair in years.windows(2) {
            let (a, b) = (pair[0].year(), pair[1].year());
            if b != a + 1 {
                return Err(Error::arg(format!(
                    "years must be contiguous: {a} followed by {b}"
                )));
            }
        }
        Ok(Dataset { region, years })
    }

    pub fn region(&self) -> Region {
        self.region
    }

    pub fn years(&self) -> &[RawYearSeries] {
        &self.years
    }

    pub fn n_years(&self) -> usize {
        self.years.len()
    }

    /// Inclusive (first, last) calendar year.
    pub fn year_span(&self) -> (i32, i32) {
        (
            self.years.first().expect("non-empty").year(),
            self.years.last().expect("non-empty").year(),
        )
    }

    pub fn get(&self, year: i32) -> Option<&RawYearSeries> {
        let (first, _) = self.year_span();
        let idx = usize::try_from(year - first).ok()?;
        self.years.get(idx)
    }

    /// Keep only years in `start..=end`.
    pub fn restrict_years(&self, start: i32, end: i32) -> Result<Dataset> {
        if start > end {
            return Err(Error::config(format!("bad year range {start}..{end}")));
        }
        let kept: Vec<RawYearSeries> = self
            .years
            .iter()
            .filter(|s| s.year() >= start && s.year() <= end)
            .cloned()
            .collect();
        if kept.is_empty() {
            return Err(Error::arg(format!(
                "no data in requested year range {start}..{end}"
            )));
        }
        Dataset::new(self.region, kept)
    }
}

/// Gregorian leap-year rule.
pub fn is_leap_year(year: i32) -> bool {
    (year % 4 == 0 && year % 100 != 0) || year % 400 == 0
}

const MONTH_LENGTHS: [u16; 12] = [31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31];

/// Naive day-of-year (1-based) for a calendar date, counting Feb 29.
pub fn day_of_year(year: i32, month: u32, day: u32) -> Option<u16> {
    if !(1..=12).contains(&month) || day < 1 {
        return None;
    }
    let mut len = MONTH_LENGTHS[(month - 1) as usize];
    if month == 2 && is_leap_year(year) {
        len += 1;
    }
    if day as u16 > len {
        return None;
    }
    let mut doy = day as u16;
    for (m, len) in MONTH_LENGTHS.iter().enumerate().take((month - 1) as usize) {
        doy += len;
        if m == 1 && is_leap_year(year) {
            doy += 1;
        }
    }
    Some(doy)
}

// Map a naive day-of-year onto the 365-day domain: Feb 29 vanishes and
// later days of leap years shift down by one.
fn canonical_day(year: i32, day: u16) -> Option<u16> {
    if is_leap_year(year) {
        match day {
            60 => None,
            d if d > 60 => Some(d - 1),
            d => Some(d),
        }
    } else {
        Some(day)
    }
}

/// Parse the canonical `year,day,area` CSV into a dataset for `region`.
pub fn parse_canonical_csv(text: &str, region: Region) -> Result<Dataset> {
    let mut per_year: BTreeMap<i32, BTreeMap<u16, f64>> = BTreeMap::new();
    let mut saw_header = false;
    let mut saw_data = false;

    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.trim_end_matches('\r').trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !saw_header {
            let lowered = line.replace(' ', "").to_ascii_lowercase();
            if lowered != "year,day,area" {
                return Err(Error::parse(
                    line_no,
                    format!("expected header 'year,day,area', got {line:?}"),
                ));
            }
            saw_header = true;
            continue;
        }

        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(Error::parse(
                line_no,
                format!("expected 3 columns, got {}", fields.len()),
            ));
        }
        let year: i32 = fields[0]
            .parse()
            .map_err(|_| Error::parse(line_no, format!("bad year {:?}", fields[0])))?;
        let day: u16 = fields[1]
            .parse()
            .map_err(|_| Error::parse(line_no, format!("bad day {:?}", fields[1])))?;
        let max_day = if is_leap_year(year) { 366 } else { 365 };
        if day < 1 || day > max_day {
            return Err(Error::parse(
                line_no,
                format!("day {day} out of range 1..={max_day} for year {year}"),
            ));
        }
        if fields[2].eq_ignore_ascii_case("na") {
            saw_data = true;
            continue; // missing observation: absence, not imputation
        }
        let area: f64 = fields[2]
            .parse()
            .map_err(|_| Error::parse(line_no, format!("bad area {:?}", fields[2])))?;
        if !area.is_finite() || area < 0.0 {
            return Err(Error::parse(
                line_no,
                format!("area must be non-negative and finite, got {area}"),
            ));
        }
        saw_data = true;

        let Some(canon) = canonical_day(year, day) else {
            continue; // Feb 29
        };
        if per_year.entry(year).or_default().insert(canon, area).is_some() {
            return Err(Error::DuplicateDay { year, day: canon });
        }
    }

    if !saw_data || per_year.is_empty() {
        return Err(Error::EmptyDataset);
    }

    let years = per_year
        .into_iter()
        .map(|(year, by_day)| RawYearSeries::new(year, by_day.into_iter().collect()))
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(region, years)
}

/// Serialize a dataset back to canonical CSV. Leap-year days are written in
/// naive (pre-drop) indexing so the text round-trips through the parser.
pub fn serialize_canonical_csv(dataset: &Dataset) -> String {
    let mut out = String::from("year,day,area\n");
    for series in dataset.years() {
        let leap = is_leap_year(series.year());
        for (&day, &area) in series.days().iter().zip(series.areas()) {
            let naive = if leap && day >= 60 { day + 1 } else { day };
            out.push_str(&format!("{},{},{}\n", series.year(), naive, area));
        }
    }
    out
}

/// Convert an NSIDC-style daily export (`Year, Month, Day, Extent/Area, ...`
/// with an optional units row) to the canonical `year,day,area` CSV.
///
/// Unparseable or negative value fields become `NA` rows; rows whose year
/// field is not an integer (e.g. the units row) are skipped.
pub fn nsidc_to_canonical(text: &str) -> Result<String> {
    let mut lines = text.lines().enumerate();
    let (header_no, header) = lines
        .by_ref()
        .find(|(_, l)| !l.trim().is_empty())
        .ok_or(Error::EmptyDataset)?;
    let names: Vec<String> = header
        .split(',')
        .map(|s| s.trim().trim_end_matches('\r').to_ascii_lowercase())
        .collect();
    let find = |name: &str| names.iter().position(|n| n == name);
    let year_col = find("year")
        .ok_or_else(|| Error::parse(header_no + 1, "missing 'Year' column"))?;
    let month_col = find("month")
        .ok_or_else(|| Error::parse(header_no + 1, "missing 'Month' column"))?;
    let day_col = find("day")
        .ok_or_else(|| Error::parse(header_no + 1, "missing 'Day' column"))?;
    let value_col = find("area")
        .or_else(|| find("extent"))
        .ok_or_else(|| Error::parse(header_no + 1, "missing 'Area' or 'Extent' column"))?;
    let needed = year_col.max(month_col).max(day_col).max(value_col);

    let mut rows: Vec<(i32, u16, Option<f64>)> = Vec::new();
    for (idx, raw_line) in lines {
        let line_no = idx + 1;
        let line = raw_line.trim_end_matches('\r').trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() <= needed {
            return Err(Error::parse(line_no, "row has too few columns"));
        }
        let Ok(year) = fields[year_col].parse::<i32>() else {
            continue; // units row or trailing commentary
        };
        let month: u32 = fields[month_col]
            .parse()
            .map_err(|_| Error::parse(line_no, format!("bad month {:?}", fields[month_col])))?;
        let day: u32 = fields[day_col]
            .parse()
            .map_err(|_| Error::parse(line_no, format!("bad day {:?}", fields[day_col])))?;
        let doy = day_of_year(year, month, day)
            .ok_or_else(|| Error::parse(line_no, format!("invalid date {year}-{month}-{day}")))?;
        let value = match fields[value_col].parse::<f64>() {
            Ok(v) if v.is_finite() && v >= 0.0 => Some(v),
            _ => None, // sentinel like -9999, or blank
        };
        rows.push((year, doy, value));
    }
    if rows.is_empty() {
        return Err(Error::EmptyDataset);
    }
    rows.sort_by_key(|&(y, d, _)| (y, d));

    let mut out = String::from("year,day,area\n");
    for (year, day, value) in rows {
        match value {
            Some(v) => out.push_str(&format!("{year},{day},{v}\n")),
            None => out.push_str(&format!("{year},{day},NA\n")),
        }
    }
    Ok(out)
}

/// Day sampling pattern for synthetic data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplingPattern {
    /// Every day 1..=365.
    Daily,
    /// Odd days only (1, 3, ..., 365), like the pre-1987 archive era.
    AlternateDays,
}

impl SamplingPattern {
    pub fn days(self) -> Vec<u16> {
        match self {
            SamplingPattern::Daily => (1..=365).collect(),
            SamplingPattern::AlternateDays => (1..=365).step_by(2).collect(),
        }
    }
}

/// Recipe for a deterministic synthetic ensemble.
#[derive(Debug, Clone)]
pub struct SyntheticConfig {
    pub region: Region,
    pub start_year: i32,
    /// Ground-truth coefficients over the annual Fourier basis (odd length).
    pub truth: Vec<f64>,
    /// One additive level offset per year; the length fixes the year count.
    pub offsets: Vec<f64>,
    pub noise_sd: f64,
    pub seed: u64,
    pub pattern: SamplingPattern,
}

impl SyntheticConfig {
    pub fn n_years(&self) -> usize {
        self.offsets.len()
    }
}

/// Generate a dataset from a known ground truth: per year, the truth curve
/// plus that year's offset plus i.i.d. Gaussian noise at the sampled days.
///
/// Year `i` draws from ChaCha8 stream `i` of `seed`, so the output is
/// byte-identical however the years are scheduled.
pub fn synthesize_ensemble(config: &SyntheticConfig) -> Result<Dataset> {
    if config.truth.is_empty() || config.truth.len().is_multiple_of(2) {
        return Err(Error::config(format!(
            "ground-truth coefficient vector must have odd length, got {}",
            config.truth.len()
        )));
    }
    if !config.noise_sd.is_finite() || config.noise_sd < 0.0 {
        return Err(Error::config(format!(
            "noise standard deviation must be non-negative and finite, got {}",
            config.noise_sd
        )));
    }
    if config.offsets.is_empty() {
        return Err(Error::config("offset list is empty: no years to generate"));
    }

    let basis = FourierBasis::annual(config.truth.len())?;
    let days = config.pattern.days();
    let grid: Vec<f64> = days.iter().map(|&d| f64::from(d)).collect();
    let design = basis.design_matrix(&grid, 0)?;
    let truth_values = design.mul_vec(&config.truth);

    let mut years = Vec::with_capacity(config.offsets.len());
    for (i, &offset) in config.offsets.iter().enumerate() {
        let year = config.start_year + i as i32;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(i as u64);
        let samples: Vec<(u16, f64)> = days
            .iter()
            .zip(&truth_values)
            .map(|(&day, &truth)| {
                let noise: f64 = if config.noise_sd > 0.0 {
                    config.noise_sd * rng.sample::<f64, _>(StandardNormal)
                } else {
                    0.0
                };
                (day, truth + offset + noise)
            })
            .collect();
        if let Some(&(day, bad)) = samples.iter().find(|&&(_, a)| a.is_nan() || a < 0.0) {
            return Err(Error::config(format!(
                "synthetic area went negative ({bad:.3} at year {year}, day {day}); \
                 raise the truth level or lower the noise"
            )));
        }
        years.push(RawYearSeries::new(year, samples)?);
    }
    Dataset::new(config.region, years)
}
