//! Exhaustive searches over intervals: smallest runs of consecutive p-happy
//! numbers and the share of `[1, l]` captured by each attractor.

use std::collections::BTreeMap;

use num_rational::Ratio;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{classify, AttractorAtlas, AttractorId, Exponent};
use crate::error::{Error, Result};
use crate::factoradic::Natural;

/// Numbers per block in parallel density scans.
pub const SCAN_BLOCK: u64 = 1 << 16;

pub fn is_p_happy(n: &Natural, e: Exponent, p: &Natural, atlas: &AttractorAtlas) -> Result<bool> {
    Ok(classify(n, e, Some(atlas))?.attractor.is_fixed_point(p))
}

fn fixed_point_index(atlas: &AttractorAtlas, e: Exponent, p: &Natural) -> Result<usize> {
    if atlas.e() != e {
        return Err(Error::ExponentMismatch {
            atlas: atlas.e().get(),
            requested: e.get(),
        });
    }
    atlas
        .attractors()
        .iter()
        .position(|a| a.is_fixed_point(p))
        .ok_or_else(|| Error::NotAFixedPoint {
            e: e.get(),
            p: p.clone(),
        })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RunRecord {
    pub e: u32,
    pub p: u64,
    pub m: u64,
    pub start: u64,
}

/// Run starts for `m = 1..=resolved`; `complete` is false if the cap cut the sweep short.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunSearch {
    pub records: Vec<RunRecord>,
    pub m_max: u64,
    pub search_cap: u64,
    pub complete: bool,
}

/// For each `m` in `1..=m_max`, the least `start >= search_floor` such that
/// `start, ..., start + m - 1` are all p-happy, scanning starts below `search_cap`.
pub fn smallest_runs(
    e: Exponent,
    p: &Natural,
    m_max: u64,
    search_floor: u64,
    search_cap: u64,
    atlas: &AttractorAtlas,
) -> Result<RunSearch> {
    if m_max == 0 {
        return Err(Error::InvalidArgument("m_max must be at least 1".into()));
    }
    if !(1..=2).contains(&search_floor) {
        return Err(Error::InvalidArgument(format!(
            "search floor must be 1 or 2, got {search_floor}"
        )));
    }
    let target = fixed_point_index(atlas, e, p)?;
    let p_small = p.to_u64().ok_or_else(|| Error::OutOfDomain(p.clone()))?;

    let mut records = Vec::new();
    let mut run = 0u64;
    let mut n = search_floor;
    // The first window of length m to close ends at the smallest possible n,
    // and at that moment the run began exactly m - 1 numbers earlier.
    while (records.len() as u64) < m_max {
        let next_m = records.len() as u64 + 1;
        // Stop once no run starting below the cap can still reach length next_m.
        if n - run >= search_cap {
            break;
        }
        let (index, _) = atlas
            .classify_index(n)
            .ok_or_else(|| Error::OutOfDomain(Natural::from(n)))?;
        if index == target {
            run += 1;
            let mut m = next_m;
            while m <= run.min(m_max) {
                records.push(RunRecord {
                    e: e.get(),
                    p: p_small,
                    m,
                    start: n + 1 - m,
                });
                m += 1;
            }
        } else {
            run = 0;
        }
        n += 1;
    }
    let complete = records.len() as u64 == m_max;
    Ok(RunSearch {
        records,
        m_max,
        search_cap,
        complete,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DensityRow {
    pub attractor: AttractorId,
    pub count: u64,
    /// `count / l`, reduced.
    pub proportion: Ratio<u64>,
}

/// Counts of `n` in `[1, upper]` by attractor, in canonical attractor order.
/// Attractors reached by no `n` are omitted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DensityReport {
    pub e: Exponent,
    pub upper: u64,
    pub rows: Vec<DensityRow>,
}

impl DensityReport {
    pub fn counts(&self) -> BTreeMap<AttractorId, u64> {
        self.rows
            .iter()
            .map(|row| (row.attractor.clone(), row.count))
            .collect()
    }

    pub fn count_for(&self, attractor: &AttractorId) -> u64 {
        self.rows
            .iter()
            .find(|row| row.attractor == *attractor)
            .map_or(0, |row| row.count)
    }

    fn from_tally(atlas: &AttractorAtlas, upper: u64, tally: &[u64]) -> Self {
        let rows = atlas
            .attractors()
            .iter()
            .zip(tally)
            .filter(|(_, &count)| count > 0)
            .map(|(attractor, &count)| DensityRow {
                attractor: attractor.clone(),
                count,
                proportion: Ratio::new(count, upper),
            })
            .collect();
        Self {
            e: atlas.e(),
            upper,
            rows,
        }
    }
}

/// Per-attractor counts over `[lo, hi]`, indexed like `atlas.attractors()`.
pub fn tally_interval(atlas: &AttractorAtlas, lo: u64, hi: u64) -> Result<Vec<u64>> {
    let mut tally = vec![0u64; atlas.attractors().len()];
    for n in lo.max(1)..=hi {
        let (index, _) = atlas
            .classify_index(n)
            .ok_or_else(|| Error::OutOfDomain(Natural::from(n)))?;
        tally[index] += 1;
    }
    Ok(tally)
}

fn merge(mut a: Vec<u64>, b: Vec<u64>) -> Vec<u64> {
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
    a
}

/// Classifies every `n` in `[1, upper]`, scanning fixed-size blocks in parallel.
pub fn density(e: Exponent, upper: u64, atlas: &AttractorAtlas) -> Result<DensityReport> {
    check_density_args(e, upper, atlas)?;
    let blocks = upper.div_ceil(SCAN_BLOCK);
    let tally = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let lo = b * SCAN_BLOCK + 1;
            let hi = ((b + 1) * SCAN_BLOCK).min(upper);
            tally_interval(atlas, lo, hi)
        })
        .try_reduce(|| vec![0u64; atlas.attractors().len()], |a, b| Ok(merge(a, b)))?;
    Ok(DensityReport::from_tally(atlas, upper, &tally))
}

/// Same report as [`density`], computed as `parts` contiguous sub-intervals
/// scanned one after another and summed.
pub fn density_partitioned(
    e: Exponent,
    upper: u64,
    atlas: &AttractorAtlas,
    parts: u64,
) -> Result<DensityReport> {
    check_density_args(e, upper, atlas)?;
    if parts == 0 {
        return Err(Error::InvalidArgument("parts must be at least 1".into()));
    }
    let mut tally = vec![0u64; atlas.attractors().len()];
    for k in 0..parts {
        let lo = upper * k / parts + 1;
        let hi = upper * (k + 1) / parts;
        if lo <= hi {
            tally = merge(tally, tally_interval(atlas, lo, hi)?);
        }
    }
    Ok(DensityReport::from_tally(atlas, upper, &tally))
}

fn check_density_args(e: Exponent, upper: u64, atlas: &AttractorAtlas) -> Result<()> {
    if atlas.e() != e {
        return Err(Error::ExponentMismatch {
            atlas: atlas.e().get(),
            requested: e.get(),
        });
    }
    if upper == 0 {
        return Err(Error::InvalidArgument("interval end must be at least 1".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::InvalidArgument(format!("unknown format {other:?}"))),
        }
    }
}

/// Deterministic machine-readable serialization.
pub trait Report {
    fn to_csv(&self) -> String;
    fn to_json(&self) -> String;
}

pub fn emit_report<R: Report + ?Sized>(report: &R, format: ReportFormat) -> String {
    match format {
        ReportFormat::Csv => report.to_csv(),
        ReportFormat::Json => report.to_json(),
    }
}

#[derive(Serialize)]
struct DensityLine {
    e: u32,
    attractor: String,
    count: u64,
    proportion_num: u64,
    proportion_den: u64,
}

impl DensityReport {
    fn lines(&self) -> Vec<DensityLine> {
        self.rows
            .iter()
            .map(|row| DensityLine {
                e: self.e.get(),
                attractor: row.attractor.members_text(),
                count: row.count,
                proportion_num: *row.proportion.numer(),
                proportion_den: *row.proportion.denom(),
            })
            .collect()
    }
}

fn write_csv<T: Serialize>(header: &[&str], rows: &[T]) -> String {
    let mut writer = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    // Writes into a Vec cannot fail.
    let _ = writer.write_record(header);
    for row in rows {
        let _ = writer.serialize(row);
    }
    String::from_utf8(writer.into_inner().unwrap_or_default()).unwrap_or_default()
}

impl Report for DensityReport {
    fn to_csv(&self) -> String {
        write_csv(
            &["e", "attractor", "count", "proportion_num", "proportion_den"],
            &self.lines(),
        )
    }

    fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(&self.lines()).unwrap_or_default();
        text.push('\n');
        text
    }
}

impl Report for [RunRecord] {
    fn to_csv(&self) -> String {
        write_csv(&["e", "p", "m", "start"], self)
    }

    fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).unwrap_or_default();
        text.push('\n');
        text
    }
}
