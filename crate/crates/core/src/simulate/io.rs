//! Catalog files: a point CSV, a JSON sidecar with the run header, and an
//! optional JSONL file of per-track segment provenance.
//!
//! CSV columns: `year,storm_index,step_index,time,lat,lon,wind_u10_kt,join_flag`.
//! Longitudes are written wrapped to (-180, 180]. `time` is an ordinal
//! stamp `YYYY-DDDTHH:MM` on a 365-day synthetic calendar.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::catalog::{CatalogHeader, SyntheticCatalog};
use super::walk::{SegmentPiece, SyntheticTrack};
use crate::diagnostics::{FieldPoint, TrackSet};
use crate::error::{Error, Result};
use crate::geo::wrap_lon;
use crate::io_util::atomic_write;

pub const CATALOG_COLUMNS: [&str; 8] =
    ["year", "storm_index", "step_index", "time", "lat", "lon", "wind_u10_kt", "join_flag"];

const MINUTES_PER_YEAR: u32 = 365 * 1440;

/// `path` with its extension replaced by `.json`.
pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

pub fn provenance_path(csv: &Path) -> PathBuf {
    csv.with_extension("provenance.jsonl")
}

/// Synthetic timestamp of step `step` of a track born on `day_of_year`
/// (1-based; day 366 folds onto 365) at `minute_of_day` in `year`.
pub fn synthetic_time(year: u32, day_of_year: u32, minute_of_day: u32, step: u32) -> String {
    let day = day_of_year.clamp(1, 365) - 1;
    let total = day * 1440 + minute_of_day + step * 180;
    let y = year + total / MINUTES_PER_YEAR;
    let rem = total % MINUTES_PER_YEAR;
    format!("{:04}-{:03}T{:02}:{:02}", y, rem / 1440 + 1, rem % 1440 / 60, rem % 60)
}

#[derive(Debug, Serialize, Deserialize)]
struct ProvenanceLine<'a> {
    year: u32,
    storm_index: u32,
    lifetime: u32,
    early_terminated: bool,
    #[serde(borrow)]
    pieces: std::borrow::Cow<'a, [SegmentPiece]>,
}

fn write_track_rows<W: Write>(w: &mut W, t: &SyntheticTrack) -> std::io::Result<()> {
    let joins = t.joins();
    for (i, p) in t.points.iter().enumerate() {
        let flag = u8::from(joins.contains(&(i as u32)));
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            t.year,
            t.storm_index,
            i,
            synthetic_time(t.year, t.genesis_day_of_year, t.genesis_minute_of_day, i as u32),
            p.lat,
            wrap_lon(p.lon),
            p.wind_u10,
            flag
        )?;
    }
    Ok(())
}

/// Write the catalog CSV and its sidecar; with `provenance` also the JSONL
/// provenance file. Every file is written atomically.
pub fn write_catalog(catalog: &SyntheticCatalog, csv: &Path, provenance: bool) -> Result<()> {
    atomic_write(csv, |f| {
        let mut w = BufWriter::new(f);
        writeln!(w, "{}", CATALOG_COLUMNS.join(","))?;
        for t in &catalog.tracks {
            write_track_rows(&mut w, t)?;
        }
        w.flush()
    })?;
    let side = serde_json::to_string_pretty(&catalog.header).map_err(|e| Error::Invariant(e.to_string()))?;
    atomic_write(&sidecar_path(csv), |f| {
        f.write_all(side.as_bytes())?;
        f.write_all(b"\n")
    })?;
    if provenance {
        atomic_write(&provenance_path(csv), |f| {
            let mut w = BufWriter::new(f);
            for t in &catalog.tracks {
                let line = ProvenanceLine {
                    year: t.year,
                    storm_index: t.storm_index,
                    lifetime: t.lifetime,
                    early_terminated: t.early_terminated,
                    pieces: std::borrow::Cow::Borrowed(&t.pieces),
                };
                serde_json::to_writer(&mut w, &line)?;
                w.write_all(b"\n")?;
            }
            w.flush()
        })?;
    }
    Ok(())
}

pub fn read_header(path: &Path) -> Result<CatalogHeader> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Schema(format!("{}: {e}", path.display())))
}

/// Where a catalog's year count came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum YearsBasis {
    Sidecar,
    Override,
    MaxYear,
}

/// Read any catalog CSV that carries `year`, `storm_index`, `lat`, `lon` and
/// `wind_u10_kt` columns, in any order. Rows of one storm must be
/// contiguous and in step order.
///
/// The year count comes from the sidecar next to the file when present,
/// then from `n_years`, then from the largest year seen.
pub fn read_catalog(path: &Path, n_years: Option<u32>) -> Result<(TrackSet, YearsBasis)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::Reader::from_reader(std::io::BufReader::new(file));
    let headers = rdr.headers().map_err(|e| Error::csv(path, e))?.clone();
    let col = |name: &str| -> Result<usize> {
        headers.iter().position(|h| h.trim() == name).ok_or_else(|| {
            Error::Schema(format!("{}: missing column `{name}`", path.display()))
        })
    };
    let (cy, cs, cla, clo, cw) = (col("year")?, col("storm_index")?, col("lat")?, col("lon")?, col("wind_u10_kt")?);
    let mut tracks: Vec<(u32, Vec<FieldPoint>)> = Vec::new();
    let mut last_key: Option<(u32, u32)> = None;
    let mut max_year = 0u32;
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::csv(path, e))?;
        let line = i + 2;
        let num = |c: usize| -> Result<f64> {
            let s = rec.get(c).unwrap_or("").trim();
            s.parse::<f64>().map_err(|_| {
                Error::Schema(format!("{}:{line}: cannot parse `{s}` in column `{}`", path.display(), &headers[c]))
            })
        };
        let int = |c: usize| -> Result<u32> {
            let s = rec.get(c).unwrap_or("").trim();
            s.parse::<u32>().map_err(|_| {
                Error::Schema(format!("{}:{line}: cannot parse `{s}` in column `{}`", path.display(), &headers[c]))
            })
        };
        let key = (int(cy)?, int(cs)?);
        let pt = FieldPoint {
            lat: num(cla)?,
            lon: num(clo)?,
            wind: num(cw)?,
        };
        max_year = max_year.max(key.0);
        if last_key != Some(key) {
            tracks.push((key.0, Vec::new()));
            last_key = Some(key);
        }
        tracks.last_mut().unwrap().1.push(pt);
    }
    let side = sidecar_path(path);
    let (years, basis) = if side.exists() {
        let h = read_header(&side)?;
        if let Some(n) = n_years.filter(|&n| n != h.n_years) {
            log::warn!("ignoring year count {n}; sidecar records {}", h.n_years);
        }
        (h.n_years, YearsBasis::Sidecar)
    } else if let Some(n) = n_years {
        (n, YearsBasis::Override)
    } else {
        log::warn!("{}: no sidecar and no year count; using the largest year {max_year}", path.display());
        (max_year, YearsBasis::MaxYear)
    };
    if years < max_year {
        return Err(Error::InvalidInput(format!(
            "{}: year {max_year} present but catalog spans only {years} years",
            path.display()
        )));
    }
    Ok((TrackSet::new(years, tracks), basis))
}

/// Read back a provenance file as `(year, storm_index) -> pieces`.
pub fn read_provenance(path: &Path) -> Result<BTreeMap<(u32, u32), Vec<SegmentPiece>>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let p: ProvenanceLine = serde_json::from_str(line)
            .map_err(|e| Error::Schema(format!("{}:{}: {e}", path.display(), i + 1)))?;
        out.insert((p.year, p.storm_index), p.pieces.into_owned());
    }
    Ok(out)
}
