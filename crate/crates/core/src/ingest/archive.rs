//! Best-track archive CSV reader.
//!
//! Reads one observation per row, keeps the requested basin and record
//! window, and collects malformed rows into a rejects report instead of
//! failing the whole read.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use chrono::{NaiveDate, NaiveDateTime};
use serde::{Deserialize, Serialize};

use super::config::{BasinCode, BasinConfig, ColumnMap};
use crate::error::{Error, Result};
use crate::geo::wrap_lon;

#[derive(Debug, Clone, PartialEq)]
pub struct RawBestTrackRow {
    pub storm_id: String,
    pub season: i32,
    pub basin: BasinCode,
    pub iso_time: NaiveDateTime,
    pub lat: f64,
    /// Degrees east in (-180, 180].
    pub lon: f64,
    /// Agency-native averaging period, knots.
    pub wmo_wind: Option<f64>,
    /// 1-based line number in the source file.
    pub line: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reject {
    pub line: u64,
    pub reason: String,
}

#[derive(Debug, Clone, Default)]
pub struct ParsedArchive {
    pub rows: Vec<RawBestTrackRow>,
    pub rejects: Vec<Reject>,
}

impl ParsedArchive {
    /// Split the sorted rows into per-storm groups, preserving order.
    pub fn storms(&self) -> Vec<&[RawBestTrackRow]> {
        self.rows
            .chunk_by(|a, b| a.storm_id == b.storm_id)
            .collect()
    }
}

struct ColumnIndex {
    storm_id: usize,
    season: usize,
    basin: usize,
    iso_time: usize,
    lat: usize,
    lon: usize,
    wind: usize,
}

impl ColumnIndex {
    fn resolve(headers: &csv::StringRecord, map: &ColumnMap) -> Result<Self> {
        let find = |name: &str| {
            headers
                .iter()
                .position(|h| h.trim() == name)
                .ok_or_else(|| Error::Schema(format!("archive is missing column {name:?}")))
        };
        Ok(Self {
            storm_id: find(&map.storm_id)?,
            season: find(&map.season)?,
            basin: find(&map.basin)?,
            iso_time: find(&map.iso_time)?,
            lat: find(&map.lat)?,
            lon: find(&map.lon)?,
            wind: find(&map.wind)?,
        })
    }
}

pub fn parse_time(s: &str) -> Option<NaiveDateTime> {
    const FORMATS: [&str; 4] = [
        "%Y-%m-%d %H:%M:%S",
        "%Y-%m-%dT%H:%M:%S",
        "%Y-%m-%d %H:%M",
        "%Y-%m-%dT%H:%M",
    ];
    let s = s.trim();
    FORMATS
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(s, f).ok())
        .or_else(|| {
            NaiveDate::parse_from_str(s, "%Y-%m-%d")
                .ok()
                .and_then(|d| d.and_hms_opt(0, 0, 0))
        })
}

fn parse_opt_f64(s: &str) -> std::result::Result<Option<f64>, ()> {
    let s = s.trim();
    if s.is_empty() || s.eq_ignore_ascii_case("nan") {
        return Ok(None);
    }
    s.parse::<f64>().map(Some).map_err(|_| ())
}

enum RowOutcome {
    Keep(RawBestTrackRow),
    Skip,
    Reject(String),
}

fn read_row(
    rec: &csv::StringRecord,
    idx: &ColumnIndex,
    cfg: &BasinConfig,
    line: u64,
) -> RowOutcome {
    let get = |i: usize| rec.get(i).unwrap_or("").trim();

    // rows from other basins are filtered, never reported
    if !get(idx.basin).eq_ignore_ascii_case(cfg.basin.as_str()) {
        return RowOutcome::Skip;
    }
    let storm_id = get(idx.storm_id);
    if storm_id.is_empty() {
        return RowOutcome::Reject("missing storm id".into());
    }
    let Ok(season) = get(idx.season).parse::<i32>() else {
        return RowOutcome::Reject(format!("unparseable season {:?}", get(idx.season)));
    };
    if season < cfg.record_start_year || season > cfg.record_end_year {
        return RowOutcome::Skip;
    }
    let Some(iso_time) = parse_time(get(idx.iso_time)) else {
        return RowOutcome::Reject(format!("unparseable time {:?}", get(idx.iso_time)));
    };
    let (lat, lon) = match (parse_opt_f64(get(idx.lat)), parse_opt_f64(get(idx.lon))) {
        (Ok(Some(lat)), Ok(Some(lon))) => (lat, lon),
        (Ok(None), _) | (_, Ok(None)) => return RowOutcome::Reject("missing position".into()),
        _ => return RowOutcome::Reject("unparseable position".into()),
    };
    if !lat.is_finite() || !(-90.0..=90.0).contains(&lat) {
        return RowOutcome::Reject(format!("latitude out of range: {lat}"));
    }
    if !lon.is_finite() || !(-180.0..=360.0).contains(&lon) {
        return RowOutcome::Reject(format!("longitude out of range: {lon}"));
    }
    let wmo_wind = match parse_opt_f64(get(idx.wind)) {
        // negative values and >= 300 kt are archive missing-value sentinels
        Ok(Some(w)) if (0.0..300.0).contains(&w) => Some(w),
        Ok(_) => None,
        Err(()) => return RowOutcome::Reject(format!("unparseable wind {:?}", get(idx.wind))),
    };
    RowOutcome::Keep(RawBestTrackRow {
        storm_id: storm_id.to_string(),
        season,
        basin: cfg.basin,
        iso_time,
        lat,
        lon: wrap_lon(lon),
        wmo_wind,
        line,
    })
}

/// Parse a point-per-row archive from any reader.
pub fn parse_archive<R: Read>(source: R, cfg: &BasinConfig) -> Result<ParsedArchive> {
    parse_archive_inner(source, cfg, Path::new("<reader>"))
}

/// Parse a point-per-row archive file.
pub fn parse_archive_path(path: &Path, cfg: &BasinConfig) -> Result<ParsedArchive> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_archive_inner(file, cfg, path)
}

fn parse_archive_inner<R: Read>(source: R, cfg: &BasinConfig, path: &Path) -> Result<ParsedArchive> {
    let mut rdr = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(source);
    let headers = rdr.headers().map_err(|e| Error::csv(path, e))?.clone();
    let idx = ColumnIndex::resolve(&headers, &cfg.columns)?;

    let mut out = ParsedArchive::default();
    let mut record = csv::StringRecord::new();
    let mut first = true;
    loop {
        match rdr.read_record(&mut record) {
            Ok(true) => {}
            Ok(false) => break,
            Err(e) => {
                // an undecodable line is a reject, an I/O failure is fatal
                let line = e.position().map(|p| p.line()).unwrap_or(0);
                if matches!(e.kind(), csv::ErrorKind::Io(_)) {
                    return Err(Error::csv(path, e));
                }
                out.rejects.push(Reject {
                    line,
                    reason: format!("malformed record: {e}"),
                });
                continue;
            }
        }
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if first {
            first = false;
            if cfg.columns.units_row {
                continue;
            }
        }
        match read_row(&record, &idx, cfg, line) {
            RowOutcome::Keep(row) => out.rows.push(row),
            RowOutcome::Skip => {}
            RowOutcome::Reject(reason) => out.rejects.push(Reject { line, reason }),
        }
    }

    out.rows
        .sort_by(|a, b| a.storm_id.cmp(&b.storm_id).then(a.iso_time.cmp(&b.iso_time)));
    // strictly increasing times per storm: later duplicates are rejected
    let mut deduped: Vec<RawBestTrackRow> = Vec::with_capacity(out.rows.len());
    for row in out.rows.drain(..) {
        if let Some(prev) = deduped.last() {
            if prev.storm_id == row.storm_id && prev.iso_time == row.iso_time {
                out.rejects.push(Reject {
                    line: row.line,
                    reason: format!("duplicate timestamp {} for {}", row.iso_time, row.storm_id),
                });
                continue;
            }
        }
        deduped.push(row);
    }
    out.rows = deduped;
    out.rejects.sort_by_key(|r| r.line);
    Ok(out)
}

/// Write the rejects report as `line,reason` CSV.
pub fn write_rejects<W: Write>(rejects: &[Reject], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    let p = Path::new("<rejects>");
    wtr.write_record(["line", "reason"]).map_err(|e| Error::csv(p, e))?;
    for r in rejects {
        wtr.write_record([r.line.to_string().as_str(), r.reason.as_str()])
            .map_err(|e| Error::csv(p, e))?;
    }
    wtr.flush().map_err(|e| Error::io(p, e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> BasinConfig {
        let mut c = BasinConfig::for_basin(BasinCode::NA);
        c.columns = ColumnMap::lowercase();
        c
    }

    const HEADER: &str = "track_id,season,basin,time,lon,lat,wind\n";

    #[test]
    fn keeps_rows_in_order() {
        let csv = format!(
            "{HEADER}A,2000,NA,2000-08-01 00:00:00,-50.0,15.0,30\n\
             A,2000,NA,2000-08-01 06:00:00,-51.0,15.5,35\n\
             A,2000,NA,2000-08-01 12:00:00,-52.0,16.0,40\n"
        );
        let p = parse_archive(csv.as_bytes(), &cfg()).unwrap();
        assert_eq!(p.rows.len(), 3);
        assert!(p.rejects.is_empty());
        let lats: Vec<f64> = p.rows.iter().map(|r| r.lat).collect();
        assert_eq!(lats, vec![15.0, 15.5, 16.0]);
        assert_eq!(p.rows[0].line, 2);
    }

    #[test]
    fn other_basins_excluded_silently() {
        let csv = format!(
            "{HEADER}A,2000,SP,2000-01-01 00:00:00,170.0,-15.0,30\n\
             B,2000,NA,2000-08-01 00:00:00,-50.0,15.0,30\n"
        );
        let p = parse_archive(csv.as_bytes(), &cfg()).unwrap();
        assert_eq!(p.rows.len(), 1);
        assert_eq!(p.rows[0].storm_id, "B");
        assert!(p.rejects.is_empty());
    }

    #[test]
    fn sentinels_go_to_rejects() {
        // IBTrACS uses blanks for missing values; 999/-999 show up in
        // agency-specific columns and older conversions.
        let csv = format!(
            "{HEADER}A,2000,NA,2000-08-01 00:00:00,-50.0,999,30\n\
             A,2000,NA,2000-08-01 03:00:00,,15.0,30\n\
             A,2000,NA,2000-08-01 06:00:00,-51.0,15.5,-999\n\
             A,2000,NA,not-a-time,-51.0,15.5,40\n"
        );
        let p = parse_archive(csv.as_bytes(), &cfg()).unwrap();
        assert_eq!(p.rows.len(), 1);
        assert_eq!(p.rows[0].wmo_wind, None);
        let lines: Vec<u64> = p.rejects.iter().map(|r| r.line).collect();
        assert_eq!(lines, vec![2, 3, 5]);
        assert!(p.rejects[0].reason.contains("latitude"));
    }

    #[test]
    fn window_filter_and_sorting() {
        let csv = format!(
            "{HEADER}B,2000,NA,2000-08-02 00:00:00,-50.0,15.0,30\n\
             A,1800,NA,1800-08-01 00:00:00,-50.0,15.0,30\n\
             B,2000,NA,2000-08-01 00:00:00,-49.0,14.0,30\n\
             B,2000,NA,2000-08-01 00:00:00,-49.0,14.0,30\n"
        );
        let p = parse_archive(csv.as_bytes(), &cfg()).unwrap();
        assert_eq!(p.rows.len(), 2);
        assert!(p.rows[0].iso_time < p.rows[1].iso_time);
        assert_eq!(p.rejects.len(), 1);
        assert!(p.rejects[0].reason.contains("duplicate"));
    }

    #[test]
    fn missing_column_is_schema_error() {
        let csv = "track_id,season,basin,time,lon,lat\nA,2000,NA,2000-08-01 00:00:00,1,1\n";
        assert!(matches!(
            parse_archive(csv.as_bytes(), &cfg()),
            Err(Error::Schema(_))
        ));
    }

    #[test]
    fn ibtracs_units_row_skipped() {
        let csv = "SID,SEASON,NUMBER,BASIN,SUBBASIN,NAME,ISO_TIME,NATURE,LAT,LON,WMO_WIND\n \
                   ,Year, , , , , , ,degrees_north,degrees_east,kts\n\
                   2000214N15310,2000,1,NA,MM,ALBERTO,2000-08-01 00:00:00,TS,15.0,-50.0,30\n";
        let mut c = BasinConfig::for_basin(BasinCode::NA);
        c.columns = ColumnMap::default();
        let p = parse_archive(csv.as_bytes(), &c).unwrap();
        assert_eq!(p.rows.len(), 1);
        assert!(p.rejects.is_empty());
    }

    #[test]
    fn rejects_report_format() {
        let mut buf = Vec::new();
        write_rejects(
            &[Reject {
                line: 7,
                reason: "latitude out of range: 999".into(),
            }],
            &mut buf,
        )
        .unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "line,reason\n7,latitude out of range: 999\n"
        );
    }
}
