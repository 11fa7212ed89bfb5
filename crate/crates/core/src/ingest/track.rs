//! Historical tracks on the uniform 3-hour step.

use chrono::{Datelike, NaiveDateTime, Timelike};
use serde::{Deserialize, Serialize};

use super::archive::RawBestTrackRow;
use super::config::{BasinCode, WindConvention};
use crate::error::{Error, Result};
use crate::geo::{unwrap_next, wrap_lon};

pub const STEP_SECONDS: i64 = 3 * 3600;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackPoint {
    /// 3-hour steps since genesis.
    pub step_index: u32,
    pub lat: f64,
    /// Degrees east, continuity-unwrapped within the owning track.
    pub lon: f64,
    /// 10-min sustained wind, knots.
    pub wind_u10: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoricalTrack {
    pub storm_id: String,
    pub basin: BasinCode,
    /// Season year the archive files the storm under.
    pub genesis_year: i32,
    pub genesis_day_of_year: u32,
    pub genesis_minute_of_day: u32,
    /// Some interior wind values were filled by interpolation.
    pub wind_filled: bool,
    pub points: Vec<TrackPoint>,
}

impl HistoricalTrack {
    /// Lifetime in 3-hour steps (points minus one).
    pub fn lifetime_steps(&self) -> u32 {
        self.points.len().saturating_sub(1) as u32
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Convert an agency-native sustained wind to the 10-min U10 scale.
pub fn convert_wind(speed: f64, convention: WindConvention) -> Result<f64> {
    if !(speed >= 0.0) {
        return Err(Error::InvalidInput(format!("negative wind speed {speed}")));
    }
    Ok(speed * convention.conversion_factor())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DropReason {
    TooFewRows(usize),
    TooFewWinds(usize),
    NonIncreasingTime,
}

impl std::fmt::Display for DropReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DropReason::TooFewRows(n) => write!(f, "only {n} valid rows"),
            DropReason::TooFewWinds(n) => write!(f, "only {n} rows with wind"),
            DropReason::NonIncreasingTime => f.write_str("times not strictly increasing"),
        }
    }
}

fn lerp(a: f64, b: f64, frac: f64) -> f64 {
    a + (b - a) * frac
}

/// Value of a piecewise-linear series (times in seconds, strictly
/// increasing) at time `t`, clamped to the series ends.
fn sample(times: &[i64], values: &[f64], t: i64) -> f64 {
    match times.binary_search(&t) {
        Ok(i) => values[i],
        Err(0) => values[0],
        Err(i) if i >= times.len() => values[times.len() - 1],
        Err(i) => {
            let frac = (t - times[i - 1]) as f64 / (times[i] - times[i - 1]) as f64;
            lerp(values[i - 1], values[i], frac)
        }
    }
}

/// Interpolate one storm's observations onto a 3-hour grid anchored at the
/// first retained observation.
///
/// Leading and trailing observations without wind are dropped; interior
/// wind gaps are filled linearly in time and flagged on the track. Winds
/// are converted to U10 here and nowhere else.
pub fn interpolate_track(
    rows: &[RawBestTrackRow],
    convention: WindConvention,
) -> std::result::Result<HistoricalTrack, DropReason> {
    if rows.len() < 2 {
        return Err(DropReason::TooFewRows(rows.len()));
    }
    if rows.windows(2).any(|w| w[1].iso_time <= w[0].iso_time) {
        return Err(DropReason::NonIncreasingTime);
    }
    let first = rows.iter().position(|r| r.wmo_wind.is_some());
    let last = rows.iter().rposition(|r| r.wmo_wind.is_some());
    let (first, last) = match (first, last) {
        (Some(a), Some(b)) if b > a => (a, b),
        _ => {
            let n = rows.iter().filter(|r| r.wmo_wind.is_some()).count();
            return Err(DropReason::TooFewWinds(n));
        }
    };
    let rows = &rows[first..=last];
    let wind_filled = rows.iter().any(|r| r.wmo_wind.is_none());

    let t0 = rows[0].iso_time;
    let secs = |t: NaiveDateTime| (t - t0).num_seconds();
    let times: Vec<i64> = rows.iter().map(|r| secs(r.iso_time)).collect();
    let lats: Vec<f64> = rows.iter().map(|r| r.lat).collect();
    let mut lons = Vec::with_capacity(rows.len());
    let mut prev = wrap_lon(rows[0].lon);
    for r in rows {
        prev = if lons.is_empty() { prev } else { unwrap_next(prev, r.lon) };
        lons.push(prev);
    }
    let (wtimes, wvals): (Vec<i64>, Vec<f64>) = rows
        .iter()
        .zip(&times)
        .filter_map(|(r, &t)| r.wmo_wind.map(|w| (t, w)))
        .unzip();

    let duration = *times.last().unwrap();
    let n_steps = (duration as f64 / STEP_SECONDS as f64).round() as i64;
    let factor = convention.conversion_factor();
    let points = (0..=n_steps)
        .map(|k| {
            let t = (k * STEP_SECONDS).min(duration);
            TrackPoint {
                step_index: k as u32,
                lat: sample(&times, &lats, t),
                lon: sample(&times, &lons, t),
                wind_u10: sample(&wtimes, &wvals, t) * factor,
            }
        })
        .collect();

    Ok(HistoricalTrack {
        storm_id: rows[0].storm_id.clone(),
        basin: rows[0].basin,
        genesis_year: rows[0].season,
        genesis_day_of_year: t0.ordinal(),
        genesis_minute_of_day: t0.hour() * 60 + t0.minute(),
        wind_filled,
        points,
    })
}
