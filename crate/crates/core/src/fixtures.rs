//! Builders for small synthetic tracks, used by tests and the examples.

use crate::ingest::{BasinCode, HistoricalTrack, TrackPoint};

/// Track from explicit `(lat, lon, wind)` triples, one per 3-hour step.
pub fn track_from(id: &str, year: i32, pts: &[(f64, f64, f64)]) -> HistoricalTrack {
    HistoricalTrack {
        storm_id: id.to_string(),
        basin: BasinCode::NA,
        genesis_year: year,
        genesis_day_of_year: 200,
        genesis_minute_of_day: 0,
        wind_filled: false,
        points: pts
            .iter()
            .enumerate()
            .map(|(i, &(lat, lon, wind_u10))| TrackPoint {
                step_index: i as u32,
                lat,
                lon,
                wind_u10,
            })
            .collect(),
    }
}

/// Straight track of `n` points moving `(dlat, dlon)` per step, with the
/// wind given by `wind(step)`.
#[allow(clippy::too_many_arguments)]
pub fn line_track(
    id: &str,
    year: i32,
    lat0: f64,
    lon0: f64,
    dlat: f64,
    dlon: f64,
    n: usize,
    wind: impl Fn(usize) -> f64,
) -> HistoricalTrack {
    let pts: Vec<(f64, f64, f64)> = (0..n)
        .map(|i| (lat0 + dlat * i as f64, lon0 + dlon * i as f64, wind(i)))
        .collect();
    track_from(id, year, &pts)
}
