//! Spherical geometry helpers shared by ingest, kernel and diagnostics.
//!
//! Longitudes are stored as degrees east in (-180, 180] at rest. Inside a
//! single track they are kept continuity-unwrapped so that differences never
//! jump by 360 across the antimeridian.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatLon {
    pub lat: f64,
    pub lon: f64,
}

impl LatLon {
    pub const fn new(lat: f64, lon: f64) -> Self {
        Self { lat, lon }
    }
}

/// Wrap a longitude into (-180, 180].
pub fn wrap_lon(lon: f64) -> f64 {
    let mut l = lon % 360.0;
    if l <= -180.0 {
        l += 360.0;
    } else if l > 180.0 {
        l -= 360.0;
    }
    l
}

/// Wrap a longitude into [0, 360).
pub fn wrap_lon_360(lon: f64) -> f64 {
    let l = lon % 360.0;
    if l < 0.0 {
        l + 360.0
    } else {
        l
    }
}

/// Shortest signed longitude difference `to - from`, in (-180, 180].
pub fn lon_delta(from: f64, to: f64) -> f64 {
    wrap_lon(to - from)
}

/// Continue an unwrapped longitude series: returns the representative of
/// `raw` that is closest to `prev_unwrapped`.
pub fn unwrap_next(prev_unwrapped: f64, raw: f64) -> f64 {
    prev_unwrapped + lon_delta(prev_unwrapped, raw)
}

/// Central angle between two points, in degrees (haversine form).
pub fn great_circle_deg(a: LatLon, b: LatLon) -> f64 {
    let (lat1, lat2) = (a.lat.to_radians(), b.lat.to_radians());
    let dlat = lat2 - lat1;
    let dlon = lon_delta(a.lon, b.lon).to_radians();
    let h = (dlat / 2.0).sin().powi(2) + lat1.cos() * lat2.cos() * (dlon / 2.0).sin().powi(2);
    2.0 * h.sqrt().min(1.0).asin().to_degrees()
}

/// Half-width in longitude of a spherical cap of angular radius `radius_deg`
/// centred at latitude `lat`, or `None` when the cap touches a pole and
/// therefore spans every longitude.
pub fn cap_lon_half_width(lat: f64, radius_deg: f64) -> Option<f64> {
    if lat.abs() + radius_deg >= 90.0 {
        return None;
    }
    let s = radius_deg.to_radians().sin() / lat.to_radians().cos();
    if s >= 1.0 {
        None
    } else {
        Some(s.asin().to_degrees())
    }
}
