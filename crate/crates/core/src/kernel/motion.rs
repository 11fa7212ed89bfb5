use crate::geo::lon_delta;
use crate::ingest::TrackPoint;

/// Wind-scaled forward-motion vector, knots.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MotionVector {
    pub vx: f64,
    pub vy: f64,
}

impl MotionVector {
    pub fn from_heading(wind: f64, heading: f64) -> Self {
        Self {
            vx: wind * heading.cos(),
            vy: wind * heading.sin(),
        }
    }

    /// Euclidean length of the difference vector.
    pub fn distance(&self, other: &MotionVector) -> f64 {
        (self.vx - other.vx).hypot(self.vy - other.vy)
    }
}

/// Forward-motion bearing from `prev` to `curr` in radians, measured
/// counter-clockwise from east on the local tangent plane. `None` when the
/// two positions coincide.
pub fn heading(prev: &TrackPoint, curr: &TrackPoint) -> Option<f64> {
    let dy = curr.lat - prev.lat;
    let mid = (0.5 * (curr.lat + prev.lat)).to_radians();
    let dx = lon_delta(prev.lon, curr.lon) * mid.cos();
    if dx == 0.0 && dy == 0.0 {
        None
    } else {
        Some(dy.atan2(dx))
    }
}

/// Motion vector for a step, using `carried` as the heading when the step
/// has zero displacement.
pub fn motion_vector(prev: &TrackPoint, curr: &TrackPoint, carried: f64) -> MotionVector {
    let h = heading(prev, curr).unwrap_or(carried);
    MotionVector::from_heading(curr.wind_u10, h)
}

/// Motion vectors for every point of a track.
///
/// A point's heading is the bearing from its predecessor; stationary steps
/// carry the previous heading and the first point uses the bearing toward
/// the next distinct position.
pub fn track_motion_vectors(points: &[TrackPoint]) -> Vec<MotionVector> {
    let n = points.len();
    let mut out = Vec::with_capacity(n);
    if n == 0 {
        return out;
    }
    let initial = points
        .windows(2)
        .find_map(|w| heading(&w[0], &w[1]))
        .unwrap_or(0.0);
    out.push(MotionVector::from_heading(points[0].wind_u10, initial));
    let mut carried = initial;
    for w in points.windows(2) {
        carried = heading(&w[0], &w[1]).unwrap_or(carried);
        out.push(MotionVector::from_heading(w[1].wind_u10, carried));
    }
    out
}
