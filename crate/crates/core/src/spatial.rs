//! Bucketed radius search over track points on the sphere.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::geo::{cap_lon_half_width, great_circle_deg, wrap_lon, LatLon};

/// Identifies one point of one library track.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PointRef {
    pub track: u32,
    pub step: u32,
}

impl PointRef {
    pub const fn new(track: u32, step: u32) -> Self {
        Self { track, step }
    }
}

#[derive(Debug, Clone)]
pub struct SpatialIndex {
    cell_deg: f64,
    /// Column width, adjusted so columns tile 360 degrees exactly.
    lon_cell_deg: f64,
    n_cols: i64,
    n_rows: i64,
    cells: HashMap<(i64, i64), Vec<u32>>,
    refs: Vec<PointRef>,
    coords: Vec<LatLon>,
}

impl SpatialIndex {
    /// Build over `(ref, position)` pairs with square lat/lon buckets of
    /// `cell_deg` degrees.
    pub fn build(points: impl IntoIterator<Item = (PointRef, LatLon)>, cell_deg: f64) -> Self {
        let cell_deg = if cell_deg.is_finite() && cell_deg > 0.0 {
            cell_deg.min(90.0)
        } else {
            2.5
        };
        let n_cols = (360.0 / cell_deg).ceil() as i64;
        let n_rows = (180.0 / cell_deg).ceil() as i64;
        let mut idx = Self {
            cell_deg,
            lon_cell_deg: 360.0 / n_cols as f64,
            n_cols,
            n_rows,
            cells: HashMap::new(),
            refs: Vec::new(),
            coords: Vec::new(),
        };
        for (r, p) in points {
            let p = LatLon::new(p.lat, wrap_lon(p.lon));
            let key = (idx.row_of(p.lat), idx.col_of(p.lon));
            idx.cells.entry(key).or_default().push(idx.refs.len() as u32);
            idx.refs.push(r);
            idx.coords.push(p);
        }
        idx
    }

    fn row_of(&self, lat: f64) -> i64 {
        (((lat + 90.0) / self.cell_deg).floor() as i64).clamp(0, self.n_rows - 1)
    }

    fn col_of(&self, lon: f64) -> i64 {
        (((lon + 180.0) / self.lon_cell_deg).floor() as i64).rem_euclid(self.n_cols)
    }

    pub fn len(&self) -> usize {
        self.refs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.refs.is_empty()
    }

    /// All indexed points within `radius_deg` great-circle degrees of
    /// `center`, sorted by `(track, step)`, with their distances.
    pub fn within(&self, center: LatLon, radius_deg: f64) -> Vec<(PointRef, f64)> {
        let mut out = Vec::new();
        if !(radius_deg >= 0.0) {
            return out;
        }
        let center = LatLon::new(center.lat, wrap_lon(center.lon));
        let r0 = self.row_of((center.lat - radius_deg).max(-90.0));
        let r1 = self.row_of((center.lat + radius_deg).min(90.0));
        let cols: Vec<i64> = match cap_lon_half_width(center.lat, radius_deg) {
            Some(w) => {
                let w = w + 1e-9;
                let c0 = ((center.lon - w + 180.0) / self.lon_cell_deg).floor() as i64;
                let c1 = ((center.lon + w + 180.0) / self.lon_cell_deg).floor() as i64;
                if c1 - c0 + 1 >= self.n_cols {
                    (0..self.n_cols).collect()
                } else {
                    let mut v: Vec<i64> = (c0..=c1).map(|c| c.rem_euclid(self.n_cols)).collect();
                    v.sort_unstable();
                    v.dedup();
                    v
                }
            }
            None => (0..self.n_cols).collect(),
        };
        for row in r0..=r1 {
            for &col in &cols {
                if let Some(ids) = self.cells.get(&(row, col)) {
                    for &i in ids {
                        let d = great_circle_deg(center, self.coords[i as usize]);
                        if d <= radius_deg {
                            out.push((self.refs[i as usize], d));
                        }
                    }
                }
            }
        }
        out.sort_by_key(|(r, _)| *r);
        out
    }

    /// Nearest indexed point to `center`; ties go to the lower `PointRef`.
    pub fn nearest(&self, center: LatLon) -> Option<(PointRef, f64)> {
        self.refs
            .iter()
            .zip(&self.coords)
            .map(|(r, p)| (*r, great_circle_deg(center, *p)))
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
    }
}
