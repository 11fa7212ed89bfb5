use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::{wrap_lon, wrap_lon_360};
use crate::ingest::BasinCode;

/// Longitude convention a grid is laid out in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LonFrame {
    /// (-180, 180]
    Signed180,
    /// [0, 360); used for panels that straddle the antimeridian.
    East360,
}

impl LonFrame {
    pub fn map(self, lon: f64) -> f64 {
        match self {
            LonFrame::Signed180 => wrap_lon(lon),
            LonFrame::East360 => wrap_lon_360(lon),
        }
    }
}

/// Regular lat/lon raster.
///
/// Each cell owns its lower-left corner: cell `(r, c)` covers
/// `[lat_min + r*d, lat_min + (r+1)*d) x [lon_min + c*d, lon_min + (c+1)*d)`.
/// Points exactly on `lat_max` or `lon_max` fall in the last row or column.
/// Cells are numbered row-major, latitude first.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub cell_deg: f64,
    pub lat_min: f64,
    pub lat_max: f64,
    pub lon_min: f64,
    pub lon_max: f64,
    pub lon_frame: LonFrame,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self::for_basin(BasinCode::NA)
    }
}

impl GridSpec {
    pub fn new(cell_deg: f64, lat: (f64, f64), lon: (f64, f64), lon_frame: LonFrame) -> Result<Self> {
        let g = Self {
            cell_deg,
            lat_min: lat.0,
            lat_max: lat.1,
            lon_min: lon.0,
            lon_max: lon.1,
            lon_frame,
        };
        g.validate()?;
        Ok(g)
    }

    /// 2-degree panel covering a basin's storm activity.
    pub fn for_basin(basin: BasinCode) -> Self {
        use BasinCode::*;
        use LonFrame::*;
        let (lat, lon, frame) = match basin {
            NA => ((0.0, 60.0), (-110.0, 10.0), Signed180),
            EP => ((0.0, 40.0), (180.0, 280.0), East360),
            WP => ((0.0, 60.0), (100.0, 200.0), East360),
            NI => ((0.0, 40.0), (30.0, 110.0), Signed180),
            SI => ((-50.0, 0.0), (10.0, 140.0), Signed180),
            SP => ((-50.0, 0.0), (140.0, 240.0), East360),
        };
        Self {
            cell_deg: 2.0,
            lat_min: lat.0,
            lat_max: lat.1,
            lon_min: lon.0,
            lon_max: lon.1,
            lon_frame: frame,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.cell_deg;
        if !(d > 0.0 && d.is_finite()) {
            return Err(Error::Config(format!("grid cell size must be positive, got {d}")));
        }
        let multiple = |v: f64| (v / d - (v / d).round()).abs() < 1e-9;
        for (name, v) in [
            ("lat_min", self.lat_min),
            ("lat_max", self.lat_max),
            ("lon_min", self.lon_min),
            ("lon_max", self.lon_max),
        ] {
            if !multiple(v) {
                return Err(Error::Config(format!("grid {name} {v} is not a multiple of the cell size {d}")));
            }
        }
        if self.lat_min >= self.lat_max || self.lon_min >= self.lon_max {
            return Err(Error::Config("grid bounds are empty".into()));
        }
        if self.lat_min < -90.0 || self.lat_max > 90.0 {
            return Err(Error::Config("grid latitude bounds outside [-90, 90]".into()));
        }
        let (lo, hi) = match self.lon_frame {
            LonFrame::Signed180 => (-180.0, 180.0),
            LonFrame::East360 => (0.0, 360.0),
        };
        if self.lon_min < lo || self.lon_max > hi {
            return Err(Error::Config(format!("grid longitude bounds outside [{lo}, {hi}]")));
        }
        Ok(())
    }

    pub fn n_lat(&self) -> usize {
        ((self.lat_max - self.lat_min) / self.cell_deg).round() as usize
    }

    pub fn n_lon(&self) -> usize {
        ((self.lon_max - self.lon_min) / self.cell_deg).round() as usize
    }

    pub fn n_cells(&self) -> usize {
        self.n_lat() * self.n_lon()
    }

    fn axis(v: f64, lo: f64, hi: f64, d: f64, n: usize) -> Option<usize> {
        if !(lo..=hi).contains(&v) {
            return None;
        }
        Some((((v - lo) / d).floor() as usize).min(n - 1))
    }

    /// Cell index of a point, or `None` outside the grid.
    pub fn cell_of(&self, lat: f64, lon: f64) -> Option<usize> {
        let r = Self::axis(lat, self.lat_min, self.lat_max, self.cell_deg, self.n_lat())?;
        let lon = self.lon_frame.map(lon);
        let c = Self::axis(lon, self.lon_min, self.lon_max, self.cell_deg, self.n_lon())?;
        Some(r * self.n_lon() + c)
    }

    /// Lower-left corner of a cell.
    pub fn corner(&self, cell: usize) -> (f64, f64) {
        let (r, c) = (cell / self.n_lon(), cell % self.n_lon());
        (
            self.lat_min + r as f64 * self.cell_deg,
            self.lon_min + c as f64 * self.cell_deg,
        )
    }

    /// Inverse of `corner`, for corners produced by this grid.
    pub fn cell_at_corner(&self, lat: f64, lon: f64) -> Option<usize> {
        let r = ((lat - self.lat_min) / self.cell_deg).round();
        let c = ((lon - self.lon_min) / self.cell_deg).round();
        if r < 0.0 || c < 0.0 || r as usize >= self.n_lat() || c as usize >= self.n_lon() {
            return None;
        }
        let cell = r as usize * self.n_lon() + c as usize;
        (self.corner(cell) == (lat, lon)).then_some(cell)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn half_open_cells() {
        let g = GridSpec::new(2.0, (0.0, 4.0), (10.0, 14.0), LonFrame::Signed180).unwrap();
        assert_eq!(g.n_cells(), 4);
        assert_eq!(g.cell_of(0.0, 10.0), Some(0));
        assert_eq!(g.cell_of(1.999, 11.999), Some(0));
        assert_eq!(g.cell_of(2.0, 10.0), Some(2));
        assert_eq!(g.cell_of(0.0, 12.0), Some(1));
        // upper bounds belong to the last cell
        assert_eq!(g.cell_of(4.0, 14.0), Some(3));
        assert_eq!(g.cell_of(4.01, 12.0), None);
        assert_eq!(g.cell_of(-0.01, 12.0), None);
        assert_eq!(g.corner(3), (2.0, 12.0));
    }

    #[test]
    fn east360_frame() {
        let g = GridSpec::for_basin(BasinCode::WP);
        let a = g.cell_of(20.0, -179.0).unwrap();
        let b = g.cell_of(20.0, 181.0).unwrap();
        assert_eq!(a, b);
        assert_eq!(g.corner(a), (20.0, 180.0));
    }

    #[test]
    fn rejects_misaligned_bounds() {
        assert!(GridSpec::new(2.0, (0.0, 5.0), (0.0, 4.0), LonFrame::Signed180).is_err());
        assert!(GridSpec::new(2.0, (0.0, 4.0), (4.0, 4.0), LonFrame::Signed180).is_err());
        for b in BasinCode::ALL {
            GridSpec::for_basin(b).validate().unwrap();
        }
    }

    proptest! {
        #[test]
        fn every_inside_point_has_one_cell(lat in 0.0f64..=40.0, lon in 30.0f64..=110.0) {
            let g = GridSpec::for_basin(BasinCode::NI);
            let c = g.cell_of(lat, lon).unwrap();
            let (la, lo) = g.corner(c);
            prop_assert!(la <= lat && lo <= lon);
            prop_assert!(lat < la + 2.0 || lat == 40.0);
            prop_assert!(lon < lo + 2.0 || lon == 110.0);
            prop_assert_eq!(g.cell_at_corner(la, lo), Some(c));
        }
    }
}
