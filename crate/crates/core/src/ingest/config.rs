use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BasinCode {
    NA,
    EP,
    WP,
    NI,
    SI,
    SP,
}

impl BasinCode {
    pub const ALL: [BasinCode; 6] = [
        BasinCode::NA,
        BasinCode::EP,
        BasinCode::WP,
        BasinCode::NI,
        BasinCode::SI,
        BasinCode::SP,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BasinCode::NA => "NA",
            BasinCode::EP => "EP",
            BasinCode::WP => "WP",
            BasinCode::NI => "NI",
            BasinCode::SI => "SI",
            BasinCode::SP => "SP",
        }
    }
}

impl fmt::Display for BasinCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BasinCode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BasinCode::ALL
            .into_iter()
            .find(|b| b.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidInput(format!("unknown basin code {s:?}")))
    }
}

/// Averaging period of the agency-reported maximum sustained wind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindConvention {
    OneMin,
    ThreeMin,
    TenMin,
}

impl WindConvention {
    /// Multiplier onto the 10-min U10 scale.
    pub fn conversion_factor(self) -> f64 {
        match self {
            WindConvention::OneMin => 0.88,
            WindConvention::ThreeMin => 0.93,
            WindConvention::TenMin => 1.0,
        }
    }
}

/// Archive column names. Defaults follow the IBTrACS v04 "list" CSV, which
/// carries a units row directly under the header.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ColumnMap {
    pub storm_id: String,
    pub season: String,
    pub basin: String,
    pub iso_time: String,
    pub lat: String,
    pub lon: String,
    pub wind: String,
    pub units_row: bool,
}

impl Default for ColumnMap {
    fn default() -> Self {
        Self {
            storm_id: "SID".into(),
            season: "SEASON".into(),
            basin: "BASIN".into(),
            iso_time: "ISO_TIME".into(),
            lat: "LAT".into(),
            lon: "LON".into(),
            wind: "WMO_WIND".into(),
            units_row: true,
        }
    }
}

impl ColumnMap {
    /// Lower-case single-header layout (`track_id,season,basin,time,lon,lat,wind`)
    /// used by several redistributed WMO-agency subsets.
    pub fn lowercase() -> Self {
        Self {
            storm_id: "track_id".into(),
            season: "season".into(),
            basin: "basin".into(),
            iso_time: "time".into(),
            lat: "lat".into(),
            lon: "lon".into(),
            wind: "wind".into(),
            units_row: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasinConfig {
    pub basin: BasinCode,
    pub record_start_year: i32,
    pub modern_cutoff_year: i32,
    pub record_end_year: i32,
    pub wind_convention: WindConvention,
    #[serde(default)]
    pub columns: ColumnMap,
}

impl BasinConfig {
    /// Record windows, observing-era cutoffs and agency averaging periods
    /// for each basin.
    pub fn for_basin(basin: BasinCode) -> Self {
        use BasinCode::*;
        use WindConvention::*;
        let (start, cutoff, end, conv) = match basin {
            NA => (1851, 1944, 2025, OneMin),
            EP => (1876, 1945, 2025, OneMin),
            WP => (1957, 1944, 2024, TenMin),
            NI => (1932, 1951, 2024, ThreeMin),
            SI => (1973, 1944, 2025, TenMin),
            SP => (1968, 1968, 2025, TenMin),
        };
        Self {
            basin,
            record_start_year: start,
            modern_cutoff_year: cutoff,
            record_end_year: end,
            wind_convention: conv,
            columns: ColumnMap::default(),
        }
    }

    pub fn conversion_factor(&self) -> f64 {
        self.wind_convention.conversion_factor()
    }

    pub fn modern_start_year(&self) -> i32 {
        self.record_start_year.max(self.modern_cutoff_year)
    }

    pub fn is_modern(&self, year: i32) -> bool {
        year >= self.modern_start_year() && year <= self.record_end_year
    }

    /// Length in years of the modern observing window (the per-year
    /// normaliser for observed fields).
    pub fn modern_years(&self) -> u32 {
        (self.record_end_year - self.modern_start_year() + 1).max(0) as u32
    }

    pub fn validate(&self) -> Result<()> {
        if self.record_end_year < self.record_start_year {
            return Err(Error::Config(format!(
                "{}: record_end_year {} before record_start_year {}",
                self.basin, self.record_end_year, self.record_start_year
            )));
        }
        if self.modern_start_year() > self.record_end_year {
            return Err(Error::Config(format!(
                "{}: modern window starts after the record ends",
                self.basin
            )));
        }
        Ok(())
    }
}
