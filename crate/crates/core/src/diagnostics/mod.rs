//! Gridded validation fields for observed and synthetic catalogs.

mod compare;
mod export;
mod fields;
mod grid;

use serde::{Deserialize, Serialize};

pub use compare::{field_compare, pearson, FieldComparison};
pub use export::{export_field, field_sidecar_path, import_field, FieldMetadata};
pub use fields::{
    draw_years, median, median_field, metric_field, p64_field, track_density, FieldUnits, GridField, Metric,
    P64_THRESHOLD_KT,
};
pub use grid::{GridSpec, LonFrame};

use crate::ingest::SegmentLibrary;
use crate::simulate::SyntheticCatalog;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldPoint {
    pub lat: f64,
    pub lon: f64,
    pub wind: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct YearTrack {
    /// 1-based year within the catalog.
    pub year: u32,
    pub points: Vec<FieldPoint>,
}

/// Tracks labelled by year, with the number of years they represent
/// (years without storms count).
#[derive(Debug, Clone, PartialEq)]
pub struct TrackSet {
    pub n_years: u32,
    pub tracks: Vec<YearTrack>,
    pub label: String,
}

impl TrackSet {
    /// Panics if a year label is outside `1..=n_years`.
    pub fn new(n_years: u32, tracks: Vec<(u32, Vec<FieldPoint>)>) -> Self {
        let tracks = tracks
            .into_iter()
            .map(|(year, points)| {
                assert!(year >= 1 && year <= n_years, "year {year} outside 1..={n_years}");
                YearTrack { year, points }
            })
            .collect();
        Self {
            n_years,
            tracks,
            label: String::new(),
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Modern-window tracks of a library, at their 3-hourly resolution.
    pub fn observed(lib: &SegmentLibrary) -> Self {
        let cfg = lib.config();
        let first = cfg.modern_start_year();
        let tracks = lib
            .modern_tracks()
            .map(|t| {
                let pts = t.points.iter().map(|p| FieldPoint { lat: p.lat, lon: p.lon, wind: p.wind_u10 }).collect();
                ((t.genesis_year - first + 1) as u32, pts)
            })
            .collect();
        Self::new(cfg.modern_years(), tracks).with_label(format!(
            "observed {} {}-{}",
            cfg.basin, first, cfg.record_end_year
        ))
    }

    pub fn from_catalog(cat: &SyntheticCatalog) -> Self {
        let tracks = cat
            .tracks
            .iter()
            .map(|t| {
                let pts = t.points.iter().map(|p| FieldPoint { lat: p.lat, lon: p.lon, wind: p.wind_u10 }).collect();
                (t.year, pts)
            })
            .collect();
        Self::new(cat.n_years(), tracks).with_label(format!("synthetic {} {} years", cat.header.basin, cat.n_years()))
    }

    /// The first `n` years only.
    pub fn prefix(&self, n: u32) -> Self {
        Self {
            n_years: n.min(self.n_years),
            tracks: self.tracks.iter().filter(|t| t.year <= n).cloned().collect(),
            label: format!("{} (first {n} years)", self.label),
        }
    }

    pub fn n_points(&self) -> usize {
        self.tracks.iter().map(|t| t.points.len()).sum()
    }
}
