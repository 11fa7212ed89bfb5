use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::GridSpec;
use super::TrackSet;
use crate::error::{Error, Result};

/// Hurricane/typhoon-force threshold, knots.
pub const P64_THRESHOLD_KT: f64 = 64.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldUnits {
    TrackPointsPerYear,
    AnnualProbability,
    Ratio,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    TrackDensity,
    P64,
}

impl Metric {
    pub fn units(self) -> FieldUnits {
        match self {
            Metric::TrackDensity => FieldUnits::TrackPointsPerYear,
            Metric::P64 => FieldUnits::AnnualProbability,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridField {
    pub grid: GridSpec,
    pub values: Vec<f64>,
    pub units: FieldUnits,
    pub n_years_basis: u32,
    pub provenance: String,
}

impl GridField {
    pub fn mean(&self) -> f64 {
        if self.values.is_empty() {
            return 0.0;
        }
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.len() != self.grid.n_cells() {
            return Err(Error::Invariant(format!(
                "field has {} values for {} cells",
                self.values.len(),
                self.grid.n_cells()
            )));
        }
        if self.n_years_basis == 0 {
            return Err(Error::Invariant("field year basis is zero".into()));
        }
        let cap = if self.units == FieldUnits::AnnualProbability { 1.0 } else { f64::INFINITY };
        if let Some(v) = self.values.iter().find(|v| !(**v >= 0.0 && **v <= cap)) {
            return Err(Error::Invariant(format!("field value {v} out of range for {:?}", self.units)));
        }
        Ok(())
    }
}

fn check_years(n_years: u32) -> Result<()> {
    if n_years == 0 {
        return Err(Error::InvalidInput("n_years must be positive".into()));
    }
    Ok(())
}

/// Per-year cell aggregates: `(cell, point count, wind sum)` sorted by cell.
type YearCells = Vec<(usize, u32, f64)>;

fn year_cells(set: &TrackSet, grid: &GridSpec) -> Vec<YearCells> {
    let mut by_year: Vec<std::collections::BTreeMap<usize, (u32, f64)>> =
        vec![Default::default(); set.n_years as usize];
    for t in &set.tracks {
        let m = &mut by_year[t.year as usize - 1];
        for p in &t.points {
            if let Some(c) = grid.cell_of(p.lat, p.lon) {
                let e = m.entry(c).or_insert((0, 0.0));
                e.0 += 1;
                e.1 += p.wind;
            }
        }
    }
    by_year
        .into_iter()
        .map(|m| m.into_iter().map(|(c, (n, w))| (c, n, w)).collect())
        .collect()
}

fn metric_from_years<'a>(
    years: impl Iterator<Item = &'a YearCells>,
    grid: &GridSpec,
    metric: Metric,
    n_years: u32,
) -> Vec<f64> {
    let mut acc = vec![0.0f64; grid.n_cells()];
    match metric {
        Metric::TrackDensity => {
            let mut counts = vec![0u64; grid.n_cells()];
            for y in years {
                for &(c, n, _) in y {
                    counts[c] += n as u64;
                }
            }
            for (a, n) in acc.iter_mut().zip(counts) {
                *a = n as f64 / n_years as f64;
            }
        }
        Metric::P64 => {
            let mut hits = vec![0u32; grid.n_cells()];
            for y in years {
                for &(c, _, w) in y {
                    if w >= P64_THRESHOLD_KT {
                        hits[c] += 1;
                    }
                }
            }
            for (a, h) in acc.iter_mut().zip(hits) {
                *a = h as f64 / n_years as f64;
            }
        }
    }
    acc
}

/// Track points per year in each cell. Points outside the grid are
/// ignored.
pub fn track_density(set: &TrackSet, grid: &GridSpec) -> Result<GridField> {
    metric_field(set, grid, Metric::TrackDensity)
}

/// Fraction of years in which the summed wind of all track points of all
/// storms inside a cell reaches 64 kt.
pub fn p64_field(set: &TrackSet, grid: &GridSpec) -> Result<GridField> {
    metric_field(set, grid, Metric::P64)
}

pub fn metric_field(set: &TrackSet, grid: &GridSpec, metric: Metric) -> Result<GridField> {
    check_years(set.n_years)?;
    grid.validate()?;
    let cells = year_cells(set, grid);
    Ok(GridField {
        grid: *grid,
        values: metric_from_years(cells.iter(), grid, metric, set.n_years),
        units: metric.units(),
        n_years_basis: set.n_years,
        provenance: set.label.clone(),
    })
}

/// Median of a non-empty slice; an even count averages the middle pair.
pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Year indices (0-based) of draw `d`, sampled without replacement.
pub fn draw_years(n_years: u32, n_b: u32, seed: u64, draw: u32) -> Vec<usize> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(draw as u64);
    rand::seq::index::sample(&mut rng, n_years as usize, n_b as usize).into_vec()
}

/// Cell-wise median of `metric` over `n_draws` random `n_b`-year
/// sub-catalogs. Each draw has its own random stream, so the result depends
/// only on `seed` and `n_draws`.
pub fn median_field(
    set: &TrackSet,
    grid: &GridSpec,
    n_b: u32,
    n_draws: u32,
    metric: Metric,
    seed: u64,
) -> Result<GridField> {
    check_years(n_b)?;
    if n_draws == 0 {
        return Err(Error::InvalidInput("n_draws must be at least 1".into()));
    }
    if n_b > set.n_years {
        return Err(Error::InvalidInput(format!(
            "cannot draw {n_b} years from a {}-year catalog",
            set.n_years
        )));
    }
    grid.validate()?;
    let cells = year_cells(set, grid);
    let draws: Vec<Vec<f64>> = (0..n_draws)
        .into_par_iter()
        .map(|d| {
            let ys = draw_years(set.n_years, n_b, seed, d);
            metric_from_years(ys.iter().map(|&y| &cells[y]), grid, metric, n_b)
        })
        .collect();
    let mut column = vec![0.0; n_draws as usize];
    let values = (0..grid.n_cells())
        .map(|c| {
            for (slot, d) in column.iter_mut().zip(&draws) {
                *slot = d[c];
            }
            median(&mut column)
        })
        .collect();
    Ok(GridField {
        grid: *grid,
        values,
        units: metric.units(),
        n_years_basis: n_b,
        provenance: format!(
            "{}; median of {n_draws} draws of {n_b} years (seed {seed})",
            set.label
        ),
    })
}
