//! Wind-conditioned transition kernel.
//!
//! A candidate point `j` near the current host point `i` is weighted by a
//! product of four generalised bisquare kernels acting on standardised
//! covariates: great-circle distance, comparative motion-vector difference,
//! age difference and wind-magnitude difference.

pub mod motion;
mod table;

use serde::{Deserialize, Serialize};

pub use crate::geo::great_circle_deg;
pub use motion::{motion_vector, track_motion_vectors, MotionVector};
pub use table::{load_table, precompute_table, Candidate, TableHeader, TransitionTable, TABLE_SCHEMA_VERSION};

use crate::error::{Error, Result};
use crate::ingest::SegmentLibrary;
use crate::spatial::PointRef;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KernelParams {
    /// Shape exponent for the distance term.
    pub alpha_dist: f64,
    /// Shape exponent for the age term.
    pub alpha_age: f64,
    /// Shape exponent for the comparative motion-vector term.
    pub alpha_vec: f64,
    /// Shape exponent for the wind-magnitude term.
    pub alpha_wind: f64,
    /// Candidate search radius, great-circle degrees.
    pub radius_deg: f64,
}

impl Default for KernelParams {
    fn default() -> Self {
        Self {
            alpha_dist: 2.0,
            alpha_age: 2.0,
            alpha_vec: 4.0,
            alpha_wind: 4.0,
            radius_deg: 2.5,
        }
    }
}

impl KernelParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.radius_deg > 0.0) {
            return Err(Error::Config(format!("radius_deg must be > 0, got {}", self.radius_deg)));
        }
        if !(self.alpha_dist > 0.0 && self.alpha_age > 0.0) {
            return Err(Error::Config("alpha_dist and alpha_age must be > 0".into()));
        }
        if !(self.alpha_vec > 2.0 && self.alpha_wind > 2.0) {
            return Err(Error::Config(format!(
                "alpha_vec and alpha_wind must exceed 2 (got {}, {})",
                self.alpha_vec, self.alpha_wind
            )));
        }
        Ok(())
    }
}

/// Generalised bisquare `(1 - u^2)^alpha` on `[0, 1]`, zero beyond.
pub fn bisquare(u: f64, alpha: f64) -> f64 {
    if u >= 1.0 {
        0.0
    } else {
        (1.0 - u * u).powf(alpha)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Covariates {
    pub u1: f64,
    pub u2: f64,
    pub u3: f64,
    pub u4: f64,
}

impl Covariates {
    pub fn weight(&self, p: &KernelParams) -> f64 {
        bisquare(self.u1, p.alpha_dist)
            * bisquare(self.u2, p.alpha_vec)
            * bisquare(self.u3, p.alpha_age)
            * bisquare(self.u4, p.alpha_wind)
    }
}

fn unit(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

/// Standardised covariates between source point `i` and candidate `j`.
pub fn covariates(lib: &SegmentLibrary, i: PointRef, j: PointRef, radius_deg: f64) -> Covariates {
    let n = lib.normalizers();
    let (pi, pj) = (lib.point(i), lib.point(j));
    let d = great_circle_deg(lib.position(i), lib.position(j));
    Covariates {
        u1: unit(d.min(radius_deg) / radius_deg),
        u2: unit(lib.motion(i).distance(&lib.motion(j)) / n.max_v),
        u3: unit((pj.step_index as f64 - pi.step_index as f64).abs() / n.max_t),
        u4: unit((pj.wind_u10 - pi.wind_u10).abs() / n.max_dw),
    }
}

/// Kernel-weighted candidate list for one source point.
///
/// The source must have at least `reserved_steps` points after it on its own
/// track. Candidates are every library point within the radius except the
/// source itself that has at least `reserved_steps + 1` points after it: the
/// walk lands on the candidate and advances one step, and must still be on
/// an eligible source afterwards. The result is sorted by `(track, step)`,
/// zero-weight points are dropped, and weights sum to one. An empty list is
/// a valid answer.
pub fn transition_weights(
    lib: &SegmentLibrary,
    source: PointRef,
    params: &KernelParams,
    reserved_steps: usize,
) -> Vec<Candidate> {
    if !lib.is_eligible(source, reserved_steps) {
        return Vec::new();
    }
    let mut cands: Vec<Candidate> = lib
        .index()
        .within(lib.position(source), params.radius_deg)
        .into_iter()
        .filter(|(j, _)| *j != source && lib.is_eligible(*j, reserved_steps + 1))
        .map(|(j, _)| Candidate {
            target: j,
            weight: covariates(lib, source, j, params.radius_deg).weight(params),
        })
        .filter(|c| c.weight > 0.0)
        .collect();
    let total: f64 = cands.iter().map(|c| c.weight).sum();
    if total > 0.0 {
        for c in &mut cands {
            c.weight /= total;
        }
    }
    cands
}
