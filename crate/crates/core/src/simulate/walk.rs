//! The segment walk: attach to a host, step, jump, translate, smooth.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::params::SimulationParams;
use crate::error::{Error, Result};
use crate::geo::{great_circle_deg, LatLon};
use crate::ingest::{GenesisEvent, SegmentLibrary, TrackPoint};
use crate::kernel::{Candidate, TransitionTable};
use crate::spatial::PointRef;

/// One contiguous historical sub-track used by a synthetic track.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentPiece {
    pub storm_id: String,
    pub track: u32,
    pub start_step: u32,
    /// Last source step used, inclusive.
    pub end_step: u32,
    /// Added to every source point after the first.
    pub offset_lat: f64,
    pub offset_lon: f64,
    /// Synthetic index of the first point of the piece. For every piece but
    /// the first this is a join.
    pub start_index: u32,
    /// The transition was forced by segment exhaustion.
    pub forced: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticTrack {
    pub year: u32,
    pub storm_index: u32,
    pub genesis_day_of_year: u32,
    pub genesis_minute_of_day: u32,
    /// Sampled lifetime in 3-hour steps.
    pub lifetime: u32,
    /// Longitudes unwrapped along the track.
    pub points: Vec<TrackPoint>,
    pub pieces: Vec<SegmentPiece>,
    pub early_terminated: bool,
}

impl SyntheticTrack {
    /// Synthetic indices of every join, in order.
    pub fn joins(&self) -> Vec<u32> {
        self.pieces.iter().skip(1).map(|p| p.start_index).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepOutcome {
    Advanced,
    Jumped,
    Forced,
    /// Forced transition found nothing; the rest of the host was replayed
    /// and the track ended there.
    Terminated,
}

/// Walk state of one synthetic track before smoothing.
#[derive(Debug, Clone)]
pub struct WalkState {
    pub host: u32,
    pub host_step: u32,
    pub offset: (f64, f64),
    pub points: Vec<TrackPoint>,
    pub pieces: Vec<SegmentPiece>,
    pub lifetime: u32,
    pub terminated: bool,
}

impl WalkState {
    fn index(&self) -> usize {
        self.points.len() - 1
    }

    pub fn is_done(&self) -> bool {
        self.terminated || self.index() >= self.lifetime as usize
    }

    fn current(&self) -> LatLon {
        let p = self.points.last().unwrap();
        LatLon::new(p.lat, p.lon)
    }

    fn push(&mut self, lat: f64, lon: f64, wind_u10: f64) {
        let step_index = self.points.len() as u32;
        self.points.push(TrackPoint {
            step_index,
            lat,
            lon,
            wind_u10,
        });
    }

    /// Append the next point of the current host.
    fn advance(&mut self, lib: &SegmentLibrary) {
        self.host_step += 1;
        let src = lib.point(PointRef::new(self.host, self.host_step));
        self.push(src.lat + self.offset.0, src.lon + self.offset.1, src.wind_u10);
        self.pieces.last_mut().unwrap().end_step = self.host_step;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PoleCrossing;

/// Rigidly translate a destination suffix so its first point lands on
/// `current`.
///
/// The first output point is `current` itself; every later point is the
/// source point plus `(current - suffix[0])` in unwrapped longitude. Winds
/// are untouched. A translation that would push any point past a pole is
/// refused rather than clamped.
pub fn translate_segment(
    suffix: &[TrackPoint],
    current: LatLon,
) -> std::result::Result<(Vec<TrackPoint>, (f64, f64)), PoleCrossing> {
    let Some(first) = suffix.first() else {
        return Ok((Vec::new(), (0.0, 0.0)));
    };
    let off = (current.lat - first.lat, current.lon - first.lon);
    let mut out = Vec::with_capacity(suffix.len());
    out.push(TrackPoint {
        step_index: first.step_index,
        lat: current.lat,
        lon: current.lon,
        wind_u10: first.wind_u10,
    });
    for p in &suffix[1..] {
        let lat = p.lat + off.0;
        if !(-90.0..=90.0).contains(&lat) {
            return Err(PoleCrossing);
        }
        out.push(TrackPoint {
            step_index: p.step_index,
            lat,
            lon: p.lon + off.1,
            wind_u10: p.wind_u10,
        });
    }
    Ok((out, off))
}

/// Categorical draw proportional to `weights`. Zero weights are never
/// chosen. Panics on an empty or all-zero list; callers check first.
pub fn select_transition<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    assert!(total > 0.0, "select_transition needs a positive total weight");
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            acc += w;
            last_positive = i;
            if u < acc {
                return i;
            }
        }
    }
    last_positive
}

/// Points a walk may start from: enough room after them to reach a full
/// smoothing window before the host is exhausted.
fn can_host_start(lib: &SegmentLibrary, r: PointRef, reserved: usize, half: usize) -> bool {
    lib.is_eligible(r, reserved + half)
}

/// Attach a new walk to the library point nearest the genesis position and
/// translate it onto the genesis position.
///
/// Ties go to the lower storm id, then the lower step. With no attachable
/// point inside `radius_deg` the search widens to the whole library.
pub fn start_track(
    genesis: &GenesisEvent,
    lifetime: u32,
    lib: &SegmentLibrary,
    radius_deg: f64,
    reserved: usize,
    half: usize,
) -> Result<WalkState> {
    let g = LatLon::new(genesis.lat, genesis.lon);
    let mut near: Vec<(PointRef, f64)> = lib
        .index()
        .within(g, radius_deg)
        .into_iter()
        .filter(|(r, _)| can_host_start(lib, *r, reserved, half))
        .collect();
    if near.is_empty() {
        log::info!(
            "no host point within {radius_deg} deg of genesis ({}, {}); widening search",
            g.lat,
            g.lon
        );
        near = lib
            .tracks()
            .iter()
            .enumerate()
            .flat_map(|(t, tr)| (0..tr.points.len() as u32).map(move |s| PointRef::new(t as u32, s)))
            .filter(|r| can_host_start(lib, *r, reserved, half))
            .map(|r| (r, great_circle_deg(g, lib.position(r))))
            .collect();
    }
    near.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    for (r, _) in near {
        let track = lib.track(r.track);
        let suffix = &track.points[r.step as usize..];
        if let Ok((pts, off)) = translate_segment(suffix, g) {
            let first = pts[0];
            let mut st = WalkState {
                host: r.track,
                host_step: r.step,
                offset: off,
                points: Vec::with_capacity(lifetime as usize + 1),
                pieces: vec![SegmentPiece {
                    storm_id: track.storm_id.clone(),
                    track: r.track,
                    start_step: r.step,
                    end_step: r.step,
                    offset_lat: off.0,
                    offset_lon: off.1,
                    start_index: 0,
                    forced: false,
                }],
                lifetime,
                terminated: false,
            };
            st.push(first.lat, first.lon, first.wind_u10);
            return Ok(st);
        }
    }
    Err(Error::Empty(
        "no library point long enough to host a synthetic track".into(),
    ))
}

/// Try the candidates in weighted random order until one translates
/// without crossing a pole.
fn try_transition<R: Rng + ?Sized>(
    state: &mut WalkState,
    row: &[Candidate],
    lib: &SegmentLibrary,
    forced: bool,
    rng: &mut R,
) -> bool {
    let mut weights: Vec<f64> = row.iter().map(|c| c.weight).collect();
    while weights.iter().any(|&w| w > 0.0) {
        let i = select_transition(&weights, rng);
        let dest = row[i].target;
        let track = lib.track(dest.track);
        let cur = state.current();
        match translate_segment(&track.points[dest.step as usize..], cur) {
            Ok((_, off)) => {
                state.host = dest.track;
                state.host_step = dest.step;
                state.offset = off;
                state.pieces.push(SegmentPiece {
                    storm_id: track.storm_id.clone(),
                    track: dest.track,
                    start_step: dest.step,
                    end_step: dest.step,
                    offset_lat: off.0,
                    offset_lon: off.1,
                    start_index: state.index() as u32,
                    forced,
                });
                return true;
            }
            Err(PoleCrossing) => {
                log::debug!("candidate {dest:?} rejected: translation crosses a pole");
                weights[i] = 0.0;
            }
        }
    }
    false
}

/// Advance the walk by one 3-hour step.
///
/// With probability `jump_probability`, and when the current host point has
/// candidates and a full smoothing window fits around the join, a transition
/// fires; otherwise the walk advances along the host. When the host reaches
/// its last eligible point and its remaining tail cannot carry the track to
/// its lifetime, a transition is forced. A forced transition with no usable
/// candidate replays the host's tail and ends the track early.
pub fn step<R: Rng + ?Sized>(
    state: &mut WalkState,
    lib: &SegmentLibrary,
    table: &TransitionTable,
    params: &SimulationParams,
    rng: &mut R,
) -> StepOutcome {
    debug_assert!(!state.is_done());
    let reserved = table.reserved_steps();
    let half = params.half_window();
    let k = state.index();
    let remaining = state.lifetime as usize - k;
    let here = PointRef::new(state.host, state.host_step);
    let host_len = lib.track(state.host).points.len();
    let last_usable = host_len as isize - 1 - reserved as isize;
    let p = state.host_step as isize;
    let tail = host_len - 1 - state.host_step as usize;

    if p >= last_usable && remaining > tail {
        if k >= half && try_transition(state, table.row(here), lib, true, rng) {
            state.advance(lib);
            return StepOutcome::Forced;
        }
        while state.host_step as usize + 1 < host_len {
            state.advance(lib);
        }
        state.terminated = true;
        return StepOutcome::Terminated;
    }

    let eligible = p <= last_usable;
    if eligible && k >= half && remaining >= half && rng.random_bool(params.jump_probability) {
        let row = table.row(here);
        if !row.is_empty() && try_transition(state, row, lib, false, rng) {
            state.advance(lib);
            return StepOutcome::Jumped;
        }
    }
    state.advance(lib);
    StepOutcome::Advanced
}

/// Replace the interior of the window centred on `join` by linear
/// interpolation between its two end points, for latitude, unwrapped
/// longitude and wind. Points outside the window are not touched.
pub fn smooth_join(points: &mut [TrackPoint], join: usize, window: usize) -> Result<()> {
    if window < 3 || window.is_multiple_of(2) {
        return Err(Error::InvalidInput(format!("smoothing window {window} must be odd and >= 3")));
    }
    let half = window / 2;
    if join < half || join + half >= points.len() {
        return Err(Error::InvalidInput(format!(
            "window of {window} around index {join} does not fit in {} points",
            points.len()
        )));
    }
    let (lo, hi) = (points[join - half], points[join + half]);
    let span = (2 * half) as f64;
    for i in 1..2 * half {
        let f = i as f64 / span;
        let p = &mut points[join - half + i];
        p.lat = lo.lat + (hi.lat - lo.lat) * f;
        p.lon = lo.lon + (hi.lon - lo.lon) * f;
        p.wind_u10 = lo.wind_u10 + (hi.wind_u10 - lo.wind_u10) * f;
    }
    Ok(())
}

/// Walk one synthetic track from genesis to its lifetime (or early end),
/// then smooth every join in order.
pub fn simulate_track<R: Rng + ?Sized>(
    genesis: &GenesisEvent,
    lifetime: u32,
    lib: &SegmentLibrary,
    table: &TransitionTable,
    params: &SimulationParams,
    rng: &mut R,
) -> Result<SyntheticTrack> {
    let raw = walk_raw(genesis, lifetime, lib, table, params, rng)?;
    let mut points = raw.points;
    for piece in raw.pieces.iter().skip(1) {
        smooth_join(&mut points, piece.start_index as usize, params.smoothing_window)
            .map_err(|e| Error::Invariant(format!("join window: {e}")))?;
    }
    Ok(SyntheticTrack {
        year: 0,
        storm_index: 0,
        genesis_day_of_year: genesis.day_of_year,
        genesis_minute_of_day: genesis.minute_of_day,
        lifetime,
        points,
        pieces: raw.pieces,
        early_terminated: raw.terminated,
    })
}

/// The walk without smoothing; exposed so joins can be checked against the
/// translated source values.
pub fn walk_raw<R: Rng + ?Sized>(
    genesis: &GenesisEvent,
    lifetime: u32,
    lib: &SegmentLibrary,
    table: &TransitionTable,
    params: &SimulationParams,
    rng: &mut R,
) -> Result<WalkState> {
    let mut st = start_track(
        genesis,
        lifetime,
        lib,
        table.params().radius_deg,
        table.reserved_steps(),
        params.half_window(),
    )?;
    while !st.is_done() {
        step(&mut st, lib, table, params, rng);
    }
    Ok(st)
}
