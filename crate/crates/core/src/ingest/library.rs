//! The immutable per-basin segment library.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian as LE, ReadBytesExt, WriteBytesExt};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::BasinConfig;
use super::track::{HistoricalTrack, TrackPoint};
use crate::error::{Error, Result};
use crate::geo::{great_circle_deg, LatLon};
use crate::io_util::{atomic_write, read_str, write_str, HashWriter};
use crate::kernel::motion::{track_motion_vectors, MotionVector};
use crate::spatial::{PointRef, SpatialIndex};

const LIBRARY_MAGIC: &[u8; 8] = b"TSLIB\0\0\0";
pub const LIBRARY_SCHEMA_VERSION: u32 = 1;

/// Lower bounds applied when the training population cannot define a
/// normaliser (all pairs identical, or no pairs at all).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizerFloors {
    pub max_v: f64,
    pub max_t: f64,
    pub max_dw: f64,
}

impl Default for NormalizerFloors {
    fn default() -> Self {
        Self {
            max_v: 1.0,
            max_t: 1.0,
            max_dw: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Normalizers {
    /// Basin max of the comparative motion-vector difference, knots.
    pub max_v: f64,
    /// Basin max age difference, 3-hour steps.
    pub max_t: f64,
    /// Basin max absolute wind difference, knots.
    pub max_dw: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NormalizerSource {
    /// Pairs within the candidate radius.
    RadiusPairs,
    /// All point pairs in the library.
    AllPairs,
    Floor,
}

#[derive(Debug, Clone)]
pub struct SegmentLibrary {
    config: BasinConfig,
    tracks: Vec<HistoricalTrack>,
    modern: Vec<bool>,
    normalizers: Normalizers,
    normalizer_sources: [NormalizerSource; 3],
    pair_radius_deg: f64,
    motion: Vec<Vec<MotionVector>>,
    index: SpatialIndex,
    checksum: [u8; 32],
}

#[derive(Debug, Clone, Copy, Default)]
struct PairMax {
    v: f64,
    t: f64,
    dw: f64,
    any: bool,
}

impl PairMax {
    fn merge(self, o: PairMax) -> PairMax {
        PairMax {
            v: self.v.max(o.v),
            t: self.t.max(o.t),
            dw: self.dw.max(o.dw),
            any: self.any || o.any,
        }
    }
}

fn pair_terms(
    tracks: &[HistoricalTrack],
    motion: &[Vec<MotionVector>],
    a: PointRef,
    b: PointRef,
) -> (f64, f64, f64) {
    let pa = &tracks[a.track as usize].points[a.step as usize];
    let pb = &tracks[b.track as usize].points[b.step as usize];
    let va = &motion[a.track as usize][a.step as usize];
    let vb = &motion[b.track as usize][b.step as usize];
    (
        va.distance(vb),
        (pb.step_index as f64 - pa.step_index as f64).abs(),
        (pb.wind_u10 - pa.wind_u10).abs(),
    )
}

fn all_refs(tracks: &[HistoricalTrack]) -> Vec<PointRef> {
    tracks
        .iter()
        .enumerate()
        .flat_map(|(t, tr)| (0..tr.points.len()).map(move |s| PointRef::new(t as u32, s as u32)))
        .collect()
}

fn point_at(tracks: &[HistoricalTrack], r: PointRef) -> LatLon {
    let p = &tracks[r.track as usize].points[r.step as usize];
    LatLon::new(p.lat, p.lon)
}

/// Build the library for one basin.
///
/// Tracks are ordered by storm id so that track indices (and every tie-break
/// that uses them) follow storm-id order.
pub fn build_library(
    mut tracks: Vec<HistoricalTrack>,
    config: &BasinConfig,
    pair_radius_deg: f64,
    floors: NormalizerFloors,
) -> Result<SegmentLibrary> {
    config.validate()?;
    if tracks.is_empty() {
        return Err(Error::Empty(format!("no tracks for basin {}", config.basin)));
    }
    if !(pair_radius_deg > 0.0) {
        return Err(Error::InvalidInput(format!(
            "pair radius must be positive, got {pair_radius_deg}"
        )));
    }
    for t in &tracks {
        if t.basin != config.basin {
            return Err(Error::InvalidInput(format!(
                "track {} belongs to {}, not {}",
                t.storm_id, t.basin, config.basin
            )));
        }
        if t.points.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "track {} has fewer than 2 points",
                t.storm_id
            )));
        }
        if t.points.iter().enumerate().any(|(i, p)| p.step_index as usize != i) {
            return Err(Error::InvalidInput(format!(
                "track {} has non-consecutive step indices",
                t.storm_id
            )));
        }
        if t.points.iter().any(|p| !(p.wind_u10 >= 0.0)) {
            return Err(Error::InvalidInput(format!(
                "track {} has a negative or missing wind",
                t.storm_id
            )));
        }
    }
    tracks.sort_by(|a, b| a.storm_id.cmp(&b.storm_id));
    let modern = tracks.iter().map(|t| config.is_modern(t.genesis_year)).collect();
    Ok(assemble(
        config.clone(),
        tracks,
        modern,
        None,
        pair_radius_deg,
        floors,
    ))
}

fn assemble(
    config: BasinConfig,
    tracks: Vec<HistoricalTrack>,
    modern: Vec<bool>,
    stored: Option<(Normalizers, [NormalizerSource; 3])>,
    pair_radius_deg: f64,
    floors: NormalizerFloors,
) -> SegmentLibrary {
    let motion: Vec<Vec<MotionVector>> = tracks
        .par_iter()
        .map(|t| track_motion_vectors(&t.points))
        .collect();
    let refs = all_refs(&tracks);
    let index = SpatialIndex::build(
        refs.iter().map(|&r| (r, point_at(&tracks, r))),
        pair_radius_deg,
    );
    let (normalizers, normalizer_sources) = match stored {
        Some(s) => s,
        None => compute_normalizers(&tracks, &motion, &index, &refs, pair_radius_deg, floors),
    };
    let mut lib = SegmentLibrary {
        config,
        tracks,
        modern,
        normalizers,
        normalizer_sources,
        pair_radius_deg,
        motion,
        index,
        checksum: [0; 32],
    };
    let mut hasher = HashWriter::default();
    lib.write_body(&mut hasher)
        .expect("hashing into memory cannot fail");
    lib.checksum = hasher.finish();
    lib
}

fn compute_normalizers(
    tracks: &[HistoricalTrack],
    motion: &[Vec<MotionVector>],
    index: &SpatialIndex,
    refs: &[PointRef],
    radius: f64,
    floors: NormalizerFloors,
) -> (Normalizers, [NormalizerSource; 3]) {
    let within = refs
        .par_iter()
        .map(|&a| {
            let mut m = PairMax::default();
            for (b, _) in index.within(point_at(tracks, a), radius) {
                if b == a {
                    continue;
                }
                let (v, t, dw) = pair_terms(tracks, motion, a, b);
                m = m.merge(PairMax { v, t, dw, any: true });
            }
            m
        })
        .reduce(PairMax::default, PairMax::merge);

    let need_global = !within.any || within.v <= 0.0 || within.t <= 0.0 || within.dw <= 0.0;
    let global = if need_global {
        refs.par_iter()
            .enumerate()
            .map(|(i, &a)| {
                let mut m = PairMax::default();
                for &b in &refs[i + 1..] {
                    let (v, t, dw) = pair_terms(tracks, motion, a, b);
                    m = m.merge(PairMax { v, t, dw, any: true });
                }
                m
            })
            .reduce(PairMax::default, PairMax::merge)
    } else {
        PairMax::default()
    };

    let pick = |w: f64, g: f64, floor: f64| {
        if within.any && w > 0.0 {
            (w, NormalizerSource::RadiusPairs)
        } else if g > 0.0 {
            (g, NormalizerSource::AllPairs)
        } else {
            (floor, NormalizerSource::Floor)
        }
    };
    let (max_v, sv) = pick(within.v, global.v, floors.max_v);
    let (max_t, st) = pick(within.t, global.t, floors.max_t);
    let (max_dw, sdw) = pick(within.dw, global.dw, floors.max_dw);
    (
        Normalizers {
            max_v,
            max_t,
            max_dw,
        },
        [sv, st, sdw],
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenesisEvent {
    pub lat: f64,
    pub lon: f64,
    pub day_of_year: u32,
    pub minute_of_day: u32,
    pub track: u32,
}

/// Modern-era empirical distributions that drive catalog sampling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalDistributions {
    pub genesis: Vec<GenesisEvent>,
    /// Track lifetimes in 3-hour steps.
    pub lifetimes: Vec<u32>,
    /// Storm counts for every year of the modern window, zero years included.
    pub annual_counts: Vec<u32>,
    pub first_year: i32,
}

impl EmpiricalDistributions {
    pub fn genesis_days(&self) -> Vec<u32> {
        self.genesis.iter().map(|g| g.day_of_year).collect()
    }

    pub fn mean_annual_count(&self) -> f64 {
        self.annual_counts.iter().map(|&c| c as f64).sum::<f64>() / self.annual_counts.len() as f64
    }

    /// Standard error of the mean annual count.
    pub fn annual_count_standard_error(&self) -> f64 {
        let n = self.annual_counts.len() as f64;
        let m = self.mean_annual_count();
        let var = self
            .annual_counts
            .iter()
            .map(|&c| (c as f64 - m).powi(2))
            .sum::<f64>()
            / (n - 1.0).max(1.0);
        (var / n).sqrt()
    }
}

impl SegmentLibrary {
    pub fn config(&self) -> &BasinConfig {
        &self.config
    }

    pub fn tracks(&self) -> &[HistoricalTrack] {
        &self.tracks
    }

    pub fn track(&self, i: u32) -> &HistoricalTrack {
        &self.tracks[i as usize]
    }

    pub fn point(&self, r: PointRef) -> &TrackPoint {
        &self.tracks[r.track as usize].points[r.step as usize]
    }

    pub fn position(&self, r: PointRef) -> LatLon {
        point_at(&self.tracks, r)
    }

    pub fn motion(&self, r: PointRef) -> MotionVector {
        self.motion[r.track as usize][r.step as usize]
    }

    pub fn is_modern(&self, track: u32) -> bool {
        self.modern[track as usize]
    }

    pub fn modern_flags(&self) -> &[bool] {
        &self.modern
    }

    pub fn modern_tracks(&self) -> impl Iterator<Item = &HistoricalTrack> {
        self.tracks
            .iter()
            .zip(&self.modern)
            .filter_map(|(t, &m)| m.then_some(t))
    }

    pub fn normalizers(&self) -> Normalizers {
        self.normalizers
    }

    pub fn normalizer_sources(&self) -> [NormalizerSource; 3] {
        self.normalizer_sources
    }

    pub fn pair_radius_deg(&self) -> f64 {
        self.pair_radius_deg
    }

    pub fn index(&self) -> &SpatialIndex {
        &self.index
    }

    pub fn n_points(&self) -> usize {
        self.tracks.iter().map(|t| t.points.len()).sum()
    }

    pub fn max_wind(&self) -> f64 {
        self.tracks
            .iter()
            .flat_map(|t| t.points.iter().map(|p| p.wind_u10))
            .fold(0.0, f64::max)
    }

    pub fn mean_track_steps(&self) -> f64 {
        self.tracks.iter().map(|t| t.lifetime_steps() as f64).sum::<f64>() / self.tracks.len() as f64
    }

    /// Default number of terminal steps held back on every track:
    /// `max(3, round(0.05 * mean track length in steps))`.
    pub fn default_reserved_steps(&self) -> usize {
        ((0.05 * self.mean_track_steps()).round() as usize).max(3)
    }

    /// A point may start or receive a transition only if `reserved` more
    /// steps of its track follow it.
    pub fn is_eligible(&self, r: PointRef, reserved: usize) -> bool {
        (r.step as usize) + reserved < self.tracks[r.track as usize].points.len()
    }

    pub fn checksum(&self) -> [u8; 32] {
        self.checksum
    }

    pub fn checksum_hex(&self) -> String {
        hex::encode(self.checksum)
    }

    /// Genesis, lifetime and annual-count samples from the modern window.
    pub fn empirical_distributions(&self) -> Result<EmpiricalDistributions> {
        let first_year = self.config.modern_start_year();
        let n_years = self.config.modern_years() as usize;
        let mut annual_counts = vec![0u32; n_years];
        let mut genesis = Vec::new();
        let mut lifetimes = Vec::new();
        for (i, t) in self.tracks.iter().enumerate() {
            if !self.modern[i] {
                continue;
            }
            let p0 = &t.points[0];
            genesis.push(GenesisEvent {
                lat: p0.lat,
                lon: p0.lon,
                day_of_year: t.genesis_day_of_year,
                minute_of_day: t.genesis_minute_of_day,
                track: i as u32,
            });
            lifetimes.push(t.lifetime_steps());
            annual_counts[(t.genesis_year - first_year) as usize] += 1;
        }
        if genesis.is_empty() {
            return Err(Error::Empty(format!(
                "no modern-era tracks in {} ({}..={})",
                self.config.basin, first_year, self.config.record_end_year
            )));
        }
        Ok(EmpiricalDistributions {
            genesis,
            lifetimes,
            annual_counts,
            first_year,
        })
    }

    /// Per-year storm counts over the modern window, keyed by year.
    pub fn modern_counts_by_year(&self) -> BTreeMap<i32, u32> {
        let mut m: BTreeMap<i32, u32> = (self.config.modern_start_year()..=self.config.record_end_year)
            .map(|y| (y, 0))
            .collect();
        for t in self.modern_tracks() {
            *m.entry(t.genesis_year).or_default() += 1;
        }
        m
    }

    fn write_body<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        let cfg = serde_json::to_string(&self.config).map_err(std::io::Error::other)?;
        write_str(w, &cfg)?;
        w.write_f64::<LE>(self.pair_radius_deg)?;
        w.write_f64::<LE>(self.normalizers.max_v)?;
        w.write_f64::<LE>(self.normalizers.max_t)?;
        w.write_f64::<LE>(self.normalizers.max_dw)?;
        for s in self.normalizer_sources {
            w.write_u8(s as u8)?;
        }
        w.write_u32::<LE>(self.tracks.len() as u32)?;
        for (t, &m) in self.tracks.iter().zip(&self.modern) {
            write_str(w, &t.storm_id)?;
            w.write_i32::<LE>(t.genesis_year)?;
            w.write_u32::<LE>(t.genesis_day_of_year)?;
            w.write_u32::<LE>(t.genesis_minute_of_day)?;
            w.write_u8(t.wind_filled as u8)?;
            w.write_u8(m as u8)?;
            w.write_u32::<LE>(t.points.len() as u32)?;
            for p in &t.points {
                w.write_f64::<LE>(p.lat)?;
                w.write_f64::<LE>(p.lon)?;
                w.write_f64::<LE>(p.wind_u10)?;
            }
        }
        Ok(())
    }

    /// Write the library as a tagged binary file. The write is atomic: a
    /// failure leaves no partial file behind.
    pub fn save(&self, path: &Path) -> Result<()> {
        atomic_write(path, |f| {
            let mut w = BufWriter::new(f);
            w.write_all(LIBRARY_MAGIC)?;
            w.write_u32::<LE>(LIBRARY_SCHEMA_VERSION)?;
            self.write_body(&mut w)?;
            w.write_all(&self.checksum)?;
            w.flush()
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut bytes = Vec::new();
        File::open(path)
            .and_then(|mut f| f.read_to_end(&mut bytes))
            .map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let trunc = |_| Error::Schema("library file is truncated".into());
        if bytes.len() < LIBRARY_MAGIC.len() + 4 + 32 || &bytes[..8] != LIBRARY_MAGIC {
            return Err(Error::Schema("not a segment library file".into()));
        }
        let mut cur = &bytes[8..];
        let version = cur.read_u32::<LE>().map_err(trunc)?;
        if version != LIBRARY_SCHEMA_VERSION {
            return Err(Error::Schema(format!(
                "library schema version {version}, expected {LIBRARY_SCHEMA_VERSION}"
            )));
        }
        let body = &cur[..cur.len() - 32];
        let stored: [u8; 32] = cur[cur.len() - 32..].try_into().unwrap();
        let actual: [u8; 32] = Sha256::digest(body).into();
        if actual != stored {
            return Err(Error::ChecksumMismatch {
                expected: hex::encode(stored),
                found: hex::encode(actual),
            });
        }
        let mut r = body;
        let cfg: BasinConfig = serde_json::from_str(&read_str(&mut r).map_err(trunc)?)
            .map_err(|e| Error::Schema(format!("library config: {e}")))?;
        let pair_radius = r.read_f64::<LE>().map_err(trunc)?;
        let normalizers = Normalizers {
            max_v: r.read_f64::<LE>().map_err(trunc)?,
            max_t: r.read_f64::<LE>().map_err(trunc)?,
            max_dw: r.read_f64::<LE>().map_err(trunc)?,
        };
        let mut sources = [NormalizerSource::Floor; 3];
        for s in &mut sources {
            *s = match r.read_u8().map_err(trunc)? {
                0 => NormalizerSource::RadiusPairs,
                1 => NormalizerSource::AllPairs,
                2 => NormalizerSource::Floor,
                x => return Err(Error::Schema(format!("bad normalizer source tag {x}"))),
            };
        }
        let n = r.read_u32::<LE>().map_err(trunc)? as usize;
        let mut tracks = Vec::with_capacity(n);
        let mut modern = Vec::with_capacity(n);
        for _ in 0..n {
            let storm_id = read_str(&mut r).map_err(trunc)?;
            let genesis_year = r.read_i32::<LE>().map_err(trunc)?;
            let genesis_day_of_year = r.read_u32::<LE>().map_err(trunc)?;
            let genesis_minute_of_day = r.read_u32::<LE>().map_err(trunc)?;
            let wind_filled = r.read_u8().map_err(trunc)? != 0;
            modern.push(r.read_u8().map_err(trunc)? != 0);
            let np = r.read_u32::<LE>().map_err(trunc)? as usize;
            let mut points = Vec::with_capacity(np);
            for s in 0..np {
                points.push(TrackPoint {
                    step_index: s as u32,
                    lat: r.read_f64::<LE>().map_err(trunc)?,
                    lon: r.read_f64::<LE>().map_err(trunc)?,
                    wind_u10: r.read_f64::<LE>().map_err(trunc)?,
                });
            }
            tracks.push(HistoricalTrack {
                storm_id,
                basin: cfg.basin,
                genesis_year,
                genesis_day_of_year,
                genesis_minute_of_day,
                wind_filled,
                points,
            });
        }
        if !r.is_empty() {
            return Err(Error::Schema("trailing bytes in library file".into()));
        }
        let lib = assemble(
            cfg,
            tracks,
            modern,
            Some((normalizers, sources)),
            pair_radius,
            NormalizerFloors::default(),
        );
        if lib.checksum != stored {
            return Err(Error::Invariant("library checksum changed on reload".into()));
        }
        Ok(lib)
    }
}

/// Brute-force great-circle scan, used where the index must be checked.
pub fn scan_within(lib: &SegmentLibrary, center: LatLon, radius: f64) -> Vec<PointRef> {
    all_refs(&lib.tracks)
        .into_iter()
        .filter(|&r| great_circle_deg(center, lib.position(r)) <= radius)
        .collect()
}
