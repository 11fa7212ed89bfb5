//! Multi-year catalog generation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::params::SimulationParams;
use super::walk::{simulate_track, SyntheticTrack};
use crate::error::{Error, Result};
use crate::ingest::{BasinCode, EmpiricalDistributions, GenesisEvent, SegmentLibrary};
use crate::kernel::{KernelParams, TransitionTable};

pub const GENERATOR_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Everything needed to reproduce a catalog.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogHeader {
    pub generator_version: String,
    pub basin: BasinCode,
    pub n_years: u32,
    pub params: SimulationParams,
    pub kernel: KernelParams,
    pub reserved_steps: usize,
    pub library_checksum: String,
    pub table_checksum: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCatalog {
    pub header: CatalogHeader,
    /// Ordered by year, then storm index. Years run from 1 to `n_years`.
    pub tracks: Vec<SyntheticTrack>,
}

impl SyntheticCatalog {
    pub fn n_years(&self) -> u32 {
        self.header.n_years
    }

    pub fn annual_counts(&self) -> Vec<u32> {
        let mut c = vec![0u32; self.header.n_years as usize];
        for t in &self.tracks {
            c[t.year as usize - 1] += 1;
        }
        c
    }
}

/// Random stream for one simulated year. Streams for different years are
/// independent, so years can be generated in any order.
pub fn year_rng(seed: u64, year: u32) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(year as u64);
    rng
}

pub fn sample_annual_count<R: Rng + ?Sized>(counts: &[u32], rng: &mut R) -> u32 {
    counts[rng.random_range(0..counts.len())]
}

/// Draw a historical genesis event; the position and the day of year come
/// from the same storm.
pub fn sample_genesis<R: Rng + ?Sized>(genesis: &[GenesisEvent], rng: &mut R) -> GenesisEvent {
    genesis[rng.random_range(0..genesis.len())]
}

pub fn sample_lifetime<R: Rng + ?Sized>(lifetimes: &[u32], rng: &mut R) -> u32 {
    lifetimes[rng.random_range(0..lifetimes.len())]
}

fn simulate_year(
    year: u32,
    dists: &EmpiricalDistributions,
    lib: &SegmentLibrary,
    table: &TransitionTable,
    params: &SimulationParams,
) -> Result<Vec<SyntheticTrack>> {
    let mut rng = year_rng(params.seed, year);
    let n = sample_annual_count(&dists.annual_counts, &mut rng);
    let mut out = Vec::with_capacity(n as usize);
    for s in 0..n {
        let g = sample_genesis(&dists.genesis, &mut rng);
        let life = sample_lifetime(&dists.lifetimes, &mut rng);
        let mut t = simulate_track(&g, life, lib, table, params, &mut rng)?;
        t.year = year;
        t.storm_index = s;
        out.push(t);
    }
    Ok(out)
}

/// Generate `params.n_years` years of synthetic tracks.
///
/// Years run in parallel on the current rayon pool; each uses its own
/// random stream, so output is identical for any thread count.
pub fn generate_catalog(
    lib: &SegmentLibrary,
    table: &TransitionTable,
    params: &SimulationParams,
) -> Result<SyntheticCatalog> {
    params.validate()?;
    params.check_reserved(table.reserved_steps())?;
    if table.header().library_checksum != lib.checksum() {
        return Err(Error::ChecksumMismatch {
            expected: lib.checksum_hex(),
            found: hex::encode(table.header().library_checksum),
        });
    }
    let header = CatalogHeader {
        generator_version: GENERATOR_VERSION.to_string(),
        basin: lib.config().basin,
        n_years: params.n_years,
        params: *params,
        kernel: *table.params(),
        reserved_steps: table.reserved_steps(),
        library_checksum: lib.checksum_hex(),
        table_checksum: table.checksum_hex(),
    };
    if params.n_years == 0 {
        return Ok(SyntheticCatalog {
            header,
            tracks: Vec::new(),
        });
    }
    let dists = lib.empirical_distributions()?;
    let years: Vec<Vec<SyntheticTrack>> = (1..=params.n_years)
        .into_par_iter()
        .map(|y| simulate_year(y, &dists, lib, table, params))
        .collect::<Result<_>>()?;
    let tracks: Vec<SyntheticTrack> = years.into_iter().flatten().collect();
    let terminated = tracks.iter().filter(|t| t.early_terminated).count();
    if terminated > 0 {
        log::warn!("{terminated} of {} synthetic tracks ended before their sampled lifetime", tracks.len());
    }
    Ok(SyntheticCatalog { header, tracks })
}
