//! Generate a synthetic North Indian catalog and write it with provenance.
//!
//! `cargo run --release --example simulate_catalog -- 1000` simulates 1000
//! years; the default is 200.

use std::path::Path;
use std::time::Instant;

use tracksim::ingest::{build_library, interpolate_all, parse_archive_path, NormalizerFloors};
use tracksim::kernel::precompute_table;
use tracksim::pipeline::RunConfig;
use tracksim::simulate::{generate_catalog, io, SimulationParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let years: u32 = std::env::args().nth(1).map_or(200, |a| a.parse().expect("year count"));
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let cfg = RunConfig::from_toml_file(&data.join("ni_wmo.toml"))?;
    let bc = cfg.basin_config();
    let parsed = parse_archive_path(cfg.paths.archive.as_ref().unwrap(), &bc)?;
    let tracks = interpolate_all(&parsed, bc.wind_convention).tracks;
    let lib = build_library(tracks, &bc, cfg.kernel.radius_deg, NormalizerFloors::default())?;
    let table = precompute_table(&lib, &cfg.kernel, lib.default_reserved_steps())?;

    let params = SimulationParams {
        n_years: years,
        seed: 7,
        ..Default::default()
    };
    let t = Instant::now();
    let cat = generate_catalog(&lib, &table, &params)?;
    let counts = cat.annual_counts();
    let joins: usize = cat.tracks.iter().map(|t| t.joins().len()).sum();
    let early = cat.tracks.iter().filter(|t| t.early_terminated).count();
    println!(
        "{} tracks over {years} years in {:.2?}; {:.2} storms/yr (observed {:.2})",
        cat.tracks.len(),
        t.elapsed(),
        counts.iter().sum::<u32>() as f64 / years as f64,
        lib.empirical_distributions()?.mean_annual_count()
    );
    println!("{joins} joins, {early} tracks ended early");

    let first = &cat.tracks[0];
    println!("first track: {} points built from {} pieces", first.points.len(), first.pieces.len());
    for p in &first.pieces {
        println!(
            "  from index {:3}: {} steps {}..{} offset ({:+.2}, {:+.2}){}",
            p.start_index,
            p.storm_id,
            p.start_step,
            p.end_step,
            p.offset_lat,
            p.offset_lon,
            if p.forced { " forced" } else { "" }
        );
    }

    let dir = tempfile::tempdir()?;
    let csv = dir.path().join("catalog.csv");
    io::write_catalog(&cat, &csv, true)?;
    let (set, basis) = io::read_catalog(&csv, None)?;
    println!("wrote and reread {} points ({:?} year basis)", set.n_points(), basis);
    Ok(())
}
