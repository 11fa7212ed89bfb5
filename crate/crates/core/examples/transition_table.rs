//! Precompute the transition table for the North Indian library, save it
//! and load it back with the checksum check.

use std::path::Path;
use std::time::Instant;

use tracksim::ingest::{build_library, interpolate_all, parse_archive_path, NormalizerFloors};
use tracksim::kernel::{load_table, precompute_table};
use tracksim::pipeline::RunConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let cfg = RunConfig::from_toml_file(&data.join("ni_wmo.toml"))?;
    let bc = cfg.basin_config();
    let parsed = parse_archive_path(cfg.paths.archive.as_ref().unwrap(), &bc)?;
    let tracks = interpolate_all(&parsed, bc.wind_convention).tracks;
    let lib = build_library(tracks, &bc, cfg.kernel.radius_deg, NormalizerFloors::default())?;

    let reserved = lib.default_reserved_steps();
    let t = Instant::now();
    let table = precompute_table(&lib, &cfg.kernel, reserved)?;
    println!(
        "{} points, {} candidates, {} reserved steps, built in {:.2?}",
        table.n_points(),
        table.n_candidates(),
        reserved,
        t.elapsed()
    );

    let empty = table.rows().filter(|(_, r)| r.is_empty()).count();
    let widest = table.rows().map(|(_, r)| r.len()).max().unwrap_or(0);
    println!("{empty} points have no candidate; the widest row has {widest}");

    let dir = tempfile::tempdir()?;
    let path = dir.path().join("table.tstab");
    table.save(&path)?;
    let back = load_table(&path, &lib)?;
    assert_eq!(back.checksum_hex(), table.checksum_hex());
    println!("saved and reloaded, checksum {}", table.checksum_hex());
    Ok(())
}
