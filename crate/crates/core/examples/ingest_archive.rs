//! Parse the bundled North Indian archive into a segment library.
//!
//! Run with `cargo run --example ingest_archive`.

use std::path::Path;

use tracksim::ingest::{build_library, interpolate_all, parse_archive_path, NormalizerFloors};
use tracksim::pipeline::RunConfig;

fn main() -> tracksim::Result<()> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let cfg = RunConfig::from_toml_file(&data.join("ni_wmo.toml"))?;
    let bc = cfg.basin_config();

    let parsed = parse_archive_path(cfg.paths.archive.as_ref().unwrap(), &bc)?;
    println!("{} rows kept, {} rejected", parsed.rows.len(), parsed.rejects.len());
    for r in parsed.rejects.iter().take(3) {
        println!("  line {}: {}", r.line, r.reason);
    }

    println!(
        "wind convention {:?}, scaled by {} to 10-minute winds",
        bc.wind_convention,
        bc.conversion_factor()
    );
    let interp = interpolate_all(&parsed, bc.wind_convention);
    println!("{} storms interpolated to 3-hourly, {} dropped", interp.tracks.len(), interp.dropped.len());

    let lib = build_library(interp.tracks, &bc, cfg.kernel.radius_deg, NormalizerFloors::default())?;
    let n = lib.normalizers();
    println!(
        "library: {} tracks ({} modern), {} points, max wind {:.1} kt",
        lib.tracks().len(),
        lib.modern_tracks().count(),
        lib.n_points(),
        lib.max_wind()
    );
    println!("normalizers: max_v {:.2} kt, max_t {} steps, max_dw {:.1} kt", n.max_v, n.max_t, n.max_dw);
    let d = lib.empirical_distributions()?;
    println!(
        "modern window from {}: {:.2} storms/yr over {} years",
        d.first_year,
        d.mean_annual_count(),
        d.annual_counts.len()
    );
    println!("checksum {}", lib.checksum_hex());
    Ok(())
}
