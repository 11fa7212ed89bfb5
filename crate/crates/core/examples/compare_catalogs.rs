//! Compare two catalogs generated with different jump probabilities.

use std::path::Path;

use tracksim::diagnostics::{field_compare, median_field, GridSpec, Metric, TrackSet};
use tracksim::ingest::{build_library, interpolate_all, parse_archive_path, NormalizerFloors};
use tracksim::kernel::precompute_table;
use tracksim::pipeline::RunConfig;
use tracksim::simulate::{generate_catalog, SimulationParams};

fn main() -> tracksim::Result<()> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let cfg = RunConfig::from_toml_file(&data.join("ni_wmo.toml"))?;
    let bc = cfg.basin_config();
    let parsed = parse_archive_path(cfg.paths.archive.as_ref().unwrap(), &bc)?;
    let tracks = interpolate_all(&parsed, bc.wind_convention).tracks;
    let lib = build_library(tracks, &bc, cfg.kernel.radius_deg, NormalizerFloors::default())?;
    let table = precompute_table(&lib, &cfg.kernel, lib.default_reserved_steps())?;
    let grid = GridSpec::for_basin(bc.basin);
    let n_b = bc.modern_years();

    let base = SimulationParams { n_years: 300, ..Default::default() };
    let a = TrackSet::from_catalog(&generate_catalog(&lib, &table, &base)?);
    for jp in [0.0, 0.1, 0.3] {
        let b = TrackSet::from_catalog(&generate_catalog(&lib, &table, &SimulationParams { jump_probability: jp, seed: 99, ..base })?);
        for metric in [Metric::TrackDensity, Metric::P64] {
            let fa = median_field(&a, &grid, n_b, 30, metric, 1)?;
            let fb = median_field(&b, &grid, n_b, 30, metric, 1)?;
            let c = field_compare(&fa, &fb)?;
            println!(
                "jp {jp:.1} vs 0.1 {metric:?}: log r {:.3}, bias {:.3}, {} joint cells",
                c.log_correlation.unwrap_or(f64::NAN),
                c.bias_ratio.unwrap_or(f64::NAN),
                c.n_joint_positive
            );
        }
    }
    Ok(())
}
