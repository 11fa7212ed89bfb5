//! Observed track density and P64 for the North Indian basin, plus the
//! median fields of a synthetic catalog, exported as sparse CSV.

use std::path::Path;

use tracksim::diagnostics::{export_field, field_compare, import_field, median_field, metric_field, GridSpec, Metric, TrackSet};
use tracksim::ingest::{build_library, interpolate_all, parse_archive_path, NormalizerFloors};
use tracksim::kernel::precompute_table;
use tracksim::pipeline::RunConfig;
use tracksim::simulate::{generate_catalog, SimulationParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let cfg = RunConfig::from_toml_file(&data.join("ni_wmo.toml"))?;
    let bc = cfg.basin_config();
    let parsed = parse_archive_path(cfg.paths.archive.as_ref().unwrap(), &bc)?;
    let tracks = interpolate_all(&parsed, bc.wind_convention).tracks;
    let lib = build_library(tracks, &bc, cfg.kernel.radius_deg, NormalizerFloors::default())?;
    let table = precompute_table(&lib, &cfg.kernel, lib.default_reserved_steps())?;
    let cat = generate_catalog(&lib, &table, &SimulationParams { n_years: 300, ..Default::default() })?;

    let grid = GridSpec::for_basin(bc.basin);
    let observed = TrackSet::observed(&lib);
    let synthetic = TrackSet::from_catalog(&cat);
    let n_b = observed.n_years;
    println!("grid {} x {} cells of {} deg; {n_b} observed years", grid.n_lat(), grid.n_lon(), grid.cell_deg);

    let dir = tempfile::tempdir()?;
    for metric in [Metric::TrackDensity, Metric::P64] {
        let obs = metric_field(&observed, &grid, metric)?;
        let sim = median_field(&synthetic, &grid, n_b, 50, metric, 2024)?;
        let cmp = field_compare(&obs, &sim)?;
        println!(
            "{metric:?}: observed mean {:.4}, synthetic median mean {:.4}, log r {:.3}, bias {:.3}",
            obs.mean(),
            sim.mean(),
            cmp.log_correlation.unwrap_or(f64::NAN),
            cmp.bias_ratio.unwrap_or(f64::NAN)
        );
        let csv = dir.path().join(format!("{metric:?}.csv"));
        export_field(&obs, &csv)?;
        assert_eq!(import_field(&csv)?, obs);
    }
    println!("fields round-trip through sparse CSV exactly");
    Ok(())
}
