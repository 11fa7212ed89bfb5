#![allow(dead_code)]

use std::path::{Path, PathBuf};

use tracksim::ingest::{build_library, interpolate_all, parse_archive_path, NormalizerFloors, SegmentLibrary};
use tracksim::pipeline::RunConfig;

pub fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data")
}

/// The bundled North Indian run config, writing into `out`.
pub fn ni_config(out: &Path) -> RunConfig {
    let mut cfg = RunConfig::from_toml_file(&data_dir().join("ni_wmo.toml")).unwrap();
    cfg.paths.output_dir = Some(out.to_path_buf());
    cfg
}

pub fn ni_library() -> SegmentLibrary {
    let cfg = ni_config(Path::new("."));
    let bc = cfg.basin_config();
    let parsed = parse_archive_path(cfg.paths.archive.as_ref().unwrap(), &bc).unwrap();
    let tracks = interpolate_all(&parsed, bc.wind_convention).tracks;
    build_library(tracks, &bc, cfg.kernel.radius_deg, NormalizerFloors::default()).unwrap()
}
