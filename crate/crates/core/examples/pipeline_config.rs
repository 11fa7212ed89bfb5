//! The whole file-based pipeline driven by a `RunConfig`, as the CLI runs it.

use std::path::Path;

use tracksim::pipeline::{cmd_compare, cmd_ingest, cmd_simulate, cmd_train, cmd_validate, RunConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let mut cfg = RunConfig::from_toml_file(&data.join("ni_wmo.toml"))?;
    let dir = tempfile::tempdir()?;
    cfg.paths.output_dir = Some(dir.path().to_path_buf());
    cfg.simulation.n_years = 200;
    cfg.diagnostics.n_draws = 30;

    let s = cmd_ingest(&cfg)?;
    println!("ingest: {} tracks, {} rejected rows", s.tracks, s.rejects);
    let s = cmd_train(&cfg)?;
    println!("train: {} candidates, table {}", s.candidates, &s.table_checksum[..12]);
    let s = cmd_simulate(&cfg)?;
    println!("simulate: {s:?}");
    let v = cmd_validate(&cfg, false, None)?;
    for c in &v.comparisons {
        print!("validate {:?}:\n{}", c.metric, c.summary.to_text());
    }

    let cat = cfg.catalog_path();
    let c = cmd_compare(&cfg, &cat, &cat, None, None)?;
    println!("self-compare: {}", serde_json::to_string(&c.comparisons[0].summary).unwrap());

    let mut files: Vec<_> = walk(dir.path());
    files.sort();
    println!("outputs:");
    for f in files {
        println!("  {}", f.strip_prefix(dir.path()).unwrap().display());
    }
    Ok(())
}

fn walk(dir: &Path) -> Vec<std::path::PathBuf> {
    let mut out = Vec::new();
    for e in std::fs::read_dir(dir).unwrap().flatten() {
        let p = e.path();
        if p.is_dir() {
            out.extend(walk(&p));
        } else {
            out.push(p);
        }
    }
    out
}
