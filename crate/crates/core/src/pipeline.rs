//! File-level commands: `ingest`, `train`, `simulate`, `validate`, `compare`.
//!
//! Every command takes a resolved [`RunConfig`], writes its outputs
//! atomically under the output directory together with a snapshot of the
//! config it ran with, and returns a small summary.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::diagnostics::{
    export_field, field_compare, import_field, median_field, metric_field, FieldComparison, GridField,
    GridSpec, Metric, TrackSet,
};
use crate::error::{Error, Result};
use crate::ingest::{
    build_library, interpolate_all, parse_archive_path, write_rejects, BasinCode, BasinConfig, ColumnMap,
    NormalizerFloors, SegmentLibrary, WindConvention,
};
use crate::io_util::atomic_write;
use crate::kernel::{load_table, precompute_table, KernelParams};
use crate::simulate::{generate_catalog, io as catalog_io, SimulationParams};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "TRACKSIM_OUT_DIR";

/// Overrides of the built-in record window for the selected basin.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WindowOverrides {
    pub record_start_year: Option<i32>,
    pub modern_cutoff_year: Option<i32>,
    pub record_end_year: Option<i32>,
    pub wind_convention: Option<WindConvention>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnPreset {
    /// IBTrACS v04 list CSV (`SID`, `ISO_TIME`, `WMO_WIND`, units row).
    #[default]
    Ibtracs,
    /// `track_id,season,basin,time,lon,lat,wind`, no units row.
    Lowercase,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub archive: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
    /// Defaults to `<output_dir>/library.tslib`.
    pub library: Option<PathBuf>,
    /// Defaults to `<output_dir>/table.tstab`.
    pub table: Option<PathBuf>,
    /// Defaults to `<output_dir>/catalog.csv`.
    pub catalog: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagnosticsProtocol {
    /// Years per draw; defaults to the length of the modern window.
    pub n_b: Option<u32>,
    pub n_draws: u32,
    pub seed: u64,
}

impl Default for DiagnosticsProtocol {
    fn default() -> Self {
        Self {
            n_b: None,
            n_draws: 100,
            seed: 2024,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub basin: BasinCode,
    #[serde(default)]
    pub columns: ColumnPreset,
    #[serde(default)]
    pub window: WindowOverrides,
    #[serde(default)]
    pub paths: Paths,
    #[serde(default)]
    pub kernel: KernelParams,
    #[serde(default)]
    pub simulation: SimulationParams,
    /// Defaults to the basin's 2-degree panel.
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub diagnostics: DiagnosticsProtocol,
    /// Write per-track segment provenance next to the catalog.
    #[serde(default)]
    pub provenance: bool,
}

impl RunConfig {
    pub fn new(basin: BasinCode) -> Self {
        Self {
            basin,
            columns: ColumnPreset::default(),
            window: WindowOverrides::default(),
            paths: Paths::default(),
            kernel: KernelParams::default(),
            simulation: SimulationParams::default(),
            grid: None,
            diagnostics: DiagnosticsProtocol::default(),
            provenance: false,
        }
    }

    /// Parse a TOML config; relative paths are taken relative to the
    /// directory holding the file.
    pub fn from_toml_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: RunConfig =
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let fix = |p: &mut Option<PathBuf>| {
            if let Some(x) = p {
                if x.is_relative() {
                    *x = base.join(&*x);
                }
            }
        };
        fix(&mut cfg.paths.archive);
        fix(&mut cfg.paths.output_dir);
        fix(&mut cfg.paths.library);
        fix(&mut cfg.paths.table);
        fix(&mut cfg.paths.catalog);
        Ok(cfg)
    }

    pub fn basin_config(&self) -> BasinConfig {
        let mut b = BasinConfig::for_basin(self.basin);
        let w = &self.window;
        if let Some(v) = w.record_start_year {
            b.record_start_year = v;
        }
        if let Some(v) = w.modern_cutoff_year {
            b.modern_cutoff_year = v;
        }
        if let Some(v) = w.record_end_year {
            b.record_end_year = v;
        }
        if let Some(v) = w.wind_convention {
            b.wind_convention = v;
        }
        b.columns = match self.columns {
            ColumnPreset::Ibtracs => ColumnMap::default(),
            ColumnPreset::Lowercase => ColumnMap::lowercase(),
        };
        b
    }

    pub fn grid(&self) -> GridSpec {
        self.grid.unwrap_or_else(|| GridSpec::for_basin(self.basin))
    }

    /// Output directory: the config value, then `$TRACKSIM_OUT_DIR`, then `out`.
    pub fn output_dir(&self) -> PathBuf {
        self.paths
            .output_dir
            .clone()
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("out"))
    }

    pub fn library_path(&self) -> PathBuf {
        self.paths.library.clone().unwrap_or_else(|| self.output_dir().join("library.tslib"))
    }

    pub fn table_path(&self) -> PathBuf {
        self.paths.table.clone().unwrap_or_else(|| self.output_dir().join("table.tstab"))
    }

    pub fn catalog_path(&self) -> PathBuf {
        self.paths.catalog.clone().unwrap_or_else(|| self.output_dir().join("catalog.csv"))
    }

    pub fn validate(&self) -> Result<()> {
        self.basin_config().validate()?;
        self.kernel.validate()?;
        self.simulation.validate()?;
        self.grid().validate()?;
        if self.diagnostics.n_draws == 0 {
            return Err(Error::Config("diagnostics.n_draws must be at least 1".into()));
        }
        if self.diagnostics.n_b == Some(0) {
            return Err(Error::Config("diagnostics.n_b must be positive".into()));
        }
        Ok(())
    }

    /// Years per draw for the median-field protocol.
    pub fn n_b(&self) -> u32 {
        self.diagnostics.n_b.unwrap_or_else(|| self.basin_config().modern_years())
    }

    fn snapshot(&self, command: &str) -> Result<()> {
        let dir = self.output_dir();
        ensure_dir(&dir)?;
        let text = toml::to_string_pretty(self).map_err(|e| Error::Invariant(format!("config snapshot: {e}")))?;
        atomic_write(&dir.join(format!("{command}.config.toml")), |f| {
            use std::io::Write;
            f.write_all(text.as_bytes())
        })
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn require_file(path: &Path, what: &str) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{what} {} does not exist", path.display())))
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Invariant(e.to_string()))?;
    atomic_write(path, |f| {
        use std::io::Write;
        f.write_all(text.as_bytes())?;
        f.write_all(b"\n")
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestSummary {
    pub basin: BasinCode,
    pub rows: usize,
    pub rejects: usize,
    pub storms: usize,
    pub dropped: usize,
    pub tracks: usize,
    pub modern_tracks: usize,
    pub points: usize,
    pub library: PathBuf,
    pub library_checksum: String,
}

/// Parse, interpolate and store the segment library. Rejected rows go to
/// `rejects.csv` in the output directory; they are not fatal.
pub fn cmd_ingest(cfg: &RunConfig) -> Result<IngestSummary> {
    cfg.validate()?;
    let archive = cfg
        .paths
        .archive
        .as_deref()
        .ok_or_else(|| Error::Config("no archive path given".into()))?;
    require_file(archive, "archive")?;
    let bc = cfg.basin_config();
    let parsed = parse_archive_path(archive, &bc)?;
    let storms = parsed.storms().len();
    let interp = interpolate_all(&parsed, bc.wind_convention);
    let lib = build_library(interp.tracks, &bc, cfg.kernel.radius_deg, NormalizerFloors::default())?;
    let out = cfg.output_dir();
    ensure_dir(&out)?;
    atomic_write(&out.join("rejects.csv"), |f| {
        write_rejects(&parsed.rejects, f).map_err(std::io::Error::other)
    })?;
    let lib_path = cfg.library_path();
    lib.save(&lib_path)?;
    cfg.snapshot("ingest")?;
    Ok(IngestSummary {
        basin: bc.basin,
        rows: parsed.rows.len(),
        rejects: parsed.rejects.len(),
        storms,
        dropped: interp.dropped.len(),
        tracks: lib.tracks().len(),
        modern_tracks: lib.modern_tracks().count(),
        points: lib.n_points(),
        library: lib_path,
        library_checksum: lib.checksum_hex(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSummary {
    pub points: usize,
    pub candidates: usize,
    pub reserved_steps: usize,
    pub table: PathBuf,
    pub table_checksum: String,
}

pub fn load_library(cfg: &RunConfig) -> Result<SegmentLibrary> {
    let p = cfg.library_path();
    require_file(&p, "library")?;
    let lib = SegmentLibrary::load(&p)?;
    if lib.config().basin != cfg.basin {
        return Err(Error::Config(format!(
            "library {} is for basin {}, config selects {}",
            p.display(),
            lib.config().basin,
            cfg.basin
        )));
    }
    Ok(lib)
}

/// Reserved terminal steps: the configured value or the library default,
/// raised to cover half the smoothing window.
pub fn reserved_steps(cfg: &RunConfig, lib: &SegmentLibrary) -> Result<usize> {
    let r = match cfg.simulation.reserved_steps {
        Some(r) => r,
        None => lib.default_reserved_steps().max(cfg.simulation.smoothing_window.div_ceil(2)),
    };
    cfg.simulation.check_reserved(r)?;
    Ok(r)
}

/// Precompute the transition table for the stored library.
pub fn cmd_train(cfg: &RunConfig) -> Result<TrainSummary> {
    cfg.validate()?;
    let lib = load_library(cfg)?;
    let reserved = reserved_steps(cfg, &lib)?;
    let table = precompute_table(&lib, &cfg.kernel, reserved)?;
    let path = cfg.table_path();
    if let Some(dir) = path.parent() {
        ensure_dir(dir)?;
    }
    table.save(&path)?;
    cfg.snapshot("train")?;
    Ok(TrainSummary {
        points: table.n_points(),
        candidates: table.n_candidates(),
        reserved_steps: reserved,
        table: path,
        table_checksum: table.checksum_hex(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateSummary {
    pub years: u32,
    pub tracks: usize,
    pub points: usize,
    pub joins: usize,
    pub early_terminated: usize,
    pub catalog: PathBuf,
}

/// Generate a catalog from the stored library and table.
pub fn cmd_simulate(cfg: &RunConfig) -> Result<SimulateSummary> {
    cfg.validate()?;
    let lib = load_library(cfg)?;
    let tp = cfg.table_path();
    require_file(&tp, "transition table")?;
    let table = load_table(&tp, &lib)?;
    if *table.params() != cfg.kernel {
        log::warn!("transition table was built with kernel {:?}; config has {:?}", table.params(), cfg.kernel);
    }
    let mut params = cfg.simulation;
    params.reserved_steps = Some(table.reserved_steps());
    let cat = generate_catalog(&lib, &table, &params)?;
    let path = cfg.catalog_path();
    if let Some(dir) = path.parent() {
        ensure_dir(dir)?;
    }
    catalog_io::write_catalog(&cat, &path, cfg.provenance)?;
    cfg.snapshot("simulate")?;
    Ok(SimulateSummary {
        years: cat.n_years(),
        tracks: cat.tracks.len(),
        points: cat.tracks.iter().map(|t| t.points.len()).sum(),
        joins: cat.tracks.iter().map(|t| t.pieces.len() - 1).sum(),
        early_terminated: cat.tracks.iter().filter(|t| t.early_terminated).count(),
        catalog: path,
    })
}

/// Comparison of one metric between two fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricComparison {
    pub metric: Metric,
    pub a: String,
    pub b: String,
    pub summary: FieldComparison,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidateSummary {
    pub n_b: u32,
    pub observed_years: u32,
    pub simulated_years: Option<u32>,
    pub fields: Vec<PathBuf>,
    pub comparisons: Vec<MetricComparison>,
}

fn comparisons_text(cs: &[MetricComparison]) -> String {
    let mut s = String::new();
    for c in cs {
        let tag = match c.metric {
            Metric::TrackDensity => "track_density",
            Metric::P64 => "p64",
        };
        s.push_str(&format!("[{tag}] a={} b={}\n", c.a, c.b));
        s.push_str(&c.summary.to_text());
    }
    s
}

/// Observed fields come from `observed_fields` when given (files written
/// by an earlier `validate`), else from the library.
fn observed_fields(
    cfg: &RunConfig,
    observed_fields: Option<&Path>,
) -> Result<(GridField, GridField)> {
    let grid = cfg.grid();
    match observed_fields {
        Some(dir) => {
            let d = import_field(&dir.join("observed_track_density.csv"))?;
            let p = import_field(&dir.join("observed_p64.csv"))?;
            for f in [&d, &p] {
                if f.grid != grid {
                    return Err(Error::GridMismatch(format!(
                        "reference field in {} uses {:?}, config grid is {:?}",
                        dir.display(),
                        f.grid,
                        grid
                    )));
                }
            }
            Ok((d, p))
        }
        None => {
            let lib = load_library(cfg)?;
            let set = TrackSet::observed(&lib);
            Ok((metric_field(&set, &grid, Metric::TrackDensity)?, metric_field(&set, &grid, Metric::P64)?))
        }
    }
}

fn catalog_fields(cfg: &RunConfig, set: &TrackSet, n_b: u32) -> Result<(GridField, GridField)> {
    let grid = cfg.grid();
    let d = &cfg.diagnostics;
    if set.n_years < n_b {
        log::warn!(
            "{} spans {} years, fewer than the {n_b}-year draw length; using the whole catalog",
            set.label,
            set.n_years
        );
        return Ok((metric_field(set, &grid, Metric::TrackDensity)?, metric_field(set, &grid, Metric::P64)?));
    }
    Ok((
        median_field(set, &grid, n_b, d.n_draws, Metric::TrackDensity, d.seed)?,
        median_field(set, &grid, n_b, d.n_draws, Metric::P64, d.seed)?,
    ))
}

/// Observed density and P64 fields, and unless `observed_only` the
/// corresponding median-of-draws fields of the configured catalog with a
/// comparison summary.
pub fn cmd_validate(cfg: &RunConfig, observed_only: bool, reference: Option<&Path>) -> Result<ValidateSummary> {
    cfg.validate()?;
    let out = cfg.output_dir().join("fields");
    ensure_dir(&out)?;
    let (od, op) = observed_fields(cfg, reference)?;
    let n_b = cfg.n_b();
    let mut fields = Vec::new();
    let mut put = |name: &str, f: &GridField| -> Result<()> {
        let p = out.join(format!("{name}.csv"));
        export_field(f, &p)?;
        fields.push(p);
        Ok(())
    };
    put("observed_track_density", &od)?;
    put("observed_p64", &op)?;
    let mut comparisons = Vec::new();
    let mut simulated_years = None;
    if !observed_only {
        let cp = cfg.catalog_path();
        require_file(&cp, "catalog")?;
        let (set, _) = catalog_io::read_catalog(&cp, None)?;
        simulated_years = Some(set.n_years);
        let (sd, sp) = catalog_fields(cfg, &set, n_b)?;
        put("simulated_track_density", &sd)?;
        put("simulated_p64", &sp)?;
        for (metric, a, b) in [(Metric::TrackDensity, &od, &sd), (Metric::P64, &op, &sp)] {
            comparisons.push(MetricComparison {
                metric,
                a: "observed".into(),
                b: "simulated".into(),
                summary: field_compare(a, b)?,
            });
        }
    }
    let summary = ValidateSummary {
        n_b,
        observed_years: od.n_years_basis,
        simulated_years,
        fields,
        comparisons,
    };
    write_json(&cfg.output_dir().join("validate_summary.json"), &summary)?;
    let text = comparisons_text(&summary.comparisons);
    atomic_write(&cfg.output_dir().join("validate_summary.txt"), |f| {
        use std::io::Write;
        f.write_all(text.as_bytes())
    })?;
    cfg.snapshot("validate")?;
    Ok(summary)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareSummary {
    pub n_b: u32,
    pub catalog_a: PathBuf,
    pub catalog_b: PathBuf,
    pub years_a: u32,
    pub years_b: u32,
    pub comparisons: Vec<MetricComparison>,
}

/// Compare two catalogs in the generic catalog format with the same
/// diagnostics, and each against the observed reference when a library is
/// available.
pub fn cmd_compare(
    cfg: &RunConfig,
    catalog_a: &Path,
    catalog_b: &Path,
    years_a: Option<u32>,
    years_b: Option<u32>,
) -> Result<CompareSummary> {
    cfg.validate()?;
    require_file(catalog_a, "catalog")?;
    require_file(catalog_b, "catalog")?;
    let (sa, _) = catalog_io::read_catalog(catalog_a, years_a)?;
    let (sb, _) = catalog_io::read_catalog(catalog_b, years_b)?;
    let n_b = cfg.n_b();
    let (years_a, years_b) = (sa.n_years, sb.n_years);
    let (ad, ap) = catalog_fields(cfg, &sa.with_label(catalog_a.display().to_string()), n_b)?;
    let (bd, bp) = catalog_fields(cfg, &sb.with_label(catalog_b.display().to_string()), n_b)?;
    let (na, nb) = (catalog_a.display().to_string(), catalog_b.display().to_string());
    let mut comparisons = vec![
        MetricComparison {
            metric: Metric::TrackDensity,
            a: na.clone(),
            b: nb.clone(),
            summary: field_compare(&ad, &bd)?,
        },
        MetricComparison {
            metric: Metric::P64,
            a: na.clone(),
            b: nb.clone(),
            summary: field_compare(&ap, &bp)?,
        },
    ];
    if cfg.library_path().is_file() {
        let (od, op) = observed_fields(cfg, None)?;
        for (name, d, p) in [(&na, &ad, &ap), (&nb, &bd, &bp)] {
            comparisons.push(MetricComparison {
                metric: Metric::TrackDensity,
                a: "observed".into(),
                b: name.clone(),
                summary: field_compare(&od, d)?,
            });
            comparisons.push(MetricComparison {
                metric: Metric::P64,
                a: "observed".into(),
                b: name.clone(),
                summary: field_compare(&op, p)?,
            });
        }
    }
    let out = cfg.output_dir();
    ensure_dir(&out)?;
    let summary = CompareSummary {
        n_b,
        catalog_a: catalog_a.to_path_buf(),
        catalog_b: catalog_b.to_path_buf(),
        years_a,
        years_b,
        comparisons,
    };
    write_json(&out.join("compare_summary.json"), &summary)?;
    let text = comparisons_text(&summary.comparisons);
    atomic_write(&out.join("compare_summary.txt"), |f| {
        use std::io::Write;
        f.write_all(text.as_bytes())
    })?;
    cfg.snapshot("compare")?;
    Ok(summary)
}
