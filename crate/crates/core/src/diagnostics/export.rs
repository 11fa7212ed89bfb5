//! Field files: a sparse CSV of non-zero cells plus a JSON sidecar.
//!
//! CSV columns are `lat_cell,lon_cell,value`, where the cell coordinates are
//! its lower-left corner in the grid's longitude frame. Rows are ordered
//! row-major by latitude, then longitude. Cells absent from the CSV are zero.

use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::fields::{FieldUnits, GridField};
use super::grid::GridSpec;
use crate::error::{Error, Result};
use crate::io_util::atomic_write;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldMetadata {
    pub grid: GridSpec,
    pub units: FieldUnits,
    pub n_years_basis: u32,
    pub provenance: String,
    /// Suggested color scale for display.
    pub display_scale: String,
    pub cell_order: String,
}

pub fn field_sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

pub fn export_field(field: &GridField, csv: &Path) -> Result<()> {
    field.validate()?;
    atomic_write(csv, |f| {
        let mut w = BufWriter::new(f);
        writeln!(w, "lat_cell,lon_cell,value")?;
        for (c, &v) in field.values.iter().enumerate() {
            if v != 0.0 {
                let (la, lo) = field.grid.corner(c);
                writeln!(w, "{la},{lo},{v}")?;
            }
        }
        w.flush()
    })?;
    let meta = FieldMetadata {
        grid: field.grid,
        units: field.units,
        n_years_basis: field.n_years_basis,
        provenance: field.provenance.clone(),
        display_scale: "log10".into(),
        cell_order: "row-major, latitude then longitude; lower-left corners; absent cells are zero".into(),
    };
    let text = serde_json::to_string_pretty(&meta).map_err(|e| Error::Invariant(e.to_string()))?;
    atomic_write(&field_sidecar_path(csv), |f| {
        f.write_all(text.as_bytes())?;
        f.write_all(b"\n")
    })
}

pub fn import_field(csv: &Path) -> Result<GridField> {
    let side = field_sidecar_path(csv);
    let text = std::fs::read_to_string(&side).map_err(|e| Error::io(&side, e))?;
    let meta: FieldMetadata =
        serde_json::from_str(&text).map_err(|e| Error::Schema(format!("{}: {e}", side.display())))?;
    meta.grid.validate()?;
    let mut values = vec![0.0; meta.grid.n_cells()];
    let mut rdr = csv::Reader::from_path(csv).map_err(|e| Error::csv(csv, e))?;
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::csv(csv, e))?;
        let num = |k: usize| -> Result<f64> {
            rec.get(k)
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| Error::Schema(format!("{}:{}: bad field row", csv.display(), i + 2)))
        };
        let (la, lo, v) = (num(0)?, num(1)?, num(2)?);
        let cell = meta.grid.cell_at_corner(la, lo).ok_or_else(|| {
            Error::Schema(format!("{}:{}: ({la}, {lo}) is not a cell corner", csv.display(), i + 2))
        })?;
        values[cell] = v;
    }
    let field = GridField {
        grid: meta.grid,
        values,
        units: meta.units,
        n_years_basis: meta.n_years_basis,
        provenance: meta.provenance,
    };
    field.validate()?;
    Ok(field)
}
