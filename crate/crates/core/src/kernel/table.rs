//! Precomputed transition lookup table and its on-disk container.
//!
//! File layout (little endian):
//!
//! ```text
//! magic "TSTABLE\0" | u32 schema | 5 x f64 kernel params | u32 reserved steps
//! | [u8; 32] library checksum | u32 n_tracks | n_tracks x u32 track length
//! | per point in (track, step) order: u32 n, n x (u32 track, u32 step, f64 weight)
//! | [u8; 32] sha256 of everything above
//! ```

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian as LE, ReadBytesExt, WriteBytesExt};
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use super::{transition_weights, KernelParams};
use crate::error::{Error, Result};
use crate::ingest::SegmentLibrary;
use crate::io_util::{atomic_write, HashWriter};
use crate::spatial::PointRef;

const TABLE_MAGIC: &[u8; 8] = b"TSTABLE\0";
pub const TABLE_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub target: PointRef,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableHeader {
    pub schema_version: u32,
    pub params: KernelParams,
    pub reserved_steps: usize,
    pub library_checksum: [u8; 32],
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransitionTable {
    header: TableHeader,
    track_lengths: Vec<u32>,
    track_offsets: Vec<usize>,
    row_offsets: Vec<usize>,
    candidates: Vec<Candidate>,
}

impl TransitionTable {
    fn from_rows(header: TableHeader, track_lengths: Vec<u32>, rows: Vec<Vec<Candidate>>) -> Self {
        let mut track_offsets = Vec::with_capacity(track_lengths.len() + 1);
        let mut acc = 0usize;
        for &n in &track_lengths {
            track_offsets.push(acc);
            acc += n as usize;
        }
        track_offsets.push(acc);
        let mut row_offsets = Vec::with_capacity(rows.len() + 1);
        let mut candidates = Vec::with_capacity(rows.iter().map(Vec::len).sum());
        for r in rows {
            row_offsets.push(candidates.len());
            candidates.extend(r);
        }
        row_offsets.push(candidates.len());
        Self {
            header,
            track_lengths,
            track_offsets,
            row_offsets,
            candidates,
        }
    }

    pub fn header(&self) -> &TableHeader {
        &self.header
    }

    pub fn params(&self) -> &KernelParams {
        &self.header.params
    }

    pub fn reserved_steps(&self) -> usize {
        self.header.reserved_steps
    }

    pub fn n_points(&self) -> usize {
        self.row_offsets.len() - 1
    }

    pub fn n_candidates(&self) -> usize {
        self.candidates.len()
    }

    /// Outgoing candidates of one source point; empty when the point is
    /// ineligible or has no neighbours.
    pub fn row(&self, p: PointRef) -> &[Candidate] {
        let Some(&base) = self.track_offsets.get(p.track as usize) else {
            return &[];
        };
        if p.step >= self.track_lengths[p.track as usize] {
            return &[];
        }
        let i = base + p.step as usize;
        &self.candidates[self.row_offsets[i]..self.row_offsets[i + 1]]
    }

    /// Iterate `(source, candidates)` over every point, including empty rows.
    pub fn rows(&self) -> impl Iterator<Item = (PointRef, &[Candidate])> + '_ {
        self.track_lengths.iter().enumerate().flat_map(move |(t, &n)| {
            (0..n).map(move |s| {
                let p = PointRef::new(t as u32, s);
                (p, self.row(p))
            })
        })
    }

    fn write_body<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        w.write_all(TABLE_MAGIC)?;
        w.write_u32::<LE>(self.header.schema_version)?;
        let p = &self.header.params;
        for v in [p.radius_deg, p.alpha_dist, p.alpha_age, p.alpha_vec, p.alpha_wind] {
            w.write_f64::<LE>(v)?;
        }
        w.write_u32::<LE>(self.header.reserved_steps as u32)?;
        w.write_all(&self.header.library_checksum)?;
        w.write_u32::<LE>(self.track_lengths.len() as u32)?;
        for &n in &self.track_lengths {
            w.write_u32::<LE>(n)?;
        }
        for i in 0..self.n_points() {
            let row = &self.candidates[self.row_offsets[i]..self.row_offsets[i + 1]];
            w.write_u32::<LE>(row.len() as u32)?;
            for c in row {
                w.write_u32::<LE>(c.target.track)?;
                w.write_u32::<LE>(c.target.step)?;
                w.write_f64::<LE>(c.weight)?;
            }
        }
        Ok(())
    }

    /// SHA-256 of the serialized table body, hex encoded.
    pub fn checksum_hex(&self) -> String {
        let mut h = HashWriter::default();
        self.write_body(&mut h).expect("hashing into memory cannot fail");
        hex::encode(h.finish())
    }

    /// Write the table; a failed write leaves no partial file.
    pub fn save(&self, path: &Path) -> Result<()> {
        atomic_write(path, |f| {
            let mut hw = HashWriter::default();
            self.write_body(&mut hw)?;
            let digest = hw.finish();
            let mut w = BufWriter::new(f);
            self.write_body(&mut w)?;
            w.write_all(&digest)?;
            w.flush()
        })
    }

    /// Parse a table from bytes without checking it against a library.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let schema = |m: &str| Error::Schema(format!("transition table: {m}"));
        if bytes.len() < TABLE_MAGIC.len() + 32 || &bytes[..8] != TABLE_MAGIC {
            return Err(schema("not a transition table file"));
        }
        let (body, digest) = bytes.split_at(bytes.len() - 32);
        if Sha256::digest(body).as_slice() != digest {
            return Err(schema("truncated or corrupted (digest mismatch)"));
        }
        let trunc = |_| schema("truncated");
        let mut r = &body[8..];
        let schema_version = r.read_u32::<LE>().map_err(trunc)?;
        if schema_version != TABLE_SCHEMA_VERSION {
            return Err(schema(&format!(
                "schema version {schema_version}, expected {TABLE_SCHEMA_VERSION}"
            )));
        }
        let mut v = [0f64; 5];
        for x in &mut v {
            *x = r.read_f64::<LE>().map_err(trunc)?;
        }
        let params = KernelParams {
            radius_deg: v[0],
            alpha_dist: v[1],
            alpha_age: v[2],
            alpha_vec: v[3],
            alpha_wind: v[4],
        };
        let reserved_steps = r.read_u32::<LE>().map_err(trunc)? as usize;
        let mut library_checksum = [0u8; 32];
        r.read_exact(&mut library_checksum).map_err(trunc)?;
        let n_tracks = r.read_u32::<LE>().map_err(trunc)? as usize;
        if n_tracks > r.len() / 4 {
            return Err(schema("track count exceeds file size"));
        }
        let mut track_lengths = Vec::with_capacity(n_tracks);
        for _ in 0..n_tracks {
            track_lengths.push(r.read_u32::<LE>().map_err(trunc)?);
        }
        let n_points: usize = track_lengths.iter().map(|&n| n as usize).sum();
        let mut rows = Vec::with_capacity(n_points.min(r.len() / 4));
        for _ in 0..n_points {
            let n = r.read_u32::<LE>().map_err(trunc)? as usize;
            if n > r.len() / 16 {
                return Err(schema("row length exceeds file size"));
            }
            let mut row = Vec::with_capacity(n);
            for _ in 0..n {
                let track = r.read_u32::<LE>().map_err(trunc)?;
                let step = r.read_u32::<LE>().map_err(trunc)?;
                let weight = r.read_f64::<LE>().map_err(trunc)?;
                row.push(Candidate {
                    target: PointRef::new(track, step),
                    weight,
                });
            }
            rows.push(row);
        }
        if !r.is_empty() {
            return Err(schema("trailing bytes"));
        }
        let header = TableHeader {
            schema_version,
            params,
            reserved_steps,
            library_checksum,
        };
        Ok(Self::from_rows(header, track_lengths, rows))
    }
}

/// Compute `transition_weights` for every point of the library.
///
/// Rows are computed in parallel and merged in `(track, step)` order, so
/// the result does not depend on the thread count.
pub fn precompute_table(
    lib: &SegmentLibrary,
    params: &KernelParams,
    reserved_steps: usize,
) -> Result<TransitionTable> {
    params.validate()?;
    let refs: Vec<PointRef> = lib
        .tracks()
        .iter()
        .enumerate()
        .flat_map(|(t, tr)| (0..tr.points.len() as u32).map(move |s| PointRef::new(t as u32, s)))
        .collect();
    let rows: Vec<Vec<Candidate>> = refs
        .par_iter()
        .map(|&p| transition_weights(lib, p, params, reserved_steps))
        .collect();
    let header = TableHeader {
        schema_version: TABLE_SCHEMA_VERSION,
        params: *params,
        reserved_steps,
        library_checksum: lib.checksum(),
    };
    let lengths = lib.tracks().iter().map(|t| t.points.len() as u32).collect();
    Ok(TransitionTable::from_rows(header, lengths, rows))
}

/// Load a table and refuse it unless it was built from `lib`.
pub fn load_table(path: &Path, lib: &SegmentLibrary) -> Result<TransitionTable> {
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    let table = TransitionTable::from_bytes(&bytes)?;
    if table.header.library_checksum != lib.checksum() {
        return Err(Error::ChecksumMismatch {
            expected: lib.checksum_hex(),
            found: hex::encode(table.header.library_checksum),
        });
    }
    let lengths: Vec<u32> = lib.tracks().iter().map(|t| t.points.len() as u32).collect();
    if lengths != table.track_lengths {
        return Err(Error::Schema("transition table track layout differs from library".into()));
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::line_track;
    use crate::ingest::{build_library, BasinCode, BasinConfig, NormalizerFloors};

    fn lib() -> SegmentLibrary {
        build_library(
            vec![
                line_track("A", 2000, 15.0, -60.0, 0.2, -0.3, 10, |i| 30.0 + 3.0 * i as f64),
                line_track("B", 2000, 15.5, -60.2, 0.1, -0.35, 12, |i| 70.0 - 2.0 * i as f64),
                line_track("C", 2000, 40.0, 10.0, 0.1, 0.1, 8, |_| 50.0),
            ],
            &BasinConfig::for_basin(BasinCode::NA),
            2.5,
            NormalizerFloors::default(),
        )
        .unwrap()
    }

    #[test]
    fn rows_match_direct_calls_and_are_normalised() {
        let l = lib();
        let p = KernelParams::default();
        let t = precompute_table(&l, &p, 3).unwrap();
        for (src, row) in t.rows() {
            assert_eq!(row, transition_weights(&l, src, &p, 3).as_slice());
            if !row.is_empty() {
                let s: f64 = row.iter().map(|c| c.weight).sum();
                assert!((s - 1.0).abs() < 1e-9);
            }
        }
        // the isolated track C gets nothing but its own points
        for s in 0..8 {
            assert!(t.row(PointRef::new(2, s)).iter().all(|c| c.target.track == 2));
        }
    }

    #[test]
    fn isolated_track_rows_empty() {
        let l = build_library(
            vec![line_track("A", 2000, 15.0, -60.0, 0.0, 3.0, 8, |_| 40.0)],
            &BasinConfig::for_basin(BasinCode::NA),
            2.5,
            NormalizerFloors::default(),
        )
        .unwrap();
        let t = precompute_table(&l, &KernelParams::default(), 3).unwrap();
        assert_eq!(t.n_candidates(), 0);
    }

    #[test]
    fn deterministic_and_thread_independent() {
        let l = lib();
        let p = KernelParams::default();
        let a = precompute_table(&l, &p, 3).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| precompute_table(&l, &p, 3).unwrap());
        assert_eq!(a, b);
        assert_eq!(a.checksum_hex(), b.checksum_hex());
    }

    #[test]
    fn save_load_roundtrip_and_guards() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.bin");
        let l = lib();
        let t = precompute_table(&l, &KernelParams::default(), 3).unwrap();
        t.save(&path).unwrap();
        assert_eq!(load_table(&path, &l).unwrap(), t);

        let other = build_library(
            vec![line_track("Z", 2000, 15.0, -60.0, 0.2, -0.3, 10, |_| 30.0)],
            &BasinConfig::for_basin(BasinCode::NA),
            2.5,
            NormalizerFloors::default(),
        )
        .unwrap();
        assert!(matches!(load_table(&path, &other), Err(Error::ChecksumMismatch { .. })));

        let bytes = std::fs::read(&path).unwrap();
        for cut in [0, 7, 20, bytes.len() / 2, bytes.len() - 1] {
            std::fs::write(&path, &bytes[..cut]).unwrap();
            assert!(matches!(load_table(&path, &l), Err(Error::Schema(_))), "cut {cut}");
        }
    }

    #[test]
    fn failed_save_leaves_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let missing = dir.path().join("no/such/dir/t.bin");
        let t = precompute_table(&lib(), &KernelParams::default(), 3).unwrap();
        assert!(t.save(&missing).is_err());
        assert!(std::fs::read_dir(dir.path()).unwrap().next().is_none());
    }
}
