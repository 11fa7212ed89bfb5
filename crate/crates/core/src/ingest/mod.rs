//! Best-track ingest: archive parsing, wind normalisation, 3-hour
//! interpolation and the per-basin segment library.

mod archive;
mod config;
mod library;
mod track;

pub use archive::{parse_archive, parse_archive_path, parse_time, write_rejects, ParsedArchive, RawBestTrackRow, Reject};
pub use config::{BasinCode, BasinConfig, ColumnMap, WindConvention};
pub use library::{
    build_library, scan_within, EmpiricalDistributions, GenesisEvent, NormalizerFloors,
    NormalizerSource, Normalizers, SegmentLibrary, LIBRARY_SCHEMA_VERSION,
};
pub use track::{convert_wind, interpolate_track, DropReason, HistoricalTrack, TrackPoint, STEP_SECONDS};

/// Outcome of turning parsed rows into interpolated tracks.
#[derive(Debug, Clone, Default)]
pub struct InterpolatedTracks {
    pub tracks: Vec<HistoricalTrack>,
    /// `(storm_id, reason)` for every storm that could not be interpolated.
    pub dropped: Vec<(String, DropReason)>,
}

/// Interpolate every storm of a parsed archive. Storms are independent and
/// are processed in parallel; output order follows storm-id order.
pub fn interpolate_all(parsed: &ParsedArchive, convention: WindConvention) -> InterpolatedTracks {
    use rayon::prelude::*;
    let storms = parsed.storms();
    let results: Vec<_> = storms
        .par_iter()
        .map(|rows| (rows[0].storm_id.clone(), interpolate_track(rows, convention)))
        .collect();
    let mut out = InterpolatedTracks::default();
    for (id, r) in results {
        match r {
            Ok(t) => out.tracks.push(t),
            Err(reason) => {
                log::info!("dropping storm {id}: {reason}");
                out.dropped.push((id, reason));
            }
        }
    }
    out
}
