//! Synthetic track generation by kernel-weighted segment walks.

mod catalog;
pub mod io;
mod params;
mod walk;

pub use catalog::{
    generate_catalog, sample_annual_count, sample_genesis, sample_lifetime, year_rng, CatalogHeader,
    SyntheticCatalog, GENERATOR_VERSION,
};
pub use params::SimulationParams;
pub use walk::{
    select_transition, simulate_track, smooth_join, start_track, step, translate_segment, walk_raw,
    PoleCrossing, SegmentPiece, StepOutcome, SyntheticTrack, WalkState,
};
