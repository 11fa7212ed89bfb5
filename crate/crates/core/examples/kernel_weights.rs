//! Covariates and kernel weights for one source point on a toy library.
//!
//! Three parallel tracks pass close to each other; the one moving the same
//! way with similar winds gets most of the weight.

use tracksim::fixtures::line_track;
use tracksim::geo::great_circle_deg;
use tracksim::ingest::{build_library, BasinCode, BasinConfig, NormalizerFloors};
use tracksim::kernel::{bisquare, covariates, transition_weights, KernelParams};
use tracksim::spatial::PointRef;

fn main() -> tracksim::Result<()> {
    let tracks = vec![
        line_track("SRC", 2000, 15.0, -60.0, 0.2, -0.5, 40, |k| 40.0 + k as f64),
        line_track("TWIN", 2001, 15.3, -60.2, 0.2, -0.5, 40, |k| 42.0 + k as f64),
        line_track("RECURVE", 2002, 14.8, -59.8, 0.5, 0.1, 40, |k| 80.0 - k as f64),
        line_track("SLOW", 2003, 15.1, -60.1, 0.05, -0.1, 40, |k| 35.0 + 0.5 * k as f64),
    ];
    let lib = build_library(tracks, &BasinConfig::for_basin(BasinCode::NA), 2.5, NormalizerFloors::default())?;
    let params = KernelParams::default();

    println!("bisquare at u = 0, 0.5, 0.9 with alpha 4: {:.4} {:.4} {:.4}",
        bisquare(0.0, 4.0), bisquare(0.5, 4.0), bisquare(0.9, 4.0));

    // the library orders tracks by storm id
    let idx = |id: &str| lib.tracks().iter().position(|t| t.storm_id == id).unwrap() as u32;
    let source = PointRef::new(idx("SRC"), 10);
    println!("source {:?} at {:?}", source, lib.position(source));
    for id in ["TWIN", "RECURVE", "SLOW"] {
        let t = idx(id);
        // nearest point of each neighbour
        let j = (0..lib.track(t).len() as u32)
            .map(|s| PointRef::new(t, s))
            .min_by(|a, b| {
                let d = |r: &PointRef| great_circle_deg(lib.position(source), lib.position(*r));
                d(a).total_cmp(&d(b))
            })
            .unwrap();
        let c = covariates(&lib, source, j, params.radius_deg);
        println!(
            "  {id:8} step {:2}  u1 {:.3} u2 {:.3} u3 {:.3} u4 {:.3}  weight {:.3e}",
            j.step, c.u1, c.u2, c.u3, c.u4, c.weight(&params)
        );
    }

    let mut by_track = std::collections::BTreeMap::<&str, f64>::new();
    for c in transition_weights(&lib, source, &params, 3) {
        *by_track.entry(lib.track(c.target.track).storm_id.as_str()).or_default() += c.weight;
    }
    println!("normalized transition mass by destination track:");
    for (id, w) in by_track {
        println!("  {id:8} {w:.3}");
    }
    Ok(())
}
