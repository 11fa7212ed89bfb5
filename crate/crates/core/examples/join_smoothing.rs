//! Smooth a kinked join and show the points that change.

use tracksim::fixtures::track_from;
use tracksim::simulate::smooth_join;

fn main() -> tracksim::Result<()> {
    // a track that jumps sideways between index 4 and 5
    let mut pts: Vec<(f64, f64, f64)> = (0..10)
        .map(|i| {
            let kink = if i >= 5 { 0.8 } else { 0.0 };
            (12.0 + 0.2 * i as f64 + kink, 179.2 + 0.2 * i as f64, 50.0 + if i >= 5 { 15.0 } else { 0.0 })
        })
        .collect();
    // cross the antimeridian with unwrapped longitudes
    pts[9].1 = 181.0;
    let mut track = track_from("KINK", 2010, &pts).points;
    let before = track.clone();

    smooth_join(&mut track, 5, 5)?;
    println!("idx     lat before/after      lon before/after     wind before/after");
    for (i, (a, b)) in before.iter().zip(&track).enumerate() {
        let mark = if a != b { "*" } else { " " };
        println!(
            "{i:2}{mark}  {:7.3} {:7.3}   {:8.3} {:8.3}   {:6.2} {:6.2}",
            a.lat, b.lat, a.lon, b.lon, a.wind_u10, b.wind_u10
        );
    }
    // even windows are rejected
    assert!(smooth_join(&mut track, 5, 4).is_err());
    Ok(())
}
