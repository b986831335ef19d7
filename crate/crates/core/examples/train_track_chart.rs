//! The two-branch train track chart of measured laminations on the
//! punctured torus, and the documented curve-system sizes.

use logcompact::surface::{
    chart_intersection, curve_system_sizes, intersection_number, Slope, TrackMeasure,
};

fn main() {
    let m = TrackMeasure::new(3.0, 2.0).unwrap();
    let carried = Slope::new(3, 2).unwrap();
    for s in ["0/1", "1/0", "1/1", "1/4", "-2/3"] {
        let s: Slope = s.parse().unwrap();
        println!(
            "p_{s}(3, 2) = {}  i(3/2, {s}) = {}",
            chart_intersection(m, s),
            intersection_number(carried, s)
        );
    }
    // piecewise linear in the weights
    for u in [0.0, 0.5, 1.0, 1.5, 2.0] {
        let m = TrackMeasure::new(u, 1.0).unwrap();
        println!(
            "p_1/1({u}, 1) = {}",
            chart_intersection(m, Slope::new(1, 1).unwrap())
        );
    }
    for (g, b) in [(1, 1), (2, 0), (3, 2)] {
        println!(
            "genus {g}, {b} punctures: curve systems of sizes {:?}",
            curve_system_sizes(g, b).unwrap()
        );
    }
}
