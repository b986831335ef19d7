//! The logarithmic limit set of z = x² + (y-1)² in the positive octant:
//! sample, cluster into cones and compare with the tropical prevariety.

use logcompact::logmap::{
    amoeba_sample, cluster_cones, loglimit_directions, tropical_angular_distance, LogParams,
};
use logcompact::semialg::{plane_polynomial, plane_set};

fn main() {
    let set = plane_set();
    let params = LogParams::default();

    // a few points of the amoeba at a moderate base
    let bx = vec![(0.01, 100.0), (0.01, 100.0), (0.01, 1e4)];
    let coarse =
        LogParams::new(0.1, params.radius_ladder.clone(), params.cluster_tol).expect("params");
    let amoeba = amoeba_sample(&set, &coarse, &bx, 5, 7).expect("sampling");
    for p in &amoeba {
        println!("amoeba point {p:.3?}");
    }

    let (cloud, diag) = loglimit_directions(&set, &params, 4000, 1).expect("sampling");
    println!(
        "{} stable directions from {} rays ({} unstable)",
        cloud.len(),
        diag.rays,
        diag.unstable
    );
    let report = cluster_cones(&cloud, params.cluster_tol).expect("clustering");
    for c in &report.clusters {
        println!(
            "{:?} cone: {} directions, diameter {:.2}, normal {:.3?}",
            c.kind,
            c.members.len(),
            c.angular_diameter,
            c.plane_normal
        );
    }
    let p = plane_polynomial();
    let worst = cloud
        .directions
        .iter()
        .map(|d| tropical_angular_distance(&p, d))
        .fold(0.0, f64::max);
    println!("largest angle to the tropical prevariety: {worst:.2e}");
}
