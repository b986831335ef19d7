//! The line x + y = 1. Its tropical prevariety has three rays, along -e1,
//! -e2 and (1, 1), but the positive part of the line is a bounded segment
//! towards (1, 1), so only the first two appear in its logarithmic limit
//! set.

use logcompact::logmap::{
    cluster_cones, loglimit_directions, tropical_prevariety_member, LogParams,
};
use logcompact::semialg::{Condition, Polynomial, SemiAlgebraicSet};

fn main() {
    let v = ["x", "y"];
    let line = Polynomial::from_int_terms(&v, &[(&[1, 0], 1), (&[0, 1], 1), (&[0, 0], -1)]);
    let set = SemiAlgebraicSet::new(&v, Condition::eq(line.clone()), true).expect("set");
    let params = LogParams::default();
    let (cloud, _) = loglimit_directions(&set, &params, 600, 3).expect("sampling");
    let report = cluster_cones(&cloud, params.cluster_tol).expect("clustering");
    for c in &report.clusters {
        println!("ray {:.4?} carries {} directions", c.mean, c.members.len());
    }
    for d in [[-1.0, 0.0], [0.0, -1.0], [1.0, 1.0], [1.0, 0.0]] {
        println!(
            "{d:?} on the tropical line: {}",
            tropical_prevariety_member(&line, &d, 1e-12)
        );
    }
}
