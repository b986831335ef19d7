//! Dehn-twist degenerations of the punctured torus: limit length spectra
//! against intersection numbers with the twisting curve.

use logcompact::surface::{intersection_direction, limit_spectrum, twist_path, Slope, TraceTriple};

fn main() {
    let rho = TraceTriple::markov().representation().unwrap();
    let curves: Vec<Slope> = ["0/1", "1/0", "1/1", "1/2", "2/1"]
        .iter()
        .map(|s| s.parse().unwrap())
        .collect();
    let t0 = (-1.0f64).exp();
    for s in [
        "0/1", "1/0", "1/1", "1/2", "2/1", "1/3", "3/1", "2/3", "-2/5",
    ] {
        let s: Slope = s.parse().unwrap();
        let path = twist_path(&rho, s).unwrap().with_max_steps(60);
        let (d, diag) = limit_spectrum(&path, &curves, t0).unwrap();
        let target = intersection_direction(s, &curves).unwrap();
        println!(
            "{s:>5}: {:.4?} in {:>2} steps, angle to intersection numbers {:.1e}",
            d.coords,
            diag.steps,
            d.angle(&target).unwrap()
        );
    }
}
