//! Markov moves on trace triples of the punctured torus, the automorphisms
//! inducing them, and a tropical Markov boundary point.

use logcompact::families::boundary_limit;
use logcompact::surface::{
    markov_automorphism, markov_path, markov_step, triple_family, TraceTriple,
};

fn main() {
    let mut t = TraceTriple::markov();
    for m in [3u8, 3, 1, 2, 3] {
        t = markov_step(t, m).unwrap();
        let aut = markov_automorphism(m).unwrap().forward;
        println!(
            "move {m} (a -> {}, b -> {}): ({}, {}, {}), defect {:.1e}",
            aut.image_a(),
            aut.image_b(),
            t.x,
            t.y,
            t.z,
            t.locus_defect()
        );
    }
    let t0 = (-1.0f64).exp();
    // a twist, a finite-order class and a pseudo-Anosov class
    for moves in [vec![3u8], vec![3, 2], vec![1, 3, 2, 1]] {
        let path = markov_path(TraceTriple::markov(), &moves)
            .unwrap()
            .with_max_steps(200);
        match boundary_limit(&triple_family(), &path, t0) {
            Ok((d, _)) => {
                let c = &d.coords;
                let max = c.iter().copied().fold(f64::MIN, f64::max);
                println!(
                    "{moves:?}: limit {c:.4?}, max - (sum - max) = {:.1e}",
                    2.0 * max - c.iter().sum::<f64>()
                );
            }
            Err(e) => println!("{moves:?}: {e}"),
        }
    }
}
