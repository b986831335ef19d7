//! Hilbert-metric displacement rates: a diagonal matrix on the triangle and
//! a hyperbolic element acting on the Klein disk.

use logcompact::hilbert::{displacement_rate, klein_isometry, ConvexDomain};
use logcompact::linalg::Matrix;

fn main() {
    let tri = ConvexDomain::simplex();
    let d = Matrix::from_array([[4.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 0.25]]);
    let r = displacement_rate(&tri, &d, &tri.center(), 50).unwrap();
    println!("triangle: rate {:.8} (log 16 = {:.8})", r.rate, 16f64.ln());

    let disk = ConvexDomain::klein_disk();
    let g = klein_isometry(&Matrix::from_array([[2.0, 1.0], [1.0, 1.0]])).unwrap();
    let r = displacement_rate(&disk, &g, &disk.center(), 50).unwrap();
    println!(
        "disk: rate {:.8} (2 arccosh 1.5 = {:.8})",
        r.rate,
        2.0 * 1.5f64.acosh()
    );
    for k in [1, 5, 10, 50] {
        println!("  d(x0, g^{k} x0) = {:.6}", r.distances[k - 1]);
    }

    let square =
        ConvexDomain::polygon(vec![[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]]).unwrap();
    let (a, b) = ([0.0, 0.0], [0.5, 0.2]);
    println!(
        "square: d = {:.6}, chord {:?}",
        square.distance(&a, &b).unwrap(),
        square.chord(&a, &b).unwrap()
    );
}
