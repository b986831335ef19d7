//! {x, y} is not an injective subfamily of {x, y, x² + (y-1)²}: two paths
//! approaching y = 1 share their {x, y} limit but not the full one. Adding
//! xy instead is harmless, since xy is a positive Laurent expression.

use logcompact::families::{
    boundary_limit, injectivity_evidence, push_forward_direction, FunctionFamily, LimitEstimator,
    LogPoint, PathSpec,
};
use logcompact::semialg::Polynomial;

fn near_line(offset: fn(f64) -> f64) -> PathSpec<LogPoint> {
    PathSpec::from_fn(move |k| {
        let k = k as f64;
        LogPoint(vec![-k, offset(k).ln_1p()])
    })
    .with_estimator(LimitEstimator::Increment)
}

fn main() {
    let v = ["x", "y"];
    let x = Polynomial::var(&v, "x").unwrap();
    let y = Polynomial::var(&v, "y").unwrap();
    let q = Polynomial::from_int_terms(
        &v,
        &[(&[2, 0], 1), (&[0, 2], 1), (&[0, 1], -2), (&[0, 0], 1)],
    );
    let xy = Polynomial::from_int_terms(&v, &[(&[1, 1], 1)]);
    let t0 = (-1.0f64).exp();
    let paths = || vec![near_line(|_| 0.0), near_line(|k| (-0.5 * k).exp())];
    let small = vec!["x".to_string(), "y".to_string()];

    let g = FunctionFamily::polynomials(&[("x", x.clone()), ("y", y.clone()), ("q", q)]).unwrap();
    for (i, p) in paths().iter().enumerate() {
        let (d, diag) = boundary_limit(&g, p, t0).unwrap();
        println!(
            "path {i}: limit {:.4?} after {} steps",
            d.coords, diag.steps
        );
    }
    let r = injectivity_evidence(&small, &g, &paths(), t0, 1e-2).unwrap();
    for w in &r.witnesses {
        println!(
            "witness {:?}: full limits {:.1e} apart, {{x, y}} limits {:.1e} apart",
            w.paths, w.big_angle, w.small_angle
        );
    }

    let h = FunctionFamily::polynomials(&[("x", x), ("y", y), ("xy", xy.clone())]).unwrap();
    let r = injectivity_evidence(&small, &h, &paths(), t0, 1e-2).unwrap();
    println!("witnesses with xy: {}", r.witnesses.len());
    for d in &r.limits {
        println!(
            "xy coordinate {:.6} predicted {:.6}",
            d.get("xy").unwrap(),
            push_forward_direction(&xy, d).unwrap()
        );
    }
}
