//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

mod common;

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Instant;

use logcompact::charvar::{eigen, translation_length, Representation, Word};
use logcompact::families::{
    boundary_limit, injectivity_evidence, push_forward_direction, relabel_by_action, FamilyError,
    FunctionFamily, LimitEstimator, LogPoint, PathSpec,
};
use logcompact::hilbert::{displacement_rate, klein_isometry, ConvexDomain};
use logcompact::linalg::Matrix;
use logcompact::logmap::{self, cluster_cones, loglimit_directions, ClusterKind, LogParams};
use logcompact::semialg::{plane_polynomial, plane_set, Polynomial};
use logcompact::surface::{
    self, chart_intersection, limit_spectrum, markov_path, slope_word, triple_family,
    twist_automorphism, twist_path, word_family, MarkedRep, Slope, TraceTriple, TrackMeasure,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const T0: f64 = 0.36787944117144233;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn markov_rep() -> Representation {
    TraceTriple::markov().representation().unwrap()
}

fn slope(s: &str) -> Slope {
    s.parse().unwrap()
}

fn four_faces() -> Outcome {
    let start = Instant::now();
    let params = LogParams::default();
    let (cloud, diag) = match loglimit_directions(&plane_set(), &params, 4000, 1) {
        Ok(r) => r,
        Err(e) => return outcome(false, format!("sampling failed: {e}")),
    };
    let report = match cluster_cones(&cloud, params.cluster_tol) {
        Ok(r) => r,
        Err(e) => return outcome(false, format!("clustering failed: {e}")),
    };
    let elapsed = start.elapsed().as_secs_f64();
    let faces = report
        .clusters
        .iter()
        .filter(|c| c.kind == ClusterKind::FaceLike)
        .count();
    let p = plane_polynomial();
    let within = cloud
        .directions
        .iter()
        .filter(|d| logmap::tropical_angular_distance(&p, d) <= 1e-2)
        .count();
    let worst = cloud
        .directions
        .iter()
        .map(|d| logmap::tropical_angular_distance(&p, d))
        .fold(0.0, f64::max);
    outcome(
        faces == 4 && report.count() == 4 && within == cloud.len() && !cloud.is_empty() && elapsed <= 10.0,
        format!(
            "{faces} face-like of {} clusters; {within}/{} stable directions within 1e-2 (worst {worst:.2e}); {} unstable dropped; {elapsed:.2}s",
            report.count(),
            cloud.len(),
            diag.unstable
        ),
    )
}

const SLOPES: [&str; 8] = ["0/1", "1/0", "1/1", "1/2", "2/1", "1/3", "3/1", "2/3"];
const CURVES: [&str; 5] = ["0/1", "1/0", "1/1", "1/2", "2/1"];

fn oracle_direction(s: Slope, curves: &[Slope]) -> Vec<f64> {
    let v: Vec<f64> = curves
        .iter()
        .map(|c| common::crossing_count(s.p(), s.q(), c.p(), c.q()) as f64)
        .collect();
    logmap::normalize(&v).unwrap()
}

fn thurston() -> Outcome {
    let rho = markov_rep();
    let curves: Vec<Slope> = CURVES.iter().map(|c| slope(c)).collect();
    let mut worst: f64 = 0.0;
    let mut most_steps = 0;
    let mut failures = Vec::new();
    for s in SLOPES {
        let s = slope(s);
        let path = twist_path(&rho, s).unwrap().with_max_steps(60);
        match limit_spectrum(&path, &curves, T0) {
            Ok((d, g)) => {
                let a = logmap::angle(&d.coords, &oracle_direction(s, &curves));
                worst = worst.max(a);
                most_steps = most_steps.max(g.steps);
                if a > 1e-3 {
                    failures.push(format!("{s}: angle {a:.2e}"));
                }
            }
            Err(e) => failures.push(format!("{s}: {e}")),
        }
    }
    outcome(
        failures.is_empty(),
        format!(
            "8 slopes x 5 curves, worst angle {worst:.2e}, at most {most_steps} steps {failures:?}"
        ),
    )
}

fn markov_defect(c: &[f64]) -> f64 {
    let m = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (2.0 * m - c.iter().sum::<f64>()).abs()
}

fn sequences(max_len: usize) -> Vec<Vec<u8>> {
    let mut out: Vec<Vec<u8>> = vec![vec![]];
    let mut all = Vec::new();
    for _ in 0..max_len {
        out = out
            .iter()
            .flat_map(|s| (1..=3u8).map(move |m| [s.clone(), vec![m]].concat()))
            .collect();
        all.extend(out.iter().cloned());
    }
    all
}

fn tropical_markov() -> Outcome {
    let rho = markov_rep();
    let abc = [slope("0/1"), slope("1/0"), slope("1/1")];
    let mut computed = 0;
    let mut bounded = 0;
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    // twist paths
    for p in -4i64..=4 {
        for q in 0i64..=4 {
            let Ok(s) = Slope::new(p, q) else { continue };
            let path = twist_path(&rho, s).unwrap().with_max_steps(60);
            match limit_spectrum(&path, &abc, T0) {
                Ok((d, _)) => {
                    computed += 1;
                    worst = worst.max(markov_defect(&d.coords));
                }
                Err(e) => failures.push(format!("twist {s}: {e}")),
            }
        }
    }
    // Markov move sequences, repeated periodically
    let tf = triple_family();
    for seq in sequences(4) {
        let path = markov_path(TraceTriple::markov(), &seq)
            .unwrap()
            .with_max_steps(400);
        match boundary_limit(&tf, &path, T0) {
            Ok((d, _)) => {
                computed += 1;
                worst = worst.max(markov_defect(&d.coords));
            }
            // finite-order mapping classes stay bounded
            Err(FamilyError::NoEscape { .. }) => bounded += 1,
            Err(e) => failures.push(format!("moves {seq:?}: {e}")),
        }
    }
    // intersection spectra, exhaustively and on random large slopes
    let mut exact_checked = 0;
    let mut exact_bad = 0;
    let mut check = |s: Slope| {
        let v = abc.map(|c| surface::intersection_number(s, c) as i128);
        let m = *v.iter().max().unwrap();
        exact_checked += 1;
        if 2 * m != v.iter().sum::<i128>() {
            exact_bad += 1;
        }
    };
    for p in -60i64..=60 {
        for q in 0i64..=60 {
            if let Ok(s) = Slope::new(p, q) {
                check(s);
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..10_000 {
        let (p, q) = (
            rng.gen_range(-1_000_000i64..=1_000_000),
            rng.gen_range(1i64..=1_000_000),
        );
        if let Ok(s) = Slope::new(p, q) {
            check(s);
        }
    }
    let pass = failures.is_empty() && worst <= 1e-3 && exact_bad == 0 && computed > 0;
    outcome(
        pass,
        format!(
            "{computed} limit directions, worst defect {worst:.2e} ({bounded} periodic sequences bounded); {exact_bad}/{exact_checked} intersection spectra off {failures:?}"
        ),
    )
}

fn random_sl2(rng: &mut ChaCha8Rng) -> Matrix {
    loop {
        let a: f64 = rng.gen_range(-3.0..3.0);
        let b: f64 = rng.gen_range(-3.0..3.0);
        let c: f64 = rng.gen_range(-3.0..3.0);
        if a.abs() < 0.2 {
            continue;
        }
        let d = (1.0 + b * c) / a;
        if (a + d).abs() > 2.05 {
            return Matrix::from_array([[a, b], [c, d]]);
        }
    }
}

fn sl2_length() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    let mut errors = 0;
    for _ in 0..1000 {
        let m = random_sl2(&mut rng);
        let oracle = 2.0 * (m.trace().abs() / 2.0).acosh();
        match translation_length(&m) {
            Ok(l) => worst = worst.max((l - oracle).abs()),
            Err(_) => errors += 1,
        }
    }
    outcome(
        worst <= 1e-9 && errors == 0,
        format!("1000 matrices, worst gap {worst:.2e}, {errors} errors"),
    )
}

/// Dominant eigenvalue modulus by power iteration.
fn power_modulus(m: &Matrix) -> f64 {
    let mut v = vec![1.0, 0.7, 0.3];
    let mut r = 0.0;
    for _ in 0..3000 {
        let w = m.apply(&v);
        r = logmap::norm(&w);
        v = w.iter().map(|x| x / r).collect();
    }
    r
}

fn trace_bound() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut tested = 0;
    let mut worst_slack = f64::INFINITY;
    let mut oracle_checked = 0;
    let mut oracle_worst: f64 = 0.0;
    while tested < 1000 {
        let rows: Vec<Vec<f64>> = (0..3)
            .map(|_| (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect())
            .collect();
        let m = Matrix::from_rows(&rows).unwrap();
        let det = m.det();
        if det.abs() < 0.05 {
            continue;
        }
        let m = m.scaled(det.signum() / det.abs().cbrt());
        let Ok(e) = eigen(&m) else { continue };
        let (l1, l3) = (e.first(), e.last());
        if l1.im != 0.0 || l3.im != 0.0 || l1.re <= 0.0 || l3.re <= 0.0 {
            continue;
        }
        tested += 1;
        let slack = 3.0 * l1.re / l3.re - m.trace().abs();
        worst_slack = worst_slack.min(slack);
        let mods = e.moduli();
        if mods[0] > 1.05 * mods[1] {
            // the extreme moduli against power iteration on m and m⁻¹
            let inv = m.inverse().unwrap();
            let a = (power_modulus(&m) / l1.re - 1.0).abs();
            let b = (power_modulus(&inv) * l3.re - 1.0).abs();
            if mods[1] > 1.05 * mods[2] {
                oracle_worst = oracle_worst.max(a.max(b));
            } else {
                oracle_worst = oracle_worst.max(a);
            }
            oracle_checked += 1;
        }
    }
    outcome(
        worst_slack >= -1e-9 && oracle_worst <= 1e-6,
        format!(
            "1000 matrices, min slack {worst_slack:.3e}; eigenvalues match power iteration to {oracle_worst:.1e} on {oracle_checked}"
        ),
    )
}

fn random_interior(d: &ConvexDomain, rng: &mut ChaCha8Rng, lo: [f64; 2], hi: [f64; 2]) -> [f64; 2] {
    loop {
        let p = [rng.gen_range(lo[0]..hi[0]), rng.gen_range(lo[1]..hi[1])];
        if d.contains(&p) {
            return p;
        }
    }
}

fn metric_axioms(d: &ConvexDomain, lo: [f64; 2], hi: [f64; 2], seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::INFINITY;
    for _ in 0..10_000 {
        let [a, b, c] = [0; 3].map(|_| random_interior(d, &mut rng, lo, hi));
        let (ab, bc, ac) = (
            d.distance(&a, &b).unwrap(),
            d.distance(&b, &c).unwrap(),
            d.distance(&a, &c).unwrap(),
        );
        let ba = d.distance(&b, &a).unwrap();
        let aa = d.distance(&a, &a).unwrap();
        for s in [ab + bc - ac, ab, -(ab - ba).abs(), -aa.abs()] {
            worst = worst.min(s);
        }
    }
    worst
}

fn hilbert_rates() -> Outcome {
    let tri = ConvexDomain::simplex();
    let diag = Matrix::from_array([[4.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 0.25]]);
    let r1 = displacement_rate(&tri, &diag, &tri.center(), 50).map(|r| r.rate);
    let disk = ConvexDomain::klein_disk();
    let g = klein_isometry(&Matrix::from_array([[2.0, 1.0], [1.0, 1.0]])).unwrap();
    let r2 = displacement_rate(&disk, &g, &disk.center(), 50).map(|r| r.rate);
    let want1 = 16f64.ln();
    let want2 = 2.0 * 1.5f64.acosh();
    let err1 = r1
        .as_ref()
        .map(|r| (r - want1).abs())
        .unwrap_or(f64::INFINITY);
    let err2 = r2
        .as_ref()
        .map(|r| (r - want2).abs())
        .unwrap_or(f64::INFINITY);
    let s1 = metric_axioms(&tri, [0.0, 0.0], [1.0, 1.0], 61);
    let s2 = metric_axioms(&disk, [-1.0, -1.0], [1.0, 1.0], 62);
    outcome(
        err1 <= 1e-5 && err2 <= 1e-5 && s1 >= -1e-12 && s2 >= -1e-12,
        format!("triangle rate error {err1:.1e}, disk rate error {err2:.1e}; axiom slack {s1:.1e} / {s2:.1e} on 1e4 triples each"),
    )
}

fn chart_exactness() -> Outcome {
    let mut checked = 0u64;
    let mut bad = Vec::new();
    for u in 0i64..=20 {
        for v in 0i64..=20 {
            if common::gcd(u, v) != 1 {
                continue;
            }
            let m = TrackMeasure::new(u as f64, v as f64).unwrap();
            for p in -20i64..=20 {
                for q in 0i64..=20 {
                    let Ok(s) = Slope::new(p, q) else { continue };
                    if s.q() != q || s.p() != p {
                        continue;
                    }
                    checked += 1;
                    // the measure (u, v) is the curve of slope u/v
                    let oracle = common::crossing_count(u, v, p, q);
                    if chart_intersection(m, s) != oracle as f64 {
                        bad.push((u, v, p, q));
                    }
                }
            }
        }
    }
    outcome(
        bad.is_empty(),
        format!(
            "{checked} (measure, slope) pairs, {} mismatches {:?}",
            bad.len(),
            &bad[..bad.len().min(5)]
        ),
    )
}

fn var(v: &[&str], n: &str) -> Polynomial {
    Polynomial::var(v, n).unwrap()
}

fn in_chart(y_offset: impl Fn(f64) -> f64 + Send + Sync + 'static) -> PathSpec<LogPoint> {
    // x = e^-k and y = 1 + offset(k); log y is taken with ln_1p
    PathSpec::from_fn(move |k| {
        let k = k as f64;
        LogPoint(vec![-k, y_offset(k).ln_1p()])
    })
    .with_estimator(LimitEstimator::Increment)
}

fn injectivity() -> Outcome {
    let v = ["x", "y"];
    let small = vec!["x".to_string(), "y".to_string()];
    let paths = || {
        vec![
            in_chart(|_| 0.0),
            in_chart(|k| (-0.5 * k).exp()),
            in_chart(|k| (-2.0 * k).exp()),
        ]
    };
    let q = Polynomial::from_int_terms(
        &v,
        &[(&[2, 0], 1), (&[0, 2], 1), (&[0, 1], -2), (&[0, 0], 1)],
    );
    let g =
        FunctionFamily::polynomials(&[("x", var(&v, "x")), ("y", var(&v, "y")), ("q", q)]).unwrap();
    let r1 = injectivity_evidence(&small, &g, &paths(), T0, 1e-2);
    let prod = Polynomial::from_int_terms(&v, &[(&[1, 1], 1)]);
    let h = FunctionFamily::polynomials(&[
        ("x", var(&v, "x")),
        ("y", var(&v, "y")),
        ("xy", prod.clone()),
    ])
    .unwrap();
    let r2 = injectivity_evidence(&small, &h, &paths(), T0, 1e-2);
    let (Ok(r1), Ok(r2)) = (r1, r2) else {
        return outcome(false, "boundary limits failed".into());
    };
    let mut worst: f64 = 0.0;
    for d in &r2.limits {
        let observed = d.get("xy").unwrap();
        let predicted = push_forward_direction(&prod, d).unwrap();
        worst = worst.max((observed - predicted).abs());
    }
    outcome(
        !r1.witnesses.is_empty() && r2.witnesses.is_empty() && worst <= 2e-3,
        format!(
            "{} witnesses for {{x,y}} in {{x,y,q}}, {} for {{x,y}} in {{x,y,xy}}; push-forward error {worst:.1e}",
            r1.witnesses.len(),
            r2.witnesses.len()
        ),
    )
}

fn equivariance() -> Outcome {
    let rho = Arc::new(markov_rep());
    let words: Vec<(String, Word)> = CURVES
        .iter()
        .map(|c| (c.to_string(), slope_word(slope(c))))
        .collect();
    let family = word_family(&words).unwrap();
    let mut compared = 0;
    let mut bad = Vec::new();
    for d in ["1/1", "0/1", "2/1"] {
        let sigma = twist_automorphism(slope(d));
        // curves relabelled by the twist action
        let subst: BTreeMap<String, String> = words
            .iter()
            .map(|(_, w)| (w.to_string(), sigma.apply(w).to_string()))
            .collect();
        let relabelled = relabel_by_action(&family, &subst).unwrap();
        let image_words: Vec<(String, Word)> = words
            .iter()
            .map(|(_, w)| (sigma.apply(w).to_string(), sigma.apply(w)))
            .collect();
        let image_family = word_family(&image_words).unwrap();
        for c in ["1/2", "2/3", "1/0"] {
            let t = twist_automorphism(slope(c));
            let base = Arc::clone(&rho);
            let s2 = sigma.clone();
            let t2 = t.clone();
            // the path composed with the twist: ρ0 ∘ T_c^k ∘ σ
            let moved = PathSpec::from_fn(move |k| {
                MarkedRep {
                    base: Arc::clone(&base),
                    phi: t2.pow(k),
                }
                .precompose(&s2)
            })
            .with_estimator(LimitEstimator::Increment)
            .with_start(0)
            .with_max_steps(60);
            let plain = twist_path(&rho, slope(c)).unwrap().with_max_steps(60);
            let (Ok((a, _)), Ok((b, _))) = (
                boundary_limit(&relabelled, &moved, T0),
                boundary_limit(&image_family, &plain, T0),
            ) else {
                bad.push(format!("{d}/{c}: limit failed"));
                continue;
            };
            compared += 1;
            let same = a.names == b.names
                && a.coords
                    .iter()
                    .zip(&b.coords)
                    .all(|(x, y)| x.to_bits() == y.to_bits());
            if !same {
                bad.push(format!("{d}/{c}: {a:?} vs {b:?}"));
            }
        }
    }
    outcome(
        bad.is_empty() && compared > 0,
        format!(
            "{compared} (twist, path) pairs, {} inexact {bad:?}",
            bad.len()
        ),
    )
}

fn main() {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 9] = [
        ("four-face figure", four_faces),
        ("Thurston correspondence", thurston),
        ("tropical Markov boundary", tropical_markov),
        ("SL2 length identity", sl2_length),
        ("trace bound", trace_bound),
        ("Hilbert rates and axioms", hilbert_rates),
        ("train-track chart exactness", chart_exactness),
        ("non-injective family", injectivity),
        ("equivariance", equivariance),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let o = f();
        if !o.pass {
            failed += 1;
        }
        println!(
            "{} {}: {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
