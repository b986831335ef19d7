//! The once-punctured torus: slopes and their words, intersection numbers,
//! Dehn twists and Markov moves as automorphisms of the free group on `a, b`,
//! limit length spectra along degenerating paths, and the two-branch
//! train-track chart.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::charvar::{self, CharvarError, Representation, Word};
use crate::families::{
    boundary_limit, BoundaryDirection, FamilyError, FunctionFamily, LimitDiagnostics,
    LimitEstimator, Member, PathSpec,
};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum SurfaceError {
    #[error("{0}/{1} is not a reduced slope")]
    NotCoprime(i64, i64),
    #[error("cannot parse slope {0:?}")]
    BadSlope(String),
    #[error("trace triple ({0}, {1}, {2}) is off the Markov locus")]
    OffLocus(f64, f64, f64),
    #[error("Markov move index {0} is not 1, 2 or 3")]
    BadMove(u8),
    #[error("track measure must be nonnegative and nonzero")]
    BadMeasure,
    #[error("surface of genus {g} with {b} punctures is not hyperbolic")]
    NotHyperbolic { g: u32, b: u32 },
    #[error(transparent)]
    Charvar(#[from] CharvarError),
    #[error(transparent)]
    Family(#[from] FamilyError),
}

type Result<T> = std::result::Result<T, SurfaceError>;

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Reduced slope `p/q` with `q > 0`, or `1/0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Slope {
    p: i64,
    q: i64,
}

impl Slope {
    pub fn new(p: i64, q: i64) -> Result<Self> {
        if gcd(p, q) != 1 {
            return Err(SurfaceError::NotCoprime(p, q));
        }
        Ok(if q < 0 || (q == 0 && p < 0) {
            Slope { p: -p, q: -q }
        } else {
            Slope { p, q }
        })
    }

    pub fn infinity() -> Self {
        Slope { p: 1, q: 0 }
    }

    pub fn p(self) -> i64 {
        self.p
    }

    pub fn q(self) -> i64 {
        self.q
    }
}

impl fmt::Display for Slope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.p, self.q)
    }
}

impl FromStr for Slope {
    type Err = SurfaceError;
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("inf") || t == "∞" {
            return Ok(Slope::infinity());
        }
        let bad = || SurfaceError::BadSlope(s.to_string());
        let (p, q) = match t.split_once('/') {
            Some((p, q)) => (
                p.trim().parse().map_err(|_| bad())?,
                q.trim().parse().map_err(|_| bad())?,
            ),
            None => (t.parse().map_err(|_| bad())?, 1),
        };
        Slope::new(p, q)
    }
}

/// Geometric intersection number `|p_s q_t - q_s p_t|`.
pub fn intersection_number(s: Slope, t: Slope) -> u64 {
    (s.p * t.q - s.q * t.p).unsigned_abs()
}

/// Automorphism of the free group on `a, b`, stored by the images of the
/// generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Automorphism {
    a: Word,
    b: Word,
}

fn w(s: &str) -> Word {
    Word::parse(s).expect("literal word")
}

impl Automorphism {
    pub fn identity() -> Self {
        Automorphism {
            a: w("a"),
            b: w("b"),
        }
    }

    pub fn from_images(a: Word, b: Word) -> Self {
        Automorphism { a, b }
    }

    pub fn image_a(&self) -> &Word {
        &self.a
    }

    pub fn image_b(&self) -> &Word {
        &self.b
    }

    fn map(&self) -> BTreeMap<char, Word> {
        BTreeMap::from([('a', self.a.clone()), ('b', self.b.clone())])
    }

    pub fn apply(&self, word: &Word) -> Word {
        word.substitute(&self.map())
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Automorphism) -> Automorphism {
        Automorphism {
            a: self.apply(&other.a),
            b: self.apply(&other.b),
        }
    }

    pub fn pow(&self, k: usize) -> Automorphism {
        let mut out = Automorphism::identity();
        for _ in 0..k {
            out = out.compose(self);
        }
        out
    }
}

/// An automorphism together with its inverse.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AutPair {
    pub forward: Automorphism,
    pub inverse: Automorphism,
}

impl AutPair {
    fn of(f: (&str, &str), i: (&str, &str)) -> Self {
        AutPair {
            forward: Automorphism::from_images(w(f.0), w(f.1)),
            inverse: Automorphism::from_images(w(i.0), w(i.1)),
        }
    }

    pub fn identity() -> Self {
        AutPair {
            forward: Automorphism::identity(),
            inverse: Automorphism::identity(),
        }
    }

    /// `self ∘ other`.
    pub fn then(&self, other: &AutPair) -> AutPair {
        AutPair {
            forward: self.forward.compose(&other.forward),
            inverse: other.inverse.compose(&self.inverse),
        }
    }

    pub fn conjugate(&self, inner: &Automorphism) -> Automorphism {
        self.forward.compose(inner).compose(&self.inverse)
    }
}

/// Change of basis `ψ` with `ψ(a) = slope_word(s)`, built by descending the
/// Stern-Brocot tree.
pub fn slope_basis(s: Slope) -> AutPair {
    // moves (a, b) -> (a, ab) and (a, b) -> (ab, b)
    let left = AutPair::of(("a", "ab"), ("a", "Ab"));
    let right = AutPair::of(("ab", "b"), ("aB", "b"));
    if s.q == 0 {
        return AutPair::of(("b", "A"), ("B", "a"));
    }
    let negate = AutPair::of(("a", "B"), ("a", "B"));
    let (p, q) = (s.p.abs(), s.q);
    let mut psi = if s.p < 0 { negate } else { AutPair::identity() };
    if p == 0 {
        return psi;
    }
    // Farey interval (l, r) with mediant m, starting at (0/1, 1/0)
    let (mut l, mut r) = ((0i64, 1i64), (1i64, 0i64));
    loop {
        let m = (l.0 + r.0, l.1 + r.1);
        if m == (p, q) {
            return psi.then(&right);
        }
        // compare p/q with m.0/m.1
        if p * m.1 < m.0 * q {
            psi = psi.then(&left);
            r = m;
        } else {
            psi = psi.then(&right);
            l = m;
        }
    }
}

/// Primitive word with exponent sums `q` in `a` and `p` in `b`.
pub fn slope_word(s: Slope) -> Word {
    slope_basis(s).forward.image_a().clone()
}

/// Dehn twist along `slope_word(s)`: `ψ T_a ψ⁻¹` with `T_a: a ↦ a, b ↦ ab`.
pub fn twist_automorphism(s: Slope) -> Automorphism {
    let ta = Automorphism::from_images(w("a"), w("ab"));
    slope_basis(s).conjugate(&ta)
}

/// Representation point `ρ0 ∘ φ`, evaluated lazily through reduced words.
#[derive(Clone, Debug)]
pub struct MarkedRep {
    pub base: Arc<Representation>,
    pub phi: Automorphism,
}

impl MarkedRep {
    pub fn word(&self, w: &Word) -> Word {
        self.phi.apply(w)
    }

    pub fn log_abs_trace(&self, w: &Word) -> std::result::Result<f64, CharvarError> {
        charvar::log_abs_trace(&self.base, &self.word(w))
    }

    pub fn translation_length(&self, w: &Word) -> std::result::Result<f64, CharvarError> {
        charvar::word_translation_length(&self.base, &self.word(w))
    }

    /// `self ∘ σ`.
    pub fn precompose(&self, sigma: &Automorphism) -> MarkedRep {
        MarkedRep {
            base: Arc::clone(&self.base),
            phi: self.phi.compose(sigma),
        }
    }
}

/// `(tr a, tr b, tr ab)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceTriple {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

pub const LOCUS_TOL: f64 = 1e-6;

impl TraceTriple {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        TraceTriple { x, y, z }
    }

    pub fn markov() -> Self {
        TraceTriple::new(3.0, 3.0, 3.0)
    }

    /// Relative defect of `x² + y² + z² = xyz`.
    pub fn locus_defect(&self) -> f64 {
        let (x, y, z) = (self.x, self.y, self.z);
        (x * x + y * y + z * z - x * y * z).abs() / (x * y * z).abs().max(1.0)
    }

    pub fn check(&self) -> Result<()> {
        let min_ok = [self.x, self.y, self.z].iter().all(|&t| t >= 3.0 - 1e-9);
        if self.locus_defect() <= LOCUS_TOL && min_ok {
            Ok(())
        } else {
            Err(SurfaceError::OffLocus(self.x, self.y, self.z))
        }
    }

    pub fn of(rep: &Representation) -> Result<Self> {
        let t = |s: &str| charvar::trace_function(rep, &w(s));
        Ok(TraceTriple::new(t("a")?, t("b")?, t("ab")?))
    }

    pub fn representation(&self) -> Result<Representation> {
        Ok(charvar::fricke_representation(self.x, self.y, self.z)?)
    }
}

/// Markov move and the automorphism inducing it on `(a, b)`:
/// 1: `(xy - z, y, x)` from `(aB, b)`; 2: `(y, yz - x, z)` from `(B, bab)`;
/// 3: `(x, z, xz - y)` from `(a, ab)`.
pub fn markov_automorphism(which: u8) -> Result<AutPair> {
    Ok(match which {
        1 => AutPair::of(("aB", "b"), ("ab", "b")),
        2 => AutPair::of(("B", "bab"), ("aba", "A")),
        3 => AutPair::of(("a", "ab"), ("a", "Ab")),
        _ => return Err(SurfaceError::BadMove(which)),
    })
}

pub fn markov_step(t: TraceTriple, which: u8) -> Result<TraceTriple> {
    t.check()?;
    let TraceTriple { x, y, z } = t;
    let out = match which {
        1 => TraceTriple::new(x * y - z, y, x),
        2 => TraceTriple::new(y, y * z - x, z),
        3 => TraceTriple::new(x, z, x * z - y),
        _ => return Err(SurfaceError::BadMove(which)),
    };
    out.check()?;
    Ok(out)
}

pub fn markov_step_inverse(t: TraceTriple, which: u8) -> Result<TraceTriple> {
    t.check()?;
    let TraceTriple { x, y, z } = t;
    let out = match which {
        1 => TraceTriple::new(z, y, z * y - x),
        2 => TraceTriple::new(z * x - y, x, z),
        3 => TraceTriple::new(x, x * y - z, y),
        _ => return Err(SurfaceError::BadMove(which)),
    };
    out.check()?;
    Ok(out)
}

/// Natural logs of a positive trace triple, for paths whose traces
/// overflow doubles.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogTriple(pub [f64; 3]);

fn log_add(u: f64, v: f64) -> f64 {
    let m = u.max(v);
    m + ((u - m).exp() + (v - m).exp()).ln()
}

/// Log of the other root `xy - z` of `t² - xy t + x² + y² = 0`. Near the
/// top of the Markov tree `xy - z` cancels, so the product form
/// `(x² + y²) / z` is used instead; both agree on the locus.
fn log_other_root(x: f64, y: f64, z: f64) -> f64 {
    let s = x + y;
    if z - s < -std::f64::consts::LN_2 {
        s + (-(z - s).exp()).ln_1p()
    } else {
        log_add(2.0 * x, 2.0 * y) - z
    }
}

impl LogTriple {
    pub fn of(t: TraceTriple) -> Self {
        LogTriple([t.x.ln(), t.y.ln(), t.z.ln()])
    }

    /// Markov move in log coordinates; the triple must lie on the locus.
    pub fn step(self, which: u8) -> Result<Self> {
        let [x, y, z] = self.0;
        Ok(LogTriple(match which {
            1 => [log_other_root(x, y, z), y, x],
            2 => [y, log_other_root(y, z, x), z],
            3 => [x, z, log_other_root(x, z, y)],
            _ => return Err(SurfaceError::BadMove(which)),
        }))
    }
}

/// Path `k ↦ ρ0 ∘ T_c^k`.
pub fn twist_path(rho0: &Representation, c: Slope) -> Result<PathSpec<MarkedRep>> {
    TraceTriple::of(rho0)?.check()?;
    let t = twist_automorphism(c);
    let base = Arc::new(rho0.clone());
    Ok(PathSpec::from_fn(move |k| MarkedRep {
        base: Arc::clone(&base),
        phi: t.pow(k),
    })
    .with_estimator(LimitEstimator::Increment)
    .with_start(0))
}

/// Markov path in log-trace coordinates: step `k` applies the move
/// sequence `k` times. A single move changes one coordinate, so sampling
/// whole periods is what lets increments settle.
pub fn markov_path(start: TraceTriple, moves: &[u8]) -> Result<PathSpec<LogTriple>> {
    start.check()?;
    if moves.is_empty() {
        return Err(SurfaceError::BadMove(0));
    }
    if let Some(&m) = moves.iter().find(|&&m| !(1..=3).contains(&m)) {
        return Err(SurfaceError::BadMove(m));
    }
    let moves = moves.to_vec();
    let l0 = LogTriple::of(start);
    Ok(PathSpec::from_fn(move |k| {
        let mut t = l0;
        for _ in 0..k {
            for &m in &moves {
                t = t.step(m).expect("validated moves");
            }
        }
        t
    })
    .with_estimator(LimitEstimator::Increment)
    .with_start(0))
}

/// Same moves acting on a representation, for curve sets beyond `a, b, ab`;
/// step `k` is the `k`-th power of the composed sequence.
/// Word lengths grow geometrically along mixed move sequences, so keep
/// `max_steps` small.
pub fn markov_word_path(rho0: &Representation, moves: &[u8]) -> Result<PathSpec<MarkedRep>> {
    TraceTriple::of(rho0)?.check()?;
    let auts = moves
        .iter()
        .map(|&m| markov_automorphism(m).map(|p| p.forward))
        .collect::<Result<Vec<_>>>()?;
    if auts.is_empty() {
        return Err(SurfaceError::BadMove(0));
    }
    let period = auts
        .iter()
        .fold(Automorphism::identity(), |phi, m| phi.compose(m));
    let base = Arc::new(rho0.clone());
    Ok(PathSpec::from_fn(move |k| MarkedRep {
        base: Arc::clone(&base),
        phi: period.pow(k),
    })
    .with_estimator(LimitEstimator::Increment)
    .with_start(0))
}

/// Family `{log |tr(slope_word(c))|}` over marked representations; the
/// absolute trace is the positive trace on the Teichmüller locus.
pub fn length_family(curves: &[Slope]) -> Result<FunctionFamily<MarkedRep>> {
    let words: Vec<(String, Word)> = curves
        .iter()
        .map(|&c| (c.to_string(), slope_word(c)))
        .collect();
    word_family(&words)
}

/// Family of `log |tr w|` for labelled words.
pub fn word_family(words: &[(String, Word)]) -> Result<FunctionFamily<MarkedRep>> {
    let members = words
        .iter()
        .map(|(name, word)| {
            let label = word.to_string();
            let word = word.clone();
            Member::from_log(name.clone(), move |p: &MarkedRep| {
                p.log_abs_trace(&word).map_err(|e| e.to_string())
            })
            .labelled(label)
        })
        .collect();
    Ok(FunctionFamily::new(members)?)
}

/// Family of log-traces of `a, b, ab` on log-trace triples.
pub fn triple_family() -> FunctionFamily<LogTriple> {
    FunctionFamily::new(vec![
        Member::from_log("0/1", |t: &LogTriple| Ok(t.0[0])),
        Member::from_log("1/0", |t: &LogTriple| Ok(t.0[1])),
        Member::from_log("1/1", |t: &LogTriple| Ok(t.0[2])),
    ])
    .expect("distinct names")
}

/// Projectivised limit of the positive-trace spectrum of `curves`.
pub fn limit_spectrum(
    path: &PathSpec<MarkedRep>,
    curves: &[Slope],
    t0: f64,
) -> Result<(BoundaryDirection, LimitDiagnostics)> {
    let f = length_family(curves)?;
    Ok(boundary_limit(&f, path, t0)?)
}

/// `(i(s, c))_c` normalised, named like [`length_family`].
pub fn intersection_direction(s: Slope, curves: &[Slope]) -> Option<BoundaryDirection> {
    let v: Vec<f64> = curves
        .iter()
        .map(|&c| intersection_number(s, c) as f64)
        .collect();
    BoundaryDirection::new(curves.iter().map(|c| c.to_string()).collect(), &v)
}

/// `max = sum of the other two`, the tropical Markov relation.
pub fn tropical_markov_defect(v: &[f64; 3]) -> f64 {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (2.0 * m - v.iter().sum::<f64>()).abs()
}

/// Weights on the two branches of the standard train track.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrackMeasure {
    pub u: f64,
    pub v: f64,
}

impl TrackMeasure {
    pub fn new(u: f64, v: f64) -> Result<Self> {
        if !(u >= 0.0 && v >= 0.0) || (u == 0.0 && v == 0.0) {
            return Err(SurfaceError::BadMeasure);
        }
        Ok(TrackMeasure { u, v })
    }
}

/// `|u q_s - v p_s|`.
pub fn chart_intersection(m: TrackMeasure, s: Slope) -> f64 {
    (m.u * s.q as f64 - m.v * s.p as f64).abs()
}

/// `(9g - 9 + 3b, 6g - 5 + 2b)`.
pub fn curve_system_sizes(g: u32, b: u32) -> Result<(u32, u32)> {
    if 2 * g + b <= 2 {
        return Err(SurfaceError::NotHyperbolic { g, b });
    }
    Ok((9 * g + 3 * b - 9, 6 * g + 2 * b - 5))
}

/// One row of a twist table: step, translation length per curve, and the
/// normalised log-spectrum.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumRow {
    pub k: usize,
    pub lengths: Vec<f64>,
    pub normalized: Vec<f64>,
}

pub fn twist_table(
    rho0: &Representation,
    c: Slope,
    curves: &[Slope],
    steps: usize,
) -> Result<Vec<SpectrumRow>> {
    TraceTriple::of(rho0)?.check()?;
    let t = twist_automorphism(c);
    let base = Arc::new(rho0.clone());
    let words: Vec<Word> = curves.iter().map(|&c| slope_word(c)).collect();
    let mut phi = Automorphism::identity();
    let mut rows = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        let p = MarkedRep {
            base: Arc::clone(&base),
            phi: phi.clone(),
        };
        let lengths = words
            .iter()
            .map(|w| p.translation_length(w))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let logs = words
            .iter()
            .map(|w| p.log_abs_trace(w))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let normalized = crate::logmap::normalize(&logs).unwrap_or_else(|| vec![0.0; logs.len()]);
        rows.push(SpectrumRow {
            k,
            lengths,
            normalized,
        });
        phi = phi.compose(&t);
    }
    Ok(rows)
}
