//! Words in free groups, representations into SL(2, R) and SL(3, R), and the
//! spectral quantities of their images.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::linalg::Matrix;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum CharvarError {
    #[error("letter {0:?} is not a generator or inverse (use a-z, A-Z)")]
    BadLetter(char),
    #[error("generator {0:?} has no image in the representation")]
    UnknownGenerator(char),
    #[error("representation size {0} is not 2 or 3")]
    BadSize(usize),
    #[error("image of {gen:?} is not a {size}x{size} matrix")]
    Shape { gen: String, size: usize },
    #[error("image of {gen:?} has determinant {det}")]
    Determinant { gen: String, det: f64 },
    #[error("matrix is not proximal in both directions")]
    NotProximal,
    #[error("extreme eigenvalues have different signs")]
    SignMismatch,
    #[error("trace {0} at the base point does not fix a sign")]
    TraceVanishing(f64),
    #[error("(z - xy)^2 = {0} < 4: no real normal form")]
    FrickeDiscriminant(f64),
}

type Result<T> = std::result::Result<T, CharvarError>;

/// Reduced word; lowercase letters are generators, uppercase their inverses.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<char>);

fn inverse_letter(c: char) -> char {
    if c.is_ascii_lowercase() {
        c.to_ascii_uppercase()
    } else {
        c.to_ascii_lowercase()
    }
}

impl Word {
    pub fn identity() -> Self {
        Word(Vec::new())
    }

    pub fn parse(s: &str) -> Result<Self> {
        let mut w = Word::identity();
        for c in s.chars() {
            if c == '1' && s.len() == 1 {
                break;
            }
            if !c.is_ascii_alphabetic() {
                return Err(CharvarError::BadLetter(c));
            }
            w.push(c);
        }
        Ok(w)
    }

    fn push(&mut self, c: char) {
        if self.0.last() == Some(&inverse_letter(c)) {
            self.0.pop();
        } else {
            self.0.push(c);
        }
    }

    pub fn letters(&self) -> &[char] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn inverse(&self) -> Self {
        Word(self.0.iter().rev().map(|&c| inverse_letter(c)).collect())
    }

    pub fn concat(&self, other: &Word) -> Self {
        let mut w = self.clone();
        for &c in &other.0 {
            w.push(c);
        }
        w
    }

    pub fn pow(&self, k: i64) -> Self {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut w = Word::identity();
        for _ in 0..k.unsigned_abs() {
            w = w.concat(&base);
        }
        w
    }

    /// Signed number of occurrences of generator `g`.
    pub fn exponent_sum(&self, g: char) -> i64 {
        let g = g.to_ascii_lowercase();
        self.0
            .iter()
            .map(|&c| match c {
                c if c == g => 1,
                c if c == g.to_ascii_uppercase() => -1,
                _ => 0,
            })
            .sum()
    }

    /// Replaces each generator by its image; inverses by inverted images.
    /// Generators missing from `images` are kept.
    pub fn substitute(&self, images: &BTreeMap<char, Word>) -> Word {
        let mut out = Word::identity();
        for &c in &self.0 {
            let g = c.to_ascii_lowercase();
            match images.get(&g) {
                Some(img) if c == g => out = out.concat(img),
                Some(img) => out = out.concat(&img.inverse()),
                None => out.push(c),
            }
        }
        out
    }

    /// Cyclic reduction: strips letters that cancel around the end.
    pub fn cyclically_reduced(&self) -> Word {
        let mut v = self.0.as_slice();
        while v.len() >= 2 && v[0] == inverse_letter(v[v.len() - 1]) {
            v = &v[1..v.len() - 1];
        }
        Word(v.to_vec())
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        self.0.iter().try_for_each(|c| write!(f, "{c}"))
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({self})")
    }
}

impl std::str::FromStr for Word {
    type Err = CharvarError;
    fn from_str(s: &str) -> Result<Self> {
        Word::parse(s)
    }
}

pub const DET_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct Representation {
    size: usize,
    gens: BTreeMap<char, Matrix>,
    inverses: BTreeMap<char, Matrix>,
}

impl Representation {
    pub fn new(size: usize, gens: BTreeMap<char, Matrix>) -> Result<Self> {
        if size != 2 && size != 3 {
            return Err(CharvarError::BadSize(size));
        }
        let mut inverses = BTreeMap::new();
        for (&g, m) in &gens {
            if !g.is_ascii_lowercase() {
                return Err(CharvarError::BadLetter(g));
            }
            if m.size() != size {
                return Err(CharvarError::Shape {
                    gen: g.to_string(),
                    size,
                });
            }
            let det = m.det();
            if (det - 1.0).abs() > DET_TOL || !det.is_finite() {
                return Err(CharvarError::Determinant {
                    gen: g.to_string(),
                    det,
                });
            }
            inverses.insert(g, m.inverse().expect("unimodular"));
        }
        Ok(Representation {
            size,
            gens,
            inverses,
        })
    }

    pub fn from_pairs(size: usize, pairs: Vec<(char, Matrix)>) -> Result<Self> {
        Representation::new(size, pairs.into_iter().collect())
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn generators(&self) -> impl Iterator<Item = (char, &Matrix)> {
        self.gens.iter().map(|(&c, m)| (c, m))
    }

    pub fn letter(&self, c: char) -> Result<&Matrix> {
        let g = c.to_ascii_lowercase();
        let map = if c == g { &self.gens } else { &self.inverses };
        map.get(&g).ok_or(CharvarError::UnknownGenerator(g))
    }

    /// `M ρ M⁻¹`.
    pub fn conjugate(&self, m: &Matrix) -> Result<Self> {
        let inv = m.inverse().ok_or(CharvarError::Determinant {
            gen: "conjugator".into(),
            det: m.det(),
        })?;
        let gens = self
            .gens
            .iter()
            .map(|(&g, a)| (g, &(m * a) * &inv))
            .collect();
        Representation::new(self.size, gens)
    }
}

pub fn evaluate_word(rep: &Representation, w: &Word) -> Result<Matrix> {
    let mut acc = Matrix::identity(rep.size);
    for &c in w.letters() {
        acc = &acc * rep.letter(c)?;
    }
    Ok(acc)
}

/// A matrix `exp(log_scale) · matrix` with `matrix` normalised to max entry 1.
#[derive(Clone, Debug, PartialEq)]
pub struct ScaledMatrix {
    pub matrix: Matrix,
    pub log_scale: f64,
}

impl ScaledMatrix {
    fn renormalize(&mut self) {
        let m = self.matrix.max_abs();
        if m > 0.0 && m.is_finite() {
            self.matrix = self.matrix.scaled(1.0 / m);
            self.log_scale += m.ln();
        }
    }

    /// `log |trace|`; `-inf` when the normalised trace vanishes.
    pub fn log_abs_trace(&self) -> f64 {
        self.matrix.trace().abs().ln() + self.log_scale
    }

    pub fn trace_sign(&self) -> f64 {
        self.matrix.trace().signum()
    }

    /// Log of the spectral radius.
    pub fn log_spectral_radius(&self) -> f64 {
        let ev = self.matrix.eigenvalues().expect("size 2 or 3");
        ev[0].norm().ln() + self.log_scale
    }
}

/// Word evaluation that stays finite for long words.
pub fn evaluate_word_scaled(rep: &Representation, w: &Word) -> Result<ScaledMatrix> {
    let mut acc = ScaledMatrix {
        matrix: Matrix::identity(rep.size),
        log_scale: 0.0,
    };
    for (i, &c) in w.letters().iter().enumerate() {
        acc.matrix = &acc.matrix * rep.letter(c)?;
        if i % 8 == 7 {
            acc.renormalize();
        }
    }
    acc.renormalize();
    Ok(acc)
}

pub fn trace_function(rep: &Representation, w: &Word) -> Result<f64> {
    Ok(evaluate_word(rep, w)?.trace())
}

/// `log |tr ρ(w)|` without overflow.
pub fn log_abs_trace(rep: &Representation, w: &Word) -> Result<f64> {
    Ok(evaluate_word_scaled(rep, w)?.log_abs_trace())
}

/// `log(λ₁/λₙ)` of `ρ(w)` from spectral radii of `ρ(w)` and `ρ(w)⁻¹`; valid
/// for unimodular images of any length.
pub fn word_translation_length(rep: &Representation, w: &Word) -> Result<f64> {
    let fwd = evaluate_word_scaled(rep, w)?;
    let back = evaluate_word_scaled(rep, &w.inverse())?;
    Ok(fwd.log_spectral_radius() + back.log_spectral_radius())
}

#[derive(Clone, Debug, PartialEq)]
pub struct EigenData {
    /// Sorted by descending modulus; ties real first, then by real part.
    pub values: Vec<Complex64>,
    pub real: Vec<bool>,
    /// Two eigenvalues closer than `1e-10` (relative) without coinciding.
    pub near_degenerate: bool,
}

impl EigenData {
    pub fn moduli(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.norm()).collect()
    }

    pub fn first(&self) -> Complex64 {
        self.values[0]
    }

    pub fn last(&self) -> Complex64 {
        *self.values.last().expect("nonempty")
    }
}

const SEPARATION_TOL: f64 = 1e-10;
pub const GAP_TOL: f64 = 1e-9;

fn spectrum(m: &Matrix) -> Result<EigenData> {
    let mut values = m.eigenvalues().ok_or(CharvarError::BadSize(m.size()))?;
    // clean up tiny imaginary parts left by the closed forms
    let scale = values.iter().fold(0.0f64, |a, z| a.max(z.norm())).max(1.0);
    for z in values.iter_mut() {
        if z.im.abs() <= 1e-14 * scale {
            z.im = 0.0;
        }
    }
    values.sort_by(|a, b| {
        b.norm()
            .total_cmp(&a.norm())
            .then((a.im != 0.0).cmp(&(b.im != 0.0)))
            .then(b.re.total_cmp(&a.re))
            .then(b.im.total_cmp(&a.im))
    });
    let mut near = false;
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            let d = (values[i] - values[j]).norm();
            if d > 0.0 && d < SEPARATION_TOL * scale {
                near = true;
            }
        }
    }
    let real = values.iter().map(|z| z.im == 0.0).collect();
    Ok(EigenData {
        values,
        real,
        near_degenerate: near,
    })
}

/// Eigenvalues of a unimodular 2x2 or 3x3 matrix.
pub fn eigen(m: &Matrix) -> Result<EigenData> {
    if m.size() != 2 && m.size() != 3 {
        return Err(CharvarError::BadSize(m.size()));
    }
    let det = m.det();
    if (det - 1.0).abs() > 1e-6 {
        return Err(CharvarError::Determinant {
            gen: "matrix".into(),
            det,
        });
    }
    spectrum(m)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Proximality {
    Proximal,
    NotProximal,
    Indeterminate,
}

impl Proximality {
    pub fn is_true(self) -> bool {
        self == Proximality::Proximal
    }
}

fn gap_state(e: &EigenData, i: usize, j: usize) -> Proximality {
    let (a, b) = (e.values[i], e.values[j]);
    let (ma, mb) = (a.norm(), b.norm());
    let hi = ma.max(mb);
    if hi == 0.0 {
        return Proximality::NotProximal;
    }
    let d = (a - b).norm();
    if d > 0.0 && d < SEPARATION_TOL * hi.max(1.0) {
        return Proximality::Indeterminate;
    }
    if (ma - mb).abs() / hi > GAP_TOL {
        Proximality::Proximal
    } else {
        Proximality::NotProximal
    }
}

/// `|λ₁| > |λ₂|` beyond a relative gap of `1e-9`.
pub fn is_proximal(m: &Matrix) -> Result<Proximality> {
    let e = eigen(m)?;
    Ok(gap_state(&e, 0, 1))
}

fn extreme_pair(m: &Matrix) -> Result<(f64, f64)> {
    let e = eigen(m)?;
    let n = e.values.len();
    if !gap_state(&e, 0, 1).is_true()
        || !gap_state(&e, n - 2, n - 1).is_true()
        || !e.real[0]
        || !e.real[n - 1]
    {
        return Err(CharvarError::NotProximal);
    }
    let (l1, ln) = (e.values[0].re, e.values[n - 1].re);
    if l1.signum() != ln.signum() {
        return Err(CharvarError::SignMismatch);
    }
    Ok((l1, ln))
}

/// `λ₁ / λₙ`.
pub fn eigen_ratio(m: &Matrix) -> Result<f64> {
    let (l1, ln) = extreme_pair(m)?;
    Ok(l1 / ln)
}

/// `log(λ₁ / λₙ)`.
pub fn translation_length(m: &Matrix) -> Result<f64> {
    let (l1, ln) = extreme_pair(m)?;
    Ok(l1.abs().ln() - ln.abs().ln())
}

/// `J_w(query) = sign(I_w(base)) · I_w(query)`.
pub fn positive_trace(base: &Representation, query: &Representation, w: &Word) -> Result<f64> {
    if base.size() != 2 {
        return Err(CharvarError::BadSize(base.size()));
    }
    let tb = trace_function(base, w)?;
    if tb.abs() < 2.0 - 1e-9 {
        return Err(CharvarError::TraceVanishing(tb));
    }
    Ok(tb.signum() * trace_function(query, w)?)
}

/// `2 cosh(ℓ/2)`.
pub fn positive_trace_from_length(ell: f64) -> f64 {
    2.0 * (ell / 2.0).cosh()
}

/// Attracting and repelling eigenvectors.
#[derive(Clone, Debug, PartialEq)]
pub struct FixedPoints {
    pub attracting: Vec<f64>,
    pub repelling: Vec<f64>,
}

pub fn fixed_points(m: &Matrix) -> Result<FixedPoints> {
    let (l1, ln) = extreme_pair(m)?;
    let x = m.eigenvector(l1).ok_or(CharvarError::NotProximal)?;
    let y = m.eigenvector(ln).ok_or(CharvarError::NotProximal)?;
    Ok(FixedPoints {
        attracting: x,
        repelling: y,
    })
}

/// Normal form with `tr a = x`, `tr b = y`, `tr ab = z`.
pub fn fricke_representation(x: f64, y: f64, z: f64) -> Result<Representation> {
    let s = z - x * y;
    let disc = s * s;
    if disc < 4.0 {
        return Err(CharvarError::FrickeDiscriminant(disc));
    }
    // larger root of u² - s u + 1, computed stably
    let r = (disc - 4.0).sqrt();
    let u = if s >= 0.0 {
        0.5 * (s + r)
    } else {
        2.0 / (s - r)
    };
    let a = Matrix::from_array([[x, -1.0], [1.0, 0.0]]);
    let b = Matrix::from_array([[y, u], [-1.0 / u, 0.0]]);
    Representation::from_pairs(2, vec![('a', a), ('b', b)])
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct RepresentationJson {
    pub size: usize,
    pub gens: BTreeMap<String, Vec<Vec<f64>>>,
}

impl TryFrom<&RepresentationJson> for Representation {
    type Error = CharvarError;
    fn try_from(j: &RepresentationJson) -> Result<Self> {
        let mut gens = BTreeMap::new();
        for (name, rows) in &j.gens {
            let mut cs = name.chars();
            let (Some(c), None) = (cs.next(), cs.next()) else {
                return Err(CharvarError::BadLetter(name.chars().next().unwrap_or(' ')));
            };
            let m = Matrix::from_rows(rows).ok_or(CharvarError::Shape {
                gen: name.clone(),
                size: j.size,
            })?;
            gens.insert(c, m);
        }
        Representation::new(j.size, gens)
    }
}

impl From<&Representation> for RepresentationJson {
    fn from(r: &Representation) -> Self {
        RepresentationJson {
            size: r.size,
            gens: r
                .gens
                .iter()
                .map(|(c, m)| (c.to_string(), m.rows()))
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn diag2() -> Representation {
        Representation::from_pairs(2, vec![('a', Matrix::from_array([[2.0, 0.0], [0.0, 0.5]]))])
            .unwrap()
    }

    fn rot() -> Matrix {
        Matrix::from_array([[0.0, -1.0], [1.0, 0.0]])
    }

    fn cat() -> Matrix {
        Matrix::from_array([[2.0, 1.0], [1.0, 1.0]])
    }

    fn d3(a: f64, b: f64, c: f64) -> Matrix {
        Matrix::from_array([[a, 0.0, 0.0], [0.0, b, 0.0], [0.0, 0.0, c]])
    }

    #[test]
    fn word_reduction_and_display() {
        let w = Word::parse("aAbBa").unwrap();
        assert_eq!(w.to_string(), "a");
        assert!(Word::parse("aA").unwrap().is_empty());
        assert_eq!(Word::parse("ab").unwrap().inverse().to_string(), "BA");
        assert_eq!(Word::parse("a1"), Err(CharvarError::BadLetter('1')));
        assert_eq!(
            Word::parse("baB").unwrap().cyclically_reduced().to_string(),
            "a"
        );
        assert_eq!(Word::parse("aab").unwrap().exponent_sum('a'), 2);
    }

    #[test]
    fn evaluate_examples() {
        let r = diag2();
        assert_eq!(
            evaluate_word(&r, &Word::identity()).unwrap(),
            Matrix::identity(2)
        );
        let m = evaluate_word(&r, &Word::parse("aa").unwrap()).unwrap();
        assert_eq!(m, Matrix::from_array([[4.0, 0.0], [0.0, 0.25]]));
        assert_eq!(
            evaluate_word(&r, &Word::parse("aA").unwrap()).unwrap(),
            Matrix::identity(2)
        );
        assert_eq!(
            evaluate_word(&r, &Word::parse("b").unwrap()),
            Err(CharvarError::UnknownGenerator('b'))
        );
    }

    #[test]
    fn trace_examples() {
        assert_eq!(trace_function(&diag2(), &Word::identity()).unwrap(), 2.0);
        let r3 = Representation::from_pairs(3, vec![('a', d3(4.0, 1.0, 0.25))]).unwrap();
        assert_eq!(trace_function(&r3, &Word::identity()).unwrap(), 3.0);
        assert_eq!(
            trace_function(&diag2(), &Word::parse("a").unwrap()).unwrap(),
            2.5
        );
        let rr = Representation::from_pairs(2, vec![('a', rot())]).unwrap();
        assert_eq!(
            trace_function(&rr, &Word::parse("a").unwrap()).unwrap(),
            0.0
        );
    }

    #[test]
    fn determinant_checked() {
        let bad = Representation::from_pairs(
            2,
            vec![('a', Matrix::from_array([[2.0, 0.0], [0.0, 1.0]]))],
        );
        assert!(matches!(bad, Err(CharvarError::Determinant { .. })));
        assert!(matches!(
            Representation::from_pairs(4, vec![]),
            Err(CharvarError::BadSize(4))
        ));
    }

    #[test]
    fn eigen_examples() {
        let e = eigen(&d3(4.0, 1.0, 0.25)).unwrap();
        assert_eq!(e.moduli(), vec![4.0, 1.0, 0.25]);
        assert!(e.real.iter().all(|&r| r));
        let e = eigen(&cat()).unwrap();
        let s5 = 5f64.sqrt();
        assert!((e.values[0].re - (3.0 + s5) / 2.0).abs() < 1e-14);
        assert!((e.values[1].re - (3.0 - s5) / 2.0).abs() < 1e-14);
        let e = eigen(&rot()).unwrap();
        assert!(!e.real[0] && (e.values[0].im.abs() - 1.0).abs() < 1e-15);
        assert_eq!(is_proximal(&rot()).unwrap(), Proximality::NotProximal);
    }

    #[test]
    fn proximality_examples() {
        assert_eq!(
            is_proximal(&d3(4.0, 1.0, 0.25)).unwrap(),
            Proximality::Proximal
        );
        assert_eq!(
            is_proximal(&Matrix::identity(2)).unwrap(),
            Proximality::NotProximal
        );
        assert_eq!(
            is_proximal(&Matrix::identity(3)).unwrap(),
            Proximality::NotProximal
        );
        let parabolic = Matrix::from_array([[1.0, 1.0], [0.0, 1.0]]);
        assert_eq!(is_proximal(&parabolic).unwrap(), Proximality::NotProximal);
    }

    #[test]
    fn ratio_and_length_examples() {
        assert_eq!(eigen_ratio(&d3(4.0, 1.0, 0.25)).unwrap(), 16.0);
        let l1 = (3.0 + 5f64.sqrt()) / 2.0;
        assert!((eigen_ratio(&cat()).unwrap() - l1 * l1).abs() < 1e-12);
        assert!((eigen_ratio(&cat()).unwrap() - 6.8541).abs() < 1e-4);
        assert_eq!(
            eigen_ratio(&Matrix::identity(2)),
            Err(CharvarError::NotProximal)
        );
        assert!((translation_length(&d3(4.0, 1.0, 0.25)).unwrap() - 16f64.ln()).abs() < 1e-15);
        assert!((translation_length(&cat()).unwrap() - 2.0 * 1.5f64.acosh()).abs() < 1e-12);
        assert!((translation_length(&cat()).unwrap() - 1.9248).abs() < 1e-4);
        let e = std::f64::consts::E;
        assert!((translation_length(&d3(e, 1.0, 1.0 / e)).unwrap() - 2.0).abs() < 1e-15);
        let neg = Matrix::from_array([[4.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, -0.25]]);
        assert_eq!(eigen_ratio(&neg), Err(CharvarError::SignMismatch));
    }

    #[test]
    fn positive_trace_examples() {
        let m = Matrix::from_array([[-2.0, -1.0], [-1.0, -1.0]]);
        let r = Representation::from_pairs(2, vec![('a', m)]).unwrap();
        let a = Word::parse("a").unwrap();
        assert_eq!(positive_trace(&r, &r, &a).unwrap(), 3.0);
        assert_eq!(positive_trace_from_length(0.0), 2.0);
        let ell = 2.0 * 1.5f64.acosh();
        assert!((positive_trace_from_length(ell) - 3.0).abs() < 1e-14);
        let rr = Representation::from_pairs(2, vec![('a', rot())]).unwrap();
        assert!(matches!(
            positive_trace(&rr, &rr, &a),
            Err(CharvarError::TraceVanishing(_))
        ));
    }

    #[test]
    fn fixed_point_examples() {
        let f = fixed_points(&d3(4.0, 1.0, 0.25)).unwrap();
        assert_eq!(f.attracting, vec![1.0, 0.0, 0.0]);
        assert_eq!(f.repelling, vec![0.0, 0.0, 1.0]);
        let f = fixed_points(&cat()).unwrap();
        let l1 = (3.0 + 5f64.sqrt()) / 2.0;
        // (A - l1) v = 0 → v ∝ (1, l1 - 2)
        let n = (1.0 + (l1 - 2.0).powi(2)).sqrt();
        assert!(
            (f.attracting[0] - 1.0 / n).abs() < 1e-14
                && (f.attracting[1] - (l1 - 2.0) / n).abs() < 1e-14
        );
        assert_eq!(fixed_points(&rot()), Err(CharvarError::NotProximal));
    }

    #[test]
    fn fixed_points_equivariant() {
        let a = d3(4.0, 1.0, 0.25);
        let m = Matrix::from_array([[1.0, 2.0, 0.0], [0.0, 1.0, 0.0], [1.0, 0.5, 1.0]]);
        let ma = &(&m * &a) * &m.inverse().unwrap();
        let f = fixed_points(&ma).unwrap();
        let g = fixed_points(&a).unwrap();
        for (x, y) in [(&f.attracting, &g.attracting), (&f.repelling, &g.repelling)] {
            let my = m.apply(y);
            let cr = crate::linalg::cross3(x, &my);
            assert!(crate::linalg::norm(&cr) < 1e-12 * crate::linalg::norm(&my));
        }
    }

    #[test]
    fn fricke_markov_triple() {
        let r = fricke_representation(3.0, 3.0, 3.0).unwrap();
        let t = |s: &str| trace_function(&r, &Word::parse(s).unwrap()).unwrap();
        assert!((t("a") - 3.0).abs() < 1e-12);
        assert!((t("b") - 3.0).abs() < 1e-12);
        assert!((t("ab") - 3.0).abs() < 1e-12);
        assert!((t("abAB") + 2.0).abs() < 1e-12);
        assert_eq!(
            fricke_representation(0.0, 0.0, 0.0),
            Err(CharvarError::FrickeDiscriminant(0.0))
        );
    }

    #[test]
    fn fricke_round_trip_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut done = 0;
        while done < 100 {
            let x: f64 = rng.gen_range(-6.0..6.0);
            let y: f64 = rng.gen_range(-6.0..6.0);
            let z: f64 = rng.gen_range(-40.0..40.0);
            let Ok(r) = fricke_representation(x, y, z) else {
                continue;
            };
            done += 1;
            let t = |s: &str| trace_function(&r, &Word::parse(s).unwrap()).unwrap();
            assert!((t("a") - x).abs() < 1e-12);
            assert!((t("b") - y).abs() < 1e-12);
            assert!((t("ab") - z).abs() < 1e-12 * z.abs().max(1.0));
        }
    }

    fn random_sl2<R: Rng>(rng: &mut R) -> Matrix {
        loop {
            let a: f64 = rng.gen_range(-3.0..3.0);
            let b: f64 = rng.gen_range(-3.0..3.0);
            let c: f64 = rng.gen_range(-3.0..3.0);
            if a.abs() < 0.2 {
                continue;
            }
            let d = (1.0 + b * c) / a;
            return Matrix::from_array([[a, b], [c, d]]);
        }
    }

    fn random_sl3<R: Rng>(rng: &mut R) -> Matrix {
        loop {
            let rows: Vec<Vec<f64>> = (0..3)
                .map(|_| (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect())
                .collect();
            let m = Matrix::from_rows(&rows).unwrap();
            let d = m.det();
            if d.abs() < 0.1 {
                continue;
            }
            let s = d.abs().cbrt() * d.signum();
            return m.scaled(1.0 / s);
        }
    }

    #[test]
    fn conjugation_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let r = fricke_representation(3.0, 4.0, 10.0).unwrap();
        for _ in 0..50 {
            let m = random_sl2(&mut rng);
            let rc = r.conjugate(&m).unwrap();
            for s in ["a", "ab", "aBAb", "abbAB"] {
                let w = Word::parse(s).unwrap();
                let (t0, t1) = (
                    trace_function(&r, &w).unwrap(),
                    trace_function(&rc, &w).unwrap(),
                );
                assert!(
                    (t0 - t1).abs() <= 1e-9 * t0.abs().max(1.0),
                    "{s}: {t0} vs {t1}"
                );
            }
        }
    }

    #[test]
    fn sl2_length_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut n = 0;
        while n < 1000 {
            let m = random_sl2(&mut rng);
            if m.trace().abs() <= 2.0 + 1e-3 {
                continue;
            }
            n += 1;
            let l = translation_length(&m).unwrap();
            let want = 2.0 * (m.trace().abs() / 2.0).acosh();
            assert!((l - want).abs() < 1e-9 * want.max(1.0), "{l} vs {want}");
        }
    }

    #[test]
    fn trace_bound_sl3() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut n = 0;
        while n < 1000 {
            let m = random_sl3(&mut rng);
            let e = eigen(&m).unwrap();
            if !(e.real[0] && e.real[2] && e.values[0].re > 0.0 && e.values[2].re > 0.0) {
                continue;
            }
            n += 1;
            let ratio = e.values[0].re / e.values[2].re;
            assert!(m.trace().abs() <= 3.0 * ratio + 1e-12);
        }
    }

    #[test]
    fn power_law_and_scaled_lengths() {
        let r = fricke_representation(3.0, 3.0, 3.0).unwrap();
        let w = Word::parse("ab").unwrap();
        let a = evaluate_word(&r, &w).unwrap();
        let l = translation_length(&a).unwrap();
        for k in 1..=5 {
            let ak = evaluate_word(&r, &w.pow(k)).unwrap();
            assert!((translation_length(&ak).unwrap() - k as f64 * l).abs() < 1e-8);
            assert!((word_translation_length(&r, &w.pow(k)).unwrap() - k as f64 * l).abs() < 1e-8);
        }
        // long powers stay finite
        let big = word_translation_length(&r, &w.pow(600)).unwrap();
        assert!((big - 600.0 * l).abs() < 1e-6 * big);
    }

    #[test]
    fn json_round_trip() {
        let r = fricke_representation(3.0, 3.0, 3.0).unwrap();
        let j = RepresentationJson::from(&r);
        let s = serde_json::to_string(&j).unwrap();
        let back: RepresentationJson = serde_json::from_str(&s).unwrap();
        assert_eq!(Representation::try_from(&back).unwrap(), r);
    }

    proptest! {
        #[test]
        fn sl2_trace_identity(a in -3.0f64..3.0, b in -3.0f64..3.0, c in -3.0f64..3.0,
                              e in -3.0f64..3.0, f in -3.0f64..3.0, g in -3.0f64..3.0) {
            prop_assume!(a.abs() > 0.2 && e.abs() > 0.2);
            let m = Matrix::from_array([[a, b], [c, (1.0 + b * c) / a]]);
            let n = Matrix::from_array([[e, f], [g, (1.0 + f * g) / e]]);
            let r = Representation::from_pairs(2, vec![('a', m), ('b', n)]).unwrap();
            let t = |s: &str| trace_function(&r, &Word::parse(s).unwrap()).unwrap();
            let lhs = t("ab") + t("aB");
            let rhs = t("a") * t("b");
            prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs().max(rhs.abs()) * 10.0));
        }
    }
}
