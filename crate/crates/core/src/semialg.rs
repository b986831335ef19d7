//! Sparse Laurent polynomials with exact rational coefficients, semi-algebraic
//! sets built from sign conditions, and a seeded sampler for points of such
//! sets.
//!
//! Points are given either in linear coordinates (`eval`, `contains`) or in
//! natural-log coordinates (`eval_log_scaled`, `contains_log`). The log form
//! never exponentiates a whole monomial: each term is kept as
//! `log|c| + <e, w>` and the sum is normalised by the largest term, so the
//! sign and the scale-relative size of `p` survive coordinates like `e^300`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum SemialgError {
    #[error("arity mismatch: expected {expected} coordinates, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("coordinate {index} is {value}, but a negative exponent needs a positive value")]
    NonPositive { index: usize, value: f64 },
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("invalid coefficient `{0}`")]
    BadCoefficient(String),
    #[error("invalid relation `{0}`")]
    BadRelation(String),
    #[error("invalid box: {0}")]
    BadBox(String),
    #[error("schema: {0}")]
    Schema(String),
    #[error(
        "sampler gave up after {attempts} attempts: {accepted}/{requested} points accepted (rate {rate:.3e})"
    )]
    Budget {
        attempts: usize,
        accepted: usize,
        requested: usize,
        rate: f64,
    },
}

type Result<T> = std::result::Result<T, SemialgError>;

/// Integer exponent vector of a monomial.
pub type Exponent = Vec<i32>;

/// Sparse Laurent polynomial over an ordered list of named variables.
#[derive(Clone, PartialEq, Eq)]
pub struct Polynomial {
    vars: Vec<String>,
    terms: BTreeMap<Exponent, BigRational>,
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Polynomial({self})")
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (e, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c})")?;
            for (v, k) in self.vars.iter().zip(e) {
                match k {
                    0 => {}
                    1 => write!(f, "*{v}")?,
                    k => write!(f, "*{v}^{k}")?,
                }
            }
        }
        Ok(())
    }
}

impl Polynomial {
    pub fn zero(vars: &[&str]) -> Self {
        Polynomial {
            vars: vars.iter().map(|s| s.to_string()).collect(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(vars: &[&str], c: i64) -> Self {
        let mut p = Self::zero(vars);
        p.add_term(vec![0; vars.len()], BigRational::from_integer(c.into()));
        p
    }

    /// The coordinate function of variable `name`.
    pub fn var(vars: &[&str], name: &str) -> Result<Self> {
        let idx = vars
            .iter()
            .position(|v| *v == name)
            .ok_or_else(|| SemialgError::UnknownVariable(name.to_string()))?;
        let mut e = vec![0; vars.len()];
        e[idx] = 1;
        let mut p = Self::zero(vars);
        p.add_term(e, BigRational::one());
        Ok(p)
    }

    /// Builds a polynomial from `(exponent, coefficient)` pairs, summing
    /// repeated exponents and dropping zero sums.
    pub fn from_terms<I>(vars: &[String], terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Exponent, BigRational)>,
    {
        let mut p = Polynomial {
            vars: vars.to_vec(),
            terms: BTreeMap::new(),
        };
        for (e, c) in terms {
            if e.len() != vars.len() {
                return Err(SemialgError::Arity {
                    expected: vars.len(),
                    got: e.len(),
                });
            }
            p.add_term(e, c);
        }
        Ok(p)
    }

    /// Convenience constructor with integer coefficients.
    pub fn from_int_terms(vars: &[&str], terms: &[(&[i32], i64)]) -> Self {
        let vars: Vec<String> = vars.iter().map(|s| s.to_string()).collect();
        Self::from_terms(
            &vars,
            terms
                .iter()
                .map(|(e, c)| (e.to_vec(), BigRational::from_integer((*c).into()))),
        )
        .expect("exponent arity matches variable list")
    }

    fn add_term(&mut self, e: Exponent, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let entry = self
            .terms
            .entry(e.clone())
            .or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn arity(&self) -> usize {
        self.vars.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &BigRational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn has_negative_exponent(&self) -> bool {
        self.terms.keys().any(|e| e.iter().any(|&k| k < 0))
    }

    /// Whether variable `idx` occurs with a nonzero exponent in some term.
    pub fn depends_on(&self, idx: usize) -> bool {
        self.terms.keys().any(|e| e[idx] != 0)
    }

    pub fn all_coefficients_positive(&self) -> bool {
        !self.terms.is_empty() && self.terms.values().all(|c| c.is_positive())
    }

    /// Re-expresses the polynomial over a larger variable list.
    pub fn embed(&self, vars: &[String]) -> Result<Self> {
        let map: Vec<usize> = self
            .vars
            .iter()
            .map(|v| {
                vars.iter()
                    .position(|w| w == v)
                    .ok_or_else(|| SemialgError::UnknownVariable(v.clone()))
            })
            .collect::<Result<_>>()?;
        let terms = self.terms.iter().map(|(e, c)| {
            let mut full = vec![0; vars.len()];
            for (i, &k) in e.iter().enumerate() {
                full[map[i]] = k;
            }
            (full, c.clone())
        });
        Self::from_terms(vars, terms)
    }

    fn check_arity(&self, n: usize) -> Result<()> {
        if n != self.vars.len() {
            return Err(SemialgError::Arity {
                expected: self.vars.len(),
                got: n,
            });
        }
        Ok(())
    }

    fn check_positive(&self, x: &[f64]) -> Result<()> {
        for (i, &v) in x.iter().enumerate() {
            let needs = self.terms.keys().any(|e| e[i] < 0);
            if needs && v <= 0.0 {
                return Err(SemialgError::NonPositive { index: i, value: v });
            }
        }
        Ok(())
    }

    /// Floating evaluation with Neumaier-compensated summation of the terms.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        self.check_arity(x.len())?;
        self.check_positive(x)?;
        let mut sum = 0.0f64;
        let mut comp = 0.0f64;
        for (e, c) in &self.terms {
            let mut t = rational_to_f64(c);
            for (xi, &k) in x.iter().zip(e) {
                if k != 0 {
                    t *= xi.powi(k);
                }
            }
            let s = sum + t;
            if sum.abs() >= t.abs() {
                comp += (sum - s) + t;
            } else {
                comp += (t - s) + sum;
            }
            sum = s;
        }
        Ok(sum + comp)
    }

    /// Exact evaluation at a rational point.
    pub fn eval_exact(&self, x: &[BigRational]) -> Result<BigRational> {
        self.check_arity(x.len())?;
        for (i, v) in x.iter().enumerate() {
            if self.terms.keys().any(|e| e[i] < 0) && !v.is_positive() {
                return Err(SemialgError::NonPositive {
                    index: i,
                    value: v.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
        let mut sum = BigRational::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (xi, &k) in x.iter().zip(e) {
                if k > 0 {
                    t *= num_traits::pow(xi.clone(), k as usize);
                } else if k < 0 {
                    t /= num_traits::pow(xi.clone(), (-k) as usize);
                }
            }
            sum += t;
        }
        Ok(sum)
    }

    /// Largest monomial magnitude `|c|·x^e` at a positive point.
    pub fn monomial_scale(&self, x: &[f64]) -> Result<f64> {
        self.check_arity(x.len())?;
        self.check_positive(x)?;
        Ok(self
            .terms
            .iter()
            .map(|(e, c)| {
                let mut t = rational_to_f64(c).abs();
                for (xi, &k) in x.iter().zip(e) {
                    t *= xi.powi(k);
                }
                t
            })
            .fold(0.0, f64::max))
    }

    /// Evaluates at `x = exp(w)` without forming `x`.
    ///
    /// Returns `p(x) / M` together with `log M`, where `M` is the largest
    /// monomial magnitude; the scaled value is in `[-#terms, #terms]`.
    pub fn eval_log_scaled(&self, w: &[f64]) -> Result<Scaled> {
        self.check_arity(w.len())?;
        if self.terms.is_empty() {
            return Ok(Scaled {
                value: 0.0,
                log_scale: f64::NEG_INFINITY,
            });
        }
        let logs: Vec<(f64, f64)> = self
            .terms
            .iter()
            .map(|(e, c)| {
                let c = rational_to_f64(c);
                let l = c.abs().ln() + e.iter().zip(w).map(|(&k, wi)| k as f64 * wi).sum::<f64>();
                (l, c.signum())
            })
            .collect();
        let m = logs.iter().map(|t| t.0).fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        let mut comp = 0.0;
        for (l, s) in logs {
            let t = s * (l - m).exp();
            let next = sum + t;
            if f64::abs(sum) >= t.abs() {
                comp += (sum - next) + t;
            } else {
                comp += (t - next) + sum;
            }
            sum = next;
        }
        Ok(Scaled {
            value: sum + comp,
            log_scale: m,
        })
    }
}

/// Result of [`Polynomial::eval_log_scaled`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Scaled {
    pub value: f64,
    pub log_scale: f64,
}

fn rational_to_f64(c: &BigRational) -> f64 {
    c.to_f64().unwrap_or_else(|| {
        let n = c.numer().to_f64().unwrap_or(f64::NAN);
        let d = c.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

impl std::ops::Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.vars, rhs.vars, "variable lists differ");
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }
}

impl std::ops::Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }
}

impl std::ops::Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self + &(-rhs)
    }
}

impl std::ops::Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.vars, rhs.vars, "variable lists differ");
        let mut out = Polynomial {
            vars: self.vars.clone(),
            terms: BTreeMap::new(),
        };
        for (e1, c1) in &self.terms {
            for (e2, c2) in &rhs.terms {
                let e: Exponent = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, c1 * c2);
            }
        }
        out
    }
}

/// Parses `"3"`, `"-2/5"`, `"1.25"` or `"1e-3"` into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = || SemialgError::BadCoefficient(s.to_string());
    let t = s.trim();
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    let (mantissa, exp) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (t, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(r) => (true, r),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part
        .chars()
        .chain(frac_part.chars())
        .all(|c| c.is_ascii_digit())
    {
        return Err(bad());
    }
    let all = format!("{int_part}{frac_part}");
    let num: BigInt = if all.is_empty() {
        BigInt::zero()
    } else {
        all.parse().map_err(|_| bad())?
    };
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut r = BigRational::from_integer(num);
    if scale >= 0 {
        r *= BigRational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        r /= BigRational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Ok(if neg { -r } else { r })
}

/// Sign relation of a condition `p rel 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Eq,
    Gt,
    Ge,
}

impl Relation {
    pub fn as_str(self) -> &'static str {
        match self {
            Relation::Eq => "=0",
            Relation::Gt => ">0",
            Relation::Ge => ">=0",
        }
    }
}

/// Boolean tree of sign conditions. Kept as a tree: membership is linear in
/// its size.
#[derive(Clone, Debug, PartialEq)]
pub enum Condition {
    Sign(Polynomial, Relation),
    All(Vec<Condition>),
    Any(Vec<Condition>),
}

impl Condition {
    pub fn eq(p: Polynomial) -> Self {
        Condition::Sign(p, Relation::Eq)
    }
    pub fn gt(p: Polynomial) -> Self {
        Condition::Sign(p, Relation::Gt)
    }
    pub fn ge(p: Polynomial) -> Self {
        Condition::Sign(p, Relation::Ge)
    }

    fn for_each_poly<'a>(&'a self, f: &mut impl FnMut(&'a Polynomial)) {
        match self {
            Condition::Sign(p, _) => f(p),
            Condition::All(cs) | Condition::Any(cs) => cs.iter().for_each(|c| c.for_each_poly(f)),
        }
    }
}

/// Default relative tolerance for `=0` conditions.
pub const DEFAULT_EQ_TOL: f64 = 1e-9;

/// A semi-algebraic subset of R^n, optionally restricted to the open
/// positive orthant.
#[derive(Clone, Debug, PartialEq)]
pub struct SemiAlgebraicSet {
    vars: Vec<String>,
    root: Condition,
    orthant: bool,
    solve_hint: Option<usize>,
    eq_tol: f64,
}

impl SemiAlgebraicSet {
    /// All polynomials are re-embedded over `vars`.
    pub fn new(vars: &[&str], root: Condition, orthant: bool) -> Result<Self> {
        let vars: Vec<String> = vars.iter().map(|s| s.to_string()).collect();
        let root = embed_condition(&root, &vars)?;
        Ok(SemiAlgebraicSet {
            vars,
            root,
            orthant,
            solve_hint: None,
            eq_tol: DEFAULT_EQ_TOL,
        })
    }

    /// The whole positive orthant of R^n.
    pub fn orthant(vars: &[&str]) -> Self {
        Self::new(vars, Condition::All(vec![]), true).expect("no polynomials to embed")
    }

    /// Designates a variable to solve equality constraints for.
    pub fn with_solve_hint(mut self, var: &str) -> Result<Self> {
        let idx = self
            .vars
            .iter()
            .position(|v| v == var)
            .ok_or_else(|| SemialgError::UnknownVariable(var.to_string()))?;
        self.solve_hint = Some(idx);
        Ok(self)
    }

    pub fn with_eq_tol(mut self, tol: f64) -> Self {
        self.eq_tol = tol;
        self
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }
    pub fn ambient_dim(&self) -> usize {
        self.vars.len()
    }
    pub fn root(&self) -> &Condition {
        &self.root
    }
    pub fn is_orthant(&self) -> bool {
        self.orthant
    }
    pub fn solve_hint(&self) -> Option<usize> {
        self.solve_hint
    }
    pub fn eq_tol(&self) -> f64 {
        self.eq_tol
    }

    pub fn polynomials(&self) -> Vec<&Polynomial> {
        let mut out = Vec::new();
        self.root.for_each_poly(&mut |p| out.push(p));
        out
    }

    /// Pointwise membership in linear coordinates.
    pub fn contains(&self, x: &[f64]) -> Result<bool> {
        if x.len() != self.vars.len() {
            return Err(SemialgError::Arity {
                expected: self.vars.len(),
                got: x.len(),
            });
        }
        if self.orthant && x.iter().any(|&v| !(v > 0.0)) {
            return Ok(false);
        }
        self.holds(&self.root, &|p: &Polynomial| {
            let v = p.eval(x)?;
            let s = p.monomial_scale(x)?;
            Ok((v, s))
        })
    }

    /// Membership of `exp(w)`; only meaningful on the orthant.
    pub fn contains_log(&self, w: &[f64]) -> Result<bool> {
        if w.len() != self.vars.len() {
            return Err(SemialgError::Arity {
                expected: self.vars.len(),
                got: w.len(),
            });
        }
        if w.iter().any(|v| !v.is_finite()) {
            return Ok(false);
        }
        self.holds(&self.root, &|p: &Polynomial| {
            let s = p.eval_log_scaled(w)?;
            Ok((s.value, 1.0))
        })
    }

    fn holds(
        &self,
        c: &Condition,
        eval: &dyn Fn(&Polynomial) -> Result<(f64, f64)>,
    ) -> Result<bool> {
        Ok(match c {
            Condition::Sign(p, rel) => {
                let (v, scale) = eval(p)?;
                match rel {
                    Relation::Eq => v.abs() <= self.eq_tol * scale,
                    Relation::Gt => v > 0.0,
                    Relation::Ge => v >= 0.0,
                }
            }
            Condition::All(cs) => {
                for c in cs {
                    if !self.holds(c, eval)? {
                        return Ok(false);
                    }
                }
                true
            }
            Condition::Any(cs) => {
                for c in cs {
                    if self.holds(c, eval)? {
                        return Ok(true);
                    }
                }
                false
            }
        })
    }

    /// Equalities that must hold on one randomly chosen `Any` branch.
    pub(crate) fn mandatory_equalities<R: Rng>(&self, rng: &mut R) -> Vec<&Polynomial> {
        fn walk<'a, R: Rng>(c: &'a Condition, rng: &mut R, out: &mut Vec<&'a Polynomial>) {
            match c {
                Condition::Sign(p, Relation::Eq) => out.push(p),
                Condition::Sign(..) => {}
                Condition::All(cs) => cs.iter().for_each(|c| walk(c, rng, out)),
                Condition::Any(cs) if !cs.is_empty() => {
                    let i = rng.gen_range(0..cs.len());
                    walk(&cs[i], rng, out)
                }
                Condition::Any(_) => {}
            }
        }
        let mut out = Vec::new();
        walk(&self.root, rng, &mut out);
        out
    }
}

fn embed_condition(c: &Condition, vars: &[String]) -> Result<Condition> {
    Ok(match c {
        Condition::Sign(p, r) => Condition::Sign(p.embed(vars)?, *r),
        Condition::All(cs) => Condition::All(
            cs.iter()
                .map(|c| embed_condition(c, vars))
                .collect::<Result<_>>()?,
        ),
        Condition::Any(cs) => Condition::Any(
            cs.iter()
                .map(|c| embed_condition(c, vars))
                .collect::<Result<_>>()?,
        ),
    })
}

/// Sign-change roots of `f` on `[lo, hi]`, refined by bisection.
///
/// The scan grid is `lo + k·step` and additionally contains `0` when it lies
/// inside the interval, so that roots clustered at `w = 0` (points with a
/// coordinate near 1) are bracketed.
pub fn scan_roots(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, cells: usize) -> Vec<f64> {
    let mut grid: Vec<f64> = (0..=cells)
        .map(|k| lo + (hi - lo) * k as f64 / cells as f64)
        .collect();
    if lo < 0.0 && hi > 0.0 {
        grid.push(0.0);
        grid.sort_by(f64::total_cmp);
        grid.dedup();
    }
    let mut roots = Vec::new();
    let mut prev = (grid[0], f(grid[0]));
    if prev.1 == 0.0 {
        roots.push(prev.0);
    }
    for &t in &grid[1..] {
        let v = f(t);
        if v == 0.0 {
            roots.push(t);
        } else if prev.1 != 0.0
            && prev.1.signum() != v.signum()
            && v.is_finite()
            && prev.1.is_finite()
        {
            roots.push(bisect(f, prev.0, t, prev.1));
        }
        prev = (t, v);
    }
    roots
}

fn bisect(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64, fa: f64) -> f64 {
    let sa = fa.signum();
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if fm.signum() == sa {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Per-coordinate positive interval `[lo, hi]`.
pub type SampleBox = Vec<(f64, f64)>;

/// Tuning for [`sample`].
#[derive(Clone, Debug)]
pub struct SampleOptions {
    pub max_attempts: usize,
    /// Grid cells used when scanning a line for roots.
    pub scan_cells: usize,
    /// Log-range searched for a hinted variable not covered by the box.
    pub free_log_range: f64,
    pub sweeps: usize,
}

impl Default for SampleOptions {
    fn default() -> Self {
        SampleOptions {
            max_attempts: 20_000,
            scan_cells: 400,
            free_log_range: 60.0,
            sweeps: 30,
        }
    }
}

/// Tries to move `w` (log coordinates) onto every polynomial of `eqs` by
/// cyclic coordinate root solving. `ranges[i]` bounds the log of coordinate
/// `i`; `assign[j]` is the variable solved for equation `j`.
pub(crate) fn solve_equalities<R: Rng>(
    eqs: &[&Polynomial],
    assign: &[usize],
    w: &mut [f64],
    ranges: &[(f64, f64)],
    cells: usize,
    sweeps: usize,
    tol: f64,
    rng: &mut R,
) -> bool {
    for sweep in 0..sweeps.max(1) {
        for (p, &var) in eqs.iter().zip(assign) {
            let base = w.to_vec();
            let f = |t: f64| {
                let mut pt = base.clone();
                pt[var] = t;
                p.eval_log_scaled(&pt).map(|s| s.value).unwrap_or(f64::NAN)
            };
            let roots = scan_roots(&f, ranges[var].0, ranges[var].1, cells);
            if roots.is_empty() {
                return false;
            }
            w[var] = if sweep == 0 {
                roots[rng.gen_range(0..roots.len())]
            } else {
                *roots
                    .iter()
                    .min_by(|a, b| (*a - base[var]).abs().total_cmp(&(*b - base[var]).abs()))
                    .expect("nonempty")
            };
        }
        let ok = eqs.iter().all(|p| {
            p.eval_log_scaled(w)
                .map(|s| s.value.abs() <= tol)
                .unwrap_or(false)
        });
        if ok {
            return true;
        }
        if eqs.len() == 1 {
            return false;
        }
    }
    false
}

/// Greedy assignment of a distinct variable to each equation, preferring
/// `hint` and otherwise picking at random among variables the equation uses.
pub(crate) fn assign_variables<R: Rng>(
    eqs: &[&Polynomial],
    n: usize,
    hint: Option<usize>,
    rng: &mut R,
) -> Option<Vec<usize>> {
    let mut used = vec![false; n];
    let mut out = Vec::with_capacity(eqs.len());
    for p in eqs {
        let cands: Vec<usize> = (0..n).filter(|&i| !used[i] && p.depends_on(i)).collect();
        if cands.is_empty() {
            return None;
        }
        let pick = match hint {
            Some(h) if cands.contains(&h) => h,
            _ => cands[rng.gen_range(0..cands.len())],
        };
        used[pick] = true;
        out.push(pick);
    }
    Some(out)
}

/// Draws `n` points of `set` inside `bx`, deterministically for `seed`.
///
/// `bx` covers every coordinate, or every coordinate except the solve-hint
/// variable, which is then searched over `exp(±free_log_range)`. Equality
/// constraints are met by root solving along coordinate lines; everything
/// else by rejection.
pub fn sample(
    set: &SemiAlgebraicSet,
    bx: &[(f64, f64)],
    n: usize,
    seed: u64,
    opts: &SampleOptions,
) -> Result<Vec<Vec<f64>>> {
    let dim = set.ambient_dim();
    let hint = set.solve_hint();
    let ranges: Vec<(f64, f64)> = if bx.len() == dim {
        bx.to_vec()
    } else if bx.len() + 1 == dim && hint.is_some() {
        let h = hint.expect("checked");
        let mut r = bx.to_vec();
        let f = opts.free_log_range;
        r.insert(h, (f64::exp(-f), f64::exp(f)));
        r
    } else {
        return Err(SemialgError::BadBox(format!(
            "box has {} intervals for a {}-dimensional set",
            bx.len(),
            dim
        )));
    };
    for &(lo, hi) in &ranges {
        if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
            return Err(SemialgError::BadBox(format!(
                "interval [{lo}, {hi}] not positive"
            )));
        }
    }
    let log_ranges: Vec<(f64, f64)> = ranges.iter().map(|&(a, b)| (a.ln(), b.ln())).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    let mut attempts = 0;
    while out.len() < n {
        if attempts >= opts.max_attempts {
            return Err(SemialgError::Budget {
                attempts,
                accepted: out.len(),
                requested: n,
                rate: out.len() as f64 / attempts.max(1) as f64,
            });
        }
        attempts += 1;
        let mut w: Vec<f64> = ranges
            .iter()
            .map(|&(a, b)| {
                if a == b {
                    a.ln()
                } else {
                    rng.gen_range(a..=b).ln()
                }
            })
            .collect();
        let eqs = set.mandatory_equalities(&mut rng);
        if !eqs.is_empty() {
            let Some(assign) = assign_variables(&eqs, dim, hint, &mut rng) else {
                continue;
            };
            let tol = set.eq_tol() * 1e-3;
            if !solve_equalities(
                &eqs,
                &assign,
                &mut w,
                &log_ranges,
                opts.scan_cells,
                opts.sweeps,
                tol,
                &mut rng,
            ) {
                continue;
            }
        }
        let x: Vec<f64> = w.iter().map(|v| v.exp()).collect();
        if x.iter()
            .zip(&ranges)
            .any(|(v, &(a, b))| *v < a * (1.0 - 1e-12) || *v > b * (1.0 + 1e-12))
        {
            continue;
        }
        if set.contains(&x)? {
            out.push(x);
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// JSON schema

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolyJson {
    pub vars: Vec<String>,
    pub terms: Vec<TermJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TermJson {
    pub exp: Vec<i32>,
    pub coef: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ConditionJson {
    All { all: Vec<ConditionJson> },
    Any { any: Vec<ConditionJson> },
    Sign { sign: SignJson },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SignJson {
    pub poly: PolyJson,
    pub rel: String,
}

/// Top-level set document: `{"vars":[..], "set": <tree>, "orthant": true,
/// "solve_for": "z", "eq_tol": 1e-9}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SetJson {
    pub vars: Vec<String>,
    pub set: ConditionJson,
    #[serde(default = "default_true")]
    pub orthant: bool,
    #[serde(default)]
    pub solve_for: Option<String>,
    #[serde(default)]
    pub eq_tol: Option<f64>,
}

fn default_true() -> bool {
    true
}

impl TryFrom<&PolyJson> for Polynomial {
    type Error = SemialgError;
    fn try_from(j: &PolyJson) -> Result<Self> {
        let terms = j
            .terms
            .iter()
            .map(|t| Ok((t.exp.clone(), parse_rational(&t.coef)?)))
            .collect::<Result<Vec<_>>>()?;
        Polynomial::from_terms(&j.vars, terms)
    }
}

impl From<&Polynomial> for PolyJson {
    fn from(p: &Polynomial) -> Self {
        PolyJson {
            vars: p.vars.clone(),
            terms: p
                .terms
                .iter()
                .map(|(e, c)| TermJson {
                    exp: e.clone(),
                    coef: c.to_string(),
                })
                .collect(),
        }
    }
}

impl TryFrom<&ConditionJson> for Condition {
    type Error = SemialgError;
    fn try_from(j: &ConditionJson) -> Result<Self> {
        Ok(match j {
            ConditionJson::All { all } => {
                Condition::All(all.iter().map(Condition::try_from).collect::<Result<_>>()?)
            }
            ConditionJson::Any { any } => {
                Condition::Any(any.iter().map(Condition::try_from).collect::<Result<_>>()?)
            }
            ConditionJson::Sign { sign } => {
                let p = Polynomial::try_from(&sign.poly)?;
                match sign.rel.replace(' ', "").as_str() {
                    "=0" | "==0" => Condition::Sign(p, Relation::Eq),
                    ">0" => Condition::Sign(p, Relation::Gt),
                    ">=0" => Condition::Sign(p, Relation::Ge),
                    "<0" => Condition::Sign(-&p, Relation::Gt),
                    "<=0" => Condition::Sign(-&p, Relation::Ge),
                    other => return Err(SemialgError::BadRelation(other.to_string())),
                }
            }
        })
    }
}

impl TryFrom<&SetJson> for SemiAlgebraicSet {
    type Error = SemialgError;
    fn try_from(j: &SetJson) -> Result<Self> {
        if j.vars.is_empty() {
            return Err(SemialgError::Schema(
                "set needs at least one variable".into(),
            ));
        }
        let root = Condition::try_from(&j.set)?;
        let vars: Vec<&str> = j.vars.iter().map(String::as_str).collect();
        let mut s = SemiAlgebraicSet::new(&vars, root, j.orthant)?;
        if let Some(h) = &j.solve_for {
            s = s.with_solve_hint(h)?;
        }
        if let Some(t) = j.eq_tol {
            s = s.with_eq_tol(t);
        }
        Ok(s)
    }
}

/// `x^2 + y^2 + z^2 - xyz`.
pub fn markov_polynomial() -> Polynomial {
    Polynomial::from_int_terms(
        &["x", "y", "z"],
        &[
            (&[2, 0, 0], 1),
            (&[0, 2, 0], 1),
            (&[0, 0, 2], 1),
            (&[1, 1, 1], -1),
        ],
    )
}

/// `z - x^2 - y^2 + 2y - 1`, i.e. `z - x^2 - (y-1)^2`.
pub fn plane_polynomial() -> Polynomial {
    Polynomial::from_int_terms(
        &["x", "y", "z"],
        &[
            (&[0, 0, 1], 1),
            (&[2, 0, 0], -1),
            (&[0, 2, 0], -1),
            (&[0, 1, 0], 2),
            (&[0, 0, 0], -1),
        ],
    )
}

/// `{z = x^2 + (y-1)^2}` in the positive orthant of R^3.
pub fn plane_set() -> SemiAlgebraicSet {
    SemiAlgebraicSet::new(&["x", "y", "z"], Condition::eq(plane_polynomial()), true)
        .expect("variables match")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    #[test]
    fn markov_vanishes_at_three_three_three() {
        let p = markov_polynomial();
        assert_eq!(p.eval(&[3.0, 3.0, 3.0]).unwrap(), 0.0);
        assert_eq!(p.eval_exact(&[q(3), q(3), q(3)]).unwrap(), q(0));
    }

    #[test]
    fn constant_and_plane_values() {
        let one = Polynomial::constant(&["x", "y"], 1);
        assert_eq!(one.eval(&[7.5, 0.1]).unwrap(), 1.0);
        assert_eq!(plane_polynomial().eval(&[1.0, 1.0, 1.0]).unwrap(), 0.0);
    }

    #[test]
    fn eval_errors() {
        let p = markov_polynomial();
        assert_eq!(
            p.eval(&[1.0, 2.0]),
            Err(SemialgError::Arity {
                expected: 3,
                got: 2
            })
        );
        let inv = Polynomial::from_int_terms(&["x"], &[(&[-1], 1)]);
        assert!(matches!(
            inv.eval(&[0.0]),
            Err(SemialgError::NonPositive { .. })
        ));
        assert!(inv.eval(&[-1.0]).is_err());
        assert_eq!(inv.eval(&[4.0]).unwrap(), 0.25);
    }

    #[test]
    fn exact_laurent_evaluation() {
        let p = Polynomial::from_int_terms(&["x", "y"], &[(&[-1, 2], 3), (&[0, 0], -1)]);
        let v = p
            .eval_exact(&[q(2), BigRational::new(1.into(), 3.into())])
            .unwrap();
        assert_eq!(v, BigRational::new((-5).into(), 6.into()));
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_rational("3").unwrap(), q(3));
        assert_eq!(
            parse_rational("-2/4").unwrap(),
            BigRational::new((-1).into(), 2.into())
        );
        assert_eq!(
            parse_rational("1.25").unwrap(),
            BigRational::new(5.into(), 4.into())
        );
        assert_eq!(parse_rational("2e3").unwrap(), q(2000));
        assert_eq!(
            parse_rational("-.5").unwrap(),
            BigRational::new((-1).into(), 2.into())
        );
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
    }

    #[test]
    fn log_scaled_matches_linear() {
        let p = plane_polynomial();
        let x = [2.0, 3.0, 5.0];
        let w: Vec<f64> = x.iter().map(|v: &f64| v.ln()).collect();
        let s = p.eval_log_scaled(&w).unwrap();
        let lin = p.eval(&x).unwrap();
        assert!((s.value * s.log_scale.exp() - lin).abs() < 1e-12);
        // no overflow far out
        let s = markov_polynomial()
            .eval_log_scaled(&[300.0, 300.0, 300.0])
            .unwrap();
        assert!(s.value.is_finite() && s.value < 0.0);
    }

    #[test]
    fn membership() {
        let s = plane_set();
        assert!(s.contains(&[1.0, 1.0, 1.0]).unwrap());
        assert!(!s.contains(&[1.0, 1.0, 2.0]).unwrap());
        let o = SemiAlgebraicSet::orthant(&["a", "b", "c", "d"]);
        assert!(o.contains(&[1.0; 4]).unwrap());
        assert!(!o.contains(&[1.0, -1.0, 1.0, 1.0]).unwrap());
        assert!(matches!(
            s.contains(&[1.0]),
            Err(SemialgError::Arity { .. })
        ));
    }

    #[test]
    fn any_tree_membership() {
        let x = Polynomial::var(&["x"], "x").unwrap();
        let c = Polynomial::constant(&["x"], 1);
        let set = SemiAlgebraicSet::new(
            &["x"],
            Condition::Any(vec![
                Condition::gt(&c - &x),
                Condition::gt(&x - &Polynomial::constant(&["x"], 3)),
            ]),
            true,
        )
        .unwrap();
        assert!(set.contains(&[0.5]).unwrap());
        assert!(!set.contains(&[2.0]).unwrap());
        assert!(set.contains(&[4.0]).unwrap());
    }

    #[test]
    fn sample_orthant_box() {
        let o = SemiAlgebraicSet::orthant(&["x", "y"]);
        let pts = sample(
            &o,
            &[(1.0, 2.0), (1.0, 2.0)],
            4,
            7,
            &SampleOptions::default(),
        )
        .unwrap();
        assert_eq!(pts.len(), 4);
        for p in &pts {
            assert!(p.iter().all(|v| (1.0..=2.0).contains(v)));
        }
    }

    #[test]
    fn sample_plane_with_hint_solves_z() {
        let s = plane_set().with_solve_hint("z").unwrap();
        let pts = sample(
            &s,
            &[(1.0, 10.0), (1.0, 10.0)],
            10,
            3,
            &SampleOptions::default(),
        )
        .unwrap();
        assert_eq!(pts.len(), 10);
        for p in &pts {
            let z = p[0] * p[0] + (p[1] - 1.0).powi(2);
            assert!((p[2] - z).abs() <= 1e-9 * z, "{p:?}");
            assert!(s.contains(p).unwrap());
        }
    }

    #[test]
    fn sample_empty_set_reports_budget() {
        let x = Polynomial::var(&["x"], "x").unwrap();
        let s = SemiAlgebraicSet::new(&["x"], Condition::gt(-&x), true).unwrap();
        let opts = SampleOptions {
            max_attempts: 500,
            ..Default::default()
        };
        match sample(&s, &[(0.5, 2.0)], 3, 1, &opts) {
            Err(SemialgError::Budget {
                attempts, accepted, ..
            }) => {
                assert_eq!(attempts, 500);
                assert_eq!(accepted, 0);
            }
            other => panic!("expected budget failure, got {other:?}"),
        }
    }

    #[test]
    fn sample_singleton_by_coordinate_solving() {
        let vars = ["x", "y"];
        let x = Polynomial::var(&vars, "x").unwrap();
        let y = Polynomial::var(&vars, "y").unwrap();
        let one = Polynomial::constant(&vars, 1);
        let s = SemiAlgebraicSet::new(
            &vars,
            Condition::All(vec![Condition::eq(&x - &one), Condition::eq(&y - &one)]),
            true,
        )
        .unwrap();
        let pts = sample(
            &s,
            &[(0.5, 2.0), (0.5, 2.0)],
            3,
            11,
            &SampleOptions::default(),
        )
        .unwrap();
        for p in pts {
            assert!((p[0] - 1.0).abs() < 1e-9 && (p[1] - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn json_round_trip_set() {
        let doc = r#"{"vars":["x","y","z"],"solve_for":"z","set":{"all":[
            {"sign":{"poly":{"vars":["x","y","z"],"terms":[
              {"exp":[0,0,1],"coef":"1"},{"exp":[2,0,0],"coef":"-1"},{"exp":[0,2,0],"coef":"-1"},
              {"exp":[0,1,0],"coef":"2"},{"exp":[0,0,0],"coef":"-1"}]},"rel":"=0"}},
            {"sign":{"poly":{"vars":["x"],"terms":[{"exp":[1],"coef":"1/2"}]},"rel":">0"}}]}}"#;
        let j: SetJson = serde_json::from_str(doc).unwrap();
        let s = SemiAlgebraicSet::try_from(&j).unwrap();
        assert_eq!(s.solve_hint(), Some(2));
        assert!(s.contains(&[1.0, 1.0, 1.0]).unwrap());
        let pj = PolyJson::from(&plane_polynomial());
        assert_eq!(Polynomial::try_from(&pj).unwrap(), plane_polynomial());
    }

    #[test]
    fn less_than_relation_negates() {
        let doc = r#"{"vars":["x"],"set":{"sign":{"poly":{"vars":["x"],"terms":[{"exp":[1],"coef":"1"}]},"rel":"<0"}}}"#;
        let j: SetJson = serde_json::from_str(doc).unwrap();
        let s = SemiAlgebraicSet::try_from(&j).unwrap();
        assert!(!s.contains(&[1.0]).unwrap());
    }

    fn small_poly() -> impl Strategy<Value = Polynomial> {
        prop::collection::vec(((-2i32..=3, -2i32..=3), -9i64..=9), 1..6).prop_map(|ts| {
            let vars = vec!["x".to_string(), "y".to_string()];
            Polynomial::from_terms(
                &vars,
                ts.into_iter()
                    .map(|((a, b), c)| (vec![a, b], BigRational::from_integer(c.into()))),
            )
            .unwrap()
        })
    }

    proptest! {
        #[test]
        fn eval_is_linear_in_coefficients(p in small_poly(), q in small_poly(), x in 0.2f64..5.0, y in 0.2f64..5.0) {
            let pt = [x, y];
            let sum = (&p + &q).eval(&pt).unwrap();
            let sep = p.eval(&pt).unwrap() + q.eval(&pt).unwrap();
            let scale = p.monomial_scale(&pt).unwrap().max(q.monomial_scale(&pt).unwrap()).max(1.0);
            prop_assert!((sum - sep).abs() <= 1e-12 * scale);
        }

        #[test]
        fn sampling_is_deterministic(seed in 0u64..1000) {
            let s = plane_set().with_solve_hint("z").unwrap();
            let b = [(1.0, 3.0), (0.5, 3.0)];
            let o = SampleOptions::default();
            let a = sample(&s, &b, 3, seed, &o).unwrap();
            let c = sample(&s, &b, 3, seed, &o).unwrap();
            prop_assert_eq!(a.iter().flatten().map(|v| v.to_bits()).collect::<Vec<_>>(),
                            c.iter().flatten().map(|v| v.to_bits()).collect::<Vec<_>>());
            for p in &a {
                prop_assert!(s.contains(p).unwrap());
            }
        }
    }
}
