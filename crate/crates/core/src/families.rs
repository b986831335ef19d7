//! Families of positive functions, their log maps, and boundary points as
//! projectivised limits of log-images along paths.
//!
//! A family is generic over its point type. Every member returns the natural
//! log of its (positive) value, so paths deep into the boundary never
//! overflow.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::logmap::{self, LogParams, LogmapError};
use crate::semialg::{Polynomial, SemiAlgebraicSet};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum FamilyError {
    #[error("member {member:?} is not positive at this point ({detail})")]
    NonPositive { member: String, detail: String },
    #[error("t0 = {0} is outside (0, 1)")]
    BadBase(f64),
    #[error("path stayed bounded: largest log-norm {max_norm} < {radius} after {steps} steps")]
    NoEscape {
        steps: usize,
        max_norm: f64,
        radius: f64,
    },
    #[error("no convergence within {steps} steps (last angles {last_angles:?})")]
    NotConverged { steps: usize, last_angles: Vec<f64> },
    #[error("path point {step} is outside the underlying set")]
    OffSet { step: usize },
    #[error("unknown member {0:?}")]
    UnknownMember(String),
    #[error("duplicate member name {0:?}")]
    DuplicateName(String),
    #[error("coefficients of a push-forward expression must be positive")]
    NonPositiveCoefficient,
    #[error("substitution is not injective on member labels ({0:?})")]
    NotBijective(String),
    #[error("empty family")]
    Empty,
    #[error(transparent)]
    Logmap(#[from] LogmapError),
}

type Result<T> = std::result::Result<T, FamilyError>;

/// Natural log of a member's value at a point.
pub type LogEvaluator<P> = Arc<dyn Fn(&P) -> std::result::Result<f64, String> + Send + Sync>;

pub struct Member<P> {
    pub name: String,
    /// Group-word tag used by [`relabel_by_action`].
    pub label: Option<String>,
    eval: LogEvaluator<P>,
}

impl<P> Clone for Member<P> {
    fn clone(&self) -> Self {
        Member {
            name: self.name.clone(),
            label: self.label.clone(),
            eval: Arc::clone(&self.eval),
        }
    }
}

impl<P> fmt::Debug for Member<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Member")
            .field("name", &self.name)
            .field("label", &self.label)
            .finish_non_exhaustive()
    }
}

impl<P> Member<P> {
    pub fn from_log<F>(name: impl Into<String>, f: F) -> Self
    where
        F: Fn(&P) -> std::result::Result<f64, String> + Send + Sync + 'static,
    {
        Member {
            name: name.into(),
            label: None,
            eval: Arc::new(f),
        }
    }

    pub fn labelled(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn log_value(&self, p: &P) -> Result<f64> {
        match (self.eval)(p) {
            Ok(v) if !v.is_nan() && v != f64::NEG_INFINITY => Ok(v),
            Ok(v) => Err(FamilyError::NonPositive {
                member: self.name.clone(),
                detail: format!("log value {v}"),
            }),
            Err(detail) => Err(FamilyError::NonPositive {
                member: self.name.clone(),
                detail,
            }),
        }
    }
}

/// Point in the positive orthant stored by its natural logs.
#[derive(Clone, Debug, PartialEq)]
pub struct LogPoint(pub Vec<f64>);

impl LogPoint {
    pub fn from_coords(x: &[f64]) -> Self {
        LogPoint(x.iter().map(|v| v.ln()).collect())
    }

    pub fn coords(&self) -> Vec<f64> {
        self.0.iter().map(|w| w.exp()).collect()
    }
}

pub struct FunctionFamily<P> {
    members: Vec<Member<P>>,
}

impl<P> Clone for FunctionFamily<P> {
    fn clone(&self) -> Self {
        FunctionFamily {
            members: self.members.clone(),
        }
    }
}

impl<P> fmt::Debug for FunctionFamily<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list()
            .entries(self.members.iter().map(|m| &m.name))
            .finish()
    }
}

impl<P> FunctionFamily<P> {
    pub fn new(members: Vec<Member<P>>) -> Result<Self> {
        if members.is_empty() {
            return Err(FamilyError::Empty);
        }
        let mut seen = BTreeSet::new();
        for m in &members {
            if !seen.insert(m.name.clone()) {
                return Err(FamilyError::DuplicateName(m.name.clone()));
            }
        }
        Ok(FunctionFamily { members })
    }

    pub fn members(&self) -> &[Member<P>] {
        &self.members
    }

    pub fn names(&self) -> Vec<String> {
        self.members.iter().map(|m| m.name.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Subfamily with the given names, in the given order.
    pub fn select(&self, names: &[&str]) -> Result<Self> {
        let members = names
            .iter()
            .map(|n| {
                self.members
                    .iter()
                    .find(|m| m.name == *n)
                    .cloned()
                    .ok_or_else(|| FamilyError::UnknownMember(n.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        FunctionFamily::new(members)
    }

    pub fn log_values(&self, p: &P) -> Result<Vec<f64>> {
        self.members.iter().map(|m| m.log_value(p)).collect()
    }
}

impl FunctionFamily<LogPoint> {
    /// Members given by polynomials in the coordinates of the orthant.
    pub fn polynomials(members: &[(&str, Polynomial)]) -> Result<Self> {
        FunctionFamily::new(
            members
                .iter()
                .map(|(name, p)| {
                    let p = p.clone();
                    Member::from_log(*name, move |x: &LogPoint| {
                        let s = p.eval_log_scaled(&x.0).map_err(|e| e.to_string())?;
                        if s.value > 0.0 {
                            Ok(s.value.ln() + s.log_scale)
                        } else {
                            Err(format!("value {}·e^{}", s.value, s.log_scale))
                        }
                    })
                })
                .collect(),
        )
    }
}

/// `E_F(x)`: member values.
pub fn e_map<P>(f: &FunctionFamily<P>, x: &P) -> Result<Vec<f64>> {
    Ok(f.log_values(x)?.into_iter().map(f64::exp).collect())
}

/// `L_F(x) = Log_{1/t0}(E_F(x))`.
pub fn l_map<P>(f: &FunctionFamily<P>, x: &P, t0: f64) -> Result<Vec<f64>> {
    if !(t0 > 0.0 && t0 < 1.0) {
        return Err(FamilyError::BadBase(t0));
    }
    let base = -t0.ln();
    Ok(f.log_values(x)?.into_iter().map(|v| v / base).collect())
}

/// Unit vector indexed by member names.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryDirection {
    pub names: Vec<String>,
    pub coords: Vec<f64>,
}

impl BoundaryDirection {
    /// `None` for the zero vector.
    pub fn new(names: Vec<String>, v: &[f64]) -> Option<Self> {
        let u = logmap::normalize(v)?;
        Some(BoundaryDirection { names, coords: u })
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.coords[i])
    }

    /// Restriction to `names`, renormalised; `None` if it vanishes.
    pub fn project(&self, names: &[String]) -> Result<Option<BoundaryDirection>> {
        let v = names
            .iter()
            .map(|n| {
                self.get(n)
                    .ok_or_else(|| FamilyError::UnknownMember(n.clone()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(BoundaryDirection::new(names.to_vec(), &v))
    }

    /// Angle to `other`, matching coordinates by name.
    pub fn angle(&self, other: &BoundaryDirection) -> Result<f64> {
        let o = other.project(&self.names)?.ok_or(FamilyError::Empty)?;
        Ok(logmap::angle(&self.coords, &o.coords))
    }
}

/// How the limit direction is read off the iterates `l_k`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum LimitEstimator {
    /// `l_k / |l_k|`.
    #[default]
    Ratio,
    /// Direction of `l_k - l_{k-1}`; same limit whenever the increments
    /// converge in direction, and much faster on paths with linear growth.
    Increment,
}

type Membership<P> = Arc<dyn Fn(&P) -> bool + Send + Sync>;

pub struct PathSpec<P> {
    point: Arc<dyn Fn(usize) -> P + Send + Sync>,
    membership: Option<Membership<P>>,
    pub start: usize,
    pub max_steps: usize,
    pub tol_proj: f64,
    /// Log-norm (base `1/t0`) the path must exceed before convergence is
    /// tested.
    pub escape_radius: f64,
    pub estimator: LimitEstimator,
}

impl<P> Clone for PathSpec<P> {
    fn clone(&self) -> Self {
        PathSpec {
            point: Arc::clone(&self.point),
            membership: self.membership.clone(),
            start: self.start,
            max_steps: self.max_steps,
            tol_proj: self.tol_proj,
            escape_radius: self.escape_radius,
            estimator: self.estimator,
        }
    }
}

pub const DEFAULT_TOL_PROJ: f64 = 1e-3;
pub const DEFAULT_MAX_STEPS: usize = 200;
pub const DEFAULT_ESCAPE_RADIUS: f64 = 10.0;

impl<P: 'static> PathSpec<P> {
    pub fn from_fn<F>(f: F) -> Self
    where
        F: Fn(usize) -> P + Send + Sync + 'static,
    {
        PathSpec {
            point: Arc::new(f),
            membership: None,
            start: 1,
            max_steps: DEFAULT_MAX_STEPS,
            tol_proj: DEFAULT_TOL_PROJ,
            escape_radius: DEFAULT_ESCAPE_RADIUS,
            estimator: LimitEstimator::Ratio,
        }
    }

    /// Finite list of points; `max_steps` is the list length.
    pub fn explicit(points: Vec<P>) -> Self
    where
        P: Clone + Send + Sync,
    {
        let n = points.len();
        let points = Arc::new(points);
        let mut p = PathSpec::from_fn(move |k| points[k.min(n - 1)].clone());
        p.start = 0;
        p.max_steps = n;
        p
    }

    pub fn with_membership<F>(mut self, f: F) -> Self
    where
        F: Fn(&P) -> bool + Send + Sync + 'static,
    {
        self.membership = Some(Arc::new(f));
        self
    }

    pub fn with_estimator(mut self, e: LimitEstimator) -> Self {
        self.estimator = e;
        self
    }

    pub fn with_max_steps(mut self, n: usize) -> Self {
        self.max_steps = n;
        self
    }

    pub fn with_tol_proj(mut self, t: f64) -> Self {
        self.tol_proj = t;
        self
    }

    pub fn with_escape_radius(mut self, r: f64) -> Self {
        self.escape_radius = r;
        self
    }

    pub fn with_start(mut self, k: usize) -> Self {
        self.start = k;
        self
    }
}

impl<P> PathSpec<P> {
    pub fn point(&self, k: usize) -> P {
        (self.point)(k)
    }
}

impl PathSpec<LogPoint> {
    /// Restricts emitted points to `set`.
    pub fn on_set(self, set: &SemiAlgebraicSet) -> Self {
        let set = set.clone();
        self.with_membership(move |p: &LogPoint| set.contains_log(&p.0).unwrap_or(false))
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct LimitDiagnostics {
    pub steps: usize,
    /// `|l_k|` per step.
    pub norms: Vec<f64>,
    /// Angle between consecutive direction iterates.
    pub angles: Vec<f64>,
    pub escaped_at: Option<usize>,
}

/// Projectivised limit of `l_map(F, x_k)` along `path`.
pub fn boundary_limit<P>(
    f: &FunctionFamily<P>,
    path: &PathSpec<P>,
    t0: f64,
) -> Result<(BoundaryDirection, LimitDiagnostics)> {
    let mut diag = LimitDiagnostics::default();
    let mut prev_l: Option<Vec<f64>> = None;
    let mut iterates: Vec<Vec<f64>> = Vec::new();
    let mut max_norm: f64 = 0.0;
    for step in 0..path.max_steps {
        let k = path.start + step;
        let x = path.point(k);
        if let Some(m) = &path.membership {
            if !m(&x) {
                return Err(FamilyError::OffSet { step: k });
            }
        }
        let l = l_map(f, &x, t0)?;
        let n = logmap::norm(&l);
        diag.steps = step + 1;
        diag.norms.push(n);
        max_norm = max_norm.max(n);
        let raw = match path.estimator {
            LimitEstimator::Ratio => Some(l.clone()),
            LimitEstimator::Increment => prev_l
                .as_ref()
                .map(|p| l.iter().zip(p).map(|(a, b)| a - b).collect()),
        };
        prev_l = Some(l);
        let Some(dir) = raw.as_deref().and_then(logmap::normalize) else {
            continue;
        };
        if let Some(last) = iterates.last() {
            diag.angles.push(logmap::angle(last, &dir));
        }
        iterates.push(dir);
        if n < path.escape_radius {
            continue;
        }
        diag.escaped_at.get_or_insert(k);
        let m = iterates.len();
        if m >= 3 {
            let tail = &iterates[m - 3..];
            let ok = (0..3)
                .all(|i| (i + 1..3).all(|j| logmap::angle(&tail[i], &tail[j]) <= path.tol_proj));
            if ok {
                let d = BoundaryDirection {
                    names: f.names(),
                    coords: tail[2].clone(),
                };
                return Ok((d, diag));
            }
        }
    }
    if diag.escaped_at.is_none() {
        return Err(FamilyError::NoEscape {
            steps: diag.steps,
            max_norm,
            radius: path.escape_radius,
        });
    }
    let tail = diag.angles.len().saturating_sub(3);
    Err(FamilyError::NotConverged {
        steps: diag.steps,
        last_angles: diag.angles[tail..].to_vec(),
    })
}

/// `max_e <e, d>` over the monomials of `expr`, whose variables are member
/// names.
pub fn push_forward_direction(expr: &Polynomial, d: &BoundaryDirection) -> Result<f64> {
    if !expr.all_coefficients_positive() || expr.is_zero() {
        return Err(FamilyError::NonPositiveCoefficient);
    }
    let coords = expr
        .vars()
        .iter()
        .map(|v| {
            d.get(v)
                .ok_or_else(|| FamilyError::UnknownMember(v.clone()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(expr
        .terms()
        .map(|(e, _)| {
            e.iter()
                .zip(&coords)
                .map(|(&k, c)| k as f64 * c)
                .sum::<f64>()
        })
        .fold(f64::NEG_INFINITY, f64::max))
}

#[derive(Clone, Debug, PartialEq)]
pub struct InjectivityWitness {
    pub paths: (usize, usize),
    pub big: (BoundaryDirection, BoundaryDirection),
    pub small: (BoundaryDirection, BoundaryDirection),
    pub big_angle: f64,
    pub small_angle: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InjectivityReport {
    pub limits: Vec<BoundaryDirection>,
    pub witnesses: Vec<InjectivityWitness>,
}

/// Looks for two paths whose limits differ under `big` but agree after
/// projection to the members of `small`. No witness is evidence only.
pub fn injectivity_evidence<P>(
    small: &[String],
    big: &FunctionFamily<P>,
    paths: &[PathSpec<P>],
    t0: f64,
    tol: f64,
) -> Result<InjectivityReport> {
    let names = big.names();
    if let Some(bad) = small.iter().find(|n| !names.contains(n)) {
        return Err(FamilyError::UnknownMember(bad.clone()));
    }
    let limits = paths
        .iter()
        .map(|p| boundary_limit(big, p, t0).map(|r| r.0))
        .collect::<Result<Vec<_>>>()?;
    let projected: Vec<Option<BoundaryDirection>> = limits
        .iter()
        .map(|d| d.project(small))
        .collect::<Result<_>>()?;
    let mut witnesses = Vec::new();
    for i in 0..limits.len() {
        for j in i + 1..limits.len() {
            let big_angle = limits[i].angle(&limits[j])?;
            let (Some(a), Some(b)) = (&projected[i], &projected[j]) else {
                continue;
            };
            let small_angle = a.angle(b)?;
            if big_angle > tol && small_angle <= tol {
                witnesses.push(InjectivityWitness {
                    paths: (i, j),
                    big: (limits[i].clone(), limits[j].clone()),
                    small: (a.clone(), b.clone()),
                    big_angle,
                    small_angle,
                });
            }
        }
    }
    Ok(InjectivityReport { limits, witnesses })
}

/// Renames members by their action labels: a member labelled `w` with
/// `w -> s` in `subst` becomes the member named and labelled `s`.
/// Evaluators are untouched.
pub fn relabel_by_action<P>(
    f: &FunctionFamily<P>,
    subst: &BTreeMap<String, String>,
) -> Result<FunctionFamily<P>> {
    let mut images = BTreeSet::new();
    for v in subst.values() {
        if !images.insert(v.clone()) {
            return Err(FamilyError::NotBijective(v.clone()));
        }
    }
    let members: Vec<Member<P>> = f
        .members
        .iter()
        .map(|m| {
            let key = m.label.clone().unwrap_or_else(|| m.name.clone());
            match subst.get(&key) {
                Some(s) => Member {
                    name: s.clone(),
                    label: Some(s.clone()),
                    eval: Arc::clone(&m.eval),
                },
                None => m.clone(),
            }
        })
        .collect();
    FunctionFamily::new(members).map_err(|e| match e {
        FamilyError::DuplicateName(n) => FamilyError::NotBijective(n),
        e => e,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum ProperVerdict {
    /// No sampled escaping sequence kept `E_F` bounded. Not a proof.
    Consistent { escaping: usize, min_ratio: f64 },
    /// Points escaping every compact while `|L_F|` stays small compared
    /// with `|Log x|`.
    Counterexample {
        direction: Vec<f64>,
        points: Vec<Vec<f64>>,
        l_norms: Vec<f64>,
    },
}

/// Sampled search for sequences that escape the set while `E_F` stays
/// bounded. `budget` is the number of random rays; a ray is a witness when
/// `|L_F| / |Log x| <= ratio_tol` on its top-rung point.
pub fn falsify_proper(
    f: &FunctionFamily<LogPoint>,
    set: &SemiAlgebraicSet,
    params: &LogParams,
    budget: usize,
    seed: u64,
    ratio_tol: f64,
) -> Result<ProperVerdict> {
    if budget == 0 {
        return Err(FamilyError::Empty);
    }
    let rays = match logmap::sample_rays(set, params, budget, seed) {
        Ok(r) => r,
        Err(LogmapError::Bounded { .. }) => {
            return Ok(ProperVerdict::Consistent {
                escaping: 0,
                min_ratio: f64::INFINITY,
            })
        }
        Err(e) => return Err(e.into()),
    };
    let mut best: Option<(f64, usize)> = None;
    for (i, ray) in rays.iter().enumerate() {
        let top = ray.last().expect("one point per rung");
        let lx = logmap::norm(top);
        let lf = logmap::norm(&l_map(f, &LogPoint(top.clone()), params.t0)?) * params.log_base();
        let ratio = lf / lx;
        if best.is_none_or(|(r, _)| ratio < r) {
            best = Some((ratio, i));
        }
    }
    let Some((ratio, i)) = best else {
        return Ok(ProperVerdict::Consistent {
            escaping: 0,
            min_ratio: f64::INFINITY,
        });
    };
    if ratio > ratio_tol {
        return Ok(ProperVerdict::Consistent {
            escaping: rays.len(),
            min_ratio: ratio,
        });
    }
    let ray = &rays[i];
    let l_norms = ray
        .iter()
        .map(|w| l_map(f, &LogPoint(w.clone()), params.t0).map(|l| logmap::norm(&l)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ProperVerdict::Counterexample {
        direction: logmap::normalize(ray.last().expect("nonempty")).expect("escaping"),
        points: ray
            .iter()
            .map(|w| w.iter().map(|v| v.exp()).collect())
            .collect(),
        l_norms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semialg::Condition;

    fn xy() -> FunctionFamily<LogPoint> {
        let v = ["x", "y"];
        FunctionFamily::polynomials(&[
            ("x", Polynomial::var(&v, "x").unwrap()),
            ("y", Polynomial::var(&v, "y").unwrap()),
        ])
        .unwrap()
    }

    fn with_plane() -> FunctionFamily<LogPoint> {
        let v = ["x", "y"];
        let q = Polynomial::from_int_terms(
            &v,
            &[(&[2, 0], 1), (&[0, 2], 1), (&[0, 1], -2), (&[0, 0], 1)],
        );
        FunctionFamily::polynomials(&[
            ("x", Polynomial::var(&v, "x").unwrap()),
            ("y", Polynomial::var(&v, "y").unwrap()),
            ("q", q),
        ])
        .unwrap()
    }

    fn product() -> FunctionFamily<LogPoint> {
        FunctionFamily::polynomials(&[(
            "xy",
            Polynomial::from_int_terms(&["x", "y"], &[(&[1, 1], 1)]),
        )])
        .unwrap()
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn e_map_examples() {
        assert!(close(
            &e_map(&xy(), &LogPoint::from_coords(&[2.0, 3.0])).unwrap(),
            &[2.0, 3.0],
            1e-12
        ));
        assert!(close(
            &e_map(&with_plane(), &LogPoint::from_coords(&[1.0, 1.0])).unwrap(),
            &[1.0, 1.0, 1.0],
            1e-12
        ));
        assert!(close(
            &e_map(&product(), &LogPoint::from_coords(&[2.0, 3.0])).unwrap(),
            &[6.0],
            1e-12
        ));
    }

    #[test]
    fn e_map_reports_member() {
        let f = FunctionFamily::polynomials(&[(
            "d",
            Polynomial::from_int_terms(&["x"], &[(&[1], 1), (&[0], -1)]),
        )])
        .unwrap();
        match e_map(&f, &LogPoint(vec![0.0])) {
            Err(FamilyError::NonPositive { member, .. }) => assert_eq!(member, "d"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn l_map_examples() {
        let e = std::f64::consts::E;
        let t0 = 1.0 / e;
        assert!(close(
            &l_map(&xy(), &LogPoint::from_coords(&[1.0, 1.0]), 0.3).unwrap(),
            &[0.0, 0.0],
            0.0
        ));
        assert!(close(
            &l_map(&xy(), &LogPoint(vec![1.0, 2.0]), t0).unwrap(),
            &[1.0, 2.0],
            1e-15
        ));
        assert!(close(
            &l_map(&product(), &LogPoint(vec![1.0, 2.0]), t0).unwrap(),
            &[3.0],
            1e-15
        ));
        assert_eq!(
            l_map(&xy(), &LogPoint(vec![1.0, 2.0]), 2.0),
            Err(FamilyError::BadBase(2.0))
        );
    }

    fn exp_path(f: impl Fn(f64) -> Vec<f64> + Send + Sync + 'static) -> PathSpec<LogPoint> {
        PathSpec::from_fn(move |k| LogPoint(f(k as f64)))
    }

    #[test]
    fn boundary_limit_examples() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let (d, _) = boundary_limit(&xy(), &exp_path(|k| vec![k, k]), 0.5).unwrap();
        assert!(close(&d.coords, &[h, h], 1e-12));
        let (d, _) = boundary_limit(&xy(), &exp_path(|k| vec![k, 0.0]), 0.5).unwrap();
        assert!(close(&d.coords, &[1.0, 0.0], 1e-12));
        let s6 = 6f64.sqrt();
        let path = exp_path(|k| vec![k, k]).with_estimator(LimitEstimator::Increment);
        let (d, _) = boundary_limit(&with_plane(), &path, 0.5).unwrap();
        assert!(
            close(&d.coords, &[1.0 / s6, 1.0 / s6, 2.0 / s6], 1e-3),
            "{d:?}"
        );
    }

    #[test]
    fn boundary_limit_errors() {
        let p = exp_path(|_| vec![0.5, 0.5]).with_max_steps(20);
        assert!(matches!(
            boundary_limit(&xy(), &p, 0.5),
            Err(FamilyError::NoEscape { .. })
        ));
        // direction keeps turning
        let p = exp_path(|k| vec![k * k.cos(), k * k.sin()]).with_max_steps(50);
        assert!(matches!(
            boundary_limit(&xy(), &p, 0.5),
            Err(FamilyError::NotConverged { .. })
        ));
        let set = SemiAlgebraicSet::new(
            &["x", "y"],
            Condition::eq(
                &Polynomial::var(&["x", "y"], "y").unwrap()
                    - &Polynomial::var(&["x", "y"], "x").unwrap(),
            ),
            true,
        )
        .unwrap();
        let p = exp_path(|k| vec![k, 2.0 * k]).on_set(&set);
        assert!(matches!(
            boundary_limit(&xy(), &p, 0.5),
            Err(FamilyError::OffSet { .. })
        ));
    }

    #[test]
    fn push_forward_examples() {
        let d = BoundaryDirection {
            names: vec!["f1".into(), "f2".into(), "f3".into()],
            coords: vec![1.0, 2.0, 5.0],
        };
        let v = ["f1", "f2"];
        let prod = Polynomial::from_int_terms(&v, &[(&[1, 1], 1)]);
        assert_eq!(push_forward_direction(&prod, &d).unwrap(), 3.0);
        let sum = Polynomial::from_int_terms(&v, &[(&[1, 0], 1), (&[0, 1], 1)]);
        assert_eq!(push_forward_direction(&sum, &d).unwrap(), 2.0);
        assert_eq!(
            push_forward_direction(&Polynomial::constant(&v, 7), &d).unwrap(),
            0.0
        );
        let bad = Polynomial::from_int_terms(&v, &[(&[1, 0], 1), (&[0, 1], -1)]);
        assert_eq!(
            push_forward_direction(&bad, &d),
            Err(FamilyError::NonPositiveCoefficient)
        );
    }

    #[test]
    fn projection_compatibility() {
        let paths: Vec<PathSpec<LogPoint>> = vec![
            exp_path(|k| vec![k, 0.5 * k]),
            exp_path(|k| vec![-k, 0.2 * k]),
            exp_path(|k| vec![0.3 * k, -k]),
        ];
        let big = with_plane();
        let small = xy();
        for p in paths {
            let p = p.with_estimator(LimitEstimator::Increment);
            let (db, _) = boundary_limit(&big, &p, 0.5).unwrap();
            let (ds, _) = boundary_limit(&small, &p, 0.5).unwrap();
            let proj = db.project(&small.names()).unwrap().unwrap();
            assert!(proj.angle(&ds).unwrap() <= 2.0 * DEFAULT_TOL_PROJ);
        }
    }

    #[test]
    fn identity_inclusion_has_no_witness() {
        let f = with_plane();
        let paths: Vec<_> = [0.5, 1.0, 2.0]
            .into_iter()
            .map(|s| exp_path(move |k| vec![-k, s * k]).with_estimator(LimitEstimator::Increment))
            .collect();
        let r = injectivity_evidence(&f.names(), &f, &paths, 0.5, 1e-2).unwrap();
        assert!(r.witnesses.is_empty());
    }

    #[test]
    fn relabel_examples() {
        let f = xy();
        let mut swap = BTreeMap::new();
        swap.insert("x".to_string(), "y".to_string());
        swap.insert("y".to_string(), "x".to_string());
        let g = relabel_by_action(&f, &swap).unwrap();
        let p = LogPoint(vec![1.0, 5.0]);
        assert_eq!(g.names(), vec!["y", "x"]);
        let (a, _) = boundary_limit(&f, &exp_path(|k| vec![k, 3.0 * k]), 0.5).unwrap();
        let (b, _) = boundary_limit(&g, &exp_path(|k| vec![k, 3.0 * k]), 0.5).unwrap();
        assert_eq!(a.get("x"), b.get("y"));
        assert_eq!(a.get("y"), b.get("x"));
        let id = relabel_by_action(&f, &BTreeMap::new()).unwrap();
        assert_eq!(l_map(&id, &p, 0.5).unwrap(), l_map(&f, &p, 0.5).unwrap());
        let mut bad = BTreeMap::new();
        bad.insert("x".to_string(), "y".to_string());
        assert!(matches!(
            relabel_by_action(&f, &bad),
            Err(FamilyError::NotBijective(_))
        ));
    }

    #[test]
    fn falsify_examples() {
        let v = ["x", "y"];
        let params = LogParams::default();
        let orthant = SemiAlgebraicSet::orthant(&v);
        let fx = FunctionFamily::polynomials(&[("x", Polynomial::var(&v, "x").unwrap())]).unwrap();
        assert!(matches!(
            falsify_proper(&fx, &orthant, &params, 400, 1, 0.05).unwrap(),
            ProperVerdict::Counterexample { .. }
        ));
        let inv = |name: &str, e: [i32; 2]| {
            (name.to_string(), Polynomial::from_int_terms(&v, &[(&e, 1)]))
        };
        let four = [
            inv("x", [1, 0]),
            inv("y", [0, 1]),
            inv("1/x", [-1, 0]),
            inv("1/y", [0, -1]),
        ];
        let refs: Vec<(&str, Polynomial)> =
            four.iter().map(|(n, p)| (n.as_str(), p.clone())).collect();
        let f4 = FunctionFamily::polynomials(&refs).unwrap();
        assert!(matches!(
            falsify_proper(&f4, &orthant, &params, 400, 1, 0.05).unwrap(),
            ProperVerdict::Consistent { .. }
        ));
        let x = Polynomial::var(&v, "x").unwrap();
        let y = Polynomial::var(&v, "y").unwrap();
        let one = Polynomial::constant(&v, 1);
        let two = Polynomial::constant(&v, 2);
        let bx = SemiAlgebraicSet::new(
            &v,
            Condition::All(vec![
                Condition::ge(&x - &one),
                Condition::ge(&two - &x),
                Condition::ge(&y - &one),
                Condition::ge(&two - &y),
            ]),
            true,
        )
        .unwrap();
        assert_eq!(
            falsify_proper(&xy(), &bx, &params, 100, 1, 0.05).unwrap(),
            ProperVerdict::Consistent {
                escaping: 0,
                min_ratio: f64::INFINITY
            }
        );
    }
}
