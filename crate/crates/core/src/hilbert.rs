//! Hilbert metric on properly convex planar domains (ellipses and convex
//! polygons), full-log convention:
//! `d(a, b) = log(|q - a| |p - b| / (|q - b| |p - a|))`.
//!
//! A domain lives in an affine chart `(u, v)` of the projective plane with a
//! frame `B`: the homogeneous point of `(u, v)` is `B (u, v, 1)`. Matrices act
//! on homogeneous coordinates. Facet functionals and the quadric are stored
//! in homogeneous coordinates, so orbits can be followed far toward the
//! boundary without cancellation.

use serde::{Deserialize, Serialize};

use crate::linalg::Matrix;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum HilbertError {
    #[error("ellipse axes must be positive")]
    BadAxes,
    #[error("polygon is not strictly convex")]
    NotConvex,
    #[error("frame matrix is singular")]
    SingularFrame,
    #[error("point is not strictly inside the domain")]
    NotInterior,
    #[error("chord needs two distinct points")]
    Coincident,
    #[error("matrix does not preserve the domain")]
    NotPreserved,
    #[error("orbit left the numerical interior at step {0}")]
    ExitedInterior(usize),
    #[error("matrix must be 3x3 and invertible")]
    BadMatrix,
}

type Result<T> = std::result::Result<T, HilbertError>;

pub type Point2 = [f64; 2];
pub type Hom = [f64; 3];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainKind {
    Ellipse { center: Point2, axes: Point2 },
    Polygon { vertices: Vec<Point2> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvexDomain {
    kind: DomainKind,
    frame: Matrix,
    frame_inv: Matrix,
    /// Facet forms in homogeneous coordinates, positive inside.
    facets: Vec<Hom>,
    /// Quadric in homogeneous coordinates, negative inside.
    quadric: Option<[[f64; 3]; 3]>,
}

fn dot(a: &Hom, b: &Hom) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn qform(q: &[[f64; 3]; 3], a: &Hom, b: &Hom) -> f64 {
    let mut s = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            s += a[i] * q[i][j] * b[j];
        }
    }
    s
}

fn apply(m: &Matrix, x: &Hom) -> Hom {
    let v = m.apply(x);
    [v[0], v[1], v[2]]
}

fn normalize_hom(x: &Hom) -> (Hom, f64) {
    let s = x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    ([x[0] / s, x[1] / s, x[2] / s], s)
}

/// `arccosh(exp(log_r))` without overflow.
fn arccosh_exp(log_r: f64) -> f64 {
    if log_r > 20.0 {
        std::f64::consts::LN_2 + log_r - 0.25 * (-2.0 * log_r).exp()
    } else {
        log_r.exp().max(1.0).acosh()
    }
}

impl ConvexDomain {
    pub fn ellipse(center: Point2, axes: Point2) -> Result<Self> {
        if !(axes[0] > 0.0 && axes[1] > 0.0) {
            return Err(HilbertError::BadAxes);
        }
        Self::build(DomainKind::Ellipse { center, axes }, Matrix::identity(3))
    }

    pub fn unit_disk() -> Self {
        Self::ellipse([0.0, 0.0], [1.0, 1.0]).expect("valid")
    }

    /// Counterclockwise, strictly convex vertex list.
    pub fn polygon(vertices: Vec<Point2>) -> Result<Self> {
        Self::build(DomainKind::Polygon { vertices }, Matrix::identity(3))
    }

    /// Projectivised positive octant: the chart triangle `u, v > 0`,
    /// `u + v < 1` with homogeneous point `(u, v, 1 - u - v)`.
    pub fn simplex() -> Self {
        let frame = Matrix::from_array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [-1.0, -1.0, 1.0]]);
        Self::build(
            DomainKind::Polygon {
                vertices: vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
            },
            frame,
        )
        .expect("valid")
    }

    /// Unit disk framed as the cone of positive binary quadratic forms
    /// `x e1² + y e1e2 + z e2²`, so that [`adjoint_action`] and
    /// [`klein_isometry`] act on it directly.
    pub fn klein_disk() -> Self {
        let frame = Matrix::from_array([[1.0, 0.0, 1.0], [0.0, 2.0, 0.0], [-1.0, 0.0, 1.0]]);
        Self::build(
            DomainKind::Ellipse {
                center: [0.0, 0.0],
                axes: [1.0, 1.0],
            },
            frame,
        )
        .expect("valid")
    }

    pub fn with_frame(&self, frame: Matrix) -> Result<Self> {
        Self::build(self.kind.clone(), frame)
    }

    fn build(kind: DomainKind, frame: Matrix) -> Result<Self> {
        if frame.size() != 3 {
            return Err(HilbertError::SingularFrame);
        }
        let frame_inv = frame.inverse().ok_or(HilbertError::SingularFrame)?;
        let pull = |f: Hom| -> Hom {
            // f · B⁻¹
            let mut g = [0.0; 3];
            for (j, gj) in g.iter_mut().enumerate() {
                *gj = (0..3).map(|i| f[i] * frame_inv.get(i, j)).sum();
            }
            g
        };
        let (facets, quadric) = match &kind {
            DomainKind::Polygon { vertices } => {
                let n = vertices.len();
                if n < 3 {
                    return Err(HilbertError::NotConvex);
                }
                for i in 0..n {
                    let (a, b, c) = (vertices[i], vertices[(i + 1) % n], vertices[(i + 2) % n]);
                    let cr = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]);
                    if cr <= 0.0 {
                        return Err(HilbertError::NotConvex);
                    }
                }
                let facets = (0..n)
                    .map(|i| {
                        let (a, b) = (vertices[i], vertices[(i + 1) % n]);
                        // left normal of edge a→b, positive inside for ccw order
                        let nu = -(b[1] - a[1]);
                        let nv = b[0] - a[0];
                        pull([nu, nv, -(nu * a[0] + nv * a[1])])
                    })
                    .collect();
                (facets, None)
            }
            DomainKind::Ellipse { center, axes } => {
                let (c0, c1) = (center[0], center[1]);
                let (a2, b2) = (1.0 / (axes[0] * axes[0]), 1.0 / (axes[1] * axes[1]));
                let qc = [
                    [a2, 0.0, -a2 * c0],
                    [0.0, b2, -b2 * c1],
                    [-a2 * c0, -b2 * c1, a2 * c0 * c0 + b2 * c1 * c1 - 1.0],
                ];
                // B⁻ᵀ Qc B⁻¹
                let mut q = [[0.0; 3]; 3];
                for (i, row) in q.iter_mut().enumerate() {
                    for (j, v) in row.iter_mut().enumerate() {
                        let mut s = 0.0;
                        for k in 0..3 {
                            for l in 0..3 {
                                s += frame_inv.get(k, i) * qc[k][l] * frame_inv.get(l, j);
                            }
                        }
                        *v = s;
                    }
                }
                (Vec::new(), Some(q))
            }
        };
        Ok(ConvexDomain {
            kind,
            frame,
            frame_inv,
            facets,
            quadric,
        })
    }

    pub fn kind(&self) -> &DomainKind {
        &self.kind
    }

    pub fn frame(&self) -> &Matrix {
        &self.frame
    }

    pub fn to_homogeneous(&self, p: &Point2) -> Hom {
        apply(&self.frame, &[p[0], p[1], 1.0])
    }

    pub fn to_chart(&self, x: &Hom) -> Point2 {
        let y = apply(&self.frame_inv, x);
        [y[0] / y[2], y[1] / y[2]]
    }

    /// Sign-normalised interior test on homogeneous coordinates.
    pub fn contains_homogeneous(&self, x: &Hom) -> bool {
        if !x.iter().all(|v| v.is_finite()) {
            return false;
        }
        match &self.quadric {
            Some(q) => qform(q, x, x) < 0.0,
            None => {
                let s: Vec<f64> = self.facets.iter().map(|f| dot(f, x)).collect();
                s.iter().all(|&v| v > 0.0) || s.iter().all(|&v| v < 0.0)
            }
        }
    }

    pub fn contains(&self, p: &Point2) -> bool {
        self.contains_homogeneous(&self.to_homogeneous(p))
    }

    /// Boundary points `p, q` with `p, a, b, q` in order along the line.
    pub fn chord(&self, a: &Point2, b: &Point2) -> Result<(Point2, Point2)> {
        if !self.contains(a) || !self.contains(b) {
            return Err(HilbertError::NotInterior);
        }
        if a == b {
            return Err(HilbertError::Coincident);
        }
        let d = [b[0] - a[0], b[1] - a[1]];
        let ha = [a[0], a[1], 1.0];
        let hd = [d[0], d[1], 0.0];
        // work in chart-homogeneous coordinates via the frame
        let fa = apply(&self.frame, &ha);
        let fd = apply(&self.frame, &hd);
        let (t_lo, t_hi) = match &self.quadric {
            Some(q) => {
                let qa = qform(q, &fa, &fa);
                let qb = 2.0 * qform(q, &fa, &fd);
                let qd = qform(q, &fd, &fd);
                // qd t² + qb t + qa = 0 with qa < 0 < qd
                let disc = (qb * qb - 4.0 * qd * qa).sqrt();
                let r = -0.5 * (qb + qb.signum() * disc);
                let (t1, t2) = if r == 0.0 {
                    let t = (-qa / qd).sqrt();
                    (-t, t)
                } else {
                    (r / qd, qa / r)
                };
                (t1.min(t2), t1.max(t2))
            }
            None => {
                let mut lo = f64::NEG_INFINITY;
                let mut hi = f64::INFINITY;
                for f in &self.facets {
                    // φ(a + t d) = φ(a) + t φ(d)
                    let (pa, pd) = (
                        dot(f, &fa) * self.orientation(&fa),
                        dot(f, &fd) * self.orientation(&fa),
                    );
                    if pd < 0.0 {
                        hi = hi.min(-pa / pd);
                    } else if pd > 0.0 {
                        lo = lo.max(-pa / pd);
                    }
                }
                (lo, hi)
            }
        };
        let at = |t: f64| [a[0] + t * d[0], a[1] + t * d[1]];
        Ok((at(t_lo), at(t_hi)))
    }

    fn orientation(&self, x: &Hom) -> f64 {
        self.facets.first().map_or(1.0, |f| dot(f, x).signum())
    }

    /// Distance from the cross-ratio of the chord endpoints.
    pub fn distance_by_chord(&self, a: &Point2, b: &Point2) -> Result<f64> {
        if a == b {
            return if self.contains(a) {
                Ok(0.0)
            } else {
                Err(HilbertError::NotInterior)
            };
        }
        let (p, q) = self.chord(a, b)?;
        let dist = |x: &Point2, y: &Point2| ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2)).sqrt();
        Ok((dist(&q, a) * dist(&p, b) / (dist(&q, b) * dist(&p, a))).ln())
    }

    /// Hilbert distance between chart points.
    pub fn distance(&self, a: &Point2, b: &Point2) -> Result<f64> {
        self.distance_homogeneous(&self.to_homogeneous(a), &self.to_homogeneous(b))
    }

    /// Hilbert distance between homogeneous points (any nonzero scaling).
    pub fn distance_homogeneous(&self, a: &Hom, b: &Hom) -> Result<f64> {
        if !self.contains_homogeneous(a) || !self.contains_homogeneous(b) {
            return Err(HilbertError::NotInterior);
        }
        let (a, _) = normalize_hom(a);
        let (b, _) = normalize_hom(b);
        match &self.quadric {
            Some(q) => {
                let (qa, qb) = (qform(q, &a, &a), qform(q, &b, &b));
                Ok(self.quadric_distance(qform(q, &a, &b), qa, qb))
            }
            None => Ok(self.facet_distance(&a, &b)),
        }
    }

    /// `2 arccosh(|B| / sqrt(QaQb))`.
    fn quadric_distance(&self, bab: f64, qa: f64, qb: f64) -> f64 {
        let log_r = bab.abs().ln() - 0.5 * (qa.abs().ln() + qb.abs().ln());
        2.0 * arccosh_exp(log_r)
    }

    fn facet_distance(&self, a: &Hom, b: &Hom) -> f64 {
        let (sa, sb) = (self.orientation(a), self.orientation(b));
        let mut hi = f64::NEG_INFINITY;
        let mut lo = f64::INFINITY;
        for f in &self.facets {
            let r = (dot(f, b) * sb).ln() - (dot(f, a) * sa).ln();
            hi = hi.max(r);
            lo = lo.min(r);
        }
        (hi - lo).max(0.0)
    }

    /// Boundary sample points in homogeneous coordinates.
    fn boundary_samples(&self, n: usize) -> Vec<Hom> {
        match &self.kind {
            DomainKind::Ellipse { center, axes } => (0..n)
                .map(|k| {
                    let t = std::f64::consts::TAU * k as f64 / n as f64;
                    self.to_homogeneous(&[
                        center[0] + axes[0] * t.cos(),
                        center[1] + axes[1] * t.sin(),
                    ])
                })
                .collect(),
            DomainKind::Polygon { vertices } => {
                let per = (n / vertices.len()).max(1);
                let mut out = Vec::new();
                for i in 0..vertices.len() {
                    let (a, b) = (vertices[i], vertices[(i + 1) % vertices.len()]);
                    for k in 0..per {
                        let s = k as f64 / per as f64;
                        out.push(
                            self.to_homogeneous(&[
                                a[0] + s * (b[0] - a[0]),
                                a[1] + s * (b[1] - a[1]),
                            ]),
                        );
                    }
                }
                out
            }
        }
    }

    /// Whether `m` (homogeneous coordinates) maps sampled boundary points
    /// into the closed domain.
    pub fn preserves(&self, m: &Matrix) -> bool {
        if m.size() != 3 {
            return false;
        }
        let tol = 1e-9;
        let samples = self.boundary_samples(96);
        // a reference interior point must stay interior too
        let centre = self.interior_point();
        let c_img = apply(m, &centre);
        if !self.contains_homogeneous(&c_img) {
            return false;
        }
        samples.iter().all(|x| {
            let (y, _) = normalize_hom(&apply(m, x));
            match &self.quadric {
                Some(q) => {
                    let scale = qform(q, &c_img, &c_img).abs().max(1.0);
                    qform(q, &y, &y) <= tol * scale
                }
                None => {
                    let s = self.orientation(&c_img);
                    self.facets.iter().all(|f| dot(f, &y) * s >= -tol)
                }
            }
        })
    }

    /// A deterministic interior point: the centre of an ellipse or the
    /// vertex centroid of a polygon.
    pub fn center(&self) -> Point2 {
        self.to_chart(&self.interior_point())
    }

    fn interior_point(&self) -> Hom {
        match &self.kind {
            DomainKind::Ellipse { center, .. } => self.to_homogeneous(center),
            DomainKind::Polygon { vertices } => {
                let n = vertices.len() as f64;
                let c = vertices
                    .iter()
                    .fold([0.0, 0.0], |a, v| [a[0] + v[0] / n, a[1] + v[1] / n]);
                self.to_homogeneous(&c)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RateReport {
    pub rate: f64,
    /// `d(x0, m^k x0)` for `k = 1..=k_max`.
    pub distances: Vec<f64>,
    /// `d(x0, m^k x0) / k`.
    pub cesaro: Vec<f64>,
}

/// `d(x0, m^k x0) / k` at `k = k_max`.
pub fn displacement_rate(
    domain: &ConvexDomain,
    m: &Matrix,
    x0: &Point2,
    k_max: usize,
) -> Result<RateReport> {
    if m.size() != 3 || m.inverse().is_none() {
        return Err(HilbertError::BadMatrix);
    }
    if !domain.contains(x0) {
        return Err(HilbertError::NotInterior);
    }
    if !domain.preserves(m) {
        return Err(HilbertError::NotPreserved);
    }
    let start = domain.to_homogeneous(x0);
    let (a, _) = normalize_hom(&start);
    // Q(m x) = mu Q(x) with mu = det(m)^(2/3) for quadric-preserving m
    let det = m.det();
    let log_mu = if det > 0.0 {
        (2.0 / 3.0) * det.ln()
    } else {
        (2.0 / 3.0) * (-det).ln()
    };
    let mut x = a;
    let mut log_q = domain.quadric.map(|q| qform(&q, &a, &a).abs().ln());
    let mut distances = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let (y, s) = normalize_hom(&apply(m, &x));
        // the quadric sign is carried by log_q; only polygons are re-tested
        let inside = domain.quadric.is_some() || domain.contains_homogeneous(&y);
        if !inside || !s.is_finite() || s == 0.0 {
            return Err(HilbertError::ExitedInterior(k));
        }
        x = y;
        let d = match &domain.quadric {
            Some(q) => {
                let lq = log_q.expect("ellipse") + log_mu - 2.0 * s.ln();
                log_q = Some(lq);
                let qa = qform(q, &a, &a);
                let bab = qform(q, &a, &x);
                let log_r = bab.abs().ln() - 0.5 * (qa.abs().ln() + lq);
                2.0 * arccosh_exp(log_r)
            }
            None => domain.facet_distance(&a, &x),
        };
        if !d.is_finite() {
            return Err(HilbertError::ExitedInterior(k));
        }
        distances.push(d);
    }
    let cesaro: Vec<f64> = distances
        .iter()
        .enumerate()
        .map(|(i, d)| d / (i + 1) as f64)
        .collect();
    Ok(RateReport {
        rate: cesaro.last().copied().unwrap_or(0.0),
        distances,
        cesaro,
    })
}

/// Action of an SL(2) matrix on binary quadratic forms (`Sym²`), in the
/// basis `e1², e1e2, e2²`. Preserves the discriminant `y² - 4xz` and hence
/// [`ConvexDomain::klein_disk`]; eigenvalues `λ², 1, λ⁻²`.
pub fn adjoint_action(m: &Matrix) -> Result<Matrix> {
    if m.size() != 2 {
        return Err(HilbertError::BadMatrix);
    }
    let (a, b, c, d) = (m.get(0, 0), m.get(0, 1), m.get(1, 0), m.get(1, 1));
    Ok(Matrix::from_array([
        [a * a, a * b, b * b],
        [2.0 * a * c, a * d + b * c, 2.0 * b * d],
        [c * c, c * d, d * d],
    ]))
}

/// `Sym²(√m)` for hyperbolic `m` with positive trace: acts on the Klein
/// disk with eigenvalues `λ, 1, λ⁻¹`, so its displacement rate is
/// `log(λ₁/λ₂)` of `m`.
pub fn klein_isometry(m: &Matrix) -> Result<Matrix> {
    if m.size() != 2 {
        return Err(HilbertError::BadMatrix);
    }
    let t = m.trace();
    if t <= 2.0 {
        return Err(HilbertError::BadMatrix);
    }
    // √m = (m + I) / √(tr m + 2) for det m = 1
    let s = (t + 2.0).sqrt();
    let r = Matrix::from_array([
        [(m.get(0, 0) + 1.0) / s, m.get(0, 1) / s],
        [m.get(1, 0) / s, (m.get(1, 1) + 1.0) / s],
    ]);
    adjoint_action(&r)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainJson {
    #[serde(flatten)]
    pub kind: DomainKindJson,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainKindJson {
    Ellipse {
        center: Point2,
        axes: Point2,
        #[serde(default)]
        frame: Option<Vec<Vec<f64>>>,
    },
    Polygon {
        vertices: Vec<Point2>,
        #[serde(default)]
        frame: Option<Vec<Vec<f64>>>,
    },
    Simplex,
    KleinDisk,
}

impl TryFrom<&DomainJson> for ConvexDomain {
    type Error = HilbertError;
    fn try_from(j: &DomainJson) -> Result<Self> {
        let framed = |d: ConvexDomain, frame: &Option<Vec<Vec<f64>>>| match frame {
            Some(rows) => d.with_frame(Matrix::from_rows(rows).ok_or(HilbertError::SingularFrame)?),
            None => Ok(d),
        };
        match &j.kind {
            DomainKindJson::Ellipse {
                center,
                axes,
                frame,
            } => framed(ConvexDomain::ellipse(*center, *axes)?, frame),
            DomainKindJson::Polygon { vertices, frame } => {
                framed(ConvexDomain::polygon(vertices.clone())?, frame)
            }
            DomainKindJson::Simplex => Ok(ConvexDomain::simplex()),
            DomainKindJson::KleinDisk => Ok(ConvexDomain::klein_disk()),
        }
    }
}
