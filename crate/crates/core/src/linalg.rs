//! Small dense matrices and their spectra.

use std::fmt;
use std::ops::Mul;

use num_complex::Complex64;

#[derive(Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.rows()).finish()
    }
}

impl Matrix {
    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Matrix { n, data }
    }

    /// `None` unless `rows` is square and nonempty.
    pub fn from_rows(rows: &[Vec<f64>]) -> Option<Self> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return None;
        }
        Some(Matrix {
            n,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn from_array<const N: usize>(rows: [[f64; N]; N]) -> Self {
        Matrix {
            n: N,
            data: rows.iter().flatten().copied().collect(),
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.n).map(<[f64]>::to_vec).collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn scaled(&self, s: f64) -> Self {
        Matrix {
            n: self.n,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        let mut t = self.clone();
        for i in 0..self.n {
            for j in 0..self.n {
                t.set(i, j, self.get(j, i));
            }
        }
        t
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j) * v[j]).sum())
            .collect()
    }

    pub fn det(&self) -> f64 {
        match self.n {
            1 => self.data[0],
            2 => self.get(0, 0) * self.get(1, 1) - self.get(0, 1) * self.get(1, 0),
            3 => {
                let m = |i, j| self.get(i, j);
                m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1))
                    - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0))
                    + m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0))
            }
            _ => {
                let (lu, sign) = match self.lu() {
                    Some(x) => x,
                    None => return 0.0,
                };
                (0..self.n).map(|i| lu.get(i, i)).product::<f64>() * sign
            }
        }
    }

    fn lu(&self) -> Option<(Matrix, f64)> {
        let n = self.n;
        let mut a = self.clone();
        let mut sign = 1.0;
        for k in 0..n {
            let p = (k..n).max_by(|&i, &j| a.get(i, k).abs().total_cmp(&a.get(j, k).abs()))?;
            if a.get(p, k) == 0.0 {
                return None;
            }
            if p != k {
                for j in 0..n {
                    let t = a.get(k, j);
                    a.set(k, j, a.get(p, j));
                    a.set(p, j, t);
                }
                sign = -sign;
            }
            for i in k + 1..n {
                let f = a.get(i, k) / a.get(k, k);
                for j in k..n {
                    a.set(i, j, a.get(i, j) - f * a.get(k, j));
                }
            }
        }
        Some((a, sign))
    }

    /// Gauss-Jordan inverse with partial pivoting.
    pub fn inverse(&self) -> Option<Self> {
        let n = self.n;
        if n == 2 {
            let d = self.det();
            if d == 0.0 || !d.is_finite() {
                return None;
            }
            return Some(Matrix::from_array([
                [self.get(1, 1) / d, -self.get(0, 1) / d],
                [-self.get(1, 0) / d, self.get(0, 0) / d],
            ]));
        }
        let mut a = self.clone();
        let mut inv = Matrix::identity(n);
        for k in 0..n {
            let p = (k..n).max_by(|&i, &j| a.get(i, k).abs().total_cmp(&a.get(j, k).abs()))?;
            let piv = a.get(p, k);
            if piv == 0.0 || !piv.is_finite() {
                return None;
            }
            for j in 0..n {
                a.data.swap(k * n + j, p * n + j);
                inv.data.swap(k * n + j, p * n + j);
            }
            for j in 0..n {
                a.set(k, j, a.get(k, j) / piv);
                inv.set(k, j, inv.get(k, j) / piv);
            }
            for i in 0..n {
                if i != k {
                    let f = a.get(i, k);
                    for j in 0..n {
                        a.set(i, j, a.get(i, j) - f * a.get(k, j));
                        inv.set(i, j, inv.get(i, j) - f * inv.get(k, j));
                    }
                }
            }
        }
        Some(inv)
    }

    /// Eigenvalues sorted by decreasing modulus (2x2 and 3x3 in closed form).
    pub fn eigenvalues(&self) -> Option<Vec<Complex64>> {
        let n = self.n;
        let upper = (0..n).all(|i| (0..i).all(|j| self.get(i, j) == 0.0));
        let lower = (0..n).all(|i| (i + 1..n).all(|j| self.get(i, j) == 0.0));
        let mut v = if upper || lower {
            (0..n)
                .map(|i| Complex64::new(self.get(i, i), 0.0))
                .collect()
        } else {
            match self.n {
                1 => vec![Complex64::new(self.data[0], 0.0)],
                2 => quadratic_roots(-self.trace(), self.det()).to_vec(),
                3 => {
                    let m = |i, j| self.get(i, j);
                    let s2 = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0) + m(0, 0) * m(2, 2)
                        - m(0, 2) * m(2, 0)
                        + m(1, 1) * m(2, 2)
                        - m(1, 2) * m(2, 1);
                    cubic_roots(-self.trace(), s2, -self.det()).to_vec()
                }
                _ => return None,
            }
        };
        v.sort_by(|a, b| b.norm().total_cmp(&a.norm()).then(b.re.total_cmp(&a.re)));
        Some(v)
    }

    /// A unit null vector of `self - lambda I` (n = 2 or 3).
    pub fn eigenvector(&self, lambda: f64) -> Option<Vec<f64>> {
        let n = self.n;
        let b = |i: usize, j: usize| self.get(i, j) - if i == j { lambda } else { 0.0 };
        let cand: Vec<Vec<f64>> = match n {
            2 => vec![vec![b(0, 1), -b(0, 0)], vec![b(1, 1), -b(1, 0)]],
            3 => {
                let r: Vec<Vec<f64>> = (0..3).map(|i| (0..3).map(|j| b(i, j)).collect()).collect();
                vec![
                    cross3(&r[0], &r[1]),
                    cross3(&r[0], &r[2]),
                    cross3(&r[1], &r[2]),
                ]
            }
            _ => return None,
        };
        let best = cand
            .into_iter()
            .max_by(|x, y| norm(x).total_cmp(&norm(y)))?;
        let nb = norm(&best);
        if nb == 0.0 || !nb.is_finite() {
            // scalar matrix: everything is an eigenvector
            let mut e = vec![0.0; n];
            e[0] = 1.0;
            return Some(e);
        }
        let mut out: Vec<f64> = best.iter().map(|x| x / nb).collect();
        // sign convention: first nonzero coordinate positive
        if let Some(&f) = out.iter().find(|x| x.abs() > 1e-14) {
            if f < 0.0 {
                out.iter_mut().for_each(|x| *x = -*x);
            }
        }
        Some(out)
    }
}

impl Mul for &Matrix {
    type Output = Matrix;
    fn mul(self, o: &Matrix) -> Matrix {
        let n = self.n;
        assert_eq!(n, o.n, "matrix size mismatch");
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                for j in 0..n {
                    data[i * n + j] += a * o.data[k * n + j];
                }
            }
        }
        Matrix { n, data }
    }
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn cross3(a: &[f64], b: &[f64]) -> Vec<f64> {
    vec![
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Two unit vectors completing the unit vector `c` to a right-handed
/// orthonormal frame.
pub fn orthonormal_complement(c: &[f64; 3]) -> ([f64; 3], [f64; 3]) {
    // cross with the axis least aligned with c
    let k = (0..3)
        .min_by(|&i, &j| c[i].abs().total_cmp(&c[j].abs()))
        .expect("3 axes");
    let mut axis = [0.0; 3];
    axis[k] = 1.0;
    let e1 = cross3(&axis, c);
    let n = norm(&e1);
    let e1 = [e1[0] / n, e1[1] / n, e1[2] / n];
    let e2 = cross3(c, &e1);
    (e1, [e2[0], e2[1], e2[2]])
}

/// Roots of `x^2 + b x + c`, without cancellation.
pub fn quadratic_roots(b: f64, c: f64) -> [Complex64; 2] {
    let disc = b * b - 4.0 * c;
    if disc >= 0.0 {
        let q = -0.5 * (b + b.signum() * disc.sqrt());
        if q == 0.0 {
            return [Complex64::new(0.0, 0.0); 2];
        }
        [Complex64::new(q, 0.0), Complex64::new(c / q, 0.0)]
    } else {
        let re = -0.5 * b;
        let im = 0.5 * (-disc).sqrt();
        [Complex64::new(re, im), Complex64::new(re, -im)]
    }
}

/// Roots of `x^3 + a x^2 + b x + c`.
pub fn cubic_roots(a: f64, b: f64, c: f64) -> [Complex64; 3] {
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let shift = -a / 3.0;
    let f = |x: f64| ((x + a) * x + b) * x + c;
    let df = |x: f64| (3.0 * x + 2.0 * a) * x + b;
    let polish = |mut x: f64| {
        for _ in 0..4 {
            let d = df(x);
            if d == 0.0 {
                break;
            }
            let nx = x - f(x) / d;
            if !nx.is_finite() || (f(nx).abs() >= f(x).abs()) {
                break;
            }
            x = nx;
        }
        x
    };
    let delta = (q / 2.0).powi(2) + (p / 3.0).powi(3);
    if delta > 0.0 || p == 0.0 {
        let u = (-q / 2.0 - q.signum() * delta.max(0.0).sqrt()).cbrt();
        let mu = if u == 0.0 { 0.0 } else { u - p / (3.0 * u) };
        let r = polish(mu + shift);
        // remaining pair: sum -a - r, product -c / r
        let [r1, r2] = if r != 0.0 {
            quadratic_roots(a + r, -c / r)
        } else {
            quadratic_roots(a, b)
        };
        [Complex64::new(r, 0.0), r1, r2]
    } else {
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        let roots: Vec<f64> = (0..3)
            .map(|k| polish(m * (theta - std::f64::consts::TAU * k as f64 / 3.0).cos() + shift))
            .collect();
        [
            Complex64::new(roots[0], 0.0),
            Complex64::new(roots[1], 0.0),
            Complex64::new(roots[2], 0.0),
        ]
    }
}

/// Eigen-decomposition of a symmetric 3x3 matrix by cyclic Jacobi rotations.
/// Returns eigenvalues ascending with their unit eigenvectors.
pub fn symmetric3_eigen(m: &[[f64; 3]; 3]) -> ([f64; 3], [[f64; 3]; 3]) {
    let mut a = *m;
    let mut v = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    for _ in 0..64 {
        let off = a[0][1].powi(2) + a[0][2].powi(2) + a[1][2].powi(2);
        if off <= 1e-30 * (a[0][0].powi(2) + a[1][1].powi(2) + a[2][2].powi(2)).max(1e-300) {
            break;
        }
        for (p, q) in [(0, 1), (0, 2), (1, 2)] {
            if a[p][q] == 0.0 {
                continue;
            }
            let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
            let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
            let t = if theta == 0.0 { 1.0 } else { t };
            let c = 1.0 / (t * t + 1.0).sqrt();
            let s = t * c;
            for k in 0..3 {
                let akp = a[k][p];
                let akq = a[k][q];
                a[k][p] = c * akp - s * akq;
                a[k][q] = s * akp + c * akq;
            }
            for k in 0..3 {
                let apk = a[p][k];
                let aqk = a[q][k];
                a[p][k] = c * apk - s * aqk;
                a[q][k] = s * apk + c * aqk;
            }
            for row in v.iter_mut() {
                let vp = row[p];
                let vq = row[q];
                row[p] = c * vp - s * vq;
                row[q] = s * vp + c * vq;
            }
        }
    }
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&i, &j| a[i][i].total_cmp(&a[j][j]));
    let vals = [a[idx[0]][idx[0]], a[idx[1]][idx[1]], a[idx[2]][idx[2]]];
    let vecs = [
        [v[0][idx[0]], v[1][idx[0]], v[2][idx[0]]],
        [v[0][idx[1]], v[1][idx[1]], v[2][idx[1]]],
        [v[0][idx[2]], v[1][idx[2]], v[2][idx[2]]],
    ];
    (vals, vecs)
}
