//! Log maps with base `1/t0`, amoebas, logarithmic limit directions and the
//! max-plus (tropical) prevariety of a polynomial.
//!
//! Sampling for limit directions happens in natural-log coordinates: a ray
//! direction is drawn for the free coordinates, equality constraints are
//! solved for the remaining ones by line root finding, and the resulting
//! log-image is compared across the two largest rungs of a radius ladder.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::semialg::{self, Polynomial, SampleOptions, SemiAlgebraicSet, SemialgError};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum LogmapError {
    #[error("coordinate {index} is {value}; log map needs positive coordinates")]
    NonPositive { index: usize, value: f64 },
    #[error("t0 = {0} is outside (0, 1)")]
    BadBase(f64),
    #[error("radius ladder must be strictly increasing, nonempty and >= 1")]
    BadLadder,
    #[error("set is not restricted to the positive orthant")]
    NotOrthant,
    #[error("bounded set: no sample escaped past radius {radius} ({tried} rays tried)")]
    Bounded { radius: f64, tried: usize },
    #[error("empty direction cloud")]
    EmptyCloud,
    #[error(transparent)]
    Sample(#[from] SemialgError),
}

type Result<T> = std::result::Result<T, LogmapError>;

/// Base and ladder of the Maslov dequantization.
#[derive(Clone, Debug, PartialEq)]
pub struct LogParams {
    pub t0: f64,
    /// Increasing norms in log units of base `1/t0`.
    pub radius_ladder: Vec<f64>,
    /// Angular tolerance in radians.
    pub cluster_tol: f64,
}

impl Default for LogParams {
    fn default() -> Self {
        LogParams {
            t0: (-1.0f64).exp(),
            radius_ladder: vec![10.0, 30.0, 100.0],
            cluster_tol: 0.05,
        }
    }
}

impl LogParams {
    pub fn new(t0: f64, radius_ladder: Vec<f64>, cluster_tol: f64) -> Result<Self> {
        let p = LogParams {
            t0,
            radius_ladder,
            cluster_tol,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t0 > 0.0 && self.t0 < 1.0) {
            return Err(LogmapError::BadBase(self.t0));
        }
        let l = &self.radius_ladder;
        if l.is_empty() || l[0] < 1.0 || l.windows(2).any(|w| w[1] <= w[0]) {
            return Err(LogmapError::BadLadder);
        }
        Ok(())
    }

    /// `ln(1/t0)`, the factor between natural logs and base-`1/t0` logs.
    pub fn log_base(&self) -> f64 {
        -self.t0.ln()
    }

    pub fn top_radius(&self) -> f64 {
        *self.radius_ladder.last().expect("validated nonempty")
    }
}

/// `(log x_i / log(1/t0))_i`.
pub fn log_map(x: &[f64], t0: f64) -> Result<Vec<f64>> {
    if !(t0 > 0.0 && t0 < 1.0) {
        return Err(LogmapError::BadBase(t0));
    }
    let base = -t0.ln();
    x.iter()
        .enumerate()
        .map(|(i, &v)| {
            if v > 0.0 {
                Ok(v.ln() / base)
            } else {
                Err(LogmapError::NonPositive { index: i, value: v })
            }
        })
        .collect()
}

/// Log-images of `n` points of `set` sampled in `bx`.
pub fn amoeba_sample(
    set: &SemiAlgebraicSet,
    params: &LogParams,
    bx: &[(f64, f64)],
    n: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    params.validate()?;
    if !set.is_orthant() {
        return Err(LogmapError::NotOrthant);
    }
    let pts = semialg::sample(set, bx, n, seed, &SampleOptions::default())?;
    pts.iter().map(|x| log_map(x, params.t0)).collect()
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn normalize(v: &[f64]) -> Option<Vec<f64>> {
    let n = norm(v);
    (n > 0.0 && n.is_finite()).then(|| v.iter().map(|x| x / n).collect())
}

/// Angle between two nonzero vectors, computed stably via `atan2`.
pub fn angle(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = norm(a);
    let nb = norm(b);
    // |a×b| generalised: sqrt(|a|²|b|² - dot²) loses accuracy; use |a/|a| - b/|b||.
    let diff: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x / na - y / nb).powi(2))
        .sum::<f64>()
        .sqrt();
    let sum: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x / na + y / nb).powi(2))
        .sum::<f64>()
        .sqrt();
    let _ = dot;
    2.0 * diff.atan2(sum)
}

/// Sampled stand-in for the spherical quotient of the logarithmic limit set.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DirectionCloud {
    pub directions: Vec<Vec<f64>>,
    /// Norm of the log-image each direction came from.
    pub radii: Vec<f64>,
}

impl DirectionCloud {
    /// Normalises arbitrary nonzero vectors; zero vectors are skipped.
    pub fn from_vectors<I: IntoIterator<Item = Vec<f64>>>(vs: I) -> Self {
        let mut c = DirectionCloud::default();
        for v in vs {
            if let Some(u) = normalize(&v) {
                c.radii.push(norm(&v));
                c.directions.push(u);
            }
        }
        c
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.directions.first().map_or(0, Vec::len)
    }

    pub fn extend(&mut self, other: DirectionCloud) {
        self.directions.extend(other.directions);
        self.radii.extend(other.radii);
    }
}

/// Counters reported alongside a limit cloud.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LoglimitDiagnostics {
    pub rays: usize,
    /// Accepted log-images per ladder rung.
    pub per_rung: Vec<usize>,
    /// Top-rung images discarded for drifting more than `cluster_tol`.
    pub unstable: usize,
}

#[derive(Clone, Debug)]
pub struct LoglimitOptions {
    pub shards: usize,
    pub workers: usize,
    pub scan_cells: usize,
}

impl Default for LoglimitOptions {
    fn default() -> Self {
        LoglimitOptions {
            shards: 8,
            workers: 1,
            scan_cells: 600,
        }
    }
}

/// Estimates the spherical quotient of the logarithmic limit set of `set`
/// from `n` random rays.
///
/// For every ray the log-image is computed at each ladder radius; the
/// directions kept are top-rung images whose angle to the closest image on
/// the rung below is at most `cluster_tol`. Shards use seeds derived from
/// `seed` and are merged in shard order, so the result does not depend on
/// the number of workers.
pub fn loglimit_directions(
    set: &SemiAlgebraicSet,
    params: &LogParams,
    n: usize,
    seed: u64,
) -> Result<(DirectionCloud, LoglimitDiagnostics)> {
    loglimit_directions_with(set, params, n, seed, &LoglimitOptions::default())
}

pub fn loglimit_directions_with(
    set: &SemiAlgebraicSet,
    params: &LogParams,
    n: usize,
    seed: u64,
    opts: &LoglimitOptions,
) -> Result<(DirectionCloud, LoglimitDiagnostics)> {
    params.validate()?;
    if !set.is_orthant() {
        return Err(LogmapError::NotOrthant);
    }
    let shards = opts.shards.max(1);
    let per: Vec<usize> = (0..shards)
        .map(|s| n / shards + usize::from(s < n % shards))
        .collect();
    let run = |s: usize| {
        ray_shard(
            set,
            params,
            per[s],
            shard_seed(seed, s as u64),
            opts.scan_cells,
        )
    };
    let results: Vec<(DirectionCloud, LoglimitDiagnostics)> = if opts.workers <= 1 {
        (0..shards).map(run).collect()
    } else {
        let mut slots: Vec<Option<(DirectionCloud, LoglimitDiagnostics)>> = vec![None; shards];
        std::thread::scope(|scope| {
            for chunk in slots.chunks_mut(shards.div_ceil(opts.workers)).enumerate() {
                let (ci, chunk) = chunk;
                let base = ci * shards.div_ceil(opts.workers);
                let run = &run;
                scope.spawn(move || {
                    for (k, slot) in chunk.iter_mut().enumerate() {
                        *slot = Some(run(base + k));
                    }
                });
            }
        });
        slots
            .into_iter()
            .map(|s| s.expect("every shard ran"))
            .collect()
    };
    let mut cloud = DirectionCloud::default();
    let mut diag = LoglimitDiagnostics {
        per_rung: vec![0; params.radius_ladder.len()],
        ..Default::default()
    };
    for (c, d) in results {
        cloud.extend(c);
        diag.rays += d.rays;
        diag.unstable += d.unstable;
        for (a, b) in diag.per_rung.iter_mut().zip(d.per_rung) {
            *a += b;
        }
    }
    if diag.per_rung[0] == 0 {
        return Err(LogmapError::Bounded {
            radius: params.radius_ladder[0],
            tried: diag.rays,
        });
    }
    Ok((cloud, diag))
}

fn shard_seed(seed: u64, shard: u64) -> u64 {
    // splitmix64 step
    let mut z = seed ^ shard.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn random_unit<R: Rng>(dim: usize, rng: &mut R) -> Vec<f64> {
    loop {
        // Box-Muller pairs
        let v: Vec<f64> = (0..dim)
            .map(|_| {
                let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
                let u2: f64 = rng.gen_range(0.0..1.0);
                (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
            })
            .collect();
        if let Some(u) = normalize(&v) {
            return u;
        }
    }
}

/// Log-images (natural logs) of points of `set` on one ray at free-norm `s`.
fn images_on_ray(
    set: &SemiAlgebraicSet,
    eqs: &[&Polynomial],
    assign: &[usize],
    u: &[f64],
    s: f64,
    cells: usize,
) -> Vec<Vec<f64>> {
    let dim = set.ambient_dim();
    let free: Vec<usize> = (0..dim).filter(|i| !assign.contains(i)).collect();
    let mut w = vec![0.0; dim];
    for (k, &i) in free.iter().enumerate() {
        w[i] = s * u[k];
    }
    if eqs.is_empty() {
        return if set.contains_log(&w).unwrap_or(false) {
            vec![w]
        } else {
            vec![]
        };
    }
    let reach = 4.0 * s + 20.0;
    let mut out = Vec::new();
    if eqs.len() == 1 {
        let var = assign[0];
        let p = eqs[0];
        let base = w.clone();
        let f = |t: f64| {
            let mut pt = base.clone();
            pt[var] = t;
            p.eval_log_scaled(&pt).map(|r| r.value).unwrap_or(f64::NAN)
        };
        for r in semialg::scan_roots(&f, -reach, reach, cells) {
            let mut pt = base.clone();
            pt[var] = r;
            if set.contains_log(&pt).unwrap_or(false) {
                out.push(pt);
            }
        }
    } else {
        let ranges = vec![(-reach, reach); dim];
        // deterministic per ray: derive an rng from the ray itself
        let mut rng =
            ChaCha8Rng::seed_from_u64(u.iter().fold(0u64, |h, x| h.rotate_left(7) ^ x.to_bits()));
        if semialg::solve_equalities(
            eqs,
            assign,
            &mut w,
            &ranges,
            cells,
            30,
            set.eq_tol(),
            &mut rng,
        ) && set.contains_log(&w).unwrap_or(false)
        {
            out.push(w);
        }
    }
    out
}

/// Natural-log sample points along random rays, one per ladder rung, for
/// rays that produce a point on every rung. Lower-rung points are chosen
/// closest in angle to the top-rung one.
pub fn sample_rays(
    set: &SemiAlgebraicSet,
    params: &LogParams,
    rays: usize,
    seed: u64,
) -> Result<Vec<Vec<Vec<f64>>>> {
    params.validate()?;
    if !set.is_orthant() {
        return Err(LogmapError::NotOrthant);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = set.ambient_dim();
    let base = params.log_base();
    let mut out = Vec::new();
    let mut first_rung = 0;
    for _ in 0..rays {
        let eqs = set.mandatory_equalities(&mut rng);
        let assign = if eqs.is_empty() {
            vec![]
        } else {
            match semialg::assign_variables(&eqs, dim, None, &mut rng) {
                Some(a) => a,
                None => continue,
            }
        };
        if dim == assign.len() {
            continue;
        }
        let u = random_unit(dim - assign.len(), &mut rng);
        let per: Vec<Vec<Vec<f64>>> = params
            .radius_ladder
            .iter()
            .map(|&r| images_on_ray(set, &eqs, &assign, &u, r * base, 600))
            .collect();
        first_rung += per[0].len();
        if per.iter().any(Vec::is_empty) {
            continue;
        }
        let top = per.last().expect("nonempty ladder")[0].clone();
        let mut chain: Vec<Vec<f64>> = per[..per.len() - 1]
            .iter()
            .map(|imgs| {
                imgs.iter()
                    .min_by(|a, b| angle(a, &top).total_cmp(&angle(b, &top)))
                    .expect("nonempty")
                    .clone()
            })
            .collect();
        chain.push(top);
        out.push(chain);
    }
    if first_rung == 0 {
        return Err(LogmapError::Bounded {
            radius: params.radius_ladder[0],
            tried: rays,
        });
    }
    Ok(out)
}

fn ray_shard(
    set: &SemiAlgebraicSet,
    params: &LogParams,
    rays: usize,
    seed: u64,
    cells: usize,
) -> (DirectionCloud, LoglimitDiagnostics) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = set.ambient_dim();
    let base = params.log_base();
    let rungs = &params.radius_ladder;
    let mut cloud = DirectionCloud::default();
    let mut diag = LoglimitDiagnostics {
        rays,
        per_rung: vec![0; rungs.len()],
        unstable: 0,
    };
    for _ in 0..rays {
        let eqs = set.mandatory_equalities(&mut rng);
        let assign = if eqs.is_empty() {
            vec![]
        } else {
            match semialg::assign_variables(&eqs, dim, None, &mut rng) {
                Some(a) => a,
                None => continue,
            }
        };
        let free_dim = dim - assign.len();
        if free_dim == 0 {
            continue;
        }
        let u = random_unit(free_dim, &mut rng);
        let per_rung: Vec<Vec<Vec<f64>>> = rungs
            .iter()
            .map(|&r| {
                images_on_ray(set, &eqs, &assign, &u, r * base, cells)
                    .into_iter()
                    .map(|w| w.iter().map(|x| x / base).collect::<Vec<f64>>())
                    .filter(|l: &Vec<f64>| norm(l) >= r * (1.0 - 1e-12))
                    .collect()
            })
            .collect();
        for (k, imgs) in per_rung.iter().enumerate() {
            diag.per_rung[k] += imgs.len();
        }
        let top = per_rung.last().expect("nonempty ladder");
        let below = if per_rung.len() >= 2 {
            &per_rung[per_rung.len() - 2]
        } else {
            top
        };
        for img in top {
            let drift = below
                .iter()
                .map(|b| angle(img, b))
                .fold(f64::INFINITY, f64::min);
            if drift <= params.cluster_tol {
                cloud.radii.push(norm(img));
                cloud.directions.push(normalize(img).expect("norm >= rung"));
            } else {
                diag.unstable += 1;
            }
        }
    }
    (cloud, diag)
}

// ---------------------------------------------------------------------------
// tropical prevariety

fn monomial_values(p: &Polynomial, d: &[f64]) -> Vec<(f64, Vec<f64>)> {
    p.terms()
        .map(|(e, _)| {
            let ef: Vec<f64> = e.iter().map(|&k| k as f64).collect();
            (ef.iter().zip(d).map(|(a, b)| a * b).sum(), ef)
        })
        .collect()
}

/// Whether the max of `<e, d>` over the monomials of `p` is attained, up to
/// `tol`, by at least two monomials.
pub fn tropical_prevariety_member(p: &Polynomial, d: &[f64], tol: f64) -> bool {
    let mut vals: Vec<f64> = monomial_values(p, d).into_iter().map(|v| v.0).collect();
    if vals.len() < 2 {
        return false;
    }
    vals.sort_by(|a, b| b.total_cmp(a));
    vals[0] - vals[1] <= tol
}

/// Angle from `d` to the nearest hyperplane on which the maximal monomial of
/// `p` at `d` ties with another monomial. Zero on the prevariety.
pub fn tropical_angular_distance(p: &Polynomial, d: &[f64]) -> f64 {
    let vals = monomial_values(p, d);
    if vals.len() < 2 {
        return f64::INFINITY;
    }
    let nd = norm(d);
    let (imax, _) = vals
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .0.total_cmp(&b.1 .0))
        .expect("nonempty");
    let (vtop, etop) = &vals[imax];
    vals.iter()
        .enumerate()
        .filter(|(j, _)| *j != imax)
        .map(|(_, (v, e))| {
            let n = norm(&etop.iter().zip(e).map(|(a, b)| a - b).collect::<Vec<_>>());
            ((vtop - v) / (n * nd)).clamp(0.0, 1.0).asin()
        })
        .fold(f64::INFINITY, f64::min)
}

// ---------------------------------------------------------------------------
// clustering

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClusterKind {
    RayLike,
    FaceLike,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Cluster {
    pub members: Vec<usize>,
    pub mean: Vec<f64>,
    pub angular_diameter: f64,
    pub kind: ClusterKind,
    /// Extreme directions of the cluster (one for ray-like, two for
    /// face-like); only filled for ambient dimension <= 3.
    pub spanning_rays: Vec<Vec<f64>>,
    /// Unit normal of the best-fit plane through the origin (3D face-like).
    pub plane_normal: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClusterReport {
    pub clusters: Vec<Cluster>,
    /// Points whose neighbourhood mixes several cones, assigned afterwards.
    pub junction_points: usize,
}

impl ClusterReport {
    pub fn count(&self) -> usize {
        self.clusters.len()
    }

    /// Clusters holding at least `min_fraction` of all points.
    pub fn significant(&self, min_fraction: f64) -> impl Iterator<Item = &Cluster> {
        let total: usize = self.clusters.iter().map(|c| c.members.len()).sum();
        let min = (min_fraction * total as f64).ceil() as usize;
        self.clusters
            .iter()
            .filter(move |c| c.members.len() >= min.max(1))
    }

    pub fn face_like(&self, min_fraction: f64) -> usize {
        self.significant(min_fraction)
            .filter(|c| c.kind == ClusterKind::FaceLike)
            .count()
    }
}

/// Knobs for [`cluster_cones_with`].
#[derive(Clone, Debug)]
pub struct ClusterOptions {
    /// Neighbourhood radius for local arc fitting, in units of `tol`.
    pub fit_radius: f64,
    /// Max angle between local plane normals of linked points.
    pub normal_tol: f64,
    /// Ratio of secondary to primary spread above which a neighbourhood is
    /// not a single arc.
    pub junction_ratio: f64,
}

impl Default for ClusterOptions {
    fn default() -> Self {
        ClusterOptions {
            fit_radius: 3.0,
            normal_tol: 0.3,
            junction_ratio: 0.08,
        }
    }
}

/// Chain clustering of a direction cloud at angular tolerance `tol`.
///
/// In ambient dimension 3 a 2-dimensional cone meets the sphere in an arc of
/// a great circle, so two directions are only linked when their local arcs
/// lie in the same plane; neighbourhoods that mix several arcs are held out
/// of the linking and attached to the nearest cluster at the end.
pub fn cluster_cones(cloud: &DirectionCloud, tol: f64) -> Result<ClusterReport> {
    cluster_cones_with(cloud, tol, &ClusterOptions::default())
}

struct SpatialGrid {
    cell: f64,
    map: HashMap<Vec<i64>, Vec<usize>>,
}

impl SpatialGrid {
    fn new(points: &[Vec<f64>], cell: f64) -> Self {
        let mut map: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            map.entry(Self::key(p, cell)).or_default().push(i);
        }
        SpatialGrid { cell, map }
    }

    fn key(p: &[f64], cell: f64) -> Vec<i64> {
        p.iter().map(|x| (x / cell).floor() as i64).collect()
    }

    /// Indices within chord distance `r <= cell` of `p`.
    fn near(&self, points: &[Vec<f64>], p: &[f64], r: f64) -> Vec<usize> {
        let k = Self::key(p, self.cell);
        let dim = k.len();
        let mut out = Vec::new();
        let total = 3usize.pow(dim as u32);
        for code in 0..total {
            let mut c = code;
            let key: Vec<i64> = k
                .iter()
                .map(|&v| {
                    let off = (c % 3) as i64 - 1;
                    c /= 3;
                    v + off
                })
                .collect();
            if let Some(ids) = self.map.get(&key) {
                for &j in ids {
                    let d2: f64 = points[j].iter().zip(p).map(|(a, b)| (a - b).powi(2)).sum();
                    if d2 <= r * r {
                        out.push(j);
                    }
                }
            }
        }
        out
    }
}

fn cross(a: &[f64], b: &[f64]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Local arc normal at `d` from tangent projections of `nbrs`, with the
/// ratio of secondary to primary spread.
fn local_normal(d: &[f64], nbrs: &[&Vec<f64>]) -> Option<([f64; 3], f64)> {
    if nbrs.len() < 4 {
        return None;
    }
    // tangent basis at d
    let helper = if d[0].abs() < 0.9 {
        [1.0, 0.0, 0.0]
    } else {
        [0.0, 1.0, 0.0]
    };
    let e1 = normalize(&cross(d, &helper)).expect("helper not parallel");
    let e2 = cross(d, &e1);
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for v in nbrs {
        let a: f64 = v.iter().zip(&e1).map(|(x, y)| x * y).sum();
        let b: f64 = v.iter().zip(&e2).map(|(x, y)| x * y).sum();
        sxx += a * a;
        sxy += a * b;
        syy += b * b;
    }
    let tr = sxx + syy;
    if tr <= 1e-18 {
        return None;
    }
    let disc = ((sxx - syy).powi(2) + 4.0 * sxy * sxy).sqrt();
    let l1 = 0.5 * (tr + disc);
    let l2 = 0.5 * (tr - disc);
    // principal direction in (e1, e2)
    let theta = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    let t: Vec<f64> = (0..3)
        .map(|i| theta.cos() * e1[i] + theta.sin() * e2[i])
        .collect();
    let n = cross(d, &t);
    Some((n, (l2 / l1).max(0.0)))
}

struct DisjointSet(Vec<usize>);

impl DisjointSet {
    fn find(&mut self, i: usize) -> usize {
        let mut r = i;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut i = i;
        while self.0[i] != r {
            let next = self.0[i];
            self.0[i] = r;
            i = next;
        }
        r
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

pub fn cluster_cones_with(
    cloud: &DirectionCloud,
    tol: f64,
    opts: &ClusterOptions,
) -> Result<ClusterReport> {
    if cloud.is_empty() {
        return Err(LogmapError::EmptyCloud);
    }
    let pts: Vec<Vec<f64>> = cloud
        .directions
        .iter()
        .map(|d| normalize(d).unwrap_or_else(|| d.clone()))
        .collect();
    let n = pts.len();
    let dim = pts[0].len();
    // chord length for angle tol
    let link_r = 2.0 * (tol / 2.0).sin();
    let fit_r = 2.0 * ((opts.fit_radius * tol).min(std::f64::consts::PI) / 2.0).sin();
    let link_grid = SpatialGrid::new(&pts, link_r.max(1e-12));
    let planar = dim == 3;

    let mut normals: Vec<Option<[f64; 3]>> = vec![None; n];
    let mut junction = vec![false; n];
    if planar {
        let fit_grid = SpatialGrid::new(&pts, fit_r);
        for i in 0..n {
            let nb: Vec<&Vec<f64>> = fit_grid
                .near(&pts, &pts[i], fit_r)
                .into_iter()
                .map(|j| &pts[j])
                .collect();
            if let Some((nrm, ratio)) = local_normal(&pts[i], &nb) {
                if ratio > opts.junction_ratio {
                    junction[i] = true;
                } else {
                    normals[i] = Some(nrm);
                }
            }
        }
    }
    let cos_ntol = opts.normal_tol.cos();
    let mut ds = DisjointSet((0..n).collect());
    for i in 0..n {
        if junction[i] {
            continue;
        }
        for j in link_grid.near(&pts, &pts[i], link_r) {
            if j <= i || junction[j] {
                continue;
            }
            let ok = match (normals[i], normals[j]) {
                (Some(a), Some(b)) => (a[0] * b[0] + a[1] * b[1] + a[2] * b[2]).abs() >= cos_ntol,
                _ => true,
            };
            if ok {
                ds.union(i, j);
            }
        }
    }
    // attach junction points to the closest non-junction point's cluster
    let any_regular = junction.iter().any(|j| !j);
    let mut label: Vec<usize> = (0..n).map(|i| ds.find(i)).collect();
    let mut junction_points = 0;
    if any_regular {
        for i in 0..n {
            if !junction[i] {
                continue;
            }
            junction_points += 1;
            let best = (0..n)
                .filter(|&j| !junction[j])
                .min_by(|&a, &b| angle(&pts[i], &pts[a]).total_cmp(&angle(&pts[i], &pts[b])))
                .expect("some regular point");
            label[i] = ds.find(best);
        }
    }
    let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
    let mut index: HashMap<usize, usize> = HashMap::new();
    for (i, &l) in label.iter().enumerate() {
        let g = *index.entry(l).or_insert_with(|| {
            groups.push((l, Vec::new()));
            groups.len() - 1
        });
        groups[g].1.push(i);
    }
    let mut clusters: Vec<Cluster> = groups
        .into_iter()
        .map(|(_, members)| summarize(&pts, members, tol))
        .collect();
    clusters.sort_by(|a, b| {
        b.members
            .len()
            .cmp(&a.members.len())
            .then(a.members[0].cmp(&b.members[0]))
    });
    Ok(ClusterReport {
        clusters,
        junction_points,
    })
}

fn summarize(pts: &[Vec<f64>], members: Vec<usize>, tol: f64) -> Cluster {
    let dim = pts[0].len();
    let mut mean = vec![0.0; dim];
    for &i in &members {
        for (m, x) in mean.iter_mut().zip(&pts[i]) {
            *m += x;
        }
    }
    let mean = normalize(&mean).unwrap_or_else(|| pts[members[0]].clone());
    // two sweeps for the diameter
    let far = |from: &[f64]| {
        members
            .iter()
            .copied()
            .max_by(|&a, &b| angle(from, &pts[a]).total_cmp(&angle(from, &pts[b])))
            .expect("nonempty")
    };
    let a = far(&mean);
    let b = far(&pts[a]);
    let diameter = angle(&pts[a], &pts[b]);
    let kind = if diameter <= 2.0 * tol {
        ClusterKind::RayLike
    } else {
        ClusterKind::FaceLike
    };
    let spanning_rays = if dim > 3 {
        vec![]
    } else if kind == ClusterKind::RayLike {
        vec![mean.clone()]
    } else {
        vec![pts[a].clone(), pts[b].clone()]
    };
    let plane_normal = (dim == 3 && kind == ClusterKind::FaceLike)
        .then(|| fit_plane_normal(pts, &members))
        .flatten();
    Cluster {
        members,
        mean,
        angular_diameter: diameter,
        kind,
        spanning_rays,
        plane_normal,
    }
}

/// Smallest-eigenvalue eigenvector of the second-moment matrix.
fn fit_plane_normal(pts: &[Vec<f64>], members: &[usize]) -> Option<Vec<f64>> {
    let mut m = [[0.0f64; 3]; 3];
    for &i in members {
        for r in 0..3 {
            for c in 0..3 {
                m[r][c] += pts[i][r] * pts[i][c];
            }
        }
    }
    let (_, vecs) = crate::linalg::symmetric3_eigen(&m);
    Some(vecs[0].to_vec())
}
