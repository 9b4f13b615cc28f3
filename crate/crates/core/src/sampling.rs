//! Floating-point brute-force estimators, used to cross-check the exact
//! engine in tests. Nothing here feeds back into an exact verdict.
//!
//! Sampling is split into fixed-size chunks; chunk `c` draws from a ChaCha
//! stream `c` under the configured seed, so results do not depend on how
//! the chunks are scheduled.

use std::collections::BTreeMap;

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use thiserror::Error;

use crate::active::InequalitySystem;
use crate::scalar::Vector;

const CHUNK: usize = 4096;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SamplingError {
    #[error("invalid sampling configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("empty point set")]
    Empty,
    #[error("no infeasible point among the samples")]
    NoInfeasibleSample,
    #[error("no feasible projection found; the system looks infeasible")]
    EmptyPolyhedron,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampleConfig {
    pub sample_count: usize,
    pub seed: u64,
    /// Half-width of the box `[-R, R]^n` that point samples are drawn from.
    pub box_radius: f64,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig {
            sample_count: 100_000,
            seed: 0,
            box_radius: 10.0,
        }
    }
}

impl SampleConfig {
    pub fn new(sample_count: usize, seed: u64, box_radius: f64) -> Result<Self, SamplingError> {
        let cfg = SampleConfig { sample_count, seed, box_radius };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), SamplingError> {
        if self.sample_count == 0 {
            return Err(SamplingError::InvalidConfig("sample_count must be positive"));
        }
        if !(self.box_radius.is_finite() && self.box_radius > 0.0) {
            return Err(SamplingError::InvalidConfig("box_radius must be positive"));
        }
        Ok(())
    }

    /// `(chunk index, generator, samples in chunk)` for each chunk.
    fn chunks(&self) -> impl IndexedParallelIterator<Item = (usize, ChaCha8Rng, usize)> {
        let count = self.sample_count;
        let seed = self.seed;
        (0..count.div_ceil(CHUNK)).into_par_iter().map(move |c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            (c, rng, CHUNK.min(count - c * CHUNK))
        })
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(mut v: Vec<f64>) -> Option<Vec<f64>> {
    let norm = dot(&v, &v).sqrt();
    if norm.is_nan() || norm <= 1e-12 {
        return None;
    }
    v.iter_mut().for_each(|x| *x /= norm);
    Some(v)
}

fn random_direction(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        if let Some(u) = normalize(v) {
            return u;
        }
    }
}

fn max_dot(points: &[Vec<f64>], h: &[f64]) -> f64 {
    points.iter().map(|p| dot(p, h)).fold(f64::NEG_INFINITY, f64::max)
}

/// Orthonormal basis of the tangent space of the unit sphere at `h`.
fn tangent_basis(h: &[f64]) -> Vec<Vec<f64>> {
    let n = h.len();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n - 1);
    for axis in 0..n {
        let mut v = vec![0.0; n];
        v[axis] = 1.0;
        for b in std::iter::once(h).chain(basis.iter().map(Vec::as_slice)) {
            let c = dot(&v, b);
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
        }
        if let Some(u) = normalize(v) {
            if dot(&u, &u) > 0.5 {
                basis.push(u);
            }
        }
        if basis.len() == n - 1 {
            break;
        }
    }
    basis
}

/// Shrinking local search on the sphere around `start`. Every evaluated
/// point is a unit direction, so the result is still an upper bound on the
/// true minimum.
fn polish(points: &[Vec<f64>], start: Vec<f64>, rng: &mut ChaCha8Rng) -> f64 {
    let n = start.len();
    let mut best = start;
    let mut best_val = max_dot(points, &best);
    if n < 2 {
        return best_val;
    }
    let grid: i32 = if n <= 3 { 8 } else { 0 };
    let mut radius = 0.05;
    for _ in 0..48 {
        let basis = tangent_basis(&best);
        let mut offsets: Vec<Vec<f64>> = Vec::new();
        if grid > 0 {
            let steps = (-grid..=grid).map(|g| g as f64 / grid as f64 * radius);
            for combo in (0..basis.len()).map(|_| steps.clone()).multi_cartesian_product() {
                offsets.push(combo);
            }
        } else {
            for _ in 0..256 {
                let d = random_direction(rng, basis.len());
                offsets.push(d.into_iter().map(|x| x * radius).collect());
            }
        }
        let mut improved = false;
        for off in offsets {
            let mut cand = best.clone();
            for (c, b) in off.iter().zip(&basis) {
                cand.iter_mut().zip(b).for_each(|(x, y)| *x += c * y);
            }
            let Some(cand) = normalize(cand) else { continue };
            let val = max_dot(points, &cand);
            if val < best_val {
                best_val = val;
                best = cand;
                improved = true;
            }
        }
        if !improved {
            radius *= 0.5;
        }
    }
    best_val
}

/// `min` over sampled unit directions `h` of `max_i d_i^T h`, followed by a
/// local polish of the best few directions. Never below the true value.
pub fn sample_minmax(points: &[Vec<f64>], cfg: &SampleConfig) -> Result<f64, SamplingError> {
    cfg.validate()?;
    let n = points.first().ok_or(SamplingError::Empty)?.len();
    if n == 0 {
        return Err(SamplingError::Empty);
    }
    const KEEP: usize = 6;
    let mut best: Vec<(f64, usize, Vec<f64>)> = cfg
        .chunks()
        .flat_map_iter(|(c, mut rng, count)| {
            let mut local: Vec<(f64, usize, Vec<f64>)> = (0..count)
                .map(|k| {
                    let h = random_direction(&mut rng, n);
                    (max_dot(points, &h), c * CHUNK + k, h)
                })
                .collect();
            local.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            local.truncate(KEEP);
            local
        })
        .collect();
    best.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    best.truncate(KEEP);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut value = f64::INFINITY;
    for (v, _, h) in best {
        value = value.min(v).min(polish(points, h, &mut rng));
    }
    Ok(value)
}

/// Convenience wrapper for exact points.
pub fn sample_minmax_exact(points: &[Vector], cfg: &SampleConfig) -> Result<f64, SamplingError> {
    let pts: Vec<Vec<f64>> = points.iter().map(Vector::to_f64).collect();
    sample_minmax(&pts, cfg)
}

/// Float copy of an [`InequalitySystem`].
#[derive(Clone, Debug)]
pub struct FloatSystem {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
}

impl From<&InequalitySystem> for FloatSystem {
    fn from(sys: &InequalitySystem) -> Self {
        FloatSystem {
            a: sys.a().rows().iter().map(Vector::to_f64).collect(),
            b: sys.b().to_f64(),
        }
    }
}

impl FloatSystem {
    pub fn residuals(&self, x: &[f64]) -> Vec<f64> {
        self.a.iter().zip(&self.b).map(|(a, b)| dot(a, x) - b).collect()
    }

    pub fn phi(&self, x: &[f64]) -> f64 {
        self.residuals(x).into_iter().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Closed form `max_{i in J(x)} a_i^T h` of the one-sided directional
/// derivative of `phi`; rows within `1e-12` (relative) of the maximum count
/// as active.
pub fn directional_derivative(sys: &FloatSystem, x: &[f64], h: &[f64]) -> f64 {
    let res = sys.residuals(x);
    let top = res.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let tol = 1e-12 * (1.0 + top.abs());
    res.iter()
        .zip(&sys.a)
        .filter(|(r, _)| **r >= top - tol)
        .map(|(_, a)| dot(a, h))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// `(phi(x + t h) - phi(x)) / t`.
pub fn difference_quotient(sys: &FloatSystem, x: &[f64], h: &[f64], t: f64) -> f64 {
    let moved: Vec<f64> = x.iter().zip(h).map(|(a, b)| a + t * b).collect();
    (sys.phi(&moved) - sys.phi(x)) / t
}

/// A candidate face: its independent rows and the inverse of their Gram
/// matrix, ready for repeated projections.
struct Face {
    rows: Vec<usize>,
    gram_inv: Vec<Vec<f64>>,
}

fn invert(mut m: Vec<Vec<f64>>) -> Option<Vec<Vec<f64>>> {
    let k = m.len();
    let mut inv: Vec<Vec<f64>> = (0..k)
        .map(|i| (0..k).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let scale = m.iter().flatten().fold(0.0f64, |a, x| a.max(x.abs())).max(1.0);
    for c in 0..k {
        let p = (c..k).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs()))?;
        if m[p][c].abs() < 1e-10 * scale {
            return None;
        }
        m.swap(c, p);
        inv.swap(c, p);
        let d = m[c][c];
        m[c].iter_mut().for_each(|x| *x /= d);
        inv[c].iter_mut().for_each(|x| *x /= d);
        for r in 0..k {
            if r != c {
                let f = m[r][c];
                for j in 0..k {
                    m[r][j] -= f * m[c][j];
                    inv[r][j] -= f * inv[c][j];
                }
            }
        }
    }
    Some(inv)
}

fn faces(sys: &FloatSystem) -> Vec<Face> {
    let m = sys.a.len();
    let n = sys.a[0].len();
    (1..=m.min(n))
        .flat_map(|k| (0..m).combinations(k))
        .filter_map(|rows| {
            let gram = rows
                .iter()
                .map(|&i| rows.iter().map(|&j| dot(&sys.a[i], &sys.a[j])).collect())
                .collect();
            invert(gram).map(|gram_inv| Face { rows, gram_inv })
        })
        .collect()
}

/// `d(x, P)` by projecting onto every face candidate and keeping feasible
/// projections; `None` if none is feasible.
fn distance_to_polyhedron(sys: &FloatSystem, faces: &[Face], x: &[f64]) -> Option<f64> {
    nearest_face(sys, faces, x).map(|(d, _)| d)
}

/// Distance to the polyhedron and the index of the face attaining it
/// (`usize::MAX` when `x` is feasible).
fn nearest_face(sys: &FloatSystem, faces: &[Face], x: &[f64]) -> Option<(f64, usize)> {
    let feas_tol = 1e-9 * (1.0 + x.iter().fold(0.0f64, |a, v| a.max(v.abs())));
    if sys.residuals(x).iter().all(|r| *r <= feas_tol) {
        return Some((0.0, usize::MAX));
    }
    let mut best: Option<(f64, usize)> = None;
    for (k, face) in faces.iter().enumerate() {
        let resid: Vec<f64> = face.rows.iter().map(|&i| dot(&sys.a[i], x) - sys.b[i]).collect();
        let mu: Vec<f64> = face.gram_inv.iter().map(|row| dot(row, &resid)).collect();
        let mut y = x.to_vec();
        for (m, &i) in mu.iter().zip(&face.rows) {
            y.iter_mut().zip(&sys.a[i]).for_each(|(v, a)| *v -= m * a);
        }
        if sys.residuals(&y).iter().all(|r| *r <= feas_tol) {
            let d: f64 = y.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            if best.is_none_or(|(b, _)| d < b) {
                best = Some((d, k));
            }
        }
    }
    best
}

/// Ratio at `x`, skipping points closer than `min_dist` to the polyhedron
/// where cancellation makes the float quotient unreliable.
fn ratio_at(sys: &FloatSystem, faces: &[Face], x: &[f64], min_dist: f64) -> Option<f64> {
    let value = sys.phi(x);
    if value <= 0.0 {
        return None;
    }
    let d = distance_to_polyhedron(sys, faces, x)?;
    (d > min_dist).then(|| value / d)
}

/// Moves `x` the shortest distance onto the set where its `k` largest
/// residuals are equal, for each `k >= 2`. Near a low-dimensional kink of
/// `phi` this lands on the kink directly instead of zig-zagging towards it.
fn ridge_snaps(sys: &FloatSystem, x: &[f64]) -> Vec<Vec<f64>> {
    let res = sys.residuals(x);
    let mut order: Vec<usize> = (0..res.len()).collect();
    order.sort_by(|&i, &j| res[j].total_cmp(&res[i]).then(i.cmp(&j)));
    let n = x.len();
    let top = order[0];
    let mut out = Vec::new();
    for k in 2..=order.len().min(n + 1) {
        let rows: Vec<Vec<f64>> = order[1..k]
            .iter()
            .map(|&i| sys.a[i].iter().zip(&sys.a[top]).map(|(p, q)| p - q).collect())
            .collect();
        let gap: Vec<f64> = order[1..k].iter().map(|&i| res[i] - res[top]).collect();
        let gram = rows.iter().map(|r| rows.iter().map(|c| dot(r, c)).collect()).collect();
        let Some(inv) = invert(gram) else { break };
        let mu: Vec<f64> = inv.iter().map(|row| dot(row, &gap)).collect();
        let mut y = x.to_vec();
        for (m, r) in mu.iter().zip(&rows) {
            y.iter_mut().zip(r).for_each(|(v, a)| *v -= m * a);
        }
        out.push(y);
    }
    out
}

/// Shrinking pattern search for the residual/distance ratio around `start`,
/// interleaved with ridge snaps.
fn polish_ratio(sys: &FloatSystem, faces: &[Face], start: Vec<f64>, mut best_val: f64, radius: f64) -> f64 {
    let n = start.len();
    let min_dist = radius * 1e-3;
    let mut best = start;
    let mut step = radius;
    let steps: Vec<f64> = if n <= 3 { vec![-1.0, -0.5, 0.0, 0.5, 1.0] } else { vec![-1.0, 0.0, 1.0] };
    for _ in 0..60 {
        let mut improved = false;
        let center = best.clone();
        let grid = (0..n)
            .map(|_| steps.iter().copied())
            .multi_cartesian_product()
            .map(|off| center.iter().zip(&off).map(|(c, o)| c + o * step).collect::<Vec<f64>>());
        for cand in ridge_snaps(sys, &center).into_iter().chain(grid) {
            if let Some(r) = ratio_at(sys, faces, &cand, min_dist) {
                if r < best_val {
                    best_val = r;
                    best = cand;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    best_val
}

/// `min` over sampled infeasible points of `phi_+(x) / d(x, P)`, followed by
/// a local polish: an upper bound on the Hoffman constant.
///
/// Samples are grouped by their most violated row and the face their
/// projection lands on; the best sample of each of the most promising groups
/// seeds a pattern search, so thin valleys around low-dimensional active
/// regions are not crowded out by one wide basin.
pub fn estimate_sigma(sys: &InequalitySystem, cfg: &SampleConfig) -> Result<f64, SamplingError> {
    cfg.validate()?;
    const STARTS: usize = 24;
    type Groups = BTreeMap<(usize, usize), (f64, usize, Vec<f64>)>;
    fn merge(into: &mut Groups, key: (usize, usize), cand: (f64, usize, Vec<f64>)) {
        match into.get(&key) {
            Some(cur) if (cur.0, cur.1) <= (cand.0, cand.1) => {}
            _ => {
                into.insert(key, cand);
            }
        }
    }
    let fsys = FloatSystem::from(sys);
    let n = sys.n();
    let faces = faces(&fsys);
    let radius = cfg.box_radius;
    let per_chunk: Vec<(Groups, bool)> = cfg
        .chunks()
        .map(|(c, mut rng, count)| {
            let mut groups = Groups::new();
            let mut saw_projection = false;
            for k in 0..count {
                let x: Vec<f64> = (0..n).map(|_| rng.random_range(-radius..=radius)).collect();
                let res = fsys.residuals(&x);
                let (top, value) = res
                    .iter()
                    .copied()
                    .enumerate()
                    .fold((0, f64::NEG_INFINITY), |acc, (i, r)| if r > acc.1 { (i, r) } else { acc });
                if value <= 0.0 {
                    saw_projection = true;
                    continue;
                }
                let Some((d, face)) = nearest_face(&fsys, &faces, &x) else {
                    continue;
                };
                saw_projection = true;
                if d > 0.0 {
                    merge(&mut groups, (top, face), (value / d, c * CHUNK + k, x));
                }
            }
            (groups, saw_projection)
        })
        .collect();
    if !per_chunk.iter().any(|(_, seen)| *seen) {
        return Err(SamplingError::EmptyPolyhedron);
    }
    let mut groups = Groups::new();
    for (chunk, _) in per_chunk {
        for (key, cand) in chunk {
            merge(&mut groups, key, cand);
        }
    }
    let mut starts: Vec<(f64, usize, Vec<f64>)> = groups.into_values().collect();
    starts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    starts.truncate(STARTS);
    starts
        .into_par_iter()
        .map(|(v, _, x)| polish_ratio(&fsys, &faces, x, v, radius * 0.05))
        .reduce_with(f64::min)
        .ok_or(SamplingError::NoInfeasibleSample)
}
