//! Exact dense linear algebra: rank, solving, null spaces and affine hulls.

use crate::error::{check_dim, CoreError, Result};
use crate::scalar::{Matrix, Scalar, Vector};

/// Outcome of [`solve_linear`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LinearSolution {
    /// The system has exactly this solution.
    Unique(Vector),
    /// The system has infinitely many solutions; this is the particular
    /// solution with every free variable set to zero.
    Underdetermined(Vector),
    Inconsistent,
}

impl LinearSolution {
    pub fn point(&self) -> Option<&Vector> {
        match self {
            LinearSolution::Unique(x) | LinearSolution::Underdetermined(x) => Some(x),
            LinearSolution::Inconsistent => None,
        }
    }

    pub fn is_consistent(&self) -> bool {
        !matches!(self, LinearSolution::Inconsistent)
    }
}

/// Brings `rows` to reduced row echelon form, pivoting only in the first
/// `pivot_cols` columns. Returns the pivot column of each leading row.
pub(crate) fn rref(rows: &mut [Vec<Scalar>], pivot_cols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..pivot_cols {
        if r == rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][c].recip();
        for x in rows[r].iter_mut() {
            *x = &*x * &inv;
        }
        let (head, tail) = rows.split_at_mut(r);
        let (pivot_row, rest) = tail.split_first_mut().expect("row r exists");
        for other in head.iter_mut().chain(rest.iter_mut()) {
            if other[c].is_zero() {
                continue;
            }
            let f = other[c].clone();
            for (x, p) in other.iter_mut().zip(pivot_row.iter()).skip(c) {
                if !p.is_zero() {
                    *x = &*x - &(&f * p);
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

fn dense(rows: &[Vector]) -> Vec<Vec<Scalar>> {
    rows.iter().map(|r| r.entries().to_vec()).collect()
}

/// Rank of a (possibly empty) list of rows.
pub fn rank_of_rows(rows: &[Vector]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let n = rows[0].dim();
    rref(&mut dense(rows), n).len()
}

/// Exact rank over the rationals.
pub fn rank(m: &Matrix) -> usize {
    rank_of_rows(m.rows())
}

/// Solves `rows * x = rhs` for `x` in dimension `n`. `rows` may be empty.
pub fn solve_rows(rows: &[Vector], rhs: &[Scalar], n: usize) -> Result<LinearSolution> {
    check_dim(rows.len(), rhs.len())?;
    for r in rows {
        check_dim(n, r.dim())?;
    }
    let mut aug: Vec<Vec<Scalar>> = rows
        .iter()
        .zip(rhs)
        .map(|(r, b)| {
            let mut v = r.entries().to_vec();
            v.push(b.clone());
            v
        })
        .collect();
    let pivots = rref(&mut aug, n);
    if aug[pivots.len()..].iter().any(|r| !r[n].is_zero()) {
        return Ok(LinearSolution::Inconsistent);
    }
    let mut x = vec![Scalar::zero(); n];
    for (row, &c) in aug.iter().zip(&pivots) {
        x[c] = row[n].clone();
    }
    let x = Vector::new(x);
    Ok(if pivots.len() == n {
        LinearSolution::Unique(x)
    } else {
        LinearSolution::Underdetermined(x)
    })
}

/// Solves `M x = rhs` exactly.
pub fn solve_linear(m: &Matrix, rhs: &Vector) -> Result<LinearSolution> {
    solve_rows(m.rows(), rhs.entries(), m.ncols())
}

/// A basis of `{x : rows * x = 0}` in dimension `n`.
pub fn nullspace(rows: &[Vector], n: usize) -> Vec<Vector> {
    let mut a = dense(rows);
    let pivots = if a.is_empty() { Vec::new() } else { rref(&mut a, n) };
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Scalar::zero(); n];
            v[f] = Scalar::one();
            for (row, &p) in a.iter().zip(&pivots) {
                v[p] = -&row[f];
            }
            Vector::new(v)
        })
        .collect()
}

/// Dimension of the affine hull of a non-empty point list.
pub fn affine_hull_dim(points: &[Vector]) -> Result<usize> {
    let first = points.first().ok_or(CoreError::Empty("point list"))?;
    for p in points {
        check_dim(first.dim(), p.dim())?;
    }
    let diffs: Vec<Vector> = points[1..].iter().map(|p| p.sub(first)).collect();
    Ok(rank_of_rows(&diffs))
}

pub fn affinely_independent(points: &[Vector]) -> bool {
    !points.is_empty() && affine_hull_dim(points).is_ok_and(|d| d + 1 == points.len())
}

/// Orthogonal projection of `x` onto `{y : a_i^T y = b_i}` for linearly
/// independent rows `a_i`. Empty `rows` returns `x`.
pub fn project_onto_affine(x: &Vector, rows: &[Vector], rhs: &[Scalar]) -> Option<Vector> {
    if rows.is_empty() {
        return Some(x.clone());
    }
    let k = rows.len();
    let gram: Vec<Vector> = rows
        .iter()
        .map(|ri| rows.iter().map(|rj| ri.dot(rj)).collect())
        .collect();
    let resid: Vec<Scalar> = rows.iter().zip(rhs).map(|(r, b)| r.dot(x) - b).collect();
    let LinearSolution::Unique(mu) = solve_rows(&gram, &resid, k).ok()? else {
        return None;
    };
    let mut y = x.clone();
    for (r, m) in rows.iter().zip(mu.iter()) {
        y = y.axpy(&-m, r);
    }
    Some(y)
}
