//! Sign and exact squared magnitude of `v(D) = min_{|h|=1} max_i d_i^T h`.
//!
//! `v(D)` is negative, zero or positive exactly as the origin lies outside,
//! on the boundary of, or inside `conv(D)`. Its magnitude is the distance
//! from the origin to `conv(D)` in the first case and the radius of the
//! largest origin-centred ball inside `conv(D)` in the last. Both are
//! irrational in general, so they are reported squared.

use std::cmp::Ordering;

use itertools::Itertools;
use rayon::prelude::*;

use crate::error::{check_dim, CoreError, Result};
use crate::linalg::{affine_hull_dim, affinely_independent, nullspace, solve_rows, LinearSolution};
use crate::lp::{feasible_lp, solve_lp, Feasibility, LinearProgram, LpOutcome};
use crate::scalar::{Scalar, Vector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SignTrichotomy {
    /// `0` is outside `conv(D)`.
    Negative,
    /// `0` is on the boundary of `conv(D)`.
    Zero,
    /// `0` is in the interior of `conv(D)`.
    Positive,
}

impl SignTrichotomy {
    pub fn as_str(self) -> &'static str {
        match self {
            SignTrichotomy::Negative => "negative",
            SignTrichotomy::Zero => "zero",
            SignTrichotomy::Positive => "positive",
        }
    }

    fn factor(self) -> f64 {
        match self {
            SignTrichotomy::Negative => -1.0,
            SignTrichotomy::Zero => 0.0,
            SignTrichotomy::Positive => 1.0,
        }
    }
}

/// `v(D) = sign * sqrt(value_sq)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SquaredMagnitude {
    pub sign: SignTrichotomy,
    pub value_sq: Scalar,
}

impl SquaredMagnitude {
    /// Floating approximation of `v(D)`.
    pub fn approx(&self) -> f64 {
        self.sign.factor() * self.value_sq.to_f64().sqrt()
    }

    /// Orders by the signed value `v(D)` without taking square roots.
    pub fn cmp_value(&self, other: &SquaredMagnitude) -> Ordering {
        match self.sign.cmp(&other.sign) {
            Ordering::Equal => match self.sign {
                SignTrichotomy::Negative => other.value_sq.cmp(&self.value_sq),
                SignTrichotomy::Zero => Ordering::Equal,
                SignTrichotomy::Positive => self.value_sq.cmp(&other.value_sq),
            },
            ord => ord,
        }
    }
}

fn validate(points: &[Vector]) -> Result<usize> {
    let first = points.first().ok_or(CoreError::Empty("point set"))?;
    let n = first.dim();
    if n == 0 {
        return Err(CoreError::Empty("zero-dimensional points"));
    }
    for p in points {
        check_dim(n, p.dim())?;
    }
    Ok(n)
}

/// Drops repeated points, keeping first occurrences in order.
pub fn dedup(points: &[Vector]) -> Vec<Vector> {
    let mut out: Vec<Vector> = Vec::with_capacity(points.len());
    for p in points {
        if !out.contains(p) {
            out.push(p.clone());
        }
    }
    out
}

/// Weights `lambda >= 0`, `sum lambda = 1`, `sum lambda_i d_i = 0`, if the
/// origin lies in `conv(D)`.
pub fn hull_multipliers(points: &[Vector]) -> Result<Option<Vector>> {
    let n = validate(points)?;
    let k = points.len();
    let mut lp = LinearProgram::new(k);
    for axis in 0..n {
        lp.add_eq(points.iter().map(|p| p[axis].clone()).collect(), Scalar::zero())?;
    }
    lp.add_eq(Vector::new(vec![Scalar::one(); k]), Scalar::one())?;
    for i in 0..k {
        lp.set_lower_bound(i, Scalar::zero());
        lp.add_le(Vector::unit(k, i), Scalar::one())?;
    }
    Ok(match feasible_lp(&lp)? {
        Feasibility::Feasible(lambda) => Some(lambda),
        Feasibility::Infeasible(_) => None,
    })
}

/// Optimal value of `max t : lambda_i >= t, sum lambda = 1, sum lambda_i d_i = 0`.
/// Positive exactly when the origin is in the relative interior of `conv(D)`.
fn min_weight_margin(points: &[Vector], n: usize) -> Result<Option<Scalar>> {
    let k = points.len();
    let t = k;
    let mut lp = LinearProgram::new(k + 1).maximize(Vector::unit(k + 1, t))?;
    for axis in 0..n {
        let row = points
            .iter()
            .map(|p| p[axis].clone())
            .chain([Scalar::zero()])
            .collect();
        lp.add_eq(row, Scalar::zero())?;
    }
    let mut ones = vec![Scalar::one(); k + 1];
    ones[t] = Scalar::zero();
    lp.add_eq(Vector::new(ones), Scalar::one())?;
    for i in 0..k {
        let mut row = vec![Scalar::zero(); k + 1];
        row[i] = -Scalar::one();
        row[t] = Scalar::one();
        lp.add_le(Vector::new(row), Scalar::zero())?;
    }
    Ok(match solve_lp(&lp)? {
        LpOutcome::Optimal { value, .. } => Some(value),
        _ => None,
    })
}

/// Sign of `v(D)`.
pub fn minmax_sign(points: &[Vector]) -> Result<SignTrichotomy> {
    let n = validate(points)?;
    if hull_multipliers(points)?.is_none() {
        return Ok(SignTrichotomy::Negative);
    }
    if affine_hull_dim(points)? == n {
        let pts = dedup(points);
        if min_weight_margin(&pts, n)?.is_some_and(|t| t.is_positive()) {
            return Ok(SignTrichotomy::Positive);
        }
    }
    Ok(SignTrichotomy::Zero)
}

/// Barycentric projection of the origin onto `aff(S)` for affinely
/// independent `S`: returns the point and its weights.
fn project_origin_onto_hull_of(simplex: &[&Vector]) -> Option<(Vector, Vec<Scalar>)> {
    let base = simplex[0];
    let dirs: Vec<Vector> = simplex[1..].iter().map(|p| p.sub(base)).collect();
    let k = dirs.len();
    let alpha = if k == 0 {
        Vector::zeros(0)
    } else {
        let gram: Vec<Vector> = dirs
            .iter()
            .map(|a| dirs.iter().map(|b| a.dot(b)).collect())
            .collect();
        let rhs: Vec<Scalar> = dirs.iter().map(|a| -a.dot(base)).collect();
        match solve_rows(&gram, &rhs, k).ok()? {
            LinearSolution::Unique(a) => a,
            _ => return None,
        }
    };
    let mut weights = Vec::with_capacity(k + 1);
    weights.push(Scalar::one() - alpha.iter().sum::<Scalar>());
    weights.extend(alpha.iter().cloned());
    let mut p = base.clone();
    for (a, d) in alpha.iter().zip(&dirs) {
        p = p.axpy(a, d);
    }
    Some((p, weights))
}

/// Nearest point of `conv(D)` to the origin and its squared norm, by exact
/// enumeration of every affinely independent subset of at most `n + 1`
/// points.
pub fn min_norm_point_sq(points: &[Vector]) -> Result<(Vector, Scalar)> {
    let n = validate(points)?;
    let pts = dedup(points);
    let max_size = pts.len().min(n + 1);
    let candidates: Vec<Vec<usize>> = (1..=max_size)
        .flat_map(|r| (0..pts.len()).combinations(r))
        .collect();
    let best = candidates
        .par_iter()
        .enumerate()
        .filter_map(|(order, subset)| {
            let simplex: Vec<&Vector> = subset.iter().map(|&i| &pts[i]).collect();
            if simplex.len() > 1 {
                let owned: Vec<Vector> = simplex.iter().map(|p| (*p).clone()).collect();
                if !affinely_independent(&owned) {
                    return None;
                }
            }
            let (p, weights) = project_origin_onto_hull_of(&simplex)?;
            if weights.iter().any(Scalar::is_negative) {
                return None;
            }
            let d = p.norm_sq();
            Some((d, order, p))
        })
        .min_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)))
        .expect("every singleton is a candidate");
    Ok((best.2, best.0))
}

/// Squared radius of the largest origin-centred ball inside `conv(D)`, by
/// enumerating every hyperplane through `n` affinely independent points that
/// supports `conv(D)` with the origin strictly on the inner side.
pub fn inradius_at_origin_sq(points: &[Vector]) -> Result<Scalar> {
    let n = validate(points)?;
    if minmax_sign(points)? != SignTrichotomy::Positive {
        return Err(CoreError::Precondition(
            "origin is not interior to the convex hull".into(),
        ));
    }
    let pts = dedup(points);
    let best = (0..pts.len())
        .combinations(n)
        .par_bridge()
        .filter_map(|subset| {
            let simplex: Vec<Vector> = subset.iter().map(|&i| pts[i].clone()).collect();
            if !affinely_independent(&simplex) {
                return None;
            }
            let dirs: Vec<Vector> = simplex[1..].iter().map(|p| p.sub(&simplex[0])).collect();
            let mut normal = nullspace(&dirs, n).pop()?;
            let mut offset = normal.dot(&simplex[0]);
            if offset.is_zero() {
                return None;
            }
            if offset.is_negative() {
                normal = normal.scale(&-Scalar::one());
                offset = -offset;
            }
            if pts.iter().any(|p| normal.dot(p) > offset) {
                return None;
            }
            Some(offset.square() / normal.norm_sq())
        })
        .min()
        .expect("a full-dimensional hull has at least one facet");
    Ok(best)
}

/// Sign and exact squared magnitude of `v(D)`.
pub fn minmax_value_sq(points: &[Vector]) -> Result<SquaredMagnitude> {
    let sign = minmax_sign(points)?;
    let value_sq = match sign {
        SignTrichotomy::Negative => min_norm_point_sq(points)?.1,
        SignTrichotomy::Zero => Scalar::zero(),
        SignTrichotomy::Positive => inradius_at_origin_sq(points)?,
    };
    Ok(SquaredMagnitude { sign, value_sq })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(rows: &[&[i64]]) -> Vec<Vector> {
        rows.iter().map(|r| Vector::from_ints(r)).collect()
    }

    fn q(n: i64, d: i64) -> Scalar {
        Scalar::ratio(n, d)
    }

    #[test]
    fn sign_examples() {
        assert_eq!(minmax_sign(&pts(&[&[1, 0], &[0, 1]])).unwrap(), SignTrichotomy::Negative);
        assert_eq!(minmax_sign(&pts(&[&[1, 1], &[-1, -1]])).unwrap(), SignTrichotomy::Zero);
        assert_eq!(
            minmax_sign(&pts(&[&[1, 0], &[-1, 0], &[0, 1], &[0, -1]])).unwrap(),
            SignTrichotomy::Positive
        );
    }

    #[test]
    fn lower_dimensional_hull_is_never_positive() {
        // 0 is in the relative interior of a segment in the plane.
        assert_eq!(minmax_sign(&pts(&[&[2, 0], &[-1, 0]])).unwrap(), SignTrichotomy::Zero);
        // 0 is a vertex of a full-dimensional triangle.
        assert_eq!(
            minmax_sign(&pts(&[&[0, 0], &[1, 0], &[0, 1]])).unwrap(),
            SignTrichotomy::Zero
        );
        // 0 on an edge of a triangle.
        assert_eq!(
            minmax_sign(&pts(&[&[-1, 0], &[1, 0], &[0, 1]])).unwrap(),
            SignTrichotomy::Zero
        );
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(minmax_sign(&[]).is_err());
        assert!(min_norm_point_sq(&[]).is_err());
        assert!(minmax_value_sq(&[]).is_err());
    }

    #[test]
    fn min_norm_examples() {
        let (p, d) = min_norm_point_sq(&pts(&[&[1, 0], &[0, 1]])).unwrap();
        assert_eq!(p, Vector::new(vec![q(1, 2), q(1, 2)]));
        assert_eq!(d, q(1, 2));
        let (p, d) = min_norm_point_sq(&pts(&[&[2, 0]])).unwrap();
        assert_eq!((p, d), (Vector::from_ints(&[2, 0]), q(4, 1)));
        let (p, d) = min_norm_point_sq(&pts(&[&[1, 1], &[-1, -1]])).unwrap();
        assert_eq!((p, d), (Vector::zeros(2), Scalar::zero()));
    }

    #[test]
    fn inradius_examples() {
        let cross = pts(&[&[1, 0], &[-1, 0], &[0, 1], &[0, -1]]);
        assert_eq!(inradius_at_origin_sq(&cross).unwrap(), q(1, 2));
        let scaled: Vec<Vector> = cross.iter().map(|p| p.scale(&q(3, 1))).collect();
        assert_eq!(inradius_at_origin_sq(&scaled).unwrap(), q(9, 2));
        let square = pts(&[&[1, 1], &[1, -1], &[-1, 1], &[-1, -1]]);
        assert_eq!(inradius_at_origin_sq(&square).unwrap(), q(1, 1));
    }

    #[test]
    fn inradius_requires_interior_origin() {
        let err = inradius_at_origin_sq(&pts(&[&[1, 0], &[0, 1]])).unwrap_err();
        assert!(matches!(err, CoreError::Precondition(_)));
    }

    #[test]
    fn value_examples() {
        // Rows 1, 2 of the three-row triangle system: the segment y = 1.
        let m = minmax_value_sq(&pts(&[&[1, 1], &[-2, 1]])).unwrap();
        assert_eq!(m, SquaredMagnitude { sign: SignTrichotomy::Negative, value_sq: q(1, 1) });
        // Rows 2, 3: the segment on x + y = -1.
        let m = minmax_value_sq(&pts(&[&[-2, 1], &[1, -2]])).unwrap();
        assert_eq!(m, SquaredMagnitude { sign: SignTrichotomy::Negative, value_sq: q(1, 2) });
        let m = minmax_value_sq(&pts(&[&[1, 1], &[-1, -1]])).unwrap();
        assert_eq!(m, SquaredMagnitude { sign: SignTrichotomy::Zero, value_sq: Scalar::zero() });
        let m = minmax_value_sq(&pts(&[&[3, 0]])).unwrap();
        assert_eq!(m.value_sq, q(9, 1));
        assert_eq!(m.sign, SignTrichotomy::Negative);
    }

    #[test]
    fn repeated_points_are_harmless() {
        let m = minmax_value_sq(&pts(&[&[1, 0], &[1, 0], &[0, 1], &[0, 1]])).unwrap();
        assert_eq!(m.value_sq, q(1, 2));
        let cross = pts(&[&[1, 0], &[-1, 0], &[0, 1], &[0, -1], &[1, 0]]);
        assert_eq!(minmax_value_sq(&cross).unwrap().value_sq, q(1, 2));
    }

    #[test]
    fn one_dimensional_cases() {
        let m = minmax_value_sq(&pts(&[&[2], &[-3]])).unwrap();
        assert_eq!(m, SquaredMagnitude { sign: SignTrichotomy::Positive, value_sq: q(4, 1) });
        let m = minmax_value_sq(&pts(&[&[0], &[5]])).unwrap();
        assert_eq!(m.sign, SignTrichotomy::Zero);
        let m = minmax_value_sq(&pts(&[&[-2], &[-5]])).unwrap();
        assert_eq!(m, SquaredMagnitude { sign: SignTrichotomy::Negative, value_sq: q(4, 1) });
    }
}
