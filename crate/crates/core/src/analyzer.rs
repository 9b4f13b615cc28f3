//! Error-bound, stability and Hoffman-constant verdicts.
//!
//! For `phi(x) = max_i (a_i^T x - b_i)` the directional derivative at `x`
//! is `max_{i in J(x)} a_i^T h`, so the error-bound modulus depends on `x`
//! only through its active set. That reduces every verdict here to a finite
//! scan over realizable active sets:
//!
//! * an error bound holds iff `v({a_i : i in J}) < 0` for every positive-level
//!   set `J`, and then `sigma(A, b)^2 = min_J dist(0, conv{a_i : i in J})^2`;
//! * the constant stays bounded away from zero under linear perturbations iff
//!   `v({a_i : i in I}) != 0` for every zero-level set `I`.

use itertools::Itertools;
use rayon::prelude::*;

use crate::active::{self, active_set, enumerate, phi, IndexSet, InequalitySystem, Level};
use crate::convex::{self, SignTrichotomy};
use crate::error::{check_dim, CoreError, Result};
use crate::linalg::{project_onto_affine, rank_of_rows};
use crate::lp::{feasible, Feasibility};
use crate::scalar::{Matrix, Scalar, Vector};

/// Which positive-level sets [`check_error_bound_with`] evaluates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum EvalMode {
    /// Inclusion-maximal sets only. Sound because `v` can only grow when rows
    /// are added.
    #[default]
    MaximalOnly,
    /// Every realizable set.
    Full,
}

/// Witness that `Ax <= b` has no error bound: a point with positive residual
/// whose active rows contain the origin in their convex hull.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub point: Vector,
    pub active: IndexSet,
    /// Weights over `active`, in index order.
    pub hull_multipliers: Vector,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ErrorBoundVerdict {
    pub has_error_bound: bool,
    pub certificate: Option<Certificate>,
    /// `sigma(A, b)^2` when the bound holds and some point violates the
    /// system; `None` otherwise.
    pub sigma_sq: Option<Scalar>,
    /// Number of index sets whose sign was evaluated.
    pub checked_sets: usize,
    /// Size of the positive-level family.
    pub family_size: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilityVerdict {
    pub stable: bool,
    pub violating_set: Option<IndexSet>,
    /// `min_I v(I)^2` over the zero-level family; `None` when that family is
    /// empty.
    pub lower_bound_sq: Option<Scalar>,
    pub checked_sets: usize,
}

/// Squared Hoffman constant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HoffmanConstant {
    Squared(Scalar),
    /// Some positive-level active set has the origin in its hull.
    NoErrorBound,
    /// No point violates the system (every row is `0^T x <= b_i` with
    /// `b_i >= 0`), so the infimum is over an empty set.
    Infinite,
}

impl HoffmanConstant {
    pub fn squared(&self) -> Option<&Scalar> {
        match self {
            HoffmanConstant::Squared(s) => Some(s),
            _ => None,
        }
    }
}

/// Feasibility of `Ax <= b` itself.
pub fn system_feasibility(sys: &InequalitySystem) -> Result<Feasibility> {
    let ineqs: Vec<(Vector, Scalar)> = sys
        .a()
        .rows()
        .iter()
        .cloned()
        .zip(sys.b().iter().cloned())
        .collect();
    feasible(sys.n(), &[], &ineqs)
}

/// Error-bound verdict with the squared Hoffman constant, evaluating only
/// inclusion-maximal positive-level sets.
pub fn check_error_bound(sys: &InequalitySystem) -> Result<ErrorBoundVerdict> {
    check_error_bound_with(sys, EvalMode::MaximalOnly, true)
}

pub fn check_error_bound_with(
    sys: &InequalitySystem,
    mode: EvalMode,
    with_sigma: bool,
) -> Result<ErrorBoundVerdict> {
    let family = enumerate(sys, Level::Positive);
    let sets: Vec<IndexSet> = match mode {
        EvalMode::MaximalOnly => active::maximal_sets(&family),
        EvalMode::Full => family.sets().cloned().collect(),
    };
    let signs: Vec<SignTrichotomy> = sets
        .par_iter()
        .map(|s| convex::minmax_sign(&sys.rows_of(s)))
        .collect::<Result<_>>()?;
    let mut verdict = ErrorBoundVerdict {
        has_error_bound: true,
        certificate: None,
        sigma_sq: None,
        checked_sets: sets.len(),
        family_size: family.len(),
    };
    if let Some(pos) = signs.iter().position(|s| *s != SignTrichotomy::Negative) {
        let set = &sets[pos];
        let hull_multipliers = convex::hull_multipliers(&sys.rows_of(set))?
            .ok_or_else(|| CoreError::Precondition("non-negative sign without hull weights".into()))?;
        verdict.has_error_bound = false;
        verdict.certificate = Some(Certificate {
            point: family.witness(set).expect("enumerated set has a witness").clone(),
            active: set.clone(),
            hull_multipliers,
        });
        return Ok(verdict);
    }
    if with_sigma && !sets.is_empty() {
        let dists: Vec<Scalar> = sets
            .par_iter()
            .map(|s| convex::min_norm_point_sq(&sys.rows_of(s)).map(|(_, d)| d))
            .collect::<Result<_>>()?;
        verdict.sigma_sq = dists.into_iter().min();
    }
    Ok(verdict)
}

/// Exact `sigma(A, b)^2`.
pub fn hoffman_exact(sys: &InequalitySystem) -> Result<HoffmanConstant> {
    let verdict = check_error_bound(sys)?;
    Ok(match (verdict.has_error_bound, verdict.sigma_sq) {
        (false, _) => HoffmanConstant::NoErrorBound,
        (true, Some(s)) => HoffmanConstant::Squared(s),
        (true, None) => HoffmanConstant::Infinite,
    })
}

/// Checks a certificate by substitution alone: positive residual at the
/// point, the claimed active set, and hull weights over its rows.
pub fn verify_certificate(sys: &InequalitySystem, cert: &Certificate) -> bool {
    if cert.point.dim() != sys.n()
        || cert.active.iter().any(|i| i >= sys.m())
        || cert.hull_multipliers.dim() != cert.active.len()
    {
        return false;
    }
    let Ok(value) = phi(sys, &cert.point) else {
        return false;
    };
    if !value.is_positive() {
        return false;
    }
    if active_set(sys, &cert.point).ok().as_ref() != Some(&cert.active) {
        return false;
    }
    let lambda = cert.hull_multipliers.entries();
    if lambda.iter().any(Scalar::is_negative) || lambda.iter().sum::<Scalar>() != Scalar::one() {
        return false;
    }
    let mut combo = Vector::zeros(sys.n());
    for (w, i) in lambda.iter().zip(cert.active.iter()) {
        combo = combo.axpy(w, sys.row(i));
    }
    combo.is_zero()
}

/// Stability of the Hoffman constant under epsilon-linear perturbations.
pub fn check_stability(sys: &InequalitySystem) -> Result<StabilityVerdict> {
    let family = enumerate(sys, Level::Zero);
    let sets: Vec<&IndexSet> = family.sets().collect();
    let values: Vec<convex::SquaredMagnitude> = sets
        .par_iter()
        .map(|s| convex::minmax_value_sq(&sys.rows_of(s)))
        .collect::<Result<_>>()?;
    let violating_set = sets
        .iter()
        .zip(&values)
        .find(|(_, v)| v.sign == SignTrichotomy::Zero)
        .map(|(s, _)| (*s).clone());
    Ok(StabilityVerdict {
        stable: violating_set.is_none(),
        violating_set,
        lower_bound_sq: values.into_iter().map(|v| v.value_sq).min(),
        checked_sets: sets.len(),
    })
}

/// The data `(epsilon, u, x_bar)` of an epsilon-linear perturbation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Perturbation {
    epsilon: Scalar,
    u: Vector,
    x_bar: Vector,
}

impl Perturbation {
    /// Requires `epsilon >= 0` and `|u|^2 <= 1`. `epsilon = 0` is allowed and
    /// leaves the system unchanged.
    pub fn new(epsilon: Scalar, u: Vector, x_bar: Vector) -> Result<Self> {
        if epsilon.is_negative() {
            return Err(CoreError::InvalidPerturbation("epsilon must be non-negative".into()));
        }
        check_dim(u.dim(), x_bar.dim())?;
        if u.norm_sq() > Scalar::one() {
            return Err(CoreError::InvalidPerturbation("|u| must be at most 1".into()));
        }
        Ok(Perturbation { epsilon, u, x_bar })
    }

    pub fn epsilon(&self) -> &Scalar {
        &self.epsilon
    }

    pub fn u(&self) -> &Vector {
        &self.u
    }

    pub fn x_bar(&self) -> &Vector {
        &self.x_bar
    }
}

/// `a_i + eps u` and `b_i + eps u^T x_bar`. The anchor `x_bar` must lie on
/// the boundary of the feasible set, tested as `phi(x_bar) = 0`.
pub fn perturb(sys: &InequalitySystem, p: &Perturbation) -> Result<InequalitySystem> {
    check_dim(sys.n(), p.u.dim())?;
    if !phi(sys, &p.x_bar)?.is_zero() {
        return Err(CoreError::InvalidPerturbation(
            "x_bar is not on the boundary of the feasible set".into(),
        ));
    }
    let shift = p.u.scale(&p.epsilon);
    let offset = &p.epsilon * p.u.dot(&p.x_bar);
    let rows = sys.a().rows().iter().map(|a| a.add(&shift)).collect();
    let b = sys.b().iter().map(|b| b + &offset).collect();
    InequalitySystem::new(Matrix::from_rows(rows)?, b)
}

/// Exact `d(x, P)^2` by projecting onto the affine hull of every candidate
/// face (linearly independent sets of at most `n` rows) and keeping the
/// feasible projections. `None` when the system is infeasible.
pub fn distance_sq_to_polyhedron(sys: &InequalitySystem, x: &Vector) -> Result<Option<Scalar>> {
    check_dim(sys.n(), x.dim())?;
    if sys.is_feasible_point(x)? {
        return Ok(Some(Scalar::zero()));
    }
    let max_size = sys.m().min(sys.n());
    let subsets: Vec<Vec<usize>> = (1..=max_size).flat_map(|k| (0..sys.m()).combinations(k)).collect();
    let best = subsets
        .par_iter()
        .filter_map(|subset| {
            let rows: Vec<Vector> = subset.iter().map(|&i| sys.row(i).clone()).collect();
            if rank_of_rows(&rows) != rows.len() {
                return None;
            }
            let rhs: Vec<Scalar> = subset.iter().map(|&i| sys.b()[i].clone()).collect();
            let y = project_onto_affine(x, &rows, &rhs)?;
            sys.is_feasible_point(&y)
                .ok()?
                .then(|| y.sub(x).norm_sq())
        })
        .min();
    Ok(best)
}

/// `phi_+(x)^2 / d(x, P)^2` at an infeasible point `x`.
pub fn perturbation_ratio(sys: &InequalitySystem, x: &Vector) -> Result<Scalar> {
    let value = phi(sys, x)?;
    if !value.is_positive() {
        return Err(CoreError::Precondition("ratio is undefined at a feasible point".into()));
    }
    let dist = distance_sq_to_polyhedron(sys, x)?
        .ok_or_else(|| CoreError::Precondition("system is infeasible".into()))?;
    Ok(value.square() / dist)
}

/// `A = I_m`, `b = 0`: independent rows, so both active-set families consist
/// of all `2^m - 1` non-empty subsets.
pub fn gen_worstcase(m: usize) -> InequalitySystem {
    assert!(m >= 1, "m must be positive");
    InequalitySystem::new(Matrix::identity(m), Vector::zeros(m)).expect("identity system")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Scalar {
        Scalar::ratio(n, d)
    }

    fn triangle() -> InequalitySystem {
        InequalitySystem::from_ints(&[&[1, 1], &[-2, 1], &[1, -2]], &[1, 2, 3]).unwrap()
    }

    fn flat_pair() -> InequalitySystem {
        InequalitySystem::from_ints(&[&[1, 1], &[-1, -1]], &[0, 0]).unwrap()
    }

    fn infeasible_line() -> InequalitySystem {
        InequalitySystem::from_ints(&[&[1], &[-1]], &[-1, -1]).unwrap()
    }

    fn half_plane() -> InequalitySystem {
        InequalitySystem::from_ints(&[&[1, 0]], &[0]).unwrap()
    }

    #[test]
    fn error_bound_examples() {
        let v = check_error_bound(&triangle()).unwrap();
        assert!(v.has_error_bound);
        assert!(v.certificate.is_none());

        let v = check_error_bound(&half_plane()).unwrap();
        assert!(v.has_error_bound);
        assert_eq!(v.sigma_sq, Some(q(1, 1)));

        let v = check_error_bound(&infeasible_line()).unwrap();
        assert!(!v.has_error_bound);
        let cert = v.certificate.unwrap();
        assert_eq!(cert.active, IndexSet::full(2));
        assert_eq!(cert.hull_multipliers, Vector::new(vec![q(1, 2), q(1, 2)]));
        assert!(v.sigma_sq.is_none());
    }

    #[test]
    fn full_mode_agrees_with_maximal_mode() {
        for sys in [triangle(), half_plane(), gen_worstcase(3), infeasible_line()] {
            let a = check_error_bound_with(&sys, EvalMode::MaximalOnly, true).unwrap();
            let b = check_error_bound_with(&sys, EvalMode::Full, true).unwrap();
            assert_eq!(a.has_error_bound, b.has_error_bound);
            assert_eq!(a.sigma_sq, b.sigma_sq);
            assert!(a.checked_sets <= b.checked_sets);
        }
    }

    #[test]
    fn stability_examples() {
        let v = check_stability(&triangle()).unwrap();
        assert!(v.stable);
        assert_eq!(v.lower_bound_sq, Some(q(1, 2)));
        assert_eq!(v.checked_sets, 6);

        let v = check_stability(&flat_pair()).unwrap();
        assert!(!v.stable);
        assert_eq!(v.violating_set, Some(IndexSet::full(2)));
        assert_eq!(v.lower_bound_sq, Some(Scalar::zero()));

        let v = check_stability(&half_plane()).unwrap();
        assert!(v.stable);
        assert_eq!(v.lower_bound_sq, Some(q(1, 1)));
    }

    #[test]
    fn hoffman_examples() {
        let single = InequalitySystem::from_ints(&[&[3, 4]], &[-7]).unwrap();
        assert_eq!(hoffman_exact(&single).unwrap(), HoffmanConstant::Squared(q(25, 1)));
        assert_eq!(hoffman_exact(&gen_worstcase(2)).unwrap(), HoffmanConstant::Squared(q(1, 2)));
        let HoffmanConstant::Squared(s) = hoffman_exact(&triangle()).unwrap() else {
            panic!("triangle system has an error bound");
        };
        assert!(s >= q(1, 2));
        assert_eq!(hoffman_exact(&infeasible_line()).unwrap(), HoffmanConstant::NoErrorBound);
        let trivial = InequalitySystem::from_ints(&[&[0, 0]], &[1]).unwrap();
        assert_eq!(hoffman_exact(&trivial).unwrap(), HoffmanConstant::Infinite);
    }

    #[test]
    fn certificate_checks() {
        let sys = infeasible_line();
        let cert = check_error_bound(&sys).unwrap().certificate.unwrap();
        assert!(verify_certificate(&sys, &cert));

        // Every point of this system violates it, so "feasible point" means a
        // point of the feasible half-line of the first row alone.
        let moved = Certificate { point: Vector::from_ints(&[5]), ..cert.clone() };
        assert!(!verify_certificate(&sys, &moved));

        let skewed = Certificate {
            hull_multipliers: Vector::from_ints(&[1, 0]),
            ..cert.clone()
        };
        assert!(!verify_certificate(&sys, &skewed));

        let feasible_sys = InequalitySystem::from_ints(&[&[1], &[-1]], &[1, 1]).unwrap();
        let at_zero = Certificate { point: Vector::zeros(1), ..cert };
        assert!(!verify_certificate(&feasible_sys, &at_zero));
    }

    #[test]
    fn perturb_examples() {
        let eps = q(1, 10);
        let p = Perturbation::new(eps.clone(), Vector::from_ints(&[0, 1]), Vector::zeros(2)).unwrap();
        let out = perturb(&flat_pair(), &p).unwrap();
        assert_eq!(out.row(0), &Vector::new(vec![q(1, 1), q(11, 10)]));
        assert_eq!(out.row(1), &Vector::new(vec![q(-1, 1), q(-9, 10)]));
        assert_eq!(out.b(), &Vector::zeros(2));

        let p0 = Perturbation::new(Scalar::zero(), Vector::from_ints(&[0, 1]), Vector::zeros(2)).unwrap();
        assert_eq!(perturb(&flat_pair(), &p0).unwrap(), flat_pair());
        let pu = Perturbation::new(eps, Vector::zeros(2), Vector::zeros(2)).unwrap();
        assert_eq!(perturb(&flat_pair(), &pu).unwrap(), flat_pair());
    }

    #[test]
    fn perturbation_rejects_bad_data() {
        assert!(Perturbation::new(q(-1, 2), Vector::zeros(2), Vector::zeros(2)).is_err());
        assert!(Perturbation::new(q(1, 2), Vector::from_ints(&[1, 1]), Vector::zeros(2)).is_err());
        // x_bar strictly inside the triangle system is not a boundary point.
        let p = Perturbation::new(q(1, 2), Vector::from_ints(&[0, 1]), Vector::zeros(2)).unwrap();
        assert!(perturb(&triangle(), &p).is_err());
    }

    #[test]
    fn ratio_examples() {
        for (eps, expected) in [(q(1, 10), q(1, 200)), (q(1, 1), q(1, 2))] {
            let p = Perturbation::new(eps.clone(), Vector::from_ints(&[0, 1]), Vector::zeros(2)).unwrap();
            let sys = perturb(&flat_pair(), &p).unwrap();
            let x = Vector::new(vec![-&eps, eps.clone()]);
            assert_eq!(perturbation_ratio(&sys, &x).unwrap(), expected);
        }
        assert_eq!(perturbation_ratio(&half_plane(), &Vector::from_ints(&[1, 0])).unwrap(), q(1, 1));
        assert!(perturbation_ratio(&half_plane(), &Vector::from_ints(&[-1, 0])).is_err());
    }

    #[test]
    fn worstcase_family_sizes() {
        for (m, size) in [(1, 1), (2, 3), (3, 7)] {
            let sys = gen_worstcase(m);
            assert_eq!(enumerate(&sys, Level::Positive).len(), size);
            assert_eq!(enumerate(&sys, Level::Zero).len(), size);
        }
    }
}
