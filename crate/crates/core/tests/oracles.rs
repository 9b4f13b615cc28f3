//! Exact routines against independent routes: brute-force subset oracles,
//! alternative LP characterisations and the sampling estimators.

use hoffman_core::active::{self, active_set, enumerate, enumerate_exhaustive, phi, Level};
use hoffman_core::analyzer::{self, check_error_bound, check_stability, hoffman_exact};
use hoffman_core::convex::{self, minmax_value_sq, SignTrichotomy};
use hoffman_core::lp::{solve_lp, LinearProgram, LpOutcome};
use hoffman_core::sampling::{self, FloatSystem, SampleConfig};
use hoffman_core::{HoffmanConstant, InequalitySystem, Matrix, Scalar, Vector};
use proptest::prelude::*;
use proptest::strategy::ValueTree;

fn rational() -> impl Strategy<Value = Scalar> {
    (-12i64..=12, 1i64..=4).prop_map(|(n, d)| Scalar::ratio(n, d).clamp_to(3))
}

trait Clamp {
    fn clamp_to(self, bound: i64) -> Self;
}

impl Clamp for Scalar {
    fn clamp_to(self, bound: i64) -> Self {
        let b = Scalar::from_int(bound);
        if self > b {
            b
        } else if self < -&b {
            -b
        } else {
            self
        }
    }
}

fn point_set() -> impl Strategy<Value = Vec<Vector>> {
    (1usize..=3, 1usize..=6).prop_flat_map(|(n, k)| {
        proptest::collection::vec(proptest::collection::vec(rational(), n), k)
            .prop_map(|rows| rows.into_iter().map(Vector::new).collect())
    })
}

fn system() -> impl Strategy<Value = InequalitySystem> {
    (1usize..=3, 1usize..=5).prop_flat_map(|(n, m)| {
        (
            proptest::collection::vec(proptest::collection::vec(rational(), n), m),
            proptest::collection::vec(rational(), m),
        )
            .prop_map(|(rows, b)| {
                InequalitySystem::new(
                    Matrix::from_rows(rows.into_iter().map(Vector::new).collect()).unwrap(),
                    Vector::new(b),
                )
                .unwrap()
            })
    })
}

/// `0 in int conv(D)` iff no non-zero `h` has `D h <= 0`: checked with one
/// LP per signed coordinate over the box `|h_j| <= 1`.
fn interior_by_gordan(points: &[Vector]) -> bool {
    let n = points[0].dim();
    for axis in 0..n {
        for sign in [1i64, -1] {
            let obj = Vector::unit(n, axis).scale(&Scalar::from_int(sign));
            let mut lp = LinearProgram::new(n).maximize(obj).unwrap();
            for p in points {
                lp.add_le(p.clone(), Scalar::zero()).unwrap();
            }
            for j in 0..n {
                lp.add_le(Vector::unit(n, j), Scalar::one()).unwrap();
                lp.add_ge(Vector::unit(n, j), -Scalar::one()).unwrap();
            }
            match solve_lp(&lp).unwrap() {
                LpOutcome::Optimal { value, .. } if value.is_positive() => return false,
                _ => {}
            }
        }
    }
    true
}

fn all_sets(fam: &active::ActiveSetFamily) -> Vec<active::IndexSet> {
    fam.sets().cloned().collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn trichotomy_matches_independent_routes(points in point_set()) {
        let sign = convex::minmax_sign(&points).unwrap();
        let (_, dist_sq) = convex::min_norm_point_sq(&points).unwrap();
        let expected = if dist_sq.is_positive() {
            SignTrichotomy::Negative
        } else if interior_by_gordan(&points) {
            SignTrichotomy::Positive
        } else {
            SignTrichotomy::Zero
        };
        prop_assert_eq!(sign, expected);
    }

    #[test]
    fn negative_case_direction_separates(points in point_set()) {
        if convex::minmax_sign(&points).unwrap() == SignTrichotomy::Negative {
            let (p, d) = convex::min_norm_point_sq(&points).unwrap();
            prop_assert!(d.is_positive());
            let h = p.scale(&-Scalar::one());
            let worst = points.iter().map(|x| x.dot(&h)).max().unwrap();
            prop_assert!(worst.is_negative());
        }
    }

    #[test]
    fn value_scales_quadratically(points in point_set(), num in 1i64..6, den in 1i64..4) {
        let c = Scalar::ratio(num, den);
        let base = minmax_value_sq(&points).unwrap();
        let scaled: Vec<Vector> = points.iter().map(|p| p.scale(&c)).collect();
        let out = minmax_value_sq(&scaled).unwrap();
        prop_assert_eq!(out.sign, base.sign);
        prop_assert_eq!(out.value_sq, base.value_sq * c.square());
    }

    #[test]
    fn lp_duality_on_random_programs(
        a in proptest::collection::vec(proptest::collection::vec(-3i64..=3, 3), 3),
        b in proptest::collection::vec(-2i64..=4, 3),
        c in proptest::collection::vec(-3i64..=3, 3),
    ) {
        // primal: max c^T x, A x <= b, x >= 0 ; dual: min b^T y, A^T y >= c, y >= 0
        let mut primal = LinearProgram::new(3).maximize(Vector::from_ints(&c)).unwrap();
        for (row, bi) in a.iter().zip(&b) {
            primal.add_le(Vector::from_ints(row), Scalar::from_int(*bi)).unwrap();
        }
        let neg_b: Vec<i64> = b.iter().map(|x| -x).collect();
        let mut dual = LinearProgram::new(3).maximize(Vector::from_ints(&neg_b)).unwrap();
        for j in 0..3 {
            let col: Vec<i64> = a.iter().map(|r| r[j]).collect();
            dual.add_ge(Vector::from_ints(&col), Scalar::from_int(c[j])).unwrap();
        }
        for j in 0..3 {
            primal.set_lower_bound(j, Scalar::zero());
            dual.set_lower_bound(j, Scalar::zero());
        }
        let p = solve_lp(&primal).unwrap();
        let d = solve_lp(&dual).unwrap();
        match (&p, &d) {
            (LpOutcome::Optimal { value: pv, point }, LpOutcome::Optimal { value: dv, .. }) => {
                prop_assert!(primal.is_feasible_point(point));
                prop_assert_eq!(pv.clone(), -dv.clone());
            }
            (LpOutcome::Unbounded { point, ray }, LpOutcome::Infeasible(cert)) => {
                prop_assert!(primal.is_feasible_point(point));
                prop_assert!(primal.objective().dot(ray).is_positive());
                prop_assert!(cert.verify(&dual));
            }
            (LpOutcome::Infeasible(cert), LpOutcome::Unbounded { .. })
            | (LpOutcome::Infeasible(cert), LpOutcome::Infeasible(_)) => {
                prop_assert!(cert.verify(&primal));
            }
            other => prop_assert!(false, "inconsistent primal/dual pair {:?}", other),
        }
    }

    #[test]
    fn pruned_enumeration_matches_exhaustive(sys in system()) {
        for level in [Level::Positive, Level::Zero] {
            let fam = enumerate(&sys, level);
            prop_assert_eq!(all_sets(&fam), all_sets(&enumerate_exhaustive(&sys, level)));
            for (set, x) in fam.entries() {
                prop_assert_eq!(&active_set(&sys, x).unwrap(), set);
                let p = phi(&sys, x).unwrap();
                let ok = match level {
                    Level::Positive => p.is_positive(),
                    Level::Zero => p.is_zero(),
                };
                prop_assert!(ok);
            }
        }
    }

    #[test]
    fn verdict_matches_feasibility(sys in system()) {
        let verdict = check_error_bound(&sys).unwrap();
        let feasible = analyzer::system_feasibility(&sys).unwrap().is_feasible();
        prop_assert_eq!(verdict.has_error_bound, feasible);
        if let Some(cert) = &verdict.certificate {
            prop_assert!(analyzer::verify_certificate(&sys, cert));
        }
        if feasible {
            let stab = check_stability(&sys).unwrap();
            if stab.stable {
                if let (HoffmanConstant::Squared(s), Some(lb)) = (hoffman_exact(&sys).unwrap(), &stab.lower_bound_sq) {
                    prop_assert!(&s >= lb);
                }
            }
        }
    }

    #[test]
    fn value_grows_with_row_inclusion(sys in system()) {
        let fam = enumerate(&sys, Level::Positive);
        let sets = all_sets(&fam);
        for small in &sets {
            for big in sets.iter().filter(|b| small.is_strict_subset(b)) {
                let vs = minmax_value_sq(&sys.rows_of(small)).unwrap();
                let vb = minmax_value_sq(&sys.rows_of(big)).unwrap();
                prop_assert!(vb.cmp_value(&vs).is_ge());
            }
        }
    }
}

#[test]
fn independent_rows_realize_every_subset() {
    for m in 1..=4 {
        let sys = analyzer::gen_worstcase(m);
        for level in [Level::Positive, Level::Zero] {
            assert_eq!(enumerate(&sys, level).len(), (1 << m) - 1);
        }
    }
    // m < n with independent, non-axis rows.
    let sys = InequalitySystem::from_ints(&[&[1, 2, 0], &[0, 1, -1]], &[3, -1]).unwrap();
    for level in [Level::Positive, Level::Zero] {
        assert_eq!(enumerate(&sys, level).len(), 3);
    }
}

#[test]
fn sampled_minmax_agrees_with_exact_values() {
    let cfg = SampleConfig::new(100_000, 11, 10.0).unwrap();
    let mut runner = proptest::test_runner::TestRunner::deterministic();
    for _ in 0..20 {
        let points = point_set().new_tree(&mut runner).unwrap().current();
        let exact = minmax_value_sq(&points).unwrap();
        let sampled = sampling::sample_minmax_exact(&points, &cfg).unwrap();
        let v = exact.approx();
        assert!(sampled >= v - 1e-9, "sampled {sampled} below exact {v} for {points:?}");
        assert!((sampled - v).abs() < 1e-3, "sampled {sampled} vs exact {v} for {points:?}");
    }
}

/// Box half-width covering every positive-level witness, so each realizable
/// active set has a region inside the sampling box.
fn covering_radius(sys: &InequalitySystem) -> f64 {
    enumerate(sys, Level::Positive)
        .entries()
        .iter()
        .flat_map(|(_, x)| x.to_f64())
        .fold(10.0f64, |r, v| r.max(2.0 * v.abs()))
}

#[test]
fn sampled_sigma_dominates_exact() {
    let mut runner = proptest::test_runner::TestRunner::deterministic();
    let mut checked = 0;
    while checked < 10 {
        let sys = system().new_tree(&mut runner).unwrap().current();
        let HoffmanConstant::Squared(s) = hoffman_exact(&sys).unwrap() else {
            continue;
        };
        let exact = s.to_f64().sqrt();
        let small_box = SampleConfig::new(100_000, 5, 10.0).unwrap();
        let est = sampling::estimate_sigma(&sys, &small_box).unwrap();
        assert!(est >= exact * (1.0 - 1e-9), "estimate {est} below exact {exact} for {sys:?}");
        let cfg = SampleConfig::new(100_000, 5, covering_radius(&sys)).unwrap();
        let est = sampling::estimate_sigma(&sys, &cfg).unwrap();
        assert!(est >= exact * (1.0 - 1e-9), "estimate {est} below exact {exact} for {sys:?}");
        assert!(est - exact < 1e-2, "estimate {est} vs exact {exact} for {sys:?}");
        checked += 1;
    }
}

#[test]
fn closed_form_derivative_matches_difference_quotient() {
    let mut runner = proptest::test_runner::TestRunner::deterministic();
    for _ in 0..64 {
        let sys = system().new_tree(&mut runner).unwrap().current();
        let n = sys.n();
        let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.75) - 0.5).collect();
        let mut h: Vec<f64> = (0..n).map(|i| 1.0 + i as f64).collect();
        let norm = h.iter().map(|v| v * v).sum::<f64>().sqrt();
        h.iter_mut().for_each(|v| *v /= norm);
        let fsys = FloatSystem::from(&sys);
        let closed = sampling::directional_derivative(&fsys, &x, &h);
        let quotient = sampling::difference_quotient(&fsys, &x, &h, 1e-6);
        assert!((closed - quotient).abs() < 1e-6, "{closed} vs {quotient}");
    }
}
