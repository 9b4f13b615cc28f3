//! Realizable active index sets of `Ax <= b`.
//!
//! For `phi(x) = max_i (a_i^T x - b_i)` the active set `J(x)` collects the
//! rows attaining the maximum. The positive-level family gathers every
//! `J(x)` with `phi(x) > 0`; the zero-level family every `J(x)` with
//! `phi(x) = 0`. Both are enumerated exactly with margin-maximising LPs.

use std::collections::BTreeMap;
use std::fmt;

use itertools::Itertools;
use rayon::prelude::*;

use crate::error::{check_dim, CoreError, Result};
use crate::linalg::solve_rows;
use crate::lp::{solve_lp, LinearProgram, LpOutcome};
use crate::scalar::{Matrix, Scalar, Vector};

/// The pair `(A, b)` describing `{x : a_i^T x <= b_i, i = 1..m}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct InequalitySystem {
    a: Matrix,
    b: Vector,
}

impl InequalitySystem {
    pub fn new(a: Matrix, b: Vector) -> Result<Self> {
        check_dim(a.nrows(), b.dim())?;
        if a.ncols() == 0 {
            return Err(CoreError::Empty("system has zero columns"));
        }
        Ok(InequalitySystem { a, b })
    }

    pub fn from_ints(a: &[&[i64]], b: &[i64]) -> Result<Self> {
        InequalitySystem::new(Matrix::from_ints(a)?, Vector::from_ints(b))
    }

    /// Number of inequalities.
    pub fn m(&self) -> usize {
        self.a.nrows()
    }

    /// Dimension of the ambient space.
    pub fn n(&self) -> usize {
        self.a.ncols()
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn b(&self) -> &Vector {
        &self.b
    }

    pub fn row(&self, i: usize) -> &Vector {
        self.a.row(i)
    }

    /// Rows selected by `set`, in index order.
    pub fn rows_of(&self, set: &IndexSet) -> Vec<Vector> {
        set.iter().map(|i| self.row(i).clone()).collect()
    }

    /// `a_i^T x - b_i` for every row.
    pub fn residuals(&self, x: &Vector) -> Result<Vec<Scalar>> {
        check_dim(self.n(), x.dim())?;
        Ok(self
            .a
            .rows()
            .iter()
            .zip(self.b.iter())
            .map(|(a, b)| a.dot(x) - b)
            .collect())
    }

    pub fn is_feasible_point(&self, x: &Vector) -> Result<bool> {
        Ok(self.residuals(x)?.iter().all(|r| !r.is_positive()))
    }
}

/// A non-empty, sorted, duplicate-free set of row indices.
///
/// Stored 0-based; [`fmt::Display`] and [`IndexSet::one_based`] use the
/// 1-based `{1, ..., m}` convention.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IndexSet(Vec<usize>);

impl IndexSet {
    pub fn new(mut members: Vec<usize>, m: usize) -> Result<Self> {
        members.sort_unstable();
        members.dedup();
        if members.is_empty() {
            return Err(CoreError::Empty("index set"));
        }
        if let Some(&index) = members.iter().find(|&&i| i >= m) {
            return Err(CoreError::IndexOutOfRange { index, len: m });
        }
        Ok(IndexSet(members))
    }

    pub fn from_one_based(members: &[usize], m: usize) -> Result<Self> {
        if let Some(&bad) = members.iter().find(|&&i| i == 0) {
            return Err(CoreError::IndexOutOfRange { index: bad, len: m });
        }
        IndexSet::new(members.iter().map(|i| i - 1).collect(), m)
    }

    pub fn full(m: usize) -> Self {
        assert!(m >= 1);
        IndexSet((0..m).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn members(&self) -> &[usize] {
        &self.0
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.0.iter().map(|i| i + 1).collect()
    }

    pub fn is_subset(&self, other: &IndexSet) -> bool {
        self.0.iter().all(|&i| other.contains(i))
    }

    pub fn is_strict_subset(&self, other: &IndexSet) -> bool {
        self.len() < other.len() && self.is_subset(other)
    }

    /// Cardinality first, then lexicographic.
    pub fn enumeration_order(&self, other: &IndexSet) -> std::cmp::Ordering {
        self.len().cmp(&other.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl fmt::Display for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.one_based().iter().join(","))
    }
}

impl fmt::Debug for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Residual level at which active sets are realised.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Level {
    /// `phi(x) > 0`
    Positive,
    /// `phi(x) = 0`
    Zero,
}

impl Level {
    pub fn as_str(self) -> &'static str {
        match self {
            Level::Positive => "pos",
            Level::Zero => "zero",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Realizability {
    Realizable(Vector),
    NotRealizable,
}

impl Realizability {
    pub fn witness(&self) -> Option<&Vector> {
        match self {
            Realizability::Realizable(x) => Some(x),
            Realizability::NotRealizable => None,
        }
    }
}

/// `phi(x) = max_i (a_i^T x - b_i)`.
pub fn phi(sys: &InequalitySystem, x: &Vector) -> Result<Scalar> {
    Ok(sys
        .residuals(x)?
        .into_iter()
        .max()
        .expect("system has at least one row"))
}

/// Rows whose residual equals `phi(x)`.
pub fn active_set(sys: &InequalitySystem, x: &Vector) -> Result<IndexSet> {
    let res = sys.residuals(x)?;
    let top = res.iter().max().expect("system has at least one row");
    Ok(IndexSet(
        res.iter()
            .enumerate()
            .filter(|(_, r)| *r == top)
            .map(|(i, _)| i)
            .collect(),
    ))
}

fn check_set(sys: &InequalitySystem, set: &IndexSet) -> Result<()> {
    match set.iter().find(|&i| i >= sys.m()) {
        Some(index) => Err(CoreError::IndexOutOfRange { index, len: sys.m() }),
        None => Ok(()),
    }
}

/// Whether `{a_i^T x - t = b_i : i in set}` (with `t = 0` at the zero level)
/// has a solution. Adding rows can only break consistency, so an
/// inconsistent set rules out all of its supersets.
pub fn equal_value_consistent(sys: &InequalitySystem, set: &IndexSet, level: Level) -> bool {
    let n = sys.n();
    let (rows, width): (Vec<Vector>, usize) = match level {
        Level::Positive => (
            set.iter()
                .map(|i| sys.row(i).iter().cloned().chain([-Scalar::one()]).collect())
                .collect(),
            n + 1,
        ),
        Level::Zero => (sys.rows_of(set), n),
    };
    let rhs: Vec<Scalar> = set.iter().map(|i| sys.b()[i].clone()).collect();
    solve_rows(&rows, &rhs, width).is_ok_and(|s| s.is_consistent())
}

/// Decides whether `set` is exactly the active set at some point of the
/// given level, returning such a point.
///
/// Strictness is handled by maximising a margin `s` (capped at 1 so the
/// program stays bounded): positive level solves
/// `max s : a_i^T x - b_i = t (i in J), a_j^T x - b_j <= t - s (j not in J), s <= t`,
/// zero level solves `max s : a_i^T x = b_i (i in J), a_j^T x <= b_j - s (j not in J)`.
/// The set is realisable iff the optimum is positive.
pub fn realizability(sys: &InequalitySystem, set: &IndexSet, level: Level) -> Result<Realizability> {
    check_set(sys, set)?;
    let n = sys.n();
    // Variables: x (n), s, and t at the positive level.
    let s = n;
    let t = n + 1;
    let width = match level {
        Level::Positive => n + 2,
        Level::Zero => n + 1,
    };
    let mut lp = LinearProgram::new(width).maximize(Vector::unit(width, s))?;
    let row = |i: usize, s_coef: i64, t_coef: i64| -> Vector {
        let mut v: Vec<Scalar> = sys.row(i).entries().to_vec();
        v.push(Scalar::from_int(s_coef));
        if level == Level::Positive {
            v.push(Scalar::from_int(t_coef));
        }
        Vector::new(v)
    };
    for i in 0..sys.m() {
        let b = sys.b()[i].clone();
        if set.contains(i) {
            lp.add_eq(row(i, 0, -1), b)?;
        } else {
            lp.add_le(row(i, 1, -1), b)?;
        }
    }
    if level == Level::Positive {
        let mut v = vec![Scalar::zero(); width];
        v[s] = Scalar::one();
        v[t] = -Scalar::one();
        lp.add_le(Vector::new(v), Scalar::zero())?;
    }
    lp.add_le(Vector::unit(width, s), Scalar::one())?;
    Ok(match solve_lp(&lp)? {
        LpOutcome::Optimal { value, point } if value.is_positive() => {
            Realizability::Realizable(point.entries()[..n].iter().cloned().collect())
        }
        LpOutcome::Optimal { .. } | LpOutcome::Infeasible(_) => Realizability::NotRealizable,
        LpOutcome::Unbounded { .. } => unreachable!("margin is capped"),
    })
}

/// A complete family of realizable active sets with one witness point each,
/// ordered by cardinality and then lexicographically.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActiveSetFamily {
    pub level: Level,
    entries: Vec<(IndexSet, Vector)>,
}

impl ActiveSetFamily {
    fn from_entries(level: Level, mut entries: Vec<(IndexSet, Vector)>) -> Self {
        entries.sort_by(|a, b| a.0.enumeration_order(&b.0));
        ActiveSetFamily { level, entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn sets(&self) -> impl Iterator<Item = &IndexSet> + '_ {
        self.entries.iter().map(|(s, _)| s)
    }

    pub fn entries(&self) -> &[(IndexSet, Vector)] {
        &self.entries
    }

    pub fn witness(&self, set: &IndexSet) -> Option<&Vector> {
        self.entries.iter().find(|(s, _)| s == set).map(|(_, x)| x)
    }

    pub fn contains(&self, set: &IndexSet) -> bool {
        self.witness(set).is_some()
    }
}

/// Enumerates the realizable active sets at `level` by cardinality.
///
/// Candidates of size `k + 1` extend a consistent size-`k` set by a larger
/// index, so a set whose equal-value system is inconsistent never spawns
/// supersets. Realizability itself is not monotone and is tested for every
/// consistent candidate.
pub fn enumerate(sys: &InequalitySystem, level: Level) -> ActiveSetFamily {
    let m = sys.m();
    let mut frontier: Vec<IndexSet> = (0..m).map(|i| IndexSet(vec![i])).collect();
    let mut found = Vec::new();
    while !frontier.is_empty() {
        let consistent: Vec<IndexSet> = frontier
            .into_par_iter()
            .filter(|set| equal_value_consistent(sys, set, level))
            .collect();
        let realized: Vec<(IndexSet, Vector)> = consistent
            .par_iter()
            .filter_map(|set| match realizability(sys, set, level) {
                Ok(Realizability::Realizable(x)) => Some((set.clone(), x)),
                _ => None,
            })
            .collect();
        found.extend(realized);
        frontier = consistent
            .iter()
            .flat_map(|set| {
                let last = *set.0.last().expect("non-empty");
                (last + 1..m).map(move |j| {
                    let mut next = set.0.clone();
                    next.push(j);
                    IndexSet(next)
                })
            })
            .collect();
    }
    ActiveSetFamily::from_entries(level, found)
}

/// Tests every one of the `2^m - 1` non-empty subsets, with no pruning.
pub fn enumerate_exhaustive(sys: &InequalitySystem, level: Level) -> ActiveSetFamily {
    let m = sys.m();
    let subsets: Vec<IndexSet> = (1..=m)
        .flat_map(|k| (0..m).combinations(k))
        .map(IndexSet)
        .collect();
    let found = subsets
        .into_par_iter()
        .filter_map(|set| match realizability(sys, &set, level) {
            Ok(Realizability::Realizable(x)) => Some((set, x)),
            _ => None,
        })
        .collect();
    ActiveSetFamily::from_entries(level, found)
}

/// Inclusion-maximal members of the family, in enumeration order.
pub fn maximal_sets(family: &ActiveSetFamily) -> Vec<IndexSet> {
    let sets: Vec<&IndexSet> = family.sets().collect();
    maximal_of(&sets)
}

pub(crate) fn maximal_of(sets: &[&IndexSet]) -> Vec<IndexSet> {
    sets.iter()
        .filter(|s| !sets.iter().any(|t| s.is_strict_subset(t)))
        .map(|s| (*s).clone())
        .collect()
}

/// Counts of sets per cardinality; handy for reports.
pub fn cardinality_histogram(family: &ActiveSetFamily) -> BTreeMap<usize, usize> {
    family.sets().fold(BTreeMap::new(), |mut acc, s| {
        *acc.entry(s.len()).or_insert(0) += 1;
        acc
    })
}
