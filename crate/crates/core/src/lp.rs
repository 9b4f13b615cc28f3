//! Exact rational linear programming.
//!
//! A dense two-phase primal simplex over [`Scalar`] with Bland's rule, so
//! every solve terminates and is deterministic. Infeasible programs come back
//! with a Farkas certificate that can be checked by substitution.

use crate::error::{check_dim, Result};
use crate::scalar::{Scalar, Vector};

/// `maximize objective^T z` subject to equality rows, `<=` rows and optional
/// per-variable lower bounds. Variables without a lower bound are free.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearProgram {
    objective: Vector,
    eq: Vec<(Vector, Scalar)>,
    ineq: Vec<(Vector, Scalar)>,
    lower: Vec<Option<Scalar>>,
}

impl LinearProgram {
    /// A feasibility problem in `num_vars` free variables with zero objective.
    pub fn new(num_vars: usize) -> Self {
        LinearProgram {
            objective: Vector::zeros(num_vars),
            eq: Vec::new(),
            ineq: Vec::new(),
            lower: vec![None; num_vars],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.lower.len()
    }

    pub fn objective(&self) -> &Vector {
        &self.objective
    }

    pub fn eq_constraints(&self) -> &[(Vector, Scalar)] {
        &self.eq
    }

    pub fn ineq_constraints(&self) -> &[(Vector, Scalar)] {
        &self.ineq
    }

    pub fn lower_bounds(&self) -> &[Option<Scalar>] {
        &self.lower
    }

    pub fn maximize(mut self, objective: Vector) -> Result<Self> {
        check_dim(self.num_vars(), objective.dim())?;
        self.objective = objective;
        Ok(self)
    }

    /// `a^T z = beta`
    pub fn add_eq(&mut self, a: Vector, beta: Scalar) -> Result<()> {
        check_dim(self.num_vars(), a.dim())?;
        self.eq.push((a, beta));
        Ok(())
    }

    /// `a^T z <= beta`
    pub fn add_le(&mut self, a: Vector, beta: Scalar) -> Result<()> {
        check_dim(self.num_vars(), a.dim())?;
        self.ineq.push((a, beta));
        Ok(())
    }

    /// `a^T z >= beta`, stored as `-a^T z <= -beta`.
    pub fn add_ge(&mut self, a: Vector, beta: Scalar) -> Result<()> {
        self.add_le(a.scale(&-Scalar::one()), -beta)
    }

    /// `z_var >= bound`
    pub fn set_lower_bound(&mut self, var: usize, bound: Scalar) {
        self.lower[var] = Some(bound);
    }

    /// Checks every constraint at `z` exactly.
    pub fn is_feasible_point(&self, z: &Vector) -> bool {
        z.dim() == self.num_vars()
            && self.eq.iter().all(|(a, b)| &a.dot(z) == b)
            && self.ineq.iter().all(|(a, b)| &a.dot(z) <= b)
            && self
                .lower
                .iter()
                .zip(z.iter())
                .all(|(l, x)| l.as_ref().is_none_or(|l| x >= l))
    }
}

/// Multipliers proving that a [`LinearProgram`]'s constraints have no
/// common solution: with `eq` free, `ineq >= 0` and `bounds >= 0`,
/// `sum eq_k a_k + sum ineq_i a_i - sum_j bounds_j e_j = 0` while
/// `sum eq_k beta_k + sum ineq_i beta_i - sum_j bounds_j l_j < 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FarkasCertificate {
    pub eq: Vec<Scalar>,
    pub ineq: Vec<Scalar>,
    pub bounds: Vec<Scalar>,
}

impl FarkasCertificate {
    /// Substitution check against the program's constraints.
    pub fn verify(&self, lp: &LinearProgram) -> bool {
        let n = lp.num_vars();
        if self.eq.len() != lp.eq.len()
            || self.ineq.len() != lp.ineq.len()
            || self.bounds.len() != n
        {
            return false;
        }
        if self.ineq.iter().chain(&self.bounds).any(Scalar::is_negative) {
            return false;
        }
        let mut combo = Vector::zeros(n);
        let mut rhs = Scalar::zero();
        for (y, (a, b)) in self.eq.iter().zip(&lp.eq).chain(self.ineq.iter().zip(&lp.ineq)) {
            combo = combo.axpy(y, a);
            rhs = rhs + y * b;
        }
        for (j, (nu, l)) in self.bounds.iter().zip(&lp.lower).enumerate() {
            if nu.is_zero() {
                continue;
            }
            let Some(l) = l else { return false };
            combo = combo.axpy(&-nu, &Vector::unit(n, j));
            rhs = rhs - nu * l;
        }
        combo.is_zero() && rhs.is_negative()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { value: Scalar, point: Vector },
    Infeasible(FarkasCertificate),
    /// `point + t * ray` is feasible for all `t >= 0` and the objective grows
    /// without bound along `ray`.
    Unbounded { point: Vector, ray: Vector },
}

impl LpOutcome {
    pub fn status(&self) -> LpStatus {
        match self {
            LpOutcome::Optimal { .. } => LpStatus::Optimal,
            LpOutcome::Infeasible(_) => LpStatus::Infeasible,
            LpOutcome::Unbounded { .. } => LpStatus::Unbounded,
        }
    }

    pub fn optimal_value(&self) -> Option<&Scalar> {
        match self {
            LpOutcome::Optimal { value, .. } => Some(value),
            _ => None,
        }
    }

    /// Optimal point, or the feasible ray when unbounded.
    pub fn witness(&self) -> Option<&Vector> {
        match self {
            LpOutcome::Optimal { point, .. } => Some(point),
            LpOutcome::Unbounded { ray, .. } => Some(ray),
            LpOutcome::Infeasible(_) => None,
        }
    }
}

/// Result of a pure feasibility query.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Feasibility {
    Feasible(Vector),
    Infeasible(FarkasCertificate),
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible(_))
    }
}

/// Decides whether `{z : a^T z = beta (eqs), a^T z <= beta (ineqs)}` is
/// non-empty, in `num_vars` free variables.
pub fn feasible(
    num_vars: usize,
    eqs: &[(Vector, Scalar)],
    ineqs: &[(Vector, Scalar)],
) -> Result<Feasibility> {
    let mut lp = LinearProgram::new(num_vars);
    for (a, b) in eqs {
        lp.add_eq(a.clone(), b.clone())?;
    }
    for (a, b) in ineqs {
        lp.add_le(a.clone(), b.clone())?;
    }
    feasible_lp(&lp)
}

/// Feasibility of an already-built program (its objective is ignored).
pub fn feasible_lp(lp: &LinearProgram) -> Result<Feasibility> {
    let lp = LinearProgram {
        objective: Vector::zeros(lp.num_vars()),
        ..lp.clone()
    };
    Ok(match solve_lp(&lp)? {
        LpOutcome::Optimal { point, .. } | LpOutcome::Unbounded { point, .. } => {
            Feasibility::Feasible(point)
        }
        LpOutcome::Infeasible(cert) => Feasibility::Infeasible(cert),
    })
}

/// How an original variable maps onto non-negative standard-form columns.
#[derive(Clone, Copy)]
enum VarCols {
    /// `z = l + col`
    Shifted(usize),
    /// `z = plus - minus`
    Split(usize, usize),
}

struct Tableau {
    /// `rows[i]` holds the constraint coefficients followed by the rhs.
    rows: Vec<Vec<Scalar>>,
    /// Reduced costs followed by minus the current objective value.
    cost: Vec<Scalar>,
    basis: Vec<usize>,
    ncols: usize,
}

enum Pivoting {
    Optimal,
    Unbounded(usize),
}

impl Tableau {
    fn rhs(&self, i: usize) -> &Scalar {
        &self.rows[i][self.ncols]
    }

    fn pivot(&mut self, p: usize, q: usize) {
        let inv = self.rows[p][q].recip();
        for x in self.rows[p].iter_mut() {
            if !x.is_zero() {
                *x = &*x * &inv;
            }
        }
        let pivot_row = std::mem::take(&mut self.rows[p]);
        let nz: Vec<usize> = (0..pivot_row.len()).filter(|&j| !pivot_row[j].is_zero()).collect();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == p || row[q].is_zero() {
                continue;
            }
            let f = row[q].clone();
            for &j in &nz {
                row[j] = &row[j] - &(&f * &pivot_row[j]);
            }
        }
        if !self.cost[q].is_zero() {
            let f = self.cost[q].clone();
            for &j in &nz {
                self.cost[j] = &self.cost[j] - &(&f * &pivot_row[j]);
            }
        }
        self.rows[p] = pivot_row;
        self.basis[p] = q;
    }

    /// Bland's rule minimisation over the columns `allowed` accepts.
    fn run(&mut self, allowed: impl Fn(usize) -> bool) -> Pivoting {
        loop {
            let Some(q) = (0..self.ncols).find(|&j| allowed(j) && self.cost[j].is_negative()) else {
                return Pivoting::Optimal;
            };
            let mut best: Option<(usize, Scalar)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][q];
                if !a.is_positive() {
                    continue;
                }
                let ratio = self.rhs(i) / a;
                let better = match &best {
                    None => true,
                    Some((bi, br)) => {
                        ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi])
                    }
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            match best {
                Some((p, _)) => self.pivot(p, q),
                None => return Pivoting::Unbounded(q),
            }
        }
    }

    fn column_values(&self) -> Vec<Scalar> {
        let mut z = vec![Scalar::zero(); self.ncols];
        for (i, &b) in self.basis.iter().enumerate() {
            z[b] = self.rhs(i).clone();
        }
        z
    }
}

/// Solves the program exactly.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpOutcome> {
    let n = lp.num_vars();
    check_dim(n, lp.objective.dim())?;

    let mut vars = Vec::with_capacity(n);
    let mut ncols = 0;
    for l in &lp.lower {
        vars.push(if l.is_some() {
            ncols += 1;
            VarCols::Shifted(ncols - 1)
        } else {
            ncols += 2;
            VarCols::Split(ncols - 2, ncols - 1)
        });
    }
    let num_struct = ncols;
    let shift = |a: &Vector| -> Scalar {
        a.iter()
            .zip(&lp.lower)
            .filter_map(|(x, l)| l.as_ref().map(|l| x * l))
            .sum()
    };

    // Standard-form rows: equalities first, then inequalities with slacks.
    let num_rows = lp.eq.len() + lp.ineq.len();
    let num_slack = lp.ineq.len();
    let slack0 = num_struct;
    let art0 = slack0 + num_slack;
    let mut rows: Vec<Vec<Scalar>> = Vec::with_capacity(num_rows);
    let mut signs: Vec<bool> = Vec::with_capacity(num_rows);
    let mut init_basis: Vec<Option<usize>> = Vec::with_capacity(num_rows);
    for (k, (a, beta)) in lp.eq.iter().chain(&lp.ineq).enumerate() {
        let mut row = vec![Scalar::zero(); art0];
        for (j, x) in a.iter().enumerate() {
            match vars[j] {
                VarCols::Shifted(c) => row[c] = x.clone(),
                VarCols::Split(p, m) => {
                    row[p] = x.clone();
                    row[m] = -x;
                }
            }
        }
        let is_ineq = k >= lp.eq.len();
        if is_ineq {
            row[slack0 + k - lp.eq.len()] = Scalar::one();
        }
        let mut rhs = beta - shift(a);
        let flip = rhs.is_negative();
        if flip {
            for x in row.iter_mut() {
                *x = -&*x;
            }
            rhs = -rhs;
        }
        init_basis.push((is_ineq && !flip).then(|| slack0 + k - lp.eq.len()));
        row.push(rhs);
        rows.push(row);
        signs.push(flip);
    }

    // Artificial columns for rows without a ready slack.
    let art_rows: Vec<usize> = (0..num_rows).filter(|&i| init_basis[i].is_none()).collect();
    let total = art0 + art_rows.len();
    let mut basis = vec![0; num_rows];
    for row in rows.iter_mut() {
        let rhs = row.pop().expect("rhs");
        row.resize(total, Scalar::zero());
        row.push(rhs);
    }
    for (k, &i) in art_rows.iter().enumerate() {
        rows[i][art0 + k] = Scalar::one();
        basis[i] = art0 + k;
    }
    for i in 0..num_rows {
        if let Some(s) = init_basis[i] {
            basis[i] = s;
        }
    }
    let mut cost = vec![Scalar::zero(); total + 1];
    for k in 0..art_rows.len() {
        cost[art0 + k] = Scalar::one();
    }
    for &i in &art_rows {
        for j in 0..=total {
            if !rows[i][j].is_zero() {
                cost[j] = &cost[j] - &rows[i][j];
            }
        }
    }
    let mut tab = Tableau {
        rows,
        cost,
        basis,
        ncols: total,
    };

    if !art_rows.is_empty() {
        tab.run(|_| true);
        let infeasibility = -&tab.cost[total];
        if infeasibility.is_positive() {
            return Ok(LpOutcome::Infeasible(farkas_from_phase_one(
                lp, &tab, &vars, &init_basis, &art_rows, art0, &signs,
            )));
        }
        // Drive artificials out of the basis; drop redundant rows.
        let mut i = 0;
        while i < tab.rows.len() {
            if tab.basis[i] >= art0 {
                if let Some(q) = (0..art0).find(|&j| !tab.rows[i][j].is_zero()) {
                    tab.pivot(i, q);
                } else {
                    tab.rows.remove(i);
                    tab.basis.remove(i);
                    continue;
                }
            }
            i += 1;
        }
    }

    // Phase two: minimise -objective.
    let mut col_cost = vec![Scalar::zero(); total];
    for (j, c) in lp.objective.iter().enumerate() {
        match vars[j] {
            VarCols::Shifted(col) => col_cost[col] = -c,
            VarCols::Split(p, m) => {
                col_cost[p] = -c;
                col_cost[m] = c.clone();
            }
        }
    }
    let mut cost: Vec<Scalar> = col_cost.iter().cloned().chain([Scalar::zero()]).collect();
    for (i, &b) in tab.basis.iter().enumerate() {
        if col_cost[b].is_zero() {
            continue;
        }
        for (j, x) in tab.rows[i].iter().enumerate() {
            if !x.is_zero() {
                cost[j] = &cost[j] - &(&col_cost[b] * x);
            }
        }
    }
    tab.cost = cost;

    let outcome = tab.run(|j| j < art0);
    let z = tab.column_values();
    let point = to_original(lp, &vars, &z, true);
    match outcome {
        Pivoting::Optimal => {
            let value = lp.objective.dot(&point);
            Ok(LpOutcome::Optimal { value, point })
        }
        Pivoting::Unbounded(q) => {
            let mut d = vec![Scalar::zero(); total];
            d[q] = Scalar::one();
            for (i, &b) in tab.basis.iter().enumerate() {
                d[b] = -&tab.rows[i][q];
            }
            let ray = to_original(lp, &vars, &d, false);
            Ok(LpOutcome::Unbounded { point, ray })
        }
    }
}

fn to_original(lp: &LinearProgram, vars: &[VarCols], z: &[Scalar], shifted: bool) -> Vector {
    vars.iter()
        .zip(&lp.lower)
        .map(|(v, l)| match *v {
            VarCols::Shifted(c) => match (shifted, l) {
                (true, Some(l)) => l + &z[c],
                _ => z[c].clone(),
            },
            VarCols::Split(p, m) => &z[p] - &z[m],
        })
        .collect()
}

/// Phase-one duals `y` satisfy `A_std^T y <= 0` and `b_std^T y > 0`; mapped
/// back through the sign flips and variable substitutions they give the
/// certificate in original terms.
fn farkas_from_phase_one(
    lp: &LinearProgram,
    tab: &Tableau,
    vars: &[VarCols],
    init_basis: &[Option<usize>],
    art_rows: &[usize],
    art0: usize,
    signs: &[bool],
) -> FarkasCertificate {
    let num_rows = signs.len();
    let mut y = vec![Scalar::zero(); num_rows];
    for i in 0..num_rows {
        // y_i = c_col - r_col for the column that started basic in row i.
        y[i] = match init_basis[i] {
            Some(s) => -&tab.cost[s],
            None => {
                let k = art_rows.iter().position(|&r| r == i).expect("artificial row");
                Scalar::one() - &tab.cost[art0 + k]
            }
        };
    }
    // Multiplier on the original row k is -(sign_k * y_k).
    let mult: Vec<Scalar> = y
        .iter()
        .zip(signs)
        .map(|(y, &flip)| if flip { y.clone() } else { -y })
        .collect();
    let (eq, ineq) = mult.split_at(lp.eq.len());
    let n = lp.num_vars();
    let mut bounds = vec![Scalar::zero(); n];
    for (j, v) in vars.iter().enumerate() {
        if let VarCols::Shifted(_) = v {
            bounds[j] = lp
                .eq
                .iter()
                .chain(&lp.ineq)
                .zip(&mult)
                .map(|((a, _), m)| &a[j] * m)
                .sum();
        }
    }
    FarkasCertificate {
        eq: eq.to_vec(),
        ineq: ineq.to_vec(),
        bounds,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[i64]) -> Vector {
        Vector::from_ints(x)
    }

    fn s(x: i64) -> Scalar {
        Scalar::from_int(x)
    }

    #[test]
    fn bounded_maximum() {
        let mut lp = LinearProgram::new(1).maximize(v(&[1])).unwrap();
        lp.add_le(v(&[1]), s(1)).unwrap();
        lp.set_lower_bound(0, s(0));
        let out = solve_lp(&lp).unwrap();
        assert_eq!(out, LpOutcome::Optimal { value: s(1), point: v(&[1]) });
    }

    #[test]
    fn infeasible_with_certificate() {
        let mut lp = LinearProgram::new(1).maximize(v(&[1])).unwrap();
        lp.add_le(v(&[1]), s(-1)).unwrap();
        lp.set_lower_bound(0, s(0));
        let LpOutcome::Infeasible(cert) = solve_lp(&lp).unwrap() else {
            panic!("expected infeasible");
        };
        assert!(cert.verify(&lp));
    }

    #[test]
    fn unbounded_ray() {
        let mut lp = LinearProgram::new(1).maximize(v(&[1])).unwrap();
        lp.set_lower_bound(0, s(0));
        let LpOutcome::Unbounded { point, ray } = solve_lp(&lp).unwrap() else {
            panic!("expected unbounded");
        };
        assert!(lp.is_feasible_point(&point));
        assert!(lp.objective().dot(&ray).is_positive());
    }

    #[test]
    fn hull_system_of_orthonormal_pair_is_infeasible() {
        // D^T lambda = 0, sum lambda = 1, 0 <= lambda <= 1 with D = I.
        let eqs = vec![(v(&[1, 0]), s(0)), (v(&[0, 1]), s(0)), (v(&[1, 1]), s(1))];
        let ineqs = vec![
            (v(&[1, 0]), s(1)),
            (v(&[0, 1]), s(1)),
            (v(&[-1, 0]), s(0)),
            (v(&[0, -1]), s(0)),
        ];
        let out = feasible(2, &eqs, &ineqs).unwrap();
        let Feasibility::Infeasible(cert) = out else { panic!() };
        let mut lp = LinearProgram::new(2);
        eqs.iter().for_each(|(a, b)| lp.add_eq(a.clone(), b.clone()).unwrap());
        ineqs.iter().for_each(|(a, b)| lp.add_le(a.clone(), b.clone()).unwrap());
        assert!(cert.verify(&lp));
    }

    #[test]
    fn hull_system_of_symmetric_pair_is_feasible() {
        let eqs = vec![(v(&[1, -1]), s(0)), (v(&[0, 0]), s(0)), (v(&[1, 1]), s(1))];
        let ineqs = vec![
            (v(&[1, 0]), s(1)),
            (v(&[0, 1]), s(1)),
            (v(&[-1, 0]), s(0)),
            (v(&[0, -1]), s(0)),
        ];
        let Feasibility::Feasible(lambda) = feasible(2, &eqs, &ineqs).unwrap() else {
            panic!()
        };
        assert_eq!(lambda, Vector::new(vec![Scalar::ratio(1, 2), Scalar::ratio(1, 2)]));
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let mut lp = LinearProgram::new(2);
        assert!(lp.add_le(v(&[1]), s(0)).is_err());
        assert!(LinearProgram::new(2).maximize(v(&[1, 2, 3])).is_err());
    }

    #[test]
    fn degenerate_cycling_example_terminates() {
        // Beale's classic cycling instance; Bland's rule must terminate.
        let q = |n, d| Scalar::ratio(n, d);
        let mut lp = LinearProgram::new(4)
            .maximize(Vector::new(vec![q(3, 4), s(-150), q(1, 50), s(-6)]))
            .unwrap();
        lp.add_le(Vector::new(vec![q(1, 4), s(-60), q(-1, 25), s(9)]), s(0)).unwrap();
        lp.add_le(Vector::new(vec![q(1, 2), s(-90), q(-1, 50), s(3)]), s(0)).unwrap();
        lp.add_le(v(&[0, 0, 1, 0]), s(1)).unwrap();
        for j in 0..4 {
            lp.set_lower_bound(j, s(0));
        }
        let out = solve_lp(&lp).unwrap();
        assert_eq!(out.optimal_value(), Some(&q(1, 20)));
    }
}
