//! Feasibility pre-check via the dual LCP relaxation, plus the in-house
//! LP engine (dense two-phase tableau simplex with Bland's rule).
//!
//! For LCP(M, q) in the form `s = q + Mx`, `x, s ≥ 0`, `x's = 0`, the dual
//! relaxation is
//!
//! ```text
//!   F_D = { (u, z) ≥ 0 : u + M'z = 0, q'z = -1 }.
//! ```
//!
//! By Farkas, `F_D ≠ ∅` exactly when the primal feasible region
//! `{(x, s) ≥ 0 : -Mx + s = q}` is empty, so a point of `F_D` rules the
//! primal out. For row sufficient `M` every point of `F_D` is complementary
//! (`u'z = 0`) and is therefore a genuine dual solution; a noncomplementary
//! point of `F_D` certifies that `M` is not row sufficient.

use crate::ipa::LcpInstance;
use crate::{Error, Matrix, Result, Vector};

/// Sign restriction of one LP variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarSign {
    NonNeg,
    Free,
}

/// Outcome of an LP feasibility query for `{x : Ax = b, signs}`.
#[derive(Debug, Clone)]
pub enum LpFeasResult {
    /// A point satisfying all constraints to within `1e-9` (relative).
    Feasible(Vector),
    /// Farkas certificate `y`: `y'A_j ≤ 0` for nonnegative variables `j`,
    /// `y'A_j = 0` for free variables, and `y'b > 0`. Any feasible `x`
    /// would force the contradiction `0 < y'b = Σ_j (y'A_j) x_j ≤ 0`.
    Infeasible(Vector),
}

/// Outcome of an LP optimization `max c'x  s.t.  Ax = b`, signs.
#[derive(Debug, Clone)]
pub enum LpOutcome {
    Optimal { x: Vector, value: f64 },
    Unbounded,
    Infeasible(Vector),
}

/// A solution of the dual LCP.
#[derive(Debug, Clone)]
pub struct DualSolution {
    pub u: Vector,
    pub z: Vector,
}

impl DualSolution {
    /// Re-verify all four dual conditions against the instance:
    /// nonnegativity, `u + M'z = 0`, `q'z = -1` (both at `1e-9`, relative),
    /// and complementarity `u'z ≤ 1e-8 (1 + ‖u‖‖z‖)`.
    pub fn verify(&self, inst: &LcpInstance) -> bool {
        let m = &inst.m;
        let q = &inst.q;
        let n = q.len();
        if self.u.len() != n || self.z.len() != n {
            return false;
        }
        let scale = 1.0 + self.u.amax().max(self.z.amax());
        if self.u.iter().any(|v| *v < -1e-9 * scale) || self.z.iter().any(|v| *v < -1e-9 * scale)
        {
            return false;
        }
        let resid = &self.u + m.transpose() * &self.z;
        let rscale = 1.0 + crate::numerics::inf_norm(m) * self.z.amax() + self.u.amax();
        if resid.amax() > 1e-9 * rscale {
            return false;
        }
        let qz = q.dot(&self.z);
        if (qz + 1.0).abs() > 1e-9 * (1.0 + q.amax() * self.z.amax()) {
            return false;
        }
        let gap = self.u.dot(&self.z);
        gap <= 1e-8 * (1.0 + self.u.norm() * self.z.norm())
    }
}

/// Result of the dual pre-check.
#[derive(Debug, Clone)]
pub struct DualCheck {
    /// True iff the primal feasible region can be nonempty (`F_D = ∅`).
    pub primal_possible: bool,
    /// A complementary point of `F_D`, when one was found.
    pub dual: Option<DualSolution>,
    /// A noncomplementary point of `F_D`, when found: it certifies that
    /// `M` is not row sufficient (hence not P*).
    pub not_pstar: Option<(Vector, Vector)>,
}

const PIVOT_TOL: f64 = 1e-9;
const FEAS_TOL: f64 = 1e-9;

/// Dense two-phase tableau simplex state.
struct Tableau {
    /// `m+1` rows by `n_cols+1` columns; last row = reduced costs,
    /// last column = right-hand side (and minus the objective value).
    t: Vec<Vec<f64>>,
    rows: usize,
    cols: usize, // structural + artificial columns (excludes RHS)
    basis: Vec<usize>,
    n_struct: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> f64 {
        self.t[i][self.cols]
    }

    fn objective(&self) -> f64 {
        -self.t[self.rows][self.cols]
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let piv = self.t[row][col];
        let inv = 1.0 / piv;
        for j in 0..=self.cols {
            self.t[row][j] *= inv;
        }
        for i in 0..=self.rows {
            if i == row {
                continue;
            }
            let factor = self.t[i][col];
            if factor == 0.0 {
                continue;
            }
            for j in 0..=self.cols {
                self.t[i][j] -= factor * self.t[row][j];
            }
            self.t[i][col] = 0.0; // exact by construction
        }
        self.basis[row] = col;
    }

    /// Bland's rule iteration over the allowed columns. Returns:
    /// `Ok(true)` optimal, `Ok(false)` unbounded (entering column recorded
    /// in `self.unbounded_col`).
    fn run(&mut self, allowed: &dyn Fn(usize) -> bool, cap: usize) -> Result<SimplexEnd> {
        for _ in 0..cap {
            // Entering: smallest-index allowed column with negative reduced cost.
            let entering = (0..self.cols)
                .find(|&j| allowed(j) && self.t[self.rows][j] < -PIVOT_TOL);
            let Some(col) = entering else {
                return Ok(SimplexEnd::Optimal);
            };
            // Ratio test; ties broken by smallest basis column index (Bland).
            let mut best: Option<(usize, f64)> = None;
            for i in 0..self.rows {
                let a = self.t[i][col];
                if a > PIVOT_TOL {
                    let ratio = self.rhs(i) / a;
                    match best {
                        None => best = Some((i, ratio)),
                        Some((bi, br)) => {
                            if ratio < br - 1e-12
                                || ((ratio - br).abs() <= 1e-12
                                    && self.basis[i] < self.basis[bi])
                            {
                                best = Some((i, ratio));
                            }
                        }
                    }
                }
            }
            match best {
                Some((row, _)) => self.pivot(row, col),
                None => return Ok(SimplexEnd::Unbounded),
            }
        }
        Err(Error::IterationCap {
            what: "simplex".into(),
            cap,
        })
    }
}

enum SimplexEnd {
    Optimal,
    Unbounded,
}

/// Solve `max c'x  s.t.  Ax = b` with per-variable sign restrictions.
///
/// Free variables are split internally (`x = p - q`); rows are flipped so
/// the phase-I right-hand side is nonnegative. Bland's rule everywhere, so
/// no cycling; an iteration cap returns a structured error as a safety net.
pub fn lp_solve(a: &Matrix, b: &Vector, c: &Vector, signs: &[VarSign]) -> Result<LpOutcome> {
    let m_rows = a.nrows();
    let n = a.ncols();
    if b.len() != m_rows || c.len() != n || signs.len() != n {
        return Err(Error::dim(format!(
            "lp_solve: A is {m_rows}x{n}, b has {}, c has {}, signs has {}",
            b.len(),
            c.len(),
            signs.len()
        )));
    }

    // Split free variables: column layout is all structural columns first
    // (one per NonNeg variable, two per Free variable), then artificials.
    let mut col_of_var: Vec<(usize, Option<usize>)> = Vec::with_capacity(n);
    let mut n_struct = 0;
    for s in signs {
        match s {
            VarSign::NonNeg => {
                col_of_var.push((n_struct, None));
                n_struct += 1;
            }
            VarSign::Free => {
                col_of_var.push((n_struct, Some(n_struct + 1)));
                n_struct += 2;
            }
        }
    }

    let cols = n_struct + m_rows;
    let mut t = vec![vec![0.0; cols + 1]; m_rows + 1];
    let mut flip = vec![1.0; m_rows];
    for i in 0..m_rows {
        if b[i] < 0.0 {
            flip[i] = -1.0;
        }
        for (var, &(cp, cm)) in col_of_var.iter().enumerate() {
            let v = flip[i] * a[(i, var)];
            t[i][cp] = v;
            if let Some(cm) = cm {
                t[i][cm] = -v;
            }
        }
        t[i][n_struct + i] = 1.0;
        t[i][cols] = flip[i] * b[i];
    }
    // Phase-I reduced costs: minimize Σ artificials ⟹ c̄_j = -Σ_i T[i][j]
    // on structural columns, 0 on artificials, objective cell = -Σ_i b̃_i.
    for j in 0..n_struct {
        t[m_rows][j] = -(0..m_rows).map(|i| t[i][j]).sum::<f64>();
    }
    t[m_rows][cols] = -(0..m_rows).map(|i| t[i][cols]).sum::<f64>();

    let mut tab = Tableau {
        t,
        rows: m_rows,
        cols,
        basis: (n_struct..cols).collect(),
        n_struct,
    };

    let cap = 50_000 + 200 * (m_rows + cols);
    let scale = 1.0 + b.amax();
    let struct_cols = tab.n_struct;
    match tab.run(&|j| j < struct_cols, cap)? {
        SimplexEnd::Unbounded => {
            return Err(Error::ContractBreach(
                "phase-I objective is bounded below by zero yet reported unbounded".into(),
            ))
        }
        SimplexEnd::Optimal => {}
    }
    if tab.objective() > FEAS_TOL * scale {
        // Farkas vector from the phase-I multipliers: π_i = 1 - c̄_{art_i},
        // un-flipping the rows that were negated.
        let y = Vector::from_iterator(
            m_rows,
            (0..m_rows).map(|i| flip[i] * (1.0 - tab.t[m_rows][tab.n_struct + i])),
        );
        return Ok(LpOutcome::Infeasible(y));
    }

    // Drive any basic artificials out (degenerate rows), dropping redundant rows.
    let mut drop_rows: Vec<usize> = Vec::new();
    for i in 0..tab.rows {
        if tab.basis[i] >= tab.n_struct {
            let col = (0..tab.n_struct).find(|&j| tab.t[i][j].abs() > PIVOT_TOL);
            match col {
                Some(j) => tab.pivot(i, j),
                None => drop_rows.push(i),
            }
        }
    }
    for &i in drop_rows.iter().rev() {
        tab.t.remove(i);
        tab.basis.remove(i);
        tab.rows -= 1;
    }

    // Phase II: maximize c'x = minimize (-c)'x over structural columns.
    let rows = tab.rows;
    for j in 0..=tab.cols {
        tab.t[rows][j] = 0.0;
    }
    let mut phase2_cost = vec![0.0; tab.cols];
    for (var, &(cp, cm)) in col_of_var.iter().enumerate() {
        phase2_cost[cp] = -c[var];
        if let Some(cm) = cm {
            phase2_cost[cm] = c[var];
        }
    }
    for j in 0..tab.n_struct {
        let mut red = phase2_cost[j];
        for i in 0..rows {
            red -= phase2_cost[tab.basis[i]] * tab.t[i][j];
        }
        tab.t[rows][j] = red;
    }
    let mut obj = 0.0;
    for i in 0..rows {
        obj += phase2_cost[tab.basis[i]] * tab.t[i][tab.cols];
    }
    tab.t[rows][tab.cols] = -obj;

    match tab.run(&|j| j < struct_cols, cap)? {
        SimplexEnd::Unbounded => return Ok(LpOutcome::Unbounded),
        SimplexEnd::Optimal => {}
    }

    // Read the solution back out of the basis.
    let mut xs = vec![0.0; tab.n_struct];
    for i in 0..tab.rows {
        if tab.basis[i] < tab.n_struct {
            xs[tab.basis[i]] = tab.t[i][tab.cols];
        }
    }
    let x = Vector::from_iterator(
        n,
        col_of_var
            .iter()
            .map(|&(cp, cm)| xs[cp] - cm.map_or(0.0, |cm| xs[cm])),
    );
    let value = c.dot(&x);
    Ok(LpOutcome::Optimal { x, value })
}

/// Feasibility of `{x : Ax = b, signs}`; `lp_solve` with a zero objective.
pub fn lp_feasible(a: &Matrix, b: &Vector, signs: &[VarSign]) -> Result<LpFeasResult> {
    match lp_solve(a, b, &Vector::zeros(a.ncols()), signs)? {
        LpOutcome::Optimal { x, .. } => Ok(LpFeasResult::Feasible(x)),
        LpOutcome::Infeasible(y) => Ok(LpFeasResult::Infeasible(y)),
        LpOutcome::Unbounded => Err(Error::ContractBreach(
            "feasibility LP reported unbounded".into(),
        )),
    }
}

/// Independently re-verify a Farkas certificate for `{Ax = b, signs}`.
pub fn verify_farkas(a: &Matrix, b: &Vector, signs: &[VarSign], y: &Vector) -> bool {
    if y.len() != a.nrows() {
        return false;
    }
    let yta = a.transpose() * y;
    let scale = 1.0 + crate::numerics::inf_norm(a) * y.amax();
    for (j, s) in signs.iter().enumerate() {
        match s {
            VarSign::NonNeg => {
                if yta[j] > 1e-7 * scale {
                    return false;
                }
            }
            VarSign::Free => {
                if yta[j].abs() > 1e-7 * scale {
                    return false;
                }
            }
        }
    }
    y.dot(b) > 0.0
}

/// Solve the dual relaxation `F_D` and classify the outcome.
pub fn dual_check(inst: &LcpInstance) -> Result<DualCheck> {
    let n = inst.q.len();
    // Variables (u, z) ∈ R^{2n}, both nonnegative.
    // Rows: u + M'z = 0 (n rows), q'z = -1 (one row).
    let mut a = Matrix::zeros(n + 1, 2 * n);
    let mut b = Vector::zeros(n + 1);
    for i in 0..n {
        a[(i, i)] = 1.0;
        for j in 0..n {
            a[(i, n + j)] = inst.m[(j, i)];
        }
    }
    for j in 0..n {
        a[(n, n + j)] = inst.q[j];
    }
    b[n] = -1.0;
    let signs = vec![VarSign::NonNeg; 2 * n];

    match lp_feasible(&a, &b, &signs)? {
        LpFeasResult::Infeasible(_) => Ok(DualCheck {
            primal_possible: true,
            dual: None,
            not_pstar: None,
        }),
        LpFeasResult::Feasible(uz) => {
            let u = Vector::from_iterator(n, (0..n).map(|i| uz[i].max(0.0)));
            let z = Vector::from_iterator(n, (0..n).map(|i| uz[n + i].max(0.0)));
            let gap = u.dot(&z);
            if gap <= 1e-8 * (1.0 + u.norm() * z.norm()) {
                Ok(DualCheck {
                    primal_possible: false,
                    dual: Some(DualSolution { u, z }),
                    not_pstar: None,
                })
            } else {
                Ok(DualCheck {
                    primal_possible: false,
                    dual: None,
                    not_pstar: Some((u, z)),
                })
            }
        }
    }
}
