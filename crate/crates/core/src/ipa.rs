//! Short-step path-following interior point solver with a handicap
//! certificate hook.
//!
//! For LCP(M, q) in the form `-Mx + s = q`, `x's = 0`, `x, s ≥ 0`, the
//! solver runs under the working hypothesis `κ̂(M) ≤ ρ`. Each iteration
//! solves the feasible Newton system
//!
//! ```text
//!   -M Δx + Δs = 0,    s∘Δx + x∘Δs = σμ1 - x∘s,
//! ```
//!
//! so `Δs = MΔx` and `Δx_i Δs_i = Δx_i (MΔx)_i`. Before any step is taken
//! the direction is tested against the handicap inequality
//!
//! ```text
//!   (1+4ρ) Σ_{I+} Δx_i (MΔx)_i  +  Σ_{I-} Δx_i (MΔx)_i  <  0;
//! ```
//!
//! if it fails, `Δx` itself is a certificate that `κ̂(M) > ρ` and the solver
//! returns it. Otherwise the step-length analysis for handicap-bounded
//! matrices applies and the canonical short step makes guaranteed progress;
//! more aggressive step candidates are tried first and the canonical step is
//! the fallback, so the duality measure shrinks by at least the factor
//! `1 - 0.01/((1+4ρ)√n)` on every accepted step.

use crate::duality::{lp_solve, LpOutcome, VarSign};
use crate::numerics::{default_sign_tol, hadamard_mx};
use crate::{Error, Matrix, Result, Vector};

/// A standard-form LCP instance `-Mx + s = q`, `x's = 0`, `x, s ≥ 0`.
#[derive(Debug, Clone)]
pub struct LcpInstance {
    pub m: Matrix,
    pub q: Vector,
}

impl LcpInstance {
    pub fn new(m: Matrix, q: Vector) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::dim(format!(
                "matrix is {}x{}, expected square",
                m.nrows(),
                m.ncols()
            )));
        }
        if q.len() != m.nrows() {
            return Err(Error::dim(format!(
                "q has length {} but matrix is {0}x{0}",
                q.len()
            )));
        }
        Ok(LcpInstance { m, q })
    }

    pub fn n(&self) -> usize {
        self.q.len()
    }

    /// `‖-Mx + s - q‖_∞`.
    pub fn residual(&self, x: &Vector, s: &Vector) -> f64 {
        (-(&self.m * x) + s - &self.q).amax()
    }
}

/// Solver configuration.
#[derive(Debug, Clone)]
pub struct IpaConfig {
    /// Working handicap bound ρ ≥ 0.
    pub rho: f64,
    /// Complementarity target: stop once `x's ≤ eps_gap`.
    pub eps_gap: f64,
    /// Residual target for reported solutions.
    pub eps_res: f64,
    /// Iteration cap; `0` selects `Θ((1+4ρ)√n · log(μ⁰n/eps_gap))`.
    pub max_iters: usize,
    /// Central-path neighborhood radius β for `‖x∘s/μ - 1‖₂ ≤ β`.
    pub neighborhood_beta: f64,
}

impl IpaConfig {
    pub fn new(rho: f64) -> Self {
        IpaConfig {
            rho,
            eps_gap: 1e-8,
            eps_res: 1e-8,
            max_iters: 0,
            neighborhood_beta: 0.25,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.rho < 0.0 || self.rho.is_nan() {
            return Err(Error::invalid("rho must be >= 0"));
        }
        if !(self.eps_gap > 0.0 && self.eps_res > 0.0) {
            return Err(Error::invalid("eps_gap and eps_res must be > 0"));
        }
        if !(self.neighborhood_beta > 0.0 && self.neighborhood_beta < 1.0) {
            return Err(Error::invalid("neighborhood_beta must lie in (0,1)"));
        }
        Ok(())
    }
}

/// A witness that `κ̂(M) > rho`.
#[derive(Debug, Clone)]
pub struct KappaCertificate {
    /// Witness vector, normalized to unit max-norm.
    pub x: Vector,
    pub rho: f64,
    /// `-[(1+4ρ) Σ_{I+} x_i(Mx)_i + Σ_{I-} x_i(Mx)_i] > 0`.
    pub violation: f64,
}

impl KappaCertificate {
    /// Recompute the violation from `(M, x, rho)` and demand a strictly
    /// positive value agreeing with the stored one to `1e-9` relative.
    pub fn verify(&self, m: &Matrix) -> bool {
        match certificate_violation(m, &self.x, self.rho) {
            Some(v) => {
                v > 0.0 && (v - self.violation).abs() <= 1e-9 * (1.0 + v.abs().max(self.violation.abs()))
            }
            None => false,
        }
    }
}

/// `-[(1+4ρ) Σ_{I+} + Σ_{I-}]` for `w = x ∘ (Mx)`, or `None` on dimension
/// mismatch / zero vector.
pub fn certificate_violation(m: &Matrix, x: &Vector, rho: f64) -> Option<f64> {
    if x.len() != m.nrows() || m.nrows() != m.ncols() || x.amax() == 0.0 {
        return None;
    }
    let w = hadamard_mx(m, x);
    let tol = default_sign_tol(m, x);
    let sp: f64 = w.iter().filter(|v| **v > tol).sum();
    let sm: f64 = w.iter().filter(|v| **v < -tol).sum();
    Some(-((1.0 + 4.0 * rho) * sp + sm))
}

/// Build a certificate from a candidate direction if the strict inequality
/// holds with enough margin to survive independent recomputation.
fn try_certificate(m: &Matrix, rho: f64, dx: &Vector) -> Option<KappaCertificate> {
    let scale = dx.amax();
    if scale <= 0.0 || !scale.is_finite() {
        return None;
    }
    let xn = dx / scale;
    let w = hadamard_mx(m, &xn);
    let tol = default_sign_tol(m, &xn);
    let sp: f64 = w.iter().filter(|v| **v > tol).sum();
    let sm: f64 = w.iter().filter(|v| **v < -tol).sum();
    let violation = -((1.0 + 4.0 * rho) * sp + sm);
    let margin = 1e-7 * (1.0 + (1.0 + 4.0 * rho) * sp.abs() + sm.abs());
    if violation > margin {
        Some(KappaCertificate {
            x: xn,
            rho,
            violation,
        })
    } else {
        None
    }
}

/// Outcome of an interior-point run.
#[derive(Debug, Clone)]
pub struct IpaOutcome {
    pub result: IpaResult,
    pub iterations: usize,
    /// `x's` at exit.
    pub final_gap: f64,
}

#[derive(Debug, Clone)]
pub enum IpaResult {
    /// `x, s ≥ 0`, `‖-Mx+s-q‖_∞ ≤ eps_res`, `x's ≤ eps_gap`.
    Solved { x: Vector, s: Vector },
    /// The working hypothesis `κ̂(M) ≤ ρ` is refuted by the witness.
    Certificate(KappaCertificate),
    /// Iteration cap hit (or a stall); carries the best iterate.
    IterLimit { x: Vector, s: Vector },
}

/// Result of the interior-start search.
#[derive(Debug, Clone)]
pub enum InteriorStart {
    Point { x: Vector, s: Vector },
    /// The maximum of `min(x_i, s_i)` over the feasible region is ≤ 0:
    /// every feasible pair sits on the boundary (or the region is empty).
    NoInterior { max_slack: f64 },
}

/// Maximize the minimum slack `t` subject to `-Mx + s = q`, `x ≥ t1`,
/// `s ≥ t1`, `t ≤ 1`, via the LP engine. Returns a strictly interior pair
/// when the optimum is positive.
pub fn find_interior_start(inst: &LcpInstance) -> Result<InteriorStart> {
    let n = inst.n();
    // Variables: p = x - t1 ≥ 0 (n), r = s - t1 ≥ 0 (n), t free, w ≥ 0.
    // Rows:  -Mp + r + t(1 - M1) = q   (n rows)
    //        t + w = 1                  (cap row, keeps the LP bounded)
    let cols = 2 * n + 2;
    let mut a = Matrix::zeros(n + 1, cols);
    let mut b = Vector::zeros(n + 1);
    let ones = Vector::from_element(n, 1.0);
    let t_col = &ones - &inst.m * &ones;
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] = -inst.m[(i, j)];
        }
        a[(i, n + i)] = 1.0;
        a[(i, 2 * n)] = t_col[i];
        b[i] = inst.q[i];
    }
    a[(n, 2 * n)] = 1.0;
    a[(n, 2 * n + 1)] = 1.0;
    b[n] = 1.0;

    let mut signs = vec![VarSign::NonNeg; cols];
    signs[2 * n] = VarSign::Free;
    let mut c = Vector::zeros(cols);
    c[2 * n] = 1.0;

    match lp_solve(&a, &b, &c, &signs)? {
        LpOutcome::Optimal { x: sol, value } => {
            let t = value;
            if t <= 1e-11 * (1.0 + inst.q.amax()) {
                return Ok(InteriorStart::NoInterior { max_slack: t });
            }
            let x = Vector::from_iterator(n, (0..n).map(|i| sol[i].max(0.0) + t));
            // Recompute s from x so the equality holds to machine precision.
            let s = &inst.q + &inst.m * &x;
            if s.iter().any(|v| *v <= 0.0) {
                return Ok(InteriorStart::NoInterior { max_slack: t });
            }
            Ok(InteriorStart::Point { x, s })
        }
        LpOutcome::Infeasible(_) => Err(Error::ContractBreach(
            "interior-start relaxation reported infeasible, but it is feasible \
             by construction (t is unrestricted below)"
                .into(),
        )),
        LpOutcome::Unbounded => Err(Error::ContractBreach(
            "interior-start LP reported unbounded despite the t ≤ 1 cap".into(),
        )),
    }
}

/// `‖x∘s/μ - 1‖₂` for `μ = x's/n`.
fn proximity(x: &Vector, s: &Vector) -> f64 {
    let n = x.len();
    let mu = x.dot(s) / n as f64;
    if mu <= 0.0 {
        return f64::INFINITY;
    }
    (0..n)
        .map(|i| (x[i] * s[i] / mu - 1.0).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Solve the LCP by path following; emits a handicap certificate when a
/// Newton direction refutes `κ̂(M) ≤ ρ`.
///
/// When no strictly interior start exists, the perturbed right-hand side
/// `q + eps_res·1` is solved instead and the slack is shifted back at the
/// end (the reported pair still meets the `eps_res`/`eps_gap` targets).
pub fn ipa_solve(inst: &LcpInstance, cfg: &IpaConfig) -> Result<IpaOutcome> {
    cfg.validate()?;
    match find_interior_start(inst)? {
        InteriorStart::Point { x, s } => core_loop(inst, cfg, x, s),
        InteriorStart::NoInterior { .. } => {
            let theta = cfg.eps_res;
            let ones = Vector::from_element(inst.n(), 1.0);
            let pert = LcpInstance::new(inst.m.clone(), &inst.q + &ones * theta)?;
            match find_interior_start(&pert)? {
                InteriorStart::Point { x, s } => {
                    let mut out = core_loop(&pert, cfg, x, s)?;
                    let shift = |s: &Vector| {
                        Vector::from_iterator(s.len(), s.iter().map(|v| (v - theta).max(0.0)))
                    };
                    out.result = match out.result {
                        IpaResult::Solved { x, s } => {
                            let s = shift(&s);
                            out.final_gap = x.dot(&s);
                            IpaResult::Solved { x, s }
                        }
                        IpaResult::IterLimit { x, s } => IpaResult::IterLimit { x, s: shift(&s) },
                        other => other,
                    };
                    Ok(out)
                }
                InteriorStart::NoInterior { max_slack } => Err(Error::invalid(format!(
                    "no strictly interior point even after perturbing q by {theta:.1e} \
                     (max slack {max_slack:.3e}); the instance is primal-infeasible — \
                     run the dual pre-check"
                ))),
            }
        }
    }
}

/// One factored Newton system: `(S + XM) Δx = rhs`, `Δs = MΔx`.
struct NewtonSystem<'a> {
    m: &'a Matrix,
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
}

impl<'a> NewtonSystem<'a> {
    fn factor(m: &'a Matrix, x: &Vector, s: &Vector) -> Self {
        let n = x.len();
        let mut j = m.clone();
        for i in 0..n {
            for jj in 0..n {
                j[(i, jj)] *= x[i];
            }
            j[(i, i)] += s[i];
        }
        NewtonSystem { m, lu: j.lu() }
    }

    fn direction(&self, rhs: &Vector) -> Option<(Vector, Vector)> {
        let dx = self.lu.solve(rhs)?;
        if dx.iter().any(|v| !v.is_finite()) {
            return None;
        }
        let ds = self.m * &dx;
        Some((dx, ds))
    }
}

/// When the Newton matrix is singular, its kernel certifies `κ̂ = ∞`:
/// `(S + XM)v = 0` gives `v∘(Mv) = -(s/x)∘v² ⪇ 0`.
fn kernel_certificate(m: &Matrix, x: &Vector, s: &Vector, rho: f64) -> Option<KappaCertificate> {
    let n = x.len();
    let mut j = m.clone();
    for i in 0..n {
        for jj in 0..n {
            j[(i, jj)] *= x[i];
        }
        j[(i, i)] += s[i];
    }
    let svd = j.svd(false, true);
    let v_t = svd.v_t?;
    let idx = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())?
        .0;
    let v = Vector::from_iterator(n, (0..n).map(|k| v_t[(idx, k)]));
    try_certificate(m, rho, &v)
}

fn core_loop(inst: &LcpInstance, cfg: &IpaConfig, x0: Vector, s0: Vector) -> Result<IpaOutcome> {
    let n = inst.n();
    let nf = n as f64;
    let beta = cfg.neighborhood_beta;
    let rho_factor = 1.0 + 4.0 * cfg.rho;

    let mut x = x0;
    let mut s = &inst.q + &inst.m * &x;
    if x.iter().any(|v| *v <= 0.0) || s.iter().any(|v| *v <= 0.0) {
        return Err(Error::invalid("start point is not strictly interior"));
    }
    if s0.len() != n {
        return Err(Error::dim("start slack has wrong length"));
    }

    let mut gap = x.dot(&s);
    let mu0 = gap / nf;
    let max_iters = if cfg.max_iters > 0 {
        cfg.max_iters
    } else {
        let log_term = (mu0 * nf / cfg.eps_gap).max(std::f64::consts::E).ln();
        (10.0 * rho_factor * nf.sqrt() * log_term + 500.0) as usize
    };

    let mut iterations = 0usize;
    // Minimum per-step contraction demanded of any accepted step.
    let required_factor = 1.0 - 0.01 / (rho_factor * nf.sqrt());
    let sigma_canon = (1.0 - 0.1 / (rho_factor * nf.sqrt())).clamp(0.0, 1.0 - 1e-12);

    while gap > cfg.eps_gap {
        if iterations >= max_iters {
            return Ok(IpaOutcome {
                result: IpaResult::IterLimit { x, s },
                iterations,
                final_gap: gap,
            });
        }
        iterations += 1;
        let mu = gap / nf;
        let prox = proximity(&x, &s);
        let sys = NewtonSystem::factor(&inst.m, &x, &s);
        let xs = x.component_mul(&s);

        if prox > beta {
            // Centering phase: damped Newton toward the current-μ center.
            let rhs = Vector::from_element(n, mu) - &xs;
            let (dx, ds) = match sys.direction(&rhs) {
                Some(d) => d,
                None => {
                    if let Some(cert) = kernel_certificate(&inst.m, &x, &s, cfg.rho) {
                        return Ok(IpaOutcome {
                            result: IpaResult::Certificate(cert),
                            iterations,
                            final_gap: gap,
                        });
                    }
                    return Err(Error::LinearSolve(
                        "singular Newton system during centering".into(),
                    ));
                }
            };
            if let Some(cert) = try_certificate(&inst.m, cfg.rho, &dx) {
                return Ok(IpaOutcome {
                    result: IpaResult::Certificate(cert),
                    iterations,
                    final_gap: gap,
                });
            }
            let mut alpha = max_positive_step(&x, &s, &dx, &ds).min(1.0);
            let mut accepted = false;
            for _ in 0..60 {
                let xn = &x + &dx * alpha;
                let sn = &s + &ds * alpha;
                if xn.iter().all(|v| *v > 0.0)
                    && sn.iter().all(|v| *v > 0.0)
                    && proximity(&xn, &sn) <= prox * (1.0 - 0.05 * alpha)
                {
                    x = xn;
                    s = &inst.q + &inst.m * &x;
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
            if !accepted {
                return Ok(IpaOutcome {
                    result: IpaResult::IterLimit { x, s },
                    iterations,
                    final_gap: gap,
                });
            }
            gap = x.dot(&s);
            continue;
        }

        // Path-following phase: try aggressive candidates, keep the
        // canonical short step as the guaranteed fallback.
        let mut best: Option<(f64, Vector, Vector)> = None;
        for &sigma in &[0.0, 0.05, 0.25, 0.5, 0.8, sigma_canon] {
            let rhs = Vector::from_element(n, sigma * mu) - &xs;
            let (dx, ds) = match sys.direction(&rhs) {
                Some(d) => d,
                None => {
                    if let Some(cert) = kernel_certificate(&inst.m, &x, &s, cfg.rho) {
                        return Ok(IpaOutcome {
                            result: IpaResult::Certificate(cert),
                            iterations,
                            final_gap: gap,
                        });
                    }
                    return Err(Error::LinearSolve("singular Newton system".into()));
                }
            };
            if let Some(cert) = try_certificate(&inst.m, cfg.rho, &dx) {
                return Ok(IpaOutcome {
                    result: IpaResult::Certificate(cert),
                    iterations,
                    final_gap: gap,
                });
            }
            let alpha = largest_neighborhood_step(&x, &s, &dx, &ds, beta);
            if alpha <= 0.0 {
                continue;
            }
            let xn = &x + &dx * alpha;
            let sn = &s + &ds * alpha;
            let g = xn.dot(&sn);
            if best.as_ref().is_none_or(|(bg, _, _)| g < *bg) {
                best = Some((g, xn, sn));
            }
        }

        match best {
            Some((g, xn, _sn)) if g <= required_factor * gap => {
                x = xn;
                s = &inst.q + &inst.m * &x;
                gap = x.dot(&s);
            }
            _ => {
                // The step analysis says this cannot happen while every
                // direction passes the certificate test; exit honestly.
                return Ok(IpaOutcome {
                    result: IpaResult::IterLimit { x, s },
                    iterations,
                    final_gap: gap,
                });
            }
        }
    }

    // Terminal polish: try to round onto an exact complementary pair.
    let (x, s) = match round_solution(inst, &x, &s)? {
        RoundOutcome::Rounded { x, s } => (x, s),
        RoundOutcome::KeepApprox => (x, s),
    };
    let final_gap = x.dot(&s);
    Ok(IpaOutcome {
        result: IpaResult::Solved { x, s },
        iterations,
        final_gap,
    })
}

/// Largest `α ≥ 0` keeping `x + αΔx > 0` and `s + αΔs > 0`.
fn max_positive_step(x: &Vector, s: &Vector, dx: &Vector, ds: &Vector) -> f64 {
    let mut alpha = f64::INFINITY;
    for i in 0..x.len() {
        if dx[i] < 0.0 {
            alpha = alpha.min(-x[i] / dx[i]);
        }
        if ds[i] < 0.0 {
            alpha = alpha.min(-s[i] / ds[i]);
        }
    }
    if alpha.is_finite() {
        0.9995 * alpha
    } else {
        1.0
    }
}

/// Largest `α ∈ [0, 1]` keeping the iterate inside `N₂(β)`, by bisection.
fn largest_neighborhood_step(x: &Vector, s: &Vector, dx: &Vector, ds: &Vector, beta: f64) -> f64 {
    let inside = |alpha: f64| -> bool {
        let xn = x + dx * alpha;
        let sn = s + ds * alpha;
        xn.iter().all(|v| *v > 0.0)
            && sn.iter().all(|v| *v > 0.0)
            && proximity(&xn, &sn) <= beta
    };
    let hi_cap = max_positive_step(x, s, dx, ds).min(1.0);
    if hi_cap <= 0.0 {
        return 0.0;
    }
    if inside(hi_cap) {
        return hi_cap;
    }
    let (mut lo, mut hi) = (0.0, hi_cap);
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if inside(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Result of the exact-rounding attempt.
#[derive(Debug, Clone)]
pub enum RoundOutcome {
    Rounded { x: Vector, s: Vector },
    KeepApprox,
}

/// Guess the support `B = {i : x_i ≥ s_i}`, solve the linear system with
/// `x_{B^c} = 0`, `s_B = 0`, and accept the result only if it is
/// (near-)nonnegative and satisfies the equality residual.
pub fn round_solution(inst: &LcpInstance, x: &Vector, s: &Vector) -> Result<RoundOutcome> {
    let n = inst.n();
    if x.len() != n || s.len() != n {
        return Err(Error::dim("round_solution: dimension mismatch"));
    }
    // Columns: -M[:,i] where i ∈ B (unknown x_i), e_i where i ∉ B (unknown s_i).
    let in_b: Vec<bool> = (0..n).map(|i| x[i] >= s[i]).collect();
    let mut a = Matrix::zeros(n, n);
    for j in 0..n {
        if in_b[j] {
            for i in 0..n {
                a[(i, j)] = -inst.m[(i, j)];
            }
        } else {
            a[(j, j)] = 1.0;
        }
    }
    let lu = a.lu();
    let Some(z) = lu.solve(&inst.q) else {
        return Ok(RoundOutcome::KeepApprox);
    };
    if z.iter().any(|v| !v.is_finite() || *v < -1e-9) {
        return Ok(RoundOutcome::KeepApprox);
    }
    let mut xr = Vector::zeros(n);
    let mut sr = Vector::zeros(n);
    for i in 0..n {
        if in_b[i] {
            xr[i] = z[i].max(0.0);
        } else {
            sr[i] = z[i].max(0.0);
        }
    }
    let scale = 1.0 + inst.q.amax() + crate::numerics::inf_norm(&inst.m) * xr.amax();
    if inst.residual(&xr, &sr) <= 1e-8 * scale {
        Ok(RoundOutcome::Rounded { x: xr, s: sr })
    } else {
        Ok(RoundOutcome::KeepApprox)
    }
}
