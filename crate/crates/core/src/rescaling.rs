//! Row rescalings `d` of `M` and the convex set `R(M,τ)` of those with
//! `κ̂(diag(d)M) ≤ τ`, together with the machinery Algorithm-style solvers
//! need: sampled membership tests, separating hyperplanes from handicap
//! certificates, stability brackets under perturbation of `d`, per-edge
//! ratio bounds, and the block condensing that caps the dynamic range of a
//! rescaling while staying inside `R(M, 8n²τ)`.
//!
//! Everything is built on one identity: the sign partition of
//! `x∘(diag(d)Mx)` does not depend on the positive vector `d`, so the
//! defining constraint of `R(M,τ)`,
//!
//!   (1+4τ)·Σ_{i∈I⁺(x)} d_i·x_i(Mx)_i + Σ_{i∈I⁻(x)} d_i·x_i(Mx)_i ≥ 0,
//!
//! is *linear in d* for each fixed test vector `x`. Membership is therefore
//! convex, violated constraints are separating hyperplanes, and exact
//! membership (equivalent to computing κ̂) is replaced throughout by
//! certification on a finite suite of test vectors.

use rayon::prelude::*;

use crate::numerics::{default_sign_tol, hadamard_mx, sign_partition};
use crate::polytope::{enumerate_vertices, QPolytope, ENUM_CAP};
use crate::{Error, Matrix, Result, Vector};

/// A row rescaling with `d ≥ 1` componentwise.
#[derive(Debug, Clone, PartialEq)]
pub struct RescaleVector {
    d: Vector,
}

impl RescaleVector {
    pub fn new(d: Vector) -> Result<Self> {
        if d.iter().any(|v| *v < 1.0 - 1e-12) {
            return Err(Error::invalid("rescaling entries must be ≥ 1"));
        }
        Ok(RescaleVector { d })
    }

    pub fn d(&self) -> &Vector {
        &self.d
    }

    pub fn into_vector(self) -> Vector {
        self.d
    }
}

/// A hyperplane `⟨c,·⟩ ≥ 0` separating a rescaling center from `R(M,ρ)`.
#[derive(Debug, Clone)]
pub struct SeparationVector {
    pub c: Vector,
    pub source_x: Vector,
    pub rho: f64,
}

/// Result of a sampled membership test.
#[derive(Debug, Clone)]
pub struct RMembership {
    pub member: bool,
    /// Most negative constraint value over the suite (≥ 0 when member).
    pub worst_value: f64,
    /// Index into the suite of the worst test vector.
    pub worst_index: Option<usize>,
}

/// Constraint value `(1+4τ)Σ_{I⁺} d_i w_i + Σ_{I⁻} d_i w_i` at one `x`,
/// with `w = x∘(Mx)` and the sign partition taken at the unrescaled `M`.
pub fn r_constraint_value(m: &Matrix, d: &Vector, tau: f64, x: &Vector) -> f64 {
    let w = hadamard_mx(m, x);
    let tol = default_sign_tol(m, x);
    let mut value = 0.0;
    for i in 0..w.len() {
        if w[i] > tol {
            value += (1.0 + 4.0 * tau) * d[i] * w[i];
        } else if w[i] < -tol {
            value += d[i] * w[i];
        }
    }
    value
}

/// Sampled membership `d ∈ R(M,τ)`: the defining inequality must hold at
/// every suite vector. Equivalent per-sample statement:
/// `kappa_at(diag(d)M, x) ≤ τ`.
pub fn in_r_sampled(m: &Matrix, d: &Vector, tau: f64, xs: &[Vector]) -> Result<RMembership> {
    let n = m.nrows();
    if m.ncols() != n || d.len() != n {
        return Err(Error::dim("in_r_sampled: dimension mismatch"));
    }
    if d.iter().any(|v| *v < 1.0 - 1e-12) {
        return Err(Error::invalid("in_r_sampled requires d ≥ 1"));
    }
    if tau < 0.0 {
        return Err(Error::invalid("in_r_sampled requires τ ≥ 0"));
    }
    let evals: Vec<(usize, f64, f64)> = xs
        .par_iter()
        .enumerate()
        .map(|(k, x)| {
            let value = r_constraint_value(m, d, tau, x);
            let w = hadamard_mx(m, x);
            let scale: f64 = w
                .iter()
                .zip(d.iter())
                .map(|(wi, di)| (1.0 + 4.0 * tau) * (wi * di).abs())
                .sum();
            (k, value, 1e-9 * (1.0 + scale))
        })
        .collect();
    let mut member = true;
    let mut worst_value = f64::INFINITY;
    let mut worst_index = None;
    for (k, value, tol) in evals {
        if value < -tol {
            member = false;
        }
        if value < worst_value {
            worst_value = value;
            worst_index = Some(k);
        }
    }
    if xs.is_empty() {
        worst_value = 0.0;
    }
    Ok(RMembership {
        member,
        worst_value,
        worst_index,
    })
}

/// Build the separating hyperplane from a handicap certificate `x`:
/// `c_i = (1+4ρ)·x_i(Mx)_i` on `I⁺(x)`, `c_i = x_i(Mx)_i` on `I⁻(x)`,
/// zero elsewhere. Any `d′ ∈ R(M,ρ)` satisfies `⟨c,d′⟩ ≥ 0`, while the
/// center the certificate was produced at has `⟨c,d⟩ < 0`.
pub fn separation_from_certificate(m: &Matrix, x: &Vector, rho: f64) -> Result<SeparationVector> {
    let n = m.nrows();
    if m.ncols() != n || x.len() != n {
        return Err(Error::dim("separation_from_certificate: dimension mismatch"));
    }
    let w = hadamard_mx(m, x);
    let tol = default_sign_tol(m, x);
    let part = sign_partition(m, x, tol)?;
    if part.minus.is_empty() {
        return Err(Error::invalid(
            "vector has no negative x_i(Mx)_i component — it cannot separate",
        ));
    }
    let mut c = Vector::zeros(n);
    for &i in &part.plus {
        c[i] = (1.0 + 4.0 * rho) * w[i];
    }
    for &i in &part.minus {
        c[i] = w[i];
    }
    Ok(SeparationVector {
        c,
        source_x: x.clone(),
        rho,
    })
}

/// Bracket for `κ̂(diag(d′)M)` when `δ₁d ≤ d′ ≤ δ₂d` and
/// `κ̂(diag(d)M) = κ`: returns
/// `( ((δ₁/δ₂)(1+4κ) − 1)/4 , ((δ₂/δ₁)(1+4κ) − 1)/4 )`.
pub fn stability_bound(kappa_d: f64, delta1: f64, delta2: f64) -> Result<(f64, f64)> {
    if !(0.0 < delta1 && delta1 <= delta2) {
        return Err(Error::invalid("stability_bound requires 0 < δ₁ ≤ δ₂"));
    }
    let lo = ((delta1 / delta2) * (1.0 + 4.0 * kappa_d) - 1.0) / 4.0;
    let hi = ((delta2 / delta1) * (1.0 + 4.0 * kappa_d) - 1.0) / 4.0;
    Ok((lo, hi))
}

/// Per-edge ratio bounds: any `d ∈ R(M,τ)` obeys `d_i ≤ K0[i][j]·d_j` on
/// every edge of the nonzero pattern.
#[derive(Debug, Clone)]
pub struct EdgeBoundTable {
    pub k0: Vec<Vec<f64>>,
}

impl EdgeBoundTable {
    /// Largest finite off-diagonal entry, or 1 when the graph has no edges.
    pub fn max_finite(&self) -> f64 {
        let mut best = 1.0_f64;
        for (i, row) in self.k0.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if i != j && v.is_finite() {
                    best = best.max(*v);
                }
            }
        }
        best
    }
}

/// Exact edge bounds from the chain with test vector
/// `x = eⁱ − ((M_ii+1)/M_ij)·eʲ`: for `M_ij ≠ 0`,
/// `K0[i][j] = (1+4τ)·( −((M_ii+1)/M_ij)·M_ji + M_jj·((M_ii+1)/M_ij)² )`,
/// clamped below at 1; `+∞` where `M_ij = 0`.
pub fn edge_bounds(m: &Matrix, tau: f64) -> Result<EdgeBoundTable> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::dim("edge_bounds: square matrix required"));
    }
    let mut k0 = vec![vec![f64::INFINITY; n]; n];
    for i in 0..n {
        k0[i][i] = 1.0;
        for j in 0..n {
            if j == i || m[(i, j)] == 0.0 {
                continue;
            }
            let t = (m[(i, i)] + 1.0) / m[(i, j)];
            let bound = (1.0 + 4.0 * tau) * (-t * m[(j, i)] + m[(j, j)] * t * t);
            k0[i][j] = bound.max(1.0);
        }
    }
    Ok(EdgeBoundTable { k0 })
}

/// Condensing result: the rescaling plus the constants that shaped it.
#[derive(Debug, Clone)]
pub struct CondenseOutcome {
    pub d: RescaleVector,
    pub k0: f64,
    pub k: f64,
    pub blocks: usize,
    /// False when the BFS bounds were unavailable and `k` fell back to a
    /// fixed constant (the condensing contract is then untested).
    pub k_from_bounds: bool,
}

/// Fallback inter-block ratio when BFS bounds cannot be computed.
pub const K_FALLBACK: f64 = 1e6;

/// Condense a rescaling: normalize `min d = 1`, sort, split into blocks
/// wherever a consecutive sorted ratio exceeds `K₀`, keep all within-block
/// ratios, and replace every inter-block jump by the single ratio
/// `K = 20n⁷·K₀^{2n}·Δ³/δ⁶`. The output stays in `R(M, 8n²τ)` when the
/// input was in `R(M,τ)` while its dynamic range becomes bounded in terms
/// of `n`, `K₀`, δ, Δ only.
pub fn condense_rescaling(m: &Matrix, d: &Vector, tau: f64) -> Result<CondenseOutcome> {
    let n = m.nrows();
    if m.ncols() != n || d.len() != n {
        return Err(Error::dim("condense_rescaling: dimension mismatch"));
    }
    if n < 3 {
        return Err(Error::invalid("condense_rescaling requires n ≥ 3"));
    }
    if d.iter().any(|v| *v <= 0.0 || v.is_nan()) {
        return Err(Error::invalid("rescaling entries must be positive"));
    }
    let k0 = edge_bounds(m, tau)?.max_finite();
    let (k, k_from_bounds) = match crate::polytope::bfs_bounds(m, n <= 4) {
        Ok(b) => {
            // ln K = ln 20 + 7 ln n + 2n ln K₀ + 3 ln Δ − 6 ln δ, clamped.
            let ln_k = (20.0_f64).ln()
                + 7.0 * (n as f64).ln()
                + 2.0 * n as f64 * k0.ln()
                + 3.0 * b.big_delta.ln()
                - 6.0 * b.delta.ln();
            (ln_k.min(230.0).exp().max(k0), true)
        }
        Err(_) => (K_FALLBACK.max(k0), false),
    };

    // Normalize so the minimum entry is exactly 1.
    let dmin = d.min();
    let normalized: Vec<f64> = d.iter().map(|v| v / dmin).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| normalized[a].partial_cmp(&normalized[b]).unwrap());

    let mut condensed_sorted = vec![0.0f64; n];
    condensed_sorted[0] = 1.0;
    let mut blocks = 1usize;
    for pos in 1..n {
        let prev = normalized[order[pos - 1]];
        let cur = normalized[order[pos]];
        let ratio = cur / prev;
        if ratio > k0 {
            blocks += 1;
            condensed_sorted[pos] = condensed_sorted[pos - 1] * k;
        } else {
            condensed_sorted[pos] = condensed_sorted[pos - 1] * ratio;
        }
    }
    let mut out = Vector::zeros(n);
    for (pos, &idx) in order.iter().enumerate() {
        out[idx] = condensed_sorted[pos];
    }
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::ContractBreach(
            "condensed rescaling overflowed — inter-block ratio too large".into(),
        ));
    }
    Ok(CondenseOutcome {
        d: RescaleVector::new(out)?,
        k0,
        k,
        blocks,
        k_from_bounds,
    })
}

/// A suite of handicap test vectors derived from the sign-pattern
/// polytopes: for every ±1 conjugation mask and every sign pattern, all
/// polytope vertices mapped back through the conjugation, capped at
/// `max_size`. Available for `n ≤ 8`.
pub fn bfs_suite(m: &Matrix, max_size: usize) -> Result<Vec<Vector>> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::dim("bfs_suite: square matrix required"));
    }
    if n > ENUM_CAP {
        return Err(Error::PivotCap { cap: ENUM_CAP });
    }
    let mut suite = Vec::new();
    'outer: for dmask in 0..(1usize << (n - 1)) {
        let dsign: Vec<f64> = (0..n)
            .map(|i| {
                if i > 0 && (dmask >> (i - 1)) & 1 == 1 {
                    -1.0
                } else {
                    1.0
                }
            })
            .collect();
        let mut dmd = m.clone();
        for i in 0..n {
            for j in 0..n {
                dmd[(i, j)] *= dsign[i] * dsign[j];
            }
        }
        for code in 0..3usize.pow(n as u32) {
            let mut plus = Vec::new();
            let mut minus = Vec::new();
            let mut cc = code;
            for i in 0..n {
                match cc % 3 {
                    1 => plus.push(i),
                    2 => minus.push(i),
                    _ => {}
                }
                cc /= 3;
            }
            let q = QPolytope::new(dmd.clone(), plus, minus)?;
            for vert in enumerate_vertices(&q)? {
                let x = Vector::from_iterator(n, (0..n).map(|i| dsign[i] * vert.v[i]));
                suite.push(x);
                if suite.len() >= max_size {
                    break 'outer;
                }
            }
        }
    }
    Ok(suite)
}
