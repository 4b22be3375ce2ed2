//! Sign-pattern polytopes over the unit simplex, vertex enumeration, and
//! the vertex-magnitude constants δ, Δ, C(M).
//!
//! For disjoint index sets `I+`, `I-` (remaining indices implicitly forced
//! to equality),
//!
//! ```text
//!   Q(M, I+, I-) = { x ∈ σ_n :  (Mx)_i ≥ 0 (i ∈ I+),
//!                                (Mx)_i ≤ 0 (i ∈ I-),
//!                                (Mx)_i = 0 (otherwise) },
//! ```
//!
//! where `σ_n` is the unit simplex `{x ≥ 0, Σx = 1}`. Vertices are basic
//! feasible solutions; over all sign patterns (and ±1 diagonal conjugations
//! `DMD`) their nonzero coordinate/image magnitudes are bounded below by δ
//! and above by Δ, giving the constant `C(M) = 4nΔ²/δ²`.

use num::rational::BigRational;
use num::{Signed, Zero};
use rayon::prelude::*;

use crate::duality::{lp_feasible, LpFeasResult, VarSign};
use crate::rational::{solve_exact, to_f64, RatMatrix};
use crate::{Error, Matrix, Result, Vector};

/// Hard cap on the enumeration dimension (float mode).
pub const ENUM_CAP: usize = 8;
/// Default cap for the exhaustive sign-pattern/conjugation scan.
pub const EXHAUSTIVE_CAP: usize = 5;
/// Cap for plain (unconjugated) bound scans and exact-mode enumeration.
pub const PLAIN_SCAN_CAP: usize = 6;

/// The polytope `Q(M, I+, I-)`.
#[derive(Debug, Clone)]
pub struct QPolytope {
    pub m: Matrix,
    pub plus_set: Vec<usize>,
    pub minus_set: Vec<usize>,
}

impl QPolytope {
    pub fn new(m: Matrix, plus_set: Vec<usize>, minus_set: Vec<usize>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::dim("QPolytope requires a square matrix"));
        }
        let n = m.nrows();
        let mut seen = vec![0u8; n];
        for &i in &plus_set {
            if i >= n {
                return Err(Error::invalid(format!("plus index {i} out of range")));
            }
            seen[i] += 1;
        }
        for &i in &minus_set {
            if i >= n {
                return Err(Error::invalid(format!("minus index {i} out of range")));
            }
            seen[i] += 1;
        }
        if seen.iter().any(|c| *c > 1) {
            return Err(Error::invalid("plus_set and minus_set must be disjoint"));
        }
        Ok(QPolytope {
            m,
            plus_set,
            minus_set,
        })
    }

    pub fn n(&self) -> usize {
        self.m.nrows()
    }

    /// Indices forced to `(Mx)_i = 0`.
    pub fn zero_set(&self) -> Vec<usize> {
        let n = self.n();
        let mut tagged = vec![false; n];
        for &i in self.plus_set.iter().chain(self.minus_set.iter()) {
            tagged[i] = true;
        }
        (0..n).filter(|&i| !tagged[i]).collect()
    }

    /// Per-row sign requirement: `+1`, `-1`, or `0`.
    fn row_signs(&self) -> Vec<i8> {
        let mut s = vec![0i8; self.n()];
        for &i in &self.plus_set {
            s[i] = 1;
        }
        for &i in &self.minus_set {
            s[i] = -1;
        }
        s
    }

    /// Membership test at absolute tolerance `tol` (scaled by the data).
    pub fn contains(&self, x: &Vector, tol: f64) -> bool {
        if x.len() != self.n() {
            return false;
        }
        let scale = 1.0 + crate::numerics::inf_norm(&self.m);
        let t = tol * scale;
        if x.iter().any(|v| *v < -t) {
            return false;
        }
        if (x.sum() - 1.0).abs() > t {
            return false;
        }
        let mx = &self.m * x;
        for (i, sign) in self.row_signs().iter().enumerate() {
            match sign {
                1 => {
                    if mx[i] < -t {
                        return false;
                    }
                }
                -1 => {
                    if mx[i] > t {
                        return false;
                    }
                }
                _ => {
                    if mx[i].abs() > t {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// A vertex (basic feasible solution) of a `QPolytope`.
///
/// `active_set` lists every constraint tight at the vertex, numbered:
/// `0` = simplex equality `Σx = 1`; `1 + i` = the sign constraint on row
/// `i` of `M`; `1 + n + i` = the bound `x_i ≥ 0`.
#[derive(Debug, Clone)]
pub struct BfsVertex {
    pub v: Vector,
    /// `M v`.
    pub image: Vector,
    pub active_set: Vec<usize>,
}

/// Vertex-magnitude constants.
#[derive(Debug, Clone, Copy)]
pub struct BfsBounds {
    /// δ: smallest nonzero magnitude among all `v_i` and `(Mv)_i`.
    pub delta: f64,
    /// Δ: largest `|(Mv)_i|`, clamped up to δ.
    pub big_delta: f64,
    /// `C(M) = 4nΔ²/δ²`.
    pub c_of_m: f64,
}

/// Iterate k-subsets of `0..n` in lexicographic order.
struct Combinations {
    n: usize,
    idx: Vec<usize>,
    done: bool,
}

impl Combinations {
    fn new(n: usize, k: usize) -> Self {
        Combinations {
            n,
            idx: (0..k).collect(),
            done: k > n,
        }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.idx.clone();
        let k = self.idx.len();
        if k == 0 {
            self.done = true;
            return Some(out);
        }
        // Advance the odometer.
        let mut i = k;
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.idx[i] + (k - i) < self.n {
                self.idx[i] += 1;
                for j in (i + 1)..k {
                    self.idx[j] = self.idx[j - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    }
}

/// Constraint rows as (coefficients, rhs) in the numbering of
/// [`BfsVertex::active_set`].
fn constraint_rows(q: &QPolytope) -> Vec<(Vector, f64)> {
    let n = q.n();
    let mut rows = Vec::with_capacity(2 * n + 1);
    rows.push((Vector::from_element(n, 1.0), 1.0));
    for i in 0..n {
        rows.push((q.m.row(i).transpose(), 0.0));
    }
    for i in 0..n {
        let mut e = Vector::zeros(n);
        e[i] = 1.0;
        rows.push((e, 0.0));
    }
    rows
}

/// All vertices of `Q`, by exhaustive n-subset active-set selection:
/// pick `n` constraint rows, solve the square system (sign rows and bounds
/// taken at equality, plus the simplex row with rhs 1), keep solutions
/// feasible for the full system, and merge duplicates.
pub fn enumerate_vertices(q: &QPolytope) -> Result<Vec<BfsVertex>> {
    let n = q.n();
    if n > ENUM_CAP {
        return Err(Error::PivotCap { cap: ENUM_CAP });
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let rows = constraint_rows(q);
    let scale = 1.0 + crate::numerics::inf_norm(&q.m);
    let feas_tol = 1e-9 * scale;
    let signs = q.row_signs();

    // The simplex equality (row 0) is tight at every feasible point, so every
    // vertex has a defining basis containing it: fix it and choose n-1 more.
    let mut vertices: Vec<BfsVertex> = Vec::new();
    for tail in Combinations::new(rows.len() - 1, n - 1) {
        let subset: Vec<usize> = std::iter::once(0).chain(tail.iter().map(|i| i + 1)).collect();
        let mut a = Matrix::zeros(n, n);
        let mut b = Vector::zeros(n);
        for (r, &ci) in subset.iter().enumerate() {
            for c in 0..n {
                a[(r, c)] = rows[ci].0[c];
            }
            b[r] = rows[ci].1;
        }
        let lu = a.lu();
        let Some(x) = lu.solve(&b) else { continue };
        if x.iter().any(|v| !v.is_finite()) {
            continue;
        }
        // Reject spurious solutions of ill-conditioned systems.
        let mut ok = true;
        for (r, &ci) in subset.iter().enumerate() {
            if (rows[ci].0.dot(&x) - b[r]).abs() > feas_tol {
                ok = false;
                break;
            }
        }
        if !ok {
            continue;
        }
        // Full feasibility.
        if x.iter().any(|v| *v < -feas_tol) {
            continue;
        }
        if (x.sum() - 1.0).abs() > feas_tol {
            continue;
        }
        let mx = &q.m * &x;
        let feasible = (0..n).all(|i| match signs[i] {
            1 => mx[i] >= -feas_tol,
            -1 => mx[i] <= feas_tol,
            _ => mx[i].abs() <= feas_tol,
        });
        if !feasible {
            continue;
        }
        // Merge duplicates at L∞ 1e-9.
        if vertices
            .iter()
            .any(|w| (&w.v - &x).amax() <= 1e-9)
        {
            continue;
        }
        let mut active = vec![0usize];
        for i in 0..n {
            if mx[i].abs() <= feas_tol {
                active.push(1 + i);
            }
        }
        for i in 0..n {
            if x[i].abs() <= feas_tol {
                active.push(1 + n + i);
            }
        }
        vertices.push(BfsVertex {
            v: x,
            image: mx,
            active_set: active,
        });
    }
    Ok(vertices)
}

/// An exact-rational vertex.
#[derive(Debug, Clone)]
pub struct RatVertex {
    pub v: Vec<BigRational>,
    pub image: Vec<BigRational>,
    pub active_set: Vec<usize>,
}

/// Exact-mode enumeration (same active-set scheme, rational arithmetic,
/// exact sign tests). Inputs are taken exactly as their `f64` values.
pub fn enumerate_vertices_exact(q: &QPolytope) -> Result<Vec<RatVertex>> {
    let n = q.n();
    if n > PLAIN_SCAN_CAP {
        return Err(Error::PivotCap {
            cap: PLAIN_SCAN_CAP,
        });
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let m_exact = RatMatrix::from_f64(&q.m)?;
    let one = BigRational::from_integer(1.into());
    let zero = BigRational::zero();

    // Constraint rows in exact form.
    let mut rows: Vec<(Vec<BigRational>, BigRational)> = Vec::with_capacity(2 * n + 1);
    rows.push((vec![one.clone(); n], one.clone()));
    for i in 0..n {
        rows.push((
            (0..n).map(|j| m_exact.at(i, j).clone()).collect(),
            zero.clone(),
        ));
    }
    for i in 0..n {
        let mut e = vec![zero.clone(); n];
        e[i] = one.clone();
        rows.push((e, zero.clone()));
    }
    let signs = q.row_signs();

    let mut vertices: Vec<RatVertex> = Vec::new();
    'subset: for tail in Combinations::new(rows.len() - 1, n - 1) {
        let subset: Vec<usize> = std::iter::once(0).chain(tail.iter().map(|i| i + 1)).collect();
        let mut a = RatMatrix::zeros(n, n);
        let mut b = vec![zero.clone(); n];
        for (r, &ci) in subset.iter().enumerate() {
            for c in 0..n {
                *a.at_mut(r, c) = rows[ci].0[c].clone();
            }
            b[r] = rows[ci].1.clone();
        }
        let Some(x) = solve_exact(&a, &b) else {
            continue;
        };
        if x.iter().any(|v| v.is_negative()) {
            continue;
        }
        let sum: BigRational = x.iter().cloned().sum();
        if sum != one {
            continue;
        }
        let mx = m_exact.mul_vec(&x);
        for i in 0..n {
            let bad = match signs[i] {
                1 => mx[i].is_negative(),
                -1 => mx[i].is_positive(),
                _ => !mx[i].is_zero(),
            };
            if bad {
                continue 'subset;
            }
        }
        if vertices.iter().any(|w| w.v == x) {
            continue;
        }
        let mut active = vec![0usize];
        for i in 0..n {
            if mx[i].is_zero() {
                active.push(1 + i);
            }
        }
        for i in 0..n {
            if x[i].is_zero() {
                active.push(1 + n + i);
            }
        }
        vertices.push(RatVertex {
            v: x,
            image: mx,
            active_set: active,
        });
    }
    Ok(vertices)
}

impl RatVertex {
    pub fn to_float(&self) -> BfsVertex {
        BfsVertex {
            v: Vector::from_iterator(self.v.len(), self.v.iter().map(to_f64)),
            image: Vector::from_iterator(self.image.len(), self.image.iter().map(to_f64)),
            active_set: self.active_set.clone(),
        }
    }
}

fn fold_bounds(acc: (f64, f64), verts: &[BfsVertex]) -> (f64, f64) {
    let (mut dmin, mut dmax) = acc;
    for vert in verts {
        for v in vert.v.iter().chain(vert.image.iter()) {
            let a = v.abs();
            if a > 1e-12 {
                dmin = dmin.min(a);
            }
        }
        for v in vert.image.iter() {
            dmax = dmax.max(v.abs());
        }
    }
    (dmin, dmax)
}

/// Scan sign patterns (and, when `exhaustive`, all ±1 diagonal conjugations
/// `DMD` up to the `D ↔ -D` symmetry) and aggregate δ, Δ, `C(M)` over every
/// enumerated vertex.
pub fn bfs_bounds(m: &Matrix, exhaustive: bool) -> Result<BfsBounds> {
    let cap = if exhaustive {
        EXHAUSTIVE_CAP
    } else {
        PLAIN_SCAN_CAP
    };
    bfs_bounds_with_cap(m, exhaustive, cap)
}

/// [`bfs_bounds`] with an explicit dimension cap (informed override).
pub fn bfs_bounds_with_cap(m: &Matrix, exhaustive: bool, cap: usize) -> Result<BfsBounds> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::dim("bfs_bounds requires a square matrix"));
    }
    if n > cap.min(ENUM_CAP) {
        return Err(Error::PivotCap {
            cap: cap.min(ENUM_CAP),
        });
    }
    if n == 0 {
        return Err(Error::invalid("bfs_bounds undefined for n = 0"));
    }

    // Conjugations: D = diag(±1) with the first entry fixed to +1
    // (D and -D give the same DMD).
    let conjugations: Vec<Vec<f64>> = if exhaustive {
        (0..(1usize << (n - 1)))
            .map(|mask| {
                (0..n)
                    .map(|i| {
                        if i > 0 && (mask >> (i - 1)) & 1 == 1 {
                            -1.0
                        } else {
                            1.0
                        }
                    })
                    .collect()
            })
            .collect()
    } else {
        vec![vec![1.0; n]]
    };

    let n_patterns = 3usize.pow(n as u32);
    let matrices: Vec<Matrix> = conjugations
        .iter()
        .map(|d| {
            let mut dm = m.clone();
            for i in 0..n {
                for j in 0..n {
                    dm[(i, j)] *= d[i] * d[j];
                }
            }
            dm
        })
        .collect();

    let results: Result<Vec<(f64, f64)>> = matrices
        .par_iter()
        .map(|dm| {
            let mut acc = (f64::INFINITY, 0.0f64);
            for code in 0..n_patterns {
                let mut plus = Vec::new();
                let mut minus = Vec::new();
                let mut c = code;
                for i in 0..n {
                    match c % 3 {
                        1 => plus.push(i),
                        2 => minus.push(i),
                        _ => {}
                    }
                    c /= 3;
                }
                let q = QPolytope::new(dm.clone(), plus, minus)?;
                let verts = enumerate_vertices(&q)?;
                acc = fold_bounds(acc, &verts);
            }
            Ok(acc)
        })
        .collect();

    let (delta, mut big_delta) = results?
        .into_iter()
        .fold((f64::INFINITY, 0.0f64), |a, b| (a.0.min(b.0), a.1.max(b.1)));

    if !delta.is_finite() {
        return Err(Error::ContractBreach(
            "no vertex with a nonzero coordinate was enumerated".into(),
        ));
    }
    big_delta = big_delta.max(delta);
    let c_of_m = 4.0 * n as f64 * (big_delta / delta).powi(2);
    Ok(BfsBounds {
        delta,
        big_delta,
        c_of_m,
    })
}

/// Write `x ∈ Q` as a convex combination of at most `n+1` vertices
/// (Carathéodory), terms sorted by descending weight.
pub fn carath_decompose(q: &QPolytope, x: &Vector) -> Result<Vec<(f64, BfsVertex)>> {
    let n = q.n();
    if x.len() != n {
        return Err(Error::dim("carath_decompose: dimension mismatch"));
    }
    if !q.contains(x, 1e-8) {
        return Err(Error::invalid(
            "carath_decompose: point is not in the polytope",
        ));
    }
    let vertices = enumerate_vertices(q)?;
    if vertices.is_empty() {
        return Err(Error::ContractBreach(
            "nonempty polytope enumerated no vertices".into(),
        ));
    }
    // Feasibility LP: λ ≥ 0, Σλ = 1, Σ λ_j v_j = x. The simplex engine
    // returns a basic solution, hence ≤ n+1 nonzero weights.
    let cols = vertices.len();
    let mut a = Matrix::zeros(n + 1, cols);
    let mut b = Vector::zeros(n + 1);
    for (j, vert) in vertices.iter().enumerate() {
        for i in 0..n {
            a[(i, j)] = vert.v[i];
        }
        a[(n, j)] = 1.0;
    }
    for i in 0..n {
        b[i] = x[i];
    }
    b[n] = 1.0;
    let lam = match lp_feasible(&a, &b, &vec![VarSign::NonNeg; cols])? {
        LpFeasResult::Feasible(lam) => lam,
        LpFeasResult::Infeasible(_) => {
            return Err(Error::invalid(
                "carath_decompose: point is not in the convex hull of the vertices",
            ))
        }
    };
    let mut terms: Vec<(f64, BfsVertex)> = lam
        .iter()
        .enumerate()
        .filter(|(_, w)| **w > 1e-12)
        .map(|(j, w)| (*w, vertices[j].clone()))
        .collect();
    terms.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());

    // Contract checks: term count, weight sum, reconstruction.
    if terms.len() > n + 1 {
        return Err(Error::ContractBreach(format!(
            "Carathéodory decomposition has {} terms (> n+1 = {})",
            terms.len(),
            n + 1
        )));
    }
    let mut recon = Vector::zeros(n);
    let mut wsum = 0.0;
    for (w, vert) in &terms {
        recon += &vert.v * *w;
        wsum += w;
    }
    if (wsum - 1.0).abs() > 1e-8 || (&recon - x).amax() > 1e-8 {
        return Err(Error::ContractBreach(
            "Carathéodory reconstruction failed its tolerance".into(),
        ));
    }
    Ok(terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn simplex_q(m: Matrix, plus: &[usize], minus: &[usize]) -> QPolytope {
        QPolytope::new(m, plus.to_vec(), minus.to_vec()).unwrap()
    }

    #[test]
    fn identity_plus_pattern_gives_unit_vectors() {
        let q = simplex_q(Matrix::identity(2, 2), &[0, 1], &[]);
        let verts = enumerate_vertices(&q).unwrap();
        assert_eq!(verts.len(), 2);
        let mut coords: Vec<Vec<f64>> = verts.iter().map(|v| v.v.iter().cloned().collect()).collect();
        coords.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_relative_eq!(coords[0][0], 0.0, epsilon = 1e-12);
        assert_relative_eq!(coords[0][1], 1.0, epsilon = 1e-12);
        assert_relative_eq!(coords[1][0], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn identity_minus_pattern_is_empty() {
        let q = simplex_q(Matrix::identity(2, 2), &[], &[0, 1]);
        assert!(enumerate_vertices(&q).unwrap().is_empty());
    }

    #[test]
    fn all_zero_pattern_can_be_empty() {
        // M = [[0,1],[1,0]], both rows forced to zero: x₂ = 0 ∧ x₁ = 0
        // contradicts Σx = 1.
        let q = simplex_q(Matrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]), &[], &[]);
        assert!(enumerate_vertices(&q).unwrap().is_empty());
    }

    #[test]
    fn vertices_satisfy_constraints_and_are_distinct() {
        let m = crate::numerics::csizmadia(4);
        for code in [0usize, 13, 40, 80, 26, 53] {
            let mut plus = Vec::new();
            let mut minus = Vec::new();
            let mut c = code;
            for i in 0..4 {
                match c % 3 {
                    1 => plus.push(i),
                    2 => minus.push(i),
                    _ => {}
                }
                c /= 3;
            }
            let q = simplex_q(m.clone(), &plus, &minus);
            let verts = enumerate_vertices(&q).unwrap();
            for v in &verts {
                assert!(q.contains(&v.v, 1e-9), "pattern {code}: vertex escapes");
                assert!(v.active_set.contains(&0));
            }
            for i in 0..verts.len() {
                for j in (i + 1)..verts.len() {
                    assert!(
                        (&verts[i].v - &verts[j].v).amax() > 1e-7,
                        "pattern {code}: duplicate vertices"
                    );
                }
            }
        }
    }

    #[test]
    fn cap_enforced() {
        let q = simplex_q(Matrix::identity(9, 9), &[], &[]);
        assert!(matches!(
            enumerate_vertices(&q),
            Err(Error::PivotCap { .. })
        ));
    }

    #[test]
    fn identity_bounds() {
        let b = bfs_bounds(&Matrix::identity(2, 2), false).unwrap();
        assert_relative_eq!(b.delta, 1.0, epsilon = 1e-12);
        assert_relative_eq!(b.big_delta, 1.0, epsilon = 1e-12);
        assert_relative_eq!(b.c_of_m, 8.0, epsilon = 1e-9);
    }

    #[test]
    fn bounds_monotone_under_larger_scan() {
        let m = crate::numerics::csizmadia(3);
        let plain = bfs_bounds(&m, false).unwrap();
        let full = bfs_bounds(&m, true).unwrap();
        assert!(full.delta <= plain.delta + 1e-15);
        assert!(full.big_delta >= plain.big_delta - 1e-15);
        assert!(plain.delta <= plain.big_delta);
        assert!(plain.c_of_m >= 4.0 * 3.0 - 1e-9);
    }

    #[test]
    fn float_agrees_with_exact_small() {
        let mats = [
            Matrix::identity(3, 3),
            crate::numerics::csizmadia(3),
            Matrix::from_row_slice(3, 3, &[1.0, 2.0, -1.0, 0.5, 1.0, 0.0, -1.0, 0.25, 1.0]),
        ];
        for m in &mats {
            for code in 0..27usize {
                let mut plus = Vec::new();
                let mut minus = Vec::new();
                let mut c = code;
                for i in 0..3 {
                    match c % 3 {
                        1 => plus.push(i),
                        2 => minus.push(i),
                        _ => {}
                    }
                    c /= 3;
                }
                let q = simplex_q(m.clone(), &plus, &minus);
                let flo = enumerate_vertices(&q).unwrap();
                let exa = enumerate_vertices_exact(&q).unwrap();
                assert_eq!(flo.len(), exa.len(), "pattern {code}");
                // Hausdorff-style matching.
                for fv in &flo {
                    let nearest = exa
                        .iter()
                        .map(|rv| (&rv.to_float().v - &fv.v).amax())
                        .fold(f64::INFINITY, f64::min);
                    assert!(nearest < 1e-7, "pattern {code}: unmatched float vertex");
                }
            }
        }
    }

    #[test]
    fn carath_vertex_is_single_term() {
        let q = simplex_q(Matrix::identity(2, 2), &[0, 1], &[]);
        let x = Vector::from_row_slice(&[1.0, 0.0]);
        let terms = carath_decompose(&q, &x).unwrap();
        assert_eq!(terms.len(), 1);
        assert_relative_eq!(terms[0].0, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn carath_midpoint_two_halves() {
        let q = simplex_q(Matrix::identity(2, 2), &[0, 1], &[]);
        let x = Vector::from_row_slice(&[0.5, 0.5]);
        let terms = carath_decompose(&q, &x).unwrap();
        assert_eq!(terms.len(), 2);
        assert_relative_eq!(terms[0].0, 0.5, epsilon = 1e-9);
        assert_relative_eq!(terms[1].0, 0.5, epsilon = 1e-9);
    }

    #[test]
    fn carath_random_reconstruction() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let q = simplex_q(Matrix::identity(3, 3), &[0, 1, 2], &[]);
        for _ in 0..20 {
            let raw: Vec<f64> = (0..3).map(|_| rng.random_range(0.01..1.0)).collect();
            let sum: f64 = raw.iter().sum();
            let x = Vector::from_iterator(3, raw.iter().map(|v| v / sum));
            let terms = carath_decompose(&q, &x).unwrap();
            let mut recon = Vector::zeros(3);
            for (w, vert) in &terms {
                recon += &vert.v * *w;
            }
            assert!((&recon - &x).amax() < 1e-8);
            assert!(terms.windows(2).all(|p| p[0].0 >= p[1].0 - 1e-15));
        }
    }

    #[test]
    fn carath_rejects_outside_point() {
        let q = simplex_q(Matrix::identity(2, 2), &[0, 1], &[]);
        let x = Vector::from_row_slice(&[0.9, 0.3]); // not on the simplex
        assert!(carath_decompose(&q, &x).is_err());
    }
}
