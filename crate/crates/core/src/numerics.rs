//! Sign partitions, the pointwise handicap formula, principal pivotal
//! transforms, diagonal rescalings, and PSD tests.
//!
//! Everything here revolves around the Hadamard product `w = x ∘ (Mx)`.
//! Writing `I+`, `I0`, `I-` for the indices where `w_i` is positive, zero,
//! negative, the pointwise handicap of `M` at `x` is
//!
//! ```text
//!              ⎧ 0                                        if x'Mx >= 0,
//!   κ̂(M, x) = ⎨ ∞                                        if x'Mx < 0 and I+ = ∅,
//!              ⎩ -Σ_{I-} w_i / (4 Σ_{I+} w_i) - 1/4       otherwise,
//! ```
//!
//! and `κ̂(M) = sup_x κ̂(M,x)`. The value is invariant under `x -> αx`
//! (`w` is quadratic in `x`) and under symmetric diagonal conjugation
//! `(M, x) -> (DMD, D⁻¹x)`; row rescaling `M -> diag(d) M` with `d > 0`
//! leaves the partition of any fixed `x` unchanged.

use crate::{Error, Matrix, Result, Vector};

/// Partition of `{0, …, n-1}` by the sign of `x_i (Mx)_i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignPartition {
    pub plus: Vec<usize>,
    pub zero: Vec<usize>,
    pub minus: Vec<usize>,
}

impl SignPartition {
    /// Total number of indices covered (the dimension).
    pub fn len(&self) -> usize {
        self.plus.len() + self.zero.len() + self.minus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A nonnegative extended-real handicap value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KappaValue {
    Finite(f64),
    Infinite,
}

impl KappaValue {
    /// Collapse to `f64`, mapping `Infinite` to `f64::INFINITY`.
    pub fn value(self) -> f64 {
        match self {
            KappaValue::Finite(v) => v,
            KappaValue::Infinite => f64::INFINITY,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, KappaValue::Finite(_))
    }
}

impl PartialOrd for KappaValue {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        self.value().partial_cmp(&other.value())
    }
}

fn check_square(m: &Matrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::dim(format!(
            "matrix is {}x{}, expected square",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(m.nrows())
}

fn check_dims(m: &Matrix, x: &Vector) -> Result<usize> {
    let n = check_square(m)?;
    if x.len() != n {
        return Err(Error::dim(format!(
            "matrix is {n}x{n} but vector has length {}",
            x.len()
        )));
    }
    Ok(n)
}

/// Max-row-sum norm ‖M‖_∞.
pub fn inf_norm(m: &Matrix) -> f64 {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)].abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Default sign tolerance for the bilinear quantities `x_i (Mx)_i`:
/// `1e-12 * (1 + ‖M‖_∞ ‖x‖²)`, relative to the scale of the form.
pub fn default_sign_tol(m: &Matrix, x: &Vector) -> f64 {
    1e-12 * (1.0 + inf_norm(m) * x.norm_squared())
}

/// The Hadamard product `x ∘ (Mx)`.
pub fn hadamard_mx(m: &Matrix, x: &Vector) -> Vector {
    let mx = m * x;
    x.component_mul(&mx)
}

/// Partition indices by the sign of `x_i (Mx)_i` against `tol`.
pub fn sign_partition(m: &Matrix, x: &Vector, tol: f64) -> Result<SignPartition> {
    check_dims(m, x)?;
    if tol < 0.0 {
        return Err(Error::invalid("sign tolerance must be >= 0"));
    }
    let w = hadamard_mx(m, x);
    let mut p = SignPartition {
        plus: Vec::new(),
        zero: Vec::new(),
        minus: Vec::new(),
    };
    for (i, wi) in w.iter().enumerate() {
        if *wi > tol {
            p.plus.push(i);
        } else if *wi < -tol {
            p.minus.push(i);
        } else {
            p.zero.push(i);
        }
    }
    Ok(p)
}

/// Pointwise handicap `κ̂(M, x)` with an explicit sign tolerance.
pub fn kappa_at(m: &Matrix, x: &Vector, tol: f64) -> Result<KappaValue> {
    check_dims(m, x)?;
    let w = hadamard_mx(m, x);
    let total: f64 = w.iter().sum();
    if total >= -tol {
        return Ok(KappaValue::Finite(0.0));
    }
    let pos: f64 = w.iter().filter(|v| **v > tol).sum();
    if pos <= 0.0 {
        return Ok(KappaValue::Infinite);
    }
    let neg: f64 = w.iter().filter(|v| **v < -tol).sum();
    // -Σ_{I-} w / (4 Σ_{I+} w) - 1/4, guaranteed > 0 here since -neg > pos.
    Ok(KappaValue::Finite((-neg) / (4.0 * pos) - 0.25))
}

/// `κ̂(M, x)` with the default relative tolerance.
pub fn kappa_at_auto(m: &Matrix, x: &Vector) -> Result<KappaValue> {
    kappa_at(m, x, default_sign_tol(m, x))
}

/// Principal pivotal transform `T_J(A)`.
///
/// With rows/columns permuted so `J` comes first,
///
/// ```text
///   T_J(A) = [  A_JJ⁻¹             -A_JJ⁻¹ A_JK          ]
///            [  A_KJ A_JJ⁻¹         A_KK - A_KJ A_JJ⁻¹ A_JK ]
/// ```
///
/// where `K` is the complement of `J`. Satisfies the composition law
/// `T_K(T_J(A)) = T_{JΔK}(A)` and in particular is an involution.
pub fn principal_pivot(a: &Matrix, j_set: &[usize]) -> Result<Matrix> {
    let n = check_square(a)?;
    let mut in_j = vec![false; n];
    for &j in j_set {
        if j >= n {
            return Err(Error::invalid(format!("pivot index {j} out of range for n={n}")));
        }
        if in_j[j] {
            return Err(Error::invalid(format!("duplicate pivot index {j}")));
        }
        in_j[j] = true;
    }
    if j_set.is_empty() {
        return Ok(a.clone());
    }
    let j: Vec<usize> = (0..n).filter(|&i| in_j[i]).collect();
    let k: Vec<usize> = (0..n).filter(|&i| !in_j[i]).collect();
    let ajj = a.select_rows(j.as_slice()).select_columns(j.as_slice());

    // Singularity cliff: |det| < 1e-10 * ‖A_JJ‖^|J| (max-abs entry norm).
    let det = ajj.clone().lu().determinant();
    let norm = ajj.iter().fold(0.0_f64, |acc, v| acc.max(v.abs())).max(1e-300);
    let threshold = 1e-10 * norm.powi(j.len() as i32);
    if det.abs() < threshold {
        return Err(Error::SingularPrincipalSubmatrix {
            index_set: j.clone(),
            det: det.abs(),
            threshold,
        });
    }

    let inv = ajj
        .try_inverse()
        .ok_or_else(|| Error::LinearSolve("principal submatrix inversion failed".into()))?;
    let ajk = a.select_rows(j.as_slice()).select_columns(k.as_slice());
    let akj = a.select_rows(k.as_slice()).select_columns(j.as_slice());
    let akk = a.select_rows(k.as_slice()).select_columns(k.as_slice());

    let tl = inv.clone();
    let tr = -&inv * &ajk;
    let bl = &akj * &inv;
    let br = &akk - &akj * &inv * &ajk;

    let mut t = Matrix::zeros(n, n);
    for (bi, &i) in j.iter().enumerate() {
        for (bj, &jj) in j.iter().enumerate() {
            t[(i, jj)] = tl[(bi, bj)];
        }
        for (bj, &jj) in k.iter().enumerate() {
            t[(i, jj)] = tr[(bi, bj)];
        }
    }
    for (bi, &i) in k.iter().enumerate() {
        for (bj, &jj) in j.iter().enumerate() {
            t[(i, jj)] = bl[(bi, bj)];
        }
        for (bj, &jj) in k.iter().enumerate() {
            t[(i, jj)] = br[(bi, bj)];
        }
    }
    Ok(t)
}

/// Smallest eigenvalue of the symmetric part `(M + M')/2`.
pub fn symmetric_min_eigenvalue(m: &Matrix) -> Result<f64> {
    check_square(m)?;
    let sym = (m + m.transpose()) * 0.5;
    let eig = sym.symmetric_eigenvalues();
    Ok(eig.iter().copied().fold(f64::INFINITY, f64::min))
}

/// True iff the smallest eigenvalue of the symmetric part is `>= -tol`
/// (equivalently `κ̂(M) = 0` up to tolerance).
pub fn symmetric_psd_check(m: &Matrix, tol: f64) -> Result<bool> {
    Ok(symmetric_min_eigenvalue(m)? >= -tol)
}

fn check_positive(d: &Vector, name: &str) -> Result<()> {
    if let Some((i, &v)) = d.iter().enumerate().find(|(_, v)| **v <= 0.0 || !v.is_finite()) {
        return Err(Error::invalid(format!(
            "{name}[{i}] = {v} must be strictly positive and finite"
        )));
    }
    Ok(())
}

/// Row rescaling `diag(d) M`.
pub fn rescale_rows(m: &Matrix, d: &Vector) -> Result<Matrix> {
    let n = check_dims(m, d)?;
    check_positive(d, "d")?;
    let mut out = m.clone();
    for i in 0..n {
        for jj in 0..n {
            out[(i, jj)] *= d[i];
        }
    }
    Ok(out)
}

/// Two-sided rescaling `diag(d') M diag(d)`.
pub fn rescale_both(m: &Matrix, d_left: &Vector, d_right: &Vector) -> Result<Matrix> {
    let n = check_dims(m, d_left)?;
    if d_right.len() != n {
        return Err(Error::dim("right scaling vector length mismatch"));
    }
    check_positive(d_left, "d'")?;
    check_positive(d_right, "d")?;
    let mut out = m.clone();
    for i in 0..n {
        for jj in 0..n {
            out[(i, jj)] *= d_left[i] * d_right[jj];
        }
    }
    Ok(out)
}

/// The Csizmadia matrix `C_n`: unit diagonal, `-1` strictly below, `0` above.
pub fn csizmadia(n: usize) -> Matrix {
    let mut m = Matrix::identity(n, n);
    for i in 0..n {
        for j in 0..i {
            m[(i, j)] = -1.0;
        }
    }
    m
}

/// The 3×3 `α`-family matrix `[[1, α, -1], [-1, 1, α], [α, -1, 1]]`.
pub fn alpha_matrix(alpha: f64) -> Matrix {
    Matrix::from_row_slice(3, 3, &[1.0, alpha, -1.0, -1.0, 1.0, alpha, alpha, -1.0, 1.0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn v(entries: &[f64]) -> Vector {
        Vector::from_row_slice(entries)
    }

    #[test]
    fn sign_partition_identity_positive() {
        let m = Matrix::identity(2, 2);
        let p = sign_partition(&m, &v(&[1.0, 1.0]), 0.0).unwrap();
        assert_eq!(p.plus, vec![0, 1]);
        assert!(p.zero.is_empty() && p.minus.is_empty());
    }

    #[test]
    fn sign_partition_offdiag_negative() {
        let m = Matrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let p = sign_partition(&m, &v(&[1.0, -1.0]), 0.0).unwrap();
        assert_eq!(p.minus, vec![0, 1]);
    }

    #[test]
    fn sign_partition_csizmadia_mixed() {
        let p = sign_partition(&csizmadia(2), &v(&[1.0, 1.0]), 0.0).unwrap();
        assert_eq!(p.plus, vec![0]);
        assert_eq!(p.zero, vec![1]);
    }

    #[test]
    fn sign_partition_dimension_mismatch() {
        let m = Matrix::identity(3, 3);
        assert!(sign_partition(&m, &v(&[1.0, 2.0]), 0.0).is_err());
    }

    #[test]
    fn kappa_zero_on_psd() {
        let m = Matrix::identity(4, 4);
        for xs in [[1.0, -2.0, 0.5, 3.0], [0.1, 0.2, -0.3, -0.4]] {
            assert_eq!(kappa_at_auto(&m, &v(&xs)).unwrap(), KappaValue::Finite(0.0));
        }
    }

    #[test]
    fn kappa_alpha_matrix_witness() {
        // alpha = 11 at x = (1,-1,0): x ∘ Mx = (1-alpha, 2, 0), value (alpha-3)/8 = 1.
        let m = alpha_matrix(11.0);
        let k = kappa_at_auto(&m, &v(&[1.0, -1.0, 0.0])).unwrap();
        assert_relative_eq!(k.value(), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn kappa_infinite_case() {
        let m = Matrix::from_row_slice(2, 2, &[0.0, -1.0, 0.0, 0.0]);
        let k = kappa_at_auto(&m, &v(&[1.0, 1.0])).unwrap();
        assert_eq!(k, KappaValue::Infinite);
    }

    #[test]
    fn kappa_csizmadia_witness_family() {
        // x = (1, 1, 2, 4, ..., 2^(n-3), 2^(n-3)) gives x ∘ (C_n x) =
        // (1, 0, ..., 0, -2^(2n-6)), hence kappa = 2^(2n-8) - 1/4 exactly.
        for n in 4..=10usize {
            let mut x = vec![1.0, 1.0];
            for k in 1..=(n - 3) {
                x.push(2f64.powi(k as i32));
            }
            x.push(x[n - 2]);
            let k = kappa_at_auto(&csizmadia(n), &v(&x)).unwrap();
            let expect = 2f64.powi(2 * n as i32 - 8) - 0.25;
            assert_relative_eq!(k.value(), expect, max_relative = 1e-12);
        }
    }

    #[test]
    fn kappa_scale_invariance() {
        let m = csizmadia(4);
        let x = v(&[0.3, -1.2, 0.7, 2.0]);
        let k1 = kappa_at_auto(&m, &x).unwrap().value();
        for alpha in [2.0, -1.0, 1e-3, 137.0] {
            let k2 = kappa_at_auto(&m, &(x.clone() * alpha)).unwrap().value();
            assert_relative_eq!(k1, k2, max_relative = 1e-10);
        }
    }

    #[test]
    fn pivot_two_by_two_example() {
        let a = Matrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let t = principal_pivot(&a, &[0]).unwrap();
        let expect = Matrix::from_row_slice(2, 2, &[1.0, -2.0, 3.0, -2.0]);
        assert_relative_eq!(t, expect, max_relative = 1e-14);
    }

    #[test]
    fn pivot_empty_set_identity() {
        let a = Matrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(principal_pivot(&a, &[]).unwrap(), a);
    }

    #[test]
    fn pivot_involution() {
        let a = Matrix::from_row_slice(3, 3, &[2.0, 1.0, 0.5, -1.0, 3.0, 0.0, 0.25, -0.5, 1.5]);
        for j in [vec![0], vec![1, 2], vec![0, 1, 2]] {
            let t = principal_pivot(&a, &j).unwrap();
            let back = principal_pivot(&t, &j).unwrap();
            assert_relative_eq!(back, a, max_relative = 1e-10);
        }
    }

    #[test]
    fn pivot_composition_law() {
        let a = Matrix::from_row_slice(3, 3, &[2.0, 1.0, 0.5, -1.0, 3.0, 0.2, 0.25, -0.5, 1.5]);
        // T_{1}(T_{0}(A)) = T_{0Δ1}(A) = T_{0,1}(A)
        let t0 = principal_pivot(&a, &[0]).unwrap();
        let t01 = principal_pivot(&t0, &[1]).unwrap();
        let direct = principal_pivot(&a, &[0, 1]).unwrap();
        assert_relative_eq!(t01, direct, max_relative = 1e-10);
    }

    #[test]
    fn pivot_singular_submatrix_rejected() {
        let a = Matrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let err = principal_pivot(&a, &[0]).unwrap_err();
        assert!(matches!(err, Error::SingularPrincipalSubmatrix { .. }));
    }

    #[test]
    fn psd_checks() {
        assert!(symmetric_psd_check(&Matrix::identity(5, 5), 0.0).unwrap());
        let flip = Matrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert!(!symmetric_psd_check(&flip, 1e-9).unwrap());
        // C_n for n <= 3 has PSD symmetric part; from n = 4 it does not.
        for n in 1..=3 {
            assert!(symmetric_psd_check(&csizmadia(n), 1e-10).unwrap());
        }
        for n in 4..=8 {
            assert!(!symmetric_psd_check(&csizmadia(n), 1e-10).unwrap());
        }
    }

    #[test]
    fn rescaled_csizmadia_entries_and_psd() {
        // diag(1, 1/2, 1/4) C_3 diag(1, 2, 4): strictly-lower entry (i,j)
        // becomes -2^(j-i); sub-diagonals -1/2 and second sub-diagonal -1/4.
        let dl = v(&[1.0, 0.5, 0.25]);
        let dr = v(&[1.0, 2.0, 4.0]);
        let m = rescale_both(&csizmadia(3), &dl, &dr).unwrap();
        assert_relative_eq!(m[(1, 0)], -0.5);
        assert_relative_eq!(m[(2, 1)], -0.5);
        assert_relative_eq!(m[(2, 0)], -0.25);
        for n in 2..=10usize {
            let dl = Vector::from_iterator(n, (0..n).map(|i| 0.5f64.powi(i as i32)));
            let dr = Vector::from_iterator(n, (0..n).map(|i| 2f64.powi(i as i32)));
            let r = rescale_both(&csizmadia(n), &dl, &dr).unwrap();
            assert!(symmetric_psd_check(&r, 1e-10).unwrap(), "n = {n}");
        }
    }

    #[test]
    fn rescale_rejects_nonpositive() {
        let m = Matrix::identity(2, 2);
        assert!(rescale_rows(&m, &v(&[1.0, 0.0])).is_err());
        assert!(rescale_rows(&m, &v(&[1.0, -2.0])).is_err());
    }

    #[test]
    fn unit_rescale_is_identity() {
        let m = csizmadia(3);
        let d = v(&[1.0, 1.0, 1.0]);
        assert_eq!(rescale_rows(&m, &d).unwrap(), m);
        assert_eq!(rescale_both(&m, &d, &d).unwrap(), m);
    }

    #[test]
    fn dmd_invariance_spot() {
        // kappa_at(DMD, D^{-1} x) = kappa_at(M, x).
        let m = csizmadia(5);
        let x = v(&[0.4, -0.9, 1.3, 0.2, -2.0]);
        let d = v(&[0.5, 2.0, 1.5, 0.25, 3.0]);
        let dmd = rescale_both(&m, &d, &d).unwrap();
        let dx = Vector::from_iterator(5, (0..5).map(|i| x[i] / d[i]));
        let k1 = kappa_at_auto(&m, &x).unwrap().value();
        let k2 = kappa_at_auto(&dmd, &dx).unwrap().value();
        assert_relative_eq!(k1, k2, max_relative = 1e-10);
    }
}
