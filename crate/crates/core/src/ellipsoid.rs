//! Central-cut ellipsoid engine with box clipping.
//!
//! An ellipsoid is stored as `E(B,d) = {x : (x−d)ᵀB(x−d) ≤ 1}` with `B`
//! symmetric positive definite, so `vol(E) = V_n/√det(B)`. A central cut
//! with direction `c` replaces `E` by the minimum-volume ellipsoid
//! containing `E ∩ {x : ⟨c,x⟩ ≥ ⟨c,d⟩}`:
//!
//!   b̃ = B⁻¹c,  γ = cᵀb̃,
//!   d′ = d + b̃ / ((n+1)√γ),
//!   B′ = (n²−1)/n² · (B + 2/((n−1)γ) · ccᵀ),
//!
//! which shrinks volume by the factor (n/√(n²−1))^{n−1}·(n/(n+1)) ≤ e^{−1/(2n)}.
//!
//! Conventions: an initial ball of radius `R` uses `B = I/R²` (so that
//! `E = {‖x−d‖ ≤ R}`), and "volume below a ball of radius r" is the test
//! `det(B) ≥ (1/r²)ⁿ` — both stated here explicitly because the shape
//! matrix enters inverted and the two directions are easy to mix up.
//!
//! Optional fixed-point rounding of `B` and `d` (to `round_bits` binary
//! digits) keeps encoding lengths bounded; with rounding on, the guaranteed
//! per-cut factor relaxes to e^{−1/(5n)}.

use std::f64::consts::PI;

use crate::{Error, Matrix, Result, Vector};

/// Ellipsoid `E(B,d) = {x : (x−d)ᵀB(x−d) ≤ 1}`.
#[derive(Debug, Clone)]
pub struct Ellipsoid {
    b: Matrix,
    d: Vector,
    /// Binary digits kept after each update; `None` disables rounding.
    pub round_bits: Option<u32>,
}

/// Volume of the unit ball in dimension `n` (V₀=1, V₁=2, V_n = 2π V_{n−2}/n).
pub fn unit_ball_volume(n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * PI * unit_ball_volume(n - 2) / n as f64,
    }
}

fn cholesky_of(b: &Matrix) -> Result<nalgebra::Cholesky<f64, nalgebra::Dyn>> {
    b.clone()
        .cholesky()
        .ok_or_else(|| Error::NotPositiveDefinite("shape matrix is not positive definite".into()))
}

impl Ellipsoid {
    /// Build from a shape matrix and center; `b` is symmetrized and must be
    /// positive definite.
    pub fn new(b: Matrix, d: Vector) -> Result<Self> {
        if b.nrows() != b.ncols() || b.nrows() != d.len() {
            return Err(Error::dim("ellipsoid shape/center dimension mismatch"));
        }
        let b = (&b + b.transpose()) * 0.5;
        cholesky_of(&b)?;
        Ok(Ellipsoid {
            b,
            d,
            round_bits: None,
        })
    }

    /// Ball of radius `r` centered at `d`: `B = I/r²`.
    pub fn ball(d: Vector, r: f64) -> Result<Self> {
        if r <= 0.0 || r.is_nan() {
            return Err(Error::invalid("ball radius must be positive"));
        }
        let n = d.len();
        Ellipsoid::new(Matrix::identity(n, n) / (r * r), d)
    }

    pub fn dim(&self) -> usize {
        self.d.len()
    }

    pub fn shape(&self) -> &Matrix {
        &self.b
    }

    pub fn center(&self) -> &Vector {
        &self.d
    }

    /// Determinant of the shape matrix (positive for a valid ellipsoid).
    pub fn det_shape(&self) -> Result<f64> {
        let chol = cholesky_of(&self.b)?;
        let mut det = 1.0;
        for i in 0..self.dim() {
            let l = chol.l_dirty()[(i, i)];
            det *= l * l;
        }
        Ok(det)
    }

    /// `vol(E) = V_n / √det(B)`.
    pub fn volume(&self) -> Result<f64> {
        Ok(unit_ball_volume(self.dim()) / self.det_shape()?.sqrt())
    }

    /// Membership test with slack `tol` on the quadratic form.
    pub fn contains(&self, x: &Vector, tol: f64) -> bool {
        let diff = x - &self.d;
        let val = (&self.b * &diff).dot(&diff);
        val <= 1.0 + tol
    }

    /// Central cut keeping the halfspace `⟨c,x⟩ ≥ ⟨c,center⟩`.
    pub fn central_cut(&self, c: &Vector) -> Result<Ellipsoid> {
        let n = self.dim();
        if n < 2 {
            return Err(Error::invalid("central cut needs dimension ≥ 2"));
        }
        if c.len() != n {
            return Err(Error::dim("cut vector dimension mismatch"));
        }
        if c.amax() == 0.0 {
            return Err(Error::invalid("cut vector must be nonzero"));
        }
        let chol = cholesky_of(&self.b)?;
        let b_inv_c = chol.solve(c);
        let gamma = c.dot(&b_inv_c);
        if gamma <= 0.0 || !gamma.is_finite() {
            return Err(Error::NotPositiveDefinite(
                "cut direction has nonpositive B-norm".into(),
            ));
        }
        let nf = n as f64;
        let mut d_new = &self.d + &b_inv_c / ((nf + 1.0) * gamma.sqrt());
        let mut b_new = (&self.b + c * c.transpose() * (2.0 / ((nf - 1.0) * gamma)))
            * ((nf * nf - 1.0) / (nf * nf));
        b_new = (&b_new + b_new.transpose()) * 0.5;
        if let Some(bits) = self.round_bits {
            round_in_place(&mut b_new, bits);
            for v in d_new.iter_mut() {
                *v = round_to_bits(*v, bits);
            }
        }
        cholesky_of(&b_new)?;
        Ok(Ellipsoid {
            b: b_new,
            d: d_new,
            round_bits: self.round_bits,
        })
    }

    /// Repeated axis cuts until the center lies in `[lo,hi]ⁿ`.
    ///
    /// A center coordinate below `lo` is pushed up by cutting with `+eⁱ`
    /// (keeping `x_i ≥ d_i`); one above `hi` is pushed down with `−eⁱ`.
    /// The cut budget is the number of central cuts that would shrink the
    /// volume to a ball of radius 2⁻²⁰ — if the center still cannot re-enter
    /// the box, the ellipsoid–box intersection has numerically collapsed.
    pub fn clip_to_box(&self, lo: f64, hi: f64) -> Result<Ellipsoid> {
        if lo.partial_cmp(&hi) != Some(std::cmp::Ordering::Less) {
            return Err(Error::invalid("clip_to_box requires lo < hi"));
        }
        let n = self.dim();
        let vol = self.volume()?;
        let vol_floor = unit_ball_volume(n) * (2.0_f64).powi(-20 * n as i32);
        let cap = if vol > vol_floor {
            (2.0 * n as f64 * (vol / vol_floor).ln()).ceil() as usize + 16 * n
        } else {
            16 * n
        };
        let mut e = self.clone();
        let mut cuts = 0usize;
        loop {
            let mut cut_dir: Option<Vector> = None;
            for i in 0..n {
                if e.d[i] < lo {
                    let mut c = Vector::zeros(n);
                    c[i] = 1.0;
                    cut_dir = Some(c);
                    break;
                }
                if e.d[i] > hi {
                    let mut c = Vector::zeros(n);
                    c[i] = -1.0;
                    cut_dir = Some(c);
                    break;
                }
            }
            let Some(c) = cut_dir else {
                return Ok(e);
            };
            if cuts >= cap {
                return Err(Error::EllipsoidCollapsed { cap });
            }
            e = e.central_cut(&c)?;
            cuts += 1;
        }
    }
}

fn round_to_bits(x: f64, bits: u32) -> f64 {
    let scale = (2.0_f64).powi(bits.min(1000) as i32);
    (x * scale).round() / scale
}

fn round_in_place(m: &mut Matrix, bits: u32) {
    for v in m.iter_mut() {
        *v = round_to_bits(*v, bits);
    }
}
