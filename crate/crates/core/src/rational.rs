//! Exact rational arithmetic: decimal-string parsing and exact linear solves.
//!
//! Instance files carry numbers as decimal strings so they can be read
//! without rounding. This module converts those strings to `BigRational`,
//! provides exact Gaussian elimination for the small dense systems used by
//! the exact class verifiers, and converts back to `f64` at the boundary.

use num::bigint::BigInt;
use num::{One, Signed, Zero};

pub use num::rational::BigRational;

use crate::{Error, Result};

/// Parse a decimal string (optionally signed, optional fractional part,
/// optional exponent, or a plain `p/q` fraction) into an exact rational.
pub fn parse_decimal(s: &str) -> Result<BigRational> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::Parse("empty number".into()));
    }
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad fraction numerator in {s:?}")))?;
        let d: BigInt = den
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad fraction denominator in {s:?}")))?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(BigRational::new(n, d));
    }

    let (mantissa, exp) = match s.split_once(['e', 'E']) {
        Some((m, e)) => {
            let exp: i64 = e
                .parse()
                .map_err(|_| Error::Parse(format!("bad exponent in {s:?}")))?;
            (m, exp)
        }
        None => (s, 0),
    };

    let (sign, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (-1, rest),
        None => (1, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((i, f)) => (i, f),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(Error::Parse(format!("no digits in {s:?}")));
    }
    if !int_part.chars().all(|c| c.is_ascii_digit())
        || !frac_part.chars().all(|c| c.is_ascii_digit())
    {
        return Err(Error::Parse(format!("invalid digits in {s:?}")));
    }

    let joined = format!("{int_part}{frac_part}");
    let mut numer: BigInt = if joined.is_empty() {
        BigInt::zero()
    } else {
        joined
            .parse()
            .map_err(|_| Error::Parse(format!("invalid digits in {s:?}")))?
    };
    if sign < 0 {
        numer = -numer;
    }

    let shift = exp - frac_part.len() as i64;
    let ten = BigInt::from(10);
    let rational = if shift >= 0 {
        BigRational::from_integer(numer * ten.pow(shift as u32))
    } else {
        BigRational::new(numer, ten.pow((-shift) as u32))
    };
    Ok(rational)
}

/// Render a rational exactly: as a plain decimal when the denominator is of
/// the form 2^a 5^b, otherwise as `p/q`.
pub fn format_exact(r: &BigRational) -> String {
    let r = r.reduced();
    let mut den = r.denom().clone();
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    let mut twos = 0u32;
    let mut fives = 0u32;
    while (&den % &two).is_zero() {
        den /= &two;
        twos += 1;
    }
    while (&den % &five).is_zero() {
        den /= &five;
        fives += 1;
    }
    if !den.is_one() {
        return format!("{}/{}", r.numer(), r.denom());
    }
    // Scale so the denominator becomes 10^k with k = max(twos, fives).
    let k = twos.max(fives);
    let scale = two.pow(k - twos.min(k)) * five.pow(k - fives.min(k));
    let scaled = (r.numer() * scale).to_string();
    if k == 0 {
        return scaled;
    }
    let (sign, digits) = match scaled.strip_prefix('-') {
        Some(d) => ("-", d.to_string()),
        None => ("", scaled),
    };
    let digits = if digits.len() <= k as usize {
        format!("{}{}", "0".repeat(k as usize + 1 - digits.len()), digits)
    } else {
        digits
    };
    let split = digits.len() - k as usize;
    let frac = digits[split..].trim_end_matches('0');
    if frac.is_empty() {
        format!("{sign}{}", &digits[..split])
    } else {
        format!("{sign}{}.{frac}", &digits[..split])
    }
}

/// Exact conversion of an `f64` (must be finite).
pub fn from_f64_exact(v: f64) -> Result<BigRational> {
    BigRational::from_float(v).ok_or_else(|| Error::invalid(format!("non-finite value {v}")))
}

/// Round a rational to the nearest `f64`.
pub fn to_f64(r: &BigRational) -> f64 {
    use num::ToPrimitive;
    r.to_f64().unwrap_or_else(|| {
        // Fall back on a scaled division for extreme magnitudes.
        let n = r.numer();
        let d = r.denom();
        let nf = format!("{n}").parse::<f64>().unwrap_or(f64::NAN);
        let df = format!("{d}").parse::<f64>().unwrap_or(f64::NAN);
        nf / df
    })
}

/// Dense rational matrix stored row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatMatrix {
    pub nrows: usize,
    pub ncols: usize,
    pub data: Vec<BigRational>,
}

impl RatMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        RatMatrix {
            nrows,
            ncols,
            data: vec![BigRational::zero(); nrows * ncols],
        }
    }

    pub fn from_f64(m: &crate::Matrix) -> Result<Self> {
        let mut out = RatMatrix::zeros(m.nrows(), m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                *out.at_mut(i, j) = from_f64_exact(m[(i, j)])?;
            }
        }
        Ok(out)
    }

    pub fn at(&self, i: usize, j: usize) -> &BigRational {
        &self.data[i * self.ncols + j]
    }

    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut BigRational {
        &mut self.data[i * self.ncols + j]
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, x: &[BigRational]) -> Vec<BigRational> {
        assert_eq!(x.len(), self.ncols);
        (0..self.nrows)
            .map(|i| {
                let mut acc = BigRational::zero();
                for j in 0..self.ncols {
                    if !x[j].is_zero() && !self.at(i, j).is_zero() {
                        acc += self.at(i, j) * &x[j];
                    }
                }
                acc
            })
            .collect()
    }
}

/// Exact solve of a square system `A y = b` by fraction-full Gaussian
/// elimination with partial (magnitude) pivoting. Returns `None` when `A`
/// is exactly singular.
pub fn solve_exact(a: &RatMatrix, b: &[BigRational]) -> Option<Vec<BigRational>> {
    let n = a.nrows;
    assert_eq!(a.ncols, n);
    assert_eq!(b.len(), n);
    let mut m = a.clone();
    let mut rhs = b.to_vec();
    let mut perm: Vec<usize> = (0..n).collect();

    for col in 0..n {
        // Pick the largest-magnitude pivot to keep intermediate fractions tame.
        let pivot_row = (col..n)
            .filter(|&r| !m.at(r, col).is_zero())
            .max_by(|&r1, &r2| {
                m.at(r1, col)
                    .abs()
                    .partial_cmp(&m.at(r2, col).abs())
                    .unwrap()
            })?;
        if pivot_row != col {
            for j in 0..n {
                let tmp = m.at(col, j).clone();
                *m.at_mut(col, j) = m.at(pivot_row, j).clone();
                *m.at_mut(pivot_row, j) = tmp;
            }
            rhs.swap(col, pivot_row);
            perm.swap(col, pivot_row);
        }
        let pivot = m.at(col, col).clone();
        for r in (col + 1)..n {
            if m.at(r, col).is_zero() {
                continue;
            }
            let factor = m.at(r, col) / &pivot;
            for j in col..n {
                let delta = &factor * m.at(col, j);
                *m.at_mut(r, j) -= delta;
            }
            let delta = &factor * &rhs[col];
            rhs[r] -= delta;
        }
    }

    // Back substitution.
    let mut y = vec![BigRational::zero(); n];
    for row in (0..n).rev() {
        let mut acc = rhs[row].clone();
        for j in (row + 1)..n {
            if !m.at(row, j).is_zero() && !y[j].is_zero() {
                acc -= m.at(row, j) * &y[j];
            }
        }
        y[row] = acc / m.at(row, row);
    }
    Some(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn parse_plain_and_signed() {
        assert_eq!(parse_decimal("3").unwrap(), r(3, 1));
        assert_eq!(parse_decimal("-14").unwrap(), r(-14, 1));
        assert_eq!(parse_decimal("+2.5").unwrap(), r(5, 2));
        assert_eq!(parse_decimal("-0.125").unwrap(), r(-1, 8));
        assert_eq!(parse_decimal("0.1").unwrap(), r(1, 10));
    }

    #[test]
    fn parse_exponents_and_fractions() {
        assert_eq!(parse_decimal("1e3").unwrap(), r(1000, 1));
        assert_eq!(parse_decimal("2.5e-2").unwrap(), r(1, 40));
        assert_eq!(parse_decimal("-1.5E2").unwrap(), r(-150, 1));
        assert_eq!(parse_decimal("3/4").unwrap(), r(3, 4));
        assert_eq!(parse_decimal("-7/2").unwrap(), r(-7, 2));
    }

    #[test]
    fn parse_rejects_garbage() {
        for bad in ["", "abc", "1.2.3", "1/0", "--3", "1e", "."] {
            assert!(parse_decimal(bad).is_err(), "{bad:?} should fail");
        }
    }

    #[test]
    fn format_round_trips() {
        for s in ["0", "3", "-14", "2.5", "-0.125", "0.1", "1000"] {
            let v = parse_decimal(s).unwrap();
            assert_eq!(parse_decimal(&format_exact(&v)).unwrap(), v);
        }
        assert_eq!(format_exact(&r(1, 3)), "1/3");
        assert_eq!(format_exact(&r(-1, 8)), "-0.125");
        assert_eq!(format_exact(&r(5, 2)), "2.5");
        assert_eq!(format_exact(&r(0, 1)), "0");
    }

    #[test]
    fn f64_round_trip_on_dyadics() {
        for v in [0.5, -0.25, 3.0, 1.0 / 1024.0, -17.75] {
            let q = from_f64_exact(v).unwrap();
            assert_eq!(to_f64(&q), v);
        }
    }

    #[test]
    fn exact_solve_small_system() {
        // [[2, 1], [1, 3]] y = [5, 10] ⟹ y = (1, 3)
        let mut a = RatMatrix::zeros(2, 2);
        *a.at_mut(0, 0) = r(2, 1);
        *a.at_mut(0, 1) = r(1, 1);
        *a.at_mut(1, 0) = r(1, 1);
        *a.at_mut(1, 1) = r(3, 1);
        let b = vec![r(5, 1), r(10, 1)];
        let y = solve_exact(&a, &b).unwrap();
        assert_eq!(y, vec![r(1, 1), r(3, 1)]);
    }

    #[test]
    fn exact_solve_detects_singular() {
        let mut a = RatMatrix::zeros(2, 2);
        *a.at_mut(0, 0) = r(1, 1);
        *a.at_mut(0, 1) = r(2, 1);
        *a.at_mut(1, 0) = r(2, 1);
        *a.at_mut(1, 1) = r(4, 1);
        // Rank-deficient ⟹ None for any right-hand side.
        assert!(solve_exact(&a, &[r(1, 1), r(2, 1)]).is_none());
        assert!(solve_exact(&a, &[r(1, 1), r(3, 1)]).is_none());
    }

    #[test]
    fn exact_solve_needs_row_swap() {
        let mut a = RatMatrix::zeros(2, 2);
        *a.at_mut(0, 1) = r(1, 1);
        *a.at_mut(1, 0) = r(1, 1);
        let y = solve_exact(&a, &[r(7, 1), r(9, 1)]).unwrap();
        assert_eq!(y, vec![r(9, 1), r(7, 1)]);
    }
}
