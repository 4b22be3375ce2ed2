//! Matrix-class verifiers (P, column/row sufficient, sign conditions, the
//! two-vector condition) and handicap lower-bound search.
//!
//! Column sufficiency — `x∘(Mx) ≤ 0` implies `x∘(Mx) = 0` — is decided
//! exactly for `n ≤ 6` by an orthant scan: fix the support `S` and sign
//! pattern `σ` of a hypothetical violator, substitute `x = Dy` with
//! `D = diag(σ)`, `y > 0` on `S`. Since `y` is strictly positive,
//! `y∘(Ny) ≤ 0` for `N = (DMD)|_S` is equivalent to the *linear* system
//! `Ny ≤ 0`, so violators on the orthant exist iff the polytope
//! `K = {y ∈ σ_s : Ny ≤ 0}` contains a strictly positive point with
//! `Ny ≠ 0`. Both properties are decided from K's vertex set (averaging
//! vertices preserves them), enumerated in exact rational arithmetic.
//!
//! The handicap lower-bound search combines an exhaustive scan of basic
//! feasible solutions of the sign-pattern polytopes (pairs maximized along
//! segments via `kappa_pair_max`) with derivative-free multistart ascent.

use num::rational::BigRational;
use num::{Signed, Zero};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::numerics::{default_sign_tol, hadamard_mx, inf_norm, kappa_at_auto, KappaValue};
use crate::polytope::{enumerate_vertices, enumerate_vertices_exact, QPolytope};
use crate::rational::to_f64;
use crate::{Error, Matrix, Result, Vector};

/// Dimension cap for the exact P-matrix test (2ⁿ minors).
pub const P_MATRIX_CAP: usize = 20;
/// Dimension cap for the exact sufficiency decision.
pub const SUFFICIENT_EXACT_CAP: usize = 6;
/// Dimension cap for BFS-pair handicap search.
pub const BFS_PAIRS_CAP: usize = 8;

/// Three-valued verdict with an independently checkable witness on `No`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassVerdict {
    pub verdict: Verdict,
    pub witness: Option<ClassWitness>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Yes,
    No,
    Unknown,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ClassWitness {
    /// A vector `x` violating the class property.
    Point(Vector),
    /// A pair `(u, v)` violating a two-vector property.
    Pair(Vector, Vector),
    /// An index set (e.g. of a nonpositive principal minor, or an entry
    /// pair breaking a sign condition).
    IndexSet(Vec<usize>),
}

impl ClassVerdict {
    fn yes() -> Self {
        ClassVerdict {
            verdict: Verdict::Yes,
            witness: None,
        }
    }

    fn no(witness: ClassWitness) -> Self {
        ClassVerdict {
            verdict: Verdict::No,
            witness: Some(witness),
        }
    }

    fn unknown() -> Self {
        ClassVerdict {
            verdict: Verdict::Unknown,
            witness: None,
        }
    }

    pub fn is_yes(&self) -> bool {
        self.verdict == Verdict::Yes
    }

    pub fn is_no(&self) -> bool {
        self.verdict == Verdict::No
    }
}

fn check_square(m: &Matrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::dim("expected a square matrix"));
    }
    Ok(m.nrows())
}

/// Exact P-matrix test: every principal minor strictly positive.
pub fn is_p_matrix(m: &Matrix) -> Result<ClassVerdict> {
    let n = check_square(m)?;
    if n > P_MATRIX_CAP {
        return Err(Error::PivotCap { cap: P_MATRIX_CAP });
    }
    for mask in 1u32..(1u32 << n) {
        let idx: Vec<usize> = (0..n).filter(|i| (mask >> i) & 1 == 1).collect();
        let sub = m.select_rows(idx.as_slice()).select_columns(idx.as_slice());
        let max_abs = sub.iter().fold(0.0_f64, |a, v| a.max(v.abs())).max(1e-300);
        let tol = 1e-10 * max_abs.powi(idx.len() as i32);
        let det = sub.lu().determinant();
        if det <= tol {
            return Ok(ClassVerdict::no(ClassWitness::IndexSet(idx)));
        }
    }
    Ok(ClassVerdict::yes())
}

/// Entry-level zero tolerance for sign-pattern reasoning.
fn entry_tol(m: &Matrix) -> f64 {
    1e-12 * (1.0 + inf_norm(m))
}

/// Necessary sign conditions for sufficiency: nonnegative diagonal; for
/// each `i` with `M_ii = 0` and each `j`: `M_ij·M_ji ≤ 0`, and `M_ij`,
/// `M_ji` are either both zero or both nonzero. `No` means not sufficient.
pub fn sign_pattern_check(m: &Matrix) -> Result<ClassVerdict> {
    let n = check_square(m)?;
    let tol = entry_tol(m);
    for i in 0..n {
        if m[(i, i)] < -tol {
            return Ok(ClassVerdict::no(ClassWitness::IndexSet(vec![i])));
        }
    }
    for i in 0..n {
        if m[(i, i)].abs() > tol {
            continue;
        }
        for j in 0..n {
            if j == i {
                continue;
            }
            let a = m[(i, j)];
            let b = m[(j, i)];
            if a * b > tol * tol {
                return Ok(ClassVerdict::no(ClassWitness::IndexSet(vec![i, j])));
            }
            let a_zero = a.abs() <= tol;
            let b_zero = b.abs() <= tol;
            if a_zero != b_zero {
                return Ok(ClassVerdict::no(ClassWitness::IndexSet(vec![i, j])));
            }
        }
    }
    Ok(ClassVerdict::yes())
}

/// Quick column-sufficiency refutations from the sign conditions, with a
/// float-verified violating vector.
fn column_sign_witness(m: &Matrix) -> Option<Vector> {
    let n = m.nrows();
    let tol = entry_tol(m);
    let verify = |x: &Vector| -> bool {
        let w = hadamard_mx(m, x);
        let t = default_sign_tol(m, x);
        w.iter().all(|v| *v <= t) && w.iter().any(|v| *v < -t)
    };
    for i in 0..n {
        if m[(i, i)] < -tol {
            let mut x = Vector::zeros(n);
            x[i] = 1.0;
            if verify(&x) {
                return Some(x);
            }
        }
    }
    for i in 0..n {
        if m[(i, i)].abs() > tol {
            continue;
        }
        for j in 0..n {
            if j == i {
                continue;
            }
            let a = m[(i, j)];
            let b = m[(j, i)];
            // x = e_i - ε·sgn(a) e_j drives both w_i and w_j negative when
            // a·b > 0; with a = 0 ≠ b the sign of b works instead.
            let sigma = if a * b > tol * tol {
                a.signum()
            } else if a.abs() <= tol && b.abs() > tol {
                b.signum()
            } else {
                continue;
            };
            let eps = (b.abs() / (2.0 * (m[(j, j)].abs() + 1.0))).clamp(1e-6, 1.0);
            let mut x = Vector::zeros(n);
            x[i] = 1.0;
            x[j] = -eps * sigma;
            if verify(&x) {
                return Some(x);
            }
        }
    }
    None
}

/// Exact column-sufficiency decision for one orthant `(S, σ)`:
/// returns an exact violating `y > 0` on `S` if one exists.
fn orthant_violation(m: &Matrix, support: &[usize], sigma: &[f64]) -> Result<Option<Vector>> {
    let s = support.len();
    let mut nmat = Matrix::zeros(s, s);
    for (r, &i) in support.iter().enumerate() {
        for (c, &j) in support.iter().enumerate() {
            nmat[(r, c)] = sigma[r] * sigma[c] * m[(i, j)];
        }
    }
    let q = QPolytope::new(nmat, Vec::new(), (0..s).collect())?;
    let verts = enumerate_vertices_exact(&q)?;
    if verts.is_empty() {
        return Ok(None);
    }
    // Strict positivity of some convex combination requires, per coordinate,
    // a vertex positive there; strict image negativity requires one strict
    // vertex. The uniform average then realizes both simultaneously.
    let coord_ok = (0..s).all(|i| verts.iter().any(|v| v.v[i].is_positive()));
    let image_strict = verts
        .iter()
        .any(|v| v.image.iter().any(|g| g.is_negative()));
    if !(coord_ok && image_strict) {
        return Ok(None);
    }
    let count = BigRational::from_integer((verts.len() as i64).into());
    let mut avg = vec![BigRational::zero(); s];
    for v in &verts {
        for i in 0..s {
            avg[i] += &v.v[i];
        }
    }
    for a in avg.iter_mut() {
        *a /= &count;
    }
    let n = m.nrows();
    let mut x = Vector::zeros(n);
    for (r, &i) in support.iter().enumerate() {
        x[i] = sigma[r] * to_f64(&avg[r]);
    }
    Ok(Some(x))
}

/// Column sufficiency: exact orthant-scan decision for `n ≤ 6`; above the
/// cap, sign-condition refutation plus sampling (`Unknown` if no violation
/// is found).
pub fn is_column_sufficient(m: &Matrix) -> Result<ClassVerdict> {
    let n = check_square(m)?;
    if n == 0 {
        return Ok(ClassVerdict::yes());
    }
    if let Some(x) = column_sign_witness(m) {
        return Ok(ClassVerdict::no(ClassWitness::Point(x)));
    }
    if n > SUFFICIENT_EXACT_CAP {
        return sampled_column_check(m);
    }

    for mask in 1u32..(1u32 << n) {
        let support: Vec<usize> = (0..n).filter(|i| (mask >> i) & 1 == 1).collect();
        let s = support.len();
        // σ and -σ give the same conjugated matrix: fix the first sign.
        for smask in 0u32..(1u32 << (s.saturating_sub(1))) {
            let sigma: Vec<f64> = (0..s)
                .map(|k| {
                    if k > 0 && (smask >> (k - 1)) & 1 == 1 {
                        -1.0
                    } else {
                        1.0
                    }
                })
                .collect();
            if let Some(x) = orthant_violation(m, &support, &sigma)? {
                return Ok(ClassVerdict::no(ClassWitness::Point(x)));
            }
        }
    }
    Ok(ClassVerdict::yes())
}

/// Sampling fallback above the exact cap: refute or report `Unknown`.
fn sampled_column_check(m: &Matrix) -> Result<ClassVerdict> {
    let n = m.nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_c0de);
    let check = |x: &Vector| -> bool {
        let w = hadamard_mx(m, x);
        let t = default_sign_tol(m, x);
        w.iter().all(|v| *v <= t) && w.iter().any(|v| *v < -t)
    };
    // Structured pairs first, then random directions.
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            for (si, sj) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                for scale in [0.1, 1.0, 10.0] {
                    let mut x = Vector::zeros(n);
                    x[i] = si;
                    x[j] = sj * scale;
                    if check(&x) {
                        return Ok(ClassVerdict::no(ClassWitness::Point(x)));
                    }
                }
            }
        }
    }
    for _ in 0..4000 {
        let x = Vector::from_iterator(n, (0..n).map(|_| rng.random_range(-1.0..1.0)));
        if x.amax() < 1e-9 {
            continue;
        }
        if check(&x) {
            return Ok(ClassVerdict::no(ClassWitness::Point(x)));
        }
    }
    Ok(ClassVerdict::unknown())
}

/// Row sufficiency: `M` is row sufficient iff `M'` is column sufficient.
/// A `No` witness is a violator for the transposed matrix.
pub fn is_row_sufficient(m: &Matrix) -> Result<ClassVerdict> {
    is_column_sufficient(&m.transpose())
}

/// Combined verdict: sufficient iff both row and column sufficient.
pub fn is_sufficient(m: &Matrix) -> Result<ClassVerdict> {
    let col = is_column_sufficient(m)?;
    if col.is_no() {
        return Ok(col);
    }
    let row = is_row_sufficient(m)?;
    if row.is_no() {
        return Ok(row);
    }
    if col.is_yes() && row.is_yes() {
        Ok(ClassVerdict::yes())
    } else {
        Ok(ClassVerdict::unknown())
    }
}

/// Evaluation of the two-vector condition
/// `v∘(Mv) ≤ 0 ∧ u∘(Mv) + v∘(Mu) ≤ 0 ⟹ v∘(Mv) + u∘(Mv) + v∘(Mu) = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConditionC {
    pub premises_hold: bool,
    pub conclusion_holds: bool,
}

/// Check the two-vector condition at tolerance `tol` (componentwise for the
/// premises, max-norm for the conclusion).
pub fn check_condition_c(m: &Matrix, u: &Vector, v: &Vector, tol: f64) -> Result<ConditionC> {
    let n = check_square(m)?;
    if u.len() != n || v.len() != n {
        return Err(Error::dim("check_condition_c: dimension mismatch"));
    }
    let mv = m * v;
    let mu = m * u;
    let vmv = v.component_mul(&mv);
    let cross = u.component_mul(&mv) + v.component_mul(&mu);
    let premises_hold =
        vmv.iter().all(|x| *x <= tol) && cross.iter().all(|x| *x <= tol);
    let total = &vmv + &cross;
    let conclusion_holds = total.amax() <= tol;
    Ok(ConditionC {
        premises_hold,
        conclusion_holds,
    })
}

/// Roots of `aλ² + bλ + c` within `(lo, hi)`.
fn quad_roots_in(a: f64, b: f64, c: f64, lo: f64, hi: f64, out: &mut Vec<f64>) {
    let scale = a.abs().max(b.abs()).max(c.abs());
    if scale == 0.0 {
        return;
    }
    let tiny = 1e-14 * scale;
    if a.abs() <= tiny {
        if b.abs() > tiny {
            let r = -c / b;
            if r > lo && r < hi {
                out.push(r);
            }
        }
        return;
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return;
    }
    let sq = disc.sqrt();
    // Numerically stable pairing.
    let q = -0.5 * (b + b.signum() * sq);
    let cands = if q != 0.0 { [q / a, c / q] } else { [0.0, 0.0] };
    for r in cands {
        if r.is_finite() && r > lo && r < hi {
            out.push(r);
        }
    }
}

/// Maximize `κ̂(M, u + λv)` over `λ ∈ [0,1]`.
///
/// Each `g_i(λ) = (u+λv)_i (M(u+λv))_i` is a quadratic; between sign
/// breakpoints the objective is a ratio of two quadratics, so candidate
/// maximizers are: the endpoints, every breakpoint, each subinterval's
/// midpoint (which also catches intervals where the value is `+∞`), and the
/// stationary points of the ratio (a quadratic equation, the cubic terms of
/// `N'D - ND'` cancel).
pub fn kappa_pair_max(m: &Matrix, u: &Vector, v: &Vector) -> Result<(f64, KappaValue)> {
    let n = check_square(m)?;
    if u.len() != n || v.len() != n {
        return Err(Error::dim("kappa_pair_max: dimension mismatch"));
    }
    let mu_v = m * u;
    let mv_v = m * v;
    // g_i(λ) = c_i + b_i λ + a_i λ².
    let a: Vec<f64> = (0..n).map(|i| v[i] * mv_v[i]).collect();
    let b: Vec<f64> = (0..n).map(|i| u[i] * mv_v[i] + v[i] * mu_v[i]).collect();
    let c: Vec<f64> = (0..n).map(|i| u[i] * mu_v[i]).collect();

    let mut lambdas: Vec<f64> = vec![0.0, 1.0];
    for i in 0..n {
        quad_roots_in(a[i], b[i], c[i], 0.0, 1.0, &mut lambdas);
    }
    lambdas.sort_by(|x, y| x.partial_cmp(y).unwrap());
    lambdas.dedup_by(|x, y| (*x - *y).abs() < 1e-13);

    let mut candidates = lambdas.clone();
    let eval_scale: f64 = (0..n)
        .map(|i| a[i].abs() + b[i].abs() + c[i].abs())
        .sum::<f64>()
        .max(1e-300);
    for w in lambdas.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let mid = 0.5 * (lo + hi);
        candidates.push(mid);
        // Partition at the midpoint; stationary points of -Σ_N g / Σ_P g.
        let part_tol = 1e-12 * eval_scale;
        let (mut ap, mut bp, mut cp) = (0.0, 0.0, 0.0);
        let (mut an, mut bn, mut cn) = (0.0, 0.0, 0.0);
        for i in 0..n {
            let g = c[i] + b[i] * mid + a[i] * mid * mid;
            if g > part_tol {
                ap += a[i];
                bp += b[i];
                cp += c[i];
            } else if g < -part_tol {
                an += a[i];
                bn += b[i];
                cn += c[i];
            }
        }
        // d/dλ (N/D) = 0 ⟺ N'D - ND' = 0 with N = -(an λ² + bn λ + cn),
        // D = ap λ² + bp λ + cp; cubic terms cancel, leaving a quadratic:
        //   (N'D - ND') = (bn ap - an bp) λ² + 2(cn ap - an cp) λ + (cn bp - bn cp)
        // (up to overall sign).
        let qa = bn * ap - an * bp;
        let qb = 2.0 * (cn * ap - an * cp);
        let qc = cn * bp - bn * cp;
        quad_roots_in(qa, qb, qc, lo, hi, &mut candidates);
    }

    let mut best_lambda = 0.0;
    let mut best = KappaValue::Finite(-1.0);
    for &lam in &candidates {
        let z = u + v * lam;
        if z.amax() <= 1e-300 {
            continue;
        }
        let k = kappa_at_auto(m, &z)?;
        if best.partial_cmp(&k) == Some(std::cmp::Ordering::Less) {
            best = k;
            best_lambda = lam;
        }
    }
    if let KappaValue::Finite(v) = best {
        if v < 0.0 {
            best = KappaValue::Finite(0.0);
        }
    }
    Ok((best_lambda, best))
}

/// Lower-bound estimate of the handicap `κ̂(M)`.
#[derive(Debug, Clone)]
pub struct HandicapEstimate {
    pub lower_bound: f64,
    pub witness_x: Vector,
    pub method: SearchMethod,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMethod {
    BfsPairs,
    Multistart,
    Grid,
}

/// Which search phases [`handicap_search_mode`] may run (the deterministic
/// candidate grid always runs; it is the cheap baseline).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SearchMode {
    /// Every phase, in order: grid, BFS pairs, multistart.
    #[default]
    All,
    /// Grid plus exhaustive sign-pattern vertex pairs only.
    BfsPairs,
    /// Grid plus multistart ascent only.
    Multistart,
}

struct Budget {
    left: usize,
}

impl Budget {
    fn spend(&mut self, amount: usize) -> bool {
        if self.left >= amount {
            self.left -= amount;
            true
        } else {
            self.left = 0;
            false
        }
    }
}

struct SearchState {
    best: KappaValue,
    witness: Vector,
    method: SearchMethod,
}

impl SearchState {
    fn offer(&mut self, value: KappaValue, x: &Vector, method: SearchMethod) {
        if self.best.partial_cmp(&value) == Some(std::cmp::Ordering::Less) {
            self.best = value;
            self.witness = x.clone();
            self.method = method;
        }
    }
}

/// Search for a handicap lower bound, spending at most `budget` units
/// (one unit ≈ one `κ̂(M,·)` evaluation or linear solve).
///
/// Phases: a deterministic candidate grid; exhaustive BFS pairs over every
/// sign-pattern polytope of every ±1 conjugation (`n ≤ 8`), maximizing
/// along vertex segments; and multistart derivative-free ascent with a
/// final exact line-search polish along coordinate directions.
pub fn handicap_search(m: &Matrix, budget: usize) -> Result<HandicapEstimate> {
    handicap_search_mode(m, budget, SearchMode::All)
}

/// [`handicap_search`] restricted to a subset of its phases.
pub fn handicap_search_mode(m: &Matrix, budget: usize, mode: SearchMode) -> Result<HandicapEstimate> {
    let n = check_square(m)?;
    if n == 0 {
        return Err(Error::invalid("handicap_search undefined for n = 0"));
    }
    let mut budget = Budget { left: budget.max(1) };
    let mut state = SearchState {
        best: KappaValue::Finite(0.0),
        witness: {
            let mut e = Vector::zeros(n);
            e[0] = 1.0;
            e
        },
        method: SearchMethod::Grid,
    };

    // Phase 0: deterministic grid of structured candidates.
    let mut grid: Vec<Vector> = Vec::new();
    for i in 0..n {
        let mut e = Vector::zeros(n);
        e[i] = 1.0;
        grid.push(e);
    }
    for i in 0..n {
        for j in (i + 1)..n {
            for (si, sj) in [(1.0, 1.0), (1.0, -1.0)] {
                let mut x = Vector::zeros(n);
                x[i] = si;
                x[j] = sj;
                grid.push(x);
            }
        }
    }
    grid.push(Vector::from_element(n, 1.0));
    for x in &grid {
        if !budget.spend(1) {
            break;
        }
        let k = kappa_at_auto(m, x)?;
        state.offer(k, x, SearchMethod::Grid);
    }

    // Phase A: BFS pairs over all sign patterns and ±1 conjugations.
    let run_bfs = matches!(mode, SearchMode::All | SearchMode::BfsPairs);
    let run_multistart = matches!(mode, SearchMode::All | SearchMode::Multistart);
    if run_bfs && n <= BFS_PAIRS_CAP && budget.left > 0 {
        'conj: for dmask in 0..(1usize << (n - 1)) {
            let d: Vec<f64> = (0..n)
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
                    dmd[(i, j)] *= d[i] * d[j];
                }
            }
            let enum_cost = binomial(2 * n, n - 1);
            for code in 0..3usize.pow(n as u32) {
                if !budget.spend(enum_cost) {
                    break 'conj;
                }
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
                let verts = enumerate_vertices(&q)?;
                // Map vertices back: κ̂(DMD, v) = κ̂(M, Dv).
                let backs: Vec<Vector> = verts
                    .iter()
                    .map(|vert| {
                        Vector::from_iterator(n, (0..n).map(|i| d[i] * vert.v[i]))
                    })
                    .collect();
                for (ui, u) in backs.iter().enumerate() {
                    if !budget.spend(1) {
                        break 'conj;
                    }
                    let k = kappa_at_auto(m, u)?;
                    state.offer(k, u, SearchMethod::BfsPairs);
                    for v in backs.iter().skip(ui + 1) {
                        if !budget.spend(8) {
                            break 'conj;
                        }
                        let (lam, k) = kappa_pair_max(m, u, &(v - u))?;
                        let z = u + (v - u) * lam;
                        state.offer(k, &z, SearchMethod::BfsPairs);
                    }
                }
            }
        }
    }

    // Phase B: multistart Nelder–Mead ascent plus coordinate line-search
    // polish through the exact segment maximizer.
    if run_multistart && budget.left > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(0x0b5e55ed);
        let seeds = 1000.min(budget.left / (20 * n + 1)).max(1);
        for _ in 0..seeds {
            if budget.left == 0 {
                break;
            }
            let x0 = Vector::from_iterator(n, (0..n).map(|_| rng.random_range(-1.0..1.0f64)));
            if x0.amax() < 1e-12 {
                continue;
            }
            let refined = nelder_mead_ascent(m, &x0, &mut budget)?;
            if let Some((x, k)) = refined {
                state.offer(k, &x, SearchMethod::Multistart);
            }
        }
        // Coordinate polish from the incumbent.
        if state.best.is_finite() {
            let mut improved = true;
            let mut rounds = 0;
            while improved && rounds < 4 && budget.left > 0 {
                improved = false;
                rounds += 1;
                let base = state.witness.clone();
                let scale = base.amax().max(1.0);
                for i in 0..n {
                    for dir in [1.0, -1.0] {
                        if !budget.spend(8) {
                            break;
                        }
                        let mut step = Vector::zeros(n);
                        step[i] = dir * scale;
                        let (lam, k) = kappa_pair_max(m, &base, &step)?;
                        if state.best.partial_cmp(&k) == Some(std::cmp::Ordering::Less) {
                            let z = &base + step * lam;
                            state.offer(k, &z, state.method);
                            improved = true;
                        }
                    }
                }
            }
        }
    }

    // Recompute the bound from the stored witness so the invariant
    // kappa_at(M, witness) ≥ lower_bound - 1e-9 holds by construction.
    let final_value = kappa_at_auto(m, &state.witness)?;
    Ok(HandicapEstimate {
        lower_bound: final_value.value(),
        witness_x: state.witness,
        method: state.method,
    })
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc.min(usize::MAX as u128) as usize
}

/// Derivative-free simplex ascent of `x ↦ κ̂(M, x/‖x‖)`; returns the best
/// point found, or early-outs with an infinite value.
fn nelder_mead_ascent(
    m: &Matrix,
    x0: &Vector,
    budget: &mut Budget,
) -> Result<Option<(Vector, KappaValue)>> {
    let n = x0.len();
    let eval = |x: &Vector, budget: &mut Budget| -> Result<Option<KappaValue>> {
        if !budget.spend(1) {
            return Ok(None);
        }
        let norm = x.norm();
        if norm < 1e-12 {
            return Ok(Some(KappaValue::Finite(0.0)));
        }
        Ok(Some(kappa_at_auto(m, &(x / norm))?))
    };

    // Initial simplex around x0.
    let mut simplex: Vec<(Vector, KappaValue)> = Vec::with_capacity(n + 1);
    let Some(f0) = eval(x0, budget)? else {
        return Ok(None);
    };
    if !f0.is_finite() {
        return Ok(Some((x0.clone(), f0)));
    }
    simplex.push((x0.clone(), f0));
    for i in 0..n {
        let mut xi = x0.clone();
        xi[i] += 0.25 * x0.amax().max(0.5);
        let Some(fi) = eval(&xi, budget)? else {
            return Ok(simplex.into_iter().max_by(|a, b| cmp_kv(a.1, b.1)));
        };
        if !fi.is_finite() {
            return Ok(Some((xi, fi)));
        }
        simplex.push((xi, fi));
    }

    for _ in 0..60 * n {
        // Sort ascending by value; we maximize, so the last is best.
        simplex.sort_by(|a, b| cmp_kv(a.1, b.1));
        let worst = simplex[0].clone();
        let second = simplex[1].1;
        let best = simplex[n].1;
        // Centroid of all but the worst.
        let mut centroid = Vector::zeros(n);
        for (x, _) in simplex.iter().skip(1) {
            centroid += x;
        }
        centroid /= n as f64;

        let reflect = &centroid + (&centroid - &worst.0);
        let Some(fr) = eval(&reflect, budget)? else { break };
        if !fr.is_finite() {
            return Ok(Some((reflect, fr)));
        }
        if cmp_kv(fr, best) == std::cmp::Ordering::Greater {
            let expand = &centroid + (&reflect - &centroid) * 2.0;
            let Some(fe) = eval(&expand, budget)? else { break };
            if !fe.is_finite() {
                return Ok(Some((expand, fe)));
            }
            simplex[0] = if cmp_kv(fe, fr) == std::cmp::Ordering::Greater {
                (expand, fe)
            } else {
                (reflect, fr)
            };
            continue;
        }
        if cmp_kv(fr, second) == std::cmp::Ordering::Greater {
            simplex[0] = (reflect, fr);
            continue;
        }
        let contract = &centroid + (&worst.0 - &centroid) * 0.5;
        let Some(fc) = eval(&contract, budget)? else { break };
        if !fc.is_finite() {
            return Ok(Some((contract, fc)));
        }
        if cmp_kv(fc, worst.1) == std::cmp::Ordering::Greater {
            simplex[0] = (contract, fc);
            continue;
        }
        // Shrink toward the best point.
        let anchor = simplex[n].0.clone();
        for k in 0..n {
            let xk = (&simplex[k].0 + &anchor) * 0.5;
            let Some(fk) = eval(&xk, budget)? else {
                return Ok(simplex.into_iter().max_by(|a, b| cmp_kv(a.1, b.1)));
            };
            if !fk.is_finite() {
                return Ok(Some((xk, fk)));
            }
            simplex[k] = (xk, fk);
        }
    }
    Ok(simplex.into_iter().max_by(|a, b| cmp_kv(a.1, b.1)))
}

fn cmp_kv(a: KappaValue, b: KappaValue) -> std::cmp::Ordering {
    a.value().partial_cmp(&b.value()).unwrap_or(std::cmp::Ordering::Equal)
}
