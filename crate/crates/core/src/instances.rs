//! Instance and report files, instance generators, and encoding-length
//! estimation.
//!
//! Numbers in files are decimal strings (optionally `p/q` fractions), never
//! binary floats, so exact readers see exact inputs and parse→emit→parse is
//! the identity on the strings. Reports embed the instance they were
//! produced from; every numeric claim in a report can be replayed from that
//! data alone.

use serde::{Deserialize, Serialize};

use crate::duality::{lp_feasible, LpFeasResult, VarSign};
use crate::numerics::{alpha_matrix, csizmadia, principal_pivot};
use crate::rational::{format_exact, from_f64_exact, parse_decimal, to_f64};
use crate::{Error, Matrix, Result, Vector};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

/// Optional provenance block of an instance file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct InstanceMetadata {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parameters: Option<serde_json::Map<String, serde_json::Value>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// On-disk LCP instance: `n`, row-major `M`, optional `q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub n: usize,
    /// Row-major entries of `M` as exact decimal strings.
    pub m: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metadata: Option<InstanceMetadata>,
}

fn number_to_string(v: f64) -> String {
    match from_f64_exact(v) {
        Ok(r) => format_exact(&r),
        Err(_) => v.to_string(),
    }
}

impl InstanceFile {
    /// Build from in-memory data; numbers are serialized exactly.
    pub fn from_data(m: &Matrix, q: Option<&Vector>, metadata: Option<InstanceMetadata>) -> Result<Self> {
        let n = m.nrows();
        if m.ncols() != n {
            return Err(Error::dim("instance matrix must be square"));
        }
        if let Some(q) = q {
            if q.len() != n {
                return Err(Error::dim("instance q has wrong length"));
            }
        }
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                entries.push(number_to_string(m[(i, j)]));
            }
        }
        Ok(InstanceFile {
            n,
            m: entries,
            q: q.map(|q| q.iter().map(|v| number_to_string(*v)).collect()),
            metadata,
        })
    }

    /// Parse the matrix (row-major decimal strings) to floats.
    pub fn matrix(&self) -> Result<Matrix> {
        if self.m.len() != self.n * self.n {
            return Err(Error::dim(format!(
                "matrix needs {} entries, file has {}",
                self.n * self.n,
                self.m.len()
            )));
        }
        let mut m = Matrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                m[(i, j)] = to_f64(&parse_decimal(&self.m[i * self.n + j])?);
            }
        }
        Ok(m)
    }

    /// Parse `q` to floats, if present.
    pub fn q_vector(&self) -> Result<Option<Vector>> {
        let Some(q) = &self.q else {
            return Ok(None);
        };
        if q.len() != self.n {
            return Err(Error::dim(format!(
                "q needs {} entries, file has {}",
                self.n,
                q.len()
            )));
        }
        let mut v = Vector::zeros(self.n);
        for (i, s) in q.iter().enumerate() {
            v[i] = to_f64(&parse_decimal(s)?);
        }
        Ok(Some(v))
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(Error::Json)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let inst: InstanceFile = serde_json::from_str(text).map_err(Error::Json)?;
        if inst.m.len() != inst.n * inst.n {
            return Err(Error::Parse(format!(
                "instance declares n={} but has {} matrix entries",
                inst.n,
                inst.m.len()
            )));
        }
        // Validate every number eagerly so malformed files fail at load.
        for s in inst.m.iter().chain(inst.q.iter().flatten()) {
            parse_decimal(s)?;
        }
        Ok(inst)
    }

    /// Total encoding length: sum of numerator/denominator bit lengths of
    /// the exact rational values of all entries.
    pub fn encoding_length(&self) -> Result<f64> {
        let mut bits = 0.0;
        for s in self.m.iter().chain(self.q.iter().flatten()) {
            let r = parse_decimal(s)?;
            bits += (r.numer().bits() as f64).max(1.0) + (r.denom().bits() as f64).max(1.0) + 1.0;
        }
        Ok(bits)
    }
}

/// Lower-triangular ±1 family with unit diagonal.
pub fn gen_csizmadia(n: usize) -> Result<InstanceFile> {
    if n == 0 {
        return Err(Error::invalid("family needs n ≥ 1"));
    }
    let mut meta = InstanceMetadata {
        family: Some("csizmadia".into()),
        ..Default::default()
    };
    let mut params = serde_json::Map::new();
    params.insert("n".into(), serde_json::json!(n));
    meta.parameters = Some(params);
    InstanceFile::from_data(&csizmadia(n), None, Some(meta))
}

/// The 3×3 circulant `[[1,α,−1],[−1,1,α],[α,−1,1]]` (α ≥ 3: sufficient
/// with optimized handicap at least `(α−3)/8`).
pub fn gen_alpha(alpha: f64) -> Result<InstanceFile> {
    if !alpha.is_finite() || alpha < 3.0 {
        return Err(Error::invalid("the α-family needs α ≥ 3"));
    }
    let mut meta = InstanceMetadata {
        family: Some("alpha".into()),
        ..Default::default()
    };
    let mut params = serde_json::Map::new();
    params.insert("alpha".into(), serde_json::json!(alpha));
    meta.parameters = Some(params);
    InstanceFile::from_data(&alpha_matrix(alpha), None, Some(meta))
}

/// Random lower-triangular matrix with positive diagonal (always a
/// P-matrix, hence sufficient). Entries live on a dyadic grid.
pub fn gen_triangular(n: usize, seed: u64) -> Result<InstanceFile> {
    if n == 0 {
        return Err(Error::invalid("family needs n ≥ 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = rng.random_range(2..=8) as f64 / 4.0;
        for j in 0..i {
            m[(i, j)] = rng.random_range(-8..=8) as f64 / 4.0;
        }
    }
    let mut meta = InstanceMetadata {
        family: Some("triangular".into()),
        seed: Some(seed),
        ..Default::default()
    };
    let mut params = serde_json::Map::new();
    params.insert("n".into(), serde_json::json!(n));
    meta.parameters = Some(params);
    InstanceFile::from_data(&m, None, Some(meta))
}

/// Random sufficient matrix `D₁·S·D₂` with `S = AᵀA` positive
/// semidefinite and `D₁, D₂` positive diagonal, optionally composed with a
/// random principal pivotal transform (which preserves sufficiency).
/// `singular` drops the rank of `S` so that infeasible right-hand sides
/// exist.
pub fn gen_random_sufficient(n: usize, seed: u64, pivot: bool, singular: bool) -> Result<InstanceFile> {
    if n == 0 {
        return Err(Error::invalid("family needs n ≥ 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = loop {
        let a = if singular && n >= 2 {
            // Rows sum to zero, so the all-ones vector lies in the kernel
            // of S = AᵀA exactly (dyadic sums are exact): the instance
            // admits infeasible right-hand sides.
            let mut a = Matrix::zeros(n, n);
            for i in 0..n {
                let mut sum = 0.0;
                for j in 0..n - 1 {
                    let v = rng.random_range(-16..=16) as f64 / 8.0;
                    a[(i, j)] = v;
                    sum += v;
                }
                a[(i, n - 1)] = -sum;
            }
            a
        } else {
            Matrix::from_fn(n, n, |_, _| rng.random_range(-16..=16) as f64 / 8.0)
        };
        let s = a.transpose() * &a;
        // Degenerate draws (zero rows) make dull instances; redraw.
        if (0..n).any(|i| s.row(i).amax() == 0.0) {
            continue;
        }
        let d1 = Vector::from_fn(n, |_, _| (2.0_f64).powi(rng.random_range(-1..=2)));
        let d2 = Vector::from_fn(n, |_, _| (2.0_f64).powi(rng.random_range(-1..=2)));
        break Matrix::from_fn(n, n, |i, j| d1[i] * s[(i, j)] * d2[j]);
    };
    if pivot {
        for _ in 0..8 {
            let j_set: Vec<usize> = (0..n).filter(|_| rng.random_bool(0.4)).collect();
            if j_set.is_empty() {
                continue;
            }
            if let Ok(p) = principal_pivot(&m, &j_set) {
                m = p;
                break;
            }
        }
    }
    let mut meta = InstanceMetadata {
        family: Some("random-sufficient".into()),
        seed: Some(seed),
        ..Default::default()
    };
    let mut params = serde_json::Map::new();
    params.insert("n".into(), serde_json::json!(n));
    params.insert("pivot".into(), serde_json::json!(pivot));
    params.insert("singular".into(), serde_json::json!(singular));
    meta.parameters = Some(params);
    InstanceFile::from_data(&m, None, Some(meta))
}

/// `q = −Mx̂ + ŝ` for a complementary pair, so `(x̂, ŝ)` solves the LCP.
pub fn feasible_q_from(m: &Matrix, xhat: &Vector, shat: &Vector) -> Result<Vector> {
    let n = m.nrows();
    if xhat.len() != n || shat.len() != n {
        return Err(Error::dim("complementary pair has wrong length"));
    }
    Ok(-(m * xhat) + shat)
}

/// Right-hand-side generation mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QMode {
    /// `q = −Mx̂ + ŝ` for random complementary `x̂, ŝ ≥ 0` (solvable).
    Feasible,
    /// A `q` whose primal region is empty (exists iff the homogeneous dual
    /// cone is nontrivial).
    Infeasible,
}

/// Generate a right-hand side of the requested mode for `m`.
pub fn gen_q(m: &Matrix, mode: QMode, seed: u64) -> Result<Vector> {
    let n = m.nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match mode {
        QMode::Feasible => {
            let mut xhat = Vector::zeros(n);
            let mut shat = Vector::zeros(n);
            for i in 0..n {
                if rng.random_bool(0.5) {
                    xhat[i] = rng.random_range(1..=16) as f64 / 8.0;
                } else {
                    shat[i] = rng.random_range(1..=16) as f64 / 8.0;
                }
            }
            feasible_q_from(m, &xhat, &shat)
        }
        QMode::Infeasible => {
            // Find z ≥ 0 with M'z ≤ 0 and Σz = 1 (u := −M'z ≥ 0). Any q
            // with q'z < 0 then makes (u, z/|q'z|) a dual-region point, so
            // the primal region is empty by the alternative.
            let mut a = Matrix::zeros(n + 1, 2 * n);
            let mut b = Vector::zeros(n + 1);
            for i in 0..n {
                a[(i, i)] = 1.0;
                for j in 0..n {
                    a[(i, n + j)] = m[(j, i)];
                }
                a[(n, n + i)] = 1.0;
            }
            b[n] = 1.0;
            let signs = vec![VarSign::NonNeg; 2 * n];
            let z = match lp_feasible(&a, &b, &signs)? {
                LpFeasResult::Feasible(uz) => {
                    Vector::from_iterator(n, (0..n).map(|i| uz[n + i].max(0.0)))
                }
                LpFeasResult::Infeasible(_) => {
                    return Err(Error::invalid(
                        "every q is feasible for this matrix — no infeasible mode",
                    ));
                }
            };
            // q = −z plus a random component orthogonal to z keeps
            // q'z = −z'z < 0 while varying the instance.
            let zz = z.dot(&z);
            let g = Vector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
            let g_orth = &g - &z * (g.dot(&z) / zz);
            let q = -&z + g_orth * 0.25;
            if q.dot(&z) < -1e-12 {
                Ok(q)
            } else {
                Ok(-z)
            }
        }
    }
}

/// Statistics block of a report.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ReportStats {
    pub ipa_calls: usize,
    pub ipa_iterations: usize,
    pub main_cuts: usize,
    pub clip_cuts: usize,
    pub replay_hits: usize,
    pub certificates: usize,
    pub final_tau: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_d: Option<Vec<String>>,
}

/// Parameter-schedule trace of a solve.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ScheduleRecord {
    pub taus: Vec<f64>,
    pub t: f64,
    pub k: f64,
    pub rho_final: f64,
}

/// Evidence record for a not-P* verdict (all numbers as decimal strings).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EvidenceRecord {
    NoncomplementaryDualPoint { u: Vec<String>, z: Vec<String> },
    InsufficiencyWitness { x: Vec<String>, row: bool },
    TauExceeded { t: f64 },
}

/// On-disk result of a solve/check run. The instance is embedded so every
/// claim can be replayed without external files.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportFile {
    pub instance: InstanceFile,
    /// "primal" | "dual" | "not-pstar".
    pub verdict: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub evidence: Option<EvidenceRecord>,
    pub stats: ReportStats,
    pub schedule: ScheduleRecord,
    /// Wall-clock milliseconds (informational, not re-verifiable).
    pub elapsed_ms: f64,
}

pub fn vector_to_strings(v: &Vector) -> Vec<String> {
    v.iter().map(|x| number_to_string(*x)).collect()
}

pub fn strings_to_vector(ss: &[String]) -> Result<Vector> {
    let mut v = Vector::zeros(ss.len());
    for (i, s) in ss.iter().enumerate() {
        v[i] = to_f64(&parse_decimal(s)?);
    }
    Ok(v)
}

impl ReportFile {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(Error::Json)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(Error::Json)
    }

    /// Replay every numeric claim against the embedded instance. Returns
    /// the list of failed claims (empty = verified).
    pub fn verify(&self) -> Result<Vec<String>> {
        let mut failures = Vec::new();
        let m = self.instance.matrix()?;
        let q = self.instance.q_vector()?;
        match self.verdict.as_str() {
            "primal" => {
                let Some(q) = q else {
                    return Err(Error::invalid("primal report on an instance without q"));
                };
                let (Some(xs), Some(ss)) = (&self.x, &self.s) else {
                    failures.push("primal report lacks x or s".into());
                    return Ok(failures);
                };
                let x = strings_to_vector(xs)?;
                let s = strings_to_vector(ss)?;
                let scale = 1.0 + q.amax().max(x.amax()).max(s.amax());
                if x.min() < -1e-9 * scale || s.min() < -1e-9 * scale {
                    failures.push("solution has negative entries".into());
                }
                let res = (-(&m * &x) + &s - &q).amax();
                if res > 1e-8 * scale {
                    failures.push(format!("residual {res} exceeds 1e-8·scale"));
                }
                let gap = x.dot(&s);
                if gap > 1e-8 * scale {
                    failures.push(format!("complementarity gap {gap} exceeds 1e-8·scale"));
                }
            }
            "dual" => {
                let Some(q) = q else {
                    return Err(Error::invalid("dual report on an instance without q"));
                };
                let (Some(us), Some(zs)) = (&self.u, &self.z) else {
                    failures.push("dual report lacks u or z".into());
                    return Ok(failures);
                };
                let u = strings_to_vector(us)?;
                let z = strings_to_vector(zs)?;
                let inst = crate::ipa::LcpInstance::new(m, q)?;
                if !(crate::duality::DualSolution { u, z }).verify(&inst) {
                    failures.push("dual solution fails verification".into());
                }
            }
            "not-pstar" => match &self.evidence {
                Some(EvidenceRecord::NoncomplementaryDualPoint { u, z }) => {
                    let Some(q) = q else {
                        failures.push("dual-point evidence without q".into());
                        return Ok(failures);
                    };
                    let u = strings_to_vector(u)?;
                    let z = strings_to_vector(z)?;
                    let scale = 1.0 + u.amax().max(z.amax());
                    if u.min() < -1e-9 * scale || z.min() < -1e-9 * scale {
                        failures.push("dual point has negative entries".into());
                    }
                    if (&u + m.transpose() * &z).amax() > 1e-7 * scale {
                        failures.push("dual point violates u + M'z = 0".into());
                    }
                    if (q.dot(&z) + 1.0).abs() > 1e-7 * scale {
                        failures.push("dual point violates q'z = −1".into());
                    }
                    if u.dot(&z) <= 1e-8 * (1.0 + u.norm() * z.norm()) {
                        failures.push("claimed noncomplementary point is complementary".into());
                    }
                }
                Some(EvidenceRecord::InsufficiencyWitness { x, row }) => {
                    let x = strings_to_vector(x)?;
                    let target = if *row { m.transpose() } else { m.clone() };
                    let w = crate::numerics::hadamard_mx(&target, &x);
                    let tol = crate::numerics::default_sign_tol(&target, &x);
                    let ok = w.iter().all(|v| *v <= tol) && w.iter().any(|v| *v < -tol);
                    if !ok {
                        failures.push("insufficiency witness does not verify".into());
                    }
                }
                Some(EvidenceRecord::TauExceeded { t }) => {
                    if self.stats.final_tau <= *t {
                        failures.push("τ-exceeded evidence with final τ ≤ T".into());
                    }
                }
                None => failures.push("not-pstar report lacks evidence".into()),
            },
            other => failures.push(format!("unknown verdict '{other}'")),
        }
        Ok(failures)
    }
}
