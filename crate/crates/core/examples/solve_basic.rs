//! Minimal library usage: build an instance, solve, match on the verdict.
//!
//! Run with `cargo run --example solve_basic`.

use suflcp::solver::{solve, SolveVerdict, SolverConfig};
use suflcp::{LcpInstance, Matrix, Vector};

fn main() -> suflcp::Result<()> {
    let m = Matrix::from_row_slice(2, 2, &[1.0, 0.0, -1.0, 1.0]);
    let q = Vector::from_row_slice(&[1.0, -2.0]);
    let inst = LcpInstance::new(m, q)?;
    match solve(&inst, &SolverConfig::default())?.verdict {
        SolveVerdict::Primal { x, s } => {
            println!("solved: x = {:?}, s = {:?}", x.as_slice(), s.as_slice())
        }
        SolveVerdict::Dual(cert) => println!("infeasible: {cert:?}"),
        SolveVerdict::NotPstar(ev) => println!("not P*: {ev:?}"),
    }
    Ok(())
}
