//! `A12 = P·[I_q 0; 0 0]·Q` with invertible `P`, `Q`, and the resulting bound
//! `k ≤ q` on the integral-state dimension.

use std::error::Error;

use nalgebra::dmatrix;
use pi_observer::synthesis::rank_factorize;

pub fn run_example() -> Result<usize, Box<dyn Error>> {
    // Rank 1: the second row is twice the first.
    let a12 = dmatrix![1.0, 2.0, 0.0; 2.0, 4.0, 0.0];
    let f = rank_factorize(&a12, 1e-12)?;
    let residual = (f.reconstruct() - &a12).norm() / a12.norm();
    println!("q = {}, cond(P) = {:.3}, cond(Q) = {:.3}", f.q, f.p_condition, f.q_condition);
    println!("relative reconstruction residual {residual:.2e}");
    println!("any integral-state dimension k ≤ {} is admissible", f.q);
    Ok(f.q)
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example().map(|_| ())
}
