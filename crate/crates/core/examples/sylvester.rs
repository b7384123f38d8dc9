//! The Schur-based Sylvester solver next to the dense Kronecker solve.

use std::error::Error;

use nalgebra::dmatrix;
use pi_observer::numerics::solve_sylvester;
use pi_observer::testkit::kronecker_sylvester;

pub fn run_example() -> Result<f64, Box<dyn Error>> {
    let a = dmatrix![1.0, 2.0, 0.0; 0.0, 3.0, 1.0; 0.5, 0.0, 2.0];
    let b = dmatrix![-1.0, 1.0; -1.0, -1.0];
    let c = dmatrix![1.0, 0.0; 0.0, 1.0; 1.0, 1.0];
    let x = solve_sylvester(&a, &b, &c)?;
    let reference = kronecker_sylvester(&a, &b, &c).ok_or("Kronecker system is singular")?;
    let residual = (&a * &x - &x * &b - &c).norm();
    let gap = (&x - &reference).norm();
    println!("X = {x}residual {residual:.2e}, distance to Kronecker solve {gap:.2e}");
    Ok(gap)
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example().map(|_| ())
}
