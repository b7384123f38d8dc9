//! Output normalization `C·T = [I, 0]` and the block partition of `T⁻¹·A·T`.

use std::error::Error;

use nalgebra::dmatrix;
use pi_observer::numerics::norm_inf;
use pi_observer::{StateSpaceSystem, TransformedSystem};

pub fn run_example() -> Result<f64, Box<dyn Error>> {
    let sys = StateSpaceSystem::new(
        dmatrix![0.0, 1.0, 0.0; 0.0, 0.0, 1.0; -6.0, -11.0, -6.0],
        dmatrix![0.0; 0.0; 1.0],
        dmatrix![1.0, 1.0, 0.0],
    )?;
    let ts = TransformedSystem::new(&sys, 1e-12)?;
    let residual = norm_inf(&(sys.c() * &ts.t - dmatrix![1.0, 0.0, 0.0]));
    println!("T = {}", ts.t);
    println!("‖C·T − [I, 0]‖∞ = {residual:.2e}, cond(T) = {:.3}", ts.t_condition);
    println!("A11 = {}A12 = {}A21 = {}A22 = {}", ts.a11, ts.a12, ts.a21, ts.a22);
    Ok(residual)
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example().map(|_| ())
}
