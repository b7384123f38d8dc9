//! Output injection `K` placing the spectrum of `A22 + K·A12`, in full and
//! moving only the slow modes.

use std::error::Error;

use nalgebra::dmatrix;
use pi_observer::synthesis::{partial_stabilizing_gain, stabilizing_gain, PlacementOptions};
use pi_observer::C64;

pub fn run_example() -> Result<(f64, f64), Box<dyn Error>> {
    // Double integrator read through its first state: char. poly s² + 3s + 2.
    let a22 = dmatrix![0.0, 1.0; 0.0, 0.0];
    let a12 = dmatrix![1.0, 0.0];
    let targets = [C64::new(-1.0, 0.0), C64::new(-2.0, 0.0)];
    let opts = PlacementOptions::default();
    let full = stabilizing_gain(&a22, &a12, &targets, &opts)?;
    println!("K = {}closed loop {:?}", full.gain, full.closed_loop.sorted().eigenvalues());

    // Only the unstable mode at +0.5 moves; −4 stays where it is.
    let a22 = dmatrix![0.5, 1.0; 0.0, -4.0];
    let a12 = dmatrix![1.0, 1.0];
    let partial = partial_stabilizing_gain(&a22, &a12, 0.05, 0.2, &opts)?;
    println!(
        "K = {}placed {:?}, kept {:?}",
        partial.gain, partial.placed, partial.unplaced
    );
    Ok((full.placement_error, partial.placement_error))
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example().map(|_| ())
}
