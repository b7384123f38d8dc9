//! PBH detectability of a plant and of its reduced pair `(A22, A12)`.

use std::error::Error;

use nalgebra::dmatrix;
use pi_observer::analysis;
use pi_observer::{StateSpaceSystem, TransformedSystem};

pub fn run_example() -> Result<Vec<bool>, Box<dyn Error>> {
    let plants = [
        // Unstable but observable: the scalar chain.
        StateSpaceSystem::new(dmatrix![0.0, 1.0; 0.0, 1.0], dmatrix![0.0; 1.0], dmatrix![1.0, 0.0])?,
        // The second state is invisible and grows: no observer can exist.
        StateSpaceSystem::new(dmatrix![-1.0, 0.0; 0.0, 1.0], dmatrix![1.0; 1.0], dmatrix![1.0, 0.0])?,
        // Invisible but decaying: detectable without being observable.
        StateSpaceSystem::new(dmatrix![1.0, 0.0; 0.0, -2.0], dmatrix![1.0; 1.0], dmatrix![1.0, 0.0])?,
    ];
    let mut verdicts = Vec::new();
    for sys in &plants {
        let plant = analysis::pbh_detectable(sys.a(), sys.c(), 1e-8)?;
        let ts = TransformedSystem::new(sys, 1e-12)?;
        let reduced = analysis::detectability(&ts.a22, &ts.a12, 1e-8)?;
        println!(
            "A = {:?}: (A, C) detectable = {}, (A22, A12) detectable = {}",
            sys.a().as_slice(),
            plant.detectable,
            reduced.detectable
        );
        for test in plant.failing() {
            println!("  PBH rank {} < {} at λ = {}", test.rank, test.required, test.eigenvalue);
        }
        assert_eq!(plant.detectable, reduced.detectable);
        verdicts.push(plant.detectable);
    }
    Ok(verdicts)
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example().map(|_| ())
}
