//! End-to-end design for the scalar chain `ẋ1 = x2`, `ẋ2 = x2 + u`, `y = x1`.

use std::error::Error;

use nalgebra::dmatrix;
use pi_observer::{design, PhiChoice, StateSpaceSystem, SynthesisConfig, C64};

pub fn run_example() -> Result<(f64, f64), Box<dyn Error>> {
    let sys = StateSpaceSystem::new(dmatrix![0.0, 1.0; 0.0, 1.0], dmatrix![0.0; 1.0], dmatrix![1.0, 0.0])?;
    let cfg = SynthesisConfig {
        target_poles: Some(vec![C64::new(-2.0, 0.0)]),
        phi: PhiChoice::Matrix(dmatrix![-1.0]),
        ..Default::default()
    };
    let d = design(&sys, &cfg)?;
    let o = &d.observer;
    println!("L = {}F = {}G = {}", o.l, o.f, o.g);
    println!("error spectrum {:?}", o.composite_spectrum.sorted().eigenvalues());
    println!(
        "certificate: ‖G·A12·X + Φ‖ = {:.1e}, split error = {:.1e}, {}",
        o.certificate.identity_residual, o.certificate.spectral_split_error, o.condition_numbers
    );

    // Without targets the defaults are used.
    let default = design(&sys, &SynthesisConfig::default())?;
    println!("default design: slowest error mode {}", default.observer.slowest_rate());
    Ok((o.l[(0, 0)], o.f[(0, 0)]))
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example().map(|_| ())
}
