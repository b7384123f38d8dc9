//! A design written to JSON and read back unchanged.

use std::error::Error;

use nalgebra::dmatrix;
use pi_observer::io::{design_from_json, design_to_json, system_from_json, system_to_json};
use pi_observer::{design, StateSpaceSystem, SynthesisConfig};

pub fn run_example() -> Result<bool, Box<dyn Error>> {
    let sys = StateSpaceSystem::new(
        dmatrix![0.0, 1.0, 0.0; 0.0, 0.0, 1.0; 1.0, -2.0, 0.5],
        dmatrix![0.0; 0.0; 1.0],
        dmatrix![1.0, 0.0, 0.0; 0.0, 0.0, 1.0],
    )?;
    let text = system_to_json(&sys);
    let sys = system_from_json(&text, None)?;
    let d = design(&sys, &SynthesisConfig::default())?;
    let json = design_to_json(&d.t, &d.observer);
    println!("{json}");
    let stored = design_from_json(&json)?;
    Ok(stored.observer == d.observer && stored.t == d.t)
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example().map(|_| ())
}
