//! Plant and observer integrated together under a sinusoidal input; the
//! estimation error decays at the slowest error mode whatever the input.

use std::error::Error;

use nalgebra::{dmatrix, dvector};
use pi_observer::sim::{self, summarize};
use pi_observer::{design, InputSignal, PhiChoice, SimulationSettings, StateSpaceSystem, SynthesisConfig, TransformedSystem, C64};

pub fn run_example() -> Result<f64, Box<dyn Error>> {
    let sys = StateSpaceSystem::new(dmatrix![0.0, 1.0; 0.0, 1.0], dmatrix![0.0; 1.0], dmatrix![1.0, 0.0])?;
    let cfg = SynthesisConfig {
        target_poles: Some(vec![C64::new(-2.0, 0.0)]),
        phi: PhiChoice::Matrix(dmatrix![-1.0]),
        ..Default::default()
    };
    let d = design(&sys, &cfg)?;
    let ts = TransformedSystem::new(&sys, 1e-12)?;
    let real = sim::realize(&d.observer, &ts)?;
    let settings = SimulationSettings {
        dt: 1e-3,
        tf: 10.0,
        input: InputSignal::Sine { amplitude: 1.0, frequency: 2.0 },
        x0: dvector![0.0, 1.0],
        z2_hat0: dvector![0.0],
        omega0: dvector![0.0],
    };
    let trace = sim::simulate(&sys, &real, &settings)?;
    let summary = summarize(&d.observer, &trace);
    println!("{}", serde_json::to_string_pretty(&summary)?);
    let oracle = sim::error_dynamics_check(&d.observer, &ts, &trace);
    println!("largest deviation from exp(M·t)·[e; ω](0): {oracle:.2e}");
    Ok(summary.final_e_norm / summary.initial_e_norm)
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example().map(|_| ())
}
