//! Seeded random plants with known detectability, pushed through the design.

use std::error::Error;

use pi_observer::testkit::{self, GeneratorSpec, SystemKind};
use pi_observer::{design, SynthesisConfig, SynthesisError};

pub fn run_example() -> Result<(usize, usize), Box<dyn Error>> {
    let (mut designed, mut refused) = (0, 0);
    for seed in 0..20 {
        let kind = if seed % 2 == 0 { SystemKind::Detectable } else { SystemKind::UndetectablePlanted };
        let spec = GeneratorSpec::new(6, 1, 2, seed, kind);
        let sys = testkit::gen_system(&spec);
        match design(&sys, &SynthesisConfig::default()) {
            Ok(d) => {
                designed += 1;
                println!("seed {seed:2}: designed, slowest error mode {:.3}", d.observer.slowest_rate());
            }
            Err(e @ SynthesisError::Undetectable { .. }) => {
                refused += 1;
                println!("seed {seed:2}: {e}");
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok((designed, refused))
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example().map(|_| ())
}
