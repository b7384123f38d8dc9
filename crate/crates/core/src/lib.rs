//! Existence test, construction and simulation of reduced-order
//! proportional-integral observers for `ẋ = A·x + B·u`, `y = C·x`.
//!
//! A reduced-order PI observer exists exactly when `(A, C)` is detectable.
//! [`synthesis::design`] checks that condition, builds the observer gains
//! `L`, `F`, `G` and certifies the error dynamics; [`sim`] realizes the
//! observer without differentiating `y` and integrates it alongside the plant.
//!
//! ```
//! use nalgebra::dmatrix;
//! use pi_observer::{design, StateSpaceSystem, SynthesisConfig};
//!
//! let sys = StateSpaceSystem::new(
//!     dmatrix![0.0, 1.0; 0.0, 1.0],
//!     dmatrix![0.0; 1.0],
//!     dmatrix![1.0, 0.0],
//! )
//! .unwrap();
//! let d = design(&sys, &SynthesisConfig::default()).unwrap();
//! assert!(d.observer.slowest_rate() < 0.0);
//! ```

// Links the system OpenBLAS that provides LAPACK for `nalgebra-lapack`.
extern crate openblas_src;

pub mod analysis;
pub mod cli;
pub mod io;
pub mod model;
pub mod numerics;
pub mod sim;
pub mod synthesis;
pub mod testkit;

pub use analysis::{hurwitz_check, pbh_detectable, DetectabilityReport};
pub use model::{StateSpaceSystem, TransformedSystem};
pub use numerics::{Matrix, Spectrum, C64};
pub use sim::{realize, simulate, InputSignal, SimulationSettings, SimulationTrace};
pub use synthesis::{design, CertifiedDesign, ObserverDesign, PhiChoice, SynthesisConfig, SynthesisError};
