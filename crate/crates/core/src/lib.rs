//! Zero-temperature Lifshitz theory of the Casimir interaction between two
//! material half-spaces, with imaginary-frequency material models, a
//! force-sign analysis over material parameter space, and the proximity
//! force approximation for the sphere-plate geometry.

pub mod constants;
pub mod engine;
pub mod error;
pub mod exec;
pub mod material;
pub mod pfa;
pub mod quadrature;
pub mod sign;

pub use engine::{
    dominant_frequency, energy_per_area, pressure, reflection, EnergyResult, GapConfig,
    PressureResult, QuadratureConfig, QuadraturePoint, ReflectionPair,
};
pub use error::{Error, Quantity, Result};
pub use exec::Execution;
pub use material::{
    eval_eps, eval_mu, kramers_kronig, ImaginaryFrequency, MaterialKind, MaterialResponse,
    ResponseValue, TabulatedAbsorption,
};
