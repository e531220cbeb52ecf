//! Many-interacting-worlds (MIW) sequences for the higher-energy states of the
//! quantum harmonic oscillator.
//!
//! The core is generic over the floating point type through [`Real`]; the
//! `*64` aliases below fix it to `f64`, which is what the command line tool
//! and the acceptance checks use.

pub mod constructor;
pub mod dynamics;
pub mod error;
pub mod metrics;
pub mod quad;
pub mod scalar;
pub mod stability;
pub mod states;
pub mod stein;

pub use constructor::{construct, construct_auto, shoot, verify, MiwSequence, ShootResult};
pub use error::{MiwError, Result};
pub use scalar::Real;
pub use states::EnergyState;

pub type EnergyState64 = states::EnergyState<f64>;
pub type EnergyState32 = states::EnergyState<f32>;
pub type MiwSequence64 = constructor::MiwSequence<f64>;
pub type MiwSequence32 = constructor::MiwSequence<f32>;
pub type PhaseState64 = dynamics::PhaseState<f64>;
pub type Trajectory64 = dynamics::Trajectory<f64>;
pub type WassersteinReport64 = metrics::WassersteinReport<f64>;
pub type SteinProbe64 = stein::SteinProbe<f64>;

/// Library version embedded in artifacts.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
