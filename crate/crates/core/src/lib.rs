//! Mean-field dynamics, steady states and stability of the non-reciprocal
//! two-species Dicke model.
//!
//! State vectors are ordered `[sx+, sy+, sz+, sx−, sy−, sz−, Re β, Im β]`
//! with the rescaled field `β = α/√N`.

pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod fixed_points;
pub mod io;
pub mod model;
pub mod spectral;
pub mod stability;

pub use error::{Error, IntegrationFailure, Result};
pub use model::{BlochVector, ModelParams, ModelVariant, SystemState};
