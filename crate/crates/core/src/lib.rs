//! Forward model for coherent imaging through arbitrarily aberrated linear
//! shift-invariant systems, including nulling-interferometer dark-field
//! imaging.
//!
//! The pipeline is: binary raster → [`specimen::ThicknessMap`] →
//! [`specimen::exit_wave`] → [`propagator::Propagator`] (transfer function
//! built from an [`AberrationSet`]) → [`interferometer`] screen composition →
//! intensity. [`io`] wraps it in a JSON-configured runner.

pub mod aberrations;
pub mod error;
pub mod field_grid;
pub mod interferometer;
pub mod io;
pub mod propagator;
pub mod reference_oracle;
pub mod specimen;

pub use aberrations::{AberrationCoefficient, AberrationSet};
pub use error::{Error, Result};
pub use field_grid::{ComplexField, GridSpec, RealImage};
pub use interferometer::InterferometerConfig;
pub use propagator::Propagator;
pub use specimen::{MaterialCalibration, ThicknessMap};
