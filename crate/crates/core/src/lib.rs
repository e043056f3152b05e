//! Analytic-signal transforms of sampled electromagnetic fields over complex
//! time `τ = t + i s`, with the scaled energy densities and the active,
//! reactive and complex conservation laws evaluated numerically.

pub mod cli;
pub mod conservation;
pub mod convergence;
pub mod densities;
pub mod error;
pub mod estf;
pub mod field;
pub mod grid;
pub mod kernel;
pub mod scalar;
pub mod stencil;

pub use error::{Error, Result};
pub use scalar::Real;

pub type RealSignal = kernel::RealSignal<f64>;
pub type AnalyticSignal = kernel::AnalyticSignal<f64>;
pub type ScaleGrid = kernel::ScaleGrid<f64>;
pub type SpaceTimeGrid = grid::SpaceTimeGrid<f64>;
pub type EMFieldSample = field::EMFieldSample<f64>;
pub type AnalyticEMField = field::AnalyticEMField<f64>;
pub type ScaleStack = field::ScaleStack<f64>;
pub type StaticFields = field::StaticFields<f64>;
pub type DensityBundle = densities::DensityBundle<f64>;
pub type LocalDensityBundle = densities::LocalDensityBundle<f64>;
pub type SplitDensities = densities::SplitDensities<f64>;
pub type IntegralReport = conservation::IntegralReport<f64>;
pub type ResidualField = conservation::ResidualField<f64, f64>;
pub type ComplexResidualField = conservation::ResidualField<num_complex::Complex<f64>, f64>;
