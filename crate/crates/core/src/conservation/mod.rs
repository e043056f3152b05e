//! Differential and integral conservation laws over complex time, evaluated
//! as numerical residuals.

mod harmonic;
mod integral;
mod residual;
mod static_limit;

pub use harmonic::{dominant_frequency, timeharmonic_reduction, HarmonicReduction, SINGLE_MODE_CONCENTRATION};
pub use integral::{
    cumulative_reactive, integral_laws, reactive_tail_bound, surface_flux, volume_integral, CumulativeReactive,
    IndexBox, IntegralReport,
};
pub use residual::{
    active_from, active_residual_at, ds_reactive_analyticity, ds_route_gap, reactive_from, residual_active,
    residual_complex, residual_local, residual_reactive, residual_reactive_analyticity, residual_split,
    stack_densities, ResidualField,
};
pub use static_limit::{static_balance, static_limit_check, Approach, StaticLimitReport};
