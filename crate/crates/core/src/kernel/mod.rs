//! Time-scale transform of real signals into analytic signals on the upper
//! half of the complex time plane, with the Cauchy, Poisson and Hilbert
//! kernels and the norms and bounds that go with them.

mod norms;
mod signal;
mod transform;

pub use norms::{
    check_analyticity, check_static_bound, max_modulus_increase, s_inner, s_norm, s_norm_spectral,
    s_norm_sq_real, static_limit_bound, BoundCheck, SNorm,
};
pub use signal::{cauchy_kernel, split_dc, AnalyticSignal, Boundary, KernelSample, RealSignal, ScaleGrid};
pub use transform::{
    analytic_transform, analytic_transform_direct, analytic_transform_with, hilbert_sharp, DirectTransform,
    ScaleFilterBank,
};
#[allow(unused_imports)]
pub(crate) use transform::bandlimited_cauchy;
