//! Norms, bounds and analyticity diagnostics for analytic signals.

use num_complex::Complex;
use rustfft::FftPlanner;

use super::signal::{AnalyticSignal, RealSignal};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::stencil::derivative_3pt;

/// The s-norm `‖X'‖²_s` computed two ways.
#[derive(Debug, Clone, Copy)]
pub struct SNorm<T> {
    /// `Σ_t |X'(t + i s)|² dt`.
    pub time_domain: T,
    /// Discrete Plancherel sum over the non-negative-frequency DFT bins of
    /// the same samples.
    pub frequency_domain: T,
}

impl<T: Real> SNorm<T> {
    pub fn relative_gap(&self) -> T {
        (self.time_domain - self.frequency_domain).abs() / self.time_domain.max(T::min_positive_value())
    }
}

/// Squared s-norm of the fluctuation of `a`, summed over components.
pub fn s_norm<T: Real>(a: &AnalyticSignal<T>) -> SNorm<T> {
    let n = a.len();
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(n);
    let mut time_domain = T::zero();
    let mut frequency_domain = T::zero();
    for c in 0..a.dim() {
        let mut buf = a.fluctuation(c);
        time_domain = time_domain + buf.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()) * a.dt;
        fft.process(&mut buf);
        let one_sided = buf[..=n / 2].iter().fold(T::zero(), |acc, z| acc + z.norm_sqr());
        frequency_domain = frequency_domain + one_sided * a.dt / T::from_index(n);
    }
    SNorm { time_domain, frequency_domain }
}

/// `(2/π) ∫_0^∞ e^{-2ωs} |X'_ω|² dω` evaluated on the DFT of a periodic record.
pub fn s_norm_spectral<T: Real>(x: &RealSignal<T>, s: T) -> T {
    let n = x.len();
    let dt = x.dt();
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(n);
    let mut total = T::zero();
    for c in 0..x.dim() {
        let mut buf: Vec<Complex<T>> = x.fluctuation(c).into_iter().map(|v| Complex::new(v, T::zero())).collect();
        fft.process(&mut buf);
        for (k, z) in buf.iter().enumerate().take(n / 2 + 1) {
            let w = T::TAU() * T::from_index(k) / (T::from_index(n) * dt);
            let weight = if k == 0 || 2 * k == n { T::one() } else { T::lit(4.0) };
            total = total + weight * (-T::lit(2.0) * w * s).exp() * z.norm_sqr();
        }
    }
    total * dt / T::from_index(n)
}

/// Real inner product `Σ_c Σ_t a_c(t) b_c(t) dt`.
pub fn s_inner<T: Real>(a: &[Vec<T>], b: &[Vec<T>], dt: T) -> T {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.iter().zip(y).fold(T::zero(), |acc, (u, v)| acc + *u * *v))
        .fold(T::zero(), |acc, v| acc + v)
        * dt
}

pub fn s_norm_sq_real<T: Real>(a: &[Vec<T>], dt: T) -> T {
    s_inner(a, a, dt)
}

/// Max-norm of `∂_t X + i ∂_s X` over interior (t, s) points.
///
/// `stack` holds the same signal at three or more scales; the middle scales
/// are differenced with the three-point stencil (second order on any
/// spacing) and time with centred differences.
pub fn check_analyticity<T: Real>(stack: &[AnalyticSignal<T>]) -> Result<T> {
    if stack.len() < 3 {
        return Err(Error::TooFewSamples(format!("need 3 scales, got {}", stack.len())));
    }
    let n = stack[0].len();
    if n < 3 {
        return Err(Error::TooFewSamples(format!("need 3 time samples, got {n}")));
    }
    if stack.iter().any(|a| a.len() != n || a.dim() != stack[0].dim() || a.dt != stack[0].dt) {
        return Err(Error::Mismatch("scale stack has inconsistent records".into()));
    }
    if stack.windows(2).any(|w| w[1].scale <= w[0].scale) {
        return Err(Error::InvalidScaleGrid("scales must be strictly increasing".into()));
    }
    let dt2 = stack[0].dt * T::lit(2.0);
    let mut worst = T::zero();
    for q in 1..stack.len() - 1 {
        let (a, b, c) = (&stack[q - 1], &stack[q], &stack[q + 1]);
        for ch in 0..b.dim() {
            for k in 1..n - 1 {
                let dtx = (b.channels[ch][k + 1] - b.channels[ch][k - 1]) / dt2;
                let dsx: Complex<T> = derivative_3pt(
                    [a.scale, b.scale, c.scale],
                    [a.channels[ch][k], b.channels[ch][k], c.channels[ch][k]],
                );
                let r: Complex<T> = dtx + Complex::<T>::i() * dsx;
                worst = worst.max(r.norm());
            }
        }
    }
    Ok(worst)
}

/// Pointwise ceiling `‖X'‖² / (2πs)` on `|X'(t + i s)|²`.
pub fn static_limit_bound<T: Real>(x: &RealSignal<T>, s: T) -> Result<T> {
    if !(s > T::zero()) {
        return Err(Error::KernelOnBoundary(s.to_f64_lossy()));
    }
    Ok(x.fluctuation_norm_sq() / (T::TAU() * s))
}

/// Outcome of comparing `max_t |X'(t + i s)|²` with the static-limit bound.
#[derive(Debug, Clone, Copy)]
pub struct BoundCheck<T> {
    pub peak: T,
    pub bound: T,
    pub holds: bool,
}

pub fn check_static_bound<T: Real>(a: &AnalyticSignal<T>, bound: T, rel_slack: T) -> BoundCheck<T> {
    let mut peak = T::zero();
    for k in 0..a.len() {
        let m = (0..a.dim()).fold(T::zero(), |acc, c| acc + (a.channels[c][k] - a.dc[c]).norm_sqr());
        peak = peak.max(m);
    }
    BoundCheck { peak, bound, holds: peak <= bound * (T::one() + rel_slack) }
}

/// Largest increase of `|X(t + i s)|²` between consecutive scales, over all
/// time samples. Non-positive when the modulus is non-increasing in `s`.
pub fn max_modulus_increase<T: Real>(stack: &[AnalyticSignal<T>]) -> T {
    let mut worst = T::neg_infinity();
    for w in stack.windows(2) {
        let (lo, hi) = (w[0].modulus_sq(), w[1].modulus_sq());
        for (a, b) in lo.iter().zip(&hi) {
            worst = worst.max(*b - *a);
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{analytic_transform_with, split_dc, Boundary, ScaleGrid};
    use std::f64::consts::PI;

    fn gaussian_pulse(n: usize) -> RealSignal<f64> {
        let x = RealSignal::from_fn(n, 0.05, -12.8, |t: f64| (-(t * t) / 0.8).exp()).unwrap();
        // periodic record: the mean over the full period removes the DC bin
        let mean = x.channel(0).iter().sum::<f64>() / n as f64;
        x.with_dc(vec![mean]).unwrap()
    }

    #[test]
    fn zero_scale_norm_is_twice_signal_norm() {
        let x = gaussian_pulse(512);
        let a = analytic_transform_with(&x, &ScaleGrid::single(0.0).unwrap(), Boundary::Periodic).unwrap();
        let sn = s_norm(&a[0]);
        let expect = 2.0 * x.fluctuation_norm_sq();
        assert!((sn.time_domain - expect).abs() <= 1e-10 * expect);
        assert!(sn.relative_gap() < 1e-12);
        assert!((s_norm_spectral(&x, 0.0) - sn.time_domain).abs() <= 1e-10 * expect);
    }

    #[test]
    fn real_and_imaginary_parts_orthogonal_with_equal_norms() {
        let x = gaussian_pulse(512);
        let a = analytic_transform_with(&x, &ScaleGrid::single(0.0).unwrap(), Boundary::Periodic).unwrap();
        let re = a[0].real_fluctuation();
        let im = a[0].imag_part();
        let n1 = s_norm_sq_real(&re, a[0].dt);
        let n2 = s_norm_sq_real(&im, a[0].dt);
        assert!((n1 - n2).abs() <= 1e-10 * n1);
        assert!(s_inner(&re, &im, a[0].dt).abs() <= 1e-10 * n1);
    }

    #[test]
    fn s_norm_decreases_with_scale() {
        let x = RealSignal::from_fn(256, 0.1, 0.0, |t: f64| (1.3 * t).sin() + 0.5 * (4.1 * t).cos()).unwrap();
        let x = split_dc(&x, (0.0, 25.5)).unwrap();
        let grid = ScaleGrid::log_spaced(0.01, 5.0, 20).unwrap();
        let out = analytic_transform_with(&x, &grid, Boundary::Periodic).unwrap();
        let norms: Vec<f64> = out.iter().map(|a| s_norm(a).time_domain).collect();
        assert!(norms.windows(2).all(|w| w[1] <= w[0]));
        for (a, n) in out.iter().zip(&norms) {
            let spec = s_norm_spectral(&x, a.scale);
            assert!((spec - n).abs() <= 1e-8 * n);
        }
    }

    #[test]
    fn analyticity_residual_converges_at_second_order() {
        let w = 1.3;
        let make = |dt: f64, ds: f64| -> f64 {
            let n = 64;
            let stack: Vec<AnalyticSignal<f64>> = (0..3)
                .map(|q| {
                    let s = 0.5 + q as f64 * ds;
                    let ch = (0..n)
                        .map(|k| (Complex::i() * w * Complex::new(k as f64 * dt, s)).exp())
                        .collect();
                    AnalyticSignal { channels: vec![ch], dt, t0: 0.0, scale: s, dc: vec![0.0], boundary: Boundary::Periodic }
                })
                .collect();
            check_analyticity(&stack).unwrap()
        };
        let e1 = make(0.02, 0.02);
        let e2 = make(0.01, 0.01);
        let order = (e1 / e2).log2();
        assert!(order > 1.9, "order {order}");
    }

    #[test]
    fn analyticity_of_constant_is_exact() {
        let stack: Vec<AnalyticSignal<f64>> = (0..3)
            .map(|q| AnalyticSignal {
                channels: vec![vec![Complex::new(2.0, -1.0); 5]],
                dt: 0.1,
                t0: 0.0,
                scale: q as f64,
                dc: vec![0.0],
                boundary: Boundary::Windowed,
            })
            .collect();
        assert_eq!(check_analyticity(&stack).unwrap(), 0.0);
        assert!(check_analyticity(&stack[..2]).is_err());
    }

    #[test]
    fn bound_scales_inversely_with_scale() {
        let x = gaussian_pulse(256);
        let b1 = static_limit_bound(&x, 1.0).unwrap();
        let b10 = static_limit_bound(&x, 10.0).unwrap();
        assert!((b1 / b10 - 10.0).abs() < 1e-12);
        assert!((b1 - x.fluctuation_norm_sq() / (2.0 * PI)).abs() < 1e-15);
        assert!(static_limit_bound(&x, 0.0).is_err());
    }
}
