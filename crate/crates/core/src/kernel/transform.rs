//! Analytic-signal transforms: spectral (production) and direct Cauchy-kernel
//! quadrature (oracle).
//!
//! The spectral path applies the one-sided filter `2H(ω)e^{-ωs}` (DC bin
//! passed with weight 1). For [`Boundary::Periodic`] records the filter acts
//! bin by bin on the DFT. For [`Boundary::Windowed`] records the same filter is
//! applied to the zero-extended signal through an aperiodic convolution with
//! its exact discrete impulse response, the band-limited Cauchy kernel
//!
//! ```text
//! K_s[n] = (1/π) ∫_0^{π/dt} e^{iω(n·dt + is)} dω = i (1 − (−1)^n e^{−πs/dt}) / (π (n·dt + is))
//! ```
//!
//! evaluated by a zero-padded FFT of length at least twice the record.

use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::signal::{cauchy_kernel, AnalyticSignal, Boundary, RealSignal, ScaleGrid};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Sample of the band-limited Cauchy kernel at integer lag `lag`.
pub(crate) fn bandlimited_cauchy<T: Real>(lag: i64, dt: T, s: T) -> Complex<T> {
    let pi = T::PI();
    let nyquist = pi / dt;
    if lag == 0 {
        if s == T::zero() {
            return Complex::new(nyquist / pi, T::zero());
        }
        // (1 − e^{−Ωs}) / (πs) without cancellation for small Ωs
        return Complex::new(-(-nyquist * s).exp_m1() / (pi * s), T::zero());
    }
    let sign = if lag % 2 == 0 { T::one() } else { -T::one() };
    let numer = T::one() - sign * (-nyquist * s).exp();
    let tau = Complex::new(dt * T::lit(lag as f64), s);
    Complex::new(T::zero(), numer) / (tau * pi)
}

fn angular_frequency<T: Real>(k: usize, n: usize, dt: T) -> T {
    T::TAU() * T::from_index(k) / (T::from_index(n) * dt)
}

/// One-sided analytic filter at scale `s` for DFT bin `k` of `n`.
fn periodic_factor<T: Real>(k: usize, n: usize, dt: T, s: T) -> T {
    if k == 0 {
        T::one()
    } else if 2 * k < n {
        T::lit(2.0) * (-angular_frequency(k, n, dt) * s).exp()
    } else if 2 * k == n {
        (-angular_frequency(k, n, dt) * s).exp()
    } else {
        T::zero()
    }
}

/// Precomputed filters for one record length and step at a set of scales.
///
/// Plans and filter spectra are owned; use one bank per worker.
pub struct ScaleFilterBank<T: Real> {
    boundary: Boundary,
    len: usize,
    padded: usize,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
    filters: Vec<Vec<Complex<T>>>,
    scratch: Vec<Complex<T>>,
}

impl<T: Real> ScaleFilterBank<T> {
    pub fn new(len: usize, dt: T, scales: &[T], boundary: Boundary) -> Result<Self> {
        if len < 2 {
            return Err(Error::TooFewSamples(format!("record of {len} samples")));
        }
        if scales.iter().any(|s| !s.is_finite() || *s < T::zero()) {
            return Err(Error::InvalidScaleGrid("scales must be finite and non-negative".into()));
        }
        let padded = match boundary {
            Boundary::Periodic => len,
            Boundary::Windowed => (2 * len).next_power_of_two(),
        };
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(padded);
        let inverse = planner.plan_fft_inverse(padded);
        let mut filters = Vec::with_capacity(scales.len());
        for &s in scales {
            let spectrum = match boundary {
                Boundary::Periodic => (0..len)
                    .map(|k| Complex::new(periodic_factor(k, len, dt, s), T::zero()))
                    .collect(),
                Boundary::Windowed => {
                    let mut kernel = vec![Complex::new(T::zero(), T::zero()); padded];
                    for lag in 0..len {
                        kernel[lag] = bandlimited_cauchy(lag as i64, dt, s) * dt;
                        if lag > 0 {
                            kernel[padded - lag] = bandlimited_cauchy(-(lag as i64), dt, s) * dt;
                        }
                    }
                    forward.process(&mut kernel);
                    kernel
                }
            };
            filters.push(spectrum);
        }
        Ok(Self {
            boundary,
            len,
            padded,
            forward,
            inverse,
            filters,
            scratch: vec![Complex::new(T::zero(), T::zero()); padded],
        })
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn scale_count(&self) -> usize {
        self.filters.len()
    }

    /// Transforms one real fluctuation channel; returns `X'(t + i s)` for
    /// every scale of the bank, without any static part.
    pub fn apply(&mut self, fluctuation: &[T]) -> Vec<Vec<Complex<T>>> {
        assert_eq!(fluctuation.len(), self.len, "record length does not match filter bank");
        let zero = Complex::new(T::zero(), T::zero());
        let mut spectrum = vec![zero; self.padded];
        for (d, &v) in spectrum.iter_mut().zip(fluctuation) {
            *d = Complex::new(v, T::zero());
        }
        self.forward.process(&mut spectrum);
        let norm = T::one() / T::from_index(self.padded);
        let mut out = Vec::with_capacity(self.filters.len());
        for filter in &self.filters {
            for ((d, a), f) in self.scratch.iter_mut().zip(&spectrum).zip(filter) {
                *d = *a * *f;
            }
            self.inverse.process(&mut self.scratch);
            out.push(self.scratch[..self.len].iter().map(|z| *z * norm).collect());
        }
        out
    }
}

/// Analytic signal of `x` at each scale of `grid`, zero outside the record.
pub fn analytic_transform<T: Real>(
    x: &RealSignal<T>,
    grid: &ScaleGrid<T>,
) -> Result<Vec<AnalyticSignal<T>>> {
    analytic_transform_with(x, grid, Boundary::Windowed)
}

/// Analytic signal of `x` at each scale of `grid` under the given boundary
/// treatment. The static part passes through unchanged. If the grid requests
/// the static limit, a final entry with `scale = ∞` holding `X∞` is appended.
pub fn analytic_transform_with<T: Real>(
    x: &RealSignal<T>,
    grid: &ScaleGrid<T>,
    boundary: Boundary,
) -> Result<Vec<AnalyticSignal<T>>> {
    let mut bank = ScaleFilterBank::new(x.len(), x.dt(), grid.scales(), boundary)?;
    let dc = x.dc();
    let per_channel: Vec<Vec<Vec<Complex<T>>>> = (0..x.dim())
        .map(|c| {
            let mut scaled = bank.apply(&x.fluctuation(c));
            for series in &mut scaled {
                for z in series.iter_mut() {
                    z.re = z.re + dc[c];
                }
            }
            scaled
        })
        .collect();
    let mut out: Vec<AnalyticSignal<T>> = grid
        .scales()
        .iter()
        .enumerate()
        .map(|(k, &s)| AnalyticSignal {
            channels: per_channel.iter().map(|ch| ch[k].clone()).collect(),
            dt: x.dt(),
            t0: x.t0(),
            scale: s,
            dc: dc.clone(),
            boundary,
        })
        .collect();
    if grid.includes_static_limit {
        out.push(AnalyticSignal {
            channels: dc.iter().map(|&d| vec![Complex::new(d, T::zero()); x.len()]).collect(),
            dt: x.dt(),
            t0: x.t0(),
            scale: T::infinity(),
            dc: dc.clone(),
            boundary,
        });
    }
    Ok(out)
}

/// Sharp-time Hilbert transform of the fluctuation, computed spectrally with
/// the multiplier `−i·sgn(ω)`. DC and Nyquist content map to zero.
pub fn hilbert_sharp<T: Real>(x: &RealSignal<T>, boundary: Boundary) -> Result<RealSignal<T>> {
    let mut bank = ScaleFilterBank::new(x.len(), x.dt(), &[T::zero()], boundary)?;
    let channels = (0..x.dim())
        .map(|c| {
            // DC and Nyquist bins carry real weights, so they drop out of Im
            let z = bank.apply(&x.fluctuation(c)).remove(0);
            z.iter().map(|v| v.im).collect::<Vec<T>>()
        })
        .collect();
    RealSignal::new(channels, x.dt(), x.t0())
}

/// Result of the direct Cauchy-kernel quadrature.
#[derive(Debug, Clone)]
pub struct DirectTransform<T> {
    pub signal: AnalyticSignal<T>,
    /// Bound on the difference from the spectral windowed transform: the
    /// kernel's content above the Nyquist frequency plus the trapezoid end
    /// weights, plus a roundoff allowance.
    pub quadrature_bound: T,
    /// Estimate of the contribution of signal beyond the window, taking the
    /// edge amplitudes to persist for one more window length under the
    /// `O(1/t)` kernel tail.
    pub truncation_bound: T,
}

impl<T: Real> DirectTransform<T> {
    pub fn combined_bound(&self) -> T {
        self.quadrature_bound + self.truncation_bound
    }
}

/// `X(t + i s) = X∞ + Σ_{t'} C_s(t − t') X'(t') dt` by the trapezoid rule over
/// the sampled window. `O(N²)`; intended as an independent check.
pub fn analytic_transform_direct<T: Real>(x: &RealSignal<T>, s: T) -> Result<DirectTransform<T>> {
    if !(s > T::zero()) {
        return Err(Error::KernelOnBoundary(s.to_f64_lossy()));
    }
    let n = x.len();
    let dt = x.dt();
    let half = T::lit(0.5);
    let dc = x.dc();
    let pi = T::PI();
    let window = x.duration();
    let mut quadrature_bound = T::zero();
    let mut truncation_bound = T::zero();
    let mut channels = Vec::with_capacity(x.dim());
    for c in 0..x.dim() {
        let fl = x.fluctuation(c);
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let ti = x.time(i);
            let mut acc = Complex::new(T::zero(), T::zero());
            for (j, &v) in fl.iter().enumerate() {
                let w = if j == 0 || j == n - 1 { half } else { T::one() };
                let k = cauchy_kernel(ti - x.time(j), s)?.cauchy;
                acc = acc + k * (v * w * dt);
            }
            out.push(acc + dc[c]);
        }
        channels.push(out);

        let l1 = fl.iter().fold(T::zero(), |a, v| a + v.abs()) * dt;
        let edges = fl[0].abs() + fl[n - 1].abs();
        let aliasing = (-pi * s / dt).exp() / (pi * s) * l1;
        let ends = half * dt * edges / (pi * s);
        let roundoff = T::epsilon() * T::lit(16.0) * T::from_index(n) * l1 / (pi * s);
        quadrature_bound = quadrature_bound.max(aliasing + ends + roundoff);
        truncation_bound =
            truncation_bound.max(edges * window / (pi * (s * s + window * window).sqrt()));
    }
    Ok(DirectTransform {
        signal: AnalyticSignal {
            channels,
            dt,
            t0: x.t0(),
            scale: s,
            dc,
            boundary: Boundary::Windowed,
        },
        quadrature_bound,
        truncation_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rustfft::FftPlanner;
    use std::f64::consts::PI;

    fn rel_l2(a: &[Complex<f64>], b: &[Complex<f64>]) -> f64 {
        let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
        let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
        (num / den).sqrt()
    }

    #[test]
    fn bandlimited_kernel_matches_its_defining_integral() {
        // oracle: midpoint quadrature of (1/π)∫_0^Ω e^{iωτ} dω
        let dt = 0.5;
        for &s in &[0.0, 0.3, 2.0] {
            for lag in -5i64..=5 {
                let tau = Complex::new(lag as f64 * dt, s);
                let omega = PI / dt;
                let m = 20_000;
                let h = omega / m as f64;
                let mut acc = Complex::new(0.0, 0.0);
                for k in 0..m {
                    let w = (k as f64 + 0.5) * h;
                    acc += (Complex::<f64>::i() * tau * w).exp() * h;
                }
                acc /= PI;
                let k = bandlimited_cauchy(lag, dt, s);
                assert!((k - acc).norm() < 1e-7, "lag {lag} s {s}: {k} vs {acc}");
            }
        }
    }

    #[test]
    fn periodic_cosine_maps_to_damped_phasor() {
        let n = 256;
        let dt = 0.05;
        let w0 = 2.0 * PI * 7.0 / (n as f64 * dt);
        let (a, phi) = (1.7, 0.4);
        let x = RealSignal::from_fn(n, dt, 0.0, |t: f64| a * (w0 * t + phi).cos()).unwrap();
        let grid = ScaleGrid::new(vec![0.0, 0.1, 0.5]).unwrap();
        let out = analytic_transform_with(&x, &grid, Boundary::Periodic).unwrap();
        for sig in &out {
            let expect: Vec<_> = (0..n)
                .map(|k| Complex::from_polar(a * (-w0 * sig.scale).exp(), w0 * x.time(k) + phi))
                .collect();
            assert!(rel_l2(&sig.channels[0], &expect) < 1e-12);
        }
    }

    #[test]
    fn periodic_output_is_one_sided() {
        let n = 128;
        let x = RealSignal::from_fn(n, 0.1, 0.0, |t: f64| (3.0 * t).sin() + 0.3 * (11.0 * t).cos() + 0.1 * t).unwrap();
        let grid = ScaleGrid::new(vec![0.0, 0.2]).unwrap();
        let out = analytic_transform_with(&x, &grid, Boundary::Periodic).unwrap();
        let mut planner = FftPlanner::<f64>::new();
        let fft = planner.plan_fft_forward(n);
        for sig in out {
            let mut buf = sig.channels[0].clone();
            fft.process(&mut buf);
            let peak = buf.iter().map(|z| z.norm()).fold(0.0, f64::max);
            for z in &buf[n / 2 + 1..] {
                assert!(z.norm() <= 1e-12 * peak);
            }
        }
    }

    #[test]
    fn reconstruction_at_zero_scale() {
        let n = 300;
        let x = RealSignal::from_fn(n, 0.02, -3.0, |t: f64| (-(t * t)).exp() * (9.0 * t).cos() + 0.2 * t).unwrap();
        for b in [Boundary::Windowed, Boundary::Periodic] {
            let out = analytic_transform_with(&x, &ScaleGrid::single(0.0).unwrap(), b).unwrap();
            let num: f64 = out[0].channels[0].iter().zip(x.channel(0)).map(|(z, v)| (z.re - v).powi(2)).sum();
            let den: f64 = x.channel(0).iter().map(|v| v * v).sum();
            assert!((num / den).sqrt() < 1e-10, "{b:?}");
        }
    }

    #[test]
    fn static_part_passes_through() {
        let x = RealSignal::from_fn(64, 0.1, 0.0, |_| 2.5f64).unwrap();
        let x = crate::kernel::split_dc(&x, (0.0, 6.3)).unwrap();
        let grid = ScaleGrid::new(vec![0.0, 1.0, 10.0]).unwrap().with_static_limit();
        let out = analytic_transform(&x, &grid).unwrap();
        assert_eq!(out.len(), 4);
        assert!(out[3].scale.is_infinite());
        for sig in out {
            assert!(sig.channels[0].iter().all(|z| (z - 2.5).norm() < 1e-12));
        }
    }

    #[test]
    fn filter_composition_is_a_semigroup() {
        let n = 512;
        let x = RealSignal::from_fn(n, 0.05, 0.0, |t: f64| (-(t - 12.0).powi(2)).exp() * (5.0 * t).sin()).unwrap();
        let (s1, s2) = (0.2, 0.35);
        let direct = analytic_transform_with(&x, &ScaleGrid::single(s1 + s2).unwrap(), Boundary::Periodic).unwrap();
        let first = analytic_transform_with(&x, &ScaleGrid::single(s1).unwrap(), Boundary::Periodic).unwrap();
        // Poisson smoothing by s2 of a one-sided record is the filter e^{-ωs2}
        let mut planner = FftPlanner::<f64>::new();
        let mut buf = first[0].channels[0].clone();
        planner.plan_fft_forward(n).process(&mut buf);
        for (k, z) in buf.iter_mut().enumerate() {
            let k_signed = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
            let w = 2.0 * PI * k_signed / (n as f64 * 0.05);
            *z *= (-w.abs() * s2).exp() / n as f64;
        }
        planner.plan_fft_inverse(n).process(&mut buf);
        assert!(rel_l2(&buf, &direct[0].channels[0]) < 1e-9);
    }

    #[test]
    fn hilbert_of_cosine_is_sine() {
        let n = 400;
        let dt = 0.01;
        let w0 = 2.0 * PI * 5.0 / (n as f64 * dt);
        let x = RealSignal::from_fn(n, dt, 0.0, |t: f64| (w0 * t).cos()).unwrap();
        let h = hilbert_sharp(&x, Boundary::Periodic).unwrap();
        for k in 0..n {
            assert!((h.channel(0)[k] - (w0 * x.time(k)).sin()).abs() < 1e-12);
        }
        let hh = hilbert_sharp(&h, Boundary::Periodic).unwrap();
        for k in 0..n {
            assert!((hh.channel(0)[k] + x.channel(0)[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn direct_requires_positive_scale() {
        let x = RealSignal::from_fn(16, 0.1, 0.0, |t: f64| t).unwrap();
        assert!(analytic_transform_direct(&x, 0.0).is_err());
    }

    #[test]
    fn direct_of_constant_returns_constant() {
        let x = RealSignal::from_fn(40, 0.1, 0.0, |_| -1.25).unwrap();
        let x = crate::kernel::split_dc(&x, (0.0, 3.9)).unwrap();
        let d = analytic_transform_direct(&x, 0.4).unwrap();
        assert!(d.signal.channels[0].iter().all(|z| (z + 1.25).norm() < 1e-13));
    }

    #[test]
    fn direct_matches_spectral_within_bound() {
        let x = RealSignal::from_fn(400, 0.05, -10.0, |t: f64| (-(t * t) / 2.0).exp() * (4.0 * t).cos()).unwrap();
        for &s in &[0.5, 1.0, 2.0] {
            let d = analytic_transform_direct(&x, s).unwrap();
            let spec = analytic_transform(&x, &ScaleGrid::single(s).unwrap()).unwrap();
            let err = d.signal.channels[0]
                .iter()
                .zip(&spec[0].channels[0])
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            assert!(err <= d.combined_bound(), "s={s}: {err} > {}", d.combined_bound());
        }
    }
}
