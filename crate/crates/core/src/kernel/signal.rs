use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// How a finite record is continued outside its sampled window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Boundary {
    /// Zero outside the window. Convolutions are aperiodic (zero-padded FFT).
    #[default]
    Windowed,
    /// The record is one period of a periodic signal. Filters act bin by bin
    /// on the DFT of the record.
    Periodic,
}

/// Real vector-valued time series on a uniform grid, with an optional static
/// (DC) part.
///
/// `channels[c][n]` is component `c` at time `t0 + n·dt`. The samples hold
/// the full signal; the fluctuation is `samples − dc`.
#[derive(Debug, Clone, PartialEq)]
pub struct RealSignal<T> {
    channels: Vec<Vec<T>>,
    dt: T,
    t0: T,
    dc: Option<Vec<T>>,
}

impl<T: Real> RealSignal<T> {
    pub fn new(channels: Vec<Vec<T>>, dt: T, t0: T) -> Result<Self> {
        if channels.is_empty() {
            return Err(Error::InvalidSignal("signal has no components".into()));
        }
        let n = channels[0].len();
        if n < 2 {
            return Err(Error::InvalidSignal(format!("need at least 2 samples, got {n}")));
        }
        if channels.iter().any(|c| c.len() != n) {
            return Err(Error::InvalidSignal("components have different lengths".into()));
        }
        if !(dt > T::zero()) || !dt.is_finite() {
            return Err(Error::InvalidSignal(format!("time step must be positive, got {dt}")));
        }
        if !t0.is_finite() {
            return Err(Error::InvalidSignal("start time is not finite".into()));
        }
        if channels.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSignal("non-finite sample".into()));
        }
        Ok(Self { channels, dt, t0, dc: None })
    }

    /// Single-component signal.
    pub fn scalar(samples: Vec<T>, dt: T, t0: T) -> Result<Self> {
        Self::new(vec![samples], dt, t0)
    }

    /// Samples `f` at `t0 + n·dt` for `n < len`.
    pub fn from_fn(len: usize, dt: T, t0: T, f: impl Fn(T) -> T) -> Result<Self> {
        let samples = (0..len).map(|n| f(t0 + dt * T::from_index(n))).collect();
        Self::scalar(samples, dt, t0)
    }

    pub fn with_dc(mut self, dc: Vec<T>) -> Result<Self> {
        if dc.len() != self.dim() {
            return Err(Error::InvalidSignal(format!(
                "static part has {} components, signal has {}",
                dc.len(),
                self.dim()
            )));
        }
        self.dc = Some(dc);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.channels[0].len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dim(&self) -> usize {
        self.channels.len()
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn t0(&self) -> T {
        self.t0
    }

    pub fn time(&self, n: usize) -> T {
        self.t0 + self.dt * T::from_index(n)
    }

    /// Duration covered by the record, `len·dt`.
    pub fn duration(&self) -> T {
        self.dt * T::from_index(self.len())
    }

    pub fn channels(&self) -> &[Vec<T>] {
        &self.channels
    }

    pub fn channel(&self, c: usize) -> &[T] {
        &self.channels[c]
    }

    /// Static part; zero when none was supplied.
    pub fn dc(&self) -> Vec<T> {
        self.dc.clone().unwrap_or_else(|| vec![T::zero(); self.dim()])
    }

    pub fn has_dc(&self) -> bool {
        self.dc.is_some()
    }

    /// Fluctuating part of component `c`.
    pub fn fluctuation(&self, c: usize) -> Vec<T> {
        let d = self.dc.as_ref().map_or(T::zero(), |d| d[c]);
        self.channels[c].iter().map(|&v| v - d).collect()
    }

    /// Discrete `Σ_n |X'(t_n)|² dt`, summed over components.
    pub fn fluctuation_norm_sq(&self) -> T {
        (0..self.dim())
            .map(|c| self.fluctuation(c).iter().fold(T::zero(), |a, &v| a + v * v) * self.dt)
            .fold(T::zero(), |a, b| a + b)
    }
}

/// Complex samples of an analytic signal at one scale `s`, i.e. the values
/// `X(t + i s)` for `t` on the sampling grid.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticSignal<T> {
    pub channels: Vec<Vec<Complex<T>>>,
    pub dt: T,
    pub t0: T,
    pub scale: T,
    /// Static part that was passed through unchanged.
    pub dc: Vec<T>,
    pub boundary: Boundary,
}

impl<T: Real> AnalyticSignal<T> {
    pub fn len(&self) -> usize {
        self.channels.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.channels.len()
    }

    pub fn time(&self, n: usize) -> T {
        self.t0 + self.dt * T::from_index(n)
    }

    /// Fluctuating part `X − X∞` of component `c`.
    pub fn fluctuation(&self, c: usize) -> Vec<Complex<T>> {
        let d = self.dc[c];
        self.channels[c].iter().map(|&z| z - d).collect()
    }

    /// `Re X'`: the Poisson-smoothed fluctuation.
    pub fn real_fluctuation(&self) -> Vec<Vec<T>> {
        (0..self.dim())
            .map(|c| self.fluctuation(c).iter().map(|z| z.re).collect())
            .collect()
    }

    /// `Im X`: the Hilbert-kernel-smoothed part.
    pub fn imag_part(&self) -> Vec<Vec<T>> {
        self.channels
            .iter()
            .map(|ch| ch.iter().map(|z| z.im).collect())
            .collect()
    }

    /// `|X(t + i s)|²` summed over components, per time sample.
    pub fn modulus_sq(&self) -> Vec<T> {
        let mut out = vec![T::zero(); self.len()];
        for ch in &self.channels {
            for (o, z) in out.iter_mut().zip(ch) {
                *o = *o + z.norm_sqr();
            }
        }
        out
    }
}

/// Ordered set of scales `s ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleGrid<T> {
    scales: Vec<T>,
    /// Request the `s → ∞` (static) limit alongside the finite scales.
    pub includes_static_limit: bool,
}

impl<T: Real> ScaleGrid<T> {
    pub fn new(scales: Vec<T>) -> Result<Self> {
        if scales.is_empty() {
            return Err(Error::InvalidScaleGrid("no scales".into()));
        }
        if scales.iter().any(|s| !s.is_finite() || *s < T::zero()) {
            return Err(Error::InvalidScaleGrid("scales must be finite and non-negative".into()));
        }
        if scales.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidScaleGrid("scales must be strictly increasing".into()));
        }
        Ok(Self { scales, includes_static_limit: false })
    }

    pub fn single(s: T) -> Result<Self> {
        Self::new(vec![s])
    }

    /// `n` logarithmically spaced scales from `min` to `max` inclusive.
    pub fn log_spaced(min: T, max: T, n: usize) -> Result<Self> {
        if !(min > T::zero()) || max <= min || n < 2 {
            return Err(Error::InvalidScaleGrid(format!(
                "log grid needs 0 < min < max and n ≥ 2 (min={min}, max={max}, n={n})"
            )));
        }
        let (lmin, lmax) = (min.ln(), max.ln());
        let last = T::from_index(n - 1);
        let mut scales: Vec<T> = (0..n)
            .map(|k| (lmin + (lmax - lmin) * T::from_index(k) / last).exp())
            .collect();
        scales[0] = min;
        scales[n - 1] = max;
        Self::new(scales)
    }

    /// `n` uniformly spaced scales from `min` to `max` inclusive.
    pub fn linear(min: T, max: T, n: usize) -> Result<Self> {
        if n < 2 || max <= min {
            return Err(Error::InvalidScaleGrid("linear grid needs min < max and n ≥ 2".into()));
        }
        let last = T::from_index(n - 1);
        Self::new((0..n).map(|k| min + (max - min) * T::from_index(k) / last).collect())
    }

    pub fn with_static_limit(mut self) -> Self {
        self.includes_static_limit = true;
        self
    }

    pub fn scales(&self) -> &[T] {
        &self.scales
    }

    pub fn len(&self) -> usize {
        self.scales.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scales.is_empty()
    }

    pub fn max(&self) -> T {
        self.scales[self.scales.len() - 1]
    }
}

/// Values of the Cauchy kernel and its real and imaginary parts at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSample<T> {
    pub poisson: T,
    pub hilbert: T,
    pub cauchy: Complex<T>,
}

/// Cauchy kernel `C_s(t) = i / (π (t + i s))` split into its Poisson and
/// conjugate-Poisson parts.
pub fn cauchy_kernel<T: Real>(t: T, s: T) -> Result<KernelSample<T>> {
    if !(s > T::zero()) {
        return Err(Error::KernelOnBoundary(s.to_f64_lossy()));
    }
    let denom = T::PI() * (s * s + t * t);
    let poisson = s / denom;
    let hilbert = t / denom;
    Ok(KernelSample { poisson, hilbert, cauchy: Complex::new(poisson, hilbert) })
}

/// Estimates the static part as the time mean over `[start, end]` and
/// attaches it to a copy of `x`. The mean is the trapezoid-rule average over
/// the samples inside the window.
pub fn split_dc<T: Real>(x: &RealSignal<T>, window: (T, T)) -> Result<RealSignal<T>> {
    let (start, end) = window;
    let tol = x.dt() * T::lit(1e-9);
    let t_last = x.time(x.len() - 1);
    if start < x.t0() - tol || end > t_last + tol {
        return Err(Error::InvalidSignal(format!(
            "window [{start}, {end}] outside sampled interval [{}, {t_last}]",
            x.t0()
        )));
    }
    let idx: Vec<usize> = (0..x.len())
        .filter(|&n| {
            let t = x.time(n);
            t >= start - tol && t <= end + tol
        })
        .collect();
    if end <= start || idx.len() < 2 {
        return Err(Error::DegenerateWindow);
    }
    let span = x.time(idx[idx.len() - 1]) - x.time(idx[0]);
    let half = T::lit(0.5);
    let dc = x
        .channels()
        .iter()
        .map(|ch| {
            let inner = idx.windows(2).fold(T::zero(), |a, w| a + (ch[w[0]] + ch[w[1]]) * half);
            inner * x.dt() / span
        })
        .collect();
    x.clone().with_dc(dc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn rejects_short_or_bad_signals() {
        assert!(RealSignal::scalar(vec![1.0], 1.0, 0.0).is_err());
        assert!(RealSignal::scalar(vec![1.0, 2.0], 0.0, 0.0).is_err());
        assert!(RealSignal::scalar(vec![1.0, f64::NAN], 1.0, 0.0).is_err());
        assert!(RealSignal::new(vec![vec![1.0, 2.0], vec![1.0]], 1.0, 0.0).is_err());
    }

    #[test]
    fn constant_signal_is_all_static() {
        let n = 64;
        let x = RealSignal::<f64>::new(vec![vec![3.0; n], vec![0.0; n], vec![0.0; n]], 0.1, 0.0).unwrap();
        let y = split_dc(&x, (0.0, 6.3)).unwrap();
        assert_eq!(y.dc(), vec![3.0, 0.0, 0.0]);
        for c in 0..3 {
            assert!(y.fluctuation(c).iter().all(|v| v.abs() < 1e-14));
        }
    }

    #[test]
    fn zero_mean_oscillation_has_no_static_part() {
        let n = 301;
        let dt = 3.0 * 2.0 * PI / 300.0;
        let x = RealSignal::from_fn(n, dt, 0.0, |t: f64| t.cos()).unwrap();
        let y = split_dc(&x, (0.0, x.time(n - 1))).unwrap();
        assert!(y.dc()[0].abs() < 1e-14);
        let diff = y.fluctuation(0).iter().zip(x.channel(0)).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(diff < 1e-14);
    }

    #[test]
    fn offset_cosine_mean_matches_trapezoid_oracle() {
        // oracle: composite trapezoid over a much finer grid of the closed form
        let w = 2.0;
        let period = 2.0 * PI / w;
        let end = 3.0 * period;
        let fine = 30_000;
        let h = end / fine as f64;
        let f = |t: f64| 1.0 + (w * t).cos();
        let oracle = (0..fine).map(|k| 0.5 * (f(k as f64 * h) + f((k + 1) as f64 * h)) * h).sum::<f64>() / end;

        let n = 241;
        let x = RealSignal::from_fn(n, end / (n - 1) as f64, 0.0, f).unwrap();
        let y = split_dc(&x, (0.0, end)).unwrap();
        assert!((y.dc()[0] - oracle).abs() < 1e-12);
        assert!((y.dc()[0] - 1.0).abs() < 1e-12);
        // the fluctuation is cos(ω₀t) and has zero trapezoid mean
        let fl = y.fluctuation(0);
        for (k, v) in fl.iter().enumerate() {
            assert!((v - (w * x.time(k)).cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_window_is_degenerate() {
        let x = RealSignal::from_fn(10, 1.0, 0.0, |t: f64| t).unwrap();
        assert!(matches!(split_dc(&x, (3.2, 3.4)), Err(Error::DegenerateWindow)));
        assert!(matches!(split_dc(&x, (4.0, 4.0)), Err(Error::DegenerateWindow)));
        assert!(split_dc(&x, (-5.0, 4.0)).is_err());
    }

    #[test]
    fn kernel_values() {
        let k = cauchy_kernel(0.0, 1.0).unwrap();
        assert!((k.cauchy.re - 1.0 / PI).abs() < 1e-15 && k.cauchy.im == 0.0);
        let k = cauchy_kernel(1.0, 1.0).unwrap();
        assert!((k.poisson - 0.5 / PI).abs() < 1e-15);
        assert!((k.hilbert - 0.5 / PI).abs() < 1e-15);
        assert!(cauchy_kernel(0.3, 0.0).is_err());
        assert!(cauchy_kernel(0.3, -1.0).is_err());
    }

    #[test]
    fn kernel_is_scale_covariant() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let t: f64 = rng.random_range(-10.0..10.0);
            let s: f64 = rng.random_range(0.01..5.0);
            let a = cauchy_kernel(t, s).unwrap().cauchy;
            let b = cauchy_kernel(t / s, 1.0).unwrap().cauchy / s;
            assert!((a - b).norm() <= 1e-13 * a.norm());
        }
    }

    #[test]
    fn kernel_quadrature_identities() {
        // ∫P_s = 1 and ∫H_s = 0 over a symmetric window, with the analytic tail
        // of P_s added back: ∫_{|t|>b} P_s = 1 − (2/π) atan(b/s).
        let s = 0.7;
        let b = 200.0;
        let n = 400_000;
        let h = 2.0 * b / n as f64;
        let (mut p, mut q) = (0.0, 0.0);
        for k in 0..=n {
            let t = -b + k as f64 * h;
            let w = if k == 0 || k == n { 0.5 } else { 1.0 };
            let ks = cauchy_kernel(t, s).unwrap();
            p += w * ks.poisson * h;
            q += w * ks.hilbert * h;
            assert_eq!(ks.cauchy, Complex::new(ks.poisson, ks.hilbert));
            assert!(ks.poisson > 0.0);
        }
        let expected = 2.0 / PI * (b / s).atan();
        assert!((p - expected).abs() < 1e-8);
        assert!(q.abs() < 1e-10);
    }

    #[test]
    fn scale_grid_validation() {
        assert!(ScaleGrid::new(vec![0.0, 1.0, 2.0]).is_ok());
        assert!(ScaleGrid::new(vec![1.0, 1.0]).is_err());
        assert!(ScaleGrid::new(vec![2.0, 1.0]).is_err());
        assert!(ScaleGrid::new(vec![-1.0, 1.0]).is_err());
        let g = ScaleGrid::<f64>::log_spaced(0.01, 10.0, 32).unwrap();
        assert_eq!(g.len(), 32);
        assert_eq!(g.scales()[0], 0.01);
        assert_eq!(g.max(), 10.0);
        let r0 = g.scales()[1] / g.scales()[0];
        let r1 = g.scales()[31] / g.scales()[30];
        assert!((r0 - r1).abs() < 1e-10);
    }
}
