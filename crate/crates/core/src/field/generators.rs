//! Closed-form Maxwell-consistent fields, with exact analytic continuations
//! where one is available.

use num_complex::Complex;

use super::{AnalyticEMField, EMFieldSample, ScaleStack, StaticFields};
use crate::error::{Error, Result};
use crate::grid::SpaceTimeGrid;
use crate::kernel::{Boundary, RealSignal, ScaleFilterBank};
use crate::scalar::Real;
use crate::stencil::FieldValue;

/// Minimum nodes per wavelength and per period.
const POINTS_PER_CYCLE: f64 = 16.0;

pub trait FieldGenerator<T: Real> {
    fn sample(&self, grid: &SpaceTimeGrid<T>) -> Result<EMFieldSample<T>>;
}

/// Generators whose analytic continuation is known in closed form.
pub trait AnalyticGenerator<T: Real>: FieldGenerator<T> {
    fn analytic(&self, grid: &SpaceTimeGrid<T>, s: T) -> Result<AnalyticEMField<T>>;

    fn stack(&self, grid: &SpaceTimeGrid<T>, scales: &[T]) -> Result<ScaleStack<T>> {
        ScaleStack::new(scales.iter().map(|&s| self.analytic(grid, s)).collect::<Result<_>>()?)
    }
}

fn fill_real<T: Real>(grid: &SpaceTimeGrid<T>, f: impl Fn([T; 3], T) -> ([T; 3], [T; 3])) -> EMFieldSample<T> {
    let mut out = EMFieldSample::zeros(*grid);
    for idx in 0..grid.len() {
        let [ix, iy, iz, it] = grid.unravel(idx);
        let (e, h) = f(grid.position(ix, iy, iz), grid.time(it));
        for c in 0..3 {
            out.e[c][idx] = e[c];
            out.h[c][idx] = h[c];
        }
    }
    out
}

type CVec3<T> = [Complex<T>; 3];

fn fill_analytic<T: Real>(
    grid: &SpaceTimeGrid<T>,
    s: T,
    f: impl Fn([T; 3], Complex<T>) -> (CVec3<T>, CVec3<T>),
) -> AnalyticEMField<T> {
    let mut out = AnalyticEMField::zeros(*grid, s);
    for idx in 0..grid.len() {
        let [ix, iy, iz, it] = grid.unravel(idx);
        let (e, h) = f(grid.position(ix, iy, iz), Complex::new(grid.time(it), s));
        for c in 0..3 {
            out.e[c][idx] = e[c];
            out.h[c][idx] = h[c];
        }
    }
    out.dc = Some(StaticFields::zeros(grid.spatial_len()));
    out
}

fn check_finite_scale<T: Real>(s: T) -> Result<()> {
    if !s.is_finite() || s < T::zero() {
        return Err(Error::InvalidScaleGrid(format!("scale {s} must be finite and non-negative")));
    }
    Ok(())
}

fn check_resolution<T: Real>(grid: &SpaceTimeGrid<T>, k: T, omega: T) -> Result<()> {
    let ppc = T::lit(POINTS_PER_CYCLE);
    if grid.nz > 1 {
        let need = T::TAU() / (k * ppc);
        if grid.dz > need {
            return Err(Error::UnderResolved(format!("dz = {} but 16 points per wavelength need dz ≤ {need}", grid.dz)));
        }
    }
    if grid.nt > 1 {
        let need = T::TAU() / (omega * ppc);
        if grid.dt > need {
            return Err(Error::UnderResolved(format!("dt = {} but 16 points per period need dt ≤ {need}", grid.dt)));
        }
    }
    Ok(())
}

fn cis<T: Real>(tau: Complex<T>, omega: T) -> Complex<T> {
    (Complex::<T>::i() * tau * omega).exp()
}

/// `E = x̂ E₀ sin kz cos ωt`, `H = −ŷ E₀ cos kz sin ωt`, `ω = k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StandingWave<T> {
    pub e0: T,
    pub k: T,
}

impl<T: Real> StandingWave<T> {
    pub fn new(e0: T, k: T) -> Result<Self> {
        if !(k > T::zero()) || !k.is_finite() || !e0.is_finite() {
            return Err(Error::InvalidModes(format!("standing wave needs k > 0 and finite E0 (k={k}, E0={e0})")));
        }
        Ok(Self { e0, k })
    }

    pub fn omega(&self) -> T {
        self.k
    }
}

impl<T: Real> FieldGenerator<T> for StandingWave<T> {
    fn sample(&self, grid: &SpaceTimeGrid<T>) -> Result<EMFieldSample<T>> {
        check_resolution(grid, self.k, self.omega())?;
        let (e0, k, w) = (self.e0, self.k, self.omega());
        let z = T::zero();
        Ok(fill_real(grid, |r, t| {
            ([e0 * (k * r[2]).sin() * (w * t).cos(), z, z], [z, -e0 * (k * r[2]).cos() * (w * t).sin(), z])
        }))
    }
}

impl<T: Real> AnalyticGenerator<T> for StandingWave<T> {
    fn analytic(&self, grid: &SpaceTimeGrid<T>, s: T) -> Result<AnalyticEMField<T>> {
        check_resolution(grid, self.k, self.omega())?;
        check_finite_scale(s)?;
        let (e0, k, w) = (self.e0, self.k, self.omega());
        let z = Complex::new(T::zero(), T::zero());
        Ok(fill_analytic(grid, s, |r, tau| {
            let phase = cis(tau, w);
            (
                [phase * (e0 * (k * r[2]).sin()), z, z],
                [z, Complex::<T>::i() * phase * (e0 * (k * r[2]).cos()), z],
            )
        }))
    }
}

pub fn gen_standing_wave<T: Real>(grid: &SpaceTimeGrid<T>, e0: T, k: T) -> Result<EMFieldSample<T>> {
    StandingWave::new(e0, k)?.sample(grid)
}

/// One standing-wave mode with wavenumber `ω`, polarized at angle
/// `polarization` from `x̂` in the `xy`-plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode<T> {
    pub omega: T,
    pub amplitude: T,
    pub polarization: T,
}

/// Superposition of co-located standing waves along `z`.
#[derive(Debug, Clone, PartialEq)]
pub struct Multimode<T> {
    modes: Vec<Mode<T>>,
}

impl<T: Real> Multimode<T> {
    pub fn new(modes: Vec<Mode<T>>) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::InvalidModes("no modes".into()));
        }
        if modes.iter().any(|m| !(m.omega > T::zero()) || !m.omega.is_finite() || !m.amplitude.is_finite()) {
            return Err(Error::InvalidModes("frequencies must be positive and amplitudes finite".into()));
        }
        if modes.windows(2).any(|w| !(w[1].omega > w[0].omega)) {
            return Err(Error::InvalidModes("frequencies must be strictly increasing".into()));
        }
        Ok(Self { modes })
    }

    pub fn modes(&self) -> &[Mode<T>] {
        &self.modes
    }

    fn check(&self, grid: &SpaceTimeGrid<T>) -> Result<()> {
        let top = self.modes[self.modes.len() - 1].omega;
        check_resolution(grid, top, top)
    }
}

impl<T: Real> FieldGenerator<T> for Multimode<T> {
    fn sample(&self, grid: &SpaceTimeGrid<T>) -> Result<EMFieldSample<T>> {
        self.check(grid)?;
        Ok(fill_real(grid, |r, t| {
            let mut e = [T::zero(); 3];
            let mut h = [T::zero(); 3];
            for m in &self.modes {
                let (sp, cp) = m.polarization.sin_cos();
                let ez = m.amplitude * (m.omega * r[2]).sin() * (m.omega * t).cos();
                let hz = -m.amplitude * (m.omega * r[2]).cos() * (m.omega * t).sin();
                e[0] = e[0] + ez * cp;
                e[1] = e[1] + ez * sp;
                h[0] = h[0] - hz * sp;
                h[1] = h[1] + hz * cp;
            }
            (e, h)
        }))
    }
}

impl<T: Real> AnalyticGenerator<T> for Multimode<T> {
    fn analytic(&self, grid: &SpaceTimeGrid<T>, s: T) -> Result<AnalyticEMField<T>> {
        self.check(grid)?;
        check_finite_scale(s)?;
        Ok(fill_analytic(grid, s, |r, tau| {
            let zero = Complex::new(T::zero(), T::zero());
            let mut e = [zero; 3];
            let mut h = [zero; 3];
            for m in &self.modes {
                let (sp, cp) = m.polarization.sin_cos();
                let phase = cis(tau, m.omega);
                let ez = phase * (m.amplitude * (m.omega * r[2]).sin());
                let hz = Complex::<T>::i() * phase * (m.amplitude * (m.omega * r[2]).cos());
                e[0] = e[0] + ez * cp;
                e[1] = e[1] + ez * sp;
                h[0] = h[0] - hz * sp;
                h[1] = h[1] + hz * cp;
            }
            (e, h)
        }))
    }
}

pub fn gen_multimode<T: Real>(grid: &SpaceTimeGrid<T>, modes: &[Mode<T>]) -> Result<EMFieldSample<T>> {
    Multimode::new(modes.to_vec())?.sample(grid)
}

/// Lorentzian-windowed carrier `p(t) = Re 𝐠(t)` with
/// `𝐠(τ) = A·ia·e^{iω₀τ} / (τ + ia)`, analytic in the upper half plane and
/// free of negative frequencies, so `𝐠` is its own analytic signal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzianPulse<T> {
    pub amplitude: T,
    pub width: T,
    pub carrier: T,
    /// Centre time of the pulse.
    pub t0: T,
}

impl<T: Real> LorentzianPulse<T> {
    pub fn new(amplitude: T, width: T, carrier: T, t0: T) -> Result<Self> {
        if !(width > T::zero()) || carrier < T::zero() || !amplitude.is_finite() || !carrier.is_finite() {
            return Err(Error::InvalidSignal("Lorentzian pulse needs width > 0 and carrier ≥ 0".into()));
        }
        Ok(Self { amplitude, width, carrier, t0 })
    }

    /// `𝐠, 𝐠', 𝐠''` at complex time `τ`.
    pub fn complex_derivatives(&self, tau: Complex<T>) -> [Complex<T>; 3] {
        let i = Complex::<T>::i();
        let w = self.carrier;
        let u = tau - self.t0 + i * self.width;
        let pre = i * self.width * self.amplitude * cis(tau - self.t0, w);
        let inv = u.inv();
        let two = T::lit(2.0);
        [
            pre * inv,
            pre * (i * w * inv - inv * inv),
            pre * (-(inv * (w * w)) - i * inv * inv * (two * w) + inv * inv * inv * two),
        ]
    }

    pub fn value(&self, t: T) -> T {
        self.complex_derivatives(Complex::new(t, T::zero()))[0].re
    }
}

/// Time dependence of a dipole moment along `ẑ`.
pub trait MomentWaveform<T: Real> {
    /// `p, ṗ, p̈` at real time `t`.
    fn derivatives(&self, t: T) -> [T; 3];

    /// `𝐩, 𝐩', 𝐩''` at complex time `τ`, when the continuation is known.
    fn analytic_derivatives(&self, tau: Complex<T>) -> Option<[Complex<T>; 3]>;

    /// Static moment `p∞`.
    fn static_moment(&self) -> T {
        T::zero()
    }
}

impl<T: Real> MomentWaveform<T> for LorentzianPulse<T> {
    fn derivatives(&self, t: T) -> [T; 3] {
        self.complex_derivatives(Complex::new(t, T::zero())).map(|z| z.re)
    }

    fn analytic_derivatives(&self, tau: Complex<T>) -> Option<[Complex<T>; 3]> {
        Some(self.complex_derivatives(tau))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StaticMoment<T> {
    pub p0: T,
}

impl<T: Real> MomentWaveform<T> for StaticMoment<T> {
    fn derivatives(&self, _t: T) -> [T; 3] {
        [self.p0, T::zero(), T::zero()]
    }

    fn analytic_derivatives(&self, _tau: Complex<T>) -> Option<[Complex<T>; 3]> {
        let z = Complex::new(T::zero(), T::zero());
        Some([Complex::new(self.p0, T::zero()), z, z])
    }

    fn static_moment(&self) -> T {
        self.p0
    }
}

/// Sampled moment `p(t)` with derivatives from centred differences and
/// linear interpolation between samples. Held constant outside the record.
#[derive(Debug, Clone)]
pub struct SampledWaveform<T> {
    signal: RealSignal<T>,
    d1: Vec<T>,
    d2: Vec<T>,
}

impl<T: Real> SampledWaveform<T> {
    pub fn new(signal: RealSignal<T>) -> Result<Self> {
        if signal.dim() != 1 {
            return Err(Error::InvalidSignal("dipole moment waveform must be scalar".into()));
        }
        if signal.len() < 3 {
            return Err(Error::TooFewSamples("waveform needs ≥ 3 samples".into()));
        }
        let p = signal.channel(0);
        let d1 = differentiate(p, signal.dt());
        let d2 = differentiate(&d1, signal.dt());
        Ok(Self { signal, d1, d2 })
    }

    fn interpolate(&self, data: &[T], t: T, outside: T) -> T {
        let u = (t - self.signal.t0()) / self.signal.dt();
        let last = T::from_index(data.len() - 1);
        if u < T::zero() || u > last {
            return outside;
        }
        let k = u.floor().to_usize().unwrap_or(0).min(data.len() - 2);
        let frac = u - T::from_index(k);
        data[k] + (data[k + 1] - data[k]) * frac
    }
}

fn differentiate<T: Real>(f: &[T], h: T) -> Vec<T> {
    use crate::stencil::{centred, one_sided};
    let n = f.len();
    (0..n)
        .map(|k| {
            if k == 0 {
                one_sided(f[0], f[1], f[2], h)
            } else if k == n - 1 {
                one_sided(f[n - 1], f[n - 2], f[n - 3], -h)
            } else {
                centred(f[k - 1], f[k + 1], h)
            }
        })
        .collect()
}

impl<T: Real> MomentWaveform<T> for SampledWaveform<T> {
    fn derivatives(&self, t: T) -> [T; 3] {
        let p = self.signal.channel(0);
        let edge = if t < self.signal.t0() { p[0] } else { p[p.len() - 1] };
        [self.interpolate(p, t, edge), self.interpolate(&self.d1, t, T::zero()), self.interpolate(&self.d2, t, T::zero())]
    }

    fn analytic_derivatives(&self, _tau: Complex<T>) -> Option<[Complex<T>; 3]> {
        None
    }
}

/// Retarded fields of a point dipole `p(t) ẑ` at the origin.
#[derive(Debug, Clone)]
pub struct DipolePulse<W> {
    pub waveform: W,
}

impl<W> DipolePulse<W> {
    pub fn new(waveform: W) -> Self {
        Self { waveform }
    }
}

/// Errors if the closed bounding box of the grid contains the origin.
fn check_origin<T: Real>(grid: &SpaceTimeGrid<T>) -> Result<()> {
    let counts = [grid.nx, grid.ny, grid.nz];
    let spacing = [grid.dx, grid.dy, grid.dz];
    let contains = (0..3).all(|a| {
        let lo = grid.origin[a];
        let hi = lo + spacing[a] * T::from_index(counts[a] - 1);
        lo <= T::zero() && T::zero() <= hi
    });
    if contains {
        return Err(Error::SingularityInGrid);
    }
    Ok(())
}

/// `(E, H)` of a `ẑ` dipole from `p, ṗ, p̈` at retarded time.
fn dipole_fields<T: Real, V: FieldValue<T>>(pos: [T; 3], p: [V; 3]) -> ([V; 3], [V; 3]) {
    let r = (pos[0] * pos[0] + pos[1] * pos[1] + pos[2] * pos[2]).sqrt();
    let n = [pos[0] / r, pos[1] / r, pos[2] / r];
    let k = T::one() / (T::lit(4.0) * T::PI());
    let near = p[0] / (r * r * r) + p[1] / (r * r);
    let far = p[2] / r;
    let mut e = [V::zero(); 3];
    for (i, ei) in e.iter_mut().enumerate() {
        let dz = if i == 2 { T::one() } else { T::zero() };
        *ei = (near * (T::lit(3.0) * n[i] * n[2] - dz) + far * (n[i] * n[2] - dz)) * k;
    }
    let m = (p[1] / (r * r) + far) * k;
    let h = [m * (-n[1]), m * n[0], V::zero()];
    (e, h)
}

fn retarded_distance<T: Real>(pos: [T; 3]) -> T {
    (pos[0] * pos[0] + pos[1] * pos[1] + pos[2] * pos[2]).sqrt()
}

impl<T: Real, W: MomentWaveform<T>> FieldGenerator<T> for DipolePulse<W> {
    fn sample(&self, grid: &SpaceTimeGrid<T>) -> Result<EMFieldSample<T>> {
        check_origin(grid)?;
        Ok(fill_real(grid, |r, t| dipole_fields(r, self.waveform.derivatives(t - retarded_distance(r)))))
    }
}

impl<T: Real, W: MomentWaveform<T>> AnalyticGenerator<T> for DipolePulse<W> {
    fn analytic(&self, grid: &SpaceTimeGrid<T>, s: T) -> Result<AnalyticEMField<T>> {
        check_origin(grid)?;
        check_finite_scale(s)?;
        let probe = Complex::new(grid.origin[3], s);
        if self.waveform.analytic_derivatives(probe).is_none() {
            return Err(Error::InvalidSignal("waveform has no closed-form continuation".into()));
        }
        let mut out = fill_analytic(grid, s, |r, tau| {
            let d = self.waveform.analytic_derivatives(tau - retarded_distance(r)).expect("checked above");
            dipole_fields(r, d)
        });
        let p_inf = self.waveform.static_moment();
        if p_inf != T::zero() {
            let ns = grid.spatial_len();
            let mut dc = StaticFields::zeros(ns);
            for p in 0..ns {
                let [ix, iy, iz, _] = grid.unravel(p);
                let (e, _) = dipole_fields(grid.position(ix, iy, iz), [p_inf, T::zero(), T::zero()]);
                for c in 0..3 {
                    dc.e[c][p] = e[c];
                }
            }
            out.dc = Some(dc);
        }
        Ok(out)
    }
}

pub fn gen_dipole_pulse<T: Real>(grid: &SpaceTimeGrid<T>, moment: RealSignal<T>) -> Result<EMFieldSample<T>> {
    DipolePulse::new(SampledWaveform::new(moment)?).sample(grid)
}

/// Profile of a plane-wave pulse travelling along `+ẑ`.
#[derive(Debug, Clone)]
pub enum PulseEnvelope<T> {
    Lorentzian(LorentzianPulse<T>),
    /// Samples of `f(u)`, looked up exactly at `u = t − z`.
    Sampled(RealSignal<T>),
}

/// Largest `|f|` on the boundary nodes of the grid relative to the peak of
/// the envelope: the part of the pulse cut off by the window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationWarning<T> {
    pub edge_ratio: T,
}

/// `E = x̂ f(t − z)`, `H = ŷ f(t − z)`.
#[derive(Debug, Clone)]
pub struct PlaneWavePulse<T> {
    pub envelope: PulseEnvelope<T>,
}

impl<T: Real> PlaneWavePulse<T> {
    pub fn new(envelope: PulseEnvelope<T>) -> Result<Self> {
        if let PulseEnvelope::Sampled(sig) = &envelope {
            if sig.dim() != 1 {
                return Err(Error::InvalidSignal("pulse envelope must be scalar".into()));
            }
        }
        Ok(Self { envelope })
    }

    /// Record index of `u = t − z` for every `(iz, it)`, requiring the grid to
    /// land on envelope samples.
    fn lookup(&self, sig: &RealSignal<T>, grid: &SpaceTimeGrid<T>) -> Result<Vec<usize>> {
        let h = sig.dt();
        let tol = T::lit(1e-9);
        let as_steps = |v: T, what: &str| -> Result<i64> {
            let q = v / h;
            let r = q.round();
            if (q - r).abs() > tol * r.abs().max(T::one()) {
                return Err(Error::Mismatch(format!("{what} is not a whole number of envelope steps")));
            }
            Ok(r.to_i64().unwrap_or(i64::MAX))
        };
        let step_t = if grid.nt > 1 { as_steps(grid.dt, "dt")? } else { 0 };
        let step_z = if grid.nz > 1 { as_steps(grid.dz, "dz")? } else { 0 };
        let start = as_steps(grid.origin[3] - grid.origin[2] - sig.t0(), "t0 − z0 − envelope start")?;
        let mut out = Vec::with_capacity(grid.nz * grid.nt);
        for it in 0..grid.nt {
            for iz in 0..grid.nz {
                let m = start + step_t * it as i64 - step_z * iz as i64;
                if m < 0 || m >= sig.len() as i64 {
                    return Err(Error::Mismatch("envelope record does not cover t − z over the grid".into()));
                }
                out.push(m as usize);
            }
        }
        Ok(out)
    }

    fn profile(&self, grid: &SpaceTimeGrid<T>) -> Result<Vec<T>> {
        match &self.envelope {
            PulseEnvelope::Lorentzian(p) => Ok((0..grid.nt)
                .flat_map(|it| (0..grid.nz).map(move |iz| (it, iz)))
                .map(|(it, iz)| p.value(grid.time(it) - grid.position(0, 0, iz)[2]))
                .collect()),
            PulseEnvelope::Sampled(sig) => {
                let idx = self.lookup(sig, grid)?;
                Ok(idx.into_iter().map(|m| sig.channel(0)[m]).collect())
            }
        }
    }

    fn analytic_profile(&self, grid: &SpaceTimeGrid<T>, s: T) -> Result<Vec<Complex<T>>> {
        match &self.envelope {
            PulseEnvelope::Lorentzian(p) => Ok((0..grid.nt)
                .flat_map(|it| (0..grid.nz).map(move |iz| (it, iz)))
                .map(|(it, iz)| {
                    let u = grid.time(it) - grid.position(0, 0, iz)[2];
                    p.complex_derivatives(Complex::new(u, s))[0]
                })
                .collect()),
            PulseEnvelope::Sampled(sig) => {
                let idx = self.lookup(sig, grid)?;
                let mut bank = ScaleFilterBank::new(sig.len(), sig.dt(), &[s], Boundary::Windowed)?;
                let dc = sig.dc()[0];
                let filtered = bank.apply(&sig.fluctuation(0)).remove(0);
                Ok(idx.into_iter().map(|m| filtered[m] + dc).collect())
            }
        }
    }

    /// Reports a warning when the pulse is still present on the window edge.
    pub fn truncation(&self, grid: &SpaceTimeGrid<T>) -> Result<Option<TruncationWarning<T>>> {
        let prof = self.profile(grid)?;
        let peak = match &self.envelope {
            PulseEnvelope::Lorentzian(p) => p.amplitude.abs(),
            PulseEnvelope::Sampled(sig) => sig.channel(0).iter().fold(T::zero(), |m, v| m.max(v.abs())),
        };
        if peak == T::zero() {
            return Ok(None);
        }
        let mut edge = T::zero();
        for it in 0..grid.nt {
            for iz in 0..grid.nz {
                let on_edge = (grid.nt > 1 && (it == 0 || it == grid.nt - 1))
                    || (grid.nz > 1 && (iz == 0 || iz == grid.nz - 1));
                if on_edge {
                    edge = edge.max(prof[it * grid.nz + iz].abs());
                }
            }
        }
        let ratio = edge / peak;
        Ok((ratio > T::lit(1e-6)).then_some(TruncationWarning { edge_ratio: ratio }))
    }
}

impl<T: Real> FieldGenerator<T> for PlaneWavePulse<T> {
    fn sample(&self, grid: &SpaceTimeGrid<T>) -> Result<EMFieldSample<T>> {
        let prof = self.profile(grid)?;
        let mut out = EMFieldSample::zeros(*grid);
        for idx in 0..grid.len() {
            let [_, _, iz, it] = grid.unravel(idx);
            let f = prof[it * grid.nz + iz];
            out.e[0][idx] = f;
            out.h[1][idx] = f;
        }
        Ok(out)
    }
}

impl<T: Real> AnalyticGenerator<T> for PlaneWavePulse<T> {
    fn analytic(&self, grid: &SpaceTimeGrid<T>, s: T) -> Result<AnalyticEMField<T>> {
        check_finite_scale(s)?;
        let prof = self.analytic_profile(grid, s)?;
        let mut out = AnalyticEMField::zeros(*grid, s);
        for idx in 0..grid.len() {
            let [_, _, iz, it] = grid.unravel(idx);
            let f = prof[it * grid.nz + iz];
            out.e[0][idx] = f;
            out.h[1][idx] = f;
        }
        if let PulseEnvelope::Sampled(sig) = &self.envelope {
            let mut dc = StaticFields::zeros(grid.spatial_len());
            dc.e[0] = vec![sig.dc()[0]; grid.spatial_len()];
            dc.h[1] = dc.e[0].clone();
            out.dc = Some(dc);
        } else {
            out.dc = Some(StaticFields::zeros(grid.spatial_len()));
        }
        Ok(out)
    }
}

pub fn gen_plane_wave_pulse<T: Real>(
    grid: &SpaceTimeGrid<T>,
    envelope: RealSignal<T>,
) -> Result<(EMFieldSample<T>, Option<TruncationWarning<T>>)> {
    let gen = PlaneWavePulse::new(PulseEnvelope::Sampled(envelope))?;
    let sample = gen.sample(grid)?;
    let warning = gen.truncation(grid)?;
    Ok((sample, warning))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn under_resolved_grid_is_rejected() {
        let grid = SpaceTimeGrid::zt(20, 0.5, 0.0, 20, 0.1, 0.0).unwrap();
        let err = gen_standing_wave(&grid, 1.0, 1.0).unwrap_err();
        assert!(matches!(err, Error::UnderResolved(_)));
    }

    #[test]
    fn single_mode_matches_standing_wave() {
        let grid = SpaceTimeGrid::zt(24, 0.1, 0.3, 24, 0.1, 0.0).unwrap();
        let a = gen_standing_wave::<f64>(&grid, 2.0, 1.5).unwrap();
        let b = gen_multimode(&grid, &[Mode { omega: 1.5, amplitude: 2.0, polarization: 0.0 }]).unwrap();
        for c in 0..3 {
            for (x, y) in a.e[c].iter().zip(&b.e[c]).chain(a.h[c].iter().zip(&b.h[c])) {
                assert!((x - y).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn multimode_rejects_unsorted_or_duplicate_frequencies() {
        let m = |w: f64| Mode { omega: w, amplitude: 1.0, polarization: 0.0 };
        assert!(Multimode::new(vec![m(2.0), m(1.0)]).is_err());
        assert!(Multimode::new(vec![m(1.0), m(1.0)]).is_err());
        assert!(Multimode::new(vec![m(1.0), m(2.0)]).is_ok());
    }

    #[test]
    fn lorentzian_derivatives_match_finite_differences() {
        let p = LorentzianPulse::new(1.3, 0.7, 4.0, 0.2).unwrap();
        let tau = Complex::new(0.4, 0.3);
        let h = 1e-5;
        let d = p.complex_derivatives(tau);
        let dp = p.complex_derivatives(tau + h);
        let dm = p.complex_derivatives(tau - h);
        assert!(((dp[0] - dm[0]) / (2.0 * h) - d[1]).norm() < 1e-7);
        assert!(((dp[1] - dm[1]) / (2.0 * h) - d[2]).norm() < 1e-6);
    }

    #[test]
    fn dipole_refuses_grid_around_origin() {
        let grid = SpaceTimeGrid::new([3, 3, 3, 3], [0.5, 0.5, 0.5, 0.1], [-0.5, -0.5, -0.5, 0.0]).unwrap();
        let gen = DipolePulse::new(StaticMoment { p0: 1.0 });
        assert!(matches!(gen.sample(&grid), Err(Error::SingularityInGrid)));
        let grid = SpaceTimeGrid::new([3, 3, 3, 3], [0.5, 0.5, 0.5, 0.1], [0.5, -0.5, -0.5, 0.0]).unwrap();
        assert!(gen.sample(&grid).is_ok());
    }

    #[test]
    fn static_dipole_has_no_magnetic_field() {
        let grid = SpaceTimeGrid::new([3, 3, 3, 2], [0.5, 0.5, 0.5, 0.1], [1.0, 0.2, -0.4, 0.0]).unwrap();
        let f = DipolePulse::new(StaticMoment { p0: 2.0 }).sample(&grid).unwrap();
        assert!(f.h.iter().all(|c| c.iter().all(|v| *v == 0.0)));
        // on the x axis the static field is −p/(4π r³) ẑ
        let g = SpaceTimeGrid::new([1, 1, 1, 1], [1.0; 4], [2.0, 0.0, 0.0, 0.0]).unwrap();
        let f = DipolePulse::new(StaticMoment { p0: 2.0 }).sample(&g).unwrap();
        let expect = -2.0 / (4.0 * std::f64::consts::PI * 8.0);
        assert!((f.e[2][0] - expect).abs() < 1e-15);
    }

    #[test]
    fn sampled_plane_wave_requires_alignment() {
        let env = RealSignal::from_fn(200, 0.05, -5.0, |u: f64| (-(u * u)).exp()).unwrap();
        let grid = SpaceTimeGrid::zt(10, 0.1, 0.0, 10, 0.05, 0.0).unwrap();
        assert!(gen_plane_wave_pulse(&grid, env.clone()).is_ok());
        let bad = SpaceTimeGrid::zt(10, 0.07, 0.0, 10, 0.05, 0.0).unwrap();
        assert!(gen_plane_wave_pulse(&bad, env).is_err());
    }
}
