//! Sampled electromagnetic fields on a space-time grid, their analytic
//! continuations to complex time, closed-form generators and Maxwell
//! residuals. Heaviside-Lorentz units with `c = 1`.

mod generators;
mod maxwell;

use num_complex::Complex;

pub use generators::{
    gen_dipole_pulse, gen_multimode, gen_plane_wave_pulse, gen_standing_wave, AnalyticGenerator, DipolePulse,
    FieldGenerator, LorentzianPulse, Mode, MomentWaveform, Multimode, PlaneWavePulse, PulseEnvelope,
    SampledWaveform, StandingWave, StaticMoment, TruncationWarning,
};
pub use maxwell::{maxwell_residual, maxwell_residual_analytic, MaxwellResidual, ResidualNorms};

use crate::error::{Error, Result};
use crate::grid::SpaceTimeGrid;
use crate::kernel::{Boundary, ScaleFilterBank, ScaleGrid};
use crate::scalar::Real;

/// Three components, each a flat array over the grid.
pub type Vec3Series<V> = [Vec<V>; 3];
pub type RealFieldSeries<T> = Vec3Series<T>;
pub type AnalyticFieldSeries<T> = Vec3Series<Complex<T>>;

fn zeros3<V: Clone>(n: usize, zero: V) -> Vec3Series<V> {
    [vec![zero.clone(); n], vec![zero.clone(); n], vec![zero; n]]
}

fn check_len<V>(name: &str, v: &[V], n: usize) -> Result<()> {
    if v.len() != n {
        return Err(Error::Mismatch(format!("{name} has {} values, grid has {n}", v.len())));
    }
    Ok(())
}

/// Real fields `E, H, J, ρ` sampled on every node of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct EMFieldSample<T> {
    pub grid: SpaceTimeGrid<T>,
    pub e: RealFieldSeries<T>,
    pub h: RealFieldSeries<T>,
    pub j: RealFieldSeries<T>,
    pub rho: Vec<T>,
}

impl<T: Real> EMFieldSample<T> {
    pub fn zeros(grid: SpaceTimeGrid<T>) -> Self {
        let n = grid.len();
        Self { grid, e: zeros3(n, T::zero()), h: zeros3(n, T::zero()), j: zeros3(n, T::zero()), rho: vec![T::zero(); n] }
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        let n = self.grid.len();
        for (name, series) in [("E", &self.e), ("H", &self.h), ("J", &self.j)] {
            for c in series {
                check_len(name, c, n)?;
            }
        }
        check_len("rho", &self.rho, n)
    }

    /// The ten scalar channels in the order `E, H, J` (x, y, z each), `ρ`.
    pub fn channels(&self) -> [&[T]; 10] {
        [
            &self.e[0], &self.e[1], &self.e[2], &self.h[0], &self.h[1], &self.h[2], &self.j[0], &self.j[1],
            &self.j[2], &self.rho,
        ]
    }

    fn channels_mut(&mut self) -> [&mut Vec<T>; 10] {
        let [e0, e1, e2] = &mut self.e;
        let [h0, h1, h2] = &mut self.h;
        let [j0, j1, j2] = &mut self.j;
        [e0, e1, e2, h0, h1, h2, j0, j1, j2, &mut self.rho]
    }

    /// Time-mean of every channel at every spatial node.
    pub fn time_mean(&self) -> StaticFields<T> {
        let g = &self.grid;
        let (ns, nt) = (g.spatial_len(), g.nt);
        let mean = |ch: &[T]| -> Vec<T> {
            (0..ns)
                .map(|p| (0..nt).fold(T::zero(), |acc, it| acc + ch[p + it * ns]) / T::from_index(nt))
                .collect()
        };
        let ch = self.channels();
        StaticFields {
            e: [mean(ch[0]), mean(ch[1]), mean(ch[2])],
            h: [mean(ch[3]), mean(ch[4]), mean(ch[5])],
            j: [mean(ch[6]), mean(ch[7]), mean(ch[8])],
            rho: mean(ch[9]),
        }
    }
}

/// Time-independent fields per spatial node (length `nx·ny·nz`).
#[derive(Debug, Clone, PartialEq)]
pub struct StaticFields<T> {
    pub e: RealFieldSeries<T>,
    pub h: RealFieldSeries<T>,
    pub j: RealFieldSeries<T>,
    pub rho: Vec<T>,
}

impl<T: Real> StaticFields<T> {
    pub fn zeros(spatial_len: usize) -> Self {
        Self {
            e: zeros3(spatial_len, T::zero()),
            h: zeros3(spatial_len, T::zero()),
            j: zeros3(spatial_len, T::zero()),
            rho: vec![T::zero(); spatial_len],
        }
    }

    pub fn channels(&self) -> [&[T]; 10] {
        [
            &self.e[0], &self.e[1], &self.e[2], &self.h[0], &self.h[1], &self.h[2], &self.j[0], &self.j[1],
            &self.j[2], &self.rho,
        ]
    }

    /// Sum of squares over every channel and node.
    pub fn norm_sq(&self) -> T {
        self.channels().iter().flat_map(|c| c.iter()).fold(T::zero(), |acc, v| acc + *v * *v)
    }
}

/// Analytic fields `𝐄, 𝐇, 𝐉, ρ̂` at one scale `s` on every node of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticEMField<T> {
    pub grid: SpaceTimeGrid<T>,
    pub scale: T,
    pub e: AnalyticFieldSeries<T>,
    pub h: AnalyticFieldSeries<T>,
    pub j: AnalyticFieldSeries<T>,
    pub rho: Vec<Complex<T>>,
    /// Static part carried by the real component, when known.
    pub dc: Option<StaticFields<T>>,
}

impl<T: Real> AnalyticEMField<T> {
    pub fn zeros(grid: SpaceTimeGrid<T>, scale: T) -> Self {
        let n = grid.len();
        let z = Complex::new(T::zero(), T::zero());
        Self { grid, scale, e: zeros3(n, z), h: zeros3(n, z), j: zeros3(n, z), rho: vec![z; n], dc: None }
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        let n = self.grid.len();
        for (name, series) in [("E", &self.e), ("H", &self.h), ("J", &self.j)] {
            for c in series {
                check_len(name, c, n)?;
            }
        }
        check_len("rho", &self.rho, n)
    }

    pub fn channels(&self) -> [&[Complex<T>]; 10] {
        [
            &self.e[0], &self.e[1], &self.e[2], &self.h[0], &self.h[1], &self.h[2], &self.j[0], &self.j[1],
            &self.j[2], &self.rho,
        ]
    }

    fn channels_mut(&mut self) -> [&mut Vec<Complex<T>>; 10] {
        let [e0, e1, e2] = &mut self.e;
        let [h0, h1, h2] = &mut self.h;
        let [j0, j1, j2] = &mut self.j;
        [e0, e1, e2, h0, h1, h2, j0, j1, j2, &mut self.rho]
    }

    /// Real part: the Poisson-smoothed field `𝐗₁`.
    pub fn real_part(&self) -> EMFieldSample<T> {
        self.map_parts(|z| z.re)
    }

    /// Imaginary part: the Hilbert-kernel-smoothed field `𝐗₂`.
    pub fn imag_part(&self) -> EMFieldSample<T> {
        self.map_parts(|z| z.im)
    }

    fn map_parts(&self, f: impl Fn(&Complex<T>) -> T) -> EMFieldSample<T> {
        let mut out = EMFieldSample::zeros(self.grid);
        for (dst, src) in out.channels_mut().into_iter().zip(self.channels()) {
            *dst = src.iter().map(&f).collect();
        }
        out
    }

    /// Builds an analytic field whose real and imaginary parts are `re` and `im`.
    pub fn from_parts(re: &EMFieldSample<T>, im: &EMFieldSample<T>, scale: T) -> Result<Self> {
        if re.grid != im.grid {
            return Err(Error::Mismatch("real and imaginary parts live on different grids".into()));
        }
        let mut out = Self::zeros(re.grid, scale);
        for ((dst, a), b) in out.channels_mut().into_iter().zip(re.channels()).zip(im.channels()) {
            *dst = a.iter().zip(b).map(|(x, y)| Complex::new(*x, *y)).collect();
        }
        Ok(out)
    }

    /// Largest channel-wise distance to `other` (max-norm).
    pub fn max_abs_diff(&self, other: &Self) -> T {
        let mut worst = T::zero();
        for (a, b) in self.channels().iter().zip(other.channels()) {
            for (x, y) in a.iter().zip(b) {
                worst = worst.max((*x - *y).norm());
            }
        }
        worst
    }
}

/// Analytic fields of one sample at a strictly increasing list of scales.
#[derive(Debug, Clone)]
pub struct ScaleStack<T> {
    pub fields: Vec<AnalyticEMField<T>>,
}

impl<T: Real> ScaleStack<T> {
    pub fn new(fields: Vec<AnalyticEMField<T>>) -> Result<Self> {
        let Some(first) = fields.first() else {
            return Err(Error::InvalidScaleGrid("empty scale stack".into()));
        };
        if fields.iter().any(|f| f.grid != first.grid) {
            return Err(Error::Mismatch("scale stack mixes grids".into()));
        }
        if fields.windows(2).any(|w| !(w[1].scale > w[0].scale)) {
            return Err(Error::InvalidScaleGrid("scales must be strictly increasing".into()));
        }
        Ok(Self { fields })
    }

    pub fn scales(&self) -> Vec<T> {
        self.fields.iter().map(|f| f.scale).collect()
    }

    pub fn grid(&self) -> &SpaceTimeGrid<T> {
        &self.fields[0].grid
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }
}

/// How the static part of a sampled field is chosen before filtering.
#[derive(Debug, Clone)]
pub enum DcPolicy<T> {
    /// Treat the whole signal as fluctuation.
    Zero,
    /// Use the arithmetic time-mean at each node (the DFT zero bin).
    TimeMean,
    Given(StaticFields<T>),
}

/// Applies the time-scale transform to every component of `f` at every node.
///
/// The static part selected by `dc` is removed before filtering and restored
/// in the real part. When `scales` requests the static limit a final field at
/// `s = ∞` carrying only the static part is appended.
pub fn analytic_fields<T: Real>(
    f: &EMFieldSample<T>,
    scales: &ScaleGrid<T>,
    boundary: Boundary,
    dc: &DcPolicy<T>,
) -> Result<ScaleStack<T>> {
    f.validate()?;
    let g = f.grid;
    let (ns, nt) = (g.spatial_len(), g.nt);
    let statics = match dc {
        DcPolicy::Zero => None,
        DcPolicy::TimeMean => Some(f.time_mean()),
        DcPolicy::Given(s) => {
            for c in s.channels() {
                check_len("static field", c, ns)?;
            }
            Some(s.clone())
        }
    };
    let mut bank = ScaleFilterBank::new(nt, g.dt, scales.scales(), boundary)?;
    let mut out: Vec<AnalyticEMField<T>> =
        scales.scales().iter().map(|&s| AnalyticEMField::zeros(g, s)).collect();
    let mut series = vec![T::zero(); nt];
    for (ch, src) in f.channels().iter().enumerate() {
        for p in 0..ns {
            let offset = statics.as_ref().map_or(T::zero(), |s| s.channels()[ch][p]);
            for (it, v) in series.iter_mut().enumerate() {
                *v = src[p + it * ns] - offset;
            }
            for (q, filtered) in bank.apply(&series).into_iter().enumerate() {
                let dst = &mut out[q].channels_mut()[ch];
                for (it, z) in filtered.into_iter().enumerate() {
                    dst[p + it * ns] = Complex::new(z.re + offset, z.im);
                }
            }
        }
    }
    for field in &mut out {
        field.dc = statics.clone();
    }
    if scales.includes_static_limit {
        let mut last = AnalyticEMField::zeros(g, T::infinity());
        if let Some(s) = &statics {
            for (dst, src) in last.channels_mut().into_iter().zip(s.channels()) {
                for (idx, z) in dst.iter_mut().enumerate() {
                    z.re = src[idx % ns];
                }
            }
        }
        last.dc = statics;
        out.push(last);
    }
    ScaleStack::new(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transform_of_standing_wave_matches_closed_form() {
        let k = 1.0;
        let n = 64;
        let dt = std::f64::consts::TAU / n as f64;
        let grid = SpaceTimeGrid::zt(16, dt, 0.1, n, dt, 0.0).unwrap();
        let gen = StandingWave::new(1.5, k).unwrap();
        let sample = gen.sample(&grid).unwrap();
        let scales = ScaleGrid::new(vec![0.0, 0.3, 1.2]).unwrap();
        let stack = analytic_fields(&sample, &scales, Boundary::Periodic, &DcPolicy::Zero).unwrap();
        for field in &stack.fields {
            let exact = gen.analytic(&grid, field.scale).unwrap();
            assert!(field.max_abs_diff(&exact) < 1e-12);
        }
    }

    #[test]
    fn static_limit_carries_time_mean() {
        let grid = SpaceTimeGrid::zt(3, 0.5, 1.0, 32, 0.1, 0.0).unwrap();
        let mut f = EMFieldSample::zeros(grid);
        for idx in 0..grid.len() {
            let t = grid.time(grid.unravel(idx)[3]);
            f.e[2][idx] = 2.0 + (std::f64::consts::TAU * t / 3.2).cos();
        }
        let scales = ScaleGrid::new(vec![0.5]).unwrap().with_static_limit();
        let stack = analytic_fields(&f, &scales, Boundary::Periodic, &DcPolicy::TimeMean).unwrap();
        assert_eq!(stack.len(), 2);
        let last = &stack.fields[1];
        assert!(last.scale.is_infinite());
        assert!(last.e[2].iter().all(|z| (z.re - 2.0).abs() < 1e-12 && z.im == 0.0));
    }

    #[test]
    fn stack_requires_increasing_scales() {
        let grid = SpaceTimeGrid::zt(3, 0.5, 1.0, 4, 0.1, 0.0).unwrap();
        let a = AnalyticEMField::zeros(grid, 1.0);
        let b = AnalyticEMField::zeros(grid, 0.5);
        assert!(ScaleStack::new(vec![a, b]).is_err());
    }
}
