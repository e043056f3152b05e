//! Residuals of the local and analytic Maxwell systems on interior nodes.

use num_complex::Complex;

use super::{AnalyticEMField, EMFieldSample};
use crate::error::Result;
use crate::grid::{Axis, SpaceTimeGrid};
use crate::scalar::Real;
use crate::stencil::FieldValue;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualNorms<T> {
    pub max: T,
    /// `(Σ |r|² ΔV Δt)^{1/2}` over the interior nodes.
    pub l2: T,
    /// Flat grid index of the largest residual.
    pub argmax: usize,
}

impl<T: Real> ResidualNorms<T> {
    fn from_values(values: &[(usize, T)], weight: T) -> Self {
        let mut max = T::zero();
        let mut argmax = values.first().map_or(0, |v| v.0);
        let mut sum = T::zero();
        for &(idx, v) in values {
            if v > max {
                max = v;
                argmax = idx;
            }
            sum = sum + v * v;
        }
        Self { max, l2: (sum * weight).sqrt(), argmax }
    }
}

/// `curl E + ∂t H`, `curl H − ∂t E − J`, `div E − ρ`, `div H`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxwellResidual<T> {
    pub faraday: ResidualNorms<T>,
    pub ampere: ResidualNorms<T>,
    pub gauss_e: ResidualNorms<T>,
    pub gauss_h: ResidualNorms<T>,
}

impl<T: Real> MaxwellResidual<T> {
    pub fn max(&self) -> T {
        self.faraday.max.max(self.ampere.max).max(self.gauss_e.max).max(self.gauss_h.max)
    }

    pub fn l2(&self) -> T {
        self.faraday.l2.max(self.ampere.l2).max(self.gauss_e.l2).max(self.gauss_h.l2)
    }
}

fn evaluate<T: Real, V: FieldValue<T>>(
    grid: &SpaceTimeGrid<T>,
    e: &[Vec<V>; 3],
    h: &[Vec<V>; 3],
    j: &[Vec<V>; 3],
    rho: &[V],
) -> Result<MaxwellResidual<T>> {
    grid.require_stencils(true)?;
    let points = grid.interior(true).indices(grid);
    let vec_mag = |v: [V; 3]| {
        let (a, b, c) = (v[0].magnitude(), v[1].magnitude(), v[2].magnitude());
        (a * a + b * b + c * c).sqrt()
    };
    let mut far = Vec::with_capacity(points.len());
    let mut amp = Vec::with_capacity(points.len());
    let mut ge = Vec::with_capacity(points.len());
    let mut gh = Vec::with_capacity(points.len());
    for &idx in &points {
        let ce = grid.curl(e, idx);
        let ch = grid.curl(h, idx);
        let mut f = [V::zero(); 3];
        let mut a = [V::zero(); 3];
        for c in 0..3 {
            f[c] = ce[c] + grid.derivative(&h[c], Axis::T, idx);
            a[c] = ch[c] - grid.derivative(&e[c], Axis::T, idx) - j[c][idx];
        }
        far.push((idx, vec_mag(f)));
        amp.push((idx, vec_mag(a)));
        ge.push((idx, (grid.divergence(e, idx) - rho[idx]).magnitude()));
        gh.push((idx, grid.divergence(h, idx).magnitude()));
    }
    let w = grid.cell_volume() * grid.dt;
    Ok(MaxwellResidual {
        faraday: ResidualNorms::from_values(&far, w),
        ampere: ResidualNorms::from_values(&amp, w),
        gauss_e: ResidualNorms::from_values(&ge, w),
        gauss_h: ResidualNorms::from_values(&gh, w),
    })
}

/// Residuals of the local Maxwell equations.
pub fn maxwell_residual<T: Real>(f: &EMFieldSample<T>) -> Result<MaxwellResidual<T>> {
    f.validate()?;
    evaluate(&f.grid, &f.e, &f.h, &f.j, &f.rho)
}

/// Residuals of the analytic Maxwell equations, with `∂_τ` taken as `∂_t`
/// on the analytic samples at fixed scale.
pub fn maxwell_residual_analytic<T: Real>(f: &AnalyticEMField<T>) -> Result<MaxwellResidual<T>> {
    f.validate()?;
    evaluate::<T, Complex<T>>(&f.grid, &f.e, &f.h, &f.j, &f.rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{gen_standing_wave, AnalyticGenerator, StandingWave};

    #[test]
    fn zero_field_has_zero_residual() {
        let grid = SpaceTimeGrid::new([4, 4, 4, 4], [0.1; 4], [0.0; 4]).unwrap();
        let r = maxwell_residual(&EMFieldSample::zeros(grid)).unwrap();
        assert_eq!(r.max(), 0.0);
        assert_eq!(r.l2(), 0.0);
    }

    #[test]
    fn two_node_axis_is_rejected() {
        let grid = SpaceTimeGrid::new([2, 1, 4, 4], [0.1; 4], [0.0; 4]).unwrap();
        assert!(maxwell_residual(&EMFieldSample::zeros(grid)).is_err());
    }

    #[test]
    fn standing_wave_residual_is_second_order() {
        let run = |n: usize| {
            let h = std::f64::consts::TAU / n as f64;
            // dt = dz makes centred differences exact for the 1D wave; avoid it
            let grid = SpaceTimeGrid::zt(n, h, 0.0, n, 0.5 * h, 0.0).unwrap();
            maxwell_residual(&gen_standing_wave(&grid, 1.0, 1.0).unwrap()).unwrap().max()
        };
        let order = (run(32) / run(64)).log2();
        assert!(order > 1.9, "order {order}");
    }

    #[test]
    fn analytic_standing_wave_satisfies_analytic_maxwell() {
        let run = |n: usize| {
            let h = std::f64::consts::TAU / n as f64;
            // dt = dz makes centred differences exact for the 1D wave; avoid it
            let grid = SpaceTimeGrid::zt(n, h, 0.0, n, 0.5 * h, 0.0).unwrap();
            let f = StandingWave::new(1.0, 1.0).unwrap().analytic(&grid, 0.4).unwrap();
            maxwell_residual_analytic(&f).unwrap().max()
        };
        let order = (run(32) / run(64)).log2();
        assert!(order > 1.9, "order {order}");
    }
}
