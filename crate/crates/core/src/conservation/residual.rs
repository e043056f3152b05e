//! Differential conservation laws evaluated as residuals on interior nodes.

use num_complex::Complex;

use crate::densities::{local_densities, scaled_densities, DensityBundle, SplitDensities};
use crate::error::{Error, Result};
use crate::field::{AnalyticEMField, EMFieldSample, ScaleStack};
use crate::grid::{Axis, SpaceTimeGrid};
use crate::scalar::Real;
use crate::stencil::{derivative_3pt, FieldValue};

/// A residual sampled on interior nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualField<V, T> {
    pub values: Vec<V>,
    /// `(scale index, flat grid index)` of each value.
    pub points: Vec<(usize, usize)>,
    pub norm_max: T,
    /// `(Σ |r|² ΔV Δt)^{1/2}`
    pub norm_l2: T,
    pub stencil: &'static str,
    pub convergence_order: Option<T>,
}

impl<V: FieldValue<T>, T: Real> ResidualField<V, T> {
    fn build(values: Vec<V>, points: Vec<(usize, usize)>, grid: &SpaceTimeGrid<T>, stencil: &'static str) -> Self {
        let mut max = T::zero();
        let mut sum = T::zero();
        for v in &values {
            let m = v.magnitude();
            max = max.max(m);
            sum = sum + m * m;
        }
        let w = grid.cell_volume() * grid.dt;
        Self { values, points, norm_max: max, norm_l2: (sum * w).sqrt(), stencil, convergence_order: None }
    }

    pub fn with_order(mut self, order: T) -> Self {
        self.convergence_order = Some(order);
        self
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

const STENCIL_T_X: &str = "centred 2nd order in t and space";
const STENCIL_S_X: &str = "3-point 2nd order in s, centred 2nd order in space";
const STENCIL_T_S_X: &str = "centred 2nd order in t and space, 3-point 2nd order in s";
const STENCIL_ANALYTIC: &str = "∂s from ∂s𝐗 = i∂t𝐗 with centred t, centred 2nd order in space";

fn interior<T: Real>(grid: &SpaceTimeGrid<T>) -> Result<Vec<usize>> {
    grid.require_stencils(true)?;
    Ok(grid.interior(true).indices(grid))
}

/// `∂_t U + div S − P` for the local fields.
pub fn residual_local<T: Real>(f: &EMFieldSample<T>) -> Result<ResidualField<T, T>> {
    let b = local_densities(f)?;
    let g = &b.grid;
    let pts = interior(g)?;
    let values = pts.iter().map(|&i| g.derivative(&b.u, Axis::T, i) + g.divergence(&b.s, i) - b.p[i]).collect();
    Ok(ResidualField::build(values, pts.into_iter().map(|i| (0, i)).collect(), g, STENCIL_T_X))
}

/// `∂_t 𝒰 + div 𝐒 − 𝒫` at the scale of one bundle.
pub fn active_residual_at<T: Real>(b: &DensityBundle<T>) -> Result<ResidualField<T, T>> {
    let g = &b.grid;
    let pts = interior(g)?;
    let values = pts.iter().map(|&i| g.derivative(&b.u, Axis::T, i) + g.divergence(&b.s, i) - b.p[i]).collect();
    Ok(ResidualField::build(values, pts.into_iter().map(|i| (0, i)).collect(), g, STENCIL_T_X))
}

/// Densities of every field in a stack of at least three scales.
pub fn stack_densities<T: Real>(stack: &ScaleStack<T>) -> Result<Vec<DensityBundle<T>>> {
    if stack.len() < 3 {
        return Err(Error::TooFewSamples(format!("need ≥ 3 scales for ∂s, got {}", stack.len())));
    }
    if stack.fields.iter().any(|f| !f.scale.is_finite()) {
        return Err(Error::InvalidScaleGrid("differential laws need finite scales".into()));
    }
    stack.fields.iter().map(scaled_densities).collect()
}

fn ds<T: Real>(bundles: &[DensityBundle<T>], q: usize, idx: usize, pick: impl Fn(&DensityBundle<T>) -> &[T]) -> T {
    let (a, b, c) = (&bundles[q - 1], &bundles[q], &bundles[q + 1]);
    derivative_3pt([a.scale, b.scale, c.scale], [pick(a)[idx], pick(b)[idx], pick(c)[idx]])
}

fn for_interior_scales<V: FieldValue<T>, T: Real>(
    bundles: &[DensityBundle<T>],
    stencil: &'static str,
    mut eval: impl FnMut(usize, usize) -> V,
) -> Result<ResidualField<V, T>> {
    let g = bundles[0].grid;
    let pts = interior(&g)?;
    let mut values = Vec::with_capacity(pts.len() * (bundles.len() - 2));
    let mut points = Vec::with_capacity(values.capacity());
    for q in 1..bundles.len() - 1 {
        for &i in &pts {
            values.push(eval(q, i));
            points.push((q, i));
        }
    }
    Ok(ResidualField::build(values, points, &g, stencil))
}

/// Active law `∂_t 𝒰 + div 𝐒 − 𝒫` at the interior scales of the stack.
pub fn residual_active<T: Real>(stack: &ScaleStack<T>) -> Result<ResidualField<T, T>> {
    let bundles = stack_densities(stack)?;
    active_from(&bundles)
}

/// Reactive law `−∂_s 𝒳 + div 𝐓 − 𝒬` at the interior scales of the stack.
pub fn residual_reactive<T: Real>(stack: &ScaleStack<T>) -> Result<ResidualField<T, T>> {
    let bundles = stack_densities(stack)?;
    reactive_from(&bundles)
}

pub fn active_from<T: Real>(bundles: &[DensityBundle<T>]) -> Result<ResidualField<T, T>> {
    for_interior_scales(bundles, STENCIL_T_X, |q, i| {
        let b = &bundles[q];
        let g = &b.grid;
        g.derivative(&b.u, Axis::T, i) + g.divergence(&b.s, i) - b.p[i]
    })
}

pub fn reactive_from<T: Real>(bundles: &[DensityBundle<T>]) -> Result<ResidualField<T, T>> {
    for_interior_scales(bundles, STENCIL_S_X, |q, i| {
        let b = &bundles[q];
        -ds(bundles, q, i, |b| &b.x) + b.grid.divergence(&b.t, i) - b.q[i]
    })
}

/// Complex law `∂_t 𝒰 − i ∂_s 𝒳 + ½ div(𝐄×𝐇̄) + ½ 𝐄·𝐉̄`, with the flux and
/// power assembled from the complex fields directly.
pub fn residual_complex<T: Real>(stack: &ScaleStack<T>) -> Result<ResidualField<Complex<T>, T>> {
    let bundles = stack_densities(stack)?;
    let half = T::lit(0.5);
    let zero = Complex::new(T::zero(), T::zero());
    let fluxes: Vec<([Vec<Complex<T>>; 3], Vec<Complex<T>>)> = stack
        .fields
        .iter()
        .map(|f| {
            let n = f.grid.len();
            let mut flux = [vec![zero; n], vec![zero; n], vec![zero; n]];
            let mut power = vec![zero; n];
            for i in 0..n {
                let e = [f.e[0][i], f.e[1][i], f.e[2][i]];
                let h = [f.h[0][i].conj(), f.h[1][i].conj(), f.h[2][i].conj()];
                let j = [f.j[0][i].conj(), f.j[1][i].conj(), f.j[2][i].conj()];
                flux[0][i] = (e[1] * h[2] - e[2] * h[1]) * half;
                flux[1][i] = (e[2] * h[0] - e[0] * h[2]) * half;
                flux[2][i] = (e[0] * h[1] - e[1] * h[0]) * half;
                power[i] = (e[0] * j[0] + e[1] * j[1] + e[2] * j[2]) * half;
            }
            (flux, power)
        })
        .collect();
    for_interior_scales(&bundles, STENCIL_T_S_X, |q, i| {
        let b = &bundles[q];
        let g = &b.grid;
        let (flux, power) = &fluxes[q];
        let dsx = ds(&bundles, q, i, |b| &b.x);
        Complex::new(g.derivative(&b.u, Axis::T, i), -dsx) + g.divergence(flux, i) + power[i]
    })
}

/// `∂_s 𝒳` through the analyticity identity: with `∂_s𝐗 = i∂_t𝐗`,
/// `∂_s|𝐗|² = −2 Im(𝐗̄·∂_t𝐗)`, so
/// `∂_s 𝒳 = −½ Im(𝐇̄·∂_t𝐇) + ½ Im(𝐄̄·∂_t𝐄)`.
pub fn ds_reactive_analyticity<T: Real>(f: &AnalyticEMField<T>, idx: usize) -> T {
    let g = &f.grid;
    let half = T::lit(0.5);
    let mut acc = T::zero();
    for c in 0..3 {
        let dh = g.derivative(&f.h[c], Axis::T, idx);
        let de = g.derivative(&f.e[c], Axis::T, idx);
        acc = acc - half * (f.h[c][idx].conj() * dh).im + half * (f.e[c][idx].conj() * de).im;
    }
    acc
}

/// Gap between the two `∂_s 𝒳` routes: 3-point differences across scales
/// minus the analyticity identity, at the interior scales.
pub fn ds_route_gap<T: Real>(stack: &ScaleStack<T>) -> Result<ResidualField<T, T>> {
    let bundles = stack_densities(stack)?;
    for_interior_scales(&bundles, STENCIL_T_S_X, |q, i| {
        ds(&bundles, q, i, |b| &b.x) - ds_reactive_analyticity(&stack.fields[q], i)
    })
}

/// Reactive law at a single scale with `∂_s 𝒳` from the analyticity route.
pub fn residual_reactive_analyticity<T: Real>(f: &AnalyticEMField<T>) -> Result<ResidualField<T, T>> {
    let b = scaled_densities(f)?;
    let g = &b.grid;
    let pts = interior(g)?;
    let values = pts
        .iter()
        .map(|&i| -ds_reactive_analyticity(f, i) + g.divergence(&b.t, i) - b.q[i])
        .collect();
    Ok(ResidualField::build(values, pts.into_iter().map(|i| (0, i)).collect(), g, STENCIL_ANALYTIC))
}

/// Active laws of the semi-local and nonlocal parts,
/// `∂_t 𝒰_k + div 𝐒_k − 𝒫_k` for `k = 1, 2`.
pub fn residual_split<T: Real>(sd: &SplitDensities<T>) -> Result<(ResidualField<T, T>, ResidualField<T, T>)> {
    let g = &sd.grid;
    let pts = interior(g)?;
    let one = |p: &crate::densities::PartDensities<T>| {
        let values = pts.iter().map(|&i| g.derivative(&p.u, Axis::T, i) + g.divergence(&p.s, i) - p.p[i]).collect();
        ResidualField::build(values, pts.iter().map(|&i| (0, i)).collect(), g, STENCIL_T_X)
    };
    Ok((one(&sd.semi_local), one(&sd.nonlocal)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{AnalyticGenerator, StandingWave};

    #[test]
    fn zero_field_residuals_vanish() {
        let grid = SpaceTimeGrid::zt(5, 0.1, 0.0, 5, 0.1, 0.0).unwrap();
        let r = residual_local(&EMFieldSample::zeros(grid)).unwrap();
        assert_eq!(r.norm_max, 0.0);
        let stack = ScaleStack::new(
            (0..3).map(|q| AnalyticEMField::zeros(grid, q as f64 * 0.1)).collect(),
        )
        .unwrap();
        assert_eq!(residual_complex(&stack).unwrap().norm_max, 0.0);
    }

    #[test]
    fn complex_residual_splits_into_active_and_reactive() {
        let h = std::f64::consts::TAU / 24.0;
        let grid = SpaceTimeGrid::zt(24, h, 0.0, 20, 0.5 * h, 0.0).unwrap();
        let stack = StandingWave::new(1.0, 1.0).unwrap().stack(&grid, &[0.2, 0.25, 0.3]).unwrap();
        let c = residual_complex(&stack).unwrap();
        let a = residual_active(&stack).unwrap();
        let r = residual_reactive(&stack).unwrap();
        for ((z, x), y) in c.values.iter().zip(&a.values).zip(&r.values) {
            assert!((z.re - x).abs() < 1e-14);
            assert!((z.im - y).abs() < 1e-14);
        }
    }

    #[test]
    fn reactive_routes_agree_to_second_order() {
        let run = |n: usize| {
            let h = std::f64::consts::TAU / n as f64;
            let grid = SpaceTimeGrid::zt(n, h, 0.0, 8, 0.5 * h, 0.0).unwrap();
            let ds = 0.5 * h;
            let stack = StandingWave::new(1.0, 1.0).unwrap().stack(&grid, &[0.3 - ds, 0.3, 0.3 + ds]).unwrap();
            ds_route_gap(&stack).unwrap().norm_max
        };
        let order = (run(32) / run(64)).log2();
        assert!(order > 1.9, "order {order}");
    }

    #[test]
    fn fewer_than_three_scales_is_an_error() {
        let grid = SpaceTimeGrid::zt(5, 0.1, 0.0, 5, 0.1, 0.0).unwrap();
        let stack = ScaleStack::new(vec![AnalyticEMField::zeros(grid, 0.0), AnalyticEMField::zeros(grid, 1.0)]).unwrap();
        assert!(residual_reactive(&stack).is_err());
    }
}
