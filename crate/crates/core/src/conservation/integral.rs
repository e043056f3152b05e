//! Integral conservation laws over axis-aligned boxes and the cumulative
//! reconstruction of reactive energy along the scale axis.

use crate::densities::{scaled_densities, DensityBundle};
use crate::error::{Error, Result};
use crate::field::{EMFieldSample, ScaleStack, StaticFields};
use crate::grid::{Axis, SpaceTimeGrid};
use crate::scalar::Real;
use crate::stencil::derivative_3pt;

/// Inclusive node ranges `lo..=hi` per spatial axis. The box faces sit half
/// a step outside the outermost nodes, so each node carries a full cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndexBox {
    pub lo: [usize; 3],
    pub hi: [usize; 3],
}

impl IndexBox {
    pub fn new(lo: [usize; 3], hi: [usize; 3]) -> Self {
        Self { lo, hi }
    }

    /// Checks that every face has a node on both sides.
    pub fn validate<T: Real>(&self, grid: &SpaceTimeGrid<T>) -> Result<()> {
        for (a, axis) in Axis::SPATIAL.into_iter().enumerate() {
            let n = grid.count(axis);
            let (lo, hi) = (self.lo[a], self.hi[a]);
            if lo > hi || hi >= n {
                return Err(Error::InvalidGrid(format!("box range {lo}..={hi} outside axis {axis:?} of {n} nodes")));
            }
            if n > 1 && (lo == 0 || hi + 1 >= n) {
                return Err(Error::BoxOnBoundary(format!(
                    "axis {axis:?}: box {lo}..={hi} needs a node beyond each face (grid has {n})"
                )));
            }
        }
        Ok(())
    }

    fn nodes<T: Real>(&self, grid: &SpaceTimeGrid<T>, it: usize) -> impl Iterator<Item = usize> + '_ {
        let g = *grid;
        (self.lo[2]..=self.hi[2]).flat_map(move |iz| {
            (self.lo[1]..=self.hi[1])
                .flat_map(move |iy| (self.lo[0]..=self.hi[0]).map(move |ix| g.index(ix, iy, iz, it)))
        })
    }
}

fn weight<T: Real>(grid: &SpaceTimeGrid<T>, axis: Axis) -> T {
    if grid.is_active(axis) {
        grid.spacing(axis)
    } else {
        T::one()
    }
}

fn cell<T: Real>(grid: &SpaceTimeGrid<T>) -> T {
    Axis::SPATIAL.iter().fold(T::one(), |acc, a| acc * weight(grid, *a))
}

/// `∫_V f dV` at time index `it` by the midpoint rule on node-centred cells.
pub fn volume_integral<T: Real>(grid: &SpaceTimeGrid<T>, vbox: &IndexBox, f: &[T], it: usize) -> T {
    vbox.nodes(grid, it).fold(T::zero(), |acc, i| acc + f[i]) * cell(grid)
}

/// Outward flux `∮ F·dA` at time index `it`, with face values averaged from
/// the two nodes straddling each face.
pub fn surface_flux<T: Real>(grid: &SpaceTimeGrid<T>, vbox: &IndexBox, f: &[Vec<T>; 3], it: usize) -> T {
    let half = T::lit(0.5);
    let mut total = T::zero();
    for (a, axis) in Axis::SPATIAL.into_iter().enumerate() {
        if !grid.is_active(axis) {
            continue;
        }
        let st = grid.stride(axis);
        let area = cell(grid) / weight(grid, axis);
        let mut rest = *vbox;
        rest.lo[a] = 0;
        rest.hi[a] = 0;
        let mut sum = T::zero();
        for base in rest.nodes(grid, it) {
            let hi = base + vbox.hi[a] * st;
            let lo = base + vbox.lo[a] * st;
            sum = sum + half * (f[a][hi] + f[a][hi + st]) - half * (f[a][lo] + f[a][lo - st]);
        }
        total = total + sum * area;
    }
    total
}

/// Box totals at every `(scale, time)` and the balance of both laws.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegralReport<T> {
    pub volume: IndexBox,
    pub scales: Vec<T>,
    pub times: Vec<T>,
    /// `𝕌[q][it]`
    pub energy_u: Vec<Vec<T>>,
    pub energy_x: Vec<Vec<T>>,
    pub power_p: Vec<Vec<T>>,
    pub power_q: Vec<Vec<T>>,
    /// Outward `∮ 𝐒·dA`
    pub flux_s: Vec<Vec<T>>,
    /// Outward `∮ 𝐓·dA`
    pub flux_t: Vec<Vec<T>>,
    /// `∂_t𝕌 − ℙ + 𝕊` for `it ∈ 1..nt−1`, indexed `[q][it − 1]`.
    pub active_balance: Vec<Vec<T>>,
    /// `−∂_s𝕏 − ℚ + 𝕋` for `q ∈ 1..nq−1`, indexed `[q − 1][it]`.
    pub reactive_balance: Vec<Vec<T>>,
    /// `max |∫ div 𝐒 dV − 𝕊|` over all `(scale, time)`.
    pub divergence_gap: T,
}

fn max_abs<T: Real>(rows: &[Vec<T>]) -> T {
    rows.iter().flat_map(|r| r.iter()).fold(T::zero(), |m, v| m.max(v.abs()))
}

impl<T: Real> IntegralReport<T> {
    pub fn active_max(&self) -> T {
        max_abs(&self.active_balance)
    }

    pub fn reactive_max(&self) -> T {
        max_abs(&self.reactive_balance)
    }

    /// `min 𝕌`; never negative in exact arithmetic.
    pub fn min_energy(&self) -> T {
        self.energy_u.iter().flat_map(|r| r.iter()).fold(T::infinity(), |m, v| m.min(*v))
    }
}

/// Evaluates both integral laws over `vbox` at every scale of `stack`.
pub fn integral_laws<T: Real>(stack: &ScaleStack<T>, vbox: &IndexBox) -> Result<IntegralReport<T>> {
    let grid = *stack.grid();
    vbox.validate(&grid)?;
    if stack.fields.iter().any(|f| !f.scale.is_finite()) {
        return Err(Error::InvalidScaleGrid("integral laws need finite scales".into()));
    }
    let nt = grid.nt;
    let mut rows = Rows::default();
    let mut divergence_gap = T::zero();
    for f in &stack.fields {
        let b = scaled_densities(f)?;
        divergence_gap = divergence_gap.max(rows.push(&grid, vbox, &b));
    }
    let dt2 = grid.dt + grid.dt;
    let active_balance = (0..stack.len())
        .map(|q| {
            (1..nt.saturating_sub(1))
                .map(|it| {
                    (rows.u[q][it + 1] - rows.u[q][it - 1]) / dt2 - rows.p[q][it] + rows.s[q][it]
                })
                .collect()
        })
        .collect();
    let scales = stack.scales();
    let reactive_balance = (1..stack.len().saturating_sub(1))
        .map(|q| {
            (0..nt)
                .map(|it| {
                    let dsx = derivative_3pt(
                        [scales[q - 1], scales[q], scales[q + 1]],
                        [rows.x[q - 1][it], rows.x[q][it], rows.x[q + 1][it]],
                    );
                    -dsx - rows.q[q][it] + rows.t[q][it]
                })
                .collect()
        })
        .collect();
    Ok(IntegralReport {
        volume: *vbox,
        scales,
        times: (0..nt).map(|it| grid.time(it)).collect(),
        energy_u: rows.u,
        energy_x: rows.x,
        power_p: rows.p,
        power_q: rows.q,
        flux_s: rows.s,
        flux_t: rows.t,
        active_balance,
        reactive_balance,
        divergence_gap,
    })
}

struct Rows<T> {
    u: Vec<Vec<T>>,
    x: Vec<Vec<T>>,
    p: Vec<Vec<T>>,
    q: Vec<Vec<T>>,
    s: Vec<Vec<T>>,
    t: Vec<Vec<T>>,
}

impl<T> Default for Rows<T> {
    fn default() -> Self {
        Self { u: Vec::new(), x: Vec::new(), p: Vec::new(), q: Vec::new(), s: Vec::new(), t: Vec::new() }
    }
}

impl<T: Real> Rows<T> {
    fn push(&mut self, grid: &SpaceTimeGrid<T>, vbox: &IndexBox, b: &DensityBundle<T>) -> T {
        let nt = grid.nt;
        let mut gap = T::zero();
        let per_t = |f: &[T]| -> Vec<T> { (0..nt).map(|it| volume_integral(grid, vbox, f, it)).collect() };
        self.u.push(per_t(&b.u));
        self.x.push(per_t(&b.x));
        self.p.push(per_t(&b.p));
        self.q.push(per_t(&b.q));
        let s: Vec<T> = (0..nt).map(|it| surface_flux(grid, vbox, &b.s, it)).collect();
        for (it, flux) in s.iter().enumerate() {
            let div = vbox.nodes(grid, it).fold(T::zero(), |acc, i| acc + grid.divergence(&b.s, i)) * cell(grid);
            gap = gap.max((div - *flux).abs());
        }
        self.s.push(s);
        self.t.push((0..nt).map(|it| surface_flux(grid, vbox, &b.t, it)).collect());
        gap
    }
}

/// Reactive energy rebuilt from the scale axis,
/// `𝕏(t, s) = 𝕏∞ + ∫_s^{s_max} (ℚ − 𝕋) ds'`, against the direct volume sums.
#[derive(Debug, Clone, PartialEq)]
pub struct CumulativeReactive<T> {
    /// `[q][it]`
    pub reconstructed: Vec<Vec<T>>,
    pub direct: Vec<Vec<T>>,
    pub max_abs_error: T,
    /// Error relative to `max |𝕏|` over all `(t, s)`.
    pub max_rel_error: T,
    /// Caller-supplied ceiling on `|𝕏(t, s_max) − 𝕏∞|`.
    pub tail_bound: T,
    /// Measured `max_t |𝕏(t, s_max) − 𝕏∞|`.
    pub observed_tail: T,
}

/// Reconstructs `𝕏` by trapezoid quadrature of `ℚ − 𝕋` from `s_max` down to
/// each scale. The integral beyond `s_max` is not added; `tail_bound` is its
/// documented ceiling. Fails when the direct tail exceeds that ceiling.
pub fn cumulative_reactive<T: Real>(
    report: &IntegralReport<T>,
    x_inf: T,
    tail_bound: T,
) -> Result<CumulativeReactive<T>> {
    let nq = report.scales.len();
    if nq < 2 {
        return Err(Error::TooFewSamples("cumulative reconstruction needs ≥ 2 scales".into()));
    }
    let nt = report.times.len();
    let top = nq - 1;
    let observed_tail = (0..nt).fold(T::zero(), |m, it| m.max((report.energy_x[top][it] - x_inf).abs()));
    if observed_tail > tail_bound {
        let below = (0..nt).fold(T::zero(), |m, it| m.max((report.energy_x[top - 1][it] - x_inf).abs()));
        let step = report.scales[top] - report.scales[top - 1];
        let rate = (below / observed_tail).ln() / step;
        let need = if rate > T::zero() {
            format!("extend s_max to about {}", report.scales[top] + (observed_tail / tail_bound).ln() / rate)
        } else {
            "tail is not decaying on this grid".to_string()
        };
        return Err(Error::InsufficientScaleRange(format!(
            "|𝕏(s_max) − 𝕏∞| = {observed_tail:e} exceeds tail bound {tail_bound:e}; {need}"
        )));
    }
    let half = T::lit(0.5);
    let mut reconstructed = vec![vec![x_inf; nt]; nq];
    for q in (0..top).rev() {
        let h = report.scales[q + 1] - report.scales[q];
        for it in 0..nt {
            let upper = report.power_q[q + 1][it] - report.flux_t[q + 1][it];
            let lower = report.power_q[q][it] - report.flux_t[q][it];
            reconstructed[q][it] = reconstructed[q + 1][it] + half * h * (upper + lower);
        }
    }
    let scale = max_abs(&report.energy_x).max(T::min_positive_value());
    let mut max_abs_error = T::zero();
    for (r, d) in reconstructed.iter().zip(&report.energy_x) {
        for (a, b) in r.iter().zip(d) {
            max_abs_error = max_abs_error.max((*a - *b).abs());
        }
    }
    Ok(CumulativeReactive {
        reconstructed,
        direct: report.energy_x.clone(),
        max_abs_error,
        max_rel_error: max_abs_error / scale,
        tail_bound,
        observed_tail,
    })
}

/// Ceiling on `|𝕏(t, s) − ½X∞·|V||` from the static-limit decay bound,
/// `∫_V ¼ Σ_F (2|F∞| b_F + b_F²) dV` with `b_F² = ‖F − F∞‖² / (2πs)`.
pub fn reactive_tail_bound<T: Real>(
    sample: &EMFieldSample<T>,
    statics: &StaticFields<T>,
    s: T,
    vbox: &IndexBox,
) -> Result<T> {
    vbox.validate(&sample.grid)?;
    let per_node = crate::densities::static_limit_bounds(sample, statics, s)?;
    let g = sample.grid;
    let ns = g.spatial_len();
    let mut widened = vec![T::zero(); g.len()];
    for (i, w) in widened.iter_mut().enumerate().take(ns) {
        *w = per_node[i];
    }
    Ok(volume_integral(&g, vbox, &widened, 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{AnalyticEMField, AnalyticGenerator, StandingWave};

    #[test]
    fn boxes_touching_the_boundary_are_rejected() {
        let grid = SpaceTimeGrid::zt(10, 0.1, 0.0, 3, 0.1, 0.0).unwrap();
        assert!(matches!(IndexBox::new([0, 0, 0], [0, 0, 5]).validate(&grid), Err(Error::BoxOnBoundary(_))));
        assert!(matches!(IndexBox::new([0, 0, 1], [0, 0, 9]).validate(&grid), Err(Error::BoxOnBoundary(_))));
        assert!(IndexBox::new([0, 0, 1], [0, 0, 8]).validate(&grid).is_ok());
    }

    #[test]
    fn zero_field_gives_zero_report() {
        let grid = SpaceTimeGrid::new([5, 5, 5, 3], [0.1; 4], [0.0; 4]).unwrap();
        let stack = ScaleStack::new((0..3).map(|q| AnalyticEMField::zeros(grid, q as f64)).collect()).unwrap();
        let r = integral_laws(&stack, &IndexBox::new([1, 1, 1], [3, 3, 3])).unwrap();
        assert_eq!(r.active_max(), 0.0);
        assert_eq!(r.reactive_max(), 0.0);
        assert_eq!(max_abs(&r.energy_u), 0.0);
    }

    #[test]
    fn discrete_divergence_theorem_is_exact() {
        let grid = SpaceTimeGrid::<f64>::new([6, 7, 8, 1], [0.2, 0.3, 0.1, 1.0], [0.1, -0.4, 0.3, 0.0]).unwrap();
        let mut f = [vec![0.0f64; grid.len()], vec![0.0; grid.len()], vec![0.0; grid.len()]];
        for i in 0..grid.len() {
            let [ix, iy, iz, _] = grid.unravel(i);
            let [x, y, z] = grid.position(ix, iy, iz);
            f[0][i] = (x * y).sin() + z * z;
            f[1][i] = (3.0 * z).cos() * x;
            f[2][i] = x * y * z;
        }
        let vbox = IndexBox::new([1, 2, 1], [4, 5, 6]);
        let div: Vec<f64> = (0..grid.len()).map(|i| grid.divergence(&f, i)).collect();
        let lhs = volume_integral(&grid, &vbox, &div, 0);
        let rhs = surface_flux(&grid, &vbox, &f, 0);
        assert!((lhs - rhs).abs() < 1e-13);
    }

    #[test]
    fn full_wavelength_box_has_no_reactive_energy() {
        let n = 64;
        let h = std::f64::consts::TAU / n as f64;
        // cell-centred nodes so the box faces fall on z = 0 and z = 2π
        let grid = SpaceTimeGrid::zt(n + 2, h, -0.5 * h, 4, 0.1, 0.0).unwrap();
        let stack = StandingWave::new(1.0, 1.0).unwrap().stack(&grid, &[0.1, 0.2, 0.3]).unwrap();
        let r = integral_laws(&stack, &IndexBox::new([0, 0, 1], [0, 0, n])).unwrap();
        assert!(max_abs(&r.energy_x) < 1e-13);
        assert!(max_abs(&r.flux_t) < 1e-13);
    }
}
