//! Approach of the scaled densities to half their static values as `s → ∞`.

use crate::densities::{scaled_densities, static_limit_bounds, DensityBundle};
use crate::error::{Error, Result};
use crate::field::{analytic_fields, DcPolicy, EMFieldSample, StaticFields};
use crate::kernel::{Boundary, ScaleGrid};
use crate::scalar::Real;

/// Deviation of one density from its limit: the worst value at the largest
/// scale and the count of steps along `s` where it grew.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Approach<T> {
    pub final_deviation: T,
    pub increases: usize,
    /// Largest single-step growth of the deviation.
    pub worst_increase: T,
}

impl<T: Real> Approach<T> {
    fn new() -> Self {
        Approach { final_deviation: T::zero(), increases: 0, worst_increase: T::neg_infinity() }
    }
}

#[derive(Debug, Clone)]
pub struct StaticLimitReport<T> {
    pub s_max: T,
    /// `𝒰 → ½U∞`
    pub u: Approach<T>,
    /// `𝒳 → ½X∞`
    pub x: Approach<T>,
    /// `𝐒 → ½S∞`
    pub s: Approach<T>,
    /// `𝐓 → 0`
    pub t: Approach<T>,
    /// `𝒬 → 0`
    pub q: Approach<T>,
    /// Largest per-node ceiling on the `𝒰, 𝒳` deviation at `s_max`.
    pub bound: T,
    /// Nodes where the `𝒰` or `𝒳` deviation at `s_max` exceeds its ceiling.
    pub bound_exceeded: usize,
    /// `max |div(E∞×H∞) + E∞·J∞|` over interior spatial nodes.
    pub static_balance: T,
    /// `max (|div(E∞×H∞)| + |E∞·J∞|)`, the scale of the static balance terms.
    pub static_balance_scale: T,
    pub checked: usize,
}

impl<T: Real> StaticLimitReport<T> {
    pub fn monotone(&self) -> bool {
        [self.u, self.x, self.s, self.t, self.q].iter().all(|a| a.increases == 0)
    }

    pub fn within_bound(&self) -> bool {
        self.bound_exceeded == 0
    }
}

fn deviations<T: Real>(b: &DensityBundle<T>, dc: &StaticFields<T>, idx: usize, ns: usize) -> [T; 5] {
    let p = idx % ns;
    let half = T::lit(0.5);
    let quarter = T::lit(0.25);
    let e = [dc.e[0][p], dc.e[1][p], dc.e[2][p]];
    let h = [dc.h[0][p], dc.h[1][p], dc.h[2][p]];
    let ee = e[0] * e[0] + e[1] * e[1] + e[2] * e[2];
    let hh = h[0] * h[0] + h[1] * h[1] + h[2] * h[2];
    let s_inf = [e[1] * h[2] - e[2] * h[1], e[2] * h[0] - e[0] * h[2], e[0] * h[1] - e[1] * h[0]];
    let ds = (0..3).fold(T::zero(), |a, c| {
        let d = b.s[c][idx] - half * s_inf[c];
        a + d * d
    });
    let t = (0..3).fold(T::zero(), |a, c| a + b.t[c][idx] * b.t[c][idx]);
    [
        (b.u[idx] - quarter * (ee + hh)).abs(),
        (b.x[idx] - quarter * (hh - ee)).abs(),
        ds.sqrt(),
        t.sqrt(),
        b.q[idx].abs(),
    ]
}

/// Spatial residual of `div(E∞×H∞) + E∞·J∞` at interior nodes, with the
/// magnitude of its terms.
pub fn static_balance<T: Real>(f: &EMFieldSample<T>, dc: &StaticFields<T>) -> Result<(T, T)> {
    let g = f.grid.with_time(1, f.grid.dt, f.grid.origin[3])?;
    let n = g.spatial_len();
    let mut flux = [vec![T::zero(); n], vec![T::zero(); n], vec![T::zero(); n]];
    let mut power = vec![T::zero(); n];
    for p in 0..n {
        let e = [dc.e[0][p], dc.e[1][p], dc.e[2][p]];
        let h = [dc.h[0][p], dc.h[1][p], dc.h[2][p]];
        flux[0][p] = e[1] * h[2] - e[2] * h[1];
        flux[1][p] = e[2] * h[0] - e[0] * h[2];
        flux[2][p] = e[0] * h[1] - e[1] * h[0];
        power[p] = e[0] * dc.j[0][p] + e[1] * dc.j[1][p] + e[2] * dc.j[2][p];
    }
    let mut worst = T::zero();
    let mut scale = T::zero();
    for idx in g.interior(false).indices(&g) {
        let div = g.divergence(&flux, idx);
        worst = worst.max((div + power[idx]).abs());
        scale = scale.max(div.abs() + power[idx].abs());
    }
    Ok((worst, scale))
}

/// Transforms `f` on `scales`, then follows every density at every node
/// toward its static limit and compares the deviation at the largest scale
/// with the decay ceiling. `tol` absorbs roundoff in the monotonicity test.
pub fn static_limit_check<T: Real>(
    f: &EMFieldSample<T>,
    scales: &ScaleGrid<T>,
    boundary: Boundary,
    dc: &DcPolicy<T>,
    tol: T,
) -> Result<StaticLimitReport<T>> {
    if matches!(dc, DcPolicy::Zero) {
        return Err(Error::Config("the static limit needs a supplied or estimated static part".into()));
    }
    let stack = analytic_fields(f, scales, boundary, dc)?;
    let statics = stack.fields[0].dc.clone().ok_or_else(|| Error::Config("static part missing".into()))?;
    let bundles =
        stack.fields.iter().filter(|a| a.scale.is_finite()).map(scaled_densities).collect::<Result<Vec<_>>>()?;
    let top = bundles.last().ok_or_else(|| Error::InvalidScaleGrid("no finite scale".into()))?;
    let g = f.grid;
    let ns = g.spatial_len();

    let mut acc = [Approach::<T>::new(); 5];
    let mut prev: Vec<[T; 5]> = (0..g.len()).map(|idx| deviations(&bundles[0], &statics, idx, ns)).collect();
    for b in &bundles[1..] {
        for (idx, before) in prev.iter_mut().enumerate() {
            let now = deviations(b, &statics, idx, ns);
            for k in 0..5 {
                let growth = now[k] - before[k];
                acc[k].worst_increase = acc[k].worst_increase.max(growth);
                acc[k].increases += usize::from(growth > tol);
            }
            *before = now;
        }
    }
    for last in &prev {
        for k in 0..5 {
            acc[k].final_deviation = acc[k].final_deviation.max(last[k]);
        }
    }

    let bounds = static_limit_bounds(f, &statics, top.scale)?;
    let mut bound = T::zero();
    let mut exceeded = 0;
    for (idx, last) in prev.iter().enumerate() {
        let b = bounds[idx % ns];
        bound = bound.max(b);
        exceeded += usize::from(last[0] > b || last[1] > b);
    }
    let (static_balance, static_balance_scale) = static_balance(f, &statics)?;
    let [u, x, s, t, q] = acc;
    Ok(StaticLimitReport {
        s_max: top.scale,
        u,
        x,
        s,
        t,
        q,
        bound,
        bound_exceeded: exceeded,
        static_balance,
        static_balance_scale,
        checked: g.len() * (bundles.len() - 1),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::SpaceTimeGrid;

    fn rippled(ripple: f64) -> EMFieldSample<f64> {
        let grid = SpaceTimeGrid::zt(5, 0.1, 0.0, 256, 0.05, 0.0).unwrap();
        let mut f = EMFieldSample::zeros(grid);
        let w = std::f64::consts::TAU * 8.0 / (256.0 * 0.05);
        for idx in 0..grid.len() {
            let t = grid.time(grid.unravel(idx)[3]);
            f.e[0][idx] = 2.0 + ripple * (w * t).cos();
        }
        f
    }

    #[test]
    fn pure_dc_field_is_scale_independent() {
        let f = rippled(0.0);
        let scales = ScaleGrid::log_spaced(0.1, 10.0, 8).unwrap();
        let r = static_limit_check(&f, &scales, Boundary::Periodic, &DcPolicy::TimeMean, 1e-14).unwrap();
        assert!(r.monotone());
        assert!(r.x.final_deviation < 1e-14);
        assert!(r.u.final_deviation < 1e-14);
        assert!(r.static_balance < 1e-14);
    }

    #[test]
    fn electric_dc_with_ripple_tends_to_minus_quarter_e_squared() {
        let f = rippled(0.1);
        let scales = ScaleGrid::log_spaced(0.05, 20.0, 24).unwrap();
        let r = static_limit_check(&f, &scales, Boundary::Periodic, &DcPolicy::TimeMean, 1e-12).unwrap();
        assert!(r.within_bound(), "{} vs {}", r.x.final_deviation, r.bound);
        assert!(r.x.final_deviation < 1e-3);
    }

    #[test]
    fn zero_policy_is_rejected() {
        let f = rippled(0.1);
        let scales = ScaleGrid::single(1.0).unwrap();
        assert!(static_limit_check(&f, &scales, Boundary::Periodic, &DcPolicy::Zero, 0.0).is_err());
    }
}
