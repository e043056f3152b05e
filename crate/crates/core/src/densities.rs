//! Quadratic densities of analytic and local fields: energies, fluxes,
//! powers, the inertia and pseudoscalar densities, and the split into
//! semi-local and nonlocal parts.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::field::{analytic_fields, AnalyticEMField, DcPolicy, EMFieldSample, ScaleStack, StaticFields};
use crate::grid::SpaceTimeGrid;
use crate::kernel::{Boundary, ScaleGrid};
use crate::scalar::Real;

type C<T> = Complex<T>;

fn at3<V: Copy>(f: &[Vec<V>; 3], idx: usize) -> [V; 3] {
    [f[0][idx], f[1][idx], f[2][idx]]
}

fn cross<V: Copy + std::ops::Mul<Output = V> + std::ops::Sub<Output = V>>(a: [V; 3], b: [V; 3]) -> [V; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn dot<V: Copy + std::ops::Mul<Output = V> + std::ops::Add<Output = V>>(a: [V; 3], b: [V; 3]) -> V {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn conj3<T: Real>(a: [C<T>; 3]) -> [C<T>; 3] {
    a.map(|z| z.conj())
}

fn norm_sq3<T: Real>(a: [C<T>; 3]) -> T {
    a.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr())
}

fn zeros3<T: Real>(n: usize) -> [Vec<T>; 3] {
    [vec![T::zero(); n], vec![T::zero(); n], vec![T::zero(); n]]
}

/// Scaled densities of one analytic field at one scale, on every grid node.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityBundle<T> {
    pub grid: SpaceTimeGrid<T>,
    pub scale: T,
    /// `𝒲_m = ¼|𝐇|²`
    pub wm: Vec<T>,
    /// `𝒲_e = ¼|𝐄|²`
    pub we: Vec<T>,
    pub u: Vec<T>,
    pub x: Vec<T>,
    /// `𝐒 = ½ Re(𝐄×𝐇̄)`
    pub s: [Vec<T>; 3],
    /// `𝐓 = ½ Im(𝐄×𝐇̄)`
    pub t: [Vec<T>; 3],
    /// `𝒫 = −½ Re(𝐄·𝐉̄)`
    pub p: Vec<T>,
    /// `𝒬 = −½ Im(𝐄·𝐉̄)`
    pub q: Vec<T>,
    /// `ℛ = ½|𝐄·𝐇|`
    pub r: Vec<T>,
    /// `½ 𝐄·𝐇` before taking the modulus.
    pub r_signed: Vec<C<T>>,
    /// `ℐ = √(𝒳² + ℛ²)`
    pub inertia: Vec<T>,
    /// `√(𝒰² − 𝐒² − 𝐓²)`, clamped at zero.
    pub inertia_flux: Vec<T>,
    /// Nodes where `𝒰² − 𝐒² − 𝐓²` came out negative and was clamped.
    pub clamped: usize,
}

impl<T: Real> DensityBundle<T> {
    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn s_at(&self, idx: usize) -> [T; 3] {
        at3(&self.s, idx)
    }

    pub fn t_at(&self, idx: usize) -> [T; 3] {
        at3(&self.t, idx)
    }
}

/// Scaled densities of `f`. An absent current (all zeros) gives `𝒫 = 𝒬 = 0`.
pub fn scaled_densities<T: Real>(f: &AnalyticEMField<T>) -> Result<DensityBundle<T>> {
    f.validate()?;
    let n = f.grid.len();
    let quarter = T::lit(0.25);
    let half = T::lit(0.5);
    let mut b = DensityBundle {
        grid: f.grid,
        scale: f.scale,
        wm: vec![T::zero(); n],
        we: vec![T::zero(); n],
        u: vec![T::zero(); n],
        x: vec![T::zero(); n],
        s: zeros3(n),
        t: zeros3(n),
        p: vec![T::zero(); n],
        q: vec![T::zero(); n],
        r: vec![T::zero(); n],
        r_signed: vec![C::new(T::zero(), T::zero()); n],
        inertia: vec![T::zero(); n],
        inertia_flux: vec![T::zero(); n],
        clamped: 0,
    };
    for idx in 0..n {
        let e = at3(&f.e, idx);
        let h = at3(&f.h, idx);
        let j = at3(&f.j, idx);
        let wm = quarter * norm_sq3(h);
        let we = quarter * norm_sq3(e);
        let u = wm + we;
        let x = wm - we;
        let sc = cross(e, conj3(h));
        let pq = dot(e, conj3(j));
        let eh = dot(e, h) * half;
        b.wm[idx] = wm;
        b.we[idx] = we;
        b.u[idx] = u;
        b.x[idx] = x;
        for c in 0..3 {
            b.s[c][idx] = half * sc[c].re;
            b.t[c][idx] = half * sc[c].im;
        }
        b.p[idx] = -half * pq.re;
        b.q[idx] = -half * pq.im;
        b.r_signed[idx] = eh;
        b.r[idx] = eh.norm();
        b.inertia[idx] = (x * x + b.r[idx] * b.r[idx]).sqrt();
        let ss = dot(b.s_at(idx), b.s_at(idx)) + dot(b.t_at(idx), b.t_at(idx));
        let gap = u * u - ss;
        if gap < T::zero() {
            b.clamped += 1;
        }
        b.inertia_flux[idx] = gap.max(T::zero()).sqrt();
    }
    Ok(b)
}

/// Local (sharp-time) densities of a real field.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalDensityBundle<T> {
    pub grid: SpaceTimeGrid<T>,
    /// `W_m = ½H²`
    pub wm: Vec<T>,
    /// `W_e = ½E²`
    pub we: Vec<T>,
    pub u: Vec<T>,
    /// `X = ½(H² − E²)`
    pub x: Vec<T>,
    /// `R = |E·H|`
    pub r: Vec<T>,
    /// `E·H`
    pub r_signed: Vec<T>,
    /// `I = √(U² − S²)`, clamped at zero.
    pub i: Vec<T>,
    /// `S = E×H`
    pub s: [Vec<T>; 3],
    /// `P = −E·J`
    pub p: Vec<T>,
    pub clamped: usize,
}

pub fn local_densities<T: Real>(f: &EMFieldSample<T>) -> Result<LocalDensityBundle<T>> {
    f.validate()?;
    let n = f.grid.len();
    let half = T::lit(0.5);
    let mut b = LocalDensityBundle {
        grid: f.grid,
        wm: vec![T::zero(); n],
        we: vec![T::zero(); n],
        u: vec![T::zero(); n],
        x: vec![T::zero(); n],
        r: vec![T::zero(); n],
        r_signed: vec![T::zero(); n],
        i: vec![T::zero(); n],
        s: zeros3(n),
        p: vec![T::zero(); n],
        clamped: 0,
    };
    for idx in 0..n {
        let e = at3(&f.e, idx);
        let h = at3(&f.h, idx);
        let j = at3(&f.j, idx);
        let wm = half * dot(h, h);
        let we = half * dot(e, e);
        let s = cross(e, h);
        b.wm[idx] = wm;
        b.we[idx] = we;
        b.u[idx] = wm + we;
        b.x[idx] = wm - we;
        b.r_signed[idx] = dot(e, h);
        b.r[idx] = b.r_signed[idx].abs();
        for c in 0..3 {
            b.s[c][idx] = s[c];
        }
        b.p[idx] = -dot(e, j);
        let gap = b.u[idx] * b.u[idx] - dot(s, s);
        if gap < T::zero() {
            b.clamped += 1;
        }
        b.i[idx] = gap.max(T::zero()).sqrt();
    }
    Ok(b)
}

/// Densities of one real part (`𝐗₁` or `𝐗₂`) of an analytic field.
#[derive(Debug, Clone, PartialEq)]
pub struct PartDensities<T> {
    pub wm: Vec<T>,
    pub we: Vec<T>,
    pub u: Vec<T>,
    pub x: Vec<T>,
    /// `½ 𝐄_k × 𝐇_k`
    pub s: [Vec<T>; 3],
    /// `−½ 𝐄_k · 𝐉_k`
    pub p: Vec<T>,
}

/// Mixed terms carrying all of the reactive flux and power.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossTerms<T> {
    /// `½(𝐄₂×𝐇₁ − 𝐄₁×𝐇₂)`
    pub t: [Vec<T>; 3],
    /// `½(𝐄₁·𝐉₂ − 𝐄₂·𝐉₁)`
    pub q: Vec<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitDensities<T> {
    pub grid: SpaceTimeGrid<T>,
    pub scale: T,
    pub semi_local: PartDensities<T>,
    pub nonlocal: PartDensities<T>,
    pub cross: CrossTerms<T>,
}

/// Static part is accepted when `‖dc‖_rms ≤ DC_TOLERANCE · ‖signal‖_rms`.
pub const DC_TOLERANCE: f64 = 1e-9;

fn part<T: Real>(e: &[Vec<T>; 3], h: &[Vec<T>; 3], j: &[Vec<T>; 3]) -> PartDensities<T> {
    let n = e[0].len();
    let quarter = T::lit(0.25);
    let half = T::lit(0.5);
    let mut out = PartDensities {
        wm: vec![T::zero(); n],
        we: vec![T::zero(); n],
        u: vec![T::zero(); n],
        x: vec![T::zero(); n],
        s: zeros3(n),
        p: vec![T::zero(); n],
    };
    for idx in 0..n {
        let (ev, hv, jv) = (at3(e, idx), at3(h, idx), at3(j, idx));
        out.wm[idx] = quarter * dot(hv, hv);
        out.we[idx] = quarter * dot(ev, ev);
        out.u[idx] = out.wm[idx] + out.we[idx];
        out.x[idx] = out.wm[idx] - out.we[idx];
        let s = cross(ev, hv);
        for c in 0..3 {
            out.s[c][idx] = half * s[c];
        }
        out.p[idx] = -half * dot(ev, jv);
    }
    out
}

fn check_dc_free<T: Real>(f: &AnalyticEMField<T>) -> Result<()> {
    let Some(dc) = &f.dc else { return Ok(()) };
    let ns = f.grid.spatial_len();
    let dc_rms = (dc.norm_sq() / T::from_index(ns)).sqrt();
    let total = f.channels().iter().flat_map(|c| c.iter()).fold(T::zero(), |acc, z| acc + z.norm_sqr());
    let sig_rms = (total / T::from_index(f.grid.len())).sqrt();
    if dc_rms > T::lit(DC_TOLERANCE) * sig_rms {
        return Err(Error::NonzeroDc(format!(
            "static part {dc_rms:e} exceeds {DC_TOLERANCE:e} of the signal {sig_rms:e}; \
             the semi-local split is defined for fields without DC components"
        )));
    }
    Ok(())
}

/// Splits `f = 𝐗₁ + i𝐗₂` into its Poisson-smoothed and Hilbert-smoothed
/// parts and builds their densities and the mixed reactive terms.
pub fn split_semilocal<T: Real>(f: &AnalyticEMField<T>) -> Result<SplitDensities<T>> {
    f.validate()?;
    check_dc_free(f)?;
    let re = f.real_part();
    let im = f.imag_part();
    let n = f.grid.len();
    let half = T::lit(0.5);
    let mut cross_terms = CrossTerms { t: zeros3(n), q: vec![T::zero(); n] };
    for idx in 0..n {
        let (e1, h1, j1) = (at3(&re.e, idx), at3(&re.h, idx), at3(&re.j, idx));
        let (e2, h2, j2) = (at3(&im.e, idx), at3(&im.h, idx), at3(&im.j, idx));
        let a = cross(e2, h1);
        let b = cross(e1, h2);
        for c in 0..3 {
            cross_terms.t[c][idx] = half * (a[c] - b[c]);
        }
        cross_terms.q[idx] = half * (dot(e1, j2) - dot(e2, j1));
    }
    Ok(SplitDensities {
        grid: f.grid,
        scale: f.scale,
        semi_local: part(&re.e, &re.h, &re.j),
        nonlocal: part(&im.e, &im.h, &im.j),
        cross: cross_terms,
    })
}

/// Worst adjacent-scale increases of `𝒲_m` and `𝒲_e` over all nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonotoneReport<T> {
    /// Largest `𝒲(s_{q+1}) − 𝒲(s_q)`; positive means an increase with scale.
    pub worst_wm: T,
    pub worst_we: T,
    /// Node-scale pairs whose increase exceeds the tolerance.
    pub wm_violations: usize,
    pub we_violations: usize,
    pub checked: usize,
}

impl<T: Real> MonotoneReport<T> {
    pub fn violations(&self) -> usize {
        self.wm_violations + self.we_violations
    }
}

/// Deviation of the largest finite scale from the halved static densities,
/// with the ceiling implied by the static-limit decay bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StaticDeviation<T> {
    pub scale: T,
    /// `max |𝒰(s) − ½U∞|`
    pub u_deviation: T,
    /// `max |𝒳(s) − ½X∞|`
    pub x_deviation: T,
    /// Pointwise bound, maximised over nodes.
    pub bound: T,
    /// Nodes where either deviation exceeds its local bound.
    pub exceeded: usize,
}

#[derive(Debug, Clone)]
pub struct ScaleScan<T> {
    pub bundles: Vec<DensityBundle<T>>,
    pub monotone: MonotoneReport<T>,
    pub static_limit: Option<StaticDeviation<T>>,
}

fn monotone_report<T: Real>(bundles: &[DensityBundle<T>], tol: T) -> MonotoneReport<T> {
    let mut r = MonotoneReport {
        worst_wm: T::neg_infinity(),
        worst_we: T::neg_infinity(),
        wm_violations: 0,
        we_violations: 0,
        checked: 0,
    };
    for w in bundles.windows(2) {
        for idx in 0..w[0].len() {
            let dm = w[1].wm[idx] - w[0].wm[idx];
            let de = w[1].we[idx] - w[0].we[idx];
            r.worst_wm = r.worst_wm.max(dm);
            r.worst_we = r.worst_we.max(de);
            r.wm_violations += usize::from(dm > tol);
            r.we_violations += usize::from(de > tol);
            r.checked += 1;
        }
    }
    r
}

/// Per-node `b_E, b_H` with `b_F² = ‖F − F∞‖² / (2πs)`, the time integral
/// taken over the record.
fn fluctuation_bounds<T: Real>(f: &EMFieldSample<T>, dc: &StaticFields<T>, s: T) -> Vec<[T; 2]> {
    let g = &f.grid;
    let ns = g.spatial_len();
    (0..ns)
        .map(|p| {
            let mut out = [T::zero(); 2];
            for (k, (series, stat)) in [(&f.e, &dc.e), (&f.h, &dc.h)].into_iter().enumerate() {
                let mut acc = T::zero();
                for c in 0..3 {
                    for it in 0..g.nt {
                        let d = series[c][p + it * ns] - stat[c][p];
                        acc = acc + d * d;
                    }
                }
                out[k] = (acc * g.dt / (T::TAU() * s)).sqrt();
            }
            out
        })
        .collect()
}

/// Pointwise ceiling on `|𝒰(s) − ½U∞|` and `|𝒳(s) − ½X∞|` per spatial node,
/// `¼ Σ_F (2|F∞| b_F + b_F²)` over `F ∈ {E, H}`.
pub fn static_limit_bounds<T: Real>(f: &EMFieldSample<T>, dc: &StaticFields<T>, s: T) -> Result<Vec<T>> {
    if !(s > T::zero()) {
        return Err(Error::KernelOnBoundary(s.to_f64_lossy()));
    }
    let ns = f.grid.spatial_len();
    for c in dc.channels() {
        if c.len() != ns {
            return Err(Error::Mismatch("static fields do not match the grid".into()));
        }
    }
    let quarter = T::lit(0.25);
    let two = T::lit(2.0);
    Ok(fluctuation_bounds(f, dc, s)
        .into_iter()
        .enumerate()
        .map(|(p, [be, bh])| {
            let e_inf = [dc.e[0][p], dc.e[1][p], dc.e[2][p]];
            let h_inf = [dc.h[0][p], dc.h[1][p], dc.h[2][p]];
            let (ee, hh) = (dot(e_inf, e_inf).sqrt(), dot(h_inf, h_inf).sqrt());
            quarter * (two * ee * be + be * be + two * hh * bh + bh * bh)
        })
        .collect())
}

fn static_deviation<T: Real>(
    f: &EMFieldSample<T>,
    dc: &StaticFields<T>,
    top: &DensityBundle<T>,
) -> Result<StaticDeviation<T>> {
    let g = &f.grid;
    let ns = g.spatial_len();
    let quarter = T::lit(0.25);
    let bounds = static_limit_bounds(f, dc, top.scale)?;
    let mut out = StaticDeviation {
        scale: top.scale,
        u_deviation: T::zero(),
        x_deviation: T::zero(),
        bound: T::zero(),
        exceeded: 0,
    };
    for idx in 0..g.len() {
        let p = idx % ns;
        let e_inf = [dc.e[0][p], dc.e[1][p], dc.e[2][p]];
        let h_inf = [dc.h[0][p], dc.h[1][p], dc.h[2][p]];
        let (ee, hh) = (dot(e_inf, e_inf), dot(h_inf, h_inf));
        let du = (top.u[idx] - quarter * (ee + hh)).abs();
        let dx = (top.x[idx] - quarter * (hh - ee)).abs();
        out.u_deviation = out.u_deviation.max(du);
        out.x_deviation = out.x_deviation.max(dx);
        out.bound = out.bound.max(bounds[p]);
        out.exceeded += usize::from(du > bounds[p] || dx > bounds[p]);
    }
    Ok(out)
}

/// Densities at every scale of `stack`, with the monotonicity audit.
pub fn scan_stack<T: Real>(stack: &ScaleStack<T>, tol: T) -> Result<ScaleScan<T>> {
    let bundles =
        stack.fields.iter().filter(|f| f.scale.is_finite()).map(scaled_densities).collect::<Result<Vec<_>>>()?;
    let monotone = monotone_report(&bundles, tol);
    Ok(ScaleScan { bundles, monotone, static_limit: None })
}

/// Transforms `f` at every scale of `grid`, evaluates the densities and
/// audits monotonicity in `s`. With a static part supplied or estimated,
/// also reports the deviation at the largest scale from the halved static
/// densities against its decay bound.
pub fn scan_scale<T: Real>(
    f: &EMFieldSample<T>,
    grid: &ScaleGrid<T>,
    boundary: Boundary,
    dc: &DcPolicy<T>,
    tol: T,
) -> Result<ScaleScan<T>> {
    let stack = analytic_fields(f, grid, boundary, dc)?;
    let mut scan = scan_stack(&stack, tol)?;
    if let (Some(statics), Some(top)) = (&stack.fields[0].dc, scan.bundles.last()) {
        if top.scale > T::zero() {
            scan.static_limit = Some(static_deviation(f, statics, top)?);
        }
    }
    Ok(scan)
}
