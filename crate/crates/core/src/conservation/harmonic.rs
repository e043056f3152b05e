//! Reduction of the complex law to the time-harmonic complex Poynting
//! theorem for single-mode fields.

use num_complex::Complex;
use rustfft::FftPlanner;

use super::residual::{residual_complex, stack_densities, ResidualField};
use crate::error::{Error, Result};
use crate::field::{AnalyticEMField, ScaleStack};
use crate::grid::Axis;
use crate::scalar::Real;
use crate::stencil::derivative_3pt;

/// Fraction of spectral energy that must sit in one bin.
pub const SINGLE_MODE_CONCENTRATION: f64 = 0.999;

/// Dominant angular frequency of the analytic `𝐄, 𝐇` time series and the
/// fraction of energy in that bin.
pub fn dominant_frequency<T: Real>(f: &AnalyticEMField<T>) -> Result<(T, T)> {
    let g = &f.grid;
    let (ns, nt) = (g.spatial_len(), g.nt);
    if nt < 4 {
        return Err(Error::TooFewSamples(format!("need ≥ 4 time steps for a spectrum, got {nt}")));
    }
    let fft = FftPlanner::new().plan_fft_forward(nt);
    let mut power = vec![T::zero(); nt];
    let mut buf = vec![Complex::new(T::zero(), T::zero()); nt];
    for series in f.e.iter().chain(f.h.iter()) {
        for p in 0..ns {
            for (it, z) in buf.iter_mut().enumerate() {
                *z = series[p + it * ns];
            }
            fft.process(&mut buf);
            for (acc, z) in power.iter_mut().zip(&buf) {
                *acc = *acc + z.norm_sqr();
            }
        }
    }
    let total = power.iter().fold(T::zero(), |a, v| a + *v);
    if total == T::zero() {
        return Err(Error::NotSingleMode("field is identically zero".into()));
    }
    let (k, peak) = power.iter().enumerate().fold((0, T::zero()), |best, (k, v)| if *v > best.1 { (k, *v) } else { best });
    let signed = if 2 * k > nt { k as f64 - nt as f64 } else { k as f64 };
    let omega = T::TAU() * T::lit(signed) / (T::from_index(nt) * g.dt);
    Ok((omega, peak / total))
}

#[derive(Debug, Clone)]
pub struct HarmonicReduction<T> {
    pub omega: T,
    pub concentration: T,
    /// `iω(|𝐇_o|² − |𝐄_o|²) + div(𝐄_o×𝐇̄_o) + 𝐄_o·𝐉̄_o` from demodulated phasors.
    pub cp: ResidualField<Complex<T>, T>,
    /// `max |CP − 2e^{2ωs}·CPT|` relative to the size of the reactive term.
    pub rescaling_gap: T,
    /// `max |∂_t q|` over `𝒰, 𝒳, 𝐒, 𝐓`, relative to `max 𝒰`.
    pub time_derivative: T,
    /// `max |−2i∂_s𝒳 − 4iω𝒳|` relative to `max |4ω𝒳|`.
    pub ds_identity_gap: T,
}

/// Demodulates the interior scales of a single-mode stack and compares the
/// time-harmonic complex Poynting residual with the rescaled complex law.
pub fn timeharmonic_reduction<T: Real>(stack: &ScaleStack<T>) -> Result<HarmonicReduction<T>> {
    let bundles = stack_densities(stack)?;
    let centre = &stack.fields[stack.len() / 2];
    let (omega, concentration) = dominant_frequency(centre)?;
    if concentration < T::lit(SINGLE_MODE_CONCENTRATION) {
        return Err(Error::NotSingleMode(format!(
            "{:.4}% of the spectral energy in the strongest bin, need {}%",
            concentration.to_f64_lossy() * 100.0,
            SINGLE_MODE_CONCENTRATION * 100.0
        )));
    }
    let cpt = residual_complex(stack)?;
    let g = *stack.grid();
    let zero = Complex::new(T::zero(), T::zero());
    let i = Complex::<T>::i();
    let two = T::lit(2.0);
    let mut cp_values = Vec::with_capacity(cpt.len());
    let mut gap = T::zero();
    let mut term_scale = T::zero();
    let mut last_q = usize::MAX;
    let mut flux = [vec![zero; g.len()], vec![zero; g.len()], vec![zero; g.len()]];
    let mut react = vec![zero; g.len()];
    let mut power = vec![zero; g.len()];
    for (k, &(q, idx)) in cpt.points.iter().enumerate() {
        let f = &stack.fields[q];
        if q != last_q {
            last_q = q;
            for n in 0..g.len() {
                let t = g.time(g.unravel(n)[3]);
                let demod = (-(i * Complex::new(t, f.scale) * omega)).exp();
                let e = [f.e[0][n] * demod, f.e[1][n] * demod, f.e[2][n] * demod];
                let h = [f.h[0][n] * demod, f.h[1][n] * demod, f.h[2][n] * demod];
                let j = [f.j[0][n] * demod, f.j[1][n] * demod, f.j[2][n] * demod];
                let hb = h.map(|z| z.conj());
                flux[0][n] = e[1] * hb[2] - e[2] * hb[1];
                flux[1][n] = e[2] * hb[0] - e[0] * hb[2];
                flux[2][n] = e[0] * hb[1] - e[1] * hb[0];
                let hh = h.iter().fold(T::zero(), |a, z| a + z.norm_sqr());
                let ee = e.iter().fold(T::zero(), |a, z| a + z.norm_sqr());
                react[n] = i * omega * (hh - ee);
                power[n] = e[0] * j[0].conj() + e[1] * j[1].conj() + e[2] * j[2].conj();
            }
        }
        let cp = react[idx] + g.divergence(&flux, idx) + power[idx];
        let rescaled = cpt.values[k] * (two * (two * omega * f.scale).exp());
        gap = gap.max((cp - rescaled).norm());
        term_scale = term_scale.max(react[idx].norm());
        cp_values.push(cp);
    }
    let cp = ResidualField {
        values: cp_values,
        points: cpt.points.clone(),
        norm_max: T::zero(),
        norm_l2: T::zero(),
        stencil: "demodulated phasors, centred 2nd order in space",
        convergence_order: None,
    };
    let cp = finish_norms(cp, g.cell_volume() * g.dt);

    let mut dt_max = T::zero();
    let mut u_max = T::zero();
    let mut ds_gap = T::zero();
    let mut x_max = T::zero();
    for &(q, idx) in &cpt.points {
        let b = &bundles[q];
        let mut worst = g.derivative(&b.u, Axis::T, idx).abs().max(g.derivative(&b.x, Axis::T, idx).abs());
        for c in 0..3 {
            worst = worst.max(g.derivative(&b.s[c], Axis::T, idx).abs());
            worst = worst.max(g.derivative(&b.t[c], Axis::T, idx).abs());
        }
        dt_max = dt_max.max(worst);
        u_max = u_max.max(b.u[idx].abs());
        let dsx = derivative_3pt(
            [bundles[q - 1].scale, b.scale, bundles[q + 1].scale],
            [bundles[q - 1].x[idx], b.x[idx], bundles[q + 1].x[idx]],
        );
        ds_gap = ds_gap.max(two * (dsx + two * omega * b.x[idx]).abs());
        x_max = x_max.max(b.x[idx].abs());
    }
    let tiny = T::min_positive_value();
    Ok(HarmonicReduction {
        omega,
        concentration,
        cp,
        rescaling_gap: gap / term_scale.max(tiny),
        time_derivative: dt_max / u_max.max(tiny),
        ds_identity_gap: ds_gap / (T::lit(4.0) * omega.abs() * x_max).max(tiny),
    })
}

fn finish_norms<T: Real>(mut r: ResidualField<Complex<T>, T>, weight: T) -> ResidualField<Complex<T>, T> {
    let mut max = T::zero();
    let mut sum = T::zero();
    for v in &r.values {
        max = max.max(v.norm());
        sum = sum + v.norm_sqr();
    }
    r.norm_max = max;
    r.norm_l2 = (sum * weight).sqrt();
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{AnalyticGenerator, Mode, Multimode, StandingWave};
    use crate::grid::SpaceTimeGrid;

    fn grid() -> SpaceTimeGrid<f64> {
        let h = std::f64::consts::TAU / 32.0;
        SpaceTimeGrid::zt(32, h, 0.0, 32, h, 0.0).unwrap()
    }

    #[test]
    fn standing_wave_reduces_to_time_harmonic_theorem() {
        let ds = 1e-5;
        let stack = StandingWave::new(1.0, 1.0).unwrap().stack(&grid(), &[0.3 - ds, 0.3, 0.3 + ds]).unwrap();
        let r = timeharmonic_reduction(&stack).unwrap();
        assert!((r.omega - 1.0).abs() < 1e-12);
        assert!(r.rescaling_gap < 1e-8, "{}", r.rescaling_gap);
        assert!(r.time_derivative < 1e-12, "{}", r.time_derivative);
        assert!(r.ds_identity_gap < 1e-8, "{}", r.ds_identity_gap);
    }

    #[test]
    fn multimode_input_is_rejected() {
        let m = Multimode::new(vec![
            Mode { omega: 1.0, amplitude: 1.0, polarization: 0.0 },
            Mode { omega: 2.0, amplitude: 1.0, polarization: 0.0 },
        ])
        .unwrap();
        let stack = m.stack(&grid(), &[0.1, 0.2, 0.3]).unwrap();
        assert!(matches!(timeharmonic_reduction(&stack), Err(Error::NotSingleMode(_))));
    }
}
