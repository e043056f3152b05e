use std::f64::consts::TAU;

use num_complex::Complex;
use proptest::prelude::*;
use reactive_time::densities::scaled_densities;
use reactive_time::estf::EstfFile;
use reactive_time::field::{AnalyticEMField, EMFieldSample};
use reactive_time::grid::SpaceTimeGrid;
use reactive_time::kernel::{analytic_transform_with, hilbert_sharp, s_norm, Boundary, ScaleGrid};
use reactive_time::RealSignal;

const N: usize = 256;
const DT: f64 = 0.05;

fn tones() -> impl Strategy<Value = Vec<(usize, f64, f64)>> {
    prop::collection::vec((1usize..N / 2, -2.0f64..2.0, -3.0f64..3.0), 1..6)
}

fn signal(tones: &[(usize, f64, f64)]) -> RealSignal {
    let w0 = TAU / (N as f64 * DT);
    RealSignal::from_fn(N, DT, 0.0, |t: f64| tones.iter().map(|&(b, a, p)| a * (b as f64 * w0 * t + p).cos()).sum())
        .unwrap()
}

fn peak(x: &RealSignal) -> f64 {
    x.channel(0).iter().fold(1e-300, |m, v| m.max(v.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn transform_matches_one_sided_closed_form(tones in tones(), s in 0.0f64..0.5) {
        let x = signal(&tones);
        let a = analytic_transform_with(&x, &ScaleGrid::single(s).unwrap(), Boundary::Periodic).unwrap().remove(0);
        let w0 = TAU / (N as f64 * DT);
        let mut err = 0.0f64;
        for k in 0..N {
            let t = k as f64 * DT;
            let mut expect = Complex::new(0.0, 0.0);
            for &(b, amp, p) in &tones {
                let w = b as f64 * w0;
                expect += Complex::from_polar(amp * (-w * s).exp(), w * t + p);
            }
            err = err.max((a.channels[0][k] - expect).norm());
        }
        let scale: f64 = tones.iter().map(|t| t.1.abs()).sum::<f64>().max(1e-300);
        prop_assert!(err / scale < 1e-12, "{err} vs {scale}");
    }

    #[test]
    fn real_part_at_zero_scale_reconstructs(tones in tones()) {
        let x = signal(&tones);
        let a = analytic_transform_with(&x, &ScaleGrid::single(0.0).unwrap(), Boundary::Periodic).unwrap().remove(0);
        let err = a.channels[0].iter().zip(x.channel(0)).map(|(z, v)| (z.re - v).abs()).fold(0.0, f64::max);
        prop_assert!(err / peak(&x) < 1e-12);
    }

    #[test]
    fn scales_compose(tones in tones(), s1 in 0.0f64..0.4, s2 in 0.0f64..0.4) {
        // taking Re at s1 and transforming by s2 lands on s1 + s2
        let x = signal(&tones);
        let grid = ScaleGrid::new(vec![s1, s1 + s2]).unwrap();
        let both = analytic_transform_with(&x, &grid, Boundary::Periodic).unwrap();
        let re: Vec<f64> = both[0].channels[0].iter().map(|z| z.re).collect();
        let y = RealSignal::scalar(re, DT, 0.0).unwrap();
        let again = analytic_transform_with(&y, &ScaleGrid::single(s2).unwrap(), Boundary::Periodic).unwrap().remove(0);
        let err = again.channels[0].iter().zip(&both[1].channels[0]).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        prop_assert!(err / peak(&x) < 1e-10);
    }

    #[test]
    fn plancherel_and_norm_decay(tones in tones(), s in 0.0f64..0.5, ds in 0.01f64..0.5) {
        let x = signal(&tones);
        let grid = ScaleGrid::new(vec![s, s + ds]).unwrap();
        let a = analytic_transform_with(&x, &grid, Boundary::Periodic).unwrap();
        let n0 = s_norm(&a[0]);
        let n1 = s_norm(&a[1]);
        prop_assert!(n0.relative_gap() < 1e-10);
        prop_assert!(n1.time_domain <= n0.time_domain * (1.0 + 1e-12));
    }

    #[test]
    fn hilbert_squared_is_minus_identity(tones in tones()) {
        let x = signal(&tones);
        let hh = hilbert_sharp(&hilbert_sharp(&x, Boundary::Periodic).unwrap(), Boundary::Periodic).unwrap();
        let err = hh.channel(0).iter().zip(x.channel(0)).map(|(a, b)| (a + b).abs()).fold(0.0, f64::max);
        prop_assert!(err / peak(&x) < 1e-10);
    }

    #[test]
    fn density_identities_hold_pointwise(values in prop::collection::vec(-3.0f64..3.0, 4 * 20)) {
        let grid = SpaceTimeGrid::zt(2, 0.1, 0.0, 2, 0.1, 0.0).unwrap();
        let mut f = AnalyticEMField::zeros(grid, 0.2);
        for idx in 0..4 {
            let v = &values[idx * 20..(idx + 1) * 20];
            for c in 0..3 {
                f.e[c][idx] = Complex::new(v[c], v[3 + c]);
                f.h[c][idx] = Complex::new(v[6 + c], v[9 + c]);
                f.j[c][idx] = Complex::new(v[12 + c], v[15 + c]);
            }
        }
        let b = scaled_densities(&f).unwrap();
        for idx in 0..4 {
            let u = b.u[idx];
            let s2: f64 = (0..3).map(|c| b.s[c][idx].powi(2)).sum();
            let t2: f64 = (0..3).map(|c| b.t[c][idx].powi(2)).sum();
            let gap = (u * u - s2 - t2 - b.x[idx].powi(2) - b.r[idx].powi(2)).abs();
            prop_assert!(gap <= 1e-12 * u * u.max(1.0));
            prop_assert!(u >= b.x[idx].abs());
            prop_assert!((b.wm[idx] + b.we[idx] - u).abs() <= 1e-14 * u.max(1.0));
            prop_assert!((b.wm[idx] - b.we[idx] - b.x[idx]).abs() <= 1e-14 * u.max(1.0));
        }
    }

    #[test]
    fn estf_round_trips_random_fields(
        dims in (1usize..3, 1usize..3, 1usize..4, 1usize..5),
        seed in prop::collection::vec(-1e6f64..1e6, 10),
    ) {
        let grid = SpaceTimeGrid::new([dims.0, dims.1, dims.2, dims.3], [0.1, 0.2, 0.3, 0.05], [0.0, -1.0, 2.5, 0.0]).unwrap();
        let n = grid.len();
        let mut f = EMFieldSample::zeros(grid);
        let fill = |k: usize| -> Vec<f64> { (0..n).map(|i| seed[k] * (i as f64 + 1.0).sin()).collect() };
        for c in 0..3 {
            f.e[c] = fill(c);
            f.h[c] = fill(3 + c);
            f.j[c] = fill(6 + c);
        }
        f.rho = fill(9);
        let bytes = EstfFile::from_sample(&f).unwrap().to_bytes().unwrap();
        let back = EstfFile::from_bytes(&bytes).unwrap();
        prop_assert_eq!(&back.to_bytes().unwrap(), &bytes);
        prop_assert_eq!(back.to_sample().unwrap(), f);
    }
}
