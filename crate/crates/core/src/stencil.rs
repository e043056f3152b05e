//! Finite-difference stencils shared by the residual evaluators.

use std::ops::{Add, Div, Mul, Sub};

use num_complex::Complex;
use num_traits::Zero;

use crate::scalar::Real;

/// Values that can be differenced: real scalars and complex scalars.
pub trait FieldValue<T: Real>:
    Copy + Zero + Add<Output = Self> + Sub<Output = Self> + Mul<T, Output = Self> + Div<T, Output = Self>
{
    fn magnitude(self) -> T;
}

impl<T: Real> FieldValue<T> for T {
    fn magnitude(self) -> T {
        self.abs()
    }
}

impl<T: Real> FieldValue<T> for Complex<T> {
    fn magnitude(self) -> T {
        self.norm()
    }
}

/// Derivative at the middle of three (possibly unevenly spaced) nodes.
/// Second-order accurate on any spacing.
pub fn derivative_3pt<T: Real, V: FieldValue<T>>(x: [T; 3], f: [V; 3]) -> V {
    let h0 = x[1] - x[0];
    let h1 = x[2] - x[1];
    let w0 = -h1 / (h0 * (h0 + h1));
    let w1 = (h1 - h0) / (h0 * h1);
    let w2 = h0 / (h1 * (h0 + h1));
    f[0] * w0 + f[1] * w1 + f[2] * w2
}

/// Centred difference on a uniform grid.
#[inline]
pub fn centred<T: Real, V: FieldValue<T>>(minus: V, plus: V, h: T) -> V {
    (plus - minus) / (h + h)
}

/// Second-order one-sided difference at the first node, `f0, f1, f2` moving
/// away from the boundary with step `h` (negative `h` for the far end).
#[inline]
pub fn one_sided<T: Real, V: FieldValue<T>>(f0: V, f1: V, f2: V, h: T) -> V {
    (f1 * T::lit(4.0) - f0 * T::lit(3.0) - f2) / (h + h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_point_exact_on_quadratics() {
        let f = |x: f64| 2.0 - 3.0 * x + 0.7 * x * x;
        let xs = [0.1, 0.35, 1.0];
        let d = derivative_3pt(xs, [f(xs[0]), f(xs[1]), f(xs[2])]);
        assert!((d - (-3.0 + 1.4 * 0.35)).abs() < 1e-13);
    }

    #[test]
    fn one_sided_exact_on_quadratics() {
        let f = |x: f64| 1.0 + x + x * x;
        let h = 0.2;
        assert!((one_sided(f(0.0), f(h), f(2.0 * h), h) - 1.0).abs() < 1e-13);
        assert!((one_sided(f(1.0), f(1.0 - h), f(1.0 - 2.0 * h), -h) - 3.0).abs() < 1e-12);
    }
}
