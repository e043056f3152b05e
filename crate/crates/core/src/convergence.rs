//! Observed convergence order under grid refinement.

use crate::error::Result;
use crate::scalar::Real;

/// Outcome of comparing errors on successively halved grids.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Order<T> {
    /// `log₂(e_h / e_{h/2})`
    Measured(T),
    /// Both errors sit at the roundoff floor: the scheme is exact here.
    Exact,
}

impl<T: Real> Order<T> {
    /// `+∞` for [`Order::Exact`].
    pub fn value(&self) -> T {
        match self {
            Order::Measured(p) => *p,
            Order::Exact => T::infinity(),
        }
    }

    pub fn at_least(&self, p: T) -> bool {
        self.value() >= p
    }
}

impl<T: Real> std::fmt::Display for Order<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Order::Measured(p) => write!(f, "{:.3}", p.to_f64_lossy()),
            Order::Exact => f.write_str("exact"),
        }
    }
}

pub fn observed_order<T: Real>(coarse: T, fine: T, floor: T) -> Order<T> {
    if coarse <= floor && fine <= floor {
        return Order::Exact;
    }
    Order::Measured((coarse / fine.max(T::min_positive_value())).log2())
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefinementStudy<T> {
    /// Refinement levels as supplied, coarsest first.
    pub levels: Vec<usize>,
    pub errors: Vec<T>,
    /// Order between each consecutive pair of levels.
    pub orders: Vec<Order<T>>,
}

impl<T: Real> RefinementStudy<T> {
    /// Order between the two finest levels.
    pub fn final_order(&self) -> Order<T> {
        *self.orders.last().expect("a study has at least two levels")
    }
}

/// Evaluates `error_at(level)` on each level (each a halving of the previous
/// one) and reports the observed orders.
pub fn refinement_study<T: Real>(
    levels: &[usize],
    floor: T,
    mut error_at: impl FnMut(usize) -> Result<T>,
) -> Result<RefinementStudy<T>> {
    assert!(levels.len() >= 2, "a refinement study needs two or more levels");
    let errors = levels.iter().map(|&l| error_at(l)).collect::<Result<Vec<T>>>()?;
    let orders = errors.windows(2).map(|w| observed_order(w[0], w[1], floor)).collect();
    Ok(RefinementStudy { levels: levels.to_vec(), errors, orders })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn second_order_sequence() {
        let s = refinement_study(&[1, 2, 4], 1e-14, |l| Ok(1.0 / (l * l) as f64)).unwrap();
        assert!((s.final_order().value() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn roundoff_is_exact() {
        assert_eq!(observed_order(1e-16, 2e-16, 1e-13), Order::Exact);
        assert!(Order::<f64>::Exact.at_least(1.9));
    }
}
