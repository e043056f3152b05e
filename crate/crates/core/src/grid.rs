//! Uniform space-time grid and axis-wise differencing.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::stencil::{centred, one_sided, FieldValue};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
    T,
}

impl Axis {
    pub const SPATIAL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];
}

/// Uniform grid over `(x, y, z, t)`. Flat index has `x` fastest, then `y`,
/// `z`, `t`. An axis with a single node is invariant (reduced dimension).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimeGrid<T> {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub nt: usize,
    pub dx: T,
    pub dy: T,
    pub dz: T,
    pub dt: T,
    /// `(x₀, y₀, z₀, t₀)`
    pub origin: [T; 4],
}

impl<T: Real> SpaceTimeGrid<T> {
    pub fn new(counts: [usize; 4], spacings: [T; 4], origin: [T; 4]) -> Result<Self> {
        let g = Self {
            nx: counts[0],
            ny: counts[1],
            nz: counts[2],
            nt: counts[3],
            dx: spacings[0],
            dy: spacings[1],
            dz: spacings[2],
            dt: spacings[3],
            origin,
        };
        g.validate()?;
        Ok(g)
    }

    /// Grid along `z` and `t` only.
    pub fn zt(nz: usize, dz: T, z0: T, nt: usize, dt: T, t0: T) -> Result<Self> {
        Self::new([1, 1, nz, nt], [dz, dz, dz, dt], [T::zero(), T::zero(), z0, t0])
    }

    pub fn validate(&self) -> Result<()> {
        if [self.nx, self.ny, self.nz, self.nt].contains(&0) {
            return Err(Error::InvalidGrid("all counts must be at least 1".into()));
        }
        if [self.dx, self.dy, self.dz, self.dt].iter().any(|h| !(*h > T::zero()) || !h.is_finite()) {
            return Err(Error::InvalidGrid("spacings must be positive".into()));
        }
        if self.origin.iter().any(|o| !o.is_finite()) {
            return Err(Error::InvalidGrid("origin must be finite".into()));
        }
        Ok(())
    }

    pub fn count(&self, axis: Axis) -> usize {
        match axis {
            Axis::X => self.nx,
            Axis::Y => self.ny,
            Axis::Z => self.nz,
            Axis::T => self.nt,
        }
    }

    pub fn spacing(&self, axis: Axis) -> T {
        match axis {
            Axis::X => self.dx,
            Axis::Y => self.dy,
            Axis::Z => self.dz,
            Axis::T => self.dt,
        }
    }

    pub fn stride(&self, axis: Axis) -> usize {
        match axis {
            Axis::X => 1,
            Axis::Y => self.nx,
            Axis::Z => self.nx * self.ny,
            Axis::T => self.nx * self.ny * self.nz,
        }
    }

    pub fn is_active(&self, axis: Axis) -> bool {
        self.count(axis) > 1
    }

    pub fn spatial_len(&self) -> usize {
        self.nx * self.ny * self.nz
    }

    pub fn len(&self) -> usize {
        self.spatial_len() * self.nt
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, ix: usize, iy: usize, iz: usize, it: usize) -> usize {
        ((it * self.nz + iz) * self.ny + iy) * self.nx + ix
    }

    /// `(ix, iy, iz, it)` of a flat index.
    pub fn unravel(&self, idx: usize) -> [usize; 4] {
        let ix = idx % self.nx;
        let iy = (idx / self.nx) % self.ny;
        let iz = (idx / (self.nx * self.ny)) % self.nz;
        let it = idx / self.spatial_len();
        [ix, iy, iz, it]
    }

    pub fn position(&self, ix: usize, iy: usize, iz: usize) -> [T; 3] {
        [
            self.origin[0] + self.dx * T::from_index(ix),
            self.origin[1] + self.dy * T::from_index(iy),
            self.origin[2] + self.dz * T::from_index(iz),
        ]
    }

    pub fn time(&self, it: usize) -> T {
        self.origin[3] + self.dt * T::from_index(it)
    }

    /// Volume weight of one node; invariant axes contribute their spacing.
    pub fn cell_volume(&self) -> T {
        self.dx * self.dy * self.dz
    }

    /// Same spatial layout with a different time axis.
    pub fn with_time(&self, nt: usize, dt: T, t0: T) -> Result<Self> {
        let mut g = *self;
        g.nt = nt;
        g.dt = dt;
        g.origin[3] = t0;
        g.validate()?;
        Ok(g)
    }

    /// Requires at least three nodes on every active spatial axis and,
    /// if `with_time`, along time.
    pub fn require_stencils(&self, with_time: bool) -> Result<()> {
        for axis in Axis::SPATIAL {
            let n = self.count(axis);
            if n == 2 {
                return Err(Error::TooFewSamples(format!("axis {axis:?} has 2 nodes; need 1 or ≥ 3")));
            }
        }
        if with_time && self.nt < 3 {
            return Err(Error::TooFewSamples(format!("need ≥ 3 time steps, got {}", self.nt)));
        }
        Ok(())
    }

    /// Derivative of `data` along `axis` at flat index `idx`: centred in the
    /// interior, second-order one-sided at the ends, zero on invariant axes.
    pub fn derivative<V: FieldValue<T>>(&self, data: &[V], axis: Axis, idx: usize) -> V {
        let n = self.count(axis);
        if n == 1 {
            return V::zero();
        }
        let h = self.spacing(axis);
        let st = self.stride(axis);
        let pos = (idx / st) % n;
        if n == 2 {
            return (data[idx - pos * st + st] - data[idx - pos * st]) / h;
        }
        if pos == 0 {
            one_sided(data[idx], data[idx + st], data[idx + 2 * st], h)
        } else if pos == n - 1 {
            one_sided(data[idx], data[idx - st], data[idx - 2 * st], -h)
        } else {
            centred(data[idx - st], data[idx + st], h)
        }
    }

    /// `∇·F` at `idx` for a vector field stored per component.
    pub fn divergence<V: FieldValue<T>>(&self, f: &[Vec<V>; 3], idx: usize) -> V {
        self.derivative(&f[0], Axis::X, idx) + self.derivative(&f[1], Axis::Y, idx) + self.derivative(&f[2], Axis::Z, idx)
    }

    /// `∇×F` at `idx`.
    pub fn curl<V: FieldValue<T>>(&self, f: &[Vec<V>; 3], idx: usize) -> [V; 3] {
        let d = |c: usize, a: Axis| self.derivative(&f[c], a, idx);
        [
            d(2, Axis::Y) - d(1, Axis::Z),
            d(0, Axis::Z) - d(2, Axis::X),
            d(1, Axis::X) - d(0, Axis::Y),
        ]
    }

    /// Node ranges that exclude the boundary layer of every active axis
    /// (and of time when `with_time`).
    pub fn interior(&self, with_time: bool) -> InteriorRegion {
        let range = |n: usize, differenced: bool| if differenced && n > 1 { (1, n - 1) } else { (0, n) };
        InteriorRegion {
            ranges: [
                range(self.nx, true),
                range(self.ny, true),
                range(self.nz, true),
                range(self.nt, with_time),
            ],
        }
    }
}

/// Half-open node ranges `[lo, hi)` per axis `(x, y, z, t)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InteriorRegion {
    pub ranges: [(usize, usize); 4],
}

impl InteriorRegion {
    pub fn counts(&self) -> [usize; 4] {
        self.ranges.map(|(lo, hi)| hi.saturating_sub(lo))
    }

    pub fn len(&self) -> usize {
        self.counts().iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Flat grid indices in storage order.
    pub fn indices<T: Real>(&self, grid: &SpaceTimeGrid<T>) -> Vec<usize> {
        let [rx, ry, rz, rt] = self.ranges;
        let mut out = Vec::with_capacity(self.len());
        for it in rt.0..rt.1 {
            for iz in rz.0..rz.1 {
                for iy in ry.0..ry.1 {
                    for ix in rx.0..rx.1 {
                        out.push(grid.index(ix, iy, iz, it));
                    }
                }
            }
        }
        out
    }
}
