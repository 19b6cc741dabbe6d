use std::ops::{Add, Mul, Sub};

use nalgebra::Vector3;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor3::SymBilinear3;

/// Period of every chart axis.
pub const PERIOD: f64 = 2.0 * std::f64::consts::PI;

/// Largest 3D grid accepted without an explicit override.
pub const MAX_N_3D: usize = 32;

/// Uniform periodic grid on `[0, 2π)^d`, `d ∈ {1, 3}`.
///
/// In 1D the metric depends on `x¹` only, but all three tangent directions
/// are kept. 3D points are stored row-major, index `(i·n + j)·n + k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    n: usize,
}

impl Grid {
    pub fn new(dim: usize, n: usize) -> Result<Self> {
        if dim != 1 && dim != 3 {
            return Err(Error::UnsupportedGrid(format!(
                "dimension {dim} (expected 1 or 3)"
            )));
        }
        if n < 5 {
            return Err(Error::UnsupportedGrid(format!(
                "{n} points per axis is below the stencil width 5"
            )));
        }
        Ok(Self { dim, n })
    }

    /// Like [`Grid::new`] but refuses 3D grids above [`MAX_N_3D`].
    pub fn bounded(dim: usize, n: usize) -> Result<Self> {
        if dim == 3 && n > MAX_N_3D {
            return Err(Error::UnsupportedGrid(format!(
                "3D grids are limited to N ≤ {MAX_N_3D}, got {n}"
            )));
        }
        Self::new(dim, n)
    }

    pub fn one_d(n: usize) -> Result<Self> {
        Self::new(1, n)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        PERIOD / self.n as f64
    }

    fn multi_index(&self, idx: usize) -> [usize; 3] {
        match self.dim {
            1 => [idx, 0, 0],
            _ => [
                idx / (self.n * self.n),
                (idx / self.n) % self.n,
                idx % self.n,
            ],
        }
    }

    fn flat_index(&self, m: [usize; 3]) -> usize {
        match self.dim {
            1 => m[0],
            _ => (m[0] * self.n + m[1]) * self.n + m[2],
        }
    }

    /// Chart coordinates of a grid point (unused axes are zero).
    pub fn point(&self, idx: usize) -> [f64; 3] {
        let h = self.spacing();
        let m = self.multi_index(idx);
        [m[0] as f64 * h, m[1] as f64 * h, m[2] as f64 * h]
    }

    /// Index of the point `offset` steps along `axis`, wrapping periodically.
    pub fn shift(&self, idx: usize, axis: usize, offset: isize) -> usize {
        let mut m = self.multi_index(idx);
        let n = self.n as isize;
        m[axis] = (m[axis] as isize + offset).rem_euclid(n) as usize;
        self.flat_index(m)
    }

    /// Whether fields may vary along `axis`.
    pub fn is_active(&self, axis: usize) -> bool {
        axis < self.dim
    }
}

/// Values that finite-difference stencils can combine.
pub trait Linear:
    Copy + Send + Sync + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn zero() -> Self;
}

impl Linear for f64 {
    fn zero() -> Self {
        0.0
    }
}

impl Linear for SymBilinear3 {
    fn zero() -> Self {
        SymBilinear3::ZERO
    }
}

impl Linear for Vector3<f64> {
    fn zero() -> Self {
        Vector3::zeros()
    }
}

/// Fourth-order central first derivative along `axis`.
pub fn diff1<T: Linear>(grid: &Grid, values: &[T], axis: usize) -> Vec<T> {
    assert_eq!(values.len(), grid.len());
    if !grid.is_active(axis) {
        return vec![T::zero(); values.len()];
    }
    let w = 1.0 / (12.0 * grid.spacing());
    (0..values.len())
        .into_par_iter()
        .map(|i| {
            let f = |o| values[grid.shift(i, axis, o)];
            ((f(-2) - f(2)) + (f(1) - f(-1)) * 8.0) * w
        })
        .collect()
}

/// Fourth-order central second derivative along `axis` (5-point stencil).
pub fn diff2<T: Linear>(grid: &Grid, values: &[T], axis: usize) -> Vec<T> {
    assert_eq!(values.len(), grid.len());
    if !grid.is_active(axis) {
        return vec![T::zero(); values.len()];
    }
    let h = grid.spacing();
    let w = 1.0 / (12.0 * h * h);
    (0..values.len())
        .into_par_iter()
        .map(|i| {
            let f = |o| values[grid.shift(i, axis, o)];
            ((f(1) + f(-1)) * 16.0 - (f(2) + f(-2)) - f(0) * 30.0) * w
        })
        .collect()
}

/// First derivatives along all three axes.
pub fn gradient<T: Linear>(grid: &Grid, values: &[T]) -> [Vec<T>; 3] {
    [
        diff1(grid, values, 0),
        diff1(grid, values, 1),
        diff1(grid, values, 2),
    ]
}
