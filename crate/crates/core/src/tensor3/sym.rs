use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use nalgebra::{Matrix3, Vector3, Vector6};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Packed storage index of `(i, j)` in the order `(11, 12, 13, 22, 23, 33)`.
#[inline]
pub const fn packed_index(i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    match (i, j) {
        (0, 0) => 0,
        (0, 1) => 1,
        (0, 2) => 2,
        (1, 1) => 3,
        (1, 2) => 4,
        _ => 5,
    }
}

/// Index pairs of the symbol coordinates `(h11, h12, h13, h22, h33, h23)`.
pub const SYMBOL_ORDER: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 1), (2, 2), (1, 2)];

/// A symmetric bilinear form on a 3-dimensional tangent space.
///
/// Only the six independent components are stored, packed as
/// `(g11, g12, g13, g22, g23, g33)`, so symmetry cannot be violated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SymBilinear3(pub [f64; 6]);

impl SymBilinear3 {
    pub const ZERO: Self = Self([0.0; 6]);

    pub const fn new(c: [f64; 6]) -> Self {
        Self(c)
    }

    pub const fn identity() -> Self {
        Self([1.0, 0.0, 0.0, 1.0, 0.0, 1.0])
    }

    pub const fn diag(a: f64, b: f64, c: f64) -> Self {
        Self([a, 0.0, 0.0, b, 0.0, c])
    }

    /// Symmetric part of a general matrix.
    pub fn from_matrix(m: &Matrix3<f64>) -> Self {
        Self([
            m[(0, 0)],
            0.5 * (m[(0, 1)] + m[(1, 0)]),
            0.5 * (m[(0, 2)] + m[(2, 0)]),
            m[(1, 1)],
            0.5 * (m[(1, 2)] + m[(2, 1)]),
            m[(2, 2)],
        ])
    }

    /// `x ⊗ y + y ⊗ x`.
    pub fn symmetric_product(x: &Vector3<f64>, y: &Vector3<f64>) -> Self {
        let mut out = [0.0; 6];
        for (n, &(i, j)) in [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)]
            .iter()
            .enumerate()
        {
            out[n] = x[i] * y[j] + y[i] * x[j];
        }
        Self(out)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[packed_index(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.0[packed_index(i, j)] = v;
    }

    pub fn components(&self) -> [f64; 6] {
        self.0
    }

    pub fn to_matrix(&self) -> Matrix3<f64> {
        let c = &self.0;
        Matrix3::new(c[0], c[1], c[2], c[1], c[3], c[4], c[2], c[4], c[5])
    }

    pub fn apply(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.to_matrix() * v
    }

    pub fn eval(&self, x: &Vector3<f64>, y: &Vector3<f64>) -> f64 {
        x.dot(&self.apply(y))
    }

    pub fn trace(&self) -> f64 {
        self.0[0] + self.0[3] + self.0[5]
    }

    pub fn det(&self) -> f64 {
        self.to_matrix().determinant()
    }

    /// Adjugate (transpose of the cofactor matrix; symmetric here).
    pub fn adjugate(&self) -> Self {
        let [a, b, c, d, e, f] = self.0;
        Self([
            d * f - e * e,
            c * e - b * f,
            b * e - c * d,
            a * f - c * c,
            b * c - a * e,
            a * d - b * b,
        ])
    }

    /// Full contraction `g^{ij} T_ij` against a contravariant form.
    pub fn contract(&self, inv: &SymBilinear3) -> f64 {
        let (t, g) = (&self.0, &inv.0);
        t[0] * g[0] + t[3] * g[3] + t[5] * g[5] + 2.0 * (t[1] * g[1] + t[2] * g[2] + t[4] * g[4])
    }

    /// Congruence `Pᵀ T P`: components in the basis given by the columns of `p`.
    pub fn congruence(&self, p: &Matrix3<f64>) -> Self {
        Self::from_matrix(&(p.transpose() * self.to_matrix() * p))
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> [f64; 3] {
        let ev = self.to_matrix().symmetric_eigenvalues();
        let mut out = [ev[0], ev[1], ev[2]];
        out.sort_by(f64::total_cmp);
        out
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub fn check_positive_definite(&self) -> Result<()> {
        let lo = self.min_eigenvalue();
        if lo > 0.0 && lo.is_finite() {
            Ok(())
        } else {
            Err(Error::NotPositiveDefinite { eigenvalue: lo })
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    /// Coordinates `(h11, h12, h13, h22, h33, h23)` used by principal symbols.
    pub fn to_symbol_coords(&self) -> Vector6<f64> {
        Vector6::from_fn(|n, _| {
            let (i, j) = SYMBOL_ORDER[n];
            self.get(i, j)
        })
    }

    pub fn from_symbol_coords(v: &Vector6<f64>) -> Self {
        let mut out = Self::ZERO;
        for (n, &(i, j)) in SYMBOL_ORDER.iter().enumerate() {
            out.set(i, j, v[n]);
        }
        out
    }
}

impl Add for SymBilinear3 {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self(std::array::from_fn(|n| self.0[n] + rhs.0[n]))
    }
}

impl Sub for SymBilinear3 {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self(std::array::from_fn(|n| self.0[n] - rhs.0[n]))
    }
}

impl Neg for SymBilinear3 {
    type Output = Self;
    fn neg(self) -> Self {
        Self(self.0.map(|v| -v))
    }
}

impl Mul<f64> for SymBilinear3 {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        Self(self.0.map(|v| v * s))
    }
}

impl Mul<SymBilinear3> for f64 {
    type Output = SymBilinear3;
    fn mul(self, t: SymBilinear3) -> SymBilinear3 {
        t * self
    }
}

impl AddAssign for SymBilinear3 {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl SubAssign for SymBilinear3 {
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}
