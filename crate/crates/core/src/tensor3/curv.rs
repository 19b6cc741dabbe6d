use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::sym::SymBilinear3;

/// Index pairs of the 2-vector basis `{e2∧e3, e3∧e1, e1∧e2}` (zero based).
pub const PAIRS: [(usize, usize); 3] = [(1, 2), (2, 0), (0, 1)];

/// Dense `R_{ijkl}` array.
pub type Dense4 = [[[[f64; 3]; 3]; 3]; 3];

/// Which 2-vector basis element `e_i ∧ e_j` is, and with what sign.
#[inline]
pub fn pair_slot(i: usize, j: usize) -> Option<(usize, f64)> {
    match (i, j) {
        (1, 2) => Some((0, 1.0)),
        (2, 1) => Some((0, -1.0)),
        (2, 0) => Some((1, 1.0)),
        (0, 2) => Some((1, -1.0)),
        (0, 1) => Some((2, 1.0)),
        (1, 0) => Some((2, -1.0)),
        _ => None,
    }
}

/// Components of `x ∧ y` in the basis [`PAIRS`]; this is the cross product.
pub fn wedge(x: &Vector3<f64>, y: &Vector3<f64>) -> Vector3<f64> {
    x.cross(y)
}

/// Algebraic curvature tensor in three dimensions.
///
/// Stored as the symmetric operator `C_AB = R(P_A, P_B)` on 2-vectors, with
/// `P_A` running over [`PAIRS`]. Because every symmetric `C` corresponds to
/// exactly one algebraic curvature tensor in 3D, the antisymmetries, pair
/// symmetry and first Bianchi identity hold by construction. Components are
/// covariant and refer to whatever basis the caller works in (chart or frame);
/// the metric is passed alongside where needed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Curv3 {
    op: SymBilinear3,
}

impl Curv3 {
    pub const ZERO: Self = Self {
        op: SymBilinear3::ZERO,
    };

    pub fn from_operator(op: SymBilinear3) -> Self {
        Self { op }
    }

    pub fn operator(&self) -> SymBilinear3 {
        self.op
    }

    pub fn operator_matrix(&self) -> Matrix3<f64> {
        self.op.to_matrix()
    }

    /// `R_{ijkl}`.
    pub fn component(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        match (pair_slot(i, j), pair_slot(k, l)) {
            (Some((a, sa)), Some((b, sb))) => sa * sb * self.op.get(a, b),
            _ => 0.0,
        }
    }

    pub fn dense(&self) -> Dense4 {
        let mut r = [[[[0.0; 3]; 3]; 3]; 3];
        for (i, ri) in r.iter_mut().enumerate() {
            for (j, rij) in ri.iter_mut().enumerate() {
                for (k, rijk) in rij.iter_mut().enumerate() {
                    for (l, v) in rijk.iter_mut().enumerate() {
                        *v = self.component(i, j, k, l);
                    }
                }
            }
        }
        r
    }

    /// Reads `R(P_A, P_B)` off a dense tensor that already has the curvature symmetries.
    pub fn from_dense(r: &Dense4) -> Self {
        let mut op = SymBilinear3::ZERO;
        for a in 0..3 {
            for b in a..3 {
                let (i, j) = PAIRS[a];
                let (k, l) = PAIRS[b];
                op.set(a, b, r[i][j][k][l]);
            }
        }
        Self { op }
    }

    /// `Riem(X, Y, Z, T)`.
    pub fn eval(
        &self,
        x: &Vector3<f64>,
        y: &Vector3<f64>,
        z: &Vector3<f64>,
        t: &Vector3<f64>,
    ) -> f64 {
        self.op.eval(&wedge(x, y), &wedge(z, t))
    }

    /// Components in the basis given by the columns of `p`.
    ///
    /// 2-vectors transform with the cofactor matrix: `(Pu) × (Pv) = cof(P)(u × v)`.
    pub fn transform(&self, p: &Matrix3<f64>) -> Self {
        let cof = p.determinant() * p.try_inverse().expect("singular basis change").transpose();
        Self {
            op: self.op.congruence(&cof),
        }
    }
}

impl Add for Curv3 {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self {
            op: self.op + rhs.op,
        }
    }
}

impl Sub for Curv3 {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self {
            op: self.op - rhs.op,
        }
    }
}

impl Neg for Curv3 {
    type Output = Self;
    fn neg(self) -> Self {
        Self { op: -self.op }
    }
}

impl Mul<f64> for Curv3 {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        Self { op: self.op * s }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Curv3 {
        Curv3::from_operator(SymBilinear3::new([0.7, -0.2, 0.4, 1.3, 0.05, -0.6]))
    }

    #[test]
    fn dense_view_has_curvature_symmetries() {
        let r = sample().dense();
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        assert_eq!(r[i][j][k][l], -r[j][i][k][l]);
                        assert_eq!(r[i][j][k][l], -r[i][j][l][k]);
                        assert_eq!(r[i][j][k][l], r[k][l][i][j]);
                        let bianchi = r[i][j][k][l] + r[j][k][i][l] + r[k][i][j][l];
                        assert!(bianchi.abs() < 1e-13);
                    }
                }
            }
        }
    }

    #[test]
    fn dense_round_trip() {
        let c = sample();
        assert_eq!(Curv3::from_dense(&c.dense()), c);
    }

    #[test]
    fn transform_matches_dense_change_of_basis() {
        let c = sample();
        let p = Matrix3::new(1.0, 0.2, -0.3, 0.1, 0.9, 0.4, -0.2, 0.3, 1.1);
        let r = c.dense();
        let t = c.transform(&p).dense();
        for a in 0..3 {
            for b in 0..3 {
                for cc in 0..3 {
                    for d in 0..3 {
                        let mut s = 0.0;
                        for i in 0..3 {
                            for j in 0..3 {
                                for k in 0..3 {
                                    for l in 0..3 {
                                        s += p[(i, a)]
                                            * p[(j, b)]
                                            * p[(k, cc)]
                                            * p[(l, d)]
                                            * r[i][j][k][l];
                                    }
                                }
                            }
                        }
                        assert!((s - t[a][b][cc][d]).abs() < 1e-12);
                    }
                }
            }
        }
    }
}
