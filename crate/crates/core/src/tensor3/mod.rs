//! Pointwise Riemannian tensor algebra in three dimensions.
//!
//! Conventions: `R_{ijkl} = g(Riem(∂_i, ∂_j)∂_k, ∂_l)` with
//! `Riem(X,Y)Z = ∇_Y∇_X Z − ∇_X∇_Y Z + ∇_{[X,Y]}Z`, Ricci `R_ik = g^{jl} R_{ijkl}`
//! and sectional curvature `K(X,Y) = R(X,Y,X,Y) / |X∧Y|²`. With these choices
//! the round sphere has `K = +1` and a space form of curvature `k` has
//! `Riem = (k/2) g∧g`, `Ric = 2k g`.

mod curv;
mod frame;
mod sym;

use nalgebra::{Matrix3, Vector3};

pub use curv::{pair_slot, wedge, Curv3, Dense4, PAIRS};
pub use frame::Frame3;
pub use sym::{packed_index, SymBilinear3, SYMBOL_ORDER};

use crate::error::{Error, Result};

/// Contravariant inverse `g^{ij}` of a positive-definite metric.
pub fn inverse_metric(g: &SymBilinear3) -> Result<SymBilinear3> {
    g.check_positive_definite()?;
    Ok(g.adjugate() * (1.0 / g.det()))
}

/// Kulkarni–Nomizu product
/// `(p∧q)(X,Y,Z,T) = p(X,Z)q(Y,T) + p(Y,T)q(X,Z) − p(X,T)q(Y,Z) − p(Y,Z)q(X,T)`.
pub fn kulkarni_nomizu(p: &SymBilinear3, q: &SymBilinear3) -> Curv3 {
    let mut op = SymBilinear3::ZERO;
    for a in 0..3 {
        for b in a..3 {
            let (x, y) = PAIRS[a];
            let (z, t) = PAIRS[b];
            // grouped so that swapping p and q is exact
            let v = (p.get(x, z) * q.get(y, t) + p.get(y, t) * q.get(x, z))
                - (p.get(x, t) * q.get(y, z) + p.get(y, z) * q.get(x, t));
            op.set(a, b, v);
        }
    }
    Curv3::from_operator(op)
}

/// Constant sectional curvature `k` for the metric `g`: `(k/2) g∧g`.
pub fn constant_curvature(k: f64, g: &SymBilinear3) -> Curv3 {
    kulkarni_nomizu(g, g) * (0.5 * k)
}

/// 3D decomposition `Riem = Ric∧g − (R/4) g∧g` (the Weyl part vanishes).
pub fn riemann_from_ricci(ric: &SymBilinear3, g: &SymBilinear3) -> Result<Curv3> {
    let inv = inverse_metric(g)?;
    let scalar = ric.contract(&inv);
    Ok(kulkarni_nomizu(ric, g) - kulkarni_nomizu(g, g) * (0.25 * scalar))
}

/// `R_ik = g^{jl} R_{ijkl}`.
pub fn ricci_from_riemann(riem: &Curv3, g: &SymBilinear3) -> Result<SymBilinear3> {
    let inv = inverse_metric(g)?;
    Ok(ricci_with_inverse(riem, &inv))
}

pub(crate) fn ricci_with_inverse(riem: &Curv3, inv: &SymBilinear3) -> SymBilinear3 {
    let mut ric = SymBilinear3::ZERO;
    for i in 0..3 {
        for k in i..3 {
            let mut s = 0.0;
            for j in 0..3 {
                for l in 0..3 {
                    s += inv.get(j, l) * riem.component(i, j, k, l);
                }
            }
            ric.set(i, k, s);
        }
    }
    ric
}

/// `R_ij R_lk g^{jl}`.
pub fn ricci_squared(ric: &SymBilinear3, inv: &SymBilinear3) -> SymBilinear3 {
    let r = ric.to_matrix();
    SymBilinear3::from_matrix(&(r * inv.to_matrix() * r))
}

/// Sectional curvature of the plane spanned by `x` and `y`.
pub fn sectional(
    riem: &Curv3,
    g: &SymBilinear3,
    x: &Vector3<f64>,
    y: &Vector3<f64>,
) -> Result<f64> {
    let gxx = g.eval(x, x);
    let gyy = g.eval(y, y);
    let gxy = g.eval(x, y);
    let gram = gxx * gyy - gxy * gxy;
    if !(gram > 1e-14 * gxx * gyy) {
        return Err(Error::DegeneratePlane { gram });
    }
    Ok(riem.eval(x, y, x, y) / gram)
}

/// Eigen-decomposition of the curvature operator relative to the metric
/// induced on 2-vectors.
#[derive(Clone, Copy, Debug)]
pub struct CurvatureSpectrum {
    /// Ascending; these are the extreme and middle sectional curvatures.
    pub values: [f64; 3],
    /// Chart 2-vectors (`x × y` of a spanning pair) of the corresponding planes.
    pub bivectors: [Vector3<f64>; 3],
}

impl CurvatureSpectrum {
    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[2]
    }

    /// Largest `|K|` over planes, i.e. the operator norm of the curvature operator.
    pub fn norm(&self) -> f64 {
        self.values[0].abs().max(self.values[2].abs())
    }
}

/// In 3D every 2-vector is decomposable, so the extrema of `K` over planes are
/// the extreme generalized eigenvalues of `C` against `cof(g) = det(g) g⁻¹`,
/// the metric `g∧g / 2` restricted to 2-vectors.
pub fn curvature_spectrum(riem: &Curv3, g: &SymBilinear3) -> Result<CurvatureSpectrum> {
    g.check_positive_definite()?;
    let gram = g.adjugate().to_matrix();
    let chol = nalgebra::Cholesky::new(gram).ok_or(Error::NotPositiveDefinite {
        eigenvalue: g.min_eigenvalue(),
    })?;
    let l = chol.l();
    let l_inv = l.try_inverse().expect("cholesky factor is invertible");
    let m = l_inv * riem.operator_matrix() * l_inv.transpose();
    let m = 0.5 * (m + m.transpose());
    let eig = m.symmetric_eigen();
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let back = l_inv.transpose();
    let values = order.map(|n| eig.eigenvalues[n]);
    let bivectors = order.map(|n| back * eig.eigenvectors.column(n));
    Ok(CurvatureSpectrum { values, bivectors })
}

/// `(K_min, K_max)` over all planes.
pub fn sectional_extrema(riem: &Curv3, g: &SymBilinear3) -> Result<(f64, f64)> {
    let s = curvature_spectrum(riem, g)?;
    Ok((s.min(), s.max()))
}

/// Two vectors spanning the plane whose 2-vector is `w`, ordered so that
/// `x × y` is a positive multiple of `w`.
pub fn plane_basis(w: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let axis = least_aligned_axis(&w.map(f64::abs));
    let x = w.cross(&axis).normalize();
    let y = w.cross(&x).normalize();
    (x, y)
}

fn least_aligned_axis(weights: &Vector3<f64>) -> Vector3<f64> {
    let mut best = 0;
    for i in 1..3 {
        if weights[i] < weights[best] {
            best = i;
        }
    }
    Vector3::ith(best, 1.0)
}

/// `R_{ijlm} R_{kstu} g^{js} g^{lt} g^{mu}`, contracted term by term.
pub fn quad_contraction(riem: &Curv3, g: &SymBilinear3) -> Result<SymBilinear3> {
    let inv = inverse_metric(g)?;
    Ok(quad_contraction_with_inverse(riem, &inv))
}

pub(crate) fn quad_contraction_with_inverse(riem: &Curv3, inv: &SymBilinear3) -> SymBilinear3 {
    let r = riem.dense();
    let gi = inv.to_matrix();
    // raise the last three slots of R_{i...}
    let mut up = [[[[0.0; 3]; 3]; 3]; 3];
    for i in 0..3 {
        for s in 0..3 {
            for t in 0..3 {
                for u in 0..3 {
                    let mut acc = 0.0;
                    for j in 0..3 {
                        for l in 0..3 {
                            for m in 0..3 {
                                acc += r[i][j][l][m] * gi[(j, s)] * gi[(l, t)] * gi[(m, u)];
                            }
                        }
                    }
                    up[i][s][t][u] = acc;
                }
            }
        }
    }
    let mut q = SymBilinear3::ZERO;
    for i in 0..3 {
        for k in i..3 {
            let mut acc = 0.0;
            for s in 0..3 {
                for t in 0..3 {
                    for u in 0..3 {
                        acc += up[i][s][t][u] * r[k][s][t][u];
                    }
                }
            }
            q.set(i, k, acc);
        }
    }
    q
}

/// The same quadratic term through the 3D decomposition:
/// `2R R_ik − 2R²_ik + 2|Ric|² g_ik − R² g_ik`.
pub fn quad_via_ricci(ric: &SymBilinear3, g: &SymBilinear3) -> Result<SymBilinear3> {
    let inv = inverse_metric(g)?;
    Ok(quad_via_ricci_with_inverse(ric, g, &inv))
}

pub(crate) fn quad_via_ricci_with_inverse(
    ric: &SymBilinear3,
    g: &SymBilinear3,
    inv: &SymBilinear3,
) -> SymBilinear3 {
    let scalar = ric.contract(inv);
    let sq = ricci_squared(ric, inv);
    let norm2 = sq.contract(inv);
    *ric * (2.0 * scalar) - sq * 2.0 + *g * (2.0 * norm2 - scalar * scalar)
}

/// Orthonormal frame with `g(e1, ·)` a positive multiple of `xi`.
///
/// `e2` comes from the coordinate axis least aligned with `e1` (measured by
/// the `g`-cosine, ties to the lowest index); `e3` completes a positively
/// oriented frame.
pub fn orthonormal_frame(g: &SymBilinear3, xi: &Vector3<f64>) -> Result<Frame3> {
    if xi.iter().all(|v| *v == 0.0) {
        return Err(Error::ZeroCovector);
    }
    let inv = inverse_metric(g)?;
    let raised = inv.apply(xi);
    let e1 = raised / xi.dot(&raised).sqrt();
    let ge1 = g.apply(&e1);
    let cosines = Vector3::from_fn(|i, _| ge1[i].abs() / g.get(i, i).sqrt());
    let axis = least_aligned_axis(&cosines);
    Frame3::from_plane(*g, &e1, &axis)
}

/// Angle that kills `R'23` after rotating `(e2, e3)` inside `e1⊥`:
/// `π/4` when `R22 = R33`, otherwise `½ arctan(2R23 / (R22 − R33))`.
pub fn kill_angle(r22: f64, r33: f64, r23: f64) -> f64 {
    if r22 == r33 {
        std::f64::consts::FRAC_PI_4
    } else {
        0.5 * (2.0 * r23 / (r22 - r33)).atan()
    }
}

/// Rotates `(e2, e3)` by [`kill_angle`] so that `Ric(e'2, e'3) = 0`; `e1` is kept.
pub fn rotate_frame_kill_r23(frame: &Frame3, ric: &SymBilinear3) -> (Frame3, f64) {
    let r = frame.components(ric);
    let alpha = kill_angle(r.get(1, 1), r.get(2, 2), r.get(1, 2));
    let (s, c) = alpha.sin_cos();
    let [e1, e2, e3] = *frame.vectors();
    let rotated = Frame3::from_vectors([e1, e2 * c + e3 * s, e3 * c - e2 * s], *frame.metric());
    (rotated, alpha)
}

/// Rotation of the `(e2, e3)` plane by `alpha`, as a change-of-basis matrix.
pub fn normal_rotation(alpha: f64) -> Matrix3<f64> {
    let (s, c) = alpha.sin_cos();
    Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c)
}

#[cfg(test)]
pub(crate) mod testing {
    use super::*;
    use rand::Rng;

    pub fn random_sym<R: Rng>(rng: &mut R, scale: f64) -> SymBilinear3 {
        SymBilinear3::new(std::array::from_fn(|_| rng.gen_range(-scale..scale)))
    }

    pub fn random_spd<R: Rng>(rng: &mut R) -> SymBilinear3 {
        let a = Matrix3::from_fn(|_, _| rng.gen_range(-1.0..1.0));
        SymBilinear3::from_matrix(&(a.transpose() * a + Matrix3::identity() * 0.5))
    }

    pub fn random_vec<R: Rng>(rng: &mut R) -> Vector3<f64> {
        Vector3::from_fn(|_, _| rng.gen_range(-1.0..1.0))
    }

    /// Four-term formula evaluated directly on vectors.
    pub fn kn_direct(
        p: &SymBilinear3,
        q: &SymBilinear3,
        x: &Vector3<f64>,
        y: &Vector3<f64>,
        z: &Vector3<f64>,
        t: &Vector3<f64>,
    ) -> f64 {
        p.eval(x, z) * q.eval(y, t) + p.eval(y, t) * q.eval(x, z)
            - p.eval(x, t) * q.eval(y, z)
            - p.eval(y, z) * q.eval(x, t)
    }
}
