use nalgebra::{Matrix3, Vector3};

use super::curv::Curv3;
use super::sym::SymBilinear3;
use crate::error::{Error, Result};

/// Three tangent vectors, in chart coordinates, orthonormal for `metric`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Frame3 {
    vectors: [Vector3<f64>; 3],
    metric: SymBilinear3,
}

impl Frame3 {
    /// Wraps vectors without orthonormalizing; see [`Frame3::orthonormality_residual`].
    pub fn from_vectors(vectors: [Vector3<f64>; 3], metric: SymBilinear3) -> Self {
        Self { vectors, metric }
    }

    /// Frame whose first two vectors span the plane of `x` and `y`, with `e1 ∥ x`.
    pub fn from_plane(metric: SymBilinear3, x: &Vector3<f64>, y: &Vector3<f64>) -> Result<Self> {
        metric.check_positive_definite()?;
        let gxx = metric.eval(x, x);
        let gxy = metric.eval(x, y);
        let gyy = metric.eval(y, y);
        let gram = gxx * gyy - gxy * gxy;
        if gram <= 1e-14 * gxx * gyy {
            return Err(Error::DegeneratePlane { gram });
        }
        let e1 = x / gxx.sqrt();
        let y_perp = y - e1 * metric.eval(&e1, y);
        let e2 = y_perp / metric.eval(&y_perp, &y_perp).sqrt();
        let e3 = complete(&metric, &e1, &e2)?;
        Ok(Self {
            vectors: [e1, e2, e3],
            metric,
        })
    }

    pub fn vectors(&self) -> &[Vector3<f64>; 3] {
        &self.vectors
    }

    pub fn vector(&self, a: usize) -> &Vector3<f64> {
        &self.vectors[a]
    }

    pub fn metric(&self) -> &SymBilinear3 {
        &self.metric
    }

    /// Matrix whose columns are the frame vectors.
    pub fn matrix(&self) -> Matrix3<f64> {
        Matrix3::from_columns(&self.vectors)
    }

    /// `max |g(e_a, e_b) − δ_ab|`.
    pub fn orthonormality_residual(&self) -> f64 {
        let gram = self.metric.congruence(&self.matrix());
        (gram - SymBilinear3::identity()).max_abs()
    }

    /// Frame components `T(e_a, e_b)` of a covariant form given in chart components.
    pub fn components(&self, t: &SymBilinear3) -> SymBilinear3 {
        t.congruence(&self.matrix())
    }

    /// Frame components of a curvature tensor given in chart components.
    pub fn curvature_components(&self, riem: &Curv3) -> Curv3 {
        riem.transform(&self.matrix())
    }

    /// Chart components of a covariant form given in frame components.
    pub fn to_chart(&self, t_frame: &SymBilinear3) -> SymBilinear3 {
        // coframe θ^a = g(e_a, ·); T = Σ T_ab θ^a ⊗ θ^b
        let coframe = self.metric.to_matrix() * self.matrix();
        SymBilinear3::from_matrix(&(coframe * t_frame.to_matrix() * coframe.transpose()))
    }

    /// The covector `g(e1, ·)`.
    pub fn first_covector(&self) -> Vector3<f64> {
        self.metric.apply(&self.vectors[0])
    }
}

/// Unit vector orthogonal to `e1` and `e2`, positively oriented.
///
/// The Euclidean cross product, read as a covector, annihilates both vectors,
/// so raising it with `g` gives the orthogonal complement.
pub(crate) fn complete(
    g: &SymBilinear3,
    e1: &Vector3<f64>,
    e2: &Vector3<f64>,
) -> Result<Vector3<f64>> {
    let inv = super::inverse_metric(g)?;
    let w = e1.cross(e2);
    let e3 = inv.apply(&w);
    let norm2 = g.eval(&e3, &e3);
    if norm2 <= 0.0 || !norm2.is_finite() {
        return Err(Error::DegeneratePlane { gram: norm2 });
    }
    Ok(e3 / norm2.sqrt())
}
