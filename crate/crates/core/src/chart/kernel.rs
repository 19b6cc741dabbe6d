use std::sync::OnceLock;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor3::{inverse_metric, sectional, Curv3, SymBilinear3, PAIRS};

/// Metric value with its first and second chart derivatives at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricJet {
    pub g: SymBilinear3,
    /// `dg[a] = ∂_a g`.
    pub dg: [SymBilinear3; 3],
    /// `ddg[a][b] = ∂_a ∂_b g`.
    pub ddg: [[SymBilinear3; 3]; 3],
}

impl MetricJet {
    pub fn constant(g: SymBilinear3) -> Self {
        Self {
            g,
            dg: [SymBilinear3::ZERO; 3],
            ddg: [[SymBilinear3::ZERO; 3]; 3],
        }
    }
}

/// Christoffel symbols `Γ^k_ij`, stored as one symmetric form per upper index.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Christoffel(pub [SymBilinear3; 3]);

impl Christoffel {
    /// `Γ^k_ij`.
    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.0[k].get(i, j)
    }

    /// `Γ^k_ij X^i Y^j` as a vector.
    pub fn contract(&self, x: &Vector3<f64>, y: &Vector3<f64>) -> Vector3<f64> {
        Vector3::from_fn(|k, _| self.0[k].eval(x, y))
    }
}

/// Levi-Civita data and curvature at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointCurvature {
    pub inverse: SymBilinear3,
    pub christoffel: Christoffel,
    pub riem: Curv3,
}

/// Curvature from a metric jet.
///
/// `R_abcd = ½(g_ad,bc + g_bc,ad − g_ac,bd − g_bd,ac) + g_ef(Γ^e_bc Γ^f_ad − Γ^e_bd Γ^f_ac)`,
/// which gives the round sphere positive sectional curvature.
pub fn curvature_from_jet(jet: &MetricJet) -> Result<PointCurvature> {
    signed_kernel(jet, 1.0)
}

pub(crate) fn signed_kernel(jet: &MetricJet, sign: f64) -> Result<PointCurvature> {
    let inv = inverse_metric(&jet.g)?;
    // first kind: Γ_{l,ij} = ½(∂i g_jl + ∂j g_il − ∂l g_ij)
    let mut lower = [SymBilinear3::ZERO; 3];
    for (l, low) in lower.iter_mut().enumerate() {
        for i in 0..3 {
            for j in i..3 {
                low.set(
                    i,
                    j,
                    0.5 * (jet.dg[i].get(j, l) + jet.dg[j].get(i, l) - jet.dg[l].get(i, j)),
                );
            }
        }
    }
    let mut upper = [SymBilinear3::ZERO; 3];
    for (k, up) in upper.iter_mut().enumerate() {
        for i in 0..3 {
            for j in i..3 {
                let v = (0..3).map(|l| inv.get(k, l) * lower[l].get(i, j)).sum();
                up.set(i, j, v);
            }
        }
    }
    let mut op = SymBilinear3::ZERO;
    for p in 0..3 {
        for q in p..3 {
            let (a, b) = PAIRS[p];
            let (c, d) = PAIRS[q];
            let dd = |x: usize, y: usize, s: usize, t: usize| jet.ddg[x][y].get(s, t);
            let second = 0.5 * (dd(b, c, a, d) + dd(a, d, b, c) - dd(b, d, a, c) - dd(a, c, b, d));
            let mut quad = 0.0;
            for f in 0..3 {
                quad += lower[f].get(b, c) * upper[f].get(a, d)
                    - lower[f].get(b, d) * upper[f].get(a, c);
            }
            op.set(p, q, sign * (second + quad));
        }
    }
    Ok(PointCurvature {
        inverse: inv,
        christoffel: Christoffel(upper),
        riem: Curv3::from_operator(op),
    })
}

/// Exact jet of the space form `g = 4/(1 + k r²)² δ` of curvature `k` at `x`.
pub fn space_form_jet(k: f64, x: [f64; 3]) -> MetricJet {
    let r2: f64 = x.iter().map(|v| v * v).sum();
    let u = 1.0 + k * r2;
    let phi = 4.0 / (u * u);
    let dphi: [f64; 3] = std::array::from_fn(|a| -16.0 * k * x[a] / u.powi(3));
    let ddphi = |a: usize, b: usize| {
        let delta = if a == b { 1.0 } else { 0.0 };
        -16.0 * k * delta / u.powi(3) + 96.0 * k * k * x[a] * x[b] / u.powi(4)
    };
    let id = SymBilinear3::identity();
    MetricJet {
        g: id * phi,
        dg: dphi.map(|v| id * v),
        ddg: std::array::from_fn(|a| std::array::from_fn(|b| id * ddphi(a, b))),
    }
}

/// Sectional curvature of the unit sphere at a generic point, through the
/// curvature kernel. `fault` flips the kernel's sign to exercise the check.
pub fn sign_self_check(fault: bool) -> Result<f64> {
    let jet = space_form_jet(1.0, [0.3, -0.2, 0.1]);
    let pc = signed_kernel(&jet, if fault { -1.0 } else { 1.0 })?;
    let k = sectional(&pc.riem, &jet.g, &Vector3::x(), &Vector3::y())?;
    if (k - 1.0).abs() > 1e-8 {
        return Err(Error::SignConvention(k));
    }
    Ok(k)
}

/// Runs [`sign_self_check`] once per process.
pub fn ensure_sign_convention() -> Result<()> {
    static CHECK: OnceLock<std::result::Result<f64, f64>> = OnceLock::new();
    let res = CHECK.get_or_init(|| match sign_self_check(false) {
        Ok(k) => Ok(k),
        Err(Error::SignConvention(k)) => Err(k),
        Err(_) => Err(f64::NAN),
    });
    res.map(|_| ()).map_err(Error::SignConvention)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor3::{curvature_spectrum, ricci_from_riemann};

    #[test]
    fn space_forms_have_constant_curvature() {
        for &k in &[1.0, -1.0, 0.35] {
            for x in [[0.3, -0.2, 0.1], [0.0, 0.0, 0.0], [-0.1, 0.25, 0.2]] {
                let jet = space_form_jet(k, x);
                let pc = curvature_from_jet(&jet).unwrap();
                let s = curvature_spectrum(&pc.riem, &jet.g).unwrap();
                assert!(
                    (s.min() - k).abs() < 1e-12 && (s.max() - k).abs() < 1e-12,
                    "{k}: {:?}",
                    s.values
                );
                let ric = ricci_from_riemann(&pc.riem, &jet.g).unwrap();
                assert!((ric - jet.g * (2.0 * k)).max_abs() < 1e-11);
            }
        }
    }

    #[test]
    fn self_check_catches_flipped_sign() {
        assert!((sign_self_check(false).unwrap() - 1.0).abs() < 1e-12);
        assert!(
            matches!(sign_self_check(true), Err(Error::SignConvention(k)) if (k + 1.0).abs() < 1e-12)
        );
        ensure_sign_convention().unwrap();
    }

    #[test]
    fn constant_metric_is_flat() {
        let jet = MetricJet::constant(SymBilinear3::new([2.0, 0.1, 0.0, 1.5, -0.2, 1.0]));
        let pc = curvature_from_jet(&jet).unwrap();
        assert_eq!(pc.riem, Curv3::ZERO);
        assert_eq!(pc.christoffel, Christoffel::default());
    }
}
