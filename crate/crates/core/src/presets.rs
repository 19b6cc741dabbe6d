//! Named initial data for the command line, the self-test and the acceptance runs.

use nalgebra::{Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::chart::{Grid, MetricField};
use crate::error::{Error, Result};
use crate::integrate::Dynamics;
use crate::tensor3::{riemann_from_ricci, Curv3, SymBilinear3};

pub const FIELD_PRESETS: [&str; 6] = [
    "flat",
    "flat-perturbed-1d",
    "warped-1d",
    "mixed-sign",
    "constant-curvature",
    "constant-curvature-ode",
];

pub const POINT_PRESETS: [&str; 3] = ["flat", "constant-curvature", "mixed-sign"];

/// Parameters shared by the field presets.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PresetParams {
    pub n: usize,
    pub seed: u64,
    /// Perturbation size for `flat-perturbed-1d`, warp size for `warped-1d` and `mixed-sign`.
    pub amplitude: f64,
    /// Sectional curvature of the constant-curvature presets.
    pub curvature: f64,
}

impl Default for PresetParams {
    fn default() -> Self {
        Self {
            n: 128,
            seed: 0,
            amplitude: 1e-3,
            curvature: -1.0,
        }
    }
}

/// Initial metric together with how its curvature is evaluated.
#[derive(Clone, Debug)]
pub struct FieldPreset {
    pub field: MetricField,
    /// `Some(k0)` for pointwise constant-curvature data.
    pub pointwise_curvature: Option<f64>,
}

impl FieldPreset {
    /// Gauge-fixed chart dynamics, or the pointwise model for constant-curvature data.
    pub fn dynamics(&self) -> Result<Dynamics> {
        match self.pointwise_curvature {
            Some(k0) => Ok(Dynamics::pointwise_constant_curvature(k0, &self.field)),
            None => Dynamics::gauge_fixed(&self.field),
        }
    }
}

pub fn field_preset(name: &str, params: &PresetParams) -> Result<FieldPreset> {
    let chart = |field| {
        Ok(FieldPreset {
            field,
            pointwise_curvature: None,
        })
    };
    match name {
        "flat" => chart(MetricField::constant(
            Grid::one_d(params.n)?,
            SymBilinear3::identity(),
        )?),
        "flat-perturbed-1d" => chart(flat_perturbed_1d(params.n, params.seed, params.amplitude)?),
        "warped-1d" => chart(warped_1d(params.n, params.amplitude.max(0.1))?),
        "mixed-sign" => chart(warped_1d(params.n, 0.3)?.with_chart("mixed-sign")),
        "constant-curvature" | "constant-curvature-ode" => Ok(FieldPreset {
            field: constant_curvature_points(params.n.clamp(5, 64), params.seed)?,
            pointwise_curvature: Some(params.curvature),
        }),
        other => Err(Error::InvalidArgument(format!(
            "unknown geometry preset '{other}' (expected one of {FIELD_PRESETS:?})"
        ))),
    }
}

/// Flat metric plus a seeded combination of the modes `k = 3, 4, 5` in every component,
/// scaled so that the largest entry of the perturbation is `amplitude`.
pub fn flat_perturbed_1d(n: usize, seed: u64, amplitude: f64) -> Result<MetricField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs: Vec<(f64, [f64; 6], [f64; 6])> = (3..=5)
        .map(|k| {
            let mut draw = || std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
            (k as f64, draw(), draw())
        })
        .collect();
    let grid = Grid::one_d(n)?;
    let raw: Vec<[f64; 6]> = (0..n)
        .map(|i| {
            let x = grid.point(i)[0];
            let mut h = [0.0; 6];
            for (k, c, s) in &coeffs {
                for (slot, v) in h.iter_mut().enumerate() {
                    *v += c[slot] * (k * x).cos() + s[slot] * (k * x).sin();
                }
            }
            h
        })
        .collect();
    let peak = raw.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    let scale = if peak > 0.0 { amplitude / peak } else { 0.0 };
    let values = raw
        .iter()
        .map(|h| SymBilinear3::identity() + SymBilinear3(*h) * scale)
        .collect();
    MetricField::new(grid, "flat-perturbed-1d", values)
}

/// `diag(1, f², f²)` with `f = 1 + eps·sin x`.
pub fn warped_1d(n: usize, eps: f64) -> Result<MetricField> {
    MetricField::from_fn(Grid::one_d(n)?, "warped-1d", |x| {
        let f = 1.0 + eps * x[0].sin();
        SymBilinear3::diag(1.0, f * f, f * f)
    })
}

/// Seeded positive definite values, one per point, for the pointwise model.
pub fn constant_curvature_points(n: usize, seed: u64) -> Result<MetricField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..n)
        .map(|_| {
            let a = Matrix3::from_fn(|_, _| rng.gen_range(-0.5..0.5));
            SymBilinear3::from_matrix(&(a.transpose() * a + Matrix3::identity()))
        })
        .collect();
    MetricField::new(Grid::one_d(n)?, "constant-curvature", values)
}

/// Algebraic data at one point: metric, Ricci tensor and a covector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointSample {
    pub metric: SymBilinear3,
    pub ricci: SymBilinear3,
    pub xi: Vector3<f64>,
}

impl PointSample {
    pub fn new(metric: SymBilinear3, ricci: SymBilinear3, xi: Vector3<f64>) -> Result<Self> {
        metric.check_positive_definite()?;
        if xi.norm() == 0.0 {
            return Err(Error::ZeroCovector);
        }
        Ok(Self { metric, ricci, xi })
    }

    /// Sectional curvature `k` everywhere: `Ric = 2k g`.
    pub fn constant_curvature(k: f64, metric: SymBilinear3) -> Result<Self> {
        Self::new(metric, metric * (2.0 * k), Vector3::x())
    }

    pub fn riemann(&self) -> Result<Curv3> {
        riemann_from_ricci(&self.ricci, &self.metric)
    }
}

/// `curvature` is used by `constant-curvature` only.
pub fn point_preset(name: &str, curvature: f64) -> Result<PointSample> {
    let id = SymBilinear3::identity();
    match name {
        "flat" => PointSample::new(id, SymBilinear3::ZERO, Vector3::x()),
        "constant-curvature" => PointSample::constant_curvature(curvature, id),
        // sectional curvatures 1/8, 7/8 and −5/8 on the coordinate planes
        "mixed-sign" => PointSample::new(id, SymBilinear3::diag(1.0, -0.5, 0.25), Vector3::x()),
        other => Err(Error::InvalidArgument(format!(
            "unknown point preset '{other}' (expected one of {POINT_PRESETS:?})"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::curvature;
    use crate::tensor3::sectional_extrema;

    #[test]
    fn perturbation_has_requested_size_and_is_seeded() {
        let a = flat_perturbed_1d(64, 7, 1e-3).unwrap();
        let b = flat_perturbed_1d(64, 7, 1e-3).unwrap();
        let c = flat_perturbed_1d(64, 8, 1e-3).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        let peak = a
            .values()
            .iter()
            .map(|g| (*g - SymBilinear3::identity()).max_abs())
            .fold(0.0, f64::max);
        assert!((peak - 1e-3).abs() < 1e-15);
    }

    #[test]
    fn mixed_sign_presets_have_both_signs() {
        let p = point_preset("mixed-sign", 0.0).unwrap();
        let (lo, hi) = sectional_extrema(&p.riemann().unwrap(), &p.metric).unwrap();
        assert!((lo + 0.625).abs() < 1e-12 && (hi - 0.875).abs() < 1e-12);
        let field = field_preset(
            "mixed-sign",
            &PresetParams {
                n: 64,
                ..Default::default()
            },
        )
        .unwrap()
        .field;
        let curv = curvature(&field).unwrap();
        assert!(curv.extrema.iter().any(|&(lo, hi)| lo < 0.0 && hi > 0.0));
    }

    #[test]
    fn every_listed_preset_builds() {
        for name in FIELD_PRESETS {
            let p = field_preset(
                name,
                &PresetParams {
                    n: 16,
                    ..Default::default()
                },
            )
            .unwrap();
            p.dynamics().unwrap();
        }
        for name in POINT_PRESETS {
            point_preset(name, -1.0).unwrap();
        }
        assert!(field_preset("sphere", &PresetParams::default()).is_err());
    }
}
