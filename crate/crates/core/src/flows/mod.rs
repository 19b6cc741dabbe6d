//! Right-hand sides of the flows, DeTurck's vector field and the gauge-fixed assembly.
//!
//! DeTurck's field against a background `g0` is
//! `V^j = −½ g0^{jk} g^{pq}(∇_k g0_pq − ∇_p g0_qk − ∇_q g0_pk)`, with `∇` the
//! Levi-Civita connection of the evolving `g`; the equivalent trace form is
//! `V^j = −g0^{jk} g^{pq} ∇_p(½ tr_g(g0) g_qk − g0_qk)`. The gauge-fixed flow
//! is `∂t g = L g − ℒ_V g`, which is strongly parabolic where the plain flow
//! is weakly parabolic.
//!
//! Along a family of diffeomorphisms `φ_t`, `V(φ*g) = −Δ_{g,g0} φ`, the
//! harmonic map Laplacian; this identity is what recovers the ungauged
//! solution, and it is not simulated here.

mod kind;

pub use kind::FlowKind;

use nalgebra::Vector3;
use rayon::prelude::*;

use crate::chart::{covariant_derivative_sym2, gradient, CurvatureField, MetricField};
use crate::error::{Error, Result};
use crate::tensor3::{
    inverse_metric, quad_contraction_with_inverse, quad_via_ricci_with_inverse, ricci_squared,
    Curv3, SymBilinear3,
};

/// How the quadratic curvature term `R_ijlm R_kstu g^js g^lt g^mu` is evaluated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum QuadMode {
    /// 3D identity in terms of Ricci (production path).
    #[default]
    Decomposition,
    /// Term-by-term contraction of the full tensor (verification path).
    FullContraction,
}

/// `L g` at one point.
pub fn rhs_point(
    kind: &FlowKind,
    g: &SymBilinear3,
    inv: &SymBilinear3,
    riem: &Curv3,
    ric: &SymBilinear3,
    mode: QuadMode,
) -> SymBilinear3 {
    let quad = || match mode {
        QuadMode::Decomposition => quad_via_ricci_with_inverse(ric, g, inv),
        QuadMode::FullContraction => quad_contraction_with_inverse(riem, inv),
    };
    // Ricci flow is the a = 0 member of RG2 and shares its arithmetic
    let rg2 = |a: f64| *ric * -2.0 - quad() * a;
    match *kind {
        FlowKind::Ricci => rg2(0.0),
        FlowKind::Rg2 { a } => rg2(a),
        FlowKind::Rg2Zero { a } => quad() * -a,
        FlowKind::SquaredRicci { a } => ricci_squared(ric, inv) * -a,
        FlowKind::Mixed { a } => *ric * -2.0 - ricci_squared(ric, inv) * a,
    }
}

fn check_lengths(field: &MetricField, curv: &CurvatureField) -> Result<()> {
    if curv.len() != field.len() {
        return Err(Error::GridMismatch(format!(
            "curvature has {} points, metric field {}",
            curv.len(),
            field.len()
        )));
    }
    Ok(())
}

pub fn rhs(
    field: &MetricField,
    curv: &CurvatureField,
    kind: &FlowKind,
) -> Result<Vec<SymBilinear3>> {
    rhs_with_mode(field, curv, kind, QuadMode::Decomposition)
}

pub fn rhs_with_mode(
    field: &MetricField,
    curv: &CurvatureField,
    kind: &FlowKind,
    mode: QuadMode,
) -> Result<Vec<SymBilinear3>> {
    kind.validate()?;
    check_lengths(field, curv)?;
    Ok((0..field.len())
        .into_par_iter()
        .map(|p| {
            rhs_point(
                kind,
                &field.values()[p],
                &curv.inverse[p],
                &curv.riem[p],
                &curv.ricci[p],
                mode,
            )
        })
        .collect())
}

/// Background metric of the gauge, with its inverse and chart derivatives.
#[derive(Clone, Debug)]
pub struct Background {
    field: MetricField,
    inverse: Vec<SymBilinear3>,
    gradient: [Vec<SymBilinear3>; 3],
}

impl Background {
    pub fn new(field: MetricField) -> Result<Self> {
        let inverse = field
            .values()
            .iter()
            .map(inverse_metric)
            .collect::<Result<_>>()?;
        let gradient = gradient(field.grid(), field.values());
        Ok(Self {
            field,
            inverse,
            gradient,
        })
    }

    pub fn field(&self) -> &MetricField {
        &self.field
    }

    pub fn inverse(&self) -> &[SymBilinear3] {
        &self.inverse
    }

    fn check_grid(&self, field: &MetricField) -> Result<()> {
        if field.grid() != self.field.grid() {
            return Err(Error::GridMismatch(format!(
                "background grid {:?} differs from metric grid {:?}",
                self.field.grid(),
                field.grid()
            )));
        }
        Ok(())
    }
}

/// DeTurck's vector field and the Lie derivative of the metric along it.
#[derive(Clone, Debug)]
pub struct DeTurckData {
    pub background: MetricField,
    pub background_inverse: Vec<SymBilinear3>,
    pub vector: Vec<Vector3<f64>>,
    pub lie: Vec<SymBilinear3>,
}

pub fn deturck_data(
    field: &MetricField,
    curv: &CurvatureField,
    background: &Background,
) -> Result<DeTurckData> {
    let vector = deturck_vector(field, curv, background)?;
    let lie = lie_derivative_metric(field, curv, &vector)?;
    Ok(DeTurckData {
        background: background.field.clone(),
        background_inverse: background.inverse.clone(),
        vector,
        lie,
    })
}

/// `V^j = −½ g0^{jk} g^{pq}(∇_k g0_pq − ∇_p g0_qk − ∇_q g0_pk)`.
pub fn deturck_vector(
    field: &MetricField,
    curv: &CurvatureField,
    background: &Background,
) -> Result<Vec<Vector3<f64>>> {
    background.check_grid(field)?;
    check_lengths(field, curv)?;
    let g0 = background.field.values();
    Ok((0..field.len())
        .into_par_iter()
        .map(|p| {
            let gam = &curv.christoffel[p];
            let inv = &curv.inverse[p];
            // ∇_a g0_bc = ∂_a g0_bc − Γ^r_ab g0_rc − Γ^r_ac g0_br
            let nabla: [SymBilinear3; 3] = std::array::from_fn(|a| {
                let mut t = background.gradient[a][p];
                for b in 0..3 {
                    for c in b..3 {
                        let corr: f64 = (0..3)
                            .map(|r| {
                                gam.get(r, a, b) * g0[p].get(r, c)
                                    + gam.get(r, a, c) * g0[p].get(b, r)
                            })
                            .sum();
                        t.set(b, c, t.get(b, c) - corr);
                    }
                }
                t
            });
            let w = Vector3::from_fn(|k, _| {
                let mut div = 0.0;
                for q in 0..3 {
                    for r in 0..3 {
                        div += inv.get(q, r) * nabla[q].get(r, k);
                    }
                }
                nabla[k].contract(inv) - 2.0 * div
            });
            background.inverse[p].apply(&w) * -0.5
        })
        .collect())
}

/// Trace form `V^j = −g0^{jk} g^{pq} ∇_p(½ tr_g(g0) g_qk − g0_qk)`, differencing the bracket.
pub fn deturck_vector_trace_form(
    field: &MetricField,
    curv: &CurvatureField,
    background: &Background,
) -> Result<Vec<Vector3<f64>>> {
    background.check_grid(field)?;
    check_lengths(field, curv)?;
    let g0 = background.field.values();
    let s: Vec<SymBilinear3> = (0..field.len())
        .map(|p| field.values()[p] * (0.5 * g0[p].contract(&curv.inverse[p])) - g0[p])
        .collect();
    let nabla = covariant_derivative_sym2(field, curv, &s)?;
    Ok((0..field.len())
        .map(|p| {
            let inv = &curv.inverse[p];
            let w = Vector3::from_fn(|k, _| {
                let mut acc = 0.0;
                for q in 0..3 {
                    for r in 0..3 {
                        acc += inv.get(q, r) * nabla[p][q].get(r, k);
                    }
                }
                acc
            });
            -background.inverse[p].apply(&w)
        })
        .collect())
}

/// `(ℒ_V g)_ik = ∂_i V_k + ∂_k V_i − 2Γ^r_ik V_r`, with `V_k = g_kj V^j`.
pub fn lie_derivative_metric(
    field: &MetricField,
    curv: &CurvatureField,
    v: &[Vector3<f64>],
) -> Result<Vec<SymBilinear3>> {
    check_lengths(field, curv)?;
    if v.len() != field.len() {
        return Err(Error::GridMismatch(
            "vector field length differs from the metric grid".into(),
        ));
    }
    let lowered: Vec<Vector3<f64>> = field
        .values()
        .iter()
        .zip(v)
        .map(|(g, v)| g.apply(v))
        .collect();
    let dv = gradient(field.grid(), &lowered);
    Ok((0..field.len())
        .into_par_iter()
        .map(|p| {
            let gam = &curv.christoffel[p];
            let mut out = SymBilinear3::ZERO;
            for i in 0..3 {
                for k in i..3 {
                    let conn: f64 = (0..3).map(|r| gam.get(r, i, k) * lowered[p][r]).sum();
                    out.set(i, k, dv[i][p][k] + dv[k][p][i] - 2.0 * conn);
                }
            }
            out
        })
        .collect())
}

/// `L g − ℒ_V g` with DeTurck's field against `background`.
pub fn rhs_gauge_fixed(
    field: &MetricField,
    curv: &CurvatureField,
    kind: &FlowKind,
    background: &Background,
) -> Result<Vec<SymBilinear3>> {
    let plain = rhs(field, curv, kind)?;
    let v = deturck_vector(field, curv, background)?;
    let lie = lie_derivative_metric(field, curv, &v)?;
    Ok(plain.into_iter().zip(lie).map(|(l, d)| l - d).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::{curvature, Grid};
    use crate::tensor3::testing::{random_spd, random_sym};
    use crate::tensor3::{constant_curvature, normal_rotation, riemann_from_ricci};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn skewed(n: usize) -> MetricField {
        let grid = Grid::one_d(n).unwrap();
        MetricField::from_fn(grid, "skewed", |x| {
            let s = x[0].sin();
            let c = x[0].cos();
            SymBilinear3::new([
                1.2 + 0.2 * s,
                0.1 * c,
                0.05 * s,
                1.0 + 0.1 * c * c,
                0.08 * s * c,
                0.9 - 0.1 * s,
            ])
        })
        .unwrap()
    }

    fn perturbed_flat(n: usize) -> MetricField {
        let grid = Grid::one_d(n).unwrap();
        MetricField::from_fn(grid, "perturbed", |x| {
            let t = x[0];
            SymBilinear3::new([
                1.0 + 0.05 * (2.0 * t).sin(),
                0.02 * t.cos(),
                0.0,
                1.0 + 0.03 * t.cos(),
                0.01 * (3.0 * t).sin(),
                1.0 - 0.04 * t.sin(),
            ])
        })
        .unwrap()
    }

    fn point_rhs(kind: &FlowKind, g: &SymBilinear3, riem: &Curv3, mode: QuadMode) -> SymBilinear3 {
        let inv = inverse_metric(g).unwrap();
        let ric = crate::tensor3::ricci_from_riemann(riem, g).unwrap();
        rhs_point(kind, g, &inv, riem, &ric, mode)
    }

    #[test]
    fn flat_is_stationary() {
        let field =
            MetricField::constant(Grid::one_d(16).unwrap(), SymBilinear3::identity()).unwrap();
        let curv = curvature(&field).unwrap();
        let bg = Background::new(field.clone()).unwrap();
        for kind in FlowKind::all(0.3) {
            assert!(rhs(&field, &curv, &kind)
                .unwrap()
                .iter()
                .all(|t| t.max_abs() == 0.0));
            assert!(rhs_gauge_fixed(&field, &curv, &kind, &bg)
                .unwrap()
                .iter()
                .all(|t| t.max_abs() == 0.0));
        }
    }

    #[test]
    fn constant_curvature_rg2() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let g = random_spd(&mut rng);
            let k = rng.gen_range(-2.0..2.0);
            let a = rng.gen_range(-0.5..0.5);
            let riem = constant_curvature(k, &g);
            let out = point_rhs(&FlowKind::Rg2 { a }, &g, &riem, QuadMode::Decomposition);
            assert!((out - g * -(4.0 * k + 4.0 * a * k * k)).max_abs() < 1e-12);
        }
        let g = SymBilinear3::identity();
        let out = point_rhs(
            &FlowKind::Rg2 { a: 0.1 },
            &g,
            &constant_curvature(1.0, &g),
            QuadMode::FullContraction,
        );
        assert!((out - g * -4.4).max_abs() < 1e-13);
    }

    #[test]
    fn decomposition_matches_full_contraction_on_grid() {
        let field = skewed(64);
        let curv = curvature(&field).unwrap();
        for kind in [FlowKind::Rg2 { a: 0.7 }, FlowKind::Rg2Zero { a: -1.3 }] {
            let fast = rhs_with_mode(&field, &curv, &kind, QuadMode::Decomposition).unwrap();
            let full = rhs_with_mode(&field, &curv, &kind, QuadMode::FullContraction).unwrap();
            for (x, y) in fast.iter().zip(&full) {
                assert!(
                    (*x - *y).max_abs() <= 1e-11 * y.max_abs().max(1e-300),
                    "{x:?} vs {y:?}"
                );
            }
        }
    }

    #[test]
    fn ricci_kind_is_rg2_at_zero_coupling() {
        let field = skewed(32);
        let curv = curvature(&field).unwrap();
        let a = rhs(&field, &curv, &FlowKind::Ricci).unwrap();
        let b = rhs(&field, &curv, &FlowKind::Rg2 { a: 0.0 }).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rotation_equivariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..100 {
            let g = random_spd(&mut rng);
            let riem = riemann_from_ricci(&random_sym(&mut rng, 1.0), &g).unwrap();
            let axis = nalgebra::Unit::new_normalize(nalgebra::Vector3::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            ));
            let p = *nalgebra::Rotation3::from_axis_angle(&axis, rng.gen_range(0.0..6.0)).matrix();
            let a = rng.gen_range(-0.5..0.5);
            for kind in FlowKind::all(a) {
                let before = point_rhs(&kind, &g, &riem, QuadMode::Decomposition).congruence(&p);
                let after = point_rhs(
                    &kind,
                    &g.congruence(&p),
                    &riem.transform(&p),
                    QuadMode::Decomposition,
                );
                assert!((before - after).max_abs() < 1e-12, "{kind:?}");
            }
        }
        // the frame rotation used for symbols is a special case
        let p = normal_rotation(0.4);
        let g = SymBilinear3::identity();
        let riem = riemann_from_ricci(&SymBilinear3::diag(0.3, -0.2, 0.9), &g).unwrap();
        let kind = FlowKind::Mixed { a: 0.2 };
        let before = point_rhs(&kind, &g, &riem, QuadMode::Decomposition).congruence(&p);
        let after = point_rhs(
            &kind,
            &g.congruence(&p),
            &riem.transform(&p),
            QuadMode::Decomposition,
        );
        assert!((before - after).max_abs() < 1e-12);
    }

    #[test]
    fn scale_invariant_flows_are_homogeneous_of_degree_minus_one() {
        // Riem(cg) = c Riem(g) as a (0,4) tensor, so the quadratic terms pick up c² · c⁻³
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let g = random_spd(&mut rng);
            let riem = riemann_from_ricci(&random_sym(&mut rng, 1.0), &g).unwrap();
            let c = rng.gen_range(0.2..5.0);
            for kind in [
                FlowKind::Rg2Zero { a: 0.7 },
                FlowKind::SquaredRicci { a: -0.4 },
            ] {
                let base = point_rhs(&kind, &g, &riem, QuadMode::FullContraction);
                let scaled = point_rhs(&kind, &(g * c), &(riem * c), QuadMode::FullContraction);
                assert!(
                    (scaled * c - base).max_abs() <= 1e-11 * base.max_abs(),
                    "{kind:?}"
                );
            }
            // the Ricci term is scale invariant, so RG2 mixes the two weights
            let ric_only = point_rhs(
                &FlowKind::Ricci,
                &(g * c),
                &(riem * c),
                QuadMode::Decomposition,
            );
            assert!(
                (ric_only - point_rhs(&FlowKind::Ricci, &g, &riem, QuadMode::Decomposition))
                    .max_abs()
                    < 1e-12
            );
        }
    }

    #[test]
    fn deturck_vanishes_at_background_and_its_multiples() {
        let field = skewed(128);
        let bg = Background::new(field.clone()).unwrap();
        let curv = curvature(&field).unwrap();
        let data = deturck_data(&field, &curv, &bg).unwrap();
        assert!(data.vector.iter().all(|v| v.amax() < 1e-10));
        assert!(data.lie.iter().all(|t| t.max_abs() < 1e-10));
        let scaled = field
            .with_values(field.values().iter().map(|g| *g * 2.5).collect())
            .unwrap();
        let curv2 = curvature(&scaled).unwrap();
        let v = deturck_vector(&scaled, &curv2, &bg).unwrap();
        assert!(v.iter().all(|v| v.amax() < 1e-10));
        let plain = rhs(&field, &curv, &FlowKind::Rg2 { a: 0.2 }).unwrap();
        let fixed = rhs_gauge_fixed(&field, &curv, &FlowKind::Rg2 { a: 0.2 }, &bg).unwrap();
        for (x, y) in plain.iter().zip(&fixed) {
            assert!((*x - *y).max_abs() < 1e-9);
        }
    }

    #[test]
    fn both_deturck_forms_agree() {
        let field = perturbed_flat(256);
        let flat = MetricField::constant(*field.grid(), SymBilinear3::identity()).unwrap();
        let curv = curvature(&field).unwrap();
        for bg in [
            Background::new(flat).unwrap(),
            Background::new(skewed(256)).unwrap(),
        ] {
            let a = deturck_vector(&field, &curv, &bg).unwrap();
            let b = deturck_vector_trace_form(&field, &curv, &bg).unwrap();
            let scale = a.iter().map(|v| v.amax()).fold(0.0, f64::max);
            assert!(scale > 1e-3);
            let diff = a
                .iter()
                .zip(&b)
                .map(|(x, y)| (x - y).amax())
                .fold(0.0, f64::max);
            // the forms apply stencils to different expressions, so they agree only to truncation error
            assert!(diff < 1e-7, "{diff}");
        }
    }

    #[test]
    fn lie_derivative_cases() {
        let grid = Grid::one_d(128).unwrap();
        let flat = MetricField::constant(grid, SymBilinear3::identity()).unwrap();
        let curv = curvature(&flat).unwrap();
        let zero = lie_derivative_metric(&flat, &curv, &vec![Vector3::zeros(); 128]).unwrap();
        assert!(zero.iter().all(|t| t.max_abs() == 0.0));
        let translation =
            lie_derivative_metric(&flat, &curv, &vec![Vector3::new(0.3, -1.0, 2.0); 128]).unwrap();
        assert!(translation.iter().all(|t| t.max_abs() < 1e-14));
        let v: Vec<Vector3<f64>> = (0..128)
            .map(|i| Vector3::new(grid.point(i)[0].sin(), 0.0, 0.0))
            .collect();
        let l = lie_derivative_metric(&flat, &curv, &v).unwrap();
        for (i, t) in l.iter().enumerate() {
            let want = SymBilinear3::diag(2.0 * grid.point(i)[0].cos(), 0.0, 0.0);
            assert!((*t - want).max_abs() < 1e-6);
        }
        // rotations of the (y, z) plane are Killing for the warped metric
        let warped = MetricField::from_fn(grid, "warped", |x| {
            let f = 1.0 + 0.1 * x[0].sin();
            SymBilinear3::diag(1.0, f * f, f * f)
        })
        .unwrap();
        let wc = curvature(&warped).unwrap();
        let rot: Vec<Vector3<f64>> = vec![Vector3::new(0.0, 1.0, -0.5); 128];
        let l = lie_derivative_metric(&warped, &wc, &rot).unwrap();
        assert!(l.iter().all(|t| t.max_abs() < 1e-8));
    }

    #[test]
    fn mismatched_grids_are_rejected() {
        let a = skewed(32);
        let b = Background::new(skewed(64)).unwrap();
        let curv = curvature(&a).unwrap();
        assert!(matches!(
            deturck_vector(&a, &curv, &b),
            Err(Error::GridMismatch(_))
        ));
    }
}
