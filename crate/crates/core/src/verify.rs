//! Self-test suite behind `rgflow verify`: each check recomputes a known
//! value by an independent route.

use std::time::Instant;

use nalgebra::{Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::chart::{
    covariant_derivative_sym2, curvature, curvature_from_jet, linearize_flow, sign_self_check,
    space_form_jet, Grid, MetricField, Snapshot,
};
use crate::error::{Error, Result};
use crate::flows::{deturck_vector, deturck_vector_trace_form, Background, FlowKind};
use crate::integrate::{
    ode_reference, pointwise_scale, run, run_with, Controls, Dynamics, FlowState, StopReason,
};
use crate::presets::{field_preset, flat_perturbed_1d, warped_1d, PresetParams};
use crate::symbol::{
    gauge_fixed_symbol, linearized_symbol, parabolicity, plain_symbol_unrotated, point_symbols,
    Verdict, EPS_PAR,
};
use crate::tensor3::{
    curvature_spectrum, inverse_metric, kill_angle, orthonormal_frame, quad_contraction,
    quad_via_ricci, riemann_from_ricci, sectional, Curv3, SymBilinear3,
};

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct VerifyOptions {
    /// Only the sub-second checks.
    pub quick: bool,
    /// Flip the sign of the curvature kernel inside the normalization check.
    pub sign_fault: bool,
}

type Check = fn(&VerifyOptions) -> Result<(bool, String)>;

/// `(name, in quick subset, check)`.
const CHECKS: [(&str, bool, Check); 14] = [
    ("sign-normalization", true, sign_normalization),
    ("space-form-jets", true, space_form_jets),
    ("quadratic-identity", true, quadratic_identity),
    ("symbol-spectrum", true, symbol_spectrum),
    ("rotation-rule", true, rotation_rule),
    ("gauge-fixed-verdict", true, gauge_fixed_verdict),
    ("metric-compatibility", true, metric_compatibility),
    ("deturck-forms", true, deturck_forms),
    ("scale-ode", true, scale_ode),
    ("parabolicity-gate", true, parabolicity_gate),
    ("snapshot-round-trip", true, snapshot_round_trip),
    ("fd-convergence", false, fd_convergence),
    ("operator-vs-symbol", false, operator_vs_symbol),
    ("smoke-run", false, smoke_run),
];

pub fn check_names(quick: bool) -> Vec<&'static str> {
    CHECKS
        .iter()
        .filter(|c| c.1 || !quick)
        .map(|c| c.0)
        .collect()
}

/// Runs the suite; a check that errors counts as failed.
pub fn run_checks(opts: &VerifyOptions) -> Vec<CheckResult> {
    CHECKS
        .iter()
        .filter(|c| c.1 || !opts.quick)
        .map(|&(name, _, check)| {
            let start = Instant::now();
            let (passed, detail) = check(opts).unwrap_or_else(|e| (false, format!("error: {e}")));
            CheckResult {
                name,
                passed,
                detail,
                seconds: start.elapsed().as_secs_f64(),
            }
        })
        .collect()
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn rand_sym(rng: &mut ChaCha8Rng) -> SymBilinear3 {
    SymBilinear3::new(std::array::from_fn(|_| rng.gen_range(-1.0..1.0)))
}

fn rand_spd(rng: &mut ChaCha8Rng) -> SymBilinear3 {
    let a = Matrix3::from_fn(|_, _| rng.gen_range(-1.0..1.0));
    SymBilinear3::from_matrix(&(a.transpose() * a + Matrix3::identity() * 0.5))
}

fn sorted_re(s: &crate::symbol::Symbol6) -> Vec<f64> {
    let mut v: Vec<f64> = s.eigenvalues().iter().map(|z| z.re).collect();
    v.sort_by(f64::total_cmp);
    v
}

fn spread(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn sign_normalization(opts: &VerifyOptions) -> Result<(bool, String)> {
    match sign_self_check(opts.sign_fault) {
        Ok(k) => Ok((true, format!("unit sphere sectional curvature {k:.12}"))),
        Err(Error::SignConvention(k)) => Ok((
            false,
            format!("unit sphere sectional curvature came out {k:.12}"),
        )),
        Err(e) => Err(e),
    }
}

fn space_form_jets(_: &VerifyOptions) -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for k in [1.0, -1.0, 0.35] {
        let jet = space_form_jet(k, [0.2, -0.1, 0.3]);
        let pc = curvature_from_jet(&jet)?;
        let s = curvature_spectrum(&pc.riem, &jet.g)?;
        worst = worst.max((s.min() - k).abs()).max((s.max() - k).abs());
    }
    Ok((
        worst < 1e-8,
        format!("max |K − k| {worst:.2e} for k ∈ {{1, −1, 0.35}}"),
    ))
}

fn quadratic_identity(_: &VerifyOptions) -> Result<(bool, String)> {
    let mut r = rng(11);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let g = rand_spd(&mut r);
        let ric = rand_sym(&mut r);
        let full = quad_contraction(&riemann_from_ricci(&ric, &g)?, &g)?;
        let closed = quad_via_ricci(&ric, &g)?;
        worst = worst.max((full - closed).max_abs() / closed.max_abs().max(1e-300));
    }
    Ok((
        worst < 1e-11,
        format!("max relative difference {worst:.2e} over 1000 samples"),
    ))
}

fn branch(ric: &SymBilinear3, a: f64) -> [f64; 3] {
    let beta = 0.5 * (ric.get(0, 0) + ric.get(2, 2) - ric.get(1, 1));
    let gamma = 0.5 * (ric.get(0, 0) + ric.get(1, 1) - ric.get(2, 2));
    [
        1.0 + 2.0 * a * gamma,
        1.0 + 2.0 * a * beta,
        1.0 + a * (beta + gamma),
    ]
}

fn symbol_spectrum(_: &VerifyOptions) -> Result<(bool, String)> {
    let mut r = rng(12);
    let mut worst = 0.0f64;
    for a in [-0.3, 0.0, 0.5] {
        for _ in 0..200 {
            let mut ric = rand_sym(&mut r);
            ric.set(1, 2, 0.0);
            let mut expected = vec![0.0; 3];
            expected.extend(branch(&ric, a));
            expected.sort_by(f64::total_cmp);
            worst = worst.max(spread(&sorted_re(&linearized_symbol(&ric, a)?), &expected));
        }
    }
    Ok((
        worst < 1e-10,
        format!("max eigenvalue error {worst:.2e} over 600 symbols"),
    ))
}

fn rotation_rule(_: &VerifyOptions) -> Result<(bool, String)> {
    let mut r = rng(13);
    let mut worst = 0.0f64;
    for i in 0..2000 {
        let r22 = r.gen_range(-1.0..1.0);
        let r33 = if i % 10 == 0 {
            r22
        } else {
            r.gen_range(-1.0..1.0)
        };
        let r23 = r.gen_range(-1.0..1.0);
        let alpha = kill_angle(r22, r33, r23);
        worst =
            worst.max((r23 * (2.0 * alpha).cos() - 0.5 * (r22 - r33) * (2.0 * alpha).sin()).abs());
    }
    let diag = kill_angle(5.0, 1.0, 2.0);
    let ok = worst < 1e-12 && (diag - std::f64::consts::PI / 8.0).abs() < 1e-15;
    Ok((
        ok,
        format!("max |R'23| {worst:.2e}; (R22, R33, R23) = (5, 1, 2) gives α = {diag:.15}"),
    ))
}

fn gauge_fixed_verdict(_: &VerifyOptions) -> Result<(bool, String)> {
    let mut r = rng(14);
    let (mut worst, mut mismatches, mut plane_gap) = (0.0f64, 0, 0.0f64);
    for case in 0..300 {
        let g = rand_spd(&mut r);
        let riem = riemann_from_ricci(&rand_sym(&mut r), &g)?;
        let a = r.gen_range(-1.0..1.0);
        let xi = Vector3::from_fn(|_, _| r.gen_range(-1.0..1.0));
        let kind = FlowKind::Rg2 { a };
        let ps = point_symbols(&riem, &g, &xi, &kind)?;
        let mut expected = vec![1.0; 3];
        expected.extend(branch(&ps.ricci_rotated, a));
        expected.sort_by(f64::total_cmp);
        worst = worst.max(spread(
            &sorted_re(&gauge_fixed_symbol(&ps.ricci_rotated, a)?),
            &expected,
        ));
        let spectrum = curvature_spectrum(&riem, &g)?;
        let predicted =
            (1.0 + 2.0 * a * spectrum.min()).min(1.0 + 2.0 * a * spectrum.max()) > EPS_PAR;
        let verdict = parabolicity(&riem, &g, &kind, EPS_PAR)?.verdict;
        mismatches += usize::from(predicted != (verdict == Verdict::StronglyElliptic));
        if case < 20 {
            for _ in 0..2000 {
                let x = Vector3::from_fn(|_, _| r.gen_range(-1.0..1.0));
                let y = Vector3::from_fn(|_, _| r.gen_range(-1.0..1.0));
                let k = sectional(&riem, &g, &x, &y)?;
                plane_gap = plane_gap.max(spectrum.min() - k).max(k - spectrum.max());
            }
        }
    }
    Ok((
        worst < 1e-10 && mismatches == 0 && plane_gap < 1e-9,
        format!("spectrum error {worst:.2e}, verdict mismatches {mismatches}/300, sampled planes outside extrema by {plane_gap:.2e}"),
    ))
}

fn metric_compatibility(_: &VerifyOptions) -> Result<(bool, String)> {
    let field = warped_1d(256, 0.1)?;
    let curv = curvature(&field)?;
    let nabla = covariant_derivative_sym2(&field, &curv, field.values())?;
    let worst = nabla
        .iter()
        .flatten()
        .map(|t| t.max_abs())
        .fold(0.0, f64::max);
    Ok((
        worst < 1e-10,
        format!("max |∇g| {worst:.2e} on the warped field, N = 256"),
    ))
}

fn deturck_forms(_: &VerifyOptions) -> Result<(bool, String)> {
    let field = flat_perturbed_1d(256, 1, 1e-2)?;
    let curv = curvature(&field)?;
    let at_self = Background::new(field.clone())?;
    let zero = deturck_vector(&field, &curv, &at_self)?
        .iter()
        .map(|v| v.amax())
        .fold(0.0, f64::max);
    let flat = Background::new(MetricField::constant(
        *field.grid(),
        SymBilinear3::identity(),
    )?)?;
    let a = deturck_vector(&field, &curv, &flat)?;
    let b = deturck_vector_trace_form(&field, &curv, &flat)?;
    let diff = a
        .iter()
        .zip(&b)
        .map(|(x, y)| (x - y).amax())
        .fold(0.0, f64::max);
    Ok((
        zero < 1e-12 && diff < 1e-7,
        format!("|V| at g = g0: {zero:.2e}; two forms differ by {diff:.2e}"),
    ))
}

fn scale_ode(_: &VerifyOptions) -> Result<(bool, String)> {
    let linear = ode_reference(1.0, 0.0, 1.0, 0.2, 20)?;
    let lin_err = linear
        .t
        .iter()
        .zip(&linear.c)
        .map(|(t, c)| (c - (1.0 - 4.0 * t)).abs())
        .fold(0.0, f64::max);
    let extinct = ode_reference(1.0, 0.0, 1.0, 0.3, 3)?
        .extinction
        .unwrap_or(f64::NAN);
    let mut rk_err = 0.0f64;
    for (k0, a) in [(1.0, 0.0), (1.0, 0.1), (-1.0, 0.4)] {
        let field = field_preset(
            "constant-curvature-ode",
            &PresetParams {
                n: 6,
                ..Default::default()
            },
        )?
        .field;
        let dynamics = Dynamics::pointwise_constant_curvature(k0, &field);
        let controls = Controls {
            dt0: 1e-3,
            t_end: 0.1,
            ..Controls::default()
        };
        let tr = run(
            FlowState::new(field.clone()),
            &dynamics,
            &FlowKind::Rg2 { a },
            &controls,
        )?;
        let exact = ode_reference(k0, a, 1.0, 0.1, 1)?.c[1];
        let dets: Vec<f64> = field.values().iter().map(|g| g.det()).collect();
        for c in pointwise_scale(&tr.final_state.field, &dets) {
            rk_err = rk_err.max((c - exact).abs() / exact);
        }
    }
    Ok((
        lin_err < 1e-10 && (extinct - 0.25).abs() < 1e-6 && rk_err < 1e-8,
        format!(
            "a = 0 against 1 − 4t: {lin_err:.2e}; extinction at {extinct:.8}; RK4 against reference at t = 0.1: {rk_err:.2e}"
        ),
    ))
}

fn parabolicity_gate(_: &VerifyOptions) -> Result<(bool, String)> {
    let controls = Controls {
        t_end: 0.005,
        ..Controls::default()
    };
    let attempt = |curvature: f64, kind: FlowKind| -> Result<std::result::Result<f64, f64>> {
        let p = field_preset(
            "constant-curvature",
            &PresetParams {
                n: 5,
                curvature,
                ..Default::default()
            },
        )?;
        match run(
            FlowState::new(p.field.clone()),
            &p.dynamics()?,
            &kind,
            &controls,
        ) {
            Ok(tr) => Ok(Ok(tr.initial.margin)),
            Err(Error::InitialConditionRejected { margin, .. }) => Ok(Err(margin)),
            Err(e) => Err(e),
        }
    };
    let accepted = attempt(-1.0, FlowKind::Rg2 { a: 0.4 })?;
    let rejected = attempt(-1.0, FlowKind::Rg2 { a: 0.6 })?;
    let zero_pos = attempt(1.0, FlowKind::Rg2Zero { a: 0.3 })?.is_ok();
    let zero_neg = attempt(-1.0, FlowKind::Rg2Zero { a: -0.3 })?.is_ok();
    let ok = matches!(accepted, Ok(m) if (m - 0.2).abs() < 1e-12)
        && matches!(rejected, Err(m) if (m + 0.2).abs() < 1e-12)
        && zero_pos
        && zero_neg;
    Ok((ok, format!("K ≡ −1: a = 0.4 → {accepted:?}, a = 0.6 → {rejected:?}; RG2zero same-sign data accepted: {zero_pos}, {zero_neg}")))
}

fn snapshot_round_trip(_: &VerifyOptions) -> Result<(bool, String)> {
    let field = flat_perturbed_1d(32, 3, 0.1)?;
    let text = serde_json::to_string(&field.to_snapshot(Some(1.0 / 3.0)))?;
    let back = serde_json::from_str::<Snapshot>(&text)?.to_field()?;
    let exact = back.values().iter().zip(field.values()).all(|(u, v)| {
        u.0.iter()
            .zip(&v.0)
            .all(|(p, q)| p.to_bits() == q.to_bits())
    });
    Ok((exact, format!("bit-exact: {exact}")))
}

fn warped_error(n: usize) -> Result<f64> {
    let field = warped_1d(n, 0.1)?;
    let curv = curvature(&field)?;
    Ok((0..n)
        .map(|i| {
            let x = field.grid().point(i)[0];
            let (f, df, ddf) = (1.0 + 0.1 * x.sin(), 0.1 * x.cos(), -0.1 * x.sin());
            let fiber = -(f * ddf + df * df);
            (curv.ricci[i] - SymBilinear3::diag(-2.0 * ddf / f, fiber, fiber)).max_abs()
        })
        .fold(0.0, f64::max))
}

fn fd_convergence(_: &VerifyOptions) -> Result<(bool, String)> {
    let e = [warped_error(64)?, warped_error(128)?, warped_error(256)?];
    let ratios = [e[0] / e[1], e[1] / e[2]];
    Ok((
        ratios.iter().all(|r| (12.8..=19.2).contains(r)),
        format!(
            "error ratios {:.2}, {:.2} (band 12.8–19.2)",
            ratios[0], ratios[1]
        ),
    ))
}

fn operator_vs_symbol(_: &VerifyOptions) -> Result<(bool, String)> {
    let grid = Grid::one_d(256)?;
    let field = MetricField::constant(grid, SymBilinear3::identity())?;
    let h_dir = SymBilinear3::new([0.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
    let mut worst = 0.0f64;
    for kind in [
        FlowKind::Ricci,
        FlowKind::Rg2 { a: 0.2 },
        FlowKind::Mixed { a: 0.2 },
    ] {
        let w = 32.0;
        let h: Vec<SymBilinear3> = (0..grid.len())
            .map(|i| h_dir * (w * grid.point(i)[0]).cos())
            .collect();
        let lin = linearize_flow(&field, &h, &kind, 1e-6)?;
        let frame = orthonormal_frame(&SymBilinear3::identity(), &Vector3::x())?;
        let action = frame.to_chart(&plain_symbol_unrotated(&kind, &Curv3::ZERO).apply(&h_dir));
        let (mut num, mut den) = (0.0, 0.0);
        for (i, l) in lin.iter().enumerate() {
            let expected = action
                * (w * grid.point(i)[0]).cos()
                * inverse_metric(&field.values()[i])?.get(0, 0);
            let d = *l * (-1.0 / (w * w)) - expected;
            num += d.0.iter().map(|v| v * v).sum::<f64>();
            den += expected.0.iter().map(|v| v * v).sum::<f64>();
        }
        worst = worst.max((num / den).sqrt());
    }
    Ok((
        worst < 0.05,
        format!("relative error at ω = 32, N = 256 with only h22: {worst:.2e} (limit 5%)"),
    ))
}

fn smoke_run(_: &VerifyOptions) -> Result<(bool, String)> {
    let field = flat_perturbed_1d(128, 0, 1e-3)?;
    let dynamics = Dynamics::gauge_fixed(&field)?;
    let controls = Controls {
        dt0: 1e-2,
        t_end: 0.5,
        ..Controls::default()
    };
    let mut last = 0.0;
    let tr = run_with(
        FlowState::new(field),
        &dynamics,
        &FlowKind::Rg2 { a: 0.01 },
        &controls,
        |_, r| {
            last = r.max_riem;
            Ok(())
        },
    )?;
    let ratio = last / tr.initial.max_riem;
    Ok((
        tr.stop == StopReason::TEnd && ratio < 0.1,
        format!(
            "stop {} after {} steps, max |K| ratio {ratio:.2e}",
            tr.stop,
            tr.steps()
        ),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_suite_passes_and_catches_sign_fault() {
        let results = run_checks(&VerifyOptions {
            quick: true,
            sign_fault: false,
        });
        for r in &results {
            assert!(r.passed, "{}: {}", r.name, r.detail);
        }
        let faulty = run_checks(&VerifyOptions {
            quick: true,
            sign_fault: true,
        });
        let failed: Vec<_> = faulty
            .iter()
            .filter(|r| !r.passed)
            .map(|r| r.name)
            .collect();
        assert_eq!(failed, ["sign-normalization"]);
        assert!(check_names(true).len() < check_names(false).len());
    }
}
