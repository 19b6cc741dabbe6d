//! Explicit time stepping of the gauge-fixed flows with a runtime monitor.

mod ode;

pub use ode::{ode_reference, scale_rate, ScaleTrajectory};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chart::{curvature, Christoffel, CurvatureField, MetricField};
use crate::error::{Error, Result};
use crate::flows::{rhs, rhs_gauge_fixed, Background, FlowKind};
use crate::symbol::{max_symbol_eigenvalue, parabolicity, parabolicity_margin, EPS_PAR};
use crate::tensor3::{constant_curvature, inverse_metric, SymBilinear3};

/// How the right-hand side and curvature of a state are obtained.
#[derive(Clone, Debug)]
pub enum Dynamics {
    /// Finite-difference curvature, `L g − ℒ_V g` with DeTurck's field against the background.
    GaugeFixed(Background),
    /// Finite-difference curvature, `L g` without gauge term.
    Plain,
    /// Each point carries a metric of constant sectional curvature; the
    /// curvature is `k0 (det g0 / det g)^{1/3}` with `g0` the initial value.
    /// No spatial derivatives are taken.
    PointwiseConstantCurvature { k0: f64, reference_det: Vec<f64> },
}

impl Dynamics {
    /// Gauge-fixed dynamics with the initial metric as background.
    pub fn gauge_fixed(initial: &MetricField) -> Result<Self> {
        Ok(Self::GaugeFixed(Background::new(initial.clone())?))
    }

    pub fn pointwise_constant_curvature(k0: f64, initial: &MetricField) -> Self {
        Self::PointwiseConstantCurvature {
            k0,
            reference_det: initial.values().iter().map(|g| g.det()).collect(),
        }
    }

    /// Whether the time step is bounded by the grid spacing.
    pub fn is_spatial(&self) -> bool {
        !matches!(self, Self::PointwiseConstantCurvature { .. })
    }

    pub fn curvature(&self, field: &MetricField) -> Result<CurvatureField> {
        match self {
            Self::GaugeFixed(_) | Self::Plain => curvature(field),
            Self::PointwiseConstantCurvature { k0, reference_det } => {
                if reference_det.len() != field.len() {
                    return Err(Error::GridMismatch(
                        "reference determinants do not match the field".into(),
                    ));
                }
                let n = field.len();
                let mut out = CurvatureField {
                    inverse: Vec::with_capacity(n),
                    christoffel: vec![Christoffel::default(); n],
                    riem: Vec::with_capacity(n),
                    ricci: Vec::with_capacity(n),
                    scalar: Vec::with_capacity(n),
                    extrema: Vec::with_capacity(n),
                };
                for (g, d0) in field.values().iter().zip(reference_det) {
                    let k = k0 * (d0 / g.det()).cbrt();
                    out.inverse.push(inverse_metric(g)?);
                    out.riem.push(constant_curvature(k, g));
                    out.ricci.push(*g * (2.0 * k));
                    out.scalar.push(6.0 * k);
                    out.extrema.push((k, k));
                }
                Ok(out)
            }
        }
    }

    pub fn rhs(
        &self,
        field: &MetricField,
        curv: &CurvatureField,
        kind: &FlowKind,
    ) -> Result<Vec<SymBilinear3>> {
        match self {
            Self::GaugeFixed(bg) => rhs_gauge_fixed(field, curv, kind, bg),
            Self::Plain | Self::PointwiseConstantCurvature { .. } => rhs(field, curv, kind),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowState {
    pub t: f64,
    pub field: MetricField,
}

impl FlowState {
    pub fn new(field: MetricField) -> Self {
        Self { t: 0.0, field }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Controls {
    pub dt0: f64,
    pub t_end: f64,
    pub cfl: f64,
    pub eps_par: f64,
    /// Curvature blow-up threshold on `max |K|`.
    pub max_riem: f64,
    /// Degeneracy threshold on the smallest metric eigenvalue.
    pub eps_g: f64,
    pub min_dt: f64,
    /// Accepted steps between refreshes of the step bound.
    pub lambda_every: usize,
    /// Run even where the flow is not parabolic; the parabolicity stop is disabled.
    pub force: bool,
}

impl Default for Controls {
    fn default() -> Self {
        Self {
            dt0: 1e-3,
            t_end: 0.1,
            cfl: 0.2,
            eps_par: EPS_PAR,
            max_riem: 1e6,
            eps_g: 1e-8,
            min_dt: 1e-12,
            lambda_every: 10,
            force: false,
        }
    }
}

impl Controls {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("dt0", self.dt0),
            ("cfl", self.cfl),
            ("eps_par", self.eps_par),
            ("max_riem", self.max_riem),
            ("eps_g", self.eps_g),
            ("min_dt", self.min_dt),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "t_end must be non-negative, got {}",
                self.t_end
            )));
        }
        if self.lambda_every == 0 {
            return Err(Error::InvalidArgument(
                "lambda_every must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    TEnd,
    ParabolicityLost,
    CurvatureBlowUp,
    MetricDegeneracy,
    StepUnderflow,
}

impl StopReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::TEnd => "t_end",
            Self::ParabolicityLost => "parabolicity_lost",
            Self::CurvatureBlowUp => "curvature_blow_up",
            Self::MetricDegeneracy => "metric_degeneracy",
            Self::StepUnderflow => "step_underflow",
        }
    }
}

impl std::fmt::Display for StopReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One line of the diagnostics CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticRow {
    pub t: f64,
    /// Step that produced this state; zero for the initial state.
    pub dt: f64,
    pub margin: f64,
    pub max_riem: f64,
    pub min_eig_g: f64,
    pub kind: String,
    pub a: f64,
}

/// Global monitor values with the location of the smallest margin.
#[derive(Clone, Debug, PartialEq)]
pub struct Monitor {
    pub margin: f64,
    pub worst_point: usize,
    pub max_riem: f64,
    pub min_eig_g: f64,
}

fn monitor_with(field: &MetricField, curv: &CurvatureField, kind: &FlowKind) -> Result<Monitor> {
    let margins: Vec<f64> = (0..field.len())
        .into_par_iter()
        .map(|p| parabolicity_margin(&curv.riem[p], &field.values()[p], kind))
        .collect::<Result<_>>()?;
    let (worst_point, margin) =
        margins
            .iter()
            .copied()
            .enumerate()
            .fold(
                (0, f64::INFINITY),
                |best, (i, m)| if m < best.1 { (i, m) } else { best },
            );
    Ok(Monitor {
        margin,
        worst_point,
        max_riem: curv.max_norm(),
        min_eig_g: field.min_eigenvalue().0,
    })
}

/// Monitor values of a state: minimum parabolicity margin, `max |K|` and smallest metric eigenvalue.
pub fn monitor(field: &MetricField, dynamics: &Dynamics, kind: &FlowKind) -> Result<Monitor> {
    monitor_with(field, &dynamics.curvature(field)?, kind)
}

fn row(t: f64, dt: f64, m: &Monitor, kind: &FlowKind) -> DiagnosticRow {
    DiagnosticRow {
        t,
        dt,
        margin: m.margin,
        max_riem: m.max_riem,
        min_eig_g: m.min_eig_g,
        kind: kind.name().to_string(),
        a: kind.coupling(),
    }
}

fn axpy(base: &[SymBilinear3], k: &[SymBilinear3], w: f64) -> Vec<SymBilinear3> {
    base.iter().zip(k).map(|(g, d)| *g + *d * w).collect()
}

fn stage(state: &FlowState, values: Vec<SymBilinear3>, dt: f64) -> Result<MetricField> {
    if values.iter().any(|g| !g.is_finite()) {
        return Err(Error::StageFailure { t: state.t, dt });
    }
    state.field.with_values(values).map_err(|e| match e {
        Error::NotPositiveDefiniteAt { .. } | Error::NotPositiveDefinite { .. } => {
            Error::StageFailure { t: state.t, dt }
        }
        other => other,
    })
}

fn step_from(
    state: &FlowState,
    k1: Vec<SymBilinear3>,
    dt: f64,
    dynamics: &Dynamics,
    kind: &FlowKind,
) -> Result<FlowState> {
    let g = state.field.values();
    let eval = |f: &MetricField| -> Result<Vec<SymBilinear3>> {
        let curv = dynamics.curvature(f).map_err(|e| match e {
            Error::NotPositiveDefiniteAt { .. } | Error::NotPositiveDefinite { .. } => {
                Error::StageFailure { t: state.t, dt }
            }
            other => other,
        })?;
        dynamics.rhs(f, &curv, kind)
    };
    let k2 = eval(&stage(state, axpy(g, &k1, 0.5 * dt), dt)?)?;
    let k3 = eval(&stage(state, axpy(g, &k2, 0.5 * dt), dt)?)?;
    let k4 = eval(&stage(state, axpy(g, &k3, dt), dt)?)?;
    let w = dt / 6.0;
    let next: Vec<SymBilinear3> = (0..g.len())
        .map(|p| g[p] + ((k1[p] + k4[p]) + (k2[p] + k3[p]) * 2.0) * w)
        .collect();
    Ok(FlowState {
        t: state.t + dt,
        field: stage(state, next, dt)?,
    })
}

/// One classical RK4 step. A stage that loses definiteness gives [`Error::StageFailure`].
pub fn step_rk4(
    state: &FlowState,
    dt: f64,
    dynamics: &Dynamics,
    kind: &FlowKind,
) -> Result<FlowState> {
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "time step must be positive, got {dt}"
        )));
    }
    let curv = dynamics.curvature(&state.field)?;
    let k1 = dynamics.rhs(&state.field, &curv, kind)?;
    step_from(state, k1, dt, dynamics, kind)
}

/// Bound `Λ` on the symbol of the right-hand side over the grid, with covectors of unit chart length.
pub fn symbol_bound(field: &MetricField, curv: &CurvatureField, kind: &FlowKind) -> Result<f64> {
    let per_point: Vec<f64> = (0..field.len())
        .into_par_iter()
        .map(|p| {
            let g = &field.values()[p];
            let top = max_symbol_eigenvalue(&curv.riem[p], g, kind)?;
            let inv_max = curv.inverse[p].eigenvalues()[2];
            Ok(top * inv_max)
        })
        .collect::<Result<_>>()?;
    Ok(per_point.into_iter().fold(0.0, f64::max))
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    /// Monitor of the initial state.
    pub initial: DiagnosticRow,
    /// One row per accepted step.
    pub rows: Vec<DiagnosticRow>,
    pub stop: StopReason,
    pub final_state: FlowState,
}

impl Trajectory {
    pub fn steps(&self) -> usize {
        self.rows.len()
    }
}

/// Integrates until one [`StopReason`] applies.
///
/// `observe` sees every accepted state with its diagnostics row, including the
/// initial state. Initial data that is not parabolic is rejected with
/// [`Error::InitialConditionRejected`] unless `controls.force` is set.
pub fn run_with(
    initial: FlowState,
    dynamics: &Dynamics,
    kind: &FlowKind,
    controls: &Controls,
    mut observe: impl FnMut(&FlowState, &DiagnosticRow) -> Result<()>,
) -> Result<Trajectory> {
    controls.validate()?;
    kind.validate()?;
    let h = initial.field.grid().spacing();
    let mut state = initial;
    let mut rows = Vec::new();
    let mut initial_row = None;
    let mut lambda = 1.0;
    let mut last_dt = 0.0;
    let stop = loop {
        let curv = dynamics.curvature(&state.field)?;
        let m = monitor_with(&state.field, &curv, kind)?;
        let r = row(state.t, last_dt, &m, kind);
        observe(&state, &r)?;
        if initial_row.is_none() {
            if m.margin <= controls.eps_par && !controls.force {
                let p = m.worst_point;
                let report = parabolicity(
                    &curv.riem[p],
                    &state.field.values()[p],
                    kind,
                    controls.eps_par,
                )?;
                return Err(Error::InitialConditionRejected {
                    margin: m.margin,
                    point: p,
                    plane: report.plane,
                });
            }
            initial_row = Some(r);
        } else {
            rows.push(r);
        }
        if m.min_eig_g < controls.eps_g {
            break StopReason::MetricDegeneracy;
        }
        if !(m.max_riem <= controls.max_riem) {
            break StopReason::CurvatureBlowUp;
        }
        if m.margin <= controls.eps_par && !controls.force {
            break StopReason::ParabolicityLost;
        }
        let remaining = controls.t_end - state.t;
        if remaining <= 1e-14 * controls.t_end.max(1.0) {
            break StopReason::TEnd;
        }
        if dynamics.is_spatial() && rows.len() % controls.lambda_every == 0 {
            lambda = symbol_bound(&state.field, &curv, kind)?.max(1.0);
        }
        let mut dt = controls.dt0.min(remaining);
        if dynamics.is_spatial() {
            dt = dt.min(controls.cfl * h * h / lambda);
        }
        let k1 = dynamics.rhs(&state.field, &curv, kind)?;
        let next = loop {
            if dt < controls.min_dt {
                break None;
            }
            match step_from(&state, k1.clone(), dt, dynamics, kind) {
                Ok(s) => break Some(s),
                Err(Error::StageFailure { .. }) => dt *= 0.5,
                Err(e) => return Err(e),
            }
        };
        match next {
            Some(mut s) => {
                if dt == remaining {
                    s.t = controls.t_end;
                }
                state = s;
                last_dt = dt;
            }
            None => break StopReason::StepUnderflow,
        }
    };
    Ok(Trajectory {
        initial: initial_row.expect("initial state is always monitored"),
        rows,
        stop,
        final_state: state,
    })
}

pub fn run(
    initial: FlowState,
    dynamics: &Dynamics,
    kind: &FlowKind,
    controls: &Controls,
) -> Result<Trajectory> {
    run_with(initial, dynamics, kind, controls, |_, _| Ok(()))
}

/// Scale factor `(det g / det g0)^{1/3}` of each point of a pointwise constant-curvature state.
pub fn pointwise_scale(field: &MetricField, reference_det: &[f64]) -> Vec<f64> {
    field
        .values()
        .iter()
        .zip(reference_det)
        .map(|(g, d0)| (g.det() / d0).cbrt())
        .collect()
}
