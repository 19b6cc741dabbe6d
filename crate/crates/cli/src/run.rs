//! Run orchestration and output files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;

use rgflow::chart::{read_snapshot, write_snapshot, MetricField};
use rgflow::flows::FlowKind;
use rgflow::integrate::{
    ode_reference, pointwise_scale, run_with, Dynamics, FlowState, StopReason,
};
use rgflow::presets::field_preset;

use crate::config::RunConfig;
use crate::Failure;

pub struct InitialData {
    pub field: MetricField,
    pub dynamics: Dynamics,
    /// `k0` of the pointwise constant-curvature model.
    pub pointwise_curvature: Option<f64>,
    pub source: String,
}

pub fn initial_data(cfg: &RunConfig) -> Result<InitialData, Failure> {
    let chart_dynamics = |field: &MetricField| -> Result<Dynamics, Failure> {
        Ok(if cfg.gauge_fixed {
            Dynamics::gauge_fixed(field)?
        } else {
            Dynamics::Plain
        })
    };
    if let Some(path) = &cfg.snapshot {
        let (field, _) =
            read_snapshot(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
        let dynamics = chart_dynamics(&field)?;
        return Ok(InitialData {
            field,
            dynamics,
            pointwise_curvature: None,
            source: path.display().to_string(),
        });
    }
    let preset = field_preset(&cfg.preset, &cfg.params)?;
    let dynamics = match preset.pointwise_curvature {
        Some(_) => preset.dynamics()?,
        None => chart_dynamics(&preset.field)?,
    };
    Ok(InitialData {
        field: preset.field,
        dynamics,
        pointwise_curvature: preset.pointwise_curvature,
        source: cfg.preset.clone(),
    })
}

#[derive(Debug, Serialize)]
pub struct RunSummary {
    pub stop_reason: StopReason,
    pub t_final: f64,
    pub steps: usize,
    pub wall_ms: u64,
    pub seed: u64,
    pub kind: &'static str,
    pub a: f64,
    pub source: String,
    pub initial_margin: f64,
    pub final_margin: f64,
    pub final_max_riem: f64,
    pub final_min_eig_g: f64,
    pub snapshots: Vec<String>,
    /// Largest relative deviation of the pointwise scale from the reference ODE.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ode_max_rel_error: Option<f64>,
}

impl RunSummary {
    pub fn render(&self, dir: &Path) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "stop: {} at t = {} after {} steps ({} ms)",
            self.stop_reason, self.t_final, self.steps, self.wall_ms
        );
        let _ = writeln!(
            s,
            "margin {:.6e} -> {:.6e}, max |K| {:.6e}, min eig g {:.6e}",
            self.initial_margin, self.final_margin, self.final_max_riem, self.final_min_eig_g
        );
        if let Some(err) = self.ode_max_rel_error {
            let _ = writeln!(s, "max relative error vs reference ODE: {err:.3e}");
        }
        let _ = writeln!(s, "outputs in {}", dir.display());
        s
    }
}

/// ODE reference exists for the Ricci-type quadratic flow only.
fn ode_coupling(kind: &FlowKind) -> Option<f64> {
    match kind {
        FlowKind::Ricci | FlowKind::Rg2 { .. } => Some(kind.coupling()),
        _ => None,
    }
}

fn max_ode_error(k0: f64, a: f64, history: &[(f64, Vec<f64>)]) -> rgflow::Result<f64> {
    let mut worst = 0.0f64;
    for (t, scales) in history.iter().filter(|(t, _)| *t > 0.0) {
        let reference = ode_reference(k0, a, 1.0, *t, 1)?;
        let c = *reference.c.last().expect("reference has samples");
        for s in scales {
            worst = worst.max(((s - c) / c).abs());
        }
    }
    Ok(worst)
}

pub fn execute(cfg: &RunConfig) -> Result<RunSummary, Failure> {
    let init = initial_data(cfg)?;
    let dir = &cfg.out_dir;
    fs::create_dir_all(dir)?;
    fs::write(dir.join("config.ini"), cfg.render())?;
    let mut csv = csv::Writer::from_path(dir.join("diagnostics.csv"))?;
    let reference_det: Vec<f64> = init.field.values().iter().map(|g| g.det()).collect();
    let track_ode = init.pointwise_curvature.is_some() && ode_coupling(&cfg.kind).is_some();
    let mut history = Vec::new();
    let mut snapshots = Vec::new();
    let mut accepted = 0usize;
    let started = Instant::now();
    let result = run_with(
        FlowState::new(init.field),
        &init.dynamics,
        &cfg.kind,
        &cfg.controls,
        |state, row| {
            csv.serialize(row)
                .map_err(|e| std::io::Error::other(e.to_string()))?;
            let periodic = cfg.snapshot_every > 0 && accepted.is_multiple_of(cfg.snapshot_every);
            if accepted == 0 || periodic {
                let name = format!("snapshot_{accepted:06}.json");
                write_snapshot(&dir.join(&name), &state.field, Some(state.t))?;
                snapshots.push(name);
            }
            if track_ode {
                history.push((state.t, pointwise_scale(&state.field, &reference_det)));
            }
            accepted += 1;
            Ok(())
        },
    );
    csv.flush()?;
    let trajectory = result?;
    let wall_ms = started.elapsed().as_millis() as u64;
    let final_state = &trajectory.final_state;
    write_snapshot(
        &dir.join("final.json"),
        &final_state.field,
        Some(final_state.t),
    )?;
    snapshots.push("final.json".into());
    let last = trajectory.rows.last().unwrap_or(&trajectory.initial);
    let ode_max_rel_error = match (init.pointwise_curvature, ode_coupling(&cfg.kind)) {
        (Some(k0), Some(a)) => Some(max_ode_error(k0, a, &history)?),
        _ => None,
    };
    let summary = RunSummary {
        stop_reason: trajectory.stop,
        t_final: final_state.t,
        steps: trajectory.steps(),
        wall_ms,
        seed: cfg.params.seed,
        kind: cfg.kind.name(),
        a: cfg.kind.coupling(),
        source: init.source,
        initial_margin: trajectory.initial.margin,
        final_margin: last.margin,
        final_max_riem: last.max_riem,
        final_min_eig_g: last.min_eig_g,
        snapshots,
        ode_max_rel_error,
    };
    fs::write(
        dir.join("summary.json"),
        serde_json::to_string_pretty(&summary)?,
    )?;
    Ok(summary)
}
