//! Reports for `symbol` and `check`.

use std::fmt::Write as _;

use serde::Serialize;

use rgflow::flows::FlowKind;
use rgflow::integrate::monitor;
use rgflow::presets::PointSample;
use rgflow::symbol::{
    classify_symbol, parabolicity, point_symbols, Eigenvalue, Symbol6, Verdict, EPS_PAR,
};
use rgflow::tensor3::SymBilinear3;

use crate::config::RunConfig;
use crate::run::initial_data;
use crate::Failure;

#[derive(Debug, Serialize)]
pub struct SymbolReport {
    pub kind: &'static str,
    pub a: f64,
    pub xi: [f64; 3],
    /// Kill angle of the normal frame.
    pub alpha: f64,
    pub ricci_frame: [[f64; 3]; 3],
    pub ricci_rotated: [[f64; 3]; 3],
    pub unrotated: [[f64; 6]; 6],
    pub rotated: [[f64; 6]; 6],
    /// Spectrum of the rotated symbol, ascending by real part.
    pub eigenvalues: Vec<Eigenvalue>,
    pub kernel_dim: usize,
    pub verdict: Verdict,
    /// Smallest gauge-fixed eigenvalue over all directions at this point.
    pub margin: f64,
    pub parabolic: bool,
}

fn matrix3(s: &SymBilinear3) -> [[f64; 3]; 3] {
    std::array::from_fn(|i| std::array::from_fn(|j| s.get(i, j)))
}

fn sorted_spectrum(s: &Symbol6) -> Vec<Eigenvalue> {
    let mut ev: Vec<Eigenvalue> = s
        .eigenvalues()
        .iter()
        .map(|z| Eigenvalue { re: z.re, im: z.im })
        .collect();
    ev.sort_by(|p, q| p.re.total_cmp(&q.re));
    ev
}

pub fn symbol_report(sample: &PointSample, kind: &FlowKind) -> Result<SymbolReport, Failure> {
    let riem = sample.riemann()?;
    let ps = point_symbols(&riem, &sample.metric, &sample.xi, kind)?;
    let (verdict, kernel_dim) = classify_symbol(&ps.rotated, EPS_PAR);
    let margin = parabolicity(&riem, &sample.metric, kind, EPS_PAR)?.margin;
    Ok(SymbolReport {
        kind: kind.name(),
        a: kind.coupling(),
        xi: sample.xi.into(),
        alpha: ps.alpha,
        ricci_frame: matrix3(&ps.ricci_frame),
        ricci_rotated: matrix3(&ps.ricci_rotated),
        unrotated: ps.unrotated.rows(),
        rotated: ps.rotated.rows(),
        eigenvalues: sorted_spectrum(&ps.rotated),
        kernel_dim,
        verdict,
        margin,
        parabolic: margin > EPS_PAR,
    })
}

fn write_matrix<const N: usize>(out: &mut String, title: &str, rows: &[[f64; N]; N]) {
    let _ = writeln!(out, "{title}:");
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:>10.6}")).collect();
        let _ = writeln!(out, "  {}", cells.join(" "));
    }
}

impl SymbolReport {
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "flow {} a = {}", self.kind, self.a);
        let _ = writeln!(s, "xi = {:?}", self.xi);
        let _ = writeln!(
            s,
            "alpha = {:.12} ({:.6} pi)",
            self.alpha,
            self.alpha / std::f64::consts::PI
        );
        write_matrix(&mut s, "Ricci in frame", &self.ricci_frame);
        write_matrix(&mut s, "Ricci in rotated frame", &self.ricci_rotated);
        let _ = writeln!(s, "symbol order: h11 h12 h13 h22 h33 h23");
        write_matrix(&mut s, "symbol (unrotated)", &self.unrotated);
        write_matrix(&mut s, "symbol (rotated)", &self.rotated);
        let ev: Vec<String> = self
            .eigenvalues
            .iter()
            .map(|z| {
                if z.im == 0.0 {
                    format!("{:.10}", z.re)
                } else {
                    format!("{:.10}{:+.10}i", z.re, z.im)
                }
            })
            .collect();
        let _ = writeln!(s, "eigenvalues: {}", ev.join(", "));
        let _ = writeln!(s, "kernel dimension: {}", self.kernel_dim);
        let _ = writeln!(s, "verdict: {}", self.verdict);
        let _ = writeln!(s, "parabolicity margin: {:.10}", self.margin);
        s
    }
}

#[derive(Debug, Serialize)]
pub struct CheckReport {
    pub kind: &'static str,
    pub a: f64,
    pub source: String,
    pub points: usize,
    pub margin: f64,
    pub worst_point: usize,
    /// Chart coordinates of the worst point.
    pub worst_position: [f64; 3],
    /// 2-vector of the worst plane at the worst point.
    pub worst_plane: [f64; 3],
    pub worst_direction: [f64; 3],
    pub verdict: Verdict,
    pub parabolic: bool,
}

pub fn check_report(cfg: &RunConfig) -> Result<CheckReport, Failure> {
    let init = initial_data(cfg)?;
    let m = monitor(&init.field, &init.dynamics, &cfg.kind)?;
    let curv = init.dynamics.curvature(&init.field)?;
    let p = m.worst_point;
    let worst = parabolicity(
        &curv.riem[p],
        &init.field.values()[p],
        &cfg.kind,
        cfg.controls.eps_par,
    )?;
    let parabolic = m.margin > cfg.controls.eps_par;
    Ok(CheckReport {
        kind: cfg.kind.name(),
        a: cfg.kind.coupling(),
        source: init.source,
        points: init.field.len(),
        margin: m.margin,
        worst_point: p,
        worst_position: init.field.grid().point(p),
        worst_plane: worst.plane,
        worst_direction: worst.direction,
        verdict: if parabolic {
            Verdict::StronglyElliptic
        } else {
            Verdict::NotElliptic
        },
        parabolic,
    })
}

impl CheckReport {
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "flow {} a = {} on {} ({} points)",
            self.kind, self.a, self.source, self.points
        );
        let _ = writeln!(s, "global margin: {:.10}", self.margin);
        let _ = writeln!(
            s,
            "worst point: {} at {:?}",
            self.worst_point, self.worst_position
        );
        let _ = writeln!(s, "worst plane: {:?}", self.worst_plane);
        let _ = writeln!(
            s,
            "verdict: {}",
            if self.parabolic {
                "parabolic"
            } else {
                "not parabolic"
            }
        );
        s
    }
}
