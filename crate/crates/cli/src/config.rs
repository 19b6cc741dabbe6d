//! `key = value` configuration with `[section]` headers.

use std::fmt::Write as _;
use std::path::PathBuf;

use rgflow::flows::FlowKind;
use rgflow::integrate::Controls;
use rgflow::presets::PresetParams;

use crate::Failure;

/// Everything a `run` needs.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub kind: FlowKind,
    /// Add DeTurck's term; ignored for pointwise presets.
    pub gauge_fixed: bool,
    pub preset: String,
    /// Initial metric from a snapshot file instead of a preset.
    pub snapshot: Option<PathBuf>,
    pub params: PresetParams,
    pub controls: Controls,
    pub out_dir: PathBuf,
    /// Accepted steps between snapshots; 0 writes only the first and last.
    pub snapshot_every: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            kind: FlowKind::Rg2 { a: 0.01 },
            gauge_fixed: true,
            preset: "flat-perturbed-1d".into(),
            snapshot: None,
            params: PresetParams::default(),
            controls: Controls {
                dt0: 1e-2,
                t_end: 0.5,
                ..Controls::default()
            },
            out_dir: PathBuf::from("rgflow-out"),
            snapshot_every: 0,
        }
    }
}

fn bad(line: usize, key: &str, msg: impl std::fmt::Display) -> Failure {
    Failure::usage(format!("config line {line}, field '{key}': {msg}"))
}

fn number<T: std::str::FromStr>(line: usize, key: &str, value: &str) -> Result<T, Failure> {
    value
        .parse()
        .map_err(|_| bad(line, key, format!("cannot parse '{value}'")))
}

fn boolean(line: usize, key: &str, value: &str) -> Result<bool, Failure> {
    match value {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(bad(
            line,
            key,
            format!("expected true or false, got '{value}'"),
        )),
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, Failure> {
        let mut cfg = Self::default();
        let mut section = String::new();
        let mut kind_name: Option<(usize, String)> = None;
        let mut coupling: Option<f64> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(name) = content.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
                section = name.trim().to_string();
                if !["flow", "geometry", "time", "thresholds", "output"].contains(&section.as_str())
                {
                    return Err(Failure::usage(format!(
                        "config line {line}: unknown section [{section}]"
                    )));
                }
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| {
                    Failure::usage(format!(
                        "config line {line}: expected 'key = value', got '{content}'"
                    ))
                })?;
            let c = &mut cfg.controls;
            let p = &mut cfg.params;
            match (section.as_str(), key) {
                ("flow", "kind") => kind_name = Some((line, value.to_string())),
                ("flow", "a") => coupling = Some(number(line, key, value)?),
                ("flow", "gauge") => {
                    cfg.gauge_fixed = match value {
                        "deturck" => true,
                        "none" => false,
                        _ => return Err(bad(line, key, "expected 'deturck' or 'none'")),
                    }
                }
                ("geometry", "preset") => cfg.preset = value.to_string(),
                ("geometry", "snapshot") => cfg.snapshot = Some(PathBuf::from(value)),
                ("geometry", "n") => p.n = number(line, key, value)?,
                ("geometry", "seed") => p.seed = number(line, key, value)?,
                ("geometry", "amplitude") => p.amplitude = number(line, key, value)?,
                ("geometry", "curvature") => p.curvature = number(line, key, value)?,
                ("time", "dt0") => c.dt0 = number(line, key, value)?,
                ("time", "t_end") => c.t_end = number(line, key, value)?,
                ("time", "cfl") => c.cfl = number(line, key, value)?,
                ("time", "lambda_every") => c.lambda_every = number(line, key, value)?,
                ("thresholds", "eps_par") => c.eps_par = number(line, key, value)?,
                ("thresholds", "max_riem") => c.max_riem = number(line, key, value)?,
                ("thresholds", "eps_g") => c.eps_g = number(line, key, value)?,
                ("thresholds", "min_dt") => c.min_dt = number(line, key, value)?,
                ("thresholds", "force") => c.force = boolean(line, key, value)?,
                ("output", "dir") => cfg.out_dir = PathBuf::from(value),
                ("output", "snapshot_every") => cfg.snapshot_every = number(line, key, value)?,
                ("", _) => return Err(bad(line, key, "appears before any [section]")),
                (s, _) => return Err(bad(line, key, format!("unknown key in [{s}]"))),
            }
        }
        let a = coupling.unwrap_or(cfg.kind.coupling());
        cfg.kind = match kind_name {
            Some((line, name)) => {
                FlowKind::from_name(&name, a).map_err(|e| bad(line, "kind", e))?
            }
            None => FlowKind::from_name(cfg.kind.name(), a).map_err(Failure::from)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), Failure> {
        self.controls
            .validate()
            .map_err(|e| Failure::usage(e.to_string()))?;
        self.kind
            .validate()
            .map_err(|e| Failure::usage(e.to_string()))?;
        if self.params.n < 5 {
            return Err(Failure::usage(format!(
                "geometry n must be at least 5, got {}",
                self.params.n
            )));
        }
        if !(self.params.amplitude.is_finite() && self.params.curvature.is_finite()) {
            return Err(Failure::usage(
                "geometry amplitude and curvature must be finite",
            ));
        }
        Ok(())
    }

    /// The resolved configuration in the input format.
    pub fn render(&self) -> String {
        let c = &self.controls;
        let p = &self.params;
        let mut s = String::new();
        let _ = writeln!(
            s,
            "[flow]\nkind = {}\na = {:?}",
            self.kind.name(),
            self.kind.coupling()
        );
        let _ = writeln!(
            s,
            "gauge = {}",
            if self.gauge_fixed { "deturck" } else { "none" }
        );
        let _ = writeln!(s, "\n[geometry]\npreset = {}", self.preset);
        if let Some(path) = &self.snapshot {
            let _ = writeln!(s, "snapshot = {}", path.display());
        }
        let _ = writeln!(
            s,
            "n = {}\nseed = {}\namplitude = {:?}\ncurvature = {:?}",
            p.n, p.seed, p.amplitude, p.curvature
        );
        let _ = writeln!(
            s,
            "\n[time]\ndt0 = {:?}\nt_end = {:?}\ncfl = {:?}\nlambda_every = {}",
            c.dt0, c.t_end, c.cfl, c.lambda_every
        );
        let _ = writeln!(
            s,
            "\n[thresholds]\neps_par = {:?}\nmax_riem = {:?}\neps_g = {:?}\nmin_dt = {:?}\nforce = {}",
            c.eps_par, c.max_riem, c.eps_g, c.min_dt, c.force
        );
        let _ = writeln!(
            s,
            "\n[output]\ndir = {}\nsnapshot_every = {}",
            self.out_dir.display(),
            self.snapshot_every
        );
        s
    }
}
