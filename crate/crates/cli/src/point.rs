//! Point-data files for `symbol`.
//!
//! ```text
//! # metric and ricci use the order g11 g12 g13 g22 g23 g33
//! metric = 1 0 0 1 0 1
//! ricci = 0 0 0 5 2 1
//! xi = 1 0 0
//! kind = rg2
//! a = 0.1
//! ```
//!
//! `curvature = k` replaces `ricci` with constant sectional curvature `k`.

use nalgebra::Vector3;
use rgflow::flows::FlowKind;
use rgflow::presets::PointSample;
use rgflow::tensor3::SymBilinear3;

use crate::Failure;

#[derive(Clone, Debug, PartialEq)]
pub struct PointFile {
    pub sample: PointSample,
    pub kind: Option<String>,
    pub a: Option<f64>,
}

fn numbers<const N: usize>(line: usize, key: &str, value: &str) -> Result<[f64; N], Failure> {
    let parsed: Vec<f64> = value
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| field_error(line, key, format!("cannot parse '{value}'")))?;
    parsed.try_into().map_err(|v: Vec<f64>| {
        field_error(line, key, format!("expected {N} numbers, got {}", v.len()))
    })
}

fn field_error(line: usize, key: &str, msg: impl std::fmt::Display) -> Failure {
    Failure::usage(format!("point file line {line}, field '{key}': {msg}"))
}

pub fn parse_point_file(text: &str) -> Result<PointFile, Failure> {
    let mut metric = None;
    let mut ricci = None;
    let mut curvature = None;
    let mut xi = None;
    let mut kind = None;
    let mut a = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim()))
            .ok_or_else(|| {
                Failure::usage(format!("point file line {line}: expected 'key = value'"))
            })?;
        match key {
            "metric" => metric = Some((line, numbers::<6>(line, key, value)?)),
            "ricci" => ricci = Some(numbers::<6>(line, key, value)?),
            "curvature" => curvature = Some(numbers::<1>(line, key, value)?[0]),
            "xi" => xi = Some((line, numbers::<3>(line, key, value)?)),
            "kind" => kind = Some(value.to_string()),
            "a" => a = Some(numbers::<1>(line, key, value)?[0]),
            _ => return Err(field_error(line, key, "unknown field")),
        }
    }
    let (metric_line, metric) = match metric {
        Some((line, m)) => (line, SymBilinear3(m)),
        None => (0, SymBilinear3::identity()),
    };
    let ricci = match (ricci, curvature) {
        (Some(_), Some(_)) => {
            return Err(Failure::usage(
                "point file: give either 'ricci' or 'curvature', not both",
            ))
        }
        (Some(r), None) => SymBilinear3(r),
        (None, Some(k)) => metric * (2.0 * k),
        (None, None) => {
            return Err(Failure::usage(
                "point file: missing field 'ricci' (or 'curvature')",
            ))
        }
    };
    let (xi_line, xi) = xi.map_or((0, Vector3::x()), |(l, v)| (l, Vector3::from(v)));
    if xi.norm() == 0.0 {
        return Err(field_error(xi_line, "xi", "covector is zero"));
    }
    let sample =
        PointSample::new(metric, ricci, xi).map_err(|e| field_error(metric_line, "metric", e))?;
    Ok(PointFile { sample, kind, a })
}

impl PointFile {
    /// Command-line values win over the file.
    pub fn flow_kind(&self, kind: Option<&str>, a: Option<f64>) -> Result<FlowKind, Failure> {
        let name = kind.or(self.kind.as_deref()).unwrap_or("rg2");
        Ok(FlowKind::from_name(name, a.or(self.a).unwrap_or(0.0))?)
    }
}
