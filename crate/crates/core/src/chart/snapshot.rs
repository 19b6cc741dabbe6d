use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Grid, MetricField, PERIOD};
use crate::error::{Error, Result};
use crate::tensor3::SymBilinear3;

/// Component order of snapshot arrays; matches the packed storage of [`SymBilinear3`].
pub const COMPONENT_NAMES: [&str; 6] = ["g11", "g12", "g13", "g22", "g23", "g33"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotGrid {
    pub dim: usize,
    pub n: usize,
    pub period: f64,
}

/// On-disk form of a metric field: one row-major array per component.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub grid: SnapshotGrid,
    pub chart: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time: Option<f64>,
    pub components: Vec<String>,
    pub data: Vec<Vec<f64>>,
}

impl Snapshot {
    pub fn from_field(field: &MetricField, time: Option<f64>) -> Self {
        let grid = field.grid();
        Self {
            grid: SnapshotGrid {
                dim: grid.dim(),
                n: grid.n(),
                period: PERIOD,
            },
            chart: field.chart().to_string(),
            time,
            components: COMPONENT_NAMES.iter().map(|s| s.to_string()).collect(),
            data: (0..6)
                .map(|c| field.values().iter().map(|g| g.0[c]).collect())
                .collect(),
        }
    }

    pub fn to_field(&self) -> Result<MetricField> {
        if self
            .components
            .iter()
            .map(String::as_str)
            .ne(COMPONENT_NAMES)
        {
            return Err(Error::Snapshot(format!(
                "component order must be {COMPONENT_NAMES:?}, got {:?}",
                self.components
            )));
        }
        if self.grid.period != PERIOD {
            return Err(Error::Snapshot(format!(
                "period must be 2π, got {}",
                self.grid.period
            )));
        }
        let grid = Grid::new(self.grid.dim, self.grid.n)?;
        if self.data.len() != 6 || self.data.iter().any(|c| c.len() != grid.len()) {
            return Err(Error::Snapshot(format!(
                "expected 6 arrays of {} values",
                grid.len()
            )));
        }
        let values = (0..grid.len())
            .map(|i| SymBilinear3(std::array::from_fn(|c| self.data[c][i])))
            .collect();
        MetricField::new(grid, self.chart.clone(), values)
    }
}

pub fn write_snapshot(path: &Path, field: &MetricField, time: Option<f64>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer(&mut w, &field.to_snapshot(time))?;
    w.flush()?;
    Ok(())
}

/// Reads a snapshot; returns the field and its time stamp, if any.
pub fn read_snapshot(path: &Path) -> Result<(MetricField, Option<f64>)> {
    let snap: Snapshot = serde_json::from_reader(BufReader::new(File::open(path)?))?;
    Ok((snap.to_field()?, snap.time))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bit_exact() {
        let grid = Grid::new(3, 6).unwrap();
        let field = MetricField::from_fn(grid, "wobble", |x| {
            let s = (x[0] + 2.0 * x[1] - x[2]).sin() / 7.0;
            SymBilinear3::new([
                1.0 + s,
                s / 3.0,
                0.1,
                1.0 / 3.0 + 1.0,
                -s * 1e-7,
                std::f64::consts::E,
            ])
        })
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("snap.json");
        write_snapshot(&path, &field, Some(0.125)).unwrap();
        let (back, t) = read_snapshot(&path).unwrap();
        assert_eq!(t, Some(0.125));
        assert_eq!(back, field);
        for (a, b) in back.values().iter().zip(field.values()) {
            for c in 0..6 {
                assert_eq!(a.0[c].to_bits(), b.0[c].to_bits());
            }
        }
    }

    #[test]
    fn rejects_wrong_component_order() {
        let field =
            MetricField::constant(Grid::one_d(8).unwrap(), SymBilinear3::identity()).unwrap();
        let mut snap = field.to_snapshot(None);
        snap.components.swap(4, 5);
        assert!(matches!(snap.to_field(), Err(Error::Snapshot(_))));
    }
}
