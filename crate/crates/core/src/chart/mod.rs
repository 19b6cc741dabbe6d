//! Metric fields on periodic charts and their curvature by finite differences.

mod grid;
mod kernel;
mod snapshot;

pub use grid::{diff1, diff2, gradient, Grid, Linear, MAX_N_3D, PERIOD};
pub use kernel::{
    curvature_from_jet, ensure_sign_convention, sign_self_check, space_form_jet, Christoffel,
    MetricJet, PointCurvature,
};
pub use snapshot::{read_snapshot, write_snapshot, Snapshot, SnapshotGrid, COMPONENT_NAMES};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::flows::{self, Background, FlowKind};
use crate::tensor3::{curvature_spectrum, ricci_with_inverse, Curv3, SymBilinear3};

/// A metric sampled on a periodic grid.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricField {
    grid: Grid,
    chart: String,
    values: Vec<SymBilinear3>,
}

impl MetricField {
    /// Checks the length and that every value is positive definite.
    pub fn new(grid: Grid, chart: impl Into<String>, values: Vec<SymBilinear3>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        check_definite(&values)?;
        Ok(Self {
            grid,
            chart: chart.into(),
            values,
        })
    }

    pub fn from_fn(
        grid: Grid,
        chart: impl Into<String>,
        f: impl Fn([f64; 3]) -> SymBilinear3 + Sync,
    ) -> Result<Self> {
        let values = (0..grid.len())
            .into_par_iter()
            .map(|i| f(grid.point(i)))
            .collect();
        Self::new(grid, chart, values)
    }

    pub fn constant(grid: Grid, g: SymBilinear3) -> Result<Self> {
        Self::new(grid, "constant", vec![g; grid.len()])
    }

    /// Same grid and chart name, new values.
    pub fn with_values(&self, values: Vec<SymBilinear3>) -> Result<Self> {
        Self::new(self.grid, self.chart.clone(), values)
    }

    pub fn with_chart(mut self, chart: impl Into<String>) -> Self {
        self.chart = chart.into();
        self
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn chart(&self) -> &str {
        &self.chart
    }

    pub fn values(&self) -> &[SymBilinear3] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Smallest metric eigenvalue over the grid and where it occurs.
    pub fn min_eigenvalue(&self) -> (f64, usize) {
        self.values
            .iter()
            .enumerate()
            .map(|(i, g)| (g.min_eigenvalue(), i))
            .fold(
                (f64::INFINITY, 0),
                |best, cur| if cur.0 < best.0 { cur } else { best },
            )
    }

    /// Per-point jets from fourth-order stencils. Mixed partials nest first derivatives.
    pub fn jets(&self) -> Vec<MetricJet> {
        let grid = &self.grid;
        let dg = gradient(grid, &self.values);
        let mut ddg: [[Option<Vec<SymBilinear3>>; 3]; 3] = Default::default();
        for a in 0..3 {
            ddg[a][a] = Some(diff2(grid, &self.values, a));
            for b in a + 1..3 {
                ddg[a][b] = Some(diff1(grid, &dg[a], b));
            }
        }
        let pick = |a: usize, b: usize| ddg[a.min(b)][a.max(b)].as_ref().expect("filled above");
        (0..self.len())
            .map(|i| MetricJet {
                g: self.values[i],
                dg: std::array::from_fn(|a| dg[a][i]),
                ddg: std::array::from_fn(|a| std::array::from_fn(|b| pick(a, b)[i])),
            })
            .collect()
    }

    pub fn to_snapshot(&self, time: Option<f64>) -> Snapshot {
        Snapshot::from_field(self, time)
    }
}

pub(crate) fn check_definite(values: &[SymBilinear3]) -> Result<()> {
    let bad = values
        .par_iter()
        .enumerate()
        .map(|(i, g)| (i, g.min_eigenvalue()))
        .find_first(|(_, e)| !(*e > 0.0));
    match bad {
        Some((index, eigenvalue)) => Err(Error::NotPositiveDefiniteAt { index, eigenvalue }),
        None => Ok(()),
    }
}

/// Per-point Levi-Civita connection and curvature of a metric field.
#[derive(Clone, Debug)]
pub struct CurvatureField {
    pub inverse: Vec<SymBilinear3>,
    pub christoffel: Vec<Christoffel>,
    pub riem: Vec<Curv3>,
    pub ricci: Vec<SymBilinear3>,
    pub scalar: Vec<f64>,
    /// `(Kmin, Kmax)` over planes at each point.
    pub extrema: Vec<(f64, f64)>,
}

impl CurvatureField {
    pub fn len(&self) -> usize {
        self.riem.len()
    }

    pub fn is_empty(&self) -> bool {
        self.riem.is_empty()
    }

    /// Largest `|K|` over the grid.
    pub fn max_norm(&self) -> f64 {
        self.extrema
            .iter()
            .fold(0.0, |m, &(lo, hi)| m.max(lo.abs()).max(hi.abs()))
    }
}

pub fn christoffel(field: &MetricField) -> Result<Vec<Christoffel>> {
    Ok(curvature(field)?.christoffel)
}

pub fn curvature(field: &MetricField) -> Result<CurvatureField> {
    ensure_sign_convention()?;
    let jets = field.jets();
    let points: Vec<(PointCurvature, SymBilinear3, (f64, f64))> = jets
        .par_iter()
        .enumerate()
        .map(|(i, jet)| {
            let pc = curvature_from_jet(jet).map_err(|e| at_point(e, i))?;
            let ric = ricci_with_inverse(&pc.riem, &pc.inverse);
            let spectrum = curvature_spectrum(&pc.riem, &jet.g).map_err(|e| at_point(e, i))?;
            Ok((pc, ric, (spectrum.min(), spectrum.max())))
        })
        .collect::<Result<_>>()?;
    let mut out = CurvatureField {
        inverse: Vec::with_capacity(points.len()),
        christoffel: Vec::with_capacity(points.len()),
        riem: Vec::with_capacity(points.len()),
        ricci: Vec::with_capacity(points.len()),
        scalar: Vec::with_capacity(points.len()),
        extrema: Vec::with_capacity(points.len()),
    };
    for (pc, ric, ext) in points {
        out.scalar.push(ric.contract(&pc.inverse));
        out.inverse.push(pc.inverse);
        out.christoffel.push(pc.christoffel);
        out.riem.push(pc.riem);
        out.ricci.push(ric);
        out.extrema.push(ext);
    }
    Ok(out)
}

fn at_point(e: Error, index: usize) -> Error {
    match e {
        Error::NotPositiveDefinite { eigenvalue } => {
            Error::NotPositiveDefiniteAt { index, eigenvalue }
        }
        other => other,
    }
}

/// `∇_a T_ij = ∂_a T_ij − Γ^r_ai T_rj − Γ^r_aj T_ir` for a symmetric 2-tensor field.
pub fn covariant_derivative_sym2(
    field: &MetricField,
    curv: &CurvatureField,
    t: &[SymBilinear3],
) -> Result<Vec<[SymBilinear3; 3]>> {
    if t.len() != field.len() || curv.len() != field.len() {
        return Err(Error::GridMismatch(
            "tensor field length differs from the metric grid".into(),
        ));
    }
    let dt = gradient(field.grid(), t);
    Ok((0..field.len())
        .into_par_iter()
        .map(|p| {
            let gam = &curv.christoffel[p];
            std::array::from_fn(|a| {
                let mut out = dt[a][p];
                for i in 0..3 {
                    for j in i..3 {
                        let mut corr = 0.0;
                        for r in 0..3 {
                            corr += gam.get(r, a, i) * t[p].get(r, j)
                                + gam.get(r, a, j) * t[p].get(i, r);
                        }
                        out.set(i, j, out.get(i, j) - corr);
                    }
                }
                out
            })
        })
        .collect())
}

fn perturbed(field: &MetricField, h: &[SymBilinear3], s: f64) -> Result<MetricField> {
    let values = field
        .values()
        .iter()
        .zip(h)
        .map(|(g, dh)| *g + *dh * s)
        .collect();
    field.with_values(values).map_err(|e| match e {
        Error::NotPositiveDefiniteAt { .. } => Error::StepTooLarge { step: s },
        other => other,
    })
}

fn central_difference(
    field: &MetricField,
    h: &[SymBilinear3],
    s: f64,
    op: impl Fn(&MetricField) -> Result<Vec<SymBilinear3>>,
) -> Result<Vec<SymBilinear3>> {
    if h.len() != field.len() {
        return Err(Error::GridMismatch(
            "perturbation length differs from the metric grid".into(),
        ));
    }
    if !(s > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "linearization step must be positive, got {s}"
        )));
    }
    let plus = op(&perturbed(field, h, s)?)?;
    let minus = op(&perturbed(field, h, -s)?)?;
    let w = 0.5 / s;
    Ok(plus
        .iter()
        .zip(&minus)
        .map(|(p, m)| (*p - *m) * w)
        .collect())
}

/// `DL_g(h) ≈ (L(g + sh) − L(g − sh)) / 2s` for the flow's right-hand side.
pub fn linearize_flow(
    field: &MetricField,
    h: &[SymBilinear3],
    kind: &FlowKind,
    s: f64,
) -> Result<Vec<SymBilinear3>> {
    central_difference(field, h, s, |f| flows::rhs(f, &curvature(f)?, kind))
}

/// Same for the gauge-fixed right-hand side, linearized at `g = g0`.
pub fn linearize_flow_gauge_fixed(
    field: &MetricField,
    h: &[SymBilinear3],
    kind: &FlowKind,
    s: f64,
) -> Result<Vec<SymBilinear3>> {
    let background = Background::new(field.clone())?;
    central_difference(field, h, s, |f| {
        flows::rhs_gauge_fixed(f, &curvature(f)?, kind, &background)
    })
}
