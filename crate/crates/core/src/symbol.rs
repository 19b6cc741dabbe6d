//! Principal symbols of the linearized flow operators.
//!
//! A symbol acts on a symmetric form `h` through its coordinates
//! `(h11, h12, h13, h22, h33, h23)` in a `g`-orthonormal frame whose first
//! vector is dual to the direction `ξ` (normalized to `|ξ| = 1`). With the
//! sign convention used throughout, `−2 DRic` has symbol `+|ξ|² h` plus
//! gauge terms, so ellipticity means eigenvalues with positive real part.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{Complex, Matrix3, Matrix6, Vector3, Vector6};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flows::FlowKind;
use crate::tensor3::{
    curvature_spectrum, normal_rotation, orthonormal_frame, plane_basis, ricci_from_riemann,
    rotate_frame_kill_r23, wedge, Curv3, Frame3, SymBilinear3,
};

/// Default parabolicity threshold: margins at or below it count as failures.
pub const EPS_PAR: f64 = 1e-8;

/// Largest `|R23|` (relative to the Ricci scale) accepted as "rotated".
const FRAME_TOL: f64 = 1e-10;

/// Singular values below this fraction of the largest count as zero.
const KERNEL_RTOL: f64 = 1e-9;

/// A 6×6 principal symbol in the coordinates `(h11, h12, h13, h22, h33, h23)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Symbol6(Matrix6<f64>);

impl Symbol6 {
    pub fn from_matrix(m: Matrix6<f64>) -> Self {
        Self(m)
    }

    pub fn from_rows(rows: [[f64; 6]; 6]) -> Self {
        Self(Matrix6::from_fn(|r, c| rows[r][c]))
    }

    pub fn zero() -> Self {
        Self(Matrix6::zeros())
    }

    pub fn identity() -> Self {
        Self(Matrix6::identity())
    }

    pub fn matrix(&self) -> &Matrix6<f64> {
        &self.0
    }

    /// Entry at zero-based `(row, col)`.
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.0[(row, col)]
    }

    pub fn rows(&self) -> [[f64; 6]; 6] {
        std::array::from_fn(|r| std::array::from_fn(|c| self.0[(r, c)]))
    }

    pub fn apply(&self, h: &SymBilinear3) -> SymBilinear3 {
        SymBilinear3::from_symbol_coords(&(self.0 * h.to_symbol_coords()))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    /// `T S T⁻¹`, the same operator after the coordinate change `T`.
    pub fn conjugate(&self, t: &Matrix6<f64>) -> Self {
        let inv = t
            .try_inverse()
            .expect("coordinate change must be invertible");
        Self(t * self.0 * inv)
    }

    /// Eigenvalues from a general real eigensolver, sorted by real then imaginary part.
    pub fn eigenvalues(&self) -> Vec<Complex<f64>> {
        let mut ev: Vec<Complex<f64>> = self.0.complex_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        ev
    }

    /// Smallest real part over the spectrum.
    pub fn min_real_part(&self) -> f64 {
        self.eigenvalues()
            .iter()
            .map(|z| z.re)
            .fold(f64::INFINITY, f64::min)
    }
}

impl Add for Symbol6 {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self(self.0 + rhs.0)
    }
}

impl Sub for Symbol6 {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self(self.0 - rhs.0)
    }
}

impl Neg for Symbol6 {
    type Output = Self;
    fn neg(self) -> Self {
        Self(-self.0)
    }
}

impl Mul<f64> for Symbol6 {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        Self(self.0 * s)
    }
}

fn check_rotated(ric: &SymBilinear3) -> std::result::Result<(), f64> {
    let r23 = ric.get(1, 2);
    if r23.abs() > FRAME_TOL * ric.max_abs().max(1.0) {
        Err(r23)
    } else {
        Ok(())
    }
}

/// Symbol of `DL` for `L g = −2Ric − a·Riem²`, with Ricci given in a frame
/// where `R23 = 0`. Columns for `h11, h12, h13` vanish.
pub fn linearized_symbol(ric: &SymBilinear3, a: f64) -> Result<Symbol6> {
    check_rotated(ric).map_err(|r23| Error::FrameNotRotated { r23 })?;
    let r = ric.trace();
    let (r11, r12, r13, r22, r33) = (
        ric.get(0, 0),
        ric.get(0, 1),
        ric.get(0, 2),
        ric.get(1, 1),
        ric.get(2, 2),
    );
    let l1 = 1.0 + a * (r - 2.0 * r33);
    let l2 = 1.0 + a * (r - 2.0 * r22);
    let l3 = 1.0 + a * r11;
    Ok(Symbol6::from_rows([
        [0.0, 0.0, 0.0, l1, l2, 0.0],
        [0.0, 0.0, 0.0, 0.0, a * r12, -a * r13],
        [0.0, 0.0, 0.0, a * r13, 0.0, -a * r12],
        [0.0, 0.0, 0.0, l1, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, l2, 0.0],
        [0.0, 0.0, 0.0, 0.0, 0.0, l3],
    ]))
}

/// Symbol of `DL` from frame components of the curvature tensor, before the
/// normal plane is rotated.
pub fn linearized_symbol_unrotated(riem: &Curv3, a: f64) -> Symbol6 {
    let r = |i, j, k, l| riem.component(i, j, k, l);
    let k12 = r(0, 1, 0, 1);
    let k13 = r(0, 2, 0, 2);
    let m = r(0, 1, 0, 2);
    Symbol6::from_rows([
        [
            0.0,
            0.0,
            0.0,
            1.0 + 2.0 * a * k12,
            1.0 + 2.0 * a * k13,
            4.0 * a * m,
        ],
        [0.0, 0.0, 0.0, 0.0, a * r(0, 2, 1, 2), a * r(0, 1, 1, 2)],
        [0.0, 0.0, 0.0, a * r(0, 1, 2, 1), 0.0, a * r(0, 2, 2, 1)],
        [0.0, 0.0, 0.0, 1.0 + 2.0 * a * k12, 0.0, 2.0 * a * m],
        [0.0, 0.0, 0.0, 0.0, 1.0 + 2.0 * a * k13, 2.0 * a * m],
        [0.0, 0.0, 0.0, a * m, a * m, 1.0 + a * (k12 + k13)],
    ])
}

/// Closed-form nonzero eigenvalues `(1+2aγ, 1+2aβ, 1+a(β+γ))` with
/// `β = K(e1, e3)` and `γ = K(e1, e2)`.
pub fn branch_eigenvalues(beta: f64, gamma: f64, a: f64) -> [f64; 3] {
    [
        1.0 + 2.0 * a * gamma,
        1.0 + 2.0 * a * beta,
        1.0 + a * (beta + gamma),
    ]
}

/// Kernel of a symbol, by SVD.
#[derive(Clone, Debug)]
pub struct Kernel {
    pub dim: usize,
    pub basis: Vec<Vector6<f64>>,
    pub singular_values: Vector6<f64>,
}

pub fn kernel_check(s: &Symbol6) -> Kernel {
    let svd = s.0.svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let sv = svd.singular_values;
    let tol = KERNEL_RTOL * sv.max().max(1.0);
    let basis: Vec<Vector6<f64>> = (0..6)
        .filter(|&n| sv[n] <= tol)
        .map(|n| v_t.row(n).transpose())
        .collect();
    Kernel {
        dim: basis.len(),
        basis,
        singular_values: sv,
    }
}

/// Symbol of the linearized Lie-derivative correction `ℒ_V g` with DeTurck's
/// vector field, at the background metric.
pub fn deturck_lie_symbol() -> Symbol6 {
    Symbol6::from_rows([
        [-1.0, 0.0, 0.0, 1.0, 1.0, 0.0],
        [0.0, -1.0, 0.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, -1.0, 0.0, 0.0, 0.0],
        [0.0; 6],
        [0.0; 6],
        [0.0; 6],
    ])
}

/// Symbol of `D(L − ℒ_V)` for `L g = −2Ric − a·Riem²`, rotated frame.
pub fn gauge_fixed_symbol(ric: &SymBilinear3, a: f64) -> Result<Symbol6> {
    Ok(linearized_symbol(ric, a)? - deturck_lie_symbol())
}

/// Symbol of `DH` for `H_ik = R_ij R_k^j`, with Ricci diagonal on `e1⊥`.
/// Upper triangular with diagonal `(0, 0, 0, −R22, −R33, −(R22+R33)/2)`.
///
/// In dimension `n` the same structure holds: `n` zeros, then `−R_kk`, then
/// `−(R_ii + R_kk)/2` for the off-diagonal normal pairs.
pub fn ricci_square_symbol(ric: &SymBilinear3) -> Result<Symbol6> {
    check_rotated(ric).map_err(|r23| Error::FrameNotDiagonalized { r23 })?;
    let (r11, r12, r13, r22, r33) = (
        ric.get(0, 0),
        ric.get(0, 1),
        ric.get(0, 2),
        ric.get(1, 1),
        ric.get(2, 2),
    );
    Ok(Symbol6::from_rows([
        [0.0, 0.0, 0.0, -r11, -r11, 0.0],
        [0.0, 0.0, 0.0, -r12, -0.5 * r12, -0.5 * r13],
        [0.0, 0.0, 0.0, -0.5 * r13, -r13, -0.5 * r12],
        [0.0, 0.0, 0.0, -r22, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, -r33, 0.0],
        [0.0, 0.0, 0.0, 0.0, 0.0, -0.5 * (r22 + r33)],
    ]))
}

/// Symbol of `DH` in any orthonormal frame with `e1` dual to `ξ`:
/// `−½[R1k(δ1i tr h − h1i) + R1i(δ1k tr h − h1k)] − ½[R_k^j(h_ij − δ1i h1j) + R_i^j(h_jk − δ1k h1j)]`.
pub fn ricci_square_symbol_unrotated(ric: &SymBilinear3) -> Symbol6 {
    let rc = ric.to_matrix();
    let act = |h: &Matrix3<f64>| -> Matrix3<f64> {
        let tr = h.trace();
        let d = |i: usize| if i == 0 { 1.0 } else { 0.0 };
        Matrix3::from_fn(|i, k| {
            let first = rc[(0, k)] * (d(i) * tr - h[(0, i)]) + rc[(0, i)] * (d(k) * tr - h[(0, k)]);
            let mut second = 0.0;
            for j in 0..3 {
                second += rc[(k, j)] * (h[(i, j)] - d(i) * h[(0, j)])
                    + rc[(i, j)] * (h[(j, k)] - d(k) * h[(0, j)]);
            }
            -0.5 * (first + second)
        })
    };
    matrix_of(act)
}

/// Matrix of a linear map on symmetric forms, column by column.
fn matrix_of(act: impl Fn(&Matrix3<f64>) -> Matrix3<f64>) -> Symbol6 {
    let mut m = Matrix6::zeros();
    for c in 0..6 {
        let h = SymBilinear3::from_symbol_coords(&Vector6::ith(c, 1.0)).to_matrix();
        let out = SymBilinear3::from_matrix(&act(&h)).to_symbol_coords();
        m.set_column(c, &out);
    }
    Symbol6(m)
}

/// Coordinate change on `(h11, …, h23)` induced by rotating `(e2, e3)` by `alpha`.
pub fn h_rotation(alpha: f64) -> Matrix6<f64> {
    let p = normal_rotation(alpha);
    let mut m = Matrix6::zeros();
    for c in 0..6 {
        let h = SymBilinear3::from_symbol_coords(&Vector6::ith(c, 1.0));
        m.set_column(c, &h.congruence(&p).to_symbol_coords());
    }
    m
}

/// Symbol of `D(L)` for the flow `∂t g = L g`, Ricci given in the rotated frame.
pub fn plain_symbol(kind: &FlowKind, ric: &SymBilinear3) -> Result<Symbol6> {
    Ok(match *kind {
        FlowKind::Ricci => linearized_symbol(ric, 0.0)?,
        FlowKind::Rg2 { a } => linearized_symbol(ric, a)?,
        FlowKind::Rg2Zero { a } => linearized_symbol(ric, a)? - linearized_symbol(ric, 0.0)?,
        FlowKind::SquaredRicci { a } => ricci_square_symbol(ric)? * -a,
        FlowKind::Mixed { a } => linearized_symbol(ric, 0.0)? - ricci_square_symbol(ric)? * a,
    })
}

/// Same as [`plain_symbol`] from frame curvature components, no rotation needed.
pub fn plain_symbol_unrotated(kind: &FlowKind, riem: &Curv3) -> Symbol6 {
    let ric = || {
        ricci_from_riemann(riem, &SymBilinear3::identity()).expect("identity is positive definite")
    };
    match *kind {
        FlowKind::Ricci => linearized_symbol_unrotated(riem, 0.0),
        FlowKind::Rg2 { a } => linearized_symbol_unrotated(riem, a),
        FlowKind::Rg2Zero { a } => {
            linearized_symbol_unrotated(riem, a) - linearized_symbol_unrotated(riem, 0.0)
        }
        FlowKind::SquaredRicci { a } => ricci_square_symbol_unrotated(&ric()) * -a,
        FlowKind::Mixed { a } => {
            linearized_symbol_unrotated(riem, 0.0) - ricci_square_symbol_unrotated(&ric()) * a
        }
    }
}

/// Symbol of `D(L − ℒ_V)`, rotated frame.
pub fn gauge_fixed_kind_symbol(kind: &FlowKind, ric: &SymBilinear3) -> Result<Symbol6> {
    Ok(plain_symbol(kind, ric)? - deturck_lie_symbol())
}

/// Every symbol of one flow at one point and direction.
#[derive(Clone, Debug)]
pub struct PointSymbols {
    pub frame: Frame3,
    pub rotated_frame: Frame3,
    pub alpha: f64,
    pub ricci_frame: SymBilinear3,
    pub ricci_rotated: SymBilinear3,
    pub unrotated: Symbol6,
    pub rotated: Symbol6,
    pub gauge_fixed: Symbol6,
}

/// Builds the frame for `ξ`, rotates it, and assembles the symbols of `kind`.
pub fn point_symbols(
    riem: &Curv3,
    g: &SymBilinear3,
    xi: &Vector3<f64>,
    kind: &FlowKind,
) -> Result<PointSymbols> {
    let frame = orthonormal_frame(g, xi)?;
    symbols_in_frame(riem, g, frame, kind)
}

fn symbols_in_frame(
    riem: &Curv3,
    g: &SymBilinear3,
    frame: Frame3,
    kind: &FlowKind,
) -> Result<PointSymbols> {
    let ric = ricci_from_riemann(riem, g)?;
    let riem_frame = frame.curvature_components(riem);
    let ricci_frame = frame.components(&ric);
    let (rotated_frame, alpha) = rotate_frame_kill_r23(&frame, &ric);
    let mut ricci_rotated = rotated_frame.components(&ric);
    // the rotation leaves rounding-level residue in R'23
    if check_rotated(&ricci_rotated).is_ok() {
        ricci_rotated.set(1, 2, 0.0);
    }
    let rotated = plain_symbol(kind, &ricci_rotated)?;
    Ok(PointSymbols {
        frame,
        rotated_frame,
        alpha,
        ricci_frame,
        ricci_rotated,
        unrotated: plain_symbol_unrotated(kind, &riem_frame),
        rotated,
        gauge_fixed: rotated - deturck_lie_symbol(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    StronglyElliptic,
    WeaklyEllipticWithGaugeKernel,
    NotElliptic,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::StronglyElliptic => "strongly-elliptic",
            Self::WeaklyEllipticWithGaugeKernel => "weakly-elliptic-with-gauge-kernel",
            Self::NotElliptic => "not-elliptic",
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Classifies a symbol by its spectrum.
///
/// Weak ellipticity requires the kernel to be exactly the three gauge
/// directions `h11, h12, h13` and every other eigenvalue to exceed `eps`.
pub fn classify_symbol(s: &Symbol6, eps: f64) -> (Verdict, usize) {
    let kernel = kernel_check(s);
    let ev = s.eigenvalues();
    if ev.iter().all(|z| z.re > eps) {
        return (Verdict::StronglyElliptic, kernel.dim);
    }
    let gauge_annihilated =
        (0..3).all(|c| s.0.column(c).amax() <= KERNEL_RTOL * s.0.amax().max(1.0));
    let positive_rest = ev.iter().filter(|z| z.re > eps).count() == 6 - kernel.dim;
    if kernel.dim == 3 && gauge_annihilated && positive_rest {
        (Verdict::WeaklyEllipticWithGaugeKernel, kernel.dim)
    } else {
        (Verdict::NotElliptic, kernel.dim)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Eigenvalue {
    pub re: f64,
    pub im: f64,
}

/// Parabolicity of one flow at one point.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EllipticityReport {
    pub kind: FlowKind,
    pub a: f64,
    /// Spectrum of the gauge-fixed symbol in the worst direction.
    pub eigenvalues: Vec<Eigenvalue>,
    /// Smallest real part of the gauge-fixed symbol over all directions; see [`parabolicity_margin`].
    pub margin: f64,
    /// Kernel dimension of the plain symbol in the worst direction.
    pub kernel_dim: usize,
    pub verdict: Verdict,
    /// Chart covector `ξ` of the worst direction.
    pub direction: [f64; 3],
    /// Chart 2-vector of the worst plane (for the Ricci-type kinds, the plane of `ξ` and the worst Ricci direction).
    pub plane: [f64; 3],
}

/// Worst-case margin over all directions and the frame realizing it.
struct Worst {
    margin: f64,
    frame: Frame3,
    plane: Vector3<f64>,
}

/// Eigenvalues of `Ric` relative to `g`, ascending, with `g`-orthonormal eigenvectors.
pub fn ricci_eigen(ric: &SymBilinear3, g: &SymBilinear3) -> Result<([f64; 3], [Vector3<f64>; 3])> {
    g.check_positive_definite()?;
    let chol = nalgebra::Cholesky::new(g.to_matrix()).ok_or(Error::NotPositiveDefinite {
        eigenvalue: g.min_eigenvalue(),
    })?;
    let l_inv = chol
        .l()
        .try_inverse()
        .expect("cholesky factor is invertible");
    let m = l_inv * ric.to_matrix() * l_inv.transpose();
    let eig = (0.5 * (m + m.transpose())).symmetric_eigen();
    let mut order = [0usize, 1, 2];
    order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));
    let back = l_inv.transpose();
    Ok((
        order.map(|n| eig.eigenvalues[n]),
        order.map(|n| back * eig.eigenvectors.column(n)),
    ))
}

fn worst_direction(riem: &Curv3, g: &SymBilinear3, kind: &FlowKind) -> Result<Worst> {
    let pick = |lo: f64, hi: f64| if lo <= hi { (lo, 0) } else { (hi, 2) };
    match *kind {
        FlowKind::Ricci => {
            let frame = orthonormal_frame(g, &Vector3::x())?;
            let plane = wedge(frame.vector(0), frame.vector(1));
            Ok(Worst {
                margin: 1.0,
                frame,
                plane,
            })
        }
        FlowKind::Rg2 { a } | FlowKind::Rg2Zero { a } => {
            let spectrum = curvature_spectrum(riem, g)?;
            let (margin, slot) = if matches!(kind, FlowKind::Rg2 { .. }) {
                pick(
                    1.0 + 2.0 * a * spectrum.min(),
                    1.0 + 2.0 * a * spectrum.max(),
                )
            } else {
                pick(a * spectrum.min(), a * spectrum.max())
            };
            let w = spectrum.bivectors[slot];
            let (x, y) = plane_basis(&w);
            Ok(Worst {
                margin,
                frame: Frame3::from_plane(*g, &x, &y)?,
                plane: w,
            })
        }
        FlowKind::SquaredRicci { a } | FlowKind::Mixed { a } => {
            let ric = ricci_from_riemann(riem, g)?;
            let (rho, vecs) = ricci_eigen(&ric, g)?;
            let shift = if matches!(kind, FlowKind::Mixed { .. }) {
                1.0
            } else {
                0.0
            };
            let (margin, slot) = pick(shift + a * rho[0], shift + a * rho[2]);
            let other = 2 - slot;
            let frame = Frame3::from_vectors([vecs[1], vecs[slot], vecs[other]], *g);
            Ok(Worst {
                margin,
                frame,
                plane: wedge(&vecs[1], &vecs[slot]),
            })
        }
    }
}

/// Smallest real part of the gauge-fixed symbol over all unit directions.
///
/// * Ricci: `1`
/// * RG2: `min(1 + 2a·Kmin, 1 + 2a·Kmax)`
/// * RG2zero: `min(a·Kmin, a·Kmax)`, the sign condition; the spectrum itself is `2aK`
/// * squared Ricci: `min(a·ρmin, a·ρmax)`, `ρ` the Ricci eigenvalues
/// * mixed: `min(1 + a·ρmin, 1 + a·ρmax)`
///
/// For the Ricci-type kinds the normal-plane Ricci eigenvalues of a direction
/// range over `[ρmin, ρmax]`, and both ends occur. For the
/// curvature kinds every plane contains some direction, so the extremes over
/// planes are the extremes of `K`.
pub fn parabolicity_margin(riem: &Curv3, g: &SymBilinear3, kind: &FlowKind) -> Result<f64> {
    Ok(worst_direction(riem, g, kind)?.margin)
}

/// Parabolicity verdict for a flow at a point; strongly elliptic iff the margin exceeds `eps_par`.
pub fn parabolicity(
    riem: &Curv3,
    g: &SymBilinear3,
    kind: &FlowKind,
    eps_par: f64,
) -> Result<EllipticityReport> {
    kind.validate()?;
    let worst = worst_direction(riem, g, kind)?;
    let symbols = symbols_in_frame(riem, g, worst.frame, kind)?;
    let xi = worst.frame.first_covector();
    let verdict = if worst.margin > eps_par {
        Verdict::StronglyElliptic
    } else {
        Verdict::NotElliptic
    };
    Ok(EllipticityReport {
        kind: *kind,
        a: kind.coupling(),
        eigenvalues: symbols
            .gauge_fixed
            .eigenvalues()
            .iter()
            .map(|z| Eigenvalue { re: z.re, im: z.im })
            .collect(),
        margin: worst.margin,
        kernel_dim: kernel_check(&symbols.rotated).dim,
        verdict,
        direction: [xi[0], xi[1], xi[2]],
        plane: [worst.plane[0], worst.plane[1], worst.plane[2]],
    })
}

/// Largest eigenvalue modulus of the gauge-fixed symbol over unit directions,
/// bounded through the same extremes as [`parabolicity_margin`].
pub fn max_symbol_eigenvalue(riem: &Curv3, g: &SymBilinear3, kind: &FlowKind) -> Result<f64> {
    let top = |vals: &[f64]| vals.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    Ok(match *kind {
        FlowKind::Ricci => 1.0,
        FlowKind::Rg2 { a } => {
            let s = curvature_spectrum(riem, g)?;
            top(&[1.0 + 2.0 * a * s.min(), 1.0 + 2.0 * a * s.max()])
        }
        FlowKind::Rg2Zero { a } => {
            let s = curvature_spectrum(riem, g)?;
            top(&[2.0 * a * s.min(), 2.0 * a * s.max()])
        }
        FlowKind::SquaredRicci { a } | FlowKind::Mixed { a } => {
            let ric = ricci_from_riemann(riem, g)?;
            let (rho, _) = ricci_eigen(&ric, g)?;
            let shift = if matches!(kind, FlowKind::Mixed { .. }) {
                1.0
            } else {
                0.0
            };
            top(&[shift + a * rho[0], shift + a * rho[2]])
        }
    })
}
