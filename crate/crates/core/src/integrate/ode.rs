use serde::Serialize;

use crate::error::{Error, Result};

/// Samples of the scale factor `c(t)` for `g(t) = c(t) g0` with `g0` of constant
/// sectional curvature `k0`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScaleTrajectory {
    pub t: Vec<f64>,
    pub c: Vec<f64>,
    /// Time at which `c` reaches zero, if it does before the last sample.
    pub extinction: Option<f64>,
}

/// `ċ` for RG2 on constant-curvature data: `−4k0 − 4a k0²/c`.
pub fn scale_rate(k0: f64, a: f64, c: f64) -> f64 {
    -4.0 * k0 - 4.0 * a * k0 * k0 / c
}

const TOL: f64 = 1e-12;

// Dormand-Prince 5(4) tableau
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// One Dormand-Prince step; `None` if a stage leaves `c > 0`.
fn dp_step(f: &impl Fn(f64) -> f64, c: f64, h: f64) -> Option<(f64, f64)> {
    let mut k = [0.0; 7];
    for s in 0..7 {
        let y = c + h * (0..s).map(|j| A[s][j] * k[j]).sum::<f64>();
        if !(y > 0.0) {
            return None;
        }
        k[s] = f(y);
    }
    let hi = c + h * (0..7).map(|j| B5[j] * k[j]).sum::<f64>();
    let lo = c + h * (0..7).map(|j| B4[j] * k[j]).sum::<f64>();
    Some((hi, (hi - lo).abs()))
}

/// Adaptive solve of `ċ = −4k0 − 4a k0²/c`, `c(0) = c0`, sampled at
/// `samples + 1` equally spaced times in `[0, t_end]`.
///
/// Steps land exactly on the sample times. If `c` reaches zero the
/// trajectory stops there and the extinction time is reported.
pub fn ode_reference(
    k0: f64,
    a: f64,
    c0: f64,
    t_end: f64,
    samples: usize,
) -> Result<ScaleTrajectory> {
    if !(c0 > 0.0) || !c0.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "initial scale must be positive, got {c0}"
        )));
    }
    if !(t_end >= 0.0) || samples == 0 || !k0.is_finite() || !a.is_finite() {
        return Err(Error::InvalidArgument(
            "need t_end ≥ 0, at least one sample and finite k0, a".into(),
        ));
    }
    let f = |c: f64| scale_rate(k0, a, c);
    let mut out = ScaleTrajectory {
        t: vec![0.0],
        c: vec![c0],
        extinction: None,
    };
    let (mut t, mut c) = (0.0f64, c0);
    let mut h = (t_end / samples as f64).max(f64::MIN_POSITIVE);
    for i in 1..=samples {
        let target = t_end * i as f64 / samples as f64;
        while t < target {
            let last = h >= target - t;
            let step = if last { target - t } else { h };
            let min_step = 1e-15 * t_end.max(1e-300);
            match dp_step(&f, c, step) {
                Some((next, err)) if err <= TOL * c.abs().max(next.abs()).max(1e-3) => {
                    t = if last { target } else { t + step };
                    c = next;
                    let grow = if err == 0.0 {
                        5.0
                    } else {
                        (0.9 * (TOL * c.max(1e-3) / err).powf(0.2)).clamp(0.2, 5.0)
                    };
                    h = step * grow;
                }
                Some((_, err)) => {
                    h = step * (0.9 * (TOL * c.max(1e-3) / err).powf(0.2)).clamp(0.1, 0.9);
                }
                None => h = step * 0.25,
            }
            if h < min_step {
                out.extinction = Some(t);
                return Ok(out);
            }
        }
        out.t.push(target);
        out.c.push(c);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ricci_limit_is_linear() {
        let tr = ode_reference(1.0, 0.0, 1.0, 0.2, 20).unwrap();
        for (t, c) in tr.t.iter().zip(&tr.c) {
            assert!((c - (1.0 - 4.0 * t)).abs() < 1e-13);
        }
        assert!(tr.extinction.is_none());
    }

    #[test]
    fn sphere_goes_extinct_at_quarter() {
        let tr = ode_reference(1.0, 0.0, 1.0, 0.3, 3).unwrap();
        let te = tr.extinction.unwrap();
        assert!((te - 0.25).abs() < 1e-6, "{te}");
        assert_eq!(tr.t.len(), 3);
    }

    #[test]
    fn flat_scale_is_constant() {
        let tr = ode_reference(0.0, 0.7, 2.5, 1.0, 10).unwrap();
        assert!(tr.c.iter().all(|&c| c == 2.5));
    }

    #[test]
    fn positive_coupling_shrinks_faster() {
        let base = ode_reference(1.0, 0.0, 1.0, 0.1, 10).unwrap();
        let rg2 = ode_reference(1.0, 0.2, 1.0, 0.1, 10).unwrap();
        for i in 1..base.c.len() {
            assert!(rg2.c[i] < base.c[i]);
        }
    }

    #[test]
    fn matches_implicit_solution() {
        // t(c) = ∫_c^{c0} dc / (4k0 + 4ak0²/c) in closed form
        let (k0, a, c0) = (-1.0, 0.4, 1.0);
        let time_of = |c: f64| {
            let b = a * k0;
            ((c0 - c) - b * ((c0 + b) / (c + b)).ln()) / (4.0 * k0)
        };
        let tr = ode_reference(k0, a, c0, 0.1, 10).unwrap();
        for (t, c) in tr.t.iter().zip(&tr.c) {
            assert!((time_of(*c) - t).abs() < 1e-12, "{t}: {}", time_of(*c));
        }
    }

    #[test]
    fn rejects_bad_scale() {
        assert!(ode_reference(1.0, 0.0, 0.0, 1.0, 4).is_err());
    }
}
