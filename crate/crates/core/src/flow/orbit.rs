//! Symmetric periodic orbits by reversible shooting from `Fix(ρ) = {v₂ = 0, u₁ = 0}`.

use super::integrator::{integrate, Tolerances};
use super::section::{scan, CrossingEvent, Orientation, ScanLimits, Section, TRANSVERSALITY_FLOOR};
use crate::convexity::{
    boundary_radius, fiber_offset, fiber_shift, hill_region_test, momentum_magnitude,
};
use crate::dynamics::{regularized_hamiltonian, Params, RegPoint};
use crate::error::{Error, Result};

/// Default target for `|u₁|` at the half-orbit crossing.
pub const SHOOTING_TOLERANCE: f64 = 1e-10;
/// Longest regularized time allowed for a half orbit or a return.
pub const HALF_ORBIT_TIME_CAP: f64 = 1e3;
/// Finite-difference step on the section coordinates `(v₁, u₁)`.
pub const MONODROMY_STEP: f64 = 1e-7;

const MAX_SHOOTING_ITERATIONS: usize = 200;
const BRACKET_SCAN_POINTS: usize = 64;

/// Sign of `u₂` at launch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Branch {
    #[default]
    Upper,
    Lower,
}

impl Branch {
    fn sign(self) -> f64 {
        match self {
            Branch::Upper => 1.0,
            Branch::Lower => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodicOrbit {
    /// Launch point on `Fix(ρ)`.
    pub z0: RegPoint<f64>,
    pub period: f64,
    /// `|flow_period(z0) - z0|`.
    pub closure_error: f64,
    /// Trace of the linearized return map to `{v₂ = 0}` in `(v₁, u₁)`.
    pub return_trace: f64,
}

/// `((v₁, 0), (0, u₂))` on `{K = 0}`, or `None` outside the earth Hill component.
pub fn launch_point(
    params: &Params<f64>,
    v1: f64,
    branch: Branch,
) -> Result<Option<RegPoint<f64>>> {
    let v = [v1, 0.0];
    if !hill_region_test(params, v)? {
        return Ok(None);
    }
    let u2 = momentum_magnitude(params, v, [0.0, branch.sign()])?;
    Ok(u2.map(|m| RegPoint::new(v, [0.0, branch.sign() * m])))
}

/// Launches from `v₁` and flows to the next crossing of `{v₂ = 0}`.
pub fn half_orbit(
    params: &Params<f64>,
    v1: f64,
    branch: Branch,
    tol: Tolerances,
) -> Result<(RegPoint<f64>, CrossingEvent)> {
    let z0 = launch_point(params, v1, branch)?
        .ok_or_else(|| Error::InvalidParams(format!("v1 = {v1} is outside the Hill region")))?;
    let section = Section::coordinate(1, 0.0, Orientation::Either)?;
    let limits = ScanLimits {
        t_end: HALF_ORBIT_TIME_CAP,
        max_events: Some(1),
        gap: None,
    };
    let (crossings, err) = scan(params, &z0, &section, tol, limits);
    if let Some(e) = err {
        return Err(e);
    }
    if let Some(first) = crossings.events.first() {
        if let Some(tangent) = crossings.tangential.iter().find(|c| c.t < first.t) {
            return Err(Error::NonTransversal {
                t: tangent.t,
                transversality: tangent.transversality,
            });
        }
        return Ok((z0, *first));
    }
    if let Some(tangent) = crossings.tangential.first() {
        return Err(Error::NonTransversal {
            t: tangent.t,
            transversality: tangent.transversality,
        });
    }
    Err(Error::NoCrossing {
        t_max: HALF_ORBIT_TIME_CAP,
    })
}

/// `u₁` at the half-orbit crossing; zero exactly for symmetric periodic orbits.
pub fn shooting_residual(params: &Params<f64>, v1: f64, branch: Branch) -> Result<f64> {
    Ok(half_orbit(params, v1, branch, Tolerances::default())?.1.z.u[0])
}

/// Half of the `v₁`-axis searched by [`default_bracket`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HalfAxis {
    #[default]
    Negative,
    Positive,
}

/// Scans one half of the `v₁`-axis inside the Hill component, from the
/// boundary inwards, and returns the first bracket where the shooting
/// residual changes sign.
pub fn default_bracket(params: &Params<f64>, branch: Branch, half: HalfAxis) -> Result<(f64, f64)> {
    params.require_compact()?;
    let (angle, sign) = match half {
        HalfAxis::Negative => (std::f64::consts::PI, -1.0),
        HalfAxis::Positive => (0.0, 1.0),
    };
    let radius = boundary_radius(params, angle)?.ok_or_else(|| {
        Error::InvalidParams("the Hill component is not separated from the sun".into())
    })?;
    let xs: Vec<f64> = (1..BRACKET_SCAN_POINTS)
        .map(|k| sign * radius * (1.0 - k as f64 / BRACKET_SCAN_POINTS as f64))
        .collect();
    let mut prev: Option<(f64, f64)> = None;
    for &x in &xs {
        let f = match shooting_residual(params, x, branch) {
            Ok(f) => f,
            Err(_) => {
                prev = None;
                continue;
            }
        };
        if let Some((xp, fp)) = prev {
            if (fp < 0.0) != (f < 0.0) {
                return Ok((xp.min(x), xp.max(x)));
            }
        }
        prev = Some((x, f));
    }
    let (lo, hi) = if sign < 0.0 {
        (-radius, 0.0)
    } else {
        (0.0, radius)
    };
    Err(Error::NoSignChange {
        lo,
        hi,
        f_lo: f64::NAN,
        f_hi: f64::NAN,
    })
}

/// Finds a `ρ`-symmetric periodic orbit with launch `v₁` in `bracket`.
///
/// The half orbit from `Fix(ρ)` to the next crossing of `{v₂ = 0}` is
/// closed up by the reversor, so the shooting function is `u₁` at that
/// crossing; it is driven below `tol` by Illinois regula falsi on `v₁`.
pub fn find_symmetric_orbit(
    params: &Params<f64>,
    bracket: (f64, f64),
    tol: f64,
    branch: Branch,
) -> Result<PeriodicOrbit> {
    params.require_compact()?;
    let (mut lo, mut hi) = bracket;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::InvalidParams(format!("bad bracket [{lo}, {hi}]")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParams(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let integ = Tolerances::default();
    let shoot = |x: f64| half_orbit(params, x, branch, integ);

    let (a, b) = (shoot(lo)?, shoot(hi)?);
    let (mut f_lo, mut f_hi) = (a.1.z.u[0], b.1.z.u[0]);
    if (f_lo < 0.0) == (f_hi < 0.0) && f_lo != 0.0 && f_hi != 0.0 {
        return Err(Error::NoSignChange { lo, hi, f_lo, f_hi });
    }
    let mut side = 0i8;
    let mut best = if f_lo.abs() < f_hi.abs() { a } else { b };
    for _ in 0..MAX_SHOOTING_ITERATIONS {
        if best.1.z.u[0].abs() < tol {
            break;
        }
        let mut x = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
        if !(x > lo && x < hi) {
            x = 0.5 * (lo + hi);
        }
        if x == lo || x == hi {
            break;
        }
        let s = shoot(x)?;
        let fx = s.1.z.u[0];
        if fx.abs() < best.1.z.u[0].abs() {
            best = s;
        }
        if (fx < 0.0) == (f_lo < 0.0) {
            lo = x;
            f_lo = fx;
            if side == -1 {
                f_hi *= 0.5;
            }
            side = -1;
        } else {
            hi = x;
            f_hi = fx;
            if side == 1 {
                f_lo *= 0.5;
            }
            side = 1;
        }
    }
    let (z0, crossing) = best;
    if !(crossing.z.u[0].abs() < tol) {
        return Err(Error::RootFinder {
            lo,
            hi,
            reason: format!("shooting stalled at |u1| = {:e}", crossing.z.u[0].abs()),
        });
    }
    if crossing.transversality.abs() <= TRANSVERSALITY_FLOOR {
        return Err(Error::NonTransversal {
            t: crossing.t,
            transversality: crossing.transversality,
        });
    }

    let period = 2.0 * crossing.t;
    let end = integrate(params, &z0, period, integ)?.last().z;
    let closure_error = distance(&end, &z0);
    let return_trace = return_trace(params, &z0)?;
    Ok(PeriodicOrbit {
        z0,
        period,
        closure_error,
        return_trace,
    })
}

fn distance(a: &RegPoint<f64>, b: &RegPoint<f64>) -> f64 {
    let (a, b) = (a.to_array(), b.to_array());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Point of `{v₂ = 0} ∩ {K = 0}` with section coordinates `(v₁, u₁)`, taking
/// the root for `u₂` nearest to `u2_hint`.
fn section_point(params: &Params<f64>, v1: f64, u1: f64, u2_hint: f64) -> Result<RegPoint<f64>> {
    let v = [v1, 0.0];
    let w = fiber_shift(params, v);
    let e = fiber_offset(params, v)?;
    // u₂²/2 + w₂u₂ + (u₁²/2 + w₁u₁ + e) = 0
    let rest = 0.5 * u1 * u1 + w[0] * u1 + e;
    let disc = w[1] * w[1] - 2.0 * rest;
    if disc < 0.0 {
        return Err(Error::InvalidParams(format!(
            "no surface point over (v1, u1) = ({v1}, {u1})"
        )));
    }
    let roots = [-w[1] + disc.sqrt(), -w[1] - disc.sqrt()];
    let u2 = if (roots[0] - u2_hint).abs() <= (roots[1] - u2_hint).abs() {
        roots[0]
    } else {
        roots[1]
    };
    Ok(RegPoint::new(v, [u1, u2]))
}

fn first_return(
    params: &Params<f64>,
    section: &Section,
    z: &RegPoint<f64>,
    tol: Tolerances,
) -> Result<[f64; 2]> {
    let limits = ScanLimits {
        t_end: HALF_ORBIT_TIME_CAP,
        max_events: Some(1),
        gap: None,
    };
    match scan(params, z, section, tol, limits) {
        (_, Some(e)) => Err(e),
        (c, None) => c
            .events
            .first()
            .map(|e| [e.z.v[0], e.z.u[0]])
            .ok_or(Error::NoCrossing {
                t_max: HALF_ORBIT_TIME_CAP,
            }),
    }
}

/// Trace of the return map to `{v₂ = 0}` (same crossing direction as at
/// `z0`) linearized at `z0` by central differences.
fn return_trace(params: &Params<f64>, z0: &RegPoint<f64>) -> Result<f64> {
    let fine = Tolerances {
        rtol: 1e-12,
        atol: 1e-14,
        drift: 1e-8,
    };
    let v2dot = crate::dynamics::hamiltonian_vector_field(params, z0)?.dv[1];
    let orientation = if v2dot > 0.0 {
        Orientation::Positive
    } else {
        Orientation::Negative
    };
    let section = Section::coordinate(1, 0.0, orientation)?;
    let base = [z0.v[0], z0.u[0]];
    let mut trace = 0.0;
    for j in 0..2 {
        let mut images = [[0.0; 2]; 2];
        for (slot, sign) in [1.0, -1.0].into_iter().enumerate() {
            let mut x = base;
            x[j] += sign * MONODROMY_STEP;
            let z = section_point(params, x[0], x[1], z0.u[1])?;
            debug_assert!(regularized_hamiltonian(params, &z)?.abs() < 1e-12);
            images[slot] = first_return(params, &section, &z, fine)?;
        }
        trace += (images[0][j] - images[1][j]) / (2.0 * MONODROMY_STEP);
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn launch_points_lie_on_surface() {
        let params = Params::new(0.1, 1.8).unwrap();
        for branch in [Branch::Upper, Branch::Lower] {
            let z = launch_point(&params, -0.3, branch).unwrap().unwrap();
            assert!(regularized_hamiltonian(&params, &z).unwrap().abs() < 1e-14);
            assert_eq!(z.u[1] > 0.0, branch == Branch::Upper);
        }
        assert!(launch_point(&params, -0.9, Branch::Upper)
            .unwrap()
            .is_none());
    }

    #[test]
    fn section_point_solves_energy() {
        let params = Params::new(0.1, 1.8).unwrap();
        let z = section_point(&params, -0.3, 0.05, 1.0).unwrap();
        assert!(regularized_hamiltonian(&params, &z).unwrap().abs() < 1e-14);
        assert!(z.u[1] > 0.0);
    }

    #[test]
    fn rejects_bad_brackets() {
        let params = Params::new(0.0, 1.8).unwrap();
        assert!(find_symmetric_orbit(&params, (0.1, -0.1), 1e-10, Branch::Upper).is_err());
        assert!(find_symmetric_orbit(&params, (-0.1, 0.1), 0.0, Branch::Upper).is_err());
    }
}
