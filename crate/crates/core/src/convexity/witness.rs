//! Search for surface points of `Σ` where `D²K` has a negative eigenvalue.

use std::f64::consts::TAU;

use super::domain::{boundary_radius, fiber, fiber_shift, sample_filled_domain, Resolution};
use crate::dynamics::{grad_k, hessian_k, regularized_hamiltonian, Params, RegPoint};
use crate::error::Result;
use crate::linalg::sym_eigen;

const SURFACE_RESIDUAL: f64 = 1e-10;
const DESCENT_ITERATIONS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Witness {
    pub z: RegPoint<f64>,
    pub lambda_min: f64,
    /// Unit eigenvector for `lambda_min`, in `(v₁, v₂, u₁, u₂)` order.
    pub direction: [f64; 4],
}

/// Surface chart: ray angle, fraction of the ray's Hill radius, fiber angle.
#[derive(Debug, Clone, Copy)]
struct Chart {
    theta: f64,
    s: f64,
    phi: f64,
}

fn surface_point(params: &Params<f64>, chart: Chart) -> Result<Option<RegPoint<f64>>> {
    match boundary_radius(params, chart.theta)? {
        Some(rmax) => Ok(Some(surface_point_on_ray(params, rmax, chart)?)),
        None => Ok(None),
    }
}

fn surface_point_on_ray(params: &Params<f64>, rmax: f64, chart: Chart) -> Result<RegPoint<f64>> {
    let r = rmax * chart.s.clamp(0.0, 1.0);
    let v = [r * chart.theta.cos(), r * chart.theta.sin()];
    let u = match fiber(params, v)? {
        Some(f) => f.point(1.0, chart.phi),
        None => {
            let w = fiber_shift(params, v);
            [-w[0], -w[1]]
        }
    };
    Ok(RegPoint::new(v, u))
}

fn lambda_at(params: &Params<f64>, z: &RegPoint<f64>) -> Result<f64> {
    Ok(sym_eigen(&hessian_k(params, z)?).values[0])
}

/// Newton steps along `∇K` back onto `{K = 0}`.
fn polish(params: &Params<f64>, mut z: RegPoint<f64>) -> Result<RegPoint<f64>> {
    for _ in 0..4 {
        let k = regularized_hamiltonian(params, &z)?;
        if k.abs() < 1e-15 {
            break;
        }
        let g = grad_k(params, &z)?.to_array();
        let g2: f64 = g.iter().map(|x| x * x).sum();
        if g2 == 0.0 {
            break;
        }
        let mut a = z.to_array();
        for (x, gi) in a.iter_mut().zip(g) {
            *x -= k * gi / g2;
        }
        z = RegPoint::from_array(a);
    }
    Ok(z)
}

/// Like [`nonconvexity_witness`] with an explicit search resolution.
pub fn nonconvexity_witness_with(
    params: &Params<f64>,
    resolution: Resolution,
) -> Result<Option<Witness>> {
    let domain = sample_filled_domain(params, resolution)?;
    if domain.is_empty() {
        return Ok(None);
    }

    // coarse pass over the surface samples, in chart coordinates
    let mut best: Option<(f64, Chart)> = None;
    let nr = resolution.nr.max(2);
    for j in 0..resolution.ntheta {
        let theta = TAU * j as f64 / resolution.ntheta as f64;
        let rmax = domain.ray_radii()[j];
        for i in 0..nr {
            let s = i as f64 / (nr - 1) as f64;
            for l in 0..resolution.nw {
                let chart = Chart {
                    theta,
                    s,
                    phi: TAU * l as f64 / resolution.nw as f64,
                };
                let z = surface_point_on_ray(params, rmax, chart)?;
                let lambda = lambda_at(params, &z)?;
                if best.is_none_or(|(b, _)| lambda < b) {
                    best = Some((lambda, chart));
                }
            }
        }
    }
    let Some((mut lambda, mut chart)) = best else {
        return Ok(None);
    };

    // compass search on the chart
    let mut steps = [
        TAU / resolution.ntheta as f64,
        1.0 / (nr - 1) as f64,
        TAU / resolution.nw as f64,
    ];
    for _ in 0..DESCENT_ITERATIONS {
        let mut improved = false;
        for axis in 0..3 {
            for sign in [1.0, -1.0] {
                let mut trial = chart;
                match axis {
                    0 => trial.theta += sign * steps[0],
                    1 => trial.s = (trial.s + sign * steps[1]).clamp(0.0, 1.0),
                    _ => trial.phi += sign * steps[2],
                }
                let Some(z) = surface_point(params, trial)? else {
                    continue;
                };
                let l = lambda_at(params, &z)?;
                if l < lambda {
                    lambda = l;
                    chart = trial;
                    improved = true;
                }
            }
        }
        if !improved {
            steps.iter_mut().for_each(|s| *s *= 0.5);
            if steps.iter().all(|&s| s < 1e-10) {
                break;
            }
        }
    }

    let Some(z) = surface_point(params, chart)? else {
        return Ok(None);
    };
    let z = polish(params, z)?;
    if regularized_hamiltonian(params, &z)?.abs() >= SURFACE_RESIDUAL {
        return Ok(None);
    }
    let eig = sym_eigen(&hessian_k(params, &z)?);
    if eig.values[0] >= 0.0 {
        return Ok(None);
    }
    Ok(Some(Witness {
        z,
        lambda_min: eig.values[0],
        direction: eig.vectors[0],
    }))
}

/// A point of `Σ` with `λ_min(D²K) < 0`, or `None` when the search at the
/// default resolution finds none. Deterministic: coarse grid plus compass search.
pub fn nonconvexity_witness(params: &Params<f64>) -> Result<Option<Witness>> {
    nonconvexity_witness_with(params, Resolution::new(24, 48, 24, 1)?)
}
