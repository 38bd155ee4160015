//! Lagrange points: critical points of the effective potential.

use std::fmt;

use crate::dynamics::{effective_potential, effective_potential_gradient, Params};
use crate::error::{Error, Result};

const BISECTION_WIDTH: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum LagrangeLabel {
    L1,
    L2,
    L3,
    L4,
    L5,
}

impl LagrangeLabel {
    const ALL: [LagrangeLabel; 5] = [Self::L1, Self::L2, Self::L3, Self::L4, Self::L5];
}

impl fmt::Display for LagrangeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let i = Self::ALL.iter().position(|l| l == self).unwrap_or(0) + 1;
        write!(f, "L{i}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalPoint {
    pub label: LagrangeLabel,
    pub q: [f64; 2],
    /// `H` at the critical point, equal to the effective potential at `q`.
    pub value: f64,
}

/// dU/dq₁ along the real axis.
fn axis_slope(mu: f64, x: f64) -> f64 {
    -(x - mu)
        + (1.0 - mu) * x.signum() / (x * x)
        + mu * (x - 1.0).signum() / ((x - 1.0) * (x - 1.0))
}

fn axis_curvature(mu: f64, x: f64) -> f64 {
    -1.0 - 2.0 * (1.0 - mu) / x.abs().powi(3) - 2.0 * mu / (x - 1.0).abs().powi(3)
}

/// Scans `points` (monotone) for the first sign change of `f`.
fn bracket(f: impl Fn(f64) -> f64, points: &[f64]) -> Option<(f64, f64)> {
    points.windows(2).find_map(|w| {
        let (fa, fb) = (f(w[0]), f(w[1]));
        (fa.is_finite() && fb.is_finite() && fa.signum() != fb.signum()).then_some((w[0], w[1]))
    })
}

/// Bisection to width [`BISECTION_WIDTH`] followed by one Newton polish,
/// kept only when it stays in the bracket and lowers the residual.
fn collinear_root(mu: f64, lo: f64, hi: f64) -> Result<f64> {
    let f = |x| axis_slope(mu, x);
    let (mut a, mut b) = (lo, hi);
    let fa0 = f(a);
    if fa0.signum() == f(b).signum() {
        return Err(Error::RootFinder {
            lo,
            hi,
            reason: "no sign change in bracket".into(),
        });
    }
    let mut fa = fa0;
    for _ in 0..200 {
        if b - a <= BISECTION_WIDTH {
            break;
        }
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            a = m;
            b = m;
            break;
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    let x = 0.5 * (a + b);
    let polished = x - f(x) / axis_curvature(mu, x);
    if polished >= lo && polished <= hi && f(polished).abs() < f(x).abs() {
        Ok(polished)
    } else {
        Ok(x)
    }
}

fn scan_points(start: f64, direction: f64, extent: f64) -> Vec<f64> {
    // log-spaced near the singular endpoint, then linear out to `extent`
    let mut offsets: Vec<f64> = (0..)
        .map(|k| 10f64.powf(-12.0 + 0.25 * k as f64))
        .take_while(|&d| d < 0.1 * extent)
        .collect();
    let last = *offsets.last().unwrap_or(&0.0);
    let n = 400;
    offsets.extend((1..=n).map(|k| last + (extent - last) * k as f64 / n as f64));
    offsets.into_iter().map(|d| start + direction * d).collect()
}

/// The five Lagrange points sorted by increasing value of `H`
/// (ties broken by `q`).
pub fn lagrange_points(params: &Params<f64>) -> Result<Vec<CriticalPoint>> {
    let mu = params.mu();
    if !(mu > 0.0 && mu < 1.0) {
        return Err(Error::InvalidParams(format!(
            "mu = {mu}: Lagrange points are isolated only for 0 < mu < 1"
        )));
    }
    let f = |x| axis_slope(mu, x);
    let intervals = [
        scan_points(0.0, 1.0, 0.5),
        scan_points(1.0, 1.0, 4.0),
        scan_points(0.0, -1.0, 4.0),
    ];
    let mut pts = Vec::with_capacity(5);
    for (k, grid) in intervals.iter().enumerate() {
        // the interior interval is scanned from both endpoints
        let grid = if k == 0 {
            let mut g = grid.clone();
            g.extend(scan_points(1.0, -1.0, 0.5).into_iter().rev());
            g
        } else {
            grid.clone()
        };
        let (lo, hi) = bracket(f, &grid).ok_or_else(|| Error::RootFinder {
            lo: grid[0],
            hi: *grid.last().unwrap_or(&grid[0]),
            reason: "sign scan found no bracket".into(),
        })?;
        let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        pts.push([collinear_root(mu, lo, hi)?, 0.0]);
    }
    let h = 0.75f64.sqrt();
    pts.push([0.5, h]);
    pts.push([0.5, -h]);

    let mut out = pts
        .into_iter()
        .map(|q| Ok((q, effective_potential(params, q)?)))
        .collect::<Result<Vec<_>>>()?;
    out.sort_by(|a, b| {
        a.1.total_cmp(&b.1)
            .then(a.0[0].total_cmp(&b.0[0]))
            .then(b.0[1].total_cmp(&a.0[1]))
    });
    Ok(out
        .into_iter()
        .zip(LagrangeLabel::ALL)
        .map(|((q, value), label)| CriticalPoint { label, q, value })
        .collect())
}

/// Norm of the effective-potential gradient at `q`.
pub fn gradient_norm(params: &Params<f64>, q: [f64; 2]) -> Result<f64> {
    let g = effective_potential_gradient(params, q)?;
    Ok(g[0].hypot(g[1]))
}
