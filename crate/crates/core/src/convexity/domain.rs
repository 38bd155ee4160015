//! The bounded earth component `W` of `{K <= 0}` and its boundary `Σ`.
//!
//! `K` is quadratic in `u` with identity Hessian:
//!
//! ```text
//! K(v, u) = |u|²/2 + <u, w(v)> + e(v)
//! w(v) = 2|v|² iv - μ i v̄
//! e(v) = |v|² (c - μ/|1 - 2v²|) - (1-μ)/2
//! ```
//!
//! so over each `v` the fiber of `W` is the disk with center `-w(v)` and
//! radius `sqrt(|w(v)|² - 2e(v))`, nonempty exactly on the Hill region. The
//! earth component is the part of the Hill region reachable from `v = 0` by
//! radial continuation.

use std::f64::consts::TAU;

use crate::dynamics::{Params, RegPoint, SUN_COLLISION_GUARD};
use crate::error::{Error, Result};
use crate::lagrange::lagrange_points;

/// Radial continuation stops (component touches the sun) below this
/// distance `|2v² - 1|`.
const SUN_TOUCH: f64 = 1e-6;
const RAY_STEP: f64 = 1e-3;
const RAY_LIMIT: f64 = 1.0;
/// A Hill component smaller than this is reported as degenerate.
const MIN_HILL_RADIUS: f64 = 1e-12;

/// Sample counts `(n_r, n_θ, n_w, n_t)` for the filled domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Resolution {
    /// radial samples of the Hill component, origin included
    pub nr: usize,
    /// rays of the Hill component
    pub ntheta: usize,
    /// directions in each momentum fiber
    pub nw: usize,
    /// radial levels in each momentum fiber, boundary included
    pub nt: usize,
}

impl Default for Resolution {
    fn default() -> Self {
        Self {
            nr: 40,
            ntheta: 64,
            nw: 16,
            nt: 8,
        }
    }
}

impl Resolution {
    pub fn new(nr: usize, ntheta: usize, nw: usize, nt: usize) -> Result<Self> {
        let r = Self { nr, ntheta, nw, nt };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nr == 0 || self.ntheta == 0 || self.nw == 0 || self.nt == 0 {
            return Err(Error::InvalidParams(format!(
                "resolution must be positive, got {self:?}"
            )));
        }
        Ok(())
    }

    fn per_fiber(&self) -> usize {
        1 + self.nt * self.nw
    }
}

/// `w(v) = 2|v|² iv - μ i v̄`, the linear coefficient of `K` in `u`.
pub fn fiber_shift(params: &Params<f64>, v: [f64; 2]) -> [f64; 2] {
    let mu = params.mu();
    let r2 = v[0] * v[0] + v[1] * v[1];
    // iv = (-v₂, v₁), i v̄ = (v₂, v₁)
    [-2.0 * r2 * v[1] - mu * v[1], 2.0 * r2 * v[0] - mu * v[0]]
}

/// `e(v) = K(v, 0)`.
pub fn fiber_offset(params: &Params<f64>, v: [f64; 2]) -> Result<f64> {
    let (mu, c) = (params.mu(), params.c());
    let d = RegPoint::new(v, [0.0, 0.0]).sun_distance();
    if !(d >= SUN_COLLISION_GUARD) {
        return Err(Error::Singular {
            what: "|2v^2 - 1| below guard",
            value: d,
        });
    }
    let r2 = v[0] * v[0] + v[1] * v[1];
    Ok(r2 * (c - mu / d) - 0.5 * (1.0 - mu))
}

/// `|w(v)|² - 2e(v)`: nonnegative exactly where the momentum fiber is nonempty.
pub fn fiber_discriminant(params: &Params<f64>, v: [f64; 2]) -> Result<f64> {
    let w = fiber_shift(params, v);
    Ok(w[0] * w[0] + w[1] * w[1] - 2.0 * fiber_offset(params, v)?)
}

/// Momentum disk `{u : K(v, u) <= 0}` over a fixed `v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fiber {
    pub center: [f64; 2],
    pub radius: f64,
}

impl Fiber {
    pub fn point(&self, t: f64, angle: f64) -> [f64; 2] {
        [
            self.center[0] + t * self.radius * angle.cos(),
            self.center[1] + t * self.radius * angle.sin(),
        ]
    }
}

pub fn fiber(params: &Params<f64>, v: [f64; 2]) -> Result<Option<Fiber>> {
    let w = fiber_shift(params, v);
    let disc = w[0] * w[0] + w[1] * w[1] - 2.0 * fiber_offset(params, v)?;
    Ok((disc >= 0.0).then(|| Fiber {
        center: [-w[0], -w[1]],
        radius: disc.sqrt(),
    }))
}

/// `|u|` such that `(v, |u| ŵ)` lies on `{K = 0}`: the root
/// `-b + sqrt(b² - 2e)` of `|u|²/2 + b|u| + e = 0` with `b = <ŵ, w(v)>`.
/// `None` when the root is complex or negative.
pub fn momentum_magnitude(
    params: &Params<f64>,
    v: [f64; 2],
    w_hat: [f64; 2],
) -> Result<Option<f64>> {
    let norm = w_hat[0].hypot(w_hat[1]);
    if !((norm - 1.0).abs() < 1e-12) {
        return Err(Error::InvalidParams(format!(
            "direction must be a unit vector, |w_hat| = {norm}"
        )));
    }
    let w = fiber_shift(params, v);
    let b = w_hat[0] * w[0] + w_hat[1] * w[1];
    let e = fiber_offset(params, v)?;
    let disc = b * b - 2.0 * e;
    if disc < 0.0 {
        return Ok(None);
    }
    let root = -b + disc.sqrt();
    Ok((root >= 0.0).then_some(root))
}

/// Radius of the earth Hill component along the ray at `angle`, or `None`
/// if radial continuation runs into the sun collision or past `|v| = 1`
/// (the component is not separated from the sun).
pub fn boundary_radius(params: &Params<f64>, angle: f64) -> Result<Option<f64>> {
    let dir = [angle.cos(), angle.sin()];
    let at = |r: f64| [r * dir[0], r * dir[1]];
    let mut inside = 0.0;
    let steps = (RAY_LIMIT / RAY_STEP).round() as usize;
    for k in 1..=steps {
        let r = k as f64 * RAY_STEP;
        if RegPoint::new(at(r), [0.0, 0.0]).sun_distance() < SUN_TOUCH {
            return Ok(None);
        }
        if fiber_discriminant(params, at(r))? < 0.0 {
            let (mut lo, mut hi) = (inside, r);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if fiber_discriminant(params, at(mid))? >= 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Ok(Some(lo));
        }
        inside = r;
    }
    Ok(None)
}

/// True when `v` is reachable from the origin by radial continuation
/// inside the Hill region (nonempty momentum fiber).
pub fn hill_region_test(params: &Params<f64>, v: [f64; 2]) -> Result<bool> {
    let r = v[0].hypot(v[1]);
    if r == 0.0 {
        return Ok(fiber_discriminant(params, v)? >= 0.0);
    }
    let dir = [v[0] / r, v[1] / r];
    let n = (r / RAY_STEP).ceil().max(1.0) as usize;
    for k in 1..=n {
        let s = if k == n { r } else { k as f64 * RAY_STEP };
        let p = [s * dir[0], s * dir[1]];
        if RegPoint::new(p, [0.0, 0.0]).sun_distance() < SUN_TOUCH {
            return Ok(false);
        }
        if fiber_discriminant(params, p)? < -1e-15 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Checks that the energy level lies below the first Lagrange value, so that
/// the earth component is separated from the sun component.
fn separation_issue(params: &Params<f64>) -> Result<Option<String>> {
    let mu = params.mu();
    if mu <= 0.0 || mu >= 1.0 {
        return Ok(None);
    }
    let l1 = lagrange_points(params)?[0].value;
    Ok((-params.c() >= l1)
        .then(|| format!("energy -c = {} is not below H(L1) = {l1}", -params.c())))
}

/// Sample grid of the filled earth component `W`.
///
/// Base points are the origin followed by `n_r - 1` radial levels on each of
/// `n_θ` rays; each base point carries its fiber center followed by
/// `n_t × n_w` points at `t = k/n_t`. Samples are indexed in that order.
#[derive(Debug, Clone)]
pub struct FilledDomain {
    params: Params<f64>,
    resolution: Resolution,
    radii: Vec<f64>,
    bases: Vec<([f64; 2], Fiber)>,
    degeneracy: Option<String>,
}

pub fn sample_filled_domain(params: &Params<f64>, resolution: Resolution) -> Result<FilledDomain> {
    params.require_compact()?;
    resolution.validate()?;
    let empty = |reason: String| FilledDomain {
        params: *params,
        resolution,
        radii: Vec::new(),
        bases: Vec::new(),
        degeneracy: Some(reason),
    };
    if let Some(reason) = separation_issue(params)? {
        return Ok(empty(reason));
    }
    let mut radii = Vec::with_capacity(resolution.ntheta);
    for j in 0..resolution.ntheta {
        let angle = TAU * j as f64 / resolution.ntheta as f64;
        match boundary_radius(params, angle)? {
            Some(r) => radii.push(r),
            None => {
                return Ok(empty(format!(
                    "radial continuation at angle {angle} reaches the sun"
                )))
            }
        }
    }
    if radii.iter().all(|&r| r < MIN_HILL_RADIUS) {
        return Ok(empty("Hill component below minimum size".into()));
    }

    let mut bases = Vec::with_capacity(1 + (resolution.nr - 1) * resolution.ntheta);
    let origin = [0.0, 0.0];
    if let Some(f) = fiber(params, origin)? {
        bases.push((origin, f));
    }
    for (j, &rmax) in radii.iter().enumerate() {
        let angle = TAU * j as f64 / resolution.ntheta as f64;
        for i in 1..resolution.nr {
            let r = rmax * i as f64 / (resolution.nr - 1) as f64;
            let v = [r * angle.cos(), r * angle.sin()];
            // the outermost level sits on the zero-velocity boundary
            let f = fiber(params, v)?.unwrap_or_else(|| {
                let w = fiber_shift(params, v);
                Fiber {
                    center: [-w[0], -w[1]],
                    radius: 0.0,
                }
            });
            bases.push((v, f));
        }
    }
    Ok(FilledDomain {
        params: *params,
        resolution,
        radii,
        bases,
        degeneracy: None,
    })
}

impl FilledDomain {
    pub fn params(&self) -> &Params<f64> {
        &self.params
    }

    pub fn resolution(&self) -> Resolution {
        self.resolution
    }

    /// Why the domain is empty, when it is.
    pub fn degeneracy(&self) -> Option<&str> {
        self.degeneracy.as_deref()
    }

    pub fn is_empty(&self) -> bool {
        self.bases.is_empty()
    }

    pub fn len(&self) -> usize {
        self.bases.len() * self.resolution.per_fiber()
    }

    /// Boundary radius of the Hill component on each ray.
    pub fn ray_radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn hill_radius(&self) -> f64 {
        self.radii.iter().copied().fold(0.0, f64::max)
    }

    pub fn bases(&self) -> &[([f64; 2], Fiber)] {
        &self.bases
    }

    /// Samples of the fiber over base point `b`, with global sample indices.
    pub fn fiber_samples(&self, b: usize) -> impl Iterator<Item = (usize, RegPoint<f64>)> + '_ {
        let (v, f) = self.bases[b];
        let res = self.resolution;
        let first = b * res.per_fiber();
        (0..res.per_fiber()).map(move |k| {
            let u = if k == 0 {
                f.center
            } else {
                let level = (k - 1) / res.nw + 1;
                let dir = (k - 1) % res.nw;
                f.point(
                    level as f64 / res.nt as f64,
                    TAU * dir as f64 / res.nw as f64,
                )
            };
            (first + k, RegPoint::new(v, u))
        })
    }

    pub fn points(&self) -> impl Iterator<Item = RegPoint<f64>> + '_ {
        (0..self.bases.len()).flat_map(move |b| self.fiber_samples(b).map(|(_, z)| z))
    }

    /// The `t = 1` samples, which lie on `Σ`.
    pub fn surface_points(&self) -> impl Iterator<Item = RegPoint<f64>> + '_ {
        let res = self.resolution;
        self.bases.iter().flat_map(move |&(v, f)| {
            (0..res.nw).map(move |l| RegPoint::new(v, f.point(1.0, TAU * l as f64 / res.nw as f64)))
        })
    }

    /// Largest `|u|` over the surface samples.
    pub fn max_surface_momentum(&self) -> f64 {
        self.surface_points()
            .map(|z| z.u[0].hypot(z.u[1]))
            .fold(0.0, f64::max)
    }
}
