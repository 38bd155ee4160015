//! Dormand-Prince 5(4) integration of the regularized flow.

use crate::dynamics::{hamiltonian_vector_field, regularized_hamiltonian, Params, RegPoint};
use crate::error::{Error, Result};

/// Largest `|K(z0)|` accepted as a starting point.
pub const SURFACE_TOLERANCE: f64 = 1e-8;
/// Integration stops once `|2v² - 1|` drops below this value.
pub const SINGULARITY_GUARD: f64 = 1e-6;

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;
const INITIAL_STEP: f64 = 1e-2;
const MIN_RELATIVE_STEP: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    /// Bound on `|K|` along the trajectory.
    pub drift: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            drift: 1e-8,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        for (name, x) in [
            ("rtol", self.rtol),
            ("atol", self.atol),
            ("drift", self.drift),
        ] {
            if !(x > 0.0 && x.is_finite()) {
                return Err(Error::InvalidParams(format!(
                    "{name} must be positive and finite, got {x}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySample {
    pub t: f64,
    pub z: RegPoint<f64>,
    /// `K(z)`, which should stay at zero.
    pub k: f64,
}

/// Accepted steps of one integration, in integration order (times decrease
/// for backward runs).
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub params: Params<f64>,
    pub samples: Vec<TrajectorySample>,
}

impl Trajectory {
    pub fn last(&self) -> &TrajectorySample {
        self.samples
            .last()
            .expect("a trajectory always holds its initial point")
    }

    pub fn max_residual(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, s| m.max(s.k.abs()))
    }
}

pub(crate) type State = [f64; 4];

pub(crate) fn field(params: &Params<f64>, y: &State) -> Result<State> {
    Ok(hamiltonian_vector_field(params, &RegPoint::from_array(*y))?.to_array())
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
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

/// One step of size `h` from `(y, f = field(y))`: the fifth-order solution,
/// the embedded error estimate and the field at the new point.
pub(crate) fn dopri_step(
    params: &Params<f64>,
    y: &State,
    f: &State,
    h: f64,
) -> Result<(State, State, State)> {
    let mut k = [[0.0; 4]; 7];
    k[0] = *f;
    for s in 1..7 {
        debug_assert!(C[s] > 0.0);
        let mut ys = *y;
        for (j, kj) in k.iter().enumerate().take(s) {
            for i in 0..4 {
                ys[i] += h * A[s][j] * kj[i];
            }
        }
        k[s] = field(params, &ys)?;
    }
    let mut y5 = *y;
    let mut err = [0.0; 4];
    for i in 0..4 {
        let mut d5 = 0.0;
        let mut d4 = 0.0;
        for s in 0..7 {
            d5 += B5[s] * k[s][i];
            d4 += B4[s] * k[s][i];
        }
        y5[i] += h * d5;
        err[i] = h * (d5 - d4);
    }
    Ok((y5, err, k[6]))
}

/// Accepted point with the field value, for dense output.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Node {
    pub t: f64,
    pub y: State,
    pub f: State,
    pub k: f64,
}

impl Node {
    pub fn sample(&self) -> TrajectorySample {
        TrajectorySample {
            t: self.t,
            z: RegPoint::from_array(self.y),
            k: self.k,
        }
    }
}

/// Cubic Hermite interpolation between two accepted nodes.
pub(crate) fn hermite(a: &Node, b: &Node, t: f64) -> State {
    let h = b.t - a.t;
    let s = (t - a.t) / h;
    let (s2, s3) = (s * s, s * s * s);
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    let mut y = [0.0; 4];
    for i in 0..4 {
        y[i] = h00 * a.y[i] + h10 * h * a.f[i] + h01 * b.y[i] + h11 * h * b.f[i];
    }
    y
}

pub(crate) struct Stepper<'a> {
    params: &'a Params<f64>,
    tol: Tolerances,
    dir: f64,
    h: f64,
    node: Node,
}

impl<'a> Stepper<'a> {
    pub fn new(
        params: &'a Params<f64>,
        z0: &RegPoint<f64>,
        tol: Tolerances,
        dir: f64,
    ) -> Result<Self> {
        tol.validate()?;
        let y = z0.to_array();
        if y.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "non-finite initial point {y:?}"
            )));
        }
        check_singularity(z0, 0.0)?;
        let k = regularized_hamiltonian(params, z0)?;
        if !(k.abs() < SURFACE_TOLERANCE) {
            return Err(Error::OffSurface { residual: k.abs() });
        }
        let f = field(params, &y)?;
        Ok(Self {
            params,
            tol,
            dir,
            h: INITIAL_STEP,
            node: Node { t: 0.0, y, f, k },
        })
    }

    pub fn node(&self) -> &Node {
        &self.node
    }

    pub fn params(&self) -> &Params<f64> {
        self.params
    }

    /// Takes one accepted step, never past `t_end` (which may be infinite).
    pub fn advance(&mut self, t_end: f64) -> Result<Node> {
        let Node { t, y, f, .. } = self.node;
        let remaining = (t_end - t) * self.dir;
        debug_assert!(remaining > 0.0);
        loop {
            let floor = MIN_RELATIVE_STEP * t.abs().max(1.0);
            if self.h < floor {
                return Err(Error::StepUnderflow { t, h: self.h });
            }
            let last = self.h >= remaining;
            let h = if last { remaining } else { self.h };
            let (y5, err) = match dopri_step(self.params, &y, &f, self.dir * h) {
                Ok((y5, err, _)) => (y5, err),
                Err(Error::Singular { .. }) => {
                    self.h = h * MIN_FACTOR;
                    continue;
                }
                Err(e) => return Err(e),
            };
            let mut en: f64 = 0.0;
            for i in 0..4 {
                let scale = self.tol.atol + self.tol.rtol * y[i].abs().max(y5[i].abs());
                en = en.max(err[i].abs() / scale);
            }
            if !en.is_finite() {
                self.h = h * MIN_FACTOR;
                continue;
            }
            if en > 1.0 {
                self.h = h * (SAFETY * en.powf(-0.2)).max(MIN_FACTOR);
                continue;
            }
            let t_new = if last { t_end } else { t + self.dir * h };
            let z = RegPoint::from_array(y5);
            check_singularity(&z, t_new)?;
            let k = regularized_hamiltonian(self.params, &z)?;
            if !(k.abs() <= self.tol.drift) {
                return Err(Error::Drift {
                    t: t_new,
                    residual: k.abs(),
                    bound: self.tol.drift,
                });
            }
            let grow = if en == 0.0 {
                MAX_FACTOR
            } else {
                (SAFETY * en.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
            };
            self.h = h * grow;
            let f_new = field(self.params, &y5)?;
            self.node = Node {
                t: t_new,
                y: y5,
                f: f_new,
                k,
            };
            return Ok(self.node);
        }
    }
}

fn check_singularity(z: &RegPoint<f64>, t: f64) -> Result<()> {
    let distance = z.sun_distance();
    if !(distance >= SINGULARITY_GUARD) {
        return Err(Error::SingularityApproach { t, distance });
    }
    Ok(())
}

/// Integrates the flow of `K` from `z0` to `t_end` (either sign).
pub fn integrate(
    params: &Params<f64>,
    z0: &RegPoint<f64>,
    t_end: f64,
    tol: Tolerances,
) -> Result<Trajectory> {
    if !t_end.is_finite() {
        return Err(Error::InvalidParams(format!(
            "t_end must be finite, got {t_end}"
        )));
    }
    let dir = if t_end < 0.0 { -1.0 } else { 1.0 };
    let mut stepper = Stepper::new(params, z0, tol, dir)?;
    let mut samples = vec![stepper.node().sample()];
    while stepper.node().t != t_end {
        samples.push(stepper.advance(t_end)?.sample());
    }
    Ok(Trajectory {
        params: *params,
        samples,
    })
}

/// Endpoint of `n` fixed steps of size `h` with the fifth-order formula.
/// No error control and no surface checks; meant for order studies.
pub fn integrate_fixed_step(
    params: &Params<f64>,
    z0: &RegPoint<f64>,
    h: f64,
    n: usize,
) -> Result<RegPoint<f64>> {
    let mut y = z0.to_array();
    let mut f = field(params, &y)?;
    for _ in 0..n {
        let (y5, _, f5) = dopri_step(params, &y, &f, h)?;
        y = y5;
        f = f5;
    }
    Ok(RegPoint::from_array(y))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kepler_circle(c: f64) -> RegPoint<f64> {
        // at μ = 0 the launch u = (0, u₂) from v = (v₁, 0) solves u₂²/2 + 2v₁³u₂ + c v₁² - 1/2 = 0
        let v1: f64 = 0.3;
        let b = 2.0 * v1.powi(3);
        let u2 = -b + (b * b + 1.0 - 2.0 * c * v1 * v1).sqrt();
        RegPoint::new([v1, 0.0], [0.0, u2])
    }

    #[test]
    fn equilibrium_at_unit_mass_ratio() {
        let params = Params::new(1.0, 1.8).unwrap();
        let traj = integrate(&params, &RegPoint::origin(), 5.0, Tolerances::default()).unwrap();
        assert_eq!(traj.last().t, 5.0);
        assert!(traj.samples.iter().all(|s| s.z == RegPoint::origin()));
    }

    #[test]
    fn rejects_off_surface_start() {
        let params = Params::new(0.0, 1.8).unwrap();
        let z = RegPoint::new([0.1, 0.0], [0.0, 0.0]);
        assert!(matches!(
            integrate(&params, &z, 1.0, Tolerances::default()),
            Err(Error::OffSurface { .. })
        ));
        let bad = Tolerances {
            rtol: 0.0,
            ..Tolerances::default()
        };
        assert!(integrate(&params, &kepler_circle(1.8), 1.0, bad).is_err());
    }

    #[test]
    fn times_are_monotone_and_residual_small() {
        let params = Params::new(0.0, 1.8).unwrap();
        let z0 = kepler_circle(1.8);
        for t_end in [3.0, -3.0] {
            let traj = integrate(&params, &z0, t_end, Tolerances::default()).unwrap();
            assert_eq!(traj.last().t, t_end);
            let sign = t_end.signum();
            assert!(traj
                .samples
                .windows(2)
                .all(|w| (w[1].t - w[0].t) * sign > 0.0));
            assert!(traj.max_residual() < 1e-8);
        }
    }

    #[test]
    fn forward_then_backward_returns() {
        let params = Params::new(0.3, 2.0).unwrap();
        let z0 = kepler_circle(2.0);
        let z0 = RegPoint::new(
            z0.v,
            [
                0.0,
                crate::convexity::momentum_magnitude(&params, z0.v, [0.0, 1.0])
                    .unwrap()
                    .unwrap(),
            ],
        );
        let fwd = integrate(&params, &z0, 2.0, Tolerances::default()).unwrap();
        let back = integrate(&params, &fwd.last().z, -2.0, Tolerances::default()).unwrap();
        let (a, b) = (back.last().z.to_array(), z0.to_array());
        for i in 0..4 {
            assert!((a[i] - b[i]).abs() < 1e-8);
        }
    }

    #[test]
    fn hermite_reproduces_cubics() {
        // y = t³ has derivative 3t²; the interpolant is exact
        let a = Node {
            t: 1.0,
            y: [1.0; 4],
            f: [3.0; 4],
            k: 0.0,
        };
        let b = Node {
            t: 2.0,
            y: [8.0; 4],
            f: [12.0; 4],
            k: 0.0,
        };
        let y = hermite(&a, &b, 1.5);
        assert!((y[0] - 3.375).abs() < 1e-14);
    }
}
