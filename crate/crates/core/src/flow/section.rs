//! Affine hyperplane sections, crossing detection and return maps.

use super::integrator::{dopri_step, field, hermite, Node, Stepper, Tolerances};
use crate::dynamics::{Params, RegPoint, Tangent4};
use crate::error::{Error, Result};

/// Residual bound for reported crossings.
pub const CROSSING_RESIDUAL: f64 = 1e-10;
/// Crossings with `|<normal, ż>|` at or below this are tangential.
pub const TRANSVERSALITY_FLOOR: f64 = 1e-10;
/// Longest stretch of time a return map waits for the next crossing.
pub const RETURN_TIME_CAP: f64 = 1e3;

const POLISH_TARGET: f64 = 1e-12;
const POLISH_ITERATIONS: usize = 8;
const BISECTION_ITERATIONS: usize = 100;
/// Crossings this close to the start are ignored when starting on the section.
const START_DEADBAND: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Positive,
    Negative,
    Either,
}

impl Orientation {
    fn accepts(self, transversality: f64) -> bool {
        match self {
            Orientation::Positive => transversality > 0.0,
            Orientation::Negative => transversality < 0.0,
            Orientation::Either => true,
        }
    }
}

/// `{z : <normal, z> = offset}` with a unit normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Section {
    normal: Tangent4<f64>,
    offset: f64,
    orientation: Orientation,
}

impl Section {
    /// Normalizes `normal` (and scales `offset` with it).
    pub fn new(normal: Tangent4<f64>, offset: f64, orientation: Orientation) -> Result<Self> {
        let n = normal.norm();
        if !(n > 0.0 && n.is_finite() && offset.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "bad section normal {normal:?} / offset {offset}"
            )));
        }
        let a = normal.to_array().map(|x| x / n);
        Ok(Self {
            normal: Tangent4::from_array(a),
            offset: offset / n,
            orientation,
        })
    }

    /// The coordinate hyperplane `z[index] = value`, in `(v₁, v₂, u₁, u₂)` order.
    pub fn coordinate(index: usize, value: f64, orientation: Orientation) -> Result<Self> {
        if index >= 4 {
            return Err(Error::InvalidParams(format!(
                "coordinate index {index} out of range"
            )));
        }
        Self::new(Tangent4::basis(index), value, orientation)
    }

    pub fn normal(&self) -> Tangent4<f64> {
        self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn with_orientation(self, orientation: Orientation) -> Self {
        Self {
            orientation,
            ..self
        }
    }

    /// `<normal, z> - offset`.
    pub fn residual(&self, z: &RegPoint<f64>) -> f64 {
        self.eval(&z.to_array())
    }

    fn eval(&self, y: &[f64; 4]) -> f64 {
        let n = self.normal.to_array();
        n.iter().zip(y).map(|(a, b)| a * b).sum::<f64>() - self.offset
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossingEvent {
    pub t: f64,
    pub z: RegPoint<f64>,
    /// `<normal, ż>` at the crossing.
    pub transversality: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Crossings {
    /// Transversal crossings with the section's orientation, in time order.
    pub events: Vec<CrossingEvent>,
    /// Sign changes where the flow was (numerically) tangent to the section.
    pub tangential: Vec<CrossingEvent>,
}

/// Locates the crossing inside `[a, b]`: bisection on the Hermite interpolant,
/// then Newton on the exact step from `a`.
fn refine(params: &Params<f64>, section: &Section, a: &Node, b: &Node) -> Result<CrossingEvent> {
    let ga = section.eval(&a.y);
    let (mut lo, mut hi) = (a.t, b.t);
    for _ in 0..BISECTION_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if (section.eval(&hermite(a, b, mid)) < 0.0) == (ga < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (t_min, t_max) = if a.t < b.t { (a.t, b.t) } else { (b.t, a.t) };
    let mut t = 0.5 * (lo + hi);
    let n = section.normal.to_array();
    let mut y = dopri_step(params, &a.y, &a.f, t - a.t)?.0;
    for _ in 0..POLISH_ITERATIONS {
        let g = section.eval(&y);
        if g.abs() < POLISH_TARGET {
            break;
        }
        let f = field(params, &y)?;
        let gdot: f64 = n.iter().zip(f).map(|(a, b)| a * b).sum();
        if gdot == 0.0 {
            break;
        }
        let next = (t - g / gdot).clamp(t_min, t_max);
        if next == t {
            break;
        }
        t = next;
        y = dopri_step(params, &a.y, &a.f, t - a.t)?.0;
    }
    let f = field(params, &y)?;
    let transversality = n.iter().zip(f).map(|(a, b)| a * b).sum();
    Ok(CrossingEvent {
        t,
        z: RegPoint::from_array(y),
        transversality,
    })
}

pub(crate) struct ScanLimits {
    pub t_end: f64,
    pub max_events: Option<usize>,
    /// Fail with `NoCrossing` if this much time passes without an event.
    pub gap: Option<f64>,
}

/// Walks the flow and collects crossings. On failure the crossings found so
/// far are returned together with the error.
pub(crate) fn scan(
    params: &Params<f64>,
    z0: &RegPoint<f64>,
    section: &Section,
    tol: Tolerances,
    limits: ScanLimits,
) -> (Crossings, Option<Error>) {
    let mut out = Crossings::default();
    let dir = if limits.t_end < 0.0 { -1.0 } else { 1.0 };
    let mut stepper = match Stepper::new(params, z0, tol, dir) {
        Ok(s) => s,
        Err(e) => return (out, Some(e)),
    };
    let on_section = section.residual(z0).abs() <= CROSSING_RESIDUAL;
    let mut last_event = 0.0;
    while stepper.node().t != limits.t_end {
        if limits.max_events.is_some_and(|m| out.events.len() >= m) {
            break;
        }
        let a = *stepper.node();
        if let Some(gap) = limits.gap {
            if (a.t - last_event).abs() > gap {
                return (out, Some(Error::NoCrossing { t_max: a.t }));
            }
        }
        let b = match stepper.advance(limits.t_end) {
            Ok(b) => b,
            Err(e) => return (out, Some(e)),
        };
        let (ga, gb) = (section.eval(&a.y), section.eval(&b.y));
        let crosses = (ga != 0.0) && ((ga < 0.0) != (gb < 0.0) || gb == 0.0);
        if !crosses {
            continue;
        }
        let event = match refine(stepper.params(), section, &a, &b) {
            Ok(e) => e,
            Err(e) => return (out, Some(e)),
        };
        if on_section && event.t.abs() < START_DEADBAND {
            continue;
        }
        if event.transversality.abs() <= TRANSVERSALITY_FLOOR {
            out.tangential.push(event);
        } else if section.orientation.accepts(event.transversality) {
            last_event = event.t;
            out.events.push(event);
        }
    }
    (out, None)
}

/// Crossings of `section` along the flow from `z0` up to `t_end` (either sign).
pub fn section_crossings(
    params: &Params<f64>,
    z0: &RegPoint<f64>,
    t_end: f64,
    section: &Section,
    tol: Tolerances,
) -> Result<Crossings> {
    if !t_end.is_finite() {
        return Err(Error::InvalidParams(format!(
            "t_end must be finite, got {t_end}"
        )));
    }
    match scan(
        params,
        z0,
        section,
        tol,
        ScanLimits {
            t_end,
            max_events: None,
            gap: None,
        },
    ) {
        (c, None) => Ok(c),
        (_, Some(e)) => Err(e),
    }
}

/// The first `n` oriented crossings after `z0`, i.e. `n` iterates of the
/// return map. Errors carry the zero-based index of the failing iterate.
pub fn return_map(
    params: &Params<f64>,
    section: &Section,
    z0: &RegPoint<f64>,
    n: usize,
    tol: Tolerances,
) -> Result<Vec<RegPoint<f64>>> {
    let residual = section.residual(z0);
    if !(residual.abs() <= CROSSING_RESIDUAL) {
        return Err(Error::OffSection {
            residual: residual.abs(),
        });
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let limits = ScanLimits {
        t_end: f64::INFINITY,
        max_events: Some(n),
        gap: Some(RETURN_TIME_CAP),
    };
    match scan(params, z0, section, tol, limits) {
        (c, None) => Ok(c.events.iter().map(|e| e.z).collect()),
        (c, Some(e)) => Err(Error::Iterate {
            iterate: c.events.len(),
            source: Box::new(e),
        }),
    }
}
