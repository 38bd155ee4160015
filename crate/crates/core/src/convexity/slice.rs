//! Zero sets of `K` and `det D²K` on the plane `v₂ = u₁ = 0` at `μ = 0`.

use std::collections::BTreeMap;
use std::fmt;

use super::kepler::{det_hessian_kepler_slice, kepler_level_slice};
use crate::error::{Error, Result};

/// Bisection along grid edges stops once the residual is below this.
pub const VERTEX_RESIDUAL: f64 = 1e-8;

/// Axis-aligned box in the `(v₁, u₂)` plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bbox {
    pub v1_min: f64,
    pub v1_max: f64,
    pub u2_min: f64,
    pub u2_max: f64,
}

impl Default for Bbox {
    fn default() -> Self {
        Self {
            v1_min: -1.0,
            v1_max: 1.0,
            u2_min: -1.5,
            u2_max: 1.5,
        }
    }
}

impl Bbox {
    pub fn validate(&self) -> Result<()> {
        let ok = [self.v1_min, self.v1_max, self.u2_min, self.u2_max]
            .iter()
            .all(|x| x.is_finite())
            && self.v1_min < self.v1_max
            && self.u2_min < self.u2_max;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParams(format!(
                "degenerate bounding box {self:?}"
            )))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CurveId {
    /// `{K = 0}`
    Level,
    /// `{det D²K = 0}`
    DetZero,
}

impl fmt::Display for CurveId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Level => "K=0",
            Self::DetZero => "detD2K=0",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SliceCurve {
    pub id: CurveId,
    /// Connected pieces of the zero set, each a list of `(v₁, u₂)` vertices.
    /// Closed pieces repeat their first vertex at the end.
    pub polylines: Vec<Vec<[f64; 2]>>,
}

impl SliceCurve {
    pub fn is_empty(&self) -> bool {
        self.polylines.iter().all(|p| p.len() < 2)
    }

    pub fn segments(&self) -> impl Iterator<Item = ([f64; 2], [f64; 2])> + '_ {
        self.polylines
            .iter()
            .flat_map(|p| p.windows(2).map(|w| (w[0], w[1])))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Edge {
    /// (i, j) to (i + 1, j)
    Horizontal(usize, usize),
    /// (i, j) to (i, j + 1)
    Vertical(usize, usize),
}

/// Marching squares on an `nx × ny` cell grid over `bbox`. Edge crossings are
/// refined by bisection on `f`; saddle cells are resolved by the center value.
pub fn contour(
    f: impl Fn(f64, f64) -> f64,
    bbox: &Bbox,
    nx: usize,
    ny: usize,
) -> Vec<Vec<[f64; 2]>> {
    let x = |i: usize| bbox.v1_min + (bbox.v1_max - bbox.v1_min) * i as f64 / nx as f64;
    let y = |j: usize| bbox.u2_min + (bbox.u2_max - bbox.u2_min) * j as f64 / ny as f64;
    let values: Vec<Vec<f64>> = (0..=nx)
        .map(|i| (0..=ny).map(|j| f(x(i), y(j))).collect())
        .collect();
    let positive = |i: usize, j: usize| values[i][j] > 0.0;

    let mut vertex_cache: BTreeMap<Edge, [f64; 2]> = BTreeMap::new();
    let mut vertex = |e: Edge| -> [f64; 2] {
        *vertex_cache.entry(e).or_insert_with(|| {
            let (a, b) = match e {
                Edge::Horizontal(i, j) => ([x(i), y(j)], [x(i + 1), y(j)]),
                Edge::Vertical(i, j) => ([x(i), y(j)], [x(i), y(j + 1)]),
            };
            refine_edge(&f, a, b)
        })
    };

    let mut segments: Vec<(Edge, Edge)> = Vec::new();
    for i in 0..nx {
        for j in 0..ny {
            let corners = [
                positive(i, j),
                positive(i + 1, j),
                positive(i + 1, j + 1),
                positive(i, j + 1),
            ];
            let bottom = Edge::Horizontal(i, j);
            let right = Edge::Vertical(i + 1, j);
            let top = Edge::Horizontal(i, j + 1);
            let left = Edge::Vertical(i, j);
            let crossed: Vec<Edge> = [(0, 1, bottom), (1, 2, right), (2, 3, top), (3, 0, left)]
                .into_iter()
                .filter(|&(a, b, _)| corners[a] != corners[b])
                .map(|(_, _, e)| e)
                .collect();
            match crossed.len() {
                2 => segments.push((crossed[0], crossed[1])),
                4 => {
                    let center = f(0.5 * (x(i) + x(i + 1)), 0.5 * (y(j) + y(j + 1))) > 0.0;
                    if center == corners[0] {
                        // corners 1 and 3 are cut off
                        segments.push((bottom, right));
                        segments.push((top, left));
                    } else {
                        segments.push((left, bottom));
                        segments.push((right, top));
                    }
                }
                _ => {}
            }
        }
    }

    let mut incident: BTreeMap<Edge, Vec<usize>> = BTreeMap::new();
    for (k, &(a, b)) in segments.iter().enumerate() {
        incident.entry(a).or_default().push(k);
        incident.entry(b).or_default().push(k);
    }
    let mut used = vec![false; segments.len()];
    let mut chains: Vec<Vec<Edge>> = Vec::new();
    let mut walk = |start: usize, from: Edge, used: &mut Vec<bool>| {
        let mut chain = vec![from];
        let mut seg = start;
        let mut at = from;
        loop {
            used[seg] = true;
            let (a, b) = segments[seg];
            let next = if a == at { b } else { a };
            chain.push(next);
            at = next;
            match incident[&at].iter().find(|&&s| !used[s]) {
                Some(&s) => seg = s,
                None => break,
            }
        }
        chains.push(chain);
    };
    // open chains start at an edge with a single incident segment
    for k in 0..segments.len() {
        if used[k] {
            continue;
        }
        let (a, b) = segments[k];
        if incident[&a].len() == 1 {
            walk(k, a, &mut used);
        } else if incident[&b].len() == 1 {
            walk(k, b, &mut used);
        }
    }
    for k in 0..segments.len() {
        if !used[k] {
            walk(k, segments[k].0, &mut used);
        }
    }
    chains
        .into_iter()
        .map(|c| c.into_iter().map(&mut vertex).collect())
        .collect()
}

fn refine_edge(f: &impl Fn(f64, f64) -> f64, a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    let at = |s: f64| [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])];
    let eval = |s: f64| {
        let p = at(s);
        f(p[0], p[1])
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    let f_lo = eval(lo);
    if f_lo == 0.0 {
        return a;
    }
    let lo_positive = f_lo > 0.0;
    let mut best = (f_lo.abs(), lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = eval(mid);
        if fm.abs() < best.0 {
            best = (fm.abs(), mid);
        }
        if fm == 0.0 || (fm.abs() < VERTEX_RESIDUAL * 1e-6) {
            break;
        }
        if (fm > 0.0) == lo_positive {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    at(best.1)
}

/// Traces `{K = 0}` and `{det D²K = 0}` on the slice `v₂ = u₁ = 0` at `μ = 0`.
pub fn slice_curves(c: f64, bbox: &Bbox, nx: usize, ny: usize) -> Result<[SliceCurve; 2]> {
    if !(c > 1.5) {
        return Err(Error::InvalidParams(format!("c = {c} must be > 3/2")));
    }
    bbox.validate()?;
    if nx < 2 || ny < 2 {
        return Err(Error::InvalidParams(format!(
            "slice grid {nx}x{ny} too coarse"
        )));
    }
    Ok([
        SliceCurve {
            id: CurveId::Level,
            polylines: contour(|v1, u2| kepler_level_slice(c, v1, u2), bbox, nx, ny),
        },
        SliceCurve {
            id: CurveId::DetZero,
            polylines: contour(|v1, u2| det_hessian_kepler_slice(c, v1, u2), bbox, nx, ny),
        },
    ])
}

fn orient(a: [f64; 2], b: [f64; 2], p: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])
}

/// Intersection point of two closed segments, if any (collinear overlaps
/// report the first shared endpoint).
pub fn segment_intersection(p: ([f64; 2], [f64; 2]), q: ([f64; 2], [f64; 2])) -> Option<[f64; 2]> {
    let (a, b) = p;
    let (c, d) = q;
    if a[0].max(b[0]) < c[0].min(d[0])
        || c[0].max(d[0]) < a[0].min(b[0])
        || a[1].max(b[1]) < c[1].min(d[1])
        || c[1].max(d[1]) < a[1].min(b[1])
    {
        return None;
    }
    let (d1, d2) = (orient(c, d, a), orient(c, d, b));
    let (d3, d4) = (orient(a, b, c), orient(a, b, d));
    if d1 * d2 > 0.0 || d3 * d4 > 0.0 {
        return None;
    }
    let denom = d1 - d2;
    if denom == 0.0 {
        // collinear
        return [a, b].into_iter().find(|&e| {
            e[0] >= c[0].min(d[0])
                && e[0] <= c[0].max(d[0])
                && e[1] >= c[1].min(d[1])
                && e[1] <= c[1].max(d[1])
        });
    }
    let s = d1 / denom;
    Some([a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])])
}

/// All pairwise segment intersections between two curves.
pub fn intersections(a: &SliceCurve, b: &SliceCurve) -> Vec<[f64; 2]> {
    let bs: Vec<_> = b.segments().collect();
    a.segments()
        .flat_map(|sa| {
            bs.iter()
                .filter_map(move |&sb| segment_intersection(sa, sb))
        })
        .collect()
}
