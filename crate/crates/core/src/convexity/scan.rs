//! Grids of certificates over the `(c, μ)` plane.

use std::fmt;

use rayon::prelude::*;

use super::certify::{certify, Verdict};
use super::domain::Resolution;
use crate::dynamics::Params;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum CellVerdict {
    Certified(Verdict),
    InvalidParams(String),
}

impl CellVerdict {
    pub fn is_convex(&self) -> bool {
        matches!(self, Self::Certified(Verdict::NumericallyConvex))
    }
}

impl fmt::Display for CellVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Certified(v) => v.fmt(f),
            Self::InvalidParams(_) => f.write_str("InvalidParams"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanCell {
    pub c: f64,
    pub mu: f64,
    pub lambda_min: Option<f64>,
    pub verdict: CellVerdict,
}

/// Certifies one `(c, μ)` pair, folding errors into the verdict.
pub fn scan_cell(c: f64, mu: f64, resolution: Resolution) -> ScanCell {
    let outcome = Params::new(mu, c).and_then(|p| certify(&p, resolution));
    match outcome {
        Ok(cert) => ScanCell {
            c,
            mu,
            lambda_min: cert.lambda_min,
            verdict: CellVerdict::Certified(cert.verdict),
        },
        Err(e) => ScanCell {
            c,
            mu,
            lambda_min: None,
            verdict: CellVerdict::InvalidParams(e.to_string()),
        },
    }
}

/// Certificates on `c_values × mu_values`, row major in `c`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanGrid {
    pub c_values: Vec<f64>,
    pub mu_values: Vec<f64>,
    pub cells: Vec<ScanCell>,
}

impl ScanGrid {
    pub fn cell(&self, ic: usize, imu: usize) -> &ScanCell {
        &self.cells[ic * self.mu_values.len() + imu]
    }

    /// Heuristic convexity threshold for row `ic`: the smallest tested `μ`
    /// such that every tested `μ' >= μ` is numerically convex. Monotonicity
    /// in `μ` is not known, so this only summarizes the grid.
    pub fn mu0_hat(&self, ic: usize) -> Option<f64> {
        let mut order: Vec<usize> = (0..self.mu_values.len()).collect();
        order.sort_by(|&a, &b| self.mu_values[b].total_cmp(&self.mu_values[a]));
        let mut hat = None;
        for j in order {
            if !self.cell(ic, j).verdict.is_convex() {
                break;
            }
            hat = Some(self.mu_values[j]);
        }
        hat
    }
}

/// `n` evenly spaced values from `lo` to `hi` inclusive (`lo` alone for `n = 1`).
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// Certifies every cell; cells run concurrently and never abort the scan.
pub fn scan(c_values: &[f64], mu_values: &[f64], resolution: Resolution) -> Result<ScanGrid> {
    resolution.validate()?;
    if c_values.is_empty() || mu_values.is_empty() {
        return Err(Error::InvalidParams("scan ranges must be nonempty".into()));
    }
    let pairs: Vec<(f64, f64)> = c_values
        .iter()
        .flat_map(|&c| mu_values.iter().map(move |&mu| (c, mu)))
        .collect();
    let cells = pairs
        .par_iter()
        .map(|&(c, mu)| scan_cell(c, mu, resolution))
        .collect();
    Ok(ScanGrid {
        c_values: c_values.to_vec(),
        mu_values: mu_values.to_vec(),
        cells,
    })
}

/// Heuristic bisection for the convexity threshold at fixed `c`: assumes a
/// single transition between a non-convex `lo` and a convex `hi`.
pub fn bisect_mu0(
    c: f64,
    mut lo: f64,
    mut hi: f64,
    steps: usize,
    resolution: Resolution,
) -> Result<f64> {
    let convex = |mu: f64| -> Result<bool> {
        let p = Params::new(mu, c)?;
        Ok(certify(&p, resolution)?.verdict == Verdict::NumericallyConvex)
    };
    if !convex(hi)? {
        return Err(Error::InvalidParams(format!(
            "mu = {hi} is not numerically convex at c = {c}"
        )));
    }
    if convex(lo)? {
        return Ok(lo);
    }
    for _ in 0..steps {
        let mid = 0.5 * (lo + hi);
        if convex(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}
