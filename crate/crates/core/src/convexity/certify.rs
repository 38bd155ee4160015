//! Sampled positive-definiteness certificates for `D²K` on `W`.

use std::cmp::Ordering;
use std::fmt;

use rayon::prelude::*;

use super::domain::{sample_filled_domain, Resolution};
use crate::dynamics::{hessian_k, Params, RegPoint};
use crate::error::{Error, Result};
use crate::linalg::min_eigenvalue;

/// `lambda_min` inside `[-DEGENERACY_BAND, DEGENERACY_BAND]` is reported as degenerate.
pub const DEGENERACY_BAND: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    NumericallyConvex,
    WitnessNonConvex,
    Degenerate,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::NumericallyConvex => "NumericallyConvex",
            Self::WitnessNonConvex => "WitnessNonConvex",
            Self::Degenerate => "Degenerate",
        })
    }
}

impl Verdict {
    pub fn from_lambda(lambda_min: f64) -> Self {
        if lambda_min > DEGENERACY_BAND {
            Self::NumericallyConvex
        } else if lambda_min < -DEGENERACY_BAND {
            Self::WitnessNonConvex
        } else {
            Self::Degenerate
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvexityCertificate {
    pub params: Params<f64>,
    pub resolution: Resolution,
    /// Smallest Hessian eigenvalue over all samples; `None` for an empty domain.
    pub lambda_min: Option<f64>,
    /// Sample attaining `lambda_min` (lowest sample index on ties).
    pub argmin: Option<RegPoint<f64>>,
    pub verdict: Verdict,
    /// Reason for a degenerate verdict on an empty domain.
    pub note: Option<String>,
}

#[derive(Debug, Clone, Copy)]
struct Best {
    lambda: f64,
    index: usize,
    z: RegPoint<f64>,
}

impl Best {
    fn better(self, other: Self) -> Self {
        match self
            .lambda
            .total_cmp(&other.lambda)
            .then(self.index.cmp(&other.index))
        {
            Ordering::Greater => other,
            _ => self,
        }
    }
}

/// Minimum eigenvalue of `D²K` over the filled-domain samples.
///
/// The reduction is a min with ties broken by sample index, so the result
/// does not depend on how rayon schedules the base points.
pub fn certify(params: &Params<f64>, resolution: Resolution) -> Result<ConvexityCertificate> {
    let domain = sample_filled_domain(params, resolution)?;
    if domain.is_empty() {
        return Ok(ConvexityCertificate {
            params: *params,
            resolution,
            lambda_min: None,
            argmin: None,
            verdict: Verdict::Degenerate,
            note: domain.degeneracy().map(str::to_owned),
        });
    }

    let per_base: Vec<Result<Best>> = (0..domain.bases().len())
        .into_par_iter()
        .map(|b| {
            let mut best: Option<Best> = None;
            for (index, z) in domain.fiber_samples(b) {
                let lambda = min_eigenvalue(&hessian_k(params, &z)?);
                if lambda.is_nan() {
                    return Err(Error::Singular {
                        what: "NaN eigenvalue",
                        value: f64::NAN,
                    });
                }
                let cand = Best { lambda, index, z };
                best = Some(best.map_or(cand, |b| b.better(cand)));
            }
            best.ok_or_else(|| Error::InvalidParams("empty fiber".into()))
        })
        .collect();

    let mut best: Option<Best> = None;
    for r in per_base {
        let cand = r?;
        best = Some(best.map_or(cand, |b| b.better(cand)));
    }
    let best = best.expect("non-empty domain");
    Ok(ConvexityCertificate {
        params: *params,
        resolution,
        lambda_min: Some(best.lambda),
        argmin: Some(best.z),
        verdict: Verdict::from_lambda(best.lambda),
        note: None,
    })
}
