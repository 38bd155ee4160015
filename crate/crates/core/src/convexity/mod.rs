//! Convexity of the bounded earth component of `{K = 0}`.

pub mod certify;
pub mod domain;
pub mod kepler;
pub mod scan;
pub mod slice;
pub mod witness;

pub use certify::{certify, ConvexityCertificate, Verdict};
pub use domain::{
    boundary_radius, fiber, fiber_discriminant, fiber_offset, fiber_shift, hill_region_test,
    momentum_magnitude, sample_filled_domain, Fiber, FilledDomain, Resolution,
};
pub use kepler::{det_hessian_kepler, det_hessian_kepler_slice, kepler_level_slice};
pub use scan::{bisect_mu0, linspace, scan, scan_cell, CellVerdict, ScanCell, ScanGrid};
pub use slice::{intersections, slice_curves, Bbox, CurveId, SliceCurve};
pub use witness::{nonconvexity_witness, nonconvexity_witness_with, Witness};
