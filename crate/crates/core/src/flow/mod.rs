//! The regularized flow on `{K = 0}`: adaptive integration, hyperplane
//! sections with return maps, and reversible shooting for symmetric
//! periodic orbits. Times are in the convention of
//! [`crate::dynamics::hamiltonian_vector_field`].

mod integrator;
mod orbit;
mod section;

pub use integrator::{
    integrate, integrate_fixed_step, Tolerances, Trajectory, TrajectorySample, SINGULARITY_GUARD,
    SURFACE_TOLERANCE,
};
pub use orbit::*;
pub use section::{
    return_map, section_crossings, CrossingEvent, Crossings, Orientation, Section,
    CROSSING_RESIDUAL, RETURN_TIME_CAP, TRANSVERSALITY_FLOOR,
};
