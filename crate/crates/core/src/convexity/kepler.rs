//! Closed-form `det D²K` for the rotating Kepler problem (`μ = 0`).
//!
//! The polynomial equals `16 det D²K`, i.e. the
//! determinant of the Hessian of `2K`; the constant is checked against the
//! numeric determinant in the tests.

use num_traits::{FromPrimitive, Num};

use crate::dynamics::RegPoint;

fn k<T: FromPrimitive>(n: i64) -> T {
    T::from_i64(n).expect("integer coefficient")
}

/// The degree-8 polynomial in `(v₁, v₂, u₁, u₂, c)`. Works over any
/// ring with integer literals, including exact rationals.
pub fn det_hessian_kepler<T>(c: T, z: &RegPoint<T>) -> T
where
    T: Num + Clone + FromPrimitive,
{
    let [v1, v2] = z.v.clone();
    let [u1, u2] = z.u.clone();
    let p = |x: &T, n: u32| (0..n).fold(T::one(), |acc, _| acc * x.clone());
    let terms: [T; 22] = [
        k::<T>(2304) * p(&v1, 8),
        k::<T>(9216) * p(&v1, 6) * p(&v2, 2),
        k::<T>(-3072) * u2.clone() * p(&v1, 5),
        k::<T>(13824) * p(&v1, 4) * p(&v2, 4),
        k::<T>(-1280) * c.clone() * p(&v1, 4),
        k::<T>(3072) * u1.clone() * p(&v1, 4) * v2.clone(),
        k::<T>(-6144) * u2.clone() * p(&v1, 3) * p(&v2, 2),
        k::<T>(6144) * u1.clone() * p(&v1, 2) * p(&v2, 3),
        k::<T>(-2560) * c.clone() * p(&v1, 2) * p(&v2, 2),
        k::<T>(-256) * p(&u1, 2) * p(&v1, 2),
        k::<T>(9216) * p(&v1, 2) * p(&v2, 6),
        k::<T>(768) * p(&u2, 2) * p(&v1, 2),
        k::<T>(-3072) * u2.clone() * v1.clone() * p(&v2, 4),
        k::<T>(512) * c.clone() * u2.clone() * v1.clone(),
        k::<T>(-2048) * u1.clone() * u2.clone() * v1.clone() * v2.clone(),
        k::<T>(64) * p(&c, 2),
        k::<T>(2304) * p(&v2, 8),
        k::<T>(768) * p(&u1, 2) * p(&v2, 2),
        k::<T>(-512) * c.clone() * u1.clone() * v2.clone(),
        k::<T>(3072) * u1.clone() * p(&v2, 5),
        k::<T>(-1280) * c.clone() * p(&v2, 4),
        k::<T>(-256) * p(&u2, 2) * p(&v2, 2),
    ];
    terms.into_iter().fold(T::zero(), |acc, t| acc + t)
}

/// The polynomial restricted to `v₂ = u₁ = 0`.
pub fn det_hessian_kepler_slice<T>(c: T, v1: T, u2: T) -> T
where
    T: Num + Clone + FromPrimitive,
{
    let p = |x: &T, n: u32| (0..n).fold(T::one(), |acc, _| acc * x.clone());
    k::<T>(2304) * p(&v1, 8)
        - k::<T>(3072) * u2.clone() * p(&v1, 5)
        - k::<T>(1280) * c.clone() * p(&v1, 4)
        + k::<T>(768) * p(&u2, 2) * p(&v1, 2)
        + k::<T>(512) * c.clone() * u2 * v1
        + k::<T>(64) * p(&c, 2)
}

/// `K` at `μ = 0` restricted to `v₂ = u₁ = 0`: `u₂²/2 + 2v₁³u₂ + cv₁² - 1/2`.
pub fn kepler_level_slice<T>(c: T, v1: T, u2: T) -> T
where
    T: Num + Clone + FromPrimitive,
{
    let two = k::<T>(2);
    u2.clone() * u2.clone() / two.clone()
        + two.clone() * v1.clone() * v1.clone() * v1.clone() * u2
        + c * v1.clone() * v1
        - T::one() / two
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_values() {
        let z = RegPoint::new([0.0, 0.0], [0.0, 0.0]);
        assert!((det_hessian_kepler(1.601f64, &z) - 164.044864).abs() < 1e-10);
        let z = RegPoint::new([1.0, 0.0], [0.0, 0.0]);
        assert_eq!(det_hessian_kepler(2.0, &z), 0.0);
    }

    #[test]
    fn slice_restriction_agrees() {
        for (v1, u2, c) in [(0.3f64, -0.7, 1.7), (-0.55, 0.2, 2.4), (0.0, 1.0, 1.601)] {
            let z = RegPoint::new([v1, 0.0], [0.0, u2]);
            let full = det_hessian_kepler(c, &z);
            let slice = det_hessian_kepler_slice(c, v1, u2);
            assert!((full - slice).abs() < 1e-12 * full.abs().max(1.0));
        }
        assert_eq!(det_hessian_kepler_slice(1.9, 0.0, 1.0), 64.0 * 1.9 * 1.9);
        assert_eq!(kepler_level_slice(2.3, 0.0, 1.0), 0.0);
    }
}
