//! Hamiltonians of the planar restricted three-body problem in rotating
//! coordinates and their Levi-Civita regularization.
//!
//! The earth sits at the origin and the sun at `1`; `mu` is the sun's share
//! of the total primary mass. The physical Hamiltonian is
//!
//! ```text
//! H(q, p) = |p|²/2 + <p, iq> - <p, iμ> - (1-μ)/|q| - μ/|q-1|
//! ```
//!
//! and at the energy level `-c` the regularized Hamiltonian in Levi-Civita
//! coordinates `q = 2v²`, `p = u / conj(v)` is
//!
//! ```text
//! K(v, u) = |v|² (H + c)
//!         = |u|²/2 + 2|v|²<u, iv> - μ Im(uv) - (1-μ)/2 - μ|v|²/|2v²-1| + c|v|²
//! ```
//!
//! Coordinates are always ordered `(v₁, v₂, u₁, u₂)`.
//!
//! # Time convention
//!
//! The Levi-Civita map is conformally symplectic with factor 4
//! (`Re(dq ∧ dp̄) = 4 Re(dv ∧ dū)`). The vector field returned by
//! [`hamiltonian_vector_field`] uses the canonical pairs `(vᵢ, uᵢ)` and drops
//! that factor, so its flow is a constant rescaling of the true regularized
//! time. All periods reported by the flow module are in this time.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg::SymMat4;
use crate::scalar::Scalar;

/// Evaluations reject `|2v² - 1|` below this value (sun collision).
pub const SUN_COLLISION_GUARD: f64 = 1e-9;

/// Distance to a primary below which `H` is treated as singular.
pub const PRIMARY_COLLISION_GUARD: f64 = 1e-12;

/// Mass ratio and energy parameter; the energy level is `H = -c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params<T> {
    mu: T,
    c: T,
}

impl<T: Scalar> Params<T> {
    pub fn new(mu: T, c: T) -> Result<Self> {
        if !mu.is_finite() || !c.is_finite() {
            return Err(Error::InvalidParams(format!(
                "non-finite mu = {mu}, c = {c}"
            )));
        }
        if mu < T::zero() || mu > T::one() {
            return Err(Error::InvalidParams(format!("mu = {mu} outside [0, 1]")));
        }
        Ok(Self { mu, c })
    }

    #[inline]
    pub fn mu(&self) -> T {
        self.mu
    }

    #[inline]
    pub fn c(&self) -> T {
        self.c
    }

    /// Checks the regime where the earth component is a compact,
    /// nondegenerate surface: `mu < 1` and `c > 3/2`.
    pub fn require_compact(&self) -> Result<()> {
        if self.mu >= T::one() {
            return Err(Error::InvalidParams(format!(
                "mu = {} must be < 1 (the earth component collapses to the origin)",
                self.mu
            )));
        }
        if self.c <= T::lit(1.5) {
            return Err(Error::InvalidParams(format!(
                "c = {} must be > 3/2",
                self.c
            )));
        }
        Ok(())
    }

    pub fn cast<S: Scalar>(&self) -> Params<S> {
        Params {
            mu: S::lit(self.mu.as_f64()),
            c: S::lit(self.c.as_f64()),
        }
    }
}

/// Point of the unregularized phase space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint<T> {
    pub q: [T; 2],
    pub p: [T; 2],
}

/// Point `(v, u)` of the regularized phase space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegPoint<T> {
    pub v: [T; 2],
    pub u: [T; 2],
}

impl<T> RegPoint<T> {
    pub fn new(v: [T; 2], u: [T; 2]) -> Self {
        Self { v, u }
    }
}

impl<T: Scalar> RegPoint<T> {
    pub fn origin() -> Self {
        Self {
            v: [T::zero(); 2],
            u: [T::zero(); 2],
        }
    }

    pub fn from_array(z: [T; 4]) -> Self {
        Self {
            v: [z[0], z[1]],
            u: [z[2], z[3]],
        }
    }

    pub fn to_array(&self) -> [T; 4] {
        [self.v[0], self.v[1], self.u[0], self.u[1]]
    }

    /// The deck transformation of the double cover, `(v, u) -> (-v, -u)`.
    pub fn negated(&self) -> Self {
        Self {
            v: [-self.v[0], -self.v[1]],
            u: [-self.u[0], -self.u[1]],
        }
    }

    /// The anti-symplectic reversor `ρ(v, u) = (v̄, -ū)`.
    pub fn reflected(&self) -> Self {
        Self {
            v: [self.v[0], -self.v[1]],
            u: [-self.u[0], self.u[1]],
        }
    }

    /// `|2v² - 1|`, the regularized distance to the sun.
    pub fn sun_distance(&self) -> T {
        let v = cx(self.v);
        (v * v * T::lit(2.0) - T::one()).norm()
    }
}

/// Tangent vector `(v̂, û)` in `(v₁, v₂, u₁, u₂)` order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tangent4<T> {
    pub dv: [T; 2],
    pub du: [T; 2],
}

impl<T: Scalar> Tangent4<T> {
    pub fn zero() -> Self {
        Self {
            dv: [T::zero(); 2],
            du: [T::zero(); 2],
        }
    }

    pub fn from_array(h: [T; 4]) -> Self {
        Self {
            dv: [h[0], h[1]],
            du: [h[2], h[3]],
        }
    }

    pub fn to_array(&self) -> [T; 4] {
        [self.dv[0], self.dv[1], self.du[0], self.du[1]]
    }

    pub fn basis(i: usize) -> Self {
        let mut h = [T::zero(); 4];
        h[i] = T::one();
        Self::from_array(h)
    }

    pub fn norm(&self) -> T {
        self.to_array()
            .iter()
            .fold(T::zero(), |acc, &x| acc + x * x)
            .sqrt()
    }
}

#[inline]
pub(crate) fn cx<T: Scalar>(a: [T; 2]) -> Complex<T> {
    Complex::new(a[0], a[1])
}

/// Real Euclidean inner product on ℂ ≅ ℝ².
#[inline]
fn dot<T: Scalar>(a: Complex<T>, b: Complex<T>) -> T {
    a.re * b.re + a.im * b.im
}

#[inline]
fn times_i<T: Scalar>(a: Complex<T>) -> Complex<T> {
    Complex::new(-a.im, a.re)
}

fn guarded_sun_distance<T: Scalar>(v: Complex<T>) -> Result<T> {
    let d = (v * v * T::lit(2.0) - T::one()).norm();
    if !(d >= T::lit(SUN_COLLISION_GUARD)) {
        return Err(Error::Singular {
            what: "|2v^2 - 1| below guard",
            value: d.as_f64(),
        });
    }
    Ok(d)
}

pub fn hamiltonian<T: Scalar>(params: &Params<T>, z: &PhasePoint<T>) -> Result<T> {
    let mu = params.mu;
    let q = cx(z.q);
    let p = cx(z.p);
    let r_earth = q.norm();
    let r_sun = (q - T::one()).norm();
    let guard = T::lit(PRIMARY_COLLISION_GUARD);
    if !(r_earth >= guard) {
        return Err(Error::Singular {
            what: "q at the earth",
            value: r_earth.as_f64(),
        });
    }
    if !(r_sun >= guard) {
        return Err(Error::Singular {
            what: "q at the sun",
            value: r_sun.as_f64(),
        });
    }
    let half = T::lit(0.5);
    Ok(half * p.norm_sqr() + dot(p, times_i(q))
        - p.im * mu
        - (T::one() - mu) / r_earth
        - mu / r_sun)
}

pub fn regularized_hamiltonian<T: Scalar>(params: &Params<T>, z: &RegPoint<T>) -> Result<T> {
    let (mu, c) = (params.mu, params.c);
    let v = cx(z.v);
    let u = cx(z.u);
    let d = guarded_sun_distance(v)?;
    let r2 = v.norm_sqr();
    let two = T::lit(2.0);
    let half = T::lit(0.5);
    Ok(half * u.norm_sqr() + two * r2 * dot(u, times_i(v))
        - mu * (u * v).im
        - (T::one() - mu) * half
        - mu * r2 / d
        + c * r2)
}

/// The 2:1 Levi-Civita map `(v, u) -> (q, p) = (2v², u / v̄)`.
pub fn levi_civita<T: Scalar>(z: &RegPoint<T>) -> Result<PhasePoint<T>> {
    let v = cx(z.v);
    if v.norm_sqr() == T::zero() {
        return Err(Error::Singular {
            what: "v = 0 in momentum map",
            value: 0.0,
        });
    }
    let q = v * v * T::lit(2.0);
    let p = cx(z.u) / v.conj();
    Ok(PhasePoint {
        q: [q.re, q.im],
        p: [p.re, p.im],
    })
}

/// Directional derivative `DK(v, u)[(v̂, û)]`.
fn directional_derivative<T: Scalar>(
    params: &Params<T>,
    z: &RegPoint<T>,
    h: &Tangent4<T>,
) -> Result<T> {
    let (mu, c) = (params.mu, params.c);
    let v = cx(z.v);
    let u = cx(z.u);
    let vh = cx(h.dv);
    let uh = cx(h.du);
    let d = guarded_sun_distance(v)?;
    let (two, four, eight) = (T::lit(2.0), T::lit(4.0), T::lit(8.0));
    let r2 = v.norm_sqr();
    let v_vh = dot(v, vh);

    // D(|v|²/|2v²-1|) v̂
    let sun = -r2 / (d * d * d) * (eight * r2 * v_vh - four * (v * vh).re) + two * v_vh / d;

    Ok(dot(u, uh)
        + two * c * v_vh
        + four * v_vh * dot(u, times_i(v))
        + two * r2 * (dot(uh, times_i(v)) + dot(u, times_i(vh)))
        - mu * (uh * v + u * vh).im
        - mu * sun)
}

/// Second derivative `D²K(v, u)[(v̂, û), (v̂, û)]` as a quadratic form.
fn hessian_quadratic_form<T: Scalar>(
    params: &Params<T>,
    z: &RegPoint<T>,
    h: &Tangent4<T>,
) -> Result<T> {
    let (mu, c) = (params.mu, params.c);
    let v = cx(z.v);
    let u = cx(z.u);
    let vh = cx(h.dv);
    let uh = cx(h.du);
    let d = guarded_sun_distance(v)?;
    let d3 = d * d * d;
    let d5 = d3 * d * d;
    let (two, four, eight) = (T::lit(2.0), T::lit(4.0), T::lit(8.0));
    let r2 = v.norm_sqr();
    let vh2 = vh.norm_sqr();
    let v_vh = dot(v, vh);
    let vbar_vh = dot(v.conj(), vh);
    let lever = two * r2 * v_vh - vbar_vh;

    let kepler = uh.norm_sqr()
        + two * c * vh2
        + four * dot(u, times_i(v)) * vh2
        + eight * v_vh * dot(u, times_i(vh))
        + eight * v_vh * dot(uh, times_i(v))
        + four * r2 * dot(uh, times_i(vh));
    let sun = -two * mu * (uh * vh).im - T::lit(48.0) * mu * r2 / d5 * lever * lever
        + four * mu * r2 / d3 * (four * v_vh * v_vh + two * r2 * vh2 - (vh * vh).re)
        + T::lit(16.0) * mu * v_vh / d3 * lever
        - two * mu * vh2 / d;
    Ok(kepler + sun)
}

/// Gradient of `K` in `(v₁, v₂, u₁, u₂)` order.
pub fn grad_k<T: Scalar>(params: &Params<T>, z: &RegPoint<T>) -> Result<Tangent4<T>> {
    let mut g = [T::zero(); 4];
    for (i, gi) in g.iter_mut().enumerate() {
        *gi = directional_derivative(params, z, &Tangent4::basis(i))?;
    }
    Ok(Tangent4::from_array(g))
}

/// Hessian of `K`, assembled by polarizing the second-derivative quadratic
/// form over the basis directions and their pairwise sums.
pub fn hessian_k<T: Scalar>(params: &Params<T>, z: &RegPoint<T>) -> Result<SymMat4<T>> {
    let mut diag = [T::zero(); 4];
    for (i, di) in diag.iter_mut().enumerate() {
        *di = hessian_quadratic_form(params, z, &Tangent4::basis(i))?;
    }
    let half = T::lit(0.5);
    let mut m = SymMat4::zeros();
    for i in 0..4 {
        m.set(i, i, diag[i]);
        for j in (i + 1)..4 {
            let mut h = [T::zero(); 4];
            h[i] = T::one();
            h[j] = T::one();
            let q = hessian_quadratic_form(params, z, &Tangent4::from_array(h))?;
            m.set(i, j, half * (q - diag[i] - diag[j]));
        }
    }
    Ok(m)
}

/// Canonical equations for the pairs `(vᵢ, uᵢ)`: `v̇ = ∂K/∂u`, `u̇ = -∂K/∂v`.
/// The conformal factor 4 is dropped; see the module docs.
pub fn hamiltonian_vector_field<T: Scalar>(
    params: &Params<T>,
    z: &RegPoint<T>,
) -> Result<Tangent4<T>> {
    let g = grad_k(params, z)?;
    Ok(Tangent4 {
        dv: g.du,
        du: [-g.dv[0], -g.dv[1]],
    })
}

/// `U(q) = -|q-μ|²/2 - (1-μ)/|q| - μ/|q-1|`.
///
/// `H(q, p) = |p + i(q-μ)|²/2 + U(q)`, so the critical points of `H` are
/// `p = -i(q-μ)` over the critical points of `U`, with equal values.
pub fn effective_potential<T: Scalar>(params: &Params<T>, q: [T; 2]) -> Result<T> {
    let mu = params.mu;
    let q = cx(q);
    let [earth, sun] = primary_inverse_distances(mu, q)?;
    let shifted = q - mu;
    Ok(-T::lit(0.5) * shifted.norm_sqr() - (T::one() - mu) * earth - mu * sun)
}

pub fn effective_potential_gradient<T: Scalar>(params: &Params<T>, q: [T; 2]) -> Result<[T; 2]> {
    let mu = params.mu;
    let q = cx(q);
    let [earth, sun] = primary_inverse_distances(mu, q)?;
    let g = -(q - mu)
        + q * ((T::one() - mu) * earth * earth * earth)
        + (q - T::one()) * (mu * sun * sun * sun);
    Ok([g.re, g.im])
}

/// `1/|q|` and `1/|q − 1|`; a massless primary contributes zero and is not a singularity.
fn primary_inverse_distances<T: Scalar>(mu: T, q: Complex<T>) -> Result<[T; 2]> {
    let guard = T::lit(PRIMARY_COLLISION_GUARD);
    let inverse = |r: T, mass: T, what: &'static str| {
        if mass == T::zero() {
            Ok(T::zero())
        } else if r >= guard {
            Ok(T::one() / r)
        } else {
            Err(Error::Singular {
                what,
                value: r.as_f64(),
            })
        }
    };
    Ok([
        inverse(q.norm(), T::one() - mu, "q at the earth")?,
        inverse((q - T::one()).norm(), mu, "q at the sun")?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(mu: f64, c: f64) -> Params<f64> {
        Params::new(mu, c).unwrap()
    }

    #[test]
    fn hamiltonian_examples() {
        let h = |mu, q, pp| hamiltonian(&p(mu, 2.0), &PhasePoint { q, p: pp }).unwrap();
        assert_eq!(h(0.0, [-1.0, 0.0], [0.0, 0.0]), -1.0);
        assert_eq!(h(0.5, [0.5, 0.0], [0.0, 0.0]), -2.0);
        // 1/2 + <p, iq> - 1 with <p, iq> = p2 q1 - p1 q2 = -1
        assert!((h(0.0, [0.0, 1.0], [1.0, 0.0]) + 1.5).abs() < 1e-15);
    }

    #[test]
    fn hamiltonian_rejects_collisions() {
        let z = PhasePoint {
            q: [0.0, 0.0],
            p: [1.0, 0.0],
        };
        assert!(matches!(
            hamiltonian(&p(0.3, 2.0), &z),
            Err(Error::Singular { .. })
        ));
        let z = PhasePoint {
            q: [1.0, 0.0],
            p: [1.0, 0.0],
        };
        assert!(matches!(
            hamiltonian(&p(0.3, 2.0), &z),
            Err(Error::Singular { .. })
        ));
    }

    #[test]
    fn params_validation() {
        assert!(Params::new(-0.1, 2.0).is_err());
        assert!(Params::new(1.1, 2.0).is_err());
        assert!(Params::new(f64::NAN, 2.0).is_err());
        assert!(p(1.0, 2.0).require_compact().is_err());
        assert!(p(0.5, 1.5).require_compact().is_err());
        assert!(p(0.5, 1.6).require_compact().is_ok());
    }

    #[test]
    fn regularized_examples() {
        let z = RegPoint::origin();
        assert_eq!(regularized_hamiltonian(&p(0.5, 7.0), &z).unwrap(), -0.25);
        let z = RegPoint::new([0.5, 0.0], [0.0, 0.0]);
        assert!(regularized_hamiltonian(&p(0.0, 2.0), &z).unwrap().abs() < 1e-15);
    }

    #[test]
    fn regularized_matches_physical_hamiltonian() {
        let params = p(0.7, 1.7);
        let z = RegPoint::new([0.3, 0.1], [0.2, -0.4]);
        let k = regularized_hamiltonian(&params, &z).unwrap();
        let w = levi_civita(&z).unwrap();
        let r2 = 0.3f64 * 0.3 + 0.1 * 0.1;
        let expected = r2 * (hamiltonian(&params, &w).unwrap() + params.c());
        assert!((k - expected).abs() <= 1e-12 * expected.abs());
    }

    #[test]
    fn singular_guard() {
        let v = [0.5f64.sqrt(), 0.0];
        let z = RegPoint::new(v, [0.1, 0.2]);
        assert!(matches!(
            regularized_hamiltonian(&p(0.3, 2.0), &z),
            Err(Error::Singular { .. })
        ));
        assert!(grad_k(&p(0.3, 2.0), &z).is_err());
        assert!(hessian_k(&p(0.3, 2.0), &z).is_err());
    }

    #[test]
    fn levi_civita_examples() {
        let w = levi_civita(&RegPoint::new([1.0, 0.0], [0.0, 1.0])).unwrap();
        assert_eq!(w.q, [2.0, 0.0]);
        assert_eq!(w.p, [0.0, 1.0]);
        let w = levi_civita(&RegPoint::new([0.0f64, 1.0], [1.0, 0.0])).unwrap();
        assert!((w.q[0] + 2.0).abs() < 1e-15 && w.q[1].abs() < 1e-15);
        assert!(w.p[0].abs() < 1e-15 && (w.p[1] - 1.0).abs() < 1e-15);
        assert!(levi_civita(&RegPoint::new([0.0, 0.0], [1.0, 0.0])).is_err());
    }

    #[test]
    fn gradient_examples() {
        for (mu, c) in [(0.0, 1.6), (0.4, 2.0), (1.0, 3.0)] {
            let g = grad_k(&p(mu, c), &RegPoint::origin()).unwrap();
            assert_eq!(g.to_array(), [0.0; 4]);
        }
        let g = grad_k(&p(0.0, 2.0), &RegPoint::new([0.3, 0.0], [0.0, 0.0])).unwrap();
        let expected = [1.2, 0.0, 0.0, 0.054];
        for (a, b) in g.to_array().iter().zip(expected) {
            assert!((a - b).abs() < 1e-15, "{a} vs {b}");
        }
        let f =
            hamiltonian_vector_field(&p(0.0, 2.0), &RegPoint::new([0.3, 0.0], [0.0, 0.0])).unwrap();
        let expected = [0.0, 0.054, -1.2, 0.0];
        for (a, b) in f.to_array().iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn hessian_at_origin() {
        let m = hessian_k(&p(0.0, 1.9), &RegPoint::origin()).unwrap();
        let expected = [
            [3.8, 0.0, 0.0, 0.0],
            [0.0, 3.8, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ];
        assert_eq!(m.to_dense(), expected);

        let m = hessian_k(&p(0.3, 2.0), &RegPoint::origin())
            .unwrap()
            .to_dense();
        for i in 0..4 {
            for j in 0..4 {
                let expected = match (i, j) {
                    (0, 0) | (1, 1) => 3.4,
                    (2, 2) | (3, 3) => 1.0,
                    (0, 3) | (3, 0) | (1, 2) | (2, 1) => -0.3,
                    _ => 0.0,
                };
                assert!(
                    (m[i][j] - expected).abs() < 1e-14,
                    "({i},{j}) = {}",
                    m[i][j]
                );
            }
        }
    }

    #[test]
    fn effective_potential_examples() {
        assert_eq!(
            effective_potential(&p(0.0, 2.0), [-1.0, 0.0]).unwrap(),
            -1.5
        );
        assert_eq!(effective_potential(&p(0.5, 2.0), [0.5, 0.0]).unwrap(), -2.0);
        for k in 0..16 {
            let th = k as f64 * std::f64::consts::TAU / 16.0;
            let q = [th.cos(), th.sin()];
            let params = p(0.0, 2.0);
            assert!((effective_potential(&params, q).unwrap() + 1.5).abs() < 1e-14);
            let g = effective_potential_gradient(&params, q).unwrap();
            assert!(g[0].hypot(g[1]) < 1e-14);
        }
        assert!(effective_potential(&p(0.2, 2.0), [1.0, 0.0]).is_err());
    }

    #[test]
    fn critical_value_matches_hamiltonian() {
        // H at p = -i(q - μ) equals U(q).
        let params = p(0.3, 2.0);
        let q = [0.2, -0.7];
        let pp = [q[1], -(q[0] - 0.3)];
        let h = hamiltonian(&params, &PhasePoint { q, p: pp }).unwrap();
        let u = effective_potential(&params, q).unwrap();
        assert!((h - u).abs() < 1e-14);
    }

    #[test]
    fn single_precision_agrees() {
        let params = p(0.7, 1.7);
        let z = RegPoint::new([0.3, 0.1], [0.2, -0.4]);
        let k64 = regularized_hamiltonian(&params, &z).unwrap();
        let z32 = RegPoint::new([0.3f32, 0.1], [0.2, -0.4]);
        let k32 = regularized_hamiltonian(&params.cast::<f32>(), &z32).unwrap();
        assert!((k64 - k32 as f64).abs() < 1e-6);
        let h32 = hessian_k(&params.cast::<f32>(), &z32).unwrap();
        let h64 = hessian_k(&params, &z).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert!((h64.get(i, j) - h32.get(i, j) as f64).abs() < 1e-4);
            }
        }
    }
}
