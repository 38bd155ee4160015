use convexity_atlas::convexity::{boundary_radius, fiber, momentum_magnitude};
use convexity_atlas::dynamics::{levi_civita, regularized_hamiltonian, Params, RegPoint};
use convexity_atlas::flow::{
    default_bracket, find_symmetric_orbit, integrate, integrate_fixed_step, return_map,
    section_crossings, Branch, HalfAxis, Orientation, PeriodicOrbit, Section, Tolerances,
};

fn surface_point(params: &Params<f64>, angle: f64, s: f64, phi: f64) -> RegPoint<f64> {
    let r = boundary_radius(params, angle).unwrap().unwrap() * s;
    let v = [r * angle.cos(), r * angle.sin()];
    RegPoint::new(v, fiber(params, v).unwrap().unwrap().point(1.0, phi))
}

fn max_diff(a: &RegPoint<f64>, b: &RegPoint<f64>) -> f64 {
    a.to_array()
        .iter()
        .zip(b.to_array())
        .fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

fn kepler_orbit() -> (Params<f64>, PeriodicOrbit) {
    let params = Params::new(0.0, 1.8).unwrap();
    let bracket = default_bracket(&params, Branch::Upper, HalfAxis::Negative).unwrap();
    (
        params,
        find_symmetric_orbit(&params, bracket, 1e-10, Branch::Upper).unwrap(),
    )
}

#[test]
fn energy_is_conserved_and_tightening_helps() {
    let params = Params::new(0.9, 1.8).unwrap();
    let z = surface_point(&params, 1.0, 0.6, 2.0);
    let traj = integrate(&params, &z, 100.0, Tolerances::default()).unwrap();
    assert!(traj.max_residual() < 1e-8);
    assert!(traj.samples.windows(2).all(|w| w[0].t < w[1].t));

    let loose = Tolerances {
        rtol: 1e-7,
        atol: 1e-9,
        drift: 1e-4,
    };
    let half = Tolerances {
        rtol: 5e-8,
        atol: 5e-10,
        ..loose
    };
    let a = integrate(&params, &z, 50.0, loose).unwrap().max_residual();
    let b = integrate(&params, &z, 50.0, half).unwrap().max_residual();
    assert!(b < a, "{b:e} !< {a:e}");
}

#[test]
fn reversibility() {
    let params = Params::new(0.3, 2.0).unwrap();
    for (angle, s, phi) in [(0.3, 0.5, 1.0), (2.0, 0.8, 4.0), (4.5, 0.2, 0.1)] {
        let z = surface_point(&params, angle, s, phi);
        for t in [0.5, 3.0, 10.0] {
            let a = integrate(&params, &z.reflected(), t, Tolerances::default())
                .unwrap()
                .last()
                .z
                .reflected();
            let b = integrate(&params, &z, -t, Tolerances::default())
                .unwrap()
                .last()
                .z;
            assert!(max_diff(&a, &b) < 1e-8);
        }
    }
}

#[test]
fn double_cover_consistency() {
    let params = Params::new(0.1, 1.9).unwrap();
    let z = surface_point(&params, 0.7, 0.7, 2.5);
    for t in [1.0, 10.0] {
        let a = integrate(&params, &z, t, Tolerances::default())
            .unwrap()
            .last()
            .z;
        let b = integrate(&params, &z.negated(), t, Tolerances::default())
            .unwrap()
            .last()
            .z;
        assert!(max_diff(&a, &b.negated()) < 1e-8);
    }
}

#[test]
fn fifth_order_convergence() {
    let params = Params::new(0.2, 1.9).unwrap();
    let z = surface_point(&params, 2.0, 0.5, 1.0);
    let span = 0.8;
    let h = span / 8.0;
    let reference = integrate_fixed_step(&params, &z, h / 10.0, 80).unwrap();
    let coarse = max_diff(
        &integrate_fixed_step(&params, &z, h, 8).unwrap(),
        &reference,
    );
    let fine = max_diff(
        &integrate_fixed_step(&params, &z, h / 2.0, 16).unwrap(),
        &reference,
    );
    let ratio = coarse / fine;
    assert!(
        ratio > 32.0 / 4.0 && ratio < 32.0 * 4.0,
        "error ratio {ratio}"
    );
}

#[test]
fn circular_orbit_crossings_are_periodic() {
    let (params, orbit) = kepler_orbit();
    let section = Section::coordinate(1, 0.0, Orientation::Either).unwrap();
    let c = section_crossings(
        &params,
        &orbit.z0,
        6.0 * orbit.period,
        &section,
        Tolerances::default(),
    )
    .unwrap();
    assert!(c.tangential.is_empty());
    let times: Vec<f64> = c.events.iter().map(|e| e.t).collect();
    assert!(times.len() >= 10);
    let gaps: Vec<f64> = times.windows(2).map(|w| w[1] - w[0]).collect();
    for g in &gaps {
        assert!((g - gaps[0]).abs() < 1e-8, "{gaps:?}");
    }
    assert!((gaps[0] - orbit.period / 2.0).abs() < 1e-8);
    for e in &c.events {
        assert!(section.residual(&e.z).abs() < 1e-10);
    }
}

#[test]
fn orbit_is_a_fixed_point_of_the_return_map() {
    let (params, orbit) = kepler_orbit();
    let section = Section::coordinate(1, 0.0, Orientation::Positive).unwrap();
    let v2dot = convexity_atlas::dynamics::hamiltonian_vector_field(&params, &orbit.z0)
        .unwrap()
        .dv[1];
    assert!(v2dot > 0.0);
    let images = return_map(&params, &section, &orbit.z0, 3, Tolerances::default()).unwrap();
    for img in images {
        assert!(max_diff(&img, &orbit.z0) < 1e-6);
    }
}

#[test]
fn nearby_iterates_stay_on_the_surface() {
    let (params, orbit) = kepler_orbit();
    let v1 = orbit.z0.v[0] + 0.01;
    let u2 = momentum_magnitude(&params, [v1, 0.0], [0.0, 1.0])
        .unwrap()
        .unwrap();
    let z = RegPoint::new([v1, 0.0], [0.0, u2]);
    let section = Section::coordinate(1, 0.0, Orientation::Positive).unwrap();
    let images = return_map(&params, &section, &z, 50, Tolerances::default()).unwrap();
    assert_eq!(images.len(), 50);
    for img in &images {
        assert!(regularized_hamiltonian(&params, img).unwrap().abs() < 1e-8);
        assert!(section.residual(img).abs() < 1e-10);
    }
}

#[test]
fn orbit_is_reversor_symmetric_and_round() {
    let (params, orbit) = kepler_orbit();
    assert!(orbit.closure_error < 1e-6);
    assert!(regularized_hamiltonian(&params, &orbit.z0).unwrap().abs() < 1e-10);
    let r0 = {
        let q = levi_civita(&orbit.z0).unwrap().q;
        q[0].hypot(q[1])
    };
    for k in 1..8 {
        let t = orbit.period * k as f64 / 8.0;
        let a = integrate(&params, &orbit.z0, t, Tolerances::default())
            .unwrap()
            .last()
            .z;
        let b = integrate(&params, &orbit.z0, orbit.period - t, Tolerances::default())
            .unwrap()
            .last()
            .z;
        assert!(max_diff(&a, &b.reflected()) < 1e-8);
        let q = levi_civita(&a).unwrap().q;
        assert!((q[0].hypot(q[1]) - r0).abs() < 1e-8);
    }
}

#[test]
fn return_trace_matches_the_epicyclic_rotation() {
    // Nearby Kepler ellipses are fixed in the inertial frame, so the return
    // map (two revolutions in the rotating frame) is a rotation by
    // 4πω/(ω - 1) with ω = r^(-3/2).
    let (_, orbit) = kepler_orbit();
    let q = levi_civita(&orbit.z0).unwrap().q;
    let omega = q[0].hypot(q[1]).powf(-1.5);
    let expected = 2.0 * (4.0 * std::f64::consts::PI * omega / (omega - 1.0)).cos();
    assert!(
        (orbit.return_trace - expected).abs() < 1e-4,
        "{} vs {expected}",
        orbit.return_trace
    );
}

#[test]
fn lower_branch_is_the_mirror_image() {
    let (params, upper) = kepler_orbit();
    let x = -upper.z0.v[0];
    let lower = find_symmetric_orbit(&params, (x - 0.01, x + 0.01), 1e-10, Branch::Lower).unwrap();
    assert!(max_diff(&lower.z0, &upper.z0.negated()) < 1e-8);
    assert!((lower.period - upper.period).abs() < 1e-8);
}

#[test]
fn shooting_errors() {
    let params = Params::new(0.0, 1.8).unwrap();
    assert!(find_symmetric_orbit(&params, (-0.3, -0.2), 1e-10, Branch::Upper).is_err());
    assert!(find_symmetric_orbit(&params, (-0.9, -0.8), 1e-10, Branch::Upper).is_err());
    assert!(find_symmetric_orbit(
        &Params::new(1.0, 1.8).unwrap(),
        (-0.1, 0.1),
        1e-10,
        Branch::Upper
    )
    .is_err());
}

#[test]
fn second_circular_family_on_the_positive_axis() {
    let c = 1.8;
    let params = Params::new(0.0, c).unwrap();
    let bracket = default_bracket(&params, Branch::Upper, HalfAxis::Positive).unwrap();
    let orbit = find_symmetric_orbit(&params, bracket, 1e-10, Branch::Upper).unwrap();
    assert!(orbit.closure_error < 1e-6);
    let q = levi_civita(&orbit.z0).unwrap().q;
    let r = q[0].hypot(q[1]);
    // positive root of 2s³ + 2cs² - 1
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if 2.0 * mid.powi(3) + 2.0 * c * mid * mid - 1.0 < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    assert!((r - lo * lo).abs() < 1e-6, "{r} vs {}", lo * lo);
    // retrograde: the epicycle advances by 4πω/(ω + 1)
    let omega = r.powf(-1.5);
    let expected = 2.0 * (4.0 * std::f64::consts::PI * omega / (omega + 1.0)).cos();
    assert!(
        (orbit.return_trace - expected).abs() < 1e-4,
        "{} vs {expected}",
        orbit.return_trace
    );
}
