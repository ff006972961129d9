use std::f64::consts::PI;

use conformal_optics::constants::{BOHR_MAGNETON, MU_0};
use conformal_optics::electrostatics::*;
use conformal_optics::sorter::dipole_moment_to_amplitude;
use conformal_optics::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn ring_of_sources(n: usize, radius: f64, seed: u64) -> Vec<electrostatics::PointCharge<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let th = -PI + 2.0 * PI * (i as f64 + 0.5) / n as f64;
            let r = radius * (1.0 + rng.gen_range(-0.01..0.01));
            PointCharge {
                x: r * th.cos(),
                y: r * th.sin(),
                q: rng.gen_range(-1.0..1.0),
            }
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    /// The clustered evaluation agrees with the plain double sum.
    #[test]
    fn log_sum_fast_matches_direct(seed in 0u64..10_000, px in -3.0f64..3.0, py in -3.0f64..3.0) {
        let sum = LogSum::new(ring_of_sources(3000, 1.0, seed));
        if let (Some(fast), Some(slow)) = (sum.eval(px, py), sum.direct(px, py)) {
            let scale = sum.sources().iter().map(|s| s.q.abs()).sum::<f64>();
            prop_assert!((fast - slow).abs() <= 1e-11 * scale, "{} vs {}", fast, slow);
        }
    }

    /// Moving the reference radius shifts the potential by the recorded gauge constant.
    #[test]
    fn gauge_covariance(rho1 in 1e-7f64..1e-4, rho2 in 1e-7f64..1e-4) {
        let g = Grid::square(24, 2e-7).unwrap();
        let target = HarmonicTarget { m: 0.0, amplitude: 1.0e3, delta: 0.0 };
        let model = build_charge_model(&target, 1e-6, 1e-8).unwrap();
        let p1 = projected_potential_2d(&model, &g, rho1).unwrap();
        let p2 = projected_potential_2d(&model, &g, rho2).unwrap();
        let shift = p2.gauge_constant - p1.gauge_constant;
        for idx in 0..g.len() {
            if p1.masked.keep()[idx] {
                continue;
            }
            let d = p2.values.values()[idx] - p1.values.values()[idx];
            prop_assert!((d - shift).abs() <= 1e-9 * shift.abs().max(1e-3));
        }
    }

    #[test]
    fn models_are_neutral_or_carry_the_log_charge(m in prop::sample::select(vec![-3.0, -2.0, -1.0, 0.0, 2.0, 3.0, 0.5, 2.0 / 3.0, 4.0 / 3.0])) {
        let target = HarmonicTarget { m, amplitude: 2.0, delta: 0.0 };
        let model = build_charge_model(&target, 3e-6, 1e-8).unwrap();
        let q = model.net_charge();
        let eps0 = constants::EPSILON_0;
        if m == 0.0 {
            prop_assert!((q + 2.0 * PI * eps0 * 2.0).abs() < 1e-12 * eps0);
        } else {
            // discretised charges sum to the analytic net charge; the ring's midpoint rule is
            // only second order when cos(m theta) has a kink at theta = pi
            let total: f64 = model.discretize(3e-9, 8192).iter().map(|c| c.q).sum();
            let scale: f64 = model.discretize(3e-9, 8192).iter().map(|c| c.q.abs()).sum();
            prop_assert!((total - q).abs() <= 1e-6 * scale);
        }
    }
}

/// Far from a point multipole the 2D potential reproduces the target harmonic up to an
/// affine map.
#[test]
fn point_quadrupole_far_field_matches_target() {
    let g = Grid::square(96, 1e-7).unwrap();
    let target = HarmonicTarget { m: -2.0, amplitude: 5e-12, delta: 0.4 };
    let model = build_charge_model(&target, 3e-6, 2e-9).unwrap();
    let pot = projected_potential_2d(&model, &g, 1e-6).unwrap();
    let mask = Mask::annulus(&g, 1e-6, 4e-6);
    let s = phase_match_score(&pot, &target.sample(&g), &mask).unwrap();
    assert!(s.correlation > 0.9999, "{s:?}");
    assert!((s.scale - 1.0).abs() < 1e-3, "{s:?}");
}

#[test]
fn unsupported_orders_are_rejected() {
    let t = |m: f64, delta: f64| HarmonicTarget { m, amplitude: 1.0, delta };
    assert!(matches!(build_charge_model(&t(1.0, 0.0), 1e-6, 1e-8), Err(OpticsError::InvalidParameter { .. })));
    assert!(matches!(build_charge_model(&t(-0.5, 0.0), 1e-6, 1e-8), Err(OpticsError::Unsupported(_))));
    assert!(matches!(build_charge_model(&t(0.5, 0.3), 1e-6, 1e-8), Err(OpticsError::Unsupported(_))));
    assert!(build_charge_model(&t(2.0, 0.3), 1e-6, 1e-8).is_ok());
}

/// z-integration of the vector potential of an in-plane point dipole, done numerically
/// with the substitution z = rho tan(t).
#[test]
fn dipole_amplitude_matches_vector_potential_quadrature() {
    let moment = 5e6;
    let m_si = moment * BOHR_MAGNETON;
    // dipole along x, observe at (0, rho): A_z = mu0/(4 pi) m rho / (rho^2 + z^2)^{3/2}
    let rho = 1.7e-6;
    let n = 20_000;
    let h = PI / n as f64;
    let integrand = |t: f64| {
        let z = rho * t.tan();
        let dz = rho / t.cos().powi(2);
        MU_0 / (4.0 * PI) * m_si * rho / (rho * rho + z * z).powf(1.5) * dz
    };
    // midpoint rule over t in (-pi/2, pi/2)
    let integral: f64 = (0..n).map(|i| integrand(-PI / 2.0 + (i as f64 + 0.5) * h)).sum::<f64>() * h;
    let phase = constants::ELEMENTARY_CHARGE / constants::HBAR * integral;
    // A sin(theta - theta_d) / r with theta = pi/2, theta_d = 0
    let expect = dipole_moment_to_amplitude(moment) / rho;
    assert!((phase / expect - 1.0).abs() < 1e-3, "{}", phase / expect);
}

#[test]
fn multipole_constants_match_closed_forms() {
    for (l, c) in [(1, 2.0), (2, 4.0 / 3.0), (3, 16.0 / 15.0)] {
        assert!((multipole_constant(l) - c).abs() < 1e-12);
    }
}

#[test]
fn grid_evaluation_matches_direct_sum() {
    // sources on a ring and a line crossing the grid, including points on the grid itself
    let mut src = ring_of_sources(2000, 2.0, 5);
    src.extend((0..700).map(|i| PointCharge { x: -0.004 * i as f64, y: 0.0, q: 0.5 }));
    let sum = LogSum::new(src);
    let g = Grid::square(160, 0.03).unwrap();
    let vals = sum.eval_grid(&g);
    let scale: f64 = sum.sources().iter().map(|s| s.q.abs()).sum();
    let mut worst: f64 = 0.0;
    for (idx, &fast) in vals.iter().enumerate() {
        let (x, y) = g.xy(idx);
        match (fast, sum.direct(x, y)) {
            (Some(a), Some(b)) => worst = worst.max((a - b).abs()),
            (None, None) => {}
            other => panic!("source detection differs at {idx}: {other:?}"),
        }
    }
    assert!(worst < 1e-11 * scale, "{:e}", worst / scale);
}
