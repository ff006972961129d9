use conformal_optics::*;
use num_complex::Complex;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const LAMBDA: f64 = 1.9687e-12;

fn random_apertured(n: usize, pitch: f64, seed: u64) -> Field {
    let g = Grid::square(n, pitch).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r_max = 0.4 * n as f64 * pitch;
    let data = (0..g.len())
        .map(|idx| {
            let (x, y) = g.xy(idx);
            let (re, im): (f64, f64) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            if x.hypot(y) <= r_max {
                Complex::new(re, im)
            } else {
                Complex::new(0.0, 0.0)
            }
        })
        .collect();
    Field::new(g, data).unwrap()
}

#[test]
fn fft_matches_direct_quadrature_printed_kernel() {
    let beam = Beam::new(LAMBDA).unwrap();
    for seed in 0..3 {
        let psi = random_apertured(64, 2.0e-8, seed);
        let z = 0.37 + 0.1 * seed as f64;
        let fast = fresnel_fft(&psi, z, &beam, Kernel::Printed).unwrap();
        let slow = fresnel_quadrature(
            &psi,
            z,
            &beam,
            fast.grid(),
            Kernel::Printed,
            QuadratureBudget::default(),
        )
        .unwrap();
        let err = fast.relative_l2_error(&slow).unwrap();
        assert!(err < 1e-9, "seed {seed}: {err:e}");
    }
}

#[test]
fn fft_matches_direct_quadrature_fresnel_kernel() {
    let beam = Beam::new(LAMBDA).unwrap();
    let psi = random_apertured(48, 2.0e-8, 7);
    let fast = fresnel_fft(&psi, 0.5, &beam, Kernel::Fresnel).unwrap();
    let slow = fresnel_quadrature(
        &psi,
        0.5,
        &beam,
        fast.grid(),
        Kernel::Fresnel,
        QuadratureBudget::default(),
    )
    .unwrap();
    assert!(fast.relative_l2_error(&slow).unwrap() < 1e-9);
}

#[test]
fn quadrature_budget_is_enforced() {
    let beam = Beam::new(LAMBDA).unwrap();
    let psi = random_apertured(64, 2.0e-8, 1);
    let out = psi.grid().reciprocal(LAMBDA, 0.5);
    let tight = QuadratureBudget {
        max_evaluations: 1000,
        allow_over_budget: false,
    };
    let r = fresnel_quadrature(&psi, 0.5, &beam, &out, Kernel::Printed, tight);
    assert!(matches!(r, Err(OpticsError::BudgetExceeded { .. })));
}

/// A uniform tilted plane wave on the full grid has a closed-form discrete transform:
/// a product of two geometric series.
#[test]
fn tilted_plane_wave_matches_geometric_series() {
    let beam = Beam::new(LAMBDA).unwrap();
    let n = 96;
    let dx = 1.5e-8;
    let g = Grid::square(n, dx).unwrap();
    let z = 0.5;
    let tilt = [3.3e7, -1.7e7];
    let psi = make_plane_wave(g, tilt);
    let out = fresnel_fft(&psi, z, &beam, Kernel::Printed).unwrap();
    let og = *out.grid();
    let k = beam.k;
    let series = |alpha: f64, n: usize, x0: f64, d: f64| {
        // sum_j exp(i alpha (x0 + j d))
        let r = Complex::from_polar(1.0, alpha * d);
        let first = Complex::from_polar(1.0, alpha * x0);
        if (r - 1.0).norm() < 1e-14 {
            return first * n as f64;
        }
        first * (Complex::new(1.0, 0.0) - r.powu(n as u32)) / (Complex::new(1.0, 0.0) - r)
    };
    let x0 = g.x(0);
    let carrier = Complex::from_polar(1.0, beam.carrier_phase(z));
    let pref = carrier / Complex::new(0.0, LAMBDA * z) * dx * dx;
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for j in 0..og.ny {
        for i in 0..og.nx {
            let (u, v) = (og.x(i), og.y(j));
            let expect = pref * series(tilt[0] - k * u / z, n, x0, dx) * series(tilt[1] - k * v / z, n, x0, dx);
            worst = worst.max((out.at(i, j) - expect).norm());
            scale = scale.max(expect.norm());
        }
    }
    assert!(worst / scale < 1e-10, "{:e}", worst / scale);
}

#[test]
fn unitarity_at_1024() {
    let beam = Beam::new(LAMBDA).unwrap();
    let psi = random_apertured(1024, 1.953125e-8, 42);
    let p0 = psi.power();
    for kernel in [Kernel::Printed, Kernel::Fresnel] {
        let out = fresnel_fft(&psi, 0.5, &beam, kernel).unwrap();
        assert!((out.power() / p0 - 1.0).abs() < 1e-12);
    }
    let far = lens_fourier(&psi, 0.5, &beam).unwrap();
    assert!((far.power() / p0 - 1.0).abs() < 1e-12);
}

#[test]
fn zoom_window_reproduces_lens_grid_samples() {
    let beam = Beam::new(LAMBDA).unwrap();
    let psi = random_apertured(32, 2.0e-8, 3);
    let full = lens_fourier(&psi, 0.5, &beam).unwrap();
    let fg = *full.grid();
    // a 5x5 window of natural pitch centred on pixel (20, 11)
    let win = Grid::new(5, 5, fg.dx, fg.dy).unwrap();
    let center = (fg.x(20), fg.y(11));
    let w = lens_fourier_window(&psi, 0.5, &beam, &win, center).unwrap();
    for q in 0..5 {
        for p in 0..5 {
            let a = w.at(p, q);
            let b = full.at(20 + p - 2, 11 + q - 2);
            assert!((a - b).norm() < 1e-10 * b.norm().max(1e-30) + 1e-12 * full.l2_norm());
        }
    }
}

#[test]
fn stationary_phase_free_space_is_exact_for_smooth_input() {
    // with the Fresnel kernel and no plate the saddle is x* = u and the estimate is
    // e^{ikz} psi0(u); check the modulus and carrier on a few samples
    let beam = Beam::new(LAMBDA).unwrap();
    let env = Envelope::annulus(1.0e-6, 4.0e-6).unwrap();
    let input = AnalyticBeam::Vortex { l: 2, envelope: env };
    let out = Grid::square(16, 5.0e-7).unwrap();
    let r = stationary_phase_eval(None, &input, 0.5, &beam, &out, Kernel::Fresnel).unwrap();
    assert_eq!(r.invalid, 0);
    let carrier = Complex::from_polar(1.0, beam.carrier_phase(0.5));
    for idx in 0..out.len() {
        let (u, v) = out.xy(idx);
        let expect = carrier * input.value(u, v);
        assert!((r.field.samples()[idx] - expect).norm() < 1e-9);
    }
}

#[test]
fn stationary_phase_rejects_sector_plate_with_fresnel_kernel() {
    let beam = Beam::new(LAMBDA).unwrap();
    let spec = Sector::transformer(2.0, 4e-6, 2.5e-6, 0.0, 0.5).unwrap();
    let input = AnalyticBeam::Vortex {
        l: 2,
        envelope: Envelope::annulus(1e-6, 4e-6).unwrap(),
    };
    let out = Grid::square(8, 1e-6).unwrap();
    let r = stationary_phase_eval(Some(&spec), &input, 0.5, &beam, &out, Kernel::Fresnel);
    assert!(matches!(r, Err(OpticsError::Unsupported(_))));
}

#[test]
fn single_precision_tracks_double_precision() {
    let psi = random_apertured(64, 2.0e-8, 11);
    let g32 = Grid32::square(64, 2.0e-8).unwrap();
    let psi32 = Field32::new(
        g32,
        psi.samples().iter().map(|c| Complex::new(c.re as f32, c.im as f32)).collect(),
    )
    .unwrap();
    // the carrier e^{ikz} depends on lambda to ~1e-11 relative: use the f32-rounded value
    let lambda32 = LAMBDA as f32;
    let out = fresnel_fft(&psi, 0.5, &Beam::new(lambda32 as f64).unwrap(), Kernel::Fresnel).unwrap();
    let out32 = fresnel_fft(&psi32, 0.5, &BeamParams::<f32>::new(lambda32).unwrap(), Kernel::Fresnel).unwrap();
    let err: f64 = out
        .samples()
        .iter()
        .zip(out32.samples())
        .map(|(a, b)| (a - Complex::new(b.re as f64, b.im as f64)).norm_sqr())
        .sum::<f64>()
        .sqrt()
        / out.samples().iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    // output chirp phases reach ~2e3 rad, so f32 rounding alone costs ~1e-4
    assert!(err < 1e-3, "{err:e}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn propagation_is_linear_and_norm_preserving(
        seed in 0u64..1000,
        z in 0.05f64..2.0,
        alpha_re in -2.0f64..2.0,
        alpha_im in -2.0f64..2.0,
    ) {
        let beam = Beam::new(LAMBDA).unwrap();
        let a = random_apertured(32, 2.0e-8, seed);
        let b = random_apertured(32, 2.0e-8, seed + 1);
        let alpha = Complex::new(alpha_re, alpha_im);
        let sum = Field::new(
            *a.grid(),
            a.samples().iter().zip(b.samples()).map(|(x, y)| x * alpha + y).collect(),
        ).unwrap();
        for kernel in [Kernel::Printed, Kernel::Fresnel] {
            let pa = fresnel_fft(&a, z, &beam, kernel).unwrap();
            let pb = fresnel_fft(&b, z, &beam, kernel).unwrap();
            let ps = fresnel_fft(&sum, z, &beam, kernel).unwrap();
            let combined = Field::new(
                *pa.grid(),
                pa.samples().iter().zip(pb.samples()).map(|(x, y)| x * alpha + y).collect(),
            ).unwrap();
            prop_assert!(ps.relative_l2_error(&combined).unwrap() < 1e-12);
            prop_assert!((pa.power() / a.power() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn pure_phase_plates_preserve_power(seed in 0u64..1000, n in prop::sample::select(vec![2.0, 3.0, -2.0, -3.0, 1.0])) {
        let beam = Beam::new(LAMBDA).unwrap();
        let psi = random_apertured(32, 2.0e-7, seed);
        let spec = Sector::transformer(n, 4e-6, 2.5e-6, 0.3, 0.5).unwrap();
        let plate = sector_transformer_phase(psi.grid(), &spec, &beam).unwrap();
        let out = apply_phase(&psi, &plate).unwrap();
        let origin = psi.grid().index(psi.grid().cx(), psi.grid().cy());
        let lost = psi.samples()[origin].norm_sqr() * psi.grid().pixel_area();
        // only the log plate is singular at the origin, where it blocks the sample
        let expected = if n == 1.0 { psi.power() - lost } else { psi.power() };
        prop_assert!((out.power() / expected - 1.0).abs() < 1e-12);
    }
}
