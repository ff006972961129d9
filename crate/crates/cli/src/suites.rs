//! Invariant suites shared by the `verify` scenario and the acceptance tests.

use conformal_optics::phase::{
    cauchy_riemann_residual, gradient_map, harmonic_convergence, sector_phase_values,
};
use conformal_optics::*;
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::report::Check;

/// Reference design: a = 4 um, b = 2.5 um, f = 50 cm, 300 keV electrons.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlateParams {
    pub a: f64,
    pub b: f64,
    pub f: f64,
    pub lambda: f64,
}

impl Default for PlateParams {
    fn default() -> Self {
        Self {
            a: 4.0e-6,
            b: 2.5e-6,
            f: 0.5,
            lambda: 1.9687e-12,
        }
    }
}

pub const PLATE_FACTORS: [f64; 5] = [2.0, 3.0, -2.0, -3.0, 1.0];

fn tag(n: f64) -> String {
    format!("n={n}")
}

/// Laplacian residual of the transformer plate on `nc`² and `2nc`² grids spanning the same
/// field of view (±4b): second-order convergence and the normalised fine-grid residual.
pub fn harmonicity(p: &PlateParams, n: f64, nc: usize) -> Result<Vec<Check>> {
    let beam = Beam::new(p.lambda)?;
    let coarse = Grid::square(nc, 8.0 * p.b / nc as f64)?;
    let fine = Grid::square(2 * nc, 4.0 * p.b / nc as f64)?;
    let spec = Sector::transformer(n, p.a, p.b, 0.0, p.f)?;
    let pc = sector_phase_values(&coarse, &spec, &beam)?;
    let pf = sector_phase_values(&fine, &spec, &beam)?;
    // away from r = 0, the theta = pi cut and the border
    let mask = Mask::annulus(&coarse, p.b / 2.0, 3.5 * p.b)
        .without_cut(&coarse, 3.0 * coarse.dx)
        .without_border(2);
    let conv = harmonic_convergence(&pc, &pf, &mask)?;
    Ok(vec![
        Check::within(format!("harmonic.{}.convergence_ratio", tag(n)), conv.ratio(), 3.5, 4.5),
        Check::below(
            format!("harmonic.{}.normalized_residual", tag(n)),
            conv.fine.max / conv.fine.scale,
            1e-3,
        ),
    ])
}

/// `(f/k) grad Omega` sampled from the plate against the closed-form sector map.
pub fn map_equivalence(p: &PlateParams, n: f64, size: usize) -> Result<Vec<Check>> {
    let beam = Beam::new(p.lambda)?;
    let g = Grid::square(size, 8.0 * p.b / size as f64)?;
    let mask = Mask::annulus(&g, p.b / 2.0, 3.5 * p.b);
    let spec = Sector::transformer(n, p.a, p.b, 0.25, p.f)?;
    let map = analytic_map(&spec);
    let vf = gradient_map(&HarmonicPlate::from_spec(&spec, &beam), p.f, &beam, &g)?;
    let mut worst: f64 = 0.0;
    for idx in mask.indices() {
        let (x, y) = g.xy(idx);
        let (u, v) = map.eval(x, y);
        worst = worst.max((vf.u[idx] - u).hypot(vf.v[idx] - v) / u.hypot(v));
    }
    Ok(vec![Check::below(format!("map_equivalence.{}.max_rel_error", tag(n)), worst, 1e-9)])
}

/// Outcome of the Cauchy–Riemann suite; the composition's irrotational residual is kept
/// separately because a holomorphic map cannot be a gradient field.
pub struct CauchyRiemannSuite {
    pub checks: Vec<Check>,
    pub composition_irrotational_rel: f64,
}

pub fn cauchy_riemann(p: &PlateParams, size: usize) -> Result<CauchyRiemannSuite> {
    let g = Grid::square(size, 8.0 * p.b / size as f64)?;
    let mask = Mask::annulus(&g, p.b / 2.0, 3.5 * p.b).without_cut(&g, 2.0 * g.dx);
    let mut checks = Vec::new();
    let mut single_worst: f64 = 0.0;
    for n in PLATE_FACTORS {
        let map = analytic_map(&Sector::transformer(n, p.a, p.b, 0.0, p.f)?);
        let r = cauchy_riemann_residual(|x, y| map.eval(x, y), &g, &mask)?;
        single_worst = single_worst.max(r.cauchy_riemann_rel);
        checks.push(Check::below(format!("cauchy_riemann.{}.irrotational_rel", tag(n)), r.irrotational_rel, 1e-6));
        checks.push(Check::below(format!("cauchy_riemann.{}.antiholomorphic_rel", tag(n)), r.cauchy_riemann_rel, 1e-6));
    }
    let s1 = Sector::transformer(-2.0, p.a, p.b, 0.0, p.f)?;
    let s2 = Sector::transformer(0.5, 4.5e-6, 4.0e-6, 0.0, p.f)?;
    let comp = compose_maps(&s1, &s2);
    let r = cauchy_riemann_residual(|x, y| comp.eval(x, y), &g, &mask)?;
    checks.push(Check::above(
        "cauchy_riemann.cascade.antiholomorphic_violation_factor",
        r.cauchy_riemann_rel / single_worst.max(f64::MIN_POSITIVE),
        1e3,
    ));
    // the conjugate of a holomorphic map is anti-holomorphic
    let conj = cauchy_riemann_residual(
        |x, y| {
            let (u, v) = comp.eval(x, y);
            (u, -v)
        },
        &g,
        &mask,
    )?;
    checks.push(Check::below("cauchy_riemann.cascade.holomorphic_rel", conj.cauchy_riemann_rel, 1e-6));
    Ok(CauchyRiemannSuite {
        checks,
        composition_irrotational_rel: r.irrotational_rel,
    })
}

pub fn random_apertured(n: usize, pitch: f64, seed: u64) -> Field {
    let g = Grid::square(n, pitch).expect("valid grid");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r_max = 0.4 * n as f64 * pitch;
    let data = (0..g.len())
        .map(|idx| {
            let (x, y) = g.xy(idx);
            let c = Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            if x.hypot(y) <= r_max {
                c
            } else {
                Complex::new(0.0, 0.0)
            }
        })
        .collect();
    Field::new(g, data).expect("finite samples")
}

/// FFT propagation against the direct double sum on random apertured 64² fields.
pub fn propagator_oracle(p: &PlateParams, seeds: std::ops::Range<u64>) -> Result<Vec<Check>> {
    let beam = Beam::new(p.lambda)?;
    let mut worst: f64 = 0.0;
    for seed in seeds {
        let psi = random_apertured(64, p.b / 64.0, seed);
        let fast = fresnel_fft(&psi, p.f, &beam, Kernel::Printed)?;
        let slow = fresnel_quadrature(&psi, p.f, &beam, fast.grid(), Kernel::Printed, QuadratureBudget::default())?;
        worst = worst.max(fast.relative_l2_error(&slow)?);
    }
    Ok(vec![Check::below("propagator.fft_vs_quadrature.rel_l2", worst, 1e-9)])
}

pub fn unitarity(p: &PlateParams, size: usize) -> Result<Vec<Check>> {
    let beam = Beam::new(p.lambda)?;
    let psi = random_apertured(size, p.b / 128.0, 2024);
    let p0 = psi.power();
    let rel = |out: &Field| (out.power() / p0 - 1.0).abs();
    Ok(vec![
        Check::below("unitarity.fresnel_fft.printed", rel(&fresnel_fft(&psi, p.f, &beam, Kernel::Printed)?), 1e-12),
        Check::below("unitarity.fresnel_fft.fresnel", rel(&fresnel_fft(&psi, p.f, &beam, Kernel::Fresnel)?), 1e-12),
        Check::below("unitarity.lens_fourier", rel(&lens_fourier(&psi, p.f, &beam)?), 1e-12),
    ])
}
