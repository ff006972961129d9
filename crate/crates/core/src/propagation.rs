//! Free-space propagation between planes.
//!
//! Everything is built on the single-step diffraction integral
//! `psi_z(u) = e^{ikz}/(i lambda z) ∫ psi_0(x) K(x, u) dx dy`. The `Printed` kernel is the
//! pure Fourier kernel `exp(-ik x·u/z)`; the `Fresnel` kernel is the paraxial
//! `exp(ik |x - u|^2 / 2z)`, i.e. the same transform with input and output chirps.

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{invalid, OpticsError, Result};
use crate::fft::{centered_dft2, matrix_dft2, Direction};
use crate::field::{AnalyticBeam, ComplexField};
use crate::grid::{BeamParams, GridSpec};
use crate::phase::{analytic_map, HarmonicPlate, SectorTransformSpec};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Kernel {
    /// Pure Fourier kernel without quadratic chirps.
    #[default]
    Printed,
    /// Paraxial Fresnel kernel.
    Fresnel,
}

/// Cost ceiling for [`fresnel_quadrature`], in kernel evaluations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadratureBudget {
    pub max_evaluations: u64,
    pub allow_over_budget: bool,
}

impl Default for QuadratureBudget {
    /// A 128² input onto a 128² output.
    fn default() -> Self {
        Self {
            max_evaluations: 128u64.pow(4),
            allow_over_budget: false,
        }
    }
}

impl QuadratureBudget {
    pub fn unlimited() -> Self {
        Self {
            allow_over_budget: true,
            ..Self::default()
        }
    }
}

/// Pointwise product with a phase plate.
pub fn apply_phase<T: Real>(
    field: &ComplexField<T>,
    plate: &ComplexField<T>,
) -> Result<ComplexField<T>> {
    field.grid().ensure_same(plate.grid(), "apply_phase")?;
    let p = plate.samples();
    Ok(field.map(|idx, c| c * p[idx]))
}

fn check_distance<T: Real>(z: T, name: &'static str) -> Result<()> {
    if z > T::zero() && z.is_finite() {
        Ok(())
    } else {
        Err(invalid(name, "must be positive and finite"))
    }
}

/// `e^{ikz} / (i lambda z)` (carrier omitted when `carrier` is false).
fn prefactor<T: Real>(z: T, beam: &BeamParams<T>, carrier: bool) -> Complex<T> {
    let c = if carrier {
        Complex::from_polar(T::one(), beam.carrier_phase(z))
    } else {
        Complex::new(T::one(), T::zero())
    };
    c / Complex::new(T::zero(), beam.wavelength * z)
}

/// Direct double-sum evaluation of the diffraction integral with pixel-area weights.
pub fn fresnel_quadrature<T: Real>(
    field: &ComplexField<T>,
    z: T,
    beam: &BeamParams<T>,
    out_grid: &GridSpec<T>,
    kernel: Kernel,
    budget: QuadratureBudget,
) -> Result<ComplexField<T>> {
    check_distance(z, "z")?;
    let g = *field.grid();
    let cost = g.len() as u64 * out_grid.len() as u64;
    if cost > budget.max_evaluations && !budget.allow_over_budget {
        return Err(OpticsError::BudgetExceeded {
            cost,
            budget: budget.max_evaluations,
        });
    }
    let pref = prefactor(z, beam, true) * g.pixel_area();
    let k = beam.k;
    let half = T::of(0.5);
    // only nonzero input samples contribute
    let src: Vec<(T, T, Complex<T>)> = field
        .samples()
        .iter()
        .enumerate()
        .filter(|(_, c)| c.re != T::zero() || c.im != T::zero())
        .map(|(idx, &c)| {
            let (x, y) = g.xy(idx);
            (x, y, c)
        })
        .collect();
    let data = (0..out_grid.len())
        .into_par_iter()
        .map(|idx| {
            let (u, v) = out_grid.xy(idx);
            let mut acc = Complex::new(T::zero(), T::zero());
            for &(x, y, c) in &src {
                let ph = match kernel {
                    Kernel::Printed => -k * (x * u + y * v) / z,
                    Kernel::Fresnel => {
                        let (dx, dy) = (x - u, y - v);
                        half * k * (dx * dx + dy * dy) / z
                    }
                };
                acc += c * Complex::from_polar(T::one(), ph);
            }
            acc * pref
        })
        .collect();
    Ok(ComplexField::from_raw(*out_grid, data))
}

fn chirp<T: Real>(grid: &GridSpec<T>, k: T, z: T) -> Vec<Complex<T>> {
    let s = k / (T::of(2.0) * z);
    (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let (x, y) = grid.xy(idx);
            Complex::from_polar(T::one(), s * (x * x + y * y))
        })
        .collect()
}

/// Single-step FFT propagation over `z`; output pitch `lambda z / (N dx)`.
pub fn fresnel_fft<T: Real>(
    field: &ComplexField<T>,
    z: T,
    beam: &BeamParams<T>,
    kernel: Kernel,
) -> Result<ComplexField<T>> {
    check_distance(z, "z")?;
    let g = *field.grid();
    let out_grid = g.reciprocal(beam.wavelength, z);
    let mut buf = field.samples().to_vec();
    if kernel == Kernel::Fresnel {
        let c = chirp(&g, beam.k, z);
        buf.par_iter_mut().zip(c.par_iter()).for_each(|(v, w)| *v *= w);
    }
    let mut out = centered_dft2(&buf, g.nx, g.ny, Direction::Forward);
    let pref = prefactor(z, beam, true) * g.pixel_area();
    match kernel {
        Kernel::Printed => out.par_iter_mut().for_each(|v| *v *= pref),
        Kernel::Fresnel => {
            let c = chirp(&out_grid, beam.k, z);
            out.par_iter_mut()
                .zip(c.par_iter())
                .for_each(|(v, w)| *v = *v * w * pref);
        }
    }
    Ok(ComplexField::from_raw(out_grid, out))
}

/// Ideal-lens far field at the back focal plane: `u = lambda f nu`, power preserving.
pub fn lens_fourier<T: Real>(
    field: &ComplexField<T>,
    f_lens: T,
    beam: &BeamParams<T>,
) -> Result<ComplexField<T>> {
    check_distance(f_lens, "f_lens")?;
    let g = *field.grid();
    let out_grid = g.reciprocal(beam.wavelength, f_lens);
    let pref = prefactor(f_lens, beam, false) * g.pixel_area();
    let mut out = centered_dft2(field.samples(), g.nx, g.ny, Direction::Forward);
    out.par_iter_mut().for_each(|v| *v *= pref);
    Ok(ComplexField::from_raw(out_grid, out))
}

/// Lens far field on an arbitrary window: sample `(p, q)` of the result lies at
/// `(u0 + window.x(p), v0 + window.y(q))`. The returned grid is `window` itself.
pub fn lens_fourier_window<T: Real>(
    field: &ComplexField<T>,
    f_lens: T,
    beam: &BeamParams<T>,
    window: &GridSpec<T>,
    center: (T, T),
) -> Result<ComplexField<T>> {
    check_distance(f_lens, "f_lens")?;
    let g = *field.grid();
    let s = -beam.k / f_lens;
    let table = |n_out: usize, coord_out: &dyn Fn(usize) -> T, n_in: usize, coord_in: &dyn Fn(usize) -> T| {
        (0..n_out)
            .map(|p| {
                let u = coord_out(p);
                (0..n_in)
                    .map(|i| Complex::from_polar(T::one(), s * coord_in(i) * u))
                    .collect::<Vec<_>>()
            })
            .collect::<Vec<_>>()
    };
    let wx = table(window.nx, &|p| center.0 + window.x(p), g.nx, &|i| g.x(i));
    let wy = table(window.ny, &|q| center.1 + window.y(q), g.ny, &|j| g.y(j));
    let pref = prefactor(f_lens, beam, false) * g.pixel_area();
    let mut out = matrix_dft2(field.samples(), g.nx, g.ny, &wx, &wy);
    out.iter_mut().for_each(|v| *v *= pref);
    Ok(ComplexField::from_raw(*window, out))
}

/// Saddle point of the total phase with its Hessian and signature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationaryPointData<T> {
    pub x: T,
    pub y: T,
    /// `d²Phi/dx²`.
    pub a: T,
    /// `d²Phi/dy²`.
    pub b: T,
    /// `d²Phi/dxdy`.
    pub c: T,
    pub sigma: T,
}

impl<T: Real> StationaryPointData<T> {
    /// Applies the signature rule: `sgn(A)` when `AB > C²`, otherwise `-1`. Returns `None`
    /// for a degenerate Hessian (relative tolerance 1e-12).
    pub fn new(x: T, y: T, a: T, b: T, c: T) -> Option<Self> {
        let det = a * b - c * c;
        let scale = (a * a + c * c).max(b * b + c * c);
        if !(scale > T::zero()) || det.abs() <= T::of(1e-12) * scale {
            return None;
        }
        let sigma = if det > T::zero() { a.signum() } else { -T::one() };
        Some(Self {
            x,
            y,
            a,
            b,
            c,
            sigma,
        })
    }

    pub fn det(&self) -> T {
        self.a * self.b - self.c * self.c
    }
}

#[derive(Debug, Clone)]
pub struct StationaryPhaseResult<T> {
    pub field: ComplexField<T>,
    /// Output pixels whose saddle had a degenerate Hessian.
    pub invalid: usize,
}

/// Stationary-phase estimate of the propagated field.
///
/// `plate = None` is free space (only meaningful with the Fresnel kernel, where the saddle
/// is `x* = u`); sector plates are supported with the printed kernel, where the saddles
/// are the preimages of `(f/z)(u, v)` under the plate's sector map. The input beam enters
/// only through its value at the saddle.
pub fn stationary_phase_eval<T: Real>(
    plate: Option<&SectorTransformSpec<T>>,
    input: &AnalyticBeam<T>,
    z: T,
    beam: &BeamParams<T>,
    out_grid: &GridSpec<T>,
    kernel: Kernel,
) -> Result<StationaryPhaseResult<T>> {
    check_distance(z, "z")?;
    let pref = prefactor(z, beam, true);
    let k = beam.k;
    let two_pi_i = Complex::new(T::zero(), T::PI() + T::PI());
    let contribution = |sp: &StationaryPointData<T>, phi: T| {
        let amp = input.value(sp.x, sp.y);
        amp * Complex::from_polar(T::one(), phi) * two_pi_i * sp.sigma / sp.det().abs().sqrt()
    };
    let rows: Vec<(Complex<T>, bool)> = match (plate, kernel) {
        (None, Kernel::Fresnel) => {
            let a = k / z;
            (0..out_grid.len())
                .into_par_iter()
                .map(|idx| {
                    let (u, v) = out_grid.xy(idx);
                    let sp = StationaryPointData::new(u, v, a, a, T::zero()).expect("k/z > 0");
                    (contribution(&sp, T::zero()) * pref, false)
                })
                .collect()
        }
        (None, Kernel::Printed) => {
            // linear total phase: no isolated saddle anywhere
            vec![(Complex::new(T::zero(), T::zero()), true); out_grid.len()]
        }
        (Some(_), Kernel::Fresnel) => {
            return Err(OpticsError::Unsupported(
                "stationary phase with a sector plate requires the printed kernel".into(),
            ))
        }
        (Some(spec), Kernel::Printed) => {
            let hp = HarmonicPlate::from_spec(spec, beam);
            let map = analytic_map(spec);
            let stretch = spec.f / z;
            (0..out_grid.len())
                .into_par_iter()
                .map(|idx| {
                    let (u, v) = out_grid.xy(idx);
                    let mut acc = Complex::new(T::zero(), T::zero());
                    let mut bad = false;
                    for (x, y) in map.preimages(stretch * u, stretch * v) {
                        if input.value(x, y) == Complex::new(T::zero(), T::zero()) {
                            continue;
                        }
                        let (xx, xy, yy) = hp.hessian(x, y);
                        match StationaryPointData::new(x, y, xx, yy, xy) {
                            Some(sp) => {
                                let phi = hp.phase(x, y) - k * (x * u + y * v) / z;
                                acc += contribution(&sp, phi);
                            }
                            None => bad = true,
                        }
                    }
                    (acc * pref, bad)
                })
                .collect()
        }
    };
    let invalid = rows.iter().filter(|(_, b)| *b).count();
    let data = rows.into_iter().map(|(c, _)| c).collect();
    Ok(StationaryPhaseResult {
        field: ComplexField::from_raw(*out_grid, data),
        invalid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::make_plane_wave;

    #[test]
    fn signature_rule() {
        let sp = StationaryPointData::new(0.0, 0.0, 2.0, 3.0, 1.0).unwrap();
        assert_eq!(sp.sigma, 1.0);
        let sp = StationaryPointData::new(0.0, 0.0, -2.0, -3.0, 1.0).unwrap();
        assert_eq!(sp.sigma, -1.0);
        let sp = StationaryPointData::new(0.0, 0.0, 2.0, -3.0, 1.0).unwrap();
        assert_eq!(sp.sigma, -1.0);
        assert!(StationaryPointData::new(0.0, 0.0, 1.0, 1.0, 1.0).is_none());
    }

    #[test]
    fn unit_plate_is_identity() {
        let g = GridSpec::square(8, 1.0).unwrap();
        let f = make_plane_wave(g, [0.3, -0.2]);
        let one = make_plane_wave(g, [0.0, 0.0]);
        assert_eq!(apply_phase(&f, &one).unwrap(), f);
        let other = GridSpec::square(8, 2.0).unwrap();
        assert!(apply_phase(&f, &make_plane_wave(other, [0.0, 0.0])).is_err());
    }

    #[test]
    fn quadrature_refuses_over_budget() {
        let g = GridSpec::square(129, 1e-8).unwrap();
        let beam = BeamParams::new(1e-10).unwrap();
        let f = ComplexField::zeros(g);
        let out = g.reciprocal(beam.wavelength, 0.1);
        let r = fresnel_quadrature(&f, 0.1, &beam, &out, Kernel::Printed, QuadratureBudget::default());
        assert!(matches!(r, Err(OpticsError::BudgetExceeded { .. })));
    }

    #[test]
    fn flat_plate_fresnel_saddle_reproduces_input() {
        let g = GridSpec::square(16, 1e-6).unwrap();
        let beam = BeamParams::new(5e-7).unwrap();
        let input = AnalyticBeam::Plane {
            envelope: crate::field::Envelope::annulus(0.0, 5e-6).unwrap(),
        };
        let z = 0.01234;
        let r = stationary_phase_eval(None, &input, z, &beam, &g, Kernel::Fresnel).unwrap();
        let carrier = Complex::from_polar(1.0, beam.carrier_phase(z));
        for idx in 0..g.len() {
            let (x, y) = g.xy(idx);
            let expect = input.value(x, y) * carrier;
            assert!((r.field.samples()[idx] - expect).norm() < 1e-12);
        }
    }
}
