use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{invalid, OpticsError, Result};
use crate::grid::GridSpec;
use crate::scalar::{wrap_angle, Real};

/// Complex amplitude samples on a [`GridSpec`], row-major with x fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField<T> {
    grid: GridSpec<T>,
    data: Vec<Complex<T>>,
}

/// Real-valued samples (phases, intensities, potentials) on a [`GridSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct RealField<T> {
    grid: GridSpec<T>,
    data: Vec<T>,
}

impl<T: Real> ComplexField<T> {
    pub fn new(grid: GridSpec<T>, data: Vec<Complex<T>>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(OpticsError::GridMismatch(format!(
                "{} samples for a {}x{} grid",
                data.len(),
                grid.nx,
                grid.ny
            )));
        }
        if let Some(idx) = data.iter().position(|c| !(c.re.is_finite() && c.im.is_finite())) {
            let (x, y) = grid.xy(idx);
            return Err(OpticsError::NonFinite {
                x: x.to_f64_lossy(),
                y: y.to_f64_lossy(),
            });
        }
        Ok(Self { grid, data })
    }

    pub(crate) fn from_raw(grid: GridSpec<T>, data: Vec<Complex<T>>) -> Self {
        debug_assert_eq!(data.len(), grid.len());
        Self { grid, data }
    }

    pub fn zeros(grid: GridSpec<T>) -> Self {
        Self::from_raw(grid, vec![Complex::new(T::zero(), T::zero()); grid.len()])
    }

    /// Evaluates `f(x, y)` at every sample; per-pixel parallel, order preserved.
    pub fn from_fn<F>(grid: GridSpec<T>, f: F) -> Self
    where
        F: Fn(T, T) -> Complex<T> + Sync,
    {
        let data = (0..grid.len())
            .into_par_iter()
            .map(|idx| {
                let (x, y) = grid.xy(idx);
                f(x, y)
            })
            .collect();
        Self::from_raw(grid, data)
    }

    /// Unit-modulus field `exp(i phase)`.
    pub fn from_phase(phase: &RealField<T>) -> Self {
        let data = phase
            .data
            .par_iter()
            .map(|&p| Complex::from_polar(T::one(), p))
            .collect();
        Self::from_raw(phase.grid, data)
    }

    #[inline]
    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    #[inline]
    pub fn samples(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn into_samples(self) -> Vec<Complex<T>> {
        self.data
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> Complex<T> {
        self.data[self.grid.index(i, j)]
    }

    /// Replaces the grid metadata (same sample count), e.g. after a transform rescales pitch.
    pub fn with_grid(self, grid: GridSpec<T>) -> Result<Self> {
        if grid.nx != self.grid.nx || grid.ny != self.grid.ny {
            return Err(OpticsError::GridMismatch("with_grid changes sample count".into()));
        }
        Ok(Self { grid, data: self.data })
    }

    /// Sum of |psi|^2 over samples (no pixel-area weight), accumulated in index order.
    pub fn norm_sqr(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, c| acc + c.norm_sqr())
    }

    pub fn l2_norm(&self) -> T {
        self.norm_sqr().sqrt()
    }

    /// Sum of |psi|^2 dx dy: the quantity conserved by the propagators.
    pub fn power(&self) -> T {
        self.norm_sqr() * self.grid.pixel_area()
    }

    pub fn intensity(&self) -> RealField<T> {
        RealField::from_raw(self.grid, self.data.par_iter().map(|c| c.norm_sqr()).collect())
    }

    pub fn phase(&self) -> RealField<T> {
        RealField::from_raw(self.grid, self.data.par_iter().map(|c| c.arg()).collect())
    }

    pub fn map<F>(&self, f: F) -> Self
    where
        F: Fn(usize, Complex<T>) -> Complex<T> + Sync,
    {
        let data = self
            .data
            .par_iter()
            .enumerate()
            .map(|(idx, &c)| f(idx, c))
            .collect();
        Self::from_raw(self.grid, data)
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        self.map(|_, c| c * s)
    }

    /// Relative L2 distance `||self - other|| / ||other||`.
    pub fn relative_l2_error(&self, other: &Self) -> Result<T> {
        self.grid.ensure_same(&other.grid, "relative_l2_error")?;
        let mut num = T::zero();
        let mut den = T::zero();
        for (a, b) in self.data.iter().zip(&other.data) {
            num += (a - b).norm_sqr();
            den += b.norm_sqr();
        }
        if den == T::zero() {
            return Err(OpticsError::Degenerate("reference field is zero".into()));
        }
        Ok((num / den).sqrt())
    }
}

impl<T: Real> RealField<T> {
    pub fn new(grid: GridSpec<T>, data: Vec<T>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(OpticsError::GridMismatch(format!(
                "{} samples for a {}x{} grid",
                data.len(),
                grid.nx,
                grid.ny
            )));
        }
        Ok(Self { grid, data })
    }

    pub(crate) fn from_raw(grid: GridSpec<T>, data: Vec<T>) -> Self {
        debug_assert_eq!(data.len(), grid.len());
        Self { grid, data }
    }

    pub fn from_fn<F>(grid: GridSpec<T>, f: F) -> Self
    where
        F: Fn(T, T) -> T + Sync,
    {
        let data = (0..grid.len())
            .into_par_iter()
            .map(|idx| {
                let (x, y) = grid.xy(idx);
                f(x, y)
            })
            .collect();
        Self::from_raw(grid, data)
    }

    #[inline]
    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[T] {
        &self.data
    }

    pub fn into_values(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> T {
        self.data[self.grid.index(i, j)]
    }

    pub fn to_complex(&self) -> ComplexField<T> {
        let data = self.data.iter().map(|&v| Complex::new(v, T::zero())).collect();
        ComplexField::from_raw(self.grid, data)
    }

    pub fn max(&self) -> T {
        self.data.iter().fold(T::neg_infinity(), |m, &v| m.max(v))
    }

    pub fn min(&self) -> T {
        self.data.iter().fold(T::infinity(), |m, &v| m.min(v))
    }

    pub fn sum(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, &v| acc + v)
    }
}

/// Harmonic phase parameters `A r^m cos(m (theta - theta0))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultipolePhaseSpec<T> {
    pub m: T,
    pub amplitude: T,
    pub theta0: T,
}

impl<T: Real> MultipolePhaseSpec<T> {
    pub fn new(m: T, amplitude: T, theta0: T) -> Result<Self> {
        if !m.is_finite() {
            return Err(invalid("m", "must be finite"));
        }
        if !amplitude.is_finite() {
            return Err(invalid("A", "must be finite"));
        }
        if !theta0.is_finite() {
            return Err(invalid("theta0", "must be finite"));
        }
        Ok(Self {
            m,
            amplitude,
            theta0: wrap_angle(theta0),
        })
    }

    /// Phase at polar position; `r = 0` evaluates to zero for `m <= 0`.
    #[inline]
    pub fn phase_at(&self, r: T, theta: T) -> T {
        if self.amplitude == T::zero() {
            return T::zero();
        }
        if r == T::zero() {
            return T::zero();
        }
        let radial = if self.m == T::zero() {
            T::one()
        } else {
            (self.m * r.ln()).exp()
        };
        self.amplitude * radial * (self.m * (theta - self.theta0)).cos()
    }
}

/// Amplitude profile of an input beam.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Envelope<T> {
    /// Unit amplitude for `r_inner <= r <= r_outer`.
    Annulus { r_inner: T, r_outer: T },
    /// `exp(-((r - ring_radius)/waist)^2)` for `r >= r_inner`.
    Gaussian {
        ring_radius: T,
        waist: T,
        r_inner: T,
    },
}

impl<T: Real> Envelope<T> {
    pub fn annulus(r_inner: T, r_outer: T) -> Result<Self> {
        let e = Envelope::Annulus { r_inner, r_outer };
        e.validate()?;
        Ok(e)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Envelope::Annulus { r_inner, r_outer } => {
                if !(r_inner >= T::zero() && r_outer > r_inner && r_outer.is_finite()) {
                    return Err(invalid("envelope", "need 0 <= r_inner < r_outer"));
                }
            }
            Envelope::Gaussian {
                ring_radius,
                waist,
                r_inner,
            } => {
                if !(ring_radius >= T::zero() && waist > T::zero() && r_inner >= T::zero()) {
                    return Err(invalid("envelope", "need ring_radius >= 0, waist > 0, r_inner >= 0"));
                }
            }
        }
        Ok(())
    }

    pub fn inner_radius(&self) -> T {
        match *self {
            Envelope::Annulus { r_inner, .. } | Envelope::Gaussian { r_inner, .. } => r_inner,
        }
    }

    /// Radius beyond which the amplitude is zero (or below 1e-16 for Gaussians).
    pub fn support_radius(&self) -> T {
        match *self {
            Envelope::Annulus { r_outer, .. } => r_outer,
            Envelope::Gaussian {
                ring_radius, waist, ..
            } => ring_radius + T::of(6.1) * waist,
        }
    }

    #[inline]
    pub fn amplitude(&self, r: T) -> T {
        match *self {
            Envelope::Annulus { r_inner, r_outer } => {
                if r >= r_inner && r <= r_outer {
                    T::one()
                } else {
                    T::zero()
                }
            }
            Envelope::Gaussian {
                ring_radius,
                waist,
                r_inner,
            } => {
                if r < r_inner {
                    T::zero()
                } else {
                    let d = (r - ring_radius) / waist;
                    (-d * d).exp()
                }
            }
        }
    }
}

/// Closed-form input beam, evaluable anywhere (used by the stationary-phase evaluator).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AnalyticBeam<T> {
    Plane { envelope: Envelope<T> },
    Vortex { l: i32, envelope: Envelope<T> },
    Multipole {
        spec: MultipolePhaseSpec<T>,
        envelope: Envelope<T>,
    },
}

impl<T: Real> AnalyticBeam<T> {
    pub fn envelope(&self) -> &Envelope<T> {
        match self {
            AnalyticBeam::Plane { envelope }
            | AnalyticBeam::Vortex { envelope, .. }
            | AnalyticBeam::Multipole { envelope, .. } => envelope,
        }
    }

    pub fn value(&self, x: T, y: T) -> Complex<T> {
        let r = x.hypot(y);
        let amp = self.envelope().amplitude(r);
        if amp == T::zero() {
            return Complex::new(T::zero(), T::zero());
        }
        let phase = match *self {
            AnalyticBeam::Plane { .. } => T::zero(),
            AnalyticBeam::Vortex { l, .. } => {
                if r == T::zero() {
                    return Complex::new(T::zero(), T::zero());
                }
                T::from_i32(l).expect("i32 fits float") * y.atan2(x)
            }
            AnalyticBeam::Multipole { spec, .. } => {
                if r == T::zero() {
                    return Complex::new(T::zero(), T::zero());
                }
                spec.phase_at(r, y.atan2(x))
            }
        };
        Complex::from_polar(amp, phase)
    }

    /// Samples the beam, with the same validation as the dedicated constructors.
    pub fn sample(&self, grid: GridSpec<T>) -> Result<ComplexField<T>> {
        match *self {
            AnalyticBeam::Plane { envelope } => {
                envelope.validate()?;
                Ok(ComplexField::from_fn(grid, |x, y| self.value(x, y)))
            }
            AnalyticBeam::Vortex { envelope, .. } => {
                envelope.validate()?;
                if let Envelope::Annulus { r_outer, .. } = envelope {
                    check_aperture(&grid, r_outer)?;
                }
                Ok(ComplexField::from_fn(grid, |x, y| self.value(x, y)))
            }
            AnalyticBeam::Multipole { spec, envelope } => make_multipole_beam(grid, &spec, &envelope),
        }
    }
}

fn check_aperture<T: Real>(grid: &GridSpec<T>, radius: T) -> Result<()> {
    let half = grid.half_extent();
    if radius > half {
        return Err(OpticsError::ClippedAperture {
            radius: radius.to_f64_lossy(),
            half_extent: half.to_f64_lossy(),
        });
    }
    Ok(())
}

/// `exp(i (kx x + ky y))`.
pub fn make_plane_wave<T: Real>(grid: GridSpec<T>, tilt: [T; 2]) -> ComplexField<T> {
    let [kx, ky] = tilt;
    ComplexField::from_fn(grid, |x, y| Complex::from_polar(T::one(), kx * x + ky * y))
}

/// Annular vortex `exp(i l theta)`; the origin sample is zero.
pub fn make_vortex<T: Real>(
    grid: GridSpec<T>,
    l: i32,
    r_inner: T,
    r_outer: T,
) -> Result<ComplexField<T>> {
    let env = Envelope::annulus(r_inner, r_outer)?;
    check_aperture(&grid, r_outer)?;
    let lt = T::from_i32(l).expect("i32 fits float");
    Ok(ComplexField::from_fn(grid, |x, y| {
        let r = x.hypot(y);
        if r == T::zero() {
            return Complex::new(T::zero(), T::zero());
        }
        Complex::from_polar(env.amplitude(r), lt * y.atan2(x))
    }))
}

/// Input beam `envelope(r) exp(i A r^m cos(m (theta - theta0)))`.
pub fn make_multipole_beam<T: Real>(
    grid: GridSpec<T>,
    spec: &MultipolePhaseSpec<T>,
    envelope: &Envelope<T>,
) -> Result<ComplexField<T>> {
    envelope.validate()?;
    if spec.m < T::zero() && envelope.inner_radius() == T::zero() {
        return Err(invalid(
            "envelope",
            "m < 0 is singular at the origin; use an inner radius > 0",
        ));
    }
    if let Envelope::Annulus { r_outer, .. } = envelope {
        check_aperture(&grid, *r_outer)?;
    }
    Ok(ComplexField::from_fn(grid, |x, y| {
        let r = x.hypot(y);
        let amp = envelope.amplitude(r);
        if amp == T::zero() || r == T::zero() {
            return Complex::new(T::zero(), T::zero());
        }
        Complex::from_polar(amp, spec.phase_at(r, y.atan2(x)))
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> GridSpec<f64> {
        GridSpec::square(n, 1e-8).unwrap()
    }

    #[test]
    fn zero_tilt_plane_wave_is_unity() {
        let f = make_plane_wave(grid(16), [0.0, 0.0]);
        assert!(f.samples().iter().all(|c| *c == Complex::new(1.0, 0.0)));
        assert_eq!(f.l2_norm(), 16.0);
    }

    #[test]
    fn tilted_plane_wave_has_unit_modulus() {
        let g = grid(32);
        let f = make_plane_wave(g, [std::f64::consts::PI / g.dx * 1e-3, 0.0]);
        assert!(f.samples().iter().all(|c| (c.norm() - 1.0).abs() < 1e-15));
    }

    #[test]
    fn vortex_rejects_clipped_aperture() {
        let g = grid(32);
        assert!(matches!(
            make_vortex(g, 2, 0.0, 1e-6),
            Err(OpticsError::ClippedAperture { .. })
        ));
        assert!(make_vortex(g, 2, 5e-8, 1e-8).is_err());
    }

    #[test]
    fn vortex_origin_is_zero() {
        let g = grid(32);
        let f = make_vortex(g, 1, 0.0, 1.2e-7).unwrap();
        assert_eq!(f.at(16, 16), Complex::new(0.0, 0.0));
        assert!((f.at(20, 16).norm() - 1.0).abs() < 1e-15);
        assert_eq!(f.at(0, 0), Complex::new(0.0, 0.0));
    }

    #[test]
    fn negative_order_needs_inner_radius() {
        let g = grid(32);
        let spec = MultipolePhaseSpec::new(-1.0, 1e-7, 0.0).unwrap();
        let env = Envelope::annulus(0.0, 1e-7).unwrap();
        assert!(make_multipole_beam(g, &spec, &env).is_err());
        let env = Envelope::annulus(2e-8, 1e-7).unwrap();
        let f = make_multipole_beam(g, &spec, &env).unwrap();
        // along +x: phase = A / r
        let r = g.x(20);
        assert!((f.at(20, 16).arg() - 1e-7 / r).abs() < 1e-12);
    }

    #[test]
    fn theta0_normalized() {
        let s = MultipolePhaseSpec::new(2.0, 1.0, 3.0 * std::f64::consts::PI).unwrap();
        assert!((s.theta0 - std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn generic_over_f32() {
        let g = GridSpec::<f32>::square(8, 1.0).unwrap();
        let f = make_plane_wave(g, [0.0, 0.0]);
        assert_eq!(f.l2_norm(), 8.0);
    }
}
