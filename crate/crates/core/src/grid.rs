use crate::error::{OpticsError, Result};
use crate::scalar::Real;

/// Regular sample grid centred on sample `(nx/2, ny/2)` (integer division).
///
/// Sample `(i, j)` sits at `x = (i - nx/2) dx`, `y = (j - ny/2) dy`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec<T> {
    pub nx: usize,
    pub ny: usize,
    pub dx: T,
    pub dy: T,
}

impl<T: Real> GridSpec<T> {
    pub fn new(nx: usize, ny: usize, dx: T, dy: T) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(OpticsError::InvalidGrid(format!(
                "need at least 2x2 samples, got {nx}x{ny}"
            )));
        }
        if !(dx > T::zero() && dy > T::zero() && dx.is_finite() && dy.is_finite()) {
            return Err(OpticsError::InvalidGrid(format!(
                "pixel pitch must be positive and finite, got ({dx:e}, {dy:e})"
            )));
        }
        if u32::try_from(nx).is_err() || u32::try_from(ny).is_err() {
            return Err(OpticsError::InvalidGrid("sample counts must fit in u32".into()));
        }
        Ok(Self { nx, ny, dx, dy })
    }

    /// Square grid with isotropic pitch.
    pub fn square(n: usize, pitch: T) -> Result<Self> {
        Self::new(n, n, pitch, pitch)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn cx(&self) -> usize {
        self.nx / 2
    }

    #[inline]
    pub fn cy(&self) -> usize {
        self.ny / 2
    }

    #[inline]
    pub fn x(&self, i: usize) -> T {
        (T::of_usize(i) - T::of_usize(self.cx())) * self.dx
    }

    #[inline]
    pub fn y(&self, j: usize) -> T {
        (T::of_usize(j) - T::of_usize(self.cy())) * self.dy
    }

    #[inline]
    pub fn xy(&self, idx: usize) -> (T, T) {
        (self.x(idx % self.nx), self.y(idx / self.nx))
    }

    #[inline]
    pub fn polar(&self, idx: usize) -> (T, T) {
        let (x, y) = self.xy(idx);
        (x.hypot(y), y.atan2(x))
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    /// Nearest sample index for a physical position, if inside the grid.
    pub fn locate(&self, x: T, y: T) -> Option<(usize, usize)> {
        let fi = (x / self.dx).round() + T::of_usize(self.cx());
        let fj = (y / self.dy).round() + T::of_usize(self.cy());
        if fi < T::zero() || fj < T::zero() {
            return None;
        }
        let (i, j) = (fi.to_usize()?, fj.to_usize()?);
        (i < self.nx && j < self.ny).then_some((i, j))
    }

    /// Largest radius whose circle stays inside the sampled region.
    pub fn half_extent(&self) -> T {
        let hx = T::of_usize(self.nx - 1 - self.cx()) * self.dx;
        let hy = T::of_usize(self.ny - 1 - self.cy()) * self.dy;
        hx.min(hy)
    }

    #[inline]
    pub fn pixel_area(&self) -> T {
        self.dx * self.dy
    }

    /// Output grid of a single-step Fourier/Fresnel transform over `distance`.
    pub fn reciprocal(&self, wavelength: T, distance: T) -> Self {
        let lz = wavelength * distance;
        Self {
            nx: self.nx,
            ny: self.ny,
            dx: lz / (T::of_usize(self.nx) * self.dx),
            dy: lz / (T::of_usize(self.ny) * self.dy),
        }
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.nx == other.nx && self.ny == other.ny && self.dx == other.dx && self.dy == other.dy
    }

    pub(crate) fn ensure_same(&self, other: &Self, what: &str) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(OpticsError::GridMismatch(format!(
                "{what}: {}x{} @ ({:e}, {:e}) vs {}x{} @ ({:e}, {:e})",
                self.nx, self.ny, self.dx, self.dy, other.nx, other.ny, other.dx, other.dy
            )))
        }
    }
}

/// Monochromatic beam: wavelength and wavenumber.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamParams<T> {
    pub wavelength: T,
    pub k: T,
}

impl<T: Real> BeamParams<T> {
    pub fn new(wavelength: T) -> Result<Self> {
        if !(wavelength > T::zero() && wavelength.is_finite()) {
            return Err(crate::error::invalid("wavelength", "must be positive and finite"));
        }
        Ok(Self {
            wavelength,
            k: (T::PI() + T::PI()) / wavelength,
        })
    }

    /// `exp(i k z)` carrier phase, reduced modulo 2 pi before evaluation. `z / lambda` is
    /// ~1e11 for electron beams, beyond f32 resolution, so the reduction is done in f64.
    pub fn carrier_phase(&self, z: T) -> T {
        let cycles = z.to_f64_lossy() / self.wavelength.to_f64_lossy();
        T::of(std::f64::consts::TAU * cycles.fract())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_degenerate_grids() {
        assert!(GridSpec::new(1, 4, 1.0, 1.0).is_err());
        assert!(GridSpec::new(4, 4, 0.0, 1.0).is_err());
        assert!(GridSpec::new(4, 4, 1.0, f64::NAN).is_err());
    }

    #[test]
    fn centre_sample_is_origin() {
        let g = GridSpec::new(5, 4, 0.5, 0.25).unwrap();
        assert_eq!(g.x(2), 0.0);
        assert_eq!(g.y(2), 0.0);
        assert_eq!(g.x(0), -1.0);
        assert_eq!(g.y(3), 0.25);
    }

    #[test]
    fn coordinate_round_trip_is_exact() {
        let g = GridSpec::new(37, 64, 1.37e-8, 2.9e-9).unwrap();
        for j in 0..g.ny {
            for i in 0..g.nx {
                assert_eq!(g.locate(g.x(i), g.y(j)), Some((i, j)));
            }
        }
    }

    #[test]
    fn wavenumber_times_wavelength_is_two_pi() {
        let b = BeamParams::new(1.9687e-12f64).unwrap();
        assert!((b.k * b.wavelength - 2.0 * std::f64::consts::PI).abs() < 1e-15);
        assert!(BeamParams::new(-1.0f64).is_err());
    }
}
