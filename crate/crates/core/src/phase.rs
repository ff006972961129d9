//! Harmonic phase plates for circular-sector transformations and the conformal maps they
//! realise.
//!
//! A plate is `Omega = K (r/s)^m cos(m theta + delta) / m`, or `K ln(r/s)` when `m = 0`.
//! With `F(z) = K s^-m e^{i delta} z^m / m` we have `Omega = Re F`, so
//! `Omega_x - i Omega_y = F'(z)` and the Hessian follows from `F''`. The branch cut of
//! the fractional power sits on theta = pi with theta in (-pi, pi].
//!
//! The gradient map `(u, v) = (f/k) grad Omega` of a sector transformer is
//! `rho = a (r/b)^(-1/n)`, `phi = theta/n + theta0`; the matching corrector maps back with
//! `rho = b (rho'/a)^(-n)`, `phi = n (phi' - theta0)`.

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{invalid, OpticsError, Result};
use crate::field::{ComplexField, RealField};
use crate::grid::{BeamParams, GridSpec};
use crate::mask::Mask;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlateKind {
    Transformer,
    Corrector,
}

/// Circular-sector transformation parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorTransformSpec<T> {
    pub n: T,
    /// Output scale (m).
    pub a: T,
    /// Input scale (m).
    pub b: T,
    pub theta0: T,
    /// Plate separation (m).
    pub f: T,
    pub kind: PlateKind,
}

impl<T: Real> SectorTransformSpec<T> {
    pub fn new(n: T, a: T, b: T, theta0: T, f: T, kind: PlateKind) -> Result<Self> {
        if !n.is_finite() || n == T::zero() {
            return Err(invalid("n", "must be finite and nonzero"));
        }
        if n != T::one() && (n - T::one()).abs() < T::of(1e-9) {
            return Err(invalid(
                "n",
                "within 1e-9 of the logarithmic case n = 1; use n = 1 exactly",
            ));
        }
        for (name, v) in [("a", a), ("b", b), ("f", f)] {
            if !(v > T::zero() && v.is_finite()) {
                return Err(invalid(name, "must be positive and finite"));
            }
        }
        if !theta0.is_finite() {
            return Err(invalid("theta0", "must be finite"));
        }
        Ok(Self {
            n,
            a,
            b,
            theta0,
            f,
            kind,
        })
    }

    pub fn transformer(n: T, a: T, b: T, theta0: T, f: T) -> Result<Self> {
        Self::new(n, a, b, theta0, f, PlateKind::Transformer)
    }

    pub fn corrector(n: T, a: T, b: T, theta0: T, f: T) -> Result<Self> {
        Self::new(n, a, b, theta0, f, PlateKind::Corrector)
    }

    /// Same parameters, other role.
    pub fn partner(&self) -> Self {
        Self {
            kind: match self.kind {
                PlateKind::Transformer => PlateKind::Corrector,
                PlateKind::Corrector => PlateKind::Transformer,
            },
            ..*self
        }
    }

    pub fn is_log(&self) -> bool {
        self.n == T::one()
    }

    /// Multipole order of the plate: `1 - 1/n` (transformer) or `1 - n` (corrector).
    pub fn order(&self) -> T {
        match self.kind {
            PlateKind::Transformer => T::one() - self.n.recip(),
            PlateKind::Corrector => T::one() - self.n,
        }
    }
}

/// Closed-form harmonic plate `K (r/s)^m cos(m theta + delta) / m` (log for `m = 0`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarmonicPlate<T> {
    pub coef: T,
    pub scale: T,
    pub m: T,
    pub delta: T,
}

impl<T: Real> HarmonicPlate<T> {
    pub fn new(coef: T, scale: T, m: T, delta: T) -> Self {
        Self {
            coef,
            scale,
            m,
            delta,
        }
    }

    pub fn from_spec(spec: &SectorTransformSpec<T>, beam: &BeamParams<T>) -> Self {
        let coef = beam.k * spec.a * spec.b / spec.f;
        if spec.is_log() {
            let scale = match spec.kind {
                PlateKind::Transformer => spec.b,
                PlateKind::Corrector => spec.a,
            };
            return Self::new(coef, scale, T::zero(), T::zero());
        }
        match spec.kind {
            PlateKind::Transformer => Self::new(coef, spec.b, spec.order(), -spec.theta0),
            PlateKind::Corrector => Self::new(coef, spec.a, spec.order(), spec.n * spec.theta0),
        }
    }

    pub fn is_log(&self) -> bool {
        self.m == T::zero()
    }

    #[inline]
    fn pow_r(&self, r: T, e: T) -> T {
        (e * r.ln()).exp()
    }

    /// `K s^-m` (or `K` for the log plate).
    #[inline]
    fn gain(&self) -> T {
        if self.is_log() {
            self.coef
        } else {
            self.coef * self.pow_r(self.scale, -self.m)
        }
    }

    /// Phase at `(r, theta)`, theta in (-pi, pi]. Requires `r > 0` unless `m > 0`.
    pub fn phase_polar(&self, r: T, theta: T) -> T {
        if self.is_log() {
            return self.coef * (r / self.scale).ln();
        }
        if r == T::zero() && self.m > T::zero() {
            return T::zero();
        }
        self.coef * self.pow_r(r / self.scale, self.m) * (self.m * theta + self.delta).cos() / self.m
    }

    #[inline]
    pub fn phase(&self, x: T, y: T) -> T {
        self.phase_polar(x.hypot(y), y.atan2(x))
    }

    /// `(Omega_x, Omega_y)`.
    pub fn gradient(&self, x: T, y: T) -> (T, T) {
        let r = x.hypot(y);
        let th = y.atan2(x);
        let mag = self.gain() * self.pow_r(r, self.m - T::one());
        let psi = (self.m - T::one()) * th + self.delta;
        (mag * psi.cos(), -mag * psi.sin())
    }

    /// `(Omega_xx, Omega_xy, Omega_yy)`; the plate is harmonic so `Omega_yy = -Omega_xx`.
    pub fn hessian(&self, x: T, y: T) -> (T, T, T) {
        let r = x.hypot(y);
        let th = y.atan2(x);
        let two = T::of(2.0);
        let mag = self.gain() * (self.m - T::one()) * self.pow_r(r, self.m - two);
        let psi = (self.m - two) * th + self.delta;
        let xx = mag * psi.cos();
        (xx, -mag * psi.sin(), -xx)
    }

    /// Samples the phase on a grid; singular origin samples are reported through the mask
    /// of valid pixels (false at `r = 0` for `m <= 0`).
    pub fn sample(&self, grid: &GridSpec<T>) -> Result<(RealField<T>, Vec<bool>)> {
        let singular_origin = self.m <= T::zero();
        let vals: Vec<(T, bool)> = (0..grid.len())
            .into_par_iter()
            .map(|idx| {
                let (x, y) = grid.xy(idx);
                if singular_origin && x == T::zero() && y == T::zero() {
                    (T::zero(), false)
                } else {
                    (self.phase(x, y), true)
                }
            })
            .collect();
        if let Some(idx) = vals.iter().position(|(v, _)| !v.is_finite()) {
            let (x, y) = grid.xy(idx);
            return Err(OpticsError::NonFinite {
                x: x.to_f64_lossy(),
                y: y.to_f64_lossy(),
            });
        }
        let (phase, valid): (Vec<T>, Vec<bool>) = vals.into_iter().unzip();
        Ok((RealField::from_raw(*grid, phase), valid))
    }
}

/// Phase values `Omega` of a sector plate in radians (unwrapped, cut at theta = pi).
pub fn sector_phase_values<T: Real>(
    grid: &GridSpec<T>,
    spec: &SectorTransformSpec<T>,
    beam: &BeamParams<T>,
) -> Result<RealField<T>> {
    Ok(HarmonicPlate::from_spec(spec, beam).sample(grid)?.0)
}

fn phase_plate<T: Real>(
    grid: &GridSpec<T>,
    spec: &SectorTransformSpec<T>,
    beam: &BeamParams<T>,
) -> Result<ComplexField<T>> {
    let (phase, valid) = HarmonicPlate::from_spec(spec, beam).sample(grid)?;
    let data = phase
        .values()
        .par_iter()
        .zip(valid.par_iter())
        .map(|(&p, &ok)| {
            if ok {
                Complex::from_polar(T::one(), p)
            } else {
                Complex::new(T::zero(), T::zero())
            }
        })
        .collect();
    Ok(ComplexField::from_raw(*grid, data))
}

/// Transformer plate `exp(i Omega)` with `Omega = (kab/f) (r/b)^m cos(m theta - theta0)/m`,
/// `m = 1 - 1/n`; `Omega = (kab/f) ln(r/b)` for `n = 1`.
pub fn sector_transformer_phase<T: Real>(
    grid: &GridSpec<T>,
    spec: &SectorTransformSpec<T>,
    beam: &BeamParams<T>,
) -> Result<ComplexField<T>> {
    let spec = SectorTransformSpec {
        kind: PlateKind::Transformer,
        ..*spec
    };
    phase_plate(grid, &spec, beam)
}

/// Corrector plate with `Omega = (kab/f) (rho/a)^m' cos(m' phi + n theta0)/m'`, `m' = 1 - n`.
pub fn sector_corrector_phase<T: Real>(
    grid: &GridSpec<T>,
    spec: &SectorTransformSpec<T>,
    beam: &BeamParams<T>,
) -> Result<ComplexField<T>> {
    let spec = SectorTransformSpec {
        kind: PlateKind::Corrector,
        ..*spec
    };
    phase_plate(grid, &spec, beam)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Holomorphy {
    Holomorphic,
    AntiHolomorphic,
}

/// Power-law polar map `rho = c (r/s)^p`, `phi = q theta + offset`.
///
/// Conformal when `|p| = |q|`: holomorphic for `p q > 0`, anti-holomorphic for `p q < 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConformalMap<T> {
    pub c: T,
    pub s: T,
    pub p: T,
    pub q: T,
    pub offset: T,
}

impl<T: Real> ConformalMap<T> {
    pub fn identity() -> Self {
        Self {
            c: T::one(),
            s: T::one(),
            p: T::one(),
            q: T::one(),
            offset: T::zero(),
        }
    }

    pub fn holomorphy(&self) -> Holomorphy {
        if self.p * self.q > T::zero() {
            Holomorphy::Holomorphic
        } else {
            Holomorphy::AntiHolomorphic
        }
    }

    #[inline]
    pub fn eval_polar(&self, r: T, theta: T) -> (T, T) {
        (
            self.c * (self.p * (r / self.s).ln()).exp(),
            self.q * theta + self.offset,
        )
    }

    #[inline]
    pub fn eval(&self, x: T, y: T) -> (T, T) {
        let (rho, phi) = self.eval_polar(x.hypot(y), y.atan2(x));
        (rho * phi.cos(), rho * phi.sin())
    }

    /// `self` first, then `next`.
    pub fn then(&self, next: &Self) -> Self {
        Self {
            c: next.c * (next.p * (self.c / next.s).ln()).exp(),
            s: self.s,
            p: self.p * next.p,
            q: self.q * next.q,
            offset: next.q * self.offset + next.offset,
        }
    }

    pub fn inverse(&self) -> Self {
        Self {
            c: self.s,
            s: self.c,
            p: self.p.recip(),
            q: self.q.recip(),
            offset: -self.offset / self.q,
        }
    }

    /// All input points with theta in (-pi, pi] mapping onto `(u, v)`.
    pub fn preimages(&self, u: T, v: T) -> Vec<(T, T)> {
        let rho = u.hypot(v);
        if rho == T::zero() {
            return Vec::new();
        }
        let phi = v.atan2(u);
        let r = self.s * ((rho / self.c).ln() / self.p).exp();
        let two_pi = T::PI() + T::PI();
        let base = (phi - self.offset) / self.q;
        let step = two_pi / self.q.abs();
        // theta = base + j step; pick every j with theta in (-pi, pi]
        let j_lo = ((-T::PI() - base) / step).floor().to_i64().unwrap_or(0) - 1;
        let j_hi = ((T::PI() - base) / step).ceil().to_i64().unwrap_or(0) + 1;
        (j_lo..=j_hi)
            .filter_map(|j| {
                let th = base + T::from_i64(j).unwrap() * step;
                (th > -T::PI() && th <= T::PI()).then(|| (r * th.cos(), r * th.sin()))
            })
            .collect()
    }
}

/// Closed-form sector map of a transformer or corrector (see module docs).
///
/// The log plate (`n = 1`) is rotation invariant, so `theta0` does not enter its map.
pub fn analytic_map<T: Real>(spec: &SectorTransformSpec<T>) -> ConformalMap<T> {
    let n = spec.n;
    let th0 = if spec.is_log() { T::zero() } else { spec.theta0 };
    match spec.kind {
        PlateKind::Transformer => ConformalMap {
            c: spec.a,
            s: spec.b,
            p: -n.recip(),
            q: n.recip(),
            offset: th0,
        },
        PlateKind::Corrector => ConformalMap {
            c: spec.b,
            s: spec.a,
            p: -n,
            q: n,
            offset: -n * th0,
        },
    }
}

/// Overall map of `spec1` followed by `spec2`.
pub fn compose_maps<T: Real>(
    spec1: &SectorTransformSpec<T>,
    spec2: &SectorTransformSpec<T>,
) -> ConformalMap<T> {
    analytic_map(spec1).then(&analytic_map(spec2))
}

/// Planar vector field, e.g. a gradient map `(u, v)`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField<T> {
    pub grid: GridSpec<T>,
    pub u: Vec<T>,
    pub v: Vec<T>,
}

/// `(z/k) grad Omega` evaluated analytically.
pub fn gradient_map<T: Real>(
    plate: &HarmonicPlate<T>,
    z: T,
    beam: &BeamParams<T>,
    grid: &GridSpec<T>,
) -> Result<VectorField<T>> {
    if !(z > T::zero()) {
        return Err(invalid("z", "must be positive"));
    }
    let s = z / beam.k;
    let (u, v): (Vec<T>, Vec<T>) = (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let (x, y) = grid.xy(idx);
            if x == T::zero() && y == T::zero() {
                return (T::nan(), T::nan());
            }
            let (gx, gy) = plate.gradient(x, y);
            (s * gx, s * gy)
        })
        .unzip();
    Ok(VectorField { grid: *grid, u, v })
}

/// `(z/k) grad Omega` by central differences (one-sided on the border).
pub fn gradient_map_sampled<T: Real>(
    phase: &RealField<T>,
    z: T,
    beam: &BeamParams<T>,
) -> Result<VectorField<T>> {
    if !(z > T::zero()) {
        return Err(invalid("z", "must be positive"));
    }
    let g = *phase.grid();
    let s = z / beam.k;
    let two = T::of(2.0);
    let d = |i0: usize, j0: usize, i1: usize, j1: usize, h: T| {
        (phase.at(i1, j1) - phase.at(i0, j0)) / h
    };
    let (u, v): (Vec<T>, Vec<T>) = (0..g.len())
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx % g.nx, idx / g.nx);
            let gx = if i == 0 {
                d(0, j, 1, j, g.dx)
            } else if i + 1 == g.nx {
                d(i - 1, j, i, j, g.dx)
            } else {
                d(i - 1, j, i + 1, j, two * g.dx)
            };
            let gy = if j == 0 {
                d(i, 0, i, 1, g.dy)
            } else if j + 1 == g.ny {
                d(i, j - 1, i, j, g.dy)
            } else {
                d(i, j - 1, i, j + 1, two * g.dy)
            };
            (s * gx, s * gy)
        })
        .unzip();
    Ok(VectorField { grid: g, u, v })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarmonicResidual<T> {
    /// Max |discrete Laplacian| over the mask (rad/m^2).
    pub max: T,
    pub mean: T,
    /// Max |second difference along x| over the mask, used to normalise `max`.
    pub scale: T,
    pub count: usize,
}

impl<T: Real> HarmonicResidual<T> {
    pub fn normalized(&self) -> T {
        self.max / self.scale
    }
}

#[inline]
fn laplacian_at<T: Real>(f: &RealField<T>, i: usize, j: usize) -> (T, T) {
    let g = f.grid();
    let c = f.at(i, j);
    let two = T::of(2.0);
    let dxx = (f.at(i + 1, j) - two * c + f.at(i - 1, j)) / (g.dx * g.dx);
    let dyy = (f.at(i, j + 1) - two * c + f.at(i, j - 1)) / (g.dy * g.dy);
    (dxx + dyy, dxx)
}

/// 5-point Laplacian statistics over the unmasked pixels (the 1-px border is always excluded).
pub fn harmonic_residual<T: Real>(phase: &RealField<T>, mask: &Mask) -> Result<HarmonicResidual<T>> {
    let g = phase.grid();
    if mask.dims() != (g.nx, g.ny) {
        return Err(OpticsError::GridMismatch("mask and phase differ in shape".into()));
    }
    let mut max = T::zero();
    let mut sum = T::zero();
    let mut scale = T::zero();
    let mut count = 0usize;
    for j in 1..g.ny - 1 {
        for i in 1..g.nx - 1 {
            if !mask.get(i, j) {
                continue;
            }
            let (lap, dxx) = laplacian_at(phase, i, j);
            max = max.max(lap.abs());
            scale = scale.max(dxx.abs());
            sum += lap.abs();
            count += 1;
        }
    }
    if count == 0 {
        return Err(OpticsError::EmptyMask);
    }
    Ok(HarmonicResidual {
        max,
        mean: sum / T::of_usize(count),
        scale,
        count,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Convergence<T> {
    pub coarse: HarmonicResidual<T>,
    pub fine: HarmonicResidual<T>,
}

impl<T: Real> Convergence<T> {
    /// Coarse-to-fine reduction of the max residual; 4 for second-order convergence.
    pub fn ratio(&self) -> T {
        self.coarse.max / self.fine.max
    }
}

/// Compares Laplacian residuals of the same phase sampled at pitch `h` and `h/2`, on the
/// coarse-grid points (which are also fine-grid points), so the statistics are taken at
/// identical physical positions.
pub fn harmonic_convergence<T: Real>(
    coarse: &RealField<T>,
    fine: &RealField<T>,
    coarse_mask: &Mask,
) -> Result<Convergence<T>> {
    let gc = *coarse.grid();
    let gf = *fine.grid();
    let two = T::of(2.0);
    if gf.dx * two != gc.dx || gf.dy * two != gc.dy {
        return Err(OpticsError::GridMismatch("fine grid must have half the pitch".into()));
    }
    let res_c = harmonic_residual(coarse, coarse_mask)?;
    let mut max = T::zero();
    let mut sum = T::zero();
    let mut scale = T::zero();
    let mut count = 0;
    for j in 1..gc.ny - 1 {
        for i in 1..gc.nx - 1 {
            if !coarse_mask.get(i, j) {
                continue;
            }
            let fi = (2 * i + gf.cx()).checked_sub(2 * gc.cx());
            let fj = (2 * j + gf.cy()).checked_sub(2 * gc.cy());
            let (Some(fi), Some(fj)) = (fi, fj) else {
                continue;
            };
            if fi == 0 || fj == 0 || fi + 1 >= gf.nx || fj + 1 >= gf.ny {
                continue;
            }
            let (lap, dxx) = laplacian_at(fine, fi, fj);
            max = max.max(lap.abs());
            scale = scale.max(dxx.abs());
            sum += lap.abs();
            count += 1;
        }
    }
    if count == 0 {
        return Err(OpticsError::EmptyMask);
    }
    Ok(Convergence {
        coarse: res_c,
        fine: HarmonicResidual {
            max,
            mean: sum / T::of_usize(count),
            scale,
            count,
        },
    })
}

/// Residuals of `du/dy = dv/dx` (irrotational) and `du/dx = -dv/dy` (anti-holomorphic
/// Cauchy–Riemann). Relative values divide each pointwise residual by the Frobenius norm
/// of the Jacobian at that point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CauchyRiemannResidual<T> {
    pub irrotational_abs: T,
    pub cauchy_riemann_abs: T,
    pub irrotational_rel: T,
    pub cauchy_riemann_rel: T,
    pub count: usize,
}

struct CrAccumulator<T> {
    acc: CauchyRiemannResidual<T>,
}

impl<T: Real> CrAccumulator<T> {
    fn new() -> Self {
        Self {
            acc: CauchyRiemannResidual {
                irrotational_abs: T::zero(),
                cauchy_riemann_abs: T::zero(),
                irrotational_rel: T::zero(),
                cauchy_riemann_rel: T::zero(),
                count: 0,
            },
        }
    }

    fn push(&mut self, ux: T, uy: T, vx: T, vy: T) {
        let a = &mut self.acc;
        let e5 = (uy - vx).abs();
        let e7 = (ux + vy).abs();
        let norm = (ux * ux + uy * uy + vx * vx + vy * vy).sqrt();
        a.irrotational_abs = a.irrotational_abs.max(e5);
        a.cauchy_riemann_abs = a.cauchy_riemann_abs.max(e7);
        if norm > T::zero() {
            a.irrotational_rel = a.irrotational_rel.max(e5 / norm);
            a.cauchy_riemann_rel = a.cauchy_riemann_rel.max(e7 / norm);
        }
        a.count += 1;
    }
}

/// Central-difference residuals of a closed-form map at the unmasked grid points, with a
/// step proportional to the local radius.
pub fn cauchy_riemann_residual<T, F>(
    map: F,
    grid: &GridSpec<T>,
    mask: &Mask,
) -> Result<CauchyRiemannResidual<T>>
where
    T: Real,
    F: Fn(T, T) -> (T, T),
{
    let mut acc = CrAccumulator::new();
    // step ~ eps^(1/3) balances truncation against rounding
    let rel_step = T::epsilon().cbrt() * T::of(0.2);
    let two = T::of(2.0);
    for idx in mask.indices() {
        let (x, y) = grid.xy(idx);
        let r = x.hypot(y);
        if r == T::zero() {
            continue;
        }
        let h = rel_step * r;
        let (uxp, vxp) = map(x + h, y);
        let (uxm, vxm) = map(x - h, y);
        let (uyp, vyp) = map(x, y + h);
        let (uym, vym) = map(x, y - h);
        acc.push(
            (uxp - uxm) / (two * h),
            (uyp - uym) / (two * h),
            (vxp - vxm) / (two * h),
            (vyp - vym) / (two * h),
        );
    }
    if acc.acc.count == 0 {
        return Err(OpticsError::EmptyMask);
    }
    Ok(acc.acc)
}

/// Residuals of a sampled `(u, v)` field, central differences at the grid pitch.
pub fn cauchy_riemann_residual_sampled<T: Real>(
    field: &VectorField<T>,
    mask: &Mask,
) -> Result<CauchyRiemannResidual<T>> {
    let g = field.grid;
    let two = T::of(2.0);
    let mut acc = CrAccumulator::new();
    for j in 1..g.ny - 1 {
        for i in 1..g.nx - 1 {
            if !mask.get(i, j) {
                continue;
            }
            let at = |a: &[T], i: usize, j: usize| a[g.index(i, j)];
            let ux = (at(&field.u, i + 1, j) - at(&field.u, i - 1, j)) / (two * g.dx);
            let uy = (at(&field.u, i, j + 1) - at(&field.u, i, j - 1)) / (two * g.dy);
            let vx = (at(&field.v, i + 1, j) - at(&field.v, i - 1, j)) / (two * g.dx);
            let vy = (at(&field.v, i, j + 1) - at(&field.v, i, j - 1)) / (two * g.dy);
            acc.push(ux, uy, vx, vy);
        }
    }
    if acc.acc.count == 0 {
        return Err(OpticsError::EmptyMask);
    }
    Ok(acc.acc)
}

/// Largest departure of `J^T J` from a multiple of the identity, relative to its trace/2.
pub fn conformality_defect<T, F>(map: F, grid: &GridSpec<T>, mask: &Mask) -> Result<T>
where
    T: Real,
    F: Fn(T, T) -> (T, T),
{
    let rel_step = T::epsilon().cbrt() * T::of(0.2);
    let two = T::of(2.0);
    let mut worst = T::zero();
    let mut count = 0;
    for idx in mask.indices() {
        let (x, y) = grid.xy(idx);
        let r = x.hypot(y);
        if r == T::zero() {
            continue;
        }
        let h = rel_step * r;
        let (uxp, vxp) = map(x + h, y);
        let (uxm, vxm) = map(x - h, y);
        let (uyp, vyp) = map(x, y + h);
        let (uym, vym) = map(x, y - h);
        let (ux, vx) = ((uxp - uxm) / (two * h), (vxp - vxm) / (two * h));
        let (uy, vy) = ((uyp - uym) / (two * h), (vyp - vym) / (two * h));
        let g11 = ux * ux + vx * vx;
        let g22 = uy * uy + vy * vy;
        let g12 = ux * uy + vx * vy;
        let diag = (g11 + g22) / two;
        worst = worst.max(g12.abs() / diag).max((g11 - g22).abs() / diag);
        count += 1;
    }
    if count == 0 {
        return Err(OpticsError::EmptyMask);
    }
    Ok(worst)
}
