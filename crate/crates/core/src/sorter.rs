//! End-to-end multipole sorting.
//!
//! Optical column: transformer → free space `f` → corrector (→ fused corrector/transformer
//! → free space → corrector for a cascade) → ideal lens → focal plane. When the overall
//! sector map `rho = c (r/s)^p, phi = q theta + o` has `p = m`, an input phase
//! `A r^m cos(m (theta - theta0))` leaves the last plate as the plane wave
//! `A' rho cos(phi - alpha)` with `A' = A s^m / c`, and the lens focuses it to a spot at
//! distance `f_lens A' / k` in direction `alpha`:
//!
//! * `m / q = -1` (single stage): `alpha = o - m theta0`;
//! * `m / q = +1` (cascade, holomorphic overall map): `alpha = o + m theta0`.
//!
//! With the Fresnel kernel the lens terms `-k r^2 / 2f` are folded into the plates so the
//! propagation chirps cancel; any leftover defocus or axis offset is removed by a one-off
//! calibration on `A = 0` (the "focus trim").

use num_complex::Complex;
use rayon::prelude::*;

use crate::constants::{BOHR_MAGNETON, ELEMENTARY_CHARGE, HBAR, MU_0};
use crate::error::{invalid, OpticsError, Result};
use crate::field::{make_multipole_beam, ComplexField, Envelope, MultipolePhaseSpec, RealField};
use crate::grid::{BeamParams, GridSpec};
use crate::phase::{analytic_map, ConformalMap, HarmonicPlate, PlateKind, SectorTransformSpec};
use crate::propagation::{fresnel_fft, lens_fourier, lens_fourier_window, Kernel};
use crate::scalar::{wrap_period, Real};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SortingOptics<T> {
    Single(SectorTransformSpec<T>),
    Cascade(SectorTransformSpec<T>, SectorTransformSpec<T>),
}

impl<T: Real> SortingOptics<T> {
    /// Transformer specs in beam order.
    pub fn stages(&self) -> Vec<SectorTransformSpec<T>> {
        let t = |s: &SectorTransformSpec<T>| SectorTransformSpec {
            kind: PlateKind::Transformer,
            ..*s
        };
        match self {
            SortingOptics::Single(s) => vec![t(s)],
            SortingOptics::Cascade(a, b) => vec![t(a), t(b)],
        }
    }

    /// Overall map from the input plane to the last corrector plane.
    pub fn overall_map(&self) -> ConformalMap<T> {
        self.stages()
            .iter()
            .fold(ConformalMap::identity(), |acc, s| acc.then(&analytic_map(s)))
    }

    /// Product of sector factors.
    pub fn total_factor(&self) -> T {
        self.stages().iter().fold(T::one(), |acc, s| acc * s.n)
    }

    /// `A' / A`.
    pub fn gain(&self, m: T) -> T {
        let map = self.overall_map();
        (m * map.s.ln()).exp() / map.c
    }

    /// Checks the sorting condition for input order `m`.
    pub fn check(&self, m: T) -> Result<()> {
        let p = self.overall_map().p;
        let tol = T::of(1e-9) * m.abs().max(T::one());
        if (p - m).abs() > tol {
            let (what, need) = match self {
                SortingOptics::Single(s) => (format!("n = {}", s.n), "n = -1/m"),
                SortingOptics::Cascade(a, b) => (format!("n1 n2 = {}", a.n * b.n), "n1 n2 = 1/m"),
            };
            return Err(OpticsError::SortingCondition(format!(
                "{what} does not sort order m = {m}; need {need}"
            )));
        }
        Ok(())
    }

    /// Spot azimuth for orientation `theta0`.
    pub fn spot_azimuth(&self, m: T, theta0: T) -> T {
        let map = self.overall_map();
        if m / map.q > T::zero() {
            map.offset + m * theta0
        } else {
            map.offset - m * theta0
        }
    }

    /// Orientation in `[0, 2 pi/|m|)` from a spot azimuth.
    pub fn orientation_from_azimuth(&self, m: T, alpha: T) -> T {
        let map = self.overall_map();
        let th = if m / map.q > T::zero() {
            (alpha - map.offset) / m
        } else {
            (map.offset - alpha) / m
        };
        wrap_period(th, (T::PI() + T::PI()) / m.abs())
    }
}

/// Far-field spot detection settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorSettings<T> {
    /// Fraction of the peak above which pixels enter the centroid.
    pub threshold: T,
    /// Minimum peak/median ratio of the far field.
    pub min_peak_to_background: T,
    /// Samples per side of the zoomed window around the coarse peak.
    pub window: usize,
}

impl<T: Real> Default for DetectorSettings<T> {
    fn default() -> Self {
        Self {
            threshold: T::of(0.5),
            min_peak_to_background: T::of(3.0),
            window: 128,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SorterConfig<T> {
    pub optics: SortingOptics<T>,
    /// Input multipole order.
    pub m: T,
    pub envelope: Envelope<T>,
    pub f_lens: T,
    pub kernel: Kernel,
    pub grid: GridSpec<T>,
    pub beam: BeamParams<T>,
    pub detector: DetectorSettings<T>,
}

impl<T: Real> SorterConfig<T> {
    pub fn new(
        optics: SortingOptics<T>,
        m: T,
        envelope: Envelope<T>,
        f_lens: T,
        kernel: Kernel,
        grid: GridSpec<T>,
        beam: BeamParams<T>,
    ) -> Result<Self> {
        optics.check(m)?;
        envelope.validate()?;
        if !(f_lens > T::zero() && f_lens.is_finite()) {
            return Err(invalid("f_lens", "must be positive"));
        }
        if m < T::zero() && envelope.inner_radius() == T::zero() {
            return Err(invalid("envelope", "m < 0 needs an inner radius > 0"));
        }
        Ok(Self {
            optics,
            m,
            envelope,
            f_lens,
            kernel,
            grid,
            beam,
            detector: DetectorSettings::default(),
        })
    }

    /// Closed-form spot offset `(f_lens A'/k) (cos alpha, sin alpha)`.
    pub fn predicted_spot(&self, input: &MultipolePhaseSpec<T>) -> (T, T) {
        let s = self.f_lens * input.amplitude * self.optics.gain(self.m) / self.beam.k;
        let a = self.optics.spot_azimuth(self.m, input.theta0);
        (s * a.cos(), s * a.sin())
    }

    /// `(A_est, theta0_est)`; `theta0_est` is `None` for a spot on the axis.
    pub fn infer_multipole(&self, u: T, v: T) -> (T, Option<T>) {
        let s = u.hypot(v);
        let a_est = self.beam.k * s / (self.f_lens * self.optics.gain(self.m));
        if s == T::zero() {
            return (T::zero(), None);
        }
        let th = self.optics.orientation_from_azimuth(self.m, v.atan2(u));
        (a_est, Some(th))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpotMeasurement<T> {
    /// Centroid relative to the calibrated axis (m).
    pub u: T,
    pub v: T,
    pub shift: T,
    pub azimuth: T,
    pub a_est: T,
    pub theta0_est: Option<T>,
    pub peak_to_background: T,
}

/// Centroid found by [`detect_spot`], in the coordinates of the image grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Centroid<T> {
    pub u: T,
    pub v: T,
    pub peak: T,
    pub peak_to_background: T,
    /// Pixels that entered the centroid.
    pub count: usize,
}

/// Median of a slice (mean of the middle pair for even lengths).
fn median<T: Real>(vals: &[T]) -> T {
    let mut v = vals.to_vec();
    let n = v.len();
    let cmp = |a: &T, b: &T| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal);
    let (_, hi, _) = v.select_nth_unstable_by(n / 2, cmp);
    let hi = *hi;
    if n % 2 == 1 {
        return hi;
    }
    let lo = v[..n / 2].iter().copied().fold(T::neg_infinity(), T::max);
    (lo + hi) / T::of(2.0)
}

fn argmax<T: Real>(vals: &[T]) -> usize {
    let mut best = 0;
    for (i, &v) in vals.iter().enumerate() {
        if v > vals[best] {
            best = i;
        }
    }
    best
}

/// Centroid of the pixels above `threshold × peak`, each weighted by its excess over the
/// threshold. The excess weighting makes the estimate continuous as pixels cross the
/// threshold, which removes the staircase bias of a plain thresholded centroid for
/// sub-pixel shifts.
pub fn detect_spot<T: Real>(intensity: &RealField<T>, threshold: T) -> Result<Centroid<T>> {
    let vals = intensity.values();
    let g = intensity.grid();
    let peak = intensity.max();
    if !(peak > T::zero()) || !peak.is_finite() {
        return Err(OpticsError::Degenerate("intensity is zero everywhere".into()));
    }
    let cut = threshold * peak;
    let (mut w, mut wu, mut wv, mut count) = (T::zero(), T::zero(), T::zero(), 0);
    for (idx, &i) in vals.iter().enumerate() {
        if i > cut {
            let (x, y) = g.xy(idx);
            let e = i - cut;
            w += e;
            wu += e * x;
            wv += e * y;
            count += 1;
        }
    }
    let med = median(vals);
    Ok(Centroid {
        u: wu / w,
        v: wv / w,
        peak,
        peak_to_background: if med > T::zero() { peak / med } else { T::infinity() },
        count,
    })
}

#[derive(Debug, Clone)]
pub struct SorterRun<T> {
    /// Full far-field intensity on the natural lens grid.
    pub far_field: RealField<T>,
    /// Zoomed intensity around the spot; its grid is relative to `window_center`.
    pub window: RealField<T>,
    pub window_center: (T, T),
    pub spot: SpotMeasurement<T>,
}

/// Zoomed intensity and the focal-plane point it is centred on.
type Window<T> = (RealField<T>, (T, T));

/// A configured sorter: plates are synthesised once and the optical axis is calibrated
/// on an `A = 0` input.
pub struct SectorSorter<T: Real> {
    cfg: SorterConfig<T>,
    planes: Vec<(GridSpec<T>, ComplexField<T>)>,
    distances: Vec<T>,
    window_grid: GridSpec<T>,
    axis: (T, T),
}

fn lens_term<T: Real>(grid: &GridSpec<T>, k: T, f: T) -> RealField<T> {
    let s = -k / (T::of(2.0) * f);
    RealField::from_fn(*grid, |x, y| s * (x * x + y * y))
}

fn plate_phase<T: Real>(
    grid: &GridSpec<T>,
    spec: &SectorTransformSpec<T>,
    beam: &BeamParams<T>,
) -> Result<(RealField<T>, Vec<bool>)> {
    HarmonicPlate::from_spec(spec, beam).sample(grid)
}

fn combine<T: Real>(parts: &[(RealField<T>, Vec<bool>)], grid: &GridSpec<T>) -> ComplexField<T> {
    let data = (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let mut ph = T::zero();
            for (f, valid) in parts {
                if !valid[idx] {
                    return Complex::new(T::zero(), T::zero());
                }
                ph += f.values()[idx];
            }
            Complex::from_polar(T::one(), ph)
        })
        .collect();
    ComplexField::from_raw(*grid, data)
}

impl<T: Real> SectorSorter<T> {
    pub fn new(cfg: SorterConfig<T>) -> Result<Self> {
        cfg.optics.check(cfg.m)?;
        let stages = cfg.optics.stages();
        let beam = cfg.beam;
        let k = beam.k;
        let all_valid = |g: &GridSpec<T>| vec![true; g.len()];

        check_sampling(&cfg, &stages)?;

        let mut planes = Vec::new();
        let mut distances = Vec::new();
        let mut grid = cfg.grid;
        // plane 0: first transformer
        let mut parts = vec![plate_phase(&grid, &stages[0], &beam)?];
        if cfg.kernel == Kernel::Fresnel {
            parts.push((lens_term(&grid, k, stages[0].f), all_valid(&grid)));
        }
        planes.push((grid, combine(&parts, &grid)));
        for (i, st) in stages.iter().enumerate() {
            distances.push(st.f);
            grid = grid.reciprocal(beam.wavelength, st.f);
            let mut parts = vec![plate_phase(&grid, &st.partner(), &beam)?];
            if cfg.kernel == Kernel::Fresnel {
                parts.push((lens_term(&grid, k, st.f), all_valid(&grid)));
            }
            if let Some(next) = stages.get(i + 1) {
                parts.push(plate_phase(&grid, next, &beam)?);
                if cfg.kernel == Kernel::Fresnel {
                    parts.push((lens_term(&grid, k, next.f), all_valid(&grid)));
                }
            }
            planes.push((grid, combine(&parts, &grid)));
        }

        let mut sorter = Self {
            cfg,
            planes,
            distances,
            window_grid: GridSpec::square(2, T::one())?,
            axis: (T::zero(), T::zero()),
        };
        // calibration on a plane wave of the same envelope
        let zero = MultipolePhaseSpec::new(sorter.cfg.m, T::zero(), T::zero())?;
        let last = sorter.propagate(&zero)?;
        let far = lens_fourier(&last, sorter.cfg.f_lens, &beam)?;
        let far_i = far.intensity();
        let natural = *far_i.grid();
        let peak = argmax(far_i.values());
        // window half-width: twice the equivalent half-maximum radius, in natural pixels
        let half = far_i.values()[peak] * sorter.cfg.detector.threshold;
        let (pi, pj) = (peak % natural.nx, peak / natural.nx);
        let mut count = 0usize;
        for j in pj.saturating_sub(16)..(pj + 17).min(natural.ny) {
            for i in pi.saturating_sub(16)..(pi + 17).min(natural.nx) {
                if far_i.at(i, j) > half {
                    count += 1;
                }
            }
        }
        let r_eq = (T::of_usize(count) / T::PI()).sqrt();
        let hw = (T::of(2.0) * r_eq + T::one()).ceil().max(T::of(2.0)).min(T::of(16.0));
        let w = sorter.cfg.detector.window;
        let pitch = natural.dx.min(natural.dy) * T::of(2.0) * hw / T::of_usize(w);
        sorter.window_grid = GridSpec::square(w, pitch)?;
        let (c, _, _) = sorter.measure_raw(&last)?;
        sorter.axis = (c.u, c.v);
        Ok(sorter)
    }

    pub fn config(&self) -> &SorterConfig<T> {
        &self.cfg
    }

    /// Calibrated optical axis in the focal plane (m).
    pub fn axis(&self) -> (T, T) {
        self.axis
    }

    /// Pitch of the far-field grid (m): one detection pixel.
    pub fn natural_pitch(&self) -> T {
        let (g, _) = self.planes.last().expect("at least one plane");
        let fg = g.reciprocal(self.cfg.beam.wavelength, self.cfg.f_lens);
        fg.dx.min(fg.dy)
    }

    pub fn window_grid(&self) -> &GridSpec<T> {
        &self.window_grid
    }

    /// Field after the last corrector.
    pub fn propagate(&self, input: &MultipolePhaseSpec<T>) -> Result<ComplexField<T>> {
        let beam = self.cfg.beam;
        let mut psi = make_multipole_beam(self.cfg.grid, input, &self.cfg.envelope)?;
        for (i, (grid, plate)) in self.planes.iter().enumerate() {
            debug_assert!(grid.same_shape(psi.grid()));
            let p = plate.samples();
            psi = psi.map(|idx, c| c * p[idx]);
            if let Some(&z) = self.distances.get(i) {
                psi = fresnel_fft(&psi, z, &beam, self.cfg.kernel)?;
            }
        }
        Ok(psi)
    }

    /// Far field, coarse peak, and window centroid (absolute focal-plane coordinates).
    fn measure_raw(
        &self,
        last: &ComplexField<T>,
    ) -> Result<(Centroid<T>, RealField<T>, Window<T>)> {
        let beam = self.cfg.beam;
        let far = lens_fourier(last, self.cfg.f_lens, &beam)?.intensity();
        let coarse = detect_spot(&far, self.cfg.detector.threshold)?;
        if coarse.peak_to_background < self.cfg.detector.min_peak_to_background {
            return Err(OpticsError::NoSpot {
                ratio: coarse.peak_to_background.to_f64_lossy(),
                threshold: self.cfg.detector.min_peak_to_background.to_f64_lossy(),
            });
        }
        let pk = argmax(far.values());
        let center = far.grid().xy(pk);
        let win = lens_fourier_window(last, self.cfg.f_lens, &beam, &self.window_grid, center)?
            .intensity();
        let mut c = detect_spot(&win, self.cfg.detector.threshold)?;
        c.u += center.0;
        c.v += center.1;
        c.peak_to_background = coarse.peak_to_background;
        Ok((c, far, (win, center)))
    }

    pub fn run(&self, input: &MultipolePhaseSpec<T>) -> Result<SorterRun<T>> {
        if input.m != self.cfg.m {
            return Err(invalid("m", "input order differs from the configured sorter"));
        }
        let last = self.propagate(input)?;
        let (c, far, (win, center)) = self.measure_raw(&last)?;
        let (u, v) = (c.u - self.axis.0, c.v - self.axis.1);
        let (a_est, theta0_est) = self.cfg.infer_multipole(u, v);
        Ok(SorterRun {
            far_field: far,
            window: win,
            window_center: center,
            spot: SpotMeasurement {
                u,
                v,
                shift: u.hypot(v),
                azimuth: v.atan2(u),
                a_est,
                theta0_est,
                peak_to_background: c.peak_to_background,
            },
        })
    }
}

/// Every stage image of the input support must land inside the next plane's grid, i.e. the
/// local spatial frequency after each plate stays below pi per pixel.
fn check_sampling<T: Real>(cfg: &SorterConfig<T>, stages: &[SectorTransformSpec<T>]) -> Result<()> {
    let r_in = cfg.envelope.inner_radius().max(cfg.grid.dx.min(cfg.grid.dy));
    let r_out = cfg.envelope.support_radius().min(cfg.grid.half_extent());
    let mut pts = Vec::new();
    let nr = 16;
    let na = 256;
    for ir in 0..=nr {
        let r = r_in * ((r_out / r_in).ln() * T::of_usize(ir) / T::of_usize(nr)).exp();
        for ia in 0..na {
            let th = -T::PI() + (T::PI() + T::PI()) * (T::of_usize(ia) + T::of(0.5)) / T::of_usize(na);
            pts.push((r * th.cos(), r * th.sin()));
        }
    }
    let mut grid = cfg.grid;
    for (i, st) in stages.iter().enumerate() {
        let map = analytic_map(st);
        let out = grid.reciprocal(cfg.beam.wavelength, st.f);
        let mut worst = T::zero();
        for p in pts.iter_mut() {
            *p = map.eval(p.0, p.1);
            worst = worst.max(p.0.abs() / out.half_extent()).max(p.1.abs() / out.half_extent());
        }
        if worst > T::one() {
            return Err(OpticsError::Undersampled {
                what: format!("transformer {} (image leaves the plane {} grid)", i + 1, i + 1),
                step: (T::PI() * worst).to_f64_lossy(),
            });
        }
        grid = out;
    }
    Ok(())
}

/// Straight-line least-squares fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit<T> {
    pub slope: T,
    pub intercept: T,
    pub r_squared: T,
}

pub fn fit_line<T: Real>(x: &[T], y: &[T]) -> Result<LineFit<T>> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(OpticsError::Degenerate("need at least two points".into()));
    }
    let n = T::of_usize(x.len());
    let mx = x.iter().fold(T::zero(), |s, &v| s + v) / n;
    let my = y.iter().fold(T::zero(), |s, &v| s + v) / n;
    let (mut sxx, mut sxy, mut syy) = (T::zero(), T::zero(), T::zero());
    for (&a, &b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
        syy += (b - my) * (b - my);
    }
    if sxx == T::zero() {
        return Err(OpticsError::Degenerate("abscissae are all equal".into()));
    }
    let slope = sxy / sxx;
    let r_squared = if syy > T::zero() { sxy * sxy / (sxx * syy) } else { T::one() };
    Ok(LineFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow<T> {
    pub a_in: T,
    pub theta0_in: T,
    /// `Err` holds the failure message for the row.
    pub result: std::result::Result<SpotMeasurement<T>, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult<T> {
    pub rows: Vec<SweepRow<T>>,
    /// Fit of shift against `A_in` over successful rows, if at least two distinct strengths.
    pub fit: Option<LineFit<T>>,
}

pub const SWEEP_CSV_HEADER: &str =
    "A_in,theta0_in_rad,u_m,v_m,shift_m,azimuth_rad,A_est,theta0_est_rad,peak_bg,status";

impl<T: Real> SweepResult<T> {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(SWEEP_CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            match &r.result {
                Ok(s) => {
                    let th = s.theta0_est.map(|t| format!("{t:e}")).unwrap_or_else(|| "nan".into());
                    out.push_str(&format!(
                        "{:e},{:e},{:e},{:e},{:e},{:e},{:e},{},{:e},ok\n",
                        r.a_in, r.theta0_in, s.u, s.v, s.shift, s.azimuth, s.a_est, th,
                        s.peak_to_background
                    ));
                }
                Err(e) => {
                    let msg: String = e.chars().map(|c| if c == ',' || c == '\n' { ';' } else { c }).collect();
                    out.push_str(&format!(
                        "{:e},{:e},nan,nan,nan,nan,nan,nan,nan,error: {msg}\n",
                        r.a_in, r.theta0_in
                    ));
                }
            }
        }
        out
    }
}

/// Runs the sorter for every (strength, orientation) pair, strength-major.
pub fn sweep_strength<T: Real>(
    sorter: &SectorSorter<T>,
    strengths: &[T],
    orientations: &[T],
) -> Result<SweepResult<T>> {
    if strengths.is_empty() || orientations.is_empty() {
        return Err(invalid("sweep", "strength and orientation lists must be nonempty"));
    }
    let m = sorter.config().m;
    let mut rows = Vec::new();
    for &a in strengths {
        for &th in orientations {
            let result = MultipolePhaseSpec::new(m, a, th)
                .and_then(|spec| sorter.run(&spec))
                .map(|r| r.spot)
                .map_err(|e| e.to_string());
            rows.push(SweepRow {
                a_in: a,
                theta0_in: th,
                result,
            });
        }
    }
    let (xs, ys): (Vec<T>, Vec<T>) = rows
        .iter()
        .filter_map(|r| r.result.as_ref().ok().map(|s| (r.a_in, s.shift)))
        .unzip();
    let fit = fit_line(&xs, &ys).ok();
    Ok(SweepResult { rows, fit })
}

/// Phase amplitude `A` (rad m) of an in-plane magnetic dipole of `moment_bohr` Bohr
/// magnetons: the z-integrated vector potential gives `A sin(theta - theta_d) / r` with
/// `A = e mu0 m / (2 pi hbar)`.
pub fn dipole_moment_to_amplitude(moment_bohr: f64) -> f64 {
    ELEMENTARY_CHARGE * MU_0 * moment_bohr * BOHR_MAGNETON / (2.0 * std::f64::consts::PI * HBAR)
}

/// Cosine-convention orientation of a dipole pointing along `theta_d`:
/// `sin(theta - theta_d) = cos(theta - (theta_d + pi/2))`.
pub fn dipole_theta0(theta_d: f64) -> f64 {
    theta_d + std::f64::consts::FRAC_PI_2
}

/// Phase amplitude `A` (rad/m^2) for twofold astigmatism `C_a` behind an objective of focal
/// length `f_obj`: `chi = (pi/lambda) C_a (r/f_obj)^2 cos 2(theta - theta0)`.
pub fn astigmatism_to_amplitude<T: Real>(c_a: T, f_obj: T, beam: &BeamParams<T>) -> Result<T> {
    if !(f_obj > T::zero()) {
        return Err(invalid("f_obj", "must be positive"));
    }
    Ok(T::PI() * c_a / (beam.wavelength * f_obj * f_obj))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(n: f64) -> SectorTransformSpec<f64> {
        SectorTransformSpec::transformer(n, 4.0e-6, 2.5e-6, 0.0, 0.5).unwrap()
    }

    #[test]
    fn sorting_condition() {
        assert!(SortingOptics::Single(spec(1.0)).check(-1.0).is_ok());
        assert!(SortingOptics::Single(spec(-0.5)).check(2.0).is_ok());
        assert!(SortingOptics::Single(spec(2.0)).check(2.0).is_err());
        assert!(SortingOptics::Cascade(spec(-2.0), spec(0.5)).check(-1.0).is_ok());
        assert!(SortingOptics::Cascade(spec(1.0), spec(1.0)).check(-1.0).is_err());
    }

    #[test]
    fn single_stage_gain_matches_closed_form() {
        let (a, b): (f64, f64) = (4.0e-6, 2.5e-6);
        for (n, m) in [(1.0, -1.0), (-0.5, 2.0), (0.5, -2.0)] {
            let g = SortingOptics::Single(spec(n)).gain(m);
            let expect = b.powf(m) / a;
            assert!((g / expect - 1.0).abs() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn cascade_gain_matches_closed_form() {
        let s1 = spec(-2.0);
        let s2 = SectorTransformSpec::transformer(0.5, 4.5e-6, 4.0e-6, 0.0, 0.5).unwrap();
        let (a1, b1, a2, b2): (f64, f64, f64, f64) = (s1.a, s1.b, s2.a, s2.b);
        let (n1, n2, m) = (s1.n, s2.n, -1.0f64);
        let expect = b1.powf(m) * b2.powf(-m * n1) / (a1.powf(-m * n1) * a2.powf(m * n1 * n2));
        let g = SortingOptics::Cascade(s1, s2).gain(m);
        assert!((g / expect - 1.0).abs() < 1e-12);
    }

    #[test]
    fn azimuth_conventions() {
        let single = SortingOptics::Single(spec(-0.5));
        assert!((single.spot_azimuth(2.0, 0.3) + 0.6).abs() < 1e-15);
        let dip = SortingOptics::Single(spec(1.0));
        assert!((dip.spot_azimuth(-1.0, 0.3) - 0.3).abs() < 1e-15);
        let casc = SortingOptics::Cascade(spec(-2.0), spec(0.5));
        assert!((casc.spot_azimuth(-1.0, 0.3) + 0.3).abs() < 1e-15);
        for o in [&single, &dip, &casc] {
            let m = if std::ptr::eq(o, &single) { 2.0 } else { -1.0 };
            let th = 0.4;
            let back = o.orientation_from_azimuth(m, o.spot_azimuth(m, th));
            assert!((back - th).abs() < 1e-12);
        }
    }

    #[test]
    fn line_fit_exact() {
        let f = fit_line::<f64>(&[1.0, 2.0, 3.0], &[3.0, 5.0, 7.0]).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12 && (f.intercept - 1.0).abs() < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn conversions_are_linear() {
        assert_eq!(dipole_moment_to_amplitude(0.0), 0.0);
        let a1 = dipole_moment_to_amplitude(1e6);
        assert_eq!(dipole_moment_to_amplitude(2e6), 2.0 * a1);
        let beam = BeamParams::new(1.9687e-12).unwrap();
        let a: f64 = astigmatism_to_amplitude(60e-9, 3.33e-3, &beam).unwrap();
        let b = astigmatism_to_amplitude(60e-9, 6.66e-3, &beam).unwrap();
        assert!((a / b - 4.0).abs() < 1e-12);
        assert_eq!(astigmatism_to_amplitude(0.0, 3.33e-3, &beam).unwrap(), 0.0);
    }

    #[test]
    fn median_even_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
