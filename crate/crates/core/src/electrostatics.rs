//! Projected charge distributions that reproduce harmonic phase plates.
//!
//! A plate phase `A r^m cos(m theta + delta)` (or `A ln r` for `m = 0`) is produced by
//! the 2-D log potential `V = -(1/2 pi eps0) sum q ln(|x - x_j| / rho_ref)` of:
//!
//! * integer `m <= 0`: a point 2^|m|-pole at the origin (a monopole for `m = 0`);
//! * integer `m >= 2`: a ring of linear density `Q_R cos(m theta + delta)` at radius `R`;
//! * fractional `m > 0`: the ring plus a line of linear density `Q_L s^(m-1)` along
//!   theta = pi, `s` in `(0, R]`, which carries the slope jump across the branch cut.
//!
//! with `Q_L = -2 eps0 A m sin(m pi)` and `Q_R = 2 eps0 A (m + 1) R^(m-1)`. Densities are per
//! unit length of the source curve. Charges are scaled so `V` comes out in radians.

use num_complex::Complex;
use rayon::prelude::*;

use crate::constants::EPSILON_0;
use crate::error::{invalid, OpticsError, Result};
use crate::field::{MultipolePhaseSpec, RealField};
use crate::grid::{BeamParams, GridSpec};
use crate::mask::Mask;
use crate::phase::{HarmonicPlate, SectorTransformSpec};
use crate::scalar::{is_integer, sin_pi, Real};

/// Harmonic phase `A r^m cos(m theta + delta)`, or `A ln r` for `m = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarmonicTarget<T> {
    pub m: T,
    pub amplitude: T,
    pub delta: T,
}

impl<T: Real> HarmonicTarget<T> {
    pub fn from_plate(plate: &HarmonicPlate<T>) -> Self {
        if plate.is_log() {
            return Self {
                m: T::zero(),
                amplitude: plate.coef,
                delta: T::zero(),
            };
        }
        let gain = plate.coef * (-plate.m * plate.scale.ln()).exp() / plate.m;
        Self {
            m: plate.m,
            amplitude: gain,
            delta: plate.delta,
        }
    }

    pub fn from_sector(spec: &SectorTransformSpec<T>, beam: &BeamParams<T>) -> Self {
        Self::from_plate(&HarmonicPlate::from_spec(spec, beam))
    }

    pub fn from_multipole(spec: &MultipolePhaseSpec<T>) -> Self {
        Self {
            m: spec.m,
            amplitude: spec.amplitude,
            delta: -spec.m * spec.theta0,
        }
    }

    /// Phase at `(x, y)`; differs from the plate phase by a constant only.
    pub fn phase(&self, x: T, y: T) -> T {
        let r = x.hypot(y);
        if self.m == T::zero() {
            return self.amplitude * r.ln();
        }
        self.amplitude * (self.m * r.ln()).exp() * (self.m * y.atan2(x) + self.delta).cos()
    }

    pub fn sample(&self, grid: &GridSpec<T>) -> RealField<T> {
        RealField::from_fn(*grid, |x, y| self.phase(x, y))
    }
}

/// Point charge in scaled units (`q / eps0` carries radians).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointCharge<T> {
    pub x: T,
    pub y: T,
    pub q: T,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ChargeComponent<T> {
    /// Linear density `q_l s^(m-1)` on theta = pi, `0 < s <= R`.
    Line { q_l: T },
    /// Linear density `q_r cos(m theta + delta)` on the circle `r = R`.
    Ring { q_r: T },
    /// Discrete 2^l-pole (or monopole) at the origin.
    Point { order: u32, charges: Vec<PointCharge<T>> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChargeModel<T> {
    pub target: HarmonicTarget<T>,
    pub radius: T,
    pub q_line: T,
    pub q_ring: T,
    pub components: Vec<ChargeComponent<T>>,
}

/// Builds the charge model for `target`. `separation` is the monopole spacing used for
/// point multipoles (the charges sit on a circle of diameter `separation`).
pub fn build_charge_model<T: Real>(
    target: &HarmonicTarget<T>,
    radius: T,
    separation: T,
) -> Result<ChargeModel<T>> {
    if !(radius > T::zero() && radius.is_finite()) {
        return Err(invalid("R", "must be positive and finite"));
    }
    let m = target.m;
    let a = target.amplitude;
    let eps0 = T::of(EPSILON_0);
    let two = T::of(2.0);
    let q_line = -two * eps0 * a * m * sin_pi(m);
    let q_ring = two * eps0 * a * (m + T::one()) * ((m - T::one()) * radius.ln()).exp();
    let mut components = Vec::new();
    if is_integer(m) && m <= T::zero() {
        if !(separation > T::zero()) {
            return Err(invalid("separation", "must be positive for point multipoles"));
        }
        let l = (-m).to_u32().ok_or_else(|| invalid("m", "order too large"))?;
        components.push(ChargeComponent::Point {
            order: l,
            charges: point_multipole(l, a, target.delta, separation),
        });
    } else if is_integer(m) && m >= two {
        components.push(ChargeComponent::Ring { q_r: q_ring });
    } else if m == T::one() {
        return Err(invalid(
            "m",
            "m = 1 is a uniform tilt: sin(pi m) = 0 removes the line term and no finite source \
             inside R produces it",
        ));
    } else if m > T::zero() {
        if target.delta != T::zero() {
            return Err(OpticsError::Unsupported(
                "fractional-order plates need theta0 = 0: a rotated cut carries a dipole layer"
                    .into(),
            ));
        }
        components.push(ChargeComponent::Line { q_l: q_line });
        components.push(ChargeComponent::Ring { q_r: q_ring });
    } else {
        return Err(OpticsError::Unsupported(format!(
            "fractional negative order m = {m} has no line/ring realisation"
        )));
    }
    Ok(ChargeModel {
        target: *target,
        radius,
        q_line,
        q_ring,
        components,
    })
}

/// `2l` alternating charges on a circle of radius `d/2` reproducing `A r^-l cos(l theta - ...)`
/// to leading order; a single charge `-2 pi eps0 A` for `l = 0`.
fn point_multipole<T: Real>(l: u32, a: T, delta: T, separation: T) -> Vec<PointCharge<T>> {
    let eps0 = T::of(EPSILON_0);
    if l == 0 {
        return vec![PointCharge {
            x: T::zero(),
            y: T::zero(),
            q: -(T::PI() + T::PI()) * eps0 * a,
        }];
    }
    let lt = T::from_u32(l).unwrap();
    let d = separation / T::of(2.0);
    // far field of the ring: (q d^l / (pi eps0)) r^-l cos(l (theta - theta_c)),
    // target A r^-l cos(-l theta + delta) => theta_c = delta / l, q = pi eps0 A / d^l
    let q = T::PI() * eps0 * a / d.powi(l as i32);
    let tc = delta / lt;
    (0..2 * l)
        .map(|j| {
            let ang = tc + T::of(j as f64) * T::PI() / lt;
            let sign = if j % 2 == 0 { T::one() } else { -T::one() };
            PointCharge {
                x: d * ang.cos(),
                y: d * ang.sin(),
                q: sign * q,
            }
        })
        .collect()
}

impl<T: Real> ChargeModel<T> {
    /// Integrated charge (scaled units) with the line and ring densities taken per unit length.
    pub fn net_charge(&self) -> T {
        let m = self.target.m;
        let mut total = T::zero();
        for c in &self.components {
            match c {
                ChargeComponent::Line { q_l } => {
                    total += *q_l * (m * self.radius.ln()).exp() / m;
                }
                ChargeComponent::Ring { q_r } => {
                    let two = T::of(2.0);
                    total += two * *q_r * self.radius * self.target.delta.cos() * sin_pi(m) / m;
                }
                ChargeComponent::Point { order, charges } => {
                    if *order == 0 {
                        total += charges.iter().fold(T::zero(), |s, c| s + c.q);
                    }
                }
            }
        }
        total
    }

    /// Discretises the components into point charges. The line uses exact per-cell charges
    /// with `cell` length; the ring uses `ring_nodes` equal arcs.
    pub fn discretize(&self, cell: T, ring_nodes: usize) -> Vec<PointCharge<T>> {
        let m = self.target.m;
        let mut out = Vec::new();
        for c in &self.components {
            match c {
                ChargeComponent::Line { q_l } => {
                    let n = (self.radius / cell).ceil().to_usize().unwrap_or(1).max(1);
                    let ds = self.radius / T::of_usize(n);
                    let mut prev = T::zero();
                    for i in 0..n {
                        let sb = ds * T::of_usize(i + 1);
                        let pb = (m * sb.ln()).exp();
                        let q = *q_l * (pb - prev) / m;
                        prev = pb;
                        let mid = ds * (T::of_usize(i) + T::of(0.5));
                        out.push(PointCharge {
                            x: -mid,
                            y: T::zero(),
                            q,
                        });
                    }
                }
                ChargeComponent::Ring { q_r } => {
                    let dth = (T::PI() + T::PI()) / T::of_usize(ring_nodes);
                    for i in 0..ring_nodes {
                        let th = -T::PI() + dth * (T::of_usize(i) + T::of(0.5));
                        out.push(PointCharge {
                            x: self.radius * th.cos(),
                            y: self.radius * th.sin(),
                            q: *q_r * (m * th + self.target.delta).cos() * self.radius * dth,
                        });
                    }
                }
                ChargeComponent::Point { charges, .. } => out.extend_from_slice(charges),
            }
        }
        out
    }
}

/// Potential values in radians, up to the recorded additive gauge constant.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedPotentialField<T> {
    pub values: RealField<T>,
    pub rho_ref: T,
    /// `(Q / 2 pi eps0) ln(rho_ref)`: what `rho_ref` adds to every value.
    pub gauge_constant: T,
    /// Pixels on top of a source (value set to 0).
    pub masked: Mask,
    pub masked_count: usize,
}

const CLUSTER_SIZE: usize = 128;
const MAX_TERMS: usize = 30;
const FAR_RATIO: f64 = 3.0;

struct Cluster<T> {
    center: Complex<T>,
    radius: T,
    /// Moments of the offsets in units of `radius`: `M_k = sum q (dz/radius)^k`.
    moments: Vec<Complex<T>>,
    members: std::ops::Range<usize>,
}

/// Sum of `q ln|z - z_j|` over many sources, with far clusters replaced by their
/// multipole expansion `Re[M0 ln w - sum_k (M_k/k) w^-k]`, truncated once the terms drop
/// below machine precision.
pub struct LogSum<T> {
    sources: Vec<PointCharge<T>>,
    clusters: Vec<Cluster<T>>,
}

impl<T: Real> LogSum<T> {
    /// Sources should be spatially ordered (consecutive runs form compact clusters).
    pub fn new(sources: Vec<PointCharge<T>>) -> Self {
        let mut clusters = Vec::new();
        let mut start = 0;
        while start < sources.len() {
            let end = (start + CLUSTER_SIZE).min(sources.len());
            let members = &sources[start..end];
            let n = T::of_usize(members.len());
            let (sx, sy) = members
                .iter()
                .fold((T::zero(), T::zero()), |(a, b), c| (a + c.x, b + c.y));
            let center = Complex::new(sx / n, sy / n);
            let radius = members
                .iter()
                .map(|c| (Complex::new(c.x, c.y) - center).norm())
                .fold(T::zero(), T::max);
            let unit = if radius > T::zero() { radius } else { T::one() };
            let mut moments = vec![Complex::new(T::zero(), T::zero()); MAX_TERMS + 1];
            for c in members {
                let d = (Complex::new(c.x, c.y) - center) / unit;
                let mut p = Complex::new(c.q, T::zero());
                for mk in moments.iter_mut() {
                    *mk += p;
                    p *= d;
                }
            }
            clusters.push(Cluster {
                center,
                radius: unit,
                moments,
                members: start..end,
            });
            start = end;
        }
        Self { sources, clusters }
    }

    pub fn sources(&self) -> &[PointCharge<T>] {
        &self.sources
    }

    pub fn total_charge(&self) -> T {
        self.sources.iter().fold(T::zero(), |s, c| s + c.q)
    }

    /// Direct evaluation; `None` when `(x, y)` coincides with a source.
    pub fn direct(&self, x: T, y: T) -> Option<T> {
        direct_sum(&self.sources, x, y)
    }

    /// Accelerated evaluation; `None` when `(x, y)` coincides with a source.
    pub fn eval(&self, x: T, y: T) -> Option<T> {
        let mut acc = T::zero();
        for cl in &self.clusters {
            acc += self.eval_cluster(cl, x, y)?;
        }
        Some(acc)
    }

    fn eval_cluster(&self, cl: &Cluster<T>, x: T, y: T) -> Option<T> {
        let z = Complex::new(x, y);
        let w = (z - cl.center) / cl.radius;
        let wn = w.norm();
        if wn <= T::of(FAR_RATIO) {
            return direct_sum(&self.sources[cl.members.clone()], x, y);
        }
        // offsets are normalised to |d| <= 1, so term k is bounded by sum|q| |w|^-k
        let tol = T::epsilon();
        let t = w.inv();
        let mut tk = t;
        let mut s = Complex::new(T::zero(), T::zero());
        for k in 1..=MAX_TERMS {
            s += cl.moments[k] * tk / T::of_usize(k);
            if (tk * t).norm() < tol {
                break;
            }
            tk *= t;
        }
        Some(cl.moments[0].re * (wn * cl.radius).ln() - s.re)
    }
}

const TILE: usize = 32;

impl<T: Real> LogSum<T> {
    /// Evaluates on every grid point (`None` on sources). Pixels are processed in square
    /// tiles: clusters well separated from a tile are converted once into a local Taylor
    /// expansion about the tile centre, the rest go through [`LogSum::eval`]'s per-point path.
    pub fn eval_grid(&self, grid: &GridSpec<T>) -> Vec<Option<T>> {
        let tiles_x = grid.nx.div_ceil(TILE);
        let tiles_y = grid.ny.div_ceil(TILE);
        let binom = binomials::<T>(2 * MAX_TERMS);
        let tiles: Vec<Vec<(usize, Option<T>)>> = (0..tiles_x * tiles_y)
            .into_par_iter()
            .map(|t| self.eval_tile(grid, t % tiles_x, t / tiles_x, &binom))
            .collect();
        let mut out = vec![None; grid.len()];
        for tile in tiles {
            for (idx, v) in tile {
                out[idx] = v;
            }
        }
        out
    }

    fn eval_tile(
        &self,
        grid: &GridSpec<T>,
        tx: usize,
        ty: usize,
        binom: &[Vec<T>],
    ) -> Vec<(usize, Option<T>)> {
        let (i0, j0) = (tx * TILE, ty * TILE);
        let (i1, j1) = ((i0 + TILE).min(grid.nx), (j0 + TILE).min(grid.ny));
        let half = T::of(0.5);
        let cx = (grid.x(i0) + grid.x(i1 - 1)) * half;
        let cy = (grid.y(j0) + grid.y(j1 - 1)) * half;
        let center = Complex::new(cx, cy);
        let rt = (grid.x(i1 - 1) - cx).hypot(grid.y(j1 - 1) - cy).max(grid.dx.min(grid.dy));
        let far = T::of(FAR_RATIO);
        let zero = Complex::new(T::zero(), T::zero());
        let mut local = [zero; MAX_TERMS + 1];
        let mut near = Vec::new();
        for (ci, cl) in self.clusters.iter().enumerate() {
            let d = center - cl.center;
            if d.norm() <= far * (rt + cl.radius) {
                near.push(ci);
                continue;
            }
            // potential M0 log(z - zc) - sum_k M_k (R/(z - zc))^k / k, re-expanded in
            // powers of u = (z - z_tile)/rt
            let alpha = Complex::new(cl.radius, T::zero()) / d;
            let beta = Complex::new(rt, T::zero()) / d;
            let mut ak = [zero; MAX_TERMS + 1];
            let mut p = Complex::new(T::one(), T::zero());
            for (k, slot) in ak.iter_mut().enumerate() {
                *slot = if k == 0 { zero } else { cl.moments[k] * p / T::of_usize(k) };
                p *= alpha;
            }
            local[0] += d.ln() * cl.moments[0] - ak[1..].iter().fold(zero, |s, &v| s + v);
            let mut bl = Complex::new(T::one(), T::zero());
            for l in 1..=MAX_TERMS {
                bl *= -beta;
                let mut c = cl.moments[0] * (-T::one() / T::of_usize(l));
                for k in 1..=MAX_TERMS {
                    c -= ak[k] * binom[k + l - 1][l];
                }
                local[l] += c * bl;
            }
        }
        let mut out = Vec::with_capacity((i1 - i0) * (j1 - j0));
        for j in j0..j1 {
            for i in i0..i1 {
                let (x, y) = (grid.x(i), grid.y(j));
                let u = (Complex::new(x, y) - center) / rt;
                let mut v = local.iter().rev().fold(zero, |acc, &b| acc * u + b).re;
                let mut on_source = false;
                for &ci in &near {
                    match self.eval_cluster(&self.clusters[ci], x, y) {
                        Some(c) => v += c,
                        None => on_source = true,
                    }
                }
                out.push((grid.index(i, j), if on_source { None } else { Some(v) }));
            }
        }
        out
    }
}

/// Pascal's triangle up to row `n`.
fn binomials<T: Real>(n: usize) -> Vec<Vec<T>> {
    let mut rows: Vec<Vec<T>> = Vec::with_capacity(n + 1);
    for r in 0..=n {
        let mut row = vec![T::one(); r + 1];
        for c in 1..r {
            row[c] = rows[r - 1][c - 1] + rows[r - 1][c];
        }
        rows.push(row);
    }
    rows
}

fn direct_sum<T: Real>(sources: &[PointCharge<T>], x: T, y: T) -> Option<T> {
    let mut acc = T::zero();
    for c in sources {
        let d = (x - c.x).hypot(y - c.y);
        if d <= T::epsilon() * (x.abs() + y.abs() + c.x.abs() + c.y.abs()) {
            return None;
        }
        acc += c.q * d.ln();
    }
    Some(acc)
}

/// Nodes used for the ring: at least 4096 and at least 4 per pixel of circumference.
pub fn ring_node_count<T: Real>(radius: T, grid: &GridSpec<T>) -> usize {
    let pitch = grid.dx.min(grid.dy);
    let per_px = (T::of(8.0) * T::PI() * radius / pitch).ceil().to_usize().unwrap_or(0);
    per_px.max(4096)
}

/// Potential of `model` on `grid` with the log kernel referenced to `rho_ref`. The line is
/// cut into cells of 1/8 pixel.
pub fn projected_potential_2d<T: Real>(
    model: &ChargeModel<T>,
    grid: &GridSpec<T>,
    rho_ref: T,
) -> Result<ProjectedPotentialField<T>> {
    if !(rho_ref > T::zero() && rho_ref.is_finite()) {
        return Err(invalid("rho_ref", "must be positive"));
    }
    let cell = grid.dx.min(grid.dy) / T::of(8.0);
    let sources = model.discretize(cell, ring_node_count(model.radius, grid));
    potential_from_sources(sources, grid, rho_ref)
}

/// Potential of explicit point charges (scaled units).
pub fn potential_from_sources<T: Real>(
    sources: Vec<PointCharge<T>>,
    grid: &GridSpec<T>,
    rho_ref: T,
) -> Result<ProjectedPotentialField<T>> {
    let sum = LogSum::new(sources);
    let eps0 = T::of(EPSILON_0);
    let k = -(T::PI() + T::PI()) * eps0;
    let q_tot = sum.total_charge();
    let gauge = -q_tot * rho_ref.ln() / k;
    let vals: Vec<Option<T>> = sum
        .eval_grid(grid)
        .into_iter()
        .map(|v| v.map(|s| s / k + gauge))
        .collect();
    let on_source: Vec<bool> = vals.iter().map(|v| v.is_none()).collect();
    let masked_count = on_source.iter().filter(|&&b| b).count();
    let masked = Mask::from_vec(grid, on_source);
    let values = vals.into_iter().map(|v| v.unwrap_or(T::zero())).collect();
    Ok(ProjectedPotentialField {
        values: RealField::from_raw(*grid, values),
        rho_ref,
        gauge_constant: gauge,
        masked,
        masked_count,
    })
}

/// `C'_l = ∫_0^pi sin^(2l-1)(t) dt` by composite Simpson quadrature.
pub fn multipole_constant(l: u32) -> f64 {
    assert!(l >= 1);
    let n = 4096usize;
    let h = std::f64::consts::PI / n as f64;
    let f = |t: f64| t.sin().powi(2 * l as i32 - 1);
    let mut s = f(0.0) + f(std::f64::consts::PI);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(i as f64 * h);
    }
    s * h / 3.0
}

/// In-plane 2^l-pole projected potential `C'_l cos(l phi) / (4 pi eps0 rho^l)`; the
/// origin sample is masked.
pub fn multipole_projected_potential<T: Real>(
    l: u32,
    grid: &GridSpec<T>,
) -> Result<ProjectedPotentialField<T>> {
    if l == 0 {
        return Err(invalid("l", "must be at least 1"));
    }
    let c = T::of(multipole_constant(l) / (4.0 * std::f64::consts::PI * EPSILON_0));
    let lt = T::from_u32(l).unwrap();
    let values = RealField::from_fn(*grid, |x, y| {
        let r = x.hypot(y);
        if r == T::zero() {
            T::zero()
        } else {
            c * (lt * y.atan2(x)).cos() / r.powi(l as i32)
        }
    });
    let masked = Mask::from_fn(grid, |x, y| x == T::zero() && y == T::zero());
    let masked_count = masked.count();
    Ok(ProjectedPotentialField {
        values,
        rho_ref: T::one(),
        gauge_constant: T::zero(),
        masked,
        masked_count,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchScore<T> {
    /// Least-squares fit `potential ≈ scale * target + offset`.
    pub scale: T,
    pub offset: T,
    /// Pearson correlation over the mask.
    pub correlation: T,
    pub count: usize,
}

pub fn phase_match_score<T: Real>(
    potential: &ProjectedPotentialField<T>,
    target: &RealField<T>,
    mask: &Mask,
) -> Result<MatchScore<T>> {
    potential.values.grid().ensure_same(target.grid(), "phase_match_score")?;
    let p = potential.values.values();
    let t = target.values();
    let keep: Vec<usize> = mask
        .indices()
        .into_iter()
        .filter(|&i| !potential.masked.keep()[i] && p[i].is_finite() && t[i].is_finite())
        .collect();
    if keep.is_empty() {
        return Err(OpticsError::EmptyMask);
    }
    let n = T::of_usize(keep.len());
    let (sp, st) = keep
        .iter()
        .fold((T::zero(), T::zero()), |(a, b), &i| (a + p[i], b + t[i]));
    let (mp, mt) = (sp / n, st / n);
    let (mut cov, mut vp, mut vt) = (T::zero(), T::zero(), T::zero());
    for &i in &keep {
        let (dp, dt) = (p[i] - mp, t[i] - mt);
        cov += dp * dt;
        vp += dp * dp;
        vt += dt * dt;
    }
    if vt <= T::zero() {
        return Err(OpticsError::Degenerate("target is constant under the mask".into()));
    }
    let scale = cov / vt;
    let correlation = if vp > T::zero() {
        cov / (vp * vt).sqrt()
    } else {
        T::zero()
    };
    Ok(MatchScore {
        scale,
        offset: mp - scale * mt,
        correlation,
        count: keep.len(),
    })
}
