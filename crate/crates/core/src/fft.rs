//! Centred discrete Fourier transforms.
//!
//! `out[p] = sum_i in[i] exp(-2 pi i (i - c)(p - c) / N)` with `c = N/2`, evaluated as
//! modulate → FFT → modulate. The modulation exponents are reduced modulo `N` in integer
//! arithmetic so the phases stay exact for any `N`.

use std::sync::Arc;

use num_complex::Complex;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Kernel `exp(-2 pi i ...)`.
    Forward,
    /// Kernel `exp(+2 pi i ...)`.
    Inverse,
}

struct Axis<T: Real> {
    fft: Arc<dyn Fft<T>>,
    pre: Vec<Complex<T>>,
    post: Vec<Complex<T>>,
}

fn twiddle<T: Real>(num: usize, n: usize, sign: T) -> Complex<T> {
    let ang = sign * (T::PI() + T::PI()) * T::of_usize(num % n) / T::of_usize(n);
    Complex::from_polar(T::one(), ang)
}

impl<T: Real> Axis<T> {
    fn new(planner: &mut FftPlanner<T>, n: usize, dir: Direction) -> Self {
        let c = n / 2;
        // forward: pre = e^{+2pi i i c/N}, post = e^{+2pi i p c/N} e^{-2pi i c^2/N}
        let s = match dir {
            Direction::Forward => T::one(),
            Direction::Inverse => -T::one(),
        };
        let fft = match dir {
            Direction::Forward => planner.plan_fft_forward(n),
            Direction::Inverse => planner.plan_fft_inverse(n),
        };
        let cc = twiddle((c % n) * (c % n), n, -s);
        let pre = (0..n).map(|i| twiddle((i * c) % n, n, s)).collect();
        let post = (0..n).map(|p| twiddle((p * c) % n, n, s) * cc).collect();
        Self { fft, pre, post }
    }

    fn run_rows(&self, data: &mut [Complex<T>], n: usize) {
        data.par_chunks_mut(n).for_each(|row| {
            for (v, w) in row.iter_mut().zip(&self.pre) {
                *v *= w;
            }
            self.fft.process(row);
            for (v, w) in row.iter_mut().zip(&self.post) {
                *v *= w;
            }
        });
    }
}

fn transpose<T: Copy + Send + Sync>(src: &[T], nx: usize, ny: usize) -> Vec<T> {
    (0..nx)
        .into_par_iter()
        .flat_map_iter(|i| (0..ny).map(move |j| src[j * nx + i]))
        .collect()
}

/// Centred 2-D DFT of a row-major `nx` × `ny` array (x fastest). Unnormalized.
pub fn centered_dft2<T: Real>(
    data: &[Complex<T>],
    nx: usize,
    ny: usize,
    dir: Direction,
) -> Vec<Complex<T>> {
    assert_eq!(data.len(), nx * ny);
    let mut planner = FftPlanner::new();
    let ax = Axis::new(&mut planner, nx, dir);
    let ay = Axis::new(&mut planner, ny, dir);
    let mut buf = data.to_vec();
    ax.run_rows(&mut buf, nx);
    let mut t = transpose(&buf, nx, ny);
    ay.run_rows(&mut t, ny);
    transpose(&t, ny, nx)
}

/// Naive centred 1-D DFT; test oracle only.
pub fn centered_dft1_naive<T: Real>(data: &[Complex<T>], dir: Direction) -> Vec<Complex<T>> {
    let n = data.len();
    let c = n / 2;
    let s = match dir {
        Direction::Forward => -T::one(),
        Direction::Inverse => T::one(),
    };
    (0..n)
        .map(|p| {
            data.iter().enumerate().fold(Complex::new(T::zero(), T::zero()), |acc, (i, &v)| {
                let prod = (i as i64 - c as i64) * (p as i64 - c as i64);
                let red = prod.rem_euclid(n as i64) as usize;
                acc + v * twiddle(red, n, s)
            })
        })
        .collect()
}

/// Separable matrix DFT onto arbitrary output coordinates:
/// `out[q, p] = sum_{j,i} in[j, i] exp(-i (kx_p x_i + ky_q y_j))`, with `kx_p x_i` supplied
/// as the phase tables `wx[p][i]` and `wy[q][j]`.
pub fn matrix_dft2<T: Real>(
    data: &[Complex<T>],
    nx: usize,
    ny: usize,
    wx: &[Vec<Complex<T>>],
    wy: &[Vec<Complex<T>>],
) -> Vec<Complex<T>> {
    assert_eq!(data.len(), nx * ny);
    let mx = wx.len();
    let my = wy.len();
    // stage 1: contract x for each input row -> ny × mx
    let stage: Vec<Complex<T>> = data
        .par_chunks(nx)
        .flat_map_iter(|row| {
            wx.iter().map(move |w| {
                row.iter()
                    .zip(w)
                    .fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| acc + a * b)
            })
        })
        .collect();
    // stage 2: contract y -> my × mx
    (0..my)
        .into_par_iter()
        .flat_map_iter(|q| {
            let w = &wy[q];
            let stage = &stage;
            (0..mx).map(move |p| {
                (0..ny).fold(Complex::new(T::zero(), T::zero()), |acc, j| {
                    acc + stage[j * mx + p] * w[j]
                })
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pseudo_random(n: usize, seed: u64) -> Vec<Complex<f64>> {
        let mut s = seed;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
        };
        (0..n).map(|_| Complex::new(next(), next())).collect()
    }

    #[test]
    fn matches_naive_for_odd_and_even_sizes() {
        for &(nx, ny) in &[(8usize, 8usize), (7, 5), (12, 9), (1 << 5, 6)] {
            let data = pseudo_random(nx * ny, nx as u64 * 31 + ny as u64);
            for dir in [Direction::Forward, Direction::Inverse] {
                let fast = centered_dft2(&data, nx, ny, dir);
                // separable naive: rows then columns
                let mut rows: Vec<Complex<f64>> = Vec::new();
                for r in data.chunks(nx) {
                    rows.extend(centered_dft1_naive(r, dir));
                }
                let mut out = vec![Complex::new(0.0, 0.0); nx * ny];
                for i in 0..nx {
                    let col: Vec<_> = (0..ny).map(|j| rows[j * nx + i]).collect();
                    for (j, v) in centered_dft1_naive(&col, dir).into_iter().enumerate() {
                        out[j * nx + i] = v;
                    }
                }
                let err = fast
                    .iter()
                    .zip(&out)
                    .map(|(a, b)| (a - b).norm())
                    .fold(0.0, f64::max);
                assert!(err < 1e-12, "{nx}x{ny} {dir:?}: {err}");
            }
        }
    }

    #[test]
    fn forward_then_inverse_is_identity_up_to_n() {
        let (nx, ny) = (16, 10);
        let data = pseudo_random(nx * ny, 7);
        let back = centered_dft2(&centered_dft2(&data, nx, ny, Direction::Forward), nx, ny, Direction::Inverse);
        let scale = (nx * ny) as f64;
        for (a, b) in back.iter().zip(&data) {
            assert!((a / scale - b).norm() < 1e-13);
        }
    }

    #[test]
    fn delta_at_centre_is_flat() {
        let n = 9;
        let mut data = vec![Complex::new(0.0, 0.0); n * n];
        data[(n / 2) * n + n / 2] = Complex::new(1.0, 0.0);
        let out = centered_dft2(&data, n, n, Direction::Forward);
        assert!(out.iter().all(|c| (c - Complex::new(1.0, 0.0)).norm() < 1e-14));
    }
}
