//! Field serialization: the CFOF binary format, 8-bit PGM previews and CSV matrices.
//!
//! CFOF layout (little-endian): `b"CFOF"`, `u32` version, `u32` nx, `u32` ny, `f64` dx,
//! `f64` dy, `f64` wavelength, then nx·ny `(re, im)` `f64` pairs, row-major, x fastest.

use std::io::{Read, Write};

use num_complex::Complex;

use crate::error::{OpticsError, Result};
use crate::field::{ComplexField, RealField};
use crate::grid::GridSpec;
use crate::scalar::Real;

pub const CFOF_MAGIC: &[u8; 4] = b"CFOF";
pub const CFOF_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct CfofData<T> {
    pub field: ComplexField<T>,
    pub wavelength: T,
}

pub fn write_cfof<T: Real, W: Write>(
    mut w: W,
    field: &ComplexField<T>,
    wavelength: T,
) -> Result<()> {
    let g = field.grid();
    let dim = |n: usize| {
        u32::try_from(n).map_err(|_| OpticsError::Format(format!("dimension {n} exceeds u32")))
    };
    let mut buf = Vec::with_capacity(40 + 16 * g.len());
    buf.extend_from_slice(CFOF_MAGIC);
    buf.extend_from_slice(&CFOF_VERSION.to_le_bytes());
    buf.extend_from_slice(&dim(g.nx)?.to_le_bytes());
    buf.extend_from_slice(&dim(g.ny)?.to_le_bytes());
    for v in [g.dx, g.dy, wavelength] {
        buf.extend_from_slice(&v.to_f64_lossy().to_le_bytes());
    }
    for c in field.samples() {
        buf.extend_from_slice(&c.re.to_f64_lossy().to_le_bytes());
        buf.extend_from_slice(&c.im.to_f64_lossy().to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

fn take<const N: usize>(bytes: &[u8], pos: &mut usize) -> Result<[u8; N]> {
    let end = *pos + N;
    let out = bytes
        .get(*pos..end)
        .ok_or_else(|| OpticsError::Format(format!("truncated at byte {}", *pos)))?;
    *pos = end;
    Ok(out.try_into().expect("slice length checked"))
}

pub fn read_cfof<T: Real, R: Read>(mut r: R) -> Result<CfofData<T>> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    let mut pos = 0;
    if &take::<4>(&bytes, &mut pos)? != CFOF_MAGIC {
        return Err(OpticsError::Format("bad magic".into()));
    }
    let version = u32::from_le_bytes(take(&bytes, &mut pos)?);
    if version != CFOF_VERSION {
        return Err(OpticsError::Format(format!("unsupported version {version}")));
    }
    let nx = u32::from_le_bytes(take(&bytes, &mut pos)?) as usize;
    let ny = u32::from_le_bytes(take(&bytes, &mut pos)?) as usize;
    let mut f = || -> Result<f64> { Ok(f64::from_le_bytes(take(&bytes, &mut pos)?)) };
    let (dx, dy, lambda) = (f()?, f()?, f()?);
    let grid = GridSpec::new(nx, ny, T::of(dx), T::of(dy))
        .map_err(|e| OpticsError::Format(e.to_string()))?;
    let expected = 40 + 16 * nx * ny;
    if bytes.len() != expected {
        return Err(OpticsError::Format(format!(
            "expected {expected} bytes, found {}",
            bytes.len()
        )));
    }
    let data = bytes[40..]
        .chunks_exact(16)
        .map(|ch| {
            let re = f64::from_le_bytes(ch[..8].try_into().unwrap());
            let im = f64::from_le_bytes(ch[8..].try_into().unwrap());
            Complex::new(T::of(re), T::of(im))
        })
        .collect();
    Ok(CfofData {
        field: ComplexField::new(grid, data)?,
        wavelength: T::of(lambda),
    })
}

/// Binary PGM (P5), min-max normalised to 0..=255; a constant image maps to 128.
/// The first image row is the largest y, so the picture has +y up.
pub fn write_pgm<T: Real, W: Write>(mut w: W, image: &RealField<T>) -> Result<()> {
    let g = image.grid();
    let (lo, hi) = (image.min(), image.max());
    let range = hi - lo;
    let mut buf = format!("P5\n{} {}\n255\n", g.nx, g.ny).into_bytes();
    for j in (0..g.ny).rev() {
        for i in 0..g.nx {
            let px = if range > T::zero() && range.is_finite() {
                let t = (image.at(i, j) - lo) / range * T::of(255.0);
                t.round().to_u8().unwrap_or(0)
            } else {
                128
            };
            buf.push(px);
        }
    }
    w.write_all(&buf)?;
    Ok(())
}

/// One CSV row per grid row (increasing y), shortest round-trip decimal formatting.
pub fn write_csv_matrix<T: Real, W: Write>(mut w: W, values: &RealField<T>) -> Result<()> {
    let g = values.grid();
    let mut out = String::new();
    for j in 0..g.ny {
        for i in 0..g.nx {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&values.at(i, j).to_string());
        }
        out.push('\n');
    }
    w.write_all(out.as_bytes())?;
    Ok(())
}
