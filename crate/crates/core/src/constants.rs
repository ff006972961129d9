//! CODATA 2018 physical constants (SI units).

/// Elementary charge (C).
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Reduced Planck constant (J s).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Vacuum magnetic permeability (N A^-2).
pub const MU_0: f64 = 1.256_637_062_12e-6;
/// Vacuum electric permittivity (F m^-1).
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;
/// Bohr magneton (J T^-1).
pub const BOHR_MAGNETON: f64 = 9.274_010_078_3e-24;

/// Electron wavelength at 300 keV used by the reference scenarios (m).
pub const WAVELENGTH_300KEV: f64 = 1.9687e-12;
