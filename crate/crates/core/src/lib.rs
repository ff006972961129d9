//! Scalar wave optics for conformal (circular-sector) beam transformations: harmonic
//! phase plates, Fresnel propagation, the charge distributions that realise the plates,
//! and multipole sorting by far-field spot position.
//!
//! Numerical code is generic over [`Real`] (`f32` or `f64`); the aliases below fix `f64`.

// `!(x > 0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod constants;
pub mod electrostatics;
pub mod error;
pub mod fft;
pub mod field;
pub mod grid;
pub mod io;
pub mod mask;
pub mod phase;
pub mod propagation;
pub mod scalar;
pub mod sorter;

pub use error::{OpticsError, Result};
pub use field::{
    make_multipole_beam, make_plane_wave, make_vortex, AnalyticBeam, ComplexField, Envelope,
    MultipolePhaseSpec, RealField,
};
pub use grid::{BeamParams, GridSpec};
pub use mask::Mask;
pub use phase::{
    analytic_map, compose_maps, sector_corrector_phase, sector_transformer_phase, ConformalMap,
    HarmonicPlate, Holomorphy, PlateKind, SectorTransformSpec,
};
pub use propagation::{
    apply_phase, fresnel_fft, fresnel_quadrature, lens_fourier, lens_fourier_window,
    stationary_phase_eval, Kernel, QuadratureBudget,
};
pub use scalar::Real;
pub use sorter::{SectorSorter, SorterConfig, SortingOptics, SpotMeasurement};

pub type Grid = GridSpec<f64>;
pub type Beam = BeamParams<f64>;
pub type Field = ComplexField<f64>;
pub type Scalars = RealField<f64>;
pub type Sector = SectorTransformSpec<f64>;
pub type Multipole = MultipolePhaseSpec<f64>;
pub type Map = ConformalMap<f64>;
pub type Sorter = SectorSorter<f64>;
pub type Field32 = ComplexField<f32>;
pub type Grid32 = GridSpec<f32>;
