//! Frequency-dispersion modeling and compensation for log-periodic sinuous
//! antennas.
//!
//! The crate is `no_std` and needs only `alloc`. It covers:
//!
//! * [`geometry`]: sinuous arm curves and the design rules around them,
//! * [`spectral`]: frequency grids, phase unwrapping, back-propagation,
//!   group delay and regularized deconvolution,
//! * [`dispersion`]: the log-periodic phase model with an optional
//!   constant-delay cap below the lowest operating frequency,
//! * [`pulsegen`]: differentiated-Gaussian excitations, spectral synthesis
//!   and pulse quality metrics,
//! * [`fitting`]: multi-start simplex fitting of the phase model,
//! * [`gprsim`]: a point-scatterer B-scan surrogate with two-way dispersion
//!   and compression.
#![no_std]
// Negated comparisons are how NaN fails the parameter checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod dispersion;
pub mod error;
pub mod fft;
pub mod fitting;
pub mod geometry;
pub mod gprsim;
pub mod optim;
pub mod pulsegen;
pub mod spectral;

pub use num_complex::Complex64;

pub use dispersion::{CapSpec, DispersionModel};
pub use error::{Error, Result};
pub use fitting::{FitConfig, FitParam, FitResult, Weighting};
pub use geometry::{Medium, PolarPolyline, SinuousParams};
pub use gprsim::{BScan, ScanConfig};
pub use pulsegen::{PulseMetrics, PulseSpec, TimeSeries};
pub use spectral::{ComplexSpectrum, DelayCurve, FrequencyGrid, PhaseCurve};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
