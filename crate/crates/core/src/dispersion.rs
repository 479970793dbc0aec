//! Log-periodic dispersion phase model.
//!
//! Above the cap frequency the phase is `Φ(ω) = −φ₀ ln(ω/ω₀)`, whose group
//! delay `φ₀/ω` grows toward low frequencies as the active region moves out
//! along the arms. Below an optional cap `ω_L` the phase continues linearly
//! with a constant group delay `τ_c`:
//!
//! ```text
//! Φ(ω) = Φ(ω_L) + τ_c (ω_L − ω),   ω < ω_L
//! ```
//!
//! A dispersed field carries `e^{+jΦ}`; compression multiplies by `e^{−jΦ}`.

use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use num_complex::Complex64;
#[allow(unused_imports)] // libm-backed methods when std is absent
use num_traits::Float;

use crate::error::{Error, Result};
use crate::spectral::{ComplexSpectrum, DelayCurve, FrequencyGrid, PhaseCurve};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cap {
    pub f_low: f64,
    pub tau_c: f64,
}

/// Requested cap; `tau_c: None` selects `φ₀/ω_L`, which keeps the group
/// delay continuous at the cap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapSpec {
    pub f_low: f64,
    pub tau_c: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionModel {
    phi0: f64,
    f0: f64,
    cap: Option<Cap>,
}

impl DispersionModel {
    pub fn new(phi0: f64, f0: f64) -> Result<Self> {
        if !(phi0 > 0.0) || !phi0.is_finite() {
            return Err(Error::invalid("phi0", "must be finite and positive"));
        }
        if !(f0 > 0.0) || !f0.is_finite() {
            return Err(Error::invalid("f0", "must be finite and positive"));
        }
        Ok(DispersionModel { phi0, f0, cap: None })
    }

    pub fn with_cap(self, cap: CapSpec) -> Result<Self> {
        if !(cap.f_low > 0.0 && cap.f_low < self.f0) {
            return Err(Error::invalid("f_low", "must satisfy 0 < f_low < f0"));
        }
        let tau_c = cap.tau_c.unwrap_or(self.phi0 / (TAU * cap.f_low));
        if !(tau_c > 0.0) || !tau_c.is_finite() {
            return Err(Error::invalid("tau_c", "must be finite and positive"));
        }
        Ok(DispersionModel {
            cap: Some(Cap {
                f_low: cap.f_low,
                tau_c,
            }),
            ..self
        })
    }

    pub fn without_cap(self) -> Self {
        DispersionModel { cap: None, ..self }
    }

    pub fn phi0(&self) -> f64 {
        self.phi0
    }
    pub fn f0(&self) -> f64 {
        self.f0
    }
    pub fn cap(&self) -> Option<Cap> {
        self.cap
    }

    /// Phase at frequency `f` (Hz). `f` must be positive.
    pub fn phase_at(&self, f: f64) -> f64 {
        match self.cap {
            Some(cap) if f < cap.f_low => {
                self.log_phase(cap.f_low) + cap.tau_c * TAU * (cap.f_low - f)
            }
            _ => self.log_phase(f),
        }
    }

    fn log_phase(&self, f: f64) -> f64 {
        // Written as ln(f0/f) so the phase at f0 is +0.
        self.phi0 * (self.f0 / f).ln()
    }

    /// Analytic group delay `−dΦ/dω` at `f`.
    pub fn group_delay_at(&self, f: f64) -> f64 {
        match self.cap {
            Some(cap) if f < cap.f_low => cap.tau_c,
            _ => self.phi0 / (TAU * f),
        }
    }

    /// Largest group delay over `grid`.
    pub fn max_group_delay(&self, grid: &FrequencyGrid) -> f64 {
        // The delay is non-increasing in frequency above the cap and flat below.
        let lowest = grid.f_start().max(grid.f_step() * 1e-6);
        match self.cap {
            Some(cap) if lowest < cap.f_low => cap.tau_c.max(self.phi0 / (TAU * cap.f_low)),
            _ => self.group_delay_at(lowest),
        }
    }
}

/// `φ₀ = −π / ln τ`, zero-dispersion frequency `f0`, no cap.
pub fn default_model(tau: f64, f0: f64) -> Result<DispersionModel> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::invalid("tau", "must lie in (0, 1)"));
    }
    DispersionModel::new(-PI / tau.ln(), f0)
}

fn require_positive(grid: &FrequencyGrid) -> Result<()> {
    if grid.f_start() <= 0.0 {
        return Err(Error::ZeroFrequency);
    }
    Ok(())
}

pub fn model_phase(model: &DispersionModel, grid: &FrequencyGrid) -> Result<PhaseCurve> {
    require_positive(grid)?;
    Ok(PhaseCurve {
        grid: *grid,
        phase: grid.freqs().map(|f| model.phase_at(f)).collect(),
    })
}

pub fn model_group_delay(model: &DispersionModel, grid: &FrequencyGrid) -> Result<DelayCurve> {
    require_positive(grid)?;
    Ok(DelayCurve {
        grid: *grid,
        delay: grid.freqs().map(|f| model.group_delay_at(f)).collect(),
    })
}

fn rotate(spectrum: &ComplexSpectrum, model: &DispersionModel, scale: f64) -> Result<ComplexSpectrum> {
    require_positive(&spectrum.grid)?;
    let values: Vec<Complex64> = spectrum
        .values
        .iter()
        .zip(spectrum.grid.freqs())
        .map(|(v, f)| v * Complex64::from_polar(1.0, scale * model.phase_at(f)))
        .collect();
    Ok(ComplexSpectrum {
        grid: spectrum.grid,
        values,
    })
}

fn check_passes(passes: u32) -> Result<()> {
    if passes == 0 {
        return Err(Error::invalid("passes", "must be at least 1"));
    }
    Ok(())
}

/// Multiplies by `e^{+j·passes·Φ}`: the field an antenna with this
/// dispersion would radiate (one pass) or receive after a round trip (two).
pub fn apply_dispersion(spectrum: &ComplexSpectrum, model: &DispersionModel, passes: u32) -> Result<ComplexSpectrum> {
    check_passes(passes)?;
    rotate(spectrum, model, passes as f64)
}

/// Multiplies by `e^{−j·passes·Φ}`, undoing [`apply_dispersion`].
pub fn compress(spectrum: &ComplexSpectrum, model: &DispersionModel, passes: u32) -> Result<ComplexSpectrum> {
    check_passes(passes)?;
    rotate(spectrum, model, -(passes as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::group_delay;
    use approx::assert_relative_eq;

    fn optimized() -> DispersionModel {
        DispersionModel::new(18.39, 10.8e9)
            .unwrap()
            .with_cap(CapSpec {
                f_low: 0.8e9,
                tau_c: Some(3.69e-9),
            })
            .unwrap()
    }

    #[test]
    fn default_model_values() {
        let m = default_model(0.8547, 10e9).unwrap();
        assert!((m.phi0() - 20.01).abs() < 0.005);
        assert_relative_eq!(default_model((-PI).exp(), 1e9).unwrap().phi0(), 1.0, max_relative = 1e-14);
        assert_relative_eq!(default_model(0.5, 1e9).unwrap().phi0(), 4.5324, max_relative = 1e-4);
        assert!(default_model(1.0, 1e9).is_err());
        assert!(default_model(0.0, 1e9).is_err());
        assert!(m.cap().is_none());
    }

    #[test]
    fn invariants_on_construction() {
        assert!(DispersionModel::new(0.0, 1e9).is_err());
        assert!(DispersionModel::new(1.0, -1e9).is_err());
        let m = DispersionModel::new(20.0, 10e9).unwrap();
        assert!(m.with_cap(CapSpec { f_low: 11e9, tau_c: None }).is_err());
        assert!(m.with_cap(CapSpec { f_low: 1e9, tau_c: Some(-1.0) }).is_err());
        let capped = m.with_cap(CapSpec { f_low: 0.8e9, tau_c: None }).unwrap();
        assert_relative_eq!(capped.cap().unwrap().tau_c, 20.0 / (TAU * 0.8e9));
    }

    #[test]
    fn model_phase_examples() {
        let m = default_model(0.8547, 10e9).unwrap();
        assert_eq!(m.phase_at(10e9), 0.0);
        assert_relative_eq!(m.phase_at(5e9), m.phi0() * 2f64.ln(), max_relative = 1e-14);
        assert_relative_eq!(m.phase_at(5e9), 13.87, max_relative = 1e-3);

        let o = optimized();
        let at_cap = -18.39 * (0.8f64 / 10.8).ln();
        let expected = at_cap + 3.69e-9 * TAU * (0.8e9 - 0.4e9);
        assert_relative_eq!(o.phase_at(0.4e9), expected, max_relative = 1e-13);

        let with_dc = FrequencyGrid::new(0.0, 1e6, 10).unwrap();
        assert_eq!(model_phase(&m, &with_dc), Err(Error::ZeroFrequency));
    }

    #[test]
    fn model_group_delay_examples() {
        let m = default_model(0.8547, 10e9).unwrap();
        assert_relative_eq!(m.group_delay_at(1e9), 3.185e-9, max_relative = 1e-3);
        assert_relative_eq!(m.group_delay_at(10e9), m.phi0() / (TAU * 10e9));
        assert_eq!(optimized().group_delay_at(0.5e9), 3.69e-9);
    }

    #[test]
    fn cap_is_continuous() {
        let m = DispersionModel::new(18.39, 10.8e9)
            .unwrap()
            .with_cap(CapSpec { f_low: 0.8e9, tau_c: None })
            .unwrap();
        let below = m.phase_at(0.8e9 * (1.0 - 1e-15));
        let at = m.phase_at(0.8e9);
        assert!((below - at).abs() < 1e-12 * at.abs().max(1.0));
        let gd_below = m.group_delay_at(0.8e9 * (1.0 - 1e-15));
        assert_relative_eq!(gd_below, m.group_delay_at(0.8e9), max_relative = 1e-12);
        // An explicit tau_c keeps the phase continuous even though the delay jumps.
        let o = optimized();
        assert!((o.phase_at(0.8e9 * (1.0 - 1e-15)) - o.phase_at(0.8e9)).abs() < 1e-12 * o.phase_at(0.8e9));
    }

    #[test]
    fn log_periodic_half_turn() {
        let tau = 0.8547;
        let m = default_model(tau, 10e9).unwrap();
        for i in 0..50 {
            let f = 1e9 + i as f64 * 0.17e9;
            assert!((m.phase_at(tau * f) - m.phase_at(f) - PI).abs() < 1e-9);
        }
    }

    #[test]
    fn apply_and_compress_are_inverse() {
        let g = FrequencyGrid::span(0.8e9, 10e9, 50e6).unwrap();
        let x = ComplexSpectrum::from_fn(g, |f| Complex64::new((f * 1e-9).sin(), 0.3)).unwrap();
        let m = optimized();
        let d = apply_dispersion(&x, &m, 1).unwrap();
        let back = compress(&d, &m, 1).unwrap();
        for ((a, b), c) in back.values.iter().zip(&x.values).zip(&d.values) {
            assert!((a - b).norm() <= 1e-12 * b.norm().max(1e-300));
            assert_relative_eq!(c.norm(), b.norm(), max_relative = 1e-14);
        }
        let two = compress(&d, &m, 2).unwrap();
        let once_more = compress(&compress(&d, &m, 1).unwrap(), &m, 1).unwrap();
        for (a, b) in two.values.iter().zip(&once_more.values) {
            assert!((a - b).norm() < 1e-12);
        }
        assert!(apply_dispersion(&x, &m, 0).is_err());
    }

    #[test]
    fn dispersed_phase_group_delay_matches_model() {
        // Sign conformance: e^{+jΦ} on the field gives a positive delay φ₀/ω.
        let g = FrequencyGrid::span(1e9, 10e9, 1e6).unwrap();
        let m = default_model(0.8547, 10e9).unwrap();
        let ones = ComplexSpectrum::from_fn(g, |_| Complex64::new(1.0, 0.0)).unwrap();
        let d = apply_dispersion(&ones, &m, 1).unwrap();
        let wrapped = PhaseCurve::new(g, d.values.iter().map(|v| v.arg()).collect()).unwrap();
        let phase = crate::spectral::unwrap_phase_from_top(&wrapped);
        let gd = group_delay(&phase).unwrap();
        let analytic = model_group_delay(&m, &g).unwrap();
        for (a, b) in gd.delay.iter().zip(&analytic.delay).skip(1).take(g.len() - 2) {
            assert_relative_eq!(*a, *b, max_relative = 1e-5);
        }
    }

    #[test]
    fn max_group_delay_over_grid() {
        let g = FrequencyGrid::span(0.05e9, 12e9, 10e6).unwrap();
        let m = default_model(0.8547, 10e9).unwrap();
        assert_relative_eq!(m.max_group_delay(&g), m.group_delay_at(0.05e9));
        assert_eq!(optimized().max_group_delay(&g), 3.69e-9);
    }
}
