//! Point-scatterer B-scan surrogate.
//!
//! An antenna at height `h` scans over a half-space with a point target at
//! depth `d`. Each trace is the excitation delayed by the straight-ray
//! two-way travel time, scaled by geometric spreading and dispersed by the
//! antenna model once on transmit and once on receive.
//!
//! The ray is not refracted at the surface: the air leg is vertical and the
//! whole horizontal offset is charged to the soil leg. The scatterer is
//! frequency-flat with unit reflectivity and the soil is non-dispersive.

use alloc::vec::Vec;
use core::f64::consts::TAU;

use num_complex::Complex64;
#[allow(unused_imports)] // libm-backed methods when std is absent
use num_traits::Float;

use crate::dispersion::DispersionModel;
use crate::error::{Error, Result};
use crate::geometry::Medium;
use crate::pulsegen::{self, PulseSpec, TimeAxis, TimeSeries};
use crate::spectral::FrequencyGrid;

/// Dispersion passes for a monostatic transmit/receive round trip.
pub const ROUND_TRIP_PASSES: u32 = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct ScanConfig {
    x_positions: Vec<f64>,
    antenna_height: f64,
    target_depth: f64,
    target_x: f64,
    soil: Medium,
    air: Medium,
    amplitude_exponent: f64,
}

impl ScanConfig {
    pub fn new(
        x_positions: Vec<f64>,
        antenna_height: f64,
        target_depth: f64,
        target_x: f64,
        soil: Medium,
    ) -> Result<Self> {
        if x_positions.is_empty() {
            return Err(Error::invalid("x_positions", "scan needs at least one position"));
        }
        if x_positions.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("x_positions", "must be strictly increasing"));
        }
        if x_positions.iter().any(|x| !x.is_finite()) || !target_x.is_finite() {
            return Err(Error::NonFinite("scan positions"));
        }
        if !(antenna_height >= 0.0) {
            return Err(Error::invalid("antenna_height", "must be >= 0"));
        }
        if !(target_depth > 0.0) {
            return Err(Error::invalid("target_depth", "must be positive"));
        }
        Ok(ScanConfig {
            x_positions,
            antenna_height,
            target_depth,
            target_x,
            soil,
            air: Medium::free_space(),
            amplitude_exponent: 2.0,
        })
    }

    /// `n` positions evenly spaced over `[x_min, x_max]`.
    pub fn linear_positions(x_min: f64, x_max: f64, n: usize) -> Vec<f64> {
        if n == 1 {
            return alloc::vec![0.5 * (x_min + x_max)];
        }
        let step = (x_max - x_min) / (n - 1) as f64;
        (0..n).map(|k| x_min + k as f64 * step).collect()
    }

    pub fn with_air(mut self, air: Medium) -> Self {
        self.air = air;
        self
    }

    pub fn with_amplitude_exponent(mut self, exponent: f64) -> Result<Self> {
        if !exponent.is_finite() || exponent < 0.0 {
            return Err(Error::invalid("amplitude_exponent", "must be finite and >= 0"));
        }
        self.amplitude_exponent = exponent;
        Ok(self)
    }

    pub fn x_positions(&self) -> &[f64] {
        &self.x_positions
    }
    pub fn antenna_height(&self) -> f64 {
        self.antenna_height
    }
    pub fn target_depth(&self) -> f64 {
        self.target_depth
    }
    pub fn target_x(&self) -> f64 {
        self.target_x
    }
    pub fn soil(&self) -> &Medium {
        &self.soil
    }
    pub fn air(&self) -> &Medium {
        &self.air
    }
    pub fn amplitude_exponent(&self) -> f64 {
        self.amplitude_exponent
    }

    fn soil_leg(&self, x: f64) -> f64 {
        let dx = x - self.target_x;
        (self.target_depth * self.target_depth + dx * dx).sqrt()
    }

    /// One-way geometric path length.
    pub fn path_length(&self, x: f64) -> f64 {
        self.antenna_height + self.soil_leg(x)
    }

    /// `(r_ref / r(x))^p`, equal to 1 directly above the target.
    pub fn amplitude(&self, x: f64) -> f64 {
        (self.path_length(self.target_x) / self.path_length(x)).powf(self.amplitude_exponent)
    }
}

/// Straight-ray two-way travel time from the antenna at `x` to the target.
pub fn two_way_delay(scan: &ScanConfig, x: f64) -> f64 {
    let one_way = scan.antenna_height / scan.air.velocity() + scan.soil_leg(x) / scan.soil.velocity();
    2.0 * one_way
}

/// Traces on a shared time axis, one per scan position.
#[derive(Debug, Clone, PartialEq)]
pub struct BScan {
    pub x_positions: Vec<f64>,
    pub axis: TimeAxis,
    /// `traces[ix][it]`.
    pub traces: Vec<Vec<f64>>,
    /// Largest relative imaginary residue left by the inverse transforms.
    pub imag_residue: f64,
}

impl BScan {
    pub fn n_positions(&self) -> usize {
        self.traces.len()
    }

    pub fn column(&self, ix: usize) -> TimeSeries {
        TimeSeries {
            t0: self.axis.t0,
            dt: self.axis.dt,
            samples: self.traces[ix].clone(),
        }
    }
}

fn max_delay(scan: &ScanConfig) -> f64 {
    scan.x_positions
        .iter()
        .map(|&x| two_way_delay(scan, x))
        .fold(0.0, f64::max)
}

fn synth_columns(
    scan: &ScanConfig,
    pulse: &PulseSpec,
    axis: &TimeAxis,
    dispersion: Option<(&DispersionModel, &FrequencyGrid)>,
) -> Result<BScan> {
    let excitation = pulsegen::differentiated_gaussian(pulse, axis.t0, axis.dt, axis.n)?;
    let (f_lo, f_hi) = match dispersion {
        Some((_, band)) => {
            if band.f_start() <= 0.0 {
                return Err(Error::ZeroFrequency);
            }
            (band.f_start(), band.f_end())
        }
        None => (f64::INFINITY, f64::NEG_INFINITY),
    };
    let mut traces = Vec::with_capacity(scan.x_positions.len());
    let mut residue = 0.0f64;
    for &x in &scan.x_positions {
        let delay = two_way_delay(scan, x);
        let amp = scan.amplitude(x);
        let out = pulsegen::apply_response(&excitation, |f| {
            let propagation = Complex64::from_polar(amp, -TAU * f * delay);
            match dispersion {
                Some((model, _)) if f >= f_lo && f <= f_hi => {
                    propagation
                        * Complex64::from_polar(1.0, ROUND_TRIP_PASSES as f64 * model.phase_at(f))
                }
                _ => propagation,
            }
        });
        residue = residue.max(out.imag_residue);
        traces.push(out.series.samples);
    }
    Ok(BScan {
        x_positions: scan.x_positions.clone(),
        axis: *axis,
        traces,
        imag_residue: residue,
    })
}

/// Dispersed B-scan: per position, `V(ω) · A(x) · e^{−jω t₂(x)} · e^{+j2Φ(ω)}`
/// with the model phase applied on `band` only.
pub fn synth_bscan(
    scan: &ScanConfig,
    model: &DispersionModel,
    pulse: &PulseSpec,
    band: &FrequencyGrid,
    axis: &TimeAxis,
) -> Result<BScan> {
    let extra = max_delay(scan) + (pulse.mu() - axis.t0).max(0.0);
    pulsegen::check_record(axis, model, band, ROUND_TRIP_PASSES, extra)?;
    synth_columns(scan, pulse, axis, Some((model, band)))
}

/// The same scene with no antenna dispersion.
pub fn synth_reference_bscan(scan: &ScanConfig, pulse: &PulseSpec, axis: &TimeAxis) -> Result<BScan> {
    let required = max_delay(scan) + (pulse.mu() - axis.t0).max(0.0);
    if axis.duration() < required {
        return Err(Error::RecordTooShort {
            required_s: required,
            actual_s: axis.duration(),
        });
    }
    synth_columns(scan, pulse, axis, None)
}

/// Removes the round-trip dispersion: each column times `e^{−j2Φ(ω)}` on `band`.
pub fn compress_bscan(bscan: &BScan, model: &DispersionModel, band: &FrequencyGrid) -> Result<BScan> {
    if band.f_start() <= 0.0 {
        return Err(Error::ZeroFrequency);
    }
    let (f_lo, f_hi) = (band.f_start(), band.f_end());
    let mut traces = Vec::with_capacity(bscan.traces.len());
    let mut residue = 0.0f64;
    for ix in 0..bscan.n_positions() {
        let out = pulsegen::apply_response(&bscan.column(ix), |f| {
            if f >= f_lo && f <= f_hi {
                Complex64::from_polar(1.0, -(ROUND_TRIP_PASSES as f64) * model.phase_at(f))
            } else {
                Complex64::new(1.0, 0.0)
            }
        });
        residue = residue.max(out.imag_residue);
        traces.push(out.series.samples);
    }
    Ok(BScan {
        x_positions: bscan.x_positions.clone(),
        axis: bscan.axis,
        traces,
        imag_residue: residue,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BScanMetrics {
    pub apex_x: f64,
    pub apex_time: f64,
    /// −6 dB envelope width of the apex column.
    pub range_width: f64,
}

/// Sub-sample peak position of `env` by a parabola through the maximum and
/// its two neighbours.
pub fn peak_time(env: &TimeSeries) -> Option<f64> {
    let (k, _) = env
        .samples
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))?;
    let s = &env.samples;
    let offset = if k > 0 && k + 1 < s.len() {
        let denom = s[k - 1] - 2.0 * s[k] + s[k + 1];
        if denom < 0.0 {
            0.5 * (s[k - 1] - s[k + 1]) / denom
        } else {
            0.0
        }
    } else {
        0.0
    };
    Some(env.time(k) + offset * env.dt)
}

pub fn bscan_metrics(bscan: &BScan) -> Result<BScanMetrics> {
    if bscan.traces.is_empty() {
        return Err(Error::Degenerate("B-scan has no columns"));
    }
    let mut best: Option<(usize, f64, TimeSeries)> = None;
    for ix in 0..bscan.n_positions() {
        let env = pulsegen::envelope(&bscan.column(ix))?;
        let peak = env.peak();
        if best.as_ref().is_none_or(|(_, p, _)| peak > *p) {
            best = Some((ix, peak, env));
        }
    }
    let (ix, peak, env) = best.ok_or(Error::Degenerate("B-scan has no columns"))?;
    if !(peak > 0.0) {
        return Err(Error::Degenerate("B-scan is all zero"));
    }
    Ok(BScanMetrics {
        apex_x: bscan.x_positions[ix],
        apex_time: peak_time(&env).ok_or(Error::Degenerate("empty column"))?,
        range_width: pulsegen::half_max_width(&env)?,
    })
}

#[cfg(test)]
mod tests {
    use std::vec;
    use super::*;
    use crate::dispersion::default_model;
    use crate::pulsegen::fidelity;
    use crate::SPEED_OF_LIGHT;
    use approx::assert_relative_eq;

    fn paper_scene(xs: Vec<f64>) -> ScanConfig {
        ScanConfig::new(xs, 0.025, 0.20, 0.0, Medium::from_permittivity(2.5).unwrap()).unwrap()
    }

    #[test]
    fn two_way_delay_examples() {
        let scan = paper_scene(vec![-0.1, 0.0, 0.1]);
        let t = two_way_delay(&scan, 0.0);
        let expected = 2.0 * (0.025 / SPEED_OF_LIGHT + 0.20 * 2.5f64.sqrt() / SPEED_OF_LIGHT);
        assert_relative_eq!(t, expected, max_relative = 1e-14);
        assert!((t - 2.276e-9).abs() < 1e-12);
        assert!(two_way_delay(&scan, 0.05) > t && two_way_delay(&scan, -0.05) > t);

        let shallow =
            ScanConfig::new(vec![0.0], 0.025, 1e-12, 0.0, Medium::from_permittivity(2.5).unwrap()).unwrap();
        assert_relative_eq!(two_way_delay(&shallow, 0.0), 2.0 * 0.025 / SPEED_OF_LIGHT, max_relative = 1e-9);
    }

    #[test]
    fn scan_validation() {
        let soil = Medium::from_permittivity(2.5).unwrap();
        assert!(ScanConfig::new(vec![], 0.025, 0.2, 0.0, soil).is_err());
        assert!(ScanConfig::new(vec![0.0, 0.0], 0.025, 0.2, 0.0, soil).is_err());
        assert!(ScanConfig::new(vec![0.0], -0.1, 0.2, 0.0, soil).is_err());
        assert!(ScanConfig::new(vec![0.0], 0.025, 0.0, 0.0, soil).is_err());
    }

    fn small_setup() -> (ScanConfig, DispersionModel, PulseSpec, FrequencyGrid, TimeAxis) {
        let scan = paper_scene(ScanConfig::linear_positions(-0.2, 0.2, 9));
        let model = default_model(0.8547, 10e9).unwrap();
        let band = FrequencyGrid::span(0.8e9, 12e9, 1e6).unwrap();
        let pulse = PulseSpec::new(1.0, 0.0, 6e9).unwrap();
        let axis = TimeAxis::for_dispersion(&model, &band, 2, &pulse, 5e-9).unwrap();
        let pulse = pulse.with_mu(1e-9);
        (scan, model, pulse, band, axis)
    }

    #[test]
    fn compressed_matches_delay_only_reference() {
        let (scan, model, pulse, band, axis) = small_setup();
        let dispersed = synth_bscan(&scan, &model, &pulse, &band, &axis).unwrap();
        let reference = synth_reference_bscan(&scan, &pulse, &axis).unwrap();
        let compressed = compress_bscan(&dispersed, &model, &band).unwrap();
        assert!(dispersed.imag_residue <= 1e-12 && compressed.imag_residue <= 1e-12);
        for ix in 0..scan.x_positions().len() {
            let f = fidelity(&compressed.column(ix), &reference.column(ix)).unwrap();
            assert!(f >= 0.99, "column {ix}: {f}");
        }
        let over = compress_bscan(&compressed, &model, &band).unwrap();
        let once = fidelity(&compressed.column(4), &reference.column(4)).unwrap();
        let twice = fidelity(&over.column(4), &reference.column(4)).unwrap();
        assert!(twice < once);
    }

    #[test]
    fn apex_sits_over_target() {
        let (scan, model, pulse, band, axis) = small_setup();
        let dispersed = synth_bscan(&scan, &model, &pulse, &band, &axis).unwrap();
        let compressed = compress_bscan(&dispersed, &model, &band).unwrap();
        let md = bscan_metrics(&dispersed).unwrap();
        let mc = bscan_metrics(&compressed).unwrap();
        assert_eq!(mc.apex_x, 0.0);
        assert!((mc.apex_time - pulse.mu() - two_way_delay(&scan, 0.0)).abs() <= axis.dt);
        assert!(mc.range_width < md.range_width);
    }

    #[test]
    fn mirror_symmetry_and_energy_falloff() {
        let (scan, model, pulse, band, axis) = small_setup();
        let b = synth_bscan(&scan, &model, &pulse, &band, &axis).unwrap();
        let n = b.n_positions();
        let peak = b.traces.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        for ix in 0..n / 2 {
            for (a, c) in b.traces[ix].iter().zip(&b.traces[n - 1 - ix]) {
                assert!((a - c).abs() <= 1e-9 * peak);
            }
        }
        let energy: Vec<f64> = (0..n).map(|ix| b.column(ix).energy()).collect();
        for ix in n / 2..n - 1 {
            assert!(energy[ix + 1] < energy[ix]);
        }
    }

    #[test]
    fn record_too_short_is_reported() {
        let (scan, model, pulse, band, _) = small_setup();
        let short = TimeAxis::new(0.0, 20e-12, 512).unwrap();
        assert!(matches!(
            synth_bscan(&scan, &model, &pulse, &band, &short),
            Err(Error::RecordTooShort { .. })
        ));
    }

    #[test]
    fn negligible_dispersion_is_delay_only() {
        let (scan, _, pulse, band, axis) = small_setup();
        let flat = DispersionModel::new(1e-9, 10e9).unwrap();
        let b = synth_bscan(&scan, &flat, &pulse, &band, &axis).unwrap();
        let r = synth_reference_bscan(&scan, &pulse, &axis).unwrap();
        assert!(fidelity(&b.column(4), &r.column(4)).unwrap() >= 0.999);
        let c = compress_bscan(&b, &flat, &band).unwrap();
        for (a, o) in c.traces[4].iter().zip(&b.traces[4]) {
            assert!((a - o).abs() < 1e-6);
        }
    }

    #[test]
    fn single_position_scan() {
        let (_, model, pulse, band, axis) = small_setup();
        let scan = paper_scene(vec![0.0]);
        let b = synth_bscan(&scan, &model, &pulse, &band, &axis).unwrap();
        let m = bscan_metrics(&b).unwrap();
        assert_eq!(m.apex_x, 0.0);
        assert!(m.range_width > 0.0);
    }
}
