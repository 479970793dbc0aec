//! Differentiated-Gaussian excitation, FFT-based synthesis through a
//! transfer function, and pulse quality metrics.
//!
//! Continuous-time transforms are approximated by `X(f) = dt · Σ x[n]
//! e^{−j2πf(t0 + n·dt)}` on the bins `f_k = k / (n·dt)`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use num_complex::Complex64;
#[allow(unused_imports)] // libm-backed methods when std is absent
use num_traits::Float;

use crate::dispersion::DispersionModel;
use crate::error::{Error, Result};
use crate::fft;
use crate::spectral::{ComplexSpectrum, FrequencyGrid};

/// Full width at half maximum of a unit Gaussian, `2√(2 ln 2)`, rounded the
/// way the pulse-width convention quotes it.
pub const FWHM_FACTOR: f64 = 2.3548;

/// Minimum record length as a multiple of the largest in-band group delay.
pub const RECORD_DELAY_FACTOR: f64 = 8.0;

/// `v(t) = −v_peak · ((t−μ)/σ) · exp(0.5 − (t−μ)²/(2σ²))` with
/// `σ = 2.3548 / ω_BW`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseSpec {
    v_peak: f64,
    mu: f64,
    f_bw: f64,
}

impl PulseSpec {
    pub fn new(v_peak: f64, mu: f64, f_bw: f64) -> Result<Self> {
        if !(v_peak > 0.0) || !v_peak.is_finite() {
            return Err(Error::invalid("v_peak", "must be finite and positive"));
        }
        if !(f_bw > 0.0) || !f_bw.is_finite() {
            return Err(Error::invalid("f_bw", "must be finite and positive"));
        }
        if !mu.is_finite() {
            return Err(Error::NonFinite("mu"));
        }
        Ok(PulseSpec { v_peak, mu, f_bw })
    }

    pub fn v_peak(&self) -> f64 {
        self.v_peak
    }
    pub fn mu(&self) -> f64 {
        self.mu
    }
    pub fn f_bw(&self) -> f64 {
        self.f_bw
    }
    pub fn sigma(&self) -> f64 {
        FWHM_FACTOR / (TAU * self.f_bw)
    }

    pub fn with_mu(self, mu: f64) -> Self {
        PulseSpec { mu, ..self }
    }

    pub fn value_at(&self, t: f64) -> f64 {
        let u = (t - self.mu) / self.sigma();
        -self.v_peak * u * (0.5 - 0.5 * u * u).exp()
    }
}

/// Frequency of the spectral magnitude peak, `1/(2πσ) = f_bw / 2.3548`.
pub fn spectral_peak_frequency(spec: &PulseSpec) -> f64 {
    1.0 / (TAU * spec.sigma())
}

/// Uniform time axis `t_k = t0 + k·dt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeAxis {
    pub t0: f64,
    pub dt: f64,
    pub n: usize,
}

impl TimeAxis {
    pub fn new(t0: f64, dt: f64, n: usize) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::invalid("dt", "must be finite and positive"));
        }
        if n < 2 {
            return Err(Error::invalid("n", "time record needs at least 2 samples"));
        }
        if !t0.is_finite() {
            return Err(Error::NonFinite("t0"));
        }
        Ok(TimeAxis { t0, dt, n })
    }

    pub fn duration(&self) -> f64 {
        self.n as f64 * self.dt
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    pub fn bin_width(&self) -> f64 {
        1.0 / self.duration()
    }

    /// A record able to hold `passes` applications of `model` over `band`
    /// without noticeable wraparound: at least [`RECORD_DELAY_FACTOR`] times
    /// the largest in-band group delay plus `extra_delay`, power-of-two
    /// length, and a sample rate covering both the band and the pulse.
    pub fn for_dispersion(
        model: &DispersionModel,
        band: &FrequencyGrid,
        passes: u32,
        pulse: &PulseSpec,
        extra_delay: f64,
    ) -> Result<Self> {
        let f_nyquist = (1.25 * band.f_end()).max(8.0 * spectral_peak_frequency(pulse));
        let dt = 1.0 / (2.0 * f_nyquist);
        let needed = required_record_duration(model, band, passes) + extra_delay;
        let n = fft::next_pow2((needed / dt).ceil() as usize).max(4);
        TimeAxis::new(0.0, dt, n)
    }
}

/// [`RECORD_DELAY_FACTOR`] × `passes` × the largest model group delay in band.
pub fn required_record_duration(model: &DispersionModel, band: &FrequencyGrid, passes: u32) -> f64 {
    RECORD_DELAY_FACTOR * passes as f64 * model.max_group_delay(band)
}

/// Errors when `axis` is shorter than [`required_record_duration`] plus `extra_delay`.
pub fn check_record(
    axis: &TimeAxis,
    model: &DispersionModel,
    band: &FrequencyGrid,
    passes: u32,
    extra_delay: f64,
) -> Result<()> {
    let required = required_record_duration(model, band, passes) + extra_delay;
    if axis.duration() < required {
        return Err(Error::RecordTooShort {
            required_s: required,
            actual_s: axis.duration(),
        });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub t0: f64,
    pub dt: f64,
    pub samples: Vec<f64>,
}

impl TimeSeries {
    pub fn new(t0: f64, dt: f64, samples: Vec<f64>) -> Result<Self> {
        TimeAxis::new(t0, dt, samples.len())?;
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("time series"));
        }
        Ok(TimeSeries { t0, dt, samples })
    }

    pub fn axis(&self) -> TimeAxis {
        TimeAxis {
            t0: self.t0,
            dt: self.dt,
            n: self.samples.len(),
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    /// `Σ x² · dt`.
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|x| x * x).sum::<f64>() * self.dt
    }

    pub fn peak(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn bin_width(&self) -> f64 {
        self.axis().bin_width()
    }

    /// Grid of transform bins lying inside `[f_min, f_max]`, clipped to Nyquist.
    pub fn bin_grid(&self, f_min: f64, f_max: f64) -> Result<FrequencyGrid> {
        let df = self.bin_width();
        let last_bin = self.len() / 2;
        let k0 = (f_min / df - 1e-9).ceil().max(0.0) as usize;
        let k1 = ((f_max / df + 1e-9).floor() as usize).min(last_bin);
        if k1 <= k0 {
            return Err(Error::IncompatibleGrid(alloc::format!(
                "band [{f_min:e}, {f_max:e}] Hz holds fewer than 2 bins of width {df:e} Hz"
            )));
        }
        FrequencyGrid::new(k0 as f64 * df, df, k1 - k0 + 1)
    }
}

pub fn differentiated_gaussian(spec: &PulseSpec, t0: f64, dt: f64, n: usize) -> Result<TimeSeries> {
    let axis = TimeAxis::new(t0, dt, n)?;
    TimeSeries::new(t0, dt, (0..n).map(|k| spec.value_at(axis.time(k))).collect())
}

fn bin_position(f: f64, df: f64) -> Option<usize> {
    let pos = f / df;
    let k = pos.round();
    if (pos - k).abs() > 1e-6 || k < 0.0 {
        return None;
    }
    Some(k as usize)
}

/// Positive-frequency transform of `ts` sampled onto `grid`. The grid step
/// and start must be whole multiples of the bin width `1/(n·dt)` and the
/// grid must end at or below Nyquist.
pub fn forward_spectrum(ts: &TimeSeries, grid: &FrequencyGrid) -> Result<ComplexSpectrum> {
    let n = ts.len();
    let df = ts.bin_width();
    let stride = bin_position(grid.f_step(), df).filter(|&m| m >= 1).ok_or_else(|| {
        Error::IncompatibleGrid(alloc::format!(
            "f_step {:e} Hz must be an integer multiple of the bin width {df:e} Hz",
            grid.f_step()
        ))
    })?;
    let first = bin_position(grid.f_start(), df).ok_or_else(|| {
        Error::IncompatibleGrid(alloc::format!(
            "f_start {:e} Hz must be an integer multiple of the bin width {df:e} Hz",
            grid.f_start()
        ))
    })?;
    let last = first + stride * (grid.len() - 1);
    if last > n / 2 {
        return Err(Error::IncompatibleGrid(alloc::format!(
            "grid end {:e} Hz exceeds Nyquist {:e} Hz",
            grid.f_end(),
            0.5 / ts.dt
        )));
    }
    let spectrum = fft::forward_real(&ts.samples);
    let values = (0..grid.len())
        .map(|j| {
            let k = first + stride * j;
            let f = k as f64 * df;
            spectrum[k] * ts.dt * Complex64::from_polar(1.0, -TAU * f * ts.t0)
        })
        .collect();
    ComplexSpectrum::new(*grid, values)
}

/// Result of passing a real series through a frequency response.
#[derive(Debug, Clone, PartialEq)]
pub struct Filtered {
    pub series: TimeSeries,
    /// Largest imaginary part left by the inverse transform, relative to the
    /// largest real magnitude.
    pub imag_residue: f64,
}

/// Multiplies the transform of `ts` by `response(f)` on every non-negative
/// bin, mirrors it to keep the spectrum conjugate-symmetric and transforms
/// back. DC and Nyquist keep only the real part of the product.
pub fn apply_response(ts: &TimeSeries, response: impl Fn(f64) -> Complex64) -> Filtered {
    let n = ts.len();
    let df = ts.bin_width();
    let mut spec = fft::forward_real(&ts.samples);
    let half = n / 2;
    spec[0] = Complex64::new((spec[0] * response(0.0)).re, 0.0);
    for k in 1..n.div_ceil(2) {
        let v = spec[k] * response(k as f64 * df);
        spec[k] = v;
        spec[n - k] = v.conj();
    }
    if n.is_multiple_of(2) {
        spec[half] = Complex64::new((spec[half] * response(half as f64 * df)).re, 0.0);
    }
    let time = fft::inverse(&spec);
    let peak = time.iter().fold(0.0f64, |m, v| m.max(v.re.abs()));
    let residue = fft::max_imag(&time);
    Filtered {
        series: TimeSeries {
            t0: ts.t0,
            dt: ts.dt,
            samples: time.iter().map(|v| v.re).collect(),
        },
        imag_residue: if peak > 0.0 { residue / peak } else { residue },
    }
}

/// `F⁻¹{F[excitation] · H}`. `transfer` must sit on the excitation's bins
/// (step equal to the bin width); bins outside the transfer grid pass
/// through unchanged, including DC when the grid starts above 0 Hz.
pub fn synthesize(excitation: &TimeSeries, transfer: &ComplexSpectrum) -> Result<TimeSeries> {
    Ok(synthesize_filtered(excitation, transfer)?.series)
}

pub fn synthesize_filtered(excitation: &TimeSeries, transfer: &ComplexSpectrum) -> Result<Filtered> {
    let df = excitation.bin_width();
    let grid = transfer.grid;
    if ((grid.f_step() - df) / df).abs() > 1e-9 {
        return Err(Error::IncompatibleGrid(alloc::format!(
            "transfer step {:e} Hz must equal the excitation bin width {df:e} Hz",
            grid.f_step()
        )));
    }
    let first = bin_position(grid.f_start(), df).ok_or_else(|| {
        Error::IncompatibleGrid(alloc::format!(
            "transfer start {:e} Hz must be an integer multiple of the bin width {df:e} Hz",
            grid.f_start()
        ))
    })?;
    if first + grid.len() - 1 > excitation.len() / 2 {
        return Err(Error::IncompatibleGrid(alloc::format!(
            "transfer grid end {:e} Hz exceeds Nyquist {:e} Hz",
            grid.f_end(),
            0.5 / excitation.dt
        )));
    }
    let values = &transfer.values;
    Ok(apply_response(excitation, |f| {
        let k = (f / df).round() as usize;
        match k.checked_sub(first) {
            Some(j) if j < values.len() => values[j],
            _ => Complex64::new(1.0, 0.0),
        }
    }))
}

/// Transfer `e^{sign·j·passes·Φ(f)}` on every bin of `ts` inside `band`.
pub fn model_transfer(
    ts: &TimeSeries,
    model: &DispersionModel,
    band: &FrequencyGrid,
    passes: u32,
    sign: f64,
) -> Result<ComplexSpectrum> {
    let bins = ts.bin_grid(band.f_start(), band.f_end())?;
    if bins.f_start() <= 0.0 {
        return Err(Error::ZeroFrequency);
    }
    ComplexSpectrum::from_fn(bins, |f| {
        Complex64::from_polar(1.0, sign * passes as f64 * model.phase_at(f))
    })
}

/// Magnitude of the analytic signal (negative bins zeroed, positive bins doubled).
pub fn envelope(ts: &TimeSeries) -> Result<TimeSeries> {
    let n = ts.len();
    if n < 4 {
        return Err(Error::invalid("ts", "envelope needs at least 4 samples"));
    }
    let mut spec = fft::forward_real(&ts.samples);
    let upper = n.div_ceil(2);
    for v in spec.iter_mut().take(upper).skip(1) {
        *v *= 2.0;
    }
    for v in spec.iter_mut().skip(upper + usize::from(n.is_multiple_of(2))) {
        *v = Complex64::new(0.0, 0.0);
    }
    // For even n the Nyquist bin is shared by both halves and stays as-is.
    let analytic = fft::inverse(&spec);
    TimeSeries::new(ts.t0, ts.dt, analytic.iter().map(|v| v.norm()).collect())
}

/// Time between the first and last points where `env` reaches half its
/// maximum, with linear interpolation at both crossings.
pub fn half_max_width(env: &TimeSeries) -> Result<f64> {
    let (imax, &max) = env
        .samples
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .ok_or(Error::Degenerate("empty envelope"))?;
    if !(max > 0.0) {
        return Err(Error::Degenerate("envelope is all zero"));
    }
    let half = 0.5 * max;
    let s = &env.samples;
    let first = s.iter().position(|&v| v >= half).unwrap_or(imax);
    let last = s.iter().rposition(|&v| v >= half).unwrap_or(imax);
    let rise = if first > 0 {
        let (a, b) = (s[first - 1], s[first]);
        first as f64 - (b - half) / (b - a)
    } else {
        0.0
    };
    let fall = if last + 1 < s.len() {
        let (a, b) = (s[last], s[last + 1]);
        last as f64 + (a - half) / (a - b)
    } else {
        (s.len() - 1) as f64
    };
    Ok((fall - rise) * env.dt)
}

/// Signed normalized cross-correlation at the lag of largest magnitude,
/// searched over every lag at which the records overlap.
pub fn fidelity(a: &TimeSeries, b: &TimeSeries) -> Result<f64> {
    let na = a.samples.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.samples.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return Err(Error::Degenerate("fidelity of an all-zero series"));
    }
    let len = fft::next_pow2(a.len() + b.len() - 1);
    let mut pa = vec![Complex64::new(0.0, 0.0); len];
    let mut pb = vec![Complex64::new(0.0, 0.0); len];
    for (d, s) in pa.iter_mut().zip(&a.samples) {
        d.re = *s;
    }
    for (d, s) in pb.iter_mut().zip(&b.samples) {
        d.re = *s;
    }
    fft::transform(&mut pa, false);
    fft::transform(&mut pb, false);
    for (x, y) in pa.iter_mut().zip(&pb) {
        *x *= y.conj();
    }
    let corr = fft::inverse(&pa);
    let best = corr
        .iter()
        .map(|v| v.re)
        .max_by(|x, y| x.abs().total_cmp(&y.abs()))
        .unwrap_or(0.0);
    Ok((best / (na * nb)).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseMetrics {
    pub peak: f64,
    /// −6 dB (half-amplitude) envelope width.
    pub env_width: f64,
    pub fidelity: f64,
}

pub fn pulse_metrics(ts: &TimeSeries, reference: &TimeSeries) -> Result<PulseMetrics> {
    if ((ts.dt - reference.dt) / reference.dt).abs() > 1e-12 {
        return Err(Error::invalid("ts", "sample spacing must match the reference"));
    }
    let fidelity = fidelity(ts, reference)?;
    let env = envelope(ts)?;
    Ok(PulseMetrics {
        peak: ts.peak(),
        env_width: half_max_width(&env)?,
        fidelity,
    })
}

/// The three stages of the single-antenna pulse pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseChain {
    pub input: TimeSeries,
    pub dispersed: TimeSeries,
    pub compressed: TimeSeries,
    /// Worst imaginary residue across both synthesis steps.
    pub imag_residue: f64,
}

/// Differentiated Gaussian on `axis`, dispersed by `dispersion` and then
/// compressed by `correction`, both applied over the bins inside `band`.
pub fn dispersion_chain(
    pulse: &PulseSpec,
    axis: &TimeAxis,
    dispersion: &DispersionModel,
    correction: &DispersionModel,
    band: &FrequencyGrid,
    passes: u32,
) -> Result<PulseChain> {
    check_record(axis, dispersion, band, passes, 0.0)?;
    let input = differentiated_gaussian(pulse, axis.t0, axis.dt, axis.n)?;
    let forward = model_transfer(&input, dispersion, band, passes, 1.0)?;
    let d = synthesize_filtered(&input, &forward)?;
    let backward = model_transfer(&input, correction, band, passes, -1.0)?;
    let c = synthesize_filtered(&d.series, &backward)?;
    Ok(PulseChain {
        input,
        dispersed: d.series,
        compressed: c.series,
        imag_residue: d.imag_residue.max(c.imag_residue),
    })
}
