//! Frequency grids, phase unwrapping, back-propagation of probed fields,
//! group delay and regularized spectral division.
//!
//! Sign convention: an outward-travelling field carries `e^{-jkr}`, so
//! back-propagating over `r_p` multiplies by `e^{+jkr_p}`.

use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use num_complex::Complex64;
#[allow(unused_imports)] // libm-backed methods when std is absent
use num_traits::Float;

use crate::error::{Error, Result};
use crate::geometry::Medium;

/// Default relative regularization floor for [`deconvolve`].
pub const DEFAULT_EPS_REL: f64 = 1e-4;

/// Uniform grid `f_k = f_start + k·f_step`, `k = 0..n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyGrid {
    f_start: f64,
    f_step: f64,
    n: usize,
}

impl FrequencyGrid {
    pub fn new(f_start: f64, f_step: f64, n: usize) -> Result<Self> {
        if !(f_start >= 0.0) || !f_start.is_finite() {
            return Err(Error::invalid("f_start", "must be finite and >= 0"));
        }
        if !(f_step > 0.0) || !f_step.is_finite() {
            return Err(Error::invalid("f_step", "must be finite and > 0"));
        }
        if n < 2 {
            return Err(Error::invalid("n", "grid needs at least 2 samples"));
        }
        Ok(FrequencyGrid { f_start, f_step, n })
    }

    /// Grid from `f_start` to `f_stop` inclusive (rounded to whole steps).
    pub fn span(f_start: f64, f_stop: f64, f_step: f64) -> Result<Self> {
        if !(f_stop > f_start) {
            return Err(Error::invalid("f_stop", "must exceed f_start"));
        }
        let n = ((f_stop - f_start) / f_step + 1e-9).floor() as usize + 1;
        Self::new(f_start, f_step, n)
    }

    pub fn f_start(&self) -> f64 {
        self.f_start
    }
    pub fn f_step(&self) -> f64 {
        self.f_step
    }
    pub fn len(&self) -> usize {
        self.n
    }
    pub fn is_empty(&self) -> bool {
        self.n == 0
    }
    pub fn f_end(&self) -> f64 {
        self.freq(self.n - 1)
    }

    pub fn freq(&self, k: usize) -> f64 {
        self.f_start + k as f64 * self.f_step
    }

    pub fn omega(&self, k: usize) -> f64 {
        TAU * self.freq(k)
    }

    pub fn freqs(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |k| self.freq(k))
    }

    /// Index of the sample at `f`, if `f` lies on the grid to `rel_tol` of a step.
    pub fn index_of(&self, f: f64, rel_tol: f64) -> Option<usize> {
        let pos = (f - self.f_start) / self.f_step;
        let k = pos.round();
        if (pos - k).abs() > rel_tol || k < 0.0 || k >= self.n as f64 {
            return None;
        }
        Some(k as usize)
    }

    /// True when the two grids coincide to 1e-9 of a step.
    pub fn same_as(&self, other: &FrequencyGrid) -> bool {
        self.n == other.n
            && (self.f_start - other.f_start).abs() <= 1e-9 * self.f_step
            && (self.f_step - other.f_step).abs() <= 1e-9 * self.f_step
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSpectrum {
    pub grid: FrequencyGrid,
    pub values: Vec<Complex64>,
}

impl ComplexSpectrum {
    pub fn new(grid: FrequencyGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::invalid("values", "length must equal the grid size"));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::NonFinite("spectrum values"));
        }
        Ok(ComplexSpectrum { grid, values })
    }

    pub fn from_fn(grid: FrequencyGrid, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        Self::new(grid, grid.freqs().map(f).collect())
    }

    /// Pointwise product on a shared grid.
    pub fn mul(&self, other: &ComplexSpectrum) -> Result<ComplexSpectrum> {
        if !self.grid.same_as(&other.grid) {
            return Err(Error::GridMismatch);
        }
        Ok(ComplexSpectrum {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect(),
        })
    }
}

/// Phase in radians per grid sample. Curves produced by this module are
/// unwrapped; raw `arg` values may also be stored here before unwrapping.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseCurve {
    pub grid: FrequencyGrid,
    pub phase: Vec<f64>,
}

impl PhaseCurve {
    pub fn new(grid: FrequencyGrid, phase: Vec<f64>) -> Result<Self> {
        if phase.len() != grid.len() {
            return Err(Error::invalid("phase", "length must equal the grid size"));
        }
        if phase.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite("phase curve"));
        }
        Ok(PhaseCurve { grid, phase })
    }

    /// Every sample wrapped into `(−π, π]`.
    pub fn wrapped(&self) -> PhaseCurve {
        PhaseCurve {
            grid: self.grid,
            phase: self.phase.iter().map(|&p| wrap_to_pi(p)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DelayCurve {
    pub grid: FrequencyGrid,
    pub delay: Vec<f64>,
}

/// Wraps an angle into `(−π, π]`.
pub fn wrap_to_pi(x: f64) -> f64 {
    let mut y = x % TAU;
    if y <= -PI {
        y += TAU;
    } else if y > PI {
        y -= TAU;
    }
    y
}

/// Unwraps from the highest-frequency sample downward. The top sample is
/// kept as-is and every other sample is shifted by a whole number of turns
/// so that neighbouring samples differ by at most π.
pub fn unwrap_phase_from_top(wrapped: &PhaseCurve) -> PhaseCurve {
    PhaseCurve {
        grid: wrapped.grid,
        phase: unwrap_slice_from_top(&wrapped.phase),
    }
}

fn unwrap_slice_from_top(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut out = alloc::vec![0.0; n];
    if n == 0 {
        return out;
    }
    out[n - 1] = values[n - 1];
    // Turns are tracked as an integer so no rounding error accumulates.
    let mut turns: i64 = 0;
    for k in (0..n - 1).rev() {
        let step = values[k] - values[k + 1];
        turns -= (step / TAU).round() as i64;
        let candidate = values[k] + TAU * turns as f64;
        // `round` picks the nearest turn; this nudges the ±π tie case.
        let d = candidate - out[k + 1];
        out[k] = if d > PI {
            turns -= 1;
            candidate - TAU
        } else if d < -PI {
            turns += 1;
            candidate + TAU
        } else {
            candidate
        };
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct Backpropagated {
    pub phase: PhaseCurve,
    /// Samples whose phase was undefined (zero magnitude or DC) and was
    /// filled in rather than measured.
    pub gaps: Vec<usize>,
}

/// Phase left after removing free-space propagation over `r_p`:
/// `arg(E · e^{+jωr_p/v})`, unwrapped from the top of the band.
///
/// Zero-magnitude samples are filled by linear interpolation of the
/// unwrapped phase across the gap and reported in `gaps`. A 0 Hz sample is
/// carried as phase 0.
pub fn backpropagate_phase(field: &ComplexSpectrum, r_p: f64, medium: &Medium) -> Result<Backpropagated> {
    if !(r_p >= 0.0) {
        return Err(Error::invalid("r_p", "must be >= 0"));
    }
    let grid = field.grid;
    let mut valid_idx = Vec::with_capacity(grid.len());
    let mut valid_phase = Vec::with_capacity(grid.len());
    let mut gaps = Vec::new();
    for (k, e) in field.values.iter().enumerate() {
        let f = grid.freq(k);
        if f == 0.0 {
            continue;
        }
        if e.norm() == 0.0 {
            gaps.push(k);
            continue;
        }
        let advance = grid.omega(k) * r_p / medium.velocity();
        let raw = (e * Complex64::from_polar(1.0, advance)).arg();
        valid_idx.push(k);
        valid_phase.push(wrap_to_pi(raw));
    }
    if valid_idx.is_empty() {
        return Err(Error::Degenerate("field has no nonzero samples"));
    }
    let unwrapped = unwrap_slice_from_top(&valid_phase);

    let mut phase = alloc::vec![0.0; grid.len()];
    for (&k, &p) in valid_idx.iter().zip(&unwrapped) {
        phase[k] = p;
    }
    for &k in &gaps {
        // Nearest measured neighbours on either side; hold the edge value
        // when the gap touches an end of the band.
        let right = valid_idx.partition_point(|&i| i < k);
        phase[k] = match (right.checked_sub(1), valid_idx.get(right)) {
            (Some(l), Some(&ri)) => {
                let li = valid_idx[l];
                let t = (k - li) as f64 / (ri - li) as f64;
                unwrapped[l] + t * (unwrapped[right] - unwrapped[l])
            }
            (Some(l), None) => unwrapped[l],
            (None, Some(_)) => unwrapped[right],
            (None, None) => 0.0,
        };
    }
    Ok(Backpropagated {
        phase: PhaseCurve { grid, phase },
        gaps,
    })
}

/// `τ_gd = −dΦ/dω` by second-order finite differences: central in the
/// interior, one-sided three-point at both ends.
pub fn group_delay(phase: &PhaseCurve) -> Result<DelayCurve> {
    let n = phase.grid.len();
    if n < 3 {
        return Err(Error::invalid("phase", "group delay needs at least 3 samples"));
    }
    let h = TAU * phase.grid.f_step();
    let p = &phase.phase;
    let mut delay = Vec::with_capacity(n);
    delay.push(-(-3.0 * p[0] + 4.0 * p[1] - p[2]) / (2.0 * h));
    for k in 1..n - 1 {
        delay.push(-(p[k + 1] - p[k - 1]) / (2.0 * h));
    }
    delay.push(-(3.0 * p[n - 1] - 4.0 * p[n - 2] + p[n - 3]) / (2.0 * h));
    Ok(DelayCurve {
        grid: phase.grid,
        delay,
    })
}

/// Regularized spectral division
/// `H = out · conj(in) / max(|in|², (eps_rel · max|in|)²)`.
///
/// With `eps_rel = 0` and a nonvanishing input this is exact division.
pub fn deconvolve(output: &ComplexSpectrum, input: &ComplexSpectrum, eps_rel: f64) -> Result<ComplexSpectrum> {
    if !output.grid.same_as(&input.grid) {
        return Err(Error::GridMismatch);
    }
    if !(0.0..1.0).contains(&eps_rel) {
        return Err(Error::invalid("eps_rel", "must lie in [0, 1)"));
    }
    let peak = input.values.iter().fold(0.0f64, |m, v| m.max(v.norm()));
    if peak == 0.0 {
        return Err(Error::Degenerate("deconvolution input is all zero"));
    }
    let floor = (eps_rel * peak).powi(2);
    let mut values = Vec::with_capacity(input.values.len());
    for (o, i) in output.values.iter().zip(&input.values) {
        let denom = i.norm_sqr().max(floor);
        if denom == 0.0 {
            // Only reachable with eps_rel = 0 at an exact zero of the input.
            return Err(Error::Degenerate("deconvolution input vanishes with eps_rel = 0"));
        }
        values.push(o * i.conj() / denom);
    }
    Ok(ComplexSpectrum {
        grid: input.grid,
        values,
    })
}
