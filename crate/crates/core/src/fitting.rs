//! Least-squares fitting of [`DispersionModel`] parameters to a measured
//! (unwrapped) dispersion phase.
//!
//! The objective removes the best constant offset between model and
//! reference before averaging the squared difference, so unwrapping anchors
//! and whole-turn ambiguities do not bias the fit. Because `ω₀` only shifts
//! the model phase by a constant, it is not searched; once the shape
//! parameters are found, `ω₀` is set in closed form so that the model
//! matches the reference level with zero offset.
//!
//! Search runs a Nelder–Mead simplex over log-parameters from several
//! deterministically perturbed starting points.

use alloc::vec::Vec;

#[allow(unused_imports)] // libm-backed methods when std is absent
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dispersion::{CapSpec, DispersionModel};
use crate::error::{Error, Result};
use crate::optim::{self, SimplexOptions};
use crate::spectral::PhaseCurve;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Weighting {
    #[default]
    Uniform,
    /// Weight each sample by `1/ω`.
    InverseOmega,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitConfig {
    pub f_min: f64,
    pub f_max: f64,
    /// Fit the low-frequency cap (`f_low`, `tau_c`) as well.
    pub fit_cap: bool,
    /// Starting point. With `fit_cap` and no cap on `init`, the cap starts
    /// at the geometric middle of the band's lower decade.
    pub init: DispersionModel,
    pub restarts: usize,
    pub max_iters: usize,
    pub tol: f64,
    pub weighting: Weighting,
    pub seed: u64,
}

impl FitConfig {
    pub fn new(f_min: f64, f_max: f64, init: DispersionModel) -> Self {
        FitConfig {
            f_min,
            f_max,
            fit_cap: false,
            init,
            restarts: 4,
            max_iters: 2000,
            tol: 1e-10,
            weighting: Weighting::Uniform,
            seed: 0,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.f_min < self.f_max) || !(self.f_min > 0.0) {
            return Err(Error::invalid("band", "must satisfy 0 < f_min < f_max"));
        }
        if self.restarts == 0 {
            return Err(Error::invalid("restarts", "must be at least 1"));
        }
        if !(self.tol > 0.0) {
            return Err(Error::invalid("tol", "must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitParam {
    Phi0,
    F0,
    FLow,
    TauC,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub model: DispersionModel,
    pub rms_residual: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Coordinates the objective does not constrain at the solution.
    pub unidentified: Vec<FitParam>,
    /// Restart that produced the returned model.
    pub restart: usize,
}

/// In-band samples of a reference curve with their weights.
struct Window {
    freqs: Vec<f64>,
    reference: Vec<f64>,
    weights: Vec<f64>,
}

impl Window {
    fn new(reference: &PhaseCurve, f_min: f64, f_max: f64, weighting: Weighting) -> Result<Self> {
        let mut w = Window {
            freqs: Vec::new(),
            reference: Vec::new(),
            weights: Vec::new(),
        };
        for (f, &p) in reference.grid.freqs().zip(&reference.phase) {
            if f >= f_min && f <= f_max && f > 0.0 {
                w.freqs.push(f);
                w.reference.push(p);
                w.weights.push(match weighting {
                    Weighting::Uniform => 1.0,
                    Weighting::InverseOmega => 1.0 / f,
                });
            }
        }
        if w.freqs.is_empty() {
            return Err(Error::EmptyBand { f_min, f_max });
        }
        Ok(w)
    }

    /// Weighted mean of `model − reference`.
    fn offset(&self, model: &DispersionModel) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for ((f, r), w) in self.freqs.iter().zip(&self.reference).zip(&self.weights) {
            num += w * (model.phase_at(*f) - r);
            den += w;
        }
        num / den
    }

    fn objective(&self, model: &DispersionModel) -> f64 {
        let c = self.offset(model);
        let mut num = 0.0;
        let mut den = 0.0;
        for ((f, r), w) in self.freqs.iter().zip(&self.reference).zip(&self.weights) {
            let d = model.phase_at(*f) - r - c;
            num += w * d * d;
            den += w;
        }
        num / den
    }
}

/// Weighted mean of `(Φ_model − Φ_ref − c*)²` over `[f_min, f_max]`, where
/// `c*` is the best constant offset.
pub fn phase_objective(
    model: &DispersionModel,
    reference: &PhaseCurve,
    f_min: f64,
    f_max: f64,
    weighting: Weighting,
) -> Result<f64> {
    Ok(Window::new(reference, f_min, f_max, weighting)?.objective(model))
}

/// Per-sample residual `Φ_model − Φ_ref − c*` inside the band, as
/// `(frequency, residual)` pairs.
pub fn residuals(
    model: &DispersionModel,
    reference: &PhaseCurve,
    f_min: f64,
    f_max: f64,
    weighting: Weighting,
) -> Result<Vec<(f64, f64)>> {
    let w = Window::new(reference, f_min, f_max, weighting)?;
    let c = w.offset(model);
    Ok(w.freqs
        .iter()
        .zip(&w.reference)
        .map(|(f, r)| (*f, model.phase_at(*f) - r - c))
        .collect())
}

/// Maps between log-parameters and models for one fit.
struct Layout {
    f0: f64,
    fit_cap: bool,
    f_min: f64,
    f_max: f64,
}

impl Layout {
    fn encode(&self, m: &DispersionModel) -> Vec<f64> {
        let mut x = alloc::vec![m.phi0().ln()];
        if self.fit_cap {
            let cap = m.cap().expect("capped start model");
            x.push(cap.f_low.ln());
            x.push(cap.tau_c.ln());
        }
        x
    }

    fn decode(&self, x: &[f64]) -> Option<DispersionModel> {
        let model = DispersionModel::new(x[0].exp(), self.f0).ok()?;
        if !self.fit_cap {
            return Some(model);
        }
        let f_low = x[1].exp();
        if !(f_low > self.f_min && f_low < self.f_max) {
            return None;
        }
        model
            .with_cap(CapSpec {
                f_low,
                tau_c: Some(x[2].exp()),
            })
            .ok()
    }
}

fn starting_model(config: &FitConfig, limits: (f64, f64)) -> Result<DispersionModel> {
    let init = config.init;
    if !config.fit_cap {
        return Ok(init.without_cap());
    }
    let (lo, hi) = limits;
    let f_low = match init.cap() {
        Some(cap) if cap.f_low > lo && cap.f_low < hi => cap.f_low,
        _ => (config.f_min * config.f_min.max(config.f_max / 10.0))
            .sqrt()
            .clamp(lo * 1.01, hi * 0.99),
    };
    let tau_c = init.cap().map(|c| c.tau_c);
    init.with_cap(CapSpec { f_low, tau_c })
}

fn perturbed(start: &DispersionModel, config: &FitConfig, limits: (f64, f64), restart: usize) -> DispersionModel {
    if restart == 0 {
        return *start;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(restart as u64);
    let mut factor = || 2f64.powf(rng.gen_range(-1.0..=1.0));
    let phi0 = start.phi0() * factor();
    let f0 = start.f0();
    let Ok(model) = DispersionModel::new(phi0, f0) else {
        return *start;
    };
    match start.cap() {
        Some(cap) if config.fit_cap => {
            let lo = limits.0 * (1.0 + 1e-6);
            let hi = limits.1.min(f0) * (1.0 - 1e-6);
            let f_low = (cap.f_low * factor()).clamp(lo, hi);
            let tau_c = cap.tau_c * factor();
            model
                .with_cap(CapSpec {
                    f_low,
                    tau_c: Some(tau_c),
                })
                .unwrap_or(*start)
        }
        _ => model,
    }
}

/// Fits `φ₀` (and the cap, when `config.fit_cap`) to `reference`.
pub fn fit(reference: &PhaseCurve, config: &FitConfig) -> Result<FitResult> {
    config.validate()?;
    let window = Window::new(reference, config.f_min, config.f_max, config.weighting)?;
    // The cap frequency may move anywhere inside the reference grid.
    let limits = (reference.grid.f_start(), reference.grid.f_end());
    let start = starting_model(config, limits)?;
    let layout = Layout {
        f0: start.f0(),
        fit_cap: config.fit_cap,
        f_min: limits.0,
        f_max: limits.1,
    };
    let objective = |x: &[f64]| match layout.decode(x) {
        Some(m) => window.objective(&m),
        None => f64::INFINITY,
    };
    let opts = SimplexOptions {
        max_iters: config.max_iters,
        tol: config.tol,
        step: 0.1,
    };

    let mut best: Option<(usize, optim::SimplexResult)> = None;
    for r in 0..config.restarts {
        let init = perturbed(&start, config, limits, r);
        let x0 = layout.encode(&init);
        if !objective(&x0).is_finite() {
            continue;
        }
        let result = optim::minimize(objective, &x0, &opts);
        // Strict comparison keeps the lowest restart index on ties.
        if best.as_ref().is_none_or(|(_, b)| result.value < b.value) {
            best = Some((r, result));
        }
    }
    let (restart, result) = best.ok_or(Error::NonFinite("fit objective at every starting point"))?;
    let shaped = layout
        .decode(&result.x)
        .ok_or(Error::NonFinite("fitted parameters"))?;
    let model = anchor_f0(&shaped, &window);

    let mut unidentified = Vec::new();
    if config.fit_cap {
        let base = window.objective(&model);
        let scale = base.abs().max(1e-300);
        for (param, idx) in [(FitParam::FLow, 1usize), (FitParam::TauC, 2)] {
            let mut x = layout.encode(&model);
            x[idx] += 0.05;
            let up = objective(&x);
            x[idx] -= 0.1;
            let down = objective(&x);
            let change = (up - base).abs().max((down - base).abs());
            if !(change > 1e-9 * scale) {
                unidentified.push(param);
            }
        }
    }

    Ok(FitResult {
        rms_residual: window.objective(&model).max(0.0).sqrt(),
        model,
        iterations: result.iterations,
        converged: result.converged,
        unidentified,
        restart,
    })
}

/// [`fit`] with the cap parameters free.
pub fn fit_with_cap(reference: &PhaseCurve, config: &FitConfig) -> Result<FitResult> {
    let mut config = *config;
    config.fit_cap = true;
    fit(reference, &config)
}

/// Moves `ω₀` so the model needs no constant offset to match the reference.
fn anchor_f0(model: &DispersionModel, window: &Window) -> DispersionModel {
    let c = window.offset(model);
    let f0 = model.f0() * (-c / model.phi0()).exp();
    let Ok(anchored) = DispersionModel::new(model.phi0(), f0) else {
        return *model;
    };
    match model.cap() {
        None => anchored,
        Some(cap) => anchored
            .with_cap(CapSpec {
                f_low: cap.f_low,
                tau_c: Some(cap.tau_c),
            })
            .unwrap_or(*model),
    }
}
