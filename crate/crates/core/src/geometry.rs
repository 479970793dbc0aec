//! Sinuous arm curves and the design rules that bound where the
//! log-periodic dispersion model is valid.
//!
//! Cell `p` (1-based) spans `R_{p+1} <= r <= R_p` with `R_{p+1} = τ R_p`.
//! Inside it the centerline angle is
//!
//! ```text
//! φ(r) = (-1)^(p-1) · α · sin(π · ln(r / R_p) / ln τ)
//! ```
//!
//! and the two metal edges are the centerline rotated by `±δ`.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};

#[allow(unused_imports)] // libm-backed methods when std is absent
use num_traits::Float;

use crate::error::{Error, Result};
use crate::SPEED_OF_LIGHT;

/// Propagation medium. `velocity = c / sqrt(rel_permittivity)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Medium {
    velocity: f64,
    rel_permittivity: f64,
}

impl Medium {
    pub fn free_space() -> Self {
        Medium {
            velocity: SPEED_OF_LIGHT,
            rel_permittivity: 1.0,
        }
    }

    pub fn from_permittivity(rel_permittivity: f64) -> Result<Self> {
        if !(rel_permittivity >= 1.0) || !rel_permittivity.is_finite() {
            return Err(Error::invalid("rel_permittivity", "must be finite and >= 1"));
        }
        Ok(Medium {
            velocity: SPEED_OF_LIGHT / rel_permittivity.sqrt(),
            rel_permittivity,
        })
    }

    pub fn from_velocity(velocity: f64) -> Result<Self> {
        if !(velocity > 0.0) || velocity > SPEED_OF_LIGHT * (1.0 + 1e-9) {
            return Err(Error::invalid("velocity", "must lie in (0, c]"));
        }
        let ratio = SPEED_OF_LIGHT / velocity;
        Ok(Medium {
            velocity,
            rel_permittivity: (ratio * ratio).max(1.0),
        })
    }

    /// Both values given explicitly; they must agree to 1e-9 relative.
    pub fn new(velocity: f64, rel_permittivity: f64) -> Result<Self> {
        let from_eps = Self::from_permittivity(rel_permittivity)?;
        if !(velocity > 0.0) {
            return Err(Error::invalid("velocity", "must be positive"));
        }
        if ((velocity - from_eps.velocity) / from_eps.velocity).abs() > 1e-9 {
            return Err(Error::invalid(
                "velocity",
                "inconsistent with rel_permittivity (v = c / sqrt(eps_r))",
            ));
        }
        Ok(Medium {
            velocity,
            rel_permittivity,
        })
    }

    pub fn velocity(&self) -> f64 {
        self.velocity
    }

    pub fn rel_permittivity(&self) -> f64 {
        self.rel_permittivity
    }

    pub fn wavelength(&self, freq: f64) -> f64 {
        self.velocity / freq
    }
}

/// Design vector of a log-periodic sinuous antenna. Angles in radians,
/// lengths in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinuousParams {
    n_arms: u32,
    n_cells: u32,
    r1: f64,
    r_trunc: Option<f64>,
    r_in: f64,
    tau: f64,
    alpha: f64,
    delta: f64,
}

impl SinuousParams {
    pub fn new(
        n_arms: u32,
        n_cells: u32,
        r1: f64,
        r_in: f64,
        tau: f64,
        alpha: f64,
        delta: f64,
    ) -> Result<Self> {
        if n_arms == 0 {
            return Err(Error::invalid("n_arms", "must be positive"));
        }
        if n_cells == 0 {
            return Err(Error::invalid("n_cells", "must be positive"));
        }
        if !(tau > 0.0 && tau < 1.0) {
            return Err(Error::invalid("tau", "must lie in (0, 1)"));
        }
        if !(r_in > 0.0 && r_in < r1) || !r1.is_finite() {
            return Err(Error::invalid("r_in", "must satisfy 0 < r_in < r1"));
        }
        if !(alpha > 0.0) {
            return Err(Error::invalid("alpha", "must be positive"));
        }
        if !(delta > 0.0) {
            return Err(Error::invalid("delta", "must be positive"));
        }
        if !(alpha + delta < PI) {
            return Err(Error::invalid("alpha", "alpha + delta must be below pi"));
        }
        Ok(SinuousParams {
            n_arms,
            n_cells,
            r1,
            r_trunc: None,
            r_in,
            tau,
            alpha,
            delta,
        })
    }

    /// Truncates the arms at `r_trunc`, which must satisfy `r_in < r_trunc <= r1`.
    pub fn with_truncation(mut self, r_trunc: f64) -> Result<Self> {
        if !(r_trunc > self.r_in && r_trunc <= self.r1) {
            return Err(Error::invalid("r_trunc", "must satisfy r_in < r_trunc <= r1"));
        }
        self.r_trunc = Some(r_trunc);
        Ok(self)
    }

    /// The four-arm, twenty-cell 800 MHz – 10 GHz design: R₁ = R_T = 10 cm,
    /// R_in = 4 mm, τ = 0.8547, α = 45°, δ = 22.5°.
    pub fn reference_design() -> Self {
        SinuousParams::new(
            4,
            20,
            0.10,
            0.004,
            0.8547,
            45f64.to_radians(),
            22.5f64.to_radians(),
        )
        .and_then(|p| p.with_truncation(0.10))
        .expect("reference design is valid")
    }

    pub fn n_arms(&self) -> u32 {
        self.n_arms
    }
    pub fn n_cells(&self) -> u32 {
        self.n_cells
    }
    pub fn r1(&self) -> f64 {
        self.r1
    }
    pub fn r_trunc(&self) -> Option<f64> {
        self.r_trunc
    }
    pub fn r_in(&self) -> f64 {
        self.r_in
    }
    pub fn tau(&self) -> f64 {
        self.tau
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Same design with every length multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        let p = SinuousParams::new(
            self.n_arms,
            self.n_cells,
            self.r1 * s,
            self.r_in * s,
            self.tau,
            self.alpha,
            self.delta,
        )?;
        match self.r_trunc {
            Some(rt) => p.with_truncation(rt * s),
            None => Ok(p),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarPoint {
    pub r: f64,
    pub phi: f64,
    /// 1-based cell the point was sampled in.
    pub cell: u32,
}

/// Sampled curve in polar coordinates, ordered from the outer radius inward.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PolarPolyline {
    pub points: Vec<PolarPoint>,
}

impl PolarPolyline {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn rotated(&self, angle: f64) -> PolarPolyline {
        PolarPolyline {
            points: self
                .points
                .iter()
                .map(|p| PolarPoint {
                    phi: p.phi + angle,
                    ..*p
                })
                .collect(),
        }
    }

    pub fn to_cartesian(&self) -> Vec<(f64, f64)> {
        self.points
            .iter()
            .map(|p| (p.r * p.phi.cos(), p.r * p.phi.sin()))
            .collect()
    }

    /// Sum of chord lengths between consecutive points.
    pub fn chord_length(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| chord(w[0].r, w[0].phi, w[1].r, w[1].phi))
            .sum()
    }
}

fn chord(r_a: f64, phi_a: f64, r_b: f64, phi_b: f64) -> f64 {
    (r_a * r_a + r_b * r_b - 2.0 * r_a * r_b * (phi_b - phi_a).cos())
        .max(0.0)
        .sqrt()
}

/// `[R₁, R₂, …, R_{P+1}]`.
pub fn cell_radii(params: &SinuousParams) -> Vec<f64> {
    let mut radii = Vec::with_capacity(params.n_cells as usize + 1);
    let mut r = params.r1;
    radii.push(r);
    for _ in 0..params.n_cells {
        r *= params.tau;
        radii.push(r);
    }
    radii
}

fn cell_sign(p: u32) -> f64 {
    if p % 2 == 1 {
        1.0
    } else {
        -1.0
    }
}

/// Centerline angle at fraction `u ∈ [0, 1]` of cell `p`'s log-radius sweep.
fn cell_angle(params: &SinuousParams, p: u32, u: f64) -> f64 {
    if u == 0.0 || u == 1.0 {
        return 0.0;
    }
    cell_sign(p) * params.alpha * (PI * u).sin()
}

/// Centerline angle at radius `r`, or `None` when `r` is outside
/// `[R_{P+1}, R₁]`.
pub fn centerline_angle(params: &SinuousParams, r: f64) -> Option<f64> {
    let radii = cell_radii(params);
    let r_last = radii[radii.len() - 1];
    if !(r <= params.r1 && r >= r_last) {
        return None;
    }
    let p = radii
        .windows(2)
        .position(|w| r <= w[0] && r >= w[1])
        .map(|i| i as u32 + 1)?;
    let r_p = radii[p as usize - 1];
    let u = (r / r_p).ln() / params.tau.ln();
    Some(cell_sign(p) * params.alpha * (PI * u).sin())
}

/// Samples the arm centerline uniformly in log-radius, `samples_per_cell`
/// points per cell with the boundary point shared between neighbouring
/// cells. When the design is truncated, points beyond `R_T` are dropped and
/// the `R_T` crossing is inserted by interpolation in log-radius.
pub fn sample_centerline(params: &SinuousParams, samples_per_cell: usize) -> Result<PolarPolyline> {
    if samples_per_cell < 2 {
        return Err(Error::invalid("samples_per_cell", "must be at least 2"));
    }
    let radii = cell_radii(params);
    let steps = samples_per_cell - 1;
    let mut points = Vec::with_capacity(params.n_cells as usize * steps + 1);
    for p in 1..=params.n_cells {
        let r_p = radii[p as usize - 1];
        let first = if p == 1 { 0 } else { 1 };
        for j in first..=steps {
            let u = j as f64 / steps as f64;
            let r = if j == steps {
                radii[p as usize]
            } else {
                r_p * params.tau.powf(u)
            };
            points.push(PolarPoint {
                r,
                phi: cell_angle(params, p, u),
                cell: p,
            });
        }
    }
    let mut line = PolarPolyline { points };
    if let Some(rt) = params.r_trunc {
        truncate(&mut line, rt);
    }
    Ok(line)
}

fn truncate(line: &mut PolarPolyline, r_trunc: f64) {
    let Some(first_inside) = line.points.iter().position(|p| p.r <= r_trunc) else {
        line.points.clear();
        return;
    };
    if first_inside == 0 {
        return;
    }
    let outer = line.points[first_inside - 1];
    let inner = line.points[first_inside];
    let mut kept = line.points.split_off(first_inside);
    if inner.r < r_trunc {
        let t = (r_trunc.ln() - outer.r.ln()) / (inner.r.ln() - outer.r.ln());
        kept.insert(
            0,
            PolarPoint {
                r: r_trunc,
                phi: outer.phi + t * (inner.phi - outer.phi),
                cell: inner.cell,
            },
        );
    }
    line.points = kept;
}

/// The two arm edges: centerline rotated by `+δ` and by `−δ`.
pub fn arm_edges(params: &SinuousParams, samples_per_cell: usize) -> Result<(PolarPolyline, PolarPolyline)> {
    let center = sample_centerline(params, samples_per_cell)?;
    Ok((center.rotated(params.delta), center.rotated(-params.delta)))
}

/// Chord-sum arc length of the centerline over cell `p` (1-based), sampled
/// with `samples` points uniform in log-radius. Truncation is ignored.
pub fn cell_arc_length(params: &SinuousParams, p: u32, samples: usize) -> Result<f64> {
    if p == 0 || p > params.n_cells {
        return Err(Error::invalid("p", "cell index must lie in 1..=P"));
    }
    if samples < 16 {
        return Err(Error::invalid("samples", "must be at least 16"));
    }
    let r_p = params.r1 * params.tau.powi(p as i32 - 1);
    let steps = samples - 1;
    let mut total = 0.0;
    let mut prev = (r_p, 0.0);
    for j in 1..=steps {
        let u = j as f64 / steps as f64;
        let r = r_p * params.tau.powf(u);
        let phi = cell_angle(params, p, u);
        total += chord(prev.0, prev.1, r, phi);
        prev = (r, phi);
    }
    Ok(total)
}

/// `f_L = v / (4 R₁ (α + δ))`.
pub fn lowest_operating_frequency(params: &SinuousParams, medium: &Medium) -> f64 {
    medium.velocity / (4.0 * params.r1 * (params.alpha + params.delta))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActiveRegion {
    pub radius: f64,
    /// True when the unclamped radius fell outside `[r_in, R₁]`.
    pub clamped: bool,
}

/// Radius at which the antenna radiates `freq`, the inverse of
/// [`lowest_operating_frequency`]: `r = v / (4 f (α + δ))`, clamped to
/// `[r_in, R₁]`.
pub fn active_region_radius(freq: f64, params: &SinuousParams, medium: &Medium) -> Result<ActiveRegion> {
    if !(freq > 0.0) {
        return Err(Error::invalid("freq", "must be positive"));
    }
    let r = medium.velocity / (4.0 * freq * (params.alpha + params.delta));
    let clamped_r = r.clamp(params.r_in, params.r1);
    // Exact inversion at f_L can land a few ulps past R₁.
    let clamped = (clamped_r - r).abs() > 1e-12 * params.r1;
    Ok(ActiveRegion {
        radius: if clamped { clamped_r } else { r.min(params.r1) },
        clamped,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignReport {
    /// `R_in < λ_min / 4` at the highest frequency.
    pub feed_ok: bool,
    /// `λ_min / 4 − R_in`; negative when the feed is too large.
    pub feed_margin_m: f64,
    /// `|δ − 90°/N|`. The usual four-arm design (δ = 22.5°) gives zero.
    pub self_complementary_deviation_rad: f64,
    /// `|δ − 90°/P|`, the cell-count form of the same condition. Reported
    /// alongside because the two readings disagree for P ≠ N.
    pub cell_rule_deviation_rad: f64,
    pub tau_ok: bool,
}

pub fn design_checks(params: &SinuousParams, f_max: f64, medium: &Medium) -> Result<DesignReport> {
    if !(f_max > 0.0) {
        return Err(Error::invalid("f_max", "must be positive"));
    }
    let quarter_wave = medium.wavelength(f_max) / 4.0;
    let margin = quarter_wave - params.r_in;
    Ok(DesignReport {
        feed_ok: params.r_in < quarter_wave,
        feed_margin_m: margin,
        self_complementary_deviation_rad: (params.delta - FRAC_PI_2 / params.n_arms as f64).abs(),
        cell_rule_deviation_rad: (params.delta - FRAC_PI_2 / params.n_cells as f64).abs(),
        tau_ok: params.tau > 0.0 && params.tau < 1.0,
    })
}
