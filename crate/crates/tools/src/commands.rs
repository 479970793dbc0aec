//! The five subcommands. Each reads its sections of a [`RunConfig`], runs
//! the pipeline and writes its files into `out`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use sinuous_core::dispersion::{self, default_model};
use sinuous_core::fitting::{self, FitConfig, FitParam, Weighting};
use sinuous_core::geometry::{self, Medium, SinuousParams};
use sinuous_core::gprsim::{self, two_way_delay, ScanConfig};
use sinuous_core::pulsegen::{self, PulseSpec, TimeAxis, TimeSeries};
use sinuous_core::spectral::{self, DEFAULT_EPS_REL};
use sinuous_core::{fft, CapSpec, DispersionModel, FrequencyGrid, PhaseCurve};

use crate::config::RunConfig;
use crate::error::{input_err, CliError};
use crate::formats::{self, KvValue};

const DEFAULT_MU: f64 = 1e-9;

pub fn antenna(cfg: &RunConfig) -> Result<SinuousParams, CliError> {
    let r = SinuousParams::reference_design();
    let count = |key: &str, default: u32| -> Result<u32, CliError> {
        u32::try_from(cfg.int_or(key, default as u64)).map_err(|_| CliError::Config(format!("`{key}` is too large")))
    };
    let params = SinuousParams::new(
        count("antenna.n_arms", r.n_arms())?,
        count("antenna.n_cells", r.n_cells())?,
        cfg.float_or("antenna.r1_m", r.r1()),
        cfg.float_or("antenna.r_in_m", r.r_in()),
        cfg.float_or("antenna.tau", r.tau()),
        cfg.float_or("antenna.alpha_deg", r.alpha().to_degrees()).to_radians(),
        cfg.float_or("antenna.delta_deg", r.delta().to_degrees()).to_radians(),
    )?;
    Ok(match cfg.float("antenna.r_trunc_m") {
        Some(rt) => params.with_truncation(rt)?,
        None => params,
    })
}

fn medium(eps: f64) -> Result<Medium, CliError> {
    Ok(Medium::from_permittivity(eps)?)
}

/// `model.*`, with `φ₀` defaulting to `−π/ln τ` from the antenna section.
pub fn model(cfg: &RunConfig) -> Result<DispersionModel, CliError> {
    let f0 = cfg.float_or("model.f0_hz", 10e9);
    let base = match cfg.float("model.phi0_rad") {
        Some(phi0) => DispersionModel::new(phi0, f0)?,
        None => default_model(cfg.float_or("antenna.tau", SinuousParams::reference_design().tau()), f0)?,
    };
    match (cfg.float("model.f_low_hz"), cfg.float("model.tau_c_s")) {
        (Some(f_low), tau_c) => Ok(base.with_cap(CapSpec { f_low, tau_c })?),
        (None, Some(_)) => Err(CliError::Config("`model.tau_c_s` needs `model.f_low_hz`".into())),
        (None, None) => Ok(base),
    }
}

pub fn grid(cfg: &RunConfig) -> Result<FrequencyGrid, CliError> {
    Ok(FrequencyGrid::span(
        cfg.float_or("grid.f_start_hz", 0.8e9),
        cfg.float_or("grid.f_stop_hz", 10e9),
        cfg.float_or("grid.f_step_hz", 10e6),
    )?)
}

fn pulse(cfg: &RunConfig) -> Result<PulseSpec, CliError> {
    Ok(PulseSpec::new(
        cfg.float_or("pulse.v_peak_v", 1.0),
        cfg.float_or("pulse.mu_s", DEFAULT_MU),
        cfg.float_or("pulse.f_bw_hz", 6e9),
    )?)
}

/// Explicit `record.*` values where given, the record-length rule otherwise.
fn time_axis(
    cfg: &RunConfig,
    model: &DispersionModel,
    band: &FrequencyGrid,
    passes: u32,
    pulse: &PulseSpec,
    extra: f64,
) -> Result<TimeAxis, CliError> {
    let auto = TimeAxis::for_dispersion(model, band, passes, pulse, extra)?;
    let dt = cfg.float_or("record.dt_s", auto.dt);
    let n = match cfg.int("record.n") {
        Some(n) => usize::try_from(n).map_err(|_| CliError::Config("`record.n` is too large".into()))?,
        None => {
            let needed = pulsegen::required_record_duration(model, band, passes) + extra;
            fft::next_pow2((needed / dt).ceil() as usize).max(4)
        }
    };
    Ok(TimeAxis::new(0.0, dt, n)?)
}

fn out_path(out: &Path, name: &str) -> PathBuf {
    out.join(name)
}

pub fn prepare_out(out: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))
}

/// Geometry files and a design summary, returned as text for stdout.
pub fn cmd_geom(cfg: &RunConfig, out: &Path) -> Result<String, CliError> {
    let params = antenna(cfg)?;
    let m = medium(cfg.float_or("antenna.rel_permittivity", 1.0))?;
    let spc = cfg.int_or("antenna.samples_per_cell", 64) as usize;
    let f_max = cfg.float_or("grid.f_stop_hz", 10e9);

    let centerline = geometry::sample_centerline(&params, spc)?;
    let (lower, upper) = geometry::arm_edges(&params, spc)?;
    let svg = formats::arms_svg(&params, spc)?;
    let report = geometry::design_checks(&params, f_max, &m)?;
    let f_l = geometry::lowest_operating_frequency(&params, &m);

    prepare_out(out)?;
    formats::write_polyline(&out_path(out, "centerline.csv"), &centerline)?;
    formats::write_polyline(&out_path(out, "edge_lower.csv"), &lower)?;
    formats::write_polyline(&out_path(out, "edge_upper.csv"), &upper)?;
    let svg_path = out_path(out, "arms.svg");
    std::fs::write(&svg_path, svg).map_err(|e| CliError::io(svg_path, e))?;

    let mut text = String::new();
    let _ = writeln!(text, "lowest operating frequency: {:.1} MHz", f_l / 1e6);
    let _ = writeln!(text, "cell  radius_m");
    for (p, r) in geometry::cell_radii(&params).iter().enumerate() {
        let _ = writeln!(text, "{:>4}  {}", p + 1, formats::fmt_f(*r));
    }
    let _ = writeln!(
        text,
        "feed: {} (margin {:.3e} m at {:.3e} Hz)",
        if report.feed_ok { "ok" } else { "too large" },
        report.feed_margin_m,
        f_max
    );
    let _ = writeln!(
        text,
        "self-complementary deviation: {:.3} deg (90/N), {:.3} deg (90/P)",
        report.self_complementary_deviation_rad.to_degrees(),
        report.cell_rule_deviation_rad.to_degrees()
    );
    let _ = writeln!(text, "tau: {}", if report.tau_ok { "ok" } else { "out of range" });
    Ok(text)
}

pub fn cmd_model(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let m = model(cfg)?;
    let g = grid(cfg)?;
    let phase = dispersion::model_phase(&m, &g)?;
    let delay = dispersion::model_group_delay(&m, &g)?;
    prepare_out(out)?;
    formats::write_phase(&out_path(out, "phase.csv"), &phase)?;
    formats::write_delay(&out_path(out, "gd.csv"), &delay)
}

#[derive(Debug, Clone, Default)]
pub struct FitInputs {
    pub phase: Option<PathBuf>,
    pub field: Option<PathBuf>,
    pub seed: Option<u64>,
}

fn fit_reference(cfg: &RunConfig, inputs: &FitInputs) -> Result<(PhaseCurve, bool), CliError> {
    let phase = inputs.phase.clone().or_else(|| cfg.path("io.phase_in"));
    let field = inputs.field.clone().or_else(|| cfg.path("io.field_in"));
    match (phase, field) {
        (Some(p), None) => Ok((formats::read_phase(&p)?, false)),
        (None, Some(p)) => {
            let data = formats::read_field(&p)?;
            let r_p = cfg
                .float("fit.probe_r_m")
                .ok_or_else(|| CliError::Config("field input needs `fit.probe_r_m`".into()))?;
            let m = medium(cfg.float_or("fit.probe_rel_permittivity", 1.0))?;
            let field = match &data.excitation {
                Some(v) => spectral::deconvolve(&data.field, v, cfg.float_or("fit.eps_rel", DEFAULT_EPS_REL))
                    .map_err(input_err)?,
                None => data.field,
            };
            let bp = spectral::backpropagate_phase(&field, r_p, &m).map_err(input_err)?;
            if !bp.gaps.is_empty() {
                eprintln!("warning: {} field samples had no phase and were interpolated", bp.gaps.len());
            }
            Ok((bp.phase, true))
        }
        (None, None) => Err(CliError::Config("fit needs a phase or field input".into())),
        (Some(_), Some(_)) => Err(CliError::Config("give either a phase or a field input, not both".into())),
    }
}

pub fn cmd_fit(cfg: &RunConfig, inputs: &FitInputs, out: &Path) -> Result<(), CliError> {
    let (reference, from_field) = fit_reference(cfg, inputs)?;
    let init = model(cfg)?;
    let weighting = match cfg.text("fit.weighting").unwrap_or("uniform") {
        "uniform" => Weighting::Uniform,
        "inverse_omega" => Weighting::InverseOmega,
        other => return Err(CliError::Config(format!("`fit.weighting`: unknown value `{other}`"))),
    };
    let mut fc = FitConfig::new(
        cfg.float_or("fit.f_min_hz", reference.grid.f_start()),
        cfg.float_or("fit.f_max_hz", reference.grid.f_end()),
        init,
    );
    fc.fit_cap = cfg.bool_or("fit.cap", false);
    fc.restarts = cfg.int_or("fit.restarts", fc.restarts as u64) as usize;
    fc.max_iters = cfg.int_or("fit.max_iters", fc.max_iters as u64) as usize;
    fc.tol = cfg.float_or("fit.tol", fc.tol);
    fc.weighting = weighting;
    fc.seed = inputs.seed.unwrap_or(cfg.int_or("fit.seed", 0));

    let result = fitting::fit(&reference, &fc)?;
    let res = fitting::residuals(&result.model, &reference, fc.f_min, fc.f_max, weighting)?;

    prepare_out(out)?;
    if from_field {
        formats::write_phase(&out_path(out, "reference_phase.csv"), &reference)?;
    }
    let cap = result.model.cap();
    let opt = |v: Option<f64>| v.map_or(KvValue::T("none".into()), KvValue::F);
    let unidentified: Vec<&str> = result
        .unidentified
        .iter()
        .map(|p| match p {
            FitParam::Phi0 => "phi0",
            FitParam::F0 => "f0",
            FitParam::FLow => "f_low",
            FitParam::TauC => "tau_c",
        })
        .collect();
    formats::write_kv(
        &out_path(out, "fit.kv"),
        &[
            ("phi0_rad", KvValue::F(result.model.phi0())),
            ("f0_hz", KvValue::F(result.model.f0())),
            ("f_low_hz", opt(cap.map(|c| c.f_low))),
            ("tau_c_s", opt(cap.map(|c| c.tau_c))),
            ("rms_residual_rad", KvValue::F(result.rms_residual)),
            ("converged", KvValue::B(result.converged)),
            ("unidentified", KvValue::T(if unidentified.is_empty() { "none".into() } else { unidentified.join(",") })),
        ],
    )?;
    formats::write_residuals(&out_path(out, "residual.csv"), &res)
}

/// Share of the excitation's spectral energy outside `[f_start, f_end]`.
fn out_of_band_fraction(ts: &TimeSeries, band: &FrequencyGrid) -> Result<f64, CliError> {
    let all = ts.bin_grid(0.0, f64::INFINITY)?;
    let spec = pulsegen::forward_spectrum(ts, &all)?;
    let (mut inside, mut total) = (0.0, 0.0);
    for (f, v) in all.freqs().zip(&spec.values) {
        let e = v.norm_sqr();
        total += e;
        if f >= band.f_start() && f <= band.f_end() {
            inside += e;
        }
    }
    Ok(if total > 0.0 { 1.0 - inside / total } else { 0.0 })
}

pub fn cmd_pulse(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let m = model(cfg)?;
    let band = grid(cfg)?;
    let spec = pulse(cfg)?;
    let passes = u32::try_from(cfg.int_or("pulse.passes", 1)).map_err(|_| CliError::Config("`pulse.passes` is too large".into()))?;
    let extra = spec.mu() + 10.0 * spec.sigma();
    let axis = time_axis(cfg, &m, &band, passes, &spec, extra)?;
    let chain = pulsegen::dispersion_chain(&spec, &axis, &m, &m, &band, passes)?;

    let outside = out_of_band_fraction(&chain.input, &band)?;
    if outside > 0.01 {
        eprintln!(
            "warning: {:.1}% of the pulse energy lies outside {:.3e}..{:.3e} Hz and is passed through undispersed",
            100.0 * outside,
            band.f_start(),
            band.f_end()
        );
    }
    let input = pulsegen::pulse_metrics(&chain.input, &chain.input)?;
    let dispersed = pulsegen::pulse_metrics(&chain.dispersed, &chain.input)?;
    let compressed = pulsegen::pulse_metrics(&chain.compressed, &chain.input)?;
    if [dispersed.fidelity, compressed.fidelity, dispersed.env_width].iter().any(|v| !v.is_finite()) {
        return Err(CliError::Numeric("non-finite pulse metric".into()));
    }

    prepare_out(out)?;
    formats::write_series(&out_path(out, "input.csv"), &chain.input)?;
    formats::write_series(&out_path(out, "dispersed.csv"), &chain.dispersed)?;
    formats::write_series(&out_path(out, "compressed.csv"), &chain.compressed)?;
    formats::write_kv(
        &out_path(out, "metrics.kv"),
        &[
            ("input_peak_v", KvValue::F(input.peak)),
            ("input_width_s", KvValue::F(input.env_width)),
            ("dispersed_peak_v", KvValue::F(dispersed.peak)),
            ("dispersed_width_s", KvValue::F(dispersed.env_width)),
            ("dispersed_fidelity", KvValue::F(dispersed.fidelity)),
            ("compressed_peak_v", KvValue::F(compressed.peak)),
            ("compressed_width_s", KvValue::F(compressed.env_width)),
            ("compressed_fidelity", KvValue::F(compressed.fidelity)),
            ("out_of_band_energy_fraction", KvValue::F(outside)),
            ("imag_residue", KvValue::F(chain.imag_residue)),
        ],
    )
}

pub fn scan(cfg: &RunConfig) -> Result<ScanConfig, CliError> {
    let n = cfg.int_or("scan.n_x", 101) as usize;
    if n == 0 {
        return Err(CliError::Config("`scan.n_x` must be at least 1".into()));
    }
    let xs = ScanConfig::linear_positions(cfg.float_or("scan.x_min_m", -0.5), cfg.float_or("scan.x_max_m", 0.5), n);
    Ok(ScanConfig::new(
        xs,
        cfg.float_or("scan.height_m", 0.025),
        cfg.float_or("scan.depth_m", 0.20),
        cfg.float_or("scan.target_x_m", 0.0),
        medium(cfg.float_or("scan.rel_permittivity", 2.5))?,
    )?
    .with_amplitude_exponent(cfg.float_or("scan.amplitude_exponent", 2.0))?)
}

pub fn cmd_bscan(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let sc = scan(cfg)?;
    let m = model(cfg)?;
    let band = grid(cfg)?;
    let spec = pulse(cfg)?;
    let max_delay = sc.x_positions().iter().map(|&x| two_way_delay(&sc, x)).fold(0.0, f64::max);
    let axis = time_axis(cfg, &m, &band, gprsim::ROUND_TRIP_PASSES, &spec, max_delay + spec.mu())?;
    let dispersed = gprsim::synth_bscan(&sc, &m, &spec, &band, &axis)?;
    let compressed = gprsim::compress_bscan(&dispersed, &m, &band)?;
    let md = gprsim::bscan_metrics(&dispersed)?;
    let mc = gprsim::bscan_metrics(&compressed)?;

    prepare_out(out)?;
    formats::write_bscan(&out_path(out, "bscan_dispersed.csv"), &dispersed)?;
    formats::write_bscan(&out_path(out, "bscan_compressed.csv"), &compressed)?;
    formats::write_kv(
        &out_path(out, "metrics.kv"),
        &[
            ("apex_two_way_delay_s", KvValue::F(two_way_delay(&sc, sc.target_x()))),
            ("pulse_mu_s", KvValue::F(spec.mu())),
            ("dispersed_apex_x_m", KvValue::F(md.apex_x)),
            ("dispersed_apex_time_s", KvValue::F(md.apex_time)),
            ("dispersed_range_width_s", KvValue::F(md.range_width)),
            ("compressed_apex_x_m", KvValue::F(mc.apex_x)),
            ("compressed_apex_time_s", KvValue::F(mc.apex_time)),
            ("compressed_range_width_s", KvValue::F(mc.range_width)),
            ("imag_residue", KvValue::F(dispersed.imag_residue.max(compressed.imag_residue))),
        ],
    )
}
