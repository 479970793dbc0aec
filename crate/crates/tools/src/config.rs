//! Flat `section.key = value` run configuration.
//!
//! Lines are `key = value`; `#` starts a comment; blank lines are ignored.
//! Every key is declared in [`KEYS`] with its type, and anything else is
//! rejected by name. Angles are degrees here and radians everywhere else.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Float,
    Int,
    Bool,
    Text,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Float(f64),
    Int(u64),
    Bool(bool),
    Text(String),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            // Shortest representation that parses back to the same f64.
            Value::Float(v) => write!(f, "{v:?}"),
            Value::Int(v) => write!(f, "{v}"),
            Value::Bool(v) => write!(f, "{v}"),
            Value::Text(v) => write!(f, "{v}"),
        }
    }
}

/// Recognized keys, their types and a one-line description.
pub const KEYS: &[(&str, Kind, &str)] = &[
    ("antenna.n_arms", Kind::Int, "number of arms N"),
    ("antenna.n_cells", Kind::Int, "number of cells P"),
    ("antenna.r1_m", Kind::Float, "outer cell radius R1"),
    ("antenna.r_in_m", Kind::Float, "inner feed radius"),
    ("antenna.r_trunc_m", Kind::Float, "optional outer truncation radius"),
    ("antenna.tau", Kind::Float, "growth rate, 0 < tau < 1"),
    ("antenna.alpha_deg", Kind::Float, "angular sweep in degrees"),
    ("antenna.delta_deg", Kind::Float, "half arm width in degrees"),
    ("antenna.rel_permittivity", Kind::Float, "medium around the antenna"),
    ("antenna.samples_per_cell", Kind::Int, "polyline resolution"),
    ("model.phi0_rad", Kind::Float, "dispersion constant; default -pi/ln(antenna.tau)"),
    ("model.f0_hz", Kind::Float, "zero-dispersion frequency"),
    ("model.f_low_hz", Kind::Float, "optional constant-delay cap frequency"),
    ("model.tau_c_s", Kind::Float, "cap delay; default keeps the delay continuous"),
    ("grid.f_start_hz", Kind::Float, "first frequency"),
    ("grid.f_stop_hz", Kind::Float, "last frequency"),
    ("grid.f_step_hz", Kind::Float, "frequency spacing"),
    ("pulse.v_peak_v", Kind::Float, "peak excitation voltage"),
    ("pulse.f_bw_hz", Kind::Float, "pulse bandwidth"),
    ("pulse.mu_s", Kind::Float, "pulse centre time"),
    ("pulse.passes", Kind::Int, "dispersion passes for the pulse command"),
    ("record.dt_s", Kind::Float, "sample spacing; default from band and pulse"),
    ("record.n", Kind::Int, "sample count; default from the record-length rule"),
    ("scan.x_min_m", Kind::Float, "first scan position"),
    ("scan.x_max_m", Kind::Float, "last scan position"),
    ("scan.n_x", Kind::Int, "number of scan positions"),
    ("scan.height_m", Kind::Float, "antenna height above ground"),
    ("scan.depth_m", Kind::Float, "target depth"),
    ("scan.target_x_m", Kind::Float, "target horizontal position"),
    ("scan.rel_permittivity", Kind::Float, "soil relative permittivity"),
    ("scan.amplitude_exponent", Kind::Float, "spreading exponent"),
    ("fit.f_min_hz", Kind::Float, "fit window start; default input start"),
    ("fit.f_max_hz", Kind::Float, "fit window end; default input end"),
    ("fit.cap", Kind::Bool, "fit the constant-delay cap"),
    ("fit.restarts", Kind::Int, "simplex restarts"),
    ("fit.max_iters", Kind::Int, "iterations per restart"),
    ("fit.tol", Kind::Float, "relative convergence tolerance"),
    ("fit.weighting", Kind::Text, "uniform or inverse_omega"),
    ("fit.seed", Kind::Int, "restart seed"),
    ("fit.probe_r_m", Kind::Float, "probe distance for field input"),
    ("fit.probe_rel_permittivity", Kind::Float, "medium between antenna and probe"),
    ("fit.eps_rel", Kind::Float, "deconvolution floor relative to peak |v|"),
    ("io.phase_in", Kind::Text, "phase CSV (f_hz,phase_rad)"),
    ("io.field_in", Kind::Text, "field CSV (f_hz,re,im[,v_re,v_im])"),
    ("io.out_dir", Kind::Text, "output directory"),
];

fn kind_of(key: &str) -> Option<Kind> {
    KEYS.iter().find(|(k, _, _)| *k == key).map(|(_, kind, _)| *kind)
}

fn parse_value(kind: Kind, raw: &str) -> Option<Value> {
    match kind {
        Kind::Float => raw.parse::<f64>().ok().filter(|v| v.is_finite()).map(Value::Float),
        Kind::Int => raw.parse::<u64>().ok().map(Value::Int),
        Kind::Bool => raw.parse::<bool>().ok().map(Value::Bool),
        Kind::Text => Some(Value::Text(raw.to_string())),
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    values: BTreeMap<String, Value>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let body = line.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (key, raw) = body
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {line_no}: expected key = value")))?;
            let (key, raw) = (key.trim(), raw.trim());
            let kind = kind_of(key)
                .ok_or_else(|| CliError::Config(format!("line {line_no}: unknown key `{key}`")))?;
            let value = parse_value(kind, raw).ok_or_else(|| {
                CliError::Config(format!("line {line_no}: `{key}` expects {kind:?}, got `{raw}`"))
            })?;
            if values.insert(key.to_string(), value).is_some() {
                return Err(CliError::Config(format!("line {line_no}: duplicate key `{key}`")));
            }
        }
        Ok(RunConfig { values })
    }

    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// One `key = value` line per set key, sorted by key.
    pub fn emit(&self) -> String {
        self.values.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    pub fn set(&mut self, key: &str, value: Value) -> Result<(), CliError> {
        let kind = kind_of(key).ok_or_else(|| CliError::Config(format!("unknown key `{key}`")))?;
        let ok = matches!(
            (kind, &value),
            (Kind::Float, Value::Float(_)) | (Kind::Int, Value::Int(_)) | (Kind::Bool, Value::Bool(_)) | (Kind::Text, Value::Text(_))
        );
        if !ok {
            return Err(CliError::Config(format!("`{key}` expects {kind:?}")));
        }
        self.values.insert(key.to_string(), value);
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        debug_assert!(kind_of(key).is_some(), "undeclared key {key}");
        self.values.get(key)
    }

    pub fn float(&self, key: &str) -> Option<f64> {
        match self.get(key) {
            Some(Value::Float(v)) => Some(*v),
            _ => None,
        }
    }

    pub fn float_or(&self, key: &str, default: f64) -> f64 {
        self.float(key).unwrap_or(default)
    }

    pub fn int(&self, key: &str) -> Option<u64> {
        match self.get(key) {
            Some(Value::Int(v)) => Some(*v),
            _ => None,
        }
    }

    pub fn int_or(&self, key: &str, default: u64) -> u64 {
        self.int(key).unwrap_or(default)
    }

    pub fn bool_or(&self, key: &str, default: bool) -> bool {
        match self.get(key) {
            Some(Value::Bool(v)) => *v,
            _ => default,
        }
    }

    pub fn text(&self, key: &str) -> Option<&str> {
        match self.get(key) {
            Some(Value::Text(v)) => Some(v),
            _ => None,
        }
    }

    pub fn path(&self, key: &str) -> Option<PathBuf> {
        self.text(key).map(PathBuf::from)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_types() {
        let c = RunConfig::parse("# antenna\nantenna.n_arms = 4\nantenna.alpha_deg=45 # sweep\n\nfit.cap = true\nio.out_dir = out dir\n")
            .unwrap();
        assert_eq!(c.int("antenna.n_arms"), Some(4));
        assert_eq!(c.float("antenna.alpha_deg"), Some(45.0));
        assert!(c.bool_or("fit.cap", false));
        assert_eq!(c.text("io.out_dir"), Some("out dir"));
        assert_eq!(c.float_or("antenna.tau", 0.5), 0.5);
    }

    #[test]
    fn unknown_key_is_named() {
        let err = RunConfig::parse("antenna.n_arms = 4\nantenna.radius = 3\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("antenna.radius") && msg.contains("line 2"), "{msg}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn bad_values_and_duplicates() {
        assert!(RunConfig::parse("antenna.n_arms = four").is_err());
        assert!(RunConfig::parse("antenna.tau = nan").is_err());
        assert!(RunConfig::parse("antenna.tau").is_err());
        assert!(RunConfig::parse("antenna.tau = 0.5\nantenna.tau = 0.6").is_err());
    }

    #[test]
    fn emit_round_trips() {
        let text = "model.f0_hz = 1e10\nantenna.tau = 0.8547\nantenna.n_arms = 4\nfit.cap = false\nio.phase_in = a/b.csv\ngrid.f_step_hz = 0.1\n";
        let c = RunConfig::parse(text).unwrap();
        let again = RunConfig::parse(&c.emit()).unwrap();
        assert_eq!(c, again);
        assert_eq!(again.emit(), c.emit());
    }
}
