//! CSV, kv and SVG readers and writers.
//!
//! Floats are written as `{:.16e}` (17 significant digits), so the same
//! inputs always produce byte-identical files.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use sinuous_core::geometry::{self, PolarPolyline, SinuousParams};
use sinuous_core::{BScan, ComplexSpectrum, Complex64, DelayCurve, FrequencyGrid, PhaseCurve, TimeSeries};

use crate::error::CliError;

pub fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::io(path, e))
}

fn csv_writer(path: &Path, comments: &[(&str, String)]) -> Result<csv::Writer<BufWriter<File>>, CliError> {
    let mut out = create(path)?;
    for (k, v) in comments {
        writeln!(out, "# {k}={v}").map_err(|e| CliError::io(path, e))?;
    }
    Ok(csv::Writer::from_writer(out))
}

fn write_rows(
    path: &Path,
    comments: &[(&str, String)],
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<(), CliError> {
    let io = |e: csv::Error| CliError::io(path, e.into());
    let mut w = csv_writer(path, comments)?;
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(&row).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn write_polyline(path: &Path, line: &PolarPolyline) -> Result<(), CliError> {
    write_rows(
        path,
        &[],
        &["cell", "r_m", "phi_rad"],
        line.points
            .iter()
            .map(|p| vec![p.cell.to_string(), fmt_f(p.r), fmt_f(p.phi)]),
    )
}

pub fn write_phase(path: &Path, curve: &PhaseCurve) -> Result<(), CliError> {
    write_rows(
        path,
        &[],
        &["f_hz", "phase_rad"],
        curve.grid.freqs().zip(&curve.phase).map(|(f, p)| vec![fmt_f(f), fmt_f(*p)]),
    )
}

pub fn write_delay(path: &Path, curve: &DelayCurve) -> Result<(), CliError> {
    write_rows(
        path,
        &[],
        &["f_hz", "delay_s"],
        curve.grid.freqs().zip(&curve.delay).map(|(f, d)| vec![fmt_f(f), fmt_f(*d)]),
    )
}

pub fn write_residuals(path: &Path, residuals: &[(f64, f64)]) -> Result<(), CliError> {
    write_rows(
        path,
        &[],
        &["f_hz", "residual_rad"],
        residuals.iter().map(|(f, r)| vec![fmt_f(*f), fmt_f(*r)]),
    )
}

pub fn write_series(path: &Path, ts: &TimeSeries) -> Result<(), CliError> {
    write_rows(
        path,
        &[],
        &["t_s", "v"],
        ts.samples
            .iter()
            .enumerate()
            .map(|(k, v)| vec![fmt_f(ts.time(k)), fmt_f(*v)]),
    )
}

/// Long format, one row per (position, sample), position-major.
pub fn write_bscan(path: &Path, b: &BScan) -> Result<(), CliError> {
    let comments = [
        ("dt", fmt_f(b.axis.dt)),
        ("t0", fmt_f(b.axis.t0)),
        ("nx", b.n_positions().to_string()),
        ("nt", b.axis.n.to_string()),
    ];
    let rows = b.x_positions.iter().zip(&b.traces).flat_map(|(x, trace)| {
        trace
            .iter()
            .enumerate()
            .map(move |(k, v)| vec![fmt_f(*x), fmt_f(b.axis.time(k)), fmt_f(*v)])
    });
    write_rows(path, &comments, &["x_m", "t_s", "v"], rows)
}

#[derive(Debug, Clone, PartialEq)]
pub enum KvValue {
    F(f64),
    B(bool),
    T(String),
}

pub fn write_kv(path: &Path, pairs: &[(&str, KvValue)]) -> Result<(), CliError> {
    let mut out = create(path)?;
    for (k, v) in pairs {
        let v = match v {
            KvValue::F(x) => fmt_f(*x),
            KvValue::B(b) => b.to_string(),
            KvValue::T(t) => t.clone(),
        };
        writeln!(out, "{k}={v}").map_err(|e| CliError::io(path, e))?;
    }
    out.flush().map_err(|e| CliError::io(path, e))
}

pub fn read_kv(path: &Path) -> Result<HashMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    Ok(text
        .lines()
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .collect())
}

/// Closed outline of every arm, in millimetres, centred on the feed.
pub fn arms_svg(params: &SinuousParams, samples_per_cell: usize) -> Result<String, CliError> {
    let (lower, upper) = geometry::arm_edges(params, samples_per_cell)?;
    let extent = params.r_trunc().unwrap_or(params.r1()) * 1e3 * 1.05;
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{} {} {} {}\">\n",
        fmt_f(-extent),
        fmt_f(-extent),
        fmt_f(2.0 * extent),
        fmt_f(2.0 * extent)
    );
    let n = params.n_arms();
    for arm in 0..n {
        let turn = std::f64::consts::TAU * arm as f64 / n as f64;
        let mut pts = lower.rotated(turn).to_cartesian();
        pts.extend(upper.rotated(turn).to_cartesian().into_iter().rev());
        let mut d = String::new();
        for (i, (x, y)) in pts.iter().enumerate() {
            // SVG y grows downward.
            d.push_str(&format!("{}{} {} ", if i == 0 { "M" } else { "L" }, fmt_f(x * 1e3), fmt_f(-y * 1e3)));
        }
        d.push('Z');
        svg.push_str(&format!(
            "  <path id=\"arm{}\" d=\"{d}\" fill=\"#b87333\" stroke=\"black\" stroke-width=\"0.1\"/>\n",
            arm + 1
        ));
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

struct Table {
    rows: Vec<(u64, Vec<f64>)>,
}

/// Reads a headed numeric CSV, returning the requested columns in order.
fn read_columns(path: &Path, required: &[&str], optional: &[&str]) -> Result<(Table, usize), CliError> {
    let file = File::open(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(file);
    let input = |msg: String| CliError::Input(format!("{}: {msg}", path.display()));
    let headers = reader.headers().map_err(|e| input(e.to_string()))?.clone();
    let find = |name: &str| headers.iter().position(|h| h == name);
    let mut idx = Vec::new();
    for name in required {
        idx.push(find(name).ok_or_else(|| input(format!("missing column `{name}`")))?);
    }
    let present: Vec<usize> = optional.iter().filter_map(|n| find(n)).collect();
    let n_optional = if present.len() == optional.len() {
        idx.extend(&present);
        optional.len()
    } else if present.is_empty() {
        0
    } else {
        let missing: Vec<&str> = optional.iter().copied().filter(|n| find(n).is_none()).collect();
        return Err(input(format!("missing column `{}`", missing.join("`, `"))));
    };

    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| input(e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        let mut values = Vec::with_capacity(idx.len());
        for &i in &idx {
            let raw = record.get(i).unwrap_or("");
            let v: f64 = raw
                .parse()
                .map_err(|_| input(format!("line {line}: column `{}` is not a number: `{raw}`", &headers[i])))?;
            if !v.is_finite() {
                return Err(input(format!("line {line}: column `{}` is not finite", &headers[i])));
            }
            values.push(v);
        }
        rows.push((line, values));
    }
    Ok((Table { rows }, n_optional))
}

/// Grid through the first column: strictly increasing and uniform to 1e-9
/// relative.
fn uniform_grid(path: &Path, table: &Table) -> Result<FrequencyGrid, CliError> {
    let input = |msg: String| CliError::Input(format!("{}: {msg}", path.display()));
    let rows = &table.rows;
    if rows.len() < 3 {
        return Err(input(format!("need at least 3 rows, found {}", rows.len())));
    }
    let f0 = rows[0].1[0];
    let step = (rows[rows.len() - 1].1[0] - f0) / (rows.len() - 1) as f64;
    for w in rows.windows(2) {
        if !(w[1].1[0] > w[0].1[0]) {
            return Err(input(format!("line {}: frequency not strictly increasing", w[1].0)));
        }
    }
    for w in rows.windows(2) {
        let (line, f) = (w[1].0, w[1].1[0]);
        if ((f - w[0].1[0]) - step).abs() > 1e-9 * step {
            return Err(input(format!("line {line}: frequency spacing not uniform")));
        }
    }
    FrequencyGrid::new(f0, step, rows.len()).map_err(crate::error::input_err)
}

pub fn read_phase(path: &Path) -> Result<PhaseCurve, CliError> {
    let (table, _) = read_columns(path, &["f_hz", "phase_rad"], &[])?;
    let grid = uniform_grid(path, &table)?;
    let phase = table.rows.iter().map(|(_, v)| v[1]).collect();
    PhaseCurve::new(grid, phase).map_err(crate::error::input_err)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldInput {
    pub field: ComplexSpectrum,
    pub excitation: Option<ComplexSpectrum>,
}

pub fn read_field(path: &Path) -> Result<FieldInput, CliError> {
    let (table, n_opt) = read_columns(path, &["f_hz", "re", "im"], &["v_re", "v_im"])?;
    let grid = uniform_grid(path, &table)?;
    let column = |a: usize, b: usize| -> Vec<Complex64> {
        table.rows.iter().map(|(_, v)| Complex64::new(v[a], v[b])).collect()
    };
    let field = ComplexSpectrum::new(grid, column(1, 2)).map_err(crate::error::input_err)?;
    let excitation = if n_opt == 2 {
        Some(ComplexSpectrum::new(grid, column(3, 4)).map_err(crate::error::input_err)?)
    } else {
        None
    };
    Ok(FieldInput { field, excitation })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn file(text: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        f
    }

    #[test]
    fn float_format_is_fixed() {
        assert_eq!(fmt_f(20.0), "2.0000000000000000e1");
        assert_eq!(fmt_f(-0.1), "-1.0000000000000001e-1");
        assert_eq!(fmt_f(3.185e-9), "3.1850000000000001e-9");
    }

    #[test]
    fn phase_csv_round_trip() {
        let grid = FrequencyGrid::new(1e9, 1e7, 5).unwrap();
        let curve = PhaseCurve::new(grid, vec![0.1, -0.2, 0.3, 1e-12, 5.0]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("phase.csv");
        write_phase(&p, &curve).unwrap();
        let back = read_phase(&p).unwrap();
        assert_eq!(back.phase, curve.phase);
        assert!(back.grid.same_as(&grid));
    }

    #[test]
    fn schema_errors_name_column_and_line() {
        let f = file("f_hz,phase\n1,2\n");
        let msg = read_phase(f.path()).unwrap_err().to_string();
        assert!(msg.contains("missing column `phase_rad`"), "{msg}");

        let f = file("f_hz,phase_rad\n1,0\n2,0\n3,x\n");
        let err = read_phase(f.path()).unwrap_err();
        assert!(err.to_string().contains("line 4"), "{err}");
        assert_eq!(err.exit_code(), 3);

        let f = file("f_hz,phase_rad\n1,0\n2,0\n2,0\n3,0\n");
        assert!(read_phase(f.path()).unwrap_err().to_string().contains("line 4"));

        let f = file("f_hz,phase_rad\n1,0\n2,0\n3.5,0\n");
        assert!(read_phase(f.path()).unwrap_err().to_string().contains("not uniform"));

        let f = file("f_hz,re,im,v_re\n1,0,0,1\n2,0,0,1\n3,0,0,1\n");
        assert!(read_field(f.path()).unwrap_err().to_string().contains("`v_im`"));
    }

    #[test]
    fn field_with_excitation() {
        let f = file("# probe export\nf_hz,re,im,v_re,v_im\n1e9,1,0,2,0\n2e9,0,1,2,0\n3e9,-1,0,2,0\n");
        let input = read_field(f.path()).unwrap();
        assert_eq!(input.field.values[1], Complex64::new(0.0, 1.0));
        assert_eq!(input.excitation.unwrap().values[2], Complex64::new(2.0, 0.0));
    }

    #[test]
    fn svg_has_one_path_per_arm() {
        let svg = arms_svg(&SinuousParams::reference_design(), 16).unwrap();
        assert_eq!(svg.matches("<path").count(), 4);
        assert!(svg.trim_end().ends_with("</svg>"));
    }
}
