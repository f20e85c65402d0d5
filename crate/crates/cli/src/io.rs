//! Trajectory CSV, report JSON and plot CSV.
//!
//! Trajectory files have the header `k,u_1,..,u_m,y_1,..,y_p` and one row
//! per time step. Floats are written in shortest round-trip form, so a
//! save/load cycle is bit-exact.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use nalgebra::DVector;
use uirecon_core::Trajectory;

use crate::report::RunReport;
use crate::CliError;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn parse_err(path: &Path, line: u64, msg: impl Into<String>) -> CliError {
    CliError::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

/// Column counts `(m, p)` from a header, checking names and order.
fn parse_header(path: &Path, header: &csv::StringRecord) -> Result<(usize, usize), CliError> {
    let fields: Vec<&str> = header.iter().map(str::trim).collect();
    if fields.first() != Some(&"k") {
        return Err(parse_err(path, 1, "header must start with 'k'"));
    }
    let m = fields.iter().filter(|f| f.starts_with("u_")).count();
    let p = fields.iter().filter(|f| f.starts_with("y_")).count();
    let expected: Vec<String> = std::iter::once("k".to_string())
        .chain((1..=m).map(|i| format!("u_{i}")))
        .chain((1..=p).map(|i| format!("y_{i}")))
        .collect();
    if fields != expected {
        return Err(parse_err(
            path,
            1,
            format!(
                "expected header '{}', got '{}'",
                expected.join(","),
                fields.join(",")
            ),
        ));
    }
    if p == 0 {
        return Err(parse_err(path, 1, "no output columns"));
    }
    Ok((m, p))
}

pub fn load_trajectory(path: &Path) -> Result<Trajectory, CliError> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(file);
    let mut records = reader.records();
    let header = match records.next() {
        None => return Err(parse_err(path, 1, "empty file")),
        Some(rec) => rec.map_err(|e| csv_err(path, e))?,
    };
    let (m, p) = parse_header(path, &header)?;
    let mut inputs = Vec::new();
    let mut outputs = Vec::new();
    for rec in records {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let line = rec.position().map_or(0, |pos| pos.line());
        if rec.len() != 1 + m + p {
            return Err(parse_err(
                path,
                line,
                format!("expected {} fields, found {}", 1 + m + p, rec.len()),
            ));
        }
        let k: usize = rec[0]
            .parse()
            .map_err(|_| parse_err(path, line, format!("bad step index '{}'", &rec[0])))?;
        if k != inputs.len() {
            return Err(parse_err(
                path,
                line,
                format!("step index {k} out of sequence, expected {}", inputs.len()),
            ));
        }
        let mut values = Vec::with_capacity(m + p);
        for field in rec.iter().skip(1) {
            let v: f64 = field
                .parse()
                .map_err(|_| parse_err(path, line, format!("bad number '{field}'")))?;
            if !v.is_finite() {
                return Err(parse_err(path, line, format!("non-finite value '{field}'")));
            }
            values.push(v);
        }
        inputs.push(DVector::from_column_slice(&values[..m]));
        outputs.push(DVector::from_column_slice(&values[m..]));
    }
    if inputs.is_empty() {
        return Err(parse_err(path, 2, "no data rows"));
    }
    Trajectory::new(inputs, outputs).map_err(CliError::from)
}

fn csv_err(path: &Path, e: csv::Error) -> CliError {
    let line = e.position().map_or(0, |p| p.line());
    parse_err(path, line, e.to_string())
}

pub fn save_trajectory(traj: &Trajectory, path: &Path) -> Result<(), CliError> {
    traj.validate()?;
    if traj
        .inputs
        .iter()
        .chain(&traj.outputs)
        .any(|v| v.iter().any(|x| !x.is_finite()))
    {
        return Err(CliError::Config(format!(
            "{}: refusing to write non-finite samples",
            path.display()
        )));
    }
    let m = traj.input_dim().unwrap_or(0);
    let p = traj.output_dim().unwrap_or(0);
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_write_err(path, e))?;
    let header: Vec<String> = std::iter::once("k".to_string())
        .chain((1..=m).map(|i| format!("u_{i}")))
        .chain((1..=p).map(|i| format!("y_{i}")))
        .collect();
    w.write_record(&header)
        .map_err(|e| csv_write_err(path, e))?;
    for (k, (u, y)) in traj.inputs.iter().zip(&traj.outputs).enumerate() {
        let row = std::iter::once(k.to_string())
            .chain(u.iter().chain(y.iter()).map(|v| format!("{v:e}")));
        w.write_record(row).map_err(|e| csv_write_err(path, e))?;
    }
    w.flush().map_err(io_err(path))
}

fn csv_write_err(path: &Path, e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => CliError::Io {
            path: path.to_path_buf(),
            source,
        },
        other => CliError::Config(format!("{}: {other:?}", path.display())),
    }
}

/// Pretty-printed JSON with a trailing newline.
pub fn save_report(report: &RunReport, path: &Path) -> Result<(), CliError> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut out = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut out, report)?;
    out.write_all(b"\n").map_err(io_err(path))?;
    out.flush().map_err(io_err(path))
}

/// One row per estimate: `k`, the estimate, the true input when known,
/// the error norm when known and the residual norm.
pub fn emit_plot_data(report: &RunReport, path: &Path) -> Result<(), CliError> {
    let m = report.metadata.m;
    let truth = report.true_inputs.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_write_err(path, e))?;
    let mut header = vec!["k".to_string()];
    header.extend((1..=m).map(|i| format!("u_hat_{i}")));
    if truth.is_some() {
        header.extend((1..=m).map(|i| format!("u_{i}")));
        header.push("error_norm".into());
    }
    header.push("residual_norm".into());
    w.write_record(&header)
        .map_err(|e| csv_write_err(path, e))?;
    for (j, est) in report.estimates.iter().enumerate() {
        let mut row = vec![(report.metadata.estimation_start_step + j).to_string()];
        row.extend(est.iter().map(|v| format!("{v:e}")));
        if let (Some(truth), Some(errs)) = (truth, report.error_norms.as_ref()) {
            row.extend(truth[j].iter().map(|v| format!("{v:e}")));
            row.push(format!("{:e}", errs[j]));
        }
        row.push(format!("{:e}", report.residual_norms[j]));
        w.write_record(&row).map_err(|e| csv_write_err(path, e))?;
    }
    w.flush().map_err(io_err(path))
}
