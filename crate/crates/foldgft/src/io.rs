//! CSV formats for fields, graphs and experiment results.
//!
//! Floats are written in Rust's shortest round-trip form, so reading a file
//! back yields bit-identical values and identical runs give identical bytes.

use std::fs;
use std::path::{Path, PathBuf};

use foldgft_core::graph::Graph;
use foldgft_core::interp::ReconstructionMethod;

use crate::config::Scheme;
use crate::error::AppError;
use crate::experiment::{summarize, ExperimentResult, SummaryRow, TrialRecord};

pub const POSITIONS_HEADER: [&str; 3] = ["id", "x", "y"];
pub const EDGES_HEADER: [&str; 3] = ["i", "j", "w"];
pub const RAW_HEADER: [&str; 13] = [
    "method",
    "scheme",
    "omega",
    "sigma",
    "sample_size_requested",
    "sample_size_actual",
    "trial",
    "field_seed",
    "sampling_seed",
    "noise_seed",
    "cutoff",
    "snr_db",
    "status",
];
pub const SUMMARY_HEADER: [&str; 10] = [
    "scheme",
    "method",
    "omega",
    "sigma",
    "sample_size",
    "mean_sample_size_actual",
    "trials",
    "failures",
    "mean_snr",
    "std_snr",
];
pub const PLOT_HEADER: [&str; 4] = ["sample_size", "method", "mean_snr", "std"];

/// Column reference shown by `--help`.
pub const COLUMNS_HELP: &str = "\
OUTPUT FILES (written under --out):
  raw.csv      one row per method x condition x trial
    method                 BL_I, BL_D or SF_Q
    scheme                 random | uniform
    omega, sigma           signal frequency and noise standard deviation
    sample_size_requested  |S| asked for
    sample_size_actual     |S| used (grid deduplication may shrink it)
    trial                  trial index within the condition
    field_seed             seed of the sensor deployment
    sampling_seed          seed of the random sampling set (0 for uniform)
    noise_seed             seed of the noise vector
    cutoff                 basis vectors spanned (r for SF_Q, |S| for baselines)
    snr_db                 SNR on the unsampled vertices vs the clean signal,
                           capped to +-300 dB; empty when the trial failed
    status                 ok, or 'failed: <diagnostic>'
  summary.csv  one row per scheme x method x condition
    scheme, method, omega, sigma, sample_size, mean_sample_size_actual,
    trials (successful), failures, mean_snr, std_snr (sample std, n-1)
  plot_<scheme>_sigma<s>_omega<w>.csv  one per panel
    sample_size, method, mean_snr, std";

pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        format!("{x}")
    }
}

fn writer(path: &Path) -> Result<csv::Writer<fs::File>, AppError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))?;
    }
    csv::Writer::from_path(path).map_err(|e| AppError::csv(path, e))
}

fn reader(path: &Path) -> Result<csv::Reader<fs::File>, AppError> {
    csv::Reader::from_path(path).map_err(|e| AppError::csv(path, e))
}

fn check_header(path: &Path, r: &mut csv::Reader<fs::File>, want: &[&str]) -> Result<(), AppError> {
    let got = r.headers().map_err(|e| AppError::csv(path, e))?;
    if got.iter().ne(want.iter().copied()) {
        return Err(AppError::Format {
            path: path.to_path_buf(),
            message: format!("expected header `{}`", want.join(",")),
        });
    }
    Ok(())
}

fn field<T: std::str::FromStr>(
    path: &Path,
    rec: &csv::StringRecord,
    i: usize,
    name: &str,
) -> Result<T, AppError> {
    let line = rec.position().map_or(0, |p| p.line());
    rec.get(i)
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| AppError::Format {
            path: path.to_path_buf(),
            message: format!("line {line}: bad `{name}` value {:?}", rec.get(i)),
        })
}

fn finish(path: &Path, mut w: csv::Writer<fs::File>) -> Result<(), AppError> {
    w.flush().map_err(|e| AppError::io(path, e))
}

pub fn write_positions(path: &Path, positions: &[[f64; 2]]) -> Result<(), AppError> {
    let mut w = writer(path)?;
    let err = |e| AppError::csv(path, e);
    w.write_record(POSITIONS_HEADER).map_err(err)?;
    for (i, p) in positions.iter().enumerate() {
        w.write_record([i.to_string(), fmt_f64(p[0]), fmt_f64(p[1])])
            .map_err(err)?;
    }
    finish(path, w)
}

/// Reads `id,x,y`; ids must be exactly `0..n` in order.
pub fn read_positions(path: &Path) -> Result<Vec<[f64; 2]>, AppError> {
    let mut r = reader(path)?;
    check_header(path, &mut r, &POSITIONS_HEADER)?;
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| AppError::csv(path, e))?;
        let id: usize = field(path, &rec, 0, "id")?;
        if id != out.len() {
            return Err(AppError::Format {
                path: path.to_path_buf(),
                message: format!(
                    "ids must be contiguous from 0; found {id} at row {}",
                    out.len()
                ),
            });
        }
        out.push([field(path, &rec, 1, "x")?, field(path, &rec, 2, "y")?]);
    }
    Ok(out)
}

pub fn write_edges(path: &Path, g: &Graph) -> Result<(), AppError> {
    let mut w = writer(path)?;
    let err = |e| AppError::csv(path, e);
    w.write_record(EDGES_HEADER).map_err(err)?;
    for (i, j, wt) in g.edges() {
        w.write_record([i.to_string(), j.to_string(), fmt_f64(wt)])
            .map_err(err)?;
    }
    finish(path, w)
}

/// Reads `i,j,w` rows (`i < j`) into a graph on `n` vertices.
pub fn read_edges(path: &Path, n: usize) -> Result<Graph, AppError> {
    let mut r = reader(path)?;
    check_header(path, &mut r, &EDGES_HEADER)?;
    let mut edges = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| AppError::csv(path, e))?;
        let i: usize = field(path, &rec, 0, "i")?;
        let j: usize = field(path, &rec, 1, "j")?;
        if i >= j {
            return Err(AppError::Format {
                path: path.to_path_buf(),
                message: format!("edge ({i}, {j}) must have i < j"),
            });
        }
        edges.push((i, j, field(path, &rec, 2, "w")?));
    }
    Ok(Graph::from_edges(n, &edges)?)
}

pub fn write_raw(path: &Path, result: &ExperimentResult) -> Result<(), AppError> {
    let mut w = writer(path)?;
    let err = |e| AppError::csv(path, e);
    w.write_record(RAW_HEADER).map_err(err)?;
    for r in &result.rows {
        w.write_record([
            r.method.as_str().to_string(),
            r.scheme.as_str().to_string(),
            fmt_f64(r.omega),
            fmt_f64(r.sigma),
            r.sample_size_requested.to_string(),
            r.sample_size_actual.to_string(),
            r.trial.to_string(),
            r.field_seed.to_string(),
            r.sampling_seed.to_string(),
            r.noise_seed.to_string(),
            r.cutoff.to_string(),
            r.snr_db.map(fmt_f64).unwrap_or_default(),
            r.status.clone(),
        ])
        .map_err(err)?;
    }
    finish(path, w)
}

pub fn read_raw(path: &Path) -> Result<ExperimentResult, AppError> {
    let mut r = reader(path)?;
    check_header(path, &mut r, &RAW_HEADER)?;
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| AppError::csv(path, e))?;
        let snr = rec.get(11).unwrap_or("");
        rows.push(TrialRecord {
            method: field::<ReconstructionMethod>(path, &rec, 0, "method")?,
            scheme: field::<Scheme>(path, &rec, 1, "scheme")?,
            omega: field(path, &rec, 2, "omega")?,
            sigma: field(path, &rec, 3, "sigma")?,
            sample_size_requested: field(path, &rec, 4, "sample_size_requested")?,
            sample_size_actual: field(path, &rec, 5, "sample_size_actual")?,
            trial: field(path, &rec, 6, "trial")?,
            field_seed: field(path, &rec, 7, "field_seed")?,
            sampling_seed: field(path, &rec, 8, "sampling_seed")?,
            noise_seed: field(path, &rec, 9, "noise_seed")?,
            cutoff: field(path, &rec, 10, "cutoff")?,
            snr_db: if snr.is_empty() {
                None
            } else {
                Some(field(path, &rec, 11, "snr_db")?)
            },
            status: rec.get(12).unwrap_or("").to_string(),
        });
    }
    Ok(ExperimentResult { rows })
}

pub fn write_summary(path: &Path, summary: &[SummaryRow]) -> Result<(), AppError> {
    let mut w = writer(path)?;
    let err = |e| AppError::csv(path, e);
    w.write_record(SUMMARY_HEADER).map_err(err)?;
    for s in summary {
        w.write_record([
            s.scheme.as_str().to_string(),
            s.method.as_str().to_string(),
            fmt_f64(s.omega),
            fmt_f64(s.sigma),
            s.sample_size.to_string(),
            fmt_f64(s.mean_sample_size_actual),
            s.trials.to_string(),
            s.failures.to_string(),
            fmt_f64(s.mean_snr),
            fmt_f64(s.std_snr),
        ])
        .map_err(err)?;
    }
    finish(path, w)
}

pub fn plot_file_name(scheme: Scheme, sigma: f64, omega: f64) -> String {
    format!(
        "plot_{scheme}_sigma{}_omega{}.csv",
        fmt_f64(sigma),
        fmt_f64(omega)
    )
}

/// One file per (scheme, σ, ω) panel, rows in summary order.
pub fn write_plot_data(dir: &Path, summary: &[SummaryRow]) -> Result<Vec<PathBuf>, AppError> {
    type Panel<'a> = ((Scheme, f64, f64), Vec<&'a SummaryRow>);
    let mut panels: Vec<Panel> = Vec::new();
    for s in summary {
        let key = (s.scheme, s.sigma, s.omega);
        match panels.iter_mut().find(|(k, _)| *k == key) {
            Some((_, v)) => v.push(s),
            None => panels.push((key, vec![s])),
        }
    }
    let mut paths = Vec::new();
    for ((scheme, sigma, omega), rows) in panels {
        let path = dir.join(plot_file_name(scheme, sigma, omega));
        let mut w = writer(&path)?;
        let err = |e| AppError::csv(&path, e);
        w.write_record(PLOT_HEADER).map_err(err)?;
        for s in rows {
            w.write_record([
                s.sample_size.to_string(),
                s.method.as_str().to_string(),
                fmt_f64(s.mean_snr),
                fmt_f64(s.std_snr),
            ])
            .map_err(err)?;
        }
        finish(&path, w)?;
        paths.push(path);
    }
    Ok(paths)
}

/// Paths produced by [`write_results`].
#[derive(Debug, Clone)]
pub struct OutputFiles {
    pub raw: PathBuf,
    pub summary: PathBuf,
    pub plots: Vec<PathBuf>,
}

/// Writes `raw.csv`, `summary.csv` and the plot panels into `dir`.
pub fn write_results(result: &ExperimentResult, dir: &Path) -> Result<OutputFiles, AppError> {
    fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))?;
    let raw = dir.join("raw.csv");
    let summary_path = dir.join("summary.csv");
    let summary = summarize(result);
    write_raw(&raw, result)?;
    write_summary(&summary_path, &summary)?;
    let plots = write_plot_data(dir, &summary)?;
    Ok(OutputFiles {
        raw,
        summary: summary_path,
        plots,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for x in [0.1, 1.0 / 3.0, -12.69, 1e-300, 300.0, 0.0] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_f64(f64::NAN), "");
        assert_eq!(fmt_f64(2.0), "2");
    }

    #[test]
    fn plot_names_are_stable() {
        assert_eq!(
            plot_file_name(Scheme::Uniform, 0.4, 3.0),
            "plot_uniform_sigma0.4_omega3.csv"
        );
    }
}
