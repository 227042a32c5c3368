//! Batch driver for uniform and adaptive goal-error studies.
//!
//! A run writes to its output directory:
//! - `convergence.csv` with the columns of [`CSV_HEADER`];
//! - `rates.txt` with least-squares log–log slopes against `ndof`;
//! - `err_vs_ndof.dat`, `est_abs_vs_ndof.dat`, `est_res_vs_ndof.dat`;
//! - `mesh_XX.txt` per level when meshes are requested.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::Parser;
use plategoal::adaptivity::{run_adaptive_with, AdaptiveConfig, LevelRecord, RefinementMode};
use plategoal::benchmarks::{Problem, ProblemId};
use plategoal::mesh::write_mesh;

/// Columns of `convergence.csv`, in order.
pub const CSV_HEADER: [&str; 13] = [
    "level",
    "ndof",
    "ntri",
    "Q_h",
    "e_goal",
    "eta_h",
    "eta_tilde",
    "eta_nc",
    "eta_abs",
    "eta_res",
    "eff_abs",
    "eff_res",
    "seconds",
];

/// Number of trailing levels used by the rate fits.
pub const RATE_WINDOW: usize = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Solver(#[from] plategoal::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Csv { line: usize, message: String },
    #[error("no column named `{0}`")]
    MissingColumn(String),
}

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Clone, Debug, PartialEq, Parser)]
#[command(
    name = "plategoal",
    version,
    about = "Goal-oriented adaptive C0 interior penalty runs for the clamped plate"
)]
pub struct RunConfig {
    /// Benchmark: example_1 (smooth square plate) or example_2 (L-shaped plate).
    #[arg(long)]
    pub problem: ProblemId,
    /// Refinement strategy: adaptive or uniform.
    #[arg(long, default_value = "adaptive")]
    pub mode: RefinementMode,
    /// Dörfler parameter in (0, 1).
    #[arg(long, default_value_t = 0.25)]
    pub theta: f64,
    /// Number of refinements.
    #[arg(long, default_value_t = 13)]
    pub levels: usize,
    /// Interior penalty parameter.
    #[arg(long, default_value_t = 20.0)]
    pub sigma: f64,
    /// Backward-error tolerance of the linear solves.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Write the mesh of every level.
    #[arg(long)]
    pub emit_meshes: bool,
    /// Fill the `seconds` column with wall-clock times.
    #[arg(long)]
    pub timing: bool,
    /// Divide the goal weight by the area of its region.
    #[arg(long)]
    pub normalized_goal: bool,
    /// Also compute the bound that keeps the data oscillation.
    #[arg(long)]
    pub full_bound: bool,
    /// Stop once the goal estimator drops below this value.
    #[arg(long)]
    pub stop_tol: Option<f64>,
}

impl RunConfig {
    pub fn adaptive_config(&self) -> AdaptiveConfig {
        AdaptiveConfig {
            theta: self.theta,
            levels: self.levels,
            sigma: self.sigma,
            mode: self.mode,
            tol: self.tol,
            stop_tol: self.stop_tol,
            full_bound: self.full_bound,
        }
    }

    pub fn problem(&self) -> Problem {
        Problem::with_normalization(self.problem, self.normalized_goal)
    }
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(io_error(path))
}

/// Runs the study and writes every output file.
pub fn run(config: &RunConfig) -> Result<Vec<LevelRecord>> {
    let adaptive = config.adaptive_config();
    adaptive.validate()?;
    std::fs::create_dir_all(&config.out).map_err(io_error(&config.out))?;
    let problem = config.problem();
    let records = run_adaptive_with(&problem, &adaptive, |state| {
        if config.emit_meshes {
            write_mesh(
                state.mesh,
                config.out.join(format!("mesh_{:02}.txt", state.record.level)),
            )?;
        }
        Ok(())
    })?;
    write_outputs(&config.out, &records, config.timing)?;
    Ok(records)
}

/// Writes the CSV table, the rates and the plot data.
pub fn write_outputs(dir: &Path, records: &[LevelRecord], timing: bool) -> Result<()> {
    write_file(&dir.join("convergence.csv"), &convergence_csv(records, timing))?;
    write_file(&dir.join("rates.txt"), &rates_text(records))?;
    emit_plot_data(records, dir)
}

fn float(v: f64) -> String {
    format!("{v:.16e}")
}

fn optional(v: Option<f64>) -> String {
    v.map(float).unwrap_or_default()
}

/// The convergence table. The `seconds` column stays empty unless `timing`
/// is set, keeping repeated runs byte-identical.
pub fn convergence_csv(records: &[LevelRecord], timing: bool) -> String {
    let mut out = CSV_HEADER.join(",");
    out.push('\n');
    for r in records {
        let g = &r.report;
        let row = [
            r.level.to_string(),
            r.n_dofs.to_string(),
            r.n_triangles.to_string(),
            float(g.q_h),
            optional(g.e_goal),
            float(g.eta_h),
            float(g.eta_tilde),
            float(g.eta_nc),
            float(g.eta_abs),
            float(g.eta_res),
            optional(g.effectivity_abs),
            optional(g.effectivity_res),
            if timing { float(r.seconds) } else { String::new() },
        ];
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Least-squares slope of `log y` against `log x` over the last `window`
/// pairs. `None` with fewer than two usable pairs or any non-positive value
/// in the window.
pub fn fit_slope(x: &[f64], y: &[f64], window: usize) -> Option<f64> {
    let n = x.len().min(y.len());
    let start = n.saturating_sub(window);
    let pairs: Vec<(f64, f64)> = x[start..n].iter().zip(&y[start..n]).map(|(a, b)| (*a, *b)).collect();
    if pairs.len() < 2 || pairs.iter().any(|&(a, b)| !(a > 0.0 && b > 0.0)) {
        return None;
    }
    let logs: Vec<(f64, f64)> = pairs.iter().map(|&(a, b)| (a.ln(), b.ln())).collect();
    let m = logs.len() as f64;
    let (mx, my) = logs
        .iter()
        .fold((0.0, 0.0), |(sx, sy), &(a, b)| (sx + a / m, sy + b / m));
    let sxx: f64 = logs.iter().map(|&(a, _)| (a - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|&(a, b)| (a - mx) * (b - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Quantities whose rates are reported, with their values per record.
fn rate_series(records: &[LevelRecord]) -> Vec<(&'static str, Vec<f64>)> {
    let col = |f: fn(&LevelRecord) -> f64| records.iter().map(f).collect::<Vec<_>>();
    vec![
        ("e_goal", col(|r| r.report.e_goal.unwrap_or(f64::NAN))),
        ("eta_abs", col(|r| r.report.eta_abs)),
        ("eta_res", col(|r| r.report.eta_res.abs())),
        ("eta_h", col(|r| r.report.eta_h)),
        ("eta_tilde", col(|r| r.report.eta_tilde)),
    ]
}

/// `name slope` lines, `nan` where no fit is possible.
pub fn rates_text(records: &[LevelRecord]) -> String {
    let ndof: Vec<f64> = records.iter().map(|r| r.n_dofs as f64).collect();
    let mut out = format!("# least-squares slope of log(value) vs log(ndof) over the last {RATE_WINDOW} levels\n");
    for (name, values) in rate_series(records) {
        let slope = fit_slope(&ndof, &values, RATE_WINDOW).map_or("nan".to_string(), float);
        writeln!(out, "{name} {slope}").expect("writing to a string");
    }
    out
}

fn plot_column(records: &[LevelRecord], value: impl Fn(&LevelRecord) -> Option<f64>) -> String {
    let mut out = String::new();
    for r in records {
        let v = value(r).filter(|v| *v > 0.0).map_or("nan".to_string(), float);
        writeln!(out, "{} {v}", r.n_dofs).expect("writing to a string");
    }
    out
}

/// Two-column `ndof value` files. Missing and non-positive values are
/// written as `nan`; the residual estimator is written in absolute value.
pub fn emit_plot_data(records: &[LevelRecord], dir: &Path) -> Result<()> {
    write_file(&dir.join("err_vs_ndof.dat"), &plot_column(records, |r| r.report.e_goal))?;
    write_file(
        &dir.join("est_abs_vs_ndof.dat"),
        &plot_column(records, |r| Some(r.report.eta_abs)),
    )?;
    write_file(
        &dir.join("est_res_vs_ndof.dat"),
        &plot_column(records, |r| Some(r.report.eta_res.abs())),
    )
}

/// A convergence table read back by column name.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceTable {
    header: Vec<String>,
    rows: Vec<Vec<Option<f64>>>,
}

impl ConvergenceTable {
    /// Parses comma-separated text with a header line. Empty cells are
    /// missing values.
    pub fn parse(text: &str) -> Result<ConvergenceTable> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let Some((_, head)) = lines.next() else {
            return Err(CliError::Csv {
                line: 1,
                message: "missing header".into(),
            });
        };
        let header: Vec<String> = head.split(',').map(|s| s.trim().to_string()).collect();
        for (k, name) in header.iter().enumerate() {
            if name.is_empty() || header[..k].contains(name) {
                return Err(CliError::Csv {
                    line: 1,
                    message: format!("bad column name `{name}`"),
                });
            }
        }
        let mut rows = Vec::new();
        for (i, line) in lines {
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != header.len() {
                return Err(CliError::Csv {
                    line: i + 1,
                    message: format!("expected {} fields, found {}", header.len(), cells.len()),
                });
            }
            let row = cells
                .iter()
                .map(|c| {
                    let c = c.trim();
                    if c.is_empty() {
                        Ok(None)
                    } else {
                        c.parse::<f64>().map(Some).map_err(|e| CliError::Csv {
                            line: i + 1,
                            message: format!("`{c}`: {e}"),
                        })
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        Ok(ConvergenceTable { header, rows })
    }

    pub fn read(path: &Path) -> Result<ConvergenceTable> {
        ConvergenceTable::parse(&std::fs::read_to_string(path).map_err(io_error(path))?)
    }

    pub fn header(&self) -> &[String] {
        &self.header
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn column(&self, name: &str) -> Result<Vec<Option<f64>>> {
        let k = self
            .header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::MissingColumn(name.to_string()))?;
        Ok(self.rows.iter().map(|r| r[k]).collect())
    }

    /// Slope of `name` against `ndof` over the last `window` rows.
    pub fn slope(&self, name: &str, window: usize) -> Result<Option<f64>> {
        let ndof = self.column("ndof")?;
        let y = self.column(name)?;
        let x: Vec<f64> = ndof.iter().map(|v| v.unwrap_or(f64::NAN)).collect();
        let y: Vec<f64> = y.iter().map(|v| v.map_or(f64::NAN, f64::abs)).collect();
        Ok(fit_slope(&x, &y, window))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_exact_power_law() {
        let x = [10.0, 40.0, 160.0, 640.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(-1.25)).collect();
        assert!((fit_slope(&x, &y, 3).unwrap() + 1.25).abs() < 1e-12);
        assert!(fit_slope(&x[..1], &y[..1], 3).is_none());
        assert!(fit_slope(&x, &[1.0, 0.0, 1.0, 1.0], 3).is_none());
        // The window only looks at the tail.
        assert!(fit_slope(&x, &[0.0, 4.0, 2.0, 1.0], 3).is_some());
    }

    #[test]
    fn table_round_trip_by_name() {
        let t = ConvergenceTable::parse("a,ndof,b\n1,10,\n2,20,5e-1\n").unwrap();
        assert_eq!(t.n_rows(), 2);
        assert_eq!(t.column("b").unwrap(), vec![None, Some(0.5)]);
        assert!(matches!(t.column("c"), Err(CliError::MissingColumn(_))));
        assert!(ConvergenceTable::parse("").is_err());
        assert!(ConvergenceTable::parse("a,a\n1,2\n").is_err());
        assert!(matches!(
            ConvergenceTable::parse("a,b\n1\n"),
            Err(CliError::Csv { line: 2, .. })
        ));
        assert!(ConvergenceTable::parse("a\nx\n").is_err());
    }

    #[test]
    fn empty_records_give_header_only() {
        let csv = convergence_csv(&[], false);
        assert_eq!(csv, format!("{}\n", CSV_HEADER.join(",")));
        let t = ConvergenceTable::parse(&csv).unwrap();
        assert_eq!(t.n_rows(), 0);
        assert!(rates_text(&[]).contains("e_goal nan"));
        assert_eq!(plot_column(&[], |_| Some(1.0)), "");
    }

    #[test]
    fn flags_parse() {
        let c = RunConfig::try_parse_from([
            "plategoal",
            "--problem",
            "example_2",
            "--mode",
            "uniform",
            "--levels",
            "3",
        ])
        .unwrap();
        assert_eq!(c.problem, ProblemId::Example2);
        assert_eq!(c.mode, RefinementMode::Uniform);
        assert_eq!(c.adaptive_config().levels, 3);
        assert_eq!(c.theta, 0.25);
        assert_eq!(c.sigma, 20.0);
        assert!(RunConfig::try_parse_from(["plategoal"]).is_err());
        assert!(RunConfig::try_parse_from(["plategoal", "--problem", "example_3"]).is_err());
        assert!(RunConfig::try_parse_from(["plategoal", "--problem", "example_1", "--theta", "x"]).is_err());
    }
}
