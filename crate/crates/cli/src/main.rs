use std::process::ExitCode;

use clap::Parser;
use plategoal_cli::{run, RunConfig};

fn main() -> ExitCode {
    let config = match RunConfig::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(e) = config.adaptive_config().validate() {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    match run(&config) {
        Ok(records) => {
            if let Some(last) = records.last() {
                println!(
                    "{} {}: {} levels, ndof {}, Q_h {:.10e}, eta_abs {:.3e}",
                    config.problem,
                    config.mode,
                    records.len(),
                    last.n_dofs,
                    last.report.q_h,
                    last.report.eta_abs
                );
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
