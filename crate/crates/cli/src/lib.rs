//! Scenario configuration, sweep orchestration and CSV output for the
//! `str-relay` command-line tool.

pub mod error;
pub mod output;
mod run;
pub mod scenario;

pub use error::CliError;
pub use output::{emit_csv, write_csv, Cell, Table};
pub use run::{run_scenario, RunOutput};
pub use scenario::{Grid, Intensity, Mode, Scenario};

/// Name and version printed at the start of every run.
pub fn version_line() -> String {
    format!(
        "{} {} (library {})",
        env!("CARGO_PKG_NAME"),
        env!("CARGO_PKG_VERSION"),
        str_relay::VERSION
    )
}
