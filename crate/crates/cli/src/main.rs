use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::{error, info};
use str_relay_cli::scenario::{Normalization, Tagging};
use str_relay_cli::{emit_csv, run_scenario, version_line, CliError, Grid, Intensity, Mode, Scenario};

#[derive(Parser)]
#[command(name = "str-relay", version, about = "Simplified trusted relay simulations and key-rate sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML scenario file; flags given on the command line take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// CSV output path (default `<mode>.csv`).
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[arg(long)]
    workers: Option<usize>,
    /// Error-correction inefficiency.
    #[arg(long)]
    f_ec: Option<f64>,
    /// Probability that each party chooses the Z basis.
    #[arg(long)]
    p_z: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Asymptotic qubit key rate at one per-link error rate.
    QubitRate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',')]
        nodes: Option<Vec<usize>>,
        /// Per-link error rate, or a start:stop:step grid.
        #[arg(long)]
        e_link: Option<Grid>,
    },
    /// Key rate versus per-link error; node count 0 is the conventional relay.
    Fig2Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        e_link: Option<Grid>,
        #[arg(long, value_delimiter = ',')]
        nodes: Option<Vec<usize>>,
    },
    /// Weak-coherent-pulse key rate versus per-link loss.
    DecoySweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        loss_db: Option<Grid>,
        #[arg(long, value_delimiter = ',')]
        nodes: Option<Vec<usize>>,
        /// `auto` to optimise per loss point, or a fixed mean photon number.
        #[arg(long)]
        mu: Option<Intensity>,
        #[arg(long)]
        detector_efficiency: Option<f64>,
        #[arg(long)]
        dark_count_prob: Option<f64>,
        #[arg(long)]
        intrinsic_error: Option<f64>,
        #[arg(long, value_enum)]
        tagging: Option<TaggingArg>,
        #[arg(long, value_enum)]
        normalization: Option<NormalizationArg>,
        /// Asymptotically biased bases: sifting keeps every detection.
        #[arg(long)]
        efficient_sifting: bool,
    },
    /// Monte Carlo run of the relay protocol.
    Montecarlo {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        rounds: Option<u64>,
        /// Bit-flip probability per link.
        #[arg(long)]
        flip: Option<f64>,
        #[arg(long)]
        nodes: Option<usize>,
        /// Detection probability per link and round.
        #[arg(long)]
        detection: Option<f64>,
    },
    /// Invariant suites; exits nonzero if any check fails.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Runs the mode named in a scenario file.
    Run {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum TaggingArg {
    Exact,
    Conservative,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum NormalizationArg {
    Coincidence,
    Paired,
}

fn base_scenario(common: &Common, mode: Option<Mode>) -> Result<Scenario, CliError> {
    let mut s = match &common.config {
        Some(path) => Scenario::load(path)?,
        None => Scenario::default(),
    };
    if let Some(mode) = mode {
        s.mode = mode;
    }
    if common.config.is_none() && s.mode == Mode::DecoySweep {
        s.f_ec = 1.2;
    }
    if let Some(v) = &common.output {
        s.output = Some(v.clone());
    }
    set(&mut s.seed, common.seed);
    set(&mut s.workers, common.workers);
    set(&mut s.f_ec, common.f_ec);
    set(&mut s.p_z, common.p_z);
    Ok(s)
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn resolve(command: Command) -> Result<Scenario, CliError> {
    match command {
        Command::QubitRate { common, nodes, e_link } => {
            let mut s = base_scenario(&common, Some(Mode::QubitRate))?;
            set(&mut s.nodes, nodes);
            set(&mut s.e_link, e_link);
            Ok(s)
        }
        Command::Fig2Sweep { common, e_link, nodes } => {
            let mut s = base_scenario(&common, Some(Mode::Fig2Sweep))?;
            if common.config.is_none() {
                s.nodes = vec![0, 1, 2];
                s.e_link = "0:0.12:0.002".parse().expect("valid grid");
            }
            set(&mut s.nodes, nodes);
            set(&mut s.e_link, e_link);
            Ok(s)
        }
        Command::DecoySweep {
            common,
            loss_db,
            nodes,
            mu,
            detector_efficiency,
            dark_count_prob,
            intrinsic_error,
            tagging,
            normalization,
            efficient_sifting,
        } => {
            let mut s = base_scenario(&common, Some(Mode::DecoySweep))?;
            set(&mut s.loss_db, loss_db);
            set(&mut s.nodes, nodes);
            set(&mut s.mu, mu);
            set(&mut s.link.detector_efficiency, detector_efficiency);
            set(&mut s.link.dark_count_prob, dark_count_prob);
            set(&mut s.link.intrinsic_error, intrinsic_error);
            set(
                &mut s.tagging,
                tagging.map(|t| match t {
                    TaggingArg::Exact => Tagging::Exact,
                    TaggingArg::Conservative => Tagging::Conservative,
                }),
            );
            set(
                &mut s.normalization,
                normalization.map(|n| match n {
                    NormalizationArg::Coincidence => Normalization::Coincidence,
                    NormalizationArg::Paired => Normalization::Paired,
                }),
            );
            s.efficient_sifting |= efficient_sifting;
            Ok(s)
        }
        Command::Montecarlo {
            common,
            rounds,
            flip,
            nodes,
            detection,
        } => {
            let mut s = base_scenario(&common, Some(Mode::Montecarlo))?;
            set(&mut s.rounds, rounds);
            set(&mut s.flip, flip);
            set(&mut s.nodes, nodes.map(|m| vec![m]));
            set(&mut s.detection, detection);
            Ok(s)
        }
        Command::Verify { common, trials } => {
            let mut s = base_scenario(&common, Some(Mode::Verify))?;
            set(&mut s.trials, trials);
            Ok(s)
        }
        Command::Run { common } => {
            if common.config.is_none() {
                return Err(CliError::field("config", "`run` needs a scenario file"));
            }
            base_scenario(&common, None)
        }
    }
}

fn execute(command: Command) -> Result<bool, CliError> {
    let scenario = resolve(command)?;
    info!("{}", version_line());
    info!("seed {}", scenario.seed);
    info!("resolved config:\n{}", scenario.to_toml().trim_end());

    let out = run_scenario(&scenario)?;
    let path = scenario.output_path();
    emit_csv(&out.table, &path)?;
    print!("{}", out.summary);
    println!("wrote {} rows to {}", out.table.rows.len(), path.display());
    Ok(out.passed)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            error!("verification failed");
            ExitCode::from(1)
        }
        Err(e) => {
            error!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
