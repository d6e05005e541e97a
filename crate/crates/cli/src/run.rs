use std::fmt::Write as _;

use rayon::prelude::*;
use str_relay::decoy::{self, DecoyScenario, Protocol};
use str_relay::keyrate::{self, KeyRateReport, RateInputs};
use str_relay::relay::{self, BasisVector, ChainConfig};
use str_relay::verify;

use crate::error::CliError;
use crate::output::{format_number, Cell, Table};
use crate::scenario::{Intensity, Mode, Scenario};

/// Result of one run: the CSV table, a human-readable summary and whether
/// every check passed (always true outside `verify`).
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub table: Table,
    pub summary: String,
    pub passed: bool,
}

/// Validates the scenario and executes the pipeline for its mode on a
/// thread pool of `scenario.workers` threads.
pub fn run_scenario(scenario: &Scenario) -> Result<RunOutput, CliError> {
    scenario.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(scenario.workers)
        .build()
        .map_err(|e| CliError::field("workers", e.to_string()))?;
    pool.install(|| match scenario.mode {
        Mode::QubitRate => qubit_rate(scenario),
        Mode::Fig2Sweep => fig2_sweep(scenario),
        Mode::DecoySweep => decoy_sweep(scenario),
        Mode::Montecarlo => montecarlo(scenario),
        Mode::Verify => verify_mode(scenario),
    })
}

const REPORT_COLUMNS: [&str; 6] = ["rate", "unclamped", "entropy_term", "leak_term", "holevo_term", "tagged_term"];

fn report_cells(r: &KeyRateReport) -> Vec<Cell> {
    [r.rate, r.unclamped, r.entropy_term, r.leak_term, r.holevo_term, r.tagged_term]
        .into_iter()
        .map(Cell::from)
        .collect()
}

fn describe(r: &KeyRateReport) -> String {
    format!(
        "rate {} = entropy {} − leak {} − holevo {} − tagged {}",
        format_number(r.rate),
        format_number(r.entropy_term),
        format_number(r.leak_term),
        format_number(r.holevo_term),
        format_number(r.tagged_term),
    )
}

fn qubit_rate(s: &Scenario) -> Result<RunOutput, CliError> {
    let mut table = Table::new(["nodes", "e_link", "e_total"].into_iter().chain(REPORT_COLUMNS));
    let mut summary = String::new();
    for &m in &s.nodes {
        for e in s.e_link.points() {
            let e_total = relay::compound_error(e, m + 1)?;
            let inputs = RateInputs::constant(m, e_total).with_f_ec(s.f_ec).with_party_p_z(s.p_z);
            let r = keyrate::str_rate_qubit(&inputs, m)?;
            let mut row = vec![Cell::from(m), e.into(), e_total.into()];
            row.extend(report_cells(&r));
            table.push(row);
            let _ = writeln!(summary, "nodes {m}, e_link {}: {}", format_number(e), describe(&r));
        }
    }
    Ok(RunOutput {
        table,
        summary,
        passed: true,
    })
}

fn curve_name(m: usize) -> String {
    if m == 0 {
        String::from("rate_conventional")
    } else {
        format!("rate_str_{m}")
    }
}

fn fig2_sweep(s: &Scenario) -> Result<RunOutput, CliError> {
    let grid = s.e_link.points();
    let rows: Vec<Vec<f64>> = grid
        .par_iter()
        .map(|&e| {
            s.nodes
                .iter()
                .map(|&m| {
                    let r = if m == 0 {
                        keyrate::conventional_relay_rate(&[e, e], s.f_ec)
                    } else {
                        keyrate::str_rate_for_link_error(e, m, s.f_ec)
                    };
                    r.map(|r| r.rate)
                })
                .collect::<Result<Vec<f64>, _>>()
        })
        .collect::<Result<_, _>>()?;

    let mut table = Table::new(std::iter::once(String::from("e_link")).chain(s.nodes.iter().map(|&m| curve_name(m))));
    for (e, rates) in grid.iter().zip(&rows) {
        table.push(std::iter::once(*e).chain(rates.iter().copied()).map(Cell::from).collect());
    }

    let mut summary = format!("{} grid points, f_EC {}\n", grid.len(), format_number(s.f_ec));
    for &m in &s.nodes {
        match keyrate::zero_crossing(m, s.f_ec) {
            Some(e) => {
                let _ = writeln!(summary, "{}: zero rate at e_link = {}", curve_name(m), format_number(e));
            }
            None => {
                let _ = writeln!(summary, "{}: no zero crossing below 0.25", curve_name(m));
            }
        }
    }
    Ok(RunOutput {
        table,
        summary,
        passed: true,
    })
}

struct Curve {
    name: String,
    links: usize,
    protocol: Protocol,
}

fn decoy_curves(s: &Scenario) -> Vec<Curve> {
    let longest = s.nodes.iter().max().copied().unwrap_or(0) + 1;
    let mut curves = vec![Curve {
        name: String::from("conventional"),
        links: longest,
        protocol: Protocol::Conventional,
    }];
    curves.extend(s.nodes.iter().map(|&m| Curve {
        name: format!("str_{m}"),
        links: m + 1,
        protocol: Protocol::Str,
    }));
    curves
}

fn decoy_point(s: &Scenario, curve: &Curve, loss: f64) -> Result<(f64, KeyRateReport), CliError> {
    let scenario = DecoyScenario {
        links: s.link_physics(curve.links, loss, 0.5),
        f_ec: s.f_ec,
        p_z: s.p_z,
        efficient_sifting: s.efficient_sifting,
        tagging: s.tagging.into(),
        normalization: s.normalization.into(),
    };
    match s.mu {
        Intensity::Auto => {
            let opt = decoy::optimize_intensity(&scenario, curve.protocol, (s.mu_min, s.mu_max))?;
            Ok((opt.mu, opt.report))
        }
        Intensity::Fixed(mu) => Ok((mu, curve.protocol.rate(&scenario.with_mu(mu))?)),
    }
}

fn decoy_sweep(s: &Scenario) -> Result<RunOutput, CliError> {
    let grid = s.loss_db.points();
    let curves = decoy_curves(s);
    let points: Vec<Vec<(f64, KeyRateReport)>> = grid
        .par_iter()
        .map(|&loss| curves.iter().map(|c| decoy_point(s, c, loss)).collect())
        .collect::<Result<_, _>>()?;

    let mut columns = vec![String::from("loss_db")];
    for c in &curves {
        columns.push(format!("mu_{}", c.name));
        columns.push(format!("rate_{}", c.name));
    }
    let mut table = Table::new(columns);
    for (loss, row) in grid.iter().zip(&points) {
        let mut cells = vec![Cell::from(*loss)];
        for (mu, r) in row {
            cells.push(Cell::from(*mu));
            cells.push(Cell::from(r.rate));
        }
        table.push(cells);
    }

    let mut summary = format!(
        "{} loss points, f_EC {}, p_z {}, bits per clock cycle\n",
        grid.len(),
        format_number(s.f_ec),
        format_number(s.p_z)
    );
    for (k, c) in curves.iter().enumerate() {
        let (mu, first) = &points[0][k];
        let _ = writeln!(
            summary,
            "{} at {} dB (mu {}): {}",
            c.name,
            format_number(grid[0]),
            format_number(*mu),
            describe(first)
        );
        match grid.iter().zip(&points).find(|(_, row)| row[k].1.rate <= 0.0) {
            Some((loss, _)) => {
                let _ = writeln!(summary, "{}: first zero-rate loss {} dB", c.name, format_number(*loss));
            }
            None => {
                let _ = writeln!(summary, "{}: positive over the whole grid", c.name);
            }
        }
    }
    Ok(RunOutput {
        table,
        summary,
        passed: true,
    })
}

fn montecarlo(s: &Scenario) -> Result<RunOutput, CliError> {
    let nodes = s.nodes[0];
    let links = nodes + 1;
    let cfg = ChainConfig {
        nodes,
        p_z: s.p_z,
        rounds: s.rounds,
        flip: s.flip,
        detection: s.detection,
        seed: s.seed,
    };
    let sifted = relay::run_quantum_phase(&cfg)?;
    let (paired, ann) = relay::pair_and_announce(&sifted);
    let table_counts = relay::correct_and_estimate(&paired, &ann);
    let expected = relay::compound_error(s.flip, links)?;

    let mut table = Table::new(["basis", "samples", "errors", "error_rate", "expected_error_rate"]);
    for u in BasisVector::all(links) {
        let (errors, samples) = table_counts.counts(u);
        let rate = table_counts.rate(u).map_or(Cell::from(""), Cell::from);
        table.push(vec![u.label().into(), samples.into(), errors.into(), rate, expected.into()]);
    }

    let mut summary = format!(
        "survivors per link {:?}, paired {}\n",
        sifted.survivor_counts(),
        paired.len()
    );
    if let Some(link) = paired.empty_link {
        let _ = writeln!(summary, "link {link} produced no sifted events; no key");
    } else {
        let inputs = RateInputs::from_table(&table_counts)
            .with_f_ec(s.f_ec)
            .with_party_p_z(s.p_z)
            .with_key_entropy(relay::observed_key_entropy(&paired, links));
        let observed = keyrate::str_rate_qubit(&inputs, nodes)?;
        let analytic = keyrate::str_rate_qubit(
            &RateInputs::constant(nodes, expected).with_f_ec(s.f_ec).with_party_p_z(s.p_z),
            nodes,
        )?;
        let _ = writeln!(summary, "observed: {}", describe(&observed));
        let _ = writeln!(summary, "analytic: {}", describe(&analytic));
    }
    Ok(RunOutput {
        table,
        summary,
        passed: true,
    })
}

fn verify_mode(s: &Scenario) -> Result<RunOutput, CliError> {
    let report = verify::run_all(s.trials, s.seed);
    let mut table = Table::new(["suite", "check", "passed", "detail"]);
    let mut summary = String::new();
    for c in &report.checks {
        table.push(vec![c.suite.name().into(), c.name.into(), c.passed.into(), c.detail.clone().into()]);
        let _ = writeln!(
            summary,
            "[{}] {}: {} ({})",
            if c.passed { "PASS" } else { "FAIL" },
            c.suite.name(),
            c.name,
            c.detail
        );
    }
    let _ = writeln!(summary, "{} passed, {} failed", report.passed(), report.failed());
    Ok(RunOutput {
        table,
        summary,
        passed: report.all_passed(),
    })
}
