//! Command-line front end for `ordgap`.
//!
//! Exit status: 0 on success, 1 on a computation error, 2 on a usage error,
//! 3 when `check` finds a failing verdict.

pub mod args;
pub mod report;

use std::fs::File;
use std::io::{BufWriter, Write};

use clap::Parser;
use ordgap::approx::{fit_approx_constant, quantile_hazard_approx};
use ordgap::dist::{builtin_names, make_builtin};
use ordgap::gaps::{gap_expectation, r_continuous, r_direct, r_stieltjes};
use ordgap::mc::mc_gap;
use ordgap::monotone::{check_all, strictness_check, CheckOutcome, StrictnessReport};
use ordgap::{
    ApproxFit, ApproxResult, DistributionSpec, Error, GapSequence, IhrVerdict, MCEstimate, Method,
    MonotonicityReport, Probe, Result,
};
use serde::Serialize;

use args::{Cli, Command, CommandKind, OutputArgs, OutputFormat, ProbeArgs, RunConfig};
use report::{fmt_f64, gap_rows_csv, write_csv, write_json, GapRow, GAPS_HEADER};

pub use report::{parse_gaps_csv, rows_to_sequence};

pub const EXIT_OK: i32 = 0;
pub const EXIT_COMPUTE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CHECK_FAILED: i32 = 3;

const GRAMMAR: &str = "usage: ordgap <gaps|check|mc|approx|dist-list|dist-probe> --dist <spec> \
[--n A..B] [--k K] [--method m1,m2] [--u X.Y] [--samples N] [--seed S] [--shards C] \
[--max-order K] [--rel-tol T] [--tail-mass D] [--out csv|json] [--output PATH]";

/// Runs the command line `args` (including the program name).
pub fn run<I, T, O, E>(args: I, stdout: &mut O, stderr: &mut E) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
    O: Write,
    E: Write,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{}", e.render());
                    EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{}", e.render());
                    EXIT_USAGE
                }
            };
        }
    };
    match dispatch(cli.command, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            match e {
                Error::Parse(_) | Error::InvalidArgument(_) => {
                    let _ = writeln!(stderr, "{GRAMMAR}");
                    EXIT_USAGE
                }
                _ => EXIT_COMPUTE,
            }
        }
    }
}

fn dispatch<O: Write>(command: Command, stdout: &mut O) -> Result<i32> {
    match command {
        Command::Gaps(a) => cmd_gaps(&RunConfig::from_args(CommandKind::Gaps, &a)?, stdout),
        Command::Check(a) => cmd_check(&RunConfig::from_args(CommandKind::Check, &a)?, stdout),
        Command::Mc(a) => cmd_mc(&RunConfig::from_args(CommandKind::Mc, &a)?, stdout),
        Command::Approx(a) => cmd_approx(&RunConfig::from_args(CommandKind::Approx, &a)?, stdout),
        Command::DistList(o) => cmd_dist_list(&o, stdout),
        Command::DistProbe(p) => cmd_dist_probe(&p, stdout),
    }
}

/// Sends the report to `--output` or stdout.
fn emit<O: Write>(
    path: &Option<std::path::PathBuf>,
    stdout: &mut O,
    body: impl FnOnce(&mut dyn Write) -> Result<()>,
) -> Result<()> {
    match path {
        Some(p) => {
            let f = File::create(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
            let mut w = BufWriter::new(f);
            body(&mut w)?;
            w.flush().map_err(|e| Error::Io(e.to_string()))
        }
        None => body(stdout),
    }
}

fn load(cfg: &RunConfig) -> Result<DistributionSpec> {
    make_builtin(&cfg.dist_spec)
}

#[derive(Serialize)]
struct GapsReport<'a> {
    dist: &'a str,
    k: Option<u64>,
    rows: &'a [GapRow],
}

#[derive(Serialize)]
struct ContinuousReport<'a> {
    dist: &'a str,
    u: f64,
    value: f64,
    err_estimate: f64,
}

fn mc_row(d: &DistributionSpec, n: u64, k: u64, cfg: &RunConfig) -> Result<MCEstimate> {
    mc_gap(d, n, k, cfg.mc.samples, cfg.mc.seed, cfg.mc.shards)
}

fn gap_row(d: &DistributionSpec, n: u64, method: Method, cfg: &RunConfig) -> Result<GapRow> {
    let q = &cfg.quadrature;
    let (value, err_estimate) = match (method, cfg.k) {
        (Method::Direct, None) => {
            let g = r_direct(d, n, q)?;
            (g.value, g.err_estimate)
        }
        (Method::Direct, Some(k)) => {
            let g = gap_expectation(d, n, k, q)?;
            (g.value, g.err_estimate)
        }
        (Method::Stieltjes, None) => {
            let g = r_stieltjes(d, n, q)?;
            (g.value, g.err_estimate)
        }
        (Method::Continuous, None) => {
            let g = r_continuous(d, n as f64, q)?;
            (g.value, g.err_estimate)
        }
        (Method::Mc, k) => {
            let e = mc_row(d, n, k.unwrap_or(n.saturating_sub(1)), cfg)?;
            (e.mean, e.stderr)
        }
        (m, Some(_)) => {
            return Err(Error::InvalidArgument(format!(
                "--k is supported by direct and mc only, not {m}"
            )))
        }
    };
    Ok(GapRow {
        n,
        method,
        value,
        err_estimate,
    })
}

fn cmd_gaps<O: Write>(cfg: &RunConfig, stdout: &mut O) -> Result<i32> {
    let d = load(cfg)?;
    if let Some(u) = cfg.u {
        let g = r_continuous(&d, u, &cfg.quadrature)?;
        emit(&cfg.output_path, stdout, |w| match cfg.output {
            OutputFormat::Csv => write_csv(
                w,
                &["u", "method", "value", "err_estimate"],
                &[vec![
                    fmt_f64(u),
                    Method::Continuous.to_string(),
                    fmt_f64(g.value),
                    fmt_f64(g.err_estimate),
                ]],
            ),
            OutputFormat::Json => write_json(
                w,
                &ContinuousReport {
                    dist: d.name(),
                    u,
                    value: g.value,
                    err_estimate: g.err_estimate,
                },
            ),
        })?;
        return Ok(EXIT_OK);
    }
    let mut rows = Vec::new();
    for n in cfg.n_range.clone() {
        for &m in &cfg.methods {
            rows.push(gap_row(&d, n, m, cfg)?);
        }
    }
    emit(&cfg.output_path, stdout, |w| match cfg.output {
        OutputFormat::Csv => write_csv(w, GAPS_HEADER, &gap_rows_csv(&rows)),
        OutputFormat::Json => write_json(
            w,
            &GapsReport {
                dist: d.name(),
                k: cfg.k,
                rows: &rows,
            },
        ),
    })?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct CheckReport<'a> {
    dist: &'a str,
    method: Method,
    ihr: Option<IhrVerdict>,
    report: &'a MonotonicityReport,
    strictness: StrictnessReport,
    any_fail: bool,
}

fn outcome_row(name: &str, c: &CheckOutcome, detail: String) -> Vec<String> {
    vec![
        name.to_string(),
        format!("{:?}", c.verdict).to_lowercase(),
        fmt_f64(c.worst_margin),
        fmt_f64(c.floor),
        c.worst_n.map_or(String::new(), |n| n.to_string()),
        detail,
    ]
}

fn cmd_check<O: Write>(cfg: &RunConfig, stdout: &mut O) -> Result<i32> {
    let d = load(cfg)?;
    let method = cfg.methods[0];
    let mut rows = Vec::new();
    for n in cfg.n_range.clone() {
        rows.push(gap_row(&d, n, method, cfg)?);
    }
    let seq = rows_to_sequence(&rows, method)?;
    let report = check_all(&seq, cfg.max_order.min(seq.len() - 1));
    let strictness = strictness_check(
        &seq,
        d.is_shifted_exponential(),
        d.is_truncated_exponential(),
    );
    let ihr = d.ihr_verdict().ok();
    let any_fail = report.any_fail();

    emit(&cfg.output_path, stdout, |w| match cfg.output {
        OutputFormat::Json => write_json(
            w,
            &CheckReport {
                dist: d.name(),
                method,
                ihr,
                report: &report,
                strictness,
                any_fail,
            },
        ),
        OutputFormat::Csv => {
            let witness = report.decrease_witness.map_or(String::new(), |w| {
                format!(
                    "R_{}={} > R_{}={}",
                    w.n + 1,
                    fmt_f64(w.r_next),
                    w.n,
                    fmt_f64(w.r_n)
                )
            });
            let mut out = vec![
                outcome_row("decreasing", &report.decreasing, witness),
                outcome_row(
                    "difference_monotone",
                    &report.difference_monotone,
                    String::new(),
                ),
                outcome_row("ratio_monotone", &report.ratio_monotone, String::new()),
                outcome_row("log_convex", &report.log_convex, String::new()),
            ];
            for o in &report.cm_orders {
                out.push(vec![
                    format!("cm_order_{}", o.order),
                    format!("{:?}", o.verdict).to_lowercase(),
                    fmt_f64(o.worst_margin),
                    fmt_f64(o.floor),
                    o.worst_n.map_or(String::new(), |n| n.to_string()),
                    String::new(),
                ]);
            }
            out.push(vec![
                "completely_monotone_to_order".into(),
                report
                    .completely_monotone_to_order
                    .map_or("none".into(), |k| k.to_string()),
                String::new(),
                String::new(),
                String::new(),
                if report.exploratory {
                    "exploratory".into()
                } else {
                    String::new()
                },
            ]);
            write_csv(
                w,
                &[
                    "check",
                    "verdict",
                    "worst_margin",
                    "floor",
                    "worst_n",
                    "detail",
                ],
                &out,
            )
        }
    })?;
    Ok(if any_fail { EXIT_CHECK_FAILED } else { EXIT_OK })
}

#[derive(Serialize)]
struct McRow {
    n: u64,
    k: u64,
    #[serde(flatten)]
    estimate: MCEstimate,
}

fn cmd_mc<O: Write>(cfg: &RunConfig, stdout: &mut O) -> Result<i32> {
    let d = load(cfg)?;
    let mut rows = Vec::new();
    for n in cfg.n_range.clone() {
        let k = cfg.k.unwrap_or(n.saturating_sub(1));
        rows.push(McRow {
            n,
            k,
            estimate: mc_row(&d, n, k, cfg)?,
        });
    }
    emit(&cfg.output_path, stdout, |w| match cfg.output {
        OutputFormat::Json => write_json(w, &rows),
        OutputFormat::Csv => write_csv(
            w,
            &["n", "k", "mean", "stderr", "samples", "seed", "shards"],
            &rows
                .iter()
                .map(|r| {
                    vec![
                        r.n.to_string(),
                        r.k.to_string(),
                        fmt_f64(r.estimate.mean),
                        fmt_f64(r.estimate.stderr),
                        r.estimate.samples.to_string(),
                        r.estimate.seed.to_string(),
                        r.estimate.shards.to_string(),
                    ]
                })
                .collect::<Vec<_>>(),
        ),
    })?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct ApproxReport<'a> {
    dist: &'a str,
    rows: &'a [ApproxResult],
    /// `max |R_n − μ(x_n)| / ε`, for the oscillating family.
    fit: Option<ApproxFit>,
}

/// `eps` of an `oscexp:` specification.
fn oscillation_eps(spec: &str) -> Option<f64> {
    let rest = spec.trim().strip_prefix("oscexp:")?;
    rest.split(',')
        .filter_map(|kv| kv.split_once('='))
        .find(|(k, _)| k.trim() == "eps")
        .and_then(|(_, v)| v.trim().parse().ok())
}

fn cmd_approx<O: Write>(cfg: &RunConfig, stdout: &mut O) -> Result<i32> {
    let d = load(cfg)?;
    let rows = cfg
        .n_range
        .clone()
        .map(|n| quantile_hazard_approx(&d, n, &cfg.quadrature))
        .collect::<Result<Vec<_>>>()?;
    let fit = match oscillation_eps(&cfg.dist_spec) {
        Some(eps) => Some(fit_approx_constant(
            &d,
            eps,
            cfg.n_range.clone(),
            &cfg.quadrature,
        )?),
        None => None,
    };
    emit(&cfg.output_path, stdout, |w| match cfg.output {
        OutputFormat::Json => write_json(
            w,
            &ApproxReport {
                dist: d.name(),
                rows: &rows,
                fit,
            },
        ),
        OutputFormat::Csv => write_csv(
            w,
            &[
                "n",
                "x_n",
                "inv_hazard_at_xn",
                "r_quadrature",
                "r_err_estimate",
                "abs_gap",
            ],
            &rows
                .iter()
                .map(|r| {
                    vec![
                        r.n.to_string(),
                        fmt_f64(r.x_n),
                        fmt_f64(r.inv_hazard_at_xn),
                        fmt_f64(r.r_quadrature),
                        fmt_f64(r.r_err_estimate),
                        fmt_f64(r.abs_gap),
                    ]
                })
                .collect::<Vec<_>>(),
        ),
    })?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct NameRow {
    name: &'static str,
    parameters: &'static str,
}

fn cmd_dist_list<O: Write>(o: &OutputArgs, stdout: &mut O) -> Result<i32> {
    let rows: Vec<NameRow> = builtin_names()
        .iter()
        .map(|&(name, parameters)| NameRow { name, parameters })
        .collect();
    emit(&o.output, stdout, |w| match o.out {
        OutputFormat::Json => write_json(w, &rows),
        OutputFormat::Csv => write_csv(
            w,
            &["name", "parameters"],
            &rows
                .iter()
                .map(|r| vec![r.name.to_string(), r.parameters.to_string()])
                .collect::<Vec<_>>(),
        ),
    })?;
    Ok(EXIT_OK)
}

fn cmd_dist_probe<O: Write>(p: &ProbeArgs, stdout: &mut O) -> Result<i32> {
    let d = make_builtin(&p.dist)?;
    let xs =
        p.x.split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("bad --x value {s:?}")))
            })
            .collect::<Result<Vec<f64>>>()?;
    let probes: Vec<Probe> = xs.iter().map(|&x| d.probe(x)).collect();
    emit(&p.output.output, stdout, |w| match p.output.out {
        OutputFormat::Json => write_json(w, &probes),
        OutputFormat::Csv => write_csv(
            w,
            &[
                "x",
                "cdf",
                "survival",
                "log_survival",
                "hazard",
                "inverse_hazard",
                "in_support",
            ],
            &probes
                .iter()
                .map(|q| {
                    vec![
                        fmt_f64(q.x),
                        fmt_f64(q.cdf),
                        fmt_f64(q.survival),
                        fmt_f64(q.log_survival),
                        fmt_f64(q.hazard),
                        fmt_f64(q.inverse_hazard),
                        q.in_support.to_string(),
                    ]
                })
                .collect::<Vec<_>>(),
        ),
    })?;
    Ok(EXIT_OK)
}

/// A gap sequence read back from a `gaps` CSV report.
pub fn sequence_from_csv(text: &str, method: Method) -> Result<GapSequence> {
    rows_to_sequence(&parse_gaps_csv(text)?, method)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eps_extraction() {
        assert_eq!(oscillation_eps("oscexp:eps=0.5,base=2"), Some(0.5));
        assert_eq!(oscillation_eps("oscexp:base=2, eps = 0.1"), Some(0.1));
        assert_eq!(oscillation_eps("exp:lambda=1"), None);
    }
}
