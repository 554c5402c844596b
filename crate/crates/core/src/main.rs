use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use chiang_ogw::analysis::{self, InvariantTable};
use chiang_ogw::cli_io::{
    format_value, render_table, CacheFile, CliConfig, OutputFormat, CACHE_ENV,
};
use chiang_ogw::open_gw::{BasicInvariants, Constraints, OpenConfig, OpenGw};
use chiang_ogw::rqc::{Basis, Rqc};
use chiang_ogw::{closed_gw::ClosedGw, ExactRational, GwError};

/// Exact open Gromov-Witten invariants of the Chiang Lagrangian in CP^3.
#[derive(Parser, Debug)]
#[command(name = "chiang-ogw", version)]
struct Cli {
    /// Plain-text cache file, read before and written after each command.
    #[arg(long, env = CACHE_ENV, global = true)]
    cache: Option<PathBuf>,
    /// Largest β used by tables and analyses.
    #[arg(long = "max-beta", default_value_t = 16, global = true)]
    max_beta: u32,
    #[arg(long, value_enum, default_value_t = OutputFormat::Text, global = true)]
    format: OutputFormat,
    /// Substitute value for OGW_{1,0}(Γ2); disables the cache.
    #[arg(long = "v", allow_hyphen_values = true)]
    v: Option<ExactRational>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// OGW_{β,k} with the given interior constraints.
    Invariant {
        #[arg(long)]
        beta: u32,
        #[arg(long, default_value_t = 0)]
        k: u32,
        #[arg(long, default_value_t = 0)]
        g0: u32,
        #[arg(long, default_value_t = 0)]
        g1: u32,
        #[arg(long, default_value_t = 0)]
        g2: u32,
        #[arg(long, default_value_t = 0)]
        g3: u32,
        #[arg(long, default_value_t = 0)]
        diamond: u32,
    },
    /// Boundary-only or interior invariant tables.
    Table {
        #[arg(value_enum)]
        kind: TableKind,
    },
    /// GW_d(Δ2^lines, Δ3^points) of CP^3.
    Closed {
        #[arg(long)]
        degree: u32,
        #[arg(long, default_value_t = 0)]
        lines: u32,
        #[arg(long, default_value_t = 0)]
        points: u32,
    },
    /// Relative quantum cohomology checks.
    Rqc {
        #[command(subcommand)]
        action: RqcAction,
    },
    /// Analyses over invariant tables.
    Analyze {
        #[command(subcommand)]
        action: AnalyzeAction,
    },
    /// Manage the cache file.
    Cache {
        #[command(subcommand)]
        action: CacheAction,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TableKind {
    /// Invariants with no interior constraints.
    Boundary,
    /// Invariants with interior constraints in Γ2, Γ3.
    Interior,
}

#[derive(Subcommand, Debug)]
enum RqcAction {
    /// Check the ring presentation.
    Verify,
    /// Check associativity and commutativity on basis elements.
    Assoc,
    /// Product of two basis elements (0, 1, 2, 3 or d).
    Multiply { left: Basis, right: Basis },
}

#[derive(Subcommand, Debug)]
enum AnalyzeAction {
    /// Prime factorization of table denominators.
    Denominators {
        #[arg(long, value_enum, default_value_t = TableKind::Boundary)]
        kind: TableKind,
    },
    /// Sign periodicity of the boundary invariants in β.
    Periodicity,
    /// Growth violations of |OGW| along the boundary table.
    Monotonicity,
    /// Effect of adding p·[P_R] to the real point class.
    PrShift {
        #[arg(long, allow_hyphen_values = true)]
        p: ExactRational,
        #[arg(long, value_enum, default_value_t = TableKind::Interior)]
        kind: TableKind,
    },
    /// Two independent readings of P_R from ring relations.
    PrCertificate,
    /// Rerun the boundary recursion with a substituted v.
    Override {
        #[arg(long = "v", allow_hyphen_values = true)]
        v: ExactRational,
        #[arg(long = "M", visible_alias = "m")]
        m: u32,
    },
    /// Heuristic scan over v = p / 2^t.
    SearchV {
        #[arg(long)]
        numerator_bound: i64,
        #[arg(long)]
        max_exponent: u32,
        #[arg(long = "M", visible_alias = "m")]
        m: u32,
    },
}

#[derive(Subcommand, Debug)]
enum CacheAction {
    /// Validate the cache file and report its size.
    Load,
    /// Compute both tables up to --max-beta and write the cache.
    Store,
    /// Delete the cache file.
    Clear,
}

enum Failure {
    Usage(String),
    Internal(String),
}

impl From<GwError> for Failure {
    fn from(e: GwError) -> Self {
        match e {
            GwError::InvalidArgument(_) => Failure::Usage(e.to_string()),
            _ => Failure::Internal(e.to_string()),
        }
    }
}

impl From<chiang_ogw::cli_io::CacheError> for Failure {
    fn from(e: chiang_ogw::cli_io::CacheError) -> Self {
        Failure::Internal(e.to_string())
    }
}

/// Printed text plus whether every verification in it passed.
struct Outcome {
    text: String,
    ok: bool,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Outcome { text, ok: true }
    }
}

fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report serializes") + "\n"
}

fn build_engine(config: &CliConfig) -> Result<OpenGw, Failure> {
    let basics = match &config.v {
        Some(v) => BasicInvariants {
            v102: v.clone(),
            ..BasicInvariants::default()
        },
        None => BasicInvariants::default(),
    };
    let gw = OpenGw::new(
        OpenConfig {
            basics,
            ..OpenConfig::default()
        },
        Arc::new(ClosedGw::new()),
    );
    if let Some(path) = config.effective_cache() {
        if path.exists() {
            CacheFile::read(path)?.apply(&gw);
        }
    }
    Ok(gw)
}

fn table(gw: &OpenGw, kind: TableKind, beta_max: u32) -> Result<InvariantTable, GwError> {
    match kind {
        TableKind::Boundary => analysis::boundary_table(gw, beta_max),
        TableKind::Interior => analysis::interior_table(gw, beta_max),
    }
}

fn run(cli: Cli) -> Result<Outcome, Failure> {
    let config = CliConfig {
        cache: cli.cache,
        beta_max: cli.max_beta,
        format: cli.format,
        v: cli.v,
    };
    config.validate().map_err(Failure::Usage)?;
    let format = config.format;
    let as_json = format == OutputFormat::Json;

    if let Command::Cache { action } = &cli.command {
        let path = config
            .effective_cache()
            .ok_or_else(|| {
                Failure::Usage(format!(
                    "no cache path (use --cache or {CACHE_ENV}) or --v is set"
                ))
            })?
            .to_owned();
        return match action {
            CacheAction::Load => {
                let cache = CacheFile::read(&path)?;
                Ok(Outcome::ok(format!(
                    "{}: {} open, {} closed entries\n",
                    path.display(),
                    cache.open.len(),
                    cache.closed.len()
                )))
            }
            CacheAction::Store => {
                let gw = build_engine(&config)?;
                table(&gw, TableKind::Boundary, config.beta_max)?;
                table(&gw, TableKind::Interior, config.beta_max)?;
                let cache = CacheFile::from_engines(&gw);
                cache.write(&path)?;
                Ok(Outcome::ok(format!(
                    "{}: wrote {} entries\n",
                    path.display(),
                    cache.len()
                )))
            }
            CacheAction::Clear => {
                if path.exists() {
                    std::fs::remove_file(&path)
                        .map_err(|e| Failure::Internal(format!("{}: {e}", path.display())))?;
                }
                Ok(Outcome::ok(format!("{}: cleared\n", path.display())))
            }
        };
    }

    let gw = build_engine(&config)?;
    let outcome = match cli.command {
        Command::Invariant {
            beta,
            k,
            g0,
            g1,
            g2,
            g3,
            diamond,
        } => {
            let value = gw.evaluate(beta, k, Constraints::new(g0, g1, g2, g3, diamond))?;
            if as_json {
                Outcome::ok(json(
                    &serde_json::json!({ "beta": beta, "k": k, "value": value }),
                ))
            } else {
                Outcome::ok(format_value(&value) + "\n")
            }
        }
        Command::Table { kind } => {
            Outcome::ok(render_table(&table(&gw, kind, config.beta_max)?, format))
        }
        Command::Closed {
            degree,
            lines,
            points,
        } => {
            let value = gw
                .closed()
                .closed_gw_counts(degree, [0, 0, lines, points])?;
            if as_json {
                Outcome::ok(json(
                    &serde_json::json!({ "degree": degree, "value": value }),
                ))
            } else {
                Outcome::ok(format_value(&value) + "\n")
            }
        }
        Command::Rqc { action } => run_rqc(&gw, action, as_json)?,
        Command::Analyze { action } => run_analyze(&gw, action, &config)?,
        Command::Cache { .. } => unreachable!("handled above"),
    };
    if let Some(path) = config.effective_cache() {
        CacheFile::from_engines(&gw).write(path)?;
    }
    Ok(outcome)
}

fn run_rqc(gw: &OpenGw, action: RqcAction, as_json: bool) -> Result<Outcome, Failure> {
    let rqc = Rqc::new(gw);
    Ok(match action {
        RqcAction::Verify => {
            let report = rqc.verify_presentation()?;
            let text = if as_json {
                json(&report)
            } else {
                let mut s = String::new();
                for r in &report.relations {
                    let status = if r.ok { "ok  " } else { "FAIL" };
                    writeln!(s, "{status} {}  residual: {}", r.relation, r.residual).unwrap();
                }
                s
            };
            Outcome {
                text,
                ok: report.ok,
            }
        }
        RqcAction::Assoc => {
            let report = rqc.associativity_check()?;
            let text = if as_json {
                json(&report)
            } else {
                let mut s = format!(
                    "associativity: {} triples, {} failures\ncommutativity: {} pairs, {} failures\n",
                    report.triples_checked,
                    report.associativity_failures.len(),
                    report.pairs_checked,
                    report.commutativity_failures.len()
                );
                for (a, b, c, r) in &report.associativity_failures {
                    writeln!(s, "  ({a} {b}) {c} - {a} ({b} {c}) = {r}").unwrap();
                }
                s
            };
            Outcome {
                text,
                ok: report.ok,
            }
        }
        RqcAction::Multiply { left, right } => {
            let product = rqc.basis_product(left, right)?;
            Outcome::ok(if as_json {
                json(&product)
            } else {
                format!("{product}\n")
            })
        }
    })
}

fn run_analyze(gw: &OpenGw, action: AnalyzeAction, config: &CliConfig) -> Result<Outcome, Failure> {
    let format = config.format;
    let as_json = format == OutputFormat::Json;
    let beta_max = config.beta_max;
    Ok(match action {
        AnalyzeAction::Denominators { kind } => {
            let report = analysis::denominator_audit(&table(gw, kind, beta_max)?);
            let text = if as_json {
                json(&report)
            } else {
                let mut s = String::new();
                for r in &report.rows {
                    writeln!(
                        s,
                        "{:>3} {:>3} {:>3} {:>2}  {}",
                        r.beta, r.k, r.l2, r.l3, r.factorization
                    )
                    .unwrap();
                }
                writeln!(
                    s,
                    "boundary rows power of 4: {}",
                    report.boundary_all_power_of_four
                )
                .unwrap();
                writeln!(s, "all rows power of 2: {}", report.all_power_of_two).unwrap();
                writeln!(s, "violations: {}", report.violations.len()).unwrap();
                for v in &report.violations {
                    writeln!(
                        s,
                        "  β={} k={} l2={} l3={}: {} (odd primes {})",
                        v.beta,
                        v.k,
                        v.l2,
                        v.l3,
                        v.factorization,
                        v.odd_primes.join(", ")
                    )
                    .unwrap();
                }
                s
            };
            Outcome {
                text,
                ok: report.violations.is_empty(),
            }
        }
        AnalyzeAction::Periodicity => {
            let report = analysis::sign_periodicity(&table(gw, TableKind::Boundary, beta_max)?);
            let text = if as_json {
                json(&report)
            } else {
                format!(
                    "checked {} pairs, skipped {:?}, mismatches {:?}\n",
                    report.checked.len(),
                    report.skipped,
                    report.mismatches
                )
            };
            Outcome {
                text,
                ok: report.ok,
            }
        }
        AnalyzeAction::Monotonicity => {
            let violations =
                analysis::monotonicity_violations(&table(gw, TableKind::Boundary, beta_max)?);
            let text = if as_json {
                json(&violations)
            } else {
                let list: Vec<String> = violations.iter().map(ToString::to_string).collect();
                format!("{}\n", list.join(" "))
            };
            Outcome::ok(text)
        }
        AnalyzeAction::PrShift { p, kind } => {
            let shifted = analysis::pr_shift(&table(gw, kind, beta_max)?, &p, gw.closed())?;
            Outcome::ok(render_table(&shifted, format))
        }
        AnalyzeAction::PrCertificate => {
            let cert = analysis::pr_certificate(gw)?;
            let text = if as_json {
                json(&cert)
            } else {
                format!(
                    "p with OGW'_{{4,0}}(Γ3,Γ3) = 0: {}\np with OGW'_{{4,0}}(Γ2,Γ2,Γ3) = 0: {}\nverdict: {}\n",
                    cert.p_from_g3_g3, cert.p_from_g2_g2_g3, cert.verdict
                )
            };
            Outcome::ok(text)
        }
        AnalyzeAction::Override { v, m } => {
            let report = analysis::override_check(&v, m, gw.closed().clone())?;
            let text = if as_json {
                json(&report)
            } else {
                let mut s = format!("v = {}, M = {}\n", report.v, report.m);
                for r in &report.rows {
                    let mark = if r.power_of_two {
                        "power of 2"
                    } else {
                        "odd primes"
                    };
                    writeln!(
                        s,
                        "k={} {} denominator {} ({mark}{})",
                        r.k,
                        analysis::scientific(&r.value, 3),
                        r.factorization,
                        if r.odd_primes.is_empty() {
                            String::new()
                        } else {
                            format!(": {}", r.odd_primes.join(", "))
                        }
                    )
                    .unwrap();
                }
                writeln!(s, "pass for k <= {}: {}", report.m, report.pass).unwrap();
                s
            };
            Outcome {
                text,
                ok: report.pass,
            }
        }
        AnalyzeAction::SearchV {
            numerator_bound,
            max_exponent,
            m,
        } => {
            let found = analysis::v_search(numerator_bound, max_exponent, m, gw.closed().clone())?;
            let text = if as_json {
                json(&found)
            } else {
                found.iter().map(|v| format!("{v}\n")).collect()
            };
            Outcome::ok(text)
        }
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    match run(cli) {
        Ok(outcome) => {
            print!("{}", outcome.text);
            if outcome.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
