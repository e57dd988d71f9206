//! coboundary: build, check and probe transfer functions for `f = g − g∘T`.
//!
//! Exit codes: 0 on success, 2 when the answer is a mathematical negative
//! (refuted triple, unbalanced input, failed audit), 1 on any error.

mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};
use coboundary::analysis::{
    default_n_table, gp_densify, gp_membership, kwapien_generate, log2_table, not_a_moment_generate, schmidt_profile_on,
    CounterexampleSpec, GrowthSequence,
};
use coboundary::scalar::{self, Scalar};
use coboundary::solver::{
    check_solvability, construct_bounded_on, construct_lp_solution, verify, BoundedOptions, SolutionCertificate, Verdict,
    DEFAULT_MAX_BRANCHES,
};
use coboundary::{IntervalSet, PiecewiseTranslation, StepFunction};
use num_bigint::BigInt;
use serde::Deserialize;
use serde_json::{json, Value};

use output::{Format, Outcome};

const MAX_BRANCHES_VAR: &str = "COBOUNDARY_MAX_BRANCHES";

#[derive(Parser)]
#[command(
    name = "coboundary",
    version,
    about = "Exact constructions for the coboundary equation f = g - g∘T on [0,1)",
    after_help = "All rationals are written num/den (a bare integer is also accepted).\n\
                  Exit status: 0 success, 2 negative verdict, 1 error.\n\
                  COBOUNDARY_MAX_BRANCHES caps the branches of any constructed map (default 1000000).\n\
                  \nEXAMPLES:\
                  \n  coboundary construct --f f.json --delta 1/4 --stages 3 --out cert.json\
                  \n  coboundary verify --f f.json --cert cert.json\
                  \n  coboundary schmidt --f f.json --t t.json --m 2 --n-max 50 --format csv"
)]
struct Cli {
    /// Write the result here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Bounded transfer function: ‖g‖∞ ≤ ‖f‖∞ + δ
    Construct {
        #[arg(long)]
        f: PathBuf,
        #[arg(long)]
        delta: String,
        #[arg(long, default_value_t = 3)]
        stages: usize,
        /// Run one more balanced stage instead of closing the last one exactly
        #[arg(long)]
        open_final: bool,
    },
    /// Transfer function in L^(p-1), band by band
    ConstructLp {
        #[arg(long)]
        f: PathBuf,
        #[arg(long)]
        p: u32,
        #[arg(long)]
        delta: String,
        #[arg(long, default_value_t = 2)]
        stages: usize,
    },
    /// Check f = g − g∘T exactly, or recheck a certificate
    Verify {
        #[arg(long)]
        f: PathBuf,
        #[arg(long, requires = "g", conflicts_with = "cert")]
        t: Option<PathBuf>,
        #[arg(long, requires = "t", conflicts_with = "cert")]
        g: Option<PathBuf>,
        /// Certificate, bare or as written by `construct`
        #[arg(long, required_unless_present = "t")]
        cert: Option<PathBuf>,
    },
    /// μ{|S_n f| ≤ M} for n = 1..=n_max
    Schmidt {
        #[arg(long)]
        f: PathBuf,
        #[arg(long)]
        t: PathBuf,
        /// Threshold M; repeat or comma-separate for several
        #[arg(long, required = true, value_delimiter = ',')]
        m: Vec<String>,
        #[arg(long)]
        n_max: u64,
        /// Normalize on this interval set instead of [0,1)
        #[arg(long)]
        on: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Membership of f in the generic class, row by row
    GpAudit {
        #[arg(long)]
        f: PathBuf,
        #[arg(long)]
        p: String,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        i_max: u64,
        /// Growth sequence as JSON; defaults to a_i = 2^(i!)
        #[arg(long)]
        growth: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// A generic-class function within ε of f in L^p
    GenGp {
        #[arg(long)]
        p: String,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        epsilon: String,
        /// Starting function (defaults to 0)
        #[arg(long)]
        f: Option<PathBuf>,
        #[arg(long)]
        growth: Option<PathBuf>,
    },
    /// Mean-nonzero function with every moment condition failing
    GenMoment {
        #[arg(long)]
        depth: u32,
        /// JSON list of ["y", "phi(y)"] pairs
        #[arg(long, conflicts_with = "log2_max_exp")]
        phi_table: Option<PathBuf>,
        /// Use φ = log₂ tabulated at 2^0..2^N
        #[arg(long, default_value_t = 1024)]
        log2_max_exp: u64,
    },
    /// Kwapień-type counterexample in L^p with no L^r transfer function
    GenKwapien {
        #[arg(long)]
        p: String,
        #[arg(long)]
        r: String,
        #[arg(long)]
        depth: u32,
        /// JSON list of integers N_k (defaults to 2^(24k))
        #[arg(long)]
        n_table: Option<PathBuf>,
    },
    /// Integral balance test
    Solvable {
        #[arg(long)]
        f: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(outcome) => ExitCode::from(outcome.code()),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: &Cli) -> Result<Outcome> {
    let (body, negative) = match &cli.command {
        Command::Construct {
            f,
            delta,
            stages,
            open_final,
        } => construct(&read_json(f, "--f")?, &rational(delta, "--delta")?, *stages, *open_final)?,
        Command::ConstructLp { f, p, delta, stages } => {
            let f: StepFunction = read_json(f, "--f")?;
            let s = construct_lp_solution(&f, *p, &rational(delta, "--delta")?, *stages, &options(true)?)
                .context("construct-lp")?;
            (output::json(&json!({ "certificate": s.certificate, "report": s.report }))?, false)
        }
        Command::Verify { f, t, g, cert } => {
            let f: StepFunction = read_json(f, "--f")?;
            match (t, g, cert) {
                (Some(t), Some(g), _) => verify_triple(&f, &read_json(t, "--t")?, &read_json(g, "--g")?)?,
                (_, _, Some(c)) => verify_certificate(&f, c)?,
                _ => bail!("verify needs --t and --g, or --cert"),
            }
        }
        Command::Schmidt {
            f,
            t,
            m,
            n_max,
            on,
            format,
        } => {
            let on = match on {
                Some(p) => read_json(p, "--on")?,
                None => IntervalSet::unit(),
            };
            let thresholds = m.iter().map(|s| rational(s, "--m")).collect::<Result<Vec<_>>>()?;
            let body = schmidt(&read_json(f, "--f")?, &read_json(t, "--t")?, &thresholds, *n_max, &on, *format)?;
            (body, false)
        }
        Command::GpAudit {
            f,
            p,
            n,
            i_max,
            growth: g,
            format,
        } => {
            let f: StepFunction = read_json(f, "--f")?;
            let m = gp_membership(&f, &rational(p, "--p")?, *n, &growth(g.as_deref())?, *i_max).context("gp-audit")?;
            let body = match format {
                Format::Json => output::json(&m)?,
                Format::Csv => output::csv(&m.rows)?,
            };
            (body, m.witness.is_none())
        }
        Command::GenGp {
            p,
            n,
            epsilon,
            f,
            growth: g,
        } => {
            let f = match f {
                Some(path) => read_json(path, "--f")?,
                None => StepFunction::zero(),
            };
            let s = gp_densify(&f, &rational(p, "--p")?, *n, &rational(epsilon, "--epsilon")?, &growth(g.as_deref())?)
                .context("gen-gp")?;
            audit(&s)?
        }
        Command::GenMoment {
            depth,
            phi_table,
            log2_max_exp,
        } => {
            let table = match phi_table {
                Some(path) => {
                    let raw: Vec<(String, String)> = read_json(path, "--phi-table")?;
                    raw.iter()
                        .map(|(y, v)| Ok((rational(y, "--phi-table")?, rational(v, "--phi-table")?)))
                        .collect::<Result<Vec<_>>>()?
                }
                None => log2_table(*log2_max_exp),
            };
            audit(&not_a_moment_generate(&table, *depth).context("gen-moment")?)?
        }
        Command::GenKwapien { p, r, depth, n_table } => {
            let table = match n_table {
                Some(path) => {
                    let raw: Vec<String> = read_json(path, "--n-table")?;
                    raw.iter()
                        .map(|s| s.trim().parse::<BigInt>().map_err(|_| anyhow!("--n-table: `{s}` is not an integer")))
                        .collect::<Result<Vec<_>>>()?
                }
                None => default_n_table(*depth),
            };
            let s = kwapien_generate(&rational(p, "--p")?, &rational(r, "--r")?, &table, *depth).context("gen-kwapien")?;
            audit(&s)?
        }
        Command::Solvable { f } => {
            let s = check_solvability(&read_json(f, "--f")?);
            (output::json(&s)?, s.verdict == Verdict::Unbalanced)
        }
    };
    output::emit(&body, cli.out.as_deref())?;
    Ok(if negative { Outcome::Negative } else { Outcome::Success })
}

fn rational(s: &str, flag: &str) -> Result<Scalar> {
    scalar::parse(s).with_context(|| format!("{flag}: `{s}`"))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path, flag: &str) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("{flag}: cannot read {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("{flag}: cannot parse {}", path.display()))
}

fn growth(path: Option<&Path>) -> Result<GrowthSequence> {
    match path {
        Some(p) => read_json(p, "--growth"),
        None => Ok(GrowthSequence::Factorial2Exp),
    }
}

fn max_branches() -> Result<usize> {
    match std::env::var(MAX_BRANCHES_VAR) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| anyhow!("{MAX_BRANCHES_VAR}: `{v}` is not a positive integer")),
        Err(_) => Ok(DEFAULT_MAX_BRANCHES),
    }
}

fn options(exact_final: bool) -> Result<BoundedOptions> {
    Ok(BoundedOptions {
        exact_final,
        max_branches: max_branches()?,
    })
}

fn construct(f: &StepFunction, delta: &Scalar, stages: usize, open_final: bool) -> Result<(String, bool)> {
    let s = construct_bounded_on(f, &IntervalSet::unit(), delta, stages, &options(!open_final)?).context("construct")?;
    let sup_f = f.sup_norm();
    let summary: Vec<Value> = s
        .stages
        .iter()
        .map(|st| {
            let audits: Vec<_> = st.towers.iter().map(|t| t.audit(f)).collect();
            let running = audits.iter().map(|a| a.max_abs_running_sum.clone()).max().unwrap_or_default();
            let full = audits.iter().map(|a| a.max_abs_full_sum.clone()).max().unwrap_or_default();
            json!({
                "stage": st.stage_index,
                "epsilon": scalar::format(&st.epsilon),
                "beta": scalar::format(&st.residual_measure_bound),
                "residual_measure": scalar::format(&st.residual.measure()),
                "branches": st.transformation.branch_count(),
                "tower_heights": st.towers.iter().map(|t| t.height()).collect::<Vec<_>>(),
                "max_abs_running_sum": scalar::format(&running),
                "max_abs_full_sum": scalar::format(&full),
                "tub": audits.iter().all(|a| a.is_tub(&sup_f, &st.epsilon)),
            })
        })
        .collect();
    let body = json!({
        "certificate": s.certificate,
        "beta_sum": scalar::format(&s.beta_sum()),
        "stages": summary,
    });
    Ok((output::json(&body)?, false))
}

fn verify_triple(f: &StepFunction, t: &PiecewiseTranslation, g: &StepFunction) -> Result<(String, bool)> {
    let v = verify(f, t, g).context("verify")?;
    let refuted = v.refuted();
    let body = json!({
        "holds": !refuted,
        "witness": v.witness,
        "witness_measure": scalar::format(&v.witness.measure()),
        "certificate": v.certificate,
    });
    Ok((output::json(&body)?, refuted))
}

/// Accepts a bare certificate or any object carrying one under `certificate`.
fn verify_certificate(f: &StepFunction, path: &Path) -> Result<(String, bool)> {
    let raw: Value = read_json(path, "--cert")?;
    let inner = raw.get("certificate").cloned().unwrap_or(raw);
    let cert: SolutionCertificate = serde_json::from_value(inner).with_context(|| format!("--cert: {}", path.display()))?;
    if &cert.f != f {
        bail!("--cert: certificate was issued for a different f");
    }
    let recomputed = verify(&cert.f, &cert.transformation, &cert.transfer).context("verify")?;
    let ok = cert.recheck().context("verify")?;
    let body = json!({
        "holds": ok,
        "exact_measure": scalar::format(&cert.exact_measure),
        "recomputed_exact_measure": scalar::format(&recomputed.certificate.exact_measure),
        "witness": cert.exact_set.difference(&recomputed.certificate.exact_set),
    });
    Ok((output::json(&body)?, !ok))
}

#[derive(serde::Serialize)]
struct SchmidtRow {
    n: u64,
    threshold: String,
    measure_le: String,
}

fn schmidt(
    f: &StepFunction,
    t: &PiecewiseTranslation,
    thresholds: &[Scalar],
    n_max: u64,
    on: &IntervalSet,
    format: Format,
) -> Result<String> {
    let mut rows = Vec::new();
    let mut statistics = Vec::new();
    for m in thresholds {
        let profile = schmidt_profile_on(f, t, m, n_max, on).context("schmidt")?;
        let min = profile.iter().map(|(_, v)| v.clone()).min().unwrap_or_else(scalar::one);
        statistics.push(json!({ "threshold": scalar::format(m), "statistic": scalar::format(&min) }));
        rows.extend(profile.into_iter().map(|(n, v)| SchmidtRow {
            n,
            threshold: scalar::format(m),
            measure_le: scalar::format(&v),
        }));
    }
    rows.sort_by_key(|r| r.n);
    match format {
        Format::Csv => output::csv(&rows),
        Format::Json => output::json(&json!({ "statistics": statistics, "rows": rows })),
    }
}

fn audit(s: &CounterexampleSpec) -> Result<(String, bool)> {
    for e in s.audit.iter().filter(|e| !e.pass) {
        eprintln!("audit failed: {} = {}", e.id, e.value);
    }
    Ok((output::json(s)?, !s.all_pass()))
}
