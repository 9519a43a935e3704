//! The `kacrice` command line.
//!
//! Results go to stdout as `key=value` lines. Exit code 0 on success, 2 on bad input,
//! 3 on a numerical failure.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use kacrice::geometry::Geometry;
use kacrice::io::{read_matrix, read_vector, PenaltyConfig};
use kacrice::{analyze, Covariance, GroupSpec, NuclearOp, NuclearSpec, PenaltySpec, Problem, Response};
use nalgebra::DMatrix;

use crate::config::ScenarioConfig;
use crate::error::{HarnessError, Result};
use crate::noise::Noise;
use crate::scenario::{find_scenario, Scenario};
use crate::stats::ks_uniform;
use crate::study::{coverage_experiment_with_threads, sample_pvalues_with_threads, thread_count, StudyResult};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "kacrice", version, about = "Exact Kac-Rice p-values for the global null in penalized regression")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Global-null p-value for one data set.
    Pivot(ProblemArgs),
    /// Truncation limits from the iterative solver next to the closed forms.
    Vbounds {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Monte Carlo p-values for a catalog scenario or scenario file.
    Simulate(SimArgs),
    /// Selection interval for the mean at the maximizer.
    Interval {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long, default_value_t = 0.1)]
        alpha: f64,
    },
    /// Coverage of selection intervals over simulated replicates.
    Coverage {
        #[command(flatten)]
        sim: SimArgs,
        #[arg(long, default_value_t = 0.1)]
        alpha: f64,
        /// Size of a 1-sparse true coefficient vector (default: global null).
        #[arg(long)]
        signal: Option<f64>,
        #[arg(long, default_value_t = 0)]
        signal_index: usize,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PenaltyKind {
    Lasso,
    Group,
    Nuclear,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OpKind {
    Identity,
    Mask,
    Matmul,
}

#[derive(Debug, Args)]
struct ProblemArgs {
    #[arg(long, value_enum, required_unless_present = "config")]
    penalty: Option<PenaltyKind>,
    /// Penalty config in TOML; replaces --penalty, --groups, --weights, --op and --mask-file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Design matrix (lasso, group, matmul operator).
    #[arg(long, alias = "design-file")]
    design: Option<PathBuf>,
    /// Response vector, or response matrix for nuclear problems.
    #[arg(long)]
    response: PathBuf,
    /// Covariance: `I`, a scalar `s` meaning `s·I`, or a matrix file.
    #[arg(long, default_value = "I")]
    sigma: String,
    /// One line per group listing its 0-based column indices.
    #[arg(long)]
    groups: Option<PathBuf>,
    /// One weight per group (default all 1).
    #[arg(long)]
    weights: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "identity")]
    op: OpKind,
    /// Observed entries, one `row,col` pair per line (0-based).
    #[arg(long)]
    mask_file: Option<PathBuf>,
    /// Orthonormal basis of the unpenalized directions, one column per direction.
    #[arg(long)]
    cperp: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SimArgs {
    #[arg(long, required_unless_present = "config")]
    scenario: Option<String>,
    /// Scenario file in TOML.
    #[arg(long, conflicts_with = "scenario")]
    config: Option<PathBuf>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// `gaussian` or `heavy-tail`.
    #[arg(long)]
    noise: Option<String>,
    /// Worker threads (default: KACRICE_THREADS or all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Per-replicate CSV output.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Runs the CLI on `args` (including the program name) against the process's stdout/stderr.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_cli_with(args, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_cli_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_input_error() {
                EXIT_INPUT
            } else {
                EXIT_NUMERICAL
            }
        }
    }
}

fn io_err(e: std::io::Error) -> HarnessError {
    HarnessError::Io(e.to_string())
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> Result<()> {
    match cmd {
        Command::Pivot(args) => {
            let problem = build_problem(&args)?;
            let penalty = problem.penalty.name();
            let an = analyze(problem)?;
            let res = an.pvalue()?;
            emit(
                out,
                &[
                    ("penalty", penalty.to_string()),
                    ("lambda1", an.lambda1().to_string()),
                    ("v_minus", an.v_minus.to_string()),
                    ("v_plus", an.v_plus.to_string()),
                    ("sigma2", an.sigma2.to_string()),
                    ("p_value", res.p_value.to_string()),
                ],
            )
        }
        Command::Vbounds { problem, tol } => {
            let problem = build_problem(&problem)?;
            let geom = Geometry::from_penalty(&problem.penalty);
            let an = analyze(problem)?;
            let (lo, hi) = an.solver_bounds(&geom, tol)?;
            emit(
                out,
                &[
                    ("lambda1", an.lambda1().to_string()),
                    ("v_minus", lo.value.to_string()),
                    ("v_plus", hi.value.to_string()),
                    ("iterations", (lo.iterations + hi.iterations).to_string()),
                    ("residual", lo.residual.max(hi.residual).to_string()),
                    ("closed_v_minus", an.v_minus.to_string()),
                    ("closed_v_plus", an.v_plus.to_string()),
                ],
            )
        }
        Command::Interval { problem, alpha } => {
            if !(alpha > 0.0 && alpha < 1.0) {
                return Err(HarnessError::Usage(format!("alpha = {alpha} is not in (0, 1)")));
            }
            let an = analyze(build_problem(&problem)?)?;
            let (lo, hi) = an.interval(alpha)?;
            emit(
                out,
                &[
                    ("lambda1", an.lambda1().to_string()),
                    ("alpha", alpha.to_string()),
                    ("lo", lo.to_string()),
                    ("hi", hi.to_string()),
                ],
            )
        }
        Command::Simulate(args) => {
            let s = build_scenario(&args)?;
            let res = sample_pvalues_with_threads(&s, args.threads.unwrap_or_else(thread_count))?;
            let (bd, bp) = ks_uniform(&res.baseline_pvalues())?;
            let mean = res.p_values().iter().sum::<f64>() / res.records.len() as f64;
            let mut fields = study_fields(&s, &res);
            fields.extend([
                ("mean_p_value", mean.to_string()),
                ("baseline_ks_statistic", bd.to_string()),
                ("baseline_ks_pvalue", bp.to_string()),
            ]);
            emit(out, &fields)?;
            write_out(&args.out, &res)
        }
        Command::Coverage { sim, alpha, signal, signal_index } => {
            let mut s = build_scenario(&sim)?;
            if let Some(v) = signal {
                s = s.with_sparse_signal(signal_index, v)?;
            }
            let res = coverage_experiment_with_threads(&s, alpha, sim.threads.unwrap_or_else(thread_count))?;
            let mut fields = study_fields(&s, &res);
            fields.extend([
                ("alpha", alpha.to_string()),
                ("coverage", res.coverage.unwrap_or(f64::NAN).to_string()),
            ]);
            emit(out, &fields)?;
            write_out(&sim.out, &res)
        }
    }
}

fn study_fields(s: &Scenario, res: &StudyResult) -> Vec<(&'static str, String)> {
    vec![
        ("scenario", s.id.clone()),
        ("family", s.family().name().to_string()),
        ("noise", s.noise.name().to_string()),
        ("seed", s.seed.to_string()),
        ("replicates", res.records.len().to_string()),
        ("surrogate", s.surrogate.to_string()),
        ("tie_redraws", res.tie_redraws().to_string()),
        ("ks_statistic", res.ks_statistic.to_string()),
        ("ks_pvalue", res.ks_pvalue.to_string()),
    ]
}

fn emit(out: &mut dyn Write, fields: &[(&str, String)]) -> Result<()> {
    for (k, v) in fields {
        writeln!(out, "{k}={v}").map_err(io_err)?;
    }
    Ok(())
}

fn write_out(path: &Option<PathBuf>, res: &StudyResult) -> Result<()> {
    if let Some(p) = path {
        let f = File::create(p).map_err(|e| HarnessError::Io(format!("{}: {e}", p.display())))?;
        let mut w = BufWriter::new(f);
        res.write_csv(&mut w).map_err(io_err)?;
        w.flush().map_err(io_err)?;
    }
    Ok(())
}

fn build_scenario(args: &SimArgs) -> Result<Scenario> {
    let mut s = match (&args.scenario, &args.config) {
        (_, Some(path)) => ScenarioConfig::load(path)?,
        (Some(id), None) => find_scenario(id)?,
        (None, None) => return Err(HarnessError::Usage("need --scenario or --config".into())),
    };
    if let Some(r) = args.reps {
        s = s.with_replicates(r);
    }
    if let Some(seed) = args.seed {
        s = s.with_seed(seed);
    }
    if let Some(n) = &args.noise {
        s = s.with_noise(Noise::parse(n).ok_or_else(|| HarnessError::Usage(format!("unknown noise {n:?}")))?);
    }
    Ok(s)
}

fn parse_covariance(sigma: &str) -> Result<Covariance> {
    let t = sigma.trim();
    if t.eq_ignore_ascii_case("i") {
        return Ok(Covariance::identity());
    }
    if let Ok(s) = t.parse::<f64>() {
        if !(s > 0.0 && s.is_finite()) {
            return Err(HarnessError::Usage(format!("--sigma {s} is not positive")));
        }
        return Ok(Covariance::Scaled(s));
    }
    Ok(Covariance::Dense(read_matrix(Path::new(t))?))
}

/// Group file: one group per line, 0-based indices separated by commas or whitespace.
pub fn parse_groups(text: &str) -> Result<Vec<Vec<usize>>> {
    let mut groups = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let g = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|e| HarnessError::Usage(format!("groups line {}: {t:?}: {e}", lineno + 1)))
            })
            .collect::<Result<Vec<usize>>>()?;
        groups.push(g);
    }
    Ok(groups)
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))
}

fn read_mask(path: &Path) -> Result<Vec<(usize, usize)>> {
    let m = read_matrix(path)?;
    if m.ncols() != 2 {
        return Err(HarnessError::Usage(format!("mask file has {} columns, expected 2", m.ncols())));
    }
    m.row_iter()
        .map(|r| {
            let (i, j) = (r[0], r[1]);
            if i < 0.0 || j < 0.0 || i.fract() != 0.0 || j.fract() != 0.0 {
                Err(HarnessError::Usage(format!("mask entry ({i}, {j}) is not a pair of indices")))
            } else {
                Ok((i as usize, j as usize))
            }
        })
        .collect()
}

fn build_problem(args: &ProblemArgs) -> Result<Problem> {
    let design = match &args.design {
        Some(p) => Some(read_matrix(p)?),
        None => None,
    };
    let penalty = match (&args.config, args.penalty) {
        (Some(cfg), _) => {
            let cfg = PenaltyConfig::parse(&read_text(cfg)?)?;
            if cfg.kind.eq_ignore_ascii_case("nuclear") {
                let y = read_matrix(&args.response)?;
                cfg.to_spec(design.as_ref(), y.shape())?
            } else {
                cfg.to_spec(design.as_ref(), (0, 0))?
            }
        }
        (None, Some(PenaltyKind::Lasso)) => PenaltySpec::Lasso,
        (None, Some(PenaltyKind::Group)) => {
            let path = args
                .groups
                .as_ref()
                .ok_or_else(|| HarnessError::Usage("--penalty group needs --groups".into()))?;
            let groups = parse_groups(&read_text(path)?)?;
            let weights = match &args.weights {
                Some(w) => read_vector(w)?.iter().cloned().collect(),
                None => vec![1.0; groups.len()],
            };
            PenaltySpec::Group(GroupSpec { groups, weights })
        }
        (None, Some(PenaltyKind::Nuclear)) => {
            let y = read_matrix(&args.response)?;
            let op = match args.op {
                OpKind::Identity => NuclearOp::Identity,
                OpKind::Mask => NuclearOp::Mask(read_mask(
                    args.mask_file
                        .as_ref()
                        .ok_or_else(|| HarnessError::Usage("--op mask needs --mask-file".into()))?,
                )?),
                OpKind::Matmul => NuclearOp::MatMul(
                    design
                        .clone()
                        .ok_or_else(|| HarnessError::Usage("--op matmul needs --design".into()))?,
                ),
            };
            let shape = match &op {
                NuclearOp::MatMul(x) => (x.ncols(), y.ncols()),
                _ => y.shape(),
            };
            PenaltySpec::Nuclear(NuclearSpec { op, shape })
        }
        (None, None) => return Err(HarnessError::Usage("need --penalty or --config".into())),
    };
    let covariance = parse_covariance(&args.sigma)?;
    let mut problem = match penalty {
        PenaltySpec::Nuclear(spec) => {
            let y = read_matrix(&args.response)?;
            let s2 = match covariance {
                Covariance::Scaled(s) => s,
                Covariance::Dense(_) => {
                    return Err(HarnessError::Usage("nuclear problems take a scalar --sigma".into()))
                }
            };
            Problem::nuclear(spec.op, spec.shape, y, s2)
        }
        penalty => {
            let x = design.ok_or_else(|| HarnessError::Usage("--design is required".into()))?;
            Problem {
                design: Some(x),
                response: Response::Vector(read_vector(&args.response)?),
                covariance,
                penalty,
                cperp_basis: None,
            }
        }
    };
    if let Some(c) = &args.cperp {
        let basis: DMatrix<f64> = read_matrix(c)?;
        problem = problem.with_cperp(basis);
    }
    Ok(problem)
}
