use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sensorsched::belief::sample_belief_set;
use sensorsched::io;
use sensorsched::pointbased::{solve_perseus, SolverParams};
use sensorsched::qmdp::{learn_tracking_contributions, ContributionMatrix, DEFAULT_CONTRIBUTION_SAMPLES};
use sensorsched::sim::{
    evaluate_policy, lower_bound_point, sweep_tradeoff, Policy, PolicyKind, SweepParams,
    DEFAULT_BOUND_EPS,
};
use sensorsched::{Error, NetworkModel};

const DEFAULT_EPISODES: usize = 10_000;

/// Plan and evaluate sensor wake/sleep schedules for target tracking.
#[derive(Parser)]
#[command(name = "sensorsched", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a policy and write it to a file.
    Solve(SolveArgs),
    /// Monte Carlo evaluation of a saved policy.
    Evaluate(EvaluateArgs),
    /// Re-solve and evaluate a policy over several energy prices.
    Sweep(SweepArgs),
    /// Analytic lower bound over several energy prices.
    Bound(BoundArgs),
    /// Sample beliefs along random-action trajectories.
    SampleBeliefs(SampleArgs),
}

#[derive(Args)]
struct SolverArgs {
    /// Size of the sampled belief set (point-based).
    #[arg(long, default_value_t = 500)]
    beliefs: usize,
    #[arg(long, default_value_t = 32)]
    max_actions: usize,
    /// Observation samples per next state (Gaussian model).
    #[arg(long, default_value_t = 50)]
    obs_samples: usize,
    #[arg(long, default_value_t = 100)]
    max_iterations: usize,
    /// Rollouts per entry when learning QMDP contributions.
    #[arg(long, default_value_t = DEFAULT_CONTRIBUTION_SAMPLES)]
    samples: usize,
}

impl SolverArgs {
    fn params(&self) -> SweepParams {
        SweepParams {
            solver: SolverParams {
                max_actions: self.max_actions,
                obs_samples: self.obs_samples,
                max_iterations: self.max_iterations,
                ..SolverParams::default()
            },
            beliefs: self.beliefs,
            contribution_samples: self.samples,
            bound_eps: DEFAULT_BOUND_EPS,
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    model: PathBuf,
    /// `qmdp` or `pointbased`.
    #[arg(long)]
    policy: PolicyKind,
    /// Energy price; defaults to the model's `c_default`.
    #[arg(long)]
    c: Option<f64>,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    model: PathBuf,
    /// Value-function file or QMDP contribution table written by `solve`.
    #[arg(long)]
    policy_file: PathBuf,
    #[arg(long, default_value_t = DEFAULT_EPISODES)]
    episodes: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Energy price; defaults to the model's `c_default`.
    #[arg(long)]
    c: Option<f64>,
    /// Write the result here instead of stdout.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    policy: PolicyKind,
    /// Comma-separated energy prices in (0, 1].
    #[arg(long, value_delimiter = ',', required = true)]
    c_list: Vec<f64>,
    #[arg(long, default_value_t = DEFAULT_EPISODES)]
    episodes: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    solver: SolverArgs,
    /// Write the curve here instead of stdout.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct BoundArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long, value_delimiter = ',', required = true)]
    c_list: Vec<f64>,
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn priced(model: NetworkModel, c: Option<f64>) -> Result<NetworkModel, Error> {
    match c {
        Some(c) => model.with_c(c),
        None => Ok(model),
    }
}

fn emit(text: &str, path: Option<&Path>) -> Result<(), Error> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn load_policy(path: &Path, model: &NetworkModel) -> Result<Policy, Error> {
    let text = fs::read_to_string(path)?;
    let first = text.split_whitespace().next().unwrap_or_default();
    if first == "valuefn" {
        let vf = io::parse_valuefn(&text)?;
        if vf.states() != model.states() || vf.sensors() != model.sensors() {
            return Err(Error::DimensionMismatch("value function does not match the model".into()));
        }
        Ok(Policy::PointBased(vf))
    } else if first.starts_with("state,") {
        let t = io::parse_contributions(&text)?;
        if t.states() != model.states() || t.sensors() != model.sensors() {
            return Err(Error::DimensionMismatch("contribution table does not match the model".into()));
        }
        Ok(Policy::Qmdp(sensorsched::qmdp::QmdpPolicy::from_contributions(model, t)?))
    } else {
        Err(Error::Parse {
            line: 1,
            reason: "unrecognized policy file".into(),
        })
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Solve(args) => {
            let model = priced(io::load_model(&args.model)?, args.c)?;
            let params = args.solver.params();
            let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
            match args.policy {
                PolicyKind::PointBased => {
                    let beliefs = sample_belief_set(&model, params.beliefs, &mut rng)?;
                    let (vf, diag) = solve_perseus(&model, &beliefs, &params.solver, &mut rng)?;
                    io::save_valuefn(&vf, &args.out)?;
                    eprintln!(
                        "{} iterations, {} alpha vectors, value sum {}",
                        diag.sum_values.len(),
                        vf.len(),
                        diag.sum_values.last().copied().unwrap_or_default()
                    );
                }
                PolicyKind::Qmdp => {
                    // The simple-model rule is the decoupled rule with T = P.
                    let t = if model.is_simple() {
                        ContributionMatrix::simple_analytic(&model)?
                    } else {
                        learn_tracking_contributions(&model, params.contribution_samples, &mut rng)?
                    };
                    io::save_contributions(&t, &args.out)?;
                }
                other => {
                    return Err(Error::InvalidParameter(format!(
                        "`{other}` has nothing to solve; use qmdp or pointbased"
                    )))
                }
            }
        }
        Command::Evaluate(args) => {
            let model = priced(io::load_model(&args.model)?, args.c)?;
            let policy = load_policy(&args.policy_file, &model)?;
            let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
            let point = evaluate_policy(&model, &policy, args.episodes, &mut rng)?;
            emit(&io::points_to_csv(&[point]), args.csv.as_deref())?;
        }
        Command::Sweep(args) => {
            let model = io::load_model(&args.model)?;
            let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
            let points = sweep_tradeoff(
                &model,
                args.policy,
                &args.c_list,
                args.episodes,
                &args.solver.params(),
                &mut rng,
            )?;
            emit(&io::points_to_csv(&points), args.csv.as_deref())?;
        }
        Command::Bound(args) => {
            let model = io::load_model(&args.model)?;
            let mut c_list = args.c_list.clone();
            c_list.sort_by(f64::total_cmp);
            let points = c_list
                .iter()
                .map(|&c| lower_bound_point(&model.with_c(c)?, DEFAULT_BOUND_EPS))
                .collect::<Result<Vec<_>, _>>()?;
            emit(&io::points_to_csv(&points), args.csv.as_deref())?;
        }
        Command::SampleBeliefs(args) => {
            let model = io::load_model(&args.model)?;
            let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
            let beliefs = sample_belief_set(&model, args.count, &mut rng)?;
            io::save_beliefs(&beliefs, &args.out)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Io(_) => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}
