//! Episode simulation, Monte Carlo policy evaluation and `c` sweeps.
//!
//! A step is counted whenever the target moves to a network location; the
//! move into the exit state ends the episode and costs nothing. Per-step
//! rates divide totals by the total number of steps over all episodes.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::belief::{bayes_update, map_estimate, sample_belief_set, Belief};
use crate::bounds::{continuous_lower_bound_parts, BoundParts};
use crate::error::{Error, Result};
use crate::model::{ActionMask, NetworkModel};
use crate::numeric::{compensated_sum, mean_and_stderr};
use crate::pointbased::{pointbased_action, solve_perseus, SolverParams, ValueFunction};
use crate::qmdp::{
    learn_tracking_contributions, solve_simple_qmdp, QmdpPolicy, DEFAULT_CONTRIBUTION_SAMPLES,
};

/// Default truncation of the bound series.
pub const DEFAULT_BOUND_EPS: f64 = 1e-9;

/// An action selector over beliefs.
#[derive(Debug, Clone)]
pub enum Policy {
    AllAsleep,
    AllAwake,
    Qmdp(QmdpPolicy),
    PointBased(ValueFunction),
}

impl Policy {
    pub fn name(&self) -> &'static str {
        match self {
            Policy::AllAsleep => "all_asleep",
            Policy::AllAwake => "all_awake",
            Policy::Qmdp(_) => "qmdp",
            Policy::PointBased(_) => "pointbased",
        }
    }

    pub fn action(&self, model: &NetworkModel, belief: &Belief) -> Result<ActionMask> {
        match self {
            Policy::AllAsleep => Ok(ActionMask::all_asleep(model.sensors())),
            Policy::AllAwake => Ok(ActionMask::all_awake(model.sensors())),
            Policy::Qmdp(q) => Ok(q.action(model, belief)),
            Policy::PointBased(vf) => pointbased_action(vf, belief),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub state: usize,
    pub action: ActionMask,
    pub estimate: Option<usize>,
    pub tracking: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeResult {
    pub steps: usize,
    pub energy_total: f64,
    pub tracking_total: f64,
    pub trace: Option<Vec<StepRecord>>,
}

impl EpisodeResult {
    pub fn total_cost(&self) -> f64 {
        self.energy_total + self.tracking_total
    }
}

/// Simulates one episode from the model's start location. The controller
/// only sees its own actions and the resulting observations.
pub fn run_episode<R: Rng + ?Sized>(
    model: &NetworkModel,
    policy: &Policy,
    rng: &mut R,
) -> Result<EpisodeResult> {
    simulate(model, policy, false, rng)
}

/// As [`run_episode`], recording every step.
pub fn run_episode_traced<R: Rng + ?Sized>(
    model: &NetworkModel,
    policy: &Policy,
    rng: &mut R,
) -> Result<EpisodeResult> {
    simulate(model, policy, true, rng)
}

fn simulate<R: Rng + ?Sized>(
    model: &NetworkModel,
    policy: &Policy,
    traced: bool,
    rng: &mut R,
) -> Result<EpisodeResult> {
    let exit = model.terminal();
    let mut state = model.start();
    let mut belief = Belief::point(model.states(), state);
    let mut result = EpisodeResult {
        steps: 0,
        energy_total: 0.0,
        tracking_total: 0.0,
        trace: traced.then(Vec::new),
    };
    loop {
        let action = policy.action(model, &belief)?;
        state = model.transition_sample(state, rng);
        if state == exit {
            return Ok(result);
        }
        let obs = model.sample_observation(state, &action, rng);
        belief = bayes_update(model, &belief, &action, &obs)?;
        let estimate = if model.uses_estimate() {
            Some(map_estimate(&belief)?)
        } else {
            None
        };
        let tracking = model.tracking_cost(state, &action, estimate)?;
        result.steps += 1;
        result.energy_total += model.c() * action.active_count() as f64;
        result.tracking_total += tracking;
        if let Some(trace) = result.trace.as_mut() {
            trace.push(StepRecord {
                state,
                action,
                estimate,
                tracking,
            });
        }
    }
}

/// One point of an energy-tracking tradeoff curve.
#[derive(Debug, Clone, PartialEq)]
pub struct TradeoffPoint {
    pub policy: String,
    pub c: f64,
    pub active_per_step: f64,
    pub tracking_per_step: f64,
    /// Mean total cost per episode.
    pub total_cost: f64,
    /// Standard error of `total_cost`; 0 for analytic points.
    pub cost_stderr: f64,
    /// 0 for analytic points.
    pub episodes: usize,
}

/// Runs `episodes` episodes on independent streams derived from one seed
/// drawn from `rng`, so results do not depend on thread scheduling.
pub fn simulate_episodes<R: Rng + ?Sized>(
    model: &NetworkModel,
    policy: &Policy,
    episodes: usize,
    rng: &mut R,
) -> Result<Vec<EpisodeResult>> {
    let seed: u64 = rng.random();
    (0..episodes as u64)
        .into_par_iter()
        .map(|e| {
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            r.set_stream(e);
            run_episode(model, policy, &mut r)
        })
        .collect()
}

pub fn summarize(model: &NetworkModel, policy: &str, results: &[EpisodeResult]) -> TradeoffPoint {
    let steps = compensated_sum(results.iter().map(|r| r.steps as f64));
    let energy = compensated_sum(results.iter().map(|r| r.energy_total));
    let tracking = compensated_sum(results.iter().map(|r| r.tracking_total));
    let costs: Vec<f64> = results.iter().map(EpisodeResult::total_cost).collect();
    let (total_cost, cost_stderr) = mean_and_stderr(&costs);
    let per_step = |x: f64| if steps > 0.0 { x / steps } else { 0.0 };
    TradeoffPoint {
        policy: policy.to_string(),
        c: model.c(),
        active_per_step: per_step(energy / model.c()),
        tracking_per_step: per_step(tracking),
        total_cost,
        cost_stderr,
        episodes: results.len(),
    }
}

/// Monte Carlo estimate of a policy's per-step rates and mean cost.
pub fn evaluate_policy<R: Rng + ?Sized>(
    model: &NetworkModel,
    policy: &Policy,
    episodes: usize,
    rng: &mut R,
) -> Result<TradeoffPoint> {
    if episodes == 0 {
        return Err(Error::InvalidParameter("episodes must be positive".into()));
    }
    let results = simulate_episodes(model, policy, episodes, rng)?;
    Ok(summarize(model, policy.name(), &results))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PolicyKind {
    Qmdp,
    PointBased,
    LowerBound,
    AllAsleep,
    AllAwake,
}

impl PolicyKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PolicyKind::Qmdp => "qmdp",
            PolicyKind::PointBased => "pointbased",
            PolicyKind::LowerBound => "lower_bound",
            PolicyKind::AllAsleep => "all_asleep",
            PolicyKind::AllAwake => "all_awake",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "qmdp" => Ok(PolicyKind::Qmdp),
            "pointbased" | "point_based" | "perseus" => Ok(PolicyKind::PointBased),
            "lower_bound" | "bound" => Ok(PolicyKind::LowerBound),
            "all_asleep" => Ok(PolicyKind::AllAsleep),
            "all_awake" => Ok(PolicyKind::AllAwake),
            other => Err(Error::InvalidParameter(format!("unknown policy kind `{other}`"))),
        }
    }
}

/// Settings shared by every point of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepParams {
    pub solver: SolverParams,
    /// Size of the shared belief set for the point-based solver.
    pub beliefs: usize,
    /// Rollouts per entry when learning QMDP contributions.
    pub contribution_samples: usize,
    pub bound_eps: f64,
}

impl Default for SweepParams {
    fn default() -> Self {
        Self {
            solver: SolverParams::default(),
            beliefs: 500,
            contribution_samples: DEFAULT_CONTRIBUTION_SAMPLES,
            bound_eps: DEFAULT_BOUND_EPS,
        }
    }
}

/// Analytic lower-bound point at the model's start location and price.
pub fn lower_bound_point(model: &NetworkModel, eps: f64) -> Result<TradeoffPoint> {
    let start = model.start();
    let (energy, tracking) = if model.is_simple() {
        let values = solve_simple_qmdp(model)?;
        let tracking = values.tracking_at(start);
        (values.total_at(start) - tracking, tracking)
    } else if model.is_continuous() {
        let BoundParts { energy, tracking } = continuous_lower_bound_parts(model, model.c(), eps)?;
        (energy[start], tracking[start])
    } else {
        return Err(Error::InvalidParameter(
            "lower bounds are only available for the simple and Gaussian models".into(),
        ));
    };
    // Steps exclude the initial location.
    let steps = model.expected_absorption_time()?[start] - 1.0;
    let per_step = |x: f64| if steps > 0.0 { x / steps } else { 0.0 };
    Ok(TradeoffPoint {
        policy: PolicyKind::LowerBound.as_str().to_string(),
        c: model.c(),
        active_per_step: per_step(energy / model.c()),
        tracking_per_step: per_step(tracking),
        total_cost: energy + tracking,
        cost_stderr: 0.0,
        episodes: 0,
    })
}

/// Re-solves and evaluates `kind` at every price in `c_values`; points are
/// returned sorted by `c`. Learned QMDP contributions and the point-based
/// belief set do not depend on `c` and are shared across the sweep.
pub fn sweep_tradeoff<R: Rng + ?Sized>(
    model: &NetworkModel,
    kind: PolicyKind,
    c_values: &[f64],
    episodes: usize,
    params: &SweepParams,
    rng: &mut R,
) -> Result<Vec<TradeoffPoint>> {
    if c_values.is_empty() {
        return Err(Error::InvalidParameter("no energy prices given".into()));
    }
    if let Some(c) = c_values.iter().find(|&&c| !(c > 0.0 && c <= 1.0)) {
        return Err(Error::InvalidParameter(format!("energy price {c} outside (0, 1]")));
    }
    if kind != PolicyKind::LowerBound && episodes == 0 {
        return Err(Error::InvalidParameter("episodes must be positive".into()));
    }
    let mut prices = c_values.to_vec();
    prices.sort_by(f64::total_cmp);

    let contributions = if kind == PolicyKind::Qmdp && !model.is_simple() {
        Some(learn_tracking_contributions(model, params.contribution_samples, rng)?)
    } else {
        None
    };
    let beliefs = if kind == PolicyKind::PointBased {
        sample_belief_set(model, params.beliefs, rng)?
    } else {
        Vec::new()
    };

    let mut points = Vec::with_capacity(prices.len());
    for c in prices {
        let priced = model.with_c(c)?;
        let policy = match kind {
            PolicyKind::LowerBound => {
                points.push(lower_bound_point(&priced, params.bound_eps)?);
                continue;
            }
            PolicyKind::AllAsleep => Policy::AllAsleep,
            PolicyKind::AllAwake => Policy::AllAwake,
            PolicyKind::Qmdp => match &contributions {
                Some(t) => Policy::Qmdp(QmdpPolicy::from_contributions(&priced, t.clone())?),
                None => Policy::Qmdp(QmdpPolicy::fit(&priced, params.contribution_samples, rng)?),
            },
            PolicyKind::PointBased => {
                let (vf, _) = solve_perseus(&priced, &beliefs, &params.solver, rng)?;
                Policy::PointBased(vf)
            }
        };
        points.push(evaluate_policy(&priced, &policy, episodes, rng)?);
    }
    Ok(points)
}
