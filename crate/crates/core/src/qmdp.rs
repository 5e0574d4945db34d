//! QMDP ("observable after control") scheduling policies.
//!
//! Assuming the target location is revealed after every action, the future
//! cost no longer depends on the action and the problem splits into one
//! binary stochastic shortest path problem per sensor. For the simple model
//! the split is exact; for the coupled models each sensor's tracking cost is
//! learned by Monte Carlo and the same per-sensor structure is imposed.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::belief::{bayes_update, map_estimate, predict_mass, Belief};
use crate::error::{Error, Result};
use crate::model::{ActionMask, NetworkModel};

/// Default Monte Carlo rollouts per `(state, sensor)` entry.
pub const DEFAULT_CONTRIBUTION_SAMPLES: usize = 2000;

const RESIDUAL_TOL: f64 = 1e-10;

/// Per-sensor values at the unit beliefs.
#[derive(Debug, Clone, PartialEq)]
pub struct PerSensorValue {
    /// `values[l][i]`: value of sensor `l`'s subproblem started at location `i`.
    pub values: Vec<Vec<f64>>,
    /// `wake[l][i]`: optimal action of sensor `l` at location `i`.
    pub wake: Vec<Vec<bool>>,
    /// Tracking share of `values` under the optimal per-sensor policy.
    pub tracking: Vec<Vec<f64>>,
}

impl PerSensorValue {
    /// Joint surrogate value at the point mass on `state`.
    pub fn total_at(&self, state: usize) -> f64 {
        self.values.iter().map(|v| v[state]).sum()
    }

    pub fn tracking_at(&self, state: usize) -> f64 {
        self.tracking.iter().map(|v| v[state]).sum()
    }
}

/// Learned one-step tracking error of each sensor's subproblem.
#[derive(Debug, Clone, PartialEq)]
pub struct ContributionMatrix {
    /// `t[i][l]`: expected tracking error from prior location `i` when sensor
    /// `l` sleeps and all others are awake.
    pub t: Vec<Vec<f64>>,
    pub samples_per_entry: usize,
}

impl ContributionMatrix {
    pub fn get(&self, state: usize, sensor: usize) -> f64 {
        self.t[state][sensor]
    }

    pub fn states(&self) -> usize {
        self.t.len()
    }

    pub fn sensors(&self) -> usize {
        self.t.first().map_or(0, Vec::len)
    }

    /// Exact contributions of the simple model, `T(i, l) = P(i, l)`.
    pub fn simple_analytic(model: &NetworkModel) -> Result<Self> {
        if !model.is_simple() {
            return Err(Error::NotSimpleModel);
        }
        let m = model.states();
        Ok(Self {
            t: (0..m).map(|i| model.row(i)[..m].to_vec()).collect(),
            samples_per_entry: 0,
        })
    }
}

/// LU factors of `I - Q` shared by all per-sensor subproblems.
struct TransientSystem {
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    a: DMatrix<f64>,
}

impl TransientSystem {
    fn new(model: &NetworkModel) -> Self {
        let m = model.states();
        let a = DMatrix::from_fn(m, m, |i, j| {
            let delta = if i == j { 1.0 } else { 0.0 };
            delta - model.prob(i, j)
        });
        Self { lu: a.clone().lu(), a }
    }

    fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let b = DVector::from_column_slice(rhs);
        let x = self.lu.solve(&b).ok_or(Error::SingularSystem)?;
        let residual = (&self.a * &x - &b).amax();
        let scale = 1.0 + x.amax();
        if !(residual <= RESIDUAL_TOL * scale) {
            return Err(Error::SingularSystem);
        }
        Ok(x.iter().copied().collect())
    }
}

/// Policy iteration on one sensor's two-action problem. The future term is
/// shared by both actions, so the improvement step compares immediate costs;
/// ties keep the sensor asleep.
fn solve_sensor(
    system: &TransientSystem,
    model: &NetworkModel,
    sleep_cost: &[f64],
    wake_cost: &[f64],
) -> Result<(Vec<f64>, Vec<bool>, Vec<f64>)> {
    let m = sleep_cost.len();
    let mut wake = vec![false; m];
    loop {
        let r: Vec<f64> = (0..m)
            .map(|i| if wake[i] { wake_cost[i] } else { sleep_cost[i] })
            .collect();
        let values = system.solve(&r)?;
        let mut changed = false;
        for i in 0..m {
            let future: f64 = model
                .successors(i)
                .iter()
                .filter(|&&(j, _)| j < m)
                .map(|&(j, p)| p * values[j])
                .sum();
            let q_sleep = sleep_cost[i] + future;
            let q_wake = wake_cost[i] + future;
            let current = if wake[i] { q_wake } else { q_sleep };
            let best_wake = q_wake < q_sleep;
            let best = q_wake.min(q_sleep);
            if best_wake != wake[i] && best < current {
                wake[i] = best_wake;
                changed = true;
            }
        }
        if !changed {
            let track: Vec<f64> = (0..m)
                .map(|i| if wake[i] { 0.0 } else { sleep_cost[i] })
                .collect();
            let tracking = system.solve(&track)?;
            return Ok((values, wake, tracking));
        }
    }
}

fn solve_per_sensor(
    model: &NetworkModel,
    sleep_cost: impl Fn(usize, usize) -> f64,
) -> Result<PerSensorValue> {
    let m = model.states();
    let tau = model.terminal();
    let system = TransientSystem::new(model);
    let wake_cost: Vec<f64> = (0..m).map(|i| model.c() * (1.0 - model.prob(i, tau))).collect();
    let mut out = PerSensorValue {
        values: Vec::with_capacity(model.sensors()),
        wake: Vec::with_capacity(model.sensors()),
        tracking: Vec::with_capacity(model.sensors()),
    };
    for l in 0..model.sensors() {
        let sleep: Vec<f64> = (0..m).map(|i| sleep_cost(i, l)).collect();
        let (values, wake, tracking) = solve_sensor(&system, model, &sleep, &wake_cost)?;
        out.values.push(values);
        out.wake.push(wake);
        out.tracking.push(tracking);
    }
    Ok(out)
}

/// Exact per-sensor decomposition of the simple model: sleeping sensor `l`
/// at `i` costs the predicted miss mass `P(i, l)`, waking it costs `c` times
/// the survival mass.
pub fn solve_simple_qmdp(model: &NetworkModel) -> Result<PerSensorValue> {
    if !model.is_simple() {
        return Err(Error::NotSimpleModel);
    }
    solve_per_sensor(model, |i, l| model.prob(i, l))
}

/// Per-sensor problems with learned sleep costs `T(i, l)`.
pub fn solve_decoupled_qmdp(
    model: &NetworkModel,
    contributions: &ContributionMatrix,
) -> Result<PerSensorValue> {
    if contributions.states() != model.states() || contributions.sensors() != model.sensors() {
        return Err(Error::DimensionMismatch(format!(
            "contribution matrix is {}x{}, model has {} states and {} sensors",
            contributions.states(),
            contributions.sensors(),
            model.states(),
            model.sensors()
        )));
    }
    solve_per_sensor(model, |i, l| contributions.get(i, l))
}

/// Monte Carlo estimate of each sensor's one-step tracking contribution:
/// from prior location `i`, sleep sensor `l`, keep every other sensor awake,
/// simulate one transition and observation and score the model's tracking
/// error (MAP estimate for the Hamming-cost models).
pub fn learn_tracking_contributions<R: Rng + ?Sized>(
    model: &NetworkModel,
    samples: usize,
    rng: &mut R,
) -> Result<ContributionMatrix> {
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be positive".into()));
    }
    let m = model.states();
    let n = model.sensors();
    let seed: u64 = rng.random();
    let entries: Vec<(usize, usize)> = (0..m).flat_map(|i| (0..n).map(move |l| (i, l))).collect();
    let values = entries
        .par_iter()
        .enumerate()
        .map(|(k, &(i, l))| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let mut action = ActionMask::all_awake(n);
            action.set(l, false);
            let prior = Belief::point(m, i);
            let mut errors = 0.0;
            for _ in 0..samples {
                let next = model.transition_sample(i, &mut rng);
                if next == model.terminal() {
                    continue;
                }
                let obs = model.sample_observation(next, &action, &mut rng);
                let estimate = if model.uses_estimate() {
                    Some(map_estimate(&bayes_update(model, &prior, &action, &obs)?)?)
                } else {
                    None
                };
                errors += model.tracking_cost(next, &action, estimate)?;
            }
            Ok(errors / samples as f64)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(ContributionMatrix {
        t: values.chunks(n).map(<[f64]>::to_vec).collect(),
        samples_per_entry: samples,
    })
}

/// A fitted QMDP policy. `contributions` is `None` for the exact simple-model
/// rule.
#[derive(Debug, Clone)]
pub struct QmdpPolicy {
    pub values: PerSensorValue,
    pub contributions: Option<ContributionMatrix>,
}

impl QmdpPolicy {
    /// Exact rule on the simple model; learned decoupling otherwise.
    pub fn fit<R: Rng + ?Sized>(model: &NetworkModel, samples: usize, rng: &mut R) -> Result<Self> {
        if model.is_simple() {
            Ok(Self {
                values: solve_simple_qmdp(model)?,
                contributions: None,
            })
        } else {
            let t = learn_tracking_contributions(model, samples, rng)?;
            Self::from_contributions(model, t)
        }
    }

    pub fn from_contributions(model: &NetworkModel, t: ContributionMatrix) -> Result<Self> {
        Ok(Self {
            values: solve_decoupled_qmdp(model, &t)?,
            contributions: Some(t),
        })
    }

    pub fn action(&self, model: &NetworkModel, belief: &Belief) -> ActionMask {
        qmdp_action(model, self, belief)
    }
}

/// Myopic per-sensor rule: wake sensor `l` iff its expected sleep tracking
/// cost strictly exceeds its expected wake energy cost.
pub fn qmdp_action(model: &NetworkModel, policy: &QmdpPolicy, belief: &Belief) -> ActionMask {
    let m = model.states();
    let predicted = predict_mass(belief.mass(), model);
    let survival: f64 = predicted[..m].iter().sum();
    let wake_cost = model.c() * survival;
    let mut action = ActionMask::all_asleep(model.sensors());
    for l in 0..model.sensors() {
        let sleep_cost = match &policy.contributions {
            None => predicted[l],
            Some(t) => belief
                .probs()
                .iter()
                .enumerate()
                .filter(|(_, &p)| p > 0.0)
                .map(|(b, &p)| p * t.get(b, l))
                .sum(),
        };
        if sleep_cost > wake_cost {
            action.set(l, true);
        }
    }
    action
}

/// Surrogate QMDP value at an arbitrary belief.
pub fn surrogate_value(model: &NetworkModel, policy: &QmdpPolicy, belief: &Belief) -> f64 {
    let m = model.states();
    let predicted = predict_mass(belief.mass(), model);
    let survival: f64 = predicted[..m].iter().sum();
    let wake_cost = model.c() * survival;
    (0..model.sensors())
        .map(|l| {
            let sleep_cost = match &policy.contributions {
                None => predicted[l],
                Some(t) => (0..m).map(|b| belief.get(b) * t.get(b, l)).sum(),
            };
            let future: f64 = (0..m).map(|j| predicted[j] * policy.values.values[l][j]).sum();
            sleep_cost.min(wake_cost) + future
        })
        .sum()
}
