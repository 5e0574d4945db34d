//! Alpha-vector value functions and a Perseus-style randomized point-based
//! solver.
//!
//! A value function is the lower envelope of a set of hyperplanes over the
//! belief simplex; each hyperplane carries the action of the plan it scores.
//! The solver backs up a fixed set of sampled beliefs, restricting each
//! backup to actions over the sensors that matter for the predicted target
//! location. For the Gaussian model the observation integral is replaced by
//! a Monte Carlo partition of sampled observations by minimizing hyperplane.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::belief::{predict_mass, Belief};
use crate::error::{Error, Result};
use crate::model::{ActionMask, NetworkModel, SensingSpec, SIGNAL_PEAK};

#[derive(Debug, Clone, PartialEq)]
pub struct AlphaVector {
    /// One entry per state, exit state last (always 0).
    pub values: Vec<f64>,
    pub action: ActionMask,
}

impl AlphaVector {
    pub fn dot(&self, belief: &Belief) -> f64 {
        belief
            .mass()
            .iter()
            .zip(&self.values)
            .filter(|(p, _)| **p != 0.0)
            .map(|(p, a)| p * a)
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValueFunction {
    alphas: Vec<AlphaVector>,
}

impl ValueFunction {
    pub fn new(alphas: Vec<AlphaVector>) -> Result<Self> {
        let Some(first) = alphas.first() else {
            return Err(Error::EmptyValueFunction);
        };
        let (len, n) = (first.values.len(), first.action.len());
        if alphas.iter().any(|a| a.values.len() != len || a.action.len() != n) {
            return Err(Error::DimensionMismatch("alpha vectors differ in shape".into()));
        }
        Ok(Self { alphas })
    }

    pub fn alphas(&self) -> &[AlphaVector] {
        &self.alphas
    }

    pub fn len(&self) -> usize {
        self.alphas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphas.is_empty()
    }

    /// Number of network locations `m`.
    pub fn states(&self) -> usize {
        self.alphas[0].values.len() - 1
    }

    pub fn sensors(&self) -> usize {
        self.alphas[0].action.len()
    }

    /// Index and value of the minimizing alpha; lowest index on ties.
    pub fn best(&self, belief: &Belief) -> (usize, f64) {
        let support: Vec<(usize, f64)> = belief
            .mass()
            .iter()
            .enumerate()
            .filter(|(_, &p)| p != 0.0)
            .map(|(i, &p)| (i, p))
            .collect();
        argmin_weighted(&self.alphas, &support)
    }
}

fn argmin_weighted(alphas: &[AlphaVector], weights: &[(usize, f64)]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, a) in alphas.iter().enumerate() {
        let v: f64 = weights.iter().map(|&(s, w)| w * a.values[s]).sum();
        if v < best.1 {
            best = (j, v);
        }
    }
    best
}

/// Minimum dot product of `belief` with the alpha vectors.
pub fn value_at(vf: &ValueFunction, belief: &Belief) -> Result<f64> {
    if vf.is_empty() {
        return Err(Error::EmptyValueFunction);
    }
    Ok(vf.best(belief).1)
}

/// Action attached to the minimizing alpha vector.
pub fn pointbased_action(vf: &ValueFunction, belief: &Belief) -> Result<ActionMask> {
    if vf.is_empty() {
        return Err(Error::EmptyValueFunction);
    }
    Ok(vf.alphas[vf.best(belief).0].action.clone())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverParams {
    /// Cap on candidate actions per backup.
    pub max_actions: usize,
    /// Observation samples per next state (Gaussian model).
    pub obs_samples: usize,
    pub improvement_tol: f64,
    pub max_iterations: usize,
    /// Predicted mass below this is treated as outside the belief support.
    pub support_eps: f64,
    /// A Gaussian sensor is significant when its mean response at a
    /// supported location exceeds this fraction of the peak response.
    pub significance_fraction: f64,
    pub initial: InitialValue,
}

/// Starting value function of the solver.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum InitialValue {
    /// Cost of never waking a sensor, at most 1 per step.
    #[default]
    AllAsleep,
    /// `(c n + 1)` per step, an upper bound on the cost of any policy.
    Pessimistic,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            max_actions: 32,
            obs_samples: 50,
            improvement_tol: 1e-9,
            max_iterations: 100,
            support_eps: 1e-6,
            significance_fraction: 0.1,
            initial: InitialValue::default(),
        }
    }
}

impl SolverParams {
    pub fn validate(&self) -> Result<()> {
        if self.max_actions < 2 {
            return Err(Error::InvalidParameter("max_actions must be at least 2".into()));
        }
        if self.obs_samples == 0 || self.max_iterations == 0 {
            return Err(Error::InvalidParameter(
                "obs_samples and max_iterations must be positive".into(),
            ));
        }
        if !(self.improvement_tol >= 0.0) || !(self.support_eps >= 0.0) {
            return Err(Error::InvalidParameter("tolerances must be nonnegative".into()));
        }
        Ok(())
    }
}

/// Per-iteration series recorded by [`solve_perseus`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolveDiagnostics {
    /// Sum of values over the belief set after each iteration.
    pub sum_values: Vec<f64>,
    pub alpha_counts: Vec<usize>,
    /// Beliefs whose greedy action changed during the iteration.
    pub policy_changes: Vec<usize>,
    pub backups: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationStats {
    pub sum_value: f64,
    pub alpha_count: usize,
    pub policy_changes: usize,
    pub backups: usize,
}

/// Sensors that matter for the predicted location of the target.
fn significant_sensors(model: &NetworkModel, support: &[usize], params: &SolverParams) -> Vec<usize> {
    let mut flags = vec![false; model.sensors()];
    match model.sensing() {
        SensingSpec::Simple => {
            for &b in support {
                flags[b] = true;
            }
        }
        SensingSpec::OverlapDeterministic { .. } | SensingSpec::OverlapProbabilistic { .. } => {
            for &b in support {
                for &l in model.covering_sensors(b) {
                    flags[l] = true;
                }
            }
        }
        SensingSpec::ContinuousGaussian { .. } => {
            let threshold = params.significance_fraction * SIGNAL_PEAK;
            for (l, flag) in flags.iter_mut().enumerate() {
                *flag = support.iter().any(|&b| model.mean(b, l) > threshold);
            }
        }
    }
    (0..model.sensors()).filter(|&l| flags[l]).collect()
}

/// Candidate actions for backing up `belief`: subsets of the significant
/// sensors, all of them when few enough, otherwise a random sample of
/// `max_actions` distinct subsets. All-asleep comes first and the
/// all-significant-awake mask is always present.
pub fn reduced_control_space<R: Rng + ?Sized>(
    model: &NetworkModel,
    belief: &Belief,
    params: &SolverParams,
    rng: &mut R,
) -> Vec<ActionMask> {
    let n = model.sensors();
    let predicted = predict_mass(belief.mass(), model);
    let support: Vec<usize> = (0..model.states())
        .filter(|&b| predicted[b] >= params.support_eps && predicted[b] > 0.0)
        .collect();
    let significant = significant_sensors(model, &support, params);
    let k = significant.len();
    let mask_of = |subset: &dyn Fn(usize) -> bool| {
        let mut mask = ActionMask::all_asleep(n);
        for (bit, &l) in significant.iter().enumerate() {
            if subset(bit) {
                mask.set(l, true);
            }
        }
        mask
    };
    if k == 0 {
        return vec![ActionMask::all_asleep(n)];
    }
    let fits = k < usize::BITS as usize && (1usize << k) <= params.max_actions;
    if fits {
        return (0..1usize << k).map(|s| mask_of(&|bit| s >> bit & 1 == 1)).collect();
    }
    let mut out = vec![ActionMask::all_asleep(n), mask_of(&|_| true)];
    let mut seen: HashSet<ActionMask> = out.iter().cloned().collect();
    while out.len() < params.max_actions {
        let bits: Vec<bool> = (0..k).map(|_| rng.random_bool(0.5)).collect();
        let mask = mask_of(&|bit| bits[bit]);
        if seen.insert(mask.clone()) {
            out.push(mask);
        }
    }
    out
}

/// Per-value-function cache: best alpha at each point-mass belief.
struct BackupContext {
    best_unit: Vec<usize>,
}

impl BackupContext {
    fn new(vf: &ValueFunction) -> Self {
        let m = vf.states();
        let best_unit = (0..m)
            .map(|b| argmin_weighted(vf.alphas(), &[(b, 1.0)]).0)
            .collect();
        Self { best_unit }
    }
}

/// Observation regions of the Gaussian model under one action.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregatedObservations {
    /// Regions with nonzero probability, ordered by alpha index.
    pub regions: Vec<ObservationRegion>,
    /// Expected Hamming error of the MAP estimate for each next state.
    pub tracking_error: Vec<f64>,
}

/// Observations whose posterior is minimized by the same alpha vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationRegion {
    pub alpha: usize,
    /// Estimated probability of the region for each next state (exit last).
    pub probs: Vec<f64>,
}

/// Next-state values `V(b')` = energy + expected tracking error + expected
/// continuation alpha, under one action.
struct NextValues {
    values: Vec<f64>,
    regions: Option<(Vec<Vec<f64>>, Vec<f64>)>,
}

fn discrete_next_values(
    model: &NetworkModel,
    vf: &ValueFunction,
    ctx: &BackupContext,
    predicted: &[f64],
    action: &ActionMask,
) -> Result<Vec<f64>> {
    let m = model.states();
    let erasure = m;
    let energy = model.c() * action.active_count() as f64;
    let hamming = model.uses_estimate();

    let mut outcomes: Vec<Vec<(usize, f64)>> = Vec::with_capacity(m);
    let mut groups: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m + 1];
    for b in 0..m {
        let list: Vec<(usize, f64)> = model
            .observation_outcomes(b, action)?
            .into_iter()
            .map(|(obs, p)| {
                let key = match obs {
                    crate::model::Observation::StateSeen(s) => s,
                    _ => erasure,
                };
                (key, p)
            })
            .collect();
        for &(key, p) in &list {
            groups[key].push((b, p));
        }
        outcomes.push(list);
    }

    // For each observation: continuation alpha and location estimate.
    let mut choice = vec![(0usize, 0usize); m + 1];
    for (key, group) in groups.iter().enumerate() {
        if group.is_empty() {
            continue;
        }
        let mut weights: Vec<(usize, f64)> = group
            .iter()
            .map(|&(b, p)| (b, predicted[b] * p))
            .filter(|&(_, w)| w > 0.0)
            .collect();
        if weights.is_empty() {
            // Impossible under this belief: score against the likelihood alone.
            weights = group.clone();
        }
        let alpha = if weights.len() == 1 {
            ctx.best_unit[weights[0].0]
        } else {
            argmin_weighted(vf.alphas(), &weights).0
        };
        let mut estimate = weights[0];
        for &w in &weights[1..] {
            if w.1 > estimate.1 {
                estimate = w;
            }
        }
        choice[key] = (alpha, estimate.0);
    }

    Ok((0..m)
        .map(|b| {
            let expected: f64 = outcomes[b]
                .iter()
                .map(|&(key, p)| {
                    let (alpha, estimate) = choice[key];
                    let miss = if hamming { estimate != b } else { key == erasure };
                    p * (f64::from(u8::from(miss)) + vf.alphas[alpha].values[b])
                })
                .sum();
            energy + expected
        })
        .collect())
}

#[allow(clippy::too_many_arguments)]
fn continuous_next_values<R: Rng + ?Sized>(
    model: &NetworkModel,
    vf: &ValueFunction,
    predicted: &[f64],
    action: &ActionMask,
    samples: usize,
    collect_regions: bool,
    rng: &mut R,
) -> NextValues {
    let m = model.states();
    let sigma = model.sigma().expect("Gaussian model");
    let energy = model.c() * action.active_count() as f64;
    let alphas = vf.alphas();
    let count = alphas.len();

    let mut support: Vec<usize> = (0..m).filter(|&b| predicted[b] > 0.0).collect();
    let log_prior: Vec<f64> = if support.is_empty() {
        support = (0..m).collect();
        vec![0.0; m]
    } else {
        support.iter().map(|&b| predicted[b].ln()).collect()
    };
    let width = support.len();
    // Alpha values restricted to the support, one row per alpha.
    let compact: Vec<f64> = alphas
        .iter()
        .flat_map(|a| support.iter().map(move |&b| a.values[b]))
        .collect();
    let pick = |w: &[f64]| -> (usize, usize) {
        let mut best = (0, f64::INFINITY);
        for j in 0..count {
            let row = &compact[j * width..(j + 1) * width];
            let v: f64 = row.iter().zip(w).map(|(a, x)| a * x).sum();
            if v < best.1 {
                best = (j, v);
            }
        }
        let mut est = 0;
        for k in 1..width {
            if w[k] > w[est] {
                est = k;
            }
        }
        (best.0, support[est])
    };

    let mut region_probs = collect_regions.then(|| vec![vec![0.0; m + 1]; count]);
    let mut tracking = vec![0.0; m + 1];
    let mut values = vec![0.0; m];
    let active: Vec<usize> = action.active().collect();

    if active.is_empty() {
        // Only erasures: every observation leaves the prior untouched.
        let w: Vec<f64> = log_prior.iter().map(|lp| lp.exp()).collect();
        let (j, est) = pick(&w);
        for b in 0..m {
            let miss = f64::from(u8::from(est != b));
            tracking[b] = miss;
            values[b] = energy + miss + alphas[j].values[b];
            if let Some(r) = region_probs.as_mut() {
                r[j][b] = 1.0;
            }
        }
    } else {
        let inv_two_var = 0.5 / (sigma * sigma);
        let mut reading = vec![0.0; active.len()];
        let mut logw = vec![0.0; width];
        let mut w = vec![0.0; width];
        let share = 1.0 / samples as f64;
        for b in 0..m {
            let mut acc = 0.0;
            let mut miss_acc = 0.0;
            for _ in 0..samples {
                for (r, &l) in reading.iter_mut().zip(&active) {
                    let z: f64 = StandardNormal.sample(rng);
                    *r = model.mean(b, l) + sigma * z;
                }
                let mut top = f64::NEG_INFINITY;
                for (k, &s) in support.iter().enumerate() {
                    let mut ll = log_prior[k];
                    for (r, &l) in reading.iter().zip(&active) {
                        let d = r - model.mean(s, l);
                        ll -= d * d * inv_two_var;
                    }
                    logw[k] = ll;
                    top = top.max(ll);
                }
                for k in 0..width {
                    w[k] = (logw[k] - top).exp();
                }
                let (j, est) = pick(&w);
                let miss = f64::from(u8::from(est != b));
                miss_acc += miss;
                acc += miss + alphas[j].values[b];
                if let Some(r) = region_probs.as_mut() {
                    r[j][b] += share;
                }
            }
            tracking[b] = miss_acc * share;
            values[b] = energy + acc * share;
        }
    }
    if let Some(r) = region_probs.as_mut() {
        // The exit state is observed exactly and every alpha is 0 there.
        r[0][m] = 1.0;
    }
    NextValues {
        values,
        regions: region_probs.map(|r| (r, tracking)),
    }
}

/// Monte Carlo partition of the Gaussian observation space into regions
/// sharing a minimizing alpha vector, with per-next-state region weights.
pub fn aggregate_observations<R: Rng + ?Sized>(
    model: &NetworkModel,
    vf: &ValueFunction,
    belief: &Belief,
    action: &ActionMask,
    params: &SolverParams,
    rng: &mut R,
) -> Result<AggregatedObservations> {
    if !model.is_continuous() {
        return Err(Error::NotContinuousModel);
    }
    if vf.is_empty() {
        return Err(Error::EmptyValueFunction);
    }
    let predicted = predict_mass(belief.mass(), model);
    let next = continuous_next_values(model, vf, &predicted, action, params.obs_samples, true, rng);
    let (probs, tracking_error) = next.regions.expect("regions requested");
    let regions = probs
        .into_iter()
        .enumerate()
        .filter(|(_, p)| p.iter().any(|&x| x > 0.0))
        .map(|(alpha, probs)| ObservationRegion { alpha, probs })
        .collect();
    Ok(AggregatedObservations {
        regions,
        tracking_error,
    })
}

fn next_values_for(
    model: &NetworkModel,
    vf: &ValueFunction,
    ctx: &BackupContext,
    predicted: &[f64],
    action: &ActionMask,
    params: &SolverParams,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<f64>> {
    if model.is_continuous() {
        Ok(continuous_next_values(model, vf, predicted, action, params.obs_samples, false, rng).values)
    } else {
        discrete_next_values(model, vf, ctx, predicted, action)
    }
}

fn backup_with_context<R: Rng + ?Sized>(
    model: &NetworkModel,
    vf: &ValueFunction,
    ctx: &BackupContext,
    belief: &Belief,
    actions: &[ActionMask],
    params: &SolverParams,
    rng: &mut R,
) -> Result<AlphaVector> {
    if actions.is_empty() {
        return Err(Error::EmptyActionSet);
    }
    let m = model.states();
    let predicted = predict_mass(belief.mass(), model);
    let seed: u64 = rng.random();
    let scored: Vec<(f64, Vec<f64>)> = actions
        .par_iter()
        .enumerate()
        .map(|(k, action)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let next = next_values_for(model, vf, ctx, &predicted, action, params, &mut rng)?;
            let value: f64 = (0..m).map(|b| predicted[b] * next[b]).sum();
            Ok((value, next))
        })
        .collect::<Result<_>>()?;
    let mut best = 0;
    for k in 1..scored.len() {
        if scored[k].0 < scored[best].0 {
            best = k;
        }
    }
    let next = &scored[best].1;
    let mut values = vec![0.0; m + 1];
    for (b, v) in values.iter_mut().enumerate().take(m) {
        *v = model
            .successors(b)
            .iter()
            .filter(|&&(j, _)| j < m)
            .map(|&(j, p)| p * next[j])
            .sum();
    }
    Ok(AlphaVector {
        values,
        action: actions[best].clone(),
    })
}

/// Point backup of `belief` over the candidate `actions`: builds one alpha
/// vector per action from the current value function and returns the one
/// minimizing the belief's value.
pub fn backup<R: Rng + ?Sized>(
    model: &NetworkModel,
    vf: &ValueFunction,
    belief: &Belief,
    actions: &[ActionMask],
    params: &SolverParams,
    rng: &mut R,
) -> Result<AlphaVector> {
    if vf.is_empty() {
        return Err(Error::EmptyValueFunction);
    }
    if actions.is_empty() {
        return Err(Error::EmptyActionSet);
    }
    let ctx = BackupContext::new(vf);
    backup_with_context(model, vf, &ctx, belief, actions, params, rng)
}

/// Upper bound on any policy's cost: `(c n + 1)` per step for the expected
/// time to absorption, attached to the all-asleep action.
pub fn initial_value_function(model: &NetworkModel) -> Result<ValueFunction> {
    let t = model.expected_absorption_time()?;
    let per_step = model.c() * model.sensors() as f64 + 1.0;
    let mut values: Vec<f64> = t.iter().map(|x| per_step * x).collect();
    values.push(0.0);
    ValueFunction::new(vec![AlphaVector {
        values,
        action: ActionMask::all_asleep(model.sensors()),
    }])
}

/// Value of the all-asleep plan bounded by one unit of tracking cost per
/// step: `t(b) - 1` expected steps remain after location `b`. Exact for the
/// simple and deterministic overlap models.
pub fn all_asleep_value_function(model: &NetworkModel) -> Result<ValueFunction> {
    let t = model.expected_absorption_time()?;
    let mut values: Vec<f64> = t.iter().map(|x| (x - 1.0).max(0.0)).collect();
    values.push(0.0);
    ValueFunction::new(vec![AlphaVector {
        values,
        action: ActionMask::all_asleep(model.sensors()),
    }])
}

/// One randomized sweep: back up randomly chosen beliefs that have not yet
/// improved until every belief's value is no worse than before. A backup
/// that fails to improve its belief keeps that belief's old alpha instead.
pub fn perseus_iteration<R: Rng + ?Sized>(
    model: &NetworkModel,
    vf: &ValueFunction,
    beliefs: &[Belief],
    params: &SolverParams,
    rng: &mut R,
) -> Result<(ValueFunction, IterationStats)> {
    sweep(model, vf, beliefs, params, false, rng)
}

/// `exhaustive`: a kept old alpha only settles the belief that was backed
/// up, so every belief is either improved by a new alpha or backed up itself.
fn sweep<R: Rng + ?Sized>(
    model: &NetworkModel,
    vf: &ValueFunction,
    beliefs: &[Belief],
    params: &SolverParams,
    exhaustive: bool,
    rng: &mut R,
) -> Result<(ValueFunction, IterationStats)> {
    if beliefs.is_empty() {
        return Err(Error::InvalidParameter("belief set is empty".into()));
    }
    if vf.is_empty() {
        return Err(Error::EmptyValueFunction);
    }
    let ctx = BackupContext::new(vf);
    let supports: Vec<Vec<(usize, f64)>> = beliefs
        .iter()
        .map(|b| {
            b.mass()
                .iter()
                .enumerate()
                .filter(|(_, &p)| p != 0.0)
                .map(|(i, &p)| (i, p))
                .collect()
        })
        .collect();
    let old: Vec<(usize, f64)> = supports
        .iter()
        .map(|s| argmin_weighted(vf.alphas(), s))
        .collect();

    let mut alphas: Vec<AlphaVector> = Vec::new();
    let mut current = vec![f64::INFINITY; beliefs.len()];
    let mut pending: Vec<usize> = (0..beliefs.len()).collect();
    let mut backups = 0;

    while !pending.is_empty() {
        let k = pending[rng.random_range(0..pending.len())];
        let actions = reduced_control_space(model, &beliefs[k], params, rng);
        let alpha = backup_with_context(model, vf, &ctx, &beliefs[k], &actions, params, rng)?;
        backups += 1;
        let value: f64 = supports[k].iter().map(|&(s, p)| p * alpha.values[s]).sum();
        let improved = value <= old[k].1 - params.improvement_tol;
        let added = if improved {
            alpha
        } else {
            vf.alphas[old[k].0].clone()
        };
        if improved || !exhaustive {
            for &i in &pending {
                let v: f64 = supports[i].iter().map(|&(s, p)| p * added.values[s]).sum();
                current[i] = current[i].min(v);
            }
        }
        current[k] = current[k].min(old[k].1);
        if !alphas.contains(&added) {
            alphas.push(added);
        }
        pending.retain(|&i| current[i] > old[i].1);
    }

    let next = ValueFunction::new(alphas)?;
    let mut sum = 0.0;
    let mut changes = 0;
    for (i, s) in supports.iter().enumerate() {
        let (j, v) = argmin_weighted(next.alphas(), s);
        sum += v;
        if next.alphas[j].action != vf.alphas[old[i].0].action {
            changes += 1;
        }
    }
    let stats = IterationStats {
        sum_value: sum,
        alpha_count: next.len(),
        policy_changes: changes,
        backups,
    };
    Ok((next, stats))
}

/// Runs Perseus sweeps from the value function selected by
/// `params.initial` until the policy on
/// the belief set stops changing and the summed value stops decreasing, or
/// `max_iterations` is reached.
pub fn solve_perseus<R: Rng + ?Sized>(
    model: &NetworkModel,
    beliefs: &[Belief],
    params: &SolverParams,
    rng: &mut R,
) -> Result<(ValueFunction, SolveDiagnostics)> {
    let start = match params.initial {
        InitialValue::AllAsleep => all_asleep_value_function(model)?,
        InitialValue::Pessimistic => initial_value_function(model)?,
    };
    solve_perseus_from(model, start, beliefs, params, rng)
}

/// As [`solve_perseus`], continuing from an existing value function.
pub fn solve_perseus_from<R: Rng + ?Sized>(
    model: &NetworkModel,
    mut vf: ValueFunction,
    beliefs: &[Belief],
    params: &SolverParams,
    rng: &mut R,
) -> Result<(ValueFunction, SolveDiagnostics)> {
    params.validate()?;
    if beliefs.is_empty() {
        return Err(Error::InvalidParameter("belief set is empty".into()));
    }
    let mut diag = SolveDiagnostics::default();
    let mut previous: f64 = beliefs.iter().map(|b| vf.best(b).1).sum();
    let mut verify = false;
    for _ in 0..params.max_iterations {
        let (next, stats) = sweep(model, &vf, beliefs, params, verify, rng)?;
        vf = next;
        diag.sum_values.push(stats.sum_value);
        diag.alpha_counts.push(stats.alpha_count);
        diag.policy_changes.push(stats.policy_changes);
        diag.backups.push(stats.backups);
        let decrease = previous - stats.sum_value;
        previous = stats.sum_value;
        let quiet = stats.policy_changes == 0 && decrease < params.improvement_tol;
        // A quiet randomized sweep may have backed up a single belief; only
        // stop once a sweep that looks at every belief is quiet as well.
        if quiet && verify {
            break;
        }
        verify = quiet;
    }
    Ok((vf, diag))
}
