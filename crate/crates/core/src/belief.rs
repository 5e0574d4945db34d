//! Beliefs over target location and the Bayes filter.

use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{ActionMask, NetworkModel, Observation, SensingSpec};

const SUM_TOL: f64 = 1e-9;

/// Posterior over the `m` network locations plus the exit state.
///
/// Stored as one vector of length `m + 1` whose last entry is the mass on
/// the exit state, so it dots directly against alpha vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Belief {
    mass: Vec<f64>,
}

impl Belief {
    pub fn new(probs: &[f64], terminal: f64) -> Result<Self> {
        let mut mass = probs.to_vec();
        mass.push(terminal);
        Self::from_mass(mass)
    }

    /// From a full `m + 1` vector (exit state last).
    pub fn from_mass(mass: Vec<f64>) -> Result<Self> {
        if mass.len() < 2 {
            return Err(Error::DimensionMismatch("belief needs at least one location".into()));
        }
        if mass.iter().any(|&p| !p.is_finite() || p < 0.0) {
            return Err(Error::InvalidParameter("belief entries must be finite and >= 0".into()));
        }
        let s: f64 = mass.iter().sum();
        if (s - 1.0).abs() > SUM_TOL {
            return Err(Error::InvalidParameter(format!("belief sums to {s}, not 1")));
        }
        Ok(Self { mass })
    }

    /// Point mass on `state`; `state == m` gives the exit-state belief.
    pub fn point(m: usize, state: usize) -> Self {
        assert!(state <= m, "state {state} out of range for m = {m}");
        let mut mass = vec![0.0; m + 1];
        mass[state] = 1.0;
        Self { mass }
    }

    pub fn terminal_point(m: usize) -> Self {
        Self::point(m, m)
    }

    /// Uniform over the given locations.
    pub fn uniform_over(m: usize, states: &[usize]) -> Self {
        assert!(!states.is_empty());
        let mut mass = vec![0.0; m + 1];
        let w = 1.0 / states.len() as f64;
        for &s in states {
            mass[s] += w;
        }
        Self { mass }
    }

    pub(crate) fn from_unnormalized(mut mass: Vec<f64>) -> Option<Self> {
        let s: f64 = mass.iter().sum();
        if !(s > 0.0) || !s.is_finite() {
            return None;
        }
        for p in &mut mass {
            *p /= s;
        }
        Some(Self { mass })
    }

    /// Number of network locations `m`.
    pub fn states(&self) -> usize {
        self.mass.len() - 1
    }

    pub fn probs(&self) -> &[f64] {
        &self.mass[..self.mass.len() - 1]
    }

    pub fn terminal(&self) -> f64 {
        self.mass[self.mass.len() - 1]
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn get(&self, state: usize) -> f64 {
        self.mass[state]
    }

    /// Transient locations carrying more than `eps` mass.
    pub fn support(&self, eps: f64) -> Vec<usize> {
        self.probs()
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > eps)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Prior for the next step: `belief * P`.
pub fn predict(belief: &Belief, model: &NetworkModel) -> Belief {
    Belief {
        mass: predict_mass(belief.mass(), model),
    }
}

pub(crate) fn predict_mass(mass: &[f64], model: &NetworkModel) -> Vec<f64> {
    let mut next = vec![0.0; model.states() + 1];
    for (i, &p) in mass.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        for &(j, pij) in model.successors(i) {
            next[j] += p * pij;
        }
    }
    next
}

/// One filter step: predict through `P`, then condition on `obs` received
/// after `action`.
pub fn bayes_update(
    model: &NetworkModel,
    belief: &Belief,
    action: &ActionMask,
    obs: &Observation,
) -> Result<Belief> {
    if belief.states() != model.states() || action.len() != model.sensors() {
        return Err(Error::DimensionMismatch("belief/action do not match the model".into()));
    }
    let m = model.states();
    let prior = predict_mass(belief.mass(), model);
    if let Observation::Terminal = obs {
        if prior[m] <= 0.0 {
            return Err(Error::ZeroLikelihoodObservation);
        }
        return Ok(Belief::terminal_point(m));
    }
    match (model.sensing(), obs) {
        (SensingSpec::Simple, Observation::StateSeen(b)) => {
            if *b >= m || !action.is_awake(*b) || prior[*b] <= 0.0 {
                return Err(Error::ZeroLikelihoodObservation);
            }
            Ok(Belief::point(m, *b))
        }
        (SensingSpec::Simple, Observation::Erasure) => {
            // Awake cells would have reported the target.
            let mut mass = prior;
            mass[m] = 0.0;
            for l in action.active() {
                mass[l] = 0.0;
            }
            Belief::from_unnormalized(mass).ok_or(Error::ZeroLikelihoodObservation)
        }
        (SensingSpec::ContinuousGaussian { .. }, Observation::Continuous(_)) => {
            let mut logw = vec![f64::NEG_INFINITY; m + 1];
            for b in 0..m {
                if prior[b] > 0.0 {
                    logw[b] = prior[b].ln() + model.observation_log_likelihood(obs, b, action)?;
                }
            }
            let top = logw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if top == f64::NEG_INFINITY {
                return Err(Error::ZeroLikelihoodObservation);
            }
            let mass = logw.iter().map(|&lw| (lw - top).exp()).collect();
            Belief::from_unnormalized(mass).ok_or(Error::ZeroLikelihoodObservation)
        }
        _ => {
            let mut mass = vec![0.0; m + 1];
            for b in 0..m {
                if prior[b] > 0.0 {
                    mass[b] = prior[b] * model.observation_likelihood(obs, b, action)?;
                }
            }
            Belief::from_unnormalized(mass).ok_or(Error::ZeroLikelihoodObservation)
        }
    }
}

/// Most probable network location; ties go to the lowest index.
pub fn map_estimate(belief: &Belief) -> Result<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &p) in belief.probs().iter().enumerate() {
        if p > 0.0 && best.is_none_or(|(_, bp)| p > bp) {
            best = Some((i, p));
        }
    }
    best.map(|(i, _)| i).ok_or(Error::DegenerateTerminalBelief)
}

/// Collects `count` beliefs along random-action trajectories started from
/// the model's start state. Trajectories restart when the target exits or
/// after `4 x` the expected absorption time from the start state.
pub fn sample_belief_set<R: Rng + ?Sized>(
    model: &NetworkModel,
    count: usize,
    rng: &mut R,
) -> Result<Vec<Belief>> {
    let t = model.expected_absorption_time()?;
    let cap = (4.0 * t[model.start()]).ceil() as usize;
    sample_belief_set_with_cap(model, count, cap.max(1), rng)
}

pub fn sample_belief_set_with_cap<R: Rng + ?Sized>(
    model: &NetworkModel,
    count: usize,
    max_steps: usize,
    rng: &mut R,
) -> Result<Vec<Belief>> {
    let m = model.states();
    let n = model.sensors();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let mut state = model.start();
        let mut belief = Belief::point(m, state);
        out.push(belief.clone());
        for _ in 0..max_steps {
            if out.len() >= count {
                break;
            }
            let bits: Vec<bool> = (0..n).map(|_| rng.random_bool(0.5)).collect();
            let action = ActionMask::from_bits(&bits);
            state = model.transition_sample(state, rng);
            if state == m {
                break;
            }
            let obs = model.sample_observation(state, &action, rng);
            belief = bayes_update(model, &belief, &action, &obs)?;
            out.push(belief.clone());
        }
    }
    Ok(out)
}
