//! Network, target motion, sensing and per-stage cost.
//!
//! States are indexed `0..m` for locations inside the network and `m` for the
//! absorbing exit state (see [`NetworkModel::terminal`]). Sensors are indexed
//! `0..n`. Four sensing variants are supported:
//!
//! * `Simple`: one cell per sensor, the target is seen iff its cell's sensor
//!   is awake.
//! * `OverlapDeterministic`: sensors cover arbitrary location sets, the target
//!   is seen iff any covering sensor is awake.
//! * `OverlapProbabilistic`: as above, but an awake covering sensor reports
//!   the true location with probability `q` and otherwise a location drawn
//!   uniformly from the ambiguity set left by the awake sensors.
//! * `ContinuousGaussian`: each awake sensor reads `10 / ((b - p)^2 + 1)` plus
//!   Gaussian noise, asleep sensors return an erasure.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

const ROW_TOL: f64 = 1e-9;

/// Peak of the received signal strength curve.
pub const SIGNAL_PEAK: f64 = 10.0;

/// Received signal strength of a sensor at `position` for a target at `location`.
pub fn mean_signal(location: f64, position: f64) -> f64 {
    let d = location - position;
    SIGNAL_PEAK / (d * d + 1.0)
}

/// Location coordinate of a transient state index (states sit on 1, 2, ...).
pub fn state_location(state: usize) -> f64 {
    (state + 1) as f64
}

#[derive(Debug, Clone, PartialEq)]
pub enum SensingSpec {
    Simple,
    OverlapDeterministic { regions: Vec<Vec<usize>> },
    OverlapProbabilistic { regions: Vec<Vec<usize>>, q: f64 },
    ContinuousGaussian { positions: Vec<f64>, sigma: f64 },
}

impl SensingSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            SensingSpec::Simple => "simple",
            SensingSpec::OverlapDeterministic { .. } => "overlap_deterministic",
            SensingSpec::OverlapProbabilistic { .. } => "overlap_probabilistic",
            SensingSpec::ContinuousGaussian { .. } => "continuous_gaussian",
        }
    }
}

/// What the fusion centre receives after the target moves.
#[derive(Debug, Clone, PartialEq)]
pub enum Observation {
    StateSeen(usize),
    Erasure,
    Terminal,
    /// One entry per sensor; `None` is the erasure mark of an asleep sensor.
    Continuous(Vec<Option<f64>>),
}

/// Wake/sleep decision for every sensor for the next step.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ActionMask {
    len: usize,
    words: Vec<u64>,
}

impl ActionMask {
    pub fn all_asleep(len: usize) -> Self {
        Self {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn all_awake(len: usize) -> Self {
        let mut mask = Self::all_asleep(len);
        for i in 0..len {
            mask.set(i, true);
        }
        mask
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut mask = Self::all_asleep(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            mask.set(i, b);
        }
        mask
    }

    /// Mask with exactly the listed sensors awake.
    pub fn from_active(len: usize, active: &[usize]) -> Self {
        let mut mask = Self::all_asleep(len);
        for &i in active {
            mask.set(i, true);
        }
        mask
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn is_awake(&self, sensor: usize) -> bool {
        debug_assert!(sensor < self.len);
        self.words[sensor / 64] >> (sensor % 64) & 1 == 1
    }

    pub fn set(&mut self, sensor: usize, awake: bool) {
        assert!(sensor < self.len, "sensor {sensor} out of range");
        let bit = 1u64 << (sensor % 64);
        if awake {
            self.words[sensor / 64] |= bit;
        } else {
            self.words[sensor / 64] &= !bit;
        }
    }

    pub fn active_count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn active(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |&i| self.is_awake(i))
    }

    pub fn bits(&self) -> Vec<bool> {
        (0..self.len).map(|i| self.is_awake(i)).collect()
    }

    /// Hex string, most significant nibble first; sensor 0 is the lowest bit.
    pub fn to_hex(&self) -> String {
        let digits = self.len.div_ceil(4).max(1);
        (0..digits)
            .rev()
            .map(|d| {
                let mut nibble = 0u32;
                for k in 0..4 {
                    let i = d * 4 + k;
                    if i < self.len && self.is_awake(i) {
                        nibble |= 1 << k;
                    }
                }
                char::from_digit(nibble, 16).unwrap()
            })
            .collect()
    }

    pub fn from_hex(hex: &str, len: usize) -> Option<Self> {
        let mut mask = Self::all_asleep(len);
        for (d, ch) in hex.chars().rev().enumerate() {
            let nibble = ch.to_digit(16)?;
            for k in 0..4 {
                if nibble >> k & 1 == 1 {
                    let i = d * 4 + k;
                    if i >= len {
                        return None;
                    }
                    mask.set(i, true);
                }
            }
        }
        Some(mask)
    }
}

/// Sensor network, target motion and cost parameters.
///
/// Immutable once built; every constructor validates the model.
#[derive(Debug, Clone)]
pub struct NetworkModel {
    name: String,
    n: usize,
    m: usize,
    /// Row-major `(m+1) x (m+1)`.
    transition: Vec<f64>,
    /// Nonzero entries of each row.
    successors: Vec<Vec<(usize, f64)>>,
    sensing: SensingSpec,
    /// `covers[l][i]`: sensor `l` sees location `i`.
    covers: Vec<Vec<bool>>,
    /// Sensors covering each location.
    coverage: Vec<Vec<usize>>,
    /// Mean signal table `m x n` for the Gaussian model.
    means: Vec<Vec<f64>>,
    c: f64,
    start: usize,
}

impl NetworkModel {
    /// Builds and validates a model. `transition` has `m + 1` rows, the last
    /// one being the exit state. The start state defaults to the middle of
    /// the network.
    pub fn new(
        name: impl Into<String>,
        n: usize,
        transition: Vec<Vec<f64>>,
        sensing: SensingSpec,
        c: f64,
    ) -> Result<Self> {
        if transition.is_empty() {
            return Err(Error::DimensionMismatch("empty transition matrix".into()));
        }
        let m = transition.len() - 1;
        for (i, row) in transition.iter().enumerate() {
            if row.len() != m + 1 {
                return Err(Error::DimensionMismatch(format!(
                    "transition row {} has {} entries, expected {}",
                    i + 1,
                    row.len(),
                    m + 1
                )));
            }
        }
        let flat: Vec<f64> = transition.into_iter().flatten().collect();
        let successors = (0..=m)
            .map(|i| {
                (0..=m)
                    .filter_map(|j| {
                        let p = flat[i * (m + 1) + j];
                        (p != 0.0).then_some((j, p))
                    })
                    .collect()
            })
            .collect();

        let mut covers = vec![vec![false; m]; n];
        match &sensing {
            SensingSpec::Simple => {
                if n != m {
                    return Err(Error::DimensionMismatch(format!(
                        "simple sensing needs one cell per sensor (n = {n}, m = {m})"
                    )));
                }
                for (l, row) in covers.iter_mut().enumerate() {
                    row[l] = true;
                }
            }
            SensingSpec::OverlapDeterministic { regions }
            | SensingSpec::OverlapProbabilistic { regions, .. } => {
                if regions.len() != n {
                    return Err(Error::DimensionMismatch(format!(
                        "{} visibility regions for {n} sensors",
                        regions.len()
                    )));
                }
                for (l, region) in regions.iter().enumerate() {
                    if region.is_empty() {
                        return Err(Error::InvalidSensing(format!(
                            "sensor {} has an empty visibility region",
                            l + 1
                        )));
                    }
                    for &i in region {
                        if i >= m {
                            return Err(Error::InvalidSensing(format!(
                                "sensor {} covers unknown location {}",
                                l + 1,
                                i + 1
                            )));
                        }
                        covers[l][i] = true;
                    }
                }
                if let SensingSpec::OverlapProbabilistic { q, .. } = &sensing {
                    if !(*q > 0.0 && *q <= 1.0) {
                        return Err(Error::InvalidSensing(format!(
                            "detection probability {q} outside (0, 1]"
                        )));
                    }
                }
            }
            SensingSpec::ContinuousGaussian { positions, sigma } => {
                if positions.len() != n {
                    return Err(Error::DimensionMismatch(format!(
                        "{} sensor positions for {n} sensors",
                        positions.len()
                    )));
                }
                if positions.iter().any(|p| !p.is_finite()) {
                    return Err(Error::InvalidSensing("non-finite sensor position".into()));
                }
                if !(sigma.is_finite() && *sigma > 0.0) {
                    return Err(Error::InvalidSensing(format!("noise std {sigma} must be > 0")));
                }
            }
        }
        let coverage = (0..m)
            .map(|i| (0..n).filter(|&l| covers[l][i]).collect())
            .collect();
        let means = match &sensing {
            SensingSpec::ContinuousGaussian { positions, .. } => (0..m)
                .map(|j| {
                    positions
                        .iter()
                        .map(|&p| mean_signal(state_location(j), p))
                        .collect()
                })
                .collect(),
            _ => Vec::new(),
        };

        let model = Self {
            name: name.into(),
            n,
            m,
            transition: flat,
            successors,
            sensing,
            covers,
            coverage,
            means,
            c,
            start: m.saturating_sub(1) / 2,
        };
        model.validate_model()?;
        Ok(model)
    }

    /// Checks stochasticity, absorption at the exit state, properness and the
    /// energy price.
    pub fn validate_model(&self) -> Result<()> {
        let m = self.m;
        if m == 0 {
            return Err(Error::DimensionMismatch("model has no transient states".into()));
        }
        if self.n == 0 {
            return Err(Error::DimensionMismatch("model has no sensors".into()));
        }
        for i in 0..=m {
            let row = self.row(i);
            if row.iter().any(|&p| !p.is_finite() || p < 0.0) {
                return Err(Error::NonStochasticRow(i));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > ROW_TOL {
                return Err(Error::NonStochasticRow(i));
            }
        }
        if (self.prob(m, m) - 1.0).abs() > ROW_TOL {
            return Err(Error::TauNotAbsorbing);
        }
        // Backward reachability from the exit state.
        let mut reaches = vec![false; m + 1];
        reaches[m] = true;
        let mut changed = true;
        while changed {
            changed = false;
            for i in 0..m {
                if !reaches[i] && self.successors[i].iter().any(|&(j, _)| reaches[j]) {
                    reaches[i] = true;
                    changed = true;
                }
            }
        }
        if let Some(i) = (0..m).find(|&i| !reaches[i]) {
            return Err(Error::UnreachableTermination(i));
        }
        if !(self.c > 0.0 && self.c <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "energy cost c = {} outside (0, 1]",
                self.c
            )));
        }
        if self.start >= m {
            return Err(Error::InvalidParameter(format!(
                "start state {} is not a network location",
                self.start + 1
            )));
        }
        Ok(())
    }

    /// Copy of the model with a different energy price.
    pub fn with_c(&self, c: f64) -> Result<Self> {
        let mut model = self.clone();
        model.c = c;
        model.validate_model()?;
        Ok(model)
    }

    pub fn with_start(mut self, start: usize) -> Result<Self> {
        self.start = start;
        self.validate_model()?;
        Ok(self)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn sensors(&self) -> usize {
        self.n
    }

    pub fn states(&self) -> usize {
        self.m
    }

    /// Index of the absorbing exit state.
    pub fn terminal(&self) -> usize {
        self.m
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn sensing(&self) -> &SensingSpec {
        &self.sensing
    }

    pub fn is_simple(&self) -> bool {
        matches!(self.sensing, SensingSpec::Simple)
    }

    pub fn is_continuous(&self) -> bool {
        matches!(self.sensing, SensingSpec::ContinuousGaussian { .. })
    }

    /// Whether tracking error is the Hamming error of a location estimate.
    pub fn uses_estimate(&self) -> bool {
        matches!(
            self.sensing,
            SensingSpec::OverlapProbabilistic { .. } | SensingSpec::ContinuousGaussian { .. }
        )
    }

    pub fn prob(&self, from: usize, to: usize) -> f64 {
        self.transition[from * (self.m + 1) + to]
    }

    pub fn row(&self, from: usize) -> &[f64] {
        let w = self.m + 1;
        &self.transition[from * w..(from + 1) * w]
    }

    /// Nonzero `(next state, probability)` pairs of a row.
    pub fn successors(&self, from: usize) -> &[(usize, f64)] {
        &self.successors[from]
    }

    /// Full transition matrix as rows.
    pub fn transition_rows(&self) -> Vec<Vec<f64>> {
        (0..=self.m).map(|i| self.row(i).to_vec()).collect()
    }

    /// Sensors whose visibility region contains `location`.
    pub fn covering_sensors(&self, location: usize) -> &[usize] {
        &self.coverage[location]
    }

    pub fn sensor_covers(&self, sensor: usize, location: usize) -> bool {
        self.covers[sensor][location]
    }

    /// Mean signal of `sensor` for a target at transient `state` (Gaussian model only).
    pub fn mean(&self, state: usize, sensor: usize) -> f64 {
        self.means[state][sensor]
    }

    pub fn mean_table(&self) -> &[Vec<f64>] {
        &self.means
    }

    pub fn sigma(&self) -> Option<f64> {
        match self.sensing {
            SensingSpec::ContinuousGaussian { sigma, .. } => Some(sigma),
            _ => None,
        }
    }

    fn check_action(&self, action: &ActionMask) -> Result<()> {
        if action.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "action has {} bits for {} sensors",
                action.len(),
                self.n
            )));
        }
        Ok(())
    }

    /// True iff some awake sensor sees `location`.
    pub fn is_covered(&self, location: usize, action: &ActionMask) -> bool {
        self.coverage[location].iter().any(|&l| action.is_awake(l))
    }

    /// Locations that an awake covering sensor may report for a target at
    /// `location`: the intersection of the awake covering regions minus the
    /// regions of awake sensors that do not see the target. `None` when no
    /// covering sensor is awake. Always contains `location`.
    pub fn ambiguity_set(&self, location: usize, action: &ActionMask) -> Option<Vec<usize>> {
        let covering = &self.coverage[location];
        let awake_covering: Vec<usize> = covering
            .iter()
            .copied()
            .filter(|&l| action.is_awake(l))
            .collect();
        if awake_covering.is_empty() {
            return None;
        }
        let awake_other: Vec<usize> = action
            .active()
            .filter(|l| !covering.contains(l))
            .collect();
        Some(
            (0..self.m)
                .filter(|&i| {
                    awake_covering.iter().all(|&l| self.covers[l][i])
                        && awake_other.iter().all(|&l| !self.covers[l][i])
                })
                .collect(),
        )
    }

    /// Draws the next state from the row of `state`.
    pub fn transition_sample<R: Rng + ?Sized>(&self, state: usize, rng: &mut R) -> usize {
        if state == self.m {
            return self.m;
        }
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let succ = &self.successors[state];
        for &(j, p) in succ {
            acc += p;
            if u < acc {
                return j;
            }
        }
        succ.last().map(|&(j, _)| j).unwrap_or(self.m)
    }

    /// Draws the observation generated by a target at `state` under `action`.
    pub fn sample_observation<R: Rng + ?Sized>(
        &self,
        state: usize,
        action: &ActionMask,
        rng: &mut R,
    ) -> Observation {
        if state == self.m {
            return Observation::Terminal;
        }
        match &self.sensing {
            SensingSpec::Simple | SensingSpec::OverlapDeterministic { .. } => {
                if self.is_covered(state, action) {
                    Observation::StateSeen(state)
                } else {
                    Observation::Erasure
                }
            }
            SensingSpec::OverlapProbabilistic { q, .. } => {
                match self.ambiguity_set(state, action) {
                    None => Observation::Erasure,
                    Some(set) if set.len() <= 1 => Observation::StateSeen(state),
                    Some(set) => {
                        if rng.random::<f64>() < *q {
                            Observation::StateSeen(state)
                        } else {
                            let others: Vec<usize> =
                                set.into_iter().filter(|&i| i != state).collect();
                            Observation::StateSeen(others[rng.random_range(0..others.len())])
                        }
                    }
                }
            }
            SensingSpec::ContinuousGaussian { sigma, .. } => {
                let noise = Normal::new(0.0, *sigma).expect("sigma validated");
                Observation::Continuous(
                    (0..self.n)
                        .map(|l| {
                            action
                                .is_awake(l)
                                .then(|| self.means[state][l] + noise.sample(rng))
                        })
                        .collect(),
                )
            }
        }
    }

    /// Every discrete observation a target at `next_state` can produce under
    /// `action`, with its probability. Not available for the Gaussian model.
    pub fn observation_outcomes(
        &self,
        next_state: usize,
        action: &ActionMask,
    ) -> Result<Vec<(Observation, f64)>> {
        self.check_action(action)?;
        if next_state == self.m {
            return Ok(vec![(Observation::Terminal, 1.0)]);
        }
        match &self.sensing {
            SensingSpec::Simple | SensingSpec::OverlapDeterministic { .. } => {
                Ok(if self.is_covered(next_state, action) {
                    vec![(Observation::StateSeen(next_state), 1.0)]
                } else {
                    vec![(Observation::Erasure, 1.0)]
                })
            }
            SensingSpec::OverlapProbabilistic { q, .. } => {
                Ok(match self.ambiguity_set(next_state, action) {
                    None => vec![(Observation::Erasure, 1.0)],
                    Some(set) if set.len() <= 1 => vec![(Observation::StateSeen(next_state), 1.0)],
                    Some(set) => {
                        let spread = (1.0 - q) / (set.len() - 1) as f64;
                        set.into_iter()
                            .map(|i| {
                                let p = if i == next_state { *q } else { spread };
                                (Observation::StateSeen(i), p)
                            })
                            .collect()
                    }
                })
            }
            SensingSpec::ContinuousGaussian { .. } => Err(Error::ShapeMismatch),
        }
    }

    /// Probability (discrete models) or density (Gaussian model) of `obs`
    /// for a target at `next_state` under `action`.
    pub fn observation_likelihood(
        &self,
        obs: &Observation,
        next_state: usize,
        action: &ActionMask,
    ) -> Result<f64> {
        match obs {
            Observation::Continuous(_) => Ok(self.observation_log_likelihood(obs, next_state, action)?.exp()),
            _ => self.discrete_likelihood(obs, next_state, action),
        }
    }

    fn discrete_likelihood(
        &self,
        obs: &Observation,
        next_state: usize,
        action: &ActionMask,
    ) -> Result<f64> {
        self.check_action(action)?;
        let terminal = next_state == self.m;
        if let Observation::Terminal = obs {
            return Ok(if terminal { 1.0 } else { 0.0 });
        }
        if self.is_continuous() || matches!(obs, Observation::Continuous(_)) {
            return Err(Error::ShapeMismatch);
        }
        if terminal {
            return Ok(0.0);
        }
        match obs {
            Observation::Continuous(_) => Err(Error::ShapeMismatch),
            Observation::Erasure => Ok(if self.is_covered(next_state, action) { 0.0 } else { 1.0 }),
            Observation::StateSeen(s) => {
                if *s >= self.m {
                    return Err(Error::ShapeMismatch);
                }
                match &self.sensing {
                    SensingSpec::OverlapProbabilistic { q, .. } => {
                        Ok(match self.ambiguity_set(next_state, action) {
                            None => 0.0,
                            Some(set) if set.len() <= 1 => {
                                if *s == next_state {
                                    1.0
                                } else {
                                    0.0
                                }
                            }
                            Some(set) => {
                                if *s == next_state {
                                    *q
                                } else if set.contains(s) {
                                    (1.0 - q) / (set.len() - 1) as f64
                                } else {
                                    0.0
                                }
                            }
                        })
                    }
                    _ => Ok(if *s == next_state && self.is_covered(next_state, action) {
                        1.0
                    } else {
                        0.0
                    }),
                }
            }
            Observation::Terminal => unreachable!(),
        }
    }

    /// Natural log of the Gaussian observation density; `-inf` for
    /// impossible combinations.
    pub fn observation_log_likelihood(
        &self,
        obs: &Observation,
        next_state: usize,
        action: &ActionMask,
    ) -> Result<f64> {
        let Observation::Continuous(values) = obs else {
            return Ok(self.discrete_likelihood(obs, next_state, action)?.ln());
        };
        self.check_action(action)?;
        let SensingSpec::ContinuousGaussian { sigma, .. } = &self.sensing else {
            return Err(Error::ShapeMismatch);
        };
        if values.len() != self.n {
            return Err(Error::ShapeMismatch);
        }
        for (l, v) in values.iter().enumerate() {
            if v.is_some() != action.is_awake(l) {
                return Err(Error::ShapeMismatch);
            }
        }
        if next_state == self.m {
            return Ok(f64::NEG_INFINITY);
        }
        Ok(self.gaussian_log_density(values, next_state, *sigma))
    }

    pub(crate) fn gaussian_log_density(&self, values: &[Option<f64>], state: usize, sigma: f64) -> f64 {
        let norm = -(sigma * (2.0 * std::f64::consts::PI).sqrt()).ln();
        values
            .iter()
            .zip(&self.means[state])
            .filter_map(|(v, mu)| v.map(|s| (s - mu) / sigma))
            .map(|z| norm - 0.5 * z * z)
            .sum()
    }

    /// Tracking part of the stage cost (0 or 1).
    pub fn tracking_cost(
        &self,
        state: usize,
        action: &ActionMask,
        estimate: Option<usize>,
    ) -> Result<f64> {
        self.check_action(action)?;
        if state == self.m {
            return Ok(0.0);
        }
        let missed = match &self.sensing {
            SensingSpec::Simple => !action.is_awake(state),
            SensingSpec::OverlapDeterministic { .. } => !self.is_covered(state, action),
            SensingSpec::OverlapProbabilistic { .. } | SensingSpec::ContinuousGaussian { .. } => {
                estimate.ok_or(Error::MissingEstimate)? != state
            }
        };
        Ok(if missed { 1.0 } else { 0.0 })
    }

    /// Energy plus tracking cost charged when the target arrives at `state`
    /// after `action` was applied. Zero at the exit state.
    pub fn stage_cost(
        &self,
        state: usize,
        action: &ActionMask,
        estimate: Option<usize>,
    ) -> Result<f64> {
        if state == self.m {
            self.check_action(action)?;
            return Ok(0.0);
        }
        let tracking = self.tracking_cost(state, action, estimate)?;
        Ok(self.c * action.active_count() as f64 + tracking)
    }

    /// Expected number of transitions until absorption from each transient
    /// state: the solution of `(I - Q) t = 1`.
    pub fn expected_absorption_time(&self) -> Result<Vec<f64>> {
        let m = self.m;
        let a = nalgebra::DMatrix::from_fn(m, m, |i, j| {
            let delta = if i == j { 1.0 } else { 0.0 };
            delta - self.prob(i, j)
        });
        let b = nalgebra::DVector::from_element(m, 1.0);
        let t = a.lu().solve(&b).ok_or(Error::SingularSystem)?;
        if t.iter().any(|x| !x.is_finite() || *x < 1.0 - 1e-9) {
            return Err(Error::SingularSystem);
        }
        Ok(t.iter().copied().collect())
    }
}

/// Lazy random walk on a line of `m` locations: stay with probability `stay`,
/// otherwise step left or right with equal probability. Steps off either end
/// go to the exit state when `exit_at_boundary`, else they are reflected
/// back onto the boundary location.
pub fn lazy_walk(m: usize, stay: f64, exit_at_boundary: bool) -> Vec<Vec<f64>> {
    let side = (1.0 - stay) / 2.0;
    let mut rows = vec![vec![0.0; m + 1]; m + 1];
    for (i, row) in rows.iter_mut().enumerate().take(m) {
        row[i] += stay;
        let left = if i == 0 {
            if exit_at_boundary { m } else { i }
        } else {
            i - 1
        };
        let right = if i + 1 == m {
            if exit_at_boundary { m } else { i }
        } else {
            i + 1
        };
        row[left] += side;
        row[right] += side;
    }
    rows[m][m] = 1.0;
    rows
}

/// Evenly spaced sensor positions over the location range `1..=m`.
pub fn even_positions(n: usize, m: usize) -> Vec<f64> {
    if n == 1 {
        return vec![(1.0 + m as f64) / 2.0];
    }
    (0..n)
        .map(|l| 1.0 + l as f64 * (m as f64 - 1.0) / (n as f64 - 1.0))
        .collect()
}
