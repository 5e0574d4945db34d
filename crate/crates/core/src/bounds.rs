//! Lower bounds on the optimal energy-tracking cost.
//!
//! For the simple model the per-sensor QMDP value is already a bound. For
//! the Gaussian model the tracking error is bounded below by pairwise
//! hypothesis-testing errors, split into per-sensor shares with weights
//! `lambda` chosen by a small LP at every location.

use crate::error::{Error, Result};
use crate::lp;
use crate::model::{ActionMask, NetworkModel};
use crate::numeric::q_function;
use crate::qmdp::solve_simple_qmdp;

/// Mean signal table and noise level of the Gaussian observation model.
#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisGeometry {
    /// `mean_table[j][l]`: mean reading of sensor `l` with the target at `j`.
    pub mean_table: Vec<Vec<f64>>,
    pub sigma: f64,
}

impl HypothesisGeometry {
    pub fn new(mean_table: Vec<Vec<f64>>, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidParameter(format!("sigma must be positive, got {sigma}")));
        }
        let n = mean_table.first().map_or(0, Vec::len);
        if mean_table.iter().any(|r| r.len() != n || r.iter().any(|x| !x.is_finite())) {
            return Err(Error::InvalidParameter("mean table must be finite and rectangular".into()));
        }
        Ok(Self { mean_table, sigma })
    }

    pub fn from_model(model: &NetworkModel) -> Result<Self> {
        let sigma = model.sigma().ok_or(Error::NotContinuousModel)?;
        Self::new(model.mean_table().to_vec(), sigma)
    }

    /// Normalized distance between hypotheses `k` and `j` over the awake sensors.
    pub fn distance(&self, k: usize, j: usize, action: &ActionMask) -> f64 {
        let sq: f64 = action
            .active()
            .map(|l| {
                let d = self.mean_table[k][l] - self.mean_table[j][l];
                d * d
            })
            .sum();
        sq.sqrt() / self.sigma
    }
}

/// Probability under `H_j` that the likelihood ratio favours `k` over `j`
/// given priors `prior_j` and `prior_k`: `Q(d/2 + ln(prior_j/prior_k)/d)`.
pub fn pairwise_error_prob(
    geometry: &HypothesisGeometry,
    k: usize,
    j: usize,
    action: &ActionMask,
    prior_j: f64,
    prior_k: f64,
) -> Result<f64> {
    if !(prior_j > 0.0 && prior_k > 0.0) {
        return Err(Error::InvalidParameter("priors must be positive".into()));
    }
    let d = geometry.distance(k, j, action);
    if !(d > 0.0) {
        return Err(Error::IndistinguishableHypotheses);
    }
    Ok(q_function(d / 2.0 + (prior_j / prior_k).ln() / d))
}

/// Per-sensor tracking contributions at every location.
#[derive(Debug, Clone, PartialEq)]
pub struct ContributionBounds {
    /// `t1[i][l]`: bound with every sensor awake.
    pub t1: Vec<Vec<f64>>,
    /// `t[i][l]`: bound with sensor `l` asleep and the rest awake.
    pub t: Vec<Vec<f64>>,
}

/// Expected worst pairwise error after one move from `state` under `action`.
fn expected_pairwise_error(
    geometry: &HypothesisGeometry,
    model: &NetworkModel,
    state: usize,
    action: &ActionMask,
) -> Result<f64> {
    let m = model.states();
    let prior: Vec<(usize, f64)> = model
        .successors(state)
        .iter()
        .copied()
        .filter(|&(j, p)| j < m && p > 0.0)
        .collect();
    let mut total = 0.0;
    for &(j, pj) in &prior {
        let mut worst: f64 = 0.0;
        for &(k, pk) in &prior {
            if k == j {
                continue;
            }
            let e = match pairwise_error_prob(geometry, k, j, action, pj, pk) {
                Ok(e) => e,
                // No data: the ratio test reduces to comparing priors.
                Err(Error::IndistinguishableHypotheses) => f64::from(u8::from(pk > pj)),
                Err(e) => return Err(e),
            };
            worst = worst.max(e);
        }
        total += pj * worst;
    }
    Ok(total)
}

pub fn compute_contributions(model: &NetworkModel) -> Result<ContributionBounds> {
    let geometry = HypothesisGeometry::from_model(model)?;
    let (n, m) = (model.sensors(), model.states());
    let awake = ActionMask::all_awake(n);
    let mut t1 = vec![vec![0.0; n]; m];
    let mut t = vec![vec![0.0; n]; m];
    for i in 0..m {
        let all = expected_pairwise_error(&geometry, model, i, &awake)?;
        for l in 0..n {
            t1[i][l] = all;
            let mut without = awake.clone();
            without.set(l, false);
            t[i][l] = expected_pairwise_error(&geometry, model, i, &without)?;
        }
    }
    Ok(ContributionBounds { t1, t })
}

/// Maximizes `sum_l min(lambda_l T1_l + c_term, lambda_l T_l)` over
/// `lambda >= 0`, `sum lambda <= 1`, via the epigraph LP in `(lambda, t)`.
/// Returns the maximizing `lambda` and the optimal value.
pub fn solve_lambda_lp(t1_row: &[f64], t_row: &[f64], c_term: f64) -> Result<(Vec<f64>, f64)> {
    let n = t1_row.len();
    if t_row.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{} all-awake contributions but {} single-sleep ones",
            n,
            t_row.len()
        )));
    }
    let finite_nonneg = |x: &f64| x.is_finite() && *x >= 0.0;
    if !t1_row.iter().all(finite_nonneg) || !t_row.iter().all(finite_nonneg) || !finite_nonneg(&c_term) {
        return Err(Error::InvalidParameter("LP data must be finite and nonnegative".into()));
    }
    if n == 0 {
        return Ok((Vec::new(), 0.0));
    }
    // Variables: lambda_0..lambda_{n-1}, t_0..t_{n-1}.
    let mut objective = vec![0.0; 2 * n];
    objective[n..].fill(1.0);
    let mut rows = Vec::with_capacity(2 * n + 1);
    let mut rhs = Vec::with_capacity(2 * n + 1);
    let mut budget = vec![0.0; 2 * n];
    budget[..n].fill(1.0);
    rows.push(budget);
    rhs.push(1.0);
    for l in 0..n {
        let mut wake = vec![0.0; 2 * n];
        wake[l] = -t1_row[l];
        wake[n + l] = 1.0;
        rows.push(wake);
        rhs.push(c_term);
        let mut sleep = vec![0.0; 2 * n];
        sleep[l] = -t_row[l];
        sleep[n + l] = 1.0;
        rows.push(sleep);
        rhs.push(0.0);
    }
    let sol = lp::maximize(&objective, &rows, &rhs)?;
    Ok((sol.x[..n].to_vec(), sol.value))
}

/// Optimal weights for every location.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaSolution {
    pub lambda: Vec<Vec<f64>>,
    /// Per-location LP values.
    pub objective: Vec<f64>,
}

pub fn solve_lambda(model: &NetworkModel, c: f64, bounds: &ContributionBounds) -> Result<LambdaSolution> {
    let m = model.states();
    let mut lambda = Vec::with_capacity(m);
    let mut objective = Vec::with_capacity(m);
    for i in 0..m {
        let (l, v) = solve_lambda_lp(&bounds.t1[i], &bounds.t[i], c * survival(model, i))?;
        lambda.push(l);
        objective.push(v);
    }
    Ok(LambdaSolution { lambda, objective })
}

fn survival(model: &NetworkModel, state: usize) -> f64 {
    1.0 - model.prob(state, model.terminal())
}

/// Per-sensor QMDP value summed over sensors at every point-mass belief.
pub fn simple_model_lower_bound(model: &NetworkModel) -> Result<Vec<f64>> {
    if !model.is_simple() {
        return Err(Error::NotSimpleModel);
    }
    let values = solve_simple_qmdp(model)?;
    Ok((0..model.states()).map(|i| values.total_at(i)).collect())
}

/// Bound split into its energy and tracking parts.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundParts {
    pub energy: Vec<f64>,
    pub tracking: Vec<f64>,
}

impl BoundParts {
    pub fn total(&self) -> Vec<f64> {
        self.energy.iter().zip(&self.tracking).map(|(e, t)| e + t).collect()
    }
}

/// Expected visits to each location from every start, summing `e_b P^j`
/// until the surviving mass drops below `eps`.
fn truncated_visits(model: &NetworkModel, eps: f64) -> Vec<Vec<f64>> {
    let m = model.states();
    (0..m)
        .map(|b| {
            let mut visits = vec![0.0; m];
            let mut mass = vec![0.0; m];
            mass[b] = 1.0;
            loop {
                let alive: f64 = mass.iter().sum();
                if alive < eps {
                    break;
                }
                let mut next = vec![0.0; m];
                for (i, &p) in mass.iter().enumerate() {
                    if p == 0.0 {
                        continue;
                    }
                    visits[i] += p;
                    for &(j, q) in model.successors(i) {
                        if j < m {
                            next[j] += p * q;
                        }
                    }
                }
                mass = next;
            }
            visits
        })
        .collect()
}

/// Hypothesis-testing lower bound for the Gaussian model at price `c`,
/// as energy and tracking parts per start location.
pub fn continuous_lower_bound_parts(
    model: &NetworkModel,
    c: f64,
    truncation_eps: f64,
) -> Result<BoundParts> {
    if !model.is_continuous() {
        return Err(Error::NotContinuousModel);
    }
    if !(truncation_eps > 0.0) {
        return Err(Error::InvalidParameter("truncation_eps must be positive".into()));
    }
    if !(c >= 0.0) || !c.is_finite() {
        return Err(Error::InvalidParameter(format!("invalid energy price {c}")));
    }
    let m = model.states();
    let bounds = compute_contributions(model)?;
    let sol = solve_lambda(model, c, &bounds)?;
    // Per-location stage bound, split by the cheaper branch of each sensor.
    let mut stage_energy = vec![0.0; m];
    let mut stage_tracking = vec![0.0; m];
    for i in 0..m {
        let c_term = c * survival(model, i);
        for (l, &lam) in sol.lambda[i].iter().enumerate() {
            let wake = lam * bounds.t1[i][l] + c_term;
            let sleep = lam * bounds.t[i][l];
            if wake < sleep {
                stage_energy[i] += c_term;
                stage_tracking[i] += lam * bounds.t1[i][l];
            } else {
                stage_tracking[i] += sleep;
            }
        }
    }
    let visits = truncated_visits(model, truncation_eps);
    let weigh = |stage: &[f64]| -> Vec<f64> {
        visits
            .iter()
            .map(|v| v.iter().zip(stage).map(|(a, b)| a * b).sum())
            .collect()
    };
    Ok(BoundParts {
        energy: weigh(&stage_energy),
        tracking: weigh(&stage_tracking),
    })
}

/// Total of [`continuous_lower_bound_parts`] per start location.
pub fn continuous_lower_bound(model: &NetworkModel, c: f64, truncation_eps: f64) -> Result<Vec<f64>> {
    Ok(continuous_lower_bound_parts(model, c, truncation_eps)?.total())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{even_positions, lazy_walk, SensingSpec};

    fn line_geometry(d: f64) -> HypothesisGeometry {
        HypothesisGeometry::new(vec![vec![0.0], vec![d]], 1.0).unwrap()
    }

    #[test]
    fn pairwise_examples() {
        let g = line_geometry(2.0);
        let one = ActionMask::all_awake(1);
        let e = pairwise_error_prob(&g, 1, 0, &one, 0.5, 0.5).unwrap();
        assert!((e - 0.158655).abs() < 1e-6);
        let e = pairwise_error_prob(&g, 1, 0, &one, 2f64.exp(), 1.0).unwrap();
        assert!((e - 0.022750).abs() < 1e-6);
        assert!(matches!(
            pairwise_error_prob(&g, 1, 0, &ActionMask::all_asleep(1), 0.5, 0.5),
            Err(Error::IndistinguishableHypotheses)
        ));
    }

    fn gaussian(n: usize, p: Vec<Vec<f64>>) -> NetworkModel {
        let m = p.len() - 1;
        NetworkModel::new(
            "g",
            n,
            p,
            SensingSpec::ContinuousGaussian {
                positions: even_positions(n, m),
                sigma: 1.0,
            },
            0.2,
        )
        .unwrap()
    }

    #[test]
    fn contributions_vanish_without_competing_hypotheses() {
        let p = vec![
            vec![0.0, 0.0, 0.0, 1.0],
            vec![0.0, 0.5, 0.0, 0.5],
            vec![0.3, 0.3, 0.3, 0.1],
            vec![0.0, 0.0, 0.0, 1.0],
        ];
        let model = gaussian(2, p);
        let cb = compute_contributions(&model).unwrap();
        assert_eq!(cb.t1[0], vec![0.0, 0.0]);
        assert_eq!(cb.t[0], vec![0.0, 0.0]);
        assert_eq!(cb.t1[1], vec![0.0, 0.0]);
        assert_eq!(cb.t[1], vec![0.0, 0.0]);
        assert!(cb.t1[2][0] > 0.0);
    }

    #[test]
    fn two_successor_contributions_match_direct_q() {
        let p = vec![
            vec![0.7, 0.2, 0.0, 0.1],
            vec![0.3, 0.3, 0.3, 0.1],
            vec![0.0, 0.5, 0.0, 0.5],
            vec![0.0, 0.0, 0.0, 1.0],
        ];
        let model = gaussian(2, p);
        let cb = compute_contributions(&model).unwrap();
        let m = model.mean_table();
        // Sensor 1 asleep: only sensor 0 distinguishes locations 0 and 1.
        let d = (m[0][0] - m[1][0]).abs();
        let direct = |pj: f64, pk: f64| q_function(d / 2.0 + (pj / pk).ln() / d);
        let expected = 0.7 * direct(0.7, 0.2) + 0.2 * direct(0.2, 0.7);
        assert!((cb.t[0][1] - expected).abs() < 1e-14);
    }

    #[test]
    fn lambda_lp_examples() {
        let (lambda, v) = solve_lambda_lp(&[0.1], &[0.5], 0.2).unwrap();
        assert!((lambda[0] - 1.0).abs() < 1e-12);
        assert!((v - 0.3).abs() < 1e-12);
        let (_, v) = solve_lambda_lp(&[0.1, 0.2], &[0.0, 0.0], 0.3).unwrap();
        assert_eq!(v, 0.0);
        let (lambda, v) = solve_lambda_lp(&[0.1, 0.1], &[0.4, 0.4], 0.2).unwrap();
        assert!((v - 0.4).abs() < 1e-6);
        assert!(lambda.iter().sum::<f64>() <= 1.0 + 1e-9);
    }

    #[test]
    fn certain_exit_gives_zero_bound() {
        let p = vec![
            vec![0.0, 0.0, 1.0],
            vec![0.5, 0.0, 0.5],
            vec![0.0, 0.0, 1.0],
        ];
        let model = gaussian(2, p);
        let jb = continuous_lower_bound(&model, 0.3, 1e-9).unwrap();
        assert_eq!(jb[0], 0.0);
    }

    #[test]
    fn zero_price_bound_is_all_awake_tracking() {
        let model = gaussian(3, lazy_walk(6, 0.5, true));
        let parts = continuous_lower_bound_parts(&model, 0.0, 1e-10).unwrap();
        assert!(parts.energy.iter().all(|&e| e == 0.0));
        let cb = compute_contributions(&model).unwrap();
        let visits = truncated_visits(&model, 1e-10);
        for b in 0..6 {
            // With no energy price the LP puts all weight on the best T1.
            let expected: f64 = (0..6)
                .map(|i| visits[b][i] * cb.t1[i].iter().copied().fold(0.0, f64::max))
                .sum();
            assert!((parts.tracking[b] - expected).abs() < 1e-9);
        }
    }

    #[test]
    fn simple_bound_of_immediate_exit_is_zero() {
        let p = vec![vec![0.0, 0.0, 1.0], vec![0.0, 0.0, 1.0], vec![0.0, 0.0, 1.0]];
        let model = NetworkModel::new("x", 2, p, SensingSpec::Simple, 0.5).unwrap();
        assert_eq!(simple_model_lower_bound(&model).unwrap(), vec![0.0, 0.0]);
        let g = gaussian(2, lazy_walk(3, 0.5, true));
        assert!(matches!(simple_model_lower_bound(&g), Err(Error::NotSimpleModel)));
    }
}
