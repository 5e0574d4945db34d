//! End-to-end acceptance checks. Each criterion is checked against an
//! oracle written here, independently of the library code paths it
//! exercises. Runs without the libtest harness so one PASS/FAIL line per
//! criterion is always printed.

use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use sensorsched::belief::{bayes_update, sample_belief_set};
use sensorsched::bounds::{pairwise_error_prob, simple_model_lower_bound, solve_lambda_lp, HypothesisGeometry};
use sensorsched::io::load_model;
use sensorsched::lp;
use sensorsched::pointbased::{
    initial_value_function, perseus_iteration, solve_perseus, value_at, all_asleep_value_function,
    SolverParams, ValueFunction,
};
use sensorsched::qmdp::{learn_tracking_contributions, solve_simple_qmdp, ContributionMatrix, QmdpPolicy};
use sensorsched::sim::{evaluate_policy, lower_bound_point, Policy, TradeoffPoint, DEFAULT_BOUND_EPS};
use sensorsched::{ActionMask, Belief, NetworkModel, Observation, SensingSpec};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Random proper chain over `m` locations; every row exits with
/// probability at least `min_exit`.
fn random_rows(m: usize, min_exit: f64, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut rows = Vec::with_capacity(m + 1);
    for _ in 0..m {
        let exit = min_exit + rng.random::<f64>() * 0.4;
        let w: Vec<f64> = (0..m)
            .map(|_| if rng.random_bool(0.7) { rng.random::<f64>() } else { 0.0 })
            .collect();
        let total: f64 = w.iter().sum();
        let mut row: Vec<f64> = if total > 0.0 {
            w.iter().map(|x| x / total * (1.0 - exit)).collect()
        } else {
            vec![0.0; m]
        };
        row.push(if total > 0.0 { exit } else { 1.0 });
        rows.push(row);
    }
    let mut last = vec![0.0; m + 1];
    last[m] = 1.0;
    rows.push(last);
    rows
}

fn random_simple(m: usize, c: f64, rng: &mut ChaCha8Rng) -> NetworkModel {
    NetworkModel::new("random", m, random_rows(m, 0.05, rng), SensingSpec::Simple, c).unwrap()
}

fn random_mask(n: usize, rng: &mut ChaCha8Rng) -> ActionMask {
    let bits: Vec<bool> = (0..n).map(|_| rng.random_bool(0.5)).collect();
    ActionMask::from_bits(&bits)
}

fn all_masks(n: usize) -> Vec<Vec<bool>> {
    (0..1usize << n)
        .map(|s| (0..n).map(|l| s >> l & 1 == 1).collect())
        .collect()
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst: f64 = 0.0;
    let cases = 10_000;
    for _ in 0..cases {
        let m = rng.random_range(2..=8);
        let model = random_simple(m, 0.3, &mut rng);
        let rows = model.transition_rows();
        let mut w: Vec<f64> = (0..=m).map(|_| rng.random::<f64>()).collect();
        if rng.random_bool(0.5) {
            w[m] = 0.0;
        }
        let total: f64 = w.iter().sum();
        let belief = Belief::from_mass(w.iter().map(|x| x / total).collect()).unwrap();
        let action = random_mask(m, &mut rng);

        // Row vector times matrix, written out.
        let mut prior = vec![0.0; m + 1];
        for i in 0..=m {
            for j in 0..=m {
                prior[j] += belief.mass()[i] * rows[i][j];
            }
        }
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut state = (0..=m).rev().find(|&j| prior[j] > 0.0).unwrap();
        for (j, p) in prior.iter().enumerate() {
            acc += p;
            if u < acc && *p > 0.0 {
                state = j;
                break;
            }
        }
        let obs = model.sample_observation(state, &action, &mut rng);
        let expected: Vec<f64> = match obs {
            Observation::Terminal => (0..=m).map(|j| f64::from(u8::from(j == m))).collect(),
            Observation::StateSeen(b) => (0..=m).map(|j| f64::from(u8::from(j == b))).collect(),
            Observation::Erasure => {
                let kept: Vec<f64> = (0..=m)
                    .map(|j| if j == m || action.is_awake(j) { 0.0 } else { prior[j] })
                    .collect();
                let z: f64 = kept.iter().sum();
                kept.iter().map(|x| x / z).collect()
            }
            Observation::Continuous(_) => unreachable!(),
        };
        let got = bayes_update(&model, &belief, &action, &obs).map_err(|e| e.to_string())?;
        for (a, b) in got.mass().iter().zip(&expected) {
            worst = worst.max((a - b).abs());
        }
    }
    check(worst <= 1e-12, format!("{cases} cases, max deviation {worst:.2e}"))
}

/// Observable-after-control value iteration over the joint action space.
fn joint_value_iteration(model: &NetworkModel) -> Vec<f64> {
    let m = model.states();
    let rows = model.transition_rows();
    let masks = all_masks(model.sensors());
    let mut v = vec![0.0; m];
    loop {
        let next: Vec<f64> = (0..m)
            .map(|i| {
                masks
                    .iter()
                    .map(|u| {
                        let energy = model.c() * u.iter().filter(|&&b| b).count() as f64;
                        (0..m)
                            .map(|j| rows[i][j] * (energy + f64::from(u8::from(!u[j])) + v[j]))
                            .sum::<f64>()
                    })
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        let delta = next.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        v = next;
        if delta < 1e-14 {
            return v;
        }
    }
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let m = rng.random_range(1..=5);
        let c = rng.random_range(0.01..1.0);
        let model = random_simple(m, c, &mut rng);
        let joint = joint_value_iteration(&model);
        let split = solve_simple_qmdp(&model).map_err(|e| e.to_string())?;
        for (i, v) in joint.iter().enumerate() {
            worst = worst.max((v - split.total_at(i)).abs());
        }
    }
    check(worst <= 1e-8, format!("20 models, max |joint - sum of per-sensor| {worst:.2e}"))
}

/// Drops alpha vectors that are nowhere strictly below the others.
fn prune(mut cands: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    cands.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cands.dedup();
    let dominated = |a: &Vec<f64>, set: &[Vec<f64>]| {
        set.iter().any(|b| b != a && b.iter().zip(a).all(|(x, y)| x <= y))
    };
    let mut kept: Vec<Vec<f64>> = cands.iter().filter(|a| !dominated(a, &cands)).cloned().collect();
    let m = kept.first().map_or(0, Vec::len);
    let mut k = 0;
    while k < kept.len() && kept.len() > 1 {
        // max delta s.t. p.(a_k - a_l) + delta <= 0 for all l != k, sum p <= 1.
        let mut rows = Vec::new();
        for (l, other) in kept.iter().enumerate() {
            if l != k {
                let mut row: Vec<f64> = (0..m).map(|i| kept[k][i] - other[i]).collect();
                row.push(1.0);
                rows.push(row);
            }
        }
        let mut simplex = vec![1.0; m];
        simplex.push(0.0);
        rows.push(simplex);
        let mut rhs = vec![0.0; rows.len()];
        *rhs.last_mut().unwrap() = 1.0;
        let mut objective = vec![0.0; m];
        objective.push(1.0);
        let margin = lp::maximize(&objective, &rows, &rhs).unwrap().value;
        if margin > 1e-10 {
            k += 1;
        } else {
            kept.remove(k);
        }
    }
    kept
}

/// Optimal finite-horizon cost from each point mass by exact alpha-vector
/// value iteration, run until the surviving mass is below `residual`.
fn truncated_optimal_cost(model: &NetworkModel, residual: f64) -> Vec<f64> {
    let m = model.states();
    let rows = model.transition_rows();
    let masks = all_masks(model.sensors());
    let mut gamma = vec![vec![0.0; m]];
    let mut survival = vec![1.0; m];
    while survival.iter().copied().fold(0.0, f64::max) > residual {
        let seen: Vec<f64> = (0..m)
            .map(|j| gamma.iter().map(|a| a[j]).fold(f64::INFINITY, f64::min))
            .collect();
        let mut cands = Vec::new();
        for u in &masks {
            let energy = model.c() * u.iter().filter(|&&b| b).count() as f64;
            for g in &gamma {
                cands.push(
                    (0..m)
                        .map(|i| {
                            (0..m)
                                .map(|j| rows[i][j] * (energy + if u[j] { seen[j] } else { 1.0 + g[j] }))
                                .sum()
                        })
                        .collect(),
                );
            }
        }
        gamma = prune(cands);
        survival = (0..m)
            .map(|i| (0..m).map(|j| rows[i][j] * survival[j]).sum())
            .collect();
    }
    (0..m)
        .map(|i| gamma.iter().map(|a| a[i]).fold(f64::INFINITY, f64::min))
        .collect()
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut slack = f64::INFINITY;
    for _ in 0..10 {
        let c = rng.random_range(0.01..1.0);
        let model = NetworkModel::new("random", 3, random_rows(3, 0.1, &mut rng), SensingSpec::Simple, c)
            .map_err(|e| e.to_string())?;
        let optimal = truncated_optimal_cost(&model, 1e-10);
        let bound = simple_model_lower_bound(&model).map_err(|e| e.to_string())?;
        for (o, b) in optimal.iter().zip(&bound) {
            slack = slack.min(o - b);
        }
    }
    check(
        slack >= -1e-6,
        format!("10 models, min(optimal - bound) {slack:.3e}"),
    )
}

fn criterion_4() -> Outcome {
    let model = load_model(config("linear41.json")).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let beliefs = sample_belief_set(&model, 500, &mut rng).map_err(|e| e.to_string())?;
    let params = SolverParams::default();
    let values = |vf: &ValueFunction| -> Vec<f64> {
        beliefs.iter().map(|b| value_at(vf, b).unwrap()).collect()
    };
    let terminal = Belief::terminal_point(model.states());
    let mut worst_rise = f64::NEG_INFINITY;
    let mut sums_ok = true;
    let mut iterations = 0;
    let starts = [
        (all_asleep_value_function(&model).unwrap(), 200),
        (initial_value_function(&model).unwrap(), 50),
    ];
    for (mut vf, iters) in starts {
        let mut before = values(&vf);
        let mut sum_before: f64 = before.iter().sum();
        for _ in 0..iters {
            let (next, stats) = perseus_iteration(&model, &vf, &beliefs, &params, &mut rng)
                .map_err(|e| e.to_string())?;
            let after = values(&next);
            for (a, b) in after.iter().zip(&before) {
                worst_rise = worst_rise.max(a - b);
            }
            sums_ok &= stats.sum_value <= sum_before + 1e-9;
            sums_ok &= value_at(&next, &terminal).unwrap() == 0.0;
            sum_before = stats.sum_value;
            before = after;
            vf = next;
            iterations += 1;
        }
    }
    check(
        worst_rise <= 1e-9 && sums_ok,
        format!(
            "{iterations} iterations on 500 beliefs, max value increase {worst_rise:.2e}, sum series non-increasing: {sums_ok}"
        ),
    )
}

fn anchored(p: &TradeoffPoint) -> bool {
    p.active_per_step <= 0.01 && (p.tracking_per_step - 1.0).abs() <= 0.05
}

fn criterion_5() -> Outcome {
    let base = load_model(config("linear41.json")).map_err(|e| e.to_string())?;
    let model = base.with_c(1.0).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let beliefs = sample_belief_set(&model, 500, &mut rng).map_err(|e| e.to_string())?;
    let (vf, _) = solve_perseus(&model, &beliefs, &SolverParams::default(), &mut rng)
        .map_err(|e| e.to_string())?;
    let qmdp = |m: &NetworkModel| {
        Policy::Qmdp(QmdpPolicy::from_contributions(m, ContributionMatrix::simple_analytic(m).unwrap()).unwrap())
    };
    let mut points = Vec::new();
    for policy in [qmdp(&model), Policy::PointBased(vf), Policy::AllAsleep] {
        points.push(evaluate_policy(&model, &policy, 1000, &mut rng).map_err(|e| e.to_string())?);
    }
    points.push(lower_bound_point(&model, DEFAULT_BOUND_EPS).map_err(|e| e.to_string())?);
    let anchors_ok = points.iter().all(anchored);

    // Saturation: QMDP's activity falls as c rises and reaches zero at c = 1.
    let mut activity = Vec::new();
    for c in [0.1, 0.3, 0.6, 1.0] {
        let priced = base.with_c(c).unwrap();
        activity.push(evaluate_policy(&priced, &qmdp(&priced), 200, &mut rng).unwrap().active_per_step);
    }
    let saturates = activity.windows(2).all(|w| w[1] <= w[0]) && activity[3] <= 0.01;

    let summary: Vec<String> = points
        .iter()
        .map(|p| format!("{} {:.3}/{:.3}", p.policy, p.active_per_step, p.tracking_per_step))
        .collect();
    check(
        anchors_ok && saturates,
        format!(
            "active/tracking at c=1: {}; qmdp activity over c {:?}",
            summary.join(", "),
            activity.iter().map(|a| (a * 1000.0).round() / 1000.0).collect::<Vec<_>>()
        ),
    )
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let trials = 100_000;
    let mut worst_z: f64 = 0.0;
    for _ in 0..50 {
        let n = rng.random_range(1..=4);
        let means: Vec<Vec<f64>> = (0..2)
            .map(|_| (0..n).map(|_| rng.random_range(0.0..2.5)).collect())
            .collect();
        let sigma = rng.random_range(0.5..2.0);
        let (prior_j, prior_k) = (rng.random_range(0.05..1.0), rng.random_range(0.05..1.0));
        let action = ActionMask::all_awake(n);
        let geometry = HypothesisGeometry::new(means.clone(), sigma).map_err(|e| e.to_string())?;
        let formula = pairwise_error_prob(&geometry, 1, 0, &action, prior_j, prior_k)
            .map_err(|e| e.to_string())?;
        // Under H_0 (j), count likelihood ratios p(s|k)/p(s|j) above prior_j/prior_k.
        let threshold = (prior_j / prior_k).ln();
        let mut hits = 0usize;
        for _ in 0..trials {
            let mut log_ratio = 0.0;
            for l in 0..n {
                let z: f64 = StandardNormal.sample(&mut rng);
                let s = means[0][l] + sigma * z;
                let dj = (s - means[0][l]) / sigma;
                let dk = (s - means[1][l]) / sigma;
                log_ratio += 0.5 * (dj * dj - dk * dk);
            }
            if log_ratio > threshold {
                hits += 1;
            }
        }
        let freq = hits as f64 / trials as f64;
        let se = (formula * (1.0 - formula) / trials as f64).sqrt().max(1e-12);
        worst_z = worst_z.max((freq - formula).abs() / se);
    }
    check(worst_z <= 3.0, format!("50 instances x {trials} trials, max |z| {worst_z:.2}"))
}

/// Best grid allocation at resolution 1/steps, by dynamic programming over
/// the shared budget.
fn grid_optimum(t1: &[f64], t: &[f64], c: f64, steps: usize) -> f64 {
    let mut best = vec![0.0; steps + 1];
    for (a, b) in t1.iter().zip(t) {
        let gain = |k: usize| {
            let lambda = k as f64 / steps as f64;
            (lambda * a + c).min(lambda * b)
        };
        let mut next = vec![f64::NEG_INFINITY; steps + 1];
        for used in 0..=steps {
            for k in 0..=used {
                next[used] = next[used].max(best[used - k] + gain(k));
            }
        }
        best = next;
    }
    best[steps]
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let steps = 1000;
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.random_range(1..=4);
        let c = rng.random_range(0.0..0.3);
        let mut t1 = Vec::new();
        let mut t = Vec::new();
        while t.len() < n {
            let a = rng.random_range(0.0..0.5);
            // Breakpoints on the grid keep the grid optimum exact.
            let b = if rng.random_bool(0.25) {
                rng.random_range(0.0..=a)
            } else {
                a + c / (rng.random_range(1..=steps) as f64 / steps as f64)
            };
            if b <= 1.0 {
                t1.push(a);
                t.push(b);
            }
        }
        let (_, value) = solve_lambda_lp(&t1, &t, c).map_err(|e| e.to_string())?;
        worst = worst.max((value - grid_optimum(&t1, &t, c, steps)).abs());
    }
    let (_, worked) = solve_lambda_lp(&[0.1, 0.1], &[0.4, 0.4], 0.2).map_err(|e| e.to_string())?;
    check(
        worst <= 1e-4 && (worked - 0.4).abs() <= 1e-9,
        format!("100 instances, max |LP - grid| {worst:.2e}; worked instance {worked:.6}"),
    )
}

fn criterion_8() -> Outcome {
    let base = load_model(config("continuous10x21.json")).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let beliefs = sample_belief_set(&base, 300, &mut rng).map_err(|e| e.to_string())?;
    let contributions = learn_tracking_contributions(&base, 2000, &mut rng).map_err(|e| e.to_string())?;
    let params = SolverParams {
        obs_samples: 30,
        ..SolverParams::default()
    };
    let mut ok = true;
    let mut detail = Vec::new();
    for c in [0.05, 0.1, 0.2, 0.4] {
        let model = base.with_c(c).map_err(|e| e.to_string())?;
        let bound = lower_bound_point(&model, DEFAULT_BOUND_EPS).map_err(|e| e.to_string())?.total_cost;
        let (vf, _) = solve_perseus(&model, &beliefs, &params, &mut rng).map_err(|e| e.to_string())?;
        let qmdp = Policy::Qmdp(QmdpPolicy::from_contributions(&model, contributions.clone()).unwrap());
        let mut costs = Vec::new();
        for policy in [qmdp, Policy::PointBased(vf)] {
            let p = evaluate_policy(&model, &policy, 1000, &mut rng).map_err(|e| e.to_string())?;
            ok &= bound <= p.total_cost - 3.0 * p.cost_stderr;
            costs.push(format!("{:.1}±{:.1}", p.total_cost, p.cost_stderr));
        }
        detail.push(format!("c={c}: bound {bound:.1}, qmdp {}, pointbased {}", costs[0], costs[1]));
    }
    check(ok, detail.join("; "))
}

fn criterion_9() -> Outcome {
    let base = load_model(config("overlap12x20.json")).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let beliefs = sample_belief_set(&base, 500, &mut rng).map_err(|e| e.to_string())?;
    let contributions = learn_tracking_contributions(&base, 2000, &mut rng).map_err(|e| e.to_string())?;
    let params = SolverParams {
        max_iterations: 200,
        ..SolverParams::default()
    };
    let episodes = 2000;
    let mut ok = true;
    let mut detail = Vec::new();
    for c in [0.1, 0.2, 0.4] {
        let model = base.with_c(c).map_err(|e| e.to_string())?;
        let (vf, _) = solve_perseus(&model, &beliefs, &params, &mut rng).map_err(|e| e.to_string())?;
        let qmdp = Policy::Qmdp(QmdpPolicy::from_contributions(&model, contributions.clone()).unwrap());
        let q = evaluate_policy(&model, &qmdp, episodes, &mut rng).map_err(|e| e.to_string())?;
        let pb = evaluate_policy(&model, &Policy::PointBased(vf), episodes, &mut rng)
            .map_err(|e| e.to_string())?;
        let se = q.cost_stderr.hypot(pb.cost_stderr);
        ok &= pb.total_cost <= q.total_cost + 3.0 * se;
        detail.push(format!(
            "c={c}: pointbased {:.1}±{:.1}, qmdp {:.1}±{:.1}",
            pb.total_cost, pb.cost_stderr, q.total_cost, q.cost_stderr
        ));
    }
    check(ok, format!("{episodes} episodes each; {}", detail.join("; ")))
}

fn criterion_10() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let run = |name: &str, seed: &str| -> Result<Vec<u8>, String> {
        let out = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_sensorsched"))
            .args(["sweep", "--model"])
            .arg(config("overlap12x20.json"))
            .args([
                "--policy", "pointbased", "--c-list", "0.1,0.3", "--episodes", "300", "--beliefs", "100",
                "--max-iterations", "20", "--seed", seed, "--csv",
            ])
            .arg(&out)
            .status()
            .map_err(|e| e.to_string())?;
        if !status.success() {
            return Err(format!("sweep exited with {status}"));
        }
        std::fs::read(&out).map_err(|e| e.to_string())
    };
    let first = run("a.csv", "7")?;
    let second = run("b.csv", "7")?;
    let other = run("c.csv", "8")?;
    check(
        first == second && first != other,
        format!(
            "{} bytes, identical for equal seeds: {}, differs for another seed: {}",
            first.len(),
            first == second,
            first != other
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("filter matches the closed form", criterion_1),
        ("per-sensor decomposition equals joint value iteration", criterion_2),
        ("lower bound below the optimal cost", criterion_3),
        ("Perseus values never increase", criterion_4),
        ("c = 1 anchor and saturation", criterion_5),
        ("pairwise error formula vs Monte Carlo", criterion_6),
        ("lambda LP vs grid search", criterion_7),
        ("continuous bound below executed policies", criterion_8),
        ("point-based no worse than QMDP on overlap", criterion_9),
        ("seeded sweep is reproducible", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (tag, detail) = match run() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!(
            "criterion {:>2} {tag}: {name} ({detail}) [{:.1}s]",
            i + 1,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
