//! Built-in self-check suite: the solver's pieces against independent
//! oracles and their defining invariants, on randomly drawn small networks.
//!
//! Every check is a plain function of a case count and a seed so the same
//! code backs both `validate` and larger offline runs.

use std::fmt;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

use crate::brd::{run_brd, BrdOptions, SurrogateObjective};
use crate::gen::{generate, GenConfig};
use crate::learning::{learn_observed, ConcaveObjective, LearningParams};
use crate::model::{self, max_rate_bound, UserView};
use crate::optimizer::{maximize_gee, SolverOptions, StopReason};
use crate::oracle::{
    finite_diff, grid_search_gee, project_capped_simplex, projected_gradient_reference, single_link_optimum,
    water_filling, GridSpec, PgOptions,
};
use crate::qos::{self, QosMode};
use crate::scenario::{PowerAllocation, Scenario};
use crate::sweep::{run_sweep, to_csv_string, SweepConfig, SweptParam};

#[derive(Clone, Debug)]
pub struct CheckReport {
    pub name: &'static str,
    pub passed: bool,
    pub cases: usize,
    /// Worst observed quantity, or the first failure.
    pub detail: String,
    pub elapsed: Duration,
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<4} {:<22} {:>5} cases  {:>8.2?}  {}",
            if self.passed { "ok" } else { "FAIL" },
            self.name,
            self.cases,
            self.elapsed,
            self.detail
        )
    }
}

fn report(name: &'static str, cases: usize, start: Instant, failure: Option<String>, worst: String) -> CheckReport {
    CheckReport {
        name,
        passed: failure.is_none(),
        cases,
        detail: failure.unwrap_or(worst),
        elapsed: start.elapsed(),
    }
}

/// A scenario with `1..=max_k` users and `1..=max_n` subcarriers, `P_max`
/// in `[-30, 10]` dBW and `ξ` ratio drawn from `{0, 0.01, 0.1}`.
pub fn random_scenario(rng: &mut ChaCha8Rng, max_k: usize, max_n: usize) -> Scenario {
    let cfg = GenConfig {
        users: rng.random_range(1..=max_k),
        subcarriers: rng.random_range(1..=max_n),
        p_max_dbw: rng.random_range(-30.0..=10.0),
        xi_ratio: [0.0, 0.01, 0.1][rng.random_range(0..3)],
        seed: rng.random(),
        ..GenConfig::default()
    };
    generate(&cfg).expect("generator defaults are valid")
}

/// A point strictly inside every user's budget simplex.
pub fn random_point(rng: &mut ChaCha8Rng, s: &Scenario) -> PowerAllocation {
    let mut p = PowerAllocation::zeros(s.user_count, s.subcarrier_count);
    for k in 0..s.user_count {
        let w: Vec<f64> = (0..=s.subcarrier_count).map(|_| rng.sample::<f64, _>(Exp1)).collect();
        let total: f64 = w.iter().sum();
        let row: Vec<f64> = w[1..].iter().map(|x| s.p_max[k] * x / total).collect();
        p.set_user(k, &row);
    }
    p
}

/// A price `λ` between zero and twice the GEE of `p` per unit bandwidth.
fn random_lambda(rng: &mut ChaCha8Rng, s: &Scenario, p: &PowerAllocation) -> f64 {
    rng.random_range(0.0..=2.0) * model::sum_rate(s, p) / model::total_power(s, p)
}

fn rel_err(a: f64, b: f64, scale: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(scale).max(f64::MIN_POSITIVE)
}

/// Rounding error of a difference quotient with step `h` of a function
/// whose summands add up to `magnitude` in absolute value.
fn stencil_noise(magnitude: f64, h: f64, one_sided: bool) -> f64 {
    let evaluations = if one_sided { 2.0 } else { 1.0 };
    8.0 * evaluations * f64::EPSILON * magnitude / h
}

/// `ξ`- and `η`-weighted receiver loads of user `i` on subcarrier `n`.
fn loads(s: &Scenario, p: &PowerAllocation, i: usize, n: usize) -> (f64, f64) {
    let xi = s.noise[n] + s.xi[i][n] * p.get(i, n) + model::interference(s, p, i, n);
    (xi, xi + s.alpha[i][n] * p.get(i, n))
}

/// Sum of the absolute values of the terms the surrogate utility adds up.
fn surrogate_magnitude(s: &Scenario, k: usize, p: &PowerAllocation, lambda: f64) -> f64 {
    let mut m = lambda * model::total_power(s, p);
    for n in 0..s.subcarrier_count {
        m += model::log2_1p(model::sinr(s, p, k, n));
        for i in (0..s.user_count).filter(|&i| i != k) {
            let (dx, de) = loads(s, p, i, n);
            m += dx.log2().abs() + de.log2().abs();
        }
    }
    m
}

/// Propagated size of the rounding in `ρ Σ log2(R_i - R_min,i)`: each rate
/// is rounded relative to its own size, amplified by `1/slack`.
fn barrier_magnitude(s: &Scenario, p: &PowerAllocation, rho: f64) -> f64 {
    let rates = model::user_rates(s, p);
    let terms = s.subcarrier_count as f64;
    rho * rates
        .iter()
        .zip(&s.r_min)
        .map(|(r, m)| {
            let slack = r - m;
            slack.log2().abs() + terms * r / (slack * std::f64::consts::LN_2)
        })
        .sum::<f64>()
}

/// Marginal utilities against central differences of the surrogate
/// utility, and barrier gradient terms against differences of the barrier.
///
/// The relative error is taken against the largest of the two values and the
/// size of the terms being summed, after removing the stencil's rounding
/// error. Cases where that rounding dominates are counted.
pub fn gradient_check(cases: usize, seed: u64) -> CheckReport {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut worst_m, mut worst_b) = (0.0f64, 0.0f64);
    let mut rounding_limited = 0;
    let mut failure = None;
    for case in 0..cases {
        let mut s = random_scenario(&mut rng, 4, 4);
        let p = random_point(&mut rng, &s);
        let p_bar = random_point(&mut rng, &s);
        let lambda = random_lambda(&mut rng, &s, &p);
        let k = rng.random_range(0..s.user_count);
        let n = rng.random_range(0..s.subcarrier_count);
        let x = p.as_slice().to_vec();
        let idx = k * s.subcarrier_count + n;
        let h = 1e-4 * x[idx];
        let nsub = s.subcarrier_count;
        let at = move |v: &[f64]| PowerAllocation::from_rows(&v.chunks(nsub).map(<[f64]>::to_vec).collect::<Vec<_>>());

        let phi = model::phi(&s, k, n, &p, p_bar.user(k));
        let nu = lambda * s.mu[k][n] - phi;
        let analytic = model::marginal_utility(&s, k, n, &p, nu);
        let fd = finite_diff(|v| model::surrogate_utility(&s, k, &at(v), p_bar.user(k), lambda), &x, idx, h, 0.0);
        let tol = if fd.one_sided { 2e-5 } else { 1e-5 };
        let noise = stencil_noise(surrogate_magnitude(&s, k, &p, lambda), h, fd.one_sided);
        let scale = analytic.abs().max(fd.value.abs()).max(nu.abs());
        let e = rel_err(analytic, fd.value, nu.abs());
        let excess = ((analytic - fd.value).abs() - noise).max(0.0) / scale.max(f64::MIN_POSITIVE);
        rounding_limited += usize::from(e >= tol && excess < tol);
        worst_m = worst_m.max(excess);
        if excess >= tol && failure.is_none() {
            failure = Some(format!("case {case}: marginal {analytic:e} vs difference {:e}", fd.value));
        }

        // Requirements at half the current rates keep every slack positive
        // across the stencil.
        s.r_min = model::user_rates(&s, &p).iter().map(|r| 0.5 * r).collect();
        let rho = rng.random_range(0.1..=10.0);
        let (own, cross) = qos::barrier_grad_terms(&s, k, n, &p, rho).expect("slack is positive");
        let fd = finite_diff(|v| qos::barrier_value(&s, &at(v), rho, QosMode::DEFAULT_C), &x, idx, h, 0.0);
        let tol = if fd.one_sided { 2e-4 } else { 1e-4 };
        let noise = stencil_noise(barrier_magnitude(&s, &p, rho), h, fd.one_sided);
        let scale = (own + cross).abs().max(fd.value.abs()).max(own.abs() + cross.abs());
        let e = rel_err(own + cross, fd.value, own.abs() + cross.abs());
        let excess = ((own + cross - fd.value).abs() - noise).max(0.0) / scale.max(f64::MIN_POSITIVE);
        rounding_limited += usize::from(e >= tol && excess < tol);
        worst_b = worst_b.max(excess);
        if excess >= tol && failure.is_none() {
            failure = Some(format!("case {case}: barrier terms {:e} vs difference {:e}", own + cross, fd.value));
        }
    }
    report(
        "gradient",
        cases,
        start,
        failure,
        format!("worst rel. err marginal {worst_m:.1e}, barrier {worst_b:.1e}; {rounding_limited} rounding-limited"),
    )
}

/// The surrogate Hessian diagonal is negative wherever the user has a
/// useful direct or cross channel.
pub fn concavity_check(cases: usize, seed: u64) -> CheckReport {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failure = None;
    let mut checked = 0;
    let mut largest = f64::NEG_INFINITY;
    for case in 0..cases {
        let s = random_scenario(&mut rng, 4, 4);
        let mut p = random_point(&mut rng, &s);
        // Some points on the boundary of the simplex.
        if case % 4 == 0 {
            let k = rng.random_range(0..s.user_count);
            let n = rng.random_range(0..s.subcarrier_count);
            p.set(k, n, 0.0);
        }
        for k in 0..s.user_count {
            for n in 0..s.subcarrier_count {
                let reach = s.alpha[k][n] + (0..s.user_count).map(|i| s.beta[k][i][n]).sum::<f64>();
                if reach <= 0.0 {
                    continue;
                }
                checked += 1;
                let h = model::hessian_diag(&s, k, n, &p);
                largest = largest.max(h);
                if !(h < 0.0) && failure.is_none() {
                    failure = Some(format!("case {case}: hessian {h:e} at user {k}, subcarrier {n}"));
                }
            }
        }
    }
    report("concavity", cases, start, failure, format!("{checked} entries, largest {largest:.1e}"))
}

/// The learning scheme against projected gradient ascent on surrogate
/// subproblems, some of them above generalized-mode floors. Every emitted
/// iterate must respect the floors and the budget without slack.
pub fn learning_check(cases: usize, seed: u64) -> CheckReport {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params = LearningParams::default();
    let mut worst = 0.0f64;
    let mut failure = None;
    for case in 0..cases {
        let s = random_scenario(&mut rng, 4, 4);
        let p = random_point(&mut rng, &s);
        let lambda = random_lambda(&mut rng, &s, &p);
        let k = rng.random_range(0..s.user_count);
        let n = s.subcarrier_count;
        let view = UserView::new(&s, &p, k);
        let objective = SurrogateObjective::at(&view, p.user(k), lambda);
        let (floors, budget) = if case % 2 == 1 {
            let share = rng.random_range(0.0..0.5);
            let floors: Vec<f64> = (0..n).map(|_| s.p_max[k] * share / n as f64 * rng.random::<f64>()).collect();
            let budget = s.p_max[k] - floors.iter().sum::<f64>();
            (floors, budget)
        } else {
            (vec![0.0; n], s.p_max[k])
        };
        let mut infeasible = None;
        let learned = learn_observed(&objective, budget, &floors, &params, None, |q| {
            let above = q.iter().zip(&floors).all(|(a, f)| a >= f);
            let spent: f64 = q.iter().zip(&floors).map(|(a, f)| a - f).sum();
            if (!above || spent > budget) && infeasible.is_none() {
                infeasible = Some(spent - budget);
            }
        });
        let reference = projected_gradient_reference(&objective, budget, &floors, &PgOptions::default());
        let gap = (objective.value(&reference) - learned.value).abs();
        worst = worst.max(gap);
        if failure.is_none() {
            if let Some(excess) = infeasible {
                failure = Some(format!("case {case}: iterate outside the feasible set (budget excess {excess:e})"));
            } else if !(gap < 1e-4) {
                failure = Some(format!("case {case}: objective gap {gap:e} to the reference"));
            }
        }
    }
    report("learning", cases, start, failure, format!("worst objective gap {worst:.1e}"))
}

/// Potential (barrier-augmented in barrier mode) never decreases along a
/// better-response run.
pub fn potential_check(runs: usize, seed: u64) -> CheckReport {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let mut failure = None;
    for run in 0..runs {
        let mut s = random_scenario(&mut rng, 4, 4);
        let p = random_point(&mut rng, &s);
        let lambda = random_lambda(&mut rng, &s, &p);
        let mode = if run % 2 == 0 {
            QosMode::None
        } else {
            s.r_min = vec![rng.random_range(0.05..0.5); s.user_count];
            QosMode::Barrier {
                rho: [0.1, 1.0, 10.0][rng.random_range(0..3)],
                c: QosMode::DEFAULT_C,
            }
        };
        let out = match run_brd(&s, &p, lambda, &mode, &BrdOptions::default(), &LearningParams::default()) {
            Ok(out) => out,
            Err(e) => {
                failure.get_or_insert(format!("run {run}: {e}"));
                continue;
            }
        };
        for w in out.trace.windows(2) {
            let drop = w[0] - w[1];
            worst = worst.max(drop);
            if drop > 1e-9 && failure.is_none() {
                failure = Some(format!("run {run}: potential fell by {drop:e} ({})", mode.name()));
            }
        }
    }
    report("potential", runs, start, failure, format!("largest drop {worst:.1e}"))
}

/// `λ` never decreases while `F̄ ≥ 0`, and a negative `F̄` ends the loop.
/// Each scenario is solved in all three modes.
pub fn dinkelbach_check(scenarios: usize, seed: u64) -> CheckReport {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failure = None;
    let mut halts = 0;
    for case in 0..scenarios {
        let mut cfg = GenConfig {
            seed: rng.random(),
            p_max_dbw: rng.random_range(-30.0..=10.0),
            r_min: 0.266,
            ..GenConfig::default()
        };
        if case % 2 == 1 {
            cfg.users = rng.random_range(2..=6);
        }
        let s = generate(&cfg).expect("valid config");
        for mode in [QosMode::None, QosMode::barrier(), QosMode::generalized()] {
            let r = match maximize_gee(&s, &SolverOptions::with_qos(mode)) {
                Ok(r) => r,
                Err(e) => {
                    failure.get_or_insert(format!("case {case}: {e}"));
                    continue;
                }
            };
            let negative: Vec<usize> = (0..r.f_bar.len()).filter(|&j| r.f_bar[j] < 0.0).collect();
            halts += usize::from(!negative.is_empty());
            let problem = if negative.iter().any(|&j| j + 1 != r.f_bar.len()) {
                Some("iterated past a negative objective".to_string())
            } else if !negative.is_empty() && r.stop != StopReason::NegativeObjective {
                Some(format!("negative objective but stop reason {:?}", r.stop))
            } else {
                (0..r.f_bar.len())
                    .filter(|&j| r.f_bar[j] >= 0.0)
                    .find(|&j| r.lambdas[j + 1] < r.lambdas[j] - 1e-12)
                    .map(|j| format!("λ fell from {} to {} at {j}", r.lambdas[j], r.lambdas[j + 1]))
            };
            if let Some(msg) = problem {
                failure.get_or_insert(format!("case {case} ({}): {msg}", mode.name()));
            }
        }
    }
    report(
        "dinkelbach",
        scenarios,
        start,
        failure,
        format!("{halts} runs halted on a negative objective"),
    )
}

/// Solver GEE against exhaustive grid search on two-user, two-subcarrier
/// networks without rate requirements.
pub fn grid_check(scenarios: usize, seed: u64, points: usize) -> CheckReport {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::INFINITY;
    let mut below = 0;
    let mut failure = None;
    for case in 0..scenarios {
        let s = generate(&GenConfig {
            users: 2,
            subcarriers: 2,
            seed: rng.random(),
            ..GenConfig::default()
        })
        .expect("valid config");
        let solved = maximize_gee(&s, &SolverOptions::default()).map(|r| r.gee);
        let grid = grid_search_gee(&s, &GridSpec { points, cap: 1e7 }).map(|g| g.1);
        match (solved, grid) {
            (Ok(g), Ok(best)) => {
                let ratio = g / best;
                worst = worst.min(ratio);
                if !(ratio >= 0.95) {
                    below += 1;
                    failure.get_or_insert(format!("case {case}: solver {g:e} vs grid {best:e}"));
                }
            }
            (Err(e), _) | (_, Err(e)) => {
                failure.get_or_insert(format!("case {case}: {e}"));
            }
        }
    }
    let summary = format!("worst solver/grid ratio {worst:.4}, {below} of {scenarios} below 0.95");
    let failure = failure.map(|f| format!("{f}; {summary}"));
    report("grid", scenarios, start, failure, summary)
}

/// Rate ceilings at the generator defaults: `4·log2(101)` per user.
pub fn rate_bound_check() -> CheckReport {
    let start = Instant::now();
    let s = generate(&GenConfig::default()).expect("defaults are valid");
    let per_user: Vec<f64> = (0..s.user_count)
        .map(|k| max_rate_bound(&s, k).total.value().unwrap_or(f64::INFINITY))
        .collect();
    let total: f64 = per_user.iter().sum();
    let failure = per_user
        .iter()
        .position(|r| (r - 26.63).abs() > 0.01)
        .map(|k| format!("user {k}: bound {}", per_user[k]))
        .or_else(|| ((total - 320.0).abs() > 1.0).then(|| format!("sum of bounds {total}")));
    report(
        "rate-bound",
        s.user_count,
        start,
        failure,
        format!("per user {:.4}, sum {total:.2}", per_user[0]),
    )
}

/// Without interference or self-interference at `λ = 0` the surrogate is
/// the own rate and its maximizer is water-filling.
pub fn water_filling_check(cases: usize, seed: u64) -> CheckReport {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let mut failure = None;
    for case in 0..cases {
        let s = generate(&GenConfig {
            users: 1,
            subcarriers: rng.random_range(1..=8),
            p_max_dbw: rng.random_range(-30.0..=10.0),
            xi_ratio: 0.0,
            seed: rng.random(),
            ..GenConfig::default()
        })
        .expect("valid config");
        let p = PowerAllocation::uniform(&s);
        let view = UserView::new(&s, &p, 0);
        let objective = SurrogateObjective::at(&view, p.user(0), 0.0);
        let n = s.subcarrier_count;
        let learned = learn_observed(&objective, s.p_max[0], &vec![0.0; n], &LearningParams::default(), None, |_| {});
        let gains: Vec<f64> = (0..n).map(|j| s.alpha[0][j] / s.noise[j]).collect();
        let optimum = objective.value(&water_filling(&gains, s.p_max[0]));
        // The exponential map never reaches the boundary, so the optimum
        // is approached from below.
        let gap = optimum - learned.value;
        worst = worst.max(gap.abs());
        if !(gap.abs() < 1e-6) && failure.is_none() {
            failure = Some(format!("case {case}: learned {} vs water-filling {optimum}", learned.value));
        }
    }
    report("water-filling", cases, start, failure, format!("worst gap {worst:.1e}"))
}

/// One user on one subcarrier: the full solver against golden-section search
/// of the unimodal GEE.
pub fn single_link_check(cases: usize, seed: u64) -> CheckReport {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::INFINITY;
    let mut failure = None;
    for case in 0..cases {
        let s = generate(&GenConfig {
            users: 1,
            subcarriers: 1,
            p_max_dbw: rng.random_range(-30.0..=10.0),
            xi_ratio: [0.0, 0.01, 0.1][rng.random_range(0..3)],
            seed: rng.random(),
            ..GenConfig::default()
        })
        .expect("valid config");
        let (_, best) = single_link_optimum(&s).expect("one link");
        match maximize_gee(&s, &SolverOptions::default()) {
            Ok(r) => {
                let ratio = r.gee / best;
                worst = worst.min(ratio);
                if !(ratio > 1.0 - 1e-6) && failure.is_none() {
                    failure = Some(format!("case {case}: solver {} vs optimum {best}", r.gee));
                }
            }
            Err(e) => {
                failure.get_or_insert(format!("case {case}: {e}"));
            }
        }
    }
    report("single-link", cases, start, failure, format!("worst solver/optimum ratio {worst:.8}"))
}

/// KKT conditions of the projection onto the budgeted simplex above floors:
/// `x - v = -θ` on coordinates above their floor, `≥ -θ` at the floor, and
/// `θ > 0` only when the budget binds.
pub fn projection_check(cases: usize, seed: u64) -> CheckReport {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failure = None;
    let mut worst = 0.0f64;
    for case in 0..cases {
        let dim = rng.random_range(1..=8);
        let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..2.0)).collect();
        let floors: Vec<f64> = (0..dim).map(|_| rng.random_range(0.0..0.3)).collect();
        let budget = rng.random_range(0.01..2.0);
        let x = project_capped_simplex(&v, &floors, budget);
        let spent: f64 = x.iter().zip(&floors).map(|(a, f)| a - f).sum();
        let tol = 1e-12 * (1.0 + budget);
        let free: Vec<usize> = (0..dim).filter(|&i| x[i] > floors[i]).collect();
        let theta = free.first().map_or(0.0, |&i| v[i] - x[i]);
        let mut violation = 0.0f64;
        violation = violation.max(floors.iter().zip(&x).map(|(f, a)| f - a).fold(0.0, f64::max));
        violation = violation.max(spent - budget);
        violation = violation.max(-theta);
        for &i in &free {
            violation = violation.max((v[i] - x[i] - theta).abs());
        }
        for i in (0..dim).filter(|i| !free.contains(i)) {
            violation = violation.max(v[i] - x[i] - theta);
        }
        if theta > tol {
            violation = violation.max((budget - spent).abs());
        }
        worst = worst.max(violation);
        if violation > tol && failure.is_none() {
            failure = Some(format!("case {case}: KKT violation {violation:e}"));
        }
    }
    report("projection", cases, start, failure, format!("worst KKT violation {worst:.1e}"))
}

/// A small sweep yields the same CSV on one thread and on several.
pub fn determinism_check(seeds: usize) -> CheckReport {
    let start = Instant::now();
    let cfg = SweepConfig {
        param: SweptParam::PMaxDbw,
        values: vec![-30.0, 0.0],
        seeds,
        base_seed: 11,
        base: GenConfig {
            users: 4,
            subcarriers: 2,
            r_min: 0.266,
            ..GenConfig::default()
        },
        modes: vec![QosMode::None, QosMode::barrier(), QosMode::generalized()],
        solver: SolverOptions::default(),
    };
    let csv = |threads| run_sweep(&cfg, Some(threads)).and_then(|rows| to_csv_string(&rows));
    let failure = match (csv(1), csv(3)) {
        (Ok(a), Ok(b)) if a == b => None,
        (Ok(_), Ok(_)) => Some("CSV differs between thread counts".to_string()),
        (Err(e), _) | (_, Err(e)) => Some(e.to_string()),
    };
    report("determinism", seeds, start, failure, "byte-identical CSV".to_string())
}

/// Runs every check; `quick` shrinks the case counts.
pub fn run_suite(quick: bool) -> Vec<CheckReport> {
    let n = |full: usize, small: usize| if quick { small } else { full };
    vec![
        gradient_check(n(1000, 100), 1),
        concavity_check(n(1000, 100), 2),
        learning_check(n(100, 20), 3),
        potential_check(n(100, 10), 4),
        dinkelbach_check(n(200, 10), 5),
        grid_check(n(50, 3), 6, if quick { 20 } else { 50 }),
        rate_bound_check(),
        water_filling_check(n(100, 20), 7),
        single_link_check(n(100, 20), 8),
        projection_check(n(1000, 200), 9),
        determinism_check(n(4, 2)),
    ]
}
