//! Dinkelbach outer loop: maximize `sum_rate - λ·total_power` with better
//! response dynamics, update `λ` to the achieved ratio, repeat.

use serde::{Deserialize, Serialize};

use crate::brd::{run_brd, BrdOptions};
use crate::error::{Error, Result};
use crate::learning::LearningParams;
use crate::model::{self, max_rate_bound};
use crate::qos::{self, QosMode};
use crate::scenario::{PowerAllocation, Scenario};

/// Slack on `R_min` when counting satisfied users.
pub const SATISFIED_TOL: f64 = 1e-9;

const FLOOR_SWEEPS: usize = 200;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    /// Converged once `F̄ < tolerance·max(1, sum_rate)` and the relative
    /// change of `λ` is below `tolerance`.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub brd: BrdOptions,
    pub learning: LearningParams,
    pub qos: QosMode,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-4,
            max_iterations: 50,
            brd: BrdOptions::default(),
            learning: LearningParams::default(),
            qos: QosMode::None,
        }
    }
}

impl SolverOptions {
    pub fn with_qos(qos: QosMode) -> Self {
        Self {
            qos,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) || self.max_iterations == 0 {
            return Err(Error::InvalidConfig(
                "Dinkelbach tolerance must be positive and max_iterations at least 1".into(),
            ));
        }
        self.brd.validate()?;
        self.learning.validate()?;
        self.qos.validate()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    /// Both `F̄` and the relative change of `λ` fell below the tolerance.
    Converged,
    /// `F̄(λ_j) < 0`: the loop halts at `j`.
    NegativeObjective,
    MaxIterations,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunReport {
    pub allocation: PowerAllocation,
    /// Bit/Joule.
    pub gee: f64,
    pub sum_rate: f64,
    pub user_rates: Vec<f64>,
    pub satisfied_ratio: f64,
    pub relaxed_users: Vec<usize>,
    /// `λ_0, λ_1, ...`; one longer than `f_bar` unless the loop halted on a
    /// negative objective.
    pub lambdas: Vec<f64>,
    pub f_bar: Vec<f64>,
    /// BRD rounds of each outer iteration.
    pub brd_rounds: Vec<usize>,
    /// Tracked potential after every better response, per outer iteration.
    pub potential_traces: Vec<Vec<f64>>,
    /// `I_D`.
    pub dinkelbach_iterations: usize,
    /// Mean `I_B` over outer iterations.
    pub mean_brd_rounds: f64,
    /// Mean `I_L` over better responses.
    pub mean_learning_iterations: f64,
    pub stop: StopReason,
    pub brd_converged: bool,
    pub learning_nonconverged: usize,
    pub qos: QosMode,
}

impl RunReport {
    pub fn converged(&self) -> bool {
        self.stop != StopReason::MaxIterations && self.brd_converged
    }
}

/// `F̄(λ) = sum_rate(p̄) - λ·total_power(p̄)`.
pub fn evaluate_f_bar(s: &Scenario, p_bar: &PowerAllocation, lambda: f64) -> f64 {
    model::potential(s, p_bar, lambda)
}

/// `sum_rate(p̄) / total_power(p̄)`.
pub fn lambda_update(s: &Scenario, p_bar: &PowerAllocation) -> f64 {
    model::sum_rate(s, p_bar) / model::total_power(s, p_bar)
}

/// Checks `R_min,k ≤ R_max,k` for every user.
pub fn check_rate_requirements(s: &Scenario) -> Result<()> {
    for k in 0..s.user_count {
        let bound = max_rate_bound(s, k).total;
        if !bound.admits(s.r_min[k]) {
            return Err(Error::RateRequirementTooHigh {
                user: k,
                r_min: s.r_min[k],
                r_max: bound.value().unwrap_or(f64::INFINITY),
            });
        }
    }
    Ok(())
}

/// Starting point: `P_max/(N+1)` per subcarrier, or in generalized mode the
/// floors plus `Δ/(N+1)` each, repaired until every floor holds jointly.
pub fn initial_allocation(s: &Scenario, mode: &QosMode) -> PowerAllocation {
    let uniform = PowerAllocation::uniform(s);
    if !matches!(mode, QosMode::Generalized { .. }) {
        return uniform;
    }
    let n = s.subcarrier_count;
    let mut p = uniform.clone();
    for k in 0..s.user_count {
        let targets = qos::split_rate_requirement(s, k);
        let plan = qos::make_floor_plan(s, k, &uniform, &targets);
        let share = plan.residual / (n as f64 + 1.0);
        let row: Vec<f64> = plan.floors.iter().map(|f| f + share).collect();
        p.set_user(k, &row);
    }
    qos::enforce_floors(s, &mut p, FLOOR_SWEEPS);
    p
}

fn satisfied_count(s: &Scenario, rates: &[f64]) -> usize {
    rates
        .iter()
        .zip(&s.r_min)
        .filter(|(r, m)| **r >= **m - SATISFIED_TOL)
        .count()
}

/// Runs the full solver for the QoS mode in `opts`.
pub fn maximize_gee(s: &Scenario, opts: &SolverOptions) -> Result<RunReport> {
    opts.validate()?;
    let mode = opts.qos;
    if mode != QosMode::None {
        check_rate_requirements(s)?;
    }
    let generalized = matches!(mode, QosMode::Generalized { .. });

    let mut p = initial_allocation(s, &mode);
    let mut lambda = 0.0;
    let mut lambdas = vec![lambda];
    let mut f_bar = Vec::new();
    let mut brd_rounds = Vec::new();
    let mut potential_traces = Vec::new();
    let mut responses = 0;
    let mut learning_iterations = 0;
    let mut learning_nonconverged = 0;
    let mut brd_converged = true;
    let mut relaxed = vec![false; s.user_count];
    let mut iterates: Vec<PowerAllocation> = Vec::new();
    let mut stop = StopReason::MaxIterations;

    for _ in 0..opts.max_iterations {
        let out = run_brd(s, &p, lambda, &mode, &opts.brd, &opts.learning)?;
        brd_rounds.push(out.rounds);
        responses += out.responses;
        learning_iterations += out.learning_iterations;
        learning_nonconverged += out.learning_nonconverged;
        brd_converged &= out.converged;
        relaxed = out.relaxed;
        potential_traces.push(out.trace);
        p = out.allocation;
        if generalized {
            let plans = qos::enforce_floors(s, &mut p, FLOOR_SWEEPS);
            relaxed = plans.iter().map(|pl| pl.relaxed()).collect();
        }
        iterates.push(p.clone());

        let f = evaluate_f_bar(s, &p, lambda);
        f_bar.push(f);
        if f < 0.0 {
            stop = StopReason::NegativeObjective;
            break;
        }
        let next = lambda_update(s, &p);
        lambdas.push(next);
        let small_step = (next - lambda).abs() / next.max(1e-30) < opts.tolerance;
        lambda = next;
        if f < opts.tolerance * model::sum_rate(s, &p).max(1.0) && small_step {
            stop = StopReason::Converged;
            break;
        }
    }

    // On a negative objective the last iterate is worse than its
    // predecessor; return the best one seen, ranking satisfied users first
    // when rate requirements are active.
    if stop == StopReason::NegativeObjective && iterates.len() > 1 {
        let key = |q: &PowerAllocation| {
            let sat = if mode == QosMode::None {
                0
            } else {
                satisfied_count(s, &model::user_rates(s, q))
            };
            (sat, model::gee(s, q))
        };
        let best = iterates
            .iter()
            .max_by(|a, b| {
                let (ka, kb) = (key(a), key(b));
                ka.0.cmp(&kb.0).then(ka.1.total_cmp(&kb.1))
            })
            .unwrap();
        p = best.clone();
        if generalized {
            relaxed = qos::enforce_floors(s, &mut p, 0)
                .iter()
                .map(|pl| pl.relaxed())
                .collect();
        }
    }

    let user_rates = model::user_rates(s, &p);
    let satisfied_ratio = satisfied_count(s, &user_rates) as f64 / s.user_count as f64;
    let dinkelbach_iterations = f_bar.len();
    let mean_brd_rounds = brd_rounds.iter().sum::<usize>() as f64 / brd_rounds.len().max(1) as f64;
    let mean_learning_iterations = learning_iterations as f64 / responses.max(1) as f64;
    let relaxed_users = match mode {
        QosMode::None => Vec::new(),
        _ => (0..s.user_count).filter(|&k| relaxed[k]).collect(),
    };
    Ok(RunReport {
        gee: model::gee(s, &p),
        sum_rate: user_rates.iter().sum(),
        allocation: p,
        user_rates,
        satisfied_ratio,
        relaxed_users,
        lambdas,
        f_bar,
        brd_rounds,
        potential_traces,
        dinkelbach_iterations,
        mean_brd_rounds,
        mean_learning_iterations,
        stop,
        brd_converged,
        learning_nonconverged,
        qos: mode,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::fixtures::flat;

    #[test]
    fn f_bar_values() {
        let s = flat(1, 1, 1.0, 0.0, 0.0, 1.0);
        let p = PowerAllocation::from_rows(&[vec![1.0]]);
        assert_eq!(evaluate_f_bar(&s, &p, 0.0), 1.0);
        assert_eq!(evaluate_f_bar(&s, &p, lambda_update(&s, &p)), 0.0);
        assert_eq!(evaluate_f_bar(&s, &PowerAllocation::zeros(1, 1), 2.0), -2.0);
    }

    #[test]
    fn lambda_update_values() {
        let s = flat(1, 1, 1.0, 0.0, 0.0, 1.0);
        let p = PowerAllocation::from_rows(&[vec![1.0]]);
        assert_eq!(lambda_update(&s, &p), 0.5);
        assert_eq!(lambda_update(&s, &PowerAllocation::zeros(1, 1)), 0.0);
    }

    #[test]
    fn lambda_step_identity() {
        let s = flat(2, 2, 1.0, 0.05, 0.3, 0.2);
        let p = PowerAllocation::from_rows(&[vec![0.1, 0.4], vec![0.3, 0.2]]);
        let lam = 0.7;
        let step = lambda_update(&s, &p) - lam;
        let identity = evaluate_f_bar(&s, &p, lam) / model::total_power(&s, &p);
        assert!((step - identity).abs() < 1e-14);
    }

    #[test]
    fn rejects_unreachable_rate() {
        let mut s = flat(1, 2, 1.0, 1.0, 0.0, 1.0);
        s.r_min = vec![2.5];
        let err = maximize_gee(&s, &SolverOptions::with_qos(QosMode::barrier())).unwrap_err();
        assert!(matches!(err, Error::RateRequirementTooHigh { .. }));
        assert!(maximize_gee(&s, &SolverOptions::default()).is_ok());
    }

    #[test]
    fn report_is_consistent() {
        let s = flat(2, 2, 1.0, 0.05, 0.3, 0.2);
        let r = maximize_gee(&s, &SolverOptions::default()).unwrap();
        assert_eq!(r.gee, model::gee(&s, &r.allocation));
        assert!(r.allocation.is_feasible(&s, 1e-12));
        assert_eq!(r.dinkelbach_iterations, r.f_bar.len());
        assert!(r.converged(), "{:?}", r.stop);
    }
}
