//! Better-response dynamics over the potential game.
//!
//! Users take turns in ascending index order. Each turn solves the user's
//! concave surrogate subproblem with the learning scheme; the result is kept
//! only if the true utility (the potential, or the barrier-augmented
//! potential) does not drop, which makes the recorded potential sequence
//! non-decreasing.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learning::{learn_observed, ConcaveObjective, LearningParams};
use crate::model::{self, UserView};
use crate::qos::{self, barrier_term, make_floor_plan, split_rate_requirement, FloorPlan, QosMode};
use crate::scenario::{PowerAllocation, Scenario};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BrdOptions {
    /// Stop once a full round gains at most this much potential, relative
    /// to the sum rate at the start of the round (floored at 1 bit/s/Hz).
    pub tolerance: f64,
    pub max_rounds: usize,
}

impl Default for BrdOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-4,
            max_rounds: 1000,
        }
    }
}

impl BrdOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) || self.max_rounds == 0 {
            return Err(Error::InvalidConfig(
                "BRD tolerance must be positive and max_rounds at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// How a better response was settled.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Acceptance {
    /// The learning output improved the utility.
    Candidate,
    /// A point on the segment towards the learning output did.
    Backtracked(f64),
    /// Nothing improved; the old strategy stays.
    Kept,
    /// The old strategy violates the current floors, so the new one is taken
    /// unconditionally.
    Forced,
}

#[derive(Clone, Debug)]
pub struct Response {
    pub powers: Vec<f64>,
    pub scores: Vec<f64>,
    pub learning_iterations: usize,
    pub learning_converged: bool,
    /// Iterations spent in the barrier feasibility test.
    pub feasibility_iterations: usize,
    /// Barrier mode: no feasible expansion point. Generalized mode: some
    /// per-subcarrier target had to be dropped.
    pub relaxed: bool,
    pub acceptance: Acceptance,
    pub floor_plan: Option<FloorPlan>,
}

/// One user's surrogate subproblem: [`UserView::reduced_surrogate`] with the
/// linear prices `nu`.
pub struct SurrogateObjective<'v, 'a> {
    view: &'v UserView<'a>,
    nu: Vec<f64>,
}

impl<'v, 'a> SurrogateObjective<'v, 'a> {
    pub fn new(view: &'v UserView<'a>, nu: Vec<f64>) -> Self {
        Self { view, nu }
    }

    /// Prices `λ·μ - φ` for the linearization at `p_bar`.
    pub fn at(view: &'v UserView<'a>, p_bar: &[f64], lambda: f64) -> Self {
        let s = view.scenario();
        let k = view.user();
        let nu = view
            .phi(p_bar)
            .iter()
            .zip(&s.mu[k])
            .map(|(phi, mu)| lambda * mu - phi)
            .collect();
        Self { view, nu }
    }

    pub fn prices(&self) -> &[f64] {
        &self.nu
    }
}

impl ConcaveObjective for SurrogateObjective<'_, '_> {
    fn value(&self, p: &[f64]) -> f64 {
        self.view.reduced_surrogate(p, &self.nu)
    }
    fn gradient(&self, p: &[f64], out: &mut [f64]) {
        self.view.marginal(p, &self.nu, out);
    }
}

/// Utility user `k` actually experiences: `V`, or `V + ρΣϱ` in barrier mode.
fn true_utility(view: &UserView<'_>, pk: &[f64], lambda: f64, mode: &QosMode) -> f64 {
    match *mode {
        QosMode::Barrier { rho, c } => {
            let s = view.scenario();
            let rates = view.all_rates(pk);
            let barrier: f64 = rates
                .iter()
                .zip(&s.r_min)
                .map(|(r, m)| barrier_term(r - m, c))
                .sum();
            rates.iter().sum::<f64>() - lambda * view.total_power(pk) + rho * barrier
        }
        _ => view.potential(pk, lambda),
    }
}

/// The potential tracked by the dynamics for `mode`.
pub fn tracked_potential(s: &Scenario, p: &PowerAllocation, lambda: f64, mode: &QosMode) -> f64 {
    let v = model::potential(s, p, lambda);
    match *mode {
        QosMode::Barrier { rho, c } => v + qos::barrier_value(s, p, rho, c),
        _ => v,
    }
}

/// Solves user `k`'s surrogate subproblem at the current allocation and
/// returns a strategy that does not lower its utility (unless `Forced`).
pub fn better_response(
    s: &Scenario,
    k: usize,
    p: &PowerAllocation,
    lambda: f64,
    mode: &QosMode,
    params: &LearningParams,
    warm_scores: Option<&[f64]>,
) -> Result<Response> {
    let n = s.subcarrier_count;
    let view = UserView::new(s, p, k);
    let current = p.user(k);

    let mut expansion = current.to_vec();
    let mut extra = vec![0.0; n];
    let mut relaxed = false;
    let mut feasibility_iterations = 0;
    let mut offsets = vec![0.0; n];
    let mut budget = s.p_max[k];
    let mut floor_plan = None;

    match *mode {
        QosMode::None => {}
        QosMode::Barrier { rho, .. } => {
            let slack = view.own_rate(current) - s.r_min[k];
            if !(slack > 0.0) {
                let feas = qos::rate_feasibility(s, k, p, params);
                feasibility_iterations = feas.iterations;
                if feas.max_rate > s.r_min[k] {
                    expansion = feas.maximizer;
                } else {
                    relaxed = true;
                }
            }
            if !relaxed {
                let terms = view
                    .barrier_terms(&expansion, rho)
                    .map_err(|slack| Error::InfeasibleLinearization { user: k, slack })?;
                for (e, (a, b)) in extra.iter_mut().zip(terms) {
                    *e = a + b;
                }
            }
        }
        QosMode::Generalized { .. } => {
            let targets = split_rate_requirement(s, k);
            let plan = make_floor_plan(s, k, p, &targets);
            relaxed = plan.relaxed();
            offsets.copy_from_slice(&plan.floors);
            budget = plan.residual;
            floor_plan = Some(plan);
        }
    }

    let phi = view.phi(&expansion);
    let nu: Vec<f64> = (0..n)
        .map(|j| lambda * s.mu[k][j] - phi[j] - extra[j])
        .collect();
    let objective = SurrogateObjective::new(&view, nu);
    let learned = learn_observed(&objective, budget, &offsets, params, warm_scores, |_| {});

    let forced = floor_plan.as_ref().is_some_and(|plan| !plan.admits(current));
    let (powers, acceptance) = if forced {
        (learned.powers.clone(), Acceptance::Forced)
    } else {
        guard(&view, current, &expansion, &learned.powers, lambda, mode)
    };

    Ok(Response {
        powers,
        scores: learned.scores,
        learning_iterations: learned.iterations,
        learning_converged: learned.converged,
        feasibility_iterations,
        relaxed,
        acceptance,
        floor_plan,
    })
}

/// Accepts `candidate` if it does not lower the utility, else searches the
/// segment from `expansion` towards it, else keeps `current`.
fn guard(
    view: &UserView<'_>,
    current: &[f64],
    expansion: &[f64],
    candidate: &[f64],
    lambda: f64,
    mode: &QosMode,
) -> (Vec<f64>, Acceptance) {
    let baseline = true_utility(view, current, lambda, mode);
    if true_utility(view, candidate, lambda, mode) >= baseline {
        return (candidate.to_vec(), Acceptance::Candidate);
    }
    let mut point = vec![0.0; candidate.len()];
    let mut tau = 0.5;
    for _ in 0..30 {
        for ((o, e), c) in point.iter_mut().zip(expansion).zip(candidate) {
            *o = e + tau * (c - e);
        }
        if true_utility(view, &point, lambda, mode) >= baseline {
            return (point, Acceptance::Backtracked(tau));
        }
        tau *= 0.5;
    }
    if expansion != current && true_utility(view, expansion, lambda, mode) >= baseline {
        return (expansion.to_vec(), Acceptance::Backtracked(0.0));
    }
    (current.to_vec(), Acceptance::Kept)
}

#[derive(Clone, Debug)]
pub struct BrdOutcome {
    pub allocation: PowerAllocation,
    /// Completed rounds (`I_B`).
    pub rounds: usize,
    pub converged: bool,
    /// Tracked potential at the start and after every better response.
    pub trace: Vec<f64>,
    pub responses: usize,
    pub learning_iterations: usize,
    pub feasibility_iterations: usize,
    pub learning_nonconverged: usize,
    /// Relaxed flag of each user's most recent response.
    pub relaxed: Vec<bool>,
    /// Number of responses taken unconditionally because the old strategy
    /// fell below new floors.
    pub forced: usize,
}

impl BrdOutcome {
    pub fn final_potential(&self) -> f64 {
        *self.trace.last().expect("trace starts with the initial potential")
    }
}

/// Round-robin better responses from `p0` until a round gains at most
/// `opts.tolerance` times `max(1, sum_rate)`.
pub fn run_brd(
    s: &Scenario,
    p0: &PowerAllocation,
    lambda: f64,
    mode: &QosMode,
    opts: &BrdOptions,
    params: &LearningParams,
) -> Result<BrdOutcome> {
    let k_count = s.user_count;
    let mut p = p0.clone();
    let mut trace = vec![tracked_potential(s, &p, lambda, mode)];
    let mut scores: Vec<Option<Vec<f64>>> = vec![None; k_count];
    let mut out = BrdOutcome {
        allocation: p.clone(),
        rounds: 0,
        converged: false,
        trace: Vec::new(),
        responses: 0,
        learning_iterations: 0,
        feasibility_iterations: 0,
        learning_nonconverged: 0,
        relaxed: vec![false; k_count],
        forced: 0,
    };

    while out.rounds < opts.max_rounds {
        let start = *trace.last().unwrap();
        let start_scale = model::sum_rate(s, &p).max(1.0);
        for k in 0..k_count {
            let warm = if params.warm_start { scores[k].as_deref() } else { None };
            let r = better_response(s, k, &p, lambda, mode, params, warm)?;
            p.set_user(k, &r.powers);
            trace.push(tracked_potential(s, &p, lambda, mode));
            out.responses += 1;
            out.learning_iterations += r.learning_iterations;
            out.feasibility_iterations += r.feasibility_iterations;
            out.learning_nonconverged += usize::from(!r.learning_converged);
            out.relaxed[k] = r.relaxed;
            out.forced += usize::from(r.acceptance == Acceptance::Forced);
            if params.warm_start {
                scores[k] = Some(r.scores);
            }
        }
        out.rounds += 1;
        if *trace.last().unwrap() - start <= opts.tolerance * start_scale {
            out.converged = true;
            break;
        }
    }
    out.allocation = p;
    out.trace = trace;
    Ok(out)
}
