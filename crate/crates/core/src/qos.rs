//! Minimum-rate handling: a relaxed logarithmic barrier, or per-subcarrier
//! rate targets turned into interference-dependent power floors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learning::{learn, ConcaveObjective, LearningParams};
use crate::model::{self, subcarrier_rate_bound, RateBound, UserView};
use crate::scenario::{PowerAllocation, Scenario};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplitRule {
    /// Targets proportional to each subcarrier's rate ceiling.
    #[default]
    Proportional,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum QosMode {
    #[default]
    None,
    /// `rho` weighs the barrier, `c` is the value a violated user contributes.
    Barrier { rho: f64, c: f64 },
    Generalized {
        #[serde(default)]
        split: SplitRule,
    },
}

impl QosMode {
    pub const DEFAULT_RHO: f64 = 1.0;
    pub const DEFAULT_C: f64 = -1e3;

    pub fn barrier() -> Self {
        QosMode::Barrier {
            rho: Self::DEFAULT_RHO,
            c: Self::DEFAULT_C,
        }
    }

    pub fn generalized() -> Self {
        QosMode::Generalized {
            split: SplitRule::Proportional,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            QosMode::None => "none",
            QosMode::Barrier { .. } => "barrier",
            QosMode::Generalized { .. } => "generalized",
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let QosMode::Barrier { rho, c } = *self {
            if !(rho > 0.0) || !rho.is_finite() {
                return Err(Error::InvalidConfig(format!("barrier rho {rho} must be positive")));
            }
            if !(c < 0.0) || !c.is_finite() {
                return Err(Error::InvalidConfig(format!("barrier C {c} must be negative")));
            }
        }
        Ok(())
    }
}

/// Barrier contribution of one user: `log2(slack)` or the relaxed constant.
pub fn barrier_term(slack: f64, c: f64) -> f64 {
    if slack > 0.0 {
        slack.log2()
    } else {
        c
    }
}

/// `ρ · Σ_k ϱ_k` with violated users pinned at `C`.
pub fn barrier_value(s: &Scenario, p: &PowerAllocation, rho: f64, c: f64) -> f64 {
    rho * (0..s.user_count)
        .map(|k| barrier_term(model::user_rate(s, p, k) - s.r_min[k], c))
        .sum::<f64>()
}

/// Barrier gradient terms `(φᴵ, φᴵᴵ)` for user `k` on subcarrier `n`,
/// evaluated at the allocation `p` (row `k` is the expansion point).
pub fn barrier_grad_terms(s: &Scenario, k: usize, n: usize, p: &PowerAllocation, rho: f64) -> Result<(f64, f64)> {
    let view = UserView::new(s, p, k);
    view.barrier_terms(p.user(k), rho)
        .map(|t| t[n])
        .map_err(|slack| Error::InfeasibleLinearization { user: k, slack })
}

struct OwnRate<'v, 'a> {
    view: &'v UserView<'a>,
}

impl ConcaveObjective for OwnRate<'_, '_> {
    fn value(&self, p: &[f64]) -> f64 {
        self.view.own_rate(p)
    }
    fn gradient(&self, p: &[f64], out: &mut [f64]) {
        self.view.own_rate_gradient(p, out);
    }
}

#[derive(Clone, Debug)]
pub struct FeasibilityOutcome {
    pub feasible: bool,
    /// Highest rate found for the user with everyone else fixed.
    pub max_rate: f64,
    pub maximizer: Vec<f64>,
    pub iterations: usize,
}

/// Maximizes user `k`'s own rate over its budget with the other users held
/// at `p`, and compares the maximum to `R_min,k`.
pub fn rate_feasibility(s: &Scenario, k: usize, p: &PowerAllocation, params: &LearningParams) -> FeasibilityOutcome {
    let view = UserView::new(s, p, k);
    let n = s.subcarrier_count;
    let out = learn(&OwnRate { view: &view }, s.p_max[k], &vec![0.0; n], params);
    FeasibilityOutcome {
        feasible: out.value >= s.r_min[k],
        max_rate: out.value,
        maximizer: out.powers,
        iterations: out.iterations,
    }
}

pub fn feasibility_test(s: &Scenario, k: usize, p: &PowerAllocation, params: &LearningParams) -> bool {
    if s.r_min[k] <= 0.0 {
        return true;
    }
    if !model::max_rate_bound(s, k).total.admits(s.r_min[k]) {
        return false;
    }
    rate_feasibility(s, k, p, params).feasible
}

/// Splits `R_min,k` across subcarriers in proportion to each subcarrier's rate
/// ceiling. Unbounded ceilings absorb the whole requirement in equal shares.
pub fn split_rate_requirement(s: &Scenario, k: usize) -> Vec<f64> {
    let n = s.subcarrier_count;
    let r_min = s.r_min[k];
    if r_min <= 0.0 {
        return vec![0.0; n];
    }
    let bounds: Vec<RateBound> = (0..n).map(|j| subcarrier_rate_bound(s, k, j)).collect();
    let unbounded = bounds.iter().filter(|b| !b.is_bounded()).count();
    if unbounded > 0 {
        let share = r_min / unbounded as f64;
        return bounds
            .iter()
            .map(|b| if b.is_bounded() { 0.0 } else { share })
            .collect();
    }
    let ceilings: Vec<f64> = bounds.iter().filter_map(|b| b.value()).collect();
    let total: f64 = ceilings.iter().sum();
    if total <= 0.0 {
        return vec![r_min / n as f64; n];
    }
    ceilings.iter().map(|c| r_min * c / total).collect()
}

/// Smallest power meeting `target` on subcarrier `n` given the other users'
/// powers, or `None` when the target is above the subcarrier's ceiling.
pub fn min_power(s: &Scenario, k: usize, n: usize, p: &PowerAllocation, target: f64) -> Option<f64> {
    if target <= 0.0 {
        return Some(0.0);
    }
    let gain = (target * std::f64::consts::LN_2).exp_m1();
    let denom = s.alpha[k][n] - s.xi[k][n] * gain;
    if !(denom > 0.0) {
        return None;
    }
    Some(gain * (s.noise[n] + model::interference(s, p, k, n)) / denom)
}

/// Power floors a user must respect in the generalized game.
#[derive(Clone, Debug, PartialEq)]
pub struct FloorPlan {
    pub targets: Vec<f64>,
    pub floors: Vec<f64>,
    /// Subcarriers on which the floor is enforced.
    pub active: Vec<bool>,
    /// Budget left once the floors are paid.
    pub residual: f64,
}

impl FloorPlan {
    /// `true` when some subcarrier's target had to be dropped.
    pub fn relaxed(&self) -> bool {
        self.active.iter().zip(&self.targets).any(|(&a, &t)| !a && t > 0.0)
    }

    pub fn admits(&self, powers: &[f64]) -> bool {
        powers.iter().zip(&self.floors).all(|(p, f)| p >= f)
    }
}

/// Floors from [`min_power`], restricted to the cheapest subcarriers when
/// paying all of them would exceed the budget.
pub fn make_floor_plan(s: &Scenario, k: usize, p: &PowerAllocation, targets: &[f64]) -> FloorPlan {
    let n = s.subcarrier_count;
    let budget = s.p_max[k];
    let raw: Vec<Option<f64>> = (0..n).map(|j| min_power(s, k, j, p, targets[j])).collect();
    let mut floors = vec![0.0; n];
    let mut active = vec![false; n];

    let total: Option<f64> = raw.iter().copied().sum();
    match total {
        Some(t) if t <= budget => {
            for (j, v) in raw.iter().enumerate() {
                floors[j] = v.unwrap_or(0.0);
                active[j] = true;
            }
        }
        _ => {
            let mut order: Vec<usize> = (0..n).filter(|&j| raw[j].is_some()).collect();
            order.sort_by(|&a, &b| raw[a].unwrap().total_cmp(&raw[b].unwrap()).then(a.cmp(&b)));
            let mut spent = 0.0;
            for j in order {
                let f = raw[j].unwrap();
                if spent + f > budget {
                    break;
                }
                spent += f;
                floors[j] = f;
                active[j] = true;
            }
            // Zero targets never need enforcement.
            for j in 0..n {
                if targets[j] <= 0.0 {
                    active[j] = true;
                }
            }
        }
    }
    let residual = (budget - floors.iter().sum::<f64>()).max(0.0);
    FloorPlan {
        targets: targets.to_vec(),
        floors,
        active,
        residual,
    }
}

/// Raises powers to the current floors of every user, re-deriving the floors
/// as interference changes, until the floors stop moving. Power above the
/// floors is scaled down when a user's budget would be exceeded.
///
/// Returns the floor plans at the final allocation.
pub fn enforce_floors(s: &Scenario, p: &mut PowerAllocation, max_sweeps: usize) -> Vec<FloorPlan> {
    let targets: Vec<Vec<f64>> = (0..s.user_count).map(|k| split_rate_requirement(s, k)).collect();
    for _ in 0..max_sweeps {
        let mut moved = false;
        for k in 0..s.user_count {
            let plan = make_floor_plan(s, k, p, &targets[k]);
            if plan.admits(p.user(k)) {
                continue;
            }
            lift_to_floors(p.user_mut(k), &plan, s.p_max[k]);
            moved = true;
        }
        if !moved {
            break;
        }
    }
    (0..s.user_count)
        .map(|k| make_floor_plan(s, k, p, &targets[k]))
        .collect()
}

fn lift_to_floors(powers: &mut [f64], plan: &FloorPlan, budget: f64) {
    let excess: Vec<f64> = powers
        .iter()
        .zip(&plan.floors)
        .map(|(p, f)| (p - f).max(0.0))
        .collect();
    let spare: f64 = excess.iter().sum();
    let scale = if spare > plan.residual && spare > 0.0 {
        plan.residual / spare
    } else {
        1.0
    };
    for ((p, f), e) in powers.iter_mut().zip(&plan.floors).zip(&excess) {
        *p = f + scale * e;
    }
    debug_assert!(powers.iter().sum::<f64>() <= budget * (1.0 + 1e-12));
}

/// Per-subcarrier rate check for the enforced subcarriers of a plan.
pub fn meets_subcarrier_targets(s: &Scenario, p: &PowerAllocation, k: usize, plan: &FloorPlan, tol: f64) -> bool {
    (0..s.subcarrier_count).all(|n| {
        !plan.active[n] || model::log2_1p(model::sinr(s, p, k, n)) >= plan.targets[n] - tol
    })
}
