//! Exponential-mapping learning over a budgeted simplex.
//!
//! Scores `y` accumulate marginal utilities; powers are the image of the
//! scores under `p_n = offset_n + budget·e^{y_n} / (1 + Σ_m e^{y_m})`, so every
//! iterate is inside the feasible set without any projection.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const ARMIJO: f64 = 1e-4;
const MAX_SCALE: f64 = 1e30;
const MIN_SCALE: f64 = 1e-30;
/// Scores are kept above `-SCORE_FLOOR`; below it a coordinate carries less
/// than `e^-40` of the budget and further descent only slows its recovery.
const SCORE_FLOOR: f64 = 40.0;
/// Accepted steps over which a stall is measured.
const STALL_WINDOW: usize = 10;
/// Relative rounding allowance on the duality gap.
const GAP_ROUNDOFF: f64 = 1e-12;

/// Step schedule `δ_t = step0 / t^step_exponent` and stopping rule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LearningParams {
    pub step0: f64,
    pub step_exponent: f64,
    /// Progress is exhausted once `max_n |Δp_n| < tolerance · budget` ...
    pub tolerance: f64,
    /// ... and the step gained at most this, or the last ten accepted steps
    /// together gained at most this. A duality gap this small stops at once.
    pub value_tolerance: f64,
    /// Exhausted progress only counts as convergence when the duality gap,
    /// an upper bound on the distance to the optimal value, is at most this.
    pub gap_tolerance: f64,
    pub max_iterations: usize,
    /// Start from the previous response's scores instead of zero.
    pub warm_start: bool,
}

impl Default for LearningParams {
    fn default() -> Self {
        Self {
            step0: 1.0,
            step_exponent: 0.6,
            tolerance: 1e-6,
            value_tolerance: 1e-9,
            gap_tolerance: 1e-5,
            max_iterations: 5000,
            warm_start: false,
        }
    }
}

impl LearningParams {
    pub fn validate(&self) -> Result<()> {
        // 0.5 < a <= 1 keeps Σδ_t divergent and Σδ_t² finite.
        if !(self.step_exponent > 0.5 && self.step_exponent <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "step_exponent {} outside (0.5, 1]",
                self.step_exponent
            )));
        }
        if !(self.step0 > 0.0) || !(self.tolerance > 0.0)
            || !(self.value_tolerance >= 0.0)
            || !(self.gap_tolerance > 0.0)
            || self.max_iterations == 0 {
            return Err(Error::InvalidConfig(
                "step0 and tolerances must be positive, max_iterations at least 1".into(),
            ));
        }
        Ok(())
    }

    pub fn step(&self, t: usize) -> f64 {
        self.step0 / (t as f64).powf(self.step_exponent)
    }
}

/// A smooth concave objective over one user's power vector.
pub trait ConcaveObjective {
    fn value(&self, p: &[f64]) -> f64;
    fn gradient(&self, p: &[f64], out: &mut [f64]);
}

/// Writes `budget·e^{y_n} / (1 + Σ_m e^{y_m})` into `out`.
///
/// Evaluated as `e^{y_n - M} / (e^{-M} + Σ_m e^{y_m - M})` with
/// `M = max(0, max_m y_m)`, which is exact and cannot overflow.
pub fn exp_map_into(scores: &[f64], budget: f64, out: &mut [f64]) {
    let shift = scores.iter().fold(0.0f64, |a, &y| a.max(y));
    let mut denom = (-shift).exp();
    for (o, &y) in out.iter_mut().zip(scores) {
        *o = (y - shift).exp();
        denom += *o;
    }
    for o in out.iter_mut() {
        *o = budget * (*o / denom);
    }
}

pub fn exp_map(scores: &[f64], budget: f64) -> Vec<f64> {
    let mut out = vec![0.0; scores.len()];
    exp_map_into(scores, budget, &mut out);
    out
}

/// `max_q ∇f·(q - p)` over the budgeted simplex above `offsets`. For a
/// concave `f` this bounds `f* - f(p)`. Rounding noise relative to the size
/// of the terms is subtracted, so a point that is optimal up to rounding
/// reports zero.
pub fn duality_gap(grad: &[f64], powers: &[f64], offsets: &[f64], budget: f64) -> f64 {
    let top = grad.iter().fold(0.0f64, |a, &g| a.max(g)) * budget;
    let (used, size) = grad
        .iter()
        .zip(powers.iter().zip(offsets))
        .fold((0.0, top), |(u, m), (g, (p, f))| (u + g * (p - f), m + (g * (p - f)).abs()));
    (top - used - GAP_ROUNDOFF * size).max(0.0)
}

/// Trims the largest coordinate until `Σ (p - offset)`, summed in order,
/// is within `budget` despite rounding in the map and the offset shift.
fn fit_budget(powers: &mut [f64], offsets: &[f64], budget: f64) {
    loop {
        let spent: f64 = powers.iter().zip(offsets).map(|(p, f)| p - f).sum();
        if spent <= budget {
            return;
        }
        let j = (0..powers.len())
            .max_by(|&a, &b| (powers[a] - offsets[a]).total_cmp(&(powers[b] - offsets[b])))
            .expect("non-empty when over budget");
        if powers[j] <= offsets[j] {
            return;
        }
        let lowered = powers[j] - (spent - budget);
        powers[j] = if lowered < powers[j] {
            lowered.max(offsets[j])
        } else {
            // The excess is below one ulp of this coordinate.
            f64::from_bits(powers[j].to_bits() - 1).max(offsets[j])
        };
    }
}

/// Power-weighted mean marginal `Σ_m (p_m - offset_m)·v̂_m / budget`.
fn mean_marginal(grad: &[f64], powers: &[f64], offsets: &[f64], budget: f64) -> f64 {
    grad.iter()
        .zip(powers.iter().zip(offsets))
        .map(|(g, (p, f))| g * (p - f))
        .sum::<f64>()
        / budget
}

/// Doubles a rate while its direction `sign` persists, halves it on a flip.
fn adapt(rate: &mut f64, last: &mut f64, sign: f64) {
    if *last * sign > 0.0 {
        *rate = (*rate * 2.0).min(MAX_SCALE);
    } else if *last * sign < 0.0 {
        *rate = (*rate * 0.5).max(MIN_SCALE);
    }
    *last = sign;
}

#[derive(Clone, Debug)]
pub struct Learned {
    pub powers: Vec<f64>,
    pub scores: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Runs the learning scheme from zero scores.
pub fn learn<O: ConcaveObjective + ?Sized>(
    objective: &O,
    budget: f64,
    offsets: &[f64],
    params: &LearningParams,
) -> Learned {
    learn_observed(objective, budget, offsets, params, None, |_| {})
}

/// Full form of [`learn`]: optional initial scores, and `observe` sees every
/// power vector the iteration emits.
///
/// Scores move by `s · δ_t · budget · v̂`, i.e. the marginal utility measured
/// per unit of normalized power, times an adaptive scale `s`. An update is
/// accepted when it gains at least a small fraction of its first-order
/// prediction; `s` then doubles. Otherwise the update is discarded and `s`
/// halves. The objective is therefore non-decreasing along the iterates.
/// Iteration stops when the steps stop making progress and [`duality_gap`]
/// certifies the point, so a saturated mapping that has stalled far from the
/// optimum keeps iterating.
pub fn learn_observed<O, F>(
    objective: &O,
    budget: f64,
    offsets: &[f64],
    params: &LearningParams,
    initial_scores: Option<&[f64]>,
    mut observe: F,
) -> Learned
where
    O: ConcaveObjective + ?Sized,
    F: FnMut(&[f64]),
{
    let dim = offsets.len();
    let mut scores = initial_scores.map_or_else(|| vec![0.0; dim], <[f64]>::to_vec);
    let mut powers = vec![0.0; dim];
    let place = |scores: &[f64], out: &mut [f64]| {
        exp_map_into(scores, budget, out);
        for (o, f) in out.iter_mut().zip(offsets) {
            *o += f;
        }
        fit_budget(out, offsets, budget);
    };
    place(&scores, &mut powers);
    observe(&powers);

    if budget <= 0.0 {
        let value = objective.value(&powers);
        return Learned {
            powers,
            scores,
            value,
            iterations: 0,
            converged: true,
        };
    }

    let mut value = objective.value(&powers);
    let mut grad = vec![0.0; dim];
    let mut trial_scores = vec![0.0; dim];
    let mut trial = vec![0.0; dim];
    // Step rates for the common part `ḡ` of the marginals and for each
    // coordinate's deviation `v̂_n - ḡ` from it.
    let (mut common_rate, mut common_sign) = (1.0, 0.0);
    let mut rates = vec![1.0; dim];
    let mut signs = vec![0.0; dim];
    let mut mean = 0.0;
    let mut backoff = 1.0;
    let mut recent = [f64::INFINITY; STALL_WINDOW];
    let mut accepted = 0usize;
    let mut exhausted = false;
    let mut converged = false;
    let mut fresh = false;
    let mut t = 0;
    while t < params.max_iterations {
        if !fresh {
            objective.gradient(&powers, &mut grad);
            let gap = duality_gap(&grad, &powers, offsets, budget);
            if gap <= params.value_tolerance || (exhausted && gap <= params.gap_tolerance) {
                converged = true;
                break;
            }
            mean = mean_marginal(&grad, &powers, offsets, budget);
            adapt(&mut common_rate, &mut common_sign, mean.signum());
            for ((r, s), &g) in rates.iter_mut().zip(signs.iter_mut()).zip(&grad) {
                adapt(r, s, (g - mean).signum());
            }
            fresh = true;
        }
        t += 1;
        let step = params.step(t) * budget * backoff;
        for (((ts, &y), &g), &r) in trial_scores.iter_mut().zip(&scores).zip(&grad).zip(&rates) {
            *ts = (y + step * (common_rate * mean + r * (g - mean))).max(-SCORE_FLOOR);
        }
        place(&trial_scores, &mut trial);
        let trial_value = objective.value(&trial);
        let predicted: f64 = grad
            .iter()
            .zip(trial.iter().zip(&powers))
            .map(|(g, (a, b))| g * (a - b))
            .sum();
        if !(trial_value >= value + ARMIJO * predicted.max(0.0)) {
            backoff *= 0.5;
            // No representable ascent step left.
            if backoff < MIN_SCALE {
                converged = true;
                break;
            }
            continue;
        }
        let delta = trial
            .iter()
            .zip(&powers)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let gain = trial_value - value;
        std::mem::swap(&mut scores, &mut trial_scores);
        std::mem::swap(&mut powers, &mut trial);
        value = trial_value;
        observe(&powers);
        fresh = false;
        recent[accepted % STALL_WINDOW] = gain;
        accepted += 1;
        exhausted = recent.iter().sum::<f64>() <= params.value_tolerance
            || (delta < params.tolerance * budget && gain <= params.value_tolerance);
        backoff = (backoff * 2.0).min(1.0);
    }
    Learned {
        powers,
        scores,
        value,
        iterations: t,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `Σ_n -(p_n - c_n)² w_n / 2 + s·Σ p_n`.
    struct Quadratic {
        center: Vec<f64>,
        weight: Vec<f64>,
    }

    impl ConcaveObjective for Quadratic {
        fn value(&self, p: &[f64]) -> f64 {
            p.iter()
                .zip(&self.center)
                .zip(&self.weight)
                .map(|((p, c), w)| -0.5 * w * (p - c) * (p - c))
                .sum()
        }
        fn gradient(&self, p: &[f64], out: &mut [f64]) {
            for (((o, p), c), w) in out.iter_mut().zip(p).zip(&self.center).zip(&self.weight) {
                *o = -w * (p - c);
            }
        }
    }

    struct Zero;
    impl ConcaveObjective for Zero {
        fn value(&self, _: &[f64]) -> f64 {
            0.0
        }
        fn gradient(&self, _: &[f64], out: &mut [f64]) {
            out.fill(0.0);
        }
    }

    #[test]
    fn exp_map_symmetric() {
        let p = exp_map(&[0.0; 4], 1.0);
        for v in p {
            assert!((v - 0.2).abs() < 1e-15);
        }
        assert_eq!(exp_map(&[0.0], 2.0), vec![1.0]);
    }

    #[test]
    fn exp_map_saturates() {
        let p = exp_map(&[60.0, 0.0, 0.0], 3.0);
        assert!((p[0] - 3.0).abs() < 1e-12);
        assert!(p[1] < 1e-20 && p[1] > 0.0);
        assert!(p.iter().sum::<f64>() <= 3.0);
        // Far beyond the range of exp(): ratios survive.
        let p = exp_map(&[1000.0, 1000.0 + 2f64.ln()], 3.0);
        assert!((p[0] - 1.0).abs() < 1e-12 && (p[1] - 2.0).abs() < 1e-12);
        let p = exp_map(&[-1000.0, 0.0], 2.0);
        assert_eq!(p[0], 0.0);
        assert_eq!(p[1], 1.0);
    }

    #[test]
    fn zero_gradient_is_a_fixed_point() {
        let out = learn(&Zero, 2.0, &[0.5, 0.0, 0.1], &LearningParams::default());
        assert!(out.converged);
        let share = 2.0 / 4.0;
        assert_eq!(out.powers, vec![0.5 + share, share, 0.1 + share]);
    }

    #[test]
    fn interior_quadratic_maximizer() {
        // Maximizer (0.2, 0.3, 0.1) lies inside Σ ≤ 1.
        let q = Quadratic {
            center: vec![0.2, 0.3, 0.1],
            weight: vec![1.0, 2.0, 4.0],
        };
        let out = learn(&q, 1.0, &[0.0; 3], &LearningParams::default());
        assert!(out.converged);
        for (p, c) in out.powers.iter().zip(&q.center) {
            assert!((p - c).abs() < 1e-4, "{:?}", out.powers);
        }
    }

    #[test]
    fn offsets_shift_the_feasible_set() {
        let q = Quadratic {
            center: vec![1.2, 0.5],
            weight: vec![1.0, 1.0],
        };
        let offsets = [1.0, 0.4];
        let mut ok = true;
        let out = learn_observed(&q, 0.5, &offsets, &LearningParams::default(), None, |p| {
            ok &= p.iter().zip(&offsets).all(|(p, f)| p >= f);
            ok &= p.iter().zip(&offsets).map(|(p, f)| p - f).sum::<f64>() <= 0.5 * (1.0 + 1e-12);
        });
        assert!(ok);
        assert!((out.powers[0] - 1.2).abs() < 1e-4 && (out.powers[1] - 0.5).abs() < 1e-4);
    }

    #[test]
    fn zero_budget_returns_offsets() {
        let out = learn(&Zero, 0.0, &[0.3, 0.2], &LearningParams::default());
        assert_eq!(out.powers, vec![0.3, 0.2]);
        assert_eq!(out.iterations, 0);
    }

    #[test]
    fn params_validation() {
        assert!(LearningParams::default().validate().is_ok());
        let bad = LearningParams {
            step_exponent: 0.5,
            ..LearningParams::default()
        };
        assert!(bad.validate().is_err());
    }
}
