//! Rate, energy-efficiency and surrogate-utility evaluation.
//!
//! All rates are in bits (log2); derivatives carry the `1/ln 2` factor. The
//! free functions take a whole [`Scenario`] and [`PowerAllocation`] and are
//! written for clarity. [`UserView`] caches everything that does not depend
//! on one user's powers so the inner learning loop runs in O(K·N).

use std::f64::consts::LN_2;

use crate::scenario::{PowerAllocation, Scenario};

/// `log2(1 + x)`, accurate for tiny `x` where a weak link's rate lives.
#[inline]
pub fn log2_1p(x: f64) -> f64 {
    x.ln_1p() / LN_2
}

/// Interference seen by user `k`'s receiver on subcarrier `n`.
pub fn interference(s: &Scenario, p: &PowerAllocation, k: usize, n: usize) -> f64 {
    (0..s.user_count)
        .filter(|&l| l != k)
        .map(|l| s.beta[l][k][n] * p.get(l, n))
        .sum()
}

pub fn sinr(s: &Scenario, p: &PowerAllocation, k: usize, n: usize) -> f64 {
    let pk = p.get(k, n);
    pk * s.alpha[k][n] / (s.noise[n] + s.xi[k][n] * pk + interference(s, p, k, n))
}

pub fn user_rate(s: &Scenario, p: &PowerAllocation, k: usize) -> f64 {
    (0..s.subcarrier_count)
        .map(|n| log2_1p(sinr(s, p, k, n)))
        .sum()
}

pub fn user_rates(s: &Scenario, p: &PowerAllocation) -> Vec<f64> {
    (0..s.user_count).map(|k| user_rate(s, p, k)).collect()
}

pub fn sum_rate(s: &Scenario, p: &PowerAllocation) -> f64 {
    (0..s.user_count).map(|k| user_rate(s, p, k)).sum()
}

/// Static plus radiated power, `P_c + Σ μ p`.
pub fn total_power(s: &Scenario, p: &PowerAllocation) -> f64 {
    let mut radiated = 0.0;
    for k in 0..s.user_count {
        for n in 0..s.subcarrier_count {
            radiated += s.mu[k][n] * p.get(k, n);
        }
    }
    s.total_static_power() + radiated
}

/// Global energy efficiency in bit/Joule.
pub fn gee(s: &Scenario, p: &PowerAllocation) -> f64 {
    s.bandwidth * (sum_rate(s, p) / total_power(s, p))
}

/// Subtractive objective `sum_rate - λ·total_power` (bandwidth excluded).
pub fn potential(s: &Scenario, p: &PowerAllocation, lambda: f64) -> f64 {
    sum_rate(s, p) - lambda * total_power(s, p)
}

/// Rate ceiling reached as a user's power grows without bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RateBound {
    Bounded(f64),
    /// No self-interference on a useful channel.
    Unbounded,
}

impl RateBound {
    pub fn value(self) -> Option<f64> {
        match self {
            RateBound::Bounded(v) => Some(v),
            RateBound::Unbounded => None,
        }
    }

    pub fn is_bounded(self) -> bool {
        matches!(self, RateBound::Bounded(_))
    }

    /// `true` when `rate` does not exceed the bound.
    pub fn admits(self, rate: f64) -> bool {
        match self {
            RateBound::Bounded(v) => rate <= v,
            RateBound::Unbounded => true,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MaxRateBound {
    pub per_subcarrier: Vec<RateBound>,
    pub total: RateBound,
}

pub fn subcarrier_rate_bound(s: &Scenario, k: usize, n: usize) -> RateBound {
    let (a, x) = (s.alpha[k][n], s.xi[k][n]);
    if a == 0.0 {
        RateBound::Bounded(0.0)
    } else if x == 0.0 {
        RateBound::Unbounded
    } else {
        RateBound::Bounded(log2_1p(a / x))
    }
}

pub fn max_rate_bound(s: &Scenario, k: usize) -> MaxRateBound {
    let per_subcarrier: Vec<RateBound> = (0..s.subcarrier_count)
        .map(|n| subcarrier_rate_bound(s, k, n))
        .collect();
    let total = per_subcarrier
        .iter()
        .try_fold(0.0, |acc, b| b.value().map(|v| acc + v))
        .map_or(RateBound::Unbounded, RateBound::Bounded);
    MaxRateBound {
        per_subcarrier,
        total,
    }
}

/// Denominator of user `i`'s SINR on subcarrier `n` with the self term
/// weighted by `own` and user `k`'s power replaced by `pk`.
fn receiver_load(s: &Scenario, p: &PowerAllocation, i: usize, k: usize, n: usize, own: f64, pk: f64) -> f64 {
    let mut d = s.noise[n] + own * p.get(i, n) + s.beta[k][i][n] * pk;
    for l in 0..s.user_count {
        if l != i && l != k {
            d += s.beta[l][i][n] * p.get(l, n);
        }
    }
    d
}

/// Slope of the linearized interference term, evaluated at `p_bar_k`.
pub fn phi(s: &Scenario, k: usize, n: usize, p: &PowerAllocation, p_bar_k: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in (0..s.user_count).filter(|&i| i != k) {
        let d = receiver_load(s, p, i, k, n, s.xi[i][n], p_bar_k[n]);
        acc += s.beta[k][i][n] / LN_2 / d;
    }
    -acc
}

/// Concave lower bound of user `k`'s utility, linearized at `p_bar_k`.
///
/// `p` supplies both the candidate powers of user `k` (row `k`) and the
/// fixed powers of everyone else. Constant terms are kept so that the value
/// equals the true utility when `p.user(k) == p_bar_k`.
pub fn surrogate_utility(s: &Scenario, k: usize, p: &PowerAllocation, p_bar_k: &[f64], lambda: f64) -> f64 {
    let nsub = s.subcarrier_count;
    let p_c = s.total_static_power();
    let mut total = 0.0;
    for n in 0..nsub {
        let pk = p.get(k, n);
        let mut u = log2_1p(sinr(s, p, k, n));
        u += phi(s, k, n, p, p_bar_k) * (pk - p_bar_k[n]);
        for i in (0..s.user_count).filter(|&i| i != k) {
            let eta = s.alpha[i][n] + s.xi[i][n];
            u += receiver_load(s, p, i, k, n, eta, pk).log2();
            u -= receiver_load(s, p, i, k, n, s.xi[i][n], p_bar_k[n]).log2();
        }
        let others: f64 = (0..s.user_count)
            .filter(|&l| l != k)
            .map(|l| s.mu[l][n] * p.get(l, n))
            .sum();
        u -= lambda * (p_c / nsub as f64 + s.mu[k][n] * pk + others);
        total += u;
    }
    total
}

/// Derivative of the surrogate utility with respect to `p[k][n]`; `nu` is
/// `λ·μ[k][n] - φ[k][n]` plus any extra linear price.
pub fn marginal_utility(s: &Scenario, k: usize, n: usize, p: &PowerAllocation, nu: f64) -> f64 {
    let view = UserView::new(s, p, k);
    view.marginal_at(n, p.get(k, n), nu)
}

/// Diagonal entry of the surrogate Hessian for user `k` on subcarrier `n`.
pub fn hessian_diag(s: &Scenario, k: usize, n: usize, p: &PowerAllocation) -> f64 {
    let view = UserView::new(s, p, k);
    view.hessian_at(n, p.get(k, n))
}

#[derive(Clone, Copy, Debug)]
struct CrossTerm {
    /// Gain from user `k` into receiver `i`.
    gain: f64,
    /// Receiver `i` load excluding user `k`, with its own power weighted by η.
    eta_base: f64,
    /// Same, weighted by ξ.
    xi_base: f64,
    /// Receiver `i`'s useful signal `α·p`, the difference of the two bases.
    signal: f64,
    user: usize,
}

/// User `k`'s utility landscape with every other user's powers frozen.
#[derive(Clone, Debug)]
pub struct UserView<'a> {
    s: &'a Scenario,
    k: usize,
    /// Noise plus interference at user `k`'s receiver.
    own_base: Vec<f64>,
    cross: Vec<CrossTerm>,
    /// `λ`-independent radiated power of the other users.
    others_power: f64,
}

impl<'a> UserView<'a> {
    pub fn new(s: &'a Scenario, p: &PowerAllocation, k: usize) -> Self {
        let (nk, nsub) = (s.user_count, s.subcarrier_count);
        let mut own_base = Vec::with_capacity(nsub);
        let mut cross = Vec::with_capacity(nsub * nk.saturating_sub(1));
        let mut others_power = 0.0;
        for n in 0..nsub {
            own_base.push(s.noise[n] + interference(s, p, k, n));
            for i in (0..nk).filter(|&i| i != k) {
                let mut base = s.noise[n];
                for l in (0..nk).filter(|&l| l != i && l != k) {
                    base += s.beta[l][i][n] * p.get(l, n);
                }
                let pi = p.get(i, n);
                cross.push(CrossTerm {
                    gain: s.beta[k][i][n],
                    eta_base: base + (s.alpha[i][n] + s.xi[i][n]) * pi,
                    xi_base: base + s.xi[i][n] * pi,
                    signal: s.alpha[i][n] * pi,
                    user: i,
                });
                others_power += s.mu[i][n] * pi;
            }
        }
        Self {
            s,
            k,
            own_base,
            cross,
            others_power,
        }
    }

    pub fn user(&self) -> usize {
        self.k
    }

    pub fn scenario(&self) -> &Scenario {
        self.s
    }

    pub fn subcarriers(&self) -> usize {
        self.own_base.len()
    }

    #[inline]
    fn cross_at(&self, n: usize) -> &[CrossTerm] {
        let m = self.s.user_count - 1;
        &self.cross[n * m..(n + 1) * m]
    }

    #[inline]
    fn eta(&self, n: usize) -> f64 {
        self.s.alpha[self.k][n] + self.s.xi[self.k][n]
    }

    /// User `k`'s rate on subcarrier `n` at power `pk`.
    #[inline]
    pub fn own_rate_at(&self, n: usize, pk: f64) -> f64 {
        let b = self.own_base[n];
        log2_1p(pk * self.s.alpha[self.k][n] / (b + self.s.xi[self.k][n] * pk))
    }

    pub fn own_rate(&self, pk: &[f64]) -> f64 {
        pk.iter().enumerate().map(|(n, &v)| self.own_rate_at(n, v)).sum()
    }

    /// Rates of all users as functions of user `k`'s powers.
    pub fn all_rates(&self, pk: &[f64]) -> Vec<f64> {
        let mut rates = vec![0.0; self.s.user_count];
        for (n, &v) in pk.iter().enumerate() {
            rates[self.k] += self.own_rate_at(n, v);
            for c in self.cross_at(n) {
                rates[c.user] += log2_1p(c.signal / (c.xi_base + c.gain * v));
            }
        }
        rates
    }

    pub fn total_power(&self, pk: &[f64]) -> f64 {
        let own: f64 = pk
            .iter()
            .zip(&self.s.mu[self.k])
            .map(|(p, mu)| p * mu)
            .sum();
        self.s.total_static_power() + self.others_power + own
    }

    /// The shared potential `V` as a function of user `k`'s powers.
    pub fn potential(&self, pk: &[f64], lambda: f64) -> f64 {
        self.all_rates(pk).iter().sum::<f64>() - lambda * self.total_power(pk)
    }

    /// Linearization slopes `φ[k][n]` at `p_bar`.
    pub fn phi(&self, p_bar: &[f64]) -> Vec<f64> {
        (0..self.subcarriers())
            .map(|n| {
                -self
                    .cross_at(n)
                    .iter()
                    .map(|c| c.gain / LN_2 / (c.xi_base + c.gain * p_bar[n]))
                    .sum::<f64>()
            })
            .collect()
    }

    /// Reduced surrogate objective: every term that depends on user `k`'s
    /// powers, with the linear part folded into `nu`.
    pub fn reduced_surrogate(&self, pk: &[f64], nu: &[f64]) -> f64 {
        let mut total = 0.0;
        for (n, &v) in pk.iter().enumerate() {
            total += self.own_rate_at(n, v) - nu[n] * v;
            // One log per eight factors: each factor is at least the noise
            // power, so a product of eight stays far above f64 underflow.
            for chunk in self.cross_at(n).chunks(8) {
                let product: f64 = chunk.iter().map(|c| c.eta_base + c.gain * v).product();
                total += product.log2();
            }
        }
        total
    }

    #[inline]
    pub fn marginal_at(&self, n: usize, pk: f64, nu: f64) -> f64 {
        let b = self.own_base[n];
        let (eta, xi) = (self.eta(n), self.s.xi[self.k][n]);
        let mut acc = eta / (b + eta * pk) - xi / (b + xi * pk);
        for c in self.cross_at(n) {
            acc += c.gain / (c.eta_base + c.gain * pk);
        }
        acc / LN_2 - nu
    }

    pub fn marginal(&self, pk: &[f64], nu: &[f64], out: &mut [f64]) {
        for (n, o) in out.iter_mut().enumerate() {
            *o = self.marginal_at(n, pk[n], nu[n]);
        }
    }

    #[inline]
    pub fn hessian_at(&self, n: usize, pk: f64) -> f64 {
        let b = self.own_base[n];
        let (eta, xi) = (self.eta(n), self.s.xi[self.k][n]);
        let dx = b + xi * pk;
        let de = b + eta * pk;
        let mut acc = xi * xi / (dx * dx) - eta * eta / (de * de);
        for c in self.cross_at(n) {
            let d = c.eta_base + c.gain * pk;
            acc -= c.gain * c.gain / (d * d);
        }
        acc / LN_2
    }

    /// Gradient of user `k`'s own rate, the driver of the feasibility test.
    pub fn own_rate_gradient(&self, pk: &[f64], out: &mut [f64]) {
        for (n, o) in out.iter_mut().enumerate() {
            let b = self.own_base[n];
            let (eta, xi) = (self.eta(n), self.s.xi[self.k][n]);
            *o = (eta / (b + eta * pk[n]) - xi / (b + xi * pk[n])) / LN_2;
        }
    }

    /// Gradient of the barrier with respect to user `k`'s powers at `pk`,
    /// split into the own-rate part and the cross part. Users whose slack is
    /// not positive sit on the relaxed constant and contribute nothing to the
    /// cross part.
    pub fn barrier_terms(&self, pk: &[f64], rho: f64) -> Result<Vec<(f64, f64)>, f64> {
        let rates = self.all_rates(pk);
        let slack: Vec<f64> = rates
            .iter()
            .zip(&self.s.r_min)
            .map(|(r, m)| r - m)
            .collect();
        let own_slack = slack[self.k];
        if !(own_slack > 0.0) {
            return Err(own_slack);
        }
        let scale = rho / (LN_2 * LN_2);
        let mut terms = Vec::with_capacity(pk.len());
        for (n, &v) in pk.iter().enumerate() {
            let b = self.own_base[n];
            let (eta, xi) = (self.eta(n), self.s.xi[self.k][n]);
            let own = scale * (eta / (b + eta * v) - xi / (b + xi * v)) / own_slack;
            let mut cross = 0.0;
            for c in self.cross_at(n) {
                let sl = slack[c.user];
                if sl > 0.0 {
                    cross += (c.gain / (c.eta_base + c.gain * v) - c.gain / (c.xi_base + c.gain * v)) / sl;
                }
            }
            terms.push((own, scale * cross));
        }
        Ok(terms)
    }
}
