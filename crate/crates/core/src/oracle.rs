//! Independent reference solvers used to validate the main algorithms on
//! small instances. None of these share code paths with the solver beyond
//! the model's free functions.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::learning::ConcaveObjective;
use crate::model;
use crate::scenario::{PowerAllocation, Scenario};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    /// Grid points per power dimension, endpoints included.
    pub points: usize,
    /// Refuse grids with more joint points than this.
    pub cap: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            points: 50,
            cap: 1e7,
        }
    }
}

/// Integer compositions `(i_1..i_N)` with `Σ i ≤ m`.
fn simplex_lattice(dim: usize, m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0; dim];
    fn rec(pos: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if pos == cur.len() {
            out.push(cur.clone());
            return;
        }
        for i in 0..=left {
            cur[pos] = i;
            rec(pos + 1, left - i, cur, out);
        }
        cur[pos] = 0;
    }
    rec(0, m, &mut cur, &mut out);
    out
}

/// `C(m + N, N)`, the number of lattice points in one user's simplex.
fn lattice_size(dim: usize, m: usize) -> f64 {
    (1..=dim).fold(1.0, |acc, i| acc * (m + i) as f64 / i as f64)
}

/// Exhaustive search over the cross product of per-user simplex grids with
/// spacing `P_max,k / (points - 1)`. Ties go to the first point enumerated.
pub fn grid_search_gee(s: &Scenario, spec: &GridSpec) -> Result<(PowerAllocation, f64)> {
    if spec.points < 2 {
        return Err(Error::InvalidConfig("grid needs at least 2 points per dimension".into()));
    }
    let (k, n) = (s.user_count, s.subcarrier_count);
    let m = spec.points - 1;
    let total = lattice_size(n, m).powi(k as i32);
    if total > spec.cap {
        return Err(Error::GridTooLarge { points: total, cap: spec.cap });
    }
    let lattice = simplex_lattice(n, m);
    let count = lattice.len();
    let powers = |user: usize, idx: usize| -> Vec<f64> {
        let step = s.p_max[user] / m as f64;
        lattice[idx].iter().map(|&i| i as f64 * step).collect()
    };

    // Odometer over users 1..K for each choice of user 0.
    let best = (0..count)
        .into_par_iter()
        .map(|first| {
            let mut digits = vec![0usize; k];
            digits[0] = first;
            let mut p = PowerAllocation::zeros(k, n);
            p.set_user(0, &powers(0, first));
            let mut best = (f64::NEG_INFINITY, Vec::new());
            loop {
                for u in 1..k {
                    p.set_user(u, &powers(u, digits[u]));
                }
                let g = model::gee(s, &p);
                if g > best.0 {
                    best = (g, digits.clone());
                }
                let mut u = k;
                loop {
                    u -= 1;
                    if u == 0 {
                        return best;
                    }
                    digits[u] += 1;
                    if digits[u] < count {
                        break;
                    }
                    digits[u] = 0;
                }
            }
        })
        .reduce(
            || (f64::NEG_INFINITY, Vec::new()),
            |a, b| {
                if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
                    b
                } else {
                    a
                }
            },
        );
    let mut p = PowerAllocation::zeros(k, n);
    for (u, &d) in best.1.iter().enumerate() {
        p.set_user(u, &powers(u, d));
    }
    Ok((p, best.0))
}

/// Euclidean projection onto `{p ≥ floors, Σ (p - floors) ≤ budget}`.
pub fn project_capped_simplex(v: &[f64], floors: &[f64], budget: f64) -> Vec<f64> {
    let w: Vec<f64> = v.iter().zip(floors).map(|(a, f)| a - f).collect();
    let clipped_sum: f64 = w.iter().map(|x| x.max(0.0)).sum();
    let shifted: Vec<f64> = if clipped_sum <= budget {
        w.iter().map(|x| x.max(0.0)).collect()
    } else {
        let mut sorted = w.clone();
        sorted.sort_by(|a, b| b.total_cmp(a));
        let mut acc = 0.0;
        let mut theta = 0.0;
        for (i, &x) in sorted.iter().enumerate() {
            acc += x;
            let t = (acc - budget) / (i + 1) as f64;
            if x - t > 0.0 {
                theta = t;
            } else {
                break;
            }
        }
        w.iter().map(|x| (x - theta).max(0.0)).collect()
    };
    shifted.iter().zip(floors).map(|(x, f)| x + f).collect()
}

#[derive(Clone, Copy, Debug)]
pub struct PgOptions {
    pub max_iterations: usize,
    /// Stop once an accepted step moves less than `tolerance · budget`.
    pub tolerance: f64,
}

impl Default for PgOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200_000,
            tolerance: 1e-13,
        }
    }
}

/// Projected gradient ascent with Armijo backtracking along the projection
/// arc, started from the floors plus an even split of the budget.
pub fn projected_gradient_reference<O: ConcaveObjective + ?Sized>(
    objective: &O,
    budget: f64,
    floors: &[f64],
    opts: &PgOptions,
) -> Vec<f64> {
    let dim = floors.len();
    let mut x: Vec<f64> = floors.iter().map(|f| f + budget / (dim as f64 + 1.0)).collect();
    if budget <= 0.0 {
        return floors.to_vec();
    }
    let mut fx = objective.value(&x);
    let mut g = vec![0.0; dim];
    let mut t = f64::NAN;
    for _ in 0..opts.max_iterations {
        objective.gradient(&x, &mut g);
        let gmax = g.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if gmax == 0.0 {
            break;
        }
        if !t.is_finite() {
            t = budget / gmax;
        } else {
            t *= 2.0;
        }
        let mut moved = None;
        for _ in 0..200 {
            let trial: Vec<f64> = x.iter().zip(&g).map(|(a, d)| a + t * d).collect();
            let y = project_capped_simplex(&trial, floors, budget);
            let fy = objective.value(&y);
            let lin: f64 = g.iter().zip(y.iter().zip(&x)).map(|(d, (a, b))| d * (a - b)).sum();
            if fy >= fx + 1e-4 * lin {
                moved = Some((y, fy));
                break;
            }
            t *= 0.5;
        }
        let Some((y, fy)) = moved else { break };
        let step = y.iter().zip(&x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        x = y;
        fx = fy;
        if step < opts.tolerance * budget {
            break;
        }
    }
    x
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Derivative {
    pub value: f64,
    /// The central stencil left the domain and a forward difference was used.
    pub one_sided: bool,
}

/// Central difference of `f` along coordinate `i`, falling back to a forward
/// difference when `x[i] - h` would drop below `lower`.
pub fn finite_diff<F: Fn(&[f64]) -> f64>(f: F, x: &[f64], i: usize, h: f64, lower: f64) -> Derivative {
    let mut probe = x.to_vec();
    probe[i] = x[i] + h;
    let up = f(&probe);
    if x[i] - h >= lower {
        probe[i] = x[i] - h;
        Derivative {
            value: (up - f(&probe)) / (2.0 * h),
            one_sided: false,
        }
    } else {
        Derivative {
            value: (up - f(x)) / h,
            one_sided: true,
        }
    }
}

/// Maximizer of `Σ log2(1 + g_n p_n)` subject to `Σ p_n ≤ budget`, `p ≥ 0`.
pub fn water_filling(gains: &[f64], budget: f64) -> Vec<f64> {
    let mut order: Vec<usize> = (0..gains.len()).filter(|&i| gains[i] > 0.0).collect();
    order.sort_by(|&a, &b| gains[b].total_cmp(&gains[a]));
    let mut level = 0.0;
    let mut inv_sum = 0.0;
    for (used, &i) in order.iter().enumerate() {
        inv_sum += 1.0 / gains[i];
        let candidate = (budget + inv_sum) / (used + 1) as f64;
        if candidate > 1.0 / gains[i] {
            level = candidate;
        } else {
            break;
        }
    }
    gains
        .iter()
        .map(|&g| if g > 0.0 { (level - 1.0 / g).max(0.0) } else { 0.0 })
        .collect()
}

/// Golden-section maximization of a unimodal function on `[lo, hi]`.
pub fn golden_section<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - r * (hi - lo);
    let mut b = lo + r * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    while hi - lo > tol {
        if fa < fb {
            lo = a;
            a = b;
            fa = fb;
            b = lo + r * (hi - lo);
            fb = f(b);
        } else {
            hi = b;
            b = a;
            fb = fa;
            a = hi - r * (hi - lo);
            fa = f(a);
        }
    }
    let mid = 0.5 * (lo + hi);
    [lo, mid, hi]
        .into_iter()
        .max_by(|x, y| f(*x).total_cmp(&f(*y)))
        .unwrap()
}

/// Optimal power and GEE of a one-user, one-subcarrier scenario. The GEE is
/// a concave rate over an affine power and hence unimodal in `p`.
pub fn single_link_optimum(s: &Scenario) -> Result<(f64, f64)> {
    if s.user_count != 1 || s.subcarrier_count != 1 {
        return Err(Error::InvalidScenario("single-link oracle needs K = N = 1".into()));
    }
    let eval = |v: f64| model::gee(s, &PowerAllocation::from_rows(&[vec![v]]));
    let p = golden_section(eval, 0.0, s.p_max[0], s.p_max[0] * 1e-15);
    Ok((p, eval(p)))
}
