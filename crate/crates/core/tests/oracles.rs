//! Cross-checks against small reference computations written out here,
//! independently of the crate's own oracle module.

use approx::assert_relative_eq;
use geeopt::brd::run_brd;
use geeopt::gen::generate;
use geeopt::oracle::{project_capped_simplex, water_filling};
use geeopt::qos::rate_feasibility;
use geeopt::sweep::subcarrier_violations;
use geeopt::validate::random_point;
use geeopt::{maximize_gee, model, BrdOptions, GenConfig, LearningParams, PowerAllocation, QosMode, Scenario, SolverOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn scenario(seed: u64, users: usize, subcarriers: usize, p_max_dbw: f64, xi_ratio: f64) -> Scenario {
    generate(&GenConfig {
        users,
        subcarriers,
        p_max_dbw,
        xi_ratio,
        seed,
        ..GenConfig::default()
    })
    .unwrap()
}

fn naive_gee(s: &Scenario, p: &[Vec<f64>]) -> (Vec<f64>, f64) {
    let mut rates = vec![0.0; s.user_count];
    let mut power = s.p_static.iter().sum::<f64>();
    for k in 0..s.user_count {
        for n in 0..s.subcarrier_count {
            let mut denom = s.noise[n] + s.xi[k][n] * p[k][n];
            for l in 0..s.user_count {
                if l != k {
                    denom += s.beta[l][k][n] * p[l][n];
                }
            }
            rates[k] += (1.0 + s.alpha[k][n] * p[k][n] / denom).log2();
            power += s.mu[k][n] * p[k][n];
        }
    }
    let total: f64 = rates.iter().sum();
    (rates, s.bandwidth * total / power)
}

/// Water level found by bisection.
fn water_level(gains: &[f64], budget: f64) -> Vec<f64> {
    let fill = |level: f64| gains.iter().map(|g| (level - 1.0 / g).max(0.0)).collect::<Vec<_>>();
    let (mut lo, mut hi) = (0.0, budget + gains.iter().map(|g| 1.0 / g).fold(0.0, f64::max));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if fill(mid).iter().sum::<f64>() > budget {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    fill(lo)
}

fn own_rate(gains: &[f64], p: &[f64]) -> f64 {
    gains.iter().zip(p).map(|(g, x)| (1.0 + g * x).log2()).sum()
}

#[test]
fn rates_and_gee_match_direct_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..40 {
        let s = scenario(rng.random(), rng.random_range(1..=5), rng.random_range(1..=5), rng.random_range(-30.0..10.0), 0.01);
        let p = random_point(&mut rng, &s);
        let (rates, gee) = naive_gee(&s, &p.rows());
        for (a, b) in rates.iter().zip(model::user_rates(&s, &p)) {
            assert_relative_eq!(*a, b, max_relative = 1e-11, epsilon = 1e-14);
        }
        assert_relative_eq!(gee, model::gee(&s, &p), max_relative = 1e-11);
    }
}

#[test]
fn water_filling_agrees_with_bisection() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..200 {
        let n = rng.random_range(1..=8);
        let gains: Vec<f64> = (0..n).map(|_| 10f64.powf(rng.random_range(-2.0..3.0))).collect();
        let budget = 10f64.powf(rng.random_range(-3.0..1.0));
        let fast = water_filling(&gains, budget);
        let slow = water_level(&gains, budget);
        assert_relative_eq!(own_rate(&gains, &fast), own_rate(&gains, &slow), max_relative = 1e-12);
        assert_relative_eq!(fast.iter().sum::<f64>(), budget, max_relative = 1e-12);
    }
}

#[test]
fn feasibility_maximum_is_water_filling() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..30 {
        let s = scenario(rng.random(), 1, rng.random_range(1..=6), rng.random_range(-30.0..10.0), 0.0);
        let p = PowerAllocation::uniform(&s);
        let out = rate_feasibility(&s, 0, &p, &LearningParams::default());
        let gains: Vec<f64> = (0..s.subcarrier_count).map(|n| s.alpha[0][n] / s.noise[n]).collect();
        let best = own_rate(&gains, &water_level(&gains, s.p_max[0]));
        assert!(out.max_rate <= best * (1.0 + 1e-12));
        assert_relative_eq!(out.max_rate, best, max_relative = 1e-7);
    }
}

#[test]
fn single_user_brd_at_zero_price_is_water_filling() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..20 {
        let s = scenario(rng.random(), 1, rng.random_range(1..=6), rng.random_range(-30.0..10.0), 0.0);
        let out = run_brd(&s, &PowerAllocation::uniform(&s), 0.0, &QosMode::None, &BrdOptions::default(), &LearningParams::default()).unwrap();
        let gains: Vec<f64> = (0..s.subcarrier_count).map(|n| s.alpha[0][n] / s.noise[n]).collect();
        let best = own_rate(&gains, &water_level(&gains, s.p_max[0]));
        assert_relative_eq!(model::sum_rate(&s, &out.allocation), best, max_relative = 1e-6);
    }
}

/// Capped-simplex projection by bisection on the shift.
fn project_by_bisection(v: &[f64], floors: &[f64], budget: f64) -> Vec<f64> {
    let at = |t: f64| v.iter().zip(floors).map(|(x, f)| f + (x - f - t).max(0.0)).collect::<Vec<_>>();
    let spend = |x: &[f64]| x.iter().zip(floors).map(|(a, f)| a - f).sum::<f64>();
    if spend(&at(0.0)) <= budget {
        return at(0.0);
    }
    let (mut lo, mut hi) = (0.0, v.iter().zip(floors).map(|(x, f)| x - f).fold(0.0, f64::max));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if spend(&at(mid)) > budget {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    at(hi)
}

#[test]
fn projection_agrees_with_bisection() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for _ in 0..500 {
        let n = rng.random_range(1..=8);
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..2.0)).collect();
        let floors: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..0.3)).collect();
        let budget = rng.random_range(0.0..2.0);
        let a = project_capped_simplex(&v, &floors, budget);
        let b = project_by_bisection(&v, &floors, budget);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() <= 1e-12, "{a:?} vs {b:?}");
        }
    }
}

/// With one user the GEE is a concave rate over an affine power, so the
/// solver should reach the global optimum. Compared against a scan of the
/// two-subcarrier simplex, log-spaced in total power and linear in the split.
#[test]
fn single_user_solver_matches_simplex_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    for _ in 0..8 {
        let s = scenario(rng.random(), 1, 2, rng.random_range(-30.0..10.0), [0.0, 0.01, 0.1][rng.random_range(0..3)]);
        let r = maximize_gee(&s, &SolverOptions::default()).unwrap();
        let cap = s.p_max[0];
        let mut best = 0.0f64;
        for i in 0..=1500 {
            let total = cap * 10f64.powf(-9.0 * (1.0 - i as f64 / 1500.0));
            for j in 0..=300 {
                let share = j as f64 / 300.0;
                let row = vec![total * share, total * (1.0 - share)];
                best = best.max(naive_gee(&s, &[row]).1);
            }
        }
        assert!(r.gee >= best * (1.0 - 1e-4), "solver {} vs scan {best}", r.gee);
        assert!(r.gee <= best * (1.0 + 1e-3), "solver {} vs scan {best}", r.gee);
    }
}

#[test]
fn single_link_solver_matches_ternary_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..20 {
        let s = scenario(rng.random(), 1, 1, rng.random_range(-30.0..10.0), [0.0, 0.01, 0.1][rng.random_range(0..3)]);
        let g = |x: f64| naive_gee(&s, &[vec![x]]).1;
        let (mut lo, mut hi) = (0.0, s.p_max[0]);
        for _ in 0..300 {
            let a = lo + (hi - lo) / 3.0;
            let b = hi - (hi - lo) / 3.0;
            if g(a) < g(b) {
                lo = a;
            } else {
                hi = b;
            }
        }
        let best = g(0.5 * (lo + hi));
        let r = maximize_gee(&s, &SolverOptions::default()).unwrap();
        assert_relative_eq!(r.gee, best, max_relative = 1e-6);
    }
}

/// At the generator defaults every subcarrier has `α/ξ = 100`.
#[test]
fn rate_ceiling_at_defaults() {
    let s = generate(&GenConfig::default()).unwrap();
    let per_user = s.subcarrier_count as f64 * 101f64.log2();
    assert_eq!(s.subcarrier_count, 4);
    for k in 0..s.user_count {
        let direct: f64 = (0..s.subcarrier_count).map(|n| (1.0 + s.alpha[k][n] / s.xi[k][n]).log2()).sum();
        assert_relative_eq!(direct, per_user, max_relative = 1e-12);
        assert_relative_eq!(model::max_rate_bound(&s, k).total.value().unwrap(), per_user, max_relative = 1e-12);
    }
}

#[test]
fn generalized_mode_meets_per_subcarrier_targets() {
    let mut rng = ChaCha8Rng::seed_from_u64(18);
    for _ in 0..6 {
        let mut s = scenario(rng.random(), 4, 4, -20.0, 0.01);
        s.r_min = vec![0.266; s.user_count];
        let r = maximize_gee(&s, &SolverOptions::with_qos(QosMode::generalized())).unwrap();
        assert_eq!(subcarrier_violations(&s, &r), 0);
        assert!(r.allocation.is_feasible(&s, 1e-12));
    }
}

#[test]
fn outer_iterates_improve_while_objective_is_nonnegative() {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    for _ in 0..10 {
        let s = scenario(rng.random(), 4, 4, rng.random_range(-30.0..10.0), 0.01);
        let r = maximize_gee(&s, &SolverOptions::default()).unwrap();
        for (j, f) in r.f_bar.iter().enumerate() {
            if *f >= 0.0 && j + 1 < r.lambdas.len() {
                assert!(r.lambdas[j + 1] >= r.lambdas[j] - 1e-12);
            }
        }
    }
}
