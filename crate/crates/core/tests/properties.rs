use geeopt::brd::{run_brd, SurrogateObjective};
use geeopt::gen::generate;
use geeopt::learning::{exp_map, learn_observed, ConcaveObjective};
use geeopt::model::{self, UserView};
use geeopt::oracle::{grid_search_gee, project_capped_simplex, GridSpec};
use geeopt::qos;
use geeopt::validate::random_point;
use geeopt::{BrdOptions, GenConfig, LearningParams, PowerAllocation, QosMode, Scenario};
use proptest::prelude::*;
use rand::SeedableRng;
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

fn arb_scenario() -> impl Strategy<Value = Scenario> {
    (any::<u64>(), 1usize..=4, 1usize..=4, -30.0f64..10.0, prop::sample::select(vec![0.0, 0.01, 0.1]))
        .prop_map(|(seed, k, n, p, xi)| scenario(seed, k, n, p, xi))
}

fn point(s: &Scenario, seed: u64) -> PowerAllocation {
    random_point(&mut ChaCha8Rng::seed_from_u64(seed), s)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn surrogate_minorizes_the_potential(s in arb_scenario(), a in any::<u64>(), b in any::<u64>(), scale in 0.0f64..2.0) {
        let p = point(&s, a);
        let lambda = scale * model::sum_rate(&s, &p) / model::total_power(&s, &p);
        let q = point(&s, b);
        for k in 0..s.user_count {
            let p_bar = q.user(k);
            let exact = model::potential(&s, &p, lambda);
            let bound = model::surrogate_utility(&s, k, &p, p_bar, lambda);
            let size = exact.abs().max(1.0);
            prop_assert!(bound <= exact + 1e-10 * size, "{bound} > {exact}");

            let mut touch = p.clone();
            touch.set_user(k, p_bar);
            let exact = model::potential(&s, &touch, lambda);
            let bound = model::surrogate_utility(&s, k, &touch, p_bar, lambda);
            prop_assert!((bound - exact).abs() <= 1e-10 * exact.abs().max(1.0));
        }
    }

    #[test]
    fn reduced_surrogate_differs_by_a_constant(s in arb_scenario(), a in any::<u64>(), b in any::<u64>()) {
        let p = point(&s, a);
        let q = point(&s, b);
        let k = 0;
        let view = UserView::new(&s, &p, k);
        let obj = SurrogateObjective::at(&view, p.user(k), 0.3);
        let at = |row: &[f64]| {
            let mut x = p.clone();
            x.set_user(k, row);
            model::surrogate_utility(&s, k, &x, p.user(k), 0.3) - obj.value(row)
        };
        let (c0, c1) = (at(p.user(k)), at(q.user(k)));
        prop_assert!((c0 - c1).abs() <= 1e-9 * c0.abs().max(1.0), "{c0} vs {c1}");
    }

    #[test]
    fn hessian_is_negative(s in arb_scenario(), a in any::<u64>()) {
        let p = point(&s, a);
        for k in 0..s.user_count {
            for n in 0..s.subcarrier_count {
                if s.alpha[k][n] > 0.0 {
                    prop_assert!(model::hessian_diag(&s, k, n, &p) < 0.0);
                }
            }
        }
    }

    #[test]
    fn exp_map_is_strictly_inside(scores in prop::collection::vec(-80.0f64..80.0, 1..8), budget in 1e-6f64..10.0) {
        let p = exp_map(&scores, budget);
        prop_assert!(p.iter().all(|&v| v >= 0.0));
        prop_assert!(p.iter().sum::<f64>() <= budget * (1.0 + 1e-15));
    }

    #[test]
    fn projection_is_feasible_and_idempotent(
        v in prop::collection::vec(-2.0f64..2.0, 1..8),
        floor in 0.0f64..0.5,
        budget in 0.0f64..3.0,
    ) {
        let floors = vec![floor; v.len()];
        let x = project_capped_simplex(&v, &floors, budget);
        prop_assert!(x.iter().all(|&a| a >= floor));
        prop_assert!(x.iter().map(|a| a - floor).sum::<f64>() <= budget * (1.0 + 1e-12) + 1e-15);
        let y = project_capped_simplex(&x, &floors, budget);
        for (a, b) in x.iter().zip(&y) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn projection_is_nearest(v in prop::collection::vec(-2.0f64..2.0, 2..6), budget in 0.01f64..2.0, a in any::<u64>()) {
        let floors = vec![0.0; v.len()];
        let x = project_capped_simplex(&v, &floors, budget);
        let d = |q: &[f64]| q.iter().zip(&v).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
        // Any other feasible point is at least as far from v.
        let mut rng = ChaCha8Rng::seed_from_u64(a);
        for _ in 0..20 {
            let w: Vec<f64> = (0..=v.len()).map(|_| rand::Rng::random::<f64>(&mut rng)).collect();
            let t: f64 = w.iter().sum();
            let q: Vec<f64> = w[1..].iter().map(|x| budget * x / t).collect();
            prop_assert!(d(&x) <= d(&q) + 1e-12);
        }
    }

    #[test]
    fn min_power_grows_with_target_and_interference(s in arb_scenario(), a in any::<u64>(), t in 0.01f64..2.0) {
        let p = point(&s, a);
        let k = 0;
        for n in 0..s.subcarrier_count {
            let lo = qos::min_power(&s, k, n, &p, t);
            let hi = qos::min_power(&s, k, n, &p, t * 1.5);
            if let (Some(lo), Some(hi)) = (lo, hi) {
                prop_assert!(hi > lo);
            }
            if s.user_count > 1 {
                let mut louder = p.clone();
                louder.set(1, n, p.get(1, n) * 2.0);
                if let (Some(base), Some(more)) = (qos::min_power(&s, k, n, &p, t), qos::min_power(&s, k, n, &louder, t)) {
                    prop_assert!(more >= base);
                }
            }
            // The floor delivers the target exactly.
            if let Some(f) = lo {
                let mut at = p.clone();
                at.set(k, n, f);
                let rate = model::log2_1p(model::sinr(&s, &at, k, n));
                prop_assert!((rate - t).abs() <= 1e-9 * t.max(1.0), "{rate} vs {t}");
            }
        }
    }

    #[test]
    fn scenario_round_trips(s in arb_scenario()) {
        let back = Scenario::from_json(&s.to_json().unwrap()).unwrap();
        prop_assert_eq!(back, s);
    }

    #[test]
    fn learning_never_loses_value(s in arb_scenario(), a in any::<u64>(), scale in 0.0f64..2.0) {
        let p = point(&s, a);
        let lambda = scale * model::sum_rate(&s, &p) / model::total_power(&s, &p);
        let view = UserView::new(&s, &p, 0);
        let obj = SurrogateObjective::at(&view, p.user(0), lambda);
        let mut values = Vec::new();
        let n = s.subcarrier_count;
        learn_observed(&obj, s.p_max[0], &vec![0.0; n], &LearningParams::default(), None, |q| values.push(obj.value(q)));
        for w in values.windows(2) {
            prop_assert!(w[1] >= w[0]);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn brd_potential_is_monotone(s in arb_scenario(), a in any::<u64>(), scale in 0.0f64..1.5) {
        let p = point(&s, a);
        let lambda = scale * model::sum_rate(&s, &p) / model::total_power(&s, &p);
        let out = run_brd(&s, &p, lambda, &QosMode::None, &BrdOptions::default(), &LearningParams::default()).unwrap();
        for w in out.trace.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-9);
        }
        prop_assert!(out.allocation.is_feasible(&s, 1e-12));
    }

    #[test]
    fn grid_refinement_never_loses(seed in any::<u64>(), points in 3usize..12) {
        let s = scenario(seed, 1, 2, -20.0, 0.01);
        let coarse = grid_search_gee(&s, &GridSpec { points, cap: 1e7 }).unwrap().1;
        let fine = grid_search_gee(&s, &GridSpec { points: 2 * points - 1, cap: 1e7 }).unwrap().1;
        prop_assert!(fine >= coarse);
    }
}

/// Frozen grid optimum on one two-user, two-subcarrier instance.
#[test]
fn grid_regression_k2_n2() {
    let s = scenario(7, 2, 2, -20.0, 0.01);
    let (p, gee) = grid_search_gee(&s, &GridSpec::default()).unwrap();
    assert_eq!(p.as_slice().len(), 4);
    assert!((gee - GRID_K2_N2_GEE).abs() <= 1e-9 * GRID_K2_N2_GEE, "{gee:e}");
}

const GRID_K2_N2_GEE: f64 = 7.121984191949187e6;
