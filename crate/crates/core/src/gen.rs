//! Random network instances: users dropped uniformly on a square, path loss
//! with exponent `d`, and independent Rayleigh fading per subcarrier.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::{parse_json, Error, Result};
use crate::scenario::{Scenario, ScenarioMeta};

/// Where the receivers sit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Topology {
    /// One receiver per user, dropped uniformly like the transmitters.
    Paired,
    /// A single receiver at the center of the square.
    SingleCenter,
}

/// Generator parameters. Powers are in dBW, noise density in dBm/Hz.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenConfig {
    pub users: usize,
    pub subcarriers: usize,
    /// Square edge in meters.
    pub edge: f64,
    /// Subcarrier bandwidth in Hz.
    pub bandwidth: f64,
    pub noise_dbm_per_hz: f64,
    pub p_static_dbw: f64,
    pub p_max_dbw: f64,
    pub path_loss_exponent: f64,
    /// `ξ[k][n] = xi_ratio · α[k][n]`.
    pub xi_ratio: f64,
    pub mu: f64,
    pub r_min: f64,
    pub topology: Topology,
    pub seed: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            users: 12,
            subcarriers: 4,
            edge: 200.0,
            bandwidth: 10_930.0,
            noise_dbm_per_hz: -173.0,
            p_static_dbw: -20.0,
            p_max_dbw: -20.0,
            path_loss_exponent: 4.0,
            xi_ratio: 0.01,
            mu: 1.02,
            r_min: 0.0,
            topology: Topology::Paired,
            seed: 0,
        }
    }
}

pub fn dbw_to_watts(dbw: f64) -> f64 {
    10f64.powf(dbw / 10.0)
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Closest allowed transmitter-receiver separation in meters.
const MIN_DISTANCE: f64 = 1.0;

impl GenConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.users == 0 || self.subcarriers == 0 {
            return bad("users and subcarriers must be at least 1");
        }
        if !(self.edge > 0.0) || self.edge.is_infinite() {
            return bad("edge must be positive");
        }
        if self.edge < 2.0 * MIN_DISTANCE && self.topology == Topology::SingleCenter {
            return bad("edge too small to keep users away from the center receiver");
        }
        if !(self.path_loss_exponent > 0.0) {
            return bad("path_loss_exponent must be positive");
        }
        if !(self.xi_ratio >= 0.0) || self.xi_ratio.is_infinite() {
            return bad("xi_ratio must be non-negative");
        }
        if !(self.mu > 0.0) || !(self.bandwidth > 0.0) {
            return bad("mu and bandwidth must be positive");
        }
        if !(self.r_min >= 0.0) {
            return bad("r_min must be non-negative");
        }
        for (name, v) in [
            ("noise_dbm_per_hz", self.noise_dbm_per_hz),
            ("p_static_dbw", self.p_static_dbw),
            ("p_max_dbw", self.p_max_dbw),
        ] {
            if !v.is_finite() {
                return bad(&format!("{name} must be finite"));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: GenConfig = parse_json(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn noise_power(&self) -> f64 {
        dbm_to_watts(self.noise_dbm_per_hz) * self.bandwidth
    }
}

type Point = (f64, f64);

fn distance(a: Point, b: Point) -> f64 {
    (a.0 - b.0).hypot(a.1 - b.1)
}

fn draw_point(rng: &mut ChaCha8Rng, edge: f64) -> Point {
    (rng.random::<f64>() * edge, rng.random::<f64>() * edge)
}

/// Builds a scenario; identical configs (including the seed) give
/// bit-identical scenarios.
pub fn generate(cfg: &GenConfig) -> Result<Scenario> {
    cfg.validate()?;
    let (k, n) = (cfg.users, cfg.subcarriers);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let receivers: Vec<Point> = match cfg.topology {
        Topology::SingleCenter => vec![(cfg.edge / 2.0, cfg.edge / 2.0)],
        Topology::Paired => (0..k).map(|_| draw_point(&mut rng, cfg.edge)).collect(),
    };
    let receiver_of = |user: usize| match cfg.topology {
        Topology::SingleCenter => 0,
        Topology::Paired => user,
    };
    // Every transmitter must keep MIN_DISTANCE from every receiver, not just
    // its own, since all of them enter some SINR.
    let transmitters: Vec<Point> = (0..k)
        .map(|_| loop {
            let t = draw_point(&mut rng, cfg.edge);
            if receivers.iter().all(|&r| distance(t, r) >= MIN_DISTANCE) {
                break t;
            }
        })
        .collect();

    // gain[tx][rx][n]
    let gain: Vec<Vec<Vec<f64>>> = transmitters
        .iter()
        .map(|&t| {
            receivers
                .iter()
                .map(|&r| {
                    let path = distance(t, r).powf(-cfg.path_loss_exponent);
                    (0..n)
                        .map(|_| {
                            let fade: f64 = rng.sample(Exp1);
                            fade * path
                        })
                        .collect()
                })
                .collect()
        })
        .collect();

    let alpha: Vec<Vec<f64>> = (0..k).map(|u| gain[u][receiver_of(u)].clone()).collect();
    let xi: Vec<Vec<f64>> = alpha
        .iter()
        .map(|row| row.iter().map(|a| cfg.xi_ratio * a).collect())
        .collect();
    let beta: Vec<Vec<Vec<f64>>> = (0..k)
        .map(|l| {
            (0..k)
                .map(|u| {
                    if l == u {
                        vec![0.0; n]
                    } else {
                        gain[l][receiver_of(u)].clone()
                    }
                })
                .collect()
        })
        .collect();

    let mut s = Scenario {
        user_count: k,
        subcarrier_count: n,
        bandwidth: cfg.bandwidth,
        noise: vec![cfg.noise_power(); n],
        alpha,
        xi,
        beta,
        mu: vec![vec![cfg.mu; n]; k],
        p_static: vec![dbw_to_watts(cfg.p_static_dbw); k],
        p_max: vec![dbw_to_watts(cfg.p_max_dbw); k],
        r_min: vec![cfg.r_min; k],
        meta: Some(ScenarioMeta {
            config: cfg.clone(),
            seed: cfg.seed,
        }),
    };
    s.validate()?;
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_noise_power() {
        let sigma2 = GenConfig::default().noise_power();
        // 10^((-173 - 30) / 10) · 10930
        let expected = 10f64.powf(-20.3) * 10930.0;
        assert!((sigma2 - expected).abs() / expected < 1e-12);
        assert!((sigma2 - 5.48e-17).abs() < 0.01e-17, "{sigma2}");
    }

    #[test]
    fn xi_is_exact_fraction_of_alpha() {
        let s = generate(&GenConfig::default()).unwrap();
        for k in 0..s.user_count {
            for n in 0..s.subcarrier_count {
                assert_eq!(s.xi[k][n], 0.01 * s.alpha[k][n]);
            }
        }
    }

    #[test]
    fn same_seed_same_bytes() {
        let cfg = GenConfig {
            seed: 42,
            ..GenConfig::default()
        };
        let a = generate(&cfg).unwrap().to_json().unwrap();
        let b = generate(&cfg).unwrap().to_json().unwrap();
        assert_eq!(a, b);
        let c = generate(&GenConfig { seed: 43, ..cfg }).unwrap().to_json().unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn gains_strictly_positive() {
        for topology in [Topology::Paired, Topology::SingleCenter] {
            let s = generate(&GenConfig {
                topology,
                seed: 7,
                ..GenConfig::default()
            })
            .unwrap();
            assert!(s.noise.iter().all(|&v| v > 0.0));
            for k in 0..s.user_count {
                assert!(s.alpha[k].iter().all(|&v| v > 0.0));
                for l in (0..s.user_count).filter(|&l| l != k) {
                    assert!(s.beta[l][k].iter().all(|&v| v > 0.0));
                }
            }
        }
    }

    #[test]
    fn single_center_cross_gains_are_direct_gains() {
        let s = generate(&GenConfig {
            topology: Topology::SingleCenter,
            users: 3,
            ..GenConfig::default()
        })
        .unwrap();
        assert_eq!(s.beta[0][1], s.alpha[0]);
        assert_eq!(s.beta[2][0], s.alpha[2]);
    }

    #[test]
    fn rejects_bad_config() {
        for cfg in [
            GenConfig { edge: 0.0, ..GenConfig::default() },
            GenConfig { users: 0, ..GenConfig::default() },
            GenConfig { path_loss_exponent: -1.0, ..GenConfig::default() },
            GenConfig { xi_ratio: -0.1, ..GenConfig::default() },
        ] {
            assert!(generate(&cfg).is_err());
        }
    }

    #[test]
    fn unit_conversions() {
        assert!((dbw_to_watts(-20.0) - 0.01).abs() < 1e-15);
        assert!((dbm_to_watts(30.0) - 1.0).abs() < 1e-15);
    }
}
