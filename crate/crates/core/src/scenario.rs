//! Network instances and power allocations.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{parse_json, Error, Result};
use crate::gen::GenConfig;

/// Generator provenance stored alongside a generated scenario.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioMeta {
    pub config: GenConfig,
    pub seed: u64,
}

/// An immutable network instance.
///
/// Gains are linear and dimensionless, powers are in Watts, rates in
/// bit/s/Hz. `beta[l][k][n]` is the cross gain from the transmitter of user
/// `l` to the receiver of user `k` on subcarrier `n`; the `l == k` entries are
/// never read and are forced to zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub user_count: usize,
    pub subcarrier_count: usize,
    /// Subcarrier bandwidth in Hz.
    pub bandwidth: f64,
    /// Noise power per subcarrier in Watts.
    pub noise: Vec<f64>,
    pub alpha: Vec<Vec<f64>>,
    pub xi: Vec<Vec<f64>>,
    pub beta: Vec<Vec<Vec<f64>>>,
    /// Amplifier inefficiency per user and subcarrier.
    pub mu: Vec<Vec<f64>>,
    pub p_static: Vec<f64>,
    pub p_max: Vec<f64>,
    pub r_min: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<ScenarioMeta>,
}

fn check_len(field: &str, len: usize, expected: usize) -> Result<()> {
    if len != expected {
        return Err(Error::InvalidScenario(format!(
            "field {field} has length {len}, expected {expected}"
        )));
    }
    Ok(())
}

fn check_value(field: &str, index: &str, v: f64, strictly_positive: bool) -> Result<()> {
    let ok = v.is_finite() && if strictly_positive { v > 0.0 } else { v >= 0.0 };
    if !ok {
        let want = if strictly_positive { "> 0" } else { ">= 0" };
        return Err(Error::InvalidScenario(format!(
            "field {field}{index} = {v} violates the invariant finite and {want}"
        )));
    }
    Ok(())
}

impl Scenario {
    /// Checks every structural and numeric invariant and zeroes the unused
    /// diagonal of `beta`.
    pub fn validate(&mut self) -> Result<()> {
        let (k, n) = (self.user_count, self.subcarrier_count);
        if k == 0 || n == 0 {
            return Err(Error::InvalidScenario(
                "user_count and subcarrier_count must be positive".into(),
            ));
        }
        check_value("bandwidth", "", self.bandwidth, true)?;
        check_len("noise", self.noise.len(), n)?;
        for (j, &v) in self.noise.iter().enumerate() {
            check_value("noise", &format!("[{j}]"), v, true)?;
        }
        for (name, m, positive) in [
            ("alpha", &self.alpha, false),
            ("xi", &self.xi, false),
            ("mu", &self.mu, true),
        ] {
            check_len(name, m.len(), k)?;
            for (u, row) in m.iter().enumerate() {
                check_len(&format!("{name}[{u}]"), row.len(), n)?;
                for (j, &v) in row.iter().enumerate() {
                    check_value(name, &format!("[{u}][{j}]"), v, positive)?;
                }
            }
        }
        check_len("beta", self.beta.len(), k)?;
        for l in 0..k {
            check_len(&format!("beta[{l}]"), self.beta[l].len(), k)?;
            for u in 0..k {
                check_len(&format!("beta[{l}][{u}]"), self.beta[l][u].len(), n)?;
                for j in 0..n {
                    if l == u {
                        self.beta[l][u][j] = 0.0;
                    } else {
                        check_value("beta", &format!("[{l}][{u}][{j}]"), self.beta[l][u][j], false)?;
                    }
                }
            }
        }
        for (name, v, positive) in [
            ("p_static", &self.p_static, false),
            ("p_max", &self.p_max, true),
            ("r_min", &self.r_min, false),
        ] {
            check_len(name, v.len(), k)?;
            for (u, &x) in v.iter().enumerate() {
                check_value(name, &format!("[{u}]"), x, positive)?;
            }
        }
        if self.p_static.iter().sum::<f64>() <= 0.0 {
            return Err(Error::InvalidScenario(
                "total static power must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn total_static_power(&self) -> f64 {
        self.p_static.iter().sum()
    }

    /// Serializes to pretty JSON.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Parses and validates a JSON document.
    pub fn from_json(text: &str) -> Result<Self> {
        let mut s: Scenario = parse_json(text)?;
        s.validate()?;
        Ok(s)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}

/// A K×N matrix of transmit powers in Watts, stored row-major by user.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerAllocation {
    users: usize,
    subcarriers: usize,
    p: Vec<f64>,
}

impl PowerAllocation {
    pub fn zeros(users: usize, subcarriers: usize) -> Self {
        Self {
            users,
            subcarriers,
            p: vec![0.0; users * subcarriers],
        }
    }

    /// Every user spreads `P_max / (N + 1)` on each subcarrier, the image of
    /// zero scores under the exponential mapping.
    pub fn uniform(s: &Scenario) -> Self {
        let n = s.subcarrier_count;
        let mut a = Self::zeros(s.user_count, n);
        for k in 0..s.user_count {
            let share = s.p_max[k] / (n as f64 + 1.0);
            a.user_mut(k).fill(share);
        }
        a
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let users = rows.len();
        let subcarriers = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == subcarriers), "ragged rows");
        Self {
            users,
            subcarriers,
            p: rows.concat(),
        }
    }

    pub fn users(&self) -> usize {
        self.users
    }

    pub fn subcarriers(&self) -> usize {
        self.subcarriers
    }

    #[inline]
    pub fn get(&self, k: usize, n: usize) -> f64 {
        self.p[k * self.subcarriers + n]
    }

    #[inline]
    pub fn set(&mut self, k: usize, n: usize, v: f64) {
        self.p[k * self.subcarriers + n] = v;
    }

    pub fn user(&self, k: usize) -> &[f64] {
        &self.p[k * self.subcarriers..(k + 1) * self.subcarriers]
    }

    pub fn user_mut(&mut self, k: usize) -> &mut [f64] {
        &mut self.p[k * self.subcarriers..(k + 1) * self.subcarriers]
    }

    pub fn set_user(&mut self, k: usize, powers: &[f64]) {
        self.user_mut(k).copy_from_slice(powers);
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.p.chunks(self.subcarriers).map(<[f64]>::to_vec).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.p
    }

    /// Non-negativity and per-user budgets, the latter with relative slack
    /// `tol`.
    pub fn is_feasible(&self, s: &Scenario, tol: f64) -> bool {
        (0..self.users).all(|k| {
            let row = self.user(k);
            row.iter().all(|&v| v >= 0.0 && v.is_finite())
                && row.iter().sum::<f64>() <= s.p_max[k] * (1.0 + tol)
        })
    }
}
