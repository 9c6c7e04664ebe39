//! Monte Carlo parameter sweeps: one solve per (value, mode, seed) cell,
//! averaged per (value, mode) into CSV rows.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{parse_json, Error, Result};
use crate::gen::{generate, GenConfig};
use crate::optimizer::{maximize_gee, RunReport, SolverOptions};
use crate::qos::{self, QosMode};
use crate::scenario::Scenario;

/// Environment variable capping the sweep's worker threads.
pub const THREADS_ENV: &str = "GEEOPT_THREADS";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweptParam {
    PMaxDbw,
    XiRatio,
    Rho,
    RMin,
}

impl SweptParam {
    pub fn name(self) -> &'static str {
        match self {
            SweptParam::PMaxDbw => "p_max_dbw",
            SweptParam::XiRatio => "xi_ratio",
            SweptParam::Rho => "rho",
            SweptParam::RMin => "r_min",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub param: SweptParam,
    pub values: Vec<f64>,
    pub seeds: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default)]
    pub base: GenConfig,
    #[serde(default = "default_modes")]
    pub modes: Vec<QosMode>,
    /// Shared solver settings; the `qos` field is replaced per mode.
    #[serde(default)]
    pub solver: SolverOptions,
}

fn default_modes() -> Vec<QosMode> {
    vec![QosMode::None]
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() || self.seeds == 0 || self.modes.is_empty() {
            return Err(Error::InvalidConfig(
                "sweep needs at least one value, one seed and one mode".into(),
            ));
        }
        if self.param == SweptParam::Rho && !self.modes.iter().any(|m| matches!(m, QosMode::Barrier { .. })) {
            return Err(Error::InvalidConfig("sweeping rho needs a barrier mode".into()));
        }
        self.base.validate()?;
        self.solver.validate()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: SweepConfig = parse_json(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Generator config and solver mode of one cell.
    pub fn cell_setup(&self, value: f64, mode: QosMode, seed_index: usize) -> (GenConfig, SolverOptions) {
        let mut gen = self.base.clone();
        gen.seed = self.base_seed + seed_index as u64;
        let mut mode = mode;
        match self.param {
            SweptParam::PMaxDbw => gen.p_max_dbw = value,
            SweptParam::XiRatio => gen.xi_ratio = value,
            SweptParam::RMin => gen.r_min = value,
            SweptParam::Rho => {
                if let QosMode::Barrier { rho, .. } = &mut mode {
                    *rho = value;
                }
            }
        }
        let solver = SolverOptions {
            qos: mode,
            ..self.solver.clone()
        };
        (gen, solver)
    }
}

/// Outcome of one solve.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CellResult {
    pub value: f64,
    pub mode: QosMode,
    pub seed: u64,
    pub gee: f64,
    pub sum_rate: f64,
    pub mean_user_rate: f64,
    pub satisfied_ratio: f64,
    pub dinkelbach_iterations: f64,
    pub mean_brd_rounds: f64,
    pub mean_learning_iterations: f64,
    pub converged: bool,
    /// Generalized mode: unrelaxed users missing a per-subcarrier rate
    /// target at the returned allocation.
    pub subcarrier_violations: usize,
    /// Set when the solve failed outright; the metrics are then NaN.
    pub error: Option<String>,
}

/// Unrelaxed users of a generalized-mode report that miss a per-subcarrier
/// target by more than `1e-9`.
pub fn subcarrier_violations(s: &Scenario, r: &RunReport) -> usize {
    if !matches!(r.qos, QosMode::Generalized { .. }) {
        return 0;
    }
    (0..s.user_count)
        .filter(|k| !r.relaxed_users.contains(k))
        .filter(|&k| {
            let targets = qos::split_rate_requirement(s, k);
            let plan = qos::make_floor_plan(s, k, &r.allocation, &targets);
            !qos::meets_subcarrier_targets(s, &r.allocation, k, &plan, 1e-9)
        })
        .count()
}

fn run_cell(cfg: &SweepConfig, value: f64, mode: QosMode, seed_index: usize) -> CellResult {
    let (gen, solver) = cfg.cell_setup(value, mode, seed_index);
    let seed = gen.seed;
    let solved = generate(&gen).and_then(|s| maximize_gee(&s, &solver).map(|r| (s, r)));
    match solved {
        Ok((s, r)) => CellResult {
            value,
            mode,
            seed,
            gee: r.gee,
            sum_rate: r.sum_rate,
            mean_user_rate: r.sum_rate / s.user_count as f64,
            satisfied_ratio: r.satisfied_ratio,
            dinkelbach_iterations: r.dinkelbach_iterations as f64,
            mean_brd_rounds: r.mean_brd_rounds,
            mean_learning_iterations: r.mean_learning_iterations,
            converged: r.converged(),
            subcarrier_violations: subcarrier_violations(&s, &r),
            error: None,
        },
        Err(e) => CellResult {
            value,
            mode,
            seed,
            gee: f64::NAN,
            sum_rate: f64::NAN,
            mean_user_rate: f64::NAN,
            satisfied_ratio: f64::NAN,
            dinkelbach_iterations: f64::NAN,
            mean_brd_rounds: f64::NAN,
            mean_learning_iterations: f64::NAN,
            converged: false,
            subcarrier_violations: 0,
            error: Some(e.to_string()),
        },
    }
}

/// Thread cap from [`THREADS_ENV`], if set to a positive integer.
pub fn threads_from_env() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}

/// Runs every cell, ordered by (value, mode, seed) regardless of scheduling.
pub fn run_cells(cfg: &SweepConfig, threads: Option<usize>) -> Result<Vec<CellResult>> {
    cfg.validate()?;
    let jobs: Vec<(f64, QosMode, usize)> = cfg
        .values
        .iter()
        .flat_map(|&v| cfg.modes.iter().flat_map(move |&m| (0..cfg.seeds).map(move |i| (v, m, i))))
        .collect();
    let work = || -> Vec<CellResult> {
        jobs.par_iter()
            .map(|&(v, m, i)| run_cell(cfg, v, m, i))
            .collect()
    };
    match threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
            Ok(pool.install(work))
        }
        None => Ok(work()),
    }
}

/// One CSV row: means over the successful seeds of a (value, mode) pair.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub sweep_param: &'static str,
    pub value: f64,
    pub qos_mode: &'static str,
    pub seed_count: usize,
    pub mean_gee: f64,
    pub mean_sum_rate: f64,
    pub mean_user_rate: f64,
    pub satisfied_ratio: f64,
    pub mean_i_d: f64,
    pub mean_i_b: f64,
    pub mean_i_l: f64,
    pub nonconverged_count: usize,
}

pub const CSV_HEADER: [&str; 12] = [
    "sweep_param",
    "value",
    "qos_mode",
    "seed_count",
    "mean_gee",
    "mean_sum_rate",
    "mean_user_rate",
    "satisfied_ratio",
    "mean_I_D",
    "mean_I_B",
    "mean_I_L",
    "nonconverged_count",
];

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (sum, count) = xs.fold((0.0, 0usize), |(s, c), x| (s + x, c + 1));
    if count == 0 {
        f64::NAN
    } else {
        sum / count as f64
    }
}

/// Groups ordered cells into rows.
pub fn aggregate(cfg: &SweepConfig, cells: &[CellResult]) -> Vec<SweepRow> {
    cells
        .chunks(cfg.seeds)
        .map(|group| {
            let ok: Vec<&CellResult> = group.iter().filter(|c| c.error.is_none()).collect();
            let m = |f: fn(&CellResult) -> f64| mean(ok.iter().map(|c| f(c)));
            SweepRow {
                sweep_param: cfg.param.name(),
                value: group[0].value,
                qos_mode: group[0].mode.name(),
                seed_count: group.len(),
                mean_gee: m(|c| c.gee),
                mean_sum_rate: m(|c| c.sum_rate),
                mean_user_rate: m(|c| c.mean_user_rate),
                satisfied_ratio: m(|c| c.satisfied_ratio),
                mean_i_d: m(|c| c.dinkelbach_iterations),
                mean_i_b: m(|c| c.mean_brd_rounds),
                mean_i_l: m(|c| c.mean_learning_iterations),
                nonconverged_count: group.iter().filter(|c| !c.converged).count(),
            }
        })
        .collect()
}

pub fn run_sweep(cfg: &SweepConfig, threads: Option<usize>) -> Result<Vec<SweepRow>> {
    let cells = run_cells(cfg, threads)?;
    Ok(aggregate(cfg, &cells))
}

pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.sweep_param.to_string(),
            r.value.to_string(),
            r.qos_mode.to_string(),
            r.seed_count.to_string(),
            r.mean_gee.to_string(),
            r.mean_sum_rate.to_string(),
            r.mean_user_rate.to_string(),
            r.satisfied_ratio.to_string(),
            r.mean_i_d.to_string(),
            r.mean_i_b.to_string(),
            r.mean_i_l.to_string(),
            r.nonconverged_count.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn to_csv_string(rows: &[SweepRow]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is UTF-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> SweepConfig {
        SweepConfig {
            param: SweptParam::PMaxDbw,
            values: vec![-30.0, -20.0],
            seeds: 2,
            base_seed: 5,
            base: GenConfig {
                users: 2,
                subcarriers: 2,
                ..GenConfig::default()
            },
            modes: vec![QosMode::None],
            solver: SolverOptions::default(),
        }
    }

    #[test]
    fn rows_follow_values_and_modes() {
        let cfg = tiny();
        let rows = run_sweep(&cfg, Some(1)).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].value, -30.0);
        assert_eq!(rows[1].seed_count, 2);
        let csv = to_csv_string(&rows).unwrap();
        assert!(csv.starts_with("sweep_param,value,qos_mode,seed_count,mean_gee"));
        assert_eq!(csv.lines().count(), 3);
    }

    #[test]
    fn cell_setup_applies_value_and_seed() {
        let mut cfg = tiny();
        let (g, _) = cfg.cell_setup(-25.0, QosMode::None, 3);
        assert_eq!(g.p_max_dbw, -25.0);
        assert_eq!(g.seed, 8);
        cfg.param = SweptParam::Rho;
        let (_, o) = cfg.cell_setup(10.0, QosMode::barrier(), 0);
        assert_eq!(o.qos, QosMode::Barrier { rho: 10.0, c: -1e3 });
    }

    #[test]
    fn config_validation() {
        let mut cfg = tiny();
        cfg.values.clear();
        assert!(cfg.validate().is_err());
        let mut cfg = tiny();
        cfg.param = SweptParam::Rho;
        assert!(cfg.validate().is_err());
        let err = SweepConfig::from_json(r#"{"param":"p_max_dbw","values":[1],"seeds":1,"bogus":1}"#).unwrap_err();
        assert!(err.to_string().contains("bogus"));
    }
}
