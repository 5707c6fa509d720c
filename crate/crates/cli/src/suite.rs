//! The benchmark harness: a suite file names instances, algorithms and a
//! repetition count; the harness runs every combination on a bounded
//! worker pool and assembles CSV reports.
//!
//! Reports:
//! - `results.csv`: per (instance, algorithm) the max and mean efficiency
//!   over the repetitions plus the percentage gap against the learned
//!   rule's max (negative favours the learned rule).
//! - `timing.csv`: five-number summary of per-run wall time. Wall times
//!   are the only non-deterministic output of the harness.
//! - `sp_sweep.csv`: efficiency across team-skill-to-position ratios.
//!
//! Runs are isolated and seeded `seed_base..seed_base+repetitions`, so
//! every CSV cell except timing is reproducible byte for byte regardless
//! of the worker count.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Deserialize;

use teamform_core::baselines::BaselineConfig;
use teamform_core::problem::{generate_instance, GeneratorParams, Instance};
use teamform_core::train::TrainConfig;

use crate::formats::load_instance;
use crate::report::{gap_cell, run_algorithm, Algorithm};

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum InstanceSpec {
    /// A pre-generated instance document.
    File { path: PathBuf },
    /// Generated on the fly.
    Generate {
        positions: usize,
        seed: u64,
        #[serde(default)]
        sp_ratio: Option<f64>,
        #[serde(default)]
        candidate_ratio: Option<f64>,
    },
}

impl InstanceSpec {
    fn realize(&self) -> Result<Instance> {
        match self {
            InstanceSpec::File { path } => load_instance(path),
            InstanceSpec::Generate { positions, seed, sp_ratio, candidate_ratio } => {
                let mut params = GeneratorParams::with_positions(*positions);
                if let Some(r) = sp_ratio {
                    params.sp_ratio = *r;
                }
                if let Some(r) = candidate_ratio {
                    params.candidate_ratio = *r;
                }
                generate_instance(&params, *seed).context("generating suite instance")
            }
        }
    }
}

/// Optional training overrides for the whole suite.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainOverrides {
    pub generations: Option<usize>,
    pub pop_size: Option<usize>,
    pub epsilon: Option<f64>,
    pub alpha: Option<f64>,
    pub discount: Option<f64>,
    pub k: Option<usize>,
    pub refresh: Option<usize>,
    pub surrogate: Option<bool>,
}

impl TrainOverrides {
    pub fn apply(&self, mut cfg: TrainConfig) -> TrainConfig {
        if let Some(v) = self.generations {
            cfg.generations = v;
        }
        if let Some(v) = self.pop_size {
            cfg.gp.pop_size = v;
        }
        if let Some(v) = self.epsilon {
            cfg.rl.epsilon = v;
        }
        if let Some(v) = self.alpha {
            cfg.rl.alpha = v;
        }
        if let Some(v) = self.discount {
            cfg.rl.gamma_discount = v;
        }
        if let Some(v) = self.k {
            cfg.k = v;
        }
        if let Some(v) = self.refresh {
            cfg.refresh_interval = v;
        }
        if let Some(v) = self.surrogate {
            cfg.surrogate = v;
        }
        cfg
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpSweep {
    pub positions: Vec<usize>,
    pub sp_ratios: Vec<f64>,
    pub algorithms: Vec<Algorithm>,
    #[serde(default = "default_reps")]
    pub repetitions: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    #[serde(default)]
    pub seed_base: u64,
    #[serde(default = "default_reps")]
    pub repetitions: usize,
    pub instances: Vec<InstanceSpec>,
    pub algorithms: Vec<Algorithm>,
    #[serde(default)]
    pub train: TrainOverrides,
    #[serde(default)]
    pub sp_sweep: Option<SpSweep>,
}

fn default_reps() -> usize {
    10
}

pub fn load_suite(path: &Path) -> Result<SuiteConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading suite config {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing suite config {}", path.display()))
}

/// One run's outcome.
#[derive(Debug, Clone)]
struct RunOutcome {
    te: f64,
    millis: f64,
}

/// Aggregated row per (instance, algorithm).
#[derive(Debug)]
pub struct SuiteRow {
    pub instance: String,
    pub algorithm: Algorithm,
    pub tes: Vec<f64>,
    pub millis: Vec<f64>,
}

impl SuiteRow {
    pub fn max_te(&self) -> f64 {
        self.tes.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn ave_te(&self) -> f64 {
        self.tes.iter().sum::<f64>() / self.tes.len() as f64
    }
}

/// Five-number summary with linear interpolation between order statistics.
pub fn five_number_summary(samples: &[f64]) -> [f64; 5] {
    assert!(!samples.is_empty());
    let mut xs = samples.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
    let q = |p: f64| {
        let h = (xs.len() - 1) as f64 * p;
        let lo = h.floor() as usize;
        let hi = h.ceil() as usize;
        xs[lo] + (h - lo as f64) * (xs[hi] - xs[lo])
    };
    [xs[0], q(0.25), q(0.5), q(0.75), xs[xs.len() - 1]]
}

/// Runs `tasks_total` closures over `jobs` workers, preserving slot order.
fn run_pool<T: Send>(
    jobs: usize,
    tasks_total: usize,
    task: impl Fn(usize) -> T + Sync,
) -> Vec<T> {
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<T>>> = Mutex::new((0..tasks_total).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..jobs.max(1).min(tasks_total.max(1)) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= tasks_total {
                    break;
                }
                let out = task(i);
                slots.lock().expect("pool lock")[i] = Some(out);
            });
        }
    });
    slots
        .into_inner()
        .expect("pool lock")
        .into_iter()
        .map(|s| s.expect("all tasks ran"))
        .collect()
}

/// Executes the grid part of a suite; rows follow the config order.
pub fn run_grid(cfg: &SuiteConfig, jobs: usize) -> Result<Vec<SuiteRow>> {
    let instances: Vec<Instance> = cfg
        .instances
        .iter()
        .map(|spec| spec.realize())
        .collect::<Result<_>>()?;
    let train_cfg = cfg.train.apply(TrainConfig::default());
    let baseline_cfg = BaselineConfig::default();
    let reps = cfg.repetitions.max(1);

    struct Task {
        inst: usize,
        algorithm: Algorithm,
        seed: u64,
    }
    let mut tasks = Vec::new();
    for (i, _) in instances.iter().enumerate() {
        for &algorithm in &cfg.algorithms {
            let runs = if algorithm.is_deterministic() { 1 } else { reps };
            for rep in 0..runs {
                tasks.push(Task { inst: i, algorithm, seed: cfg.seed_base + rep as u64 });
            }
        }
    }

    let outcomes = run_pool(jobs, tasks.len(), |i| {
        let t = &tasks[i];
        let started = Instant::now();
        let res = run_algorithm(&instances[t.inst], t.algorithm, &train_cfg, &baseline_cfg, t.seed)
            .map(|(report, _)| report.total_efficiency);
        let millis = started.elapsed().as_secs_f64() * 1000.0;
        res.map(|te| RunOutcome { te, millis })
    });

    let mut rows: Vec<SuiteRow> = Vec::new();
    for inst in &instances {
        for &algorithm in &cfg.algorithms {
            rows.push(SuiteRow {
                instance: inst.name.clone(),
                algorithm,
                tes: Vec::new(),
                millis: Vec::new(),
            });
        }
    }
    for (task, outcome) in tasks.iter().zip(outcomes.into_iter()) {
        let outcome = outcome?;
        let row = &mut rows[task.inst * cfg.algorithms.len()
            + cfg.algorithms.iter().position(|&a| a == task.algorithm).expect("known")];
        row.tes.push(outcome.te);
        row.millis.push(outcome.millis);
    }
    Ok(rows)
}

/// `results.csv`: max/mean efficiency and the gap against the learned rule.
pub fn results_csv(rows: &[SuiteRow], algorithms: &[Algorithm]) -> String {
    let mut out = String::from("instance,algorithm,runs,max_te,ave_te,gap_pct\n");
    let has_reference = algorithms.contains(&Algorithm::RlGp);
    let mut by_instance: Vec<(&str, &[SuiteRow])> = Vec::new();
    let chunk = algorithms.len();
    for group in rows.chunks(chunk) {
        by_instance.push((group[0].instance.as_str(), group));
    }
    for (instance, group) in by_instance {
        let reference = group
            .iter()
            .find(|r| r.algorithm == Algorithm::RlGp)
            .map(|r| r.max_te());
        for row in group {
            let gap = match (has_reference, reference) {
                (true, Some(reference)) => gap_cell(row.max_te(), reference),
                _ => "NA".into(),
            };
            out.push_str(&format!(
                "{},{},{},{:.2},{:.2},{}\n",
                instance,
                row.algorithm,
                row.tes.len(),
                row.max_te(),
                row.ave_te(),
                gap
            ));
        }
    }
    out
}

/// `timing.csv`: five-number summary of per-run wall time.
pub fn timing_csv(rows: &[SuiteRow]) -> String {
    let mut out = String::from("instance,algorithm,runs,min_ms,q1_ms,median_ms,q3_ms,max_ms\n");
    for row in rows {
        let [min, q1, med, q3, max] = five_number_summary(&row.millis);
        out.push_str(&format!(
            "{},{},{},{min:.1},{q1:.1},{med:.1},{q3:.1},{max:.1}\n",
            row.instance,
            row.algorithm,
            row.millis.len(),
        ));
    }
    out
}

/// Executes the ratio sweep; one generated instance per (positions, ratio).
pub fn run_sweep(cfg: &SuiteConfig, sweep: &SpSweep, jobs: usize) -> Result<String> {
    let train_cfg = cfg.train.apply(TrainConfig::default());
    let baseline_cfg = BaselineConfig::default();

    struct Cell {
        positions: usize,
        ratio: f64,
        algorithm: Algorithm,
        seed: u64,
    }
    let mut cells = Vec::new();
    for &positions in &sweep.positions {
        for &ratio in &sweep.sp_ratios {
            for &algorithm in &sweep.algorithms {
                let runs = if algorithm.is_deterministic() { 1 } else { sweep.repetitions.max(1) };
                for rep in 0..runs {
                    cells.push(Cell {
                        positions,
                        ratio,
                        algorithm,
                        seed: cfg.seed_base + rep as u64,
                    });
                }
            }
        }
    }

    let tes = run_pool(jobs, cells.len(), |i| {
        let c = &cells[i];
        let mut params = GeneratorParams::with_positions(c.positions);
        params.sp_ratio = c.ratio;
        let inst = generate_instance(&params, cfg.seed_base)?;
        run_algorithm(&inst, c.algorithm, &train_cfg, &baseline_cfg, c.seed)
            .map(|(report, _)| report.total_efficiency)
    });

    let mut out = String::from("positions,sp_ratio,algorithm,runs,max_te,ave_te\n");
    let mut i = 0;
    for &positions in &sweep.positions {
        for &ratio in &sweep.sp_ratios {
            for &algorithm in &sweep.algorithms {
                let runs = if algorithm.is_deterministic() { 1 } else { sweep.repetitions.max(1) };
                let mut values: Vec<f64> = Vec::with_capacity(runs);
                for _ in 0..runs {
                    values.push(*tes[i].as_ref().map_err(|e| anyhow::anyhow!("{e}"))?);
                    i += 1;
                }
                let max = values.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
                let ave: f64 = values.iter().sum::<f64>() / values.len() as f64;
                out.push_str(&format!(
                    "{positions},{ratio},{algorithm},{runs},{max:.2},{ave:.2}\n"
                ));
            }
        }
    }
    Ok(out)
}
