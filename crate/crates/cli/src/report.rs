//! Result documents and the comparison metrics.
//!
//! Every exported efficiency value is recomputable from the exported plan
//! or rule with the evaluator; rounding happens only at the CSV boundary.
//! Wall-clock times never enter result JSON so repeated runs with one
//! seed stay byte-identical; timing lives in the separate timing CSV.

use std::fmt;
use std::str::FromStr;

use anyhow::{anyhow, Result};
use serde::{Deserialize, Serialize};

use teamform_core::baselines::{self, BaselineConfig, BaselineOutcome};
use teamform_core::evaluator::{total_efficiency, Assignment, ConstraintViolation, EvalResult};
use teamform_core::gp::{Decoder, RuleTree};
use teamform_core::problem::Instance;
use teamform_core::rl::Mode;
use teamform_core::train::{run_training, ModePolicy, TrainConfig, TrainResult};

use crate::formats::SCHEMA_VERSION;

/// Every solver the harness can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "RL-GP")]
    RlGp,
    #[serde(rename = "BGP")]
    Bgp,
    #[serde(rename = "CH1")]
    Ch1,
    #[serde(rename = "CH2")]
    Ch2,
    #[serde(rename = "GA-baseline")]
    Ga,
    #[serde(rename = "VNS-baseline")]
    Vns,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::RlGp => "RL-GP",
            Algorithm::Bgp => "BGP",
            Algorithm::Ch1 => "CH1",
            Algorithm::Ch2 => "CH2",
            Algorithm::Ga => "GA-baseline",
            Algorithm::Vns => "VNS-baseline",
        }
    }

    /// Deterministic one-shot solvers need no repetitions.
    pub fn is_deterministic(self) -> bool {
        matches!(self, Algorithm::Ch1 | Algorithm::Ch2)
    }
}

impl FromStr for Algorithm {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rlgp" | "rl-gp" => Ok(Algorithm::RlGp),
            "bgp" => Ok(Algorithm::Bgp),
            "ch1" => Ok(Algorithm::Ch1),
            "ch2" => Ok(Algorithm::Ch2),
            "ga" | "ga-baseline" => Ok(Algorithm::Ga),
            "vns" | "vns-baseline" => Ok(Algorithm::Vns),
            other => Err(anyhow!(
                "unknown algorithm `{other}` (expected rlgp, bgp, ch1, ch2, ga or vns)"
            )),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Exported plan evaluation.
#[derive(Debug, Serialize)]
pub struct SolveReport {
    pub schema_version: u32,
    pub instance: String,
    pub algorithm: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rule: Option<String>,
    /// Sorted (candidate, position) pairs.
    pub assignment: Vec<(usize, usize)>,
    pub feasible: bool,
    pub gamma: Option<f64>,
    pub match_sum: f64,
    pub total_efficiency: f64,
    pub violations: Vec<ConstraintViolation>,
}

impl SolveReport {
    pub fn new(
        inst: &Instance,
        algorithm: &str,
        seed: Option<u64>,
        rule: Option<&RuleTree>,
        assignment: &Assignment,
        eval: &EvalResult,
    ) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            instance: inst.name.clone(),
            algorithm: algorithm.to_string(),
            seed,
            rule: rule.map(|r| r.to_string()),
            assignment: assignment.pairs().to_vec(),
            feasible: eval.feasible,
            gamma: eval.gamma,
            match_sum: eval.match_sum,
            total_efficiency: eval.total_efficiency,
            violations: eval.violations.clone(),
        }
    }
}

/// Exported training run: config echo, learned rule, trace and the agent
/// table. Deterministic for a fixed (instance, config, seed).
#[derive(Debug, Serialize)]
pub struct TrainReport {
    pub schema_version: u32,
    pub instance: String,
    pub algorithm: String,
    pub seed: u64,
    pub config: TrainConfig,
    pub best_rule: String,
    pub best_te: f64,
    pub real_evaluations: usize,
    pub q_table: [[f64; 4]; 2],
    pub trace: Vec<teamform_core::train::GenRecord>,
}

impl TrainReport {
    pub fn new(inst: &Instance, algorithm: &str, cfg: &TrainConfig, result: &TrainResult) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            instance: inst.name.clone(),
            algorithm: algorithm.to_string(),
            seed: result.seed,
            config: cfg.clone(),
            best_rule: result.best_rule.to_string(),
            best_te: result.best_te,
            real_evaluations: result.real_evals,
            q_table: *result.q_table.rows(),
            trace: result.trace.clone(),
        }
    }
}

/// The per-generation trace as CSV (state, action, reward plus the
/// fitness columns).
pub fn trace_csv(result: &TrainResult) -> String {
    let mut out = String::from("gen,state,action,requested,reward,best_fitness,real_best\n");
    for rec in &result.trace {
        let real = rec
            .real_best
            .map_or(String::new(), |v| format!("{v}"));
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            rec.gen, rec.state, rec.mode, rec.requested, rec.reward, rec.best_fitness, real
        ));
    }
    out
}

/// Percentage gap of a comparison value against the reference; negative
/// means the reference wins. Undefined for a non-positive reference.
pub fn gap(te_other: f64, te_reference: f64) -> Option<f64> {
    (te_reference > 0.0).then(|| (te_other - te_reference) / te_reference * 100.0)
}

/// Gap formatted for reports: two decimals, `NA` when undefined.
pub fn gap_cell(te_other: f64, te_reference: f64) -> String {
    match gap(te_other, te_reference) {
        Some(g) => format!("{g:.2}"),
        None => "NA".into(),
    }
}

/// Training configuration for an algorithm choice.
pub fn train_config_for(algorithm: Algorithm, base: &TrainConfig) -> Option<TrainConfig> {
    match algorithm {
        Algorithm::RlGp => Some(base.clone()),
        Algorithm::Bgp => Some(TrainConfig {
            mode_policy: ModePolicy::Locked(Mode::P1),
            surrogate: false,
            ..base.clone()
        }),
        _ => None,
    }
}

/// Runs one algorithm on one instance and reports the plan-level outcome.
/// Training algorithms also return their full result.
pub fn run_algorithm(
    inst: &Instance,
    algorithm: Algorithm,
    train_cfg: &TrainConfig,
    baseline_cfg: &BaselineConfig,
    seed: u64,
) -> Result<(SolveReport, Option<TrainResult>)> {
    let decoder = Decoder::new(inst).map_err(|e| anyhow!("{e}"))?;
    match algorithm {
        Algorithm::RlGp | Algorithm::Bgp => {
            let cfg = train_config_for(algorithm, train_cfg).expect("training algorithm");
            let result = run_training(inst, &cfg, seed).map_err(|e| anyhow!("{e}"))?;
            let outcome = decoder.decode(&result.best_rule);
            let eval = total_efficiency(inst, decoder.match_matrix(), &outcome.assignment)
                .map_err(|e| anyhow!("{e}"))?;
            let report = SolveReport::new(
                inst,
                algorithm.name(),
                Some(seed),
                Some(&result.best_rule),
                &outcome.assignment,
                &eval,
            );
            Ok((report, Some(result)))
        }
        Algorithm::Ch1 | Algorithm::Ch2 | Algorithm::Ga | Algorithm::Vns => {
            let BaselineOutcome { assignment, eval } = match algorithm {
                Algorithm::Ch1 => baselines::ch1_solve(&decoder),
                Algorithm::Ch2 => baselines::ch2_solve(&decoder),
                Algorithm::Ga => baselines::ga_solve(&decoder, &baseline_cfg.ga, seed),
                Algorithm::Vns => baselines::vns_solve(&decoder, &baseline_cfg.vns, seed),
                _ => unreachable!(),
            };
            let seed = (!algorithm.is_deterministic()).then_some(seed);
            let report =
                SolveReport::new(inst, algorithm.name(), seed, None, &assignment, &eval);
            Ok((report, None))
        }
    }
}
