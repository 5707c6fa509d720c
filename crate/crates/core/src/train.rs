//! The full learning loop: evolve candidate-ranking rules, let the
//! Q-learning agent pick the population mode each generation, estimate
//! offspring fitness with the KNN surrogate, and periodically ground the
//! estimates with real evaluations.
//!
//! Per run: the initial population is fully evaluated with the real model
//! (seeding the surrogate), then each generation picks a mode, composes
//! the parent pool, breeds offspring, scores them (surrogate or real),
//! rewards the agent with the change in best fitness, and tracks the
//! incumbent. Every `refresh_interval` generations the recorded
//! generation bests are re-scored for real, the model is extended, and
//! the incumbent is re-anchored to the best real score seen, so a
//! surrogate overestimate can never survive to the final output. The
//! reported best is always a real evaluation.

use alloc::vec::Vec;
use core::fmt;

use crate::evaluator::total_efficiency;
use crate::gp::{
    compose_population, evolve_generation, init_population, Decoder, GpConfig, GpError,
    Population, RuleTree, Scored,
};
use crate::problem::Instance;
use crate::rl::{epsilon_greedy, observe_state, q_update, reward, Mode, QTable, RlConfig, State};
use crate::rng::{stream, StreamId};
use crate::surrogate::{decision_vector, DecisionVector, PendingBest, SurrogateModel};

/// Mode selection policy: learned, or locked to one mode (the plain-GP
/// baseline locks P1 and disables the surrogate).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ModePolicy {
    Auto,
    Locked(Mode),
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrainConfig {
    pub gp: GpConfig,
    pub generations: usize,
    pub rl: RlConfig,
    pub mode_policy: ModePolicy,
    pub surrogate: bool,
    /// Neighbour count of the surrogate.
    pub k: usize,
    /// Generations between real-evaluation refreshes.
    pub refresh_interval: usize,
    /// Optional bound on the surrogate training set.
    pub training_cap: Option<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            gp: GpConfig::default(),
            generations: 100,
            rl: RlConfig::default(),
            mode_policy: ModePolicy::Auto,
            surrogate: true,
            k: 5,
            refresh_interval: 5,
            training_cap: None,
        }
    }
}

impl TrainConfig {
    /// The plain-GP baseline: mode locked to P1, surrogate off.
    pub fn plain_gp() -> Self {
        Self {
            mode_policy: ModePolicy::Locked(Mode::P1),
            surrogate: false,
            ..Self::default()
        }
    }
}

/// One generation of the training trace.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GenRecord {
    pub gen: usize,
    /// State the agent saw when choosing.
    pub state: State,
    /// Mode the agent asked for.
    pub requested: Mode,
    /// Mode actually run (elite modes fall back to P1 until elites exist).
    pub mode: Mode,
    pub reward: f64,
    /// Best offspring fitness this generation (a surrogate estimate when
    /// the surrogate is on).
    pub best_fitness: f64,
    /// Real incumbent fitness, present on refresh generations.
    pub real_best: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrainResult {
    /// Best rule found, judged by real evaluations only.
    pub best_rule: RuleTree,
    /// Real total efficiency of `best_rule`'s plan.
    pub best_te: f64,
    pub trace: Vec<GenRecord>,
    pub q_table: QTable,
    /// How many real evaluations the run spent.
    pub real_evals: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrainError {
    Gp(GpError),
    Fuzzy(crate::fuzzy::FuzzyError),
    BadConfig(&'static str),
}

impl fmt::Display for TrainError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TrainError::Gp(e) => write!(f, "{e}"),
            TrainError::Fuzzy(e) => write!(f, "{e}"),
            TrainError::BadConfig(msg) => write!(f, "invalid training configuration: {msg}"),
        }
    }
}

impl core::error::Error for TrainError {}

impl From<GpError> for TrainError {
    fn from(e: GpError) -> Self {
        TrainError::Gp(e)
    }
}

impl From<crate::fuzzy::FuzzyError> for TrainError {
    fn from(e: crate::fuzzy::FuzzyError) -> Self {
        TrainError::Fuzzy(e)
    }
}

struct RealEvaluator<'d, 'i> {
    decoder: &'d Decoder<'i>,
    count: usize,
}

impl<'d, 'i> RealEvaluator<'d, 'i> {
    /// Full evaluation: decode, constraint check, efficiency.
    fn fitness(&mut self, tree: &RuleTree) -> f64 {
        self.count += 1;
        let outcome = self.decoder.decode(tree);
        total_efficiency(
            self.decoder.instance(),
            self.decoder.match_matrix(),
            &outcome.assignment,
        )
        .expect("decoded plans are in range")
        .total_efficiency
    }

    /// Full evaluation plus the phenotype vector for the surrogate.
    fn fitness_and_vector(&mut self, tree: &RuleTree) -> (f64, DecisionVector) {
        self.count += 1;
        let (outcome, mut ranks) = self.decoder.decode_traced(tree);
        let np = self.decoder.instance().num_positions();
        let worst = self.decoder.instance().num_candidates();
        while ranks.len() < np {
            ranks.push(worst);
        }
        let te = total_efficiency(
            self.decoder.instance(),
            self.decoder.match_matrix(),
            &outcome.assignment,
        )
        .expect("decoded plans are in range")
        .total_efficiency;
        (te, DecisionVector { ranks })
    }
}

/// Runs the full learning loop on one instance. Deterministic in
/// `(instance, config, seed)`.
pub fn run_training(
    inst: &Instance,
    cfg: &TrainConfig,
    seed: u64,
) -> Result<TrainResult, TrainError> {
    if cfg.k == 0 {
        return Err(TrainError::BadConfig("k must be at least 1"));
    }
    if cfg.refresh_interval == 0 {
        return Err(TrainError::BadConfig("refresh_interval must be at least 1"));
    }
    let decoder = Decoder::new(inst)?;
    let mut real = RealEvaluator { decoder: &decoder, count: 0 };

    let mut rng_init = stream(seed, StreamId::InitPop);
    let mut rng_ctl = stream(seed, StreamId::Controller);
    let mut rng_evo = stream(seed, StreamId::Evolution);

    // Initial population: real-evaluated, and memorized by the surrogate.
    let trees = init_population(cfg.gp.pop_size, &cfg.gp, &mut rng_init)?;
    let mut model = match cfg.training_cap {
        Some(cap) => SurrogateModel::with_cap(cfg.k, cap),
        None => SurrogateModel::new(cfg.k),
    };
    let mut base: Vec<Scored> = Vec::with_capacity(trees.len());
    for tree in trees {
        let fitness = if cfg.surrogate {
            let (te, vector) = real.fitness_and_vector(&tree);
            model.extend([(vector, te)]);
            te
        } else {
            real.fitness(&tree)
        };
        base.push(Scored { tree, fitness });
    }

    let argbest = |pop: &[Scored]| {
        pop.iter()
            .enumerate()
            .max_by(|(ia, a), (ib, b)| {
                a.fitness
                    .partial_cmp(&b.fitness)
                    .expect("fitness is finite")
                    .then(ib.cmp(ia))
            })
            .map(|(_, s)| s.clone())
            .expect("population non-empty")
    };

    // Incumbents: `global_best` may carry a surrogate estimate between
    // refreshes; `best_real` only ever holds real scores.
    let mut global_best = argbest(&base);
    let mut best_real = global_best.clone();
    let mut prev_gen_best: Option<Scored> = None;

    let mut qt = QTable::new();
    let mut state = State::NotImproved;
    let mut f_prev = global_best.fitness;
    let mut trace = Vec::with_capacity(cfg.generations);

    for t in 1..=cfg.generations {
        let requested = match cfg.mode_policy {
            ModePolicy::Auto => epsilon_greedy(state, &qt, &cfg.rl, &mut rng_ctl),
            ModePolicy::Locked(m) => m,
        };
        // Elite modes need a previous generation.
        let mode = match (requested, prev_gen_best.is_some()) {
            (Mode::P3 | Mode::P4, false) => Mode::P1,
            (m, _) => m,
        };

        let prev_ref = prev_gen_best.as_ref().unwrap_or(&global_best);
        let parents: Population =
            compose_population(mode, &base, &global_best, prev_ref, &mut rng_evo);
        let (offspring, _stats) = evolve_generation(&parents, &cfg.gp, &mut rng_evo);

        let mut scored: Vec<Scored> = Vec::with_capacity(offspring.len());
        let mut vectors: Vec<Option<DecisionVector>> = Vec::with_capacity(offspring.len());
        for tree in offspring {
            if cfg.surrogate {
                let vector = decision_vector(&tree, &decoder);
                let fitness = match model.predict(&vector) {
                    Ok(f) => f,
                    // Not enough training data yet: ground truth instead.
                    Err(_) => {
                        real.count += 1;
                        let te = total_efficiency(
                            decoder.instance(),
                            decoder.match_matrix(),
                            &decoder.decode(&tree).assignment,
                        )
                        .expect("in range")
                        .total_efficiency;
                        te
                    }
                };
                vectors.push(Some(vector));
                scored.push(Scored { tree, fitness });
            } else {
                let fitness = real.fitness(&tree);
                vectors.push(None);
                scored.push(Scored { tree, fitness });
            }
        }

        let (best_idx, _) = scored
            .iter()
            .enumerate()
            .max_by(|(ia, a), (ib, b)| {
                a.fitness
                    .partial_cmp(&b.fitness)
                    .expect("fitness is finite")
                    .then(ib.cmp(ia))
            })
            .map(|(i, s)| (i, s.fitness))
            .expect("offspring non-empty");
        let gen_best = scored[best_idx].clone();

        if cfg.surrogate {
            model.record_pending(PendingBest {
                tree: gen_best.tree.clone(),
                vector: vectors[best_idx].clone().expect("surrogate path keeps vectors"),
            });
        } else if gen_best.fitness > best_real.fitness {
            best_real = gen_best.clone();
        }

        let f_t = gen_best.fitness;
        let r = reward(f_t, f_prev);
        let s_next = observe_state(f_prev, f_t);
        if matches!(cfg.mode_policy, ModePolicy::Auto) {
            // The update credits the agent's own choice, even when the
            // elite fallback remapped it.
            q_update(&mut qt, state, requested, r, s_next, &cfg.rl);
        }

        if f_t >= global_best.fitness {
            global_best = gen_best.clone();
        }

        // The standing population follows full-size offspring; the elite
        // pair of P3 refines the incumbents only. P4's surplus is cut back
        // to the fittest N.
        let n = cfg.gp.pop_size;
        match mode {
            Mode::P3 => {}
            _ => {
                if scored.len() > n {
                    let mut order: Vec<usize> = (0..scored.len()).collect();
                    order.sort_by(|&a, &b| {
                        scored[b]
                            .fitness
                            .partial_cmp(&scored[a].fitness)
                            .expect("fitness is finite")
                            .then(a.cmp(&b))
                    });
                    order.truncate(n);
                    order.sort_unstable();
                    base = order.into_iter().map(|i| scored[i].clone()).collect();
                } else {
                    base = scored;
                }
            }
        }

        prev_gen_best = Some(gen_best);
        state = s_next;
        f_prev = f_t;

        let mut real_best_entry = None;
        if cfg.surrogate && t % cfg.refresh_interval == 0 {
            refresh(&mut model, &mut real, &mut best_real);
            // Surrogate-inflated incumbents are demoted here.
            global_best = best_real.clone();
            real_best_entry = Some(best_real.fitness);
        }

        trace.push(GenRecord {
            gen: t,
            state,
            requested,
            mode,
            reward: r,
            best_fitness: f_t,
            real_best: real_best_entry,
        });
    }

    if cfg.surrogate {
        refresh(&mut model, &mut real, &mut best_real);
    }

    Ok(TrainResult {
        best_rule: best_real.tree,
        best_te: best_real.fitness,
        trace,
        q_table: qt,
        real_evals: real.count,
        seed,
    })
}

/// Re-scores the queued generation bests with the real model, feeds them
/// to the surrogate, and advances the real incumbent.
fn refresh(model: &mut SurrogateModel, real: &mut RealEvaluator<'_, '_>, best_real: &mut Scored) {
    for pending in model.take_pending() {
        let te = real.fitness(&pending.tree);
        model.extend([(pending.vector, te)]);
        if te > best_real.fitness {
            *best_real = Scored { tree: pending.tree, fitness: te };
        }
    }
}
