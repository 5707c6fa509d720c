//! Population handling: ramped initialization, subtree crossover,
//! single-point mutation, tournament selection and the four search modes.

use alloc::vec::Vec;
use core::fmt;

use rand::Rng;

use crate::gp::tree::{random_subtree, random_tree, GrowMethod, Node, RuleTree};
use crate::rl::Mode;

/// Evolution parameters.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GpConfig {
    pub pop_size: usize,
    /// Hard cap on tree depth; offspring over it are hoisted.
    pub max_depth: usize,
    /// Probability of crossover per reproduction event; the remainder
    /// mutates a single parent.
    pub crossover_rate: f64,
    pub tournament: usize,
    /// Ramped initial depths, inclusive.
    pub init_depths: (usize, usize),
    /// Depth bound of subtrees planted by mutation.
    pub mutation_depth: usize,
}

impl Default for GpConfig {
    fn default() -> Self {
        Self {
            pop_size: 100,
            max_depth: 8,
            crossover_rate: 0.9,
            tournament: 3,
            init_depths: (2, 6),
            mutation_depth: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GpError {
    PopulationTooSmall(usize),
}

impl fmt::Display for GpError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GpError::PopulationTooSmall(n) => {
                write!(f, "population size {n} too small; need at least 2")
            }
        }
    }
}

impl core::error::Error for GpError {}

/// A rule with its cached fitness.
#[derive(Debug, Clone, PartialEq)]
pub struct Scored {
    pub tree: RuleTree,
    pub fitness: f64,
}

/// One generation's parent pool and the search mode that built it.
#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    pub mode: Mode,
    pub individuals: Vec<Scored>,
}

/// Ramped half-and-half initialization: target depths cycle over the
/// configured range, alternating full and grow construction.
pub fn init_population<R: Rng>(
    n: usize,
    cfg: &GpConfig,
    rng: &mut R,
) -> Result<Vec<RuleTree>, GpError> {
    if n < 2 {
        return Err(GpError::PopulationTooSmall(n));
    }
    let (lo, hi) = cfg.init_depths;
    let span = hi - lo + 1;
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let depth = lo + (i / 2) % span;
        let method = if i % 2 == 0 { GrowMethod::Full } else { GrowMethod::Grow };
        out.push(RuleTree::new(random_tree(rng, method, depth, lo)));
    }
    Ok(out)
}

/// Replaces the subtree at `at` with `sub`; if the result breaks the depth
/// cap the planted subtree is hoisted to its first leaf, which always fits
/// because the host tree was within the cap.
fn splice(base: &RuleTree, at: usize, sub: &Node, max_depth: usize) -> RuleTree {
    let mut out = base.clone();
    out.root.replace(at, sub.clone());
    if out.depth() > max_depth {
        out.root.replace(at, sub.first_leaf());
    }
    out
}

/// Subtree crossover: one cut point per parent, subtrees swapped.
pub fn crossover<R: Rng>(
    a: &RuleTree,
    b: &RuleTree,
    cfg: &GpConfig,
    rng: &mut R,
) -> (RuleTree, RuleTree) {
    let i = rng.gen_range(0..a.size());
    let j = rng.gen_range(0..b.size());
    let child_a = splice(a, i, b.root.get(j), cfg.max_depth);
    let child_b = splice(b, j, a.root.get(i), cfg.max_depth);
    (child_a, child_b)
}

/// Single-point mutation: one node's subtree replaced by a fresh grown one.
pub fn mutate<R: Rng>(a: &RuleTree, cfg: &GpConfig, rng: &mut R) -> RuleTree {
    let i = rng.gen_range(0..a.size());
    let sub = random_subtree(rng, cfg.mutation_depth);
    splice(a, i, &sub, cfg.max_depth)
}

/// Tournament selection index: the fittest of `tournament` uniform draws
/// with replacement; the earliest drawn wins ties.
pub fn select_index<R: Rng>(pop: &[Scored], tournament: usize, rng: &mut R) -> usize {
    debug_assert!(!pop.is_empty());
    let mut best = rng.gen_range(0..pop.len());
    for _ in 1..tournament {
        let k = rng.gen_range(0..pop.len());
        if pop[k].fitness > pop[best].fitness {
            best = k;
        }
    }
    best
}

pub fn select<'p, R: Rng>(pop: &'p [Scored], tournament: usize, rng: &mut R) -> &'p Scored {
    &pop[select_index(pop, tournament, rng)]
}

/// Builds the parent pool for one generation from the standing population
/// and the two elites.
///
/// - `P1`: the standing population as is.
/// - `P2`: the standing population with one uniformly chosen slot replaced
///   by the global elite.
/// - `P3`: just the global elite and the previous generation's best.
/// - `P4`: the standing population plus both elites.
///
/// Before the first generation completes there are no elites yet; `P3` and
/// `P4` fall back to `P1` then (the caller remaps the mode).
pub fn compose_population<R: Rng>(
    mode: Mode,
    base: &[Scored],
    global_best: &Scored,
    prev_gen_best: &Scored,
    rng: &mut R,
) -> Population {
    let individuals = match mode {
        Mode::P1 => base.to_vec(),
        Mode::P2 => {
            let mut v = base.to_vec();
            let slot = rng.gen_range(0..v.len());
            v[slot] = global_best.clone();
            v
        }
        Mode::P3 => alloc::vec![global_best.clone(), prev_gen_best.clone()],
        Mode::P4 => {
            let mut v = base.to_vec();
            v.push(global_best.clone());
            v.push(prev_gen_best.clone());
            v
        }
    };
    Population { mode, individuals }
}

/// Counters for one generation's reproduction events.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EvolveStats {
    pub crossovers: usize,
    pub mutations: usize,
}

/// Produces as many offspring as there are parents: crossover with the
/// configured probability (keeping both children while room remains),
/// otherwise mutation of one selected parent.
pub fn evolve_generation<R: Rng>(
    parents: &Population,
    cfg: &GpConfig,
    rng: &mut R,
) -> (Vec<RuleTree>, EvolveStats) {
    let target = parents.individuals.len();
    let pool = &parents.individuals;
    let mut out = Vec::with_capacity(target);
    let mut stats = EvolveStats::default();
    while out.len() < target {
        if rng.gen::<f64>() < cfg.crossover_rate {
            let a = select(pool, cfg.tournament, rng);
            let b = select(pool, cfg.tournament, rng);
            let (c1, c2) = crossover(&a.tree, &b.tree, cfg, rng);
            stats.crossovers += 1;
            out.push(c1);
            if out.len() < target {
                out.push(c2);
            }
        } else {
            let p = select(pool, cfg.tournament, rng);
            stats.mutations += 1;
            out.push(mutate(&p.tree, cfg, rng));
        }
    }
    (out, stats)
}
