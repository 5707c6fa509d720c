//! Comparison solvers: the two construction heuristics, a direct-encoding
//! genetic algorithm and a variable neighbourhood search.
//!
//! The heuristics order candidates once (by team-skill count, or by best
//! match score) and seat them with the same position-choice rule the rule
//! decoder uses, so comparisons against learned rules isolate the ranking
//! policy. The GA and VNS are deliberately plain searchers over direct
//! position-to-candidate encodings, named `GA-baseline` and `VNS-baseline`
//! in reports.

use alloc::vec::Vec;

use rand::Rng;

use crate::evaluator::{total_efficiency, Assignment, EvalResult};
use crate::gp::{DecodeContext, Decoder};
use crate::rng::{stream, StreamId};

/// Parameters for the GA baseline.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GaConfig {
    pub pop_size: usize,
    pub generations: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    pub tournament: usize,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            pop_size: 100,
            generations: 100,
            crossover_rate: 0.9,
            mutation_rate: 0.2,
            tournament: 3,
        }
    }
}

/// Parameters for the VNS baseline.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VnsConfig {
    /// Evaluation budget; comparable to the GA's pop x generations.
    pub max_evals: usize,
    /// Neighbourhood orders cycled on stagnation (shake strength).
    pub max_shake: usize,
}

impl Default for VnsConfig {
    fn default() -> Self {
        Self {
            max_evals: 10_000,
            max_shake: 3,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BaselineConfig {
    pub ga: GaConfig,
    pub vns: VnsConfig,
}

/// A baseline's plan together with its exact evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineOutcome {
    pub assignment: Assignment,
    pub eval: EvalResult,
}

fn evaluate(decoder: &Decoder<'_>, assignment: Assignment) -> BaselineOutcome {
    let eval = total_efficiency(decoder.instance(), decoder.match_matrix(), &assignment)
        .expect("assignment indices are in range");
    BaselineOutcome { assignment, eval }
}

/// Seats candidates in the given order, each at its best eligible open
/// position, skipping those that fit nowhere.
fn seat_in_order(decoder: &Decoder<'_>, order: &[usize]) -> Assignment {
    let mut ctx = DecodeContext::new(decoder);
    for &c in order {
        if ctx.open_positions() == 0 {
            break;
        }
        if let Some(p) = ctx.choose_position(c) {
            ctx.seat(c, p);
        }
    }
    Assignment::from_pairs(ctx.seats().to_vec())
}

/// Construction heuristic 1: candidates ranked by how many team skills
/// they hold, descending; ties to the lower id.
pub fn ch1_solve(decoder: &Decoder<'_>) -> BaselineOutcome {
    let inst = decoder.instance();
    let mut order: Vec<usize> = (0..inst.num_candidates()).collect();
    let team_count = |c: usize| {
        inst.candidates[c]
            .skills
            .iter()
            .filter(|s| inst.team_skills.binary_search(s).is_ok())
            .count()
    };
    order.sort_by_key(|&c| core::cmp::Reverse(team_count(c)));
    evaluate(decoder, seat_in_order(decoder, &order))
}

/// Construction heuristic 2: candidates ranked by their best match score
/// over all positions, descending; ties to the lower id. This ordering is
/// the surrogate's reference rule at the first decode step.
pub fn ch2_solve(decoder: &Decoder<'_>) -> BaselineOutcome {
    evaluate(decoder, seat_in_order(decoder, &ch2_order(decoder)))
}

pub(crate) fn ch2_order(decoder: &Decoder<'_>) -> Vec<usize> {
    let inst = decoder.instance();
    let mm = decoder.match_matrix();
    let best_ez = |c: usize| mm.row(c).iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
    let mut order: Vec<usize> = (0..inst.num_candidates()).collect();
    order.sort_by(|&a, &b| {
        best_ez(b)
            .partial_cmp(&best_ez(a))
            .expect("match scores are finite")
            .then(a.cmp(&b))
    });
    order
}

/// A direct chromosome: the candidate seated at each position.
type Chromosome = Vec<usize>;

fn chromosome_fitness(decoder: &Decoder<'_>, ch: &Chromosome) -> f64 {
    let asg = Assignment::from_pairs(ch.iter().enumerate().map(|(j, &c)| (c, j)).collect());
    total_efficiency(decoder.instance(), decoder.match_matrix(), &asg)
        .expect("indices in range")
        .total_efficiency
}

/// Random chromosome biased towards eligibility: per position, a random
/// unused qualified candidate when one exists, else any unused one.
fn random_chromosome<R: Rng>(decoder: &Decoder<'_>, rng: &mut R) -> Chromosome {
    let nc = decoder.instance().num_candidates();
    let np = decoder.instance().num_positions();
    let mut used = alloc::vec![false; nc];
    let mut out = Vec::with_capacity(np);
    let mut pool = Vec::new();
    for j in 0..np {
        pool.clear();
        pool.extend((0..nc).filter(|&c| !used[c] && decoder.is_eligible(c, j)));
        let c = if pool.is_empty() {
            loop {
                let c = rng.gen_range(0..nc);
                if !used[c] {
                    break c;
                }
            }
        } else {
            pool[rng.gen_range(0..pool.len())]
        };
        used[c] = true;
        out.push(c);
    }
    out
}

/// Position-wise uniform crossover with duplicate repair: repeated
/// candidates after mixing are replaced by the best unused candidate (by
/// match score with the position, ties to the lower id).
fn ga_crossover<R: Rng>(
    decoder: &Decoder<'_>,
    a: &Chromosome,
    b: &Chromosome,
    rng: &mut R,
) -> Chromosome {
    let nc = decoder.instance().num_candidates();
    let np = a.len();
    let mut child: Chromosome = (0..np)
        .map(|j| if rng.gen::<bool>() { a[j] } else { b[j] })
        .collect();
    let mut used = alloc::vec![false; nc];
    for j in 0..np {
        let c = child[j];
        if used[c] {
            let mm = decoder.match_matrix();
            let mut best: Option<(f64, usize)> = None;
            for cand in 0..nc {
                if !used[cand] && cand != c {
                    let ez = mm.ez(cand, j);
                    if best.map_or(true, |(bez, _)| ez > bez) {
                        best = Some((ez, cand));
                    }
                }
            }
            child[j] = best.expect("pool exceeds positions").1;
        }
        used[child[j]] = true;
    }
    child
}

/// Swaps two genes or replaces one with a random unused candidate.
fn ga_mutate<R: Rng>(decoder: &Decoder<'_>, ch: &mut Chromosome, rng: &mut R) {
    let np = ch.len();
    let nc = decoder.instance().num_candidates();
    if np >= 2 && rng.gen::<bool>() {
        let i = rng.gen_range(0..np);
        let j = rng.gen_range(0..np);
        ch.swap(i, j);
    } else {
        let j = rng.gen_range(0..np);
        let replacement = loop {
            let c = rng.gen_range(0..nc);
            if !ch.contains(&c) {
                break c;
            }
        };
        ch[j] = replacement;
    }
}

/// Direct-encoding GA over position-to-candidate injections; infeasible
/// plans score zero, the incumbent is kept across generations.
pub fn ga_solve(decoder: &Decoder<'_>, cfg: &GaConfig, seed: u64) -> BaselineOutcome {
    let mut rng = stream(seed, StreamId::GaBaseline);
    let mut pop: Vec<(Chromosome, f64)> = (0..cfg.pop_size.max(2))
        .map(|_| {
            let ch = random_chromosome(decoder, &mut rng);
            let fit = chromosome_fitness(decoder, &ch);
            (ch, fit)
        })
        .collect();

    let mut best = pop
        .iter()
        .max_by(|a, b| a.1.partial_cmp(&b.1).expect("fitness is finite"))
        .expect("population non-empty")
        .clone();

    for _ in 0..cfg.generations {
        let mut next = Vec::with_capacity(pop.len());
        // Elitism: the incumbent survives unchanged.
        next.push(best.clone());
        while next.len() < pop.len() {
            let pick = |rng: &mut rand_chacha::ChaCha8Rng| {
                let mut w = rng.gen_range(0..pop.len());
                for _ in 1..cfg.tournament {
                    let k = rng.gen_range(0..pop.len());
                    if pop[k].1 > pop[w].1 {
                        w = k;
                    }
                }
                w
            };
            let pa = pick(&mut rng);
            let mut child = if rng.gen::<f64>() < cfg.crossover_rate {
                let pb = pick(&mut rng);
                ga_crossover(decoder, &pop[pa].0, &pop[pb].0, &mut rng)
            } else {
                pop[pa].0.clone()
            };
            if rng.gen::<f64>() < cfg.mutation_rate {
                ga_mutate(decoder, &mut child, &mut rng);
            }
            let fit = chromosome_fitness(decoder, &child);
            next.push((child, fit));
        }
        pop = next;
        for entry in &pop {
            if entry.1 > best.1 {
                best = entry.clone();
            }
        }
    }

    let asg = Assignment::from_pairs(best.0.iter().enumerate().map(|(j, &c)| (c, j)).collect());
    evaluate(decoder, asg)
}

/// Neighbourhood moves over a complete chromosome.
struct VnsSearch<'d, 'i> {
    decoder: &'d Decoder<'i>,
    evals: usize,
    budget: usize,
}

impl<'d, 'i> VnsSearch<'d, 'i> {
    fn fitness(&mut self, ch: &Chromosome) -> f64 {
        self.evals += 1;
        chromosome_fitness(self.decoder, ch)
    }

    fn out_of_budget(&self) -> bool {
        self.evals >= self.budget
    }

    /// First-improvement pass over swap, single replacement and double
    /// replacement moves. Returns true when an improving move was taken.
    fn improve_once(&mut self, ch: &mut Chromosome, fit: &mut f64) -> bool {
        let np = ch.len();
        let nc = self.decoder.instance().num_candidates();
        // Swap two seats when both stay qualified.
        for i in 0..np {
            for j in (i + 1)..np {
                if self.out_of_budget() {
                    return false;
                }
                if self.decoder.is_eligible(ch[j], i) && self.decoder.is_eligible(ch[i], j) {
                    ch.swap(i, j);
                    let f = self.fitness(ch);
                    if f > *fit {
                        *fit = f;
                        return true;
                    }
                    ch.swap(i, j);
                }
            }
        }
        // Replace one seat with an unseated candidate.
        let mut used = alloc::vec![false; nc];
        for &c in ch.iter() {
            used[c] = true;
        }
        for j in 0..np {
            for c in 0..nc {
                if used[c] || !self.decoder.is_eligible(c, j) {
                    continue;
                }
                if self.out_of_budget() {
                    return false;
                }
                let old = ch[j];
                ch[j] = c;
                let f = self.fitness(ch);
                if f > *fit {
                    *fit = f;
                    return true;
                }
                ch[j] = old;
            }
        }
        // Replace two seats at once (first improving pair found).
        for j1 in 0..np {
            for j2 in (j1 + 1)..np {
                for c1 in 0..nc {
                    if used[c1] || !self.decoder.is_eligible(c1, j1) {
                        continue;
                    }
                    for c2 in 0..nc {
                        if used[c2] || c2 == c1 || !self.decoder.is_eligible(c2, j2) {
                            continue;
                        }
                        if self.out_of_budget() {
                            return false;
                        }
                        let (o1, o2) = (ch[j1], ch[j2]);
                        ch[j1] = c1;
                        ch[j2] = c2;
                        let f = self.fitness(ch);
                        if f > *fit {
                            *fit = f;
                            return true;
                        }
                        ch[j1] = o1;
                        ch[j2] = o2;
                    }
                }
            }
        }
        false
    }
}

/// Variable neighbourhood search seeded from the second construction
/// heuristic; only improvements are accepted, so the result never falls
/// below that start.
pub fn vns_solve(decoder: &Decoder<'_>, cfg: &VnsConfig, seed: u64) -> BaselineOutcome {
    let inst = decoder.instance();
    let np = inst.num_positions();
    let nc = inst.num_candidates();
    let mut rng = stream(seed, StreamId::VnsBaseline);

    let start = ch2_solve(decoder);
    // The search needs a complete plan; fill any gaps greedily.
    let mut seats: Vec<Option<usize>> = alloc::vec![None; np];
    for &(c, j) in start.assignment.pairs() {
        seats[j] = Some(c);
    }
    let mut used = alloc::vec![false; nc];
    for s in seats.iter().flatten() {
        used[*s] = true;
    }
    for j in 0..np {
        if seats[j].is_none() {
            let fill = (0..nc)
                .filter(|&c| !used[c])
                .max_by(|&a, &b| {
                    decoder
                        .match_matrix()
                        .ez(a, j)
                        .partial_cmp(&decoder.match_matrix().ez(b, j))
                        .expect("finite")
                        .then(b.cmp(&a))
                })
                .expect("pool exceeds positions");
            used[fill] = true;
            seats[j] = Some(fill);
        }
    }
    let mut best: Chromosome = seats.into_iter().map(|s| s.expect("filled")).collect();

    let mut search = VnsSearch {
        decoder,
        evals: 0,
        budget: cfg.max_evals.max(1),
    };
    let mut best_fit = search.fitness(&best);
    // Keep the heuristic start as the floor even if its evaluation is 0.
    let floor = (best.clone(), best_fit);

    let mut k = 1usize;
    while !search.out_of_budget() {
        // Shake: k random replacement moves.
        let mut trial = best.clone();
        for _ in 0..k {
            ga_mutate(decoder, &mut trial, &mut rng);
        }
        let mut fit = search.fitness(&trial);
        while search.improve_once(&mut trial, &mut fit) {}
        if fit > best_fit {
            best = trial;
            best_fit = fit;
            k = 1;
        } else {
            k = k % cfg.max_shake.max(1) + 1;
        }
    }

    if best_fit < floor.1 {
        best = floor.0;
    }
    let asg = Assignment::from_pairs(best.iter().enumerate().map(|(j, &c)| (c, j)).collect());
    evaluate(decoder, asg)
}
