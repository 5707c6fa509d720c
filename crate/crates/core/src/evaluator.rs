//! The exact team model: constraint checking, communication efficiency and
//! total efficiency, plus a brute-force optimizer for tiny instances.
//!
//! Constraint families are tagged C1..C6:
//! - C1: a candidate holds at most one position
//! - C2: every position holds exactly one candidate
//! - C3: each team skill reaches its required headcount
//! - C4: the members jointly cover every team skill
//! - C5: every seated member holds all skills their position requires
//! - C6: the selection variables are binary (no repeated pair)
//!
//! Communication efficiency is `(3 + s / m^2) / 2` where `s` sums the
//! willingness entries over all ordered member pairs including each member
//! with themselves (the diagonal is fixed at 1), and `m` is the total
//! required headcount. Generated instances pin `m` to the team size, which
//! bounds the factor to `[1, 2]` with 2 reached exactly by an
//! all-cooperative team.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::fuzzy::{self, MatchMatrix};
use crate::problem::Instance;

/// A team plan: raw (candidate, position) selections. The raw form can
/// express invalid states (duplicates, collisions) so the checker has
/// something to reject.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Assignment {
    pairs: Vec<(usize, usize)>,
}

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a plan from raw pairs, normalized to candidate order.
    pub fn from_pairs(mut pairs: Vec<(usize, usize)>) -> Self {
        pairs.sort_unstable();
        Self { pairs }
    }

    pub fn assign(&mut self, candidate: usize, position: usize) {
        let at = self.pairs.partition_point(|&p| p < (candidate, position));
        self.pairs.insert(at, (candidate, position));
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn members(&self) -> impl Iterator<Item = usize> + '_ {
        self.pairs.iter().map(|&(c, _)| c)
    }

    /// Position of `candidate`, if seated.
    pub fn position_of(&self, candidate: usize) -> Option<usize> {
        self.pairs
            .iter()
            .find(|&&(c, _)| c == candidate)
            .map(|&(_, j)| j)
    }

    /// True when every position is held by exactly one candidate and no
    /// candidate is seated twice.
    pub fn is_complete(&self, num_positions: usize) -> bool {
        if self.pairs.len() != num_positions {
            return false;
        }
        let mut seen_pos = vec![false; num_positions];
        let mut last_cand = None;
        for &(c, j) in &self.pairs {
            if j >= num_positions || seen_pos[j] || last_cand == Some(c) {
                return false;
            }
            seen_pos[j] = true;
            last_cand = Some(c);
        }
        true
    }
}

/// One breached constraint family with the offending indices.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ConstraintViolation {
    /// Family tag, `"C1"`..`"C6"`.
    pub tag: &'static str,
    pub detail: String,
}

/// Evaluation of one plan against the model.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct EvalResult {
    /// Communication efficiency; absent when the plan is incomplete.
    pub gamma: Option<f64>,
    /// Sum of match scores over the seated pairs.
    pub match_sum: f64,
    /// `match_sum * gamma` when feasible, else 0 (the penalty fitness).
    pub total_efficiency: f64,
    pub feasible: bool,
    pub violations: Vec<ConstraintViolation>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum EvalError {
    CandidateOutOfRange { candidate: usize, pool: usize },
    PositionOutOfRange { position: usize, count: usize },
    IncompleteAssignment,
    InstanceTooLarge { candidates: usize, positions: usize },
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalError::CandidateOutOfRange { candidate, pool } => {
                write!(f, "candidate index {candidate} out of range (pool size {pool})")
            }
            EvalError::PositionOutOfRange { position, count } => {
                write!(f, "position index {position} out of range ({count} positions)")
            }
            EvalError::IncompleteAssignment => {
                write!(f, "assignment does not fill every position exactly once")
            }
            EvalError::InstanceTooLarge { candidates, positions } => {
                write!(
                    f,
                    "exhaustive search refused: {candidates} candidates x {positions} positions \
                     exceeds the 10 x 4 guard"
                )
            }
        }
    }
}

impl core::error::Error for EvalError {}

fn check_bounds(inst: &Instance, asg: &Assignment) -> Result<(), EvalError> {
    let nc = inst.num_candidates();
    let np = inst.num_positions();
    for &(c, j) in asg.pairs() {
        if c >= nc {
            return Err(EvalError::CandidateOutOfRange { candidate: c, pool: nc });
        }
        if j >= np {
            return Err(EvalError::PositionOutOfRange { position: j, count: np });
        }
    }
    Ok(())
}

/// Returns one violation per breached constraint family; empty iff the
/// plan is feasible. Out-of-range indices are an error, not a violation.
pub fn check_feasible(
    inst: &Instance,
    asg: &Assignment,
) -> Result<Vec<ConstraintViolation>, EvalError> {
    check_bounds(inst, asg)?;
    let nc = inst.num_candidates();
    let np = inst.num_positions();
    let mut out = Vec::new();

    // C6: binary selection variables - a pair listed twice.
    let dup = asg.pairs().windows(2).find(|w| w[0] == w[1]);
    if let Some(w) = dup {
        out.push(ConstraintViolation {
            tag: "C6",
            detail: format!("pair (candidate {}, position {}) listed more than once", w[0].0, w[0].1),
        });
    }

    // C1: candidate seated at most once.
    let mut per_cand = vec![0usize; nc];
    for &(c, _) in asg.pairs() {
        per_cand[c] += 1;
    }
    if let Some((c, &n)) = per_cand.iter().enumerate().find(|&(_, &n)| n > 1) {
        out.push(ConstraintViolation {
            tag: "C1",
            detail: format!("candidate {c} holds {n} positions"),
        });
    }

    // C2: every position exactly once.
    let mut per_pos = vec![0usize; np];
    for &(_, j) in asg.pairs() {
        per_pos[j] += 1;
    }
    if let Some((j, &n)) = per_pos.iter().enumerate().find(|&(_, &n)| n != 1) {
        let state = if n == 0 { "empty".into() } else { format!("held by {n} candidates") };
        out.push(ConstraintViolation {
            tag: "C2",
            detail: format!("position {j} is {state}"),
        });
    }

    // C3: headcount per team skill.
    for (&s, &need) in &inst.demand {
        let have = asg
            .members()
            .filter(|&c| inst.candidates[c].skills.binary_search(&s).is_ok())
            .count();
        if have < need {
            out.push(ConstraintViolation {
                tag: "C3",
                detail: format!("skill {s} needs {need} members, only {have} selected"),
            });
            break;
        }
    }

    // C4: members jointly cover the team skills.
    for &s in &inst.team_skills {
        let covered = asg
            .members()
            .any(|c| inst.candidates[c].skills.binary_search(&s).is_ok());
        if !covered {
            out.push(ConstraintViolation {
                tag: "C4",
                detail: format!("no selected member holds team skill {s}"),
            });
            break;
        }
    }

    // C5: seated members qualify for their positions.
    for &(c, j) in asg.pairs() {
        if !inst.qualifies(c, j) {
            out.push(ConstraintViolation {
                tag: "C5",
                detail: format!("candidate {c} lacks skills required by position {j}"),
            });
            break;
        }
    }

    Ok(out)
}

/// Communication efficiency of a complete plan. Requires every position
/// filled exactly once.
pub fn communication_efficiency(inst: &Instance, asg: &Assignment) -> Result<f64, EvalError> {
    check_bounds(inst, asg)?;
    if !asg.is_complete(inst.num_positions()) {
        return Err(EvalError::IncompleteAssignment);
    }
    Ok(gamma_unchecked(inst, asg))
}

fn gamma_unchecked(inst: &Instance, asg: &Assignment) -> f64 {
    let mut s: i64 = 0;
    for &(a, _) in asg.pairs() {
        for &(b, _) in asg.pairs() {
            s += i64::from(inst.relation(a, b));
        }
    }
    let m = inst.demand_total() as f64;
    0.5 * (3.0 + (s as f64) / (m * m))
}

/// Scores a plan: feasibility, communication efficiency and total
/// efficiency. Infeasibility is a result (zero fitness), not an error.
pub fn total_efficiency(
    inst: &Instance,
    mm: &MatchMatrix,
    asg: &Assignment,
) -> Result<EvalResult, EvalError> {
    let violations = check_feasible(inst, asg)?;
    let match_sum: f64 = asg.pairs().iter().map(|&(c, j)| mm.ez(c, j)).sum();
    let complete = asg.is_complete(inst.num_positions());
    let gamma = complete.then(|| gamma_unchecked(inst, asg));
    let feasible = violations.is_empty();
    let total_efficiency = match (feasible, gamma) {
        (true, Some(g)) => match_sum * g,
        _ => 0.0,
    };
    Ok(EvalResult {
        gamma,
        match_sum,
        total_efficiency,
        feasible: feasible && complete,
        violations,
    })
}

/// Output of the exhaustive search.
#[derive(Debug, Clone, PartialEq)]
pub struct BruteForceResult {
    /// Best feasible plan and its total efficiency; absent when no
    /// feasible plan exists.
    pub best: Option<(Assignment, f64)>,
    pub enumerated: usize,
    pub feasible_count: usize,
}

/// Exhaustively enumerates every injection of positions into candidates,
/// in lexicographic order of the occupant vector, and keeps the first
/// feasible maximum. Guarded to at most 10 candidates and 4 positions.
pub fn brute_force_optimum(inst: &Instance) -> Result<BruteForceResult, EvalError> {
    let nc = inst.num_candidates();
    let np = inst.num_positions();
    if nc > 10 || np > 4 {
        return Err(EvalError::InstanceTooLarge { candidates: nc, positions: np });
    }
    let mm = fuzzy::match_matrix(inst).expect("instance evaluations are valid");

    let mut best: Option<(Assignment, f64)> = None;
    let mut enumerated = 0usize;
    let mut feasible_count = 0usize;
    let mut occupants = vec![usize::MAX; np];
    let mut used = vec![false; nc];

    fn recurse(
        inst: &Instance,
        mm: &MatchMatrix,
        occupants: &mut Vec<usize>,
        used: &mut Vec<bool>,
        j: usize,
        enumerated: &mut usize,
        feasible_count: &mut usize,
        best: &mut Option<(Assignment, f64)>,
    ) {
        let np = inst.num_positions();
        if j == np {
            *enumerated += 1;
            let asg = Assignment::from_pairs(
                occupants.iter().enumerate().map(|(p, &c)| (c, p)).collect(),
            );
            let result = total_efficiency(inst, mm, &asg).expect("indices in range");
            if result.feasible {
                *feasible_count += 1;
                // Strict improvement keeps the lexicographically first tie.
                if best.as_ref().map_or(true, |&(_, te)| result.total_efficiency > te) {
                    *best = Some((asg, result.total_efficiency));
                }
            }
            return;
        }
        for c in 0..inst.num_candidates() {
            if !used[c] {
                used[c] = true;
                occupants[j] = c;
                recurse(inst, mm, occupants, used, j + 1, enumerated, feasible_count, best);
                used[c] = false;
            }
        }
    }

    recurse(
        inst,
        &mm,
        &mut occupants,
        &mut used,
        0,
        &mut enumerated,
        &mut feasible_count,
        &mut best,
    );
    Ok(BruteForceResult { best, enumerated, feasible_count })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fuzzy::{CompetencyWeights, Ifn};
    use crate::problem::{generate_instance, Candidate, GeneratorParams, Position};
    use alloc::collections::BTreeMap;
    use alloc::string::ToString;

    /// Hand-built instance: `m` members, one skill, every candidate
    /// qualified everywhere, all evaluations `<1, 0>`, relations given by
    /// `rel(a, b)` for the off-diagonal.
    fn uniform_instance(nc: usize, np: usize, rel: impl Fn(usize, usize) -> i8) -> Instance {
        let weights = CompetencyWeights::new(vec![1.0]).unwrap();
        let mut relations = vec![vec![0i8; nc]; nc];
        for a in 0..nc {
            relations[a][a] = 1;
            for b in 0..nc {
                if a != b {
                    relations[a][b] = rel(a.min(b), a.max(b));
                }
            }
        }
        Instance {
            name: "test".to_string(),
            seed: 0,
            skills: vec![0],
            team_skills: vec![0],
            demand: BTreeMap::from([(0, np)]),
            candidates: (0..nc)
                .map(|id| Candidate { id, skills: vec![0] })
                .collect(),
            positions: (0..np)
                .map(|id| Position {
                    id,
                    required_skills: vec![0],
                    weights: weights.clone(),
                })
                .collect(),
            relations,
            evaluations: vec![vec![vec![Ifn::new(1.0, 0.0).unwrap()]; np]; nc],
        }
    }

    fn complete(np: usize) -> Assignment {
        Assignment::from_pairs((0..np).map(|j| (j, j)).collect())
    }

    #[test]
    fn gamma_single_member() {
        let inst = uniform_instance(2, 1, |_, _| 0);
        let gamma = communication_efficiency(&inst, &complete(1)).unwrap();
        assert!((gamma - 2.0).abs() < 1e-12);
    }

    #[test]
    fn gamma_neutral_team() {
        // Only the diagonal contributes: gamma = 1.5 + 1/(2m).
        for m in [2usize, 3, 5, 8] {
            let inst = uniform_instance(m + 1, m, |_, _| 0);
            let gamma = communication_efficiency(&inst, &complete(m)).unwrap();
            assert!((gamma - (1.5 + 1.0 / (2.0 * m as f64))).abs() < 1e-12, "m = {m}");
        }
    }

    #[test]
    fn gamma_hostile_team() {
        // All off-diagonal pairs refuse: gamma = (3 + (2 - m)/m) / 2.
        for m in [2usize, 3, 6] {
            let inst = uniform_instance(m + 1, m, |_, _| -1);
            let gamma = communication_efficiency(&inst, &complete(m)).unwrap();
            let expect = 0.5 * (3.0 + (2.0 - m as f64) / m as f64);
            assert!((gamma - expect).abs() < 1e-12, "m = {m}");
        }
    }

    #[test]
    fn gamma_cooperative_team_is_two() {
        let inst = uniform_instance(6, 4, |_, _| 1);
        let gamma = communication_efficiency(&inst, &complete(4)).unwrap();
        assert_eq!(gamma, 2.0);
    }

    #[test]
    fn gamma_requires_complete_assignment() {
        let inst = uniform_instance(4, 2, |_, _| 0);
        let partial = Assignment::from_pairs(vec![(0, 0)]);
        assert_eq!(
            communication_efficiency(&inst, &partial),
            Err(EvalError::IncompleteAssignment)
        );
    }

    #[test]
    fn gamma_ignores_position_permutation() {
        let inst = generate_instance(&GeneratorParams::with_positions(5), 11).unwrap();
        let members: Vec<usize> = vec![0, 2, 4, 6, 8];
        let a = Assignment::from_pairs(members.iter().enumerate().map(|(j, &c)| (c, j)).collect());
        let b = Assignment::from_pairs(
            members.iter().enumerate().map(|(j, &c)| (c, (j + 2) % 5)).collect(),
        );
        let ga = communication_efficiency(&inst, &a).unwrap();
        let gb = communication_efficiency(&inst, &b).unwrap();
        assert_eq!(ga, gb);
    }

    #[test]
    fn violations_constructed_cases() {
        let inst = uniform_instance(4, 2, |_, _| 0);
        let dup_candidate = Assignment::from_pairs(vec![(0, 0), (0, 1)]);
        let tags: Vec<_> = check_feasible(&inst, &dup_candidate)
            .unwrap()
            .iter()
            .map(|v| v.tag)
            .collect();
        assert!(tags.contains(&"C1"));

        let empty_position = Assignment::from_pairs(vec![(0, 0)]);
        let tags: Vec<_> = check_feasible(&inst, &empty_position)
            .unwrap()
            .iter()
            .map(|v| v.tag)
            .collect();
        assert!(tags.contains(&"C2"));

        let repeated_pair = Assignment::from_pairs(vec![(0, 0), (0, 0), (1, 1)]);
        let tags: Vec<_> = check_feasible(&inst, &repeated_pair)
            .unwrap()
            .iter()
            .map(|v| v.tag)
            .collect();
        assert!(tags.contains(&"C6"));

        let out_of_range = Assignment::from_pairs(vec![(9, 0)]);
        assert!(matches!(
            check_feasible(&inst, &out_of_range),
            Err(EvalError::CandidateOutOfRange { .. })
        ));
    }

    #[test]
    fn unqualified_member_is_c5() {
        let mut inst = uniform_instance(4, 2, |_, _| 0);
        inst.skills = vec![0, 1];
        inst.positions[1].required_skills = vec![1];
        let asg = complete(2);
        let tags: Vec<_> = check_feasible(&inst, &asg).unwrap().iter().map(|v| v.tag).collect();
        assert!(tags.contains(&"C5"));
    }

    #[test]
    fn efficiency_composes_match_and_gamma() {
        // Worked single-pair example: ez about 0.22, solo team, gamma 2.
        let weights = CompetencyWeights::new(vec![0.4, 0.35, 0.25]).unwrap();
        let evals = vec![
            Ifn::new(0.4, 0.6).unwrap(),
            Ifn::new(0.6, 0.4).unwrap(),
            Ifn::new(0.8, 0.2).unwrap(),
        ];
        let mut inst = uniform_instance(2, 1, |_, _| 0);
        inst.positions[0].weights = weights;
        inst.evaluations = vec![vec![evals.clone()], vec![evals]];
        let mm = fuzzy::match_matrix(&inst).unwrap();
        assert!((mm.ez(0, 0) - 0.22).abs() < 0.01);

        let result = total_efficiency(&inst, &mm, &complete(1)).unwrap();
        assert!(result.feasible);
        assert_eq!(result.gamma, Some(2.0));
        assert!((result.total_efficiency - 0.44).abs() < 0.02);
        assert_eq!(result.total_efficiency, result.match_sum * 2.0);
    }

    #[test]
    fn empty_assignment_is_infeasible_zero() {
        let inst = uniform_instance(4, 2, |_, _| 0);
        let mm = fuzzy::match_matrix(&inst).unwrap();
        let result = total_efficiency(&inst, &mm, &Assignment::new()).unwrap();
        assert!(!result.feasible);
        assert_eq!(result.total_efficiency, 0.0);
    }

    #[test]
    fn relabeling_candidates_preserves_te() {
        let inst = generate_instance(&GeneratorParams::with_positions(4), 5).unwrap();
        let mm = fuzzy::match_matrix(&inst).unwrap();
        let nc = inst.num_candidates();
        // Swap candidates 0 and 1 everywhere.
        let perm: Vec<usize> = (0..nc).map(|c| match c {
            0 => 1,
            1 => 0,
            c => c,
        }).collect();
        let mut relabeled = inst.clone();
        relabeled.candidates = (0..nc)
            .map(|id| Candidate { id, skills: inst.candidates[perm[id]].skills.clone() })
            .collect();
        relabeled.evaluations = (0..nc).map(|i| inst.evaluations[perm[i]].clone()).collect();
        relabeled.relations =
            (0..nc).map(|i| (0..nc).map(|j| inst.relations[perm[i]][perm[j]]).collect()).collect();
        let mm2 = fuzzy::match_matrix(&relabeled).unwrap();

        let asg = Assignment::from_pairs(vec![(0, 0), (1, 1), (3, 2), (5, 3)]);
        let asg2 = Assignment::from_pairs(vec![(1, 0), (0, 1), (3, 2), (5, 3)]);
        let r1 = total_efficiency(&inst, &mm, &asg).unwrap();
        let r2 = total_efficiency(&relabeled, &mm2, &asg2).unwrap();
        assert_eq!(r1.total_efficiency, r2.total_efficiency);
        assert_eq!(r1.feasible, r2.feasible);
    }

    #[test]
    fn brute_force_respects_guard() {
        let inst = generate_instance(&GeneratorParams::with_positions(8), 1).unwrap();
        assert!(matches!(
            brute_force_optimum(&inst),
            Err(EvalError::InstanceTooLarge { .. })
        ));
    }

    #[test]
    fn brute_force_finds_unique_feasible() {
        // Two candidates, one qualified; the unique feasible plan wins.
        let mut inst = uniform_instance(2, 1, |_, _| 0);
        inst.skills = vec![0, 1];
        inst.positions[0].required_skills = vec![0, 1];
        inst.candidates[1].skills = vec![0, 1];
        let result = brute_force_optimum(&inst).unwrap();
        let (best, _) = result.best.expect("feasible plan exists");
        assert_eq!(best.pairs(), &[(1, 0)]);
        assert_eq!(result.feasible_count, 1);
    }

    #[test]
    fn brute_force_dominates_samples() {
        let params = GeneratorParams {
            num_positions: 2,
            candidate_ratio: 1.6,
            ..GeneratorParams::default()
        };
        let inst = generate_instance(&params, 9).unwrap();
        let mm = fuzzy::match_matrix(&inst).unwrap();
        let result = brute_force_optimum(&inst).unwrap();
        let (_, best_te) = result.best.expect("generated instances are feasible");
        for a in 0..inst.num_candidates() {
            for b in 0..inst.num_candidates() {
                if a == b {
                    continue;
                }
                let te = total_efficiency(&inst, &mm, &Assignment::from_pairs(vec![(a, 0), (b, 1)]))
                    .unwrap();
                if te.feasible {
                    assert!(te.total_efficiency <= best_te + 1e-12);
                }
            }
        }
    }

    #[test]
    fn brute_force_reports_infeasible() {
        // Headcount impossible to meet: demand 2 for a skill only one
        // candidate holds.
        let mut inst = uniform_instance(3, 2, |_, _| 0);
        inst.skills = vec![0, 1];
        inst.team_skills = vec![0, 1];
        inst.demand = BTreeMap::from([(0, 1), (1, 1)]);
        inst.candidates[0].skills = vec![0];
        inst.candidates[1].skills = vec![0];
        inst.candidates[2].skills = vec![0];
        inst.demand.insert(1, 1);
        let result = brute_force_optimum(&inst).unwrap();
        assert_eq!(result.best, None);
        assert_eq!(result.feasible_count, 0);
        assert!(result.enumerated > 0);
    }

    #[test]
    fn gamma_in_range_bulk() {
        use rand::seq::SliceRandom;
        let mut rng = crate::rng::stream(3, crate::rng::StreamId::Test);
        for seed in 0..5 {
            let inst = generate_instance(&GeneratorParams::with_positions(8), seed).unwrap();
            let nc = inst.num_candidates();
            let np = inst.num_positions();
            for _ in 0..200 {
                let mut ids: Vec<usize> = (0..nc).collect();
                ids.shuffle(&mut rng);
                let asg = Assignment::from_pairs(
                    ids[..np].iter().enumerate().map(|(j, &c)| (c, j)).collect(),
                );
                let gamma = communication_efficiency(&inst, &asg).unwrap();
                assert!((1.0..=2.0 + 1e-9).contains(&gamma), "gamma = {gamma}");
            }
        }
    }
}
