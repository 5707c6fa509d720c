//! Decision-vector behaviour on hand-built instances.

use std::collections::BTreeMap;

use teamform_core::fuzzy::{CompetencyWeights, Ifn};
use teamform_core::gp::{DecodeContext, Decoder, RuleTree};
use teamform_core::problem::{Candidate, Instance, Position};
use teamform_core::surrogate::{decision_vector, reference_rank};

/// Two candidates, one position, both eligible. Candidate 0 has the higher
/// match score and holds more team skills, so score order and skill-count
/// order coincide.
fn two_candidate_instance() -> Instance {
    let weights = CompetencyWeights::new(vec![1.0]).unwrap();
    let ez = |e: f64| {
        let mu = (1.0 + e) / 2.0;
        vec![Ifn::new(mu, 1.0 - mu).unwrap()]
    };
    Instance {
        name: "two".into(),
        seed: 0,
        skills: vec![0, 1],
        team_skills: vec![0, 1],
        demand: BTreeMap::from([(0, 1)]),
        candidates: vec![
            Candidate { id: 0, skills: vec![0, 1] },
            Candidate { id: 1, skills: vec![0] },
        ],
        positions: vec![Position { id: 0, required_skills: vec![0], weights }],
        relations: vec![vec![1, 0], vec![0, 1]],
        evaluations: vec![vec![ez(0.9)], vec![ez(0.1)]],
    }
}

#[test]
fn reference_ranks_by_best_score() {
    let inst = two_candidate_instance();
    let decoder = Decoder::new(&inst).unwrap();
    let ctx = DecodeContext::new(&decoder);
    let ranks = reference_rank(&ctx);
    assert_eq!(ranks, vec![(0, 1), (1, 2)]);
}

#[test]
fn reference_rank_breaks_ties_by_id() {
    let mut inst = two_candidate_instance();
    inst.evaluations[1] = inst.evaluations[0].clone();
    let decoder = Decoder::new(&inst).unwrap();
    let ctx = DecodeContext::new(&decoder);
    assert_eq!(reference_rank(&ctx), vec![(0, 1), (1, 2)]);
}

#[test]
fn single_candidate_ranks_first() {
    let mut inst = two_candidate_instance();
    let decoder = Decoder::new(&inst).unwrap();
    let mut ctx = DecodeContext::new(&decoder);
    ctx.drop_candidate(1);
    assert_eq!(reference_rank(&ctx), vec![(0, 1)]);
    inst.name.clear();
}

#[test]
fn vector_of_reference_aligned_rule_is_all_ones() {
    // SCN order equals score order here, so the rule picks the
    // reference-best candidate at the only step.
    let inst = two_candidate_instance();
    let decoder = Decoder::new(&inst).unwrap();
    let tree: RuleTree = "SCN".parse().unwrap();
    let v = decision_vector(&tree, &decoder);
    assert_eq!(v.ranks, vec![1]);
}

#[test]
fn vector_of_anti_reference_rule_is_worst_rank() {
    let inst = two_candidate_instance();
    let decoder = Decoder::new(&inst).unwrap();
    let tree: RuleTree = "(- 0 SCN)".parse().unwrap();
    let v = decision_vector(&tree, &decoder);
    assert_eq!(v.ranks, vec![2]);
}

#[test]
fn vectors_are_deterministic() {
    let inst = two_candidate_instance();
    let decoder = Decoder::new(&inst).unwrap();
    let tree: RuleTree = "(+ SCN (* 0.5 SC))".parse().unwrap();
    assert_eq!(decision_vector(&tree, &decoder), decision_vector(&tree, &decoder));
}

#[test]
fn stalled_decode_pads_with_worst_rank() {
    // Nobody qualifies for the second position, so the decode stalls
    // after one seat and the vector pads with |C|.
    let weights = CompetencyWeights::new(vec![1.0]).unwrap();
    let ez = |e: f64| {
        let mu = (1.0 + e) / 2.0;
        vec![Ifn::new(mu, 1.0 - mu).unwrap()]
    };
    let inst = Instance {
        name: "stall".into(),
        seed: 0,
        skills: vec![0, 1],
        team_skills: vec![0],
        demand: BTreeMap::from([(0, 1)]),
        candidates: vec![
            Candidate { id: 0, skills: vec![0] },
            Candidate { id: 1, skills: vec![0] },
        ],
        positions: vec![
            Position { id: 0, required_skills: vec![0], weights: weights.clone() },
            Position { id: 1, required_skills: vec![1], weights },
        ],
        relations: vec![vec![1, 0], vec![0, 1]],
        evaluations: vec![vec![ez(0.4), ez(0.2)], vec![ez(0.3), ez(0.1)]],
    };
    let decoder = Decoder::new(&inst).unwrap();
    let tree: RuleTree = "SC".parse().unwrap();
    let out = decoder.decode(&tree);
    assert!(!out.complete && out.failed);
    let v = decision_vector(&tree, &decoder);
    assert_eq!(v.ranks.len(), 2);
    assert_eq!(v.ranks[1], 2);
}
