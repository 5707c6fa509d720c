//! Behavioural tests of the rule decoder: feature values, tie rules,
//! monotone-rescale invariance, and agreement between the batched scoring
//! path and a naive single-candidate reimplementation.

use std::collections::BTreeMap;

use teamform_core::evaluator::{check_feasible, total_efficiency, Assignment};
use teamform_core::fuzzy::{CompetencyWeights, Ifn};
use teamform_core::gp::{
    init_population, BinaryOp, DecodeContext, Decoder, GpConfig, Node, RuleTree, Terminal,
};
use teamform_core::problem::{generate_instance, Candidate, GeneratorParams, Instance, Position};
use teamform_core::rng::{stream, StreamId};

/// Hand-built single-dimension instance; per-pair match scores are set
/// directly (a lone evaluation aggregates to itself, so ez = mu - nu).
fn instance_with_scores(
    cand_skills: &[&[usize]],
    pos_required: &[&[usize]],
    team_skills: &[usize],
    demand: &[(usize, usize)],
    ez: &[&[f64]],
) -> Instance {
    let num_skills = cand_skills
        .iter()
        .chain(pos_required.iter())
        .flat_map(|s| s.iter())
        .chain(team_skills.iter())
        .max()
        .map_or(1, |&m| m + 1);
    let weights = CompetencyWeights::new(vec![1.0]).unwrap();
    let evaluations = ez
        .iter()
        .map(|row| {
            row.iter()
                .map(|&e| {
                    let mu = (1.0 + e) / 2.0;
                    vec![Ifn::new(mu, 1.0 - mu).unwrap()]
                })
                .collect()
        })
        .collect();
    let nc = cand_skills.len();
    let mut relations = vec![vec![0i8; nc]; nc];
    for (i, row) in relations.iter_mut().enumerate() {
        row[i] = 1;
    }
    Instance {
        name: "hand".into(),
        seed: 0,
        skills: (0..num_skills).collect(),
        team_skills: team_skills.to_vec(),
        demand: BTreeMap::from_iter(demand.iter().copied()),
        candidates: cand_skills
            .iter()
            .enumerate()
            .map(|(id, s)| Candidate { id, skills: s.to_vec() })
            .collect(),
        positions: pos_required
            .iter()
            .enumerate()
            .map(|(id, s)| Position {
                id,
                required_skills: s.to_vec(),
                weights: weights.clone(),
            })
            .collect(),
        relations,
        evaluations,
    }
}

fn rule(text: &str) -> RuleTree {
    text.parse().unwrap()
}

#[test]
fn fresh_context_feature_values() {
    let inst = generate_instance(&GeneratorParams::with_positions(6), 1).unwrap();
    let decoder = Decoder::new(&inst).unwrap();
    let ctx = DecodeContext::new(&decoder);
    let c = 0;
    assert_eq!(
        ctx.eval_terminal(Terminal::Rnp, c),
        ctx.eval_terminal(Terminal::Npt, c)
    );
    assert_eq!(ctx.eval_terminal(Terminal::Scw, c), 0.0);
    assert_eq!(ctx.eval_terminal(Terminal::Smp, c), 0.0);
    assert_eq!(ctx.eval_terminal(Terminal::Nsr, c), inst.team_skills.len() as f64);
}

#[test]
fn scn_counts_team_skills_only() {
    // Candidate skills {s1, s2}, team needs {s2, s3}: one overlap.
    let inst = instance_with_scores(
        &[&[1, 2], &[2, 3]],
        &[&[2]],
        &[2, 3],
        &[(2, 1), (3, 0)],
        &[&[0.5], &[0.5]],
    );
    let decoder = Decoder::new(&inst).unwrap();
    let ctx = DecodeContext::new(&decoder);
    assert_eq!(ctx.eval_terminal(Terminal::Scn, 0), 1.0);
    assert_eq!(ctx.eval_terminal(Terminal::Sc, 0), 2.0);
    assert_eq!(ctx.eval_terminal(Terminal::Scn, 1), 2.0);
}

#[test]
fn smp_tracks_worked_pair_score() {
    // One seat whose match score is the worked 0.22 value.
    let weights = CompetencyWeights::new(vec![0.4, 0.35, 0.25]).unwrap();
    let alphas = vec![
        Ifn::new(0.4, 0.6).unwrap(),
        Ifn::new(0.6, 0.4).unwrap(),
        Ifn::new(0.8, 0.2).unwrap(),
    ];
    let mut inst = instance_with_scores(
        &[&[0], &[0]],
        &[&[0]],
        &[0],
        &[(0, 1)],
        &[&[0.0], &[0.0]],
    );
    inst.positions[0].weights = weights;
    inst.evaluations = vec![vec![alphas.clone()], vec![alphas]];

    let decoder = Decoder::new(&inst).unwrap();
    let mut ctx = DecodeContext::new(&decoder);
    ctx.seat(0, 0);
    let smp = ctx.eval_terminal(Terminal::Smp, 1);
    assert!((smp - 0.22).abs() < 0.01, "SMP = {smp}");
}

#[test]
fn tree_evaluation_examples() {
    let inst = instance_with_scores(
        &[&[0, 1], &[0]],
        &[&[0]],
        &[0, 1, 2, 3, 4],
        &[(0, 1), (1, 0), (2, 0), (3, 0), (4, 0)],
        &[&[0.3], &[0.1]],
    );
    let decoder = Decoder::new(&inst).unwrap();
    let ctx = DecodeContext::new(&decoder);
    // Protected division against a zero constant.
    assert_eq!(ctx.eval_tree(&rule("(/ SC 0)"), 0), 1.0);
    // Candidate 0 holds exactly one team... two of five team skills; use
    // the {s1, s2} vs {s2, s3} case through SCN directly.
    assert_eq!(ctx.eval_tree(&rule("SCN"), 1), 1.0);
    // SC = 2, NSR = 5.
    assert_eq!(ctx.eval_tree(&rule("(max SC NSR)"), 0), 5.0);
}

#[test]
fn forced_single_pairing_ignores_rule() {
    let inst = instance_with_scores(&[&[0]], &[&[0]], &[0], &[(0, 1)], &[&[0.7]]);
    let decoder = Decoder::new(&inst).unwrap();
    for text in ["SC", "(- 0 SC)", "(sin RNP)", "0.5"] {
        let out = decoder.decode(&rule(text));
        assert_eq!(out.assignment.pairs(), &[(0, 0)]);
        assert!(out.complete && !out.failed);
    }
}

#[test]
fn scn_rule_seats_scarce_cover_first() {
    // Only candidate 1 covers skill b; under the SCN rule it has the
    // highest count and is seated first.
    let inst = instance_with_scores(
        &[&[0], &[0, 1], &[0]],
        &[&[0], &[0]],
        &[0, 1],
        &[(0, 1), (1, 1)],
        &[&[0.9, 0.8], &[0.2, 0.1], &[0.5, 0.4]],
    );
    let decoder = Decoder::new(&inst).unwrap();
    let (out, ranks) = decoder.decode_traced(&rule("SCN"));
    // First seat goes to candidate 1 at its best position (0; ez 0.2).
    assert_eq!(out.assignment.position_of(1), Some(0));
    assert!(out.complete);
    // Under the reference ordering (best ez), candidate 1 ranks last of 3.
    assert_eq!(ranks[0], 3);
    let violations = check_feasible(&inst, &out.assignment).unwrap();
    assert!(violations.is_empty());
}

#[test]
fn decode_is_deterministic_and_scale_invariant() {
    let inst = generate_instance(&GeneratorParams::with_positions(12), 3).unwrap();
    let decoder = Decoder::new(&inst).unwrap();
    let cfg = GpConfig::default();
    let trees = init_population(60, &cfg, &mut stream(8, StreamId::Test)).unwrap();
    for tree in &trees {
        let a = decoder.decode(tree);
        let b = decoder.decode(tree);
        assert_eq!(a, b);

        // 2 * t + 1 is strictly increasing, so the argmax and therefore
        // the whole seating trajectory is unchanged.
        let scaled = RuleTree::new(Node::Binary(
            BinaryOp::Add,
            Box::new(Node::Binary(
                BinaryOp::Mul,
                Box::new(Node::Const(2.0)),
                Box::new(tree.root.clone()),
            )),
            Box::new(Node::Const(1.0)),
        ));
        let c = decoder.decode(&scaled);
        assert_eq!(a.assignment, c.assignment, "tree: {tree}");
    }
}

#[test]
fn non_failed_decodes_are_feasible() {
    let cfg = GpConfig::default();
    let mut rng = stream(9, StreamId::Test);
    for seed in 0..6 {
        let inst = generate_instance(&GeneratorParams::with_positions(8), seed).unwrap();
        let decoder = Decoder::new(&inst).unwrap();
        let trees = init_population(30, &cfg, &mut rng).unwrap();
        for tree in &trees {
            let out = decoder.decode(tree);
            let violations = check_feasible(&inst, &out.assignment).unwrap();
            if !out.failed {
                assert!(violations.is_empty(), "tree {tree}: {violations:?}");
            } else {
                assert!(!violations.is_empty() || !out.complete);
            }
        }
    }
}

/// Naive reference decode: single-candidate evaluation, no batching, no
/// caching shortcuts. Must reproduce the production decode exactly.
fn reference_decode(decoder: &Decoder<'_>, tree: &RuleTree) -> Assignment {
    let inst = decoder.instance();
    let mut ctx = DecodeContext::new(decoder);
    let mut remaining: Vec<usize> = (0..inst.num_candidates()).collect();
    let mut seats = Vec::new();
    let mut open = inst.num_positions();
    while open > 0 && !remaining.is_empty() {
        // Highest priority, ties to the lowest id.
        let &best = remaining
            .iter()
            .max_by(|&&a, &&b| {
                ctx.eval_tree(tree, a)
                    .partial_cmp(&ctx.eval_tree(tree, b))
                    .unwrap()
                    .then(b.cmp(&a))
            })
            .unwrap();
        match ctx.choose_position(best) {
            Some(p) => {
                ctx.seat(best, p);
                seats.push((best, p));
                open -= 1;
            }
            None => ctx.drop_candidate(best),
        }
        remaining.retain(|&c| {
            ctx.remaining_candidates().iter().any(|&r| r as usize == c)
        });
    }
    Assignment::from_pairs(seats)
}

#[test]
fn batched_and_naive_decodes_agree() {
    let inst = generate_instance(&GeneratorParams::with_positions(10), 17).unwrap();
    let decoder = Decoder::new(&inst).unwrap();
    let cfg = GpConfig::default();
    let trees = init_population(40, &cfg, &mut stream(14, StreamId::Test)).unwrap();
    for tree in &trees {
        let fast = decoder.decode(tree);
        let naive = reference_decode(&decoder, tree);
        assert_eq!(fast.assignment, naive, "tree {tree}");
    }
}

#[test]
fn decoded_te_matches_evaluator_on_worked_instance() {
    let inst = instance_with_scores(
        &[&[0], &[0]],
        &[&[0]],
        &[0],
        &[(0, 1)],
        &[&[0.3], &[0.6]],
    );
    let decoder = Decoder::new(&inst).unwrap();
    let out = decoder.decode(&rule("SC"));
    // Tie on SC; candidate 0 wins, seats at the only position.
    assert_eq!(out.assignment.pairs(), &[(0, 0)]);
    let eval = total_efficiency(&inst, decoder.match_matrix(), &out.assignment).unwrap();
    assert!(eval.feasible);
    assert!((eval.total_efficiency - 0.3 * 2.0).abs() < 1e-9);
}
