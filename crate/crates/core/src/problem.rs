//! Problem instances: data model, seeded generator and structural validation.
//!
//! An instance holds a candidate pool, a skill universe, the subset of
//! skills the team needs (with per-skill headcounts), the open positions
//! with their required skills and competency weights, a symmetric pairwise
//! communication-willingness matrix, and the fuzzy competency evaluations.
//!
//! The generator plants a hidden witness team, drawing each position's
//! required skills from its witness member and capping skill headcounts by
//! the witness coverage, so every generated instance has at least one
//! feasible plan. Headcounts are topped up to sum exactly to the number of
//! positions, which pins the communication-efficiency normalizer to the
//! team size and keeps the factor inside `[1, 2]`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::fuzzy::{CompetencyWeights, Ifn};
use crate::rng::{stream, StreamId};

/// A pool member: index and the (sorted) set of skills they hold.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Candidate {
    pub id: usize,
    pub skills: Vec<usize>,
}

/// An open position: required skills plus competency-dimension weights.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Position {
    pub id: usize,
    pub required_skills: Vec<usize>,
    pub weights: CompetencyWeights,
}

/// A full problem instance. Immutable once built; freely shared.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Instance {
    /// Label in `positions-id` form, e.g. `"25-3"`.
    pub name: String,
    pub seed: u64,
    /// Skill identifiers; always `0..skills.len()`.
    pub skills: Vec<usize>,
    /// Skills the team as a whole must cover (sorted subset of `skills`).
    pub team_skills: Vec<usize>,
    /// Required headcount per team skill. Serialized as sorted
    /// `[skill, count]` pairs.
    #[cfg_attr(feature = "serde", serde(with = "demand_pairs"))]
    pub demand: BTreeMap<usize, usize>,
    pub candidates: Vec<Candidate>,
    pub positions: Vec<Position>,
    /// Pairwise communication willingness in `{-1, 0, 1}`, row-major
    /// `|C| x |C|`, symmetric with unit diagonal.
    pub relations: Vec<Vec<i8>>,
    /// `evaluations[i][j]` = per-dimension fuzzy scores of candidate `i`
    /// on position `j`.
    pub evaluations: Vec<Vec<Vec<Ifn>>>,
}

#[cfg(feature = "serde")]
mod demand_pairs {
    use alloc::collections::BTreeMap;
    use alloc::vec::Vec;

    pub fn serialize<S: serde::Serializer>(
        demand: &BTreeMap<usize, usize>,
        serializer: S,
    ) -> Result<S::Ok, S::Error> {
        serde::Serialize::serialize(&demand.iter().collect::<Vec<_>>(), serializer)
    }

    pub fn deserialize<'de, D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> Result<BTreeMap<usize, usize>, D::Error> {
        let pairs: Vec<(usize, usize)> = serde::Deserialize::deserialize(deserializer)?;
        Ok(pairs.into_iter().collect())
    }
}

impl Instance {
    pub fn num_candidates(&self) -> usize {
        self.candidates.len()
    }

    pub fn num_positions(&self) -> usize {
        self.positions.len()
    }

    /// Sum of required headcounts; the communication normalizer.
    pub fn demand_total(&self) -> usize {
        self.demand.values().sum()
    }

    pub fn relation(&self, a: usize, b: usize) -> i8 {
        self.relations[a][b]
    }

    /// True when candidate `i` holds every skill position `j` requires.
    pub fn qualifies(&self, i: usize, j: usize) -> bool {
        let skills = &self.candidates[i].skills;
        self.positions[j]
            .required_skills
            .iter()
            .all(|s| skills.binary_search(s).is_ok())
    }
}

/// Knobs for the random instance generator.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GeneratorParams {
    pub num_positions: usize,
    /// Pool size over position count; must exceed 1.
    pub candidate_ratio: f64,
    /// Team-skill count over position count, in `(0, 1]`.
    pub sp_ratio: f64,
    /// Total skill universe size; 0 means twice the team-skill count.
    pub skill_pool: usize,
    /// Competency dimensions per position.
    pub dims: usize,
    /// Probabilities of willingness -1, 0, +1.
    pub relation_probs: [f64; 3],
    /// Cap on the non-team skills a candidate may hold on top of their
    /// team skills.
    pub max_skills_per_candidate: usize,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        Self {
            num_positions: 25,
            candidate_ratio: 2.0,
            sp_ratio: 0.4,
            skill_pool: 0,
            dims: 3,
            relation_probs: [0.2, 0.5, 0.3],
            max_skills_per_candidate: 3,
        }
    }
}

impl GeneratorParams {
    pub fn with_positions(num_positions: usize) -> Self {
        Self {
            num_positions,
            ..Self::default()
        }
    }

    fn check(&self) -> Result<(), GenerateError> {
        if self.num_positions == 0 {
            return Err(GenerateError::Invalid("num_positions must be positive"));
        }
        if !(self.candidate_ratio > 1.0) {
            return Err(GenerateError::Invalid("candidate_ratio must exceed 1"));
        }
        if !(self.sp_ratio > 0.0 && self.sp_ratio <= 1.0) {
            return Err(GenerateError::Invalid("sp_ratio must be in (0, 1]"));
        }
        if self.dims == 0 {
            return Err(GenerateError::Invalid("dims must be positive"));
        }
        if self.max_skills_per_candidate == 0 {
            return Err(GenerateError::Invalid("max_skills_per_candidate must be positive"));
        }
        let psum: f64 = self.relation_probs.iter().sum();
        if self.relation_probs.iter().any(|&p| p < 0.0) || (psum - 1.0).abs() > 1e-9 {
            return Err(GenerateError::Invalid("relation_probs must be a distribution"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GenerateError {
    Invalid(&'static str),
}

impl fmt::Display for GenerateError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GenerateError::Invalid(msg) => write!(f, "invalid generator parameters: {msg}"),
        }
    }
}

impl core::error::Error for GenerateError {}

/// One structural defect found by [`validate_instance`].
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Violation {
    pub code: &'static str,
    pub message: String,
}

impl Violation {
    fn new(code: &'static str, message: String) -> Self {
        Self { code, message }
    }
}

/// Outcome of structural validation; empty iff the instance is well-formed.
#[derive(Debug, Clone, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            write!(f, "ok")
        } else {
            for v in &self.violations {
                writeln!(f, "{}: {}", v.code, v.message)?;
            }
            Ok(())
        }
    }
}

/// Checks every structural invariant and returns one entry per breach.
pub fn validate_instance(inst: &Instance) -> ValidationReport {
    let mut out = Vec::new();
    let nc = inst.candidates.len();
    let np = inst.positions.len();
    let ns = inst.skills.len();

    if inst.skills.iter().enumerate().any(|(k, &s)| k != s) {
        out.push(Violation::new(
            "skill-ids",
            format!("skills must be exactly 0..{ns}"),
        ));
    }
    if inst.team_skills.is_empty() {
        out.push(Violation::new("team-skills-empty", "team needs at least one skill".into()));
    }
    if !is_sorted_unique(&inst.team_skills) || inst.team_skills.iter().any(|&s| s >= ns) {
        out.push(Violation::new(
            "team-skills-subset",
            "team skills must be a sorted subset of the skill universe".into(),
        ));
    }
    if nc <= np {
        out.push(Violation::new(
            "pool-too-small",
            format!("{nc} candidates for {np} positions; the pool must be strictly larger"),
        ));
    }

    for c in &inst.candidates {
        if c.skills.is_empty() {
            out.push(Violation::new(
                "candidate-no-skills",
                format!("candidate {} has no skills", c.id),
            ));
        }
        if !is_sorted_unique(&c.skills) || c.skills.iter().any(|&s| s >= ns) {
            out.push(Violation::new(
                "candidate-skill-ids",
                format!("candidate {} has out-of-range or unsorted skills", c.id),
            ));
        }
        if !c.skills.iter().any(|s| inst.team_skills.binary_search(s).is_ok()) {
            out.push(Violation::new(
                "candidate-without-team-skill",
                format!("candidate {} holds no team skill, so could never be selected", c.id),
            ));
        }
    }
    if inst.candidates.iter().enumerate().any(|(k, c)| c.id != k) {
        out.push(Violation::new("candidate-ids", "candidate ids must be 0..|C| in order".into()));
    }
    if inst.positions.iter().enumerate().any(|(k, p)| p.id != k) {
        out.push(Violation::new("position-ids", "position ids must be 0..|POS| in order".into()));
    }

    for p in &inst.positions {
        if p.required_skills.is_empty() {
            out.push(Violation::new(
                "position-no-skills",
                format!("position {} requires no skills", p.id),
            ));
        }
        if !is_sorted_unique(&p.required_skills) || p.required_skills.iter().any(|&s| s >= ns) {
            out.push(Violation::new(
                "position-skill-ids",
                format!("position {} has out-of-range or unsorted skills", p.id),
            ));
        }
    }
    let dims: Option<usize> = inst.positions.first().map(|p| p.weights.len());
    if let Some(l) = dims {
        if inst.positions.iter().any(|p| p.weights.len() != l) {
            out.push(Violation::new(
                "weights-ragged",
                "all positions must share one competency dimension count".into(),
            ));
        }
    }

    let mut demand_total = 0usize;
    for (&s, &n) in &inst.demand {
        if inst.team_skills.binary_search(&s).is_err() {
            out.push(Violation::new(
                "demand-unknown-skill",
                format!("headcount given for skill {s} which is not a team skill"),
            ));
        }
        if n == 0 {
            out.push(Violation::new("demand-zero", format!("skill {s} has zero headcount")));
        }
        demand_total += n;
    }
    for &s in &inst.team_skills {
        if !inst.demand.contains_key(&s) {
            out.push(Violation::new(
                "demand-missing-skill",
                format!("team skill {s} has no headcount"),
            ));
        }
    }
    if demand_total > np {
        out.push(Violation::new(
            "demand-exceeds-positions",
            format!("headcounts sum to {demand_total} but only {np} positions exist"),
        ));
    }

    if inst.relations.len() != nc || inst.relations.iter().any(|r| r.len() != nc) {
        out.push(Violation::new(
            "relations-shape",
            format!("relations must be {nc} x {nc}"),
        ));
    } else {
        'rel: for i in 0..nc {
            for j in 0..nc {
                let r = inst.relations[i][j];
                if !(-1..=1).contains(&r) {
                    out.push(Violation::new(
                        "relations-range",
                        format!("relations[{i}][{j}] = {r}; allowed values are -1, 0, 1"),
                    ));
                    break 'rel;
                }
                if inst.relations[j][i] != r {
                    out.push(Violation::new(
                        "relations-not-symmetric",
                        format!("relations[{i}][{j}] != relations[{j}][{i}]"),
                    ));
                    break 'rel;
                }
            }
            if inst.relations[i][i] != 1 {
                out.push(Violation::new(
                    "relations-diagonal",
                    format!("relations[{i}][{i}] must be 1"),
                ));
                break 'rel;
            }
        }
    }

    if inst.evaluations.len() != nc {
        out.push(Violation::new(
            "evaluations-shape",
            format!("evaluations must have one row per candidate ({nc})"),
        ));
    } else {
        'eval: for (i, row) in inst.evaluations.iter().enumerate() {
            if row.len() != np {
                out.push(Violation::new(
                    "evaluations-shape",
                    format!("evaluations[{i}] must have one entry per position ({np})"),
                ));
                break;
            }
            for (j, cell) in row.iter().enumerate() {
                if Some(cell.len()) != dims {
                    out.push(Violation::new(
                        "evaluations-dims",
                        format!("evaluations[{i}][{j}] length differs from the weight dimension"),
                    ));
                    break 'eval;
                }
            }
        }
    }

    ValidationReport { violations: out }
}

fn is_sorted_unique(xs: &[usize]) -> bool {
    xs.windows(2).all(|w| w[0] < w[1])
}

/// Generates a feasible-by-construction instance, deterministic in
/// `(params, seed)`. The label is `"{positions}-{seed}"`.
pub fn generate_instance(params: &GeneratorParams, seed: u64) -> Result<Instance, GenerateError> {
    generate_with_witness(params, seed).map(|(inst, _)| inst)
}

/// As [`generate_instance`], additionally returning the planted witness
/// plan as (candidate, position) pairs.
pub(crate) fn generate_with_witness(
    params: &GeneratorParams,
    seed: u64,
) -> Result<(Instance, Vec<(usize, usize)>), GenerateError> {
    params.check()?;
    let mut rng = stream(seed, StreamId::Instance);

    let np = params.num_positions;
    let nc = ((np as f64 * params.candidate_ratio) as usize).max(np + 1);
    let nt = (libm::round(np as f64 * params.sp_ratio) as usize).clamp(1, np);
    let ns = if params.skill_pool == 0 {
        (2 * nt).max(2)
    } else {
        params.skill_pool.max(nt)
    };
    let max_sk = params.max_skills_per_candidate.min(ns);

    let skills: Vec<usize> = (0..ns).collect();
    let mut team_skills: Vec<usize> = {
        let mut pool = skills.clone();
        pool.shuffle(&mut rng);
        pool.truncate(nt);
        pool
    };
    team_skills.sort_unstable();

    // Witness team: one member per position, seated in position order.
    let witness: Vec<usize> = {
        let mut ids: Vec<usize> = (0..nc).collect();
        ids.shuffle(&mut rng);
        ids.truncate(np);
        ids
    };

    // Skill sets. Each candidate holds a band of the team skills (a
    // quarter to a half of them, at least one) plus a few others. Teams
    // drawn from such a pool reach the per-skill headcounts without the
    // selection having to plan for them.
    let team_lo = (nt / 4).max(1);
    let team_hi = (nt / 2).max(team_lo);
    let mut cand_skills: Vec<Vec<usize>> = Vec::with_capacity(nc);
    let mut team_pool: Vec<usize> = team_skills.clone();
    for _ in 0..nc {
        let take = rng.gen_range(team_lo..=team_hi);
        team_pool.shuffle(&mut rng);
        let mut set: Vec<usize> = team_pool[..take].to_vec();
        let extras = rng.gen_range(0..=max_sk.min(ns.saturating_sub(nt)));
        for _ in 0..extras {
            let s = rng.gen_range(0..ns);
            if !set.contains(&s) {
                set.push(s);
            }
        }
        set.sort_unstable();
        cand_skills.push(set);
    }

    // The witness team must jointly cover every team skill.
    for &s in &team_skills {
        if !witness.iter().any(|&c| cand_skills[c].binary_search(&s).is_ok()) {
            let c = witness[rng.gen_range(0..np)];
            let set = &mut cand_skills[c];
            if let Err(at) = set.binary_search(&s) {
                set.insert(at, s);
            }
        }
    }

    // Position requirements drawn from the witness member's team skills,
    // so the witness qualifies and broad parts of the pool stay eligible.
    let mut positions = Vec::with_capacity(np);
    for (j, &w) in witness.iter().enumerate() {
        let own: Vec<usize> = cand_skills[w]
            .iter()
            .copied()
            .filter(|s| team_skills.binary_search(s).is_ok())
            .collect();
        let take = rng.gen_range(1..=own.len().min(2));
        let mut req = own;
        req.shuffle(&mut rng);
        req.truncate(take);
        req.sort_unstable();

        let mut raw: Vec<f64> = (0..params.dims).map(|_| rng.gen_range(0.05..1.0)).collect();
        let sum: f64 = raw.iter().sum();
        for x in raw.iter_mut() {
            *x /= sum;
        }
        positions.push(Position {
            id: j,
            required_skills: req,
            weights: CompetencyWeights::new(raw).expect("normalized weights"),
        });
    }

    // Headcounts: within witness coverage per skill, summing to the
    // position count so the communication normalizer equals team size.
    let coverage: Vec<usize> = team_skills
        .iter()
        .map(|&s| {
            witness
                .iter()
                .filter(|&&c| cand_skills[c].binary_search(&s).is_ok())
                .count()
        })
        .collect();
    let mut counts: Vec<usize> = vec![1; nt];
    let mut remaining = np - nt;
    while remaining > 0 {
        let open: Vec<usize> = (0..nt).filter(|&k| counts[k] < coverage[k]).collect();
        let k = open[rng.gen_range(0..open.len())];
        counts[k] += 1;
        remaining -= 1;
    }
    let demand: BTreeMap<usize, usize> =
        team_skills.iter().copied().zip(counts.iter().copied()).collect();

    // Symmetric willingness matrix with unit diagonal. The pool splits
    // into two balanced cohesion groups; pairs inside a group lean
    // cooperative and pairs across groups lean reluctant, while the
    // pooled attitude mix stays at `relation_probs`. Each group is about
    // team-sized, so composition can move the communication factor
    // substantially and the willingness matrix is worth optimizing over.
    let group: Vec<usize> = {
        let mut ids: Vec<usize> = (0..nc).collect();
        ids.shuffle(&mut rng);
        let mut g = vec![0usize; nc];
        for &c in &ids[nc / 2..] {
            g[c] = 1;
        }
        g
    };
    let (in_group, across_group) = split_relation_probs(params.relation_probs);
    let mut relations = vec![vec![0i8; nc]; nc];
    for i in 0..nc {
        relations[i][i] = 1;
        for j in (i + 1)..nc {
            let [p_neg, p_zero, _] = if group[i] == group[j] {
                in_group
            } else {
                across_group
            };
            let u: f64 = rng.gen();
            let r = if u < p_neg {
                -1
            } else if u < p_neg + p_zero {
                0
            } else {
                1
            };
            relations[i][j] = r;
            relations[j][i] = r;
        }
    }

    // Fuzzy evaluations are ability-driven: each candidate carries one
    // latent pair per competency dimension, jittered a little per
    // position, so a candidate scores similarly across positions the way
    // real assessments do. The latent quality tracks how many team skills
    // the candidate holds (breadth reads as competence), with enough noise
    // that skill counts never fully determine the scores.
    let jitter = 0.05;
    let mut evaluations = Vec::with_capacity(nc);
    for skills in &cand_skills {
        let scn = skills
            .iter()
            .filter(|s| team_skills.binary_search(s).is_ok())
            .count() as f64;
        let quality = 0.15 + 0.55 * (scn / team_hi as f64).min(1.0)
            + rng.gen_range(-0.08..=0.08);
        let latent: Vec<(f64, f64)> = (0..params.dims)
            .map(|_| {
                let mu = (quality + rng.gen_range(-0.08..=0.08)).clamp(0.02, 0.98);
                let nu = (1.0 - mu) * rng.gen_range(0.3..=0.9);
                (mu, nu)
            })
            .collect();
        let mut row = Vec::with_capacity(np);
        for _ in 0..np {
            let cell = latent
                .iter()
                .map(|&(mu0, nu0)| {
                    let mu = (mu0 + rng.gen_range(-jitter..=jitter)).clamp(0.0, 1.0);
                    let nu = (nu0 + rng.gen_range(-jitter..=jitter)).clamp(0.0, 1.0 - mu);
                    Ifn::new(mu, nu).expect("generated pair is valid")
                })
                .collect();
            row.push(cell);
        }
        evaluations.push(row);
    }

    let candidates = cand_skills
        .into_iter()
        .enumerate()
        .map(|(id, skills)| Candidate { id, skills })
        .collect();

    let inst = Instance {
        name: format!("{np}-{seed}"),
        seed,
        skills,
        team_skills,
        demand,
        candidates,
        positions,
        relations,
        evaluations,
    };
    let plan = witness.into_iter().enumerate().map(|(j, c)| (c, j)).collect();
    Ok((inst, plan))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generation_is_deterministic() {
        let params = GeneratorParams::with_positions(25);
        let a = generate_instance(&params, 7).unwrap();
        let b = generate_instance(&params, 7).unwrap();
        assert_eq!(a, b);
        let c = generate_instance(&params, 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn pool_doubles_positions() {
        let inst = generate_instance(&GeneratorParams::with_positions(50), 1).unwrap();
        assert_eq!(inst.num_candidates(), 100);
        assert_eq!(inst.name, "50-1");
    }

    #[test]
    fn generated_instances_validate_clean() {
        for seed in 0..100 {
            let params = GeneratorParams::with_positions(3 + (seed as usize % 8));
            let inst = generate_instance(&params, seed).unwrap();
            let report = validate_instance(&inst);
            assert!(report.is_clean(), "seed {seed}: {report}");
            assert_eq!(inst.demand_total(), inst.num_positions());
        }
    }

    #[test]
    fn witness_is_feasible() {
        use crate::evaluator::{check_feasible, Assignment};
        for seed in 0..50 {
            let params = GeneratorParams::with_positions(2 + (seed as usize % 10));
            let (inst, plan) = generate_with_witness(&params, seed).unwrap();
            let asg = Assignment::from_pairs(plan);
            let violations = check_feasible(&inst, &asg).unwrap();
            assert!(violations.is_empty(), "seed {seed}: {violations:?}");
        }
    }

    #[test]
    fn invalid_params_rejected() {
        let mut p = GeneratorParams::with_positions(10);
        p.candidate_ratio = 1.0;
        assert!(generate_instance(&p, 1).is_err());
        let mut p = GeneratorParams::with_positions(10);
        p.sp_ratio = 0.0;
        assert!(generate_instance(&p, 1).is_err());
        let mut p = GeneratorParams::with_positions(10);
        p.relation_probs = [0.5, 0.5, 0.5];
        assert!(generate_instance(&p, 1).is_err());
    }

    #[test]
    fn validator_flags_constructed_defects() {
        let mut inst = generate_instance(&GeneratorParams::with_positions(4), 3).unwrap();
        // A candidate stripped of team skills.
        let non_team: Vec<usize> = inst
            .skills
            .iter()
            .copied()
            .filter(|s| inst.team_skills.binary_search(s).is_err())
            .take(1)
            .collect();
        inst.candidates[0].skills = non_team;
        let report = validate_instance(&inst);
        assert!(report.violations.iter().any(|v| v.code == "candidate-without-team-skill"));

        let mut inst = generate_instance(&GeneratorParams::with_positions(4), 3).unwrap();
        inst.relations[0][1] = 1;
        inst.relations[1][0] = -1;
        let report = validate_instance(&inst);
        assert!(report.violations.iter().any(|v| v.code == "relations-not-symmetric"));

        let mut inst = generate_instance(&GeneratorParams::with_positions(4), 3).unwrap();
        inst.relations[2][2] = 0;
        let report = validate_instance(&inst);
        assert!(report.violations.iter().any(|v| v.code == "relations-diagonal"));
    }
}
