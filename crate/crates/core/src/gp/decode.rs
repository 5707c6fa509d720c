//! Turning a rule tree into a team plan.
//!
//! The decode loop scores every remaining candidate with the rule, seats
//! the winner at the open position with the best match score among those
//! whose requirements the winner meets, updates the running team state and
//! repeats. Candidates that fit no open position are dropped from the
//! pool. The loop ends when every position is filled or the pool is empty.
//!
//! [`Decoder`] precomputes everything that depends only on the instance
//! (match matrix, eligibility, static features, per-candidate position
//! orderings); [`DecodeContext`] carries the evolving team state. Scoring
//! runs batched over the candidate pool to keep the inner loop tight.

use alloc::vec;
use alloc::vec::Vec;
use core::cell::Cell;

use crate::evaluator::Assignment;
use crate::fuzzy::{self, FuzzyError, MatchMatrix};
use crate::gp::tree::{Node, RuleTree, Terminal};
use crate::problem::Instance;

/// Result of decoding one rule.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodeOutcome {
    pub assignment: Assignment,
    /// Every position got filled.
    pub complete: bool,
    /// The plan is incomplete, or misses a team-skill headcount or the
    /// full skill coverage; failed plans score zero through the evaluator.
    pub failed: bool,
}

/// Instance-level caches shared by every decode of the same instance.
pub struct Decoder<'i> {
    inst: &'i Instance,
    mm: MatchMatrix,
    /// `c * positions + j`: candidate c holds every skill position j needs.
    eligible: Vec<bool>,
    sc: Vec<f64>,
    scn: Vec<f64>,
    ans: f64,
    has_team_skill: Vec<bool>,
    /// Per candidate: indices into `team_skills` they hold.
    cand_team_idx: Vec<Vec<u16>>,
    demand: Vec<u32>,
    initial_supply: Vec<u32>,
    /// Per candidate: positions sorted by match score descending, id
    /// ascending; scanned through a moving cursor as positions close.
    pos_by_ez: Vec<u16>,
    wmax: Vec<f64>,
}

impl<'i> Decoder<'i> {
    pub fn new(inst: &'i Instance) -> Result<Self, FuzzyError> {
        let mm = fuzzy::match_matrix(inst)?;
        let nc = inst.num_candidates();
        let np = inst.num_positions();
        let nt = inst.team_skills.len();

        let mut eligible = vec![false; nc * np];
        for c in 0..nc {
            for j in 0..np {
                eligible[c * np + j] = inst.qualifies(c, j);
            }
        }

        let sc: Vec<f64> = inst.candidates.iter().map(|c| c.skills.len() as f64).collect();
        let cand_team_idx: Vec<Vec<u16>> = inst
            .candidates
            .iter()
            .map(|c| {
                inst.team_skills
                    .iter()
                    .enumerate()
                    .filter(|(_, s)| c.skills.binary_search(s).is_ok())
                    .map(|(k, _)| k as u16)
                    .collect()
            })
            .collect();
        let scn: Vec<f64> = cand_team_idx.iter().map(|v| v.len() as f64).collect();
        let has_team_skill: Vec<bool> = cand_team_idx.iter().map(|v| !v.is_empty()).collect();
        let ans = sc.iter().sum::<f64>() / nc as f64;

        let demand: Vec<u32> = inst
            .team_skills
            .iter()
            .map(|s| inst.demand.get(s).copied().unwrap_or(0) as u32)
            .collect();
        let mut initial_supply = vec![0u32; nt];
        for idx in &cand_team_idx {
            for &k in idx {
                initial_supply[k as usize] += 1;
            }
        }

        let mut pos_by_ez = Vec::with_capacity(nc * np);
        let mut order: Vec<u16> = (0..np as u16).collect();
        for c in 0..nc {
            let row = mm.row(c);
            order.sort_unstable_by(|&a, &b| {
                row[b as usize]
                    .partial_cmp(&row[a as usize])
                    .expect("match scores are finite")
                    .then(a.cmp(&b))
            });
            pos_by_ez.extend_from_slice(&order);
        }

        let wmax = inst
            .positions
            .iter()
            .map(|p| p.weights.as_slice().iter().fold(0.0f64, |m, &w| m.max(w)))
            .collect();

        Ok(Self {
            inst,
            mm,
            eligible,
            sc,
            scn,
            ans,
            has_team_skill,
            cand_team_idx,
            demand,
            initial_supply,
            pos_by_ez,
            wmax,
        })
    }

    pub fn instance(&self) -> &'i Instance {
        self.inst
    }

    pub fn match_matrix(&self) -> &MatchMatrix {
        &self.mm
    }

    pub fn is_eligible(&self, candidate: usize, position: usize) -> bool {
        self.eligible[candidate * self.inst.num_positions() + position]
    }

    /// Decodes `tree` into a plan.
    pub fn decode(&self, tree: &RuleTree) -> DecodeOutcome {
        self.run(tree, false).0
    }

    /// Decodes `tree`, also recording at every seating the seated
    /// candidate's rank among the remaining pool under the reference
    /// ordering (best open match score, descending).
    pub fn decode_traced(&self, tree: &RuleTree) -> (DecodeOutcome, Vec<usize>) {
        self.run(tree, true)
    }

    fn run(&self, tree: &RuleTree, traced: bool) -> (DecodeOutcome, Vec<usize>) {
        let mut ctx = DecodeContext::new(self);
        let uses_wec = tree.root.contains_terminal(Terminal::Wec);
        let is_static = !tree.root.contains_dynamic_terminal();
        let mut ranks = Vec::new();

        let mut priorities: Vec<f64> = Vec::new();
        let mut scratch = Scratch::default();
        // Rules without team-state features score each candidate once.
        let mut static_cache: Vec<f64> = Vec::new();

        'decode: while ctx.open_count > 0 && !ctx.active.is_empty() {
            loop {
                let best_k = if is_static {
                    if static_cache.is_empty() {
                        ctx.score_batch(&tree.root, uses_wec, &mut priorities, &mut scratch);
                        static_cache = vec![0.0; self.inst.num_candidates()];
                        for (k, &c) in ctx.active.iter().enumerate() {
                            static_cache[c as usize] = priorities[k];
                        }
                    } else {
                        priorities.clear();
                        priorities.extend(ctx.active.iter().map(|&c| static_cache[c as usize]));
                    }
                    argmax_lowest_id(&priorities, &ctx.active)
                } else {
                    ctx.score_batch(&tree.root, uses_wec, &mut priorities, &mut scratch);
                    argmax_lowest_id(&priorities, &ctx.active)
                };
                let candidate = ctx.active[best_k] as usize;
                match ctx.choose_position(candidate) {
                    Some(position) => {
                        if traced {
                            ranks.push(ctx.reference_rank_of(candidate));
                        }
                        ctx.seat_at(best_k, position);
                        break;
                    }
                    None => {
                        ctx.drop_at(best_k);
                        if ctx.active.is_empty() {
                            break 'decode;
                        }
                    }
                }
            }
        }

        let complete = ctx.open_count == 0;
        let demands_met = ctx
            .coverage
            .iter()
            .zip(self.demand.iter())
            .all(|(&have, &need)| have >= need.max(1));
        let outcome = DecodeOutcome {
            assignment: Assignment::from_pairs(ctx.seats),
            complete,
            failed: !complete || !demands_met,
        };
        (outcome, ranks)
    }
}

fn argmax_lowest_id(priorities: &[f64], active: &[u32]) -> usize {
    let mut best = 0;
    for k in 1..priorities.len() {
        let better = priorities[k] > priorities[best]
            || (priorities[k] == priorities[best] && active[k] < active[best]);
        if better {
            best = k;
        }
    }
    best
}

/// The evolving team state during one decode.
pub struct DecodeContext<'d, 'i> {
    dec: &'d Decoder<'i>,
    /// Candidate ids still in the pool (unordered).
    active: Vec<u32>,
    in_pool: Vec<bool>,
    open: Vec<bool>,
    open_count: usize,
    /// Remaining pool members holding at least one team skill.
    ncp: usize,
    /// Seated members per team skill.
    coverage: Vec<u32>,
    /// Remaining pool members per team skill.
    supply: Vec<u32>,
    /// Per candidate: summed willingness towards the seated members.
    scw: Vec<f64>,
    /// Summed match scores of the seats made so far.
    smp: f64,
    /// Per candidate: last refreshed wec value (only kept current when the
    /// rule actually reads it).
    wec: Vec<f64>,
    /// Per candidate: cursor into the match-ordered position list.
    ez_cursor: Vec<Cell<u32>>,
    seats: Vec<(usize, usize)>,
    nonfinite_clamps: Cell<u64>,
}

impl<'d, 'i> DecodeContext<'d, 'i> {
    pub fn new(dec: &'d Decoder<'i>) -> Self {
        let nc = dec.inst.num_candidates();
        let np = dec.inst.num_positions();
        Self {
            dec,
            active: (0..nc as u32).collect(),
            in_pool: vec![true; nc],
            open: vec![true; np],
            open_count: np,
            ncp: dec.has_team_skill.iter().filter(|&&b| b).count(),
            coverage: vec![0; dec.demand.len()],
            supply: dec.initial_supply.clone(),
            scw: vec![0.0; nc],
            smp: 0.0,
            wec: vec![0.0; nc],
            ez_cursor: vec![Cell::new(0); nc],
            seats: Vec::with_capacity(np),
            nonfinite_clamps: Cell::new(0),
        }
    }

    pub fn decoder(&self) -> &'d Decoder<'i> {
        self.dec
    }

    pub fn open_positions(&self) -> usize {
        self.open_count
    }

    pub fn remaining_candidates(&self) -> &[u32] {
        &self.active
    }

    pub fn seats(&self) -> &[(usize, usize)] {
        &self.seats
    }

    /// How many evaluation intermediates collapsed to zero so far.
    pub fn nonfinite_clamps(&self) -> u64 {
        self.nonfinite_clamps.get()
    }

    /// Minimum remaining supply over team skills still short of their
    /// headcount; 0 when none is short.
    fn ncr(&self) -> f64 {
        let mut min: Option<u32> = None;
        for k in 0..self.coverage.len() {
            if self.coverage[k] < self.dec.demand[k] {
                let s = self.supply[k];
                min = Some(min.map_or(s, |m| m.min(s)));
            }
        }
        min.map_or(0.0, f64::from)
    }

    /// The candidate's best open position by match score, through the
    /// moving cursor (positions never reopen).
    fn best_open_position(&self, candidate: usize) -> Option<usize> {
        let np = self.dec.inst.num_positions();
        let row = &self.dec.pos_by_ez[candidate * np..(candidate + 1) * np];
        let cursor = &self.ez_cursor[candidate];
        let mut at = cursor.get() as usize;
        while at < np && !self.open[row[at] as usize] {
            at += 1;
        }
        cursor.set(at as u32);
        (at < np).then(|| row[at] as usize)
    }

    /// Reference ordering key: best open match score (or negative
    /// infinity when no position is open to the candidate).
    fn reference_key(&self, candidate: usize) -> f64 {
        self.best_open_position(candidate)
            .map_or(f64::NEG_INFINITY, |j| self.dec.mm.ez(candidate, j))
    }

    /// Rank (1-based) of `candidate` among the remaining pool under the
    /// reference ordering; ties rank the lower id first.
    pub fn reference_rank_of(&self, candidate: usize) -> usize {
        let key = self.reference_key(candidate);
        let mut rank = 1;
        for &c2 in &self.active {
            let c2 = c2 as usize;
            if c2 == candidate {
                continue;
            }
            let k2 = self.reference_key(c2);
            if k2 > key || (k2 == key && c2 < candidate) {
                rank += 1;
            }
        }
        rank
    }

    /// Open position with the best match score among those the candidate
    /// qualifies for; ties pick the lowest position id.
    pub fn choose_position(&self, candidate: usize) -> Option<usize> {
        let np = self.dec.inst.num_positions();
        let mut best: Option<(f64, usize)> = None;
        for j in 0..np {
            if self.open[j] && self.dec.eligible[candidate * np + j] {
                let ez = self.dec.mm.ez(candidate, j);
                if best.map_or(true, |(bez, _)| ez > bez) {
                    best = Some((ez, j));
                }
            }
        }
        best.map(|(_, j)| j)
    }

    fn pool_index_of(&self, candidate: usize) -> usize {
        self.active
            .iter()
            .position(|&c| c as usize == candidate)
            .expect("candidate still in the pool")
    }

    /// Seats `candidate` at `position` and updates the team state.
    pub fn seat(&mut self, candidate: usize, position: usize) {
        let k = self.pool_index_of(candidate);
        self.seat_at(k, position);
    }

    fn seat_at(&mut self, pool_index: usize, position: usize) {
        let candidate = self.active[pool_index] as usize;
        debug_assert!(self.open[position]);
        self.remove_at(pool_index);
        self.open[position] = false;
        self.open_count -= 1;
        self.smp += self.dec.mm.ez(candidate, position);
        for &k in &self.dec.cand_team_idx[candidate] {
            self.coverage[k as usize] += 1;
        }
        for &c2 in &self.active {
            self.scw[c2 as usize] += f64::from(self.dec.inst.relation(c2 as usize, candidate));
        }
        self.seats.push((candidate, position));
    }

    /// Drops `candidate` from the pool without seating them.
    pub fn drop_candidate(&mut self, candidate: usize) {
        let k = self.pool_index_of(candidate);
        self.drop_at(k);
    }

    fn drop_at(&mut self, pool_index: usize) {
        self.remove_at(pool_index);
    }

    fn remove_at(&mut self, pool_index: usize) {
        let candidate = self.active.swap_remove(pool_index) as usize;
        self.in_pool[candidate] = false;
        if self.dec.has_team_skill[candidate] {
            self.ncp -= 1;
        }
        for &k in &self.dec.cand_team_idx[candidate] {
            self.supply[k as usize] -= 1;
        }
    }

    /// One feature value for one pool candidate.
    pub fn eval_terminal(&self, t: Terminal, candidate: usize) -> f64 {
        match t {
            Terminal::Npt => self.dec.inst.num_positions() as f64,
            Terminal::Rnp => self.open_count as f64,
            Terminal::Sc => self.dec.sc[candidate],
            Terminal::Scn => self.dec.scn[candidate],
            Terminal::Ans => self.dec.ans,
            Terminal::Nsr => self.dec.inst.team_skills.len() as f64,
            Terminal::Ncp => self.ncp as f64,
            Terminal::Ncr => self.ncr(),
            Terminal::Scw => self.scw[candidate],
            Terminal::Smp => self.smp,
            Terminal::Wec => self
                .best_open_position(candidate)
                .map_or(0.0, |j| self.dec.wmax[j]),
        }
    }

    /// The rule's priority value for one pool candidate.
    pub fn eval_tree(&self, tree: &RuleTree, candidate: usize) -> f64 {
        self.eval_node(&tree.root, candidate)
    }

    fn eval_node(&self, node: &Node, candidate: usize) -> f64 {
        match node {
            Node::Term(t) => self.eval_terminal(*t, candidate),
            Node::Const(c) => *c,
            Node::Unary(op, a) => {
                let (v, clamped) = op.apply_counted(self.eval_node(a, candidate));
                if clamped {
                    self.nonfinite_clamps.set(self.nonfinite_clamps.get() + 1);
                }
                v
            }
            Node::Binary(op, a, b) => {
                let lhs = self.eval_node(a, candidate);
                let rhs = self.eval_node(b, candidate);
                let (v, clamped) = op.apply_counted(lhs, rhs);
                if clamped {
                    self.nonfinite_clamps.set(self.nonfinite_clamps.get() + 1);
                }
                v
            }
        }
    }

    /// Batch-scores the pool with the rule into `out` (aligned with
    /// `remaining_candidates()`).
    fn score_batch(
        &mut self,
        node: &Node,
        uses_wec: bool,
        out: &mut Vec<f64>,
        scratch: &mut Scratch,
    ) {
        if uses_wec {
            for k in 0..self.active.len() {
                let c = self.active[k] as usize;
                self.wec[c] = self
                    .best_open_position(c)
                    .map_or(0.0, |j| self.dec.wmax[j]);
            }
        }
        let shared = SharedScalars {
            npt: self.dec.inst.num_positions() as f64,
            rnp: self.open_count as f64,
            ans: self.dec.ans,
            nsr: self.dec.inst.team_skills.len() as f64,
            ncp: self.ncp as f64,
            ncr: self.ncr(),
            smp: self.smp,
        };
        let cols = Columns {
            active: &self.active,
            shared,
            sc: &self.dec.sc,
            scn: &self.dec.scn,
            scw: &self.scw,
            wec: &self.wec,
        };
        let mut clamps = 0;
        eval_batch(node, &cols, out, scratch, &mut clamps);
        self.nonfinite_clamps
            .set(self.nonfinite_clamps.get() + clamps);
    }
}

#[derive(Clone, Copy)]
struct SharedScalars {
    npt: f64,
    rnp: f64,
    ans: f64,
    nsr: f64,
    ncp: f64,
    ncr: f64,
    smp: f64,
}

struct Columns<'a> {
    active: &'a [u32],
    shared: SharedScalars,
    sc: &'a [f64],
    scn: &'a [f64],
    scw: &'a [f64],
    wec: &'a [f64],
}

#[derive(Default)]
struct Scratch {
    bufs: Vec<Vec<f64>>,
}

impl Scratch {
    fn acquire(&mut self) -> Vec<f64> {
        self.bufs.pop().unwrap_or_default()
    }

    fn release(&mut self, buf: Vec<f64>) {
        self.bufs.push(buf);
    }
}

/// Evaluates `node` for every active candidate at once. Elementwise
/// semantics are identical to [`DecodeContext::eval_tree`]: same operator
/// definitions, same overflow collapse.
fn eval_batch(
    node: &Node,
    cols: &Columns<'_>,
    out: &mut Vec<f64>,
    scratch: &mut Scratch,
    clamps: &mut u64,
) {
    let n = cols.active.len();
    out.clear();
    match node {
        Node::Const(c) => out.resize(n, *c),
        Node::Term(t) => {
            let s = cols.shared;
            match t {
                Terminal::Npt => out.resize(n, s.npt),
                Terminal::Rnp => out.resize(n, s.rnp),
                Terminal::Ans => out.resize(n, s.ans),
                Terminal::Nsr => out.resize(n, s.nsr),
                Terminal::Ncp => out.resize(n, s.ncp),
                Terminal::Ncr => out.resize(n, s.ncr),
                Terminal::Smp => out.resize(n, s.smp),
                Terminal::Sc => out.extend(cols.active.iter().map(|&c| cols.sc[c as usize])),
                Terminal::Scn => out.extend(cols.active.iter().map(|&c| cols.scn[c as usize])),
                Terminal::Scw => out.extend(cols.active.iter().map(|&c| cols.scw[c as usize])),
                Terminal::Wec => out.extend(cols.active.iter().map(|&c| cols.wec[c as usize])),
            }
        }
        Node::Unary(op, a) => {
            eval_batch(a, cols, out, scratch, clamps);
            for v in out.iter_mut() {
                let (r, clamped) = op.apply_counted(*v);
                *clamps += u64::from(clamped);
                *v = r;
            }
        }
        Node::Binary(op, a, b) => {
            eval_batch(a, cols, out, scratch, clamps);
            let mut rhs = scratch.acquire();
            eval_batch(b, cols, &mut rhs, scratch, clamps);
            for (x, &y) in out.iter_mut().zip(rhs.iter()) {
                let (r, clamped) = op.apply_counted(*x, y);
                *clamps += u64::from(clamped);
                *x = r;
            }
            scratch.release(rhs);
        }
    }
}
