//! KNN fitness estimation over rule phenotypes.
//!
//! A rule's phenotype is its decision vector: for each seating step of its
//! decode, the rank the seated candidate held among the remaining pool
//! under the reference ordering (best open match score, descending — the
//! same ordering the second construction heuristic uses). Rules that build
//! similar teams get nearby vectors, so the mean real fitness of the k
//! nearest previously evaluated rules is a cheap stand-in for a full
//! evaluation. The model is refreshed online from real evaluations of each
//! generation's best.

use alloc::vec::Vec;
use core::fmt;

use crate::gp::{DecodeContext, Decoder, RuleTree};

/// Phenotype fingerprint of a rule on one instance; one entry per
/// position, each in `[1, |C|]`.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DecisionVector {
    pub ranks: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SurrogateError {
    LengthMismatch { a: usize, b: usize },
    NotEnoughTrainingData { have: usize, need: usize },
}

impl fmt::Display for SurrogateError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SurrogateError::LengthMismatch { a, b } => {
                write!(f, "decision vectors of length {a} and {b} are not comparable")
            }
            SurrogateError::NotEnoughTrainingData { have, need } => {
                write!(f, "{have} training entries but {need} neighbours requested")
            }
        }
    }
}

impl core::error::Error for SurrogateError {}

/// Ranking of the remaining pool by best open match score, descending,
/// ties to the lower candidate id. Returns `(candidate, rank)` pairs in
/// rank order.
pub fn reference_rank(ctx: &DecodeContext<'_, '_>) -> Vec<(usize, usize)> {
    let mut ranked: Vec<usize> = ctx.remaining_candidates().iter().map(|&c| c as usize).collect();
    ranked.sort_unstable_by(|&a, &b| {
        let ka = ctx.reference_rank_of(a);
        let kb = ctx.reference_rank_of(b);
        ka.cmp(&kb)
    });
    ranked.into_iter().enumerate().map(|(i, c)| (c, i + 1)).collect()
}

/// Replays the rule's decode, recording at each seating the reference
/// rank of the candidate the rule picked. A decode that stalls before
/// filling every position is padded with the worst rank `|C|`, parking
/// failures far from working rules in phenotype space.
pub fn decision_vector(tree: &RuleTree, decoder: &Decoder<'_>) -> DecisionVector {
    let (_, mut ranks) = decoder.decode_traced(tree);
    let np = decoder.instance().num_positions();
    let worst = decoder.instance().num_candidates();
    while ranks.len() < np {
        ranks.push(worst);
    }
    DecisionVector { ranks }
}

/// Euclidean distance between two decision vectors.
pub fn phenotype_distance(a: &DecisionVector, b: &DecisionVector) -> Result<f64, SurrogateError> {
    if a.ranks.len() != b.ranks.len() {
        return Err(SurrogateError::LengthMismatch { a: a.ranks.len(), b: b.ranks.len() });
    }
    let sq: f64 = a
        .ranks
        .iter()
        .zip(b.ranks.iter())
        .map(|(&x, &y)| {
            let d = x as f64 - y as f64;
            d * d
        })
        .sum();
    Ok(libm::sqrt(sq))
}

/// A generation best waiting for its real evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct PendingBest {
    pub tree: RuleTree,
    pub vector: DecisionVector,
}

/// The KNN estimator: memorized (vector, real fitness) pairs plus the
/// queue of generation bests awaiting real evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateModel {
    training: Vec<(DecisionVector, f64)>,
    pending: Vec<PendingBest>,
    k: usize,
    /// Optional bound on the training set; oldest entries leave first.
    cap: Option<usize>,
}

impl SurrogateModel {
    pub fn new(k: usize) -> Self {
        Self {
            training: Vec::new(),
            pending: Vec::new(),
            k: k.max(1),
            cap: None,
        }
    }

    pub fn with_cap(k: usize, cap: usize) -> Self {
        Self {
            cap: Some(cap.max(k)),
            ..Self::new(k)
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.training.len()
    }

    pub fn is_empty(&self) -> bool {
        self.training.is_empty()
    }

    pub fn training(&self) -> &[(DecisionVector, f64)] {
        &self.training
    }

    /// Mean real fitness of the k training vectors nearest to `v`;
    /// distance ties keep the earliest-inserted entry.
    pub fn predict(&self, v: &DecisionVector) -> Result<f64, SurrogateError> {
        if self.training.len() < self.k {
            return Err(SurrogateError::NotEnoughTrainingData {
                have: self.training.len(),
                need: self.k,
            });
        }
        // Nearest-k kept sorted by (distance, insertion index).
        let mut nearest: Vec<(f64, usize)> = Vec::with_capacity(self.k + 1);
        for (idx, (tv, _)) in self.training.iter().enumerate() {
            let d = phenotype_distance(v, tv)?;
            if nearest.len() == self.k && d >= nearest[self.k - 1].0 {
                continue;
            }
            let at = nearest.partition_point(|&(nd, ni)| (nd, ni) < (d, idx));
            nearest.insert(at, (d, idx));
            nearest.truncate(self.k);
        }
        let sum: f64 = nearest.iter().map(|&(_, idx)| self.training[idx].1).sum();
        Ok(sum / self.k as f64)
    }

    /// Queues a generation best for the next refresh.
    pub fn record_pending(&mut self, best: PendingBest) {
        self.pending.push(best);
    }

    /// Drains the refresh queue.
    pub fn take_pending(&mut self) -> Vec<PendingBest> {
        core::mem::take(&mut self.pending)
    }

    pub fn pending_len(&self) -> usize {
        self.pending.len()
    }

    /// Appends freshly evaluated pairs to the training set.
    pub fn extend(&mut self, evaluated: impl IntoIterator<Item = (DecisionVector, f64)>) {
        self.training.extend(evaluated);
        if let Some(cap) = self.cap {
            if self.training.len() > cap {
                self.training.drain(..self.training.len() - cap);
            }
        }
    }
}
