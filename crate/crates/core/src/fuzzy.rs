//! Intuitionistic fuzzy numbers and person-job match scoring.
//!
//! Competency evaluations are pairs `⟨mu, nu⟩` of membership and
//! non-membership with `mu + nu <= 1`. Per (candidate, position) the
//! evaluations along the position's competency dimensions are aggregated
//! with a power interactive weighted average: each dimension's weight is
//! boosted by how much the other dimensions support it (one minus the
//! Hamming distance), and the weighted geometric products of the
//! complements give the aggregated pair. The scalar match score is
//! membership minus non-membership, so it lives in `[-1, 1]`.

use alloc::vec::Vec;
use core::fmt;

use crate::problem::Instance;

/// An intuitionistic fuzzy number `⟨mu, nu⟩`.
///
/// Invariants: `0 <= mu`, `0 <= nu`, `mu + nu <= 1`. The slack
/// `1 - mu - nu` is the hesitancy.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "(f64, f64)", into = "(f64, f64)"))]
pub struct Ifn {
    mu: f64,
    nu: f64,
}

/// Validation tolerance for `mu + nu <= 1`; absorbs rounding of aggregates.
const IFN_EPS: f64 = 1e-9;

impl Ifn {
    pub fn new(mu: f64, nu: f64) -> Result<Self, FuzzyError> {
        let ok = mu.is_finite()
            && nu.is_finite()
            && (0.0..=1.0).contains(&mu)
            && (0.0..=1.0).contains(&nu)
            && mu + nu <= 1.0 + IFN_EPS;
        if ok {
            Ok(Self { mu, nu })
        } else {
            Err(FuzzyError::InvalidIfn { mu, nu })
        }
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// Hesitancy `1 - mu - nu`.
    pub fn hesitancy(&self) -> f64 {
        (1.0 - self.mu - self.nu).max(0.0)
    }
}

impl TryFrom<(f64, f64)> for Ifn {
    type Error = FuzzyError;

    fn try_from(pair: (f64, f64)) -> Result<Self, FuzzyError> {
        Ifn::new(pair.0, pair.1)
    }
}

impl From<Ifn> for (f64, f64) {
    fn from(ifn: Ifn) -> (f64, f64) {
        (ifn.mu, ifn.nu)
    }
}

/// Per-position competency dimension weights; non-negative, summing to 1.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "Vec<f64>", into = "Vec<f64>"))]
pub struct CompetencyWeights {
    w: Vec<f64>,
}

const WEIGHT_SUM_EPS: f64 = 1e-9;

impl CompetencyWeights {
    pub fn new(w: Vec<f64>) -> Result<Self, FuzzyError> {
        if w.is_empty() || w.iter().any(|&x| !x.is_finite() || x < 0.0) {
            return Err(FuzzyError::InvalidWeights);
        }
        let sum: f64 = w.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_EPS {
            return Err(FuzzyError::InvalidWeights);
        }
        Ok(Self { w })
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.w
    }
}

impl TryFrom<Vec<f64>> for CompetencyWeights {
    type Error = FuzzyError;

    fn try_from(w: Vec<f64>) -> Result<Self, FuzzyError> {
        CompetencyWeights::new(w)
    }
}

impl From<CompetencyWeights> for Vec<f64> {
    fn from(cw: CompetencyWeights) -> Vec<f64> {
        cw.w
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FuzzyError {
    InvalidIfn { mu: f64, nu: f64 },
    InvalidWeights,
    LengthMismatch { alphas: usize, weights: usize },
}

impl fmt::Display for FuzzyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FuzzyError::InvalidIfn { mu, nu } => {
                write!(f, "invalid fuzzy pair <{mu}, {nu}>: need mu, nu in [0,1] and mu + nu <= 1")
            }
            FuzzyError::InvalidWeights => {
                write!(f, "competency weights must be non-negative and sum to 1")
            }
            FuzzyError::LengthMismatch { alphas, weights } => {
                write!(f, "{alphas} evaluations vs {weights} weights")
            }
        }
    }
}

impl core::error::Error for FuzzyError {}

/// Hamming distance `(|mu_a - mu_b| + |nu_a - nu_b|) / 2`, in `[0, 1]`.
pub fn ifn_distance(a: Ifn, b: Ifn) -> f64 {
    0.5 * (libm::fabs(a.mu - b.mu) + libm::fabs(a.nu - b.nu))
}

/// Support between two evaluations: `1 - distance`.
pub fn ifn_support(a: Ifn, b: Ifn) -> f64 {
    1.0 - ifn_distance(a, b)
}

/// Power interactive weights: each dimension's base weight scaled by one
/// plus the weighted support it receives from the other dimensions, then
/// normalized. The result is non-negative and sums to 1.
pub fn ifpiwa_weights(alphas: &[Ifn], w: &CompetencyWeights) -> Result<Vec<f64>, FuzzyError> {
    if alphas.is_empty() || alphas.len() != w.len() {
        return Err(FuzzyError::LengthMismatch {
            alphas: alphas.len(),
            weights: w.len(),
        });
    }
    let ws = w.as_slice();
    let mut rho: Vec<f64> = Vec::with_capacity(alphas.len());
    let mut denom = 0.0;
    for (l, &alpha) in alphas.iter().enumerate() {
        let mut t = 0.0;
        for (l2, &other) in alphas.iter().enumerate() {
            if l2 != l {
                t += ws[l2] * ifn_support(other, alpha);
            }
        }
        let num = ws[l] * (1.0 + t);
        rho.push(num);
        denom += num;
    }
    for r in rho.iter_mut() {
        *r /= denom;
    }
    Ok(rho)
}

/// Mutual-support sums `T_l` for each dimension (exposed for diagnostics).
pub fn ifpiwa_supports(alphas: &[Ifn], w: &CompetencyWeights) -> Result<Vec<f64>, FuzzyError> {
    if alphas.is_empty() || alphas.len() != w.len() {
        return Err(FuzzyError::LengthMismatch {
            alphas: alphas.len(),
            weights: w.len(),
        });
    }
    let ws = w.as_slice();
    Ok(alphas
        .iter()
        .enumerate()
        .map(|(l, &alpha)| {
            alphas
                .iter()
                .enumerate()
                .filter(|&(l2, _)| l2 != l)
                .map(|(l2, &other)| ws[l2] * ifn_support(other, alpha))
                .sum()
        })
        .collect())
}

/// Aggregates the per-dimension evaluations into one pair:
/// `mu = 1 - prod(1 - mu_l)^rho_l` and
/// `nu = prod(1 - mu_l)^rho_l - prod(1 - mu_l - nu_l)^rho_l`.
///
/// `0^0` is taken as 1 (a zero-hesitancy dimension with zero effective
/// weight contributes nothing).
pub fn ifpiwa_aggregate(alphas: &[Ifn], w: &CompetencyWeights) -> Result<Ifn, FuzzyError> {
    let rho = ifpiwa_weights(alphas, w)?;
    let mut prod_nonmember = 1.0; // prod (1 - mu_l)^rho_l
    let mut prod_hesitant = 1.0; // prod (1 - mu_l - nu_l)^rho_l
    for (&alpha, &r) in alphas.iter().zip(rho.iter()) {
        prod_nonmember *= libm::pow(1.0 - alpha.mu, r);
        prod_hesitant *= libm::pow(alpha.hesitancy(), r);
    }
    let mu = (1.0 - prod_nonmember).clamp(0.0, 1.0);
    // prod_hesitant <= prod_nonmember holds exactly in real arithmetic;
    // clamp shields the float residue.
    let nu = (prod_nonmember - prod_hesitant).clamp(0.0, 1.0 - mu);
    Ok(Ifn { mu, nu })
}

/// Scalar match score of an aggregated evaluation: `mu - nu`, in `[-1, 1]`.
pub fn match_score(agg: Ifn) -> f64 {
    agg.mu - agg.nu
}

/// Candidate-by-position matrix of match scores.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchMatrix {
    candidates: usize,
    positions: usize,
    ez: Vec<f64>,
}

impl MatchMatrix {
    pub fn candidates(&self) -> usize {
        self.candidates
    }

    pub fn positions(&self) -> usize {
        self.positions
    }

    /// Match score of candidate `i` with position `j`.
    pub fn ez(&self, i: usize, j: usize) -> f64 {
        self.ez[i * self.positions + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.ez[i * self.positions..(i + 1) * self.positions]
    }
}

/// Builds the full match-score matrix for an instance. The result is
/// immutable and shared by the decoder, the evaluator, the baselines and
/// the surrogate.
pub fn match_matrix(instance: &Instance) -> Result<MatchMatrix, FuzzyError> {
    let candidates = instance.candidates.len();
    let positions = instance.positions.len();
    let mut ez = Vec::with_capacity(candidates * positions);
    for i in 0..candidates {
        for (j, pos) in instance.positions.iter().enumerate() {
            let agg = ifpiwa_aggregate(&instance.evaluations[i][j], &pos.weights)?;
            ez.push(match_score(agg));
        }
    }
    Ok(MatchMatrix {
        candidates,
        positions,
        ez,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn ifn(mu: f64, nu: f64) -> Ifn {
        Ifn::new(mu, nu).unwrap()
    }

    /// The three-dimension example used throughout: education, programming
    /// and leadership scores for one candidate on one position.
    fn worked_triple() -> (Vec<Ifn>, CompetencyWeights) {
        let alphas = vec![ifn(0.4, 0.6), ifn(0.6, 0.4), ifn(0.8, 0.2)];
        let w = CompetencyWeights::new(vec![0.4, 0.35, 0.25]).unwrap();
        (alphas, w)
    }

    #[test]
    fn distance_worked_values() {
        assert!((ifn_distance(ifn(0.4, 0.6), ifn(0.6, 0.4)) - 0.2).abs() < 1e-12);
        assert!((ifn_distance(ifn(0.4, 0.6), ifn(0.8, 0.2)) - 0.4).abs() < 1e-12);
        assert_eq!(ifn_distance(ifn(0.3, 0.3), ifn(0.3, 0.3)), 0.0);
    }

    #[test]
    fn support_worked_values() {
        assert!((ifn_support(ifn(0.4, 0.6), ifn(0.6, 0.4)) - 0.8).abs() < 1e-12);
        assert!((ifn_support(ifn(0.4, 0.6), ifn(0.8, 0.2)) - 0.6).abs() < 1e-12);
        assert_eq!(ifn_support(ifn(0.5, 0.2), ifn(0.5, 0.2)), 1.0);
    }

    #[test]
    fn weights_worked_values() {
        let (alphas, w) = worked_triple();
        let t = ifpiwa_supports(&alphas, &w).unwrap();
        assert!((t[0] - 0.43).abs() < 1e-12);
        assert!((t[1] - 0.52).abs() < 1e-12);
        assert!((t[2] - 0.52).abs() < 1e-12);

        let rho = ifpiwa_weights(&alphas, &w).unwrap();
        // Independent scalar recomputation of the normalization.
        let denom = 0.4 * 1.43 + 0.35 * 1.52 + 0.25 * 1.52;
        assert!((rho[0] - 0.4 * 1.43 / denom).abs() < 1e-12);
        assert!((rho[1] - 0.35 * 1.52 / denom).abs() < 1e-12);
        assert!((rho[2] - 0.25 * 1.52 / denom).abs() < 1e-12);
        // Published rounded values.
        assert!((rho[0] - 0.39).abs() < 0.01);
        assert!((rho[1] - 0.36).abs() < 0.01);
        assert!((rho[2] - 0.26).abs() < 0.01);
        assert!((rho.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn weights_single_dimension() {
        let w = CompetencyWeights::new(vec![1.0]).unwrap();
        let rho = ifpiwa_weights(&[ifn(0.5, 0.3)], &w).unwrap();
        assert_eq!(rho, vec![1.0]);
    }

    #[test]
    fn weights_identical_alphas_symmetric() {
        let w = CompetencyWeights::new(vec![0.5, 0.5]).unwrap();
        let rho = ifpiwa_weights(&[ifn(0.3, 0.2), ifn(0.3, 0.2)], &w).unwrap();
        assert!((rho[0] - 0.5).abs() < 1e-12);
        assert!((rho[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn weights_length_mismatch() {
        let w = CompetencyWeights::new(vec![0.5, 0.5]).unwrap();
        assert!(matches!(
            ifpiwa_weights(&[ifn(0.1, 0.1)], &w),
            Err(FuzzyError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn aggregate_worked_value() {
        let (alphas, w) = worked_triple();
        let agg = ifpiwa_aggregate(&alphas, &w).unwrap();
        assert!((agg.mu() - 0.61).abs() < 0.01, "mu = {}", agg.mu());
        assert!((agg.nu() - 0.39).abs() < 0.01, "nu = {}", agg.nu());
        assert!((match_score(agg) - 0.22).abs() < 0.01);
    }

    #[test]
    fn aggregate_identity_and_collapse() {
        let w1 = CompetencyWeights::new(vec![1.0]).unwrap();
        let agg = ifpiwa_aggregate(&[ifn(0.5, 0.3)], &w1).unwrap();
        assert!((agg.mu() - 0.5).abs() < 1e-12);
        assert!((agg.nu() - 0.3).abs() < 1e-12);

        // Equal inputs collapse because the exponents sum to one.
        let w3 = CompetencyWeights::new(vec![0.4, 0.35, 0.25]).unwrap();
        let agg = ifpiwa_aggregate(&[ifn(0.7, 0.2); 3], &w3).unwrap();
        assert!((agg.mu() - 0.7).abs() < 1e-12);
        assert!((agg.nu() - 0.2).abs() < 1e-12);
    }

    #[test]
    fn aggregate_zero_hesitancy_structure() {
        // When every mu_l + nu_l = 1 the hesitant product vanishes and
        // nu equals prod (1 - mu_l)^rho_l exactly.
        let alphas = [ifn(0.4, 0.6), ifn(0.6, 0.4), ifn(0.8, 0.2)];
        let w = CompetencyWeights::new(vec![0.4, 0.35, 0.25]).unwrap();
        let rho = ifpiwa_weights(&alphas, &w).unwrap();
        let expect_nu: f64 = alphas
            .iter()
            .zip(rho.iter())
            .map(|(a, &r)| libm::pow(1.0 - a.mu(), r))
            .product();
        let agg = ifpiwa_aggregate(&alphas, &w).unwrap();
        assert!((agg.nu() - expect_nu).abs() < 1e-12);
        assert!((agg.mu() + agg.nu() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn score_examples() {
        assert!((match_score(ifn(0.61, 0.39)) - 0.22).abs() < 1e-12);
        assert_eq!(match_score(ifn(0.5, 0.5)), 0.0);
        assert_eq!(match_score(ifn(1.0, 0.0)), 1.0);
    }

    #[test]
    fn invalid_ifn_rejected() {
        assert!(Ifn::new(0.7, 0.5).is_err());
        assert!(Ifn::new(-0.1, 0.5).is_err());
        assert!(Ifn::new(0.2, f64::NAN).is_err());
        assert!(Ifn::new(1.0, 0.0).is_ok());
    }

    #[test]
    fn aggregate_validity_bulk() {
        // 10^4 random valid inputs keep mu + nu <= 1 (+eps).
        use rand::Rng;
        let mut rng = crate::rng::stream(7, crate::rng::StreamId::Test);
        for _ in 0..10_000 {
            let len = rng.gen_range(1..=5);
            let mut alphas = Vec::new();
            let mut raw_w = Vec::new();
            for _ in 0..len {
                let mu: f64 = rng.gen_range(0.0..=1.0);
                let nu: f64 = rng.gen_range(0.0..=(1.0 - mu));
                alphas.push(ifn(mu, nu));
                raw_w.push(rng.gen_range(0.01..1.0));
            }
            let sum: f64 = raw_w.iter().sum();
            let w = CompetencyWeights::new(raw_w.iter().map(|x| x / sum).collect()).unwrap();
            let agg = ifpiwa_aggregate(&alphas, &w).unwrap();
            assert!(agg.mu() + agg.nu() <= 1.0 + 1e-9);
            assert!(agg.mu() >= 0.0 && agg.nu() >= 0.0);
        }
    }
}
