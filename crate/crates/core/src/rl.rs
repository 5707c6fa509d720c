//! Tabular Q-learning agent that picks the population search mode.
//!
//! Two states (did the best fitness improve last generation or not), four
//! actions (the population modes). Action selection is epsilon-greedy; the
//! value update is the standard one-step Bellman backup.

use core::fmt;

use rand::Rng;

/// The four population search modes, used as agent actions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Mode {
    /// Common population of size N.
    P1,
    /// Common population with one slot replaced by the global elite.
    P2,
    /// The two elites alone.
    P3,
    /// Common population plus the two elites.
    P4,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::P1, Mode::P2, Mode::P3, Mode::P4];

    pub fn index(self) -> usize {
        match self {
            Mode::P1 => 0,
            Mode::P2 => 1,
            Mode::P3 => 2,
            Mode::P4 => 3,
        }
    }

    pub fn from_index(i: usize) -> Mode {
        Mode::ALL[i]
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::P1 => write!(f, "P1"),
            Mode::P2 => write!(f, "P2"),
            Mode::P3 => write!(f, "P3"),
            Mode::P4 => write!(f, "P4"),
        }
    }
}

/// Whether the best fitness improved over the previous generation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum State {
    Improved,
    NotImproved,
}

impl State {
    pub fn index(self) -> usize {
        match self {
            State::Improved => 0,
            State::NotImproved => 1,
        }
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            State::Improved => write!(f, "improved"),
            State::NotImproved => write!(f, "not-improved"),
        }
    }
}

/// Which branch of the epsilon comparison explores. `RandomBelowEpsilon`
/// explores with probability epsilon (so epsilon 0 is fully greedy);
/// `RandomAtOrAboveEpsilon` flips the comparison and explores with
/// probability 1 - epsilon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum EpsilonConvention {
    #[default]
    RandomBelowEpsilon,
    RandomAtOrAboveEpsilon,
}

/// Agent parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RlConfig {
    /// Learning rate, in (0, 1].
    pub alpha: f64,
    /// Discount factor, in [0, 1].
    pub gamma_discount: f64,
    /// Exploration probability, in [0, 1].
    pub epsilon: f64,
    pub convention: EpsilonConvention,
}

impl Default for RlConfig {
    fn default() -> Self {
        Self {
            alpha: 0.01,
            gamma_discount: 0.9,
            epsilon: 0.2,
            convention: EpsilonConvention::RandomBelowEpsilon,
        }
    }
}

/// 2-state x 4-action value table, zero-initialized.
#[derive(Debug, Clone, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct QTable {
    q: [[f64; 4]; 2],
}

impl QTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, s: State, a: Mode) -> f64 {
        self.q[s.index()][a.index()]
    }

    pub fn rows(&self) -> &[[f64; 4]; 2] {
        &self.q
    }

    /// Greedy action for `s`, ties broken by the lowest action index.
    pub fn argmax(&self, s: State) -> Mode {
        let row = &self.q[s.index()];
        let mut best = 0;
        for a in 1..4 {
            if row[a] > row[best] {
                best = a;
            }
        }
        Mode::from_index(best)
    }
}

/// State observed from two consecutive best-fitness values; improvement is
/// strict, so a plateau counts as no improvement.
pub fn observe_state(prev_best: f64, new_best: f64) -> State {
    if new_best > prev_best {
        State::Improved
    } else {
        State::NotImproved
    }
}

/// Immediate reward: the change in best fitness.
pub fn reward(f_t: f64, f_prev: f64) -> f64 {
    f_t - f_prev
}

/// One Bellman backup on cell `(s, a)`; every other cell is untouched.
pub fn q_update(qt: &mut QTable, s: State, a: Mode, r: f64, s_next: State, cfg: &RlConfig) {
    let max_next = qt.q[s_next.index()]
        .iter()
        .fold(f64::NEG_INFINITY, |acc, &v| acc.max(v));
    let cell = &mut qt.q[s.index()][a.index()];
    *cell += cfg.alpha * (r + cfg.gamma_discount * max_next - *cell);
}

/// Epsilon-greedy action choice; the exploration branch is uniform over
/// all four modes.
pub fn epsilon_greedy<R: Rng>(s: State, qt: &QTable, cfg: &RlConfig, rng: &mut R) -> Mode {
    let u: f64 = rng.gen();
    let explore = match cfg.convention {
        EpsilonConvention::RandomBelowEpsilon => u < cfg.epsilon,
        EpsilonConvention::RandomAtOrAboveEpsilon => cfg.epsilon <= u,
    };
    if explore {
        Mode::from_index(rng.gen_range(0..4))
    } else {
        qt.argmax(s)
    }
}
