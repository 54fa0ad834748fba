//! The discrete Ultimatum Game and the mean-field payoffs of human players in
//! a bipartite proposer/receiver population with committed AI agents.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::ParamError;

/// The two offer levels of the discrete game.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GameParams {
    /// Fraction of the pie offered by a fair proposer, and the high threshold.
    pub h: f64,
    /// Fraction offered by a stingy proposer, and the low threshold.
    pub l: f64,
}

impl Default for GameParams {
    fn default() -> Self {
        GameParams { h: 0.5, l: 0.1 }
    }
}

impl GameParams {
    pub fn new(h: f64, l: f64) -> Result<Self, ParamError> {
        let g = GameParams { h, l };
        g.validate()?;
        Ok(g)
    }

    /// `l = 0` is accepted as a degenerate case.
    pub fn validate(&self) -> Result<(), ParamError> {
        if !(self.h.is_finite() && self.l.is_finite()) {
            return Err(ParamError::NonFinite("h/l"));
        }
        if !(0.0..=1.0).contains(&self.h) || !(0.0..=1.0).contains(&self.l) {
            return Err(ParamError::OfferOutOfRange { h: self.h, l: self.l });
        }
        if self.l >= self.h {
            return Err(ParamError::OffersNotOrdered { h: self.h, l: self.l });
        }
        Ok(())
    }

    pub fn offer(&self, level: Level) -> f64 {
        match level {
            Level::High => self.h,
            Level::Low => self.l,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Role {
    Proposer,
    Receiver,
}

impl Role {
    pub fn other(self) -> Role {
        match self {
            Role::Proposer => Role::Receiver,
            Role::Receiver => Role::Proposer,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Level {
    High,
    Low,
}

impl Level {
    pub fn flip(self) -> Level {
        match self {
            Level::High => Level::Low,
            Level::Low => Level::High,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Level::High => 'H',
            Level::Low => 'L',
        }
    }
}

/// A pure strategy: offer level for a proposer, acceptance threshold for a receiver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Strategy {
    pub role: Role,
    pub level: Level,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = match self.role {
            Role::Proposer => 'P',
            Role::Receiver => 'R',
        };
        write!(f, "{}_{}", self.level.letter(), r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AiProposerKind {
    /// Always offers `h`.
    #[default]
    Samaritan,
    /// Offers `h` to high-threshold receivers and `l` to everyone else.
    Discriminatory,
}

impl fmt::Display for AiProposerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AiProposerKind::Samaritan => "samaritan",
            AiProposerKind::Discriminatory => "discriminatory",
        })
    }
}

impl FromStr for AiProposerKind {
    type Err = ParamError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "samaritan" | "sam" => Ok(AiProposerKind::Samaritan),
            "discriminatory" | "disc" => Ok(AiProposerKind::Discriminatory),
            other => Err(ParamError::UnknownKind(other.to_string())),
        }
    }
}

/// Head counts of both populations plus the selection intensity.
///
/// AI receivers are always unconditional high-threshold agents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PopulationConfig {
    pub n_p: u32,
    pub n_r: u32,
    pub m_p: u32,
    pub m_r: u32,
    pub ai_proposer_kind: AiProposerKind,
    pub beta: f64,
}

impl Default for PopulationConfig {
    fn default() -> Self {
        PopulationConfig {
            n_p: 100,
            n_r: 100,
            m_p: 0,
            m_r: 0,
            ai_proposer_kind: AiProposerKind::Samaritan,
            beta: 1.0,
        }
    }
}

impl PopulationConfig {
    pub fn validate(&self) -> Result<(), ParamError> {
        if self.n_p < 2 || self.n_r < 2 {
            return Err(ParamError::PopulationTooSmall {
                n_p: self.n_p,
                n_r: self.n_r,
            });
        }
        if !self.beta.is_finite() || self.beta < 0.0 {
            return Err(ParamError::InvalidBeta(self.beta));
        }
        Ok(())
    }

    pub fn humans(&self, role: Role) -> u32 {
        match role {
            Role::Proposer => self.n_p,
            Role::Receiver => self.n_r,
        }
    }

    pub fn ai(&self, role: Role) -> u32 {
        match role {
            Role::Proposer => self.m_p,
            Role::Receiver => self.m_r,
        }
    }

    /// Discriminatory proposers facing AI receivers is a combination the
    /// published experiments never exercise; outputs carry this as metadata.
    pub fn is_untested_combination(&self) -> bool {
        self.ai_proposer_kind == AiProposerKind::Discriminatory && self.m_r > 0
    }
}

/// Number of high-level humans in each population.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PopulationState {
    pub k_p: u32,
    pub k_r: u32,
}

impl PopulationState {
    pub fn new(cfg: &PopulationConfig, k_p: u32, k_r: u32) -> Result<Self, ParamError> {
        if k_p > cfg.n_p || k_r > cfg.n_r {
            return Err(ParamError::CountOutOfRange { k_p, k_r });
        }
        Ok(PopulationState { k_p, k_r })
    }

    pub fn monomorphic(&self, cfg: &PopulationConfig) -> Option<MonomorphicState> {
        let lvl = |k: u32, n: u32| match k {
            0 => Some(Level::Low),
            k if k == n => Some(Level::High),
            _ => None,
        };
        Some(MonomorphicState {
            proposer: lvl(self.k_p, cfg.n_p)?,
            receiver: lvl(self.k_r, cfg.n_r)?,
        })
    }
}

/// A corner of the state space where both human populations are uniform.
/// The first letter of the name is the proposer level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MonomorphicState {
    pub proposer: Level,
    pub receiver: Level,
}

impl MonomorphicState {
    pub const HH: Self = Self::new(Level::High, Level::High);
    pub const HL: Self = Self::new(Level::High, Level::Low);
    pub const LH: Self = Self::new(Level::Low, Level::High);
    pub const LL: Self = Self::new(Level::Low, Level::Low);

    /// Canonical order used for every 4-vector and 4x4 matrix in the crate.
    pub const ALL: [MonomorphicState; 4] = [Self::HH, Self::HL, Self::LH, Self::LL];

    pub const fn new(proposer: Level, receiver: Level) -> Self {
        MonomorphicState { proposer, receiver }
    }

    pub fn index(self) -> usize {
        match (self.proposer, self.receiver) {
            (Level::High, Level::High) => 0,
            (Level::High, Level::Low) => 1,
            (Level::Low, Level::High) => 2,
            (Level::Low, Level::Low) => 3,
        }
    }

    pub fn level(self, role: Role) -> Level {
        match role {
            Role::Proposer => self.proposer,
            Role::Receiver => self.receiver,
        }
    }

    pub fn with(self, role: Role, level: Level) -> Self {
        match role {
            Role::Proposer => Self::new(level, self.receiver),
            Role::Receiver => Self::new(self.proposer, level),
        }
    }

    pub fn name(self) -> &'static str {
        ["HH", "HL", "LH", "LL"][self.index()]
    }

    /// Human counts at this corner.
    pub fn counts(self, cfg: &PopulationConfig) -> PopulationState {
        let k = |lvl: Level, n: u32| if lvl == Level::High { n } else { 0 };
        PopulationState {
            k_p: k(self.proposer, cfg.n_p),
            k_r: k(self.receiver, cfg.n_r),
        }
    }

    /// The role whose level differs between `self` and `to`, if exactly one does.
    pub fn single_move(self, to: Self) -> Option<Role> {
        match (self.proposer == to.proposer, self.receiver == to.receiver) {
            (false, true) => Some(Role::Proposer),
            (true, false) => Some(Role::Receiver),
            _ => None,
        }
    }
}

impl fmt::Display for MonomorphicState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MonomorphicState {
    type Err = ParamError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "HH" => Ok(Self::HH),
            "HL" => Ok(Self::HL),
            "LH" => Ok(Self::LH),
            "LL" => Ok(Self::LL),
            _ => Err(ParamError::UnknownState(s.to_string())),
        }
    }
}

/// Payoffs `(proposer, receiver)` of one interaction: an offer `p` is
/// accepted when it meets the threshold `q`, including equality.
pub fn ug_payoff(p: f64, q: f64) -> (f64, f64) {
    if p >= q {
        (1.0 - p, p)
    } else {
        (0.0, 0.0)
    }
}

/// Average payoffs of high- and low-offer human proposers when `k_r` human
/// receivers hold the high threshold. AI receivers always demand `h`.
pub fn proposer_payoffs(cfg: &PopulationConfig, game: &GameParams, k_r: u32) -> (f64, f64) {
    debug_assert!(k_r <= cfg.n_r);
    let pool = f64::from(cfg.n_r + cfg.m_r);
    let pi_h = 1.0 - game.h;
    let pi_l = (1.0 - game.l) * f64::from(cfg.n_r - k_r) / pool;
    (pi_h, pi_l)
}

/// Average payoffs of high- and low-threshold human receivers when `k_p`
/// human proposers offer `h`.
pub fn receiver_payoffs(cfg: &PopulationConfig, game: &GameParams, k_p: u32) -> (f64, f64) {
    debug_assert!(k_p <= cfg.n_p);
    let (k, n, m) = (f64::from(k_p), f64::from(cfg.n_p), f64::from(cfg.m_p));
    let pool = n + m;
    let (h, l) = (game.h, game.l);
    let pi_h = h * (k + m) / pool;
    let pi_l = match cfg.ai_proposer_kind {
        AiProposerKind::Samaritan => (h * (k + m) + l * (n - k)) / pool,
        // the AI reads the low threshold and offers `l`
        AiProposerKind::Discriminatory => (h * k + l * (n - k + m)) / pool,
    };
    (pi_h, pi_l)
}

/// Probability that a human proposer sees a Discriminatory AI as a
/// high-offer role model: the share of receivers it would offer `h` to.
pub fn perceived_fair_fraction(cfg: &PopulationConfig, k_r: u32) -> Result<f64, ParamError> {
    if cfg.ai_proposer_kind != AiProposerKind::Discriminatory {
        return Err(ParamError::NotDiscriminatory);
    }
    debug_assert!(k_r <= cfg.n_r);
    Ok(f64::from(k_r + cfg.m_r) / f64::from(cfg.n_r + cfg.m_r))
}
