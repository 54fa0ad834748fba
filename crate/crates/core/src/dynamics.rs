//! Pairwise-comparison imitation in one human population while the other is
//! held fixed, and the absorption probability of a single mutant.
//!
//! Fixation products span hundreds of orders of magnitude at strong
//! selection (a single ratio reaches `e^50` at `beta = 100`), so the ratios
//! are accumulated as logarithms and summed with a max shift.

use serde::{Deserialize, Serialize};

use crate::error::{FixationError, ParamError};
use crate::game::{
    perceived_fair_fraction, proposer_payoffs, receiver_payoffs, AiProposerKind, GameParams,
    Level, MonomorphicState, PopulationConfig, Role,
};
use crate::numeric::{log_sum_exp, softplus};

const EXP_CLAMP: f64 = 700.0;

/// Probability that a learner with payoff `pi_self` copies a role model
/// with payoff `pi_model`.
pub fn fermi(pi_self: f64, pi_model: f64, beta: f64) -> f64 {
    let x = (-beta * (pi_model - pi_self)).clamp(-EXP_CLAMP, EXP_CLAMP);
    1.0 / (1.0 + x.exp())
}

/// `ln fermi(pi_self, pi_model, beta)`, exact for any finite argument.
pub fn log_fermi(pi_self: f64, pi_model: f64, beta: f64) -> f64 {
    -softplus(-beta * (pi_model - pi_self))
}

/// One-step probabilities that the number of high-level humans in a
/// population grows (`t_plus`) or shrinks (`t_minus`) by one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionRates {
    pub t_plus: f64,
    pub t_minus: f64,
}

/// Everything the rates at count `k` need, with the opposing population's
/// count already folded into the payoffs.
#[derive(Debug, Clone, Copy)]
struct RateModel {
    n: f64,
    pool: f64,
    /// Extra high role models on top of the `k` human ones.
    extra_high: f64,
    /// Extra low role models on top of the `n - k` human ones.
    extra_low: f64,
    pi_high: f64,
    pi_low: f64,
    beta: f64,
}

impl RateModel {
    fn new(role: Role, opposing_k: u32, cfg: &PopulationConfig, game: &GameParams) -> Self {
        let n = cfg.humans(role);
        let m = f64::from(cfg.ai(role));
        let ((pi_high, pi_low), extra_high, extra_low) = match role {
            Role::Proposer => {
                let pay = proposer_payoffs(cfg, game, opposing_k);
                match cfg.ai_proposer_kind {
                    AiProposerKind::Samaritan => (pay, m, 0.0),
                    AiProposerKind::Discriminatory => {
                        let alpha = perceived_fair_fraction(cfg, opposing_k)
                            .expect("kind checked above");
                        (pay, alpha * m, (1.0 - alpha) * m)
                    }
                }
            }
            Role::Receiver => (receiver_payoffs(cfg, game, opposing_k), m, 0.0),
        };
        RateModel {
            n: f64::from(n),
            pool: f64::from(n) + m,
            extra_high,
            extra_low,
            pi_high,
            pi_low,
            beta: cfg.beta,
        }
    }

    fn rates(&self, k: u32) -> TransitionRates {
        let k = f64::from(k);
        let t_plus = (self.n - k) / self.n * (k + self.extra_high) / self.pool
            * fermi(self.pi_low, self.pi_high, self.beta);
        let t_minus = k / self.n * (self.n - k + self.extra_low) / self.pool
            * fermi(self.pi_high, self.pi_low, self.beta);
        TransitionRates { t_plus, t_minus }
    }

    fn log_fermis(&self) -> (f64, f64) {
        (
            log_fermi(self.pi_low, self.pi_high, self.beta),
            log_fermi(self.pi_high, self.pi_low, self.beta),
        )
    }

    /// `(ln T+, ln T-)` at `k`; `lf` from [`Self::log_fermis`].
    #[inline]
    fn log_rates(&self, k: u32, lf: (f64, f64)) -> (f64, f64) {
        let k = f64::from(k);
        let common = -(self.n.ln() + self.pool.ln());
        let up = (self.n - k).ln() + (k + self.extra_high).ln() + common + lf.0;
        let down = k.ln() + (self.n - k + self.extra_low).ln() + common + lf.1;
        (up, down)
    }
}

fn check_counts(
    role: Role,
    k: u32,
    opposing_k: u32,
    cfg: &PopulationConfig,
) -> Result<(), ParamError> {
    let (k_p, k_r) = match role {
        Role::Proposer => (k, opposing_k),
        Role::Receiver => (opposing_k, k),
    };
    if k_p > cfg.n_p || k_r > cfg.n_r {
        return Err(ParamError::CountOutOfRange { k_p, k_r });
    }
    Ok(())
}

/// Rates for the population playing `role` at `k` high-level humans while
/// the other population has `opposing_k`.
pub fn transition_rates(
    role: Role,
    k: u32,
    opposing_k: u32,
    cfg: &PopulationConfig,
    game: &GameParams,
) -> Result<TransitionRates, ParamError> {
    cfg.validate()?;
    check_counts(role, k, opposing_k, cfg)?;
    Ok(RateModel::new(role, opposing_k, cfg, game).rates(k))
}

/// A single `mutant`-level human invading the `role` population whose
/// residents all play the other level; the other population sits
/// monomorphic at `opposing`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixationQuery {
    pub role: Role,
    pub mutant: Level,
    pub opposing: Level,
    pub cfg: PopulationConfig,
    pub game: GameParams,
}

impl FixationQuery {
    /// The query behind the move `from → to`, if it changes exactly one population.
    pub fn for_edge(
        from: MonomorphicState,
        to: MonomorphicState,
        cfg: &PopulationConfig,
        game: &GameParams,
    ) -> Option<Self> {
        let role = from.single_move(to)?;
        Some(FixationQuery {
            role,
            mutant: to.level(role),
            opposing: from.level(role.other()),
            cfg: *cfg,
            game: *game,
        })
    }

    /// `(from, to)` corners of this move.
    pub fn edge(&self) -> (MonomorphicState, MonomorphicState) {
        let base = MonomorphicState::new(self.opposing, self.opposing);
        (base.with(self.role, self.resident()), base.with(self.role, self.mutant))
    }

    pub fn resident(&self) -> Level {
        self.mutant.flip()
    }

    pub fn population_size(&self) -> u32 {
        self.cfg.humans(self.role)
    }

    pub fn opposing_count(&self) -> u32 {
        match self.opposing {
            Level::High => self.cfg.humans(self.role.other()),
            Level::Low => 0,
        }
    }

    /// Same-role AI count.
    pub fn ai_count(&self) -> u32 {
        self.cfg.ai(self.role)
    }

    /// Rates in mutant coordinates: `(T+(j), T-(j))` move the number of
    /// mutants `j` up or down by one.
    pub fn mutant_rates(&self, j: u32) -> TransitionRates {
        let model = RateModel::new(self.role, self.opposing_count(), &self.cfg, &self.game);
        let n = self.population_size();
        match self.mutant {
            Level::High => model.rates(j),
            Level::Low => {
                let r = model.rates(n - j);
                TransitionRates {
                    t_plus: r.t_minus,
                    t_minus: r.t_plus,
                }
            }
        }
    }

    /// `ln(T-(j) / T+(j))` for `j = 1..N-1`, in mutant coordinates.
    fn log_ratios(&self) -> Result<Vec<f64>, FixationError> {
        let model = RateModel::new(self.role, self.opposing_count(), &self.cfg, &self.game);
        let lf = model.log_fermis();
        let n = self.population_size();
        let mut out = Vec::with_capacity(n as usize - 1);
        for j in 1..n {
            // once a ratio is zero every later partial product is zero too
            if out.last() == Some(&f64::NEG_INFINITY) {
                out.push(f64::NEG_INFINITY);
                continue;
            }
            let (up, down) = match self.mutant {
                Level::High => model.log_rates(j, lf),
                Level::Low => {
                    let (up, down) = model.log_rates(n - j, lf);
                    (down, up)
                }
            };
            match (up == f64::NEG_INFINITY, down == f64::NEG_INFINITY) {
                (true, true) => return Err(FixationError::Domain { count: j }),
                (true, false) => return Err(FixationError::Unreachable { count: j }),
                _ => out.push(down - up),
            }
        }
        Ok(out)
    }

    /// `ln ρ`. Stays finite where `ρ` itself underflows.
    pub fn log_fixation_probability(&self) -> Result<f64, FixationError> {
        self.cfg.validate()?;
        let ratios = self.log_ratios()?;
        let mut terms = Vec::with_capacity(ratios.len() + 1);
        terms.push(0.0);
        let mut acc = 0.0;
        for r in ratios {
            acc += r;
            terms.push(acc);
        }
        Ok(-log_sum_exp(&terms))
    }
}

/// Probability that a single mutant takes over its human population.
///
/// Returns [`FixationError::Unreachable`] when the lineage cannot advance
/// (callers treat that as `ρ = 0`).
pub fn fixation_probability(q: &FixationQuery) -> Result<f64, FixationError> {
    q.log_fixation_probability().map(f64::exp)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn harmonic(n: u32) -> f64 {
        (1..=n).map(|k| 1.0 / f64::from(k)).sum()
    }

    fn query(role: Role, mutant: Level, opposing: Level, m_p: u32, m_r: u32, beta: f64) -> FixationQuery {
        FixationQuery {
            role,
            mutant,
            opposing,
            cfg: PopulationConfig {
                m_p,
                m_r,
                beta,
                ..Default::default()
            },
            game: GameParams::default(),
        }
    }

    #[test]
    fn fermi_examples() {
        for beta in [0.0, 0.1, 100.0] {
            assert_eq!(fermi(0.3, 0.3, beta), 0.5);
        }
        assert_eq!(fermi(0.0, 1.0, 0.0), 0.5);
        // 1/(1+e^{-0.04}) from an independent 30-digit evaluation
        assert!((fermi(0.1, 0.5, 0.1) - 0.509_998_666_879_965_5).abs() < 1e-15);
        assert!((fermi(0.0, 1.0, 100.0) - 1.0).abs() < 1e-15);
        assert!(fermi(0.0, 1.0, 1000.0).is_finite());
        assert!(fermi(1.0, 0.0, 1000.0) >= 0.0);
        assert!((log_fermi(0.1, 0.5, 0.1) - fermi(0.1, 0.5, 0.1).ln()).abs() < 1e-15);
        assert!((log_fermi(1.0, 0.0, 1000.0) + 1000.0).abs() < 1e-12);
    }

    #[test]
    fn rate_examples() {
        let cfg = PopulationConfig::default();
        let g = GameParams::default();
        let r = transition_rates(Role::Proposer, 0, 50, &cfg, &g).unwrap();
        assert_eq!(r.t_plus, 0.0);
        // receivers facing fair proposers: both Fermi factors are 1/2
        let mut c = cfg;
        c.m_r = 3;
        c.beta = 100.0;
        for k in [1, 40, 99] {
            let r = transition_rates(Role::Receiver, k, 100, &c, &g).unwrap();
            let kf = f64::from(k);
            assert!((r.t_plus - (100.0 - kf) / 100.0 * (kf + 3.0) / 103.0 * 0.5).abs() < 1e-15);
            assert!((r.t_minus - kf / 100.0 * (100.0 - kf) / 103.0 * 0.5).abs() < 1e-15);
        }
        // α = 1 collapses the discriminatory proposer rates onto the samaritan ones
        let mut s = cfg;
        s.m_p = 7;
        let mut d = s;
        d.ai_proposer_kind = AiProposerKind::Discriminatory;
        for k in 0..=100 {
            assert_eq!(
                transition_rates(Role::Proposer, k, 100, &s, &g).unwrap(),
                transition_rates(Role::Proposer, k, 100, &d, &g).unwrap()
            );
        }
        assert!(transition_rates(Role::Proposer, 101, 0, &cfg, &g).is_err());
    }

    #[test]
    fn rates_bounds() {
        let g = GameParams::default();
        for kind in [AiProposerKind::Samaritan, AiProposerKind::Discriminatory] {
            let cfg = PopulationConfig {
                n_p: 10,
                n_r: 13,
                m_p: 4,
                m_r: 2,
                ai_proposer_kind: kind,
                beta: 5.0,
            };
            for role in [Role::Proposer, Role::Receiver] {
                let n = cfg.humans(role);
                let on = cfg.humans(role.other());
                for k in 0..=n {
                    for ok in 0..=on {
                        let r = transition_rates(role, k, ok, &cfg, &g).unwrap();
                        assert!(r.t_plus >= 0.0 && r.t_minus >= 0.0);
                        assert!(r.t_plus + r.t_minus <= 1.0);
                        if k == n {
                            assert_eq!(r.t_plus, 0.0);
                        }
                        if k == 0 {
                            assert_eq!(r.t_minus, 0.0);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn neutral_drift_is_one_over_n() {
        let q = query(Role::Receiver, Level::High, Level::High, 0, 0, 1.0);
        assert!((fixation_probability(&q).unwrap() - 0.01).abs() < 1e-12);
        let q = query(Role::Proposer, Level::Low, Level::Low, 0, 0, 0.0);
        assert!((fixation_probability(&q).unwrap() - 0.01).abs() < 1e-12);
    }

    #[test]
    fn one_ai_receiver_gives_inverse_harmonic() {
        for beta in [0.0, 0.1, 1.0, 10.0, 100.0] {
            let q = query(Role::Receiver, Level::High, Level::High, 0, 1, beta);
            let rho = fixation_probability(&q).unwrap();
            assert!((rho - 1.0 / harmonic(100)).abs() < 1e-12, "beta={beta}: {rho}");
        }
    }

    #[test]
    fn quoted_edges() {
        let rho = fixation_probability(&query(Role::Proposer, Level::High, Level::High, 1, 0, 0.1)).unwrap();
        assert!((rho - 0.32).abs() <= 0.01, "{rho}");
        let rho = fixation_probability(&query(Role::Receiver, Level::High, Level::Low, 0, 1, 0.1)).unwrap();
        assert!((rho - 0.16).abs() <= 0.01, "{rho}");
    }

    #[test]
    fn strong_selection_stays_finite() {
        for (role, mutant, opposing) in [
            (Role::Proposer, Level::Low, Level::High),
            (Role::Proposer, Level::High, Level::Low),
            (Role::Receiver, Level::Low, Level::High),
        ] {
            let q = query(role, mutant, opposing, 5, 5, 100.0);
            let lr = q.log_fixation_probability().unwrap();
            assert!(lr.is_finite() && lr <= 0.0);
        }
        // the H_P -> L_P move against fair receivers is ~e^{-4950}
        let q = query(Role::Proposer, Level::Low, Level::High, 0, 0, 100.0);
        let lr = q.log_fixation_probability().unwrap();
        assert!(lr < -4000.0, "{lr}");
        assert_eq!(fixation_probability(&q).unwrap(), 0.0);
    }

    #[test]
    fn monotone_in_same_role_ai() {
        for beta in [0.1, 1.0, 10.0] {
            let mut prev = 0.0;
            for m in 0..30 {
                let rho = fixation_probability(&query(Role::Proposer, Level::High, Level::Low, m, 0, beta)).unwrap();
                assert!(rho >= prev - 1e-15);
                prev = rho;
            }
        }
    }
}
