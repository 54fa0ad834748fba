//! Agent-based simulation of the imitation process, used as an independent
//! check on the analytical fixation probabilities and stationary weights.
//!
//! Payoffs here are averaged over explicit pairings with [`ug_payoff`]
//! instead of reusing the closed forms in [`crate::game`].

use rand::{Rng, RngExt};
use rand_pcg::Pcg64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{fermi, FixationQuery};
use crate::error::{ParamError, SimError};
use crate::game::{
    ug_payoff, AiProposerKind, GameParams, Level, MonomorphicState, PopulationConfig, Role,
};
use crate::markov::TransitionReport;
use crate::numeric::fmt_sig;

/// Generator and stream layout, recorded in output metadata.
pub const RNG_IDENTITY: &str =
    "pcg64 (rand_pcg Lcg128Xsl64); state = splitmix64(seed) twice, stream = realization index";

/// Long-run realizations use the upper half of the stream space so they
/// never share a stream with fixation trials.
const LONG_RUN_STREAM_BASE: u128 = 1 << 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub cfg: PopulationConfig,
    pub game: GameParams,
    pub seed: u64,
    pub mutation_rate: f64,
    pub max_steps: u64,
    pub trials: u64,
}

impl SimConfig {
    pub fn new(cfg: PopulationConfig, game: GameParams, seed: u64) -> Self {
        SimConfig {
            cfg,
            game,
            seed,
            mutation_rate: 1e-4,
            max_steps: 100_000_000,
            trials: 1,
        }
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        self.cfg.validate()?;
        self.game.validate()?;
        if !(0.0..=1.0).contains(&self.mutation_rate) {
            return Err(ParamError::Invalid(format!(
                "mutation rate must lie in [0, 1] (got {})",
                self.mutation_rate
            )));
        }
        if self.trials == 0 || self.max_steps == 0 {
            return Err(ParamError::Invalid("trials and max_steps must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixationEstimate {
    pub p_hat: f64,
    pub stderr: f64,
    /// Trials that ended in fixation or extinction.
    pub trials: u64,
    pub fixed: u64,
    pub timeouts: u64,
}

impl FixationEstimate {
    fn from_counts(fixed: u64, completed: u64, timeouts: u64) -> Self {
        let p_hat = fixed as f64 / completed as f64;
        FixationEstimate {
            p_hat,
            stderr: (p_hat * (1.0 - p_hat) / completed as f64).sqrt(),
            trials: completed,
            fixed,
            timeouts,
        }
    }

    pub fn timeout_fraction(&self) -> f64 {
        self.timeouts as f64 / (self.trials + self.timeouts) as f64
    }

    /// One edge row in the [`TransitionReport::CSV_HEADER`] layout.
    pub fn to_csv_row(&self, q: &FixationQuery) -> String {
        let (from, to) = q.edge();
        format!(
            "edge,{from},{to},{},{},,,,,{}\n",
            fmt_sig(self.p_hat),
            fmt_sig(self.p_hat.ln()),
            fmt_sig(self.stderr)
        )
    }
}

/// Time spent in each corner, conditioned on both populations being
/// monomorphic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LongRunOccupancy {
    /// Indexed like [`MonomorphicState::ALL`].
    pub occupancy: [f64; 4],
    pub monomorphic_fraction: f64,
    pub recorded_steps: u64,
}

impl LongRunOccupancy {
    pub fn get(&self, s: MonomorphicState) -> f64 {
        self.occupancy[s.index()]
    }

    pub fn argmax(&self) -> MonomorphicState {
        let mut best = 0;
        for i in 1..4 {
            if self.occupancy[i] > self.occupancy[best] {
                best = i;
            }
        }
        MonomorphicState::ALL[best]
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("{}\n", TransitionReport::CSV_HEADER);
        for s in MonomorphicState::ALL {
            out.push_str(&format!("state,{s},,,,,,,{},\n", fmt_sig(self.get(s))));
        }
        out
    }
}

fn splitmix64(x: &mut u64) -> u64 {
    *x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// The generator for realization `stream` under `seed`.
pub fn stream_rng(seed: u64, stream: u128) -> Pcg64 {
    let mut s = seed;
    let hi = u128::from(splitmix64(&mut s));
    let lo = u128::from(splitmix64(&mut s));
    Pcg64::new((hi << 64) | lo, stream)
}

/// Mean payoff of a `level` player in `role` against every member of the
/// other population, `opp_high` of whose humans play high.
fn pairing_payoff(
    role: Role,
    level: Level,
    opp_high: u32,
    cfg: &PopulationConfig,
    game: &GameParams,
) -> f64 {
    let own = game.offer(level);
    let other = role.other();
    let n_high = f64::from(opp_high);
    let n_low = f64::from(cfg.humans(other) - opp_high);
    let m = f64::from(cfg.ai(other));
    let total = n_high + n_low + m;
    match role {
        Role::Proposer => {
            // AI receivers always demand h
            let sum = n_high * ug_payoff(own, game.h).0
                + n_low * ug_payoff(own, game.l).0
                + m * ug_payoff(own, game.h).0;
            sum / total
        }
        Role::Receiver => {
            let ai_offer = match cfg.ai_proposer_kind {
                AiProposerKind::Samaritan => game.h,
                AiProposerKind::Discriminatory => own,
            };
            let sum = n_high * ug_payoff(game.h, own).1
                + n_low * ug_payoff(game.l, own).1
                + m * ug_payoff(ai_offer, own).1;
            sum / total
        }
    }
}

/// Level an AI role model of `role` shows to a learner this event.
fn ai_model_level<R: Rng>(
    rng: &mut R,
    role: Role,
    receivers_high: u32,
    cfg: &PopulationConfig,
) -> Level {
    if role == Role::Proposer && cfg.ai_proposer_kind == AiProposerKind::Discriminatory {
        let fair = f64::from(receivers_high + cfg.m_r) / f64::from(cfg.n_r + cfg.m_r);
        if rng.random_bool(fair) {
            Level::High
        } else {
            Level::Low
        }
    } else {
        Level::High
    }
}

enum Outcome {
    Fixed,
    Extinct,
    Timeout,
}

fn run_fixation_trial(q: &FixationQuery, sim: &SimConfig, rng: &mut Pcg64) -> Outcome {
    let cfg = &q.cfg;
    let n = q.population_size();
    let m = q.ai_count();
    let opp = q.opposing_count();
    let receivers_high = match q.role {
        Role::Proposer => opp,
        Role::Receiver => 0, // unused for receiver learners
    };
    let pay_high = pairing_payoff(q.role, Level::High, opp, cfg, &q.game);
    let pay_low = pairing_payoff(q.role, Level::Low, opp, cfg, &q.game);
    let payoff = |l: Level| match l {
        Level::High => pay_high,
        Level::Low => pay_low,
    };

    let mut agents = vec![q.resident(); n as usize];
    let first = rng.random_range(0..n) as usize;
    agents[first] = q.mutant;
    let mut mutants = 1u32;

    for _ in 0..sim.max_steps {
        let learner = rng.random_range(0..n) as usize;
        let pick = rng.random_range(0..n + m);
        let model = if pick < n {
            agents[pick as usize]
        } else {
            ai_model_level(rng, q.role, receivers_high, cfg)
        };
        let current = agents[learner];
        if model != current && rng.random::<f64>() < fermi(payoff(current), payoff(model), cfg.beta)
        {
            agents[learner] = model;
            if model == q.mutant {
                mutants += 1;
            } else {
                mutants -= 1;
            }
            if mutants == n {
                return Outcome::Fixed;
            }
            if mutants == 0 {
                return Outcome::Extinct;
            }
        }
    }
    Outcome::Timeout
}

/// Estimates the probability that the single mutant of `q` takes over its
/// population. Trials run in parallel on the current rayon pool; each owns
/// the stream numbered by its trial index.
pub fn simulate_fixation(q: &FixationQuery, sim: &SimConfig) -> Result<FixationEstimate, SimError> {
    sim.validate()?;
    q.cfg.validate()?;
    q.game.validate()?;
    if sim.mutation_rate != 0.0 {
        return Err(ParamError::Invalid("fixation runs need a zero mutation rate".into()).into());
    }
    let (fixed, extinct, timeouts) = (0..sim.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream_rng(sim.seed, u128::from(t));
            match run_fixation_trial(q, sim, &mut rng) {
                Outcome::Fixed => (1u64, 0u64, 0u64),
                Outcome::Extinct => (0, 1, 0),
                Outcome::Timeout => (0, 0, 1),
            }
        })
        .reduce(|| (0, 0, 0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2));
    let completed = fixed + extinct;
    if completed == 0 {
        return Err(SimError::Timeout { trials: timeouts });
    }
    Ok(FixationEstimate::from_counts(fixed, completed, timeouts))
}

/// Per-realization tallies: steps in each corner, and post-burn-in steps.
struct LongRunCounts {
    corners: [u64; 4],
    recorded: u64,
}

fn run_long_run(sim: &SimConfig, realization: u64, rng: &mut Pcg64) -> LongRunCounts {
    let cfg = &sim.cfg;
    let game = &sim.game;
    // payoff tables indexed by the opposing high count
    let table = |role: Role| -> Vec<[f64; 2]> {
        (0..=cfg.humans(role.other()))
            .map(|k| {
                [
                    pairing_payoff(role, Level::High, k, cfg, game),
                    pairing_payoff(role, Level::Low, k, cfg, game),
                ]
            })
            .collect()
    };
    let pay = [table(Role::Proposer), table(Role::Receiver)];
    let level_pay = |p: &[f64; 2], l: Level| match l {
        Level::High => p[0],
        Level::Low => p[1],
    };

    let start = MonomorphicState::ALL[(realization % 4) as usize];
    let mut pops = [
        vec![start.proposer; cfg.n_p as usize],
        vec![start.receiver; cfg.n_r as usize],
    ];
    let count = |l: Level, n: u32| if l == Level::High { n } else { 0 };
    let mut high = [count(start.proposer, cfg.n_p), count(start.receiver, cfg.n_r)];
    let sizes = [cfg.n_p, cfg.n_r];
    let ais = [cfg.m_p, cfg.m_r];

    let burn_in = sim.max_steps / 10;
    let mut corners = [0u64; 4];
    for step in 0..sim.max_steps {
        let r = usize::from(rng.random_bool(0.5));
        let role = if r == 0 { Role::Proposer } else { Role::Receiver };
        let n = sizes[r];
        let learner = rng.random_range(0..n) as usize;
        let current = pops[r][learner];
        let next = if rng.random::<f64>() < sim.mutation_rate {
            if rng.random_bool(0.5) {
                Level::High
            } else {
                Level::Low
            }
        } else {
            let pick = rng.random_range(0..n + ais[r]);
            let model = if pick < n {
                pops[r][pick as usize]
            } else {
                ai_model_level(rng, role, high[1], cfg)
            };
            let p = &pay[r][high[1 - r] as usize];
            if model != current
                && rng.random::<f64>() < fermi(level_pay(p, current), level_pay(p, model), cfg.beta)
            {
                model
            } else {
                current
            }
        };
        if next != current {
            pops[r][learner] = next;
            if next == Level::High {
                high[r] += 1;
            } else {
                high[r] -= 1;
            }
        }
        if step >= burn_in {
            let corner = |k: u32, n: u32| match k {
                0 => Some(Level::Low),
                k if k == n => Some(Level::High),
                _ => None,
            };
            if let (Some(p), Some(q)) = (corner(high[0], sizes[0]), corner(high[1], sizes[1])) {
                corners[MonomorphicState::new(p, q).index()] += 1;
            }
        }
    }
    LongRunCounts {
        corners,
        recorded: sim.max_steps - burn_in,
    }
}

/// Runs `sim.trials` independent long realizations with mutation and
/// pools the time spent in each monomorphic corner.
pub fn simulate_long_run(sim: &SimConfig) -> Result<LongRunOccupancy, SimError> {
    sim.validate()?;
    if sim.mutation_rate <= 0.0 {
        return Err(ParamError::Invalid("long runs need a positive mutation rate".into()).into());
    }
    let totals = (0..sim.trials)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream_rng(sim.seed, LONG_RUN_STREAM_BASE + u128::from(r));
            run_long_run(sim, r, &mut rng)
        })
        .reduce(
            || LongRunCounts { corners: [0; 4], recorded: 0 },
            |a, b| LongRunCounts {
                corners: std::array::from_fn(|i| a.corners[i] + b.corners[i]),
                recorded: a.recorded + b.recorded,
            },
        );
    let mono: u64 = totals.corners.iter().sum();
    let fraction = mono as f64 / totals.recorded as f64;
    if totals.recorded == 0 || fraction < 0.5 {
        return Err(SimError::InsufficientMonomorphicTime { fraction });
    }
    Ok(LongRunOccupancy {
        occupancy: totals.corners.map(|c| c as f64 / mono as f64),
        monomorphic_fraction: fraction,
        recorded_steps: totals.recorded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::fixation_probability;
    use crate::game::{proposer_payoffs, receiver_payoffs};

    fn small(n: u32) -> PopulationConfig {
        PopulationConfig {
            n_p: n,
            n_r: n,
            ..Default::default()
        }
    }

    fn sim(cfg: PopulationConfig, trials: u64) -> SimConfig {
        SimConfig {
            mutation_rate: 0.0,
            max_steps: 10_000_000,
            trials,
            ..SimConfig::new(cfg, GameParams::default(), 7)
        }
    }

    #[test]
    fn pairing_payoffs_match_closed_forms() {
        let game = GameParams::new(0.45, 0.15).unwrap();
        for kind in [AiProposerKind::Samaritan, AiProposerKind::Discriminatory] {
            let cfg = PopulationConfig {
                n_p: 9,
                n_r: 7,
                m_p: 3,
                m_r: 2,
                ai_proposer_kind: kind,
                beta: 1.0,
            };
            for k in 0..=7 {
                let (h, l) = proposer_payoffs(&cfg, &game, k);
                assert!((pairing_payoff(Role::Proposer, Level::High, k, &cfg, &game) - h).abs() < 1e-15);
                assert!((pairing_payoff(Role::Proposer, Level::Low, k, &cfg, &game) - l).abs() < 1e-15);
            }
            for k in 0..=9 {
                let (h, l) = receiver_payoffs(&cfg, &game, k);
                assert!((pairing_payoff(Role::Receiver, Level::High, k, &cfg, &game) - h).abs() < 1e-15);
                assert!((pairing_payoff(Role::Receiver, Level::Low, k, &cfg, &game) - l).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn streams_differ_and_repeat() {
        let x: u64 = stream_rng(1, 0).random();
        assert_eq!(x, stream_rng(1, 0).random::<u64>());
        assert_ne!(x, stream_rng(1, 1).random::<u64>());
        assert_ne!(x, stream_rng(2, 0).random::<u64>());
    }

    #[test]
    fn neutral_fixation_is_one_over_n() {
        let cfg = PopulationConfig {
            beta: 0.0,
            ..small(20)
        };
        let q = FixationQuery {
            role: Role::Proposer,
            mutant: Level::High,
            opposing: Level::Low,
            cfg,
            game: GameParams::default(),
        };
        let est = simulate_fixation(&q, &sim(cfg, 20_000)).unwrap();
        assert_eq!(est.timeouts, 0);
        assert!((est.p_hat - 0.05).abs() <= 3.0 * est.stderr, "{est:?}");
    }

    #[test]
    fn agrees_with_analytics_for_a_selected_edge() {
        let cfg = PopulationConfig {
            m_p: 2,
            beta: 1.0,
            ai_proposer_kind: AiProposerKind::Discriminatory,
            ..small(12)
        };
        let q = FixationQuery {
            role: Role::Proposer,
            mutant: Level::Low,
            opposing: Level::Low,
            cfg,
            game: GameParams::default(),
        };
        let rho = fixation_probability(&q).unwrap();
        let est = simulate_fixation(&q, &sim(cfg, 20_000)).unwrap();
        assert!((est.p_hat - rho).abs() <= 3.0 * est.stderr, "{est:?} vs {rho}");
    }

    #[test]
    fn identical_config_is_bitwise_identical() {
        let cfg = PopulationConfig { beta: 1.0, ..small(12) };
        let q = FixationQuery {
            role: Role::Receiver,
            mutant: Level::High,
            opposing: Level::High,
            cfg,
            game: GameParams::default(),
        };
        let s = sim(cfg, 2_000);
        assert_eq!(simulate_fixation(&q, &s).unwrap(), simulate_fixation(&q, &s).unwrap());
    }

    #[test]
    fn every_trial_timing_out_is_an_error() {
        let cfg = small(50);
        let q = FixationQuery {
            role: Role::Proposer,
            mutant: Level::High,
            opposing: Level::Low,
            cfg,
            game: GameParams::default(),
        };
        let s = SimConfig {
            max_steps: 1,
            ..sim(cfg, 10)
        };
        assert_eq!(simulate_fixation(&q, &s), Err(SimError::Timeout { trials: 10 }));
    }

    #[test]
    fn nonzero_mutation_rejected_for_fixation() {
        let cfg = small(10);
        let q = FixationQuery {
            role: Role::Proposer,
            mutant: Level::High,
            opposing: Level::Low,
            cfg,
            game: GameParams::default(),
        };
        let s = SimConfig {
            mutation_rate: 0.1,
            ..sim(cfg, 10)
        };
        assert!(matches!(simulate_fixation(&q, &s), Err(SimError::Param(_))));
    }

    #[test]
    fn heavy_mutation_is_reported() {
        let s = SimConfig {
            mutation_rate: 0.5,
            max_steps: 20_000,
            ..SimConfig::new(small(20), GameParams::default(), 3)
        };
        assert!(matches!(
            simulate_long_run(&s),
            Err(SimError::InsufficientMonomorphicTime { .. })
        ));
    }

    #[test]
    fn occupancy_sums_to_one() {
        let s = SimConfig {
            mutation_rate: 1e-3,
            max_steps: 200_000,
            trials: 2,
            ..SimConfig::new(small(6), GameParams::default(), 11)
        };
        let occ = simulate_long_run(&s).unwrap();
        assert!((occ.occupancy.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(occ.to_csv().lines().count(), 5);
    }
}
