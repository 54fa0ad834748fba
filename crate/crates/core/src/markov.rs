//! The four-state chain of the small-mutation limit.
//!
//! Between mutations both human populations are monomorphic, so the
//! dynamics hop between HH, HL, LH and LL. A hop changes exactly one
//! population; its probability is the fixation probability of the
//! corresponding single mutant, halved because the mutant arises in either
//! population with equal chance.
//!
//! Off-diagonal entries are kept as logarithms. At strong selection the
//! exits from HH and LL differ by hundreds of orders of magnitude and the
//! smaller one is often below `f64::MIN_POSITIVE`; the stationary vector is
//! computed by GTH state reduction entirely in log space so the comparison
//! between such exits is never lost.

use serde::{Deserialize, Serialize};

use crate::dynamics::FixationQuery;
use crate::error::{FixationError, ParamError};
use crate::game::{GameParams, MonomorphicState, PopulationConfig};
use crate::numeric::{fmt_sig, log_add, log_sum_exp};

const STATES: usize = 4;
const LN_2: f64 = std::f64::consts::LN_2;

/// Row-stochastic 4x4 matrix in the canonical HH, HL, LH, LL order;
/// rows are the origin state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionMatrix {
    /// `ln Λ(i→j)` for `i ≠ j`; the diagonal holds `-inf` and is unused.
    log_off: [[f64; STATES]; STATES],
}

impl TransitionMatrix {
    /// Builds a matrix from plain probabilities. Only the off-diagonal
    /// entries are read; the diagonal is implied by the row sums.
    pub fn from_probabilities(p: [[f64; STATES]; STATES]) -> Result<Self, ParamError> {
        let mut log_off = [[f64::NEG_INFINITY; STATES]; STATES];
        for i in 0..STATES {
            let mut row = 0.0;
            for j in 0..STATES {
                if i == j {
                    continue;
                }
                let x = p[i][j];
                if !(0.0..=1.0).contains(&x) {
                    return Err(ParamError::Invalid(format!("entry ({i},{j}) = {x} is not a probability")));
                }
                row += x;
                log_off[i][j] = x.ln();
            }
            if row > 1.0 + 1e-12 {
                return Err(ParamError::Invalid(format!("row {i} leaves with probability {row} > 1")));
            }
        }
        Ok(TransitionMatrix { log_off })
    }

    pub fn from_log_off_diagonal(log_off: [[f64; STATES]; STATES]) -> Self {
        let mut m = TransitionMatrix { log_off };
        for i in 0..STATES {
            m.log_off[i][i] = f64::NEG_INFINITY;
        }
        m
    }

    pub fn log_entry(&self, from: MonomorphicState, to: MonomorphicState) -> f64 {
        self.log_off[from.index()][to.index()]
    }

    /// `Λ(from→to)`, including the diagonal.
    pub fn entry(&self, from: MonomorphicState, to: MonomorphicState) -> f64 {
        self.probabilities()[from.index()][to.index()]
    }

    pub fn probabilities(&self) -> [[f64; STATES]; STATES] {
        let mut p = [[0.0; STATES]; STATES];
        for i in 0..STATES {
            let mut off = 0.0;
            for j in 0..STATES {
                if i != j {
                    p[i][j] = self.log_off[i][j].exp();
                    off += p[i][j];
                }
            }
            p[i][i] = 1.0 - off;
        }
        p
    }

    /// Total exit probability of each state, in log space.
    pub fn log_exit(&self, from: MonomorphicState) -> f64 {
        log_sum_exp(&self.log_off[from.index()])
    }
}

/// `ln ρ(from→to)` with an unreachable lineage mapped to `-inf`.
fn log_edge_rho(q: &FixationQuery) -> Result<f64, FixationError> {
    match q.log_fixation_probability() {
        Ok(v) => Ok(v),
        Err(FixationError::Unreachable { .. }) => Ok(f64::NEG_INFINITY),
        Err(e) => Err(e),
    }
}

pub fn build_transition_matrix(
    cfg: &PopulationConfig,
    game: &GameParams,
) -> Result<TransitionMatrix, FixationError> {
    cfg.validate()?;
    game.validate()?;
    let mut log_off = [[f64::NEG_INFINITY; STATES]; STATES];
    for from in MonomorphicState::ALL {
        for to in MonomorphicState::ALL {
            if let Some(q) = FixationQuery::for_edge(from, to, cfg, game) {
                log_off[from.index()][to.index()] = log_edge_rho(&q)? - LN_2;
            }
        }
    }
    Ok(TransitionMatrix { log_off })
}

/// Long-run share of time in each monomorphic state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StationaryDistribution {
    pub pi: [f64; STATES],
    /// Set when the chain has more than one closed class; `pi` is then the
    /// minimum-norm fixed probability vector.
    pub degenerate: bool,
}

impl StationaryDistribution {
    pub fn mass(&self, s: MonomorphicState) -> f64 {
        self.pi[s.index()]
    }

    pub fn argmax(&self) -> MonomorphicState {
        let mut best = 0;
        for i in 1..STATES {
            if self.pi[i] > self.pi[best] {
                best = i;
            }
        }
        MonomorphicState::ALL[best]
    }

    /// Expected share of high-offer human proposers.
    pub fn frac_high_proposers(&self) -> f64 {
        self.mass(MonomorphicState::HH) + self.mass(MonomorphicState::HL)
    }

    /// Expected share of high-threshold human receivers.
    pub fn frac_high_receivers(&self) -> f64 {
        self.mass(MonomorphicState::HH) + self.mass(MonomorphicState::LH)
    }

    /// `max_j |(πΛ)_j - π_j|`.
    pub fn residual(&self, m: &TransitionMatrix) -> f64 {
        let p = m.probabilities();
        (0..STATES)
            .map(|j| {
                let x: f64 = (0..STATES).map(|i| self.pi[i] * p[i][j]).sum();
                (x - self.pi[j]).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// GTH reduction on a log-space rate table restricted to `states`, which
/// must form one irreducible class. Returns normalised probabilities.
fn gth_log(log_off: &[[f64; STATES]; STATES], states: &[usize]) -> Vec<f64> {
    let n = states.len();
    let mut a: Vec<Vec<f64>> = states
        .iter()
        .map(|&i| states.iter().map(|&j| if i == j { f64::NEG_INFINITY } else { log_off[i][j] }).collect())
        .collect();
    for k in (1..n).rev() {
        let s = log_sum_exp(&a[k][..k]);
        debug_assert!(s.is_finite(), "class is not irreducible");
        for i in 0..k {
            a[i][k] -= s;
        }
        for i in 0..k {
            for j in 0..k {
                if i != j {
                    a[i][j] = log_add(a[i][j], a[i][k] + a[k][j]);
                }
            }
        }
    }
    let mut log_pi = vec![0.0; n];
    for j in 1..n {
        let terms: Vec<f64> = (0..j).map(|i| log_pi[i] + a[i][j]).collect();
        log_pi[j] = log_sum_exp(&terms);
    }
    let z = log_sum_exp(&log_pi);
    log_pi.iter().map(|&x| (x - z).exp()).collect()
}

/// Closed communicating classes of the graph of positive entries.
fn closed_classes(log_off: &[[f64; STATES]; STATES]) -> Vec<Vec<usize>> {
    let mut reach = [[false; STATES]; STATES];
    for i in 0..STATES {
        reach[i][i] = true;
        for j in 0..STATES {
            if log_off[i][j] > f64::NEG_INFINITY {
                reach[i][j] = true;
            }
        }
    }
    for k in 0..STATES {
        for i in 0..STATES {
            for j in 0..STATES {
                if reach[i][k] && reach[k][j] {
                    reach[i][j] = true;
                }
            }
        }
    }
    let mut seen = [false; STATES];
    let mut classes = Vec::new();
    for i in 0..STATES {
        if seen[i] {
            continue;
        }
        let class: Vec<usize> = (0..STATES).filter(|&j| reach[i][j] && reach[j][i]).collect();
        for &j in &class {
            seen[j] = true;
        }
        let closed = (0..STATES).all(|j| !reach[i][j] || class.contains(&j));
        if closed {
            classes.push(class);
        }
    }
    classes
}

pub fn stationary_distribution(m: &TransitionMatrix) -> StationaryDistribution {
    let classes = closed_classes(&m.log_off);
    let per_class: Vec<Vec<f64>> = classes.iter().map(|c| gth_log(&m.log_off, c)).collect();
    // minimum-norm point of the simplex spanned by the class vectors:
    // weights proportional to 1/|v_k|^2 (supports are disjoint)
    let inv_norms: Vec<f64> = per_class
        .iter()
        .map(|v| 1.0 / v.iter().map(|x| x * x).sum::<f64>())
        .collect();
    let z: f64 = inv_norms.iter().sum();
    let mut pi = [0.0; STATES];
    for ((class, v), w) in classes.iter().zip(&per_class).zip(&inv_norms) {
        for (&s, &x) in class.iter().zip(v) {
            pi[s] = x * w / z;
        }
    }
    StationaryDistribution {
        pi,
        degenerate: classes.len() > 1,
    }
}

/// Convenience: build the chain and solve it.
pub fn stationary_for(
    cfg: &PopulationConfig,
    game: &GameParams,
) -> Result<StationaryDistribution, FixationError> {
    Ok(stationary_distribution(&build_transition_matrix(cfg, game)?))
}

/// How an edge's fixation probability compares with its `β = 0` value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dominance {
    Favoured,
    Neutral,
    Disfavoured,
}

impl Dominance {
    pub fn as_str(self) -> &'static str {
        match self {
            Dominance::Favoured => "favoured",
            Dominance::Neutral => "neutral",
            Dominance::Disfavoured => "disfavoured",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeReport {
    pub from: MonomorphicState,
    pub to: MonomorphicState,
    pub rho: f64,
    pub log_rho: f64,
    /// `ρ` of the same move without selection (`1/N` without same-role AI).
    pub benchmark: f64,
    pub flag: Dominance,
    /// True when this direction beats the reverse move of the same pair.
    pub stronger: bool,
}

impl EdgeReport {
    /// One row in the [`TransitionReport::CSV_HEADER`] layout, no newline.
    pub fn csv_row(&self) -> String {
        format!(
            "edge,{},{},{},{},{},{},{},,",
            self.from,
            self.to,
            fmt_sig(self.rho),
            fmt_sig(self.log_rho),
            fmt_sig(self.benchmark),
            self.flag.as_str(),
            self.stronger
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionReport {
    pub cfg: PopulationConfig,
    pub game: GameParams,
    pub edges: Vec<EdgeReport>,
    pub stationary: StationaryDistribution,
    /// Discriminatory proposers combined with AI receivers.
    pub untested_combination: bool,
}

/// The eight one-step moves in a fixed order: proposer moves, then receiver moves.
pub const EDGES: [(MonomorphicState, MonomorphicState); 8] = [
    (MonomorphicState::LH, MonomorphicState::HH),
    (MonomorphicState::HH, MonomorphicState::LH),
    (MonomorphicState::LL, MonomorphicState::HL),
    (MonomorphicState::HL, MonomorphicState::LL),
    (MonomorphicState::HL, MonomorphicState::HH),
    (MonomorphicState::HH, MonomorphicState::HL),
    (MonomorphicState::LL, MonomorphicState::LH),
    (MonomorphicState::LH, MonomorphicState::LL),
];

const NEUTRAL_TOL: f64 = 1e-9;

pub fn transition_report(
    cfg: &PopulationConfig,
    game: &GameParams,
) -> Result<TransitionReport, FixationError> {
    let matrix = build_transition_matrix(cfg, game)?;
    let neutral_cfg = PopulationConfig { beta: 0.0, ..*cfg };
    let mut edges = Vec::with_capacity(EDGES.len());
    for (from, to) in EDGES {
        let log_rho = matrix.log_entry(from, to) + LN_2;
        let q = FixationQuery::for_edge(from, to, &neutral_cfg, game).expect("single move");
        let log_bench = log_edge_rho(&q)?;
        let flag = if (log_rho - log_bench).abs() <= NEUTRAL_TOL {
            Dominance::Neutral
        } else if log_rho > log_bench {
            Dominance::Favoured
        } else {
            Dominance::Disfavoured
        };
        let reverse = matrix.log_entry(to, from) + LN_2;
        edges.push(EdgeReport {
            from,
            to,
            rho: log_rho.exp(),
            log_rho,
            benchmark: log_bench.exp(),
            flag,
            stronger: log_rho > reverse + NEUTRAL_TOL,
        });
    }
    Ok(TransitionReport {
        cfg: *cfg,
        game: *game,
        edges,
        stationary: stationary_distribution(&matrix),
        untested_combination: cfg.is_untested_combination(),
    })
}

impl TransitionReport {
    pub fn edge(&self, from: MonomorphicState, to: MonomorphicState) -> Option<&EdgeReport> {
        self.edges.iter().find(|e| e.from == from && e.to == to)
    }

    pub const CSV_HEADER: &'static str = "record,from,to,rho,log_rho,benchmark,flag,stronger,mass,stderr";

    /// Flat CSV: eight `edge` rows then four `state` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for e in &self.edges {
            out.push_str(&e.csv_row());
            out.push('\n');
        }
        for s in MonomorphicState::ALL {
            out.push_str(&format!("state,{s},,,,,,,{},\n", fmt_sig(self.stationary.mass(s))));
        }
        out
    }
}
