//! Reference computations that share no numerics with the library: rates
//! rebuilt from the payoff averages, plain floating-point products, a
//! direct linear solve of the absorption problem, and dense or iterative
//! solutions of the four-state chain.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector, Matrix4, RowVector4};
use ugfair::game::{proposer_payoffs, receiver_payoffs};
use ugfair::{AiProposerKind, FixationQuery, GameParams, Level, PopulationConfig, Role};

/// `(T+, T-)` for the high count `k` of the query's population, written out
/// from the birth-death description.
pub fn rates(q: &FixationQuery, k: u32) -> (f64, f64) {
    let cfg = &q.cfg;
    let (n, m) = match q.role {
        Role::Proposer => (cfg.n_p, cfg.m_p),
        Role::Receiver => (cfg.n_r, cfg.m_r),
    };
    let opp = match (q.opposing, q.role) {
        (Level::Low, _) => 0,
        (Level::High, Role::Proposer) => cfg.n_r,
        (Level::High, Role::Receiver) => cfg.n_p,
    };
    let (pi_h, pi_l) = match q.role {
        Role::Proposer => proposer_payoffs(cfg, &q.game, opp),
        Role::Receiver => receiver_payoffs(cfg, &q.game, opp),
    };
    let (n, m, k) = (n as f64, m as f64, k as f64);
    let (ai_high, ai_low) = if q.role == Role::Proposer && cfg.ai_proposer_kind == AiProposerKind::Discriminatory {
        let a = (opp as f64 + cfg.m_r as f64) / (cfg.n_r as f64 + cfg.m_r as f64);
        (a * m, (1.0 - a) * m)
    } else {
        (m, 0.0)
    };
    let f = |from: f64, to: f64| 1.0 / (1.0 + (-cfg.beta * (to - from)).exp());
    let up = (n - k) / n * (k + ai_high) / (n + m) * f(pi_l, pi_h);
    let down = k / n * (n - k + ai_low) / (n + m) * f(pi_h, pi_l);
    (up, down)
}

/// Rates in mutant coordinates.
pub fn mutant_rates(q: &FixationQuery, j: u32) -> (f64, f64) {
    let n = q.population_size();
    match q.mutant {
        Level::High => rates(q, j),
        Level::Low => {
            let (up, down) = rates(q, n - j);
            (down, up)
        }
    }
}

/// `1 / (1 + Σ Π T-/T+)` in ordinary floating point.
pub fn naive_rho(q: &FixationQuery) -> f64 {
    let mut prod = 1.0;
    let mut sum = 1.0;
    for j in 1..q.population_size() {
        let (up, down) = mutant_rates(q, j);
        prod *= down / up;
        sum += prod;
    }
    1.0 / sum
}

/// Absorption probability at 1 from a dense solve of
/// `x_j = T+ x_{j+1} + T- x_{j-1} + (1 - T+ - T-) x_j`, `x_0 = 0`, `x_N = 1`.
pub fn absorption_solve(q: &FixationQuery) -> f64 {
    let n = q.population_size() as usize;
    let mut a = DMatrix::<f64>::zeros(n + 1, n + 1);
    let mut b = DVector::<f64>::zeros(n + 1);
    a[(0, 0)] = 1.0;
    a[(n, n)] = 1.0;
    b[n] = 1.0;
    for j in 1..n {
        let (up, down) = mutant_rates(q, j as u32);
        a[(j, j - 1)] = -down;
        a[(j, j)] = up + down;
        a[(j, j + 1)] = -up;
    }
    let x = a.lu().solve(&b).expect("nonsingular");
    x[1]
}

/// Stationary vector of a row-stochastic matrix from `(Pᵀ - I) π = 0` with
/// the last equation replaced by `Σ π = 1`.
pub fn dense_stationary(p: &[[f64; 4]; 4]) -> [f64; 4] {
    let mut a = Matrix4::<f64>::zeros();
    for i in 0..4 {
        for j in 0..4 {
            a[(i, j)] = p[j][i] - if i == j { 1.0 } else { 0.0 };
        }
    }
    a.set_row(3, &RowVector4::new(1.0, 1.0, 1.0, 1.0));
    let x = a.lu().solve(&nalgebra::Vector4::new(0.0, 0.0, 0.0, 1.0)).expect("nonsingular");
    [x[0], x[1], x[2], x[3]]
}

/// `π ← π P` repeated `steps` times from the uniform vector.
pub fn power_iteration(p: &[[f64; 4]; 4], steps: usize) -> [f64; 4] {
    let mut pi = [0.25; 4];
    for _ in 0..steps {
        let mut next = [0.0; 4];
        for i in 0..4 {
            for j in 0..4 {
                next[j] += pi[i] * p[i][j];
            }
        }
        pi = next;
    }
    pi
}

/// Sixteen fixation queries at N = 12: all eight moves under a samaritan
/// configuration and under a discriminatory one with different offers.
/// Selection is mild enough that every move has `rho > 1e-4`, so 1e5
/// simulated trials see it happen.
pub fn panel_n12() -> Vec<FixationQuery> {
    let sam = PopulationConfig {
        n_p: 12,
        n_r: 12,
        m_p: 2,
        m_r: 1,
        ai_proposer_kind: AiProposerKind::Samaritan,
        beta: 0.5,
    };
    let disc = PopulationConfig {
        n_p: 12,
        n_r: 12,
        m_p: 3,
        m_r: 0,
        ai_proposer_kind: AiProposerKind::Discriminatory,
        beta: 0.5,
    };
    let mut out = Vec::new();
    for (cfg, game) in [
        (sam, GameParams::default()),
        (disc, GameParams::new(0.45, 0.2).unwrap()),
    ] {
        for (from, to) in ugfair::markov::EDGES {
            out.push(FixationQuery::for_edge(from, to, &cfg, &game).unwrap());
        }
    }
    out
}

pub fn harmonic(n: u32) -> f64 {
    (1..=n).map(|k| 1.0 / k as f64).sum()
}
