//! Checks the analytical chain against the agent-based simulator: fixation
//! frequencies for every move, then occupancy of a long run with mutation.
//!
//! Only the long-run argmax is expected to agree. With AI agents present a
//! low corner is not absorbing in the simulator, since humans keep copying
//! the high-level AI, so low corners are left faster than the chain assumes.
//!
//!     cargo run --release --example monte_carlo -- 20000 7

use std::time::Instant;

use ugfair::markov::EDGES;
use ugfair::{
    fixation_probability, simulate_fixation, simulate_long_run, stationary_for, FixationQuery,
    GameParams, MonomorphicState, PopulationConfig, SimConfig,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let trials: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(20_000);
    let seed: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(7);

    let game = GameParams::default();
    let cfg = PopulationConfig {
        n_p: 12,
        n_r: 12,
        m_p: 2,
        m_r: 1,
        beta: 0.5,
        ..PopulationConfig::default()
    };

    let t = Instant::now();
    let mut sim = SimConfig::new(cfg, game, seed);
    sim.mutation_rate = 0.0;
    sim.trials = trials;
    sim.max_steps = 10_000_000;
    println!("{:<10} {:>10} {:>10} {:>8}", "move", "exact", "simulated", "z");
    for (from, to) in EDGES {
        let q = FixationQuery::for_edge(from, to, &cfg, &game).expect("single move");
        let exact = fixation_probability(&q)?;
        let est = simulate_fixation(&q, &sim)?;
        let z = (est.p_hat - exact) / est.stderr.max(f64::MIN_POSITIVE);
        println!("{:<10} {exact:>10.5} {:>10.5} {z:>8.2}", format!("{from}->{to}"), est.p_hat);
    }
    println!("{trials} trials per move in {:.1?}", t.elapsed());

    let cfg = PopulationConfig { n_p: 20, n_r: 20, ..cfg };
    let mut sim = SimConfig::new(cfg, game, seed);
    sim.trials = 4;
    let t = Instant::now();
    let occ = simulate_long_run(&sim)?;
    let exact = stationary_for(&cfg, &game)?;
    println!("\nN=20 long run, mu={}, {:.0}% of time monomorphic", sim.mutation_rate, 100.0 * occ.monomorphic_fraction);
    for s in MonomorphicState::ALL {
        println!("{s}: simulated {:.3}  exact {:.3}", occ.get(s), exact.mass(s));
    }
    println!("argmax simulated {} exact {} in {:.1?}", occ.argmax(), exact.argmax(), t.elapsed());
    Ok(())
}
