//! Fixation probability of a single fair mutant against selection strength,
//! next to the neutral value 1/N, for both populations.
//!
//!     cargo run --example fixation

use ugfair::{fixation_probability, FixationQuery, GameParams, Level, PopulationConfig, Role};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let game = GameParams::default();
    let base = PopulationConfig {
        m_p: 5,
        m_r: 5,
        ..PopulationConfig::default()
    };
    println!("N=100, M_P=5, M_R=5, opposing population all high");
    println!("{:>8} {:>14} {:>14}", "beta", "rho proposer", "rho receiver");
    for beta in [0.0, 0.1, 1.0, 10.0, 100.0] {
        let cfg = PopulationConfig { beta, ..base };
        let rho = |role| {
            fixation_probability(&FixationQuery {
                role,
                mutant: Level::High,
                opposing: Level::High,
                cfg,
                game,
            })
        };
        println!("{beta:>8} {:>14.6e} {:>14.6e}", rho(Role::Proposer)?, rho(Role::Receiver)?);
    }
    println!("1/N = {}", 1.0 / f64::from(base.n_p));

    // strong selection stays finite in log space
    let q = FixationQuery {
        role: Role::Proposer,
        mutant: Level::High,
        opposing: Level::Low,
        cfg: PopulationConfig { beta: 1000.0, ..base },
        game,
    };
    println!("beta=1000, fair proposer vs stingy receivers: ln rho = {:.3}", q.log_fixation_probability()?);
    Ok(())
}
