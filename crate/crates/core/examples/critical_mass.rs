//! Searches the smallest number of AI agents that makes HH the dominant
//! regime, along each axis and along the proposer/receiver trade-off.
//!
//!     cargo run --release --example critical_mass -- 1

use ugfair::sweep::{threshold_search, tradeoff_frontier, CountRange, DOMINANCE_CUTOFF};
use ugfair::{AiProposerKind, GameParams, PopulationConfig, Role};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let beta: f64 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(1.0);
    let game = GameParams::default();
    for kind in [AiProposerKind::Samaritan, AiProposerKind::Discriminatory] {
        let base = PopulationConfig {
            ai_proposer_kind: kind,
            beta,
            ..PopulationConfig::default()
        };
        for role in [Role::Receiver, Role::Proposer] {
            match threshold_search(&base, &game, role, 100, DOMINANCE_CUTOFF) {
                Ok(m) => println!("{kind}: {m} AI {role:?}s alone make HH dominant"),
                Err(e) => println!("{kind}: {role:?}s alone: {e}"),
            }
        }
    }

    let base = PopulationConfig { beta, ..PopulationConfig::default() };
    let range = CountRange { start: 0, stop: 60, step: 10 };
    println!("\nsamaritan trade-off at beta={beta}");
    for p in tradeoff_frontier(&base, &game, range, 100, DOMINANCE_CUTOFF)? {
        match p.m_r {
            Some(m_r) => println!("  M_P={:>3}  M_R={m_r:>3}  sum={}", p.m_p, p.m_p + m_r),
            None => println!("  M_P={:>3}  M_R  > 100", p.m_p),
        }
    }
    Ok(())
}
