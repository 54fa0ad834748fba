//! Prints the mean payoffs and imitation rates of human players as the
//! opposing population shifts from all-low to all-high.
//!
//!     cargo run --example payoffs

use ugfair::game::{proposer_payoffs, receiver_payoffs};
use ugfair::{transition_rates, AiProposerKind, GameParams, PopulationConfig, Role};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let game = GameParams::new(0.5, 0.1)?;
    for kind in [AiProposerKind::Samaritan, AiProposerKind::Discriminatory] {
        let cfg = PopulationConfig {
            n_p: 10,
            n_r: 10,
            m_p: 3,
            m_r: 2,
            ai_proposer_kind: kind,
            beta: 1.0,
        };
        cfg.validate()?;
        println!("{kind} AI proposers, N=10, M_P=3, M_R=2");
        println!("  k  pi_HP  pi_LP  pi_HR  pi_LR");
        for k in [0, 5, 10] {
            let (hp, lp) = proposer_payoffs(&cfg, &game, k);
            let (hr, lr) = receiver_payoffs(&cfg, &game, k);
            println!("{k:>3}  {hp:.3}  {lp:.3}  {hr:.3}  {lr:.3}");
        }
        // receivers at half high, with all proposers fair
        let r = transition_rates(Role::Receiver, 5, 10, &cfg, &game)?;
        println!("  receivers k=5 facing fair proposers: T+={:.4} T-={:.4}\n", r.t_plus, r.t_minus);
    }
    Ok(())
}
