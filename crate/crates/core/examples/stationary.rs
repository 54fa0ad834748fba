//! Builds the four-state chain for one configuration and prints every
//! transition with its neutral benchmark, followed by the stationary mass.
//!
//!     cargo run --example stationary -- discriminatory 1 0 0.1

use ugfair::{transition_report, AiProposerKind, GameParams, PopulationConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let kind: AiProposerKind = args.next().as_deref().unwrap_or("samaritan").parse()?;
    let m_p: u32 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(0);
    let m_r: u32 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(0);
    let beta: f64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(1.0);

    let cfg = PopulationConfig {
        m_p,
        m_r,
        ai_proposer_kind: kind,
        beta,
        ..PopulationConfig::default()
    };
    cfg.validate()?;
    let report = transition_report(&cfg, &GameParams::default())?;
    if report.untested_combination {
        eprintln!("note: discriminatory proposers with AI receivers");
    }
    for e in &report.edges {
        println!(
            "{} -> {}  rho={:.4e}  neutral={:.4e}  {}{}",
            e.from,
            e.to,
            e.rho,
            e.benchmark,
            e.flag.as_str(),
            if e.stronger { ", stronger" } else { "" }
        );
    }
    let st = &report.stationary;
    for s in ugfair::MonomorphicState::ALL {
        println!("pi({s}) = {:.6}", st.mass(s));
    }
    println!("argmax {}  high proposers {:.4}  high receivers {:.4}", st.argmax(), st.frac_high_proposers(), st.frac_high_receivers());
    Ok(())
}
