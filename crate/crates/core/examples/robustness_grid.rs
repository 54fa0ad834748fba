//! Runs the robustness lattice for one AI kind and prints how often each
//! regime wins, plus the mean HH mass along every axis.
//!
//!     cargo run --release --example robustness_grid -- samaritan 4

use std::time::Instant;

use ugfair::sweep::{run_grid, Axis, FrequencySummary, GridSpec, MarginalCurves};
use ugfair::{AiProposerKind, MonomorphicState};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let kind: AiProposerKind = args.next().as_deref().unwrap_or("samaritan").parse()?;
    let workers: usize = args.next().map(|w| w.parse()).transpose()?.unwrap_or(4);

    let spec = GridSpec::robustness(kind);
    let axes = [Axis::MP, Axis::MR, Axis::H, Axis::L, Axis::Beta];
    let mut curves: Vec<MarginalCurves> = axes.iter().map(|&a| MarginalCurves::new(a)).collect();
    let mut freq = FrequencySummary::default();

    let t = Instant::now();
    let summary = run_grid(&spec, workers, |rec| {
        freq.push(rec);
        for c in &mut curves {
            c.push(rec);
        }
        Ok(())
    })?;
    println!("{kind}: {} points in {:.1?} on {workers} workers", summary.total, t.elapsed());
    print!("{}", freq.report(summary.total));

    for c in &curves {
        let line: Vec<String> = c
            .mean_curve(MonomorphicState::HH)
            .iter()
            .map(|(v, m)| format!("{v}:{m:.3}"))
            .collect();
        println!("mean pi(HH) by {}: {}", c.axis.name(), line.join(" "));
    }
    Ok(())
}
