//! Writes the CSV bundle behind one figure into a directory, ready for the
//! plotting scripts, and lists the files produced.
//!
//!     cargo run --release --example figure_data -- fig8 out/

use std::path::PathBuf;

use ugfair::figures::{write_figure, FigureId};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let id: FigureId = args.next().as_deref().unwrap_or("fig8").parse()?;
    let dir = PathBuf::from(args.next().unwrap_or_else(|| "figure-data".into()));
    println!("{id}: {}", id.description());
    for path in write_figure(id, &dir, 4)? {
        let lines = std::fs::read_to_string(&path)?.lines().count();
        println!("  {} ({lines} lines)", path.display());
    }
    Ok(())
}
