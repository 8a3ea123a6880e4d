//! Absorbed molecules versus number of equal patches, with a simulated
//! overlay for N_p = 11. Writes CSV and SVG files.
//!
//!     cargo run --release --example fig2 [out_dir]

use patchy_rx::experiments::{run_fig2, Fig2Preset};

fn main() -> patchy_rx::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "results/fig2".into());
    let report = run_fig2(&Fig2Preset::default())?;
    for path in report.write_to(out.as_ref(), true)? {
        println!("wrote {}", path.display());
    }
    for c in &report.checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    Ok(())
}
