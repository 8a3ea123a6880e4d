//! Effective surface rate over patch count for two receiver radii and two
//! diffusion coefficients.
//!
//!     cargo run --example fig4

use patchy_rx::experiments::{run_fig4, Fig4Preset};

fn main() -> patchy_rx::Result<()> {
    let report = run_fig4(&Fig4Preset::default())?;
    print!("{}", report.file("fig4_we.csv").unwrap_or_default());
    for c in &report.checks {
        println!("{} {}", if c.passed { "PASS" } else { "FAIL" }, c.name);
    }
    report.ensure()
}
