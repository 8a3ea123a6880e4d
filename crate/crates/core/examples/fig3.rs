//! Effect of patch placement: evenly spread, random and clustered patches
//! of equal size, plus four patches of different sizes.
//!
//!     cargo run --release --example fig3 [out_dir] [--no-pbs]

use patchy_rx::experiments::{run_fig3, Fig3Preset};

fn main() -> patchy_rx::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let out = args.iter().find(|a| !a.starts_with("--")).cloned().unwrap_or_else(|| "results/fig3".into());
    let mut preset = Fig3Preset::default();
    if args.iter().any(|a| a == "--no-pbs") {
        preset.pbs = None;
    }
    let report = run_fig3(&preset)?;
    for path in report.write_to(out.as_ref(), true)? {
        println!("wrote {}", path.display());
    }
    for c in &report.checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    Ok(())
}
