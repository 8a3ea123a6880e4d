//! Brownian-dynamics simulation of a patchy receiver compared with the
//! analytic absorbed fraction.
//!
//!     cargo run --release --example simulate [realizations]

use patchy_rx::{fibonacci_layout, multi_patch_cir, simulate, ChannelParams, SimConfig};

fn main() -> patchy_rx::Result<()> {
    let realizations = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(50);
    let params = ChannelParams::baseline();
    let layout = fibonacci_layout(11, 0.05, params.r_r)?;
    let cfg = SimConfig { realizations, bin_width: 0.05, ..SimConfig::new(params, layout.clone(), 1.0) };

    let stats = simulate(&cfg)?;
    let se = stats.cumulative_standard_error();
    println!(
        "{} molecules: {} absorbed, {} degraded, {} still free",
        stats.total_molecules(),
        stats.total_hits(),
        stats.degraded_count,
        stats.survivors
    );
    println!("{:>6} {:>18} {:>10}", "t (s)", "simulated", "analytic");
    for (b, (t, h)) in stats.cumulative().into_iter().enumerate().filter(|(b, _)| b % 4 == 3) {
        let analytic = multi_patch_cir(&[t], &layout, &params)?.cumulative[0];
        println!("{t:>6.2} {h:>10.5} +- {:.5} {analytic:>10.5}", se[b]);
    }
    Ok(())
}
