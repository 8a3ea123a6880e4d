//! Capacitance, effective surface rate and steady current for equal and
//! unequal patches, and the single-patch correction term.
//!
//!     cargo run --example capacitance

use patchy_rx::capacitance::{capacitance_identical, capacitance_single};
use patchy_rx::experiments::four_patch_descriptors;
use patchy_rx::{capacitance, explicit_layout, fibonacci_layout, ChannelParams, EffectiveChannel};

fn main() -> patchy_rx::Result<()> {
    let params = ChannelParams::baseline();
    println!("fully absorbing sphere: G_a = {} um, I_a = {:.2} /s", params.r_r, 4.0 * std::f64::consts::PI * params.d_sigma * params.r_r);

    println!("\nN_p  G_p (um)   w_e (um/s)  I_p (/s)   model");
    for n_p in [1, 3, 5, 7, 9, 11, 13] {
        let layout = fibonacci_layout(n_p, 0.05, params.r_r)?;
        let ch = EffectiveChannel::new(&layout, &params)?;
        println!(
            "{n_p:<4} {:<10.5} {:<11.5} {:<10.3} {:?}",
            ch.g_p(),
            ch.w_e,
            ch.current(&params),
            ch.capacitance.model
        );
        for w in &ch.capacitance.warnings {
            println!("     warning: {w}");
        }
    }

    let het = explicit_layout(&four_patch_descriptors(params.r_r), params.r_r)?;
    let c = capacitance(&het)?;
    println!("\nfour unequal patches: G_p = {:.6} um via {:?}", c.g_p, c.model);

    println!("\n kappa   one-patch (with kappa^2)   equal-radius form   rel. diff");
    for kappa in [0.01, 0.05, 0.1, 0.2] {
        let a = kappa * params.r_r;
        let g16 = capacitance_single(a, params.r_r)?.g_p;
        let layout = fibonacci_layout(1, a * a / (4.0 * params.r_r * params.r_r), params.r_r)?;
        let g15 = capacitance_identical(&layout)?.g_p;
        println!("{kappa:>6}   {g16:<26.8} {g15:<19.8} {:.2e}", (g16 - g15).abs() / g16);
    }
    Ok(())
}
