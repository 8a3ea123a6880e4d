//! Expected hitting rate and absorbed fraction of a patchy receiver over
//! time, next to a fully absorbing receiver of the same size.
//!
//!     cargo run --example analytic_cir

use patchy_rx::cir::{asymptotic_fraction_uniform, cumulative_fraction_uniform, hitting_rate_uniform};
use patchy_rx::{fibonacci_layout, multi_patch_cir, ChannelParams, TimeGrid};

fn main() -> patchy_rx::Result<()> {
    let params = ChannelParams::baseline();
    let layout = fibonacci_layout(11, 0.05, params.r_r)?;
    let times = TimeGrid::log(0.01, 5.0, 12).points()?;
    let cir = multi_patch_cir(&times, &layout, &params)?;
    let n = params.n_sigma as f64;
    // a very large surface rate behaves like a perfect absorber
    let w_full = 1e8;

    println!("G_p = {:.5} um, w_e = {:.5} um/s", cir.channel.g_p(), cir.channel.w_e);
    println!("{:>8} {:>14} {:>14} {:>16}", "t (s)", "N h_p (/s)", "N H_p", "N H_full");
    for (i, &t) in times.iter().enumerate() {
        println!(
            "{t:>8.4} {:>14.5} {:>14.5} {:>16.5}",
            n * cir.hitting_rate[i],
            n * cir.cumulative[i],
            n * cumulative_fraction_uniform(t, w_full, &params)?
        );
    }
    println!("N H_p,inf = {:.4}   N H_full,inf = {:.4}", n * cir.asymptotic, n * asymptotic_fraction_uniform(w_full, &params)?);

    // without degradation the patchy receiver eventually collects G_p / r_0
    let stable = params.with_kd(0.0);
    let no_decay = multi_patch_cir(&[1.0], &layout, &stable)?;
    println!("k_d = 0: H_p,inf = {:.6}, G_p / r_0 = {:.6}", no_decay.asymptotic, no_decay.channel.g_p() / stable.r_0);

    let peak = times
        .iter()
        .map(|&t| (t, hitting_rate_uniform(t, cir.channel.w_e, &params).unwrap_or(0.0)))
        .fold((0.0, 0.0), |best, cur| if cur.1 > best.1 { cur } else { best });
    println!("largest sampled rate at t = {:.3} s", peak.0);
    Ok(())
}
