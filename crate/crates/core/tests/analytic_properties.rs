//! Property tests of the uniform-rate formulas and the homogenised receiver.

use std::f64::consts::PI;

use patchy_rx::cir::{asymptotic_fraction_uniform, cumulative_fraction_uniform, hitting_rate_uniform};
use patchy_rx::{
    capacitance, explicit_layout, multi_patch_cir, random_layout, ChannelParams, EffectiveChannel, PatchDescriptor,
};
use proptest::prelude::*;

fn baseline() -> ChannelParams {
    ChannelParams::baseline()
}

fn log_uniform(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    (lo.ln()..hi.ln()).prop_map(f64::exp)
}

proptest! {
    #[test]
    fn degradation_factorizes(t in log_uniform(0.02, 200.0), w in log_uniform(1e-4, 1e9), k_d in 0.0f64..20.0) {
        let with = hitting_rate_uniform(t, w, &baseline().with_kd(k_d)).unwrap();
        let without = hitting_rate_uniform(t, w, &baseline().with_kd(0.0)).unwrap() * (-k_d * t).exp();
        prop_assume!(without > 1e-280);
        prop_assert!(((with - without) / without).abs() <= 1e-12, "{} vs {}", with, without);
    }

    #[test]
    fn cumulative_is_nondecreasing_in_time(
        t in log_uniform(1e-3, 1e3), dt in log_uniform(1e-4, 10.0), w in log_uniform(1e-4, 1e9), k_d in 0.0f64..5.0,
    ) {
        let p = baseline().with_kd(k_d);
        let a = cumulative_fraction_uniform(t, w, &p).unwrap();
        let b = cumulative_fraction_uniform(t + dt, w, &p).unwrap();
        prop_assert!(b >= a - 1e-12, "H({}) = {} > H({}) = {}", t, a, t + dt, b);
    }

    #[test]
    fn asymptote_is_nondecreasing_in_rate_and_bounded(w in log_uniform(1e-4, 1e9), f in 1.0f64..10.0, k_d in 0.0f64..5.0) {
        let p = baseline().with_kd(k_d);
        let lo = asymptotic_fraction_uniform(w, &p).unwrap();
        let hi = asymptotic_fraction_uniform(w * f, &p).unwrap();
        prop_assert!(hi >= lo * (1.0 - 1e-12));
        prop_assert!(hi <= p.r_r / p.r_0);
        prop_assert!(lo >= 0.0);
    }

    #[test]
    fn homogenised_receiver_is_well_posed(n_p in 1usize..16, coverage in 0.005f64..0.15, seed in any::<u64>()) {
        let p = baseline();
        let layout = match random_layout(n_p, coverage, p.r_r, seed) {
            Ok(l) => l,
            Err(_) => return Ok(()),
        };
        let ch = EffectiveChannel::new(&layout, &p).unwrap();
        prop_assert!(ch.g_p() > 0.0 && ch.g_p() < p.r_r);
        prop_assert!(ch.w_e > 0.0 && ch.w_e.is_finite());
        let no_decay = multi_patch_cir(&[1.0], &layout, &p.with_kd(0.0)).unwrap();
        prop_assert!((no_decay.asymptotic / (ch.g_p() / p.r_0) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn capacitance_is_rotation_invariant(
        phis in prop::collection::vec(0.0f64..(2.0 * PI), 2..5), thetas in prop::collection::vec(0.3f64..2.8, 5), turn in 0.0f64..(2.0 * PI),
    ) {
        let descriptors: Vec<PatchDescriptor> = phis
            .iter()
            .zip(&thetas)
            .enumerate()
            .map(|(i, (&phi, &theta))| PatchDescriptor { theta, phi, a: 0.3 + 0.1 * i as f64 })
            .collect();
        let Ok(layout) = explicit_layout(&descriptors, 10.0) else { return Ok(()) };
        let turned: Vec<PatchDescriptor> = descriptors.iter().map(|d| PatchDescriptor { phi: d.phi + turn, ..*d }).collect();
        let turned = explicit_layout(&turned, 10.0).unwrap();
        let (a, b) = (capacitance(&layout).unwrap().g_p, capacitance(&turned).unwrap().g_p);
        prop_assert!((a / b - 1.0).abs() < 1e-10, "{} vs {}", a, b);
    }
}

#[test]
fn no_overflow_or_nan_across_the_parameter_box() {
    let mut ws = vec![0.0];
    ws.extend((0..=26).map(|i| 10f64.powf(-4.0 + 0.5 * i as f64)));
    let ts: Vec<f64> = (0..=30).map(|i| 10f64.powf(-4.0 + 0.23 * i as f64)).collect();
    for k_d in [0.0, 1e-3, 0.8, 10.0, 100.0] {
        let p = baseline().with_kd(k_d);
        for &w in &ws {
            let inf = asymptotic_fraction_uniform(w, &p).unwrap();
            assert!(inf.is_finite() && (0.0..=0.5).contains(&inf), "H_inf(w={w}, k_d={k_d}) = {inf}");
            for &t in &ts {
                let h = hitting_rate_uniform(t, w, &p).unwrap();
                let c = cumulative_fraction_uniform(t, w, &p).unwrap();
                assert!(h.is_finite() && h >= 0.0, "h(t={t}, w={w}, k_d={k_d}) = {h}");
                assert!(c.is_finite() && (-1e-15..=0.5 + 1e-12).contains(&c), "H(t={t}, w={w}, k_d={k_d}) = {c}");
            }
        }
    }
}

#[test]
fn zero_rate_absorbs_nothing() {
    for k_d in [0.0, 0.8] {
        let p = baseline().with_kd(k_d);
        assert_eq!(hitting_rate_uniform(1.0, 0.0, &p).unwrap(), 0.0);
        assert_eq!(cumulative_fraction_uniform(1.0, 0.0, &p).unwrap(), 0.0);
        assert_eq!(asymptotic_fraction_uniform(0.0, &p).unwrap(), 0.0);
    }
}

#[test]
fn fully_absorbing_cumulative_matches_closed_form() {
    // perfect absorber with degradation: r_R/(2 r_0) [e^{-l v/sqrt D} erfc(l/sqrt(4Dt) - v sqrt t) + e^{l v/sqrt D} erfc(l/sqrt(4Dt) + v sqrt t)]
    let p = baseline();
    let l = p.r_0 - p.r_r;
    let v = p.k_d.sqrt();
    let sd = p.d_sigma.sqrt();
    for t in [0.1, 0.5, 1.0, 2.0, 5.0] {
        let x = l / (4.0 * p.d_sigma * t).sqrt();
        let exact = p.r_r / (2.0 * p.r_0)
            * ((-l * v / sd).exp() * libm::erfc(x - v * t.sqrt()) + (l * v / sd).exp() * libm::erfc(x + v * t.sqrt()));
        let got = cumulative_fraction_uniform(t, 1e8, &p).unwrap();
        assert!(((got - exact) / exact).abs() < 1e-3, "t={t}: {got} vs {exact}");
    }
}
