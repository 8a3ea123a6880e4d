//! Closed-form channel impulse response of a receiver with a uniform surface
//! reaction rate `w`, averaged over transmitter directions at distance `r_0`,
//! and its composition with the homogenised rate `w_e` of a patchy receiver.
//!
//! All `exp(.) erfc(.)` products are evaluated as `erfcx(.) exp(.)` with the
//! exponents combined analytically, so nothing overflows for `w` up to 1e9
//! um/s. The absorbed fraction is rearranged so that its `1/zeta` terms are
//! grouped into a single difference quotient; the expression is identical to
//! the textbook form but keeps full precision for large `w`.

use serde::{Deserialize, Serialize};

use crate::capacitance::EffectiveChannel;
use crate::error::{invalid, Error, Result};
use crate::geometry::{ChannelParams, PatchLayout};
use crate::quad;
use crate::special::{erfc, erfcx, mills_gap};

/// `|zeta| < ZETA_GUARD * gamma^2 D` triggers extrapolation in `w`.
pub const ZETA_GUARD: f64 = 1e-9;
/// Relative step of the two-sided extrapolation around a vanishing `zeta`.
pub const ZETA_STEP: f64 = 1e-6;
/// Absolute tolerance of the `k_d = 0` absorbed-fraction quadrature.
pub const QUADRATURE_TOL: f64 = 1e-10;

/// Scalars shared by the hitting-rate and absorbed-fraction formulas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedCoefficients {
    /// `(r_0 - r_R) / sqrt(4 D)`, s^(1/2).
    pub epsilon: f64,
    /// `(w r_R + D) / (D r_R)`, 1/um.
    pub gamma: f64,
    /// `gamma^2 D - k_d`, 1/s.
    pub zeta: f64,
    /// `(r_0 - r_R) sqrt(k_d / D)`.
    pub beta: f64,
}

impl DerivedCoefficients {
    pub fn new(w: f64, p: &ChannelParams) -> Self {
        let d = p.d_sigma;
        let gamma = (w * p.r_r + d) / (d * p.r_r);
        Self {
            epsilon: (p.r_0 - p.r_r) / (4.0 * d).sqrt(),
            gamma,
            zeta: gamma * gamma * d - p.k_d,
            beta: (p.r_0 - p.r_r) * (p.k_d / d).sqrt(),
        }
    }

    fn near_singular(&self, d: f64) -> bool {
        self.zeta.abs() < ZETA_GUARD * self.gamma * self.gamma * d
    }
}

fn check_inputs(t: f64, w: f64, p: &ChannelParams) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(invalid(format!("t must be > 0, got {t}")));
    }
    check_rate(w)?;
    p.validate()
}

fn check_rate(w: f64) -> Result<()> {
    if !(w >= 0.0) || !w.is_finite() {
        return Err(invalid(format!("w must be finite and >= 0, got {w}")));
    }
    Ok(())
}

/// Expected hitting rate `h_u(t, w)` in 1/s, per released molecule.
pub fn hitting_rate_uniform(t: f64, w: f64, p: &ChannelParams) -> Result<f64> {
    check_inputs(t, w, p)?;
    Ok(hitting_rate_unchecked(t, w, p))
}

fn hitting_rate_unchecked(t: f64, w: f64, p: &ChannelParams) -> f64 {
    if w == 0.0 {
        return 0.0;
    }
    let c = DerivedCoefficients::new(w, p);
    let d = p.d_sigma;
    let sqrt_t = t.sqrt();
    let a = c.epsilon / sqrt_t;
    let big_b = a + c.gamma * (d * t).sqrt();
    // exp(gamma L + zeta t) erfc(B) = erfcx(B) exp(-eps^2/t - k_d t)
    let decay = (-(a * a) - p.k_d * t).exp();
    if decay == 0.0 {
        return 0.0;
    }
    // 1/sqrt(pi D t) - gamma erfcx(B) = (mills_gap(B) + a erfcx(B)) / sqrt(D t)
    let bracket = (mills_gap(big_b) + a * erfcx(big_b)) / (d * t).sqrt();
    p.r_r * w / p.r_0 * decay * bracket
}

/// Fraction of released molecules absorbed by time `t`, `H_u(t, w)`.
///
/// `k_d > 0` uses the closed form; `k_d = 0` integrates the hitting rate.
/// Near `zeta(w) = 0` the closed form is replaced by the mean of its values at
/// `w (1 +- 1e-6)`; [`Error::NearSingularZeta`] is returned only when those
/// neighbours are themselves inside the guard band.
pub fn cumulative_fraction_uniform(t: f64, w: f64, p: &ChannelParams) -> Result<f64> {
    check_inputs(t, w, p)?;
    if w == 0.0 {
        return Ok(0.0);
    }
    if p.k_d == 0.0 {
        let v = quad::integrate(|u| if u > 0.0 { hitting_rate_unchecked(u, w, p) } else { 0.0 }, 0.0, t, QUADRATURE_TOL);
        return Ok(v.clamp(0.0, 1.0));
    }
    let c = DerivedCoefficients::new(w, p);
    if !c.near_singular(p.d_sigma) {
        return Ok(cumulative_closed_form(t, w, p));
    }
    let delta = ZETA_STEP * w;
    let (lo, hi) = (w - delta, w + delta);
    let guarded = |x: f64| DerivedCoefficients::new(x, p).near_singular(p.d_sigma);
    if lo < 0.0 || guarded(lo) || guarded(hi) {
        return Err(Error::NearSingularZeta { w, zeta: c.zeta });
    }
    Ok(0.5 * (cumulative_closed_form(t, lo, p) + cumulative_closed_form(t, hi, p)))
}

/// Closed form with `u = gamma sqrt(D)`, `v = sqrt(k_d)`, `zeta = (u - v)(u + v)`:
///
/// `H = (r_R w / r_0) { X / (2 sqrt(D) (u + v)) + E [erfcx(a + b)/(2 sqrt D) - gamma erfcx(B)/(u + v)] / (u - v) }`
///
/// with `a = eps/sqrt t`, `b = sqrt(k_d t)`, `B = a + gamma sqrt(D t)`,
/// `E = exp(-eps^2/t - k_d t)` and `X = exp(-beta) erfc(a - b)`.
pub(crate) fn cumulative_closed_form(t: f64, w: f64, p: &ChannelParams) -> f64 {
    let c = DerivedCoefficients::new(w, p);
    let d = p.d_sigma;
    let sqrt_d = d.sqrt();
    let u = c.gamma * sqrt_d;
    let v = p.k_d.sqrt();
    let a = c.epsilon / t.sqrt();
    let b = (p.k_d * t).sqrt();
    let big_b = a + c.gamma * (d * t).sqrt();
    let decay = (-(a * a) - p.k_d * t).exp();

    let x = if a >= b { erfcx(a - b) * decay } else { (-c.beta).exp() * erfc(a - b) };
    let regular = x / (2.0 * sqrt_d * (u + v));
    let paired = if decay == 0.0 {
        0.0
    } else {
        decay * (erfcx(a + b) / (2.0 * sqrt_d) - c.gamma * erfcx(big_b) / (u + v)) * (u + v) / c.zeta
    };
    (p.r_r * w / p.r_0 * (regular + paired)).clamp(0.0, 1.0)
}

/// Fraction absorbed as `t -> inf`, `H_u,inf(w)`.
///
/// Written as `r_R w exp(-beta) / (r_0 (gamma D + sqrt(k_d D)))`, which equals
/// `r_R w (gamma - sqrt(k_d/D)) exp(-beta) / (r_0 zeta)` with the removable
/// singularity at `zeta = 0` cancelled, and reduces to
/// `r_R^2 w / (r_0 (w r_R + D))` when `k_d = 0`.
pub fn asymptotic_fraction_uniform(w: f64, p: &ChannelParams) -> Result<f64> {
    check_rate(w)?;
    p.validate()?;
    let c = DerivedCoefficients::new(w, p);
    let d = p.d_sigma;
    Ok(p.r_r * w * (-c.beta).exp() / (p.r_0 * (c.gamma * d + (p.k_d * d).sqrt())))
}

/// Time sampling for CIR curves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub start: f64,
    pub end: f64,
    pub steps: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

impl TimeGrid {
    pub fn linear(start: f64, end: f64, steps: usize) -> Self {
        Self { start, end, steps, spacing: Spacing::Linear }
    }

    pub fn log(start: f64, end: f64, steps: usize) -> Self {
        Self { start, end, steps, spacing: Spacing::Log }
    }

    /// Sample times; all strictly positive.
    pub fn points(&self) -> Result<Vec<f64>> {
        if !(self.start > 0.0 && self.end >= self.start && self.end.is_finite()) {
            return Err(invalid(format!(
                "time grid needs 0 < start <= end, got [{}, {}]",
                self.start, self.end
            )));
        }
        if self.steps == 0 {
            return Err(invalid("time grid needs at least one step"));
        }
        if self.steps == 1 {
            return Ok(vec![self.start]);
        }
        let n = (self.steps - 1) as f64;
        Ok((0..self.steps)
            .map(|i| {
                let f = i as f64 / n;
                match self.spacing {
                    Spacing::Linear => self.start + (self.end - self.start) * f,
                    Spacing::Log => self.start * (self.end / self.start).powf(f),
                }
            })
            .collect())
    }
}

/// CIR of a patchy receiver on a caller-supplied time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiPatchCir {
    pub channel: EffectiveChannel,
    pub times: Vec<f64>,
    /// `h_p(t)`, 1/s per molecule.
    pub hitting_rate: Vec<f64>,
    /// `H_p(t)`.
    pub cumulative: Vec<f64>,
    /// `H_p,inf`.
    pub asymptotic: f64,
}

/// Hitting rate, absorbed fraction and asymptotic fraction of a patchy
/// receiver: the uniform-rate formulas evaluated at `w_e`.
pub fn multi_patch_cir(times: &[f64], layout: &PatchLayout, p: &ChannelParams) -> Result<MultiPatchCir> {
    let channel = EffectiveChannel::new(layout, p)?;
    let w_e = channel.w_e;
    let hitting_rate = times.iter().map(|&t| hitting_rate_uniform(t, w_e, p)).collect::<Result<Vec<_>>>()?;
    let cumulative = times
        .iter()
        .map(|&t| cumulative_fraction_uniform(t, w_e, p))
        .collect::<Result<Vec<_>>>()?;
    let asymptotic = asymptotic_fraction_uniform(w_e, p)?;
    Ok(MultiPatchCir { channel, times: times.to_vec(), hitting_rate, cumulative, asymptotic })
}
