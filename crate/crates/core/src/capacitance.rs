//! Receiver capacitance from patch geometry and the homogenised surface rate.
//!
//! The steady-state diffusion current into an isolated absorber is
//! `I = 4 pi D G C_0`, where `G` plays the role of an electrostatic
//! capacitance (`G = G_hat / (4 pi eps_0)` for a conductor of the same shape).
//! A fully absorbing sphere has `G_a = r_R`. For a sphere carrying small
//! absorbing patches, `G_p` follows from matched asymptotic expansions in
//! `kappa = a_1 / r_R`; the `O(kappa^2 ln(kappa/2))` remainder (and
//! `O(kappa^3 ln kappa)` for the single-patch expansion) is dropped.
//!
//! `kappa` is taken from the first patch, so layouts keep a stable order;
//! reordering changes results only at the rounding level.

use std::f64::consts::PI;
use std::fmt;

use crate::error::{invalid, Error, Result};
use crate::geometry::{ChannelParams, PatchLayout, Vec3, UNIT_TOLERANCE};

/// Expansion accuracy degrades above this `kappa`.
pub const KAPPA_WARN: f64 = 0.3;
/// Expansion accuracy degrades above this coverage.
pub const COVERAGE_WARN: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExpansionWarning {
    LargeKappa(f64),
    LargeCoverage(f64),
}

impl fmt::Display for ExpansionWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::LargeKappa(k) => {
                write!(f, "kappa = {k:.4} exceeds {KAPPA_WARN}; the capacitance expansion is degraded")
            }
            Self::LargeCoverage(c) => write!(
                f,
                "coverage = {c:.4} exceeds {COVERAGE_WARN}; the capacitance expansion is degraded"
            ),
        }
    }
}

/// Which expansion produced a capacitance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CapacitanceModel {
    /// Heterogeneous radii.
    General,
    /// All radii equal.
    Identical,
    /// One patch, with the `kappa^2` correction.
    Single,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Capacitance {
    /// `G_p`, um.
    pub g_p: f64,
    pub kappa: f64,
    pub model: CapacitanceModel,
    pub warnings: Vec<ExpansionWarning>,
}

/// Intermediate quantities of the heterogeneous expansion.
#[derive(Debug, Clone, PartialEq)]
pub struct CapacitanceExpansionTerms {
    /// `a_1 / r_R`.
    pub kappa: f64,
    /// `m_i = 2 a_i / (r_R kappa pi)`.
    pub m: Vec<f64>,
    pub m_bar: f64,
    /// `s_i = (m_i / 2)(ln(4 a_i / (r_R kappa)) - 3/2)`.
    pub s: Vec<f64>,
    /// `(sum m_i^2)^2 / (N m_bar) - sum m_i^3`.
    pub vartheta: f64,
    /// `F(l_i', l_j')` for `i != j`; the diagonal is zero and unused.
    pub pairwise_f: Vec<Vec<f64>>,
}

impl CapacitanceExpansionTerms {
    pub fn new(layout: &PatchLayout) -> Result<Self> {
        let r_r = layout.r_r();
        let patches = layout.patches();
        let n = patches.len();
        let kappa = patches[0].a() / r_r;
        let m: Vec<f64> = patches.iter().map(|p| 2.0 * p.a() / (r_r * kappa * PI)).collect();
        let m_bar = m.iter().sum::<f64>() / n as f64;
        let s = patches
            .iter()
            .zip(&m)
            .map(|(p, &mi)| 0.5 * mi * ((4.0 * p.a() / (r_r * kappa)).ln() - 1.5))
            .collect();
        let sum_m2: f64 = m.iter().map(|v| v * v).sum();
        let sum_m3: f64 = m.iter().map(|v| v * v * v).sum();
        let vartheta = sum_m2 * sum_m2 / (n as f64 * m_bar) - sum_m3;

        let mut pairwise_f = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i + 1..n {
                let f = pair_interaction(patches[i].center(), patches[j].center())?;
                pairwise_f[i][j] = f;
                pairwise_f[j][i] = f;
            }
        }
        Ok(Self { kappa, m, m_bar, s, vartheta, pairwise_f })
    }
}

/// `F(x, y) = 1/d + ln(d)/2 - ln(2 + d)/2` with `d = |x - y|`, for unit-scaled
/// patch centres `x`, `y`.
pub fn pair_interaction(li: Vec3, lj: Vec3) -> Result<f64> {
    for v in [li, lj] {
        if (v.norm() - 1.0).abs() > UNIT_TOLERANCE {
            return Err(invalid(format!("pair_interaction expects unit vectors, |l| = {}", v.norm())));
        }
    }
    let d = (li - lj).norm();
    if d == 0.0 {
        return Err(Error::SingularGeometry("coincident patch centres".into()));
    }
    Ok(1.0 / d + 0.5 * d.ln() - 0.5 * (2.0 + d).ln())
}

fn warnings_for(kappa: f64, coverage: f64) -> Vec<ExpansionWarning> {
    let mut w = Vec::new();
    if kappa > KAPPA_WARN {
        w.push(ExpansionWarning::LargeKappa(kappa));
    }
    if coverage > COVERAGE_WARN {
        w.push(ExpansionWarning::LargeCoverage(coverage));
    }
    w
}

fn finish(inv_g: f64, r_r: f64, kappa: f64, coverage: f64, model: CapacitanceModel) -> Result<Capacitance> {
    let g_p = 1.0 / inv_g;
    if !(g_p > 0.0 && g_p < r_r) {
        return Err(Error::ExpansionOutOfRange { g_p, r_r });
    }
    Ok(Capacitance { g_p, kappa, model, warnings: warnings_for(kappa, coverage) })
}

/// Heterogeneous-radius expansion, valid for any valid layout.
pub fn capacitance_general(layout: &PatchLayout) -> Result<Capacitance> {
    let t = CapacitanceExpansionTerms::new(layout)?;
    let n = layout.len() as f64;
    let r_r = layout.r_r();
    let k = t.kappa;
    let nm = n * t.m_bar;
    let ln_half_k = (0.5 * k).ln();
    let sum_m2: f64 = t.m.iter().map(|v| v * v).sum();
    let sum_ms: f64 = t.m.iter().zip(&t.s).map(|(m, s)| m * s).sum();
    let mut pair = 0.0;
    for i in 0..t.m.len() {
        for j in i + 1..t.m.len() {
            pair += t.m[i] * t.m[j] * t.pairwise_f[i][j];
        }
    }
    let bracket = 1.0
        + k / (2.0 * nm) * ln_half_k * sum_m2
        + k / nm * (sum_ms + 2.0 * pair)
        + (k * ln_half_k).powi(2) * t.vartheta / (4.0 * nm);
    let inv_g = 2.0 / (nm * k * r_r) * bracket;
    finish(inv_g, r_r, k, layout.coverage(), CapacitanceModel::General)
}

/// Equal-radius specialisation (`m_i = 2/pi`, `vartheta = 0`).
pub fn capacitance_identical(layout: &PatchLayout) -> Result<Capacitance> {
    if !layout.has_equal_radii() {
        return Err(invalid("capacitance_identical needs equal patch radii"));
    }
    let n = layout.len();
    let r_r = layout.r_r();
    let k = layout.patches()[0].a() / r_r;
    let ps = layout.patches();
    let mut pair = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            pair += pair_interaction(ps[i].center(), ps[j].center())?;
        }
    }
    let nf = n as f64;
    let bracket = 1.0 + k / PI * ((2.0 * k).ln() - 1.5 + 4.0 / nf * pair);
    let inv_g = PI / (nf * k * r_r) * bracket;
    finish(inv_g, r_r, k, layout.coverage(), CapacitanceModel::Identical)
}

/// Higher-order single-patch expansion including the `kappa^2` term.
pub fn capacitance_single(a: f64, r_r: f64) -> Result<Capacitance> {
    if !(a > 0.0 && a < r_r) {
        return Err(invalid(format!("patch radius a = {a} must lie in (0, r_R = {r_r})")));
    }
    let k = a / r_r;
    let bracket = 1.0 + k / PI * ((2.0 * k).ln() - 1.5) - k * k / (PI * PI) * ((PI * PI + 21.0) / 36.0);
    let inv_g = PI / (k * r_r) * bracket;
    finish(inv_g, r_r, k, a * a / (4.0 * r_r * r_r), CapacitanceModel::Single)
}

/// Fully absorbing sphere: `G_a = r_R`.
pub fn capacitance_full_sphere(r_r: f64) -> f64 {
    r_r
}

/// Steady diffusion current `I = 4 pi D G C_0`, molecules/s.
pub fn diffusion_current(g: f64, d_sigma: f64, c_0: f64) -> f64 {
    4.0 * PI * d_sigma * g * c_0
}

/// Uniform surface rate reproducing the patchy receiver's steady current,
/// `w_e = D G_p / (r_R (r_R - G_p))`, um/s.
pub fn effective_rate(g_p: f64, d_sigma: f64, r_r: f64) -> Result<f64> {
    if !(g_p > 0.0) {
        return Err(invalid(format!("G_p must be > 0, got {g_p}")));
    }
    if g_p >= r_r {
        return Err(invalid(format!(
            "G_p = {g_p} >= r_R = {r_r}: homogenisation breaks down (fully absorbing limit)"
        )));
    }
    Ok(d_sigma * g_p / (r_r * (r_r - g_p)))
}

/// Capacitance of a layout using the most specific expansion available:
/// single patch, equal radii, or the general heterogeneous form.
pub fn capacitance(layout: &PatchLayout) -> Result<Capacitance> {
    if layout.len() == 1 {
        capacitance_single(layout.patches()[0].a(), layout.r_r())
    } else if layout.has_equal_radii() {
        capacitance_identical(layout)
    } else {
        capacitance_general(layout)
    }
}

/// Homogenised receiver: capacitance and effective surface rate.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveChannel {
    pub capacitance: Capacitance,
    /// `w_e`, um/s.
    pub w_e: f64,
}

impl EffectiveChannel {
    pub fn new(layout: &PatchLayout, params: &ChannelParams) -> Result<Self> {
        params.validate()?;
        if (layout.r_r() - params.r_r).abs() > 1e-12 * params.r_r {
            return Err(invalid(format!(
                "layout r_R = {} disagrees with params r_R = {}",
                layout.r_r(),
                params.r_r
            )));
        }
        let capacitance = capacitance(layout)?;
        let w_e = effective_rate(capacitance.g_p, params.d_sigma, params.r_r)?;
        Ok(Self { capacitance, w_e })
    }

    pub fn g_p(&self) -> f64 {
        self.capacitance.g_p
    }

    /// `I_p = 4 pi D G_p C_0`.
    pub fn current(&self, params: &ChannelParams) -> f64 {
        diffusion_current(self.g_p(), params.d_sigma, params.c_0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{explicit_layout, fibonacci_layout, random_layout, Patch, PatchDescriptor};
    use approx::assert_relative_eq;

    #[test]
    fn pair_interaction_antipodal_and_orthogonal() {
        let z = Vec3::new(0.0, 0.0, 1.0);
        let x = Vec3::new(1.0, 0.0, 0.0);
        let anti = pair_interaction(z, -z).unwrap();
        assert_relative_eq!(anti, 0.5 - 0.5 * 2f64.ln(), max_relative = 1e-14);
        assert_relative_eq!(anti, 0.15343, epsilon = 1e-5);
        let orth = pair_interaction(z, x).unwrap();
        let r2 = 2f64.sqrt();
        assert_relative_eq!(orth, 1.0 / r2 + 0.25 * 2f64.ln() - 0.5 * (2.0 + r2).ln(), max_relative = 1e-14);
        assert_relative_eq!(orth, 0.266_420, epsilon = 1e-6);
        assert_eq!(pair_interaction(z, x).unwrap(), pair_interaction(x, z).unwrap());
    }

    #[test]
    fn pair_interaction_blows_up_and_rejects_coincident() {
        let z = Vec3::new(0.0, 0.0, 1.0);
        let near = Vec3::from_spherical(1e-8, 0.0);
        assert!(pair_interaction(z, near).unwrap() > 1e7);
        assert!(matches!(pair_interaction(z, z), Err(Error::SingularGeometry(_))));
        assert!(pair_interaction(z * 2.0, -z).is_err());
    }

    #[test]
    fn expansion_terms_invariants() {
        let descriptors: Vec<PatchDescriptor> = [(0.01, PI), (0.02, PI / 2.0), (0.03, 0.0), (0.04, 1.5 * PI)]
            .iter()
            .map(|&(ap, phi)| PatchDescriptor { theta: PI / 2.0, phi, a: 20.0 * f64::sqrt(ap) })
            .collect();
        let layout = explicit_layout(&descriptors, 10.0).unwrap();
        let t = CapacitanceExpansionTerms::new(&layout).unwrap();
        assert_relative_eq!(t.m[0], 2.0 / PI, max_relative = 1e-12);
        let n = t.m.len() as f64;
        let s2: f64 = t.m.iter().map(|m| m * m).sum();
        let s3: f64 = t.m.iter().map(|m| m.powi(3)).sum();
        assert_relative_eq!(t.vartheta, s2 * s2 / (n * t.m_bar) - s3, epsilon = 1e-12);
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(t.pairwise_f[i][j], t.pairwise_f[j][i]);
            }
        }
    }

    #[test]
    fn general_specialises_to_identical() {
        for n_p in [1, 3, 5, 11] {
            let l = fibonacci_layout(n_p, 0.05, 10.0).unwrap();
            let g = capacitance_general(&l).unwrap().g_p;
            let i = capacitance_identical(&l).unwrap().g_p;
            assert_relative_eq!(g, i, max_relative = 1e-12);
        }
        let l = random_layout(7, 0.08, 10.0, 4).unwrap();
        assert_relative_eq!(
            capacitance_general(&l).unwrap().g_p,
            capacitance_identical(&l).unwrap().g_p,
            max_relative = 1e-12
        );
    }

    #[test]
    fn identical_single_patch_value() {
        let l = PatchLayout::new(10.0, vec![Patch::new(1.0, 0.0, 1.0, 10.0).unwrap()]).unwrap();
        let g = capacitance_identical(&l).unwrap().g_p;
        let expected = 1.0 / (PI / 1.0 * (1.0 + 0.1 / PI * ((0.2f64).ln() - 1.5)));
        assert_relative_eq!(g, expected, max_relative = 1e-14);
        assert_relative_eq!(g, 0.353_276, epsilon = 1e-6);
    }

    #[test]
    fn single_patch_value_and_kappa_squared_gap() {
        let g16 = capacitance_single(1.0, 10.0).unwrap().g_p;
        assert_relative_eq!(g16, 0.353_617, epsilon = 1e-6);
        let l = PatchLayout::new(10.0, vec![Patch::new(0.3, 2.0, 1.0, 10.0).unwrap()]).unwrap();
        let g15 = capacitance_general(&l).unwrap().g_p;
        assert!(((g16 - g15) / g16).abs() < 1e-3);
        // 1/G15 - 1/G16 is exactly the kappa^2 term of the single-patch expansion
        let k: f64 = 0.1;
        let k2_term = PI / (k * 10.0) * (k * k / (PI * PI)) * ((PI * PI + 21.0) / 36.0);
        assert_relative_eq!(1.0 / g15 - 1.0 / g16, k2_term, max_relative = 1e-9);
    }

    #[test]
    fn leading_order_is_disc_capacitance() {
        for a in [1e-3, 1e-4, 1e-6] {
            let g = capacitance_single(a, 10.0).unwrap().g_p;
            assert!((g / (a / PI) - 1.0).abs() < 20.0 * a / 10.0 * (a / 10.0).ln().abs());
        }
    }

    #[test]
    fn second_distant_patch_increases_capacitance() {
        let one = PatchLayout::new(10.0, vec![Patch::new(0.0, 0.0, 1.0, 10.0).unwrap()]).unwrap();
        let two = PatchLayout::new(
            10.0,
            vec![Patch::new(0.0, 0.0, 1.0, 10.0).unwrap(), Patch::new(PI, 0.0, 1.0, 10.0).unwrap()],
        )
        .unwrap();
        assert!(capacitance_identical(&two).unwrap().g_p > capacitance_identical(&one).unwrap().g_p);
    }

    #[test]
    fn unequal_radii_rejected_by_identical() {
        let d = [
            PatchDescriptor { theta: 0.0, phi: 0.0, a: 1.0 },
            PatchDescriptor { theta: PI, phi: 0.0, a: 2.0 },
        ];
        let l = explicit_layout(&d, 10.0).unwrap();
        assert!(capacitance_identical(&l).is_err());
        assert_eq!(capacitance(&l).unwrap().model, CapacitanceModel::General);
    }

    #[test]
    fn full_sphere_and_current() {
        assert_eq!(capacitance_full_sphere(10.0), 10.0);
        assert_eq!(capacitance_full_sphere(1.0), 1.0);
        let i_a = diffusion_current(capacitance_full_sphere(10.0), 79.4, 1.0);
        assert_relative_eq!(i_a, 4.0 * PI * 79.4 * 10.0, max_relative = 1e-15);
        assert_relative_eq!(i_a, 9977.6, epsilon = 0.1);
        assert_eq!(diffusion_current(0.0, 79.4, 1.0), 0.0);
    }

    #[test]
    fn effective_rate_values_and_errors() {
        assert_relative_eq!(effective_rate(5.0, 79.4, 10.0).unwrap(), 7.94, max_relative = 1e-14);
        assert!(effective_rate(10.0 - 1e-9, 79.4, 10.0).unwrap() > 1e10);
        assert!(effective_rate(1e-12, 79.4, 10.0).unwrap() < 1e-11);
        assert!(effective_rate(10.0, 79.4, 10.0).is_err());
        assert!(effective_rate(0.0, 79.4, 10.0).is_err());
    }

    #[test]
    fn warnings_attach_for_large_patches() {
        let c = capacitance(&fibonacci_layout(1, 0.05, 10.0).unwrap()).unwrap();
        assert!(c.warnings.iter().any(|w| matches!(w, ExpansionWarning::LargeKappa(_))));
        let c = capacitance(&fibonacci_layout(11, 0.05, 10.0).unwrap()).unwrap();
        assert!(c.warnings.is_empty());
    }

    #[test]
    fn capacitance_increases_with_patch_count() {
        let mut prev = 0.0;
        for n_p in [1, 3, 5, 7, 9, 11, 13, 15] {
            let l = fibonacci_layout(n_p, 0.05, 10.0).unwrap();
            if l.patches()[0].a() / 10.0 > KAPPA_WARN {
                continue;
            }
            let g = capacitance(&l).unwrap().g_p;
            assert!(g > prev, "N_p = {n_p}: {g} <= {prev}");
            prev = g;
        }
    }
}
