//! Receiver sphere, absorbing-patch layouts and transmitter placement.
//!
//! A patch of disc radius `a` on a receiver of radius `r_R` is realised as the
//! spherical cap of angular radius `arcsin(a / r_R)` around its centre
//! direction. Coverage keeps the flat-disc convention
//! `A = sum(a_i^2) / (4 r_R^2)`, not the cap area.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Tolerance on `|p| = 1` for direction arguments.
pub const UNIT_TOLERANCE: f64 = 1e-9;

/// Attempts allowed to `random_layout` before it declares the layout infeasible.
pub const MAX_PLACEMENT_ATTEMPTS: usize = 1_000_000;

/// Golden angle, `pi (3 - sqrt 5)`.
const GOLDEN_ANGLE: f64 = 2.399_963_229_728_653;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    /// Unit vector at polar angle `theta` and azimuth `phi`.
    pub fn from_spherical(theta: f64, phi: f64) -> Self {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        Self::new(st * cp, st * sp, ct)
    }

    #[inline]
    pub fn dot(self, o: Self) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    #[inline]
    pub fn cross(self, o: Self) -> Self {
        Self::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    #[inline]
    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn normalized(self) -> Self {
        self * (1.0 / self.norm())
    }

    /// Great-circle angle between two directions, accurate near 0 and pi.
    pub fn angle_to(self, o: Self) -> f64 {
        self.cross(o).norm().atan2(self.dot(o))
    }

    /// Polar and azimuthal angle of this direction, azimuth in `[0, 2pi)`.
    pub fn to_spherical(self) -> (f64, f64) {
        let r = self.norm();
        let theta = (self.z / r).clamp(-1.0, 1.0).acos();
        let phi = self.y.atan2(self.x).rem_euclid(TAU);
        (theta, phi)
    }
}

impl Add for Vec3 {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Self;
    #[inline]
    fn mul(self, s: f64) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Neg for Vec3 {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y, -self.z)
    }
}

/// Physical constants of the link. Lengths in um, times in s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    /// Diffusion coefficient, um^2/s.
    #[serde(rename = "D")]
    pub d_sigma: f64,
    /// First-order degradation rate, 1/s.
    #[serde(rename = "kd")]
    pub k_d: f64,
    /// Receiver radius, um.
    #[serde(rename = "rR")]
    pub r_r: f64,
    /// Transmitter distance from the receiver centre, um.
    #[serde(rename = "r0")]
    pub r_0: f64,
    /// Molecules released per impulse.
    #[serde(rename = "Nsigma")]
    pub n_sigma: u64,
    /// Far-field steady-state concentration, molecules/um^3.
    #[serde(rename = "C0", default = "default_c0")]
    pub c_0: f64,
}

fn default_c0() -> f64 {
    1.0
}

impl ChannelParams {
    pub fn new(d_sigma: f64, k_d: f64, r_r: f64, r_0: f64, n_sigma: u64) -> Result<Self> {
        let p = Self { d_sigma, k_d, r_r, r_0, n_sigma, c_0: 1.0 };
        p.validate()?;
        Ok(p)
    }

    /// `r_R = 10 um`, `r_0 = 20 um`, `D = 79.4 um^2/s`, `k_d = 0.8 /s`, `N = 1000`.
    pub fn baseline() -> Self {
        Self { d_sigma: 79.4, k_d: 0.8, r_r: 10.0, r_0: 20.0, n_sigma: 1000, c_0: 1.0 }
    }

    pub fn with_kd(self, k_d: f64) -> Self {
        Self { k_d, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.d_sigma, self.k_d, self.r_r, self.r_0, self.c_0]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(invalid("channel parameters must be finite"));
        }
        if self.d_sigma <= 0.0 {
            return Err(invalid(format!("D must be > 0, got {}", self.d_sigma)));
        }
        if self.r_r <= 0.0 {
            return Err(invalid(format!("r_R must be > 0, got {}", self.r_r)));
        }
        if self.r_0 <= self.r_r {
            return Err(invalid(format!("r_0 = {} must exceed r_R = {}", self.r_0, self.r_r)));
        }
        if self.k_d < 0.0 {
            return Err(invalid(format!("k_d must be >= 0, got {}", self.k_d)));
        }
        if self.n_sigma < 1 {
            return Err(invalid("N_sigma must be >= 1"));
        }
        if self.c_0 <= 0.0 {
            return Err(invalid(format!("C_0 must be > 0, got {}", self.c_0)));
        }
        Ok(())
    }
}

/// A circular absorbing patch on the receiver surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Patch {
    theta: f64,
    phi: f64,
    center: Vec3,
    a: f64,
    alpha: f64,
    cos_alpha: f64,
}

impl Patch {
    /// Patch centred at polar angle `theta`, azimuth `phi`, with disc radius `a`.
    pub fn new(theta: f64, phi: f64, a: f64, r_r: f64) -> Result<Self> {
        if !(theta.is_finite() && phi.is_finite()) {
            return Err(invalid("patch angles must be finite"));
        }
        Self::build(theta, phi, Vec3::from_spherical(theta, phi), a, r_r)
    }

    /// Patch centred on `direction`, which must be a unit vector.
    pub fn from_direction(direction: Vec3, a: f64, r_r: f64) -> Result<Self> {
        check_unit(direction)?;
        let center = direction.normalized();
        let (theta, phi) = center.to_spherical();
        Self::build(theta, phi, center, a, r_r)
    }

    fn build(theta: f64, phi: f64, center: Vec3, a: f64, r_r: f64) -> Result<Self> {
        if !(r_r > 0.0 && r_r.is_finite()) {
            return Err(invalid(format!("r_R must be > 0, got {r_r}")));
        }
        if !(a > 0.0 && a < r_r) {
            return Err(invalid(format!("patch radius a = {a} must lie in (0, r_R = {r_r})")));
        }
        let alpha = (a / r_r).asin();
        Ok(Self { theta, phi, center, a, alpha, cos_alpha: alpha.cos() })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn center(&self) -> Vec3 {
        self.center
    }

    /// Disc radius, um.
    pub fn a(&self) -> f64 {
        self.a
    }

    /// Angular radius of the cap, rad.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Membership for an already-normalised direction. Boundary inclusive.
    #[inline]
    pub(crate) fn contains_unit(&self, p: Vec3) -> bool {
        p.dot(self.center) >= self.cos_alpha - 4.0 * f64::EPSILON
    }
}

fn check_unit(p: Vec3) -> Result<()> {
    let n = p.norm();
    if !n.is_finite() || (n - 1.0).abs() > UNIT_TOLERANCE {
        return Err(invalid(format!("expected a unit vector, |p| = {n}")));
    }
    Ok(())
}

/// True iff `p` lies within the patch cap (angle to the centre `<= alpha`).
pub fn point_in_patch(p: Vec3, patch: &Patch) -> Result<bool> {
    check_unit(p)?;
    Ok(patch.contains_unit(p))
}

/// Non-empty set of pairwise non-overlapping patches on one receiver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LayoutFile", into = "LayoutFile")]
pub struct PatchLayout {
    r_r: f64,
    patches: Vec<Patch>,
    coverage: f64,
}

impl PatchLayout {
    /// Validates non-overlap and recomputes coverage.
    pub fn new(r_r: f64, patches: Vec<Patch>) -> Result<Self> {
        if patches.is_empty() {
            return Err(invalid("a layout needs at least one patch"));
        }
        if let Some(p) = patches.iter().find(|p| (p.a / r_r).asin() != p.alpha) {
            return Err(invalid(format!(
                "patch at ({}, {}) was built for a different receiver radius",
                p.theta, p.phi
            )));
        }
        for i in 0..patches.len() {
            for j in i + 1..patches.len() {
                let (pi, pj) = (&patches[i], &patches[j]);
                let sep = pi.center.angle_to(pj.center);
                if sep <= pi.alpha + pj.alpha {
                    return Err(Error::InfeasibleLayout(format!(
                        "patches {} and {} overlap: separation {sep:.6} rad <= {:.6} rad",
                        i + 1,
                        j + 1,
                        pi.alpha + pj.alpha
                    )));
                }
            }
        }
        let coverage = patches.iter().map(|p| p.a * p.a).sum::<f64>() / (4.0 * r_r * r_r);
        Ok(Self { r_r, patches, coverage })
    }

    pub fn r_r(&self) -> f64 {
        self.r_r
    }

    pub fn patches(&self) -> &[Patch] {
        &self.patches
    }

    pub fn len(&self) -> usize {
        self.patches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patches.is_empty()
    }

    /// `sum(a_i^2) / (4 r_R^2)`.
    pub fn coverage(&self) -> f64 {
        self.coverage
    }

    /// True when all radii agree to 1e-12 relative.
    pub fn has_equal_radii(&self) -> bool {
        let a0 = self.patches[0].a;
        self.patches.iter().all(|p| ((p.a - a0) / a0).abs() <= 1e-12)
    }

    /// First patch containing the unit direction `p`, if any.
    #[inline]
    pub fn hit(&self, p: Vec3) -> Option<usize> {
        self.patches.iter().position(|patch| patch.contains_unit(p))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

impl fmt::Display for PatchLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} patch(es) on r_R = {} um, coverage {:.4}",
            self.patches.len(),
            self.r_r,
            self.coverage
        )
    }
}

/// On-disk layout document: `{ "r_R": .., "patches": [{ "theta", "phi", "a" }] }`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LayoutFile {
    #[serde(rename = "r_R")]
    pub r_r: f64,
    pub patches: Vec<PatchDescriptor>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PatchDescriptor {
    pub theta: f64,
    pub phi: f64,
    pub a: f64,
}

impl TryFrom<LayoutFile> for PatchLayout {
    type Error = Error;

    fn try_from(file: LayoutFile) -> Result<Self> {
        explicit_layout(&file.patches, file.r_r)
    }
}

impl From<PatchLayout> for LayoutFile {
    fn from(layout: PatchLayout) -> Self {
        Self {
            r_r: layout.r_r,
            patches: layout
                .patches
                .iter()
                .map(|p| PatchDescriptor { theta: p.theta, phi: p.phi, a: p.a })
                .collect(),
        }
    }
}

fn equal_radius(n_p: usize, coverage: f64, r_r: f64) -> Result<f64> {
    if n_p == 0 {
        return Err(invalid("N_p must be >= 1"));
    }
    if !(coverage > 0.0 && coverage < 1.0) {
        return Err(invalid(format!("coverage must lie in (0, 1), got {coverage}")));
    }
    if !(r_r > 0.0 && r_r.is_finite()) {
        return Err(invalid(format!("r_R must be > 0, got {r_r}")));
    }
    let a = 2.0 * r_r * (coverage / n_p as f64).sqrt();
    if a >= r_r {
        return Err(Error::InfeasibleLayout(format!(
            "equal radius a = {a} um does not fit on r_R = {r_r} um"
        )));
    }
    Ok(a)
}

/// `N_p` equal patches on the Fibonacci lattice
/// `theta_i = pi/2 - asin(2(i - B - 1)/N_p)`, `phi_i = 4 pi (i - B - 1)/(1 + sqrt 5)`,
/// `B = (N_p - 1)/2`, with azimuths reduced to `[0, 2pi)`.
pub fn fibonacci_layout(n_p: usize, coverage: f64, r_r: f64) -> Result<PatchLayout> {
    if n_p.is_multiple_of(2) {
        return Err(invalid(format!("the Fibonacci lattice needs an odd N_p, got {n_p}")));
    }
    let a = equal_radius(n_p, coverage, r_r)?;
    let n = n_p as f64;
    let b = ((n_p - 1) / 2) as f64;
    let golden = 1.0 + 5f64.sqrt();
    let patches = (1..=n_p)
        .map(|i| {
            let k = i as f64 - b - 1.0;
            let theta = PI / 2.0 - (2.0 * k / n).asin();
            let phi = (4.0 * PI * k / golden).rem_euclid(TAU);
            Patch::new(theta, phi, a, r_r)
        })
        .collect::<Result<Vec<_>>>()?;
    PatchLayout::new(r_r, patches)
}

/// Uniform random directions conditioned on non-overlap, by rejection sampling.
pub fn random_layout(n_p: usize, coverage: f64, r_r: f64, seed: u64) -> Result<PatchLayout> {
    let a = equal_radius(n_p, coverage, r_r)?;
    let min_sep = 2.0 * (a / r_r).asin();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers: Vec<Vec3> = Vec::with_capacity(n_p);
    let mut attempts = 0usize;
    while centers.len() < n_p {
        if attempts == MAX_PLACEMENT_ATTEMPTS {
            return Err(Error::InfeasibleLayout(format!(
                "placed {} of {n_p} patches (a = {a:.4} um) after {MAX_PLACEMENT_ATTEMPTS} attempts",
                centers.len()
            )));
        }
        attempts += 1;
        let c = random_unit(&mut rng);
        if centers.iter().all(|&o| o.angle_to(c) > min_sep) {
            centers.push(c);
        }
    }
    let patches = centers
        .into_iter()
        .map(|c| Patch::from_direction(c, a, r_r))
        .collect::<Result<Vec<_>>>()?;
    PatchLayout::new(r_r, patches)
}

/// Equal patches spread evenly over the spherical cap of angular radius
/// `cap_angular_radius` centred at polar angle `cap_center_theta` (azimuth 0).
///
/// Centres follow an equal-area sunflower spiral inside the cap; a single
/// patch sits at the cap centre. Every centre lies within the cap.
pub fn region_layout(
    n_p: usize,
    coverage: f64,
    r_r: f64,
    cap_center_theta: f64,
    cap_angular_radius: f64,
) -> Result<PatchLayout> {
    if !(cap_angular_radius > 0.0 && cap_angular_radius <= PI) {
        return Err(invalid(format!(
            "cap angular radius must lie in (0, pi], got {cap_angular_radius}"
        )));
    }
    if !(0.0..=PI).contains(&cap_center_theta) {
        return Err(invalid(format!("cap centre theta must lie in [0, pi], got {cap_center_theta}")));
    }
    let a = equal_radius(n_p, coverage, r_r)?;
    let (s, c) = cap_center_theta.sin_cos();
    let one_minus_cos = 1.0 - cap_angular_radius.cos();
    let patches = (0..n_p)
        .map(|i| {
            let u = if n_p == 1 { 0.0 } else { (i as f64 + 0.5) / n_p as f64 };
            let local_theta = (1.0 - one_minus_cos * u).clamp(-1.0, 1.0).acos();
            let v = Vec3::from_spherical(local_theta, GOLDEN_ANGLE * i as f64);
            // rotate the local pole onto the cap centre (rotation about y)
            let d = Vec3::new(c * v.x + s * v.z, v.y, -s * v.x + c * v.z);
            Patch::from_direction(d.normalized(), a, r_r)
        })
        .collect::<Result<Vec<_>>>()?;
    PatchLayout::new(r_r, patches)
}

/// Layout exactly as described, in the given order.
pub fn explicit_layout(descriptors: &[PatchDescriptor], r_r: f64) -> Result<PatchLayout> {
    let patches = descriptors
        .iter()
        .map(|d| Patch::new(d.theta, d.phi, d.a, r_r))
        .collect::<Result<Vec<_>>>()?;
    PatchLayout::new(r_r, patches)
}

fn random_unit<R: Rng + ?Sized>(rng: &mut R) -> Vec3 {
    let z: f64 = rng.random_range(-1.0..=1.0);
    let phi: f64 = rng.random_range(0.0..TAU);
    let s = (1.0 - z * z).max(0.0).sqrt();
    Vec3::new(s * phi.cos(), s * phi.sin(), z)
}

/// Transmitter position uniform on the sphere of radius `r_0` around the receiver centre.
pub fn uniform_tx_location<R: Rng + ?Sized>(r_0: f64, rng: &mut R) -> Vec3 {
    random_unit(rng) * r_0
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn fibonacci_single_patch_sits_on_equator() {
        let l = fibonacci_layout(1, 0.05, 10.0).unwrap();
        let p = &l.patches()[0];
        assert_close(p.theta(), PI / 2.0, 1e-15);
        assert_close(p.phi(), 0.0, 1e-15);
        assert_close(p.a(), 2.0 * 10.0 * 0.05f64.sqrt(), 1e-12);
        assert_close(p.a(), 4.4721, 1e-4);
    }

    #[test]
    fn fibonacci_three_patches() {
        let l = fibonacci_layout(3, 0.05, 10.0).unwrap();
        let p = &l.patches()[0];
        // pi/2 + asin(2/3) and (-4 pi / (1 + sqrt 5)) mod 2 pi
        assert_close(p.theta(), 2.300_523_983_021_863, 1e-12);
        assert_close(p.phi(), 2.399_963_229_728_653, 1e-12);
        assert_close(p.a(), 2.5820, 1e-4);
        assert_close(l.coverage(), 0.05, 1e-12);
    }

    #[test]
    fn fibonacci_eleven_patches_do_not_overlap() {
        let l = fibonacci_layout(11, 0.05, 10.0).unwrap();
        assert_eq!(l.len(), 11);
        for p in l.patches() {
            assert_close(p.a(), 1.3484, 1e-4);
        }
        let ps = l.patches();
        for i in 0..ps.len() {
            for j in i + 1..ps.len() {
                assert!(ps[i].center().angle_to(ps[j].center()) > ps[i].alpha() + ps[j].alpha());
            }
        }
    }

    #[test]
    fn fibonacci_rejects_even_count() {
        assert!(matches!(fibonacci_layout(4, 0.05, 10.0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn fibonacci_is_bit_identical() {
        assert_eq!(fibonacci_layout(9, 0.07, 10.0).unwrap(), fibonacci_layout(9, 0.07, 10.0).unwrap());
    }

    #[test]
    fn random_layout_is_valid_and_deterministic() {
        let a = random_layout(13, 0.1, 10.0, 1).unwrap();
        let b = random_layout(13, 0.1, 10.0, 1).unwrap();
        assert_eq!(a, b);
        assert_close(a.coverage(), 0.1, 1e-12);
        assert_ne!(a, random_layout(13, 0.1, 10.0, 2).unwrap());
    }

    #[test]
    fn random_layout_reports_infeasible() {
        let err = random_layout(2, 0.99, 10.0, 1).unwrap_err();
        assert!(matches!(err, Error::InfeasibleLayout(_)), "{err}");
    }

    #[test]
    fn region_layout_single_patch_at_south_pole() {
        let l = region_layout(1, 0.01, 10.0, PI, 0.5).unwrap();
        assert!(l.patches()[0].center().angle_to(Vec3::new(0.0, 0.0, -1.0)) < 1e-12);
    }

    #[test]
    fn region_layout_keeps_centres_in_cap() {
        let south = Vec3::new(0.0, 0.0, -1.0);
        let l = region_layout(13, 0.1, 10.0, PI, 1.0).unwrap();
        assert_close(l.coverage(), 0.1, 1e-12);
        for p in l.patches() {
            assert!(p.center().angle_to(south) <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn region_layout_rejects_small_region() {
        assert!(matches!(region_layout(13, 0.1, 10.0, PI, 0.05), Err(Error::InfeasibleLayout(_))));
    }

    #[test]
    fn region_layout_narrow_cap_cannot_hold_thirteen_patches() {
        // 13 caps of angular radius 0.176 need pairwise centre separation > 0.353 rad,
        // which a cap of radius 0.3295 cannot provide.
        assert!(matches!(
            region_layout(13, 0.1, 10.0, PI, 0.3295),
            Err(Error::InfeasibleLayout(_))
        ));
    }

    fn four_patch() -> Vec<PatchDescriptor> {
        [(0.01, PI), (0.02, PI / 2.0), (0.03, 0.0), (0.04, 1.5 * PI)]
            .iter()
            .map(|&(ap, phi)| PatchDescriptor { theta: PI / 2.0, phi, a: 2.0 * 10.0 * f64::sqrt(ap) })
            .collect()
    }

    #[test]
    fn explicit_heterogeneous_layout() {
        let l = explicit_layout(&four_patch(), 10.0).unwrap();
        assert_close(l.coverage(), 0.1, 1e-12);
        assert!(!l.has_equal_radii());
    }

    #[test]
    fn explicit_antipodal_and_coincident() {
        let d = |theta| PatchDescriptor { theta, phi: 0.0, a: 1.0 };
        assert!(explicit_layout(&[d(0.0), d(PI)], 10.0).is_ok());
        assert!(matches!(explicit_layout(&[d(1.0), d(1.0)], 10.0), Err(Error::InfeasibleLayout(_))));
        assert!(matches!(
            explicit_layout(&[PatchDescriptor { theta: 0.0, phi: 0.0, a: 10.0 }], 10.0),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn empty_layout_is_rejected() {
        assert!(PatchLayout::new(10.0, vec![]).is_err());
    }

    #[test]
    fn membership_basics() {
        let patch = Patch::new(0.7, 1.3, 2.0, 10.0).unwrap();
        assert!(point_in_patch(patch.center(), &patch).unwrap());
        assert!(!point_in_patch(-patch.center(), &patch).unwrap());
        assert!(point_in_patch(Vec3::new(2.0, 0.0, 0.0), &patch).is_err());
        // exactly on the rim
        let c = patch.center();
        let perp = c.cross(Vec3::new(0.0, 0.0, 1.0)).normalized();
        let rim = c * patch.alpha().cos() + perp * patch.alpha().sin();
        assert!(point_in_patch(rim, &patch).unwrap());
    }

    #[test]
    fn membership_agrees_with_angle_on_dense_rim() {
        let patch = Patch::new(1.1, 4.0, 1.5, 10.0).unwrap();
        let c = patch.center();
        let e1 = c.cross(Vec3::new(0.3, -0.2, 0.9).normalized()).normalized();
        let e2 = c.cross(e1);
        let mut disagreements = 0;
        for k in 0..10_000 {
            let psi = TAU * k as f64 / 10_000.0;
            // offsets straddling the rim, 1e-9 rad outside the tie band
            for off in [-2e-9, 2e-9] {
                let ang = patch.alpha() + off;
                let dir = c * ang.cos() + (e1 * psi.cos() + e2 * psi.sin()) * ang.sin();
                let brute = dir.angle_to(c) <= patch.alpha();
                if brute != point_in_patch(dir, &patch).unwrap() {
                    disagreements += 1;
                }
            }
        }
        assert_eq!(disagreements, 0);
    }

    #[test]
    fn tx_location_radius_and_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut sum = Vec3::default();
        for _ in 0..100_000 {
            let p = uniform_tx_location(20.0, &mut rng);
            assert!((p.norm() - 20.0).abs() < 1e-9);
            sum = sum + p;
        }
        assert!((sum * (1.0 / 100_000.0)).norm() < 0.3);
        let mut a = ChaCha8Rng::seed_from_u64(3);
        let mut b = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            assert_eq!(uniform_tx_location(5.0, &mut a), uniform_tx_location(5.0, &mut b));
        }
    }

    #[test]
    fn layout_json_schema() {
        let l = explicit_layout(&four_patch(), 10.0).unwrap();
        let v: serde_json::Value = serde_json::from_str(&l.to_json().unwrap()).unwrap();
        assert_eq!(v["r_R"], 10.0);
        assert_eq!(v["patches"].as_array().unwrap().len(), 4);
        assert!(v["patches"][0]["theta"].is_number());
        assert_eq!(PatchLayout::from_json(&l.to_json().unwrap()).unwrap(), l);
        let overlapping = r#"{"r_R": 10, "patches": [{"theta": 1, "phi": 0, "a": 1}, {"theta": 1, "phi": 0, "a": 1}]}"#;
        assert!(PatchLayout::from_json(overlapping).is_err());
    }

    #[test]
    fn params_validation() {
        assert!(ChannelParams::baseline().validate().is_ok());
        assert!(ChannelParams::new(79.4, 0.8, 10.0, 9.0, 1000).is_err());
        assert!(ChannelParams::new(0.0, 0.8, 10.0, 20.0, 1000).is_err());
        assert!(ChannelParams::new(79.4, -1.0, 10.0, 20.0, 1000).is_err());
        assert!(ChannelParams::new(79.4, 0.0, 10.0, 20.0, 0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn generated_layouts_hold_invariants(
            half in 0usize..8,
            coverage in 0.01f64..0.2,
            seed in any::<u64>(),
        ) {
            let n_p = 2 * half + 1;
            let fib = fibonacci_layout(n_p, coverage, 10.0);
            let rnd = random_layout(n_p, coverage, 10.0, seed);
            for layout in [fib, rnd].into_iter().flatten() {
                prop_assert!((layout.coverage() - coverage).abs() < 1e-12);
                let ps = layout.patches();
                for i in 0..ps.len() {
                    for j in i + 1..ps.len() {
                        prop_assert!(ps[i].center().angle_to(ps[j].center()) > ps[i].alpha() + ps[j].alpha());
                    }
                }
            }
        }
    }
}
