//! Channel impulse response of a spherical receiver covered by
//! non-overlapping absorbing patches of arbitrary size and position.
//!
//! Two independent routes are provided:
//!
//! * [`cir`] evaluates closed-form hitting rates and absorbed fractions for a
//!   uniformly reactive sphere, and applies them to a patchy receiver through
//!   the effective surface rate computed in [`capacitance`].
//! * [`pbs`] is a Brownian-dynamics simulator that absorbs molecules only on
//!   the patches themselves and reflects them elsewhere.
//!
//! Layout generators live in [`geometry`]; figure-style sweeps, CSV output and
//! SVG plots in [`experiments`].

pub mod capacitance;
pub mod cir;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod pbs;
pub mod special;

mod quad;

pub use capacitance::{
    capacitance, capacitance_full_sphere, capacitance_general, capacitance_identical, capacitance_single,
    diffusion_current, effective_rate, pair_interaction, Capacitance, CapacitanceModel, EffectiveChannel,
};
pub use cir::{
    asymptotic_fraction_uniform, cumulative_fraction_uniform, hitting_rate_uniform, multi_patch_cir,
    DerivedCoefficients, MultiPatchCir, TimeGrid,
};
pub use error::{Error, Result};
pub use geometry::{
    explicit_layout, fibonacci_layout, point_in_patch, random_layout, region_layout, uniform_tx_location,
    ChannelParams, Patch, PatchDescriptor, PatchLayout, Vec3,
};
pub use pbs::{simulate, AbsorptionMode, HittingStats, SimConfig};
