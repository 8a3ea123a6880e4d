//! Particle-based Brownian-dynamics simulation of the patchy receiver.
//!
//! Each realization places the transmitter uniformly on the sphere of radius
//! `r_0` and releases `N_sigma` molecules there. Every step a surviving
//! molecule
//!
//! 1. degrades with probability `1 - exp(-k_d dt)`,
//! 2. moves by an isotropic Gaussian displacement with per-axis standard
//!    deviation `sqrt(2 D dt)`,
//! 3. if the move ends inside the receiver, is absorbed when the first
//!    crossing of the step segment with the sphere lies on a patch, and
//!    otherwise returns to where the step started.
//!
//! The per-step degradation test is realised by drawing the molecule's
//! exponential lifetime once: a molecule with lifetime `T` completes exactly
//! `floor(T / dt)` moves before it degrades, which has the same geometric
//! distribution as independent per-step trials.
//!
//! Far from the receiver, `k` consecutive steps are drawn as one Gaussian
//! displacement of variance `k sigma^2` (exact for the endpoint). `k` is
//! bounded so that any of the skipped intermediate positions could have
//! entered the sphere with probability below 4e-13: entering needs a
//! displacement of at least the surface distance `delta`, and by Levy's
//! inequality per axis this happens with probability at most
//! `12 Q(delta / (sigma sqrt(3 k)))`. Set [`SimConfig::far_field_jumps`] to
//! `false` to walk every step.
//!
//! Realization `i` draws from ChaCha8 stream `i` of the configured seed, so
//! results do not depend on how realizations are scheduled across workers.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::geometry::{uniform_tx_location, ChannelParams, PatchLayout, Vec3};

/// Environment variable capping simulation workers.
pub const THREADS_ENV: &str = "PATCHYRX_THREADS";

/// What happens when a step ends inside the receiver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AbsorptionMode {
    /// Absorb on patches, reflect elsewhere.
    #[default]
    Patches,
    /// Every hit absorbs (fully absorbing receiver).
    FullSphere,
    /// Nothing absorbs.
    ReflectOnly,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Time step, s.
    pub dt: f64,
    /// Horizon, s.
    pub t_end: f64,
    pub realizations: u64,
    pub seed: u64,
    /// Histogram bin width, s.
    pub bin_width: f64,
    pub params: ChannelParams,
    pub layout: PatchLayout,
    pub mode: AbsorptionMode,
    /// Aggregate steps far from the receiver (see module docs).
    pub far_field_jumps: bool,
}

impl SimConfig {
    /// Desk-scale defaults: `dt = 1e-5 s`, 200 realizations, 10 ms bins.
    pub fn new(params: ChannelParams, layout: PatchLayout, t_end: f64) -> Self {
        Self {
            dt: 1e-5,
            t_end,
            realizations: 200,
            seed: 1,
            bin_width: 0.01,
            params,
            layout,
            mode: AbsorptionMode::Patches,
            far_field_jumps: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(invalid(format!("dt must be > 0, got {}", self.dt)));
        }
        if !(self.t_end >= self.dt && self.t_end.is_finite()) {
            return Err(invalid(format!("t_end = {} must be >= dt = {}", self.t_end, self.dt)));
        }
        if !(self.bin_width >= self.dt && self.bin_width.is_finite()) {
            return Err(invalid(format!("bin_width = {} must be >= dt = {}", self.bin_width, self.dt)));
        }
        if self.realizations < 1 {
            return Err(invalid("realizations must be >= 1"));
        }
        if (self.layout.r_r() - self.params.r_r).abs() > 1e-12 * self.params.r_r {
            return Err(invalid(format!(
                "layout r_R = {} disagrees with params r_R = {}",
                self.layout.r_r(),
                self.params.r_r
            )));
        }
        Ok(())
    }

    fn n_steps(&self) -> u64 {
        (self.t_end / self.dt).round() as u64
    }

    fn n_bins(&self) -> usize {
        ((self.n_steps() as f64 * self.dt / self.bin_width).ceil() as usize).max(1)
    }
}

/// Binned absorption counts accumulated over all realizations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HittingStats {
    /// `n_bins + 1` edges, s.
    pub bin_edges: Vec<f64>,
    pub hit_counts: Vec<u64>,
    /// Sum over realizations of squared per-bin counts.
    pub hit_counts_sq: Vec<u64>,
    /// Sum over realizations of squared cumulative counts at each bin's upper edge.
    pub cumulative_sq: Vec<u64>,
    pub degraded_count: u64,
    pub survivors: u64,
    pub realizations: u64,
    pub n_sigma: u64,
}

impl HittingStats {
    fn empty(edges: Vec<f64>, n_sigma: u64) -> Self {
        let n = edges.len() - 1;
        Self {
            bin_edges: edges,
            hit_counts: vec![0; n],
            hit_counts_sq: vec![0; n],
            cumulative_sq: vec![0; n],
            degraded_count: 0,
            survivors: 0,
            realizations: 0,
            n_sigma,
        }
    }

    fn absorb_realization(&mut self, run: &RealizationCounts) {
        let mut running = 0u64;
        for (b, &h) in run.hits.iter().enumerate() {
            running += h;
            self.hit_counts[b] += h;
            self.hit_counts_sq[b] += h * h;
            self.cumulative_sq[b] += running * running;
        }
        self.degraded_count += run.degraded;
        self.survivors += run.survivors;
        self.realizations += 1;
    }

    pub fn total_molecules(&self) -> u64 {
        self.realizations * self.n_sigma
    }

    pub fn total_hits(&self) -> u64 {
        self.hit_counts.iter().sum()
    }

    pub fn bin_width(&self, b: usize) -> f64 {
        self.bin_edges[b + 1] - self.bin_edges[b]
    }

    /// `(upper bin edge, fraction absorbed by then)`.
    pub fn cumulative(&self) -> Vec<(f64, f64)> {
        let total = self.total_molecules() as f64;
        let mut running = 0u64;
        self.hit_counts
            .iter()
            .enumerate()
            .map(|(b, &h)| {
                running += h;
                (self.bin_edges[b + 1], running as f64 / total)
            })
            .collect()
    }

    /// Fraction absorbed by the last bin edge not after `t`.
    pub fn cumulative_at(&self, t: f64) -> f64 {
        let tol = 1e-9 * self.bin_edges.last().copied().unwrap_or(1.0);
        self.cumulative()
            .into_iter()
            .take_while(|&(edge, _)| edge <= t + tol)
            .last()
            .map_or(0.0, |(_, h)| h)
    }

    /// Standard error of the absorbed fraction at each upper bin edge,
    /// estimated from the spread between realizations.
    pub fn cumulative_standard_error(&self) -> Vec<f64> {
        let r = self.realizations as f64;
        let n = self.n_sigma as f64;
        let mut running = 0u64;
        self.hit_counts
            .iter()
            .zip(&self.cumulative_sq)
            .map(|(&h, &sq)| {
                running += h;
                sample_se(running as f64, sq as f64, r) / n
            })
            .collect()
    }

    /// `(bin midpoint, absorbed molecules per realization per second)`,
    /// comparable to `N_sigma h_p(t_mid)`.
    pub fn empirical_hitting_rate(&self) -> Vec<(f64, f64)> {
        let r = self.realizations as f64;
        self.hit_counts
            .iter()
            .enumerate()
            .map(|(b, &h)| {
                let mid = 0.5 * (self.bin_edges[b] + self.bin_edges[b + 1]);
                (mid, h as f64 / (r * self.bin_width(b)))
            })
            .collect()
    }

    /// Standard error of each bin's empirical rate.
    pub fn hitting_rate_standard_error(&self) -> Vec<f64> {
        let r = self.realizations as f64;
        self.hit_counts
            .iter()
            .zip(&self.hit_counts_sq)
            .enumerate()
            .map(|(b, (&h, &sq))| sample_se(h as f64, sq as f64, r) / self.bin_width(b))
            .collect()
    }

    /// `t_mid,empirical_rate,empirical_cumulative`, then `# degraded=.. survivors=..`.
    ///
    /// `empirical_cumulative` is the fraction absorbed by the end of the bin.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t_mid,empirical_rate,empirical_cumulative\n");
        for ((t, rate), (_, cum)) in self.empirical_hitting_rate().into_iter().zip(self.cumulative()) {
            let _ = writeln!(out, "{t},{rate},{cum}");
        }
        let _ = writeln!(out, "# degraded={} survivors={}", self.degraded_count, self.survivors);
        out
    }
}

/// Standard error of a per-realization mean from its sum and sum of squares.
fn sample_se(sum: f64, sum_sq: f64, r: f64) -> f64 {
    if r < 2.0 {
        return 0.0;
    }
    let mean = sum / r;
    let var = ((sum_sq / r - mean * mean) * r / (r - 1.0)).max(0.0);
    (var / r).sqrt()
}

/// Entry parameter `lambda` in `[0, 1]` and unit direction of the first
/// crossing of segment `start -> end` with the sphere of radius `r_r`.
pub fn segment_sphere_entry(start: Vec3, end: Vec3, r_r: f64) -> Option<(f64, Vec3)> {
    let d = end - start;
    let a = d.norm_sq();
    if a == 0.0 {
        return None;
    }
    let b = 2.0 * start.dot(d);
    let c = start.norm_sq() - r_r * r_r;
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return None;
    }
    // roots q/a and c/q, free of cancellation
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    let (r1, r2) = if q == 0.0 { (0.0, 0.0) } else { (q / a, c / q) };
    let lambda = r1.min(r2);
    if !(0.0..=1.0).contains(&lambda) {
        return None;
    }
    let hit = start + d * lambda;
    Some((lambda, hit.normalized()))
}

/// Unit direction where a step first meets the receiver surface, if it does.
pub fn absorbed_location_check(step_start: Vec3, step_end: Vec3, r_r: f64) -> Option<Vec3> {
    segment_sphere_entry(step_start, step_end, r_r).map(|(_, p)| p)
}

#[derive(Debug, Clone)]
struct RealizationCounts {
    hits: Vec<u64>,
    degraded: u64,
    survivors: u64,
}

fn run_realization(cfg: &SimConfig, index: u64, n_steps: u64, n_bins: usize) -> RealizationCounts {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index);

    let p = &cfg.params;
    let tx = uniform_tx_location(p.r_0, &mut rng);
    let sigma = (2.0 * p.d_sigma * cfg.dt).sqrt();
    let r2 = p.r_r * p.r_r;
    let lifetime = (p.k_d > 0.0).then(|| Exp::new(p.k_d).expect("k_d > 0"));
    let steps_per_bin = cfg.bin_width / cfg.dt;

    let mut counts = RealizationCounts { hits: vec![0; n_bins], degraded: 0, survivors: 0 };
    for _ in 0..p.n_sigma {
        let moves = match &lifetime {
            Some(exp) => {
                let t: f64 = exp.sample(&mut rng);
                let k = (t / cfg.dt).floor();
                if k >= n_steps as f64 { u64::MAX } else { k as u64 }
            }
            None => u64::MAX,
        };
        let limit = moves.min(n_steps);
        match walk(cfg, tx, limit, sigma, r2, &mut rng) {
            Some(step) => {
                let bin = ((step as f64 + 0.5) / steps_per_bin) as usize;
                counts.hits[bin.min(n_bins - 1)] += 1;
            }
            None if moves < n_steps => counts.degraded += 1,
            None => counts.survivors += 1,
        }
    }
    counts
}

/// `(7.5)^2 * 3`: squared surface distance, in units of the step deviation,
/// per aggregated step.
const JUMP_SAFETY: f64 = 168.75;

/// Walks one molecule for at most `limit` steps; returns the absorbing step.
#[inline]
fn walk(cfg: &SimConfig, start: Vec3, limit: u64, sigma: f64, r2: f64, rng: &mut ChaCha8Rng) -> Option<u64> {
    let r_r = cfg.params.r_r;
    let inv_jump = 1.0 / (JUMP_SAFETY * sigma * sigma);
    let mut pos = start;
    let mut step = 0u64;
    while step < limit {
        let mut k = 1u64;
        if cfg.far_field_jumps {
            let delta = pos.norm() - r_r;
            let allowed = delta * delta * inv_jump;
            if allowed >= 2.0 {
                k = (allowed as u64).min(limit - step);
            }
        }
        let scale = if k == 1 { sigma } else { sigma * (k as f64).sqrt() };
        let dx: f64 = rng.sample(StandardNormal);
        let dy: f64 = rng.sample(StandardNormal);
        let dz: f64 = rng.sample(StandardNormal);
        let next = Vec3::new(pos.x + scale * dx, pos.y + scale * dy, pos.z + scale * dz);
        // an aggregated move is charged to its last step
        step += k;
        if next.norm_sq() >= r2 {
            pos = next;
            continue;
        }
        let step = step - 1;
        match cfg.mode {
            AbsorptionMode::FullSphere => return Some(step),
            AbsorptionMode::ReflectOnly => {}
            AbsorptionMode::Patches => {
                let dir = absorbed_location_check(pos, next, r_r).unwrap_or_else(|| next.normalized());
                if cfg.layout.hit(dir).is_some() {
                    return Some(step);
                }
            }
        }
    }
    None
}

/// Worker count from `PATCHYRX_THREADS`, if set to a positive integer.
pub fn threads_from_env() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.trim().parse().ok().filter(|&n| n > 0)
}

/// Runs the simulation with the worker cap from `PATCHYRX_THREADS` (or all cores).
pub fn simulate(config: &SimConfig) -> Result<HittingStats> {
    simulate_with_workers(config, threads_from_env())
}

/// Runs the simulation on `workers` threads. The result is identical for any
/// worker count.
pub fn simulate_with_workers(config: &SimConfig, workers: Option<usize>) -> Result<HittingStats> {
    config.validate()?;
    let n_steps = config.n_steps();
    let n_bins = config.n_bins();
    let edges = (0..=n_bins).map(|b| b as f64 * config.bin_width).collect();

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| invalid(format!("cannot start worker pool: {e}")))?;
    let runs: Vec<RealizationCounts> = pool.install(|| {
        (0..config.realizations)
            .into_par_iter()
            .map(|i| run_realization(config, i, n_steps, n_bins))
            .collect()
    });

    let mut stats = HittingStats::empty(edges, config.params.n_sigma);
    for run in &runs {
        stats.absorb_realization(run);
    }
    log::debug!(
        "simulated {} realizations: {} absorbed, {} degraded, {} surviving",
        stats.realizations,
        stats.total_hits(),
        stats.degraded_count,
        stats.survivors
    );
    Ok(stats)
}
