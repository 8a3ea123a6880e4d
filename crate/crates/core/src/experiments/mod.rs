//! Figure-style sweeps over layouts and channel parameters.
//!
//! Each run produces named CSV documents plus a list of trend checks. Failed
//! checks are reported, not raised; [`FigureReport::ensure`] turns them into
//! an error so command-line runs can exit non-zero.

mod figures;
mod svg;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cir::{multi_patch_cir, TimeGrid};
use crate::error::{invalid, Error, Result};
use crate::geometry::{
    explicit_layout, fibonacci_layout, random_layout, region_layout, ChannelParams, PatchDescriptor, PatchLayout,
};
use crate::pbs::{simulate, AbsorptionMode, SimConfig};

pub use figures::{
    four_patch_descriptors, run_fig2, run_fig3, run_fig4, Fig2Preset, Fig3Preset, Fig4Preset, PbsOverlay,
};
pub use svg::{render_svg, SvgStyle};

/// Bumped whenever a CSV header or column order changes.
pub const CSV_SCHEMA_VERSION: u32 = 1;

/// Formats a number for CSV output: plain decimal in `[1e-4, 1e15)`,
/// exponent notation otherwise.
pub fn fmt_num(x: f64) -> String {
    let ax = x.abs();
    if x == 0.0 {
        "0".to_string()
    } else if (1e-4..1e15).contains(&ax) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Simulation knobs that presets may override.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimSettings {
    pub dt: f64,
    pub t_end: f64,
    pub realizations: u64,
    pub seed: u64,
    pub bin_width: f64,
}

impl Default for SimSettings {
    fn default() -> Self {
        Self { dt: 1e-5, t_end: 1.0, realizations: 200, seed: 1, bin_width: 0.01 }
    }
}

impl SimSettings {
    /// `dt = 1e-6 s` and 1000 realizations.
    pub fn paper_scale(self) -> Self {
        Self { dt: 1e-6, realizations: 1000, ..self }
    }

    pub fn config(&self, params: ChannelParams, layout: PatchLayout) -> SimConfig {
        SimConfig {
            dt: self.dt,
            t_end: self.t_end,
            realizations: self.realizations,
            seed: self.seed,
            bin_width: self.bin_width,
            params,
            layout,
            mode: AbsorptionMode::Patches,
            far_field_jumps: true,
        }
    }
}

/// How to build a layout. The receiver radius comes from the channel parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "lowercase")]
pub enum LayoutRecipe {
    Fibonacci {
        n_p: usize,
        coverage: f64,
    },
    Random {
        n_p: usize,
        coverage: f64,
        seed: u64,
    },
    Region {
        n_p: usize,
        coverage: f64,
        cap_center_theta: f64,
        cap_angular_radius: f64,
    },
    Explicit {
        patches: Vec<PatchDescriptor>,
    },
}

impl LayoutRecipe {
    pub fn build(&self, r_r: f64) -> Result<PatchLayout> {
        match self {
            Self::Fibonacci { n_p, coverage } => fibonacci_layout(*n_p, *coverage, r_r),
            Self::Random { n_p, coverage, seed } => random_layout(*n_p, *coverage, r_r, *seed),
            Self::Region { n_p, coverage, cap_center_theta, cap_angular_radius } => {
                region_layout(*n_p, *coverage, r_r, *cap_center_theta, *cap_angular_radius)
            }
            Self::Explicit { patches } => explicit_layout(patches, r_r),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Outputs {
    /// Directory for CSV files; nothing is written when absent.
    pub csv_dir: Option<PathBuf>,
    /// Also render an SVG next to each wide CSV.
    pub svg: bool,
}

/// A single-layout run: analytic curves and, optionally, a simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPreset {
    pub name: String,
    pub layout: LayoutRecipe,
    pub params: ChannelParams,
    pub time_grid: TimeGrid,
    #[serde(default)]
    pub sim: Option<SimSettings>,
    #[serde(default)]
    pub outputs: Outputs,
}

impl ExperimentPreset {
    pub fn from_json(s: &str) -> Result<Self> {
        let preset: Self = serde_json::from_str(s)?;
        preset.params.validate()?;
        Ok(preset)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Outcome of one trend or agreement check.
#[derive(Debug, Clone, PartialEq)]
pub struct TrendCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl TrendCheck {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed, detail: detail.into() }
    }
}

/// Named CSV documents and the checks evaluated while producing them.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FigureReport {
    pub name: String,
    /// `(file name, contents)`.
    pub files: Vec<(String, String)>,
    pub checks: Vec<TrendCheck>,
}

impl FigureReport {
    pub fn file(&self, name: &str) -> Option<&str> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, c)| c.as_str())
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// Errors with the first failed check.
    pub fn ensure(&self) -> Result<()> {
        match self.checks.iter().find(|c| !c.passed) {
            Some(c) => Err(Error::TrendViolation(format!("{}: {}", c.name, c.detail))),
            None => Ok(()),
        }
    }

    /// `check,passed,detail`.
    pub fn checks_csv(&self) -> String {
        let mut out = String::from("check,passed,detail\n");
        for c in &self.checks {
            let _ = writeln!(out, "{},{},\"{}\"", c.name, c.passed, c.detail.replace('"', "'"));
        }
        out
    }

    /// Writes every CSV, the checks table and (when asked) one SVG per wide CSV.
    pub fn write_to(&self, dir: &Path, svg: bool) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        for (name, contents) in &self.files {
            let path = dir.join(name);
            fs::write(&path, contents)?;
            written.push(path);
            if svg && is_wide_series(name) {
                let style = SvgStyle { title: name.trim_end_matches(".csv").to_string(), ..SvgStyle::default() };
                let path = dir.join(name.replace(".csv", ".svg"));
                fs::write(&path, render_svg(contents, &style)?)?;
                written.push(path);
            }
        }
        let path = dir.join(format!("{}_checks.csv", self.name));
        fs::write(&path, self.checks_csv())?;
        written.push(path);
        Ok(written)
    }
}

fn is_wide_series(name: &str) -> bool {
    name.ends_with("_rate.csv") || name.ends_with("_cumulative.csv") || name.ends_with("_we.csv")
}

/// Analytic CSV: `t,h_p,Nsigma_h_p,H_p,Nsigma_H_p`, then `# G_p=.. w_e=.. H_p_inf=..`.
pub fn analytic_csv(times: &[f64], layout: &PatchLayout, params: &ChannelParams) -> Result<String> {
    let cir = multi_patch_cir(times, layout, params)?;
    let n = params.n_sigma as f64;
    let mut out = String::from("t,h_p,Nsigma_h_p,H_p,Nsigma_H_p\n");
    for ((&t, &h), &cum) in cir.times.iter().zip(&cir.hitting_rate).zip(&cir.cumulative) {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            fmt_num(t),
            fmt_num(h),
            fmt_num(n * h),
            fmt_num(cum),
            fmt_num(n * cum)
        );
    }
    let _ = writeln!(
        out,
        "# G_p={} w_e={} H_p_inf={}",
        fmt_num(cir.channel.g_p()),
        fmt_num(cir.channel.w_e),
        fmt_num(cir.asymptotic)
    );
    Ok(out)
}

/// Runs a single-layout preset. Output files: `<name>_analytic.csv` and,
/// with simulation settings, `<name>_simulate.csv`.
pub fn run_preset(preset: &ExperimentPreset) -> Result<FigureReport> {
    preset.params.validate()?;
    let layout = preset.layout.build(preset.params.r_r)?;
    let times = preset.time_grid.points()?;
    let mut report = FigureReport { name: preset.name.clone(), ..FigureReport::default() };
    report
        .files
        .push((format!("{}_analytic.csv", preset.name), analytic_csv(&times, &layout, &preset.params)?));
    if let Some(sim) = &preset.sim {
        let stats = simulate(&sim.config(preset.params, layout))?;
        report.files.push((format!("{}_simulate.csv", preset.name), stats.to_csv()));
    }
    if preset.name.is_empty() {
        return Err(invalid("preset name must not be empty"));
    }
    Ok(report)
}
