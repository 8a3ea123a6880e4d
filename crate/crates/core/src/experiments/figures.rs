use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{fmt_num, FigureReport, LayoutRecipe, SimSettings, TrendCheck};
use crate::capacitance::{capacitance, effective_rate, CapacitanceModel};
use crate::cir::{cumulative_fraction_uniform, multi_patch_cir, MultiPatchCir, TimeGrid};
use crate::error::{invalid, Result};
use crate::geometry::{ChannelParams, PatchDescriptor, PatchLayout};
use crate::pbs::{simulate, HittingStats};

/// Simulated overlay compared against the analytic curve of one layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PbsOverlay {
    pub layout: LayoutRecipe,
    #[serde(default)]
    pub sim: SimSettings,
    /// Times at which absorbed fractions are compared, s.
    pub checkpoints: Vec<f64>,
    /// Allowed relative deviation from the analytic fraction.
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig2Preset {
    pub name: String,
    pub params: ChannelParams,
    pub coverage: f64,
    pub n_p: Vec<usize>,
    pub time_grid: TimeGrid,
    /// Time at which `N_sigma H_p` must increase with `N_p`, s.
    pub trend_time: f64,
    #[serde(default)]
    pub pbs: Option<PbsOverlay>,
}

impl Default for Fig2Preset {
    fn default() -> Self {
        Self {
            name: "fig2".into(),
            params: ChannelParams::baseline(),
            coverage: 0.05,
            n_p: vec![1, 3, 5, 7, 9, 11],
            time_grid: TimeGrid::linear(0.01, 2.0, 200),
            trend_time: 2.0,
            pbs: Some(PbsOverlay {
                layout: LayoutRecipe::Fibonacci { n_p: 11, coverage: 0.05 },
                sim: SimSettings::default(),
                checkpoints: vec![0.25, 0.5, 1.0],
                tolerance: 0.1,
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig3Preset {
    pub name: String,
    pub params: ChannelParams,
    pub coverage: f64,
    pub n_p: usize,
    pub random_seeds: Vec<u64>,
    pub region_center_theta: f64,
    pub region_angular_radius: f64,
    /// Explicit layout run alongside the generated ones.
    pub heterogeneous: Vec<PatchDescriptor>,
    pub time_grid: TimeGrid,
    /// Times at which `even > random > region` must hold, s.
    pub checkpoints: Vec<f64>,
    #[serde(default)]
    pub pbs: Option<PbsOverlay>,
}

/// Four patches on the equator with areas 0.01, 0.02, 0.03 and 0.04 of the
/// sphere, for `r_R = 10`.
pub fn four_patch_descriptors(r_r: f64) -> Vec<PatchDescriptor> {
    [(0.01, PI), (0.02, PI / 2.0), (0.03, 0.0), (0.04, 1.5 * PI)]
        .iter()
        .map(|&(area, phi)| PatchDescriptor { theta: PI / 2.0, phi, a: 2.0 * r_r * f64::sqrt(area) })
        .collect()
}

impl Default for Fig3Preset {
    fn default() -> Self {
        let params = ChannelParams::baseline();
        let heterogeneous = four_patch_descriptors(params.r_r);
        Self {
            name: "fig3".into(),
            params,
            coverage: 0.1,
            n_p: 13,
            random_seeds: vec![1, 2, 3, 4, 5],
            region_center_theta: PI,
            region_angular_radius: 1.0,
            heterogeneous: heterogeneous.clone(),
            time_grid: TimeGrid::linear(0.01, 2.0, 200),
            checkpoints: vec![0.5],
            pbs: Some(PbsOverlay {
                layout: LayoutRecipe::Explicit { patches: heterogeneous },
                sim: SimSettings::default(),
                checkpoints: vec![0.25, 0.5, 1.0],
                tolerance: 0.1,
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig4Preset {
    pub name: String,
    pub coverage: f64,
    pub n_p: Vec<usize>,
    pub r_r: Vec<f64>,
    pub d_sigma: Vec<f64>,
}

impl Default for Fig4Preset {
    fn default() -> Self {
        Self {
            name: "fig4".into(),
            coverage: 0.05,
            n_p: vec![1, 3, 5, 7, 9, 11],
            r_r: vec![5.0, 10.0],
            d_sigma: vec![79.4, 158.8],
        }
    }
}

macro_rules! impl_json {
    ($($t:ty),*) => {$(
        impl $t {
            pub fn from_json(s: &str) -> Result<Self> {
                Ok(serde_json::from_str(s)?)
            }

            pub fn to_json(&self) -> Result<String> {
                Ok(serde_json::to_string_pretty(self)?)
            }
        }
    )*};
}

impl_json!(Fig2Preset, Fig3Preset, Fig4Preset);

/// Wide CSV with a leading `t` column and one column per series.
fn wide_csv(times: &[f64], labels: &[String], columns: &[Vec<f64>]) -> String {
    let mut out = String::from("t");
    for l in labels {
        out.push(',');
        out.push_str(l);
    }
    out.push('\n');
    for (i, &t) in times.iter().enumerate() {
        out.push_str(&fmt_num(t));
        for col in columns {
            out.push(',');
            out.push_str(&fmt_num(col[i]));
        }
        out.push('\n');
    }
    out
}

fn curve_files(name: &str, labels: &[String], curves: &[MultiPatchCir], n_sigma: f64) -> Vec<(String, String)> {
    let times = &curves[0].times;
    let rates: Vec<Vec<f64>> = curves.iter().map(|c| c.hitting_rate.iter().map(|h| n_sigma * h).collect()).collect();
    let cumul: Vec<Vec<f64>> = curves.iter().map(|c| c.cumulative.iter().map(|h| n_sigma * h).collect()).collect();
    vec![
        (format!("{name}_rate.csv"), wide_csv(times, labels, &rates)),
        (format!("{name}_cumulative.csv"), wide_csv(times, labels, &cumul)),
    ]
}

/// Per-bin comparison of a simulation with the analytic curve, both scaled by `N_sigma`.
fn overlay_csv(stats: &HittingStats, layout: &PatchLayout, params: &ChannelParams) -> Result<String> {
    let mids: Vec<f64> = stats.empirical_hitting_rate().iter().map(|&(t, _)| t).collect();
    let uppers: Vec<f64> = stats.bin_edges[1..].to_vec();
    let at_mid = multi_patch_cir(&mids, layout, params)?;
    let at_upper = multi_patch_cir(&uppers, layout, params)?;
    let n = params.n_sigma as f64;
    let rate = stats.empirical_hitting_rate();
    let rate_se = stats.hitting_rate_standard_error();
    let cum = stats.cumulative();
    let cum_se = stats.cumulative_standard_error();
    let mut out = String::from(
        "t_mid,analytic_rate,pbs_rate,pbs_rate_se,t_upper,analytic_cumulative,pbs_cumulative,pbs_cumulative_se\n",
    );
    for b in 0..mids.len() {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            fmt_num(mids[b]),
            fmt_num(n * at_mid.hitting_rate[b]),
            fmt_num(rate[b].1),
            fmt_num(rate_se[b]),
            fmt_num(uppers[b]),
            fmt_num(n * at_upper.cumulative[b]),
            fmt_num(n * cum[b].1),
            fmt_num(n * cum_se[b])
        );
    }
    Ok(out)
}

fn run_overlay(
    name: &str,
    overlay: &PbsOverlay,
    params: &ChannelParams,
    report: &mut FigureReport,
) -> Result<HittingStats> {
    let layout = overlay.layout.build(params.r_r)?;
    if let Some(&late) = overlay.checkpoints.iter().find(|&&t| t > overlay.sim.t_end) {
        return Err(invalid(format!("checkpoint {late} s lies beyond the simulated t_end {}", overlay.sim.t_end)));
    }
    let stats = simulate(&overlay.sim.config(*params, layout.clone()))?;
    report.files.push((format!("{name}_pbs.csv"), overlay_csv(&stats, &layout, params)?));

    let se = stats.cumulative_standard_error();
    let edges = &stats.bin_edges[1..];
    let mut detail = String::new();
    let mut passed = true;
    for &t in &overlay.checkpoints {
        let analytic = multi_patch_cir(&[t], &layout, params)?.cumulative[0];
        let empirical = stats.cumulative_at(t);
        let idx = edges.iter().rposition(|&e| e <= t + 1e-9 * t).unwrap_or(0);
        let rel = (empirical - analytic) / analytic;
        passed &= rel.abs() <= overlay.tolerance;
        let _ = write!(
            detail,
            "t={t}: pbs={empirical:.5}+-{:.5} analytic={analytic:.5} rel={rel:+.4}; ",
            se[idx]
        );
    }
    report.checks.push(TrendCheck::new(
        format!("{name}_pbs_agreement"),
        passed,
        format!("{}within {}", detail, overlay.tolerance),
    ));
    Ok(stats)
}

/// Analytic curves for equal-patch Fibonacci layouts of increasing `N_p`,
/// with an optional simulated overlay.
///
/// Files: `<name>_rate.csv`, `<name>_cumulative.csv` (columns `Np_<n>`,
/// values scaled by `N_sigma`) and, with an overlay, `<name>_pbs.csv`.
pub fn run_fig2(preset: &Fig2Preset) -> Result<FigureReport> {
    let p = &preset.params;
    p.validate()?;
    if preset.n_p.is_empty() {
        return Err(invalid("fig2 needs at least one N_p"));
    }
    let times = preset.time_grid.points()?;
    let mut report = FigureReport { name: preset.name.clone(), ..FigureReport::default() };
    let mut curves = Vec::new();
    let mut at_trend = Vec::new();
    for &n_p in &preset.n_p {
        let layout = LayoutRecipe::Fibonacci { n_p, coverage: preset.coverage }.build(p.r_r)?;
        let cir = multi_patch_cir(&times, &layout, p)?;
        at_trend.push(p.n_sigma as f64 * cumulative_fraction_uniform(preset.trend_time, cir.channel.w_e, p)?);
        curves.push(cir);
    }
    let labels: Vec<String> = preset.n_p.iter().map(|n| format!("Np_{n}")).collect();
    report.files.extend(curve_files(&preset.name, &labels, &curves, p.n_sigma as f64));

    let increasing = at_trend.windows(2).all(|w| w[1] > w[0]);
    let values: Vec<String> = preset.n_p.iter().zip(&at_trend).map(|(n, v)| format!("{n}:{v:.4}")).collect();
    report.checks.push(TrendCheck::new(
        "fig2_increasing_in_np",
        increasing,
        format!("Nsigma*H_p({} s) = {}", preset.trend_time, values.join(" ")),
    ));

    if let Some(overlay) = &preset.pbs {
        run_overlay(&preset.name, overlay, p, &mut report)?;
    }
    Ok(report)
}

/// Even, random (one curve per seed), region-clustered and explicit
/// heterogeneous layouts, with an optional simulated overlay.
///
/// Columns: `even`, `random_s<seed>`, `region`, `heterogeneous`.
pub fn run_fig3(preset: &Fig3Preset) -> Result<FigureReport> {
    let p = &preset.params;
    p.validate()?;
    let times = preset.time_grid.points()?;
    let mut report = FigureReport { name: preset.name.clone(), ..FigureReport::default() };

    let mut recipes = vec![("even".to_string(), LayoutRecipe::Fibonacci { n_p: preset.n_p, coverage: preset.coverage })];
    for &seed in &preset.random_seeds {
        recipes.push((format!("random_s{seed}"), LayoutRecipe::Random { n_p: preset.n_p, coverage: preset.coverage, seed }));
    }
    recipes.push((
        "region".to_string(),
        LayoutRecipe::Region {
            n_p: preset.n_p,
            coverage: preset.coverage,
            cap_center_theta: preset.region_center_theta,
            cap_angular_radius: preset.region_angular_radius,
        },
    ));
    let heterogeneous = LayoutRecipe::Explicit { patches: preset.heterogeneous.clone() }.build(p.r_r)?;

    let mut labels = Vec::new();
    let mut curves = Vec::new();
    let mut w_e = Vec::new();
    for (label, recipe) in &recipes {
        let cir = multi_patch_cir(&times, &recipe.build(p.r_r)?, p)?;
        w_e.push(cir.channel.w_e);
        labels.push(label.clone());
        curves.push(cir);
    }
    let het = multi_patch_cir(&times, &heterogeneous, p)?;
    labels.push("heterogeneous".into());
    curves.push(het.clone());
    report.files.extend(curve_files(&preset.name, &labels, &curves, p.n_sigma as f64));

    let (even_w, rest) = w_e.split_first().expect("even layout is always present");
    let (region_w, random_w) = rest.split_last().expect("region layout is always present");
    for &t in &preset.checkpoints {
        let h = |w: f64| cumulative_fraction_uniform(t, w, p);
        let even = h(*even_w)?;
        let region = h(*region_w)?;
        let random = random_w.iter().map(|&w| h(w)).collect::<Result<Vec<_>>>()?;
        let ok = random.iter().all(|&r| even > r && r > region);
        let shown: Vec<String> = random.iter().map(|r| format!("{r:.5}")).collect();
        report.checks.push(TrendCheck::new(
            format!("{}_ordering_t{t}", preset.name),
            ok,
            format!("H_p: even={even:.5} random=[{}] region={region:.5}", shown.join(" ")),
        ));
    }
    let model = het.channel.capacitance.model;
    report.checks.push(TrendCheck::new(
        format!("{}_heterogeneous_general_path", preset.name),
        model == CapacitanceModel::General || preset.heterogeneous.len() < 2,
        format!("G_p={:.5} via {model:?}", het.channel.g_p()),
    ));

    if let Some(overlay) = &preset.pbs {
        run_overlay(&preset.name, overlay, p, &mut report)?;
    }
    Ok(report)
}

/// `w_e` over `N_p` for every `(r_R, D)` pair. File `<name>_we.csv` with
/// columns `N_p,rR<r>_D<d>,...`.
pub fn run_fig4(preset: &Fig4Preset) -> Result<FigureReport> {
    if preset.n_p.is_empty() || preset.r_r.is_empty() || preset.d_sigma.is_empty() {
        return Err(invalid("fig4 needs non-empty N_p, r_R and D lists"));
    }
    // table[r][d][n]
    let mut table = vec![vec![vec![0.0; preset.n_p.len()]; preset.d_sigma.len()]; preset.r_r.len()];
    for (ri, &r_r) in preset.r_r.iter().enumerate() {
        for (ni, &n_p) in preset.n_p.iter().enumerate() {
            let layout = LayoutRecipe::Fibonacci { n_p, coverage: preset.coverage }.build(r_r)?;
            let g_p = capacitance(&layout)?.g_p;
            for (di, &d) in preset.d_sigma.iter().enumerate() {
                table[ri][di][ni] = effective_rate(g_p, d, r_r)?;
            }
        }
    }

    let mut csv = String::from("N_p");
    for r_r in &preset.r_r {
        for d in &preset.d_sigma {
            let _ = write!(csv, ",rR{r_r}_D{d}");
        }
    }
    csv.push('\n');
    for (ni, n_p) in preset.n_p.iter().enumerate() {
        csv.push_str(&n_p.to_string());
        for row in &table {
            for col in row {
                csv.push(',');
                csv.push_str(&fmt_num(col[ni]));
            }
        }
        csv.push('\n');
    }
    let mut report = FigureReport { name: preset.name.clone(), ..FigureReport::default() };
    report.files.push((format!("{}_we.csv", preset.name), csv));

    let series = table.iter().flatten();
    let in_np = series.clone().all(|s| s.windows(2).all(|w| w[1] > w[0]));
    report.checks.push(TrendCheck::new("fig4_increasing_in_np", in_np, "w_e vs N_p at fixed r_R, D"));

    // sorted copies so the comparisons do not depend on list order
    let mut by_r: Vec<usize> = (0..preset.r_r.len()).collect();
    by_r.sort_by(|&a, &b| preset.r_r[a].total_cmp(&preset.r_r[b]));
    let mut by_d: Vec<usize> = (0..preset.d_sigma.len()).collect();
    by_d.sort_by(|&a, &b| preset.d_sigma[a].total_cmp(&preset.d_sigma[b]));
    let n = preset.n_p.len();
    let smaller_r_wins = by_r.windows(2).all(|w| {
        (0..preset.d_sigma.len()).all(|di| (0..n).all(|ni| table[w[0]][di][ni] > table[w[1]][di][ni]))
    });
    let larger_d_wins = by_d.windows(2).all(|w| {
        (0..preset.r_r.len()).all(|ri| (0..n).all(|ni| table[ri][w[1]][ni] > table[ri][w[0]][ni]))
    });
    report.checks.push(TrendCheck::new("fig4_decreasing_in_rr", smaller_r_wins, "w_e vs r_R at fixed N_p, D"));
    report.checks.push(TrendCheck::new("fig4_increasing_in_d", larger_d_wins, "w_e vs D at fixed N_p, r_R"));
    Ok(report)
}
