//! Figure runners, presets and plots through the public API.

use patchy_rx::experiments::{
    render_svg, run_fig2, run_preset, ExperimentPreset, Fig2Preset, LayoutRecipe, Outputs, PbsOverlay, SimSettings,
    SvgStyle, CSV_SCHEMA_VERSION,
};
use patchy_rx::{ChannelParams, TimeGrid};

fn small_sim() -> SimSettings {
    SimSettings { dt: 1e-4, t_end: 0.5, realizations: 4, seed: 3, bin_width: 0.05 }
}

#[test]
fn schema_version_is_pinned() {
    assert_eq!(CSV_SCHEMA_VERSION, 1);
}

#[test]
fn fig2_svg_has_one_line_per_patch_count() {
    let report = run_fig2(&Fig2Preset { pbs: None, ..Fig2Preset::default() }).unwrap();
    let csv = report.file("fig2_cumulative.csv").unwrap();
    let headers: Vec<&str> = csv.lines().next().unwrap().split(',').skip(1).collect();
    let svg = render_svg(csv, &SvgStyle::default()).unwrap();
    assert_eq!(svg.matches("<polyline").count(), headers.len());
    for h in headers {
        assert!(svg.contains(&format!(r#"data-label="{h}""#)));
        assert!(svg.contains(&format!(">{h}</text>")));
    }
    assert_eq!(svg, render_svg(csv, &SvgStyle::default()).unwrap());
}

#[test]
fn overlay_csv_golden_header() {
    let preset = Fig2Preset {
        n_p: vec![3, 11],
        pbs: Some(PbsOverlay {
            layout: LayoutRecipe::Fibonacci { n_p: 11, coverage: 0.05 },
            sim: small_sim(),
            checkpoints: vec![0.25, 0.5],
            tolerance: 0.1,
        }),
        ..Fig2Preset::default()
    };
    let report = run_fig2(&preset).unwrap();
    let pbs = report.file("fig2_pbs.csv").unwrap();
    assert_eq!(
        pbs.lines().next().unwrap(),
        "t_mid,analytic_rate,pbs_rate,pbs_rate_se,t_upper,analytic_cumulative,pbs_cumulative,pbs_cumulative_se"
    );
    assert_eq!(pbs.lines().count(), 11);
    assert!(report.checks.iter().any(|c| c.name == "fig2_pbs_agreement"));
    assert_eq!(report.checks_csv().lines().next().unwrap(), "check,passed,detail");
}

fn preset() -> ExperimentPreset {
    ExperimentPreset {
        name: "det".into(),
        layout: LayoutRecipe::Random { n_p: 5, coverage: 0.06, seed: 11 },
        params: ChannelParams::baseline(),
        time_grid: TimeGrid::log(0.05, 2.0, 15),
        sim: Some(small_sim()),
        outputs: Outputs::default(),
    }
}

#[test]
fn preset_reproduces_from_json() {
    let json = preset().to_json().unwrap();
    let a = run_preset(&ExperimentPreset::from_json(&json).unwrap()).unwrap();
    let b = run_preset(&ExperimentPreset::from_json(&json).unwrap()).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.files.iter().map(|(n, _)| n.as_str()).collect::<Vec<_>>(), ["det_analytic.csv", "det_simulate.csv"]);

    let reseeded = ExperimentPreset { sim: Some(SimSettings { seed: 4, ..small_sim() }), ..preset() };
    let c = run_preset(&reseeded).unwrap();
    assert_eq!(a.files[0], c.files[0]);
    assert_ne!(a.files[1], c.files[1]);
}

#[test]
fn preset_rejects_bad_json() {
    let mut v: serde_json::Value = serde_json::from_str(&preset().to_json().unwrap()).unwrap();
    v["params"]["D"] = serde_json::json!(-1.0);
    assert!(ExperimentPreset::from_json(&v.to_string()).is_err());
    v["params"]["D"] = serde_json::json!(79.4);
    v["layout"]["generator"] = serde_json::json!("hexagonal");
    assert!(ExperimentPreset::from_json(&v.to_string()).is_err());
}

#[test]
fn reports_write_expected_files() {
    let dir = std::env::temp_dir().join(format!("patchy-rx-exp-{}", std::process::id()));
    let report = run_fig2(&Fig2Preset { n_p: vec![1, 3], pbs: None, ..Fig2Preset::default() }).unwrap();
    let written = report.write_to(&dir, true).unwrap();
    let names: Vec<String> = written.iter().map(|p| p.file_name().unwrap().to_string_lossy().into_owned()).collect();
    assert_eq!(names, ["fig2_rate.csv", "fig2_rate.svg", "fig2_cumulative.csv", "fig2_cumulative.svg", "fig2_checks.csv"]);
    let _ = std::fs::remove_dir_all(dir);
}
