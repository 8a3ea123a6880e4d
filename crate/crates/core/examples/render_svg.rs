//! Plots a wide CSV table (first column x, one line per further column).
//!
//!     cargo run --example render_svg -- table.csv plot.svg [--log-x]
//!
//! Without arguments, plots the absorbed fraction for a few layouts.

use std::fs;

use patchy_rx::experiments::{render_svg, run_fig2, Fig2Preset, SvgStyle};
use patchy_rx::TimeGrid;

fn main() -> patchy_rx::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let log_x = args.iter().any(|a| a == "--log-x");
    let paths: Vec<&String> = args.iter().filter(|a| !a.starts_with("--")).collect();

    let (csv, target) = match paths.as_slice() {
        [input, output, ..] => (fs::read_to_string(input)?, output.to_string()),
        _ => {
            let preset = Fig2Preset {
                n_p: vec![1, 5, 11],
                time_grid: TimeGrid::log(0.01, 5.0, 120),
                pbs: None,
                ..Fig2Preset::default()
            };
            let report = run_fig2(&preset)?;
            (report.file("fig2_cumulative.csv").unwrap_or_default().to_string(), "cumulative.svg".to_string())
        }
    };
    let style = SvgStyle {
        title: "absorbed molecules".into(),
        x_label: "t (s)".into(),
        y_label: "N H_p".into(),
        log_x: log_x || paths.is_empty(),
        ..SvgStyle::default()
    };
    fs::write(&target, render_svg(&csv, &style)?)?;
    println!("wrote {target}");
    Ok(())
}
