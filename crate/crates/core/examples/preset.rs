//! Runs a single-layout experiment described in JSON. With no argument a
//! built-in description is printed and run.
//!
//!     cargo run --release --example preset [preset.json]

use std::fs;

use patchy_rx::experiments::{run_preset, ExperimentPreset, LayoutRecipe, Outputs, SimSettings};
use patchy_rx::{ChannelParams, TimeGrid};

fn main() -> patchy_rx::Result<()> {
    let preset = match std::env::args().nth(1) {
        Some(path) => ExperimentPreset::from_json(&fs::read_to_string(path)?)?,
        None => {
            let p = ExperimentPreset {
                name: "random7".into(),
                layout: LayoutRecipe::Random { n_p: 7, coverage: 0.08, seed: 3 },
                params: ChannelParams::baseline(),
                time_grid: TimeGrid::linear(0.05, 1.0, 20),
                sim: Some(SimSettings { realizations: 20, bin_width: 0.05, ..SimSettings::default() }),
                outputs: Outputs { csv_dir: Some("results/preset".into()), svg: false },
            };
            println!("{}", p.to_json()?);
            p
        }
    };
    let report = run_preset(&preset)?;
    match &preset.outputs.csv_dir {
        Some(dir) => {
            for path in report.write_to(dir, preset.outputs.svg)? {
                println!("wrote {}", path.display());
            }
        }
        None => {
            for (name, text) in &report.files {
                println!("== {name}\n{text}");
            }
        }
    }
    Ok(())
}
