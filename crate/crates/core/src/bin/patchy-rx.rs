use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use patchy_rx::experiments::{
    analytic_csv, fmt_num, run_fig2, run_fig3, run_fig4, Fig2Preset, Fig3Preset, Fig4Preset, FigureReport,
    SimSettings,
};
use patchy_rx::{AbsorptionMode, ChannelParams, EffectiveChannel, Error, PatchLayout, SimConfig, TimeGrid};

#[derive(Parser)]
#[command(name = "patchy-rx", version, about = "Patchy spherical receiver: capacitance, analytic CIR and simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Layout JSON (capacitance, analytic, simulate) or figure preset JSON (fig2-4).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory. Single-table commands print to stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Simulation seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Use dt = 1e-6 s and 1000 realizations for simulations.
    #[arg(long, global = true)]
    paper_scale: bool,
}

#[derive(Subcommand)]
enum Command {
    /// G_p, w_e and I_p of a layout.
    Capacitance(ParamArgs),
    /// Hitting rate and absorbed fraction on a time grid.
    Analytic {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = 0.01)]
        t_start: f64,
        #[arg(long, default_value_t = 2.0)]
        t_end: f64,
        #[arg(long, default_value_t = 200)]
        t_steps: usize,
        #[arg(long, value_enum, default_value_t = GridSpacing::Linear)]
        spacing: GridSpacing,
    },
    /// Brownian-dynamics simulation of a layout.
    Simulate {
        #[command(flatten)]
        params: ParamArgs,
        /// Time step, s [default: 1e-5].
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        t_end: f64,
        /// [default: 200]
        #[arg(long)]
        realizations: Option<u64>,
        #[arg(long, default_value_t = 0.01)]
        bin_width: f64,
        #[arg(long, value_enum, default_value_t = Mode::Patches)]
        mode: Mode,
        /// Walk every step, even far from the receiver.
        #[arg(long)]
        exact_steps: bool,
    },
    /// Absorbed molecules versus number of patches.
    Fig2 {
        /// Skip the simulated overlay.
        #[arg(long)]
        no_pbs: bool,
    },
    /// Even, random, clustered and heterogeneous layouts.
    Fig3 {
        #[arg(long)]
        no_pbs: bool,
    },
    /// Effective surface rate versus number of patches, receiver size and diffusivity.
    Fig4,
}

#[derive(Args)]
struct ParamArgs {
    /// Diffusion coefficient, um^2/s.
    #[arg(long = "D", default_value_t = 79.4)]
    d_sigma: f64,
    /// Degradation rate, 1/s.
    #[arg(long, default_value_t = 0.8)]
    kd: f64,
    /// Transmitter distance from the receiver centre, um.
    #[arg(long, default_value_t = 20.0)]
    r0: f64,
    /// Receiver radius, um [default: the layout's].
    #[arg(long = "rR")]
    r_r: Option<f64>,
    #[arg(long = "Nsigma", default_value_t = 1000)]
    n_sigma: u64,
    /// Far-field concentration for I_p.
    #[arg(long = "C0", default_value_t = 1.0)]
    c0: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum GridSpacing {
    Linear,
    Log,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Patches,
    FullSphere,
    ReflectOnly,
}

impl ParamArgs {
    fn resolve(&self, layout: &PatchLayout) -> patchy_rx::Result<ChannelParams> {
        let r_r = self.r_r.unwrap_or(layout.r_r());
        let mut p = ChannelParams::new(self.d_sigma, self.kd, r_r, self.r0, self.n_sigma)?;
        p.c_0 = self.c0;
        p.validate()?;
        Ok(p)
    }
}

fn read_layout(config: Option<&Path>) -> patchy_rx::Result<PatchLayout> {
    let path = config.ok_or_else(|| Error::InvalidArgument("--config <layout.json> is required".into()))?;
    PatchLayout::from_json(&fs::read_to_string(path)?)
}

fn read_preset<T: Default>(config: Option<&Path>, parse: fn(&str) -> patchy_rx::Result<T>) -> patchy_rx::Result<T> {
    match config {
        Some(path) => parse(&fs::read_to_string(path)?),
        None => Ok(T::default()),
    }
}

fn emit(out: Option<&Path>, file: &str, text: &str) -> patchy_rx::Result<()> {
    match out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            fs::write(dir.join(file), text)?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn tune(sim: &mut SimSettings, cli: &Cli) {
    if cli.paper_scale {
        *sim = sim.paper_scale();
    }
    if let Some(seed) = cli.seed {
        sim.seed = seed;
    }
}

fn finish_figure(report: FigureReport, out: Option<&Path>) -> patchy_rx::Result<()> {
    let dir = out.map_or_else(|| PathBuf::from("results"), Path::to_path_buf);
    for path in report.write_to(&dir, true)? {
        log::info!("wrote {}", path.display());
    }
    for c in &report.checks {
        eprintln!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    report.ensure()
}

fn run(cli: &Cli) -> patchy_rx::Result<()> {
    let config = cli.config.as_deref();
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Capacitance(args) => {
            let layout = read_layout(config)?;
            let params = args.resolve(&layout)?;
            let channel = EffectiveChannel::new(&layout, &params)?;
            for w in &channel.capacitance.warnings {
                log::warn!("{w}");
            }
            let text = format!(
                "G_p,w_e,I_p\n{},{},{}\n",
                fmt_num(channel.g_p()),
                fmt_num(channel.w_e),
                fmt_num(channel.current(&params))
            );
            emit(out, "capacitance.csv", &text)
        }
        Command::Analytic { params, t_start, t_end, t_steps, spacing } => {
            let layout = read_layout(config)?;
            let params = params.resolve(&layout)?;
            let grid = match spacing {
                GridSpacing::Linear => TimeGrid::linear(*t_start, *t_end, *t_steps),
                GridSpacing::Log => TimeGrid::log(*t_start, *t_end, *t_steps),
            };
            emit(out, "analytic.csv", &analytic_csv(&grid.points()?, &layout, &params)?)
        }
        Command::Simulate { params, dt, t_end, realizations, bin_width, mode, exact_steps } => {
            let layout = read_layout(config)?;
            let params = params.resolve(&layout)?;
            let mut sim = SimSettings { t_end: *t_end, bin_width: *bin_width, ..SimSettings::default() };
            tune(&mut sim, cli);
            sim.dt = dt.unwrap_or(sim.dt);
            sim.realizations = realizations.unwrap_or(sim.realizations);
            let cfg = SimConfig {
                mode: match mode {
                    Mode::Patches => AbsorptionMode::Patches,
                    Mode::FullSphere => AbsorptionMode::FullSphere,
                    Mode::ReflectOnly => AbsorptionMode::ReflectOnly,
                },
                far_field_jumps: !exact_steps,
                ..sim.config(params, layout)
            };
            let stats = patchy_rx::simulate(&cfg)?;
            emit(out, "simulate.csv", &stats.to_csv())
        }
        Command::Fig2 { no_pbs } => {
            let mut preset = read_preset(config, Fig2Preset::from_json)?;
            if *no_pbs {
                preset.pbs = None;
            }
            if let Some(o) = preset.pbs.as_mut() {
                tune(&mut o.sim, cli);
            }
            finish_figure(run_fig2(&preset)?, out)
        }
        Command::Fig3 { no_pbs } => {
            let mut preset = read_preset(config, Fig3Preset::from_json)?;
            if *no_pbs {
                preset.pbs = None;
            }
            if let Some(o) = preset.pbs.as_mut() {
                tune(&mut o.sim, cli);
            }
            finish_figure(run_fig3(&preset)?, out)
        }
        Command::Fig4 => finish_figure(run_fig4(&read_preset(config, Fig4Preset::from_json)?)?, out),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ Error::TrendViolation(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
