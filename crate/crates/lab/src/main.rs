use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use shellkorn::checks::planar_check;
use shellkorn::config::{read_config, Format, Mode};
use shellkorn::{emit_report, run_sweep, surface, ExperimentConfig, LabError};

/// Korn-constant experiments on thin shells of zero Gaussian curvature.
#[derive(Parser, Debug)]
#[command(name = "shellkorn", version, about)]
struct Cli {
    /// Output directory; overrides `[output] dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Report format; overrides `[output] format`.
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Csv,
    Svg,
    Both,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build and validate the configured surface.
    GeometryCheck { config: PathBuf },
    /// Sharp harmonic inequality and planar ratio boundedness.
    PlanarCheck {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        fields: usize,
    },
    /// Rayleigh quotients of the optimal ansatz over the h list.
    Ansatz { config: PathBuf },
    /// Discrete Korn constants over the h list.
    Eig { config: PathBuf },
    /// All modes named in the config.
    Sweep { config: PathBuf },
}

fn load(cli: &Cli, path: &PathBuf, mode: Option<Mode>) -> Result<ExperimentConfig, LabError> {
    let mut cfg = read_config(path)?;
    if let Some(m) = mode {
        cfg.modes = vec![m];
    }
    if let Some(d) = &cli.out {
        cfg.output.dir = d.clone();
    }
    if let Some(f) = cli.format {
        cfg.output.format = match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Svg => Format::Svg,
            FormatArg::Both => Format::Both,
        };
    }
    Ok(cfg)
}

fn sweep(cli: &Cli, path: &PathBuf, mode: Option<Mode>) -> Result<(), LabError> {
    let cfg = load(cli, path, mode)?;
    let result = run_sweep(&cfg)?;
    println!("{:>12} {:>3} {:>7} {:>14} {:>6} {:>10} {:>10}", "h", "n", "mode", "value", "iters", "residual", "ms");
    for r in &result.rows {
        println!(
            "{:>12.6e} {:>3} {:>7} {:>14.8e} {:>6} {:>10.2e} {:>10.1}",
            r.h,
            r.n,
            r.mode.name(),
            r.value,
            r.iters,
            r.residual,
            r.wall_ms
        );
    }
    for m in result.modes() {
        match result.fit(m) {
            Ok(f) => println!("{}: slope {:.4}  r2 {:.5}", m.name(), f.slope, f.r_squared),
            Err(e) => println!("{}: no fit ({e})", m.name()),
        }
    }
    for p in emit_report(&result, &cfg.output.dir, &cfg.output.prefix, cfg.output.format)? {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(), LabError> {
    match &cli.command {
        Command::GeometryCheck { config } => {
            let cfg = load(cli, config, None)?;
            let s = surface::build(&cfg.surface)?;
            print!("{}", surface::describe(&s));
            for h in &cfg.h {
                shellkorn_core::operators::check_thickness(&s, *h)
                    .map_err(|source| LabError::AtThickness { h: *h, source })?;
            }
            println!("ok");
            Ok(())
        }
        Command::PlanarCheck { seed, fields } => {
            let r = planar_check(*seed, *fields)?;
            println!("separable harmonics  {} (x 7 thicknesses)", r.harmonics);
            println!("min harmonic gap     {:.3e}", r.min_gap);
            println!("|gap(x) - 2hp|       {:.3e}", r.linear_gap_error);
            for (h, m) in &r.max_ratio {
                println!("h = {h:<8} max ratio over {} fields  {m:.6}", r.fields);
            }
            println!("growth vs coarsest   {:.4}", r.worst_growth());
            println!("seed                 {}", r.seed);
            Ok(())
        }
        Command::Ansatz { config } => sweep(cli, config, Some(Mode::Ansatz)),
        Command::Eig { config } => sweep(cli, config, Some(Mode::Eig)),
        Command::Sweep { config } => sweep(cli, config, None),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
