use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rotrap::commands;
use rotrap::config::RunConfig;
use rotrap::error::CliError;

/// Stability, resonances and driven motion of a particle in a rotating
/// anisotropic harmonic trap under gravity.
#[derive(Parser)]
#[command(name = "rotrap", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Scan the rotation rate and classify the mode spectrum.
    Stability(Common),
    /// Gravity-driven resonant rotation rates and where they fall.
    Resonance(Common),
    /// Integrate the equations of motion.
    Simulate(Common),
    /// Closed-form secularly growing solution at a resonance.
    Analytic(Common),
}

#[derive(Args)]
struct Common {
    /// JSON configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in figure preset (fig1 .. fig12); file and flags override it.
    #[arg(long)]
    preset: Option<String>,
    /// Output directory.
    #[arg(long, default_value = "rotrap-out")]
    out: PathBuf,
    #[arg(long)]
    dimensionless: bool,
    /// Rotation rate in rad/s.
    #[arg(long)]
    omega: Option<f64>,
    #[arg(long)]
    omega_hz: Option<f64>,
    /// Rotation axis as x,y,z.
    #[arg(long, value_parser = triple, allow_hyphen_values = true)]
    axis: Option<[f64; 3]>,
    /// Scan range as min,max in rad/s.
    #[arg(long, value_parser = pair)]
    omega_range: Option<[f64; 2]>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    duration: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    /// Magnitude of gravity.
    #[arg(long)]
    gravity: Option<f64>,
    #[arg(long)]
    mass: Option<f64>,
    /// Move the rotation rate to the nearest resonance.
    #[arg(long)]
    snap: bool,
    /// Also write the mode-expansion trajectory.
    #[arg(long)]
    modes: bool,
}

fn numbers<const N: usize>(s: &str) -> Result<[f64; N], String> {
    let parts = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("`{p}`: {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    parts
        .try_into()
        .map_err(|v: Vec<f64>| format!("expected {N} comma-separated numbers, got {}", v.len()))
}

fn triple(s: &str) -> Result<[f64; 3], String> {
    numbers(s)
}

fn pair(s: &str) -> Result<[f64; 2], String> {
    numbers(s)
}

impl Common {
    fn run_config(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.preset {
            Some(name) => RunConfig::preset(name)?,
            None => RunConfig::default(),
        };
        if let Some(path) = &self.config {
            cfg = cfg.merged(RunConfig::from_file(path)?);
        }
        let flags = RunConfig {
            dimensionless: self.dimensionless.then_some(true),
            omega: self.omega,
            omega_hz: self.omega_hz,
            axis: self.axis,
            omega_range: self.omega_range,
            scan_steps: self.steps,
            duration: self.duration,
            dt: self.dt,
            gravity: self.gravity,
            mass: self.mass,
            snap_to_resonance: self.snap.then_some(true),
            modes_output: self.modes.then_some(true),
            ..Default::default()
        };
        // A flag rate replaces a preset rate given in the other unit.
        if flags.omega.is_some() {
            cfg.omega_hz = None;
        }
        if flags.omega_hz.is_some() {
            cfg.omega = None;
        }
        if flags.omega_range.is_some() {
            cfg.omega_range_hz = None;
        }
        Ok(cfg.merged(flags))
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "-".into(), |v| format!("{v:.6}"))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Stability(c) => {
            let cfg = c.run_config()?.resolve()?;
            let r = commands::stability(&cfg, &c.out)?;
            println!("regions: {}", r.regions.join(" "));
            for b in &r.boundaries {
                println!(
                    "boundary {:.9} ({} Hz): {} -> {}",
                    b.omega,
                    fmt_opt(b.omega_hz),
                    b.below,
                    b.above
                );
            }
            println!("wrote {}", r.table.display());
        }
        Command::Resonance(c) => {
            let cfg = c.run_config()?.resolve()?;
            let r = commands::resonance(&cfg, &c.out)?;
            println!(
                "omega_minus {:.9} ({} Hz) [{}]",
                r.omega_minus,
                fmt_opt(r.omega_minus_hz),
                r.placement_minus.region
            );
            println!(
                "omega_plus  {:.9} ({} Hz) [{}]",
                r.omega_plus,
                fmt_opt(r.omega_plus_hz),
                r.placement_plus.region
            );
            if r.degenerate {
                println!("resonances coincide");
            }
        }
        Command::Simulate(c) => {
            let cfg = c.run_config()?.resolve()?;
            let r = commands::simulate(&cfg, &c.out)?;
            println!("omega {:.9}, {} samples, dt {:e}", r.omega, r.samples, r.dt);
            match (&r.growth, &r.growth_error) {
                (Some(g), _) => println!("envelope slope {:.6e} (corr {:.6})", g.slope, g.correlation),
                (None, Some(e)) => println!("no growth fit: {e}"),
                _ => {}
            }
            if r.overflow {
                println!("trajectory overflowed and was truncated");
            }
            println!("wrote {}", r.table.display());
        }
        Command::Analytic(c) => {
            let cfg = c.run_config()?.resolve()?;
            let r = commands::analytic(&cfg, &c.out)?;
            println!(
                "omega {:.9}, growth amplitude {:.6e}, max residual {:.3e}",
                r.omega,
                r.growth_amplitude,
                r.residuals.res_a.max(r.residuals.res_b).max(r.residuals.res_c)
            );
            println!("wrote {}", r.table.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("rotrap: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
