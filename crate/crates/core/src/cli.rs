//! Command-line surface of the `fhp` binary.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use crate::config::{parse_config, SimConfig};
use crate::dynamics::build_table;
use crate::engine::run;
use crate::error::Result;
use crate::io::{ensure_dir, read_text, write_text};
use crate::probes::{probe_relaxation, ProbeResult, SoundProbe, ViscosityProbe};
use crate::verify::run_all;

#[derive(Debug, Parser)]
#[command(name = "fhp", version, about = "FHP-I lattice-gas simulation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a configured scenario and write frames to its output directory.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// PBM obstacle mask, overriding the config's `mask`.
        #[arg(long)]
        mask: Option<PathBuf>,
    },
    /// Print all 128 collision entries as `q s_in s_out`.
    CollisionTable,
    /// Check table, conservation and streaming invariants.
    Verify,
    /// Run a measurement probe.
    Measure {
        probe: ProbeKind,
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ProbeKind {
    Viscosity,
    Sound,
}

fn load(path: &Path) -> Result<SimConfig> {
    parse_config(&read_text(path)?)
}

pub fn viscosity_probe(c: &SimConfig) -> ViscosityProbe {
    let d = ViscosityProbe::default();
    ViscosityProbe {
        width: c.width,
        height: c.height,
        fill: c.fill,
        amplitude: c.amplitude,
        steps: c.probe_steps.unwrap_or(d.steps),
        sample_every: c.sample_every,
        seed: c.seed,
        ensembles: c.ensembles,
        workers: c.workers,
        ..d
    }
}

pub fn sound_probe(c: &SimConfig) -> SoundProbe {
    let d = SoundProbe::default();
    SoundProbe {
        width: c.width,
        height: c.height,
        fill: c.fill,
        delta: c.delta,
        radius: c.pulse_radius,
        steps: c.probe_steps.unwrap_or(d.steps),
        sample_every: c.sample_every,
        seed: c.seed,
        ensembles: c.ensembles,
        workers: c.workers,
        ..d
    }
}

fn report(out: &mut impl Write, result: &ProbeResult, config: &SimConfig) -> Result<()> {
    ensure_dir(&config.output_dir)?;
    let path = config.output_dir.join(format!("{}.csv", result.name));
    write_text(&path, &result.series_csv())?;
    let _ = write!(out, "{result}");
    let _ = writeln!(out, "series: {}", path.display());
    Ok(())
}

fn execute(command: Command, out: &mut impl Write) -> Result<ExitCode> {
    match command {
        Command::Run { config, mask } => {
            let cfg = load(&config)?;
            let output = run(&cfg, mask.as_deref(), true)?;
            let s = &output.summary;
            let _ = writeln!(out, "steps            {}", s.steps);
            let _ = writeln!(out, "sites            {}", s.sites);
            let _ = writeln!(out, "mass start/end   {} / {}", s.mass_start, s.mass_end);
            let _ = writeln!(out, "frames           {}", output.frames.len());
            let _ = writeln!(out, "runtime          {:.3} s", s.elapsed.as_secs_f64());
            let _ = writeln!(out, "site updates/s   {:.3e}", s.site_updates_per_sec());
            let relax = probe_relaxation(&output);
            if let Some(t) = relax.measured {
                let _ = writeln!(out, "std below 10%    step {t}");
            }
            let _ = writeln!(
                out,
                "final rel. std   {:.4}",
                output.final_field.density_std() / output.mean_density
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::CollisionTable => {
            for (q, s, o) in build_table().iter() {
                let _ = writeln!(out, "{} {} {}", q as u8, s.bits(), o.bits());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify => {
            let checks = run_all();
            for c in &checks {
                let _ = writeln!(
                    out,
                    "{:<4} {:<24} {}",
                    if c.passed { "ok" } else { "FAIL" },
                    c.name,
                    c.detail
                );
            }
            let failed = checks.iter().filter(|c| !c.passed).count();
            let _ = writeln!(out, "{} of {} checks passed", checks.len() - failed, checks.len());
            Ok(if failed == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Measure { probe, config } => {
            let cfg = load(&config)?;
            let result = match probe {
                ProbeKind::Viscosity => viscosity_probe(&cfg).run()?,
                ProbeKind::Sound => sound_probe(&cfg).run()?,
            };
            report(out, &result, &cfg)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

/// Parse `argv` and run. Usage errors exit with 2, failed checks and
/// runtime errors with 1.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let stdout = std::io::stdout();
    match execute(cli.command, &mut stdout.lock()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
