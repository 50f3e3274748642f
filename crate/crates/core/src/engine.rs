//! Run orchestration: double-buffered stepping, frame output and summary.

use std::collections::VecDeque;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use crate::boundary::load_mask;
use crate::config::SimConfig;
use crate::dynamics::{ChiralityStream, Stepper};
use crate::error::Result;
use crate::io::{ensure_dir, read_text, series_csv, write_fields, write_frame, write_text, Frame};
use crate::lattice::Lattice;
use crate::observables::{BlockCounts, MacroField};

/// Chirality key derived from a run seed, kept apart from the
/// initial-condition stream.
pub fn chirality_seed(seed: u64) -> u64 {
    seed ^ 0x6a09_e667_f3bc_c908
}

/// A lattice plus its spare buffer and stepper.
pub struct Simulation {
    current: Lattice,
    next: Lattice,
    stepper: Stepper,
    time: u64,
    stepping: Duration,
}

impl Simulation {
    pub fn new(initial: Lattice, seed: u64) -> Self {
        let next = initial.empty_like();
        Simulation {
            current: initial,
            next,
            stepper: Stepper::new(ChiralityStream::new(chirality_seed(seed))),
            time: 0,
            stepping: Duration::ZERO,
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Result<Self> {
        self.stepper = self.stepper.with_workers(workers)?;
        Ok(self)
    }

    pub fn lattice(&self) -> &Lattice {
        &self.current
    }

    pub fn into_lattice(self) -> Lattice {
        self.current
    }

    /// Steps taken so far.
    pub fn time(&self) -> u64 {
        self.time
    }

    /// Wall-clock time spent inside [`Simulation::step`].
    pub fn stepping_time(&self) -> Duration {
        self.stepping
    }

    pub fn step(&mut self) {
        let start = Instant::now();
        self.stepper.step(&self.current, &mut self.next, self.time);
        std::mem::swap(&mut self.current, &mut self.next);
        self.time += 1;
        self.stepping += start.elapsed();
    }

    pub fn advance(&mut self, steps: u64) {
        for _ in 0..steps {
            self.step();
        }
    }
}

/// Trailing-window block averages, updated one lattice at a time.
pub struct WindowedCounts {
    window: usize,
    block: usize,
    recent: VecDeque<BlockCounts>,
    sum: BlockCounts,
}

impl WindowedCounts {
    pub fn new(width: usize, height: usize, block: usize, window: usize) -> Result<Self> {
        Ok(WindowedCounts {
            window: window.max(1),
            block,
            recent: VecDeque::new(),
            sum: BlockCounts::new(width, height, block)?,
        })
    }

    pub fn push(&mut self, lattice: &Lattice) -> Result<()> {
        let c = BlockCounts::of(lattice, self.block)?;
        self.sum.add(&c);
        self.recent.push_back(c);
        if self.recent.len() > self.window {
            let old = self.recent.pop_front().expect("non-empty");
            self.sum.subtract(&old);
        }
        Ok(())
    }

    /// Counts summed over the last `min(window, pushed)` lattices.
    pub fn counts(&self) -> &BlockCounts {
        &self.sum
    }

    pub fn latest(&self) -> Option<&BlockCounts> {
        self.recent.back()
    }
}

#[derive(Clone, Debug)]
pub struct RunSummary {
    pub steps: u64,
    pub sites: usize,
    pub mass_start: u64,
    pub mass_end: u64,
    /// Time spent stepping (collision + streaming only).
    pub stepping: Duration,
    pub elapsed: Duration,
}

impl RunSummary {
    pub fn site_updates_per_sec(&self) -> f64 {
        let secs = self.stepping.as_secs_f64();
        if secs == 0.0 {
            return f64::INFINITY;
        }
        (self.sites as f64 * self.steps as f64) / secs
    }
}

/// Everything a run produces.
pub struct RunOutput {
    pub final_lattice: Lattice,
    pub frames: Vec<PathBuf>,
    /// Block-density standard deviation of the trailing-window field, per step.
    pub windowed_std: Vec<(f64, f64)>,
    /// Block-density standard deviation of the single-step field, per step.
    pub instant_std: Vec<(f64, f64)>,
    pub mean_density: f64,
    pub final_field: MacroField,
    pub summary: RunSummary,
}

/// Build the initial lattice for `config`, loading the mask from
/// `mask_override` or `config.mask`.
pub fn initial_lattice(config: &SimConfig, mask_override: Option<&Path>) -> Result<Lattice> {
    config.validate()?;
    let geometry = config.geometry()?;
    let template = match mask_override.or(config.mask.as_deref()) {
        Some(path) => {
            let text = read_text(path)?;
            let mask = load_mask(&text, config.width, config.height, config.boundary)?;
            Lattice::with_mask(geometry, mask)?
        }
        None => Lattice::new(geometry),
    };
    config.scenario().init(&template, config.seed)
}

/// Run a configured scenario. When `write` is set, frames, field CSVs and
/// the relaxation series go to `config.output_dir`.
pub fn run(config: &SimConfig, mask_override: Option<&Path>, write: bool) -> Result<RunOutput> {
    let start = Instant::now();
    let initial = initial_lattice(config, mask_override)?;
    if write {
        ensure_dir(&config.output_dir)?;
    }
    let mass_start = initial.mass();
    let sites = initial.cells().len();
    let units = initial.units();

    let mut sim = Simulation::new(initial, config.seed).with_workers(config.workers)?;
    let mut windowed = WindowedCounts::new(config.width, config.height, config.block, config.window)?;
    let mut frames = Vec::new();
    let mut windowed_std = Vec::new();
    let mut instant_std = Vec::new();

    loop {
        let t = sim.time();
        windowed.push(sim.lattice())?;
        let field = windowed.counts().to_field(units);
        windowed_std.push((t as f64, field.density_std()));
        let latest = windowed.latest().expect("pushed").to_field(units);
        instant_std.push((t as f64, latest.density_std()));

        let last = t == config.steps;
        let due = config.frame_every > 0 && t % config.frame_every == 0;
        if write && (due || last) {
            let frame = Frame::from_counts(t, windowed.counts());
            frames.push(write_frame(&frame, &config.output_dir)?);
            write_fields(&field, &config.output_dir.join(format!("fields_{t:06}.csv")))?;
        }
        if last {
            break;
        }
        sim.step();
    }

    let final_field = windowed.counts().to_field(units);
    let mean_density = final_field.mean_density();
    if write {
        write_text(
            &config.output_dir.join("relaxation.csv"),
            &series_csv(["step", "density_std"], &windowed_std),
        )?;
    }
    let stepping = sim.stepping_time();
    let final_lattice = sim.into_lattice();
    Ok(RunOutput {
        summary: RunSummary {
            steps: config.steps,
            sites,
            mass_start,
            mass_end: final_lattice.mass(),
            stepping,
            elapsed: start.elapsed(),
        },
        final_lattice,
        frames,
        windowed_std,
        instant_std,
        mean_density,
        final_field,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::ScenarioKind;

    fn small(steps: u64) -> SimConfig {
        let mut c = SimConfig::new(40, 40, steps, 11, ScenarioKind::Hole, 0.5);
        c.window = 5;
        c.frame_every = 10;
        c
    }

    #[test]
    fn run_conserves_mass() {
        let out = run(&small(50), None, false).unwrap();
        assert_eq!(out.summary.mass_start, out.summary.mass_end);
        assert_eq!(out.windowed_std.len(), 51);
        assert!(out.frames.is_empty());
    }

    #[test]
    fn runs_are_reproducible() {
        let a = run(&small(30), None, false).unwrap();
        let b = run(&small(30), None, false).unwrap();
        assert_eq!(a.final_lattice, b.final_lattice);
        assert_eq!(a.windowed_std, b.windowed_std);
    }

    #[test]
    fn writes_frames_on_schedule() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = small(25);
        cfg.output_dir = dir.path().to_path_buf();
        let out = run(&cfg, None, true).unwrap();
        let names: Vec<String> = out
            .frames
            .iter()
            .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
            .collect();
        assert_eq!(
            names,
            [
                "frame_000000.pgm",
                "frame_000010.pgm",
                "frame_000020.pgm",
                "frame_000025.pgm"
            ]
        );
        assert!(dir.path().join("fields_000025.csv").exists());
        assert!(dir.path().join("relaxation.csv").exists());
    }

    #[test]
    fn missing_mask_is_reported_before_compute() {
        let mut cfg = small(10);
        cfg.mask = Some("/no/such/mask.pbm".into());
        let err = run(&cfg, None, false).err().unwrap();
        assert!(err.to_string().contains("/no/such/mask.pbm"));
    }
}
