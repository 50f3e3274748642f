//! Measurement probes: relaxation, sound speed, shear viscosity and
//! near-wall densification.
//!
//! Each probe runs its own deterministic simulations and compares a fitted
//! quantity against the closed-form prediction from [`crate::observables`].
//! Lengths are physical (lattice spacings), so the row pitch of
//! `sqrt(3)/2` is accounted for.

use std::f64::consts::PI;
use std::fmt;

use rayon::prelude::*;

use crate::boundary::BoundaryKind;
use crate::engine::{RunOutput, Simulation};
use crate::error::Result;
use crate::lattice::{Direction, Geometry, Lattice, LatticeUnits, SQRT3_2};
use crate::observables::{equilibrium_occupation, sound_speed, theory_viscosity, TheoryParams};
use crate::scenario::{fill_with, Scenario};

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeResult {
    pub name: String,
    pub units: String,
    pub measured: Option<f64>,
    pub theory: Option<f64>,
    /// Set when the probe could not extract a signal.
    pub inconclusive: Option<String>,
    /// Extra fitted numbers (slope error, R², ...).
    pub diagnostics: Vec<(String, f64)>,
    pub series_header: [String; 2],
    pub series: Vec<(f64, f64)>,
}

impl ProbeResult {
    fn new(name: &str, units: &str, header: [&str; 2]) -> Self {
        ProbeResult {
            name: name.into(),
            units: units.into(),
            measured: None,
            theory: None,
            inconclusive: None,
            diagnostics: Vec::new(),
            series_header: header.map(String::from),
            series: Vec::new(),
        }
    }

    /// `|measured - theory| / |theory|` when both exist and theory is non-zero.
    pub fn relative_error(&self) -> Option<f64> {
        match (self.measured, self.theory) {
            (Some(m), Some(t)) if t != 0.0 => Some((m - t).abs() / t.abs()),
            _ => None,
        }
    }

    pub fn is_conclusive(&self) -> bool {
        self.inconclusive.is_none() && self.measured.is_some()
    }

    pub fn diagnostic(&self, key: &str) -> Option<f64> {
        self.diagnostics.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }

    pub fn series_csv(&self) -> String {
        let [a, b] = &self.series_header;
        crate::io::series_csv([a, b], &self.series)
    }
}

impl fmt::Display for ProbeResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let num = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.6}"));
        writeln!(
            f,
            "{:<18} {:>14} {:>14} {:>10}  status",
            "probe", "measured", "theory", "rel.err"
        )?;
        let status = match &self.inconclusive {
            None => "ok".to_string(),
            Some(why) => format!("inconclusive: {why}"),
        };
        writeln!(
            f,
            "{:<18} {:>14} {:>14} {:>10}  {}",
            self.name,
            num(self.measured),
            num(self.theory),
            self.relative_error()
                .map_or("-".into(), |e| format!("{:.2}%", 100.0 * e)),
            status
        )?;
        writeln!(f, "units: {}", self.units)?;
        for (k, v) in &self.diagnostics {
            writeln!(f, "  {k} = {v:.6}")?;
        }
        Ok(())
    }
}

/// Least-squares line `y = a + b x`; returns `(a, b, r_squared, slope_stderr)`.
pub fn linear_fit(points: &[(f64, f64)]) -> Option<(f64, f64, f64, f64)> {
    let n = points.len();
    if n < 3 {
        return None;
    }
    let nf = n as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = points.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let b = sxy / sxx;
    let a = my - b * mx;
    let ss_res: f64 = points.iter().map(|p| (p.1 - a - b * p.0).powi(2)).sum();
    let r2 = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    let stderr = (ss_res / (nf - 2.0) / sxx).sqrt();
    Some((a, b, r2, stderr))
}

/// Relaxation of the coarse density towards uniformity.
///
/// The series is the trailing-window block-density standard deviation; the
/// measured value is the first step at which it drops below 10% of its
/// initial value.
pub fn probe_relaxation(output: &RunOutput) -> ProbeResult {
    let mut r = ProbeResult::new("relaxation", "steps", ["step", "density_std"]);
    r.series = output.windowed_std.clone();
    let Some(&(_, initial)) = r.series.first() else {
        r.inconclusive = Some("empty run".into());
        return r;
    };
    r.diagnostics.push(("initial_std".into(), initial));
    if let Some(&(_, last)) = r.series.last() {
        r.diagnostics.push(("final_std".into(), last));
        if output.mean_density > 0.0 {
            r.diagnostics
                .push(("final_relative_std".into(), last / output.mean_density));
        }
    }
    match r.series.iter().find(|&&(_, s)| s < 0.1 * initial) {
        Some(&(t, _)) => r.measured = Some(t),
        None => r.inconclusive = Some("density spread never fell below 10% of its initial value".into()),
    }
    r
}

/// Spread of an initial disk of over-density, tracked as the radius of the
/// maximum of the azimuthally averaged density excess.
#[derive(Clone, Debug)]
pub struct SoundProbe {
    pub width: usize,
    pub height: usize,
    pub fill: f64,
    /// Extra per-direction occupation inside the disk.
    pub delta: f64,
    pub radius: f64,
    pub steps: u64,
    /// First sample; earlier samples overlap the initial disk.
    pub first_sample: u64,
    pub sample_every: u64,
    pub seed: u64,
    pub ensembles: usize,
    pub workers: usize,
}

impl Default for SoundProbe {
    fn default() -> Self {
        SoundProbe {
            width: 200,
            height: 200,
            fill: 0.3,
            delta: 0.1,
            radius: 12.0,
            steps: 80,
            first_sample: 24,
            sample_every: 4,
            seed: 1,
            ensembles: 16,
            workers: 1,
        }
    }
}

const RADIAL_BIN: f64 = 1.0;
const PEAK_HALF_WIDTH: usize = 4;

impl SoundProbe {
    pub fn run(&self) -> Result<ProbeResult> {
        let geometry = Geometry::periodic(self.width, self.height)?;
        let [ew, eh] = geometry.extent();
        let center = [ew / 2.0, eh / 2.0];
        let nbins = ((ew.min(eh) / 2.0) / RADIAL_BIN) as usize;
        let bin_of: Vec<Option<usize>> = (0..geometry.len())
            .map(|i| {
                let p = geometry.position(geometry.site(i));
                let r = (p[0] - center[0]).hypot(p[1] - center[1]);
                let b = (r / RADIAL_BIN) as usize;
                (b < nbins).then_some(b)
            })
            .collect();
        let mut sites_per_bin = vec![0u64; nbins];
        for b in bin_of.iter().flatten() {
            sites_per_bin[*b] += 1;
        }
        let samples: Vec<u64> = (self.first_sample..=self.steps)
            .step_by(self.sample_every as usize)
            .collect();

        let template = Lattice::new(geometry);
        let run_one = |e: usize| -> Vec<Vec<u64>> {
            let seed = self.seed.wrapping_add(e as u64);
            let initial = fill_with(&template, seed, |_, pos, _| {
                let r = (pos[0] - center[0]).hypot(pos[1] - center[1]);
                if r <= self.radius {
                    (self.fill + self.delta).min(1.0)
                } else {
                    self.fill
                }
            });
            let mut sim = Simulation::new(initial, seed);
            let mut profiles = Vec::with_capacity(samples.len());
            for &t in &samples {
                sim.advance(t - sim.time());
                let mut mass = vec![0u64; nbins];
                for (s, b) in sim.lattice().cells().iter().zip(&bin_of) {
                    if let Some(b) = b {
                        mass[*b] += s.mass() as u64;
                    }
                }
                profiles.push(mass);
            }
            profiles
        };
        let per_ensemble: Vec<Vec<Vec<u64>>> = if self.workers > 1 {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(self.workers)
                .build()
                .map_err(|e| crate::error::Error::Config(e.to_string()))?;
            pool.install(|| (0..self.ensembles).into_par_iter().map(run_one).collect())
        } else {
            (0..self.ensembles).map(run_one).collect()
        };

        let params = TheoryParams::hexagonal(LatticeUnits::default());
        let mut result = ProbeResult::new("sound_speed", "lattice spacings per step", ["step", "ring_radius"]);
        result.theory = Some(sound_speed(&params));

        let background = 6.0 * self.fill;
        let site_var = 6.0 * self.fill * (1.0 - self.fill);
        let e = self.ensembles as f64;
        let min_bin = 3;
        for (k, &t) in samples.iter().enumerate() {
            let total = |b: usize| per_ensemble.iter().map(|p| p[k][b]).sum::<u64>() as f64;
            // three-bin running mean of the excess density
            let smooth: Vec<(f64, f64)> = (1..nbins - 1)
                .map(|b| {
                    let mass: f64 = (b - 1..=b + 1).map(total).sum();
                    let sites: f64 = (b - 1..=b + 1).map(|j| sites_per_bin[j] as f64).sum();
                    let excess = mass / (sites * e) - background;
                    let sigma = (site_var / (sites * e)).sqrt();
                    (excess, sigma)
                })
                .collect();
            let (i_max, &(peak, sigma)) = smooth
                .iter()
                .enumerate()
                .skip(min_bin)
                .take(smooth.len().saturating_sub(min_bin + 1))
                .max_by(|a, b| a.1 .0.total_cmp(&b.1 .0))
                .expect("profile has bins");
            if peak < 5.0 * sigma {
                result.inconclusive = Some(format!(
                    "no density ring above noise at step {t} (peak {peak:.4}, 5 sigma {:.4})",
                    5.0 * sigma
                ));
                return Ok(result);
            }
            // excess-weighted centroid over the bins around the maximum
            let lo = i_max.saturating_sub(PEAK_HALF_WIDTH);
            let hi = (i_max + PEAK_HALF_WIDTH).min(smooth.len() - 1);
            let (mut wsum, mut rsum) = (0.0, 0.0);
            for (i, &(excess, _)) in smooth.iter().enumerate().take(hi + 1).skip(lo) {
                if excess > 0.0 {
                    // smooth[i] is centred on bin i + 1
                    wsum += excess;
                    rsum += excess * (i as f64 + 1.5) * RADIAL_BIN;
                }
            }
            let radius = rsum / wsum;
            result.series.push((t as f64, radius));
        }

        match linear_fit(&result.series) {
            Some((intercept, slope, r2, stderr)) => {
                result.diagnostics.push(("intercept".into(), intercept));
                result.diagnostics.push(("slope_stderr".into(), stderr));
                result.diagnostics.push(("r_squared".into(), r2));
                if slope <= 0.0 {
                    result.inconclusive = Some("ring radius does not grow".into());
                }
                result.measured = Some(slope);
            }
            None => result.inconclusive = Some("too few samples to fit".into()),
        }
        Ok(result)
    }
}

/// Decay of a sinusoidal shear wave `u_x(y) = U sin(k y)`.
///
/// The wave is imprinted through the low-Mach equilibrium occupations; the
/// Fourier amplitude of `u_x` is averaged over an ensemble of seeds and fitted
/// to `exp(-nu k^2 t)`.
#[derive(Clone, Debug)]
pub struct ViscosityProbe {
    pub width: usize,
    pub height: usize,
    pub fill: f64,
    pub amplitude: f64,
    pub steps: u64,
    /// Samples before this step are dropped from the fit.
    pub skip: u64,
    pub sample_every: u64,
    pub seed: u64,
    pub ensembles: usize,
    pub workers: usize,
}

impl Default for ViscosityProbe {
    fn default() -> Self {
        ViscosityProbe {
            width: 128,
            height: 128,
            fill: 0.5,
            amplitude: 0.1,
            steps: 300,
            skip: 10,
            sample_every: 5,
            seed: 1,
            ensembles: 16,
            workers: 1,
        }
    }
}

impl ViscosityProbe {
    /// Physical wave number of the fundamental mode along `y`.
    pub fn wave_number(&self) -> f64 {
        2.0 * PI / (self.height as f64 * SQRT3_2)
    }

    pub fn run(&self) -> Result<ProbeResult> {
        let geometry = Geometry::periodic(self.width, self.height)?;
        let params = TheoryParams::hexagonal(LatticeUnits::default());
        let rho = 6.0 * self.fill;
        let k = self.wave_number();
        let sin_row: Vec<f64> = (0..self.height).map(|y| (k * y as f64 * SQRT3_2).sin()).collect();
        let template = Lattice::new(geometry);

        // occupation probability per (row, direction)
        let mut probability = vec![[0.0; 6]; self.height];
        for (y, p) in probability.iter_mut().enumerate() {
            let u = [self.amplitude * sin_row[y], 0.0];
            for d in Direction::ALL {
                p[d.index()] = equilibrium_occupation(rho, u, d, &params)?.clamp(0.0, 1.0);
            }
        }

        let samples: Vec<u64> = (0..=self.steps).step_by(self.sample_every as usize).collect();
        let n_sites = geometry.len() as f64;
        let run_one = |e: usize| -> Vec<f64> {
            let seed = self.seed.wrapping_add(e as u64);
            let initial = fill_with(&template, seed, |p, _, d| probability[p.y][d.index()]);
            let mut sim = Simulation::new(initial, seed);
            let mut amplitudes = Vec::with_capacity(samples.len());
            for &t in &samples {
                sim.advance(t - sim.time());
                // x-momentum in half units, projected on sin(k y)
                let w = self.width;
                let proj: f64 = sim
                    .lattice()
                    .cells()
                    .chunks(w)
                    .zip(&sin_row)
                    .map(|(row, s)| row.iter().map(|c| c.exact_momentum().0 as f64).sum::<f64>() * s)
                    .sum();
                amplitudes.push(2.0 * 0.5 * proj / n_sites / rho);
            }
            amplitudes
        };
        let per_ensemble: Vec<Vec<f64>> = if self.workers > 1 {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(self.workers)
                .build()
                .map_err(|e| crate::error::Error::Config(e.to_string()))?;
            pool.install(|| (0..self.ensembles).into_par_iter().map(run_one).collect())
        } else {
            (0..self.ensembles).map(run_one).collect()
        };

        let e = self.ensembles as f64;
        let mut result = ProbeResult::new("viscosity", "lattice spacings^2 per step", ["step", "mode_amplitude"]);
        result.theory = theory_viscosity(rho, &params, 1.0).ok();
        result.series = samples
            .iter()
            .enumerate()
            .map(|(i, &t)| (t as f64, per_ensemble.iter().map(|a| a[i]).sum::<f64>() / e))
            .collect();

        // shot noise of the projected amplitude
        let noise = (2.0 / n_sites).sqrt() * (3.0 * self.fill * (1.0 - self.fill)).sqrt() / rho / e.sqrt();
        result.diagnostics.push(("noise".into(), noise));
        result.diagnostics.push(("wave_number".into(), k));
        let usable: Vec<(f64, f64)> = result
            .series
            .iter()
            .filter(|&&(t, _)| t >= self.skip as f64)
            .take_while(|&&(_, a)| a > 10.0 * noise)
            .map(|&(t, a)| (t, a.ln()))
            .collect();
        if usable.len() < 3 {
            result.inconclusive = Some("shear mode amplitude is below the noise floor".into());
            return Ok(result);
        }
        let (_, slope, r2, stderr) = linear_fit(&usable).expect("three or more points");
        let rate = -slope;
        result.diagnostics.push(("decay_rate".into(), rate));
        result.diagnostics.push(("decay_rate_stderr".into(), stderr));
        result.diagnostics.push(("r_squared".into(), r2));
        result.diagnostics.push(("fit_points".into(), usable.len() as f64));
        if rate <= 0.0 {
            result.inconclusive = Some("fitted decay rate is not positive".into());
            return Ok(result);
        }
        result.measured = Some(rate / (k * k));
        Ok(result)
    }
}

/// Biased flow towards the walled right edge; measures the density in the
/// fluid columns next to that wall relative to the fluid average.
#[derive(Clone, Debug)]
pub struct WallProbe {
    pub width: usize,
    pub height: usize,
    pub fill: f64,
    pub bias_fill: f64,
    pub steps: u64,
    /// Steps averaged at the end of the run.
    pub window: u64,
    pub columns: usize,
    pub seed: u64,
}

impl Default for WallProbe {
    fn default() -> Self {
        WallProbe {
            width: 100,
            height: 100,
            fill: 0.3,
            bias_fill: 0.9,
            steps: 100,
            window: 20,
            columns: 3,
            seed: 1,
        }
    }
}

impl WallProbe {
    pub fn run(&self) -> Result<ProbeResult> {
        let geometry = Geometry::new(self.width, self.height, BoundaryKind::Walled)?;
        let template = Lattice::new(geometry);
        let scenario = Scenario::channel_flow(self.fill, Direction::new(0).expect("east"), self.bias_fill);
        let initial = scenario.init(&template, self.seed)?;
        let mut sim = Simulation::new(initial, self.seed);
        let fluid_rows = (1..self.height - 1).count() as f64;

        let mut column_mass = vec![0u64; self.width];
        let start = self.steps.saturating_sub(self.window.saturating_sub(1));
        let mut averaged = 0u64;
        let mut result = ProbeResult::new("wall_density", "ratio to fluid mean", ["column", "density"]);
        for t in 0..=self.steps {
            if t > 0 {
                sim.step();
            }
            if t >= start {
                for row in sim.lattice().cells().chunks(self.width).skip(1).take(self.height - 2) {
                    for (x, s) in row.iter().enumerate() {
                        column_mass[x] += s.mass() as u64;
                    }
                }
                averaged += 1;
            }
        }
        let fluid_columns = 1..self.width - 1;
        let density: Vec<f64> = column_mass
            .iter()
            .map(|&m| m as f64 / (fluid_rows * averaged as f64))
            .collect();
        let bulk = fluid_columns.clone().map(|x| density[x]).sum::<f64>() / fluid_columns.len() as f64;
        let near = (self.width - 1 - self.columns..self.width - 1)
            .map(|x| density[x])
            .sum::<f64>()
            / self.columns as f64;
        result.series = fluid_columns.map(|x| (x as f64, density[x])).collect();
        result.diagnostics.push(("bulk_density".into(), bulk));
        result.diagnostics.push(("near_wall_density".into(), near));
        result.measured = Some(near / bulk);
        Ok(result)
    }
}

/// Per-direction occupations averaged over all sites and `steps`
/// consecutive states (the initial state included).
pub fn time_averaged_occupations(initial: Lattice, seed: u64, steps: u64) -> [f64; 6] {
    let sites = initial.cells().len() as f64;
    let mut sim = Simulation::new(initial, seed);
    let mut counts = [0u64; 6];
    for t in 0..steps {
        if t > 0 {
            sim.step();
        }
        for s in sim.lattice().cells() {
            let b = s.bits();
            for (i, c) in counts.iter_mut().enumerate() {
                *c += (b >> i & 1) as u64;
            }
        }
    }
    counts.map(|c| c as f64 / (sites * steps as f64))
}
