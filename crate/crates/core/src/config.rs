//! Flat `key = value` run configuration.
//!
//! ```text
//! # 100x100 density hole
//! width = 100
//! height = 100
//! steps = 300
//! seed = 42
//! scenario = hole
//! fill = 0.667
//! ```
//!
//! Required keys: `width`, `height`, `steps`, `seed`, `scenario`, `fill`.
//! `region` may repeat. Unknown and duplicate keys are errors.

use std::collections::HashMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::boundary::BoundaryKind;
use crate::error::{Error, Result};
use crate::lattice::{Direction, Geometry};
use crate::scenario::{Bias, Region, Scenario, ScenarioKind};

const REQUIRED: [&str; 6] = ["width", "height", "steps", "seed", "scenario", "fill"];

const KNOWN: [&str; 22] = [
    "width",
    "height",
    "steps",
    "seed",
    "scenario",
    "fill",
    "bias_direction",
    "bias_fill",
    "region",
    "boundary",
    "mask",
    "block",
    "window",
    "frame_every",
    "output_dir",
    "workers",
    "amplitude",
    "ensembles",
    "delta",
    "pulse_radius",
    "probe_steps",
    "sample_every",
];

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub width: usize,
    pub height: usize,
    pub steps: u64,
    pub seed: u64,
    pub scenario: ScenarioKind,
    pub fill: f64,
    /// Internal direction index `0..6`, `0` = `+x`.
    pub bias_direction: usize,
    pub bias_fill: Option<f64>,
    pub regions: Vec<Region>,
    pub boundary: BoundaryKind,
    pub mask: Option<PathBuf>,
    pub block: usize,
    pub window: usize,
    /// Write a frame every this many steps; `0` writes only the last one.
    pub frame_every: u64,
    pub output_dir: PathBuf,
    pub workers: usize,
    /// Probe settings, used by `measure`.
    pub amplitude: f64,
    pub ensembles: usize,
    pub delta: f64,
    pub pulse_radius: f64,
    pub probe_steps: Option<u64>,
    pub sample_every: u64,
}

impl SimConfig {
    /// Defaults for everything except the required keys.
    pub fn new(width: usize, height: usize, steps: u64, seed: u64, scenario: ScenarioKind, fill: f64) -> Self {
        SimConfig {
            width,
            height,
            steps,
            seed,
            scenario,
            fill,
            bias_direction: 0,
            bias_fill: None,
            regions: Vec::new(),
            boundary: BoundaryKind::Periodic,
            mask: None,
            block: 10,
            window: 50,
            frame_every: 50,
            output_dir: PathBuf::from("out"),
            workers: 1,
            amplitude: 0.1,
            ensembles: 16,
            delta: 0.1,
            pulse_radius: 12.0,
            probe_steps: None,
            sample_every: 4,
        }
    }

    pub fn geometry(&self) -> Result<Geometry> {
        Geometry::new(self.width, self.height, self.boundary)
    }

    pub fn scenario(&self) -> Scenario {
        Scenario {
            kind: self.scenario,
            fill: self.fill,
            bias: self.bias_fill.map(|fill| Bias {
                direction: Direction::new(self.bias_direction).expect("validated direction"),
                fill,
            }),
            regions: self.regions.clone(),
        }
    }

    /// Cross-field checks. `line_of` maps keys to source lines for error
    /// messages (0 when not from a file).
    fn validate_with(&self, line_of: &dyn Fn(&str) -> usize) -> Result<()> {
        let range = |key: &str, message: String| Error::Range {
            key: key.into(),
            line: line_of(key),
            message,
        };
        if self.width == 0 {
            return Err(range("width", "must be positive".into()));
        }
        if self.height == 0 {
            return Err(range("height", "must be positive".into()));
        }
        if self.boundary == BoundaryKind::Periodic && !self.height.is_multiple_of(2) {
            return Err(range("height", "periodic lattices need an even height".into()));
        }
        if self.boundary == BoundaryKind::Walled && (self.width < 3 || self.height < 3) {
            return Err(range("width", "walled lattices need at least 3x3 sites".into()));
        }
        if !(0.0..=1.0).contains(&self.fill) {
            return Err(range("fill", format!("{} is outside [0, 1]", self.fill)));
        }
        if self.bias_direction > 5 {
            return Err(range(
                "bias_direction",
                format!("{} is not in 0..=5", self.bias_direction),
            ));
        }
        if let Some(b) = self.bias_fill {
            if !(0.0..=1.0).contains(&b) {
                return Err(range("bias_fill", format!("{b} is outside [0, 1]")));
            }
        }
        if self.scenario == ScenarioKind::ChannelFlow && self.bias_fill.is_none() {
            return Err(Error::MissingKey("bias_fill".into()));
        }
        if self.block == 0 || !self.width.is_multiple_of(self.block) || !self.height.is_multiple_of(self.block) {
            return Err(range(
                "block",
                format!("{} must divide {}x{}", self.block, self.width, self.height),
            ));
        }
        if self.window == 0 {
            return Err(range("window", "must be at least 1".into()));
        }
        if self.workers == 0 {
            return Err(range("workers", "must be at least 1".into()));
        }
        if !(self.amplitude >= 0.0 && self.amplitude.is_finite()) {
            return Err(range("amplitude", format!("{} must be non-negative", self.amplitude)));
        }
        if self.ensembles == 0 {
            return Err(range("ensembles", "must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.delta) {
            return Err(range("delta", format!("{} is outside [0, 1]", self.delta)));
        }
        if !(self.pulse_radius > 0.0 && self.pulse_radius.is_finite()) {
            return Err(range("pulse_radius", "must be positive".into()));
        }
        if self.sample_every == 0 {
            return Err(range("sample_every", "must be at least 1".into()));
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_with(&|_| 0)
    }
}

impl fmt::Display for SimConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "width = {}", self.width)?;
        writeln!(f, "height = {}", self.height)?;
        writeln!(f, "steps = {}", self.steps)?;
        writeln!(f, "seed = {}", self.seed)?;
        writeln!(f, "scenario = {}", self.scenario)?;
        writeln!(f, "fill = {}", self.fill)?;
        writeln!(f, "bias_direction = {}", self.bias_direction)?;
        if let Some(b) = self.bias_fill {
            writeln!(f, "bias_fill = {b}")?;
        }
        for r in &self.regions {
            writeln!(f, "region = {r}")?;
        }
        writeln!(f, "boundary = {}", self.boundary)?;
        if let Some(m) = &self.mask {
            writeln!(f, "mask = {}", m.display())?;
        }
        writeln!(f, "block = {}", self.block)?;
        writeln!(f, "window = {}", self.window)?;
        writeln!(f, "frame_every = {}", self.frame_every)?;
        writeln!(f, "output_dir = {}", self.output_dir.display())?;
        writeln!(f, "workers = {}", self.workers)?;
        writeln!(f, "amplitude = {}", self.amplitude)?;
        writeln!(f, "ensembles = {}", self.ensembles)?;
        writeln!(f, "delta = {}", self.delta)?;
        writeln!(f, "pulse_radius = {}", self.pulse_radius)?;
        if let Some(s) = self.probe_steps {
            writeln!(f, "probe_steps = {s}")?;
        }
        writeln!(f, "sample_every = {}", self.sample_every)
    }
}

fn value<T: FromStr>(key: &str, raw: &str, line: usize) -> Result<T>
where
    T::Err: fmt::Display,
{
    raw.parse::<T>().map_err(|e| Error::Range {
        key: key.into(),
        line,
        message: format!("cannot parse `{raw}`: {e}"),
    })
}

/// Parse and validate a configuration file.
pub fn parse_config(text: &str) -> Result<SimConfig> {
    let mut entries: HashMap<&str, (&str, usize)> = HashMap::new();
    let mut regions = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, val) = content.split_once('=').ok_or_else(|| Error::ConfigLine {
            line,
            message: format!("expected `key = value`, got `{content}`"),
        })?;
        let (key, val) = (key.trim(), val.trim());
        if !KNOWN.contains(&key) {
            return Err(Error::UnknownKey { key: key.into(), line });
        }
        if key == "region" {
            regions.push((value::<Region>(key, val, line)?, line));
            continue;
        }
        if let Some((_, first)) = entries.insert(key, (val, line)) {
            return Err(Error::ConfigLine {
                line,
                message: format!("duplicate key `{key}` (first set on line {first})"),
            });
        }
    }
    for key in REQUIRED {
        if !entries.contains_key(key) {
            return Err(Error::MissingKey(key.into()));
        }
    }

    let get = |key: &str| entries.get(key).copied();
    macro_rules! required {
        ($key:literal) => {{
            let (raw, line) = get($key).expect("checked above");
            value($key, raw, line)?
        }};
    }
    macro_rules! optional {
        ($key:literal, $default:expr) => {
            match get($key) {
                Some((raw, line)) => value($key, raw, line)?,
                None => $default,
            }
        };
    }

    let mut cfg = SimConfig::new(
        required!("width"),
        required!("height"),
        required!("steps"),
        required!("seed"),
        required!("scenario"),
        required!("fill"),
    );
    cfg.bias_direction = optional!("bias_direction", cfg.bias_direction);
    cfg.bias_fill = match get("bias_fill") {
        Some((raw, line)) => Some(value("bias_fill", raw, line)?),
        None => None,
    };
    cfg.regions = regions.iter().map(|(r, _)| *r).collect();
    cfg.boundary = optional!("boundary", cfg.boundary);
    cfg.mask = get("mask").map(|(raw, _)| PathBuf::from(raw));
    cfg.block = optional!("block", cfg.block);
    cfg.window = optional!("window", cfg.window);
    cfg.frame_every = optional!("frame_every", cfg.frame_every);
    cfg.output_dir = optional!("output_dir", cfg.output_dir.clone());
    cfg.workers = optional!("workers", cfg.workers);
    cfg.amplitude = optional!("amplitude", cfg.amplitude);
    cfg.ensembles = optional!("ensembles", cfg.ensembles);
    cfg.delta = optional!("delta", cfg.delta);
    cfg.pulse_radius = optional!("pulse_radius", cfg.pulse_radius);
    cfg.probe_steps = match get("probe_steps") {
        Some((raw, line)) => Some(value("probe_steps", raw, line)?),
        None => None,
    };
    cfg.sample_every = optional!("sample_every", cfg.sample_every);

    cfg.validate_with(&|key| get(key).map_or(0, |(_, line)| line))?;
    let g = cfg.geometry()?;
    for (r, line) in &regions {
        r.check(&g).map_err(|e| Error::Range {
            key: "region".into(),
            line: *line,
            message: e.to_string(),
        })?;
    }
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    const HOLE: &str = "width = 100\nheight = 100\nsteps = 300\nseed = 42\nscenario = hole\nfill = 0.667";

    #[test]
    fn minimal_config_parses() {
        let cfg = parse_config(HOLE).unwrap();
        assert_eq!((cfg.width, cfg.height, cfg.steps, cfg.seed), (100, 100, 300, 42));
        assert_eq!(cfg.scenario, ScenarioKind::Hole);
        assert_eq!(cfg.fill, 0.667);
        assert_eq!(cfg.block, 10);
    }

    #[test]
    fn fill_out_of_range() {
        let text = HOLE.replace("fill = 0.667", "fill = 1.5");
        match parse_config(&text).unwrap_err() {
            Error::Range { key, line, .. } => assert_eq!((key.as_str(), line), ("fill", 6)),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn unknown_key_names_line() {
        match parse_config("widht = 100").unwrap_err() {
            Error::UnknownKey { key, line } => assert_eq!((key.as_str(), line), ("widht", 1)),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn missing_key() {
        let text = HOLE.replace("seed = 42\n", "");
        assert!(matches!(parse_config(&text), Err(Error::MissingKey(k)) if k == "seed"));
    }

    #[test]
    fn comments_and_blank_lines() {
        let text = format!("# header\n\n{HOLE}  # trailing\nregion = disk 50 40 10\nregion = rect 1 1 5 5\n");
        let cfg = parse_config(&text).unwrap();
        assert_eq!(cfg.regions.len(), 2);
    }

    #[test]
    fn bad_values() {
        assert!(parse_config(&format!("{HOLE}\nblock = 7")).is_err());
        assert!(parse_config(&HOLE.replace("height = 100", "height = 99")).is_err());
        assert!(parse_config(&format!("{HOLE}\nboundary = walled\nheight = 99")).is_err());
        assert!(parse_config(&HOLE.replace("scenario = hole", "scenario = vortex")).is_err());
        assert!(parse_config(&format!("{HOLE}\nregion = disk 5 5 30")).is_err());
        assert!(parse_config(&format!("{HOLE}\nfill = 0.5")).is_err());
        assert!(parse_config("width 100").is_err());
        let channel = HOLE.replace("scenario = hole", "scenario = channel_flow");
        assert!(matches!(parse_config(&channel), Err(Error::MissingKey(k)) if k == "bias_fill"));
        assert!(parse_config(&format!("{channel}\nbias_fill = 0.9")).is_ok());
    }

    #[test]
    fn round_trip() {
        let mut cfg = parse_config(HOLE).unwrap();
        cfg.regions = vec![Region::Disk {
            cx: 50.0,
            cy: 43.3,
            r: 20.0,
        }];
        cfg.bias_fill = Some(0.25);
        cfg.mask = Some("obstacle.pbm".into());
        cfg.probe_steps = Some(120);
        let text = cfg.to_string();
        assert_eq!(parse_config(&text).unwrap(), cfg);
    }
}
