//! Initial conditions: uniform gas, density holes, and biased channel flow.
//!
//! Every `(site, direction)` link of a fluid site outside the zero regions
//! is an independent Bernoulli draw. Region coordinates are physical
//! positions in lattice spacings (see [`Geometry::position`]).

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::boundary::CellKind;
use crate::error::{Error, Result};
use crate::lattice::{Direction, Geometry, Lattice, Site, SiteState};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ScenarioKind {
    Uniform,
    /// Centered empty disk.
    Hole,
    /// Several disjoint empty regions.
    MultiHole,
    /// Uniform gas with one direction over-populated.
    ChannelFlow,
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScenarioKind::Uniform => "uniform",
            ScenarioKind::Hole => "hole",
            ScenarioKind::MultiHole => "multi_hole",
            ScenarioKind::ChannelFlow => "channel_flow",
        })
    }
}

impl FromStr for ScenarioKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "uniform" => Ok(ScenarioKind::Uniform),
            "hole" => Ok(ScenarioKind::Hole),
            "multi_hole" => Ok(ScenarioKind::MultiHole),
            "channel_flow" => Ok(ScenarioKind::ChannelFlow),
            other => Err(format!(
                "expected uniform, hole, multi_hole or channel_flow, got `{other}`"
            )),
        }
    }
}

/// Zero-density shape in physical coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Region {
    Disk { cx: f64, cy: f64, r: f64 },
    Rect { x0: f64, y0: f64, x1: f64, y1: f64 },
}

impl Region {
    pub fn contains(&self, p: [f64; 2]) -> bool {
        match *self {
            Region::Disk { cx, cy, r } => (p[0] - cx).powi(2) + (p[1] - cy).powi(2) <= r * r,
            Region::Rect { x0, y0, x1, y1 } => p[0] >= x0 && p[0] <= x1 && p[1] >= y0 && p[1] <= y1,
        }
    }

    fn bounds(&self) -> [f64; 4] {
        match *self {
            Region::Disk { cx, cy, r } => [cx - r, cy - r, cx + r, cy + r],
            Region::Rect { x0, y0, x1, y1 } => [x0, y0, x1, y1],
        }
    }

    pub fn check(&self, geometry: &Geometry) -> Result<()> {
        let [w, h] = geometry.extent();
        let [x0, y0, x1, y1] = self.bounds();
        let finite = [x0, y0, x1, y1].iter().all(|v| v.is_finite());
        if !finite || x0 > x1 || y0 > y1 || x0 < 0.0 || y0 < 0.0 || x1 > w || y1 > h {
            return Err(Error::Config(format!(
                "region {self} does not fit inside the {w} x {h:.3} lattice"
            )));
        }
        Ok(())
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Region::Disk { cx, cy, r } => write!(f, "disk {cx} {cy} {r}"),
            Region::Rect { x0, y0, x1, y1 } => write!(f, "rect {x0} {y0} {x1} {y1}"),
        }
    }
}

impl FromStr for Region {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let mut parts = s.split_whitespace();
        let kind = parts.next().ok_or("empty region")?;
        let nums: Vec<f64> = parts
            .map(|p| p.parse::<f64>().map_err(|_| format!("invalid number `{p}`")))
            .collect::<std::result::Result<_, _>>()?;
        match (kind, nums.as_slice()) {
            ("disk", &[cx, cy, r]) if r >= 0.0 => Ok(Region::Disk { cx, cy, r }),
            ("rect", &[x0, y0, x1, y1]) => Ok(Region::Rect { x0, y0, x1, y1 }),
            _ => Err(format!("expected `disk cx cy r` or `rect x0 y0 x1 y1`, got `{s}`")),
        }
    }
}

/// A preferred direction with its own occupation probability.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bias {
    pub direction: Direction,
    pub fill: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub kind: ScenarioKind,
    /// Per-direction occupation probability.
    pub fill: f64,
    pub bias: Option<Bias>,
    /// Explicit zero regions. Empty means the default layout for `kind`.
    pub regions: Vec<Region>,
}

impl Scenario {
    pub fn uniform(fill: f64) -> Self {
        Scenario {
            kind: ScenarioKind::Uniform,
            fill,
            bias: None,
            regions: Vec::new(),
        }
    }

    pub fn hole(fill: f64) -> Self {
        Scenario {
            kind: ScenarioKind::Hole,
            ..Scenario::uniform(fill)
        }
    }

    pub fn multi_hole(fill: f64) -> Self {
        Scenario {
            kind: ScenarioKind::MultiHole,
            ..Scenario::uniform(fill)
        }
    }

    /// Flow along `direction`, which is filled with probability `bias_fill`.
    pub fn channel_flow(fill: f64, direction: Direction, bias_fill: f64) -> Self {
        Scenario {
            kind: ScenarioKind::ChannelFlow,
            fill,
            bias: Some(Bias {
                direction,
                fill: bias_fill,
            }),
            regions: Vec::new(),
        }
    }

    #[must_use]
    pub fn with_regions(mut self, regions: Vec<Region>) -> Self {
        self.regions = regions;
        self
    }

    /// Zero regions used on `geometry`: the explicit list, or the default
    /// layout for the scenario kind.
    pub fn regions_for(&self, geometry: &Geometry) -> Vec<Region> {
        if !self.regions.is_empty() {
            return self.regions.clone();
        }
        let [w, h] = geometry.extent();
        let side = geometry.width().min(geometry.height()) as f64;
        match self.kind {
            ScenarioKind::Hole => vec![Region::Disk {
                cx: w / 2.0,
                cy: h / 2.0,
                r: side / 5.0,
            }],
            ScenarioKind::MultiHole => {
                let r = side / 8.0;
                let mut regions = Vec::new();
                for (fx, fy) in [(0.25, 0.25), (0.75, 0.25), (0.25, 0.75), (0.75, 0.75)] {
                    regions.push(Region::Disk {
                        cx: fx * w,
                        cy: fy * h,
                        r,
                    });
                }
                regions.push(Region::Rect {
                    x0: 0.5 * w - r / 2.0,
                    y0: 0.5 * h - r / 2.0,
                    x1: 0.5 * w + r / 2.0,
                    y1: 0.5 * h + r / 2.0,
                });
                regions
            }
            ScenarioKind::Uniform | ScenarioKind::ChannelFlow => Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.fill) {
            return Err(Error::Config(format!("fill {} outside [0, 1]", self.fill)));
        }
        if let Some(b) = self.bias {
            if !(0.0..=1.0).contains(&b.fill) {
                return Err(Error::Config(format!("bias fill {} outside [0, 1]", b.fill)));
            }
        }
        if self.kind == ScenarioKind::ChannelFlow && self.bias.is_none() {
            return Err(Error::Config("channel_flow needs a biased direction".into()));
        }
        Ok(())
    }

    fn probability(&self, dir: Direction) -> f64 {
        match self.bias {
            Some(b) if b.direction == dir => b.fill,
            _ => self.fill,
        }
    }

    /// Expected particle count on `template`.
    pub fn expected_mass(&self, template: &Lattice) -> f64 {
        let open = open_fluid_sites(template, &self.regions_for(template.geometry()));
        let per_site: f64 = Direction::ALL.iter().map(|&d| self.probability(d)).sum();
        per_site * open as f64
    }

    /// Populate a copy of `template` (geometry, mask and units are kept).
    pub fn init(&self, template: &Lattice, seed: u64) -> Result<Lattice> {
        self.validate()?;
        let regions = self.regions_for(template.geometry());
        for r in &regions {
            r.check(template.geometry())?;
        }
        Ok(fill_with(template, seed, |_, pos, dir| {
            if regions.iter().any(|r| r.contains(pos)) {
                0.0
            } else {
                self.probability(dir)
            }
        }))
    }
}

/// Free-function form of [`Scenario::init`].
pub fn init(scenario: &Scenario, template: &Lattice, seed: u64) -> Result<Lattice> {
    scenario.init(template, seed)
}

fn open_fluid_sites(template: &Lattice, regions: &[Region]) -> usize {
    let g = template.geometry();
    (0..g.len())
        .map(|i| g.site(i))
        .filter(|&p| template.kind(p) == CellKind::Fluid)
        .filter(|&p| !regions.iter().any(|r| r.contains(g.position(p))))
        .count()
}

/// Fill fluid sites with independent Bernoulli draws; `probability` gets
/// the site, its physical position and the direction. Wall sites stay
/// empty. One uniform number is consumed per link in row-major,
/// direction-minor order regardless of the mask.
pub fn fill_with<F>(template: &Lattice, seed: u64, probability: F) -> Lattice
where
    F: Fn(Site, [f64; 2], Direction) -> f64,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lattice = template.empty_like();
    let g = *template.geometry();
    for i in 0..g.len() {
        let p = g.site(i);
        let pos = g.position(p);
        let fluid = template.kind(p) == CellKind::Fluid;
        let mut s = SiteState::EMPTY;
        for d in Direction::ALL {
            let u: f64 = rng.gen();
            if fluid && u < probability(p, pos, d) {
                s = s.with(d);
            }
        }
        lattice.cells_mut()[i] = s;
    }
    lattice
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::BoundaryKind;
    use crate::observables::coarse_grain;

    fn template(w: usize, h: usize) -> Lattice {
        Lattice::new(Geometry::periodic(w, h).unwrap())
    }

    #[test]
    fn full_fill_sets_every_bit() {
        let l = Scenario::uniform(1.0).init(&template(30, 20), 1).unwrap();
        assert_eq!(l.mass(), 6 * 30 * 20);
    }

    #[test]
    fn hole_is_empty_and_count_matches() {
        let t = template(100, 100);
        let f = 0.667;
        let scenario = Scenario::hole(f);
        let l = scenario.init(&t, 9).unwrap();
        let g = t.geometry();
        let region = scenario.regions_for(g)[0];
        let mut disk = 0;
        for i in 0..g.len() {
            let p = g.site(i);
            if region.contains(g.position(p)) {
                disk += 1;
                assert_eq!(l.get(p), SiteState::EMPTY);
            }
        }
        // brute-force disk count; radius 20 covers about pi*400/(sqrt(3)/2) sites
        assert!((1400..1500).contains(&disk), "{disk}");
        let links = 6.0 * (10_000 - disk) as f64;
        let mean = f * links;
        let sigma = (links * f * (1.0 - f)).sqrt();
        assert!((l.mass() as f64 - mean).abs() < 3.0 * sigma);
        assert!((scenario.expected_mass(&t) - mean).abs() < 1e-6);
    }

    #[test]
    fn channel_flow_has_positive_velocity() {
        let scenario = Scenario::channel_flow(0.3, Direction::new(0).unwrap(), 0.9);
        let l = scenario.init(&template(50, 50), 3).unwrap();
        let field = coarse_grain(&[l], 10, 1).unwrap();
        let mean_ux: f64 = field.u.iter().map(|u| u[0]).sum::<f64>() / field.len() as f64;
        // rho = 2.4 and rho u_x = 0.9 - 0.3 = 0.6, so u_x = 0.25
        assert!(mean_ux > 0.2, "{mean_ux}");
    }

    #[test]
    fn same_seed_same_lattice() {
        let s = Scenario::multi_hole(0.4);
        let t = template(40, 40);
        assert_eq!(s.init(&t, 5).unwrap(), s.init(&t, 5).unwrap());
        assert_ne!(s.init(&t, 5).unwrap(), s.init(&t, 6).unwrap());
    }

    #[test]
    fn walls_start_empty() {
        let t = Lattice::new(Geometry::new(20, 20, BoundaryKind::Walled).unwrap());
        let l = Scenario::uniform(1.0).init(&t, 1).unwrap();
        assert_eq!(l.mass(), 6 * 18 * 18);
    }

    #[test]
    fn region_outside_rejected() {
        let s = Scenario::hole(0.5).with_regions(vec![Region::Disk {
            cx: 5.0,
            cy: 5.0,
            r: 10.0,
        }]);
        assert!(matches!(s.init(&template(40, 40), 1), Err(Error::Config(_))));
    }

    #[test]
    fn bad_fill_rejected() {
        assert!(Scenario::uniform(1.5).init(&template(4, 4), 1).is_err());
        let mut c = Scenario::channel_flow(0.3, Direction::new(0).unwrap(), 0.9);
        c.bias = None;
        assert!(c.init(&template(4, 4), 1).is_err());
    }

    #[test]
    fn region_round_trip() {
        for r in ["disk 1.5 2 3", "rect 0 0 10 4.25"] {
            let parsed: Region = r.parse().unwrap();
            assert_eq!(parsed.to_string().parse::<Region>().unwrap(), parsed);
        }
        assert!("disk 1 2".parse::<Region>().is_err());
        assert!("blob 1 2 3".parse::<Region>().is_err());
    }
}
