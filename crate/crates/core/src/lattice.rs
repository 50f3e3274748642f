//! Hexagonal lattice geometry, site states and lattice storage.
//!
//! The hexagonal lattice is stored as an offset-row rectangular array. Odd
//! rows are shifted half a spacing to the right, so site `(x, y)` sits at
//! the physical position `(x + (y mod 2) / 2, y * sqrt(3) / 2)` in units of
//! the lattice spacing.
//!
//! Directions are indexed `0..6` counter-clockwise from `+x`, with unit
//! vectors `c_i = (cos(60° i), sin(60° i))`.

use std::fmt;

use crate::boundary::{BoundaryKind, CellKind, Mask};
use crate::error::{Error, Result};

pub const SQRT3_2: f64 = 0.866_025_403_784_438_6;

/// One of the six lattice directions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Direction(u8);

impl Direction {
    pub const COUNT: usize = 6;

    pub const ALL: [Direction; 6] = [
        Direction(0),
        Direction(1),
        Direction(2),
        Direction(3),
        Direction(4),
        Direction(5),
    ];

    pub fn new(index: usize) -> Option<Self> {
        (index < 6).then_some(Direction(index as u8))
    }

    /// Direction from the conventional 1-based label used in the FHP
    /// literature (`1..=6`).
    pub fn from_label(label: usize) -> Option<Self> {
        label.checked_sub(1).and_then(Direction::new)
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn label(self) -> usize {
        self.index() + 1
    }

    #[inline]
    pub fn opposite(self) -> Self {
        Direction((self.0 + 3) % 6)
    }

    /// Rotate by `steps` multiples of 60° (counter-clockwise for positive).
    #[inline]
    pub fn rotate(self, steps: i32) -> Self {
        Direction((self.0 as i32 + steps).rem_euclid(6) as u8)
    }

    /// Unit vector `c_i`.
    pub fn unit(self) -> [f64; 2] {
        let (hx, ry) = self.exact_components();
        [hx as f64 * 0.5, ry as f64 * SQRT3_2]
    }

    /// Components of `c_i` in exact integer units: x in halves, y in units
    /// of `sqrt(3)/2`. Conservation checks use these to avoid rounding.
    #[inline]
    pub fn exact_components(self) -> (i32, i32) {
        const HX: [i32; 6] = [2, 1, -1, -2, -1, 1];
        const RY: [i32; 6] = [0, 1, 1, 0, -1, -1];
        (HX[self.index()], RY[self.index()])
    }
}

/// Occupation of the six links entering one site; bit `i` is `n_i`.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash)]
#[repr(transparent)]
pub struct SiteState(u8);

impl SiteState {
    pub const EMPTY: SiteState = SiteState(0);
    pub const FULL: SiteState = SiteState(0x3f);

    /// Build from a raw mask; bits above the sixth are dropped.
    #[inline]
    pub const fn from_bits(bits: u8) -> Self {
        SiteState(bits & 0x3f)
    }

    pub fn from_directions(dirs: impl IntoIterator<Item = Direction>) -> Self {
        dirs.into_iter().fold(Self::EMPTY, |s, d| s.with(d))
    }

    /// Build from 1-based direction labels. Panics on a label outside `1..=6`.
    pub fn from_labels(labels: &[usize]) -> Self {
        Self::from_directions(
            labels
                .iter()
                .map(|&l| Direction::from_label(l).expect("direction label in 1..=6")),
        )
    }

    #[inline]
    pub const fn bits(self) -> u8 {
        self.0
    }

    #[inline]
    pub fn has(self, dir: Direction) -> bool {
        self.0 >> dir.0 & 1 == 1
    }

    #[inline]
    #[must_use]
    pub fn with(self, dir: Direction) -> Self {
        SiteState(self.0 | 1 << dir.0)
    }

    #[inline]
    #[must_use]
    pub fn without(self, dir: Direction) -> Self {
        SiteState(self.0 & !(1 << dir.0))
    }

    pub fn directions(self) -> impl Iterator<Item = Direction> {
        Direction::ALL.into_iter().filter(move |&d| self.has(d))
    }

    #[inline]
    pub fn mass(self) -> u32 {
        self.0.count_ones()
    }

    /// Momentum in the exact integer units of [`Direction::exact_components`].
    pub fn exact_momentum(self) -> (i32, i32) {
        self.directions().fold((0, 0), |(x, y), d| {
            let (dx, dy) = d.exact_components();
            (x + dx, y + dy)
        })
    }

    pub fn labels(self) -> Vec<usize> {
        self.directions().map(Direction::label).collect()
    }
}

impl fmt::Debug for SiteState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SiteState({:06b} {:?})", self.0, self.labels())
    }
}

/// Particles at a site.
pub fn site_mass(s: SiteState) -> u32 {
    s.mass()
}

/// `sum_i n_i v_i` for one site.
pub fn site_momentum(s: SiteState, units: LatticeUnits) -> [f64; 2] {
    let (hx, ry) = s.exact_momentum();
    let v = units.speed();
    [hx as f64 * 0.5 * v, ry as f64 * SQRT3_2 * v]
}

/// Lattice spacing and time step. Everything defaults to lattice units.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LatticeUnits {
    spacing: f64,
    tick: f64,
}

impl Default for LatticeUnits {
    fn default() -> Self {
        LatticeUnits {
            spacing: 1.0,
            tick: 1.0,
        }
    }
}

impl LatticeUnits {
    pub fn new(spacing: f64, tick: f64) -> Result<Self> {
        if !(spacing > 0.0 && spacing.is_finite() && tick > 0.0 && tick.is_finite()) {
            return Err(Error::Config(format!(
                "lattice spacing and tick must be positive, got {spacing} and {tick}"
            )));
        }
        Ok(LatticeUnits { spacing, tick })
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn tick(&self) -> f64 {
        self.tick
    }

    /// Particle speed `v = spacing / tick`.
    pub fn speed(&self) -> f64 {
        self.spacing / self.tick
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Site {
    pub x: usize,
    pub y: usize,
}

impl Site {
    pub const fn new(x: usize, y: usize) -> Self {
        Site { x, y }
    }
}

/// Dimensions plus boundary kind; owns the neighbor rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Geometry {
    width: usize,
    height: usize,
    boundary: BoundaryKind,
}

impl Geometry {
    pub fn new(width: usize, height: usize, boundary: BoundaryKind) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Config(format!(
                "lattice dimensions must be positive, got {width}x{height}"
            )));
        }
        if boundary == BoundaryKind::Periodic && !height.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "periodic lattices need an even height, got {height}"
            )));
        }
        if boundary == BoundaryKind::Walled && (width < 3 || height < 3) {
            return Err(Error::Config(format!(
                "walled lattices need at least 3x3 sites, got {width}x{height}"
            )));
        }
        Ok(Geometry {
            width,
            height,
            boundary,
        })
    }

    pub fn periodic(width: usize, height: usize) -> Result<Self> {
        Self::new(width, height, BoundaryKind::Periodic)
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn boundary(&self) -> BoundaryKind {
        self.boundary
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, p: Site) -> usize {
        p.y * self.width + p.x
    }

    pub fn site(&self, index: usize) -> Site {
        Site::new(index % self.width, index / self.width)
    }

    pub fn contains(&self, p: Site) -> bool {
        p.x < self.width && p.y < self.height
    }

    /// Destination of a particle leaving `p` along `dir`.
    ///
    /// Periodic lattices wrap; walled lattices return `None` when the move
    /// leaves the array. Panics if `p` is out of bounds.
    pub fn neighbor(&self, p: Site, dir: Direction) -> Option<Site> {
        assert!(
            self.contains(p),
            "site ({}, {}) outside {}x{} lattice",
            p.x,
            p.y,
            self.width,
            self.height
        );
        let (dx, dy) = offset(dir, p.y);
        let x = p.x as isize + dx;
        let y = p.y as isize + dy;
        match self.boundary {
            BoundaryKind::Periodic => Some(Site::new(
                x.rem_euclid(self.width as isize) as usize,
                y.rem_euclid(self.height as isize) as usize,
            )),
            BoundaryKind::Walled => {
                if x < 0 || y < 0 || x >= self.width as isize || y >= self.height as isize {
                    None
                } else {
                    Some(Site::new(x as usize, y as usize))
                }
            }
        }
    }

    /// Physical position of a site, in units of the lattice spacing.
    pub fn position(&self, p: Site) -> [f64; 2] {
        [p.x as f64 + 0.5 * (p.y & 1) as f64, p.y as f64 * SQRT3_2]
    }

    /// Physical extent of the periodic cell: `(width, height * sqrt(3)/2)`.
    pub fn extent(&self) -> [f64; 2] {
        [self.width as f64, self.height as f64 * SQRT3_2]
    }
}

/// Row-parity offset table.
#[inline]
pub(crate) fn offset(dir: Direction, y: usize) -> (isize, isize) {
    const EVEN: [(isize, isize); 6] = [(1, 0), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1)];
    const ODD: [(isize, isize); 6] = [(1, 0), (1, 1), (0, 1), (-1, 0), (0, -1), (1, -1)];
    if y & 1 == 0 {
        EVEN[dir.index()]
    } else {
        ODD[dir.index()]
    }
}

/// Site states plus the cell-kind mask.
#[derive(Clone, Debug, PartialEq)]
pub struct Lattice {
    geometry: Geometry,
    units: LatticeUnits,
    cells: Vec<SiteState>,
    mask: Mask,
}

impl Lattice {
    /// Empty lattice with the default mask for the boundary kind (a wall
    /// ring when walled, all fluid when periodic).
    pub fn new(geometry: Geometry) -> Self {
        let mask = Mask::for_boundary(geometry.boundary(), geometry.width(), geometry.height());
        Lattice {
            geometry,
            units: LatticeUnits::default(),
            cells: vec![SiteState::EMPTY; geometry.len()],
            mask,
        }
    }

    pub fn with_mask(geometry: Geometry, mask: Mask) -> Result<Self> {
        if mask.width() != geometry.width() || mask.height() != geometry.height() {
            return Err(Error::Config(format!(
                "mask is {}x{} but lattice is {}x{}",
                mask.width(),
                mask.height(),
                geometry.width(),
                geometry.height()
            )));
        }
        let mut mask = mask;
        if geometry.boundary() == BoundaryKind::Walled {
            mask.enforce_border();
        }
        Ok(Lattice {
            geometry,
            units: LatticeUnits::default(),
            cells: vec![SiteState::EMPTY; geometry.len()],
            mask,
        })
    }

    #[must_use]
    pub fn with_units(mut self, units: LatticeUnits) -> Self {
        self.units = units;
        self
    }

    #[inline]
    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn width(&self) -> usize {
        self.geometry.width()
    }

    pub fn height(&self) -> usize {
        self.geometry.height()
    }

    pub fn units(&self) -> LatticeUnits {
        self.units
    }

    pub fn mask(&self) -> &Mask {
        &self.mask
    }

    #[inline]
    pub fn cells(&self) -> &[SiteState] {
        &self.cells
    }

    #[inline]
    pub fn cells_mut(&mut self) -> &mut [SiteState] {
        &mut self.cells
    }

    pub fn get(&self, p: Site) -> SiteState {
        self.cells[self.geometry.index(p)]
    }

    pub fn set(&mut self, p: Site, s: SiteState) {
        let i = self.geometry.index(p);
        self.cells[i] = s;
    }

    pub fn kind(&self, p: Site) -> CellKind {
        self.mask.get(p.x, p.y)
    }

    /// Total particle count.
    pub fn mass(&self) -> u64 {
        self.cells.iter().map(|s| s.mass() as u64).sum()
    }

    /// Total momentum in exact integer units.
    pub fn exact_momentum(&self) -> (i64, i64) {
        self.cells.iter().fold((0, 0), |(x, y), s| {
            let (dx, dy) = s.exact_momentum();
            (x + dx as i64, y + dy as i64)
        })
    }

    pub fn momentum(&self) -> [f64; 2] {
        let (hx, ry) = self.exact_momentum();
        let v = self.units.speed();
        [hx as f64 * 0.5 * v, ry as f64 * SQRT3_2 * v]
    }

    /// Same geometry, mask and units, all sites empty.
    pub fn empty_like(&self) -> Self {
        Lattice {
            geometry: self.geometry,
            units: self.units,
            cells: vec![SiteState::EMPTY; self.cells.len()],
            mask: self.mask.clone(),
        }
    }

    pub fn fluid_sites(&self) -> usize {
        self.mask.fluid_count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn opposite_is_three_steps_away() {
        for d in Direction::ALL {
            assert_eq!(d.opposite().index(), (d.index() + 3) % 6);
            assert_eq!(d.opposite().opposite(), d);
        }
    }

    #[test]
    fn unit_vectors_match_cos_sin() {
        for d in Direction::ALL {
            let angle = std::f64::consts::FRAC_PI_3 * d.index() as f64;
            let [x, y] = d.unit();
            assert!((x - angle.cos()).abs() < 1e-12);
            assert!((y - angle.sin()).abs() < 1e-12);
            assert!(((x * x + y * y).sqrt() - 1.0).abs() < 1e-12);
            let [ox, oy] = d.opposite().unit();
            assert!((x + ox).abs() < 1e-12 && (y + oy).abs() < 1e-12);
        }
        let sum = Direction::ALL.iter().fold([0.0, 0.0], |acc, d| {
            let u = d.unit();
            [acc[0] + u[0], acc[1] + u[1]]
        });
        assert!(sum[0].abs() < 1e-12 && sum[1].abs() < 1e-12);
    }

    #[test]
    fn offsets_agree_with_physical_positions() {
        let g = Geometry::periodic(10, 10).unwrap();
        for y in 2..4 {
            let p = Site::new(5, y);
            let [px, py] = g.position(p);
            for d in Direction::ALL {
                let q = g.neighbor(p, d).unwrap();
                let [qx, qy] = g.position(q);
                let [cx, cy] = d.unit();
                assert!((qx - px - cx).abs() < 1e-12, "{d:?} y={y}");
                assert!((qy - py - cy).abs() < 1e-12, "{d:?} y={y}");
            }
        }
    }

    #[test]
    fn neighbor_examples() {
        let g = Geometry::periodic(100, 100).unwrap();
        let d = |i| Direction::new(i).unwrap();
        assert_eq!(g.neighbor(Site::new(5, 4), d(0)), Some(Site::new(6, 4)));
        let up = g.neighbor(Site::new(5, 4), d(1)).unwrap();
        assert_eq!(g.neighbor(up, d(4)), Some(Site::new(5, 4)));
        assert_eq!(g.neighbor(Site::new(0, 0), d(3)), Some(Site::new(99, 0)));
    }

    #[test]
    fn neighbor_is_involution_everywhere() {
        for boundary in [BoundaryKind::Periodic, BoundaryKind::Walled] {
            let g = Geometry::new(7, 6, boundary).unwrap();
            for y in 0..6 {
                for x in 0..7 {
                    let p = Site::new(x, y);
                    for d in Direction::ALL {
                        if let Some(q) = g.neighbor(p, d) {
                            assert_eq!(g.neighbor(q, d.opposite()), Some(p));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn walled_neighbor_leaves_array() {
        let g = Geometry::new(5, 5, BoundaryKind::Walled).unwrap();
        assert_eq!(g.neighbor(Site::new(0, 2), Direction::new(3).unwrap()), None);
        assert_eq!(g.neighbor(Site::new(4, 4), Direction::new(1).unwrap()), None);
    }

    #[test]
    fn odd_periodic_height_rejected() {
        assert!(matches!(Geometry::periodic(10, 11), Err(Error::Config(_))));
        assert!(Geometry::new(10, 11, BoundaryKind::Walled).is_ok());
    }

    #[test]
    #[should_panic(expected = "outside")]
    fn out_of_range_site_panics() {
        let g = Geometry::periodic(4, 4).unwrap();
        g.neighbor(Site::new(4, 0), Direction::new(0).unwrap());
    }

    #[test]
    fn mass_examples() {
        assert_eq!(site_mass(SiteState::from_labels(&[1, 4])), 2);
        assert_eq!(site_mass(SiteState::FULL), 6);
        assert_eq!(site_mass(SiteState::EMPTY), 0);
    }

    #[test]
    fn momentum_examples() {
        let u = LatticeUnits::default();
        assert_eq!(site_momentum(SiteState::from_labels(&[1, 4]), u), [0.0, 0.0]);
        assert_eq!(site_momentum(SiteState::FULL, u), [0.0, 0.0]);
        assert_eq!(site_momentum(SiteState::from_labels(&[1]), u), [1.0, 0.0]);
        let fast = LatticeUnits::new(2.0, 0.5).unwrap();
        assert_eq!(site_momentum(SiteState::from_labels(&[1]), fast), [4.0, 0.0]);
    }

    #[test]
    fn units_must_be_positive() {
        assert!(LatticeUnits::new(0.0, 1.0).is_err());
        assert!(LatticeUnits::new(1.0, -1.0).is_err());
    }
}
