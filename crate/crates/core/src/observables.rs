//! Coarse-grained fields and closed-form hydrodynamic predictions.
//!
//! The ensemble average `N_i = <n_i>` is estimated by averaging occupations
//! over square blocks of sites and a trailing window of time steps. From
//! `N_i` the block density, velocity and momentum-flux tensor follow:
//!
//! ```text
//! rho = sum_i N_i      rho u = sum_i v_i N_i      Pi_ab = sum_i v_ia v_ib N_i
//! ```

use crate::error::{Error, Result};
use crate::lattice::{Direction, Lattice, LatticeUnits, SQRT3_2};

/// Per-block occupation counts for each direction, summed over samples.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockCounts {
    block: usize,
    nbx: usize,
    nby: usize,
    samples: u64,
    counts: Vec<[u64; 6]>,
}

impl BlockCounts {
    pub fn new(width: usize, height: usize, block: usize) -> Result<Self> {
        if block == 0 || !width.is_multiple_of(block) || !height.is_multiple_of(block) {
            return Err(Error::Config(format!(
                "block size {block} must divide the lattice dimensions {width}x{height}"
            )));
        }
        let (nbx, nby) = (width / block, height / block);
        Ok(BlockCounts {
            block,
            nbx,
            nby,
            samples: 0,
            counts: vec![[0; 6]; nbx * nby],
        })
    }

    pub fn of(lattice: &Lattice, block: usize) -> Result<Self> {
        let mut c = Self::new(lattice.width(), lattice.height(), block)?;
        c.add_lattice(lattice);
        Ok(c)
    }

    pub fn block(&self) -> usize {
        self.block
    }

    pub fn blocks(&self) -> (usize, usize) {
        (self.nbx, self.nby)
    }

    pub fn samples(&self) -> u64 {
        self.samples
    }

    pub fn counts(&self) -> &[[u64; 6]] {
        &self.counts
    }

    /// Particles recorded in block `b` over all samples.
    pub fn block_mass(&self, b: usize) -> u64 {
        self.counts[b].iter().sum()
    }

    /// Link observations per direction in each block: `block^2 * samples`.
    pub fn observations(&self) -> u64 {
        (self.block * self.block) as u64 * self.samples
    }

    pub fn add_lattice(&mut self, lattice: &Lattice) {
        assert_eq!(
            (lattice.width(), lattice.height()),
            (self.nbx * self.block, self.nby * self.block),
            "lattice does not match block grid"
        );
        let w = lattice.width();
        for (y, row) in lattice.cells().chunks(w).enumerate() {
            let by = y / self.block;
            for (x, s) in row.iter().enumerate() {
                let bits = s.bits();
                if bits == 0 {
                    continue;
                }
                let slot = &mut self.counts[by * self.nbx + x / self.block];
                for (i, c) in slot.iter_mut().enumerate() {
                    *c += (bits >> i & 1) as u64;
                }
            }
        }
        self.samples += 1;
    }

    pub fn add(&mut self, other: &BlockCounts) {
        assert_eq!((self.block, self.nbx, self.nby), (other.block, other.nbx, other.nby));
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            for i in 0..6 {
                a[i] += b[i];
            }
        }
        self.samples += other.samples;
    }

    pub fn subtract(&mut self, other: &BlockCounts) {
        assert_eq!((self.block, self.nbx, self.nby), (other.block, other.nbx, other.nby));
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            for i in 0..6 {
                a[i] -= b[i];
            }
        }
        self.samples -= other.samples;
    }

    pub fn to_field(&self, units: LatticeUnits) -> MacroField {
        let n = self.observations().max(1) as f64;
        let v = units.speed();
        let cells = self
            .counts
            .iter()
            .map(|c| {
                let mut mass = 0u64;
                let (mut hx, mut ry) = (0i64, 0i64);
                let (mut xx, mut xy, mut yy) = (0i64, 0i64, 0i64);
                for d in Direction::ALL {
                    let k = c[d.index()] as i64;
                    let (dx, dy) = d.exact_components();
                    let (dx, dy) = (dx as i64, dy as i64);
                    mass += k as u64;
                    hx += k * dx;
                    ry += k * dy;
                    xx += k * dx * dx;
                    xy += k * dx * dy;
                    yy += k * dy * dy;
                }
                let rho = mass as f64 / n;
                let jx = hx as f64 * 0.5 * v / n;
                let jy = ry as f64 * SQRT3_2 * v / n;
                let u = if mass == 0 { [0.0, 0.0] } else { [jx / rho, jy / rho] };
                let pi = [
                    xx as f64 * 0.25 * v * v / n,
                    xy as f64 * 0.5 * SQRT3_2 * v * v / n,
                    yy as f64 * 0.75 * v * v / n,
                ];
                (rho, u, pi)
            })
            .collect::<Vec<_>>();
        MacroField {
            block: self.block,
            window: self.samples as usize,
            nbx: self.nbx,
            nby: self.nby,
            rho: cells.iter().map(|c| c.0).collect(),
            u: cells.iter().map(|c| c.1).collect(),
            pi: cells.iter().map(|c| c.2).collect(),
        }
    }
}

/// Block-averaged density, velocity and momentum-flux tensor.
#[derive(Clone, Debug, PartialEq)]
pub struct MacroField {
    pub block: usize,
    pub window: usize,
    pub nbx: usize,
    pub nby: usize,
    /// Mean particles per site, `0..=6`.
    pub rho: Vec<f64>,
    /// Mean velocity; zero in empty blocks.
    pub u: Vec<[f64; 2]>,
    /// `[Pi_xx, Pi_xy, Pi_yy]`; `Pi_yx = Pi_xy` by construction.
    pub pi: Vec<[f64; 3]>,
}

impl MacroField {
    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }

    pub fn tensor(&self, b: usize) -> [[f64; 2]; 2] {
        let [xx, xy, yy] = self.pi[b];
        [[xx, xy], [xy, yy]]
    }

    /// Block coordinates `(bx, by)` of flat index `b`.
    pub fn block_coords(&self, b: usize) -> (usize, usize) {
        (b % self.nbx, b / self.nbx)
    }

    /// Physical centre of block `b` (mean position of its sites).
    pub fn block_center(&self, b: usize) -> [f64; 2] {
        let (bx, by) = self.block_coords(b);
        let k = self.block as f64;
        let y0 = by * self.block;
        // half of the rows are shifted by 1/2 when block is even
        let odd_rows = (y0..y0 + self.block).filter(|y| y & 1 == 1).count() as f64;
        [
            bx as f64 * k + (k - 1.0) / 2.0 + 0.5 * odd_rows / k,
            (y0 as f64 + (k - 1.0) / 2.0) * SQRT3_2,
        ]
    }

    pub fn mean_density(&self) -> f64 {
        self.rho.iter().sum::<f64>() / self.rho.len() as f64
    }

    /// Population standard deviation of block densities.
    pub fn density_std(&self) -> f64 {
        let mean = self.mean_density();
        let var = self.rho.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / self.rho.len() as f64;
        var.sqrt()
    }
}

/// Coarse-grain the last `window` lattices of `history` (oldest first).
pub fn coarse_grain(history: &[Lattice], block: usize, window: usize) -> Result<MacroField> {
    if window == 0 {
        return Err(Error::Config("window must be at least 1".into()));
    }
    if history.len() < window {
        return Err(Error::Config(format!(
            "window of {window} steps needs at least that many lattices, got {}",
            history.len()
        )));
    }
    let last = &history[history.len() - window..];
    let mut counts = BlockCounts::new(last[0].width(), last[0].height(), block)?;
    for l in last {
        counts.add_lattice(l);
    }
    Ok(counts.to_field(last[0].units()))
}

/// Per-direction occupation averaged over the whole lattice.
pub fn mean_occupations(lattice: &Lattice) -> [f64; 6] {
    let mut counts = [0u64; 6];
    for s in lattice.cells() {
        for d in s.directions() {
            counts[d.index()] += 1;
        }
    }
    let n = lattice.cells().len() as f64;
    counts.map(|c| c as f64 / n)
}

/// Lattice constants of the hexagonal model and the derived tensor
/// coefficients.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TheoryParams {
    pub z: usize,
    pub d: usize,
    pub v: f64,
}

impl TheoryParams {
    pub fn hexagonal(units: LatticeUnits) -> Self {
        TheoryParams {
            z: 6,
            d: 2,
            v: units.speed(),
        }
    }

    pub fn a(&self) -> f64 {
        1.0 / self.z as f64
    }

    pub fn b(&self) -> f64 {
        self.d as f64 / self.z as f64
    }

    pub fn c2(&self) -> f64 {
        self.z as f64 / self.d as f64
    }

    /// Fixed by `b * C4 = 1 / (d + 2)`.
    pub fn c4(&self) -> f64 {
        1.0 / ((self.d as f64 + 2.0) * self.b())
    }
}

impl Default for TheoryParams {
    fn default() -> Self {
        TheoryParams::hexagonal(LatticeUnits::default())
    }
}

/// Density dependence of the quadratic equilibrium term,
/// `G(rho) = (2/3) (3 - rho) / (6 - rho)`.
pub fn g_factor(rho: f64) -> f64 {
    (2.0 / 3.0) * (3.0 - rho) / (6.0 - rho)
}

fn check_density(rho: f64, z: usize) -> Result<()> {
    if !(0.0..=z as f64).contains(&rho) {
        return Err(Error::Domain(format!("density {rho} outside [0, {z}]")));
    }
    Ok(())
}

fn warn_if_fast(u: [f64; 2], params: &TheoryParams) {
    let speed = u[0].hypot(u[1]);
    if speed > 0.3 * params.v {
        log::warn!("|u| = {speed} exceeds 0.3 v; the second-order equilibrium expansion is unreliable");
    }
}

/// Second-order low-Mach expansion of the Fermi-Dirac equilibrium:
///
/// `N_i = a rho + (b rho / v^2) v_i.u + (rho G(rho) / v^4) Q_iab u_a u_b`
/// with `Q_iab = v_ia v_ib - (v^2 / d) delta_ab`.
pub fn equilibrium_occupation(rho: f64, u: [f64; 2], dir: Direction, params: &TheoryParams) -> Result<f64> {
    check_density(rho, params.z)?;
    warn_if_fast(u, params);
    let v = params.v;
    let [cx, cy] = dir.unit();
    let (vx, vy) = (v * cx, v * cy);
    let linear = params.b() * rho / (v * v) * (vx * u[0] + vy * u[1]);
    let mut value = params.a() * rho + linear;
    if u != [0.0, 0.0] {
        let iso = v * v / params.d as f64;
        let q_uu = (vx * vx - iso) * u[0] * u[0] + 2.0 * vx * vy * u[0] * u[1] + (vy * vy - iso) * u[1] * u[1];
        value += rho * g_factor(rho) / v.powi(4) * q_uu;
    }
    Ok(value)
}

/// Equilibrium pressure `p = a C2 v^2 rho - (C2/d - C4) rho G(rho) u^2`.
pub fn theory_pressure(rho: f64, u: [f64; 2], params: &TheoryParams) -> Result<f64> {
    check_density(rho, params.z)?;
    warn_if_fast(u, params);
    let u2 = u[0] * u[0] + u[1] * u[1];
    let mut p = params.a() * params.c2() * params.v * params.v * rho;
    if u2 > 0.0 {
        p -= (params.c2() / params.d as f64 - params.c4()) * rho * g_factor(rho) * u2;
    }
    Ok(p)
}

/// `c_s = v sqrt(a C2)`, which is `v / sqrt(2)` on the hexagonal lattice.
pub fn sound_speed(params: &TheoryParams) -> f64 {
    params.v * (params.a() * params.c2()).sqrt()
}

/// Collision relaxation rate `Lambda = 2 s (1 - s)^3`, `s = rho / 6`,
/// taken positive.
pub fn relaxation_rate(rho: f64) -> f64 {
    let s = rho / 6.0;
    2.0 * s * (1.0 - s).powi(3)
}

/// Negative discreteness correction `-dt v^2 / (2 (d + 2))`.
pub fn lattice_viscosity(params: &TheoryParams, dt: f64) -> f64 {
    -dt * params.v * params.v * params.b() * params.c4() / 2.0
}

/// `dt v^2 b C4 / Lambda`.
pub fn collisional_viscosity(rho: f64, params: &TheoryParams, dt: f64) -> Result<f64> {
    viscosity_domain(rho)?;
    Ok(dt * params.v * params.v * params.b() * params.c4() / relaxation_rate(rho))
}

fn viscosity_domain(rho: f64) -> Result<()> {
    if !(rho > 0.0 && rho < 6.0) {
        return Err(Error::Domain(format!(
            "viscosity is undefined at density {rho}; need 0 < rho < 6"
        )));
    }
    Ok(())
}

/// Kinematic viscosity `nu = dt v^2 / (d + 2) * (1 / Lambda - 1 / 2)`.
pub fn theory_viscosity(rho: f64, params: &TheoryParams, dt: f64) -> Result<f64> {
    viscosity_domain(rho)?;
    Ok(collisional_viscosity(rho, params, dt)? + lattice_viscosity(params, dt))
}

/// Prefactor `2 C4 G(rho)` of the advection term. Not 1, so the model is
/// not Galilean invariant; reported only.
pub fn advection_factor(rho: f64, params: &TheoryParams) -> f64 {
    2.0 * params.c4() * g_factor(rho)
}
