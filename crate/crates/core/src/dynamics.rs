//! FHP-I microdynamics: collision table, chirality coin and the time step.
//!
//! A step is collide-then-stream. Collision replaces each fluid site state
//! by a table lookup keyed on the per-site chirality bit `q`; wall sites are
//! bounced back instead. Streaming is a gather: bit `i` of the new state at
//! `p` is bit `i` of the post-collision state at `neighbor(p, i + 3)`.

use rayon::prelude::*;
use rayon::ThreadPool;

use crate::boundary::{bounce_back, BoundaryKind, CellKind};
use crate::error::{Error, Result};
use crate::lattice::{offset, Direction, Lattice, SiteState};

#[inline]
fn n(s: SiteState, i: i32) -> i32 {
    (s.bits() >> i.rem_euclid(6) & 1) as i32
}

/// Two-body head-on indicator `D_i`.
fn two_body(s: SiteState, i: i32) -> i32 {
    n(s, i) * n(s, i + 3) * (1 - n(s, i + 1)) * (1 - n(s, i + 2)) * (1 - n(s, i + 4)) * (1 - n(s, i + 5))
}

/// Symmetric three-body indicator `T_i`.
fn three_body(s: SiteState, i: i32) -> i32 {
    n(s, i) * n(s, i + 2) * n(s, i + 4) * (1 - n(s, i + 1)) * (1 - n(s, i + 3)) * (1 - n(s, i + 5))
}

/// Reference collision evaluated bit by bit from the occupation numbers:
/// `n_i + Omega_i` with
/// `Omega_i = -D_i + q D_{i-1} + (1-q) D_{i+1} - T_i + T_{i+3}`.
///
/// `q = true` deflects head-on pairs one step counter-clockwise.
/// This is the slow path used to build and audit [`CollisionTable`].
pub fn collide_formula(s: SiteState, q: bool) -> SiteState {
    let q = q as i32;
    let mut out = 0u8;
    for i in 0..6 {
        let omega = -two_body(s, i) + q * two_body(s, i - 1) + (1 - q) * two_body(s, i + 1) - three_body(s, i)
            + three_body(s, i + 3);
        let value = n(s, i) + omega;
        debug_assert!(value == 0 || value == 1, "occupation {value} at bit {i}");
        if value == 1 {
            out |= 1 << i;
        }
    }
    SiteState::from_bits(out)
}

/// Outcome of every input state for both chiralities.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CollisionTable {
    out: [[SiteState; 64]; 2],
}

impl CollisionTable {
    /// Table from explicit outputs; nothing is checked, see [`crate::verify`].
    pub fn from_entries(q0: [SiteState; 64], q1: [SiteState; 64]) -> Self {
        CollisionTable { out: [q0, q1] }
    }

    #[inline]
    pub fn collide(&self, s: SiteState, q: bool) -> SiteState {
        self.out[q as usize][s.bits() as usize]
    }

    /// Entries for one chirality, indexed by input bits.
    pub fn entries(&self, q: bool) -> &[SiteState; 64] {
        &self.out[q as usize]
    }

    /// `(q, input, output)` for all 128 entries, `q = 0` first.
    pub fn iter(&self) -> impl Iterator<Item = (bool, SiteState, SiteState)> + '_ {
        [false, true].into_iter().flat_map(move |q| {
            (0..64u8).map(move |b| {
                let s = SiteState::from_bits(b);
                (q, s, self.collide(s, q))
            })
        })
    }
}

impl Default for CollisionTable {
    fn default() -> Self {
        build_table()
    }
}

pub fn build_table() -> CollisionTable {
    let mut out = [[SiteState::EMPTY; 64]; 2];
    for (q, row) in out.iter_mut().enumerate() {
        for (b, slot) in row.iter_mut().enumerate() {
            *slot = collide_formula(SiteState::from_bits(b as u8), q == 1);
        }
    }
    CollisionTable { out }
}

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Counter-based source of the chirality bit `q(x, y, t)`.
///
/// Each draw is a pure function of `(seed, t, x, y)`, so results do not
/// depend on evaluation order or thread count. Sites are grouped in
/// 64-wide words: one hash yields the bits for `x` in `64k..64k+64`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ChiralityStream {
    seed: u64,
}

impl ChiralityStream {
    pub fn new(seed: u64) -> Self {
        ChiralityStream { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// 64 chirality bits for sites `x = 64 * word ..` of row `y` at step `t`.
    #[inline]
    pub fn word(&self, t: u64, y: usize, word: usize) -> u64 {
        let key = ((y as u64) << 32) ^ word as u64;
        let h = mix64(self.seed ^ mix64(t.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ 0x5bd1_e995));
        mix64(h ^ mix64(key.wrapping_add(0x632b_e59b_d9b4_e019)))
    }

    #[inline]
    pub fn draw(&self, t: u64, x: usize, y: usize) -> bool {
        self.word(t, y, x / 64) >> (x % 64) & 1 == 1
    }
}

fn collide_row(
    table: &CollisionTable,
    chirality: &ChiralityStream,
    t: u64,
    y: usize,
    input: &[SiteState],
    kinds: &[CellKind],
    out: &mut [SiteState],
) {
    let mut coins = 0u64;
    for (x, ((dst, &s), &kind)) in out.iter_mut().zip(input).zip(kinds).enumerate() {
        if x % 64 == 0 {
            coins = chirality.word(t, y, x / 64);
        }
        *dst = match kind {
            CellKind::Fluid => table.collide(s, coins >> (x % 64) & 1 == 1),
            CellKind::Wall => bounce_back(s),
        };
    }
}

fn stream_row(
    post: &[SiteState],
    width: usize,
    height: usize,
    boundary: BoundaryKind,
    y: usize,
    out: &mut [SiteState],
) {
    out.fill(SiteState::EMPTY);
    for dir in Direction::ALL {
        let (dx, dy) = offset(dir.opposite(), y);
        let sy = y as isize + dy;
        let sy = match boundary {
            BoundaryKind::Periodic => sy.rem_euclid(height as isize) as usize,
            BoundaryKind::Walled if sy < 0 || sy >= height as isize => continue,
            BoundaryKind::Walled => sy as usize,
        };
        let src = &post[sy * width..(sy + 1) * width];
        let bit = 1u8 << dir.index();
        // interior columns need no wrap check
        let lo = if dx < 0 { 1 } else { 0 };
        let hi = if dx > 0 { width - 1 } else { width };
        for (x, o) in out.iter_mut().enumerate().take(hi).skip(lo) {
            let sx = (x as isize + dx) as usize;
            *o = SiteState::from_bits(o.bits() | (src[sx].bits() & bit));
        }
        if dx != 0 && width > 0 {
            let x = if dx < 0 { 0 } else { width - 1 };
            let sx = x as isize + dx;
            let sx = match boundary {
                BoundaryKind::Periodic => Some(sx.rem_euclid(width as isize) as usize),
                BoundaryKind::Walled if sx < 0 || sx >= width as isize => None,
                BoundaryKind::Walled => Some(sx as usize),
            };
            if let Some(sx) = sx {
                out[x] = SiteState::from_bits(out[x].bits() | (src[sx].bits() & bit));
            }
        }
    }
}

/// One collide-then-stream update into a freshly allocated lattice.
pub fn step(current: &Lattice, table: &CollisionTable, chirality: &ChiralityStream, t: u64) -> Lattice {
    let mut next = current.empty_like();
    Stepper::with_table(table.clone(), *chirality).step(current, &mut next, t);
    next
}

/// Reusable stepping state: table, chirality stream, a scratch buffer for
/// post-collision states, and an optional worker pool.
pub struct Stepper {
    table: CollisionTable,
    chirality: ChiralityStream,
    scratch: Vec<SiteState>,
    pool: Option<ThreadPool>,
}

impl Stepper {
    pub fn new(chirality: ChiralityStream) -> Self {
        Self::with_table(build_table(), chirality)
    }

    pub fn with_table(table: CollisionTable, chirality: ChiralityStream) -> Self {
        Stepper {
            table,
            chirality,
            scratch: Vec::new(),
            pool: None,
        }
    }

    /// Partition rows across `workers` threads. `1` means sequential.
    pub fn with_workers(mut self, workers: usize) -> Result<Self> {
        self.pool = match workers {
            0 => return Err(Error::Config("workers must be at least 1".into())),
            1 => None,
            n => Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build()
                    .map_err(|e| Error::Config(format!("cannot start {n} workers: {e}")))?,
            ),
        };
        Ok(self)
    }

    pub fn table(&self) -> &CollisionTable {
        &self.table
    }

    pub fn chirality(&self) -> &ChiralityStream {
        &self.chirality
    }

    /// Advance `current` (the state at step `t`) into `next`.
    pub fn step(&mut self, current: &Lattice, next: &mut Lattice, t: u64) {
        assert_eq!(
            current.geometry(),
            next.geometry(),
            "step: buffers have different geometry"
        );
        let g = *current.geometry();
        let (w, h, boundary) = (g.width(), g.height(), g.boundary());
        self.scratch.resize(g.len(), SiteState::EMPTY);

        let table = &self.table;
        let chirality = &self.chirality;
        let input = current.cells();
        let kinds = current.mask().cells();
        let scratch = &mut self.scratch;
        let post_rows = |(y, out): (usize, &mut [SiteState])| {
            let row = y * w..(y + 1) * w;
            collide_row(table, chirality, t, y, &input[row.clone()], &kinds[row], out);
        };
        match &self.pool {
            None => scratch.chunks_mut(w).enumerate().for_each(post_rows),
            Some(pool) => pool.install(|| scratch.par_chunks_mut(w).enumerate().for_each(post_rows)),
        }

        let post = &self.scratch[..];
        let gather = |(y, out): (usize, &mut [SiteState])| stream_row(post, w, h, boundary, y, out);
        match &self.pool {
            None => next.cells_mut().chunks_mut(w).enumerate().for_each(gather),
            Some(pool) => pool.install(|| next.cells_mut().par_chunks_mut(w).enumerate().for_each(gather)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{Geometry, Site};

    fn labels(l: &[usize]) -> SiteState {
        SiteState::from_labels(l)
    }

    #[test]
    fn head_on_pair_rotates_with_chirality() {
        assert_eq!(collide_formula(labels(&[1, 4]), true), labels(&[2, 5]));
        assert_eq!(collide_formula(labels(&[1, 4]), false), labels(&[3, 6]));
        assert_eq!(collide_formula(labels(&[2, 5]), true), labels(&[3, 6]));
    }

    #[test]
    fn three_body_bounces_back() {
        for q in [false, true] {
            assert_eq!(collide_formula(labels(&[1, 3, 5]), q), labels(&[2, 4, 6]));
            assert_eq!(collide_formula(labels(&[2, 4, 6]), q), labels(&[1, 3, 5]));
        }
    }

    #[test]
    fn spectators_pass_through() {
        for q in [false, true] {
            assert_eq!(collide_formula(labels(&[1, 2]), q), labels(&[1, 2]));
            assert_eq!(collide_formula(SiteState::FULL, q), SiteState::FULL);
            assert_eq!(collide_formula(SiteState::EMPTY, q), SiteState::EMPTY);
            assert_eq!(collide_formula(labels(&[1, 4, 2]), q), labels(&[1, 4, 2]));
        }
    }

    #[test]
    fn table_matches_formula() {
        let table = build_table();
        for (q, s, out) in table.iter() {
            assert_eq!(out, collide_formula(s, q));
        }
        assert_eq!(table.iter().count(), 128);
        assert_eq!(table.collide(labels(&[1, 4]), true), labels(&[2, 5]));
        assert_eq!(table.collide(SiteState::EMPTY, false), SiteState::EMPTY);
    }

    #[test]
    fn chiralities_differ_only_on_head_on_pairs() {
        let table = build_table();
        let differing: Vec<u8> = (0..64u8)
            .filter(|&b| {
                let s = SiteState::from_bits(b);
                table.collide(s, false) != table.collide(s, true)
            })
            .collect();
        let expected: Vec<u8> = (0..3)
            .map(|i| {
                let d = Direction::new(i).unwrap();
                SiteState::EMPTY.with(d).with(d.opposite()).bits()
            })
            .collect();
        assert_eq!(differing, expected);
    }

    #[test]
    fn chirality_is_deterministic_and_keyed() {
        let c = ChiralityStream::new(7);
        assert_eq!(c.draw(3, 10, 4), c.draw(3, 10, 4));
        let a: Vec<bool> = (0..256).map(|x| c.draw(0, x, 0)).collect();
        let b: Vec<bool> = (0..256).map(|x| c.draw(1, x, 0)).collect();
        let other: Vec<bool> = (0..256).map(|x| ChiralityStream::new(8).draw(0, x, 0)).collect();
        assert_ne!(a, b);
        assert_ne!(a, other);
    }

    #[test]
    fn chirality_is_unbiased() {
        let c = ChiralityStream::new(2024);
        let mut ones = 0u64;
        let mut total = 0u64;
        for t in 0..16 {
            for y in 0..256 {
                for w in 0..4 {
                    ones += c.word(t, y, w).count_ones() as u64;
                    total += 64;
                }
            }
        }
        assert!(total >= 1_000_000);
        let mean = ones as f64 / total as f64;
        assert!((mean - 0.5).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn lone_particle_streams() {
        let g = Geometry::periodic(10, 10).unwrap();
        let mut l = Lattice::new(g);
        l.set(Site::new(5, 5), labels(&[1]));
        let next = step(&l, &build_table(), &ChiralityStream::new(1), 0);
        assert_eq!(next.mass(), 1);
        assert_eq!(next.get(Site::new(6, 5)), labels(&[1]));
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let g = Geometry::periodic(70, 20).unwrap();
        let mut l = Lattice::new(g);
        for (i, c) in l.cells_mut().iter_mut().enumerate() {
            *c = SiteState::from_bits((mix64(i as u64) & 0x3f) as u8);
        }
        let mut a = l.clone();
        let mut b = l.clone();
        let mut tmp_a = l.empty_like();
        let mut tmp_b = l.empty_like();
        let mut seq = Stepper::new(ChiralityStream::new(3));
        let mut par = Stepper::new(ChiralityStream::new(3)).with_workers(4).unwrap();
        for t in 0..20 {
            seq.step(&a, &mut tmp_a, t);
            par.step(&b, &mut tmp_b, t);
            std::mem::swap(&mut a, &mut tmp_a);
            std::mem::swap(&mut b, &mut tmp_b);
            assert_eq!(a, b);
        }
        assert_eq!(a.mass(), l.mass());
    }

    #[test]
    #[should_panic(expected = "different geometry")]
    fn dimension_mismatch_panics() {
        let a = Lattice::new(Geometry::periodic(4, 4).unwrap());
        let mut b = Lattice::new(Geometry::periodic(6, 4).unwrap());
        Stepper::new(ChiralityStream::new(0)).step(&a, &mut b, 0);
    }
}
