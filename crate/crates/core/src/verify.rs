//! Self-checks of the microdynamics, run by the `verify` subcommand.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::boundary::{BoundaryKind, CellKind, Mask};
use crate::dynamics::{build_table, collide_formula, CollisionTable};
use crate::engine::Simulation;
use crate::lattice::{Direction, Geometry, Lattice, Site, SiteState};
use crate::scenario::Scenario;

#[derive(Clone, Debug)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, failure: Option<String>, ok: String) -> Self {
        match failure {
            None => Check {
                name,
                passed: true,
                detail: ok,
            },
            Some(detail) => Check {
                name,
                passed: false,
                detail,
            },
        }
    }
}

/// Table entries agree with the closed-form collision rule.
pub fn check_table_formula(table: &CollisionTable) -> Check {
    let failure = table
        .iter()
        .find(|&(q, s, out)| collide_formula(s, q) != out)
        .map(|(q, s, out)| {
            format!(
                "q={} state {} -> table {} formula {}",
                q as u8,
                s.bits(),
                out.bits(),
                collide_formula(s, q).bits()
            )
        });
    Check::new("table matches formula", failure, "128 entries".into())
}

/// Every entry conserves particle number and exact momentum.
pub fn check_conservation(table: &CollisionTable) -> Check {
    let failure = table
        .iter()
        .find(|&(_, s, out)| s.mass() != out.mass() || s.exact_momentum() != out.exact_momentum())
        .map(|(q, s, out)| format!("q={} state {} -> {} breaks conservation", q as u8, s.bits(), out.bits()));
    Check::new("per-site conservation", failure, "mass and momentum preserved".into())
}

/// Moving along a direction and back along its opposite returns to the start.
pub fn check_streaming_involution() -> Check {
    let g = Geometry::periodic(8, 6).expect("valid geometry");
    let mut failure = None;
    'outer: for i in 0..g.len() {
        let p = g.site(i);
        for d in Direction::ALL {
            let back = g.neighbor(p, d).and_then(|n| g.neighbor(n, d.opposite()));
            if back != Some(p) {
                failure = Some(format!("site ({}, {}) direction {}", p.x, p.y, d.label()));
                break 'outer;
            }
        }
    }
    Check::new(
        "streaming involution",
        failure,
        format!("{} sites x 6 directions", g.len()),
    )
}

fn mass_drift(name: &'static str, initial: Lattice, seed: u64, steps: u64) -> Check {
    let start = initial.mass();
    let mut sim = Simulation::new(initial, seed);
    let mut failure = None;
    for _ in 0..steps {
        sim.step();
        if sim.lattice().mass() != start {
            failure = Some(format!(
                "mass {} -> {} at step {}",
                start,
                sim.lattice().mass(),
                sim.time()
            ));
            break;
        }
    }
    Check::new(name, failure, format!("mass {start} over {steps} steps"))
}

/// Periodic random lattice keeps its particle count.
pub fn check_periodic_mass(steps: u64) -> Check {
    let g = Geometry::periodic(64, 64).expect("valid geometry");
    let l = Scenario::uniform(0.4)
        .init(&Lattice::new(g), 3)
        .expect("valid scenario");
    let momentum = l.exact_momentum();
    let mut sim = Simulation::new(l, 3);
    let mut check = mass_drift("periodic mass", sim.lattice().clone(), 3, steps);
    sim.advance(steps);
    if check.passed && sim.lattice().exact_momentum() != momentum {
        check.passed = false;
        check.detail = format!("momentum {:?} -> {:?}", momentum, sim.lattice().exact_momentum());
    }
    check
}

/// Bounce-back against a random obstacle mask keeps the particle count.
pub fn check_wall_mass(steps: u64) -> Check {
    let (w, h) = (48, 48);
    let g = Geometry::new(w, h, BoundaryKind::Walled).expect("valid geometry");
    let mut mask = Mask::for_boundary(BoundaryKind::Walled, w, h);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            if rng.gen_bool(0.1) {
                mask.set(x, y, CellKind::Wall);
            }
        }
    }
    let mut l = Lattice::with_mask(g, mask).expect("mask matches geometry");
    for i in 0..g.len() {
        let p: Site = g.site(i);
        if l.kind(p) == CellKind::Fluid {
            l.set(p, SiteState::from_bits(rng.gen_range(0..64)));
        }
    }
    mass_drift("wall mass", l, 5, steps)
}

/// All checks with their default sizes.
pub fn run_all() -> Vec<Check> {
    let table = build_table();
    vec![
        check_table_formula(&table),
        check_conservation(&table),
        check_streaming_involution(),
        check_periodic_mass(1000),
        check_wall_mass(1000),
    ]
}
