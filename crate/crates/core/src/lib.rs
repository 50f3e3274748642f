//! FHP-I lattice-gas cellular automaton.
//!
//! Six-velocity particles hop on a triangular lattice, collide through a
//! precomputed 128-entry table and stream to their neighbors. Mass and
//! momentum are conserved exactly; coarse-grained moments recover
//! Navier-Stokes-like behavior.
//!
//! ```
//! use fhp::{Geometry, Lattice, Scenario, Simulation};
//!
//! let template = Lattice::new(Geometry::periodic(50, 50).unwrap());
//! let initial = Scenario::hole(0.5).init(&template, 7).unwrap();
//! let mass = initial.mass();
//! let mut sim = Simulation::new(initial, 7);
//! sim.advance(20);
//! assert_eq!(sim.lattice().mass(), mass);
//! ```

pub mod boundary;
pub mod cli;
pub mod config;
pub mod dynamics;
pub mod engine;
pub mod error;
pub mod io;
pub mod lattice;
pub mod observables;
pub mod probes;
pub mod scenario;
pub mod verify;

pub use boundary::{bounce_back, load_mask, BoundaryKind, CellKind, Mask};
pub use config::{parse_config, SimConfig};
pub use dynamics::{build_table, collide_formula, step, ChiralityStream, CollisionTable, Stepper};
pub use engine::{run, RunOutput, RunSummary, Simulation};
pub use error::{Error, Result};
pub use io::{write_frame, Frame};
pub use lattice::{Direction, Geometry, Lattice, LatticeUnits, Site, SiteState};
pub use observables::{coarse_grain, BlockCounts, MacroField, TheoryParams};
pub use probes::{probe_relaxation, ProbeResult, SoundProbe, ViscosityProbe, WallProbe};
pub use scenario::{Region, Scenario, ScenarioKind};
