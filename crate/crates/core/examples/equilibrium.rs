//! Uniform fill as a fixed point, and the closed-form equilibrium values.
//!
//! cargo run --release --example equilibrium

use fhp::observables::{equilibrium_occupation, g_factor, theory_pressure, theory_viscosity};
use fhp::probes::time_averaged_occupations;
use fhp::{Direction, Geometry, Lattice, Scenario, TheoryParams};

fn main() -> fhp::Result<()> {
    let template = Lattice::new(Geometry::periodic(100, 100)?);
    let initial = Scenario::uniform(0.5).init(&template, 4)?;
    let occ = time_averaged_occupations(initial, 4, 200);
    println!("occupations averaged over 200 steps: {occ:.4?}");

    let params = TheoryParams::default();
    println!("\n{:>5} {:>8} {:>10} {:>10}", "rho", "G", "p(u=0)", "nu");
    for rho in [0.5, 1.0, 2.0, 3.0, 4.0, 5.0] {
        println!(
            "{rho:>5.1} {:>8.4} {:>10.4} {:>10.4}",
            g_factor(rho),
            theory_pressure(rho, [0.0, 0.0], &params)?,
            theory_viscosity(rho, &params, 1.0)?
        );
    }

    let u = [0.1, 0.0];
    println!("\noccupations at rho = 3, u = {u:?}:");
    for d in Direction::ALL {
        println!(
            "  direction {}: {:.5}",
            d.label(),
            equilibrium_occupation(3.0, u, d, &params)?
        );
    }
    Ok(())
}
