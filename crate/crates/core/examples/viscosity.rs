//! Shear-wave decay: measure the kinematic viscosity at rho = 3 and check
//! the k^2 scaling of the decay rate.
//!
//! cargo run --release --example viscosity [ensembles]

use fhp::ViscosityProbe;

fn main() -> fhp::Result<()> {
    let ensembles = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(16);
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    let probe = ViscosityProbe {
        ensembles,
        workers,
        ..ViscosityProbe::default()
    };
    let result = probe.run()?;
    print!("{result}");

    let half = ViscosityProbe {
        height: 64,
        ..probe.clone()
    }
    .run()?;
    if let (Some(a), Some(b)) = (half.diagnostic("decay_rate"), result.diagnostic("decay_rate")) {
        println!(
            "decay rate H=64: {a:.5}  H=128: {b:.5}  ratio {:.2} (k^2 scaling gives 4)",
            a / b
        );
    }
    Ok(())
}
