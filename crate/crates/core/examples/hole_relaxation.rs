//! A density hole filling in: block-density spread over time and a few
//! density frames.
//!
//! cargo run --release --example hole_relaxation [output-dir]

use fhp::{probe_relaxation, run, ScenarioKind, SimConfig};

fn main() -> fhp::Result<()> {
    let mut cfg = SimConfig::new(100, 100, 300, 42, ScenarioKind::Hole, 0.667);
    cfg.output_dir = std::env::args().nth(1).unwrap_or_else(|| "out/hole".into()).into();
    cfg.frame_every = 50;
    let out = run(&cfg, None, true)?;

    println!("mass {} -> {}", out.summary.mass_start, out.summary.mass_end);
    println!("step  block-density std");
    for (t, s) in out.windowed_std.iter().step_by(25) {
        println!("{t:>4}  {s:.4}");
    }
    print!("{}", probe_relaxation(&out));
    println!(
        "relative spread at the end: {:.4}",
        out.final_field.density_std() / out.mean_density
    );
    println!("{} frames in {}", out.frames.len(), cfg.output_dir.display());
    Ok(())
}
