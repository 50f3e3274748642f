//! Several disconnected empty regions; the frames show the transient
//! pattern as the fronts meet.
//!
//! cargo run --release --example multi_hole [output-dir]

use fhp::{run, ScenarioKind, SimConfig};

fn main() -> fhp::Result<()> {
    let mut cfg = SimConfig::new(200, 200, 400, 7, ScenarioKind::MultiHole, 0.5);
    cfg.output_dir = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "out/multi_hole".into())
        .into();
    cfg.block = 4;
    cfg.window = 10;
    cfg.frame_every = 25;
    for r in cfg.scenario().regions_for(&cfg.geometry()?) {
        println!("empty region: {r}");
    }
    let out = run(&cfg, None, true)?;
    for (t, s) in out.windowed_std.iter().step_by(50) {
        println!("step {t:>4}  spread {s:.4}");
    }
    println!("{} frames in {}", out.frames.len(), cfg.output_dir.display());
    Ok(())
}
