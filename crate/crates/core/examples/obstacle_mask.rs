//! Flow past a plate loaded from a PBM mask, with bounce-back walls.
//!
//! cargo run --release --example obstacle_mask [output-dir]

use fhp::boundary::{load_mask, BoundaryKind, CellKind, Mask};
use fhp::{run, ScenarioKind, SimConfig};

fn main() -> fhp::Result<()> {
    let (w, h) = (160, 80);
    let dir = std::path::PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "out/obstacle".into()));
    fhp::io::ensure_dir(&dir)?;

    let mut mask = Mask::for_boundary(BoundaryKind::Walled, w, h);
    for y in 25..55 {
        for x in 50..53 {
            mask.set(x, y, CellKind::Wall);
        }
    }
    let path = dir.join("plate.pbm");
    fhp::io::write_text(&path, &mask.to_pbm())?;
    let reloaded = load_mask(&fhp::io::read_text(&path)?, w, h, BoundaryKind::Walled)?;
    assert_eq!(reloaded, mask);

    let mut cfg = SimConfig::new(w, h, 200, 3, ScenarioKind::ChannelFlow, 0.2);
    cfg.bias_fill = Some(0.6);
    cfg.boundary = BoundaryKind::Walled;
    cfg.block = 4;
    cfg.window = 20;
    cfg.frame_every = 50;
    cfg.output_dir = dir.clone();
    let out = run(&cfg, Some(&path), true)?;
    println!("wall sites {}, fluid sites {}", mask.wall_count(), mask.fluid_count());
    println!("mass {} -> {}", out.summary.mass_start, out.summary.mass_end);
    println!("{} frames in {}", out.frames.len(), dir.display());
    Ok(())
}
