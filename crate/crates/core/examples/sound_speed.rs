//! Pressure pulse: track the density ring and fit its speed.
//!
//! cargo run --release --example sound_speed

use fhp::SoundProbe;

fn main() -> fhp::Result<()> {
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    let result = SoundProbe {
        workers,
        ..SoundProbe::default()
    }
    .run()?;
    print!("{result}");
    println!("step  ring radius");
    for (t, r) in &result.series {
        println!("{t:>4}  {r:.2}");
    }
    Ok(())
}
