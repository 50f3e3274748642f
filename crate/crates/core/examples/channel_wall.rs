//! Flow pushed against a wall: density piles up in front of it.
//!
//! cargo run --release --example channel_wall

use fhp::WallProbe;

fn main() -> fhp::Result<()> {
    let result = WallProbe::default().run()?;
    print!("{result}");
    println!("column  density");
    for (x, d) in result.series.iter().rev().take(12) {
        println!("{x:>6}  {d:.3}");
    }
    Ok(())
}
