//! Print the collision rule in readable form: every state that changes,
//! for both chiralities.
//!
//! cargo run --example collision_table

use fhp::{build_table, SiteState};

fn main() {
    let table = build_table();
    println!("{:<4} {:<14} {:<14}", "q", "in", "out");
    for (q, s, out) in table.iter() {
        if s != out {
            println!(
                "{:<4} {:<14} {:<14}",
                q as u8,
                format!("{:?}", s.labels()),
                format!("{:?}", out.labels())
            );
        }
    }
    let unchanged = table.iter().filter(|(_, s, o)| s == o).count();
    println!("{unchanged} of 128 entries leave the state unchanged");

    let pair = SiteState::from_labels(&[1, 4]);
    println!(
        "{:?} -> {:?} (q=1), {:?} (q=0)",
        pair.labels(),
        table.collide(pair, true).labels(),
        table.collide(pair, false).labels()
    );
}
