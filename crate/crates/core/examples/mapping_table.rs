//! Per-symbol parameter bundles: the preset table, its text form, and depth
//! modulation of IOI and register.

use pianola::mapping::{DepthModulation, MappingTable};

fn main() -> pianola::Result<()> {
    let table = MappingTable::canonical();
    let text = table.describe();
    print!("{text}");
    assert_eq!(MappingTable::parse(&text)?, table);

    let modulated = table.with_modulation(DepthModulation::default());
    println!("\nwith depth modulation:");
    for g in 0..4 {
        let a = modulated.resolve('A', g)?;
        println!("  A at generation {g}: base IOI mean {:.4} s, pitch {:?}", a.ioi.mean().unwrap_or(f64::NAN), a.pitch);
    }
    match modulated.resolve('C', 0) {
        Err(e) => println!("\nunknown symbol: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
