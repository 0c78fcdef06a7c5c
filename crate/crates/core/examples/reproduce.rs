//! Runs every registered experiment and prints each report.
//!
//! `cargo run --release --example reproduce -- [seed] [name...]`

use pianola::experiments::run_all;

fn main() -> pianola::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(42);
    let names: Vec<String> = args.collect();
    let only = (!names.is_empty()).then_some(names.as_slice());
    let summary = run_all(seed, false, only)?;
    for r in &summary.reports {
        println!("{}", r.render());
    }
    print!("{}", summary.render());
    Ok(())
}
