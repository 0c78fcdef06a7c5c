//! L-system expansion, generation tags and symbolic structure measures.
//!
//! `cargo run --example grammar_expansion -- [max_depth]`

use pianola::grammar::{shuffle_preserving_counts, symbol_counts, Grammar};
use pianola::metrics::{information_rate, lz_complexity, rqa_determinism};

fn main() -> pianola::Result<()> {
    let max_depth: u32 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(7);
    let g = Grammar::fibonacci();

    println!("{:>5} {:>6} {:>5} {:>5} {:>7} {:>4} {:>7}", "depth", "length", "A", "B", "IR", "LZ", "DET");
    for depth in 1..=max_depth {
        let s = g.expand(depth)?;
        let c = s.chars();
        let counts = symbol_counts(&s);
        let det = rqa_determinism(&c, 2).map(|d| format!("{d:.3}")).unwrap_or_else(|_| "-".into());
        let ir = information_rate(&c).map(|v| format!("{v:.3}")).unwrap_or_else(|_| "-".into());
        println!(
            "{depth:>5} {:>6} {:>5} {:>5} {ir:>7} {:>4} {det:>7}",
            s.len(),
            counts.get(&'A').unwrap_or(&0),
            counts.get(&'B').unwrap_or(&0),
            lz_complexity(&c),
        );
    }

    let s = g.expand(4)?;
    println!("\ndepth 4: {s}\ntagged:  {}", s.tagged());
    let shuffled = shuffle_preserving_counts(&s, 11);
    println!("shuffle: {shuffled}  (IR {:.3})", information_rate(&shuffled.chars())?);

    // any alphabet works
    let algae = Grammar::new("abc", "a", &[('a', "ab"), ('b', "ca"), ('c', "a")])?;
    println!("\nthree-symbol grammar, depth 5: {}", algae.expand(5)?);
    Ok(())
}
