//! Render the two-symbol preset and write it as MIDI, JSON and CSV.
//!
//! `cargo run --example render_piece -- [seed] [out_dir]`

use std::path::PathBuf;

use pianola::io::{self, CompositionConfig, MidiRenderConfig};

fn main() -> pianola::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(42);
    let out = args.next().map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("pianola-render"));

    let cfg = CompositionConfig::canonical();
    let r = cfg.render(seed)?;
    println!("symbols {}  ({} events, {:.0} s)", r.symbols, r.score.events.len(), r.score.duration());
    for (k, s) in r.score.sections.iter().enumerate() {
        let n = r.score.in_section(k as u32).len();
        println!("  section {k} {} gen {} {:>5.1}-{:>5.1} s  {:>5.1} notes/s", s.symbol, s.generation, s.start, s.end, n as f64 / (s.end - s.start));
    }
    println!("HAL adjusted {} events", r.report.violations.len());

    std::fs::create_dir_all(&out)?;
    io::write_midi(&r.performance, &MidiRenderConfig::default(), &out.join("piece.mid"))?;
    io::write_events_json(&r.score, &out.join("score.json"))?;
    io::write_events_csv(&r.score, &out.join("score.csv"))?;
    let back = io::read_midi(&out.join("piece.mid"))?;
    println!("wrote {} ({} notes read back)", out.display(), back.events.len());
    Ok(())
}
