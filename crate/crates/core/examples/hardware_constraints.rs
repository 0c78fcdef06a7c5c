//! Hardware limits: constraint enforcement on a dense texture and the three
//! beyond-human presets that sit exactly at the limits.

use pianola::hal::{enforce_constraints, ConstraintSet};
use pianola::pipeline::{generate_beyond_human, BeyondHuman, NoteEvent, Piece};
use pianola::stochastic::Rng;

fn main() -> pianola::Result<()> {
    let cs = ConstraintSet::default();
    let mut rng = Rng::new(9);
    // a repeated-note flurry faster than a key can reset
    let events: Vec<NoteEvent> =
        (0..200).map(|k| NoteEvent::new(k as f64 * 0.02, 60 + rng.int_inclusive(0, 2) as u8, 1100, 0.015)).collect();
    let (fixed, report) = enforce_constraints(&Piece::from_events(events), &cs);
    println!("dense texture: {} events kept, {} actions", fixed.events.len(), report.violations.len());
    for reason in ["per-key rate", "velocity range", "polyphony"] {
        println!("  {reason:<14} {}", report.count(reason));
    }
    for v in report.violations.iter().take(3) {
        println!("  e.g. t={:.3} pitch {} {} -> {}", v.onset, v.pitch, v.reason, v.action);
    }

    for kind in [BeyondHuman::polyphony(), BeyondHuman::trill(), BeyondHuman::arpeggio()] {
        let p = generate_beyond_human(&kind)?;
        let (_, r) = enforce_constraints(&p, &cs);
        println!("\n{kind:?}\n  {} events over {:.2} s, {} constraint actions", p.events.len(), p.duration(), r.violations.len());
    }

    let one_key = BeyondHuman::Trill { rate: 30.0, keys: vec![60], duration: 1.0 };
    println!("\nsingle-key 30 Hz trill: {}", generate_beyond_human(&one_key).unwrap_err());
    Ok(())
}
