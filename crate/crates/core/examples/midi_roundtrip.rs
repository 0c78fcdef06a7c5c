//! 10-bit velocities through a 7-bit file format: sidecar and CC#88 transport,
//! plus the lossless JSON and CSV dumps.

use pianola::io::{read_events, read_midi, write_events_csv, write_midi, HighResMode, MidiRenderConfig};
use pianola::pipeline::{NoteEvent, Piece};

fn main() -> pianola::Result<()> {
    let dir = std::env::temp_dir().join("pianola-midi");
    std::fs::create_dir_all(&dir)?;
    let p = Piece::from_events(vec![
        NoteEvent::new(0.0, 60, 517, 0.25),
        NoteEvent::new(0.25, 64, 1023, 0.25),
        NoteEvent::new(0.5, 67, 3, 0.5).in_voice(1),
    ]);
    for mode in [HighResMode::Sidecar, HighResMode::Cc88, HighResMode::Off] {
        let path = dir.join(format!("{mode:?}.mid").to_lowercase());
        write_midi(&p, &MidiRenderConfig { high_res: mode, ..Default::default() }, &path)?;
        let back = read_midi(&path)?;
        let v: Vec<u16> = back.events.iter().map(|e| e.velocity).collect();
        println!("{mode:<8?} velocities {v:?}");
    }
    let csv = dir.join("events.csv");
    write_events_csv(&p, &csv)?;
    assert_eq!(read_events(&csv)?.events, p.events);
    println!("csv round trip is exact: {}", csv.display());
    Ok(())
}
