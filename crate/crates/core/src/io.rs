//! Standard MIDI File output with 10-bit velocity transport, and lossless
//! JSON/CSV event dumps.
//!
//! SMF note-on velocities are 7-bit: `v7 = max(1, round(v·127/1023))`. The
//! full value travels either in a sidecar JSON file (`<path>.vel.json`) keyed
//! by track and note ordinal, or as a CC#88 prefix carrying the residual
//! `v − round(v7·1023/127) + 64`. Foreign files without either are widened
//! with `v = round(v7·1023/127)`.
//!
//! CSV columns, in order: `onset_s,pitch,velocity10,duration_s,voice,symbol,generation,section`.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fs;
use std::path::{Path, PathBuf};

use midly::num::{u15, u24, u28, u4, u7};
use midly::{Format, Header, MetaMessage, MidiMessage, Smf, Timing, TrackEvent, TrackEventKind};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grammar::{Grammar, SymbolString};
use crate::hal::{enforce_constraints, precompensate, ConstraintReport, ConstraintSet, LatencyModel};
use crate::mapping::MappingTable;
use crate::pipeline::{generate, sort_events, NoteEvent, Piece};

pub const CSV_HEADER: [&str; 8] = ["onset_s", "pitch", "velocity10", "duration_s", "voice", "symbol", "generation", "section"];
/// Shift applied when pre-compensated onsets would land before zero.
pub const NEGATIVE_ONSET_OFFSET: f64 = 0.030;
const CC_HIGH_RES_VELOCITY: u8 = 88;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum HighResMode {
    #[default]
    Sidecar,
    Cc88,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MidiRenderConfig {
    pub ppq: u16,
    /// Microseconds per quarter note.
    pub tempo: u32,
    pub high_res: HighResMode,
}

impl Default for MidiRenderConfig {
    fn default() -> Self {
        Self { ppq: 960, tempo: 500_000, high_res: HighResMode::Sidecar }
    }
}

impl MidiRenderConfig {
    pub fn validate(&self) -> Result<()> {
        if self.ppq < 96 || self.ppq > 0x7FFF || self.tempo == 0 || self.tempo >= 1 << 24 {
            return Err(Error::Config(format!("need 96 <= ppq < 32768 and 0 < tempo < 2^24, got {self:?}")));
        }
        Ok(())
    }

    pub fn seconds_per_tick(&self) -> f64 {
        self.tempo as f64 / 1e6 / self.ppq as f64
    }
}

pub fn velocity_to_7bit(v: u16) -> u8 {
    ((v as f64 * 127.0 / 1023.0).round() as u8).max(1)
}

pub fn velocity_from_7bit(v7: u8) -> u16 {
    (v7 as f64 * 1023.0 / 127.0).round() as u16
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Sidecar {
    offset: f64,
    /// Voice id of each note track (track 1 onward).
    voices: Vec<u32>,
    /// `"track:ordinal"` → 10-bit velocity.
    velocities: BTreeMap<String, u16>,
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".vel.json");
    PathBuf::from(s)
}

/// Writes a format-1 SMF: a tempo track followed by one track per voice.
pub fn write_midi(p: &Piece, cfg: &MidiRenderConfig, path: &Path) -> Result<()> {
    cfg.validate()?;
    if let Some(e) = p.events.iter().find(|e| e.velocity > 1023 || e.pitch > 127) {
        return Err(Error::Argument(format!("event at {}s is out of range (pitch {}, velocity {})", e.onset, e.pitch, e.velocity)));
    }
    let min_onset = p.events.iter().map(|e| e.onset).fold(0.0, f64::min);
    let offset = if min_onset >= 0.0 {
        0.0
    } else if min_onset >= -NEGATIVE_ONSET_OFFSET {
        NEGATIVE_ONSET_OFFSET
    } else {
        (-min_onset * 1000.0).ceil() / 1000.0
    };
    let spt = cfg.seconds_per_tick();
    let tick = |t: f64| ((t + offset) / spt).round() as u64;

    let voices = p.voices();
    let mut sidecar = Sidecar { offset, voices: voices.clone(), velocities: BTreeMap::new() };
    let mut tracks: Vec<Vec<TrackEvent<'static>>> = vec![vec![
        TrackEvent { delta: u28::new(0), kind: TrackEventKind::Meta(MetaMessage::Tempo(u24::new(cfg.tempo))) },
        TrackEvent { delta: u28::new(0), kind: TrackEventKind::Meta(MetaMessage::EndOfTrack) },
    ]];
    for (t, &voice) in voices.iter().enumerate() {
        let mut notes = p.voice(voice);
        sort_events(&mut notes);
        // (tick, order, message): at equal ticks note-offs come first, and each
        // CC#88 prefix sits directly before its own note-on.
        let mut raw: Vec<(u64, usize, MidiMessage)> = Vec::new();
        for (k, e) in notes.iter().enumerate() {
            let on = tick(e.onset);
            let off = tick(e.onset + e.duration).max(on + 1);
            let v7 = velocity_to_7bit(e.velocity);
            let key = u7::new(e.pitch);
            match cfg.high_res {
                HighResMode::Sidecar => {
                    sidecar.velocities.insert(format!("{}:{k}", t + 1), e.velocity);
                }
                HighResMode::Cc88 => {
                    let residual = (e.velocity as i32 - velocity_from_7bit(v7) as i32 + 64).clamp(0, 127);
                    raw.push((on, 1 + 2 * k, MidiMessage::Controller { controller: u7::new(CC_HIGH_RES_VELOCITY), value: u7::new(residual as u8) }));
                }
                HighResMode::Off => {}
            }
            raw.push((on, 2 + 2 * k, MidiMessage::NoteOn { key, vel: u7::new(v7) }));
            raw.push((off, 0, MidiMessage::NoteOff { key, vel: u7::new(64) }));
        }
        raw.sort_by_key(|r| (r.0, r.1));
        let mut track = Vec::with_capacity(raw.len() + 1);
        let mut last = 0;
        for (at, _, message) in raw {
            track.push(TrackEvent { delta: u28::new((at - last) as u32), kind: TrackEventKind::Midi { channel: u4::new(0), message } });
            last = at;
        }
        track.push(TrackEvent { delta: u28::new(0), kind: TrackEventKind::Meta(MetaMessage::EndOfTrack) });
        tracks.push(track);
    }
    let smf = Smf { header: Header::new(Format::Parallel, Timing::Metrical(u15::new(cfg.ppq))), tracks };
    smf.save(path)?;
    let side = sidecar_path(path);
    if cfg.high_res == HighResMode::Sidecar {
        fs::write(side, serde_json::to_vec_pretty(&sidecar)?)?;
    } else if side.exists() {
        fs::remove_file(side)?;
    }
    Ok(())
}

/// Reads an SMF, restoring 10-bit velocities from a sidecar or CC#88 prefixes when present.
pub fn read_midi(path: &Path) -> Result<Piece> {
    let bytes = fs::read(path)?;
    let smf = Smf::parse(&bytes).map_err(|e| Error::Parse { location: path.display().to_string(), message: e.to_string() })?;
    let ppq = match smf.header.timing {
        Timing::Metrical(t) => t.as_int(),
        Timing::Timecode(..) => {
            return Err(Error::Parse { location: path.display().to_string(), message: "timecode timing is not supported".into() })
        }
    };
    let sidecar: Option<Sidecar> = match fs::read(sidecar_path(path)) {
        Ok(b) => Some(serde_json::from_slice(&b).map_err(|e| json_parse_error(&sidecar_path(path), e))?),
        Err(_) => None,
    };
    let offset = sidecar.as_ref().map_or(0.0, |s| s.offset);
    let mut tempo = 500_000u32;
    'find: for track in &smf.tracks {
        for ev in track {
            if let TrackEventKind::Meta(MetaMessage::Tempo(t)) = ev.kind {
                tempo = t.as_int();
                break 'find;
            }
        }
    }
    let spt = tempo as f64 / 1e6 / ppq as f64;

    let mut events = Vec::new();
    let mut note_track = 0usize;
    for (t, track) in smf.tracks.iter().enumerate() {
        let has_notes = track.iter().any(|e| matches!(e.kind, TrackEventKind::Midi { message: MidiMessage::NoteOn { .. }, .. }));
        if !has_notes {
            continue;
        }
        let voice = sidecar.as_ref().and_then(|s| s.voices.get(note_track).copied()).unwrap_or(note_track as u32);
        note_track += 1;
        let mut now = 0u64;
        let mut pending_cc: Option<u8> = None;
        let mut open: HashMap<u8, VecDeque<usize>> = HashMap::new();
        let mut ordinal = 0usize;
        let mut track_events: Vec<NoteEvent> = Vec::new();
        for ev in track {
            now += ev.delta.as_int() as u64;
            let TrackEventKind::Midi { message, .. } = ev.kind else { continue };
            match message {
                MidiMessage::Controller { controller, value } if controller.as_int() == CC_HIGH_RES_VELOCITY => {
                    pending_cc = Some(value.as_int());
                }
                MidiMessage::NoteOn { key, vel } if vel.as_int() > 0 => {
                    let v7 = vel.as_int();
                    let key_s = format!("{t}:{ordinal}");
                    let velocity = match (sidecar.as_ref().and_then(|s| s.velocities.get(&key_s)), pending_cc.take()) {
                        (Some(&v), _) => v,
                        (None, Some(cc)) => (velocity_from_7bit(v7) as i32 + cc as i32 - 64).clamp(0, 1023) as u16,
                        (None, None) => velocity_from_7bit(v7),
                    };
                    ordinal += 1;
                    let mut e = NoteEvent::new(now as f64 * spt - offset, key.as_int(), velocity, 0.0);
                    e.voice = voice;
                    open.entry(key.as_int()).or_default().push_back(track_events.len());
                    track_events.push(e);
                }
                MidiMessage::NoteOn { key, .. } | MidiMessage::NoteOff { key, .. } => {
                    if let Some(i) = open.get_mut(&key.as_int()).and_then(|q| q.pop_front()) {
                        let e = &mut track_events[i];
                        e.duration = now as f64 * spt - offset - e.onset;
                    }
                }
                _ => {}
            }
        }
        events.extend(track_events);
    }
    let mut piece = Piece::from_events(events);
    piece.meta.offset = offset;
    Ok(piece)
}

fn json_parse_error(path: &Path, e: serde_json::Error) -> Error {
    Error::Parse { location: format!("{} line {} column {}", path.display(), e.line(), e.column()), message: e.to_string() }
}

pub fn write_events_json(p: &Piece, path: &Path) -> Result<()> {
    fs::write(path, serde_json::to_vec_pretty(p)?)?;
    Ok(())
}

pub fn read_events_json(path: &Path) -> Result<Piece> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| json_parse_error(path, e))
}

pub fn write_events_csv(p: &Piece, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(CSV_HEADER)?;
    for e in &p.events {
        w.write_record([
            e.onset.to_string(),
            e.pitch.to_string(),
            e.velocity.to_string(),
            e.duration.to_string(),
            e.voice.to_string(),
            e.symbol.to_string(),
            e.generation.to_string(),
            e.section.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_events_csv(path: &Path) -> Result<Piece> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
    let header = r.headers()?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(Error::Parse { location: format!("{} line 1", path.display()), message: format!("expected header {}", CSV_HEADER.join(",")) });
    }
    let mut events = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let bad = |col: &str, msg: String| Error::Parse { location: format!("{} line {line} column {col}", path.display()), message: msg };
        if rec.len() != CSV_HEADER.len() {
            return Err(bad("*", format!("expected {} fields, found {}", CSV_HEADER.len(), rec.len())));
        }
        fn field<T: std::str::FromStr>(s: &str) -> std::result::Result<T, String>
        where
            T::Err: std::fmt::Display,
        {
            s.parse::<T>().map_err(|e| format!("{s:?}: {e}"))
        }
        let mut symbol = rec[5].chars();
        let sym = match (symbol.next(), symbol.next()) {
            (Some(c), None) => c,
            _ => return Err(bad("symbol", format!("expected one character, found {:?}", &rec[5]))),
        };
        let e = NoteEvent {
            onset: field(&rec[0]).map_err(|m| bad("onset_s", m))?,
            pitch: field(&rec[1]).map_err(|m| bad("pitch", m))?,
            velocity: field(&rec[2]).map_err(|m| bad("velocity10", m))?,
            duration: field(&rec[3]).map_err(|m| bad("duration_s", m))?,
            voice: field(&rec[4]).map_err(|m| bad("voice", m))?,
            symbol: sym,
            generation: field(&rec[6]).map_err(|m| bad("generation", m))?,
            section: field(&rec[7]).map_err(|m| bad("section", m))?,
        };
        events.push(e);
    }
    Ok(Piece { events, ..Piece::default() })
}

/// Reads a piece, choosing the format from the extension (`json`, `csv`, `mid`/`midi`).
pub fn read_events(path: &Path) -> Result<Piece> {
    match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
        Some("json") => read_events_json(path),
        Some("csv") => read_events_csv(path),
        Some("mid") | Some("midi") => read_midi(path),
        _ => Err(Error::Argument(format!("unrecognised event file extension: {}", path.display()))),
    }
}

/// Everything `generate` needs: grammar, depth, per-symbol table, the latency
/// model used for pre-compensation, the hardware limits and the SMF settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositionConfig {
    pub grammar: Grammar,
    pub depth: u32,
    pub table: MappingTable,
    pub latency: LatencyModel,
    #[serde(default)]
    pub constraints: ConstraintSet,
    #[serde(default)]
    pub midi: MidiRenderConfig,
}

/// Score, the performance sent to the instrument, and what the HAL changed.
#[derive(Debug, Clone)]
pub struct Rendered {
    pub symbols: SymbolString,
    pub score: Piece,
    pub performance: Piece,
    pub report: ConstraintReport,
}

impl CompositionConfig {
    /// Fibonacci grammar at depth 4 over [`MappingTable::canonical`], with the
    /// power-law latency model at exponent 0.5.
    pub fn canonical() -> Self {
        Self {
            grammar: Grammar::fibonacci(),
            depth: 4,
            table: MappingTable::canonical(),
            latency: LatencyModel::power(0.5),
            constraints: ConstraintSet::default(),
            midi: MidiRenderConfig::default(),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let cfg: Self = serde_json::from_slice(&fs::read(path)?)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, serde_json::to_vec_pretty(self)?)?;
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.table.validate()?;
        self.latency.validate()?;
        self.midi.validate()
    }

    /// Expand, generate, enforce the hardware limits, then pre-compensate.
    pub fn render(&self, seed: u64) -> Result<Rendered> {
        let symbols = self.grammar.expand(self.depth)?;
        let score = generate(&symbols, &self.table, seed)?;
        let (limited, report) = enforce_constraints(&score, &self.constraints);
        let performance = precompensate(&limited, &self.latency);
        Ok(Rendered { symbols, score, performance, report })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample_piece() -> Piece {
        let mut events = vec![
            NoteEvent::new(0.0, 60, 0, 0.25),
            NoteEvent::new(0.123457, 64, 1023, 0.1),
            NoteEvent::new(0.5, 60, 517, 0.2).in_voice(1),
            NoteEvent::new(0.5, 67, 3, 0.05).in_voice(1),
        ];
        events[1].symbol = 'B';
        events[1].generation = 2;
        events[1].section = 1;
        Piece::from_events(events)
    }

    #[test]
    fn velocity_mapping_boundaries() {
        assert_eq!(velocity_to_7bit(1023), 127);
        assert_eq!(velocity_to_7bit(0), 1);
        assert_eq!(velocity_from_7bit(127), 1023);
        assert_eq!(velocity_from_7bit(64), 516);
    }

    #[test]
    fn json_and_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = sample_piece();
        let j = dir.path().join("p.json");
        write_events_json(&p, &j).unwrap();
        assert_eq!(read_events(&j).unwrap(), p);
        let c = dir.path().join("p.csv");
        write_events_csv(&p, &c).unwrap();
        assert_eq!(read_events(&c).unwrap().events, p.events);
        let empty = dir.path().join("e.csv");
        write_events_csv(&Piece::default(), &empty).unwrap();
        assert!(read_events(&empty).unwrap().events.is_empty());
    }

    #[test]
    fn csv_golden_header() {
        let dir = tempfile::tempdir().unwrap();
        let c = dir.path().join("p.csv");
        write_events_csv(&Piece::from_events(vec![NoteEvent::new(0.5, 60, 700, 0.25)]), &c).unwrap();
        assert_eq!(fs::read_to_string(&c).unwrap(), "onset_s,pitch,velocity10,duration_s,voice,symbol,generation,section\n0.5,60,700,0.25,0,-,0,0\n");
    }

    #[test]
    fn malformed_inputs_report_location() {
        let dir = tempfile::tempdir().unwrap();
        let j = dir.path().join("bad.json");
        fs::write(&j, "{\"events\": [").unwrap();
        assert!(matches!(read_events(&j), Err(Error::Parse { .. })));
        let c = dir.path().join("bad.csv");
        fs::write(&c, "onset_s,pitch,velocity10,duration_s,voice,symbol,generation,section\n0.5,sixty,1,1,0,A,0,0\n").unwrap();
        match read_events(&c) {
            Err(Error::Parse { location, .. }) => assert!(location.contains("line 2") && location.contains("pitch")),
            other => panic!("{other:?}"),
        }
        let m = dir.path().join("bad.mid");
        fs::write(&m, b"MThd\0\0\0\x06\0\x01").unwrap();
        assert!(matches!(read_events(&m), Err(Error::Parse { .. })));
    }

    #[test]
    fn midi_round_trip_modes() {
        let dir = tempfile::tempdir().unwrap();
        let p = sample_piece();
        for mode in [HighResMode::Sidecar, HighResMode::Cc88] {
            let m = dir.path().join("p.mid");
            write_midi(&p, &MidiRenderConfig { high_res: mode, ..Default::default() }, &m).unwrap();
            let q = read_events(&m).unwrap();
            assert_eq!(q.events.len(), p.events.len());
            for (a, b) in p.events.iter().zip(&q.events) {
                assert!((a.onset - b.onset).abs() <= 0.000521);
                assert_eq!((a.pitch, a.velocity, a.voice), (b.pitch, b.velocity, b.voice), "{mode:?}");
            }
        }
    }

    #[test]
    fn foreign_midi_is_widened() {
        let dir = tempfile::tempdir().unwrap();
        let m = dir.path().join("p.mid");
        write_midi(&sample_piece(), &MidiRenderConfig { high_res: HighResMode::Off, ..Default::default() }, &m).unwrap();
        let q = read_events(&m).unwrap();
        let v: Vec<u16> = q.events.iter().map(|e| e.velocity).collect();
        let expect: Vec<u16> = sample_piece().events.iter().map(|e| velocity_from_7bit(velocity_to_7bit(e.velocity))).collect();
        assert_eq!(v, expect);
    }

    #[test]
    fn negative_onsets_shift_and_restore() {
        let dir = tempfile::tempdir().unwrap();
        let m = dir.path().join("n.mid");
        let p = Piece::from_events(vec![NoteEvent::new(-0.02, 60, 400, 0.1), NoteEvent::new(0.3, 62, 400, 0.1)]);
        write_midi(&p, &MidiRenderConfig::default(), &m).unwrap();
        let q = read_events(&m).unwrap();
        assert_eq!(q.meta.offset, NEGATIVE_ONSET_OFFSET);
        assert!((q.events[0].onset + 0.02).abs() <= 0.000521);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn midi_onsets_within_one_tick(notes in prop::collection::vec((0.0f64..20.0, 21u8..=108, 0u16..=1023, 0.01f64..1.0), 1..40)) {
            let events: Vec<NoteEvent> = notes.iter().map(|&(t, p, v, d)| NoteEvent::new((t * 1e6).round() / 1e6, p, v, d)).collect();
            let p = Piece::from_events(events);
            let dir = tempfile::tempdir().unwrap();
            let m = dir.path().join("p.mid");
            write_midi(&p, &MidiRenderConfig::default(), &m).unwrap();
            let q = read_events(&m).unwrap();
            prop_assert_eq!(q.events.len(), p.events.len());
            let mut a: Vec<(u8, u16, i64)> = p.events.iter().map(|e| (e.pitch, e.velocity, (e.onset / (0.5 / 960.0)).round() as i64)).collect();
            let mut b: Vec<(u8, u16, i64)> = q.events.iter().map(|e| (e.pitch, e.velocity, (e.onset / (0.5 / 960.0)).round() as i64)).collect();
            a.sort();
            b.sort();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn csv_lossless(onset in -5.0f64..100.0, v in 0u16..=1023, d in 0.0f64..3.0) {
            let p = Piece::from_events(vec![NoteEvent::new(onset, 60, v, d)]);
            let dir = tempfile::tempdir().unwrap();
            let c = dir.path().join("p.csv");
            write_events_csv(&p, &c).unwrap();
            prop_assert_eq!(read_events(&c).unwrap().events, p.events);
        }
    }
}
