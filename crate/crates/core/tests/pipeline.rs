use std::path::Path;

use pianola::hal::{ConstraintSet, LatencyModel};
use pianola::io::{read_events_csv, read_events_json, read_midi, write_events_csv, write_events_json, write_midi, CompositionConfig, MidiRenderConfig};
use pianola::pipeline::{MIN_KEY_IOI, VELOCITY_MAX};
use proptest::prelude::*;

fn preset(name: &str) -> CompositionConfig {
    CompositionConfig::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("presets").join(name)).unwrap()
}

#[test]
fn canonical_preset_matches_builtin() {
    assert_eq!(preset("canonical.json"), CompositionConfig::canonical());
    preset("depth_weighted.json");
}

#[test]
fn rendered_performance_respects_limits() {
    let r = CompositionConfig::canonical().render(11).unwrap();
    let cs = ConstraintSet::default();
    assert_eq!(r.score.events.len(), r.performance.events.len() + r.report.count("per-key rate") + r.report.count("polyphony"));
    let mut last = std::collections::HashMap::new();
    for e in &r.performance.events {
        assert!(e.velocity <= VELOCITY_MAX.min(cs.velocity_max));
        // pre-compensation moves onsets earlier by at most 30 ms
        if let Some(prev) = last.insert(e.pitch, e.onset) {
            assert!(e.onset - prev >= MIN_KEY_IOI - 0.021, "{} {}", e.onset, prev);
        }
    }
}

#[test]
fn files_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let piece = CompositionConfig::canonical().render(5).unwrap().score;
    let j = dir.path().join("p.json");
    write_events_json(&piece, &j).unwrap();
    assert_eq!(read_events_json(&j).unwrap(), piece);

    let c = dir.path().join("p.csv");
    write_events_csv(&piece, &c).unwrap();
    let back = read_events_csv(&c).unwrap();
    assert_eq!(back.events.len(), piece.events.len());
    for (a, b) in back.events.iter().zip(&piece.events) {
        assert!((a.onset - b.onset).abs() < 1e-9 && a.pitch == b.pitch && a.velocity == b.velocity);
    }

    let m = dir.path().join("p.mid");
    let cfg = MidiRenderConfig::default();
    write_midi(&piece, &cfg, &m).unwrap();
    let back = read_midi(&m).unwrap();
    assert_eq!(back.events.len(), piece.events.len());
    let tick = cfg.seconds_per_tick();
    // ticks can reorder near-simultaneous onsets, so match rather than zip
    for b in &piece.events {
        let hit = back.events.iter().any(|a| {
            (a.voice, a.pitch, a.velocity) == (b.voice, b.pitch, b.velocity) && (a.onset - b.onset).abs() <= tick / 2.0 + 1e-9
        });
        assert!(hit, "no match for {b:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn render_is_seed_deterministic(seed in any::<u64>()) {
        let cfg = CompositionConfig::canonical();
        let a = cfg.render(seed).unwrap();
        let b = cfg.render(seed).unwrap();
        prop_assert_eq!(a.performance, b.performance);
    }

    #[test]
    fn compensated_onsets_land_on_score(seed in 0u64..1000) {
        let mut cfg = CompositionConfig::canonical();
        cfg.latency = LatencyModel::linear();
        let r = cfg.render(seed).unwrap();
        let m = cfg.latency.clone();
        for e in &r.performance.events {
            let heard = e.onset + pianola::hal::latency(&m, e.velocity as f64).unwrap() / 1000.0;
            prop_assert!(r.score.events.iter().any(|s| s.pitch == e.pitch && (s.onset - heard).abs() < 1e-9));
        }
    }
}
