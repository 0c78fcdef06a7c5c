//! Section-by-section event rendering, collision masking and
//! convergence-triggered switching.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::canon::{find_convergences, ConvergenceEvent, ConvergenceQuery, VoiceSpec};
use crate::error::{Error, Result};
use crate::grammar::SymbolString;
use crate::mapping::{MappingTable, ParameterConfig, PitchLaw};
use crate::stochastic::{sample_ioi_stream, sample_positive, Distribution, RateFunction, Rng};

/// Highest 10-bit velocity.
pub const VELOCITY_MAX: u16 = 1023;
/// Minimum spacing between onsets on one key, seconds.
pub const MIN_KEY_IOI: f64 = 0.050;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoteEvent {
    pub onset: f64,
    pub pitch: u8,
    pub velocity: u16,
    pub duration: f64,
    pub voice: u32,
    pub symbol: char,
    pub generation: u32,
    pub section: u32,
}

impl NoteEvent {
    pub fn new(onset: f64, pitch: u8, velocity: u16, duration: f64) -> Self {
        Self { onset, pitch, velocity, duration, voice: 0, symbol: '-', generation: 0, section: 0 }
    }

    pub fn in_voice(mut self, voice: u32) -> Self {
        self.voice = voice;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Section {
    pub symbol: char,
    pub generation: u32,
    pub start: f64,
    pub end: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PieceMeta {
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub config_hash: Option<String>,
    /// Global shift (seconds) added when writing files so onsets stay non-negative.
    #[serde(default)]
    pub offset: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub events: Vec<NoteEvent>,
    pub sections: Vec<Section>,
    #[serde(default)]
    pub meta: PieceMeta,
}

impl Piece {
    pub fn from_events(mut events: Vec<NoteEvent>) -> Self {
        sort_events(&mut events);
        Self { events, sections: Vec::new(), meta: PieceMeta::default() }
    }

    pub fn duration(&self) -> f64 {
        self.sections.last().map(|s| s.end).unwrap_or_else(|| self.events.iter().map(|e| e.onset + e.duration).fold(0.0, f64::max))
    }

    /// Events of one voice, in onset order.
    pub fn voice(&self, voice: u32) -> Vec<NoteEvent> {
        self.events.iter().filter(|e| e.voice == voice).copied().collect()
    }

    pub fn voices(&self) -> Vec<u32> {
        let mut v: Vec<u32> = self.events.iter().map(|e| e.voice).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn in_section(&self, section: u32) -> Vec<NoteEvent> {
        self.events.iter().filter(|e| e.section == section).copied().collect()
    }
}

/// Deterministic order: onset, then voice, then pitch.
pub fn sort_events(events: &mut [NoteEvent]) {
    events.sort_by(|a, b| a.onset.total_cmp(&b.onset).then(a.voice.cmp(&b.voice)).then(a.pitch.cmp(&b.pitch)));
}

fn round_us(t: f64) -> f64 {
    (t * 1e6).round() / 1e6
}

pub fn clamp_velocity(v: f64) -> u16 {
    v.round().clamp(0.0, VELOCITY_MAX as f64) as u16
}

/// Truncates each duration at the next onset on the same pitch.
pub fn truncate_overlaps(events: &mut [NoteEvent]) {
    let mut next: HashMap<u8, f64> = HashMap::new();
    for e in events.iter_mut().rev() {
        if let Some(&t) = next.get(&e.pitch) {
            e.duration = e.duration.min(t - e.onset).max(1e-6);
        }
        next.insert(e.pitch, e.onset);
    }
}

/// Onsets of one voice inside `[start, end)`, hard boundary at `end`.
fn voice_onsets(ioi: &Distribution, ratio: f64, start: f64, end: f64, rng: &mut Rng) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    if let Distribution::InhomogeneousPoisson { rate, peak } = ioi {
        // thinning against the voice-scaled rate, time relative to the section
        let mut t = 0.0;
        let span = end - start;
        let top = peak * ratio;
        let mut times = Vec::new();
        loop {
            t += rng.standard_exponential() / top;
            if t >= span {
                break;
            }
            if rng.uniform() * top <= rate.rate_at(t) * ratio {
                times.push(start + t);
            }
        }
        for (k, &t) in times.iter().enumerate() {
            let next = times.get(k + 1).copied().unwrap_or(end);
            out.push((t, next - t));
        }
        return Ok(out);
    }
    let mut t = start;
    while t < end {
        let tau = sample_positive(ioi, rng)? / ratio;
        out.push((t, tau));
        t += tau;
    }
    Ok(out)
}

fn render_section(cfg: &ParameterConfig, start: f64, tag: (char, u32, u32), rng: &mut Rng) -> Result<Vec<NoteEvent>> {
    let end = start + cfg.duration;
    let mut events = Vec::new();
    for (voice, &ratio) in cfg.ratios.iter().enumerate() {
        for (t, tau) in voice_onsets(&cfg.ioi, ratio, start, end, rng)? {
            let onset = round_us(t);
            if onset >= end {
                continue;
            }
            let pitch = cfg.pitch.sample(rng)?;
            let velocity = clamp_velocity(cfg.velocity.sample(rng)?);
            events.push(NoteEvent {
                onset,
                pitch,
                velocity,
                duration: tau,
                voice: voice as u32,
                symbol: tag.0,
                generation: tag.1,
                section: tag.2,
            });
        }
    }
    Ok(events)
}

/// Renders every symbol of `s` as one section. Section `k` draws from stream
/// `k` of `seed`, so sections are rendered in parallel with the same result as
/// a sequential pass.
pub fn generate(s: &SymbolString, table: &MappingTable, seed: u64) -> Result<Piece> {
    let configs = s.symbols.iter().map(|t| table.resolve(t.symbol, t.generation)).collect::<Result<Vec<_>>>()?;
    for c in &configs {
        c.validate()?;
    }
    let mut sections = Vec::with_capacity(configs.len());
    let mut t = 0.0;
    for (sym, c) in s.symbols.iter().zip(&configs) {
        sections.push(Section { symbol: sym.symbol, generation: sym.generation, start: t, end: t + c.duration });
        t += c.duration;
    }
    let rendered = configs
        .par_iter()
        .zip(sections.par_iter())
        .enumerate()
        .map(|(k, (c, sec))| {
            let mut rng = Rng::derive(seed, k as u64);
            render_section(c, sec.start, (sec.symbol, sec.generation, k as u32), &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut events: Vec<NoteEvent> = rendered.into_iter().flatten().collect();
    sort_events(&mut events);
    truncate_overlaps(&mut events);
    Ok(Piece { events, sections, meta: PieceMeta { seed: Some(seed), config_hash: Some(config_hash(table)), offset: 0.0 } })
}

/// FNV-1a over the table's canonical JSON.
pub fn config_hash(table: &MappingTable) -> String {
    let json = serde_json::to_string(table).unwrap_or_default();
    let mut h: u64 = 0xcbf29ce484222325;
    for b in json.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    format!("{h:016x}")
}

/// Keeps an event only if its key has been silent for at least `min_gap`
/// seconds since the last kept onset on that key. Returns kept and dropped.
pub fn collision_mask(events: &[NoteEvent], min_gap: f64) -> (Vec<NoteEvent>, Vec<NoteEvent>) {
    let mut last: HashMap<u8, f64> = HashMap::new();
    let (mut kept, mut dropped) = (Vec::with_capacity(events.len()), Vec::new());
    for e in events {
        match last.get(&e.pitch) {
            Some(&t) if e.onset - t < min_gap - 1e-9 => dropped.push(*e),
            _ => {
                last.insert(e.pitch, e.onset);
                kept.push(*e);
            }
        }
    }
    (kept, dropped)
}

/// Drops every event closer than 50 ms to the previous kept event on its key.
pub fn apply_collision_mask(p: &Piece) -> Piece {
    let mut events = p.events.clone();
    sort_events(&mut events);
    let (mut kept, _) = collision_mask(&events, MIN_KEY_IOI);
    truncate_overlaps(&mut kept);
    Piece { events: kept, ..p.clone() }
}

/// Pitch/velocity/IOI regime for the stochastic voice around a switch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CpDiscreteConfig {
    pub query: ConvergenceQuery,
    pub pre: ParameterConfig,
    pub post: ParameterConfig,
    /// The switch fires at the first convergence at or after this time.
    pub target: f64,
}

impl CpDiscreteConfig {
    /// 3:4 canon (IOIs 1.0 and 0.75 s) plus one Poisson voice: 3 notes/s on a
    /// C-major triad before the switch, 36 notes/s chromatic after, over 30 s.
    pub fn preset() -> Self {
        use crate::mapping::PitchSet;
        let voices = (VoiceSpec::new(3.0, 3.0), VoiceSpec::new(4.0, 3.0));
        Self {
            query: ConvergenceQuery { epsilon: 0.05, horizon: 30.0, voices },
            pre: ParameterConfig {
                ioi: Distribution::exponential(3.0),
                pitch: PitchLaw::Set(PitchSet::new(&[0, 4, 7], 48, 72)),
                velocity: Distribution::uniform(500.0, 700.0),
                ratios: vec![1.0],
                duration: 15.0,
            },
            post: ParameterConfig {
                ioi: Distribution::exponential(36.0),
                pitch: PitchLaw::Set(PitchSet::chromatic(36, 96)),
                velocity: Distribution::uniform(100.0, 1000.0),
                ratios: vec![1.0],
                duration: 15.0,
            },
            target: 15.0,
        }
    }
}

/// Canon voices 0 and 1 plus a stochastic voice 2 whose regime switches at a
/// convergence. When no convergence reaches the target, the pre regime runs to
/// the horizon and the trigger is `None`.
pub fn generate_cp_discrete(cfg: &CpDiscreteConfig, seed: u64) -> Result<(Piece, Option<ConvergenceEvent>)> {
    let horizon = cfg.query.horizon;
    let trigger = find_convergences(&cfg.query)?.into_iter().find(|e| e.time >= cfg.target && e.time < horizon);
    let cut = trigger.map_or(horizon, |e| e.time);
    let mut rng = Rng::derive(seed, 0);
    let mut events = Vec::new();
    let regime = |t: f64| if t < cut { (&cfg.pre, 'A', 0u32) } else { (&cfg.post, 'B', 1u32) };

    for (voice, spec) in [cfg.query.voices.0, cfg.query.voices.1].iter().enumerate() {
        for t in spec.onsets_until(horizon).into_iter().filter(|&t| t < horizon) {
            let (c, symbol, section) = regime(t);
            events.push(NoteEvent {
                onset: round_us(t),
                pitch: c.pitch.sample(&mut rng)?,
                velocity: clamp_velocity(c.velocity.sample(&mut rng)?),
                duration: spec.ioi(),
                voice: voice as u32,
                symbol,
                generation: 0,
                section,
            });
        }
    }
    let mut spans = vec![(&cfg.pre, 0.0, cut, 'A', 0u32)];
    if cut < horizon {
        spans.push((&cfg.post, cut, horizon, 'B', 1));
    }
    let mut sections = Vec::new();
    for (c, start, end, symbol, section) in spans {
        sections.push(Section { symbol, generation: 0, start, end });
        let ratio = c.ratios.first().copied().unwrap_or(1.0);
        for (t, tau) in voice_onsets(&c.ioi, ratio, start, end, &mut rng)? {
            events.push(NoteEvent {
                onset: round_us(t),
                pitch: c.pitch.sample(&mut rng)?,
                velocity: clamp_velocity(c.velocity.sample(&mut rng)?),
                duration: tau,
                voice: 2,
                symbol,
                generation: 0,
                section,
            });
        }
    }
    sort_events(&mut events);
    truncate_overlaps(&mut events);
    Ok((Piece { events, sections, meta: PieceMeta { seed: Some(seed), ..Default::default() } }, trigger))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CpContinuousConfig {
    pub voices: (VoiceSpec, VoiceSpec),
    pub rate: RateFunction,
    pub horizon: f64,
    pub pitch: PitchLaw,
    pub velocity: Distribution,
}

impl CpContinuousConfig {
    /// e:π canon with unit base IOI plus a thinned voice at
    /// `λ(t) = 5 + 40·|t − 15| / 15` over 30 s.
    pub fn preset() -> Self {
        use crate::mapping::PitchSet;
        Self {
            voices: (VoiceSpec::new(std::f64::consts::E, 1.0), VoiceSpec::new(std::f64::consts::PI, 1.0)),
            rate: RateFunction::Valley { base: 5.0, slope: 40.0, center: 15.0 },
            horizon: 30.0,
            pitch: PitchLaw::Set(PitchSet::chromatic(36, 96)),
            velocity: Distribution::uniform(200.0, 900.0),
        }
    }
}

/// Canon voices 0 and 1 on their grids; voice 2 thinned against the rate peak.
pub fn generate_cp_continuous(cfg: &CpContinuousConfig, seed: u64) -> Result<Piece> {
    let mut rng = Rng::derive(seed, 0);
    let mut events = Vec::new();
    for (voice, spec) in [cfg.voices.0, cfg.voices.1].iter().enumerate() {
        for t in spec.onsets_until(cfg.horizon).into_iter().filter(|&t| t < cfg.horizon) {
            events.push(NoteEvent {
                onset: round_us(t),
                pitch: cfg.pitch.sample(&mut rng)?,
                velocity: clamp_velocity(cfg.velocity.sample(&mut rng)?),
                duration: spec.ioi(),
                voice: voice as u32,
                symbol: 'C',
                generation: 0,
                section: 0,
            });
        }
    }
    let law = Distribution::inhomogeneous(cfg.rate.clone(), cfg.horizon);
    let onsets = sample_ioi_stream(&law, cfg.horizon, &mut rng)?;
    for (k, &t) in onsets.iter().enumerate() {
        let next = onsets.get(k + 1).copied().unwrap_or(cfg.horizon);
        events.push(NoteEvent {
            onset: round_us(t),
            pitch: cfg.pitch.sample(&mut rng)?,
            velocity: clamp_velocity(cfg.velocity.sample(&mut rng)?),
            duration: next - t,
            voice: 2,
            symbol: 'C',
            generation: 0,
            section: 0,
        });
    }
    sort_events(&mut events);
    truncate_overlaps(&mut events);
    let sections = vec![Section { symbol: 'C', generation: 0, start: 0.0, end: cfg.horizon }];
    Ok(Piece { events, sections, meta: PieceMeta { seed: Some(seed), ..Default::default() } })
}

/// Event counts per window of width `window` over `[0, horizon)`.
pub fn window_counts(onsets: impl IntoIterator<Item = f64>, window: f64, horizon: f64) -> Vec<f64> {
    let n = (horizon / window).round() as usize;
    let mut counts = vec![0.0; n];
    for t in onsets {
        if t >= 0.0 && t < horizon {
            counts[((t / window) as usize).min(n - 1)] += 1.0;
        }
    }
    counts
}

/// Textures no single performer can produce.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BeyondHuman {
    /// `size` distinct pitches spread evenly over the keyboard every `period` seconds.
    Polyphony { size: usize, period: f64, chords: usize },
    /// Round-robin alternation over `keys` at `rate` onsets per second.
    Trill { rate: f64, keys: Vec<u8>, duration: f64 },
    /// `span` consecutive semitones from `start`, one every `ioi` seconds.
    Arpeggio { start: u8, span: usize, ioi: f64 },
}

impl BeyondHuman {
    pub fn polyphony() -> Self {
        BeyondHuman::Polyphony { size: 40, period: 0.5, chords: 20 }
    }
    pub fn trill() -> Self {
        BeyondHuman::Trill { rate: 30.0, keys: vec![60, 61], duration: 5.0 }
    }
    pub fn arpeggio() -> Self {
        BeyondHuman::Arpeggio { start: 24, span: 72, ioi: 0.025 }
    }
}

/// Exact, deterministic renders; requests that break the per-key rate or the
/// keyboard range are refused.
pub fn generate_beyond_human(kind: &BeyondHuman) -> Result<Piece> {
    let max_key_rate = 1.0 / MIN_KEY_IOI;
    let mut events = Vec::new();
    match kind {
        BeyondHuman::Polyphony { size, period, chords } => {
            if *size == 0 || *size > 88 {
                return Err(Error::Infeasible(format!("polyphony: {size} notes exceeds the 88 keys")));
            }
            if *period < MIN_KEY_IOI {
                return Err(Error::Infeasible(format!("per-key rate: chord period {period} s is below 50 ms")));
            }
            for c in 0..*chords {
                for k in 0..*size {
                    let pitch = if *size == 1 { 21 } else { 21 + ((k * 87) as f64 / (*size - 1) as f64).round() as u8 };
                    events.push(NoteEvent::new(c as f64 * period, pitch, 700, 0.5 * period).in_voice(k as u32));
                }
            }
        }
        BeyondHuman::Trill { rate, keys, duration } => {
            let per_key = rate / keys.len().max(1) as f64;
            if keys.is_empty() || per_key > max_key_rate + 1e-9 {
                return Err(Error::Infeasible(format!(
                    "per-key rate {per_key:.1} Hz exceeds {max_key_rate:.0} Hz; use at least {} alternating keys",
                    (rate / max_key_rate).ceil()
                )));
            }
            let n = (duration * rate).round() as usize;
            for k in 0..n {
                events.push(NoteEvent::new(k as f64 / rate, keys[k % keys.len()], 600, 1.0 / rate).in_voice((k % keys.len()) as u32));
            }
        }
        BeyondHuman::Arpeggio { start, span, ioi } => {
            if *start as usize + span > 109 || *start < 21 {
                return Err(Error::Infeasible(format!("keyboard range: {span} semitones from {start} leave 21..=108")));
            }
            for k in 0..*span {
                events.push(NoteEvent::new(k as f64 * ioi, start + k as u8, 650, *ioi));
            }
        }
    }
    for e in &mut events {
        e.onset = round_us(e.onset);
    }
    let mut piece = Piece::from_events(events);
    let end = piece.duration();
    piece.sections = vec![Section { symbol: 'X', generation: 0, start: 0.0, end }];
    Ok(piece)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::Grammar;
    use crate::mapping::PitchSet;
    use proptest::prelude::*;
    use crate::stochastic::Rng;
    use std::collections::BTreeMap;

    fn single(ioi: Distribution, ratios: Vec<f64>, duration: f64, velocity: Distribution) -> MappingTable {
        let mut m = BTreeMap::new();
        m.insert('A', ParameterConfig { ioi, pitch: PitchLaw::Set(PitchSet::new(&[0], 60, 60)), velocity, ratios, duration });
        MappingTable::new(m)
    }

    #[test]
    fn deterministic_regime() {
        let t = single(Distribution::constant(0.5), vec![1.0], 2.0, Distribution::constant(500.0));
        let p = generate(&SymbolString::from_chars("A"), &t, 1).unwrap();
        let onsets: Vec<f64> = p.events.iter().map(|e| e.onset).collect();
        assert_eq!(onsets, vec![0.0, 0.5, 1.0, 1.5]);
    }

    #[test]
    fn empty_string() {
        let p = generate(&SymbolString::from_chars(""), &MappingTable::canonical(), 1).unwrap();
        assert!(p.events.is_empty());
    }

    #[test]
    fn unknown_symbol_and_zero_rate() {
        let t = MappingTable::canonical();
        assert!(matches!(generate(&SymbolString::from_chars("AC"), &t, 1), Err(Error::UnknownSymbol('C'))));
        let z = single(Distribution::constant(0.0), vec![1.0], 2.0, Distribution::constant(500.0));
        assert!(matches!(generate(&SymbolString::from_chars("A"), &z, 1), Err(Error::Config(_))));
    }

    #[test]
    fn canonical_render_counts() {
        let s = Grammar::fibonacci().expand(4).unwrap();
        let p = generate(&s, &MappingTable::canonical(), 42).unwrap();
        assert!((4200..=5100).contains(&p.events.len()), "{}", p.events.len());
        assert!((p.duration() - 74.0).abs() < 1e-9);
        for (k, sec) in p.sections.iter().enumerate() {
            let n = p.in_section(k as u32).len() as f64;
            let density = n / (sec.end - sec.start);
            match sec.symbol {
                'A' => assert!((density - 35.0).abs() < 5.0),
                _ => assert!((density - 120.6).abs() < 15.0),
            }
        }
    }

    #[test]
    fn sections_tile_and_contain_events() {
        let s = Grammar::fibonacci().expand(4).unwrap();
        let p = generate(&s, &MappingTable::canonical(), 7).unwrap();
        let mut t = 0.0;
        for sec in &p.sections {
            assert_eq!(sec.start, t);
            t = sec.end;
        }
        for e in &p.events {
            let sec = &p.sections[e.section as usize];
            assert!(e.onset >= sec.start - 1e-9 && e.onset < sec.end);
            assert!(e.duration > 0.0);
        }
        assert!(p.events.windows(2).all(|w| w[0].onset <= w[1].onset));
    }

    #[test]
    fn same_seed_same_bytes() {
        let s = Grammar::fibonacci().expand(4).unwrap();
        let a = generate(&s, &MappingTable::canonical(), 9).unwrap();
        let b = generate(&s, &MappingTable::canonical(), 9).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn collision_examples() {
        let p = Piece::from_events(vec![NoteEvent::new(0.0, 60, 500, 0.1), NoteEvent::new(0.030, 60, 500, 0.1)]);
        assert_eq!(apply_collision_mask(&p).events.len(), 1);
        let p = Piece::from_events(vec![NoteEvent::new(0.0, 60, 500, 0.1), NoteEvent::new(0.060, 60, 500, 0.1)]);
        assert_eq!(apply_collision_mask(&p).events.len(), 2);
    }

    fn per_key_ok(events: &[NoteEvent]) -> bool {
        for (i, a) in events.iter().enumerate() {
            for b in &events[i + 1..] {
                if a.pitch == b.pitch && (b.onset - a.onset).abs() < MIN_KEY_IOI - 1e-9 {
                    return false;
                }
            }
        }
        true
    }

    #[test]
    fn dense_stream_is_masked_exhaustively() {
        let mut rng = Rng::new(5);
        let on = sample_ioi_stream(&Distribution::exponential(200.0), 5.0, &mut rng).unwrap();
        let events: Vec<NoteEvent> = on.iter().map(|&t| NoteEvent::new(t, 60 + rng.index(12) as u8, 500, 0.01)).collect();
        let masked = apply_collision_mask(&Piece::from_events(events));
        assert!(per_key_ok(&masked.events));
    }

    #[test]
    fn cp_discrete_switches_at_fifteen() {
        let (p, trig) = generate_cp_discrete(&CpDiscreteConfig::preset(), 3).unwrap();
        assert_eq!(trig.unwrap().time, 15.0);
        let pre = window_counts(p.events.iter().filter(|e| e.onset < 15.0).map(|e| e.onset), 1.0, 30.0);
        let post = window_counts(p.events.iter().filter(|e| e.onset >= 15.0).map(|e| e.onset), 1.0, 30.0);
        let pre_rate: f64 = pre[..15].iter().sum::<f64>() / 15.0;
        let post_rate: f64 = post[15..].iter().sum::<f64>() / 15.0;
        assert!(post_rate / pre_rate > 4.0, "{pre_rate} {post_rate}");
    }

    #[test]
    fn cp_discrete_without_convergence() {
        let mut cfg = CpDiscreteConfig::preset();
        cfg.target = 40.0;
        let (p, trig) = generate_cp_discrete(&cfg, 3).unwrap();
        assert!(trig.is_none());
        assert_eq!(p.sections.len(), 1);
    }

    #[test]
    fn cp_continuous_density_follows_rate() {
        let cfg = CpContinuousConfig::preset();
        let p = generate_cp_continuous(&cfg, 11).unwrap();
        let dens = window_counts(p.voice(2).iter().map(|e| e.onset), 1.0, 30.0);
        let lambda: Vec<f64> = (0..30).map(|k| cfg.rate.rate_at(k as f64 + 0.5)).collect();
        assert!(crate::stats::pearson(&lambda, &dens).unwrap() > 0.8);
    }

    #[test]
    fn beyond_human_presets() {
        let p = generate_beyond_human(&BeyondHuman::polyphony()).unwrap();
        for c in 0..20 {
            let t = c as f64 * 0.5;
            let mut chord: Vec<u8> = p.events.iter().filter(|e| e.onset == t).map(|e| e.pitch).collect();
            chord.dedup();
            assert_eq!(chord.len(), 40);
        }
        let p = generate_beyond_human(&BeyondHuman::trill()).unwrap();
        assert_eq!(p.events.len(), 150);
        assert!(per_key_ok(&p.events));
        let p = generate_beyond_human(&BeyondHuman::arpeggio()).unwrap();
        assert_eq!(p.events.len(), 72);
        assert!(p.events.iter().enumerate().all(|(k, e)| (e.onset - k as f64 * 0.025).abs() < 1e-9));
        let err = generate_beyond_human(&BeyondHuman::Trill { rate: 30.0, keys: vec![60], duration: 1.0 }).unwrap_err();
        assert!(err.to_string().contains("per-key rate"));
    }

    proptest! {
        #[test]
        fn velocities_stay_in_range(mu in -5000.0f64..5000.0, sigma in 0.0f64..5000.0, seed in any::<u64>()) {
            let t = single(Distribution::constant(0.1), vec![1.0, 2.0], 1.0, Distribution::gaussian(mu, sigma));
            let p = generate(&SymbolString::from_chars("AA"), &t, seed).unwrap();
            prop_assert!(p.events.iter().all(|e| e.velocity <= VELOCITY_MAX));
        }

        #[test]
        fn mask_enforces_key_spacing(
            raw in proptest::collection::vec((0.0f64..2.0, 60u8..64), 0..120),
        ) {
            let events = raw.iter().map(|&(t, p)| NoteEvent::new(t, p, 500, 0.01)).collect();
            let masked = apply_collision_mask(&Piece::from_events(events));
            prop_assert!(per_key_ok(&masked.events));
        }
    }
}
