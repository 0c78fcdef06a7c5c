//! Symbol-to-parameter mapping with geometric depth modulation.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stochastic::{Distribution, Rng};

/// Allowed pitch classes within a register, optionally weighted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PitchSet {
    pub classes: Vec<u8>,
    pub lo: u8,
    pub hi: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

impl PitchSet {
    pub fn new(classes: &[u8], lo: u8, hi: u8) -> Self {
        Self { classes: classes.to_vec(), lo, hi, weights: None }
    }

    /// Normalises `weights` to sum to one.
    pub fn weighted(mut self, weights: &[f64]) -> Self {
        let total: f64 = weights.iter().sum();
        self.weights = Some(weights.iter().map(|w| w / total).collect());
        self
    }

    pub fn c_major(lo: u8, hi: u8) -> Self {
        Self::new(&[0, 2, 4, 5, 7, 9, 11], lo, hi)
    }

    pub fn chromatic(lo: u8, hi: u8) -> Self {
        Self::new(&(0..12).collect::<Vec<u8>>(), lo, hi)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(format!("pitch set: {m}")));
        if self.classes.is_empty() {
            return bad("no pitch classes".into());
        }
        if self.classes.iter().any(|&c| c > 11) {
            return bad(format!("classes {:?} outside 0..=11", self.classes));
        }
        if self.lo > self.hi || self.hi > 127 {
            return bad(format!("register {}..={} is not ordered inside 0..=127", self.lo, self.hi));
        }
        if let Some(w) = &self.weights {
            if w.len() != self.classes.len() || w.iter().any(|&x| x < 0.0) || (w.iter().sum::<f64>() - 1.0).abs() > 1e-6 {
                return bad("weights must be non-negative, one per class, summing to 1".into());
            }
        }
        if !self.classes.iter().any(|&c| self.notes_of(c).next().is_some()) {
            return bad("no allowed class falls inside the register".into());
        }
        Ok(())
    }

    fn notes_of(&self, class: u8) -> impl Iterator<Item = u8> + '_ {
        (self.lo..=self.hi).filter(move |n| n % 12 == class)
    }

    /// Class first (uniform or weighted, restricted to classes present in the
    /// register), then a uniform octave placement inside the register.
    pub fn sample(&self, rng: &mut Rng) -> u8 {
        let feasible: Vec<(u8, f64)> = self
            .classes
            .iter()
            .enumerate()
            .filter(|(_, &c)| self.notes_of(c).next().is_some())
            .map(|(i, &c)| (c, self.weights.as_ref().map_or(1.0, |w| w[i])))
            .collect();
        let total: f64 = feasible.iter().map(|f| f.1).sum();
        let mut u = rng.uniform() * total;
        let mut class = feasible[feasible.len() - 1].0;
        for &(c, w) in &feasible {
            if u < w {
                class = c;
                break;
            }
            u -= w;
        }
        let notes: Vec<u8> = self.notes_of(class).collect();
        notes[rng.index(notes.len())]
    }

    /// Widens (or narrows) the register about its centre by `factor`.
    pub fn scaled_register(&self, factor: f64) -> Self {
        let centre = 0.5 * (self.lo as f64 + self.hi as f64);
        let half = 0.5 * (self.hi as f64 - self.lo as f64) * factor;
        let mut out = self.clone();
        out.lo = (centre - half).round().clamp(0.0, 127.0) as u8;
        out.hi = (centre + half).round().clamp(0.0, 127.0) as u8;
        out
    }
}

/// Pitch regime: a scale set or a numeric distribution over MIDI note numbers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PitchLaw {
    Set(PitchSet),
    Dist(Distribution),
}

impl PitchLaw {
    /// Draws a MIDI pitch, rounded and clamped to `0..=127`.
    pub fn sample(&self, rng: &mut Rng) -> Result<u8> {
        Ok(match self {
            PitchLaw::Set(s) => s.sample(rng),
            PitchLaw::Dist(d) => d.sample(rng)?.round().clamp(0.0, 127.0) as u8,
        })
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            PitchLaw::Set(s) => s.validate(),
            PitchLaw::Dist(d) => d.validate(),
        }
    }

    fn widened(&self, factor: f64) -> Self {
        match self {
            PitchLaw::Set(s) => PitchLaw::Set(s.scaled_register(factor)),
            PitchLaw::Dist(Distribution::Gaussian { mu, sigma }) => {
                PitchLaw::Dist(Distribution::Gaussian { mu: *mu, sigma: sigma * factor })
            }
            PitchLaw::Dist(Distribution::Uniform { lo, hi }) => {
                let (c, h) = (0.5 * (lo + hi), 0.5 * (hi - lo) * factor);
                PitchLaw::Dist(Distribution::Uniform { lo: c - h, hi: c + h })
            }
            other => other.clone(),
        }
    }
}

/// Everything one symbol needs to render a section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterConfig {
    pub ioi: Distribution,
    pub pitch: PitchLaw,
    pub velocity: Distribution,
    /// Tempo ratio per voice; a voice's IOI is a base draw divided by its ratio.
    pub ratios: Vec<f64>,
    /// Section length in seconds.
    pub duration: f64,
}

impl ParameterConfig {
    pub fn validate(&self) -> Result<()> {
        if self.ratios.is_empty() || self.ratios.iter().any(|r| !(*r > 0.0)) {
            return Err(Error::Config(format!("ratios {:?} must be non-empty and positive", self.ratios)));
        }
        if !(self.duration > 0.0) {
            return Err(Error::Config(format!("section duration {} must be positive", self.duration)));
        }
        self.ioi.validate()?;
        self.pitch.validate()?;
        self.velocity.validate()
    }
}

/// Per-generation multipliers: IOI scale is multiplied by `scale_ioi^g`, pitch
/// spread by `scale_pitch^g`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DepthModulation {
    pub scale_ioi: f64,
    pub scale_pitch: f64,
}

impl Default for DepthModulation {
    fn default() -> Self {
        Self { scale_ioi: 0.9, scale_pitch: 1.1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MappingTable {
    pub symbols: BTreeMap<char, ParameterConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulation: Option<DepthModulation>,
}

impl MappingTable {
    pub fn new(symbols: BTreeMap<char, ParameterConfig>) -> Self {
        Self { symbols, modulation: None }
    }

    pub fn with_modulation(mut self, m: DepthModulation) -> Self {
        self.modulation = Some(m);
        self
    }

    /// Two-symbol preset.
    ///
    /// `A`: two voices at 3:4 over a constant 0.2 s base IOI (15 + 20 = 35
    /// notes/s), C-major with the tonic drawn 3/8 of the time in MIDI 48..=84,
    /// constant velocity 800, 10 s sections.
    ///
    /// `B`: two voices at 1:2 over an exponential base IOI of rate 40.2
    /// (40.2 + 80.4 = 120.6 notes/s), all twelve classes over the full keyboard
    /// with the tonic triad weighted 5:1, velocity uniform on [100, 1000], 8 s
    /// sections.
    ///
    /// Depth modulation is off; enable it with [`MappingTable::with_modulation`].
    pub fn canonical() -> Self {
        let mut symbols = BTreeMap::new();
        let mut a_weights = vec![0.625 / 6.0; 7];
        a_weights[0] = 0.375;
        symbols.insert(
            'A',
            ParameterConfig {
                ioi: Distribution::constant(0.2),
                pitch: PitchLaw::Set(PitchSet::c_major(48, 84).weighted(&a_weights)),
                velocity: Distribution::constant(800.0),
                ratios: vec![3.0, 4.0],
                duration: 10.0,
            },
        );
        let b_weights: Vec<f64> = (0..12).map(|c| if [0, 4, 7].contains(&c) { 5.0 } else { 1.0 }).collect();
        symbols.insert(
            'B',
            ParameterConfig {
                ioi: Distribution::exponential(40.2),
                pitch: PitchLaw::Set(PitchSet::chromatic(21, 108).weighted(&b_weights)),
                velocity: Distribution::uniform(100.0, 1000.0),
                ratios: vec![1.0, 2.0],
                duration: 8.0,
            },
        );
        Self::new(symbols)
    }

    pub fn validate(&self) -> Result<()> {
        self.symbols.values().try_for_each(ParameterConfig::validate)
    }

    /// Configuration for symbol `s` at generation `g`.
    pub fn resolve(&self, s: char, g: u32) -> Result<ParameterConfig> {
        let base = self.symbols.get(&s).ok_or(Error::UnknownSymbol(s))?;
        let Some(m) = self.modulation else { return Ok(base.clone()) };
        let mut cfg = base.clone();
        cfg.ioi = base.ioi.scaled(m.scale_ioi.powi(g as i32));
        cfg.pitch = base.pitch.widened(m.scale_pitch.powi(g as i32));
        Ok(cfg)
    }

    /// One line per symbol plus an optional modulation line. [`MappingTable::parse`]
    /// reads it back.
    pub fn describe(&self) -> String {
        let mut out = String::new();
        if let Some(m) = self.modulation {
            let _ = writeln!(out, "modulation ioi={} pitch={}", m.scale_ioi, m.scale_pitch);
        }
        for (s, c) in &self.symbols {
            let ratios = c.ratios.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(":");
            let _ = writeln!(
                out,
                "symbol {s} ioi={} pitch={} velocity={} ratios={ratios} duration={}",
                fmt_dist(&c.ioi),
                fmt_pitch(&c.pitch),
                fmt_dist(&c.velocity),
                c.duration
            );
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut table = Self::new(BTreeMap::new());
        for (ln, line) in text.lines().enumerate() {
            let at = |m: String| Error::Parse { location: format!("line {}", ln + 1), message: m };
            let mut words = line.split_whitespace();
            match words.next() {
                None => continue,
                Some("modulation") => {
                    let f = fields(words).map_err(at)?;
                    let num = |k: &str| f.get(k).ok_or(format!("missing {k}")).and_then(|v| parse_f(v));
                    table.modulation = Some(DepthModulation { scale_ioi: num("ioi").map_err(at)?, scale_pitch: num("pitch").map_err(at)? });
                }
                Some("symbol") => {
                    let sym = words.next().and_then(|w| w.chars().next()).ok_or_else(|| at("missing symbol".into()))?;
                    let f = fields(words).map_err(at)?;
                    let get = |k: &str| f.get(k).copied().ok_or(format!("missing {k}"));
                    let cfg = (|| -> std::result::Result<ParameterConfig, String> {
                        Ok(ParameterConfig {
                            ioi: parse_dist(get("ioi")?)?,
                            pitch: parse_pitch(get("pitch")?)?,
                            velocity: parse_dist(get("velocity")?)?,
                            ratios: get("ratios")?.split(':').map(parse_f).collect::<std::result::Result<_, _>>()?,
                            duration: parse_f(get("duration")?)?,
                        })
                    })()
                    .map_err(at)?;
                    table.symbols.insert(sym, cfg);
                }
                Some(other) => return Err(at(format!("unexpected keyword {other:?}"))),
            }
        }
        Ok(table)
    }
}

fn fields<'a>(words: impl Iterator<Item = &'a str>) -> std::result::Result<BTreeMap<&'a str, &'a str>, String> {
    words.map(|w| w.split_once('=').ok_or(format!("expected key=value, got {w:?}"))).collect()
}

fn parse_f(s: &str) -> std::result::Result<f64, String> {
    s.parse().map_err(|_| format!("bad number {s:?}"))
}

fn args(s: &str, name: &str) -> Option<Vec<String>> {
    let inner = s.strip_prefix(name)?.strip_prefix('(')?.strip_suffix(')')?;
    Some(inner.split(',').map(str::to_string).collect())
}

fn fmt_dist(d: &Distribution) -> String {
    match d {
        Distribution::Constant { value } => format!("constant({value})"),
        Distribution::Uniform { lo, hi } => format!("uniform({lo},{hi})"),
        Distribution::Gaussian { mu, sigma } => format!("gaussian({mu},{sigma})"),
        Distribution::Exponential { rate } => format!("exponential({rate})"),
        other => format!("json{}", serde_json::to_string(other).unwrap_or_default()),
    }
}

fn parse_dist(s: &str) -> std::result::Result<Distribution, String> {
    if let Some(json) = s.strip_prefix("json") {
        return serde_json::from_str(json).map_err(|e| e.to_string());
    }
    let nums = |name: &str, k: usize| -> Option<std::result::Result<Vec<f64>, String>> {
        let a = args(s, name)?;
        if a.len() != k {
            return Some(Err(format!("{name} takes {k} arguments")));
        }
        Some(a.iter().map(|v| parse_f(v)).collect())
    };
    if let Some(v) = nums("constant", 1) {
        return v.map(|v| Distribution::constant(v[0]));
    }
    if let Some(v) = nums("uniform", 2) {
        return v.map(|v| Distribution::uniform(v[0], v[1]));
    }
    if let Some(v) = nums("gaussian", 2) {
        return v.map(|v| Distribution::gaussian(v[0], v[1]));
    }
    if let Some(v) = nums("exponential", 1) {
        return v.map(|v| Distribution::exponential(v[0]));
    }
    Err(format!("unknown distribution {s:?}"))
}

fn fmt_pitch(p: &PitchLaw) -> String {
    match p {
        PitchLaw::Dist(d) => fmt_dist(d),
        PitchLaw::Set(s) => {
            let join = |v: Vec<String>| v.join(",");
            let mut out = format!(
                "set({};{}..{}",
                join(s.classes.iter().map(|c| c.to_string()).collect()),
                s.lo,
                s.hi
            );
            if let Some(w) = &s.weights {
                let _ = write!(out, ";{}", join(w.iter().map(|x| x.to_string()).collect()));
            }
            out.push(')');
            out
        }
    }
}

fn parse_pitch(s: &str) -> std::result::Result<PitchLaw, String> {
    let Some(inner) = s.strip_prefix("set(").and_then(|r| r.strip_suffix(')')) else {
        return parse_dist(s).map(PitchLaw::Dist);
    };
    let parts: Vec<&str> = inner.split(';').collect();
    if parts.len() < 2 || parts.len() > 3 {
        return Err(format!("bad pitch set {s:?}"));
    }
    let classes = parts[0].split(',').map(|c| c.parse::<u8>().map_err(|_| format!("bad class {c:?}"))).collect::<std::result::Result<_, _>>()?;
    let (lo, hi) = parts[1].split_once("..").ok_or(format!("bad register {:?}", parts[1]))?;
    let lo = lo.parse().map_err(|_| format!("bad register {lo:?}"))?;
    let hi = hi.parse().map_err(|_| format!("bad register {hi:?}"))?;
    let weights = match parts.get(2) {
        Some(w) => Some(w.split(',').map(parse_f).collect::<std::result::Result<_, _>>()?),
        None => None,
    };
    Ok(PitchLaw::Set(PitchSet { classes, lo, hi, weights }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::pitch_class_concentration;

    #[test]
    fn canonical_symbols() {
        let t = MappingTable::canonical();
        t.validate().unwrap();
        let a = t.resolve('A', 3).unwrap();
        assert_eq!(a.ratios, vec![3.0, 4.0]);
        assert_eq!(a.velocity, Distribution::constant(800.0));
        assert_eq!(a.duration, 10.0);
        assert!(matches!(a.ioi, Distribution::Constant { .. }));
        let b = t.resolve('B', 0).unwrap();
        assert_eq!(b.ratios, vec![1.0, 2.0]);
        assert_eq!(b.velocity, Distribution::uniform(100.0, 1000.0));
        assert!(matches!(b.ioi, Distribution::Exponential { .. }));
        assert_ne!(a.ioi.kind(), b.ioi.kind());
        assert!(matches!(t.resolve('C', 0), Err(Error::UnknownSymbol('C'))));
    }

    #[test]
    fn aggregate_densities() {
        let t = MappingTable::canonical();
        for (s, want) in [('A', 35.0), ('B', 120.6)] {
            let c = t.resolve(s, 0).unwrap();
            let density: f64 = c.ratios.iter().map(|r| r / c.ioi.mean().unwrap()).sum();
            assert!((density - want).abs() < 1e-9);
        }
    }

    #[test]
    fn identity_modulation() {
        let t = MappingTable::canonical().with_modulation(DepthModulation { scale_ioi: 1.0, scale_pitch: 1.0 });
        for g in 0..6 {
            assert_eq!(t.resolve('B', g).unwrap(), t.resolve('B', 0).unwrap());
        }
    }

    #[test]
    fn deeper_is_denser_and_wider() {
        let t = MappingTable::canonical().with_modulation(DepthModulation::default());
        for s in ['A', 'B'] {
            for g in 0..5 {
                let (x, y) = (t.resolve(s, g).unwrap(), t.resolve(s, g + 1).unwrap());
                assert!(y.ioi.mean().unwrap() < x.ioi.mean().unwrap());
            }
        }
        let PitchLaw::Set(p0) = t.resolve('A', 0).unwrap().pitch else { panic!() };
        let PitchLaw::Set(p3) = t.resolve('A', 3).unwrap().pitch else { panic!() };
        assert!(p3.hi - p3.lo > p0.hi - p0.lo);
    }

    #[test]
    fn describe_round_trip() {
        let mut t = MappingTable::canonical().with_modulation(DepthModulation::default());
        t.symbols.get_mut(&'B').unwrap().pitch = PitchLaw::Dist(Distribution::gaussian(64.0, 7.5));
        let text = t.describe();
        assert!(text.contains("symbol A") && text.contains("exponential"));
        assert_eq!(MappingTable::parse(&text).unwrap(), t);
        let empty = MappingTable::new(BTreeMap::new());
        assert_eq!(empty.describe(), "");
        assert_eq!(MappingTable::parse("").unwrap(), empty);
    }

    #[test]
    fn parse_reports_line() {
        let err = MappingTable::parse("symbol A ioi=constant(0.2)\nbogus").unwrap_err();
        assert!(matches!(err, Error::Parse { ref location, .. } if location == "line 1"));
    }

    #[test]
    fn pitch_set_respects_register_and_classes() {
        let set = PitchSet::c_major(60, 71);
        let mut rng = Rng::new(1);
        for _ in 0..1000 {
            let p = set.sample(&mut rng);
            assert!((60..=71).contains(&p));
            assert!(set.classes.contains(&(p % 12)));
        }
    }

    #[test]
    fn preset_concentrations() {
        let t = MappingTable::canonical();
        let mut rng = Rng::new(2);
        for (s, lo, hi) in [('A', 0.26, 0.31), ('B', 0.11, 0.15)] {
            let law = t.resolve(s, 0).unwrap().pitch;
            let pitches: Vec<f64> = (0..20_000).map(|_| law.sample(&mut rng).unwrap() as f64).collect();
            let ts = pitch_class_concentration(&pitches);
            assert!(ts > lo && ts < hi, "{s}: {ts}");
        }
    }

    #[test]
    fn json_config_round_trip() {
        let t = MappingTable::canonical();
        let json = serde_json::to_string(&t).unwrap();
        assert_eq!(serde_json::from_str::<MappingTable>(&json).unwrap(), t);
    }
}
