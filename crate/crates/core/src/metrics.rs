//! Coherence, separation and complexity measures over symbol strings and
//! rendered voices.

use std::collections::HashMap;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pipeline::NoteEvent;
use crate::stats;

/// Default span of the log-IOI axis, `ln(10 s / 1 ms)`.
pub const LOG_IOI_RANGE: f64 = 9.210340371976184;
/// Shortest IOI considered when taking logs, seconds.
pub const MIN_IOI: f64 = 1e-3;
/// Longest IOI considered when taking logs, seconds.
pub const MAX_IOI: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Contour {
    Up,
    Down,
    Same,
}

pub fn contour(pitches: &[f64]) -> Vec<Contour> {
    pitches
        .windows(2)
        .map(|w| match w[1].partial_cmp(&w[0]) {
            Some(std::cmp::Ordering::Greater) => Contour::Up,
            Some(std::cmp::Ordering::Less) => Contour::Down,
            _ => Contour::Same,
        })
        .collect()
}

pub fn levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(x != y);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// `1 - lev(contour(x), contour(y)) / max(|x|, |y|)`, normalised by pitch-sequence length.
pub fn melodic_coherence(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() < 2 || y.len() < 2 {
        return Err(Error::UndefinedMetric("melodic coherence needs at least two pitches per sequence".into()));
    }
    let d = levenshtein(&contour(x), &contour(y)) as f64;
    Ok(1.0 - d / x.len().max(y.len()) as f64)
}

/// One minus the two-sample KS distance between IOI samples.
pub fn rhythmic_coherence(x: &[f64], y: &[f64]) -> Result<f64> {
    Ok(1.0 - stats::ks_distance(x, y)?)
}

/// `1 - H(pitch class) / log2 12`, entropy in bits.
pub fn pitch_class_concentration(pitches: &[f64]) -> f64 {
    if pitches.is_empty() {
        return 0.0;
    }
    let hist = pitch_class_histogram(pitches);
    let n: f64 = hist.iter().sum();
    let h: f64 = hist.iter().filter(|&&c| c > 0.0).map(|&c| -(c / n) * (c / n).log2()).sum();
    (1.0 - h / 12f64.log2()).clamp(0.0, 1.0)
}

pub fn pitch_class_histogram(pitches: &[f64]) -> [f64; 12] {
    let mut hist = [0.0; 12];
    for p in pitches {
        hist[(p.round() as i64).rem_euclid(12) as usize] += 1.0;
    }
    hist
}

/// Per-domain marginals of one voice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoiceFeatures {
    pub pitch: Vec<f64>,
    pub velocity: Vec<f64>,
    pub log_ioi: Vec<f64>,
}

impl VoiceFeatures {
    /// Builds features from one voice's events; IOIs are onset gaps in onset
    /// order, clamped to `[MIN_IOI, MAX_IOI]` before taking logs.
    pub fn from_events(events: &[NoteEvent]) -> Result<Self> {
        if events.len() < 2 {
            return Err(Error::UndefinedMetric(format!("voice has {} events, need at least 2", events.len())));
        }
        let mut ev: Vec<&NoteEvent> = events.iter().collect();
        ev.sort_by(|a, b| a.onset.total_cmp(&b.onset));
        let onsets: Vec<f64> = ev.iter().map(|e| e.onset).collect();
        Ok(Self {
            pitch: ev.iter().map(|e| e.pitch as f64).collect(),
            velocity: ev.iter().map(|e| e.velocity as f64).collect(),
            log_ioi: log_iois(&onsets),
        })
    }

    /// Even- (`parity = 0`) or odd-indexed subsample.
    pub fn split(&self, parity: usize) -> Self {
        let pick = |v: &[f64]| v.iter().skip(parity).step_by(2).copied().collect();
        Self { pitch: pick(&self.pitch), velocity: pick(&self.velocity), log_ioi: pick(&self.log_ioi) }
    }
}

pub fn log_iois(onsets: &[f64]) -> Vec<f64> {
    onsets.windows(2).map(|w| (w[1] - w[0]).clamp(MIN_IOI, MAX_IOI).ln()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightVector {
    pub pitch: f64,
    pub velocity: f64,
    pub temporal: f64,
    pub range_pitch: f64,
    pub range_velocity: f64,
    pub range_temporal: f64,
}

impl Default for WeightVector {
    fn default() -> Self {
        Self::new(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0)
    }
}

impl WeightVector {
    pub fn new(pitch: f64, velocity: f64, temporal: f64) -> Self {
        Self { pitch, velocity, temporal, range_pitch: 127.0, range_velocity: 1023.0, range_temporal: LOG_IOI_RANGE }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.pitch, self.velocity, self.temporal]
    }

    pub fn ranges(&self) -> [f64; 3] {
        [self.range_pitch, self.range_velocity, self.range_temporal]
    }
}

/// Wasserstein distances per domain and the three separation scores.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Separation {
    pub w_pitch: f64,
    pub w_velocity: f64,
    pub w_temporal: f64,
    pub vss: f64,
    pub wvss: f64,
    pub nwvss: f64,
}

impl Separation {
    pub fn domains(&self) -> [f64; 3] {
        [self.w_pitch, self.w_velocity, self.w_temporal]
    }
}

pub fn separation(a: &VoiceFeatures, b: &VoiceFeatures, w: Option<&WeightVector>) -> Result<Separation> {
    let d = [
        stats::wasserstein1(&a.pitch, &b.pitch)?,
        stats::wasserstein1(&a.velocity, &b.velocity)?,
        stats::wasserstein1(&a.log_ioi, &b.log_ioi)?,
    ];
    let w = w.copied().unwrap_or_default();
    let ws = w.as_array();
    let rs = w.ranges();
    Ok(Separation {
        w_pitch: d[0],
        w_velocity: d[1],
        w_temporal: d[2],
        vss: d.iter().sum::<f64>() / 3.0,
        wvss: (0..3).map(|k| ws[k] * d[k]).sum(),
        nwvss: (0..3).map(|k| ws[k] * d[k] / rs[k]).sum(),
    })
}

/// Separation scores between two voices' events.
pub fn voice_separation(a: &[NoteEvent], b: &[NoteEvent], w: Option<&WeightVector>) -> Result<Separation> {
    separation(&VoiceFeatures::from_events(a)?, &VoiceFeatures::from_events(b)?, w)
}

/// Weights proportional to the mean pairwise Wasserstein distance per domain,
/// optionally dividing each domain by its range first. All-zero separation
/// falls back to uniform weights.
pub fn estimate_weights(voices: &[VoiceFeatures], normalized: bool) -> Result<WeightVector> {
    if voices.len() < 2 {
        return Err(Error::Argument("weight estimation needs at least two voices".into()));
    }
    let mut sums = [0.0; 3];
    let mut pairs = 0.0;
    for i in 0..voices.len() {
        for j in i + 1..voices.len() {
            let s = separation(&voices[i], &voices[j], None)?;
            for (acc, v) in sums.iter_mut().zip(s.domains()) {
                *acc += v;
            }
            pairs += 1.0;
        }
    }
    let base = WeightVector::default();
    let mut m: Vec<f64> = sums.iter().map(|s| s / pairs).collect();
    if normalized {
        for (v, r) in m.iter_mut().zip(base.ranges()) {
            *v /= r;
        }
    }
    let total: f64 = m.iter().sum();
    if total <= 0.0 {
        return Ok(base);
    }
    Ok(WeightVector::new(m[0] / total, m[1] / total, m[2] / total))
}

/// Mean over aligned windows (where both voices sound) of one minus the cosine
/// similarity of pitch-class histograms.
pub fn pcs_distance(a: &[NoteEvent], b: &[NoteEvent], window: f64) -> Result<f64> {
    if !(window > 0.0) {
        return Err(Error::Argument(format!("window must be positive, got {window}")));
    }
    let start = a.iter().chain(b).map(|e| e.onset).fold(f64::INFINITY, f64::min);
    let end = a.iter().chain(b).map(|e| e.onset).fold(f64::NEG_INFINITY, f64::max);
    if !start.is_finite() {
        return Err(Error::UndefinedMetric("both voices are empty".into()));
    }
    let n = ((end - start) / window).floor() as usize + 1;
    let bin = |events: &[NoteEvent]| {
        let mut h = vec![[0.0f64; 12]; n];
        for e in events {
            let k = (((e.onset - start) / window) as usize).min(n - 1);
            h[k][(e.pitch % 12) as usize] += 1.0;
        }
        h
    };
    let (ha, hb) = (bin(a), bin(b));
    let mut total = 0.0;
    let mut count = 0;
    for (x, y) in ha.iter().zip(&hb) {
        let nx = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let ny = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if nx == 0.0 || ny == 0.0 {
            continue;
        }
        let dot: f64 = x.iter().zip(y).map(|(p, q)| p * q).sum();
        total += 1.0 - dot / (nx * ny);
        count += 1;
    }
    if count == 0 {
        return Err(Error::UndefinedMetric("no window where both voices sound".into()));
    }
    Ok((total / count as f64).clamp(0.0, 1.0))
}

fn entropy_bits<K: Eq + Hash>(counts: &HashMap<K, usize>, n: f64) -> f64 {
    counts.values().map(|&c| c as f64 / n).map(|p| -p * p.log2()).sum()
}

/// Plug-in mutual information between consecutive symbols, in bits.
pub fn information_rate<T: Eq + Hash + Clone>(s: &[T]) -> Result<f64> {
    if s.len() < 2 {
        return Err(Error::UndefinedMetric("information rate needs at least two symbols".into()));
    }
    let n = (s.len() - 1) as f64;
    let mut prev = HashMap::new();
    let mut next = HashMap::new();
    let mut joint = HashMap::new();
    for w in s.windows(2) {
        *prev.entry(w[0].clone()).or_insert(0) += 1;
        *next.entry(w[1].clone()).or_insert(0) += 1;
        *joint.entry((w[0].clone(), w[1].clone())).or_insert(0) += 1;
    }
    let mi = entropy_bits(&prev, n) + entropy_bits(&next, n) - entropy_bits(&joint, n);
    Ok(mi.max(0.0))
}

/// Lempel-Ziv (1976) phrase count: each phrase is the shortest extension not
/// found anywhere earlier in the sequence (overlap allowed), and a trailing
/// partial phrase counts as one. Kaspar-Schuster scan, O(n²) worst case.
pub fn lz_complexity<T: PartialEq>(s: &[T]) -> usize {
    let n = s.len();
    if n <= 1 {
        return n;
    }
    let (mut i, mut k, mut l, mut c, mut k_max) = (0, 1, 1, 1, 1);
    loop {
        if s[i + k - 1] == s[l + k - 1] {
            k += 1;
            if l + k > n {
                c += 1;
                break;
            }
        } else {
            k_max = k_max.max(k);
            i += 1;
            if i == l {
                c += 1;
                l += k_max;
                if l + 1 > n {
                    break;
                }
                i = 0;
                k = 1;
                k_max = 1;
            } else {
                k = 1;
            }
        }
    }
    c
}

/// Recurrence-based determinism over one triangle of the matrix, main diagonal
/// excluded. Zero when there are no recurrences.
pub fn rqa_determinism<T: PartialEq>(s: &[T], min_line: usize) -> Result<f64> {
    if s.len() < 2 {
        return Err(Error::UndefinedMetric("determinism needs at least two symbols".into()));
    }
    let (mut total, mut on_lines) = (0usize, 0usize);
    for offset in 1..s.len() {
        let mut run = 0;
        for i in 0..s.len() - offset {
            if s[i] == s[i + offset] {
                run += 1;
                total += 1;
            } else {
                if run >= min_line {
                    on_lines += run;
                }
                run = 0;
            }
        }
        if run >= min_line {
            on_lines += run;
        }
    }
    Ok(if total == 0 { 0.0 } else { on_lines as f64 / total as f64 })
}

/// Number of logarithmic IOI bins spanning `[MIN_IOI, MAX_IOI]`.
pub const IOI_BINS: usize = 8;

pub fn ioi_bin(ioi: f64) -> usize {
    let x = (ioi.clamp(MIN_IOI, MAX_IOI) / MIN_IOI).ln() / LOG_IOI_RANGE;
    ((x * IOI_BINS as f64) as usize).min(IOI_BINS - 1)
}

/// Joint `(IOI bin, pitch class)` code per event.
pub fn discretize(iois: &[f64], pitches: &[f64]) -> Vec<u16> {
    iois.iter().zip(pitches).map(|(&t, &p)| (ioi_bin(t) * 12 + (p.round() as i64).rem_euclid(12) as usize) as u16).collect()
}

/// LZ phrases per symbol.
pub fn normalized_lz<T: PartialEq>(s: &[T]) -> Result<f64> {
    if s.is_empty() {
        return Err(Error::UndefinedMetric("normalized LZ of an empty sequence".into()));
    }
    Ok(lz_complexity(s) as f64 / s.len() as f64)
}

/// Optional bundle of every score, for serialisation.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mc: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rc: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pcc: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vss: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wvss: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nwvss: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pcs_distance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub information_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lz_phrases: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub normalized_lz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub det: Option<f64>,
}

impl MetricReport {
    pub fn csv_header() -> &'static str {
        "mc,rc,pcc,vss,wvss,nwvss,pcs_distance,information_rate,lz_phrases,normalized_lz,det"
    }

    pub fn csv_row(&self) -> String {
        let f = |v: Option<f64>| v.map(|x| format!("{x}")).unwrap_or_default();
        [
            f(self.mc),
            f(self.rc),
            f(self.pcc),
            f(self.vss),
            f(self.wvss),
            f(self.nwvss),
            f(self.pcs_distance),
            f(self.information_rate),
            self.lz_phrases.map(|v| v.to_string()).unwrap_or_default(),
            f(self.normalized_lz),
            f(self.det),
        ]
        .join(",")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::Grammar;
    use crate::stochastic::Rng;
    use proptest::prelude::*;

    fn fib(depth: u32) -> Vec<char> {
        Grammar::fibonacci().expand(depth).unwrap().chars()
    }

    fn ev(onset: f64, pitch: u8, velocity: u16) -> NoteEvent {
        NoteEvent::new(onset, pitch, velocity, 0.1)
    }

    /// Exhaustive-history LZ76: extend a phrase while it occurs in the prefix
    /// that ends one symbol before its own end.
    fn lz_oracle(s: &[u8]) -> usize {
        let (mut i, mut c) = (0, 0);
        while i < s.len() {
            let mut l = 1;
            while i + l <= s.len() && s[..i + l - 1].windows(l).any(|w| w == &s[i..i + l]) {
                l += 1;
            }
            c += 1;
            i += l;
        }
        c
    }

    #[test]
    fn mc_examples() {
        assert_eq!(melodic_coherence(&[60.0, 62.0, 61.0], &[60.0, 62.0, 61.0]).unwrap(), 1.0);
        let mc = melodic_coherence(&[60.0, 62.0, 64.0], &[60.0, 58.0, 56.0]).unwrap();
        assert!((mc - 1.0 / 3.0).abs() < 1e-12);
        assert!(melodic_coherence(&[60.0], &[60.0, 61.0]).is_err());
    }

    #[test]
    fn rc_examples() {
        assert_eq!(rhythmic_coherence(&[0.1, 0.2], &[0.1, 0.2]).unwrap(), 1.0);
        assert_eq!(rhythmic_coherence(&[0.1, 0.2], &[0.5, 0.6]).unwrap(), 0.0);
        assert!(rhythmic_coherence(&[], &[0.5]).is_err());
    }

    #[test]
    fn pcc_examples() {
        assert_eq!(pitch_class_concentration(&[60.0; 8]), 1.0);
        let chromatic: Vec<f64> = (60..72).map(f64::from).collect();
        assert!(pitch_class_concentration(&chromatic).abs() < 1e-12);
        let major = [60.0, 62.0, 64.0, 65.0, 67.0, 69.0, 71.0];
        let want = 1.0 - 7f64.log2() / 12f64.log2();
        assert!((pitch_class_concentration(&major) - want).abs() < 1e-12);
        assert!((want - 0.2169).abs() < 1e-4);
    }

    #[test]
    fn separation_examples() {
        let a = vec![ev(0.0, 0, 500), ev(0.5, 2, 500)];
        let b = vec![ev(0.0, 1, 500), ev(0.5, 3, 500)];
        let s = voice_separation(&a, &b, None).unwrap();
        assert!((s.w_pitch - 1.0).abs() < 1e-12);
        assert!((s.vss - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(voice_separation(&a, &a, None).unwrap().vss, 0.0);
        assert!(voice_separation(&a[..1], &b, None).is_err());
        let w = estimate_weights(&[VoiceFeatures::from_events(&a).unwrap(), VoiceFeatures::from_events(&b).unwrap()], false)
            .unwrap();
        assert_eq!((w.pitch, w.velocity, w.temporal), (1.0, 0.0, 0.0));
    }

    #[test]
    fn pcs_examples() {
        let a: Vec<NoteEvent> = (0..10).map(|i| ev(i as f64 * 0.25, 60, 500)).collect();
        let b: Vec<NoteEvent> = (0..10).map(|i| ev(i as f64 * 0.25, 61, 500)).collect();
        assert!(pcs_distance(&a, &a, 1.0).unwrap().abs() < 1e-12);
        assert!((pcs_distance(&a, &b, 1.0).unwrap() - 1.0).abs() < 1e-12);
        assert!(pcs_distance(&a, &b, 0.0).is_err());
    }

    #[test]
    fn pcs_major_vs_chromatic_matches_direct_oracle() {
        let mut rng = Rng::new(4);
        let major = [0, 2, 4, 5, 7, 9, 11];
        let a: Vec<NoteEvent> = (0..200).map(|i| ev(i as f64 * 0.05, 60 + major[rng.index(7)], 500)).collect();
        let b: Vec<NoteEvent> = (0..200).map(|i| ev(i as f64 * 0.05 + 0.01, 48 + rng.index(12) as u8, 500)).collect();
        let got = pcs_distance(&a, &b, 1.0).unwrap();
        let mut acc = 0.0;
        for w in 0..10 {
            let (lo, hi) = (w as f64, w as f64 + 1.0);
            let hist = |v: &[NoteEvent]| {
                let mut h = [0.0; 12];
                v.iter().filter(|e| e.onset >= lo && e.onset < hi).for_each(|e| h[(e.pitch % 12) as usize] += 1.0);
                h
            };
            let (x, y) = (hist(&a), hist(&b));
            let dot: f64 = x.iter().zip(&y).map(|(p, q)| p * q).sum();
            let norm = |h: &[f64; 12]| h.iter().map(|v| v * v).sum::<f64>().sqrt();
            acc += 1.0 - dot / (norm(&x) * norm(&y));
        }
        assert!(got > 0.0 && got < 1.0);
        assert!((got - acc / 10.0).abs() < 1e-12);
    }

    #[test]
    fn information_rate_table() {
        let want = [0.522, 0.344, 0.420, 0.357];
        for (d, w) in (4..=7).zip(want) {
            let ir = information_rate(&fib(d)).unwrap();
            assert!((ir - w).abs() <= 0.001, "depth {d}: {ir}");
        }
        assert_eq!(information_rate(&['A'; 4]).unwrap(), 0.0);
        assert!(information_rate(&['A']).is_err());
    }

    #[test]
    fn lz_table() {
        for (d, w) in (4..=8).zip([5, 6, 7, 8, 9]) {
            assert_eq!(lz_complexity(&fib(d)), w, "depth {d}");
        }
        assert_eq!(lz_complexity(&['A']), 1);
        assert_eq!(lz_complexity::<char>(&[]), 0);
    }

    #[test]
    fn det_table() {
        for (d, w) in [(4, 9.0 / 13.0), (6, 81.0 / 106.0), (8, 602.0 / 771.0)] {
            assert!((rqa_determinism(&fib(d), 2).unwrap() - w).abs() < 1e-12, "depth {d}");
        }
        assert!((rqa_determinism(&fib(4), 2).unwrap() - 0.692).abs() < 0.001);
        assert!((rqa_determinism(&fib(6), 2).unwrap() - 0.764).abs() < 0.001);
        assert!((rqa_determinism(&fib(8), 2).unwrap() - 0.781).abs() < 0.001);
        assert_eq!(rqa_determinism(&[1, 2, 3, 4], 2).unwrap(), 0.0);
    }

    #[test]
    fn normalized_lz_behaviour() {
        let constant = vec![3u16; 2000];
        assert!(normalized_lz(&constant).unwrap() < 0.01);
        let mut rng = Rng::new(3);
        let random: Vec<u16> = (0..89).map(|_| rng.index(12) as u16).collect();
        let lsys: Vec<u16> = Grammar::fibonacci().expand(9).unwrap().chars().iter().map(|&c| c as u16).collect();
        assert!(normalized_lz(&random).unwrap() > normalized_lz(&lsys).unwrap());
    }

    #[test]
    fn ioi_bins_span_range() {
        assert_eq!(ioi_bin(0.0), 0);
        assert_eq!(ioi_bin(1e-3), 0);
        assert_eq!(ioi_bin(10.0), IOI_BINS - 1);
        assert!(ioi_bin(0.05) < ioi_bin(0.5));
    }

    proptest! {
        #[test]
        fn lz_matches_oracle(s in proptest::collection::vec(0u8..4, 1..60)) {
            prop_assert_eq!(lz_complexity(&s), lz_oracle(&s));
        }

        #[test]
        fn bounded_scores(
            x in proptest::collection::vec(0.0f64..127.0, 2..40),
            y in proptest::collection::vec(0.0f64..127.0, 2..40),
        ) {
            let mc = melodic_coherence(&x, &y).unwrap();
            let rc = rhythmic_coherence(&x, &y).unwrap();
            prop_assert!((0.0..=1.0).contains(&mc));
            prop_assert!((0.0..=1.0).contains(&rc));
            prop_assert!((0.0..=1.0).contains(&pitch_class_concentration(&x)));
            prop_assert_eq!(mc, melodic_coherence(&y, &x).unwrap());
            prop_assert_eq!(rc, rhythmic_coherence(&y, &x).unwrap());
            prop_assert_eq!(melodic_coherence(&x, &x).unwrap(), 1.0);
        }

        #[test]
        fn det_in_unit_interval(s in proptest::collection::vec(0u8..3, 2..60)) {
            let d = rqa_determinism(&s, 2).unwrap();
            prop_assert!((0.0..=1.0).contains(&d));
        }

        #[test]
        fn ir_bounded_by_entropy(s in proptest::collection::vec(0u8..4, 2..80)) {
            let ir = information_rate(&s).unwrap();
            let n = (s.len() - 1) as f64;
            let mut prev = HashMap::new();
            for w in s.windows(2) { *prev.entry(w[0]).or_insert(0usize) += 1; }
            prop_assert!(ir >= 0.0);
            prop_assert!(ir <= entropy_bits(&prev, n) + 1e-9);
        }
    }
}
