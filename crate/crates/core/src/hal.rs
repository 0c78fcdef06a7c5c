//! Velocity-dependent latency, onset pre-compensation, the velocity
//! robustness filter, power-law calibration and hardware-limit repair.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pipeline::{collision_mask, sort_events, truncate_overlaps, NoteEvent, Piece};
use crate::stats;
use crate::stochastic::Rng;

pub const V_MAX: f64 = 1023.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LatencyKind {
    Linear,
    Power { c: f64 },
    Log { k: f64 },
}

/// Latency in milliseconds from `l_max` at velocity 0 down to `l_min` at `v_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatencyModel {
    #[serde(flatten)]
    pub kind: LatencyKind,
    pub l_max: f64,
    pub l_min: f64,
    pub v_max: f64,
}

impl LatencyModel {
    pub fn new(kind: LatencyKind) -> Self {
        Self { kind, l_max: 30.0, l_min: 10.0, v_max: V_MAX }
    }
    pub fn linear() -> Self {
        Self::new(LatencyKind::Linear)
    }
    pub fn power(c: f64) -> Self {
        Self::new(LatencyKind::Power { c })
    }
    pub fn log(k: f64) -> Self {
        Self::new(LatencyKind::Log { k })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.l_max > self.l_min && self.l_min > 0.0 && self.v_max > 0.0) {
            return Err(Error::Config(format!("latency bounds {}..{} ms are not ordered and positive", self.l_min, self.l_max)));
        }
        match self.kind {
            LatencyKind::Power { c } if !(c > 0.0 && c < 1.0) => Err(Error::Config(format!("exponent {c} outside (0, 1)"))),
            LatencyKind::Log { k } if !(k > 0.0) => Err(Error::Config(format!("curvature {k} must be positive"))),
            _ => Ok(()),
        }
    }

    /// Shape in `[0, 1]` at normalised velocity `u`.
    fn shape(&self, u: f64) -> f64 {
        match self.kind {
            LatencyKind::Linear => u,
            LatencyKind::Power { c } => u.powf(c),
            LatencyKind::Log { k } => (k * u).ln_1p() / k.ln_1p(),
        }
    }

    /// Latency for any velocity; values outside the range are clamped.
    pub fn at(&self, v: f64) -> f64 {
        let u = (v / self.v_max).clamp(0.0, 1.0);
        self.l_max - (self.l_max - self.l_min) * self.shape(u)
    }

    pub fn exponent(&self) -> Option<f64> {
        match self.kind {
            LatencyKind::Power { c } => Some(c),
            _ => None,
        }
    }
}

/// Latency in ms; rejects velocities outside `[0, v_max]`.
pub fn latency(m: &LatencyModel, v: f64) -> Result<f64> {
    if !(0.0..=m.v_max).contains(&v) {
        return Err(Error::Argument(format!("velocity {v} outside 0..={}", m.v_max)));
    }
    Ok(m.at(v))
}

/// Largest `a(v) - b(v)` over a 0.01-step velocity grid, as `(v, difference)`.
pub fn max_disagreement(a: &LatencyModel, b: &LatencyModel) -> (f64, f64) {
    let steps = (a.v_max * 100.0) as usize;
    (0..=steps)
        .map(|i| {
            let v = i as f64 / 100.0;
            (v, a.at(v) - b.at(v))
        })
        .fold((0.0, f64::NEG_INFINITY), |best, x| if x.1 > best.1 { x } else { best })
}

/// Shifts every onset earlier by its predicted latency and re-sorts.
pub fn precompensate(p: &Piece, m: &LatencyModel) -> Piece {
    let mut events: Vec<NoteEvent> = p.events.iter().map(|e| NoteEvent { onset: e.onset - m.at(e.velocity as f64) / 1000.0, ..*e }).collect();
    sort_events(&mut events);
    Piece { events, ..p.clone() }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterConfig {
    /// Full neighbourhood width in ms, centred on the event.
    pub window_ms: f64,
    /// Compression factor toward the local mean, `0 <= gamma < 1`.
    pub gamma: f64,
    /// Velocity spread (max - min) inside the window that flags an event.
    pub spread_threshold: f64,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self { window_ms: 50.0, gamma: 0.5, spread_threshold: 200.0 }
    }
}

impl FilterConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.window_ms > 0.0) || !(0.0..1.0).contains(&self.gamma) {
            return Err(Error::Config(format!("filter needs window > 0 and 0 <= gamma < 1, got {self:?}")));
        }
        Ok(())
    }
}

/// Index ranges of the ±window/2 neighbourhood of each event in onset-sorted input.
fn neighbourhoods(events: &[NoteEvent], half: f64) -> Vec<(usize, usize)> {
    let (mut lo, mut hi) = (0, 0);
    events
        .iter()
        .map(|e| {
            while events[lo].onset < e.onset - half - 1e-12 {
                lo += 1;
            }
            while hi < events.len() && events[hi].onset <= e.onset + half + 1e-12 {
                hi += 1;
            }
            (lo, hi)
        })
        .collect()
}

/// True when the velocity spread in the event's neighbourhood exceeds the threshold.
pub fn is_latency_sensitive(events: &[NoteEvent], index: usize, f: &FilterConfig) -> bool {
    let e = &events[index];
    let half = f.window_ms / 2000.0;
    let near = events.iter().filter(|x| (x.onset - e.onset).abs() <= half + 1e-12).map(|x| x.velocity as f64);
    let (lo, hi) = near.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    hi - lo > f.spread_threshold
}

/// Compresses flagged velocities toward their neighbourhood mean:
/// `v <- mean + gamma (v - mean)`. Timing is untouched.
pub fn robustness_filter(p: &Piece, f: &FilterConfig) -> Result<Piece> {
    f.validate()?;
    let mut events = p.events.clone();
    sort_events(&mut events);
    let half = f.window_ms / 2000.0;
    let spans = neighbourhoods(&events, half);
    let original: Vec<f64> = events.iter().map(|e| e.velocity as f64).collect();
    for (e, &(lo, hi)) in events.iter_mut().zip(&spans) {
        let near = &original[lo..hi];
        let (min, max) = near.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        if max - min > f.spread_threshold {
            let mean = near.iter().sum::<f64>() / near.len() as f64;
            e.velocity = compress(e.velocity as f64, mean, f.gamma);
        }
    }
    Ok(Piece { events, ..p.clone() })
}

pub fn compress(v: f64, mean: f64, gamma: f64) -> u16 {
    (mean + gamma * (v - mean)).round().clamp(0.0, V_MAX) as u16
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationData {
    /// `(velocity command, measured latency ms)` pairs.
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerFit {
    pub model: LatencyModel,
    pub rmse: f64,
}

/// Least-squares power-law fit `L = a - b·(v/v_max)^c`.
///
/// For each trial `c` the offsets `a, b` have a closed-form least-squares
/// solution (or are pinned to `bounds = (l_min, l_max)`); `c` itself is found
/// by a 0.01 grid followed by golden-section refinement.
pub fn fit_power_law(data: &CalibrationData, bounds: Option<(f64, f64)>) -> Result<PowerFit> {
    let mut distinct: Vec<f64> = data.points.iter().map(|p| p.0).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::Fit(format!("need at least 3 distinct velocities, got {}", distinct.len())));
    }
    if data.points.iter().any(|&(v, l)| !(0.0..=V_MAX).contains(&v) || !(l > 0.0)) {
        return Err(Error::Fit("velocities must lie in 0..=1023 and latencies be positive".into()));
    }
    let eval = |c: f64| -> (f64, f64, f64) {
        let xs: Vec<f64> = data.points.iter().map(|p| (p.0 / V_MAX).powf(c)).collect();
        let ys: Vec<f64> = data.points.iter().map(|p| p.1).collect();
        let (a, b) = match bounds {
            Some((lo, hi)) => (hi, hi - lo),
            None => {
                let line = stats::linear_fit(&xs, &ys);
                (line.intercept, -line.slope)
            }
        };
        let sse: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - (a - b * x)).powi(2)).sum();
        ((sse / ys.len() as f64).sqrt(), a, b)
    };
    let mut best_c = 0.01;
    let mut best = f64::INFINITY;
    for i in 1..100 {
        let c = i as f64 / 100.0;
        let r = eval(c).0;
        if r < best {
            best = r;
            best_c = c;
        }
    }
    let (mut lo, mut hi) = ((best_c - 0.01).max(1e-4), (best_c + 0.01).min(1.0 - 1e-4));
    let g = (5f64.sqrt() - 1.0) / 2.0;
    while hi - lo > 1e-9 {
        let x1 = hi - g * (hi - lo);
        let x2 = lo + g * (hi - lo);
        if eval(x1).0 < eval(x2).0 {
            hi = x2;
        } else {
            lo = x1;
        }
    }
    let c = 0.5 * (lo + hi);
    let (rmse, a, b) = eval(c);
    let model = LatencyModel { kind: LatencyKind::Power { c }, l_max: a, l_min: a - b, v_max: V_MAX };
    Ok(PowerFit { model, rmse })
}

/// Full compensation pass. With calibration data a fitted power law drives the
/// shift and velocities are left alone; without it the linear fallback is used
/// and latency-sensitive velocities are compressed first.
pub fn compensate(p: &Piece, calibration: Option<&CalibrationData>, gamma: f64) -> Result<(Piece, LatencyModel)> {
    match calibration {
        Some(c) => {
            let fit = fit_power_law(c, Some((10.0, 30.0)))?;
            Ok((precompensate(p, &fit.model), fit.model))
        }
        None => {
            let model = LatencyModel::linear();
            let filtered = robustness_filter(p, &FilterConfig { gamma, ..Default::default() })?;
            Ok((precompensate(&filtered, &model), model))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSet {
    pub velocity_max: u16,
    /// Seconds.
    pub min_key_ioi: f64,
    /// `(min, max)` ms.
    pub latency_bounds: (f64, f64),
    pub max_polyphony: usize,
    /// Onsets closer than this many seconds count as simultaneous.
    pub scan_resolution: f64,
}

impl Default for ConstraintSet {
    fn default() -> Self {
        Self { velocity_max: 1023, min_key_ioi: 0.050, latency_bounds: (10.0, 30.0), max_polyphony: 88, scan_resolution: 0.001 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub onset: f64,
    pub pitch: u8,
    pub reason: String,
    pub action: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConstraintReport {
    pub violations: Vec<Violation>,
}

impl ConstraintReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn count(&self, reason: &str) -> usize {
        self.violations.iter().filter(|v| v.reason == reason).count()
    }
}

/// Repairs a piece in a fixed order: velocity clamp, per-key spacing, then the
/// simultaneous-note cap (lowest velocities dropped first). Every change is reported.
pub fn enforce_constraints(p: &Piece, cs: &ConstraintSet) -> (Piece, ConstraintReport) {
    let mut report = ConstraintReport::default();
    let mut events = p.events.clone();
    sort_events(&mut events);
    for e in &mut events {
        if e.velocity > cs.velocity_max {
            report.violations.push(Violation {
                onset: e.onset,
                pitch: e.pitch,
                reason: "velocity range".into(),
                action: format!("clamped {} to {}", e.velocity, cs.velocity_max),
            });
            e.velocity = cs.velocity_max;
        }
    }
    let (kept, dropped) = collision_mask(&events, cs.min_key_ioi);
    for e in dropped {
        report.violations.push(Violation { onset: e.onset, pitch: e.pitch, reason: "per-key rate".into(), action: "dropped".into() });
    }
    let mut out = Vec::with_capacity(kept.len());
    let mut i = 0;
    while i < kept.len() {
        let mut j = i;
        while j < kept.len() && kept[j].onset - kept[i].onset < cs.scan_resolution {
            j += 1;
        }
        let mut group = kept[i..j].to_vec();
        if group.len() > cs.max_polyphony {
            group.sort_by(|a, b| b.velocity.cmp(&a.velocity).then(a.pitch.cmp(&b.pitch)));
            for e in group.drain(cs.max_polyphony..) {
                report.violations.push(Violation { onset: e.onset, pitch: e.pitch, reason: "polyphony".into(), action: "dropped".into() });
            }
        }
        out.extend(group);
        i = j;
    }
    sort_events(&mut out);
    truncate_overlaps(&mut out);
    (Piece { events: out, ..p.clone() }, report)
}

/// Bounded random walk on the exponent of the true latency curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Drift {
    pub step: f64,
    pub bound: f64,
}

/// True instrument: `(1 + scale)(1 + m_i)·L_{c_i}(v) + a_i` with
/// `m_i ~ U(±multiplicative)`, `a_i ~ U(±additive_ms)` and `c_i` drifting
/// around `c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrueLatency {
    pub base: LatencyModel,
    pub scale: f64,
    pub multiplicative: f64,
    pub additive_ms: f64,
    pub drift: Option<Drift>,
}

impl TrueLatency {
    pub fn exact(base: LatencyModel) -> Self {
        Self { base, scale: 0.0, multiplicative: 0.0, additive_ms: 0.0, drift: None }
    }

    pub fn is_deterministic(&self) -> bool {
        self.multiplicative == 0.0 && self.additive_ms == 0.0 && self.drift.is_none()
    }

    /// Realised latencies (ms) for one performance of `velocities`.
    pub fn realise(&self, velocities: &[f64], rng: &mut Rng) -> Vec<f64> {
        let c0 = self.base.exponent();
        let mut offset = 0.0;
        velocities
            .iter()
            .map(|&v| {
                let mut model = self.base;
                if let (Some(c), Some(d)) = (c0, self.drift) {
                    offset = (offset + rng.uniform_range(-d.step, d.step)).clamp(-d.bound, d.bound);
                    model.kind = LatencyKind::Power { c: (c + offset).clamp(0.01, 0.99) };
                }
                let m = if self.multiplicative > 0.0 { rng.uniform_range(-self.multiplicative, self.multiplicative) } else { 0.0 };
                let a = if self.additive_ms > 0.0 { rng.uniform_range(-self.additive_ms, self.additive_ms) } else { 0.0 };
                (1.0 + self.scale) * (1.0 + m) * model.at(v) + a
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MismatchStats {
    /// Per-trial SD (ms) of onset error with no correction.
    pub uncorrected: Vec<f64>,
    /// Per-trial SD (ms) after compensating with the assumed model.
    pub hal: Vec<f64>,
    /// Per-trial SD (ms) after compensating with the realised latencies.
    pub ideal: Vec<f64>,
    /// Paired t test, uncorrected minus HAL; `None` for a single trial.
    pub paired: Option<stats::TestResult>,
}

impl MismatchStats {
    pub fn mean_uncorrected(&self) -> f64 {
        stats::mean(&self.uncorrected)
    }
    pub fn mean_hal(&self) -> f64 {
        stats::mean(&self.hal)
    }
}

fn population_sd(x: &[f64]) -> f64 {
    let m = stats::mean(x);
    (x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / x.len() as f64).sqrt()
}

/// Onset-jitter statistics when `assumed` compensates an instrument that
/// behaves like `truth`. Trials run in parallel on derived streams.
pub fn simulate_mismatch(
    velocities: &[f64],
    assumed: &LatencyModel,
    truth: &TrueLatency,
    trials: usize,
    seed: u64,
) -> Result<MismatchStats> {
    if trials == 0 || velocities.is_empty() {
        return Err(Error::Argument("mismatch simulation needs at least one trial and one note".into()));
    }
    let rows: Vec<(f64, f64, f64)> = (0..trials)
        .into_par_iter()
        .map(|k| {
            let mut rng = Rng::derive(seed, k as u64);
            let actual = truth.realise(velocities, &mut rng);
            let residual: Vec<f64> = actual.iter().zip(velocities).map(|(a, &v)| a - assumed.at(v)).collect();
            (population_sd(&actual), population_sd(&residual), 0.0)
        })
        .collect();
    let uncorrected: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let hal: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let ideal: Vec<f64> = rows.iter().map(|r| r.2).collect();
    let paired = if trials >= 2 { stats::paired_t_test(&uncorrected, &hal).ok() } else { None };
    Ok(MismatchStats { uncorrected, hal, ideal, paired })
}

/// Residual jitter SD (ms) when compensating a `true_c` power law with `assumed_c`.
pub fn residual_jitter(velocities: &[f64], true_c: f64, assumed_c: f64) -> f64 {
    let (t, a) = (LatencyModel::power(true_c), LatencyModel::power(assumed_c));
    let r: Vec<f64> = velocities.iter().map(|&v| t.at(v) - a.at(v)).collect();
    population_sd(&r)
}

/// Onset-error samples (ms) of one filter trial, with and without the filter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterTrial {
    pub plain: Vec<f64>,
    pub filtered: Vec<f64>,
}

/// One performance of `p` on a noisy instrument.
///
/// With `calibration = None` nothing is compensated and the error of each note
/// is its realised latency. With a calibrated model the compensation is
/// computed from the score velocity while the instrument receives the
/// (possibly filtered) velocity, so filtering breaks the match.
pub fn filter_trial(p: &Piece, f: &FilterConfig, truth: &TrueLatency, calibration: Option<&LatencyModel>, rng: &mut Rng) -> Result<FilterTrial> {
    let filtered = robustness_filter(p, f)?;
    let mut score = p.events.clone();
    sort_events(&mut score);
    let sent_plain: Vec<f64> = score.iter().map(|e| e.velocity as f64).collect();
    let sent_filtered: Vec<f64> = filtered.events.iter().map(|e| e.velocity as f64).collect();
    let mut fork = rng.clone();
    let lat_plain = truth.realise(&sent_plain, rng);
    let lat_filtered = truth.realise(&sent_filtered, &mut fork);
    let error = |lat: &[f64]| -> Vec<f64> {
        lat.iter().zip(&sent_plain).map(|(l, &v)| l - calibration.map_or(0.0, |m| m.at(v))).collect()
    };
    Ok(FilterTrial { plain: error(&lat_plain), filtered: error(&lat_filtered) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use crate::stochastic::Rng;

    fn all_models() -> [LatencyModel; 3] {
        [LatencyModel::linear(), LatencyModel::power(0.5), LatencyModel::log(10.0)]
    }

    #[test]
    fn boundaries_and_midpoint() {
        for m in all_models() {
            assert!((latency(&m, 0.0).unwrap() - 30.0).abs() < 1e-12);
            assert!((latency(&m, 1023.0).unwrap() - 10.0).abs() < 1e-12);
        }
        assert!((latency(&LatencyModel::linear(), 511.5).unwrap() - 20.0).abs() < 1e-12);
        assert!(latency(&LatencyModel::linear(), 1024.0).is_err());
    }

    #[test]
    fn linear_vs_sqrt_gap() {
        let (v, d) = max_disagreement(&LatencyModel::linear(), &LatencyModel::power(0.5));
        assert!((d - 5.0).abs() < 1e-6);
        assert!((v - 255.75).abs() < 0.01);
    }

    #[test]
    fn monotone_models() {
        for m in all_models() {
            assert!((0..1023).all(|v| m.at(v as f64 + 1.0) <= m.at(v as f64)));
        }
    }

    #[test]
    fn precompensate_shift() {
        let p = Piece::from_events(vec![NoteEvent::new(1.0, 60, 1023, 0.1)]);
        let q = precompensate(&p, &LatencyModel::linear());
        assert!((q.events[0].onset - 0.990).abs() < 1e-12);
    }

    #[test]
    fn matched_model_leaves_no_residual() {
        let mut rng = Rng::new(1);
        let v: Vec<f64> = (0..526).map(|_| rng.uniform_range(100.0, 1000.0)).collect();
        assert_eq!(residual_jitter(&v, 0.5, 0.5), 0.0);
        let s = simulate_mismatch(&v, &LatencyModel::power(0.5), &TrueLatency::exact(LatencyModel::power(0.5)), 1, 3).unwrap();
        assert_eq!(s.hal[0], 0.0);
        assert!(s.uncorrected[0] > 3.0);
    }

    #[test]
    fn filter_arithmetic() {
        assert_eq!(compress(900.0, 500.0, 0.5), 700);
        assert_eq!(compress(900.0, 500.0, 0.0), 500);
        let p = Piece::from_events(vec![
            NoteEvent::new(0.0, 60, 100, 0.1),
            NoteEvent::new(0.01, 61, 900, 0.1),
            NoteEvent::new(1.0, 62, 900, 0.1),
        ]);
        let f = FilterConfig { gamma: 0.0, ..Default::default() };
        let q = robustness_filter(&p, &f).unwrap();
        assert_eq!(q.events[0].velocity, 500);
        assert_eq!(q.events[1].velocity, 500);
        assert_eq!(q.events[2].velocity, 900);
        assert!(is_latency_sensitive(&p.events, 0, &f));
        assert!(!is_latency_sensitive(&p.events, 2, &f));
        assert!(robustness_filter(&p, &FilterConfig { gamma: 1.0, ..f }).is_err());
    }

    #[test]
    fn fit_recovers_exponent() {
        let truth = LatencyModel::power(0.5);
        let points: Vec<(f64, f64)> = (0..=20).map(|i| i as f64 * 51.15).map(|v| (v, truth.at(v))).collect();
        let fit = fit_power_law(&CalibrationData { points }, None).unwrap();
        assert!((fit.model.exponent().unwrap() - 0.5).abs() < 0.001);
        assert!(fit.rmse < 1e-6);
    }

    #[test]
    fn fit_with_noise_stays_near_half() {
        let truth = LatencyModel::power(0.5);
        let mut rng = Rng::new(8);
        for _ in 0..100 {
            let points: Vec<(f64, f64)> = (0..526)
                .map(|_| {
                    let v = rng.uniform_range(100.0, 1000.0);
                    (v, truth.at(v) + rng.uniform_range(-1.0, 1.0))
                })
                .collect();
            let c = fit_power_law(&CalibrationData { points }, Some((10.0, 30.0))).unwrap().model.exponent().unwrap();
            assert!((0.45..=0.55).contains(&c), "{c}");
        }
    }

    #[test]
    fn fit_visible_mismatch_and_degenerate() {
        let lin = LatencyModel::linear();
        let points: Vec<(f64, f64)> = (0..=10).map(|i| i as f64 * 102.3).map(|v| (v, lin.at(v))).collect();
        assert!(fit_power_law(&CalibrationData { points }, Some((10.0, 30.0))).unwrap().rmse > 0.0);
        let single = CalibrationData { points: vec![(500.0, 20.0); 5] };
        assert!(matches!(fit_power_law(&single, None), Err(Error::Fit(_))));
    }

    #[test]
    fn constraint_examples() {
        let chord: Vec<NoteEvent> = (0..100).map(|k| NoteEvent::new(0.0, k as u8, 100 + k as u16, 0.1)).collect();
        let (p, r) = enforce_constraints(&Piece::from_events(chord), &ConstraintSet::default());
        assert_eq!(p.events.len(), 88);
        assert_eq!(r.count("polyphony"), 12);
        assert!(p.events.iter().all(|e| e.velocity >= 112));

        let legal = Piece::from_events(vec![NoteEvent::new(0.0, 60, 500, 0.1), NoteEvent::new(0.1, 60, 500, 0.1)]);
        let (q, r) = enforce_constraints(&legal, &ConstraintSet::default());
        assert!(r.is_empty());
        assert_eq!(q, legal);

        let loud = Piece::from_events(vec![NoteEvent::new(0.0, 60, 1200, 0.1)]);
        let (q, r) = enforce_constraints(&loud, &ConstraintSet::default());
        assert_eq!(q.events[0].velocity, 1023);
        assert_eq!(r.violations[0].reason, "velocity range");
    }

    #[test]
    fn compensation_beats_scale_error() {
        let mut rng = Rng::new(4);
        let v: Vec<f64> = (0..526).map(|_| rng.uniform_range(100.0, 1000.0)).collect();
        for k in -4..=4 {
            let delta = k as f64 * 0.05;
            let truth = TrueLatency { scale: delta, ..TrueLatency::exact(LatencyModel::power(0.5)) };
            let s = simulate_mismatch(&v, &LatencyModel::power(0.5), &truth, 1, 0).unwrap();
            assert!(s.hal[0] < s.uncorrected[0], "delta {delta}");
        }
    }

    proptest! {
        #[test]
        fn boundaries_hold(c in 0.01f64..0.99, k in 0.01f64..100.0) {
            for m in [LatencyModel::power(c), LatencyModel::log(k)] {
                prop_assert!((m.at(0.0) - 30.0).abs() < 1e-9);
                prop_assert!((m.at(1023.0) - 10.0).abs() < 1e-9);
            }
        }
    }
}
