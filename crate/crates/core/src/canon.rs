//! Tempo-canon timelines and tolerance-based convergence search.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Upper bound on enumerated onsets per voice, guarding decelerating series
/// whose sum never reaches the horizon.
const MAX_ONSETS: usize = 10_000_000;

fn one() -> f64 {
    1.0
}

/// One canon voice: event `k` starts at `offset + Σ_{j<k} (tau_base / ratio)·alpha^j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VoiceSpec {
    pub ratio: f64,
    pub tau_base: f64,
    #[serde(default = "one")]
    pub alpha: f64,
    #[serde(default)]
    pub offset: f64,
}

impl VoiceSpec {
    pub fn new(ratio: f64, tau_base: f64) -> Self {
        Self { ratio, tau_base, alpha: 1.0, offset: 0.0 }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_offset(mut self, offset: f64) -> Self {
        self.offset = offset;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.ratio > 0.0 && self.tau_base > 0.0 && self.alpha > 0.0) {
            return Err(Error::Argument(format!("voice {self:?} needs positive ratio, tau_base and alpha")));
        }
        Ok(())
    }

    /// Base inter-onset interval `tau_base / ratio`.
    pub fn ioi(&self) -> f64 {
        self.tau_base / self.ratio
    }

    /// Onsets up to and including `until`, in order.
    pub fn onsets_until(&self, until: f64) -> Vec<f64> {
        let mut out = Vec::new();
        let mut t = self.offset;
        let mut step = self.ioi();
        while t <= until && out.len() < MAX_ONSETS {
            out.push(t);
            t += step;
            step *= self.alpha;
            if step < 1e-12 {
                break;
            }
        }
        out
    }
}

/// Onset time of event `k` of voice `v`.
pub fn voice_time(v: &VoiceSpec, k: u64) -> f64 {
    let tau = v.ioi();
    if v.alpha == 1.0 {
        v.offset + k as f64 * tau
    } else {
        v.offset + tau * (1.0 - v.alpha.powf(k as f64)) / (1.0 - v.alpha)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceEvent {
    pub time: f64,
    pub indices: (usize, usize),
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceQuery {
    pub epsilon: f64,
    pub horizon: f64,
    pub voices: (VoiceSpec, VoiceSpec),
}

impl ConvergenceQuery {
    pub fn new(a: VoiceSpec, b: VoiceSpec, epsilon: f64, horizon: f64) -> Self {
        Self { epsilon, horizon, voices: (a, b) }
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }
}

/// Every onset pair closer than `epsilon` whose earlier member lies within the
/// horizon. Candidate times are pair midpoints; pairs whose times fall within
/// `epsilon` of the first member of a run collapse to the minimal-residual pair.
pub fn find_convergences(q: &ConvergenceQuery) -> Result<Vec<ConvergenceEvent>> {
    if !(q.epsilon > 0.0) {
        return Err(Error::Argument(format!("epsilon must be positive, got {}", q.epsilon)));
    }
    if !(q.horizon > 0.0) {
        return Err(Error::Argument(format!("horizon must be positive, got {}", q.horizon)));
    }
    q.voices.0.validate()?;
    q.voices.1.validate()?;
    let a = q.voices.0.onsets_until(q.horizon + q.epsilon);
    let b = q.voices.1.onsets_until(q.horizon + q.epsilon);

    let mut pairs = Vec::new();
    let mut lo = 0;
    for (i, &ta) in a.iter().enumerate() {
        while lo < b.len() && b[lo] <= ta - q.epsilon {
            lo += 1;
        }
        let mut j = lo;
        while j < b.len() && b[j] < ta + q.epsilon {
            let residual = (ta - b[j]).abs();
            if residual < q.epsilon && ta.min(b[j]) <= q.horizon {
                pairs.push(ConvergenceEvent { time: 0.5 * (ta + b[j]), indices: (i, j), residual });
            }
            j += 1;
        }
    }
    pairs.sort_by(|x, y| x.time.total_cmp(&y.time));

    let mut events: Vec<ConvergenceEvent> = Vec::new();
    let mut run_start = f64::NEG_INFINITY;
    for p in pairs {
        match events.last_mut() {
            Some(best) if p.time - run_start < q.epsilon => {
                if p.residual < best.residual {
                    *best = p;
                }
            }
            _ => {
                run_start = p.time;
                events.push(p);
            }
        }
    }
    Ok(events)
}

/// First convergence strictly after `t`, if any lies within the horizon.
pub fn next_convergence_after(q: &ConvergenceQuery, t: f64) -> Result<Option<ConvergenceEvent>> {
    Ok(find_convergences(q)?.into_iter().find(|e| e.time > t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{E, PI};

    fn three_four(eps: f64) -> ConvergenceQuery {
        ConvergenceQuery::new(VoiceSpec::new(3.0, 3.0), VoiceSpec::new(4.0, 3.0), eps, 30.0)
    }

    fn e_pi(eps: f64) -> ConvergenceQuery {
        ConvergenceQuery::new(VoiceSpec::new(E, 1.0), VoiceSpec::new(PI, 1.0), eps, 30.0)
    }

    /// Double loop over every index pair, no merging.
    fn brute_pairs(q: &ConvergenceQuery) -> Vec<(usize, usize, f64)> {
        let a = q.voices.0.onsets_until(q.horizon + q.epsilon);
        let b = q.voices.1.onsets_until(q.horizon + q.epsilon);
        let mut out = Vec::new();
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                if (x - y).abs() < q.epsilon && x.min(*y) <= q.horizon {
                    out.push((i, j, 0.5 * (x + y)));
                }
            }
        }
        out.sort_by(|p, q| p.2.total_cmp(&q.2));
        out
    }

    #[test]
    fn voice_time_examples() {
        assert_eq!(voice_time(&VoiceSpec::new(1.0, 1.0), 3), 3.0);
        assert_eq!(voice_time(&VoiceSpec::new(4.0, 3.0), 4), 3.0);
        assert!((voice_time(&VoiceSpec::new(1.0, 1.0).with_alpha(0.5), 2) - 1.5).abs() < 1e-12);
        assert_eq!(voice_time(&VoiceSpec::new(1.0, 1.0).with_offset(2.0), 1), 3.0);
    }

    #[test]
    fn rational_canon_has_eleven_events() {
        for eps in [0.001, 0.01, 0.02, 0.05, 0.1] {
            let ev = find_convergences(&three_four(eps)).unwrap();
            assert_eq!(ev.len(), 11, "eps {eps}");
            for (k, e) in ev.iter().enumerate() {
                assert!((e.time - 3.0 * k as f64).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn next_after() {
        let q = three_four(0.05);
        assert_eq!(next_convergence_after(&q, 14.0).unwrap().unwrap().time, 15.0);
        assert!(next_convergence_after(&q, 30.0).unwrap().is_none());
    }

    #[test]
    fn first_irrational_event_matches_brute_force() {
        let q = e_pi(0.05);
        let brute = brute_pairs(&q);
        let first = next_convergence_after(&q, 0.0).unwrap().unwrap();
        let (i, j, t) = brute.into_iter().find(|p| p.2 > 0.0).unwrap();
        assert_eq!(first.indices, (i, j));
        assert!((first.time - t).abs() < 1e-12);
    }

    #[test]
    fn irrational_count_grows_with_epsilon() {
        let eps: Vec<f64> = (1..=100).map(|m| m as f64 / 1000.0).collect();
        let counts: Vec<f64> = eps.iter().map(|&e| find_convergences(&e_pi(e)).unwrap().len() as f64).collect();
        assert!(counts.windows(2).all(|w| w[0] <= w[1]));
        let r = crate::stats::pearson(&eps, &counts).unwrap();
        assert!(r > 0.99, "r = {r}");
    }

    #[test]
    fn bad_epsilon() {
        assert!(matches!(find_convergences(&three_four(0.0)), Err(Error::Argument(_))));
    }

    #[test]
    fn accelerating_voices_use_same_search() {
        let q = ConvergenceQuery::new(VoiceSpec::new(1.0, 1.0).with_alpha(0.9), VoiceSpec::new(1.0, 1.0), 0.05, 5.0);
        let ev = find_convergences(&q).unwrap();
        assert_eq!(ev[0].time, 0.0);
        assert!(ev.iter().all(|e| e.residual < 0.05));
    }

    proptest! {
        #[test]
        fn voice_time_increasing(alpha in 0.05f64..=1.0, ratio in 0.1f64..10.0, k in 0u64..200) {
            prop_assume!(alpha.powf(k as f64 + 1.0) > 1e-9);
            let v = VoiceSpec::new(ratio, 1.0).with_alpha(alpha);
            prop_assert!(voice_time(&v, k + 1) > voice_time(&v, k));
        }

        #[test]
        fn irrational_time_sets_nest(e1 in 0.001f64..0.1, e2 in 0.001f64..0.1) {
            let (lo, hi) = if e1 < e2 { (e1, e2) } else { (e2, e1) };
            let small = find_convergences(&e_pi(lo)).unwrap();
            let big = find_convergences(&e_pi(hi)).unwrap();
            for e in small {
                prop_assert!(big.iter().any(|b| b.indices == e.indices));
            }
        }

        #[test]
        fn rational_count_invariant(eps in 0.001f64..0.1) {
            prop_assert_eq!(find_convergences(&three_four(eps)).unwrap().len(), 11);
        }
    }
}
