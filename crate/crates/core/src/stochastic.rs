//! Seeded sampling for every distribution the generator and the null models use.
//!
//! The project-wide generator is ChaCha8 (`rand_chacha::ChaCha8Rng`). A master
//! seed plus a stream id selects an independent ChaCha stream, so parallel
//! work never shares state. Gaussian draws use the Ziggurat method from
//! `rand_distr`, exponential draws use `rand_distr::Exp1` scaled by `1/λ`.
//! Reproducibility across implementations is statistical, not bitwise.

use rand::seq::SliceRandom;
use rand::{Rng as _, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Single-owner random state.
#[derive(Debug, Clone)]
pub struct Rng {
    inner: ChaCha8Rng,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self { inner: ChaCha8Rng::seed_from_u64(seed) }
    }

    /// Independent stream `stream` of master seed `seed`.
    pub fn derive(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self { inner }
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    pub fn uniform_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Uniform integer in `[lo, hi]`.
    pub fn int_inclusive(&mut self, lo: i64, hi: i64) -> i64 {
        self.inner.random_range(lo..=hi)
    }

    /// Uniform index in `[0, n)`.
    pub fn index(&mut self, n: usize) -> usize {
        self.inner.random_range(0..n)
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    pub fn standard_exponential(&mut self) -> f64 {
        self.inner.sample(Exp1)
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        items.shuffle(&mut self.inner);
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }
}

/// Time-varying intensity for inhomogeneous Poisson streams.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum RateFunction {
    Constant { rate: f64 },
    /// `base + slope * |t - center| / center`, the V-shaped profile that dips at a
    /// convergence point.
    Valley { base: f64, slope: f64, center: f64 },
    /// Linear interpolation between `(t, rate)` knots, held flat outside them.
    Piecewise { knots: Vec<(f64, f64)> },
}

impl RateFunction {
    pub fn rate_at(&self, t: f64) -> f64 {
        match self {
            RateFunction::Constant { rate } => *rate,
            RateFunction::Valley { base, slope, center } => base + slope * (t - center).abs() / center,
            RateFunction::Piecewise { knots } => {
                let Some(first) = knots.first() else { return 0.0 };
                if t <= first.0 {
                    return first.1;
                }
                for w in knots.windows(2) {
                    let (t0, r0) = w[0];
                    let (t1, r1) = w[1];
                    if t <= t1 {
                        if t1 == t0 {
                            return r1;
                        }
                        return r0 + (r1 - r0) * (t - t0) / (t1 - t0);
                    }
                }
                knots.last().map(|k| k.1).unwrap_or(0.0)
            }
        }
    }

    /// Peak of the rate on `[0, horizon]`.
    pub fn peak_on(&self, horizon: f64) -> f64 {
        match self {
            RateFunction::Constant { rate } => *rate,
            RateFunction::Valley { .. } => self.rate_at(0.0).max(self.rate_at(horizon)),
            RateFunction::Piecewise { knots } => {
                let mut peak = self.rate_at(0.0).max(self.rate_at(horizon));
                for &(t, r) in knots {
                    if (0.0..=horizon).contains(&t) {
                        peak = peak.max(r);
                    }
                }
                peak
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match self {
            RateFunction::Constant { rate } => *rate >= 0.0 && rate.is_finite(),
            RateFunction::Valley { base, slope, center } => *base >= 0.0 && base + slope.min(0.0) >= 0.0 && *center > 0.0,
            RateFunction::Piecewise { knots } => {
                !knots.is_empty()
                    && knots.iter().all(|k| k.1 >= 0.0 && k.1.is_finite())
                    && knots.windows(2).all(|w| w[0].0 <= w[1].0)
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidDistribution(format!("rate function {self:?} is negative or malformed")))
        }
    }
}

/// Sampling regime for one musical parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Distribution {
    Constant { value: f64 },
    Uniform { lo: f64, hi: f64 },
    Gaussian { mu: f64, sigma: f64 },
    Exponential { rate: f64 },
    InhomogeneousPoisson { rate: RateFunction, peak: f64 },
}

impl Distribution {
    pub fn constant(value: f64) -> Self {
        Distribution::Constant { value }
    }
    pub fn uniform(lo: f64, hi: f64) -> Self {
        Distribution::Uniform { lo, hi }
    }
    pub fn gaussian(mu: f64, sigma: f64) -> Self {
        Distribution::Gaussian { mu, sigma }
    }
    pub fn exponential(rate: f64) -> Self {
        Distribution::Exponential { rate }
    }

    /// Inhomogeneous Poisson variant with `peak` taken as the rate maximum on `[0, horizon]`.
    pub fn inhomogeneous(rate: RateFunction, horizon: f64) -> Self {
        let peak = rate.peak_on(horizon);
        Distribution::InhomogeneousPoisson { rate, peak }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Distribution::Constant { .. } => "constant",
            Distribution::Uniform { .. } => "uniform",
            Distribution::Gaussian { .. } => "gaussian",
            Distribution::Exponential { .. } => "exponential",
            Distribution::InhomogeneousPoisson { .. } => "inhomogeneous_poisson",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidDistribution(msg));
        match self {
            Distribution::Constant { value } if !value.is_finite() => bad(format!("constant {value} is not finite")),
            Distribution::Uniform { lo, hi } if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() => {
                bad(format!("uniform bounds [{lo}, {hi}] are not ordered"))
            }
            Distribution::Gaussian { mu, sigma } if !(*sigma >= 0.0) || !mu.is_finite() => {
                bad(format!("gaussian sigma {sigma} must be non-negative"))
            }
            Distribution::Exponential { rate } if !(*rate > 0.0) || !rate.is_finite() => {
                bad(format!("exponential rate {rate} must be positive"))
            }
            Distribution::InhomogeneousPoisson { rate, peak } => {
                rate.validate()?;
                if !(*peak > 0.0) {
                    return bad(format!("peak rate {peak} must be positive"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Analytic mean; `None` for the inhomogeneous variant.
    pub fn mean(&self) -> Option<f64> {
        match self {
            Distribution::Constant { value } => Some(*value),
            Distribution::Uniform { lo, hi } => Some(0.5 * (lo + hi)),
            Distribution::Gaussian { mu, .. } => Some(*mu),
            Distribution::Exponential { rate } => Some(1.0 / rate),
            Distribution::InhomogeneousPoisson { .. } => None,
        }
    }

    /// Multiplies every location/scale parameter by `factor` (`factor > 0`).
    pub fn scaled(&self, factor: f64) -> Self {
        match self {
            Distribution::Constant { value } => Distribution::Constant { value: value * factor },
            Distribution::Uniform { lo, hi } => Distribution::Uniform { lo: lo * factor, hi: hi * factor },
            Distribution::Gaussian { mu, sigma } => Distribution::Gaussian { mu: mu * factor, sigma: sigma * factor },
            Distribution::Exponential { rate } => Distribution::Exponential { rate: rate / factor },
            other => other.clone(),
        }
    }

    /// One draw. The inhomogeneous variant generates event times, not values.
    pub fn sample(&self, rng: &mut Rng) -> Result<f64> {
        Ok(match self {
            Distribution::Constant { value } => *value,
            Distribution::Uniform { lo, hi } => rng.uniform_range(*lo, *hi),
            Distribution::Gaussian { mu, sigma } => mu + sigma * rng.standard_normal(),
            Distribution::Exponential { rate } => rng.standard_exponential() / rate,
            Distribution::InhomogeneousPoisson { .. } => {
                return Err(Error::WrongVariant("inhomogeneous Poisson rates produce onset streams, not single draws"))
            }
        })
    }

    /// Right-continuous CDF. Returns `None` for the inhomogeneous variant.
    pub fn cdf(&self, x: f64) -> Option<f64> {
        Some(match self {
            Distribution::Constant { value } => {
                if x >= *value {
                    1.0
                } else {
                    0.0
                }
            }
            Distribution::Uniform { lo, hi } => {
                if x < *lo {
                    0.0
                } else if x >= *hi {
                    1.0
                } else {
                    (x - lo) / (hi - lo)
                }
            }
            Distribution::Gaussian { mu, sigma } => {
                if *sigma == 0.0 {
                    return Distribution::Constant { value: *mu }.cdf(x);
                }
                0.5 * statrs::function::erf::erfc(-(x - mu) / (sigma * std::f64::consts::SQRT_2))
            }
            Distribution::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    1.0 - (-rate * x).exp()
                }
            }
            Distribution::InhomogeneousPoisson { .. } => return None,
        })
    }

    /// Left limit `P(X < x)`; differs from [`Distribution::cdf`] only at atoms.
    pub fn cdf_left(&self, x: f64) -> Option<f64> {
        match self {
            Distribution::Constant { value } => Some(if x > *value { 1.0 } else { 0.0 }),
            Distribution::Gaussian { mu, sigma } if *sigma == 0.0 => Some(if x > *mu { 1.0 } else { 0.0 }),
            Distribution::Uniform { lo, hi } if lo == hi => Some(if x > *lo { 1.0 } else { 0.0 }),
            _ => self.cdf(x),
        }
    }
}

const MAX_REDRAWS: usize = 1000;

/// Draws a strictly positive inter-onset interval, redrawing non-positive values.
pub fn sample_positive(d: &Distribution, rng: &mut Rng) -> Result<f64> {
    for _ in 0..MAX_REDRAWS {
        let x = d.sample(rng)?;
        if x > 0.0 && x.is_finite() {
            return Ok(x);
        }
    }
    Err(Error::Config(format!("{} IOI distribution never yields a positive interval", d.kind())))
}

/// Onset times in `[0, duration)`.
///
/// Renewal variants start with an onset at 0 and advance by one draw per event.
/// The inhomogeneous variant thins a homogeneous stream of rate `peak`, so its
/// first onset is random.
pub fn sample_ioi_stream(d: &Distribution, duration: f64, rng: &mut Rng) -> Result<Vec<f64>> {
    if !(duration > 0.0) {
        return Err(Error::Argument(format!("duration must be positive, got {duration}")));
    }
    d.validate()?;
    let mut onsets = Vec::new();
    match d {
        Distribution::InhomogeneousPoisson { rate, peak } => {
            let mut t = 0.0;
            loop {
                t += rng.standard_exponential() / peak;
                if t >= duration {
                    break;
                }
                if rng.uniform() * peak <= rate.rate_at(t) {
                    onsets.push(t);
                }
            }
        }
        _ => {
            if d.mean().is_some_and(|m| m <= 0.0) && matches!(d, Distribution::Constant { .. } | Distribution::Uniform { .. }) {
                return Err(Error::Config(format!("{} IOI with non-positive mean never advances", d.kind())));
            }
            let mut t = 0.0;
            while t < duration {
                onsets.push(t);
                t += sample_positive(d, rng)?;
            }
        }
    }
    Ok(onsets)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean(xs: &[f64]) -> f64 {
        xs.iter().sum::<f64>() / xs.len() as f64
    }

    #[test]
    fn constant_is_constant() {
        let mut rng = Rng::new(1);
        let d = Distribution::constant(800.0);
        assert!((0..100).all(|_| d.sample(&mut rng).unwrap() == 800.0));
    }

    #[test]
    fn uniform_mean_and_support() {
        let mut rng = Rng::new(2);
        let d = Distribution::uniform(100.0, 1000.0);
        let xs: Vec<f64> = (0..100_000).map(|_| d.sample(&mut rng).unwrap()).collect();
        assert!(xs.iter().all(|x| (100.0..=1000.0).contains(x)));
        assert!((mean(&xs) - 550.0).abs() < 10.0);
    }

    #[test]
    fn exponential_mean() {
        let mut rng = Rng::new(3);
        let d = Distribution::exponential(40.0);
        let xs: Vec<f64> = (0..100_000).map(|_| d.sample(&mut rng).unwrap()).collect();
        assert!((mean(&xs) - 0.025).abs() < 0.001);
    }

    #[test]
    fn inhomogeneous_sample_is_wrong_variant() {
        let d = Distribution::inhomogeneous(RateFunction::Constant { rate: 5.0 }, 10.0);
        assert!(matches!(d.sample(&mut Rng::new(0)), Err(Error::WrongVariant(_))));
    }

    #[test]
    fn constant_stream_grid() {
        let on = sample_ioi_stream(&Distribution::constant(0.5), 2.0, &mut Rng::new(0)).unwrap();
        assert_eq!(on, vec![0.0, 0.5, 1.0, 1.5]);
    }

    #[test]
    fn stream_rejects_bad_duration() {
        let err = sample_ioi_stream(&Distribution::constant(0.5), 0.0, &mut Rng::new(0));
        assert!(matches!(err, Err(Error::Argument(_))));
    }

    #[test]
    fn zero_constant_ioi_is_config_error() {
        let err = sample_ioi_stream(&Distribution::constant(0.0), 1.0, &mut Rng::new(0));
        assert!(matches!(err, Err(Error::Config(_))));
    }

    #[test]
    fn exponential_stream_count() {
        let on = sample_ioi_stream(&Distribution::exponential(120.6), 8.0, &mut Rng::new(11)).unwrap();
        let expected = 120.6 * 8.0;
        assert!((on.len() as f64 - expected).abs() < 3.0 * expected.sqrt());
        assert!(on.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn valley_stream_count() {
        let rate = RateFunction::Valley { base: 5.0, slope: 40.0, center: 15.0 };
        let d = Distribution::inhomogeneous(rate, 30.0);
        let on = sample_ioi_stream(&d, 30.0, &mut Rng::new(5)).unwrap();
        assert!((on.len() as f64 - 750.0).abs() < 3.0 * 750f64.sqrt());
        assert!(on.iter().all(|t| (0.0..30.0).contains(t)));
    }

    #[test]
    fn derived_streams_differ() {
        let a = Rng::derive(7, 0).next_u64();
        let b = Rng::derive(7, 1).next_u64();
        assert_ne!(a, b);
        assert_eq!(a, Rng::derive(7, 0).next_u64());
    }

    #[test]
    fn serde_literal() {
        let d: Distribution = serde_json::from_str(r#"{"type":"exponential","rate":40.0}"#).unwrap();
        assert_eq!(d, Distribution::exponential(40.0));
    }

    #[test]
    fn validation() {
        assert!(Distribution::uniform(2.0, 1.0).validate().is_err());
        assert!(Distribution::gaussian(0.0, -1.0).validate().is_err());
        assert!(Distribution::exponential(0.0).validate().is_err());
        assert!(Distribution::exponential(1.0).validate().is_ok());
    }
}
