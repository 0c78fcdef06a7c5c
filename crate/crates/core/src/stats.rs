//! Distances, hypothesis tests, resampling and breakpoint regression used by the
//! experiments. Reference distributions (normal, Student t, chi-squared) come
//! from `statrs`; everything else is computed here.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal, StudentsT};
use statrs::function::beta::beta_reg;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::stochastic::{Distribution, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alternative {
    TwoSided,
    /// First sample tends to be larger.
    Greater,
    /// First sample tends to be smaller.
    Less,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
    pub effect: Option<f64>,
    pub ci: Option<(f64, f64)>,
    pub df: Option<f64>,
}

impl TestResult {
    fn new(statistic: f64, p_value: f64) -> Self {
        Self { statistic, p_value: p_value.clamp(0.0, 1.0), effect: None, ci: None, df: None }
    }
}

fn nonempty(x: &[f64], name: &str) -> Result<()> {
    if x.is_empty() {
        return Err(Error::Argument(format!("{name} sample is empty")));
    }
    Ok(())
}

fn sorted(x: &[f64]) -> Vec<f64> {
    let mut v = x.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Sample variance with `n - 1` denominator.
pub fn variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (x.len() as f64 - 1.0)
}

pub fn std_dev(x: &[f64]) -> f64 {
    variance(x).sqrt()
}

/// Linear-interpolation quantile of sorted data (the common "type 7" rule).
pub fn quantile_sorted(s: &[f64], q: f64) -> f64 {
    if s.len() == 1 {
        return s[0];
    }
    let h = (s.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    s[lo] + (h - lo as f64) * (s[hi] - s[lo])
}

/// Average ranks (1-based), ties receive their midrank.
pub fn ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut r = vec![0.0; x.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && x[idx[j + 1]] == x[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

/// Sizes of tied groups.
fn tie_sizes(x: &[f64]) -> Vec<usize> {
    let s = sorted(x);
    let mut out = Vec::new();
    let mut i = 0;
    while i < s.len() {
        let mut j = i;
        while j + 1 < s.len() && s[j + 1] == s[i] {
            j += 1;
        }
        if j > i {
            out.push(j - i + 1);
        }
        i = j + 1;
    }
    out
}

fn normal_sf(z: f64) -> f64 {
    Normal::standard().sf(z)
}

fn normal_cdf(z: f64) -> f64 {
    Normal::standard().cdf(z)
}

fn student_sf(t: f64, df: f64) -> f64 {
    StudentsT::new(0.0, 1.0, df).map(|d| d.sf(t)).unwrap_or(f64::NAN)
}

fn tail_p(sf_stat: impl Fn(f64) -> f64, stat: f64, alt: Alternative) -> f64 {
    match alt {
        Alternative::TwoSided => (2.0 * sf_stat(stat.abs())).min(1.0),
        Alternative::Greater => sf_stat(stat),
        Alternative::Less => 1.0 - sf_stat(stat),
    }
}

/// Two-sample Kolmogorov-Smirnov distance `sup |F_x - F_y|`.
pub fn ks_distance(x: &[f64], y: &[f64]) -> Result<f64> {
    nonempty(x, "first")?;
    nonempty(y, "second")?;
    let (a, b) = (sorted(x), sorted(y));
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let v = a[i].min(b[j]);
        while i < a.len() && a[i] <= v {
            i += 1;
        }
        while j < b.len() && b[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    Ok(d)
}

/// Asymptotic Kolmogorov tail probability `Q(lambda)`.
fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let k = k as f64;
        let term = 2.0 * (-1f64).powf(k - 1.0) * (-2.0 * k * k * lambda * lambda).exp();
        sum += term;
        if term.abs() < 1e-12 {
            break;
        }
    }
    sum.clamp(0.0, 1.0)
}

/// Two-sample KS test with the asymptotic p-value (Stephens' small-sample
/// adjustment of the effective size).
pub fn ks_two_sample(x: &[f64], y: &[f64]) -> Result<TestResult> {
    let d = ks_distance(x, y)?;
    let (n, m) = (x.len() as f64, y.len() as f64);
    let en = (n * m / (n + m)).sqrt();
    Ok(TestResult::new(d, kolmogorov_q((en + 0.12 + 0.11 / en) * d)))
}

/// One-sample KS distance of `x` against a reference law, checking both sides
/// of every jump so atoms are handled exactly.
pub fn ks_one_sample(x: &[f64], law: &Distribution) -> Result<f64> {
    if law.cdf(0.0).is_none() {
        return Err(Error::WrongVariant("reference law has no CDF"));
    }
    ks_against_step_cdf(x, |v| law.cdf(v).unwrap_or(0.0), |v| law.cdf_left(v).unwrap_or(0.0))
}

/// One-sample KS distance against a CDF given with its left limits, exact for
/// discrete and mixed laws.
///
/// Passing `cdf(v + δ)` and `cdf_left(v - δ)` gives the distance with a
/// horizontal tolerance of `δ`, for samples recorded at finite resolution.
pub fn ks_against_step_cdf(x: &[f64], cdf: impl Fn(f64) -> f64, cdf_left: impl Fn(f64) -> f64) -> Result<f64> {
    nonempty(x, "sample")?;
    let s = sorted(x);
    let n = s.len() as f64;
    let mut d = 0.0f64;
    let mut i = 0;
    while i < s.len() {
        let v = s[i];
        let mut j = i;
        while j < s.len() && s[j] == v {
            j += 1;
        }
        d = d.max(j as f64 / n - cdf(v)).max(cdf_left(v) - i as f64 / n);
        i = j;
    }
    Ok(d)
}

/// One-sample KS distance against an arbitrary continuous CDF.
pub fn ks_against_cdf(x: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    nonempty(x, "sample")?;
    let s = sorted(x);
    let n = s.len() as f64;
    Ok(s.iter().enumerate().fold(0.0f64, |d, (i, &v)| {
        let f = cdf(v);
        d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n)
    }))
}

/// Wasserstein-1 distance between two empirical distributions, the integral of
/// `|F_x - F_y|` over the merged support.
pub fn wasserstein1(x: &[f64], y: &[f64]) -> Result<f64> {
    nonempty(x, "first")?;
    nonempty(y, "second")?;
    let (a, b) = (sorted(x), sorted(y));
    let (n, m) = (a.len() as f64, b.len() as f64);
    let mut all: Vec<f64> = a.iter().chain(b.iter()).copied().collect();
    all.sort_by(f64::total_cmp);
    let (mut i, mut j, mut total) = (0, 0, 0.0);
    for w in all.windows(2) {
        while i < a.len() && a[i] <= w[0] {
            i += 1;
        }
        while j < b.len() && b[j] <= w[0] {
            j += 1;
        }
        total += (i as f64 / n - j as f64 / m).abs() * (w[1] - w[0]);
    }
    Ok(total)
}

/// Two-sided Mann-Whitney U test.
pub fn mann_whitney(x: &[f64], y: &[f64]) -> Result<TestResult> {
    mann_whitney_with(x, y, Alternative::TwoSided)
}

/// Mann-Whitney U for the first sample, with rank-biserial `r = 1 - 2U/(n1 n2)`.
///
/// Exact null distribution (ties included, via doubled midranks) when the
/// combined size is at most 20; otherwise a normal approximation with tie and
/// continuity corrections.
pub fn mann_whitney_with(x: &[f64], y: &[f64], alt: Alternative) -> Result<TestResult> {
    nonempty(x, "first")?;
    nonempty(y, "second")?;
    let (n1, n2) = (x.len(), y.len());
    let n = n1 + n2;
    let pooled: Vec<f64> = x.iter().chain(y.iter()).copied().collect();
    let r = ranks(&pooled);
    let r1: f64 = r[..n1].iter().sum();
    let u = r1 - (n1 * (n1 + 1)) as f64 / 2.0;
    let nn = (n1 * n2) as f64;

    let p = if n <= 20 {
        let doubled: Vec<usize> = r.iter().map(|v| (2.0 * v).round() as usize).collect();
        let max_sum: usize = doubled.iter().sum();
        // ways[k][s]: subsets of size k with doubled-rank sum s
        let mut ways = vec![vec![0f64; max_sum + 1]; n1 + 1];
        ways[0][0] = 1.0;
        for &d in &doubled {
            for k in (1..=n1).rev() {
                for s in (d..=max_sum).rev() {
                    ways[k][s] += ways[k - 1][s - d];
                }
            }
        }
        let total: f64 = ways[n1].iter().sum();
        let obs = (2.0 * r1).round() as i64;
        let centre = (n1 * (n + 1)) as i64;
        let mass = |keep: &dyn Fn(i64) -> bool| {
            ways[n1].iter().enumerate().filter(|(s, _)| keep(*s as i64)).map(|(_, w)| w).sum::<f64>() / total
        };
        match alt {
            Alternative::TwoSided => mass(&|s| (s - centre).abs() >= (obs - centre).abs()),
            Alternative::Greater => mass(&|s| s >= obs),
            Alternative::Less => mass(&|s| s <= obs),
        }
    } else {
        let ties: f64 = tie_sizes(&pooled).iter().map(|&t| (t * t * t - t) as f64).sum();
        let nf = n as f64;
        let var = nn / 12.0 * ((nf + 1.0) - ties / (nf * (nf - 1.0)));
        if var <= 0.0 {
            1.0
        } else {
            let sd = var.sqrt();
            let dev = u - nn / 2.0;
            match alt {
                Alternative::TwoSided => (2.0 * normal_sf((dev.abs() - 0.5).max(0.0) / sd)).min(1.0),
                Alternative::Greater => normal_sf((dev - 0.5) / sd),
                Alternative::Less => normal_cdf((dev + 0.5) / sd),
            }
        }
    };
    let mut res = TestResult::new(u, p);
    res.effect = Some(1.0 - 2.0 * u / nn);
    Ok(res)
}

/// CDF of the noncentral t distribution (Lenth 1989, AS 243).
pub fn noncentral_t_cdf(t: f64, df: f64, delta: f64) -> f64 {
    const ITRMAX: usize = 1000;
    const ERRMAX: f64 = 1e-12;
    let (tt, del, neg) = if t < 0.0 { (-t, -delta, true) } else { (t, delta, false) };
    let x = tt * tt / (tt * tt + df);
    let mut tnc = 0.0;
    if x > 0.0 {
        let lambda = del * del;
        let mut p = 0.5 * (-0.5 * lambda).exp();
        let mut q = (2.0 / std::f64::consts::PI).sqrt() * p * del;
        let mut s = 0.5 - p;
        if s < 1e-7 {
            s = -0.5 * (-0.5 * lambda).exp_m1();
        }
        let mut a = 0.5;
        let b = 0.5 * df;
        let rxb = (1.0 - x).powf(b);
        let albeta = std::f64::consts::PI.sqrt().ln() + ln_gamma(b) - ln_gamma(0.5 + b);
        let mut xodd = beta_reg(a, b, x);
        let mut godd = 2.0 * rxb * (a * x.ln() - albeta).exp();
        let bx = b * x;
        let mut xeven = if bx < f64::EPSILON { bx } else { 1.0 - rxb };
        let mut geven = bx * rxb;
        tnc = p * xodd + q * xeven;
        let mut en = 1.0;
        for _ in 0..ITRMAX {
            a += 1.0;
            xodd -= godd;
            xeven -= geven;
            godd *= x * (a + b - 1.0) / a;
            geven *= x * (a + b - 0.5) / (a + 0.5);
            p *= lambda / (2.0 * en);
            q *= lambda / (2.0 * en + 1.0);
            s -= p;
            en += 1.0;
            tnc += p * xodd + q * xeven;
            if (2.0 * s * (xodd - godd)).abs() <= ERRMAX {
                break;
            }
        }
    }
    tnc += normal_cdf(-del);
    let out = if neg { 1.0 - tnc } else { tnc };
    out.clamp(0.0, 1.0)
}

/// Solves `noncentral_t_cdf(t, df, delta) = target` for `delta` by bisection.
fn invert_noncentrality(t: f64, df: f64, target: f64) -> f64 {
    let span = 10.0 + 2.0 * t.abs();
    let (mut lo, mut hi) = (t - span, t + span);
    // cdf decreases in delta
    while hi - lo > 1e-9 {
        let mid = 0.5 * (lo + hi);
        if noncentral_t_cdf(t, df, mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Pooled-variance t test with Cohen's d.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectSizeTest {
    pub t: f64,
    pub df: f64,
    pub p_value: f64,
    /// Cohen's d with the pooled SD; `None` when the pooled variance is zero.
    pub d: Option<f64>,
    /// d with the plain average of the two SDs as denominator.
    pub d_avg_sd: Option<f64>,
    /// 95% interval for d from the noncentral t distribution.
    pub d_ci: Option<(f64, f64)>,
    /// Set when d cannot be formed (zero pooled variance) or one group is constant.
    pub undefined: bool,
}

pub fn t_test_with_d(x: &[f64], y: &[f64]) -> Result<EffectSizeTest> {
    if x.len() < 2 || y.len() < 2 {
        return Err(Error::Argument("t test needs at least two observations per group".into()));
    }
    let (n1, n2) = (x.len() as f64, y.len() as f64);
    let (v1, v2) = (variance(x), variance(y));
    let df = n1 + n2 - 2.0;
    let pooled = ((n1 - 1.0) * v1 + (n2 - 1.0) * v2) / df;
    let diff = mean(x) - mean(y);
    let scale = (n1 * n2 / (n1 + n2)).sqrt();
    if pooled <= 0.0 {
        return Ok(EffectSizeTest {
            t: f64::NAN,
            df,
            p_value: if diff == 0.0 { 1.0 } else { 0.0 },
            d: None,
            d_avg_sd: None,
            d_ci: None,
            undefined: true,
        });
    }
    let d = diff / pooled.sqrt();
    let t = d * scale;
    let lo = invert_noncentrality(t, df, 0.975) / scale;
    let hi = invert_noncentrality(t, df, 0.025) / scale;
    let avg_sd = 0.5 * (v1.sqrt() + v2.sqrt());
    Ok(EffectSizeTest {
        t,
        df,
        p_value: (2.0 * student_sf(t.abs(), df)).min(1.0),
        d: Some(d),
        d_avg_sd: Some(diff / avg_sd),
        d_ci: Some((lo, hi)),
        undefined: v1 == 0.0 || v2 == 0.0,
    })
}

/// One-sided or two-sided Welch-free pooled t test p-value.
pub fn t_test_p(x: &[f64], y: &[f64], alt: Alternative) -> Result<f64> {
    let r = t_test_with_d(x, y)?;
    if r.t.is_nan() {
        return Ok(r.p_value);
    }
    Ok(tail_p(|s| student_sf(s, r.df), r.t, alt))
}

/// Paired t test on `x - y`; `effect` holds d_z.
pub fn paired_t_test(x: &[f64], y: &[f64]) -> Result<TestResult> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::Argument("paired t test needs equal lengths of at least two".into()));
    }
    let d: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    let sd = std_dev(&d);
    let n = d.len() as f64;
    let m = mean(&d);
    if sd == 0.0 {
        let mut r = TestResult::new(f64::INFINITY * m.signum(), if m == 0.0 { 1.0 } else { 0.0 });
        r.df = Some(n - 1.0);
        return Ok(r);
    }
    let t = m / (sd / n.sqrt());
    let mut r = TestResult::new(t, 2.0 * student_sf(t.abs(), n - 1.0));
    r.df = Some(n - 1.0);
    r.effect = Some(m / sd);
    Ok(r)
}

/// Kruskal-Wallis H with tie correction; `effect` holds eta squared.
pub fn kruskal_wallis(groups: &[Vec<f64>]) -> Result<TestResult> {
    if groups.len() < 2 || groups.iter().any(|g| g.is_empty()) {
        return Err(Error::Argument("Kruskal-Wallis needs at least two non-empty groups".into()));
    }
    let pooled: Vec<f64> = groups.iter().flatten().copied().collect();
    let r = ranks(&pooled);
    let n = pooled.len() as f64;
    let mut offset = 0;
    let mut acc = 0.0;
    for g in groups {
        let s: f64 = r[offset..offset + g.len()].iter().sum();
        acc += s * s / g.len() as f64;
        offset += g.len();
    }
    let h_raw = 12.0 / (n * (n + 1.0)) * acc - 3.0 * (n + 1.0);
    let ties: f64 = tie_sizes(&pooled).iter().map(|&t| (t * t * t - t) as f64).sum();
    let corr = 1.0 - ties / (n * n * n - n);
    let h = if corr > 0.0 { h_raw / corr } else { 0.0 };
    let k = groups.len() as f64;
    let p = ChiSquared::new(k - 1.0).map(|c| c.sf(h)).unwrap_or(f64::NAN);
    let mut res = TestResult::new(h, p);
    res.df = Some(k - 1.0);
    res.effect = Some(((h - k + 1.0) / (n - k)).max(0.0));
    Ok(res)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelationKind {
    Pearson,
    Spearman,
}

/// Pearson coefficient; errors when either side has zero variance.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::Argument("correlation needs equal lengths of at least two".into()));
    }
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedMetric("correlation with a constant series".into()));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    pearson(&ranks(x), &ranks(y))
}

/// Correlation coefficient with its two-sided t-distribution p-value.
pub fn correlation(x: &[f64], y: &[f64], kind: CorrelationKind) -> Result<TestResult> {
    if x.len() < 3 {
        return Err(Error::Argument("correlation test needs at least three pairs".into()));
    }
    let r = match kind {
        CorrelationKind::Pearson => pearson(x, y)?,
        CorrelationKind::Spearman => spearman(x, y)?,
    };
    let df = x.len() as f64 - 2.0;
    let p = if r.abs() >= 1.0 { 0.0 } else { 2.0 * student_sf((r * (df / (1.0 - r * r)).sqrt()).abs(), df) };
    let mut res = TestResult::new(r, p);
    res.df = Some(df);
    Ok(res)
}

/// Percentile bootstrap interval of `statistic` over `b` resamples.
pub fn bootstrap_ci<T: Clone>(
    data: &[T],
    statistic: impl Fn(&[T]) -> f64,
    b: usize,
    level: f64,
    rng: &mut Rng,
) -> Result<(f64, f64)> {
    if b < 100 {
        return Err(Error::Argument(format!("bootstrap needs at least 100 resamples, got {b}")));
    }
    if data.is_empty() {
        return Err(Error::Argument("bootstrap over empty data".into()));
    }
    let mut buf = data.to_vec();
    let mut stats: Vec<f64> = (0..b)
        .map(|_| {
            for slot in buf.iter_mut() {
                *slot = data[rng.index(data.len())].clone();
            }
            statistic(&buf)
        })
        .filter(|v| v.is_finite())
        .collect();
    if stats.is_empty() {
        return Err(Error::UndefinedMetric("bootstrap statistic never finite".into()));
    }
    stats.sort_by(f64::total_cmp);
    let tail = (1.0 - level) / 2.0;
    Ok((quantile_sorted(&stats, tail), quantile_sorted(&stats, 1.0 - tail)))
}

/// Monte-Carlo p-value `(1 + #extreme) / (trials + 1)` from precomputed null values.
pub fn permutation_p(observed: f64, null: &[f64], alt: Alternative) -> f64 {
    let hits = null
        .iter()
        .filter(|&&v| match alt {
            Alternative::Greater => v >= observed,
            Alternative::Less => v <= observed,
            Alternative::TwoSided => v.abs() >= observed.abs(),
        })
        .count();
    (1 + hits) as f64 / (null.len() + 1) as f64
}

/// Draws `trials` null statistics from `null` and returns the Monte-Carlo p-value.
pub fn permutation_test(
    observed: f64,
    mut null: impl FnMut(&mut Rng) -> f64,
    trials: usize,
    alt: Alternative,
    rng: &mut Rng,
) -> Result<f64> {
    if trials < 100 {
        return Err(Error::Argument(format!("permutation test needs at least 100 trials, got {trials}")));
    }
    let draws: Vec<f64> = (0..trials).map(|_| null(rng)).collect();
    Ok(permutation_p(observed, &draws, alt))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub sse: f64,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> LineFit {
    let (mx, my) = (mean(x), mean(y));
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let sse = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    LineFit { slope, intercept, sse }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseFit {
    pub breakpoint: f64,
    pub pre: LineFit,
    pub post: LineFit,
    pub r2_piecewise: f64,
    pub r2_linear: f64,
    pub breakpoint_ci: Option<(f64, f64)>,
}

impl PiecewiseFit {
    pub fn slope_ratio(&self) -> f64 {
        self.pre.slope / self.post.slope
    }
}

/// Two independent least-squares lines split at `b`: points with `x < b` on the
/// left, `x >= b` on the right. Candidate `b` values are interior data points
/// and midpoints between neighbours; each side keeps at least two points. The
/// first candidate with the smallest total SSE wins.
pub fn piecewise_fit(x: &[f64], y: &[f64]) -> Result<PiecewiseFit> {
    if x.len() != y.len() {
        return Err(Error::Argument("x and y lengths differ".into()));
    }
    if x.len() < 5 {
        return Err(Error::Argument(format!("piecewise fit needs at least 5 points, got {}", x.len())));
    }
    let mut pts: Vec<(f64, f64)> = x.iter().copied().zip(y.iter().copied()).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let mut candidates = Vec::new();
    for k in 1..xs.len() {
        candidates.push(0.5 * (xs[k - 1] + xs[k]));
        if k < xs.len() - 1 {
            candidates.push(xs[k]);
        }
    }
    let mut best: Option<(f64, LineFit, LineFit)> = None;
    for b in candidates {
        let split = xs.partition_point(|&v| v < b);
        if split < 2 || xs.len() - split < 2 {
            continue;
        }
        let pre = linear_fit(&xs[..split], &ys[..split]);
        let post = linear_fit(&xs[split..], &ys[split..]);
        if best.as_ref().is_none_or(|(_, p, q)| pre.sse + post.sse < p.sse + q.sse - 1e-15) {
            best = Some((b, pre, post));
        }
    }
    let (breakpoint, pre, post) = best.ok_or_else(|| Error::Fit("no admissible breakpoint".into()))?;
    let my = mean(&ys);
    let sst: f64 = ys.iter().map(|v| (v - my).powi(2)).sum();
    let lin = linear_fit(&xs, &ys);
    let r2 = |sse: f64| if sst > 0.0 { 1.0 - sse / sst } else { 1.0 };
    Ok(PiecewiseFit {
        breakpoint,
        pre,
        post,
        r2_piecewise: r2(pre.sse + post.sse),
        r2_linear: r2(lin.sse),
        breakpoint_ci: None,
    })
}

/// Piecewise fit plus a percentile bootstrap interval for the breakpoint, from
/// resampled `(x, y)` pairs.
pub fn piecewise_fit_with_ci(x: &[f64], y: &[f64], b: usize, level: f64, rng: &mut Rng) -> Result<PiecewiseFit> {
    let mut fit = piecewise_fit(x, y)?;
    let pairs: Vec<(f64, f64)> = x.iter().copied().zip(y.iter().copied()).collect();
    let stat = |sample: &[(f64, f64)]| {
        let (sx, sy): (Vec<f64>, Vec<f64>) = sample.iter().copied().unzip();
        piecewise_fit(&sx, &sy).map(|f| f.breakpoint).unwrap_or(f64::NAN)
    };
    fit.breakpoint_ci = Some(bootstrap_ci(&pairs, stat, b, level, rng)?);
    Ok(fit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use crate::stochastic::Rng;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn ks_examples() {
        assert_eq!(ks_distance(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), 0.0);
        assert!(close(ks_distance(&[1.0, 2.0, 3.0], &[1.0, 2.0, 4.0]).unwrap(), 1.0 / 3.0, 1e-12));
        assert_eq!(ks_distance(&[1.0, 2.0], &[5.0, 6.0]).unwrap(), 1.0);
        assert!(ks_distance(&[], &[1.0]).is_err());
        // scipy.stats.ks_2samp statistic
        let d = ks_distance(&[0.1, 0.4, 0.7, 1.3, 2.2, 2.5], &[0.3, 0.9, 1.0, 1.8, 2.9, 3.3, 4.0]).unwrap();
        assert!(close(d, 0.4285714285714286, 1e-12));
    }

    #[test]
    fn ks_one_sample_atoms() {
        let law = Distribution::constant(0.2);
        assert_eq!(ks_one_sample(&[0.2; 10], &law).unwrap(), 0.0);
        assert_eq!(ks_one_sample(&[0.3; 10], &law).unwrap(), 1.0);
        let u = Distribution::uniform(0.0, 1.0);
        assert!(close(ks_one_sample(&[0.5], &u).unwrap(), 0.5, 1e-12));
    }

    #[test]
    fn w1_examples() {
        assert_eq!(wasserstein1(&[0.0], &[1.0]).unwrap(), 1.0);
        assert!(close(wasserstein1(&[0.0, 2.0], &[1.0, 3.0]).unwrap(), 1.0, 1e-12));
        assert_eq!(wasserstein1(&[1.0, 5.0, 2.0], &[1.0, 5.0, 2.0]).unwrap(), 0.0);
    }

    #[test]
    fn mann_whitney_small_exact() {
        let r = mann_whitney(&[1.0, 2.0, 3.0, 4.0, 5.0], &[6.0, 7.0, 8.0]).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert!(close(r.p_value, 2.0 / 56.0, 1e-12));
        assert_eq!(r.effect, Some(1.0));
        // scipy.stats.mannwhitneyu(method="exact")
        let r = mann_whitney(&[1.1, 2.3, 2.9, 4.0, 5.5, 6.1], &[0.2, 1.0, 1.9, 2.2, 3.1]).unwrap();
        assert_eq!(r.statistic, 25.0);
        assert!(close(r.p_value, 0.08225108225108226, 1e-12));
    }

    #[test]
    fn mann_whitney_large_normal() {
        let a: Vec<f64> = (0..30).map(|i| i as f64).collect();
        let b: Vec<f64> = a.iter().map(|v| v + 7.5).collect();
        let r = mann_whitney(&a, &b).unwrap();
        assert_eq!(r.statistic, 253.0);
        assert!(close(r.p_value, 0.003670893392450653, 1e-9));
        let x: Vec<f64> = (0..15).map(|i| i as f64).collect();
        let y: Vec<f64> = (0..15).map(|i| 100.0 + i as f64).collect();
        let r = mann_whitney(&y, &x).unwrap();
        assert_eq!(r.statistic, 225.0);
        assert_eq!(r.effect, Some(-1.0));
    }

    #[test]
    fn mann_whitney_identical_multisets() {
        let r = mann_whitney(&[1.0, 2.0, 3.0, 4.0], &[4.0, 3.0, 2.0, 1.0]).unwrap();
        assert!(close(r.effect.unwrap(), 0.0, 1e-12));
        assert!(close(r.p_value, 1.0, 1e-12));
    }

    #[test]
    fn noncentral_t_matches_scipy() {
        for (t, df, nc, want) in [
            (1.5, 10.0, 0.5, 0.8196538798602222),
            (-2.0, 5.0, 1.0, 0.005896462289842157),
            (14.09, 26.0, 12.0, 0.813261970073289),
            (0.3, 3.0, -0.7, 0.8339304595619624),
        ] {
            let got = noncentral_t_cdf(t, df, nc);
            assert!(close(got, want, 1e-8), "t={t} df={df} nc={nc}: {got} vs {want}");
        }
        assert!(close(noncentral_t_cdf(0.7, 9.0, 0.0), StudentsT::new(0.0, 1.0, 9.0).unwrap().cdf(0.7), 1e-10));
    }

    #[test]
    fn d_interval_matches_scipy_inversion() {
        // targets from scipy.stats.nct with brentq on the noncentrality
        let scale = (13.0f64 * 15.0 / 28.0).sqrt();
        let t = 5.34 * scale;
        let lo = invert_noncentrality(t, 26.0, 0.975) / scale;
        let hi = invert_noncentrality(t, 26.0, 0.025) / scale;
        assert!(close(lo, 3.705417064197, 1e-5), "{lo}");
        assert!(close(hi, 6.951105432064, 1e-5), "{hi}");
        let scale = (8.0f64 * 9.0 / 17.0).sqrt();
        let lo = invert_noncentrality(-1.2 * scale, 15.0, 0.975) / scale;
        assert!(close(lo, -2.2266158452952367, 1e-5));
    }

    #[test]
    fn t_test_matches_scipy() {
        let r = t_test_with_d(&[1.1, 2.3, 2.9, 4.0, 5.5, 6.1], &[0.2, 1.0, 1.9, 2.2, 3.1]).unwrap();
        assert!(close(r.t, 2.0166498874040473, 1e-10));
        assert!(close(r.p_value, 0.07452396593390076, 1e-9));
        assert_eq!(r.df, 9.0);
    }

    #[test]
    fn t_test_degenerate() {
        let r = t_test_with_d(&[1.0, 1.0, 1.0], &[1.0, 1.0]).unwrap();
        assert!(r.undefined && r.d.is_none());
        let r = t_test_with_d(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap();
        let (lo, hi) = r.d_ci.unwrap();
        assert_eq!(r.d, Some(0.0));
        assert!(lo < 0.0 && hi > 0.0);
        let r = t_test_with_d(&[5.0, 5.0, 5.0], &[1.0, 2.0, 3.0]).unwrap();
        assert!(r.undefined && r.d.is_some());
    }

    #[test]
    fn paired_matches_scipy() {
        let r = paired_t_test(&[1.0, 2.0, 3.0, 4.0, 5.5], &[2.0, 1.0, 4.0, 3.0, 6.0]).unwrap();
        assert!(close(r.statistic, -0.21821789023599236, 1e-10));
        assert!(close(r.p_value, 0.8379401873942981, 1e-9));
    }

    #[test]
    fn kruskal_matches_scipy() {
        let g = vec![vec![1.0, 2.0, 3.0, 4.0, 5.0], vec![3.0, 4.0, 5.0, 6.0, 7.0, 8.0], vec![2.0, 2.0, 9.0, 10.0]];
        let r = kruskal_wallis(&g).unwrap();
        assert!(close(r.statistic, 2.889873417721524, 1e-10));
        assert!(close(r.p_value, 0.23576099766580166, 1e-9));
        let same = vec![vec![1.0, 2.0, 3.0], vec![1.0, 2.0, 3.0]];
        assert!(close(kruskal_wallis(&same).unwrap().p_value, 1.0, 1e-9));
    }

    #[test]
    fn kruskal_two_groups_agrees_with_mann_whitney_direction() {
        let x = [1.0, 2.0, 3.5, 4.0, 6.0, 7.0];
        let y = [5.0, 8.0, 9.0, 10.0, 11.0, 12.0];
        let kw = kruskal_wallis(&[x.to_vec(), y.to_vec()]).unwrap();
        let mw = mann_whitney(&x, &y).unwrap();
        assert!(kw.p_value < 0.05 && mw.p_value < 0.05);
        assert!(mw.effect.unwrap() > 0.0);
    }

    #[test]
    fn correlations_match_scipy() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.5];
        let y = [2.0, 1.0, 4.0, 3.0, 6.0];
        let p = correlation(&x, &y, CorrelationKind::Pearson).unwrap();
        assert!(close(p.statistic, 0.8483871429665282, 1e-12));
        assert!(close(p.p_value, 0.06923188246079331, 1e-9));
        let s = correlation(&x, &y, CorrelationKind::Spearman).unwrap();
        assert!(close(s.statistic, 0.8, 1e-12));
        assert!(close(s.p_value, 0.10408803866182788, 1e-9));
    }

    #[test]
    fn correlation_shapes() {
        let x: Vec<f64> = (1..10).map(f64::from).collect();
        let lin: Vec<f64> = x.iter().map(|v| 3.0 * v + 1.0).collect();
        let cube: Vec<f64> = x.iter().map(|v| v.powi(3)).collect();
        assert!(close(pearson(&x, &lin).unwrap(), 1.0, 1e-12));
        assert!(close(spearman(&x, &cube).unwrap(), 1.0, 1e-12));
        assert!(pearson(&x, &cube).unwrap() < 1.0);
        assert!(pearson(&x, &[1.0; 9]).is_err());
    }

    #[test]
    fn bootstrap_constant_and_bracketing() {
        let mut rng = Rng::new(1);
        assert_eq!(bootstrap_ci(&[4.0; 20], mean, 200, 0.95, &mut rng).unwrap(), (4.0, 4.0));
        let data: Vec<f64> = (0..200).map(|_| rng.standard_normal()).collect();
        let (lo, hi) = bootstrap_ci(&data, mean, 10_000, 0.95, &mut rng).unwrap();
        let m = mean(&data);
        assert!(lo < m && m < hi);
        assert!(bootstrap_ci(&data, mean, 50, 0.95, &mut rng).is_err());
    }

    #[test]
    fn permutation_extreme() {
        let null = vec![0.0; 999];
        assert_eq!(permutation_p(5.0, &null, Alternative::Greater), 1.0 / 1000.0);
        let mut rng = Rng::new(2);
        let p = permutation_test(10.0, |r| r.uniform(), 100, Alternative::Greater, &mut rng).unwrap();
        assert_eq!(p, 1.0 / 101.0);
    }

    #[test]
    fn piecewise_recovers_noiseless_break() {
        let x: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|&v| if v < 8.0 { 10.0 - v } else { 2.0 - 0.1 * (v - 8.0) }).collect();
        let f = piecewise_fit(&x, &y).unwrap();
        assert!((f.breakpoint - 8.0).abs() <= 1.0);
        assert!(f.r2_piecewise > 0.999);
    }

    #[test]
    fn piecewise_on_printed_sweep() {
        let x = [10.0, 15.0, 20.0, 25.0, 28.0, 30.0, 40.0, 50.0, 60.0, 80.0, 100.0, 120.0, 150.0, 200.0];
        let y = [1.0, 0.92, 0.78, 0.55, 0.38, 0.25, 0.22, 0.20, 0.18, 0.16, 0.15, 0.14, 0.13, 0.12];
        let f = piecewise_fit(&x, &y).unwrap();
        assert_eq!(f.breakpoint, 29.0);
        // numpy lstsq on the same split
        assert!(close(f.r2_piecewise, 0.9879, 1e-4));
        assert!(close(f.r2_linear, 0.44219, 1e-5));
        assert!(close(f.slope_ratio(), 49.3155, 1e-3));
    }

    #[test]
    fn piecewise_needs_five_points() {
        assert!(piecewise_fit(&[1.0, 2.0, 3.0, 4.0], &[1.0, 2.0, 3.0, 4.0]).is_err());
    }

    #[test]
    fn mann_whitney_null_p_values_are_uniform() {
        let mut rng = Rng::new(9);
        let ps: Vec<f64> = (0..2000)
            .map(|_| {
                let x: Vec<f64> = (0..25).map(|_| rng.standard_normal()).collect();
                let y: Vec<f64> = (0..25).map(|_| rng.standard_normal()).collect();
                mann_whitney(&x, &y).unwrap().p_value
            })
            .collect();
        let d = ks_against_cdf(&ps, |p| p.clamp(0.0, 1.0)).unwrap();
        assert!(d < 0.05, "{d}");
    }

    #[test]
    fn permutation_null_p_values_are_uniform() {
        let mut rng = Rng::new(10);
        let ps: Vec<f64> = (0..2000)
            .map(|_| {
                let obs = rng.uniform();
                permutation_test(obs, |r| r.uniform(), 199, Alternative::Greater, &mut rng).unwrap()
            })
            .collect();
        let d = ks_against_cdf(&ps, |p| p.clamp(0.0, 1.0)).unwrap();
        assert!(d < 0.05, "{d}");
    }

    proptest! {
        #[test]
        fn w1_triangle(
            a in proptest::collection::vec(-100.0f64..100.0, 1..12),
            b in proptest::collection::vec(-100.0f64..100.0, 1..12),
            c in proptest::collection::vec(-100.0f64..100.0, 1..12),
        ) {
            let ab = wasserstein1(&a, &b).unwrap();
            let bc = wasserstein1(&b, &c).unwrap();
            let ac = wasserstein1(&a, &c).unwrap();
            prop_assert!(ac <= ab + bc + 1e-9);
        }

        #[test]
        fn w1_equals_sorted_pairing(
            a in proptest::collection::vec(-50.0f64..50.0, 1..12),
            shift in proptest::collection::vec(-50.0f64..50.0, 12),
        ) {
            let b: Vec<f64> = shift[..a.len()].to_vec();
            let (sa, sb) = (sorted(&a), sorted(&b));
            let pairing = sa.iter().zip(&sb).map(|(x, y)| (x - y).abs()).sum::<f64>() / a.len() as f64;
            prop_assert!((wasserstein1(&a, &b).unwrap() - pairing).abs() < 1e-9);
        }

        #[test]
        fn piecewise_never_worse_than_line(
            y in proptest::collection::vec(-10.0f64..10.0, 5..20),
        ) {
            let x: Vec<f64> = (0..y.len()).map(|i| i as f64).collect();
            let f = piecewise_fit(&x, &y).unwrap();
            prop_assert!(f.pre.sse + f.post.sse <= linear_fit(&x, &y).sse + 1e-9);
        }
    }
}
