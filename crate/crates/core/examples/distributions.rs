//! Sampling regimes: the four IOI families, positive-only draws, stream
//! generation and an inhomogeneous Poisson stream shaped by a rate valley.

use pianola::stats::{ks_one_sample, mean, std_dev};
use pianola::stochastic::{sample_ioi_stream, sample_positive, Distribution, RateFunction, Rng};

fn main() -> pianola::Result<()> {
    let mut rng = Rng::new(42);
    let m = 0.1;
    let laws = [
        Distribution::exponential(1.0 / m),
        Distribution::uniform(0.5 * m, 1.5 * m),
        Distribution::gaussian(m, 0.25 * m),
        Distribution::constant(m),
    ];
    println!("{:<12} {:>8} {:>8} {:>8}", "law", "mean", "sd", "KS");
    for law in &laws {
        let x: Vec<f64> = (0..5000).map(|_| sample_positive(law, &mut rng)).collect::<pianola::Result<_>>()?;
        println!("{:<12} {:>8.4} {:>8.4} {:>8.4}", law.kind(), mean(&x), std_dev(&x), ks_one_sample(&x, law)?);
    }

    let onsets = sample_ioi_stream(&Distribution::exponential(40.2), 8.0, &mut rng)?;
    println!("\nexponential stream over 8 s: {} onsets ({:.1}/s)", onsets.len(), onsets.len() as f64 / 8.0);

    // density high at both ends, dipping around t = 15 s
    let valley = RateFunction::Valley { base: 5.0, slope: 40.0, center: 15.0 };
    let law = Distribution::inhomogeneous(valley.clone(), 30.0);
    let mut per_second = [0usize; 30];
    for t in sample_ioi_stream(&law, 30.0, &mut rng)? {
        per_second[t as usize] += 1;
    }
    println!("\nsecond  rate  count");
    for (k, n) in per_second.iter().enumerate().step_by(3) {
        println!("{k:>6} {:>5.1} {n:>6}", valley.rate_at(k as f64 + 0.5));
    }
    Ok(())
}
