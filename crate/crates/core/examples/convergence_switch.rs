//! Convergence points as control: a regime switch fired by the first
//! convergence of a 3:4 canon, and a stochastic voice whose density follows a
//! rate valley centred on a convergence.

use pianola::metrics::pitch_class_concentration;
use pianola::pipeline::{generate_cp_continuous, generate_cp_discrete, window_counts, CpContinuousConfig, CpDiscreteConfig};

fn main() -> pianola::Result<()> {
    let cfg = CpDiscreteConfig::preset();
    let (p, trigger) = generate_cp_discrete(&cfg, 42)?;
    let t = trigger.map_or(f64::NAN, |e| e.time);
    println!("switch fired at {t:.3} s");
    let counts = window_counts(p.events.iter().map(|e| e.onset), 1.0, cfg.query.horizon);
    for (k, n) in counts.iter().enumerate().step_by(2) {
        let w: Vec<f64> = p.events.iter().filter(|e| e.onset >= k as f64 && e.onset < k as f64 + 1.0).map(|e| e.pitch as f64).collect();
        println!("  {k:>2} s  {n:>4} notes  TS {:.3}", pitch_class_concentration(&w));
    }

    let cfg = CpContinuousConfig::preset();
    let p = generate_cp_continuous(&cfg, 42)?;
    let counts = window_counts(p.voice(2).iter().map(|e| e.onset), 1.0, cfg.horizon);
    println!("\nmodulated voice density vs target rate");
    for (k, n) in counts.iter().enumerate().step_by(3) {
        println!("  {k:>2} s  {n:>4}  (rate {:.1})", cfg.rate.rate_at(k as f64 + 0.5));
    }
    Ok(())
}
