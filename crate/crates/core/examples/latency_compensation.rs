//! Velocity-dependent latency: the three model shapes, pre-compensation,
//! calibration fitting and the velocity robustness filter.

use pianola::hal::{
    compensate, filter_trial, fit_power_law, max_disagreement, precompensate, residual_jitter, CalibrationData, FilterConfig,
    LatencyModel, TrueLatency,
};
use pianola::pipeline::{NoteEvent, Piece};
use pianola::stats::{mean, std_dev};
use pianola::stochastic::Rng;

fn main() -> pianola::Result<()> {
    let models = [("linear", LatencyModel::linear()), ("power 0.5", LatencyModel::power(0.5)), ("log 10", LatencyModel::log(10.0))];
    println!("{:>8} {:>8} {:>10} {:>8}", "velocity", "linear", "power 0.5", "log 10");
    for v in [0.0, 128.0, 256.0, 512.0, 768.0, 1023.0] {
        println!("{v:>8} {:>8.2} {:>10.2} {:>8.2}", models[0].1.at(v), models[1].1.at(v), models[2].1.at(v));
    }
    let (v, gap) = max_disagreement(&models[0].1, &models[1].1);
    println!("largest linear/power gap: {gap:.2} ms at v = {v:.1}");

    let mut rng = Rng::new(3);
    // dyads every 20 ms with independent velocities
    let events: Vec<NoteEvent> = (0..400)
        .map(|k| NoteEvent::new((k / 2) as f64 * 0.02, 48 + (k % 24) as u8, rng.int_inclusive(100, 1000) as u16, 0.04))
        .collect();
    let piece = Piece::from_events(events);
    let shifted = precompensate(&piece, &models[1].1);
    let e = &piece.events[0];
    println!("\nv={} sent {:.2} ms early", e.velocity, models[1].1.at(e.velocity as f64));
    println!("earliest command at {:.4} s", shifted.events.iter().map(|e| e.onset).fold(f64::INFINITY, f64::min));

    let vel: Vec<f64> = piece.events.iter().map(|e| e.velocity as f64).collect();
    println!("\nresidual jitter with a wrong exponent (true 0.5):");
    for c in [0.3, 0.4, 0.5, 0.6, 0.7] {
        println!("  assumed {c}: {:.3} ms", residual_jitter(&vel, 0.5, c));
    }

    // calibrate against a noisy instrument
    let truth = TrueLatency { additive_ms: 0.75, ..TrueLatency::exact(LatencyModel::power(0.45)) };
    let sweep: Vec<f64> = (0..=33).map(|k| (k as f64 * 31.0).min(1023.0)).collect();
    let measured = truth.realise(&sweep, &mut rng);
    let data = CalibrationData { points: sweep.into_iter().zip(measured).collect() };
    let fit = fit_power_law(&data, Some((10.0, 30.0)))?;
    println!("\nfitted exponent {:.3} (true 0.45), rmse {:.2} ms", fit.model.exponent().unwrap_or(f64::NAN), fit.rmse);
    let (_, used) = compensate(&piece, Some(&data), 0.5)?;
    println!("compensate() with calibration uses {:?}", used.kind);

    let f = FilterConfig::default();
    let t = filter_trial(&piece, &f, &truth, None, &mut rng)?;
    println!(
        "\nuncalibrated, linear fallback: error SD {:.2} ms plain, {:.2} ms filtered (mean {:.2} / {:.2})",
        std_dev(&t.plain),
        std_dev(&t.filtered),
        mean(&t.plain),
        mean(&t.filtered)
    );
    Ok(())
}
