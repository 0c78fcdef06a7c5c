//! Tempo-canon timelines and their convergence points.

use pianola::canon::{find_convergences, ConvergenceQuery, VoiceSpec};

fn main() -> pianola::Result<()> {
    let a = VoiceSpec::new(3.0, 3.0);
    let b = VoiceSpec::new(4.0, 3.0);
    println!("3:4 canon, first onsets");
    println!("  voice 3: {:?}", a.onsets_until(3.0));
    println!("  voice 4: {:?}", b.onsets_until(3.0));

    for eps in [0.010, 0.050] {
        let cps = find_convergences(&ConvergenceQuery::new(a, b, eps, 30.0))?;
        let times: Vec<String> = cps.iter().map(|c| format!("{:.1}", c.time)).collect();
        println!("eps {:>3} ms: {} convergences at {}", eps * 1000.0, cps.len(), times.join(" "));
    }

    // incommensurate ratios only ever come close
    let e = VoiceSpec::new(std::f64::consts::E, 1.0);
    let pi = VoiceSpec::new(std::f64::consts::PI, 1.0);
    println!("\ne:pi canon over 30 s");
    for eps in [0.010, 0.020, 0.050, 0.100] {
        let cps = find_convergences(&ConvergenceQuery::new(e, pi, eps, 30.0))?;
        let closest = cps.iter().filter(|c| c.time > 0.0).map(|c| c.residual).fold(f64::INFINITY, f64::min);
        println!("  eps {:>3} ms: {:>2} near-coincidences, closest after t=0 {:.2} ms", eps * 1000.0, cps.len(), closest * 1000.0);
    }

    // each IOI 2% shorter than the last, against a steady voice
    let accel = VoiceSpec::new(1.0, 0.5).with_alpha(0.98);
    let steady = VoiceSpec::new(1.0, 0.5).with_offset(0.25);
    let cps = find_convergences(&ConvergenceQuery::new(accel, steady, 0.02, 20.0))?;
    println!("\naccelerating vs steady: {} convergences, first at {:.2} s", cps.len(), cps.first().map_or(f64::NAN, |c| c.time));
    Ok(())
}
