//! Texture metrics on a rendered piece: coherence between sections, tonal
//! stability, voice separation and data-driven separation weights.

use pianola::io::CompositionConfig;
use pianola::metrics::{
    estimate_weights, melodic_coherence, pcs_distance, pitch_class_concentration, rhythmic_coherence, voice_separation,
    VoiceFeatures,
};

fn main() -> pianola::Result<()> {
    let p = CompositionConfig::canonical().render(42)?.score;
    let pitches = |k: u32| p.in_section(k).iter().map(|e| e.pitch as f64).collect::<Vec<_>>();
    let iois = |k: u32| {
        let on: Vec<f64> = p.in_section(k).iter().map(|e| e.onset).collect();
        on.windows(2).map(|w| w[1] - w[0]).collect::<Vec<_>>()
    };

    println!("sections: {}", p.sections.iter().map(|s| s.symbol).collect::<String>());
    println!("A vs A (0,2): MC {:.3} RC {:.3}", melodic_coherence(&pitches(0), &pitches(2))?, rhythmic_coherence(&iois(0), &iois(2))?);
    println!("A vs B (0,1): MC {:.3} RC {:.3}", melodic_coherence(&pitches(0), &pitches(1))?, rhythmic_coherence(&iois(0), &iois(1))?);
    for k in 0..2 {
        println!("tonal stability, section {k}: {:.3}", pitch_class_concentration(&pitches(k)));
    }

    let b: Vec<_> = p.in_section(1);
    let v0: Vec<_> = b.iter().filter(|e| e.voice == 0).copied().collect();
    let v1: Vec<_> = b.iter().filter(|e| e.voice == 1).copied().collect();
    let s = voice_separation(&v0, &v1, None)?;
    println!("\nsection 1 voices: W pitch {:.2}, W velocity {:.1}, W log-IOI {:.3}, VSS {:.2}", s.w_pitch, s.w_velocity, s.w_temporal, s.vss);
    let w = estimate_weights(&[VoiceFeatures::from_events(&v0)?, VoiceFeatures::from_events(&v1)?], true)?;
    println!("range-normalised weights: pitch {:.3}, velocity {:.3}, temporal {:.3}", w.pitch, w.velocity, w.temporal);
    println!("pitch-class-set distance (1 s windows): {:.3}", pcs_distance(&v0, &v1, 1.0)?);
    Ok(())
}
