//! The test kernels behind the experiments: exact Mann-Whitney, t with
//! Cohen's d and its CI, KS, bootstrap, permutation, and the broken-stick fit.

use pianola::experiments::{PRINTED_SWEEP_MC, SWEEP_LEVELS};
use pianola::stats::{
    bootstrap_ci, kruskal_wallis, ks_two_sample, mann_whitney, mean, permutation_test, piecewise_fit_with_ci, t_test_with_d,
    Alternative,
};
use pianola::stochastic::Rng;

fn main() -> pianola::Result<()> {
    let a = [0.29, 0.28, 0.30, 0.28, 0.29];
    let b = [0.13, 0.14, 0.13];
    let mw = mann_whitney(&a, &b)?;
    println!("Mann-Whitney: U {} p {:.4} rank-biserial {:?}", mw.statistic, mw.p_value, mw.effect);
    let t = t_test_with_d(&a, &b)?;
    println!("t {:.2} on {} df, p {:.2e}, d {:?}, 95% CI {:?}", t.t, t.df, t.p_value, t.d, t.d_ci);

    let mut rng = Rng::new(1);
    let x: Vec<f64> = (0..200).map(|_| rng.standard_normal()).collect();
    let y: Vec<f64> = (0..200).map(|_| rng.standard_normal() + 0.3).collect();
    let ks = ks_two_sample(&x, &y)?;
    println!("\nKS D {:.3} p {:.4}", ks.statistic, ks.p_value);
    // label-shuffling null for the difference in means
    let pooled: Vec<f64> = x.iter().chain(&y).copied().collect();
    let null = |r: &mut Rng| {
        let mut s = pooled.clone();
        r.shuffle(&mut s);
        mean(&s[200..]) - mean(&s[..200])
    };
    let p = permutation_test(mean(&y) - mean(&x), null, 2000, Alternative::Greater, &mut rng)?;
    println!("permutation p for a mean shift: {p:.4}");
    let (lo, hi) = bootstrap_ci(&x, |s| mean(s), 2000, 0.95, &mut rng)?;
    println!("bootstrap 95% CI of the mean: [{lo:.3}, {hi:.3}]");
    let kw = kruskal_wallis(&[x[..50].to_vec(), y[..50].to_vec(), y[50..100].iter().map(|v| v + 1.0).collect()])?;
    println!("Kruskal-Wallis H {:.1} p {:.2e}", kw.statistic, kw.p_value);

    let fit = piecewise_fit_with_ci(&SWEEP_LEVELS, &PRINTED_SWEEP_MC, 2000, 0.95, &mut rng)?;
    println!(
        "\nsaturation curve: breakpoint {} (CI {:?}), R2 {:.3} vs linear {:.3}, slope ratio {:.1}",
        fit.breakpoint,
        fit.breakpoint_ci,
        fit.r2_piecewise,
        fit.r2_linear,
        fit.slope_ratio()
    );
    Ok(())
}
