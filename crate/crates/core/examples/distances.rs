//! W1, the truncated concave distance and KS statistics on small samples.

use stable_chaos::measures::{ks_two_sample, wasserstein1_1d, wasserstein_dq, Sample};

fn main() -> stable_chaos::Result<()> {
    let a = Sample::new(vec![0.0, 0.1, 2.0, 5.0])?;
    let b = Sample::new(vec![0.05, 1.0, 1.5, 9.0])?;
    println!("W1 = {:.4}", wasserstein1_1d(&a, &b)?);
    for q in [0.25, 0.5, 0.75] {
        let d = wasserstein_dq(&a, &b, q, true)?;
        println!(
            "q={q}: W_dq <= {:.4}, exact {:.4}",
            d.bound,
            d.exact.unwrap_or(f64::NAN)
        );
    }
    let ks = ks_two_sample(&a, &b);
    println!("KS = {:.3} (p = {:.3})", ks.stat, ks.p_value);
    Ok(())
}
