//! How far a GRF estimated from finite-shot marginals drifts from the true
//! chain as the chain grows.

use noisecorr::grf::{chain_scaling_experiment, ChainScalingConfig};

fn main() -> noisecorr::Result<()> {
    let cfg = ChainScalingConfig { lengths: vec![4, 8, 16, 32], instances: 8, mc_samples: 5000, ..Default::default() };
    let report = chain_scaling_experiment(&cfg)?;
    print!("{}", report.to_csv());
    println!("JSD ~ a·sqrt(L): a = {:.3e}, R² = {:.3}", report.jsd_sqrt.a, report.jsd_sqrt.r2);
    println!("JSD ~ a·L:       a = {:.3e}, R² = {:.3}", report.jsd_linear.a, report.jsd_linear.r2);
    Ok(())
}
