//! Euclidean projection of a noisy inverse transform back onto the simplex.

use noisecorr::dist::project_simplex;
use noisecorr::{PartitionLayout, ProbVector};

fn main() -> noisecorr::Result<()> {
    let raw = [0.93, 0.05, 0.04, -0.02];
    let p = project_simplex(&raw)?;
    println!("{raw:?} -> {p:?} (sum {})", p.iter().sum::<f64>());

    // projecting then marginalising differs from marginalising then projecting
    let layout = PartitionLayout::singletons(2);
    let joint = ProbVector::from_projection(layout, &raw)?;
    println!("marginal of projection: {:?}", joint.marginalize(&[0])?.values());
    let raw_marginal = [raw[0] + raw[2], raw[1] + raw[3]];
    println!("projection of marginal: {:?}", project_simplex(&raw_marginal)?);
    Ok(())
}
