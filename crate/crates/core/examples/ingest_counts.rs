//! Read a device-style counts file and reconstruct the 14-qubit marginals.

use noisecorr::cli::ingest_counts;
use noisecorr::protocol::{reconstruct_marginal, FitOptions, Threshold};

fn main() -> noisecorr::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/device_counts.json").to_string());
    let text = std::fs::read_to_string(&path)?;
    let (record, log) = ingest_counts(&text, None)?;
    for line in &log {
        println!("{line}");
    }
    let options = FitOptions { threshold: Threshold::Fixed(1.0 / 16.0), ..Default::default() };
    for pair in [[2, 3], [3, 4], [9, 10]] {
        let r = reconstruct_marginal(&record, &pair, &options)?;
        println!("qubits {pair:?}: observed rates {:?}", r.observed_rates.values());
    }
    Ok(())
}
