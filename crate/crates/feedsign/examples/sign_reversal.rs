//! How often a mini-batch lies about the direction of descent.
//!
//! A vote is only as good as the batch behind it: the smaller the batch,
//! the more often its finite-difference sign disagrees with the sign of the
//! true directional derivative. With symmetric sample noise that reversal
//! probability stays at or below one half, which is exactly what majority
//! voting needs to keep making progress.

use feedsign::analysis::estimate_sign_reversing_prob;
use feedsign::models::{synthetic_offsets, ModelSpec};
use feedsign::prng::Seed;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let d = 30;
    let n = 256;
    let spec = ModelSpec::quadratic(vec![1.0; d], vec![0.0; d])?;
    let dataset = synthetic_offsets(n, d, 1.0, Seed(2))?;
    let params = spec.init_params(Seed(12), 0.4);

    let batches = 2000;
    let margin = 3.0 * (0.25f64 / batches as f64).sqrt();
    println!(
        "{:>10}  {:>8}   ({batches} batches per row; Monte Carlo 3-sigma is {margin:.3})",
        "batch", "p_hat"
    );
    for batch_size in [1, 2, 8, 32, 128, n] {
        let est = estimate_sign_reversing_prob(
            &spec,
            &params,
            Seed(77),
            &dataset,
            batch_size,
            batches,
            1e-4,
            Seed(400),
        )?;
        let note = if batch_size >= n { "  <- full batch, noise gone" } else { "" };
        println!("{:>10}  {:>8.4}{note}", batch_size, est.p_hat);
    }
    Ok(())
}
