//! A trained model stored as its trajectory instead of its weights.
//!
//! The orbit file holds one vote bit per round; replaying it from the same
//! initial point reproduces the final parameters down to the last bit. For
//! this 500-dimensional model the weights take 4000 bytes while the whole
//! 2000-round trajectory fits in 312.

use feedsign::config::parse_config;
use feedsign::federation::run_training;
use feedsign::orbit::{replay, Orbit};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = parse_config(
        br#"{"rule":"feedsign","model":"quadratic","d":500,"K":5,"T":2000,
            "eta":1e-3,"mu":1e-3,"run_seed":42,"eval_every":0}"#,
    )?;
    let run = run_training(cfg.build_state()?, cfg.steps, cfg.eval_every)?;

    let bytes = run.orbit.serialize();
    println!("weights:     {} bytes", 8 * run.final_params().len());
    println!("orbit file:  {} bytes ({} rounds)", bytes.len(), run.history.len());

    let restored = Orbit::deserialize(&bytes)?;
    let replayed = replay(&run.initial_params, &restored)?;
    assert_eq!(replayed, run.final_params(), "replay must be bit-exact");
    println!("replayed parameters identical: true");

    // Any prefix is a valid orbit of its own; replaying half the file lands
    // exactly on the mid-training checkpoint.
    let half = restored.prefix(1000)?;
    let mid = replay(&run.initial_params, &half)?;
    println!("prefix(1000) serializes to {} bytes", half.serialize().len());
    println!(
        "parameter distance from start at step 1000: {:.6}",
        mid.iter().zip(&run.initial_params).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
    );
    Ok(())
}
