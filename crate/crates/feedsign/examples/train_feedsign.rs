//! Smallest end-to-end run: five clients vote on the sign of a shared
//! directional derivative, the server broadcasts one bit back, and a
//! hundred-dimensional quadratic walks to its optimum.

use feedsign::aggregation::AggregationRule;
use feedsign::federation::{partition_dirichlet, run_training, FederationState};
use feedsign::models::{synthetic_offsets, ModelSpec};
use feedsign::prng::Seed;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let d = 100;
    let spec = ModelSpec::quadratic(vec![1.0; d], vec![0.0; d])?;
    let dataset = synthetic_offsets(50, d, 0.0, Seed(1))?;
    let shards = partition_dirichlet(&dataset, 5, None, Seed(1))?;
    let params = spec.init_params(Seed(1), 1.0);

    let state = FederationState::new(
        spec,
        dataset,
        params,
        shards,
        AggregationRule::FeedSign,
        5e-3,
        1e-3,
        Seed(1),
    )?;
    println!("initial loss {:10.6}", state.global_loss()?);

    let run = run_training(state, 4000, 500)?;
    for report in run.history.iter().filter(|r| r.global_loss.is_some()) {
        let tally = report.tally.unwrap();
        println!(
            "step {:4}  loss {:10.6}  votes {}+ {}-  bits up/down {}/{}",
            report.step,
            report.global_loss.unwrap(),
            tally.plus,
            tally.minus,
            report.uplink_bits,
            report.downlink_bits
        );
    }

    let total_up: u64 = run.history.iter().map(|r| r.uplink_bits).sum();
    println!("\n{} rounds moved {} uplink bits in total", run.history.len(), total_up);
    Ok(())
}
