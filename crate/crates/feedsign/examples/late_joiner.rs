//! A client that joins mid-run and catches up from the orbit alone.
//!
//! Nobody ships it the current weights: it downloads the initial point plus
//! one bit per elapsed round, replays them locally, and lands on the live
//! parameters exactly. `catch_up` refuses orbits that do not describe the
//! run it is joining.

use feedsign::config::parse_config;
use feedsign::federation::{run_training_with, FederationState};
use feedsign::orbit::catch_up;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = parse_config(
        br#"{"rule":"feedsign","model":"quadratic","d":200,"K":5,"T":1500,
            "eta":1e-3,"mu":1e-3,"run_seed":5,"eval_every":0}"#,
    )?;

    // Capture a snapshot of the live federation at step 1000, as if a new
    // participant knocked right then.
    let join_at = 1000;
    let mut live_then: Option<FederationState> = None;
    let run = run_training_with(cfg.build_state()?, cfg.steps, cfg.eval_every, |state, report| {
        if report.step + 1 == join_at {
            live_then = Some(state.clone());
        }
    })?;
    let live_then = live_then.expect("snapshot captured");

    let joiner = catch_up(&run.initial_params, &run.orbit, &live_then)?;
    assert_eq!(joiner, live_then.params, "joiner must match the live run bit for bit");
    println!(
        "joined at step {} by replaying {} payload bytes; parameters identical: true",
        live_then.step,
        run.orbit.prefix(join_at)?.serialize().len()
    );

    // The guard: an orbit from a different run seed is rejected outright.
    let other = parse_config(
        br#"{"rule":"feedsign","model":"quadratic","d":200,"K":5,"T":1500,
            "eta":1e-3,"mu":1e-3,"run_seed":6,"eval_every":0}"#,
    )?;
    let other_run = run_training_with(other.build_state()?, 10, 0, |_, _| ())?;
    match catch_up(&other_run.initial_params, &other_run.orbit, &live_then) {
        Err(e) => println!("foreign orbit rejected: {e}"),
        Ok(_) => unreachable!("must not catch up from a different run"),
    }
    Ok(())
}
