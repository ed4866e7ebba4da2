//! Clients that genuinely disagree about where the minimum is.
//!
//! Each client's quadratic optimum is displaced by a mean-centered Gaussian
//! of scale sigma, so the population optimum never moves but individual
//! gradients point elsewhere. Averaging rules inherit that disagreement as
//! noise in the update and their error floor grows with sigma; the majority
//! vote only asks each client which way to lean, and its floor barely
//! moves.

use feedsign::analysis::fit_error_floor;
use feedsign::config::parse_config;
use feedsign::federation::run_training;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!("{:>6}  {:>14}  {:>14}", "sigma", "zo_fedsgd", "feedsign");
    for sigma in [0.0, 0.1, 0.2, 0.4, 0.8] {
        let mut floors = Vec::new();
        for rule in ["zo_fedsgd", "feedsign"] {
            let text = format!(
                r#"{{"rule":"{rule}",
                   "model":{{"kind":"quadratic","het_shift_sigma":{sigma}}},"d":60,
                   "K":6,"T":6000,"eta":1e-3,"mu":1e-3,"run_seed":17,
                   "eval_every":25,"dataset":{{"samples":60}}}}"#
            );
            let cfg = parse_config(text.as_bytes())?;
            let state = cfg.build_state()?;
            let (_, loss_star) = state.analytic_optimum().expect("quadratic family");
            let run = run_training(state, cfg.steps, cfg.eval_every)?;
            let fit = fit_error_floor(&run.history, loss_star)?;
            floors.push(fit.floor);
        }
        println!("{:>6.2}  {:>14.8} {:>14.8}", sigma, floors[0], floors[1]);
    }
    Ok(())
}
