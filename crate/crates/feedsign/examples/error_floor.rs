//! Where a sign-vote run stops improving, and how the step size moves it.
//!
//! Each round steps a fixed distance eta along a random direction, so near
//! the optimum the walk cannot settle closer than the step granularity
//! allows. Single-sample batches keep the votes noisy enough that the
//! average motion stays proportional to the gradient, which makes the loss
//! history geometric and the floor fittable. Shrinking eta lowers the floor
//! and slows the approach, the classic trade.

use feedsign::analysis::fit_error_floor;
use feedsign::config::parse_config;
use feedsign::federation::run_training;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!("{:>8}  {:>12}  {:>12}  {:>12}", "eta", "rate", "floor", "residual");
    for eta in [2e-3, 1e-3, 5e-4] {
        let text = format!(
            r#"{{"rule":"feedsign","model":{{"kind":"quadratic","init_scale":0.3}},
               "d":100,"K":5,"T":20000,"eta":{eta},"mu":1e-3,"run_seed":1,
               "eval_every":100,"dataset":{{"samples":256,"offset_sigma":0.3}},"B":1}}"#
        );
        let cfg = parse_config(text.as_bytes())?;
        let state = cfg.build_state()?;
        let (_, loss_star) = state.analytic_optimum().expect("quadratic family");
        let run = run_training(state, cfg.steps, cfg.eval_every)?;
        let fit = fit_error_floor(&run.history, loss_star)?;
        println!(
            "{:>8.0e}  {:>12.3e}  {:>12.3e}  {:>12.3e}",
            eta, fit.rate, fit.floor, fit.residual
        );
    }
    Ok(())
}
