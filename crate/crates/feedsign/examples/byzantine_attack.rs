//! What a handful of hostile clients can do to each rule.
//!
//! Sign-vote aggregation caps every client's influence at one bit, so a
//! minority of attackers can at worst flip rounds they already nearly lost.
//! Averaged projections have no such cap: a single wild value moves the
//! mean as far as it likes.

use feedsign::config::parse_config;
use feedsign::federation::run_training;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!(
        "{:<10} {:>9} {:>12} {:>12}",
        "rule", "attackers", "final loss", "accuracy"
    );
    for rule in ["feedsign", "zo_fedsgd"] {
        for attackers in [0, 2, 5, 8] {
            let (kind, eta) = if rule == "feedsign" { ("reverse", 0.3) } else { ("random", 6.0) };
            let text = format!(
                r#"{{"rule":"{rule}","model":"logistic","d":10,"K":25,"T":2000,
                   "eta":{eta},"mu":1e-3,"run_seed":3,"eval_every":0,
                   "dataset":{{"samples":1000,"margin":0.3,"noise":0.25}},
                   "byzantine":{{"count":{attackers},"kind":"{kind}"}}}}"#
            );
            let cfg = parse_config(text.as_bytes())?;
            let run = run_training(cfg.build_state()?, cfg.steps, cfg.eval_every)?;
            let accuracy = run.state.global_accuracy()?.expect("classifier");
            println!(
                "{:<10} {:>9} {:>12.5} {:>11.1}%",
                rule,
                attackers,
                run.state.global_loss()?,
                100.0 * accuracy
            );
        }
        println!();
    }
    Ok(())
}
