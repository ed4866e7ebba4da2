//! The same problem under all four aggregation rules, with the exact
//! communication price of each. Full gradient exchange learns fastest per
//! round and pays for it in bandwidth; the one-bit vote, run at its own
//! tuned step size, gets close on a fraction of the traffic.

use feedsign::config::parse_config;
use feedsign::federation::run_training;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let rules = ["fedsgd", "zo_fedsgd", "feedsign", "dp_feedsign"];
    println!("{:<12} {:>12} {:>14} {:>14}", "rule", "final loss", "uplink bits", "downlink bits");
    for rule in rules {
        let epsilon = if rule == "dp_feedsign" { r#","epsilon":4.0"# } else { "" };
        let eta = if rule.ends_with("feedsign") { 8e-3 } else { 2e-3 };
        let text = format!(
            r#"{{"rule":"{rule}","model":"quadratic","d":50,"K":5,"T":2000,
               "eta":{eta},"mu":1e-3,"run_seed":11,"eval_every":0,
               "dataset":{{"samples":40,"offset_sigma":0.3}},"B":4{epsilon}}}"#
        );
        let cfg = parse_config(text.as_bytes())?;
        let run = run_training(cfg.build_state()?, cfg.steps, cfg.eval_every)?;
        let up: u64 = run.history.iter().map(|r| r.uplink_bits).sum();
        let down: u64 = run.history.iter().map(|r| r.downlink_bits).sum();
        println!(
            "{:<12} {:>12.6} {:>14} {:>14}",
            rule,
            run.state.global_loss()?,
            up,
            down
        );
    }
    Ok(())
}
