//! Paying for privacy one coin flip at a time.
//!
//! The private aggregator draws its broadcast bit from a distribution whose
//! odds shift with the vote margin but are capped so that any two tallies
//! differing by one vote produce outcome probabilities within a factor of
//! e^epsilon. Small epsilon means the bit is nearly a fair coin regardless
//! of the votes; training still inches forward because the coin is slightly
//! loaded the right way.

use feedsign::aggregation::dp_plus_probability;
use feedsign::config::parse_config;
use feedsign::federation::run_training;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // How loaded is the coin? Unanimous five-vote tallies at each budget.
    println!("{:>8}  {:>22}  {:>16}", "epsilon", "P(+1 | 5 votes for +)", "worst-case ratio");
    for epsilon in [0.1, 1.0, 5.0] {
        let p = dp_plus_probability(5, 0, epsilon)?;
        let mut worst: f64 = 0.0;
        for plus in 0..5 {
            let a = dp_plus_probability(plus, 5 - plus, epsilon)?;
            let b = dp_plus_probability(plus + 1, 4 - plus, epsilon)?;
            for (x, y) in [(a, b), (1.0 - a, 1.0 - b)] {
                worst = worst.max(x / y).max(y / x);
            }
        }
        println!("{:>8.1}  {:>22.6}  {:>9.6} <= e^eps {:.6}", epsilon, p, worst, epsilon.exp());
    }

    println!("\n{:>8}  {:>12}", "epsilon", "final loss");
    for epsilon in [0.5, 2.0, 8.0] {
        let text = format!(
            r#"{{"rule":"dp_feedsign","epsilon":{epsilon},"model":"quadratic","d":40,
               "K":5,"T":4000,"eta":1e-3,"mu":1e-3,"run_seed":9,"eval_every":0}}"#
        );
        let cfg = parse_config(text.as_bytes())?;
        let run = run_training(cfg.build_state()?, cfg.steps, cfg.eval_every)?;
        println!("{:>8.1}  {:>12.6}", epsilon, run.state.global_loss()?);
    }
    println!("\n(lower epsilon, noisier bit, higher floor; the budget buys convergence)");
    Ok(())
}
