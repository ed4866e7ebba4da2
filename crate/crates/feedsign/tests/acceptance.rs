//! End-to-end checks of everything the simulator promises, one criterion
//! per test, each printing a single PASS/FAIL line (visible with
//! `--nocapture`). Time budgets are enforced in release builds only; debug
//! builds still check every bound, just without the stopwatch assertion.

use std::collections::HashMap;
use std::time::Instant;

use feedsign::aggregation::{
    aggregate_dp_feedsign, comm_cost, dp_plus_probability,
};
use feedsign::analysis::{
    byzantine_composition_check, estimate_sign_reversing_prob, fit_error_floor, half_normal_check,
    half_normal_exact, unbiasedness_special_case,
};
use feedsign::config::parse_config;
use feedsign::federation::run_training;
use feedsign::models::{grad, synthetic_offsets, Batch, ModelSpec};
use feedsign::orbit::{replay, replay_with, Orbit};
use feedsign::prng::{derive_seed, make_stream, Seed};
use feedsign::zo::{sign, spsa_projection, SignVote};

fn verdict(name: &str, start: Instant, pass: bool, budget_secs: f64, detail: &str) {
    let elapsed = start.elapsed().as_secs_f64();
    let in_budget = elapsed <= budget_secs;
    let timed_out = cfg!(not(debug_assertions)) && !in_budget;
    let ok = pass && !timed_out;
    println!(
        "{name}: {} [{elapsed:.1}s/{budget_secs:.0}s] {detail}",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(pass, "{name}: {detail}");
    assert!(!timed_out, "{name}: took {elapsed:.1}s, budget {budget_secs:.0}s");
}

fn train_text(text: &str) -> feedsign::federation::TrainingRun {
    let cfg = parse_config(text.as_bytes()).expect("config parses");
    let state = cfg.build_state().expect("state builds");
    run_training(state, cfg.steps, cfg.eval_every).expect("training runs")
}

/// Rank correlation with average ranks for ties.
fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut out = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let shared = (i + j) as f64 / 2.0 + 1.0;
            for &k in &idx[i..=j] {
                out[k] = shared;
            }
            i = j + 1;
        }
        out
    }
    let (rx, ry) = (ranks(xs), ranks(ys));
    let n = xs.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx) * (a - mx)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my) * (b - my)).sum();
    cov / (vx.sqrt() * vy.sqrt())
}

#[test]
fn criterion_01_bit_accounting() {
    let start = Instant::now();
    let d = 7u64;
    let mut pass = true;
    let mut detail = String::new();
    for clients in [1usize, 5, 25] {
        for rule in ["fedsgd", "zo_fedsgd", "feedsign", "dp_feedsign"] {
            let epsilon = if rule == "dp_feedsign" { r#","epsilon":1.0"# } else { "" };
            let text = format!(
                r#"{{"rule":"{rule}","model":"quadratic","d":{d},"K":{clients},"T":2,
                   "eta":1e-3,"mu":1e-3,"run_seed":7,"eval_every":0,
                   "dataset":{{"samples":50,"offset_sigma":0.2}},"B":2{epsilon}}}"#
            );
            let run = train_text(&text);
            let (up_client, down) = match rule {
                "fedsgd" => (32 * d, 32 * d),
                "zo_fedsgd" => (64, 64 * clients as u64),
                _ => (1, 1),
            };
            let cost = comm_cost(&run.state.rule, clients, d as usize);
            let priced_ok =
                cost.uplink_bits_per_client == up_client && cost.downlink_bits == down;
            let counted_ok = run.history.iter().all(|r| {
                r.uplink_bits == up_client * clients as u64 && r.downlink_bits == down
            });
            if !(priced_ok && counted_ok) {
                pass = false;
                detail = format!(
                    "{rule} K={clients}: priced {}x{}up/{}down, counted {:?}",
                    clients,
                    cost.uplink_bits_per_client,
                    cost.downlink_bits,
                    run.history.iter().map(|r| (r.uplink_bits, r.downlink_bits)).collect::<Vec<_>>()
                );
            }
        }
    }
    if pass {
        detail = format!(
            "per-client uplink 32d={}, 64, 1, 1 and downlink 32d, 64K, 1, 1 exact for K in {{1,5,25}}",
            32 * d
        );
    }
    verdict("criterion 01 bit accounting", start, pass, 1.0, &detail);
}

#[test]
fn criterion_02_orbit_replay() {
    let start = Instant::now();
    let text = r#"{"rule":"feedsign","model":"quadratic","d":500,"K":3,"T":2000,
        "eta":1e-3,"mu":1e-3,"run_seed":5,"eval_every":0,
        "dataset":{"samples":64,"offset_sigma":0.3}}"#;
    let cfg = parse_config(text.as_bytes()).unwrap();
    let state = cfg.build_state().unwrap();

    let mut checkpoints: HashMap<u64, Vec<f64>> = HashMap::new();
    let run = feedsign::federation::run_training_with(state, 2000, 0, |st, report| {
        checkpoints.insert(report.step, st.params.clone());
    })
    .unwrap();

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.orbit");
    run.orbit.write_file(&path).unwrap();
    let loaded = Orbit::read_file(&path).unwrap();

    let bits = |p: &[f64]| p.iter().map(|x| x.to_bits()).collect::<Vec<u64>>();
    let replayed = replay(&run.initial_params, &loaded).unwrap();
    let final_ok = bits(&replayed) == bits(run.final_params());

    let mut matched = 0u64;
    let mut mismatched = 0u64;
    replay_with(&run.initial_params, &loaded, |step, params| {
        match checkpoints.get(&step) {
            Some(reference) if bits(reference) == bits(params) => matched += 1,
            _ => mismatched += 1,
        }
    })
    .unwrap();

    let mut prefix_ok = true;
    for cut in [1u64, 200, 977, 1999] {
        let partial = replay(&run.initial_params, &loaded.prefix(cut).unwrap()).unwrap();
        prefix_ok &= bits(&partial) == bits(&checkpoints[&(cut - 1)]);
    }

    let pass = final_ok && mismatched == 0 && matched == 2000 && prefix_ok;
    let detail = format!(
        "d=500 T=2000 from a {}-byte file: final bit-identical {final_ok}, \
         {matched}/2000 per-step checkpoints bit-identical, prefix cuts ok {prefix_ok}",
        std::fs::metadata(&path).unwrap().len()
    );
    verdict("criterion 02 orbit replay", start, pass, 30.0, &detail);
}

#[test]
fn criterion_03_spsa_accuracy() {
    let start = Instant::now();
    let mut rng = make_stream(Seed(0xACC3));
    let d = 40;
    let mut worst_rel = 0.0f64;
    for trial in 0..1000u64 {
        let eigenvalues: Vec<f64> = (0..d).map(|_| 0.25 + 3.75 * rng.next_uniform()).collect();
        let optimum: Vec<f64> = (0..d).map(|_| rng.next_gaussian()).collect();
        let spec = ModelSpec::quadratic(eigenvalues, optimum).unwrap();
        let data =
            synthetic_offsets(32, d, 0.5, derive_seed(Seed(0xDA7A), &[trial])).unwrap();
        let rows: Vec<usize> = (0..1 + rng.next_index(32)).map(|_| rng.next_index(32)).collect();
        let batch = Batch::subset(&data, &rows).unwrap();
        let mut w: Vec<f64> = (0..d).map(|_| 2.0 * rng.next_gaussian()).collect();
        let seed = derive_seed(Seed(0xD12), &[trial]);
        // On a quadratic the two-point formula is exact at any mu, so a wide
        // probe is legitimate and keeps the (loss+ - loss-) cancellation far
        // above float noise.
        let p = spsa_projection(&spec, &mut w, &batch, seed, 0.1).unwrap();
        let g = grad(&spec, &w, &batch).unwrap();
        let z = make_stream(seed).gaussian_direction(d);
        let exact: f64 = g.iter().zip(&z).map(|(a, b)| a * b).sum();
        worst_rel = worst_rel.max((p.value - exact).abs() / exact.abs().max(1e-300));
    }
    let quadratic_ok = worst_rel < 1e-10;

    // Logistic truncation is quadratic in mu, so a 10x smaller mu should cut
    // the error by about 100x; demand at least 50x on a pair whose leading
    // error term is comfortably above float noise.
    let spec = ModelSpec::logistic(8).unwrap();
    let data = feedsign::models::synthetic_blobs(48, 8, 2, 1.0, 1.0, Seed(0xB0B)).unwrap();
    let batch = Batch::full(&data);
    let mut ratio = None;
    for candidate in 0..20u64 {
        let mut probe = make_stream(derive_seed(Seed(0x71C), &[candidate]));
        let mut w: Vec<f64> = (0..spec.param_count()).map(|_| 0.7 * probe.next_gaussian()).collect();
        let seed = derive_seed(Seed(0x71D), &[candidate]);
        let g = grad(&spec, &w, &batch).unwrap();
        let z = make_stream(seed).gaussian_direction(w.len());
        let exact: f64 = g.iter().zip(&z).map(|(a, b)| a * b).sum();
        let coarse = spsa_projection(&spec, &mut w, &batch, seed, 1e-2).unwrap().value;
        let fine = spsa_projection(&spec, &mut w, &batch, seed, 1e-3).unwrap().value;
        let err_coarse = (coarse - exact).abs();
        let err_fine = (fine - exact).abs();
        if err_coarse > 1e-8 && exact.abs() > 1e-6 {
            ratio = Some(err_coarse / err_fine);
            break;
        }
    }
    let ratio = ratio.expect("a logistic probe with measurable truncation error");
    let richardson_ok = ratio >= 50.0;

    let pass = quadratic_ok && richardson_ok;
    let detail = format!(
        "1000 random quadratic probes worst rel err {worst_rel:.2e} (<1e-10), \
         logistic error ratio for 10x smaller mu {ratio:.0} (>=50)"
    );
    verdict("criterion 03 two-point estimate accuracy", start, pass, 60.0, &detail);
}

#[test]
fn criterion_04_error_floor_step_size() {
    let start = Instant::now();
    let config = |eta: f64| {
        format!(
            r#"{{"rule":"feedsign","model":{{"kind":"quadratic","init_scale":0.3}},
               "d":100,"K":5,"T":20000,"B":1,"eta":{eta},"mu":1e-3,"run_seed":11,
               "eval_every":100,"dataset":{{"samples":256,"offset_sigma":0.3}}}}"#
        )
    };
    let cfg = parse_config(config(1e-3).as_bytes()).unwrap();
    let state = cfg.build_state().unwrap();
    let (_, loss_star) = state.analytic_optimum().expect("quadratic family");
    let initial_gap = state.global_loss().unwrap() - loss_star;
    let run = run_training(state, cfg.steps, cfg.eval_every).unwrap();
    let final_gap = run
        .history
        .iter()
        .rev()
        .find_map(|r| r.global_loss)
        .unwrap()
        - loss_star;
    let fit = fit_error_floor(&run.history, loss_star).unwrap();
    let decay_factor = 1.0 - fit.rate;

    let run_half = train_text(&config(5e-4));
    let fit_half = fit_error_floor(&run_half.history, loss_star).unwrap();

    let converged = final_gap < 0.1 * initial_gap;
    let factor_ok = decay_factor > 0.0 && decay_factor < 1.0;
    let floor_ordered = fit_half.floor < fit.floor;
    let pass = converged && factor_ok && floor_ordered;
    let detail = format!(
        "gap {final_gap:.3e} vs initial {initial_gap:.3e} ({:.1}%), decay factor {decay_factor:.6}, \
         floor {:.3e} -> {:.3e} when eta halves",
        100.0 * final_gap / initial_gap,
        fit.floor,
        fit_half.floor
    );
    verdict("criterion 04 error floor vs step size", start, pass, 120.0, &detail);
}

#[test]
fn criterion_05_heterogeneity_floors() {
    let start = Instant::now();
    let sigmas = [0.0, 0.1, 0.2, 0.4, 0.8];
    let mut zo_floors = Vec::new();
    let mut vote_floors = Vec::new();
    let mut initial_gaps = Vec::new();
    for sigma in sigmas {
        for rule in ["zo_fedsgd", "feedsign"] {
            let text = format!(
                r#"{{"rule":"{rule}",
                   "model":{{"kind":"quadratic","het_shift_sigma":{sigma}}},"d":60,
                   "K":6,"T":6000,"eta":1e-3,"mu":1e-3,"run_seed":17,
                   "eval_every":25,"dataset":{{"samples":60}}}}"#
            );
            let cfg = parse_config(text.as_bytes()).unwrap();
            let state = cfg.build_state().unwrap();
            let (_, loss_star) = state.analytic_optimum().expect("quadratic family");
            initial_gaps.push(state.global_loss().unwrap() - loss_star);
            let run = run_training(state, cfg.steps, cfg.eval_every).unwrap();
            let fit = fit_error_floor(&run.history, loss_star).unwrap();
            if rule == "zo_fedsgd" {
                zo_floors.push(fit.floor);
            } else {
                vote_floors.push(fit.floor);
            }
        }
    }
    let rho = spearman(&sigmas.map(|s| s * s), &zo_floors);
    let vote_max = vote_floors.iter().cloned().fold(f64::MIN, f64::max);
    let vote_min = vote_floors.iter().cloned().fold(f64::MAX, f64::min);
    // Floors below a thousandth of the starting gap are indistinguishable
    // from zero at this trajectory scale; a pile of those counts as flat.
    let resolution = 1e-3 * initial_gaps.iter().sum::<f64>() / initial_gaps.len() as f64;
    let vote_flat = vote_max <= resolution || vote_max < 2.0 * vote_min;
    let pass = rho > 0.9 && vote_flat;
    let detail = format!(
        "averaging floors {:?} rise with sigma^2 (spearman {rho:.3}), \
         vote floors stay within [{vote_min:.1e}, {vote_max:.1e}] (resolution {resolution:.1e})",
        zo_floors.iter().map(|f| format!("{f:.1e}")).collect::<Vec<_>>()
    );
    verdict("criterion 05 heterogeneity floors", start, pass, 300.0, &detail);
}

#[test]
fn criterion_06_byzantine_accuracy() {
    let start = Instant::now();
    let accuracy = |rule: &str, eta: f64, kind: &str, attackers: usize, seed: u64| -> f64 {
        let byz = if attackers > 0 {
            format!(r#","byzantine":{{"count":{attackers},"kind":"{kind}"}}"#)
        } else {
            String::new()
        };
        let text = format!(
            r#"{{"rule":"{rule}","model":"logistic","d":10,"K":25,"T":2000,
               "eta":{eta},"mu":1e-3,"run_seed":{seed},"eval_every":0,
               "dataset":{{"samples":1000,"margin":0.3,"noise":0.25}}{byz}}}"#
        );
        let run = train_text(&text);
        run.state.global_accuracy().unwrap().expect("classifier")
    };
    let seeds = [1u64, 2, 3, 4, 5];
    let mean = |rule: &str, eta: f64, kind: &str, attackers: usize| -> f64 {
        seeds.iter().map(|&s| accuracy(rule, eta, kind, attackers, s)).sum::<f64>()
            / seeds.len() as f64
    };
    // Vote aggregation faces the worst sign-channel attack (reversal);
    // mean aggregation faces attackers that report unit Gaussian noise.
    let vote: Vec<f64> = (0..4).map(|bk| mean("feedsign", 0.3, "reverse", bk)).collect();
    let avg: Vec<f64> = (0..4).map(|bk| mean("zo_fedsgd", 6.0, "random", bk)).collect();

    let vote_drop = 100.0 * (vote[0] - vote[2]);
    let avg_drop = 100.0 * (avg[0] - avg[2]);
    let vote_holds = vote_drop.abs() <= 5.0;
    let averaging_worse = avg_drop > vote_drop;
    let pass = vote_holds && averaging_worse;
    let detail = format!(
        "5-seed mean accuracy over attackers 0..=3: vote {:?}, averaging {:?}; \
         drops at 2/25 attackers: vote {vote_drop:+.2}pp (within 5pp), averaging {avg_drop:+.2}pp",
        vote.iter().map(|a| format!("{:.1}%", 100.0 * a)).collect::<Vec<_>>(),
        avg.iter().map(|a| format!("{:.1}%", 100.0 * a)).collect::<Vec<_>>()
    );
    verdict("criterion 06 byzantine accuracy", start, pass, 600.0, &detail);
}

#[test]
fn criterion_07_wrong_vote_composition() {
    let start = Instant::now();
    let trials = 10_000;
    let mut pass = true;
    let mut rows = Vec::new();
    for p_e in [0.1, 0.3] {
        for p_b in [0.0, 0.2, 0.4] {
            let (predicted, measured) =
                byzantine_composition_check(p_e, p_b, trials, Seed(0xC7)).unwrap();
            let sigma = (predicted * (1.0 - predicted) / trials as f64).sqrt();
            let ok = (measured - predicted).abs() <= 3.0 * sigma;
            pass &= ok;
            rows.push(format!(
                "({p_e},{p_b}): {measured:.4} vs {predicted:.4} ({:+.1} sigma)",
                (measured - predicted) / sigma
            ));
        }
    }
    let detail = format!("union of error and attack over {trials} trials: {}", rows.join(", "));
    verdict("criterion 07 wrong-vote composition", start, pass, 60.0, &detail);
}

#[test]
fn criterion_08_dp_ratio_bound() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut worst_at = String::new();
    let mut pass = true;
    for clients in 2usize..=7 {
        for epsilon in [0.1f64, 1.0, 5.0] {
            let bound = epsilon.exp();
            // One flipped vote turns (plus, minus) into (plus-1, minus+1);
            // both output probabilities must move by at most e^epsilon.
            for plus in 1..=clients {
                let minus = clients - plus;
                let p = dp_plus_probability(plus, minus, epsilon).unwrap();
                let q = dp_plus_probability(plus - 1, minus + 1, epsilon).unwrap();
                for ratio in [p / q, q / p, (1.0 - p) / (1.0 - q), (1.0 - q) / (1.0 - p)] {
                    if ratio > worst {
                        worst = ratio;
                        worst_at = format!("K={clients} eps={epsilon} tally {plus}-{minus}");
                    }
                    pass &= ratio <= bound;
                }
            }
        }
    }

    let votes: Vec<SignVote> =
        [SignVote::Plus, SignVote::Plus, SignVote::Plus, SignVote::Minus, SignVote::Minus]
            .to_vec();
    let expected = dp_plus_probability(3, 2, 1.0).unwrap();
    let mut noise = make_stream(Seed(0xD9));
    let draws = 100_000;
    let mut plus_count = 0u64;
    for _ in 0..draws {
        if aggregate_dp_feedsign(&votes, 1.0, &mut noise).unwrap() == SignVote::Plus {
            plus_count += 1;
        }
    }
    let observed = plus_count as f64 / draws as f64;
    let sigma = (expected * (1.0 - expected) / draws as f64).sqrt();
    let mc_ok = (observed - expected).abs() <= 3.0 * sigma;
    pass &= mc_ok;

    let detail = format!(
        "worst neighboring ratio {worst:.6} at {worst_at} (every ratio <= e^eps); \
         eps=1 tally 3-2 over 1e5 draws: {observed:.4} vs {expected:.4} ({:+.1} sigma)",
        (observed - expected) / sigma
    );
    verdict("criterion 08 dp ratio bound", start, pass, 60.0, &detail);
}

#[test]
fn criterion_09_sign_reversal_bound() {
    let start = Instant::now();
    let batches = 400;
    let bound = 0.5 + 3.0 * (0.25 / batches as f64).sqrt();
    let mut rng = make_stream(Seed(0x5EED9));
    let mut worst = 0.0f64;
    let mut pass = true;
    for i in 0..100u64 {
        let d = 4 + rng.next_index(29);
        let samples = 12 + rng.next_index(37);
        let eigenvalues: Vec<f64> = (0..d).map(|_| 0.2 + 1.8 * rng.next_uniform()).collect();
        let optimum: Vec<f64> = (0..d).map(|_| rng.next_gaussian()).collect();
        let spec = ModelSpec::quadratic(eigenvalues, optimum).unwrap();
        let sigma = 0.1 + 0.8 * rng.next_uniform();
        let data =
            synthetic_offsets(samples, d, sigma, derive_seed(Seed(0x90), &[i])).unwrap();
        let w: Vec<f64> = (0..d).map(|_| rng.next_gaussian()).collect();
        let batch_size = 1 + rng.next_index(samples);
        let est = estimate_sign_reversing_prob(
            &spec,
            &w,
            derive_seed(Seed(0x91), &[i]),
            &data,
            batch_size,
            batches,
            1e-3,
            derive_seed(Seed(0x92), &[i]),
        )
        .unwrap();
        worst = worst.max(est.p_hat);
        pass &= est.p_hat <= bound;
    }

    let mut full_batch_exact = true;
    for i in 0..10u64 {
        let d = 6 + rng.next_index(20);
        let samples = 16 + rng.next_index(17);
        let spec = ModelSpec::quadratic(vec![1.0; d], vec![0.0; d]).unwrap();
        let data =
            synthetic_offsets(samples, d, 0.5, derive_seed(Seed(0x93), &[i])).unwrap();
        let w: Vec<f64> = (0..d).map(|_| rng.next_gaussian()).collect();
        let est = estimate_sign_reversing_prob(
            &spec,
            &w,
            derive_seed(Seed(0x94), &[i]),
            &data,
            samples,
            batches,
            1e-3,
            derive_seed(Seed(0x95), &[i]),
        )
        .unwrap();
        full_batch_exact &= est.p_hat == 0.0;
    }
    pass &= full_batch_exact;
    let detail = format!(
        "100 random problems: worst p_hat {worst:.4} <= {bound:.4}; \
         10 full-batch problems all exactly 0: {full_batch_exact}"
    );
    verdict("criterion 09 sign-reversal probability", start, pass, 120.0, &detail);
}

#[test]
fn criterion_10_half_normal() {
    let start = Instant::now();
    let mut rng = make_stream(Seed(0x4A1F));
    let mut worst_rel = 0.0f64;
    for i in 0..10u64 {
        let dim = [3, 7, 12, 20, 31, 45, 60, 77, 90, 100][i as usize];
        let scale = 0.5 + 1.5 * rng.next_uniform();
        let g: Vec<f64> = (0..dim).map(|_| scale * rng.next_gaussian()).collect();
        let measured =
            half_normal_check(&g, 100_000, derive_seed(Seed(0x4A20), &[i])).unwrap();
        let exact = half_normal_exact(&g);
        worst_rel = worst_rel.max((measured - exact).abs() / exact);
    }
    let pass = worst_rel < 0.01;
    let detail = format!(
        "mean |z . g| over 1e5 draws vs sqrt(2/pi)|g| for 10 random g: worst rel dev {worst_rel:.4}"
    );
    verdict("criterion 10 half-normal projection", start, pass, 30.0, &detail);
}

#[test]
fn criterion_11_sign_unbiasedness() {
    let start = Instant::now();
    let trials = 10_000;
    // Same construction the library uses, checked per grid point against its
    // own binomial band: vote = sign(p + uniform noise on [-1, 1)).
    let mut stream = make_stream(Seed(0xB1A5));
    let mut pass = true;
    let mut worst_sigmas = 0.0f64;
    for i in 0..=20 {
        let p = -1.0 + i as f64 / 10.0;
        let mut total = 0i64;
        for _ in 0..trials {
            let noise = 2.0 * stream.next_uniform() - 1.0;
            total += sign(p + noise).unwrap().unit();
        }
        let mean = total as f64 / trials as f64;
        let dev = (mean - p).abs();
        let sigma = ((1.0 - p * p).max(0.0) / trials as f64).sqrt();
        if sigma == 0.0 {
            pass &= dev == 0.0;
        } else {
            pass &= dev <= 3.0 * sigma;
            worst_sigmas = worst_sigmas.max(dev / sigma);
        }
    }
    let library_worst = unbiasedness_special_case(trials, Seed(0xB1A6)).unwrap();
    let library_ok = library_worst <= 3.0 * (1.0 / trials as f64).sqrt();
    pass &= library_ok;
    let detail = format!(
        "per-point worst {worst_sigmas:.2} sigma, endpoints exact; \
         library sweep worst dev {library_worst:.4} <= 0.03"
    );
    verdict("criterion 11 vote unbiasedness", start, pass, 30.0, &detail);
}

#[test]
fn criterion_12_rerun_determinism() {
    let start = Instant::now();
    let bin = env!("CARGO_BIN_EXE_feedsign");
    let dir = tempfile::tempdir().unwrap();
    let configs = [
        (
            "dp",
            r#"{"rule":"dp_feedsign","epsilon":2.0,
                "model":{"kind":"quadratic","het_shift_sigma":0.3},"d":40,
                "K":5,"T":200,"B":3,"eta":2e-3,"mu":1e-3,"run_seed":29,
                "eval_every":20,"beta":0.5,
                "byzantine":{"count":1,"kind":"reverse"},
                "dataset":{"samples":60,"offset_sigma":0.4}}"#,
        ),
        (
            "zo",
            r#"{"rule":"zo_fedsgd","model":"logistic","d":6,"K":4,"T":200,
                "eta":0.1,"mu":1e-3,"run_seed":31,"eval_every":50,"beta":1.0,
                "byzantine":{"count":1,"kind":"random"},
                "dataset":{"samples":48,"margin":1.0,"noise":0.8}}"#,
        ),
        (
            "grad",
            r#"{"rule":"fedsgd","model":"quadratic","d":30,"K":3,"T":200,
                "eta":0.05,"mu":1e-3,"run_seed":37,"eval_every":50,
                "dataset":{"samples":30,"offset_sigma":0.2}}"#,
        ),
    ];
    let mut pass = true;
    let mut notes = Vec::new();
    for (name, text) in configs {
        let cfg_path = dir.path().join(format!("{name}.json"));
        std::fs::write(&cfg_path, text).unwrap();
        for attempt in ["a", "b"] {
            let out = dir.path().join(format!("{name}-{attempt}"));
            let status = std::process::Command::new(bin)
                .args(["train", "--config"])
                .arg(&cfg_path)
                .arg("--out-dir")
                .arg(&out)
                .status()
                .unwrap();
            assert!(status.success(), "train invocation failed for {name}");
        }
        for file in ["history.csv", "final.params", "run.orbit"] {
            let a = std::fs::read(dir.path().join(format!("{name}-a")).join(file)).unwrap();
            let b = std::fs::read(dir.path().join(format!("{name}-b")).join(file)).unwrap();
            if a != b {
                pass = false;
                notes.push(format!("{name}/{file} differs"));
            }
        }
    }
    if notes.is_empty() {
        notes.push(
            "history.csv, final.params, run.orbit byte-identical across reruns \
             for dp_feedsign, zo_fedsgd, fedsgd invocations"
                .into(),
        );
    }
    verdict("criterion 12 rerun determinism", start, pass, 120.0, &notes.join(", "));
}
