//! Measurement tools for the quantities the update rules' convergence
//! behavior hinges on: how often a mini-batch flips the sign of a
//! directional derivative, the half-normal mean of a Gaussian projection,
//! geometric-decay-to-a-floor fits of loss histories, the unbiasedness of a
//! sign channel under bounded symmetric noise, and the composition of
//! honest estimation error with byzantine corruption.
//!
//! Everything here is read-only diagnostics over existing runs or model
//! states; nothing feeds back into training.

use crate::error::{Error, Result};
use crate::federation::RoundReport;
use crate::models::{grad, Batch, Dataset, ModelSpec};
use crate::prng::{check_probability, derive_seed, make_stream, Seed};
use crate::zo::{sign, spsa_projection};

/// How often mini-batch noise reverses the sign of one directional
/// derivative, measured by resampling batches along a fixed direction.
#[derive(Debug, Clone, PartialEq)]
pub struct SignReversalEstimate {
    /// Training step this estimate describes; informational, set by the
    /// caller (0 for standalone measurements).
    pub step: u64,
    /// Seed of the probed direction.
    pub seed: Seed,
    /// The reference: `z . grad L` on the full dataset.
    pub true_projection: f64,
    /// Fraction of batches whose finite-difference sign disagreed with the
    /// reference.
    pub p_hat: f64,
    /// Batches drawn.
    pub batches: usize,
    /// Rows per batch.
    pub batch_size: usize,
}

/// Estimate the sign-reversing probability of mini-batch projections along
/// the direction of `direction`: compute the exact directional derivative
/// `z . grad L` on the full dataset, then draw `batches` batches of
/// `batch_size` rows (with replacement, from `sampler`) and report the
/// fraction whose two-point estimate has the opposite sign.
///
/// A `batch_size` of at least the dataset size uses the full dataset every
/// time, so the only remaining disagreement is finite-difference truncation;
/// with a sane `mu` that fraction is zero.
pub fn estimate_sign_reversing_prob(
    spec: &ModelSpec,
    params: &[f64],
    direction: Seed,
    dataset: &Dataset,
    batch_size: usize,
    batches: usize,
    mu: f64,
    sampler: Seed,
) -> Result<SignReversalEstimate> {
    if batches == 0 {
        return Err(Error::InvalidArgument("batch count must be at least 1".into()));
    }
    if batch_size == 0 {
        return Err(Error::EmptyBatch);
    }
    let g = grad(spec, params, &Batch::full(dataset))?;
    let mut dir = make_stream(direction);
    let mut true_projection = 0.0;
    for gi in &g {
        true_projection += dir.next_gaussian() * gi;
    }
    if true_projection == 0.0 {
        return Err(Error::DegenerateDirection);
    }
    let reference = sign(true_projection)?;
    let n = dataset.len();
    let full_batch = batch_size >= n;
    let mut rows = make_stream(sampler);
    let mut scratch = params.to_vec();
    let mut flipped = 0usize;
    for _ in 0..batches {
        let p = if full_batch {
            spsa_projection(spec, &mut scratch, &Batch::full(dataset), direction, mu)?
        } else {
            let indices: Vec<usize> = (0..batch_size).map(|_| rows.next_index(n)).collect();
            spsa_projection(spec, &mut scratch, &Batch::subset(dataset, &indices)?, direction, mu)?
        };
        if sign(p.value)? != reference {
            flipped += 1;
        }
    }
    Ok(SignReversalEstimate {
        step: 0,
        seed: direction,
        true_projection,
        p_hat: flipped as f64 / batches as f64,
        batches,
        batch_size,
    })
}

/// Monte Carlo mean of `|z . g|` over fresh standard normal `z`. For any
/// nonzero `g` the exact value is `sqrt(2/pi) * ||g||`; at 10^5 samples the
/// estimate lands within 1% of it.
pub fn half_normal_check(g: &[f64], samples: usize, sampler: Seed) -> Result<f64> {
    if g.iter().all(|&x| x == 0.0) {
        return Err(Error::ZeroVector);
    }
    if samples == 0 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    let mut stream = make_stream(sampler);
    let mut total = 0.0;
    for _ in 0..samples {
        let mut dot = 0.0;
        for gi in g {
            dot += gi * stream.next_gaussian();
        }
        total += dot.abs();
    }
    Ok(total / samples as f64)
}

/// The exact half-normal mean `sqrt(2/pi) * ||g||` that
/// [`half_normal_check`] estimates.
pub fn half_normal_exact(g: &[f64]) -> f64 {
    let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
    (2.0 / std::f64::consts::PI).sqrt() * norm
}

/// A loss history summarized as geometric decay toward a floor:
/// `L_t - L* ~ (L_0 - L* - floor) * (1 - rate)^t + floor`.
#[derive(Debug, Clone, PartialEq)]
pub struct FloorFit {
    /// Per-step contraction factor, in (0, 1).
    pub rate: f64,
    /// Asymptotic optimality gap, at least 0.
    pub floor: f64,
    /// Root-mean-square misfit over the evaluated points.
    pub residual: f64,
    /// Evaluated (step, gap) points the fit used.
    pub points: usize,
}

/// Fit the decay-to-a-floor model to the evaluated losses of a run's
/// history. Extracts the `(step, loss)` pairs that carry a loss, subtracts
/// `loss_star`, and hands them to [`fit_error_floor_points`].
pub fn fit_error_floor(history: &[RoundReport], loss_star: f64) -> Result<FloorFit> {
    let points: Vec<(u64, f64)> = history
        .iter()
        .filter_map(|r| r.global_loss.map(|l| (r.step, l)))
        .collect();
    fit_error_floor_points(&points, loss_star)
}

const FLOOR_FIT_MIN_POINTS: usize = 50;

/// Quality gate: a fit whose RMS residual exceeds this fraction of the gap
/// range is reported as an error rather than a number, because the model
/// class visibly does not describe the data.
const FLOOR_FIT_RESIDUAL_FRACTION: f64 = 0.25;

/// Least-squares fit of `gap_t ~ a * r^t + floor` over `(step, loss)`
/// pairs, with `r = 1 - rate` scanned by a log grid over the rate and
/// refined by golden-section search; for each candidate `r` the remaining
/// two parameters are linear and solved exactly. A negative fitted floor is
/// clamped to zero (with the scale refitted under that constraint).
///
/// Needs at least 50 points. A loss below `loss_star` by more than float
/// dust is an error (the claimed optimum is wrong); an RMS residual above
/// 25% of the gap range is a fit-quality error.
pub fn fit_error_floor_points(points: &[(u64, f64)], loss_star: f64) -> Result<FloorFit> {
    if points.len() < FLOOR_FIT_MIN_POINTS {
        return Err(Error::FitHistory { len: points.len(), min: FLOOR_FIT_MIN_POINTS });
    }
    let tol = 1e-9 * loss_star.abs().max(1.0);
    let mut gaps = Vec::with_capacity(points.len());
    for &(step, l) in points {
        if !l.is_finite() || l - loss_star < -tol {
            return Err(Error::LossBelowOptimum { step, loss: l, loss_star });
        }
        gaps.push((step as f64, (l - loss_star).max(0.0)));
    }

    // Residual of the best linear fit (a, floor) at a fixed decay factor r.
    let fit_at = |r: f64| -> (f64, f64, f64) {
        let n = gaps.len() as f64;
        let (mut sx, mut sxx, mut sy, mut sxy) = (0.0, 0.0, 0.0, 0.0);
        for &(t, gap) in &gaps {
            let x = r.powf(t);
            sx += x;
            sxx += x * x;
            sy += gap;
            sxy += x * gap;
        }
        let det = sxx * n - sx * sx;
        let (mut a, mut floor) = if det.abs() > 1e-300 {
            ((sxy * n - sx * sy) / det, (sxx * sy - sx * sxy) / det)
        } else {
            // r so close to 1 the basis is constant; all signal in the floor.
            (0.0, sy / n)
        };
        if floor < 0.0 {
            floor = 0.0;
            a = if sxx > 0.0 { sxy / sxx } else { 0.0 };
        }
        let mut sq = 0.0;
        for &(t, gap) in &gaps {
            let e = gap - (a * r.powf(t) + floor);
            sq += e * e;
        }
        ((sq / n).sqrt(), a, floor)
    };

    // Scan the rate on a log grid, then polish the decay factor by
    // golden-section search inside the bracketing cells.
    let (lo, hi) = (1e-9f64, 0.999_999f64);
    let grid = 128;
    let mut best = (f64::INFINITY, lo);
    for i in 0..grid {
        let rate = lo * (hi / lo).powf(i as f64 / (grid - 1) as f64);
        let (res, _, _) = fit_at(1.0 - rate);
        if res < best.0 {
            best = (res, rate);
        }
    }
    let step = (hi / lo).powf(1.0 / (grid - 1) as f64);
    let (mut a_rate, mut b_rate) = ((best.1 / step).max(lo), (best.1 * step).min(hi));
    let phi = (5.0f64.sqrt() - 1.0) / 2.0;
    let mut c = b_rate - phi * (b_rate - a_rate);
    let mut d = a_rate + phi * (b_rate - a_rate);
    let (mut fc, _, _) = fit_at(1.0 - c);
    let (mut fd, _, _) = fit_at(1.0 - d);
    for _ in 0..200 {
        if fc < fd {
            b_rate = d;
            d = c;
            fd = fc;
            c = b_rate - phi * (b_rate - a_rate);
            fc = fit_at(1.0 - c).0;
        } else {
            a_rate = c;
            c = d;
            fc = fd;
            d = a_rate + phi * (b_rate - a_rate);
            fd = fit_at(1.0 - d).0;
        }
        if (b_rate - a_rate) < 1e-15 * b_rate {
            break;
        }
    }
    let rate = 0.5 * (a_rate + b_rate);
    let (residual, _, floor) = fit_at(1.0 - rate);

    let (gmin, gmax) = gaps
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(_, g)| (lo.min(g), hi.max(g)));
    let threshold = FLOOR_FIT_RESIDUAL_FRACTION * (gmax - gmin) + 1e-12;
    if residual > threshold {
        return Err(Error::FitQuality { residual, threshold });
    }
    Ok(FloorFit { rate, floor, residual, points: gaps.len() })
}

/// The one setting where transmitting only the sign loses nothing in
/// expectation: a scalar in `[-1, 1]` plus uniform noise on `[-1, 1]`. The
/// mean of `sign(p + noise)` equals `p` exactly, so a sign channel is an
/// unbiased estimator of the scalar. Checks a 21-point grid of `p` with
/// `trials` draws each and returns the largest deviation of the empirical
/// mean from `p`; the contract is `max deviation < 6 / sqrt(trials)`.
pub fn unbiasedness_special_case(trials: usize, sampler: Seed) -> Result<f64> {
    if trials < 10_000 {
        return Err(Error::InvalidArgument(format!(
            "need at least 10000 trials for a meaningful bound, got {trials}"
        )));
    }
    let mut stream = make_stream(sampler);
    let mut worst = 0.0f64;
    for i in 0..21 {
        let p = -1.0 + i as f64 / 10.0;
        let mut total = 0i64;
        for _ in 0..trials {
            let noise = 2.0 * stream.next_uniform() - 1.0;
            total += sign(p + noise)?.unit();
        }
        worst = worst.max((total as f64 / trials as f64 - p).abs());
    }
    Ok(worst)
}

/// Probability that a vote is wrong when honest votes err with probability
/// `p_e` and each client is independently byzantine (voting wrong
/// unconditionally) with probability `p_b`: the union
/// `p_e + p_b - p_e * p_b`.
pub fn compose_byzantine(p_e: f64, p_b: f64) -> Result<f64> {
    check_probability(p_e, "honest sign-reversal probability")?;
    check_probability(p_b, "byzantine probability")?;
    Ok(p_e + p_b - p_e * p_b)
}

/// Monte Carlo check of [`compose_byzantine`]: simulate `trials` votes
/// (byzantine with probability `p_b`, otherwise wrong with probability
/// `p_e`) and return `(predicted, measured)` wrong fractions.
pub fn byzantine_composition_check(
    p_e: f64,
    p_b: f64,
    trials: usize,
    sampler: Seed,
) -> Result<(f64, f64)> {
    if trials == 0 {
        return Err(Error::InvalidArgument("need at least one trial".into()));
    }
    let predicted = compose_byzantine(p_e, p_b)?;
    let mut stream = make_stream(derive_seed(sampler, &[p_e.to_bits(), p_b.to_bits()]));
    let mut wrong = 0usize;
    for _ in 0..trials {
        let byzantine = stream.next_uniform() < p_b;
        if byzantine || stream.next_uniform() < p_e {
            wrong += 1;
        }
    }
    Ok((predicted, wrong as f64 / trials as f64))
}
