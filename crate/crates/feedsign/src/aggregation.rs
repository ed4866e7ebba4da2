//! Server-side aggregation rules and their exact per-round communication
//! prices.
//!
//! Four rules, in decreasing order of bytes on the wire:
//!
//! * `FedSgd`: clients upload full 32-bit gradients, the server returns the
//!   averaged model: `32 d` bits each way per client.
//! * `ZoFedSgd`: clients upload a 32-bit projection plus a 32-bit direction
//!   seed; the server rebroadcasts all `K` pairs: 64 bits up, `64 K` down.
//! * `FeedSign`: clients upload one sign bit; the server broadcasts the
//!   majority vote: 1 bit each way. The direction seed is the step index by
//!   shared convention, so it costs nothing to communicate.
//! * `DpFeedSign`: same wire format as `FeedSign`; the broadcast bit is
//!   drawn from an exponential mechanism over the two outcomes, giving
//!   (epsilon, 0) differential privacy for each client's vote.
//!
//! Aggregations are deterministic reductions in ascending client order;
//! `DpFeedSign` additionally consumes exactly one uniform draw from a noise
//! stream owned by the caller.

use crate::error::{Error, Result};
use crate::prng::DirectionStream;
use crate::zo::{Projection, SignVote};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AggregationRule {
    FedSgd,
    ZoFedSgd,
    FeedSign,
    DpFeedSign { epsilon: f64 },
}

impl AggregationRule {
    /// Stable short name, also used in config files and CSV output.
    pub fn name(&self) -> &'static str {
        match self {
            AggregationRule::FedSgd => "fedsgd",
            AggregationRule::ZoFedSgd => "zo_fedsgd",
            AggregationRule::FeedSign => "feedsign",
            AggregationRule::DpFeedSign { .. } => "dp_feedsign",
        }
    }

    /// True for the rules whose wire message is a single sign bit.
    pub fn is_sign_rule(&self) -> bool {
        matches!(self, AggregationRule::FeedSign | AggregationRule::DpFeedSign { .. })
    }
}

/// Exact bits moved in one round. Uplink is per participating client;
/// downlink is the total broadcast (identical for every listener).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CommCost {
    pub uplink_bits_per_client: u64,
    pub downlink_bits: u64,
}

/// The communication price of one round of `rule` with `clients`
/// participants on a `dim`-parameter model.
pub fn comm_cost(rule: &AggregationRule, clients: usize, dim: usize) -> CommCost {
    match rule {
        AggregationRule::FedSgd => CommCost {
            uplink_bits_per_client: 32 * dim as u64,
            downlink_bits: 32 * dim as u64,
        },
        AggregationRule::ZoFedSgd => CommCost {
            uplink_bits_per_client: 64,
            downlink_bits: 64 * clients as u64,
        },
        AggregationRule::FeedSign | AggregationRule::DpFeedSign { .. } => {
            CommCost { uplink_bits_per_client: 1, downlink_bits: 1 }
        }
    }
}

/// Mean projection value, summed in ascending client-index order so the
/// floating-point reduction is bit-reproducible regardless of input order.
pub fn aggregate_zo_fedsgd(projections: &[Projection]) -> Result<f64> {
    if projections.is_empty() {
        return Err(Error::EmptyAggregation);
    }
    let mut order: Vec<&Projection> = projections.iter().collect();
    order.sort_by_key(|p| p.client);
    let sum: f64 = order.iter().map(|p| p.value).sum();
    let mean = sum / projections.len() as f64;
    if !mean.is_finite() {
        return Err(Error::NonFiniteProjection { value: mean });
    }
    Ok(mean)
}

/// Majority vote over sign messages; a tie goes to `Plus`, matching the
/// zero-goes-up convention of [`crate::zo::sign`]. Integer arithmetic, so the
/// result is independent of vote order.
pub fn aggregate_feedsign(votes: &[SignVote]) -> Result<SignVote> {
    if votes.is_empty() {
        return Err(Error::EmptyAggregation);
    }
    let total: i64 = votes.iter().map(|v| v.unit()).sum();
    Ok(if total < 0 { SignVote::Minus } else { SignVote::Plus })
}

/// Probability that the private vote comes out `Plus` given the tally.
///
/// With `S` the integer vote sum, the mechanism scores the outcomes
/// `q(+1) = K/2 + S` and `q(-1) = K/2 - S` and draws from
/// `P(o) = exp(eps q(o) / 4) / sum exp(eps q / 4)`. Flipping one client's
/// vote moves each score by 2, so the odds of either outcome move by at most
/// `exp(eps)`: the (epsilon, 0) guarantee. Computed with the larger score
/// subtracted first so large budgets cannot overflow the exponentials.
pub fn dp_plus_probability(plus: usize, minus: usize, epsilon: f64) -> Result<f64> {
    if plus + minus == 0 {
        return Err(Error::EmptyAggregation);
    }
    if !epsilon.is_finite() || epsilon <= 0.0 {
        return Err(Error::InvalidEpsilon { epsilon });
    }
    let k = (plus + minus) as f64;
    let s = plus as f64 - minus as f64;
    let q_plus = 0.5 * k + s;
    let q_minus = 0.5 * k - s;
    let top = q_plus.max(q_minus);
    let e_plus = (epsilon * (q_plus - top) / 4.0).exp();
    let e_minus = (epsilon * (q_minus - top) / 4.0).exp();
    Ok(e_plus / (e_plus + e_minus))
}

/// Differentially private majority vote: tallies the signs, then samples the
/// broadcast bit from the exponential mechanism using one uniform draw from
/// `noise`. The caller owns the noise stream; advancing it is this
/// function's only side effect.
pub fn aggregate_dp_feedsign(
    votes: &[SignVote],
    epsilon: f64,
    noise: &mut DirectionStream,
) -> Result<SignVote> {
    if votes.is_empty() {
        return Err(Error::EmptyAggregation);
    }
    let plus = votes.iter().filter(|v| **v == SignVote::Plus).count();
    let p_plus = dp_plus_probability(plus, votes.len() - plus, epsilon)?;
    let u = noise.next_uniform();
    Ok(if u < p_plus { SignVote::Plus } else { SignVote::Minus })
}
