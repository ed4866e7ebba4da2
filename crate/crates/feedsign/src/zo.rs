//! Zeroth-order gradient machinery: two-point finite-difference projections
//! along seeded Gaussian directions, and their sign votes.
//!
//! The central object is the scalar projection
//!
//! ```text
//! p = [L(w + mu z) - L(w - mu z)] / (2 mu),    z ~ N(0, I_d) from a seed
//! ```
//!
//! which estimates `z' grad L(w)` to `O(mu^2)`. A client that knows `p` and
//! the seed of `z` can rebuild the full gradient estimate `p * z` without
//! ever holding `z` alongside a second model copy, which is what keeps the
//! communicated state down to a seed and a scalar (or just a sign).

use crate::error::{Error, Result};
use crate::models::{loss, Batch, ModelSpec};
use crate::prng::{make_stream, perturb_in_place, Seed};

/// A client's scalar gradient projection: the finite-difference value, the
/// seed of the direction it was measured along, and the reporting client.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    pub value: f64,
    pub seed: Seed,
    pub client: usize,
}

impl Projection {
    /// Rejects non-finite values; a NaN or infinite projection must never
    /// reach aggregation or the wire.
    pub fn new(value: f64, seed: Seed, client: usize) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::NonFiniteProjection { value });
        }
        Ok(Projection { value, seed, client })
    }

    pub fn with_client(mut self, client: usize) -> Self {
        self.client = client;
        self
    }

    /// Same projection with the value replaced (checked); used for byzantine
    /// transforms and wire rounding.
    pub fn with_value(self, value: f64) -> Result<Self> {
        Projection::new(value, self.seed, self.client)
    }
}

/// Sign of a vote on the wire: one bit, `Plus` encoding +1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SignVote {
    Plus,
    Minus,
}

impl SignVote {
    pub fn value(self) -> f64 {
        match self {
            SignVote::Plus => 1.0,
            SignVote::Minus => -1.0,
        }
    }

    pub fn unit(self) -> i64 {
        match self {
            SignVote::Plus => 1,
            SignVote::Minus => -1,
        }
    }

    pub fn flipped(self) -> SignVote {
        match self {
            SignVote::Plus => SignVote::Minus,
            SignVote::Minus => SignVote::Plus,
        }
    }
}

/// Sign with the tie broken upward: zero (either signedness) maps to `Plus`,
/// so the result is always a usable one-bit message. NaN has no sign.
pub fn sign(x: f64) -> Result<SignVote> {
    if x.is_nan() {
        return Err(Error::NanSign);
    }
    Ok(if x < 0.0 { SignVote::Minus } else { SignVote::Plus })
}

/// Two-point finite-difference projection of the batch gradient at `params`
/// along the direction of `seed`.
///
/// The probe walks the parameters in place: `+mu z` for the first evaluation,
/// then `-2 mu z` for the second, regenerating `z` entry by entry from the
/// seed each time. The final reset is a copy of the original entries rather
/// than a third `+mu z` step: the empirical failure rate of the arithmetic
/// walk is measured in [`perturb_in_place`]'s docs, and replayable orbits
/// need the restore to be bit-exact, not approximately exact. On return
/// (including every error path) `params` holds its original bits.
pub fn spsa_projection(
    spec: &ModelSpec,
    params: &mut [f64],
    batch: &Batch,
    seed: Seed,
    mu: f64,
) -> Result<Projection> {
    if !mu.is_finite() || mu <= 0.0 {
        return Err(Error::InvalidMu { mu });
    }
    let snapshot = params.to_vec();
    perturb_in_place(params, seed, mu);
    let plus = loss(spec, params, batch);
    perturb_in_place(params, seed, -2.0 * mu);
    let minus = loss(spec, params, batch);
    params.copy_from_slice(&snapshot);
    let (plus, minus) = (plus?, minus?);
    for l in [plus, minus] {
        if !l.is_finite() {
            return Err(Error::NonFiniteLoss { loss: l });
        }
    }
    Projection::new((plus - minus) / (2.0 * mu), seed, 0)
}

/// Rebuild the full-dimensional gradient estimate `p.value * z` from a
/// projection, regenerating the same `z` that [`spsa_projection`] probed
/// along (same seed, same stream, same `dim` draws).
pub fn zo_gradient_estimate(p: &Projection, dim: usize) -> Vec<f64> {
    let mut stream = make_stream(p.seed);
    (0..dim).map(|_| p.value * stream.next_gaussian()).collect()
}
