//! Model orbits: a training trajectory stored as the per-round wire messages
//! instead of the weights they produce.
//!
//! Because every update is a deterministic function of (seed, scalar), the
//! full trajectory of a run is recoverable from its initial parameters plus
//! one tiny record per round. A 2000-round sign-vote run serializes to a
//! 62-byte header plus 250 bytes of packed vote bits; storing the final
//! weights of a d = 500 model directly would take 4000 bytes, and of a
//! billion-parameter model 8 GB. Replay applies the identical arithmetic
//! (same helper functions, same order) that training applied, so replayed
//! parameters match the live run bit for bit.
//!
//! # File format (version 1, all integers and floats little-endian)
//!
//! ```text
//! offset size field
//!      0    4 magic "FSGN"
//!      4    1 version (1)
//!      5    1 rule tag: 0 fedsgd, 1 zo_fedsgd, 2 feedsign, 3 dp_feedsign
//!      6    8 epsilon (f64; 0.0 unless rule is dp_feedsign)
//!     14    4 clients (u32)
//!     18    4 model dimension (u32)
//!     22    8 steps T (u64)
//!     30    8 eta (f64)
//!     38    8 mu (f64)
//!     46    8 run seed (u64)
//!     54    8 model-spec digest (u64)
//!     62    - payload
//! ```
//!
//! Payload by rule:
//!
//! * `feedsign` / `dp_feedsign`: `ceil(T / 8)` bytes. Bit `i % 8` of byte
//!   `i / 8` (least significant bit first) holds the broadcast vote of step
//!   `i`, 1 encoding +1. Unused trailing bits must be zero.
//! * `zo_fedsgd`: `T * clients` records of 12 bytes each (direction seed
//!   as u64, then the 32-bit projection), in step order, clients
//!   ascending within a step. Projections are rounded to 32 bits *before*
//!   aggregation during training, so the file is exactly what the update
//!   arithmetic consumed.
//! * `fedsgd`: one f64 per step holding the norm of the applied mean
//!   gradient. First-order runs move full gradients, which an orbit does not
//!   capture; their orbit is a loss-free trace for bookkeeping and refuses to
//!   replay.
//!
//! Steps are implicit: entry `i` is step `i`, entries are contiguous from 0.

use crate::aggregation::AggregationRule;
use crate::error::{Error, Result};
use crate::federation::FederationState;
use crate::prng::{perturb_in_place, Seed};
use crate::zo::SignVote;
use std::path::Path;

pub const MAGIC: [u8; 4] = *b"FSGN";
pub const VERSION: u8 = 1;
pub const HEADER_LEN: usize = 62;

/// One `zo_fedsgd` wire record: the direction seed and the projection as it
/// crossed the wire (32-bit).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairRecord {
    pub seed: u64,
    pub projection: f32,
}

/// What one round contributed to the orbit.
#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    /// Broadcast vote of a sign rule.
    SignVote(SignVote),
    /// Norm of the applied mean gradient under `fedsgd` (trace only).
    MeanProjection(f64),
    /// All client (seed, projection) pairs of a `zo_fedsgd` round.
    PairList(Vec<PairRecord>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrbitEntry {
    pub step: u64,
    pub payload: Payload,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrbitHeader {
    pub rule: AggregationRule,
    pub clients: usize,
    pub dim: usize,
    /// Number of recorded steps; maintained by [`Orbit::push`].
    pub steps: u64,
    pub eta: f64,
    pub mu: f64,
    pub run_seed: Seed,
    pub spec_digest: u64,
}

/// A header plus its contiguous entries. Construct with [`Orbit::new`] and
/// grow with [`Orbit::push`], which enforce that payload variants match the
/// rule and that steps stay contiguous.
#[derive(Debug, Clone, PartialEq)]
pub struct Orbit {
    pub header: OrbitHeader,
    entries: Vec<OrbitEntry>,
}

fn rule_tag(rule: &AggregationRule) -> u8 {
    match rule {
        AggregationRule::FedSgd => 0,
        AggregationRule::ZoFedSgd => 1,
        AggregationRule::FeedSign => 2,
        AggregationRule::DpFeedSign { .. } => 3,
    }
}

impl Orbit {
    pub fn new(header: OrbitHeader) -> Result<Orbit> {
        if header.steps != 0 {
            return Err(Error::OrbitFormat(
                "a new orbit starts empty; steps are counted by push".into(),
            ));
        }
        if header.clients == 0 {
            return Err(Error::OrbitFormat("orbit needs at least one client".into()));
        }
        if u32::try_from(header.clients).is_err() || u32::try_from(header.dim).is_err() {
            return Err(Error::OrbitFormat("clients and dimension must fit in 32 bits".into()));
        }
        if let AggregationRule::DpFeedSign { epsilon } = header.rule {
            if !epsilon.is_finite() || epsilon <= 0.0 {
                return Err(Error::InvalidEpsilon { epsilon });
            }
        }
        Ok(Orbit { header, entries: Vec::new() })
    }

    pub fn entries(&self) -> &[OrbitEntry] {
        &self.entries
    }

    /// Append the payload of the next step. The step index is implicit
    /// (entries are contiguous from zero); the payload variant must match
    /// the declared rule, and a pair list must have exactly one record per
    /// client.
    pub fn push(&mut self, payload: Payload) -> Result<()> {
        let ok = match (&self.header.rule, &payload) {
            (AggregationRule::FeedSign | AggregationRule::DpFeedSign { .. }, Payload::SignVote(_)) => true,
            (AggregationRule::FedSgd, Payload::MeanProjection(_)) => true,
            (AggregationRule::ZoFedSgd, Payload::PairList(pairs)) => {
                if pairs.len() != self.header.clients {
                    return Err(Error::OrbitFormat(format!(
                        "pair list has {} records for {} clients",
                        pairs.len(),
                        self.header.clients
                    )));
                }
                true
            }
            _ => false,
        };
        if !ok {
            return Err(Error::OrbitFormat(format!(
                "payload variant does not match rule {}",
                self.header.rule.name()
            )));
        }
        self.entries.push(OrbitEntry { step: self.header.steps, payload });
        self.header.steps += 1;
        Ok(())
    }

    /// The first `steps` entries as their own orbit (a valid prefix of the
    /// run, replayable to the corresponding mid-training checkpoint).
    pub fn prefix(&self, steps: u64) -> Result<Orbit> {
        if steps > self.header.steps {
            return Err(Error::OrbitFormat(format!(
                "prefix of {steps} steps from an orbit of {}",
                self.header.steps
            )));
        }
        let mut header = self.header.clone();
        header.steps = steps;
        Ok(Orbit { header, entries: self.entries[..steps as usize].to_vec() })
    }

    pub fn serialize(&self) -> Vec<u8> {
        debug_assert_eq!(self.header.steps as usize, self.entries.len());
        let h = &self.header;
        let mut out = Vec::with_capacity(HEADER_LEN + self.payload_len());
        out.extend_from_slice(&MAGIC);
        out.push(VERSION);
        out.push(rule_tag(&h.rule));
        let epsilon = match h.rule {
            AggregationRule::DpFeedSign { epsilon } => epsilon,
            _ => 0.0,
        };
        out.extend_from_slice(&epsilon.to_le_bytes());
        out.extend_from_slice(&(h.clients as u32).to_le_bytes());
        out.extend_from_slice(&(h.dim as u32).to_le_bytes());
        out.extend_from_slice(&h.steps.to_le_bytes());
        out.extend_from_slice(&h.eta.to_le_bytes());
        out.extend_from_slice(&h.mu.to_le_bytes());
        out.extend_from_slice(&h.run_seed.0.to_le_bytes());
        out.extend_from_slice(&h.spec_digest.to_le_bytes());
        match h.rule {
            AggregationRule::FeedSign | AggregationRule::DpFeedSign { .. } => {
                let mut bits = vec![0u8; self.entries.len().div_ceil(8)];
                for (i, e) in self.entries.iter().enumerate() {
                    if let Payload::SignVote(SignVote::Plus) = e.payload {
                        bits[i / 8] |= 1 << (i % 8);
                    }
                }
                out.extend_from_slice(&bits);
            }
            AggregationRule::ZoFedSgd => {
                for e in &self.entries {
                    if let Payload::PairList(pairs) = &e.payload {
                        for p in pairs {
                            out.extend_from_slice(&p.seed.to_le_bytes());
                            out.extend_from_slice(&p.projection.to_le_bytes());
                        }
                    }
                }
            }
            AggregationRule::FedSgd => {
                for e in &self.entries {
                    if let Payload::MeanProjection(m) = &e.payload {
                        out.extend_from_slice(&m.to_le_bytes());
                    }
                }
            }
        }
        out
    }

    fn payload_len(&self) -> usize {
        let t = self.header.steps as usize;
        match self.header.rule {
            AggregationRule::FeedSign | AggregationRule::DpFeedSign { .. } => t.div_ceil(8),
            AggregationRule::ZoFedSgd => 12 * self.header.clients * t,
            AggregationRule::FedSgd => 8 * t,
        }
    }

    pub fn deserialize(bytes: &[u8]) -> Result<Orbit> {
        if bytes.len() < HEADER_LEN {
            return Err(Error::OrbitFormat(format!(
                "file of {} bytes is shorter than the {HEADER_LEN}-byte header",
                bytes.len()
            )));
        }
        if bytes[0..4] != MAGIC {
            return Err(Error::OrbitFormat("bad magic; not an orbit file".into()));
        }
        if bytes[4] != VERSION {
            return Err(Error::OrbitFormat(format!("unsupported version {}", bytes[4])));
        }
        let tag = bytes[5];
        let epsilon = f64::from_le_bytes(bytes[6..14].try_into().unwrap());
        let rule = match tag {
            0 => AggregationRule::FedSgd,
            1 => AggregationRule::ZoFedSgd,
            2 => AggregationRule::FeedSign,
            3 => {
                if !epsilon.is_finite() || epsilon <= 0.0 {
                    return Err(Error::OrbitFormat(format!(
                        "dp_feedsign orbit carries invalid epsilon {epsilon}"
                    )));
                }
                AggregationRule::DpFeedSign { epsilon }
            }
            _ => return Err(Error::OrbitFormat(format!("unknown rule tag {tag}"))),
        };
        if tag != 3 && epsilon != 0.0 {
            return Err(Error::OrbitFormat(format!(
                "non-private rule with nonzero epsilon field {epsilon}"
            )));
        }
        let clients = u32::from_le_bytes(bytes[14..18].try_into().unwrap()) as usize;
        let dim = u32::from_le_bytes(bytes[18..22].try_into().unwrap()) as usize;
        let steps = u64::from_le_bytes(bytes[22..30].try_into().unwrap());
        let eta = f64::from_le_bytes(bytes[30..38].try_into().unwrap());
        let mu = f64::from_le_bytes(bytes[38..46].try_into().unwrap());
        let run_seed = Seed(u64::from_le_bytes(bytes[46..54].try_into().unwrap()));
        let spec_digest = u64::from_le_bytes(bytes[54..62].try_into().unwrap());
        if clients == 0 {
            return Err(Error::OrbitFormat("orbit declares zero clients".into()));
        }
        let t = usize::try_from(steps)
            .map_err(|_| Error::OrbitFormat(format!("step count {steps} too large")))?;
        let payload = &bytes[HEADER_LEN..];
        let expect = match rule {
            AggregationRule::FeedSign | AggregationRule::DpFeedSign { .. } => t.div_ceil(8),
            AggregationRule::ZoFedSgd => 12usize
                .checked_mul(clients)
                .and_then(|b| b.checked_mul(t))
                .ok_or_else(|| Error::OrbitFormat("payload size overflows".into()))?,
            AggregationRule::FedSgd => 8 * t,
        };
        if payload.len() < expect {
            return Err(Error::OrbitFormat(format!(
                "truncated orbit: payload holds {} of {expect} bytes",
                payload.len()
            )));
        }
        if payload.len() > expect {
            return Err(Error::OrbitFormat(format!(
                "{} trailing bytes after the payload",
                payload.len() - expect
            )));
        }
        let mut orbit = Orbit::new(OrbitHeader {
            rule,
            clients,
            dim,
            steps: 0,
            eta,
            mu,
            run_seed,
            spec_digest,
        })?;
        match rule {
            AggregationRule::FeedSign | AggregationRule::DpFeedSign { .. } => {
                for i in 0..t {
                    let bit = (payload[i / 8] >> (i % 8)) & 1;
                    orbit.push(Payload::SignVote(if bit == 1 { SignVote::Plus } else { SignVote::Minus }))?;
                }
                if t % 8 != 0 && payload[t / 8] >> (t % 8) != 0 {
                    return Err(Error::OrbitFormat("nonzero padding bits after the last vote".into()));
                }
            }
            AggregationRule::ZoFedSgd => {
                for step in 0..t {
                    let mut pairs = Vec::with_capacity(clients);
                    for k in 0..clients {
                        let at = (step * clients + k) * 12;
                        pairs.push(PairRecord {
                            seed: u64::from_le_bytes(payload[at..at + 8].try_into().unwrap()),
                            projection: f32::from_le_bytes(payload[at + 8..at + 12].try_into().unwrap()),
                        });
                    }
                    orbit.push(Payload::PairList(pairs))?;
                }
            }
            AggregationRule::FedSgd => {
                for step in 0..t {
                    let at = step * 8;
                    orbit.push(Payload::MeanProjection(f64::from_le_bytes(
                        payload[at..at + 8].try_into().unwrap(),
                    )))?;
                }
            }
        }
        Ok(orbit)
    }

    pub fn write_file(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.serialize()).map_err(|e| Error::file("write", path, e))
    }

    pub fn read_file(path: &Path) -> Result<Orbit> {
        let bytes = std::fs::read(path).map_err(|e| Error::file("read", path, e))?;
        Orbit::deserialize(&bytes)
    }
}

/// Apply one sign-rule update: `w -= eta * vote * z(step)` with the
/// direction regenerated from the step index. The single arithmetic path
/// shared by training and replay.
pub(crate) fn apply_sign_update(params: &mut [f64], eta: f64, step: u64, vote: SignVote) {
    perturb_in_place(params, Seed(step), -eta * vote.value());
}

/// Apply one `zo_fedsgd` update: for each client pair in order,
/// `w -= (eta * p / K) * z(seed)` with the projection widened from its
/// 32-bit wire value. Shared by training and replay.
pub(crate) fn apply_pair_update(params: &mut [f64], eta: f64, clients: usize, pairs: &[PairRecord]) {
    let k = clients as f64;
    for rec in pairs {
        perturb_in_place(params, Seed(rec.seed), -eta * (rec.projection as f64) / k);
    }
}

/// Replay an orbit from `initial`, returning the final parameters. `fedsgd`
/// orbits are traces, not replayable recordings, and refuse.
pub fn replay(initial: &[f64], orbit: &Orbit) -> Result<Vec<f64>> {
    replay_with(initial, orbit, |_, _| ())
}

/// [`replay`] with a per-step observer called after each applied entry with
/// the step index and the parameters as of the end of that step; useful for
/// checkpoint comparison without replaying O(T) prefixes.
pub fn replay_with(
    initial: &[f64],
    orbit: &Orbit,
    mut on_step: impl FnMut(u64, &[f64]),
) -> Result<Vec<f64>> {
    let h = &orbit.header;
    if initial.len() != h.dim {
        return Err(Error::Replay(format!(
            "initial parameters have {} entries, orbit expects {}",
            initial.len(),
            h.dim
        )));
    }
    if matches!(h.rule, AggregationRule::FedSgd) {
        return Err(Error::Replay(
            "fedsgd orbits record a gradient-norm trace, not a replayable trajectory".into(),
        ));
    }
    let mut params = initial.to_vec();
    for entry in &orbit.entries {
        match &entry.payload {
            Payload::SignVote(v) => apply_sign_update(&mut params, h.eta, entry.step, *v),
            Payload::PairList(pairs) => apply_pair_update(&mut params, h.eta, h.clients, pairs),
            Payload::MeanProjection(_) => unreachable!("fedsgd rejected above"),
        }
        on_step(entry.step, &params);
    }
    Ok(params)
}

/// Late-joiner reconstruction: check that the orbit describes the live run,
/// then replay the first `live.step` entries from `initial`. The result
/// matches the live parameters bit for bit.
pub fn catch_up(initial: &[f64], orbit: &Orbit, live: &FederationState) -> Result<Vec<f64>> {
    let h = &orbit.header;
    let mismatch = |what: &str| -> Error {
        Error::Replay(format!("orbit does not describe this run: {what} differs"))
    };
    if h.spec_digest != live.spec.digest() {
        return Err(mismatch("model spec digest"));
    }
    if h.dim != live.params.len() {
        return Err(mismatch("model dimension"));
    }
    if h.rule.name() != live.rule.name() {
        return Err(mismatch("aggregation rule"));
    }
    if let (AggregationRule::DpFeedSign { epsilon: a }, AggregationRule::DpFeedSign { epsilon: b }) =
        (&h.rule, &live.rule)
    {
        if a.to_bits() != b.to_bits() {
            return Err(mismatch("privacy budget"));
        }
    }
    if h.eta.to_bits() != live.eta.to_bits() || h.mu.to_bits() != live.mu.to_bits() {
        return Err(mismatch("step size or perturbation scale"));
    }
    if h.clients != live.shards.len() {
        return Err(mismatch("client count"));
    }
    if h.run_seed != live.run_seed {
        return Err(mismatch("run seed"));
    }
    if h.steps < live.step {
        return Err(Error::Replay(format!(
            "orbit covers {} steps but the live run is at step {}; cannot catch up across the gap",
            h.steps, live.step
        )));
    }
    replay(initial, &orbit.prefix(live.step)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sign_orbit(votes: &[SignVote]) -> Orbit {
        let mut o = Orbit::new(OrbitHeader {
            rule: AggregationRule::FeedSign,
            clients: 2,
            dim: 3,
            steps: 0,
            eta: 1e-3,
            mu: 1e-3,
            run_seed: Seed(9),
            spec_digest: 0xABCD,
        })
        .unwrap();
        for &v in votes {
            o.push(Payload::SignVote(v)).unwrap();
        }
        o
    }

    #[test]
    fn push_checks_variant_and_pair_len() {
        let mut o = sign_orbit(&[]);
        assert!(o.push(Payload::MeanProjection(1.0)).is_err());
        assert!(o.push(Payload::SignVote(SignVote::Plus)).is_ok());
        assert_eq!(o.header.steps, 1);

        let mut zo = Orbit::new(OrbitHeader {
            rule: AggregationRule::ZoFedSgd,
            clients: 3,
            dim: 2,
            steps: 0,
            eta: 0.1,
            mu: 1e-3,
            run_seed: Seed(0),
            spec_digest: 1,
        })
        .unwrap();
        let short = vec![PairRecord { seed: 1, projection: 0.5 }];
        assert!(zo.push(Payload::PairList(short)).is_err());
    }

    #[test]
    fn round_trip_all_rules() {
        use SignVote::{Minus, Plus};
        let o = sign_orbit(&[Plus, Minus, Plus, Plus, Minus, Minus, Plus, Minus, Plus]);
        assert_eq!(Orbit::deserialize(&o.serialize()).unwrap(), o);

        let mut dp = Orbit::new(OrbitHeader {
            rule: AggregationRule::DpFeedSign { epsilon: 2.5 },
            clients: 4,
            dim: 7,
            steps: 0,
            eta: 0.01,
            mu: 1e-4,
            run_seed: Seed(77),
            spec_digest: 42,
        })
        .unwrap();
        for v in [Minus, Minus, Plus] {
            dp.push(Payload::SignVote(v)).unwrap();
        }
        assert_eq!(Orbit::deserialize(&dp.serialize()).unwrap(), dp);

        let mut zo = Orbit::new(OrbitHeader {
            rule: AggregationRule::ZoFedSgd,
            clients: 2,
            dim: 5,
            steps: 0,
            eta: 0.05,
            mu: 1e-3,
            run_seed: Seed(3),
            spec_digest: 7,
        })
        .unwrap();
        for s in 0..3u64 {
            zo.push(Payload::PairList(vec![
                PairRecord { seed: 10 + s, projection: 0.25 * s as f32 },
                PairRecord { seed: 20 + s, projection: -1.5 },
            ]))
            .unwrap();
        }
        assert_eq!(Orbit::deserialize(&zo.serialize()).unwrap(), zo);

        let mut fo = Orbit::new(OrbitHeader {
            rule: AggregationRule::FedSgd,
            clients: 3,
            dim: 4,
            steps: 0,
            eta: 0.1,
            mu: 1e-3,
            run_seed: Seed(5),
            spec_digest: 9,
        })
        .unwrap();
        for m in [0.5, 0.25, 0.125] {
            fo.push(Payload::MeanProjection(m)).unwrap();
        }
        assert_eq!(Orbit::deserialize(&fo.serialize()).unwrap(), fo);
    }

    #[test]
    fn size_laws() {
        use SignVote::Plus;
        let o = sign_orbit(&vec![Plus; 2000]);
        assert_eq!(o.serialize().len(), HEADER_LEN + 250);

        let mut zo = Orbit::new(OrbitHeader {
            rule: AggregationRule::ZoFedSgd,
            clients: 5,
            dim: 10,
            steps: 0,
            eta: 0.1,
            mu: 1e-3,
            run_seed: Seed(0),
            spec_digest: 0,
        })
        .unwrap();
        for _ in 0..7 {
            zo.push(Payload::PairList(vec![PairRecord { seed: 0, projection: 0.0 }; 5])).unwrap();
        }
        assert_eq!(zo.serialize().len(), HEADER_LEN + 12 * 5 * 7);
    }

    #[test]
    fn tampered_bytes_are_rejected() {
        use SignVote::Plus;
        let o = sign_orbit(&[Plus, Plus, Plus]);
        let good = o.serialize();

        let mut bad = good.clone();
        bad[0] = b'X';
        assert!(Orbit::deserialize(&bad).is_err(), "bad magic");

        let mut bad = good.clone();
        bad[4] = 9;
        assert!(Orbit::deserialize(&bad).is_err(), "bad version");

        let mut bad = good.clone();
        bad[5] = 7;
        assert!(Orbit::deserialize(&bad).is_err(), "bad rule tag");

        let bad = &good[..good.len() - 1];
        assert!(Orbit::deserialize(bad).is_err(), "truncated payload");

        let mut bad = good.clone();
        bad.push(0);
        assert!(Orbit::deserialize(&bad).is_err(), "trailing bytes");

        let mut bad = good.clone();
        *bad.last_mut().unwrap() |= 0b1000; // padding bit beyond step 2
        assert!(Orbit::deserialize(&bad).is_err(), "nonzero padding");

        // Nonzero epsilon on a non-private rule.
        let mut bad = good.clone();
        bad[6..14].copy_from_slice(&1.0f64.to_le_bytes());
        assert!(Orbit::deserialize(&bad).is_err(), "epsilon on feedsign");

        assert!(Orbit::deserialize(&good[..10]).is_err(), "short header");
    }

    #[test]
    fn replay_applies_sign_updates() {
        use SignVote::{Minus, Plus};
        let o = sign_orbit(&[Plus, Minus, Plus]);
        let initial = vec![0.5, -1.0, 2.0];
        let got = replay(&initial, &o).unwrap();
        let mut expected = initial.clone();
        for (t, v) in [(0u64, Plus), (1, Minus), (2, Plus)] {
            apply_sign_update(&mut expected, 1e-3, t, v);
        }
        assert_eq!(got, expected);
    }

    #[test]
    fn replay_checks_dimension_and_rule() {
        use SignVote::Plus;
        let o = sign_orbit(&[Plus]);
        assert!(matches!(replay(&[0.0; 2], &o), Err(Error::Replay(_))));

        let mut fo = Orbit::new(OrbitHeader {
            rule: AggregationRule::FedSgd,
            clients: 1,
            dim: 2,
            steps: 0,
            eta: 0.1,
            mu: 1e-3,
            run_seed: Seed(0),
            spec_digest: 0,
        })
        .unwrap();
        fo.push(Payload::MeanProjection(0.5)).unwrap();
        assert!(matches!(replay(&[0.0; 2], &fo), Err(Error::Replay(_))));
    }

    #[test]
    fn prefix_replays_to_midpoint() {
        use SignVote::{Minus, Plus};
        let o = sign_orbit(&[Plus, Minus, Plus, Minus]);
        let initial = vec![1.0, 1.0, 1.0];
        let mut checkpoints = Vec::new();
        replay_with(&initial, &o, |_, w| checkpoints.push(w.to_vec())).unwrap();
        for t in 1..=4u64 {
            let p = o.prefix(t).unwrap();
            assert_eq!(p.header.steps, t);
            let got = replay(&initial, &p).unwrap();
            assert_eq!(got, checkpoints[t as usize - 1], "prefix {t}");
        }
        assert!(o.prefix(5).is_err());
        // Empty prefix replays to the initial point.
        assert_eq!(replay(&initial, &o.prefix(0).unwrap()).unwrap(), initial);
    }
}
