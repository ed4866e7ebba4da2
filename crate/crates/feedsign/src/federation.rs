//! The federated round loop: data sharding, client roles, per-round
//! aggregation and update, and the training driver that produces a history
//! and an orbit.
//!
//! Everything a round consumes is derived deterministically from the run
//! seed, the step index, and the client id, so the same configuration always
//! produces the same trajectory, byte for byte, regardless of host or thread
//! count. Per-purpose seeds come from [`derive_seed`] under fixed labels;
//! the one exception is the sign-rule perturbation direction, which uses the
//! step index itself as the seed. That schedule is public by design: any
//! party that knows the current step can regenerate the direction, which is
//! what lets a one-bit broadcast move the whole model and lets a late joiner
//! rebuild the parameters from an orbit alone.

use crate::aggregation::{
    aggregate_dp_feedsign, aggregate_feedsign, aggregate_zo_fedsgd, comm_cost, AggregationRule,
};
use crate::error::{Error, Result};
use crate::models::{accuracy, grad, loss, Batch, Dataset, ModelSpec};
use crate::orbit::{apply_pair_update, apply_sign_update, Orbit, OrbitHeader, PairRecord, Payload};
use crate::prng::{derive_seed, make_stream, DirectionStream, Seed};
use crate::zo::{sign, spsa_projection, Projection, SignVote};
use std::io::Write;

const fn label(tag: &[u8; 8]) -> u64 {
    u64::from_le_bytes(*tag)
}

/// Seed-derivation labels. Each randomness consumer hangs off the run seed
/// under its own label (plus step and client where applicable), so streams
/// never collide and skipping one consumer never shifts another.
pub const LABEL_DIRECTION: u64 = label(b"zodirect");
pub const LABEL_BATCH: u64 = label(b"batchsel");
pub const LABEL_HET: u64 = label(b"hetnoise");
pub const LABEL_BYZANTINE: u64 = label(b"byzdraws");
pub const LABEL_INIT: u64 = label(b"initpara");
pub const LABEL_DP: u64 = label(b"dpcoinfl");
pub const LABEL_SHIFT: u64 = label(b"optshift");
pub const LABEL_PARTITION: u64 = label(b"partitio");
pub const LABEL_DATA: u64 = label(b"synthdat");

/// How a client behaves when asked for its contribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClientRole {
    Honest,
    /// Computes honestly, then reports the negation. Under a sign rule this
    /// is the strongest single-bit attack: the reported vote is wrong
    /// whenever the honest one was right.
    ByzantineReverse,
    /// Reports a standard normal draw without evaluating anything. The draw
    /// is keyed by (step, client) only, so rerunning with a different batch
    /// size yields the same garbage.
    ByzantineRandom,
}

/// One client's slice of the problem: its data, its behavior, and its local
/// distortions.
#[derive(Debug, Clone, PartialEq)]
pub struct ClientShard {
    pub client: usize,
    /// Dataset row indices owned by this client; non-empty, strictly
    /// ascending.
    pub indices: Vec<usize>,
    pub role: ClientRole,
    /// Multiply this client's honest contribution by `(1 + n)`, `n` a fresh
    /// standard normal per (step, client). Models a client whose local
    /// landscape disagrees with the population's in magnitude; applied
    /// before any byzantine transform.
    pub het_noise: bool,
    /// Rows drawn per step, with replacement, from `indices`. `None`, or
    /// any value at least the shard size, means the full shard every step
    /// (and consumes no batch randomness).
    pub batch_size: Option<usize>,
    /// Displacement of this client's quadratic optimum, for runs where the
    /// clients genuinely disagree about where the minimum is.
    pub optimum_shift: Option<Vec<f64>>,
}

impl ClientShard {
    /// An honest full-batch shard with no local distortions.
    pub fn plain(client: usize, indices: Vec<usize>) -> ClientShard {
        ClientShard {
            client,
            indices,
            role: ClientRole::Honest,
            het_noise: false,
            batch_size: None,
            optimum_shift: None,
        }
    }
}

/// Raw votes of a sign-rule round, before aggregation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VoteTally {
    pub plus: usize,
    pub minus: usize,
}

/// Everything one round produced. `global_loss` and `accuracy` stay `None`
/// unless the training driver evaluated at this step; the round itself never
/// touches the full dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundReport {
    pub step: u64,
    pub global_loss: Option<f64>,
    pub accuracy: Option<f64>,
    /// The scalar each client put on the wire, in client order: votes as
    /// plus or minus one, or 32-bit-rounded projections. Empty for full
    /// gradient descent, which sends vectors.
    pub transmitted: Vec<f64>,
    pub tally: Option<VoteTally>,
    /// The scalar the server broadcast back: the vote for sign rules, the
    /// mean projection otherwise. `None` for full gradient descent.
    pub aggregate: Option<f64>,
    /// Total bits all clients sent up this round.
    pub uplink_bits: u64,
    /// Bits the server sent down (broadcast counted once).
    pub downlink_bits: u64,
    /// What this round contributes to the orbit.
    pub payload: Payload,
}

/// Live state of a federated run. Fields are public for inspection; mutate
/// through [`FederationState::run_round`] to keep the trajectory honest.
#[derive(Debug, Clone)]
pub struct FederationState {
    pub spec: ModelSpec,
    pub dataset: Dataset,
    pub params: Vec<f64>,
    pub step: u64,
    pub shards: Vec<ClientShard>,
    pub rule: AggregationRule,
    pub eta: f64,
    pub mu: f64,
    pub run_seed: Seed,
    /// Per-client model specs: the global spec, shifted per shard where a
    /// shift is configured. Indexed by client id.
    client_specs: Vec<ModelSpec>,
    /// Noise source for the private aggregator's coin flips, advanced once
    /// per private round.
    dp_stream: DirectionStream,
}

impl FederationState {
    pub fn new(
        spec: ModelSpec,
        dataset: Dataset,
        params: Vec<f64>,
        shards: Vec<ClientShard>,
        rule: AggregationRule,
        eta: f64,
        mu: f64,
        run_seed: Seed,
    ) -> Result<FederationState> {
        let d = spec.param_count();
        if params.len() != d {
            return Err(Error::ShapeMismatch { expected: d, got: params.len() });
        }
        if dataset.width() != spec.input_width() {
            return Err(Error::ShapeMismatch {
                expected: spec.input_width(),
                got: dataset.width(),
            });
        }
        if !eta.is_finite() || eta <= 0.0 {
            return Err(Error::InvalidArgument(format!("step size must be positive, got {eta}")));
        }
        if !mu.is_finite() || mu <= 0.0 {
            return Err(Error::InvalidMu { mu });
        }
        if let AggregationRule::DpFeedSign { epsilon } = rule {
            if !epsilon.is_finite() || epsilon <= 0.0 {
                return Err(Error::InvalidEpsilon { epsilon });
            }
        }
        if shards.is_empty() {
            return Err(Error::InvalidArgument("a run needs at least one client".into()));
        }
        let mut client_specs = Vec::with_capacity(shards.len());
        for (k, shard) in shards.iter().enumerate() {
            if shard.client != k {
                return Err(Error::InvalidArgument(format!(
                    "shard {k} carries client id {}; shards must be in client order 0..K",
                    shard.client
                )));
            }
            if shard.indices.is_empty() {
                return Err(Error::InvalidArgument(format!("client {k} owns no data")));
            }
            if !shard.indices.windows(2).all(|w| w[0] < w[1]) {
                return Err(Error::InvalidArgument(format!(
                    "client {k} indices must be strictly ascending"
                )));
            }
            if let Some(&last) = shard.indices.last() {
                if last >= dataset.len() {
                    return Err(Error::BatchIndex { index: last, samples: dataset.len() });
                }
            }
            if shard.batch_size == Some(0) {
                return Err(Error::EmptyBatch);
            }
            client_specs.push(match &shard.optimum_shift {
                Some(shift) => spec.with_shifted_optimum(shift)?,
                None => spec.clone(),
            });
        }
        let dp_stream = make_stream(derive_seed(run_seed, &[LABEL_DP]));
        Ok(FederationState {
            spec,
            dataset,
            params,
            step: 0,
            shards,
            rule,
            eta,
            mu,
            run_seed,
            client_specs,
            dp_stream,
        })
    }

    /// The model this client optimizes: the global spec unless the shard
    /// shifts its optimum.
    pub fn client_spec(&self, client: usize) -> &ModelSpec {
        &self.client_specs[client]
    }

    fn batch_indices(&self, shard: &ClientShard) -> Vec<usize> {
        let n = shard.indices.len();
        match shard.batch_size {
            Some(b) if b < n => {
                let mut s = make_stream(derive_seed(
                    self.run_seed,
                    &[LABEL_BATCH, self.step, shard.client as u64],
                ));
                (0..b).map(|_| shard.indices[s.next_index(n)]).collect()
            }
            _ => shard.indices.clone(),
        }
    }

    /// The federated objective: client losses on their own shards (under
    /// their own specs, shifts included), weighted by shard size. With no
    /// shifts this equals the plain full-dataset loss.
    pub fn global_loss(&self) -> Result<f64> {
        let mut total = 0.0;
        let mut rows = 0usize;
        for shard in &self.shards {
            let batch = Batch::subset(&self.dataset, &shard.indices)?;
            let l = loss(self.client_spec(shard.client), &self.params, &batch)?;
            total += l * shard.indices.len() as f64;
            rows += shard.indices.len();
        }
        Ok(total / rows as f64)
    }

    /// Classification accuracy over the full dataset under the global spec;
    /// `None` where accuracy is meaningless.
    pub fn global_accuracy(&self) -> Result<Option<f64>> {
        accuracy(&self.spec, &self.params, &Batch::full(&self.dataset))
    }

    /// Exact minimizer and minimum of the federated objective, available for
    /// the quadratic family only (`None` otherwise). Every sample's loss is
    /// `0.5 * sum_i lambda_i (w_i - opt_i - delta_i)^2` where `delta` stacks
    /// the sample's feature offset and its owner's optimum shift, so the
    /// minimizer is `opt + mean(delta)` and the minimum is the
    /// eigenvalue-weighted variance of the `delta`s around that mean.
    pub fn analytic_optimum(&self) -> Option<(Vec<f64>, f64)> {
        let ModelSpec::Quadratic { eigenvalues, optimum } = &self.spec else {
            return None;
        };
        let d = optimum.len();
        let n = self.dataset.len();
        let mut mean = vec![0.0; d];
        for shard in &self.shards {
            let zero = vec![0.0; d];
            let shift = shard.optimum_shift.as_deref().unwrap_or(&zero);
            for &row in &shard.indices {
                for (m, (x, s)) in mean.iter_mut().zip(self.dataset.row(row).iter().zip(shift)) {
                    *m += x + s;
                }
            }
        }
        for m in &mut mean {
            *m /= n as f64;
        }
        let mut loss_star = 0.0;
        for shard in &self.shards {
            let zero = vec![0.0; d];
            let shift = shard.optimum_shift.as_deref().unwrap_or(&zero);
            for &row in &shard.indices {
                let x = self.dataset.row(row);
                for i in 0..d {
                    let dev = x[i] + shift[i] - mean[i];
                    loss_star += 0.5 * eigenvalues[i] * dev * dev;
                }
            }
        }
        let w_star: Vec<f64> = optimum.iter().zip(&mean).map(|(o, m)| o + m).collect();
        Some((w_star, loss_star / n as f64))
    }

    /// Execute one communication round: collect every client's message,
    /// aggregate, apply the update, advance the step counter. On error the
    /// state is unchanged. Evaluation is the driver's job; the returned
    /// report carries `None` for loss and accuracy.
    pub fn run_round(&mut self) -> Result<RoundReport> {
        let t = self.step;
        let kn = self.shards.len();
        let d = self.params.len();
        let rule = self.rule.clone();
        let cost = comm_cost(&rule, kn, d);

        let (payload, tally, aggregate, transmitted) = match rule {
            AggregationRule::FedSgd => {
                let mut mean = vec![0.0; d];
                for shard in &self.shards {
                    let g = client_gradient(self, shard)?;
                    for (m, gi) in mean.iter_mut().zip(&g) {
                        *m += gi;
                    }
                }
                let mut norm_sq = 0.0;
                for m in &mut mean {
                    *m /= kn as f64;
                    norm_sq += *m * *m;
                }
                let norm = norm_sq.sqrt();
                if !norm.is_finite() {
                    return Err(Error::NonFiniteProjection { value: norm });
                }
                for (w, m) in self.params.iter_mut().zip(&mean) {
                    *w -= self.eta * m;
                }
                (Payload::MeanProjection(norm), None, None, Vec::new())
            }
            AggregationRule::ZoFedSgd => {
                let mut pairs = Vec::with_capacity(kn);
                let mut rounded = Vec::with_capacity(kn);
                for shard in &self.shards {
                    let seed =
                        derive_seed(self.run_seed, &[LABEL_DIRECTION, t, shard.client as u64]);
                    let p = client_step(self, shard, seed)?;
                    // Round to the 32-bit wire value before anything else
                    // sees it; aggregation, the update, and the orbit all
                    // consume exactly these bits.
                    let wire = p.value as f32;
                    rounded.push(Projection::new(wire as f64, seed, shard.client)?);
                    pairs.push(PairRecord { seed: seed.0, projection: wire });
                }
                let mean = aggregate_zo_fedsgd(&rounded)?;
                apply_pair_update(&mut self.params, self.eta, kn, &pairs);
                let transmitted = rounded.iter().map(|p| p.value).collect();
                (Payload::PairList(pairs), None, Some(mean), transmitted)
            }
            AggregationRule::FeedSign | AggregationRule::DpFeedSign { .. } => {
                // All clients probe the same public direction: the step
                // index is the seed.
                let seed = Seed(t);
                let mut votes = Vec::with_capacity(kn);
                let mut transmitted = Vec::with_capacity(kn);
                for shard in &self.shards {
                    let p = client_step(self, shard, seed)?;
                    let v = sign(p.value)?;
                    votes.push(v);
                    transmitted.push(v.value());
                }
                let plus = votes.iter().filter(|v| **v == SignVote::Plus).count();
                let tally = VoteTally { plus, minus: kn - plus };
                let f = match rule {
                    AggregationRule::FeedSign => aggregate_feedsign(&votes)?,
                    AggregationRule::DpFeedSign { epsilon } => {
                        aggregate_dp_feedsign(&votes, epsilon, &mut self.dp_stream)?
                    }
                    _ => unreachable!(),
                };
                apply_sign_update(&mut self.params, self.eta, t, f);
                (Payload::SignVote(f), Some(tally), Some(f.value()), transmitted)
            }
        };

        self.step += 1;
        Ok(RoundReport {
            step: t,
            global_loss: None,
            accuracy: None,
            transmitted,
            tally,
            aggregate,
            uplink_bits: cost.uplink_bits_per_client * kn as u64,
            downlink_bits: cost.downlink_bits,
            payload,
        })
    }
}

/// One client's zeroth-order contribution at the current step: probe the
/// direction of `direction_seed` on a fresh batch, then apply the shard's
/// distortions (heterogeneity multiplier first, byzantine transform second).
/// A random byzantine client skips the evaluation entirely.
pub fn client_step(
    state: &FederationState,
    shard: &ClientShard,
    direction_seed: Seed,
) -> Result<Projection> {
    let t = state.step;
    let k = shard.client as u64;
    if shard.role == ClientRole::ByzantineRandom {
        let mut s = make_stream(derive_seed(state.run_seed, &[LABEL_BYZANTINE, t, k]));
        return Projection::new(s.next_gaussian(), direction_seed, shard.client);
    }
    let indices = state.batch_indices(shard);
    let batch = Batch::subset(&state.dataset, &indices)?;
    let spec = state.client_spec(shard.client);
    let mut local = state.params.clone();
    let p = spsa_projection(spec, &mut local, &batch, direction_seed, state.mu)?;
    let mut value = p.value;
    if shard.het_noise {
        let mut s = make_stream(derive_seed(state.run_seed, &[LABEL_HET, t, k]));
        value *= 1.0 + s.next_gaussian();
    }
    if shard.role == ClientRole::ByzantineReverse {
        value = -value;
    }
    Projection::new(value, direction_seed, shard.client)
}

/// One client's first-order contribution: the batch gradient with the same
/// distortion pipeline as [`client_step`]. A random byzantine client reports
/// a standard normal vector instead of evaluating.
fn client_gradient(state: &FederationState, shard: &ClientShard) -> Result<Vec<f64>> {
    let t = state.step;
    let k = shard.client as u64;
    if shard.role == ClientRole::ByzantineRandom {
        let mut s = make_stream(derive_seed(state.run_seed, &[LABEL_BYZANTINE, t, k]));
        return Ok(s.gaussian_direction(state.params.len()));
    }
    let indices = state.batch_indices(shard);
    let batch = Batch::subset(&state.dataset, &indices)?;
    let mut g = grad(state.client_spec(shard.client), &state.params, &batch)?;
    if shard.het_noise {
        let mut s = make_stream(derive_seed(state.run_seed, &[LABEL_HET, t, k]));
        let m = 1.0 + s.next_gaussian();
        for gi in &mut g {
            *gi *= m;
        }
    }
    if shard.role == ClientRole::ByzantineReverse {
        for gi in &mut g {
            *gi = -*gi;
        }
    }
    Ok(g)
}

/// A finished run: where it started, what happened each round, the orbit
/// that can reproduce it, and the final state.
#[derive(Debug, Clone)]
pub struct TrainingRun {
    pub initial_params: Vec<f64>,
    pub history: Vec<RoundReport>,
    pub orbit: Orbit,
    pub state: FederationState,
}

impl TrainingRun {
    pub fn final_params(&self) -> &[f64] {
        &self.state.params
    }
}

/// Drive `steps` rounds from `state`, evaluating the federated loss and
/// accuracy every `eval_every` steps (and always at the last), and recording
/// the orbit. `eval_every = 0` disables evaluation entirely.
pub fn run_training(state: FederationState, steps: u64, eval_every: u64) -> Result<TrainingRun> {
    run_training_with(state, steps, eval_every, |_, _| ())
}

/// [`run_training`] with an observer called after every completed round with
/// the post-update state and the round's report; useful for checkpointing
/// and early inspection without rerunning.
pub fn run_training_with(
    mut state: FederationState,
    steps: u64,
    eval_every: u64,
    mut on_round: impl FnMut(&FederationState, &RoundReport),
) -> Result<TrainingRun> {
    let initial_params = state.params.clone();
    let mut orbit = Orbit::new(OrbitHeader {
        rule: state.rule.clone(),
        clients: state.shards.len(),
        dim: state.params.len(),
        steps: 0,
        eta: state.eta,
        mu: state.mu,
        run_seed: state.run_seed,
        spec_digest: state.spec.digest(),
    })?;
    let mut history = Vec::with_capacity(steps.min(1 << 20) as usize);
    for t in 0..steps {
        let mut report = state
            .run_round()
            .map_err(|e| Error::RoundFailed { step: t, source: Box::new(e) })?;
        if eval_every != 0 && (t % eval_every == 0 || t + 1 == steps) {
            report.global_loss = Some(state.global_loss()?);
            report.accuracy = state.global_accuracy()?;
        }
        orbit.push(report.payload.clone())?;
        log::debug!(
            "step {t}: loss {:?} vote {:?} up {} down {}",
            report.global_loss,
            report.aggregate,
            report.uplink_bits,
            report.downlink_bits
        );
        on_round(&state, &report);
        history.push(report);
    }
    Ok(TrainingRun { initial_params, history, orbit, state })
}

/// Format a float so that parsing the text recovers the identical bits:
/// scientific notation with 17 significant digits. All CSV output funnels
/// through this.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Write the per-round history as CSV. Unevaluated cells are left empty;
/// floats round-trip exactly.
pub fn write_history_csv(out: &mut dyn Write, history: &[RoundReport]) -> std::io::Result<()> {
    writeln!(out, "step,loss,accuracy,vote_plus,vote_minus,uplink_bits,downlink_bits")?;
    for r in history {
        let opt = |v: &Option<f64>| v.map(format_float).unwrap_or_default();
        let (plus, minus) = match &r.tally {
            Some(t) => (t.plus.to_string(), t.minus.to_string()),
            None => (String::new(), String::new()),
        };
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.step,
            opt(&r.global_loss),
            opt(&r.accuracy),
            plus,
            minus,
            r.uplink_bits,
            r.downlink_bits
        )?;
    }
    Ok(())
}

/// Shard `dataset` across `clients` by label. `beta = None` gives a
/// balanced, stratified split: within each class, rows go to clients round
/// robin. `beta = Some(b)` draws each class's client proportions from a
/// symmetric Dirichlet with concentration `b` and hands out contiguous runs
/// of that class accordingly; small `b` concentrates classes on few clients,
/// large `b` approaches the balanced split.
///
/// Counts come from proportions by largest-remainder rounding, so each
/// class's rows are assigned exactly once. A client that ends up with
/// nothing takes one row from the largest shard (ties to the lowest client
/// id) until every client owns at least one row, keeping the result usable
/// as a federation.
pub fn partition_dirichlet(
    dataset: &Dataset,
    clients: usize,
    beta: Option<f64>,
    seed: Seed,
) -> Result<Vec<ClientShard>> {
    if clients == 0 || clients > dataset.len() {
        return Err(Error::Partition { samples: dataset.len(), clients });
    }
    if let Some(b) = beta {
        if !b.is_finite() || b <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "dirichlet concentration must be positive, got {b}"
            )));
        }
    }
    let classes = dataset.classes();
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); classes];
    for i in 0..dataset.len() {
        by_class[dataset.label(i) as usize].push(i);
    }
    let mut stream = make_stream(derive_seed(seed, &[LABEL_PARTITION]));
    let mut owned: Vec<Vec<usize>> = vec![Vec::new(); clients];
    for rows in by_class.iter().filter(|r| !r.is_empty()) {
        match beta {
            None => {
                for (j, &row) in rows.iter().enumerate() {
                    owned[j % clients].push(row);
                }
            }
            Some(b) => {
                let props = dirichlet(&mut stream, b, clients)?;
                let counts = largest_remainder(&props, rows.len());
                let mut at = 0;
                for (k, &c) in counts.iter().enumerate() {
                    owned[k].extend_from_slice(&rows[at..at + c]);
                    at += c;
                }
            }
        }
    }
    // Nobody may sit out a round; top up empty shards from the largest.
    loop {
        let Some(empty) = owned.iter().position(|o| o.is_empty()) else { break };
        let donor = (0..clients)
            .max_by_key(|&k| (owned[k].len(), usize::MAX - k))
            .expect("clients > 0");
        if owned[donor].len() <= 1 {
            return Err(Error::Partition { samples: dataset.len(), clients });
        }
        let moved = owned[donor].pop().expect("donor non-empty");
        owned[empty].push(moved);
    }
    Ok(owned
        .into_iter()
        .enumerate()
        .map(|(k, mut indices)| {
            indices.sort_unstable();
            ClientShard::plain(k, indices)
        })
        .collect())
}

/// One Gamma(alpha, 1) draw. Squeeze-and-reject for alpha at least one; the
/// boost `Gamma(alpha + 1) * U^(1/alpha)` below that.
fn gamma_draw(stream: &mut DirectionStream, alpha: f64) -> f64 {
    if alpha < 1.0 {
        let g = gamma_draw(stream, alpha + 1.0);
        let u = stream.next_uniform();
        return g * u.powf(1.0 / alpha);
    }
    let d = alpha - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let x = stream.next_gaussian();
        let v = (1.0 + c * x).powi(3);
        if v <= 0.0 {
            continue;
        }
        let u = stream.next_uniform();
        if u < 1.0 - 0.0331 * x.powi(4) {
            return d * v;
        }
        if u > 0.0 && u.ln() < 0.5 * x * x + d * (1.0 - v + v.ln()) {
            return d * v;
        }
    }
}

/// Proportions from a symmetric Dirichlet(beta) over `n` cells.
fn dirichlet(stream: &mut DirectionStream, beta: f64, n: usize) -> Result<Vec<f64>> {
    let draws: Vec<f64> = (0..n).map(|_| gamma_draw(stream, beta)).collect();
    let sum: f64 = draws.iter().sum();
    if !sum.is_finite() || sum <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "degenerate dirichlet draw with concentration {beta}"
        )));
    }
    Ok(draws.into_iter().map(|g| g / sum).collect())
}

/// Integer counts summing to exactly `total`, as close to `props * total`
/// as rounding allows: floors first, then one extra to the cells with the
/// largest fractional parts (ties to the lowest index).
fn largest_remainder(props: &[f64], total: usize) -> Vec<usize> {
    let targets: Vec<f64> = props.iter().map(|p| p * total as f64).collect();
    let mut counts: Vec<usize> = targets.iter().map(|t| t.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..props.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = targets[a] - targets[a].floor();
        let fb = targets[b] - targets[b].floor();
        fb.partial_cmp(&fa).unwrap().then(a.cmp(&b))
    });
    for &k in order.iter().take(total - assigned) {
        counts[k] += 1;
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{synthetic_blobs, synthetic_offsets};
    use crate::orbit::replay;

    fn quad_state(rule: AggregationRule, clients: usize, d: usize, seed: u64) -> FederationState {
        let spec = ModelSpec::quadratic(vec![1.0; d], vec![0.0; d]).unwrap();
        let dataset = synthetic_offsets(4 * clients, d, 0.0, Seed(7)).unwrap();
        let shards = partition_dirichlet(&dataset, clients, None, Seed(seed)).unwrap();
        let params = spec.init_params(Seed(seed), 1.0);
        FederationState::new(spec, dataset, params, shards, rule, 1e-2, 1e-3, Seed(seed)).unwrap()
    }

    #[test]
    fn rounds_are_deterministic_and_replayable() {
        for rule in [
            AggregationRule::FeedSign,
            AggregationRule::DpFeedSign { epsilon: 1.0 },
            AggregationRule::ZoFedSgd,
        ] {
            let mk = || quad_state(rule.clone(), 3, 5, 11);
            let run_a = run_training(mk(), 20, 0).unwrap();
            let run_b = run_training(mk(), 20, 0).unwrap();
            assert_eq!(run_a.final_params(), run_b.final_params(), "{}", rule.name());
            let replayed = replay(&run_a.initial_params, &run_a.orbit).unwrap();
            assert_eq!(replayed, run_a.final_params(), "replay {}", rule.name());
        }
    }

    #[test]
    fn feedsign_loss_decreases_on_quadratic() {
        let state = quad_state(AggregationRule::FeedSign, 5, 8, 3);
        let first = state.global_loss().unwrap();
        let run = run_training(state, 400, 0).unwrap();
        let last = run.state.global_loss().unwrap();
        assert!(last < 0.5 * first, "loss {first} -> {last}");
    }

    #[test]
    fn fedsgd_matches_hand_computed_step() {
        let d = 4;
        let spec = ModelSpec::quadratic(vec![2.0; d], vec![1.0; d]).unwrap();
        let dataset = synthetic_offsets(6, d, 0.0, Seed(1)).unwrap();
        let shards = partition_dirichlet(&dataset, 3, None, Seed(1)).unwrap();
        let params = vec![0.0; d];
        let mut state = FederationState::new(
            spec,
            dataset,
            params,
            shards,
            AggregationRule::FedSgd,
            0.1,
            1e-3,
            Seed(1),
        )
        .unwrap();
        let report = state.run_round().unwrap();
        // Every client's full-shard gradient of mean 0.5*2*(w - 1)^2 at
        // w = 0 is -2 per coordinate, so the step is w - 0.1 * (-2) = 0.2.
        for w in &state.params {
            assert!((w - 0.2).abs() < 1e-12, "{w}");
        }
        match report.payload {
            Payload::MeanProjection(n) => assert!((n - 4.0).abs() < 1e-12, "norm {n}"),
            _ => panic!("wrong payload"),
        }
        assert!(report.transmitted.is_empty());
        assert!(report.tally.is_none());
    }

    #[test]
    fn bit_accounting_per_round() {
        let d = 10;
        let kn = 4;
        for (rule, up, down) in [
            (AggregationRule::FeedSign, kn as u64, 1u64),
            (AggregationRule::DpFeedSign { epsilon: 1.0 }, kn as u64, 1),
            (AggregationRule::ZoFedSgd, 64 * kn as u64, 64 * kn as u64),
            (AggregationRule::FedSgd, 32 * d as u64 * kn as u64, 32 * d as u64),
        ] {
            let mut state = quad_state(rule.clone(), kn, d, 5);
            let r = state.run_round().unwrap();
            assert_eq!(r.uplink_bits, up, "{} up", rule.name());
            assert_eq!(r.downlink_bits, down, "{} down", rule.name());
        }
    }

    #[test]
    fn reverse_byzantine_flips_the_vote() {
        let mut honest = quad_state(AggregationRule::FeedSign, 3, 6, 21);
        let mut attacked = honest.clone();
        for shard in &mut attacked.shards {
            shard.role = ClientRole::ByzantineReverse;
        }
        let hv = honest.run_round().unwrap();
        let av = attacked.run_round().unwrap();
        let ht = hv.tally.unwrap();
        let at = av.tally.unwrap();
        assert_eq!(ht.plus, at.minus);
        assert_eq!(ht.minus, at.plus);
        assert_eq!(hv.aggregate.unwrap(), -av.aggregate.unwrap());
    }

    #[test]
    fn random_byzantine_ignores_batch_and_skips_evaluation() {
        let mut state = quad_state(AggregationRule::FeedSign, 3, 6, 22);
        state.shards[2].role = ClientRole::ByzantineRandom;
        let a = client_step(&state, &state.shards[2], Seed(0)).unwrap();
        state.shards[2].batch_size = Some(1);
        let b = client_step(&state, &state.shards[2], Seed(0)).unwrap();
        assert_eq!(a.value, b.value, "same (step, client) draw regardless of batch");
        let expected = make_stream(derive_seed(state.run_seed, &[LABEL_BYZANTINE, 0, 2]))
            .next_gaussian();
        assert_eq!(a.value, expected);
    }

    #[test]
    fn het_noise_scales_the_honest_projection() {
        let mut state = quad_state(AggregationRule::FeedSign, 2, 4, 30);
        let clean = client_step(&state, &state.shards[1], Seed(0)).unwrap();
        state.shards[1].het_noise = true;
        let noisy = client_step(&state, &state.shards[1], Seed(0)).unwrap();
        let n = make_stream(derive_seed(state.run_seed, &[LABEL_HET, 0, 1])).next_gaussian();
        assert!((noisy.value - clean.value * (1.0 + n)).abs() <= 1e-15 * noisy.value.abs());
    }

    #[test]
    fn state_unchanged_when_a_round_fails() {
        let spec = ModelSpec::quadratic(vec![1.0; 3], vec![0.0; 3]).unwrap();
        let dataset = synthetic_offsets(4, 3, 0.0, Seed(1)).unwrap();
        let shards = partition_dirichlet(&dataset, 2, None, Seed(1)).unwrap();
        let mut state = FederationState::new(
            spec,
            dataset,
            vec![1.0, f64::MAX, 1.0],
            shards,
            AggregationRule::ZoFedSgd,
            1e-2,
            1e120,
            Seed(1),
        )
        .unwrap();
        let before = state.params.clone();
        let err = state.run_round();
        assert!(err.is_err(), "overflowing perturbation must fail");
        assert_eq!(state.params, before);
        assert_eq!(state.step, 0);
    }

    #[test]
    fn evaluation_gating_fills_only_requested_steps() {
        let state = quad_state(AggregationRule::FeedSign, 2, 3, 9);
        let run = run_training(state, 10, 4).unwrap();
        for r in &run.history {
            let expect = r.step % 4 == 0 || r.step == 9;
            assert_eq!(r.global_loss.is_some(), expect, "step {}", r.step);
        }
        let silent = run_training(quad_state(AggregationRule::FeedSign, 2, 3, 9), 10, 0).unwrap();
        assert!(silent.history.iter().all(|r| r.global_loss.is_none()));
    }

    #[test]
    fn partition_covers_every_row_exactly_once() {
        let dataset = synthetic_blobs(101, 4, 3, 2.0, 0.5, Seed(5)).unwrap();
        for beta in [None, Some(0.1), Some(1.0), Some(100.0)] {
            let shards = partition_dirichlet(&dataset, 7, beta, Seed(13)).unwrap();
            assert_eq!(shards.len(), 7);
            let mut seen = vec![false; dataset.len()];
            for s in &shards {
                assert!(!s.indices.is_empty(), "client {} empty", s.client);
                assert!(s.indices.windows(2).all(|w| w[0] < w[1]));
                for &i in &s.indices {
                    assert!(!seen[i], "row {i} assigned twice");
                    seen[i] = true;
                }
            }
            assert!(seen.iter().all(|&s| s), "unassigned rows under {beta:?}");
        }
    }

    #[test]
    fn balanced_split_is_stratified() {
        let dataset = synthetic_blobs(90, 4, 3, 2.0, 0.5, Seed(5)).unwrap();
        let shards = partition_dirichlet(&dataset, 5, None, Seed(1)).unwrap();
        for s in &shards {
            assert_eq!(s.indices.len(), 18);
            for c in 0..3u32 {
                let have = s.indices.iter().filter(|&&i| dataset.label(i) == c).count();
                assert_eq!(have, 6, "client {} class {c}", s.client);
            }
        }
    }

    #[test]
    fn small_beta_is_more_lopsided_than_large() {
        let dataset = synthetic_blobs(600, 4, 3, 2.0, 0.5, Seed(5)).unwrap();
        let dispersion = |beta: f64| -> f64 {
            let shards = partition_dirichlet(&dataset, 6, Some(beta), Seed(77)).unwrap();
            let sizes: Vec<f64> = shards.iter().map(|s| s.indices.len() as f64).collect();
            let mean = sizes.iter().sum::<f64>() / sizes.len() as f64;
            (sizes.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / sizes.len() as f64).sqrt()
        };
        assert!(
            dispersion(0.05) > 2.0 * dispersion(100.0),
            "concentration should spread shard sizes: {} vs {}",
            dispersion(0.05),
            dispersion(100.0)
        );
    }

    #[test]
    fn largest_remainder_is_exact() {
        let counts = largest_remainder(&[0.5, 0.3, 0.2], 7);
        assert_eq!(counts.iter().sum::<usize>(), 7);
        assert_eq!(counts, vec![4, 2, 1]);
        let counts = largest_remainder(&[1.0 / 3.0; 3], 10);
        assert_eq!(counts.iter().sum::<usize>(), 10);
    }

    #[test]
    fn history_csv_shape_and_empty_cells() {
        let run = run_training(quad_state(AggregationRule::FeedSign, 2, 3, 9), 4, 2).unwrap();
        let mut buf = Vec::new();
        write_history_csv(&mut buf, &run.history).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "step,loss,accuracy,vote_plus,vote_minus,uplink_bits,downlink_bits");
        assert_eq!(lines.len(), 5);
        // Step 1 is unevaluated: empty loss cell, quadratic accuracy always
        // empty, tallies present.
        let cells: Vec<&str> = lines[2].split(',').collect();
        assert_eq!(cells[0], "1");
        assert_eq!(cells[1], "");
        assert_eq!(cells[2], "");
        assert_ne!(cells[3], "");
        // Step 0 is evaluated and must round-trip exactly.
        let cells: Vec<&str> = lines[1].split(',').collect();
        let parsed: f64 = cells[1].parse().unwrap();
        assert_eq!(parsed, run.history[0].global_loss.unwrap());
    }

    #[test]
    fn shifted_optima_change_client_specs_but_not_global() {
        let d = 3;
        let spec = ModelSpec::quadratic(vec![1.0; d], vec![0.0; d]).unwrap();
        let dataset = synthetic_offsets(4, d, 0.0, Seed(1)).unwrap();
        let mut shards = partition_dirichlet(&dataset, 2, None, Seed(1)).unwrap();
        shards[0].optimum_shift = Some(vec![0.5; d]);
        shards[1].optimum_shift = Some(vec![-0.5; d]);
        let state = FederationState::new(
            spec,
            dataset,
            vec![0.0; d],
            shards,
            AggregationRule::FeedSign,
            1e-2,
            1e-3,
            Seed(2),
        )
        .unwrap();
        // At the common center the two shifted losses average to the
        // unshifted loss plus the shift variance: 0.5 * 0.25 * d each.
        let l = state.global_loss().unwrap();
        assert!((l - 0.5 * 0.25 * d as f64).abs() < 1e-12, "loss {l}");
    }

    #[test]
    fn analytic_optimum_matches_evaluated_loss() {
        let d = 3;
        let spec = ModelSpec::quadratic(vec![2.0, 1.0, 0.5], vec![1.0; d]).unwrap();
        let dataset = synthetic_offsets(8, d, 0.7, Seed(31)).unwrap();
        let mut shards = partition_dirichlet(&dataset, 2, None, Seed(3)).unwrap();
        shards[0].optimum_shift = Some(vec![0.3, -0.2, 0.1]);
        shards[1].optimum_shift = Some(vec![-0.3, 0.2, -0.1]);
        let mut state = FederationState::new(
            spec,
            dataset,
            vec![0.0; d],
            shards,
            AggregationRule::FeedSign,
            1e-2,
            1e-3,
            Seed(4),
        )
        .unwrap();
        let (w_star, loss_star) = state.analytic_optimum().unwrap();
        state.params = w_star.clone();
        let at_star = state.global_loss().unwrap();
        assert!((at_star - loss_star).abs() <= 1e-12 * loss_star.max(1.0), "{at_star} vs {loss_star}");
        for i in 0..d {
            state.params = w_star.clone();
            state.params[i] += 0.05;
            assert!(state.global_loss().unwrap() > loss_star, "coordinate {i} not a minimum");
        }
    }

    #[test]
    fn constructor_rejects_malformed_shards() {
        let spec = ModelSpec::quadratic(vec![1.0; 2], vec![0.0; 2]).unwrap();
        let dataset = synthetic_offsets(4, 2, 0.0, Seed(1)).unwrap();
        let good = partition_dirichlet(&dataset, 2, None, Seed(1)).unwrap();
        let mk = |shards: Vec<ClientShard>| {
            FederationState::new(
                spec.clone(),
                dataset.clone(),
                vec![0.0; 2],
                shards,
                AggregationRule::FeedSign,
                1e-2,
                1e-3,
                Seed(1),
            )
        };
        assert!(mk(good.clone()).is_ok());
        assert!(mk(vec![]).is_err(), "no clients");
        let mut bad = good.clone();
        bad[1].client = 5;
        assert!(mk(bad).is_err(), "out-of-order ids");
        let mut bad = good.clone();
        bad[0].indices = vec![9];
        assert!(mk(bad).is_err(), "index beyond dataset");
        let mut bad = good.clone();
        bad[0].indices.clear();
        assert!(mk(bad).is_err(), "empty shard");
        let mut bad = good.clone();
        bad[0].batch_size = Some(0);
        assert!(mk(bad).is_err(), "zero batch");
        let mut bad = good;
        bad[0].optimum_shift = Some(vec![1.0; 3]);
        assert!(mk(bad).is_err(), "shift dimension");
    }

    #[test]
    fn batches_resample_per_step_and_stay_inside_the_shard() {
        let mut state = quad_state(AggregationRule::FeedSign, 2, 3, 40);
        state.shards[0].batch_size = Some(2);
        let b0 = state.batch_indices(&state.shards[0]);
        assert_eq!(b0.len(), 2);
        assert!(b0.iter().all(|i| state.shards[0].indices.contains(i)));
        state.step = 1;
        let b1 = state.batch_indices(&state.shards[0]);
        let again = state.batch_indices(&state.shards[0]);
        assert_eq!(b1, again, "same step, same batch");
        // Full batch when the request covers the shard.
        state.shards[0].batch_size = Some(100);
        assert_eq!(state.batch_indices(&state.shards[0]), state.shards[0].indices);
    }
}
