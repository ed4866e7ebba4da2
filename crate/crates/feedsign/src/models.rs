//! Model zoo: three small differentiable test-beds with analytic gradients.
//!
//! All parameters live in a flat `Vec<f64>` so the optimizer layers can treat
//! every model as an opaque point in R^d. Losses are means over a [`Batch`],
//! a borrowed view of some [`Dataset`] rows.
//!
//! The quadratic family deserves a note. Its Hessian is diagonal with an
//! explicit eigenvalue list, so curvature, smoothness (max eigenvalue) and
//! effective rank (trace over max) are all directly controllable. Each data
//! row's feature vector acts as a per-sample displacement of the optimum:
//!
//! ```text
//! loss(w; batch) = mean_s  1/2 * sum_i  lambda_i * (w_i - opt_i - x_{s,i})^2
//! ```
//!
//! With all-zero rows (the synthetic default) the batch content is irrelevant
//! and this is the plain deterministic quadratic. Rows drawn from a zero-mean
//! Gaussian give an exactly symmetric batch-noise construction, which the
//! analysis module leans on when measuring sign-reversal probabilities.

use crate::error::{Error, Result};
use crate::prng::{make_stream, Seed};
use std::path::Path;

#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    /// Diagonal quadratic `1/2 (w - opt - x)' diag(eigenvalues) (w - opt - x)`.
    Quadratic { eigenvalues: Vec<f64>, optimum: Vec<f64> },
    /// Two-class logistic regression without a bias term; `features` weights.
    Logistic { features: usize },
    /// Dense tanh network; `layers` lists sizes input..=output, softmax
    /// cross-entropy on top, `layers.last()` classes.
    Mlp { layers: Vec<usize> },
}

impl ModelSpec {
    pub fn quadratic(eigenvalues: Vec<f64>, optimum: Vec<f64>) -> Result<Self> {
        if eigenvalues.is_empty() {
            return Err(Error::InvalidArgument("quadratic needs at least one eigenvalue".into()));
        }
        if eigenvalues.len() != optimum.len() {
            return Err(Error::ShapeMismatch { expected: eigenvalues.len(), got: optimum.len() });
        }
        if eigenvalues.iter().any(|l| !l.is_finite() || *l < 0.0) {
            return Err(Error::InvalidArgument(
                "eigenvalues must be finite and non-negative (positive semidefinite curvature)".into(),
            ));
        }
        if optimum.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("optimum must be finite".into()));
        }
        Ok(ModelSpec::Quadratic { eigenvalues, optimum })
    }

    pub fn logistic(features: usize) -> Result<Self> {
        if features == 0 {
            return Err(Error::InvalidArgument("logistic needs at least one feature".into()));
        }
        Ok(ModelSpec::Logistic { features })
    }

    pub fn mlp(layers: Vec<usize>) -> Result<Self> {
        if layers.len() < 2 {
            return Err(Error::InvalidArgument("mlp needs input and output layers".into()));
        }
        if layers.iter().any(|&n| n == 0) {
            return Err(Error::InvalidArgument("mlp layer sizes must be positive".into()));
        }
        if *layers.last().unwrap() < 2 {
            return Err(Error::InvalidArgument("mlp output layer needs at least two classes".into()));
        }
        Ok(ModelSpec::Mlp { layers })
    }

    /// Length of the flat parameter vector.
    pub fn param_count(&self) -> usize {
        match self {
            ModelSpec::Quadratic { eigenvalues, .. } => eigenvalues.len(),
            ModelSpec::Logistic { features } => *features,
            ModelSpec::Mlp { layers } => {
                layers.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
            }
        }
    }

    /// Width of the feature rows this model consumes.
    pub fn input_width(&self) -> usize {
        match self {
            ModelSpec::Quadratic { eigenvalues, .. } => eigenvalues.len(),
            ModelSpec::Logistic { features } => *features,
            ModelSpec::Mlp { layers } => layers[0],
        }
    }

    /// Number of classes for classifiers; `None` for the quadratic family.
    pub fn classes(&self) -> Option<usize> {
        match self {
            ModelSpec::Quadratic { .. } => None,
            ModelSpec::Logistic { .. } => Some(2),
            ModelSpec::Mlp { layers } => Some(*layers.last().unwrap()),
        }
    }

    /// Largest eigenvalue (smoothness constant) of the quadratic family.
    pub fn smoothness(&self) -> Option<f64> {
        match self {
            ModelSpec::Quadratic { eigenvalues, .. } => {
                eigenvalues.iter().cloned().fold(None, |m: Option<f64>, l| {
                    Some(m.map_or(l, |m| m.max(l)))
                })
            }
            _ => None,
        }
    }

    /// Smallest positive eigenvalue: the Polyak-Lojasiewicz constant of the
    /// quadratic restricted to the range of its curvature.
    pub fn pl_constant(&self) -> Option<f64> {
        match self {
            ModelSpec::Quadratic { eigenvalues, .. } => eigenvalues
                .iter()
                .cloned()
                .filter(|l| *l > 0.0)
                .fold(None, |m: Option<f64>, l| Some(m.map_or(l, |m| m.min(l)))),
            _ => None,
        }
    }

    /// Trace over largest eigenvalue for the quadratic family.
    pub fn effective_rank(&self) -> Option<f64> {
        let top = self.smoothness()?;
        if top == 0.0 {
            return None;
        }
        match self {
            ModelSpec::Quadratic { eigenvalues, .. } => {
                Some(eigenvalues.iter().sum::<f64>() / top)
            }
            _ => None,
        }
    }

    /// 64-bit digest of the spec's canonical byte encoding: FNV-1a over a tag
    /// byte followed by little-endian dimensions and coefficient bits. Stored
    /// in orbit headers so a recorded run refuses to replay against a
    /// different architecture.
    pub fn digest(&self) -> u64 {
        let mut h = Fnv::new();
        match self {
            ModelSpec::Quadratic { eigenvalues, optimum } => {
                h.byte(0);
                h.u64(eigenvalues.len() as u64);
                for l in eigenvalues {
                    h.u64(l.to_bits());
                }
                for v in optimum {
                    h.u64(v.to_bits());
                }
            }
            ModelSpec::Logistic { features } => {
                h.byte(1);
                h.u64(*features as u64);
            }
            ModelSpec::Mlp { layers } => {
                h.byte(2);
                h.u64(layers.len() as u64);
                for &n in layers {
                    h.u64(n as u64);
                }
            }
        }
        h.finish()
    }

    /// Deterministic initial parameters. The quadratic starts at
    /// `optimum + scale * z`, the logistic at `scale * z`, and the network at
    /// `scale * z / sqrt(fan_in)` per weight with zero biases (which consume
    /// no draws). `z` is the Gaussian stream of `seed` in parameter order.
    pub fn init_params(&self, seed: Seed, scale: f64) -> Vec<f64> {
        let mut stream = make_stream(seed);
        match self {
            ModelSpec::Quadratic { optimum, .. } => {
                optimum.iter().map(|o| o + scale * stream.next_gaussian()).collect()
            }
            ModelSpec::Logistic { features } => {
                (0..*features).map(|_| scale * stream.next_gaussian()).collect()
            }
            ModelSpec::Mlp { layers } => {
                let mut params = Vec::with_capacity(self.param_count());
                for w in layers.windows(2) {
                    let (fan_in, fan_out) = (w[0], w[1]);
                    let sd = scale / (fan_in as f64).sqrt();
                    for _ in 0..fan_in * fan_out {
                        params.push(sd * stream.next_gaussian());
                    }
                    params.extend(std::iter::repeat(0.0).take(fan_out));
                }
                params
            }
        }
    }

    /// Build a copy of a quadratic spec whose optimum is displaced by
    /// `shift`; used to give federated clients distinct optima.
    pub fn with_shifted_optimum(&self, shift: &[f64]) -> Result<ModelSpec> {
        match self {
            ModelSpec::Quadratic { eigenvalues, optimum } => {
                if shift.len() != optimum.len() {
                    return Err(Error::ShapeMismatch { expected: optimum.len(), got: shift.len() });
                }
                Ok(ModelSpec::Quadratic {
                    eigenvalues: eigenvalues.clone(),
                    optimum: optimum.iter().zip(shift).map(|(o, s)| o + s).collect(),
                })
            }
            _ => Err(Error::InvalidArgument(
                "optimum shifts only apply to the quadratic family".into(),
            )),
        }
    }
}

struct Fnv(u64);

impl Fnv {
    fn new() -> Self {
        Fnv(0xcbf2_9ce4_8422_2325)
    }
    fn byte(&mut self, b: u8) {
        self.0 ^= b as u64;
        self.0 = self.0.wrapping_mul(0x0000_0100_0000_01b3);
    }
    fn u64(&mut self, v: u64) {
        for b in v.to_le_bytes() {
            self.byte(b);
        }
    }
    fn finish(&self) -> u64 {
        self.0
    }
}

/// In-memory dataset: row-major feature matrix plus one integer label per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<f64>,
    labels: Vec<u32>,
    width: usize,
}

impl Dataset {
    pub fn new(features: Vec<f64>, labels: Vec<u32>, width: usize) -> Result<Self> {
        if width == 0 {
            return Err(Error::Dataset("feature width must be positive".into()));
        }
        if features.len() != labels.len() * width {
            return Err(Error::Dataset(format!(
                "feature buffer of {} values does not match {} rows of width {}",
                features.len(),
                labels.len(),
                width
            )));
        }
        Ok(Dataset { features, labels, width })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.width..(i + 1) * self.width]
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> u32 {
        self.labels[i]
    }

    /// Highest label plus one.
    pub fn classes(&self) -> usize {
        self.labels.iter().copied().max().map_or(0, |m| m as usize + 1)
    }

    /// Parse `label,feat1,...,featN` rows. A first line whose first field is
    /// literally `label` is treated as a header and skipped. Every row must
    /// have the same width.
    pub fn from_csv_bytes(bytes: &[u8]) -> Result<Self> {
        let text = std::str::from_utf8(bytes)
            .map_err(|e| Error::Dataset(format!("dataset is not UTF-8: {e}")))?;
        let mut features = Vec::new();
        let mut labels = Vec::new();
        let mut width: Option<usize> = None;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split(',');
            let first = fields.next().unwrap().trim();
            if lineno == 0 && first == "label" {
                continue;
            }
            let label: u32 = first.parse().map_err(|_| {
                Error::Dataset(format!("line {}: label `{first}` is not a non-negative integer", lineno + 1))
            })?;
            let row: Vec<f64> = fields
                .map(|f| {
                    let f = f.trim();
                    f.parse::<f64>().map_err(|_| {
                        Error::Dataset(format!("line {}: `{f}` is not a number", lineno + 1))
                    })
                })
                .collect::<Result<_>>()?;
            match width {
                None => width = Some(row.len()),
                Some(w) if w != row.len() => {
                    return Err(Error::Dataset(format!(
                        "line {}: expected {w} features, got {}",
                        lineno + 1,
                        row.len()
                    )));
                }
                _ => {}
            }
            labels.push(label);
            features.extend(row);
        }
        let width = width.ok_or_else(|| Error::Dataset("dataset has no rows".into()))?;
        Dataset::new(features, labels, width)
    }

    pub fn from_csv_path(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::file("read", path, e))?;
        Self::from_csv_bytes(&bytes)
    }
}

/// `samples` rows of width `dim` drawn from N(0, sigma^2) per entry, all with
/// label zero: displacement data for the quadratic family. `sigma = 0` writes
/// exact zeros without consuming any draws.
pub fn synthetic_offsets(samples: usize, dim: usize, sigma: f64, seed: Seed) -> Result<Dataset> {
    if samples == 0 || dim == 0 {
        return Err(Error::Dataset("synthetic dataset needs positive samples and width".into()));
    }
    let features = if sigma == 0.0 {
        vec![0.0; samples * dim]
    } else {
        let mut stream = make_stream(seed);
        (0..samples * dim).map(|_| sigma * stream.next_gaussian()).collect()
    };
    Dataset::new(features, vec![0; samples], dim)
}

/// Gaussian class blobs. Labels cycle `0, 1, ..., classes-1` so every class
/// has within-one-of-equal support. Two-class centers sit at
/// `+-(margin / sqrt(dim)) * (1, ..., 1)` so a bias-free separator exists;
/// with more classes, class `c` centers at `margin * e_{c mod dim}`.
pub fn synthetic_blobs(
    samples: usize,
    dim: usize,
    classes: usize,
    margin: f64,
    noise: f64,
    seed: Seed,
) -> Result<Dataset> {
    if samples == 0 || dim == 0 {
        return Err(Error::Dataset("synthetic dataset needs positive samples and width".into()));
    }
    if classes < 2 {
        return Err(Error::Dataset("synthetic blobs need at least two classes".into()));
    }
    let mut stream = make_stream(seed);
    let mut features = Vec::with_capacity(samples * dim);
    let mut labels = Vec::with_capacity(samples);
    for i in 0..samples {
        let c = i % classes;
        labels.push(c as u32);
        for j in 0..dim {
            let center = if classes == 2 {
                let s = if c == 1 { 1.0 } else { -1.0 };
                s * margin / (dim as f64).sqrt()
            } else if j == c % dim {
                margin
            } else {
                0.0
            };
            features.push(center + noise * stream.next_gaussian());
        }
    }
    Dataset::new(features, labels, dim)
}

/// Borrowed batch: a dataset plus an optional index subset (`None` = every
/// row in order). Indices may repeat; sampling with replacement produces
/// exactly that.
#[derive(Debug, Clone, Copy)]
pub struct Batch<'a> {
    dataset: &'a Dataset,
    indices: Option<&'a [usize]>,
}

impl<'a> Batch<'a> {
    pub fn full(dataset: &'a Dataset) -> Batch<'a> {
        Batch { dataset, indices: None }
    }

    pub fn subset(dataset: &'a Dataset, indices: &'a [usize]) -> Result<Batch<'a>> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= dataset.len()) {
            return Err(Error::BatchIndex { index: bad, samples: dataset.len() });
        }
        Ok(Batch { dataset, indices: Some(indices) })
    }

    pub fn len(&self) -> usize {
        self.indices.map_or(self.dataset.len(), <[usize]>::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn width(&self) -> usize {
        self.dataset.width()
    }

    fn rows(&self) -> impl Iterator<Item = (&'a [f64], u32)> + '_ {
        let ds = self.dataset;
        (0..self.len()).map(move |k| {
            let i = self.indices.map_or(k, |idx| idx[k]);
            (ds.row(i), ds.label(i))
        })
    }
}

fn check_shapes(spec: &ModelSpec, params: &[f64], batch: &Batch) -> Result<()> {
    if params.len() != spec.param_count() {
        return Err(Error::ShapeMismatch { expected: spec.param_count(), got: params.len() });
    }
    if batch.width() != spec.input_width() {
        return Err(Error::ShapeMismatch { expected: spec.input_width(), got: batch.width() });
    }
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    Ok(())
}

fn check_label(label: u32, classes: usize) -> Result<()> {
    if (label as usize) < classes {
        Ok(())
    } else {
        Err(Error::Dataset(format!("label {label} out of range for {classes} classes")))
    }
}

/// `ln(1 + e^m)` without overflow.
fn softplus(m: f64) -> f64 {
    m.max(0.0) + (-m.abs()).exp().ln_1p()
}

/// Mean loss of `params` over `batch`.
pub fn loss(spec: &ModelSpec, params: &[f64], batch: &Batch) -> Result<f64> {
    check_shapes(spec, params, batch)?;
    let n = batch.len() as f64;
    match spec {
        ModelSpec::Quadratic { eigenvalues, optimum } => {
            let mut total = 0.0;
            for (x, _) in batch.rows() {
                let mut s = 0.0;
                for i in 0..eigenvalues.len() {
                    let d = params[i] - optimum[i] - x[i];
                    s += eigenvalues[i] * d * d;
                }
                total += 0.5 * s;
            }
            Ok(total / n)
        }
        ModelSpec::Logistic { .. } => {
            let mut total = 0.0;
            for (x, y) in batch.rows() {
                check_label(y, 2)?;
                let m: f64 = params.iter().zip(x).map(|(w, x)| w * x).sum();
                total += softplus(m) - y as f64 * m;
            }
            Ok(total / n)
        }
        ModelSpec::Mlp { layers } => {
            let classes = *layers.last().unwrap();
            let mut scratch = MlpScratch::new(layers);
            let mut total = 0.0;
            for (x, y) in batch.rows() {
                check_label(y, classes)?;
                let logits = scratch.forward(layers, params, x);
                total += cross_entropy(logits, y as usize);
            }
            Ok(total / n)
        }
    }
}

fn cross_entropy(logits: &[f64], y: usize) -> f64 {
    let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse = m + logits.iter().map(|l| (l - m).exp()).sum::<f64>().ln();
    lse - logits[y]
}

/// Mean analytic gradient of `loss` with respect to `params`.
pub fn grad(spec: &ModelSpec, params: &[f64], batch: &Batch) -> Result<Vec<f64>> {
    check_shapes(spec, params, batch)?;
    let n = batch.len() as f64;
    match spec {
        ModelSpec::Quadratic { eigenvalues, optimum } => {
            let d = eigenvalues.len();
            let mut mean_x = vec![0.0; d];
            for (x, _) in batch.rows() {
                for i in 0..d {
                    mean_x[i] += x[i];
                }
            }
            Ok((0..d)
                .map(|i| eigenvalues[i] * (params[i] - optimum[i] - mean_x[i] / n))
                .collect())
        }
        ModelSpec::Logistic { features } => {
            let mut g = vec![0.0; *features];
            for (x, y) in batch.rows() {
                check_label(y, 2)?;
                let m: f64 = params.iter().zip(x).map(|(w, x)| w * x).sum();
                let p = 1.0 / (1.0 + (-m).exp());
                let r = p - y as f64;
                for i in 0..*features {
                    g[i] += r * x[i];
                }
            }
            for gi in &mut g {
                *gi /= n;
            }
            Ok(g)
        }
        ModelSpec::Mlp { layers } => {
            let classes = *layers.last().unwrap();
            let mut scratch = MlpScratch::new(layers);
            let mut g = vec![0.0; params.len()];
            for (x, y) in batch.rows() {
                check_label(y, classes)?;
                scratch.forward(layers, params, x);
                scratch.backward(layers, params, x, y as usize, &mut g);
            }
            for gi in &mut g {
                *gi /= n;
            }
            Ok(g)
        }
    }
}

/// Fraction of batch rows the classifier labels correctly; `Ok(None)` for the
/// quadratic family, which has no labels to be right about.
pub fn accuracy(spec: &ModelSpec, params: &[f64], batch: &Batch) -> Result<Option<f64>> {
    check_shapes(spec, params, batch)?;
    let n = batch.len() as f64;
    match spec {
        ModelSpec::Quadratic { .. } => Ok(None),
        ModelSpec::Logistic { .. } => {
            let mut correct = 0usize;
            for (x, y) in batch.rows() {
                check_label(y, 2)?;
                let m: f64 = params.iter().zip(x).map(|(w, x)| w * x).sum();
                let predicted = u32::from(m >= 0.0);
                correct += usize::from(predicted == y);
            }
            Ok(Some(correct as f64 / n))
        }
        ModelSpec::Mlp { layers } => {
            let classes = *layers.last().unwrap();
            let mut scratch = MlpScratch::new(layers);
            let mut correct = 0usize;
            for (x, y) in batch.rows() {
                check_label(y, classes)?;
                let logits = scratch.forward(layers, params, x);
                let mut best = 0;
                for c in 1..classes {
                    if logits[c] > logits[best] {
                        best = c;
                    }
                }
                correct += usize::from(best == y as usize);
            }
            Ok(Some(correct as f64 / n))
        }
    }
}

/// Per-sample activation storage reused across a batch.
struct MlpScratch {
    /// Activations per layer; `act[0]` mirrors the input row.
    act: Vec<Vec<f64>>,
    /// Backpropagated deltas per non-input layer.
    delta: Vec<Vec<f64>>,
}

impl MlpScratch {
    fn new(layers: &[usize]) -> Self {
        MlpScratch {
            act: layers.iter().map(|&n| vec![0.0; n]).collect(),
            delta: layers[1..].iter().map(|&n| vec![0.0; n]).collect(),
        }
    }

    /// Forward pass; returns the output logits (pre-softmax). Hidden layers
    /// apply tanh, the output layer stays linear.
    fn forward<'a>(&'a mut self, layers: &[usize], params: &[f64], x: &[f64]) -> &'a [f64] {
        self.act[0].copy_from_slice(x);
        let mut offset = 0;
        for l in 1..layers.len() {
            let (fan_in, fan_out) = (layers[l - 1], layers[l]);
            let weights = &params[offset..offset + fan_in * fan_out];
            let biases = &params[offset + fan_in * fan_out..offset + fan_in * fan_out + fan_out];
            offset += fan_in * fan_out + fan_out;
            let (prev, rest) = self.act.split_at_mut(l);
            let (input, out) = (&prev[l - 1], &mut rest[0]);
            for o in 0..fan_out {
                let mut z = biases[o];
                let row = &weights[o * fan_in..(o + 1) * fan_in];
                for i in 0..fan_in {
                    z += row[i] * input[i];
                }
                out[o] = if l + 1 < layers.len() { z.tanh() } else { z };
            }
        }
        self.act.last().unwrap()
    }

    /// Accumulate the gradient of the cross-entropy at the state left by the
    /// last `forward` call into `g` (not averaged).
    fn backward(&mut self, layers: &[usize], params: &[f64], _x: &[f64], y: usize, g: &mut [f64]) {
        let depth = layers.len() - 1;
        // Output delta: softmax minus one-hot.
        {
            let logits = &self.act[depth];
            let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let denom: f64 = logits.iter().map(|l| (l - m).exp()).sum();
            let out = &mut self.delta[depth - 1];
            for (c, l) in logits.iter().enumerate() {
                out[c] = (l - m).exp() / denom - f64::from(c == y);
            }
        }
        // Walk layers backward, accumulating weight/bias gradients and
        // pushing deltas through tanh'.
        let mut offsets = Vec::with_capacity(depth);
        let mut offset = 0;
        for l in 1..layers.len() {
            offsets.push(offset);
            offset += layers[l - 1] * layers[l] + layers[l];
        }
        for l in (1..layers.len()).rev() {
            let (fan_in, fan_out) = (layers[l - 1], layers[l]);
            let base = offsets[l - 1];
            for o in 0..fan_out {
                let d = self.delta[l - 1][o];
                let g_row = &mut g[base + o * fan_in..base + (o + 1) * fan_in];
                let input = &self.act[l - 1];
                for i in 0..fan_in {
                    g_row[i] += d * input[i];
                }
                g[base + fan_in * fan_out + o] += d;
            }
            if l > 1 {
                let weights = &params[base..base + fan_in * fan_out];
                for i in 0..fan_in {
                    let mut s = 0.0;
                    for o in 0..fan_out {
                        s += weights[o * fan_in + i] * self.delta[l - 1][o];
                    }
                    let a = self.act[l - 1][i];
                    self.delta[l - 2][i] = s * (1.0 - a * a);
                }
            }
        }
    }
}

/// Write parameters as raw little-endian 64-bit floats.
pub fn write_params(path: &Path, params: &[f64]) -> Result<()> {
    let mut bytes = Vec::with_capacity(params.len() * 8);
    for p in params {
        bytes.extend_from_slice(&p.to_le_bytes());
    }
    std::fs::write(path, bytes).map_err(|e| Error::file("write", path, e))
}

/// Read parameters written by [`write_params`].
pub fn read_params(path: &Path) -> Result<Vec<f64>> {
    let bytes = std::fs::read(path).map_err(|e| Error::file("read", path, e))?;
    if bytes.len() % 8 != 0 {
        return Err(Error::Dataset(format!(
            "{} is not a parameter file: {} bytes is not a multiple of 8",
            path.display(),
            bytes.len()
        )));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}
