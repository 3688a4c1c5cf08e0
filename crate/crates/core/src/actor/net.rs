//! Feed-forward preference network with hand-written backpropagation.

use rand::Rng;

use crate::error::{LabError, Result};

const CHECKPOINT_MAGIC: &str = "lab-preference-net";
const CHECKPOINT_VERSION: u32 = 1;

#[inline]
fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// ln(1 + e^z) without overflow.
#[inline]
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Mean over samples of the summed binary cross-entropy; predictions are
/// clamped to [1e-6, 1 − 1e-6].
pub fn bce_loss(preds: &[Vec<f64>], targets: &[Vec<f64>]) -> f64 {
    let total: f64 = preds
        .iter()
        .zip(targets)
        .map(|(p, y)| {
            p.iter()
                .zip(y)
                .map(|(&p, &y)| {
                    let p = p.clamp(1e-6, 1.0 - 1e-6);
                    -(y * p.ln() + (1.0 - y) * (1.0 - p).ln())
                })
                .sum::<f64>()
        })
        .sum();
    total / preds.len().max(1) as f64
}

/// MLP with tanh hidden layers and a logistic output layer. All weights and
/// biases live in one flat vector: per layer, the `out × in` weight matrix
/// (row-major) followed by the `out` biases.
#[derive(Debug, Clone, PartialEq)]
pub struct PreferenceNet {
    sizes: Vec<usize>,
    params: Vec<f64>,
}

impl PreferenceNet {
    /// Glorot-uniform weights, zero biases.
    pub fn new<R: Rng + ?Sized>(input: usize, hidden: &[usize], output: usize, rng: &mut R) -> Result<Self> {
        let mut sizes = vec![input];
        sizes.extend_from_slice(hidden);
        sizes.push(output);
        if sizes.contains(&0) {
            return Err(LabError::domain("network layer widths must be >= 1"));
        }
        let mut params = Vec::with_capacity(Self::count(&sizes));
        for w in sizes.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let lim = (6.0 / (fan_in + fan_out) as f64).sqrt();
            params.extend((0..fan_in * fan_out).map(|_| rng.gen_range(-lim..lim)));
            params.extend(std::iter::repeat_n(0.0, fan_out));
        }
        Ok(Self { sizes, params })
    }

    fn count(sizes: &[usize]) -> usize {
        sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.sizes.last().expect("non-empty")
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    /// Zeroes the output layer so every output is exactly 0.5.
    pub fn zero_output_layer(&mut self) {
        let l = self.sizes.len() - 2;
        let off = self.layer_offset(l);
        let end = off + self.sizes[l] * self.sizes[l + 1] + self.sizes[l + 1];
        self.params[off..end].iter_mut().for_each(|p| *p = 0.0);
    }

    fn layer_offset(&self, layer: usize) -> usize {
        Self::count(&self.sizes[..=layer])
    }

    /// Activations of every layer; the last entry holds pre-sigmoid logits.
    fn activations(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let n_layers = self.sizes.len() - 1;
        let mut acts = Vec::with_capacity(n_layers + 1);
        acts.push(x.to_vec());
        let mut off = 0;
        for l in 0..n_layers {
            let (fi, fo) = (self.sizes[l], self.sizes[l + 1]);
            let w = &self.params[off..off + fi * fo];
            let b = &self.params[off + fi * fo..off + fi * fo + fo];
            let prev = acts.last().expect("non-empty");
            let mut out: Vec<f64> = (0..fo)
                .map(|o| b[o] + w[o * fi..(o + 1) * fi].iter().zip(prev).map(|(a, b)| a * b).sum::<f64>())
                .collect();
            if l + 1 < n_layers {
                out.iter_mut().for_each(|v| *v = v.tanh());
            }
            acts.push(out);
            off += fi * fo + fo;
        }
        acts
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim() {
            return Err(LabError::Shape { expected: self.input_dim(), got: x.len() });
        }
        Ok(())
    }

    /// Preferences in (0, 1).
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        let acts = self.activations(x);
        Ok(acts.last().expect("output").iter().map(|&z| sigmoid(z)).collect())
    }

    /// Batch-mean BCE (computed from logits) and its gradient w.r.t. the flat parameters.
    pub fn loss_and_grad(&self, inputs: &[&[f64]], targets: &[&[f64]]) -> Result<(f64, Vec<f64>)> {
        if inputs.len() != targets.len() || inputs.is_empty() {
            return Err(LabError::domain("batch inputs and targets must be non-empty and equal in length"));
        }
        let n_layers = self.sizes.len() - 1;
        let mut grad = vec![0.0; self.params.len()];
        let mut loss = 0.0;
        let scale = 1.0 / inputs.len() as f64;
        for (x, y) in inputs.iter().zip(targets) {
            self.check_input(x)?;
            if y.len() != self.output_dim() {
                return Err(LabError::Shape { expected: self.output_dim(), got: y.len() });
            }
            let acts = self.activations(x);
            let logits = &acts[n_layers];
            loss += logits.iter().zip(y.iter()).map(|(&z, &t)| softplus(z) - t * z).sum::<f64>();
            let mut delta: Vec<f64> = logits.iter().zip(y.iter()).map(|(&z, &t)| sigmoid(z) - t).collect();
            for l in (0..n_layers).rev() {
                let (fi, fo) = (self.sizes[l], self.sizes[l + 1]);
                let off = self.layer_offset(l);
                let prev = &acts[l];
                for o in 0..fo {
                    let d = delta[o] * scale;
                    let row = &mut grad[off + o * fi..off + (o + 1) * fi];
                    for (g, a) in row.iter_mut().zip(prev) {
                        *g += d * a;
                    }
                    grad[off + fi * fo + o] += d;
                }
                if l > 0 {
                    let w = &self.params[off..off + fi * fo];
                    delta = (0..fi)
                        .map(|i| {
                            let s: f64 = (0..fo).map(|o| w[o * fi + i] * delta[o]).sum();
                            s * (1.0 - prev[i] * prev[i])
                        })
                        .collect();
                }
            }
        }
        Ok((loss * scale, grad))
    }

    /// Versioned text checkpoint: magic + version, layer sizes, then one
    /// parameter per line in the flat layout.
    pub fn to_checkpoint(&self) -> String {
        let mut s = format!("{CHECKPOINT_MAGIC} {CHECKPOINT_VERSION}\n");
        let sizes: Vec<String> = self.sizes.iter().map(|x| x.to_string()).collect();
        s.push_str(&format!("layers {}\n", sizes.join(" ")));
        for p in &self.params {
            s.push_str(&format!("{p:?}\n"));
        }
        s
    }

    pub fn from_checkpoint(text: &str) -> Result<Self> {
        let bad = |m: &str| LabError::domain(format!("invalid checkpoint: {m}"));
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| bad("empty"))?;
        let mut hp = header.split_whitespace();
        if hp.next() != Some(CHECKPOINT_MAGIC) {
            return Err(bad("wrong magic"));
        }
        let ver: u32 = hp.next().and_then(|v| v.parse().ok()).ok_or_else(|| bad("missing version"))?;
        if ver != CHECKPOINT_VERSION {
            return Err(bad(&format!("unsupported version {ver}")));
        }
        let layers = lines.next().ok_or_else(|| bad("missing layer line"))?;
        let mut lp = layers.split_whitespace();
        if lp.next() != Some("layers") {
            return Err(bad("missing layer line"));
        }
        let sizes: Vec<usize> = lp
            .map(|v| v.parse().map_err(|_| bad("layer size")))
            .collect::<Result<_>>()?;
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(bad("layer sizes"));
        }
        let params: Vec<f64> = lines
            .filter(|l| !l.trim().is_empty())
            .map(|l| l.trim().parse().map_err(|_| bad("parameter value")))
            .collect::<Result<_>>()?;
        if params.len() != Self::count(&sizes) {
            return Err(bad(&format!("expected {} parameters, found {}", Self::count(&sizes), params.len())));
        }
        Ok(Self { sizes, params })
    }
}

/// Adam optimiser state over a flat parameter vector.
#[derive(Debug, Clone)]
pub struct Adam {
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    step: i32,
}

impl Adam {
    pub fn new(n_params: usize, lr: f64) -> Self {
        Self { lr, beta1: 0.9, beta2: 0.999, eps: 1e-8, m: vec![0.0; n_params], v: vec![0.0; n_params], step: 0 }
    }

    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        self.step += 1;
        let c1 = 1.0 - self.beta1.powi(self.step);
        let c2 = 1.0 - self.beta2.powi(self.step);
        for i in 0..params.len() {
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * grad[i];
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * grad[i] * grad[i];
            let mh = self.m[i] / c1;
            let vh = self.v[i] / c2;
            params[i] -= self.lr * mh / (vh.sqrt() + self.eps);
        }
    }
}

/// Rescales `grad` in place so its Euclidean norm is at most `max_norm`; returns the original norm.
pub fn clip_global_norm(grad: &mut [f64], max_norm: f64) -> f64 {
    let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
    if norm > max_norm && norm > 0.0 {
        let s = max_norm / norm;
        grad.iter_mut().for_each(|g| *g *= s);
    }
    norm
}
