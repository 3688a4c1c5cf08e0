//! GP posterior over the observation cache, marginal likelihood and refits.

use std::collections::VecDeque;

use super::cache::{BoCache, Observation};
use super::kernel::{combine, kernel, GpInput, KernelParams};
use super::linalg::{dot, Cholesky};
use crate::error::{LabError, Result};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Diagonal jitter tried in order when a factorisation fails.
pub const JITTER_LADDER: [f64; 6] = [0.0, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6];

/// Channel gain as seen by the kernel: log10 of the (positive) gain.
#[inline]
pub fn channel_feature(h: f64) -> f64 {
    h.max(1e-300).log10()
}

/// Per-dimension z-score of the log10 channel gains.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn identity(n: usize) -> Self {
        Self { mean: vec![0.0; n], scale: vec![1.0; n] }
    }

    /// Fits mean and (population) standard deviation of the log gains; a
    /// degenerate dimension keeps scale 1.
    pub fn fit<'a>(n: usize, rows: impl Iterator<Item = &'a [f64]>) -> Self {
        let rows: Vec<Vec<f64>> = rows.map(|r| r.iter().map(|&h| channel_feature(h)).collect()).collect();
        if rows.is_empty() {
            return Self::identity(n);
        }
        let m = rows.len() as f64;
        let mut mean = vec![0.0; n];
        for r in &rows {
            for (acc, x) in mean.iter_mut().zip(r.iter()) {
                *acc += x;
            }
        }
        mean.iter_mut().for_each(|x| *x /= m);
        let mut var = vec![0.0; n];
        for r in &rows {
            for d in 0..n {
                var[d] += (r[d] - mean[d]).powi(2);
            }
        }
        let scale = var
            .iter()
            .zip(&mean)
            .map(|(v, mu)| {
                let s = (v / m).sqrt();
                if rows.len() < 2 || !(s > 1e-12 * mu.abs().max(1.0)) {
                    1.0
                } else {
                    s
                }
            })
            .collect();
        Self { mean, scale }
    }

    /// Standardised features of raw gains `h`.
    pub fn apply(&self, h: &[f64]) -> Vec<f64> {
        h.iter()
            .zip(self.mean.iter().zip(&self.scale))
            .map(|(&x, (m, s))| (channel_feature(x) - m) / s)
            .collect()
    }
}

/// Factored `K + (σ² + jitter) I` for a fixed input set.
#[derive(Debug, Clone)]
struct Factor {
    chol: Cholesky,
    jitter: f64,
}

fn gram(inputs: &[GpInput], p: &KernelParams) -> Vec<f64> {
    let j = inputs.len();
    let mut k = vec![0.0; j * j];
    for a in 0..j {
        for b in 0..=a {
            let v = kernel(&inputs[a], &inputs[b], p).expect("consistent inputs");
            k[a * j + b] = v;
            k[b * j + a] = v;
        }
    }
    k
}

fn factor_with_ladder(k: &[f64], j: usize, noise_var: f64, capacity: usize) -> Result<Factor> {
    let mut m = k.to_vec();
    for &jitter in &JITTER_LADDER {
        for i in 0..j {
            m[i * j + i] = k[i * j + i] + noise_var + jitter;
        }
        if let Some(chol) = Cholesky::factor(&m, j, capacity) {
            return Ok(Factor { chol, jitter });
        }
    }
    Err(LabError::Numerical(format!(
        "Gram matrix of size {j} not positive definite after jitter {:e}",
        JITTER_LADDER[JITTER_LADDER.len() - 1]
    )))
}

fn check_inputs(inputs: &[GpInput], y: &[f64], p: &KernelParams) -> Result<()> {
    p.validate()?;
    if inputs.len() != y.len() {
        return Err(LabError::Shape { expected: inputs.len(), got: y.len() });
    }
    if inputs.is_empty() {
        return Err(LabError::domain("empty cache"));
    }
    let n = p.n_devices();
    if let Some(z) = inputs.iter().find(|z| z.h.len() != n || z.a.len() != n) {
        return Err(LabError::domain(format!(
            "input with {} channels / {} levels, kernel expects {n}",
            z.h.len(),
            z.a.len()
        )));
    }
    Ok(())
}

/// log q(Y | Z) including the −(J/2) ln 2π constant.
pub fn log_marginal_likelihood(inputs: &[GpInput], y: &[f64], p: &KernelParams) -> Result<f64> {
    check_inputs(inputs, y, p)?;
    let j = inputs.len();
    let f = factor_with_ladder(&gram(inputs, p), j, p.noise * p.noise, j)?;
    let alpha = f.chol.solve(y);
    Ok(-0.5 * dot(y, &alpha) - 0.5 * f.chol.log_det() - 0.5 * j as f64 * LN_2PI)
}

/// Pairwise quantities that do not depend on θ, packed lower-triangular.
struct Pairwise {
    j: usize,
    n: usize,
    /// squared differences, `n` per pair
    sq: Vec<f64>,
    matches: Vec<f64>,
    lag: Vec<f64>,
}

impl Pairwise {
    fn new(inputs: &[GpInput]) -> Self {
        let j = inputs.len();
        let n = inputs[0].h.len();
        let pairs = j * (j + 1) / 2;
        let mut sq = Vec::with_capacity(pairs * n);
        let mut matches = Vec::with_capacity(pairs);
        let mut lag = Vec::with_capacity(pairs);
        for a in 0..j {
            for b in 0..=a {
                let (za, zb) = (&inputs[a], &inputs[b]);
                sq.extend(za.h.iter().zip(&zb.h).map(|(x, y)| (x - y) * (x - y)));
                matches.push(za.a.iter().zip(&zb.a).filter(|(x, y)| x == y).count() as f64);
                lag.push((za.t - zb.t).abs());
            }
        }
        Self { j, n, sq, matches, lag }
    }
}

/// Negative LML and its gradient in the unconstrained coordinates.
struct Objective<'a> {
    pw: Pairwise,
    y: &'a [f64],
}

impl Objective<'_> {
    /// Returns (LML, optional gradient w.r.t. `to_unconstrained` coordinates).
    fn eval(&self, p: &KernelParams, want_grad: bool) -> Option<(f64, Vec<f64>)> {
        let (j, n) = (self.pw.j, self.pw.n);
        let inv_l2: Vec<f64> = p.length_scales.iter().map(|l| 1.0 / (l * l)).collect();
        let ln_keep = (-p.decay).ln_1p();
        let cat_unit = p.cat_scale / n as f64;
        let pairs = j * (j + 1) / 2;
        let mut r = vec![0.0; pairs];
        let mut c = vec![0.0; pairs];
        let mut tm = vec![0.0; pairs];
        let mut k = vec![0.0; j * j];
        let mut idx = 0;
        for a in 0..j {
            for b in 0..=a {
                let q: f64 = self.pw.sq[idx * n..(idx + 1) * n]
                    .iter()
                    .zip(&inv_l2)
                    .map(|(s, w)| s * w)
                    .sum();
                r[idx] = p.output_scale * (-0.5 * q).exp();
                c[idx] = cat_unit * self.pw.matches[idx];
                tm[idx] = (0.5 * self.pw.lag[idx] * ln_keep).exp();
                k[a * j + b] = combine(r[idx], c[idx], tm[idx]);
                idx += 1;
            }
        }
        let noise_var = p.noise * p.noise;
        let f = factor_with_ladder(&k, j, noise_var, j).ok()?;
        let alpha = f.chol.solve(self.y);
        let lml = -0.5 * dot(self.y, &alpha) - 0.5 * f.chol.log_det() - 0.5 * j as f64 * LN_2PI;
        if !lml.is_finite() {
            return None;
        }
        if !want_grad {
            return Some((lml, Vec::new()));
        }
        // dLML/dθ = ½ tr((ααᵀ − K⁻¹) ∂K/∂θ)
        let inv = f.chol.inverse();
        let mut g = vec![0.0; n + 4];
        let mut idx = 0;
        for a in 0..j {
            for b in 0..=a {
                let w = alpha[a] * alpha[b] - inv[a * j + b];
                let w = if a == b { 0.5 * w } else { w };
                let (ri, ci, ti) = (r[idx], c[idx], tm[idx]);
                let kij = combine(ri, ci, ti);
                let dr = ti * ri * (1.0 + ci);
                g[0] += w * dr;
                let sq = &self.pw.sq[idx * n..(idx + 1) * n];
                for d in 0..n {
                    g[1 + d] += w * dr * sq[d] * inv_l2[d];
                }
                g[n + 1] += w * ti * ci * (1.0 + ri);
                g[n + 2] += w * (-0.5 * self.pw.lag[idx] * p.decay) * kij;
                if a == b {
                    g[n + 3] += w * 2.0 * noise_var;
                }
                idx += 1;
            }
        }
        Some((lml, g))
    }
}

/// LML and analytic gradient with respect to
/// [ln υ_h, ln ℓ_1..ℓ_N, ln υ_a, logit ρ, ln σ_ε].
pub fn lml_gradient(inputs: &[GpInput], y: &[f64], p: &KernelParams) -> Result<(f64, Vec<f64>)> {
    check_inputs(inputs, y, p)?;
    let obj = Objective { pw: Pairwise::new(inputs), y };
    obj.eval(p, true)
        .ok_or_else(|| LabError::Numerical("log marginal likelihood not finite".into()))
}

/// Result of a hyperparameter refit.
#[derive(Debug, Clone, PartialEq)]
pub struct RefitOutcome {
    pub params: KernelParams,
    pub lml_initial: f64,
    pub lml_final: f64,
    pub iterations: usize,
}

const LBFGS_MEMORY: usize = 7;

/// Maximises the LML from `init` with a projected L-BFGS in the unconstrained
/// coordinates. Never returns parameters with a lower likelihood than `init`.
pub fn refit(inputs: &[GpInput], y: &[f64], init: &KernelParams, max_iters: usize) -> Result<RefitOutcome> {
    check_inputs(inputs, y, init)?;
    if inputs.len() < 2 {
        return Err(LabError::domain("refit needs at least 2 observations"));
    }
    let obj = Objective { pw: Pairwise::new(inputs), y };
    let n = init.n_devices();
    let (lo, hi) = KernelParams::bounds(n);
    let project = |x: &mut [f64]| {
        for ((v, l), h) in x.iter_mut().zip(&lo).zip(&hi) {
            *v = v.clamp(*l, *h);
        }
    };
    let lml_initial = obj
        .eval(init, false)
        .ok_or_else(|| LabError::Numerical("initial log marginal likelihood not finite".into()))?
        .0;

    let mut x = init.to_unconstrained();
    project(&mut x);
    let Some((mut fx, mut gx)) = obj.eval(&KernelParams::from_unconstrained(&x), true) else {
        log::warn!("refit: projected start not evaluable, keeping initial parameters");
        return Ok(RefitOutcome { params: init.clone(), lml_initial, lml_final: lml_initial, iterations: 0 });
    };
    // minimise f = −LML
    fx = -fx;
    gx.iter_mut().for_each(|g| *g = -*g);

    let mut hist: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut iterations = 0;
    for it in 0..max_iters {
        iterations = it + 1;
        // free variables: not pinned at a bound by the gradient
        let free: Vec<bool> = (0..x.len())
            .map(|i| !((x[i] <= lo[i] && gx[i] > 0.0) || (x[i] >= hi[i] && gx[i] < 0.0)))
            .collect();
        let pg: f64 = gx.iter().zip(&free).filter(|(_, f)| **f).map(|(g, _)| g * g).sum::<f64>().sqrt();
        if pg < 1e-7 {
            break;
        }
        let mut d: Vec<f64> = gx.iter().zip(&free).map(|(g, f)| if *f { -g } else { 0.0 }).collect();
        two_loop(&mut d, &hist, &free);
        let slope = dot(&d, &gx);
        if !(slope < 0.0) {
            d = gx.iter().zip(&free).map(|(g, f)| if *f { -g } else { 0.0 }).collect();
            hist.clear();
        }
        let mut step = if hist.is_empty() { (1.0 / pg).min(1.0) } else { 1.0 };
        let mut accepted = None;
        for _ in 0..30 {
            let mut xn: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + step * b).collect();
            project(&mut xn);
            let pn = KernelParams::from_unconstrained(&xn);
            if let Some((fv, _)) = obj.eval(&pn, false) {
                let fv = -fv;
                let moved: f64 = xn.iter().zip(&x).zip(&gx).map(|((a, b), g)| (a - b) * g).sum();
                if fv <= fx + 1e-4 * moved.min(0.0) {
                    accepted = Some((xn, fv));
                    break;
                }
            }
            step *= 0.5;
        }
        let Some((xn, fv)) = accepted else { break };
        let Some((_, mut gn)) = obj.eval(&KernelParams::from_unconstrained(&xn), true) else { break };
        gn.iter_mut().for_each(|g| *g = -*g);
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let yv: Vec<f64> = gn.iter().zip(&gx).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &yv);
        if sy > 1e-12 {
            if hist.len() == LBFGS_MEMORY {
                hist.pop_front();
            }
            hist.push_back((s, yv, 1.0 / sy));
        }
        let decrease = fx - fv;
        x = xn;
        fx = fv;
        gx = gn;
        if decrease <= 1e-10 * (1.0 + fx.abs()) {
            break;
        }
    }
    let lml_final = -fx;
    if lml_final < lml_initial - 1e-9 {
        log::warn!("refit did not improve the likelihood ({lml_final} < {lml_initial}); keeping initial parameters");
        return Ok(RefitOutcome { params: init.clone(), lml_initial, lml_final: lml_initial, iterations });
    }
    Ok(RefitOutcome { params: KernelParams::from_unconstrained(&x), lml_initial, lml_final, iterations })
}

/// L-BFGS two-loop recursion restricted to the free coordinates.
fn two_loop(d: &mut [f64], hist: &VecDeque<(Vec<f64>, Vec<f64>, f64)>, free: &[bool]) {
    if hist.is_empty() {
        return;
    }
    let masked = |v: &[f64]| -> Vec<f64> { v.iter().zip(free).map(|(x, f)| if *f { *x } else { 0.0 }).collect() };
    let mut alphas = Vec::with_capacity(hist.len());
    for (s, y, rho) in hist.iter().rev() {
        let (s, y) = (masked(s), masked(y));
        let a = rho * dot(&s, d);
        for (di, yi) in d.iter_mut().zip(&y) {
            *di -= a * yi;
        }
        alphas.push(a);
    }
    let (s, y, _) = hist.back().expect("non-empty");
    let (s, y) = (masked(s), masked(y));
    let yy = dot(&y, &y);
    if yy > 0.0 {
        let gamma = dot(&s, &y) / yy;
        if gamma > 0.0 {
            d.iter_mut().for_each(|v| *v *= gamma);
        }
    }
    for ((s, y, rho), a) in hist.iter().zip(alphas.into_iter().rev()) {
        let (s, y) = (masked(s), masked(y));
        let b = rho * dot(&y, d);
        for (di, si) in d.iter_mut().zip(&s) {
            *di += (a - b) * si;
        }
    }
}

/// GP surrogate over the observation cache, kept factored between updates.
#[derive(Debug, Clone)]
pub struct GpModel {
    n: usize,
    params: KernelParams,
    cache: BoCache,
    scaler: Standardizer,
    /// Once refitted, the standardiser only changes at the next refit.
    frozen: bool,
    feats: VecDeque<Vec<f64>>,
    factor: Option<Factor>,
    alpha: Vec<f64>,
}

impl GpModel {
    pub fn new(n_devices: usize, capacity: usize, params: KernelParams) -> Result<Self> {
        params.validate()?;
        if params.n_devices() != n_devices {
            return Err(LabError::Shape { expected: n_devices, got: params.n_devices() });
        }
        Ok(Self {
            n: n_devices,
            params,
            cache: BoCache::new(capacity),
            scaler: Standardizer::identity(n_devices),
            frozen: false,
            feats: VecDeque::with_capacity(capacity),
            factor: None,
            alpha: Vec::new(),
        })
    }

    pub fn params(&self) -> &KernelParams {
        &self.params
    }

    pub fn cache(&self) -> &BoCache {
        &self.cache
    }

    pub fn standardizer(&self) -> &Standardizer {
        &self.scaler
    }

    /// Jitter currently added to the diagonal.
    pub fn jitter(&self) -> f64 {
        self.factor.as_ref().map_or(0.0, |f| f.jitter)
    }

    /// Training inputs in the standardised feature space.
    pub fn training_inputs(&self) -> Vec<GpInput> {
        self.cache
            .iter()
            .zip(&self.feats)
            .map(|(o, h)| GpInput { h: h.clone(), a: o.a.clone(), t: o.t as f64 })
            .collect()
    }

    pub fn set_params(&mut self, params: KernelParams) -> Result<()> {
        params.validate()?;
        if params.n_devices() != self.n {
            return Err(LabError::Shape { expected: self.n, got: params.n_devices() });
        }
        self.params = params;
        self.rebuild()
    }

    /// Adds an observation, evicting the oldest one if the cache is full.
    pub fn insert(&mut self, obs: Observation) -> Result<()> {
        if obs.h.len() != self.n {
            return Err(LabError::Shape { expected: self.n, got: obs.h.len() });
        }
        if obs.a.len() != self.n {
            return Err(LabError::Shape { expected: self.n, got: obs.a.len() });
        }
        if !obs.y.is_finite() || obs.h.iter().any(|x| !x.is_finite()) {
            return Err(LabError::domain("observation must be finite"));
        }
        let evicted = self.cache.push(obs);
        if !self.frozen {
            self.scaler = Standardizer::fit(self.n, self.cache.iter().map(|o| o.h.as_slice()));
            return self.rebuild();
        }
        let last = self.cache.get(self.cache.len() - 1);
        let z = GpInput { h: self.scaler.apply(&last.h), a: last.a.clone(), t: last.t as f64 };
        let Some(f) = self.factor.as_mut() else { return self.rebuild() };
        if evicted.is_some() {
            self.feats.pop_front();
            f.chol.remove_first();
        }
        let off: Vec<f64> = self
            .cache
            .iter()
            .zip(&self.feats)
            .map(|(o, h)| combine_raw(&z, h, &o.a, o.t as f64, &self.params))
            .collect();
        let diag = self.params.prior_variance() + self.params.noise * self.params.noise + f.jitter;
        self.feats.push_back(z.h);
        if !f.chol.append(&off, diag) {
            return self.rebuild();
        }
        self.alpha = f.chol.solve(&self.cache.targets());
        Ok(())
    }

    /// Re-standardises, refits θ from the current parameters and refactors.
    pub fn refit(&mut self, max_iters: usize) -> Result<Option<RefitOutcome>> {
        if self.cache.len() < 2 {
            return Ok(None);
        }
        self.scaler = Standardizer::fit(self.n, self.cache.iter().map(|o| o.h.as_slice()));
        self.frozen = true;
        self.rebuild()?;
        let out = refit(&self.training_inputs(), &self.cache.targets(), &self.params, max_iters)?;
        self.params = out.params.clone();
        self.rebuild()?;
        Ok(Some(out))
    }

    fn rebuild(&mut self) -> Result<()> {
        self.feats = self.cache.iter().map(|o| self.scaler.apply(&o.h)).collect();
        if self.cache.is_empty() {
            self.factor = None;
            self.alpha.clear();
            return Ok(());
        }
        let inputs = self.training_inputs();
        let j = inputs.len();
        let f = factor_with_ladder(&gram(&inputs, &self.params), j, self.params.noise.powi(2), self.cache.capacity())?;
        if f.jitter > 0.0 {
            log::debug!("GP factorisation needed jitter {:e}", f.jitter);
        }
        self.alpha = f.chol.solve(&self.cache.targets());
        self.factor = Some(f);
        Ok(())
    }

    /// LML of the cache under the current parameters.
    pub fn log_marginal_likelihood(&self) -> Result<f64> {
        log_marginal_likelihood(&self.training_inputs(), &self.cache.targets(), &self.params)
    }

    /// Posterior (mean, variance) at a raw-channel query.
    pub fn posterior(&self, h: &[f64], a: &[usize], t: usize) -> Result<(f64, f64)> {
        if a.len() != self.n {
            return Err(LabError::Shape { expected: self.n, got: a.len() });
        }
        Ok(self.posterior_batch(h, t, &[a])?[0])
    }

    /// Posterior at (h, a_k, t) for every action `a_k`; h and t are shared so the
    /// channel and temporal factors are computed once.
    pub fn posterior_batch(&self, h: &[f64], t: usize, actions: &[&[usize]]) -> Result<Vec<(f64, f64)>> {
        if h.len() != self.n {
            return Err(LabError::Shape { expected: self.n, got: h.len() });
        }
        if let Some(a) = actions.iter().find(|a| a.len() != self.n) {
            return Err(LabError::Shape { expected: self.n, got: a.len() });
        }
        let prior = self.params.prior_variance();
        let Some(f) = self.factor.as_ref() else {
            return Ok(vec![(0.0, prior); actions.len()]);
        };
        let hz = self.scaler.apply(h);
        let probe = GpInput { h: hz, a: vec![0; self.n], t: t as f64 };
        let unit = self.params.cat_scale / self.n as f64;
        let rt: Vec<(f64, f64)> = self
            .cache
            .iter()
            .zip(&self.feats)
            .map(|(o, hf)| {
                let r = super::kernel::rbf(&probe.h, hf, &self.params);
                let tm = super::kernel::temporal(probe.t, o.t as f64, &self.params);
                (r, tm)
            })
            .collect();
        let mut out = Vec::with_capacity(actions.len());
        let mut kv = vec![0.0; rt.len()];
        for a in actions {
            for ((kvi, (r, tm)), o) in kv.iter_mut().zip(&rt).zip(self.cache.iter()) {
                let m = a.iter().zip(&o.a).filter(|(x, y)| x == y).count() as f64;
                *kvi = combine(*r, unit * m, *tm);
            }
            let mu = dot(&kv, &self.alpha);
            f.chol.solve_lower_in_place(&mut kv);
            let var = prior - dot(&kv, &kv);
            let var = if var < 0.0 { 0.0 } else { var };
            out.push((mu, var));
        }
        Ok(out)
    }
}

fn combine_raw(z: &GpInput, h: &[f64], a: &[usize], t: f64, p: &KernelParams) -> f64 {
    combine(
        super::kernel::rbf(&z.h, h, p),
        super::kernel::categorical(&z.a, a, p),
        super::kernel::temporal(z.t, t, p),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn obs(h: f64, a: usize, t: usize, y: f64) -> Observation {
        Observation { h: vec![h], a: vec![a], t, y }
    }

    #[test]
    fn empty_cache_gives_prior() {
        let p = KernelParams::initial(2);
        let m = GpModel::new(2, 8, p.clone()).unwrap();
        let (mu, var) = m.posterior(&[1.0, 2.0], &[0, 1], 3).unwrap();
        assert_eq!(mu, 0.0);
        assert_eq!(var, p.prior_variance());
    }

    #[test]
    fn single_observation_closed_form() {
        let p = KernelParams::initial(1);
        let mut m = GpModel::new(1, 8, p.clone()).unwrap();
        m.insert(obs(0.5, 1, 1, 2.0)).unwrap();
        let v = p.prior_variance();
        let s2 = p.noise * p.noise;
        let (mu, var) = m.posterior(&[0.5], &[1], 1).unwrap();
        assert!((mu - v * 2.0 / (v + s2)).abs() < 1e-12);
        assert!((var - (v - v * v / (v + s2))).abs() < 1e-12);
        let lml = m.log_marginal_likelihood().unwrap();
        let want = -4.0 / (2.0 * (v + s2)) - 0.5 * (v + s2).ln() - 0.5 * LN_2PI;
        assert!((lml - want).abs() < 1e-12);
    }

    #[test]
    fn incremental_matches_rebuild() {
        let p = KernelParams { output_scale: 1.3, length_scales: vec![0.7], cat_scale: 0.4, decay: 0.05, noise: 0.2 };
        let mut m = GpModel::new(1, 5, p.clone()).unwrap();
        m.insert(obs(0.1, 0, 1, 0.3)).unwrap();
        m.insert(obs(0.9, 1, 2, -0.2)).unwrap();
        m.refit(0).unwrap();
        for t in 3..20 {
            let h = (t as f64 * 0.37).sin();
            m.insert(obs(h, t % 3, t, h * 0.5)).unwrap();
        }
        let mut fresh = m.clone();
        fresh.rebuild().unwrap();
        for (h, a) in [(0.2, 0), (-0.5, 2), (0.9, 1)] {
            let (m1, v1) = m.posterior(&[h], &[a], 20).unwrap();
            let (m2, v2) = fresh.posterior(&[h], &[a], 20).unwrap();
            assert!((m1 - m2).abs() < 1e-10 && (v1 - v2).abs() < 1e-10);
        }
    }

    #[test]
    fn refit_needs_two_points() {
        let mut m = GpModel::new(1, 4, KernelParams::initial(1)).unwrap();
        m.insert(obs(0.1, 0, 1, 0.3)).unwrap();
        assert!(m.refit(10).unwrap().is_none());
    }

    #[test]
    fn shape_errors() {
        let mut m = GpModel::new(2, 4, KernelParams::initial(2)).unwrap();
        assert!(m.insert(obs(0.1, 0, 1, 0.3)).is_err());
        assert!(m.posterior(&[0.0], &[0, 0], 1).is_err());
        assert!(GpModel::new(3, 4, KernelParams::initial(2)).is_err());
    }
}
