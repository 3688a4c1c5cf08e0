//! Composite kernel over (channel state, action, slot index).
//!
//! κ(z, z') = κ_tmp(i, i') · [κ_rbf(h, h') + κ_cat(a, a') + κ_rbf(h, h')·κ_cat(a, a')]
//! with an ARD squared-exponential over channels, a matching-fraction kernel over
//! degradation levels and a geometric decay in the slot lag.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Hyperparameters of the composite kernel and the observation noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    /// υ_h
    pub output_scale: f64,
    /// ℓ, one per device.
    pub length_scales: Vec<f64>,
    /// υ_a
    pub cat_scale: f64,
    /// ρ ∈ (0, 1)
    pub decay: f64,
    /// σ_ε (standard deviation)
    pub noise: f64,
}

// Box constraints in the unconstrained coordinates.
const LOG_SCALE_BOUNDS: (f64, f64) = (-9.21, 9.21); // 1e-4 .. 1e4
const LOG_LENGTH_BOUNDS: (f64, f64) = (-4.61, 4.61); // 1e-2 .. 1e2
const LOGIT_DECAY_BOUNDS: (f64, f64) = (-13.8, 0.0); // ~1e-6 .. 0.5
const LOG_NOISE_BOUNDS: (f64, f64) = (-6.91, 2.31); // 1e-3 .. 10

impl KernelParams {
    /// Defaults before any data-driven refit.
    pub fn initial(n_devices: usize) -> Self {
        Self {
            output_scale: 1.0,
            length_scales: vec![1.0; n_devices],
            cat_scale: 1.0,
            decay: 0.01,
            noise: 0.1,
        }
    }

    pub fn n_devices(&self) -> usize {
        self.length_scales.len()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.output_scale > 0.0 && self.cat_scale > 0.0) {
            return Err(LabError::domain("kernel output scales must be > 0"));
        }
        if self.length_scales.iter().any(|&l| !(l > 0.0)) {
            return Err(LabError::domain("length scales must be > 0"));
        }
        if !(self.decay > 0.0 && self.decay < 1.0) {
            return Err(LabError::domain("decay must lie in (0, 1)"));
        }
        if !(self.noise >= 0.0) {
            return Err(LabError::domain("noise must be >= 0"));
        }
        Ok(())
    }

    /// Number of free parameters: N length scales + 4.
    pub fn dim(&self) -> usize {
        self.length_scales.len() + 4
    }

    /// [ln υ_h, ln ℓ_1..ℓ_N, ln υ_a, logit ρ, ln σ_ε]
    pub fn to_unconstrained(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.dim());
        v.push(self.output_scale.ln());
        v.extend(self.length_scales.iter().map(|l| l.ln()));
        v.push(self.cat_scale.ln());
        v.push((self.decay / (1.0 - self.decay)).ln());
        v.push(self.noise.max(1e-300).ln());
        v
    }

    pub fn from_unconstrained(v: &[f64]) -> Self {
        let n = v.len() - 4;
        let logit = v[n + 2];
        Self {
            output_scale: v[0].exp(),
            length_scales: v[1..=n].iter().map(|x| x.exp()).collect(),
            cat_scale: v[n + 1].exp(),
            decay: 1.0 / (1.0 + (-logit).exp()),
            noise: v[n + 3].exp(),
        }
    }

    /// Lower and upper bounds of the unconstrained coordinates.
    pub fn bounds(n_devices: usize) -> (Vec<f64>, Vec<f64>) {
        let mut lo = vec![LOG_SCALE_BOUNDS.0];
        let mut hi = vec![LOG_SCALE_BOUNDS.1];
        lo.extend(std::iter::repeat_n(LOG_LENGTH_BOUNDS.0, n_devices));
        hi.extend(std::iter::repeat_n(LOG_LENGTH_BOUNDS.1, n_devices));
        lo.extend([LOG_SCALE_BOUNDS.0, LOGIT_DECAY_BOUNDS.0, LOG_NOISE_BOUNDS.0]);
        hi.extend([LOG_SCALE_BOUNDS.1, LOGIT_DECAY_BOUNDS.1, LOG_NOISE_BOUNDS.1]);
        (lo, hi)
    }

    /// Clamps into the box used by refits.
    pub fn clamped(&self) -> Self {
        let (lo, hi) = Self::bounds(self.n_devices());
        let v: Vec<f64> = self
            .to_unconstrained()
            .iter()
            .zip(lo.iter().zip(&hi))
            .map(|(x, (l, h))| x.clamp(*l, *h))
            .collect();
        Self::from_unconstrained(&v)
    }

    /// Prior variance κ(z, z) = υ_h + υ_a + υ_h υ_a.
    pub fn prior_variance(&self) -> f64 {
        self.output_scale + self.cat_scale + self.output_scale * self.cat_scale
    }
}

/// One GP input: channel features (already standardised), levels and slot index.
#[derive(Debug, Clone, PartialEq)]
pub struct GpInput {
    pub h: Vec<f64>,
    pub a: Vec<usize>,
    pub t: f64,
}

/// κ_rbf
pub fn rbf(h: &[f64], h2: &[f64], p: &KernelParams) -> f64 {
    let q: f64 = h
        .iter()
        .zip(h2)
        .zip(&p.length_scales)
        .map(|((x, y), l)| {
            let d = (x - y) / l;
            d * d
        })
        .sum();
    p.output_scale * (-0.5 * q).exp()
}

/// κ_cat
pub fn categorical(a: &[usize], a2: &[usize], p: &KernelParams) -> f64 {
    let matches = a.iter().zip(a2).filter(|(x, y)| x == y).count();
    p.cat_scale * matches as f64 / a.len() as f64
}

/// κ_tmp
pub fn temporal(t: f64, t2: f64, p: &KernelParams) -> f64 {
    let lag = (t - t2).abs();
    (0.5 * lag * (-p.decay).ln_1p()).exp()
}

/// Combines the three factors.
#[inline]
pub fn combine(rbf: f64, cat: f64, tmp: f64) -> f64 {
    tmp * (rbf + cat + rbf * cat)
}

/// Full composite kernel.
pub fn kernel(z: &GpInput, z2: &GpInput, p: &KernelParams) -> Result<f64> {
    let n = p.n_devices();
    for (len, what) in [(z.h.len(), "h"), (z2.h.len(), "h'"), (z.a.len(), "a"), (z2.a.len(), "a'")] {
        if len != n {
            return Err(LabError::domain(format!("{what} has {len} entries, kernel expects {n}")));
        }
    }
    Ok(combine(rbf(&z.h, &z2.h, p), categorical(&z.a, &z2.a, p), temporal(z.t, z2.t, p)))
}
