//! GP critic checked against naive dense linear algebra.

use lab_core::critic::{
    lml_gradient, log_marginal_likelihood, refit, select_action, GpInput, GpModel, KernelParams, Observation,
};
use lab_core::{AcquisitionKind, DegradationAction};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// Independent kernel implementation for the oracle.
fn naive_kernel(h1: &[f64], a1: &[usize], t1: f64, h2: &[f64], a2: &[usize], t2: f64, p: &KernelParams) -> f64 {
    let n = h1.len();
    let mut q = 0.0;
    for d in 0..n {
        q += ((h1[d] - h2[d]) / p.length_scales[d]).powi(2);
    }
    let r = p.output_scale * (-0.5 * q).exp();
    let c = p.cat_scale * (0..n).filter(|&d| a1[d] == a2[d]).count() as f64 / n as f64;
    let tm = (1.0 - p.decay).powf((t1 - t2).abs() / 2.0);
    tm * (r + c + r * c)
}

fn random_params(rng: &mut ChaCha8Rng, n: usize) -> KernelParams {
    KernelParams {
        output_scale: 10f64.powf(rng.gen_range(-0.5..0.5)),
        length_scales: (0..n).map(|_| 10f64.powf(rng.gen_range(-0.3..0.7))).collect(),
        cat_scale: 10f64.powf(rng.gen_range(-0.5..0.5)),
        decay: rng.gen_range(0.001..0.3),
        noise: rng.gen_range(0.05..0.5),
    }
}

fn random_obs(rng: &mut ChaCha8Rng, n: usize, levels: usize, j: usize) -> Vec<Observation> {
    (0..j)
        .map(|i| Observation {
            h: (0..n).map(|_| rng.gen_range(0.0..3e-8)).collect(),
            a: (0..n).map(|_| rng.gen_range(0..levels)).collect(),
            t: i + 1,
            y: rng.gen_range(-2.0..2.0),
        })
        .collect()
}

fn feature(h: f64) -> f64 {
    h.max(1e-300).log10()
}

fn zscore(obs: &[Observation], n: usize) -> (Vec<f64>, Vec<f64>) {
    let m = obs.len() as f64;
    let mean: Vec<f64> = (0..n).map(|d| obs.iter().map(|o| feature(o.h[d])).sum::<f64>() / m).collect();
    let sd: Vec<f64> = (0..n)
        .map(|d| {
            let v = obs.iter().map(|o| (feature(o.h[d]) - mean[d]).powi(2)).sum::<f64>() / m;
            if obs.len() < 2 || v.sqrt() == 0.0 {
                1.0
            } else {
                v.sqrt()
            }
        })
        .collect();
    (mean, sd)
}

struct Dense {
    ky: DMatrix<f64>,
    y: DVector<f64>,
    hs: Vec<Vec<f64>>,
}

fn dense(obs: &[Observation], p: &KernelParams, mean: &[f64], sd: &[f64], jitter: f64) -> Dense {
    let j = obs.len();
    let hs: Vec<Vec<f64>> = obs
        .iter()
        .map(|o| o.h.iter().zip(mean.iter().zip(sd)).map(|(x, (m, s))| (feature(*x) - m) / s).collect())
        .collect();
    let ky = DMatrix::from_fn(j, j, |r, c| {
        naive_kernel(&hs[r], &obs[r].a, obs[r].t as f64, &hs[c], &obs[c].a, obs[c].t as f64, p)
            + if r == c { p.noise * p.noise + jitter } else { 0.0 }
    });
    let y = DVector::from_iterator(j, obs.iter().map(|o| o.y));
    Dense { ky, y, hs }
}

fn naive_lml(d: &Dense) -> f64 {
    let inv = d.ky.clone().try_inverse().unwrap();
    let quad = (d.y.transpose() * &inv * &d.y)[(0, 0)];
    let logdet = d.ky.determinant().ln();
    -0.5 * quad - 0.5 * logdet - 0.5 * d.y.len() as f64 * (2.0 * std::f64::consts::PI).ln()
}

#[test]
fn posterior_and_lml_match_dense_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for case in 0..50 {
        let n = rng.gen_range(1..=4);
        let levels = rng.gen_range(2..=4);
        let j = rng.gen_range(1..=64);
        let p = random_params(&mut rng, n);
        let obs = random_obs(&mut rng, n, levels, j);
        let mut model = GpModel::new(n, 64, p.clone()).unwrap();
        for o in &obs {
            model.insert(o.clone()).unwrap();
        }
        let (mean, sd) = zscore(&obs, n);
        let d = dense(&obs, &p, &mean, &sd, model.jitter());
        let inv = d.ky.clone().try_inverse().unwrap();
        for _ in 0..5 {
            let hq: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..3e-8)).collect();
            let aq: Vec<usize> = (0..n).map(|_| rng.gen_range(0..levels)).collect();
            let tq = j + rng.gen_range(1..4);
            let hz: Vec<f64> = hq.iter().zip(mean.iter().zip(&sd)).map(|(x, (m, s))| (feature(*x) - m) / s).collect();
            let k = DVector::from_iterator(
                j,
                (0..j).map(|i| naive_kernel(&hz, &aq, tq as f64, &d.hs[i], &obs[i].a, obs[i].t as f64, &p)),
            );
            let mu = (k.transpose() * &inv * &d.y)[(0, 0)];
            let var = naive_kernel(&hz, &aq, tq as f64, &hz, &aq, tq as f64, &p) - (k.transpose() * &inv * &k)[(0, 0)];
            let (m2, v2) = model.posterior(&hq, &aq, tq).unwrap();
            worst = worst.max((mu - m2).abs()).max((var.max(0.0) - v2).abs());
            assert!((mu - m2).abs() <= 1e-8, "case {case}: mean {mu} vs {m2}");
            assert!((var.max(0.0) - v2).abs() <= 1e-8, "case {case}: var {var} vs {v2}");
        }
        let lml = model.log_marginal_likelihood().unwrap();
        assert!((lml - naive_lml(&d)).abs() <= 1e-8, "case {case}: lml {lml} vs {}", naive_lml(&d));
    }
    eprintln!("worst posterior deviation {worst:e}");
}

#[test]
fn gram_is_positive_semidefinite() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..30 {
        let n = rng.gen_range(1..=5);
        let mut p = random_params(&mut rng, n);
        p.noise = 0.0;
        let j = rng.gen_range(2..40);
        let obs = random_obs(&mut rng, n, 3, j);
        let d = dense(&obs, &p, &vec![0.0; n], &vec![1.0; n], 0.0);
        let eig = d.ky.symmetric_eigenvalues();
        assert!(eig.iter().all(|&e| e >= -1e-8), "min eigenvalue {}", eig.min());
    }
}

#[test]
fn gradient_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..20 {
        let n = rng.gen_range(1..=3);
        let p = random_params(&mut rng, n);
        let j = rng.gen_range(3..25);
        let obs = random_obs(&mut rng, n, 3, j);
        let inputs: Vec<GpInput> = obs
            .iter()
            .map(|o| GpInput { h: o.h.iter().map(|x| x * 1e8).collect(), a: o.a.clone(), t: o.t as f64 })
            .collect();
        let y: Vec<f64> = obs.iter().map(|o| o.y).collect();
        let (_, g) = lml_gradient(&inputs, &y, &p).unwrap();
        let x0 = p.to_unconstrained();
        for i in 0..x0.len() {
            let eps = 1e-5;
            let mut xp = x0.clone();
            let mut xm = x0.clone();
            xp[i] += eps;
            xm[i] -= eps;
            let fp = log_marginal_likelihood(&inputs, &y, &KernelParams::from_unconstrained(&xp)).unwrap();
            let fm = log_marginal_likelihood(&inputs, &y, &KernelParams::from_unconstrained(&xm)).unwrap();
            let fd = (fp - fm) / (2.0 * eps);
            let rel = (fd - g[i]).abs() / fd.abs().max(g[i].abs()).max(1e-3);
            assert!(rel <= 1e-4, "coord {i}: analytic {} vs fd {fd}", g[i]);
        }
    }
}

fn sample_from_prior(rng: &mut ChaCha8Rng, p: &KernelParams, j: usize, n: usize) -> (Vec<GpInput>, Vec<f64>) {
    let inputs: Vec<GpInput> = (0..j)
        .map(|i| GpInput {
            h: (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect(),
            a: (0..n).map(|_| rng.gen_range(0..3)).collect(),
            t: (i + 1) as f64,
        })
        .collect();
    let k = DMatrix::from_fn(j, j, |r, c| {
        naive_kernel(&inputs[r].h, &inputs[r].a, inputs[r].t, &inputs[c].h, &inputs[c].a, inputs[c].t, p)
            + if r == c { p.noise * p.noise } else { 0.0 }
    });
    let l = k.cholesky().unwrap().l();
    let e = DVector::from_iterator(j, (0..j).map(|_| {
        let (u1, u2): (f64, f64) = (rng.gen_range(1e-12..1.0), rng.gen());
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }));
    let y = l * e;
    (inputs, y.iter().copied().collect())
}

#[test]
fn refit_recovers_generating_likelihood() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let truth = KernelParams { output_scale: 1.5, length_scales: vec![0.8, 1.6], cat_scale: 0.7, decay: 0.02, noise: 0.2 };
    let (inputs, y) = sample_from_prior(&mut rng, &truth, 80, 2);
    let init = KernelParams::initial(2);
    let out = refit(&inputs, &y, &init, 200).unwrap();
    let l_true = log_marginal_likelihood(&inputs, &y, &truth).unwrap();
    assert!(out.lml_final >= l_true - 1e-3, "refit {} vs truth {l_true}", out.lml_final);
    assert!(out.lml_final >= out.lml_initial - 1e-9);
    let check = log_marginal_likelihood(&inputs, &y, &out.params).unwrap();
    assert!((check - out.lml_final).abs() < 1e-9);

    let again = refit(&inputs, &y, &out.params, 200).unwrap();
    assert!(again.lml_final >= out.lml_final - 1e-9);
    assert!((again.lml_final - out.lml_final).abs() <= 1e-6);
}

#[test]
fn refit_never_decreases_on_frozen_cache() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let obs = random_obs(&mut rng, 3, 4, 60);
    let mut model = GpModel::new(3, 64, KernelParams::initial(3)).unwrap();
    for o in obs {
        model.insert(o).unwrap();
    }
    let mut last = f64::NEG_INFINITY;
    for _ in 0..4 {
        model.refit(5).unwrap();
        let l = model.log_marginal_likelihood().unwrap();
        assert!(l >= last - 1e-9, "{l} < {last}");
        last = l;
    }
}

#[test]
fn variance_at_training_inputs_bounded_by_noise() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let obs = random_obs(&mut rng, 2, 3, 30);
    let mut p = KernelParams::initial(2);
    p.noise = 0.01;
    let mut model = GpModel::new(2, 32, p.clone()).unwrap();
    for o in &obs {
        model.insert(o.clone()).unwrap();
    }
    for o in &obs {
        let (_, v) = model.posterior(&o.h, &o.a, o.t).unwrap();
        assert!(v <= p.noise * p.noise + 1e-8);
    }
}

#[test]
fn selection_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..20 {
        let n = 3;
        let obs = random_obs(&mut rng, n, 4, 40);
        let mut model = GpModel::new(n, 64, random_params(&mut rng, n)).unwrap();
        for o in obs {
            model.insert(o).unwrap();
        }
        let cands: Vec<DegradationAction> = (0..8)
            .map(|_| DegradationAction::new((0..n).map(|_| rng.gen_range(0..4)).collect(), 4).unwrap())
            .collect();
        let h: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..3e-8)).collect();
        for kind in [AcquisitionKind::Ucb, AcquisitionKind::Ei, AcquisitionKind::Pi] {
            let sel = select_action(&cands, &h, 41, &model, kind, 2.0).unwrap();
            let best_y = model.cache().best_y().unwrap();
            let vals: Vec<f64> = cands
                .iter()
                .map(|c| {
                    let (m, v) = model.posterior(&h, c.levels(), 41).unwrap();
                    lab_core::critic::acquisition(m, v.sqrt(), kind, 2.0, best_y)
                })
                .collect();
            let mut best = 0;
            for i in 1..vals.len() {
                if vals[i] > vals[best] {
                    best = i;
                }
            }
            assert_eq!(sel.index, best);
            assert_eq!(sel.k_star, best + 1);
        }
    }
}

#[test]
fn selection_edge_cases() {
    let model = GpModel::new(2, 8, KernelParams::initial(2)).unwrap();
    let c = DegradationAction::new(vec![1, 0], 3).unwrap();
    assert!(select_action(&[], &[0.0, 0.0], 1, &model, AcquisitionKind::Ucb, 2.0).is_err());
    let one = select_action(std::slice::from_ref(&c), &[0.0, 0.0], 1, &model, AcquisitionKind::Ucb, 2.0).unwrap();
    assert_eq!(one.k_star, 1);
    let dup = select_action(&[c.clone(), c.clone(), c], &[0.0, 0.0], 1, &model, AcquisitionKind::Ucb, 2.0).unwrap();
    assert_eq!(dup.index, 0);
}
