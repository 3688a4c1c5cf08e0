use lab_core::actor::{bce_loss, clip_global_norm, generate_candidates, Adam, PreferenceNet};
use lab_core::{decode_one_hot, DegradationAction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn gradient_matches_central_differences() {
    // 2 devices × 2 levels, width-4 hidden layer
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let net = PreferenceNet::new(6, &[4], 4, &mut rng).unwrap();
    let xs: Vec<Vec<f64>> = (0..5).map(|_| (0..6).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
    let ys: Vec<Vec<f64>> = (0..5)
        .map(|_| {
            let a = rng.gen_range(0..2);
            let b = rng.gen_range(0..2);
            let mut v = vec![0.0; 4];
            v[a] = 1.0;
            v[2 + b] = 1.0;
            v
        })
        .collect();
    let xr: Vec<&[f64]> = xs.iter().map(|v| v.as_slice()).collect();
    let yr: Vec<&[f64]> = ys.iter().map(|v| v.as_slice()).collect();
    let (loss, grad) = net.loss_and_grad(&xr, &yr).unwrap();

    let preds = |n: &PreferenceNet| xs.iter().map(|x| n.forward(x).unwrap()).collect::<Vec<_>>();
    assert!((loss - bce_loss(&preds(&net), &ys)).abs() < 1e-10);
    for (i, gi) in grad.iter().enumerate() {
        let eps = 1e-6;
        let mut p = net.clone();
        p.params_mut()[i] += eps;
        let mut m = net.clone();
        m.params_mut()[i] -= eps;
        let fd = (bce_loss(&preds(&p), &ys) - bce_loss(&preds(&m), &ys)) / (2.0 * eps);
        let rel = (fd - gi).abs() / fd.abs().max(gi.abs()).max(1e-6);
        assert!(rel <= 1e-4, "param {i}: analytic {gi} fd {fd}");
    }
}

#[test]
fn loss_decreases_on_frozen_memory() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (n, a) = (3, 4);
    let mut net = PreferenceNet::new(8, &[128, 128], n * a, &mut rng).unwrap();
    let mut adam = Adam::new(net.params().len(), 0.01);
    // target depends on the input so the map is learnable
    let data: Vec<(Vec<f64>, Vec<f64>)> = (0..256)
        .map(|_| {
            let x: Vec<f64> = (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mut y = vec![0.0; n * a];
            for d in 0..n {
                let lvl = ((x[d] + 1.0) * 2.0).floor().min(3.0) as usize;
                y[d * a + lvl] = 1.0;
            }
            (x, y)
        })
        .collect();
    let mut losses = Vec::new();
    for _ in 0..100 {
        let idx = rand::seq::index::sample(&mut rng, data.len(), 64);
        let xs: Vec<&[f64]> = idx.iter().map(|i| data[i].0.as_slice()).collect();
        let ys: Vec<&[f64]> = idx.iter().map(|i| data[i].1.as_slice()).collect();
        let (loss, mut g) = net.loss_and_grad(&xs, &ys).unwrap();
        assert!(loss.is_finite());
        clip_global_norm(&mut g, 5.0);
        adam.step(net.params_mut(), &g);
        losses.push(loss);
    }
    let head: f64 = losses[..10].iter().sum::<f64>() / 10.0;
    let tail: f64 = losses[90..].iter().sum::<f64>() / 10.0;
    assert!(tail < 0.5 * head, "loss {head} -> {tail}");
}

#[test]
fn candidates_always_decode() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..200 {
        let n = rng.gen_range(1..6);
        let a = rng.gen_range(2..5);
        let prefs: Vec<f64> = (0..n * a).map(|_| rng.gen_range(0.0..1.0)).collect();
        let k = rng.gen_range(1..40);
        for c in generate_candidates(&prefs, a, k, &mut rng) {
            let d: DegradationAction = decode_one_hot(&c.one_hot, a).unwrap();
            assert_eq!(&d, &c.action);
        }
    }
}
