//! Quick versions of the oracle suites, runnable from the binary.

use std::time::Instant;

use lab_core::actor::{bce_loss, PreferenceNet};
use lab_core::bandwidth::{lambert_w0, oracle_allocation, solve_allocation, AllocationProblem, BRANCH_POINT};
use lab_core::config::dbm_per_hz_to_watt;
use lab_core::critic::{lml_gradient, log_marginal_likelihood, GpInput, KernelParams};
use lab_core::env::mean_gain;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        Check { name, passed, detail }
    }

    pub fn line(&self) -> String {
        format!("{} {}: {}", if self.passed { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

pub fn random_instance<R: Rng>(rng: &mut R, n: usize) -> AllocationProblem {
    let levels = [55_296_000.0, 13_824_000.0, 3_456_000.0, 864_000.0];
    AllocationProblem {
        data_bits: (0..n).map(|_| levels[rng.gen_range(0..levels.len())]).collect(),
        gains: (0..n)
            .map(|_| {
                let d: f64 = rng.gen_range(25.0..56.0);
                mean_gain(d, 4.11, 2.4e9, 2.4).expect("valid geometry") * rng.gen_range(0.01..4.0)
            })
            .collect(),
        powers: (0..n).map(|_| rng.gen_range(0.05..0.3)).collect(),
        weights: (0..n).map(|_| rng.gen_range(0.2..3.0)).collect(),
        bandwidth_hz: 5e6,
        noise_psd: dbm_per_hz_to_watt(-174.0),
    }
}

fn bandwidth_suite(instances: usize) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut gap, mut db, mut kkt): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let mut times = Vec::with_capacity(instances);
    for i in 0..instances {
        let p = random_instance(&mut rng, 1 + i % 8);
        let start = Instant::now();
        let a = match solve_allocation(&p) {
            Ok(a) => a,
            Err(e) => return Check::new("bandwidth", false, format!("instance {i}: {e}")),
        };
        times.push(start.elapsed().as_secs_f64());
        let o = match oracle_allocation(&p) {
            Ok(o) => o,
            Err(e) => return Check::new("bandwidth", false, format!("oracle on instance {i}: {e}")),
        };
        gap = gap.max(((a.objective - o.objective) / o.objective).abs());
        db = a.b.iter().zip(&o.b).map(|(x, y)| (x - y).abs()).fold(db, f64::max);
        let r = a.kkt_residuals(&p);
        kkt = kkt.max(r.stationarity).max(r.tightness).max(r.budget);
    }
    times.sort_by(f64::total_cmp);
    let median_ms = times[times.len() / 2] * 1e3;
    let ok = gap <= 1e-6 && db <= 1e-6 && kkt <= 1e-9;
    Check::new(
        "bandwidth",
        ok,
        format!("{instances} instances, objective gap {gap:.1e}, max |db| {db:.1e}, KKT {kkt:.1e}, median {median_ms:.3} ms"),
    )
}

fn lambert_suite(points: usize) -> Check {
    let lo = BRANCH_POINT + 1e-12;
    let hi = 1e6;
    let mut worst: f64 = 0.0;
    for i in 0..points {
        let x = lo + (hi - lo) * i as f64 / (points - 1) as f64;
        let w = match lambert_w0(x) {
            Ok(w) => w,
            Err(e) => return Check::new("lambert-w", false, format!("x={x}: {e}")),
        };
        worst = worst.max((w * w.exp() - x).abs() / x.abs().max(f64::MIN_POSITIVE));
    }
    Check::new("lambert-w", worst <= 1e-12, format!("{points} points, max relative residual {worst:.1e}"))
}

fn gp_gradient_suite(cases: usize) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for _ in 0..cases {
        let n = rng.gen_range(1..=3);
        let p = KernelParams {
            output_scale: 10f64.powf(rng.gen_range(-0.5..0.5)),
            length_scales: (0..n).map(|_| 10f64.powf(rng.gen_range(-0.3..0.7))).collect(),
            cat_scale: 10f64.powf(rng.gen_range(-0.5..0.5)),
            decay: rng.gen_range(0.001..0.3),
            noise: rng.gen_range(0.05..0.5),
        };
        let j = rng.gen_range(3..25);
        let inputs: Vec<GpInput> = (0..j)
            .map(|i| GpInput {
                h: (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect(),
                a: (0..n).map(|_| rng.gen_range(0..3)).collect(),
                t: (i + 1) as f64,
            })
            .collect();
        let y: Vec<f64> = (0..j).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let Ok((_, g)) = lml_gradient(&inputs, &y, &p) else {
            return Check::new("gp-gradient", false, "gradient failed".into());
        };
        let x0 = p.to_unconstrained();
        for (i, gi) in g.iter().enumerate() {
            let eps = 1e-5;
            let mut xp = x0.clone();
            let mut xm = x0.clone();
            xp[i] += eps;
            xm[i] -= eps;
            let lml = |x: &[f64]| log_marginal_likelihood(&inputs, &y, &KernelParams::from_unconstrained(x));
            let (Ok(fp), Ok(fm)) = (lml(&xp), lml(&xm)) else {
                return Check::new("gp-gradient", false, "likelihood failed".into());
            };
            let fd = (fp - fm) / (2.0 * eps);
            worst = worst.max((fd - gi).abs() / fd.abs().max(gi.abs()).max(1e-3));
        }
    }
    Check::new("gp-gradient", worst <= 1e-4, format!("{cases} caches, max relative error {worst:.1e}"))
}

fn actor_gradient_suite() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let Ok(net) = PreferenceNet::new(2, &[2], 2, &mut rng) else {
        return Check::new("actor-gradient", false, "network construction failed".into());
    };
    let xs: Vec<Vec<f64>> = (0..4).map(|_| (0..2).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
    let ys: Vec<Vec<f64>> = (0..4).map(|i| if i % 2 == 0 { vec![1.0, 0.0] } else { vec![0.0, 1.0] }).collect();
    let xr: Vec<&[f64]> = xs.iter().map(Vec::as_slice).collect();
    let yr: Vec<&[f64]> = ys.iter().map(Vec::as_slice).collect();
    let Ok((_, grad)) = net.loss_and_grad(&xr, &yr) else {
        return Check::new("actor-gradient", false, "backprop failed".into());
    };
    let loss = |n: &PreferenceNet| {
        let preds: Vec<Vec<f64>> = xs.iter().map(|x| n.forward(x).expect("input width matches")).collect();
        bce_loss(&preds, &ys)
    };
    let mut worst: f64 = 0.0;
    for (i, gi) in grad.iter().enumerate() {
        let eps = 1e-6;
        let mut p = net.clone();
        p.params_mut()[i] += eps;
        let mut m = net.clone();
        m.params_mut()[i] -= eps;
        let fd = (loss(&p) - loss(&m)) / (2.0 * eps);
        worst = worst.max((fd - gi).abs() / fd.abs().max(gi.abs()).max(1e-6));
    }
    Check::new("actor-gradient", worst <= 1e-4, format!("{} parameters, max relative error {worst:.1e}", grad.len()))
}

/// Runs every suite. `quick` shrinks the sample counts.
pub fn run_selftest(quick: bool) -> Vec<Check> {
    let (inst, pts, caches) = if quick { (100, 10_000, 5) } else { (1_000, 1_000_000, 50) };
    vec![bandwidth_suite(inst), lambert_suite(pts), gp_gradient_suite(caches), actor_gradient_suite()]
}
