//! Execution of runs and benches and the per-slot / summary writers.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use lab_core::orchestrator::{optimality_gap, run_experiment, Aggregates, PolicyKind, RunResult};
use lab_core::SystemConfig;
use serde::{Deserialize, Serialize};

use crate::manifest::{apply_sweep, point_label, RunManifest};

/// Per-slot CSV header for `n` devices.
pub fn slot_header(n: usize) -> Vec<String> {
    let mut h: Vec<String> = vec!["seed".into(), "t".into(), "policy".into()];
    for prefix in ["a", "b", "alpha", "c", "tau_d", "tau_o", "tau_c", "u"] {
        h.extend((1..=n).map(|i| format!("{prefix}_{i}")));
    }
    h.extend(["U", "K_t", "k_star", "decision_ms"].map(String::from));
    h
}

fn num(v: f64) -> String {
    format!("{v}")
}

/// Renders the per-slot CSV. The first line carries the manifest hash as a
/// `#` comment; timings are left blank unless `timing` is set so the file is a
/// pure function of the manifest.
pub fn render_slots_csv(results: &[RunResult], hash: &str, timing: bool) -> Result<String> {
    let n = results.first().map_or(0, |r| r.slots.first().map_or(0, |s| s.record.action.len()));
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    w.write_record(slot_header(n))?;
    for r in results {
        for s in &r.slots {
            let rec = &s.record;
            let mut row: Vec<String> = vec![r.seed.to_string(), rec.t.to_string(), r.policy.to_string()];
            row.extend(rec.action.iter().map(|a| a.to_string()));
            for v in [&rec.bandwidth, &rec.confidence, &rec.accuracy, &rec.tau_d, &rec.tau_o, &rec.tau_c, &rec.utility] {
                row.extend(v.iter().map(|&x| num(x)));
            }
            row.push(num(rec.total_utility));
            row.push(s.k_t.to_string());
            row.push(s.k_star.to_string());
            row.push(if timing { num(s.decision_ms) } else { String::new() });
            w.write_record(&row)?;
        }
    }
    let body = String::from_utf8(w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?)?;
    Ok(format!("# manifest {hash}\n{body}"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedSummary {
    pub seed: u64,
    pub aggregates: Aggregates,
    /// Mean per-slot shortfall against IDEAL on the same seed, when IDEAL was run.
    pub optimality_gap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pooled {
    pub mean: Aggregates,
    pub stddev: Aggregates,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicySummary {
    pub manifest_hash: String,
    pub policy: PolicyKind,
    pub point: Option<String>,
    pub seeds: Vec<SeedSummary>,
    pub pooled: Pooled,
}

fn pool(aggs: &[Aggregates]) -> Pooled {
    let m = aggs.len() as f64;
    let fields = |a: &Aggregates| [a.utility, a.latency, a.confidence, a.accuracy, a.candidates, a.decision_ms, a.evaluations];
    let from = |v: [f64; 7]| Aggregates {
        utility: v[0],
        latency: v[1],
        confidence: v[2],
        accuracy: v[3],
        candidates: v[4],
        decision_ms: v[5],
        evaluations: v[6],
    };
    let mut mean = [0.0; 7];
    for a in aggs {
        for (acc, x) in mean.iter_mut().zip(fields(a)) {
            *acc += x / m;
        }
    }
    let mut var = [0.0; 7];
    if aggs.len() > 1 {
        for a in aggs {
            for ((acc, x), mu) in var.iter_mut().zip(fields(a)).zip(mean) {
                *acc += (x - mu).powi(2) / (m - 1.0);
            }
        }
    }
    Pooled { mean: from(mean), stddev: from(var.map(f64::sqrt)) }
}

/// Runs every (policy, seed) pair, fanning seeds out over `jobs` threads.
pub fn run_policy(cfg: &SystemConfig, policy: PolicyKind, seeds: &[u64], jobs: usize) -> Result<Vec<RunResult>> {
    let jobs = jobs.max(1).min(seeds.len().max(1));
    if jobs == 1 {
        return seeds.iter().map(|&s| Ok(run_experiment(cfg, policy, s)?)).collect();
    }
    let chunks: Vec<&[u64]> = seeds.chunks(seeds.len().div_ceil(jobs)).collect();
    let parts: Vec<Result<Vec<RunResult>>> = std::thread::scope(|scope| {
        let handles: Vec<_> = chunks
            .iter()
            .map(|chunk| {
                scope.spawn(move || chunk.iter().map(|&s| Ok(run_experiment(cfg, policy, s)?)).collect::<Result<Vec<_>>>())
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    let mut out = Vec::with_capacity(seeds.len());
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

/// Runs all policies of one configuration point into `dir` and returns the
/// written file names (relative to `dir`) and summaries.
#[allow(clippy::too_many_arguments)]
pub fn run_point(
    cfg: &SystemConfig,
    policies: &[PolicyKind],
    seeds: &[u64],
    dir: &Path,
    hash: &str,
    point: Option<String>,
    timing: bool,
    jobs: usize,
) -> Result<(Vec<String>, Vec<PolicySummary>)> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut results: Vec<(PolicyKind, Vec<RunResult>)> = Vec::new();
    for &p in policies {
        log::info!("{}: running {p} on {} seed(s)", point.as_deref().unwrap_or("run"), seeds.len());
        results.push((p, run_policy(cfg, p, seeds, jobs)?));
    }
    if !timing {
        // wall-clock numbers would make otherwise identical runs differ
        for r in results.iter_mut().flat_map(|(_, runs)| runs.iter_mut()) {
            r.aggregates.decision_ms = 0.0;
        }
    }
    let ideal = results.iter().find(|(p, _)| *p == PolicyKind::Ideal).map(|(_, r)| r.clone());
    let mut files = Vec::new();
    let mut summaries = Vec::new();
    for (p, runs) in &results {
        let csv_name = format!("{p}.csv");
        write_file(&dir.join(&csv_name), &render_slots_csv(runs, hash, timing)?)?;
        let seeds_summary = runs
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let gap = match &ideal {
                    Some(id) => {
                        let g = optimality_gap(&id[i], r)?;
                        Some(g.iter().sum::<f64>() / g.len().max(1) as f64)
                    }
                    None => None,
                };
                Ok(SeedSummary { seed: r.seed, aggregates: r.aggregates, optimality_gap: gap })
            })
            .collect::<Result<Vec<_>>>()?;
        let aggs: Vec<Aggregates> = runs.iter().map(|r| r.aggregates).collect();
        let summary = PolicySummary {
            manifest_hash: hash.to_string(),
            policy: *p,
            point: point.clone(),
            seeds: seeds_summary,
            pooled: pool(&aggs),
        };
        let json_name = format!("{p}.summary.json");
        write_file(&dir.join(&json_name), &(serde_json::to_string_pretty(&summary)? + "\n"))?;
        files.push(csv_name);
        files.push(json_name);
        summaries.push(summary);
    }
    Ok((files, summaries))
}

/// `run`: one configuration, one or more policies, into `out`.
pub fn cmd_run(cfg: &SystemConfig, policies: &[PolicyKind], seeds: &[u64], out: &Path, timing: bool, jobs: usize) -> Result<RunManifest> {
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut manifest = RunManifest::new("run", cfg.clone(), seeds.to_vec(), policies.to_vec(), None, timing);
    manifest.write(out)?;
    let (files, _) = run_point(cfg, policies, seeds, out, &manifest.hash, None, timing, jobs)?;
    manifest.outputs = files;
    manifest.write(out)?;
    Ok(manifest)
}

/// `bench`: paired multi-policy sweep. Each sweep point goes to its own subdirectory.
pub fn cmd_bench(
    cfg: &SystemConfig,
    policies: &[PolicyKind],
    seeds: &[u64],
    sweep: Option<crate::manifest::Sweep>,
    out: &Path,
    timing: bool,
    jobs: usize,
) -> Result<RunManifest> {
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut manifest = RunManifest::new("bench", cfg.clone(), seeds.to_vec(), policies.to_vec(), sweep.clone(), timing);
    manifest.write(out)?;
    let points: Vec<(Option<String>, SystemConfig)> = match &sweep {
        None => vec![(None, cfg.clone())],
        Some(s) => s
            .values
            .iter()
            .map(|&v| Ok((Some(point_label(s.key, v)), apply_sweep(cfg, s.key, v)?)))
            .collect::<Result<Vec<_>>>()?,
    };
    let mut outputs = Vec::new();
    for (label, pcfg) in points {
        let dir: PathBuf = match &label {
            Some(l) => out.join(l),
            None => out.to_path_buf(),
        };
        let (files, _) = run_point(&pcfg, policies, seeds, &dir, &manifest.hash, label.clone(), timing, jobs)?;
        outputs.extend(files.into_iter().map(|f| match &label {
            Some(l) => format!("{l}/{f}"),
            None => f,
        }));
    }
    manifest.outputs = outputs;
    manifest.write(out)?;
    Ok(manifest)
}

/// Parses `1,2,5-8` into a seed list.
pub fn parse_seeds(s: &str) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b): (u64, u64) = (a.trim().parse()?, b.trim().parse()?);
                anyhow::ensure!(a <= b, "seed range {part} is empty");
                out.extend(a..=b);
            }
            None => out.push(part.parse().with_context(|| format!("seed '{part}' is not an integer"))?),
        }
    }
    anyhow::ensure!(!out.is_empty(), "no seeds given");
    Ok(out)
}

/// Parses a comma-separated policy list.
pub fn parse_policies(s: &str) -> Result<Vec<PolicyKind>> {
    let v = s
        .split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| p.parse::<PolicyKind>().map_err(|e| anyhow::anyhow!("{e}")))
        .collect::<Result<Vec<_>>>()?;
    anyhow::ensure!(!v.is_empty(), "no policies given");
    Ok(v)
}
