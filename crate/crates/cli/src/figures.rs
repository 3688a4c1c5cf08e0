//! Tidy plot data (x, series, y, stderr) built from bench outputs.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use lab_core::orchestrator::{trailing_mean, Aggregates, PolicyKind};

use crate::experiment::PolicySummary;
use crate::manifest::{point_label, RunManifest, SweepKey, MANIFEST_FILE};

/// Window of the optimality-gap moving average (slots).
pub const GAP_WINDOW: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    Tradeoff,
    Optgap,
    Pathloss,
    Scale,
    Candidates,
}

impl Figure {
    pub const ALL: [Figure; 5] = [Figure::Tradeoff, Figure::Optgap, Figure::Pathloss, Figure::Scale, Figure::Candidates];

    pub fn name(self) -> &'static str {
        match self {
            Figure::Tradeoff => "tradeoff",
            Figure::Optgap => "optgap",
            Figure::Pathloss => "pathloss",
            Figure::Scale => "scale",
            Figure::Candidates => "candidates",
        }
    }

    /// Sweep the figure is built from, with the values it expects.
    fn requirement(self) -> Option<(SweepKey, Vec<f64>)> {
        match self {
            Figure::Tradeoff => Some((SweepKey::Weight, vec![0.0, 0.5, 1.0, 2.0, 3.0])),
            Figure::Pathloss => Some((SweepKey::Pathloss, vec![2.0, 2.2, 2.4, 2.6, 2.8, 3.0])),
            Figure::Scale | Figure::Candidates => Some((SweepKey::Devices, (1..=7).map(f64::from).collect())),
            Figure::Optgap => None,
        }
    }

    fn required_policies(self) -> &'static [PolicyKind] {
        match self {
            Figure::Tradeoff | Figure::Candidates => &[PolicyKind::Lab],
            Figure::Optgap => &[PolicyKind::Ideal],
            Figure::Pathloss | Figure::Scale => &[],
        }
    }
}

impl fmt::Display for Figure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Figure {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        Figure::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| anyhow!("unknown figure '{s}' (tradeoff, optgap, pathloss, scale, candidates)"))
    }
}

/// One tidy output row.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub x: f64,
    pub series: String,
    pub y: f64,
    pub stderr: f64,
}

fn discover(results: &Path) -> Result<Vec<(PathBuf, RunManifest)>> {
    if !results.is_dir() {
        bail!("results directory {} does not exist", results.display());
    }
    let mut dirs = vec![results.to_path_buf()];
    let mut entries: Vec<PathBuf> = std::fs::read_dir(results)
        .with_context(|| format!("listing {}", results.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    entries.sort();
    dirs.extend(entries);
    let mut out = Vec::new();
    for d in dirs {
        if d.join(MANIFEST_FILE).is_file() {
            out.push((d.clone(), RunManifest::read(&d)?));
        }
    }
    Ok(out)
}

fn describe(m: &RunManifest) -> String {
    let sweep = m.sweep.as_ref().map_or("no sweep".to_string(), |s| {
        format!("{}={}", s.key, s.values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(","))
    });
    let pol: Vec<&str> = m.policies.iter().map(|p| p.name()).collect();
    format!("{} [{}; policies {}]", m.short_hash(), sweep, pol.join(","))
}

fn needed(fig: Figure) -> String {
    let pol: Vec<&str> = fig.required_policies().iter().map(|p| p.name()).collect();
    let pol = if pol.is_empty() { String::new() } else { format!(" including polic{} {}", if pol.len() == 1 { "y" } else { "ies" }, pol.join(",")) };
    match fig.requirement() {
        Some((key, values)) => {
            let vals: Vec<String> = values.iter().map(|v| point_label(key, *v)).collect();
            format!("a bench sweep over {key} with points {}{pol}", vals.join(", "))
        }
        None => format!("a bench without a sweep{pol}"),
    }
}

fn select(fig: Figure, found: &[(PathBuf, RunManifest)]) -> Result<(PathBuf, RunManifest)> {
    let req = fig.requirement();
    let matching: Vec<&(PathBuf, RunManifest)> = found
        .iter()
        .filter(|(_, m)| match (&req, &m.sweep) {
            (Some((k, _)), Some(s)) => s.key == *k,
            (None, None) => true,
            _ => false,
        })
        .filter(|(_, m)| fig.required_policies().iter().all(|p| m.policies.contains(p)))
        .collect();
    let listing = if found.is_empty() {
        "no manifests found".to_string()
    } else {
        found.iter().map(|(d, m)| format!("  {}: {}", d.display(), describe(m))).collect::<Vec<_>>().join("\n")
    };
    match matching.as_slice() {
        [] => bail!("figure {fig} needs {}; absent. Available runs:\n{listing}", needed(fig)),
        [one] => {
            if let (Some((key, values)), Some(s)) = (&req, &one.1.sweep) {
                let missing: Vec<String> = values
                    .iter()
                    .filter(|v| !s.values.iter().any(|x| (x - *v).abs() < 1e-12))
                    .map(|v| point_label(*key, *v))
                    .collect();
                if !missing.is_empty() {
                    bail!("figure {fig}: sweep {} lacks points {}", one.0.display(), missing.join(", "));
                }
            }
            Ok((*one).clone())
        }
        many => {
            let hashes: std::collections::BTreeSet<&str> = many.iter().map(|(_, m)| m.hash.as_str()).collect();
            if hashes.len() > 1 {
                let l: Vec<String> = many.iter().map(|(d, m)| format!("  {}: {}", d.display(), describe(m))).collect();
                bail!("figure {fig}: refusing to mix results from different configurations:\n{}", l.join("\n"));
            }
            Ok(many[0].clone())
        }
    }
}

fn read_summary(dir: &Path, policy: PolicyKind, hash: &str) -> Result<PolicySummary> {
    let path = dir.join(format!("{policy}.summary.json"));
    let text = std::fs::read_to_string(&path).with_context(|| format!("missing run output {}", path.display()))?;
    let s: PolicySummary = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    if s.manifest_hash != hash {
        bail!("{} belongs to manifest {}, expected {hash}", path.display(), s.manifest_hash);
    }
    Ok(s)
}

fn metric(a: &Aggregates, name: &str) -> f64 {
    match name {
        "utility" => a.utility,
        "latency" => a.latency,
        "confidence" => a.confidence,
        "accuracy" => a.accuracy,
        "candidates" => a.candidates,
        "decision_ms" => a.decision_ms,
        "evaluations" => a.evaluations,
        _ => unreachable!("unknown metric {name}"),
    }
}

fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0);
    (mean, (var / m).sqrt())
}

fn summary_rows(s: &PolicySummary, x: f64, series: &str, metric_name: &str) -> Row {
    let vals: Vec<f64> = s.seeds.iter().map(|r| metric(&r.aggregates, metric_name)).collect();
    let (y, stderr) = mean_stderr(&vals);
    Row { x, series: series.to_string(), y, stderr }
}

fn sweep_rows(dir: &Path, m: &RunManifest, policies: &[PolicyKind], metrics: &[&str], prefix: bool) -> Result<Vec<Row>> {
    let sweep = m.sweep.as_ref().expect("sweep figures select swept manifests");
    let mut rows = Vec::new();
    for &v in &sweep.values {
        let pdir = dir.join(point_label(sweep.key, v));
        for &p in policies {
            let s = read_summary(&pdir, p, &m.hash)?;
            for &name in metrics {
                let series = if prefix { format!("{p}:{name}") } else { name.to_string() };
                rows.push(summary_rows(&s, v, &series, name));
            }
        }
    }
    Ok(rows)
}

/// Per-slot U of every seed from a per-slot CSV, keyed by seed.
fn read_utilities(path: &Path, hash: &str) -> Result<BTreeMap<u64, Vec<f64>>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("missing run output {}", path.display()))?;
    let first = text.lines().next().unwrap_or_default();
    if first != format!("# manifest {hash}") {
        bail!("{} does not belong to manifest {hash}", path.display());
    }
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let headers = rdr.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name).ok_or_else(|| anyhow!("{}: no column {name}", path.display()));
    let (cs, cu) = (col("seed")?, col("U")?);
    let mut out: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let seed: u64 = rec[cs].parse().with_context(|| format!("{} row {}", path.display(), i + 2))?;
        let u: f64 = rec[cu].parse().with_context(|| format!("{} row {}", path.display(), i + 2))?;
        out.entry(seed).or_default().push(u);
    }
    Ok(out)
}

fn optgap_rows(dir: &Path, m: &RunManifest) -> Result<Vec<Row>> {
    let ideal = read_utilities(&dir.join("ideal.csv"), &m.hash)?;
    let mut rows = Vec::new();
    for &p in m.policies.iter().filter(|p| **p != PolicyKind::Ideal) {
        let other = read_utilities(&dir.join(format!("{p}.csv")), &m.hash)?;
        let mut per_seed: Vec<Vec<f64>> = Vec::new();
        for (seed, u_ideal) in &ideal {
            let u = other.get(seed).ok_or_else(|| anyhow!("{p}: seed {seed} missing"))?;
            let gap: Vec<f64> = u_ideal.iter().zip(u).map(|(a, b)| a - b).collect();
            per_seed.push(trailing_mean(&gap, GAP_WINDOW));
        }
        let len = per_seed.iter().map(Vec::len).min().unwrap_or(0);
        for t in 0..len {
            let vals: Vec<f64> = per_seed.iter().map(|s| s[t]).collect();
            let (y, stderr) = mean_stderr(&vals);
            rows.push(Row { x: (t + 1) as f64, series: p.to_string(), y, stderr });
        }
    }
    Ok(rows)
}

/// Builds the rows of `fig` from the runs under `results`.
pub fn figure_rows(results: &Path, fig: Figure) -> Result<(RunManifest, Vec<Row>)> {
    let found = discover(results)?;
    let (dir, m) = select(fig, &found)?;
    let rows = match fig {
        Figure::Tradeoff => sweep_rows(&dir, &m, &[PolicyKind::Lab], &["utility", "latency", "confidence", "accuracy"], false)?,
        Figure::Pathloss => sweep_rows(&dir, &m, &m.policies, &["utility", "latency", "confidence", "accuracy"], true)?,
        Figure::Scale => sweep_rows(&dir, &m, &m.policies, &["utility", "decision_ms", "evaluations"], true)?,
        Figure::Candidates => {
            let mut rows = sweep_rows(&dir, &m, &[PolicyKind::Lab], &["candidates"], true)?;
            if m.policies.contains(&PolicyKind::FullBo) {
                rows.extend(sweep_rows(&dir, &m, &[PolicyKind::FullBo], &["evaluations"], true)?);
            }
            rows
        }
        Figure::Optgap => optgap_rows(&dir, &m)?,
    };
    Ok((m, rows))
}

pub fn render_rows(rows: &[Row], hash: &str) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["x", "series", "y", "stderr"])?;
    for r in rows {
        w.write_record([format!("{}", r.x), r.series.clone(), format!("{}", r.y), format!("{}", r.stderr)])?;
    }
    let body = String::from_utf8(w.into_inner().map_err(|e| anyhow!("{e}"))?)?;
    Ok(format!("# manifest {hash}\n{body}"))
}

/// `figures`: writes `<out>/<figure>.csv`. Nothing is written unless every
/// requested figure can be built.
pub fn cmd_figures(results: &Path, figures: &[Figure], out: &Path) -> Result<Vec<PathBuf>> {
    let mut rendered = Vec::new();
    for &f in figures {
        let (m, rows) = figure_rows(results, f)?;
        rendered.push((out.join(format!("{f}.csv")), render_rows(&rows, &m.hash)?));
    }
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut written = Vec::new();
    for (path, text) in rendered {
        let tmp = path.with_extension("csv.tmp");
        std::fs::write(&tmp, text).with_context(|| format!("writing {}", tmp.display()))?;
        std::fs::rename(&tmp, &path).with_context(|| format!("renaming to {}", path.display()))?;
        written.push(path);
    }
    Ok(written)
}
