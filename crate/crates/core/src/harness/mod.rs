//! Experiment orchestration: configs, replica fan-out, CSV/JSON reports and
//! the concentration probe.

pub mod cli;

use crate::analytics::regime::d_of_eta;
use crate::count::{count_proper, exact_first_moment};
use crate::error::{Error, Result};
use crate::group::{check_sofic, enumerate_uniform_homs, unrank_cycle_product, ModelParams, ReducedWord, UniformHom};
use crate::hypergraph::{build_hypergraph, Coloring};
use crate::numeric::Fraction;
use crate::rng::RngState;
use crate::samplers::{sample_planted_hom, sample_uniform_hom};
use crate::structure::core_decomposition;
use crate::tree::{local_convergence_stat, tree_rigid_density, Pattern, TreeDomain};
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    /// Sampled proper-coloring counts against the exact first moment.
    FirstMoment,
    /// Planted rigid-set density against the tree estimate.
    Density,
    /// Single-edge cylinder frequencies against `1/Q`.
    LocalConvergence,
    /// `(D, δ)`-soficity of uniform samples.
    Sofic,
    /// Deviation of a 1-Lipschitz statistic in the planted model.
    Concentration,
}

fn default_replicas() -> usize {
    1
}

fn default_level() -> usize {
    4
}

fn default_tree_samples() -> usize {
    100_000
}

fn default_tolerance() -> f64 {
    0.03
}

fn default_delta() -> String {
    "1/10".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub k: usize,
    /// Either `d` or `eta` must be given.
    #[serde(default)]
    pub d: Option<usize>,
    #[serde(default)]
    pub eta: Option<f64>,
    pub n: Vec<usize>,
    pub seed: u64,
    #[serde(default)]
    pub stream: u64,
    #[serde(default = "default_replicas")]
    pub replicas: usize,
    /// Core level for `density`.
    #[serde(default = "default_level")]
    pub level: usize,
    #[serde(default = "default_tree_samples")]
    pub tree_samples: usize,
    /// Absolute tolerance for `local-convergence`, failure fraction for
    /// `sofic`, and tail probability for `concentration`.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    /// Distance parameter for `sofic`, as a fraction.
    #[serde(default = "default_delta")]
    pub delta: String,
    /// Output stem: writes `<output>.csv` and `<output>.json`.
    pub output: PathBuf,
}

impl ExperimentConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicas == 0 {
            return Err(Error::invalid("replicas must be at least 1"));
        }
        if self.n.is_empty() {
            return Err(Error::invalid("the n list is empty"));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::invalid("tolerance must be positive"));
        }
        if self.d.is_some() == self.eta.is_some() {
            return Err(Error::invalid("give exactly one of d and eta"));
        }
        let delta = crate::numeric::parse_fraction(&self.delta)?;
        if delta <= Fraction::from_integer(0) {
            return Err(Error::invalid("delta must be positive"));
        }
        Ok(())
    }

    pub fn degree(&self) -> Result<usize> {
        match (self.d, self.eta) {
            (Some(d), _) => Ok(d),
            (None, Some(eta)) => Ok(d_of_eta(self.k, eta)?.d as usize),
            _ => Err(Error::invalid("give exactly one of d and eta")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentSummary {
    pub kind: ExperimentKind,
    pub seed: u64,
    pub stream: u64,
    pub groups: Vec<Value>,
    pub failed_rows: usize,
    pub pass: bool,
}

/// One replica's result: named values, or the error that stopped it.
type Row = std::result::Result<Vec<(String, String)>, String>;

fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let m = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (m, 0.0);
    }
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

fn replicas<F>(cfg: &ExperimentConfig, n: usize, f: F) -> Vec<Row>
where
    F: Fn(RngState) -> Result<Vec<(String, String)>> + Sync,
{
    let base = RngState::new(cfg.seed, cfg.stream);
    (0..cfg.replicas)
        .into_par_iter()
        .map(|i| {
            // distinct stream block per n so groups do not share draws
            let state = base.replica((n as u64) << 32 | i as u64);
            f(state).map_err(|e| e.to_string())
        })
        .collect()
}

fn field(rows: &[Row], name: &str) -> Vec<f64> {
    rows.iter()
        .filter_map(|r| r.as_ref().ok())
        .filter_map(|r| r.iter().find(|(k, _)| k == name))
        .filter_map(|(_, v)| v.parse().ok())
        .collect()
}

fn planted_instance(d: usize, k: usize, n: usize, state: &RngState) -> Result<(UniformHom, Coloring)> {
    let p = ModelParams::planted(d, k, n)?;
    let chi = Coloring::canonical_equitable(n)?;
    let hom = sample_planted_hom(&p, &chi, &mut state.rng())?;
    Ok((hom, chi))
}

/// Words `s_i` and `s_i s_j` for `i ≠ j`.
pub fn default_sofic_words(d: usize, k: usize) -> Vec<ReducedWord> {
    let group = crate::group::CyclicFreeProduct { d, k };
    let mut out: Vec<ReducedWord> = (0..d).map(|i| group.generator(i)).collect();
    for i in 0..d {
        for j in (0..d).filter(|&j| j != i) {
            out.push(group.mul(&group.generator(i), &group.generator(j)));
        }
    }
    out
}

/// Largest `|Hom|` the first-moment experiment enumerates exactly.
pub const EXPERIMENT_ENUMERATION_LIMIT: u64 = 200_000;

fn run_group(cfg: &ExperimentConfig, d: usize, n: usize) -> Result<(Vec<Row>, Value, bool)> {
    let k = cfg.k;
    match cfg.kind {
        ExperimentKind::FirstMoment => {
            let p = ModelParams::uniform(d, k, n)?;
            let rows = replicas(cfg, n, |s| {
                let hom = sample_uniform_hom(&p, &mut s.rng())?;
                let z = count_proper(&build_hypergraph(&hom), &Fraction::from_integer(0))?.value;
                Ok(vec![("z".into(), z.to_string())])
            });
            let (mean, stderr) = mean_stderr(&field(&rows, "z"));
            let exact = exact_first_moment(&p)?;
            let enumerated = match enumerate_uniform_homs(&p, EXPERIMENT_ENUMERATION_LIMIT) {
                Ok(all) => {
                    let total = all.total();
                    let mut sum = num_bigint::BigUint::from(0u32);
                    for hom in all {
                        sum += count_proper(&build_hypergraph(&hom), &Fraction::from_integer(0))?.value;
                    }
                    Some(BigRational::new(sum.into(), num_bigint::BigInt::from(total)))
                }
                Err(Error::Scale { .. }) => None,
                Err(e) => return Err(e),
            };
            let exact_equal = enumerated.as_ref().map(|e| *e == exact);
            let summary = json!({
                "n": n, "d": d, "k": k,
                "sample_mean": mean, "stderr": stderr,
                "exact": exact.to_string(),
                "exact_f64": exact.to_f64(),
                "enumeration_average": enumerated.as_ref().map(|e| e.to_string()),
                "exact_equal": exact_equal,
            });
            Ok((rows, summary, exact_equal.unwrap_or(true)))
        }
        ExperimentKind::Density => {
            let l = cfg.level;
            let rows = replicas(cfg, n, |s| {
                let (hom, chi) = planted_instance(d, k, n, &s)?;
                let dec = core_decomposition(&build_hypergraph(&hom), &chi, l)?;
                let lvl = dec.level(l)?;
                Ok(vec![
                    ("density".into(), (lvl.rigid_len() as f64 / n as f64).to_string()),
                    ("core".into(), lvl.core.len().to_string()),
                    ("attached".into(), lvl.attached.len().to_string()),
                    ("attached_prime".into(), lvl.attached_prime.len().to_string()),
                    ("stabilized_at".into(), dec.stabilized_at.map_or("none".into(), |x| x.to_string())),
                ])
            });
            let (mean, stderr) = mean_stderr(&field(&rows, "density"));
            let tree_state = RngState::new(cfg.seed, cfg.stream).replica(u64::MAX >> 1);
            let tree = tree_rigid_density(d, k, l, cfg.tree_samples, &tree_state)?;
            let se = (stderr * stderr + tree.stderr * tree.stderr).sqrt();
            let diff = (mean - tree.mean).abs();
            let pass = diff <= 3.0 * se;
            let summary = json!({
                "n": n, "d": d, "k": k, "level": l,
                "mean": mean, "stderr": stderr,
                "ci95": [mean - 1.96 * stderr, mean + 1.96 * stderr],
                "tree_mean": tree.mean, "tree_stderr": tree.stderr, "tree_samples": tree.samples,
                "combined_stderr": se, "abs_diff": diff, "pass": pass,
            });
            Ok((rows, summary, pass))
        }
        ExperimentKind::LocalConvergence => {
            let dom = TreeDomain::single_edge(d, k, 0)?;
            // identity colored 0, the rest 1
            let mut bits = vec![1u8; k];
            bits[0] = 0;
            let xi = Pattern { bits };
            let rows = replicas(cfg, n, |s| {
                let (hom, chi) = planted_instance(d, k, n, &s)?;
                let st = local_convergence_stat(&hom, &chi, &dom, &xi)?;
                Ok(vec![
                    ("frequency".into(), st.frequency.to_string()),
                    ("improper".into(), st.improper.to_string()),
                    ("non_injective".into(), st.non_injective.to_string()),
                ])
            });
            let (mean, stderr) = mean_stderr(&field(&rows, "frequency"));
            let reference = 1.0 / ((1u64 << k) - 2) as f64;
            let pass = (mean - reference).abs() <= cfg.tolerance;
            let summary = json!({
                "n": n, "d": d, "k": k, "mean": mean, "stderr": stderr,
                "reference": reference, "tolerance": cfg.tolerance, "pass": pass,
            });
            Ok((rows, summary, pass))
        }
        ExperimentKind::Sofic => {
            let p = ModelParams::uniform(d, k, n)?;
            let delta = crate::numeric::parse_fraction(&cfg.delta)?;
            let words = default_sofic_words(d, k);
            let rows = replicas(cfg, n, |s| {
                let hom = sample_uniform_hom(&p, &mut s.rng())?;
                let rep = check_sofic(&hom, &words, delta)?;
                Ok(vec![
                    ("sofic".into(), u8::from(rep.sofic).to_string()),
                    ("mult_fraction".into(), rep.mult_fraction.to_string()),
                    ("trace_fraction".into(), rep.trace_fraction.to_string()),
                ])
            });
            let flags = field(&rows, "sofic");
            let (frac, stderr) = mean_stderr(&flags);
            let pass = 1.0 - frac <= cfg.tolerance;
            let summary = json!({
                "n": n, "d": d, "k": k, "delta": cfg.delta,
                "sofic_fraction": frac, "stderr": stderr, "pass": pass,
            });
            Ok((rows, summary, pass))
        }
        ExperimentKind::Concentration => {
            let p = ModelParams::planted(d, k, n)?;
            let reference = reference_hom(&p)?;
            let chi = Coloring::canonical_equitable(n)?;
            let rows = replicas(cfg, n, |s| {
                let hom = sample_planted_hom(&p, &chi, &mut s.rng())?;
                Ok(vec![("f".into(), lipschitz_statistic(&hom, &reference).to_string())])
            });
            let values = field(&rows, "f");
            let probe = summarize_deviations(&values);
            let pass = probe.tails.iter().find(|t| t.0 == 0.2).is_some_and(|t| t.1 < cfg.tolerance);
            let summary = json!({"n": n, "d": d, "k": k, "probe": probe, "pass": pass});
            Ok((rows, summary, pass))
        }
    }
}

/// Runs every group of `cfg`, writes `<output>.csv` and `<output>.json`,
/// and returns the summary. Failed replicas are recorded, not fatal.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentSummary> {
    cfg.validate()?;
    let d = cfg.degree()?;
    let mut groups = Vec::new();
    let mut all_rows: Vec<(usize, usize, Row)> = Vec::new();
    let mut pass = true;
    for &n in &cfg.n {
        let (rows, summary, ok) = run_group(cfg, d, n)?;
        pass &= ok;
        groups.push(summary);
        all_rows.extend(rows.into_iter().enumerate().map(|(i, r)| (n, i, r)));
    }
    let failed_rows = all_rows.iter().filter(|r| r.2.is_err()).count();
    let summary = ExperimentSummary { kind: cfg.kind, seed: cfg.seed, stream: cfg.stream, groups, failed_rows, pass };
    write_csv(&cfg.output.with_extension("csv"), cfg, d, &all_rows)?;
    std::fs::write(cfg.output.with_extension("json"), serde_json::to_string_pretty(&summary)? + "\n")?;
    Ok(summary)
}

/// `# params: ...` footer line.
pub fn params_record(cfg: &ExperimentConfig, d: usize) -> String {
    let mut v = serde_json::to_value(cfg).expect("config serializes");
    v["resolved_d"] = json!(d);
    format!("# params: {v}")
}

fn write_csv(path: &Path, cfg: &ExperimentConfig, d: usize, rows: &[(usize, usize, Row)]) -> Result<()> {
    let columns: Vec<String> = rows
        .iter()
        .find_map(|r| r.2.as_ref().ok())
        .map(|r| r.iter().map(|(k, _)| k.clone()).collect())
        .unwrap_or_default();
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["n".to_string(), "replica".into(), "seed".into(), "stream".into()];
    header.extend(columns.iter().cloned());
    header.push("error".into());
    w.write_record(&header)?;
    let base = RngState::new(cfg.seed, cfg.stream);
    for (n, i, row) in rows {
        let stream = base.replica((*n as u64) << 32 | *i as u64).stream;
        let mut rec = vec![n.to_string(), i.to_string(), cfg.seed.to_string(), stream.to_string()];
        match row {
            Ok(vals) => {
                rec.extend(vals.iter().map(|(_, v)| v.clone()));
                rec.push(String::new());
            }
            Err(e) => {
                rec.extend(columns.iter().map(|_| String::new()));
                rec.push(e.clone());
            }
        }
        w.write_record(&rec)?;
    }
    let mut bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    bytes.extend_from_slice(params_record(cfg, d).as_bytes());
    bytes.push(b'\n');
    std::fs::write(path, bytes)?;
    Ok(())
}

/// The homomorphism whose generators all act as `(0 1 .. k-1)(k .. 2k-1)...`.
pub fn reference_hom(params: &ModelParams) -> Result<UniformHom> {
    let img = unrank_cycle_product(params.n, params.k, 0);
    UniformHom::new(*params, vec![img; params.d])
}

/// `d^{-1} Σ_i n^{-1} |{v : σ(s_i)v ≠ ρ(s_i)v}|`, 1-Lipschitz for the
/// normalized Hamming metric on homomorphisms.
pub fn lipschitz_statistic(hom: &UniformHom, reference: &UniformHom) -> f64 {
    let n = hom.n() as f64;
    let d = hom.images().len() as f64;
    hom.images()
        .iter()
        .zip(reference.images())
        .map(|(a, b)| a.iter().zip(b).filter(|(x, y)| x != y).count() as f64 / n)
        .sum::<f64>()
        / d
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcentrationReport {
    pub replicas: usize,
    pub mean: f64,
    /// `(lower edge, count)` over bins of width 0.01 on `[-0.25, 0.25)`,
    /// with the outer bins absorbing the tails.
    pub histogram: Vec<(f64, usize)>,
    /// `(δ, P(|f - mean| > δ))`.
    pub tails: Vec<(f64, f64)>,
}

pub const TAIL_DELTAS: [f64; 3] = [0.05, 0.1, 0.2];

fn summarize_deviations(values: &[f64]) -> ConcentrationReport {
    let mean = values.iter().sum::<f64>() / values.len().max(1) as f64;
    const BINS: usize = 50;
    let mut hist: Vec<(f64, usize)> = (0..BINS).map(|b| (-0.25 + 0.01 * b as f64, 0)).collect();
    for &v in values {
        let b = ((v - mean + 0.25) / 0.01).floor().clamp(0.0, (BINS - 1) as f64) as usize;
        hist[b].1 += 1;
    }
    let tails = TAIL_DELTAS
        .iter()
        .map(|&t| (t, values.iter().filter(|&&v| (v - mean).abs() > t).count() as f64 / values.len().max(1) as f64))
        .collect();
    ConcentrationReport { replicas: values.len(), mean, histogram: hist, tails }
}

/// Samples `replicas` planted homomorphisms and reports how far
/// [`lipschitz_statistic`] strays from its mean.
pub fn concentration_probe(d: usize, k: usize, n: usize, replicas: usize, rng: &RngState) -> Result<ConcentrationReport> {
    if replicas == 0 {
        return Err(Error::invalid("replicas must be at least 1"));
    }
    let p = ModelParams::planted(d, k, n)?;
    let reference = reference_hom(&p)?;
    let chi = Coloring::canonical_equitable(n)?;
    let values: Vec<f64> = (0..replicas)
        .into_par_iter()
        .map(|i| {
            let hom = sample_planted_hom(&p, &chi, &mut rng.replica(i as u64).rng())?;
            Ok(lipschitz_statistic(&hom, &reference))
        })
        .collect::<Result<_>>()?;
    Ok(summarize_deviations(&values))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_probe_has_no_spread() {
        let r = concentration_probe(3, 2, 2, 50, &RngState::new(1, 0)).unwrap();
        assert!(r.tails.iter().all(|t| t.1 == 0.0));
        assert_eq!(r.histogram.iter().map(|h| h.1).sum::<usize>(), 50);
    }

    #[test]
    fn config_validation() {
        let base = r#"{"kind":"sofic","k":3,"d":2,"n":[30],"seed":1,"output":"x"}"#;
        assert!(ExperimentConfig::from_json(base).is_ok());
        assert!(ExperimentConfig::from_json(&base.replace("[30]", "[]")).is_err());
        assert!(ExperimentConfig::from_json(&base.replace("\"seed\"", "\"replicas\":0,\"seed\"")).is_err());
        assert!(ExperimentConfig::from_json(&base.replace("\"d\":2", "\"eta\":0.1,\"d\":2")).is_err());
    }

    #[test]
    fn sofic_words() {
        assert_eq!(default_sofic_words(2, 3).len(), 4);
        assert_eq!(default_sofic_words(3, 3).len(), 9);
    }
}
