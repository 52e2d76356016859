//! Batch runs over `(delta, seed)` cells with CSV or ndjson output and a
//! per-delta summary.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::algorithms::{
    balanced_clustering_sized, gap_clustering_sized, global_grow, noisy_clustering_traced, AlgorithmConstants,
    Clustering,
};
use crate::error::{Error, Result};
use crate::eval::{find_gap_index, misclassification_error};
use crate::oracle::{all_vertices, read_instance, sample_instance, FaultyOracle, GroundTruth, InstanceSpec, SameClusterOracle};
use crate::par::{map_slice, Execution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Algo {
    /// Size-agnostic pipeline with index enumeration.
    #[default]
    Full,
    /// One balanced sub-clustering step followed by growth.
    Balanced,
    /// One gap sub-clustering step at the planted gap index, then growth.
    Gap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ConstantsProfile {
    Paper,
    #[default]
    Desk,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Ndjson,
}

/// Per-field replacements applied on top of the chosen profile.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantOverrides {
    pub c0: Option<f64>,
    pub balanced_sample_mult: Option<f64>,
    pub gap_sample_mult: Option<f64>,
    pub grow_size_mult: Option<f64>,
    pub subset_size_mult: Option<f64>,
    pub bias_trials_mult: Option<f64>,
    pub stop_size_mult: Option<f64>,
    pub admissibility_mult: Option<f64>,
}

impl ConstantOverrides {
    fn apply(&self, mut c: AlgorithmConstants) -> AlgorithmConstants {
        let pairs = [
            (self.c0, &mut c.c0),
            (self.balanced_sample_mult, &mut c.balanced_sample_mult),
            (self.gap_sample_mult, &mut c.gap_sample_mult),
            (self.grow_size_mult, &mut c.grow_size_mult),
            (self.subset_size_mult, &mut c.subset_size_mult),
            (self.bias_trials_mult, &mut c.bias_trials_mult),
            (self.stop_size_mult, &mut c.stop_size_mult),
            (self.admissibility_mult, &mut c.admissibility_mult),
        ];
        for (value, slot) in pairs {
            if let Some(v) = value {
                *slot = v;
            }
        }
        c
    }
}

/// One experiment: a fixed instance swept over deltas and seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Planted instance, generated once from `instance_seed`.
    #[serde(default)]
    pub instance: Option<InstanceSpec>,
    /// Alternative to `instance`: a JSON instance file.
    #[serde(default)]
    pub instance_file: Option<PathBuf>,
    #[serde(default)]
    pub instance_seed: u64,
    pub deltas: Vec<f64>,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub constants: ConstantsProfile,
    #[serde(default)]
    pub overrides: ConstantOverrides,
    #[serde(default = "one")]
    pub scale: f64,
    #[serde(default)]
    pub algo: Algo,
    /// Balance parameter for the `balanced` and `gap` selectors. Defaults to
    /// the planted balance for `balanced` and 1/2 for `gap`.
    #[serde(default)]
    pub balance: Option<f64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
    /// Fill the `wall_ms` column. Off by default so reruns are byte-identical.
    #[serde(default)]
    pub timing: bool,
    #[serde(skip)]
    pub execution: Execution,
}

fn one() -> f64 {
    1.0
}

impl ExperimentConfig {
    pub fn new(instance: InstanceSpec, deltas: Vec<f64>, seeds: Vec<u64>) -> Self {
        ExperimentConfig {
            instance: Some(instance),
            instance_file: None,
            instance_seed: 0,
            deltas,
            seeds,
            constants: ConstantsProfile::Desk,
            overrides: ConstantOverrides::default(),
            scale: 1.0,
            algo: Algo::Full,
            balance: None,
            out: None,
            format: OutputFormat::Csv,
            timing: false,
            execution: Execution::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let config: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::InvalidArgument(format!("config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidArgument(format!("config {}: {e}", path.display())))?;
        let mut config = Self::from_toml(&text)?;
        if let (Some(file), Some(dir)) = (&config.instance_file, path.parent()) {
            if file.is_relative() {
                config.instance_file = Some(dir.join(file));
            }
        }
        Ok(config)
    }

    /// Lists every offending field in one diagnostic.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        match (&self.instance, &self.instance_file) {
            (None, None) => problems.push("instance: give `instance` or `instance_file`".to_string()),
            (Some(_), Some(_)) => problems.push("instance: `instance` and `instance_file` are exclusive".to_string()),
            (Some(spec), None) => {
                if let Err(e) = spec.sizes() {
                    problems.push(format!("instance: {e}"));
                }
            }
            (None, Some(_)) => {}
        }
        if self.deltas.is_empty() {
            problems.push("deltas: must be nonempty".into());
        }
        for d in &self.deltas {
            if !(*d > 0.0 && *d <= 1.0) {
                problems.push(format!("deltas: {d} outside (0, 1]"));
            }
        }
        if self.seeds.is_empty() {
            problems.push("seeds: must be nonempty".into());
        }
        if let Some(b) = self.balance {
            if !(b > 0.0 && b <= 1.0) {
                problems.push(format!("balance: {b} outside (0, 1]"));
            }
        }
        if let Err(e) = self.algorithm_constants().validate() {
            problems.push(format!("constants: {e}"));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidArgument(problems.join("; ")))
        }
    }

    pub fn algorithm_constants(&self) -> AlgorithmConstants {
        let base = match self.constants {
            ConstantsProfile::Paper => AlgorithmConstants::paper_defaults(),
            ConstantsProfile::Desk => AlgorithmConstants::desk_defaults(),
        };
        self.overrides.apply(base).with_scale(self.scale).with_execution(self.execution)
    }

    pub fn ground_truth(&self) -> Result<GroundTruth> {
        match (&self.instance, &self.instance_file) {
            (Some(spec), _) => sample_instance(spec, self.instance_seed),
            (None, Some(path)) => read_instance(path),
            (None, None) => Err(Error::InvalidArgument("no instance configured".into())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Ok,
    /// The pipeline stopped early because no index was accepted.
    Partial,
    /// The selected algorithm returned an error; nothing was clustered.
    Error,
}

impl RunStatus {
    fn as_str(self) -> &'static str {
        match self {
            RunStatus::Ok => "ok",
            RunStatus::Partial => "partial",
            RunStatus::Error => "error",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub n: usize,
    pub k: usize,
    pub delta: f64,
    pub seed: u64,
    pub distinct_pairs: u64,
    pub total_calls: u64,
    pub misclassification: f64,
    pub exact: bool,
    pub unclustered_count: usize,
    pub wall_ms: u64,
    pub cluster_sizes: Vec<usize>,
    pub status: RunStatus,
}

pub const CSV_HEADER: [&str; 12] = [
    "n",
    "k",
    "delta",
    "seed",
    "distinct_pairs",
    "total_calls",
    "misclassification",
    "exact",
    "unclustered_count",
    "wall_ms",
    "cluster_sizes",
    "status",
];

/// Clustering produced by one cell, plus whether the algorithm errored.
pub struct CellOutcome {
    pub clustering: Clustering,
    pub status: RunStatus,
    pub error: Option<Error>,
}

/// Runs the selected algorithm once against `oracle`.
pub fn run_algorithm<O: SameClusterOracle + ?Sized>(
    oracle: &mut O,
    truth: &GroundTruth,
    algo: Algo,
    delta: f64,
    balance: Option<f64>,
    consts: &AlgorithmConstants,
) -> CellOutcome {
    let vertices = all_vertices(truth.n());
    let k = truth.k();
    let result = match algo {
        Algo::Full => noisy_clustering_traced(oracle, &vertices, k, delta, consts).map(|r| r.clustering),
        Algo::Balanced => {
            let b = balance.unwrap_or_else(|| planted_balance(truth));
            let t = consts.balanced_sample_size(truth.n(), k, b, delta);
            balanced_clustering_sized(oracle, &vertices, k, delta, b, t, consts)
                .and_then(|x| global_grow(oracle, &vertices, &x, delta, consts))
        }
        Algo::Gap => {
            let b = balance.unwrap_or(0.5);
            let mut sizes = truth.cluster_sizes();
            sizes.sort_unstable_by(|a, b| b.cmp(a));
            find_gap_index(&sizes, truth.n(), k, b).and_then(|h| {
                let h = h.ok_or_else(|| Error::InvalidInstance(format!("no size gap at b = {b}")))?;
                let t = consts.gap_sample_size(truth.n(), k, b, delta);
                let x = gap_clustering_sized(oracle, &vertices, h, k, delta, b, t, consts)?;
                global_grow(oracle, &vertices, &x, delta, consts)
            })
        }
    };
    match result {
        Ok(c) => {
            let status = if c.is_partial() { RunStatus::Partial } else { RunStatus::Ok };
            CellOutcome { clustering: c, status, error: None }
        }
        Err(e) => CellOutcome {
            clustering: Clustering::new(Vec::new(), vertices).expect("distinct vertices"),
            status: RunStatus::Error,
            error: Some(e),
        },
    }
}

/// Smallest cluster relative to `n / k`, capped at 1.
pub fn planted_balance(truth: &GroundTruth) -> f64 {
    let min = truth.cluster_sizes().into_iter().min().unwrap_or(0);
    (min as f64 * truth.k() as f64 / truth.n() as f64).min(1.0)
}

/// One row per `(delta, seed)`, sorted by delta then seed.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    config.validate()?;
    let truth = config.ground_truth()?;
    let consts = config.algorithm_constants();
    let mut cells: Vec<(f64, u64)> = config
        .deltas
        .iter()
        .flat_map(|&d| config.seeds.iter().map(move |&s| (d, s)))
        .collect();
    cells.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    cells.dedup();
    let rows = map_slice(config.execution, &cells, |&(delta, seed)| {
        run_cell(&truth, delta, seed, config, &consts)
    });
    rows.into_iter().collect()
}

fn run_cell(
    truth: &GroundTruth,
    delta: f64,
    seed: u64,
    config: &ExperimentConfig,
    consts: &AlgorithmConstants,
) -> Result<ResultRow> {
    let mut oracle = FaultyOracle::new(truth.clone(), delta, seed)?;
    let start = Instant::now();
    let outcome = run_algorithm(&mut oracle, truth, config.algo, delta, config.balance, consts);
    let wall_ms = if config.timing { start.elapsed().as_millis() as u64 } else { 0 };
    let report = misclassification_error(&outcome.clustering, truth)?;
    let stats = oracle.query_stats();
    Ok(ResultRow {
        n: truth.n(),
        k: truth.k(),
        delta,
        seed,
        distinct_pairs: stats.distinct_pairs,
        total_calls: stats.total_calls,
        misclassification: report.misclassification,
        exact: report.exact,
        unclustered_count: report.unclustered_count,
        wall_ms,
        cluster_sizes: outcome.clustering.cluster_sizes(),
        status: outcome.status,
    })
}

fn csv_record(row: &ResultRow) -> Vec<String> {
    let sizes: Vec<String> = row.cluster_sizes.iter().map(usize::to_string).collect();
    vec![
        row.n.to_string(),
        row.k.to_string(),
        row.delta.to_string(),
        row.seed.to_string(),
        row.distinct_pairs.to_string(),
        row.total_calls.to_string(),
        format!("{:.6}", row.misclassification),
        row.exact.to_string(),
        row.unclustered_count.to_string(),
        row.wall_ms.to_string(),
        sizes.join(";"),
        row.status.as_str().to_string(),
    ]
}

pub fn rows_to_string(rows: &[ResultRow], format: OutputFormat) -> String {
    match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(CSV_HEADER).expect("in-memory write");
            for row in rows {
                w.write_record(csv_record(row)).expect("in-memory write");
            }
            String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
        }
        OutputFormat::Ndjson => rows
            .iter()
            .map(|r| serde_json::to_string(r).expect("rows serialize") + "\n")
            .collect(),
    }
}

/// Mean and population standard deviation per delta.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub delta: f64,
    pub runs: usize,
    pub distinct_pairs_mean: f64,
    pub distinct_pairs_std: f64,
    pub total_calls_mean: f64,
    pub total_calls_std: f64,
    pub misclassification_mean: f64,
    pub misclassification_std: f64,
    pub exact_rate: f64,
}

pub fn summarize(rows: &[ResultRow]) -> Vec<SummaryRow> {
    let mut deltas: Vec<f64> = rows.iter().map(|r| r.delta).collect();
    deltas.sort_by(f64::total_cmp);
    deltas.dedup();
    deltas
        .into_iter()
        .map(|delta| {
            let group: Vec<&ResultRow> = rows.iter().filter(|r| r.delta == delta).collect();
            let (dp_m, dp_s) = mean_std(group.iter().map(|r| r.distinct_pairs as f64));
            let (tc_m, tc_s) = mean_std(group.iter().map(|r| r.total_calls as f64));
            let (mc_m, mc_s) = mean_std(group.iter().map(|r| r.misclassification));
            let exact = group.iter().filter(|r| r.exact).count() as f64 / group.len() as f64;
            SummaryRow {
                delta,
                runs: group.len(),
                distinct_pairs_mean: dp_m,
                distinct_pairs_std: dp_s,
                total_calls_mean: tc_m,
                total_calls_std: tc_s,
                misclassification_mean: mc_m,
                misclassification_std: mc_s,
                exact_rate: exact,
            }
        })
        .collect()
}

fn mean_std(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let v: Vec<f64> = values.collect();
    if v.is_empty() {
        return (0.0, 0.0);
    }
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / v.len() as f64;
    (mean, var.sqrt())
}

pub fn summary_to_string(summary: &[SummaryRow], format: OutputFormat) -> String {
    match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for row in summary {
                w.serialize(row).expect("in-memory write");
            }
            String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
        }
        OutputFormat::Ndjson => summary
            .iter()
            .map(|r| serde_json::to_string(r).expect("rows serialize") + "\n")
            .collect(),
    }
}

/// Path of the summary written next to `out`: `results.csv` gives
/// `results.summary.csv`.
pub fn summary_path(out: &Path, format: OutputFormat) -> PathBuf {
    let ext = match format {
        OutputFormat::Csv => "csv",
        OutputFormat::Ndjson => "ndjson",
    };
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "results".into());
    out.with_file_name(format!("{stem}.summary.{ext}"))
}

/// Rows violating `distinct_pairs <= n(n-1)/2`.
pub fn budget_violations(rows: &[ResultRow]) -> Vec<&ResultRow> {
    rows.iter()
        .filter(|r| r.distinct_pairs > (r.n as u64) * (r.n as u64).saturating_sub(1) / 2)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ExperimentConfig {
        ExperimentConfig::new(InstanceSpec::Balanced { n: 200, k: 2 }, vec![0.8, 1.0], vec![1, 2, 3])
    }

    #[test]
    fn cardinality_and_order() {
        let rows = run_experiment(&small()).unwrap();
        assert_eq!(rows.len(), 6);
        let keys: Vec<(f64, u64)> = rows.iter().map(|r| (r.delta, r.seed)).collect();
        assert_eq!(keys, vec![(0.8, 1), (0.8, 2), (0.8, 3), (1.0, 1), (1.0, 2), (1.0, 3)]);
        assert!(budget_violations(&rows).is_empty());
    }

    #[test]
    fn noiseless_rows_have_zero_error() {
        let rows = run_experiment(&small()).unwrap();
        for r in rows.iter().filter(|r| r.delta == 1.0) {
            assert_eq!(r.misclassification, 0.0);
            assert!(r.exact);
        }
    }

    #[test]
    fn csv_has_fixed_header_and_is_deterministic() {
        let a = rows_to_string(&run_experiment(&small()).unwrap(), OutputFormat::Csv);
        let b = rows_to_string(&run_experiment(&small()).unwrap(), OutputFormat::Csv);
        assert_eq!(a, b);
        assert_eq!(a.lines().next().unwrap(), CSV_HEADER.join(","));
        let nd = rows_to_string(&run_experiment(&small()).unwrap(), OutputFormat::Ndjson);
        assert_eq!(nd.lines().count(), 6);
    }

    #[test]
    fn config_diagnostics_name_fields() {
        let text = "deltas = [0.0, 1.5]\nseeds = []\n";
        let err = ExperimentConfig::from_toml(text).unwrap_err().to_string();
        assert!(err.contains("instance"));
        assert!(err.contains("deltas: 0"));
        assert!(err.contains("deltas: 1.5"));
        assert!(err.contains("seeds"));
    }

    #[test]
    fn toml_config_parses() {
        let text = r#"
deltas = [0.5]
seeds = [7]
algo = "balanced"
constants = "desk"
[instance]
kind = "exact_sizes"
sizes = [20, 30]
[overrides]
c0 = 8.0
"#;
        let c = ExperimentConfig::from_toml(text).unwrap();
        assert_eq!(c.algo, Algo::Balanced);
        assert_eq!(c.algorithm_constants().c0, 8.0);
        assert_eq!(c.ground_truth().unwrap().cluster_sizes(), vec![20, 30]);
    }

    #[test]
    fn summary_statistics() {
        let rows = run_experiment(&small()).unwrap();
        let s = summarize(&rows);
        assert_eq!(s.len(), 2);
        assert_eq!(s[1].exact_rate, 1.0);
        assert_eq!(s[0].runs, 3);
        assert_eq!(summary_path(Path::new("/x/out.csv"), OutputFormat::Csv), PathBuf::from("/x/out.summary.csv"));
    }
}
