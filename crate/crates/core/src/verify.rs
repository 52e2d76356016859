//! Self-checks: the acceptance properties of every module at a quick or full
//! scale, plus negative controls.

use std::collections::{HashMap, HashSet};
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algorithms::{
    belong_to_cluster, noisy_clustering_traced, test_bias, AlgorithmConstants, Clustering, RoundOutcome, NOISY_ETA,
};
use crate::error::Result;
use crate::eval::{
    biased_toward, brute_force_ml_clustering, chernoff_failure_bound, find_gap_index, gap_threshold,
    misclassification_error,
};
use crate::experiment::{rows_to_string, run_algorithm, run_experiment, Algo, ExperimentConfig, OutputFormat};
use crate::oracle::{
    all_vertices, pair_key, sample_instance, FaultyOracle, GroundTruth, InstanceSpec, QueryStats, SameClusterOracle,
    Sign, Vertex,
};
use crate::par::{map_indexed, Execution};
use crate::signed_graph::build_query_graph;
use crate::spectral::{bal_partition, recovery_condition};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Level {
    /// Reduced trial counts; finishes in well under a minute.
    #[default]
    Quick,
    /// Acceptance-scale trial counts.
    Full,
}

impl Level {
    fn pick(self, quick: usize, full: usize) -> usize {
        match self {
            Level::Quick => quick,
            Level::Full => full,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl CheckResult {
    pub fn line(&self) -> String {
        format!(
            "{} {} ({:.2}s): {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.elapsed.as_secs_f64(),
            self.detail
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn render(&self) -> String {
        let mut out: String = self.checks.iter().map(|c| c.line() + "\n").collect();
        let failed = self.checks.iter().filter(|c| !c.passed).count();
        out.push_str(&format!("{} checks, {} failed\n", self.checks.len(), failed));
        out
    }
}

fn timed(name: &'static str, body: impl FnOnce() -> Result<(bool, String)>) -> CheckResult {
    let start = Instant::now();
    let (passed, detail) = match body() {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    CheckResult { name, passed, detail, elapsed: start.elapsed() }
}

fn needed(fraction: f64, trials: usize) -> usize {
    (fraction * trials as f64 - 1e-9).ceil() as usize
}

/// Every check at the given level, in order.
pub fn verify(level: Level) -> VerifyReport {
    let mut checks = acceptance_suite(level);
    checks.push(tampered_oracle_is_caught());
    checks.push(graph_invariants(level));
    VerifyReport { checks }
}

pub fn acceptance_suite(level: Level) -> Vec<CheckResult> {
    vec![
        persistence_and_symmetry(level),
        noise_calibration(level),
        noiseless_exactness(level),
        spectral_recovery(level),
        balanced_pipeline(level),
        unbalanced_pipeline(level),
        size_gap_property(level),
        biased_growth(level),
        bias_test_discrimination(level),
        query_monotonicity(level),
        brute_force_concordance(level),
    ]
}

/// Probes random pairs twice in each orientation and counts answers that
/// change or disagree across orientations.
pub fn persistence_probe<O: SameClusterOracle + ?Sized>(
    oracle: &mut O,
    probes: usize,
    seed: u64,
) -> Result<(usize, usize)> {
    let n = oracle.n() as u32;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut first: HashMap<u64, Sign> = HashMap::new();
    let (mut changes, mut asymmetries) = (0, 0);
    for _ in 0..probes {
        let u = Vertex(rng.random_range(1..=n));
        let mut v = Vertex(rng.random_range(1..n));
        if v >= u {
            v = Vertex(v.0 + 1);
        }
        let a = oracle.query(u, v)?;
        let b = oracle.query(v, u)?;
        if a != b {
            asymmetries += 1;
        }
        let prev = *first.entry(pair_key(u, v)).or_insert(a);
        if prev != a {
            changes += 1;
        }
    }
    Ok((changes, asymmetries))
}

pub fn persistence_and_symmetry(level: Level) -> CheckResult {
    timed("persistence and symmetry", || {
        let seeds = level.pick(3, 10) as u64;
        let probes = level.pick(30_000, 100_000);
        let truth = sample_instance(&InstanceSpec::Balanced { n: 400, k: 4 }, 1)?;
        let start = Instant::now();
        let (mut changes, mut asym) = (0, 0);
        for seed in 0..seeds {
            let mut o = FaultyOracle::new(truth.clone(), 0.3, seed)?;
            let (c, a) = persistence_probe(&mut o, probes, seed ^ 0xabc)?;
            changes += c;
            asym += a;
        }
        let secs = start.elapsed().as_secs_f64();
        Ok((
            changes == 0 && asym == 0 && secs < 5.0,
            format!("{seeds} seeds x {probes} probes: {changes} changes, {asym} asymmetries, {secs:.2}s"),
        ))
    })
}

/// Distinct random pairs `(u, v)` with `same(u, v)` matching `want_same`.
fn random_pairs(truth: &GroundTruth, count: usize, want_same: bool, rng: &mut ChaCha8Rng) -> Vec<(Vertex, Vertex)> {
    let n = truth.n() as u32;
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let u = Vertex(rng.random_range(1..=n));
        let v = Vertex(rng.random_range(1..=n));
        if u == v || (truth.tau(u, v).expect("valid pair") == Sign::Plus) != want_same {
            continue;
        }
        if seen.insert(pair_key(u, v)) {
            out.push((u, v));
        }
    }
    out
}

pub fn noise_calibration(level: Level) -> CheckResult {
    timed("noise calibration", || {
        let pairs = level.pick(10_000, 10_000);
        let truth = sample_instance(&InstanceSpec::Balanced { n: 2000, k: 2 }, 2)?;
        let mut ok = true;
        let mut detail = Vec::new();
        for (i, delta) in [0.2, 0.5, 0.8].into_iter().enumerate() {
            let mut rng = ChaCha8Rng::seed_from_u64(100 + i as u64);
            let mut o = FaultyOracle::new(truth.clone(), delta, 7 + i as u64)?;
            for (same, p) in [(true, 0.5 + delta / 2.0), (false, 0.5 - delta / 2.0)] {
                let set = random_pairs(&truth, pairs, same, &mut rng);
                let mut plus = 0usize;
                for (u, v) in set {
                    plus += usize::from(o.query(u, v)?.is_plus());
                }
                let rate = plus as f64 / pairs as f64;
                let sd = (p * (1.0 - p) / pairs as f64).sqrt();
                let z = (rate - p) / sd;
                ok &= z.abs() <= 4.0;
                detail.push(format!("d={delta} {}: {rate:.4} vs {p:.2} (z={z:+.2})", if same { "same" } else { "cross" }));
            }
        }
        Ok((ok, detail.join(", ")))
    })
}

fn exactness_instance(i: usize) -> InstanceSpec {
    if i.is_multiple_of(2) {
        InstanceSpec::Balanced { n: 200 + (i * 37) % 301, k: 2 + (i / 2) % 3 }
    } else {
        let k = 2 + (i / 2) % 2;
        InstanceSpec::GapInstance { n: 430 + (i * 13) % 71, k, h: 1 + (i / 4) % (k - 1), b: 0.5 }
    }
}

pub fn noiseless_exactness(level: Level) -> CheckResult {
    timed("noiseless exactness", || {
        let trials = level.pick(10, 50);
        let start = Instant::now();
        let consts = AlgorithmConstants::desk_defaults();
        let results = map_indexed(Execution::Parallel, trials, |i| -> Result<bool> {
            let truth = sample_instance(&exactness_instance(i), i as u64)?;
            let mut o = FaultyOracle::new(truth.clone(), 1.0, i as u64)?;
            let out = run_algorithm(&mut o, &truth, Algo::Full, 1.0, None, &consts);
            Ok(misclassification_error(&out.clustering, &truth)?.misclassification == 0.0)
        });
        let exact = results.into_iter().collect::<Result<Vec<_>>>()?.into_iter().filter(|&x| x).count();
        let secs = start.elapsed().as_secs_f64();
        Ok((exact == trials && secs < 120.0, format!("{exact}/{trials} exact in {secs:.1}s")))
    })
}

pub fn spectral_recovery(level: Level) -> CheckResult {
    timed("spectral recovery", || {
        let trials = level.pick(5, 20);
        let (t, k, delta) = (600, 3, 0.7);
        let c0 = AlgorithmConstants::desk_defaults().c0;
        let truth = sample_instance(&InstanceSpec::Balanced { n: t, k }, 3)?;
        let results = map_indexed(Execution::Parallel, trials, |seed| -> Result<bool> {
            let mut o = FaultyOracle::new(truth.clone(), delta, seed as u64)?;
            let all = all_vertices(t);
            let graph = build_query_graph(&mut o, &all)?;
            let parts = bal_partition(&graph, k, delta, 1.0)?;
            let sets = parts.clusters().iter().map(|c| c.iter().map(|&p| all[p]).collect()).collect();
            Ok(misclassification_error(&Clustering::new(sets, Vec::new())?, &truth)?.exact)
        });
        let exact = results.into_iter().collect::<Result<Vec<_>>>()?.into_iter().filter(|&x| x).count();
        let cond = recovery_condition(t, k, 1.0, delta, c0);
        Ok((
            exact >= needed(0.95, trials) && cond,
            format!("{exact}/{trials} exact; recovery condition at c0 = {c0}: {cond}"),
        ))
    })
}

/// `nk ln n / delta^2 + k^4 ln^2 n / delta^4`.
pub fn query_budget(n: usize, k: usize, delta: f64) -> f64 {
    let (nf, kf, ln) = (n as f64, k as f64, (n as f64).ln());
    nf * kf * ln / (delta * delta) + kf.powi(4) * ln * ln / delta.powi(4)
}

pub fn balanced_pipeline(level: Level) -> CheckResult {
    timed("balanced pipeline", || {
        let trials = level.pick(4, 20);
        let (n, k, delta) = (900, 3, 0.7);
        let consts = AlgorithmConstants::desk_defaults();
        let truth = sample_instance(&InstanceSpec::Balanced { n, k }, 5)?;
        let budget = 10.0 * query_budget(n, k, delta);
        let start = Instant::now();
        let results = map_indexed(Execution::Parallel, trials, |seed| -> Result<(bool, QueryStats)> {
            let mut o = FaultyOracle::new(truth.clone(), delta, seed as u64)?;
            let out = run_algorithm(&mut o, &truth, Algo::Balanced, delta, Some(1.0), &consts);
            Ok((misclassification_error(&out.clustering, &truth)?.exact, o.query_stats()))
        });
        let results = results.into_iter().collect::<Result<Vec<_>>>()?;
        let exact = results.iter().filter(|r| r.0).count();
        let max_pairs = results.iter().map(|r| r.1.distinct_pairs).max().unwrap_or(0);
        let secs = start.elapsed().as_secs_f64();
        Ok((
            exact >= needed(0.95, trials) && (max_pairs as f64) <= budget && secs < 300.0,
            format!(
                "{exact}/{trials} exact; max distinct pairs {max_pairs} vs budget {budget:.0}; sample size {}; {secs:.1}s",
                consts.balanced_sample_size(n, k, 1.0, delta)
            ),
        ))
    })
}

pub fn unbalanced_pipeline(level: Level) -> CheckResult {
    timed("unbalanced pipeline", || {
        let trials = level.pick(4, 20);
        let delta = 0.8;
        let consts = AlgorithmConstants::desk_defaults();
        let truth = sample_instance(&InstanceSpec::ExactSizes { sizes: vec![400, 380, 40] }, 6)?;
        let all = all_vertices(truth.n());
        let (big1, big2) = (truth.members(1), truth.members(2));
        let results = map_indexed(Execution::Parallel, trials, |seed| -> Result<(bool, bool, bool)> {
            let mut o = FaultyOracle::new(truth.clone(), delta, seed as u64)?;
            let run = noisy_clustering_traced(&mut o, &all, 3, delta, &consts)?;
            let good = run.clustering.contains_cluster(&big1) && run.clustering.contains_cluster(&big2);
            let first_h2 = matches!(run.rounds.first().map(|r| &r.outcome), Some(RoundOutcome::Grew { h: 2, .. }));
            let biased = run.rounds.iter().all(|r| match &r.outcome {
                RoundOutcome::Grew { subsets, .. } => {
                    subsets.iter().all(|s| biased_toward(s, &truth, NOISY_ETA / 4.0).is_some())
                }
                RoundOutcome::Fail => true,
            });
            Ok((good, first_h2, biased))
        });
        let results = results.into_iter().collect::<Result<Vec<_>>>()?;
        let good: Vec<_> = results.iter().filter(|r| r.0).collect();
        let h2 = good.iter().filter(|r| r.1).count();
        let biased = good.iter().filter(|r| r.2).count();
        Ok((
            good.len() >= needed(0.9, trials) && h2 == good.len() && biased == good.len(),
            format!(
                "{}/{trials} recover both large clusters; h = 2 on {h2}; biased subsets on {biased}",
                good.len()
            ),
        ))
    })
}

/// Random descending sizes with `s_k < b n / k`, or `None` if the draw
/// cannot satisfy that.
fn random_gap_sizes(rng: &mut ChaCha8Rng) -> Option<(Vec<usize>, usize, usize, f64)> {
    let k = rng.random_range(2..=10usize);
    let n = rng.random_range(k * 4..=20_000usize);
    let b = rng.random_range(0.0..=0.5f64);
    let cap = (b * n as f64 / k as f64).ceil() as usize;
    if cap < 2 {
        return None;
    }
    let smallest = rng.random_range(1..cap);
    let rest = n - smallest;
    let mut cuts: Vec<usize> = (0..k - 2).map(|_| rng.random_range(0..=rest)).collect();
    cuts.push(0);
    cuts.push(rest);
    cuts.sort_unstable();
    let mut sizes: Vec<usize> = cuts.windows(2).map(|w| w[1] - w[0]).collect();
    sizes.push(smallest);
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    if sizes[k - 1] != smallest || sizes.contains(&0) {
        return None;
    }
    Some((sizes, n, k, b))
}

pub fn size_gap_property(level: Level) -> CheckResult {
    timed("size-gap property", || {
        let target = level.pick(2_000, 10_000);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (mut tested, mut violations, mut exceptions) = (0usize, 0usize, 0usize);
        let start = Instant::now();
        while tested < target {
            let Some((sizes, n, k, b)) = random_gap_sizes(&mut rng) else { continue };
            tested += 1;
            let (nf, kf) = (n as f64, k as f64);
            match find_gap_index(&sizes, n, k, b) {
                Ok(Some(h)) if h < k => {
                    let upper = sizes[h - 1] as f64 >= gap_threshold(h, nf, kf, b);
                    let lower = (sizes[h] as f64) < gap_threshold(h + 1, nf, kf, b);
                    let gap = (sizes[h - 1] - sizes[h]) as f64 >= b * nf / (kf * kf) - 1e-9;
                    if !(upper && lower && gap) {
                        violations += 1;
                    }
                }
                Ok(_) => violations += 1,
                Err(_) => exceptions += 1,
            }
        }
        let secs = start.elapsed().as_secs_f64();
        Ok((
            violations == 0 && exceptions == 0 && secs < 10.0,
            format!("{tested} instances: {violations} violations, {exceptions} exceptions, {secs:.2}s"),
        ))
    })
}

pub fn biased_growth(level: Level) -> CheckResult {
    timed("biased growth", || {
        let trials = level.pick(2, 10);
        let (eta, delta, b_size, probes) = (0.1, 0.6, 300usize, 500usize);
        let truth = sample_instance(&InstanceSpec::Balanced { n: 3000, k: 5 }, 8)?;
        let results = map_indexed(Execution::Parallel, trials, |trial| -> Result<usize> {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + trial as u64);
            let mut in_c = truth.members(1);
            in_c.shuffle(&mut rng);
            let core = ((0.5 + eta) * b_size as f64).ceil() as usize;
            let mut set: Vec<Vertex> = in_c[..core].to_vec();
            let per_other = (b_size - core) / 4;
            let mut outside = Vec::new();
            for label in 2..=5u32 {
                let mut m = truth.members(label);
                m.shuffle(&mut rng);
                set.extend_from_slice(&m[..per_other]);
                outside.extend_from_slice(&m[per_other..]);
            }
            outside.shuffle(&mut rng);
            let mut probe: Vec<Vertex> = in_c[core..core + probes / 2].to_vec();
            probe.extend_from_slice(&outside[..probes - probes / 2]);
            let mut o = FaultyOracle::new(truth.clone(), delta, trial as u64)?;
            let mut errors = 0;
            for v in probe {
                let said = belong_to_cluster(&mut o, v, &set)?;
                errors += usize::from(said != (truth.label(v)? == 1));
            }
            Ok(errors)
        });
        let errors: usize = results.into_iter().collect::<Result<Vec<_>>>()?.into_iter().sum();
        let rate = errors as f64 / (trials * probes) as f64;
        let bound = chernoff_failure_bound(b_size, eta * delta * b_size as f64 / 2.0);
        Ok((
            rate <= 0.01 && rate <= bound,
            format!("error rate {rate:.4} over {trials} x {probes} probes; Chernoff bound {bound:.3}"),
        ))
    })
}

pub fn bias_test_discrimination(level: Level) -> CheckResult {
    timed("bias-test discrimination", || {
        let trials = level.pick(40, 200);
        let (eta, delta, b, b_size) = (0.1, 0.6, 1.0, 3000usize);
        let consts = AlgorithmConstants::desk_defaults();
        let truth = sample_instance(&InstanceSpec::Balanced { n: 12_000, k: 2 }, 9)?;
        let all = all_vertices(truth.n());
        let results = map_indexed(Execution::Parallel, 2 * trials, |i| -> Result<bool> {
            let split = i >= trials;
            let mut rng = ChaCha8Rng::seed_from_u64(2000 + i as u64);
            let mut a = truth.members(1);
            let mut c = truth.members(2);
            a.shuffle(&mut rng);
            c.shuffle(&mut rng);
            let set: Vec<Vertex> = if split {
                a[..b_size / 2].iter().chain(&c[..b_size / 2]).copied().collect()
            } else {
                a[..b_size].to_vec()
            };
            let mut o = FaultyOracle::new(truth.clone(), delta, i as u64)?;
            test_bias(&mut o, truth.n(), &set, &all, eta, b, 2, delta, &consts)
        });
        let results = results.into_iter().collect::<Result<Vec<_>>>()?;
        let accepted = results[..trials].iter().filter(|&&x| x).count();
        let rejected = results[trials..].iter().filter(|&&x| !x).count();
        Ok((
            accepted >= needed(0.99, trials) && rejected >= needed(0.99, trials),
            format!(
                "biased accepted {accepted}/{trials}, half-split rejected {rejected}/{trials}; {} probes per test",
                consts.bias_trials(truth.n(), 2, b)
            ),
        ))
    })
}

pub fn query_monotonicity(level: Level) -> CheckResult {
    timed("query monotonicity and determinism", || {
        let seeds: Vec<u64> = (0..level.pick(2, 5) as u64).collect();
        let mut config =
            ExperimentConfig::new(InstanceSpec::Balanced { n: 1200, k: 3 }, vec![0.4, 0.6, 0.8, 1.0], seeds);
        config.algo = Algo::Balanced;
        config.instance_seed = 10;
        let rows = run_experiment(&config)?;
        let first = rows_to_string(&rows, OutputFormat::Csv);
        let again = rows_to_string(&run_experiment(&config)?, OutputFormat::Csv);
        config.execution = Execution::Sequential;
        let sequential = rows_to_string(&run_experiment(&config)?, OutputFormat::Csv);
        let means: Vec<f64> = crate::experiment::summarize(&rows).iter().map(|s| s.distinct_pairs_mean).collect();
        let monotone = means.windows(2).all(|w| w[1] <= w[0]);
        Ok((
            monotone && first == again && first == sequential,
            format!(
                "mean distinct pairs {:?}; rerun identical: {}; sequential identical: {}",
                means.iter().map(|m| m.round() as u64).collect::<Vec<_>>(),
                first == again,
                first == sequential
            ),
        ))
    })
}

/// Constants for the ten-vertex whole-graph regime: tested subsets of four.
pub fn tiny_instance_constants() -> AlgorithmConstants {
    AlgorithmConstants { subset_size_mult: 0.0125, ..AlgorithmConstants::desk_defaults() }
}

pub fn brute_force_concordance(level: Level) -> CheckResult {
    timed("brute-force concordance", || {
        let trials = level.pick(10, 30);
        let delta = 0.9;
        let consts = tiny_instance_constants();
        let truth = sample_instance(&InstanceSpec::Balanced { n: 10, k: 2 }, 11)?;
        let planted = Clustering::new(truth.clusters(), Vec::new())?;
        let all = all_vertices(10);
        let mut eligible = 0;
        let mut agree = 0;
        for seed in 0..trials as u64 {
            let mut o = FaultyOracle::new(truth.clone(), delta, seed)?;
            let out = noisy_clustering_traced(&mut o, &all, 2, delta, &consts)?;
            let graph = build_query_graph(&mut o, &all)?;
            let bf = brute_force_ml_clustering(&graph, 2)?;
            if same_partition(&bf, &planted) {
                eligible += 1;
                agree += usize::from(same_partition(&out.clustering, &bf));
            }
        }
        Ok((agree == eligible, format!("{agree}/{eligible} agree where the brute force is planted ({trials} seeds)")))
    })
}

fn same_partition(a: &Clustering, b: &Clustering) -> bool {
    let mut x = a.vertex_sets();
    let mut y = b.vertex_sets();
    x.sort();
    y.sort();
    x == y && a.remainder().is_empty() && b.remainder().is_empty()
}

/// An oracle whose answer to a pair flips every time the pair is asked again.
pub struct TamperedOracle {
    inner: FaultyOracle,
    asked: HashMap<u64, u32>,
}

impl TamperedOracle {
    pub fn new(inner: FaultyOracle) -> Self {
        TamperedOracle { inner, asked: HashMap::new() }
    }
}

impl SameClusterOracle for TamperedOracle {
    fn n(&self) -> usize {
        self.inner.n()
    }

    fn query(&mut self, u: Vertex, v: Vertex) -> Result<Sign> {
        let answer = self.inner.query(u, v)?;
        let count = self.asked.entry(pair_key(u, v)).or_insert(0);
        *count += 1;
        Ok(match (answer, count.is_multiple_of(2)) {
            (a, false) => a,
            (Sign::Plus, true) => Sign::Minus,
            (Sign::Minus, true) => Sign::Plus,
        })
    }

    fn query_stats(&self) -> QueryStats {
        self.inner.query_stats()
    }

    fn sampling_rng(&mut self) -> ChaCha8Rng {
        self.inner.sampling_rng()
    }
}

/// The persistence probe must flag the tampered oracle.
pub fn tampered_oracle_is_caught() -> CheckResult {
    timed("tampered oracle is caught", || {
        let truth = sample_instance(&InstanceSpec::Balanced { n: 50, k: 2 }, 12)?;
        let mut o = TamperedOracle::new(FaultyOracle::new(truth, 0.5, 0)?);
        let (changes, asym) = persistence_probe(&mut o, 2000, 1)?;
        Ok((changes + asym > 0, format!("{changes} changes, {asym} asymmetries detected")))
    })
}

/// Degree sums are even and degree filtering only removes vertices.
pub fn graph_invariants(level: Level) -> CheckResult {
    timed("graph invariants", || {
        let trials = level.pick(20, 100);
        let mut bad = 0;
        for seed in 0..trials as u64 {
            let truth = sample_instance(&InstanceSpec::Balanced { n: 60, k: 3 }, seed)?;
            let mut o = FaultyOracle::new(truth, 0.4, seed)?;
            let g = build_query_graph(&mut o, &all_vertices(60))?;
            let degrees = g.degrees();
            let threshold = (seed % 40) as f64;
            let f = g.filter_by_degree(threshold);
            let kept: HashSet<Vertex> = f.vertices().iter().copied().collect();
            let wrong = g
                .vertices()
                .iter()
                .zip(&degrees)
                .any(|(v, &d)| kept.contains(v) != (d as f64 >= threshold));
            if degrees.iter().sum::<usize>() % 2 != 0 || wrong {
                bad += 1;
            }
        }
        Ok((bad == 0, format!("{trials} graphs, {bad} violations")))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tampered_oracle_fails_persistence() {
        assert!(tampered_oracle_is_caught().passed);
    }

    #[test]
    fn honest_oracle_passes_persistence() {
        let truth = sample_instance(&InstanceSpec::Balanced { n: 50, k: 2 }, 12).unwrap();
        let mut o = FaultyOracle::new(truth, 0.5, 0).unwrap();
        assert_eq!(persistence_probe(&mut o, 2000, 1).unwrap(), (0, 0));
    }

    #[test]
    fn report_rendering() {
        let r = VerifyReport {
            checks: vec![CheckResult { name: "x", passed: false, detail: "d".into(), elapsed: Duration::ZERO }],
        };
        assert!(!r.passed());
        assert!(r.render().starts_with("FAIL x"));
    }

    #[test]
    fn needed_rounds_up() {
        assert_eq!(needed(0.95, 20), 19);
        assert_eq!(needed(0.99, 200), 198);
        assert_eq!(needed(0.9, 20), 18);
    }
}
