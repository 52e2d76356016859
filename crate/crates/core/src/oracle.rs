//! Ground-truth instances and the faulty same-cluster oracle.
//!
//! The oracle answers `query(u, v)` with the sign of `tau(u, v) * noise(u, v)`
//! where the noise is `+1` with probability `1/2 + delta/2`. Noise is
//! persistent: it is a pure keyed function of `(seed, min(u,v), max(u,v))`,
//! so repeated and mirrored queries always agree and a `(seed, delta,
//! instance)` triple replays every answer bit-exactly.
//!
//! Accounting contract: [`FaultyOracle`] is single-caller. Queries take
//! `&mut self`; concurrent experiments each own a separate oracle.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::{self, Execution};

/// A vertex of `V = [n]`, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vertex(pub u32);

impl Vertex {
    /// 0-based index into label arrays.
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize - 1
    }

    #[inline]
    pub fn from_index(i: usize) -> Self {
        Vertex(i as u32 + 1)
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// All vertices `1..=n`.
pub fn all_vertices(n: usize) -> Vec<Vertex> {
    (0..n).map(Vertex::from_index).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn is_plus(self) -> bool {
        self == Sign::Plus
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }
}

/// Oracle bias `delta = 1 - 2 eps`, restricted to `(0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Bias(f64);

impl Bias {
    pub fn new(delta: f64) -> Result<Self> {
        if delta.is_finite() && delta > 0.0 && delta <= 1.0 {
            Ok(Bias(delta))
        } else {
            Err(Error::InvalidBias(delta))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }

    /// Probability of a correct answer, `1 - eps = 1/2 + delta/2`.
    #[inline]
    pub fn p_correct(self) -> f64 {
        0.5 + 0.5 * self.0
    }

    /// Within-cluster `+` probability `p`.
    #[inline]
    pub fn p_same(self) -> f64 {
        self.p_correct()
    }

    /// Cross-cluster `+` probability `q = 1/2 - delta/2`.
    #[inline]
    pub fn p_cross(self) -> f64 {
        0.5 - 0.5 * self.0
    }
}

impl TryFrom<f64> for Bias {
    type Error = Error;
    fn try_from(value: f64) -> Result<Self> {
        Bias::new(value)
    }
}

impl From<Bias> for f64 {
    fn from(b: Bias) -> f64 {
        b.0
    }
}

/// The latent partition `V_1, ..., V_k` of `[n]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruth {
    labels: Vec<u32>,
    k: usize,
}

impl GroundTruth {
    /// Builds a partition from 1-based labels. Every label in `1..=k` must be used.
    pub fn new(labels: Vec<u32>, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidInstance("k must be at least 1".into()));
        }
        if labels.is_empty() {
            return Err(Error::InvalidInstance("empty vertex set".into()));
        }
        let mut seen = vec![false; k];
        for (i, &l) in labels.iter().enumerate() {
            if l == 0 || l as usize > k {
                return Err(Error::InvalidInstance(format!(
                    "label {l} of vertex {} outside [1, {k}]",
                    i + 1
                )));
            }
            seen[l as usize - 1] = true;
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidInstance(format!(
                "cluster {} has no vertices",
                missing + 1
            )));
        }
        Ok(GroundTruth { labels, k })
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn label(&self, v: Vertex) -> Result<u32> {
        self.check(v)?;
        Ok(self.labels[v.index()])
    }

    /// Sizes `|V_1|, ..., |V_k|` indexed by label.
    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &l in &self.labels {
            sizes[l as usize - 1] += 1;
        }
        sizes
    }

    /// Members of cluster `label` in ascending vertex order.
    pub fn members(&self, label: u32) -> Vec<Vertex> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == label)
            .map(|(i, _)| Vertex::from_index(i))
            .collect()
    }

    pub fn clusters(&self) -> Vec<Vec<Vertex>> {
        (1..=self.k as u32).map(|l| self.members(l)).collect()
    }

    fn check(&self, v: Vertex) -> Result<()> {
        if v.0 == 0 || v.index() >= self.labels.len() {
            Err(Error::VertexOutOfRange { vertex: v, n: self.labels.len() })
        } else {
            Ok(())
        }
    }

    /// `tau(u, v)`: `+` iff `u` and `v` share a cluster.
    pub fn tau(&self, u: Vertex, v: Vertex) -> Result<Sign> {
        self.check(u)?;
        self.check(v)?;
        if u == v {
            return Err(Error::SelfPair(u));
        }
        Ok(if self.labels[u.index()] == self.labels[v.index()] {
            Sign::Plus
        } else {
            Sign::Minus
        })
    }

    pub fn to_file(&self) -> InstanceFile {
        InstanceFile { n: self.n(), k: self.k, labels: self.labels.clone() }
    }
}

/// On-disk instance: `{"n": .., "k": .., "labels": [..]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub n: usize,
    pub k: usize,
    pub labels: Vec<u32>,
}

impl InstanceFile {
    pub fn into_truth(self) -> Result<GroundTruth> {
        if self.labels.len() != self.n {
            return Err(Error::InvalidInstance(format!(
                "n = {} but {} labels given",
                self.n,
                self.labels.len()
            )));
        }
        GroundTruth::new(self.labels, self.k)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("instance serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidInstance(e.to_string()))
    }
}

pub fn read_instance(path: &Path) -> Result<GroundTruth> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidInstance(format!("{}: {e}", path.display())))?;
    InstanceFile::from_json(&text)?.into_truth()
}

pub fn write_instance(path: &Path, truth: &GroundTruth) -> std::io::Result<()> {
    std::fs::write(path, truth.to_file().to_json() + "\n")
}

/// Regimes an instance can be drawn from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InstanceSpec {
    ExactSizes { sizes: Vec<usize> },
    Balanced { n: usize, k: usize },
    BBalanced { n: usize, k: usize, b: f64 },
    GapInstance { n: usize, k: usize, h: usize, b: f64 },
}

impl InstanceSpec {
    /// Cluster sizes the spec resolves to, indexed by label.
    pub fn sizes(&self) -> Result<Vec<usize>> {
        match *self {
            InstanceSpec::ExactSizes { ref sizes } => {
                if sizes.is_empty() || sizes.contains(&0) {
                    return Err(Error::InfeasibleInstance(
                        "sizes must be a nonempty list of positive integers".into(),
                    ));
                }
                Ok(sizes.clone())
            }
            InstanceSpec::Balanced { n, k } => {
                check_nk(n, k)?;
                Ok((0..k).map(|i| n / k + usize::from(i < n % k)).collect())
            }
            InstanceSpec::BBalanced { n, k, b } => {
                check_nk(n, k)?;
                if !(b > 0.0 && b <= 1.0) {
                    return Err(Error::InfeasibleInstance(format!("b = {b} outside (0, 1]")));
                }
                let min = (b * n as f64 / k as f64).ceil() as usize;
                if min * k > n || min == 0 {
                    return Err(Error::InfeasibleInstance(format!(
                        "b n / k rounds up to {min}, and {k} such clusters exceed n = {n}"
                    )));
                }
                let rest = n - min;
                let others = k - 1;
                let mut sizes: Vec<usize> = (0..others)
                    .map(|i| rest / others + usize::from(i < rest % others))
                    .collect();
                sizes.push(min);
                Ok(sizes)
            }
            InstanceSpec::GapInstance { n, k, h, b } => {
                check_nk(n, k)?;
                if h == 0 || h >= k {
                    return Err(Error::InvalidIndex { h, max: k.saturating_sub(1) });
                }
                if !(b > 0.0 && b <= 0.5) {
                    return Err(Error::InfeasibleInstance(format!("b = {b} outside (0, 1/2]")));
                }
                // Largest integer strictly below b n / k.
                let small = (b * n as f64 / k as f64).ceil() as usize - 1;
                if small == 0 {
                    return Err(Error::InfeasibleInstance(format!(
                        "b n / k = {} leaves no room for small clusters",
                        b * n as f64 / k as f64
                    )));
                }
                let rest = n - (k - h) * small;
                let mut sizes: Vec<usize> =
                    (0..h).map(|i| rest / h + usize::from(i < rest % h)).collect();
                sizes.extend(std::iter::repeat_n(small, k - h));
                match crate::eval::find_gap_index(&sizes, n, k, b)? {
                    Some(found) if found == h => Ok(sizes),
                    other => Err(Error::InfeasibleInstance(format!(
                        "sizes {sizes:?} put the size gap at {other:?}, not {h}"
                    ))),
                }
            }
        }
    }
}

fn check_nk(n: usize, k: usize) -> Result<()> {
    if k == 0 || n < k {
        Err(Error::InfeasibleInstance(format!("need 1 <= k <= n, got n = {n}, k = {k}")))
    } else {
        Ok(())
    }
}

/// Draws a ground truth with the requested sizes; the seed shuffles which
/// vertices carry which label.
pub fn sample_instance(spec: &InstanceSpec, seed: u64) -> Result<GroundTruth> {
    let sizes = spec.sizes()?;
    let mut labels: Vec<u32> = sizes
        .iter()
        .enumerate()
        .flat_map(|(i, &s)| std::iter::repeat_n(i as u32 + 1, s))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    labels.shuffle(&mut rng);
    GroundTruth::new(labels, sizes.len())
}

/// Snapshot of the query accountant.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryStats {
    /// Unordered pairs queried at least once.
    pub distinct_pairs: u64,
    /// All query invocations, repeats included.
    pub total_calls: u64,
}

/// Exact bookkeeping of distinct pairs and total calls.
#[derive(Debug, Clone, Default)]
pub struct QueryAccountant {
    pairs: HashSet<u64>,
    total_calls: u64,
}

impl QueryAccountant {
    pub fn record(&mut self, u: Vertex, v: Vertex) {
        self.total_calls += 1;
        self.pairs.insert(pair_key(u, v));
    }

    pub fn stats(&self) -> QueryStats {
        QueryStats { distinct_pairs: self.pairs.len() as u64, total_calls: self.total_calls }
    }

    pub fn has_seen(&self, u: Vertex, v: Vertex) -> bool {
        self.pairs.contains(&pair_key(u, v))
    }
}

/// Canonical key of the unordered pair `{u, v}`.
#[inline]
pub fn pair_key(u: Vertex, v: Vertex) -> u64 {
    let (a, b) = if u < v { (u.0, v.0) } else { (v.0, u.0) };
    (u64::from(a) << 32) | u64::from(b)
}

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Uniform `[0, 1)` draw keyed by `(seed, canonical pair)`.
#[inline]
fn pair_uniform(seed: u64, u: Vertex, v: Vertex) -> f64 {
    let key = pair_key(u, v);
    let h = mix64(mix64(seed ^ 0x9e37_79b9_7f4a_7c15) ^ key.wrapping_mul(0xd6e8_feb8_6659_fd93));
    (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Source of same-cluster answers. Algorithms are generic over this so test
/// fixtures (for instance a deliberately broken oracle) can stand in.
pub trait SameClusterOracle {
    /// Size of the ambient vertex set `[n]`.
    fn n(&self) -> usize;

    fn query(&mut self, u: Vertex, v: Vertex) -> Result<Sign>;

    fn query_stats(&self) -> QueryStats;

    /// Fresh sampling stream; each call yields independent randomness.
    fn sampling_rng(&mut self) -> ChaCha8Rng;

    /// Number of `+` answers of `v` against every member of `set`.
    fn count_plus(&mut self, v: Vertex, set: &[Vertex]) -> Result<usize> {
        let mut plus = 0;
        for &w in set {
            if self.query(v, w)?.is_plus() {
                plus += 1;
            }
        }
        Ok(plus)
    }

    /// Queries every pair of `vertices`; returns a row-major symmetric
    /// `m x m` matrix of `+` answers with a false diagonal.
    fn query_all_pairs(&mut self, vertices: &[Vertex], _exec: Execution) -> Result<Vec<bool>> {
        let m = vertices.len();
        let mut adj = vec![false; m * m];
        for i in 0..m {
            for j in i + 1..m {
                let plus = self.query(vertices[i], vertices[j])?.is_plus();
                adj[i * m + j] = plus;
                adj[j * m + i] = plus;
            }
        }
        Ok(adj)
    }
}

/// Seeded persistent-noise oracle over a ground truth.
#[derive(Debug, Clone)]
pub struct FaultyOracle {
    truth: GroundTruth,
    delta: Bias,
    seed: u64,
    accountant: QueryAccountant,
    sample_calls: u64,
}

impl FaultyOracle {
    pub fn new(truth: GroundTruth, delta: f64, seed: u64) -> Result<Self> {
        Ok(FaultyOracle {
            truth,
            delta: Bias::new(delta)?,
            seed,
            accountant: QueryAccountant::default(),
            sample_calls: 0,
        })
    }

    pub fn truth(&self) -> &GroundTruth {
        &self.truth
    }

    pub fn delta(&self) -> Bias {
        self.delta
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn accountant(&self) -> &QueryAccountant {
        &self.accountant
    }

    /// The answer the oracle gives for `(u, v)` without touching the accountant.
    fn answer(&self, u: Vertex, v: Vertex) -> Result<Sign> {
        let tau = self.truth.tau(u, v)?;
        let noise_plus = pair_uniform(self.seed, u, v) < self.delta.p_correct();
        Ok(match (tau, noise_plus) {
            (s, true) => s,
            (Sign::Plus, false) => Sign::Minus,
            (Sign::Minus, false) => Sign::Plus,
        })
    }

    pub fn replay(&self) -> OracleReplay {
        OracleReplay { seed: self.seed, delta: self.delta.get(), instance: self.truth.to_file() }
    }
}

impl SameClusterOracle for FaultyOracle {
    fn n(&self) -> usize {
        self.truth.n()
    }

    fn query(&mut self, u: Vertex, v: Vertex) -> Result<Sign> {
        let s = self.answer(u, v)?;
        self.accountant.record(u, v);
        Ok(s)
    }

    fn query_stats(&self) -> QueryStats {
        self.accountant.stats()
    }

    fn sampling_rng(&mut self) -> ChaCha8Rng {
        self.sample_calls += 1;
        ChaCha8Rng::seed_from_u64(mix64(self.seed ^ 0x5a17_e5ee_d000_0000) ^ mix64(self.sample_calls))
    }

    fn query_all_pairs(&mut self, vertices: &[Vertex], exec: Execution) -> Result<Vec<bool>> {
        let m = vertices.len();
        for &v in vertices {
            self.truth.check(v)?;
        }
        let this = &*self;
        let rows: Vec<Result<Vec<bool>>> = par::map_indexed(exec, m, |i| {
            (0..m)
                .map(|j| if i == j { Ok(false) } else { Ok(this.answer(vertices[i], vertices[j])?.is_plus()) })
                .collect()
        });
        let mut adj = Vec::with_capacity(m * m);
        for row in rows {
            adj.extend(row?);
        }
        for i in 0..m {
            for j in i + 1..m {
                self.accountant.record(vertices[i], vertices[j]);
            }
        }
        Ok(adj)
    }
}

/// Everything needed to reproduce an oracle's answers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReplay {
    pub seed: u64,
    pub delta: f64,
    pub instance: InstanceFile,
}

impl OracleReplay {
    pub fn into_oracle(self) -> Result<FaultyOracle> {
        FaultyOracle::new(self.instance.into_truth()?, self.delta, self.seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(i: u32) -> Vertex {
        Vertex(i)
    }

    #[test]
    fn tau_examples() {
        let t = GroundTruth::new(vec![1, 1, 2], 2).unwrap();
        assert_eq!(t.tau(v(1), v(2)).unwrap(), Sign::Plus);
        assert_eq!(t.tau(v(1), v(3)).unwrap(), Sign::Minus);
        assert_eq!(t.tau(v(1), v(1)), Err(Error::SelfPair(v(1))));
        assert!(matches!(t.tau(v(1), v(4)), Err(Error::VertexOutOfRange { .. })));
        assert!(matches!(t.tau(v(0), v(2)), Err(Error::VertexOutOfRange { .. })));
    }

    #[test]
    fn ground_truth_rejects_unused_or_bad_labels() {
        assert!(GroundTruth::new(vec![1, 1], 2).is_err());
        assert!(GroundTruth::new(vec![1, 3], 2).is_err());
        assert!(GroundTruth::new(vec![0, 1], 2).is_err());
        assert!(GroundTruth::new(vec![], 1).is_err());
    }

    #[test]
    fn instance_sizes() {
        let t = sample_instance(&InstanceSpec::ExactSizes { sizes: vec![3, 3, 3] }, 1).unwrap();
        assert_eq!((t.n(), t.k()), (9, 3));
        assert_eq!(t.cluster_sizes(), vec![3, 3, 3]);

        let t = sample_instance(&InstanceSpec::Balanced { n: 10, k: 3 }, 1).unwrap();
        assert_eq!(t.cluster_sizes(), vec![4, 3, 3]);

        let s = InstanceSpec::BBalanced { n: 100, k: 4, b: 0.6 }.sizes().unwrap();
        assert_eq!(s.iter().sum::<usize>(), 100);
        assert!(s.iter().all(|&x| x as f64 >= 0.6 * 25.0));

        assert!(matches!(
            InstanceSpec::BBalanced { n: 10, k: 3, b: 1.0 }.sizes(),
            Err(Error::InfeasibleInstance(_))
        ));
        assert!(InstanceSpec::Balanced { n: 2, k: 3 }.sizes().is_err());
        assert!(InstanceSpec::ExactSizes { sizes: vec![2, 0] }.sizes().is_err());
    }

    #[test]
    fn gap_instance_has_gap_at_h() {
        let sizes = InstanceSpec::GapInstance { n: 110, k: 4, h: 2, b: 0.5 }.sizes().unwrap();
        assert_eq!(sizes, vec![42, 42, 13, 13]);
        let (n, k, b) = (110.0, 4.0, 0.5);
        assert!(sizes[1] as f64 >= n / k - 2.0 * b * n / (k * k));
        assert!((sizes[2] as f64) < n / k - 3.0 * b * n / (k * k));
        assert!(InstanceSpec::GapInstance { n: 110, k: 4, h: 4, b: 0.5 }.sizes().is_err());
        assert!(InstanceSpec::GapInstance { n: 8, k: 4, h: 1, b: 0.5 }.sizes().is_err());
    }

    #[test]
    fn query_stats_count_canonical_pairs() {
        let t = GroundTruth::new(vec![1, 1, 2], 2).unwrap();
        let mut o = FaultyOracle::new(t, 0.5, 3).unwrap();
        assert_eq!(o.query_stats(), QueryStats { distinct_pairs: 0, total_calls: 0 });
        o.query(v(1), v(2)).unwrap();
        o.query(v(2), v(1)).unwrap();
        o.query(v(1), v(3)).unwrap();
        assert_eq!(o.query_stats(), QueryStats { distinct_pairs: 2, total_calls: 3 });
        assert_eq!(o.query(v(2), v(2)), Err(Error::SelfPair(v(2))));
        assert_eq!(o.query_stats().total_calls, 3);
    }

    #[test]
    fn noiseless_oracle_matches_tau() {
        let t = sample_instance(&InstanceSpec::Balanced { n: 30, k: 3 }, 9).unwrap();
        let mut o = FaultyOracle::new(t.clone(), 1.0, 77).unwrap();
        for a in 1..=30 {
            for b in a + 1..=30 {
                assert_eq!(o.query(v(a), v(b)).unwrap(), t.tau(v(a), v(b)).unwrap());
            }
        }
    }

    #[test]
    fn zero_bias_rejected() {
        let t = GroundTruth::new(vec![1], 1).unwrap();
        assert!(matches!(FaultyOracle::new(t.clone(), 0.0, 1), Err(Error::InvalidBias(_))));
        assert!(FaultyOracle::new(t.clone(), 1.5, 1).is_err());
        assert!(FaultyOracle::new(t, f64::NAN, 1).is_err());
    }

    #[test]
    fn same_cluster_plus_rate_in_binomial_band() {
        // 100 same-cluster pairs at delta = 0.5: + rate ~ Binomial(100, 0.75)/100.
        let t = GroundTruth::new(vec![1; 101], 1).unwrap();
        let mut o = FaultyOracle::new(t, 0.5, 2024).unwrap();
        let plus = (2..=101).filter(|&w| o.query(v(1), v(w)).unwrap().is_plus()).count();
        let sigma = (100.0f64 * 0.75 * 0.25).sqrt();
        assert!((plus as f64 - 75.0).abs() <= 3.0 * sigma, "plus = {plus}");
    }

    #[test]
    fn bulk_pairs_match_single_queries() {
        let t = sample_instance(&InstanceSpec::Balanced { n: 40, k: 2 }, 4).unwrap();
        let verts: Vec<Vertex> = vec![v(3), v(9), v(1), v(33), v(20)];
        let mut bulk = FaultyOracle::new(t.clone(), 0.3, 5).unwrap();
        let mut single = FaultyOracle::new(t, 0.3, 5).unwrap();
        let adj = bulk.query_all_pairs(&verts, Execution::Parallel).unwrap();
        let adj2 = SameClusterOracle::query_all_pairs(&mut Slow(&mut single), &verts, Execution::Sequential).unwrap();
        assert_eq!(adj, adj2);
        assert_eq!(bulk.query_stats(), QueryStats { distinct_pairs: 10, total_calls: 10 });
    }

    struct Slow<'a>(&'a mut FaultyOracle);

    impl SameClusterOracle for Slow<'_> {
        fn n(&self) -> usize {
            self.0.n()
        }
        fn query(&mut self, u: Vertex, v: Vertex) -> Result<Sign> {
            self.0.query(u, v)
        }
        fn query_stats(&self) -> QueryStats {
            self.0.query_stats()
        }
        fn sampling_rng(&mut self) -> ChaCha8Rng {
            self.0.sampling_rng()
        }
    }

    #[test]
    fn instance_file_roundtrip_and_replay() {
        let t = sample_instance(&InstanceSpec::Balanced { n: 12, k: 3 }, 8).unwrap();
        let json = t.to_file().to_json();
        let back = InstanceFile::from_json(&json).unwrap().into_truth().unwrap();
        assert_eq!(back, t);
        assert!(InstanceFile { n: 3, k: 1, labels: vec![1, 1] }.into_truth().is_err());

        let mut o = FaultyOracle::new(t, 0.4, 99).unwrap();
        let replay: OracleReplay = serde_json::from_str(&serde_json::to_string(&o.replay()).unwrap()).unwrap();
        let mut o2 = replay.into_oracle().unwrap();
        for a in 1..=12u32 {
            for b in a + 1..=12 {
                assert_eq!(o.query(v(a), v(b)).unwrap(), o2.query(v(a), v(b)).unwrap());
            }
        }
    }

    #[test]
    fn sampling_streams_differ_per_call() {
        use rand::Rng;
        let t = GroundTruth::new(vec![1; 4], 1).unwrap();
        let mut o = FaultyOracle::new(t, 0.5, 1).unwrap();
        let a: u64 = o.sampling_rng().random();
        let b: u64 = o.sampling_rng().random();
        assert_ne!(a, b);
    }
}
