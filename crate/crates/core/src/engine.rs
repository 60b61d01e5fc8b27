//! One replica of the interchange process: edges arrive one at a time, the cycle
//! decomposition and the percolation clusters are updated in lockstep, and every
//! step is classified as a split, a merge inside a cluster, or a merge across
//! clusters.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::clusters::ClusterState;
use crate::cycles::{CycleChange, CycleState};
use crate::error::{Error, Result};
use crate::graph::{Edge, Hypercube, Topology};

/// Identifies the random source; recorded in every output so a run can be reproduced.
pub const RNG_ALGORITHM: &str = "chacha8-rand_chacha0.9-seed_from_u64";

/// Runs longer than this are rejected at configuration time so every counter and the
/// martingale numerator stay exact.
pub const MAX_STEPS: u64 = 1 << 48;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EventKind {
    Split,
    MergeSameCluster,
    MergeCrossCluster,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StepEvent {
    pub t: u64,
    pub edge: Edge,
    pub kind: EventKind,
    /// Smaller piece of a split; `None` for merges.
    pub split_min_size: Option<u32>,
}

/// Cumulative event counts `#S`, `#M`, `#M̃`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventCounts {
    pub splits: u64,
    pub merges_same_cluster: u64,
    pub merges_cross_cluster: u64,
}

impl EventCounts {
    fn record(&mut self, kind: EventKind) {
        match kind {
            EventKind::Split => self.splits += 1,
            EventKind::MergeSameCluster => self.merges_same_cluster += 1,
            EventKind::MergeCrossCluster => self.merges_cross_cluster += 1,
        }
    }

    /// `#S − #M`, which equals `N_t − Ñ_t`.
    pub fn split_excess(&self) -> i64 {
        self.splits as i64 - self.merges_same_cluster as i64
    }
}

/// Classifies the arrival of `e` against the pre-update states, then applies the
/// transposition and opens the edge.
pub fn classify_and_apply<G: Topology>(
    cycles: &mut CycleState,
    clusters: &mut ClusterState,
    topo: &G,
    t: u64,
    e: Edge,
) -> Result<StepEvent> {
    let same_cycle = cycles.same_cycle(e.lo(), e.hi());
    let same_cluster = clusters.same_cluster(e.lo(), e.hi());
    if same_cycle && !same_cluster {
        return Err(Error::Invariant {
            t,
            what: format!("endpoints of {e} share a cycle but not a cluster"),
        });
    }
    let (cycles_before, clusters_before) = (cycles.num_cycles(), clusters.num_clusters());
    let change = cycles.apply_transposition(e);
    let merged_clusters = clusters.open_edge(topo, e);

    let kind = match (change.is_split(), same_cluster) {
        (true, _) => EventKind::Split,
        (false, true) => EventKind::MergeSameCluster,
        (false, false) => EventKind::MergeCrossCluster,
    };
    let expected = match kind {
        EventKind::Split => (cycles_before + 1, clusters_before),
        EventKind::MergeSameCluster => (cycles_before - 1, clusters_before),
        EventKind::MergeCrossCluster => (cycles_before - 1, clusters_before - 1),
    };
    if change.is_split() != same_cycle
        || merged_clusters == same_cluster
        || (cycles.num_cycles(), clusters.num_clusters()) != expected
    {
        return Err(Error::Invariant {
            t,
            what: format!("{kind:?} at {e} inconsistent with observed counts"),
        });
    }
    Ok(StepEvent {
        t,
        edge: e,
        kind,
        split_min_size: match change {
            CycleChange::Split { smaller, .. } => Some(smaller),
            CycleChange::Merge { .. } => None,
        },
    })
}

/// Samples one uniform edge and applies it.
pub fn step<G: Topology, R: Rng + ?Sized>(
    cycles: &mut CycleState,
    clusters: &mut ClusterState,
    topo: &G,
    rng: &mut R,
    t: u64,
) -> Result<StepEvent> {
    let e = topo.sample_edge(rng);
    classify_and_apply(cycles, clusters, topo, t, e)
}

/// The live state of one replica.
#[derive(Clone, Debug)]
pub struct Replica<G: Topology = Hypercube> {
    topo: G,
    cycles: CycleState,
    clusters: ClusterState,
    t: u64,
    counts: EventCounts,
    /// `Σ_{i ≤ t}` crossing-edge counts seen before step `i`, i.e. `|E| Σ p_i`.
    hazard_sum: u128,
}

impl<G: Topology> Replica<G> {
    pub fn new(topo: G) -> Self {
        let cycles = CycleState::identity(topo.vertex_count());
        let clusters = ClusterState::singletons(&topo);
        Replica { topo, cycles, clusters, t: 0, counts: EventCounts::default(), hazard_sum: 0 }
    }

    pub fn topology(&self) -> &G {
        &self.topo
    }

    pub fn cycles(&self) -> &CycleState {
        &self.cycles
    }

    pub fn clusters(&self) -> &ClusterState {
        &self.clusters
    }

    pub fn time(&self) -> u64 {
        self.t
    }

    pub fn counts(&self) -> EventCounts {
        self.counts
    }

    pub fn apply_edge(&mut self, e: Edge) -> Result<StepEvent> {
        self.hazard_sum += u128::from(self.clusters.cross_edge_count());
        let event = classify_and_apply(&mut self.cycles, &mut self.clusters, &self.topo, self.t + 1, e)?;
        self.t += 1;
        self.counts.record(event.kind);
        Ok(event)
    }

    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<StepEvent> {
        let e = self.topo.sample_edge(rng);
        self.apply_edge(e)
    }

    /// `X_t = Σ_{i ≤ t} (1_{M̃_i} − p_i)`.
    pub fn martingale(&self) -> f64 {
        let edges = i128::from(self.topo.edge_count());
        let numerator = i128::from(self.counts.merges_cross_cluster) * edges - self.hazard_sum as i128;
        numerator as f64 / edges as f64
    }

    /// Every cycle must lie inside one percolation cluster.
    pub fn check_refinement(&self) -> std::result::Result<(), String> {
        for cycle in self.cycles.cycles() {
            let root = self.clusters.root_of(cycle[0]);
            if let Some(&v) = cycle.iter().find(|&&v| self.clusters.root_of(v) != root) {
                return Err(format!("cycle through {} leaves its cluster at vertex {v}", cycle[0]));
            }
        }
        Ok(())
    }

    pub fn snapshot(&self, thresholds: &[u64], with_martingale: bool) -> Snapshot {
        Snapshot {
            t: self.t,
            cycles: self.cycles.num_cycles(),
            clusters: self.clusters.num_clusters(),
            long_cycle_vertices: thresholds.iter().map(|&l| self.cycles.vertices_in_long_cycles(l)).collect(),
            largest_cycle: self.cycles.largest_cycle(),
            largest_cluster: self.clusters.largest_cluster(),
            merge_hazard: self.clusters.merge_hazard(),
            counts: self.counts,
            martingale: with_martingale.then(|| self.martingale()),
        }
    }
}

/// Cycle-length threshold `ℓ`, either absolute or as an exponent `a` with `ℓ = ⌊N^a⌋`
/// or as a multiple `κ` of the dimension with `ℓ = ⌊κn⌋`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Threshold {
    Absolute(u64),
    Exponent(f64),
    DimensionMultiple(f64),
}

impl Threshold {
    pub fn resolve(self, dimension: u32) -> u64 {
        match self {
            Threshold::Absolute(l) => l,
            Threshold::Exponent(a) => (f64::from(dimension) * a).exp2().floor() as u64,
            Threshold::DimensionMultiple(k) => (k * f64::from(dimension)).floor() as u64,
        }
    }

    fn validate(self) -> Result<()> {
        match self {
            Threshold::Absolute(_) => Ok(()),
            Threshold::Exponent(x) | Threshold::DimensionMultiple(x) if x.is_finite() && x >= 0.0 => Ok(()),
            other => Err(Error::Config(format!("threshold {other} must be finite and non-negative"))),
        }
    }
}

impl std::fmt::Display for Threshold {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Threshold::Absolute(l) => write!(f, "{l}"),
            Threshold::Exponent(a) => write!(f, "N^{a}"),
            Threshold::DimensionMultiple(k) => write!(f, "{k}n"),
        }
    }
}

impl std::str::FromStr for Threshold {
    type Err = Error;

    /// Accepts `64`, `N^0.1`, or `35n`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Config(format!("malformed threshold `{s}` (expected `64`, `N^0.1` or `35n`)"));
        let t = if let Some(a) = s.strip_prefix("N^") {
            Threshold::Exponent(a.parse().map_err(|_| bad())?)
        } else if let Some(k) = s.strip_suffix('n') {
            Threshold::DimensionMultiple(k.parse().map_err(|_| bad())?)
        } else {
            Threshold::Absolute(s.parse().map_err(|_| bad())?)
        };
        t.validate()?;
        Ok(t)
    }
}

/// Which times get a snapshot. `t = 0` and `t = t_max` are always included.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SnapshotSchedule {
    pub every: Option<u64>,
    pub times: BTreeSet<u64>,
    /// Inclusive ranges in which every step is recorded.
    pub dense: Vec<(u64, u64)>,
}

impl SnapshotSchedule {
    pub fn every(k: u64) -> Self {
        SnapshotSchedule { every: Some(k), ..Default::default() }
    }

    pub fn at(times: impl IntoIterator<Item = u64>) -> Self {
        SnapshotSchedule { times: times.into_iter().collect(), ..Default::default() }
    }

    pub fn with_dense(mut self, from: u64, to: u64) -> Self {
        self.dense.push((from, to));
        self
    }

    pub fn with_times(mut self, times: impl IntoIterator<Item = u64>) -> Self {
        self.times.extend(times);
        self
    }

    pub fn includes(&self, t: u64, t_max: u64) -> bool {
        t == 0
            || t == t_max
            || self.every.is_some_and(|k| k > 0 && t % k == 0)
            || self.times.contains(&t)
            || self.dense.iter().any(|&(a, b)| (a..=b).contains(&t))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub dimension: u32,
    pub t_max: u64,
    pub schedule: SnapshotSchedule,
    pub thresholds: Vec<Threshold>,
    pub seed: u64,
    pub replica: u32,
    /// Record `X_t` in every snapshot.
    pub track_martingale: bool,
    /// Times at which the full cycle-length histogram is emitted.
    pub histogram_times: BTreeSet<u64>,
}

impl RunConfig {
    pub fn new(dimension: u32, t_max: u64) -> Self {
        RunConfig {
            dimension,
            t_max,
            schedule: SnapshotSchedule::default(),
            thresholds: Vec::new(),
            seed: 0,
            replica: 0,
            track_martingale: false,
            histogram_times: BTreeSet::new(),
        }
    }

    pub fn validate(&self) -> Result<Hypercube> {
        let topo = Hypercube::new(self.dimension)?;
        if self.t_max > MAX_STEPS {
            return Err(Error::Config(format!("t_max = {} exceeds the counter limit {MAX_STEPS}", self.t_max)));
        }
        for t in &self.thresholds {
            t.validate()?;
        }
        if let Some(&(a, b)) = self.schedule.dense.iter().find(|(a, b)| a > b) {
            return Err(Error::Config(format!("empty dense snapshot range {a}..={b}")));
        }
        Ok(topo)
    }

    pub fn resolved_thresholds(&self) -> Vec<u64> {
        self.thresholds.iter().map(|t| t.resolve(self.dimension)).collect()
    }

    pub fn header(&self) -> RunHeader {
        RunHeader {
            format_version: crate::format::FORMAT_VERSION,
            dimension: self.dimension,
            vertices: 1u64 << self.dimension,
            t_max: self.t_max,
            seed: self.seed,
            replica: self.replica,
            rng: RNG_ALGORITHM.to_string(),
            thresholds: self.resolved_thresholds(),
            martingale: self.track_martingale,
        }
    }
}

/// Seed of replica `index`: the `(index + 1)`-th output of SplitMix64 started at
/// `base`. Adding replicas never changes the seeds of existing ones.
pub fn derive_replica_seed(base: u64, index: u32) -> u64 {
    const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
    let mut z = base.wrapping_add(GOLDEN_GAMMA.wrapping_mul(u64::from(index) + 1));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunHeader {
    pub format_version: u32,
    pub dimension: u32,
    pub vertices: u64,
    pub t_max: u64,
    pub seed: u64,
    pub replica: u32,
    pub rng: String,
    /// Resolved `ℓ` values, one column each.
    pub thresholds: Vec<u64>,
    pub martingale: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub t: u64,
    /// `N_t`
    pub cycles: u64,
    /// `Ñ_t`
    pub clusters: u64,
    /// `|V_t(ℓ)|` per tracked threshold, in header order.
    pub long_cycle_vertices: Vec<u64>,
    pub largest_cycle: u64,
    pub largest_cluster: u64,
    /// `p_{t+1}`: the hazard that the next edge merges two clusters.
    pub merge_hazard: f64,
    pub counts: EventCounts,
    pub martingale: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub t: u64,
    /// `(cycle length, multiplicity)`, longest first.
    pub lengths: Vec<(u32, u32)>,
}

impl Histogram {
    /// The `m` largest cycle lengths, descending.
    pub fn top(&self, m: usize) -> Vec<u64> {
        self.lengths
            .iter()
            .flat_map(|&(len, mult)| std::iter::repeat_n(u64::from(len), mult as usize))
            .take(m)
            .collect()
    }
}

/// Everything a run emits, in the same shape whether produced live or parsed back.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub header: RunHeader,
    pub snapshots: Vec<Snapshot>,
    pub histograms: Vec<Histogram>,
    /// Final totals; absent when a file was cut short.
    pub totals: Option<EventCounts>,
}

impl RunRecord {
    pub fn threshold_column(&self, ell: u64) -> Option<usize> {
        self.header.thresholds.iter().position(|&l| l == ell)
    }

    /// Snapshot at time `t`, by binary search (snapshots are time-ordered).
    pub fn at(&self, t: u64) -> Option<&Snapshot> {
        self.snapshots.binary_search_by_key(&t, |s| s.t).ok().map(|i| &self.snapshots[i])
    }

    pub fn histogram_at(&self, t: u64) -> Option<&Histogram> {
        self.histograms.iter().find(|h| h.t == t)
    }

    pub fn final_snapshot(&self) -> Option<&Snapshot> {
        self.snapshots.last()
    }
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub record: RunRecord,
    pub wall_time: Duration,
}

/// Hooks into a running replica.
pub trait Observer<G: Topology = Hypercube> {
    fn on_step(&mut self, _event: &StepEvent, _replica: &Replica<G>) -> Result<()> {
        Ok(())
    }

    fn on_snapshot(&mut self, _snapshot: &Snapshot, _replica: &Replica<G>) -> Result<()> {
        Ok(())
    }

    fn on_histogram(&mut self, _histogram: &Histogram) -> Result<()> {
        Ok(())
    }
}

impl<G: Topology> Observer<G> for () {}

fn drive<F>(config: &RunConfig, topo: Hypercube, t_max: u64, observer: &mut dyn Observer, mut next_edge: F) -> Result<RunOutcome>
where
    F: FnMut(u64) -> Edge,
{
    let started = Instant::now();
    let thresholds = config.resolved_thresholds();
    let mut header = config.header();
    header.t_max = t_max;
    let mut replica = Replica::new(topo);
    let mut snapshots = Vec::new();
    let mut histograms = Vec::new();

    let mut emit = |replica: &Replica, observer: &mut dyn Observer| -> Result<()> {
        let t = replica.time();
        if config.schedule.includes(t, t_max) {
            let snap = replica.snapshot(&thresholds, config.track_martingale);
            observer.on_snapshot(&snap, replica)?;
            snapshots.push(snap);
        }
        if config.histogram_times.contains(&t) {
            let h = Histogram { t, lengths: replica.cycles().histogram() };
            observer.on_histogram(&h)?;
            histograms.push(h);
        }
        Ok(())
    };

    emit(&replica, observer)?;
    for t in 1..=t_max {
        let event = replica.apply_edge(next_edge(t))?;
        observer.on_step(&event, &replica)?;
        emit(&replica, observer)?;
    }
    Ok(RunOutcome {
        record: RunRecord { header, snapshots, histograms, totals: Some(replica.counts()) },
        wall_time: started.elapsed(),
    })
}

pub fn run(config: &RunConfig) -> Result<RunOutcome> {
    run_observed(config, &mut ())
}

/// Runs `config` with uniform edges drawn from a ChaCha8 stream seeded by `config.seed`.
pub fn run_observed(config: &RunConfig, observer: &mut dyn Observer) -> Result<RunOutcome> {
    let topo = config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    drive(config, topo, config.t_max, observer, |_| topo.sample_edge(&mut rng))
}

/// Same as [`run`] but consumes `edges` instead of the random source; `t_max` becomes
/// `edges.len()`.
pub fn replay(config: &RunConfig, edges: &[Edge]) -> Result<RunOutcome> {
    replay_observed(config, edges, &mut ())
}

pub fn replay_observed(config: &RunConfig, edges: &[Edge], observer: &mut dyn Observer) -> Result<RunOutcome> {
    let topo = config.validate()?;
    if let Some((index, e)) = edges.iter().enumerate().find(|(_, e)| !topo.contains_edge(**e)) {
        return Err(Error::InvalidEdge { index, a: e.lo().into(), b: e.hi().into() });
    }
    drive(config, topo, edges.len() as u64, observer, |t| edges[(t - 1) as usize])
}

/// Runs `count` replicas of `base` with derived seeds, in parallel, returned in replica order.
pub fn run_replicas(base: &RunConfig, base_seed: u64, count: u32) -> Result<Vec<RunRecord>> {
    use rayon::prelude::*;
    (0..count)
        .into_par_iter()
        .map(|i| {
            let config = RunConfig { seed: derive_replica_seed(base_seed, i), replica: i, ..base.clone() };
            run(&config).map(|o| o.record)
        })
        .collect()
}
