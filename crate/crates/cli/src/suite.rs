//! The acceptance suite behind `verify-all`: fourteen criteria, each recorded with
//! its reports and a one-line verdict. A failing criterion never stops the run.

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use interchange_core::cycles::CycleState;
use interchange_core::engine::{run, run_observed, SnapshotSchedule};
use interchange_core::oracle::{
    enumerate_exact, enumerate_exact_many, for_each_sequence, naive_cycle_decomposition,
    uniform_permutation_reference, ExactDistribution, Observable,
};
use interchange_core::stats::{self, CheckReport, ShortSplitCounter, WindowSpec};
use interchange_core::{
    derive_replica_seed, replay, Edge, Error, Hypercube, Observer, Replica, RunConfig, RunRecord, Snapshot,
    StepEvent, Threshold, Topology,
};
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::analyze::exact_report;
use crate::batch::{run_batch, BatchOptions};
use crate::config::{parse_config, Scale};

/// Sizes for one run of the suite.
#[derive(Clone, Debug, Serialize)]
pub struct SuiteScale {
    pub name: &'static str,
    pub seed: u64,
    pub fuzz_cases: u32,
    /// Criteria 3, 4, 5, 10 and 11 share one batch.
    pub batch_dimension: u32,
    pub batch_replicas: u32,
    pub subcritical_dimension: u32,
    pub subcritical_replicas: u32,
    pub window_dimension: u32,
    pub window_replicas: u32,
    pub split_dimension: u32,
    pub split_k: u64,
    pub split_replicas: u32,
    pub spectrum_dimension: u32,
    pub spectrum_replicas: u32,
    pub reference_samples: usize,
    pub perf_dimension: u32,
    pub perf_limit: Duration,
}

impl SuiteScale {
    pub fn desk() -> Self {
        SuiteScale {
            name: "desk",
            seed: 20_160_122,
            fuzz_cases: 10_000,
            batch_dimension: 12,
            batch_replicas: 200,
            subcritical_dimension: 14,
            subcritical_replicas: 200,
            window_dimension: 12,
            window_replicas: 100,
            split_dimension: 14,
            split_k: 28,
            split_replicas: 50,
            spectrum_dimension: 12,
            spectrum_replicas: 400,
            reference_samples: 20_000,
            perf_dimension: 20,
            perf_limit: Duration::from_secs(60),
        }
    }

    /// Same checks at sizes that finish in seconds; verdicts are informational.
    pub fn smoke() -> Self {
        SuiteScale {
            name: "smoke",
            fuzz_cases: 1_000,
            batch_dimension: 8,
            batch_replicas: 20,
            subcritical_dimension: 10,
            subcritical_replicas: 40,
            window_dimension: 8,
            window_replicas: 20,
            split_dimension: 10,
            split_k: 20,
            split_replicas: 10,
            spectrum_dimension: 8,
            spectrum_replicas: 40,
            reference_samples: 2_000,
            perf_dimension: 14,
            ..SuiteScale::desk()
        }
    }

    pub fn for_scale(scale: Scale) -> Self {
        match scale {
            Scale::Desk => SuiteScale::desk(),
            Scale::Smoke => SuiteScale::smoke(),
        }
    }

    fn seed_for(&self, criterion: u32) -> u64 {
        derive_replica_seed(self.seed, criterion)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CriterionOutcome {
    pub id: u32,
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub reports: Vec<CheckReport>,
    /// Set when the failure is an internal invariant violation.
    pub invariant_violation: bool,
    #[serde(skip)]
    pub elapsed: Duration,
}

impl CriterionOutcome {
    /// `[PASS] 3 bookkeeping identity: ... (1.2s)`.
    pub fn line(&self) -> String {
        format!(
            "[{}] {:>2} {}: {} ({:.1?})",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail,
            self.elapsed
        )
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub format_version: u32,
    pub kind: String,
    pub scale: SuiteScale,
    pub criteria: Vec<CriterionOutcome>,
    pub all_passed: bool,
    pub invariant_violation: bool,
}

type Verdict = (bool, String, Vec<CheckReport>);
type Check = fn(&SuiteScale) -> Result<Verdict, Error>;

/// Criteria in order; the batch criteria share a memoized run.
const CRITERIA: &[(u32, &str, Check)] = &[
    (1, "exact oracle equivalence", exact_oracle_equivalence),
    (2, "cycle tracker fuzz", cycle_tracker_fuzz),
    (3, "bookkeeping identity", bookkeeping_identity),
    (4, "cycle-in-cluster refinement", refinement),
    (5, "hazard monotonicity and merge budget", hazard_and_budget),
    (6, "subcritical short cycles", subcritical),
    (7, "supercritical window density", supercritical),
    (8, "split rate to density", lambda_chain),
    (9, "short-split bound", short_split),
    (10, "merge-tail bound", merge_tail),
    (11, "martingale drift", martingale),
    (12, "largest-cycle fraction vs uniform", spectrum),
    (13, "determinism", determinism),
    (14, "performance floor", performance),
];

pub fn criterion_ids() -> Vec<u32> {
    CRITERIA.iter().map(|c| c.0).collect()
}

/// Runs one criterion, converting errors into a failed outcome.
pub fn run_criterion(id: u32, scale: &SuiteScale) -> CriterionOutcome {
    let &(id, name, check) = CRITERIA.iter().find(|c| c.0 == id).expect("known criterion id");
    let started = Instant::now();
    let result = check(scale);
    let elapsed = started.elapsed();
    match result {
        Ok((passed, detail, reports)) => {
            CriterionOutcome { id, name: name.into(), passed, detail, reports, invariant_violation: false, elapsed }
        }
        Err(e) => CriterionOutcome {
            id,
            name: name.into(),
            passed: false,
            invariant_violation: matches!(e, Error::Invariant { .. } | Error::Contract(_)),
            detail: format!("error: {e}"),
            reports: Vec::new(),
            elapsed,
        },
    }
}

/// Runs the listed criteria in order, calling `progress` after each.
pub fn run_suite(scale: &SuiteScale, ids: &[u32], mut progress: impl FnMut(&CriterionOutcome)) -> SuiteReport {
    let criteria: Vec<CriterionOutcome> = ids
        .iter()
        .map(|&id| {
            let outcome = run_criterion(id, scale);
            progress(&outcome);
            outcome
        })
        .collect();
    SuiteReport {
        format_version: interchange_core::format::FORMAT_VERSION,
        kind: "interchange-verify".into(),
        scale: scale.clone(),
        all_passed: criteria.iter().all(|c| c.passed),
        invariant_violation: criteria.iter().any(|c| c.invariant_violation),
        criteria,
    }
}

fn fraction(law: &ExactDistribution, value: i64) -> BigRational {
    law.probability(value)
}

fn exact_oracle_equivalence(_: &SuiteScale) -> Result<Verdict, Error> {
    let mut reports = Vec::new();
    let mut details = Vec::new();
    for t in 1..=3u64 {
        let law = enumerate_exact(2, t, Observable::Cycles)?;
        let mut engine_counts = BTreeMap::<i64, u64>::new();
        let mut naive_counts = BTreeMap::<i64, u64>::new();
        let config = RunConfig::new(2, t);
        let total = for_each_sequence(2, t, |seq| {
            let rec = replay(&config, seq)?.record;
            *engine_counts.entry(rec.final_snapshot().expect("final snapshot").cycles as i64).or_default() += 1;
            *naive_counts.entry(naive_cycle_decomposition(seq, 4).len() as i64).or_default() += 1;
            Ok(())
        })?;
        let matches = |counts: &BTreeMap<i64, u64>| {
            counts.len() == law.probabilities.len()
                && counts
                    .iter()
                    .all(|(&v, &c)| fraction(&law, v) == BigRational::new(c.into(), (total as u64).into()))
        };
        let mismatches = u64::from(!matches(&engine_counts)) + u64::from(!matches(&naive_counts));
        let mut report = exact_report(&format!("exact_law_cycles_t{t}"), mismatches, total as u64);
        report.inputs.insert("t".into(), t as f64);
        reports.push(report);
        details.push(format!("t={t}: E(N_t)={}", law.mean()));
    }
    let mean2 = enumerate_exact(2, 2, Observable::Cycles)?.mean();
    let expected = BigRational::new(5.into(), 2.into());
    reports.push(exact_report("mean_cycles_t2_is_5_over_2", u64::from(mean2 != expected), 1));

    let laws = enumerate_exact_many(
        2,
        4,
        &[Observable::Cycles, Observable::Clusters, Observable::SplitCount, Observable::SameClusterMergeCount],
    )?;
    let m: Vec<BigRational> = laws.iter().map(ExactDistribution::mean).collect();
    reports.push(exact_report("exact_mean_bookkeeping_identity", u64::from(&m[0] - &m[1] != &m[2] - &m[3]), 1));
    let mut previous = BigRational::from_integer(1.into());
    let mut increases = 0;
    for t in 1..=5 {
        let p = enumerate_exact(2, t, Observable::CrossMergeAtLastStep)?.probability(1);
        increases += u64::from(p > previous);
        previous = p;
    }
    reports.push(exact_report("exact_cross_merge_probability_non_increasing", increases, 5));
    let passed = reports.iter().all(CheckReport::passed);
    Ok((passed, format!("n=2 laws match engine and naive replays; {}", details.join(", ")), reports))
}

fn cycle_tracker_fuzz(scale: &SuiteScale) -> Result<Verdict, Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(scale.seed_for(2));
    let mut mismatches = 0u64;
    for _ in 0..scale.fuzz_cases {
        let n = rng.random_range(1..=3u32);
        let q = Hypercube::new(n)?;
        let len = rng.random_range(0..=6usize);
        let edges: Vec<Edge> = (0..len).map(|_| q.sample_edge(&mut rng)).collect();
        let mut cycles = CycleState::identity(q.vertex_count());
        for &e in &edges {
            cycles.apply_transposition(e);
        }
        let mut tracked: Vec<u64> = cycles.histogram().iter().flat_map(|&(l, m)| vec![u64::from(l); m as usize]).collect();
        tracked.sort_unstable_by(|a, b| b.cmp(a));
        if tracked != naive_cycle_decomposition(&edges, q.vertex_count()) {
            mismatches += 1;
        }
    }
    let report = exact_report("cycle_multiset_mismatches", mismatches, u64::from(scale.fuzz_cases));
    Ok((mismatches == 0, format!("{mismatches} mismatches in {} edge lists", scale.fuzz_cases), vec![report]))
}

/// Per-replica observations made during the shared batch.
#[derive(Clone, Debug, Default)]
struct Watch {
    refine_times: BTreeSet<u64>,
    refinement_checks: u64,
    refinement_violations: u64,
    last_cross: Option<u64>,
    hazard_checks: u64,
    hazard_violations: u64,
}

impl Observer for Watch {
    fn on_step(&mut self, _: &StepEvent, replica: &Replica) -> interchange_core::Result<()> {
        let cross = replica.clusters().cross_edge_count();
        if let Some(last) = self.last_cross {
            self.hazard_checks += 1;
            self.hazard_violations += u64::from(cross > last);
        }
        self.last_cross = Some(cross);
        Ok(())
    }

    fn on_snapshot(&mut self, s: &Snapshot, replica: &Replica) -> interchange_core::Result<()> {
        if self.last_cross.is_none() {
            self.last_cross = Some(replica.clusters().cross_edge_count());
        }
        if self.refine_times.contains(&s.t) {
            self.refinement_checks += 1;
            self.refinement_violations += u64::from(replica.check_refinement().is_err());
        }
        Ok(())
    }
}

struct SharedBatch {
    records: Vec<RunRecord>,
    watches: Vec<Watch>,
}

fn shared_batch(scale: &SuiteScale) -> Result<std::sync::Arc<SharedBatch>, Error> {
    use std::sync::{Arc, Mutex, OnceLock};
    static CACHE: OnceLock<Mutex<BTreeMap<String, Arc<SharedBatch>>>> = OnceLock::new();
    let key = format!("{}-{}-{}-{}", scale.name, scale.seed, scale.batch_dimension, scale.batch_replicas);
    let cache = CACHE.get_or_init(|| Mutex::new(BTreeMap::new()));
    if let Some(hit) = cache.lock().expect("cache lock").get(&key) {
        return Ok(hit.clone());
    }
    let vertices = 1u64 << scale.batch_dimension;
    let t_max = 4 * vertices;
    let refine_times: BTreeSet<u64> = (1..=10).map(|j| j * t_max / 10).collect();
    let mut base = RunConfig::new(scale.batch_dimension, t_max);
    base.schedule = SnapshotSchedule::every(vertices / 8)
        .with_times(refine_times.iter().copied())
        .with_times([vertices, 2 * vertices, t_max - 1]);
    base.track_martingale = true;
    let base_seed = scale.seed_for(3);
    let results: Vec<(RunRecord, Watch)> = (0..scale.batch_replicas)
        .into_par_iter()
        .map(|i| {
            let config = RunConfig { seed: derive_replica_seed(base_seed, i), replica: i, ..base.clone() };
            let mut watch = Watch { refine_times: refine_times.clone(), ..Watch::default() };
            let record = run_observed(&config, &mut watch)?.record;
            Ok((record, watch))
        })
        .collect::<Result<_, Error>>()?;
    let (records, watches) = results.into_iter().unzip();
    let batch = Arc::new(SharedBatch { records, watches });
    cache.lock().expect("cache lock").insert(key, batch.clone());
    Ok(batch)
}

fn batch_label(scale: &SuiteScale) -> String {
    format!("n={}, t_max=4N, {} replicas", scale.batch_dimension, scale.batch_replicas)
}

fn bookkeeping_identity(scale: &SuiteScale) -> Result<Verdict, Error> {
    let batch = shared_batch(scale)?;
    let mut violations = 0u64;
    let mut cases = 0u64;
    for s in batch.records.iter().flat_map(|r| &r.snapshots) {
        cases += 1;
        violations += u64::from(s.cycles as i64 - s.clusters as i64 != s.counts.split_excess());
    }
    let report = exact_report("bookkeeping_identity", violations, cases);
    Ok((violations == 0, format!("{violations} violations in {cases} snapshots ({})", batch_label(scale)), vec![report]))
}

fn refinement(scale: &SuiteScale) -> Result<Verdict, Error> {
    let batch = shared_batch(scale)?;
    let checks: u64 = batch.watches.iter().map(|w| w.refinement_checks).sum();
    let violations: u64 = batch.watches.iter().map(|w| w.refinement_violations).sum();
    let complete = batch.watches.iter().all(|w| w.refinement_checks == 10);
    let report = exact_report("cycle_in_cluster_refinement", violations, checks);
    Ok((
        violations == 0 && complete,
        format!("{violations} violations in {checks} checks at 10 times per replica ({})", batch_label(scale)),
        vec![report],
    ))
}

fn hazard_and_budget(scale: &SuiteScale) -> Result<Verdict, Error> {
    let batch = shared_batch(scale)?;
    let checks: u64 = batch.watches.iter().map(|w| w.hazard_checks).sum();
    let increases: u64 = batch.watches.iter().map(|w| w.hazard_violations).sum();
    let vertices = 1u64 << scale.batch_dimension;
    let mut over_budget = 0u64;
    let mut max_merges = 0u64;
    for r in &batch.records {
        let totals = r.totals.expect("finished run");
        max_merges = max_merges.max(totals.merges_cross_cluster);
        over_budget += u64::from(totals.merges_cross_cluster > vertices - 1);
    }
    let reports = vec![
        exact_report("hazard_non_increasing_per_step", increases, checks),
        exact_report("cross_merges_at_most_n_minus_1", over_budget, batch.records.len() as u64),
    ];
    Ok((
        increases == 0 && over_budget == 0,
        format!("{increases} hazard increases in {checks} steps; max #M~ = {max_merges} <= N-1 = {}", vertices - 1),
        reports,
    ))
}

fn subcritical(scale: &SuiteScale) -> Result<Verdict, Error> {
    let n = scale.subcritical_dimension;
    let t = (0.4 * (1u64 << n) as f64).floor() as u64;
    let mut base = RunConfig::new(n, t);
    base.thresholds = vec![Threshold::DimensionMultiple(35.0)];
    let records = interchange_core::run_replicas(&base, scale.seed_for(6), scale.subcritical_replicas)?;
    let report = stats::subcritical_no_long_cycle_probability(&records, t, 35.0, 0.9)?;
    let detail = format!(
        "n={n}, t={t}, l={}: P(no cycle > l) = {:.4} (floor 0.9, {} replicas)",
        report.inputs["threshold"], report.estimate, report.replicas
    );
    Ok((report.passed(), detail, vec![report]))
}

fn window_records(scale: &SuiteScale) -> Result<(Vec<RunRecord>, WindowSpec), Error> {
    use std::sync::{Mutex, OnceLock};
    static CACHE: OnceLock<Mutex<BTreeMap<String, Vec<RunRecord>>>> = OnceLock::new();
    let n = scale.window_dimension;
    let vertices = 1u64 << n;
    let w = WindowSpec::new(2 * vertices, 0.5, 0.1)?;
    let key = format!("{}-{}-{n}-{}", scale.name, scale.seed, scale.window_replicas);
    let cache = CACHE.get_or_init(|| Mutex::new(BTreeMap::new()));
    if let Some(hit) = cache.lock().expect("cache lock").get(&key) {
        return Ok((hit.clone(), w));
    }
    let mut base = RunConfig::new(n, w.end());
    base.schedule = SnapshotSchedule::default().with_dense(w.start, w.end());
    base.thresholds = vec![Threshold::Exponent(0.1)];
    let records = interchange_core::run_replicas(&base, scale.seed_for(7), scale.window_replicas)?;
    cache.lock().expect("cache lock").insert(key, records.clone());
    Ok((records, w))
}

fn supercritical(scale: &SuiteScale) -> Result<Verdict, Error> {
    let (records, w) = window_records(scale)?;
    let report = stats::supercritical_density_check(&records, &w)?;
    let detail = format!(
        "window [{}, {}], l={}: density {:.4} +- {:.4} vs eta(2) - a = {:.2}",
        w.start + 1,
        w.end(),
        w.threshold(scale.window_dimension),
        report.estimate,
        report.stderr,
        report.bound
    );
    Ok((report.passed(), detail, vec![report]))
}

fn lambda_chain(scale: &SuiteScale) -> Result<Verdict, Error> {
    let (records, w) = window_records(scale)?;
    let report = stats::lambda_to_density_check(&records, &w)?;
    let detail = format!(
        "lambda_hat {:.4}: density {:.4} vs floor {:.4} - 3se {:.4} ({:?})",
        report.inputs["lambda_hat"], report.estimate, report.bound, report.slack, report.verdict
    );
    Ok((report.passed(), detail, vec![report]))
}

fn short_split(scale: &SuiteScale) -> Result<Verdict, Error> {
    let n = scale.split_dimension;
    let t_max = 2 * (1u64 << n);
    let base = RunConfig::new(n, t_max);
    let base_seed = scale.seed_for(9);
    let tallies = (0..scale.split_replicas)
        .into_par_iter()
        .map(|i| {
            let config = RunConfig { seed: derive_replica_seed(base_seed, i), replica: i, ..base.clone() };
            let mut counter = ShortSplitCounter::new(scale.split_k, 1..=t_max);
            run_observed(&config, &mut counter)?;
            Ok(counter.tally)
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let report = stats::short_split_bound_check(&tallies, n, scale.split_k)?;
    let detail = format!(
        "n={n}, k={}, steps 1..=2N: P(short split) = {:.4} +- {:.4} vs bound {:.4}",
        scale.split_k, report.estimate, report.stderr, report.bound
    );
    Ok((report.passed(), detail, vec![report]))
}

fn merge_tail(scale: &SuiteScale) -> Result<Verdict, Error> {
    let batch = shared_batch(scale)?;
    let t = 4u64 << scale.batch_dimension;
    let report = stats::merge_tail_bound_check(&batch.records, t, 0.5)?;
    let detail = format!(
        "t=4N: P(M~_t) = {:.4} +- {:.4} (mean p_t {:.2e}) vs bound {:.4}",
        report.estimate, report.stderr, report.inputs["mean_hazard"], report.bound
    );
    Ok((report.passed(), detail, vec![report]))
}

fn martingale(scale: &SuiteScale) -> Result<Verdict, Error> {
    let batch = shared_batch(scale)?;
    let vertices = 1u64 << scale.batch_dimension;
    let reports: Vec<CheckReport> = [vertices, 2 * vertices]
        .iter()
        .map(|&t| stats::martingale_drift_check(&batch.records, t))
        .collect::<Result<_, _>>()?;
    let detail = reports
        .iter()
        .zip(["N", "2N"])
        .map(|(r, t)| format!("X_{t} = {:.3} +- {:.3}", r.estimate, r.stderr))
        .collect::<Vec<_>>()
        .join(", ");
    Ok((reports.iter().all(CheckReport::passed), detail, reports))
}

fn spectrum(scale: &SuiteScale) -> Result<Verdict, Error> {
    let n = scale.spectrum_dimension;
    let vertices = 1u64 << n;
    let t = 10 * vertices * u64::from(n);
    let mut base = RunConfig::new(n, t);
    base.histogram_times = BTreeSet::from([t]);
    let records = interchange_core::run_replicas(&base, scale.seed_for(12), scale.spectrum_replicas)?;
    let observed = stats::top_cycle_spectrum(&records, t, 3)?;
    let mut rng = ChaCha8Rng::seed_from_u64(scale.seed_for(1200));
    let reference = uniform_permutation_reference(vertices as usize, 3, scale.reference_samples, &mut rng);
    let report = stats::spectrum_agreement(&observed, &reference, 0.02);
    let detail = format!(
        "t=10N log2 N: mean L1/N = {:.4} +- {:.4} vs uniform {:.4} +- {:.4} (tolerance 0.02); L2/N {:.4} vs {:.4}",
        observed.means[0],
        observed.stderrs[0],
        reference.means[0],
        reference.stderrs[0],
        observed.means[1],
        reference.means[1]
    );
    Ok((report.passed(), detail, vec![report]))
}

fn determinism(scale: &SuiteScale) -> Result<Verdict, Error> {
    let root = std::env::temp_dir().join(format!("interchange-determinism-{}-{}", std::process::id(), scale.name));
    let cases = [
        "mode = simulate\nn = 2\nt_max = 3\nseed = 1\n",
        "mode = simulate\nn = 10\nc = 2\nreplicas = 4\nseed = 7\nthresholds = N^0.1, 64\nmartingale = true\n\
         snapshot_every = 128\nhistogram_times = 2N\n",
    ];
    let mut mismatches = 0u64;
    let mut files = 0u64;
    let result = (|| -> Result<(), Error> {
        for (i, text) in cases.iter().enumerate() {
            let mut digests = Vec::new();
            for run_index in 0..2 {
                let dir: PathBuf = root.join(format!("case{i}-run{run_index}"));
                let full = format!("{text}output = {}\n", dir.display());
                let cfg = parse_config(&full, "determinism", &[]).map_err(|e| Error::Config(e.to_string()))?;
                let manifest = run_batch(&cfg, BatchOptions { force: true, ..Default::default() })
                    .map_err(|e| Error::Config(e.to_string()))?;
                digests.push(manifest.files.iter().map(|f| f.sha256.clone()).collect::<Vec<_>>());
            }
            files += digests[0].len() as u64;
            mismatches += digests[0].iter().zip(&digests[1]).filter(|(a, b)| a != b).count() as u64;
        }
        Ok(())
    })();
    let _ = std::fs::remove_dir_all(&root);
    result?;
    let report = exact_report("digest_mismatches", mismatches, files);
    Ok((mismatches == 0, format!("{mismatches} digest mismatches over {files} files, two invocations each"), vec![report]))
}

fn performance(scale: &SuiteScale) -> Result<Verdict, Error> {
    let n = scale.perf_dimension;
    let t_max = 2u64 << n;
    let mut config = RunConfig::new(n, t_max);
    config.thresholds = vec![Threshold::Exponent(0.1)];
    config.seed = scale.seed_for(14);
    let started = Instant::now();
    let outcome = run(&config)?;
    let elapsed = started.elapsed();
    let last = outcome.record.final_snapshot().expect("final snapshot");
    let mut report = exact_report("single_replica_wall_time", u64::from(elapsed >= scale.perf_limit), 1);
    report.inputs.insert("seconds".into(), elapsed.as_secs_f64());
    report.inputs.insert("limit_seconds".into(), scale.perf_limit.as_secs_f64());
    let detail = format!(
        "n={n}, t_max=2N={t_max}: {:.2}s (limit {}s), N_t={}, largest cycle {}",
        elapsed.as_secs_f64(),
        scale.perf_limit.as_secs(),
        last.cycles,
        last.largest_cycle
    );
    Ok((elapsed < scale.perf_limit, detail, vec![report]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_criteria_pass_at_smoke_scale() {
        let scale = SuiteScale::smoke();
        for id in [1, 2] {
            let o = run_criterion(id, &scale);
            assert!(o.passed, "{}", o.line());
        }
    }

    #[test]
    fn every_criterion_is_listed() {
        assert_eq!(criterion_ids(), (1..=14).collect::<Vec<_>>());
    }
}
