//! Estimators and bound checks over replica outputs.
//!
//! Every check is one-sided. Statistical checks allow `3·stderr` of slack; the
//! report always carries the estimate, its standard error, the bound and the
//! verdict so nothing is clipped silently. Reductions sort per-replica values
//! (or sum exact integers) so results do not depend on replica order.

use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::engine::{Observer, Replica, RunRecord, Snapshot, StepEvent};
use crate::error::{Error, Result};
use crate::graph::Topology;

/// Slack multiplier applied to standard errors in one-sided checks.
pub const SLACK_SIGMAS: f64 = 3.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateWithError {
    pub estimate: f64,
    pub stderr: f64,
    pub replicas: usize,
}

impl EstimateWithError {
    /// Mean and standard error of the mean over per-replica values.
    pub fn from_samples(samples: &[f64]) -> Self {
        assert!(!samples.is_empty(), "an estimate needs at least one replica");
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        let r = sorted.len() as f64;
        let mean = sorted.iter().sum::<f64>() / r;
        let stderr = if sorted.len() > 1 {
            let var = sorted.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (r - 1.0);
            (var / r).sqrt()
        } else {
            0.0
        };
        EstimateWithError { estimate: mean, stderr, replicas: sorted.len() }
    }

    /// Fraction `successes / trials` with the binomial standard error.
    pub fn binomial(successes: usize, trials: usize) -> Self {
        assert!(trials > 0);
        let p = successes as f64 / trials as f64;
        EstimateWithError { estimate: p, stderr: (p * (1.0 - p) / trials as f64).sqrt(), replicas: trials }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Skipped,
}

impl Verdict {
    fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

/// Outcome of one check, with everything needed to recompute the verdict.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: String,
    pub estimate: f64,
    pub stderr: f64,
    pub replicas: usize,
    pub bound: f64,
    /// Allowance added to the bound before comparing.
    pub slack: f64,
    /// The comparison performed, e.g. `estimate <= bound + slack`.
    pub rule: String,
    pub verdict: Verdict,
    pub inputs: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.verdict != Verdict::Fail
    }

    fn upper(check: &str, est: EstimateWithError, bound: f64, slack: f64) -> Self {
        CheckReport {
            check: check.into(),
            estimate: est.estimate,
            stderr: est.stderr,
            replicas: est.replicas,
            bound,
            slack,
            rule: "estimate <= bound + slack".into(),
            verdict: Verdict::from_bool(est.estimate <= bound + slack),
            inputs: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    fn lower(check: &str, est: EstimateWithError, bound: f64, slack: f64) -> Self {
        CheckReport {
            rule: "estimate >= bound - slack".into(),
            verdict: Verdict::from_bool(est.estimate >= bound - slack),
            ..CheckReport::upper(check, est, bound, slack)
        }
    }

    fn input(mut self, key: &str, value: f64) -> Self {
        self.inputs.insert(key.into(), value);
        self
    }

    fn note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }
}

/// Lower-bound density `η(c) = ½(1 − 1/c)` for `c > 1`.
pub fn eta(c: f64) -> Result<f64> {
    if c > 1.0 && c.is_finite() {
        Ok(0.5 * (1.0 - 1.0 / c))
    } else {
        Err(Error::Unsupported(format!(
            "eta({c}): for c <= 1 the density floor depends on the percolation constants c' and c0, which have no explicit value"
        )))
    }
}

/// `2 log₂(2k) / n`, the bound on the per-step probability of a short split.
pub fn short_split_bound(dimension: u32, k: u64) -> f64 {
    2.0 * (2.0 * k as f64).log2() / f64::from(dimension)
}

/// `t · 3 log₂(4n) / n`, the bound on `E(N_t − Ñ_t)`.
pub fn cycles_minus_clusters_bound(dimension: u32, t: u64) -> f64 {
    let n = f64::from(dimension);
    t as f64 * 3.0 * (4.0 * n).log2() / n
}

/// `N/t + t^{−(1−δ)/2} + exp(−t^δ/2)`, the bound on the cross-cluster merge probability at step `t`.
pub fn merge_tail_bound(vertices: u64, t: u64, delta: f64) -> f64 {
    let t = t as f64;
    vertices as f64 / t + t.powf(-(1.0 - delta) / 2.0) + (-t.powf(delta) / 2.0).exp()
}

/// `(λ − a)/(1 − a)`, the density floor implied by a split rate `λ`.
pub fn averaging_floor(lambda: f64, a: f64) -> f64 {
    (lambda - a) / (1.0 - a)
}

/// Smallest `κ` for which the subcritical statement applies at `t = cN`.
pub fn subcritical_kappa_floor(c: f64) -> f64 {
    2.0 * std::f64::consts::LN_2 / (1.0 - 2.0 * c).powi(2)
}

/// Averaging window `t ∈ [T+1, ⌊(1+Δ)T⌋]` with cycle threshold `ℓ = ⌊N^a⌋`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub start: u64,
    pub delta: f64,
    pub exponent: f64,
}

impl WindowSpec {
    pub fn new(start: u64, delta: f64, exponent: f64) -> Result<Self> {
        let w = WindowSpec { start, delta, exponent };
        if start < 1 || !(delta > 0.0) || !(exponent > 0.0 && exponent < 1.0) {
            return Err(Error::Config(format!(
                "window needs T >= 1, delta > 0 and 0 < a < 1 (got T={start}, delta={delta}, a={exponent})"
            )));
        }
        if w.end() < start + 1 {
            return Err(Error::Config(format!("window [{}, {}] is empty", start + 1, w.end())));
        }
        Ok(w)
    }

    /// `⌊(1+Δ)T⌋`.
    pub fn end(&self) -> u64 {
        ((1.0 + self.delta) * self.start as f64).floor() as u64
    }

    pub fn times(&self) -> RangeInclusive<u64> {
        self.start + 1..=self.end()
    }

    pub fn len(&self) -> u64 {
        self.end() - self.start
    }

    pub fn threshold(&self, dimension: u32) -> u64 {
        crate::engine::Threshold::Exponent(self.exponent).resolve(dimension)
    }
}

fn column(record: &RunRecord, ell: u64) -> Result<usize> {
    record.threshold_column(ell).ok_or(Error::MissingThreshold(ell))
}

fn require_nonempty(records: &[RunRecord]) -> Result<()> {
    if records.is_empty() {
        Err(Error::IncompleteData { what: "no replicas supplied".into(), missing: Vec::new() })
    } else {
        Ok(())
    }
}

/// Snapshots of `record` at every time in `times`, or the list of gaps.
fn series<'a>(record: &'a RunRecord, times: RangeInclusive<u64>) -> Result<Vec<&'a Snapshot>> {
    let mut found = Vec::new();
    let mut missing = Vec::new();
    for t in times {
        match record.at(t) {
            Some(s) => found.push(s),
            None => missing.push(t),
        }
    }
    if missing.is_empty() {
        Ok(found)
    } else {
        Err(Error::IncompleteData {
            what: format!("replica {} lacks snapshots inside the window", record.header.replica),
            missing,
        })
    }
}

fn snapshot_at(record: &RunRecord, t: u64) -> Result<&Snapshot> {
    record.at(t).ok_or_else(|| Error::IncompleteData {
        what: format!("replica {} has no snapshot", record.header.replica),
        missing: vec![t],
    })
}

/// Mean over replicas of `(1/L) Σ_{t in window} |V_t(⌊N^a⌋)|/N`.
pub fn window_average_long_cycle_density(records: &[RunRecord], w: &WindowSpec) -> Result<EstimateWithError> {
    require_nonempty(records)?;
    let mut per_replica = Vec::with_capacity(records.len());
    for rec in records {
        let col = column(rec, w.threshold(rec.header.dimension))?;
        let snaps = series(rec, w.times())?;
        let mass: u128 = snaps.iter().map(|s| u128::from(s.long_cycle_vertices[col])).sum();
        per_replica.push((mass, rec.header.vertices));
    }
    Ok(mean_of_ratios(&per_replica, w.len()))
}

/// Replica mean of `mass / (len · N)`, summed exactly so replica order does not matter.
fn mean_of_ratios(per_replica: &[(u128, u64)], len: u64) -> EstimateWithError {
    let samples: Vec<f64> =
        per_replica.iter().map(|&(m, n)| m as f64 / (len as f64 * n as f64)).collect();
    let mut est = EstimateWithError::from_samples(&samples);
    if per_replica.iter().all(|&(_, n)| n == per_replica[0].1) {
        let total: u128 = per_replica.iter().map(|&(m, _)| m).sum();
        est.estimate = total as f64 / (len as f64 * per_replica[0].1 as f64 * per_replica.len() as f64);
    }
    est
}

/// Fraction of replicas with no cycle longer than `⌊κn⌋` at time `t`, checked against
/// a desk-scale `floor`.
pub fn subcritical_no_long_cycle_probability(
    records: &[RunRecord],
    t: u64,
    kappa: f64,
    floor: f64,
) -> Result<CheckReport> {
    require_nonempty(records)?;
    let dimension = records[0].header.dimension;
    let vertices = records[0].header.vertices;
    let ell = crate::engine::Threshold::DimensionMultiple(kappa).resolve(dimension);
    let mut clear = 0;
    for rec in records {
        let col = column(rec, ell)?;
        if snapshot_at(rec, t)?.long_cycle_vertices[col] == 0 {
            clear += 1;
        }
    }
    let est = EstimateWithError::binomial(clear, records.len());
    let c = t as f64 / vertices as f64;
    let kappa_floor = subcritical_kappa_floor(c);
    let mut report = CheckReport::lower("subcritical_no_long_cycles", est, floor, 0.0)
        .input("t", t as f64)
        .input("c", c)
        .input("kappa", kappa)
        .input("threshold", ell as f64)
        .input("kappa_validity_floor", kappa_floor);
    if c >= 0.5 {
        report = report.note(format!("c = {c} is not subcritical (needs c < 1/2)"));
    } else if kappa < kappa_floor {
        report = report.note(format!("kappa = {kappa} is below the validity floor 2ln2/(1-2c)^2 = {kappa_floor:.6}"));
    }
    Ok(report)
}

/// Per-replica tally of short splits over a time range.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShortSplitTally {
    pub short_splits: u64,
    pub splits: u64,
    pub steps: u64,
}

/// Observer that counts splits whose smaller piece has at most `k` vertices.
#[derive(Clone, Debug)]
pub struct ShortSplitCounter {
    pub k: u64,
    pub range: RangeInclusive<u64>,
    pub tally: ShortSplitTally,
}

impl ShortSplitCounter {
    pub fn new(k: u64, range: RangeInclusive<u64>) -> Self {
        ShortSplitCounter { k, range, tally: ShortSplitTally::default() }
    }

    pub fn observe(&mut self, event: &StepEvent) {
        if !self.range.contains(&event.t) {
            return;
        }
        self.tally.steps += 1;
        if let Some(min) = event.split_min_size {
            self.tally.splits += 1;
            if u64::from(min) <= self.k {
                self.tally.short_splits += 1;
            }
        }
    }
}

impl<G: Topology> Observer<G> for ShortSplitCounter {
    fn on_step(&mut self, event: &StepEvent, _: &Replica<G>) -> Result<()> {
        self.observe(event);
        Ok(())
    }
}

pub fn tally_short_splits(events: &[StepEvent], k: u64, range: RangeInclusive<u64>) -> ShortSplitTally {
    let mut counter = ShortSplitCounter::new(k, range);
    events.iter().for_each(|e| counter.observe(e));
    counter.tally
}

/// Empirical per-step probability of a split producing a cycle of length `≤ k`,
/// against `2 log₂(2k)/n`.
pub fn short_split_bound_check(tallies: &[ShortSplitTally], dimension: u32, k: u64) -> Result<CheckReport> {
    if tallies.is_empty() || tallies.iter().any(|t| t.steps == 0) {
        return Err(Error::IncompleteData { what: "a replica observed no steps in range".into(), missing: Vec::new() });
    }
    let samples: Vec<f64> = tallies.iter().map(|t| t.short_splits as f64 / t.steps as f64).collect();
    let est = EstimateWithError::from_samples(&samples);
    let bound = short_split_bound(dimension, k);
    let splits: u64 = tallies.iter().map(|t| t.splits).sum();
    let steps: u64 = tallies.iter().map(|t| t.steps).sum();
    let mut report = CheckReport::upper("short_split_bound", est, bound, SLACK_SIGMAS * est.stderr)
        .input("n", f64::from(dimension))
        .input("k", k as f64)
        .input("split_frequency", splits as f64 / steps as f64);
    if bound >= 1.0 {
        report = report.note(format!("bound {bound:.6} >= 1, the check is vacuous"));
    }
    Ok(report)
}

/// Replica mean of `N_t − Ñ_t` against `t · 3 log₂(4n)/n`.
pub fn cycles_minus_clusters_bound_check(records: &[RunRecord], t: u64) -> Result<CheckReport> {
    require_nonempty(records)?;
    let mut samples = Vec::with_capacity(records.len());
    for rec in records {
        let s = snapshot_at(rec, t)?;
        samples.push(s.cycles as f64 - s.clusters as f64);
    }
    let est = EstimateWithError::from_samples(&samples);
    let dimension = records[0].header.dimension;
    Ok(CheckReport::upper("cycles_minus_clusters_bound", est, cycles_minus_clusters_bound(dimension, t), 0.0)
        .input("t", t as f64)
        .input("n", f64::from(dimension)))
}

/// Fraction of replicas whose step `t` merged two clusters, against
/// `N/t + t^{−(1−δ)/2} + exp(−t^δ/2)`.
pub fn merge_tail_bound_check(records: &[RunRecord], t: u64, delta: f64) -> Result<CheckReport> {
    require_nonempty(records)?;
    if t == 0 || !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Config(format!("merge tail check needs t >= 1 and 0 < delta < 1 (t={t}, delta={delta})")));
    }
    let mut merged = 0;
    let mut hazards = Vec::with_capacity(records.len());
    for rec in records {
        let (before, after) = (snapshot_at(rec, t - 1)?, snapshot_at(rec, t)?);
        if after.counts.merges_cross_cluster > before.counts.merges_cross_cluster {
            merged += 1;
        }
        hazards.push(before.merge_hazard);
    }
    let est = EstimateWithError::binomial(merged, records.len());
    let vertices = records[0].header.vertices;
    let mean_hazard = EstimateWithError::from_samples(&hazards);
    Ok(CheckReport::upper("merge_tail_bound", est, merge_tail_bound(vertices, t, delta), SLACK_SIGMAS * est.stderr)
        .input("t", t as f64)
        .input("delta", delta)
        .input("mean_hazard", mean_hazard.estimate)
        .input("mean_hazard_stderr", mean_hazard.stderr))
}

/// Measures the windowed split rate `λ̂` and checks the windowed long-cycle density
/// against `(λ̂ − a)/(1 − a)`. The slack is `3·stderr` of the per-replica difference
/// between density and floor, which accounts for their correlation.
pub fn lambda_to_density_check(records: &[RunRecord], w: &WindowSpec) -> Result<CheckReport> {
    require_nonempty(records)?;
    let a = w.exponent;
    let len = w.len() as f64;
    let mut lambdas = Vec::with_capacity(records.len());
    let mut densities = Vec::with_capacity(records.len());
    let mut gaps = Vec::with_capacity(records.len());
    let mut masses = Vec::with_capacity(records.len());
    for rec in records {
        let col = column(rec, w.threshold(rec.header.dimension))?;
        let before = snapshot_at(rec, w.start)?;
        let snaps = series(rec, w.times())?;
        let last = snaps.last().expect("window is non-empty");
        let lambda = (last.counts.splits - before.counts.splits) as f64 / len;
        let mass: u128 = snaps.iter().map(|s| u128::from(s.long_cycle_vertices[col])).sum();
        let density = mass as f64 / (len * rec.header.vertices as f64);
        lambdas.push(lambda);
        densities.push(density);
        masses.push((mass, rec.header.vertices));
        gaps.push(density - averaging_floor(lambda, a));
    }
    let lambda = EstimateWithError::from_samples(&lambdas);
    let density = mean_of_ratios(&masses, w.len());
    let gap = EstimateWithError::from_samples(&gaps);
    let floor = averaging_floor(lambda.estimate, a);
    let report = CheckReport::lower("lambda_to_density", density, floor, SLACK_SIGMAS * gap.stderr)
        .input("a", a)
        .input("lambda_hat", lambda.estimate)
        .input("lambda_stderr", lambda.stderr)
        .input("difference_stderr", gap.stderr)
        .input("window_start", w.start as f64)
        .input("window_end", w.end() as f64);
    if lambda.estimate <= a {
        return Ok(CheckReport { verdict: Verdict::Skipped, ..report }
            .note(format!("lambda_hat = {} <= a = {a}: no density floor follows", lambda.estimate)));
    }
    Ok(report)
}

/// Replica mean of the compensated merge count `X_t`, checked against zero in both
/// directions.
pub fn martingale_drift_check(records: &[RunRecord], t: u64) -> Result<CheckReport> {
    require_nonempty(records)?;
    let mut samples = Vec::with_capacity(records.len());
    for rec in records {
        let x = snapshot_at(rec, t)?.martingale.ok_or_else(|| {
            Error::Config(format!("replica {} was run without martingale tracking", rec.header.replica))
        })?;
        samples.push(x);
    }
    let est = EstimateWithError::from_samples(&samples);
    let slack = SLACK_SIGMAS * est.stderr;
    Ok(CheckReport {
        rule: "|estimate - bound| <= slack".into(),
        verdict: Verdict::from_bool(est.estimate.abs() <= slack),
        ..CheckReport::upper("martingale_drift", est, 0.0, slack)
    }
    .input("t", t as f64))
}

/// Window-averaged density against `η(c) − a`, where `c = T/N`.
pub fn supercritical_density_check(records: &[RunRecord], w: &WindowSpec) -> Result<CheckReport> {
    require_nonempty(records)?;
    let est = window_average_long_cycle_density(records, w)?;
    let c = w.start as f64 / records[0].header.vertices as f64;
    let bound = eta(c)? - w.exponent;
    Ok(CheckReport::lower("supercritical_window_density", est, bound, SLACK_SIGMAS * est.stderr)
        .input("c", c)
        .input("eta", eta(c)?)
        .input("a", w.exponent)
        .input("delta", w.delta)
        .input("threshold", w.threshold(records[0].header.dimension) as f64))
}

/// Mean normalized top-`m` cycle lengths `(L_1/N, …, L_m/N)`, with per-rank standard errors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumEstimate {
    pub means: Vec<f64>,
    pub stderrs: Vec<f64>,
    pub samples: usize,
}

impl SpectrumEstimate {
    /// `tops[i]` holds the top lengths of sample `i`; missing ranks count as zero.
    pub fn from_tops(tops: &[Vec<u64>], vertices: u64, m: usize) -> Self {
        assert!(!tops.is_empty());
        let mut means = Vec::with_capacity(m);
        let mut stderrs = Vec::with_capacity(m);
        for rank in 0..m {
            let fractions: Vec<f64> =
                tops.iter().map(|t| t.get(rank).copied().unwrap_or(0) as f64 / vertices as f64).collect();
            let e = EstimateWithError::from_samples(&fractions);
            means.push(e.estimate);
            stderrs.push(e.stderr);
        }
        SpectrumEstimate { means, stderrs, samples: tops.len() }
    }
}

/// Top-`m` spectrum from the histograms recorded at time `t`.
pub fn top_cycle_spectrum(records: &[RunRecord], t: u64, m: usize) -> Result<SpectrumEstimate> {
    require_nonempty(records)?;
    let mut tops = Vec::with_capacity(records.len());
    for rec in records {
        let h = rec.histogram_at(t).ok_or_else(|| Error::IncompleteData {
            what: format!("replica {} has no cycle histogram", rec.header.replica),
            missing: vec![t],
        })?;
        tops.push(h.top(m));
    }
    Ok(SpectrumEstimate::from_tops(&tops, records[0].header.vertices, m))
}

/// Compares the mean largest-cycle fraction with a reference spectrum.
pub fn spectrum_agreement(observed: &SpectrumEstimate, reference: &SpectrumEstimate, tolerance: f64) -> CheckReport {
    let diff = (observed.means[0] - reference.means[0]).abs();
    let est = EstimateWithError {
        estimate: diff,
        stderr: observed.stderrs[0].hypot(reference.stderrs[0]),
        replicas: observed.samples,
    };
    CheckReport::upper("largest_cycle_fraction_vs_uniform", est, tolerance, 0.0)
        .input("observed_mean", observed.means[0])
        .input("observed_stderr", observed.stderrs[0])
        .input("reference_mean", reference.means[0])
        .input("reference_stderr", reference.stderrs[0])
        .input("reference_samples", reference.samples as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{EventCounts, EventKind, Histogram, RunHeader};
    use crate::graph::Edge;
    use proptest::prelude::*;

    fn header(dimension: u32, thresholds: Vec<u64>) -> RunHeader {
        RunHeader {
            format_version: 1,
            dimension,
            vertices: 1 << dimension,
            t_max: 0,
            seed: 0,
            replica: 0,
            rng: String::new(),
            thresholds,
            martingale: false,
        }
    }

    fn snap(t: u64, v: Vec<u64>, counts: EventCounts) -> Snapshot {
        Snapshot {
            t,
            cycles: 0,
            clusters: 0,
            long_cycle_vertices: v,
            largest_cycle: 0,
            largest_cluster: 0,
            merge_hazard: 0.0,
            counts,
            martingale: None,
        }
    }

    /// A record over `t = 0..values.len()` with one threshold column per entry of `thresholds`.
    fn synthetic(dimension: u32, thresholds: Vec<u64>, values: &[Vec<u64>]) -> RunRecord {
        RunRecord {
            header: header(dimension, thresholds),
            snapshots: values
                .iter()
                .enumerate()
                .map(|(t, v)| snap(t as u64, v.clone(), EventCounts::default()))
                .collect(),
            histograms: Vec::new(),
            totals: None,
        }
    }

    #[test]
    fn eta_values() {
        assert_eq!(eta(2.0).unwrap(), 0.25);
        assert_eq!(eta(4.0).unwrap(), 0.375);
        assert!(eta(1.0 + 1e-12).unwrap() < 1e-11);
        assert!(matches!(eta(1.0), Err(Error::Unsupported(_))));
        assert!(eta(0.75).unwrap_err().to_string().contains("c'"));
    }

    proptest! {
        #[test]
        fn eta_is_increasing_and_bounded(c1 in 1.0001f64..1e6, c2 in 1.0001f64..1e6) {
            let (lo, hi) = if c1 < c2 { (c1, c2) } else { (c2, c1) };
            prop_assert!(eta(lo).unwrap() <= eta(hi).unwrap());
            prop_assert!(eta(hi).unwrap() < 0.5);
        }
    }

    #[test]
    fn bound_formulas() {
        assert!((short_split_bound(14, 28) - 0.829_622_131_7).abs() < 1e-9);
        assert!((short_split_bound(10, 20) - 1.064_386).abs() < 1e-5);
        assert!((cycles_minus_clusters_bound(14, 2 << 14) - 40_777.587_018).abs() < 1e-5);
        assert_eq!(cycles_minus_clusters_bound(14, 0), 0.0);
        assert!((merge_tail_bound(4096, 4 * 4096, 0.5) - 0.338_388).abs() < 1e-5);
        assert!(merge_tail_bound(4096, 1, 0.5) >= 4096.0);
        assert!((averaging_floor(0.5, 0.25) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(averaging_floor(0.3, 0.3), 0.0);
        assert!((subcritical_kappa_floor(0.4) - 34.657_36).abs() < 1e-4);
    }

    #[test]
    fn window_spec_validation() {
        let w = WindowSpec::new(8192, 0.5, 0.1).unwrap();
        assert_eq!(w.times(), 8193..=12288);
        assert_eq!(w.len(), 4096);
        assert_eq!(w.threshold(12), 2);
        assert!(WindowSpec::new(0, 0.5, 0.1).is_err());
        assert!(WindowSpec::new(10, 0.0, 0.1).is_err());
        assert!(WindowSpec::new(10, 0.5, 1.0).is_err());
        assert!(WindowSpec::new(1, 0.5, 0.5).is_err(), "floor(1.5) = 1 leaves the window empty");
    }

    #[test]
    fn window_average_examples() {
        // Identity-like data: no long cycles at all.
        let w = WindowSpec::new(1, 1.0, 0.5).unwrap();
        let zero = synthetic(2, vec![2], &[vec![0], vec![0], vec![0]]);
        assert_eq!(window_average_long_cycle_density(&[zero], &w).unwrap().estimate, 0.0);
        // One replica, one-step window, every vertex on a long cycle.
        let full = synthetic(2, vec![2], &[vec![0], vec![0], vec![4]]);
        let w = WindowSpec::new(1, 1.0, 0.5).unwrap();
        assert_eq!(w.times(), 2..=2);
        let e = window_average_long_cycle_density(&[full], &w).unwrap();
        assert_eq!((e.estimate, e.stderr, e.replicas), (1.0, 0.0, 1));
    }

    #[test]
    fn window_gaps_are_reported() {
        let mut rec = synthetic(2, vec![2], &[vec![0], vec![0], vec![4], vec![4], vec![4]]);
        rec.snapshots.remove(3);
        let w = WindowSpec::new(2, 1.0, 0.5).unwrap();
        match window_average_long_cycle_density(&[rec], &w) {
            Err(Error::IncompleteData { missing, .. }) => assert_eq!(missing, vec![3]),
            other => panic!("expected gap error, got {other:?}"),
        }
    }

    #[test]
    fn missing_threshold_is_an_error() {
        let rec = synthetic(2, vec![3], &[vec![0], vec![0], vec![0]]);
        let w = WindowSpec::new(1, 1.0, 0.5).unwrap();
        assert!(matches!(window_average_long_cycle_density(&[rec], &w), Err(Error::MissingThreshold(2))));
    }

    proptest! {
        #[test]
        fn window_average_is_order_invariant_and_monotone_in_a(
            data in proptest::collection::vec(proptest::collection::vec((0u64..=64, 0u64..=64), 9), 1..8),
            rot in 0usize..8,
        ) {
            // N = 64, thresholds ⌊64^0.25⌋ = 2 and ⌊64^0.5⌋ = 8; |V(8)| <= |V(2)|.
            let records: Vec<RunRecord> = data
                .iter()
                .map(|rows| {
                    let values: Vec<Vec<u64>> =
                        rows.iter().map(|&(x, y)| vec![x.max(y), x.min(y)]).collect();
                    synthetic(6, vec![2, 8], &values)
                })
                .collect();
            let w_small = WindowSpec::new(4, 1.0, 0.25).unwrap();
            let w_large = WindowSpec::new(4, 1.0, 0.5).unwrap();
            let base = window_average_long_cycle_density(&records, &w_small).unwrap();
            let mut rotated = records.clone();
            let len = rotated.len();
            rotated.rotate_left(rot % len);
            let again = window_average_long_cycle_density(&rotated, &w_small).unwrap();
            prop_assert_eq!(base, again);
            let larger_a = window_average_long_cycle_density(&records, &w_large).unwrap();
            prop_assert!(base.estimate >= larger_a.estimate);
        }
    }

    #[test]
    fn subcritical_examples() {
        // κn >= N: nothing can exceed the threshold.
        let rec = synthetic(2, vec![4], &[vec![0]]);
        let r = subcritical_no_long_cycle_probability(&[rec.clone(), rec], 0, 2.0, 0.9).unwrap();
        assert_eq!(r.estimate, 1.0);
        assert_eq!(r.verdict, Verdict::Pass);
        assert!(r.notes.is_empty(), "c = 0 and kappa = 2 > 2ln2 need no note");
        // κ below the validity floor is still computed, with a note.
        let rec = synthetic(4, vec![8], &[vec![0], vec![0], vec![5]]);
        let r = subcritical_no_long_cycle_probability(&[rec.clone()], 2, 2.0, 0.5).unwrap();
        assert_eq!(r.estimate, 0.0);
        assert_eq!(r.verdict, Verdict::Fail);
        assert!(r.notes[0].contains("validity floor"));
    }

    #[test]
    fn short_split_examples() {
        let tally = ShortSplitTally { short_splits: 0, splits: 0, steps: 100 };
        let r = short_split_bound_check(&[tally, tally], 14, 28).unwrap();
        assert_eq!((r.estimate, r.verdict), (0.0, Verdict::Pass));
        let r = short_split_bound_check(&[tally], 10, 20).unwrap();
        assert!(r.notes[0].contains("vacuous"));

        let e = |t, min: Option<u32>| StepEvent {
            t,
            edge: Edge::new(0, 1).unwrap(),
            kind: if min.is_some() { EventKind::Split } else { EventKind::MergeCrossCluster },
            split_min_size: min,
        };
        let events = [e(1, None), e(2, Some(3)), e(3, Some(9)), e(4, Some(1)), e(5, None)];
        assert_eq!(
            tally_short_splits(&events, 3, 2..=4),
            ShortSplitTally { short_splits: 2, splits: 3, steps: 3 }
        );
    }

    #[test]
    fn cycles_minus_clusters_examples() {
        let mut rec = synthetic(4, vec![], &[vec![], vec![]]);
        rec.snapshots[0].cycles = 16;
        rec.snapshots[0].clusters = 16;
        rec.snapshots[1].cycles = 15;
        rec.snapshots[1].clusters = 15;
        let r0 = cycles_minus_clusters_bound_check(&[rec.clone()], 0).unwrap();
        assert_eq!((r0.estimate, r0.bound, r0.verdict), (0.0, 0.0, Verdict::Pass));
        let r1 = cycles_minus_clusters_bound_check(&[rec], 1).unwrap();
        assert_eq!(r1.estimate, 0.0);
        assert_eq!(r1.bound, 3.0 * 16f64.log2() / 4.0);
    }

    #[test]
    fn merge_tail_examples() {
        let counts = |m| EventCounts { merges_cross_cluster: m, ..Default::default() };
        let mk = |m0, m1| RunRecord {
            header: header(4, vec![]),
            snapshots: vec![snap(0, vec![], counts(m0)), snap(1, vec![], counts(m1))],
            histograms: Vec::new(),
            totals: None,
        };
        let r = merge_tail_bound_check(&[mk(0, 1), mk(0, 1)], 1, 0.5).unwrap();
        assert_eq!(r.estimate, 1.0);
        assert_eq!(r.verdict, Verdict::Pass, "the bound exceeds 1 at t = 1");
        assert!(merge_tail_bound_check(&[mk(0, 1)], 1, 1.5).is_err());
    }

    #[test]
    fn lambda_check_skips_when_rate_is_low() {
        // No splits at all: λ̂ = 0 <= a.
        let rec = synthetic(4, vec![2], &[vec![0], vec![0], vec![0], vec![0], vec![0]]);
        let w = WindowSpec::new(2, 1.0, 0.25).unwrap();
        let r = lambda_to_density_check(&[rec], &w).unwrap();
        assert_eq!(r.verdict, Verdict::Skipped);
        assert!(r.passed());
    }

    #[test]
    fn spectrum_examples() {
        let single = Histogram { t: 5, lengths: vec![(16, 1)] };
        let identity = Histogram { t: 5, lengths: vec![(1, 16)] };
        let mut a = synthetic(4, vec![], &[vec![]]);
        a.histograms.push(single);
        let s = top_cycle_spectrum(&[a], 5, 1).unwrap();
        assert_eq!(s.means, vec![1.0]);
        let mut b = synthetic(4, vec![], &[vec![]]);
        b.histograms.push(identity);
        let s = top_cycle_spectrum(&[b], 5, 3).unwrap();
        assert_eq!(s.means, vec![1.0 / 16.0; 3]);
        let far = SpectrumEstimate { means: vec![0.5], stderrs: vec![0.0], samples: 1 };
        let near = SpectrumEstimate { means: vec![0.51], stderrs: vec![0.0], samples: 1 };
        assert_eq!(spectrum_agreement(&far, &near, 0.02).verdict, Verdict::Pass);
        assert_eq!(spectrum_agreement(&far, &near, 0.005).verdict, Verdict::Fail);
    }

    #[test]
    fn martingale_drift_examples() {
        let mut recs = Vec::new();
        for x in [-1.0, 1.0, 0.5, -0.5] {
            let mut rec = synthetic(4, vec![], &[vec![], vec![]]);
            rec.snapshots[1].martingale = Some(x);
            recs.push(rec);
        }
        let r = martingale_drift_check(&recs, 1).unwrap();
        assert_eq!((r.estimate, r.verdict), (0.0, Verdict::Pass));
        for rec in &mut recs {
            rec.snapshots[1].martingale = rec.snapshots[1].martingale.map(|x| x + 10.0);
        }
        assert_eq!(martingale_drift_check(&recs, 1).unwrap().verdict, Verdict::Fail);
        assert!(martingale_drift_check(&recs, 0).is_err(), "no martingale column at t = 0");
    }

    #[test]
    fn estimates() {
        let e = EstimateWithError::from_samples(&[1.0, 2.0, 3.0]);
        assert_eq!(e.estimate, 2.0);
        assert!((e.stderr - (1.0f64 / 3.0).sqrt()).abs() < 1e-12);
        let b = EstimateWithError::binomial(1, 4);
        assert!((b.stderr - (0.25f64 * 0.75 / 4.0).sqrt()).abs() < 1e-15);
    }
}
