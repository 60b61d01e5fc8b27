//! Reads a directory of snapshot files and writes `summary.json` with every
//! applicable check.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::BufReader;
use std::path::Path;

use interchange_core::format::{self, FORMAT_VERSION};
use interchange_core::oracle::uniform_permutation_reference;
use interchange_core::stats::{self, CheckReport, SpectrumEstimate, Verdict, WindowSpec};
use interchange_core::{derive_replica_seed, RunRecord, Threshold};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::CliError;

pub const SUMMARY_FILE: &str = "summary.json";
/// Ranks reported in cycle spectra.
pub const SPECTRUM_RANKS: usize = 3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub t: u64,
    pub observed: SpectrumEstimate,
    pub uniform_reference: SpectrumEstimate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub format_version: u32,
    pub kind: String,
    pub replicas: usize,
    pub dimension: u32,
    pub vertices: u64,
    pub t_max: u64,
    pub reports: Vec<CheckReport>,
    pub spectra: Vec<SpectrumReport>,
    pub all_passed: bool,
}

/// Loads every `replica_*.tsv` in `dir`, in file-name order.
pub fn load_records(dir: &Path) -> Result<Vec<RunRecord>, CliError> {
    let mut names: Vec<String> = fs::read_dir(dir)?
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|n| n.starts_with("replica_") && n.ends_with(".tsv"))
        .collect();
    names.sort();
    if names.is_empty() {
        return Err(CliError::Usage(format!("no replica files in {}", dir.display())));
    }
    let mut records = Vec::with_capacity(names.len());
    let mut incomplete = Vec::new();
    for name in &names {
        let rec = format::read_record(BufReader::new(File::open(dir.join(name))?))
            .map_err(|e| CliError::Usage(format!("{name}: {e}")))?;
        if rec.totals.is_none() {
            incomplete.push(u64::from(rec.header.replica));
        }
        records.push(rec);
    }
    if !incomplete.is_empty() {
        return Err(interchange_core::Error::IncompleteData { what: "replica files without a trailer".into(), missing: incomplete }.into());
    }
    let first = &records[0].header;
    if let Some(r) = records.iter().find(|r| (r.header.dimension, r.header.t_max) != (first.dimension, first.t_max)) {
        return Err(CliError::Usage(format!("replica {} does not match the dimension and horizon of the others", r.header.replica)));
    }
    Ok(records)
}

/// A deterministic pass/fail report for a property checked exactly.
pub fn exact_report(check: &str, violations: u64, cases: u64) -> CheckReport {
    CheckReport {
        check: check.into(),
        estimate: violations as f64,
        stderr: 0.0,
        replicas: cases as usize,
        bound: 0.0,
        slack: 0.0,
        rule: "violations == 0".into(),
        verdict: if violations == 0 { Verdict::Pass } else { Verdict::Fail },
        inputs: BTreeMap::from([("cases".to_string(), cases as f64)]),
        notes: Vec::new(),
    }
}

fn skipped(check: &str, note: String) -> CheckReport {
    CheckReport { verdict: Verdict::Skipped, notes: vec![note], ..exact_report(check, 0, 0) }
}

/// Exact invariants visible in snapshot files: the bookkeeping identity, hazard
/// monotonicity between snapshots, and the merge budget.
pub fn snapshot_invariant_reports(records: &[RunRecord]) -> Vec<CheckReport> {
    let mut identity = (0, 0);
    let mut hazard = (0, 0);
    let mut budget = (0, 0);
    for rec in records {
        let n = rec.header.vertices;
        let mut last = f64::INFINITY;
        for s in &rec.snapshots {
            identity.1 += 1;
            if s.cycles as i64 - s.clusters as i64 != s.counts.split_excess() {
                identity.0 += 1;
            }
            hazard.1 += 1;
            if s.merge_hazard > last {
                hazard.0 += 1;
            }
            last = s.merge_hazard;
            budget.1 += 1;
            if s.counts.merges_cross_cluster > n - 1 || s.clusters != n - s.counts.merges_cross_cluster {
                budget.0 += 1;
            }
        }
    }
    vec![
        exact_report("bookkeeping_identity", identity.0, identity.1),
        exact_report("hazard_monotone", hazard.0, hazard.1),
        exact_report("merge_budget", budget.0, budget.1),
    ]
}

/// Every check that the configuration and the recorded data support.
pub fn summarize(cfg: &ExperimentConfig, records: &[RunRecord]) -> Result<Summary, CliError> {
    let header = &records[0].header;
    let (dimension, vertices, t_max) = (header.dimension, header.vertices, header.t_max);
    let mut reports = snapshot_invariant_reports(records);

    reports.push(stats::cycles_minus_clusters_bound_check(records, t_max)?);
    if header.martingale {
        for t in [vertices, 2 * vertices, t_max] {
            if t <= t_max && records.iter().all(|r| r.at(t).is_some()) {
                reports.push(stats::martingale_drift_check(records, t)?);
            }
        }
    }
    if let Some(delta) = cfg.delta {
        if t_max >= 1 {
            reports.push(stats::merge_tail_bound_check(records, t_max, delta)?);
        }
    }
    if let Some(kappa) = cfg.kappa {
        reports.push(stats::subcritical_no_long_cycle_probability(records, t_max, kappa, cfg.subcritical_floor)?);
    }
    if let Some((t, delta)) = cfg.window {
        let start = (t * vertices as f64).floor() as u64;
        for threshold in &cfg.thresholds {
            let Threshold::Exponent(a) = *threshold else { continue };
            let w = WindowSpec::new(start, delta, a)?;
            match stats::supercritical_density_check(records, &w) {
                Err(interchange_core::Error::Unsupported(msg)) => reports.push(skipped("supercritical_window_density", msg)),
                other => reports.push(other?),
            }
            reports.push(stats::lambda_to_density_check(records, &w)?);
        }
    }

    let mut spectra = Vec::new();
    let times: Vec<u64> = histogram_times_in_all(records);
    for (i, &t) in times.iter().enumerate() {
        let observed = stats::top_cycle_spectrum(records, t, SPECTRUM_RANKS)?;
        let mut rng = ChaCha8Rng::seed_from_u64(derive_replica_seed(cfg.seed ^ 0x5eed_5eed, i as u32));
        let reference =
            uniform_permutation_reference(vertices as usize, SPECTRUM_RANKS, cfg.reference_samples, &mut rng);
        let mut report = stats::spectrum_agreement(&observed, &reference, cfg.spectrum_tolerance);
        report.inputs.insert("t".into(), t as f64);
        reports.push(report);
        spectra.push(SpectrumReport { t, observed, uniform_reference: reference });
    }

    let all_passed = reports.iter().all(CheckReport::passed);
    Ok(Summary {
        format_version: FORMAT_VERSION,
        kind: "interchange-summary".into(),
        replicas: records.len(),
        dimension,
        vertices,
        t_max,
        reports,
        spectra,
        all_passed,
    })
}

/// Histogram times present in every replica.
fn histogram_times_in_all(records: &[RunRecord]) -> Vec<u64> {
    records[0]
        .histograms
        .iter()
        .map(|h| h.t)
        .filter(|&t| records.iter().all(|r| r.histogram_at(t).is_some()))
        .collect()
}

/// Analyze mode: read `input` (or `output`), write `summary.json` to `output` (or `input`).
pub fn analyze(cfg: &ExperimentConfig) -> Result<Summary, CliError> {
    let input = cfg.input.as_ref().or(cfg.output.as_ref()).expect("validated by config");
    let output = cfg.output.as_ref().unwrap_or(input);
    let records = load_records(input)?;
    let summary = summarize(cfg, &records)?;
    fs::create_dir_all(output)?;
    let mut text = serde_json::to_string_pretty(&summary).expect("summary serializes");
    text.push('\n');
    fs::write(output.join(SUMMARY_FILE), text)?;
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::batch::{run_batch, BatchOptions};
    use crate::config::parse_config;

    #[test]
    fn simulate_then_analyze() {
        let dir = tempfile::tempdir().unwrap();
        let text = format!(
            "mode = simulate\nn = 8\nc = 3\nreplicas = 6\nseed = 3\noutput = {}\nthresholds = N^0.25, 2n\n\
             window_T = 2\nwindow_delta = 0.5\nmartingale = true\ndelta = 0.5\nkappa = 2\nsnapshot_every = 64\n\
             histogram_times = 3N\nreference_samples = 500\n",
            dir.path().display()
        );
        let cfg = parse_config(&text, "t", &[]).unwrap();
        run_batch(&cfg, BatchOptions::default()).unwrap();
        let summary = analyze(&cfg).unwrap();
        let names: Vec<&str> = summary.reports.iter().map(|r| r.check.as_str()).collect();
        for expected in [
            "bookkeeping_identity",
            "hazard_monotone",
            "merge_budget",
            "cycles_minus_clusters_bound",
            "martingale_drift",
            "merge_tail_bound",
            "subcritical_no_long_cycles",
            "supercritical_window_density",
            "lambda_to_density",
            "largest_cycle_fraction_vs_uniform",
        ] {
            assert!(names.contains(&expected), "{expected} missing from {names:?}");
        }
        for name in ["bookkeeping_identity", "hazard_monotone", "merge_budget"] {
            assert_eq!(summary.reports.iter().find(|r| r.check == name).unwrap().verdict, Verdict::Pass);
        }
        let written: Summary =
            serde_json::from_str(&fs::read_to_string(dir.path().join(SUMMARY_FILE)).unwrap()).unwrap();
        assert_eq!(written, summary);
    }

    #[test]
    fn incomplete_files_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let text = format!("mode = simulate\nn = 3\nt_max = 10\nreplicas = 2\noutput = {}\n", dir.path().display());
        let cfg = parse_config(&text, "t", &[]).unwrap();
        run_batch(&cfg, BatchOptions::default()).unwrap();
        let path = dir.path().join(crate::batch::replica_file_name(1));
        let full = fs::read_to_string(&path).unwrap();
        let cut = full.rfind("#end").unwrap();
        fs::write(&path, &full[..cut]).unwrap();
        match load_records(dir.path()) {
            Err(CliError::Core(interchange_core::Error::IncompleteData { missing, .. })) => assert_eq!(missing, vec![1]),
            other => panic!("expected incomplete data, got {other:?}"),
        }
    }
}
