//! Replica batches: one snapshot file per replica plus a manifest.
//!
//! Each replica streams into `replica_XXXX.tsv.partial` and is renamed to
//! `replica_XXXX.tsv` once its trailer is written, so an interrupted batch leaves
//! `.partial` files behind. `--resume` keeps every finished file whose header
//! matches the configuration and regenerates the rest from their seeds; the
//! manifest records which replicas were recovered and from what state.
//! Wall-clock times go to stderr only, never into digested files.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use interchange_core::engine::{run_observed, RNG_ALGORITHM};
use interchange_core::format::{self, FORMAT_VERSION};
use interchange_core::{derive_replica_seed, Histogram, Observer, Replica, RunConfig, Snapshot};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::CliError;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const RESOLVED_CONFIG_FILE: &str = "config.resolved";
pub const SEED_RULE: &str = "replica i uses the (i+1)-th output of SplitMix64 started at the base seed";

#[derive(Clone, Copy, Debug, Default)]
pub struct BatchOptions {
    pub force: bool,
    pub resume: bool,
    /// Print per-replica progress and timings to stderr.
    pub verbose: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub file: String,
    pub replica: u32,
    pub seed: u64,
    pub sha256: String,
    pub bytes: u64,
    pub status: String,
    /// Set on resume when the replica had to be regenerated: `partial` or `missing`.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub recovered_from: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub kind: String,
    pub rng: String,
    pub seed_rule: String,
    pub base_seed: u64,
    pub replicas: u32,
    pub dimension: u32,
    pub t_max: u64,
    pub files: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn read(dir: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(dir.join(MANIFEST_FILE))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("malformed manifest: {e}")))
    }
}

pub fn replica_file_name(replica: u32) -> String {
    format!("replica_{replica:04}.tsv")
}

fn partial_name(replica: u32) -> String {
    format!("{}.partial", replica_file_name(replica))
}

/// Files this tool writes into an output directory.
fn is_ours(name: &str) -> bool {
    name == MANIFEST_FILE
        || name == RESOLVED_CONFIG_FILE
        || name == crate::analyze::SUMMARY_FILE
        || (name.starts_with("replica_") && (name.ends_with(".tsv") || name.ends_with(".tsv.partial")))
}

pub fn sha256_file(path: &Path) -> Result<(String, u64), CliError> {
    let bytes = fs::read(path)?;
    Ok((hex::encode(Sha256::digest(&bytes)), bytes.len() as u64))
}

struct StreamSnapshots<W: Write> {
    out: W,
}

impl<W: Write> Observer for StreamSnapshots<W> {
    fn on_snapshot(&mut self, snapshot: &Snapshot, _: &Replica) -> interchange_core::Result<()> {
        format::write_snapshot(&mut self.out, snapshot)
    }

    fn on_histogram(&mut self, histogram: &Histogram) -> interchange_core::Result<()> {
        format::write_histogram(&mut self.out, histogram)
    }
}

/// Runs one replica, streaming into `<file>.partial` and renaming on completion.
pub fn write_replica(dir: &Path, config: &RunConfig) -> Result<PathBuf, CliError> {
    let partial = dir.join(partial_name(config.replica));
    let mut out = BufWriter::new(File::create(&partial)?);
    format::write_header(&mut out, &config.header())?;
    let mut sink = StreamSnapshots { out };
    let outcome = run_observed(config, &mut sink)?;
    let mut out = sink.out;
    let totals = outcome.record.totals.expect("a finished run has totals");
    format::write_trailer(&mut out, &totals)?;
    out.into_inner().map_err(|e| e.into_error())?.sync_all()?;
    let done = dir.join(replica_file_name(config.replica));
    fs::rename(&partial, &done)?;
    Ok(done)
}

/// How a replica stands before a (resumed) batch starts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Prior {
    Complete,
    Partial,
    Missing,
}

fn prior_state(dir: &Path, config: &RunConfig) -> Prior {
    let done = dir.join(replica_file_name(config.replica));
    if let Ok(file) = File::open(&done) {
        return match format::read_record(BufReader::new(file)) {
            Ok(rec) if rec.totals.is_some() && rec.header == config.header() => Prior::Complete,
            _ => Prior::Partial,
        };
    }
    if dir.join(partial_name(config.replica)).exists() {
        Prior::Partial
    } else {
        Prior::Missing
    }
}

fn prepare_directory(dir: &Path, opts: BatchOptions) -> Result<(), CliError> {
    if dir.exists() {
        let entries: Vec<String> =
            fs::read_dir(dir)?.filter_map(|e| e.ok()).map(|e| e.file_name().to_string_lossy().into_owned()).collect();
        if !entries.is_empty() && !opts.force && !opts.resume {
            return Err(CliError::Usage(format!(
                "output directory {} is not empty; pass --force to overwrite or --resume to continue",
                dir.display()
            )));
        }
        if opts.force && !opts.resume {
            for name in entries.iter().filter(|n| is_ours(n)) {
                fs::remove_file(dir.join(name))?;
            }
        }
    } else {
        fs::create_dir_all(dir)?;
    }
    Ok(())
}

/// Runs every replica of `cfg` into its output directory and writes the manifest.
pub fn run_batch(cfg: &ExperimentConfig, opts: BatchOptions) -> Result<Manifest, CliError> {
    let dir = cfg.output.clone().ok_or_else(|| CliError::Usage("simulate needs `output`".into()))?;
    let base = cfg.run_config()?;
    prepare_directory(&dir, opts)?;
    fs::write(dir.join(RESOLVED_CONFIG_FILE), cfg.to_resolved_text())?;

    let configs: Vec<RunConfig> = (0..cfg.replicas)
        .map(|i| RunConfig { seed: derive_replica_seed(cfg.seed, i), replica: i, ..base.clone() })
        .collect();
    let priors: Vec<Prior> =
        configs.iter().map(|c| if opts.resume { prior_state(&dir, c) } else { Prior::Missing }).collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    let started = Instant::now();
    let results: Vec<Result<ManifestEntry, CliError>> = pool.install(|| {
        configs
            .par_iter()
            .zip(priors.par_iter())
            .map(|(config, &prior)| {
                let path = dir.join(replica_file_name(config.replica));
                if prior != Prior::Complete {
                    let t0 = Instant::now();
                    write_replica(&dir, config)?;
                    if opts.verbose {
                        eprintln!("replica {} done in {:.3?}", config.replica, t0.elapsed());
                    }
                }
                let (sha256, bytes) = sha256_file(&path)?;
                Ok(ManifestEntry {
                    file: replica_file_name(config.replica),
                    replica: config.replica,
                    seed: config.seed,
                    sha256,
                    bytes,
                    status: "complete".into(),
                    recovered_from: match (opts.resume, prior) {
                        (true, Prior::Partial) => Some("partial".into()),
                        (true, Prior::Missing) => Some("missing".into()),
                        _ => None,
                    },
                })
            })
            .collect()
    });
    let files = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    if opts.verbose {
        eprintln!("{} replicas in {:.3?}", cfg.replicas, started.elapsed());
    }

    let manifest = Manifest {
        format_version: FORMAT_VERSION,
        kind: "interchange-manifest".into(),
        rng: RNG_ALGORITHM.into(),
        seed_rule: SEED_RULE.into(),
        base_seed: cfg.seed,
        replicas: cfg.replicas,
        dimension: base.dimension,
        t_max: base.t_max,
        files,
    };
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    fs::write(dir.join(MANIFEST_FILE), text)?;
    Ok(manifest)
}
