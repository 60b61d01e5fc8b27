//! Experiment configuration: a plain `key = value` file, one key per line, `#`
//! starts a comment. Every key has a flag of the same name with `_` replaced by
//! `-` (`t_max` ↔ `--t-max`); flags override the file.
//!
//! Times (`t_max`, `snapshot_times`, `histogram_times`, `snapshot_dense`) accept an
//! integer or a multiple of `N` written `2N` or `0.5N`, resolved as `⌊x·N⌋`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use interchange_core::{RunConfig, SnapshotSchedule, Threshold};

/// Every recognized key with its help text, in echo order.
pub const KEYS: &[(&str, &str)] = &[
    ("mode", "simulate | analyze | oracle | verify-all"),
    ("n", "hypercube dimension"),
    ("c", "horizon as a multiple of N: t_max = floor(c*N); excludes t_max"),
    ("t_max", "number of steps; excludes c"),
    ("thresholds", "comma list of cycle thresholds: 64 (absolute), N^0.1 (exponent), 35n (multiple of n)"),
    ("window_T", "averaging window start as a multiple of N"),
    ("window_delta", "averaging window relative length Delta"),
    ("replicas", "number of replicas R >= 1"),
    ("seed", "base seed; replica i uses the (i+1)-th SplitMix64 output from it"),
    ("output", "output directory"),
    ("input", "directory of snapshot files to analyze (default: output)"),
    ("snapshot_every", "record a snapshot every k steps"),
    ("snapshot_times", "comma list of extra snapshot times"),
    ("snapshot_dense", "comma list of inclusive ranges a..b snapshotted at every step"),
    ("histogram_times", "comma list of times at which the full cycle-length histogram is recorded"),
    ("martingale", "track the compensated merge count X_t (true | false)"),
    ("threads", "replicas run concurrently (0 = one per core)"),
    ("kappa", "subcritical check: threshold kappa*n"),
    ("subcritical_floor", "subcritical check: minimum fraction of replicas without long cycles"),
    ("delta", "merge-tail check exponent, 0 < delta < 1"),
    ("reference_samples", "uniform permutations drawn for the spectrum reference"),
    ("spectrum_tolerance", "allowed gap between mean largest-cycle fractions"),
    ("scale", "verify-all suite scale: desk | smoke"),
];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigError {
    pub key: Option<String>,
    /// `file line 4`, `flag --n` or similar.
    pub origin: Option<String>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(origin) = &self.origin {
            write!(f, "{origin}: ")?;
        }
        if let Some(key) = &self.key {
            write!(f, "key `{key}`: ")?;
        }
        f.write_str(&self.message)
    }
}

impl std::error::Error for ConfigError {}

fn err(key: Option<&str>, origin: Option<&str>, message: impl Into<String>) -> ConfigError {
    ConfigError { key: key.map(str::to_string), origin: origin.map(str::to_string), message: message.into() }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Simulate,
    Analyze,
    Oracle,
    VerifyAll,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Simulate => "simulate",
            Mode::Analyze => "analyze",
            Mode::Oracle => "oracle",
            Mode::VerifyAll => "verify-all",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scale {
    Desk,
    Smoke,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Horizon {
    Multiple(f64),
    Steps(u64),
}

/// A time given either absolutely or as a multiple of `N`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TimeSpec {
    Steps(u64),
    Multiple(f64),
}

impl TimeSpec {
    pub fn resolve(self, vertices: u64) -> u64 {
        match self {
            TimeSpec::Steps(t) => t,
            TimeSpec::Multiple(x) => (x * vertices as f64).floor() as u64,
        }
    }
}

impl fmt::Display for TimeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimeSpec::Steps(t) => write!(f, "{t}"),
            TimeSpec::Multiple(x) => write!(f, "{x}N"),
        }
    }
}

impl std::str::FromStr for TimeSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if let Some(x) = s.strip_suffix('N') {
            let x: f64 = x.trim().parse().map_err(|_| format!("`{s}` is not a multiple of N"))?;
            if !(x >= 0.0 && x.is_finite()) {
                return Err(format!("`{s}` must be a non-negative multiple of N"));
            }
            Ok(TimeSpec::Multiple(x))
        } else {
            s.parse().map(TimeSpec::Steps).map_err(|_| format!("`{s}` is not a time (integer or xN)"))
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub dimension: Option<u32>,
    pub horizon: Option<Horizon>,
    pub thresholds: Vec<Threshold>,
    /// `(T/N, Δ)`.
    pub window: Option<(f64, f64)>,
    pub replicas: u32,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub input: Option<PathBuf>,
    pub snapshot_every: Option<u64>,
    pub snapshot_times: Vec<TimeSpec>,
    pub snapshot_dense: Vec<(TimeSpec, TimeSpec)>,
    pub histogram_times: Vec<TimeSpec>,
    pub martingale: bool,
    pub threads: usize,
    pub kappa: Option<f64>,
    pub subcritical_floor: f64,
    pub delta: Option<f64>,
    pub reference_samples: usize,
    pub spectrum_tolerance: f64,
    pub scale: Scale,
}

impl ExperimentConfig {
    fn defaults(mode: Mode) -> Self {
        ExperimentConfig {
            mode,
            dimension: None,
            horizon: None,
            thresholds: Vec::new(),
            window: None,
            replicas: 1,
            seed: 0,
            output: None,
            input: None,
            snapshot_every: None,
            snapshot_times: Vec::new(),
            snapshot_dense: Vec::new(),
            histogram_times: Vec::new(),
            martingale: false,
            threads: 0,
            kappa: None,
            subcritical_floor: 0.9,
            delta: None,
            reference_samples: 20_000,
            spectrum_tolerance: 0.02,
            scale: Scale::Desk,
        }
    }

    pub fn vertices(&self) -> Option<u64> {
        self.dimension.map(|n| 1u64 << n)
    }

    /// `t_max`, resolved from `c` when needed.
    pub fn t_max(&self) -> Option<u64> {
        let n = self.vertices()?;
        Some(match self.horizon? {
            Horizon::Steps(t) => t,
            Horizon::Multiple(c) => (c * n as f64).floor() as u64,
        })
    }

    /// Engine configuration for replica 0; batch code fills in seed and index.
    pub fn run_config(&self) -> Result<RunConfig, ConfigError> {
        let n = self.dimension.ok_or_else(|| err(Some("n"), None, "required"))?;
        let t_max = self.t_max().ok_or_else(|| err(Some("t_max"), None, "one of `c` or `t_max` is required"))?;
        let vertices = 1u64 << n;
        let mut schedule = match self.snapshot_every {
            Some(k) => SnapshotSchedule::every(k),
            None => SnapshotSchedule::default(),
        };
        schedule = schedule.with_times(self.snapshot_times.iter().map(|t| t.resolve(vertices)));
        for (a, b) in &self.snapshot_dense {
            schedule = schedule.with_dense(a.resolve(vertices), b.resolve(vertices));
        }
        if let Some((t, delta)) = self.window {
            // The window checks need every step of [T, (1+Δ)T].
            let start = (t * vertices as f64).floor() as u64;
            let end = ((1.0 + delta) * start as f64).floor() as u64;
            schedule = schedule.with_dense(start, end);
        }
        if self.delta.is_some() {
            schedule = schedule.with_times([t_max.saturating_sub(1)]);
        }
        let mut config = RunConfig::new(n, t_max);
        config.schedule = schedule;
        config.thresholds = self.all_thresholds();
        config.seed = self.seed;
        config.track_martingale = self.martingale;
        config.histogram_times = self.histogram_times.iter().map(|t| t.resolve(vertices)).collect();
        config.validate().map_err(|e| err(None, None, e.to_string()))?;
        Ok(config)
    }

    /// Configured thresholds plus `κn` when the subcritical check is on.
    pub fn all_thresholds(&self) -> Vec<Threshold> {
        let mut all = self.thresholds.clone();
        if let Some(k) = self.kappa {
            let t = Threshold::DimensionMultiple(k);
            if !all.contains(&t) {
                all.push(t);
            }
        }
        all
    }

    /// The fully resolved configuration as `key = value` lines; parses back to an
    /// equivalent configuration.
    pub fn to_resolved_text(&self) -> String {
        let mut out = String::from("# resolved configuration\n");
        let mut line = |k: &str, v: String| out.push_str(&format!("{k} = {v}\n"));
        let list = |items: Vec<String>| items.join(", ");
        line("mode", self.mode.as_str().into());
        if let Some(n) = self.dimension {
            line("n", n.to_string());
        }
        if let Some(Horizon::Multiple(c)) = self.horizon {
            line("# c", c.to_string());
        }
        if let Some(t) = self.t_max() {
            line("t_max", t.to_string());
        }
        if !self.thresholds.is_empty() {
            line("thresholds", list(self.thresholds.iter().map(|t| t.to_string()).collect()));
        }
        if let Some((t, d)) = self.window {
            line("window_T", t.to_string());
            line("window_delta", d.to_string());
        }
        line("replicas", self.replicas.to_string());
        line("seed", self.seed.to_string());
        if let Some(p) = &self.output {
            line("output", p.display().to_string());
        }
        if let Some(p) = &self.input {
            line("input", p.display().to_string());
        }
        if let Some(k) = self.snapshot_every {
            line("snapshot_every", k.to_string());
        }
        if !self.snapshot_times.is_empty() {
            line("snapshot_times", list(self.snapshot_times.iter().map(|t| t.to_string()).collect()));
        }
        if !self.snapshot_dense.is_empty() {
            line("snapshot_dense", list(self.snapshot_dense.iter().map(|(a, b)| format!("{a}..{b}")).collect()));
        }
        if !self.histogram_times.is_empty() {
            line("histogram_times", list(self.histogram_times.iter().map(|t| t.to_string()).collect()));
        }
        line("martingale", self.martingale.to_string());
        line("threads", self.threads.to_string());
        if let Some(k) = self.kappa {
            line("kappa", k.to_string());
        }
        line("subcritical_floor", self.subcritical_floor.to_string());
        if let Some(d) = self.delta {
            line("delta", d.to_string());
        }
        line("reference_samples", self.reference_samples.to_string());
        line("spectrum_tolerance", self.spectrum_tolerance.to_string());
        line("scale", if self.scale == Scale::Desk { "desk" } else { "smoke" }.into());
        out
    }
}

/// One raw `key = value` entry and where it came from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Entry {
    pub value: String,
    pub origin: String,
}

pub type RawConfig = BTreeMap<String, Entry>;

fn known(key: &str) -> bool {
    KEYS.iter().any(|(k, _)| *k == key)
}

/// Parses the text of a config file. `source` names the file in errors.
pub fn parse_text(text: &str, source: &str) -> Result<RawConfig, ConfigError> {
    let mut raw = RawConfig::new();
    for (i, line) in text.lines().enumerate() {
        let origin = format!("{source} line {}", i + 1);
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) =
            line.split_once('=').ok_or_else(|| err(None, Some(&origin), format!("expected `key = value`, got `{line}`")))?;
        let key = key.trim();
        if !known(key) {
            return Err(err(Some(key), Some(&origin), "unknown key"));
        }
        if raw.contains_key(key) {
            return Err(err(Some(key), Some(&origin), "set twice"));
        }
        raw.insert(key.to_string(), Entry { value: value.trim().to_string(), origin });
    }
    if raw.contains_key("c") && raw.contains_key("t_max") {
        return Err(err(Some("c"), Some(&raw["c"].origin.clone()), "conflicts with `t_max`; give exactly one"));
    }
    Ok(raw)
}

/// Applies flag overrides. A flag for `c` or `t_max` replaces whichever of the two
/// the file set; giving both as flags is a conflict.
pub fn apply_overrides(raw: &mut RawConfig, flags: &[(String, String)]) -> Result<(), ConfigError> {
    let flagged = |k: &str| flags.iter().any(|(f, _)| f == k);
    if flagged("c") && flagged("t_max") {
        return Err(err(Some("c"), Some("flag --c"), "conflicts with --t-max; give exactly one"));
    }
    for (key, value) in flags {
        if !known(key) {
            return Err(err(Some(key), Some(&format!("flag --{}", key.replace('_', "-"))), "unknown key"));
        }
        match key.as_str() {
            "c" => {
                raw.remove("t_max");
            }
            "t_max" => {
                raw.remove("c");
            }
            _ => {}
        }
        raw.insert(
            key.clone(),
            Entry { value: value.clone(), origin: format!("flag --{}", key.replace('_', "-")) },
        );
    }
    Ok(())
}

fn value<T: std::str::FromStr>(raw: &RawConfig, key: &str, what: &str) -> Result<Option<T>, ConfigError> {
    match raw.get(key) {
        None => Ok(None),
        Some(e) => e
            .value
            .parse()
            .map(Some)
            .map_err(|_| err(Some(key), Some(&e.origin), format!("malformed value `{}`: expected {what}", e.value))),
    }
}

fn list<T>(raw: &RawConfig, key: &str, parse: impl Fn(&str) -> Result<T, String>) -> Result<Vec<T>, ConfigError> {
    match raw.get(key) {
        None => Ok(Vec::new()),
        Some(e) => e
            .value
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| parse(s).map_err(|m| err(Some(key), Some(&e.origin), format!("malformed value: {m}"))))
            .collect(),
    }
}

fn check(raw: &RawConfig, key: &str, ok: bool, message: &str) -> Result<(), ConfigError> {
    if ok {
        Ok(())
    } else {
        Err(err(Some(key), raw.get(key).map(|e| e.origin.as_str()), message))
    }
}

/// Turns raw entries into a validated configuration.
pub fn resolve(raw: &RawConfig) -> Result<ExperimentConfig, ConfigError> {
    let mode = match raw.get("mode").map(|e| (e.value.as_str(), e)) {
        None => return Err(err(Some("mode"), None, "missing; nothing to do")),
        Some(("simulate", _)) => Mode::Simulate,
        Some(("analyze", _)) => Mode::Analyze,
        Some(("oracle", _)) => Mode::Oracle,
        Some(("verify-all", _)) => Mode::VerifyAll,
        Some((other, e)) => {
            return Err(err(
                Some("mode"),
                Some(&e.origin),
                format!("malformed value `{other}`: expected simulate, analyze, oracle or verify-all"),
            ))
        }
    };
    let mut cfg = ExperimentConfig::defaults(mode);
    cfg.dimension = value(raw, "n", "an integer")?;
    if let Some(n) = cfg.dimension {
        check(raw, "n", (1..=interchange_core::graph::MAX_DIMENSION).contains(&n), "must be in 1..=30")?;
    }
    cfg.horizon = match (value::<f64>(raw, "c", "a number")?, value::<TimeSpec>(raw, "t_max", "a time")?) {
        (Some(_), Some(_)) => return Err(err(Some("c"), raw.get("c").map(|e| e.origin.as_str()), "conflicts with `t_max`")),
        (Some(c), None) => {
            check(raw, "c", c >= 0.0 && c.is_finite(), "must be a non-negative number")?;
            Some(Horizon::Multiple(c))
        }
        (None, Some(TimeSpec::Steps(t))) => Some(Horizon::Steps(t)),
        (None, Some(TimeSpec::Multiple(c))) => Some(Horizon::Multiple(c)),
        (None, None) => None,
    };
    cfg.thresholds = list(raw, "thresholds", |s| s.parse::<Threshold>().map_err(|e| e.to_string()))?;
    let window_t: Option<f64> = value(raw, "window_T", "a number")?;
    let window_delta: Option<f64> = value(raw, "window_delta", "a number")?;
    cfg.window = match (window_t, window_delta) {
        (Some(t), Some(d)) => {
            check(raw, "window_T", t > 0.0 && t.is_finite(), "must be positive")?;
            check(raw, "window_delta", d > 0.0 && d.is_finite(), "must be positive")?;
            Some((t, d))
        }
        (None, None) => None,
        (Some(_), None) => return Err(err(Some("window_delta"), None, "required when `window_T` is set")),
        (None, Some(_)) => return Err(err(Some("window_T"), None, "required when `window_delta` is set")),
    };
    if let Some(r) = value(raw, "replicas", "a positive integer")? {
        check(raw, "replicas", r >= 1, "must be at least 1")?;
        cfg.replicas = r;
    }
    cfg.seed = value(raw, "seed", "an unsigned 64-bit integer")?.unwrap_or(0);
    cfg.output = value::<String>(raw, "output", "a path")?.map(PathBuf::from);
    cfg.input = value::<String>(raw, "input", "a path")?.map(PathBuf::from);
    cfg.snapshot_every = value(raw, "snapshot_every", "a positive integer")?;
    if let Some(k) = cfg.snapshot_every {
        check(raw, "snapshot_every", k >= 1, "must be at least 1")?;
    }
    cfg.snapshot_times = list(raw, "snapshot_times", |s| s.parse())?;
    cfg.snapshot_dense = list(raw, "snapshot_dense", |s| {
        let (a, b) = s.split_once("..").ok_or_else(|| format!("`{s}` is not a range a..b"))?;
        Ok((a.parse()?, b.parse()?))
    })?;
    cfg.histogram_times = list(raw, "histogram_times", |s| s.parse())?;
    cfg.martingale = value(raw, "martingale", "true or false")?.unwrap_or(false);
    cfg.threads = value(raw, "threads", "a non-negative integer")?.unwrap_or(0);
    cfg.kappa = value(raw, "kappa", "a number")?;
    if let Some(k) = cfg.kappa {
        check(raw, "kappa", k > 0.0 && k.is_finite(), "must be positive")?;
    }
    if let Some(f) = value(raw, "subcritical_floor", "a number")? {
        check(raw, "subcritical_floor", (0.0..=1.0).contains(&f), "must lie in [0, 1]")?;
        cfg.subcritical_floor = f;
    }
    cfg.delta = value(raw, "delta", "a number")?;
    if let Some(d) = cfg.delta {
        check(raw, "delta", d > 0.0 && d < 1.0, "must lie in (0, 1)")?;
    }
    if let Some(s) = value(raw, "reference_samples", "a positive integer")? {
        check(raw, "reference_samples", s >= 2, "must be at least 2")?;
        cfg.reference_samples = s;
    }
    if let Some(t) = value(raw, "spectrum_tolerance", "a number")? {
        check(raw, "spectrum_tolerance", t >= 0.0, "must be non-negative")?;
        cfg.spectrum_tolerance = t;
    }
    cfg.scale = match raw.get("scale").map(|e| (e.value.as_str(), e)) {
        None | Some(("desk", _)) => Scale::Desk,
        Some(("smoke", _)) => Scale::Smoke,
        Some((other, e)) => {
            return Err(err(Some("scale"), Some(&e.origin), format!("malformed value `{other}`: expected desk or smoke")))
        }
    };

    match mode {
        Mode::Simulate => {
            if cfg.dimension.is_none() {
                return Err(err(Some("n"), None, "required for simulate"));
            }
            if cfg.horizon.is_none() {
                return Err(err(Some("c"), None, "one of `c` or `t_max` is required for simulate"));
            }
            if cfg.output.is_none() {
                return Err(err(Some("output"), None, "required for simulate"));
            }
            if cfg.delta.is_some() && cfg.t_max() == Some(0) {
                return Err(err(Some("delta"), None, "the merge-tail check needs t_max >= 1"));
            }
            cfg.run_config()?;
        }
        Mode::Analyze => {
            if cfg.input.is_none() && cfg.output.is_none() {
                return Err(err(Some("input"), None, "required for analyze"));
            }
        }
        Mode::Oracle | Mode::VerifyAll => {}
    }
    Ok(cfg)
}

/// Parses `text` (from `source`) and applies `flags`.
pub fn parse_config(text: &str, source: &str, flags: &[(String, String)]) -> Result<ExperimentConfig, ConfigError> {
    let mut raw = parse_text(text, source)?;
    apply_overrides(&mut raw, flags)?;
    resolve(&raw)
}
