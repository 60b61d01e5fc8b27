use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Arg, ArgAction, ArgMatches, Command};
use interchange_cli::analyze::analyze;
use interchange_cli::batch::{run_batch, BatchOptions};
use interchange_cli::config::{parse_config, Scale, KEYS};
use interchange_cli::suite::{criterion_ids, run_suite, SuiteScale};
use interchange_cli::{exit, CliError, ExperimentConfig, Mode};

const REPORT_FILE: &str = "verify_report.json";

fn flag_name(key: &str) -> String {
    key.replace('_', "-")
}

fn command() -> Command {
    let mut cmd = Command::new("interchange")
        .version(env!("CARGO_PKG_VERSION"))
        .about("Random interchange process on the hypercube: simulate, analyze, verify")
        .after_help(
            "Every config key has a flag: `t_max` is `--t-max`, `window_T` is `--window-t`.\n\
             Flags override the file. Exit status: 0 pass, 1 check failure, 2 usage or\n\
             configuration error, 3 internal invariant violation.",
        )
        .arg(Arg::new("config").long("config").value_name("FILE").help("key = value configuration file"))
        .arg(Arg::new("force").long("force").action(ArgAction::SetTrue).help("overwrite a non-empty output directory"))
        .arg(
            Arg::new("resume")
                .long("resume")
                .action(ArgAction::SetTrue)
                .help("keep finished replicas in the output directory and regenerate the rest"),
        )
        .arg(Arg::new("quiet").long("quiet").short('q').action(ArgAction::SetTrue).help("no progress on stderr"));
    for (key, help) in KEYS {
        cmd = cmd.arg(Arg::new(*key).long(flag_name(key).to_lowercase()).value_name("VALUE").help(*help));
    }
    cmd
}

fn load(matches: &ArgMatches) -> Result<ExperimentConfig, CliError> {
    let (text, source) = match matches.get_one::<String>("config") {
        Some(path) => (
            fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {path}: {e}")))?,
            path.clone(),
        ),
        None => (String::new(), "command line".to_string()),
    };
    let flags: Vec<(String, String)> = KEYS
        .iter()
        .filter_map(|(key, _)| matches.get_one::<String>(key).map(|v| (key.to_string(), v.clone())))
        .collect();
    Ok(parse_config(&text, &source, &flags)?)
}

fn write_json(dir: Option<&PathBuf>, name: &str, value: &impl serde::Serialize) -> Result<(), CliError> {
    if let Some(dir) = dir {
        fs::create_dir_all(dir)?;
        let mut text = serde_json::to_string_pretty(value).expect("report serializes");
        text.push('\n');
        fs::write(dir.join(name), text)?;
    }
    Ok(())
}

fn execute(matches: &ArgMatches) -> Result<u8, CliError> {
    let cfg = load(matches)?;
    let quiet = matches.get_flag("quiet");
    match cfg.mode {
        Mode::Simulate => {
            let opts = BatchOptions { force: matches.get_flag("force"), resume: matches.get_flag("resume"), verbose: !quiet };
            let manifest = run_batch(&cfg, opts)?;
            for f in &manifest.files {
                println!("{}\t{}\t{}", f.file, f.seed, f.sha256);
            }
            Ok(exit::PASS)
        }
        Mode::Analyze => {
            let summary = analyze(&cfg)?;
            for r in &summary.reports {
                println!(
                    "{:?}\t{}\testimate={:.6}\tstderr={:.6}\tbound={:.6}",
                    r.verdict, r.check, r.estimate, r.stderr, r.bound
                );
            }
            Ok(if summary.all_passed { exit::PASS } else { exit::CHECK_FAILURE })
        }
        Mode::Oracle | Mode::VerifyAll => {
            let scale = SuiteScale::for_scale(cfg.scale);
            let ids = if cfg.mode == Mode::Oracle { vec![1] } else { criterion_ids() };
            if !quiet && cfg.mode == Mode::VerifyAll && cfg.scale == Scale::Desk {
                eprintln!("running the desk-scale suite; this takes several minutes");
            }
            let report = run_suite(&scale, &ids, |o| println!("{}", o.line()));
            write_json(cfg.output.as_ref(), REPORT_FILE, &report)?;
            Ok(if report.invariant_violation {
                exit::INVARIANT
            } else if report.all_passed {
                exit::PASS
            } else {
                exit::CHECK_FAILURE
            })
        }
    }
}

fn main() -> ExitCode {
    let matches = match command().try_get_matches() {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::USAGE } else { exit::PASS });
        }
    };
    match execute(&matches) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
