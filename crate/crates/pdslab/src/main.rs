//! Command-line front end: verify level-set difference sets, certify
//! association schemes and their fusions, and build and audit regular
//! 2-group actions. Every run emits one JSON report (stdout or --out)
//! and a short human summary on stderr.
//!
//! Exit codes: 0 all checks pass, 1 a verification failed, 2 bad input.

use clap::{Args, Parser, Subcommand};
use pdslab::families::{FamilySpec, FamilySpecJson};
use pdslab::report::{
    error_exit_code, family_spec_from_json_str, resolve_threads, run_regular, run_scheme,
    run_verify_pds, RegularArgs, RegularMode, RunReport, SchemeArgs, VerifyPdsArgs,
};
use pdslab::Error;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "pdslab", version, about = "Partial difference sets, amorphic Cayley schemes, and regular 2-group actions over GF(4)")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Worker threads (falls back to PDSLAB_THREADS, then 1).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write the JSON report to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Verify one form level set as a partial difference set.
    VerifyPds {
        /// Block count.
        #[arg(long)]
        n: usize,
        /// Twist bits, one per block, e.g. "01".
        #[arg(long)]
        e: String,
        /// Form coefficients over {0,1,w,W}, one per block.
        #[arg(long)]
        a: String,
        /// Level value: one of 0, 1, w, W.
        #[arg(long)]
        level: String,
    },
    /// Build the level-class partition and check the scheme axioms.
    Scheme {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        e: String,
        #[arg(long)]
        a: String,
        /// 4 for the full level partition, 3 with the w levels merged.
        #[arg(long)]
        variant: u32,
        /// Also certify every fusion and classify the classes.
        #[arg(long)]
        amorphic: bool,
    },
    /// Build a regular 2-group action and audit its invariants.
    Regular(RegularCli),
}

#[derive(Args)]
struct RegularCli {
    /// Family tag A, B, C or D, or a full family spec as JSON.
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    e: Option<String>,
    #[arg(long)]
    a: Option<String>,
    /// Shear vector (family A).
    #[arg(long)]
    v: Option<String>,
    /// Functional coefficients (families A, B, C).
    #[arg(long)]
    b: Option<String>,
    /// Head twist bit for family D.
    #[arg(long)]
    epsilon: Option<u8>,
    /// Head form coefficient for family D (default 0).
    #[arg(long)]
    alpha: Option<String>,
    /// Tail block count for family D.
    #[arg(long)]
    tail_n: Option<usize>,
    /// Tail twist bits for family D.
    #[arg(long)]
    tail_e: Option<String>,
    /// Tail form coefficients for family D.
    #[arg(long)]
    tail_a: Option<String>,
    /// Tail shear vector for family D.
    #[arg(long)]
    tail_v: Option<String>,
    /// Full triple as JSON: {"tau":{...},"K_gens":[...],"h":"..."}.
    #[arg(long, conflicts_with = "family")]
    custom: Option<String>,
    /// Search for (K, h) from a map descriptor such as
    /// {"kind":"tau","v":"11"}.
    #[arg(long, conflicts_with_all = ["family", "custom"])]
    search: Option<String>,
    /// Also pull every designated class back and re-verify its parameters.
    #[arg(long)]
    pullback: bool,
}

fn regular_mode(cli: &RegularCli) -> Result<RegularMode, Error> {
    if let Some(custom) = &cli.custom {
        let value: serde_json::Value = serde_json::from_str(custom)
            .map_err(|e| Error::InvalidLiteral(format!("{custom}: {e}")))?;
        return Ok(RegularMode::Custom {
            e: cli
                .e
                .clone()
                .ok_or_else(|| Error::InvalidLiteral("--custom needs --e".into()))?,
            a: cli
                .a
                .clone()
                .ok_or_else(|| Error::InvalidLiteral("--custom needs --a".into()))?,
            custom: value,
        });
    }
    if let Some(search) = &cli.search {
        let descriptor: serde_json::Value = serde_json::from_str(search)
            .map_err(|e| Error::InvalidLiteral(format!("{search}: {e}")))?;
        return Ok(RegularMode::Search {
            e: cli
                .e
                .clone()
                .ok_or_else(|| Error::InvalidLiteral("--search needs --e".into()))?,
            a: cli
                .a
                .clone()
                .ok_or_else(|| Error::InvalidLiteral("--search needs --a".into()))?,
            descriptor,
        });
    }
    let family = cli
        .family
        .clone()
        .ok_or_else(|| Error::FamilySpec("one of --family, --custom, --search required".into()))?;
    if family.starts_with('{') {
        return Ok(RegularMode::Family(family_spec_from_json_str(&family)?));
    }
    let json = match family.as_str() {
        "D" => FamilySpecJson {
            family,
            n: cli.tail_n,
            e: Some(cli.tail_e.clone().unwrap_or_default()),
            a: Some(cli.tail_a.clone().unwrap_or_default()),
            v: Some(cli.tail_v.clone().unwrap_or_default()),
            b: None,
            epsilon: cli.epsilon,
            alpha: cli.alpha.clone(),
        },
        _ => FamilySpecJson {
            family,
            n: cli.n,
            e: cli.e.clone(),
            a: cli.a.clone(),
            v: cli.v.clone(),
            b: cli.b.clone(),
            epsilon: None,
            alpha: None,
        },
    };
    let spec = FamilySpec::from_json(&json)?;
    // n flags are redundant with the vector lengths; reject mismatches
    let expected_n = match &spec {
        FamilySpec::A { e, .. } | FamilySpec::B { e, .. } | FamilySpec::C { e, .. } => {
            (cli.n, e.len())
        }
        FamilySpec::D { e, .. } => (cli.tail_n, e.len()),
    };
    if let (Some(n), len) = expected_n {
        if n != len {
            return Err(Error::FamilySpec(format!(
                "block-count flag {n} does not match the vector length {len}"
            )));
        }
    }
    Ok(RegularMode::Family(spec))
}

fn emit(report: &RunReport, out: Option<&PathBuf>) -> std::io::Result<()> {
    let json = report.to_json();
    match out {
        Some(path) => std::fs::write(path, json + "\n")?,
        None => println!("{json}"),
    }
    eprint!("{}", report.render_human());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = resolve_threads(cli.threads);
    let result = match &cli.cmd {
        Cmd::VerifyPds { n, e, a, level } => run_verify_pds(&VerifyPdsArgs {
            n: *n,
            e: e.clone(),
            a: a.clone(),
            level: level.clone(),
            threads,
        }),
        Cmd::Scheme {
            n,
            e,
            a,
            variant,
            amorphic,
        } => run_scheme(&SchemeArgs {
            n: *n,
            e: e.clone(),
            a: a.clone(),
            variant: *variant,
            amorphic: *amorphic,
            threads,
        }),
        Cmd::Regular(rcli) => regular_mode(rcli).and_then(|mode| {
            run_regular(&RegularArgs {
                mode,
                pullback: rcli.pullback,
                threads,
            })
        }),
    };
    match result {
        Ok(report) => {
            if let Err(e) = emit(&report, cli.out.as_ref()) {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            if report.ok() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(error_exit_code(&e) as u8)
        }
    }
}
