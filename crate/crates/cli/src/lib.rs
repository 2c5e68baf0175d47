//! Command-line experiment runner over the `seqmeas` library.

use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{anyhow, Result};
use clap::{Parser, Subcommand};

pub mod commands;
pub mod output;
pub mod params;

use params::{ConfigFile, Params};

#[derive(Debug, Parser)]
#[command(
    name = "seqmeas",
    version,
    about = "Seeded experiments on sequential quantum measurement"
)]
pub struct Cli {
    /// Config file with top-level `seed`, `out`, `threads` and one
    /// `[subcommand]` table of keys.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory for `results.csv` and `manifest.json`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads; 0 uses every core. Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

/// Flags shared by the subcommands; each subcommand accepts the subset
/// matching its keys.
#[derive(Debug, Default, clap::Args)]
pub struct Flags {
    /// Lindblad preset: qubit-decay, qubit-z, qubit-xy or spinhalf-ism.
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long = "kappaT")]
    pub kappa_t: Option<String>,
    #[arg(long)]
    pub dt: Option<String>,
    /// Sample count.
    #[arg(long = "N")]
    pub n: Option<String>,
    /// Group name (z2, s3, q8) or a table file.
    #[arg(long)]
    pub group: Option<String>,
    #[arg(long)]
    pub ell: Option<String>,
    /// Any other subcommand key, as `key=value`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Trajectory ensemble against the exact channel.
    Unravel(Flags),
    /// Convolution homomorphism and repeat tables.
    Semigroup(Flags),
    /// Meter dilation residuals and orders.
    Dilate(Flags),
    /// Intertwining residuals and finite-difference orders.
    Intertwine(Flags),
    /// Commutative analog suite.
    Commutative(Flags),
    /// Finite-group algebra identities.
    Iga(Flags),
    /// Affine-group Haar, modular and delta identities.
    Haar(Flags),
    /// Weak group commutator residuals.
    Weakcomm(Flags),
    /// Abelian KOD histogram against the Gaussian.
    Kod(Flags),
}

impl Command {
    fn parts(&self) -> (&'static str, &Flags) {
        match self {
            Command::Unravel(f) => ("unravel", f),
            Command::Semigroup(f) => ("semigroup", f),
            Command::Dilate(f) => ("dilate", f),
            Command::Intertwine(f) => ("intertwine", f),
            Command::Commutative(f) => ("commutative", f),
            Command::Iga(f) => ("iga", f),
            Command::Haar(f) => ("haar", f),
            Command::Weakcomm(f) => ("weakcomm", f),
            Command::Kod(f) => ("kod", f),
        }
    }
}

fn top_level<T: std::str::FromStr>(cfg: &ConfigFile, key: &str) -> Result<Option<T>> {
    cfg.top
        .get(key)
        .map(|v| {
            v.parse::<T>()
                .map_err(|_| anyhow!("config key '{key}': cannot parse '{v}'"))
        })
        .transpose()
}

/// Runs one subcommand and writes its outputs. Returns whether every check
/// passed.
pub fn execute(cli: &Cli) -> Result<bool> {
    let known = commands::known_sections();
    let cfg = match &cli.config {
        Some(path) => ConfigFile::load(path, &known)?,
        None => ConfigFile::default(),
    };
    let seed = match cli.seed {
        Some(s) => s,
        None => top_level(&cfg, "seed")?.unwrap_or(1),
    };
    let out = match &cli.out {
        Some(o) => o.clone(),
        None => top_level::<PathBuf>(&cfg, "out")?.unwrap_or_else(|| PathBuf::from("out")),
    };
    let threads = match cli.threads {
        Some(t) => t,
        None => top_level(&cfg, "threads")?.unwrap_or(0),
    };
    if threads > 0 {
        // A pool may already exist when called repeatedly in one process.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }

    let (name, flags) = cli.command.parts();
    let command = commands::find(name).expect("every subcommand is registered");
    let mut flag_values: Vec<(&str, Option<String>)> = vec![
        ("preset", flags.preset.clone()),
        ("kappaT", flags.kappa_t.clone()),
        ("dt", flags.dt.clone()),
        ("N", flags.n.clone()),
        ("group", flags.group.clone()),
        ("ell", flags.ell.clone()),
    ];
    for kv in &flags.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| anyhow!("--set expects KEY=VALUE, got '{kv}'"))?;
        flag_values.push((k.trim(), Some(v.to_string())));
    }
    let empty = BTreeMap::new();
    let section = cfg.sections.get(name).unwrap_or(&empty);
    let params = Params::resolve(command.keys, section, &flag_values)?;

    log::info!("running {name} with seed {seed}");
    let report = (command.run)(&params, seed)?;
    let csv = output::results_csv(&report.checks)?;
    let failed: Vec<&str> = report
        .checks
        .iter()
        .filter(|c| !c.passed())
        .map(|c| c.name.as_str())
        .collect();
    let all_passed = failed.is_empty();
    let manifest = output::Manifest {
        tool: "seqmeas",
        version: env!("CARGO_PKG_VERSION"),
        subcommand: name,
        seed,
        threads,
        config: cli.config.as_ref().map(|p| p.display().to_string()),
        parameters: &params,
        outputs: ["results.csv"],
        checks: report.checks.len(),
        failed: failed.clone(),
        all_passed,
        series: &report.series,
    };
    output::write_outputs(&out, &csv, &manifest)?;

    for c in &report.checks {
        let rel = match c.bound {
            seqmeas::check::Bound::AtMost => "<=",
            seqmeas::check::Bound::AtLeast => ">=",
        };
        let verdict = if c.passed() { "PASS" } else { "FAIL" };
        println!("{verdict} {:<52} {:>12.4e} {rel} {:.1e}", c.name, c.value, c.tolerance);
    }
    println!(
        "{name}: {}/{} checks passed; results in {}",
        report.checks.len() - failed.len(),
        report.checks.len(),
        out.display()
    );
    Ok(all_passed)
}
