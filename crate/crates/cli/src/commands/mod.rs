//! One module per subcommand. Each declares its keys and returns checks.

use anyhow::Result;
use serde_json::{Map, Value};

use seqmeas::check::Check;
use seqmeas::fit::loglog_slope;

use crate::params::{KeySpec, Params};

pub mod commutative;
pub mod dilate;
pub mod haar;
pub mod iga;
pub mod intertwine;
pub mod kod;
pub mod semigroup;
pub mod unravel;
pub mod weakcomm;

/// Checks plus auxiliary series recorded in the manifest.
#[derive(Debug, Default)]
pub struct Report {
    pub checks: Vec<Check>,
    pub series: Map<String, Value>,
}

impl Report {
    pub fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn series(&mut self, name: &str, xs: &[f64], ys: &[f64]) {
        let rows: Vec<Value> = xs.iter().zip(ys).map(|(x, y)| serde_json::json!([x, y])).collect();
        self.series.insert(name.to_string(), Value::Array(rows));
    }
}

pub type Runner = fn(&Params, u64) -> Result<Report>;

pub struct Command {
    pub name: &'static str,
    pub keys: &'static [KeySpec],
    pub run: Runner,
}

pub const COMMANDS: [Command; 9] = [
    Command {
        name: "unravel",
        keys: unravel::KEYS,
        run: unravel::run,
    },
    Command {
        name: "semigroup",
        keys: semigroup::KEYS,
        run: semigroup::run,
    },
    Command {
        name: "dilate",
        keys: dilate::KEYS,
        run: dilate::run,
    },
    Command {
        name: "intertwine",
        keys: intertwine::KEYS,
        run: intertwine::run,
    },
    Command {
        name: "commutative",
        keys: commutative::KEYS,
        run: commutative::run,
    },
    Command {
        name: "iga",
        keys: iga::KEYS,
        run: iga::run,
    },
    Command {
        name: "haar",
        keys: haar::KEYS,
        run: haar::run,
    },
    Command {
        name: "weakcomm",
        keys: weakcomm::KEYS,
        run: weakcomm::run,
    },
    Command {
        name: "kod",
        keys: kod::KEYS,
        run: kod::run,
    },
];

pub fn find(name: &str) -> Option<&'static Command> {
    COMMANDS.iter().find(|c| c.name == name)
}

pub fn known_sections() -> Vec<(&'static str, &'static [KeySpec])> {
    COMMANDS.iter().map(|c| (c.name, c.keys)).collect()
}

/// Fitted log-log slope, NaN when undefined (which fails any bound).
pub(crate) fn order(xs: &[f64], ys: &[f64]) -> f64 {
    loglog_slope(xs, ys).unwrap_or(f64::NAN)
}

/// Order check on a residual sweep. When every residual is already below
/// `floor` there is nothing left to converge, and the check becomes the
/// bound on the largest residual instead.
pub(crate) fn order_or_floor(name: &str, xs: &[f64], ys: &[f64], min_order: f64, floor: f64) -> Check {
    let largest = ys.iter().copied().fold(0.0, f64::max);
    if largest <= floor {
        Check::at_most(format!("{name}_max_residual"), largest, floor)
    } else {
        Check::at_least(name, order(xs, ys), min_order)
    }
}

/// Step sizes `κdt` used for order fits.
pub(crate) const KDT_SWEEP: [f64; 3] = [1e-2, 1e-3, 1e-4];
