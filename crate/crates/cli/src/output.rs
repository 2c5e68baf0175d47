//! `results.csv` and `manifest.json` writers.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

use seqmeas::check::{Bound, Check};

use crate::params::Params;

/// 17 significant digits in scientific notation.
pub fn format_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

pub fn results_csv(checks: &[Check]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["check", "value", "tolerance", "bound", "pass"])?;
    for c in checks {
        let bound = match c.bound {
            Bound::AtMost => "at_most",
            Bound::AtLeast => "at_least",
        };
        w.write_record([
            c.name.as_str(),
            &format_float(c.value),
            &format_float(c.tolerance),
            bound,
            if c.passed() { "true" } else { "false" },
        ])?;
    }
    w.into_inner().context("flushing CSV buffer")
}

#[derive(Serialize)]
pub struct Manifest<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: &'a str,
    pub seed: u64,
    pub threads: usize,
    pub config: Option<String>,
    pub parameters: &'a Params,
    pub outputs: [&'static str; 1],
    pub checks: usize,
    pub failed: Vec<&'a str>,
    pub all_passed: bool,
    pub series: &'a serde_json::Map<String, serde_json::Value>,
}

/// Writes both files into `dir`, creating it if needed.
pub fn write_outputs(dir: &Path, csv: &[u8], manifest: &Manifest) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))?;
    fs::write(dir.join("results.csv"), csv).context("writing results.csv")?;
    let json = serde_json::to_string_pretty(manifest)?;
    fs::write(dir.join("manifest.json"), json + "\n").context("writing manifest.json")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(format_float(0.1), "1.0000000000000001e-1");
        assert_eq!(format_float(f64::INFINITY), "inf");
        let back: f64 = format_float(std::f64::consts::PI).parse().unwrap();
        assert_eq!(back, std::f64::consts::PI);
    }

    #[test]
    fn csv_layout() {
        let bytes = results_csv(&[Check::at_most("a", 0.5, 1.0), Check::at_least("b", 0.5, 1.0)]).unwrap();
        let text = String::from_utf8(bytes).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "check,value,tolerance,bound,pass");
        assert!(lines[1].ends_with("at_most,true"));
        assert!(lines[2].ends_with("at_least,false"));
    }
}
