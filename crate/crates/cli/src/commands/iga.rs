use std::path::Path;
use std::sync::Arc;

use anyhow::{Context, Result};

use seqmeas::iga::finite::{builtin, regular_representation, FiniteGroup};
use seqmeas::iga::suite::finite_suite;

use super::Report;
use crate::params::{text, KeySpec, Params};

pub const KEYS: &[KeySpec] = &[text("group", "s3")];

/// Built-in groups use their faithful irreducible representation as well as
/// the regular one; a table file gets the regular representation only.
pub fn run(p: &Params, seed: u64) -> Result<Report> {
    let name = p.str("group");
    let mut report = Report::default();
    let (group, irrep) = match builtin(name) {
        Ok((g, rep)) => (g, Some(rep)),
        Err(_) if Path::new(name).is_file() => {
            let text = std::fs::read_to_string(name).with_context(|| format!("reading group table {name}"))?;
            (Arc::new(FiniteGroup::parse(name, &text)?), None)
        }
        Err(e) => return Err(anyhow::anyhow!("key 'group': {e} (or pass a table file)")),
    };
    if let Some(rep) = irrep {
        for mut c in finite_suite(&group, &rep, seed)? {
            c.name = format!("irrep.{}", c.name);
            report.check(c);
        }
    }
    let regular = regular_representation(Arc::clone(&group))?;
    for mut c in finite_suite(&group, &regular, seed)? {
        c.name = format!("regular.{}", c.name);
        report.check(c);
    }
    Ok(report)
}
