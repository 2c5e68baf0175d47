use anyhow::Result;

use seqmeas::iga::suite::affine_suite;

use super::Report;
use crate::params::{KeySpec, Params};

pub const KEYS: &[KeySpec] = &[];

pub fn run(_p: &Params, seed: u64) -> Result<Report> {
    Ok(Report {
        checks: affine_suite(seed)?,
        ..Report::default()
    })
}
