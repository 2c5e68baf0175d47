use anyhow::{bail, Result};

use seqmeas::check::Check;
use seqmeas::group_analysis::{commutator_ensemble, weak_commutator_residual};
use seqmeas::presets;
use seqmeas::random::stream_rng;

use super::{order, Report, KDT_SWEEP};
use crate::params::{float, int, text, KeySpec, Params};

pub const KEYS: &[KeySpec] = &[
    text("preset", "qubit-xy"),
    float("kappa", "1"),
    float("dt", "1e-3"),
    int("N", "10000"),
];

pub fn run(p: &Params, seed: u64) -> Result<Report> {
    let ls = presets::lindblads(p.str("preset"))?;
    if ls.len() < 2 {
        bail!("key 'preset': the weak commutator needs two Lindblad operators");
    }
    let (l, m) = (&ls[0], &ls[1]);
    let kappa = p.f64("kappa");
    let mut report = Report::default();

    // Typical increments dW = √dt, dV = −0.8√dt.
    let (mut bch, mut ident) = (Vec::new(), Vec::new());
    for kdt in KDT_SWEEP {
        let dt = kdt / kappa;
        let r = weak_commutator_residual(l, m, dt.sqrt(), -0.8 * dt.sqrt(), kappa, dt)?;
        bch.push(r.to_bch);
        ident.push(r.to_identity);
    }
    report.series("bch_residual", &KDT_SWEEP, &bch);
    report.series("identity_residual", &KDT_SWEEP, &ident);
    report.check(Check::at_least("bch_residual_order", order(&KDT_SWEEP, &bch), 1.4));

    let ens = commutator_ensemble(l, m, kappa, p.f64("dt"), p.usize("N"), &mut stream_rng(seed, 0))?;
    report.check(Check::at_most(
        "commutator_mean_in_stderr_units",
        ens.mean_norm / ens.stderr,
        5.0,
    ));
    Ok(report)
}
