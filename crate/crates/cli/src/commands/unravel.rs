use anyhow::{bail, Result};

use seqmeas::check::Check;
use seqmeas::instrument::{total_operation, WeakKind, WeakSpec};
use seqmeas::presets;
use seqmeas::superop::{channel_exp, lindblad_dissipator};
use seqmeas::trajectory::{checkpoint_rows, ensemble_checkpoints, EnsembleSpec, RecordKind};

use super::{order_or_floor, Report, KDT_SWEEP};
use crate::params::{float, int, text, KeySpec, Params};

pub const KEYS: &[KeySpec] = &[
    text("preset", "qubit-decay"),
    text("kind", "diffusive"),
    float("kappa", "1"),
    float("kappaT", "1"),
    float("dt", "1e-3"),
    int("N", "10000"),
    int("checkpoints", "4"),
];

pub fn run(p: &Params, seed: u64) -> Result<Report> {
    let ls = presets::lindblads(p.str("preset"))?;
    let record = match p.str("kind") {
        "diffusive" => RecordKind::Wiener,
        "jump" => RecordKind::Poisson,
        other => bail!("key 'kind': expected 'diffusive' or 'jump', got '{other}'"),
    };
    let kappa = p.f64("kappa");
    let dt = p.f64("dt");
    let n = p.usize("N");
    let mut report = Report::default();

    // Weak instruments against the exact channel over one step.
    let d = lindblad_dissipator(&ls)?;
    for kind in [WeakKind::Jump, WeakKind::Diffusive] {
        let label = match kind {
            WeakKind::Jump => "jump",
            WeakKind::Diffusive => "diffusive",
        };
        let mut dist = Vec::new();
        for kdt in KDT_SWEEP {
            let inst = WeakSpec::new(ls.clone(), kappa, kdt / kappa, kind).build()?;
            dist.push(total_operation(&inst).frob_dist(&channel_exp(&d, kdt)?));
        }
        report.series(&format!("weak_{label}_step_distance"), &KDT_SWEEP, &dist);
        report.check(order_or_floor(
            &format!("weak_{label}_order"),
            &KDT_SWEEP,
            &dist,
            1.8,
            1e-13,
        ));
    }

    let spec = EnsembleSpec::new(ls, record, kappa, p.f64("kappaT") / kappa, dt, n, seed);
    if spec.n_steps == 0 {
        bail!("key 'dt': kappaT/kappa must span at least one step");
    }
    let c = p.usize("checkpoints").clamp(1, spec.n_steps);
    let marks: Vec<usize> = (1..=c).map(|k| k * spec.n_steps / c).collect();
    let estimates = ensemble_checkpoints(&spec, &marks)?;
    let tol = 5.0 / (n as f64).sqrt() + 10.0 * kappa * dt;
    for row in checkpoint_rows(&spec, &estimates)? {
        let t = format!("{:.6}", kappa * row.time);
        report.check(Check::at_most(format!("channel_distance[kt={t}]"), row.distance, tol));
        report.check(Check::at_most(
            format!("mean_weight_deviation[kt={t}]"),
            (row.mean_weight - 1.0).abs(),
            5.0 * row.weight_stderr + 1e-12,
        ));
    }
    Ok(report)
}
