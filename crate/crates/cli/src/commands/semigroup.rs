use anyhow::Result;

use seqmeas::check::Check;
use seqmeas::instrument::{
    convolve, diffusive_weak, jump_weak_multi, repeat, total_operation, Atom, Instrument, InstrumentKind,
};
use seqmeas::presets;
use seqmeas::random::{random_kraus_set, stream_rng};
use seqmeas::superop::{channel_exp, lindblad_dissipator};

use super::Report;
use crate::params::{float, int, text, KeySpec, Params};

pub const KEYS: &[KeySpec] = &[
    text("preset", "qubit-decay"),
    float("kappa", "1"),
    float("dt", "1e-2"),
    int("pairs", "50"),
    int("max_repeat", "6"),
    int("nodes", "5"),
];

fn random_instrument<R: rand::Rng>(rng: &mut R) -> Result<Instrument> {
    let atoms = random_kraus_set(2, 3, rng)
        .into_iter()
        .map(|kraus| Atom { weight: 1.0, kraus })
        .collect();
    Ok(Instrument::new(2, InstrumentKind::Discrete, atoms)?)
}

pub fn run(p: &Params, seed: u64) -> Result<Report> {
    let ls = presets::lindblads(p.str("preset"))?;
    let (kappa, dt) = (p.f64("kappa"), p.f64("dt"));
    let mut report = Report::default();

    let mut rng = stream_rng(seed, 0);
    let mut worst: f64 = 0.0;
    for _ in 0..p.usize("pairs") {
        let a = random_instrument(&mut rng)?;
        let b = random_instrument(&mut rng)?;
        let lhs = total_operation(&convolve(&b, &a)?);
        worst = worst.max(lhs.frob_dist(&total_operation(&b).compose(&total_operation(&a))));
    }
    report.check(Check::at_most("convolution_total_homomorphism", worst, 1e-12));

    let weak = [
        ("jump", jump_weak_multi(&ls, kappa, dt)?),
        ("diffusive", diffusive_weak(&ls[0], kappa, dt, p.usize("nodes"))?),
    ];
    for (label, inst) in &weak {
        let z = total_operation(inst);
        for n in 1..=p.usize("max_repeat") as u32 {
            let lhs = total_operation(&repeat(inst, n)?);
            report.check(Check::at_most(
                format!("repeat_{label}[n={n}]"),
                lhs.frob_dist(&z.powi(n)),
                1e-11,
            ));
        }
    }

    let d = lindblad_dissipator(&ls)?;
    let (s, t) = (0.3 * kappa, 0.7 * kappa);
    let split = channel_exp(&d, s)?.compose(&channel_exp(&d, t)?);
    report.check(Check::at_most(
        "channel_semigroup",
        split.frob_dist(&channel_exp(&d, s + t)?),
        1e-12,
    ));
    Ok(report)
}
