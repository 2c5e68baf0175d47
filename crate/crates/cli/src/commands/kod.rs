use anyhow::{bail, Result};
use rayon::prelude::*;

use seqmeas::check::Check;
use seqmeas::group_analysis::{abelian_coordinates, kod_histogram, normal_density, HISTOGRAM_HALF_WIDTH};
use seqmeas::operator::Operator;
use seqmeas::presets;
use seqmeas::trajectory::{EnsembleSpec, RecordKind};

use super::Report;
use crate::params::{float, int, text, KeySpec, Params};

pub const KEYS: &[KeySpec] = &[
    text("preset", "qubit-z"),
    float("kappa", "1"),
    float("kappaT", "1"),
    float("dt", "1e-2"),
    int("N", "100000"),
    int("bins", "101"),
];

/// Monte Carlo KOD of a Hermitian Lindblad operator: the `x` coordinate
/// against `N(0, κT)`, and the half-time histograms spliced by convolution
/// against the full-time histogram.
pub fn kod_checks(l: &Operator, kappa: f64, t: f64, dt: f64, n: usize, bins: usize, seed: u64) -> Result<Report> {
    let spec = EnsembleSpec::new(vec![l.clone()], RecordKind::Wiener, kappa, t, dt, n, seed);
    if spec.n_steps < 2 || !spec.n_steps.is_multiple_of(2) {
        bail!("key 'dt': T/dt must be an even number of steps, got {}", spec.n_steps);
    }
    let half = spec.n_steps / 2;
    let sk = kappa.sqrt();
    let samples: Vec<(f64, f64, f64)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let record = spec.record(i)?;
            let coord = abelian_coordinates(l, &record)?;
            let first: f64 = record.increments[..half].iter().sum::<f64>() * sk;
            let second: f64 = record.increments[half..].iter().sum::<f64>() * sk;
            Ok((coord.x, first, second))
        })
        .collect::<seqmeas::Result<_>>()?;

    let var = kappa * spec.total_time();
    let width = HISTOGRAM_HALF_WIDTH * var.sqrt();
    let column = |k: usize| -> Vec<f64> {
        samples
            .iter()
            .map(|s| match k {
                0 => s.0,
                1 => s.1,
                _ => s.2,
            })
            .collect()
    };
    let full = kod_histogram(&column(0), width, bins)?;
    let first = kod_histogram(&column(1), width, bins)?;
    let second = kod_histogram(&column(2), width, bins)?;

    let mut report = Report::default();
    report.check(Check::at_most(
        "kod_histogram_l1",
        full.l1_to(|x| normal_density(x, var)),
        0.02,
    ));
    report.check(Check::at_most(
        "chapman_kolmogorov_splice_l1",
        first.convolve_same_grid(&second)?.l1_between(&full),
        0.03,
    ));
    let mids: Vec<f64> = (0..bins).map(|i| full.midpoint(i)).collect();
    report.series("kod_histogram", &mids, &full.density);
    Ok(report)
}

pub fn run(p: &Params, seed: u64) -> Result<Report> {
    let ls = presets::lindblads(p.str("preset"))?;
    if ls.len() != 1 {
        bail!("key 'preset': the KOD histogram needs a single Hermitian Lindblad operator");
    }
    let kappa = p.f64("kappa");
    kod_checks(
        &ls[0],
        kappa,
        p.f64("kappaT") / kappa,
        p.f64("dt"),
        p.usize("N"),
        p.usize("bins"),
        seed,
    )
}
