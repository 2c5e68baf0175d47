use anyhow::Result;

use seqmeas::check::Check;
use seqmeas::commutative::{characteristic_eigenvalue, exact_kod, fpk_evolve, normalized_total, GridDensity};
use seqmeas::group_analysis::normal_density;
use seqmeas::operator::pauli::sigma_z;

use super::{kod::kod_checks, order, Report};
use crate::params::{float, int, KeySpec, Params};

pub const KEYS: &[KeySpec] = &[
    float("ell", "0.7"),
    float("kappa", "1"),
    float("kappaT", "1"),
    float("dt", "1e-3"),
    float("fpk_kappaT", "0.5"),
    int("N", "100000"),
    float("mc_dt", "1e-2"),
];

/// Grid spacings for the Fokker–Planck convergence study.
const FPK_DX: [f64; 3] = [0.1, 0.05, 0.025];
/// Width of the initial `x` profile; the exact marginal is `N(0, κt + w²)`.
const FPK_WIDTH: f64 = 0.2;
const FPK_R_WIDTH: f64 = 0.04;

pub fn run(p: &Params, seed: u64) -> Result<Report> {
    let (ell, kappa, dt) = (p.f64("ell"), p.f64("kappa"), p.f64("dt"));
    let mut report = Report::default();

    let eig = characteristic_eigenvalue(ell, dt, kappa);
    let target = (2.0 * ell * ell * kappa * dt).exp();
    report.check(Check::at_most("characteristic_eigenvalue", (eig - target).abs(), 1e-10));
    report.check(Check::at_most(
        "normalized_step_total",
        (normalized_total(ell, dt, kappa) - 1.0).abs(),
        1e-10,
    ));
    let t = p.f64("kappaT") / kappa;
    report.check(Check::at_most(
        "tp_integral",
        (exact_kod(t, kappa)?.tp_integral(ell) - 1.0).abs(),
        1e-8,
    ));

    let t_fpk = p.f64("fpk_kappaT") / kappa;
    let var = kappa * t_fpk + FPK_WIDTH * FPK_WIDTH;
    let mut l1 = Vec::new();
    for dx in FPK_DX {
        let nx = (12.0 / dx).round() as usize;
        let init = GridDensity::mollified_delta((-0.5, 1.5), 100, (-6.0, 6.0), nx, 0.0, FPK_R_WIDTH, FPK_WIDTH);
        let solver_dt = 0.2 * dx * dx / kappa;
        let out = fpk_evolve(&init, kappa, t_fpk, solver_dt)?;
        l1.push(out.x_marginal_l1(|x| normal_density(x, var)));
        report.check(Check::at_most(
            format!("fpk_mass_defect[dx={dx}]"),
            (out.mass() - 1.0).abs(),
            1e-12,
        ));
    }
    report.series("fpk_x_marginal_l1", &FPK_DX, &l1);
    report.check(Check::at_most("fpk_x_marginal_l1", l1[l1.len() - 1], 1e-2));
    report.check(Check::at_most(
        "fpk_order_deviation",
        (order(&FPK_DX, &l1) - 2.0).abs(),
        0.2,
    ));

    let kod = kod_checks(
        &sigma_z().scale_real(0.5),
        kappa,
        t,
        p.f64("mc_dt"),
        p.usize("N"),
        101,
        seed,
    )?;
    report.checks.extend(kod.checks);
    report.series.extend(kod.series);
    Ok(report)
}
