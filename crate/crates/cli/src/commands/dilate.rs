use anyhow::Result;

use seqmeas::check::Check;
use seqmeas::dilation::{
    fock_amplitudes, interaction_unitary, jump_dilation_instrument, jump_kraus_extract, local_oscillator_phase,
    povm_marginal, quadrature_dilation_instrument, quadrature_extraction_error, quadrature_kraus_extract,
    quadrature_split_form_check, unitarity_defect, MeterModel, QGrid,
};
use seqmeas::instrument::{diffusive_weak, jump_weak, total_operation, DEFAULT_NODES};
use seqmeas::operator::pauli::{sigma_x, sigma_y};
use seqmeas::operator::Operator;
use seqmeas::presets;

use super::{order_or_floor, Report, KDT_SWEEP};
use crate::params::{float, int, text, KeySpec, Params};

pub const KEYS: &[KeySpec] = &[
    text("preset", "qubit-decay"),
    float("kappa", "1"),
    int("cutoff", "40"),
    float("sigma", "1"),
    int("grid", "801"),
    float("extract_kdt", "1e-3"),
    float("phi", "1.5707963267948966"),
];

/// Residuals below this are rounding.
const ROUNDING_FLOOR: f64 = 1e-13;
/// Discretization floor of the ±6σ pointer grid against Gauss–Hermite nodes.
const GRID_FLOOR: f64 = 1e-8;

pub fn run(p: &Params, _seed: u64) -> Result<Report> {
    let l = presets::lindblads(p.str("preset"))?.swap_remove(0);
    let kappa = p.f64("kappa");
    let sigma = p.f64("sigma");
    let grid = QGrid::new(sigma, seqmeas::dilation::GRID_HALF_WIDTH, p.usize("grid"))?;
    let meter = |kdt: f64| {
        let mut m = MeterModel::new(l.dim(), kappa, kdt / kappa).with_cutoff(p.usize("cutoff"));
        m.sigma = sigma;
        m
    };
    let id = Operator::identity(l.dim());
    let ldl = &l.dagger() * &l;
    let mut report = Report::default();

    let (mut n0, mut n1, mut n2) = (Vec::new(), Vec::new(), Vec::new());
    let (mut jump_total, mut quad_total, mut split_total) = (Vec::new(), Vec::new(), Vec::new());
    let x = sigma_x().scale_real(0.5);
    let y = sigma_y().scale_real(0.5);
    for kdt in KDT_SWEEP {
        let m = meter(kdt);
        let u = interaction_unitary(&l, &m)?;
        report.check(Check::at_most(
            format!("unitarity_low_sector[kdt={kdt:e}]"),
            unitarity_defect(&u, &m, m.fock_cutoff - 5),
            1e-9,
        ));
        let mut completeness = Operator::zeros(l.dim());
        for k in fock_amplitudes(&u, &m) {
            completeness += &(&k.dagger() * &k);
        }
        report.check(Check::at_most(
            format!("number_completeness[kdt={kdt:e}]"),
            completeness.max_abs_diff(&id),
            1e-10,
        ));
        n0.push(jump_kraus_extract(&l, &m, 0)?.frob_dist(&ldl.scale_real(-0.5 * kdt).exp()?));
        n1.push(jump_kraus_extract(&l, &m, 1)?.frob_dist(&l.scale_real(kdt.sqrt())));
        n2.push(jump_kraus_extract(&l, &m, 2)?.frob_norm());
        jump_total.push(
            total_operation(&jump_dilation_instrument(&l, &m, 2)?).frob_dist(&total_operation(&jump_weak(
                &l,
                kappa,
                kdt / kappa,
            )?)),
        );
        quad_total.push(
            total_operation(&quadrature_dilation_instrument(&l, &m, &grid)?).frob_dist(&total_operation(
                &diffusive_weak(&l, kappa, kdt / kappa, DEFAULT_NODES)?,
            )),
        );
        split_total.push(quadrature_split_form_check(&x, &y, &m, &grid)?.total_operation_residual);
    }
    report.series("jump_n0_residual", &KDT_SWEEP, &n0);
    report.series("jump_n1_residual", &KDT_SWEEP, &n1);
    report.series("jump_n2_norm", &KDT_SWEEP, &n2);
    report.series("jump_dilation_total_distance", &KDT_SWEEP, &jump_total);
    report.series("quadrature_dilation_total_distance", &KDT_SWEEP, &quad_total);
    report.series("split_form_total_residual", &KDT_SWEEP, &split_total);
    report.check(order_or_floor("jump_n0_order", &KDT_SWEEP, &n0, 1.8, ROUNDING_FLOOR));
    report.check(order_or_floor("jump_n1_order", &KDT_SWEEP, &n1, 1.4, ROUNDING_FLOOR));
    report.check(order_or_floor(
        "jump_dilation_total_order",
        &KDT_SWEEP,
        &jump_total,
        1.4,
        ROUNDING_FLOOR,
    ));
    report.check(order_or_floor(
        "quadrature_dilation_total_order",
        &KDT_SWEEP,
        &quad_total,
        1.4,
        GRID_FLOOR,
    ));
    report.check(order_or_floor(
        "split_form_total_order",
        &KDT_SWEEP,
        &split_total,
        1.4,
        ROUNDING_FLOOR,
    ));

    let m = meter(p.f64("extract_kdt"));
    report.check(Check::at_most(
        "quadrature_extraction_relative_l2",
        quadrature_extraction_error(&l, &m, &grid)?,
        1e-3,
    ));
    let kraus = quadrature_kraus_extract(&l, &m, &grid)?;
    report.check(Check::at_most(
        "povm_marginal",
        povm_marginal(&kraus, &grid).max_abs_diff(&id),
        1e-8,
    ));
    report.check(Check::at_most(
        "local_oscillator_phase",
        local_oscillator_phase(&l, p.f64("phi"), &m, &grid)?.max_residual,
        1e-8,
    ));
    Ok(report)
}
