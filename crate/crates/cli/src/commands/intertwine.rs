use anyhow::Result;

use seqmeas::check::Check;
use seqmeas::group_analysis::{
    adjoint_intertwining_check, derivative_commutator, differential_intertwining_check, generator_intertwining_check,
    right_derivative_superop, right_inv_derivative, right_inv_derivative_superop, total_intertwining_check,
    translation_intertwining_check, GeneratorKind, RepPoint, NESTED_ORDER_STEPS, ORDER_STEPS,
};
use seqmeas::instrument::{WeakKind, WeakSpec};
use seqmeas::presets;
use seqmeas::random::{random_ginibre, stream_rng};

use super::{order, Report};
use crate::params::{float, text, KeySpec, Params};

pub const KEYS: &[KeySpec] = &[text("preset", "qubit-decay"), float("kappa", "1"), float("dt", "1e-2")];

const EXACT_TOL: f64 = 1e-12;

pub fn run(p: &Params, seed: u64) -> Result<Report> {
    let ls = presets::lindblads(p.str("preset"))?;
    let (kappa, dt) = (p.f64("kappa"), p.f64("dt"));
    let dim = ls[0].dim();
    let mut rng = stream_rng(seed, 0);
    let mut point = || {
        let g = random_ginibre(dim, &mut rng);
        RepPoint::new(g.scale_real(1.0 / g.frob_norm()))
    };
    let (x, g) = (point()?, point()?);
    let direction = random_ginibre(dim, &mut rng);
    let mut report = Report::default();

    report.check(Check::at_most(
        "translation",
        translation_intertwining_check(&g, &x),
        EXACT_TOL,
    ));
    report.check(Check::at_most("adjoint", adjoint_intertwining_check(&x), EXACT_TOL));
    for (i, l) in ls.iter().enumerate() {
        report.check(Check::at_most(
            format!("differential[L{i}]"),
            differential_intertwining_check(l, &x)?,
            EXACT_TOL,
        ));
    }
    for (label, kind) in [("jump", WeakKind::Jump), ("diffusive", WeakKind::Diffusive)] {
        let inst = WeakSpec::new(ls.clone(), kappa, dt, kind).build()?;
        report.check(Check::at_most(
            format!("total_operation[{label}]"),
            total_intertwining_check(&inst, &x)?,
            EXACT_TOL,
        ));
    }
    for (label, kind) in [("jump", GeneratorKind::Jump), ("diffusive", GeneratorKind::Diffusive)] {
        report.check(Check::at_most(
            format!("generator[{label}]"),
            generator_intertwining_check(&ls, &x, kind)?,
            EXACT_TOL,
        ));
    }

    // Central differences against their exact limits.
    let exact_op = &direction * x.kraus();
    let exact_super = right_derivative_superop(&direction).compose(&x.element());
    let b = &ls[0];
    let exact_comm = &(&(b * &direction) - &(&direction * b)) * x.kraus();
    let (mut op_err, mut super_err, mut comm_err) = (Vec::new(), Vec::new(), Vec::new());
    for h in ORDER_STEPS {
        op_err.push(right_inv_derivative(&direction, &x, h)?.frob_dist(&exact_op));
        super_err.push(right_inv_derivative_superop(&direction, &x, h)?.frob_dist(&exact_super));
    }
    for h in NESTED_ORDER_STEPS {
        comm_err.push(derivative_commutator(&direction, b, &x, h)?.frob_dist(&exact_comm));
    }
    for (name, steps, errs) in [
        ("fd_kraus_derivative_order_deviation", &ORDER_STEPS, &op_err),
        ("fd_superop_derivative_order_deviation", &ORDER_STEPS, &super_err),
        (
            "fd_derivative_commutator_order_deviation",
            &NESTED_ORDER_STEPS,
            &comm_err,
        ),
    ] {
        report.series(name, steps, errs);
        report.check(Check::at_most(name, (order(steps, errs) - 2.0).abs(), 0.2));
    }
    Ok(report)
}
