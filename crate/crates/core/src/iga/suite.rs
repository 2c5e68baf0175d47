//! Identity suites for the finite-group algebra and the affine group.

use std::sync::Arc;

use rand::Rng;

use super::affine::{self, AffineElement, AffineWindow, DeltaIdentity, GaussianBump, HaarSide};
use super::finite::{
    convolve_fg, iga_superop_rep, kolmogorov_adjoint, FiniteGroup, GroupAlgebraElement, Representation,
};
use crate::check::Check;
use crate::error::Result;
use crate::fit::loglog_slope;
use crate::random::stream_rng;

/// Tolerance for identities that hold exactly on finite groups.
pub const EXACT_TOL: f64 = 1e-13;

fn delta_values(group: &FiniteGroup) -> Vec<f64> {
    group
        .elements()
        .map(|x| if x == group.identity() { 1.0 } else { 0.0 })
        .collect()
}

/// Every finite-group identity, with random elements drawn from `seed`.
pub fn finite_suite(group: &Arc<FiniteGroup>, rep: &Representation, seed: u64) -> Result<Vec<Check>> {
    let mut rng = stream_rng(seed, 0);
    let random = |rng: &mut rand_chacha::ChaCha8Rng| GroupAlgebraElement::random(Arc::clone(group), rng);
    let (f, g, h) = (random(&mut rng), random(&mut rng), random(&mut rng));
    let dagger = rep.dagger_map()?;
    let mut checks = Vec::new();
    let mut push = |name: &str, residual: f64| checks.push(Check::at_most(name, residual, EXACT_TOL));

    let fg_h = convolve_fg(&convolve_fg(&f, &g)?, &h)?;
    let f_gh = convolve_fg(&f, &convolve_fg(&g, &h)?)?;
    push("convolution_associativity", fg_h.max_abs_diff(&f_gh));

    let e = GroupAlgebraElement::delta(Arc::clone(group), group.identity());
    push(
        "delta_unit",
        convolve_fg(&e, &f)?
            .max_abs_diff(&f)
            .max(convolve_fg(&f, &e)?.max_abs_diff(&f)),
    );

    let mut hom: f64 = 0.0;
    let mut adj: f64 = 0.0;
    let mut stochastic: f64 = 0.0;
    let positive: Vec<f64> = group.elements().map(|_| rng.random::<f64>()).collect();
    let positive = GroupAlgebraElement::new(Arc::clone(group), positive.iter().map(|&p| p.into()).collect())?;
    for a in group.elements() {
        let la = group.left_translation_matrix(a);
        for b in group.elements() {
            let lab = &la * &group.left_translation_matrix(b);
            hom = hom.max(lab.max_abs_diff(&group.left_translation_matrix(group.mul(a, b))));
        }
        adj = adj.max(kolmogorov_adjoint(&la).max_abs_diff(&group.left_translation_matrix(group.inv(a))));
        for col in group.elements() {
            let sum: f64 = group.elements().map(|row| la[(row, col)].re).sum();
            stochastic = stochastic.max((sum - 1.0).abs());
        }
        stochastic = stochastic.max((positive.apply(&la).l1_norm() - positive.l1_norm()).abs());
    }
    push("translation_homomorphism", hom);
    push("translation_kolmogorov_adjoint", adj);
    push("translation_stochastic", stochastic);

    let zf = f.left_convolution_ultraop();
    let zg = g.left_convolution_ultraop();
    push(
        "ultraop_is_convolution",
        h.apply(&zf).max_abs_diff(&convolve_fg(&f, &h)?),
    );
    push(
        "ultraop_homomorphism",
        (&zg * &zf).max_abs_diff(&convolve_fg(&g, &f)?.left_convolution_ultraop()),
    );
    push(
        "ultraop_gelfand_representation",
        kolmogorov_adjoint(&zf).max_abs_diff(&f.gelfand().left_convolution_ultraop()),
    );

    let gf = convolve_fg(&g, &f)?;
    push(
        "gelfand_antihomomorphism",
        gf.gelfand().max_abs_diff(&convolve_fg(&f.gelfand(), &g.gelfand())?),
    );
    push(
        "cartan_antihomomorphism",
        gf.cartan(&dagger)?
            .max_abs_diff(&convolve_fg(&f.cartan(&dagger)?, &g.cartan(&dagger)?)?),
    );
    push(
        "involutions_involutive",
        f.gelfand()
            .gelfand()
            .max_abs_diff(&f)
            .max(f.cartan(&dagger)?.cartan(&dagger)?.max_abs_diff(&f)),
    );
    push("cartan_equals_gelfand", f.cartan(&dagger)?.max_abs_diff(&f.gelfand()));

    let rf = iga_superop_rep(&f, rep)?;
    let rg = iga_superop_rep(&g, rep)?;
    push(
        "superop_homomorphism",
        rg.compose(&rf).max_abs_diff(&iga_superop_rep(&gf, rep)?),
    );
    push(
        "superop_cartan_representation",
        rf.hs_adjoint()
            .max_abs_diff(&iga_superop_rep(&f.cartan(&dagger)?, rep)?),
    );
    let uniform = GroupAlgebraElement::uniform(Arc::clone(group));
    let ru = iga_superop_rep(&uniform, rep)?;
    push("uniform_idempotent", ru.compose(&ru).max_abs_diff(&ru));

    // Delta identities with δ the indicator of the identity under counting measure.
    let delta = delta_values(group);
    let fv: Vec<_> = f.coeffs().to_vec();
    let mut inversion: f64 = 0.0;
    let mut conjugation: f64 = 0.0;
    let mut translation: f64 = 0.0;
    for x in group.elements() {
        inversion = inversion.max((delta[group.inv(x)] - delta[x]).abs());
        for y in group.elements() {
            let conj = group.mul(group.mul(y, x), group.inv(y));
            conjugation = conjugation.max((delta[conj] - delta[x]).abs());
        }
    }
    for y in group.elements() {
        let yi = group.inv(y);
        let sifted: num_complex::Complex64 = group.elements().map(|x| fv[x] * delta[group.mul(yi, x)]).sum();
        translation = translation.max((sifted - fv[y]).norm());
    }
    let mut trikernel: f64 = 0.0;
    for z in group.elements() {
        let zi = group.inv(z);
        let mut acc = num_complex::Complex64::new(0.0, 0.0);
        for x in group.elements() {
            for y in group.elements() {
                acc += g.coeffs()[x] * fv[y] * delta[group.mul(zi, group.mul(x, y))];
            }
        }
        trikernel = trikernel.max((acc - gf.coeffs()[z]).norm());
    }
    push("delta_inversion", inversion);
    push("delta_conjugation", conjugation);
    push("delta_translation", translation);
    push("delta_trikernel", trikernel);
    Ok(checks)
}

/// Affine-group identities. `seed` draws the elements for the modular checks.
pub fn affine_suite(seed: u64) -> Result<Vec<Check>> {
    let mut rng = stream_rng(seed, 0);
    let mut checks = Vec::new();
    let element = |rng: &mut rand_chacha::ChaCha8Rng| {
        AffineElement::new(
            (rng.random::<f64>() * 4.0 - 2.0).exp(),
            rng.random::<f64>() * 10.0 - 5.0,
        )
    };

    let mut mult: f64 = 0.0;
    for _ in 0..100 {
        let (x, y) = (element(&mut rng)?, element(&mut rng)?);
        let lhs = affine::modular_function(&x.mul(&y));
        let rhs = affine::modular_function(&x) * affine::modular_function(&y);
        mult = mult.max((lhs - rhs).abs() / rhs);
    }
    checks.push(Check::at_most("modular_multiplicativity", mult, 1e-14));
    let mut b_dependence: f64 = 0.0;
    for b in -5..=5 {
        let d = affine::modular_function(&AffineElement::new(2.5, b as f64)?);
        b_dependence = b_dependence.max((d - 2.5).abs());
    }
    checks.push(Check::at_most("modular_independent_of_b", b_dependence, 1e-14));

    let window = AffineWindow::standard();
    let bump = |x: &AffineElement| GaussianBump::new(0.0, 0.0, 0.4).at(x);
    let g0 = AffineElement::new(2.0, 1.0)?;
    for side in [HaarSide::Left, HaarSide::Right] {
        let (k, residuals) = affine::derive_haar_exponent(side, &g0, bump, &window)?;
        let label = match side {
            HaarSide::Left => "left",
            HaarSide::Right => "right",
        };
        checks.push(Check::at_most(
            format!("haar_{label}_derived_exponent_mismatch"),
            (k - side.exponent()).abs() as f64,
            0.0,
        ));
        checks.push(Check::at_most(
            format!("haar_{label}_invariance"),
            residuals[k as usize],
            affine::HAAR_TOL,
        ));
        // Every other candidate must be visibly non-invariant.
        let runner_up = residuals
            .iter()
            .enumerate()
            .filter(|&(j, _)| j as i32 != k)
            .map(|(_, r)| *r)
            .fold(f64::INFINITY, f64::min);
        checks.push(Check::at_least(
            format!("haar_{label}_other_candidates"),
            runner_up,
            1e-3,
        ));
    }
    let mut ratio: f64 = 0.0;
    for _ in 0..20 {
        let x = element(&mut rng)?;
        let r = HaarSide::Right.density(x.a()) / HaarSide::Left.density(x.a());
        ratio = ratio.max((r - affine::modular_function(&x)).abs() / r);
    }
    checks.push(Check::at_most("haar_density_ratio_is_modular", ratio, 1e-14));
    checks.push(Check::at_most(
        "haar_quasi_invariance",
        affine::quasi_invariance_check(&g0, bump, &window)?,
        affine::HAAR_TOL,
    ));

    let conj = AffineElement::new(2.0, 0.0)?;
    let factor = affine::conjugation_factor(&conj, 1e-3);
    let target = 1.0 / affine::modular_function(&conj);
    checks.push(Check::at_most(
        "delta_conjugation_factor",
        (factor - target).abs() / target,
        1e-2,
    ));
    for which in [
        DeltaIdentity::Inversion,
        DeltaIdentity::Conjugation(conj),
        DeltaIdentity::Translation(AffineElement::new(1.5, 0.5)?),
    ] {
        let residuals = affine::MOLLIFIER_WIDTHS
            .iter()
            .map(|&w| affine::delta_identity_check(which, w))
            .collect::<Result<Vec<_>>>()?;
        let order = loglog_slope(&affine::MOLLIFIER_WIDTHS, &residuals).unwrap_or(f64::NAN);
        checks.push(Check::at_least(format!("delta_{}_order", which.name()), order, 1.0));
    }
    let trikernel = affine::delta_identity_check(DeltaIdentity::Trikernel(AffineElement::new(1.2, 0.3)?), 1e-2)?;
    checks.push(Check::at_most("delta_trikernel", trikernel, 1e-3));

    let f = |x: &AffineElement| GaussianBump::new(0.4, 0.3, 0.3).at(x);
    let g = |x: &AffineElement| GaussianBump::new(-0.3, -0.2, 0.3).at(x);
    let wide = affine::wide_window();
    checks.push(Check::at_least(
        "gelfand_antihomomorphism_failure_witness",
        affine::gelfand_antihom_residual(g, f, &wide)?,
        0.1,
    ));
    let kernel = |x: &AffineElement| GaussianBump::new(0.7, 0.0, 0.3).at(x);
    let probe = |x: &AffineElement| GaussianBump::new(0.0, 0.5, 0.6).at(x);
    let witness = affine::convolution_adjoint_witness(kernel, probe, &wide)?;
    checks.push(Check::at_least(
        "ultraop_gelfand_representation_failure",
        witness.plain,
        0.1,
    ));
    checks.push(Check::at_most(
        "ultraop_modular_gelfand_representation",
        witness.modular,
        1e-6,
    ));
    Ok(checks)
}
