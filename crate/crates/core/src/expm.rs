//! Matrix exponential by Padé scaling and squaring.
//!
//! Degree selection and θ thresholds follow Higham (2005), which bounds the
//! relative backward error by the double-precision unit roundoff.

use crate::error::{invalid, Result};
use crate::operator::Operator;

const THETA_3: f64 = 1.495585217958292e-2;
const THETA_5: f64 = 2.539_398_330_063_23e-1;
const THETA_7: f64 = 9.504178996162932e-1;
const THETA_9: f64 = 2.097847961257068;
const THETA_13: f64 = 5.371920351148152;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const B9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// `e^A` for a dense complex matrix.
///
/// Fails on non-finite entries.
pub fn mat_exp(a: &Operator) -> Result<Operator> {
    if !a.is_finite() {
        return Err(invalid("mat_exp: non-finite entries"));
    }
    let n = a.dim();
    let norm = a.norm_one();
    if norm == 0.0 {
        return Ok(Operator::identity(n));
    }
    let ident = Operator::identity(n);

    for (theta, coeffs) in [
        (THETA_3, &B3[..]),
        (THETA_5, &B5[..]),
        (THETA_7, &B7[..]),
        (THETA_9, &B9[..]),
    ] {
        if norm <= theta {
            return pade_low(a, coeffs, &ident);
        }
    }

    let s = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let scaled = a.scale_real(0.5f64.powi(s));
    let mut r = pade_13(&scaled, &ident)?;
    for _ in 0..s {
        r = &r * &r;
    }
    Ok(r)
}

fn pade_low(a: &Operator, b: &[f64], ident: &Operator) -> Result<Operator> {
    // p(A) = U + V with U odd and V even in A; q(A) = V − U.
    let a2 = a * a;
    let m = b.len() - 1;
    let mut powers = vec![ident.clone(), a2.clone()];
    while powers.len() <= m / 2 {
        let next = powers.last().unwrap() * &a2;
        powers.push(next);
    }
    let mut u_inner = Operator::zeros(a.dim());
    let mut v = Operator::zeros(a.dim());
    for k in 0..=m / 2 {
        v += &powers[k].scale_real(b[2 * k]);
        if 2 * k < m {
            u_inner += &powers[k].scale_real(b[2 * k + 1]);
        }
    }
    let u = a * &u_inner;
    let p = &v + &u;
    let q = &v - &u;
    q.solve(&p)
}

fn pade_13(a: &Operator, ident: &Operator) -> Result<Operator> {
    let b = &B13;
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let lin = |c: [f64; 3], x: [&Operator; 3]| -> Operator {
        let mut acc = x[0].scale_real(c[0]);
        acc += &x[1].scale_real(c[1]);
        acc += &x[2].scale_real(c[2]);
        acc
    };
    let u_hi = lin([b[13], b[11], b[9]], [&a6, &a4, &a2]);
    let mut u_inner = &a6 * &u_hi;
    u_inner += &lin([b[7], b[5], b[3]], [&a6, &a4, &a2]);
    u_inner += &ident.scale_real(b[1]);
    let u = a * &u_inner;
    let v_hi = lin([b[12], b[10], b[8]], [&a6, &a4, &a2]);
    let mut v = &a6 * &v_hi;
    v += &lin([b[6], b[4], b[2]], [&a6, &a4, &a2]);
    v += &ident.scale_real(b[0]);
    let p = &v + &u;
    let q = &v - &u;
    q.solve(&p)
}

/// Truncated Taylor series `Σ_{k<terms} A^k/k!`. Test oracle only.
pub fn taylor_exp(a: &Operator, terms: usize) -> Operator {
    let mut sum = Operator::identity(a.dim());
    let mut term = Operator::identity(a.dim());
    for k in 1..terms {
        term = (&term * a).scale_real(1.0 / k as f64);
        sum += &term;
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::pauli::*;
    use crate::random::{random_ginibre, stream_rng};
    use num_complex::Complex64;

    #[test]
    fn exp_of_zero_is_identity() {
        assert_eq!(mat_exp(&Operator::zeros(2)).unwrap(), Operator::identity(2));
    }

    #[test]
    fn exp_of_diagonal() {
        let e = mat_exp(&Operator::diag_real(&[1.0, -1.0])).unwrap();
        let expected = Operator::diag_real(&[std::f64::consts::E, (-1.0f64).exp()]);
        assert!(e.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn exp_of_scaled_sigma_x_matches_taylor_and_closed_form() {
        let theta = 0.3;
        let a = sigma_x().scale_real(theta);
        let e = mat_exp(&a).unwrap();
        let taylor = taylor_exp(&a, 30);
        let closed = &Operator::identity(2).scale_real(theta.cosh()) + &sigma_x().scale_real(theta.sinh());
        assert!(e.max_abs_diff(&taylor) / taylor.frob_norm() < 1e-12);
        assert!(e.max_abs_diff(&closed) < 1e-15);
    }

    #[test]
    fn large_norm_uses_squaring_accurately() {
        let mut rng = stream_rng(11, 0);
        for scale in [0.01, 0.2, 0.9, 2.0, 5.0, 20.0] {
            let g = random_ginibre(4, &mut rng);
            let a = g.scale_real(scale / g.norm_one());
            let e = mat_exp(&a).unwrap();
            // Taylor needs many terms at larger norms; 120 terms is ample for ‖A‖ ≤ 20.
            let t = taylor_exp(&a, 120);
            assert!(e.frob_dist(&t) / t.frob_norm() < 1e-12, "scale {scale}");
        }
    }

    #[test]
    fn rejects_non_finite() {
        let mut a = Operator::zeros(2);
        a[(0, 1)] = Complex64::new(f64::NAN, 0.0);
        assert!(mat_exp(&a).is_err());
    }
}
