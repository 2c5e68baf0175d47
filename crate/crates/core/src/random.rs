//! Seeded random operators and per-stream generators.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::operator::Operator;

/// Generator for stream `stream` of a run seeded with `seed`.
///
/// Streams of one seed are independent, so an ensemble can be split across
/// workers by assigning each trajectory its own stream.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Standard complex Gaussian: `E|z|² = 1`.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Ginibre matrix: i.i.d. standard complex Gaussian entries.
pub fn random_ginibre<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Operator {
    Operator::from_fn(dim, |_, _| complex_normal(rng))
}

/// `(G + G†)/2` for a Ginibre `G`; exactly Hermitian.
pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Operator {
    let g = random_ginibre(dim, rng);
    let mut h = Operator::zeros(dim);
    for i in 0..dim {
        h[(i, i)] = Complex64::new(g[(i, i)].re, 0.0);
        for j in (i + 1)..dim {
            let z = (g[(i, j)] + g[(j, i)].conj()) * 0.5;
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
        }
    }
    h
}

/// Density matrix `G G† / tr(G G†)`.
pub fn random_density<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Operator {
    let g = random_ginibre(dim, rng);
    let rho = &g * &g.dagger();
    let tr = rho.trace().re;
    rho.scale_real(1.0 / tr).hermitian_part()
}

/// Haar-ish random unitary via `exp(iH)`.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Operator {
    let h = random_hermitian(dim, rng);
    h.scale(crate::operator::I).exp().expect("finite generator")
}

/// `m` Kraus operators cut from the first `dim` columns of a random unitary
/// of size `dim·m`, so `Σ K†K = 1` up to rounding.
pub fn random_kraus_set<R: Rng + ?Sized>(dim: usize, m: usize, rng: &mut R) -> Vec<Operator> {
    let u = random_unitary(dim * m, rng);
    (0..m)
        .map(|k| Operator::from_fn(dim, |i, j| u[(k * dim + i, j)]))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_matrix() {
        let a = random_ginibre(3, &mut stream_rng(5, 2));
        let b = random_ginibre(3, &mut stream_rng(5, 2));
        assert_eq!(a, b);
        let c = random_ginibre(3, &mut stream_rng(5, 3));
        assert_ne!(a, c);
    }

    #[test]
    fn mean_entry_magnitude_matches_rayleigh_mean() {
        // |z| for z with re, im ~ N(0, 1/2) is Rayleigh with scale 1/√2: E|z| = √π/2.
        let mut rng = stream_rng(2024, 0);
        let n = 10_000;
        let mean: f64 = (0..n).map(|_| complex_normal(&mut rng).norm()).sum::<f64>() / n as f64;
        let expected = std::f64::consts::PI.sqrt() / 2.0;
        assert!((mean - expected).abs() / expected < 0.05, "mean {mean}");
    }

    #[test]
    fn hermitian_is_exact() {
        let h = random_hermitian(4, &mut stream_rng(1, 0));
        assert_eq!(h.hermiticity_defect(), 0.0);
    }

    #[test]
    fn density_has_unit_trace() {
        let rho = random_density(3, &mut stream_rng(9, 0));
        assert!((rho.trace().re - 1.0).abs() < 1e-14);
        assert!(rho.herm_eigvals().unwrap()[0] > -1e-14);
    }

    #[test]
    fn unitary_is_unitary() {
        let u = random_unitary(3, &mut stream_rng(4, 1));
        assert!((&u * &u.dagger()).max_abs_diff(&Operator::identity(3)) < 1e-12);
    }
}
