//! Superoperators on column-stacked operators.
//!
//! With `vec(ρ)[i + j·d] = ρ[i, j]`, the sandwich `ρ ↦ AρB†` is the matrix
//! `conj(B) ⊗ A`. Three involutions act on superoperators: the
//! Hilbert–Schmidt adjoint `‡`, the Choi reshuffle `♯` and their
//! conjugate `⁑ = ♯∘‡∘♯`.

use std::ops::{Add, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::operator::Operator;

/// Default tolerance of [`is_cp`] and [`is_tp`].
pub const DEFAULT_CHANNEL_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct SuperOperator {
    sys_dim: usize,
    mat: Operator,
}

/// Reshuffled form of a superoperator; Hermitian iff the map preserves
/// Hermiticity and positive semidefinite iff it is completely positive.
#[derive(Clone, Debug, PartialEq)]
pub struct ChoiMatrix {
    sys_dim: usize,
    mat: Operator,
}

#[inline]
fn vec_index(i: usize, j: usize, d: usize) -> usize {
    i + j * d
}

impl SuperOperator {
    /// Wraps a `d²×d²` matrix.
    pub fn from_matrix(sys_dim: usize, mat: Operator) -> Result<Self> {
        if mat.dim() != sys_dim * sys_dim {
            return Err(Error::DimensionMismatch {
                expected: sys_dim * sys_dim,
                found: mat.dim(),
            });
        }
        Ok(Self { sys_dim, mat })
    }

    pub fn identity(sys_dim: usize) -> Self {
        Self {
            sys_dim,
            mat: Operator::identity(sys_dim * sys_dim),
        }
    }

    pub fn zeros(sys_dim: usize) -> Self {
        Self {
            sys_dim,
            mat: Operator::zeros(sys_dim * sys_dim),
        }
    }

    pub fn sys_dim(&self) -> usize {
        self.sys_dim
    }

    pub fn matrix(&self) -> &Operator {
        &self.mat
    }

    pub fn apply(&self, rho: &Operator) -> Operator {
        assert_eq!(rho.dim(), self.sys_dim, "apply: dimension mismatch");
        let v = self.mat.apply_vec(&rho.vectorize());
        Operator::unvectorize(self.sys_dim, &v)
    }

    /// `self ∘ first`: apply `first`, then `self`.
    pub fn compose(&self, first: &Self) -> Self {
        assert_eq!(self.sys_dim, first.sys_dim, "compose: dimension mismatch");
        Self {
            sys_dim: self.sys_dim,
            mat: &self.mat * &first.mat,
        }
    }

    pub fn powi(&self, n: u32) -> Self {
        Self {
            sys_dim: self.sys_dim,
            mat: self.mat.powi(n),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self {
            sys_dim: self.sys_dim,
            mat: self.mat.scale_real(s),
        }
    }

    pub fn frob_norm(&self) -> f64 {
        self.mat.frob_norm()
    }

    pub fn frob_dist(&self, other: &Self) -> f64 {
        self.mat.frob_dist(&other.mat)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.mat.max_abs_diff(&other.mat)
    }

    /// Hilbert–Schmidt adjoint: `tr(Y† S‡(X)) = tr(S(Y)† X)`.
    pub fn hs_adjoint(&self) -> Self {
        Self {
            sys_dim: self.sys_dim,
            mat: self.mat.dagger(),
        }
    }

    /// Choi involution `(|a⟩⟨c| ⊙ |d⟩⟨b|)^♯ = |a⟩⟨b| ⊙ |d⟩⟨c|`.
    pub fn choi_involution(&self) -> Self {
        Self {
            sys_dim: self.sys_dim,
            mat: reshuffle(&self.mat, self.sys_dim),
        }
    }

    /// `♯∘‡∘♯`; maps `A⊙B†` to `B⊙A†`.
    pub fn cj_quasi_adjoint(&self) -> Self {
        self.choi_involution().hs_adjoint().choi_involution()
    }

    pub fn to_choi(&self) -> ChoiMatrix {
        ChoiMatrix {
            sys_dim: self.sys_dim,
            mat: reshuffle(&self.mat, self.sys_dim),
        }
    }
}

fn reshuffle(m: &Operator, d: usize) -> Operator {
    let mut out = Operator::zeros(d * d);
    for a in 0..d {
        for b in 0..d {
            for c in 0..d {
                for e in 0..d {
                    out[(vec_index(a, c, d), vec_index(b, e, d))] = m[(vec_index(a, b, d), vec_index(c, e, d))];
                }
            }
        }
    }
    out
}

impl ChoiMatrix {
    pub fn sys_dim(&self) -> usize {
        self.sys_dim
    }

    pub fn matrix(&self) -> &Operator {
        &self.mat
    }

    /// Inverse reshuffle back to a superoperator.
    pub fn to_superop(&self) -> SuperOperator {
        SuperOperator {
            sys_dim: self.sys_dim,
            mat: reshuffle(&self.mat, self.sys_dim),
        }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let vals = self
            .mat
            .hermitian_part()
            .herm_eigvals()
            .expect("Hermitian part is Hermitian");
        vals[0]
    }
}

impl Add for &SuperOperator {
    type Output = SuperOperator;
    fn add(self, rhs: &SuperOperator) -> SuperOperator {
        SuperOperator {
            sys_dim: self.sys_dim,
            mat: &self.mat + &rhs.mat,
        }
    }
}

impl Sub for &SuperOperator {
    type Output = SuperOperator;
    fn sub(self, rhs: &SuperOperator) -> SuperOperator {
        SuperOperator {
            sys_dim: self.sys_dim,
            mat: &self.mat - &rhs.mat,
        }
    }
}

/// `A ⊙ B†`, the map `ρ ↦ AρB†`.
pub fn sandwich(a: &Operator, b: &Operator) -> Result<SuperOperator> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(SuperOperator {
        sys_dim: a.dim(),
        mat: b.conj().kron(a),
    })
}

/// `Σ wᵢ Kᵢ ⊙ Kᵢ†`.
pub fn kraus_sum<'a>(sys_dim: usize, atoms: impl IntoIterator<Item = (f64, &'a Operator)>) -> SuperOperator {
    let mut acc = Operator::zeros(sys_dim * sys_dim);
    for (w, k) in atoms {
        acc += &k.conj().kron(k).scale_real(w);
    }
    SuperOperator { sys_dim, mat: acc }
}

/// Complete positivity: Hermitized Choi matrix has no eigenvalue below `-tol`.
/// Returns the verdict and the smallest eigenvalue.
pub fn is_cp(s: &SuperOperator, tol: f64) -> (bool, f64) {
    let min = s.to_choi().min_eigenvalue();
    (min >= -tol, min)
}

/// Trace preservation: `‖S‡(1) − 1‖_F ≤ tol`. Returns the verdict and defect.
pub fn is_tp(s: &SuperOperator, tol: f64) -> (bool, f64) {
    let id = Operator::identity(s.sys_dim);
    let defect = s.hs_adjoint().apply(&id).frob_dist(&id);
    (defect <= tol, defect)
}

/// `Σ_L  L⊙L† − ½(L†L⊙1 + 1⊙L†L)`.
pub fn lindblad_dissipator(ls: &[Operator]) -> Result<SuperOperator> {
    let d = ls
        .first()
        .ok_or_else(|| crate::error::invalid("dissipator needs at least one operator"))?
        .dim();
    let id = Operator::identity(d);
    let mut acc = SuperOperator::zeros(d);
    for l in ls {
        if l.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: l.dim(),
            });
        }
        let ldl = &l.dagger() * l;
        let jump = sandwich(l, l)?;
        let left = sandwich(&ldl, &id)?;
        let right = sandwich(&id, &ldl)?;
        acc = &acc + &(&jump - &(&left + &right).scale_real(0.5));
    }
    Ok(acc)
}

/// `e^{D s}`.
pub fn channel_exp(d: &SuperOperator, s: f64) -> Result<SuperOperator> {
    Ok(SuperOperator {
        sys_dim: d.sys_dim,
        mat: d.mat.scale_real(s).exp()?,
    })
}

/// Hilbert–Schmidt inner product `tr(A† B)`.
pub fn hs_inner(a: &Operator, b: &Operator) -> Complex64 {
    a.data().iter().zip(b.data()).map(|(x, y)| x.conj() * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::pauli::*;
    use crate::operator::{ONE, ZERO};
    use crate::random::{random_density, random_ginibre, stream_rng};

    #[test]
    fn sandwich_identity_is_identity() {
        let id = Operator::identity(2);
        assert_eq!(sandwich(&id, &id).unwrap(), SuperOperator::identity(2));
    }

    #[test]
    fn sandwich_flips_ground_state() {
        let x = sigma_x();
        let out = sandwich(&x, &x).unwrap().apply(&projector(0));
        assert!(out.max_abs_diff(&projector(1)) < 1e-15);
    }

    #[test]
    fn sandwich_matrix_enumerated() {
        let mut rng = stream_rng(3, 0);
        let (a, b) = (random_ginibre(2, &mut rng), random_ginibre(2, &mut rng));
        let s = sandwich(&a, &b).unwrap();
        // (AρB†)[i,j] = Σ A[i,k] ρ[k,l] conj(B[j,l]).
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        let expected = a[(i, k)] * b[(j, l)].conj();
                        let got = s.matrix()[(i + 2 * j, k + 2 * l)];
                        assert!((got - expected).norm() < 1e-15);
                    }
                }
            }
        }
        let rho = random_ginibre(2, &mut rng);
        let direct = &(&a * &rho) * &b.dagger();
        assert!(s.apply(&rho).max_abs_diff(&direct) < 1e-13);
    }

    #[test]
    fn hs_adjoint_of_sandwich_by_probes() {
        let mut rng = stream_rng(8, 0);
        let (a, b) = (random_ginibre(2, &mut rng), random_ginibre(2, &mut rng));
        let s = sandwich(&a, &b).unwrap();
        let adj = s.hs_adjoint();
        assert!(adj.max_abs_diff(&sandwich(&a.dagger(), &b.dagger()).unwrap()) < 1e-15);
        for _ in 0..20 {
            let (x, y) = (random_ginibre(2, &mut rng), random_ginibre(2, &mut rng));
            let lhs = hs_inner(&y, &adj.apply(&x));
            let rhs = hs_inner(&s.apply(&y), &x);
            assert!((lhs - rhs).norm() < 1e-12);
        }
        assert_eq!(adj.hs_adjoint(), s);
    }

    #[test]
    fn choi_of_rank_one_is_outer_product() {
        let k = random_ginibre(2, &mut stream_rng(12, 0));
        let choi = sandwich(&k, &k).unwrap().to_choi();
        let v = k.vectorize();
        assert!(choi.matrix().max_abs_diff(&Operator::outer(&v, &v)) < 1e-15);
    }

    #[test]
    fn choi_of_identity_is_maximally_entangled() {
        let d = 3;
        let choi = SuperOperator::identity(d).to_choi();
        for p in 0..d * d {
            for q in 0..d * d {
                let (a, c) = (p % d, p / d);
                let (b, e) = (q % d, q / d);
                let expected = if a == c && b == e { ONE } else { ZERO };
                assert_eq!(choi.matrix()[(p, q)], expected);
            }
        }
        assert_eq!(choi.matrix().trace().re, d as f64);
    }

    #[test]
    fn quasi_adjoint_swaps_factors() {
        let mut rng = stream_rng(21, 0);
        let (a, b) = (random_ginibre(2, &mut rng), random_ginibre(2, &mut rng));
        let q = sandwich(&a, &b).unwrap().cj_quasi_adjoint();
        assert!(q.max_abs_diff(&sandwich(&b, &a).unwrap()) < 1e-14);
        assert_eq!(
            SuperOperator::identity(2).cj_quasi_adjoint(),
            SuperOperator::identity(2)
        );
    }

    #[test]
    fn cp_and_tp_predicates() {
        let id = SuperOperator::identity(2);
        assert_eq!(is_tp(&id, DEFAULT_CHANNEL_TOL), (true, 0.0));
        assert!(is_cp(&id, DEFAULT_CHANNEL_TOL).0);

        // Choi of X⊙Z† is uv† with u = vec(X) ⟂ v = vec(Z), |u| = |v| = √2;
        // its Hermitian part (uv† + vu†)/2 has eigenvalues ±1.
        let (cp, min) = is_cp(&sandwich(&sigma_x(), &sigma_z()).unwrap(), DEFAULT_CHANNEL_TOL);
        assert!(!cp);
        assert!((min + 1.0).abs() < 1e-12);

        let p = [0.4, 0.3, 0.2, 0.1];
        let ops = [Operator::identity(2), sigma_x(), sigma_y(), sigma_z()];
        let dep = kraus_sum(2, p.iter().copied().zip(ops.iter()));
        assert!(is_cp(&dep, DEFAULT_CHANNEL_TOL).0);
        assert!(is_tp(&dep, DEFAULT_CHANNEL_TOL).0);
    }

    #[test]
    fn decay_dissipator_on_excited_state() {
        let d = lindblad_dissipator(&[sigma_minus()]).unwrap();
        let out = d.apply(&projector(1));
        assert!(out.max_abs_diff(&(&projector(0) - &projector(1))) < 1e-15);
        assert_eq!(
            lindblad_dissipator(&[Operator::zeros(2)]).unwrap(),
            SuperOperator::zeros(2)
        );
    }

    #[test]
    fn dissipator_annihilates_trace() {
        let mut rng = stream_rng(17, 0);
        let ls = [random_ginibre(3, &mut rng), random_ginibre(3, &mut rng)];
        let d = lindblad_dissipator(&ls).unwrap();
        for _ in 0..20 {
            let rho = random_density(3, &mut rng);
            assert!(d.apply(&rho).trace().norm() < 1e-12);
        }
    }

    #[test]
    fn channel_exp_decay_matches_scalar_ode() {
        let d = lindblad_dissipator(&[sigma_minus()]).unwrap();
        assert_eq!(channel_exp(&d, 0.0).unwrap(), SuperOperator::identity(2));
        let z = channel_exp(&d, 1.0).unwrap();
        let p = z.apply(&projector(1))[(1, 1)].re;
        assert!((p - (-1.0f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn channel_exp_semigroup() {
        let d = lindblad_dissipator(&[sigma_minus(), sigma_z().scale_real(0.5)]).unwrap();
        let (s, t) = (0.37, 1.21);
        let lhs = channel_exp(&d, s + t).unwrap();
        let rhs = channel_exp(&d, s).unwrap().compose(&channel_exp(&d, t).unwrap());
        assert!(lhs.max_abs_diff(&rhs) < 1e-11);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        assert!(matches!(
            sandwich(&Operator::identity(2), &Operator::identity(3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
