//! Dense complex square matrices.
//!
//! [`Operator`] is the single matrix type of the crate: system operators,
//! Kraus operators, density matrices, and (wrapped in
//! [`SuperOperator`](crate::superop::SuperOperator)) superoperators on
//! vectorized operators. Storage is row-major.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, MulAssign, Neg, Sub, SubAssign};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Largest hermiticity defect accepted by [`Operator::herm_eigvals`].
pub const HERMITIAN_TOL: f64 = 1e-10;

#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct Operator {
    dim: usize,
    data: Vec<Complex64>,
}

impl Operator {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "operator dimension must be at least 1");
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Builds from row-major entries. Fails unless `data.len()` is a nonzero
    /// perfect square.
    pub fn from_vec(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("operator dimension must be at least 1"));
        }
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: data.len(),
            });
        }
        Ok(Self { dim, data })
    }

    /// Builds from nested rows of complex entries.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(invalid("rows do not form a square matrix"));
        }
        Self::from_vec(dim, rows.iter().flatten().copied().collect())
    }

    /// Builds from separate real and imaginary parts (row-major, nested).
    pub fn from_parts(re: &[Vec<f64>], im: &[Vec<f64>]) -> Result<Self> {
        if re.len() != im.len() || re.iter().zip(im).any(|(a, b)| a.len() != b.len()) {
            return Err(invalid("real and imaginary parts differ in shape"));
        }
        let rows: Vec<Vec<Complex64>> = re
            .iter()
            .zip(im)
            .map(|(r, i)| r.iter().zip(i).map(|(&a, &b)| Complex64::new(a, b)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn from_real(dim: usize, data: &[f64]) -> Self {
        assert_eq!(data.len(), dim * dim);
        Self {
            dim,
            data: data.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        }
    }

    pub fn diag(entries: &[Complex64]) -> Self {
        let mut m = Self::zeros(entries.len());
        for (i, &z) in entries.iter().enumerate() {
            m[(i, i)] = z;
        }
        m
    }

    pub fn diag_real(entries: &[f64]) -> Self {
        let c: Vec<Complex64> = entries.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::diag(&c)
    }

    /// `|i⟩⟨j|` in dimension `dim`.
    pub fn unit(dim: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(dim);
        m[(i, j)] = ONE;
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn real_parts(&self) -> Vec<Vec<f64>> {
        self.data
            .chunks(self.dim)
            .map(|r| r.iter().map(|z| z.re).collect())
            .collect()
    }

    pub fn imag_parts(&self) -> Vec<Vec<f64>> {
        self.data
            .chunks(self.dim)
            .map(|r| r.iter().map(|z| z.im).collect())
            .collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn dagger(&self) -> Self {
        let d = self.dim;
        Self::from_fn(d, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        let d = self.dim;
        Self::from_fn(d, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn frob_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn frob_dist(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "frob_dist: dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Largest absolute entry-wise difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "max_abs_diff: dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        let d = self.dim;
        (0..d)
            .map(|j| (0..d).map(|i| self[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// `max |A − A†|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in i..d {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// `(A + A†)/2`.
    pub fn hermitian_part(&self) -> Self {
        (self + &self.dagger()).scale_real(0.5)
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    pub fn anticommutator(&self, other: &Self) -> Self {
        &(self * other) + &(other * self)
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let (da, db) = (self.dim, other.dim);
        let mut out = Self::zeros(da * db);
        for i in 0..da {
            for j in 0..da {
                let a = self[(i, j)];
                if a == ZERO {
                    continue;
                }
                for k in 0..db {
                    for l in 0..db {
                        out[(i * db + k, j * db + l)] = a * other[(k, l)];
                    }
                }
            }
        }
        out
    }

    pub fn powi(&self, n: u32) -> Self {
        let mut result = Self::identity(self.dim);
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                result = &result * &base;
            }
            base = &base * &base;
            n >>= 1;
        }
        result
    }

    /// Column-stacked vectorization: `vec(A)[i + j·d] = A[i, j]`.
    pub fn vectorize(&self) -> Vec<Complex64> {
        let d = self.dim;
        let mut v = vec![ZERO; d * d];
        for i in 0..d {
            for j in 0..d {
                v[i + j * d] = self[(i, j)];
            }
        }
        v
    }

    pub fn unvectorize(dim: usize, v: &[Complex64]) -> Self {
        assert_eq!(v.len(), dim * dim);
        Self::from_fn(dim, |i, j| v[i + j * dim])
    }

    /// Matrix-vector product.
    pub fn apply_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim);
        self.data
            .chunks(self.dim)
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Outer product `|u⟩⟨v|`.
    pub fn outer(u: &[Complex64], v: &[Complex64]) -> Self {
        assert_eq!(u.len(), v.len());
        Self::from_fn(u.len(), |i, j| u[i] * v[j].conj())
    }

    fn lu(&self) -> Option<(Vec<Complex64>, Vec<usize>, f64)> {
        let n = self.dim;
        let mut a = self.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, a[i * n + k].norm()))
                .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if pmax == 0.0 {
                return None;
            }
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let pivot = a[k * n + k];
            for i in (k + 1)..n {
                let f = a[i * n + k] / pivot;
                a[i * n + k] = f;
                if f != ZERO {
                    for j in (k + 1)..n {
                        let akj = a[k * n + j];
                        a[i * n + j] -= f * akj;
                    }
                }
            }
        }
        Some((a, perm, sign))
    }

    pub fn det(&self) -> Complex64 {
        match self.lu() {
            None => ZERO,
            Some((a, _, sign)) => {
                let n = self.dim;
                (0..n).map(|i| a[i * n + i]).product::<Complex64>() * sign
            }
        }
    }

    /// Solves `self · X = rhs`.
    pub fn solve(&self, rhs: &Self) -> Result<Self> {
        let n = self.dim;
        if rhs.dim != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: rhs.dim,
            });
        }
        let (a, perm, _) = self.lu().ok_or_else(|| invalid("matrix is singular"))?;
        let mut x = Self::zeros(n);
        for col in 0..n {
            let mut y: Vec<Complex64> = (0..n).map(|i| rhs[(perm[i], col)]).collect();
            for i in 0..n {
                for k in 0..i {
                    let l = a[i * n + k];
                    y[i] = y[i] - l * y[k];
                }
            }
            for i in (0..n).rev() {
                for k in (i + 1)..n {
                    let u = a[i * n + k];
                    y[i] = y[i] - u * y[k];
                }
                y[i] /= a[i * n + i];
            }
            for i in 0..n {
                x[(i, col)] = y[i];
            }
        }
        if !x.is_finite() {
            return Err(invalid("matrix is numerically singular"));
        }
        Ok(x)
    }

    pub fn inverse(&self) -> Result<Self> {
        self.solve(&Self::identity(self.dim))
    }

    /// Sorted eigenvalues of a Hermitian operator.
    pub fn herm_eigvals(&self) -> Result<Vec<f64>> {
        let defect = self.hermiticity_defect();
        if defect > HERMITIAN_TOL {
            return Err(invalid(format!(
                "herm_eigvals on non-Hermitian input (defect {defect:e})"
            )));
        }
        let h = self.hermitian_part();
        let d = self.dim;
        let m = DMatrix::from_fn(d, d, |i, j| h[(i, j)]);
        let mut vals: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
        vals.sort_by(f64::total_cmp);
        Ok(vals)
    }

    /// `e^A` by scaling and squaring; see [`crate::expm`].
    pub fn exp(&self) -> Result<Self> {
        crate::expm::mat_exp(self)
    }
}

impl Index<(usize, usize)> for Operator {
    type Output = Complex64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for Operator {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.dim + j]
    }
}

impl fmt::Debug for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Operator({}x{})", self.dim, self.dim)?;
        for row in self.data.chunks(self.dim) {
            let cells: Vec<String> = row.iter().map(|z| format!("{:+.6}{:+.6}i", z.re, z.im)).collect();
            writeln!(f, "  [{}]", cells.join(", "))?;
        }
        Ok(())
    }
}

fn check_same(a: &Operator, b: &Operator) {
    assert_eq!(a.dim, b.dim, "operator dimension mismatch");
}

impl<'a> Add<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        check_same(self, rhs);
        Operator {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl<'a> Sub<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        check_same(self, rhs);
        Operator {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl<'a> Mul<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        check_same(self, rhs);
        let n = self.dim;
        let mut out = vec![ZERO; n * n];
        for i in 0..n {
            let row = &self.data[i * n..(i + 1) * n];
            let out_row = &mut out[i * n..(i + 1) * n];
            for (k, &a) in row.iter().enumerate() {
                if a == ZERO {
                    continue;
                }
                let rrow = &rhs.data[k * n..(k + 1) * n];
                for (o, &b) in out_row.iter_mut().zip(rrow) {
                    *o += a * b;
                }
            }
        }
        Operator { dim: n, data: out }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<Operator> for Operator {
            type Output = Operator;
            fn $m(self, rhs: Operator) -> Operator {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a Operator> for Operator {
            type Output = Operator;
            fn $m(self, rhs: &Operator) -> Operator {
                (&self).$m(rhs)
            }
        }
        impl<'a> $tr<Operator> for &'a Operator {
            type Output = Operator;
            fn $m(self, rhs: Operator) -> Operator {
                self.$m(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for &Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        self.scale_real(-1.0)
    }
}

impl Neg for Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        self.scale_real(-1.0)
    }
}

impl Mul<Complex64> for &Operator {
    type Output = Operator;
    fn mul(self, s: Complex64) -> Operator {
        self.scale(s)
    }
}

impl Mul<Complex64> for Operator {
    type Output = Operator;
    fn mul(self, s: Complex64) -> Operator {
        self.scale(s)
    }
}

impl Mul<f64> for &Operator {
    type Output = Operator;
    fn mul(self, s: f64) -> Operator {
        self.scale_real(s)
    }
}

impl Mul<f64> for Operator {
    type Output = Operator;
    fn mul(self, s: f64) -> Operator {
        self.scale_real(s)
    }
}

impl AddAssign<&Operator> for Operator {
    fn add_assign(&mut self, rhs: &Operator) {
        check_same(self, rhs);
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

impl SubAssign<&Operator> for Operator {
    fn sub_assign(&mut self, rhs: &Operator) {
        check_same(self, rhs);
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a -= b;
        }
    }
}

impl MulAssign<f64> for Operator {
    fn mul_assign(&mut self, s: f64) {
        for a in &mut self.data {
            *a *= s;
        }
    }
}

/// Standard qubit and spin operators.
pub mod pauli {
    use super::*;

    pub fn sigma_x() -> Operator {
        Operator::from_real(2, &[0.0, 1.0, 1.0, 0.0])
    }

    pub fn sigma_y() -> Operator {
        Operator::from_vec(2, vec![ZERO, -I, I, ZERO]).unwrap()
    }

    pub fn sigma_z() -> Operator {
        Operator::from_real(2, &[1.0, 0.0, 0.0, -1.0])
    }

    /// Lowering operator `σ⁻ = |0⟩⟨1|`: takes the excited state `|1⟩` to the ground state `|0⟩`.
    pub fn sigma_minus() -> Operator {
        Operator::unit(2, 0, 1)
    }

    pub fn sigma_plus() -> Operator {
        Operator::unit(2, 1, 0)
    }

    /// `|k⟩⟨k|` for a qubit.
    pub fn projector(k: usize) -> Operator {
        Operator::unit(2, k, k)
    }
}

#[cfg(test)]
mod tests {
    use super::pauli::*;
    use super::*;

    #[test]
    fn trace_of_identity() {
        assert_eq!(Operator::identity(3).trace(), Complex64::new(3.0, 0.0));
    }

    #[test]
    fn dagger_is_involution() {
        let a = Operator::from_fn(3, |i, j| Complex64::new(i as f64 + 0.5, j as f64 - 1.0));
        assert_eq!(a.dagger().dagger(), a);
    }

    #[test]
    fn frob_dist_to_self_is_zero() {
        let a = sigma_y();
        assert_eq!(a.frob_dist(&a), 0.0);
    }

    #[test]
    fn sigma_z_eigenvalues_match_characteristic_roots() {
        // λ² − tr(A)λ + det(A) = 0 for a 2×2 matrix.
        let z = sigma_z();
        let (tr, det) = (z.trace().re, z.det().re);
        let disc = (tr * tr - 4.0 * det).sqrt();
        let expected = [(tr - disc) / 2.0, (tr + disc) / 2.0];
        let vals = z.herm_eigvals().unwrap();
        assert_eq!(vals.len(), 2);
        for (v, e) in vals.iter().zip(expected) {
            assert!((v - e).abs() < 1e-14);
        }
    }

    #[test]
    fn herm_eigvals_rejects_non_hermitian() {
        assert!(matches!(sigma_minus().herm_eigvals(), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn inverse_and_det() {
        let a = Operator::from_vec(
            2,
            vec![
                Complex64::new(2.0, 1.0),
                Complex64::new(0.5, 0.0),
                Complex64::new(-1.0, 0.3),
                Complex64::new(1.0, -2.0),
            ],
        )
        .unwrap();
        let inv = a.inverse().unwrap();
        assert!((&a * &inv).max_abs_diff(&Operator::identity(2)) < 1e-14);
        let det = a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)];
        assert!((a.det() - det).norm() < 1e-14);
        assert!(Operator::zeros(2).inverse().is_err());
    }

    #[test]
    fn kron_of_paulis() {
        let xz = sigma_x().kron(&sigma_z());
        assert_eq!(xz[(0, 2)], ONE);
        assert_eq!(xz[(1, 3)], -ONE);
        assert_eq!(xz[(0, 0)], ZERO);
    }

    #[test]
    fn vectorize_roundtrip() {
        let a = Operator::from_fn(3, |i, j| Complex64::new((3 * i + j) as f64, 0.0));
        let v = a.vectorize();
        assert_eq!(v[1], a[(1, 0)]);
        assert_eq!(Operator::unvectorize(3, &v), a);
    }

    #[test]
    fn pauli_algebra() {
        let xy = &sigma_x() * &sigma_y();
        assert!(xy.max_abs_diff(&sigma_z().scale(I)) < 1e-15);
        assert_eq!(&sigma_minus() * &Operator::unit(2, 1, 1), sigma_minus());
    }
}
