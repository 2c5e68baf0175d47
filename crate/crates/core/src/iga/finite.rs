//! Finite groups, their group algebras and unitary representations.
//!
//! Counting measure is both left- and right-invariant, so every identity of
//! the group algebra holds exactly here.

use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::operator::{Operator, I, ONE, ZERO};
use crate::random::complex_normal;
use crate::superop::{sandwich, SuperOperator};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteGroup {
    name: String,
    order: usize,
    /// `table[x·n + y]` is the index of `xy`.
    table: Vec<usize>,
    inverse: Vec<usize>,
    identity: usize,
}

impl FiniteGroup {
    /// Validates closure, associativity, identity and inverses exhaustively.
    pub fn from_table(name: &str, order: usize, table: Vec<usize>) -> Result<Self> {
        let bad = |m: String| Error::InvalidGroup(m);
        if order == 0 || table.len() != order * order {
            return Err(bad(format!("expected {} entries for order {order}", order * order)));
        }
        if let Some(&v) = table.iter().find(|&&v| v >= order) {
            return Err(bad(format!("entry {v} out of range")));
        }
        let mul = |x: usize, y: usize| table[x * order + y];
        let identity = (0..order)
            .find(|&e| (0..order).all(|x| mul(e, x) == x && mul(x, e) == x))
            .ok_or_else(|| bad("no identity element".into()))?;
        for x in 0..order {
            for y in 0..order {
                for z in 0..order {
                    if mul(mul(x, y), z) != mul(x, mul(y, z)) {
                        return Err(bad(format!("not associative at ({x}, {y}, {z})")));
                    }
                }
            }
        }
        let inverse = (0..order)
            .map(|x| {
                (0..order)
                    .find(|&y| mul(x, y) == identity && mul(y, x) == identity)
                    .ok_or_else(|| bad(format!("element {x} has no inverse")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            name: name.to_string(),
            order,
            table,
            inverse,
            identity,
        })
    }

    /// Plain-text table: the order `n` on the first line, then `n` rows of
    /// `n` whitespace-separated indices.
    pub fn parse(name: &str, text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let n: usize = lines
            .next()
            .ok_or_else(|| Error::Parse("empty group table".into()))?
            .parse()
            .map_err(|e| Error::Parse(format!("group order: {e}")))?;
        let mut table = Vec::with_capacity(n * n);
        for (row, line) in lines.enumerate() {
            let entries = line
                .split_whitespace()
                .map(|t| t.parse::<usize>().map_err(|e| Error::Parse(format!("row {row}: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            if entries.len() != n {
                return Err(Error::Parse(format!(
                    "row {row} has {} entries, expected {n}",
                    entries.len()
                )));
            }
            table.extend(entries);
        }
        Self::from_table(name, n, table)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn mul(&self, x: usize, y: usize) -> usize {
        self.table[x * self.order + y]
    }

    pub fn inv(&self, x: usize) -> usize {
        self.inverse[x]
    }

    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.order
    }

    /// `𝔏_a[f](x) = f(a⁻¹x)`: entry `(x, a⁻¹x)` is one.
    pub fn left_translation_matrix(&self, a: usize) -> Operator {
        let mut m = Operator::zeros(self.order);
        let ai = self.inv(a);
        for x in self.elements() {
            m[(x, self.mul(ai, x))] = ONE;
        }
        m
    }

    /// Rejects maps that are not involutive anti-automorphisms.
    pub fn check_dagger(&self, dagger: &[usize]) -> Result<()> {
        if dagger.len() != self.order || dagger.iter().any(|&d| d >= self.order) {
            return Err(Error::InvalidDagger("map must send each element to an element".into()));
        }
        for x in self.elements() {
            if dagger[dagger[x]] != x {
                return Err(Error::InvalidDagger(format!("not involutive at element {x}")));
            }
            for y in self.elements() {
                if dagger[self.mul(x, y)] != self.mul(dagger[y], dagger[x]) {
                    return Err(Error::InvalidDagger(format!("(xy)† ≠ y†x† at ({x}, {y})")));
                }
            }
        }
        Ok(())
    }

    /// The inversion map, the dagger of every unitary representation.
    pub fn inversion_dagger(&self) -> Vec<usize> {
        self.inverse.clone()
    }
}

/// Kolmogorov adjoint with respect to counting measure: the conjugate transpose.
pub fn kolmogorov_adjoint(m: &Operator) -> Operator {
    m.dagger()
}

/// Complex function on a finite group.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupAlgebraElement {
    group: Arc<FiniteGroup>,
    coeffs: Vec<Complex64>,
}

impl GroupAlgebraElement {
    pub fn new(group: Arc<FiniteGroup>, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != group.order {
            return Err(Error::DimensionMismatch {
                expected: group.order,
                found: coeffs.len(),
            });
        }
        Ok(Self { group, coeffs })
    }

    pub fn delta(group: Arc<FiniteGroup>, at: usize) -> Self {
        let mut coeffs = vec![ZERO; group.order];
        coeffs[at] = ONE;
        Self { group, coeffs }
    }

    pub fn uniform(group: Arc<FiniteGroup>) -> Self {
        let v = Complex64::new(1.0 / group.order as f64, 0.0);
        let coeffs = vec![v; group.order];
        Self { group, coeffs }
    }

    pub fn random<R: Rng + ?Sized>(group: Arc<FiniteGroup>, rng: &mut R) -> Self {
        let coeffs = (0..group.order).map(|_| complex_normal(rng)).collect();
        Self { group, coeffs }
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn l1_norm(&self) -> f64 {
        self.coeffs.iter().map(|z| z.norm()).sum()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    fn same_group(&self, other: &Self) -> Result<()> {
        if self.group != other.group {
            return Err(Error::GroupMismatch);
        }
        Ok(())
    }

    /// `f☥(x) = conj f(x⁻¹)`.
    pub fn gelfand(&self) -> Self {
        let g = &self.group;
        let coeffs = g.elements().map(|x| self.coeffs[g.inv(x)].conj()).collect();
        Self {
            group: Arc::clone(g),
            coeffs,
        }
    }

    /// `f‡(x) = conj f(x†)` for an involutive anti-automorphism `†`.
    pub fn cartan(&self, dagger: &[usize]) -> Result<Self> {
        self.group.check_dagger(dagger)?;
        let coeffs = self.group.elements().map(|x| self.coeffs[dagger[x]].conj()).collect();
        Ok(Self {
            group: Arc::clone(&self.group),
            coeffs,
        })
    }

    /// Matrix of `h ↦ f * h`, i.e. `Σ_y f(y)𝔏_y`.
    pub fn left_convolution_ultraop(&self) -> Operator {
        let mut m = Operator::zeros(self.group.order);
        for y in self.group.elements() {
            m += &self.group.left_translation_matrix(y).scale(self.coeffs[y]);
        }
        m
    }

    /// Applies a matrix acting on functions of the group.
    pub fn apply(&self, m: &Operator) -> Self {
        Self {
            group: Arc::clone(&self.group),
            coeffs: m.apply_vec(&self.coeffs),
        }
    }
}

/// `(g * f)(z) = Σ_y g(y) f(y⁻¹z)`.
pub fn convolve_fg(g: &GroupAlgebraElement, f: &GroupAlgebraElement) -> Result<GroupAlgebraElement> {
    g.same_group(f)?;
    let grp = &g.group;
    let mut coeffs = vec![ZERO; grp.order];
    for y in grp.elements() {
        let yi = grp.inv(y);
        for z in grp.elements() {
            coeffs[z] += g.coeffs[y] * f.coeffs[grp.mul(yi, z)];
        }
    }
    Ok(GroupAlgebraElement {
        group: Arc::clone(grp),
        coeffs,
    })
}

/// A unitary matrix representation, checked to be a homomorphism.
#[derive(Clone, Debug)]
pub struct Representation {
    group: Arc<FiniteGroup>,
    mats: Vec<Operator>,
}

impl Representation {
    pub fn new(group: Arc<FiniteGroup>, mats: Vec<Operator>) -> Result<Self> {
        if mats.len() != group.order {
            return Err(Error::DimensionMismatch {
                expected: group.order,
                found: mats.len(),
            });
        }
        let mut worst: f64 = 0.0;
        for x in group.elements() {
            for y in group.elements() {
                worst = worst.max((&mats[x] * &mats[y]).max_abs_diff(&mats[group.mul(x, y)]));
            }
        }
        if worst > 1e-12 {
            return Err(Error::NotHomomorphism(worst));
        }
        Ok(Self { group, mats })
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn matrix(&self, x: usize) -> &Operator {
        &self.mats[x]
    }

    pub fn dim(&self) -> usize {
        self.mats[0].dim()
    }

    /// Largest `‖U_x†U_x − 1‖` over the group.
    pub fn unitarity_defect(&self) -> f64 {
        let id = Operator::identity(self.dim());
        self.mats
            .iter()
            .map(|u| (&u.dagger() * u).max_abs_diff(&id))
            .fold(0.0, f64::max)
    }

    /// Dagger map induced by the matrices: `x† = y` where `U_y = U_x†`.
    pub fn dagger_map(&self) -> Result<Vec<usize>> {
        self.mats
            .iter()
            .map(|u| {
                let ud = u.dagger();
                self.mats
                    .iter()
                    .position(|v| v.max_abs_diff(&ud) < 1e-12)
                    .ok_or_else(|| Error::InvalidDagger("representation is not closed under †".into()))
            })
            .collect()
    }
}

/// `Z_f = Σ_x conj f(x)·U_x⊙U_x†`.
pub fn iga_superop_rep(f: &GroupAlgebraElement, rep: &Representation) -> Result<SuperOperator> {
    if f.group != rep.group {
        return Err(Error::GroupMismatch);
    }
    let d = rep.dim();
    let mut acc = SuperOperator::zeros(d);
    for x in f.group.elements() {
        let c = f.coeffs[x].conj();
        if c == ZERO {
            continue;
        }
        let o = sandwich(&rep.mats[x], &rep.mats[x])?;
        let scaled = SuperOperator::from_matrix(d, o.matrix().scale(c))?;
        acc = &acc + &scaled;
    }
    Ok(acc)
}

/// Cyclic group of order two.
pub fn z2() -> FiniteGroup {
    FiniteGroup::from_table("Z2", 2, vec![0, 1, 1, 0]).expect("valid table")
}

/// Permutations of three points, in lexicographic order.
pub fn s3_permutations() -> Vec<[usize; 3]> {
    vec![[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]]
}

/// Symmetric group on three points; `(pq)(i) = p(q(i))`.
pub fn s3() -> FiniteGroup {
    let perms = s3_permutations();
    let index = |p: [usize; 3]| perms.iter().position(|&q| q == p).unwrap();
    let mut table = Vec::with_capacity(36);
    for p in &perms {
        for q in &perms {
            table.push(index([p[q[0]], p[q[1]], p[q[2]]]));
        }
    }
    FiniteGroup::from_table("S3", 6, table).expect("valid table")
}

/// Quaternion matrices `±1, ±i, ±j, ±k` with `i = −iσx`, `j = −iσy`, `k = −iσz`.
pub fn q8_matrices() -> Vec<Operator> {
    use crate::operator::pauli::*;
    let one = Operator::identity(2);
    let qi = sigma_x().scale(-I);
    let qj = sigma_y().scale(-I);
    let qk = sigma_z().scale(-I);
    [one, qi, qj, qk]
        .into_iter()
        .flat_map(|m| {
            let neg = m.scale_real(-1.0);
            [m, neg]
        })
        .collect()
}

/// Quaternion group, elements ordered `1, −1, i, −i, j, −j, k, −k`.
pub fn q8() -> FiniteGroup {
    let mats = q8_matrices();
    let index = |m: &Operator| mats.iter().position(|q| q.max_abs_diff(m) < 1e-12).unwrap();
    let mut table = Vec::with_capacity(64);
    for a in &mats {
        for b in &mats {
            table.push(index(&(a * b)));
        }
    }
    FiniteGroup::from_table("Q8", 8, table).expect("valid table")
}

/// `Z2 → {1, σx}`.
pub fn z2_rep(group: Arc<FiniteGroup>) -> Result<Representation> {
    Representation::new(group, vec![Operator::identity(2), crate::operator::pauli::sigma_x()])
}

/// Two-dimensional irreducible representation of S3: permutation matrices
/// restricted to the plane orthogonal to `(1, 1, 1)`.
pub fn s3_irrep(group: Arc<FiniteGroup>) -> Result<Representation> {
    let e1 = [1.0 / 2f64.sqrt(), -1.0 / 2f64.sqrt(), 0.0];
    let e2 = [1.0 / 6f64.sqrt(), 1.0 / 6f64.sqrt(), -2.0 / 6f64.sqrt()];
    let basis = [e1, e2];
    let mats = s3_permutations()
        .into_iter()
        .map(|p| {
            // P e_k has component e_k[i] at position p(i).
            Operator::from_fn(2, |a, b| {
                let v: f64 = (0..3).map(|i| basis[a][p[i]] * basis[b][i]).sum();
                Complex64::new(v, 0.0)
            })
        })
        .collect();
    Representation::new(group, mats)
}

pub fn q8_rep(group: Arc<FiniteGroup>) -> Result<Representation> {
    Representation::new(group, q8_matrices())
}

/// `x ↦ 𝔏_x`, the left-regular representation by permutation matrices.
pub fn regular_representation(group: Arc<FiniteGroup>) -> Result<Representation> {
    let mats = group.elements().map(|x| group.left_translation_matrix(x)).collect();
    Representation::new(group, mats)
}

/// Built-in group by name (`z2`, `s3`, `q8`) with its faithful unitary
/// representation.
pub fn builtin(name: &str) -> Result<(Arc<FiniteGroup>, Representation)> {
    let group = Arc::new(match name.to_ascii_lowercase().as_str() {
        "z2" => z2(),
        "s3" => s3(),
        "q8" => q8(),
        other => {
            return Err(Error::InvalidInput(format!(
                "unknown group '{other}' (expected z2, s3 or q8)"
            )))
        }
    });
    let rep = match group.name() {
        "Z2" => z2_rep(Arc::clone(&group))?,
        "S3" => s3_irrep(Arc::clone(&group))?,
        _ => q8_rep(Arc::clone(&group))?,
    };
    Ok((group, rep))
}
