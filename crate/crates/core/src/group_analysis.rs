//! Representation-level checks of invariant derivatives, intertwining
//! relations, weak commutativity, and the Kraus-operator density of the
//! abelian group generated by a single Hermitian Lindblad operator.
//!
//! A group element is carried by its Kraus matrix `K_x`; its instrument
//! element is `𝒪_x = K_x⊙K_x†`. The right-invariant derivative along `M`
//! acts on `𝒪_x` as `X_R^M = M⊙1 + 1⊙M†`.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::instrument::{total_operation, Instrument};
use crate::operator::{Operator, ZERO};
use crate::superop::{lindblad_dissipator, sandwich, SuperOperator};
use crate::trajectory::{MeasurementRecord, RecordKind};

pub const MIN_STEP: f64 = 1e-6;
pub const MAX_STEP: f64 = 1e-2;
pub const DEFAULT_STEP: f64 = 1e-4;
pub const ORDER_STEPS: [f64; 3] = [4e-4, 2e-4, 1e-4];
/// Nested differences divide by `h²`, so rounding needs larger steps.
pub const NESTED_ORDER_STEPS: [f64; 3] = [4e-3, 2e-3, 1e-3];
pub const DEFAULT_BINS: usize = 101;
/// Histogram half-width in units of `√(κT)`.
pub const HISTOGRAM_HALF_WIDTH: f64 = 5.0;

#[derive(Clone, Debug, PartialEq)]
pub struct RepPoint {
    kraus: Operator,
}

impl RepPoint {
    /// Requires `|det K| > 1e-12` so the group inverse exists.
    pub fn new(kraus: Operator) -> Result<Self> {
        let det = kraus.det().norm();
        if !(det > 1e-12) {
            return Err(invalid(format!("representation point is singular (|det| = {det:e})")));
        }
        Ok(Self { kraus })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            kraus: Operator::identity(dim),
        }
    }

    pub fn kraus(&self) -> &Operator {
        &self.kraus
    }

    /// `𝒪_x = K⊙K†`.
    pub fn element(&self) -> SuperOperator {
        sandwich(&self.kraus, &self.kraus).expect("square")
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self {
            kraus: &self.kraus * &other.kraus,
        }
    }

    pub fn dagger(&self) -> Self {
        Self {
            kraus: self.kraus.dagger(),
        }
    }
}

fn check_step(h: f64) -> Result<()> {
    if !(MIN_STEP..=MAX_STEP).contains(&h) {
        return Err(Error::StepOutOfRange(h));
    }
    Ok(())
}

/// `X_R^M = M⊙1 + 1⊙M†` as a superoperator.
pub fn right_derivative_superop(m: &Operator) -> SuperOperator {
    let id = Operator::identity(m.dim());
    &sandwich(m, &id).expect("square") + &sandwich(&id, m).expect("square")
}

/// Central difference `(K_{e^{hL}x} − K_{e^{−hL}x})/2h`; approximates `L·K_x`.
pub fn right_inv_derivative(direction: &Operator, point: &RepPoint, h: f64) -> Result<Operator> {
    check_step(h)?;
    let plus = &direction.scale_real(h).exp()? * &point.kraus;
    let minus = &direction.scale_real(-h).exp()? * &point.kraus;
    Ok((&plus - &minus).scale_real(0.5 / h))
}

/// Central difference of `x ↦ 𝒪_x` along `direction`; approximates
/// `X_R^L∘𝒪_x`.
pub fn right_inv_derivative_superop(direction: &Operator, point: &RepPoint, h: f64) -> Result<SuperOperator> {
    check_step(h)?;
    let shifted = |s: f64| -> Result<SuperOperator> {
        let k = &direction.scale_real(s).exp()? * &point.kraus;
        sandwich(&k, &k)
    };
    Ok((&shifted(h)? - &shifted(-h)?).scale_real(0.5 / h))
}

/// `‖𝒪_{gx} − 𝒪_g∘𝒪_x‖_F`.
pub fn translation_intertwining_check(g: &RepPoint, x: &RepPoint) -> f64 {
    g.mul(x).element().frob_dist(&g.element().compose(&x.element()))
}

/// `‖(𝒪_x)‡ − 𝒪_{x†}‖_F`.
pub fn adjoint_intertwining_check(x: &RepPoint) -> f64 {
    x.element().hs_adjoint().frob_dist(&x.dagger().element())
}

/// Exact derivative `d/dh 𝒪_{e^{hL}x}|₀ = LK⊙K† + K⊙(LK)†` against
/// `X_R^L∘𝒪_x`.
pub fn differential_intertwining_check(direction: &Operator, x: &RepPoint) -> Result<f64> {
    let lk = direction * &x.kraus;
    let derivative = &sandwich(&lk, &x.kraus)? + &sandwich(&x.kraus, &lk)?;
    Ok(derivative.frob_dist(&right_derivative_superop(direction).compose(&x.element())))
}

/// Left convolution by the instrument's distribution, `Σ wᵢ 𝒪_{yᵢx}`,
/// against `Z∘𝒪_x` with `Z` the total operation.
pub fn total_intertwining_check(inst: &Instrument, x: &RepPoint) -> Result<f64> {
    if inst.dim() != x.kraus.dim() {
        return Err(Error::DimensionMismatch {
            expected: inst.dim(),
            found: x.kraus.dim(),
        });
    }
    let mut translated = SuperOperator::zeros(inst.dim());
    for atom in inst.atoms() {
        let k = &atom.kraus * &x.kraus;
        translated = &translated + &sandwich(&k, &k)?.scale_real(atom.weight);
    }
    Ok(translated.frob_dist(&total_operation(inst).compose(&x.element())))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GeneratorKind {
    Jump,
    Diffusive,
}

/// Forward generator acting on `𝒪_x`, summed over `ls`.
///
/// Jump: `−½X_R^{L†L} + L⊙L†`; diffusive: `−½X_R^{L†L+L²} + ½(X_R^L)²`.
pub fn forward_generator(ls: &[Operator], kind: GeneratorKind) -> Result<SuperOperator> {
    let d = ls
        .first()
        .ok_or_else(|| invalid("at least one Lindblad operator is required"))?
        .dim();
    let mut acc = SuperOperator::zeros(d);
    for l in ls {
        let ldl = &l.dagger() * l;
        let term = match kind {
            GeneratorKind::Jump => &right_derivative_superop(&ldl).scale_real(-0.5) + &sandwich(l, l)?,
            GeneratorKind::Diffusive => {
                let xl = right_derivative_superop(l);
                &right_derivative_superop(&(&ldl + &(l * l))).scale_real(-0.5) + &xl.compose(&xl).scale_real(0.5)
            }
        };
        acc = &acc + &term;
    }
    Ok(acc)
}

/// `‖𝔇[𝒪_x] − 𝒟[Ls]∘𝒪_x‖_F`.
pub fn generator_intertwining_check(ls: &[Operator], x: &RepPoint, kind: GeneratorKind) -> Result<f64> {
    let ox = x.element();
    let lhs = forward_generator(ls, kind)?.compose(&ox);
    let rhs = lindblad_dissipator(ls)?.compose(&ox);
    Ok(lhs.frob_dist(&rhs))
}

/// `[X_R^A, X_R^B]` applied to `K` by nested central differences; the exact
/// value is `(BA − AB)·K`.
pub fn derivative_commutator(a: &Operator, b: &Operator, point: &RepPoint, h: f64) -> Result<Operator> {
    check_step(h)?;
    // X_R^A X_R^B f(x) = ∂_s ∂_t f(e^{tB} e^{sA} x) at 0.
    let mixed = |first: &Operator, second: &Operator| -> Result<Operator> {
        let mut acc = Operator::zeros(point.kraus.dim());
        for (s, t, sign) in [(h, h, 1.0), (h, -h, -1.0), (-h, h, -1.0), (-h, -h, 1.0)] {
            let g = &(&second.scale_real(t).exp()? * &first.scale_real(s).exp()?) * &point.kraus;
            acc += &g.scale_real(sign);
        }
        Ok(acc.scale_real(0.25 / (h * h)))
    };
    Ok(&mixed(a, b)? - &mixed(b, a)?)
}

fn weak_kraus(l: &Operator, dw: f64, kappa: f64, dt: f64) -> Result<Operator> {
    let drift = (&(&l.dagger() * l) + &(l * l)).scale_real(-0.5 * kappa * dt);
    (&drift + &l.scale_real(kappa.sqrt() * dw)).exp()
}

/// Group commutator `(K^L K^M)⁻¹ K^M K^L` of two weak diffusive Kraus
/// operators with increments `dW` (for `L`) and `dV` (for `M`).
pub fn weak_group_commutator(l: &Operator, m: &Operator, dw: f64, dv: f64, kappa: f64, dt: f64) -> Result<Operator> {
    let kl = weak_kraus(l, dw, kappa, dt)?;
    let km = weak_kraus(m, dv, kappa, dt)?;
    let forward = &km * &kl;
    let backward = &kl * &km;
    backward.solve(&forward)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct WeakCommutatorResidual {
    /// Distance to `exp([M, L]κ dV dW)`.
    pub to_bch: f64,
    /// Distance to the identity.
    pub to_identity: f64,
}

pub fn weak_commutator_residual(
    l: &Operator,
    m: &Operator,
    dw: f64,
    dv: f64,
    kappa: f64,
    dt: f64,
) -> Result<WeakCommutatorResidual> {
    let c = weak_group_commutator(l, m, dw, dv, kappa, dt)?;
    let bch = m.commutator(l).scale_real(kappa * dv * dw).exp()?;
    Ok(WeakCommutatorResidual {
        to_bch: c.frob_dist(&bch),
        to_identity: c.frob_dist(&Operator::identity(l.dim())),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CommutatorEnsemble {
    /// Frobenius norm of the mean of `C − 1`.
    pub mean_norm: f64,
    /// `sqrt(Σ_entries Var / N)`.
    pub stderr: f64,
    pub samples: usize,
}

/// Mean of `C − 1` over `n` independent pairs `dW, dV ~ N(0, dt)`.
pub fn commutator_ensemble<R: Rng + ?Sized>(
    l: &Operator,
    m: &Operator,
    kappa: f64,
    dt: f64,
    n: usize,
    rng: &mut R,
) -> Result<CommutatorEnsemble> {
    if n < 2 {
        return Err(invalid("ensemble needs at least two samples"));
    }
    let d = l.dim();
    let id = Operator::identity(d);
    let mut sum = vec![ZERO; d * d];
    let mut sum_sq = vec![0.0; d * d];
    let sd = dt.sqrt();
    for _ in 0..n {
        let zw: f64 = StandardNormal.sample(&mut *rng);
        let zv: f64 = StandardNormal.sample(&mut *rng);
        let c = &weak_group_commutator(l, m, sd * zw, sd * zv, kappa, dt)? - &id;
        for ((s, q), x) in sum.iter_mut().zip(&mut sum_sq).zip(c.data()) {
            *s += x;
            *q += x.norm_sqr();
        }
    }
    let nf = n as f64;
    let mean: Vec<Complex64> = sum.iter().map(|s| s / nf).collect();
    let var: f64 = mean
        .iter()
        .zip(&sum_sq)
        .map(|(mu, q)| (q / nf - mu.norm_sqr()).max(0.0) * nf / (nf - 1.0))
        .sum();
    Ok(CommutatorEnsemble {
        mean_norm: mean.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt(),
        stderr: (var / nf).sqrt(),
        samples: n,
    })
}

/// Coordinates of `e^{−L²r + Lx}` in the abelian group of one Hermitian `L`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AbelianCoord {
    pub r: f64,
    pub x: f64,
}

impl AbelianCoord {
    pub fn compose(self, other: Self) -> Self {
        Self {
            r: self.r + other.r,
            x: self.x + other.x,
        }
    }

    /// `e^{−L²r + Lx}`.
    pub fn kraus(&self, l: &Operator) -> Result<Operator> {
        (&(l * l).scale_real(-self.r) + &l.scale_real(self.x)).exp()
    }
}

/// `r = κT`, `x = √κ ΣdW` for a single-channel Wiener record of Hermitian `L`.
pub fn abelian_coordinates(l: &Operator, record: &MeasurementRecord) -> Result<AbelianCoord> {
    if !l.is_hermitian(1e-12) {
        return Err(Error::Unsupported(
            "abelian coordinates need a Hermitian Lindblad operator".into(),
        ));
    }
    if record.kind != RecordKind::Wiener || record.n_channels != 1 {
        return Err(Error::Unsupported(
            "abelian coordinates need a single-channel Wiener record".into(),
        ));
    }
    let w: f64 = record.increments.iter().sum();
    Ok(AbelianCoord {
        r: record.kappa * record.dt * record.n_steps as f64,
        x: record.kappa.sqrt() * w,
    })
}

/// Density histogram on uniform bins.
#[derive(Clone, Debug, Serialize)]
pub struct Histogram {
    pub lo: f64,
    pub width: f64,
    pub density: Vec<f64>,
}

impl Histogram {
    pub fn midpoint(&self, i: usize) -> f64 {
        self.lo + (i as f64 + 0.5) * self.width
    }

    pub fn mass(&self) -> f64 {
        self.density.iter().sum::<f64>() * self.width
    }

    /// `Σ |p_i − f(mid_i)|·width`.
    pub fn l1_to(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.density
            .iter()
            .enumerate()
            .map(|(i, p)| (p - f(self.midpoint(i))).abs())
            .sum::<f64>()
            * self.width
    }

    pub fn l1_between(&self, other: &Self) -> f64 {
        self.density
            .iter()
            .zip(&other.density)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            * self.width
    }

    /// Discrete convolution on the same grid; requires an odd bin count so
    /// that the midpoints are symmetric about zero.
    pub fn convolve_same_grid(&self, other: &Self) -> Result<Self> {
        let n = self.density.len();
        if n != other.density.len() || n.is_multiple_of(2) || (self.lo - other.lo).abs() > 1e-12 * self.lo.abs() {
            return Err(invalid("histograms must share an odd, symmetric bin grid"));
        }
        let c = (n / 2) as isize;
        let density = (0..n as isize)
            .map(|k| {
                (0..n as isize)
                    .filter_map(|i| {
                        let j = k + c - i;
                        (0..n as isize)
                            .contains(&j)
                            .then(|| self.density[i as usize] * other.density[j as usize])
                    })
                    .sum::<f64>()
                    * self.width
            })
            .collect();
        Ok(Self {
            lo: self.lo,
            width: self.width,
            density,
        })
    }
}

/// Histogram of `xs` on `bins` uniform bins over `±half_width`; samples
/// outside the window are counted in the end bins, so the mass is one.
pub fn kod_histogram(xs: &[f64], half_width: f64, bins: usize) -> Result<Histogram> {
    if xs.is_empty() || bins == 0 || !(half_width > 0.0) {
        return Err(invalid("histogram needs samples, bins and a positive window"));
    }
    let width = 2.0 * half_width / bins as f64;
    let lo = -half_width;
    let mut counts = vec![0usize; bins];
    for &x in xs {
        let i = ((x - lo) / width).floor();
        let i = if i < 0.0 { 0 } else { (i as usize).min(bins - 1) };
        counts[i] += 1;
    }
    let norm = 1.0 / (xs.len() as f64 * width);
    Ok(Histogram {
        lo,
        width,
        density: counts.iter().map(|&c| c as f64 * norm).collect(),
    })
}

/// Normal density `N(x; 0, var)`.
pub fn normal_density(x: f64, var: f64) -> f64 {
    (-x * x / (2.0 * var)).exp() / (2.0 * std::f64::consts::PI * var).sqrt()
}
