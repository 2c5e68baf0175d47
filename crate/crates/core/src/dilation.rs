//! System⊗meter dilations of the weak instruments.
//!
//! The meter is a truncated oscillator (levels `0..=N`) prepared in its
//! vacuum. Composite index is `s·(N+1) + n` for system level `s` and meter
//! level `n`. The pointer quadrature is `q = σ(a + a†)`, so the vacuum
//! wavefunction has `|ψ₀(q)|² = N(q; 0, σ²)`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::instrument::{Atom, Instrument, InstrumentKind};
use crate::operator::{Operator, I};
use crate::quadrature::{linspace, trapezoid_weights};
use crate::superop::{kraus_sum, SuperOperator};

pub const DEFAULT_CUTOFF: usize = 40;
pub const MIN_CUTOFF: usize = 20;
pub const DEFAULT_GRID_POINTS: usize = 801;
pub const GRID_HALF_WIDTH: f64 = 6.0;
/// Largest population tolerated in the top meter levels.
pub const LEAKAGE_TOL: f64 = 1e-12;
const LEAKAGE_LEVELS: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MeterModel {
    pub fock_cutoff: usize,
    pub sigma: f64,
    pub system_dim: usize,
    pub kappa: f64,
    pub dt: f64,
}

impl MeterModel {
    pub fn new(system_dim: usize, kappa: f64, dt: f64) -> Self {
        Self {
            fock_cutoff: DEFAULT_CUTOFF,
            sigma: 1.0,
            system_dim,
            kappa,
            dt,
        }
    }

    pub fn with_cutoff(mut self, n: usize) -> Self {
        self.fock_cutoff = n;
        self
    }

    fn levels(&self) -> usize {
        self.fock_cutoff + 1
    }

    fn validate(&self, l: &Operator) -> Result<()> {
        if self.fock_cutoff < MIN_CUTOFF {
            return Err(invalid(format!(
                "Fock cutoff must be at least {MIN_CUTOFF} (got {})",
                self.fock_cutoff
            )));
        }
        if !(self.kappa > 0.0) || !(self.dt > 0.0) || !(self.sigma > 0.0) {
            return Err(invalid("kappa, dt and sigma must be positive"));
        }
        if l.dim() != self.system_dim {
            return Err(Error::DimensionMismatch {
                expected: self.system_dim,
                found: l.dim(),
            });
        }
        Ok(())
    }

    /// Standard Wiener increment read off pointer position `q`.
    pub fn wiener_increment(&self, q: f64) -> f64 {
        self.dt.sqrt() * q / self.sigma
    }
}

/// Truncated annihilation operator `a = Σ √n |n−1⟩⟨n|`.
pub fn annihilation(levels: usize) -> Operator {
    let mut a = Operator::zeros(levels);
    for n in 1..levels {
        a[(n - 1, n)] = Complex64::new((n as f64).sqrt(), 0.0);
    }
    a
}

/// `exp(√(κdt)(L⊗a† − L†⊗a))` on system⊗meter.
///
/// Fails with the measured leakage when the vacuum column reaches the top
/// meter levels.
pub fn interaction_unitary(l: &Operator, meter: &MeterModel) -> Result<Operator> {
    meter.validate(l)?;
    let a = annihilation(meter.levels());
    let g = &l.kron(&a.dagger()) - &l.dagger().kron(&a);
    let u = g.scale_real((meter.kappa * meter.dt).sqrt()).exp()?;
    let leakage = vacuum_leakage(&u, meter);
    if leakage > LEAKAGE_TOL {
        return Err(Error::CutoffLeakage {
            cutoff: meter.fock_cutoff,
            leakage,
        });
    }
    Ok(u)
}

fn vacuum_leakage(u: &Operator, meter: &MeterModel) -> f64 {
    let m = meter.levels();
    let d = meter.system_dim;
    let mut worst: f64 = 0.0;
    for s0 in 0..d {
        let mut pop = 0.0;
        for s in 0..d {
            for n in m - LEAKAGE_LEVELS..m {
                pop += u[(s * m + n, s0 * m)].norm_sqr();
            }
        }
        worst = worst.max(pop);
    }
    worst
}

/// `‖U†U − 1‖` restricted to meter levels `n ≤ max_level`.
pub fn unitarity_defect(u: &Operator, meter: &MeterModel, max_level: usize) -> f64 {
    let m = meter.levels();
    let uu = &u.dagger() * u;
    let keep = |i: usize| i % m <= max_level;
    let mut worst: f64 = 0.0;
    for i in (0..uu.dim()).filter(|&i| keep(i)) {
        for j in (0..uu.dim()).filter(|&j| keep(j)) {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((uu[(i, j)] - target).norm());
        }
    }
    worst
}

/// Every meter amplitude `⟨n|U|0⟩`, `n = 0..=N`, as system operators.
pub fn fock_amplitudes(u: &Operator, meter: &MeterModel) -> Vec<Operator> {
    let m = meter.levels();
    let d = meter.system_dim;
    (0..m)
        .map(|n| Operator::from_fn(d, |s, s0| u[(s * m + n, s0 * m)]))
        .collect()
}

/// Jump-basis Kraus operator `⟨n|U|0⟩`, `n ≤ 3`.
pub fn jump_kraus_extract(l: &Operator, meter: &MeterModel, n: usize) -> Result<Operator> {
    if n > 3 {
        return Err(invalid(format!("jump extraction supports n ≤ 3 (got {n})")));
    }
    let u = interaction_unitary(l, meter)?;
    Ok(fock_amplitudes(&u, meter).swap_remove(n))
}

/// Position-space Fock wavefunctions `ψ_n(q; σ)` for `n = 0..levels`.
///
/// Upward recurrence on normalized Hermite functions, so no factorials appear.
pub fn hermite_functions(levels: usize, q: f64, sigma: f64) -> Vec<f64> {
    let x = q / (std::f64::consts::SQRT_2 * sigma);
    let scale = (std::f64::consts::SQRT_2 * sigma).powf(-0.5);
    let mut phi = Vec::with_capacity(levels);
    phi.push(std::f64::consts::PI.powf(-0.25) * (-0.5 * x * x).exp());
    if levels > 1 {
        phi.push(std::f64::consts::SQRT_2 * x * phi[0]);
    }
    for n in 1..levels.saturating_sub(1) {
        let nf = n as f64;
        let next = (2.0 / (nf + 1.0)).sqrt() * x * phi[n] - (nf / (nf + 1.0)).sqrt() * phi[n - 1];
        phi.push(next);
    }
    phi.iter().map(|p| p * scale).collect()
}

/// Uniform pointer grid with trapezoid weights.
#[derive(Clone, Debug)]
pub struct QGrid {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QGrid {
    /// `n` points on `±half_width·σ`.
    pub fn new(sigma: f64, half_width: f64, n: usize) -> Result<Self> {
        if half_width < GRID_HALF_WIDTH || n < 101 {
            return Err(invalid(format!(
                "pointer grid too coarse: need ±{GRID_HALF_WIDTH}σ and at least 101 points"
            )));
        }
        let lim = half_width * sigma;
        let points = linspace(-lim, lim, n);
        let weights = trapezoid_weights(n, 2.0 * lim / (n - 1) as f64);
        Ok(Self { points, weights })
    }

    pub fn standard(sigma: f64) -> Self {
        Self::new(sigma, GRID_HALF_WIDTH, DEFAULT_GRID_POINTS).expect("default grid is valid")
    }
}

/// `⟨q|U|0⟩ = Σ_n ψ_n(q) ⟨n|U|0⟩` on each grid point.
pub fn kraus_on_grid(amplitudes: &[Operator], meter: &MeterModel, grid: &QGrid) -> Vec<Operator> {
    let d = meter.system_dim;
    grid.points
        .par_iter()
        .map(|&q| {
            let psi = hermite_functions(amplitudes.len(), q, meter.sigma);
            let mut k = Operator::zeros(d);
            for (p, amp) in psi.iter().zip(amplitudes) {
                k += &amp.scale_real(*p);
            }
            k
        })
        .collect()
}

/// Quadrature-basis Kraus operators `⟨q|U|0⟩` on `grid`.
pub fn quadrature_kraus_extract(l: &Operator, meter: &MeterModel, grid: &QGrid) -> Result<Vec<Operator>> {
    let lim = grid.points.last().copied().unwrap_or(0.0);
    if lim < GRID_HALF_WIDTH * meter.sigma * (1.0 - 1e-12) {
        return Err(invalid("pointer grid must span ±6σ"));
    }
    let u = interaction_unitary(l, meter)?;
    Ok(kraus_on_grid(&fock_amplitudes(&u, meter), meter, grid))
}

/// Effective diffusive Kraus `√N(q;0,σ²)·exp(−½(L†L+L²)κdt + L√κ dW)`.
pub fn diffusive_target(l: &Operator, meter: &MeterModel, q: f64) -> Result<Operator> {
    let kdt = meter.kappa * meter.dt;
    let dw = meter.wiener_increment(q);
    let drift = (&(&l.dagger() * l) + &(l * l)).scale_real(-0.5 * kdt);
    let gen = &drift + &l.scale_real(meter.kappa.sqrt() * dw);
    Ok(gen.exp()?.scale_real(vacuum_amplitude(q, meter.sigma)))
}

fn vacuum_amplitude(q: f64, sigma: f64) -> f64 {
    hermite_functions(1, q, sigma)[0]
}

/// `sqrt(∫‖A(q) − B(q)‖² dq / ∫‖B(q)‖² dq)` on the grid.
pub fn weighted_relative_l2(a: &[Operator], b: &[Operator], grid: &QGrid) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for ((x, y), w) in a.iter().zip(b).zip(&grid.weights) {
        num += w * x.frob_dist(y).powi(2);
        den += w * y.frob_norm().powi(2);
    }
    (num / den).sqrt()
}

/// `∫ K(q)†K(q) dq`.
pub fn povm_marginal(kraus: &[Operator], grid: &QGrid) -> Operator {
    let d = kraus[0].dim();
    let mut acc = Operator::zeros(d);
    for (k, w) in kraus.iter().zip(&grid.weights) {
        acc += &(&k.dagger() * k).scale_real(*w);
    }
    acc
}

/// `∫ K(q)⊙K(q)† dq`.
pub fn grid_total_operation(kraus: &[Operator], grid: &QGrid) -> SuperOperator {
    kraus_sum(kraus[0].dim(), grid.weights.iter().copied().zip(kraus))
}

/// Relative L2 distance between the extracted `⟨q|U|0⟩` and
/// [`diffusive_target`].
pub fn quadrature_extraction_error(l: &Operator, meter: &MeterModel, grid: &QGrid) -> Result<f64> {
    let extracted = quadrature_kraus_extract(l, meter, grid)?;
    let target = grid
        .points
        .iter()
        .map(|&q| diffusive_target(l, meter, q))
        .collect::<Result<Vec<_>>>()?;
    Ok(weighted_relative_l2(&extracted, &target, grid))
}

/// Instrument from the number-basis amplitudes `n ≤ max_n`, unit weights.
pub fn jump_dilation_instrument(l: &Operator, meter: &MeterModel, max_n: usize) -> Result<Instrument> {
    let u = interaction_unitary(l, meter)?;
    let atoms = fock_amplitudes(&u, meter)
        .into_iter()
        .take(max_n + 1)
        .map(|kraus| Atom { weight: 1.0, kraus })
        .collect();
    Instrument::new(meter.system_dim, InstrumentKind::Discrete, atoms)
}

/// Instrument from the pointer-basis amplitudes with trapezoid weights.
pub fn quadrature_dilation_instrument(l: &Operator, meter: &MeterModel, grid: &QGrid) -> Result<Instrument> {
    let atoms = quadrature_kraus_extract(l, meter, grid)?
        .into_iter()
        .zip(&grid.weights)
        .map(|(kraus, &weight)| Atom { weight, kraus })
        .collect();
    Instrument::new(meter.system_dim, InstrumentKind::Quadrature, atoms)
}

#[derive(Clone, Debug, Serialize)]
pub struct PhaseReport {
    pub phi: f64,
    /// Largest `‖⟨q|e^{−iφa†a}U[L]|0⟩ − ⟨q|U[e^{−iφ}L]|0⟩‖_F` over the grid.
    pub max_residual: f64,
}

/// Rotating the meter by `e^{−iφ a†a}` after the interaction equals
/// measuring with `e^{−iφ}L`.
pub fn local_oscillator_phase(l: &Operator, phi: f64, meter: &MeterModel, grid: &QGrid) -> Result<PhaseReport> {
    let u = interaction_unitary(l, meter)?;
    let rotated: Vec<Operator> = fock_amplitudes(&u, meter)
        .into_iter()
        .enumerate()
        .map(|(n, amp)| amp.scale(Complex64::from_polar(1.0, -(n as f64) * phi)))
        .collect();
    let lhs = kraus_on_grid(&rotated, meter, grid);
    let l_rot = l.scale(Complex64::from_polar(1.0, -phi));
    let rhs = quadrature_kraus_extract(&l_rot, meter, grid)?;
    let max_residual = lhs.iter().zip(&rhs).map(|(a, b)| a.frob_dist(b)).fold(0.0, f64::max);
    Ok(PhaseReport { phi, max_residual })
}

#[derive(Clone, Debug, Serialize)]
pub struct SplitFormReport {
    /// Relative L2 distance between `⟨q|U|0⟩` and the split form.
    pub pointwise_residual: f64,
    /// `‖∫ K⊙K† − ∫ S⊙S†‖_F` for extracted `K` and split form `S`.
    pub total_operation_residual: f64,
    /// Largest `‖K − K†‖` relative to `‖K‖` over the grid.
    pub hermiticity_defect: f64,
    /// Smallest eigenvalue of `(K + K†)/2` relative to `‖K‖` over the grid.
    pub min_relative_eigenvalue: f64,
    /// Largest `‖K†K − tr(K†K)/d‖` relative to `tr(K†K)/d` over the grid.
    pub povm_scalar_defect: f64,
}

/// Compares `⟨q|U[X + iY]|0⟩` with the factorization
/// `e^{−½i{X,Y}κdt + iY√κ dW}·√N(q;0,σ²)·e^{−X²κdt + X√κ dW}`.
pub fn quadrature_split_form_check(
    x: &Operator,
    y: &Operator,
    meter: &MeterModel,
    grid: &QGrid,
) -> Result<SplitFormReport> {
    if !x.is_hermitian(1e-12) || !y.is_hermitian(1e-12) {
        return Err(invalid("split-form check needs Hermitian X and Y"));
    }
    let l = x + &y.scale(I);
    let extracted = quadrature_kraus_extract(&l, meter, grid)?;
    let kdt = meter.kappa * meter.dt;
    let sk = meter.kappa.sqrt();
    let anti = x.anticommutator(y);
    let xx = x * x;
    let split = grid
        .points
        .iter()
        .map(|&q| {
            let dw = meter.wiener_increment(q);
            let unitary = (&anti.scale(I * (-0.5 * kdt)) + &y.scale(I * (sk * dw))).exp()?;
            let positive = (&xx.scale_real(-kdt) + &x.scale_real(sk * dw)).exp()?;
            Ok((&unitary * &positive).scale_real(vacuum_amplitude(q, meter.sigma)))
        })
        .collect::<Result<Vec<_>>>()?;

    let d = meter.system_dim as f64;
    let mut herm: f64 = 0.0;
    let mut min_eig = f64::INFINITY;
    let mut scalar: f64 = 0.0;
    for k in &extracted {
        let norm = k.frob_norm();
        if norm < 1e-300 {
            continue;
        }
        herm = herm.max(k.hermiticity_defect() / norm);
        let h = k.hermitian_part();
        min_eig = min_eig.min(h.herm_eigvals()?[0] / norm);
        let e = &k.dagger() * k;
        let mean = e.trace().re / d;
        let dev = e.frob_dist(&Operator::identity(e.dim()).scale_real(mean));
        scalar = scalar.max(dev / mean);
    }
    Ok(SplitFormReport {
        pointwise_residual: weighted_relative_l2(&extracted, &split, grid),
        total_operation_residual: grid_total_operation(&extracted, grid).frob_dist(&grid_total_operation(&split, grid)),
        hermiticity_defect: herm,
        min_relative_eigenvalue: min_eig,
        povm_scalar_defect: scalar,
    })
}
