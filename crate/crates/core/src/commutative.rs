//! The commutative analog: a single real representation label `ℓ`, the
//! heat kernel of the Wiener increment, and the two-parameter group
//! `(r, x)` with Kraus `e^{−ℓ²r + ℓx}` and instrument element
//! `e^{−2ℓ²r + 2ℓx}`.
//!
//! The Kraus-operator density solves `∂_t D = κ(−∂_r + ½∂_x²) D`, whose
//! exact solution from the identity is `δ(r − κt)·N(x; 0, κt)`.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::quadrature::trapezoid;

/// Quadrature half-window in standard deviations.
const WINDOW: f64 = 10.0;
/// Quadrature spacing in standard deviations.
const SPACING: f64 = 1.0 / 8.0;
/// CFL safety factor.
pub const CFL: f64 = 0.4;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CommSpec {
    pub ell: f64,
    pub kappa: f64,
    pub dt: f64,
    pub t: f64,
}

/// Gaussian density of an increment over time `t`.
pub fn heat_kernel(x: f64, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(invalid(format!("heat kernel needs t > 0 (got {t})")));
    }
    Ok((-x * x / (2.0 * t)).exp() / (2.0 * std::f64::consts::PI * t).sqrt())
}

/// `∫ N(u; 0, var) f(u) du` by the trapezoid rule on `mean ± 10σ`, where
/// `mean` should be where `N·f` peaks.
fn gaussian_expectation(var: f64, mean: f64, f: impl Fn(f64) -> f64) -> f64 {
    let sd = var.sqrt();
    let n = (2.0 * WINDOW / SPACING) as usize + 1;
    let h = sd * SPACING;
    let lo = mean - WINDOW * sd;
    let samples: Vec<f64> = (0..n)
        .map(|i| {
            let u = lo + h * i as f64;
            (-u * u / (2.0 * var)).exp() / (2.0 * std::f64::consts::PI * var).sqrt() * f(u)
        })
        .collect();
    trapezoid(&samples, h)
}

/// `∫ G_dt(dW) e^{2ℓ√κ dW} d(dW)`, which equals `e^{2ℓ²κdt}`.
pub fn characteristic_eigenvalue(ell: f64, dt: f64, kappa: f64) -> f64 {
    let c = 2.0 * ell * kappa.sqrt();
    gaussian_expectation(dt, c * dt, |dw| (c * dw).exp())
}

/// `∫ G_dt(dW) e^{−2ℓ²κdt + 2ℓ√κ dW} d(dW)`, which equals one.
pub fn normalized_total(ell: f64, dt: f64, kappa: f64) -> f64 {
    let c = 2.0 * ell * kappa.sqrt();
    let shift = -2.0 * ell * ell * kappa * dt;
    gaussian_expectation(dt, c * dt, |dw| (shift + c * dw).exp())
}

/// Markov operator `f ↦ E[f(x + √κ dW)]` at `x`. The peak of the integrand
/// is located by `peak_shift(x)` (use 0 for bounded `f`).
pub fn markov_apply(f: impl Fn(f64) -> f64, x: f64, dt: f64, kappa: f64, peak_shift: f64) -> f64 {
    let sk = kappa.sqrt();
    gaussian_expectation(dt, peak_shift, |dw| f(x + sk * dw))
}

/// `e^{−2ℓ²r + 2ℓx}`.
pub fn instrument_element(r: f64, x: f64, ell: f64) -> f64 {
    (-2.0 * ell * ell * r + 2.0 * ell * x).exp()
}

/// `e^{−ℓ²r + ℓx}`.
pub fn kraus(r: f64, x: f64, ell: f64) -> f64 {
    (-ell * ell * r + ell * x).exp()
}

/// `δ(r − κt)·N(x; 0, κt)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExactKod {
    /// Location of the delta in `r`.
    pub r_slice: f64,
    /// Variance of the Gaussian `x`-profile.
    pub variance: f64,
}

impl ExactKod {
    pub fn x_density(&self, x: f64) -> f64 {
        (-x * x / (2.0 * self.variance)).exp() / (2.0 * std::f64::consts::PI * self.variance).sqrt()
    }

    /// Chapman–Kolmogorov: slices compose by adding drift and variance.
    pub fn compose(&self, other: &Self) -> Self {
        Self {
            r_slice: self.r_slice + other.r_slice,
            variance: self.variance + other.variance,
        }
    }

    /// `∫∫ D(r, x)·e^{−2ℓ²r + 2ℓx} dr dx` by quadrature in `x`.
    pub fn tp_integral(&self, ell: f64) -> f64 {
        let r = self.r_slice;
        gaussian_expectation(self.variance, 2.0 * ell * self.variance, |x| {
            instrument_element(r, x, ell)
        })
    }
}

pub fn exact_kod(t: f64, kappa: f64) -> Result<ExactKod> {
    if !(t > 0.0) || !(kappa > 0.0) {
        return Err(invalid("exact KOD needs t > 0 and kappa > 0"));
    }
    Ok(ExactKod {
        r_slice: kappa * t,
        variance: kappa * t,
    })
}

/// Cell-centred density on a uniform `(r, x)` grid; `values[i·nx + j]` is
/// the density at `(r_i, x_j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridDensity {
    pub r_lo: f64,
    pub dr: f64,
    pub nr: usize,
    pub x_lo: f64,
    pub dx: f64,
    pub nx: usize,
    pub values: Vec<f64>,
}

impl GridDensity {
    pub fn r(&self, i: usize) -> f64 {
        self.r_lo + (i as f64 + 0.5) * self.dr
    }

    pub fn x(&self, j: usize) -> f64 {
        self.x_lo + (j as f64 + 0.5) * self.dx
    }

    pub fn cell(&self) -> f64 {
        self.dr * self.dx
    }

    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.cell()
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `∫ D dr` at each `x_j`.
    pub fn x_marginal(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.nx];
        for i in 0..self.nr {
            for (j, v) in self.values[i * self.nx..(i + 1) * self.nx].iter().enumerate() {
                m[j] += v * self.dr;
            }
        }
        m
    }

    /// `∫ D dx` at each `r_i`.
    pub fn r_marginal(&self) -> Vec<f64> {
        self.values
            .chunks(self.nx)
            .map(|row| row.iter().sum::<f64>() * self.dx)
            .collect()
    }

    pub fn r_mean(&self) -> f64 {
        self.r_marginal()
            .iter()
            .enumerate()
            .map(|(i, p)| self.r(i) * p * self.dr)
            .sum::<f64>()
            / self.mass()
    }

    /// `Σ_j |marginal_j − f(x_j)|·dx`.
    pub fn x_marginal_l1(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.x_marginal()
            .iter()
            .enumerate()
            .map(|(j, m)| (m - f(self.x(j))).abs())
            .sum::<f64>()
            * self.dx
    }

    /// `∫∫ D·e^{−2ℓ²r + 2ℓx}` by the midpoint rule.
    pub fn tp_integral(&self, ell: f64) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.nr {
            for j in 0..self.nx {
                acc += self.values[i * self.nx + j] * instrument_element(self.r(i), self.x(j), ell);
            }
        }
        acc * self.cell()
    }

    /// Product of Gaussians `N(r; r0, sr²)·N(x; 0, w²)` sampled at cell
    /// centres and rescaled to unit discrete mass.
    pub fn mollified_delta(
        r_range: (f64, f64),
        nr: usize,
        x_range: (f64, f64),
        nx: usize,
        r0: f64,
        sr: f64,
        w: f64,
    ) -> Self {
        let dr = (r_range.1 - r_range.0) / nr as f64;
        let dx = (x_range.1 - x_range.0) / nx as f64;
        let mut g = Self {
            r_lo: r_range.0,
            dr,
            nr,
            x_lo: x_range.0,
            dx,
            nx,
            values: vec![0.0; nr * nx],
        };
        for i in 0..nr {
            let pr = (-(g.r(i) - r0).powi(2) / (2.0 * sr * sr)).exp();
            for j in 0..nx {
                let px = (-g.x(j).powi(2) / (2.0 * w * w)).exp();
                g.values[i * nx + j] = pr * px;
            }
        }
        let m = g.mass();
        for v in &mut g.values {
            *v /= m;
        }
        g
    }
}

#[derive(Clone, Copy, Debug)]
pub struct FpkOptions {
    pub diffusion: bool,
}

impl Default for FpkOptions {
    fn default() -> Self {
        Self { diffusion: true }
    }
}

/// Evolves `∂_t D = κ(−∂_r + ½∂_x²) D` with first-order upwind advection in
/// `r`, central diffusion in `x` and zero-flux walls. The scheme is in flux
/// form, so mass is conserved to rounding.
pub fn fpk_evolve(grid: &GridDensity, kappa: f64, t_final: f64, dt_solver: f64) -> Result<GridDensity> {
    fpk_evolve_with(grid, kappa, t_final, dt_solver, FpkOptions::default())
}

pub fn fpk_evolve_with(
    grid: &GridDensity,
    kappa: f64,
    t_final: f64,
    dt_solver: f64,
    opts: FpkOptions,
) -> Result<GridDensity> {
    if !(kappa > 0.0) || !(dt_solver > 0.0) || t_final < 0.0 {
        return Err(invalid("kappa and dt must be positive, t_final nonnegative"));
    }
    let lhs = kappa * dt_solver;
    let rhs = CFL * grid.dr.min(grid.dx * grid.dx);
    if lhs > rhs {
        return Err(Error::Cfl { lhs, rhs });
    }
    let steps = (t_final / dt_solver).round() as usize;
    let (nr, nx) = (grid.nr, grid.nx);
    let adv = kappa * dt_solver / grid.dr;
    let diff = if opts.diffusion {
        0.5 * kappa * dt_solver / (grid.dx * grid.dx)
    } else {
        0.0
    };
    let mut u = grid.values.clone();
    let mut next = vec![0.0; u.len()];
    for _ in 0..steps {
        for i in 0..nr {
            for j in 0..nx {
                let k = i * nx + j;
                // Upwind flux in from i−1, out to i+1 (none through the last wall).
                let inflow = if i > 0 { u[k - nx] } else { 0.0 };
                let outflow = if i + 1 < nr { u[k] } else { 0.0 };
                let left = if j > 0 { u[k - 1] - u[k] } else { 0.0 };
                let right = if j + 1 < nx { u[k + 1] - u[k] } else { 0.0 };
                next[k] = u[k] + adv * (inflow - outflow) + diff * (left + right);
            }
        }
        std::mem::swap(&mut u, &mut next);
    }
    Ok(GridDensity {
        values: u,
        ..grid.clone()
    })
}

/// Grid L1 distance between `kernel(·, s) ⋆ kernel(·, t)` (by trapezoid
/// convolution) and `kernel(·, s + t)`.
pub fn heat_semigroup_l1(s: f64, t: f64, h: f64, half_width: f64) -> Result<f64> {
    heat_kernel(0.0, s)?;
    heat_kernel(0.0, t)?;
    let n = (2.0 * half_width / h).round() as usize + 1;
    let xs: Vec<f64> = (0..n).map(|i| -half_width + h * i as f64).collect();
    let ks: Vec<f64> = xs.iter().map(|&x| heat_kernel(x, s).unwrap()).collect();
    let mut l1 = 0.0;
    let mut samples = vec![0.0; n];
    for &x in &xs {
        for (v, (&y, &ky)) in samples.iter_mut().zip(xs.iter().zip(&ks)) {
            *v = ky * heat_kernel(x - y, t).unwrap();
        }
        l1 += (trapezoid(&samples, h) - heat_kernel(x, s + t).unwrap()).abs() * h;
    }
    Ok(l1)
}
