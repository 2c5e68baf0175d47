//! The affine group `x ↦ a·x + b` with `a > 0`, the smallest non-unimodular
//! Lie group.
//!
//! Integrals run over exponential coordinates `(u, b) = (ln a, b)` with the
//! Jacobian `da = e^u du` folded into the weights.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quadrature::trapezoid_weights;

/// Boundary magnitude above which a test function counts as leaking.
pub const SUPPORT_TOL: f64 = 1e-12;
/// Invariance residual accepted when confirming a candidate Haar density.
pub const HAAR_TOL: f64 = 1e-6;
/// Mollifier widths used for order fits.
pub const MOLLIFIER_WIDTHS: [f64; 3] = [1e-2, 3e-3, 1e-3];
/// Half-width of a mollifier window in units of the width.
const MOLLIFIER_REACH: f64 = 12.0;
/// Mollifier grid spacing in units of the width.
const MOLLIFIER_STEP: f64 = 0.25;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AffineElement {
    a: f64,
    b: f64,
}

impl AffineElement {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidInput(format!("affine element needs a > 0, got a = {a}")));
        }
        Ok(Self { a, b })
    }

    pub fn identity() -> Self {
        Self { a: 1.0, b: 0.0 }
    }

    pub(crate) fn from_log(u: f64, b: f64) -> Self {
        Self { a: u.exp(), b }
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// `(a₂, b₂)·(a₁, b₁) = (a₂a₁, a₂b₁ + b₂)`: apply the right factor first.
    pub fn mul(&self, rhs: &Self) -> Self {
        Self {
            a: self.a * rhs.a,
            b: self.a * rhs.b + self.b,
        }
    }

    pub fn inv(&self) -> Self {
        Self {
            a: 1.0 / self.a,
            b: -self.b / self.a,
        }
    }

    /// Action on the real line.
    pub fn act(&self, x: f64) -> f64 {
        self.a * x + self.b
    }

    fn matrix(&self) -> [[f64; 2]; 2] {
        [[self.a, self.b], [0.0, 1.0]]
    }
}

fn mat_mul(p: [[f64; 2]; 2], q: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let mut r = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            r[i][j] = p[i][0] * q[0][j] + p[i][1] * q[1][j];
        }
    }
    r
}

/// `Ad_g` on the Lie algebra in the basis `X_a = E₁₁`, `X_b = E₁₂`,
/// computed as `g X g⁻¹` and read back in coordinates. Column `k` is the
/// image of basis vector `k`.
pub fn adjoint_matrix(g: &AffineElement) -> [[f64; 2]; 2] {
    let basis = [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 1.0], [0.0, 0.0]]];
    let gm = g.matrix();
    let gi = g.inv().matrix();
    let mut ad = [[0.0; 2]; 2];
    for (k, x) in basis.iter().enumerate() {
        let img = mat_mul(mat_mul(gm, *x), gi);
        // Algebra elements have a zero bottom row; coordinates are the top row.
        ad[0][k] = img[0][0];
        ad[1][k] = img[0][1];
    }
    ad
}

/// `Δ(g) = |det Ad_g|`.
pub fn modular_function(g: &AffineElement) -> f64 {
    let m = adjoint_matrix(g);
    (m[0][0] * m[1][1] - m[0][1] * m[1][0]).abs()
}

/// Rectangle in exponential coordinates with a trapezoid grid.
#[derive(Clone, Copy, Debug)]
pub struct AffineWindow {
    pub u_range: (f64, f64),
    pub b_range: (f64, f64),
    pub n_u: usize,
    pub n_b: usize,
}

impl AffineWindow {
    pub fn new(u_range: (f64, f64), b_range: (f64, f64), n_u: usize, n_b: usize) -> Result<Self> {
        if n_u < 2 || n_b < 2 || !(u_range.1 > u_range.0) || !(b_range.1 > b_range.0) {
            return Err(Error::InvalidInput(
                "affine window needs positive extent and ≥ 2 points per axis".into(),
            ));
        }
        Ok(Self {
            u_range,
            b_range,
            n_u,
            n_b,
        })
    }

    /// `u ∈ [−8, 8]`, `b ∈ [−16, 16]` at spacing 0.02.
    pub fn standard() -> Self {
        Self {
            u_range: (-8.0, 8.0),
            b_range: (-16.0, 16.0),
            n_u: 801,
            n_b: 1601,
        }
    }

    fn centered(u0: f64, hu: f64, b0: f64, hb: f64, n: usize) -> Self {
        Self {
            u_range: (u0 - hu, u0 + hu),
            b_range: (b0 - hb, b0 + hb),
            n_u: n,
            n_b: n,
        }
    }

    fn steps(&self) -> (f64, f64) {
        (
            (self.u_range.1 - self.u_range.0) / (self.n_u - 1) as f64,
            (self.b_range.1 - self.b_range.0) / (self.n_b - 1) as f64,
        )
    }

    fn point(&self, i: usize, j: usize) -> (f64, f64) {
        let (hu, hb) = self.steps();
        (self.u_range.0 + hu * i as f64, self.b_range.0 + hb * j as f64)
    }

    /// `∫∫ F(u, b) du db`; rows are summed in a fixed order.
    pub fn integrate_coords(&self, f: impl Fn(f64, f64) -> f64 + Sync) -> f64 {
        let (hu, hb) = self.steps();
        let wu = trapezoid_weights(self.n_u, hu);
        let wb = trapezoid_weights(self.n_b, hb);
        let rows: Vec<f64> = (0..self.n_u)
            .into_par_iter()
            .map(|i| {
                (0..self.n_b)
                    .map(|j| {
                        let (u, b) = self.point(i, j);
                        wb[j] * f(u, b)
                    })
                    .sum::<f64>()
                    * wu[i]
            })
            .collect();
        rows.iter().sum()
    }

    /// `∫ f(x)·ρ(a) da db` for a density `ρ` with respect to Lebesgue `da db`.
    pub fn integrate(&self, f: impl Fn(&AffineElement) -> f64 + Sync, density: impl Fn(f64) -> f64 + Sync) -> f64 {
        self.integrate_coords(|u, b| {
            let x = AffineElement::from_log(u, b);
            f(&x) * density(x.a) * x.a
        })
    }

    /// Largest `|f|` on the window edge.
    pub fn boundary_max(&self, f: impl Fn(&AffineElement) -> f64) -> f64 {
        let mut worst: f64 = 0.0;
        let mut visit = |i: usize, j: usize| {
            let (u, b) = self.point(i, j);
            worst = worst.max(f(&AffineElement::from_log(u, b)).abs());
        };
        for i in 0..self.n_u {
            visit(i, 0);
            visit(i, self.n_b - 1);
        }
        for j in 0..self.n_b {
            visit(0, j);
            visit(self.n_u - 1, j);
        }
        worst
    }

    fn require_support(&self, f: impl Fn(&AffineElement) -> f64) -> Result<()> {
        let edge = self.boundary_max(f);
        if edge > SUPPORT_TOL {
            return Err(Error::SupportLeak(edge));
        }
        Ok(())
    }
}

/// Gaussian bump `exp(−((ln a − u₀)² + (b − b₀)²)/(2s²))`.
#[derive(Clone, Copy, Debug)]
pub struct GaussianBump {
    pub u0: f64,
    pub b0: f64,
    pub s: f64,
}

impl GaussianBump {
    pub fn new(u0: f64, b0: f64, s: f64) -> Self {
        Self { u0, b0, s }
    }

    pub fn at(&self, x: &AffineElement) -> f64 {
        let du = x.a.ln() - self.u0;
        let db = x.b - self.b0;
        (-(du * du + db * db) / (2.0 * self.s * self.s)).exp()
    }
}

/// Which side a Haar measure is invariant under.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HaarSide {
    Left,
    Right,
}

impl HaarSide {
    fn translate(self, g0: &AffineElement, x: &AffineElement) -> AffineElement {
        match self {
            HaarSide::Left => g0.mul(x),
            HaarSide::Right => x.mul(g0),
        }
    }

    /// Exponent `k` of the density `a^{−k}`, normalized to 1 at the identity.
    /// Confirmed against the invariance oracle by [`derive_haar_exponent`].
    pub fn exponent(self) -> i32 {
        match self {
            HaarSide::Left => 2,
            HaarSide::Right => 1,
        }
    }

    pub fn density(self, a: f64) -> f64 {
        a.powi(-self.exponent())
    }
}

/// Relative change of `∫ f·a^{−k}` under translation by `g₀` on the given side.
pub fn invariance_residual(
    side: HaarSide,
    exponent: i32,
    g0: &AffineElement,
    f: impl Fn(&AffineElement) -> f64 + Sync,
    window: &AffineWindow,
) -> Result<f64> {
    window.require_support(&f)?;
    window.require_support(|x| f(&side.translate(g0, x)))?;
    let density = |a: f64| a.powi(-exponent);
    let base = window.integrate(&f, density);
    let moved = window.integrate(|x| f(&side.translate(g0, x)), density);
    Ok((moved - base).abs() / base.abs())
}

/// Haar invariance residual for the side's density.
pub fn haar_invariance_check(
    side: HaarSide,
    g0: &AffineElement,
    f: impl Fn(&AffineElement) -> f64 + Sync,
    window: &AffineWindow,
) -> Result<f64> {
    invariance_residual(side, side.exponent(), g0, f, window)
}

/// Scans candidate densities `a^{−k}`, `k = 0..=4`, and returns the exponent
/// with the smallest invariance residual together with all residuals.
pub fn derive_haar_exponent(
    side: HaarSide,
    g0: &AffineElement,
    f: impl Fn(&AffineElement) -> f64 + Sync + Copy,
    window: &AffineWindow,
) -> Result<(i32, Vec<f64>)> {
    let residuals = (0..=4)
        .map(|k| invariance_residual(side, k, g0, f, window))
        .collect::<Result<Vec<_>>>()?;
    let best = residuals
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.total_cmp(y.1))
        .map(|(k, _)| k as i32)
        .unwrap();
    Ok((best, residuals))
}

/// `|∫ d_L x f(xg) − Δ(g)·∫ d_L x f(x)|`, relative. Equivalent to
/// `d_L(xg) = d_L x / Δ(g)`.
pub fn quasi_invariance_check(
    g: &AffineElement,
    f: impl Fn(&AffineElement) -> f64 + Sync,
    window: &AffineWindow,
) -> Result<f64> {
    window.require_support(&f)?;
    window.require_support(|x| f(&x.mul(g)))?;
    let density = |a: f64| HaarSide::Left.density(a);
    let base = window.integrate(&f, density);
    let moved = window.integrate(|x| f(&x.mul(g)), density);
    Ok((moved - modular_function(g) * base).abs() / base.abs())
}

/// Gaussian delta of width `w` in exponential coordinates, normalized so that
/// `∫ d_L x δ_w(x) = 1`.
pub fn mollified_delta(x: &AffineElement, w: f64) -> f64 {
    let u = x.a.ln();
    let norm = 1.0 / (2.0 * std::f64::consts::PI * w * w);
    x.a * norm * (-(u * u + x.b * x.b) / (2.0 * w * w)).exp()
}

fn mollifier_points() -> usize {
    (2.0 * MOLLIFIER_REACH / MOLLIFIER_STEP) as usize + 1
}

/// Integral of `d_L x δ_w(c·x)·f(x)`: the window tracks the support of
/// `δ_w(c·x)`, which sits at `x = c⁻¹` with `b`-width `w/c.a`.
fn against_translated_delta(c: &AffineElement, w: f64, f: impl Fn(&AffineElement) -> f64 + Sync) -> f64 {
    let centre = c.inv();
    let reach = MOLLIFIER_REACH * w;
    let window = AffineWindow::centered(centre.a.ln(), reach, centre.b, reach / c.a, mollifier_points());
    window.integrate(|x| mollified_delta(&c.mul(x), w) * f(x), |a| HaarSide::Left.density(a))
}

/// Delta-distribution identity to verify.
#[derive(Clone, Copy, Debug)]
pub enum DeltaIdentity {
    /// `∫ d_L x δ(x⁻¹) f(x) = f(e)`.
    Inversion,
    /// `∫ d_L x δ(g x g⁻¹) f(x) = f(e)/Δ(g)`.
    Conjugation(AffineElement),
    /// `∫ d_L x δ(y⁻¹x) f(x) = f(y)`.
    Translation(AffineElement),
    /// `∫∫ d_L x d_L y g(x) f(y) δ(z⁻¹xy) = (g*f)(z)`.
    Trikernel(AffineElement),
}

impl DeltaIdentity {
    pub fn name(&self) -> &'static str {
        match self {
            DeltaIdentity::Inversion => "inversion",
            DeltaIdentity::Conjugation(_) => "conjugation",
            DeltaIdentity::Translation(_) => "translation",
            DeltaIdentity::Trikernel(_) => "trikernel",
        }
    }
}

/// Test functions shared by the delta checks.
fn delta_test_f(x: &AffineElement) -> f64 {
    GaussianBump::new(0.3, -0.2, 1.0).at(x)
}

fn delta_test_g(x: &AffineElement) -> f64 {
    GaussianBump::new(-0.2, 0.4, 0.5).at(x)
}

/// Relative residual of the mollified identity at width `w`.
pub fn delta_identity_check(which: DeltaIdentity, w: f64) -> Result<f64> {
    if !(w > 0.0) || w > 0.1 {
        return Err(Error::InvalidInput(format!("mollifier width {w} outside (0, 0.1]")));
    }
    let f = delta_test_f;
    let e = AffineElement::identity();
    Ok(match which {
        DeltaIdentity::Inversion => {
            // δ_w(x⁻¹) peaks at the identity with unit widths in both coordinates.
            let reach = MOLLIFIER_REACH * w;
            let window = AffineWindow::centered(0.0, reach, 0.0, 1.5 * reach, mollifier_points());
            let lhs = window.integrate(|x| mollified_delta(&x.inv(), w) * f(x), |a| HaarSide::Left.density(a));
            (lhs - f(&e)).abs() / f(&e).abs()
        }
        DeltaIdentity::Conjugation(g) => (conjugation_integral(&g, w) * modular_function(&g) / f(&e) - 1.0).abs(),
        DeltaIdentity::Translation(y) => {
            let lhs = against_translated_delta(&y.inv(), w, f);
            (lhs - f(&y)).abs() / f(&y).abs()
        }
        DeltaIdentity::Trikernel(z) => {
            let g = delta_test_g;
            let outer = AffineWindow::centered(-0.2, 4.0, 0.4, 4.0, 101);
            let zi = z.inv();
            let exact = outer.integrate(|x| g(x) * f(&x.inv().mul(&z)), |a| HaarSide::Left.density(a));
            let kernel = outer.integrate(
                |x| g(x) * against_translated_delta(&zi.mul(x), w, f),
                |a| HaarSide::Left.density(a),
            );
            (kernel - exact).abs() / exact.abs()
        }
    })
}

/// `∫ d_L x δ_w(g x g⁻¹) f(x)`. Since `g x g⁻¹ = (a, g.a·b + g.b·(1 − a))`,
/// the `b`-width of the integrand shrinks by `g.a`.
fn conjugation_integral(g: &AffineElement, w: f64) -> f64 {
    let reach = MOLLIFIER_REACH * w;
    let hb = reach * (1.0 + g.b.abs()) / g.a;
    let window = AffineWindow::centered(0.0, reach, 0.0, hb, 2 * mollifier_points());
    let gi = g.inv();
    window.integrate(
        |x| mollified_delta(&g.mul(x).mul(&gi), w) * delta_test_f(x),
        |a| HaarSide::Left.density(a),
    )
}

/// Conjugation factor `∫ d_L x δ_w(g x g⁻¹) f(x) / f(e)`; tends to `1/Δ(g)`.
pub fn conjugation_factor(g: &AffineElement, w: f64) -> f64 {
    conjugation_integral(g, w) / delta_test_f(&AffineElement::identity())
}

/// Left-Haar convolution `(g*f)(z) = ∫ d_L y g(y) f(y⁻¹z)` on a window.
pub fn convolve_at(
    g: impl Fn(&AffineElement) -> f64 + Sync,
    f: impl Fn(&AffineElement) -> f64 + Sync,
    z: &AffineElement,
    window: &AffineWindow,
) -> f64 {
    window.integrate(|y| g(y) * f(&y.inv().mul(z)), |a| HaarSide::Left.density(a))
}

/// Window wide enough for integrands involving inverted bumps.
pub fn wide_window() -> AffineWindow {
    AffineWindow {
        u_range: (-8.0, 8.0),
        b_range: (-30.0, 30.0),
        n_u: 801,
        n_b: 3001,
    }
}

/// Points at which the involution identities are compared.
pub fn probe_points() -> Vec<AffineElement> {
    [(1.0, 0.0), (1.5, 0.3), (0.7, -0.4), (2.0, 1.0)]
        .iter()
        .map(|&(a, b)| AffineElement { a, b })
        .collect()
}

/// `max_z |(g*f)☥(z) − (f☥*g☥)(z)| / max_z |(g*f)☥(z)|` for real `f`, `g`,
/// with `h☥(x) = h(x⁻¹)`.
pub fn gelfand_antihom_residual(
    g: impl Fn(&AffineElement) -> f64 + Sync + Copy,
    f: impl Fn(&AffineElement) -> f64 + Sync + Copy,
    window: &AffineWindow,
) -> Result<f64> {
    let f_star = move |x: &AffineElement| f(&x.inv());
    let g_star = move |x: &AffineElement| g(&x.inv());
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for z in probe_points() {
        let zi = z.inv();
        window.require_support(|y| g(y) * f(&y.inv().mul(&zi)))?;
        window.require_support(|y| f_star(y) * g_star(&y.inv().mul(&z)))?;
        let lhs = convolve_at(g, f, &zi, window);
        let rhs = convolve_at(f_star, g_star, &z, window);
        worst = worst.max((lhs - rhs).abs());
        scale = scale.max(lhs.abs());
    }
    Ok(worst / scale)
}

/// Comparison of the Kolmogorov adjoint of a left-convolution ultraoperator
/// with left convolution by the Gelfand-involuted kernel.
#[derive(Clone, Copy, Debug)]
pub struct AdjointWitness {
    /// `‖(𝔣Z_f)☥u − 𝔣Z_{f☥}u‖ / ‖(𝔣Z_f)☥u‖`: bounded away from zero unless unimodular.
    pub plain: f64,
    /// Same with the kernel `Δ·f☥`: quadrature-small.
    pub modular: f64,
}

/// Evaluates at the probe points, with the adjoint taken in the left-Haar
/// inner product: `(𝔣Z_f)☥u(x) = ∫ d_L y f(y) u(yx)` for real `f`.
pub fn convolution_adjoint_witness(
    f: impl Fn(&AffineElement) -> f64 + Sync + Copy,
    u: impl Fn(&AffineElement) -> f64 + Sync + Copy,
    window: &AffineWindow,
) -> Result<AdjointWitness> {
    let f_star = move |y: &AffineElement| f(&y.inv());
    let weighted = move |y: &AffineElement| modular_function(y) * f(&y.inv());
    let (mut plain, mut modular, mut scale): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for x in probe_points() {
        window.require_support(|y| f(y) * u(&y.mul(&x)))?;
        window.require_support(|y| weighted(y) * u(&y.inv().mul(&x)))?;
        let adjoint = window.integrate(|y| f(y) * u(&y.mul(&x)), |a| HaarSide::Left.density(a));
        let naive = convolve_at(f_star, u, &x, window);
        let corrected = convolve_at(weighted, u, &x, window);
        plain = plain.max((adjoint - naive).abs());
        modular = modular.max((adjoint - corrected).abs());
        scale = scale.max(adjoint.abs());
    }
    Ok(AdjointWitness {
        plain: plain / scale,
        modular: modular / scale,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn el(a: f64, b: f64) -> AffineElement {
        AffineElement::new(a, b).unwrap()
    }

    #[test]
    fn rejects_nonpositive_scale() {
        assert!(AffineElement::new(0.0, 1.0).is_err());
        assert!(AffineElement::new(-1.0, 1.0).is_err());
    }

    #[test]
    fn group_law_on_the_line() {
        let (g, h) = (el(2.0, 1.0), el(0.5, -3.0));
        let x = 0.7;
        assert_eq!(g.mul(&h).act(x), g.act(h.act(x)));
        let e = g.mul(&g.inv());
        assert!((e.a() - 1.0).abs() < 1e-15 && e.b().abs() < 1e-15);
    }

    #[test]
    fn modular_function_is_the_scale() {
        assert_eq!(modular_function(&AffineElement::identity()), 1.0);
        for b in -5..=5 {
            assert!((modular_function(&el(3.0, b as f64)) - 3.0).abs() < 1e-14);
        }
        assert_eq!(adjoint_matrix(&el(2.0, 0.5)), [[1.0, 0.0], [-0.5, 2.0]]);
    }

    #[test]
    fn identity_translation_is_invariant() {
        let f = |x: &AffineElement| GaussianBump::new(0.0, 0.0, 0.5).at(x);
        let r =
            haar_invariance_check(HaarSide::Left, &AffineElement::identity(), f, &AffineWindow::standard()).unwrap();
        assert_eq!(r, 0.0);
    }

    #[test]
    fn leaking_support_is_rejected() {
        let f = |x: &AffineElement| GaussianBump::new(0.0, 0.0, 3.0).at(x);
        let err = haar_invariance_check(HaarSide::Left, &el(2.0, 1.0), f, &AffineWindow::standard()).unwrap_err();
        assert!(matches!(err, Error::SupportLeak(_)));
    }

    #[test]
    fn mollifier_has_unit_mass() {
        let w = 0.01;
        let win = AffineWindow::centered(0.0, 12.0 * w, 0.0, 12.0 * w, 97);
        let mass = win.integrate(|x| mollified_delta(x, w), |a| HaarSide::Left.density(a));
        assert!((mass - 1.0).abs() < 1e-12, "{mass}");
    }
}
