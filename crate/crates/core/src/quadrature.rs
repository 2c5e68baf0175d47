//! One-dimensional quadrature rules.

use nalgebra::{DMatrix, SymmetricEigen};

/// Orthonormal Hermite polynomials `p_0..p_n` at `x` for the weight `e^{−x²}/√π`.
fn hermite_orthonormal(n: usize, x: f64) -> Vec<f64> {
    let mut p = Vec::with_capacity(n + 1);
    p.push(1.0);
    if n >= 1 {
        p.push(std::f64::consts::SQRT_2 * x);
    }
    for k in 1..n {
        let next = (std::f64::consts::SQRT_2 * x * p[k] - (k as f64).sqrt() * p[k - 1]) / ((k + 1) as f64).sqrt();
        p.push(next);
    }
    p
}

/// Gauss–Hermite rule for the weight `e^{−u²}/√π`.
///
/// Nodes start from the Golub–Welsch eigenvalues and are polished by Newton
/// steps; weights come from the Christoffel sum `1/Σ p_k(x)²`, which stays
/// relatively accurate at the outermost nodes. Returns `(nodes, weights)`
/// sorted by node; weights sum to 1.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "gauss_hermite needs at least one node");
    let jacobi = DMatrix::from_fn(n, n, |i, j| {
        if i + 1 == j || j + 1 == i {
            (i.max(j) as f64 / 2.0).sqrt()
        } else {
            0.0
        }
    });
    let mut nodes: Vec<f64> = SymmetricEigen::new(jacobi).eigenvalues.iter().copied().collect();
    nodes.sort_by(f64::total_cmp);
    // The rule is exactly even; the eigen-solver noise is not.
    for k in 0..n / 2 {
        let half = 0.5 * (nodes[n - 1 - k] - nodes[k]);
        nodes[k] = -half;
        nodes[n - 1 - k] = half;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    for x in nodes.iter_mut() {
        for _ in 0..3 {
            let p = hermite_orthonormal(n, *x);
            let deriv = (2.0 * n as f64).sqrt() * p[n - 1];
            *x -= p[n] / deriv;
        }
    }
    let mut weights: Vec<f64> = nodes
        .iter()
        .map(|&x| 1.0 / hermite_orthonormal(n - 1, x).iter().map(|v| v * v).sum::<f64>())
        .collect();
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    (nodes, weights)
}

/// Gauss–Hermite rule for a centred normal with variance `var`:
/// `E[f(X)] ≈ Σ wᵢ f(xᵢ)`.
pub fn gaussian_rule(n: usize, var: f64) -> (Vec<f64>, Vec<f64>) {
    let (u, w) = gauss_hermite(n);
    let scale = (2.0 * var).sqrt();
    (u.into_iter().map(|x| x * scale).collect(), w)
}

/// Uniform grid of `n` points on `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2);
    let h = (hi - lo) / (n - 1) as f64;
    (0..n).map(|i| lo + h * i as f64).collect()
}

/// Trapezoid weights for a uniform grid of `n` points with spacing `h`.
pub fn trapezoid_weights(n: usize, h: f64) -> Vec<f64> {
    let mut w = vec![h; n];
    w[0] *= 0.5;
    w[n - 1] *= 0.5;
    w
}

/// Trapezoid rule on uniformly spaced samples.
pub fn trapezoid(samples: &[f64], h: f64) -> f64 {
    let n = samples.len();
    if n < 2 {
        return 0.0;
    }
    h * (samples.iter().sum::<f64>() - 0.5 * (samples[0] + samples[n - 1]))
}

/// `∫_lo^hi f` by the trapezoid rule on `n` points.
pub fn integrate(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> f64 {
    let h = (hi - lo) / (n - 1) as f64;
    let samples: Vec<f64> = (0..n).map(|i| f(lo + h * i as f64)).collect();
    trapezoid(&samples, h)
}
