//! Least-squares order fits on log-log data.

/// Slope of `ln y` against `ln x`.
///
/// Fails on fewer than two points or any nonpositive value.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    if xs.iter().chain(ys).any(|&v| !(v > 0.0) || !v.is_finite()) {
        return None;
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    Some(sxy / sxx)
}

/// Fitted constant `C` in `y ≈ C·x^p` for the fitted slope `p`.
pub fn loglog_constant(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let p = loglog_slope(xs, ys)?;
    let n = xs.len() as f64;
    let c = xs.iter().zip(ys).map(|(x, y)| y.ln() - p * x.ln()).sum::<f64>() / n;
    Some(c.exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let xs = [1e-2, 1e-3, 1e-4];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(1.5)).collect();
        assert!((loglog_slope(&xs, &ys).unwrap() - 1.5).abs() < 1e-12);
        assert!((loglog_constant(&xs, &ys).unwrap() - 3.0).abs() < 1e-10);
    }

    #[test]
    fn rejects_degenerate() {
        assert!(loglog_slope(&[1.0], &[1.0]).is_none());
        assert!(loglog_slope(&[1.0, 2.0], &[0.0, 1.0]).is_none());
    }
}
