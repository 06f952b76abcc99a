//! Least-squares fits used by the scaling and decay audits.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope (zero for two points or exact data).
    pub slope_stderr: f64,
    pub r_squared: f64,
}

/// Ordinary least squares `y = intercept + slope * x`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InvalidArgument("linear fit needs at least two paired samples".into()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("linear fit needs distinct abscissae".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let slope_stderr = if xs.len() > 2 { (rss / (n - 2.0) / sxx).sqrt() } else { 0.0 };
    let r_squared = if syy > 0.0 { 1.0 - rss / syy } else { 1.0 };
    Ok(LinearFit { slope, intercept, slope_stderr, r_squared })
}

/// Least squares for `y = sum_i c_i f_i(x)` with three basis columns,
/// solved through the normal equations.
pub fn three_term_fit(columns: [&[f64]; 3], ys: &[f64]) -> Result<[f64; 3]> {
    let n = ys.len();
    if n < 3 || columns.iter().any(|c| c.len() != n) {
        return Err(Error::InvalidArgument("three-term fit needs at least three samples".into()));
    }
    let mut a = [[0.0f64; 4]; 3];
    for i in 0..3 {
        for j in 0..3 {
            a[i][j] = (0..n).map(|k| columns[i][k] * columns[j][k]).sum();
        }
        a[i][3] = (0..n).map(|k| columns[i][k] * ys[k]).sum();
    }
    // Gaussian elimination with partial pivoting
    for col in 0..3 {
        let pivot = (col..3).max_by(|&p, &q| a[p][col].abs().total_cmp(&a[q][col].abs())).expect("rows");
        a.swap(col, pivot);
        if a[col][col].abs() < 1e-300 {
            return Err(Error::Numeric { message: "singular normal equations".into(), achieved: a[col][col] });
        }
        for row in 0..3 {
            if row != col {
                let factor = a[row][col] / a[col][col];
                for k in col..4 {
                    a[row][k] -= factor * a[col][k];
                }
            }
        }
    }
    Ok([a[0][3] / a[0][0], a[1][3] / a[1][1], a[2][3] / a[2][2]])
}

/// `n` logarithmically spaced points from `lo` to `hi` inclusive.
pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 - 3.0 * x).collect();
        let f = linear_fit(&xs, &ys).unwrap();
        assert!((f.slope + 3.0).abs() < 1e-14 && (f.intercept - 2.0).abs() < 1e-14);
        assert!(f.slope_stderr < 1e-12);
        assert!(linear_fit(&[1.0], &[1.0]).is_err());
        assert!(linear_fit(&[1.0, 1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn three_terms() {
        let xs: Vec<f64> = (1..10).map(f64::from).collect();
        let ones = vec![1.0; xs.len()];
        let sq: Vec<f64> = xs.iter().map(|x| x * x).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 1.0 + 2.0 * x - 0.5 * x * x).collect();
        let c = three_term_fit([&ones, &xs, &sq], &ys).unwrap();
        assert!((c[0] - 1.0).abs() < 1e-9 && (c[1] - 2.0).abs() < 1e-9 && (c[2] + 0.5).abs() < 1e-9);
    }

    #[test]
    fn log_spacing() {
        let r = log_space(0.05, 0.5, 12);
        assert_eq!(r.len(), 12);
        assert!((r[0] - 0.05).abs() < 1e-15 && (r[11] - 0.5).abs() < 1e-14);
    }
}
