//! Ordinary least squares helpers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub r_squared: f64,
    pub n: usize,
}

/// Least-squares line `y = slope * x + intercept`.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    let n = xs.len();
    if n != ys.len() || n < 2 {
        return Err(Error::InsufficientData(format!(
            "line fit needs >= 2 paired points, got {} and {}",
            xs.len(),
            ys.len()
        )));
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("all abscissae coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let slope_stderr = if n > 2 {
        (sse / (nf - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    let r_squared = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    Ok(LineFit {
        slope,
        intercept,
        slope_stderr,
        r_squared,
        n,
    })
}

/// Solves the normal equations for `y ~ X beta` with three regressors.
/// Returns `None` when the design is rank deficient.
pub(crate) fn least_squares_3(rows: &[[f64; 3]], ys: &[f64]) -> Option<[f64; 3]> {
    let mut a = [[0.0; 3]; 3];
    let mut b = [0.0; 3];
    // centre and scale columns for conditioning
    let mut scale = [0.0f64; 3];
    for r in rows {
        for j in 0..3 {
            scale[j] = scale[j].max(r[j].abs());
        }
    }
    if scale.contains(&0.0) {
        return None;
    }
    for (r, y) in rows.iter().zip(ys) {
        let rs = [r[0] / scale[0], r[1] / scale[1], r[2] / scale[2]];
        for i in 0..3 {
            b[i] += rs[i] * y;
            for j in 0..3 {
                a[i][j] += rs[i] * rs[j];
            }
        }
    }
    let sol = solve_3x3(a, b)?;
    Some([sol[0] / scale[0], sol[1] / scale[1], sol[2] / scale[2]])
}

fn solve_3x3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    let norm = a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() <= 1e-13 * norm {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in (col + 1)..3 {
            let f = a[r][col] / a[col][col];
            for c in col..3 {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for r in (0..3).rev() {
        let s: f64 = ((r + 1)..3).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}
