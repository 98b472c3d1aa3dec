use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::OneBodyOperator;
use crate::error::{Error, Result};

/// Closest approach to the spectrum below which a resolvent solve is refused.
pub const SINGULAR_DISTANCE: f64 = 1e-8;

/// Number of eigenvalues strictly below `sigma` (Sturm count via `LDL^T`).
pub fn sturm_count(op: &OneBodyOperator, sigma: f64) -> usize {
    let mut count = 0;
    let mut d = 1.0;
    for (i, &h) in op.diagonal().iter().enumerate() {
        d = if i == 0 { h - sigma } else { h - sigma - 1.0 / d };
        if d == 0.0 {
            d = -f64::EPSILON * (1.0 + h.abs() + sigma.abs());
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// Solves `(op - z) u = rhs` by Gaussian elimination with partial pivoting.
fn solve_shifted(op: &OneBodyOperator, z: Complex64, rhs: &mut [Complex64]) {
    let n = op.len();
    let one = Complex64::new(1.0, 0.0);
    let mut d: Vec<Complex64> = op.diagonal().iter().map(|&h| Complex64::new(h, 0.0) - z).collect();
    let mut du = vec![one; n.saturating_sub(1)];
    // sub-diagonal on entry, second super-diagonal fill-in on exit
    let mut dl = vec![one; n.saturating_sub(1)];
    let b = rhs;
    for i in 0..n.saturating_sub(1) {
        if d[i].norm() >= dl[i].norm() {
            let fact = dl[i] / d[i];
            d[i + 1] -= fact * du[i];
            b[i + 1] -= fact * b[i];
            dl[i] = Complex64::new(0.0, 0.0);
        } else {
            let fact = d[i] / dl[i];
            d[i] = dl[i];
            let temp = d[i + 1];
            d[i + 1] = du[i] - fact * temp;
            if i + 2 < n {
                dl[i] = du[i + 1];
                du[i + 1] = -fact * dl[i];
            } else {
                dl[i] = Complex64::new(0.0, 0.0);
            }
            du[i] = temp;
            let tb = b[i];
            b[i] = b[i + 1];
            b[i + 1] = tb - fact * b[i + 1];
        }
    }
    b[n - 1] /= d[n - 1];
    if n > 1 {
        b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
    }
    for i in (0..n.saturating_sub(2)).rev() {
        b[i] = (b[i] - du[i] * b[i + 1] - dl[i] * b[i + 2]) / d[i];
    }
}

/// Column `y` of `(op - z)^{-1}`, with the residual and singularity checks applied.
fn resolvent_column(op: &OneBodyOperator, z: Complex64, y: usize) -> Result<Vec<Complex64>> {
    let n = op.len();
    if y == 0 || y > n {
        return Err(Error::IndexOutOfRange {
            what: "y",
            index: y,
            lo: 1,
            hi: n,
        });
    }
    if z.im.abs() < SINGULAR_DISTANCE {
        let below = sturm_count(op, z.re - SINGULAR_DISTANCE);
        let above = sturm_count(op, z.re + SINGULAR_DISTANCE);
        if above > below {
            return Err(Error::NearSingular {
                re: z.re,
                im: z.im,
                distance: SINGULAR_DISTANCE,
            });
        }
    }
    let mut u = vec![Complex64::new(0.0, 0.0); n];
    u[y - 1] = Complex64::new(1.0, 0.0);
    solve_shifted(op, z, &mut u);

    let h = op.diagonal();
    let mut res_sq = 0.0;
    for i in 0..n {
        let mut r = (Complex64::new(h[i], 0.0) - z) * u[i];
        if i > 0 {
            r += u[i - 1];
        }
        if i + 1 < n {
            r += u[i + 1];
        }
        if i + 1 == y {
            r -= 1.0;
        }
        res_sq += r.norm_sqr();
    }
    let unorm = u.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let (residual, bound) = (res_sq.sqrt(), 1e-10 * unorm);
    if !(residual <= bound) {
        return Err(Error::ResidualTooLarge { residual, bound });
    }
    Ok(u)
}

/// `<x| (op - z)^{-1} |y>`.
pub fn resolvent_element(op: &OneBodyOperator, z: Complex64, x: usize, y: usize) -> Result<Complex64> {
    let n = op.len();
    if x == 0 || x > n {
        return Err(Error::IndexOutOfRange {
            what: "x",
            index: x,
            lo: 1,
            hi: n,
        });
    }
    Ok(resolvent_column(op, z, y)?[x - 1])
}

/// Quadrature along each side of the rectangular contour.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContourRule {
    /// Composite trapezoid in arclength. The corners limit it to `O(h^2)`.
    Trapezoid,
    /// Composite trapezoid after the substitution `s = psi(u)` with
    /// `psi'(u) = (8/3) sin^4(pi u)`, which flattens the integrand at the
    /// corners and lifts the order to `O(h^6)`.
    SinTransformed,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContourSpec {
    /// Distance from the spectrum hull of `-2h` to the rectangle, on every side.
    pub margin: f64,
    /// Total quadrature nodes over the four sides.
    pub points: usize,
    pub rule: ContourRule,
}

impl Default for ContourSpec {
    fn default() -> Self {
        Self {
            margin: 1.0,
            points: 1024,
            rule: ContourRule::SinTransformed,
        }
    }
}

pub const MIN_CONTOUR_POINTS: usize = 64;

/// `<x| exp(-2 i h t) |y>` from Cauchy's integral over a rectangle around the
/// spectrum of `A = -2h`:
///
/// `exp(-i t A) = (1 / 2 pi i) \oint exp(i t z) (z - A)^{-1} dz`,
///
/// which equals `-(1 / 2 pi i) \oint exp(i t z) (-2h - z)^{-1} dz`.
pub fn dunford_amplitude(
    op: &OneBodyOperator,
    x: usize,
    y: usize,
    t: f64,
    contour: &ContourSpec,
) -> Result<Complex64> {
    let n = op.len();
    if x == 0 || x > n {
        return Err(Error::IndexOutOfRange {
            what: "x",
            index: x,
            lo: 1,
            hi: n,
        });
    }
    if !(contour.margin > 0.0) {
        return Err(Error::BadContour(format!("margin must be > 0, got {}", contour.margin)));
    }
    if contour.points < MIN_CONTOUR_POINTS {
        return Err(Error::BadContour(format!(
            "need at least {MIN_CONTOUR_POINTS} points, got {}",
            contour.points
        )));
    }
    if !(t >= 0.0) {
        return Err(Error::InvalidArgument(format!("time must be >= 0, got {t}")));
    }
    // spec(-2h) lies in [-2(2 + max|h|), 2(2 + max|h|)]
    let reach = 2.0 * (2.0 + op.max_abs_potential()) + contour.margin;
    let m = contour.margin;
    let corners = [
        Complex64::new(-reach, -m),
        Complex64::new(reach, -m),
        Complex64::new(reach, m),
        Complex64::new(-reach, m),
    ];
    let lengths = [2.0 * reach, 2.0 * m, 2.0 * reach, 2.0 * m];
    let perimeter: f64 = lengths.iter().sum();

    let mut total = Complex64::new(0.0, 0.0);
    for side in 0..4 {
        let a = corners[side];
        let b = corners[(side + 1) % 4];
        let nodes = ((contour.points as f64 * lengths[side] / perimeter).round() as usize).max(8);
        let h = 1.0 / nodes as f64;
        for j in 0..=nodes {
            let u = j as f64 * h;
            let (s, ds) = match contour.rule {
                ContourRule::Trapezoid => {
                    let w = if j == 0 || j == nodes { 0.5 } else { 1.0 };
                    (u, w)
                }
                ContourRule::SinTransformed => {
                    let psi = u - (2.0 / (3.0 * PI)) * (2.0 * PI * u).sin()
                        + (4.0 * PI * u).sin() / (12.0 * PI);
                    let dpsi = (8.0 / 3.0) * (PI * u).sin().powi(4);
                    (psi, dpsi)
                }
            };
            if ds == 0.0 {
                continue;
            }
            let z = a + (b - a) * s;
            // (z + 2h)^{-1} = (1/2) (h - (-z/2))^{-1}
            let g = 0.5 * resolvent_element(op, -z / 2.0, x, y)?;
            total += (Complex64::i() * t * z).exp() * g * (b - a) * (ds * h);
        }
    }
    Ok(total / (2.0 * PI * Complex64::i()))
}

/// Doubles the node count from `start` until successive estimates agree within
/// `tol`, failing once `max_points` is exceeded.
pub fn dunford_amplitude_converged(
    op: &OneBodyOperator,
    x: usize,
    y: usize,
    t: f64,
    margin: f64,
    start: usize,
    max_points: usize,
    tol: f64,
) -> Result<(Complex64, usize)> {
    let spec = |points| ContourSpec {
        margin,
        points,
        rule: ContourRule::SinTransformed,
    };
    let mut points = start.max(MIN_CONTOUR_POINTS);
    let mut prev = dunford_amplitude(op, x, y, t, &spec(points))?;
    loop {
        let next_points = points * 2;
        if next_points > max_points {
            return Err(Error::QuadratureNotConverged {
                difference: f64::NAN,
                points,
            });
        }
        let next = dunford_amplitude(op, x, y, t, &spec(next_points))?;
        let diff = (next - prev).norm();
        if diff <= tol {
            return Ok((next, next_points));
        }
        if next_points * 2 > max_points {
            return Err(Error::QuadratureNotConverged {
                difference: diff,
                points: next_points,
            });
        }
        prev = next;
        points = next_points;
    }
}
