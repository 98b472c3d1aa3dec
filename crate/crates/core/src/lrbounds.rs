//! Lieb-Robinson quantities for the XY chain, computed from one-body amplitudes
//! `K_{x,y}(2t) = <x| exp(-2 i h t) |y>`, plus fits of the two bound shapes
//!
//! * light cone: `Q <= C exp(-xi (delta - v t^alpha))`
//! * power law:  `Q <= C (t^gamma / delta)^p`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::onebody::{amplitude_row, eigensystem, build_operator, suffix_sums, tail_sum, EigenSystem, Scale};
use crate::potentials::{Field, FieldSpec};
use crate::stats::{fit_line, least_squares_3};
use crate::transport::DEFAULT_EPSILON;

/// Grid values below this are stored as zero and never fitted.
pub const VALUE_FLOOR: f64 = 1e-20;
/// Cells with values in this open interval form the exponential-tail regime.
pub const TAIL_WINDOW: (f64, f64) = (1e-14, 1e-2);
pub const MIN_TAIL_CELLS: usize = 20;
/// Threshold defining the per-time front `delta_eps(t)` of the collapse fit.
pub const COLLAPSE_EPSILON: f64 = 1e-8;
pub const MAX_ALPHA: f64 = 1.2;
/// Lower end of the alpha search. Below it `t^alpha` is indistinguishable from
/// `1 + alpha ln t` over desk-scale windows and `v` runs off to infinity.
pub const MIN_ALPHA: f64 = 0.05;

/// `||[c_x(t), sigma3_{x'}]|| = 2 |K_{x,x'}(2t)|`.
pub fn exact_fermion_commutator_sigma3(
    eig: &EigenSystem,
    x: usize,
    x_prime: usize,
    t: f64,
) -> Result<f64> {
    check_site("x'", x_prime, eig.len())?;
    let row = amplitude_row(eig, x, t, Scale::Fermion)?;
    Ok(2.0 * row.at(x_prime).norm())
}

/// `sum_{y >= x'} |K_{x,y}(2t)|`, bounding `||[c_x(t), B]|| / ||B||` for `B` at `x' > x`.
pub fn fermion_tail_bound(eig: &EigenSystem, x: usize, x_prime: usize, t: f64) -> Result<f64> {
    tail_sum(eig, x, x_prime, t)
}

/// `4 sum_{y <= x} tail(y, x', t)`, bounding `||[S^-_x(t), B]|| / ||B||` for `B` at `x' > x`.
pub fn spin_bound_jw(eig: &EigenSystem, x: usize, x_prime: usize, t: f64) -> Result<f64> {
    let mut total = 0.0;
    for y in 1..=x {
        total += tail_sum(eig, y, x_prime, t)?;
    }
    Ok(4.0 * total)
}

fn check_site(what: &'static str, x: usize, n: usize) -> Result<()> {
    if x == 0 || x > n {
        return Err(Error::IndexOutOfRange {
            what,
            index: x,
            lo: 1,
            hi: n,
        });
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConeQuantity {
    ExactSigma3,
    FermionTail,
    SpinJw,
}

/// Commutator quantity `Q(delta, t)` with source at site 1 and target at `1 + delta`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeGrid {
    pub deltas: Vec<usize>,
    pub times: Vec<f64>,
    /// `values[i_t][i_delta]`
    pub values: Vec<Vec<f64>>,
    pub quantity: ConeQuantity,
    pub field: Option<FieldSpec>,
    /// Per time: no reflection from the far end at the transport threshold.
    pub reflection_safe: Vec<bool>,
    pub n: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeCell {
    pub delta: usize,
    pub t: f64,
    pub value: f64,
}

impl ConeGrid {
    pub fn value(&self, i_delta: usize, i_t: usize) -> f64 {
        self.values[i_t][i_delta]
    }

    /// All cells, time-major.
    pub fn cells(&self) -> Vec<(ConeCell, bool)> {
        let mut out = Vec::with_capacity(self.times.len() * self.deltas.len());
        for (i_t, &t) in self.times.iter().enumerate() {
            for (i_d, &delta) in self.deltas.iter().enumerate() {
                out.push((
                    ConeCell {
                        delta,
                        t,
                        value: self.values[i_t][i_d],
                    },
                    self.reflection_safe[i_t],
                ));
            }
        }
        out
    }

    /// Reflection-safe cells with `t > 0`, `delta >= 1` and a value inside `window`,
    /// taken only beyond the last separation (per time) whose value reaches `window.1`.
    /// That keeps oscillation nodes inside the cone out of the tail regime.
    pub fn cells_in(&self, window: (f64, f64)) -> Vec<ConeCell> {
        let mut out = Vec::new();
        for (i_t, &t) in self.times.iter().enumerate() {
            if !self.reflection_safe[i_t] || !(t > 0.0) {
                continue;
            }
            let row = &self.values[i_t];
            let start = row.iter().rposition(|&v| v >= window.1).map_or(0, |i| i + 1);
            for (i_d, &delta) in self.deltas.iter().enumerate().skip(start) {
                let value = row[i_d];
                if delta >= 1 && value > window.0 && value < window.1 {
                    out.push(ConeCell { delta, t, value });
                }
            }
        }
        out
    }

    pub fn tail_cells(&self) -> Vec<ConeCell> {
        self.cells_in(TAIL_WINDOW)
    }

    /// Scales every value; used to check that fits only move `C`.
    pub fn scaled(&self, factor: f64) -> ConeGrid {
        let mut g = self.clone();
        for row in &mut g.values {
            for v in row {
                *v *= factor;
            }
        }
        g
    }
}

pub fn cone_grid(
    field: &Field,
    deltas: &[usize],
    times: &[f64],
    quantity: ConeQuantity,
    margin: usize,
) -> Result<ConeGrid> {
    let eig = eigensystem(&build_operator(field))?;
    let mut grid = cone_grid_from(&eig, deltas, times, quantity, margin)?;
    grid.field = Some(field.spec.clone());
    Ok(grid)
}

pub fn cone_grid_from(
    eig: &EigenSystem,
    deltas: &[usize],
    times: &[f64],
    quantity: ConeQuantity,
    margin: usize,
) -> Result<ConeGrid> {
    let n = eig.len();
    if let Some(&d) = deltas.iter().find(|&&d| d + 1 > n) {
        return Err(Error::IndexOutOfRange {
            what: "separation",
            index: d,
            lo: 0,
            hi: n - 1,
        });
    }
    let columns = times
        .par_iter()
        .map(|&t| {
            let row = amplitude_row(eig, 1, t, Scale::Fermion)?;
            let mags = row.magnitudes();
            let tails = suffix_sums(&mags);
            let front = tails.iter().rposition(|&v| v > DEFAULT_EPSILON).unwrap_or(0);
            let values = deltas
                .iter()
                .map(|&d| {
                    let v = match quantity {
                        ConeQuantity::ExactSigma3 => 2.0 * mags[d],
                        ConeQuantity::FermionTail => tails[d],
                        ConeQuantity::SpinJw => 4.0 * tails[d],
                    };
                    if v < VALUE_FLOOR {
                        0.0
                    } else {
                        v
                    }
                })
                .collect::<Vec<_>>();
            Ok((values, front + margin < n))
        })
        .collect::<Result<Vec<_>>>()?;
    let (values, reflection_safe) = columns.into_iter().unzip();
    Ok(ConeGrid {
        deltas: deltas.to_vec(),
        times: times.to_vec(),
        values,
        quantity,
        field: None,
        reflection_safe,
        n,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitWindow {
    pub t_min: f64,
    pub t_max: f64,
    pub delta_min: usize,
    pub delta_max: usize,
    pub cells: usize,
}

impl FitWindow {
    fn of(cells: &[ConeCell]) -> Self {
        FitWindow {
            t_min: cells.iter().map(|c| c.t).fold(f64::INFINITY, f64::min),
            t_max: cells.iter().map(|c| c.t).fold(f64::NEG_INFINITY, f64::max),
            delta_min: cells.iter().map(|c| c.delta).min().unwrap_or(0),
            delta_max: cells.iter().map(|c| c.delta).max().unwrap_or(0),
            cells: cells.len(),
        }
    }
}

/// Per-time front `delta_eps(t) ~ v t^alpha`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrontCollapse {
    pub epsilon: f64,
    pub alpha: f64,
    pub v: f64,
    pub r_squared: f64,
    pub samples: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeFit {
    pub alpha: f64,
    pub v: f64,
    pub xi: f64,
    /// Least-squares constant raised by the largest fitted residual, so the
    /// fitted form bounds every fitted cell.
    pub c: f64,
    /// Plain least-squares constant.
    pub c_ls: f64,
    /// Root-mean-square residual of `ln Q`.
    pub loss: f64,
    pub max_residual: f64,
    pub window: FitWindow,
    /// Alpha ended on an end of the search range.
    pub at_boundary: bool,
    pub front_collapse: Option<FrontCollapse>,
}

impl ConeFit {
    /// `factor * C * exp(-xi (delta - v t^alpha))`.
    pub fn bound(&self, delta: f64, t: f64, factor: f64) -> f64 {
        factor * self.c * (-self.xi * (delta - self.v * t.powf(self.alpha))).exp()
    }

    /// Fraction of `cells` with `value <= bound(factor)`.
    pub fn coverage(&self, cells: &[ConeCell], factor: f64) -> f64 {
        if cells.is_empty() {
            return 1.0;
        }
        let ok = cells
            .iter()
            .filter(|c| c.value <= self.bound(c.delta as f64, c.t, factor))
            .count();
        ok as f64 / cells.len() as f64
    }
}

/// Linear least squares at fixed alpha: returns `(ln C, xi, xi v, sse)`.
fn solve_at_alpha(cells: &[ConeCell], alpha: f64) -> Option<([f64; 3], f64)> {
    let rows: Vec<[f64; 3]> = cells
        .iter()
        .map(|c| [1.0, -(c.delta as f64), c.t.powf(alpha)])
        .collect();
    let ys: Vec<f64> = cells.iter().map(|c| c.value.ln()).collect();
    let beta = least_squares_3(&rows, &ys)?;
    let sse = rows
        .iter()
        .zip(&ys)
        .map(|(r, y)| (y - beta[0] - beta[1] * r[1] - beta[2] * r[2]).powi(2))
        .sum();
    Some((beta, sse))
}

fn sse_at(cells: &[ConeCell], alpha: f64) -> f64 {
    solve_at_alpha(cells, alpha).map_or(f64::INFINITY, |(_, s)| s)
}

/// Splits cells deterministically: every `every`-th cell (time-major order) is held out.
pub fn split_holdout(cells: &[ConeCell], every: usize) -> (Vec<ConeCell>, Vec<ConeCell>) {
    let every = every.max(2);
    let mut train = Vec::new();
    let mut held = Vec::new();
    for (i, c) in cells.iter().enumerate() {
        if i % every == every - 1 {
            held.push(*c);
        } else {
            train.push(*c);
        }
    }
    (train, held)
}

/// Fits the light-cone form to the grid's tail-regime cells.
pub fn fit_lightcone(grid: &ConeGrid) -> Result<ConeFit> {
    let mut fit = fit_lightcone_cells(&grid.tail_cells())?;
    fit.front_collapse = front_collapse(grid, COLLAPSE_EPSILON);
    Ok(fit)
}

/// Fits `ln Q = ln C - xi delta + xi v t^alpha` to the given cells. For each alpha the
/// problem is linear; alpha itself is found by a scan over `[0.05, 1.2]` refined by
/// golden-section search.
pub fn fit_lightcone_cells(cells: &[ConeCell]) -> Result<ConeFit> {
    if cells.len() < MIN_TAIL_CELLS {
        return Err(Error::InsufficientData(format!(
            "light-cone fit needs >= {MIN_TAIL_CELLS} tail cells, have {}",
            cells.len()
        )));
    }
    if cells.iter().any(|c| !(c.value > 0.0) || !(c.t > 0.0)) {
        return Err(Error::InvalidArgument("cells need positive values and times".into()));
    }
    let steps = 115;
    let h = (MAX_ALPHA - MIN_ALPHA) / steps as f64;
    let grid_alpha = |i: usize| MIN_ALPHA + i as f64 * h;
    let scan: Vec<f64> = (0..=steps).map(|i| sse_at(cells, grid_alpha(i))).collect();
    let best = (0..=steps)
        .min_by(|&a, &b| scan[a].total_cmp(&scan[b]))
        .unwrap_or(0);
    let (mut a, mut b) = (
        (grid_alpha(best) - h).max(MIN_ALPHA),
        (grid_alpha(best) + h).min(MAX_ALPHA),
    );
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (sse_at(cells, c), sse_at(cells, d));
    for _ in 0..200 {
        if b - a < 1e-14 {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = sse_at(cells, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = sse_at(cells, d);
        }
    }
    let mut alpha = 0.5 * (a + b);
    // golden section cannot land exactly on an end of the range
    for edge in [MIN_ALPHA, MAX_ALPHA] {
        if sse_at(cells, edge) <= sse_at(cells, alpha) {
            alpha = edge;
        }
    }
    let at_boundary = alpha - MIN_ALPHA < 1e-6 || MAX_ALPHA - alpha < 1e-6;
    let (beta, sse) = solve_at_alpha(cells, alpha)
        .ok_or_else(|| Error::InsufficientData("rank-deficient cone design".into()))?;
    let xi = beta[1];
    let v = beta[2] / beta[1];
    if !(xi > 0.0) || !(v > 0.0) {
        return Err(Error::InsufficientData(format!(
            "degenerate cone fit (xi = {xi}, v = {v})"
        )));
    }
    let max_residual = cells
        .iter()
        .map(|c| c.value.ln() - beta[0] + xi * c.delta as f64 - beta[2] * c.t.powf(alpha))
        .fold(0.0f64, f64::max);
    Ok(ConeFit {
        alpha,
        v,
        xi,
        c: (beta[0] + max_residual).exp(),
        c_ls: beta[0].exp(),
        loss: (sse / cells.len() as f64).sqrt(),
        max_residual,
        window: FitWindow::of(cells),
        at_boundary,
        front_collapse: None,
    })
}

/// Regresses `ln delta_eps(t)` on `ln t` over safe times with a nonzero front.
pub fn front_collapse(grid: &ConeGrid, epsilon: f64) -> Option<FrontCollapse> {
    let (mut lx, mut ly) = (Vec::new(), Vec::new());
    for (i_t, &t) in grid.times.iter().enumerate() {
        if !grid.reflection_safe[i_t] || !(t > 0.0) {
            continue;
        }
        let front = grid
            .deltas
            .iter()
            .zip(&grid.values[i_t])
            .filter(|(_, &v)| v > epsilon)
            .map(|(&d, _)| d)
            .max();
        if let Some(d) = front.filter(|&d| d > 0) {
            lx.push(t.ln());
            ly.push((d as f64).ln());
        }
    }
    if lx.len() < 3 {
        return None;
    }
    let fit = fit_line(&lx, &ly).ok()?;
    Some(FrontCollapse {
        epsilon,
        alpha: fit.slope,
        v: fit.intercept.exp(),
        r_squared: fit.r_squared,
        samples: fit.n,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub p: f64,
    pub gamma: f64,
    pub stderr: f64,
    /// Normal-approximation 95% interval for gamma.
    pub ci95: (f64, f64),
    pub log_c: f64,
    pub r_squared: f64,
    pub window: FitWindow,
}

/// Fits `ln Q = ln C + p (gamma ln t - ln delta)` over safe cells with
/// values in `(VALUE_FLOOR, 1e-2)`.
pub fn fit_powerlaw(grid: &ConeGrid, p: f64) -> Result<PowerLawFit> {
    fit_powerlaw_cells(&grid.cells_in((VALUE_FLOOR, TAIL_WINDOW.1)), p)
}

pub fn fit_powerlaw_cells(cells: &[ConeCell], p: f64) -> Result<PowerLawFit> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "power-law exponent p must be > 0, got {p}"
        )));
    }
    if cells.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "power-law fit needs >= 3 cells, have {}",
            cells.len()
        )));
    }
    let xs: Vec<f64> = cells.iter().map(|c| c.t.ln()).collect();
    let ys: Vec<f64> = cells
        .iter()
        .map(|c| c.value.ln() / p + (c.delta as f64).ln())
        .collect();
    let fit = fit_line(&xs, &ys)?;
    Ok(PowerLawFit {
        p,
        gamma: fit.slope,
        stderr: fit.slope_stderr,
        ci95: (
            fit.slope - 1.96 * fit.slope_stderr,
            fit.slope + 1.96 * fit.slope_stderr,
        ),
        log_c: p * fit.intercept,
        r_squared: fit.r_squared,
        window: FitWindow::of(cells),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::FieldSpec;
    use proptest::prelude::*;

    fn eig_for(spec: FieldSpec) -> EigenSystem {
        eigensystem(&build_operator(&Field::generate(&spec).unwrap())).unwrap()
    }

    fn synthetic(c: f64, xi: f64, v: f64, alpha: f64) -> ConeGrid {
        let deltas: Vec<usize> = (1..=60).collect();
        let times: Vec<f64> = (1..=12).map(|i| 0.5 * i as f64).collect();
        let values = times
            .iter()
            .map(|&t| {
                deltas
                    .iter()
                    .map(|&d| c * (-xi * (d as f64 - v * t.powf(alpha))).exp())
                    .collect()
            })
            .collect();
        ConeGrid {
            reflection_safe: vec![true; times.len()],
            deltas,
            times,
            values,
            quantity: ConeQuantity::FermionTail,
            field: None,
            n: 1000,
        }
    }

    #[test]
    fn t_zero_values() {
        let eig = eig_for(FieldSpec::fibonacci(1.0, 0.0, 20));
        assert_eq!(exact_fermion_commutator_sigma3(&eig, 3, 3, 0.0).unwrap(), 2.0);
        assert_eq!(exact_fermion_commutator_sigma3(&eig, 3, 7, 0.0).unwrap(), 0.0);
        assert_eq!(fermion_tail_bound(&eig, 3, 7, 0.0).unwrap(), 0.0);
        assert_eq!(spin_bound_jw(&eig, 3, 7, 0.0).unwrap(), 0.0);
        assert!(fermion_tail_bound(&eig, 7, 3, 1.0).is_err());
        assert!(spin_bound_jw(&eig, 7, 7, 1.0).is_err());
    }

    #[test]
    fn single_summand_spin_bound() {
        let eig = eig_for(FieldSpec::fibonacci(2.0, 0.0, 30));
        let a = spin_bound_jw(&eig, 1, 9, 1.7).unwrap();
        let b = tail_sum(&eig, 1, 9, 1.7).unwrap();
        assert!((a - 4.0 * b).abs() <= 1e-15 * a.max(1.0));
    }

    #[test]
    fn grid_basics() {
        let field = Field::generate(&FieldSpec::fibonacci(1.0, 0.0, 200)).unwrap();
        let deltas: Vec<usize> = (1..=60).collect();
        let times = [0.0, 1.0, 3.0, 6.0];
        let exact = cone_grid(&field, &deltas, &times, ConeQuantity::ExactSigma3, 20).unwrap();
        assert!(exact.values[0].iter().all(|&v| v == 0.0));
        assert!(exact.values.iter().flatten().all(|&v| (0.0..=2.0).contains(&v)));
        let tail = cone_grid(&field, &deltas, &times, ConeQuantity::FermionTail, 20).unwrap();
        for (row_e, row_t) in exact.values.iter().zip(&tail.values) {
            for (e, t) in row_e.iter().zip(row_t) {
                assert!(*e <= 2.0 * t + 1e-15);
            }
            assert!(row_t.windows(2).all(|w| w[1] <= w[0]));
        }
        assert!(tail.reflection_safe.iter().all(|&s| s));
        assert!(cone_grid(&field, &[200], &times, ConeQuantity::FermionTail, 20).is_err());
    }

    #[test]
    fn recovers_exact_cone() {
        let grid = synthetic(1.0, 0.5, 2.0, 0.6);
        let fit = fit_lightcone(&grid).unwrap();
        assert!((fit.alpha - 0.6).abs() < 1e-6, "{fit:?}");
        assert!((fit.v - 2.0).abs() < 1e-6);
        assert!((fit.xi - 0.5).abs() < 1e-6);
        assert!((fit.c - 1.0).abs() < 1e-6);
        assert!((fit.c_ls - 1.0).abs() < 1e-6);
    }

    #[test]
    fn too_few_cells() {
        let mut grid = synthetic(1.0, 0.5, 2.0, 0.6);
        grid.times.truncate(1);
        grid.values.truncate(1);
        grid.reflection_safe.truncate(1);
        grid.deltas.truncate(5);
        for row in &mut grid.values {
            row.truncate(5);
        }
        assert!(matches!(fit_lightcone(&grid), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn powerlaw_recovery_and_rejection() {
        let deltas: Vec<usize> = (40..=120).step_by(4).collect();
        let times: Vec<f64> = (1..=10).map(|i| i as f64).collect();
        let values = times
            .iter()
            .map(|&t: &f64| {
                deltas
                    .iter()
                    .map(|&d| (t.powf(0.7) / d as f64).powi(2))
                    .collect()
            })
            .collect();
        let grid = ConeGrid {
            reflection_safe: vec![true; times.len()],
            deltas,
            times,
            values,
            quantity: ConeQuantity::FermionTail,
            field: None,
            n: 1000,
        };
        let fit = fit_powerlaw(&grid, 2.0).unwrap();
        assert!((fit.gamma - 0.7).abs() < 1e-6);
        assert!(fit.log_c.abs() < 1e-9);
        assert!(fit_powerlaw(&grid, 0.0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn scaling_only_moves_c(factor in 0.2f64..5.0, alpha in 0.3f64..1.0) {
            let grid = synthetic(1e-5, 0.4, 1.5, alpha);
            let cells: Vec<ConeCell> = grid.cells_in((1e-14, 1e-2));
            let scaled: Vec<ConeCell> = cells.iter().map(|c| ConeCell { value: c.value * factor, ..*c }).collect();
            let a = fit_lightcone_cells(&cells).unwrap();
            let b = fit_lightcone_cells(&scaled).unwrap();
            prop_assert!((a.alpha - b.alpha).abs() < 1e-8);
            prop_assert!((a.v - b.v).abs() < 1e-8);
            prop_assert!((a.xi - b.xi).abs() < 1e-8);
            prop_assert!((b.c_ls / a.c_ls / factor - 1.0).abs() < 1e-6);
        }

        #[test]
        fn quantities_vanish_at_time_zero(lambda in 0.0f64..5.0, x in 1usize..10, gap in 1usize..10) {
            let eig = eig_for(FieldSpec::fibonacci(lambda, 0.0, 24));
            let xp = x + gap;
            prop_assert_eq!(exact_fermion_commutator_sigma3(&eig, x, xp, 0.0).unwrap(), 0.0);
            prop_assert_eq!(fermion_tail_bound(&eig, x, xp, 0.0).unwrap(), 0.0);
            prop_assert_eq!(spin_bound_jw(&eig, x, xp, 0.0).unwrap(), 0.0);
        }

        #[test]
        fn exact_is_dominated_by_tail(lambda in 0.0f64..5.0, x in 1usize..10, gap in 1usize..10, t in 0.0f64..5.0) {
            let eig = eig_for(FieldSpec::fibonacci(lambda, 0.0, 24));
            let xp = x + gap;
            let e = exact_fermion_commutator_sigma3(&eig, x, xp, t).unwrap();
            let tail = fermion_tail_bound(&eig, x, xp, t).unwrap();
            prop_assert!(e <= 2.0 * tail + 1e-14);
        }
    }
}
