//! Finite-size-scaling threshold fits.
//!
//! Model: `P = A + B x + C x^2` with `x = (p - p_c) d^(1/nu)`, fitted by weighted
//! Levenberg-Marquardt (weights `1/sigma^2`) with `nu` kept in `[0.5, 5]`.

use faer::linalg::solvers::{DenseSolveCore, Solve};
use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::experiment::{Dataset, FailureMode};

pub const NU_BOUNDS: (f64, f64) = (0.5, 5.0);
const MAX_ITERATIONS: usize = 500;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FitPoint {
    pub p: f64,
    pub d: usize,
    pub value: f64,
    pub sigma: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitInput {
    pub points: Vec<FitPoint>,
    pub mode: FailureMode,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FitResult {
    pub p_c: f64,
    pub nu: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// From the inverse normal matrix at the optimum.
    pub sigma_pc: f64,
    pub chi2_per_dof: f64,
    pub iterations: usize,
    /// Standard deviation of `p_c` over bootstrap refits, when requested.
    pub bootstrap_sigma_pc: Option<f64>,
}

impl FitResult {
    pub fn predict(&self, p: f64, d: usize) -> f64 {
        let x = (p - self.p_c) * (d as f64).powf(1.0 / self.nu);
        self.a + self.b * x + self.c * x * x
    }
}

/// Parameters ordered `(p_c, nu, A, B, C)`.
type Params = [f64; 5];

fn model(theta: &Params, p: f64, d: usize) -> (f64, [f64; 5]) {
    let [p_c, nu, a, b, c] = *theta;
    let ln_d = (d as f64).ln();
    let scale = (ln_d / nu).exp();
    let x = (p - p_c) * scale;
    let slope = b + 2.0 * c * x;
    let grad = [-slope * scale, -slope * x * ln_d / (nu * nu), 1.0, x, x * x];
    (a + b * x + c * x * x, grad)
}

fn chi2(points: &[FitPoint], theta: &Params) -> f64 {
    points
        .iter()
        .map(|pt| ((pt.value - model(theta, pt.p, pt.d).0) / pt.sigma).powi(2))
        .sum()
}

/// Normal equations `J^T W J` and `J^T W r`.
fn normal_equations(points: &[FitPoint], theta: &Params) -> (Mat<f64>, Mat<f64>) {
    let mut jtj = Mat::<f64>::zeros(5, 5);
    let mut jtr = Mat::<f64>::zeros(5, 1);
    for pt in points {
        let (f, g) = model(theta, pt.p, pt.d);
        let w = 1.0 / (pt.sigma * pt.sigma);
        let r = pt.value - f;
        for i in 0..5 {
            jtr[(i, 0)] += w * g[i] * r;
            for j in 0..5 {
                jtj[(i, j)] += w * g[i] * g[j];
            }
        }
    }
    (jtj, jtr)
}

/// Weighted linear least squares for `(A, B, C)` at fixed `(p_c, nu)`.
fn linear_abc(points: &[FitPoint], p_c: f64, nu: f64) -> [f64; 3] {
    let mut m = Mat::<f64>::zeros(3, 3);
    let mut v = Mat::<f64>::zeros(3, 1);
    for pt in points {
        let x = (pt.p - p_c) * (pt.d as f64).powf(1.0 / nu);
        let basis = [1.0, x, x * x];
        let w = 1.0 / (pt.sigma * pt.sigma);
        for i in 0..3 {
            v[(i, 0)] += w * basis[i] * pt.value;
            for j in 0..3 {
                m[(i, j)] += w * basis[i] * basis[j];
            }
        }
    }
    let sol = m.full_piv_lu().solve(&v);
    [sol[(0, 0)], sol[(1, 0)], sol[(2, 0)]]
}

/// Crossing of the two largest-d curves by linear interpolation of their
/// difference over shared `p` values; falls back to the weighted median `p`.
fn initial_pc(points: &[FitPoint], distances: &[usize]) -> f64 {
    let curve = |d: usize| {
        let mut c: Vec<(f64, f64)> = points.iter().filter(|pt| pt.d == d).map(|pt| (pt.p, pt.value)).collect();
        c.sort_by(|a, b| a.0.total_cmp(&b.0));
        c
    };
    let n = distances.len();
    let (big, small) = (curve(distances[n - 1]), curve(distances[n - 2]));
    let diff: Vec<(f64, f64)> = big
        .iter()
        .filter_map(|&(p, v)| small.iter().find(|s| (s.0 - p).abs() < 1e-12).map(|s| (p, v - s.1)))
        .collect();
    for w in diff.windows(2) {
        let ((p0, d0), (p1, d1)) = (w[0], w[1]);
        if d0 == 0.0 {
            return p0;
        }
        if d0.signum() != d1.signum() {
            return p0 + (p1 - p0) * d0 / (d0 - d1);
        }
    }
    let mut by_p: Vec<(f64, f64)> = points.iter().map(|pt| (pt.p, 1.0 / (pt.sigma * pt.sigma))).collect();
    by_p.sort_by(|a, b| a.0.total_cmp(&b.0));
    let half = by_p.iter().map(|x| x.1).sum::<f64>() / 2.0;
    let mut acc = 0.0;
    for (p, w) in &by_p {
        acc += w;
        if acc >= half {
            return *p;
        }
    }
    by_p[by_p.len() / 2].0
}

fn check_input(input: &FitInput) -> Result<Vec<usize>> {
    let pts = &input.points;
    let mut distances: Vec<usize> = pts.iter().map(|pt| pt.d).collect();
    distances.sort_unstable();
    distances.dedup();
    if distances.len() < 2 {
        return Err(Error::Fit(format!("need at least 2 distinct code distances, got {distances:?}")));
    }
    if pts.len() < 6 {
        return Err(Error::Fit(format!("need at least 6 points for 5 parameters, got {}", pts.len())));
    }
    if let Some(pt) = pts.iter().find(|pt| !(pt.sigma > 0.0) || !pt.sigma.is_finite() || !pt.value.is_finite()) {
        return Err(Error::Fit(format!("point {pt:?} needs a finite value and positive sigma")));
    }
    let first = pts[0].value;
    if pts.iter().all(|pt| (pt.value - first).abs() <= 1e-14 * first.abs().max(1e-300)) {
        return Err(Error::Fit("all failure rates are identical; B and C are unidentifiable".into()));
    }
    Ok(distances)
}

/// Weighted nonlinear least squares for `(p_c, nu, A, B, C)`.
pub fn fit_threshold(input: &FitInput) -> Result<FitResult> {
    let distances = check_input(input)?;
    let pts = &input.points;
    let p_c0 = initial_pc(pts, &distances);
    let nu0 = 1.5;
    let [a0, b0, c0] = linear_abc(pts, p_c0, nu0);
    let mut theta: Params = [p_c0, nu0, a0, b0, c0];
    let mut cost = chi2(pts, &theta);
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let (jtj, jtr) = normal_equations(pts, &theta);
        let mut damped = jtj.clone();
        for i in 0..5 {
            damped[(i, i)] += lambda * jtj[(i, i)].max(1e-300);
        }
        let step = damped.full_piv_lu().solve(&jtr);
        let mut trial = theta;
        for i in 0..5 {
            trial[i] += step[(i, 0)];
        }
        trial[1] = trial[1].clamp(NU_BOUNDS.0, NU_BOUNDS.1);
        let trial_cost = chi2(pts, &trial);
        if trial_cost.is_finite() && trial_cost <= cost {
            let improvement = cost - trial_cost;
            let moved = (0..5).map(|i| (trial[i] - theta[i]).abs() / theta[i].abs().max(1e-8)).fold(0.0, f64::max);
            theta = trial;
            cost = trial_cost;
            lambda = (lambda / 3.0).max(1e-12);
            if improvement <= 1e-14 * cost.max(1e-300) || moved < 1e-12 {
                converged = true;
                break;
            }
        } else {
            lambda *= 4.0;
            if lambda > 1e12 {
                // No downhill step exists at any damping: a stationary point.
                converged = true;
                break;
            }
        }
    }
    if !converged {
        return Err(Error::Fit(format!("no convergence after {MAX_ITERATIONS} iterations")));
    }
    let (jtj, _) = normal_equations(pts, &theta);
    let cov = jtj.full_piv_lu().inverse();
    let var_pc = cov[(0, 0)];
    if !var_pc.is_finite() {
        return Err(Error::Fit("singular normal matrix at the optimum".into()));
    }
    let dof = pts.len().saturating_sub(5).max(1);
    Ok(FitResult {
        p_c: theta[0],
        nu: theta[1],
        a: theta[2],
        b: theta[3],
        c: theta[4],
        sigma_pc: var_pc.max(0.0).sqrt(),
        chi2_per_dof: cost / dof as f64,
        iterations,
        bootstrap_sigma_pc: None,
    })
}

/// Fit plus the spread of `p_c` over `resamples` case-resampled refits.
pub fn fit_threshold_bootstrap(input: &FitInput, resamples: usize, seed: u64) -> Result<FitResult> {
    let mut result = fit_threshold(input)?;
    let n = input.points.len();
    let estimates: Vec<f64> = (0..resamples as u64)
        .into_par_iter()
        .filter_map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i);
            let points = (0..n).map(|_| input.points[rng.random_range(0..n)]).collect();
            fit_threshold(&FitInput {
                points,
                mode: input.mode,
            })
            .ok()
            .map(|f| f.p_c)
        })
        .collect();
    if estimates.len() >= 2 {
        let mean = estimates.iter().sum::<f64>() / estimates.len() as f64;
        let var = estimates.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (estimates.len() - 1) as f64;
        result.bootstrap_sigma_pc = Some(var.sqrt());
    }
    Ok(result)
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FitOptions {
    /// Keep only points with `p` in this closed interval.
    pub p_range: Option<(f64, f64)>,
    pub bootstrap: Option<usize>,
    pub seed: u64,
}

#[derive(Debug)]
pub struct BinnedFit {
    pub bin: Vec<usize>,
    pub mode: FailureMode,
    pub result: Result<FitResult>,
}

impl BinnedFit {
    /// Middle distance of the bin.
    pub fn center(&self) -> usize {
        let mut b = self.bin.clone();
        b.sort_unstable();
        b[b.len() / 2]
    }
}

/// Points for one mode restricted to the given distances. Zero standard errors
/// (rates of exactly 0 or 1) are floored at `1/samples`.
pub fn fit_input(data: &Dataset, distances: &[usize], mode: FailureMode, p_range: Option<(f64, f64)>) -> FitInput {
    let points = data
        .rows
        .iter()
        .filter(|r| distances.contains(&r.d))
        .filter(|r| p_range.is_none_or(|(lo, hi)| r.p >= lo - 1e-12 && r.p <= hi + 1e-12))
        .map(|r| {
            let (value, se) = r.rates.mode(mode);
            FitPoint {
                p: r.p,
                d: r.d,
                value,
                sigma: se.max(1.0 / r.samples as f64),
            }
        })
        .collect();
    FitInput { points, mode }
}

/// One fit per `(bin, mode)`; a bin with missing distances yields an error entry only.
pub fn binned_thresholds(data: &Dataset, bins: &[Vec<usize>], modes: &[FailureMode], opts: &FitOptions) -> Vec<BinnedFit> {
    let present = data.distances();
    let jobs: Vec<(Vec<usize>, FailureMode)> = bins
        .iter()
        .flat_map(|bin| modes.iter().map(move |&m| (bin.clone(), m)))
        .collect();
    jobs.into_par_iter()
        .map(|(bin, mode)| {
            let missing: Vec<usize> = bin.iter().copied().filter(|d| !present.contains(d)).collect();
            let result = if missing.is_empty() {
                let input = fit_input(data, &bin, mode, opts.p_range);
                match opts.bootstrap {
                    Some(n) => fit_threshold_bootstrap(&input, n, opts.seed),
                    None => fit_threshold(&input),
                }
            } else {
                Err(Error::Fit(format!("bin {bin:?}: no data for distances {missing:?}")))
            };
            BinnedFit { bin, mode, result }
        })
        .collect()
}
