//! Gaussian-process regression surrogate.
//!
//! Inputs live in the unit cube and targets are standardized per fit. The
//! covariance is Matérn-5/2 with one lengthscale per input dimension plus a
//! signal variance and a small learnable observation noise. Hyperparameters
//! are fit by multi-start bounded L-BFGS ascent on the log marginal
//! likelihood in log-parameter space.

mod kernel;
pub mod linalg;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

pub use kernel::{matern52, matern52_radial, scaled_distance};
use linalg::Cholesky;

pub const LENGTHSCALE_BOUNDS: (f64, f64) = (0.005, 20.0);
pub const SIGNAL_VAR_BOUNDS: (f64, f64) = (0.05, 20.0);
pub const NOISE_VAR_BOUNDS: (f64, f64) = (1e-8, 1e-2);

/// Diagonal shifts tried, in order, when a covariance is not numerically
/// positive definite.
const JITTER: [f64; 8] = [0.0, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6, 1e-5, 1e-4];
const LN_2PI: f64 = 1.837_877_066_409_345_5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GpError {
    #[error("covariance is not positive definite even with jitter 1e-4")]
    NumericalFailure,
    #[error("dataset is empty")]
    Empty,
    #[error("point has dimension {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite target value")]
    NonFinite,
}

/// Training inputs in the unit cube with standardized targets.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    x: Vec<Vec<f64>>,
    y: Vec<f64>,
    mean: f64,
    std: f64,
}

impl Dataset {
    /// Standardizes `raw_y` to zero mean and unit variance (unit scale when
    /// the targets are constant).
    pub fn new(x: Vec<Vec<f64>>, raw_y: &[f64]) -> Result<Self, GpError> {
        let m = raw_y.len();
        if m == 0 {
            return Err(GpError::Empty);
        }
        if raw_y.iter().any(|v| !v.is_finite()) {
            return Err(GpError::NonFinite);
        }
        let mean = raw_y.iter().sum::<f64>() / m as f64;
        let var = raw_y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / m as f64;
        let std = if var.sqrt() > 1e-12 { var.sqrt() } else { 1.0 };
        let y = raw_y.iter().map(|v| (v - mean) / std).collect();
        Self::build(x, y, mean, std)
    }

    /// Uses `y` as already standardized.
    pub fn standardized(x: Vec<Vec<f64>>, y: Vec<f64>) -> Result<Self, GpError> {
        if y.iter().any(|v| !v.is_finite()) {
            return Err(GpError::NonFinite);
        }
        Self::build(x, y, 0.0, 1.0)
    }

    fn build(x: Vec<Vec<f64>>, y: Vec<f64>, mean: f64, std: f64) -> Result<Self, GpError> {
        if x.is_empty() {
            return Err(GpError::Empty);
        }
        let n = x[0].len();
        if let Some(bad) = x.iter().find(|r| r.len() != n) {
            return Err(GpError::DimensionMismatch {
                expected: n,
                got: bad.len(),
            });
        }
        if y.len() != x.len() {
            return Err(GpError::DimensionMismatch {
                expected: x.len(),
                got: y.len(),
            });
        }
        Ok(Self { x, y, mean, std })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.x[0].len()
    }

    pub fn x(&self) -> &[Vec<f64>] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    /// Maps a raw objective value to the standardized scale.
    pub fn standardize(&self, raw: f64) -> f64 {
        (raw - self.mean) / self.std
    }

    pub fn unstandardize(&self, z: f64) -> f64 {
        z * self.std + self.mean
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hyper {
    pub lengthscales: Vec<f64>,
    pub signal_var: f64,
    pub noise_var: f64,
}

impl Hyper {
    /// Prior defaults used when there is too little data to fit.
    pub fn default_for(dim: usize) -> Self {
        Self {
            lengthscales: vec![0.5; dim],
            signal_var: 1.0,
            noise_var: 1e-6,
        }
    }

    fn to_log(&self) -> Vec<f64> {
        let mut t: Vec<f64> = self.lengthscales.iter().map(|l| l.ln()).collect();
        t.push(self.signal_var.ln());
        t.push(self.noise_var.ln());
        t
    }

    fn from_log(t: &[f64]) -> Self {
        let n = t.len() - 2;
        Self {
            lengthscales: t[..n].iter().map(|v| v.exp()).collect(),
            signal_var: t[n].exp(),
            noise_var: t[n + 1].exp(),
        }
    }

    fn log_bounds(dim: usize) -> Vec<(f64, f64)> {
        let ln = |(a, b): (f64, f64)| (a.ln(), b.ln());
        let mut b = vec![ln(LENGTHSCALE_BOUNDS); dim];
        b.push(ln(SIGNAL_VAR_BOUNDS));
        b.push(ln(NOISE_VAR_BOUNDS));
        b
    }

    /// Clamps every hyperparameter into the fitting bounds.
    pub fn clamped(&self) -> Self {
        let clamp = |v: f64, (lo, hi): (f64, f64)| v.clamp(lo, hi);
        Self {
            lengthscales: self
                .lengthscales
                .iter()
                .map(|&l| clamp(l, LENGTHSCALE_BOUNDS))
                .collect(),
            signal_var: clamp(self.signal_var, SIGNAL_VAR_BOUNDS),
            noise_var: clamp(self.noise_var, NOISE_VAR_BOUNDS),
        }
    }

    fn inv_lengthscales(&self) -> Vec<f64> {
        self.lengthscales.iter().map(|l| 1.0 / l).collect()
    }
}

fn factor_with_jitter(a: &[f64], n: usize) -> Result<Cholesky, GpError> {
    JITTER
        .iter()
        .find_map(|&j| Cholesky::factor(a, n, j))
        .ok_or(GpError::NumericalFailure)
}

/// Pairwise scaled distances of the training inputs, lower triangle included.
fn distances(data: &Dataset, inv_ls: &[f64]) -> Vec<f64> {
    let m = data.len();
    let mut r = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..i {
            let d = scaled_distance(&data.x[i], &data.x[j], inv_ls);
            r[i * m + j] = d;
            r[j * m + i] = d;
        }
    }
    r
}

fn covariance(r: &[f64], m: usize, hyper: &Hyper) -> Vec<f64> {
    let mut k: Vec<f64> = r.iter().map(|&d| hyper.signal_var * matern52(d)).collect();
    for i in 0..m {
        k[i * m + i] += hyper.noise_var;
    }
    k
}

fn lml_value(data: &Dataset, hyper: &Hyper) -> Result<f64, GpError> {
    let m = data.len();
    let r = distances(data, &hyper.inv_lengthscales());
    let chol = factor_with_jitter(&covariance(&r, m, hyper), m)?;
    let alpha = chol.solve(&data.y);
    let fit: f64 = data.y.iter().zip(&alpha).map(|(a, b)| a * b).sum();
    Ok(-0.5 * fit - 0.5 * chol.log_det() - 0.5 * m as f64 * LN_2PI)
}

/// Log marginal likelihood and its gradient with respect to
/// `(ln l_1, ..., ln l_n, ln signal_var, ln noise_var)`.
pub fn log_marginal_likelihood(data: &Dataset, hyper: &Hyper) -> Result<(f64, Vec<f64>), GpError> {
    let m = data.len();
    let n = data.dim();
    if hyper.lengthscales.len() != n {
        return Err(GpError::DimensionMismatch {
            expected: n,
            got: hyper.lengthscales.len(),
        });
    }
    let inv_ls = hyper.inv_lengthscales();
    let r = distances(data, &inv_ls);
    let chol = factor_with_jitter(&covariance(&r, m, hyper), m)?;
    let alpha = chol.solve(&data.y);
    let fit: f64 = data.y.iter().zip(&alpha).map(|(a, b)| a * b).sum();
    let lml = -0.5 * fit - 0.5 * chol.log_det() - 0.5 * m as f64 * LN_2PI;

    // W = alpha alphaᵀ - K⁻¹; each gradient entry is tr(W dK) / 2.
    let mut w = chol.inverse();
    for i in 0..m {
        for j in 0..m {
            w[i * m + j] = alpha[i] * alpha[j] - w[i * m + j];
        }
    }
    let mut grad = vec![0.0; n + 2];
    let mut trace_w = 0.0;
    for i in 0..m {
        trace_w += w[i * m + i];
        // diagonal pairs have zero distance: only the signal term contributes
        grad[n] += 0.5 * w[i * m + i] * hyper.signal_var;
        for j in 0..i {
            let wij = w[i * m + j];
            let rij = r[i * m + j];
            grad[n] += wij * hyper.signal_var * matern52(rij);
            let radial = wij * hyper.signal_var * matern52_radial(rij);
            let (xi, xj) = (&data.x[i], &data.x[j]);
            for d in 0..n {
                let s = (xi[d] - xj[d]) * inv_ls[d];
                grad[d] += radial * s * s;
            }
        }
    }
    grad[n + 1] = 0.5 * hyper.noise_var * trace_w;
    Ok((lml, grad))
}

#[derive(Debug, Clone)]
pub struct FitOptions {
    /// Number of local ascents; the first starts from `warm_start` when given.
    pub restarts: usize,
    pub max_iters: usize,
    pub seed: u64,
    pub warm_start: Option<Hyper>,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            restarts: 8,
            max_iters: 40,
            seed: 0,
            warm_start: None,
        }
    }
}

/// Fitted posterior: hyperparameters plus the factorization of the training
/// covariance.
#[derive(Debug, Clone)]
pub struct GpModel {
    data: Dataset,
    hyper: Hyper,
    inv_ls: Vec<f64>,
    chol: Cholesky,
    alpha: Vec<f64>,
}

impl GpModel {
    /// Conditions on `data` with fixed hyperparameters.
    pub fn with_hyper(data: Dataset, hyper: Hyper) -> Result<Self, GpError> {
        let m = data.len();
        if hyper.lengthscales.len() != data.dim() {
            return Err(GpError::DimensionMismatch {
                expected: data.dim(),
                got: hyper.lengthscales.len(),
            });
        }
        let inv_ls = hyper.inv_lengthscales();
        let r = distances(&data, &inv_ls);
        let chol = factor_with_jitter(&covariance(&r, m, &hyper), m)?;
        let alpha = chol.solve(&data.y);
        Ok(Self {
            data,
            hyper,
            inv_ls,
            chol,
            alpha,
        })
    }

    /// Maximizes the log marginal likelihood over the hyperparameters. A
    /// single observation keeps the prior defaults.
    pub fn fit(data: Dataset, opts: &FitOptions) -> Result<Self, GpError> {
        let n = data.dim();
        if data.len() < 2 {
            let hyper = opts.warm_start.clone().unwrap_or_else(|| Hyper::default_for(n));
            return Self::with_hyper(data, hyper.clamped());
        }
        let bounds = Hyper::log_bounds(n);
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let mut best: Option<(f64, Vec<f64>)> = None;
        for start in 0..opts.restarts.max(1) {
            let theta0 = if start == 0 {
                opts.warm_start
                    .clone()
                    .unwrap_or_else(|| Hyper::default_for(n))
                    .clamped()
                    .to_log()
            } else {
                random_start(&mut rng, n)
            };
            let objective = |t: &[f64]| -> Option<(f64, Vec<f64>)> {
                let (v, g) = log_marginal_likelihood(&data, &Hyper::from_log(t)).ok()?;
                Some((-v, g.into_iter().map(|x| -x).collect()))
            };
            let value = |t: &[f64]| lml_value(&data, &Hyper::from_log(t)).ok().map(|v| -v);
            if let Some((v, t)) = lbfgs_box(objective, value, theta0, &bounds, opts.max_iters) {
                if best.as_ref().is_none_or(|(bv, _)| v < *bv) {
                    best = Some((v, t));
                }
            }
        }
        let (_, theta) = best.ok_or(GpError::NumericalFailure)?;
        Self::with_hyper(data, Hyper::from_log(&theta))
    }

    pub fn hyper(&self) -> &Hyper {
        &self.hyper
    }

    pub fn data(&self) -> &Dataset {
        &self.data
    }

    fn cross(&self, q: &[f64]) -> Vec<f64> {
        self.data
            .x
            .iter()
            .map(|x| self.hyper.signal_var * matern52(scaled_distance(x, q, &self.inv_ls)))
            .collect()
    }

    /// Posterior mean and standard deviation (standardized units) at `q`.
    pub fn predict(&self, q: &[f64]) -> (f64, f64) {
        let mut k = self.cross(q);
        let mu: f64 = k.iter().zip(&self.alpha).map(|(a, b)| a * b).sum();
        self.chol.solve_lower_in_place(&mut k);
        let explained: f64 = k.iter().map(|v| v * v).sum();
        let var = (self.hyper.signal_var + self.hyper.noise_var - explained).max(0.0);
        (mu, var.sqrt())
    }

    pub fn predict_many(&self, qs: &[Vec<f64>]) -> Vec<(f64, f64)> {
        qs.iter().map(|q| self.predict(q)).collect()
    }

    /// One joint posterior draw at the points `qs`, reproducible per seed.
    pub fn sample_posterior(&self, qs: &[Vec<f64>], seed: u64) -> Result<Vec<f64>, GpError> {
        let q = qs.len();
        if q == 0 {
            return Err(GpError::Empty);
        }
        let mut mean = Vec::with_capacity(q);
        let mut v = Vec::with_capacity(q);
        for p in qs {
            let mut k = self.cross(p);
            mean.push(k.iter().zip(&self.alpha).map(|(a, b)| a * b).sum::<f64>());
            self.chol.solve_lower_in_place(&mut k);
            v.push(k);
        }
        let mut cov = vec![0.0; q * q];
        for i in 0..q {
            for j in 0..=i {
                let prior = self.hyper.signal_var * matern52(scaled_distance(&qs[i], &qs[j], &self.inv_ls));
                let explained: f64 = v[i].iter().zip(&v[j]).map(|(a, b)| a * b).sum();
                let c = prior - explained + if i == j { self.hyper.noise_var } else { 0.0 };
                cov[i * q + j] = c;
                cov[j * q + i] = c;
            }
        }
        let chol = factor_with_jitter(&cov, q)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let z: Vec<f64> = (0..q).map(|_| rng.sample(StandardNormal)).collect();
        Ok((0..q)
            .map(|i| mean[i] + (0..=i).map(|k| chol.at(i, k) * z[k]).sum::<f64>())
            .collect())
    }
}

fn random_start(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut log_uniform = |lo: f64, hi: f64| rng.gen_range(lo.ln()..hi.ln());
    let mut t: Vec<f64> = (0..n).map(|_| log_uniform(0.05, 2.0)).collect();
    t.push(log_uniform(0.3, 3.0));
    t.push(log_uniform(1e-6, 1e-3));
    t
}

/// Minimizes a smooth function over a box with projected L-BFGS and
/// backtracking. Returns the best value and point reached, or `None` if the
/// start itself cannot be evaluated.
fn lbfgs_box<F, V>(f: F, value: V, x0: Vec<f64>, bounds: &[(f64, f64)], max_iters: usize) -> Option<(f64, Vec<f64>)>
where
    F: Fn(&[f64]) -> Option<(f64, Vec<f64>)>,
    V: Fn(&[f64]) -> Option<f64>,
{
    const MEMORY: usize = 6;
    let project = |x: &mut [f64]| {
        for (v, (lo, hi)) in x.iter_mut().zip(bounds) {
            *v = v.clamp(*lo, *hi);
        }
    };
    let mut x = x0;
    project(&mut x);
    let (mut fx, mut g) = f(&x)?;
    let mut hist: Vec<(Vec<f64>, Vec<f64>, f64)> = Vec::new();
    for _ in 0..max_iters {
        // free variables: not pinned at a bound with the gradient pushing outward
        let free: Vec<bool> = x
            .iter()
            .zip(&g)
            .zip(bounds)
            .map(|((v, gi), (lo, hi))| !((*v <= *lo && *gi > 0.0) || (*v >= *hi && *gi < 0.0)))
            .collect();
        let pg: f64 = g
            .iter()
            .zip(&free)
            .filter(|(_, f)| **f)
            .map(|(v, _)| v * v)
            .sum::<f64>()
            .sqrt();
        if pg < 1e-6 {
            break;
        }
        let mut d = two_loop(&g, &hist);
        for (di, fr) in d.iter_mut().zip(&free) {
            if !fr {
                *di = 0.0;
            }
        }
        let mut slope: f64 = d.iter().zip(&g).map(|(a, b)| a * b).sum();
        if !(slope < 0.0) {
            hist.clear();
            d = g.iter().zip(&free).map(|(v, fr)| if *fr { -v } else { 0.0 }).collect();
            slope = -pg * pg;
        }
        // unit steps for quasi-Newton directions, bounded first steps otherwise
        let dnorm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut step = if hist.is_empty() { (1.0 / dnorm).min(1.0) } else { 1.0 };
        let mut accepted = None;
        for _ in 0..20 {
            let mut xn: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + step * b).collect();
            project(&mut xn);
            if let Some(v) = value(&xn) {
                if v <= fx + 1e-4 * step * slope {
                    accepted = Some(xn);
                    break;
                }
            }
            step *= 0.3;
        }
        let Some(xn) = accepted else { break };
        let Some((fn_, gn)) = f(&xn) else { break };
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
        if sy > 1e-12 {
            if hist.len() == MEMORY {
                hist.remove(0);
            }
            hist.push((s, y, 1.0 / sy));
        }
        let improvement = fx - fn_;
        x = xn;
        fx = fn_;
        g = gn;
        if improvement.abs() < 1e-9 * fx.abs().max(1.0) {
            break;
        }
    }
    Some((fx, x))
}

fn two_loop(g: &[f64], hist: &[(Vec<f64>, Vec<f64>, f64)]) -> Vec<f64> {
    let mut q = g.to_vec();
    let mut alphas = Vec::with_capacity(hist.len());
    for (s, y, rho) in hist.iter().rev() {
        let a = rho * s.iter().zip(&q).map(|(a, b)| a * b).sum::<f64>();
        for (qi, yi) in q.iter_mut().zip(y) {
            *qi -= a * yi;
        }
        alphas.push(a);
    }
    if let Some((s, y, _)) = hist.last() {
        let gamma = s.iter().zip(y).map(|(a, b)| a * b).sum::<f64>() / y.iter().map(|v| v * v).sum::<f64>();
        q.iter_mut().for_each(|v| *v *= gamma);
    }
    for ((s, y, rho), a) in hist.iter().zip(alphas.into_iter().rev()) {
        let b = rho * y.iter().zip(&q).map(|(a, b)| a * b).sum::<f64>();
        for (qi, si) in q.iter_mut().zip(s) {
            *qi += (a - b) * si;
        }
    }
    q.iter_mut().for_each(|v| *v = -*v);
    q
}

#[cfg(test)]
mod tests;
