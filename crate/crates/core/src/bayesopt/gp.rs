//! Gaussian-process regression with a fixed isotropic squared-exponential
//! kernel and zero prior mean.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Jitter is raised tenfold per failed factorization, up to this value.
pub const MAX_NOISE_VARIANCE: f64 = 1e-2;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Kernel {
    pub signal_variance: f64,
    pub length_scale: f64,
    pub noise_variance: f64,
}

impl Default for Kernel {
    fn default() -> Self {
        Self {
            signal_variance: 1.0,
            length_scale: 0.5,
            noise_variance: 1e-6,
        }
    }
}

impl Kernel {
    /// `σ_f² exp(−‖x − z‖² / 2ℓ²)`.
    pub fn eval(&self, x: &[f64], z: &[f64]) -> f64 {
        let d2: f64 = x.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum();
        self.signal_variance * libm::exp(-0.5 * d2 / (self.length_scale * self.length_scale))
    }

    fn validate(&self) -> Result<()> {
        let ok = self.signal_variance > 0.0
            && self.length_scale > 0.0
            && self.noise_variance > 0.0
            && self.signal_variance.is_finite()
            && self.length_scale.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::domain(format!("invalid kernel hyperparameters {self:?}")))
        }
    }
}

#[derive(Clone, Debug)]
pub struct GpPosterior {
    points: Vec<Vec<f64>>,
    observations: Vec<f64>,
    kernel: Kernel,
    /// Noise variance actually used after jitter escalation.
    noise_variance: f64,
    /// Lower Cholesky factor of `K + σ_n² I`, row-major.
    chol: Vec<f64>,
    /// `(K + σ_n² I)⁻¹ y`.
    alpha: Vec<f64>,
}

impl GpPosterior {
    pub fn fit(points: Vec<Vec<f64>>, observations: Vec<f64>, kernel: Kernel) -> Result<Self> {
        kernel.validate()?;
        let n = points.len();
        if n == 0 {
            return Err(Error::domain("gaussian process needs at least one training point"));
        }
        if observations.len() != n {
            return Err(Error::domain(format!(
                "{n} points but {} observations",
                observations.len()
            )));
        }
        let dim = points[0].len();
        if points.iter().any(|p| p.len() != dim) {
            return Err(Error::domain("training points have mixed dimensions"));
        }

        let mut gram = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let k = kernel.eval(&points[i], &points[j]);
                gram[i * n + j] = k;
                gram[j * n + i] = k;
            }
        }

        let mut noise = kernel.noise_variance;
        let chol = loop {
            let mut m = gram.clone();
            for i in 0..n {
                m[i * n + i] += noise;
            }
            if let Some(l) = cholesky(m, n) {
                break l;
            }
            noise *= 10.0;
            if noise > MAX_NOISE_VARIANCE * (1.0 + 1e-12) {
                return Err(Error::Numeric(format!(
                    "kernel matrix not positive definite even with noise variance {MAX_NOISE_VARIANCE}"
                )));
            }
        };

        let alpha = solve_upper_t(&chol, n, &solve_lower(&chol, n, &observations));
        Ok(Self {
            points,
            observations,
            kernel,
            noise_variance: noise,
            chol,
            alpha,
        })
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }
    pub fn observations(&self) -> &[f64] {
        &self.observations
    }
    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }
    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }
    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    /// Posterior mean and (latent) variance at `x`.
    pub fn predict(&self, x: &[f64]) -> Result<(f64, f64)> {
        if x.len() != self.dim() {
            return Err(Error::domain(format!(
                "query has dimension {}, model has {}",
                x.len(),
                self.dim()
            )));
        }
        Ok(self.predict_unchecked(x))
    }

    pub(crate) fn predict_unchecked(&self, x: &[f64]) -> (f64, f64) {
        let n = self.points.len();
        let kstar: Vec<f64> = self.points.iter().map(|p| self.kernel.eval(p, x)).collect();
        let mean = kstar.iter().zip(&self.alpha).map(|(a, b)| a * b).sum();
        let v = solve_lower(&self.chol, n, &kstar);
        let var = self.kernel.signal_variance - v.iter().map(|t| t * t).sum::<f64>();
        // negative values here are rounding noise
        (mean, var.max(0.0))
    }
}

/// In-place Cholesky of a row-major SPD matrix; `None` if a pivot is not
/// strictly positive.
fn cholesky(mut m: Vec<f64>, n: usize) -> Option<Vec<f64>> {
    for j in 0..n {
        let mut d = m[j * n + j];
        for k in 0..j {
            d -= m[j * n + k] * m[j * n + k];
        }
        if !(d > 0.0) {
            return None;
        }
        let d = d.sqrt();
        m[j * n + j] = d;
        for i in (j + 1)..n {
            let mut s = m[i * n + j];
            for k in 0..j {
                s -= m[i * n + k] * m[j * n + k];
            }
            m[i * n + j] = s / d;
        }
        for i in 0..j {
            m[i * n + j] = 0.0;
        }
    }
    Some(m)
}

/// Solves `L z = rhs`.
fn solve_lower(l: &[f64], n: usize, rhs: &[f64]) -> Vec<f64> {
    let mut z = vec![0.0; n];
    for i in 0..n {
        let s: f64 = (0..i).map(|k| l[i * n + k] * z[k]).sum();
        z[i] = (rhs[i] - s) / l[i * n + i];
    }
    z
}

/// Solves `Lᵀ z = rhs`.
fn solve_upper_t(l: &[f64], n: usize, rhs: &[f64]) -> Vec<f64> {
    let mut z = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = ((i + 1)..n).map(|k| l[k * n + i] * z[k]).sum();
        z[i] = (rhs[i] - s) / l[i * n + i];
    }
    z
}
