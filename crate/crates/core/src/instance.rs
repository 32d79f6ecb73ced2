//! Seeded MIMO detection instances, the ML objective and the exhaustive
//! detector used as ground truth.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::RealMatrix;
use crate::persist::SCHEMA_VERSION;
use crate::rng::{SeededRng, Stream};
use crate::spin::SpinVector;

/// Largest `n_t` the exhaustive detector accepts by default.
pub const DEFAULT_EXHAUSTIVE_CAP: usize = 20;

/// One real-valued BPSK MIMO channel use: `y = H·x_true + noise`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InstanceRecord", into = "InstanceRecord")]
pub struct ChannelInstance {
    n_t: usize,
    n_r: usize,
    h: RealMatrix,
    x_true: SpinVector,
    noise: Vec<f64>,
    y: Vec<f64>,
    seed: u64,
    noise_scale: f64,
}

impl ChannelInstance {
    /// Draws `H` (row-major), `x_true` and the noise from three independent
    /// substreams of `seed`.
    pub fn generate(n_t: usize, n_r: usize, noise_scale: f64, seed: u64) -> Result<Self> {
        if n_t == 0 || n_r == 0 {
            return Err(Error::domain(format!(
                "antenna counts must be positive (n_t={n_t}, n_r={n_r})"
            )));
        }
        if !(noise_scale >= 0.0 && noise_scale.is_finite()) {
            return Err(Error::domain(format!("noise_scale must be finite and >= 0, got {noise_scale}")));
        }
        let mut channel = SeededRng::new(seed, Stream::Channel);
        let mut symbols = SeededRng::new(seed, Stream::Symbols);
        let mut noise_rng = SeededRng::new(seed, Stream::Noise);

        let h_data = (0..n_r * n_t).map(|_| channel.normal()).collect();
        let h = RealMatrix::from_row_major(n_r, n_t, h_data)?;
        let x_true = SpinVector::new((0..n_t).map(|_| symbols.spin()).collect())?;
        let noise: Vec<f64> = (0..n_r).map(|_| noise_scale * noise_rng.normal()).collect();
        let mut inst = Self::from_parts(h, x_true, noise)?;
        inst.seed = seed;
        inst.noise_scale = noise_scale;
        Ok(inst)
    }

    /// Builds an instance from explicit parts. The result carries seed 0 and
    /// noise scale 1 and cannot be regenerated from its seed.
    pub fn from_parts(h: RealMatrix, x_true: SpinVector, noise: Vec<f64>) -> Result<Self> {
        let (n_r, n_t) = (h.rows(), h.cols());
        if n_t == 0 || n_r == 0 {
            return Err(Error::domain("channel matrix must be non-empty"));
        }
        if x_true.len() != n_t || noise.len() != n_r {
            return Err(Error::domain(format!(
                "shape mismatch: H is {n_r}x{n_t}, x_true has {}, noise has {}",
                x_true.len(),
                noise.len()
            )));
        }
        let y = h
            .mul_vec(&x_true.to_f64())
            .into_iter()
            .zip(&noise)
            .map(|(s, n)| s + n)
            .collect();
        Ok(Self {
            n_t,
            n_r,
            h,
            x_true,
            noise,
            y,
            seed: 0,
            noise_scale: 1.0,
        })
    }

    pub fn n_t(&self) -> usize {
        self.n_t
    }
    pub fn n_r(&self) -> usize {
        self.n_r
    }
    pub fn h(&self) -> &RealMatrix {
        &self.h
    }
    pub fn x_true(&self) -> &SpinVector {
        &self.x_true
    }
    pub fn noise(&self) -> &[f64] {
        &self.noise
    }
    pub fn y(&self) -> &[f64] {
        &self.y
    }
    pub fn seed(&self) -> u64 {
        self.seed
    }
    pub fn noise_scale(&self) -> f64 {
        self.noise_scale
    }

    /// `‖y − H·x‖₂²`.
    pub fn ml_objective(&self, x: &SpinVector) -> Result<f64> {
        if x.len() != self.n_t {
            return Err(Error::domain(format!(
                "spin vector has length {}, instance has n_t = {}",
                x.len(),
                self.n_t
            )));
        }
        Ok(self.residual_norm_sq(&x.to_f64()))
    }

    fn residual_norm_sq(&self, x: &[f64]) -> f64 {
        (0..self.n_r)
            .map(|r| {
                let hx: f64 = self.h.row(r).iter().zip(x).map(|(a, b)| a * b).sum();
                let d = self.y[r] - hx;
                d * d
            })
            .sum()
    }

    pub fn brute_force_detect(&self) -> Result<Detection> {
        self.brute_force_detect_with_cap(DEFAULT_EXHAUSTIVE_CAP)
    }

    /// Scans all `2^n_t` candidates in basis-index order; the first strict
    /// minimum wins, so ties resolve to the lowest index.
    pub fn brute_force_detect_with_cap(&self, cap: usize) -> Result<Detection> {
        if self.n_t > cap {
            return Err(Error::ResourceLimit {
                what: "exhaustive ML detection",
                requested: self.n_t,
                cap,
            });
        }
        let mut best = (0u64, f64::INFINITY);
        let mut x = vec![0.0; self.n_t];
        for m in 0..(1u64 << self.n_t) {
            for (k, xk) in x.iter_mut().enumerate() {
                *xk = if (m >> k) & 1 == 0 { 1.0 } else { -1.0 };
            }
            let v = self.residual_norm_sq(&x);
            if v < best.1 {
                best = (m, v);
            }
        }
        Ok(Detection {
            x_best: SpinVector::from_index(best.0, self.n_t),
            value: best.1,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub x_best: SpinVector,
    pub value: f64,
}

/// On-disk layout of one instance (one JSON object per line).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub schema_version: u32,
    pub seed: u64,
    pub n_t: usize,
    pub n_r: usize,
    pub noise_scale: f64,
    /// Row-major, `n_r * n_t` entries.
    pub h: Vec<f64>,
    pub x_true: SpinVector,
    pub noise: Vec<f64>,
    pub y: Vec<f64>,
}

impl From<ChannelInstance> for InstanceRecord {
    fn from(inst: ChannelInstance) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            seed: inst.seed,
            n_t: inst.n_t,
            n_r: inst.n_r,
            noise_scale: inst.noise_scale,
            h: inst.h.as_row_major().to_vec(),
            x_true: inst.x_true,
            noise: inst.noise,
            y: inst.y,
        }
    }
}

impl TryFrom<InstanceRecord> for ChannelInstance {
    type Error = Error;

    fn try_from(rec: InstanceRecord) -> Result<Self> {
        if rec.schema_version != SCHEMA_VERSION {
            return Err(Error::domain(format!(
                "unsupported instance schema_version {}",
                rec.schema_version
            )));
        }
        let h = RealMatrix::from_row_major(rec.n_r, rec.n_t, rec.h)?;
        let mut inst = Self::from_parts(h, rec.x_true, rec.noise)?;
        if rec.y.len() != inst.n_r {
            return Err(Error::domain("received vector length does not match n_r"));
        }
        let scale = rec.y.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        if inst.y.iter().zip(&rec.y).any(|(a, b)| (a - b).abs() > 1e-9 * scale) {
            return Err(Error::domain("stored y is inconsistent with H·x_true + noise"));
        }
        // keep the stored bits rather than the recomputed sum
        inst.y = rec.y;
        inst.seed = rec.seed;
        inst.noise_scale = rec.noise_scale;
        Ok(inst)
    }
}
