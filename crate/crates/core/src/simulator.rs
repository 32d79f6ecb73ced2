//! Dense statevector simulation of the p-level QAOA circuit.
//!
//! Amplitude index `m` follows the convention in [`crate::spin`]: bit `k`
//! (LSB first) is qubit `k`. The cost layer is a diagonal phase
//! `exp(−iγ·diag)`, the mixer `exp(−iβ Σ X_j)` is applied as `n` sweeps of
//! `R_x(2β)`, so one layer costs `O(n·2ⁿ)`.

use std::collections::BTreeMap;

use libm::{cos, sin};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ising::IsingModel;
use crate::rng::{SeededRng, Stream};
use crate::spin::{index_to_bitstring, SpinVector};

pub const DEFAULT_MAX_QUBITS: usize = 20;
pub const MAX_QUBITS_ENV: &str = "QAOA_MIMO_MAX_QUBITS";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QaoaParams {
    gammas: Vec<f64>,
    betas: Vec<f64>,
}

impl QaoaParams {
    pub fn new(gammas: Vec<f64>, betas: Vec<f64>) -> Result<Self> {
        if gammas.is_empty() || gammas.len() != betas.len() {
            return Err(Error::domain(format!(
                "need p >= 1 gammas and as many betas (got {} and {})",
                gammas.len(),
                betas.len()
            )));
        }
        Ok(Self { gammas, betas })
    }

    pub fn single(gamma: f64, beta: f64) -> Self {
        Self {
            gammas: vec![gamma],
            betas: vec![beta],
        }
    }

    /// Splits a flat `[γ₁..γ_p, β₁..β_p]` vector.
    pub fn from_flat(flat: &[f64]) -> Result<Self> {
        if flat.is_empty() || !flat.len().is_multiple_of(2) {
            return Err(Error::domain(format!(
                "flat parameter vector must have even positive length, got {}",
                flat.len()
            )));
        }
        let (g, b) = flat.split_at(flat.len() / 2);
        Self::new(g.to_vec(), b.to_vec())
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.gammas.iter().chain(&self.betas).copied().collect()
    }

    pub fn p(&self) -> usize {
        self.gammas.len()
    }
    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }
    pub fn betas(&self) -> &[f64] {
        &self.betas
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Statevector {
    n: usize,
    amplitudes: Vec<Complex64>,
}

impl Statevector {
    /// `|+⟩^⊗n`.
    pub fn uniform(n: usize) -> Self {
        let dim = 1usize << n;
        let amp = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
        Self {
            n,
            amplitudes: vec![amp; dim],
        }
    }

    pub fn basis(n: usize, index: u64) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1usize << n];
        amplitudes[index as usize] = Complex64::new(1.0, 0.0);
        Self { n, amplitudes }
    }

    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let dim = amplitudes.len();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(Error::domain(format!("amplitude count {dim} is not a power of two >= 2")));
        }
        Ok(Self {
            n: dim.trailing_zeros() as usize,
            amplitudes,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(Complex64::norm_sqr).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(Complex64::norm_sqr).collect()
    }

    pub fn apply_phase(&mut self, gamma: f64, diagonal: &[f64]) {
        for (amp, &e) in self.amplitudes.iter_mut().zip(diagonal) {
            let theta = -gamma * e;
            *amp *= Complex64::new(cos(theta), sin(theta));
        }
    }

    /// `exp(−iβ Σ_j X_j)`, i.e. `R_x(2β)` on every qubit.
    pub fn apply_mixer(&mut self, beta: f64) {
        let (s, c) = (sin(beta), cos(beta));
        let mis = Complex64::new(0.0, -s);
        for q in 0..self.n {
            let stride = 1usize << q;
            for block in self.amplitudes.chunks_exact_mut(2 * stride) {
                let (lo, hi) = block.split_at_mut(stride);
                for (a0, a1) in lo.iter_mut().zip(hi.iter_mut()) {
                    let (x0, x1) = (*a0, *a1);
                    *a0 = x0 * c + x1 * mis;
                    *a1 = x0 * mis + x1 * c;
                }
            }
        }
    }

    /// `Σ_m |amp_m|²·diag_m`.
    pub fn expectation_diagonal(&self, diagonal: &[f64]) -> f64 {
        self.amplitudes
            .iter()
            .zip(diagonal)
            .map(|(a, d)| a.norm_sqr() * d)
            .sum()
    }

    /// Probability of measuring the basis state that encodes `x`.
    pub fn success_probability(&self, x: &SpinVector) -> Result<f64> {
        if x.len() != self.n {
            return Err(Error::domain(format!(
                "spin vector has length {}, state has {} qubits",
                x.len(),
                self.n
            )));
        }
        Ok(self.amplitudes[x.index() as usize].norm_sqr())
    }

    /// Multinomial readout, one categorical draw per shot.
    pub fn sample(&self, shots: usize, seed: u64) -> Result<BTreeMap<String, usize>> {
        if shots == 0 {
            return Err(Error::domain("shots must be >= 1"));
        }
        let mut cdf = Vec::with_capacity(self.amplitudes.len());
        let mut acc = 0.0;
        for a in &self.amplitudes {
            acc += a.norm_sqr();
            cdf.push(acc);
        }
        let total = acc;
        let mut rng = SeededRng::new(seed, Stream::Sampling);
        let mut counts = vec![0usize; self.amplitudes.len()];
        for _ in 0..shots {
            let u = rng.uniform() * total;
            let idx = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
            counts[idx] += 1;
        }
        Ok(counts
            .into_iter()
            .enumerate()
            .filter(|&(_, c)| c > 0)
            .map(|(m, c)| (index_to_bitstring(m as u64, self.n), c))
            .collect())
    }

    /// The `k` most probable basis states, ties in index order.
    pub fn top_k(&self, k: usize) -> Vec<(u64, f64)> {
        let mut probs: Vec<(u64, f64)> = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(m, a)| (m as u64, a.norm_sqr()))
            .collect();
        probs.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        probs.truncate(k);
        probs
    }
}

/// Statevector backend with a qubit cap.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Simulator {
    pub max_qubits: usize,
}

impl Default for Simulator {
    fn default() -> Self {
        Self {
            max_qubits: DEFAULT_MAX_QUBITS,
        }
    }
}

impl Simulator {
    pub fn new(max_qubits: usize) -> Self {
        Self { max_qubits }
    }

    /// Default cap, overridden by `QAOA_MIMO_MAX_QUBITS` when set.
    pub fn from_env() -> Result<Self> {
        match std::env::var(MAX_QUBITS_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .map(Self::new)
                .map_err(|_| Error::Config(format!("{MAX_QUBITS_ENV}={v:?} is not a qubit count"))),
            Err(_) => Ok(Self::default()),
        }
    }

    fn check(&self, n: usize) -> Result<()> {
        if n > self.max_qubits || n >= usize::BITS as usize - 1 {
            return Err(Error::ResourceLimit {
                what: "statevector simulation",
                requested: n,
                cap: self.max_qubits,
            });
        }
        Ok(())
    }

    /// Classical energy of every basis state, indexed like the amplitudes.
    pub fn hc_diagonal(&self, model: &IsingModel) -> Result<Vec<f64>> {
        let n = model.n();
        self.check(n)?;
        let mut spins = vec![0i8; n];
        Ok((0..1u64 << n)
            .map(|m| {
                for (k, s) in spins.iter_mut().enumerate() {
                    *s = if (m >> k) & 1 == 0 { 1 } else { -1 };
                }
                model.energy_unchecked(&spins)
            })
            .collect())
    }

    pub fn qaoa_state(&self, model: &IsingModel, params: &QaoaParams) -> Result<Statevector> {
        let diag = self.hc_diagonal(model)?;
        Ok(evolve(model.n(), &diag, params))
    }

    pub fn expectation(&self, model: &IsingModel, params: &QaoaParams) -> Result<f64> {
        let diag = self.hc_diagonal(model)?;
        Ok(evolve(model.n(), &diag, params).expectation_diagonal(&diag))
    }
}

/// Runs the circuit on a precomputed cost diagonal.
pub fn evolve(n: usize, diagonal: &[f64], params: &QaoaParams) -> Statevector {
    debug_assert_eq!(diagonal.len(), 1usize << n);
    let mut state = Statevector::uniform(n);
    for (&gamma, &beta) in params.gammas.iter().zip(&params.betas) {
        state.apply_phase(gamma, diagonal);
        state.apply_mixer(beta);
    }
    state
}

/// Cost diagonal cached next to its model, for repeated evaluation inside
/// optimizer loops.
#[derive(Clone, Debug)]
pub struct CompiledModel {
    n: usize,
    diagonal: Vec<f64>,
}

impl CompiledModel {
    pub fn new(sim: &Simulator, model: &IsingModel) -> Result<Self> {
        Ok(Self {
            n: model.n(),
            diagonal: sim.hc_diagonal(model)?,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    pub fn state(&self, params: &QaoaParams) -> Statevector {
        evolve(self.n, &self.diagonal, params)
    }

    pub fn expectation(&self, params: &QaoaParams) -> f64 {
        self.state(params).expectation_diagonal(&self.diagonal)
    }
}
