//! Bayesian optimization with a Gaussian-process surrogate and an
//! upper-confidence-bound acquisition.
//!
//! The loop maximizes a black box: after a low-discrepancy initial design,
//! each round fits the GP to every observation so far (points mapped to the
//! unit box, values standardized), proposes the UCB maximizer and evaluates
//! it. Callers minimizing a cost pass its negation.

pub mod acquisition;
pub mod design;
pub mod gp;

use serde::{Deserialize, Serialize};

pub use acquisition::{maximize_acquisition, maximize_acquisition_with, ucb, SearchOptions};
pub use design::initial_design;
pub use gp::{GpPosterior, Kernel};

use crate::error::{Error, Result};
use crate::rng::{SeededRng, Stream};

/// Axis-aligned box with `lower < upper` on every axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(f64, f64)>", into = "Vec<(f64, f64)>")]
pub struct Bounds {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Bounds {
    pub fn new(ranges: Vec<(f64, f64)>) -> Result<Self> {
        if ranges.is_empty() {
            return Err(Error::domain("bounds need at least one dimension"));
        }
        for (d, &(lo, hi)) in ranges.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::domain(format!("invalid range [{lo}, {hi}] on axis {d}")));
            }
        }
        Ok(Self {
            lower: ranges.iter().map(|r| r.0).collect(),
            upper: ranges.iter().map(|r| r.1).collect(),
        })
    }

    pub fn unit(dim: usize) -> Self {
        Self {
            lower: vec![0.0; dim],
            upper: vec![1.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }
    pub fn lower(&self) -> &[f64] {
        &self.lower
    }
    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn widths(&self) -> Vec<f64> {
        self.upper.iter().zip(&self.lower).map(|(u, l)| u - l).collect()
    }

    pub fn ranges(&self) -> Vec<(f64, f64)> {
        self.lower.iter().copied().zip(self.upper.iter().copied()).collect()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (l, u))| *v >= *l && *v <= *u)
    }

    pub fn clamp(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(v, (l, u))| v.clamp(*l, *u))
            .collect()
    }

    pub fn to_unit(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(v, (l, u))| (v - l) / (u - l))
            .collect()
    }

    pub fn from_unit(&self, t: &[f64]) -> Vec<f64> {
        t.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(s, (l, u))| (l + s * (u - l)).clamp(*l, *u))
            .collect()
    }

    pub fn sample_uniform(&self, rng: &mut SeededRng) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| rng.uniform_in(*l, *u))
            .collect()
    }
}

impl TryFrom<Vec<(f64, f64)>> for Bounds {
    type Error = Error;
    fn try_from(r: Vec<(f64, f64)>) -> Result<Self> {
        Self::new(r)
    }
}

impl From<Bounds> for Vec<(f64, f64)> {
    fn from(b: Bounds) -> Self {
        b.ranges()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoOptions {
    /// Acquisition-driven rounds after the initial design.
    pub rounds: usize,
    pub kappa: f64,
    pub n_init: usize,
    pub kernel: Kernel,
    pub search: SearchOptions,
}

impl Default for BoOptions {
    fn default() -> Self {
        Self {
            rounds: 10,
            kappa: 2.0,
            n_init: 5,
            kernel: Kernel::default(),
            search: SearchOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub point: Vec<f64>,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoHistory {
    pub trials: Vec<Trial>,
    pub best_point: Vec<f64>,
    pub best_value: f64,
    /// Running maximum after each trial.
    pub best_so_far: Vec<f64>,
}

impl BoHistory {
    fn from_trials(trials: Vec<Trial>) -> Option<Self> {
        let mut best_so_far = Vec::with_capacity(trials.len());
        let mut best: Option<usize> = None;
        for (i, t) in trials.iter().enumerate() {
            if best.is_none_or(|b| t.value > trials[b].value) {
                best = Some(i);
            }
            best_so_far.push(trials[best?].value);
        }
        let b = best?;
        Some(Self {
            best_point: trials[b].point.clone(),
            best_value: trials[b].value,
            best_so_far,
            trials,
        })
    }
}

/// The loop stopped early; `trials` holds everything evaluated before the
/// failure.
#[derive(Debug, thiserror::Error)]
#[error("bayesian optimization aborted after {} trials: {source}", trials.len())]
pub struct BoAborted {
    #[source]
    pub source: Error,
    pub trials: Vec<Trial>,
}

impl From<BoAborted> for Error {
    fn from(e: BoAborted) -> Self {
        match e.source {
            Error::Objective(msg) => Error::Objective(format!("{msg} (after {} trials)", e.trials.len())),
            other => other,
        }
    }
}

/// Maximizes `objective` over `bounds` with `n_init` design points followed
/// by `rounds` UCB proposals. Deterministic in `seed`.
pub fn bayes_opt<F>(
    mut objective: F,
    bounds: &Bounds,
    opts: &BoOptions,
    seed: u64,
) -> std::result::Result<BoHistory, BoAborted>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let abort = |source: Error, trials: Vec<Trial>| BoAborted { source, trials };
    if opts.rounds == 0 || opts.n_init == 0 {
        return Err(abort(
            Error::domain("bayesian optimization needs rounds >= 1 and n_init >= 1"),
            vec![],
        ));
    }
    if !(opts.kappa >= 0.0) {
        return Err(abort(Error::domain("kappa must be >= 0"), vec![]));
    }

    let mut trials: Vec<Trial> = Vec::with_capacity(opts.n_init + opts.rounds);
    let mut evaluate = |x: Vec<f64>, trials: &mut Vec<Trial>| -> Result<()> {
        let value = objective(&x)?;
        if !value.is_finite() {
            return Err(Error::Objective(format!("non-finite value {value} at {x:?}")));
        }
        trials.push(Trial { point: x, value });
        Ok(())
    };

    for x in initial_design(bounds, opts.n_init, seed) {
        if let Err(e) = evaluate(x, &mut trials) {
            return Err(abort(e, trials));
        }
    }

    let unit = Bounds::unit(bounds.dim());
    let mut round_seeds = SeededRng::new(seed, Stream::Acquisition);
    for _ in 0..opts.rounds {
        let points: Vec<Vec<f64>> = trials.iter().map(|t| bounds.to_unit(&t.point)).collect();
        let values = standardize(trials.iter().map(|t| t.value));
        let post = match GpPosterior::fit(points, values, opts.kernel) {
            Ok(p) => p,
            Err(e) => return Err(abort(e, trials)),
        };
        let t = maximize_acquisition_with(&post, &unit, opts.kappa, round_seeds.next_u64(), &opts.search);
        if let Err(e) = evaluate(bounds.from_unit(&t), &mut trials) {
            return Err(abort(e, trials));
        }
    }

    Ok(BoHistory::from_trials(trials).expect("at least one trial was evaluated"))
}

/// Zero mean, unit (population) variance; constant data only centred.
fn standardize(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let v: Vec<f64> = values.collect();
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let sd = if var > 1e-24 { var.sqrt() } else { 1.0 };
    v.iter().map(|x| (x - mean) / sd).collect()
}
