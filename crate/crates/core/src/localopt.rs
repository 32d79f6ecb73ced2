//! Derivative-free local refinement with COBYLA.
//!
//! Backed by the `cobyla` crate (a Rust translation of NLopt's COBYLA), with
//! the box passed as native bound constraints. This module owns the trace,
//! the evaluation budget and error propagation.

use std::cell::RefCell;

use serde::{Deserialize, Serialize};

use crate::bayesopt::Bounds;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LocalOptOptions {
    /// Maximum objective evaluations.
    pub budget: usize,
    /// Absolute tolerance on the trust-region radius, per coordinate.
    pub tol: f64,
    /// Initial trust-region radius per coordinate, as a fraction of that
    /// coordinate's box width.
    pub initial_step: f64,
}

impl Default for LocalOptOptions {
    fn default() -> Self {
        Self {
            budget: 150,
            tol: 1e-6,
            initial_step: 0.1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    Tolerance,
    BudgetExhausted,
    RoundoffLimited,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub point: Vec<f64>,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptTrace {
    pub evaluations: Vec<Evaluation>,
    pub best_point: Vec<f64>,
    pub best_value: f64,
    pub converged: bool,
    pub reason: StopReason,
}

impl OptTrace {
    fn from_evaluations(evaluations: Vec<Evaluation>, reason: StopReason) -> Option<Self> {
        let best = evaluations
            .iter()
            .enumerate()
            .fold(None::<usize>, |b, (i, e)| match b {
                Some(j) if evaluations[j].value <= e.value => Some(j),
                _ => Some(i),
            })?;
        Some(Self {
            best_point: evaluations[best].point.clone(),
            best_value: evaluations[best].value,
            converged: reason == StopReason::Tolerance,
            reason,
            evaluations,
        })
    }

    pub fn values(&self) -> Vec<f64> {
        self.evaluations.iter().map(|e| e.value).collect()
    }

    /// Running minimum in evaluation order.
    pub fn running_best(&self) -> Vec<f64> {
        self.evaluations
            .iter()
            .scan(f64::INFINITY, |m, e| {
                *m = m.min(e.value);
                Some(*m)
            })
            .collect()
    }
}

#[derive(Debug, thiserror::Error)]
#[error("local optimization aborted after {} evaluations: {source}", evaluations.len())]
pub struct LocalOptAborted {
    #[source]
    pub source: Error,
    pub evaluations: Vec<Evaluation>,
}

impl From<LocalOptAborted> for Error {
    fn from(e: LocalOptAborted) -> Self {
        e.source
    }
}

struct State<F> {
    objective: F,
    evaluations: Vec<Evaluation>,
    failure: Option<Error>,
    budget: usize,
}

/// Minimizes `objective` from `x0` (clamped into `bounds`). Deterministic
/// for identical inputs; never evaluates more than `opts.budget` times.
pub fn minimize<F>(
    objective: F,
    x0: &[f64],
    bounds: &Bounds,
    opts: &LocalOptOptions,
) -> std::result::Result<OptTrace, LocalOptAborted>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let abort = |source: Error, evaluations: Vec<Evaluation>| LocalOptAborted { source, evaluations };
    if opts.budget == 0 {
        return Err(abort(Error::domain("budget must be >= 1"), vec![]));
    }
    if x0.len() != bounds.dim() {
        return Err(abort(
            Error::domain(format!("x0 has dimension {}, bounds have {}", x0.len(), bounds.dim())),
            vec![],
        ));
    }
    if !(opts.tol > 0.0 && opts.initial_step > 0.0) {
        return Err(abort(Error::domain("tol and initial_step must be positive"), vec![]));
    }

    let start = bounds.clamp(x0);
    let state = RefCell::new(State {
        objective,
        evaluations: Vec::new(),
        failure: None,
        budget: opts.budget,
    });

    let wrapped = |x: &[f64], _: &mut ()| -> f64 {
        let mut st = state.borrow_mut();
        let last = st.evaluations.last().map_or(0.0, |e| e.value);
        if st.failure.is_some() || st.evaluations.len() >= st.budget {
            return last;
        }
        match (st.objective)(x) {
            Ok(v) if v.is_finite() => {
                st.evaluations.push(Evaluation {
                    point: x.to_vec(),
                    value: v,
                });
                v
            }
            Ok(v) => {
                st.failure = Some(Error::Objective(format!("non-finite value {v} at {x:?}")));
                last
            }
            Err(e) => {
                st.failure = Some(e);
                last
            }
        }
    };

    let no_constraints: &[fn(&[f64], &mut ()) -> f64] = &[];
    let outcome = cobyla::minimize(
        wrapped,
        &start,
        &bounds.ranges(),
        no_constraints,
        (),
        opts.budget,
        cobyla::RhoBeg::Set(bounds.widths().iter().map(|w| w * opts.initial_step).collect()),
        Some(cobyla::StopTols {
            xtol_abs: vec![opts.tol; start.len()],
            ..cobyla::StopTols::default()
        }),
    );

    let State {
        evaluations,
        failure,
        ..
    } = state.into_inner();
    if let Some(e) = failure {
        return Err(abort(e, evaluations));
    }
    let reason = match outcome {
        Ok((cobyla::SuccessStatus::MaxEvalReached, _, _)) => StopReason::BudgetExhausted,
        Ok(_) => StopReason::Tolerance,
        Err((cobyla::FailStatus::RoundoffLimited, _, _)) => StopReason::RoundoffLimited,
        Err((status, _, _)) => {
            return Err(abort(Error::Numeric(format!("COBYLA failed: {status:?}")), evaluations));
        }
    };
    let reason = if evaluations.len() >= opts.budget {
        StopReason::BudgetExhausted
    } else {
        reason
    };
    match OptTrace::from_evaluations(evaluations, reason) {
        Some(trace) => Ok(trace),
        None => Err(abort(Error::Numeric("COBYLA returned without evaluating".into()), vec![])),
    }
}
