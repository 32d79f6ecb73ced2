use serde::{Deserialize, Serialize};

use super::config::Method;
use crate::bayesopt::Bounds;
use crate::error::Result;
use crate::instance::{ChannelInstance, Detection};
use crate::ising::{encode_state, IsingModel};
use crate::localopt::{minimize, LocalOptOptions, StopReason};
use crate::persist::SCHEMA_VERSION;
use crate::simulator::{CompiledModel, QaoaParams, Simulator};
use crate::spin::{index_to_bitstring, SpinVector};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateProbability {
    pub bitstring: String,
    pub probability: f64,
}

/// Condensed optimizer trace. `costs[i]` is `⟨H_C⟩` at evaluation `i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub init_point: Vec<f64>,
    pub evaluations: usize,
    pub best_point: Vec<f64>,
    pub best_value: f64,
    pub converged: bool,
    pub reason: StopReason,
    pub costs: Vec<f64>,
}

/// Outcome of one refinement run on one instance. Costs are cost-Hamiltonian
/// expectations without the constant offset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport {
    pub schema_version: u32,
    pub instance_seed: u64,
    pub n_t: usize,
    pub n_r: usize,
    pub method: Method,
    pub trace: TraceSummary,
    /// Most probable basis states of the final state, descending.
    pub top_states: Vec<StateProbability>,
    pub argmax_bitstring: String,
    pub argmax_symbols: SpinVector,
    pub reference: Detection,
    pub reference_bitstring: String,
    /// Argmax state decodes to the brute-force solution.
    pub success: bool,
    /// Probability of measuring the brute-force solution.
    pub success_probability: f64,
}

/// A per-instance failure; the run continues past it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FailureRecord {
    pub schema_version: u32,
    pub instance_seed: u64,
    pub method: Method,
    pub error: String,
}

impl FailureRecord {
    pub fn new(instance_seed: u64, method: Method, error: &crate::Error) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            instance_seed,
            method,
            error: error.to_string(),
        }
    }
}

/// Refines QAOA angles on `inst` from `init` and summarizes the final state.
pub fn detect_instance(
    sim: &Simulator,
    inst: &ChannelInstance,
    method: Method,
    init: &[f64],
    bounds: &Bounds,
    opts: &LocalOptOptions,
    top_k: usize,
) -> Result<DetectionReport> {
    let model = IsingModel::from_instance(inst);
    let compiled = CompiledModel::new(sim, &model)?;
    let reference = inst.brute_force_detect()?;

    let trace = minimize(
        |x| Ok(compiled.expectation(&QaoaParams::from_flat(x)?)),
        init,
        bounds,
        opts,
    )?;
    let state = compiled.state(&QaoaParams::from_flat(&trace.best_point)?);

    let n = inst.n_t();
    let top = state.top_k(top_k.max(1));
    let argmax = SpinVector::from_index(top[0].0, n);
    let success_probability = state.success_probability(&reference.x_best)?;

    Ok(DetectionReport {
        schema_version: SCHEMA_VERSION,
        instance_seed: inst.seed(),
        n_t: n,
        n_r: inst.n_r(),
        method,
        trace: TraceSummary {
            init_point: bounds.clamp(init),
            evaluations: trace.evaluations.len(),
            costs: trace.values(),
            best_point: trace.best_point,
            best_value: trace.best_value,
            converged: trace.converged,
            reason: trace.reason,
        },
        top_states: top
            .iter()
            .map(|&(m, p)| StateProbability {
                bitstring: index_to_bitstring(m, n),
                probability: p,
            })
            .collect(),
        argmax_bitstring: encode_state(&argmax),
        success: argmax == reference.x_best,
        argmax_symbols: argmax,
        reference_bitstring: encode_state(&reference.x_best),
        reference,
        success_probability,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerMethod {
    pub trained_init: f64,
    pub random_init: f64,
}

/// Aggregates of a paired comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareSummary {
    pub schema_version: u32,
    pub seed: u64,
    /// Instances where both runs completed.
    pub paired_instances: usize,
    pub failed_instances: Vec<u64>,
    pub budget: usize,
    pub median_final_cost: PerMethod,
    /// Share of paired instances where trained-init ends strictly lower.
    pub fraction_trained_better: f64,
    pub mean_success_probability: PerMethod,
    /// Share of runs whose argmax state is the brute-force solution.
    pub argmax_success_rate: PerMethod,
}

impl CompareSummary {
    /// `pairs` holds `(trained, random)` reports for the same instance.
    pub fn from_pairs(
        seed: u64,
        budget: usize,
        pairs: &[(DetectionReport, DetectionReport)],
        failed_instances: Vec<u64>,
    ) -> Self {
        let n = pairs.len() as f64;
        let per = |f: &dyn Fn(&DetectionReport) -> f64, agg: &dyn Fn(Vec<f64>) -> f64| PerMethod {
            trained_init: agg(pairs.iter().map(|(t, _)| f(t)).collect()),
            random_init: agg(pairs.iter().map(|(_, r)| f(r)).collect()),
        };
        let mean = |v: Vec<f64>| v.iter().sum::<f64>() / v.len() as f64;
        let better = pairs
            .iter()
            .filter(|(t, r)| t.trace.best_value < r.trace.best_value)
            .count();
        Self {
            schema_version: SCHEMA_VERSION,
            seed,
            paired_instances: pairs.len(),
            failed_instances,
            budget,
            median_final_cost: per(&|r| r.trace.best_value, &median),
            fraction_trained_better: better as f64 / n,
            mean_success_probability: per(&|r| r.success_probability, &mean),
            argmax_success_rate: per(&|r| f64::from(u8::from(r.success)), &mean),
        }
    }
}

pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
