//! Shared initial angles learned on an ensemble of small instances.
//!
//! The training objective is the ensemble mean `F_p(γ, β)` of the cost
//! expectation over a set of classically simulable models. Bayesian
//! optimization maximizes `−F_p` over the `2p`-dimensional angle box, and the
//! best point becomes the initial parameter vector for larger instances.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::bayesopt::{bayes_opt, BoHistory, BoOptions, Bounds};
use crate::error::{Error, Result};
use crate::instance::ChannelInstance;
use crate::ising::IsingModel;
use crate::persist::SCHEMA_VERSION;
use crate::simulator::{CompiledModel, QaoaParams, Simulator};

/// Per-level angle ranges; every γ_l shares one range and every β_l another.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AngleBounds {
    pub gamma: (f64, f64),
    pub beta: (f64, f64),
}

impl Default for AngleBounds {
    fn default() -> Self {
        Self {
            gamma: (0.0, 0.25),
            beta: (0.0, PI),
        }
    }
}

impl AngleBounds {
    /// Box over the flat `[γ₁..γ_p, β₁..β_p]` layout.
    pub fn to_box(&self, p: usize) -> Result<Bounds> {
        if p == 0 {
            return Err(Error::domain("p must be >= 1"));
        }
        let mut r = vec![self.gamma; p];
        r.extend(std::iter::repeat_n(self.beta, p));
        Bounds::new(r)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub p: usize,
    pub angle_bounds: AngleBounds,
    pub bo: BoOptions,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            p: 3,
            angle_bounds: AngleBounds::default(),
            bo: BoOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub instance_count: usize,
    pub rounds: usize,
    pub n_init: usize,
    pub kappa: f64,
    pub seed: u64,
    pub angle_bounds: AngleBounds,
    /// `F_p` at the returned angles.
    pub final_value: f64,
    /// Optimization history on the maximized quantity `−F_p`.
    pub history: BoHistory,
}

/// Persisted as `{schema_version, p, gammas, betas, training_meta}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitParams {
    pub schema_version: u32,
    pub p: usize,
    pub gammas: Vec<f64>,
    pub betas: Vec<f64>,
    pub training_meta: TrainingMeta,
}

impl InitParams {
    pub fn params(&self) -> Result<QaoaParams> {
        if self.gammas.len() != self.p {
            return Err(Error::domain("init record: p does not match the angle count"));
        }
        QaoaParams::new(self.gammas.clone(), self.betas.clone())
    }
}

/// `F_p` over precompiled models, summed in list order.
pub fn meta_objective_compiled(models: &[CompiledModel], params: &QaoaParams) -> Result<f64> {
    if models.is_empty() {
        return Err(Error::domain("meta objective needs at least one model"));
    }
    let total: f64 = models.iter().map(|m| m.expectation(params)).sum();
    Ok(total / models.len() as f64)
}

/// Mean of the cost expectation over `models`.
pub fn meta_objective(sim: &Simulator, models: &[IsingModel], params: &QaoaParams) -> Result<f64> {
    let compiled = compile(sim, models)?;
    meta_objective_compiled(&compiled, params)
}

fn compile(sim: &Simulator, models: &[IsingModel]) -> Result<Vec<CompiledModel>> {
    models.iter().map(|m| CompiledModel::new(sim, m)).collect()
}

pub fn train_init(
    sim: &Simulator,
    instances: &[ChannelInstance],
    cfg: &TrainConfig,
    seed: u64,
) -> Result<InitParams> {
    if instances.is_empty() {
        return Err(Error::domain("training set is empty"));
    }
    let models: Vec<IsingModel> = instances.iter().map(IsingModel::from_instance).collect();
    let compiled = compile(sim, &models)?;
    let bounds = cfg.angle_bounds.to_box(cfg.p)?;

    let history = bayes_opt(
        |x| {
            let params = QaoaParams::from_flat(x)?;
            meta_objective_compiled(&compiled, &params).map(|f| -f)
        },
        &bounds,
        &cfg.bo,
        seed,
    )?;

    let best = QaoaParams::from_flat(&history.best_point)?;
    Ok(InitParams {
        schema_version: SCHEMA_VERSION,
        p: cfg.p,
        gammas: best.gammas().to_vec(),
        betas: best.betas().to_vec(),
        training_meta: TrainingMeta {
            instance_count: instances.len(),
            rounds: cfg.bo.rounds,
            n_init: cfg.bo.n_init,
            kappa: cfg.bo.kappa,
            seed,
            angle_bounds: cfg.angle_bounds,
            final_value: -history.best_value,
            history,
        },
    })
}
