//! Quick internal consistency checks, runnable from the binary.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ExperimentConfig, RunOutcome};
use crate::analytic::c1_expectation;
use crate::bayesopt::{bayes_opt, BoOptions, Bounds};
use crate::error::{Error, Result};
use crate::instance::ChannelInstance;
use crate::ising::IsingModel;
use crate::persist::{write_json, SCHEMA_VERSION};
use crate::rng::{SeededRng, Stream};
use crate::simulator::{QaoaParams, Simulator};
use crate::spin::SpinVector;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelftestCheck {
    pub name: String,
    pub passed: bool,
    /// Worst deviation seen, or failure count for discrete checks.
    pub worst: f64,
    pub tolerance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelftestReport {
    pub schema_version: u32,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<SelftestCheck>,
}

fn check(name: &str, worst: f64, tolerance: f64) -> SelftestCheck {
    SelftestCheck {
        name: name.into(),
        passed: worst <= tolerance,
        worst,
        tolerance,
    }
}

pub fn selftest(seed: u64, sim: &Simulator) -> Result<SelftestReport> {
    let mut rng = SeededRng::new(seed, Stream::Selftest);
    let instance = |rng: &mut SeededRng, max_n: u64| {
        let n = 2 + rng.below(max_n - 1) as usize;
        ChannelInstance::generate(n, n, 1.0, rng.next_u64())
    };

    let mut analytic = 0.0f64;
    for _ in 0..20 {
        let model = IsingModel::from_instance(&instance(&mut rng, 5)?);
        let (g, b) = (rng.uniform_in(0.0, 0.5), rng.uniform_in(0.0, std::f64::consts::PI));
        let sim_val = sim.expectation(&model, &QaoaParams::single(g, b))?;
        analytic = analytic.max((c1_expectation(&model, g, b) - sim_val).abs());
    }

    let (mut offset, mut ground) = (0.0f64, 0.0);
    for _ in 0..10 {
        let inst = instance(&mut rng, 6)?;
        let model = IsingModel::from_instance(&inst);
        let diag = sim.hc_diagonal(&model)?;
        for (m, e) in diag.iter().enumerate() {
            let x = SpinVector::from_index(m as u64, inst.n_t());
            let ml = inst.ml_objective(&x)?;
            offset = offset.max((e + model.offset() - ml).abs() / ml.abs().max(1.0));
        }
        let argmin = (0..diag.len()).fold(0, |b, m| if diag[m] < diag[b] { m } else { b });
        if SpinVector::from_index(argmin as u64, inst.n_t()) != inst.brute_force_detect()?.x_best {
            ground += 1.0;
        }
    }

    let mut norm = 0.0f64;
    for p in 1..=5 {
        let model = IsingModel::from_instance(&instance(&mut rng, 6)?);
        let flat: Vec<f64> = (0..2 * p).map(|_| rng.uniform_in(0.0, 2.0)).collect();
        let state = sim.qaoa_state(&model, &QaoaParams::from_flat(&flat)?)?;
        norm = norm.max((state.norm_sqr() - 1.0).abs());
    }

    let mut bo_misses = 0.0;
    let opts = BoOptions {
        rounds: 20,
        ..Default::default()
    };
    for k in 0..10 {
        let h = bayes_opt(|x| Ok(-(x[0] - 0.3).powi(2)), &Bounds::unit(1), &opts, seed.wrapping_add(k))?;
        if (h.best_point[0] - 0.3).abs() > 0.1 {
            bo_misses += 1.0;
        }
    }

    let checks = vec![
        check("analytic-p1-vs-statevector", analytic, 1e-9),
        check("ising-offset-identity", offset, 1e-9),
        check("ground-state-decodes-to-ml", ground, 0.0),
        check("statevector-norm", norm, 1e-12),
        check("bo-quadratic-misses", bo_misses, 1.0),
    ];
    Ok(SelftestReport {
        schema_version: SCHEMA_VERSION,
        seed,
        passed: checks.iter().all(|c| c.passed),
        checks,
    })
}

/// Writes the report to `out` (default `paths.out/selftest.json`); any
/// failed check is a runtime error.
pub fn cmd_selftest(cfg: &ExperimentConfig, out: Option<&Path>, sim: &Simulator) -> Result<RunOutcome> {
    let path = out.map_or_else(|| cfg.paths.out.join("selftest.json"), Path::to_path_buf);
    let report = selftest(cfg.seed, sim)?;
    write_json(&path, &report)?;
    if !report.passed {
        let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        return Err(Error::Numeric(format!("selftest failed: {}", failed.join(", "))));
    }
    Ok(RunOutcome {
        written: vec![path],
        failures: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_checks_pass() {
        let r = selftest(11, &Simulator::default()).unwrap();
        assert!(r.passed, "{r:?}");
        assert_eq!(r.checks.len(), 5);
    }
}
