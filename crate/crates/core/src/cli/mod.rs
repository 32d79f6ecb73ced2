//! Experiment harness behind the `qaoa-mimo` binary.
//!
//! Every mode reads an [`ExperimentConfig`], derives all randomness from its
//! master seed and writes JSON-lines, JSON or CSV files. Each `cmd_*`
//! function returns a [`RunOutcome`]; [`exit_code`] maps outcomes and errors
//! to process exit codes.

pub mod config;
pub mod report;
mod selftest;

use std::path::{Path, PathBuf};

use crate::bayesopt::Bounds;
use crate::error::{Error, Result};
use crate::instance::ChannelInstance;
use crate::metainit::{train_init, InitParams};
use crate::persist::{read_json, read_jsonl, write_json, write_jsonl};
use crate::rng::{SeededRng, Stream};
use crate::simulator::Simulator;

pub use config::{ExperimentConfig, Method};
pub use report::{CompareSummary, DetectionReport, FailureRecord};
pub use selftest::{SelftestCheck, SelftestReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;
pub const EXIT_PARTIAL: i32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    GenInstances,
    TrainInit,
    Detect,
    Compare,
    Selftest,
}

/// Files written by a command and the number of per-instance failures.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RunOutcome {
    pub written: Vec<PathBuf>,
    pub failures: usize,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.failures > 0 {
            EXIT_PARTIAL
        } else {
            EXIT_OK
        }
    }
}

pub fn exit_code(result: &Result<RunOutcome>) -> i32 {
    match result {
        Ok(o) => o.exit_code(),
        Err(Error::Config(_)) => EXIT_CONFIG,
        Err(_) => EXIT_RUNTIME,
    }
}

pub fn run(mode: Mode, cfg: &ExperimentConfig, out: Option<&Path>, sim: &Simulator) -> Result<RunOutcome> {
    match mode {
        Mode::GenInstances => cmd_gen_instances(cfg, out),
        Mode::TrainInit => cmd_train_init(cfg, out, sim),
        Mode::Detect => cmd_detect(cfg, out, sim),
        Mode::Compare => cmd_compare(cfg, out, sim),
        Mode::Selftest => selftest::cmd_selftest(cfg, out, sim),
    }
}

/// Instance set described by `cfg.instances`: sizes and per-instance seeds
/// come from two independent streams of the master seed.
pub fn generate_instances(cfg: &ExperimentConfig) -> Result<Vec<ChannelInstance>> {
    let set = &cfg.instances;
    let mut seeds = SeededRng::new(cfg.seed, Stream::InstanceSeeds);
    let mut sizes = SeededRng::new(cfg.seed, Stream::InstanceSizes);
    (0..set.count)
        .map(|_| {
            let n_t = set.n_t[sizes.below(set.n_t.len() as u64) as usize];
            let n_r = set.n_r.unwrap_or(n_t);
            ChannelInstance::generate(n_t, n_r, set.noise_scale, seeds.next_u64())
        })
        .collect()
}

pub fn cmd_gen_instances(cfg: &ExperimentConfig, out: Option<&Path>) -> Result<RunOutcome> {
    let path = out.unwrap_or(&cfg.paths.instances);
    let instances = generate_instances(cfg)?;
    write_jsonl(path, &instances)?;
    Ok(RunOutcome {
        written: vec![path.to_path_buf()],
        failures: 0,
    })
}

pub fn cmd_train_init(cfg: &ExperimentConfig, out: Option<&Path>, sim: &Simulator) -> Result<RunOutcome> {
    let path = match (out, &cfg.paths.init_params) {
        (Some(p), _) => p.to_path_buf(),
        (None, Some(p)) => p.clone(),
        (None, None) => return Err(Error::Config("train-init needs paths.init_params or --out".into())),
    };
    let instances = load_instances(cfg)?;
    let init = train_init(sim, &instances, &cfg.train_config(), cfg.seed)?;
    write_json(&path, &init)?;
    Ok(RunOutcome {
        written: vec![path],
        failures: 0,
    })
}

/// Runs one method on every instance. Reports go to `out` (default
/// `paths.out/detect.jsonl`); failures, if any, to a sibling
/// `*.failures.jsonl`.
pub fn cmd_detect(cfg: &ExperimentConfig, out: Option<&Path>, sim: &Simulator) -> Result<RunOutcome> {
    let path = out.map_or_else(|| cfg.paths.out.join("detect.jsonl"), Path::to_path_buf);
    let method = cfg.detect_method();
    let instances = load_instances(cfg)?;
    let trained = match method {
        Method::TrainedInit => Some(load_init(cfg)?),
        Method::RandomInit => None,
    };
    let p = trained.as_ref().map_or(cfg.qaoa.p, |t| t.p);
    let bounds = cfg.bounds.to_box(p)?;
    let inits = initial_points(cfg, method, trained.as_ref(), &bounds, instances.len())?;

    let mut reports = Vec::new();
    let mut failures = Vec::new();
    for (inst, init) in instances.iter().zip(&inits) {
        match report::detect_instance(sim, inst, method, init, &bounds, &cfg.localopt, cfg.top_k()) {
            Ok(r) => reports.push(r),
            Err(e) => failures.push(FailureRecord::new(inst.seed(), method, &e)),
        }
    }
    let mut written = vec![path.clone()];
    write_jsonl(&path, &reports)?;
    if !failures.is_empty() {
        let fpath = sibling(&path, "failures.jsonl");
        write_jsonl(&fpath, &failures)?;
        written.push(fpath);
    }
    Ok(RunOutcome {
        written,
        failures: failures.len(),
    })
}

/// Paired trained-init vs random-init runs with equal budgets. Writes
/// `reports.jsonl`, `curves.csv` and `summary.json` into the output
/// directory (default `paths.out`).
pub fn cmd_compare(cfg: &ExperimentConfig, out: Option<&Path>, sim: &Simulator) -> Result<RunOutcome> {
    let dir = out.unwrap_or(&cfg.paths.out).to_path_buf();
    let instances = load_instances(cfg)?;
    let trained = load_init(cfg)?;
    let bounds = cfg.bounds.to_box(trained.p)?;
    let t_inits = initial_points(cfg, Method::TrainedInit, Some(&trained), &bounds, instances.len())?;
    let r_inits = initial_points(cfg, Method::RandomInit, None, &bounds, instances.len())?;

    let mut pairs = Vec::new();
    let mut failures = Vec::new();
    for ((inst, ti), ri) in instances.iter().zip(&t_inits).zip(&r_inits) {
        let run = |m, init: &Vec<f64>| {
            report::detect_instance(sim, inst, m, init, &bounds, &cfg.localopt, cfg.top_k())
                .map_err(|e| FailureRecord::new(inst.seed(), m, &e))
        };
        match (run(Method::TrainedInit, ti), run(Method::RandomInit, ri)) {
            (Ok(t), Ok(r)) => pairs.push((t, r)),
            (t, r) => failures.extend([t.err(), r.err()].into_iter().flatten()),
        }
    }
    if pairs.is_empty() {
        return Err(Error::Numeric(format!(
            "compare: no instance completed ({} failures)",
            failures.len()
        )));
    }

    let reports_path = dir.join("reports.jsonl");
    write_jsonl(&reports_path, pairs.iter().flat_map(|(t, r)| [t, r]))?;
    let curves_path = dir.join("curves.csv");
    write_curves(&curves_path, pairs.iter().flat_map(|(t, r)| [t, r]))?;
    let mut failed: Vec<u64> = failures.iter().map(|f| f.instance_seed).collect();
    failed.dedup();
    let summary = CompareSummary::from_pairs(cfg.seed, cfg.localopt.budget, &pairs, failed);
    let summary_path = dir.join("summary.json");
    write_json(&summary_path, &summary)?;

    let mut written = vec![reports_path, curves_path, summary_path];
    if !failures.is_empty() {
        let fpath = dir.join("failures.jsonl");
        write_jsonl(&fpath, &failures)?;
        written.push(fpath);
    }
    Ok(RunOutcome {
        written,
        failures: failures.len(),
    })
}

/// CSV columns `iteration,cost,method,instance`; iterations count from 1.
fn write_curves<'a>(path: &Path, reports: impl Iterator<Item = &'a DetectionReport>) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let csv_err = |e: csv::Error| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Numeric(format!("{}: csv: {other:?}", path.display())),
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["iteration", "cost", "method", "instance"]).map_err(csv_err)?;
    for r in reports {
        let seed = r.instance_seed.to_string();
        for (i, c) in r.trace.costs.iter().enumerate() {
            let it = (i + 1).to_string();
            let cost = format!("{c:.16e}");
            w.write_record([it.as_str(), cost.as_str(), r.method.tag(), seed.as_str()])
                .map_err(csv_err)?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// One starting point per instance. Random points are consecutive draws of
/// the master seed's random-init stream, in file order.
fn initial_points(
    cfg: &ExperimentConfig,
    method: Method,
    trained: Option<&InitParams>,
    bounds: &Bounds,
    count: usize,
) -> Result<Vec<Vec<f64>>> {
    match (method, trained) {
        (Method::TrainedInit, Some(t)) => Ok(vec![t.params()?.to_flat(); count]),
        (Method::TrainedInit, None) => Err(Error::Config("trained-init needs an init-params file".into())),
        (Method::RandomInit, _) => {
            let mut rng = SeededRng::new(cfg.seed, Stream::RandomInit);
            Ok((0..count).map(|_| bounds.sample_uniform(&mut rng)).collect())
        }
    }
}

fn load_instances(cfg: &ExperimentConfig) -> Result<Vec<ChannelInstance>> {
    let path = &cfg.paths.instances;
    require_file(path, "paths.instances")?;
    let instances: Vec<ChannelInstance> = read_jsonl(path)?;
    if instances.is_empty() {
        return Err(Error::Config(format!("{}: no instances", path.display())));
    }
    Ok(instances)
}

fn load_init(cfg: &ExperimentConfig) -> Result<InitParams> {
    let path = cfg
        .paths
        .init_params
        .as_ref()
        .ok_or_else(|| Error::Config("trained-init needs paths.init_params".into()))?;
    require_file(path, "paths.init_params")?;
    let init: InitParams = read_json(path)?;
    init.params()?;
    Ok(init)
}

fn require_file(path: &Path, key: &str) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Error::Config(format!("{key}: {} does not exist", path.display())))
    }
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.{suffix}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Ok(RunOutcome::default())), EXIT_OK);
        let partial = RunOutcome {
            written: vec![],
            failures: 2,
        };
        assert_eq!(exit_code(&Ok(partial)), EXIT_PARTIAL);
        assert_eq!(exit_code(&Err(Error::Config("x".into()))), EXIT_CONFIG);
        assert_eq!(exit_code(&Err(Error::Numeric("x".into()))), EXIT_RUNTIME);
    }

    #[test]
    fn generated_sizes_follow_the_choices() {
        let cfg = ExperimentConfig::parse("seed = 5\n[instances]\ncount = 40\nn_t = [2, 3]", Path::new("")).unwrap();
        let insts = generate_instances(&cfg).unwrap();
        assert_eq!(insts.len(), 40);
        assert!(insts.iter().all(|i| (i.n_t() == 2 || i.n_t() == 3) && i.n_r() == i.n_t()));
        assert!(insts.iter().any(|i| i.n_t() == 2) && insts.iter().any(|i| i.n_t() == 3));
        let again = generate_instances(&cfg).unwrap();
        assert_eq!(insts, again);
    }

    #[test]
    fn random_inits_lie_in_the_box() {
        let cfg = ExperimentConfig::parse("seed = 5", Path::new("")).unwrap();
        let bounds = cfg.bounds.to_box(3).unwrap();
        let pts = initial_points(&cfg, Method::RandomInit, None, &bounds, 50).unwrap();
        assert!(pts.iter().all(|p| bounds.contains(p)));
        assert_ne!(pts[0], pts[1]);
    }

    #[test]
    fn sibling_name() {
        assert_eq!(sibling(Path::new("a/b/rep.jsonl"), "failures.jsonl"), PathBuf::from("a/b/rep.failures.jsonl"));
    }
}
