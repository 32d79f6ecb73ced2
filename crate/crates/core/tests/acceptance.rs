//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any failed.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;

use qaoa_mimo::analytic::c1_expectation;
use qaoa_mimo::bayesopt::gp::{GpPosterior, Kernel};
use qaoa_mimo::bayesopt::{bayes_opt, BoOptions, Bounds};
use qaoa_mimo::cli::{self, CompareSummary, ExperimentConfig};
use qaoa_mimo::metainit::AngleBounds;
use qaoa_mimo::persist::read_json;
use qaoa_mimo::rng::SeededRng;
use qaoa_mimo::{ChannelInstance, IsingModel, QaoaParams, Simulator, SpinVector};

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        passed,
        detail: detail.into(),
    }
}

fn rng(stream: u64) -> SeededRng {
    SeededRng::with_stream_id(0xACCE_97A9CE, stream)
}

fn random_instance(rng: &mut SeededRng, lo: usize, hi: usize) -> ChannelInstance {
    let n = lo + rng.below((hi - lo + 1) as u64) as usize;
    ChannelInstance::generate(n, n, 1.0, rng.next_u64()).unwrap()
}

fn analytic_equivalence() -> Verdict {
    let sim = Simulator::default();
    let mut r = rng(1);
    let mut worst = 0.0f64;
    let mut tuples = 0;
    for (g_hi, b_hi) in [(AngleBounds::default().gamma.1, PI), (PI / 2.0, PI)] {
        for _ in 0..100 {
            let model = IsingModel::from_instance(&random_instance(&mut r, 2, 6));
            let (g, b) = (r.uniform_in(0.0, g_hi), r.uniform_in(0.0, b_hi));
            let exact = sim.expectation(&model, &QaoaParams::single(g, b)).unwrap();
            worst = worst.max((c1_expectation(&model, g, b) - exact).abs());
            tuples += 1;
        }
    }
    verdict(worst <= 1e-9, format!("{tuples} tuples, max |diff| = {worst:.3e} (tol 1e-9)"))
}

fn offset_identity() -> Verdict {
    let mut r = rng(2);
    let mut worst = 0.0f64;
    for _ in 0..25 {
        let inst = random_instance(&mut r, 1, 8);
        let model = IsingModel::from_instance(&inst);
        for m in 0..1u64 << inst.n_t() {
            let x = SpinVector::from_index(m, inst.n_t());
            let lhs = model.energy(&x).unwrap() + model.offset();
            worst = worst.max((lhs - inst.ml_objective(&x).unwrap()).abs());
        }
    }
    verdict(worst <= 1e-9, format!("25 instances, exhaustive, max |diff| = {worst:.3e} (tol 1e-9)"))
}

fn ground_state_agreement() -> Verdict {
    let sim = Simulator::default();
    let mut r = rng(3);
    let mut bad = 0;
    for _ in 0..60 {
        let inst = random_instance(&mut r, 1, 8);
        let diag = sim.hc_diagonal(&IsingModel::from_instance(&inst)).unwrap();
        let argmin = (0..diag.len()).fold(0, |b, m| if diag[m] < diag[b] { m } else { b });
        let bits = qaoa_mimo::spin::index_to_bitstring(argmin as u64, inst.n_t());
        if qaoa_mimo::decode_state(&bits).unwrap() != inst.brute_force_detect().unwrap().x_best {
            bad += 1;
        }
    }
    verdict(bad == 0, format!("60 instances, {bad} disagreements"))
}

fn simulator_properties() -> Verdict {
    let sim = Simulator::default();
    let mut r = rng(4);
    let (mut norm, mut zero) = (0.0f64, 0.0f64);
    for p in 1..=5 {
        for _ in 0..10 {
            let model = IsingModel::from_instance(&random_instance(&mut r, 1, 6));
            let gammas: Vec<f64> = (0..p).map(|_| r.uniform_in(0.0, PI)).collect();
            let betas: Vec<f64> = (0..p).map(|_| r.uniform_in(0.0, PI)).collect();
            let state = sim
                .qaoa_state(&model, &QaoaParams::new(gammas.clone(), betas).unwrap())
                .unwrap();
            norm = norm.max((state.norm_sqr() - 1.0).abs());
            let e = sim
                .expectation(&model, &QaoaParams::new(gammas, vec![0.0; p]).unwrap())
                .unwrap();
            zero = zero.max(e.abs());
        }
    }
    verdict(
        norm <= 1e-12 && zero <= 1e-12,
        format!("p=1..5, max |norm-1| = {norm:.3e}, max |<H_C>| at beta=0 = {zero:.3e} (tol 1e-12)"),
    )
}

fn gauss_jordan_inverse(mut a: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut inv: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect()).collect();
    for c in 0..n {
        let p = (c..n).max_by(|&x, &y| a[x][c].abs().total_cmp(&a[y][c].abs())).unwrap();
        a.swap(c, p);
        inv.swap(c, p);
        let d = a[c][c];
        for j in 0..n {
            a[c][j] /= d;
            inv[c][j] /= d;
        }
        for i in 0..n {
            if i != c {
                let f = a[i][c];
                for j in 0..n {
                    a[i][j] -= f * a[c][j];
                    inv[i][j] -= f * inv[c][j];
                }
            }
        }
    }
    inv
}

fn se(x: &[f64], z: &[f64], ell: f64) -> f64 {
    let d2: f64 = x.iter().zip(z).map(|(a, b)| (a - b).powi(2)).sum();
    (-d2 / (2.0 * ell * ell)).exp()
}

fn gp_correctness() -> Verdict {
    let mut r = rng(5);
    let kernel = Kernel::default();
    let mut worst_direct = 0.0f64;
    for _ in 0..200 {
        let dim = 1 + r.below(6) as usize;
        let n = 1 + r.below(5) as usize;
        let pts: Vec<Vec<f64>> = (0..n).map(|_| (0..dim).map(|_| r.uniform()).collect()).collect();
        let ys: Vec<f64> = (0..n).map(|_| r.uniform_in(-2.0, 2.0)).collect();
        let post = GpPosterior::fit(pts.clone(), ys.clone(), kernel).unwrap();
        let k: Vec<Vec<f64>> = pts
            .iter()
            .enumerate()
            .map(|(i, a)| {
                pts.iter()
                    .enumerate()
                    .map(|(j, b)| se(a, b, kernel.length_scale) + if i == j { kernel.noise_variance } else { 0.0 })
                    .collect()
            })
            .collect();
        let kinv = gauss_jordan_inverse(k);
        for _ in 0..5 {
            let x: Vec<f64> = (0..dim).map(|_| r.uniform()).collect();
            let ks: Vec<f64> = pts.iter().map(|p| se(p, &x, kernel.length_scale)).collect();
            let w: Vec<f64> = kinv.iter().map(|row| row.iter().zip(&ks).map(|(a, b)| a * b).sum()).collect();
            let mean: f64 = w.iter().zip(&ys).map(|(a, b)| a * b).sum();
            let var = (1.0 - w.iter().zip(&ks).map(|(a, b)| a * b).sum::<f64>()).max(0.0);
            let (m, v) = post.predict(&x).unwrap();
            worst_direct = worst_direct.max((m - mean).abs()).max((v - var).abs());
        }
    }

    let tight = Kernel {
        noise_variance: 1e-10,
        ..Kernel::default()
    };
    // Clustered 1-D sets are excluded here: with l = 0.5 their kernel matrix
    // has eigenvalues far below 1e-10, and even the exact posterior mean
    // misses the data by O(1). From two dimensions up it interpolates.
    let mut worst_interp = 0.0f64;
    for _ in 0..200 {
        let dim = 2 + r.below(5) as usize;
        let n = 1 + r.below(5) as usize;
        let pts: Vec<Vec<f64>> = (0..n).map(|_| (0..dim).map(|_| r.uniform()).collect()).collect();
        let ys: Vec<f64> = (0..n).map(|_| r.uniform_in(-2.0, 2.0)).collect();
        let post = GpPosterior::fit(pts.clone(), ys.clone(), tight).unwrap();
        for (p, y) in pts.iter().zip(&ys) {
            worst_interp = worst_interp.max((post.predict(p).unwrap().0 - y).abs());
        }
    }
    verdict(
        worst_direct <= 1e-8 && worst_interp <= 1e-4,
        format!(
            "max |gp - direct| = {worst_direct:.3e} (tol 1e-8), max interpolation error = {worst_interp:.3e} (tol 1e-4)"
        ),
    )
}

fn bo_sanity() -> Verdict {
    let opts = BoOptions {
        rounds: 20,
        kappa: 2.0,
        ..BoOptions::default()
    };
    let hits = (0..10u64)
        .filter(|&seed| {
            let h = bayes_opt(|x| Ok(-(x[0] - 0.3).powi(2)), &Bounds::unit(1), &opts, seed).unwrap();
            (h.best_point[0] - 0.3).abs() <= 0.1
        })
        .count();
    verdict(hits >= 9, format!("{hits}/10 seeds within 0.1 of 0.3 (need 9)"))
}

/// Training and test sets come from different master seeds; both were fixed
/// before the suite was first run.
const TRAIN_SEED: u64 = 7;
const TEST_SEED: u64 = 8;

fn protocol_replication(dir: &Path) -> Verdict {
    let sim = Simulator::default();
    let train_cfg = ExperimentConfig::parse(
        &format!(
            "seed = {TRAIN_SEED}\n\
             [instances]\ncount = 100\nn_t = [2, 3]\n\
             [qaoa]\np = 3\n[train]\nrounds = 10\n\
             [paths]\ninstances = \"train.jsonl\"\ninit_params = \"init.json\"\n"
        ),
        dir,
    )
    .unwrap();
    cli::cmd_gen_instances(&train_cfg, None).unwrap();
    cli::cmd_train_init(&train_cfg, None, &sim).unwrap();

    let test_cfg = ExperimentConfig::parse(
        &format!(
            "seed = {TEST_SEED}\n\
             [instances]\ncount = 20\nn_t = 6\n\
             [paths]\ninstances = \"test.jsonl\"\ninit_params = \"init.json\"\nout = \"compare\"\n"
        ),
        dir,
    )
    .unwrap();
    cli::cmd_gen_instances(&test_cfg, None).unwrap();
    let outcome = cli::cmd_compare(&test_cfg, None, &sim).unwrap();
    let s: CompareSummary = read_json(&dir.join("compare/summary.json")).unwrap();

    let a = s.fraction_trained_better >= 0.6;
    let b = s.mean_success_probability.trained_init > s.mean_success_probability.random_init;
    verdict(
        a && b && outcome.failures == 0 && s.paired_instances == 20,
        format!(
            "(a) trained lower on {:.0}% of {} (need 60%): {}; (b) mean P(exact) trained {:.4} vs random {:.4}: {}; median cost trained {:.3} vs random {:.3}",
            100.0 * s.fraction_trained_better,
            s.paired_instances,
            if a { "ok" } else { "no" },
            s.mean_success_probability.trained_init,
            s.mean_success_probability.random_init,
            if b { "ok" } else { "no" },
            s.median_final_cost.trained_init,
            s.median_final_cost.random_init,
        ),
    )
}

fn run_cli(dir: &Path, mode: &str, config: &str, out: &str) -> std::process::ExitStatus {
    Command::new(env!("CARGO_BIN_EXE_qaoa-mimo"))
        .current_dir(dir)
        .args([mode, "--config", config, "--out", out])
        .status()
        .unwrap()
}

fn read_tree(path: &Path) -> Vec<(String, Vec<u8>)> {
    if path.is_file() {
        return vec![(path.display().to_string(), std::fs::read(path).unwrap())];
    }
    let mut entries: Vec<_> = std::fs::read_dir(path).unwrap().map(|e| e.unwrap().path()).collect();
    entries.sort();
    entries
        .iter()
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(p).unwrap()))
        .collect()
}

fn determinism(dir: &Path) -> Verdict {
    std::fs::write(
        dir.join("small.toml"),
        "seed = 42\n[instances]\ncount = 12\nn_t = [2, 3, 4]\n\
         [train]\nrounds = 3\n[localopt]\nbudget = 30\n\
         [paths]\ninstances = \"inst.jsonl\"\ninit_params = \"init.json\"\n",
    )
    .unwrap();
    std::fs::write(
        dir.join("random.toml"),
        "seed = 42\n[detect]\nmethod = \"random-init\"\n[localopt]\nbudget = 30\n\
         [paths]\ninstances = \"inst.jsonl\"\n",
    )
    .unwrap();
    let steps = [
        ("gen-instances", "small.toml", "inst"),
        ("train-init", "small.toml", "init"),
        ("detect", "small.toml", "detect-trained"),
        ("detect", "random.toml", "detect-random"),
        ("compare", "small.toml", "compare"),
        ("selftest", "small.toml", "selftest"),
    ];
    let mut mismatched = Vec::new();
    for (mode, config, stem) in steps {
        let mut runs = Vec::new();
        for k in 0..2 {
            let out = match mode {
                "compare" => format!("{stem}-{k}"),
                "gen-instances" | "detect" => format!("{stem}-{k}.jsonl"),
                _ => format!("{stem}-{k}.json"),
            };
            let status = run_cli(dir, mode, config, &out);
            if !status.success() {
                return verdict(false, format!("{mode} exited with {status}"));
            }
            runs.push(read_tree(&dir.join(&out)).into_iter().map(|(_, b)| b).collect::<Vec<_>>());
        }
        if runs[0] != runs[1] || runs[0].iter().any(Vec::is_empty) {
            mismatched.push(format!("{mode}({config})"));
        }
        if mode == "gen-instances" {
            std::fs::copy(dir.join("inst-0.jsonl"), dir.join("inst.jsonl")).unwrap();
        }
        if mode == "train-init" {
            std::fs::copy(dir.join("init-0.json"), dir.join("init.json")).unwrap();
        }
    }
    verdict(
        mismatched.is_empty(),
        if mismatched.is_empty() {
            "6 mode runs, all byte-identical on rerun".to_string()
        } else {
            format!("differences in {}", mismatched.join(", "))
        },
    )
}

type Criterion<'a> = (&'static str, Box<dyn Fn() -> Verdict + 'a>);

fn main() {
    let dir = tempfile::tempdir().unwrap();
    let protocol_dir = dir.path().join("protocol");
    let cli_dir = dir.path().join("cli");
    std::fs::create_dir_all(&protocol_dir).unwrap();
    std::fs::create_dir_all(&cli_dir).unwrap();

    let criteria: Vec<Criterion> = vec![
        ("analytic p=1 expectation equals statevector", Box::new(analytic_equivalence)),
        ("ising energy plus offset equals ML objective", Box::new(offset_identity)),
        ("cost ground state decodes to brute-force ML", Box::new(ground_state_agreement)),
        ("statevector norm and beta=0 expectation", Box::new(simulator_properties)),
        ("GP posterior against direct formula", Box::new(gp_correctness)),
        ("BO finds the 1-D quadratic optimum", Box::new(bo_sanity)),
        ("trained init beats random init on N_t=6", Box::new(|| protocol_replication(&protocol_dir))),
        ("CLI outputs are byte-identical on rerun", Box::new(|| determinism(&cli_dir))),
    ];

    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t = std::time::Instant::now();
        let v = check();
        let tag = if v.passed { "PASS" } else { "FAIL" };
        println!("acceptance {} [{tag}] {name}: {} ({:.1}s)", i + 1, v.detail, t.elapsed().as_secs_f64());
        if !v.passed {
            failed += 1;
        }
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
