use serde::{Deserialize, Serialize};

use super::gp::GpPosterior;
use super::Bounds;
use crate::rng::{SeededRng, Stream};

/// Upper confidence bound `μ + κσ`.
pub fn ucb(mean: f64, variance: f64, kappa: f64) -> f64 {
    mean + kappa * variance.max(0.0).sqrt()
}

/// Multi-start compass search over the acquisition surface.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    /// Uniform candidates scored before local search.
    pub candidates: usize,
    /// Best candidates refined by compass search.
    pub starts: usize,
    /// Initial compass step as a fraction of each box width.
    pub initial_step: f64,
    /// Search stops once the step falls below this fraction of the width.
    pub min_step: f64,
    pub max_sweeps: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            candidates: 2000,
            starts: 10,
            initial_step: 0.1,
            min_step: 1e-6,
            max_sweeps: 500,
        }
    }
}

pub fn maximize_acquisition(post: &GpPosterior, bounds: &Bounds, kappa: f64, seed: u64) -> Vec<f64> {
    maximize_acquisition_with(post, bounds, kappa, seed, &SearchOptions::default())
}

/// Approximate argmax of `ucb(gp_predict(x))` inside `bounds`; deterministic
/// in `seed`.
pub fn maximize_acquisition_with(
    post: &GpPosterior,
    bounds: &Bounds,
    kappa: f64,
    seed: u64,
    opts: &SearchOptions,
) -> Vec<f64> {
    assert_eq!(post.dim(), bounds.dim(), "posterior and box dimensions differ");
    let acq = |x: &[f64]| {
        let (m, v) = post.predict_unchecked(x);
        ucb(m, v, kappa)
    };
    let mut rng = SeededRng::new(seed, Stream::Acquisition);

    let mut scored: Vec<(f64, Vec<f64>)> = (0..opts.candidates.max(1))
        .map(|_| {
            let x = bounds.sample_uniform(&mut rng);
            (acq(&x), x)
        })
        .collect();
    // training points are natural starts for exploitation
    for p in post.points() {
        let x = bounds.clamp(p);
        scored.push((acq(&x), x));
    }
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));
    scored.truncate(opts.starts.max(1));

    let widths = bounds.widths();
    let mut best = scored[0].clone();
    for (value, start) in scored {
        let (v, x) = compass_search(&acq, bounds, &widths, start, value, opts);
        if v > best.0 {
            best = (v, x);
        }
    }
    best.1
}

fn compass_search(
    f: &impl Fn(&[f64]) -> f64,
    bounds: &Bounds,
    widths: &[f64],
    mut x: Vec<f64>,
    mut fx: f64,
    opts: &SearchOptions,
) -> (f64, Vec<f64>) {
    let mut step = opts.initial_step;
    for _ in 0..opts.max_sweeps {
        if step < opts.min_step {
            break;
        }
        let mut improved = false;
        for d in 0..x.len() {
            for dir in [1.0, -1.0] {
                let mut trial = x.clone();
                trial[d] = (trial[d] + dir * step * widths[d]).clamp(bounds.lower()[d], bounds.upper()[d]);
                let ft = f(&trial);
                if ft > fx {
                    x = trial;
                    fx = ft;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (fx, x)
}
