//! Low-discrepancy initial design: a Halton sequence with a seeded
//! Cranley-Patterson shift, mapped into the box.

use super::Bounds;
use crate::rng::{SeededRng, Stream};

fn first_primes(count: usize) -> Vec<u64> {
    let mut primes = Vec::with_capacity(count);
    let mut c = 2u64;
    while primes.len() < count {
        if primes.iter().take_while(|&&p| p * p <= c).all(|&p| !c.is_multiple_of(p)) {
            primes.push(c);
        }
        c += 1;
    }
    primes
}

/// Radical inverse of `index` in `base`.
fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while index > 0 {
        r += f * (index % base) as f64;
        index /= base;
        f *= inv;
    }
    r
}

/// `count` points of the shifted Halton sequence (indices start at 1).
pub fn initial_design(bounds: &Bounds, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let dim = bounds.dim();
    let primes = first_primes(dim);
    let mut rng = SeededRng::new(seed, Stream::InitialDesign);
    let shift: Vec<f64> = (0..dim).map(|_| rng.uniform()).collect();
    (1..=count as u64)
        .map(|i| {
            let unit: Vec<f64> = primes
                .iter()
                .zip(&shift)
                .map(|(&p, s)| (radical_inverse(i, p) + s).fract())
                .collect();
            bounds.from_unit(&unit)
        })
        .collect()
}
