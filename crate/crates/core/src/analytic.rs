//! Closed-form expectation of the 1-level QAOA on the detection Hamiltonian.
//!
//! The cost Hamiltonian is read as a complete graph over the spins: vertex
//! `i` carries the field term `−2b_i σᶻᵢ`, edge `(i, j)` the coupling
//! `2A_ij σᶻᵢσᶻⱼ`. Light-cone reduction of the single layer gives per-vertex
//! and per-edge terms whose cost is linear in `n`, so the full expectation is
//! `O(n³)` instead of the simulator's `O(n·2ⁿ)`.
//!
//! The pair term implemented here is the symmetrized four-term form
//!
//! ```text
//! ⟨σᶻᵢσᶻⱼ⟩ = ½ sin 4β sin(4γA_ij) [cos(4γb_j) Π cos(4γA_jk) + cos(4γb_i) Π cos(4γA_ik)]
//!          − ½ sin²2β cos(4γ(b_i + b_j)) Π cos(4γ(A_ik + A_jk))
//!          + ½ sin²2β cos(4γ(b_j − b_i)) Π cos(4γ(A_jk − A_ik))
//! ```
//!
//! with every product over `k ∉ {i, j}`. There is no extra `cos²(4γA_ij)`
//! factor on the last two terms; adding one breaks agreement with the
//! statevector (see the `pair_term_has_no_squared_coupling_factor` test).

use libm::{cos, sin};

use crate::ising::IsingModel;

/// `⟨σᶻᵢ⟩` after one layer (0-based `i`):
/// `−sin 2β · sin(4γb_i) · Π_{k≠i} cos(4γA_ik)`.
pub fn c1_single(model: &IsingModel, i: usize, gamma: f64, beta: f64) -> f64 {
    let a = model.a();
    let b = model.b();
    let cone: f64 = (0..model.n())
        .filter(|&k| k != i)
        .map(|k| cos(4.0 * gamma * a[(i, k)]))
        .product();
    -sin(2.0 * beta) * sin(4.0 * gamma * b[i]) * cone
}

/// `⟨σᶻᵢσᶻⱼ⟩` after one layer (0-based, `i ≠ j`); symmetric in `i, j`.
pub fn c1_pair(model: &IsingModel, i: usize, j: usize, gamma: f64, beta: f64) -> f64 {
    assert_ne!(i, j, "pair term needs two distinct spins");
    let a = model.a();
    let b = model.b();
    let g4 = 4.0 * gamma;
    let others = || (0..model.n()).filter(move |&k| k != i && k != j);

    let prod_i: f64 = others().map(|k| cos(g4 * a[(i, k)])).product();
    let prod_j: f64 = others().map(|k| cos(g4 * a[(j, k)])).product();
    let prod_sum: f64 = others().map(|k| cos(g4 * (a[(i, k)] + a[(j, k)]))).product();
    let prod_diff: f64 = others().map(|k| cos(g4 * (a[(j, k)] - a[(i, k)]))).product();

    let s2b = sin(2.0 * beta);
    let edge = 0.5 * sin(4.0 * beta) * sin(g4 * a[(i, j)]);
    let sq = 0.5 * s2b * s2b;

    edge * (cos(g4 * b[j]) * prod_j + cos(g4 * b[i]) * prod_i)
        - sq * cos(g4 * (b[i] + b[j])) * prod_sum
        + sq * cos(g4 * (b[j] - b[i])) * prod_diff
}

/// `Σ_{i<j} 2A_ij ⟨σᶻᵢσᶻⱼ⟩ − Σ_k 2b_k ⟨σᶻ_k⟩`.
pub fn c1_expectation(model: &IsingModel, gamma: f64, beta: f64) -> f64 {
    let pairs: f64 = model
        .couplings()
        .iter()
        .map(|c| c.weight * c1_pair(model, c.i, c.j, gamma, beta))
        .sum();
    let singles: f64 = model
        .fields_z()
        .iter()
        .enumerate()
        .map(|(k, h)| h * c1_single(model, k, gamma, beta))
        .sum();
    pairs + singles
}
