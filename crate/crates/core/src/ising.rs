//! Ising form of the ML detection objective.
//!
//! Expanding `‖y − Hx‖²` over spins `x ∈ {−1,+1}ⁿ` gives
//! `yᵀy + tr(A) + Σ_{i<j} 2A_ij x_i x_j − Σ_k 2b_k x_k` with `A = HᵀH` and
//! `b = Hᵀy`. The constant is kept as `offset`; the remainder is the cost
//! Hamiltonian, diagonal in the computational basis.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::ChannelInstance;
use crate::matrix::RealMatrix;
use crate::spin::SpinVector;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coupling {
    pub i: usize,
    pub j: usize,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsingModel {
    n: usize,
    a: RealMatrix,
    b: Vec<f64>,
    /// Every pair `i < j` in row order, zero weights included.
    couplings: Vec<Coupling>,
    fields_z: Vec<f64>,
    offset: f64,
}

impl IsingModel {
    pub fn from_instance(inst: &ChannelInstance) -> Self {
        let a = inst.h().gram();
        let b = inst.h().tr_mul_vec(inst.y());
        let offset = inst.y().iter().map(|v| v * v).sum::<f64>() + a.trace();
        Self::from_quadratic(a, b, offset).expect("gram matrix is square and matches b")
    }

    /// Builds the model from a symmetric `A`, a linear term `b` and the
    /// constant that makes `energy + offset` equal the original objective.
    pub fn from_quadratic(a: RealMatrix, b: Vec<f64>, offset: f64) -> Result<Self> {
        let n = a.rows();
        if n == 0 || a.cols() != n || b.len() != n {
            return Err(Error::domain(format!(
                "A must be square and match b (A is {}x{}, b has {})",
                a.rows(),
                a.cols(),
                b.len()
            )));
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let (x, y) = (a[(i, j)], a[(j, i)]);
                if (x - y).abs() > 1e-12 * x.abs().max(y.abs()).max(1.0) {
                    return Err(Error::domain(format!("A is not symmetric at ({i}, {j})")));
                }
            }
        }
        let couplings = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .map(|(i, j)| Coupling {
                i,
                j,
                weight: 2.0 * a[(i, j)],
            })
            .collect();
        let fields_z = b.iter().map(|bk| -2.0 * bk).collect();
        Ok(Self {
            n,
            a,
            b,
            couplings,
            fields_z,
            offset,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn a(&self) -> &RealMatrix {
        &self.a
    }
    pub fn b(&self) -> &[f64] {
        &self.b
    }
    pub fn couplings(&self) -> &[Coupling] {
        &self.couplings
    }
    pub fn fields_z(&self) -> &[f64] {
        &self.fields_z
    }
    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// `Σ_{i<j} 2A_ij x_i x_j − Σ_k 2b_k x_k`.
    pub fn energy(&self, x: &SpinVector) -> Result<f64> {
        if x.len() != self.n {
            return Err(Error::domain(format!(
                "spin vector has length {}, model has {} spins",
                x.len(),
                self.n
            )));
        }
        Ok(self.energy_unchecked(x.as_slice()))
    }

    pub(crate) fn energy_unchecked(&self, x: &[i8]) -> f64 {
        let pair: f64 = self
            .couplings
            .iter()
            .map(|c| c.weight * f64::from(x[c.i] * x[c.j]))
            .sum();
        let field: f64 = self
            .fields_z
            .iter()
            .zip(x)
            .map(|(h, &s)| h * f64::from(s))
            .sum();
        pair + field
    }
}

/// Maps a measured bitstring (qubit 1 leftmost) to antenna symbols:
/// `'0'` is +1, `'1'` is −1.
pub fn decode_state(bits: &str) -> Result<SpinVector> {
    SpinVector::from_bitstring(bits)
}

pub fn encode_state(x: &SpinVector) -> String {
    x.to_bitstring()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn identity_model() -> (ChannelInstance, IsingModel) {
        let x = SpinVector::new(vec![1, 1]).unwrap();
        let inst = ChannelInstance::from_parts(RealMatrix::identity(2), x, vec![0.0, 0.0]).unwrap();
        let model = IsingModel::from_instance(&inst);
        (inst, model)
    }

    #[test]
    fn identity_channel_model() {
        let (inst, m) = identity_model();
        assert_eq!(m.a(), &RealMatrix::identity(2));
        assert_eq!(m.b(), &[1.0, 1.0]);
        assert_eq!(m.couplings(), &[Coupling { i: 0, j: 1, weight: 0.0 }]);
        assert_eq!(m.fields_z(), &[-2.0, -2.0]);
        assert_eq!(m.offset(), 4.0);

        let ones = SpinVector::new(vec![1, 1]).unwrap();
        assert_eq!(m.energy(&ones).unwrap(), -4.0);
        assert_eq!(inst.ml_objective(&ones).unwrap(), m.energy(&ones).unwrap() + m.offset());
    }

    #[test]
    fn pure_coupling_is_z2_symmetric() {
        let a = RealMatrix::from_rows(&[vec![1.0, 0.3, -0.7], vec![0.3, 2.0, 0.1], vec![-0.7, 0.1, 1.5]]).unwrap();
        let m = IsingModel::from_quadratic(a, vec![0.0; 3], 0.0).unwrap();
        for idx in 0..8 {
            let x = SpinVector::from_index(idx, 3);
            assert_eq!(m.energy(&x).unwrap(), m.energy(&x.negated()).unwrap());
        }
    }

    #[test]
    fn rejects_mismatched_inputs() {
        let (_, m) = identity_model();
        assert!(m.energy(&SpinVector::new(vec![1]).unwrap()).is_err());
        let asym = RealMatrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]).unwrap();
        assert!(IsingModel::from_quadratic(asym, vec![0.0; 2], 0.0).is_err());
        assert!(IsingModel::from_quadratic(RealMatrix::identity(2), vec![0.0; 3], 0.0).is_err());
    }

    #[test]
    fn decode_examples() {
        assert_eq!(decode_state("111100").unwrap().as_slice(), &[-1, -1, -1, -1, 1, 1]);
        assert_eq!(decode_state("000000").unwrap().as_slice(), &[1; 6]);
        for n in 1..=8 {
            for idx in 0..(1u64 << n) {
                let x = SpinVector::from_index(idx, n);
                assert_eq!(decode_state(&encode_state(&x)).unwrap(), x);
            }
        }
    }

    proptest! {
        #[test]
        fn offset_identity(n in 2usize..=6, n_r in 1usize..=7, seed in any::<u64>()) {
            let inst = ChannelInstance::generate(n, n_r, 1.0, seed).unwrap();
            let m = IsingModel::from_instance(&inst);
            let a = m.a();
            for i in 0..n {
                for j in 0..n {
                    prop_assert!((a[(i, j)] - a[(j, i)]).abs() <= 1e-12);
                }
            }
            prop_assert_eq!(m.couplings().len(), n * (n - 1) / 2);
            let mut best = (f64::INFINITY, 0u64);
            for idx in 0..(1u64 << n) {
                let x = SpinVector::from_index(idx, n);
                let e = m.energy(&x).unwrap();
                let ml = inst.ml_objective(&x).unwrap();
                prop_assert!((e + m.offset() - ml).abs() <= 1e-9 * ml.abs().max(1.0));
                if e < best.0 {
                    best = (e, idx);
                }
            }
            let det = inst.brute_force_detect().unwrap();
            prop_assert_eq!(SpinVector::from_index(best.1, n), det.x_best);
        }
    }
}
