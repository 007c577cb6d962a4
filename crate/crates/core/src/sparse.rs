//! Sparse amplitude storage for registers too wide for a dense vector.
//!
//! Only nonzero amplitudes are kept, keyed by basis index. Chain-structured
//! circuits (a few rotations feeding a CNOT ladder) and Pauli errors keep the
//! support small, so 30+ qubit wires simulate in microseconds.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64 as C64;

use crate::error::{QcaError, Result};
use crate::hamiltonian::PauliSum;
use crate::statevector::{Basis, GateOp, OutcomeSampler, Pauli, QuantumState};

/// Amplitudes with |a|^2 below this are dropped after each gate.
const PRUNE_NORM_SQR: f64 = 1e-32;

/// Widest register addressable by a 64-bit basis index.
pub const MAX_SPARSE_QUBITS: usize = 63;

#[derive(Debug, Clone, PartialEq)]
pub struct SparseState {
    n_qubits: usize,
    amplitudes: BTreeMap<u64, C64>,
}

impl SparseState {
    pub fn new(n_qubits: usize) -> Result<Self> {
        if n_qubits > MAX_SPARSE_QUBITS {
            return Err(QcaError::TooLarge {
                n_qubits,
                limit: MAX_SPARSE_QUBITS,
            });
        }
        Ok(Self {
            n_qubits,
            amplitudes: BTreeMap::from([(0, C64::new(1.0, 0.0))]),
        })
    }

    /// Number of stored (nonzero) amplitudes.
    pub fn support(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitude(&self, index: u64) -> C64 {
        self.amplitudes.get(&index).copied().unwrap_or_default()
    }

    pub fn entries(&self) -> impl Iterator<Item = (u64, C64)> + '_ {
        self.amplitudes.iter().map(|(&i, &a)| (i, a))
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n_qubits {
            return Err(QcaError::IndexOutOfRange {
                index: q,
                n_qubits: self.n_qubits,
            });
        }
        Ok(())
    }

    fn apply_single(&mut self, q: usize, m: [[C64; 2]; 2]) {
        let bit = 1u64 << q;
        let mut out: BTreeMap<u64, C64> = BTreeMap::new();
        for (&i, &a) in &self.amplitudes {
            let (lo, b) = (i & !bit, (i >> q & 1) as usize);
            *out.entry(lo).or_default() += m[0][b] * a;
            *out.entry(lo | bit).or_default() += m[1][b] * a;
        }
        out.retain(|_, a| a.norm_sqr() > PRUNE_NORM_SQR);
        self.amplitudes = out;
    }

    fn remap(&mut self, f: impl Fn(u64, C64) -> (u64, C64)) {
        self.amplitudes = self.amplitudes.iter().map(|(&i, &a)| f(i, a)).collect();
    }
}

impl QuantumState for SparseState {
    fn zero_state(n_qubits: usize) -> Result<Self> {
        Self::new(n_qubits)
    }

    fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    fn apply(&mut self, gate: &GateOp) -> Result<()> {
        gate.validate(self.n_qubits)?;
        match *gate {
            GateOp::RotY { qubit, angle } => {
                let (s, c) = (angle / 2.0).sin_cos();
                let (s, c) = (C64::new(s, 0.0), C64::new(c, 0.0));
                self.apply_single(qubit, [[c, -s], [s, c]]);
            }
            GateOp::CNot { control, target } => {
                let (cb, tb) = (1u64 << control, 1u64 << target);
                self.remap(|i, a| if i & cb != 0 { (i ^ tb, a) } else { (i, a) });
            }
            GateOp::BasisChangeToX { qubit } => {
                let h = C64::new(FRAC_1_SQRT_2, 0.0);
                self.apply_single(qubit, [[h, h], [h, -h]]);
            }
        }
        Ok(())
    }

    fn apply_pauli(&mut self, qubit: usize, pauli: Pauli) -> Result<()> {
        self.check_qubit(qubit)?;
        let bit = 1u64 << qubit;
        let i = C64::new(0.0, 1.0);
        match pauli {
            Pauli::X => self.remap(|k, a| (k ^ bit, a)),
            Pauli::Y => self.remap(|k, a| {
                // Y|0> = i|1>, Y|1> = -i|0>
                if k & bit == 0 {
                    (k | bit, i * a)
                } else {
                    (k & !bit, -i * a)
                }
            }),
            Pauli::Z => self.remap(|k, a| if k & bit != 0 { (k, -a) } else { (k, a) }),
        }
        Ok(())
    }

    fn expectation(&self, h: &PauliSum) -> Result<f64> {
        if h.n_qubits != self.n_qubits {
            return Err(QcaError::DimensionMismatch {
                expected: self.n_qubits,
                found: h.n_qubits,
            });
        }
        let mut total = 0.0;
        for term in &h.terms {
            let (x, z) = term.masks();
            let mut acc = 0.0;
            for (&i, a) in &self.amplitudes {
                if let Some(partner) = self.amplitudes.get(&(i ^ x)) {
                    let v = (partner.conj() * a).re;
                    acc += if (i & z).count_ones() & 1 == 1 { -v } else { v };
                }
            }
            total += term.coefficient * acc;
        }
        Ok(total)
    }

    fn z_expectations(&self) -> Vec<f64> {
        let mut z = vec![0.0; self.n_qubits];
        for (&i, a) in &self.amplitudes {
            let p = a.norm_sqr();
            for (k, zk) in z.iter_mut().enumerate() {
                if i >> k & 1 == 1 {
                    *zk -= p;
                } else {
                    *zk += p;
                }
            }
        }
        z
    }

    fn norm_sqr(&self) -> f64 {
        self.amplitudes.values().map(|a| a.norm_sqr()).sum()
    }

    fn outcome_sampler(&self, basis: Basis) -> OutcomeSampler {
        match basis {
            Basis::Computational => OutcomeSampler::from_probabilities(
                self.amplitudes.iter().map(|(&i, a)| (i, a.norm_sqr())),
            ),
            Basis::AllX => OutcomeSampler::XChain {
                n_qubits: self.n_qubits,
                entries: self.entries().collect(),
            },
        }
    }
}
