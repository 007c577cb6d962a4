//! Gate-level state simulation.
//!
//! Qubit 0 is the least significant bit of a basis index, and bitstrings are
//! rendered with qubit 0 rightmost. Two backends implement [`QuantumState`]:
//! the dense [`StateVector`] and the sparse [`crate::sparse::SparseState`]
//! for wide registers whose states stay concentrated on few basis states.

use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{QcaError, Result};
use crate::hamiltonian::PauliSum;

/// Default ceiling for dense registers (2^26 amplitudes, 1 GiB).
pub const MAX_DENSE_QUBITS: usize = 26;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GateOp {
    RotY {
        qubit: usize,
        angle: f64,
    },
    CNot {
        control: usize,
        target: usize,
    },
    /// Hadamard: rotates the X eigenbasis onto the computational basis.
    BasisChangeToX {
        qubit: usize,
    },
}

impl GateOp {
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            GateOp::RotY { qubit, .. } | GateOp::BasisChangeToX { qubit } => vec![qubit],
            GateOp::CNot { control, target } => vec![control, target],
        }
    }

    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        for q in self.qubits() {
            if q >= n_qubits {
                return Err(QcaError::IndexOutOfRange { index: q, n_qubits });
            }
        }
        if let GateOp::CNot { control, target } = *self {
            if control == target {
                return Err(QcaError::InvalidArgument(format!(
                    "CNot control and target are both qubit {control}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

    /// Whether this error flips a Z-basis measurement outcome.
    pub fn flips_bit(self) -> bool {
        matches!(self, Pauli::X | Pauli::Y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Basis {
    Computational,
    /// Every qubit measured in the X basis.
    AllX,
}

/// Common interface of the simulation backends.
pub trait QuantumState: Clone + Send + Sync + Sized {
    /// |0...0> on `n_qubits` qubits.
    fn zero_state(n_qubits: usize) -> Result<Self>;
    fn n_qubits(&self) -> usize;
    fn apply(&mut self, gate: &GateOp) -> Result<()>;
    fn apply_pauli(&mut self, qubit: usize, pauli: Pauli) -> Result<()>;
    /// Exact <psi|H|psi>.
    fn expectation(&self, h: &PauliSum) -> Result<f64>;
    /// <Z_k> for every qubit.
    fn z_expectations(&self) -> Vec<f64>;
    fn norm_sqr(&self) -> f64;
    /// Outcome distribution of a measurement in `basis`.
    fn outcome_sampler(&self, basis: Basis) -> OutcomeSampler;

    fn apply_all(&mut self, gates: &[GateOp]) -> Result<()> {
        gates.iter().try_for_each(|g| self.apply(g))
    }

    /// Run `gates` on |0...0>.
    fn prepare(n_qubits: usize, gates: &[GateOp]) -> Result<Self> {
        let mut s = Self::zero_state(n_qubits)?;
        s.apply_all(gates)?;
        Ok(s)
    }
}

/// Draws measurement outcomes from a fixed state.
#[derive(Debug, Clone)]
pub enum OutcomeSampler {
    /// Explicit outcome table in ascending index order.
    Table { outcomes: Vec<u64>, probs: Vec<f64> },
    /// X-basis outcomes of a sparse state, drawn qubit by qubit from exact
    /// conditional marginals so the 2^N distribution is never materialized.
    XChain {
        n_qubits: usize,
        entries: Vec<(u64, C64)>,
    },
}

impl OutcomeSampler {
    pub fn from_probabilities(pairs: impl IntoIterator<Item = (u64, f64)>) -> Self {
        let (outcomes, probs): (Vec<u64>, Vec<f64>) =
            pairs.into_iter().filter(|&(_, p)| p > 0.0).unzip();
        OutcomeSampler::Table { outcomes, probs }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        match self {
            OutcomeSampler::Table { outcomes, probs } => {
                let total: f64 = probs.iter().sum();
                let mut u = rng.random::<f64>() * total;
                for (o, p) in outcomes.iter().zip(probs) {
                    if u < *p {
                        return *o;
                    }
                    u -= p;
                }
                *outcomes.last().expect("empty outcome table")
            }
            OutcomeSampler::XChain { n_qubits, entries } => {
                let mut y = 0u64;
                for j in 0..*n_qubits {
                    let w0 = x_chain_weight(entries, j, y);
                    let w1 = x_chain_weight(entries, j, y | 1 << j);
                    let p1 = w1 / (w0 + w1);
                    if rng.random::<f64>() < p1 {
                        y |= 1 << j;
                    }
                }
                y
            }
        }
    }

    /// Outcome histogram of `shots` independent draws.
    pub fn counts<R: Rng + ?Sized>(&self, shots: u64, rng: &mut R) -> BTreeMap<u64, u64> {
        let mut counts = BTreeMap::new();
        match self {
            OutcomeSampler::Table { outcomes, probs } => {
                // multinomial as a chain of conditional binomials
                let mut remaining = shots;
                let mut mass: f64 = probs.iter().sum();
                for (k, (o, p)) in outcomes.iter().zip(probs).enumerate() {
                    if remaining == 0 {
                        break;
                    }
                    let c = if k + 1 == outcomes.len() || *p >= mass {
                        remaining
                    } else {
                        let q = (p / mass).clamp(0.0, 1.0);
                        Binomial::new(remaining, q)
                            .expect("valid binomial parameters")
                            .sample(rng)
                    };
                    if c > 0 {
                        counts.insert(*o, c);
                    }
                    remaining -= c;
                    mass -= p;
                }
            }
            OutcomeSampler::XChain { .. } => {
                for _ in 0..shots {
                    *counts.entry(self.draw(rng)).or_insert(0) += 1;
                }
            }
        }
        counts
    }
}

/// Unnormalized marginal weight of X-basis outcome bits `y` on qubits 0..=j.
pub(crate) fn x_chain_weight(entries: &[(u64, C64)], j: usize, y: u64) -> f64 {
    let low = if j + 1 >= 64 {
        u64::MAX
    } else {
        (1u64 << (j + 1)) - 1
    };
    let y = y & low;
    let mut total = 0.0;
    let mut group = None;
    let mut acc = C64::new(0.0, 0.0);
    for &(i, a) in entries {
        let key = i & !low;
        if group != Some(key) {
            total += acc.norm_sqr();
            acc = C64::new(0.0, 0.0);
            group = Some(key);
        }
        if (i & y).count_ones() & 1 == 1 {
            acc -= a;
        } else {
            acc += a;
        }
    }
    total + acc.norm_sqr()
}

#[inline]
fn parity(x: u64) -> bool {
    x.count_ones() & 1 == 1
}

/// Dense 2^N amplitude vector.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<C64>,
}

impl StateVector {
    /// |0...0>, refusing registers above [`MAX_DENSE_QUBITS`].
    pub fn new(n_qubits: usize) -> Result<Self> {
        Self::with_limit(n_qubits, MAX_DENSE_QUBITS)
    }

    /// |0...0> with an explicit qubit ceiling.
    pub fn with_limit(n_qubits: usize, limit: usize) -> Result<Self> {
        if n_qubits > limit || n_qubits >= 48 {
            return Err(QcaError::TooLarge { n_qubits, limit });
        }
        let mut amplitudes = vec![C64::new(0.0, 0.0); 1 << n_qubits];
        amplitudes[0] = C64::new(1.0, 0.0);
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    /// Wrap explicit amplitudes; the length must be a power of two.
    pub fn from_amplitudes(amplitudes: Vec<C64>) -> Result<Self> {
        let len = amplitudes.len();
        if !len.is_power_of_two() {
            return Err(QcaError::InvalidArgument(format!(
                "amplitude count {len} is not a power of two"
            )));
        }
        Ok(Self {
            n_qubits: len.trailing_zeros() as usize,
            amplitudes,
        })
    }

    /// Computational basis state |index>.
    pub fn basis_state(n_qubits: usize, index: usize) -> Result<Self> {
        let mut s = Self::new(n_qubits)?;
        if index >= s.amplitudes.len() {
            return Err(QcaError::InvalidArgument(format!(
                "basis index {index} out of range"
            )));
        }
        s.amplitudes[0] = C64::new(0.0, 0.0);
        s.amplitudes[index] = C64::new(1.0, 0.0);
        Ok(s)
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
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

    /// Apply a 2x2 matrix [[m00, m01], [m10, m11]] to qubit `q`.
    fn apply_single(&mut self, q: usize, m: [[C64; 2]; 2]) {
        let bit = 1usize << q;
        for i in 0..self.amplitudes.len() {
            if i & bit == 0 {
                let a0 = self.amplitudes[i];
                let a1 = self.amplitudes[i | bit];
                self.amplitudes[i] = m[0][0] * a0 + m[0][1] * a1;
                self.amplitudes[i | bit] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
    }
}

impl QuantumState for StateVector {
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
                let (cb, tb) = (1usize << control, 1usize << target);
                for i in 0..self.amplitudes.len() {
                    if i & cb != 0 && i & tb == 0 {
                        self.amplitudes.swap(i, i | tb);
                    }
                }
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
        let zero = C64::new(0.0, 0.0);
        let one = C64::new(1.0, 0.0);
        let i = C64::new(0.0, 1.0);
        let m = match pauli {
            Pauli::X => [[zero, one], [one, zero]],
            Pauli::Y => [[zero, -i], [i, zero]],
            Pauli::Z => [[one, zero], [zero, -one]],
        };
        self.apply_single(qubit, m);
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
            for (i, a) in self.amplitudes.iter().enumerate() {
                let partner = self.amplitudes[i ^ x as usize];
                let v = (partner.conj() * a).re;
                acc += if parity(i as u64 & z) { -v } else { v };
            }
            total += term.coefficient * acc;
        }
        Ok(total)
    }

    fn z_expectations(&self) -> Vec<f64> {
        let mut z = vec![0.0; self.n_qubits];
        for (i, a) in self.amplitudes.iter().enumerate() {
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
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    fn outcome_sampler(&self, basis: Basis) -> OutcomeSampler {
        let probs = match basis {
            Basis::Computational => self.probabilities(),
            Basis::AllX => {
                let mut rotated = self.clone();
                for q in 0..self.n_qubits {
                    let h = C64::new(FRAC_1_SQRT_2, 0.0);
                    rotated.apply_single(q, [[h, h], [h, -h]]);
                }
                rotated.probabilities()
            }
        };
        OutcomeSampler::from_probabilities(
            probs.into_iter().enumerate().map(|(i, p)| (i as u64, p)),
        )
    }
}
