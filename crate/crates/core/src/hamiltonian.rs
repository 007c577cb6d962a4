//! Circuit Hamiltonians as sums of weighted Pauli strings.
//!
//! Convention: |0> is P = -1 and |1> is P = +1, so P = -<Z>. A driver with
//! polarization P_d acts on its neighbors like a frozen cell with Z-value
//! `-P_d`.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::config::ModelConfig;
use crate::error::{QcaError, Result};
use crate::layout::{classify_pair, CircuitLayout, NeighborClass};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Axis {
    X,
    Z,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliTerm {
    /// Coefficient in meV.
    #[serde(rename = "coeff_meV")]
    pub coefficient: f64,
    /// (qubit, axis) pairs sorted by qubit, at most one per qubit.
    #[serde(rename = "paulis")]
    pub factors: Vec<(usize, Axis)>,
}

impl PauliTerm {
    pub fn new(coefficient: f64, mut factors: Vec<(usize, Axis)>) -> Result<Self> {
        factors.sort();
        if factors.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(QcaError::InvalidArgument(
                "Pauli term acts twice on the same qubit".into(),
            ));
        }
        Ok(Self {
            coefficient,
            factors,
        })
    }

    pub fn weight(&self) -> usize {
        self.factors.len()
    }

    /// Bit masks of the qubits carrying X and Z factors.
    pub fn masks(&self) -> (u64, u64) {
        let mut x = 0u64;
        let mut z = 0u64;
        for &(q, axis) in &self.factors {
            match axis {
                Axis::X => x |= 1 << q,
                Axis::Z => z |= 1 << q,
            }
        }
        (x, z)
    }

    pub fn is_pure(&self, axis: Axis) -> bool {
        self.factors.iter().all(|&(_, a)| a == axis)
    }
}

impl fmt::Display for PauliTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:+}", self.coefficient)?;
        for (q, a) in &self.factors {
            write!(f, " {a:?}{q}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliSum {
    pub n_qubits: usize,
    pub terms: Vec<PauliTerm>,
}

impl PauliSum {
    pub fn empty(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            terms: Vec::new(),
        }
    }

    /// Collect terms, merging repeated Pauli strings and dropping exact zeros.
    pub fn from_terms(n_qubits: usize, terms: Vec<PauliTerm>) -> Result<Self> {
        let mut order: Vec<Vec<(usize, Axis)>> = Vec::new();
        let mut coeffs: HashMap<Vec<(usize, Axis)>, f64> = HashMap::new();
        for term in terms {
            let term = PauliTerm::new(term.coefficient, term.factors)?;
            if let Some(&(q, _)) = term.factors.iter().find(|(q, _)| *q >= n_qubits) {
                return Err(QcaError::IndexOutOfRange { index: q, n_qubits });
            }
            match coeffs.get_mut(&term.factors) {
                Some(c) => *c += term.coefficient,
                None => {
                    order.push(term.factors.clone());
                    coeffs.insert(term.factors, term.coefficient);
                }
            }
        }
        let terms = order
            .into_iter()
            .filter_map(|factors| {
                let c = coeffs[&factors];
                (c != 0.0).then_some(PauliTerm {
                    coefficient: c,
                    factors,
                })
            })
            .collect();
        Ok(Self { n_qubits, terms })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of the given Pauli string (0 if absent).
    pub fn coefficient(&self, factors: &[(usize, Axis)]) -> f64 {
        let mut key = factors.to_vec();
        key.sort();
        self.terms
            .iter()
            .find(|t| t.factors == key)
            .map_or(0.0, |t| t.coefficient)
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coefficient.abs())
            .fold(0.0, f64::max)
    }

    /// `out = H v` for a real vector in the computational basis.
    ///
    /// Only valid for Hamiltonians without Y factors, which holds for every
    /// `PauliSum` since axes are restricted to X and Z.
    pub fn apply_real(&self, v: &[f64], out: &mut [f64]) {
        debug_assert_eq!(v.len(), 1 << self.n_qubits);
        out.iter_mut().for_each(|o| *o = 0.0);
        for term in &self.terms {
            let (x, z) = term.masks();
            let c = term.coefficient;
            for (i, &vi) in v.iter().enumerate() {
                let sign = if (i as u64 & z).count_ones() & 1 == 1 {
                    -c
                } else {
                    c
                };
                out[(i as u64 ^ x) as usize] += sign * vi;
            }
        }
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.terms)?)
    }

    pub fn from_json_str(n_qubits: usize, s: &str) -> Result<Self> {
        let terms: Vec<PauliTerm> = serde_json::from_str(s)?;
        Self::from_terms(n_qubits, terms)
    }
}

/// Assemble the circuit Hamiltonian of a layout.
///
/// Each device cell gets a `-γ X` tunneling term, coupled device pairs get a
/// ZZ term with the nearest or diagonal kink energy, and drivers fold into
/// single-qubit Z biases.
pub fn build_hamiltonian(layout: &CircuitLayout, config: &ModelConfig) -> Result<PauliSum> {
    layout.validate()?;
    config.constants.validate()?;
    let devices: Vec<_> = layout.devices().collect();
    let n = devices.len();
    if n == 0 {
        return Err(QcaError::Layout(format!(
            "layout `{}` has no device cells",
            layout.name
        )));
    }
    let coupling = |class: NeighborClass| match class {
        NeighborClass::Nearest => Some(config.e_k),
        NeighborClass::Diagonal => Some(config.e_k_diag),
        NeighborClass::None => None,
    };

    let mut terms = Vec::new();
    for q in 0..n {
        terms.push(PauliTerm::new(-config.constants.gamma, vec![(q, Axis::X)])?);
    }

    // Accumulate biases per qubit so driver order cannot change the result.
    let mut bias = vec![0.0; n];
    let mut bias_seen = vec![false; n];
    for driver in layout.drivers() {
        let z_d = -driver.driver_polarization.unwrap_or(0.0);
        for (q, dev) in devices.iter().enumerate() {
            let class = classify_pair(driver.position, dev.position)?;
            if class == NeighborClass::Diagonal && !config.include_driver_diagonals {
                continue;
            }
            if let Some(e) = coupling(class) {
                bias[q] += config.driver_bias_scale * e * z_d;
                bias_seen[q] = true;
            }
        }
    }
    for q in 0..n {
        if bias_seen[q] && bias[q] != 0.0 {
            terms.push(PauliTerm::new(bias[q], vec![(q, Axis::Z)])?);
        }
    }

    for m in 0..n {
        for k in m + 1..n {
            if let Some(e) = coupling(classify_pair(devices[m].position, devices[k].position)?) {
                terms.push(PauliTerm::new(e, vec![(m, Axis::Z), (k, Axis::Z)])?);
            }
        }
    }
    PauliSum::from_terms(n, terms)
}

/// Terms measurable together in one basis.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisGroups {
    /// Z and ZZ terms, read out in the computational basis.
    pub z_group: PauliSum,
    /// Single- or multi-qubit X terms, read out after rotating every qubit.
    pub x_group: PauliSum,
}

pub fn group_by_basis(h: &PauliSum) -> Result<BasisGroups> {
    let mut z = Vec::new();
    let mut x = Vec::new();
    for term in &h.terms {
        if term.is_pure(Axis::Z) {
            z.push(term.clone());
        } else if term.is_pure(Axis::X) {
            x.push(term.clone());
        } else {
            return Err(QcaError::UnsupportedHamiltonian(format!(
                "mixed-axis term {term}"
            )));
        }
    }
    Ok(BasisGroups {
        z_group: PauliSum {
            n_qubits: h.n_qubits,
            terms: z,
        },
        x_group: PauliSum {
            n_qubits: h.n_qubits,
            terms: x,
        },
    })
}
