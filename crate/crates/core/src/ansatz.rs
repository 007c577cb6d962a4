//! Parametric trial circuits: Y rotations on selected qubits plus a CNOT
//! ladder that copies each cell's state onto its successor.

use serde::{Deserialize, Serialize};

use crate::error::{QcaError, Result};
use crate::statevector::GateOp;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AnsatzGate {
    /// Y rotation on `qubit` by parameter `param`.
    RotSlot {
        qubit: usize,
        param: usize,
    },
    CNot {
        control: usize,
        target: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnsatzSpec {
    pub name: String,
    pub n_qubits: usize,
    pub gates: Vec<AnsatzGate>,
    pub n_params: usize,
}

impl AnsatzSpec {
    pub fn new(name: impl Into<String>, n_qubits: usize, gates: Vec<AnsatzGate>) -> Result<Self> {
        let n_params = gates
            .iter()
            .filter_map(|g| match g {
                AnsatzGate::RotSlot { param, .. } => Some(param + 1),
                _ => None,
            })
            .max()
            .unwrap_or(0);
        let spec = Self {
            name: name.into(),
            n_qubits,
            gates,
            n_params,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let mut used = vec![false; self.n_params];
        for g in &self.gates {
            match *g {
                AnsatzGate::RotSlot { qubit, param } => {
                    if qubit >= self.n_qubits {
                        return Err(QcaError::IndexOutOfRange {
                            index: qubit,
                            n_qubits: self.n_qubits,
                        });
                    }
                    if param >= self.n_params {
                        return Err(QcaError::InvalidArgument(format!(
                            "parameter index {param} exceeds {}",
                            self.n_params
                        )));
                    }
                    used[param] = true;
                }
                AnsatzGate::CNot { control, target } => {
                    if target >= self.n_qubits {
                        return Err(QcaError::IndexOutOfRange {
                            index: target,
                            n_qubits: self.n_qubits,
                        });
                    }
                    if target != control + 1 {
                        return Err(QcaError::InvalidArgument(format!(
                            "CNot({control},{target}) is not a nearest-chain link"
                        )));
                    }
                }
            }
        }
        if let Some(p) = used.iter().position(|u| !u) {
            return Err(QcaError::InvalidArgument(format!(
                "parameter {p} is never used"
            )));
        }
        Ok(())
    }

    pub fn cnot_count(&self) -> usize {
        self.gates
            .iter()
            .filter(|g| matches!(g, AnsatzGate::CNot { .. }))
            .count()
    }

    pub fn rotation_count(&self) -> usize {
        self.gates.len() - self.cnot_count()
    }

    /// Substitute parameter values into the rotation slots.
    pub fn bind(&self, theta: &[f64]) -> Result<Vec<GateOp>> {
        bind(self, theta)
    }
}

/// Chain ansatz for an `n`-cell wire.
///
/// Qubit 0 is rotated first; every further qubit listed in `ry_qubits` is
/// rotated right after the CNOT that entangles it with its predecessor.
pub fn wire_ansatz(n: usize, ry_qubits: &[usize]) -> Result<AnsatzSpec> {
    if n == 0 {
        return Err(QcaError::InvalidArgument(
            "ansatz needs at least one qubit".into(),
        ));
    }
    if ry_qubits.first() != Some(&0) {
        return Err(QcaError::InvalidArgument(
            "rotation qubits must start with qubit 0".into(),
        ));
    }
    if ry_qubits.windows(2).any(|w| w[0] >= w[1]) {
        return Err(QcaError::InvalidArgument(
            "rotation qubits must be strictly increasing".into(),
        ));
    }
    if let Some(&q) = ry_qubits.iter().find(|&&q| q >= n) {
        return Err(QcaError::IndexOutOfRange {
            index: q,
            n_qubits: n,
        });
    }
    let mut gates = vec![AnsatzGate::RotSlot { qubit: 0, param: 0 }];
    let mut next_param = 1;
    for k in 0..n - 1 {
        gates.push(AnsatzGate::CNot {
            control: k,
            target: k + 1,
        });
        if ry_qubits.contains(&(k + 1)) {
            gates.push(AnsatzGate::RotSlot {
                qubit: k + 1,
                param: next_param,
            });
            next_param += 1;
        }
    }
    AnsatzSpec::new(format!("wire{n}{ry_qubits:?}"), n, gates)
}

/// Evenly spaced rotation qubits, always starting at 0.
pub fn spread_rotations(n: usize, k: usize) -> Vec<usize> {
    let k = k.clamp(1, n.max(1));
    let mut qs: Vec<usize> = (0..k).map(|j| j * n / k).collect();
    qs.dedup();
    qs
}

pub fn inverter_ansatz() -> AnsatzSpec {
    let mut spec = wire_ansatz(6, &[0, 5]).expect("static inverter ansatz");
    spec.name = "inverter".into();
    spec
}

/// Rotations on every qubit followed by the CNOT ladder.
pub fn full_ansatz(n: usize) -> Result<AnsatzSpec> {
    if n == 0 {
        return Err(QcaError::InvalidArgument(
            "ansatz needs at least one qubit".into(),
        ));
    }
    let mut gates: Vec<_> = (0..n)
        .map(|k| AnsatzGate::RotSlot { qubit: k, param: k })
        .collect();
    gates.extend((0..n - 1).map(|k| AnsatzGate::CNot {
        control: k,
        target: k + 1,
    }));
    AnsatzSpec::new(format!("full{n}"), n, gates)
}

pub fn majority6_ansatz() -> AnsatzSpec {
    let mut spec = full_ansatz(6).expect("static majority ansatz");
    spec.name = "majority6".into();
    spec
}

pub fn majority2_ansatz() -> AnsatzSpec {
    let mut spec = wire_ansatz(2, &[0, 1]).expect("static majority ansatz");
    spec.name = "majority2".into();
    spec
}

pub fn bind(spec: &AnsatzSpec, theta: &[f64]) -> Result<Vec<GateOp>> {
    if theta.len() != spec.n_params {
        return Err(QcaError::DimensionMismatch {
            expected: spec.n_params,
            found: theta.len(),
        });
    }
    Ok(spec
        .gates
        .iter()
        .map(|g| match *g {
            AnsatzGate::RotSlot { qubit, param } => GateOp::RotY {
                qubit,
                angle: theta[param],
            },
            AnsatzGate::CNot { control, target } => GateOp::CNot { control, target },
        })
        .collect())
}
