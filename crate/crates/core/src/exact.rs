//! Exact ground states: full diagonalization for small registers and a
//! matrix-free Lanczos iteration beyond that.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{QcaError, Result};
use crate::hamiltonian::PauliSum;
use crate::statevector::{QuantumState, StateVector, MAX_DENSE_QUBITS};

pub const MAX_DIAGONALIZE_QUBITS: usize = 12;

#[derive(Debug, Clone)]
pub struct GroundStateResult {
    /// Ground energy, meV.
    pub energy: f64,
    pub state: StateVector,
    /// P_k = -<Z_k> for every device cell.
    pub polarizations: Vec<f64>,
    pub degenerate: bool,
    pub converged: bool,
    pub iterations: usize,
}

/// Serializable summary without the state vector.
#[derive(Debug, Clone, Serialize)]
pub struct GroundStateSummary {
    pub energy: f64,
    pub polarizations: Vec<f64>,
    pub degenerate: bool,
    pub converged: bool,
    pub iterations: usize,
}

impl GroundStateResult {
    fn from_real(h: &PauliSum, energy: f64, second: Option<f64>, vector: &[f64]) -> Result<Self> {
        let state =
            StateVector::from_amplitudes(vector.iter().map(|&v| C64::new(v, 0.0)).collect())?;
        let polarizations = state.z_expectations().into_iter().map(|z| -z).collect();
        let threshold = 1e-9 * h.max_abs_coefficient().max(f64::MIN_POSITIVE);
        Ok(Self {
            energy,
            state,
            polarizations,
            degenerate: second.is_some_and(|e1| e1 - energy < threshold),
            converged: true,
            iterations: 0,
        })
    }

    pub fn summary(&self) -> GroundStateSummary {
        GroundStateSummary {
            energy: self.energy,
            polarizations: self.polarizations.clone(),
            degenerate: self.degenerate,
            converged: self.converged,
            iterations: self.iterations,
        }
    }
}

/// Dense real matrix of `h` in the computational basis.
pub fn hamiltonian_matrix(h: &PauliSum) -> DMatrix<f64> {
    let dim = 1usize << h.n_qubits;
    let mut m = DMatrix::zeros(dim, dim);
    for term in &h.terms {
        let (x, z) = term.masks();
        for i in 0..dim {
            let sign = if (i as u64 & z).count_ones() & 1 == 1 {
                -1.0
            } else {
                1.0
            };
            m[((i as u64 ^ x) as usize, i)] += sign * term.coefficient;
        }
    }
    m
}

/// Lowest eigenpair by full diagonalization.
pub fn ground_state_dense(h: &PauliSum) -> Result<GroundStateResult> {
    if h.n_qubits > MAX_DIAGONALIZE_QUBITS {
        return Err(QcaError::TooLarge {
            n_qubits: h.n_qubits,
            limit: MAX_DIAGONALIZE_QUBITS,
        });
    }
    let eig = SymmetricEigen::new(hamiltonian_matrix(h));
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let lowest = order[0];
    let second = order.get(1).map(|&i| eig.eigenvalues[i]);
    let vector: Vec<f64> = eig.eigenvectors.column(lowest).iter().copied().collect();
    GroundStateResult::from_real(h, eig.eigenvalues[lowest], second, &vector)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanczosOptions {
    /// Convergence threshold on successive lowest Ritz values, meV.
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iter: 300,
            seed: 0,
        }
    }
}

/// Lowest eigenpair by Lanczos iteration with full reorthogonalization.
///
/// Converged once the lowest Ritz value moves by less than `tol` and its
/// residual norm is below `1e-9 * sum |c_i|`. An unconverged run still
/// returns its best estimate with `converged = false`.
pub fn ground_state_lanczos(h: &PauliSum, opts: LanczosOptions) -> Result<GroundStateResult> {
    if h.n_qubits > MAX_DENSE_QUBITS {
        return Err(QcaError::TooLarge {
            n_qubits: h.n_qubits,
            limit: MAX_DENSE_QUBITS,
        });
    }
    let dim = 1usize << h.n_qubits;
    let norm_bound: f64 = h.terms.iter().map(|t| t.coefficient.abs()).sum();
    let residual_tol = 1e-9 * norm_bound.max(1.0);

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut v: Vec<f64> = (0..dim)
        .map(|_| 1.0 + 1e-3 * (2.0 * rng.random::<f64>() - 1.0))
        .collect();
    normalize(&mut v);

    let max_iter = opts.max_iter.clamp(1, dim);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(max_iter);
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut w = vec![0.0; dim];
    let mut previous = f64::INFINITY;
    let mut best: Option<(f64, Option<f64>, Vec<f64>)> = None;
    let mut converged = false;
    let mut iterations = 0;

    for j in 0..max_iter {
        iterations = j + 1;
        h.apply_real(&v, &mut w);
        let alpha = dot(&v, &w);
        for (wi, vi) in w.iter_mut().zip(&v) {
            *wi -= alpha * vi;
        }
        if let (Some(prev), Some(&beta)) = (basis.last(), betas.last()) {
            for (wi, pi) in w.iter_mut().zip(prev) {
                *wi -= beta * pi;
            }
        }
        basis.push(std::mem::take(&mut v));
        alphas.push(alpha);
        // two passes of Gram-Schmidt keep the Krylov basis orthogonal
        for _ in 0..2 {
            for b in &basis {
                let c = dot(b, &w);
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= c * bi;
                }
            }
        }
        let beta = dot(&w, &w).sqrt();

        let (ritz, second, coeffs) = lowest_ritz(&alphas, &betas);
        let residual = beta * coeffs.last().copied().unwrap_or(0.0).abs();
        best = Some((ritz, second, coeffs));

        let breakdown = beta <= 1e-12 * norm_bound.max(1.0);
        if breakdown || ((ritz - previous).abs() < opts.tol && residual < residual_tol) {
            converged = true;
            break;
        }
        previous = ritz;
        betas.push(beta);
        v = w.iter().map(|x| x / beta).collect();
    }

    let (energy, second, coeffs) = best.expect("at least one Lanczos step");
    let mut vector = vec![0.0; dim];
    for (c, b) in coeffs.iter().zip(&basis) {
        for (x, bi) in vector.iter_mut().zip(b) {
            *x += c * bi;
        }
    }
    normalize(&mut vector);
    let mut result = GroundStateResult::from_real(h, energy, second, &vector)?;
    result.converged = converged;
    result.iterations = iterations;
    Ok(result)
}

/// Pick the dense solver when it is cheap, Lanczos otherwise.
pub fn ground_state(h: &PauliSum) -> Result<GroundStateResult> {
    if h.n_qubits <= 10 {
        ground_state_dense(h)
    } else {
        ground_state_lanczos(h, LanczosOptions::default())
    }
}

fn lowest_ritz(alphas: &[f64], betas: &[f64]) -> (f64, Option<f64>, Vec<f64>) {
    let m = alphas.len();
    let mut t = DMatrix::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alphas[i];
        if i + 1 < m {
            t[(i, i + 1)] = betas[i];
            t[(i + 1, i)] = betas[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let coeffs = eig.eigenvectors.column(order[0]).iter().copied().collect();
    (
        eig.eigenvalues[order[0]],
        order.get(1).map(|&i| eig.eigenvalues[i]),
        coeffs,
    )
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) {
    let n = dot(v, v).sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
}
