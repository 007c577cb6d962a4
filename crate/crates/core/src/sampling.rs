//! Shot sampling with optional stochastic Pauli noise.
//!
//! Gate noise is simulated by trajectories: after every gate each touched
//! qubit independently suffers a uniformly random X, Y or Z with the gate's
//! error probability. Measurement-side errors (noise on the final basis
//! change and readout bit flips) act directly on sampled bits.

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{QcaError, Result};
use crate::statevector::{Basis, GateOp, OutcomeSampler, Pauli, QuantumState};

/// Trajectory states kept per sampling call.
const TRAJECTORY_CACHE_LIMIT: usize = 4096;

/// SplitMix64 finalizer, used to derive independent stream seeds.
pub fn mix_seed(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of sub-stream `stream` under `base`.
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    mix_seed(base ^ mix_seed(stream))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Error probability after each single-qubit gate.
    pub p1: f64,
    /// Error probability per qubit after each two-qubit gate.
    pub p2: f64,
    /// Bit-flip probability per measured bit.
    pub p_readout: f64,
    pub seed: u64,
}

impl Default for NoiseModel {
    /// Loosely modelled on a mid-2020s superconducting device.
    fn default() -> Self {
        Self {
            p1: 0.001,
            p2: 0.01,
            p_readout: 0.02,
            seed: 0,
        }
    }
}

impl NoiseModel {
    pub fn noiseless() -> Self {
        Self {
            p1: 0.0,
            p2: 0.0,
            p_readout: 0.0,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("p1", self.p1),
            ("p2", self.p2),
            ("p_readout", self.p_readout),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(QcaError::Domain(format!(
                    "{name} = {p} is not a probability"
                )));
            }
        }
        Ok(())
    }

    pub fn has_gate_noise(&self) -> bool {
        self.p1 > 0.0 || self.p2 > 0.0
    }

    pub fn is_trivial(&self) -> bool {
        !self.has_gate_noise() && self.p_readout == 0.0
    }
}

/// Histogram of measured bitstrings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotCounts {
    pub n_qubits: usize,
    pub shots: u64,
    pub counts: BTreeMap<u64, u64>,
}

impl ShotCounts {
    pub fn get(&self, outcome: u64) -> u64 {
        self.counts.get(&outcome).copied().unwrap_or(0)
    }

    /// Render an outcome with qubit 0 as the rightmost character.
    pub fn bitstring(&self, outcome: u64) -> String {
        (0..self.n_qubits)
            .rev()
            .map(|q| if outcome >> q & 1 == 1 { '1' } else { '0' })
            .collect()
    }

    pub fn to_bitstring_map(&self) -> BTreeMap<String, u64> {
        self.counts
            .iter()
            .map(|(&o, &c)| (self.bitstring(o), c))
            .collect()
    }

    /// Estimate of <Z...Z> over the qubits in `mask`.
    pub fn parity_expectation(&self, mask: u64) -> f64 {
        let signed: i64 = self
            .counts
            .iter()
            .map(|(&o, &c)| {
                if (o & mask).count_ones() & 1 == 1 {
                    -(c as i64)
                } else {
                    c as i64
                }
            })
            .sum();
        signed as f64 / self.shots as f64
    }

    /// Per-qubit polarization estimates, bit 1 counting as P = +1.
    pub fn polarizations(&self) -> Vec<f64> {
        (0..self.n_qubits)
            .map(|q| -self.parity_expectation(1 << q))
            .collect()
    }
}

/// Measure an already-prepared state `shots` times.
///
/// With a noise model, the basis-change gates of an X-basis measurement
/// carry single-qubit error `p1` and every bit is then flipped with
/// probability `p_readout`.
pub fn sample<S: QuantumState>(
    state: &S,
    shots: u64,
    basis: Basis,
    seed: u64,
    noise: Option<&NoiseModel>,
) -> Result<ShotCounts> {
    if shots == 0 {
        return Err(QcaError::InvalidArgument("shots must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let counts = state.outcome_sampler(basis).counts(shots, &mut rng);
    let counts = ShotCounts {
        n_qubits: state.n_qubits(),
        shots,
        counts,
    };
    match noise {
        Some(n) if !n.is_trivial() => {
            n.validate()?;
            Ok(measurement_errors(counts, basis, n, seed))
        }
        _ => Ok(counts),
    }
}

/// Run `gates` from |0...0> and measure, one noise trajectory per shot.
pub fn sample_circuit<S: QuantumState>(
    n_qubits: usize,
    gates: &[GateOp],
    shots: u64,
    basis: Basis,
    seed: u64,
    noise: Option<&NoiseModel>,
) -> Result<ShotCounts> {
    if shots == 0 {
        return Err(QcaError::InvalidArgument("shots must be at least 1".into()));
    }
    for g in gates {
        g.validate(n_qubits)?;
    }
    let clean = S::prepare(n_qubits, gates)?;
    let noise = match noise {
        Some(n) if n.has_gate_noise() => n,
        other => return sample(&clean, shots, basis, seed, other),
    };
    noise.validate()?;

    let mut outcome_rng = ChaCha8Rng::seed_from_u64(seed);
    let mut noise_rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, noise.seed ^ 0x7472_616a));
    let mut cache: HashMap<Vec<(u32, u8, Pauli)>, OutcomeSampler> = HashMap::new();
    let mut counts = BTreeMap::new();
    let mut clean_shots = 0u64;
    let mut events = Vec::new();
    for _ in 0..shots {
        events.clear();
        draw_gate_errors(gates, noise, &mut noise_rng, &mut events);
        if events.is_empty() {
            clean_shots += 1;
            continue;
        }
        let outcome = match cache.get(&events) {
            Some(sampler) => sampler.draw(&mut outcome_rng),
            None => {
                let sampler = run_trajectory::<S>(n_qubits, gates, &events)?.outcome_sampler(basis);
                let o = sampler.draw(&mut outcome_rng);
                if cache.len() < TRAJECTORY_CACHE_LIMIT {
                    cache.insert(events.clone(), sampler);
                }
                o
            }
        };
        *counts.entry(outcome).or_insert(0) += 1;
    }
    if clean_shots > 0 {
        for (o, c) in clean
            .outcome_sampler(basis)
            .counts(clean_shots, &mut outcome_rng)
        {
            *counts.entry(o).or_insert(0) += c;
        }
    }
    let counts = ShotCounts {
        n_qubits,
        shots,
        counts,
    };
    Ok(measurement_errors(counts, basis, noise, seed))
}

fn draw_gate_errors(
    gates: &[GateOp],
    noise: &NoiseModel,
    rng: &mut ChaCha8Rng,
    events: &mut Vec<(u32, u8, Pauli)>,
) {
    for (g, gate) in gates.iter().enumerate() {
        let p = match gate {
            GateOp::CNot { .. } => noise.p2,
            _ => noise.p1,
        };
        if p == 0.0 {
            continue;
        }
        for q in gate.qubits() {
            if rng.random::<f64>() < p {
                let pauli = Pauli::ALL[rng.random_range(0..3)];
                events.push((g as u32, q as u8, pauli));
            }
        }
    }
}

fn run_trajectory<S: QuantumState>(
    n_qubits: usize,
    gates: &[GateOp],
    events: &[(u32, u8, Pauli)],
) -> Result<S> {
    let mut state = S::zero_state(n_qubits)?;
    let mut pending = events.iter().peekable();
    for (g, gate) in gates.iter().enumerate() {
        state.apply(gate)?;
        while let Some(&&(eg, q, pauli)) = pending.peek() {
            if eg as usize != g {
                break;
            }
            state.apply_pauli(q as usize, pauli)?;
            pending.next();
        }
    }
    Ok(state)
}

/// Bit flips from noisy basis-change gates and readout.
fn measurement_errors(
    counts: ShotCounts,
    basis: Basis,
    noise: &NoiseModel,
    seed: u64,
) -> ShotCounts {
    // X or Y after the final Hadamard flips the bit, Z does not.
    let p_basis = match basis {
        Basis::AllX => noise.p1 * 2.0 / 3.0,
        Basis::Computational => 0.0,
    };
    if p_basis == 0.0 && noise.p_readout == 0.0 {
        return counts;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, noise.seed ^ 0x7265_6164));
    let mut out = BTreeMap::new();
    for (&o, &c) in &counts.counts {
        for _ in 0..c {
            let mut flipped = o;
            for q in 0..counts.n_qubits {
                if p_basis > 0.0 && rng.random::<f64>() < p_basis {
                    flipped ^= 1 << q;
                }
                if noise.p_readout > 0.0 && rng.random::<f64>() < noise.p_readout {
                    flipped ^= 1 << q;
                }
            }
            *out.entry(flipped).or_insert(0) += 1;
        }
    }
    ShotCounts {
        counts: out,
        ..counts
    }
}
