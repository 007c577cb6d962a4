//! The variational loop: estimate <H> for a bound ansatz, minimize it over
//! the parameters, then read per-cell polarizations from the optimized
//! circuit.

use std::f64::consts::{FRAC_PI_2, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ansatz::AnsatzSpec;
use crate::config::ModelConfig;
use crate::error::{QcaError, Result};
use crate::hamiltonian::{build_hamiltonian, group_by_basis, PauliSum};
use crate::layout::CircuitLayout;
use crate::optimize::{CobylaLike, Minimizer, Minimum, NelderMead};
use crate::sampling::{derive_seed, sample_circuit, NoiseModel};
use crate::sparse::SparseState;
use crate::statevector::{Basis, QuantumState, StateVector};

/// Widest register simulated densely when the backend is chosen automatically.
pub const AUTO_DENSE_QUBITS: usize = 20;

// Seed streams for the different circuits of one evaluation.
const Z_STREAM: u64 = 1;
const X_STREAM: u64 = 2;
const READOUT_STREAM: u64 = 3;
const FINAL_STREAM: u64 = 0xF1A1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EstimatorMode {
    ExactExpectation,
    Sampled,
    NoisySampled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SimBackend {
    /// Dense up to [`AUTO_DENSE_QUBITS`], sparse beyond.
    Auto,
    Dense,
    Sparse,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub mode: EstimatorMode,
    /// Shots per measured basis.
    pub shots: u64,
    pub seed: u64,
    /// Noise for `NoisySampled`; `None` means [`NoiseModel::default`].
    pub noise: Option<NoiseModel>,
    pub backend: SimBackend,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            mode: EstimatorMode::ExactExpectation,
            shots: 4096,
            seed: 0,
            noise: None,
            backend: SimBackend::Auto,
        }
    }
}

impl EstimatorConfig {
    pub fn exact() -> Self {
        Self::default()
    }

    pub fn sampled(shots: u64, seed: u64) -> Self {
        Self {
            mode: EstimatorMode::Sampled,
            shots,
            seed,
            ..Self::default()
        }
    }

    pub fn noisy(shots: u64, seed: u64, noise: NoiseModel) -> Self {
        Self {
            mode: EstimatorMode::NoisySampled,
            shots,
            seed,
            noise: Some(noise),
            ..Self::default()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn effective_noise(&self) -> Option<NoiseModel> {
        match self.mode {
            EstimatorMode::NoisySampled => Some(self.noise.unwrap_or_default()),
            _ => None,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.mode != EstimatorMode::ExactExpectation && self.shots == 0 {
            return Err(QcaError::InvalidArgument(
                "shot budget must be at least 1".into(),
            ));
        }
        if let Some(n) = self.effective_noise() {
            n.validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OptimizerMethod {
    CobylaLike,
    NelderMead,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub method: OptimizerMethod,
    /// Starting parameters; `None` starts every angle at π/2.
    pub initial_theta: Option<Vec<f64>>,
    /// Energy tolerance, meV.
    pub f_tol: f64,
    /// Objective evaluations allowed per start.
    pub max_iter: usize,
    /// Initial and final trust radius (radians) for the linear-model method,
    /// initial simplex edge for Nelder-Mead.
    pub rho_begin: f64,
    pub rho_end: f64,
    /// Independent starts; the best result is kept. Starts after the first
    /// draw every angle uniformly from [0, 2π).
    pub restarts: usize,
    /// Uniform perturbation (±radians) applied to the first start.
    pub initial_jitter: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            method: OptimizerMethod::CobylaLike,
            initial_theta: None,
            f_tol: 1e-3,
            max_iter: 500,
            rho_begin: 0.5,
            rho_end: 1e-4,
            restarts: 1,
            initial_jitter: 0.0,
        }
    }
}

impl OptimizerConfig {
    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.f_tol.is_nan() || self.f_tol <= 0.0 {
            return Err(QcaError::InvalidArgument("f_tol must be positive".into()));
        }
        if self.restarts == 0 {
            return Err(QcaError::InvalidArgument("need at least one start".into()));
        }
        if !(self.rho_begin > 0.0 && self.rho_end > 0.0 && self.rho_end <= self.rho_begin) {
            return Err(QcaError::InvalidArgument(
                "trust radii must satisfy 0 < rho_end <= rho_begin".into(),
            ));
        }
        Ok(())
    }

    fn minimizer(&self) -> Box<dyn Minimizer> {
        match self.method {
            OptimizerMethod::CobylaLike => Box::new(CobylaLike {
                rho_begin: self.rho_begin,
                rho_end: self.rho_end,
                f_tol: self.f_tol,
                max_evals: self.max_iter,
            }),
            OptimizerMethod::NelderMead => Box::new(NelderMead {
                step: self.rho_begin,
                f_tol: self.f_tol,
                x_tol: self.rho_end,
                max_evals: self.max_iter,
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyEstimate {
    /// meV
    pub energy: f64,
    /// Standard error, meV; 0 for exact expectations.
    pub stderr: f64,
    pub shots_used: u64,
}

fn resolve_backend(n_qubits: usize, backend: SimBackend) -> SimBackend {
    match backend {
        SimBackend::Auto if n_qubits <= AUTO_DENSE_QUBITS => SimBackend::Dense,
        SimBackend::Auto => SimBackend::Sparse,
        other => other,
    }
}

/// Estimate <H> for the ansatz bound to `theta`.
///
/// Sampled modes measure Z-type terms in the computational basis and X-type
/// terms after rotating every qubit, `shots` each; the standard error sums
/// the per-term binomial variances.
pub fn estimate_energy(
    spec: &AnsatzSpec,
    theta: &[f64],
    h: &PauliSum,
    cfg: &EstimatorConfig,
) -> Result<EnergyEstimate> {
    match resolve_backend(spec.n_qubits, cfg.backend) {
        SimBackend::Sparse => estimate_with::<SparseState>(spec, theta, h, cfg),
        _ => estimate_with::<StateVector>(spec, theta, h, cfg),
    }
}

fn estimate_with<S: QuantumState>(
    spec: &AnsatzSpec,
    theta: &[f64],
    h: &PauliSum,
    cfg: &EstimatorConfig,
) -> Result<EnergyEstimate> {
    if h.n_qubits != spec.n_qubits {
        return Err(QcaError::DimensionMismatch {
            expected: spec.n_qubits,
            found: h.n_qubits,
        });
    }
    cfg.validate()?;
    let gates = spec.bind(theta)?;
    if cfg.mode == EstimatorMode::ExactExpectation {
        let state = S::prepare(spec.n_qubits, &gates)?;
        return Ok(EnergyEstimate {
            energy: state.expectation(h)?,
            stderr: 0.0,
            shots_used: 0,
        });
    }

    let groups = group_by_basis(h)?;
    let noise = cfg.effective_noise();
    let mut energy = 0.0;
    let mut variance = 0.0;
    let mut shots_used = 0;
    for (group, basis, stream) in [
        (&groups.z_group, Basis::Computational, Z_STREAM),
        (&groups.x_group, Basis::AllX, X_STREAM),
    ] {
        if group.is_empty() {
            continue;
        }
        let counts = sample_circuit::<S>(
            spec.n_qubits,
            &gates,
            cfg.shots,
            basis,
            derive_seed(cfg.seed, stream),
            noise.as_ref(),
        )?;
        shots_used += cfg.shots;
        for term in &group.terms {
            let (x, z) = term.masks();
            let m = counts.parity_expectation(x | z);
            energy += term.coefficient * m;
            variance += term.coefficient.powi(2) * (1.0 - m * m) / cfg.shots as f64;
        }
    }
    Ok(EnergyEstimate {
        energy,
        stderr: variance.sqrt(),
        shots_used,
    })
}

/// Per-cell polarizations of the optimized circuit, P = +1 for bit 1.
pub fn read_polarizations(
    spec: &AnsatzSpec,
    theta_star: &[f64],
    cfg: &EstimatorConfig,
) -> Result<Vec<f64>> {
    match resolve_backend(spec.n_qubits, cfg.backend) {
        SimBackend::Sparse => polarizations_with::<SparseState>(spec, theta_star, cfg),
        _ => polarizations_with::<StateVector>(spec, theta_star, cfg),
    }
}

fn polarizations_with<S: QuantumState>(
    spec: &AnsatzSpec,
    theta: &[f64],
    cfg: &EstimatorConfig,
) -> Result<Vec<f64>> {
    cfg.validate()?;
    let gates = spec.bind(theta)?;
    if cfg.mode == EstimatorMode::ExactExpectation {
        let state = S::prepare(spec.n_qubits, &gates)?;
        return Ok(state.z_expectations().into_iter().map(|z| -z).collect());
    }
    let counts = sample_circuit::<S>(
        spec.n_qubits,
        &gates,
        cfg.shots,
        Basis::Computational,
        derive_seed(cfg.seed, READOUT_STREAM),
        cfg.effective_noise().as_ref(),
    )?;
    Ok(counts.polarizations())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub restart: usize,
    /// Objective evaluation index within the restart (1-based).
    pub iteration: usize,
    /// Best energy so far, meV.
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartSummary {
    pub initial_theta: Vec<f64>,
    pub theta: Vec<f64>,
    pub energy: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Everything needed to rerun a VQE calculation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VqeConfigEcho {
    pub layout: String,
    pub driver_polarizations: Vec<f64>,
    pub model: ModelConfig,
    pub ansatz: AnsatzSpec,
    pub estimator: EstimatorConfig,
    pub optimizer: OptimizerConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VqeResult {
    pub theta_star: Vec<f64>,
    /// Energy at `theta_star`, re-estimated after optimization, meV.
    pub energy: f64,
    pub energy_stderr: f64,
    pub energy_trace: Vec<TracePoint>,
    /// Objective evaluations summed over all starts.
    pub iterations: usize,
    pub polarizations: Vec<f64>,
    /// Some sampled polarization fell outside [-1, 1].
    pub unphysical_polarization: bool,
    pub shots_used: u64,
    pub converged: bool,
    pub restarts: Vec<RestartSummary>,
    pub config: VqeConfigEcho,
}

impl VqeResult {
    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Run VQE for a layout with the given ansatz.
pub fn run_vqe(
    layout: &CircuitLayout,
    model_cfg: &ModelConfig,
    spec: &AnsatzSpec,
    est_cfg: &EstimatorConfig,
    opt_cfg: &OptimizerConfig,
) -> Result<VqeResult> {
    let h = build_hamiltonian(layout, model_cfg)?;
    run_vqe_on(&h, layout, model_cfg, spec, est_cfg, opt_cfg)
}

/// [`run_vqe`] with a prebuilt Hamiltonian.
pub fn run_vqe_on(
    h: &PauliSum,
    layout: &CircuitLayout,
    model_cfg: &ModelConfig,
    spec: &AnsatzSpec,
    est_cfg: &EstimatorConfig,
    opt_cfg: &OptimizerConfig,
) -> Result<VqeResult> {
    if spec.n_qubits != layout.n_devices() || h.n_qubits != spec.n_qubits {
        return Err(QcaError::DimensionMismatch {
            expected: layout.n_devices(),
            found: spec.n_qubits,
        });
    }
    est_cfg.validate()?;
    opt_cfg.validate()?;
    if let Some(t) = &opt_cfg.initial_theta {
        if t.len() != spec.n_params {
            return Err(QcaError::DimensionMismatch {
                expected: spec.n_params,
                found: t.len(),
            });
        }
    }
    if est_cfg.mode != EstimatorMode::ExactExpectation {
        // fail early on Hamiltonians the sampler cannot measure
        group_by_basis(h)?;
    }

    let minimizer = opt_cfg.minimizer();
    let mut evaluation = 0u64;
    let mut shots_used = 0u64;
    let mut trace = Vec::new();
    let mut summaries = Vec::new();
    let mut best: Option<Minimum> = None;

    for restart in 0..opt_cfg.restarts {
        let start = starting_point(spec.n_params, opt_cfg, est_cfg.seed, restart);
        let mut failure: Option<QcaError> = None;
        let mut objective = |theta: &[f64]| -> f64 {
            evaluation += 1;
            let cfg = est_cfg.with_seed(derive_seed(est_cfg.seed, evaluation));
            match estimate_energy(spec, theta, h, &cfg) {
                Ok(e) => {
                    shots_used += e.shots_used;
                    e.energy
                }
                Err(err) => {
                    failure.get_or_insert(err);
                    f64::NAN
                }
            }
        };
        let m = minimizer.minimize(&mut objective, &start);
        if let Some(err) = failure {
            return Err(err);
        }
        trace.extend(m.trace.iter().map(|&(iteration, energy)| TracePoint {
            restart,
            iteration,
            energy,
        }));
        summaries.push(RestartSummary {
            initial_theta: start,
            theta: m.x.clone(),
            energy: m.value,
            evaluations: m.evaluations,
            converged: m.converged,
        });
        if best.as_ref().is_none_or(|b| m.value < b.value) {
            best = Some(m);
        }
    }
    let best = best.expect("at least one start");

    let final_cfg = est_cfg.with_seed(derive_seed(est_cfg.seed, FINAL_STREAM));
    let final_estimate = estimate_energy(spec, &best.x, h, &final_cfg)?;
    shots_used += final_estimate.shots_used;
    let iterations = summaries.iter().map(|s| s.evaluations).sum();
    trace.push(TracePoint {
        restart: summaries.len(),
        iteration: iterations,
        energy: final_estimate.energy,
    });

    let polarizations = read_polarizations(spec, &best.x, &final_cfg)?;
    if est_cfg.mode != EstimatorMode::ExactExpectation {
        shots_used += est_cfg.shots;
    }
    let unphysical_polarization = polarizations.iter().any(|p| p.abs() > 1.0 + 1e-12);

    Ok(VqeResult {
        theta_star: best.x.clone(),
        energy: final_estimate.energy,
        energy_stderr: final_estimate.stderr,
        energy_trace: trace,
        iterations,
        polarizations,
        unphysical_polarization,
        shots_used,
        converged: best.converged,
        restarts: summaries,
        config: VqeConfigEcho {
            layout: layout.name.clone(),
            driver_polarizations: layout.driver_polarizations(),
            model: *model_cfg,
            ansatz: spec.clone(),
            estimator: *est_cfg,
            optimizer: opt_cfg.clone(),
        },
    })
}

fn starting_point(n: usize, cfg: &OptimizerConfig, seed: u64, restart: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0x5EED_0000 + restart as u64));
    if restart == 0 {
        let mut theta = cfg
            .initial_theta
            .clone()
            .unwrap_or_else(|| vec![FRAC_PI_2; n]);
        if cfg.initial_jitter > 0.0 {
            for t in &mut theta {
                *t += cfg.initial_jitter * (2.0 * rng.random::<f64>() - 1.0);
            }
        }
        theta
    } else {
        (0..n).map(|_| TAU * rng.random::<f64>()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::{majority2_ansatz, wire_ansatz};
    use crate::exact::ground_state_dense;
    use crate::hamiltonian::{Axis, PauliTerm};
    use crate::layout::BuiltinLayout;
    use std::f64::consts::PI;

    fn single_cell_h() -> PauliSum {
        PauliSum::from_terms(
            1,
            vec![
                PauliTerm::new(-50.0, vec![(0, Axis::X)]).unwrap(),
                PauliTerm::new(294.3, vec![(0, Axis::Z)]).unwrap(),
            ],
        )
        .unwrap()
    }

    fn driven_wire(n: usize, p: f64) -> CircuitLayout {
        BuiltinLayout::Wire(n)
            .build()
            .unwrap()
            .with_driver_polarizations(&[p])
            .unwrap()
    }

    #[test]
    fn exact_estimates() {
        let spec = wire_ansatz(1, &[0]).unwrap();
        let h = single_cell_h();
        let cfg = EstimatorConfig::exact();
        let e = estimate_energy(&spec, &[FRAC_PI_2], &h, &cfg).unwrap();
        assert!((e.energy + 50.0).abs() < 1e-9);
        assert_eq!(e.stderr, 0.0);
        let e = estimate_energy(&spec, &[0.0], &h, &cfg).unwrap();
        assert!((e.energy - 294.3).abs() < 1e-9);
    }

    #[test]
    fn sampled_estimate_reports_error_bar() {
        let spec = wire_ansatz(1, &[0]).unwrap();
        let h = single_cell_h();
        let e = estimate_energy(&spec, &[1.0], &h, &EstimatorConfig::sampled(4096, 3)).unwrap();
        assert!(e.stderr > 0.0);
        assert_eq!(e.shots_used, 8192);
        let exact = estimate_energy(&spec, &[1.0], &h, &EstimatorConfig::exact()).unwrap();
        assert!((e.energy - exact.energy).abs() < 5.0 * e.stderr);
        let zero_shots = EstimatorConfig::sampled(0, 3);
        assert!(estimate_energy(&spec, &[1.0], &h, &zero_shots).is_err());
    }

    #[test]
    fn mismatched_dimensions_rejected() {
        let spec = wire_ansatz(2, &[0]).unwrap();
        assert!(matches!(
            estimate_energy(&spec, &[0.1], &single_cell_h(), &EstimatorConfig::exact()),
            Err(QcaError::DimensionMismatch { .. })
        ));
        let r = run_vqe(
            &driven_wire(3, 1.0),
            &ModelConfig::default(),
            &spec,
            &EstimatorConfig::exact(),
            &OptimizerConfig::default(),
        );
        assert!(matches!(r, Err(QcaError::DimensionMismatch { .. })));
    }

    #[test]
    fn single_cell_matches_oracle() {
        let layout = driven_wire(1, 1.0);
        let model = ModelConfig::default();
        let r = run_vqe(
            &layout,
            &model,
            &wire_ansatz(1, &[0]).unwrap(),
            &EstimatorConfig::exact(),
            &OptimizerConfig::default(),
        )
        .unwrap();
        let oracle = ground_state_dense(&build_hamiltonian(&layout, &model).unwrap()).unwrap();
        assert!(r.converged);
        assert!(
            (r.energy - oracle.energy).abs() < 0.01,
            "{} vs {}",
            r.energy,
            oracle.energy
        );
        assert_eq!(r.energy, r.energy_trace.last().unwrap().energy);
    }

    #[test]
    fn unbiased_cell_sits_at_half_pi() {
        let r = run_vqe(
            &driven_wire(1, 0.0),
            &ModelConfig::default(),
            &wire_ansatz(1, &[0]).unwrap(),
            &EstimatorConfig::exact(),
            &OptimizerConfig::default(),
        )
        .unwrap();
        assert!(r.polarizations[0].abs() < 0.02);
        assert!((r.theta_star[0] - FRAC_PI_2).abs() < 0.05);
    }

    #[test]
    fn polarization_readout() {
        let spec = wire_ansatz(1, &[0]).unwrap();
        let p = read_polarizations(&spec, &[PI], &EstimatorConfig::exact()).unwrap();
        assert!((p[0] - 1.0).abs() < 1e-12);
        let p = read_polarizations(&spec, &[PI], &EstimatorConfig::sampled(1000, 1)).unwrap();
        assert_eq!(p, vec![1.0]);
    }

    #[test]
    fn majority2_truth_table_exact() {
        let spec = majority2_ansatz();
        for bits in 0..8u32 {
            let inputs: Vec<f64> = (0..3)
                .map(|k| if bits >> k & 1 == 1 { 1.0 } else { -1.0 })
                .collect();
            let layout = BuiltinLayout::Majority2
                .build()
                .unwrap()
                .with_driver_polarizations(&inputs)
                .unwrap();
            let r = run_vqe(
                &layout,
                &ModelConfig::default(),
                &spec,
                &EstimatorConfig::exact(),
                &OptimizerConfig::default(),
            )
            .unwrap();
            let majority = inputs.iter().sum::<f64>().signum();
            assert_eq!(r.polarizations[1].signum(), majority, "inputs {inputs:?}");
        }
    }

    #[test]
    fn restarts_are_recorded_and_deterministic() {
        let layout = driven_wire(2, -1.0);
        let spec = wire_ansatz(2, &[0, 1]).unwrap();
        let opt = OptimizerConfig::default().with_restarts(3);
        let est = EstimatorConfig::sampled(512, 42);
        let a = run_vqe(&layout, &ModelConfig::default(), &spec, &est, &opt).unwrap();
        let b = run_vqe(&layout, &ModelConfig::default(), &spec, &est, &opt).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.restarts.len(), 3);
        assert!(a.energy_trace.iter().any(|t| t.restart == 2));
        assert!(a.shots_used > 0);
        let json = a.to_json_string().unwrap();
        let back: VqeResult = serde_json::from_str(&json).unwrap();
        assert_eq!(back.theta_star, a.theta_star);
    }

    #[test]
    fn nelder_mead_also_converges() {
        let layout = driven_wire(1, 0.6);
        let model = ModelConfig::default();
        let opt = OptimizerConfig {
            method: OptimizerMethod::NelderMead,
            ..Default::default()
        };
        let r = run_vqe(
            &layout,
            &model,
            &wire_ansatz(1, &[0]).unwrap(),
            &EstimatorConfig::exact(),
            &opt,
        )
        .unwrap();
        let oracle = ground_state_dense(&build_hamiltonian(&layout, &model).unwrap()).unwrap();
        assert!((r.energy - oracle.energy).abs() < 0.01);
    }
}
