//! End-to-end studies built on [`run_vqe`]: driver sweeps, truth tables,
//! shots-vs-accuracy and iterations-vs-parameters, with CSV and JSON output.

use std::f64::consts::FRAC_PI_2;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ansatz::{inverter_ansatz, majority2_ansatz, majority6_ansatz, wire_ansatz, AnsatzSpec};
use crate::config::ModelConfig;
use crate::error::{QcaError, Result};
use crate::exact::ground_state;
use crate::hamiltonian::build_hamiltonian;
use crate::layout::{BuiltinLayout, CircuitLayout};
use crate::sampling::derive_seed;
use crate::vqe::{run_vqe_on, EstimatorConfig, EstimatorMode, OptimizerConfig, VqeResult};

/// Default number of driver values in a sweep over [-1, 1].
pub const DEFAULT_SWEEP_POINTS: usize = 21;
pub const DEFAULT_SHOT_LIST: [u64; 4] = [1024, 4096, 16384, 65536];
/// Start perturbation used by the parameter study when none is configured.
pub const DEFAULT_PARAMS_JITTER: f64 = 0.5;

/// One row per (run, device cell).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub run_id: String,
    pub experiment: String,
    pub layout: String,
    /// Driver values joined with `;`.
    pub driver_polarizations: String,
    pub mode: String,
    pub shots: u64,
    pub seed: u64,
    pub cell_index: usize,
    pub polarization: f64,
    #[serde(rename = "energy_meV")]
    pub energy_mev: f64,
    #[serde(rename = "oracle_energy_meV")]
    pub oracle_energy_mev: Option<f64>,
    pub iterations: usize,
}

/// Settings shared by every run of an experiment.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunSettings {
    pub model: ModelConfig,
    pub estimator: EstimatorConfig,
    pub optimizer: OptimizerConfig,
    pub oracle: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RmseRow {
    pub shots: u64,
    pub repeats: usize,
    pub mean_rmse: f64,
    pub std_rmse: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamsRow {
    pub n_params: usize,
    pub runs: usize,
    pub mean_iterations: f64,
    pub std_iterations: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthRow {
    pub inputs: Vec<f64>,
    pub output_cell: usize,
    pub expected_sign: f64,
    pub vqe_output: f64,
    pub oracle_output: f64,
    /// Output cell has the expected sign.
    pub correct: bool,
    /// Every other device cell also has its expected sign (inverter only).
    pub all_cells_correct: Option<bool>,
    pub oracle_correct: bool,
    pub agrees_with_oracle: bool,
    pub converged: bool,
    pub hard_case: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExperimentSummary {
    Sweep,
    Shots {
        rows: Vec<RmseRow>,
    },
    Truth {
        variant: String,
        rows: Vec<TruthRow>,
        correct: usize,
    },
    Params {
        rows: Vec<ParamsRow>,
        fit: LinearFit,
    },
}

/// Records plus the experiment-level summary; this is the JSON log format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentOutput {
    pub experiment: String,
    pub records: Vec<ExperimentRecord>,
    pub summary: ExperimentSummary,
    pub all_converged: bool,
}

impl ExperimentOutput {
    fn new(
        experiment: &str,
        mut records: Vec<ExperimentRecord>,
        summary: ExperimentSummary,
        all_converged: bool,
    ) -> Self {
        records.sort_by(|a, b| {
            a.run_id
                .cmp(&b.run_id)
                .then(a.cell_index.cmp(&b.cell_index))
        });
        Self {
            experiment: experiment.to_string(),
            records,
            summary,
            all_converged,
        }
    }

    pub fn to_csv_string(&self) -> Result<String> {
        records_to_csv(&self.records)
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Round to 6 significant digits.
pub fn sig6(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.5e}").parse().unwrap_or(x)
}

pub fn records_to_csv(records: &[ExperimentRecord]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    if records.is_empty() {
        w.write_record(CSV_HEADER)?;
    }
    for r in records {
        w.serialize(r)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| QcaError::Io(std::io::Error::other(e.to_string())))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn records_from_csv(s: &str) -> Result<Vec<ExperimentRecord>> {
    let mut rdr = csv::Reader::from_reader(s.as_bytes());
    rdr.deserialize()
        .map(|r| r.map_err(QcaError::from))
        .collect()
}

pub fn write_csv(records: &[ExperimentRecord], out: &mut impl Write) -> Result<()> {
    out.write_all(records_to_csv(records)?.as_bytes())?;
    Ok(())
}

pub const CSV_HEADER: [&str; 12] = [
    "run_id",
    "experiment",
    "layout",
    "driver_polarizations",
    "mode",
    "shots",
    "seed",
    "cell_index",
    "polarization",
    "energy_meV",
    "oracle_energy_meV",
    "iterations",
];

pub fn mode_label(mode: EstimatorMode) -> &'static str {
    match mode {
        EstimatorMode::ExactExpectation => "exact",
        EstimatorMode::Sampled => "sampled",
        EstimatorMode::NoisySampled => "noisy",
    }
}

/// `n` evenly spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    match n {
        0 => Err(QcaError::InvalidArgument(
            "sweep needs at least one point".into(),
        )),
        1 => Ok(vec![lo]),
        _ => Ok((0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect()),
    }
}

pub fn rmse(estimate: &[f64], reference: &[f64]) -> Result<f64> {
    if estimate.len() != reference.len() {
        return Err(QcaError::DimensionMismatch {
            expected: reference.len(),
            found: estimate.len(),
        });
    }
    if estimate.is_empty() {
        return Ok(0.0);
    }
    let ss: f64 = estimate
        .iter()
        .zip(reference)
        .map(|(a, b)| (a - b).powi(2))
        .sum();
    Ok((ss / estimate.len() as f64).sqrt())
}

/// Least-squares line through `(xs, ys)` with Pearson correlation.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(QcaError::InvalidArgument(
            "fit needs at least two paired points".into(),
        ));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(QcaError::InvalidArgument(
            "fit needs distinct x values".into(),
        ));
    }
    let slope = sxy / sxx;
    let r = if syy == 0.0 {
        0.0
    } else {
        sxy / (sxx * syy).sqrt()
    };
    Ok(LinearFit {
        slope,
        intercept: my - slope * mx,
        r,
    })
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = if v.len() > 1 {
        v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}

fn join_polarizations(p: &[f64]) -> String {
    p.iter()
        .map(|x| sig6(*x).to_string())
        .collect::<Vec<_>>()
        .join(";")
}

/// Result of a single VQE run with its optional exact reference.
#[derive(Debug, Clone)]
pub struct PointRun {
    pub vqe: VqeResult,
    pub oracle_energy: Option<f64>,
    pub oracle_polarizations: Option<Vec<f64>>,
    pub records: Vec<ExperimentRecord>,
}

/// Run VQE once and turn the result into per-cell records.
pub fn run_point(
    experiment: &str,
    run_id: &str,
    layout: &CircuitLayout,
    spec: &AnsatzSpec,
    settings: &RunSettings,
) -> Result<PointRun> {
    let h = build_hamiltonian(layout, &settings.model)?;
    let vqe = run_vqe_on(
        &h,
        layout,
        &settings.model,
        spec,
        &settings.estimator,
        &settings.optimizer,
    )?;
    let (oracle_energy, oracle_polarizations) = if settings.oracle {
        let gs = ground_state(&h)?;
        (Some(gs.energy), Some(gs.polarizations))
    } else {
        (None, None)
    };
    let est = &settings.estimator;
    let shots = if est.mode == EstimatorMode::ExactExpectation {
        0
    } else {
        est.shots
    };
    let drivers = join_polarizations(&layout.driver_polarizations());
    let records = vqe
        .polarizations
        .iter()
        .enumerate()
        .map(|(cell_index, &p)| ExperimentRecord {
            run_id: run_id.to_string(),
            experiment: experiment.to_string(),
            layout: layout.name.clone(),
            driver_polarizations: drivers.clone(),
            mode: mode_label(est.mode).to_string(),
            shots,
            seed: est.seed,
            cell_index,
            polarization: sig6(p),
            energy_mev: sig6(vqe.energy),
            oracle_energy_mev: oracle_energy.map(sig6),
            iterations: vqe.iterations,
        })
        .collect();
    Ok(PointRun {
        vqe,
        oracle_energy,
        oracle_polarizations,
        records,
    })
}

// Records carry the experiment's seed; per-run seeds follow from it and the run id.
fn with_base_seed(mut run: PointRun, seed: u64) -> PointRun {
    for r in &mut run.records {
        r.seed = seed;
    }
    run
}

/// Sweep every driver of `layout` over `p_values`, one VQE run per value.
///
/// Point `i` uses estimator seed `derive_seed(seed, i)`.
pub fn sweep(
    experiment: &str,
    layout: &CircuitLayout,
    spec: &AnsatzSpec,
    p_values: &[f64],
    settings: &RunSettings,
) -> Result<ExperimentOutput> {
    if p_values.is_empty() {
        return Err(QcaError::InvalidArgument(
            "sweep needs at least one driver value".into(),
        ));
    }
    let runs: Vec<PointRun> = p_values
        .par_iter()
        .enumerate()
        .map(|(i, &p)| {
            let pols = vec![p; layout.n_drivers()];
            let layout = layout.clone().with_driver_polarizations(&pols)?;
            let mut s = settings.clone();
            s.estimator.seed = derive_seed(settings.estimator.seed, i as u64);
            let run = run_point(
                experiment,
                &format!("{experiment}-{i:04}"),
                &layout,
                spec,
                &s,
            )?;
            Ok(with_base_seed(run, settings.estimator.seed))
        })
        .collect::<Result<_>>()?;
    let all_converged = runs.iter().all(|r| r.vqe.converged);
    let records = runs.into_iter().flat_map(|r| r.records).collect();
    Ok(ExperimentOutput::new(
        experiment,
        records,
        ExperimentSummary::Sweep,
        all_converged,
    ))
}

/// Single-cell response: P0 against the driver over `n_points` values in [-1, 1].
pub fn response_curve(n_points: usize, settings: &RunSettings) -> Result<ExperimentOutput> {
    if n_points < 2 {
        return Err(QcaError::InvalidArgument(
            "response curve needs at least two points".into(),
        ));
    }
    let layout = BuiltinLayout::Wire(1).build()?;
    sweep(
        "response",
        &layout,
        &wire_ansatz(1, &[0])?,
        &linspace(-1.0, 1.0, n_points)?,
        settings,
    )
}

/// Polarization RMSE against the exact ground state on wire(3) for each
/// shot budget, `repeats` seeds each, sweeping the driver over `p_values`.
///
/// Uses one Ry per cell: with a single rotation the unbiased point has a
/// flat landscape and the error no longer depends on the shot budget.
pub fn shots_study(
    shot_list: &[u64],
    repeats: usize,
    p_values: &[f64],
    settings: &RunSettings,
) -> Result<ExperimentOutput> {
    if shot_list.is_empty() || repeats == 0 || p_values.is_empty() {
        return Err(QcaError::InvalidArgument(
            "shots study needs shot budgets, repeats and driver values".into(),
        ));
    }
    if settings.estimator.mode == EstimatorMode::ExactExpectation {
        return Err(QcaError::InvalidArgument(
            "shots study needs a sampled mode".into(),
        ));
    }
    let base = BuiltinLayout::Wire(3).build()?;
    let spec = wire_ansatz(3, &[0, 1, 2])?;

    let oracles: Vec<(f64, Vec<f64>)> = p_values
        .iter()
        .map(|&p| {
            let layout = base.clone().with_driver_polarizations(&[p])?;
            let gs = ground_state(&build_hamiltonian(&layout, &settings.model)?)?;
            Ok((gs.energy, gs.polarizations))
        })
        .collect::<Result<_>>()?;

    let jobs: Vec<(usize, usize, usize)> = (0..shot_list.len())
        .flat_map(|s| (0..repeats).flat_map(move |r| (0..p_values.len()).map(move |i| (s, r, i))))
        .collect();
    let runs: Vec<((usize, usize), PointRun, Vec<f64>)> = jobs
        .par_iter()
        .map(|&(s, r, i)| {
            let layout = base.clone().with_driver_polarizations(&[p_values[i]])?;
            let mut st = settings.clone();
            st.oracle = false;
            st.estimator.shots = shot_list[s];
            st.estimator.seed =
                derive_seed(derive_seed(settings.estimator.seed, r as u64), i as u64);
            let id = format!("shots-{:06}-r{r:03}-p{i:04}", shot_list[s]);
            let mut run = with_base_seed(
                run_point("shots-study", &id, &layout, &spec, &st)?,
                settings.estimator.seed,
            );
            let (e, pol) = &oracles[i];
            if settings.oracle {
                for rec in &mut run.records {
                    rec.oracle_energy_mev = Some(sig6(*e));
                }
            }
            Ok(((s, r), run, pol.clone()))
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    for (s, &shots) in shot_list.iter().enumerate() {
        let per_seed: Vec<f64> = (0..repeats)
            .map(|r| {
                let (est, refs): (Vec<f64>, Vec<f64>) = runs
                    .iter()
                    .filter(|(key, _, _)| *key == (s, r))
                    .flat_map(|(_, run, oracle)| {
                        run.vqe
                            .polarizations
                            .iter()
                            .copied()
                            .zip(oracle.iter().copied())
                    })
                    .unzip();
                rmse(&est, &refs)
            })
            .collect::<Result<_>>()?;
        let (mean_rmse, std_rmse) = mean_std(&per_seed);
        rows.push(RmseRow {
            shots,
            repeats,
            mean_rmse,
            std_rmse,
        });
    }
    let all_converged = runs.iter().all(|(_, r, _)| r.vqe.converged);
    let records = runs.into_iter().flat_map(|(_, r, _)| r.records).collect();
    Ok(ExperimentOutput::new(
        "shots-study",
        records,
        ExperimentSummary::Shots { rows },
        all_converged,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TruthVariant {
    Majority6,
    Majority2,
    Inverter,
}

impl TruthVariant {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Majority6 => "majority6",
            Self::Majority2 => "majority2",
            Self::Inverter => "inverter",
        }
    }

    fn builtin(&self) -> BuiltinLayout {
        match self {
            Self::Majority6 => BuiltinLayout::Majority6,
            Self::Majority2 => BuiltinLayout::Majority2,
            Self::Inverter => BuiltinLayout::Inverter,
        }
    }

    pub fn ansatz(&self) -> AnsatzSpec {
        match self {
            Self::Majority6 => majority6_ansatz(),
            Self::Majority2 => majority2_ansatz(),
            Self::Inverter => inverter_ansatz(),
        }
    }

    /// Fully polarized inputs in driver order.
    pub fn inputs(&self) -> Vec<Vec<f64>> {
        match self {
            Self::Inverter => vec![vec![1.0], vec![-1.0]],
            _ => (0..8u32)
                .map(|bits| {
                    (0..3)
                        .map(|k| if bits >> (2 - k) & 1 == 1 { 1.0 } else { -1.0 })
                        .collect()
                })
                .collect(),
        }
    }

    fn expected_output(&self, inputs: &[f64]) -> f64 {
        match self {
            Self::Inverter => -inputs[0].signum(),
            _ => inputs.iter().sum::<f64>().signum(),
        }
    }

    /// The frustrated input of the six-cell gate.
    pub fn is_hard_case(&self, inputs: &[f64]) -> bool {
        *self == Self::Majority6 && inputs == [1.0, -1.0, 1.0]
    }
}

impl std::str::FromStr for TruthVariant {
    type Err = QcaError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "majority6" | "majority" => Ok(Self::Majority6),
            "majority2" => Ok(Self::Majority2),
            "inverter" => Ok(Self::Inverter),
            other => Err(QcaError::UnknownLayout(other.to_string())),
        }
    }
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Every fully polarized input, with VQE and exact verdicts for the output cell.
pub fn truth_table(variant: TruthVariant, settings: &RunSettings) -> Result<ExperimentOutput> {
    let base = variant.builtin().build()?;
    let out_cell = variant.builtin().output_cell();
    let spec = variant.ansatz();
    let mut st = settings.clone();
    st.oracle = true;
    let inputs = variant.inputs();
    let experiment = format!("truth-{}", variant.name());

    let runs: Vec<PointRun> = inputs
        .par_iter()
        .enumerate()
        .map(|(i, inp)| {
            let layout = base.clone().with_driver_polarizations(inp)?;
            let mut s = st.clone();
            s.estimator.seed = derive_seed(settings.estimator.seed, i as u64);
            let run = run_point(
                &experiment,
                &format!("{experiment}-{i:02}"),
                &layout,
                &spec,
                &s,
            )?;
            Ok(with_base_seed(run, settings.estimator.seed))
        })
        .collect::<Result<_>>()?;

    let rows: Vec<TruthRow> = inputs
        .iter()
        .zip(&runs)
        .map(|(inp, run)| {
            let expected = variant.expected_output(inp);
            let oracle_pols = run.oracle_polarizations.as_ref().expect("oracle enabled");
            let vqe_output = run.vqe.polarizations[out_cell];
            let oracle_output = oracle_pols[out_cell];
            let all_cells_correct = (variant == TruthVariant::Inverter).then(|| {
                run.vqe.polarizations.iter().enumerate().all(|(k, &p)| {
                    let want = if k == out_cell {
                        expected
                    } else {
                        inp[0].signum()
                    };
                    sign(p) == want
                })
            });
            TruthRow {
                inputs: inp.clone(),
                output_cell: out_cell,
                expected_sign: expected,
                vqe_output: sig6(vqe_output),
                oracle_output: sig6(oracle_output),
                correct: sign(vqe_output) == expected,
                all_cells_correct,
                oracle_correct: sign(oracle_output) == expected,
                agrees_with_oracle: sign(vqe_output) == sign(oracle_output),
                converged: run.vqe.converged,
                hard_case: variant.is_hard_case(inp),
            }
        })
        .collect();
    let correct = rows.iter().filter(|r| r.correct).count();
    let all_converged = runs.iter().all(|r| r.vqe.converged);
    let records = runs.into_iter().flat_map(|r| r.records).collect();
    Ok(ExperimentOutput::new(
        &experiment,
        records,
        ExperimentSummary::Truth {
            variant: variant.name().to_string(),
            rows,
            correct,
        },
        all_converged,
    ))
}

/// Optimizer cost against parameter count: wire(k) driven at +1 with one Ry
/// per cell, k = 1..=max_params, `repeats` perturbed starts each.
///
/// Runs are noise-free; different repeats differ through the jittered
/// initial angles, seeded from the estimator seed.
pub fn params_study(
    max_params: usize,
    repeats: usize,
    settings: &RunSettings,
) -> Result<ExperimentOutput> {
    if max_params < 2 || repeats == 0 {
        return Err(QcaError::InvalidArgument(
            "params study needs max_params >= 2 and at least one repeat".into(),
        ));
    }
    let jobs: Vec<(usize, usize)> = (1..=max_params)
        .flat_map(|k| (0..repeats).map(move |r| (k, r)))
        .collect();
    let runs: Vec<(usize, PointRun)> = jobs
        .par_iter()
        .map(|&(k, r)| {
            let layout = BuiltinLayout::Wire(k).build()?;
            let all: Vec<usize> = (0..k).collect();
            let spec = wire_ansatz(k, &all)?;
            let mut s = settings.clone();
            s.estimator.seed =
                derive_seed(derive_seed(settings.estimator.seed, k as u64), r as u64);
            s.optimizer.initial_theta = Some(vec![FRAC_PI_2; k]);
            if s.optimizer.initial_jitter == 0.0 {
                s.optimizer.initial_jitter = DEFAULT_PARAMS_JITTER;
            }
            let id = format!("params-k{k:02}-r{r:03}");
            let run = run_point("params-study", &id, &layout, &spec, &s)?;
            Ok((k, with_base_seed(run, settings.estimator.seed)))
        })
        .collect::<Result<_>>()?;

    let rows: Vec<ParamsRow> = (1..=max_params)
        .map(|k| {
            let its: Vec<f64> = runs
                .iter()
                .filter(|(kk, _)| *kk == k)
                .map(|(_, r)| r.vqe.iterations as f64)
                .collect();
            let (mean_iterations, std_iterations) = mean_std(&its);
            ParamsRow {
                n_params: k,
                runs: its.len(),
                mean_iterations,
                std_iterations,
            }
        })
        .collect();
    let xs: Vec<f64> = rows.iter().map(|r| r.n_params as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.mean_iterations).collect();
    let fit = linear_fit(&xs, &ys)?;
    let all_converged = runs.iter().all(|(_, r)| r.vqe.converged);
    let records = runs.into_iter().flat_map(|(_, r)| r.records).collect();
    Ok(ExperimentOutput::new(
        "params-study",
        records,
        ExperimentSummary::Params { rows, fit },
        all_converged,
    ))
}
