mod args;

use std::fs;
use std::process::ExitCode;

use clap::Parser;

use qca_vqe::ansatz::{full_ansatz, wire_ansatz};
use qca_vqe::config::ModelConfig;
use qca_vqe::electrostatics::{interaction_table, ChargeModel};
use qca_vqe::experiments::{
    linspace, params_study, run_point, shots_study, sig6, sweep, truth_table, ExperimentOutput,
    ExperimentSummary, RunSettings, TruthVariant, DEFAULT_SWEEP_POINTS,
};
use qca_vqe::layout::{BuiltinLayout, CircuitLayout, GridPosition};
use qca_vqe::sampling::NoiseModel;
use qca_vqe::vqe::{EstimatorConfig, EstimatorMode, OptimizerConfig, OptimizerMethod};
use qca_vqe::QcaError;

use args::{parse_pdrv, ChargeModelArg, Cli, Command, Common, MajorityVariant, MethodArg, ModeArg};

const EXIT_VALIDATION: u8 = 2;
const EXIT_UNCONVERGED: u8 = 3;

enum Failure {
    Validation(String),
    Io(String),
}

impl From<QcaError> for Failure {
    fn from(e: QcaError) -> Self {
        match e {
            QcaError::Io(e) => Failure::Io(e.to_string()),
            other => Failure::Validation(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("warning: some runs did not converge; results were written");
            ExitCode::from(EXIT_UNCONVERGED)
        }
        Err(Failure::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_VALIDATION)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}

fn settings(c: &Common, restarts_default: usize) -> Result<RunSettings, Failure> {
    if !(c.scale.is_finite() && c.scale > 0.0) {
        return Err(Failure::Validation(format!(
            "--scale must be positive, got {}",
            c.scale
        )));
    }
    let noise = NoiseModel {
        p1: c.p1,
        p2: c.p2,
        p_readout: c.p_readout,
        seed: 0,
    };
    noise.validate()?;
    let estimator = match c.mode {
        ModeArg::Exact => EstimatorConfig::exact().with_seed(c.seed),
        ModeArg::Sampled => EstimatorConfig::sampled(c.shots, c.seed),
        ModeArg::Noisy => EstimatorConfig::noisy(c.shots, c.seed, noise),
    };
    if estimator.mode != EstimatorMode::ExactExpectation && c.shots == 0 {
        return Err(Failure::Validation("--shots must be at least 1".into()));
    }
    let optimizer = OptimizerConfig {
        method: match c.method {
            MethodArg::Cobyla => OptimizerMethod::CobylaLike,
            MethodArg::NelderMead => OptimizerMethod::NelderMead,
        },
        max_iter: c.max_iter,
        restarts: c.restarts.unwrap_or(restarts_default),
        ..OptimizerConfig::default()
    };
    Ok(RunSettings {
        model: ModelConfig::default().with_bias_scale(c.scale),
        estimator,
        optimizer,
        oracle: c.oracle,
    })
}

fn driver_values(c: &Common, default: (f64, f64, usize)) -> Result<Vec<f64>, Failure> {
    let (lo, hi, n) = match &c.pdrv {
        Some(s) => parse_pdrv(s).map_err(Failure::Validation)?,
        None => default,
    };
    for p in [lo, hi] {
        if !(-1.0..=1.0).contains(&p) {
            return Err(Failure::Validation(format!(
                "driver polarization {p} outside [-1, 1]"
            )));
        }
    }
    Ok(linspace(lo, hi, n)?)
}

fn run(cli: &Cli) -> Result<bool, Failure> {
    let c = &cli.common;
    let full_sweep = (-1.0, 1.0, DEFAULT_SWEEP_POINTS);
    let output = match &cli.command {
        Command::Energies { dx, dy, charges } => {
            let model = match charges {
                ChargeModelArg::Bare => ChargeModel::Bare,
                ChargeModelArg::Neutralized => ChargeModel::Neutralized,
            };
            let s = settings(c, 1)?;
            let table = interaction_table(GridPosition::new(*dx, *dy), model, &s.model.constants)?;
            let mut csv = String::from("beta,alpha,energy_meV\n");
            for (beta, alpha, e) in table.rows() {
                csv.push_str(&format!("{beta},{alpha},{}\n", sig6(e)));
            }
            emit_text(c, &csv)?;
            return Ok(true);
        }
        Command::Wire { n, ry } => {
            let layout = BuiltinLayout::Wire(*n).build()?;
            let spec = wire_ansatz(*n, ry)?;
            sweep(
                "wire",
                &layout,
                &spec,
                &driver_values(c, (1.0, 1.0, 1))?,
                &settings(c, 1)?,
            )?
        }
        Command::Inverter => {
            let s = settings(c, 1)?;
            if c.pdrv.is_some() {
                let layout = BuiltinLayout::Inverter.build()?;
                let spec = TruthVariant::Inverter.ansatz();
                sweep(
                    "inverter",
                    &layout,
                    &spec,
                    &driver_values(c, full_sweep)?,
                    &s,
                )?
            } else {
                truth_table(TruthVariant::Inverter, &s)?
            }
        }
        Command::Majority { variant } => {
            let (v, restarts) = match variant {
                MajorityVariant::Majority6 => (TruthVariant::Majority6, 3),
                MajorityVariant::Majority2 => (TruthVariant::Majority2, 1),
            };
            truth_table(v, &settings(c, restarts)?)?
        }
        Command::Response => {
            let layout = BuiltinLayout::Wire(1).build()?;
            let values = driver_values(c, full_sweep)?;
            sweep(
                "response",
                &layout,
                &wire_ansatz(1, &[0])?,
                &values,
                &settings(c, 1)?,
            )?
        }
        Command::ShotsStudy { shot_list, repeats } => {
            let mut s = settings(c, 1)?;
            if c.mode == ModeArg::Exact {
                s.estimator.mode = EstimatorMode::Sampled;
            }
            shots_study(shot_list, *repeats, &driver_values(c, full_sweep)?, &s)?
        }
        Command::ParamsStudy {
            max_params,
            repeats,
        } => params_study(*max_params, *repeats, &settings(c, 1)?)?,
        Command::Custom { layout, ry } => {
            let layout = CircuitLayout::from_json_file(layout)?;
            let n = layout.n_devices();
            let spec = match ry {
                Some(qs) => wire_ansatz(n, qs)?,
                None => full_ansatz(n)?,
            };
            let values = match &c.pdrv {
                Some(_) => driver_values(c, full_sweep)?,
                None => Vec::new(),
            };
            let s = settings(c, 1)?;
            if values.is_empty() {
                // keep the file's own driver values
                let name = layout.name.clone();
                let run = run_point(&name, &format!("{name}-0000"), &layout, &spec, &s)?;
                let converged = run.vqe.converged;
                ExperimentOutput {
                    experiment: name,
                    records: run.records,
                    summary: ExperimentSummary::Sweep,
                    all_converged: converged,
                }
            } else {
                let name = layout.name.clone();
                sweep(&name, &layout, &spec, &values, &s)?
            }
        }
    };
    report(&output);
    emit_text(c, &output.to_csv_string()?)?;
    if let Some(path) = &c.json {
        fs::write(path, output.to_json_string()?).map_err(|e| Failure::Io(e.to_string()))?;
    }
    Ok(output.all_converged)
}

fn emit_text(c: &Common, text: &str) -> Result<(), Failure> {
    match &c.out {
        Some(path) => {
            fs::write(path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn report(out: &ExperimentOutput) {
    match &out.summary {
        ExperimentSummary::Sweep => {}
        ExperimentSummary::Shots { rows } => {
            eprintln!("shots     mean_rmse  std_rmse");
            for r in rows {
                eprintln!("{:<9} {:.6}   {:.6}", r.shots, r.mean_rmse, r.std_rmse);
            }
        }
        ExperimentSummary::Truth {
            variant,
            rows,
            correct,
        } => {
            for r in rows {
                let inputs: Vec<String> = r.inputs.iter().map(|p| format!("{p:+}")).collect();
                eprintln!(
                    "{} -> P{} = {:+.4} (exact {:+.4}) {}{}",
                    inputs.join(","),
                    r.output_cell,
                    r.vqe_output,
                    r.oracle_output,
                    if r.correct { "ok" } else { "WRONG" },
                    if r.hard_case { " [hard case]" } else { "" }
                );
            }
            eprintln!("{variant}: {correct}/{} correct", rows.len());
        }
        ExperimentSummary::Params { rows, fit } => {
            for r in rows {
                eprintln!(
                    "k={:<3} mean {:.2} std {:.2}",
                    r.n_params, r.mean_iterations, r.std_iterations
                );
            }
            eprintln!(
                "slope {:.4} intercept {:.4} r {:.4}",
                fit.slope, fit.intercept, fit.r
            );
        }
    }
}
