//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails. Pass criterion numbers as arguments to run a subset:
//! `cargo test -p qca-vqe --test acceptance -- 4 7`.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qca_vqe::ansatz::{spread_rotations, wire_ansatz};
use qca_vqe::config::{ModelConfig, PhysicalConstants};
use qca_vqe::electrostatics::{driver_delta, kink_energies};
use qca_vqe::exact::{ground_state_dense, ground_state_lanczos, LanczosOptions};
use qca_vqe::experiments::{
    linspace, params_study, rmse, shots_study, truth_table, ExperimentSummary, RunSettings,
    TruthVariant, DEFAULT_SHOT_LIST, DEFAULT_SWEEP_POINTS,
};
use qca_vqe::hamiltonian::{build_hamiltonian, PauliSum};
use qca_vqe::layout::{BuiltinLayout, CircuitLayout};
use qca_vqe::sampling::{sample_circuit, NoiseModel};
use qca_vqe::statevector::{Basis, GateOp, QuantumState, StateVector};
use qca_vqe::vqe::{estimate_energy, run_vqe, EstimatorConfig, OptimizerConfig};

type Outcome = Result<(bool, String), String>;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn wire(n: usize, p: f64) -> CircuitLayout {
    BuiltinLayout::Wire(n)
        .build()
        .unwrap()
        .with_driver_polarizations(&[p])
        .unwrap()
}

fn within_budget(elapsed: Duration, budget_s: u64) -> bool {
    elapsed <= Duration::from_secs(budget_s)
}

// Independent point-charge sum: two electrons per cell on a square of side a,
// cells 2a apart, state 1 on the main diagonal.
fn point_charge_kink(a: f64) -> f64 {
    let k = 1439.964;
    let h = a / 2.0;
    let one = [(-h, h), (h, -h)];
    let zero = [(h, h), (-h, -h)];
    let energy = |p: &[(f64, f64); 2], q: &[(f64, f64); 2]| {
        let mut e = 0.0;
        for (x1, y1) in p {
            for (x2, y2) in q {
                let dx = x2 + 2.0 * a - x1;
                let dy = y2 - y1;
                e += k / (dx * dx + dy * dy).sqrt();
            }
        }
        e
    };
    energy(&one, &zero) - energy(&one, &one)
}

fn c1_kink() -> Outcome {
    let lib = kink_energies(&ModelConfig::default()).map_err(err)?;
    let independent = point_charge_kink(1.0);
    let magnitude = lib.oracle_e_k.abs();
    let ok = (magnitude - 294.3).abs() <= 0.1 && (independent - magnitude).abs() < 1e-9;
    Ok((
        ok,
        format!(
            "|E_k| = {magnitude:.3} meV (independent sum {independent:.3}), target 294.3 +/- 0.1"
        ),
    ))
}

fn c2_driver_bias() -> Outcome {
    let c = PhysicalConstants::default();
    let d1 = driver_delta(1.0, &c).map_err(err)?;
    let mut odd = true;
    for i in 0..=100 {
        let p = i as f64 / 100.0;
        odd &= driver_delta(-p, &c).map_err(err)? == -driver_delta(p, &c).map_err(err)?;
    }
    let ok = (d1 + 294.4).abs() <= 0.1 && odd;
    Ok((
        ok,
        format!("delta(1) = {d1:.3} meV, target -294.4 +/- 0.1; odd on 101 points: {odd}"),
    ))
}

fn c3_single_cell() -> Outcome {
    let spec = wire_ansatz(1, &[0]).map_err(err)?;
    let mut worst: f64 = 0.0;
    let mut p_half = f64::NAN;
    for scale in [1.0, 0.5] {
        let model = ModelConfig::default().with_bias_scale(scale);
        for p in linspace(-1.0, 1.0, DEFAULT_SWEEP_POINTS).map_err(err)? {
            let layout = wire(1, p);
            let r = run_vqe(
                &layout,
                &model,
                &spec,
                &EstimatorConfig::exact(),
                &OptimizerConfig::default(),
            )
            .map_err(err)?;
            let dense = ground_state_dense(&build_hamiltonian(&layout, &model).map_err(err)?)
                .map_err(err)?;
            worst = worst.max((r.energy - dense.energy).abs());
            if scale == 0.5 && p == 1.0 {
                p_half = r.polarizations[0];
            }
        }
    }
    // two-level closed form: P = b / sqrt(b^2 + gamma^2), b = 0.5 * 294.3
    let b: f64 = 0.5 * 294.3;
    let closed = b / (b * b + 50.0f64 * 50.0).sqrt();
    let ok = worst < 0.26 && (p_half - 0.947).abs() <= 0.005 && (closed - 0.947).abs() <= 0.005;
    Ok((
        ok,
        format!("max |E_vqe - E_dense| = {worst:.2e} meV (< 0.26); P0(1) at scale 0.5 = {p_half:.4} (closed form {closed:.4}, target 0.947 +/- 0.005)"),
    ))
}

fn c4_wires() -> Outcome {
    let model = ModelConfig::default();
    let mut ok = true;
    let mut notes = Vec::new();
    for (n, rys) in [(3, vec![0]), (7, vec![0]), (15, spread_rotations(15, 3))] {
        let spec = wire_ansatz(n, &rys).map_err(err)?;
        for p in [1.0, -1.0] {
            let layout = wire(n, p);
            let r = run_vqe(
                &layout,
                &model,
                &spec,
                &EstimatorConfig::exact(),
                &OptimizerConfig::default(),
            )
            .map_err(err)?;
            let h = build_hamiltonian(&layout, &model).map_err(err)?;
            let oracle = if n <= 10 {
                ground_state_dense(&h)
            } else {
                ground_state_lanczos(&h, LanczosOptions::default())
            }
            .map_err(err)?;
            let signs = r
                .polarizations
                .iter()
                .all(|&q| q.signum() == p && q.abs() >= 0.85);
            let dev = r
                .polarizations
                .iter()
                .zip(&oracle.polarizations)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            let min_abs = r.polarizations.iter().map(|q| q.abs()).fold(1.0, f64::min);
            ok &= signs && dev < 0.02;
            notes.push(format!("N={n} P={p:+}: min|P| {min_abs:.3}, dev {dev:.4}"));
        }
    }
    Ok((ok, notes.join("; ")))
}

fn c5_inverter() -> Outcome {
    let out = truth_table(TruthVariant::Inverter, &RunSettings::default()).map_err(err)?;
    let ExperimentSummary::Truth { rows, .. } = &out.summary else {
        return Err("unexpected summary".into());
    };
    let ok = rows.len() == 2
        && rows
            .iter()
            .all(|r| r.correct && r.all_cells_correct == Some(true));
    let detail = rows
        .iter()
        .map(|r| format!("P_drv={:+}: P5={:+.3}", r.inputs[0], r.vqe_output))
        .collect::<Vec<_>>()
        .join(", ");
    Ok((ok, detail))
}

fn c6_majority() -> Outcome {
    let tally = |variant, restarts| -> Result<(usize, bool, usize), String> {
        let settings = RunSettings {
            optimizer: OptimizerConfig::default().with_restarts(restarts),
            ..Default::default()
        };
        let out = truth_table(variant, &settings).map_err(err)?;
        let ExperimentSummary::Truth { rows, correct, .. } = out.summary else {
            return Err("unexpected summary".into());
        };
        let agree = rows
            .iter()
            .filter(|r| r.converged)
            .all(|r| r.agrees_with_oracle);
        let converged = rows.iter().filter(|r| r.converged).count();
        Ok((correct, agree, converged))
    };
    let (m2, _, _) = tally(TruthVariant::Majority2, 1)?;
    let (m6, agree6, conv6) = tally(TruthVariant::Majority6, 3)?;
    let ok = m2 == 8 && m6 >= 7 && agree6;
    Ok((
        ok,
        format!("majority2 {m2}/8; majority6 {m6}/8 with 3 restarts, oracle sign agreement on all {conv6} converged rows: {agree6}"),
    ))
}

fn c7_shots() -> Outcome {
    let settings = RunSettings {
        estimator: EstimatorConfig::sampled(1024, 1),
        ..Default::default()
    };
    let p = linspace(-1.0, 1.0, DEFAULT_SWEEP_POINTS).map_err(err)?;
    let out = shots_study(&DEFAULT_SHOT_LIST, 20, &p, &settings).map_err(err)?;
    let ExperimentSummary::Shots { rows } = out.summary else {
        return Err("unexpected summary".into());
    };
    let m: Vec<f64> = rows.iter().map(|r| r.mean_rmse).collect();
    let decreasing = m[0] > m[1] && m[1] > m[2];
    let plateau = (m[2] - m[3]).abs() < 0.5 * (m[0] - m[2]).abs();
    Ok((
        decreasing && plateau,
        format!(
            "mean RMSE over 20 seeds: 1024 {:.4}, 4096 {:.4}, 16384 {:.4}, 65536 {:.4}; plateau ratio {:.3} (< 0.5)",
            m[0],
            m[1],
            m[2],
            m[3],
            (m[2] - m[3]).abs() / (m[0] - m[2]).abs()
        ),
    ))
}

fn c8_params() -> Outcome {
    let out = params_study(8, 10, &RunSettings::default()).map_err(err)?;
    let ExperimentSummary::Params { rows, fit } = out.summary else {
        return Err("unexpected summary".into());
    };
    let first = rows.first().unwrap().mean_iterations;
    let last = rows.last().unwrap().mean_iterations;
    let ok = fit.slope > 0.0 && fit.r > 0.8 && first < last;
    Ok((
        ok,
        format!(
            "mean iterations k=1 {first:.1}, k=8 {last:.1}; slope {:.2}, r {:.4}",
            fit.slope, fit.r
        ),
    ))
}

fn random_circuit(n: usize, depth: usize, rng: &mut ChaCha8Rng) -> Vec<GateOp> {
    (0..depth)
        .map(|_| {
            if n > 1 && rng.random::<bool>() {
                let control = rng.random_range(0..n);
                let mut target = rng.random_range(0..n - 1);
                if target >= control {
                    target += 1;
                }
                GateOp::CNot { control, target }
            } else {
                GateOp::RotY {
                    qubit: rng.random_range(0..n),
                    angle: rng.random_range(-2.0 * PI..2.0 * PI),
                }
            }
        })
        .collect()
}

fn c9_simulator() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let n = 8;

    let mut norm_dev: f64 = 0.0;
    for _ in 0..20 {
        let s = StateVector::prepare(n, &random_circuit(n, 60, &mut rng)).map_err(err)?;
        norm_dev = norm_dev.max((s.norm_sqr() - 1.0).abs());
    }

    let base = StateVector::prepare(n, &random_circuit(n, 30, &mut rng)).map_err(err)?;
    let mut twice = base.clone();
    let cx = GateOp::CNot {
        control: 2,
        target: 5,
    };
    twice.apply(&cx).map_err(err)?;
    twice.apply(&cx).map_err(err)?;
    let involution = base
        .amplitudes()
        .iter()
        .zip(twice.amplitudes())
        .all(|(a, b)| (a - b).norm() < 1e-12);

    let (t1, t2) = (0.37, -1.21);
    let mut split = base.clone();
    split
        .apply(&GateOp::RotY {
            qubit: 3,
            angle: t1,
        })
        .map_err(err)?;
    split
        .apply(&GateOp::RotY {
            qubit: 3,
            angle: t2,
        })
        .map_err(err)?;
    let mut joined = base.clone();
    joined
        .apply(&GateOp::RotY {
            qubit: 3,
            angle: t1 + t2,
        })
        .map_err(err)?;
    let additive = split
        .amplitudes()
        .iter()
        .zip(joined.amplitudes())
        .all(|(a, b)| (a - b).norm() < 1e-12);

    let layout = wire(3, 0.4);
    let h: PauliSum = build_hamiltonian(&layout, &ModelConfig::default()).map_err(err)?;
    let spec = wire_ansatz(3, &[0, 1, 2]).map_err(err)?;
    let theta = [2.1, 0.4, -0.9];
    let exact = estimate_energy(&spec, &theta, &h, &EstimatorConfig::exact())
        .map_err(err)?
        .energy;
    let mut inside = 0;
    for seed in 0..100 {
        let e = estimate_energy(&spec, &theta, &h, &EstimatorConfig::sampled(4096, seed))
            .map_err(err)?;
        if (e.energy - exact).abs() <= 5.0 * e.stderr {
            inside += 1;
        }
    }

    let gates = spec.bind(&theta).map_err(err)?;
    let mut identical = true;
    for seed in 0..10 {
        for basis in [Basis::Computational, Basis::AllX] {
            let plain =
                sample_circuit::<StateVector>(3, &gates, 2048, basis, seed, None).map_err(err)?;
            let quiet = sample_circuit::<StateVector>(
                3,
                &gates,
                2048,
                basis,
                seed,
                Some(&NoiseModel::noiseless()),
            )
            .map_err(err)?;
            identical &= plain == quiet;
        }
        let s = estimate_energy(&spec, &theta, &h, &EstimatorConfig::sampled(2048, seed))
            .map_err(err)?;
        let q = estimate_energy(
            &spec,
            &theta,
            &h,
            &EstimatorConfig::noisy(2048, seed, NoiseModel::noiseless()),
        )
        .map_err(err)?;
        identical &= s == q;
    }

    let ok = norm_dev < 1e-10 && involution && additive && inside >= 95 && identical;
    Ok((
        ok,
        format!(
            "norm dev {norm_dev:.1e}; CNOT involution {involution}; RotY additivity {additive}; \
             within 5 sigma {inside}/100; zero-noise identical {identical}"
        ),
    ))
}

fn c10_oracles() -> Outcome {
    let model = ModelConfig::default();
    let mut worst: f64 = 0.0;
    let mut flip: f64 = 0.0;
    let mut checked = 0;
    for builtin in BuiltinLayout::all_up_to(10) {
        let base = builtin.build().map_err(err)?;
        let drivers = base.driver_polarizations();
        for sign in [1.0, -1.0] {
            let pols: Vec<f64> = drivers.iter().map(|p| sign * p).collect();
            let layout = base.clone().with_driver_polarizations(&pols).map_err(err)?;
            let h = build_hamiltonian(&layout, &model).map_err(err)?;
            let dense = ground_state_dense(&h).map_err(err)?;
            let lanczos = ground_state_lanczos(&h, LanczosOptions::default()).map_err(err)?;
            worst = worst.max((dense.energy - lanczos.energy).abs());
            checked += 1;
        }
        let h_up = build_hamiltonian(&base, &model).map_err(err)?;
        let flipped: Vec<f64> = drivers.iter().map(|p| -p).collect();
        let down = base
            .clone()
            .with_driver_polarizations(&flipped)
            .map_err(err)?;
        let h_down = build_hamiltonian(&down, &model).map_err(err)?;
        let up = ground_state_dense(&h_up).map_err(err)?;
        let dn = ground_state_dense(&h_down).map_err(err)?;
        for (a, b) in up.polarizations.iter().zip(&dn.polarizations) {
            flip = flip.max((a + b).abs());
        }
    }
    let ok = worst < 1e-7 && flip < 1e-6 && checked > 0;
    Ok((
        ok,
        format!("{checked} layouts: max |E_lanczos - E_dense| = {worst:.1e} meV; spin-flip deviation {flip:.1e}"),
    ))
}

fn c11_noise() -> Outcome {
    let model = ModelConfig::default();
    let spec3 = wire_ansatz(3, &[0]).map_err(err)?;
    let mut exact_est = Vec::new();
    let mut noisy_est = Vec::new();
    let mut oracle = Vec::new();
    for (i, p) in linspace(-1.0, 1.0, DEFAULT_SWEEP_POINTS)
        .map_err(err)?
        .into_iter()
        .enumerate()
    {
        let layout = wire(3, p);
        let h = build_hamiltonian(&layout, &model).map_err(err)?;
        oracle.extend(ground_state_dense(&h).map_err(err)?.polarizations);
        let opt = OptimizerConfig::default();
        let e = run_vqe(&layout, &model, &spec3, &EstimatorConfig::exact(), &opt).map_err(err)?;
        exact_est.extend(e.polarizations);
        let noisy = EstimatorConfig::noisy(4096, 100 + i as u64, NoiseModel::default());
        let n = run_vqe(&layout, &model, &spec3, &noisy, &opt).map_err(err)?;
        noisy_est.extend(n.polarizations);
    }
    let rmse_exact = rmse(&exact_est, &oracle).map_err(err)?;
    let rmse_noisy = rmse(&noisy_est, &oracle).map_err(err)?;

    let spec30 = wire_ansatz(30, &spread_rotations(30, 6)).map_err(err)?;
    let layout30 = wire(30, 1.0);
    let opt = OptimizerConfig::default();
    let exact30 =
        run_vqe(&layout30, &model, &spec30, &EstimatorConfig::exact(), &opt).map_err(err)?;
    let noisy30 = run_vqe(
        &layout30,
        &model,
        &spec30,
        &EstimatorConfig::noisy(4096, 30, NoiseModel::default()),
        &opt,
    )
    .map_err(err)?;
    let exact_min = exact30
        .polarizations
        .iter()
        .map(|p| p.abs())
        .fold(1.0, f64::min);
    let noisy_min = noisy30
        .polarizations
        .iter()
        .map(|p| p.abs())
        .fold(1.0, f64::min);

    let ok = rmse_noisy > rmse_exact && noisy_min < 0.5 && exact_min >= 0.85;
    Ok((
        ok,
        format!(
            "wire(3) RMSE noisy {rmse_noisy:.4} vs exact {rmse_exact:.4}; wire(30) min|P| noisy {noisy_min:.3} (< 0.5), \
             exact {exact_min:.3} (>= 0.85); default noise p1={} p2={} readout={}",
            NoiseModel::default().p1,
            NoiseModel::default().p2,
            NoiseModel::default().p_readout
        ),
    ))
}

type Criterion = (u32, &'static str, u64, fn() -> Outcome);

const CRITERIA: [Criterion; 11] = [
    (1, "kink energy", 1, c1_kink),
    (2, "driver bias", 1, c2_driver_bias),
    (3, "single-cell VQE", 10, c3_single_cell),
    (4, "wire propagation", 300, c4_wires),
    (5, "inverter", 60, c5_inverter),
    (6, "majority gates", 600, c6_majority),
    (7, "shots study", 900, c7_shots),
    (8, "params study", 600, c8_params),
    (9, "simulator properties", 600, c9_simulator),
    (10, "oracle consistency", 600, c10_oracles),
    (11, "noise degradation", 1200, c11_noise),
];

fn main() {
    let selected: Vec<u32> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut failed = Vec::new();
    for (id, name, budget, run) in CRITERIA {
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let (ok, detail) = match outcome {
            Ok((ok, detail)) => (ok && within_budget(elapsed, budget), detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let verdict = if ok { "PASS" } else { "FAIL" };
        println!(
            "{verdict} criterion {id:>2} ({name}): {detail} [{:.2} s, budget {budget} s]",
            elapsed.as_secs_f64()
        );
        if !ok {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all selected criteria passed");
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
