use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Variational ground-state experiments for QCA circuits.
#[derive(Debug, Parser)]
#[command(name = "qcavqe", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Binary wire of N cells driven from the left.
    Wire {
        /// Number of device cells.
        #[arg(long = "n", default_value_t = 3)]
        n: usize,
        /// Qubits carrying an Ry rotation, comma separated; must start at 0.
        #[arg(long, value_delimiter = ',', default_value = "0")]
        ry: Vec<usize>,
    },
    /// Six-cell inverter. Runs both driver signs unless --pdrv is given.
    Inverter,
    /// Majority-gate truth table over all eight fully polarized inputs.
    Majority {
        #[arg(long, value_enum, default_value_t = MajorityVariant::Majority6)]
        variant: MajorityVariant,
    },
    /// Single-cell response to the driver (default sweep -1:1:21).
    Response,
    /// Polarization RMSE against the exact ground state on wire(3) per shot budget.
    ShotsStudy {
        /// Shot budgets, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "1024,4096,16384,65536")]
        shot_list: Vec<u64>,
        /// Seeds per shot budget.
        #[arg(long, default_value_t = 10)]
        repeats: usize,
    },
    /// Optimizer evaluations against parameter count on wires of 1..=K cells.
    ParamsStudy {
        #[arg(long, default_value_t = 8)]
        max_params: usize,
        /// Perturbed starts per parameter count.
        #[arg(long, default_value_t = 10)]
        repeats: usize,
    },
    /// Interaction table E(beta, alpha) for two cells at the given grid offset, as CSV.
    Energies {
        #[arg(long, default_value_t = 2, allow_hyphen_values = true)]
        dx: i64,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        dy: i64,
        #[arg(long, value_enum, default_value_t = ChargeModelArg::Neutralized)]
        charges: ChargeModelArg,
    },
    /// Any layout read from a JSON file.
    Custom {
        #[arg(long)]
        layout: PathBuf,
        /// Rotation qubits for a chain ansatz; default is one Ry per cell.
        #[arg(long, value_delimiter = ',')]
        ry: Option<Vec<usize>>,
    },
}

#[derive(Debug, Args)]
pub struct Common {
    /// Driver polarization: a value V or a sweep LO:HI:STEPS.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub pdrv: Option<String>,
    #[arg(long, global = true, value_enum, default_value_t = ModeArg::Exact)]
    pub mode: ModeArg,
    /// Shots per measured basis in sampled modes.
    #[arg(long, global = true, default_value_t = 4096)]
    pub shots: u64,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Driver bias scale (1.0 or 0.5 in the reference studies).
    #[arg(long, global = true, default_value_t = 1.0)]
    pub scale: f64,
    /// Also solve exactly and report the oracle energy.
    #[arg(long, global = true)]
    pub oracle: bool,
    /// Independent optimizer starts; majority6 defaults to 3.
    #[arg(long, global = true)]
    pub restarts: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = MethodArg::Cobyla)]
    pub method: MethodArg,
    /// Objective evaluations allowed per start.
    #[arg(long, global = true, default_value_t = 500)]
    pub max_iter: usize,
    /// Single-qubit gate error probability (noisy mode).
    #[arg(long, global = true, default_value_t = 0.001)]
    pub p1: f64,
    /// Two-qubit gate error probability (noisy mode).
    #[arg(long, global = true, default_value_t = 0.01)]
    pub p2: f64,
    /// Readout flip probability (noisy mode).
    #[arg(long, global = true, default_value_t = 0.02)]
    pub p_readout: f64,
    /// CSV output; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// JSON log with records and summary.
    #[arg(long, global = true)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Exact,
    Sampled,
    Noisy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Cobyla,
    NelderMead,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MajorityVariant {
    Majority6,
    Majority2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ChargeModelArg {
    Bare,
    Neutralized,
}

/// Parse `V` or `LO:HI:STEPS`.
pub fn parse_pdrv(s: &str) -> Result<(f64, f64, usize), String> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |t: &str| {
        t.trim()
            .parse::<f64>()
            .map_err(|_| format!("bad number `{t}` in --pdrv"))
    };
    match parts.as_slice() {
        [v] => {
            let v = num(v)?;
            Ok((v, v, 1))
        }
        [lo, hi, steps] => {
            let steps = steps
                .trim()
                .parse::<usize>()
                .map_err(|_| format!("bad step count `{steps}` in --pdrv"))?;
            Ok((num(lo)?, num(hi)?, steps))
        }
        _ => Err(format!("--pdrv expects V or LO:HI:STEPS, got `{s}`")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pdrv_forms() {
        assert_eq!(parse_pdrv("0.5").unwrap(), (0.5, 0.5, 1));
        assert_eq!(parse_pdrv("-1:1:21").unwrap(), (-1.0, 1.0, 21));
        assert!(parse_pdrv("1:2").is_err());
        assert!(parse_pdrv("a").is_err());
        assert!(parse_pdrv("-1:1:x").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
