//! Point-charge electrostatics of four-dot cells.
//!
//! Dots sit on the corners of a square of side `a`, numbered clockwise from
//! the top-left corner. State 1 (P = +1) puts the two electrons on dots 1
//! and 3, state 0 (P = -1) on dots 2 and 4.

use serde::{Deserialize, Serialize};

use crate::config::{ModelConfig, PhysicalConstants};
use crate::error::{QcaError, Result};
use crate::layout::GridPosition;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CellState {
    /// P = -1
    Zero,
    /// P = +1
    One,
}

impl CellState {
    pub fn polarization(self) -> f64 {
        match self {
            CellState::Zero => -1.0,
            CellState::One => 1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            CellState::Zero => CellState::One,
            CellState::One => CellState::Zero,
        }
    }
}

/// How the fixed background charge of a cell is modelled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ChargeModel {
    /// Two bare electrons, cell net charge -2q.
    Bare,
    /// Each dot also carries +q/2 so the cell is neutral.
    Neutralized,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellChargeConfiguration {
    /// Dot positions relative to the cell center, nm.
    pub dot_positions: [(f64, f64); 4],
    /// Dot charges in units of q.
    pub dot_charges: [f64; 4],
    pub state: CellState,
}

impl CellChargeConfiguration {
    pub fn new(state: CellState, a: f64, model: ChargeModel) -> Self {
        let h = a / 2.0;
        let dot_positions = [(-h, h), (h, h), (h, -h), (-h, -h)];
        let occupied = match state {
            CellState::One => [1.0, 0.0, 1.0, 0.0],
            CellState::Zero => [0.0, 1.0, 0.0, 1.0],
        };
        let background = match model {
            ChargeModel::Bare => 0.0,
            ChargeModel::Neutralized => 0.5,
        };
        Self {
            dot_positions,
            dot_charges: occupied.map(|o| background - o),
            state,
        }
    }

    /// P = ((ρ1 + ρ3) - (ρ2 + ρ4)) / Σρ over the mobile charge.
    pub fn polarization(&self) -> f64 {
        let mobile = match self.state {
            CellState::One => [1.0, 0.0, 1.0, 0.0],
            CellState::Zero => [0.0, 1.0, 0.0, 1.0],
        };
        let total: f64 = mobile.iter().sum();
        (mobile[0] + mobile[2] - mobile[1] - mobile[3]) / total
    }

    pub fn net_charge(&self) -> f64 {
        self.dot_charges.iter().sum()
    }
}

/// Coulomb energy between two cells whose centers differ by `offset`
/// (grid units of `a`), in meV.
pub fn pairwise_interaction(
    cell_a: &CellChargeConfiguration,
    cell_b: &CellChargeConfiguration,
    offset: GridPosition,
    constants: &PhysicalConstants,
) -> Result<f64> {
    constants.validate()?;
    let (ox, oy) = (offset.x as f64 * constants.a, offset.y as f64 * constants.a);
    let mut energy = 0.0;
    for (pa, qa) in cell_a.dot_positions.iter().zip(cell_a.dot_charges) {
        for (pb, qb) in cell_b.dot_positions.iter().zip(cell_b.dot_charges) {
            let r = (pb.0 + ox - pa.0).hypot(pb.1 + oy - pa.1);
            if r == 0.0 {
                return Err(QcaError::Domain(format!(
                    "coincident charges at offset {offset}"
                )));
            }
            energy += constants.coulomb_scale * qa * qb / r;
        }
    }
    Ok(energy)
}

/// E_βα table: cell A in state α, cell B in state β.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InteractionEnergies {
    pub e00: f64,
    pub e01: f64,
    pub e10: f64,
    pub e11: f64,
}

impl InteractionEnergies {
    pub fn get(&self, beta: CellState, alpha: CellState) -> f64 {
        match (beta, alpha) {
            (CellState::Zero, CellState::Zero) => self.e00,
            (CellState::Zero, CellState::One) => self.e01,
            (CellState::One, CellState::Zero) => self.e10,
            (CellState::One, CellState::One) => self.e11,
        }
    }

    /// Rows of (beta, alpha, energy) in the order 00, 01, 10, 11.
    pub fn rows(&self) -> [(u8, u8, f64); 4] {
        [
            (0, 0, self.e00),
            (0, 1, self.e01),
            (1, 0, self.e10),
            (1, 1, self.e11),
        ]
    }
}

pub fn interaction_table(
    offset: GridPosition,
    model: ChargeModel,
    constants: &PhysicalConstants,
) -> Result<InteractionEnergies> {
    let cfg = |s| CellChargeConfiguration::new(s, constants.a, model);
    let e = |beta, alpha| pairwise_interaction(&cfg(alpha), &cfg(beta), offset, constants);
    use CellState::{One, Zero};
    Ok(InteractionEnergies {
        e00: e(Zero, Zero)?,
        e01: e(Zero, One)?,
        e10: e(One, Zero)?,
        e11: e(One, One)?,
    })
}

/// Kink energies: the configured Hamiltonian coefficients next to the
/// values the point-charge model predicts for the same geometry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KinkEnergies {
    pub e_k: f64,
    pub e_k_diag: f64,
    /// e11 - e01 at a nearest-neighbor offset (negative: alignment favored).
    pub oracle_e_k: f64,
    /// e11 - e01 at a diagonal offset with neutralized cells.
    pub oracle_e_k_diag: f64,
}

pub fn kink_energies(config: &ModelConfig) -> Result<KinkEnergies> {
    let (nearest, diagonal) = oracle_kinks(&config.constants)?;
    Ok(KinkEnergies {
        e_k: config.e_k,
        e_k_diag: config.e_k_diag,
        oracle_e_k: nearest,
        oracle_e_k_diag: diagonal,
    })
}

fn oracle_kinks(constants: &PhysicalConstants) -> Result<(f64, f64)> {
    let near = interaction_table(GridPosition::new(2, 0), ChargeModel::Neutralized, constants)?;
    let diag = interaction_table(GridPosition::new(2, 2), ChargeModel::Neutralized, constants)?;
    Ok((near.e11 - near.e01, diag.e11 - diag.e01))
}

/// Driver-induced bias Δ on a single driven cell, meV.
pub fn driver_delta(p_drv: f64, constants: &PhysicalConstants) -> Result<f64> {
    if !(-1.0..=1.0).contains(&p_drv) {
        return Err(QcaError::Domain(format!(
            "driver polarization {p_drv} outside [-1, 1]"
        )));
    }
    constants.validate()?;
    let geometry = -1.0 / 3.0 - (2.0 * 2f64.sqrt() - 5f64.sqrt() - 1.0) / 10f64.sqrt();
    Ok(constants.coulomb_scale * p_drv / constants.a * geometry)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn consts() -> PhysicalConstants {
        PhysicalConstants::default()
    }

    #[test]
    fn charge_configurations() {
        for model in [ChargeModel::Bare, ChargeModel::Neutralized] {
            let one = CellChargeConfiguration::new(CellState::One, 1.0, model);
            let zero = CellChargeConfiguration::new(CellState::Zero, 1.0, model);
            assert_eq!(one.polarization(), 1.0);
            assert_eq!(zero.polarization(), -1.0);
            let expected = if model == ChargeModel::Bare {
                -2.0
            } else {
                0.0
            };
            assert_eq!(one.net_charge(), expected);
        }
    }

    #[test]
    fn nearest_kink_matches_294() {
        let t = interaction_table(GridPosition::new(2, 0), ChargeModel::Bare, &consts()).unwrap();
        assert!((t.e01 - t.e11 - 294.3).abs() < 0.1, "{t:?}");
        assert!((t.e00 - t.e11).abs() < 1e-9);
        assert!((t.e01 - t.e10).abs() < 1e-9);
        assert!(t.e01 > t.e11);
    }

    #[test]
    fn mirrored_offset_same_energy() {
        let c = consts();
        for (sa, sb) in [
            (CellState::One, CellState::Zero),
            (CellState::One, CellState::One),
        ] {
            let a = CellChargeConfiguration::new(sa, 1.0, ChargeModel::Bare);
            let b = CellChargeConfiguration::new(sb, 1.0, ChargeModel::Bare);
            let right = pairwise_interaction(&a, &b, GridPosition::new(2, 0), &c).unwrap();
            let left = pairwise_interaction(&a, &b, GridPosition::new(-2, 0), &c).unwrap();
            assert!((right - left).abs() < 1e-9);
        }
    }

    #[test]
    fn diagonal_neutralized_split() {
        let t = interaction_table(GridPosition::new(2, 2), ChargeModel::Neutralized, &consts())
            .unwrap();
        assert!((t.e11 - t.e01 - 65.7).abs() < 0.1, "{t:?}");
        assert!((t.e01 - t.e10).abs() < 1e-9);
        assert!(t.e01 < t.e00.min(t.e11));
        // symmetric +-32.85 split
        assert!((t.e11 - 32.84).abs() < 0.05 && (t.e01 + 32.84).abs() < 0.05);
    }

    #[test]
    fn neutralizer_is_state_symmetric_for_nearest() {
        let c = consts();
        let bare = interaction_table(GridPosition::new(2, 0), ChargeModel::Bare, &c).unwrap();
        let neut =
            interaction_table(GridPosition::new(2, 0), ChargeModel::Neutralized, &c).unwrap();
        let kb = bare.e01 - bare.e11;
        let kn = neut.e01 - neut.e11;
        assert!(((kb - kn) / kb).abs() < 1e-9);
    }

    #[test]
    fn global_flip_invariance_neutralized() {
        let c = consts();
        for off in [
            GridPosition::new(2, 0),
            GridPosition::new(2, 2),
            GridPosition::new(-2, 4),
        ] {
            for sa in [CellState::Zero, CellState::One] {
                for sb in [CellState::Zero, CellState::One] {
                    let mk = |s| CellChargeConfiguration::new(s, 1.0, ChargeModel::Neutralized);
                    let e = pairwise_interaction(&mk(sa), &mk(sb), off, &c).unwrap();
                    let f = pairwise_interaction(&mk(sa.flipped()), &mk(sb.flipped()), off, &c)
                        .unwrap();
                    assert!((e - f).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn overlapping_cells_rejected() {
        let a = CellChargeConfiguration::new(CellState::One, 1.0, ChargeModel::Bare);
        let r = pairwise_interaction(&a, &a, GridPosition::new(0, 0), &consts());
        assert!(matches!(r, Err(QcaError::Domain(_))));
    }

    #[test]
    fn kink_energy_defaults_and_scaling() {
        let k = kink_energies(&ModelConfig::default()).unwrap();
        assert_eq!((k.e_k, k.e_k_diag), (-294.3, 85.7));
        assert!((k.oracle_e_k + 294.3).abs() < 0.1);
        assert!((k.oracle_e_k_diag - 65.7).abs() < 0.1);

        let mut cfg = ModelConfig::default();
        cfg.constants.a = 2.0;
        let k2 = kink_energies(&cfg).unwrap();
        assert!((k2.oracle_e_k.abs() - 147.15).abs() < 0.1);

        cfg.constants.a = 1e9;
        let far = kink_energies(&cfg).unwrap();
        assert!(far.oracle_e_k.abs() < 1e-6 && far.oracle_e_k_diag.abs() < 1e-6);
    }

    #[test]
    fn driver_delta_values() {
        let c = consts();
        assert_eq!(driver_delta(0.0, &c).unwrap(), 0.0);
        assert!((driver_delta(1.0, &c).unwrap() + 294.4).abs() < 0.1);
        assert!((driver_delta(-0.5, &c).unwrap() - 147.2).abs() < 0.1);
        for p in [0.1, 0.37, 0.9, 1.0] {
            assert_eq!(driver_delta(-p, &c).unwrap(), -driver_delta(p, &c).unwrap());
        }
        assert!(driver_delta(1.01, &c).is_err());
        let t = interaction_table(GridPosition::new(2, 0), ChargeModel::Bare, &c).unwrap();
        assert!((driver_delta(1.0, &c).unwrap().abs() - (t.e01 - t.e11)).abs() < 0.1);
    }
}
