//! Physical constants and Hamiltonian model parameters.

use serde::{Deserialize, Serialize};

use crate::error::{QcaError, Result};

/// e²/(4πε₀) in meV·nm.
pub const COULOMB_MEV_NM: f64 = 1439.964;

/// Thermal energy at 300 K in meV.
pub const KT_ROOM_MEV: f64 = 25.85;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    /// Coulomb prefactor q²/(4πε₀), meV·nm.
    pub coulomb_scale: f64,
    /// Intracell tunneling energy, meV.
    pub gamma: f64,
    /// Dot spacing (side of the cell square), nm. Cell pitch is `2a`.
    pub a: f64,
    /// Room-temperature thermal energy, meV.
    pub kt_room: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self {
            coulomb_scale: COULOMB_MEV_NM,
            gamma: 50.0,
            a: 1.0,
            kt_room: KT_ROOM_MEV,
        }
    }
}

impl PhysicalConstants {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("coulomb_scale", self.coulomb_scale),
            ("gamma", self.gamma),
            ("a", self.a),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(QcaError::Domain(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Coefficients used when turning a layout into a Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub constants: PhysicalConstants,
    /// Nearest-neighbor kink energy, meV.
    pub e_k: f64,
    /// Diagonal (next-nearest) kink energy, meV.
    pub e_k_diag: f64,
    /// Multiplier on driver-induced Z biases. 1.0 treats drivers like any
    /// other coupled cell; 0.5 gives the single-cell `-(Δ/2) Z` bias.
    pub driver_bias_scale: f64,
    pub include_driver_diagonals: bool,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            constants: PhysicalConstants::default(),
            e_k: -294.3,
            e_k_diag: 85.7,
            driver_bias_scale: 1.0,
            include_driver_diagonals: true,
        }
    }
}

impl ModelConfig {
    pub fn with_bias_scale(mut self, scale: f64) -> Self {
        self.driver_bias_scale = scale;
        self
    }
}
