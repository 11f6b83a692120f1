//! Gate counting for quantum Fourier transform circuits.
//!
//! The standard l-qubit QFT applies one Hadamard per qubit, a controlled
//! rotation for every qubit pair, and floor(l/2) final SWAPs to reverse the
//! qubit order. Circuit size (and therefore execution time) grows
//! quadratically in l through the controlled-rotation term. These counts feed
//! qubit-demand and execution-time value sets for the planner's scenarios.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QftError {
    #[error("circuit needs at least one qubit")]
    ZeroQubits,
    #[error("negative per-gate time {0}")]
    NegativeGateTime(f64),
}

/// Gate inventory of one QFT circuit.
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitProfile {
    pub qubits: u32,
    pub hadamard_count: u64,
    pub controlled_rotation_count: u64,
    pub swap_count: u64,
    /// Execution-time estimate under [`GateTimes::default`], in seconds.
    pub estimated_time: f64,
}

/// Per-gate-kind execution times, in seconds.
///
/// The defaults are chosen so that a 14-qubit profile lands inside the
/// 0.001-0.009 s waiting-time band the planner works with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateTimes {
    pub hadamard: f64,
    pub controlled_rotation: f64,
    pub swap: f64,
}

impl Default for GateTimes {
    fn default() -> Self {
        Self {
            hadamard: 3e-5,
            controlled_rotation: 8e-5,
            swap: 3e-5,
        }
    }
}

/// Bit length of `n`; 1 for both 0 and 1.
pub fn qubits_for_number(n: u64) -> u32 {
    (64 - n.leading_zeros()).max(1)
}

/// Gate counts of the standard l-qubit QFT.
pub fn qft_gate_counts(l: u32) -> Result<CircuitProfile, QftError> {
    if l < 1 {
        return Err(QftError::ZeroQubits);
    }
    let l64 = l as u64;
    let mut profile = CircuitProfile {
        qubits: l,
        hadamard_count: l64,
        controlled_rotation_count: l64 * (l64 - 1) / 2,
        swap_count: l64 / 2,
        estimated_time: 0.0,
    };
    profile.estimated_time = estimate_execution_time(&profile, &GateTimes::default())?;
    Ok(profile)
}

/// Weighted sum of the profile's gate counts.
pub fn estimate_execution_time(
    profile: &CircuitProfile,
    times: &GateTimes,
) -> Result<f64, QftError> {
    for t in [times.hadamard, times.controlled_rotation, times.swap] {
        if t < 0.0 || !t.is_finite() {
            return Err(QftError::NegativeGateTime(t));
        }
    }
    Ok(profile.hadamard_count as f64 * times.hadamard
        + profile.controlled_rotation_count as f64 * times.controlled_rotation
        + profile.swap_count as f64 * times.swap)
}
