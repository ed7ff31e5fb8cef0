//! The risk inclination operator
//! `H = (P - p₀)²/2m + m ω² (Q - q₀)²/2`, a harmonic oscillator in the
//! conjugate log-price variables, with `ω = 2π/θ`.
//!
//! Its ground energy ties the economic Planck constant to the characteristic
//! time: `E₀ · 2θ = h_E`. A noncommutative deformation of phase space
//! replaces `ħ_E` by `√(ħ_E² + Θ²)`.

use crate::strategy::{Representation, RiskParams, Strategy};
use crate::{Error, Result};

/// `√(ħ_E² + Θ²)`.
pub fn effective_planck(risk: &RiskParams) -> f64 {
    risk.effective_hbar()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RiskSpectrum {
    pub eigenvalues: Vec<f64>,
    pub risk: RiskParams,
}

/// The lowest `n_levels` eigenvalues `(n + 1/2) ħ_eff ω`.
pub fn spectrum(risk: &RiskParams, n_levels: usize) -> Result<RiskSpectrum> {
    if n_levels == 0 {
        return Err(Error::ContractViolation("spectrum needs at least one level".into()));
    }
    let quantum = effective_planck(risk) * risk.omega();
    Ok(RiskSpectrum { eigenvalues: (0..n_levels).map(|n| (n as f64 + 0.5) * quantum).collect(), risk: *risk })
}

/// Oscillator energy at a phase-space point, centred at the origin.
pub fn hamiltonian(risk: &RiskParams, p: f64, q: f64) -> f64 {
    let w = risk.omega();
    p * p / (2.0 * risk.m()) + 0.5 * risk.m() * w * w * q * q
}

/// `⟨H⟩` about the strategy's own means: `Var(p)/2m + m ω² Var(q)/2`.
pub fn risk_expectation(s: &Strategy, risk: &RiskParams) -> Result<f64> {
    if s.is_improper() {
        return Err(Error::ImproperState("risk of a committed (delta) strategy is unbounded".into()));
    }
    let hbar = effective_planck(risk);
    let sp = s.distribution_in(Representation::Supply, hbar)?.std();
    let sq = s.distribution_in(Representation::Demand, hbar)?.std();
    Ok(hamiltonian(risk, sp, sq))
}

/// Mean energy of the Gibbs mixture at inverse temperature `beta`:
/// `(ħω/2) coth(βħω/2)`.
pub fn thermal_energy(beta: f64, risk: &RiskParams) -> Result<f64> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::ParameterRange(format!("beta must be positive, got {beta}")));
    }
    Ok(1.0 / thermal_exponent(beta, risk))
}

/// `x = (2/ħω) tanh(βħω/2)`, the exponent of the thermal phase-space density
/// `(ω x / 2π) e^(-x H)`.
pub(crate) fn thermal_exponent(beta: f64, risk: &RiskParams) -> f64 {
    let quantum = effective_planck(risk) * risk.omega();
    2.0 / quantum * (0.5 * beta * quantum).tanh()
}
