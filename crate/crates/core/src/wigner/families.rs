//! Closed-form phase-space densities.

use std::f64::consts::PI;

use crate::numerics::special::{for_each_weighted_laguerre, weighted_laguerre};
use crate::numerics::Grid;
use crate::risk::{effective_planck, hamiltonian, thermal_exponent};
use crate::strategy::RiskParams;
use crate::{Error, Result};

use super::{DensityKind, PhaseSpaceDensity};

/// Highest oscillator level accepted by [`excited_wigner`].
pub const EXCITED_MAX: usize = 512;

/// Parameters of the correlated coherent strategy centred at `(p0, q0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherentParams {
    pub r: f64,
    pub eta: f64,
    pub p0: f64,
    pub q0: f64,
}

impl CoherentParams {
    pub fn new(r: f64, eta: f64, p0: f64, q0: f64) -> Result<Self> {
        if !(r.abs() <= 1.0) {
            return Err(Error::InvalidParameter(format!("correlation must lie in [-1, 1], got {r}")));
        }
        if !(eta.is_finite() && eta > 0.0) {
            return Err(Error::InvalidParameter(format!("eta must be positive, got {eta}")));
        }
        if !(p0.is_finite() && q0.is_finite()) {
            return Err(Error::InvalidParameter("coherent centre must be finite".into()));
        }
        Ok(Self { r, eta, p0, q0 })
    }

    /// `Δp = ħ/2η`.
    pub fn delta_p(&self, hbar: f64) -> f64 {
        hbar / (2.0 * self.eta)
    }

    /// `Δq = η/√(1 - r²)`.
    pub fn delta_q(&self) -> f64 {
        self.eta / (1.0 - self.r * self.r).sqrt()
    }
}

/// Bivariate Gaussian
/// `W ∝ exp(-[P²/Δp² + 2r PQ/(ΔpΔq) + Q²/Δq²] / 2(1-r²))` with
/// `P = p - p0`, `Q = q - q0`. The `+2r` cross term makes the `p`-`q`
/// correlation of the density equal to `-r`.
pub fn coherent_wigner(c: &CoherentParams, hbar: f64, p_grid: &Grid, q_grid: &Grid) -> Result<PhaseSpaceDensity> {
    if c.r.abs() >= 1.0 {
        return Err(Error::DegenerateDensity(format!("|r| = {} collapses the q dispersion", c.r.abs())));
    }
    let (dp, dq) = (c.delta_p(hbar), c.delta_q());
    let s = 1.0 - c.r * c.r;
    let norm = 1.0 / (2.0 * PI * dp * dq * s.sqrt());
    PhaseSpaceDensity::from_fn(*p_grid, *q_grid, hbar, DensityKind::Pure, |p, q| {
        let (u, v) = ((p - c.p0) / dp, (q - c.q0) / dq);
        norm * (-(u * u + 2.0 * c.r * u * v + v * v) / (2.0 * s)).exp()
    })
}

/// Wigner function of the `n`-th risk eigenstate,
/// `((-1)^n/πħ) e^(-2H/ħω) L_n(4H/ħω)`, with `ħ` the effective constant.
pub fn excited_wigner(n: usize, risk: &RiskParams, p_grid: &Grid, q_grid: &Grid) -> Result<PhaseSpaceDensity> {
    if n > EXCITED_MAX {
        return Err(Error::ParameterRange(format!("level {n} exceeds {EXCITED_MAX}")));
    }
    let hbar = effective_planck(risk);
    let quantum = hbar * risk.omega();
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    PhaseSpaceDensity::from_fn(*p_grid, *q_grid, hbar, DensityKind::Pure, |p, q| {
        sign / (PI * hbar) * weighted_laguerre(n, 4.0 * hamiltonian(risk, p, q) / quantum)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThermalMode {
    ClosedForm,
    /// Gibbs-weighted sum of the first `N` excited densities.
    Series(usize),
}

// Gibbs weights (1 - e^(-βħω)) e^(-nβħω), renormalized over `n` terms.
fn gibbs_weights(beta: f64, quantum: f64, n: usize) -> Vec<f64> {
    let z = (-beta * quantum).exp();
    let mut w: Vec<f64> = Vec::with_capacity(n);
    let mut v = 1.0 - z;
    for _ in 0..n {
        w.push(v);
        v *= z;
    }
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    w
}

/// Number of Gibbs weights recorded on a closed-form thermal density.
const RECORDED_WEIGHTS: usize = 4096;

/// Gibbs mixture of the risk eigenstates at inverse temperature `beta`.
pub fn thermal_wigner(
    beta: f64,
    risk: &RiskParams,
    p_grid: &Grid,
    q_grid: &Grid,
    mode: ThermalMode,
) -> Result<PhaseSpaceDensity> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::ParameterRange(format!("beta must be positive, got {beta}")));
    }
    let hbar = effective_planck(risk);
    let quantum = hbar * risk.omega();
    match mode {
        ThermalMode::ClosedForm => {
            let x = thermal_exponent(beta, risk);
            // keep the weights down to double-precision insignificance
            let needed = (37.0 / (beta * quantum)).ceil().max(1.0) as usize;
            let weights = gibbs_weights(beta, quantum, needed.min(RECORDED_WEIGHTS));
            let pref = risk.omega() * x / (2.0 * PI);
            PhaseSpaceDensity::from_fn(*p_grid, *q_grid, hbar, DensityKind::Mixture { weights }, |p, q| {
                pref * (-x * hamiltonian(risk, p, q)).exp()
            })
        }
        ThermalMode::Series(n) => {
            if n == 0 {
                return Err(Error::ParameterRange("thermal series needs at least one term".into()));
            }
            let weights = gibbs_weights(beta, quantum, n);
            let signed: Vec<f64> =
                weights.iter().enumerate().map(|(k, w)| (if k % 2 == 0 { *w } else { -*w }) / (PI * hbar)).collect();
            PhaseSpaceDensity::from_fn(*p_grid, *q_grid, hbar, DensityKind::Mixture { weights }, |p, q| {
                let mut acc = 0.0;
                for_each_weighted_laguerre(n - 1, 4.0 * hamiltonian(risk, p, q) / quantum, |k, l| {
                    acc += signed[k] * l;
                });
                acc
            })
        }
    }
}

/// Grids covering `±half` standard deviations of the thermal density in
/// each variable.
pub fn thermal_grids(beta: f64, risk: &RiskParams, half: f64, n: usize) -> Result<(Grid, Grid)> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::ParameterRange(format!("beta must be positive, got {beta}")));
    }
    let x = thermal_exponent(beta, risk);
    let (m, w) = (risk.m(), risk.omega());
    let sp = (m / x).sqrt();
    let sq = (1.0 / (x * m * w * w)).sqrt();
    Ok((Grid::centered(0.0, half * sp, n)?, Grid::centered(0.0, half * sq, n)?))
}
