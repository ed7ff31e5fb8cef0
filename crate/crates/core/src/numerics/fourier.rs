use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rustfft::FftPlanner;

use super::Grid;
use crate::{Error, Result};

/// Spacing of the reciprocal grid: `Δp Δq = 2πħ / n`.
pub fn reciprocal_step(grid: &Grid, hbar: f64) -> f64 {
    2.0 * PI * hbar / (grid.n() as f64 * grid.spacing())
}

/// Demand to supply picture,
/// `⟨p|ψ⟩ = (2πħ)^(-1/2) ∫ e^(-ipq/ħ) ⟨q|ψ⟩ dq`,
/// sampled on the reciprocal grid centred at `p = 0`.
///
/// The discrete transform is unitary with respect to the Riemann-sum inner
/// products on the two grids.
pub fn fourier_q_to_p(amplitudes: &[C64], grid_q: &Grid, hbar: f64) -> Result<(Vec<C64>, Grid)> {
    fourier_q_to_p_about(amplitudes, grid_q, hbar, 0.0)
}

/// As [`fourier_q_to_p`], with the reciprocal grid centred near `p_center`.
pub fn fourier_q_to_p_about(amplitudes: &[C64], grid_q: &Grid, hbar: f64, p_center: f64) -> Result<(Vec<C64>, Grid)> {
    check(amplitudes, grid_q, hbar)?;
    let dp = reciprocal_step(grid_q, hbar);
    let p_lo = p_center - (grid_q.n() / 2) as f64 * dp;
    let grid_p = Grid::from_step(p_lo, dp, grid_q.n())?;
    let out = transform(amplitudes, grid_q, &grid_p, hbar, Direction::Forward);
    Ok((out, grid_p))
}

/// Supply to demand picture, the inverse of [`fourier_q_to_p`]; the output
/// grid starts at `q_lo`.
pub fn fourier_p_to_q(amplitudes: &[C64], grid_p: &Grid, hbar: f64, q_lo: f64) -> Result<(Vec<C64>, Grid)> {
    check(amplitudes, grid_p, hbar)?;
    let grid_q = Grid::from_step(q_lo, reciprocal_step(grid_p, hbar), grid_p.n())?;
    let out = transform(amplitudes, grid_p, &grid_q, hbar, Direction::Inverse);
    Ok((out, grid_q))
}

/// Band-limited interpolation of samples onto a grid `factor` times finer
/// over the same span, by zero-padding the spectrum. `p_center` should sit
/// near the middle of the spectral content (for `ħ = 1`).
pub fn refine(amplitudes: &[C64], grid: &Grid, p_center: f64, factor: usize) -> Result<(Vec<C64>, Grid)> {
    if factor == 0 {
        return Err(Error::InvalidParameter("refinement factor must be positive".into()));
    }
    let (phi, gp) = fourier_q_to_p_about(amplitudes, grid, 1.0, p_center)?;
    let n = grid.n();
    let pad = (n * factor - n) / 2;
    let mut padded = vec![C64::new(0.0, 0.0); n * factor];
    padded[pad..pad + n].copy_from_slice(&phi);
    let wide = Grid::from_step(gp.lo() - pad as f64 * gp.spacing(), gp.spacing(), n * factor)?;
    fourier_p_to_q(&padded, &wide, 1.0, grid.lo())
}

fn check(amplitudes: &[C64], grid: &Grid, hbar: f64) -> Result<()> {
    if !(hbar.is_finite() && hbar > 0.0) {
        return Err(Error::InvalidParameter(format!("hbar must be positive, got {hbar}")));
    }
    if amplitudes.len() != grid.n() {
        return Err(Error::ContractViolation(format!(
            "{} amplitudes for a grid of {} points",
            amplitudes.len(),
            grid.n()
        )));
    }
    Ok(())
}

#[derive(Clone, Copy)]
enum Direction {
    Forward,
    Inverse,
}

// out_j = (2πħ)^(-1/2) dy Σ_k e^(s i x_j y_k / ħ) in_k, with x_j = x0 + j dx,
// y_k = y0 + k dy and dx dy = 2πħ/n, so the jk term is an exact DFT kernel.
fn transform(input: &[C64], from: &Grid, to: &Grid, hbar: f64, dir: Direction) -> Vec<C64> {
    let n = input.len();
    let s = match dir {
        Direction::Forward => -1.0,
        Direction::Inverse => 1.0,
    };
    let (y0, dy) = (from.lo(), from.spacing());
    let (x0, dx) = (to.lo(), to.spacing());

    let mut buf: Vec<C64> =
        input.iter().enumerate().map(|(k, &a)| a * C64::from_polar(1.0, s * x0 * k as f64 * dy / hbar)).collect();

    let mut planner = FftPlanner::new();
    let fft = match dir {
        Direction::Forward => planner.plan_fft_forward(n),
        Direction::Inverse => planner.plan_fft_inverse(n),
    };
    fft.process(&mut buf);

    let scale = dy / (2.0 * PI * hbar).sqrt();
    buf.iter()
        .enumerate()
        .map(|(j, &b)| {
            let phase = s * (x0 * y0 + j as f64 * dx * y0) / hbar;
            b * C64::from_polar(scale, phase)
        })
        .collect()
}
