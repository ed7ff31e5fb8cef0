//! Dominant demand and supply curves.
//!
//! `F_d(ln c) = ∫_{-∞}^{ln c} W(p*, q) dq` on a fixed-`p` slice and
//! `F_s(ln c) = ∫_{-∞}^{ln(1/c)} W(p, q*) dp` on a fixed-`q` slice, each
//! renormalized by the slice mass. For a nonnegative density both are
//! distribution functions; a giffen can bend them backwards.

use crate::numerics::{cumulative, integrate, Grid};
use crate::{Error, Result};

use super::PhaseSpaceDensity;

/// Tabulated `F_d` (against `q = ln c`) and `F_s` (against its own upper
/// limit `p = ln(1/c)`).
#[derive(Debug, Clone)]
pub struct DominantCurves {
    q_grid: Grid,
    fd: Vec<f64>,
    p_grid: Grid,
    fs: Vec<f64>,
    /// `(p*, q*)`; `None` for curves built from full marginals.
    pub slices: Option<(f64, f64)>,
    /// False when the slice carried no net mass and was left unnormalized.
    pub fd_normalized: bool,
    pub fs_normalized: bool,
}

impl DominantCurves {
    pub fn fd_values(&self) -> &[f64] {
        &self.fd
    }

    pub fn fs_values(&self) -> &[f64] {
        &self.fs
    }

    pub fn q_grid(&self) -> &Grid {
        &self.q_grid
    }

    pub fn p_grid(&self) -> &Grid {
        &self.p_grid
    }

    /// `F_d` at log-price `lnc`.
    pub fn fd(&self, lnc: f64) -> f64 {
        lookup(&self.fd, &self.q_grid, lnc)
    }

    /// `F_s` at log-price `lnc`, i.e. the supply cumulative up to `-lnc`.
    pub fn fs(&self, lnc: f64) -> f64 {
        lookup(&self.fs, &self.p_grid, -lnc)
    }

    pub fn fd_monotone(&self) -> bool {
        monotone(&self.fd)
    }

    /// Monotonicity of `F_s` in its own argument `ln(1/c)`.
    pub fn fs_monotone(&self) -> bool {
        monotone(&self.fs)
    }

    /// `lnc,Fd,Fs` rows on the `q` grid.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["lnc", "Fd", "Fs"])?;
        for (x, fd) in self.q_grid.points().zip(&self.fd) {
            w.write_record(&[x.to_string(), fd.to_string(), self.fs(x).to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn lookup(values: &[f64], grid: &Grid, x: f64) -> f64 {
    if x <= grid.lo() {
        return values[0];
    }
    if x >= grid.hi() {
        return values[values.len() - 1];
    }
    let (i, t) = grid.locate(x).expect("inside the grid");
    if t == 0.0 {
        return values[i];
    }
    values[i] + t * (values[i + 1] - values[i])
}

fn monotone(values: &[f64]) -> bool {
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = 1e-9 * scale;
    values.windows(2).all(|w| w[1] >= w[0] - tol)
}

fn cumulative_normalized(f: &[f64], grid: &Grid) -> Result<(Vec<f64>, bool)> {
    let cum = cumulative(f, grid)?;
    let mass = *cum.last().expect("nonempty grid");
    let abs: Vec<f64> = f.iter().map(|v| v.abs()).collect();
    let scale = integrate(&abs, grid)?;
    if mass.abs() <= 1e-9 * scale || mass == 0.0 {
        return Ok((cum, false));
    }
    Ok((cum.iter().map(|c| c / mass).collect(), true))
}

// Linear interpolation of the density along one axis at `x`.
fn slice_along(axis_grid: &Grid, x: f64, pick: impl Fn(usize) -> Vec<f64>) -> Result<Vec<f64>> {
    let Some((i, t)) = axis_grid.locate(x) else {
        return Err(Error::ParameterRange(format!("slice {x} outside [{}, {}]", axis_grid.lo(), axis_grid.hi())));
    };
    let a = pick(i);
    if t == 0.0 {
        return Ok(a);
    }
    let b = pick(i + 1);
    Ok(a.iter().zip(&b).map(|(u, v)| u + t * (v - u)).collect())
}

/// Slice curves at `p = p_slice`, `q = q_slice`; each defaults to the
/// density's mean.
pub fn dominant_curves(d: &PhaseSpaceDensity, p_slice: Option<f64>, q_slice: Option<f64>) -> Result<DominantCurves> {
    let (p_star, q_star) = match (p_slice, q_slice) {
        (Some(p), Some(q)) => (p, q),
        _ => {
            let m = d.moments();
            (p_slice.unwrap_or(m.mean_p), q_slice.unwrap_or(m.mean_q))
        }
    };
    let row = slice_along(d.p_grid(), p_star, |i| d.values().row(i).to_vec())?;
    let col = slice_along(d.q_grid(), q_star, |j| d.values().column(j).to_vec())?;
    let (fd, fd_normalized) = cumulative_normalized(&row, d.q_grid())?;
    let (fs, fs_normalized) = cumulative_normalized(&col, d.p_grid())?;
    Ok(DominantCurves {
        q_grid: *d.q_grid(),
        fd,
        p_grid: *d.p_grid(),
        fs,
        slices: Some((p_star, q_star)),
        fd_normalized,
        fs_normalized,
    })
}

/// The same curves built from the full marginals `∫W dp` and `∫W dq`.
pub fn marginal_curves(d: &PhaseSpaceDensity) -> Result<DominantCurves> {
    let (fd, fd_normalized) = cumulative_normalized(&d.marginal_q(), d.q_grid())?;
    let (fs, fs_normalized) = cumulative_normalized(&d.marginal_p(), d.p_grid())?;
    Ok(DominantCurves { q_grid: *d.q_grid(), fd, p_grid: *d.p_grid(), fs, slices: None, fd_normalized, fs_normalized })
}
