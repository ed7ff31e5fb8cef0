//! Phase-space layer.
//!
//! A strategy's Wigner function is the real pseudo-density
//!
//! ```text
//! W(p, q) = (1/πħ) ∫ ψ(q+y) ψ*(q-y) e^(-2ipy/ħ) dy
//! ```
//!
//! whose marginals are `|⟨q|ψ⟩|²` and `|⟨p|ψ⟩|²` under the Fourier
//! convention of [`crate::numerics::fourier_q_to_p`]. It may be negative;
//! densities with negative regions are called giffens, because their
//! cumulative demand/supply curves can be non-monotone.

mod curves;
mod families;

use ndarray::Array2;
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::numerics::{integrate, Grid};
use crate::strategy::{Form, Representation, Strategy};
use crate::{Error, Result};

pub use curves::{dominant_curves, marginal_curves, DominantCurves};
pub use families::{
    coherent_wigner, excited_wigner, thermal_grids, thermal_wigner, CoherentParams, ThermalMode, EXCITED_MAX,
};

/// Relative negativity threshold separating quadrature noise from genuine
/// negative regions.
pub const DEFAULT_NEGATIVITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum DensityKind {
    Pure,
    /// `Σ w_n W_n` with `w_n ≥ 0`, `Σ w_n = 1`.
    Mixture {
        weights: Vec<f64>,
    },
}

/// Real function on a `p × q` grid (rows indexed by `p`, columns by `q`).
#[derive(Debug, Clone)]
pub struct PhaseSpaceDensity {
    p_grid: Grid,
    q_grid: Grid,
    values: Array2<f64>,
    hbar: f64,
    kind: DensityKind,
}

/// First and second moments of a density by quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseMoments {
    pub mass: f64,
    pub mean_p: f64,
    pub mean_q: f64,
    pub std_p: f64,
    pub std_q: f64,
    /// Correlation coefficient between `p` and `q`.
    pub corr: f64,
}

impl PhaseSpaceDensity {
    pub fn new(p_grid: Grid, q_grid: Grid, values: Array2<f64>, hbar: f64, kind: DensityKind) -> Result<Self> {
        if values.dim() != (p_grid.n(), q_grid.n()) {
            return Err(Error::ContractViolation(format!(
                "values of shape {:?} for a {}x{} grid",
                values.dim(),
                p_grid.n(),
                q_grid.n()
            )));
        }
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(Error::InvalidParameter(format!("hbar must be positive, got {hbar}")));
        }
        if let DensityKind::Mixture { weights } = &kind {
            let total: f64 = weights.iter().sum();
            if weights.iter().any(|w| !(*w >= 0.0)) || (total - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidParameter("mixture weights must be nonnegative and sum to 1".into()));
            }
        }
        Ok(Self { p_grid, q_grid, values, hbar, kind })
    }

    /// Evaluates `f(p, q)` on the grid, rows in parallel.
    pub fn from_fn<F>(p_grid: Grid, q_grid: Grid, hbar: f64, kind: DensityKind, f: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> f64 + Sync,
    {
        let rows: Vec<Vec<f64>> = (0..p_grid.n())
            .into_par_iter()
            .map(|i| {
                let p = p_grid.point(i);
                q_grid.points().map(|q| f(p, q)).collect()
            })
            .collect();
        let values =
            Array2::from_shape_vec((p_grid.n(), q_grid.n()), rows.concat()).expect("row lengths match the grid");
        Self::new(p_grid, q_grid, values, hbar, kind)
    }

    pub fn p_grid(&self) -> &Grid {
        &self.p_grid
    }

    pub fn q_grid(&self) -> &Grid {
        &self.q_grid
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn kind(&self) -> &DensityKind {
        &self.kind
    }

    /// `∫ W dp` as a function of `q` (one entry per q-grid point).
    pub fn marginal_q(&self) -> Vec<f64> {
        self.values
            .columns()
            .into_iter()
            .map(|c| integrate(&c.to_vec(), &self.p_grid).expect("column length"))
            .collect()
    }

    /// `∫ W dq` as a function of `p`.
    pub fn marginal_p(&self) -> Vec<f64> {
        self.values.rows().into_iter().map(|r| integrate(&r.to_vec(), &self.q_grid).expect("row length")).collect()
    }

    pub fn total_mass(&self) -> f64 {
        integrate(&self.marginal_p(), &self.p_grid).expect("marginal length")
    }

    fn expect_fn(&self, f: impl Fn(f64, f64) -> f64) -> f64 {
        let rows: Vec<f64> = self
            .values
            .rows()
            .into_iter()
            .enumerate()
            .map(|(i, r)| {
                let p = self.p_grid.point(i);
                let g: Vec<f64> = r.iter().zip(self.q_grid.points()).map(|(w, q)| w * f(p, q)).collect();
                integrate(&g, &self.q_grid).expect("row length")
            })
            .collect();
        integrate(&rows, &self.p_grid).expect("row count")
    }

    pub fn moments(&self) -> PhaseMoments {
        let mass = self.total_mass();
        let mean_p = self.expect_fn(|p, _| p) / mass;
        let mean_q = self.expect_fn(|_, q| q) / mass;
        let var_p = self.expect_fn(|p, _| (p - mean_p).powi(2)) / mass;
        let var_q = self.expect_fn(|_, q| (q - mean_q).powi(2)) / mass;
        let cov = self.expect_fn(|p, q| (p - mean_p) * (q - mean_q)) / mass;
        let (std_p, std_q) = (var_p.max(0.0).sqrt(), var_q.max(0.0).sqrt());
        PhaseMoments { mass, mean_p, mean_q, std_p, std_q, corr: cov / (std_p * std_q) }
    }

    /// Smallest grid value and its `(p, q)` location.
    pub fn min(&self) -> (f64, (f64, f64)) {
        let mut best = (f64::INFINITY, (0, 0));
        for ((i, j), &v) in self.values.indexed_iter() {
            if v < best.0 {
                best = (v, (i, j));
            }
        }
        (best.0, (self.p_grid.point(best.1 .0), self.q_grid.point(best.1 .1)))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Writes `p,q,w` rows, `p` outermost.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["p", "q", "w"])?;
        for ((i, j), v) in self.values.indexed_iter() {
            w.write_record(&[self.p_grid.point(i).to_string(), self.q_grid.point(j).to_string(), v.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Convex combination `Σ w_n W_n` of densities on identical grids.
pub fn mixture(components: &[(f64, PhaseSpaceDensity)]) -> Result<PhaseSpaceDensity> {
    let Some((_, first)) = components.first() else {
        return Err(Error::ContractViolation("mixture needs at least one component".into()));
    };
    let total: f64 = components.iter().map(|c| c.0).sum();
    if components.iter().any(|c| !(c.0 >= 0.0)) || !(total > 0.0) {
        return Err(Error::InvalidParameter("mixture weights must be nonnegative".into()));
    }
    let mut values = Array2::zeros(first.values.dim());
    for (w, d) in components {
        if d.p_grid != first.p_grid || d.q_grid != first.q_grid {
            return Err(Error::ContractViolation("mixture components must share grids".into()));
        }
        values.scaled_add(w / total, &d.values);
    }
    PhaseSpaceDensity::new(
        first.p_grid,
        first.q_grid,
        values,
        first.hbar,
        DensityKind::Mixture { weights: components.iter().map(|c| c.0 / total).collect() },
    )
}

/// Grids spanning the strategy's extent in both pictures.
pub fn phase_space_grids(s: &Strategy, hbar: f64, n_p: usize, n_q: usize) -> Result<(Grid, Grid)> {
    let (q0, q1) = s.extent(Representation::Demand, hbar)?;
    let (p0, p1) = s.extent(Representation::Supply, hbar)?;
    Ok((Grid::new(p0, p1, n_p)?, Grid::new(q0, q1, n_q)?))
}

type AmplitudeFn<'a> = Box<dyn Fn(f64) -> C64 + Sync + 'a>;

// The strategy's amplitudes in `rep`, analytic where possible.
fn amplitudes_in<'a>(s: &'a Strategy, rep: Representation, hbar: f64) -> Result<AmplitudeFn<'a>> {
    if rep == s.representation() {
        return Ok(Box::new(move |x| s.amplitude_at(x).expect("proper strategy")));
    }
    if !matches!(s.form(), Form::Sampled { .. }) {
        return Ok(Box::new(move |x| s.conjugate_amplitude_at(x, hbar).expect("analytic conjugate")));
    }
    let table = s.conjugate_sampled(hbar)?;
    Ok(Box::new(move |x| table.amplitude_at(x).expect("sampled")))
}

/// Numerical Wigner transform of a normalizable strategy (demand-picture
/// integral).
pub fn wigner_transform(s: &Strategy, p_grid: &Grid, q_grid: &Grid, hbar: f64) -> Result<PhaseSpaceDensity> {
    transform_via(s, p_grid, q_grid, hbar, Representation::Demand)
}

/// Same density from the supply-picture integral
/// `W = (1/πħ) ∫ φ(p+v) φ*(p-v) e^(2iqv/ħ) dv`.
pub fn wigner_transform_supply(s: &Strategy, p_grid: &Grid, q_grid: &Grid, hbar: f64) -> Result<PhaseSpaceDensity> {
    transform_via(s, p_grid, q_grid, hbar, Representation::Supply)
}

fn transform_via(
    s: &Strategy,
    p_grid: &Grid,
    q_grid: &Grid,
    hbar: f64,
    via: Representation,
) -> Result<PhaseSpaceDensity> {
    if s.is_improper() {
        return Err(Error::ImproperState("Wigner transform of an improper strategy".into()));
    }
    if !(hbar.is_finite() && hbar > 0.0) {
        return Err(Error::InvalidParameter(format!("hbar must be positive, got {hbar}")));
    }
    let norm = s.norm_sq()?;
    let f = amplitudes_in(s, via, hbar)?;
    let (lo, hi) = s.extent(via, hbar)?;
    let (c_lo, c_hi) = s.extent(via.conjugate(), hbar)?;
    let (outer, inner, sign) = match via {
        Representation::Demand => (q_grid, p_grid, -1.0),
        Representation::Supply => (p_grid, q_grid, 1.0),
    };
    // the y-sum is periodic in the conjugate variable with period πħ/h;
    // keep aliased copies off the inner grid
    let reach = (inner.hi() - c_lo).abs().max((c_hi - inner.lo()).abs());
    let h = (std::f64::consts::PI * hbar / (1.5 * reach)).min((hi - lo) / 64.0);

    let rows: Vec<Vec<f64>> = (0..outer.n())
        .into_par_iter()
        .map(|i| {
            let x = outer.point(i);
            let room = (x - lo).min(hi - x);
            if room < 0.0 {
                return vec![0.0; inner.n()];
            }
            let k_max = (room / h).floor() as usize;
            let center = f(x).norm_sqr();
            let corr: Vec<C64> = (1..=k_max)
                .map(|k| {
                    let y = k as f64 * h;
                    f(x + y) * f(x - y).conj()
                })
                .collect();
            inner
                .points()
                .map(|k| {
                    let step = C64::from_polar(1.0, sign * 2.0 * k * h / hbar);
                    let mut rot = step;
                    let mut acc = 0.0;
                    for c in &corr {
                        acc += (c * rot).re;
                        rot *= step;
                    }
                    h * (center + 2.0 * acc) / (std::f64::consts::PI * hbar * norm)
                })
                .collect()
        })
        .collect();

    let mut values = Array2::zeros((p_grid.n(), q_grid.n()));
    for (i, row) in rows.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            match via {
                Representation::Demand => values[[j, i]] = *v,
                Representation::Supply => values[[i, j]] = *v,
            }
        }
    }
    PhaseSpaceDensity::new(*p_grid, *q_grid, values, hbar, DensityKind::Pure)
}

/// Result of a negativity scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GiffenReport {
    pub is_giffen: bool,
    pub min_value: f64,
    /// `(p, q)` of the minimum.
    pub witness: (f64, f64),
}

/// Flags densities whose minimum lies below `-tol`. The default tolerance is
/// [`DEFAULT_NEGATIVITY_TOL`] times the largest absolute value.
pub fn is_giffen(d: &PhaseSpaceDensity, tol: Option<f64>) -> GiffenReport {
    let tol = tol.unwrap_or(DEFAULT_NEGATIVITY_TOL * d.max_abs());
    let (min_value, witness) = d.min();
    GiffenReport { is_giffen: min_value < -tol, min_value, witness }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HudsonClass {
    GaussianPositive,
    NonGaussianNegative,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HudsonReport {
    pub class: HudsonClass,
    pub min_value: f64,
    pub witness: (f64, f64),
}

/// Points per axis of the grid used by [`hudson_check`].
pub const HUDSON_GRID_POINTS: usize = 201;

/// Classifies a pure strategy by the sign of its Wigner function: only
/// Gaussian pure states are nonnegative everywhere.
pub fn hudson_check(s: &Strategy, hbar: f64) -> Result<HudsonReport> {
    let (pg, qg) = phase_space_grids(s, hbar, HUDSON_GRID_POINTS, HUDSON_GRID_POINTS)?;
    hudson_check_density(&wigner_transform(s, &pg, &qg, hbar)?)
}

/// Hudson classification of a tabulated density; only meaningful for pure
/// states, so mixtures are rejected.
pub fn hudson_check_density(d: &PhaseSpaceDensity) -> Result<HudsonReport> {
    if let DensityKind::Mixture { .. } = d.kind() {
        return Err(Error::ContractViolation("Hudson's theorem concerns pure states".into()));
    }
    let g = is_giffen(d, None);
    let class = if g.is_giffen { HudsonClass::NonGaussianNegative } else { HudsonClass::GaussianPositive };
    Ok(HudsonReport { class, min_value: g.min_value, witness: g.witness })
}

#[cfg(test)]
mod tests;
