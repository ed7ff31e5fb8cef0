use super::special::normal_cdf;
use super::{cumulative, Grid, RandomSource};
use crate::{Error, Result};

/// One-dimensional price distribution: the squared modulus of a strategy in
/// one picture, normalized to unit mass.
#[derive(Debug, Clone)]
pub enum Distribution {
    /// Finitely many point masses (delta and discrete strategies). `locs` is
    /// sorted ascending; `cum[i]` is the mass of `locs[..=i]`.
    Atoms {
        locs: Vec<f64>,
        weights: Vec<f64>,
        cum: Vec<f64>,
    },
    Normal {
        mean: f64,
        std: f64,
    },
    /// Density sampled on a grid, with its running integral.
    Tabulated {
        grid: Grid,
        pdf: Vec<f64>,
        cdf: Vec<f64>,
    },
}

impl Distribution {
    pub fn point(location: f64) -> Self {
        Self::Atoms { locs: vec![location], weights: vec![1.0], cum: vec![1.0] }
    }

    /// Atoms from `(location, weight)` pairs; weights are normalized and equal
    /// locations merged.
    pub fn atoms(pairs: &[(f64, f64)]) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::ContractViolation("discrete distribution needs an atom".into()));
        }
        let total: f64 = pairs.iter().map(|p| p.1).sum();
        if pairs.iter().any(|&(x, w)| !x.is_finite() || !(w >= 0.0)) || !(total > 0.0) {
            return Err(Error::InvalidParameter("atom weights must be nonnegative with positive sum".into()));
        }
        let mut sorted = pairs.to_vec();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut locs: Vec<f64> = Vec::new();
        let mut weights: Vec<f64> = Vec::new();
        for (x, w) in sorted {
            if w == 0.0 {
                continue;
            }
            match locs.last() {
                Some(&last) if last == x => *weights.last_mut().unwrap() += w / total,
                _ => {
                    locs.push(x);
                    weights.push(w / total);
                }
            }
        }
        let mut acc = 0.0;
        let cum = weights
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        Ok(Self::Atoms { locs, weights, cum })
    }

    pub fn normal(mean: f64, std: f64) -> Result<Self> {
        if !(std > 0.0 && std.is_finite() && mean.is_finite()) {
            return Err(Error::InvalidParameter(format!("normal needs std > 0, got {std}")));
        }
        Ok(Self::Normal { mean, std })
    }

    /// From nonnegative density samples; rounding-level negatives are clipped.
    pub fn tabulated(grid: Grid, density: Vec<f64>) -> Result<Self> {
        let pdf: Vec<f64> = density.into_iter().map(|v| v.max(0.0)).collect();
        let mut cdf = cumulative(&pdf, &grid)?;
        let mass = *cdf.last().unwrap();
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::DegenerateState);
        }
        let pdf = pdf.into_iter().map(|v| v / mass).collect();
        cdf.iter_mut().for_each(|c| *c = (*c / mass).clamp(0.0, 1.0));
        // cubic cell rules can dip by rounding; keep the cdf monotone
        for i in 1..cdf.len() {
            if cdf[i] < cdf[i - 1] {
                cdf[i] = cdf[i - 1];
            }
        }
        Ok(Self::Tabulated { grid, pdf, cdf })
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self, Self::Atoms { .. })
    }

    /// `P(X ≤ x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            Self::Atoms { locs, cum, .. } => {
                let k = locs.partition_point(|&l| l <= x);
                if k == 0 {
                    0.0
                } else {
                    cum[k - 1]
                }
            }
            Self::Normal { mean, std } => normal_cdf((x - mean) / std),
            Self::Tabulated { grid, pdf, cdf } => tabulated_cdf(grid, pdf, cdf, x),
        }
    }

    /// `P(X < x)`; differs from [`cdf`](Self::cdf) only at atoms.
    pub fn cdf_below(&self, x: f64) -> f64 {
        match self {
            Self::Atoms { locs, cum, .. } => {
                let k = locs.partition_point(|&l| l < x);
                if k == 0 {
                    0.0
                } else {
                    cum[k - 1]
                }
            }
            _ => self.cdf(x),
        }
    }

    /// Density at `x`; `None` for atoms.
    pub fn pdf(&self, x: f64) -> Option<f64> {
        match self {
            Self::Atoms { .. } => None,
            Self::Normal { mean, std } => Some(super::special::normal_pdf((x - mean) / std) / std),
            Self::Tabulated { grid, pdf, .. } => Some(match grid.locate(x) {
                Some((i, t)) => pdf[i] + t * (pdf[i + 1] - pdf[i]),
                None => 0.0,
            }),
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            Self::Atoms { locs, weights, .. } => locs.iter().zip(weights).map(|(x, w)| x * w).sum(),
            Self::Normal { mean, .. } => *mean,
            Self::Tabulated { grid, pdf, .. } => {
                let f: Vec<f64> = grid.points().zip(pdf).map(|(x, p)| x * p).collect();
                super::integrate(&f, grid).unwrap_or(f64::NAN)
            }
        }
    }

    pub fn std(&self) -> f64 {
        let m = self.mean();
        let var = match self {
            Self::Atoms { locs, weights, .. } => locs.iter().zip(weights).map(|(x, w)| w * (x - m).powi(2)).sum(),
            Self::Normal { std, .. } => std * std,
            Self::Tabulated { grid, pdf, .. } => {
                let f: Vec<f64> = grid.points().zip(pdf).map(|(x, p)| (x - m).powi(2) * p).collect();
                super::integrate(&f, grid).unwrap_or(f64::NAN)
            }
        };
        var.max(0.0).sqrt()
    }

    /// Support bounds useful for quadrature: `[lo, hi]` holding all but a
    /// negligible fraction of the mass.
    pub fn support(&self) -> (f64, f64) {
        match self {
            Self::Atoms { locs, .. } => (locs[0], *locs.last().unwrap()),
            Self::Normal { mean, std } => (mean - 12.0 * std, mean + 12.0 * std),
            Self::Tabulated { grid, .. } => (grid.lo(), grid.hi()),
        }
    }

    pub fn sample(&self, rng: &mut RandomSource) -> f64 {
        match self {
            Self::Atoms { locs, cum, .. } => {
                let u = rng.uniform();
                let k = cum.partition_point(|&c| c <= u);
                locs[k.min(locs.len() - 1)]
            }
            Self::Normal { mean, std } => mean + std * rng.standard_normal(),
            Self::Tabulated { grid, pdf, cdf } => {
                let u = rng.uniform();
                let i = cdf.partition_point(|&c| c <= u).clamp(1, cdf.len() - 1) - 1;
                let cell = cdf[i + 1] - cdf[i];
                let tau = if cell > 0.0 { ((u - cdf[i]) / cell).clamp(0.0, 1.0) } else { 0.5 };
                grid.point(i) + invert_linear_cell(pdf[i], pdf[i + 1], tau) * grid.spacing()
            }
        }
    }
}

// Fraction t of a cell whose linearly interpolated density carries the
// fraction `tau` of the cell mass.
fn invert_linear_cell(f0: f64, f1: f64, tau: f64) -> f64 {
    let d = f1 - f0;
    let mass = f0 + 0.5 * d;
    if mass <= 0.0 {
        return tau;
    }
    if d.abs() < 1e-12 * mass {
        return tau;
    }
    let disc = (f0 * f0 + 2.0 * d * tau * mass).max(0.0);
    ((disc.sqrt() - f0) / d).clamp(0.0, 1.0)
}

fn tabulated_cdf(grid: &Grid, pdf: &[f64], cdf: &[f64], x: f64) -> f64 {
    if x < grid.lo() {
        return 0.0;
    }
    let Some((i, t)) = grid.locate(x) else {
        return 1.0;
    };
    if t == 0.0 {
        return cdf[i];
    }
    // integrate the cubic through the four nearest nodes from x_i to x
    let n = pdf.len();
    let base = if n < 4 { 0 } else { i.saturating_sub(1).min(n - 4) };
    let m = n.min(4);
    let h = grid.spacing();
    let lagrange = |s: f64| -> f64 {
        (0..m)
            .map(|j| {
                let w: f64 = (0..m).filter(|&k| k != j).map(|k| (s - k as f64) / (j as f64 - k as f64)).product();
                w * pdf[base + j]
            })
            .sum()
    };
    let s0 = (i - base) as f64;
    // three-point Gauss-Legendre is exact for the cubic
    const NODES: [(f64, f64); 3] =
        [(-0.774_596_669_241_483_4, 5.0 / 9.0), (0.0, 8.0 / 9.0), (0.774_596_669_241_483_4, 5.0 / 9.0)];
    let partial: f64 = NODES.iter().map(|(z, w)| w * lagrange(s0 + 0.5 * t * (1.0 + z))).sum::<f64>() * 0.5 * t * h;
    (cdf[i] + partial).clamp(cdf[i], cdf[i + 1])
}
