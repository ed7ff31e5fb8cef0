//! Repeated observation of a strategy evolving under the risk operator.
//!
//! Between `n` equally spaced measurements over a time `T` the strategy
//! evolves with `U = exp(-iHT/nħ)`; each measurement asks whether the trader
//! still holds the initial strategy. The survival probability
//! `S(n) = |⟨ψ|U(T/n)|ψ⟩|^(2n)` tends to one as `n` grows: frequent
//! observation freezes the strategy.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::numerics::special::hermite_functions;
use crate::numerics::Grid;
use crate::strategy::{Form, Representation, RiskParams, Strategy};
use crate::{Error, Result};

/// Initial truncation of the eigenbasis.
pub const DEFAULT_LEVELS: usize = 128;
/// Truncation is doubled up to this many levels.
pub const MAX_LEVELS: usize = 1024;
/// Norm that the truncated expansion must capture.
pub const CAPTURE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct ZenoRun {
    coeffs: Vec<C64>,
    omega_t: f64,
    n_measurements: usize,
    risk: RiskParams,
}

impl ZenoRun {
    /// `total_time` is measured in units of the characteristic time `θ`,
    /// so `ωT = 2π · total_time`.
    pub fn new(initial: &Strategy, total_time: f64, n_measurements: usize, risk: RiskParams) -> Result<Self> {
        Self::from_phase(initial, 2.0 * PI * total_time, n_measurements, risk)
    }

    /// Parameterized directly by the phase `ωT`.
    pub fn from_phase(initial: &Strategy, omega_t: f64, n_measurements: usize, risk: RiskParams) -> Result<Self> {
        if !omega_t.is_finite() || omega_t < 0.0 {
            return Err(Error::InvalidParameter(format!("total time must be >= 0, got ωT = {omega_t}")));
        }
        if n_measurements == 0 {
            return Err(Error::ContractViolation("at least one measurement".into()));
        }
        let coeffs = expand(initial, &risk)?;
        Ok(Self { coeffs, omega_t, n_measurements, risk })
    }

    pub fn with_measurements(&self, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::ContractViolation("at least one measurement".into()));
        }
        Ok(Self { n_measurements: n, ..self.clone() })
    }

    /// Normalized eigenbasis coefficients `⟨k|ψ⟩`.
    pub fn coefficients(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn levels(&self) -> usize {
        self.coeffs.len()
    }

    pub fn omega_t(&self) -> f64 {
        self.omega_t
    }

    pub fn n_measurements(&self) -> usize {
        self.n_measurements
    }

    pub fn risk(&self) -> &RiskParams {
        &self.risk
    }

    fn weights(&self) -> Vec<f64> {
        let total: f64 = self.coeffs.iter().map(|c| c.norm_sqr()).sum();
        self.coeffs.iter().map(|c| c.norm_sqr() / total).collect()
    }
}

// Coefficients of a Hermite-form strategy whose scale matches the run.
fn analytic_coeffs(s: &Strategy, risk: &RiskParams) -> Option<Vec<C64>> {
    match s.form() {
        Form::Hermite { n, risk: own } => {
            let same = match s.representation() {
                Representation::Demand => (own.length_scale() / risk.length_scale() - 1.0).abs() < 1e-12,
                Representation::Supply => (own.momentum_scale() / risk.momentum_scale() - 1.0).abs() < 1e-12,
            };
            if !same {
                return None;
            }
            let mut c = vec![C64::new(0.0, 0.0); n + 1];
            c[*n] = match s.representation() {
                Representation::Demand => C64::new(1.0, 0.0),
                Representation::Supply => C64::new(0.0, 1.0).powu(*n as u32),
            };
            Some(c)
        }
        Form::Superposition { terms } => {
            let mut acc: Vec<C64> = Vec::new();
            for (a, t) in terms {
                let c = analytic_coeffs(t, risk)?;
                if c.len() > acc.len() {
                    acc.resize(c.len(), C64::new(0.0, 0.0));
                }
                for (x, y) in acc.iter_mut().zip(&c) {
                    *x += a * y;
                }
            }
            Some(acc)
        }
        _ => None,
    }
}

fn normalized(mut c: Vec<C64>) -> Result<Vec<C64>> {
    let norm: f64 = c.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::DegenerateState);
    }
    c.iter_mut().for_each(|x| *x /= norm);
    Ok(c)
}

fn quadrature_coeffs(s: &Strategy, risk: &RiskParams, levels: usize) -> Result<(Vec<C64>, f64)> {
    let rep = s.representation();
    let scale = match rep {
        Representation::Demand => risk.length_scale(),
        Representation::Supply => risk.momentum_scale(),
    };
    let target = 0.05 * scale / ((2 * levels + 1) as f64).sqrt();
    if let Form::Sampled { grid, .. } = s.form() {
        let factor = (grid.spacing() / target).ceil().max(1.0) as usize;
        let (amps, fine) = s.refined_samples(factor).expect("sampled")?;
        let c = project(&fine, scale, rep, levels, |i| amps[i]);
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>() * fine.spacing();
        let captured = c.iter().map(|x| x.norm_sqr()).sum::<f64>() / norm;
        return Ok((c, captured));
    }
    let reach = (((2 * levels + 1) as f64).sqrt() + 8.0) * scale;
    let (a, b) = s.extent(rep, risk.effective_hbar())?;
    let (lo, hi) = (a.min(-reach), b.max(reach));
    let h = target.min((b - a) / 4000.0);
    let n = (((hi - lo) / h).ceil() as usize + 1).max(Grid::MIN_POINTS);
    let grid = Grid::new(lo, hi, n)?;
    let c = project(&grid, scale, rep, levels, |i| s.amplitude_at(grid.point(i)).expect("proper strategy"));
    let captured: f64 = c.iter().map(|x| x.norm_sqr()).sum::<f64>() / s.norm_sq()?;
    Ok((c, captured))
}

// Trapezoid projection of nodal amplitudes onto the first `levels` eigenfunctions.
fn project(grid: &Grid, scale: f64, rep: Representation, levels: usize, psi: impl Fn(usize) -> C64 + Sync) -> Vec<C64> {
    let parts: Vec<Vec<C64>> = (0..grid.n())
        .into_par_iter()
        .chunks(1024)
        .map(|idx| {
            let mut acc = vec![C64::new(0.0, 0.0); levels];
            for i in idx {
                let v = psi(i);
                if v == C64::new(0.0, 0.0) {
                    continue;
                }
                for (k, f) in hermite_functions(levels - 1, grid.point(i) / scale).into_iter().enumerate() {
                    acc[k] += v * f;
                }
            }
            acc
        })
        .collect();
    let mut c = vec![C64::new(0.0, 0.0); levels];
    for p in &parts {
        for (x, y) in c.iter_mut().zip(p) {
            *x += y;
        }
    }
    let w = grid.spacing() / scale.sqrt();
    for (k, x) in c.iter_mut().enumerate() {
        let phase = match rep {
            Representation::Demand => C64::new(1.0, 0.0),
            Representation::Supply => C64::new(0.0, 1.0).powu((k % 4) as u32),
        };
        *x *= phase * w;
    }
    c
}

fn expand(s: &Strategy, risk: &RiskParams) -> Result<Vec<C64>> {
    if s.is_improper() {
        return Err(Error::ImproperState("an exact-price commitment has no eigenbasis expansion".into()));
    }
    if let Some(c) = analytic_coeffs(s, risk) {
        return normalized(c);
    }
    // skip truncations whose classical reach falls short of the support
    let scale = match s.representation() {
        Representation::Demand => risk.length_scale(),
        Representation::Supply => risk.momentum_scale(),
    };
    let (a, b) = s.extent(s.representation(), risk.effective_hbar())?;
    let far = a.abs().max(b.abs()) / scale;
    let mut levels = DEFAULT_LEVELS;
    while levels < MAX_LEVELS && ((2 * levels + 1) as f64) < far * far {
        levels *= 2;
    }
    loop {
        let (c, captured) = quadrature_coeffs(s, risk, levels)?;
        if captured >= 1.0 - CAPTURE_TOL {
            return normalized(c);
        }
        if levels >= MAX_LEVELS {
            return Err(Error::Truncation { levels, captured });
        }
        levels *= 2;
    }
}

/// `S(n) = |Σ_k |c_k|² e^(-ikωT/n)|^(2n)`.
pub fn survival_probability(run: &ZenoRun) -> f64 {
    survival_with(&run.weights(), run.omega_t, run.n_measurements)
}

fn survival_with(weights: &[f64], omega_t: f64, n: usize) -> f64 {
    let theta = omega_t / n as f64;
    let first = weights.iter().position(|w| *w > 0.0).unwrap_or(0);
    let amp: C64 = weights
        .iter()
        .enumerate()
        .skip(first)
        .filter(|(_, w)| **w > 0.0)
        .map(|(k, w)| C64::from_polar(*w, -((k - first) as f64) * theta))
        .sum();
    amp.norm_sqr().powf(n as f64).min(1.0)
}

/// `S(n)` for each `n`, in order.
pub fn freeze_experiment(run: &ZenoRun, n_values: &[usize]) -> Result<Vec<(usize, f64)>> {
    if n_values.is_empty() {
        return Err(Error::ContractViolation("need at least one measurement count".into()));
    }
    if n_values.windows(2).any(|w| w[1] <= w[0]) || n_values[0] == 0 {
        return Err(Error::ContractViolation("measurement counts must be positive and ascending".into()));
    }
    let w = run.weights();
    Ok(n_values.par_iter().map(|&n| (n, survival_with(&w, run.omega_t, n))).collect())
}

/// Writes `n,survival`.
pub fn write_freeze_table<W: std::io::Write>(rows: &[(usize, f64)], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "survival"])?;
    for (n, s) in rows {
        w.write_record(&[n.to_string(), s.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// State after one measurement interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZenoStep {
    pub step: usize,
    /// Elapsed phase `ωt`.
    pub omega_t: f64,
    /// Norm of the evolved state before the measurement.
    pub norm: f64,
    /// Probability that every measurement so far found the initial strategy.
    pub survival: f64,
}

/// Steps through the run: evolve for `T/n`, project onto the initial
/// strategy, repeat. Fails if the evolution loses unitarity beyond `1e-12`.
pub fn evolve(run: &ZenoRun) -> Result<Vec<ZenoStep>> {
    let n = run.n_measurements;
    let theta = run.omega_t / n as f64;
    let psi0 = &run.coeffs;
    let mut out = Vec::with_capacity(n);
    let mut survival = 1.0;
    for step in 1..=n {
        // the projected state is ψ0 up to phase, so each step starts from it
        let evolved: Vec<C64> =
            psi0.iter().enumerate().map(|(k, c)| c * C64::from_polar(1.0, -(k as f64 + 0.5) * theta)).collect();
        let norm: f64 = evolved.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::ContractViolation(format!("evolution is not unitary: norm {norm}")));
        }
        let overlap: C64 = psi0.iter().zip(&evolved).map(|(a, b)| a.conj() * b).sum();
        survival *= overlap.norm_sqr();
        out.push(ZenoStep { step, omega_t: theta * step as f64, norm, survival });
    }
    Ok(out)
}

/// Fraction of traders whose strategy survives with probability at least
/// `threshold`; a market where few strategies stay frozen is one where
/// quotation is about to break down.
pub fn frozen_fraction(runs: &[ZenoRun], threshold: f64) -> Result<f64> {
    if runs.is_empty() {
        return Err(Error::ContractViolation("no traders".into()));
    }
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::ParameterRange(format!("threshold {threshold} outside [0, 1]")));
    }
    let frozen = runs.iter().filter(|r| survival_probability(r) >= threshold).count();
    Ok(frozen as f64 / runs.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cat(risk: RiskParams) -> Strategy {
        Strategy::superposition(vec![
            (C64::new(1.0, 0.0), Strategy::hermite(0, risk).unwrap()),
            (C64::new(1.0, 0.0), Strategy::hermite(1, risk).unwrap()),
        ])
        .unwrap()
    }

    #[test]
    fn eigenstates_survive_exactly() {
        let r = RiskParams::default();
        for k in [0, 1, 7] {
            let run = ZenoRun::from_phase(&Strategy::hermite(k, r).unwrap(), 1.3, 1, r).unwrap();
            let rows = freeze_experiment(&run, &[1, 2, 10, 1000]).unwrap();
            assert!(rows.iter().all(|(_, s)| *s == 1.0));
        }
        let sup = Strategy::hermite(3, r).unwrap().in_representation(Representation::Supply);
        let run = ZenoRun::from_phase(&sup, 2.0, 5, r).unwrap();
        assert_eq!(survival_probability(&run), 1.0);
    }

    #[test]
    fn two_level_values() {
        let r = RiskParams::default();
        let run = ZenoRun::from_phase(&cat(r), PI, 1, r).unwrap();
        assert!(survival_probability(&run).abs() < 1e-12);
        let two = run.with_measurements(2).unwrap();
        assert!((survival_probability(&two) - 0.25).abs() < 1e-12);
        // oracle: |(e^{-iθ/2} + e^{-3iθ/2})/2|^{2n} = cos²ⁿ(θ/2)
        for n in [1usize, 3, 10, 100, 1000] {
            let s = survival_probability(&run.with_measurements(n).unwrap());
            let oracle = (PI / (2.0 * n as f64)).cos().powi(2 * n as i32);
            assert!((s - oracle).abs() < 1e-12, "n={n}");
        }
        let rows = freeze_experiment(&run, &[1, 10, 100, 1000]).unwrap();
        assert!(rows.windows(2).all(|w| w[1].1 > w[0].1));
        assert!(rows[3].1 > 0.99);
    }

    #[test]
    fn time_in_characteristic_units() {
        let r = RiskParams::new(1.0, 3.0, 1.0, 0.0).unwrap();
        let a = ZenoRun::new(&cat(r), 0.25, 4, r).unwrap();
        let b = ZenoRun::from_phase(&cat(r), PI / 2.0, 4, r).unwrap();
        assert_eq!(survival_probability(&a), survival_probability(&b));
    }

    #[test]
    fn quarter_period_column_increases() {
        let r = RiskParams::default();
        let run = ZenoRun::from_phase(&cat(r), PI / 2.0, 1, r).unwrap();
        let rows = freeze_experiment(&run, &[1, 10, 100, 1000]).unwrap();
        assert!(rows.windows(2).all(|w| w[1].1 > w[0].1));
    }

    #[test]
    fn full_period_revives() {
        let r = RiskParams::default();
        let g = Strategy::gaussian(1.0, 0.5, 0.3).unwrap();
        let run = ZenoRun::from_phase(&g, 2.0 * PI, 1, r).unwrap();
        assert!((survival_probability(&run) - 1.0).abs() < 1e-12);
        let run = ZenoRun::from_phase(&cat(r), 2.0 * PI, 1, r).unwrap();
        assert!((survival_probability(&run) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zeno_limit_rate() {
        let r = RiskParams::default();
        let g = Strategy::gaussian(0.8, 0.6, -0.4).unwrap();
        let run = ZenoRun::from_phase(&g, 1.0, 1, r).unwrap();
        let rows = freeze_experiment(&run, &[250, 500, 1000, 2000]).unwrap();
        for w in rows.windows(2) {
            let ratio = (1.0 - w[0].1) / (1.0 - w[1].1);
            assert!((ratio - 2.0).abs() < 0.01, "{ratio}");
        }
    }

    #[test]
    fn quadrature_matches_analytic_expansion() {
        let r = RiskParams::new(0.7, 2.0, 1.3, 0.0).unwrap();
        let exact = analytic_coeffs(&Strategy::hermite(3, r).unwrap(), &r).unwrap();
        let (c, captured) = quadrature_coeffs(&Strategy::hermite(3, r).unwrap(), &r, 16).unwrap();
        assert!((captured - 1.0).abs() < 1e-10);
        for (k, x) in c.iter().enumerate() {
            let e = exact.get(k).copied().unwrap_or_default();
            assert!((x - e).norm() < 1e-10, "k={k}");
        }
        // ground state written as a Gaussian behaves as an eigenstate
        let g = Strategy::gaussian(0.0, r.length_scale() / 2f64.sqrt(), 0.0).unwrap();
        let run = ZenoRun::from_phase(&g, 1.7, 3, r).unwrap();
        assert_eq!(survival_probability(&run), 1.0);
        // coherent state: Poisson weights with mean |α|²
        let x0 = 1.5 * r.length_scale();
        let g = Strategy::gaussian(x0, r.length_scale() / 2f64.sqrt(), 0.0).unwrap();
        let run = ZenoRun::from_phase(&g, 1.0, 1, r).unwrap();
        let mean = 0.5 * (x0 / r.length_scale()).powi(2);
        let w = run.weights();
        let mut p = (-mean).exp();
        for (k, wk) in w.iter().enumerate().take(12) {
            assert!((wk - p).abs() < 1e-9, "k={k}");
            p *= mean / (k + 1) as f64;
        }
    }

    #[test]
    fn far_states_need_more_levels() {
        let r = RiskParams::default();
        let g = Strategy::gaussian(20.0, 0.7, 0.0).unwrap();
        let run = ZenoRun::from_phase(&g, 1.0, 1, r).unwrap();
        assert!(run.levels() > DEFAULT_LEVELS);
        let sampled = {
            let (a, grid) = Strategy::gaussian(-1.0, 0.5, 1.0).unwrap().sample(1.0).unwrap();
            Strategy::sampled(a, grid).unwrap()
        };
        let run = ZenoRun::from_phase(&sampled, 1.0, 1, r).unwrap();
        let total: f64 = run.coefficients().iter().map(|c| c.norm_sqr()).sum();
        assert!((total - 1.0).abs() < 1e-12);
        let err = ZenoRun::from_phase(&Strategy::delta(0.0).unwrap(), 1.0, 1, r).unwrap_err();
        assert!(matches!(err, Error::ImproperState(_)));
    }

    #[test]
    fn truncation_error_when_out_of_reach() {
        let r = RiskParams::default();
        let g = Strategy::gaussian(400.0, 1.0, 0.0).unwrap();
        assert!(matches!(ZenoRun::from_phase(&g, 1.0, 1, r), Err(Error::Truncation { .. })));
    }

    #[test]
    fn evolution_is_unitary_and_consistent() {
        let r = RiskParams::default();
        let g = Strategy::gaussian(0.5, 0.9, 0.2).unwrap();
        let run = ZenoRun::from_phase(&g, 2.5, 40, r).unwrap();
        let steps = evolve(&run).unwrap();
        assert_eq!(steps.len(), 40);
        assert!(steps.iter().all(|s| (s.norm - 1.0).abs() < 1e-12));
        assert!(steps.windows(2).all(|w| w[1].survival <= w[0].survival));
        let last = steps.last().unwrap();
        assert!((last.survival - survival_probability(&run)).abs() < 1e-12);
        assert!((last.omega_t - 2.5).abs() < 1e-12);
    }

    #[test]
    fn frozen_fraction_counts() {
        let r = RiskParams::default();
        let runs = vec![
            ZenoRun::from_phase(&Strategy::hermite(0, r).unwrap(), PI, 1, r).unwrap(),
            ZenoRun::from_phase(&cat(r), PI, 1, r).unwrap(),
            ZenoRun::from_phase(&cat(r), PI, 1000, r).unwrap(),
        ];
        assert!((frozen_fraction(&runs, 0.99).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!(frozen_fraction(&[], 0.5).is_err());
        assert!(frozen_fraction(&runs, 1.5).is_err());
    }

    #[test]
    fn freeze_table_rules() {
        let r = RiskParams::default();
        let run = ZenoRun::from_phase(&cat(r), PI, 1, r).unwrap();
        assert!(freeze_experiment(&run, &[]).is_err());
        assert!(freeze_experiment(&run, &[10, 5]).is_err());
        assert!(freeze_experiment(&run, &[0, 5]).is_err());
        let rows = freeze_experiment(&run, &[1, 2]).unwrap();
        let mut buf = Vec::new();
        write_freeze_table(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("n,survival\n1,"));
        assert!(text.lines().nth(2).unwrap().starts_with("2,0.2"));
        assert!(ZenoRun::from_phase(&cat(r), PI, 0, r).is_err());
        assert!(ZenoRun::from_phase(&cat(r), -1.0, 1, r).is_err());
    }
}
