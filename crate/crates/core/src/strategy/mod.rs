//! Trader strategies: wavefunctions over log-price in the demand (`q`) or
//! supply (`p`) picture, their normalization and moments, and the buy/sell
//! probabilities they induce.
//!
//! Gaussian, Hermite and superposed strategies are analytic in both pictures;
//! sampled strategies are converted with the discrete Fourier transform.
//! Delta and discrete strategies are improper: they describe a trader
//! committed to exact prices, live outside the Hilbert space and are rejected
//! by every L2-only operation.

mod literal;

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::numerics::special::hermite_function;
use crate::numerics::{fourier_p_to_q, fourier_q_to_p_about, Distribution, Grid};
use crate::{Error, Result};

pub use literal::{parse_strategy, LiteralContext};

/// Points of the default sampling grid (at least; grown for wide states).
pub const DEFAULT_POINTS: usize = 2048;
/// Points used to tabulate price densities of analytic strategies.
const DENSITY_POINTS: usize = 8193;
/// Highest Hermite order a strategy may carry.
pub const HERMITE_MAX: usize = 1024;

/// Parameters of the risk inclination operator
/// `H = (P - p₀)²/2m + m ω² (Q - q₀)²/2` with `ω = 2π/θ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskParams {
    hbar_e: f64,
    theta: f64,
    m: f64,
    theta_nc: f64,
}

impl RiskParams {
    pub fn new(hbar_e: f64, theta: f64, m: f64, theta_nc: f64) -> Result<Self> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(hbar_e) {
            return Err(Error::InvalidParameter(format!("hbar_e must be positive, got {hbar_e}")));
        }
        if !positive(theta) {
            return Err(Error::InvalidParameter(format!("theta must be positive, got {theta}")));
        }
        if !positive(m) {
            return Err(Error::InvalidParameter(format!("m must be positive, got {m}")));
        }
        if !(theta_nc.is_finite() && theta_nc >= 0.0) {
            return Err(Error::InvalidParameter(format!("theta_nc must be >= 0, got {theta_nc}")));
        }
        Ok(Self { hbar_e, theta, m, theta_nc })
    }

    /// Same as [`new`](Self::new) but parameterized by `ω` instead of `θ`.
    pub fn with_omega(hbar_e: f64, omega: f64, m: f64, theta_nc: f64) -> Result<Self> {
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::InvalidParameter(format!("omega must be positive, got {omega}")));
        }
        Self::new(hbar_e, 2.0 * PI / omega, m, theta_nc)
    }

    pub fn hbar_e(&self) -> f64 {
        self.hbar_e
    }

    /// `h_E = 2π ħ_E`.
    pub fn h_e(&self) -> f64 {
        2.0 * PI * self.hbar_e
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn theta_nc(&self) -> f64 {
        self.theta_nc
    }

    pub fn omega(&self) -> f64 {
        2.0 * PI / self.theta
    }

    /// `√(ħ_E² + Θ²)`.
    pub fn effective_hbar(&self) -> f64 {
        self.hbar_e.hypot(self.theta_nc)
    }

    /// Oscillator length `√(ħ_eff / mω)` in the demand picture.
    pub fn length_scale(&self) -> f64 {
        (self.effective_hbar() / (self.m * self.omega())).sqrt()
    }

    /// Oscillator momentum scale `√(ħ_eff m ω)` in the supply picture.
    pub fn momentum_scale(&self) -> f64 {
        (self.effective_hbar() * self.m * self.omega()).sqrt()
    }
}

impl Default for RiskParams {
    /// `ħ_E = 1`, `ω = 1`, `m = 1`, `Θ = 0`.
    fn default() -> Self {
        Self { hbar_e: 1.0, theta: 2.0 * PI, m: 1.0, theta_nc: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Representation {
    /// `⟨q|ψ⟩`, `q` the log of the buying price.
    Demand,
    /// `⟨p|ψ⟩`, `p` minus the log of the selling price.
    Supply,
}

impl Representation {
    pub fn name(self) -> &'static str {
        match self {
            Self::Demand => "demand",
            Self::Supply => "supply",
        }
    }

    pub fn conjugate(self) -> Self {
        match self {
            Self::Demand => Self::Supply,
            Self::Supply => Self::Demand,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Form {
    /// `|ψ(x)|²` normal with mean `center` and standard deviation `width`,
    /// times the phase `e^(i slope x)`.
    Gaussian {
        center: f64,
        width: f64,
        slope: f64,
    },
    /// `n`-th eigenstate of the risk operator, centred at zero.
    Hermite {
        n: usize,
        risk: RiskParams,
    },
    /// Improper eigenstate: the trader commits to exactly `location`.
    Delta {
        location: f64,
    },
    /// Improper: commitment to one of several exact prices with the given
    /// probabilities.
    Discrete {
        atoms: Vec<(f64, f64)>,
    },
    /// Coherent sum `Σ c_i ψ_i` of normalizable strategies.
    Superposition {
        terms: Vec<(C64, Strategy)>,
    },
    Sampled {
        amplitudes: Vec<C64>,
        grid: Grid,
    },
}

/// A trader's pure state. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Strategy {
    form: Form,
    rep: Representation,
    scale: f64,
}

impl Strategy {
    pub fn gaussian(center: f64, width: f64, slope: f64) -> Result<Self> {
        if !(width.is_finite() && width > 0.0) {
            return Err(Error::InvalidParameter(format!("gaussian width must be positive, got {width}")));
        }
        if !(center.is_finite() && slope.is_finite()) {
            return Err(Error::InvalidParameter("gaussian center and slope must be finite".into()));
        }
        Ok(Self::from_form(Form::Gaussian { center, width, slope }))
    }

    pub fn hermite(n: usize, risk: RiskParams) -> Result<Self> {
        if n > HERMITE_MAX {
            return Err(Error::ParameterRange(format!("hermite order {n} exceeds {HERMITE_MAX}")));
        }
        Ok(Self::from_form(Form::Hermite { n, risk }))
    }

    pub fn delta(location: f64) -> Result<Self> {
        if !location.is_finite() {
            return Err(Error::InvalidParameter("delta location must be finite".into()));
        }
        Ok(Self::from_form(Form::Delta { location }))
    }

    /// `(location, probability weight)` pairs; weights are normalized.
    pub fn discrete(atoms: Vec<(f64, f64)>) -> Result<Self> {
        Distribution::atoms(&atoms)?;
        Ok(Self::from_form(Form::Discrete { atoms }))
    }

    pub fn superposition(terms: Vec<(C64, Strategy)>) -> Result<Self> {
        let Some(first) = terms.first() else {
            return Err(Error::ContractViolation("superposition needs at least one term".into()));
        };
        let rep = first.1.rep;
        for (_, s) in &terms {
            if s.is_improper() {
                return Err(Error::ImproperState("superposition of improper strategies".into()));
            }
            if s.rep != rep {
                return Err(Error::RepresentationMismatch { expected: rep.name(), found: s.rep.name() });
            }
        }
        let s = Self { form: Form::Superposition { terms }, rep, scale: 1.0 };
        s.normalize()
    }

    pub fn sampled(amplitudes: Vec<C64>, grid: Grid) -> Result<Self> {
        if amplitudes.len() != grid.n() {
            return Err(Error::ContractViolation(format!(
                "{} amplitudes for a grid of {} points",
                amplitudes.len(),
                grid.n()
            )));
        }
        if amplitudes.iter().any(|a| !(a.re.is_finite() && a.im.is_finite())) {
            return Err(Error::InvalidParameter("sampled amplitudes must be finite".into()));
        }
        let s = Self::from_form(Form::Sampled { amplitudes, grid });
        if s.norm_sq()? == 0.0 {
            return Err(Error::DegenerateState);
        }
        Ok(s)
    }

    fn from_form(form: Form) -> Self {
        Self { form, rep: Representation::Demand, scale: 1.0 }
    }

    /// Reinterprets the same functional form in another picture.
    pub fn in_representation(mut self, rep: Representation) -> Self {
        self.rep = rep;
        if let Form::Superposition { terms } = &mut self.form {
            for (_, t) in terms.iter_mut() {
                *t = t.clone().in_representation(rep);
            }
        }
        self
    }

    /// Multiplies the amplitudes by `k` (normalization is then lost).
    pub fn scaled(mut self, k: f64) -> Self {
        self.scale *= k;
        self
    }

    pub fn form(&self) -> &Form {
        &self.form
    }

    pub fn representation(&self) -> Representation {
        self.rep
    }

    pub fn is_improper(&self) -> bool {
        matches!(self.form, Form::Delta { .. } | Form::Discrete { .. })
    }

    fn require_proper(&self, what: &str) -> Result<()> {
        if self.is_improper() {
            return Err(Error::ImproperState(format!("{what} needs a normalizable strategy")));
        }
        Ok(())
    }

    fn require_rep(&self, rep: Representation) -> Result<()> {
        if self.rep != rep {
            return Err(Error::RepresentationMismatch { expected: rep.name(), found: self.rep.name() });
        }
        Ok(())
    }

    /// `⟨ψ|ψ⟩`.
    pub fn norm_sq(&self) -> Result<f64> {
        self.require_proper("norm")?;
        let k2 = self.scale * self.scale;
        Ok(match &self.form {
            Form::Gaussian { .. } | Form::Hermite { .. } => k2,
            Form::Sampled { amplitudes, grid } => {
                k2 * amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * grid.spacing()
            }
            Form::Superposition { .. } => {
                let grid = self.fine_grid(self.rep)?;
                let f: Vec<f64> = grid.points().map(|x| self.raw_amplitude(x).norm_sqr()).collect();
                crate::numerics::integrate(&f, &grid)?
            }
            Form::Delta { .. } | Form::Discrete { .. } => unreachable!(),
        })
    }

    /// Rescales to unit norm; the direction in state space is unchanged.
    pub fn normalize(&self) -> Result<Self> {
        self.require_proper("normalize")?;
        let norm = self.norm_sq()?.sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::DegenerateState);
        }
        let mut out = self.clone();
        match &mut out.form {
            Form::Sampled { amplitudes, .. } => {
                let k = self.scale / norm;
                amplitudes.iter_mut().for_each(|a| *a *= k);
                out.scale = 1.0;
            }
            _ => out.scale = self.scale / norm,
        }
        Ok(out)
    }

    /// Amplitude at `x` in the strategy's own picture.
    pub fn amplitude_at(&self, x: f64) -> Result<C64> {
        self.require_proper("amplitude")?;
        Ok(self.raw_amplitude(x))
    }

    /// Sampled amplitudes interpolated as a band-limited signal onto a grid
    /// `factor` times finer; `None` unless the strategy is sampled.
    pub(crate) fn refined_samples(&self, factor: usize) -> Option<Result<(Vec<C64>, Grid)>> {
        let Form::Sampled { amplitudes, grid } = &self.form else {
            return None;
        };
        let center = conjugate_mean(amplitudes, grid, 1.0, 1.0);
        Some(
            crate::numerics::refine(amplitudes, grid, center, factor)
                .map(|(a, g)| (a.into_iter().map(|v| v * self.scale).collect(), g)),
        )
    }

    fn raw_amplitude(&self, x: f64) -> C64 {
        let v = match &self.form {
            Form::Gaussian { center, width, slope } => gaussian_amplitude(x, *center, *width, *slope),
            Form::Hermite { n, risk } => {
                let s = hermite_scale(risk, self.rep);
                C64::from(hermite_function(*n, x / s) / s.sqrt())
            }
            Form::Superposition { terms } => terms.iter().map(|(c, t)| c * t.raw_amplitude(x)).sum(),
            Form::Sampled { amplitudes, grid } => interpolate(amplitudes, grid, x),
            Form::Delta { .. } | Form::Discrete { .. } => C64::new(f64::NAN, f64::NAN),
        };
        v * self.scale
    }

    /// Amplitude at `x` in the conjugate picture, when it has a closed form
    /// (not for sampled strategies).
    pub fn conjugate_amplitude_at(&self, x: f64, hbar: f64) -> Option<C64> {
        if self.is_improper() {
            return None;
        }
        // demand -> supply is the forward transform; the inverse is the same
        // kernel with ħ -> -ħ
        let signed = match self.rep {
            Representation::Demand => hbar,
            Representation::Supply => -hbar,
        };
        let v = match &self.form {
            Form::Gaussian { center, width, slope } => {
                let kappa = (x - signed * slope) / signed;
                let pref =
                    (2.0 * PI * hbar).powf(-0.5) * (2.0 * PI * width * width).powf(-0.25) * 2.0 * width * PI.sqrt();
                C64::from_polar(pref * (-kappa * kappa * width * width).exp(), -kappa * center)
            }
            Form::Hermite { n, risk } => {
                let s = hermite_scale(risk, self.rep);
                let sc = hbar / s;
                let phase = match self.rep {
                    Representation::Demand => C64::new(0.0, -1.0),
                    Representation::Supply => C64::new(0.0, 1.0),
                };
                phase.powu(*n as u32) * (hermite_function(*n, x / sc) / sc.sqrt())
            }
            Form::Superposition { terms } => {
                let mut acc = C64::new(0.0, 0.0);
                for (c, t) in terms {
                    acc += c * t.conjugate_amplitude_at(x, hbar)?;
                }
                acc
            }
            Form::Sampled { .. } => return None,
            Form::Delta { .. } | Form::Discrete { .. } => unreachable!(),
        };
        Some(v * self.scale)
    }

    /// Interval holding essentially all of `|ψ|²` in the given picture
    /// (`hbar` is only used for the conjugate picture).
    pub fn extent(&self, rep: Representation, hbar: f64) -> Result<(f64, f64)> {
        self.require_proper("extent")?;
        let own = rep == self.rep;
        let signed = match self.rep {
            Representation::Demand => hbar,
            Representation::Supply => -hbar,
        };
        Ok(match &self.form {
            Form::Gaussian { center, width, slope } => {
                if own {
                    (center - 9.0 * width, center + 9.0 * width)
                } else {
                    let (c, w) = (signed * slope, hbar / (2.0 * width));
                    (c - 9.0 * w, c + 9.0 * w)
                }
            }
            Form::Hermite { n, risk } => {
                let s = hermite_scale(risk, self.rep);
                let s = if own { s } else { hbar / s };
                let half = (((2 * n + 1) as f64).sqrt() + 8.0) * s;
                (-half, half)
            }
            Form::Superposition { terms } => {
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for (_, t) in terms {
                    let (a, b) = t.extent(rep, hbar)?;
                    lo = lo.min(a);
                    hi = hi.max(b);
                }
                (lo, hi)
            }
            Form::Sampled { amplitudes, grid } => {
                if own {
                    (grid.lo(), grid.hi())
                } else {
                    let (phi, gp) = sampled_conjugate(amplitudes, grid, self.rep, hbar)?;
                    support_of(&phi, &gp)
                }
            }
            Form::Delta { .. } | Form::Discrete { .. } => unreachable!(),
        })
    }

    /// Sampling grid in the strategy's own picture whose reciprocal grid also
    /// covers the conjugate picture, so the discrete Fourier transform
    /// resolves both `|⟨q|ψ⟩|²` and `|⟨p|ψ⟩|²`.
    pub fn default_grid(&self, hbar: f64) -> Result<Grid> {
        self.require_proper("sampling grid")?;
        if let Form::Sampled { grid, .. } = &self.form {
            return Ok(*grid);
        }
        let (a, b) = self.extent(self.rep, hbar)?;
        let (c, d) = self.extent(self.rep.conjugate(), hbar)?;
        let (eq, ep) = (b - a, d - c);
        let need = 4.0 * eq * ep / (2.0 * PI * hbar);
        let mut n = DEFAULT_POINTS;
        while (n as f64) < need {
            n *= 2;
        }
        let span = (2.0 * PI * hbar * n as f64 * eq / ep).sqrt();
        let step = span / n as f64;
        let center = 0.5 * (a + b);
        Grid::from_step(center - (n / 2) as f64 * step, step, n)
    }

    /// Fine grid over the extent, for densities and quadrature.
    fn fine_grid(&self, rep: Representation) -> Result<Grid> {
        // ħ only matters for the conjugate picture, where callers go through
        // distribution_in with an explicit value
        let (a, b) = self.extent(rep, 1.0)?;
        Grid::new(a, b, DENSITY_POINTS)
    }

    /// Amplitudes sampled on [`default_grid`](Self::default_grid).
    pub fn sample(&self, hbar: f64) -> Result<(Vec<C64>, Grid)> {
        let grid = self.default_grid(hbar)?;
        if let Form::Sampled { amplitudes, .. } = &self.form {
            let k = self.scale;
            return Ok((amplitudes.iter().map(|a| a * k).collect(), grid));
        }
        Ok((grid.points().map(|x| self.raw_amplitude(x)).collect(), grid))
    }

    /// Normalized `|ψ|²` in the strategy's own picture as a price distribution.
    pub fn price_distribution(&self) -> Result<Distribution> {
        self.distribution_in(self.rep, 1.0)
    }

    /// Normalized `|ψ|²` in either picture.
    pub fn distribution_in(&self, rep: Representation, hbar: f64) -> Result<Distribution> {
        let own = rep == self.rep;
        match &self.form {
            Form::Delta { location } if own => return Ok(Distribution::point(*location)),
            Form::Discrete { atoms } if own => return Distribution::atoms(atoms),
            Form::Delta { .. } | Form::Discrete { .. } => {
                return Err(Error::ImproperState("conjugate of an improper strategy is a plane wave".into()))
            }
            Form::Gaussian { center, width, slope } => {
                return if own {
                    Distribution::normal(*center, *width)
                } else {
                    let signed = if self.rep == Representation::Demand { hbar } else { -hbar };
                    Distribution::normal(signed * slope, hbar / (2.0 * width))
                };
            }
            _ => {}
        }
        if own {
            if let Form::Sampled { amplitudes, grid } = &self.form {
                return sampled_density(amplitudes, grid);
            }
            let grid = self.fine_grid(rep)?;
            return Distribution::tabulated(grid, grid.points().map(|x| self.raw_amplitude(x).norm_sqr()).collect());
        }
        if let Form::Sampled { amplitudes, grid } = &self.form {
            let (phi, gp) = sampled_conjugate(amplitudes, grid, self.rep, hbar)?;
            return sampled_density(&phi, &gp);
        }
        let (a, b) = self.extent(rep, hbar)?;
        let grid = Grid::new(a, b, DENSITY_POINTS)?;
        let dens =
            grid.points().map(|x| self.conjugate_amplitude_at(x, hbar).map(|v| v.norm_sqr()).unwrap_or(0.0)).collect();
        Distribution::tabulated(grid, dens)
    }

    /// Expected value of the own-picture variable, `⟨ψ|x|ψ⟩/⟨ψ|ψ⟩`.
    fn own_mean(&self) -> Result<f64> {
        Ok(self.price_distribution()?.mean())
    }
}

fn gaussian_amplitude(x: f64, center: f64, width: f64, slope: f64) -> C64 {
    let u = x - center;
    let a = (2.0 * PI * width * width).powf(-0.25) * (-u * u / (4.0 * width * width)).exp();
    C64::from_polar(a, slope * x)
}

fn hermite_scale(risk: &RiskParams, rep: Representation) -> f64 {
    match rep {
        Representation::Demand => risk.length_scale(),
        Representation::Supply => risk.momentum_scale(),
    }
}

// Cubic Lagrange interpolation on the four nearest nodes; zero outside.
fn interpolate(values: &[C64], grid: &Grid, x: f64) -> C64 {
    let Some((i, t)) = grid.locate(x) else {
        return C64::new(0.0, 0.0);
    };
    if t == 0.0 {
        return values[i];
    }
    let n = values.len();
    let base = i.saturating_sub(1).min(n - 4);
    let s = (x - grid.point(base)) / grid.spacing();
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..4 {
        let mut w = 1.0;
        for k in 0..4 {
            if k != j {
                w *= (s - k as f64) / (j as f64 - k as f64);
            }
        }
        acc += values[base + j] * w;
    }
    acc
}

/// `ħ Im ∫ ψ* ψ' dx / ∫|ψ|²`: the conjugate-variable mean from samples
/// (sign +1 for demand input, giving `⟨p⟩`; -1 for supply input, giving `⟨q⟩`).
fn conjugate_mean(amplitudes: &[C64], grid: &Grid, sign: f64, hbar: f64) -> f64 {
    let n = amplitudes.len();
    let h = grid.spacing();
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..n {
        den += amplitudes[i].norm_sqr();
        if i > 0 && i + 1 < n {
            let d = (amplitudes[i + 1] - amplitudes[i - 1]) / (2.0 * h);
            num += (amplitudes[i].conj() * d).im;
        }
    }
    if den == 0.0 {
        return 0.0;
    }
    sign * hbar * num / den
}

fn sampled_conjugate(amplitudes: &[C64], grid: &Grid, rep: Representation, hbar: f64) -> Result<(Vec<C64>, Grid)> {
    match rep {
        Representation::Demand => {
            let center = conjugate_mean(amplitudes, grid, 1.0, hbar);
            fourier_q_to_p_about(amplitudes, grid, hbar, center)
        }
        Representation::Supply => {
            let center = conjugate_mean(amplitudes, grid, -1.0, hbar);
            let step = crate::numerics::reciprocal_step(grid, hbar);
            fourier_p_to_q(amplitudes, grid, hbar, center - (grid.n() / 2) as f64 * step)
        }
    }
}

/// Refinement applied before tabulating `|ψ|²` of sampled amplitudes.
const DENSITY_REFINEMENT: usize = 4;

// |ψ|² on a finer grid, interpolating the samples as a band-limited signal.
fn sampled_density(amplitudes: &[C64], grid: &Grid) -> Result<Distribution> {
    let center = conjugate_mean(amplitudes, grid, 1.0, 1.0);
    let (fine, g) = crate::numerics::refine(amplitudes, grid, center, DENSITY_REFINEMENT)?;
    Distribution::tabulated(g, fine.iter().map(|a| a.norm_sqr()).collect())
}

fn support_of(values: &[C64], grid: &Grid) -> (f64, f64) {
    let max = values.iter().map(|v| v.norm_sqr()).fold(0.0, f64::max);
    let cut = max * 1e-30;
    let first = values.iter().position(|v| v.norm_sqr() > cut).unwrap_or(0);
    let last = values.iter().rposition(|v| v.norm_sqr() > cut).unwrap_or(values.len() - 1);
    (grid.point(first.saturating_sub(1)), grid.point((last + 1).min(values.len() - 1)))
}

/// Demand to supply picture via the discrete Fourier transform with
/// `ħ = risk.hbar_e()`.
pub fn to_supply_rep(s: &Strategy, risk: &RiskParams) -> Result<Strategy> {
    s.require_proper("supply representation")?;
    s.require_rep(Representation::Demand)?;
    s.conjugate_sampled(risk.hbar_e())
}

/// Supply to demand picture, inverse of [`to_supply_rep`].
pub fn to_demand_rep(s: &Strategy, risk: &RiskParams) -> Result<Strategy> {
    s.require_proper("demand representation")?;
    s.require_rep(Representation::Supply)?;
    s.conjugate_sampled(risk.hbar_e())
}

pub fn normalize(s: &Strategy) -> Result<Strategy> {
    s.normalize()
}

/// Probability that the trader buys at log-price `log_price` or lower,
/// `∫_{-∞}^{ln c} |⟨q|ψ⟩|² dq / ⟨ψ|ψ⟩`. For `delta(a)` this is `[ln c ≥ a]`.
pub fn buy_probability(s: &Strategy, log_price: f64) -> Result<f64> {
    s.require_rep(Representation::Demand)?;
    Ok(s.price_distribution()?.cdf(log_price))
}

/// Probability that the trader sells at price `c = e^{log_price}` or higher,
/// `∫_{-∞}^{ln(1/c)} |⟨p|ψ⟩|² dp / ⟨ψ|ψ⟩`.
pub fn sell_probability(s: &Strategy, log_price: f64) -> Result<f64> {
    s.require_rep(Representation::Supply)?;
    Ok(s.price_distribution()?.cdf(-log_price))
}

/// Mean and standard deviation of `|ψ|²` in the strategy's own picture.
pub fn moments(s: &Strategy) -> Result<(f64, f64)> {
    s.require_proper("moments")?;
    let d = s.price_distribution()?;
    Ok((d.mean(), d.std()))
}

/// The game state: one independent strategy per trader.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketState {
    traders: Vec<Strategy>,
}

impl MarketState {
    pub fn new(traders: Vec<Strategy>) -> Result<Self> {
        if traders.is_empty() {
            return Err(Error::ContractViolation("market needs at least one trader".into()));
        }
        for t in &traders {
            if !t.is_improper() {
                t.normalize()?;
            }
        }
        Ok(Self { traders })
    }

    pub fn traders(&self) -> &[Strategy] {
        &self.traders
    }

    pub fn len(&self) -> usize {
        self.traders.len()
    }

    pub fn is_empty(&self) -> bool {
        self.traders.is_empty()
    }
}

impl Strategy {
    /// The same state in the conjugate picture, sampled on the reciprocal of
    /// [`default_grid`](Self::default_grid).
    pub fn conjugate_sampled(&self, hbar: f64) -> Result<Strategy> {
        self.require_proper("conjugate picture")?;
        let (amps, grid) = self.sample(hbar)?;
        let sign = match self.rep {
            Representation::Demand => 1.0,
            Representation::Supply => -1.0,
        };
        let center = match &self.form {
            Form::Sampled { .. } => conjugate_mean(&amps, &grid, sign, hbar),
            _ => {
                let (c, d) = self.extent(self.rep.conjugate(), hbar)?;
                0.5 * (c + d)
            }
        };
        let (out, g) = match self.rep {
            Representation::Demand => fourier_q_to_p_about(&amps, &grid, hbar, center)?,
            Representation::Supply => {
                let step = crate::numerics::reciprocal_step(&grid, hbar);
                fourier_p_to_q(&amps, &grid, hbar, center - (grid.n() / 2) as f64 * step)?
            }
        };
        Ok(Strategy::sampled(out, g)?.in_representation(self.rep.conjugate()))
    }

    /// Mean of the strategy in the given picture.
    pub fn mean_in(&self, rep: Representation, hbar: f64) -> Result<f64> {
        if rep == self.rep {
            return self.own_mean();
        }
        Ok(self.distribution_in(rep, hbar)?.mean())
    }
}
