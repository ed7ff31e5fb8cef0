//! Market clearing against the Rest of the World.
//!
//! In a round every trader is put on one side of the market, buyers draw a
//! log-price `q` from `|⟨q|ψ⟩|²` and sellers a log-price `p` from
//! `|⟨p|ψ⟩|²`. A buyer-seller pair trades one unit iff `q + p ≤ 0`.
//!
//! The second half of the module is the profit-intensity model of a trader
//! who commits to a threshold `a` against a Gaussian RW price: the intensity
//! `ρ(a) = E[(X - a)⁺]`, `X ~ N(0, σ²)`, has the fixed point
//! `a ≈ 0.27603 σ`.

use rayon::prelude::*;

use crate::numerics::special::{normal_cdf, normal_pdf};
use crate::numerics::{find_root, Distribution, RandomSource, DEFAULT_ROOT_TOL};
use crate::risk::thermal_energy;
use crate::strategy::{Form, MarketState, Representation, RiskParams, Strategy};
use crate::wigner::{thermal_grids, thermal_wigner, PhaseSpaceDensity, ThermalMode};
use crate::{Error, Result};

/// Aggregate counterparty: a phase-space density and, for Gibbs markets,
/// its inverse temperature.
#[derive(Debug, Clone)]
pub struct RWModel {
    density: PhaseSpaceDensity,
    beta: Option<f64>,
}

impl RWModel {
    pub fn new(density: PhaseSpaceDensity, beta: Option<f64>) -> Result<Self> {
        let mass = density.total_mass();
        if (mass - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidParameter(format!("RW density has mass {mass}")));
        }
        if let Some(b) = beta {
            if !(b.is_finite() && b > 0.0) {
                return Err(Error::ParameterRange(format!("beta must be positive, got {b}")));
            }
        }
        Ok(Self { density, beta })
    }

    /// Thermal RW at inverse temperature `beta` on an `n × n` grid.
    pub fn thermal(beta: f64, risk: &RiskParams, n: usize) -> Result<Self> {
        let (pg, qg) = thermal_grids(beta, risk, 9.0, n)?;
        Self::new(thermal_wigner(beta, risk, &pg, &qg, ThermalMode::ClosedForm)?, Some(beta))
    }

    pub fn density(&self) -> &PhaseSpaceDensity {
        &self.density
    }

    pub fn beta(&self) -> Option<f64> {
        self.beta
    }

    pub fn temperature(&self) -> Option<f64> {
        self.beta.map(|b| 1.0 / b)
    }

    /// Standard deviation of the RW demand log-price.
    pub fn sigma(&self) -> f64 {
        self.density.moments().std_q
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Buy,
    Sell,
}

impl Side {
    pub fn name(self) -> &'static str {
        match self {
            Self::Buy => "buy",
            Self::Sell => "sell",
        }
    }
}

/// Assignment of every trader to one side.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Division {
    buyers: Vec<usize>,
    sellers: Vec<usize>,
}

impl Division {
    /// Checks that the two sets are disjoint and cover `0..n`.
    pub fn new(mut buyers: Vec<usize>, mut sellers: Vec<usize>, n: usize) -> Result<Self> {
        buyers.sort_unstable();
        sellers.sort_unstable();
        let mut seen = vec![false; n];
        for &i in buyers.iter().chain(&sellers) {
            if i >= n || seen[i] {
                return Err(Error::ContractViolation(format!("trader {i} is out of range or assigned twice")));
            }
            seen[i] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::ContractViolation("every trader needs a side".into()));
        }
        Ok(Self { buyers, sellers })
    }

    pub fn buyers(&self) -> &[usize] {
        &self.buyers
    }

    pub fn sellers(&self) -> &[usize] {
        &self.sellers
    }

    pub fn side_of(&self, trader: usize) -> Side {
        if self.buyers.binary_search(&trader).is_ok() {
            Side::Buy
        } else {
            Side::Sell
        }
    }

    fn len(&self) -> usize {
        self.buyers.len() + self.sellers.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClearingPolicy {
    /// Each trader flips a fair coin for its side; committed (delta or
    /// discrete) traders keep the side of their own picture.
    RandomHalf,
    Fixed(Division),
}

/// A market with every trader's buy and sell price distributions tabulated
/// once, for repeated rounds.
#[derive(Debug, Clone)]
pub struct PreparedMarket {
    buy: Vec<Option<Distribution>>,
    sell: Vec<Option<Distribution>>,
    committed: Vec<Option<Side>>,
}

impl PreparedMarket {
    pub fn new(m: &MarketState, hbar: f64) -> Result<Self> {
        if m.len() < 2 {
            return Err(Error::ContractViolation("clearing needs at least two traders".into()));
        }
        let mut out = Self { buy: vec![], sell: vec![], committed: vec![] };
        for s in m.traders() {
            let natural = match s.representation() {
                Representation::Demand => Side::Buy,
                Representation::Supply => Side::Sell,
            };
            let own = s.price_distribution()?;
            let other =
                if s.is_improper() { None } else { Some(s.distribution_in(s.representation().conjugate(), hbar)?) };
            let (buy, sell) = match natural {
                Side::Buy => (Some(own), other),
                Side::Sell => (other, Some(own)),
            };
            out.buy.push(buy);
            out.sell.push(sell);
            out.committed.push(s.is_improper().then_some(natural));
        }
        Ok(out)
    }

    pub fn len(&self) -> usize {
        self.buy.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buy.is_empty()
    }

    fn divide(&self, policy: &ClearingPolicy, rng: &mut RandomSource) -> Result<Division> {
        let n = self.len();
        let division = match policy {
            ClearingPolicy::Fixed(d) => {
                if d.len() != n {
                    return Err(Error::ContractViolation(format!("division covers {} of {n} traders", d.len())));
                }
                d.clone()
            }
            ClearingPolicy::RandomHalf => {
                let (mut b, mut s) = (vec![], vec![]);
                for i in 0..n {
                    let side = match self.committed[i] {
                        Some(side) => side,
                        None if rng.coin() => Side::Buy,
                        None => Side::Sell,
                    };
                    match side {
                        Side::Buy => b.push(i),
                        Side::Sell => s.push(i),
                    }
                }
                Division::new(b, s, n)?
            }
        };
        for &i in division.buyers() {
            if self.buy[i].is_none() {
                return Err(Error::ImproperState(format!("trader {i} is committed to selling")));
            }
        }
        for &i in division.sellers() {
            if self.sell[i].is_none() {
                return Err(Error::ImproperState(format!("trader {i} is committed to buying")));
            }
        }
        Ok(division)
    }
}

/// Result of one clearing round.
#[derive(Debug, Clone, PartialEq)]
pub struct ClearingOutcome {
    pub division: Division,
    /// Sampled log-price per trader (`q` for buyers, `p` for sellers).
    pub prices: Vec<f64>,
    /// Signed capital flow per trader: `-e^q` for a buyer who traded, `+e^q`
    /// for its seller, zero otherwise.
    pub flows: Vec<f64>,
    /// Candidate `(buyer, seller, executed)` pairs in price priority.
    pub pairs: Vec<(usize, usize, bool)>,
}

impl ClearingOutcome {
    pub fn executed_count(&self) -> usize {
        self.pairs.iter().filter(|p| p.2).count()
    }

    pub fn traded(&self, trader: usize) -> bool {
        self.pairs.iter().any(|&(b, s, e)| e && (b == trader || s == trader))
    }
}

/// One round: divide, draw prices, then pair the highest bid (lowest `q`)
/// with the lowest ask (lowest `p`) while `q + p ≤ 0`.
pub fn clear_round(m: &PreparedMarket, policy: &ClearingPolicy, rng: &mut RandomSource) -> Result<ClearingOutcome> {
    let division = m.divide(policy, rng)?;
    let mut prices = vec![0.0; m.len()];
    for i in 0..m.len() {
        let d = match division.side_of(i) {
            Side::Buy => &m.buy[i],
            Side::Sell => &m.sell[i],
        };
        prices[i] = d.as_ref().expect("checked by divide").sample(rng);
    }
    let by_price = |ids: &[usize]| {
        let mut v = ids.to_vec();
        v.sort_by(|a, b| prices[*a].total_cmp(&prices[*b]).then(a.cmp(b)));
        v
    };
    let (buyers, sellers) = (by_price(division.buyers()), by_price(division.sellers()));
    let mut flows = vec![0.0; m.len()];
    let mut pairs = Vec::new();
    let mut open = true;
    for (&b, &s) in buyers.iter().zip(&sellers) {
        let executed = open && prices[b] + prices[s] <= 0.0;
        open = executed;
        if executed {
            let value = prices[b].exp();
            flows[b] = -value;
            flows[s] = value;
        }
        pairs.push((b, s, executed));
    }
    Ok(ClearingOutcome { division, prices, flows, pairs })
}

/// `rounds` independent rounds; round `r` draws from stream `r` of `seed`.
pub fn run_rounds(
    m: &PreparedMarket,
    policy: &ClearingPolicy,
    rounds: usize,
    seed: u64,
) -> Result<Vec<ClearingOutcome>> {
    (0..rounds).into_par_iter().map(|r| clear_round(m, policy, &mut RandomSource::new(seed, r as u64))).collect()
}

/// Fraction of rounds with at least one executed pair, and its standard
/// error. Same streams as [`run_rounds`].
pub fn execution_rate(m: &PreparedMarket, policy: &ClearingPolicy, rounds: usize, seed: u64) -> Result<(f64, f64)> {
    if rounds == 0 {
        return Err(Error::ContractViolation("need at least one round".into()));
    }
    let hits: usize = (0..rounds)
        .into_par_iter()
        .map(|r| {
            let out = clear_round(m, policy, &mut RandomSource::new(seed, r as u64))?;
            Ok(usize::from(out.executed_count() > 0))
        })
        .sum::<Result<usize>>()?;
    let p = hits as f64 / rounds as f64;
    Ok((p, (p * (1.0 - p) / rounds as f64).sqrt()))
}

/// Writes `round,trader,side,logprice,executed,flow`.
pub fn write_round_log<W: std::io::Write>(rounds: &[ClearingOutcome], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["round", "trader", "side", "logprice", "executed", "flow"])?;
    for (r, o) in rounds.iter().enumerate() {
        for i in 0..o.prices.len() {
            w.write_record(&[
                r.to_string(),
                i.to_string(),
                o.division.side_of(i).name().to_string(),
                o.prices[i].to_string(),
                u8::from(o.traded(i)).to_string(),
                o.flows[i].to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Expected profit rate of a trader holding out for threshold `a` against an
/// RW log-price of spread `sigma`.
pub trait ProfitIntensity: Sync {
    fn intensity(&self, a: f64, sigma: f64) -> f64;
}

/// `σ [φ(a/σ) - (a/σ)(1 - Φ(a/σ))] = E[(X - a)⁺]` for `X ~ N(0, σ²)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct GaussianSurplus;

impl ProfitIntensity for GaussianSurplus {
    fn intensity(&self, a: f64, sigma: f64) -> f64 {
        let z = a / sigma;
        sigma * (normal_pdf(z) - z * normal_cdf(-z))
    }
}

fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::InvalidParameter(format!("RW sigma must be positive, got {sigma}")));
    }
    Ok(())
}

pub fn profit_intensity(a: f64, rw_sigma: f64) -> Result<f64> {
    check_sigma(rw_sigma)?;
    Ok(GaussianSurplus.intensity(a, rw_sigma))
}

/// Intensity of a committed strategy: `⟨q|-a⟩` and `⟨p|a⟩` both hold out for
/// threshold `a`.
pub fn delta_intensity(s: &Strategy, rw_sigma: f64) -> Result<f64> {
    let Form::Delta { location } = s.form() else {
        return Err(Error::NotApplicable("profit intensity is defined for delta strategies".into()));
    };
    let a = match s.representation() {
        Representation::Demand => -location,
        Representation::Supply => *location,
    };
    profit_intensity(a, rw_sigma)
}

/// The `a` with `ρ(a) = a`, bracketed on `(0, 5σ)`.
pub fn fixed_point(rw_sigma: f64) -> Result<f64> {
    fixed_point_with(&GaussianSurplus, rw_sigma)
}

pub fn fixed_point_with(model: &dyn ProfitIntensity, rw_sigma: f64) -> Result<f64> {
    check_sigma(rw_sigma)?;
    find_root(|a| model.intensity(a, rw_sigma) - a, (0.0, 5.0 * rw_sigma), DEFAULT_ROOT_TOL * rw_sigma)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoolingRow {
    pub sigma: f64,
    pub fixed_point: f64,
    /// Intensity attained at the fixed point.
    pub max_intensity: f64,
}

/// Fixed point and attainable intensity along a cooling schedule.
pub fn cooling_experiment(sigmas: &[f64]) -> Result<Vec<CoolingRow>> {
    if sigmas.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::ContractViolation("cooling schedule must be non-increasing".into()));
    }
    sigmas
        .iter()
        .map(|&sigma| {
            let a = fixed_point(sigma)?;
            Ok(CoolingRow { sigma, fixed_point: a, max_intensity: profit_intensity(a, sigma)? })
        })
        .collect()
}

/// Writes `sigma,fixed_point,max_intensity`.
pub fn write_cooling_table<W: std::io::Write>(rows: &[CoolingRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["sigma", "fixed_point", "max_intensity"])?;
    for r in rows {
        w.write_record(&[r.sigma.to_string(), r.fixed_point.to_string(), r.max_intensity.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// `(T, ⟨H⟩)` of a Gibbs market at inverse temperature `beta`.
pub fn market_temperature(beta: f64, risk: &RiskParams) -> Result<(f64, f64)> {
    let energy = thermal_energy(beta, risk)?;
    Ok((1.0 / beta, energy))
}
