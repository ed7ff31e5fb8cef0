//! q-auctions: `N` buyers in the demand picture bid against one seller in the
//! supply picture.
//!
//! A buyer's draw `q` corresponds to the bid price `e^{-q}`, so the winner
//! holds the smallest `q`. The seller's draw `p` is a withdrawal price and a
//! deal happens iff `q_min + p ≤ 0`. The winner pays `e^{-q_min}` in a
//! first-price auction and the second price in decreasing order, with the
//! seller's reserve `-p` counted as a bid, in a second-price auction.

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::numerics::{Distribution, NeumaierSum, RandomSource};
use crate::strategy::{Representation, Strategy};
use crate::wigner::hudson_check;
use crate::{Error, Result};

/// Role of a player in a q-transaction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    /// `|0⟩`: accepts or rejects a price.
    Accepts,
    /// `|1⟩`: proposes a price.
    Proposes,
}

/// A pair can only transact with opposite polarizations.
pub fn can_transact(a: Role, b: Role) -> bool {
    a != b
}

/// Amplitudes over the two role assignments: buyers propose (first price)
/// or the seller reveals a withdrawal price (second price).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Polarization {
    buyers_propose: C64,
    seller_reveals: C64,
}

impl Polarization {
    pub fn new(buyers_propose: C64, seller_reveals: C64) -> Result<Self> {
        let n = buyers_propose.norm_sqr() + seller_reveals.norm_sqr();
        if (n - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!("polarization amplitudes have norm {n}")));
        }
        Ok(Self { buyers_propose, seller_reveals })
    }

    /// Probability of the first-price branch.
    pub fn first_price_weight(&self) -> f64 {
        self.buyers_propose.norm_sqr()
    }

    /// The roles `(buyers, seller)` in each branch.
    pub fn branches() -> [(Role, Role); 2] {
        [(Role::Proposes, Role::Accepts), (Role::Accepts, Role::Proposes)]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Pricing {
    First,
    Second,
    /// First price with probability `w`, second price otherwise.
    Mixed(f64),
}

impl Pricing {
    fn first_weight(self) -> f64 {
        match self {
            Self::First => 1.0,
            Self::Second => 0.0,
            Self::Mixed(w) => w,
        }
    }
}

/// `q + p ≤ 0`.
pub fn rationality(q: f64, p: f64) -> bool {
    q + p <= 0.0
}

#[derive(Debug, Clone)]
pub struct AuctionInstance {
    buyers: Vec<Strategy>,
    seller: Strategy,
    pricing: Pricing,
    samples: usize,
    seed: u64,
    buyer_dists: Vec<Distribution>,
    seller_dist: Distribution,
}

impl AuctionInstance {
    pub fn new(buyers: Vec<Strategy>, seller: Strategy, pricing: Pricing, samples: usize, seed: u64) -> Result<Self> {
        if buyers.is_empty() {
            return Err(Error::ContractViolation("an auction needs at least one buyer".into()));
        }
        if samples == 0 {
            return Err(Error::ContractViolation("an auction needs at least one sample".into()));
        }
        if let Pricing::Mixed(w) = pricing {
            if !(0.0..=1.0).contains(&w) {
                return Err(Error::ParameterRange(format!("mixing weight {w} outside [0, 1]")));
            }
        }
        for b in &buyers {
            if b.representation() != Representation::Demand {
                return Err(Error::RepresentationMismatch { expected: "demand", found: b.representation().name() });
            }
        }
        if seller.representation() != Representation::Supply {
            return Err(Error::RepresentationMismatch { expected: "supply", found: seller.representation().name() });
        }
        let buyer_dists = buyers.iter().map(|b| b.price_distribution()).collect::<Result<_>>()?;
        let seller_dist = seller.price_distribution()?;
        Ok(Self { buyers, seller, pricing, samples, seed, buyer_dists, seller_dist })
    }

    pub fn buyers(&self) -> &[Strategy] {
        &self.buyers
    }

    pub fn seller(&self) -> &Strategy {
        &self.seller
    }

    pub fn pricing(&self) -> Pricing {
        self.pricing
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn with_pricing(&self, pricing: Pricing) -> Result<Self> {
        Self::new(self.buyers.clone(), self.seller.clone(), pricing, self.samples, self.seed)
    }

    /// Same instance with buyer `k` removed.
    pub fn without_buyer(&self, k: usize) -> Result<Self> {
        let mut b = self.buyers.clone();
        b.remove(k);
        Self::new(b, self.seller.clone(), self.pricing, self.samples, self.seed)
    }

    // Probability that buyer k wins at bid q: every other buyer bids less
    // (ties go to the lower index) and the seller accepts.
    fn win_weight(&self, k: usize, q: f64) -> f64 {
        let mut w = self.seller_dist.cdf(-q);
        for (m, d) in self.buyer_dists.iter().enumerate() {
            if m < k {
                w *= 1.0 - d.cdf(q);
            } else if m > k {
                w *= 1.0 - d.cdf_below(q);
            }
        }
        w
    }
}

/// One Monte Carlo draw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleOutcome {
    /// Winning buyer, if the seller accepted.
    pub winner: Option<usize>,
    pub q_min: f64,
    pub first_price: f64,
    pub second_price: f64,
}

/// Settles one draw of buyer log-prices `qs` and seller log-price `p`.
pub fn settle(qs: &[f64], p: f64) -> SampleOutcome {
    let mut w = 0;
    for (i, q) in qs.iter().enumerate() {
        if *q < qs[w] {
            w = i;
        }
    }
    let q_min = qs[w];
    if !rationality(q_min, p) {
        return SampleOutcome { winner: None, q_min, first_price: 0.0, second_price: 0.0 };
    }
    let runner_up = qs.iter().enumerate().filter(|(i, _)| *i != w).fold(-p, |m, (_, q)| m.min(*q));
    SampleOutcome { winner: Some(w), q_min, first_price: (-q_min).exp(), second_price: (-runner_up).exp() }
}

/// Draws every buyer then the seller from `rng` and settles.
pub fn sample_path(inst: &AuctionInstance, rng: &mut RandomSource) -> SampleOutcome {
    let qs: Vec<f64> = inst.buyer_dists.iter().map(|d| d.sample(rng)).collect();
    let p = inst.seller_dist.sample(rng);
    settle(&qs, p)
}

/// Density of "buyer `k` wins at log-price `q` and the deal executes".
pub fn transaction_density(inst: &AuctionInstance, k: usize, q: f64) -> Result<f64> {
    let d = inst.buyer_dists.get(k).ok_or_else(|| Error::ContractViolation(format!("no buyer {k}")))?;
    let Some(f) = d.pdf(q) else {
        return Err(Error::NotApplicable(format!(
            "buyer {k} is committed to exact prices; see transaction_probabilities"
        )));
    };
    Ok(f * inst.win_weight(k, q))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransactionProbabilities {
    /// Probability that buyer `k` wins and trades.
    pub per_buyer: Vec<f64>,
    /// Probability that the seller rejects the best bid, computed
    /// independently from the seller's side.
    pub no_trade: f64,
}

impl TransactionProbabilities {
    pub fn total(&self) -> f64 {
        self.per_buyer.iter().sum()
    }
}

const GAUSS5: [(f64, f64); 5] = [
    (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.0, 0.568_888_888_888_888_9),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.906_179_845_938_664, 0.236_926_885_056_189_1),
];

fn gauss(a: f64, b: f64, f: &impl Fn(f64) -> f64) -> f64 {
    let (m, h) = (0.5 * (a + b), 0.5 * (b - a));
    h * GAUSS5.iter().map(|(x, w)| w * f(m + h * x)).sum::<f64>()
}

fn atoms_of(d: &Distribution) -> &[f64] {
    match d {
        Distribution::Atoms { locs, .. } => locs,
        _ => &[],
    }
}

// E[f(X)] with f piecewise smooth between `breaks`.
fn expectation(d: &Distribution, breaks: &[f64], f: impl Fn(f64) -> f64) -> f64 {
    let (lo, hi, panel) = match d {
        Distribution::Atoms { locs, cum, .. } => {
            let mut acc = NeumaierSum::default();
            let mut prev = 0.0;
            for (x, c) in locs.iter().zip(cum) {
                acc.add((c - prev) * f(*x));
                prev = *c;
            }
            return acc.total();
        }
        Distribution::Normal { mean, std } => (mean - 12.0 * std, mean + 12.0 * std, std / 16.0),
        Distribution::Tabulated { grid, .. } => (grid.lo(), grid.hi(), grid.spacing()),
    };
    let g = |x: f64| f(x) * d.pdf(x).expect("continuous");
    let mut cuts: Vec<f64> = breaks.iter().copied().filter(|b| *b > lo && *b < hi).collect();
    cuts.push(lo);
    cuts.push(hi);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut acc = NeumaierSum::default();
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let n = ((b - a) / panel).ceil().max(1.0) as usize;
        let h = (b - a) / n as f64;
        match d {
            Distribution::Tabulated { grid, .. } => {
                // split further at the density's own nodes
                let mut x = a;
                while x < b {
                    let next = match grid.locate(x) {
                        Some((i, _)) => grid.point(i + 1).min(b),
                        None => b,
                    };
                    let next = if next <= x { (x + h).min(b) } else { next };
                    acc.add(gauss(x, next, &g));
                    x = next;
                }
            }
            _ => {
                for i in 0..n {
                    acc.add(gauss(a + i as f64 * h, a + (i + 1) as f64 * h, &g));
                }
            }
        }
    }
    acc.total()
}

/// Winning and no-trade probabilities by quadrature over the exact price
/// measures; committed traders enter as atoms.
pub fn transaction_probabilities(inst: &AuctionInstance) -> TransactionProbabilities {
    let seller_atoms: Vec<f64> = atoms_of(&inst.seller_dist).iter().map(|p| -p).collect();
    let per_buyer = (0..inst.buyer_dists.len())
        .map(|k| {
            let mut breaks = seller_atoms.clone();
            for (m, d) in inst.buyer_dists.iter().enumerate() {
                if m != k {
                    breaks.extend_from_slice(atoms_of(d));
                }
            }
            expectation(&inst.buyer_dists[k], &breaks, |q| inst.win_weight(k, q))
        })
        .collect();
    let breaks: Vec<f64> = inst.buyer_dists.iter().flat_map(|d| atoms_of(d).iter().map(|q| -q)).collect();
    let no_trade =
        expectation(&inst.seller_dist, &breaks, |p| inst.buyer_dists.iter().map(|d| 1.0 - d.cdf(-p)).product());
    TransactionProbabilities { per_buyer, no_trade }
}

/// Equal-width histogram.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram {
    fn new(lo: f64, hi: f64, bins: usize) -> Self {
        let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5, hi + 0.5) };
        let edges = (0..=bins).map(|i| lo + (hi - lo) * i as f64 / bins as f64).collect();
        Self { edges, counts: vec![0; bins] }
    }

    fn add(&mut self, x: f64) {
        let bins = self.counts.len();
        let (lo, hi) = (self.edges[0], self.edges[bins]);
        if !(lo..=hi).contains(&x) {
            return;
        }
        let i = (((x - lo) / (hi - lo) * bins as f64) as usize).min(bins - 1);
        self.counts[i] += 1;
    }

    fn merge(&mut self, other: &Self) {
        self.counts.iter_mut().zip(&other.counts).for_each(|(a, b)| *a += b);
    }

    pub fn width(&self) -> f64 {
        self.edges[1] - self.edges[0]
    }
}

/// Bins of the winning log-price histogram.
pub const HISTOGRAM_BINS: usize = 64;
const CHUNK: usize = 1 << 14;

/// Monte Carlo summary of an auction.
#[derive(Debug, Clone, PartialEq)]
pub struct AuctionOutcome {
    pub samples: usize,
    pub winner_counts: Vec<u64>,
    pub winner_freq: Vec<f64>,
    pub p_no_trade: f64,
    /// Mean seller revenue per draw, no-trade draws counting as zero.
    pub revenue_mean: f64,
    pub revenue_std: f64,
    pub revenue_se: f64,
    /// Winning log-prices `q_min` of executed draws.
    pub histogram: Histogram,
}

#[derive(Clone)]
struct Tally {
    wins: Vec<u64>,
    first: NeumaierSum,
    first_sq: NeumaierSum,
    second: NeumaierSum,
    second_sq: NeumaierSum,
    hist: Histogram,
}

impl Tally {
    fn merge(mut self, o: &Tally) -> Tally {
        self.wins.iter_mut().zip(&o.wins).for_each(|(a, b)| *a += b);
        self.first.merge(&o.first);
        self.first_sq.merge(&o.first_sq);
        self.second.merge(&o.second);
        self.second_sq.merge(&o.second_sq);
        self.hist.merge(&o.hist);
        self
    }
}

/// Simulates `inst.samples()` draws. Chunk `c` of the draws uses stream `c`
/// of the seed, and chunks are combined in order, so the outcome does not
/// depend on the thread count.
pub fn run_auction(inst: &AuctionInstance) -> AuctionOutcome {
    let n = inst.buyers.len();
    let lo = inst.buyer_dists.iter().map(|d| d.support().0).fold(f64::INFINITY, f64::min);
    let hi = inst.buyer_dists.iter().map(|d| d.support().1).fold(f64::NEG_INFINITY, f64::max);
    let empty = Tally {
        wins: vec![0; n],
        first: NeumaierSum::default(),
        first_sq: NeumaierSum::default(),
        second: NeumaierSum::default(),
        second_sq: NeumaierSum::default(),
        hist: Histogram::new(lo, hi, HISTOGRAM_BINS),
    };
    let chunks = inst.samples.div_ceil(CHUNK);
    let tallies: Vec<Tally> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = RandomSource::new(inst.seed, c as u64);
            let mut t = empty.clone();
            let todo = CHUNK.min(inst.samples - c * CHUNK);
            for _ in 0..todo {
                let s = sample_path(inst, &mut rng);
                if let Some(w) = s.winner {
                    t.wins[w] += 1;
                    t.first.add(s.first_price);
                    t.first_sq.add(s.first_price * s.first_price);
                    t.second.add(s.second_price);
                    t.second_sq.add(s.second_price * s.second_price);
                    t.hist.add(s.q_min);
                }
            }
            t
        })
        .collect();
    let t = tallies.iter().fold(empty.clone(), |acc, t| acc.merge(t));
    let total = inst.samples as f64;
    let w = inst.pricing.first_weight();
    let mean = (w * t.first.total() + (1.0 - w) * t.second.total()) / total;
    let second_moment = (w * t.first_sq.total() + (1.0 - w) * t.second_sq.total()) / total;
    let var = (second_moment - mean * mean).max(0.0) * total / (total - 1.0).max(1.0);
    let traded: u64 = t.wins.iter().sum();
    AuctionOutcome {
        samples: inst.samples,
        winner_freq: t.wins.iter().map(|c| *c as f64 / total).collect(),
        winner_counts: t.wins,
        p_no_trade: 1.0 - traded as f64 / total,
        revenue_mean: mean,
        revenue_std: var.sqrt(),
        revenue_se: (var / total).sqrt(),
        histogram: t.hist,
    }
}

/// Runs the instance with buyers proposing in a fraction `weight` of the
/// draws and the seller revealing otherwise; statistics are the blend.
pub fn mixed_polarization_auction(inst: &AuctionInstance, weight: f64) -> Result<AuctionOutcome> {
    if !(0.0..=1.0).contains(&weight) {
        return Err(Error::ParameterRange(format!("polarization weight {weight} outside [0, 1]")));
    }
    Ok(run_auction(&inst.with_pricing(Pricing::Mixed(weight))?))
}

/// Exact outcome of an instance whose traders are all committed to finitely
/// many prices.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactOutcome {
    pub winner_prob: Vec<f64>,
    pub p_no_trade: f64,
    pub revenue_mean: f64,
}

/// Largest number of joint outcomes [`enumerate_auction`] will visit.
pub const MAX_ENUMERATION: usize = 1 << 20;

fn atom_table(d: &Distribution) -> Option<Vec<(f64, f64)>> {
    let Distribution::Atoms { locs, cum, .. } = d else {
        return None;
    };
    let mut prev = 0.0;
    Some(
        locs.iter()
            .zip(cum)
            .map(|(x, c)| {
                let w = c - prev;
                prev = *c;
                (*x, w)
            })
            .collect(),
    )
}

// Visits every joint outcome of the atom tables in lexicographic order.
fn for_each_outcome(tables: &[Vec<(f64, f64)>], mut f: impl FnMut(&[f64], f64)) -> Result<()> {
    let count = tables.iter().try_fold(1usize, |acc, t| acc.checked_mul(t.len())).unwrap_or(usize::MAX);
    if count > MAX_ENUMERATION {
        return Err(Error::NotApplicable(format!("{count} joint outcomes are too many to enumerate")));
    }
    let mut idx = vec![0usize; tables.len()];
    let mut xs = vec![0.0; tables.len()];
    loop {
        let mut prob = 1.0;
        for (j, t) in tables.iter().enumerate() {
            xs[j] = t[idx[j]].0;
            prob *= t[idx[j]].1;
        }
        f(&xs, prob);
        let mut j = tables.len();
        loop {
            if j == 0 {
                return Ok(());
            }
            j -= 1;
            idx[j] += 1;
            if idx[j] < tables[j].len() {
                break;
            }
            idx[j] = 0;
        }
    }
}

/// Exhaustive enumeration; `NotApplicable` unless every trader is committed.
pub fn enumerate_auction(inst: &AuctionInstance) -> Result<ExactOutcome> {
    let mut tables = Vec::new();
    for d in inst.buyer_dists.iter().chain(std::iter::once(&inst.seller_dist)) {
        tables.push(atom_table(d).ok_or_else(|| Error::NotApplicable("enumeration needs committed traders".into()))?);
    }
    let n = inst.buyers.len();
    let w = inst.pricing.first_weight();
    let mut winner_prob = vec![0.0; n];
    let mut revenue = NeumaierSum::default();
    for_each_outcome(&tables, |xs, prob| {
        let s = settle(&xs[..n], xs[n]);
        if let Some(k) = s.winner {
            winner_prob[k] += prob;
            revenue.add(prob * (w * s.first_price + (1.0 - w) * s.second_price));
        }
    })?;
    let traded: f64 = winner_prob.iter().sum();
    Ok(ExactOutcome { winner_prob, p_no_trade: 1.0 - traded, revenue_mean: revenue.total() })
}

/// Expected second-price payoff per candidate bid.
#[derive(Debug, Clone, PartialEq)]
pub struct VickreyReport {
    /// `(bid, expected payoff, standard error)`; the error is zero when exact.
    pub rows: Vec<(f64, f64, f64)>,
    /// Bids attaining the maximum (exactly, or within three standard errors
    /// of the paired difference to the best bid).
    pub argmax: Vec<f64>,
    pub truthful_in_argmax: bool,
    pub exact: bool,
}

// Bidder at index 0 bids `b`; payoff e^{-v} - price when it wins.
fn vickrey_payoff(valuation: f64, b: f64, opp: &[f64], p: f64) -> f64 {
    let mut qs = Vec::with_capacity(opp.len() + 1);
    qs.push(b);
    qs.extend_from_slice(opp);
    let s = settle(&qs, p);
    if s.winner == Some(0) {
        (-valuation).exp() - s.second_price
    } else {
        0.0
    }
}

/// Payoff table of a second-price auction for a bidder with log-price
/// valuation `valuation` (value `e^{-valuation}`). Committed opponents and
/// seller are enumerated exactly; otherwise `samples` common random draws
/// are shared by all bids. Opponents or a seller with a negative Wigner
/// function are refused.
pub fn vickrey_truthfulness_check(
    valuation: f64,
    bid_grid: &[f64],
    opponents: &[Strategy],
    seller: &Strategy,
    samples: usize,
    seed: u64,
) -> Result<VickreyReport> {
    if !bid_grid.contains(&valuation) {
        return Err(Error::ContractViolation("the bid grid must contain the valuation".into()));
    }
    for s in opponents.iter().chain(std::iter::once(seller)) {
        if !s.is_improper() && hudson_check(s, 1.0)?.class == crate::wigner::HudsonClass::NonGaussianNegative {
            return Err(Error::NotApplicable("truthfulness is only claimed for positive measures".into()));
        }
    }
    let mut buyers = vec![Strategy::delta(valuation)?];
    buyers.extend_from_slice(opponents);
    let inst = AuctionInstance::new(buyers, seller.clone(), Pricing::Second, samples.max(1), seed)?;
    let truthful = bid_grid.iter().position(|b| *b == valuation).expect("checked above");

    let tables: Option<Vec<_>> =
        inst.buyer_dists[1..].iter().chain(std::iter::once(&inst.seller_dist)).map(atom_table).collect();
    if let Some(tables) = tables {
        let mut sums = vec![NeumaierSum::default(); bid_grid.len()];
        for_each_outcome(&tables, |xs, prob| {
            let (opp, p) = xs.split_at(xs.len() - 1);
            for (s, b) in sums.iter_mut().zip(bid_grid) {
                s.add(prob * vickrey_payoff(valuation, *b, opp, p[0]));
            }
        })?;
        let rows: Vec<(f64, f64, f64)> = bid_grid.iter().zip(&sums).map(|(b, s)| (*b, s.total(), 0.0)).collect();
        let best = rows.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
        let argmax: Vec<f64> = rows.iter().filter(|r| r.1 == best).map(|r| r.0).collect();
        return Ok(VickreyReport { truthful_in_argmax: rows[truthful].1 == best, rows, argmax, exact: true });
    }

    if samples == 0 {
        return Err(Error::ContractViolation("Monte Carlo check needs samples".into()));
    }
    let k = bid_grid.len();
    let chunks = samples.div_ceil(CHUNK);
    // per chunk: Σ v_j and Σ v_j v_l over bids j, l
    let parts: Vec<(Vec<NeumaierSum>, Vec<NeumaierSum>)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = RandomSource::new(seed, c as u64);
            let mut sum = vec![NeumaierSum::default(); k];
            let mut cross = vec![NeumaierSum::default(); k * k];
            let mut v = vec![0.0; k];
            for _ in 0..CHUNK.min(samples - c * CHUNK) {
                let opp: Vec<f64> = inst.buyer_dists[1..].iter().map(|d| d.sample(&mut rng)).collect();
                let p = inst.seller_dist.sample(&mut rng);
                for (j, b) in bid_grid.iter().enumerate() {
                    v[j] = vickrey_payoff(valuation, *b, &opp, p);
                    sum[j].add(v[j]);
                }
                for j in 0..k {
                    for l in j..k {
                        cross[j * k + l].add(v[j] * v[l]);
                    }
                }
            }
            (sum, cross)
        })
        .collect();
    let n = samples as f64;
    let total = |f: &dyn Fn(&(Vec<NeumaierSum>, Vec<NeumaierSum>)) -> f64| parts.iter().map(f).sum::<f64>() / n;
    let means: Vec<f64> = (0..k).map(|j| total(&|p| p.0[j].total())).collect();
    let moment = |j: usize, l: usize| {
        let (a, b) = if j <= l { (j, l) } else { (l, j) };
        total(&|p| p.1[a * k + b].total())
    };
    let ses: Vec<f64> = (0..k).map(|j| ((moment(j, j) - means[j] * means[j]).max(0.0) / n).sqrt()).collect();
    let best = (0..k).max_by(|a, b| means[*a].total_cmp(&means[*b])).expect("nonempty grid");
    // paired standard error of payoff(best) - payoff(j)
    let diff_se = |j: usize| {
        let m = means[best] - means[j];
        let var = moment(best, best) + moment(j, j) - 2.0 * moment(best, j) - m * m;
        (var.max(0.0) / n).sqrt()
    };
    let near = |j: usize| means[best] - means[j] <= 3.0 * diff_se(j);
    let argmax: Vec<f64> = (0..k).filter(|&j| near(j)).map(|j| bid_grid[j]).collect();
    let rows = bid_grid.iter().enumerate().map(|(j, b)| (*b, means[j], ses[j])).collect();
    Ok(VickreyReport { rows, argmax, truthful_in_argmax: near(truthful), exact: false })
}
