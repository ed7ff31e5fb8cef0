use qmg_core::auction::{run_auction, transaction_probabilities, AuctionInstance, Pricing};
use qmg_core::clearing::{execution_rate, fixed_point, ClearingPolicy, Division, PreparedMarket, RWModel};
use qmg_core::risk::risk_expectation;
use qmg_core::strategy::{buy_probability, parse_strategy, LiteralContext, MarketState};
use qmg_core::wigner::{dominant_curves, phase_space_grids, wigner_transform};
use qmg_core::zeno::{survival_probability, ZenoRun};
use qmg_core::{RiskParams, Strategy};

fn ctx() -> LiteralContext {
    LiteralContext::default()
}

#[test]
fn literal_to_curves() {
    let s = parse_strategy("gaussian(0.2, 0.6, 0.5)", &ctx()).unwrap();
    let (pg, qg) = phase_space_grids(&s, 1.0, 151, 151).unwrap();
    let w = wigner_transform(&s, &pg, &qg, 1.0).unwrap();
    let m = w.moments();
    assert!((m.mean_q - 0.2).abs() < 1e-6);
    assert!((m.mean_p - 0.5).abs() < 1e-6);
    assert!((m.std_p - 1.0 / 1.2).abs() < 1e-6);

    let curves = dominant_curves(&w, None, None).unwrap();
    assert!(curves.fd_monotone() && curves.fs_monotone());
    assert!((curves.fd(0.2) - 0.5).abs() < 1e-3);

    // the q-marginal integrates to the buying probability
    let direct = buy_probability(&s, 0.8).unwrap();
    let oracle = 0.5 * (1.0 + libm::erf((0.8 - 0.2) / (0.6 * std::f64::consts::SQRT_2)));
    assert!((direct - oracle).abs() < 1e-9);
}

#[test]
fn thermal_rest_of_world_sets_the_fixed_point() {
    let risk = RiskParams::default();
    let beta = 0.7;
    let rw = RWModel::thermal(beta, &risk, 201).unwrap();
    let (hbar, m, w) = (risk.effective_hbar(), risk.m(), risk.omega());
    let oracle = (hbar / (2.0 * m * w) / (beta * hbar * w / 2.0).tanh()).sqrt();
    assert!((rw.sigma() - oracle).abs() < 1e-6 * oracle);

    let a = fixed_point(rw.sigma()).unwrap();
    let a1 = fixed_point(1.0).unwrap();
    assert!((a - rw.sigma() * a1).abs() < 1e-9);
}

#[test]
fn clearing_two_gaussians_trades_half_the_time() {
    let buyer = parse_strategy("gaussian(0, 1)", &ctx()).unwrap();
    let seller = parse_strategy("supply:gaussian(0, 1)", &ctx()).unwrap();
    let market = PreparedMarket::new(&MarketState::new(vec![buyer, seller]).unwrap(), 1.0).unwrap();
    let policy = ClearingPolicy::Fixed(Division::new(vec![0], vec![1], 2).unwrap());
    let (rate, se) = execution_rate(&market, &policy, 20_000, 3).unwrap();
    // q + p is normal with mean 0
    assert!((rate - 0.5).abs() < 4.0 * se, "rate {rate} ± {se}");
}

#[test]
fn auction_from_literals() {
    let buyers: Vec<Strategy> = ["gaussian(0, 1)", "gaussian(0.5, 0.5)", "delta(1.0)"]
        .iter()
        .map(|l| parse_strategy(l, &ctx()).unwrap())
        .collect();
    let seller = parse_strategy("supply:gaussian(-0.2, 0.8)", &ctx()).unwrap();
    let inst = AuctionInstance::new(buyers, seller, Pricing::Second, 200_000, 19).unwrap();
    let exact = transaction_probabilities(&inst);
    let mc = run_auction(&inst);
    for (k, p) in exact.per_buyer.iter().enumerate() {
        let f = mc.winner_counts[k] as f64 / mc.samples as f64;
        let se = (p * (1.0 - p) / mc.samples as f64).sqrt().max(1e-6);
        assert!((f - p).abs() < 5.0 * se, "buyer {k}: {f} vs {p}");
    }
    assert!((exact.total() + exact.no_trade - 1.0).abs() < 1e-6);
}

#[test]
fn ground_state_literal_is_frozen_and_minimal() {
    let risk = RiskParams::default();
    let width = (risk.effective_hbar() / (2.0 * risk.m() * risk.omega())).sqrt();
    let s = parse_strategy(&format!("gaussian(0, {width})"), &ctx()).unwrap();
    let e = risk_expectation(&s, &risk).unwrap();
    assert!((e - 0.5 * risk.effective_hbar() * risk.omega()).abs() < 1e-9);
    let run = ZenoRun::new(&s, 0.3, 5, risk).unwrap();
    assert!((survival_probability(&run) - 1.0).abs() < 1e-9);
}
