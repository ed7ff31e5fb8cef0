use std::f64::consts::PI;

use crate::strategy::Strategy;
use proptest::prelude::*;

use super::*;
use crate::numerics::special::normal_cdf;
use crate::risk::{hamiltonian, thermal_energy};
use crate::strategy::RiskParams;
use crate::C64;

fn max_diff(a: &PhaseSpaceDensity, b: &PhaseSpaceDensity) -> f64 {
    a.values().iter().zip(b.values().iter()).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

fn grids(half_p: f64, half_q: f64, n: usize) -> (Grid, Grid) {
    (Grid::centered(0.0, half_p, n).unwrap(), Grid::centered(0.0, half_q, n).unwrap())
}

fn gaussian_closed_form(c: f64, w: f64, slope: f64, hbar: f64, p: f64, q: f64) -> f64 {
    let dp = p - hbar * slope;
    (-(q - c).powi(2) / (2.0 * w * w) - 2.0 * w * w * dp * dp / (hbar * hbar)).exp() / (PI * hbar)
}

#[test]
fn ground_state_values() {
    let r = RiskParams::default();
    let (pg, qg) = grids(6.0, 6.0, 121);
    let w0 = excited_wigner(0, &r, &pg, &qg).unwrap();
    let c = (60, 60);
    assert!((w0.values()[c] - 1.0 / PI).abs() < 1e-15);
    for ((i, j), v) in w0.values().indexed_iter() {
        let h = hamiltonian(&r, pg.point(i), qg.point(j));
        assert!((v - (-2.0 * h).exp() / PI).abs() < 1e-15);
    }
    let w1 = excited_wigner(1, &r, &pg, &qg).unwrap();
    assert!((w1.values()[c] + 1.0 / PI).abs() < 1e-15);
    let w0n = wigner_transform(&Strategy::hermite(0, r).unwrap(), &pg, &qg, 1.0).unwrap();
    assert!((w0n.values()[c] - 1.0 / PI).abs() < 1e-9);
    let w1n = wigner_transform(&Strategy::hermite(1, r).unwrap(), &pg, &qg, 1.0).unwrap();
    assert!((w1n.values()[c] + 1.0 / PI).abs() < 1e-9);
}

#[test]
fn gaussian_transform_matches_closed_form() {
    for (c, w, slope, hbar) in [(0.0, 1.0, 0.0, 1.0), (0.8, 0.6, -1.3, 1.0), (-1.0, 1.4, 0.5, 0.4)] {
        let s = Strategy::gaussian(c, w, slope).unwrap();
        let (pg, qg) = phase_space_grids(&s, hbar, 101, 101).unwrap();
        let d = wigner_transform(&s, &pg, &qg, hbar).unwrap();
        let exact = PhaseSpaceDensity::from_fn(pg, qg, hbar, DensityKind::Pure, |p, q| {
            gaussian_closed_form(c, w, slope, hbar, p, q)
        })
        .unwrap();
        assert!(max_diff(&d, &exact) < 1e-4, "{}", max_diff(&d, &exact));
        assert!(max_diff(&d, &exact) < 1e-8 * exact.max_abs(), "{}", max_diff(&d, &exact));
    }
}

#[test]
fn both_integral_forms_agree() {
    let r = RiskParams::default();
    let cat = Strategy::superposition(vec![
        (C64::new(1.0, 0.0), Strategy::gaussian(-2.0, 0.8, 0.3).unwrap()),
        (C64::new(0.0, 1.0), Strategy::gaussian(2.0, 0.8, -0.3).unwrap()),
    ])
    .unwrap();
    for s in [Strategy::hermite(3, r).unwrap(), cat, Strategy::gaussian(0.3, 0.9, 1.0).unwrap()] {
        let (pg, qg) = phase_space_grids(&s, 1.0, 81, 81).unwrap();
        let a = wigner_transform(&s, &pg, &qg, 1.0).unwrap();
        let b = wigner_transform_supply(&s, &pg, &qg, 1.0).unwrap();
        assert!(max_diff(&a, &b) < 1e-9, "{}", max_diff(&a, &b));
    }
}

#[test]
fn supply_picture_strategy() {
    let s = Strategy::gaussian(0.5, 0.7, 0.4).unwrap().in_representation(Representation::Supply);
    let (pg, qg) = phase_space_grids(&s, 1.0, 101, 101).unwrap();
    let d = wigner_transform(&s, &pg, &qg, 1.0).unwrap();
    // |φ(p)|² ~ N(0.5, 0.7²); q-mean = -ħ·slope
    let m = d.moments();
    assert!((m.mean_p - 0.5).abs() < 1e-8);
    assert!((m.std_p - 0.7).abs() < 1e-8);
    assert!((m.mean_q + 0.4).abs() < 1e-8);
    assert!((m.std_q - 1.0 / 1.4).abs() < 1e-8);
}

#[test]
fn marginals_reproduce_densities() {
    let r = RiskParams::default();
    let cases = vec![
        Strategy::hermite(3, r).unwrap(),
        Strategy::gaussian(1.0, 0.7, 0.0).unwrap(),
        Strategy::superposition(vec![
            (C64::new(1.0, 0.0), Strategy::gaussian(-3.0, 1.0, 0.0).unwrap()),
            (C64::new(1.0, 0.0), Strategy::gaussian(3.0, 1.0, 0.0).unwrap()),
        ])
        .unwrap(),
    ];
    for s in cases {
        let (pg, qg) = phase_space_grids(&s, 1.0, 161, 161).unwrap();
        let d = wigner_transform(&s, &pg, &qg, 1.0).unwrap();
        assert!((d.total_mass() - 1.0).abs() < 1e-6);
        let norm = s.norm_sq().unwrap();
        for (q, m) in qg.points().zip(d.marginal_q()) {
            let exact = s.amplitude_at(q).unwrap().norm_sqr() / norm;
            assert!((m - exact).abs() < 1e-5, "q={q}: {m} vs {exact}");
        }
        for (p, m) in pg.points().zip(d.marginal_p()) {
            let exact = s.conjugate_amplitude_at(p, 1.0).unwrap().norm_sqr() / norm;
            assert!((m - exact).abs() < 1e-5, "p={p}: {m} vs {exact}");
        }
    }
}

#[test]
fn sampled_strategy_transform() {
    let g = Strategy::gaussian(0.2, 0.8, 0.7).unwrap();
    let (amps, grid) = g.sample(1.0).unwrap();
    let s = Strategy::sampled(amps, grid).unwrap();
    let (pg, qg) = phase_space_grids(&g, 1.0, 61, 61).unwrap();
    let a = wigner_transform(&s, &pg, &qg, 1.0).unwrap();
    let b = wigner_transform(&g, &pg, &qg, 1.0).unwrap();
    assert!(max_diff(&a, &b) < 1e-6, "{}", max_diff(&a, &b));
    let c = wigner_transform_supply(&s, &pg, &qg, 1.0).unwrap();
    assert!(max_diff(&c, &b) < 1e-6, "{}", max_diff(&c, &b));
}

#[test]
fn improper_strategies_are_rejected() {
    let (pg, qg) = grids(3.0, 3.0, 11);
    let err = wigner_transform(&Strategy::delta(0.0).unwrap(), &pg, &qg, 1.0).unwrap_err();
    assert!(matches!(err, Error::ImproperState(_)));
    let err = hudson_check(&Strategy::discrete(vec![(0.0, 1.0)]).unwrap(), 1.0).unwrap_err();
    assert!(matches!(err, Error::ImproperState(_)));
}

#[test]
fn coherent_family() {
    let hbar = 1.0;
    let c = CoherentParams::new(0.0, 1.0 / 2f64.sqrt(), 0.0, 0.0).unwrap();
    let (pg, qg) = grids(5.0, 5.0, 101);
    let d = coherent_wigner(&c, hbar, &pg, &qg).unwrap();
    let (dp, dq) = (c.delta_p(hbar), c.delta_q());
    for ((i, j), v) in d.values().indexed_iter() {
        let (p, q) = (pg.point(i), qg.point(j));
        let fp = (-p * p / (2.0 * dp * dp)).exp() / (dp * (2.0 * PI).sqrt());
        let fq = (-q * q / (2.0 * dq * dq)).exp() / (dq * (2.0 * PI).sqrt());
        assert!((v - fp * fq).abs() < 1e-14);
    }

    for (r, eta, p0, q0) in [(0.5, 0.8, 0.3, -0.4), (-0.7, 1.2, -1.0, 0.5), (0.9, 0.5, 0.0, 1.0)] {
        let c = CoherentParams::new(r, eta, p0, q0).unwrap();
        let (dp, dq) = (c.delta_p(hbar), c.delta_q());
        assert!((dp * dq * (1.0 - r * r).sqrt() - hbar / 2.0).abs() < 1e-12);
        let pg = Grid::centered(p0, 10.0 * dp, 301).unwrap();
        let qg = Grid::centered(q0, 10.0 * dq, 301).unwrap();
        let d = coherent_wigner(&c, hbar, &pg, &qg).unwrap();
        assert!(d.min().0 >= 0.0);
        assert!(!is_giffen(&d, None).is_giffen);
        let m = d.moments();
        assert!((m.mass - 1.0).abs() < 1e-6);
        assert!((m.mean_p - p0).abs() < 1e-5);
        assert!((m.mean_q - q0).abs() < 1e-5);
        assert!((m.std_p - dp).abs() < 1e-5);
        assert!((m.std_q - dq).abs() < 1e-5);
        assert!((m.corr + r).abs() < 1e-5, "corr {} for r {r}", m.corr);
        assert!(m.std_p * m.std_q * (1.0 - m.corr * m.corr).sqrt() >= hbar / 2.0 - 1e-6);
    }
    let degenerate = CoherentParams::new(1.0, 1.0, 0.0, 0.0).unwrap();
    assert!(matches!(coherent_wigner(&degenerate, hbar, &pg, &qg), Err(Error::DegenerateDensity(_))));
    assert!(CoherentParams::new(1.5, 1.0, 0.0, 0.0).is_err());
    assert!(CoherentParams::new(0.0, 0.0, 0.0, 0.0).is_err());
}

#[test]
fn excited_family() {
    let r = RiskParams::new(1.0, 2.0, 1.5, 0.0).unwrap();
    for n in [0usize, 1, 2, 5, 12] {
        let s = Strategy::hermite(n, r).unwrap();
        let (pg, qg) = phase_space_grids(&s, 1.0, 201, 201).unwrap();
        let d = excited_wigner(n, &r, &pg, &qg).unwrap();
        assert!((d.total_mass() - 1.0).abs() < 1e-6, "n={n}: {}", d.total_mass());
        assert_eq!(is_giffen(&d, None).is_giffen, n >= 1, "n={n}");
    }
    let s = Strategy::hermite(3, r).unwrap();
    let (pg, qg) = phase_space_grids(&s, 1.0, 121, 121).unwrap();
    let exact = excited_wigner(3, &r, &pg, &qg).unwrap();
    let numeric = wigner_transform(&s, &pg, &qg, 1.0).unwrap();
    assert!(max_diff(&exact, &numeric) < 1e-4, "{}", max_diff(&exact, &numeric));
    let (pg, qg) = grids(1.0, 1.0, 9);
    assert!(excited_wigner(512, &r, &pg, &qg).is_ok());
    assert!(matches!(excited_wigner(513, &r, &pg, &qg), Err(Error::ParameterRange(_))));
}

#[test]
fn excited_giffen_witness_at_center() {
    let r = RiskParams::default();
    let (pg, qg) = grids(5.0, 5.0, 101);
    let g = is_giffen(&excited_wigner(1, &r, &pg, &qg).unwrap(), None);
    assert!(g.is_giffen);
    assert!(g.witness.0.abs() < 1e-12 && g.witness.1.abs() < 1e-12);
    assert!((g.min_value + 1.0 / PI).abs() < 1e-12);
}

#[test]
fn excited_high_order_is_stable() {
    let r = RiskParams::default();
    let s = Strategy::hermite(512, r).unwrap();
    let (pg, qg) = phase_space_grids(&s, 1.0, 9, 9).unwrap();
    let d = excited_wigner(512, &r, &pg, &qg).unwrap();
    assert!(d.values().iter().all(|v| v.is_finite() && v.abs() <= 1.0 / PI + 1e-12));
    assert!((d.values()[[4, 4]] - 1.0 / PI).abs() < 1e-12);
}

#[test]
fn thermal_family() {
    let r = RiskParams::default();
    let (pg, qg) = thermal_grids(50.0, &r, 9.0, 101).unwrap();
    let cold = thermal_wigner(50.0, &r, &pg, &qg, ThermalMode::ClosedForm).unwrap();
    let ground = excited_wigner(0, &r, &pg, &qg).unwrap();
    assert!(max_diff(&cold, &ground) < 1e-10);

    let (pg, qg) = thermal_grids(1.0, &r, 9.0, 121).unwrap();
    let closed = thermal_wigner(1.0, &r, &pg, &qg, ThermalMode::ClosedForm).unwrap();
    let series = thermal_wigner(1.0, &r, &pg, &qg, ThermalMode::Series(200)).unwrap();
    assert!(max_diff(&closed, &series) < 1e-8, "{}", max_diff(&closed, &series));
    assert!(closed.min().0 >= 0.0 && !is_giffen(&closed, None).is_giffen);
    assert!(!is_giffen(&series, None).is_giffen);
    assert!((closed.total_mass() - 1.0).abs() < 1e-6);
    match closed.kind() {
        DensityKind::Mixture { weights } => assert!((weights.iter().sum::<f64>() - 1.0).abs() < 1e-12),
        DensityKind::Pure => panic!("thermal density is a mixture"),
    }

    // series error shrinks with N
    let mut last = f64::INFINITY;
    for n in [2, 4, 8, 16, 32] {
        let s = thermal_wigner(1.0, &r, &pg, &qg, ThermalMode::Series(n)).unwrap();
        let e = max_diff(&closed, &s);
        assert!(e < last);
        last = e;
    }

    // classical limit
    let beta = 1e-4;
    let (pg, qg) = thermal_grids(beta, &r, 5.0, 41).unwrap();
    let hot = thermal_wigner(beta, &r, &pg, &qg, ThermalMode::ClosedForm).unwrap();
    for ((i, j), v) in hot.values().indexed_iter() {
        let classical = beta / (2.0 * PI) * (-beta * hamiltonian(&r, pg.point(i), qg.point(j))).exp();
        assert!((v - classical).abs() < 1e-7 * classical);
    }

    assert!(matches!(thermal_wigner(0.0, &r, &pg, &qg, ThermalMode::ClosedForm), Err(Error::ParameterRange(_))));
    assert!(thermal_wigner(1.0, &r, &pg, &qg, ThermalMode::Series(0)).is_err());
}

#[test]
fn thermal_energy_matches_quadrature() {
    let r = RiskParams::new(0.8, 2.0, 1.3, 0.0).unwrap();
    for beta in [0.3, 1.0, 4.0] {
        let (pg, qg) = thermal_grids(beta, &r, 10.0, 301).unwrap();
        let d = thermal_wigner(beta, &r, &pg, &qg, ThermalMode::ClosedForm).unwrap();
        let m = d.moments();
        let e = hamiltonian(&r, m.std_p, m.std_q);
        let exact = thermal_energy(beta, &r).unwrap();
        assert!((e - exact).abs() < 1e-6 * exact.max(1.0), "{e} vs {exact}");
    }
}

#[test]
fn mixture_is_linear() {
    let r = RiskParams::default();
    let (pg, qg) = grids(7.0, 7.0, 81);
    let a = excited_wigner(0, &r, &pg, &qg).unwrap();
    let b = excited_wigner(2, &r, &pg, &qg).unwrap();
    let m = mixture(&[(0.25, a.clone()), (0.75, b.clone())]).unwrap();
    for ((x, y), z) in a.values().iter().zip(b.values()).zip(m.values()) {
        assert_eq!(*z, 0.25 * x + 0.75 * y);
    }
    assert!((m.total_mass() - 1.0).abs() < 1e-6);
    assert!(matches!(m.kind(), DensityKind::Mixture { .. }));
    assert!(matches!(hudson_check_density(&m), Err(Error::ContractViolation(_))));
    assert!(mixture(&[(-0.5, a.clone()), (1.5, b)]).is_err());
    assert!(mixture(&[]).is_err());
    let other = excited_wigner(0, &r, &grids(6.0, 7.0, 81).0, &qg).unwrap();
    assert!(mixture(&[(0.5, a), (0.5, other)]).is_err());
}

#[test]
fn hudson_dichotomy() {
    let r = RiskParams::default();
    let g = hudson_check(&Strategy::gaussian(1.0, 0.7, 0.0).unwrap(), 1.0).unwrap();
    assert_eq!(g.class, HudsonClass::GaussianPositive);
    assert!(g.min_value >= -1e-10);
    let squeezed = hudson_check(&Strategy::gaussian(-0.5, 0.3, 2.0).unwrap(), 1.0).unwrap();
    assert_eq!(squeezed.class, HudsonClass::GaussianPositive);
    let h = hudson_check(&Strategy::hermite(2, r).unwrap(), 1.0).unwrap();
    assert_eq!(h.class, HudsonClass::NonGaussianNegative);
    assert!(h.min_value < -1e-4);
    let cat = Strategy::superposition(vec![
        (C64::new(1.0, 0.0), Strategy::gaussian(-3.0, 1.0, 0.0).unwrap()),
        (C64::new(1.0, 0.0), Strategy::gaussian(3.0, 1.0, 0.0).unwrap()),
    ])
    .unwrap();
    let c = hudson_check(&cat, 1.0).unwrap();
    assert_eq!(c.class, HudsonClass::NonGaussianNegative);
    assert!(c.min_value < -1e-4);
    assert!(c.witness.1.abs() < 0.5, "fringes sit between the lobes: {:?}", c.witness);
}

#[test]
fn dominant_curves_of_positive_densities() {
    let r = RiskParams::default();
    let (pg, qg) = thermal_grids(0.7, &r, 9.0, 121).unwrap();
    let d = thermal_wigner(0.7, &r, &pg, &qg, ThermalMode::ClosedForm).unwrap();
    let curves = dominant_curves(&d, None, None).unwrap();
    assert!(curves.fd_monotone() && curves.fs_monotone());
    assert!(curves.fd_normalized && curves.fs_normalized);
    let slices = curves.slices.unwrap();
    assert!(slices.0.abs() < 1e-9 && slices.1.abs() < 1e-9);

    let c = CoherentParams::new(0.0, 0.9, 0.4, -0.3).unwrap();
    let (dp, dq) = (c.delta_p(1.0), c.delta_q());
    let pg = Grid::centered(0.4, 10.0 * dp, 201).unwrap();
    let qg = Grid::centered(-0.3, 10.0 * dq, 201).unwrap();
    let d = coherent_wigner(&c, 1.0, &pg, &qg).unwrap();
    let curves = dominant_curves(&d, Some(1.0), Some(0.2)).unwrap();
    for q in qg.points() {
        let exact = normal_cdf((q + 0.3) / dq);
        assert!((curves.fd(q) - exact).abs() < 1e-6, "{q}");
    }
    for p in pg.points() {
        let exact = normal_cdf((p - 0.4) / dp);
        assert!((curves.fs(-p) - exact).abs() < 1e-6, "{p}");
    }
    assert!(curves.fd_monotone() && curves.fs_monotone());
}

#[test]
fn giffen_slice_is_not_monotone() {
    let r = RiskParams::default();
    let s = Strategy::hermite(1, r).unwrap();
    let (pg, qg) = phase_space_grids(&s, 1.0, 161, 161).unwrap();
    let d = excited_wigner(1, &r, &pg, &qg).unwrap();
    let curves = dominant_curves(&d, Some(0.0), Some(0.0)).unwrap();
    assert!(!curves.fd_monotone());
    assert!(!curves.fs_monotone());
    // the centre slice carries no net mass
    assert!(!curves.fd_normalized);
    let off = dominant_curves(&d, Some(1.5), Some(0.0)).unwrap();
    assert!(off.fd_normalized);
    let marg = marginal_curves(&d).unwrap();
    assert!(marg.fd_monotone() && marg.fs_monotone());
}

#[test]
fn slices_outside_the_grid() {
    let r = RiskParams::default();
    let (pg, qg) = grids(3.0, 3.0, 31);
    let d = excited_wigner(0, &r, &pg, &qg).unwrap();
    assert!(matches!(dominant_curves(&d, Some(4.0), Some(0.0)), Err(Error::ParameterRange(_))));
    assert!(matches!(dominant_curves(&d, Some(0.0), Some(-3.5)), Err(Error::ParameterRange(_))));
}

#[test]
fn csv_exports() {
    let r = RiskParams::default();
    let (pg, qg) = grids(2.0, 2.0, 9);
    let d = excited_wigner(0, &r, &pg, &qg).unwrap();
    let mut buf = Vec::new();
    d.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("p,q,w"));
    assert_eq!(lines.count(), 81);
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let first = rdr.records().next().unwrap().unwrap();
    assert_eq!(first[0].parse::<f64>().unwrap(), -2.0);
    assert_eq!(first[2].parse::<f64>().unwrap(), d.values()[[0, 0]]);

    let mut buf = Vec::new();
    dominant_curves(&d, None, None).unwrap().write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("lnc,Fd,Fs\n"));
    assert_eq!(text.lines().count(), 10);
}

#[test]
fn density_shape_is_checked() {
    let (pg, qg) = grids(1.0, 1.0, 9);
    let bad = ndarray::Array2::zeros((9, 8));
    assert!(PhaseSpaceDensity::new(pg, qg, bad, 1.0, DensityKind::Pure).is_err());
    let ok = ndarray::Array2::zeros((9, 9));
    assert!(PhaseSpaceDensity::new(pg, qg, ok.clone(), 0.0, DensityKind::Pure).is_err());
    let kind = DensityKind::Mixture { weights: vec![0.5, 0.6] };
    assert!(PhaseSpaceDensity::new(pg, qg, ok, 1.0, kind).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn uncertainty_holds_for_superpositions(
        a in -2.0..2.0f64,
        b in -2.0..2.0f64,
        w in 0.4..1.5f64,
        phase in 0.0..6.3f64,
    ) {
        let s = Strategy::superposition(vec![
            (C64::new(1.0, 0.0), Strategy::gaussian(a, w, 0.5).unwrap()),
            (C64::from_polar(0.7, phase), Strategy::gaussian(b, w, -0.5).unwrap()),
        ]).unwrap();
        let (pg, qg) = phase_space_grids(&s, 1.0, 81, 81).unwrap();
        let d = wigner_transform(&s, &pg, &qg, 1.0).unwrap();
        let m = d.moments();
        prop_assert!((m.mass - 1.0).abs() < 1e-6);
        prop_assert!(m.std_p * m.std_q >= 0.5 - 1e-8);
    }
}
