use proptest::prelude::*;
use reservoir_qec::ratemodel::*;

fn chain(f_a: f64, alpha: f64, beta: f64) -> FlowMatrix<f64> {
    let p = event_probabilities(&RoundEventParams::new(f_a, alpha, beta).unwrap());
    flow_coefficients(&p).unwrap()
}

fn p0_series(alpha: f64, rounds: usize) -> Vec<f64> {
    iterate_round_chain(&RoundChainState::perfect(), &chain(1.0, alpha, alpha), rounds)
        .iter()
        .map(|s| s.p0)
        .collect()
}

fn populations() -> impl Strategy<Value = AncillaPopulations<f64>> {
    prop::array::uniform8(0.0..1.0f64).prop_map(|raw| {
        let total: f64 = raw.iter().sum::<f64>() + 1e-12;
        AncillaPopulations(raw.map(|v| v / total))
    })
}

proptest! {
    #[test]
    fn cooling_rhs_conserves_probability(p in populations(), gamma in 0.0..10.0f64, n_c in 0.0..2.0f64) {
        let rates = CoolingRates::new(gamma, n_c).unwrap();
        let d = cooling_rhs(&p, &rates);
        let scale: f64 = d.iter().map(|v| v.abs()).sum::<f64>().max(1.0);
        prop_assert!(d.iter().sum::<f64>().abs() <= 1e-14 * scale);
    }

    #[test]
    fn cooling_rhs_keeps_symmetry_classes(p0 in 0.0..1.0f64, pa in 0.0..1.0f64, pb in 0.0..1.0f64, p7 in 0.0..1.0f64,
                                          gamma in 0.0..10.0f64, n_c in 0.0..2.0f64) {
        let total = p0 + 3.0 * pa + 3.0 * pb + p7 + 1e-12;
        let (p0, pa, pb, p7) = (p0 / total, pa / total, pb / total, p7 / total);
        let p = AncillaPopulations([p0, pa, pa, pb, pa, pb, pb, p7]);
        let d = cooling_rhs(&p, &CoolingRates::new(gamma, n_c).unwrap());
        prop_assert!((d[1] - d[2]).abs() < 1e-12 && (d[1] - d[4]).abs() < 1e-12);
        prop_assert!((d[3] - d[5]).abs() < 1e-12 && (d[3] - d[6]).abs() < 1e-12);
    }

    #[test]
    fn flow_rows_sum_to_one(f_a in 0.0..=1.0f64, alpha in 0.0..0.3f64, beta in 0.0..0.3f64) {
        let f = chain(f_a, alpha, beta);
        for row in f.0 {
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        }
        prop_assert_eq!(f.0[3][3], f.0[0][0]);
        prop_assert_eq!(f.0[3][0], f.0[0][3]);
    }

    #[test]
    fn chain_keeps_normalization(f_a in 0.5..=1.0f64, alpha in 0.0..0.1f64, beta in 0.0..0.1f64, rounds in 1usize..300) {
        let f = chain(f_a, alpha, beta);
        for s in iterate_round_chain(&RoundChainState::perfect(), &f, rounds) {
            prop_assert!((s.normalization() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn fixed_point_is_mirror_symmetric(f_a in 0.5..=1.0f64, alpha in 1e-4..0.1f64, beta in 1e-4..0.1f64) {
        let q = chain(f_a, alpha, beta).stationary().unwrap();
        let s = RoundChainState::from_classes(q);
        let m = s.mirrored();
        prop_assert!((s.p0 - m.p0).abs() < 1e-10 && (s.pa - m.pa).abs() < 1e-10);
    }

    #[test]
    fn integration_matches_binomial_decay(start in 0usize..8, a in 0.1..5.0f64, t in 0.0..3.0f64) {
        let rates = CoolingRates::new(a, 0.0).unwrap();
        let numeric = integrate_cooling(&AncillaPopulations::basis(start).unwrap(), &rates, t, 4000);
        let exact = cooling_closed_form(start, a, t).unwrap();
        prop_assert!(numeric.distance(&exact) < 1e-9);
    }
}

#[test]
fn any_start_reaches_the_thermal_steady_state() {
    let rates = CoolingRates::new(2.0, 0.05).unwrap();
    let target = cooling_steady_state(&rates).unwrap();
    let a = rates.a;
    for start in [AncillaPopulations::basis(7).unwrap(), AncillaPopulations::uniform()] {
        let p = integrate_cooling(&start, &rates, 40.0 / a, 20_000);
        assert!(p.distance(&target) < 1e-8);
    }
}

#[test]
fn fitted_decay_constant_is_near_42_alpha_squared() {
    let mut coefficients = Vec::new();
    for alpha in [5e-4, 1e-3, 2e-3] {
        let fit = fit_decay_constant(&p0_series(alpha, 400), 4).unwrap();
        let second = (fit.delta - 1.0) / (alpha * alpha);
        assert!((second - 42.0).abs() <= 2.0, "alpha {alpha}: {second}");
        coefficients.push((fit.delta - perturbative_delta(alpha)) / alpha.powi(3));
    }
    // the remainder is a stable third-order term
    let spread = coefficients.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - coefficients.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(spread < 0.1 * coefficients[1].abs(), "{coefficients:?}");
}

#[test]
fn fit_recovers_chain_steady_state() {
    let alpha = 1e-3;
    let f = chain(1.0, alpha, alpha);
    let fit = fit_decay_constant(&p0_series(alpha, 400), 4).unwrap();
    let exact = f.stationary().unwrap()[0];
    assert!((fit.steady_state - exact).abs() < 1e-8);
    assert!((f.approximate_steady_p0() - exact).abs() < 1e-10);
}

#[test]
fn second_order_series_tracks_the_chain_after_the_first_round() {
    // from round 2 on the gap is third order, so gap / α² halves with α
    for n in 2..=20 {
        let gap = |alpha: f64| (p0_series(alpha, n)[n - 1] - perturbative_p0(n, alpha)) / (alpha * alpha);
        let (g1, g2) = (gap(1e-3), gap(5e-4));
        assert!((g1 / g2 - 2.0).abs() < 0.1, "n = {n}: {g1} vs {g2}");
    }
    // round one carries a fixed second-order offset of −9α²
    for alpha in [5e-4, 1e-3, 2e-3] {
        let gap = (p0_series(alpha, 1)[0] - perturbative_p0(1, alpha)) / (alpha * alpha);
        assert!((gap + 9.0).abs() < 0.01, "{gap}");
    }
}

#[test]
fn first_round_matches_the_linearized_drop() {
    for n_c in [0.0, 1e-3, 1e-2, 1e-1] {
        let f_a = ancilla_steady_fidelity(n_c).unwrap();
        let (alpha, beta) = (15e-3, 16e-3);
        let f = chain(f_a, alpha, beta);
        let first = iterate_round_chain(&RoundChainState::perfect(), &f, 1)[0].p0;
        // the exact first iterate differs only at second order in α, β
        assert!((first - first_round_p0(f_a, alpha, beta)).abs() < 20.0 * alpha * alpha, "n_c = {n_c}");
    }
}
