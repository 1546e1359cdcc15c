use proptest::prelude::*;
use rdp_core::gaussian::{point, rate, rate_classical, rate_rc_inf, rate_rc_zero, solve_rho};
use rdp_core::CommonRate;

fn grid(points: usize) -> Vec<f64> {
    (1..=points).map(|k| 2.0 * k as f64 / points as f64).collect()
}

fn common_rate() -> impl Strategy<Value = CommonRate> {
    prop_oneof![Just(CommonRate::ZERO), (0.0..8.0f64).prop_map(CommonRate::Finite), Just(CommonRate::Infinite)]
}

#[test]
fn closed_form_limits_on_dense_grid() {
    for delta in grid(1000) {
        let zero = rate(delta, CommonRate::ZERO).unwrap();
        assert!((zero - rate_rc_zero(delta).unwrap()).abs() <= 1e-9, "delta {delta}");
        let big = rate(delta, CommonRate::Finite(60.0)).unwrap();
        assert!((big - rate_rc_inf(delta).unwrap()).abs() <= 1e-6, "delta {delta}");
    }
}

#[test]
fn monotone_in_delta_and_common_rate() {
    let rcs = [0.0, 0.1, 0.5, 1.0, 2.0, 5.0];
    for delta in grid(200) {
        let rates: Vec<f64> = rcs.iter().map(|&r| rate(delta, CommonRate::Finite(r)).unwrap()).collect();
        assert!(rates.windows(2).all(|w| w[1] <= w[0]), "delta {delta}: {rates:?}");
        assert!(rate(delta, CommonRate::Infinite).unwrap() <= rates[rates.len() - 1]);
    }
    for rc in rcs.iter().map(|&r| CommonRate::Finite(r)).chain([CommonRate::Infinite]) {
        let g = grid(200);
        let rates: Vec<f64> = g.iter().map(|&d| rate(d, rc).unwrap()).collect();
        assert!(rates.windows(2).all(|w| w[1] <= w[0]), "rc {rc}");
    }
}

proptest! {
    #[test]
    fn bracket_and_root(delta in 1e-9..=2.0f64, rc in common_rate()) {
        // f(rho) = rho * sqrt(1 - c (1 - rho^2)) - (1 - delta/2) changes sign on [0, 1]
        let target = 1.0 - delta / 2.0;
        prop_assert!(-target <= 0.0 && 1.0 - target >= 0.0);
        let rho = solve_rho(delta, rc).unwrap();
        prop_assert!((0.0..1.0).contains(&rho));
    }

    #[test]
    fn realism_never_helps(delta in 1e-6..=1.0f64, rc in common_rate()) {
        prop_assert!(rate_classical(delta).unwrap() <= rate(delta, rc).unwrap() + 1e-12);
    }

    #[test]
    fn three_db_law(delta in 1e-9..=1.0f64) {
        prop_assert!((rate_rc_zero(2.0 * delta).unwrap() - rate_classical(delta).unwrap()).abs() <= 1e-12);
    }

    #[test]
    fn invariant_chain(delta in 1e-4..2.0f64, bits in 0.0..6.0f64) {
        let rc = CommonRate::Finite(bits);
        let p = point(delta, rc).unwrap();
        prop_assert!((1.0 - delta / 2.0 - p.rho * p.rho_tilde).abs() <= 1e-9);
        if p.rho_tilde < 1.0 - 1e-6 {
            let via_tilde = -0.5 * (1.0 - p.rho_tilde * p.rho_tilde).log2() - bits;
            prop_assert!((via_tilde - p.rate).abs() <= 1e-9, "{} vs {}", via_tilde, p.rate);
        }
    }
}
