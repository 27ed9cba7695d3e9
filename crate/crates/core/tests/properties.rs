use num_complex::Complex64;
use proptest::prelude::*;

use sagnac_qfc::design::{
    check_perfect_conversion, conversion_detunings, fidelity_vs_decay, solve_target_amplitudes,
    w_state_config, TargetDistribution,
};
use sagnac_qfc::oracle::{extract_transmission, integrate, PulseSpec, TimeGrid};
use sagnac_qfc::sweep::{BaseParams, KeyValues};
use sagnac_qfc::{
    transmission_general, transmission_three_branch_resonant, transmission_two_branch,
    BranchParams, SystemConfig,
};

fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

fn lossless(n: usize) -> impl Strategy<Value = SystemConfig> {
    (
        proptest::collection::vec(0.1f64..5.0, n),
        proptest::collection::vec(0.0f64..4.0, n),
    )
        .prop_map(|(g, o)| {
            let mut branches: Vec<_> = g
                .iter()
                .zip(&o)
                .map(|(&g, &o)| BranchParams::lossless(g, o))
                .collect();
            branches[0].waveguide_rate = 1.0;
            SystemConfig::from_branches(branches).unwrap()
        })
}

fn any_lossless() -> impl Strategy<Value = SystemConfig> {
    prop_oneof![lossless(1), lossless(2), lossless(3), lossless(4)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn lossless_flux_is_conserved(cfg in any_lossless(), delta in -5.0f64..5.0) {
        if let Ok(r) = transmission_general(delta, &cfg) {
            let total: f64 = r.probabilities().iter().sum();
            prop_assert!((total - 1.0).abs() <= 1e-10, "sum = {total}");
        }
    }

    #[test]
    fn decay_only_removes_flux(cfg in lossless(3), delta in -5.0f64..5.0, decay in 0.0f64..2.0) {
        let lossy = cfg.with_uniform_decay(decay).unwrap();
        if let Ok(r) = transmission_general(delta, &lossy) {
            prop_assert!(r.loss() >= -1e-10);
            prop_assert!(r.loss() <= 1.0 + 1e-10);
        }
    }

    #[test]
    fn general_matches_two_branch_closed_form(
        g2 in 0.1f64..5.0, o1 in 0.1f64..4.0, o2 in 0.0f64..4.0, decay in 0.0f64..1.0, delta in -5.0f64..5.0,
    ) {
        let cfg = SystemConfig::two_branch(g2, o1, o2, decay).unwrap();
        let a = transmission_two_branch(delta, &cfg).unwrap();
        let b = transmission_general(delta, &cfg).unwrap();
        prop_assert!(max_diff(a.amplitudes(), b.amplitudes()) <= 1e-12);
    }

    #[test]
    fn general_matches_three_branch_resonant_form(
        g in proptest::array::uniform2(0.1f64..5.0),
        o in proptest::array::uniform3(0.1f64..4.0),
        decay in 0.0f64..1.0,
    ) {
        let cfg = SystemConfig::from_branches(vec![
            BranchParams::new(1.0, decay, o[0]),
            BranchParams::new(g[0], decay, o[1]),
            BranchParams::new(g[1], decay, o[2]),
        ]).unwrap();
        let a = transmission_three_branch_resonant(&cfg).unwrap();
        let b = transmission_general(0.0, &cfg).unwrap();
        prop_assert!(max_diff(a.amplitudes(), b.amplitudes()) <= 1e-12);
    }

    #[test]
    fn rescaling_all_rates_changes_nothing(
        scale in 0.01f64..100.0, g2 in 0.1f64..5.0, o1 in 0.1f64..4.0, o2 in 0.1f64..4.0, delta in -5.0f64..5.0,
    ) {
        let text = |s: f64| format!(
            "gamma1 = {}\ngamma2 = {}\nrabi1 = {}\nrabi2 = {}\ndecay = {}\ndelta = {}\n",
            s, g2 * s, o1 * s, o2 * s, 0.1 * s, delta * s
        );
        let resolve = |s: f64| {
            let (cfg, d) = BaseParams::from_kv(&KeyValues::parse(&text(s)).unwrap()).unwrap().resolve().unwrap();
            transmission_general(d, &cfg).unwrap()
        };
        let (a, b) = (resolve(1.0), resolve(scale));
        prop_assert!(max_diff(a.amplitudes(), b.amplitudes()) <= 1e-12);
    }

    #[test]
    fn weak_third_drive_is_a_quadratic_perturbation(
        g2 in 0.5f64..4.0, g3 in 0.5f64..4.0, o1 in 0.5f64..3.0, o2 in 0.5f64..3.0, delta in -3.0f64..3.0,
    ) {
        let two = SystemConfig::two_branch(g2, o1, o2, 0.0).unwrap();
        let base = transmission_general(delta, &two).unwrap();
        let mut prev = f64::INFINITY;
        let mut t3 = Vec::new();
        for eps in [1e-2, 1e-3] {
            let three = SystemConfig::from_branches(vec![
                BranchParams::lossless(1.0, o1),
                BranchParams::lossless(g2, o2),
                BranchParams::lossless(g3, eps),
            ]).unwrap();
            let r = transmission_general(delta, &three).unwrap();
            let d1 = (r.amplitude(0) - base.amplitude(0)).norm();
            let d2 = (r.amplitude(1) - base.amplitude(1)).norm();
            let d = d1.max(d2);
            if prev.is_finite() && prev > 1e-13 {
                // shrinking ε tenfold shrinks the deviation about a hundredfold
                prop_assert!(d <= prev / 50.0, "eps = {eps}: {d} vs {prev}");
            }
            prev = d;
            t3.push(r.amplitude(2).norm());
        }
        // while the leak into the third mode is linear in ε
        if t3[0] > 1e-9 {
            let ratio = t3[1] / t3[0];
            prop_assert!((ratio - 0.1).abs() <= 0.01, "ratio = {ratio}");
        }
    }

    #[test]
    fn conversion_roots_give_full_conversion(g2 in 0.2f64..4.0, o1 in 0.2f64..3.0, o2 in 0.2f64..3.0) {
        let cfg = SystemConfig::two_branch(g2, o1, o2, 0.0).unwrap();
        for delta in conversion_detunings(&cfg, 1e-9).unwrap() {
            let r = transmission_two_branch(delta, &cfg).unwrap();
            prop_assert!((r.probability(1) - 1.0).abs() <= 1e-9, "delta = {delta}");
        }
        // and away from the roots the residuals do not vanish
        let r = transmission_two_branch(0.123, &cfg).unwrap();
        let res = check_perfect_conversion(0.123, &cfg).unwrap();
        if (r.probability(1) - 1.0).abs() > 1e-6 {
            prop_assert!(!res.is_zero(1e-9));
        }
    }

    #[test]
    fn design_round_trip(raw in proptest::collection::vec(0.05f64..1.0, 2..=4), g in 0.5f64..3.0, delta in -0.5f64..0.5) {
        let total: f64 = raw.iter().sum();
        let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
        let n = weights.len();
        let cfg = SystemConfig::from_branches(
            std::iter::once(BranchParams::lossless(1.0, 1.0))
                .chain((1..n).map(|_| BranchParams::lossless(g, 0.0)))
                .collect(),
        ).unwrap();
        let target = TargetDistribution::new(weights.clone()).unwrap();
        match solve_target_amplitudes(&cfg, &target, delta) {
            Ok(sol) => {
                prop_assert!(sol.residual <= 1e-10);
                let again = transmission_general(delta, &sol.config).unwrap();
                for (p, w) in again.probabilities().iter().zip(&weights) {
                    prop_assert!((p - w).abs() <= 1e-10);
                }
            }
            // off resonance not every split is reachable with Ω₁ fixed
            Err(sagnac_qfc::Error::NoConvergence { .. }) => prop_assume!(delta.abs() > 1e-3),
            Err(e) => prop_assert!(false, "{e}"),
        }
    }
}

#[test]
fn resonant_design_round_trip_always_converges() {
    let cfg = SystemConfig::from_branches(vec![
        BranchParams::lossless(1.0, 1.0),
        BranchParams::lossless(2.0, 0.0),
        BranchParams::lossless(3.0, 0.0),
    ])
    .unwrap();
    for w1 in [0.0, 0.1, 0.5, 0.9, 1.0] {
        for share in [0.0, 0.3, 0.7, 1.0] {
            let rest = 1.0 - w1;
            let target =
                TargetDistribution::new(vec![w1, rest * share, rest * (1.0 - share)]).unwrap();
            let sol = solve_target_amplitudes(&cfg, &target, 0.0).unwrap();
            assert!(sol.residual <= 1e-10, "{w1} {share}: {}", sol.residual);
        }
    }
}

#[test]
fn fidelity_is_monotone_in_decay() {
    let decays: Vec<f64> = (0..=50).map(|k| 0.02 * k as f64).collect();
    for g2 in [0.5, 1.0, 2.0, 4.0, 8.0] {
        let curve = fidelity_vs_decay(&w_state_config(g2, 1.0, 0.0).unwrap(), &decays).unwrap();
        assert!((curve[0].1 - 1.0).abs() <= 1e-12);
        assert!(curve.windows(2).all(|w| w[1].1 <= w[0].1), "Gamma2 = {g2}");
    }
}

fn oracle_amplitudes(
    cfg: &SystemConfig,
    delta: f64,
    sigma: f64,
    scale: Complex64,
    refine: usize,
) -> Vec<Complex64> {
    let pulse = PulseSpec::new(delta, sigma).unwrap().with_scale(scale);
    let auto = TimeGrid::for_pulse(cfg, &pulse).unwrap();
    let grid = TimeGrid::new(auto.t0, auto.t1, auto.dt / refine as f64).unwrap();
    let state = integrate(cfg, &pulse, &grid).unwrap();
    extract_transmission(&state, delta).unwrap()
}

#[test]
fn oracle_is_linear_in_the_input() {
    let cfg = SystemConfig::two_branch(1.5, 1.2, 2.0, 0.3).unwrap();
    let unit = oracle_amplitudes(&cfg, 0.4, 0.05, Complex64::new(1.0, 0.0), 1);
    for scale in [
        Complex64::new(0.3, 0.0),
        Complex64::new(-2.0, 1.5),
        Complex64::new(0.0, 7.0),
    ] {
        let scaled = oracle_amplitudes(&cfg, 0.4, 0.05, scale, 1);
        assert!(max_diff(&unit, &scaled) <= 1e-12, "{scale}");
    }
}

#[test]
fn oracle_is_converged_in_the_step() {
    let cfg = SystemConfig::two_branch(2.0, 2.0, 2.0 * 2f64.sqrt(), 0.2).unwrap();
    for delta in [-1.0, 0.0, 0.7] {
        let coarse = oracle_amplitudes(&cfg, delta, 0.05, Complex64::new(1.0, 0.0), 1);
        let fine = oracle_amplitudes(&cfg, delta, 0.05, Complex64::new(1.0, 0.0), 2);
        assert!(max_diff(&coarse, &fine) <= 1e-4, "delta = {delta}");
        let exact = transmission_general(delta, &cfg).unwrap();
        assert!(max_diff(&fine, exact.amplitudes()) <= 1e-6);
    }
}
