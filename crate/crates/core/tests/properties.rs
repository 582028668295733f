use empconc_core::bound_functions::{
    chernoff_optimized_tail, lemma34_log_laplace_bound, upper_log_laplace_bound, BoundConstants, BoundParams,
    ConstantId, Side, TailForm,
};
use empconc_core::processes::generate::{random_scenario, GeneratorLimits, ScenarioKind};
use empconc_core::processes::{estimate_stats, validate};
use empconc_core::verify::{certify_exact, CheckReport, ExactOracle, ReportBuilder};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn params() -> impl Strategy<Value = BoundParams> {
    (0.0..20.0f64, 0.01..50.0f64).prop_map(|(m, v)| BoundParams::new(m, v).unwrap())
}

fn side() -> impl Strategy<Value = Side> {
    prop_oneof![Just(Side::Upper), Just(Side::Lower)]
}

fn form() -> impl Strategy<Value = TailForm> {
    prop_oneof![
        Just(TailForm::FormB),
        Just(TailForm::FormCTight),
        Just(TailForm::FormCSimple)
    ]
}

proptest! {
    #[test]
    fn tight_form_never_exceeds_simple(p in params(), x in 0.0..200.0f64, s in side()) {
        let c = BoundConstants::default();
        let tight = c.tail(x, &p, TailForm::FormCTight, s).unwrap();
        let simple = c.tail(x, &p, TailForm::FormCSimple, s).unwrap();
        prop_assert!(tight <= simple * (1.0 + 1e-14));
    }

    #[test]
    fn bounds_are_probabilities_and_monotone(p in params(), x in 0.0..100.0f64, dx in 0.0..10.0f64, s in side(), f in form()) {
        let c = BoundConstants::default();
        let a = c.tail(x, &p, f, s).unwrap();
        let b = c.tail(x + dx, &p, f, s).unwrap();
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!(b <= a * (1.0 + 1e-14));
        // a larger variance factor gives a larger bound
        let wider = BoundParams::new(p.mean_z(), p.v_n() * 1.5).unwrap();
        prop_assert!(c.tail(x, &wider, f, s).unwrap() >= a * (1.0 - 1e-14));
    }

    #[test]
    fn rational_bound_dominates_exponential_bound(p in params(), t in 0.0..0.66f64) {
        let upper = upper_log_laplace_bound(t, &p).unwrap().value;
        let rational = lemma34_log_laplace_bound(t, &p).unwrap();
        prop_assert!(upper <= rational * (1.0 + 1e-13) + 1e-300);
    }

    #[test]
    fn chernoff_never_exceeds_closed_forms(p in params(), x in 0.001..100.0f64, s in side()) {
        let c = BoundConstants::default();
        let ch = chernoff_optimized_tail(x, &p, s).unwrap().bound;
        for f in TailForm::ALL {
            prop_assert!(ch <= c.tail(x, &p, f, s).unwrap() * (1.0 + 1e-9));
        }
    }

    #[test]
    fn inversion_round_trips(p in params(), log_delta in -30.0..-1e-6f64, s in side(), f in form()) {
        let c = BoundConstants::default();
        let delta = log_delta.exp();
        let x = c.invert_tail(delta, &p, f, s).unwrap();
        prop_assert!(x >= 0.0);
        let back = c.tail(x, &p, f, s).unwrap();
        prop_assert!((back - delta).abs() <= 1e-10, "delta {delta}, back {back}");
    }

    #[test]
    fn loosening_never_lowers_a_bound(p in params(), x in 0.0..50.0f64, t in 0.0..0.6f64, rel in 0.0..0.5f64) {
        let base = BoundConstants::default();
        for id in ConstantId::ALL {
            let loose = base.perturbed(id, rel);
            for s in [Side::Upper, Side::Lower] {
                for f in TailForm::ALL {
                    let a = base.tail(x, &p, f, s).unwrap();
                    prop_assert!(loose.tail(x, &p, f, s).unwrap() >= a * (1.0 - 1e-14), "{id} {s} {f}");
                }
            }
            prop_assert!(loose.upper_log_laplace(t, &p).unwrap().value >= base.upper_log_laplace(t, &p).unwrap().value * (1.0 - 1e-14));
            prop_assert!(loose.lower_log_laplace(t, &p).unwrap().value >= base.lower_log_laplace(t, &p).unwrap().value * (1.0 - 1e-14));
            if t < loose.rational_t_max() {
                prop_assert!(loose.rational_log_laplace(t, &p).unwrap() >= base.rational_log_laplace(t, &p).unwrap() * (1.0 - 1e-14));
            }
        }
    }

    #[test]
    fn reports_survive_json(name in "[a-z ]{1,20}", slacks in prop::collection::vec(-5.0..5.0f64, 0..30)) {
        let mut b = ReportBuilder::new(name, "grid", 1e-12);
        for (i, s) in slacks.iter().enumerate() {
            b.record(*s, || format!("point {i}"));
        }
        b.value("n", slacks.len() as f64);
        let r = b.finish();
        prop_assert_eq!(r.pass, r.violations.is_empty());
        prop_assert_eq!(r.pass, r.worst_margin >= -r.tolerance);
        let back: CheckReport = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
        prop_assert_eq!(back, r);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn random_scenarios_certify_exactly(seed in any::<u64>(), kind in 0usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_scenario(&mut rng, ScenarioKind::ALL[kind], GeneratorLimits::default());
        prop_assert!(validate(&s).is_empty());
        let o = ExactOracle::new(&s).unwrap();
        let span = (o.summary.max_z() - o.summary.min_z()).max(1.0);
        let xs: Vec<f64> = (0..25).map(|i| span * i as f64 / 24.0).collect();
        let ts: Vec<f64> = (0..=30).map(|i| 0.1 * i as f64).collect();
        for r in certify_exact(&o, &xs, &ts, &BoundConstants::default()).unwrap() {
            prop_assert!(r.pass, "{:?}", r);
        }
    }

    #[test]
    fn simulation_ignores_worker_count(seed in any::<u64>(), workers in 2usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_scenario(&mut rng, ScenarioKind::General, GeneratorLimits::default());
        let a = estimate_stats(&s, 40_000, seed, &[0.0, 0.5], Some(1)).unwrap();
        let b = estimate_stats(&s, 40_000, seed, &[0.0, 0.5], Some(workers)).unwrap();
        prop_assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }
}
