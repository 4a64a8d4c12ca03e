use avc_sim::adversary::{parse_discrete, parse_gaussian, AdversaryRng, PublicCodeParams};
use avc_sim::capacity::{dp_avc_capacity, presets, DpChannelSpec, InnerOptions, InnerProblem, ShannonStrategy};
use avc_sim::dp_codec::scheme::DpScheme;
use avc_sim::dp_codec::sphere::{norm_sq, sample_sphere};
use avc_sim::experiment::config::Config;
use avc_sim::prob::{ConditionalKernel, Distribution, JointDistribution};
use avc_sim::stats::wilson_interval;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn simplex(k: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..1.0, k).prop_map(|v| {
        let s: f64 = v.iter().sum();
        v.into_iter().map(|x| x / s).collect()
    })
}

const PARAMS: PublicCodeParams = PublicCodeParams { n: 64, rate: 0.1, rate_tilde: 0.05, messages: 1024 };

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dp_capacity_ignores_state_and_falls_with_jamming(
        p in 0.01f64..50.0, l in 0.0f64..20.0, s in 0.01f64..5.0, ss in 0.0f64..20.0, extra in 0.01f64..5.0,
    ) {
        let c = dp_avc_capacity(&DpChannelSpec::new(p, l, s, ss).unwrap()).unwrap();
        let c0 = dp_avc_capacity(&DpChannelSpec::new(p, l, s, 0.0).unwrap()).unwrap();
        let more = dp_avc_capacity(&DpChannelSpec::new(p, l + extra, s, ss).unwrap()).unwrap();
        prop_assert!(c > 0.0);
        prop_assert!((c - c0).abs() <= 1e-12 * c0);
        prop_assert!(more < c);
    }

    #[test]
    fn fvw_never_drops_below_theta(
        p in 0.1f64..10.0, l in 0.1f64..10.0, s in 0.1f64..10.0, ss in 0.0f64..10.0,
        v in -1.0f64..=1.0, frac in 0.0f64..=1.0,
    ) {
        let sc = DpScheme::with_default_backoff(DpChannelSpec::new(p, l, s, ss).unwrap()).unwrap();
        prop_assert!(sc.theta > 0.0 && sc.theta < 1.0);
        prop_assert!(sc.fvw(v, (frac * l).min(l)).unwrap() >= sc.theta - 1e-12);
    }

    #[test]
    fn mutual_information_is_bounded_by_marginal_entropies(mass in simplex(6)) {
        let j = JointDistribution::new(2, 3, mass).unwrap();
        let i = j.mutual_information();
        let ha = Distribution::new(j.marginal_a()).unwrap().entropy();
        let hb = Distribution::new(j.marginal_b()).unwrap().entropy();
        prop_assert!(i >= -1e-12);
        prop_assert!(i <= ha.min(hb) + 1e-12);
    }

    #[test]
    fn inner_minimum_is_below_every_jammer(
        w in prop::collection::vec(simplex(2), 8), p_s in simplex(2), p_us in simplex(4), p_us2 in simplex(4), q in simplex(2),
    ) {
        let spec = presets::explicit([2, 2, 2, 2], &w, p_s).unwrap();
        let st = ShannonStrategy::canonical(2, 2).unwrap();
        let prob = InnerProblem::new(&spec, &st, &[p_us, p_us2].concat()).unwrap();
        let sol = prob.solve(&InnerOptions::default(), None).unwrap();
        let any = [q.clone(), q].concat();
        prop_assert!(sol.mutual_information <= prob.mutual_information(&any) + 1e-9);
        prop_assert!(sol.gap >= 0.0);
    }

    #[test]
    fn sphere_draws_sit_on_the_sphere(n in 1usize..300, radius in 0.01f64..100.0, seed in any::<u64>()) {
        let u = sample_sphere(n, radius, &mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(u.len(), n);
        prop_assert!((norm_sq(&u).sqrt() / radius - 1.0).abs() < 1e-9);
    }

    #[test]
    fn gaussian_jammers_respect_power(
        state in prop::collection::vec(-5.0f64..5.0, 64), lambda in 0.1f64..4.0, m in 1u64..1024, seed in any::<u64>(),
        which in 0usize..5,
    ) {
        let name = ["zero", "gauss_trunc", "state_cancel", "random_dir", "msg_aware+state_cancel"][which];
        let j = parse_gaussian(name, lambda).unwrap();
        let out = j.jam(m, &state, &PARAMS, &mut AdversaryRng::new(seed, 0));
        prop_assert_eq!(out.len(), state.len());
        prop_assert!(norm_sq(&out) <= 64.0 * lambda * (1.0 + 1e-9));
    }

    #[test]
    fn discrete_jammers_stay_in_alphabet(
        state in prop::collection::vec(0usize..3, 64), q in simplex(3), m in 1u64..1024, seed in any::<u64>(),
        which in 0usize..4,
    ) {
        let kernel = ConditionalKernel::new(3, vec![3], [q.clone(), q.clone(), q].concat()).unwrap();
        let name = ["constant:j=2", "memoryless:q=0.2/0.3/0.5", "worst", "msg_aware+worst"][which];
        let j = parse_discrete(name, 3, 3, Some(&kernel)).unwrap();
        let out = j.jam(m, &state, &PARAMS, &mut AdversaryRng::new(seed, 0));
        prop_assert_eq!(out.len(), state.len());
        prop_assert!(out.iter().all(|&x| x < 3));
    }

    #[test]
    fn wilson_interval_brackets_the_estimate(n in 1u64..10_000, frac in 0.0f64..=1.0) {
        let k = ((n as f64) * frac).floor() as u64;
        let (lo, hi) = wilson_interval(k, n, 1.96);
        let p = k as f64 / n as f64;
        prop_assert!(0.0 <= lo && lo <= p + 1e-12 && p <= hi + 1e-12 && hi <= 1.0);
    }

    #[test]
    fn config_numbers_read_back(seed in any::<u64>(), n in 1u64..100_000, power in 1e-6f64..1e6) {
        let text = format!("mode = simulate-dp\nseed = {seed}\n[code]\nn = {n}\n[channel]\npower = {power}\n");
        let cfg = Config::parse(&text).unwrap();
        prop_assert_eq!(cfg.u64("seed").unwrap(), seed);
        prop_assert_eq!(cfg.u64("code.n").unwrap(), n);
        prop_assert_eq!(cfg.f64("channel.power").unwrap(), power);
    }
}
