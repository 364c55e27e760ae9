use critwave::modcont::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_modulus(rng: &mut ChaCha8Rng) -> Modulus {
    match rng.gen_range(0..4) {
        0 => Modulus::power(rng.gen_range(0.1..1.0)).unwrap(),
        1 => Modulus::log_pow(rng.gen_range(0.2..3.0)).unwrap(),
        2 => Modulus::iter_log_pow(2, rng.gen_range(0.2..3.0)).unwrap(),
        _ => Modulus::from_exponents(0.0, vec![rng.gen_range(0.2..2.0), rng.gen_range(0.0..2.0)]).unwrap(),
    }
}

#[test]
fn derivatives_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let mu = random_modulus(&mut rng);
        let s = mu.s_max() * rng.gen_range(0.01..0.9);
        let h = 1e-4 * s;
        let f = |x: f64| mu.eval(x).unwrap();
        let d1 = (f(s + h) - f(s - h)) / (2.0 * h);
        let d2 = (f(s + h) - 2.0 * f(s) + f(s - h)) / (h * h);
        let e1 = mu.deriv(s, 1).unwrap();
        let e2 = mu.deriv(s, 2).unwrap();
        assert!((d1 - e1).abs() <= 1e-6 * e1.abs().max(f(s) / s), "{mu}: {d1} vs {e1}");
        assert!(
            (d2 - e2).abs() <= 1e-3 * e2.abs().max(f(s) / (s * s)),
            "{mu}: {d2} vs {e2}"
        );
    }
}

#[test]
fn classifier_follows_the_weighted_rule() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..200 {
        let n = rng.gen_range(1..=2);
        let p = if n == 1 {
            rng.gen_range(2.1..3.0)
        } else {
            rng.gen_range(1.2..2.0)
        };
        let pair = CriticalPair::from_curve(n, p).unwrap();
        let q = pair.q_c;
        let a1 = rng.gen_range(0.1..3.0);
        let a2 = rng.gen_range(0.1..3.0);
        let w = (q * a1 + a2) / (q + 1.0);
        if (w - 1.0).abs() < 1e-3 {
            continue;
        }
        let v = classify_dini(&Modulus::log_pow(a1).unwrap(), &Modulus::log_pow(a2).unwrap(), q, 0.1);
        let want = if w > 1.0 {
            DiniStatus::Converges
        } else {
            DiniStatus::Diverges
        };
        assert_eq!(v.status, want, "α = ({a1}, {a2}), q = {q}");
        // doubling increments shrink by 2^{-(w-1)}, indistinguishable from divergence when w is within 0.03 of 1
        if (w - 1.0).abs() > 0.05 {
            assert!(v.consistent, "α = ({a1}, {a2}), q = {q}: ratio {:?}", v.increment_ratio);
        }
    }
}

#[test]
fn any_power_factor_converges() {
    for a in [0.05, 0.5, 1.0] {
        let v = classify_dini(&Modulus::power(a).unwrap(), &Modulus::log_pow(0.1).unwrap(), 6.0, 0.1);
        assert_eq!(v.status, DiniStatus::Converges);
        assert!(v.estimate.unwrap().is_finite());
    }
}

proptest! {
    #[test]
    fn moduli_are_increasing(a in 0.05f64..3.0, kind in 0usize..3, x in 0.001f64..0.99, y in 0.001f64..0.99) {
        let mu = match kind {
            0 => Modulus::power(a.min(1.0)).unwrap(),
            1 => Modulus::log_pow(a).unwrap(),
            _ => Modulus::iter_log_pow(2, a).unwrap(),
        };
        let (lo, hi) = if x < y { (x, y) } else { (y, x) };
        prop_assume!(hi - lo > 1e-9);
        let s = mu.s_max();
        prop_assert!(mu.eval(lo * s).unwrap() < mu.eval(hi * s).unwrap());
        prop_assert!(mu.eval(lo * s).unwrap() > 0.0);
    }

    #[test]
    fn literal_round_trip(a in 0.1f64..3.0, b in 0.0f64..2.0) {
        let mu = Modulus::from_exponents(0.0, vec![a, b]).unwrap();
        let back: Modulus = mu.to_string().parse().unwrap();
        prop_assert_eq!(back.log_depth(), mu.log_depth());
        for (x, y) in back.log_exponents().iter().zip(mu.log_exponents()) {
            prop_assert!((x - y).abs() < 1e-12);
        }
        prop_assert_eq!(back.s_max(), mu.s_max());
    }

    #[test]
    fn curve_round_trip(n in 1usize..=2, p in 1.01f64..5.0) {
        if let Ok(pair) = CriticalPair::from_curve(n, p) {
            prop_assert!(pair.curve_residual() <= 1e-12);
            prop_assert!(pair.q_c >= pair.p_c);
            prop_assert!(CriticalPair::new(n, pair.p_c, pair.q_c).is_ok());
        }
    }
}
