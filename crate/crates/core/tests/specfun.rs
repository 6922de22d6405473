use hyperkernel::specfun::{bessel_k, gauss_2f1, gauss_2f1_with, gen_1f2, log_gamma, Accuracy, Hyp2F1};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use proptest::prelude::*;

fn ratio(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

/// Exact partial sum of the ₁F₂ series in rational arithmetic.
fn exact_1f2(a: &BigRational, b1: &BigRational, b2: &BigRational, x: &BigRational, terms: usize) -> f64 {
    let one = ratio(1, 1);
    let mut term = one.clone();
    let mut sum = one.clone();
    for n in 0..terms {
        let nn = ratio(n as i64, 1);
        term = term * (a + &nn) * x / ((b1 + &nn) * (b2 + &nn) * (&nn + &one));
        sum += &term;
    }
    sum.to_f64().unwrap()
}

#[test]
fn log_gamma_examples() {
    assert_eq!(log_gamma(1.0).unwrap(), 0.0);
    assert!((log_gamma(0.5).unwrap() - 0.572_364_942_924_700_1).abs() < 1e-15);
    assert!((log_gamma(5.0).unwrap() - 24f64.ln()).abs() < 1e-14 * 24f64.ln());
    assert!(log_gamma(0.0).is_err());
    assert!(log_gamma(-1.5).is_err());
}

#[test]
fn gauss_examples() {
    assert_eq!(gauss_2f1(0.2, 0.3, 0.4, 0.0).unwrap(), 1.0);
    assert!((gauss_2f1(1.0, 1.0, 2.0, 0.5).unwrap() - 1.386_294_361_119_890_6).abs() < 1e-14);
    assert!((gauss_2f1(0.5, 1.0, 1.5, 0.25).unwrap() - 1.098_612_288_668_109_8).abs() < 1e-14);
}

#[test]
fn bessel_examples() {
    assert!((bessel_k(0.5, 1.0).unwrap() - 0.461_068_504_447_894_4).abs() < 1e-15);
    assert_eq!(bessel_k(-0.5, 1.0).unwrap(), bessel_k(0.5, 1.0).unwrap());
    assert!((bessel_k(1.5, 2.0).unwrap() - 0.179_906_657_952_092_9).abs() < 1e-15);
}

#[test]
fn accuracy_invariants() {
    assert!(Accuracy::new(1e-3, 100).is_ok());
    assert!(Accuracy::new(2e-3, 100).is_err());
    assert!(Accuracy::new(0.0, 100).is_err());
    assert!(Accuracy::new(1e-10, 99).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn gauss_swap_symmetry(a in -3.0f64..6.0, b in -3.0f64..6.0, c in 0.1f64..9.0, w in 0.0f64..0.999) {
        let x = gauss_2f1(a, b, c, w);
        let y = gauss_2f1(b, a, c, w);
        match (x, y) {
            (Ok(x), Ok(y)) => prop_assert!((x - y).abs() <= 1e-13 * x.abs().max(1e-300), "{} {}", x, y),
            (Err(_), Err(_)) => {}
            (x, y) => prop_assert!(false, "asymmetric outcome {:?} {:?}", x, y),
        }
    }

    #[test]
    fn direct_and_transformed_overlap(a in 0.05f64..5.0, b in 0.05f64..5.0, gap in 0.05f64..4.0, w in 0.45f64..0.55) {
        let rel_tol = 1e-10;
        let acc = Accuracy::new(rel_tol, 10_000).unwrap();
        let c = a + b + gap;
        let direct = gauss_2f1_with(a, b, c, w.min(0.5), acc).unwrap();
        let far = Hyp2F1::new(a, b, c, acc).unwrap();
        let transformed = far.eval_transformed(w.min(0.5)).unwrap();
        prop_assert!((direct - transformed).abs() <= rel_tol * direct.abs(), "{} vs {}", direct, transformed);
    }

    #[test]
    fn bessel_recurrence(nu in 0.0f64..19.0, x in 1e-3f64..50.0) {
        let km = bessel_k(nu - 1.0, x).unwrap();
        let k0 = bessel_k(nu, x).unwrap();
        let kp = bessel_k(nu + 1.0, x).unwrap();
        let rhs = km + 2.0 * nu / x * k0;
        prop_assert!((kp - rhs).abs() <= 1e-9 * kp.abs());
    }
}

#[test]
fn gen_1f2_matches_rational_summation() {
    use rand_core::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    let mut pick = |lo: i64, hi: i64| lo + (rng.next_u64() % (hi - lo + 1) as u64) as i64;
    for _ in 0..50 {
        let (pa, pb1, pb2) = (pick(1, 39), pick(1, 39), pick(1, 39));
        let px = pick(-60, 0);
        let (a, b1, b2, x) = (ratio(pa, 8), ratio(pb1, 8), ratio(pb2, 8), ratio(px, 16));
        let want = exact_1f2(&a, &b1, &b2, &x, 60);
        let got = gen_1f2(pa as f64 / 8.0, pb1 as f64 / 8.0, pb2 as f64 / 8.0, px as f64 / 16.0).unwrap();
        assert!((got - want).abs() <= 1e-11 * want.abs().max(1.0), "({pa}/8; {pb1}/8, {pb2}/8; {px}/16): {got} vs {want}");
    }
}
