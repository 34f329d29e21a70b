use condind::flatten::FlatteningCoefficients;
use condind::poly::oracle_moments_with;
use condind::scalar::rational;
use condind::{
    expected_square, l2_diff_polynomial, l2_estimator, oracle_moments, rescaled_l2_value, tail_term_bound,
    unbiased_estimate, Fingerprint, HomogeneousPolynomial,
};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use proptest::prelude::*;

type Q = BigRational;

fn dist(weights: &[i64]) -> Vec<Q> {
    let total: i64 = weights.iter().sum::<i64>().max(1);
    if weights.iter().all(|&w| w == 0) {
        return weights.iter().map(|_| rational(1, weights.len() as i64)).collect();
    }
    weights.iter().map(|&w| rational(w, total)).collect()
}

fn poly(vars: usize, d: usize, terms: &[(Vec<usize>, i64)]) -> HomogeneousPolynomial<Q> {
    let mut q = HomogeneousPolynomial::new(vars, d);
    for (picks, c) in terms {
        let mut e = vec![0u32; vars];
        for &i in picks.iter().take(d) {
            e[i % vars] += 1;
        }
        let mono: Vec<(usize, u32)> = e.iter().enumerate().filter(|(_, &v)| v > 0).map(|(i, &v)| (i, v)).collect();
        q.add_term(&mono, rational(*c, 1)).unwrap();
    }
    q
}

/// `(vars, degree, samples, p weights, terms)`.
fn case() -> impl Strategy<Value = (usize, usize, usize, Vec<i64>, Vec<(Vec<usize>, i64)>)> {
    (1usize..=3, 1usize..=3, 0usize..=2).prop_flat_map(|(vars, d, extra)| {
        (
            Just(vars),
            Just(d),
            Just(d + extra),
            prop::collection::vec(0i64..6, vars),
            prop::collection::vec((prop::collection::vec(0usize..3, d), -4i64..=4), 1..4),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn unbiased_and_second_moment((vars, d, n, w, terms) in case()) {
        let q = poly(vars, d, &terms);
        let p = dist(&w);
        let (mean, var) = oracle_moments(&q, &p, n).unwrap();
        prop_assert_eq!(&mean, &q.evaluate(&p));
        let r = expected_square(&q, &p, n as u64).unwrap();
        prop_assert_eq!(r.expected_square.clone(), &var + &mean * &mean);
        prop_assert_eq!(r.variance.clone(), var);
        prop_assert!(r.variance <= r.variance_bound);
        for g in 0..=d {
            let tail = r.terms[g..].iter().fold(Q::zero(), |a, t| a + t);
            if g > 0 {
                prop_assert!(tail <= tail_term_bound(&q, &p, n as u64, g).unwrap());
            }
        }
    }

    #[test]
    fn relabelling_symbols_commutes((vars, d, _n, _w, terms) in case(), counts in prop::collection::vec(0u64..4, 3), shift in 0usize..3) {
        let q = poly(vars, d, &terms);
        let counts: Vec<u64> = counts[..vars].to_vec();
        prop_assume!(counts.iter().sum::<u64>() >= d as u64);
        let perm = |i: usize| (i + shift) % vars;
        let mut q2 = HomogeneousPolynomial::new(vars, d);
        for (m, c) in q.terms() {
            let mono: Vec<(usize, u32)> = m.iter().map(|&(i, e)| (perm(i), e)).collect();
            q2.add_term(&mono, c.clone()).unwrap();
        }
        let mut c2 = vec![0u64; vars];
        for i in 0..vars {
            c2[perm(i)] = counts[i];
        }
        prop_assert_eq!(
            unbiased_estimate(&q, &Fingerprint::new(counts)).unwrap(),
            unbiased_estimate(&q2, &Fingerprint::new(c2)).unwrap()
        );
    }

    #[test]
    fn estimate_depends_on_fingerprint_only(samples in prop::collection::vec(0usize..3, 2..9), rot in 0usize..8) {
        let q = poly(3, 2, &[(vec![0, 1], 1), (vec![2, 2], -3)]);
        let mut shuffled = samples.clone();
        let k = rot % shuffled.len();
        shuffled.rotate_left(k);
        shuffled.reverse();
        let a = unbiased_estimate(&q, &Fingerprint::from_samples(3, &samples).unwrap()).unwrap();
        let b = unbiased_estimate(&q, &Fingerprint::from_samples(3, &shuffled).unwrap()).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn weighted_l2_estimator_matches_rescaled_value(
        w in prop::collection::vec(0i64..5, 4),
        b in prop::collection::vec(0u64..3, 2),
        c in prop::collection::vec(0u64..3, 2),
        n in 4usize..=6,
    ) {
        let p = dist(&w);
        let coeffs = FlatteningCoefficients::new(b, c);
        let weights = coeffs.weights::<Q>();
        let (mean, _) = oracle_moments_with(&p, n, |f| l2_estimator(f.counts(), 2, 2, &weights)).unwrap();
        prop_assert_eq!(mean, rescaled_l2_value(&p, &coeffs).unwrap());
    }
}

#[test]
fn l2_polynomial_estimator_agrees_with_count_form() {
    let q = l2_diff_polynomial::<Q>(2, 3).unwrap();
    let unit = vec![rational(1, 1); 6];
    for counts in [[2u64, 1, 0, 1, 3, 1], [1, 1, 1, 1, 0, 0], [0, 4, 0, 2, 2, 0]] {
        let f = Fingerprint::new(counts.to_vec());
        assert_eq!(unbiased_estimate(&q, &f).unwrap(), l2_estimator(&counts, 2, 3, &unit).unwrap());
    }
}

#[test]
fn l2_estimator_examples() {
    let unit = vec![rational(1, 1); 4];
    assert_eq!(l2_estimator(&[1, 1, 1, 1], 2, 2, &unit).unwrap(), rational(-1, 3));
    assert_eq!(l2_estimator(&[4, 0, 0, 0], 2, 2, &unit).unwrap(), rational(0, 1));
    assert!(l2_estimator(&[1, 1, 1, 0], 2, 2, &unit).is_err());
    assert!(l2_diff_polynomial::<Q>(1, 2).is_err());
}

/// Variance of the l2 estimator relative to the constant-one bound, over a
/// grid of small cases; the largest ratio is the fitted constant.
#[test]
fn l2_variance_bound_constant() {
    let q = l2_diff_polynomial::<Q>(2, 2).unwrap();
    let mut worst = 0.0f64;
    for w in [[1i64, 1, 1, 1], [6, 24, 24, 46], [1, 0, 0, 1], [5, 1, 2, 9], [1, 2, 3, 4]] {
        let p = dist(&w);
        for n in 4..=8u64 {
            let r = expected_square(&q, &p, n).unwrap();
            if r.variance_bound.is_zero() {
                assert!(r.variance.is_zero());
                continue;
            }
            let ratio = (&r.variance / &r.variance_bound).to_f64().unwrap();
            worst = worst.max(ratio);
        }
    }
    println!("fitted l2 variance constant: {worst:.4}");
    assert!(worst <= 1.0);
}
