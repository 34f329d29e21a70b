use condind::flatten::{split_distribution, SplitSpec};
use condind::io::{read_distribution, read_samples, write_distribution, write_samples};
use condind::{
    ci_distance_proxy, conditional_mutual_information, mixture_q, sample_fixed, tv_distance, Dims, JointDistribution,
    SampleSet,
};
use proptest::prelude::*;

fn joint() -> impl Strategy<Value = JointDistribution> {
    (2usize..=3, 2usize..=3, 1usize..=4).prop_flat_map(|(l1, l2, n)| {
        prop::collection::vec(0.0f64..1.0, l1 * l2 * n).prop_map(move |raw| {
            let raw: Vec<f64> = raw.iter().map(|v| v + 1e-3).collect();
            let t: f64 = raw.iter().sum();
            JointDistribution::new(Dims::new(l1, l2, n).unwrap(), raw.iter().map(|v| v / t).collect()).unwrap()
        })
    })
}

/// Same shape as `p`, independent masses.
fn other_like(p: &JointDistribution, raw: &[f64]) -> JointDistribution {
    let k = p.mass().len();
    let vals: Vec<f64> = (0..k).map(|i| raw[i % raw.len()] + 1e-3).collect();
    let t: f64 = vals.iter().sum();
    JointDistribution::new(p.dims(), vals.iter().map(|v| v / t).collect()).unwrap()
}

fn conditional_tv_sum(p: &JointDistribution, q: &JointDistribution) -> f64 {
    p.slices()
        .zip(q.slices())
        .map(|(a, b)| a.weight() * tv_distance(a.table(), b.table()).unwrap())
        .sum()
}

proptest! {
    #[test]
    fn tv_decomposition(p in joint(), raw in prop::collection::vec(0.0f64..1.0, 1..40)) {
        let q = other_like(&p, &raw);
        let lhs = tv_distance(p.mass(), q.mass()).unwrap();
        let rhs = conditional_tv_sum(&p, &q) + tv_distance(p.bin_weights(), q.bin_weights()).unwrap();
        prop_assert!(lhs <= rhs + 1e-12);

        let m = mixture_q(&p);
        let lhs = tv_distance(p.mass(), m.mass()).unwrap();
        prop_assert!((lhs - conditional_tv_sum(&p, &m)).abs() < 1e-12);
    }

    #[test]
    fn mixture_is_rank_one(p in joint()) {
        let m = mixture_q(&p);
        prop_assert!(m.slices().all(|s| s.is_product(1e-12)));
        prop_assert!(ci_distance_proxy(&m) < 1e-12);
        for (a, b) in p.bin_weights().iter().zip(m.bin_weights()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn proxy_zero_iff_rank_one(p in joint()) {
        let rank_one = p.slices().all(|s| s.is_product(1e-9));
        prop_assert_eq!(ci_distance_proxy(&p) < 1e-9, rank_one);
    }

    #[test]
    fn pinsker_direction(p in joint()) {
        let proxy = ci_distance_proxy(&p);
        prop_assert!(conditional_mutual_information(&p) >= 2.0 * (proxy / 4.0).powi(2) - 1e-9);
    }

    #[test]
    fn split_preserves_tv(
        raw in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 2..8),
        s in prop::collection::vec(0usize..8, 0..12),
    ) {
        let k = raw.len();
        let norm = |v: Vec<f64>| { let t: f64 = v.iter().sum(); v.iter().map(|x| x / t).collect::<Vec<_>>() };
        let p = norm(raw.iter().map(|r| r.0 + 1e-3).collect());
        let q = norm(raw.iter().map(|r| r.1 + 1e-3).collect());
        let s: Vec<usize> = s.into_iter().filter(|&i| i < k).collect();
        let spec = SplitSpec::from_multiset(k, &s).unwrap();
        let ps = split_distribution(&p, &spec).unwrap();
        let qs = split_distribution(&q, &spec).unwrap();
        prop_assert_eq!(ps.len() as u64, (k + s.len()) as u64);
        prop_assert!((tv_distance(&ps, &qs).unwrap() - tv_distance(&p, &q).unwrap()).abs() < 1e-12);
        prop_assert!((ps.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn split_norm_monotone(
        raw in prop::collection::vec(0.0f64..1.0, 2..8),
        s in prop::collection::vec(0usize..8, 0..8),
        extra in prop::collection::vec(0usize..8, 0..8),
    ) {
        let k = raw.len();
        let t: f64 = raw.iter().map(|v| v + 1e-3).sum();
        let p: Vec<f64> = raw.iter().map(|v| (v + 1e-3) / t).collect();
        let s: Vec<usize> = s.into_iter().filter(|&i| i < k).collect();
        let mut bigger = s.clone();
        bigger.extend(extra.into_iter().filter(|&i| i < k));
        let norm = |m: &[usize]| {
            split_distribution(&p, &SplitSpec::from_multiset(k, m).unwrap()).unwrap().iter().map(|v| v * v).sum::<f64>()
        };
        prop_assert!(norm(&bigger) <= norm(&s) + 1e-15);
    }

    #[test]
    fn distribution_file_round_trip(p in joint()) {
        let mut buf = Vec::new();
        write_distribution(&mut buf, &p).unwrap();
        let back = read_distribution(&buf[..]).unwrap();
        prop_assert_eq!(back.mass(), p.mass());
    }

    #[test]
    fn sample_file_round_trip(p in joint(), count in 0usize..50, seed in any::<u64>()) {
        let s = SampleSet::new(p.dims(), sample_fixed(&p, count, seed).unwrap()).unwrap();
        let mut buf = Vec::new();
        write_samples(&mut buf, &s).unwrap();
        prop_assert_eq!(read_samples(&buf[..]).unwrap(), s);
    }
}

#[test]
fn cmi_of_perfect_correlation_is_one_bit() {
    let p = JointDistribution::new(Dims::new(2, 2, 1).unwrap(), vec![0.5, 0.0, 0.0, 0.5]).unwrap();
    assert!((conditional_mutual_information(&p) - 1.0).abs() < 1e-12);
}

#[test]
fn proxy_of_n1_bins() {
    let n1 = [0.06, 0.24, 0.24, 0.46];
    let n2 = [0.46, 0.24, 0.24, 0.06];
    let single = JointDistribution::new(Dims::new(2, 2, 1).unwrap(), n1.to_vec()).unwrap();
    assert!((ci_distance_proxy(&single) - 0.06).abs() < 1e-12);
    let two: Vec<f64> = n1.iter().chain(&n2).map(|v| v / 2.0).collect();
    let two = JointDistribution::new(Dims::new(2, 2, 2).unwrap(), two).unwrap();
    assert!((ci_distance_proxy(&two) - 0.06).abs() < 1e-12);
}
