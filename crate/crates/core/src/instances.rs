//! Instance families: the moment-matched yes/no ensembles for binary
//! `X, Y`, the uniformity-testing reduction, the `X = Y = Z = [n]`
//! ensembles, and random CI / far smoke-test families.
//!
//! The ensembles are pseudo-distributions; every generator divides by the
//! realised total mass and keeps that total in [`Instance::raw_total`].

use std::str::FromStr;

use num_rational::BigRational;
use rand::seq::index::sample as sample_indices;
use rand::Rng as _;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::dist::{ci_distance_proxy, Dims, JointDistribution};
use crate::error::{Error, Result};
use crate::poly::Monomial;
use crate::rng::{derive_seed, rng_from_seed, role, Rng};
use crate::scalar::{pow, rational};

/// `2 × 2` slices, row-major, in hundredths.
pub const Y1: [i64; 4] = [16, 24, 24, 36];
pub const Y2: [i64; 4] = [36, 24, 24, 16];
pub const N1: [i64; 4] = [6, 24, 24, 46];
pub const N2: [i64; 4] = [46, 24, 24, 6];
pub const N3: [i64; 4] = [26, 24, 24, 26];

fn hundredths(m: &[i64; 4]) -> Vec<f64> {
    m.iter().map(|&v| v as f64 / 100.0).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    YesBinaryR1,
    NoBinaryR1,
    YesBinaryR2,
    NoBinaryR2,
    PaninskiYes,
    PaninskiNo,
    NnnD0,
    NnnD1,
    RandomCi,
    RandomFar,
}

impl Family {
    pub const ALL: [Family; 10] = [
        Family::YesBinaryR1,
        Family::NoBinaryR1,
        Family::YesBinaryR2,
        Family::NoBinaryR2,
        Family::PaninskiYes,
        Family::PaninskiNo,
        Family::NnnD0,
        Family::NnnD1,
        Family::RandomCi,
        Family::RandomFar,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::YesBinaryR1 => "yes_binary_r1",
            Family::NoBinaryR1 => "no_binary_r1",
            Family::YesBinaryR2 => "yes_binary_r2",
            Family::NoBinaryR2 => "no_binary_r2",
            Family::PaninskiYes => "paninski_yes",
            Family::PaninskiNo => "paninski_no",
            Family::NnnD0 => "nnn_d0",
            Family::NnnD1 => "nnn_d1",
            Family::RandomCi => "random_ci",
            Family::RandomFar => "random_far",
        }
    }

    /// Whether members of the family are conditionally independent.
    pub fn is_null(self) -> bool {
        matches!(
            self,
            Family::YesBinaryR1 | Family::YesBinaryR2 | Family::PaninskiYes | Family::NnnD0 | Family::RandomCi
        )
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown family {s:?}")))
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Parameters of one draw. `m` is the sample-budget parameter of the binary
/// ensembles (heavy bins get mass `1/m`); `l1`, `l2` are only read by the
/// random families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub family: Family,
    pub n: usize,
    pub m: f64,
    pub epsilon: f64,
    pub l1: usize,
    pub l2: usize,
    pub seed: u64,
}

impl EnsembleSpec {
    pub fn new(family: Family, n: usize, epsilon: f64, seed: u64) -> Self {
        EnsembleSpec { family, n, m: 1.0, epsilon, l1: 2, l2: 2, seed }
    }

    pub fn with_m(mut self, m: f64) -> Self {
        self.m = m;
        self
    }

    pub fn with_sides(mut self, l1: usize, l2: usize) -> Self {
        self.l1 = l1;
        self.l2 = l2;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SliceKind {
    /// Uniform slice of a heavy bin.
    Heavy,
    /// The unit-mass uniform bin that anchors the second ensemble.
    Anchor,
    Y1,
    Y2,
    N1,
    N2,
    N3,
    /// One of the four perturbed uniformity patterns, numbered 1 to 4.
    Paninski(u8),
    Uniform,
    Other,
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub dist: JointDistribution,
    /// Total mass before normalisation.
    pub raw_total: f64,
    pub kinds: Vec<SliceKind>,
    /// Size of the heavy sets for the `[n]³` ensembles.
    pub heavy_size: Option<usize>,
}

impl Instance {
    fn from_raw(dims: Dims, weights: Vec<f64>, tables: Vec<Vec<f64>>, kinds: Vec<SliceKind>) -> Result<Self> {
        let raw = JointDistribution::from_slices(dims, &weights, &tables)?;
        let (dist, raw_total) = raw.normalize()?;
        Ok(Instance { dist, raw_total, kinds, heavy_size: None })
    }

    /// Proxy distance of the un-normalised pseudo-distribution.
    pub fn raw_proxy(&self) -> f64 {
        ci_distance_proxy(&self.dist) * self.raw_total
    }
}

fn bin_rng(seed: u64, z: usize) -> Rng {
    rng_from_seed(derive_seed(seed, &[role::INSTANCE, z as u64]))
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::Regime(format!("epsilon {eps} outside (0, 1]")));
    }
    Ok(())
}

fn light_slice(rng: &mut Rng, far: bool) -> (Vec<f64>, SliceKind) {
    let u: f64 = rng.random();
    if far {
        if u < 0.125 {
            (hundredths(&N1), SliceKind::N1)
        } else if u < 0.25 {
            (hundredths(&N2), SliceKind::N2)
        } else {
            (hundredths(&N3), SliceKind::N3)
        }
    } else if u < 0.5 {
        (hundredths(&Y1), SliceKind::Y1)
    } else {
        (hundredths(&Y2), SliceKind::Y2)
    }
}

/// The binary yes/no ensembles. In the first, each bin is heavy (mass
/// `1/m`, uniform slice) with probability `m/n` and light (mass `ε/n`)
/// otherwise; requires `1 ≤ m < n`. In the second, bins `0..n−1` are heavy
/// with probability `1/2` and bin `n−1` is a unit-mass uniform anchor.
pub fn gen_binary_ensemble(spec: &EnsembleSpec) -> Result<Instance> {
    let (n, m, eps) = (spec.n, spec.m, spec.epsilon);
    check_eps(eps)?;
    let (far, second) = match spec.family {
        Family::YesBinaryR1 => (false, false),
        Family::NoBinaryR1 => (true, false),
        Family::YesBinaryR2 => (false, true),
        Family::NoBinaryR2 => (true, true),
        other => return Err(Error::InvalidParameter(format!("{other} is not a binary ensemble"))),
    };
    if !(m >= 1.0 && m.is_finite()) {
        return Err(Error::Regime(format!("ensemble parameter m = {m} must be >= 1")));
    }
    if !second && m >= n as f64 {
        return Err(Error::Regime(format!("first ensemble needs m < n, got m = {m}, n = {n}")));
    }
    if second && n < 2 {
        return Err(Error::Regime("second ensemble needs n >= 2".into()));
    }
    let dims = Dims::new(2, 2, n)?;
    let heavy_p = if second { 0.5 } else { m / n as f64 };
    let mut weights = Vec::with_capacity(n);
    let mut tables = Vec::with_capacity(n);
    let mut kinds = Vec::with_capacity(n);
    for z in 0..n {
        if second && z == n - 1 {
            weights.push(1.0);
            tables.push(vec![0.25; 4]);
            kinds.push(SliceKind::Anchor);
            continue;
        }
        let mut rng = bin_rng(spec.seed, z);
        if rng.random::<f64>() < heavy_p {
            weights.push(1.0 / m);
            tables.push(vec![0.25; 4]);
            kinds.push(SliceKind::Heavy);
        } else {
            let (t, k) = light_slice(&mut rng, far);
            weights.push(eps / n as f64);
            tables.push(t);
            kinds.push(k);
        }
    }
    Instance::from_raw(dims, weights, tables, kinds)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentMatchReport {
    pub max_degree: u32,
    /// Monomials of degree `≤ max_degree` checked.
    pub checked: usize,
    /// Monomials of degree `≤ max_degree` whose mixtures differ.
    pub mismatches: Vec<Monomial>,
    /// Degree-4 monomials whose mixtures differ.
    pub degree4_differences: Vec<Monomial>,
}

impl MomentMatchReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty() && !self.degree4_differences.is_empty()
    }
}

fn monomials_of_degree(vars: usize, d: u32) -> Vec<Monomial> {
    fn rec(v: usize, vars: usize, left: u32, cur: &mut Monomial, out: &mut Vec<Monomial>) {
        if v == vars - 1 {
            let mut m = cur.clone();
            if left > 0 {
                m.push((v, left));
            }
            out.push(m);
            return;
        }
        for e in 0..=left {
            if e > 0 {
                cur.push((v, e));
            }
            rec(v + 1, vars, left - e, cur, out);
            if e > 0 {
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(0, vars, d, &mut Vec::new(), &mut out);
    out
}

fn mixture_moment(mono: &[(usize, u32)], parts: &[(BigRational, [i64; 4])]) -> BigRational {
    parts.iter().fold(rational(0, 1), |acc, (w, m)| {
        let v = mono.iter().fold(rational(1, 1), |a, &(i, e)| a * pow(&rational(m[i], 100), e));
        acc + w * v
    })
}

/// Compares `⅛R(N₁) + ⅛R(N₂) + ¾R(N₃)` with `½R(Y₁) + ½R(Y₂)` exactly for
/// every monomial `R` of degree `≤ max_degree` in the four cell
/// probabilities, and for every degree-4 monomial.
pub fn moment_match_check(max_degree: u32) -> MomentMatchReport {
    let no = [(rational(1, 8), N1), (rational(1, 8), N2), (rational(3, 4), N3)];
    let yes = [(rational(1, 2), Y1), (rational(1, 2), Y2)];
    let differs = |m: &Monomial| mixture_moment(m, &no) != mixture_moment(m, &yes);
    let mut checked = 0;
    let mut mismatches = Vec::new();
    for d in 0..=max_degree {
        for m in monomials_of_degree(4, d) {
            checked += 1;
            if differs(&m) {
                mismatches.push(m);
            }
        }
    }
    let degree4_differences = monomials_of_degree(4, 4).into_iter().filter(|m| differs(m)).collect();
    MomentMatchReport { max_degree, checked, mismatches, degree4_differences }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PaninskiVariant {
    Uniform,
    Perturbed,
}

/// Maps a uniformity instance on `[N]` into `{0,1}² × [N/4]`: block `k` of
/// four consecutive elements becomes cells `(0,0), (0,1), (1,0), (1,1)` of
/// bin `k`. The perturbed variant gives pair `(2i, 2i+1)` masses
/// `((1 ± 2ε)/N, (1 ∓ 2ε)/N)` with an independent fair sign.
pub fn paninski_reduction(big_n: usize, epsilon: f64, which: PaninskiVariant, seed: u64) -> Result<Instance> {
    if big_n == 0 || big_n % 4 != 0 {
        return Err(Error::InvalidParameter(format!("N = {big_n} is not a positive multiple of 4")));
    }
    if !(epsilon > 0.0 && epsilon <= 0.5) {
        return Err(Error::Regime(format!("epsilon {epsilon} outside (0, 1/2]")));
    }
    let n = big_n / 4;
    let dims = Dims::new(2, 2, n)?;
    let base = 1.0 / big_n as f64;
    let mut mass = Vec::with_capacity(big_n);
    let mut kinds = Vec::with_capacity(n);
    for z in 0..n {
        match which {
            PaninskiVariant::Uniform => {
                mass.extend([base; 4]);
                kinds.push(SliceKind::Uniform);
            }
            PaninskiVariant::Perturbed => {
                let mut rng = bin_rng(seed, z);
                let s0 = rng.random::<bool>();
                let s1 = rng.random::<bool>();
                for s in [s0, s1] {
                    let sign = if s { 1.0 } else { -1.0 };
                    mass.push((1.0 + sign * 2.0 * epsilon) * base);
                    mass.push((1.0 - sign * 2.0 * epsilon) * base);
                }
                let pattern = match (s0, s1) {
                    (true, true) => 1,
                    (true, false) => 2,
                    (false, false) => 3,
                    (false, true) => 4,
                };
                kinds.push(SliceKind::Paninski(pattern));
            }
        }
    }
    let raw = JointDistribution::new(dims, mass)?;
    let (dist, raw_total) = raw.normalize()?;
    Ok(Instance { dist, raw_total, kinds, heavy_size: None })
}

/// `⌊n^{3/4}⌋` computed exactly.
pub fn heavy_set_size(n: usize) -> usize {
    let n3 = (n as u128).pow(3);
    let mut k = (n as f64).powf(0.75) as u128;
    while (k + 1).pow(4) <= n3 {
        k += 1;
    }
    while k.pow(4) > n3 {
        k -= 1;
    }
    k as usize
}

/// The `X = Y = Z = [n]` ensembles with an extra bit `W` folded into the
/// first coordinate as `x·2 + w`, so the result lives on
/// `[2n] × [n] × [n]`. Under `far = false` (`D₀`) `W` is an independent fair
/// bit; under `far = true` (`D₁`) it is a fair bit when `x ∈ A_z` or
/// `y ∈ B_z` and a seeded hash of `(x, y, z)` otherwise.
pub fn gen_nnn(n: usize, far: bool, seed: u64) -> Result<Instance> {
    if n < 16 {
        return Err(Error::Regime(format!("n = {n} too small, need n >= 16")));
    }
    let k = heavy_set_size(n);
    let dims = Dims::new(2 * n, n, n)?;
    let heavy = 1.0 / (2.0 * k as f64);
    let light = 1.0 / (2.0 * (n - k) as f64);
    let hash_seed = derive_seed(seed, &[role::ALT]);
    let mut mass = vec![0.0; dims.len()];
    for z in 0..n {
        let mut rng = bin_rng(seed, z);
        let mut in_a = vec![false; n];
        let mut in_b = vec![false; n];
        for i in sample_indices(&mut rng, n, k) {
            in_a[i] = true;
        }
        for i in sample_indices(&mut rng, n, k) {
            in_b[i] = true;
        }
        for x in 0..n {
            let px = if in_a[x] { heavy } else { light };
            for y in 0..n {
                let py = if in_b[y] { heavy } else { light };
                let cell = px * py / n as f64;
                if far && !in_a[x] && !in_b[y] {
                    let w = (derive_seed(hash_seed, &[x as u64, y as u64, z as u64]) & 1) as usize;
                    mass[dims.index(2 * x + w, y, z)] = cell;
                } else {
                    mass[dims.index(2 * x, y, z)] = cell / 2.0;
                    mass[dims.index(2 * x + 1, y, z)] = cell / 2.0;
                }
            }
        }
    }
    let raw = JointDistribution::new(dims, mass)?;
    let (dist, raw_total) = raw.normalize()?;
    let kinds = vec![if far { SliceKind::Other } else { SliceKind::Uniform }; n];
    Ok(Instance { dist, raw_total, kinds, heavy_size: Some(k) })
}

fn dirichlet(rng: &mut Rng, k: usize) -> Vec<f64> {
    let v: Vec<f64> = (0..k).map(|_| Exp1.sample(rng)).collect();
    let s: f64 = v.iter().sum();
    v.into_iter().map(|x| x / s).collect()
}

fn outer(r: &[f64], c: &[f64]) -> Vec<f64> {
    r.iter().flat_map(|a| c.iter().map(move |b| a * b)).collect()
}

/// Random `p_Z` and random product slices.
pub fn gen_random_ci(l1: usize, l2: usize, n: usize, seed: u64) -> Result<Instance> {
    let dims = Dims::new(l1, l2, n)?;
    let mut rng = rng_from_seed(derive_seed(seed, &[role::INSTANCE]));
    let weights = dirichlet(&mut rng, n);
    let tables = (0..n)
        .map(|_| {
            let r = dirichlet(&mut rng, l1);
            let c = dirichlet(&mut rng, l2);
            outer(&r, &c)
        })
        .collect();
    Instance::from_raw(dims, weights, tables, vec![SliceKind::Other; n])
}

/// Maximum number of base draws tried by [`gen_random_far`].
pub const FAR_ATTEMPTS: u64 = 100;

/// A random CI instance mixed slice-wise with a random functional coupling
/// `y = π(x)`; the mixing weight is bisected so that the proxy distance is
/// at least `ε`.
pub fn gen_random_far(l1: usize, l2: usize, n: usize, epsilon: f64, seed: u64) -> Result<Instance> {
    check_eps(epsilon)?;
    if l1 < 2 || l2 < 2 {
        return Err(Error::InvalidParameter("random_far needs l1, l2 >= 2".into()));
    }
    let dims = Dims::new(l1, l2, n)?;
    for attempt in 0..FAR_ATTEMPTS {
        let base = gen_random_ci(l1, l2, n, derive_seed(seed, &[attempt]))?;
        let mut rng = rng_from_seed(derive_seed(seed, &[attempt, role::ALT]));
        let mut coupling = Vec::with_capacity(dims.len());
        for z in 0..n {
            let w = base.dist.bin_weight(z);
            let mut t = vec![0.0; l1 * l2];
            for x in 0..l1 {
                t[x * l2 + rng.random_range(0..l2)] = w / l1 as f64;
            }
            coupling.extend(t);
        }
        let mix = |lambda: f64| -> Result<JointDistribution> {
            let mass =
                base.dist.mass().iter().zip(&coupling).map(|(a, b)| (1.0 - lambda) * a + lambda * b).collect();
            JointDistribution::new(dims, mass)
        };
        let top = mix(1.0)?;
        if ci_distance_proxy(&top) < epsilon {
            continue;
        }
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if ci_distance_proxy(&mix(mid)?) >= epsilon {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let raw = mix(hi)?;
        let (dist, raw_total) = raw.normalize()?;
        if ci_distance_proxy(&dist) >= epsilon {
            return Ok(Instance { dist, raw_total, kinds: vec![SliceKind::Other; n], heavy_size: None });
        }
    }
    Err(Error::BudgetExhausted(format!(
        "no far instance with proxy >= {epsilon} after {FAR_ATTEMPTS} attempts"
    )))
}

/// Dispatches on `spec.family`.
pub fn generate(spec: &EnsembleSpec) -> Result<Instance> {
    match spec.family {
        Family::YesBinaryR1 | Family::NoBinaryR1 | Family::YesBinaryR2 | Family::NoBinaryR2 => {
            gen_binary_ensemble(spec)
        }
        Family::PaninskiYes => paninski_reduction(4 * spec.n, spec.epsilon, PaninskiVariant::Uniform, spec.seed),
        Family::PaninskiNo => paninski_reduction(4 * spec.n, spec.epsilon, PaninskiVariant::Perturbed, spec.seed),
        Family::NnnD0 => gen_nnn(spec.n, false, spec.seed),
        Family::NnnD1 => gen_nnn(spec.n, true, spec.seed),
        Family::RandomCi => gen_random_ci(spec.l1, spec.l2, spec.n, spec.seed),
        Family::RandomFar => gen_random_far(spec.l1, spec.l2, spec.n, spec.epsilon, spec.seed),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{binary_slice_tv_via_covariance, product_of_conditional_marginals, tv_distance};

    #[test]
    fn family_names_round_trip() {
        for f in Family::ALL {
            assert_eq!(f.name().parse::<Family>().unwrap(), f);
        }
        assert!("nope".parse::<Family>().is_err());
    }

    #[test]
    fn first_moments_match() {
        let x1 = vec![(0usize, 1u32)];
        let no = [(rational(1, 8), N1), (rational(1, 8), N2), (rational(3, 4), N3)];
        let yes = [(rational(1, 2), Y1), (rational(1, 2), Y2)];
        assert_eq!(mixture_moment(&x1, &no), rational(26, 100));
        assert_eq!(mixture_moment(&x1, &yes), rational(26, 100));
        assert_eq!(mixture_moment(&[], &no), rational(1, 1));
        assert_ne!(mixture_moment(&[(0, 4)], &no), mixture_moment(&[(0, 4)], &yes));
    }

    #[test]
    fn moment_matching_holds_through_degree_three() {
        let r = moment_match_check(3);
        assert_eq!(r.checked, 1 + 4 + 10 + 20);
        assert!(r.mismatches.is_empty());
        assert!(!r.degree4_differences.is_empty());
        assert!(r.passed());
    }

    #[test]
    fn binary_ensemble_structure() {
        let spec = EnsembleSpec::new(Family::NoBinaryR1, 400, 0.5, 3).with_m(40.0);
        let inst = generate(&spec).unwrap();
        for (z, kind) in inst.kinds.iter().enumerate() {
            let s = inst.dist.slice(z);
            let q = product_of_conditional_marginals(&s);
            let tv = tv_distance(s.table(), q.table()).unwrap();
            let expect = match kind {
                SliceKind::Heavy => 0.0,
                SliceKind::N1 | SliceKind::N2 => 0.06,
                SliceKind::N3 => 0.02,
                k => panic!("unexpected kind {k:?}"),
            };
            assert!((tv - expect).abs() < 1e-12);
            let raw_w = inst.dist.bin_weight(z) * inst.raw_total;
            let want = if *kind == SliceKind::Heavy { 1.0 / 40.0 } else { 0.5 / 400.0 };
            assert!((raw_w - want).abs() < 1e-12);
        }
        let yes = generate(&EnsembleSpec { family: Family::YesBinaryR1, ..spec.clone() }).unwrap();
        assert!(yes.dist.slices().all(|s| s.is_product(1e-15)));
        assert!(generate(&spec.clone().with_m(400.0)).is_err());
    }

    #[test]
    fn second_ensemble_anchor() {
        let spec = EnsembleSpec::new(Family::NoBinaryR2, 50, 0.5, 1).with_m(10.0);
        let inst = generate(&spec).unwrap();
        assert_eq!(inst.kinds[49], SliceKind::Anchor);
        assert!((inst.dist.bin_weight(49) * inst.raw_total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn paninski_patterns() {
        let u = paninski_reduction(64, 0.2, PaninskiVariant::Uniform, 0).unwrap();
        assert!(u.dist.mass().iter().all(|&v| (v - 1.0 / 64.0).abs() < 1e-15));
        let p = paninski_reduction(64, 0.2, PaninskiVariant::Perturbed, 5).unwrap();
        assert!(paninski_reduction(62, 0.2, PaninskiVariant::Uniform, 0).is_err());
        for (z, k) in p.kinds.iter().enumerate() {
            let s = p.dist.slice(z);
            let rows_half = s.row_marginal().iter().all(|&r| (r - 0.5).abs() < 1e-12);
            let cols_half = s.col_marginal().iter().all(|&c| (c - 0.5).abs() < 1e-12);
            assert!(rows_half || cols_half);
            let d = binary_slice_tv_via_covariance(&s).unwrap();
            match k {
                SliceKind::Paninski(1) | SliceKind::Paninski(3) => assert!(d < 1e-12),
                SliceKind::Paninski(_) => assert!((d - 0.2).abs() < 1e-12),
                _ => unreachable!(),
            }
        }
    }

    #[test]
    fn nnn_structure() {
        assert_eq!(heavy_set_size(16), 8);
        assert_eq!(heavy_set_size(81), 27);
        assert_eq!(heavy_set_size(100), 31);
        let d0 = gen_nnn(16, false, 2).unwrap();
        assert_eq!(d0.heavy_size, Some(8));
        assert!((d0.raw_total - 1.0).abs() < 1e-12);
        assert!(d0.dist.slices().all(|s| s.is_product(1e-15)));
        let d1 = gen_nnn(16, true, 2).unwrap();
        assert!(ci_distance_proxy(&d1.dist) > 0.01);
        assert!(gen_nnn(15, false, 0).is_err());
    }

    #[test]
    fn random_families() {
        let ci = gen_random_ci(3, 4, 5, 9).unwrap();
        assert!(ci.dist.slices().all(|s| s.is_product(1e-12)));
        let far = gen_random_far(3, 4, 5, 0.2, 9).unwrap();
        assert!(ci_distance_proxy(&far.dist) >= 0.2);
        let again = gen_random_far(3, 4, 5, 0.2, 9).unwrap();
        assert_eq!(far.dist, again.dist);
        assert!(matches!(gen_random_far(2, 2, 3, 0.9, 1), Err(Error::BudgetExhausted(_))));
    }
}
