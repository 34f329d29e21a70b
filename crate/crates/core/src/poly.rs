//! Polynomials in the probabilities of a distribution over `[n]` and their
//! symmetric unbiased estimators.
//!
//! For a homogeneous `Q = Σ_α c_α X^α` of degree `d` and a fingerprint `Φ`
//! of `N ≥ d` samples the unique symmetric unbiased estimator is
//!
//! ```text
//! U_N Q(Φ) = Σ_α c_α Π_i (Φ_i)_{α_i} / (N)_d
//! ```
//!
//! with `(x)_k` the falling factorial. Its second moment has the closed form
//!
//! ```text
//! E[(U_N Q)²] = Σ_{|s| ≤ d} p^s (∂^s Q(p))² (N-d)_{d-|s|} / ((N)_d Π s_i!)
//! ```
//!
//! which [`expected_square`] evaluates term by term, grouped by `h = |s|`.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::scalar::{factorial, falling, pow, Scalar};

/// Sparse exponent vector: `(variable, exponent)` pairs sorted by variable,
/// exponents positive.
pub type Monomial = Vec<(usize, u32)>;

pub fn monomial_degree(m: &[(usize, u32)]) -> usize {
    m.iter().map(|&(_, e)| e as usize).sum()
}

fn canonical(raw: &[(usize, u32)]) -> Monomial {
    let mut acc: BTreeMap<usize, u32> = BTreeMap::new();
    for &(v, e) in raw {
        if e > 0 {
            *acc.entry(v).or_default() += e;
        }
    }
    acc.into_iter().collect()
}

fn mono_mul(a: &[(usize, u32)], b: &[(usize, u32)]) -> Monomial {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
            out.push(a[i]);
            i += 1;
        } else if i == a.len() || b[j].0 < a[i].0 {
            out.push(b[j]);
            j += 1;
        } else {
            out.push((a[i].0, a[i].1 + b[j].1));
            i += 1;
            j += 1;
        }
    }
    out
}

fn eval_monomial<C: Scalar>(m: &[(usize, u32)], x: &[C]) -> C {
    m.iter().fold(C::one(), |acc, &(v, e)| acc * pow(&x[v], e))
}

/// An arbitrary (not necessarily homogeneous) polynomial.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial<C> {
    num_vars: usize,
    terms: BTreeMap<Monomial, C>,
}

impl<C: Scalar> Polynomial<C> {
    pub fn zero(num_vars: usize) -> Self {
        Polynomial { num_vars, terms: BTreeMap::new() }
    }

    pub fn constant(num_vars: usize, c: C) -> Self {
        let mut p = Self::zero(num_vars);
        p.add_term(&[], c).expect("constant term is valid");
        p
    }

    pub fn var(num_vars: usize, i: usize) -> Result<Self> {
        let mut p = Self::zero(num_vars);
        p.add_term(&[(i, 1)], C::one())?;
        Ok(p)
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn add_term(&mut self, mono: &[(usize, u32)], c: C) -> Result<()> {
        if let Some(&(v, _)) = mono.iter().find(|(v, _)| *v >= self.num_vars) {
            return Err(Error::InvalidParameter(format!(
                "variable {v} out of range for {} variables",
                self.num_vars
            )));
        }
        let key = canonical(mono);
        let sum = match self.terms.remove(&key) {
            Some(old) => old + c,
            None => c,
        };
        if !sum.is_zero() {
            self.terms.insert(key, sum);
        }
        Ok(())
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &C)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest monomial degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.terms.keys().map(|m| monomial_degree(m)).max()
    }

    pub fn evaluate(&self, x: &[C]) -> C {
        self.terms
            .iter()
            .fold(C::zero(), |acc, (m, c)| acc + c.clone() * eval_monomial(m, x))
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m, c.clone()).expect("same variable set");
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.num_vars.max(other.num_vars));
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                out.add_term(&mono_mul(a, b), ca.clone() * cb.clone())
                    .expect("same variable set");
            }
        }
        out
    }

    pub fn scale(&self, k: &C) -> Self {
        let mut out = Self::zero(self.num_vars);
        for (m, c) in &self.terms {
            out.add_term(m, c.clone() * k.clone()).expect("same variable set");
        }
        out
    }

    /// `(X_1 + ... + X_n)^k`.
    pub fn power_sum(num_vars: usize, k: u32) -> Self {
        let mut lin = Self::zero(num_vars);
        for i in 0..num_vars {
            lin.add_term(&[(i, 1)], C::one()).expect("in range");
        }
        (0..k).fold(Self::constant(num_vars, C::one()), |acc, _| acc.mul(&lin))
    }
}

/// A homogeneous polynomial of fixed degree with no stored zero
/// coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct HomogeneousPolynomial<C> {
    num_vars: usize,
    degree: usize,
    terms: BTreeMap<Monomial, C>,
}

impl<C: Scalar> HomogeneousPolynomial<C> {
    pub fn new(num_vars: usize, degree: usize) -> Self {
        HomogeneousPolynomial { num_vars, degree, terms: BTreeMap::new() }
    }

    pub fn from_terms<I>(num_vars: usize, degree: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Monomial, C)>,
    {
        let mut q = Self::new(num_vars, degree);
        for (m, c) in terms {
            q.add_term(&m, c)?;
        }
        Ok(q)
    }

    /// Requires every monomial of `p` to have degree exactly `degree`.
    pub fn from_polynomial(p: &Polynomial<C>, degree: usize) -> Result<Self> {
        Self::from_terms(p.num_vars, degree, p.terms.iter().map(|(m, c)| (m.clone(), c.clone())))
    }

    pub fn add_term(&mut self, mono: &[(usize, u32)], c: C) -> Result<()> {
        let key = canonical(mono);
        let deg = monomial_degree(&key);
        if deg != self.degree {
            return Err(Error::InvalidParameter(format!(
                "monomial of degree {deg} in a homogeneous polynomial of degree {}",
                self.degree
            )));
        }
        if let Some(&(v, _)) = key.iter().find(|(v, _)| *v >= self.num_vars) {
            return Err(Error::InvalidParameter(format!(
                "variable {v} out of range for {} variables",
                self.num_vars
            )));
        }
        let sum = match self.terms.remove(&key) {
            Some(old) => old + c,
            None => c,
        };
        if !sum.is_zero() {
            self.terms.insert(key, sum);
        }
        Ok(())
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &C)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, mono: &[(usize, u32)]) -> C {
        self.terms.get(&canonical(mono)).cloned().unwrap_or_else(C::zero)
    }

    pub fn evaluate(&self, x: &[C]) -> C {
        self.terms
            .iter()
            .fold(C::zero(), |acc, (m, c)| acc + c.clone() * eval_monomial(m, x))
    }

    /// `Q⁺`, the same monomials with absolute coefficients.
    pub fn positive_part(&self) -> Self {
        HomogeneousPolynomial {
            num_vars: self.num_vars,
            degree: self.degree,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c.abs_val())).collect(),
        }
    }

    pub fn to_polynomial(&self) -> Polynomial<C> {
        Polynomial { num_vars: self.num_vars, terms: self.terms.clone() }
    }

    /// `∂^s Q` evaluated at `x`.
    pub fn partial_at(&self, s: &[(usize, u32)], x: &[C]) -> C {
        let s = canonical(s);
        let mut acc = C::zero();
        'terms: for (m, c) in &self.terms {
            let mut coef = c.clone();
            let mut val = C::one();
            let mut si = s.iter().peekable();
            for &(v, e) in m {
                let take = match si.peek() {
                    Some(&&(sv, se)) if sv == v => {
                        si.next();
                        se
                    }
                    Some(&&(sv, _)) if sv < v => continue 'terms,
                    _ => 0,
                };
                if take > e {
                    continue 'terms;
                }
                coef = coef * falling::<C>(i64::from(e), take);
                val = val * pow(&x[v], e - take);
            }
            if si.next().is_some() {
                continue;
            }
            acc = acc + coef * val;
        }
        acc
    }
}

/// Multiplies every monomial of degree `d′ < d` by `(ΣX)^{d−d′}`.
pub fn homogenize<C: Scalar>(q: &Polynomial<C>, d: usize) -> Result<HomogeneousPolynomial<C>> {
    let mut out = HomogeneousPolynomial::new(q.num_vars, d);
    let mut powers: HashMap<usize, Polynomial<C>> = HashMap::new();
    for (m, c) in &q.terms {
        let dm = monomial_degree(m);
        if dm > d {
            return Err(Error::DegreeTooHigh { found: dm, target: d });
        }
        let fill = powers
            .entry(d - dm)
            .or_insert_with(|| Polynomial::power_sum(q.num_vars, (d - dm) as u32));
        for (f, cf) in &fill.terms {
            out.add_term(&mono_mul(m, f), c.clone() * cf.clone())?;
        }
    }
    Ok(out)
}

/// Per-symbol sample counts.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fingerprint {
    counts: Vec<u64>,
}

impl Fingerprint {
    pub fn new(counts: Vec<u64>) -> Self {
        Fingerprint { counts }
    }

    /// Fingerprint of a sample sequence over `[n]`.
    pub fn from_samples(n: usize, samples: &[usize]) -> Result<Self> {
        let mut counts = vec![0u64; n];
        for &s in samples {
            if s >= n {
                return Err(Error::InvalidParameter(format!("symbol {s} outside [0, {n})")));
            }
            counts[s] += 1;
        }
        Ok(Fingerprint { counts })
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// `U_N Q(Φ)`. Fails when fewer samples than the degree are available.
pub fn unbiased_estimate<C: Scalar>(q: &HomogeneousPolynomial<C>, f: &Fingerprint) -> Result<C> {
    if f.counts.len() != q.num_vars {
        return Err(Error::ShapeMismatch(format!(
            "fingerprint over {} symbols, polynomial in {} variables",
            f.counts.len(),
            q.num_vars
        )));
    }
    let n = f.total();
    if n < q.degree as u64 {
        return Err(Error::InsufficientSamples { degree: q.degree, samples: n });
    }
    let mut acc = C::zero();
    for (m, c) in &q.terms {
        let mut t = c.clone();
        for &(v, e) in m {
            t = t * falling::<C>(f.counts[v] as i64, e);
            if t.is_zero() {
                break;
            }
        }
        acc = acc + t;
    }
    Ok(acc / falling::<C>(n as i64, q.degree as u32))
}

/// Exact moments of `U_N Q` under `N` i.i.d. samples from `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentReport<C> {
    /// `Q(p)`.
    pub value: C,
    pub expected_square: C,
    pub variance: C,
    pub variance_bound: C,
    /// `T_h` for `h = 0..=d`; they sum to `expected_square`.
    pub terms: Vec<C>,
}

/// All multi-indices `s ≤ α` over the monomials of `q`, each with
/// `p^s (∂^s Q(p))² / Π s_i!`.
fn derivative_table<C: Scalar>(q: &HomogeneousPolynomial<C>, p: &[C]) -> Vec<(usize, C, C)> {
    let mut subs: BTreeSet<Monomial> = BTreeSet::new();
    for m in q.terms.keys() {
        let mut stack: Vec<Monomial> = vec![Vec::new()];
        for &(v, e) in m {
            let mut next = Vec::with_capacity(stack.len() * (e as usize + 1));
            for s in &stack {
                for k in 0..=e {
                    let mut t = s.clone();
                    if k > 0 {
                        t.push((v, k));
                    }
                    next.push(t);
                }
            }
            stack = next;
        }
        subs.extend(stack);
    }
    subs.into_iter()
        .map(|s| {
            let h = monomial_degree(&s);
            let d = q.partial_at(&s, p);
            let ps = eval_monomial(&s, p);
            let fact = s.iter().fold(C::one(), |acc, &(_, e)| acc * factorial::<C>(e));
            (h, ps * d.clone() * d.clone() / fact, d)
        })
        .collect()
}

fn check_moment_inputs<C: Scalar>(q: &HomogeneousPolynomial<C>, p: &[C], n: u64) -> Result<()> {
    if p.len() != q.num_vars {
        return Err(Error::ShapeMismatch(format!(
            "distribution over {} symbols, polynomial in {} variables",
            p.len(),
            q.num_vars
        )));
    }
    if n < q.degree as u64 {
        return Err(Error::InsufficientSamples { degree: q.degree, samples: n });
    }
    Ok(())
}

/// Closed-form second moment, variance and variance bound of `U_N Q` at `p`.
pub fn expected_square<C: Scalar>(
    q: &HomogeneousPolynomial<C>,
    p: &[C],
    n: u64,
) -> Result<MomentReport<C>> {
    check_moment_inputs(q, p, n)?;
    let d = q.degree;
    let n = n as i64;
    let falling_nd = falling::<C>(n, d as u32);
    let mut by_h = vec![C::zero(); d + 1];
    for (h, w, _) in derivative_table(q, p) {
        by_h[h] = by_h[h].clone() + w;
    }
    let terms: Vec<C> = by_h
        .iter()
        .enumerate()
        .map(|(h, w)| {
            let coef = falling::<C>(n - d as i64, (d - h) as u32) / falling_nd.clone();
            coef * w.clone()
        })
        .collect();
    let variance_bound = by_h
        .iter()
        .enumerate()
        .skip(1)
        .fold(C::zero(), |acc, (h, w)| acc + w.clone() / falling::<C>(n, h as u32));
    let value = q.evaluate(p);
    let expected_square = terms.iter().fold(C::zero(), |a, t| a + t.clone());
    let variance = expected_square.clone() - value.clone() * value.clone();
    Ok(MomentReport { value, expected_square, variance, variance_bound, terms })
}

/// Envelope `2^d Q⁺(p) max_{|s| ≥ g} |∂^s Q(p)| / (N)_g` on the tail
/// `Σ_{h ≥ g} T_h`.
pub fn tail_term_bound<C: Scalar>(q: &HomogeneousPolynomial<C>, p: &[C], n: u64, g: usize) -> Result<C> {
    check_moment_inputs(q, p, n)?;
    if g > q.degree {
        return Err(Error::InvalidParameter(format!("g = {g} exceeds degree {}", q.degree)));
    }
    let max_partial = derivative_table(q, p)
        .into_iter()
        .filter(|(h, _, _)| *h >= g)
        .map(|(_, _, d)| d.abs_val())
        .fold(C::zero(), |m, v| if v > m { v } else { m });
    let two_d = pow(&C::from_i64(2), q.degree as u32);
    Ok(two_d * q.positive_part().evaluate(p) * max_partial / falling::<C>(n as i64, g as u32))
}

/// `Σ_{ij} Δ_ij²` with `Δ_ij = X_ij X_{−i,−j} − X_{i,−j} X_{−i,j}`; on a
/// normalized table it equals `‖p − p_X ⊗ p_Y‖₂²`. Variable `i*l2 + j`
/// stands for cell `(i, j)`.
pub fn l2_diff_polynomial<C: Scalar>(l1: usize, l2: usize) -> Result<HomogeneousPolynomial<C>> {
    if l1 < 2 || l2 < 2 {
        return Err(Error::InvalidParameter(format!("need l1, l2 >= 2, got {l1}x{l2}")));
    }
    let nv = l1 * l2;
    let idx = |i: usize, j: usize| i * l2 + j;
    let linear = |cells: Vec<usize>| {
        let mut p = Polynomial::<C>::zero(nv);
        for c in cells {
            p.add_term(&[(c, 1)], C::one()).expect("in range");
        }
        p
    };
    let mut q = Polynomial::<C>::zero(nv);
    for i in 0..l1 {
        for j in 0..l2 {
            let x = linear(vec![idx(i, j)]);
            let not_both = linear(
                (0..l1)
                    .filter(|&a| a != i)
                    .flat_map(|a| (0..l2).filter(move |&b| b != j).map(move |b| idx(a, b)))
                    .collect(),
            );
            let row_rest = linear((0..l2).filter(|&b| b != j).map(|b| idx(i, b)).collect());
            let col_rest = linear((0..l1).filter(|&a| a != i).map(|a| idx(a, j)).collect());
            let delta = x.mul(&not_both).add(&row_rest.mul(&col_rest).scale(&-C::one()));
            q = q.add(&delta.mul(&delta));
        }
    }
    HomogeneousPolynomial::from_polynomial(&q, 4)
}

/// Unbiased estimator of `Σ_ij c_ij Δ_ij(p)²` from an `l1 × l2` table of
/// counts, in the count form
///
/// ```text
/// [(Φ_ij)_2 (Φ_{−i,−j})_2 + (Φ_{−i,j})_2 (Φ_{i,−j})_2 − 2 Φ_ij Φ_{−i,−j} Φ_{i,−j} Φ_{−i,j}] / (N)_4
/// ```
pub fn l2_estimator<C: Scalar>(counts: &[u64], l1: usize, l2: usize, weights: &[C]) -> Result<C> {
    if counts.len() != l1 * l2 || weights.len() != l1 * l2 {
        return Err(Error::ShapeMismatch(format!(
            "expected {} cells, got {} counts and {} weights",
            l1 * l2,
            counts.len(),
            weights.len()
        )));
    }
    let n: u64 = counts.iter().sum();
    if n < 4 {
        return Err(Error::InsufficientSamples { degree: 4, samples: n });
    }
    Ok(l2_sum(counts, l1, l2, weights) / falling::<C>(n as i64, 4))
}

/// The bracketed sum of [`l2_estimator`] without the `(N)_4` normalizer.
pub(crate) fn l2_sum<C: Scalar>(counts: &[u64], l1: usize, l2: usize, weights: &[C]) -> C {
    let n: i64 = counts.iter().sum::<u64>() as i64;
    let mut rows = vec![0i64; l1];
    let mut cols = vec![0i64; l2];
    for i in 0..l1 {
        for j in 0..l2 {
            let v = counts[i * l2 + j] as i64;
            rows[i] += v;
            cols[j] += v;
        }
    }
    let mut acc = C::zero();
    for i in 0..l1 {
        for j in 0..l2 {
            let a = counts[i * l2 + j] as i64;
            let b = n - rows[i] - cols[j] + a;
            let c = rows[i] - a;
            let e = cols[j] - a;
            let t = C::from_i64(a * (a - 1)) * C::from_i64(b * (b - 1))
                + C::from_i64(e * (e - 1)) * C::from_i64(c * (c - 1))
                - C::from_i64(2 * a * b) * C::from_i64(c * e);
            if !t.is_zero() {
                acc = acc + weights[i * l2 + j].clone() * t;
            }
        }
    }
    acc
}

/// Largest `n^N` the oracle will enumerate.
pub const ORACLE_BUDGET: u128 = 10_000_000;

/// Exact mean and variance of `stat(Φ)` over all ordered `N`-tuples drawn
/// from `p`.
pub fn oracle_moments_with<F>(p: &[BigRational], n: usize, mut stat: F) -> Result<(BigRational, BigRational)>
where
    F: FnMut(&Fingerprint) -> Result<BigRational>,
{
    let k = p.len();
    let outcomes = (k as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if outcomes > ORACLE_BUDGET {
        return Err(Error::EnumerationBudget(outcomes));
    }
    // multiplicity of each fingerprint among the ordered tuples
    let mut mult: BTreeMap<Vec<u64>, u64> = BTreeMap::new();
    let mut tuple = vec![0usize; n];
    let mut counts = vec![0u64; k];
    counts[0] = n as u64;
    if k == 0 {
        return Err(Error::InvalidParameter("empty support".into()));
    }
    loop {
        *mult.entry(counts.clone()).or_default() += 1;
        let mut pos = 0;
        loop {
            if pos == n {
                break;
            }
            counts[tuple[pos]] -= 1;
            tuple[pos] += 1;
            if tuple[pos] < k {
                counts[tuple[pos]] += 1;
                break;
            }
            tuple[pos] = 0;
            counts[0] += 1;
            pos += 1;
        }
        if pos == n {
            break;
        }
    }
    let mut mean = BigRational::zero();
    let mut second = BigRational::zero();
    for (c, m) in mult {
        let mut prob = BigRational::from_integer(m.into());
        for (pi, &ci) in p.iter().zip(&c) {
            prob *= pow(pi, ci as u32);
        }
        if prob.is_zero() {
            continue;
        }
        let v = stat(&Fingerprint::new(c))?;
        mean += &prob * &v;
        second += prob * &v * &v;
    }
    let var = second - &mean * &mean;
    Ok((mean, var))
}

/// Exact `(E[U_N Q], Var[U_N Q])` by enumeration.
pub fn oracle_moments(
    q: &HomogeneousPolynomial<BigRational>,
    p: &[BigRational],
    n: usize,
) -> Result<(BigRational, BigRational)> {
    if p.len() != q.num_vars {
        return Err(Error::ShapeMismatch(format!(
            "distribution over {} symbols, polynomial in {} variables",
            p.len(),
            q.num_vars
        )));
    }
    if n < q.degree {
        return Err(Error::InsufficientSamples { degree: q.degree, samples: n as u64 });
    }
    oracle_moments_with(p, n, |f| unbiased_estimate(q, f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rational;

    type Q = BigRational;

    fn r(a: i64, b: i64) -> Q {
        rational(a, b)
    }

    #[test]
    fn homogenize_examples() {
        let one = Polynomial::constant(2, r(1, 1));
        let h = homogenize(&one, 2).unwrap();
        assert_eq!(h.coefficient(&[(0, 2)]), r(1, 1));
        assert_eq!(h.coefficient(&[(0, 1), (1, 1)]), r(2, 1));
        assert_eq!(h.coefficient(&[(1, 2)]), r(1, 1));
        assert_eq!(h.len(), 3);

        let x1 = Polynomial::<Q>::var(2, 0).unwrap();
        let h = homogenize(&x1, 2).unwrap();
        assert_eq!(h.coefficient(&[(0, 2)]), r(1, 1));
        assert_eq!(h.coefficient(&[(0, 1), (1, 1)]), r(1, 1));
        assert_eq!(h.len(), 2);

        let sq = x1.mul(&x1);
        assert_eq!(homogenize(&sq, 2).unwrap().to_polynomial(), sq);
        assert_eq!(homogenize(&sq, 1), Err(Error::DegreeTooHigh { found: 2, target: 1 }));
    }

    #[test]
    fn estimate_examples() {
        let x1 = HomogeneousPolynomial::from_terms(2, 1, [(vec![(0, 1)], r(1, 1))]).unwrap();
        assert_eq!(unbiased_estimate(&x1, &Fingerprint::new(vec![3, 5])).unwrap(), r(3, 8));

        let ps = HomogeneousPolynomial::from_polynomial(&Polynomial::<Q>::power_sum(3, 3), 3).unwrap();
        for c in [vec![3, 0, 0], vec![1, 2, 4], vec![0, 5, 1]] {
            assert_eq!(unbiased_estimate(&ps, &Fingerprint::new(c)).unwrap(), r(1, 1));
        }

        let x1x2 = HomogeneousPolynomial::from_terms(2, 2, [(vec![(0, 1), (1, 1)], r(1, 1))]).unwrap();
        assert_eq!(unbiased_estimate(&x1x2, &Fingerprint::new(vec![2, 1])).unwrap(), r(1, 3));
        let (mean, _) = oracle_moments(&x1x2, &[r(1, 3), r(2, 3)], 3).unwrap();
        assert_eq!(mean, r(2, 9));

        assert_eq!(
            unbiased_estimate(&x1x2, &Fingerprint::new(vec![1, 0])),
            Err(Error::InsufficientSamples { degree: 2, samples: 1 })
        );
    }

    #[test]
    fn expected_square_examples() {
        let ps = HomogeneousPolynomial::from_polynomial(&Polynomial::<Q>::power_sum(2, 3), 3).unwrap();
        let rep = expected_square(&ps, &[r(1, 4), r(3, 4)], 5).unwrap();
        assert_eq!(rep.expected_square, r(1, 1));
        assert_eq!(rep.variance, r(0, 1));

        let x1 = HomogeneousPolynomial::from_terms(2, 1, [(vec![(0, 1)], r(1, 1))]).unwrap();
        let rep = expected_square(&x1, &[r(1, 2), r(1, 2)], 4).unwrap();
        assert_eq!(rep.expected_square, r(5, 16));
        assert_eq!(rep.variance, r(1, 16));
        assert!(rep.variance <= rep.variance_bound);
    }

    #[test]
    fn l2_polynomial_on_uniform_matches_oracle() {
        let q = l2_diff_polynomial::<Q>(2, 2).unwrap();
        let p = vec![r(1, 4); 4];
        let rep = expected_square(&q, &p, 4).unwrap();
        let (mean, var) = oracle_moments(&q, &p, 4).unwrap();
        assert_eq!(mean, rep.value);
        assert_eq!(var, rep.variance);
    }

    #[test]
    fn l2_polynomial_values() {
        let q = l2_diff_polynomial::<Q>(2, 2).unwrap();
        let y1 = [r(16, 100), r(24, 100), r(24, 100), r(36, 100)];
        assert_eq!(q.evaluate(&y1), r(0, 1));
        let n1 = [r(6, 100), r(24, 100), r(24, 100), r(46, 100)];
        assert_eq!(q.evaluate(&n1), r(36, 10000));
    }

    #[test]
    fn l2_estimator_examples() {
        let w = vec![1.0; 4];
        assert!((l2_estimator(&[1, 1, 1, 1], 2, 2, &w).unwrap() + 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(l2_estimator(&[4, 0, 0, 0], 2, 2, &w).unwrap(), 0.0);
        assert!(l2_estimator(&[1, 1, 1, 0], 2, 2, &w).is_err());

        let p = vec![r(1, 4); 4];
        let ones = vec![r(1, 1); 4];
        let (mean, _) =
            oracle_moments_with(&p, 4, |f| l2_estimator(f.counts(), 2, 2, &ones)).unwrap();
        assert_eq!(mean, r(0, 1));
    }

    #[test]
    fn specialized_matches_generic_estimator() {
        let q = l2_diff_polynomial::<Q>(3, 2).unwrap();
        let ones = vec![r(1, 1); 6];
        for c in [vec![1, 2, 0, 3, 1, 1], vec![4, 0, 0, 0, 0, 1], vec![2, 2, 2, 2, 2, 2]] {
            let f = Fingerprint::new(c.clone());
            assert_eq!(unbiased_estimate(&q, &f).unwrap(), l2_estimator(&c, 3, 2, &ones).unwrap());
        }
    }

    #[test]
    fn point_estimators_form_a_basis_at_n_equals_d() {
        // at N = d the estimator of X^α is C(d, α)⁻¹ 1{Φ = α}
        let d = 3u32;
        let monos: Vec<Monomial> = (0..=d)
            .flat_map(|a| (0..=d - a).map(move |b| canonical(&[(0, a), (1, b), (2, d - a - b)])))
            .collect();
        for m in &monos {
            let q = HomogeneousPolynomial::from_terms(3, d as usize, [(m.clone(), r(1, 1))]).unwrap();
            for other in &monos {
                let mut counts = vec![0u64; 3];
                for &(v, e) in other {
                    counts[v] = e as u64;
                }
                let est = unbiased_estimate(&q, &Fingerprint::new(counts)).unwrap();
                if other == m {
                    let multinom = m.iter().fold(r(6, 1), |acc, &(_, e)| acc / factorial::<Q>(e));
                    assert_eq!(est, r(1, 1) / multinom);
                } else {
                    assert!(est.is_zero());
                }
            }
        }
    }

    #[test]
    fn tail_bound_covers_tail() {
        let q = l2_diff_polynomial::<Q>(2, 2).unwrap();
        let p = vec![r(1, 4); 4];
        for n in 4..=6u64 {
            let rep = expected_square(&q, &p, n).unwrap();
            for g in 0..=4 {
                let tail = rep.terms[g..].iter().fold(r(0, 1), |a, t| a + t);
                assert!(tail_term_bound(&q, &p, n, g).unwrap() >= tail);
            }
        }
    }

    #[test]
    fn oracle_budget() {
        let q = HomogeneousPolynomial::from_terms(10, 1, [(vec![(0, 1)], r(1, 1))]).unwrap();
        let p = vec![r(1, 10); 10];
        assert!(matches!(oracle_moments(&q, &p, 8), Err(Error::EnumerationBudget(_))));
    }
}
