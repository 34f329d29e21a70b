//! Split distributions and the implicit two-marginal flattening.
//!
//! Splitting element `i` into `a_i` equal pieces leaves every TV distance
//! unchanged while shrinking the ℓ₂ norm of heavy elements. For a bivariate
//! slice the general tester splits rows by `1 + b_x` and columns by
//! `1 + c_y`, so cell `(x, y)` is split into `1 + a_xy = (1 + b_x)(1 + c_y)`
//! pieces. The split domain is never materialised; only the factors are
//! kept.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitSpec {
    a: Vec<u64>,
}

impl SplitSpec {
    pub fn new(a: Vec<u64>) -> Result<Self> {
        if a.iter().any(|&v| v == 0) {
            return Err(Error::InvalidParameter("split multiplicities must be >= 1".into()));
        }
        Ok(SplitSpec { a })
    }

    /// `a_i = 1 + #{occurrences of i in S}`.
    pub fn from_multiset(n: usize, s: &[usize]) -> Result<Self> {
        let mut a = vec![1u64; n];
        for &i in s {
            if i >= n {
                return Err(Error::InvalidParameter(format!("element {i} outside [0, {n})")));
            }
            a[i] += 1;
        }
        Ok(SplitSpec { a })
    }

    pub fn multiplicities(&self) -> &[u64] {
        &self.a
    }

    /// Size of the split domain, `n + |S|`.
    pub fn split_len(&self) -> u64 {
        self.a.iter().sum()
    }
}

/// `p_S`: element `i` becomes `a_i` consecutive elements of mass `p_i / a_i`.
pub fn split_distribution<C: Scalar>(p: &[C], spec: &SplitSpec) -> Result<Vec<C>> {
    if p.len() != spec.a.len() {
        return Err(Error::ShapeMismatch(format!(
            "distribution over {} elements, split spec over {}",
            p.len(),
            spec.a.len()
        )));
    }
    let mut out = Vec::with_capacity(spec.split_len() as usize);
    for (pi, &ai) in p.iter().zip(&spec.a) {
        let piece = pi.clone() / C::from_i64(ai as i64);
        out.extend(std::iter::repeat_n(piece, ai as usize));
    }
    Ok(out)
}

/// Row and column split counts of one bin.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlatteningCoefficients {
    l1: usize,
    l2: usize,
    b: Vec<u64>,
    c: Vec<u64>,
}

impl FlatteningCoefficients {
    pub fn new(b: Vec<u64>, c: Vec<u64>) -> Self {
        FlatteningCoefficients { l1: b.len(), l2: c.len(), b, c }
    }

    /// No flattening: `a ≡ 0`.
    pub fn none(l1: usize, l2: usize) -> Self {
        Self::new(vec![0; l1], vec![0; l2])
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.l1, self.l2)
    }

    pub fn row_counts(&self) -> &[u64] {
        &self.b
    }

    pub fn col_counts(&self) -> &[u64] {
        &self.c
    }

    pub fn t1(&self) -> u64 {
        self.b.iter().sum()
    }

    pub fn t2(&self) -> u64 {
        self.c.iter().sum()
    }

    /// `a_xy = (1 + b_x)(1 + c_y) − 1`.
    pub fn a(&self, x: usize, y: usize) -> u64 {
        (1 + self.b[x]) * (1 + self.c[y]) - 1
    }

    /// Dense row-major `a` grid.
    pub fn grid(&self) -> Vec<u64> {
        (0..self.l1).flat_map(|x| (0..self.l2).map(move |y| self.a(x, y))).collect()
    }

    /// Estimator weights `1 / (1 + a_xy)`, row-major.
    pub fn weights<C: Scalar>(&self) -> Vec<C> {
        let mut w = Vec::with_capacity(self.l1 * self.l2);
        for x in 0..self.l1 {
            for y in 0..self.l2 {
                w.push(C::from_ratio(1, ((1 + self.b[x]) * (1 + self.c[y])) as i64));
            }
        }
        w
    }
}

/// Row counts from the first `t1` samples' `x`, column counts from the next
/// `t2` samples' `y`.
pub fn implicit_flattening(
    samples: &[(usize, usize)],
    l1: usize,
    l2: usize,
    t1: usize,
    t2: usize,
) -> Result<FlatteningCoefficients> {
    if samples.len() < t1 + t2 {
        return Err(Error::InvalidParameter(format!(
            "flattening needs {} samples, got {}",
            t1 + t2,
            samples.len()
        )));
    }
    let mut b = vec![0u64; l1];
    let mut c = vec![0u64; l2];
    for &(x, y) in &samples[..t1] {
        if x >= l1 || y >= l2 {
            return Err(Error::InvalidParameter(format!("sample ({x}, {y}) outside {l1}x{l2}")));
        }
        b[x] += 1;
    }
    for &(x, y) in &samples[t1..t1 + t2] {
        if x >= l1 || y >= l2 {
            return Err(Error::InvalidParameter(format!("sample ({x}, {y}) outside {l1}x{l2}")));
        }
        c[y] += 1;
    }
    Ok(FlatteningCoefficients::new(b, c))
}

/// `Σ_xy (p_xy − p_x p_y)² / (1 + a_xy)`, the squared ℓ₂ distance between
/// the split table and the product of its split marginals.
pub fn rescaled_l2_value<C: Scalar>(table: &[C], coeffs: &FlatteningCoefficients) -> Result<C> {
    let (l1, l2) = coeffs.shape();
    if table.len() != l1 * l2 {
        return Err(Error::ShapeMismatch(format!(
            "table has {} cells, coefficients are {l1}x{l2}",
            table.len()
        )));
    }
    let mut rows = vec![C::zero(); l1];
    let mut cols = vec![C::zero(); l2];
    for x in 0..l1 {
        for y in 0..l2 {
            rows[x] = rows[x].clone() + table[x * l2 + y].clone();
            cols[y] = cols[y].clone() + table[x * l2 + y].clone();
        }
    }
    let w = coeffs.weights::<C>();
    let mut acc = C::zero();
    for x in 0..l1 {
        for y in 0..l2 {
            let d = table[x * l2 + y].clone() - rows[x].clone() * cols[y].clone();
            acc = acc + d.clone() * d * w[x * l2 + y].clone();
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    use crate::scalar::rational;

    #[test]
    fn split_examples() {
        let p = vec![0.5, 0.5];
        assert_eq!(split_distribution(&p, &SplitSpec::from_multiset(2, &[]).unwrap()).unwrap(), p);
        let s = SplitSpec::from_multiset(2, &[0]).unwrap();
        assert_eq!(split_distribution(&p, &s).unwrap(), vec![0.25, 0.25, 0.5]);
        assert_eq!(s.split_len(), 3);
        assert!(SplitSpec::new(vec![1, 0]).is_err());
    }

    #[test]
    fn flattening_examples() {
        let f = implicit_flattening(&[], 3, 3, 0, 0).unwrap();
        assert!(f.grid().iter().all(|&a| a == 0));

        let f = implicit_flattening(&[(0, 0)], 3, 3, 1, 0).unwrap();
        assert_eq!(f.grid(), vec![1, 1, 1, 0, 0, 0, 0, 0, 0]);

        let f = implicit_flattening(&[(0, 0), (0, 0)], 3, 3, 1, 1).unwrap();
        assert_eq!(f.grid(), vec![3, 1, 1, 1, 0, 0, 1, 0, 0]);

        assert!(implicit_flattening(&[(0, 0)], 2, 2, 1, 1).is_err());
    }

    #[test]
    fn grid_identities() {
        let f = FlatteningCoefficients::new(vec![2, 0, 1], vec![1, 3]);
        let total: u64 = f.grid().iter().map(|a| 1 + a).sum();
        assert_eq!(total, (3 + f.t1()) * (2 + f.t2()));
        for x in 0..3 {
            for y in 0..2 {
                assert_eq!(1 + f.a(x, y), (1 + f.row_counts()[x]) * (1 + f.col_counts()[y]));
            }
        }
    }

    #[test]
    fn rescaled_examples() {
        let n1: Vec<BigRational> = [6, 24, 24, 46].iter().map(|&v| rational(v, 100)).collect();
        let none = FlatteningCoefficients::none(2, 2);
        assert_eq!(rescaled_l2_value(&n1, &none).unwrap(), rational(36, 10000));
        let a3 = FlatteningCoefficients::new(vec![1, 1], vec![1, 1]);
        assert!(a3.grid().iter().all(|&a| a == 3));
        assert_eq!(rescaled_l2_value(&n1, &a3).unwrap(), rational(9, 10000));

        let y1: Vec<BigRational> = [16, 24, 24, 36].iter().map(|&v| rational(v, 100)).collect();
        assert_eq!(rescaled_l2_value(&y1, &a3).unwrap(), rational(0, 1));
    }
}
