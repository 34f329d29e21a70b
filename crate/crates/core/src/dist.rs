//! Joint distributions over `X × Y × Z`, their conditional slices, distances
//! to the conditional-independence property, conditional mutual information,
//! and seeded samplers.
//!
//! Mass is stored densely with `z` as the outermost axis, so the table of
//! bin `z` is the contiguous block `mass[z*l1*l2 .. (z+1)*l1*l2]` laid out
//! row-major in `(x, y)`.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand_distr::Poisson;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{rng_from_seed, Rng};

/// Absolute tolerance on the total mass for a distribution to count as
/// normalized.
pub const NORMALIZATION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Dims {
    pub l1: usize,
    pub l2: usize,
    pub n: usize,
}

impl Dims {
    pub fn new(l1: usize, l2: usize, n: usize) -> Result<Self> {
        if l1 == 0 || l2 == 0 || n == 0 {
            return Err(Error::InvalidParameter(format!(
                "dimensions must be positive, got {l1}x{l2}x{n}"
            )));
        }
        Ok(Dims { l1, l2, n })
    }

    pub fn cells_per_bin(&self) -> usize {
        self.l1 * self.l2
    }

    pub fn len(&self) -> usize {
        self.l1 * self.l2 * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        (z * self.l1 + x) * self.l2 + y
    }

    /// Inverse of [`Dims::index`].
    #[inline]
    pub fn coords(&self, idx: usize) -> (usize, usize, usize) {
        let per = self.cells_per_bin();
        let z = idx / per;
        let r = idx % per;
        (r / self.l2, r % self.l2, z)
    }
}

/// One observation `(x, y, z)`, zero-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SampleTriple {
    pub x: usize,
    pub y: usize,
    pub z: usize,
}

/// A dense probability (or pseudo-probability) tensor over `X × Y × Z`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    dims: Dims,
    mass: Vec<f64>,
    bin_weights: Vec<f64>,
    total: f64,
    normalized: bool,
}

impl JointDistribution {
    /// Builds a distribution from a dense mass vector. Pseudo-distributions
    /// (total mass away from one) are accepted and flagged as such.
    pub fn new(dims: Dims, mass: Vec<f64>) -> Result<Self> {
        if mass.len() != dims.len() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} cells, got {}",
                dims.len(),
                mass.len()
            )));
        }
        if let Some(bad) = mass.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidDistribution(format!(
                "entries must be finite and non-negative, found {bad}"
            )));
        }
        let per = dims.cells_per_bin();
        let bin_weights: Vec<f64> = mass.chunks(per).map(|c| c.iter().sum()).collect();
        let total: f64 = bin_weights.iter().sum();
        Ok(JointDistribution {
            dims,
            mass,
            bin_weights,
            total,
            normalized: (total - 1.0).abs() <= NORMALIZATION_TOL,
        })
    }

    /// Builds `p(x, y, z) = weights[z] * tables[z][x*l2 + y]`.
    pub fn from_slices(dims: Dims, weights: &[f64], tables: &[Vec<f64>]) -> Result<Self> {
        if weights.len() != dims.n || tables.len() != dims.n {
            return Err(Error::ShapeMismatch(format!(
                "expected {} bins, got {} weights and {} tables",
                dims.n,
                weights.len(),
                tables.len()
            )));
        }
        let per = dims.cells_per_bin();
        let mut mass = Vec::with_capacity(dims.len());
        for (w, t) in weights.iter().zip(tables) {
            if t.len() != per {
                return Err(Error::ShapeMismatch(format!(
                    "slice table has {} cells, expected {per}",
                    t.len()
                )));
            }
            mass.extend(t.iter().map(|v| w * v));
        }
        Self::new(dims, mass)
    }

    pub fn uniform(dims: Dims) -> Self {
        let v = 1.0 / dims.len() as f64;
        Self::new(dims, vec![v; dims.len()]).expect("uniform is valid")
    }

    /// Divides by the total mass. Returns the rescaled distribution together
    /// with the original total so callers can report the distortion.
    pub fn normalize(&self) -> Result<(Self, f64)> {
        if self.total <= 0.0 {
            return Err(Error::InvalidDistribution("total mass is zero".into()));
        }
        let t = self.total;
        let mut out = Self::new(self.dims, self.mass.iter().map(|v| v / t).collect())?;
        // the rescaled mass is a probability distribution up to rounding
        out.normalized = (out.total - 1.0).abs() <= 1e-9;
        Ok((out, t))
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn prob(&self, x: usize, y: usize, z: usize) -> f64 {
        self.mass[self.dims.index(x, y, z)]
    }

    /// `p_Z(z)`.
    pub fn bin_weight(&self, z: usize) -> f64 {
        self.bin_weights[z]
    }

    pub fn bin_weights(&self) -> &[f64] {
        &self.bin_weights
    }

    pub fn total_mass(&self) -> f64 {
        self.total
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn bin_mass(&self, z: usize) -> &[f64] {
        let per = self.dims.cells_per_bin();
        &self.mass[z * per..(z + 1) * per]
    }

    /// The conditional slice `p_z`. Bins of zero weight get the uniform
    /// table.
    pub fn slice(&self, z: usize) -> ConditionalSlice {
        let w = self.bin_weights[z];
        let per = self.dims.cells_per_bin();
        let table = if w > 0.0 {
            self.bin_mass(z).iter().map(|v| v / w).collect()
        } else {
            vec![1.0 / per as f64; per]
        };
        ConditionalSlice::from_parts(w, self.dims.l1, self.dims.l2, table)
    }

    pub fn slices(&self) -> impl Iterator<Item = ConditionalSlice> + '_ {
        (0..self.dims.n).map(move |z| self.slice(z))
    }

    fn require_normalized(&self) -> Result<()> {
        if self.normalized {
            Ok(())
        } else {
            Err(Error::NotNormalized(self.total))
        }
    }
}

/// The conditional table `p_z` of one bin together with its weight `p_Z(z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalSlice {
    weight: f64,
    l1: usize,
    l2: usize,
    table: Vec<f64>,
    rows: Vec<f64>,
    cols: Vec<f64>,
}

impl ConditionalSlice {
    /// Validates that `table` is an `l1 × l2` probability table.
    pub fn new(weight: f64, l1: usize, l2: usize, table: Vec<f64>) -> Result<Self> {
        if table.len() != l1 * l2 {
            return Err(Error::ShapeMismatch(format!(
                "table has {} cells, expected {}x{}",
                table.len(),
                l1,
                l2
            )));
        }
        if !(0.0..=1.0).contains(&weight) {
            return Err(Error::InvalidDistribution(format!("weight {weight} outside [0, 1]")));
        }
        if table.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidDistribution("negative or non-finite table entry".into()));
        }
        let s: f64 = table.iter().sum();
        if (s - 1.0).abs() > 1e-9 {
            return Err(Error::NotNormalized(s));
        }
        Ok(Self::from_parts(weight, l1, l2, table))
    }

    pub(crate) fn from_parts(weight: f64, l1: usize, l2: usize, table: Vec<f64>) -> Self {
        let mut rows = vec![0.0; l1];
        let mut cols = vec![0.0; l2];
        for x in 0..l1 {
            for y in 0..l2 {
                let v = table[x * l2 + y];
                rows[x] += v;
                cols[y] += v;
            }
        }
        ConditionalSlice { weight, l1, l2, table, rows, cols }
    }

    /// Convenience for an `l1 × l2` table with weight one.
    pub fn from_table(l1: usize, l2: usize, table: Vec<f64>) -> Result<Self> {
        Self::new(1.0, l1, l2, table)
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.l1, self.l2)
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.table[x * self.l2 + y]
    }

    /// `p_{z,X}`.
    pub fn row_marginal(&self) -> &[f64] {
        &self.rows
    }

    /// `p_{z,Y}`.
    pub fn col_marginal(&self) -> &[f64] {
        &self.cols
    }

    /// Exact rank-one check: every cell equals the product of its marginals
    /// within `tol`.
    pub fn is_product(&self, tol: f64) -> bool {
        (0..self.l1).all(|x| {
            (0..self.l2).all(|y| (self.get(x, y) - self.rows[x] * self.cols[y]).abs() <= tol)
        })
    }
}

/// Total variation distance `½ Σ |p − q|`.
pub fn tv_distance(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::ShapeMismatch(format!("{} vs {} entries", p.len(), q.len())));
    }
    if p.iter().chain(q).any(|v| *v < 0.0) {
        return Err(Error::InvalidDistribution("negative entry".into()));
    }
    Ok(0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

/// `q_z = p_{z,X} ⊗ p_{z,Y}`, keeping the weight of `s`.
pub fn product_of_conditional_marginals(s: &ConditionalSlice) -> ConditionalSlice {
    let mut table = Vec::with_capacity(s.l1 * s.l2);
    for x in 0..s.l1 {
        for y in 0..s.l2 {
            table.push(s.rows[x] * s.cols[y]);
        }
    }
    ConditionalSlice::from_parts(s.weight, s.l1, s.l2, table)
}

/// The mixture `q(x, y, z) = p_Z(z) q_z(x, y)`, which is conditionally
/// independent and has the same `Z`-marginal as `p`.
pub fn mixture_q(p: &JointDistribution) -> JointDistribution {
    let dims = p.dims;
    let mut mass = Vec::with_capacity(dims.len());
    for z in 0..dims.n {
        let w = p.bin_weights[z];
        if w > 0.0 {
            let q = product_of_conditional_marginals(&p.slice(z));
            mass.extend(q.table.iter().map(|v| w * v));
        } else {
            mass.extend(std::iter::repeat_n(0.0, dims.cells_per_bin()));
        }
    }
    let mut q = JointDistribution::new(dims, mass).expect("mixture of valid slices");
    // p_Z is preserved exactly by construction
    q.bin_weights = p.bin_weights.clone();
    q.total = p.total;
    q.normalized = p.normalized;
    q
}

/// `d_TV(p, q)` for `q = mixture_q(p)`; sandwiches the distance to the
/// conditional-independence property within a factor of four.
pub fn ci_distance_proxy(p: &JointDistribution) -> f64 {
    let dims = p.dims;
    let mut acc = 0.0;
    for z in 0..dims.n {
        let w = p.bin_weights[z];
        if w <= 0.0 {
            continue;
        }
        let s = p.slice(z);
        for x in 0..dims.l1 {
            for y in 0..dims.l2 {
                acc += w * (s.get(x, y) - s.rows[x] * s.cols[y]).abs();
            }
        }
    }
    0.5 * acc
}

/// For a 2×2 slice, `2 |p00 p11 − p01 p10|`, which equals both the TV and
/// the ℓ₂ distance to the product of its marginals.
pub fn binary_slice_tv_via_covariance(s: &ConditionalSlice) -> Result<f64> {
    if s.shape() != (2, 2) {
        return Err(Error::ShapeMismatch(format!(
            "covariance identity needs a 2x2 slice, got {}x{}",
            s.l1, s.l2
        )));
    }
    Ok(2.0 * (s.get(0, 0) * s.get(1, 1) - s.get(0, 1) * s.get(1, 0)).abs())
}

/// `I(X; Y | Z)` in bits.
pub fn conditional_mutual_information(p: &JointDistribution) -> f64 {
    let dims = p.dims;
    let mut acc = 0.0;
    for z in 0..dims.n {
        let w = p.bin_weights[z];
        if w <= 0.0 {
            continue;
        }
        let s = p.slice(z);
        let mut kl = 0.0;
        for x in 0..dims.l1 {
            for y in 0..dims.l2 {
                let v = s.get(x, y);
                if v > 0.0 {
                    kl += v * (v / (s.rows[x] * s.cols[y])).log2();
                }
            }
        }
        acc += w * kl;
    }
    acc.max(0.0)
}

fn cell_sampler(p: &JointDistribution) -> Result<WeightedIndex<f64>> {
    WeightedIndex::new(p.mass.iter().copied())
        .map_err(|e| Error::InvalidDistribution(format!("cannot sample: {e}")))
}

/// `count` i.i.d. samples from a normalized `p`.
pub fn sample_fixed(p: &JointDistribution, count: usize, seed: u64) -> Result<Vec<SampleTriple>> {
    p.require_normalized()?;
    let mut rng = rng_from_seed(seed);
    draw_fixed(p, count, &mut rng)
}

pub(crate) fn draw_fixed(
    p: &JointDistribution,
    count: usize,
    rng: &mut Rng,
) -> Result<Vec<SampleTriple>> {
    if count == 0 {
        return Ok(Vec::new());
    }
    let sampler = cell_sampler(p)?;
    Ok((0..count)
        .map(|_| {
            let (x, y, z) = p.dims.coords(sampler.sample(rng));
            SampleTriple { x, y, z }
        })
        .collect())
}

pub(crate) fn poisson_draw(lambda: f64, rng: &mut Rng) -> Result<u64> {
    if lambda == 0.0 {
        return Ok(0);
    }
    let d = Poisson::new(lambda)
        .map_err(|e| Error::InvalidParameter(format!("poisson rate {lambda}: {e}")))?;
    Ok(d.sample(rng) as u64)
}

/// Draws `M ~ Poisson(m)` and then `M` i.i.d. samples from `p`.
pub fn sample_poissonized(p: &JointDistribution, m: f64, seed: u64) -> Result<Vec<SampleTriple>> {
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::InvalidParameter(format!("poisson rate must be positive, got {m}")));
    }
    p.require_normalized()?;
    let mut rng = rng_from_seed(seed);
    let count = poisson_draw(m, &mut rng)?;
    draw_fixed(p, count as usize, &mut rng)
}

/// Per-cell counts of a Poissonized sample: independent `Poisson(m p(x,y,z))`
/// draws, laid out like [`JointDistribution::mass`]. Distributionally the
/// same as counting the output of [`sample_poissonized`].
pub fn poissonized_cell_counts(p: &JointDistribution, m: f64, rng: &mut Rng) -> Result<Vec<u64>> {
    if !(m >= 0.0 && m.is_finite()) {
        return Err(Error::InvalidParameter(format!("poisson rate must be non-negative, got {m}")));
    }
    p.require_normalized()?;
    p.mass.iter().map(|&v| poisson_draw(m * v, rng)).collect()
}

/// A Poissonized sample grouped by bin, each bin's pairs in a uniformly
/// random order (the order of i.i.d. arrivals).
pub fn poissonized_bins(
    p: &JointDistribution,
    m: f64,
    rng: &mut Rng,
) -> Result<Vec<Vec<(usize, usize)>>> {
    let counts = poissonized_cell_counts(p, m, rng)?;
    let dims = p.dims;
    let per = dims.cells_per_bin();
    Ok(counts
        .chunks(per)
        .map(|bin| {
            let mut pairs = Vec::with_capacity(bin.iter().sum::<u64>() as usize);
            for (cell, &c) in bin.iter().enumerate() {
                for _ in 0..c {
                    pairs.push((cell / dims.l2, cell % dims.l2));
                }
            }
            pairs.shuffle(rng);
            pairs
        })
        .collect())
}

/// An observed sample with its domain.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    dims: Dims,
    triples: Vec<SampleTriple>,
}

impl SampleSet {
    pub fn new(dims: Dims, triples: Vec<SampleTriple>) -> Result<Self> {
        if let Some(t) = triples.iter().find(|t| t.x >= dims.l1 || t.y >= dims.l2 || t.z >= dims.n) {
            return Err(Error::InvalidParameter(format!(
                "sample ({}, {}, {}) outside domain {}x{}x{}",
                t.x, t.y, t.z, dims.l1, dims.l2, dims.n
            )));
        }
        Ok(SampleSet { dims, triples })
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn triples(&self) -> &[SampleTriple] {
        &self.triples
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    /// The first `count` samples grouped by bin, arrival order preserved.
    pub fn bins(&self, count: usize) -> Vec<Vec<(usize, usize)>> {
        let mut bins = vec![Vec::new(); self.dims.n];
        for t in self.triples.iter().take(count) {
            bins[t.z].push((t.x, t.y));
        }
        bins
    }
}
