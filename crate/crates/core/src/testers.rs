//! Conditional-independence testers.
//!
//! * [`test_binary`]: for small constant `ℓ₁, ℓ₂`, `A = Σ_z σ_z Φ(S_z) 1{σ_z ≥ 4}`
//!   with `Φ` the unit-weight ℓ₂ estimator.
//! * [`test_general`]: per bin, flatten rows and columns with a prefix of the
//!   bin's samples, then estimate the rescaled ℓ₂ statistic on the next
//!   `2t + 4` samples and weight it by `σ_z ω_z`.
//! * [`test_cmi`]: the binary tester run at `ε′ = c ε / log₂(1/ε)`.
//!
//! Every tester accepts iff `A ≤ τ`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::{poissonized_bins, poissonized_cell_counts, JointDistribution, SampleSet};
use crate::error::{Error, Result};
use crate::flatten::implicit_flattening;
use crate::poly::l2_sum;
use crate::rng::rng_from_seed;
use crate::scalar::falling;

/// Largest `ℓ₁`, `ℓ₂` accepted by the binary tester.
pub const BINARY_MAX_SIDE: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Binary,
    General,
    Cmi,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "binary" => Ok(Mode::Binary),
            "general" => Ok(Mode::General),
            "cmi" => Ok(Mode::Cmi),
            other => Err(Error::InvalidParameter(format!("unknown mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TesterConfig {
    pub epsilon: f64,
    pub beta: f64,
    pub zeta: f64,
    pub m_override: Option<u64>,
    pub tau_override: Option<f64>,
    pub seed: u64,
    pub mode: Mode,
    pub cmi_constant: f64,
}

impl TesterConfig {
    pub fn new(mode: Mode, epsilon: f64) -> Self {
        TesterConfig {
            epsilon,
            beta: 2.0,
            zeta: 2.0,
            m_override: None,
            tau_override: None,
            seed: 0,
            mode,
            cmi_constant: 1.0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_m(mut self, m: u64) -> Self {
        self.m_override = Some(m);
        self
    }

    pub fn with_tau(mut self, tau: f64) -> Self {
        self.tau_override = Some(tau);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return Err(Error::InvalidParameter(format!("epsilon {} outside (0, 1]", self.epsilon)));
        }
        if !(self.beta > 0.0 && self.zeta > 0.0 && self.cmi_constant > 0.0) {
            return Err(Error::InvalidParameter("beta, zeta and the cmi constant must be positive".into()));
        }
        if let Some(t) = self.tau_override {
            if t.is_nan() {
                return Err(Error::InvalidParameter("tau is NaN".into()));
            }
        }
        Ok(())
    }
}

/// What a tester reads samples from.
#[derive(Debug, Clone, Copy)]
pub enum TesterInput<'a> {
    /// Draw a Poissonized sample from the distribution.
    Distribution(&'a JointDistribution),
    /// Use a prefix of a fixed sample; no Poissonization.
    Samples(&'a SampleSet),
}

impl TesterInput<'_> {
    fn dims(&self) -> crate::dist::Dims {
        match self {
            TesterInput::Distribution(p) => p.dims(),
            TesterInput::Samples(s) => s.dims(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinDiagnostic {
    pub z: usize,
    /// `|S_z|` before any trimming.
    pub count: u64,
    pub sigma: u64,
    pub omega: f64,
    pub a_z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub accept: bool,
    pub statistic_a: f64,
    pub threshold_tau: f64,
    pub m_used: u64,
    pub samples_drawn: u64,
    /// Bins with at least four samples, in increasing `z`.
    pub per_bin: Vec<BinDiagnostic>,
}

impl Verdict {
    fn new(a: f64, tau: f64, m: u64, drawn: u64, per_bin: Vec<BinDiagnostic>) -> Self {
        Verdict { accept: a <= tau, statistic_a: a, threshold_tau: tau, m_used: m, samples_drawn: drawn, per_bin }
    }
}

fn ceil_u64(v: f64) -> u64 {
    if v >= u64::MAX as f64 {
        u64::MAX
    } else {
        v.ceil() as u64
    }
}

/// `β max(√n/ε′², min(n^{7/8}/ε′, n^{6/7}/ε′^{8/7}))`, unrounded.
pub fn binary_rate(n: usize, eps_prime: f64, beta: f64) -> f64 {
    let n = n as f64;
    let e = eps_prime;
    beta * (n.sqrt() / (e * e)).max((n.powf(7.0 / 8.0) / e).min(n.powf(6.0 / 7.0) / e.powf(8.0 / 7.0)))
}

/// Sample budget of the binary tester for `ℓ₁ = ℓ₂ = 2` (`ε′ = ε/2`).
pub fn sample_complexity_binary(n: usize, epsilon: f64, beta: f64) -> u64 {
    ceil_u64(binary_rate(n, epsilon / 2.0, beta))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneralComplexity {
    pub full: u64,
    pub simplified: u64,
}

/// Sample budget of the general tester, in full and simplified form.
pub fn sample_complexity_general(n: usize, l1: usize, l2: usize, epsilon: f64, zeta: f64) -> GeneralComplexity {
    let (l1, l2) = if l1 >= l2 { (l1, l2) } else { (l2, l1) };
    let (n, a, b, e) = (n as f64, l1 as f64, l2 as f64, epsilon);
    let min = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
    let t1 = min(&[
        n.powf(7.0 / 8.0) * a.powf(0.25) * b.powf(0.25) / e,
        n.powf(6.0 / 7.0) * a.powf(2.0 / 7.0) * b.powf(2.0 / 7.0) / e.powf(8.0 / 7.0),
        n * a.sqrt() * b.sqrt() / e,
    ]);
    let t2 = min(&[
        n.powf(0.75) * a.sqrt() * b.sqrt() / e,
        a * a * b * b / e.powi(4),
        n * a.sqrt() * b.powf(1.5) / e,
    ]);
    let t3 = min(&[
        n.powf(2.0 / 3.0) * a.powf(2.0 / 3.0) * b.powf(1.0 / 3.0) / e.powf(4.0 / 3.0),
        a * b / e.powi(4),
        n.sqrt() * a * b.sqrt() / (e * e),
        n * a.powf(1.5) * b.sqrt() / e,
    ]);
    let t4 = min(&[(n * a * b).sqrt() / (e * e), a * b / e.powi(4)]);
    let full = zeta * t1.max(t2).max(t3).max(t4);
    let s1 = (n.powf(7.0 / 8.0) * (a * b).powf(0.25) / e).min(n.powf(6.0 / 7.0) * (a * b).powf(2.0 / 7.0) / e.powf(8.0 / 7.0));
    let simplified = zeta
        * s1.max(n.powf(0.75) * (a * b).sqrt() / e)
            .max(n.powf(2.0 / 3.0) * a.powf(2.0 / 3.0) * b.powf(1.0 / 3.0) / e.powf(4.0 / 3.0))
            .max((n * a * b).sqrt() / (e * e));
    GeneralComplexity { full: ceil_u64(full), simplified: ceil_u64(simplified) }
}

fn binary_m(dims: crate::dist::Dims, cfg: &TesterConfig) -> u64 {
    let eps_prime = cfg.epsilon / ((dims.l1 * dims.l2) as f64).sqrt();
    cfg.m_override.unwrap_or_else(|| ceil_u64(binary_rate(dims.n, eps_prime, cfg.beta)))
}

fn fixed_prefix(s: &SampleSet, m_override: Option<u64>) -> Result<u64> {
    match m_override {
        Some(m) if m > s.len() as u64 => Err(Error::InvalidParameter(format!(
            "requested {m} samples but the sample set holds {}",
            s.len()
        ))),
        Some(m) => Ok(m),
        None => Ok(s.len() as u64),
    }
}

/// `x·(x−1)(x−2)(x−3)` as `f64`.
fn falling4(x: u64) -> f64 {
    falling::<f64>(x as i64, 4)
}

/// `E[σ 1{σ ≥ 4}]` for `σ ~ Poisson(α)`.
pub fn truncated_poisson_mean(alpha: f64) -> f64 {
    (alpha - (-alpha).exp() * (alpha + alpha * alpha + alpha.powi(3) / 2.0)).max(0.0)
}

/// Exact `E[A]` of the binary tester under Poissonization with rate `m`:
/// `Σ_z ‖p_z − q_z‖₂² E[σ_z 1{σ_z ≥ 4}]`.
pub fn expected_statistic_binary(p: &JointDistribution, m: f64) -> f64 {
    p.slices()
        .map(|s| {
            let (l1, l2) = s.shape();
            let d2: f64 = (0..l1)
                .flat_map(|x| (0..l2).map(move |y| (x, y)))
                .map(|(x, y)| (s.get(x, y) - s.row_marginal()[x] * s.col_marginal()[y]).powi(2))
                .sum();
            d2 * truncated_poisson_mean(m * s.weight())
        })
        .sum()
}

fn tau_for(cfg: &TesterConfig, n: usize, m: u64, scale: f64) -> f64 {
    cfg.tau_override.unwrap_or_else(|| scale * (n.min(m as usize) as f64).sqrt())
}

pub fn test_binary(input: TesterInput<'_>, cfg: &TesterConfig) -> Result<Verdict> {
    cfg.validate()?;
    let dims = input.dims();
    if dims.l1 < 2 || dims.l2 < 2 || dims.l1 > BINARY_MAX_SIDE || dims.l2 > BINARY_MAX_SIDE {
        return Err(Error::InvalidParameter(format!(
            "binary tester needs 2 <= l1, l2 <= {BINARY_MAX_SIDE}, got {}x{}",
            dims.l1, dims.l2
        )));
    }
    let per = dims.cells_per_bin();
    let m = binary_m(dims, cfg);
    let (counts, drawn) = match input {
        TesterInput::Distribution(p) => {
            let mut rng = rng_from_seed(cfg.seed);
            let c = poissonized_cell_counts(p, m as f64, &mut rng)?;
            let drawn = c.iter().sum();
            (c, drawn)
        }
        TesterInput::Samples(s) => {
            let take = fixed_prefix(s, cfg.m_override)?;
            let mut c = vec![0u64; dims.len()];
            for t in &s.triples()[..take as usize] {
                c[dims.index(t.x, t.y, t.z)] += 1;
            }
            (c, take)
        }
    };
    let ones = vec![1.0f64; per];
    let mut a = 0.0;
    let mut per_bin = Vec::new();
    for (z, bin) in counts.chunks(per).enumerate() {
        let sigma: u64 = bin.iter().sum();
        if sigma < 4 {
            continue;
        }
        let phi = l2_sum(bin, dims.l1, dims.l2, &ones) / falling4(sigma);
        let a_z = sigma as f64 * phi;
        a += a_z;
        per_bin.push(BinDiagnostic { z, count: sigma, sigma, omega: 1.0, a_z });
    }
    Ok(Verdict::new(a, tau_for(cfg, dims.n, m, cfg.zeta), m, drawn, per_bin))
}

/// The general tester's per-bin pipeline on an ordered sample of one bin.
/// Returns `(σ_z, ω_z, A_z)`, or `None` when the bin has fewer than four
/// samples.
pub fn general_bin_statistic(samples: &[(usize, usize)], l1: usize, l2: usize) -> Result<Option<(u64, f64, f64)>> {
    let len = samples.len();
    if len < 4 {
        return Ok(None);
    }
    let t = (len - 4) / 4;
    let (t1, t2) = (t.min(l1), t.min(l2));
    let coeffs = implicit_flattening(&samples[..t1 + t2], l1, l2, t1, t2)?;
    let sigma = 2 * t + 4;
    let mut counts = vec![0u64; l1 * l2];
    for &(x, y) in &samples[t1 + t2..t1 + t2 + sigma] {
        if x >= l1 || y >= l2 {
            return Err(Error::InvalidParameter(format!("sample ({x}, {y}) outside {l1}x{l2}")));
        }
        counts[x * l2 + y] += 1;
    }
    let weights = coeffs.weights::<f64>();
    let phi = l2_sum(&counts, l1, l2, &weights) / falling4(sigma as u64);
    let omega = ((sigma.min(l1) * sigma.min(l2)) as f64).sqrt();
    Ok(Some((sigma as u64, omega, sigma as f64 * omega * phi)))
}

pub fn test_general(input: TesterInput<'_>, cfg: &TesterConfig) -> Result<Verdict> {
    cfg.validate()?;
    let dims = input.dims();
    let m = cfg
        .m_override
        .unwrap_or_else(|| sample_complexity_general(dims.n, dims.l1, dims.l2, cfg.epsilon, cfg.zeta).full);
    let (bins, drawn) = match input {
        TesterInput::Distribution(p) => {
            let mut rng = rng_from_seed(cfg.seed);
            let b = poissonized_bins(p, m as f64, &mut rng)?;
            let drawn = b.iter().map(|v| v.len() as u64).sum();
            (b, drawn)
        }
        TesterInput::Samples(s) => {
            let take = fixed_prefix(s, cfg.m_override)?;
            (s.bins(take as usize), take)
        }
    };
    let mut a = 0.0;
    let mut per_bin = Vec::new();
    for (z, bin) in bins.iter().enumerate() {
        if let Some((sigma, omega, a_z)) = general_bin_statistic(bin, dims.l1, dims.l2)? {
            a += a_z;
            per_bin.push(BinDiagnostic { z, count: bin.len() as u64, sigma, omega, a_z });
        }
    }
    Ok(Verdict::new(a, tau_for(cfg, dims.n, m, cfg.zeta.powf(0.25)), m, drawn, per_bin))
}

/// `ε′ = c ε / log₂(1/ε)`, capped at 1.
pub fn cmi_epsilon_prime(epsilon: f64, c: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::InvalidParameter(format!("cmi epsilon {epsilon} outside (0, 1/2)")));
    }
    Ok((c * epsilon / (1.0 / epsilon).log2()).min(1.0))
}

/// Distinguishes `I(X;Y|Z) = 0` from `I(X;Y|Z) ≥ ε` by running the binary
/// tester at the matching TV parameter.
pub fn test_cmi(input: TesterInput<'_>, epsilon: f64, cfg: &TesterConfig) -> Result<Verdict> {
    let eps_prime = cmi_epsilon_prime(epsilon, cfg.cmi_constant)?;
    let inner = TesterConfig { epsilon: eps_prime, mode: Mode::Binary, ..cfg.clone() };
    test_binary(input, &inner)
}

/// Dispatches on `cfg.mode`; in CMI mode `cfg.epsilon` is the CMI gap.
pub fn run_tester(input: TesterInput<'_>, cfg: &TesterConfig) -> Result<Verdict> {
    match cfg.mode {
        Mode::Binary => test_binary(input, cfg),
        Mode::General => test_general(input, cfg),
        Mode::Cmi => test_cmi(input, cfg.epsilon, cfg),
    }
}

/// Default fraction of null trials allowed above the calibrated threshold.
pub const DEFAULT_EXCEED_FRACTION: f64 = 1.0 / 6.0;

/// Smallest threshold such that at most `⌊T·frac⌋` of the `T` null
/// statistics exceed it, clamped to stay positive. `null_stat(i)` must
/// return the statistic of independent null trial `i`.
pub fn calibrate_threshold<F>(null_stat: F, trials: usize, max_exceed_fraction: f64) -> Result<f64>
where
    F: Fn(u64) -> Result<f64> + Sync,
{
    if trials < 100 {
        return Err(Error::InvalidParameter(format!("calibration needs >= 100 trials, got {trials}")));
    }
    if !(0.0..1.0).contains(&max_exceed_fraction) {
        return Err(Error::InvalidParameter(format!("exceed fraction {max_exceed_fraction} outside [0, 1)")));
    }
    let mut stats = (0..trials as u64).into_par_iter().map(&null_stat).collect::<Result<Vec<f64>>>()?;
    if stats.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("degenerate null generator: non-finite statistic".into()));
    }
    stats.sort_by(f64::total_cmp);
    let allowed = (trials as f64 * max_exceed_fraction).floor() as usize;
    Ok(stats[trials - 1 - allowed].max(f64::MIN_POSITIVE))
}
