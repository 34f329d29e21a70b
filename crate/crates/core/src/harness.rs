//! Power experiments and empirical sample-complexity probes.
//!
//! Seeds: every random stream is `derive_seed(master, path)` with
//!
//! * instance draws: `[cell, trial, INSTANCE, NULL|ALT]`
//! * tester samples: `[cell, trial, SAMPLES, NULL|ALT]`
//! * calibration:    `[cell, trial, CALIBRATION]`
//!
//! where `cell` is the row index in grid order. Results are gathered in
//! trial order, so the output does not depend on thread scheduling.

use std::fmt::Write as _;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instances::{generate, EnsembleSpec, Family};
use crate::rng::{derive_seed, role};
use crate::testers::{
    calibrate_threshold, run_tester, sample_complexity_general, Mode, TesterConfig, TesterInput,
    DEFAULT_EXCEED_FRACTION,
};

pub const SCHEMA_VERSION: u32 = 1;
pub const MIN_TRIALS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TauRule {
    Calibrate,
    Formula,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum MSpec {
    Auto,
    List(Vec<u64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub mode: Mode,
    pub null: Family,
    pub alt: Family,
    pub n: Vec<usize>,
    pub eps: Vec<f64>,
    pub m: MSpec,
    pub l1: usize,
    pub l2: usize,
    pub trials: usize,
    pub calibration_trials: usize,
    pub seed: u64,
    pub tau: TauRule,
    /// Heavy-bin parameter of the binary ensembles as a fraction of `n`.
    pub ens_m_ratio: f64,
    pub beta: f64,
    pub zeta: f64,
    /// Upper bound on samples drawn per grid cell, `None` for unlimited.
    pub max_samples_per_cell: Option<u64>,
    pub wall_time: bool,
}

impl Default for ExperimentPlan {
    fn default() -> Self {
        ExperimentPlan {
            mode: Mode::Binary,
            null: Family::YesBinaryR1,
            alt: Family::NoBinaryR1,
            n: vec![100],
            eps: vec![0.5],
            m: MSpec::Auto,
            l1: 2,
            l2: 2,
            trials: 100,
            calibration_trials: 200,
            seed: 0,
            tau: TauRule::Calibrate,
            ens_m_ratio: 0.1,
            beta: 2.0,
            zeta: 2.0,
            max_samples_per_cell: None,
            wall_time: false,
        }
    }
}

fn plan_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn list<T: FromStr>(v: &str, line: usize, key: &str) -> Result<Vec<T>> {
    let out: std::result::Result<Vec<T>, _> = v.split(',').map(|t| t.trim().parse()).collect();
    match out {
        Ok(l) if !l.is_empty() => Ok(l),
        _ => Err(plan_err(line, format!("bad list for {key}: {v:?}"))),
    }
}

fn scalar<T: FromStr>(v: &str, line: usize, key: &str) -> Result<T> {
    v.parse().map_err(|_| plan_err(line, format!("bad value for {key}: {v:?}")))
}

impl ExperimentPlan {
    /// Parses the flat `key=value` plan format; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut p = ExperimentPlan::default();
        let mut seen_schema = false;
        for (i, raw) in text.lines().enumerate() {
            let ln = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| plan_err(ln, "expected key=value"))?;
            let (k, v) = (k.trim(), v.trim());
            match k {
                "schema_version" => {
                    let s: u32 = scalar(v, ln, k)?;
                    if s != SCHEMA_VERSION {
                        return Err(plan_err(ln, format!("unsupported schema_version {s}")));
                    }
                    seen_schema = true;
                }
                "mode" => p.mode = v.parse().map_err(|e: Error| plan_err(ln, e.to_string()))?,
                "null" => p.null = v.parse().map_err(|e: Error| plan_err(ln, e.to_string()))?,
                "alt" => p.alt = v.parse().map_err(|e: Error| plan_err(ln, e.to_string()))?,
                "n" => p.n = list(v, ln, k)?,
                "eps" => p.eps = list(v, ln, k)?,
                "m" => p.m = if v == "auto" { MSpec::Auto } else { MSpec::List(list(v, ln, k)?) },
                "l1" => p.l1 = scalar(v, ln, k)?,
                "l2" => p.l2 = scalar(v, ln, k)?,
                "trials" => p.trials = scalar(v, ln, k)?,
                "calibration_trials" => p.calibration_trials = scalar(v, ln, k)?,
                "seed" => p.seed = scalar(v, ln, k)?,
                "tau" => {
                    p.tau = match v {
                        "calibrate" => TauRule::Calibrate,
                        "formula" => TauRule::Formula,
                        t => TauRule::Fixed(scalar(t, ln, k)?),
                    }
                }
                "ens_m_ratio" => p.ens_m_ratio = scalar(v, ln, k)?,
                "beta" => p.beta = scalar(v, ln, k)?,
                "zeta" => p.zeta = scalar(v, ln, k)?,
                "max_samples_per_cell" => p.max_samples_per_cell = Some(scalar(v, ln, k)?),
                "wall_time" => p.wall_time = scalar(v, ln, k)?,
                other => return Err(plan_err(ln, format!("unknown key {other:?}"))),
            }
        }
        if !seen_schema {
            return Err(plan_err(0, "missing schema_version"));
        }
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(plan_err(0, m));
        if self.trials < MIN_TRIALS {
            return bad(format!("trials must be >= {MIN_TRIALS}"));
        }
        if self.n.is_empty() || self.eps.is_empty() {
            return bad("grid is empty".into());
        }
        if let MSpec::List(l) = &self.m {
            if l.is_empty() {
                return bad("grid is empty".into());
            }
        }
        if self.eps.iter().any(|&e| !(e > 0.0 && e <= 1.0)) {
            return bad("eps values must lie in (0, 1]".into());
        }
        if self.tau == TauRule::Calibrate && self.calibration_trials < 100 {
            return bad("calibration_trials must be >= 100".into());
        }
        if !(self.ens_m_ratio > 0.0 && self.ens_m_ratio < 1.0) {
            return bad("ens_m_ratio must lie in (0, 1)".into());
        }
        if self.n.contains(&0) || self.l1 == 0 || self.l2 == 0 {
            return bad("dimensions must be positive".into());
        }
        Ok(())
    }

    /// Grid cells `(n, eps, m)` in emission order: `n` outermost, then
    /// `eps`, then `m`.
    pub fn cells(&self) -> Vec<(usize, f64, Option<u64>)> {
        let ms: Vec<Option<u64>> = match &self.m {
            MSpec::Auto => vec![None],
            MSpec::List(l) => l.iter().map(|&m| Some(m)).collect(),
        };
        let mut out = Vec::new();
        for &n in &self.n {
            for &e in &self.eps {
                for &m in &ms {
                    out.push((n, e, m));
                }
            }
        }
        out
    }
}

/// Heavy-bin parameter for the binary ensembles at size `n`.
pub fn ensemble_m(n: usize, ratio: f64) -> f64 {
    (ratio * n as f64).floor().clamp(1.0, (n.max(2) - 1) as f64)
}

/// The tester's default sample budget for a cell.
pub fn auto_m(mode: Mode, n: usize, l1: usize, l2: usize, eps: f64, beta: f64, zeta: f64) -> u64 {
    let cfg = TesterConfig { beta, zeta, ..TesterConfig::new(mode, eps) };
    match mode {
        Mode::General => sample_complexity_general(n, l1, l2, eps, zeta).full,
        Mode::Binary | Mode::Cmi => {
            let e = if mode == Mode::Cmi {
                crate::testers::cmi_epsilon_prime(eps.min(0.49), cfg.cmi_constant).unwrap_or(eps)
            } else {
                eps
            };
            let eps_prime = e / ((l1 * l2) as f64).sqrt();
            crate::testers::binary_rate(n, eps_prime, beta).ceil() as u64
        }
    }
}

/// Everything needed to run trials of one `(family, n, eps, m)` setting.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialSetup {
    pub mode: Mode,
    pub n: usize,
    pub l1: usize,
    pub l2: usize,
    pub eps: f64,
    pub m: u64,
    pub ens_m: f64,
    pub beta: f64,
    pub zeta: f64,
}

impl TrialSetup {
    fn config(&self, seed: u64, tau: Option<f64>) -> TesterConfig {
        TesterConfig {
            beta: self.beta,
            zeta: self.zeta,
            m_override: Some(self.m),
            tau_override: tau,
            seed,
            ..TesterConfig::new(self.mode, self.eps)
        }
    }

    /// Draws an instance of `family` and runs the tester on it.
    pub fn run(&self, family: Family, instance_seed: u64, sample_seed: u64, tau: Option<f64>) -> Result<crate::testers::Verdict> {
        let spec = EnsembleSpec {
            family,
            n: self.n,
            m: self.ens_m,
            epsilon: self.eps,
            l1: self.l1,
            l2: self.l2,
            seed: instance_seed,
        };
        let inst = generate(&spec)?;
        let mut cfg = self.config(sample_seed, tau);
        if self.mode == Mode::Cmi {
            cfg.epsilon = self.eps.min(0.49);
        }
        run_tester(TesterInput::Distribution(&inst.dist), &cfg)
    }

    /// Statistic of null trial `trial` under stream `salt`.
    pub fn null_statistic(&self, family: Family, seed: u64, salt: &[u64], trial: u64) -> Result<f64> {
        let mut path = salt.to_vec();
        path.push(trial);
        let inst = derive_seed(seed, &[&path[..], &[role::INSTANCE]].concat());
        let samp = derive_seed(seed, &[&path[..], &[role::SAMPLES]].concat());
        Ok(self.run(family, inst, samp, None)?.statistic_a)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerRow {
    pub schema_version: u32,
    pub mode: Mode,
    pub null: Family,
    pub alt: Family,
    pub n: usize,
    pub l1: usize,
    pub l2: usize,
    pub eps: f64,
    pub m_used: u64,
    pub trials: usize,
    pub tau: f64,
    pub accept_rate_null: f64,
    pub reject_rate_alt: f64,
    pub mean_a_null: f64,
    pub mean_a_alt: f64,
    pub var_a_null: f64,
    pub skipped: bool,
    pub wall_time: Option<f64>,
}

fn mean_var(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = if v.len() > 1 { v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    (mean, var)
}

/// Trials that fit the sample budget, or `None` when fewer than
/// [`MIN_TRIALS`] fit. A trial costs `2m` samples plus its share of
/// calibration.
pub fn budgeted_trials(plan: &ExperimentPlan, m: u64) -> Option<usize> {
    let Some(budget) = plan.max_samples_per_cell else {
        return Some(plan.trials);
    };
    let calib = if plan.tau == TauRule::Calibrate { plan.calibration_trials as u64 * m } else { 0 };
    let per_trial = 2 * m.max(1);
    if budget < calib {
        return None;
    }
    let fit = ((budget - calib) / per_trial) as usize;
    let t = fit.min(plan.trials);
    (t >= MIN_TRIALS).then_some(t)
}

fn run_cell(plan: &ExperimentPlan, cell: usize, n: usize, eps: f64, m: Option<u64>) -> Result<PowerRow> {
    let start = Instant::now();
    let m_used = m.unwrap_or_else(|| auto_m(plan.mode, n, plan.l1, plan.l2, eps, plan.beta, plan.zeta));
    let setup = TrialSetup {
        mode: plan.mode,
        n,
        l1: plan.l1,
        l2: plan.l2,
        eps,
        m: m_used,
        ens_m: ensemble_m(n, plan.ens_m_ratio),
        beta: plan.beta,
        zeta: plan.zeta,
    };
    let mut row = PowerRow {
        schema_version: SCHEMA_VERSION,
        mode: plan.mode,
        null: plan.null,
        alt: plan.alt,
        n,
        l1: plan.l1,
        l2: plan.l2,
        eps,
        m_used,
        trials: 0,
        tau: f64::NAN,
        accept_rate_null: f64::NAN,
        reject_rate_alt: f64::NAN,
        mean_a_null: f64::NAN,
        mean_a_alt: f64::NAN,
        var_a_null: f64::NAN,
        skipped: true,
        wall_time: None,
    };
    let Some(trials) = budgeted_trials(plan, m_used) else {
        row.wall_time = plan.wall_time.then(|| start.elapsed().as_secs_f64());
        return Ok(row);
    };
    let cell_id = cell as u64;
    let tau = match plan.tau {
        TauRule::Fixed(t) => Some(t),
        TauRule::Formula => None,
        TauRule::Calibrate => Some(calibrate_threshold(
            |t| setup.null_statistic(plan.null, plan.seed, &[cell_id, role::CALIBRATION], t),
            plan.calibration_trials,
            DEFAULT_EXCEED_FRACTION,
        )?),
    };
    let outcomes = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let run = |fam: Family, r: u64| {
                setup.run(
                    fam,
                    derive_seed(plan.seed, &[cell_id, t, role::INSTANCE, r]),
                    derive_seed(plan.seed, &[cell_id, t, role::SAMPLES, r]),
                    tau,
                )
            };
            Ok((run(plan.null, role::NULL)?, run(plan.alt, role::ALT)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let null_a: Vec<f64> = outcomes.iter().map(|(v, _)| v.statistic_a).collect();
    let alt_a: Vec<f64> = outcomes.iter().map(|(_, v)| v.statistic_a).collect();
    let (mean_null, var_null) = mean_var(&null_a);
    let (mean_alt, _) = mean_var(&alt_a);
    row.trials = trials;
    row.tau = outcomes[0].0.threshold_tau;
    row.accept_rate_null = outcomes.iter().filter(|(v, _)| v.accept).count() as f64 / trials as f64;
    row.reject_rate_alt = outcomes.iter().filter(|(_, v)| !v.accept).count() as f64 / trials as f64;
    row.mean_a_null = mean_null;
    row.mean_a_alt = mean_alt;
    row.var_a_null = var_null;
    row.skipped = false;
    row.wall_time = plan.wall_time.then(|| start.elapsed().as_secs_f64());
    Ok(row)
}

/// One row per grid cell, in grid order.
pub fn run_power_experiment(plan: &ExperimentPlan) -> Result<Vec<PowerRow>> {
    plan.validate()?;
    plan.cells()
        .into_iter()
        .enumerate()
        .map(|(i, (n, eps, m))| run_cell(plan, i, n, eps, m))
        .collect()
}

fn fmt_f(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        format!("{v}")
    }
}

/// CSV with a fixed column order; `wall_time` is appended only when at
/// least one row carries it.
pub fn to_csv(rows: &[PowerRow]) -> String {
    let timed = rows.iter().any(|r| r.wall_time.is_some());
    let mut out = String::from(
        "schema_version,mode,null,alt,n,l1,l2,eps,m_used,trials,tau,accept_rate_null,reject_rate_alt,mean_a_null,mean_a_alt,var_a_null,skipped",
    );
    if timed {
        out.push_str(",wall_time");
    }
    out.push('\n');
    for r in rows {
        let mode = match r.mode {
            Mode::Binary => "binary",
            Mode::General => "general",
            Mode::Cmi => "cmi",
        };
        let _ = write!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.schema_version,
            mode,
            r.null,
            r.alt,
            r.n,
            r.l1,
            r.l2,
            r.eps,
            r.m_used,
            r.trials,
            fmt_f(r.tau),
            fmt_f(r.accept_rate_null),
            fmt_f(r.reject_rate_alt),
            fmt_f(r.mean_a_null),
            fmt_f(r.mean_a_alt),
            fmt_f(r.var_a_null),
            r.skipped
        );
        if timed {
            let _ = write!(out, ",{}", r.wall_time.map(fmt_f).unwrap_or_default());
        }
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinMOptions {
    pub mode: Mode,
    pub l1: usize,
    pub l2: usize,
    pub trials: usize,
    pub calibration_trials: usize,
    pub m_start: u64,
    pub m_max: u64,
    pub ens_m_ratio: f64,
    /// Bisection stops once `hi − lo ≤ rel_tol · hi`.
    pub rel_tol: f64,
}

impl Default for MinMOptions {
    fn default() -> Self {
        MinMOptions {
            mode: Mode::Binary,
            l1: 2,
            l2: 2,
            trials: 100,
            calibration_trials: 200,
            m_start: 64,
            m_max: 1 << 24,
            ens_m_ratio: 0.1,
            rel_tol: 0.05,
        }
    }
}

/// Outcome of evaluating one sample budget in [`find_min_m`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbePoint {
    pub m: u64,
    pub tau: f64,
    pub accept_rate_null: f64,
    pub reject_rate_alt: f64,
}

/// Null-accept and alt-reject rates at budget `m` with a threshold
/// calibrated so that at most `(1 − target)/2` of null trials exceed it.
/// Trials share seeds across `m`.
pub fn probe_m(
    n: usize,
    eps: f64,
    pair: (Family, Family),
    m: u64,
    target: f64,
    seed: u64,
    opts: &MinMOptions,
) -> Result<ProbePoint> {
    let setup = TrialSetup {
        mode: opts.mode,
        n,
        l1: opts.l1,
        l2: opts.l2,
        eps,
        m,
        ens_m: ensemble_m(n, opts.ens_m_ratio),
        beta: 1.0,
        zeta: 1.0,
    };
    let tau = calibrate_threshold(
        |t| setup.null_statistic(pair.0, seed, &[role::CALIBRATION], t),
        opts.calibration_trials,
        (1.0 - target) / 2.0,
    )?;
    let outcomes = (0..opts.trials as u64)
        .into_par_iter()
        .map(|t| {
            let run = |fam: Family, r: u64| {
                setup.run(
                    fam,
                    derive_seed(seed, &[t, role::INSTANCE, r]),
                    derive_seed(seed, &[t, role::SAMPLES, r]),
                    Some(tau),
                )
            };
            Ok((run(pair.0, role::NULL)?.accept, !run(pair.1, role::ALT)?.accept))
        })
        .collect::<Result<Vec<_>>>()?;
    let k = opts.trials as f64;
    Ok(ProbePoint {
        m,
        tau,
        accept_rate_null: outcomes.iter().filter(|o| o.0).count() as f64 / k,
        reject_rate_alt: outcomes.iter().filter(|o| o.1).count() as f64 / k,
    })
}

/// Smallest tested `m` at which both the null accept rate and the alt
/// reject rate reach `target`: doubling from `m_start`, then bisection.
pub fn find_min_m(
    n: usize,
    eps: f64,
    pair: (Family, Family),
    target: f64,
    seed: u64,
    opts: &MinMOptions,
) -> Result<u64> {
    if !(target > 0.5 && target < 0.95) {
        return Err(Error::InvalidParameter(format!("target power {target} outside (0.5, 0.95)")));
    }
    let ok = |m: u64| -> Result<bool> {
        let p = probe_m(n, eps, pair, m, target, seed, opts)?;
        Ok(p.accept_rate_null >= target && p.reject_rate_alt >= target)
    };
    let mut lo = 0u64;
    let mut hi = opts.m_start.max(1);
    loop {
        if hi > opts.m_max {
            return Err(Error::BudgetExhausted(format!(
                "no m <= {} reaches power {target} for {} vs {}",
                opts.m_max, pair.0, pair.1
            )));
        }
        if ok(hi)? {
            break;
        }
        lo = hi;
        hi *= 2;
    }
    while hi - lo > 1 && (hi - lo) as f64 > opts.rel_tol * hi as f64 {
        let mid = lo + (hi - lo) / 2;
        if ok(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    const PLAN: &str = "schema_version=1\nmode=binary\nnull=yes_binary_r1\nalt=no_binary_r1\nn=20,40\neps=0.5\nm=50\ntrials=50\ncalibration_trials=100\nseed=7\ntau=calibrate\n";

    #[test]
    fn plan_parsing() {
        let p = ExperimentPlan::parse(PLAN).unwrap();
        assert_eq!(p.n, vec![20, 40]);
        assert_eq!(p.cells().len(), 2);
        assert!(ExperimentPlan::parse("mode=binary\n").is_err());
        assert!(ExperimentPlan::parse(&PLAN.replace("trials=50", "trials=10")).is_err());
        assert!(ExperimentPlan::parse(&format!("{PLAN}bogus=1\n")).is_err());
        assert!(matches!(
            ExperimentPlan::parse(&PLAN.replace("null=yes_binary_r1", "null=nope")),
            Err(Error::Parse { line: 3, .. })
        ));
    }

    #[test]
    fn experiment_is_deterministic() {
        let p = ExperimentPlan::parse(PLAN).unwrap();
        let a = to_csv(&run_power_experiment(&p).unwrap());
        let b = to_csv(&run_power_experiment(&p).unwrap());
        assert_eq!(a, b);
        assert_eq!(a.lines().count(), 3);
    }

    #[test]
    fn zero_budget_accepts_everything() {
        let text = PLAN.replace("m=50", "m=0").replace("tau=calibrate", "tau=formula");
        let rows = run_power_experiment(&ExperimentPlan::parse(&text).unwrap()).unwrap();
        for r in rows {
            assert_eq!(r.accept_rate_null, 1.0);
            assert_eq!(r.reject_rate_alt, 0.0);
        }
    }

    #[test]
    fn budget_marks_cells_skipped() {
        let text = format!("{PLAN}max_samples_per_cell=100\n");
        let rows = run_power_experiment(&ExperimentPlan::parse(&text).unwrap()).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|r| r.skipped));
        assert!(to_csv(&rows).lines().nth(1).unwrap().ends_with(",true"));
    }

    #[test]
    fn ci_vs_ci_exhausts_budget() {
        let opts = MinMOptions { trials: 50, calibration_trials: 100, m_start: 64, m_max: 256, ..Default::default() };
        let r = find_min_m(40, 0.5, (Family::YesBinaryR1, Family::YesBinaryR1), 0.75, 1, &opts);
        assert!(matches!(r, Err(Error::BudgetExhausted(_))));
    }
}
