//! Two-sample permutation testing: a registry of statistics on the two
//! groups, exact p-values by enumerating group assignments, and Monte Carlo
//! p-values with the add-one correction.
//!
//! Exact mode enumerates the `C(m+n, m)` subsets of pooled positions
//! assigned to the first group rather than all `(m+n)!` permutations; the
//! two laws agree because every statistic depends only on the split.
//! Extremeness ties count as extreme, and the Monte Carlo p-value is
//! `(1 + #extreme) / (B + 1)`, which can never be zero.

use crate::error::{Error, Result};
use crate::perm::{binomial, random_permutation, Combinations};
use crate::rng::RngState;
use rayon::prelude::*;
use std::sync::Arc;

/// Signature of a user-supplied two-sample statistic.
pub type StatisticFn = dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync;

/// Default cap on the number of enumerated group assignments.
pub const EXACT_CAP: f64 = 1e6;

/// Two samples with their pooled values.
#[derive(Debug, Clone)]
pub struct TwoSampleData {
    x: Vec<f64>,
    y: Vec<f64>,
}

impl TwoSampleData {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.is_empty() || y.is_empty() {
            return Err(Error::InvalidSize("both groups must be nonempty".into()));
        }
        if x.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(Error::Data("non-finite observation".into()));
        }
        Ok(TwoSampleData { x, y })
    }

    pub fn m(&self) -> usize {
        self.x.len()
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn pooled(&self) -> Vec<f64> {
        let mut z = self.x.clone();
        z.extend_from_slice(&self.y);
        z
    }
}

/// A two-sample statistic, evaluated on (first group, second group).
#[derive(Clone)]
pub enum Statistic {
    /// `mean(x) - mean(y)`
    MeanDiff,
    /// `sqrt(mn/(m+n)) sup_t |F_x(t) - F_y(t)|`
    KsTwoSample,
    /// Rank sum of the first group in the pooled ordering (midranks on ties)
    Wilcoxon,
    /// `#\{(i, j): x_i < y_j\}` plus half-credit for ties
    MannWhitney,
    /// A user-supplied statistic addressable by name.
    Custom {
        id: &'static str,
        f: Arc<StatisticFn>,
    },
}

impl std::fmt::Debug for Statistic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.id())
    }
}

impl Statistic {
    pub fn id(&self) -> &'static str {
        match self {
            Statistic::MeanDiff => "mean_diff",
            Statistic::KsTwoSample => "ks_two_sample",
            Statistic::Wilcoxon => "wilcoxon",
            Statistic::MannWhitney => "mann_whitney",
            Statistic::Custom { id, .. } => id,
        }
    }

    /// Looks a statistic up by its registry id.
    pub fn from_id(id: &str) -> Result<Statistic> {
        match id {
            "mean_diff" => Ok(Statistic::MeanDiff),
            "ks_two_sample" => Ok(Statistic::KsTwoSample),
            "wilcoxon" => Ok(Statistic::Wilcoxon),
            "mann_whitney" => Ok(Statistic::MannWhitney),
            other => Err(Error::InvalidArguments(format!(
                "unknown statistic '{other}'; known: {:?}",
                registry_ids()
            ))),
        }
    }

    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        match self {
            Statistic::MeanDiff => {
                x.iter().sum::<f64>() / x.len() as f64 - y.iter().sum::<f64>() / y.len() as f64
            }
            Statistic::KsTwoSample => ks_two_sample(x, y),
            Statistic::Wilcoxon => wilcoxon_rank_sum(x, y),
            Statistic::MannWhitney => mann_whitney_u(x, y),
            Statistic::Custom { f, .. } => f(x, y),
        }
    }
}

/// The built-in statistic ids.
pub fn registry_ids() -> [&'static str; 4] {
    ["mean_diff", "ks_two_sample", "wilcoxon", "mann_whitney"]
}

fn ks_two_sample(x: &[f64], y: &[f64]) -> f64 {
    let mut xs = x.to_vec();
    let mut ys = y.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ys.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let (m, n) = (xs.len(), ys.len());
    let mut i = 0;
    let mut j = 0;
    let mut d = 0.0f64;
    while i < m || j < n {
        let t = match (xs.get(i), ys.get(j)) {
            (Some(&a), Some(&b)) => a.min(b),
            (Some(&a), None) => a,
            (None, Some(&b)) => b,
            (None, None) => break,
        };
        while i < m && xs[i] <= t {
            i += 1;
        }
        while j < n && ys[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / m as f64 - j as f64 / n as f64).abs());
    }
    let scale = (m * n) as f64 / (m + n) as f64;
    scale.sqrt() * d
}

/// Midranks of the pooled sample, then the sum over the first group.
fn wilcoxon_rank_sum(x: &[f64], y: &[f64]) -> f64 {
    let m = x.len();
    let mut pooled: Vec<(f64, usize)> = x
        .iter()
        .chain(y.iter())
        .cloned()
        .enumerate()
        .map(|(i, v)| (v, i))
        .collect();
    pooled.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let total = pooled.len();
    let mut rank_of = vec![0.0; total];
    let mut k = 0;
    while k < total {
        let mut k2 = k;
        while k2 + 1 < total && pooled[k2 + 1].0 == pooled[k].0 {
            k2 += 1;
        }
        let midrank = (k + k2 + 2) as f64 / 2.0; // ranks are 1-based
        for item in pooled.iter().take(k2 + 1).skip(k) {
            rank_of[item.1] = midrank;
        }
        k = k2 + 1;
    }
    rank_of[..m].iter().sum()
}

fn mann_whitney_u(x: &[f64], y: &[f64]) -> f64 {
    let mut u = 0.0;
    for &a in x {
        for &b in y {
            if a < b {
                u += 1.0;
            } else if a == b {
                u += 0.5;
            }
        }
    }
    u
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    TwoSided,
    Greater,
    Less,
}

impl Side {
    pub fn id(&self) -> &'static str {
        match self {
            Side::TwoSided => "two",
            Side::Greater => "greater",
            Side::Less => "less",
        }
    }

    pub fn from_id(id: &str) -> Result<Side> {
        match id {
            "two" | "two-sided" | "two_sided" => Ok(Side::TwoSided),
            "greater" => Ok(Side::Greater),
            "less" => Ok(Side::Less),
            other => Err(Error::InvalidArguments(format!(
                "unknown side '{other}' (two|greater|less)"
            ))),
        }
    }

    fn is_extreme(&self, resampled: f64, observed: f64) -> bool {
        match self {
            Side::TwoSided => resampled.abs() >= observed.abs() - 1e-12,
            Side::Greater => resampled >= observed - 1e-12,
            Side::Less => resampled <= observed + 1e-12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestMode {
    Exact,
    MonteCarlo,
}

impl TestMode {
    pub fn id(&self) -> &'static str {
        match self {
            TestMode::Exact => "exact",
            TestMode::MonteCarlo => "mc",
        }
    }
}

/// The outcome of a permutation test.
#[derive(Debug, Clone)]
pub struct TestResult {
    pub statistic_id: String,
    pub observed: f64,
    pub p_value: f64,
    pub mode: TestMode,
    pub n_resamples: usize,
    pub side: Side,
    /// Binomial standard error of the Monte Carlo p-value (None in exact
    /// mode).
    pub se: Option<f64>,
}

/// Exact permutation p-value over all group assignments.
pub fn exact_perm_test(
    data: &TwoSampleData,
    statistic: &Statistic,
    side: Side,
) -> Result<TestResult> {
    exact_perm_test_capped(data, statistic, side, EXACT_CAP)
}

pub fn exact_perm_test_capped(
    data: &TwoSampleData,
    statistic: &Statistic,
    side: Side,
    cap: f64,
) -> Result<TestResult> {
    let m = data.m();
    let total = m + data.n();
    let n_assignments = binomial(total, m);
    if n_assignments > cap {
        return Err(Error::CapExceeded(format!(
            "{n_assignments} assignments exceed the exact cap {cap}; use the Monte Carlo mode"
        )));
    }
    let pooled = data.pooled();
    let observed = statistic.eval(data.x(), data.y());
    let mut extreme = 0u64;
    let mut count = 0u64;
    let mut gx = Vec::with_capacity(m);
    let mut gy = Vec::with_capacity(total - m);
    for combo in Combinations::new(total, m)? {
        gx.clear();
        gy.clear();
        let mut it = combo.iter().peekable();
        for (i, &z) in pooled.iter().enumerate() {
            if it.peek() == Some(&&i) {
                gx.push(z);
                it.next();
            } else {
                gy.push(z);
            }
        }
        if side.is_extreme(statistic.eval(&gx, &gy), observed) {
            extreme += 1;
        }
        count += 1;
    }
    Ok(TestResult {
        statistic_id: statistic.id().to_string(),
        observed,
        p_value: extreme as f64 / count as f64,
        mode: TestMode::Exact,
        n_resamples: count as usize,
        side,
        se: None,
    })
}

/// Monte Carlo permutation p-value: `(1 + #extreme) / (B + 1)`.
///
/// Resamples are drawn in fixed blocks, block `k` on stream
/// `rng.stream() + k`, with integer exceedance counts reduced in block
/// order, so the estimate is identical for any worker count.
pub fn mc_perm_test(
    data: &TwoSampleData,
    statistic: &Statistic,
    side: Side,
    n_resamples: usize,
    rng: RngState,
) -> Result<TestResult> {
    if n_resamples < 99 {
        return Err(Error::InvalidArguments("need at least 99 resamples".into()));
    }
    let m = data.m();
    let total = m + data.n();
    let pooled = data.pooled();
    let observed = statistic.eval(data.x(), data.y());

    let block_size = crate::bounds::MC_BLOCK;
    let n_blocks = n_resamples.div_ceil(block_size);
    let extreme: u64 = (0..n_blocks)
        .into_par_iter()
        .map(|block| {
            let mut r = rng.derive(rng.stream().wrapping_add(block as u64));
            let start = block * block_size;
            let end = (start + block_size).min(n_resamples);
            let mut local = 0u64;
            let mut gx = Vec::with_capacity(m);
            let mut gy = Vec::with_capacity(total - m);
            for _ in start..end {
                let pi = random_permutation(total, &mut r).unwrap();
                gx.clear();
                gy.clear();
                for (i, &z) in pooled.iter().enumerate() {
                    if pi.get(i + 1) <= m {
                        gx.push(z);
                    } else {
                        gy.push(z);
                    }
                }
                if side.is_extreme(statistic.eval(&gx, &gy), observed) {
                    local += 1;
                }
            }
            local
        })
        .collect::<Vec<u64>>()
        .into_iter()
        .sum();

    let b = n_resamples as f64;
    let p = (1.0 + extreme as f64) / (b + 1.0);
    Ok(TestResult {
        statistic_id: statistic.id().to_string(),
        observed,
        p_value: p,
        mode: TestMode::MonteCarlo,
        n_resamples,
        side,
        se: Some((p * (1.0 - p) / b).sqrt()),
    })
}

/// Analytic limit covariance of the scaled permuted first-group process:
/// `(1 - m/(m+n)) (H fg - Hf Hg)` with `H` the pooled empirical law. This is
/// the oracle against which Monte Carlo covariances are checked.
pub fn two_sample_process_cov(
    data: &TwoSampleData,
    f: &dyn Fn(f64) -> f64,
    g: &dyn Fn(f64) -> f64,
) -> f64 {
    let pooled = data.pooled();
    let total = pooled.len() as f64;
    let hf = pooled.iter().map(|&z| f(z)).sum::<f64>() / total;
    let hg = pooled.iter().map(|&z| g(z)).sum::<f64>() / total;
    let hfg = pooled.iter().map(|&z| f(z) * g(z)).sum::<f64>() / total;
    let gamma = data.m() as f64 / total;
    (1.0 - gamma) * (hfg - hf * hg)
}
