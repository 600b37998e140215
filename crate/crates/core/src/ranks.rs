//! Rank statistics as named instances of combinatorial and oscillation sums.
//!
//! Conventions: Kendall's tau sums over ordered pairs `(i, j)` with `i != j`,
//! so `tau(pi, pi) = N(N-1)`; statistic values that are forced to be integers
//! (footrule, tau, rank sums) are returned as exact integers widened to f64.

use crate::error::{Error, Result};
use crate::moments::{
    comb_sum_moments, footrule_matrix, oscillation_eval, survey_mean_moments, PermMatrix,
};
use crate::perm::{
    enumerate_permutations_capped, random_permutation, Permutation, DEFAULT_ENUM_CAP,
};
use crate::rng::RngState;

/// The named rank statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankStatKind {
    /// `sum_i |pi(i) - sigma(i)|`
    Footrule,
    /// `sum_i (pi(i) - sigma(i))^2`
    SpearmanRho,
    /// `sum_{i != j} sign(pi(i) - pi(j)) sign(sigma(i) - sigma(j))` over
    /// ordered pairs
    KendallTau,
    /// `sum_{i=1}^{N-1} |pi([i+1]) - pi([i])|` where sigma orders the indices
    ChatterjeeXi,
    /// `sum_{i=1}^m pi(i)` (uses only `pi`)
    WilcoxonRankSum { m: usize },
    /// `sum_{i<=m} sum_{j<=n} 1(pi(i) < pi(m+j))` with `m + n = N`
    MannWhitneyU { m: usize, n: usize },
}

impl RankStatKind {
    /// Parses a registry id: plain names for the two-permutation statistics,
    /// `wilcoxon:m` and `mann_whitney_u:m,n` for the group statistics.
    pub fn from_id(id: &str) -> Result<RankStatKind> {
        let (name, args) = match id.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (id, None),
        };
        let parse = |s: &str| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| Error::InvalidArguments(format!("bad group size '{s}' in '{id}'")))
        };
        match (name, args) {
            ("footrule", None) => Ok(RankStatKind::Footrule),
            ("spearman_rho", None) => Ok(RankStatKind::SpearmanRho),
            ("kendall_tau", None) => Ok(RankStatKind::KendallTau),
            ("chatterjee_xi", None) => Ok(RankStatKind::ChatterjeeXi),
            ("wilcoxon", Some(a)) => Ok(RankStatKind::WilcoxonRankSum { m: parse(a)? }),
            ("mann_whitney_u", Some(a)) => {
                let (m, n) = a.split_once(',').ok_or_else(|| {
                    Error::InvalidArguments(format!("'{id}' needs two group sizes m,n"))
                })?;
                Ok(RankStatKind::MannWhitneyU {
                    m: parse(m)?,
                    n: parse(n)?,
                })
            }
            _ => Err(Error::InvalidArguments(format!(
                "unknown rank statistic '{id}' \
                 (footrule|spearman_rho|kendall_tau|chatterjee_xi|wilcoxon:m|mann_whitney_u:m,n)"
            ))),
        }
    }

    pub fn id(&self) -> &'static str {
        match self {
            RankStatKind::Footrule => "footrule",
            RankStatKind::SpearmanRho => "spearman_rho",
            RankStatKind::KendallTau => "kendall_tau",
            RankStatKind::ChatterjeeXi => "chatterjee_xi",
            RankStatKind::WilcoxonRankSum { .. } => "wilcoxon",
            RankStatKind::MannWhitneyU { .. } => "mann_whitney_u",
        }
    }

    fn validate(&self, n_total: usize) -> Result<()> {
        match *self {
            RankStatKind::WilcoxonRankSum { m } => {
                if m < 1 || m > n_total {
                    return Err(Error::InvalidArguments(format!(
                        "group size m={m} out of range 1..={n_total}"
                    )));
                }
            }
            RankStatKind::MannWhitneyU { m, n } if m < 1 || n < 1 || m + n != n_total => {
                return Err(Error::InvalidArguments(format!(
                    "group sizes m={m}, n={n} must be positive with m+n={n_total}"
                )));
            }
            _ => {}
        }
        Ok(())
    }
}

/// Evaluates a rank statistic of `pi` against the reference `sigma`.
pub fn rank_statistic(kind: RankStatKind, pi: &Permutation, sigma: &Permutation) -> Result<f64> {
    let n = pi.n();
    if sigma.n() != n {
        return Err(Error::InvalidArguments(format!(
            "permutation sizes {} and {} differ",
            n,
            sigma.n()
        )));
    }
    kind.validate(n)?;
    let value = match kind {
        RankStatKind::Footrule => (1..=n)
            .map(|i| pi.get(i).abs_diff(sigma.get(i)) as f64)
            .sum(),
        RankStatKind::SpearmanRho => (1..=n)
            .map(|i| {
                let d = pi.get(i) as f64 - sigma.get(i) as f64;
                d * d
            })
            .sum(),
        RankStatKind::KendallTau => {
            let mut total = 0i64;
            for i in 1..=n {
                for j in 1..=n {
                    if i == j {
                        continue;
                    }
                    let sp = (pi.get(i) as i64 - pi.get(j) as i64).signum();
                    let ss = (sigma.get(i) as i64 - sigma.get(j) as i64).signum();
                    total += sp * ss;
                }
            }
            total as f64
        }
        RankStatKind::ChatterjeeXi => {
            if n < 2 {
                return Err(Error::InvalidSize("xi needs N >= 2".into()));
            }
            let order = sigma.inverse();
            (1..n)
                .map(|i| pi.get(order.get(i + 1)).abs_diff(pi.get(order.get(i))) as f64)
                .sum()
        }
        RankStatKind::WilcoxonRankSum { m } => (1..=m).map(|i| pi.get(i) as f64).sum(),
        RankStatKind::MannWhitneyU { m, n: n2 } => {
            let mut count = 0usize;
            for i in 1..=m {
                for j in 1..=n2 {
                    if pi.get(i) < pi.get(m + j) {
                        count += 1;
                    }
                }
            }
            count as f64
        }
    };
    Ok(value)
}

/// Exact mean and variance of a rank statistic under a uniform `pi` (with
/// `sigma` fixed; the law does not depend on `sigma`).
///
/// Footrule and rho reduce to combinatorial-sum moments; Wilcoxon and
/// Mann-Whitney reduce to survey-mean moments of the rank population; the xi
/// mean comes from the consecutive-pair expectation, and its variance is
/// delegated to exhaustive enumeration (the cyclic closed form does not
/// carry over to the non-cyclic statistic). Kendall's tau is not a
/// combinatorial sum; its closed form is enumeration-verified in tests.
pub fn rank_moments(kind: RankStatKind, n_total: usize) -> Result<(f64, f64)> {
    rank_moments_capped(kind, n_total, DEFAULT_ENUM_CAP)
}

pub fn rank_moments_capped(kind: RankStatKind, n_total: usize, cap: usize) -> Result<(f64, f64)> {
    if n_total < 2 {
        return Err(Error::InvalidSize(format!(
            "rank moments need N >= 2, got {n_total}"
        )));
    }
    kind.validate(n_total)?;
    let nf = n_total as f64;
    match kind {
        RankStatKind::Footrule => Ok(comb_sum_moments(&footrule_matrix(n_total)?)),
        RankStatKind::SpearmanRho => {
            let rows: Vec<Vec<f64>> = (1..=n_total)
                .map(|i| {
                    (1..=n_total)
                        .map(|j| {
                            let d = i as f64 - j as f64;
                            d * d
                        })
                        .collect()
                })
                .collect();
            Ok(comb_sum_moments(&PermMatrix::new(&rows)?))
        }
        RankStatKind::KendallTau => {
            // each unordered pair is concordant or discordant with equal
            // probability; ordered-pair convention doubles the statistic
            Ok((0.0, 2.0 * nf * (nf - 1.0) * (2.0 * nf + 5.0) / 9.0))
        }
        RankStatKind::ChatterjeeXi => {
            if n_total < 3 {
                return Err(Error::InvalidSize("xi moments need N >= 3".into()));
            }
            let mean = xi_mean(n_total);
            let id = Permutation::identity(n_total)?;
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            let mut count = 0.0;
            for p in enumerate_permutations_capped(n_total, cap)? {
                let v = rank_statistic(RankStatKind::ChatterjeeXi, &p, &id)?;
                sum += v;
                sum_sq += v * v;
                count += 1.0;
            }
            let emean = sum / count;
            Ok((mean, sum_sq / count - emean * emean))
        }
        RankStatKind::WilcoxonRankSum { m } => {
            let ranks: Vec<f64> = (1..=n_total).map(|i| i as f64).collect();
            let sm = survey_mean_moments(&ranks, m, None)?;
            let mf = m as f64;
            Ok((mf * sm.mean, mf * mf * sm.variance))
        }
        RankStatKind::MannWhitneyU { m, .. } => {
            // U is an affine reflection of the first-group rank sum W
            // (U = mN - m(m-1)/2 - W), so it shares W's variance and its
            // mean is mn/2
            let (w_mean, w_var) =
                rank_moments_capped(RankStatKind::WilcoxonRankSum { m }, n_total, cap)?;
            let mf = m as f64;
            Ok((w_mean - mf * (mf + 1.0) / 2.0, w_var))
        }
    }
}

/// Exact mean of the non-cyclic oscillation statistic xi: the `(N-1)`
/// consecutive pairs each average the off-diagonal scores.
fn xi_mean(n: usize) -> f64 {
    let mut off_diag = 0.0;
    for i in 1..=n {
        for j in 1..=n {
            if i != j {
                off_diag += i.abs_diff(j) as f64;
            }
        }
    }
    off_diag / n as f64
}

/// Monte Carlo moments of xi for sizes beyond the enumeration cap. The mean
/// is exact; the variance is estimated from `draws` uniform permutations.
pub fn xi_moments_mc(n_total: usize, draws: usize, rng: &mut RngState) -> Result<(f64, f64)> {
    if n_total < 3 {
        return Err(Error::InvalidSize("xi moments need N >= 3".into()));
    }
    if draws < 100 {
        return Err(Error::InvalidArguments("need at least 100 draws".into()));
    }
    let id = Permutation::identity(n_total)?;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..draws {
        let p = random_permutation(n_total, rng)?;
        let v = rank_statistic(RankStatKind::ChatterjeeXi, &p, &id)?;
        sum += v;
        sum_sq += v * v;
    }
    let k = draws as f64;
    let mean_mc = sum / k;
    Ok((
        xi_mean(n_total),
        (sum_sq / k - mean_mc * mean_mc) * k / (k - 1.0),
    ))
}

/// Evaluates xi as the oscillation sum of a score matrix over the non-cyclic
/// consecutive pairs (shared machinery with the cyclic oscillation sum).
pub fn xi_as_oscillation(m: &PermMatrix, pi: &Permutation) -> Result<f64> {
    // the cyclic sum minus the wraparound term
    let cyclic = oscillation_eval(m, pi)?;
    Ok(cyclic - m.a(pi.get(m.n()), pi.get(1)))
}
