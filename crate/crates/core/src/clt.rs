//! Exchangeable-pair diagnostics for the combinatorial CLT, distances to the
//! standard normal, and the partial-sum (Rosen) process of sequential
//! sampling without replacement.
//!
//! The universal constants of the Berry-Esseen statements are never asserted
//! numerically; what is computed here are the certificate quantities
//! (`sum|d|^3/(N sigma^3)`, `B/sigma`, and its square root) whose decay
//! certifies approach to normality, plus empirical KS and Wasserstein-1
//! distances to diagnose it.

use crate::error::{Error, Result};
use crate::gauss::{normal_quantile, phi, phi_antiderivative};
use crate::moments::{centered_sum_eval, survey_mean_moments, PermMatrix};
use crate::perm::{enumerate_permutations_capped, Permutation, DEFAULT_ENUM_CAP};

/// Computable rate quantities for the combinatorial CLT.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CLTCertificate {
    /// `sum |d|^3 / (N sigma^3)`
    pub r3: f64,
    /// `B / sigma`
    pub ratio: f64,
    /// `sqrt(B / sigma)`
    pub weak_rate: f64,
}

/// `(Y - E[Y]) / sd(Y)` for one permutation.
pub fn standardized_sum(m: &PermMatrix, pi: &Permutation) -> Result<f64> {
    if m.sigma2() <= 0.0 {
        return Err(Error::Degenerate(
            "zero variance: standardization undefined".into(),
        ));
    }
    Ok(centered_sum_eval(m, pi)? / m.sigma2().sqrt())
}

/// Linearity of the transposition couple: over all permutations, the
/// conditional mean increment `E[W' - W | pi]` (averaging the couple over
/// all N^2 index pairs) must equal `-(2/N) W(pi)`. Returns the largest
/// absolute defect.
pub fn exchangeable_linearity_check(m: &PermMatrix, cap: usize) -> Result<f64> {
    let n = m.n();
    if n > cap {
        return Err(Error::CapExceeded(format!(
            "linearity check enumerates {n}!, above cap {cap}"
        )));
    }
    let nf = n as f64;
    let mut worst = 0.0f64;
    for p in enumerate_permutations_capped(n, cap)? {
        let w = centered_sum_eval(m, &p)?;
        let mut mean_diff = 0.0;
        for i in 1..=n {
            for j in 1..=n {
                // swapping positions i, j changes only two summands
                mean_diff +=
                    m.d(i, p.get(j)) + m.d(j, p.get(i)) - m.d(i, p.get(i)) - m.d(j, p.get(j));
            }
        }
        mean_diff /= nf * nf;
        worst = worst.max((mean_diff + 2.0 / nf * w).abs());
    }
    Ok(worst)
}

/// The three computable CLT rate quantities.
pub fn clt_certificate(m: &PermMatrix) -> Result<CLTCertificate> {
    let sigma2 = m.sigma2();
    if sigma2 <= 0.0 {
        return Err(Error::Degenerate("zero variance score matrix".into()));
    }
    let sigma = sigma2.sqrt();
    let ratio = m.b_max() / sigma;
    Ok(CLTCertificate {
        r3: m.d3() / (m.n() as f64 * sigma2 * sigma),
        ratio,
        weak_rate: ratio.sqrt(),
    })
}

/// Kolmogorov-Smirnov distance between the empirical law of the samples and
/// the standard normal: `sup_x |F_hat(x) - Phi(x)|`, evaluated exactly at
/// the order statistics from both sides.
pub fn ks_distance_to_normal(samples: &[f64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::InvalidArguments("empty sample".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let b = sorted.len() as f64;
    let mut ks = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let p = phi(x);
        let upper = ((i + 1) as f64 / b - p).abs();
        let lower = (i as f64 / b - p).abs();
        ks = ks.max(upper).max(lower);
    }
    Ok(ks)
}

const W1_TRUNCATION: f64 = 8.0;

/// Empirical Wasserstein-1 distance to the standard normal, computed as
/// `int |F_hat(x) - Phi(x)| dx` by exact piecewise integration between
/// consecutive order statistics (splitting each piece where `Phi` crosses
/// the empirical level), truncated at +/- 8 standard deviations.
pub fn wasserstein1_to_normal(samples: &[f64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::InvalidArguments("empty sample".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let b = sorted.len();

    // int_{lo}^{hi} |q - Phi(x)| dx for constant empirical level q,
    // using the antiderivative of Phi and at most one sign change
    let piece = |q: f64, lo: f64, hi: f64| -> f64 {
        if hi <= lo {
            return 0.0;
        }
        let integral = |a: f64, c: f64, level: f64| -> f64 {
            // int_a^c (Phi(x) - level) dx
            phi_antiderivative(c) - phi_antiderivative(a) - level * (c - a)
        };
        if q <= 0.0 {
            return integral(lo, hi, 0.0);
        }
        if q >= 1.0 {
            return -integral(lo, hi, 1.0);
        }
        let cross = normal_quantile(q);
        if cross <= lo {
            integral(lo, hi, q)
        } else if cross >= hi {
            -integral(lo, hi, q)
        } else {
            -integral(lo, cross, q) + integral(cross, hi, q)
        }
    };

    let lo = -W1_TRUNCATION;
    let hi = W1_TRUNCATION;
    let mut total = 0.0;
    // below the smallest order statistic the empirical CDF is 0
    total += piece(0.0, lo, sorted[0].clamp(lo, hi));
    for i in 0..b {
        let left = sorted[i].clamp(lo, hi);
        let right = if i + 1 < b { sorted[i + 1] } else { hi }.clamp(lo, hi);
        let q = (i + 1) as f64 / b as f64;
        total += piece(q, left, right);
    }
    Ok(total)
}

/// A realized partial-sum path of a normalized population.
#[derive(Debug, Clone)]
pub struct RosenPath {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
}

/// Centers and scales a population to `sum z = 0`, `sum z^2 = 1`.
pub fn normalize_population(z: &[f64]) -> Result<Vec<f64>> {
    if z.is_empty() {
        return Err(Error::InvalidSize("empty population".into()));
    }
    let n = z.len() as f64;
    let mean = z.iter().sum::<f64>() / n;
    let ss: f64 = z.iter().map(|&v| (v - mean) * (v - mean)).sum();
    if ss <= 0.0 {
        return Err(Error::Degenerate("constant population".into()));
    }
    let scale = ss.sqrt();
    Ok(z.iter().map(|&v| (v - mean) / scale).collect())
}

/// Evaluates the path `Z(t) = sum_{pi(i) <= ceil(Nt)} z_i` on a time grid in
/// `[0, 1]`. At `t = 0` the ceiling is 0 and the sum is empty.
pub fn rosen_path(z: &[f64], pi: &Permutation, grid: &[f64]) -> Result<RosenPath> {
    let n = z.len();
    if pi.n() != n {
        return Err(Error::InvalidArguments(
            "permutation/population size mismatch".into(),
        ));
    }
    if grid.iter().any(|&t| !(0.0..=1.0).contains(&t)) {
        return Err(Error::InvalidArguments(
            "grid times must lie in [0,1]".into(),
        ));
    }
    // prefix sums over arrival order: position k holds z_i with pi(i) = k
    let mut by_arrival = vec![0.0; n + 1];
    for i in 1..=n {
        by_arrival[pi.get(i)] = z[i - 1];
    }
    let mut prefix = vec![0.0; n + 1];
    for k in 1..=n {
        prefix[k] = prefix[k - 1] + by_arrival[k];
    }
    let values = grid
        .iter()
        .map(|&t| {
            let k = (n as f64 * t).ceil() as usize;
            prefix[k.min(n)]
        })
        .collect();
    Ok(RosenPath {
        grid: grid.to_vec(),
        values,
    })
}

/// Exact variance of `Z(k/N)` for a normalized population, via the survey
/// mean moments of the size-`k` sample sum. Equals `k(N-k)/(N(N-1))`.
pub fn rosen_variance(z: &[f64], k: usize) -> Result<f64> {
    let n = z.len();
    if k == 0 || k == n {
        return Ok(0.0);
    }
    if k > n {
        return Err(Error::InvalidArguments(format!(
            "prefix length {k} exceeds population size {n}"
        )));
    }
    let norm = normalize_population(z)?;
    let sm = survey_mean_moments(&norm, k, None)?;
    Ok((k * k) as f64 * sm.variance)
}

/// Exact finite-population covariance `Cov(Z(k/N), Z(l/N)) =
/// k (N - l) / (N (N-1))` for `k <= l` and a normalized population.
pub fn rosen_covariance_exact(n: usize, k: usize, l: usize) -> Result<f64> {
    if k > n || l > n {
        return Err(Error::InvalidArguments("prefix lengths exceed N".into()));
    }
    let (k, l) = if k <= l { (k, l) } else { (l, k) };
    Ok((k * (n - l)) as f64 / (n as f64 * (n as f64 - 1.0)))
}

/// Enumerates the exchangeable pair `(W, W')` over all `(pi, I, J)` and
/// checks its joint law is symmetric. Returns the largest asymmetry in
/// counts (0 when exactly exchangeable).
pub fn pair_exchangeability_defect(m: &PermMatrix, cap: usize) -> Result<u64> {
    use std::collections::HashMap;
    let n = m.n();
    if n > cap {
        return Err(Error::CapExceeded(format!("N = {n} above cap {cap}")));
    }
    // centered-sum values are rationals times matrix entries; key on bits
    let mut joint: HashMap<(u64, u64), u64> = HashMap::new();
    for p in enumerate_permutations_capped(n, cap)? {
        let w = centered_sum_eval(m, &p)?;
        for i in 1..=n {
            for j in 1..=n {
                let q = p.swap_positions(i, j);
                let w2 = centered_sum_eval(m, &q)?;
                *joint.entry((w.to_bits(), w2.to_bits())).or_insert(0) += 1;
            }
        }
    }
    let mut worst = 0u64;
    for (&(a, b), &c) in joint.iter() {
        let mirror = joint.get(&(b, a)).copied().unwrap_or(0);
        worst = worst.max(c.abs_diff(mirror));
    }
    Ok(worst)
}

/// Convenience wrapper using the default enumeration cap.
pub fn exchangeable_linearity_check_default(m: &PermMatrix) -> Result<f64> {
    exchangeable_linearity_check(m, DEFAULT_ENUM_CAP)
}
