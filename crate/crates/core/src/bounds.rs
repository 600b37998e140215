//! Analytic tail and Orlicz-norm bounds for combinatorial sums, with the
//! Monte Carlo harness that checks each bound dominates the true tail.
//!
//! All bound formulas are transcribed with their stated constants, no
//! sharpening. The scalar bounds control `P(Y - E[Y] >= t)`; the matrix
//! bounds control `P(||sum A_{i,pi(i)}||_op >= t)` and carry the `2d`
//! prefactor.

use crate::error::{Error, Result};
use crate::moments::PermMatrix;
use crate::perm::{sample_without_replacement, Combinations, SampleMask};
use crate::rng::RngState;
use rayon::prelude::*;

/// Number of draws per deterministic Monte Carlo block. Results are summed
/// block by block, so they do not depend on how blocks are scheduled across
/// threads.
pub const MC_BLOCK: usize = 4096;

/// A named analytic tail bound, evaluable at any threshold `t >= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailBoundSpec {
    /// `exp(-t^2 / (4 N B^2 + 4 sigma^2))`
    CombHoeffdingV1 { sigma2: f64, b_max: f64, n: usize },
    /// Rank-one scores `a_i b_j`: `exp(-t^2 / (4 sigma_bar^2 + 4 sigma^2))`
    CombHoeffdingV2 { sigma_bar2: f64, sigma2: f64 },
    /// `exp(-t^2 / (12 sigma^2 + 4 sqrt(2) B t))`
    CombBernstein { sigma2: f64, b_max: f64 },
    /// `2d exp(-t^2 / (24 N M^2))`
    MatrixHoeffding { m_bound: f64, n: usize, dim: usize },
    /// `2d exp(-t^2 / (12 sigma^2 + 4 sqrt(2) M t))`
    MatrixBernstein {
        sigma2: f64,
        m_bound: f64,
        dim: usize,
    },
    /// `exp(-n^2 t^2 / (8 N Sigma_F^2))` for the centered sup-deviation
    TolstikhinTalagrand {
        sigma_class2: f64,
        n_sample: usize,
        n_pop: usize,
    },
}

impl TailBoundSpec {
    pub fn comb_hoeffding_v1(m: &PermMatrix) -> Self {
        TailBoundSpec::CombHoeffdingV1 {
            sigma2: m.sigma2(),
            b_max: m.b_max(),
            n: m.n(),
        }
    }

    /// Rank-one features from the factor sequences. `sigma_bar2` is the
    /// relaxed product `sqrt(sum (a - mean a)^4) * sqrt(sum (b - mean b)^4)`,
    /// a valid upper bound for the sup over all pairings.
    pub fn comb_hoeffding_v2(a: &[f64], b: &[f64]) -> Result<Self> {
        if a.len() != b.len() || a.is_empty() {
            return Err(Error::InvalidArguments(
                "rank-one factors must have equal, positive length".into(),
            ));
        }
        let n = a.len() as f64;
        let a_bar = a.iter().sum::<f64>() / n;
        let b_bar = b.iter().sum::<f64>() / n;
        let a4: f64 = a.iter().map(|&v| (v - a_bar).powi(4)).sum();
        let b4: f64 = b.iter().map(|&v| (v - b_bar).powi(4)).sum();
        let a2: f64 = a.iter().map(|&v| (v - a_bar).powi(2)).sum();
        let b2: f64 = b.iter().map(|&v| (v - b_bar).powi(2)).sum();
        Ok(TailBoundSpec::CombHoeffdingV2 {
            sigma_bar2: a4.sqrt() * b4.sqrt(),
            sigma2: a2 * b2 / (n - 1.0),
        })
    }

    pub fn comb_bernstein(m: &PermMatrix) -> Self {
        TailBoundSpec::CombBernstein {
            sigma2: m.sigma2(),
            b_max: m.b_max(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            TailBoundSpec::CombHoeffdingV1 { .. } => "comb_hoeffding_v1",
            TailBoundSpec::CombHoeffdingV2 { .. } => "comb_hoeffding_v2",
            TailBoundSpec::CombBernstein { .. } => "comb_bernstein",
            TailBoundSpec::MatrixHoeffding { .. } => "matrix_hoeffding",
            TailBoundSpec::MatrixBernstein { .. } => "matrix_bernstein",
            TailBoundSpec::TolstikhinTalagrand { .. } => "tolstikhin_talagrand",
        }
    }

    /// The bound at threshold `t`. A zero denominator (degenerate scores)
    /// gives a point mass at zero, so the bound is the prefactor at `t = 0`
    /// and `0` beyond.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if t < 0.0 {
            return Err(Error::InvalidArguments(format!(
                "threshold must be nonnegative, got {t}"
            )));
        }
        let (prefactor, denom) = match *self {
            TailBoundSpec::CombHoeffdingV1 { sigma2, b_max, n } => {
                (1.0, 4.0 * n as f64 * b_max * b_max + 4.0 * sigma2)
            }
            TailBoundSpec::CombHoeffdingV2 { sigma_bar2, sigma2 } => {
                (1.0, 4.0 * sigma_bar2 + 4.0 * sigma2)
            }
            TailBoundSpec::CombBernstein { sigma2, b_max } => {
                (1.0, 12.0 * sigma2 + 4.0 * 2f64.sqrt() * b_max * t)
            }
            TailBoundSpec::MatrixHoeffding { m_bound, n, dim } => {
                (2.0 * dim as f64, 24.0 * n as f64 * m_bound * m_bound)
            }
            TailBoundSpec::MatrixBernstein {
                sigma2,
                m_bound,
                dim,
            } => (
                2.0 * dim as f64,
                12.0 * sigma2 + 4.0 * 2f64.sqrt() * m_bound * t,
            ),
            TailBoundSpec::TolstikhinTalagrand {
                sigma_class2,
                n_sample,
                n_pop,
            } => {
                let n = n_sample as f64;
                let big_n = n_pop as f64;
                // exponent uses n^2 t^2, so fold n^2/(8 N) into t's scale
                if sigma_class2 == 0.0 {
                    (1.0, 0.0)
                } else {
                    return Ok((-n * n * t * t / (8.0 * big_n * sigma_class2)).exp());
                }
            }
        };
        if denom == 0.0 {
            return Ok(if t == 0.0 { prefactor } else { 0.0 });
        }
        Ok(prefactor * (-t * t / denom).exp())
    }
}

/// Orlicz-norm bounds for the centered permutation mean `(P_{pi,n} - P_N) f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OrliczBoundSpec {
    /// Bobkov: `sqrt(12/n (1 + N/n)) ||f - P_N f||_{L2(P_N)}`
    BobkovPsi2 {
        n_sample: usize,
        n_pop: usize,
        l2_norm: f64,
    },
    /// Bernstein-Serfling:
    /// `24 sqrt(2)/n ||f - P_N f||_inf + sqrt(72/(n log 2)) ||f - P_N f||_{L2}`
    BernsteinSerflingPsi1 {
        n_sample: usize,
        l2_norm: f64,
        sup_norm: f64,
    },
}

impl OrliczBoundSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            OrliczBoundSpec::BobkovPsi2 { .. } => "bobkov_psi2",
            OrliczBoundSpec::BernsteinSerflingPsi1 { .. } => "bernstein_serfling_psi1",
        }
    }

    pub fn eval(&self) -> Result<f64> {
        match *self {
            OrliczBoundSpec::BobkovPsi2 {
                n_sample,
                n_pop,
                l2_norm,
            } => {
                if n_sample < 1 || n_sample > n_pop {
                    return Err(Error::InvalidArguments("need 1 <= n <= N".into()));
                }
                if l2_norm < 0.0 {
                    return Err(Error::InvalidArguments("negative norm".into()));
                }
                let n = n_sample as f64;
                let big_n = n_pop as f64;
                Ok((12.0 / n * (1.0 + big_n / n)).sqrt() * l2_norm)
            }
            OrliczBoundSpec::BernsteinSerflingPsi1 {
                n_sample,
                l2_norm,
                sup_norm,
            } => {
                if n_sample < 1 {
                    return Err(Error::InvalidArguments("need n >= 1".into()));
                }
                if l2_norm < 0.0 || sup_norm < 0.0 {
                    return Err(Error::InvalidArguments("negative norm".into()));
                }
                let n = n_sample as f64;
                Ok(24.0 * 2f64.sqrt() / n * sup_norm + (72.0 / (n * 2f64.ln())).sqrt() * l2_norm)
            }
        }
    }
}

/// Empirical plug-in Orlicz psi_p norm: bisection on `C` until the sample
/// mean of `exp((|x|/C)^p) - 1` crosses 1. The bracket is clipped to
/// `[max|x|/50, 50 max|x|]`, a documented source of bias at small samples.
pub fn orlicz_norm_estimate(samples: &[f64], p: u32) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::InvalidArguments("need at least one sample".into()));
    }
    if p != 1 && p != 2 {
        return Err(Error::InvalidArguments("p must be 1 or 2".into()));
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::Data("non-finite sample".into()));
    }
    let max_abs = samples.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    if max_abs == 0.0 {
        return Ok(0.0);
    }
    let pf = p as i32;
    let mean_psi = |c: f64| -> f64 {
        samples
            .iter()
            .map(|&x| ((x.abs() / c).powi(pf)).exp() - 1.0)
            .sum::<f64>()
            / samples.len() as f64
    };
    let mut lo = max_abs / 50.0;
    let mut hi = max_abs * 50.0;
    if mean_psi(lo) <= 1.0 {
        return Ok(lo);
    }
    if mean_psi(hi) > 1.0 {
        return Ok(hi);
    }
    while (hi - lo) > 1e-9 * hi {
        let mid = 0.5 * (lo + hi);
        if mean_psi(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Monte Carlo survival estimates of a statistic on a threshold grid.
#[derive(Debug, Clone)]
pub struct EmpiricalTail {
    pub thresholds: Vec<f64>,
    pub survival: Vec<f64>,
    pub se: Vec<f64>,
    pub n_draws: usize,
}

/// Estimates `P(X >= t)` on the grid from `n_draws` draws of the sampler.
///
/// Draws are partitioned into fixed-size blocks; block `k` uses the stream
/// `rng.stream() + k` of `rng.seed()` and per-threshold exceedance counters
/// are integers summed in block order, so the result is identical for any
/// worker count.
pub fn empirical_tail(
    sampler: &(dyn Fn(&mut RngState) -> f64 + Sync),
    thresholds: &[f64],
    n_draws: usize,
    rng: RngState,
) -> Result<EmpiricalTail> {
    if thresholds.is_empty() {
        return Err(Error::InvalidArguments("empty threshold grid".into()));
    }
    if n_draws < 100 {
        return Err(Error::InvalidArguments(
            "need at least 100 Monte Carlo draws".into(),
        ));
    }
    let n_blocks = n_draws.div_ceil(MC_BLOCK);
    let counts: Vec<Vec<u64>> = (0..n_blocks)
        .into_par_iter()
        .map(|block| {
            let mut local = vec![0u64; thresholds.len()];
            let mut r = rng.derive(rng.stream().wrapping_add(block as u64));
            let start = block * MC_BLOCK;
            let end = (start + MC_BLOCK).min(n_draws);
            for _ in start..end {
                let x = sampler(&mut r);
                for (c, &t) in local.iter_mut().zip(thresholds) {
                    if x >= t {
                        *c += 1;
                    }
                }
            }
            local
        })
        .collect();

    let mut totals = vec![0u64; thresholds.len()];
    for block in &counts {
        for (t, &c) in totals.iter_mut().zip(block) {
            *t += c;
        }
    }
    let b = n_draws as f64;
    let survival: Vec<f64> = totals.iter().map(|&c| c as f64 / b).collect();
    let se: Vec<f64> = survival
        .iter()
        .map(|&p| (p * (1.0 - p) / b).sqrt())
        .collect();
    Ok(EmpiricalTail {
        thresholds: thresholds.to_vec(),
        survival,
        se,
        n_draws,
    })
}

/// One row of a domination table.
#[derive(Debug, Clone, Copy)]
pub struct DominationRow {
    pub t: f64,
    pub bound: f64,
    pub empirical: f64,
    pub se: f64,
    pub pass: bool,
    /// `bound - (empirical - 3 se)`; nonnegative slack means PASS.
    pub slack: f64,
}

/// Checks `bound(t) >= empirical survival - 3 SE` at every threshold, with a
/// small absolute allowance against roundoff at near-zero survival.
pub fn domination_check(spec: &TailBoundSpec, emp: &EmpiricalTail) -> Result<Vec<DominationRow>> {
    emp.thresholds
        .iter()
        .zip(emp.survival.iter().zip(&emp.se))
        .map(|(&t, (&p, &se))| {
            let bound = spec.eval(t)?;
            let slack = bound - (p - 3.0 * se);
            Ok(DominationRow {
                t,
                bound,
                empirical: p,
                se,
                pass: slack >= -1e-12,
                slack,
            })
        })
        .collect()
}

/// Whether an entire domination table passes.
pub fn domination_passes(rows: &[DominationRow]) -> bool {
    rows.iter().all(|r| r.pass)
}

/// How `convex_order_check` computes its two expectations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvexOrderMode {
    /// Enumerate all `C(N, n)` subsets and all `N^n` with-replacement tuples.
    Exhaustive,
    /// Monte Carlo with the given number of draws per side.
    MonteCarlo { draws: usize },
}

#[derive(Debug, Clone, Copy)]
pub struct ConvexOrderResult {
    pub e_without: f64,
    pub e_with: f64,
    pub pass: bool,
}

const EXHAUSTIVE_SUBSET_CAP: f64 = 1e6;
const EXHAUSTIVE_TUPLE_CAP: f64 = 1e7;

/// Compares `E f(sum of n draws without replacement)` against
/// `E f(sum of n iid draws)` from the same population; convex `f` makes the
/// first no larger than the second.
pub fn convex_order_check(
    z: &[f64],
    n_sample: usize,
    f: &(dyn Fn(f64) -> f64 + Sync),
    mode: ConvexOrderMode,
    rng: RngState,
) -> Result<ConvexOrderResult> {
    let n_total = z.len();
    if n_total == 0 {
        return Err(Error::InvalidSize("empty population".into()));
    }
    if n_sample < 1 || n_sample > n_total {
        return Err(Error::InvalidArguments(format!(
            "sample size {n_sample} out of range 1..={n_total}"
        )));
    }
    let (e_without, e_with, tol) = match mode {
        ConvexOrderMode::Exhaustive => {
            let n_subsets = crate::perm::binomial(n_total, n_sample);
            let n_tuples = (n_total as f64).powi(n_sample as i32);
            if n_subsets > EXHAUSTIVE_SUBSET_CAP || n_tuples > EXHAUSTIVE_TUPLE_CAP {
                return Err(Error::CapExceeded(format!(
                    "{n_subsets} subsets / {n_tuples} tuples exceed the exhaustive caps"
                )));
            }
            let mut sum_without = 0.0;
            for combo in Combinations::new(n_total, n_sample)? {
                let s: f64 = combo.iter().map(|&i| z[i]).sum();
                sum_without += f(s);
            }
            let e_without = sum_without / n_subsets;

            // count over all ordered with-replacement tuples in base N
            let mut idx = vec![0usize; n_sample];
            let mut sum_with = 0.0;
            loop {
                let s: f64 = idx.iter().map(|&i| z[i]).sum();
                sum_with += f(s);
                let mut pos = 0;
                loop {
                    if pos == n_sample {
                        break;
                    }
                    idx[pos] += 1;
                    if idx[pos] < n_total {
                        break;
                    }
                    idx[pos] = 0;
                    pos += 1;
                }
                if pos == n_sample {
                    break;
                }
            }
            let e_with = sum_with / n_tuples;
            let scale = 1.0 + e_without.abs().max(e_with.abs());
            (e_without, e_with, 1e-9 * scale)
        }
        ConvexOrderMode::MonteCarlo { draws } => {
            if draws < 100 {
                return Err(Error::InvalidArguments("need at least 100 draws".into()));
            }
            let mut r1 = rng.derive(rng.stream());
            let mut sum_wo = 0.0;
            let mut sumsq_wo = 0.0;
            for _ in 0..draws {
                let mask = sample_without_replacement(n_total, n_sample, &mut r1)?;
                let s: f64 = mask.selected_indices().iter().map(|&i| z[i]).sum();
                let v = f(s);
                sum_wo += v;
                sumsq_wo += v * v;
            }
            let mut r2 = rng.derive(rng.stream().wrapping_add(1));
            let mut sum_w = 0.0;
            let mut sumsq_w = 0.0;
            for _ in 0..draws {
                let s: f64 = (0..n_sample)
                    .map(|_| z[r2.bounded(n_total as u64) as usize])
                    .sum();
                let v = f(s);
                sum_w += v;
                sumsq_w += v * v;
            }
            let b = draws as f64;
            let e_without = sum_wo / b;
            let e_with = sum_w / b;
            let var_wo = (sumsq_wo / b - e_without * e_without).max(0.0);
            let var_w = (sumsq_w / b - e_with * e_with).max(0.0);
            let se = ((var_wo + var_w) / b).sqrt();
            (e_without, e_with, 3.0 * se + 1e-12)
        }
    };
    Ok(ConvexOrderResult {
        e_without,
        e_with,
        pass: e_without <= e_with + tol,
    })
}

/// Exact survival `P(X >= t)` of a statistic under full enumeration of the
/// permutation group (oracle for small N).
pub fn exact_tail(
    statistic: &dyn Fn(&crate::perm::Permutation) -> f64,
    n: usize,
    t: f64,
) -> Result<f64> {
    let mut count = 0usize;
    let mut total = 0usize;
    for p in crate::perm::enumerate_permutations(n)? {
        if statistic(&p) >= t {
            count += 1;
        }
        total += 1;
    }
    Ok(count as f64 / total as f64)
}

/// Deviation draws of the centered permutation mean `(P_{pi,n} - P_N) f`,
/// used for the Orlicz-consistency experiments.
pub fn perm_mean_deviation_draw(
    values: &[f64],
    n_sample: usize,
    rng: &mut RngState,
) -> Result<f64> {
    let n_total = values.len();
    let mask: SampleMask = sample_without_replacement(n_total, n_sample, rng)?;
    let pop_mean = values.iter().sum::<f64>() / n_total as f64;
    let sample_mean = mask
        .selected_indices()
        .iter()
        .map(|&i| values[i])
        .sum::<f64>()
        / n_sample as f64;
    Ok(sample_mean - pop_mean)
}
