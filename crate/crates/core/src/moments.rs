//! Score-matrix calculus for combinatorial sums.
//!
//! A deterministic N x N score matrix `A` is double-centered into `D` (all
//! row and column sums zero); the features `mu`, `sigma2 = sum d^2 / (N-1)`
//! and `b_max = max |d|` drive every exact moment and tail bound downstream.
//! The combinatorial sum is `Y = sum_i a_{i,pi(i)}` for a uniform permutation
//! `pi`; its exact mean is `mu` and its exact variance is `sigma2`.

use crate::error::{Error, Result};
use crate::perm::Permutation;
use crate::rng::RngState;

/// A score matrix together with its centered version and summary features.
#[derive(Debug, Clone)]
pub struct PermMatrix {
    n: usize,
    a: Vec<f64>,
    d: Vec<f64>,
    mu: f64,
    sigma2: f64,
    b_max: f64,
    d3: f64,
    d4: f64,
}

impl PermMatrix {
    /// Builds the matrix from rows, populating the centered matrix and all
    /// features in one pass.
    pub fn new(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n < 2 {
            return Err(Error::InvalidSize(format!(
                "score matrix needs N >= 2, got {n}"
            )));
        }
        let mut a = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Data(format!(
                    "row {} has {} entries, expected {n}",
                    i + 1,
                    row.len()
                )));
            }
            for &v in row {
                if !v.is_finite() {
                    return Err(Error::Data(format!("non-finite entry in row {}", i + 1)));
                }
                a.push(v);
            }
        }

        let nf = n as f64;
        let mut row_mean = vec![0.0; n];
        let mut col_mean = vec![0.0; n];
        let mut grand = 0.0;
        for i in 0..n {
            for j in 0..n {
                let v = a[i * n + j];
                row_mean[i] += v;
                col_mean[j] += v;
                grand += v;
            }
        }
        for m in row_mean.iter_mut().chain(col_mean.iter_mut()) {
            *m /= nf;
        }
        grand /= nf * nf;

        let mut d = vec![0.0; n * n];
        let mut sum_d2 = 0.0;
        let mut d3 = 0.0;
        let mut d4 = 0.0;
        let mut b_max = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let v = a[i * n + j] - row_mean[i] - col_mean[j] + grand;
                d[i * n + j] = v;
                let v2 = v * v;
                sum_d2 += v2;
                d3 += v2 * v.abs();
                d4 += v2 * v2;
                b_max = b_max.max(v.abs());
            }
        }

        Ok(PermMatrix {
            n,
            a,
            d,
            mu: grand * nf,
            sigma2: sum_d2 / (nf - 1.0),
            b_max,
            d3,
            d4,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn a(&self, i: usize, j: usize) -> f64 {
        self.a[(i - 1) * self.n + (j - 1)]
    }

    #[inline]
    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.d[(i - 1) * self.n + (j - 1)]
    }

    /// Mean of the combinatorial sum.
    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Variance of the combinatorial sum: `sum d^2 / (N - 1)`.
    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    /// Largest absolute centered entry.
    pub fn b_max(&self) -> f64 {
        self.b_max
    }

    /// `sum |d|^3` over all entries.
    pub fn d3(&self) -> f64 {
        self.d3
    }

    /// `sum d^4` over all entries.
    pub fn d4(&self) -> f64 {
        self.d4
    }

    /// The centered matrix as rows (useful for re-centering checks).
    pub fn d_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| self.d[i * self.n..(i + 1) * self.n].to_vec())
            .collect()
    }

    /// Largest absolute row or column sum of the centered matrix, for
    /// centering diagnostics. Should be ~0 up to roundoff.
    pub fn max_centering_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            let row: f64 = (0..self.n).map(|j| self.d[i * self.n + j]).sum();
            let col: f64 = (0..self.n).map(|j| self.d[j * self.n + i]).sum();
            worst = worst.max(row.abs()).max(col.abs());
        }
        worst
    }
}

/// Evaluates `Y = sum_i a_{i,pi(i)}`.
pub fn comb_sum_eval(m: &PermMatrix, pi: &Permutation) -> Result<f64> {
    if pi.n() != m.n {
        return Err(Error::InvalidArguments(format!(
            "permutation size {} does not match matrix size {}",
            pi.n(),
            m.n
        )));
    }
    Ok((1..=m.n).map(|i| m.a(i, pi.get(i))).sum())
}

/// Evaluates the centered sum `Y - E[Y] = sum_i d_{i,pi(i)}`.
pub fn centered_sum_eval(m: &PermMatrix, pi: &Permutation) -> Result<f64> {
    if pi.n() != m.n {
        return Err(Error::InvalidArguments(format!(
            "permutation size {} does not match matrix size {}",
            pi.n(),
            m.n
        )));
    }
    Ok((1..=m.n).map(|i| m.d(i, pi.get(i))).sum())
}

/// Exact mean and variance of the combinatorial sum.
pub fn comb_sum_moments(m: &PermMatrix) -> (f64, f64) {
    (m.mu, m.sigma2)
}

/// Evaluates the cyclic oscillation sum `W = sum_i a_{pi(i),pi(i+1)}` with
/// `pi(N+1) = pi(1)`.
pub fn oscillation_eval(m: &PermMatrix, pi: &Permutation) -> Result<f64> {
    if pi.n() != m.n {
        return Err(Error::InvalidArguments(
            "permutation/matrix size mismatch".into(),
        ));
    }
    let n = m.n;
    Ok((1..=n)
        .map(|i| {
            let next = if i == n { 1 } else { i + 1 };
            m.a(pi.get(i), pi.get(next))
        })
        .sum())
}

/// Exact mean and variance of the cyclic oscillation sum.
///
/// The mean is `sum_{i != j} a_{ij} / (N - 1)`; the variance combines the
/// centered second moment with two diagonal corrections and the squared
/// diagonal trace.
pub fn oscillation_moments(m: &PermMatrix) -> Result<(f64, f64)> {
    let n = m.n;
    if n < 3 {
        return Err(Error::InvalidSize(format!(
            "oscillation moments need N >= 3, got {n}"
        )));
    }
    let nf = n as f64;
    let mut off_diag_sum = 0.0;
    let mut sum_d2 = 0.0;
    let mut sum_dd_t = 0.0; // sum_{i,j} d_{ij} d_{ji}
    let mut diag_sum = 0.0;
    let mut diag_sq = 0.0;
    for i in 1..=n {
        for j in 1..=n {
            if i != j {
                off_diag_sum += m.a(i, j);
            }
            let dij = m.d(i, j);
            sum_d2 += dij * dij;
            sum_dd_t += dij * m.d(j, i);
        }
        let dii = m.d(i, i);
        diag_sum += dii;
        diag_sq += dii * dii;
    }
    let mean = off_diag_sum / (nf - 1.0);
    let variance = sum_d2 / (nf - 2.0) - sum_dd_t / ((nf - 1.0) * (nf - 2.0))
        + diag_sum * diag_sum / ((nf - 1.0) * (nf - 1.0) * (nf - 2.0))
        - nf * diag_sq / ((nf - 1.0) * (nf - 2.0));
    Ok((mean, variance))
}

/// Exact moments of the survey mean of a size-`n_sample` simple random
/// sample without replacement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurveyMoments {
    pub mean: f64,
    pub variance: f64,
    pub covariance: Option<f64>,
}

/// Mean and variance of the sample mean, with the finite-population
/// correction `(N - n)/(N n)`; covariance with a paired series when `b` is
/// supplied.
pub fn survey_mean_moments(a: &[f64], n_sample: usize, b: Option<&[f64]>) -> Result<SurveyMoments> {
    let n_total = a.len();
    if n_total == 0 {
        return Err(Error::InvalidSize("empty population".into()));
    }
    if n_sample < 1 || n_sample > n_total {
        return Err(Error::InvalidArguments(format!(
            "sample size {n_sample} out of range 1..={n_total}"
        )));
    }
    if let Some(b) = b {
        if b.len() != n_total {
            return Err(Error::InvalidArguments(format!(
                "paired series has length {}, expected {n_total}",
                b.len()
            )));
        }
    }
    let nf = n_total as f64;
    let ns = n_sample as f64;
    let a_bar = a.iter().sum::<f64>() / nf;
    let fpc = (nf - ns) / (nf * ns);
    let ss_a: f64 = a.iter().map(|&v| (v - a_bar) * (v - a_bar)).sum();
    let variance = if n_sample == n_total {
        0.0
    } else {
        fpc * ss_a / (nf - 1.0)
    };
    let covariance = b.map(|b| {
        if n_sample == n_total {
            return 0.0;
        }
        let b_bar = b.iter().sum::<f64>() / nf;
        let cross: f64 = a
            .iter()
            .zip(b)
            .map(|(&x, &y)| (x - a_bar) * (y - b_bar))
            .sum();
        fpc * cross / (nf - 1.0)
    });
    Ok(SurveyMoments {
        mean: a_bar,
        variance,
        covariance,
    })
}

/// Score matrix of length-`m` vectors, with the mean vector and covariance
/// matrix of the vector-valued combinatorial sum.
#[derive(Debug, Clone)]
pub struct VectorPermMatrix {
    n: usize,
    dim: usize,
    entries: Vec<f64>, // [i][j][k] flattened as (i*n + j)*dim + k
    mu: Vec<f64>,
    sigma: Vec<Vec<f64>>,
}

impl VectorPermMatrix {
    pub fn new(entries: &[Vec<Vec<f64>>]) -> Result<Self> {
        let n = entries.len();
        if n < 2 {
            return Err(Error::InvalidSize(
                "vector score matrix needs N >= 2".into(),
            ));
        }
        let dim = entries
            .first()
            .and_then(|r| r.first())
            .map(|v| v.len())
            .unwrap_or(0);
        if dim == 0 {
            return Err(Error::InvalidArguments("zero-dimensional entries".into()));
        }
        let mut flat = Vec::with_capacity(n * n * dim);
        for (i, row) in entries.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Data(format!("row {} is not length {n}", i + 1)));
            }
            for v in row {
                if v.len() != dim {
                    return Err(Error::InvalidArguments(format!(
                        "entry of dimension {}, expected {dim}",
                        v.len()
                    )));
                }
                flat.extend_from_slice(v);
            }
        }

        let nf = n as f64;
        let mut row_mean = vec![0.0; n * dim];
        let mut col_mean = vec![0.0; n * dim];
        let mut grand = vec![0.0; dim];
        for i in 0..n {
            for j in 0..n {
                for k in 0..dim {
                    let v = flat[(i * n + j) * dim + k];
                    row_mean[i * dim + k] += v;
                    col_mean[j * dim + k] += v;
                    grand[k] += v;
                }
            }
        }
        for v in row_mean.iter_mut().chain(col_mean.iter_mut()) {
            *v /= nf;
        }
        for v in grand.iter_mut() {
            *v /= nf * nf;
        }

        let mut sigma = vec![vec![0.0; dim]; dim];
        let mut centered = vec![0.0; dim];
        for i in 0..n {
            for j in 0..n {
                for k in 0..dim {
                    centered[k] =
                        flat[(i * n + j) * dim + k] - row_mean[i * dim + k] - col_mean[j * dim + k]
                            + grand[k];
                }
                for (r, &cr) in centered.iter().enumerate() {
                    for (c, &cc) in centered.iter().enumerate() {
                        sigma[r][c] += cr * cc;
                    }
                }
            }
        }
        for row in sigma.iter_mut() {
            for v in row.iter_mut() {
                *v /= nf - 1.0;
            }
        }
        let mu = grand.iter().map(|&g| g * nf).collect();

        Ok(VectorPermMatrix {
            n,
            dim,
            entries: flat,
            mu,
            sigma,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, i: usize, j: usize) -> &[f64] {
        let base = ((i - 1) * self.n + (j - 1)) * self.dim;
        &self.entries[base..base + self.dim]
    }

    /// Evaluates the vector sum `sum_i a_{i,pi(i)}`.
    pub fn sum_eval(&self, pi: &Permutation) -> Result<Vec<f64>> {
        if pi.n() != self.n {
            return Err(Error::InvalidArguments(
                "permutation/matrix size mismatch".into(),
            ));
        }
        let mut out = vec![0.0; self.dim];
        for i in 1..=self.n {
            for (k, o) in out.iter_mut().enumerate() {
                *o += self.entry(i, pi.get(i))[k];
            }
        }
        Ok(out)
    }
}

/// Exact mean vector and covariance matrix of the vector combinatorial sum.
pub fn multivariate_moments(v: &VectorPermMatrix) -> (Vec<f64>, Vec<Vec<f64>>) {
    (v.mu.clone(), v.sigma.clone())
}

// ---------------------------------------------------------------------------
// Built-in matrix corpus
// ---------------------------------------------------------------------------

/// `a_{ij} = |i - j|`, the disarray score behind Spearman's footrule.
pub fn footrule_matrix(n: usize) -> Result<PermMatrix> {
    PermMatrix::new(
        &(1..=n)
            .map(|i| (1..=n).map(|j| i.abs_diff(j) as f64).collect())
            .collect::<Vec<_>>(),
    )
}

/// `a_{ij} = i * j`, the product score behind Spearman's rho.
pub fn rho_matrix(n: usize) -> Result<PermMatrix> {
    PermMatrix::new(
        &(1..=n)
            .map(|i| (1..=n).map(|j| (i * j) as f64).collect())
            .collect::<Vec<_>>(),
    )
}

/// A rank-one score `a_{ij} = a_i b_j` with the factor sequences returned
/// alongside the matrix (the factors feed the rank-one tail bound).
pub struct RankOneMatrix {
    pub matrix: PermMatrix,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

/// Deterministic rank-one score with `a_i = i`, `b_j = j^2`.
pub fn rank_one_matrix(n: usize) -> Result<RankOneMatrix> {
    let a: Vec<f64> = (1..=n).map(|i| i as f64).collect();
    let b: Vec<f64> = (1..=n).map(|j| (j * j) as f64).collect();
    let rows: Vec<Vec<f64>> = a
        .iter()
        .map(|&ai| b.iter().map(|&bj| ai * bj).collect())
        .collect();
    Ok(RankOneMatrix {
        matrix: PermMatrix::new(&rows)?,
        a,
        b,
    })
}

/// Seeded random score with entries uniform on [-1, 1].
pub fn random_matrix(n: usize, seed: u64) -> Result<PermMatrix> {
    let mut rng = RngState::new(seed, 0);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..n).map(|_| 2.0 * rng.next_f64() - 1.0).collect())
        .collect();
    PermMatrix::new(&rows)
}

/// Seeded random integer score with entries in `{-5, ..., 5}` (exact sums
/// under enumeration).
pub fn random_int_matrix(n: usize, seed: u64) -> Result<PermMatrix> {
    let mut rng = RngState::new(seed, 1);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..n).map(|_| rng.bounded(11) as f64 - 5.0).collect())
        .collect();
    PermMatrix::new(&rows)
}
