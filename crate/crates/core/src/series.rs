//! Series least-squares regression on a finite population and on a sample
//! drawn without replacement, with the diagnostics that bound the sampling
//! loss of the sample fit.
//!
//! The population projection solves `Q beta = P_N[p y]` with
//! `Q = P_N[p p^T]` through the eigenvalue-thresholded pseudo-inverse; the
//! sample fit is the same construction on the selected units. The loss
//! between them is the quadratic form `(beta_hat - beta)^T Q (beta_hat -
//! beta)`, and the diagnostics `A_N`, `B_N^2`, `gamma_N` combine into the
//! rate envelope `lambda_K^{-1} (A_N^2 gamma_N + B_N^2)`.

use crate::eigen::{pinv_psd, sym_eigen, SquareMat};
use crate::error::{Error, Result};
use crate::perm::SampleMask;

/// Eigenvalues at or below `PINV_TOL * lambda_max` are treated as zero.
pub const PINV_TOL: f64 = 1e-10;

/// A finite family of basis functions of a scalar covariate.
#[derive(Debug, Clone, PartialEq)]
pub enum BasisSpec {
    /// Raw monomials `(1, x, ..., x^{K-1})`. Ill-conditioned beyond K ~ 6;
    /// use the piecewise basis when conditioning matters.
    Polynomial { k: usize },
    /// One-hot indicators of the cells between consecutive knots; the last
    /// cell is closed on the right.
    PiecewiseConstant { knots: Vec<f64> },
}

impl BasisSpec {
    pub fn polynomial(k: usize) -> Result<Self> {
        if k < 1 {
            return Err(Error::InvalidArguments("need K >= 1".into()));
        }
        Ok(BasisSpec::Polynomial { k })
    }

    pub fn piecewise(knots: Vec<f64>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::InvalidArguments("need at least 2 knots".into()));
        }
        if knots.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArguments(
                "knots must be strictly increasing".into(),
            ));
        }
        Ok(BasisSpec::PiecewiseConstant { knots })
    }

    /// Number of basis functions.
    pub fn k(&self) -> usize {
        match self {
            BasisSpec::Polynomial { k } => *k,
            BasisSpec::PiecewiseConstant { knots } => knots.len() - 1,
        }
    }

    /// The basis vector at `x`.
    pub fn eval(&self, x: f64) -> Result<Vec<f64>> {
        match self {
            BasisSpec::Polynomial { k } => {
                let mut out = Vec::with_capacity(*k);
                let mut pow = 1.0;
                for _ in 0..*k {
                    out.push(pow);
                    pow *= x;
                }
                Ok(out)
            }
            BasisSpec::PiecewiseConstant { knots } => {
                let k = knots.len() - 1;
                if x < knots[0] || x > knots[k] {
                    return Err(Error::InvalidArguments(format!(
                        "x = {x} outside the knot range [{}, {}]",
                        knots[0], knots[k]
                    )));
                }
                let mut out = vec![0.0; k];
                let cell = if x == knots[k] {
                    k - 1
                } else {
                    knots.iter().rposition(|&t| t <= x).unwrap().min(k - 1)
                };
                out[cell] = 1.0;
                Ok(out)
            }
        }
    }

    /// `zeta_K = max_i ||p(x_i)||_2` over the data points.
    pub fn zeta(&self, xs: &[f64]) -> Result<f64> {
        let mut worst = 0.0f64;
        for &x in xs {
            let p = self.eval(x)?;
            worst = worst.max(p.iter().map(|v| v * v).sum::<f64>().sqrt());
        }
        Ok(worst)
    }
}

/// A least-squares fit with its design second-moment matrix and the spectral
/// quantities used by the diagnostics.
#[derive(Debug, Clone)]
pub struct SeriesFit {
    pub beta: Vec<f64>,
    pub q: SquareMat,
    pub lambda_min: f64,
    pub zeta: f64,
    pub rank_deficient: bool,
}

fn fit_from_points(xs: &[f64], ys: &[f64], spec: &BasisSpec, zeta: f64) -> Result<SeriesFit> {
    let n = xs.len();
    let k = spec.k();
    let mut q = SquareMat::zeros(k);
    let mut rhs = vec![0.0; k];
    for (&x, &y) in xs.iter().zip(ys) {
        let p = spec.eval(x)?;
        for i in 0..k {
            rhs[i] += p[i] * y;
            for j in 0..k {
                q.set(i, j, q.get(i, j) + p[i] * p[j]);
            }
        }
    }
    let nf = n as f64;
    q.scale(1.0 / nf);
    for r in rhs.iter_mut() {
        *r /= nf;
    }
    let eigenvalues = sym_eigen(&q)?;
    let lambda_max = eigenvalues.first().copied().unwrap_or(0.0).max(0.0);
    let lambda_min = *eigenvalues.last().unwrap();
    let rank_deficient = lambda_min <= PINV_TOL * lambda_max;
    let q_pinv = pinv_psd(&q, PINV_TOL)?;
    let beta = q_pinv.matvec(&rhs);
    Ok(SeriesFit {
        beta,
        q,
        lambda_min,
        zeta,
        rank_deficient,
    })
}

/// Least-squares projection of `y` on the basis over the whole population.
pub fn population_fit(xs: &[f64], ys: &[f64], spec: &BasisSpec) -> Result<SeriesFit> {
    if xs.is_empty() || xs.len() != ys.len() {
        return Err(Error::InvalidArguments(
            "x and y must be nonempty and equal length".into(),
        ));
    }
    fit_from_points(xs, ys, spec, spec.zeta(xs)?)
}

/// The same projection on the units selected by the mask.
pub fn sample_fit(
    xs: &[f64],
    ys: &[f64],
    mask: &SampleMask,
    spec: &BasisSpec,
) -> Result<SeriesFit> {
    if xs.len() != ys.len() {
        return Err(Error::InvalidArguments("x and y length mismatch".into()));
    }
    if mask.n_total() != xs.len() {
        return Err(Error::InvalidArguments(
            "mask does not match the population size".into(),
        ));
    }
    let idx = mask.selected_indices();
    let sx: Vec<f64> = idx.iter().map(|&i| xs[i]).collect();
    let sy: Vec<f64> = idx.iter().map(|&i| ys[i]).collect();
    // zeta stays a population quantity
    fit_from_points(&sx, &sy, spec, spec.zeta(xs)?)
}

/// `(beta_hat - beta)^T Q (beta_hat - beta)` with `Q` from the population
/// fit; equals the population mean square of the fitted-function gap.
pub fn reg_loss(fit_hat: &SeriesFit, fit_pop: &SeriesFit) -> Result<f64> {
    let k = fit_pop.beta.len();
    if fit_hat.beta.len() != k {
        return Err(Error::InvalidArguments("fits have different K".into()));
    }
    let diff: Vec<f64> = fit_hat
        .beta
        .iter()
        .zip(&fit_pop.beta)
        .map(|(a, b)| a - b)
        .collect();
    let qd = fit_pop.q.matvec(&diff);
    Ok(diff.iter().zip(&qd).map(|(a, b)| a * b).sum())
}

/// The loss-rate diagnostics of a design at sample size `n_sample`.
#[derive(Debug, Clone, Copy)]
pub struct RegDiagnostics {
    pub a_n: f64,
    pub b_n2: f64,
    pub gamma_n: f64,
    pub lambda_min: f64,
    pub zeta: f64,
    /// `lambda_min^{-1} (A_N^2 gamma_N + B_N^2)`, the rate envelope up to a
    /// universal constant.
    pub envelope: f64,
}

/// Computes `A_N`, `B_N^2`, and `gamma_N` for the population design.
///
/// `A_N = (1 + lambda^{-1/2} zeta) sqrt(log K / n)
///        + (1 + lambda^{-1} zeta^2) (log K / n)`;
/// `B_N^2 = (1/n) sum_j P_N (y p_j - P_N[y p_j])^2` (the sharp
/// finite-population factor: the exact second moment carries the correction
/// `(N-n)/(N-1) <= 1`); `gamma_N = 2 (B_N^2 + ||P_N[y p]||^2)`, an upper
/// bound for the mean squared sample moment vector.
pub fn reg_diagnostics(
    xs: &[f64],
    ys: &[f64],
    spec: &BasisSpec,
    n_sample: usize,
) -> Result<RegDiagnostics> {
    if xs.is_empty() || xs.len() != ys.len() {
        return Err(Error::InvalidArguments(
            "x and y must be nonempty and equal length".into(),
        ));
    }
    if n_sample < 1 || n_sample > xs.len() {
        return Err(Error::InvalidArguments("bad sample size".into()));
    }
    let fit = population_fit(xs, ys, spec)?;
    let k = spec.k();
    let nf = xs.len() as f64;
    let ns = n_sample as f64;

    // moment vector m_j = P_N[y p_j] and the centered second moments
    let mut moment = vec![0.0; k];
    let mut raw: Vec<Vec<f64>> = vec![Vec::with_capacity(xs.len()); k];
    for (&x, &y) in xs.iter().zip(ys) {
        let p = spec.eval(x)?;
        for j in 0..k {
            moment[j] += p[j] * y / nf;
            raw[j].push(p[j] * y);
        }
    }
    let mut b_n2 = 0.0;
    for j in 0..k {
        let var: f64 = raw[j]
            .iter()
            .map(|&v| (v - moment[j]) * (v - moment[j]))
            .sum::<f64>()
            / nf;
        b_n2 += var;
    }
    b_n2 /= ns;

    let moment_norm2: f64 = moment.iter().map(|v| v * v).sum();
    let gamma_n = 2.0 * (b_n2 + moment_norm2);

    let lambda = fit.lambda_min.max(0.0);
    let zeta = fit.zeta;
    let log_k_over_n = (k as f64).ln() / ns;
    let a_n = if lambda > 0.0 {
        (1.0 + zeta / lambda.sqrt()) * log_k_over_n.sqrt()
            + (1.0 + zeta * zeta / lambda) * log_k_over_n
    } else {
        f64::INFINITY
    };
    let envelope = if lambda > 0.0 {
        (a_n * a_n * gamma_n + b_n2) / lambda
    } else {
        f64::INFINITY
    };
    Ok(RegDiagnostics {
        a_n,
        b_n2,
        gamma_n,
        lambda_min: fit.lambda_min,
        zeta,
        envelope,
    })
}
