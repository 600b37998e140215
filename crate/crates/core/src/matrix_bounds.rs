//! Combinatorial sums of symmetric matrices and their spectral-norm tail
//! bounds.
//!
//! A family `{A_{i,j}}` of d x d symmetric matrices plays the role of the
//! scalar score matrix; the random object is `sum_i A_{i,pi(i)}` and the
//! bounds control the probability that its operator norm exceeds `t`. The
//! hypotheses require only global centering `sum_{i,j} A_{i,j} = 0`, not
//! row/column centering.

use crate::eigen::{op_norm, SquareMat, MAX_DIM};
use crate::error::{Error, Result};
use crate::moments::PermMatrix;
use crate::perm::Permutation;
use crate::rng::RngState;

/// An N x N family of d x d symmetric matrices with its variance proxies.
#[derive(Debug, Clone)]
pub struct SymMatrixFamily {
    n: usize,
    dim: usize,
    entries: Vec<SquareMat>, // row-major: entry (i, j) at index (i-1) n + (j-1)
    m_bound: f64,
    sigma2: f64,
    centered: bool,
}

impl SymMatrixFamily {
    /// Builds a family, validating symmetry of every entry and computing
    /// `M = max ||A_{i,j}||_op` and `sigma^2 = ||sum A_{i,j}^2||_op / N`.
    pub fn new(entries: Vec<Vec<SquareMat>>) -> Result<Self> {
        let n = entries.len();
        if n < 2 {
            return Err(Error::InvalidSize("matrix family needs N >= 2".into()));
        }
        let dim = entries[0].first().map(|m| m.dim()).unwrap_or(0);
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::InvalidSize(format!(
                "matrix dimension must be in 1..={MAX_DIM}"
            )));
        }
        let mut flat = Vec::with_capacity(n * n);
        let mut scale = 0.0f64;
        for row in &entries {
            if row.len() != n {
                return Err(Error::InvalidArguments("family is not N x N".into()));
            }
            for m in row {
                if m.dim() != dim {
                    return Err(Error::InvalidArguments("mixed matrix dimensions".into()));
                }
                scale = scale.max(m.max_abs());
            }
        }
        for row in entries {
            for m in row {
                if m.asymmetry() > 1e-12 * (1.0 + scale) {
                    return Err(Error::InvalidArguments(format!(
                        "family entry is not symmetric (defect {:.3e})",
                        m.asymmetry()
                    )));
                }
                flat.push(m);
            }
        }
        let (m_bound, sigma2) = family_features(&flat, n, dim)?;
        let centered = total_sum(&flat, dim).max_abs() <= 1e-10 * (1.0 + scale);
        Ok(SymMatrixFamily {
            n,
            dim,
            entries: flat,
            m_bound,
            sigma2,
            centered,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `max_{i,j} ||A_{i,j}||_op`
    pub fn m_bound(&self) -> f64 {
        self.m_bound
    }

    /// `||sum_{i,j} A_{i,j}^2||_op / N`
    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn is_centered(&self) -> bool {
        self.centered
    }

    pub fn entry(&self, i: usize, j: usize) -> &SquareMat {
        &self.entries[(i - 1) * self.n + (j - 1)]
    }

    /// A d = 1 family wrapping the centered entries of a scalar score
    /// matrix.
    pub fn from_centered_scalar(m: &PermMatrix) -> Result<Self> {
        let n = m.n();
        let entries: Vec<Vec<SquareMat>> = (1..=n)
            .map(|i| {
                (1..=n)
                    .map(|j| {
                        let mut s = SquareMat::zeros(1);
                        s.set(0, 0, m.d(i, j));
                        s
                    })
                    .collect()
            })
            .collect();
        SymMatrixFamily::new(entries)
    }
}

fn total_sum(flat: &[SquareMat], dim: usize) -> SquareMat {
    let mut total = SquareMat::zeros(dim);
    for m in flat {
        total.add_assign(m);
    }
    total
}

fn family_features(flat: &[SquareMat], n: usize, dim: usize) -> Result<(f64, f64)> {
    let mut m_bound = 0.0f64;
    let mut sum_sq = SquareMat::zeros(dim);
    for m in flat {
        m_bound = m_bound.max(op_norm(m)?);
        sum_sq.add_assign(&m.matmul(m));
    }
    let sigma2 = op_norm(&sum_sq)? / n as f64;
    Ok((m_bound, sigma2))
}

/// Subtracts the grand average `(1/N^2) sum A` from every entry so the
/// family satisfies the centering hypothesis, then recomputes features.
pub fn center_family(family: &SymMatrixFamily) -> Result<SymMatrixFamily> {
    let n = family.n;
    let dim = family.dim;
    let mut avg = total_sum(&family.entries, dim);
    avg.scale(1.0 / (n * n) as f64);
    let flat: Vec<SquareMat> = family.entries.iter().map(|m| m.sub(&avg)).collect();
    let (m_bound, sigma2) = family_features(&flat, n, dim)?;
    Ok(SymMatrixFamily {
        n,
        dim,
        entries: flat,
        m_bound,
        sigma2,
        centered: true,
    })
}

/// Evaluates `sum_i A_{i,pi(i)}`.
pub fn matrix_comb_sum(family: &SymMatrixFamily, pi: &Permutation) -> Result<SquareMat> {
    if pi.n() != family.n {
        return Err(Error::InvalidArguments(
            "permutation/family size mismatch".into(),
        ));
    }
    let mut total = SquareMat::zeros(family.dim);
    for i in 1..=family.n {
        total.add_assign(family.entry(i, pi.get(i)));
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixBoundKind {
    Hoeffding,
    Bernstein,
}

/// Spectral-norm tail bound for the matrix combinatorial sum of a centered
/// family: Hoeffding `2d exp(-t^2/(24 N M^2))` or Bernstein
/// `2d exp(-t^2/(12 sigma^2 + 4 sqrt(2) M t))`.
pub fn matrix_tail_bound(kind: MatrixBoundKind, family: &SymMatrixFamily, t: f64) -> Result<f64> {
    if !family.centered {
        return Err(Error::InvalidArguments(
            "matrix tail bounds require a centered family".into(),
        ));
    }
    let spec = match kind {
        MatrixBoundKind::Hoeffding => crate::bounds::TailBoundSpec::MatrixHoeffding {
            m_bound: family.m_bound,
            n: family.n,
            dim: family.dim,
        },
        MatrixBoundKind::Bernstein => crate::bounds::TailBoundSpec::MatrixBernstein {
            sigma2: family.sigma2,
            m_bound: family.m_bound,
            dim: family.dim,
        },
    };
    spec.eval(t)
}

/// Draws `||sum_i A_{i,pi(i)}||_op` for a uniform permutation: the sampler
/// for Monte Carlo domination checks.
pub fn op_norm_draw(family: &SymMatrixFamily, rng: &mut RngState) -> Result<f64> {
    let pi = crate::perm::random_permutation(family.n, rng)?;
    op_norm(&matrix_comb_sum(family, &pi)?)
}

/// A seeded random centered family with entries built from uniform [-1, 1]
/// symmetric matrices.
pub fn random_centered_family(n: usize, dim: usize, seed: u64) -> Result<SymMatrixFamily> {
    let mut rng = RngState::new(seed, 2);
    let entries: Vec<Vec<SquareMat>> = (0..n)
        .map(|_| {
            (0..n)
                .map(|_| {
                    let mut m = SquareMat::zeros(dim);
                    for i in 0..dim {
                        for j in i..dim {
                            let v = 2.0 * rng.next_f64() - 1.0;
                            m.set(i, j, v);
                            m.set(j, i, v);
                        }
                    }
                    m
                })
                .collect()
        })
        .collect();
    center_family(&SymMatrixFamily::new(entries)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::{domination_check, domination_passes, empirical_tail, TailBoundSpec};
    use crate::moments::footrule_matrix;
    use crate::perm::enumerate_permutations;

    #[test]
    fn scalar_family_from_footrule() {
        let m = footrule_matrix(3).unwrap();
        let fam = SymMatrixFamily::from_centered_scalar(&m).unwrap();
        assert!(fam.is_centered());
        assert!((fam.sigma2() - 40.0 / 27.0).abs() < 1e-12);
        assert!((fam.m_bound() - 10.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn scalar_family_sum_matches_centered_sum() {
        let m = footrule_matrix(4).unwrap();
        let fam = SymMatrixFamily::from_centered_scalar(&m).unwrap();
        for p in enumerate_permutations(4).unwrap() {
            let s = matrix_comb_sum(&fam, &p).unwrap();
            let y = crate::moments::centered_sum_eval(&m, &p).unwrap();
            assert!((s.get(0, 0) - y).abs() < 1e-12);
        }
    }

    #[test]
    fn centering_already_centered_family_is_identity() {
        let fam = random_centered_family(4, 2, 3).unwrap();
        let again = center_family(&fam).unwrap();
        for i in 1..=4 {
            for j in 1..=4 {
                assert!(fam.entry(i, j).sub(again.entry(i, j)).max_abs() < 1e-12);
            }
        }
    }

    #[test]
    fn constant_family_centers_to_zero() {
        let mut c = SquareMat::zeros(2);
        c.set(0, 0, 1.0);
        c.set(1, 1, -2.0);
        let entries: Vec<Vec<SquareMat>> = vec![vec![c.clone(); 3]; 3];
        let fam = center_family(&SymMatrixFamily::new(entries).unwrap()).unwrap();
        assert_eq!(fam.m_bound(), 0.0);
        assert_eq!(fam.sigma2(), 0.0);
    }

    #[test]
    fn diagonal_families_decouple() {
        // diag entries act coordinatewise
        let n = 3usize;
        let entries: Vec<Vec<SquareMat>> = (1..=n)
            .map(|i| {
                (1..=n)
                    .map(|j| {
                        let mut m = SquareMat::zeros(2);
                        m.set(0, 0, (i * j) as f64);
                        m.set(1, 1, (i + j) as f64);
                        m
                    })
                    .collect()
            })
            .collect();
        let fam = SymMatrixFamily::new(entries).unwrap();
        let pi = Permutation::from_images(&[2, 3, 1]).unwrap();
        let s = matrix_comb_sum(&fam, &pi).unwrap();
        let diag0: f64 = (1..=n).map(|i| (i * pi.get(i)) as f64).sum();
        let diag1: f64 = (1..=n).map(|i| (i + pi.get(i)) as f64).sum();
        assert_eq!(s.get(0, 0), diag0);
        assert_eq!(s.get(1, 1), diag1);
        assert_eq!(s.get(0, 1), 0.0);
    }

    #[test]
    fn centered_family_mean_sum_is_zero_under_enumeration() {
        let fam = random_centered_family(4, 2, 7).unwrap();
        let mut mean = SquareMat::zeros(2);
        let mut count = 0.0;
        for p in enumerate_permutations(4).unwrap() {
            mean.add_assign(&matrix_comb_sum(&fam, &p).unwrap());
            count += 1.0;
        }
        mean.scale(1.0 / count);
        assert!(mean.max_abs() < 1e-12);
    }

    #[test]
    fn bound_prefactor_and_scalar_reduction() {
        let fam = random_centered_family(5, 3, 1).unwrap();
        assert_eq!(
            matrix_tail_bound(MatrixBoundKind::Hoeffding, &fam, 0.0).unwrap(),
            6.0
        );
        // d = 1 Bernstein is exactly twice the scalar Bernstein formula at
        // the same variance proxy and sup bound
        let m = footrule_matrix(4).unwrap();
        let fam1 = SymMatrixFamily::from_centered_scalar(&m).unwrap();
        let scalar = TailBoundSpec::CombBernstein {
            sigma2: fam1.sigma2(),
            b_max: fam1.m_bound(),
        };
        for k in 0..8 {
            let t = 0.5 * k as f64;
            let mat = matrix_tail_bound(MatrixBoundKind::Bernstein, &fam1, t).unwrap();
            assert!((mat - 2.0 * scalar.eval(t).unwrap()).abs() < 1e-14);
        }
    }

    #[test]
    fn uncentered_family_is_rejected() {
        let mut c = SquareMat::zeros(2);
        c.set(0, 0, 1.0);
        let entries: Vec<Vec<SquareMat>> = vec![vec![c.clone(); 2]; 2];
        let fam = SymMatrixFamily::new(entries).unwrap();
        assert!(!fam.is_centered());
        assert!(matrix_tail_bound(MatrixBoundKind::Hoeffding, &fam, 1.0).is_err());
    }

    #[test]
    fn asymmetric_entry_is_rejected() {
        let mut bad = SquareMat::zeros(2);
        bad.set(0, 1, 1.0);
        let entries: Vec<Vec<SquareMat>> = vec![vec![bad.clone(); 2]; 2];
        assert!(SymMatrixFamily::new(entries).is_err());
    }

    #[test]
    fn footrule_scalar_family_bernstein_value_and_domination() {
        let m = footrule_matrix(3).unwrap();
        let fam = SymMatrixFamily::from_centered_scalar(&m).unwrap();
        let b = matrix_tail_bound(MatrixBoundKind::Bernstein, &fam, 2.0).unwrap();
        let denom = 12.0 * 40.0 / 27.0 + 4.0 * 2f64.sqrt() * (10.0 / 9.0) * 2.0;
        assert!((b - 2.0 * (-4.0f64 / denom).exp()).abs() < 1e-12);

        let famc = fam.clone();
        let sampler = move |r: &mut RngState| op_norm_draw(&famc, r).unwrap();
        let emp = empirical_tail(&sampler, &[1.0, 2.0], 10_000, RngState::new(4, 0)).unwrap();
        let spec = TailBoundSpec::MatrixBernstein {
            sigma2: fam.sigma2(),
            m_bound: fam.m_bound(),
            dim: 1,
        };
        assert!(domination_passes(&domination_check(&spec, &emp).unwrap()));
    }

    #[test]
    fn both_bounds_dominate_random_families() {
        for &dim in &[2usize, 3] {
            let fam = random_centered_family(20, dim, 5).unwrap();
            let sigma = fam.sigma2().sqrt();
            let grid: Vec<f64> = [0.5, 1.0, 2.0, 3.0, 4.0]
                .iter()
                .map(|&c| c * sigma)
                .collect();
            let famc = fam.clone();
            let sampler = move |r: &mut RngState| op_norm_draw(&famc, r).unwrap();
            let emp = empirical_tail(&sampler, &grid, 10_000, RngState::new(6, 0)).unwrap();
            for kind in [MatrixBoundKind::Hoeffding, MatrixBoundKind::Bernstein] {
                let spec = match kind {
                    MatrixBoundKind::Hoeffding => TailBoundSpec::MatrixHoeffding {
                        m_bound: fam.m_bound(),
                        n: fam.n(),
                        dim,
                    },
                    MatrixBoundKind::Bernstein => TailBoundSpec::MatrixBernstein {
                        sigma2: fam.sigma2(),
                        m_bound: fam.m_bound(),
                        dim,
                    },
                };
                let rows = domination_check(&spec, &emp).unwrap();
                assert!(domination_passes(&rows), "{:?} bound violated", kind);
            }
        }
    }
}
