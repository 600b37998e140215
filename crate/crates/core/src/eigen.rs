//! Small dense symmetric matrices: cyclic Jacobi eigensolver and the
//! eigenvalue-thresholded pseudo-inverse.
//!
//! Jacobi is the simplest provably convergent method for symmetric matrices
//! and is deterministic, which is what the verification suites need; the
//! dimension is capped at 64.

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 64;
const MAX_SWEEPS: usize = 64;

/// A dense square matrix in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMat {
    dim: usize,
    data: Vec<f64>,
}

impl SquareMat {
    pub fn zeros(dim: usize) -> Self {
        SquareMat {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = SquareMat::zeros(dim);
        for i in 0..dim {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::Data("matrix is not square".into()));
            }
            for &v in row {
                if !v.is_finite() {
                    return Err(Error::Data("non-finite matrix entry".into()));
                }
                data.push(v);
            }
        }
        Ok(SquareMat { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] = v;
    }

    pub fn add_assign(&mut self, other: &SquareMat) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    pub fn scale(&mut self, s: f64) {
        for a in self.data.iter_mut() {
            *a *= s;
        }
    }

    pub fn sub(&self, other: &SquareMat) -> SquareMat {
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        SquareMat {
            dim: self.dim,
            data,
        }
    }

    pub fn matmul(&self, other: &SquareMat) -> SquareMat {
        let d = self.dim;
        let mut out = SquareMat::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let aik = self.get(i, k);
                if aik == 0.0 {
                    continue;
                }
                for j in 0..d {
                    out.data[i * d + j] += aik * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j) * v[j]).sum())
            .collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Largest absolute asymmetry `|a_ij - a_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in i + 1..self.dim {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    fn check_symmetric(&self) -> Result<()> {
        if self.dim > MAX_DIM {
            return Err(Error::InvalidSize(format!(
                "dimension {} exceeds the {MAX_DIM} cap",
                self.dim
            )));
        }
        let tol = 1e-12 * (1.0 + self.max_abs());
        if self.asymmetry() > tol {
            return Err(Error::InvalidArguments(format!(
                "matrix is not symmetric (defect {:.3e})",
                self.asymmetry()
            )));
        }
        Ok(())
    }
}

fn off_diagonal_norm(m: &SquareMat) -> f64 {
    let mut s = 0.0;
    for i in 0..m.dim() {
        for j in 0..m.dim() {
            if i != j {
                s += m.get(i, j) * m.get(i, j);
            }
        }
    }
    s.sqrt()
}

/// Eigenvalues (descending) and orthonormal eigenvectors (columns of the
/// returned matrix) of a symmetric matrix, via cyclic Jacobi rotations until
/// the off-diagonal norm falls below `1e-12 * ||S||_F`.
pub fn sym_eigen_full(s: &SquareMat) -> Result<(Vec<f64>, SquareMat)> {
    s.check_symmetric()?;
    let d = s.dim();
    let mut a = s.clone();
    // symmetrize exactly so roundoff asymmetry cannot drift
    for i in 0..d {
        for j in i + 1..d {
            let v = 0.5 * (a.get(i, j) + a.get(j, i));
            a.set(i, j, v);
            a.set(j, i, v);
        }
    }
    let mut v = SquareMat::identity(d);
    let target = 1e-12 * (1.0 + a.frobenius_norm());

    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a) <= target {
            break;
        }
        for p in 0..d {
            for q in p + 1..d {
                let apq = a.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                let app = a.get(p, p);
                let aqq = a.get(q, q);
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let sn = t * c;

                for k in 0..d {
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    a.set(k, p, c * akp - sn * akq);
                    a.set(k, q, sn * akp + c * akq);
                }
                for k in 0..d {
                    let apk = a.get(p, k);
                    let aqk = a.get(q, k);
                    a.set(p, k, c * apk - sn * aqk);
                    a.set(q, k, sn * apk + c * aqk);
                }
                for k in 0..d {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - sn * vkq);
                    v.set(k, q, sn * vkp + c * vkq);
                }
            }
        }
    }

    let mut pairs: Vec<(f64, usize)> = (0..d).map(|i| (a.get(i, i), i)).collect();
    pairs.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap());
    let values: Vec<f64> = pairs.iter().map(|&(lam, _)| lam).collect();
    let mut vectors = SquareMat::zeros(d);
    for (new_col, &(_, old_col)) in pairs.iter().enumerate() {
        for k in 0..d {
            vectors.set(k, new_col, v.get(k, old_col));
        }
    }
    Ok((values, vectors))
}

/// Eigenvalues of a symmetric matrix, sorted descending.
pub fn sym_eigen(s: &SquareMat) -> Result<Vec<f64>> {
    Ok(sym_eigen_full(s)?.0)
}

/// Operator (spectral) norm of a symmetric matrix: the largest absolute
/// eigenvalue.
pub fn op_norm(s: &SquareMat) -> Result<f64> {
    let ev = sym_eigen(s)?;
    Ok(ev.iter().fold(0.0f64, |m, &lam| m.max(lam.abs())))
}

/// Pseudo-inverse of a symmetric PSD matrix: eigenvalues at or below
/// `tol * lambda_max` are zeroed, the rest inverted.
pub fn pinv_psd(s: &SquareMat, tol: f64) -> Result<SquareMat> {
    let (values, vectors) = sym_eigen_full(s)?;
    let d = s.dim();
    let lam_max = values.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    let cut = tol * lam_max;
    let mut out = SquareMat::zeros(d);
    for (k, &lam) in values.iter().enumerate() {
        if lam <= cut {
            continue;
        }
        let inv = 1.0 / lam;
        for i in 0..d {
            let vik = vectors.get(i, k);
            if vik == 0.0 {
                continue;
            }
            for j in 0..d {
                let add = inv * vik * vectors.get(j, k);
                out.set(i, j, out.get(i, j) + add);
            }
        }
    }

    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngState;

    fn random_symmetric(dim: usize, seed: u64) -> SquareMat {
        let mut rng = RngState::new(seed, 0);
        let mut m = SquareMat::zeros(dim);
        for i in 0..dim {
            for j in i..dim {
                let v = 2.0 * rng.next_f64() - 1.0;
                m.set(i, j, v);
                m.set(j, i, v);
            }
        }
        m
    }

    #[test]
    fn diagonal_spectrum() {
        let m = SquareMat::from_rows(&[vec![2.0, 0.0], vec![0.0, -3.0]]).unwrap();
        let ev = sym_eigen(&m).unwrap();
        assert_eq!(ev, vec![2.0, -3.0]);
        assert_eq!(op_norm(&m).unwrap(), 3.0);
    }

    #[test]
    fn swap_matrix_spectrum() {
        let m = SquareMat::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let ev = sym_eigen(&m).unwrap();
        assert!((ev[0] - 1.0).abs() < 1e-12);
        assert!((ev[1] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn trace_identities_on_random_matrices() {
        for seed in 0..5u64 {
            let m = random_symmetric(5, seed);
            let ev = sym_eigen(&m).unwrap();
            let sum: f64 = ev.iter().sum();
            let sumsq: f64 = ev.iter().map(|v| v * v).sum();
            assert!((sum - m.trace()).abs() < 1e-10);
            let frob2 = m.frobenius_norm().powi(2);
            assert!((sumsq - frob2).abs() < 1e-10);
        }
    }

    #[test]
    fn two_by_two_matches_characteristic_roots() {
        let mut rng = RngState::new(4, 0);
        for _ in 0..200 {
            let a = 4.0 * rng.next_f64() - 2.0;
            let b = 4.0 * rng.next_f64() - 2.0;
            let c = 4.0 * rng.next_f64() - 2.0;
            let m = SquareMat::from_rows(&[vec![a, b], vec![b, c]]).unwrap();
            let ev = sym_eigen(&m).unwrap();
            let mid = (a + c) / 2.0;
            let rad = (((a - c) / 2.0).powi(2) + b * b).sqrt();
            assert!((ev[0] - (mid + rad)).abs() < 1e-10);
            assert!((ev[1] - (mid - rad)).abs() < 1e-10);
        }
    }

    #[test]
    fn eigenvectors_reconstruct_matrix() {
        let m = random_symmetric(6, 9);
        let (values, vectors) = sym_eigen_full(&m).unwrap();
        let d = m.dim();
        let mut recon = SquareMat::zeros(d);
        for (k, &lam) in values.iter().enumerate() {
            for i in 0..d {
                for j in 0..d {
                    let add = lam * vectors.get(i, k) * vectors.get(j, k);
                    recon.set(i, j, recon.get(i, j) + add);
                }
            }
        }
        assert!(recon.sub(&m).max_abs() < 1e-10);
    }

    #[test]
    fn rejects_asymmetric_input() {
        let m = SquareMat::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]).unwrap();
        assert!(sym_eigen(&m).is_err());
    }

    #[test]
    fn pinv_of_identity_and_rank_deficient_diagonal() {
        let id = SquareMat::identity(3);
        let p = pinv_psd(&id, 1e-10).unwrap();
        assert!(p.sub(&id).max_abs() < 1e-12);

        let m = SquareMat::from_rows(&[vec![2.0, 0.0], vec![0.0, 0.0]]).unwrap();
        let p = pinv_psd(&m, 1e-10).unwrap();
        assert!((p.get(0, 0) - 0.5).abs() < 1e-12);
        assert!(p.get(1, 1).abs() < 1e-12);
    }

    #[test]
    fn pinv_reconstruction_identity() {
        // S S^- S = S for random PSD matrices
        let mut rng = RngState::new(12, 0);
        for _ in 0..10 {
            let dim = 4;
            let mut b = SquareMat::zeros(dim);
            for i in 0..dim {
                for j in 0..dim {
                    b.set(i, j, 2.0 * rng.next_f64() - 1.0);
                }
            }
            // S = B^T B is PSD
            let mut s = SquareMat::zeros(dim);
            for i in 0..dim {
                for j in 0..dim {
                    let v: f64 = (0..dim).map(|k| b.get(k, i) * b.get(k, j)).sum();
                    s.set(i, j, v);
                }
            }
            let p = pinv_psd(&s, 1e-10).unwrap();
            let recon = s.matmul(&p).matmul(&s);
            let scale = 1.0 + s.max_abs();
            assert!(recon.sub(&s).max_abs() < 1e-8 * scale);
        }
    }
}
