use crate::linalg::Matrix;
use crate::Scalar;

use super::{is_hurwitz, positive, RegulatorError, StructureParams};

/// Gains of the static stabiliser
/// `u = ℒ(K_χ χ + K_ζ ζ + K_η η₁ + K_w ν)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilizerParams<T> {
    pub l: T,
    pub delta: T,
    /// One coefficient row per chain; row `i` has length `n_χⁱ`.
    pub c: Vec<Vec<T>>,
    /// Input matrix ℒ, `n_u × n_e`.
    pub l_mat: Matrix<T>,
    /// Feedforward gain, `n_e × dim ν`.
    pub k_w: Option<Matrix<T>>,
    pub nu: Vec<T>,
}

impl<T: Scalar> StabilizerParams<T> {
    pub fn new(l: T, delta: T, c: Vec<Vec<T>>, l_mat: Matrix<T>) -> Self {
        Self {
            l,
            delta,
            c,
            l_mat,
            k_w: None,
            nu: Vec::new(),
        }
    }

    /// Single-error, single-input stabiliser.
    pub fn scalar(l: T, delta: T, c: Vec<T>, l_scalar: T) -> Self {
        Self::new(l, delta, vec![c], Matrix::from_row_slice(1, 1, &[l_scalar]))
    }

    pub fn validate(&self, s: &StructureParams) -> Result<(), RegulatorError> {
        positive("l", self.l)?;
        positive("delta", self.delta)?;
        if self.c.len() != s.n_e {
            return Err(RegulatorError::DimensionMismatch {
                what: "stabiliser coefficient rows",
                expected: s.n_e,
                got: self.c.len(),
            });
        }
        for (i, ci) in self.c.iter().enumerate() {
            if ci.len() != s.n_chi[i] {
                return Err(RegulatorError::DimensionMismatch {
                    what: "stabiliser coefficient row",
                    expected: s.n_chi[i],
                    got: ci.len(),
                });
            }
            // sⁿ + c_n sⁿ⁻¹ + … + c₁
            let rev: Vec<T> = ci.iter().rev().copied().collect();
            if !is_hurwitz(&rev) {
                return Err(RegulatorError::NotHurwitz {
                    name: format!("c[{i}] = {ci:?}"),
                });
            }
        }
        if self.l_mat.nrows() != s.n_u || self.l_mat.ncols() != s.n_e {
            return Err(RegulatorError::DimensionMismatch {
                what: "input matrix rows x cols",
                expected: s.n_u * s.n_e,
                got: self.l_mat.nrows() * self.l_mat.ncols(),
            });
        }
        if column_rank(&self.l_mat) < s.n_e {
            return Err(RegulatorError::RankDeficient);
        }
        if let Some(kw) = &self.k_w {
            if kw.nrows() != s.n_e || kw.ncols() != self.nu.len() {
                return Err(RegulatorError::DimensionMismatch {
                    what: "feedforward columns",
                    expected: self.nu.len(),
                    got: kw.ncols(),
                });
            }
        }
        Ok(())
    }

    /// Block-diagonal `K(δ)`, `n_e × n_χ`, with row `i` equal to
    /// `−(c₁δⁿ, c₂δⁿ⁻¹, …, c_nδ)` on chain `i`.
    pub fn k_delta(&self, s: &StructureParams) -> Matrix<T> {
        let mut k = Matrix::zeros(s.n_e, s.chi_dim());
        for (i, ci) in self.c.iter().enumerate() {
            let o = s.chain_offset(i);
            let n = ci.len();
            for (j, &cj) in ci.iter().enumerate() {
                k[(i, o + j)] = -cj * self.delta.powi((n - j) as i32);
            }
        }
        k
    }

    /// `K_w ν`, length `n_e`; zero when no feedforward is configured.
    pub fn feedforward(&self, n_e: usize) -> Vec<T> {
        match &self.k_w {
            Some(kw) => kw.mul_vec(&self.nu),
            None => vec![T::zero(); n_e],
        }
    }

    pub fn k_chi(&self, s: &StructureParams) -> Matrix<T> {
        scale(&self.k_delta(s), self.l)
    }

    pub fn k_zeta(&self, s: &StructureParams) -> Matrix<T> {
        scale(&Matrix::identity(s.n_e), -self.l)
    }

    pub fn k_eta(&self, s: &StructureParams) -> Matrix<T> {
        let (_, _, c) = super::build_f_h_c::<T>(s);
        self.k_chi(s).matmul(&c.transpose())
    }
}

fn scale<T: Scalar>(m: &Matrix<T>, a: T) -> Matrix<T> {
    Matrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * a)
}

fn column_rank<T: Scalar>(m: &Matrix<T>) -> usize {
    let mut a = m.clone();
    let (rows, cols) = (a.nrows(), a.ncols());
    let tol = T::epsilon() * T::from_usize_lossy(rows.max(cols)) * a.max_abs();
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..rows).max_by(|&i, &j| {
            a[(i, c)].abs().partial_cmp(&a[(j, c)].abs()).unwrap_or(std::cmp::Ordering::Equal)
        }) else {
            break;
        };
        if a[(p, c)].abs() <= tol {
            continue;
        }
        for k in 0..cols {
            let t = a[(rank, k)];
            a[(rank, k)] = a[(p, k)];
            a[(p, k)] = t;
        }
        for r in (rank + 1)..rows {
            let f = a[(r, c)] / a[(rank, c)];
            for k in c..cols {
                a[(r, k)] = a[(r, k)] - f * a[(rank, k)];
            }
        }
        rank += 1;
    }
    rank
}

/// Stabiliser output `u`, length `n_u`.
pub fn control_action<T: Scalar>(
    chi: &[T],
    zeta: &[T],
    eta1: &[T],
    stab: &StabilizerParams<T>,
    s: &StructureParams,
) -> Vec<T> {
    let mut v = stab.k_chi(s).mul_vec(chi);
    let ke = stab.k_eta(s).mul_vec(eta1);
    for k in 0..s.n_e {
        v[k] = v[k] - stab.l * zeta[k] + ke[k];
    }
    for (vk, f) in v.iter_mut().zip(stab.feedforward(s.n_e)) {
        *vk = *vk + f;
    }
    stab.l_mat.mul_vec(&v)
}
