use crate::linalg::Matrix;
use crate::Scalar;

use super::RegulatorError;

/// Dimensions of the plant/regulator interconnection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructureParams {
    /// Number of regulated errors.
    pub n_e: usize,
    /// Chain length for each error.
    pub n_chi: Vec<usize>,
    /// Internal-model order.
    pub d: usize,
    /// Number of inputs.
    pub n_u: usize,
}

impl StructureParams {
    pub fn new(n_e: usize, n_chi: Vec<usize>, d: usize, n_u: usize) -> Result<Self, RegulatorError> {
        let s = Self { n_e, n_chi, d, n_u };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), RegulatorError> {
        if self.n_e == 0 || self.d == 0 || self.n_u == 0 {
            return Err(RegulatorError::Structure("n_e, d and n_u must be positive".into()));
        }
        if self.n_chi.len() != self.n_e {
            return Err(RegulatorError::Structure(format!(
                "{} chain lengths given for {} errors",
                self.n_chi.len(),
                self.n_e
            )));
        }
        if self.n_chi.iter().any(|&n| n == 0) {
            return Err(RegulatorError::Structure("chain lengths must be positive".into()));
        }
        if self.n_u < self.n_e {
            return Err(RegulatorError::Structure(format!(
                "n_u = {} is smaller than n_e = {}",
                self.n_u, self.n_e
            )));
        }
        Ok(())
    }

    /// Total chain dimension.
    pub fn chi_dim(&self) -> usize {
        self.n_chi.iter().sum()
    }

    /// Internal-model dimension `d · n_e`.
    pub fn eta_dim(&self) -> usize {
        self.d * self.n_e
    }

    /// Offset of chain `i` inside the stacked `χ`.
    pub fn chain_offset(&self, i: usize) -> usize {
        self.n_chi[..i].iter().sum()
    }
}

/// Chain matrices `(F, H, C)`: `F` block-diagonal shifts, `H` feeds each
/// chain's last state, `C` reads each chain's first state.
pub fn build_f_h_c<T: Scalar>(s: &StructureParams) -> (Matrix<T>, Matrix<T>, Matrix<T>) {
    let n = s.chi_dim();
    let mut f = Matrix::zeros(n, n);
    let mut h = Matrix::zeros(n, s.n_e);
    let mut c = Matrix::zeros(s.n_e, n);
    for (i, &ni) in s.n_chi.iter().enumerate() {
        let o = s.chain_offset(i);
        for k in 0..ni - 1 {
            f[(o + k, o + k + 1)] = T::one();
        }
        h[(o + ni - 1, i)] = T::one();
        c[(i, o)] = T::one();
    }
    (f, h, c)
}
