use crate::linalg::{dot, Matrix};
use crate::Scalar;

/// Least-squares identifier for the linear model set `ψ_θ(η) = θᵀη`.
///
/// `step` is the discrete recursive update with exponential forgetting.
/// `rates` is the normalised continuous-time counterpart used inside the
/// closed loop, where the forgetting factor is read as a per-second decay.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineIdentifier<T> {
    /// `n_θ × n_e`.
    pub theta: Matrix<T>,
    /// `n_θ × n_θ`, symmetric positive definite.
    pub p: Matrix<T>,
    /// In `(0, 1]`.
    pub forgetting: T,
}

impl<T: Scalar> BaselineIdentifier<T> {
    pub fn new(n_theta: usize, n_e: usize, p0: T, forgetting: T) -> Self {
        assert!(forgetting > T::zero() && forgetting <= T::one(), "forgetting must be in (0, 1]");
        let mut p = Matrix::identity(n_theta);
        for i in 0..n_theta {
            p[(i, i)] = p0;
        }
        Self {
            theta: Matrix::zeros(n_theta, n_e),
            p,
            forgetting,
        }
    }

    pub fn n_theta(&self) -> usize {
        self.p.nrows()
    }

    pub fn n_e(&self) -> usize {
        self.theta.ncols()
    }

    pub fn predict(&self, eta: &[T]) -> Vec<T> {
        self.theta.tr_mul_vec(eta)
    }

    /// One recursive least-squares update with regressor `eta` and target `xi2`.
    pub fn step(&mut self, eta: &[T], xi2: &[T]) {
        let n = self.n_theta();
        let pe = self.p.mul_vec(eta);
        let denom = self.forgetting + dot(eta, &pe);
        let gain: Vec<T> = pe.iter().map(|&v| v / denom).collect();
        let err: Vec<T> = self
            .predict(eta)
            .iter()
            .zip(xi2)
            .map(|(&y, &t)| t - y)
            .collect();
        for i in 0..n {
            for (k, &ek) in err.iter().enumerate() {
                self.theta[(i, k)] = self.theta[(i, k)] + gain[i] * ek;
            }
        }
        let mut p = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                p[(i, j)] = (self.p[(i, j)] - gain[i] * pe[j]) / self.forgetting;
            }
        }
        symmetrize(&mut p);
        self.p = p;
    }

    /// Continuous-time rates `(θ̇, Ṗ)`:
    /// `θ̇ = P η εᵀ / m`, `Ṗ = β P − P η ηᵀ P / m` with `m = 1 + ηᵀη`,
    /// `ε = ξ₂ − θᵀη` and `β = −ln(forgetting)`. The forgetting term is
    /// switched off once `trace P` reaches `p_cap`.
    pub fn rates(&self, eta: &[T], xi2: &[T], p_cap: T) -> (Matrix<T>, Matrix<T>) {
        let n = self.n_theta();
        let m = T::one() + dot(eta, eta);
        let pe = self.p.mul_vec(eta);
        let err: Vec<T> = self
            .predict(eta)
            .iter()
            .zip(xi2)
            .map(|(&y, &t)| t - y)
            .collect();
        let dtheta = Matrix::from_fn(n, self.n_e(), |i, k| pe[i] * err[k] / m);
        let trace = (0..n).fold(T::zero(), |s, i| s + self.p[(i, i)]);
        let beta = if trace < p_cap { -self.forgetting.ln() } else { T::zero() };
        let dp = Matrix::from_fn(n, n, |i, j| beta * self.p[(i, j)] - pe[i] * pe[j] / m);
        (dtheta, dp)
    }
}

fn symmetrize<T: Scalar>(p: &mut Matrix<T>) {
    let half = T::lit(0.5);
    for i in 0..p.nrows() {
        for j in 0..i {
            let s = (p[(i, j)] + p[(j, i)]) * half;
            p[(i, j)] = s;
            p[(j, i)] = s;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_update_by_hand() {
        let mut id = BaselineIdentifier::<f64>::new(2, 1, 1.0, 1.0);
        id.step(&[1.0, 0.0], &[1.0]);
        assert_eq!(id.theta[(0, 0)], 0.5);
        assert_eq!(id.theta[(1, 0)], 0.0);
        assert_eq!(id.p.as_slice(), &[0.5, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn zero_regressor_leaves_theta() {
        let mut id = BaselineIdentifier::<f64>::new(2, 1, 1.0, 0.9);
        id.theta[(0, 0)] = 0.3;
        let before = id.theta.clone();
        id.step(&[0.0, 0.0], &[5.0]);
        assert_eq!(id.theta, before);
    }

    #[test]
    fn converges_on_linear_data() {
        let truth = [1.5, -0.7];
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut id = BaselineIdentifier::<f64>::new(2, 1, 100.0, 0.99);
        for _ in 0..1000 {
            let eta = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let y = truth[0] * eta[0] + truth[1] * eta[1];
            id.step(&eta, &[y]);
        }
        assert!((id.theta[(0, 0)] - truth[0]).abs() < 1e-6);
        assert!((id.theta[(1, 0)] - truth[1]).abs() < 1e-6);
        assert!(id.p.is_symmetric());
        assert!(crate::linalg::Cholesky::factor(&id.p).is_ok());
    }

    #[test]
    fn continuous_rates_vanish_on_fit_data() {
        let mut id = BaselineIdentifier::<f64>::new(2, 1, 1.0, 1.0);
        id.theta[(0, 0)] = 2.0;
        let (dt, dp) = id.rates(&[0.5, 0.0], &[1.0], f64::INFINITY);
        assert_eq!(dt.as_slice(), &[0.0, 0.0]);
        // P η ηᵀ P / m with P = I, η = (0.5, 0), m = 1.25
        assert!((dp[(0, 0)] + 0.2).abs() < 1e-15);
        let (_, dp_cap) = BaselineIdentifier::<f64>::new(2, 1, 10.0, 0.5).rates(&[0.0, 0.0], &[0.0], 1.0);
        assert_eq!(dp_cap.max_abs(), 0.0);
    }
}
