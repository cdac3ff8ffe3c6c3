use crate::linalg::{dot, Cholesky, Matrix};
use crate::Scalar;

use super::{check_dim, GpError, KernelParams, SampleBuffer};

/// Posterior of the GP conditioned on a buffer snapshot.
///
/// Holds the Cholesky factor of `K + σ_n² I` over the admitted samples and the
/// weights `α = (K + σ_n² I)⁻¹ Ξ`, where `Ξ` stacks the `ξ₂` targets (one column
/// per output; all outputs share the Gram matrix). During flow only the query
/// clock changes, so nothing here is recomputed between jumps.
#[derive(Debug, Clone)]
pub struct GpPosterior<T> {
    params: KernelParams<T>,
    buffer: SampleBuffer<T>,
    chol: Cholesky<T>,
    /// `n × n_out`, row-major.
    alpha: Vec<T>,
    /// Age of each sample, oldest first.
    ages: Vec<T>,
}

impl<T: Scalar> GpPosterior<T> {
    /// Posterior with no data: zero mean, variance `σ_p²` everywhere.
    pub fn prior(params: KernelParams<T>, capacity: usize, out_dim: usize) -> Result<Self, GpError> {
        params.validate()?;
        let buffer = SampleBuffer::new(capacity, params.eta_dim(), out_dim);
        Ok(Self {
            params,
            buffer,
            chol: Cholesky::empty(),
            alpha: Vec::new(),
            ages: Vec::new(),
        })
    }

    /// Fits from scratch over every admitted sample of `buffer`.
    pub fn fit(buffer: &SampleBuffer<T>, params: &KernelParams<T>) -> Result<Self, GpError> {
        params.validate()?;
        check_dim("buffer eta", params.eta_dim(), buffer.eta_dim())?;
        let mut post = Self {
            params: params.clone(),
            buffer: buffer.clone(),
            chol: Cholesky::empty(),
            alpha: Vec::new(),
            ages: buffer.ages(),
        };
        post.chol = Cholesky::factor(&post.regularized_gram())?;
        post.update_alpha();
        Ok(post)
    }

    /// Admits a sample and refits, reusing the current factorization.
    ///
    /// Produces the same posterior as `fit` on the pushed buffer up to rounding.
    pub fn push(&mut self, eta: Vec<T>, xi2: Vec<T>, tau: T) -> Result<(), GpError> {
        let evicted = self.buffer.push(eta, xi2, tau)?;
        if evicted.is_some() {
            self.chol.remove_first();
            self.ages.remove(0);
        }
        for a in &mut self.ages {
            *a = *a + tau;
        }
        self.ages.push(T::zero());
        let n = self.buffer.len();
        let newest = &self.buffer.get(n - 1).unwrap().eta;
        let cross: Vec<T> = (0..n - 1)
            .map(|j| {
                let s = self.buffer.get(j).unwrap();
                self.params.sigma_p2
                    * self.params.spatial(&s.eta, newest)
                    * self.params.temporal(self.ages[j])
            })
            .collect();
        self.chol
            .append(&cross, self.params.sigma_p2 + self.params.sigma_n2)?;
        self.update_alpha();
        Ok(())
    }

    fn update_alpha(&mut self) {
        let n = self.buffer.len();
        let m = self.buffer.out_dim();
        self.alpha = vec![T::zero(); n * m];
        let mut col = vec![T::zero(); n];
        for k in 0..m {
            for (j, s) in self.buffer.iter().enumerate() {
                col[j] = s.xi2[k];
            }
            let a = self.chol.solve(&col);
            for j in 0..n {
                self.alpha[j * m + k] = a[j];
            }
        }
    }

    pub fn params(&self) -> &KernelParams<T> {
        &self.params
    }

    pub fn buffer(&self) -> &SampleBuffer<T> {
        &self.buffer
    }

    pub fn len(&self) -> usize {
        self.buffer.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buffer.is_empty()
    }

    pub fn out_dim(&self) -> usize {
        self.buffer.out_dim()
    }

    pub fn eta_dim(&self) -> usize {
        self.params.eta_dim()
    }

    /// Noise-free Gram matrix `K` over the admitted samples.
    pub fn gram(&self) -> Matrix<T> {
        let n = self.buffer.len();
        let mut k = Matrix::zeros(n, n);
        for i in 0..n {
            let si = self.buffer.get(i).unwrap();
            k[(i, i)] = self.params.sigma_p2;
            for j in 0..i {
                let sj = self.buffer.get(j).unwrap();
                let v = self.params.sigma_p2
                    * self.params.spatial(&si.eta, &sj.eta)
                    * self.params.temporal(self.ages[j] - self.ages[i]);
                k[(i, j)] = v;
                k[(j, i)] = v;
            }
        }
        k
    }

    fn regularized_gram(&self) -> Matrix<T> {
        let mut k = self.gram();
        for i in 0..k.nrows() {
            k[(i, i)] = k[(i, i)] + self.params.sigma_n2;
        }
        k
    }

    /// `γ = (K + σ_n² I)⁻¹`.
    pub fn gamma(&self) -> Matrix<T> {
        self.chol.inverse()
    }

    pub fn cholesky(&self) -> &Cholesky<T> {
        &self.chol
    }

    /// Weights `α = γ Ξ`, `n × n_out` row-major.
    pub fn alpha(&self) -> &[T] {
        &self.alpha
    }

    /// Stacked targets `Ξ`, `n × n_out` row-major.
    pub fn targets(&self) -> Vec<T> {
        self.buffer.iter().flat_map(|s| s.xi2.iter().copied()).collect()
    }

    fn check_query(&self, eta: &[T], tau: T) -> Result<(), GpError> {
        check_dim("query eta", self.eta_dim(), eta.len())?;
        if tau < T::zero() {
            return Err(GpError::NegativeElapsed(tau.to_f64().unwrap_or(f64::NAN)));
        }
        Ok(())
    }

    /// `κ(z)`: covariance between the query and each stored sample.
    pub fn kernel_vector(&self, eta: &[T], tau: T) -> Result<Vec<T>, GpError> {
        self.check_query(eta, tau)?;
        Ok(self.kvec(eta, tau))
    }

    fn kvec(&self, eta: &[T], tau: T) -> Vec<T> {
        let ts = self.params.time_scale();
        let two = T::lit(2.0);
        self.buffer
            .iter()
            .zip(&self.ages)
            .map(|(s, &age)| {
                let mut e = (tau + age) / ts;
                for ((&x, &y), &l) in eta.iter().zip(&s.eta).zip(&self.params.lambda_eta) {
                    let d = x - y;
                    e = e + d * d / (two * l * l);
                }
                self.params.sigma_p2 * (-e).exp()
            })
            .collect()
    }

    fn mean_from(&self, kv: &[T]) -> Vec<T> {
        let m = self.out_dim();
        let mut mu = vec![T::zero(); m];
        for (j, &kj) in kv.iter().enumerate() {
            for k in 0..m {
                mu[k] = mu[k] + kj * self.alpha[j * m + k];
            }
        }
        mu
    }

    fn variance_from(&self, kv: &[T]) -> T {
        if kv.is_empty() {
            return self.params.sigma_p2;
        }
        let v = self.chol.solve_lower(kv);
        let var = self.params.sigma_p2 - dot(&v, &v);
        var.min(self.params.sigma_p2)
    }

    /// Posterior mean `μ(z) = κ(z)ᵀ α`.
    pub fn mean(&self, eta: &[T], tau: T) -> Result<Vec<T>, GpError> {
        self.check_query(eta, tau)?;
        Ok(self.mean_from(&self.kvec(eta, tau)))
    }

    /// Posterior variance `σ²(z) = σ_p² − κ(z)ᵀ γ κ(z)`.
    pub fn variance(&self, eta: &[T], tau: T) -> Result<T, GpError> {
        self.check_query(eta, tau)?;
        Ok(self.variance_from(&self.kvec(eta, tau)))
    }

    /// Gradient of `μ` with respect to `(η, τ)`, shape `(dim η + 1) × n_out`.
    /// The last row is the `τ` derivative.
    pub fn mean_gradient(&self, eta: &[T], tau: T) -> Result<Matrix<T>, GpError> {
        self.check_query(eta, tau)?;
        Ok(self.evaluate(eta, tau).gradient)
    }

    /// Mean, variance and mean gradient from a single kernel-vector pass.
    pub fn evaluate(&self, eta: &[T], tau: T) -> Prediction<T> {
        let kv = self.kvec(eta, tau);
        let (mean, gradient) = self.mean_grad_from(&kv, eta);
        Prediction {
            mean,
            variance: self.variance_from(&kv),
            gradient,
        }
    }

    /// Mean and mean gradient, skipping the `O(n²)` variance solve.
    pub fn mean_and_gradient(&self, eta: &[T], tau: T) -> (Vec<T>, Matrix<T>) {
        let kv = self.kvec(eta, tau);
        self.mean_grad_from(&kv, eta)
    }

    fn mean_grad_from(&self, kv: &[T], eta: &[T]) -> (Vec<T>, Matrix<T>) {
        let p = self.eta_dim();
        let m = self.out_dim();
        let mean = self.mean_from(kv);
        let mut grad = Matrix::zeros(p + 1, m);
        for (j, (s, &kj)) in self.buffer.iter().zip(kv).enumerate() {
            for i in 0..p {
                let l = self.params.lambda_eta[i];
                let f = -kj * (eta[i] - s.eta[i]) / (l * l);
                for k in 0..m {
                    grad[(i, k)] = grad[(i, k)] + f * self.alpha[j * m + k];
                }
            }
        }
        let ts = self.params.time_scale();
        for k in 0..m {
            grad[(p, k)] = -mean[k] / ts;
        }
        (mean, grad)
    }

    /// Upper bound on the Lipschitz constant of `z ↦ μ(z)` (Euclidean norms):
    /// `Σ_j ‖α_j‖ · L_κ`.
    pub fn lipschitz_bound(&self) -> T {
        let m = self.out_dim();
        let total = (0..self.len()).fold(T::zero(), |acc, j| {
            let row = &self.alpha[j * m..(j + 1) * m];
            acc + dot(row, row).sqrt()
        });
        total * self.params.lipschitz_constant()
    }
}

/// Output of [`GpPosterior::evaluate`].
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction<T> {
    pub mean: Vec<T>,
    pub variance: T,
    pub gradient: Matrix<T>,
}
