use crate::gp::{GpPosterior, KernelParams};
use crate::Scalar;

use super::{is_hurwitz, positive, RegulatorError};

/// Gains of the chain internal model `η̇ᵢ = ηᵢ₊₁ + gⁱhᵢe`, `η̇_d = μ + gᵈh_d e`.
#[derive(Debug, Clone, PartialEq)]
pub struct InternalModelParams<T> {
    pub g: T,
    pub h: Vec<T>,
}

impl<T: Scalar> InternalModelParams<T> {
    pub fn new(g: T, h: Vec<T>) -> Result<Self, RegulatorError> {
        let p = Self { g, h };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), RegulatorError> {
        positive("g", self.g)?;
        if self.h.is_empty() || !is_hurwitz(&self.h) {
            return Err(RegulatorError::NotHurwitz {
                name: format!("h = {:?}", self.h),
            });
        }
        Ok(())
    }

    pub fn order(&self) -> usize {
        self.h.len()
    }
}

/// Derivative of the internal-model state, stacked as `d` blocks of length `n_e`.
pub fn internal_model_flow<T: Scalar>(eta: &[T], e: &[T], mu: &[T], params: &InternalModelParams<T>) -> Vec<T> {
    let d = params.order();
    let n_e = e.len();
    assert_eq!(eta.len(), d * n_e, "internal model state length");
    assert_eq!(mu.len(), n_e, "prediction length");
    let mut out = vec![T::zero(); d * n_e];
    let mut gi = T::one();
    for i in 0..d {
        gi = gi * params.g;
        let gain = gi * params.h[i];
        for k in 0..n_e {
            let drift = if i + 1 < d { eta[(i + 1) * n_e + k] } else { mu[k] };
            out[i * n_e + k] = drift + gain * e[k];
        }
    }
    out
}

/// Gains of the high-gain derivative observer.
#[derive(Debug, Clone, PartialEq)]
pub struct ObserverParams<T> {
    pub m1: T,
    pub m2: T,
    pub rho: T,
}

impl<T: Scalar> ObserverParams<T> {
    pub fn new(m1: T, m2: T, rho: T) -> Result<Self, RegulatorError> {
        let p = Self { m1, m2, rho };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), RegulatorError> {
        positive("m1", self.m1)?;
        positive("m2", self.m2)?;
        positive("rho", self.rho)
    }
}

/// `ξ̇₁ = ξ₂ − m₁ρ(ξ₁ − η_d)`, `ξ̇₂ = μ̇ − m₂ρ²(ξ₁ − η_d)`.
pub fn observer_flow<T: Scalar>(
    xi1: &[T],
    xi2: &[T],
    eta_d: &[T],
    mu_dot: &[T],
    params: &ObserverParams<T>,
) -> (Vec<T>, Vec<T>) {
    let r = params.rho;
    let mut d1 = Vec::with_capacity(xi1.len());
    let mut d2 = Vec::with_capacity(xi1.len());
    for k in 0..xi1.len() {
        let innov = xi1[k] - eta_d[k];
        d1.push(xi2[k] - params.m1 * r * innov);
        d2.push(mu_dot[k] - params.m2 * r * r * innov);
    }
    (d1, d2)
}

/// Time derivative of `μ(η(t), τ(t))` along the regulator flow (`τ̇ = 1`).
pub fn mu_total_derivative<T: Scalar>(
    post: &GpPosterior<T>,
    eta: &[T],
    tau: T,
    e: &[T],
    mu: &[T],
    params: &InternalModelParams<T>,
) -> Vec<T> {
    let eta_dot = internal_model_flow(eta, e, mu, params);
    let grad = post.evaluate(eta, tau).gradient;
    chain_rule(&grad, &eta_dot)
}

/// `(∂μ/∂η)ᵀ η̇ + ∂μ/∂τ` given the stacked gradient.
pub(crate) fn chain_rule<T: Scalar>(grad: &crate::linalg::Matrix<T>, eta_dot: &[T]) -> Vec<T> {
    let p = eta_dot.len();
    (0..grad.ncols())
        .map(|k| {
            (0..p).fold(grad[(p, k)], |acc, i| acc + grad[(i, k)] * eta_dot[i])
        })
        .collect()
}

/// Outcome of the threshold admissibility check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaCondition<T> {
    pub holds: bool,
    /// `σ_p² σ_n² / (σ_p² + σ_n²)`.
    pub lower: T,
    /// `σ_p²`.
    pub upper: T,
}

/// Checks `σ_p²σ_n²/(σ_p²+σ_n²) < σ_thr² < σ_p²`.
pub fn check_sigma_condition<T: Scalar>(params: &KernelParams<T>, sigma_thr2: T) -> SigmaCondition<T> {
    let lower = params.training_point_variance();
    let upper = params.sigma_p2;
    SigmaCondition {
        holds: lower < sigma_thr2 && sigma_thr2 < upper,
        lower,
        upper,
    }
}
