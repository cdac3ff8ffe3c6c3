use crate::Scalar;

use super::{check_dim, GpError, SampleBuffer};

/// Hyperparameters of the time-forgetting squared-exponential kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelParams<T> {
    /// Prior signal variance.
    pub sigma_p2: T,
    /// Observation noise variance.
    pub sigma_n2: T,
    /// One length scale per internal-model coordinate.
    pub lambda_eta: Vec<T>,
    /// Forgetting time scale in seconds.
    pub lambda_tau: T,
}

impl<T: Scalar> KernelParams<T> {
    pub fn new(sigma_p2: T, sigma_n2: T, lambda_eta: Vec<T>, lambda_tau: T) -> Result<Self, GpError> {
        let p = Self {
            sigma_p2,
            sigma_n2,
            lambda_eta,
            lambda_tau,
        };
        p.validate()?;
        Ok(p)
    }

    /// Reference hyperparameters: `σ_p² = 1`, `σ_n² = 0.01`, `λ_η = 0.1` in
    /// every coordinate, `λ_τ = 2`.
    pub fn reference(eta_dim: usize) -> Self {
        Self {
            sigma_p2: T::one(),
            sigma_n2: T::lit(0.01),
            lambda_eta: vec![T::lit(0.1); eta_dim],
            lambda_tau: T::lit(2.0),
        }
    }

    pub fn validate(&self) -> Result<(), GpError> {
        fn positive<T: Scalar>(name: &'static str, v: T) -> Result<(), GpError> {
            if v.is_finite() && v > T::zero() {
                Ok(())
            } else {
                Err(GpError::InvalidParams {
                    name,
                    reason: format!("must be finite and > 0, got {v}"),
                })
            }
        }
        positive("sigma_p2", self.sigma_p2)?;
        positive("sigma_n2", self.sigma_n2)?;
        positive("lambda_tau", self.lambda_tau)?;
        if self.lambda_eta.is_empty() {
            return Err(GpError::InvalidParams {
                name: "lambda_eta",
                reason: "at least one length scale required".into(),
            });
        }
        for &l in &self.lambda_eta {
            positive("lambda_eta", l)?;
        }
        Ok(())
    }

    pub fn eta_dim(&self) -> usize {
        self.lambda_eta.len()
    }

    /// `exp(-Σ (a_i - b_i)² / (2 λ_i²))`.
    pub fn spatial(&self, a: &[T], b: &[T]) -> T {
        let two = T::lit(2.0);
        let mut s = T::zero();
        for ((&x, &y), &l) in a.iter().zip(b).zip(&self.lambda_eta) {
            let d = x - y;
            s = s + d * d / (two * l * l);
        }
        (-s).exp()
    }

    /// `exp(-Δt / (2 λ_τ²))`.
    pub fn temporal(&self, dt: T) -> T {
        (-dt / self.time_scale()).exp()
    }

    /// `2 λ_τ²`.
    pub fn time_scale(&self) -> T {
        T::lit(2.0) * self.lambda_tau * self.lambda_tau
    }

    /// Variance left at a freshly observed point with nothing else nearby:
    /// `σ_p² σ_n² / (σ_p² + σ_n²)`.
    pub fn training_point_variance(&self) -> T {
        self.sigma_p2 * self.sigma_n2 / (self.sigma_p2 + self.sigma_n2)
    }

    /// Lipschitz constant of `z ↦ κ(z, z_j)` in `z = (η, τ)` (Euclidean norm).
    ///
    /// The spatial factor's slope peaks at one length scale from the centre,
    /// `σ_p² e^{-1/2} / λ_min`; the temporal slope is at most `σ_p² / (2λ_τ²)`.
    pub fn lipschitz_constant(&self) -> T {
        let lmin = self
            .lambda_eta
            .iter()
            .fold(T::infinity(), |m, &l| if l < m { l } else { m });
        let e = T::lit(std::f64::consts::E);
        let ts = self.time_scale();
        self.sigma_p2 * (T::one() / (e * lmin * lmin) + T::one() / (ts * ts)).sqrt()
    }
}

/// An argument of the kernel: either a stored sample or a fresh query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelPoint<'a, T> {
    /// Index into the buffer, oldest first.
    Member(usize),
    /// Query state at the current clock value.
    Query { eta: &'a [T], tau: T },
}

/// Kernel between two points relative to `buffer`.
///
/// Elapsed time between members `i < j` is the sum of the inter-jump clocks
/// stored with samples `i+1..=j`. A query at clock `τ` is `τ` plus the clocks
/// of all samples newer than `j` away from member `j`.
pub fn kernel_eval<T: Scalar>(
    a: KernelPoint<'_, T>,
    b: KernelPoint<'_, T>,
    buffer: &SampleBuffer<T>,
    params: &KernelParams<T>,
) -> Result<T, GpError> {
    let eta_dim = params.eta_dim();
    check_dim("buffer eta", eta_dim, buffer.eta_dim())?;
    let resolve = |p: KernelPoint<'_, T>| -> Result<(), GpError> {
        match p {
            KernelPoint::Member(i) if i >= buffer.len() => Err(GpError::IndexOutOfRange {
                index: i,
                len: buffer.len(),
            }),
            KernelPoint::Query { eta, tau } => {
                check_dim("query eta", eta_dim, eta.len())?;
                if tau < T::zero() {
                    return Err(GpError::NegativeElapsed(tau.to_f64().unwrap_or(f64::NAN)));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    };
    resolve(a)?;
    resolve(b)?;

    let (eta_a, eta_b, dt) = match (a, b) {
        (KernelPoint::Member(i), KernelPoint::Member(j)) => {
            let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
            let dt = buffer
                .iter()
                .skip(lo + 1)
                .take(hi - lo)
                .fold(T::zero(), |s, smp| s + smp.tau_at_jump);
            (buffer.get(i).unwrap().eta.as_slice(), buffer.get(j).unwrap().eta.as_slice(), dt)
        }
        (KernelPoint::Member(j), KernelPoint::Query { eta, tau })
        | (KernelPoint::Query { eta, tau }, KernelPoint::Member(j)) => {
            (buffer.get(j).unwrap().eta.as_slice(), eta, tau + buffer.age(j))
        }
        (KernelPoint::Query { eta: ea, tau: ta }, KernelPoint::Query { eta: eb, tau: tb }) => {
            (ea, eb, (ta - tb).abs())
        }
    };
    if dt < T::zero() {
        return Err(GpError::NegativeElapsed(dt.to_f64().unwrap_or(f64::NAN)));
    }
    Ok(params.sigma_p2 * params.spatial(eta_a, eta_b) * params.temporal(dt))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn buf(taus: &[f64]) -> SampleBuffer<f64> {
        let mut b = SampleBuffer::<f64>::new(10, 2, 1);
        for &t in taus {
            b.push(vec![0.0, 0.0], vec![0.0], t).unwrap();
        }
        b
    }

    #[test]
    fn same_member_gives_prior_variance() {
        let b = buf(&[0.3, 1.0, 2.0]);
        let p = KernelParams::<f64>::reference(2);
        for i in 0..3 {
            let k = kernel_eval(KernelPoint::Member(i), KernelPoint::Member(i), &b, &p).unwrap();
            assert_eq!(k, 1.0);
        }
    }

    #[test]
    fn adjacent_members_decay_with_intervening_clock() {
        let b = buf(&[0.5, 2.0]);
        let p = KernelParams::<f64>::reference(2);
        let k = kernel_eval(KernelPoint::Member(0), KernelPoint::Member(1), &b, &p).unwrap();
        // exp(-2/8)
        assert!((k - 0.778_800_783_071_404_9).abs() < 1e-15);
        let k10 = kernel_eval(KernelPoint::Member(1), KernelPoint::Member(0), &b, &p).unwrap();
        assert_eq!(k, k10);
    }

    #[test]
    fn spatial_offset_at_one_length_scale() {
        let mut b = SampleBuffer::<f64>::new(2, 2, 1);
        b.push(vec![0.1, 0.0], vec![0.0], 0.0).unwrap();
        let p = KernelParams::<f64>::reference(2);
        let q = KernelPoint::Query {
            eta: &[0.0, 0.0],
            tau: 0.0,
        };
        let k = kernel_eval(q, KernelPoint::Member(0), &b, &p).unwrap();
        // exp(-1/2)
        assert!((k - 0.606_530_659_712_633_4).abs() < 1e-15);
    }

    #[test]
    fn query_age_counts_newer_clocks() {
        let b = buf(&[0.0, 1.0, 0.5]);
        let p = KernelParams::<f64>::reference(2);
        let q = KernelPoint::Query {
            eta: &[0.0, 0.0],
            tau: 0.25,
        };
        let k = kernel_eval(q, KernelPoint::Member(0), &b, &p).unwrap();
        assert!((k - (-(0.25 + 1.5) / 8.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_dimensions_and_indices() {
        let b = buf(&[0.0]);
        let p = KernelParams::<f64>::reference(2);
        let q = KernelPoint::Query {
            eta: &[0.0],
            tau: 0.0,
        };
        assert!(matches!(
            kernel_eval(q, KernelPoint::Member(0), &b, &p),
            Err(GpError::DimensionMismatch { .. })
        ));
        assert!(matches!(
            kernel_eval(KernelPoint::Member(3), KernelPoint::Member(0), &b, &p),
            Err(GpError::IndexOutOfRange { .. })
        ));
        let p3 = KernelParams::<f64>::reference(3);
        assert!(kernel_eval(KernelPoint::Member(0), KernelPoint::Member(0), &b, &p3).is_err());
    }

    #[test]
    fn params_validation() {
        assert!(KernelParams::new(1.0, 0.0, vec![0.1], 2.0).is_err());
        assert!(KernelParams::new(1.0, 0.01, vec![], 2.0).is_err());
        assert!(KernelParams::new(1.0, 0.01, vec![0.1, -1.0], 2.0).is_err());
        assert!(KernelParams::new(f64::NAN, 0.01, vec![0.1], 2.0).is_err());
        assert!(KernelParams::new(1.0, 0.01, vec![0.1, 0.1], 2.0).is_ok());
    }
}
