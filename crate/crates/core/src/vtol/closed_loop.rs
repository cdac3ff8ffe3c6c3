use std::ops::Range;

use crate::gp::{GpPosterior, KernelParams};
use crate::hybrid::{HybridError, HybridSystem};
use crate::linalg::Matrix;
use crate::regulator::{
    internal_model_flow, observer_flow, BaselineIdentifier, InternalModelParams, ObserverParams,
    StabilizerParams,
};
use crate::Scalar;

use super::plant::{disturbance, exo_flow, q_omega, vtol_control_transformed, ExoVariant, VtolError, VtolParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegulatorChoice {
    Gp,
    Baseline,
}

/// Everything needed to assemble the testbed loop.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopParams<T> {
    pub vtol: VtolParams<T>,
    pub variant: ExoVariant,
    pub internal_model: InternalModelParams<T>,
    pub observer: ObserverParams<T>,
    pub stabilizer: StabilizerParams<T>,
    pub kernel: KernelParams<T>,
    pub sigma_thr2: T,
    pub capacity: usize,
    pub baseline_forgetting: T,
    pub baseline_p0: T,
    /// Trace of the baseline gain matrix above which forgetting pauses.
    pub baseline_p_cap: T,
}

/// Offsets into the closed-loop state vector
/// `[w (4), χ (3), ζ, η (d), ξ₁, ξ₂, τ, θ (d), P (d×d)]`;
/// the last two blocks exist only for the baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StateLayout {
    pub d: usize,
    pub baseline: bool,
}

impl StateLayout {
    pub fn w(&self) -> Range<usize> {
        0..4
    }
    pub fn chi(&self) -> Range<usize> {
        4..7
    }
    pub fn zeta(&self) -> usize {
        7
    }
    pub fn eta(&self) -> Range<usize> {
        8..8 + self.d
    }
    pub fn xi1(&self) -> usize {
        8 + self.d
    }
    pub fn xi2(&self) -> usize {
        9 + self.d
    }
    pub fn tau(&self) -> usize {
        10 + self.d
    }
    pub fn theta(&self) -> Range<usize> {
        11 + self.d..11 + 2 * self.d
    }
    pub fn p(&self) -> Range<usize> {
        11 + 2 * self.d..11 + 2 * self.d + self.d * self.d
    }
    pub fn dim(&self) -> usize {
        if self.baseline {
            self.p().end
        } else {
            11 + self.d
        }
    }
}

#[derive(Debug, Clone)]
enum Identifier<T> {
    Gp(GpPosterior<T>),
    Baseline,
}

/// The testbed plant in transformed coordinates, its exosystem, and either
/// the GP-based hybrid regulator or the continuous least-squares baseline.
#[derive(Debug, Clone)]
pub struct ClosedLoop<T> {
    params: LoopParams<T>,
    layout: StateLayout,
    ident: Identifier<T>,
}

/// Builds the closed loop after checking dimensions.
pub fn assemble_closed_loop<T: Scalar>(
    params: LoopParams<T>,
    choice: RegulatorChoice,
) -> Result<ClosedLoop<T>, VtolError> {
    ClosedLoop::new(params, choice)
}

impl<T: Scalar> ClosedLoop<T> {
    pub fn new(params: LoopParams<T>, choice: RegulatorChoice) -> Result<Self, VtolError> {
        params.vtol.validate()?;
        let d = params.internal_model.order();
        let dim_err = |m: String| Err(VtolError::Dimension(m));
        if params.stabilizer.c.len() != 1 || params.stabilizer.c[0].len() != 3 {
            return dim_err("the testbed needs one chain of length 3".into());
        }
        if params.stabilizer.l_mat.nrows() != 1 || params.stabilizer.l_mat.ncols() != 1 {
            return dim_err("the testbed has a single input and a single error".into());
        }
        if params.kernel.eta_dim() != d {
            return dim_err(format!(
                "{} kernel length scales for an internal model of order {d}",
                params.kernel.eta_dim()
            ));
        }
        if params.capacity == 0 {
            return dim_err("buffer capacity must be positive".into());
        }
        let ident = match choice {
            RegulatorChoice::Gp => Identifier::Gp(
                GpPosterior::prior(params.kernel.clone(), params.capacity, 1)
                    .map_err(|e| VtolError::Dimension(e.to_string()))?,
            ),
            RegulatorChoice::Baseline => Identifier::Baseline,
        };
        let layout = StateLayout {
            d,
            baseline: choice == RegulatorChoice::Baseline,
        };
        Ok(Self { params, layout, ident })
    }

    pub fn params(&self) -> &LoopParams<T> {
        &self.params
    }

    pub fn layout(&self) -> StateLayout {
        self.layout
    }

    pub fn choice(&self) -> RegulatorChoice {
        match self.ident {
            Identifier::Gp(_) => RegulatorChoice::Gp,
            Identifier::Baseline => RegulatorChoice::Baseline,
        }
    }

    pub fn posterior(&self) -> Option<&GpPosterior<T>> {
        match &self.ident {
            Identifier::Gp(p) => Some(p),
            Identifier::Baseline => None,
        }
    }

    /// Zero plant and regulator state with the exosystem at `w0`; the
    /// baseline gain matrix starts at `p0·I`.
    pub fn initial_state(&self, w0: [T; 4]) -> Vec<T> {
        let mut x = vec![T::zero(); self.layout.dim()];
        x[self.layout.w()].copy_from_slice(&w0);
        if self.layout.baseline {
            let d = self.layout.d;
            let p = self.layout.p();
            for i in 0..d {
                x[p.start + i * d + i] = self.params.baseline_p0;
            }
        }
        x
    }

    fn baseline_of(&self, x: &[T]) -> BaselineIdentifier<T> {
        let d = self.layout.d;
        BaselineIdentifier {
            theta: Matrix::from_row_slice(d, 1, &x[self.layout.theta()]),
            p: Matrix::from_row_slice(d, d, &x[self.layout.p()]),
            forgetting: self.params.baseline_forgetting,
        }
    }

    /// Control input at `x`.
    pub fn control(&self, x: &[T]) -> T {
        let l = self.layout;
        let dist = disturbance(&x[l.w()], self.params.variant, &self.params.vtol);
        vtol_control_transformed(&x[l.chi()], x[l.zeta()], x[l.eta().start], &dist, &self.params.stabilizer)
    }

    /// Identifier prediction `μ` at `x`.
    pub fn prediction(&self, x: &[T]) -> T {
        let l = self.layout;
        match &self.ident {
            Identifier::Gp(post) => post.mean_and_gradient(&x[l.eta()], x[l.tau()]).0[0],
            Identifier::Baseline => self.baseline_of(x).predict(&x[l.eta()])[0],
        }
    }

    /// Posterior variance at `x` (GP only).
    pub fn variance(&self, x: &[T]) -> Option<T> {
        let l = self.layout;
        self.posterior()
            .map(|p| p.variance(&x[l.eta()], x[l.tau()]).expect("state layout matches kernel"))
    }

    /// `Ω(w, x)` times the effective stabiliser input gain. The displayed
    /// testbed law equals the generic stabiliser with input matrix `−ℒ`.
    pub fn detectability_witness(&self, x: &[T]) -> T {
        let l = self.layout;
        let dist = disturbance(&x[l.w()], self.params.variant, &self.params.vtol);
        let (_, omega) = q_omega(x[l.chi().start + 2], x[l.zeta()], &dist, &self.params.vtol);
        -omega * self.params.stabilizer.l_mat[(0, 0)]
    }
}

impl<T: Scalar> HybridSystem<T> for ClosedLoop<T> {
    fn dim(&self) -> usize {
        self.layout.dim()
    }

    fn flow(&self, _t: T, x: &[T], dx: &mut [T]) {
        let l = self.layout;
        let p = &self.params;
        let w = &x[l.w()];
        let chi = &x[l.chi()];
        let zeta = x[l.zeta()];
        let eta = &x[l.eta()];
        let (xi1, xi2, tau) = (x[l.xi1()], x[l.xi2()], x[l.tau()]);

        dx[l.w()].copy_from_slice(&exo_flow(w, p.variant));
        let dist = disturbance(w, p.variant, &p.vtol);
        let u = vtol_control_transformed(chi, zeta, eta[0], &dist, &p.stabilizer);
        let (q, omega) = q_omega(chi[2], zeta, &dist, &p.vtol);
        dx[l.chi().start] = chi[1];
        dx[l.chi().start + 1] = chi[2];
        dx[l.chi().start + 2] = zeta;
        dx[l.zeta()] = q + omega * u;

        let e = chi[0];
        let mu_dot;
        match &self.ident {
            Identifier::Gp(post) => {
                let (mean, grad) = post.mean_and_gradient(eta, tau);
                let eta_dot = internal_model_flow(eta, &[e], &mean, &p.internal_model);
                mu_dot = crate::regulator::internal_model::chain_rule(&grad, &eta_dot)[0];
                dx[l.eta()].copy_from_slice(&eta_dot);
            }
            Identifier::Baseline => {
                let id = self.baseline_of(x);
                let mu = id.predict(eta);
                let eta_dot = internal_model_flow(eta, &[e], &mu, &p.internal_model);
                let (dtheta, dp) = id.rates(eta, &[xi2], p.baseline_p_cap);
                mu_dot = (0..l.d).fold(T::zero(), |acc, i| {
                    acc + dtheta[(i, 0)] * eta[i] + id.theta[(i, 0)] * eta_dot[i]
                });
                dx[l.eta()].copy_from_slice(&eta_dot);
                dx[l.theta()].copy_from_slice(dtheta.as_slice());
                dx[l.p()].copy_from_slice(dp.as_slice());
            }
        }
        let (d1, d2) = observer_flow(&[xi1], &[xi2], &[eta[l.d - 1]], &[mu_dot], &p.observer);
        dx[l.xi1()] = d1[0];
        dx[l.xi2()] = d2[0];
        dx[l.tau()] = T::one();
    }

    fn event_value(&self, x: &[T]) -> T {
        match self.variance(x) {
            Some(v) => v - self.params.sigma_thr2,
            None => T::neg_infinity(),
        }
    }

    fn jump(&mut self, _t: T, x: &mut [T]) -> Result<(), HybridError> {
        let l = self.layout;
        match &mut self.ident {
            Identifier::Gp(post) => {
                post.push(x[l.eta()].to_vec(), vec![x[l.xi2()]], x[l.tau()])
                    .map_err(|e| HybridError::Jump(e.to_string()))?;
                x[l.tau()] = T::zero();
                Ok(())
            }
            Identifier::Baseline => Err(HybridError::Jump("the baseline loop has no jump map".into())),
        }
    }

    fn has_jumps(&self) -> bool {
        matches!(self.ident, Identifier::Gp(_))
    }

    /// Posterior variance, or NaN for the baseline.
    fn monitor(&self, x: &[T]) -> T {
        self.variance(x).unwrap_or(T::nan())
    }

    fn output_names(&self) -> Vec<String> {
        ["e", "u", "mu", "d_w", "omega_l"].iter().map(|s| s.to_string()).collect()
    }

    fn outputs(&self, _t: T, x: &[T]) -> Vec<T> {
        let l = self.layout;
        let dist = disturbance(&x[l.w()], self.params.variant, &self.params.vtol);
        vec![
            x[l.chi().start],
            self.control(x),
            self.prediction(x),
            dist.d,
            self.detectability_witness(x),
        ]
    }

    fn discrete_len(&self) -> usize {
        self.posterior().map_or(0, |p| p.len())
    }
}
