use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::regulator::StabilizerParams;
use crate::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VtolError {
    #[error("roll angle {theta1} is at the tan/cos singularity")]
    Singularity { theta1: f64 },
    #[error("unknown exosystem '{0}' (expected linear, duffing or arctan)")]
    UnknownVariant(String),
    #[error("invalid plant parameter {name}: {value}")]
    InvalidParam { name: &'static str, value: f64 },
    #[error("inconsistent closed-loop dimensions: {0}")]
    Dimension(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct VtolParams<T> {
    pub mass: T,
    pub inertia: T,
    pub wing_l: T,
    pub grav: T,
    /// Disturbance weights: `d = (a₁ w₁ + a₃ w₃) / M`.
    pub dist_w1: T,
    pub dist_w3: T,
}

impl<T: Scalar> VtolParams<T> {
    /// `M = 5·10⁴`, `J = 1.25·10⁴`, `𝒍 = 2`, `𝒈 = 9.81`, `a₁ = 2·10⁷`, `a₃ = 10⁶`.
    pub fn reference() -> Self {
        Self {
            mass: T::lit(5e4),
            inertia: T::lit(1.25e4),
            wing_l: T::lit(2.0),
            grav: T::lit(9.81),
            dist_w1: T::lit(2e7),
            dist_w3: T::lit(1e6),
        }
    }

    pub fn validate(&self) -> Result<(), VtolError> {
        for (name, v) in [
            ("mass", self.mass),
            ("inertia", self.inertia),
            ("wing_l", self.wing_l),
            ("grav", self.grav),
        ] {
            if !(v.is_finite() && v > T::zero()) {
                return Err(VtolError::InvalidParam {
                    name,
                    value: v.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
        if !(self.dist_w1.is_finite() && self.dist_w3.is_finite()) {
            return Err(VtolError::InvalidParam {
                name: "disturbance weight",
                value: f64::NAN,
            });
        }
        Ok(())
    }

    /// Roll input gain `2𝒍/J`.
    pub fn input_gain(&self) -> T {
        T::lit(2.0) * self.wing_l / self.inertia
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExoVariant {
    Linear,
    Duffing,
    Arctan,
}

impl ExoVariant {
    pub const ALL: [ExoVariant; 3] = [ExoVariant::Linear, ExoVariant::Duffing, ExoVariant::Arctan];

    pub fn name(self) -> &'static str {
        match self {
            ExoVariant::Linear => "linear",
            ExoVariant::Duffing => "duffing",
            ExoVariant::Arctan => "arctan",
        }
    }

    /// `ẇ₂` as a function of `w₁`.
    pub fn restoring<T: Scalar>(self, w1: T) -> T {
        match self {
            ExoVariant::Linear => -w1,
            ExoVariant::Duffing => T::lit(4.0) * w1 - w1 * w1 * w1,
            ExoVariant::Arctan => T::lit(3.0) * w1.atan() - w1,
        }
    }

    /// Conserved energy of the `(w₁, w₂)` oscillator.
    pub fn energy_12<T: Scalar>(self, w: &[T]) -> T {
        let half = T::lit(0.5);
        let (w1, w2) = (w[0], w[1]);
        let potential = match self {
            ExoVariant::Linear => half * w1 * w1,
            ExoVariant::Duffing => -T::lit(2.0) * w1 * w1 + w1.powi(4) / T::lit(4.0),
            ExoVariant::Arctan => {
                half * w1 * w1 - T::lit(3.0) * (w1 * w1.atan() - half * (T::one() + w1 * w1).ln())
            }
        };
        half * w2 * w2 + potential
    }

    /// Conserved energy `4w₃² + w₄²` of the `(w₃, w₄)` oscillator.
    pub fn energy_34<T: Scalar>(w: &[T]) -> T {
        T::lit(4.0) * w[2] * w[2] + w[3] * w[3]
    }
}

impl fmt::Display for ExoVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExoVariant {
    type Err = VtolError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "linear" => Ok(ExoVariant::Linear),
            "duffing" => Ok(ExoVariant::Duffing),
            "arctan" | "atan" => Ok(ExoVariant::Arctan),
            other => Err(VtolError::UnknownVariant(other.to_string())),
        }
    }
}

pub fn exo_flow<T: Scalar>(w: &[T], variant: ExoVariant) -> [T; 4] {
    [w[1], variant.restoring(w[0]), w[3], -T::lit(4.0) * w[2]]
}

/// Disturbance and its first two derivatives along the exosystem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disturbance<T> {
    pub d: T,
    pub ls_d: T,
    pub ls2_d: T,
}

pub fn disturbance<T: Scalar>(w: &[T], variant: ExoVariant, p: &VtolParams<T>) -> Disturbance<T> {
    let lin = |a: T, b: T| (p.dist_w1 * a + p.dist_w3 * b) / p.mass;
    Disturbance {
        d: lin(w[0], w[2]),
        ls_d: lin(w[1], w[3]),
        ls2_d: lin(variant.restoring(w[0]), -T::lit(4.0) * w[2]),
    }
}

/// `(q, Ω)` of the transformed dynamics `ζ̇ = q + Ω u`.
pub fn q_omega<T: Scalar>(chi3: T, zeta: T, dist: &Disturbance<T>, p: &VtolParams<T>) -> (T, T) {
    let g = p.grav;
    let phi = ((dist.d - chi3) / g).atan();
    let c = phi.cos();
    let r = dist.ls_d - zeta;
    let q = dist.ls2_d - r * r * (T::lit(2.0) * phi).sin() / g;
    let omega = -g * p.input_gain() / (c * c);
    (q, omega)
}

/// `(χ̇, ζ̇)` of the plant in transformed coordinates.
pub fn transformed_flow<T: Scalar>(
    chi: &[T],
    zeta: T,
    w: &[T],
    u: T,
    variant: ExoVariant,
    p: &VtolParams<T>,
) -> ([T; 3], T) {
    let dist = disturbance(w, variant, p);
    let (q, omega) = q_omega(chi[2], zeta, &dist, p);
    ([chi[1], chi[2], zeta], q + omega * u)
}

/// Lateral position/velocity and roll angle/rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawState<T> {
    pub y1: T,
    pub y2: T,
    pub theta1: T,
    pub theta2: T,
}

fn check_roll<T: Scalar>(theta1: T) -> Result<T, VtolError> {
    let c = theta1.cos();
    let limit = T::lit(std::f64::consts::FRAC_PI_2);
    if !theta1.is_finite() || theta1.abs() >= limit || c.abs() <= T::epsilon() {
        return Err(VtolError::Singularity {
            theta1: theta1.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(c)
}

/// `(ẏ₁, ẏ₂, θ̇₁, θ̇₂) = (y₂, d − 𝒈 tan θ₁, θ₂, 2𝒍J⁻¹u)`.
pub fn vtol_raw_flow<T: Scalar>(
    x: &RawState<T>,
    w: &[T],
    u: T,
    variant: ExoVariant,
    p: &VtolParams<T>,
) -> Result<[T; 4], VtolError> {
    check_roll(x.theta1)?;
    let d = disturbance(w, variant, p).d;
    Ok([x.y2, d - p.grav * x.theta1.tan(), x.theta2, p.input_gain() * u])
}

pub fn to_transformed<T: Scalar>(
    x: &RawState<T>,
    dist: &Disturbance<T>,
    p: &VtolParams<T>,
) -> Result<([T; 3], T), VtolError> {
    let c = check_roll(x.theta1)?;
    let g = p.grav;
    Ok((
        [x.y1, x.y2, dist.d - g * x.theta1.tan()],
        dist.ls_d - g * x.theta2 / (c * c),
    ))
}

pub fn from_transformed<T: Scalar>(chi: &[T], zeta: T, dist: &Disturbance<T>, p: &VtolParams<T>) -> RawState<T> {
    let g = p.grav;
    let theta1 = ((dist.d - chi[2]) / g).atan();
    let c = theta1.cos();
    RawState {
        y1: chi[0],
        y2: chi[1],
        theta1,
        theta2: (dist.ls_d - zeta) * c * c / g,
    }
}

/// The testbed control law on raw coordinates:
/// `u = ℒ[c₁lδ³(y₁+η₁) + c₂lδ²y₂ + c₃lδ(−𝒈 tan θ₁) + l(−𝒈θ₂/cos²θ₁) + K_w ν]`.
pub fn vtol_control_law<T: Scalar>(
    x: &RawState<T>,
    eta1: T,
    stab: &StabilizerParams<T>,
    p: &VtolParams<T>,
) -> Result<T, VtolError> {
    let c = check_roll(x.theta1)?;
    let (c1, c2, c3, lv) = scalar_gains(stab);
    let (l, dl) = (stab.l, stab.delta);
    let g = p.grav;
    let ff = stab.feedforward(1)[0];
    Ok(lv
        * (l * (c1 * dl.powi(3) * (x.y1 + eta1) + c2 * dl * dl * x.y2 + c3 * dl * (-g * x.theta1.tan())
            + (-g * x.theta2 / (c * c)))
            + ff))
}

/// The same law written in transformed coordinates, where `−𝒈 tan θ₁ = χ₃ − d`
/// and `−𝒈θ₂/cos²θ₁ = ζ − L_s d`.
pub fn vtol_control_transformed<T: Scalar>(
    chi: &[T],
    zeta: T,
    eta1: T,
    dist: &Disturbance<T>,
    stab: &StabilizerParams<T>,
) -> T {
    let (c1, c2, c3, lv) = scalar_gains(stab);
    let dl = stab.delta;
    let ff = stab.feedforward(1)[0];
    lv * (stab.l
        * (c1 * dl.powi(3) * (chi[0] + eta1) + c2 * dl * dl * chi[1] + c3 * dl * (chi[2] - dist.d) + (zeta - dist.ls_d))
        + ff)
}

fn scalar_gains<T: Scalar>(stab: &StabilizerParams<T>) -> (T, T, T, T) {
    let c = &stab.c[0];
    assert!(c.len() == 3, "testbed law needs three chain coefficients");
    (c[0], c[1], c[2], stab.l_mat[(0, 0)])
}

/// Steady-state input that keeps the plant on `χ = 0, ζ = 0`, i.e. the `u`
/// solving `q(w, 0) + Ω(w, 0) u = 0`:
/// `u* = 𝒈[L_s²d (𝒈²+d²) − 2d (L_s d)²] / (2𝒍J⁻¹ (𝒈²+d²)²)`.
pub fn ideal_friend<T: Scalar>(w: &[T], variant: ExoVariant, p: &VtolParams<T>) -> T {
    let dist = disturbance(w, variant, p);
    let g = p.grav;
    let s = g * g + dist.d * dist.d;
    g * (dist.ls2_d * s - T::lit(2.0) * dist.d * dist.ls_d * dist.ls_d) / (p.input_gain() * s * s)
}

/// Closed form as printed with the case study,
/// `(𝒈L_s²d − 2d(𝒈²+d²)(L_s d)²) / (2𝒍J⁻¹(𝒈²+d²))`. It coincides with
/// [`ideal_friend`] only where `L_s d = 0`; kept for comparison.
pub fn ideal_friend_printed<T: Scalar>(w: &[T], variant: ExoVariant, p: &VtolParams<T>) -> T {
    let dist = disturbance(w, variant, p);
    let g = p.grav;
    let s = g * g + dist.d * dist.d;
    (g * dist.ls2_d - T::lit(2.0) * dist.d * s * dist.ls_d * dist.ls_d) / (p.input_gain() * s)
}
