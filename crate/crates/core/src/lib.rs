//! Gaussian-process adaptive internal-model regulation.
//!
//! The crate is organised bottom-up:
//!
//! * [`gp`] streaming GP identifier with a time-forgetting kernel and a
//!   fixed-capacity shift buffer,
//! * [`regulator`] internal-model unit, high-gain observer, static stabiliser
//!   and a linearly-parametrised least-squares baseline,
//! * [`hybrid`] flow/jump simulator with adaptive Runge-Kutta integration,
//!   event localisation and dwell-time monitoring,
//! * [`vtol`] the lateral VTOL testbed and its closed-loop assembly.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the scalar to `f64`, which is what the experiments use.

pub mod gp;
pub mod hybrid;
pub mod linalg;
pub mod regulator;
pub mod scalar;
pub mod vtol;

pub use scalar::Scalar;

pub type KernelParamsF64 = gp::KernelParams<f64>;
pub type SampleBufferF64 = gp::SampleBuffer<f64>;
pub type GpPosteriorF64 = gp::GpPosterior<f64>;
pub type MatrixF64 = linalg::Matrix<f64>;
pub type IntegratorConfigF64 = hybrid::IntegratorConfig<f64>;
pub type HybridArcF64 = hybrid::HybridArc<f64>;
pub type VtolParamsF64 = vtol::VtolParams<f64>;
pub type ClosedLoopF64 = vtol::ClosedLoop<f64>;

pub type KernelParamsF32 = gp::KernelParams<f32>;
pub type GpPosteriorF32 = gp::GpPosterior<f32>;
