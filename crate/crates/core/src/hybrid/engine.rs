use crate::Scalar;

use super::dopri::{Dense, Stepper};
use super::{FlowSegment, HybridArc, HybridError, HybridSystem, JumpRecord};

#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorConfig<T> {
    pub step_initial: T,
    pub tol_rel: T,
    pub tol_abs: T,
    /// Width of the time bracket an event is localised to.
    pub event_tol: T,
    pub t_end: T,
    /// Jump cap; reaching it flags the arc as zeno-suspect.
    pub max_jumps: usize,
    pub max_step: T,
    pub min_step: T,
    /// Recording period; `0` records every accepted step. Segment end points
    /// are always recorded.
    pub sample_dt: T,
    /// Interior points of each step at which the event function is checked
    /// in addition to the step end.
    pub event_probes: usize,
}

impl<T: Scalar> Default for IntegratorConfig<T> {
    fn default() -> Self {
        Self {
            step_initial: T::lit(1e-4),
            tol_rel: T::lit(1e-8),
            tol_abs: T::lit(1e-10),
            event_tol: T::lit(1e-10),
            t_end: T::one(),
            max_jumps: 100_000,
            max_step: T::infinity(),
            min_step: T::lit(1e-14),
            sample_dt: T::zero(),
            event_probes: 3,
        }
    }
}

impl<T: Scalar> IntegratorConfig<T> {
    pub fn validate(&self) -> Result<(), HybridError> {
        let pos = |name: &str, v: T| {
            if v > T::zero() && !v.is_nan() {
                Ok(())
            } else {
                Err(HybridError::Config(format!("{name} must be positive, got {v}")))
            }
        };
        pos("step_initial", self.step_initial)?;
        pos("tol_rel", self.tol_rel)?;
        pos("tol_abs", self.tol_abs)?;
        pos("event_tol", self.event_tol)?;
        pos("max_step", self.max_step)?;
        pos("min_step", self.min_step)?;
        if !(self.t_end >= T::zero()) || !self.t_end.is_finite() {
            return Err(HybridError::Config(format!("t_end must be finite and >= 0, got {}", self.t_end)));
        }
        if !(self.sample_dt >= T::zero()) {
            return Err(HybridError::Config("sample_dt must be >= 0".into()));
        }
        if self.max_jumps == 0 {
            return Err(HybridError::Config("max_jumps must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitReason {
    Event,
    Horizon,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowOutcome<T> {
    pub segment: FlowSegment<T>,
    pub exit: ExitReason,
    /// Event localisation bracket (zero at the horizon).
    pub bracket: T,
    /// Suggested step size for the next flow.
    pub h_next: T,
    pub accepted: usize,
    pub rejected: usize,
}

fn to_f64<T: Scalar>(x: &[T]) -> Vec<f64> {
    x.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect()
}

fn record<T: Scalar, S: HybridSystem<T> + ?Sized>(sys: &S, seg: &mut FlowSegment<T>, t: T, x: &[T]) {
    seg.times.push(t);
    seg.states.push(x.to_vec());
    seg.outputs.push(sys.outputs(t, x));
    seg.monitor.push(sys.monitor(x));
}

/// Integrates the flow from `(t_start, state)` until the event function
/// crosses zero upward or the horizon `config.t_end` is reached.
pub fn integrate_flow<T: Scalar, S: HybridSystem<T> + ?Sized>(
    sys: &S,
    state: &[T],
    t_start: T,
    j: usize,
    config: &IntegratorConfig<T>,
) -> Result<FlowOutcome<T>, HybridError> {
    flow_with_step(sys, state, t_start, j, config, config.step_initial)
}

pub(crate) fn flow_with_step<T: Scalar, S: HybridSystem<T> + ?Sized>(
    sys: &S,
    state: &[T],
    t_start: T,
    j: usize,
    config: &IntegratorConfig<T>,
    h_start: T,
) -> Result<FlowOutcome<T>, HybridError> {
    let n = sys.dim();
    assert_eq!(state.len(), n, "state dimension");
    let f = |t: T, x: &[T], dx: &mut [T]| sys.flow(t, x, dx);
    let mut seg = FlowSegment::new(j);
    let mut t = t_start;
    let mut y = state.to_vec();
    record(sys, &mut seg, t, &y);

    let mut st = Stepper::new(n);
    st.set_k1(|k| f(t, &y, k));
    if !st.k1().iter().all(|v| v.is_finite()) {
        return Err(HybridError::NonFinite {
            t: t.to_f64().unwrap_or(f64::NAN),
            state: to_f64(&y),
        });
    }

    let t_end = config.t_end;
    let sample = config.sample_dt > T::zero();
    let mut next_sample = if sample {
        ((t / config.sample_dt).floor() + T::one()) * config.sample_dt
    } else {
        T::infinity()
    };
    let jumps = sys.has_jumps();
    let mut h = h_start.min(config.max_step);
    let mut accepted = 0;
    let mut rejected = 0;
    let mut reject_streak = 0;
    let mut buf = vec![T::zero(); n];
    let safety = T::lit(0.9);
    let fac_min = T::lit(0.2);
    let fac_max = T::lit(5.0);

    if t >= t_end {
        return Ok(FlowOutcome {
            segment: seg,
            exit: ExitReason::Horizon,
            bracket: T::zero(),
            h_next: h,
            accepted,
            rejected,
        });
    }

    loop {
        let remaining = t_end - t;
        let mut last = false;
        if h >= remaining {
            h = remaining;
            last = true;
        } else if h > remaining * T::lit(0.5) && h < remaining {
            // avoid a sliver step at the horizon
            h = remaining * T::lit(0.5);
        }
        if h < config.min_step * T::one().max(t.abs()) && !last {
            return Err(HybridError::StepUnderflow {
                t: t.to_f64().unwrap_or(f64::NAN),
                h: h.to_f64().unwrap_or(f64::NAN),
                state: to_f64(&y),
            });
        }
        st.attempt(t, &y, h, &f);
        let err = if st.stages_finite() {
            st.error_norm(&y, config.tol_rel, config.tol_abs)
        } else {
            T::infinity()
        };
        if !(err <= T::one()) {
            rejected += 1;
            reject_streak += 1;
            if reject_streak > 60 {
                return Err(HybridError::StepUnderflow {
                    t: t.to_f64().unwrap_or(f64::NAN),
                    h: h.to_f64().unwrap_or(f64::NAN),
                    state: to_f64(&y),
                });
            }
            let fac = if err.is_finite() {
                (safety * err.powf(T::lit(-0.2))).max(fac_min).min(T::one())
            } else {
                T::lit(0.1)
            };
            h = h * fac;
            continue;
        }
        reject_streak = 0;
        accepted += 1;
        let t1 = if last { t_end } else { t + h };
        let dense = st.dense(t, &y, h);

        // event search on the continuous extension
        let mut event: Option<(T, T)> = None;
        if jumps {
            let probes = config.event_probes + 1;
            let mut lo = T::zero();
            for p in 1..=probes {
                let theta = T::from_usize_lossy(p) / T::from_usize_lossy(probes);
                let g = if p == probes {
                    sys.event_value(&st.y1)
                } else {
                    dense.eval(theta, &mut buf);
                    sys.event_value(&buf)
                };
                if g >= T::zero() {
                    event = Some(localize(sys, &dense, lo, theta, config.event_tol, &mut buf));
                    break;
                }
                lo = theta;
            }
        }

        if let Some((theta_hi, bracket)) = event {
            let te = t + theta_hi * h;
            if sample {
                emit_samples(sys, &mut seg, &dense, &mut next_sample, config.sample_dt, te, &mut buf);
            }
            dense.eval(theta_hi, &mut buf);
            let te = if theta_hi == T::one() { t1 } else { te };
            let ye = if theta_hi == T::one() { st.y1.clone() } else { buf.clone() };
            record(sys, &mut seg, te, &ye);
            return Ok(FlowOutcome {
                segment: seg,
                exit: ExitReason::Event,
                bracket,
                h_next: h,
                accepted,
                rejected,
            });
        }

        if sample {
            emit_samples(sys, &mut seg, &dense, &mut next_sample, config.sample_dt, t1, &mut buf);
        }
        y.copy_from_slice(&st.y1);
        t = t1;
        st.advance();
        if !sample || last {
            if !(sample && seg.times.last() == Some(&t)) {
                record(sys, &mut seg, t, &y);
            }
        }
        if last {
            return Ok(FlowOutcome {
                segment: seg,
                exit: ExitReason::Horizon,
                bracket: T::zero(),
                h_next: h,
                accepted,
                rejected,
            });
        }
        let fac = if err > T::zero() {
            (safety * err.powf(T::lit(-0.2))).max(fac_min).min(fac_max)
        } else {
            fac_max
        };
        h = (h * fac).min(config.max_step);
    }
}

/// Records grid samples strictly before `t_stop`.
fn emit_samples<T: Scalar, S: HybridSystem<T> + ?Sized>(
    sys: &S,
    seg: &mut FlowSegment<T>,
    dense: &Dense<T>,
    next: &mut T,
    dt: T,
    t_stop: T,
    buf: &mut [T],
) {
    while *next < t_stop {
        let theta = (*next - dense.t0) / dense.h;
        dense.eval(theta, buf);
        record(sys, seg, *next, buf);
        *next = *next + dt;
    }
}

/// Illinois regula falsi on `[lo, hi]` (step fractions) with
/// `g(lo) < 0 ≤ g(hi)`, falling back to bisection when the bracket stalls.
/// Returns the upper end and the final bracket width in time.
fn localize<T: Scalar, S: HybridSystem<T> + ?Sized>(
    sys: &S,
    dense: &Dense<T>,
    mut lo: T,
    mut hi: T,
    tol: T,
    buf: &mut [T],
) -> (T, T) {
    let half = T::lit(0.5);
    dense.eval(lo, buf);
    let mut g_lo = sys.event_value(buf);
    dense.eval(hi, buf);
    let mut g_hi = sys.event_value(buf);
    // which end moved last: -1 low, +1 high
    let mut side = 0i8;
    let mut width = hi - lo;
    for it in 0..200 {
        if (hi - lo) * dense.h <= tol {
            break;
        }
        let secant = lo - g_lo * (hi - lo) / (g_hi - g_lo);
        let stalled = it % 3 == 2 && (hi - lo) > half * width;
        if it % 3 == 2 {
            width = hi - lo;
        }
        let mid = if stalled || !secant.is_finite() || secant <= lo || secant >= hi {
            (lo + hi) * half
        } else {
            secant
        };
        if mid <= lo || mid >= hi {
            break;
        }
        dense.eval(mid, buf);
        let g = sys.event_value(buf);
        if g >= T::zero() {
            hi = mid;
            g_hi = g;
            if side == 1 {
                g_lo = g_lo * half;
            }
            side = 1;
        } else {
            lo = mid;
            g_lo = g;
            if side == -1 {
                g_hi = g_hi * half;
            }
            side = -1;
        }
    }
    (hi, (hi - lo) * dense.h)
}

/// Applies the jump map. The state must lie in the jump set.
pub fn execute_jump<T: Scalar, S: HybridSystem<T> + ?Sized>(
    sys: &mut S,
    t: T,
    state: &[T],
) -> Result<Vec<T>, HybridError> {
    let g = sys.event_value(state);
    if !sys.has_jumps() || !(g >= T::zero()) {
        return Err(HybridError::JumpOutsideJumpSet {
            t: t.to_f64().unwrap_or(f64::NAN),
            value: g.to_f64().unwrap_or(f64::NAN),
        });
    }
    let mut x = state.to_vec();
    sys.jump(t, &mut x)?;
    Ok(x)
}

/// Alternates flows and jumps from `t = 0` until `config.t_end` or the jump cap.
///
/// A state in the jump set is jumped immediately, including at `t = 0`;
/// every jump is followed by a (possibly single-point) flow segment.
pub fn simulate<T: Scalar, S: HybridSystem<T> + ?Sized>(
    sys: &mut S,
    initial_state: &[T],
    config: &IntegratorConfig<T>,
) -> Result<HybridArc<T>, HybridError> {
    config.validate()?;
    assert_eq!(initial_state.len(), sys.dim(), "initial state dimension");
    let mut arc = HybridArc {
        segments: Vec::new(),
        jumps: Vec::new(),
        output_names: sys.output_names(),
        zeno: false,
        t_end: config.t_end,
        steps_accepted: 0,
        steps_rejected: 0,
    };
    if config.t_end == T::zero() {
        return Ok(arc);
    }
    let mut t = T::zero();
    let mut x = initial_state.to_vec();
    let mut j = 0usize;
    let mut h = config.step_initial;
    loop {
        let in_jump_set = sys.has_jumps() && sys.event_value(&x) >= T::zero();
        let (seg, exit, bracket) = if in_jump_set || t >= config.t_end {
            let mut seg = FlowSegment::new(j);
            record(&*sys, &mut seg, t, &x);
            let exit = if in_jump_set { ExitReason::Event } else { ExitReason::Horizon };
            (seg, exit, T::zero())
        } else {
            let out = flow_with_step(&*sys, &x, t, j, config, h)?;
            arc.steps_accepted += out.accepted;
            arc.steps_rejected += out.rejected;
            h = out.h_next;
            (out.segment, out.exit, out.bracket)
        };
        t = seg.end();
        x = seg.last_state().to_vec();
        arc.segments.push(seg);
        if exit == ExitReason::Horizon {
            break;
        }
        if arc.jumps.len() >= config.max_jumps {
            arc.zeno = true;
            break;
        }
        let monitor_pre = sys.monitor(&x);
        let event_pre = sys.event_value(&x);
        let post = execute_jump(sys, t, &x)?;
        j += 1;
        arc.jumps.push(JumpRecord {
            j,
            t,
            pre: x.clone(),
            post: post.clone(),
            monitor_pre,
            monitor_post: sys.monitor(&post),
            event_pre,
            event_post: sys.event_value(&post),
            bracket,
            discrete_len: sys.discrete_len(),
        });
        x = post;
    }
    Ok(arc)
}
