use crate::Scalar;

use super::HybridArc;

/// Empirical dwell-time statistics of an arc.
///
/// Inter-jump statistics need at least two jumps and are `None` otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct DwellReport<T> {
    pub jumps: usize,
    /// Shortest time between consecutive jumps.
    pub t_min: Option<T>,
    /// Longest time between consecutive jumps.
    pub t_max: Option<T>,
    /// Largest monitored value right after a jump.
    pub max_post_jump: Option<T>,
    /// Every post-jump monitored value is strictly below the threshold.
    pub post_jump_below_threshold: bool,
    /// Largest chord slope `|Δm/Δt|` of the monitored value within flow segments.
    pub max_rate: Option<T>,
    /// `(threshold − max_post_jump) / max_rate`.
    pub rate_bound: Option<T>,
    /// `t_min ≥ rate_bound` (with relative slack for rounding).
    pub rate_bound_holds: Option<bool>,
}

impl<T: Scalar> DwellReport<T> {
    /// All dwell assertions that are defined for this arc hold.
    pub fn ok(&self) -> bool {
        self.post_jump_below_threshold
            && self.t_min.map_or(true, |t| t > T::zero())
            && self.rate_bound_holds.unwrap_or(true)
    }
}

/// Reports dwell-time witnesses for an arc whose monitored value is compared
/// against `threshold` by the jump set.
pub fn dwell_time_monitor<T: Scalar>(arc: &HybridArc<T>, threshold: T) -> DwellReport<T> {
    let times: Vec<T> = arc.jumps.iter().map(|j| j.t).collect();
    let gaps: Vec<T> = times.windows(2).map(|w| w[1] - w[0]).collect();
    let fold = |f: fn(T, T) -> T| gaps.iter().copied().reduce(f);
    let t_min = fold(T::min);
    let t_max = fold(T::max);
    let max_post_jump = arc.jumps.iter().map(|j| j.monitor_post).reduce(T::max);
    let post_jump_below_threshold = arc.jumps.iter().all(|j| j.monitor_post < threshold);

    // chord slopes over flow segments that lie between two jumps
    let mut max_rate: Option<T> = None;
    let last = arc.jumps.len();
    for seg in arc.segments.iter().filter(|s| s.j >= 1 && s.j < last) {
        for k in 1..seg.len() {
            let dt = seg.times[k] - seg.times[k - 1];
            if dt > T::zero() {
                let r = ((seg.monitor[k] - seg.monitor[k - 1]) / dt).abs();
                max_rate = Some(max_rate.map_or(r, |m: T| m.max(r)));
            }
        }
    }
    let rate_bound = match (max_post_jump, max_rate) {
        (Some(p), Some(r)) if gaps.len() > 0 && r > T::zero() => Some((threshold - p) / r),
        _ => None,
    };
    let slack = T::one() - T::lit(1e-9);
    let rate_bound_holds = match (t_min, rate_bound) {
        (Some(t), Some(b)) => Some(t >= b * slack),
        _ => None,
    };
    DwellReport {
        jumps: arc.jumps.len(),
        t_min,
        t_max,
        max_post_jump,
        post_jump_below_threshold,
        max_rate,
        rate_bound,
        rate_bound_holds,
    }
}
