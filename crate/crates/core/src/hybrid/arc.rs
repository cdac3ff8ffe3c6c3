use crate::Scalar;

/// Dense record of one flow interval `[t_j, t_{j+1}] × {j}`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowSegment<T> {
    pub j: usize,
    pub times: Vec<T>,
    pub states: Vec<Vec<T>>,
    pub outputs: Vec<Vec<T>>,
    pub monitor: Vec<T>,
}

impl<T: Scalar> FlowSegment<T> {
    pub(crate) fn new(j: usize) -> Self {
        Self {
            j,
            times: Vec::new(),
            states: Vec::new(),
            outputs: Vec::new(),
            monitor: Vec::new(),
        }
    }

    pub fn start(&self) -> T {
        self.times[0]
    }

    pub fn end(&self) -> T {
        *self.times.last().unwrap()
    }

    pub fn duration(&self) -> T {
        self.end() - self.start()
    }

    pub fn first_state(&self) -> &[T] {
        &self.states[0]
    }

    pub fn last_state(&self) -> &[T] {
        self.states.last().unwrap()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// One executed jump, taking the arc from `j` to `j + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpRecord<T> {
    /// Jump counter after the jump.
    pub j: usize,
    pub t: T,
    pub pre: Vec<T>,
    pub post: Vec<T>,
    pub monitor_pre: T,
    pub monitor_post: T,
    pub event_pre: T,
    pub event_post: T,
    /// Width of the time bracket the event was localised in (zero for jumps
    /// that were not preceded by flow).
    pub bracket: T,
    /// Discrete store size after the jump.
    pub discrete_len: usize,
}

/// A solution on a hybrid time domain.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridArc<T> {
    pub segments: Vec<FlowSegment<T>>,
    pub jumps: Vec<JumpRecord<T>>,
    pub output_names: Vec<String>,
    /// Set when the run stopped at the jump cap before the horizon.
    pub zeno: bool,
    pub t_end: T,
    pub steps_accepted: usize,
    pub steps_rejected: usize,
}

impl<T: Scalar> HybridArc<T> {
    /// `([t_j, t_{j+1}], j)` for every flow interval.
    pub fn domain(&self) -> Vec<(T, T, usize)> {
        self.segments
            .iter()
            .map(|s| (s.start(), s.end(), s.j))
            .collect()
    }

    pub fn jump_count(&self) -> usize {
        self.jumps.len()
    }

    pub fn final_state(&self) -> Option<&[T]> {
        self.segments.last().map(|s| s.last_state())
    }

    /// Final time reached.
    pub fn t_final(&self) -> T {
        self.segments.last().map_or(T::zero(), |s| s.end())
    }

    /// Iterates over every recorded sample as `(t, j, state, outputs, monitor)`.
    pub fn samples(&self) -> impl Iterator<Item = (T, usize, &[T], &[T], T)> {
        self.segments.iter().flat_map(|s| {
            (0..s.len()).map(move |i| {
                (
                    s.times[i],
                    s.j,
                    s.states[i].as_slice(),
                    s.outputs[i].as_slice(),
                    s.monitor[i],
                )
            })
        })
    }

    pub fn output_index(&self, name: &str) -> Option<usize> {
        self.output_names.iter().position(|n| n == name)
    }

    /// Checks the domain tiles `[0, t_final]` and that consecutive segments
    /// are joined by the recorded jumps.
    pub fn is_well_formed(&self) -> bool {
        if self.segments.is_empty() {
            return self.jumps.is_empty();
        }
        if self.segments.len() != self.jumps.len() + 1 {
            return false;
        }
        for (k, s) in self.segments.iter().enumerate() {
            if s.j != k || s.is_empty() || s.times.windows(2).any(|w| w[1] < w[0]) {
                return false;
            }
        }
        for (k, jr) in self.jumps.iter().enumerate() {
            let before = &self.segments[k];
            let after = &self.segments[k + 1];
            if jr.j != k + 1
                || jr.t != before.end()
                || jr.t != after.start()
                || jr.pre.as_slice() != before.last_state()
                || jr.post.as_slice() != after.first_state()
            {
                return false;
            }
        }
        self.segments[0].start() == T::zero()
    }
}
