use crate::Scalar;

use super::HybridError;

/// A hybrid system whose flow and jump sets share one event function.
///
/// Discrete state that only changes at jumps (for instance a sample buffer)
/// may live inside the implementor; `jump` takes `&mut self` for that reason.
pub trait HybridSystem<T: Scalar> {
    fn dim(&self) -> usize;

    fn flow(&self, t: T, x: &[T], dx: &mut [T]);

    /// `≥ 0` in the jump set, `≤ 0` in the flow set.
    fn event_value(&self, x: &[T]) -> T;

    fn jump(&mut self, t: T, x: &mut [T]) -> Result<(), HybridError>;

    /// Systems without a jump set never jump.
    fn has_jumps(&self) -> bool {
        true
    }

    /// Scalar recorded along the arc, e.g. the quantity the event compares
    /// against a threshold. Defaults to the event value.
    fn monitor(&self, x: &[T]) -> T {
        self.event_value(x)
    }

    fn output_names(&self) -> Vec<String> {
        Vec::new()
    }

    fn outputs(&self, _t: T, _x: &[T]) -> Vec<T> {
        Vec::new()
    }

    /// Size of any internal discrete store, logged with each jump.
    fn discrete_len(&self) -> usize {
        0
    }
}

type FlowFn<T> = Box<dyn Fn(T, &[T], &mut [T]) + Send + Sync>;
type EventFn<T> = Box<dyn Fn(&[T]) -> T + Send + Sync>;
type JumpFn<T> = Box<dyn FnMut(&mut [T]) + Send>;

/// Hybrid system assembled from closures.
pub struct FnSystem<T> {
    dim: usize,
    flow: FlowFn<T>,
    event: Option<EventFn<T>>,
    jump: JumpFn<T>,
}

impl<T: Scalar> FnSystem<T> {
    /// A pure flow with an empty jump set.
    pub fn new(dim: usize, flow: impl Fn(T, &[T], &mut [T]) + Send + Sync + 'static) -> Self {
        Self {
            dim,
            flow: Box::new(flow),
            event: None,
            jump: Box::new(|_| {}),
        }
    }

    pub fn with_event(mut self, event: impl Fn(&[T]) -> T + Send + Sync + 'static) -> Self {
        self.event = Some(Box::new(event));
        self
    }

    pub fn with_jump(mut self, jump: impl FnMut(&mut [T]) + Send + 'static) -> Self {
        self.jump = Box::new(jump);
        self
    }
}

impl<T: Scalar> HybridSystem<T> for FnSystem<T> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn flow(&self, t: T, x: &[T], dx: &mut [T]) {
        (self.flow)(t, x, dx)
    }

    fn event_value(&self, x: &[T]) -> T {
        match &self.event {
            Some(g) => g(x),
            None => T::neg_infinity(),
        }
    }

    fn jump(&mut self, _t: T, x: &mut [T]) -> Result<(), HybridError> {
        (self.jump)(x);
        Ok(())
    }

    fn has_jumps(&self) -> bool {
        self.event.is_some()
    }
}
