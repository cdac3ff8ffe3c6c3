use std::collections::VecDeque;

use crate::Scalar;

use super::{check_dim, GpError};

/// One training point: internal-model state, derivative estimate, and the
/// clock value at admission (time since the previous admission).
#[derive(Debug, Clone, PartialEq)]
pub struct Sample<T> {
    pub eta: Vec<T>,
    pub xi2: Vec<T>,
    pub tau_at_jump: T,
}

/// Fixed-capacity shift register of samples, oldest first.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBuffer<T> {
    capacity: usize,
    eta_dim: usize,
    out_dim: usize,
    entries: VecDeque<Sample<T>>,
    admitted: u64,
}

impl<T: Scalar> SampleBuffer<T> {
    pub fn new(capacity: usize, eta_dim: usize, out_dim: usize) -> Self {
        assert!(capacity > 0, "buffer capacity must be positive");
        Self {
            capacity,
            eta_dim,
            out_dim,
            entries: VecDeque::with_capacity(capacity),
            admitted: 0,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn eta_dim(&self) -> usize {
        self.eta_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.entries.len() == self.capacity
    }

    /// Total number of samples ever admitted.
    pub fn admitted(&self) -> u64 {
        self.admitted
    }

    pub fn get(&self, i: usize) -> Option<&Sample<T>> {
        self.entries.get(i)
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &Sample<T>> + DoubleEndedIterator {
        self.entries.iter()
    }

    /// Appends a sample, evicting the oldest when full. Returns the evicted sample.
    pub fn push(&mut self, eta: Vec<T>, xi2: Vec<T>, tau: T) -> Result<Option<Sample<T>>, GpError> {
        check_dim("sample eta", self.eta_dim, eta.len())?;
        check_dim("sample xi2", self.out_dim, xi2.len())?;
        if !(eta.iter().chain(&xi2).all(|v| v.is_finite()) && tau.is_finite()) {
            return Err(GpError::InvalidSample("non-finite entry".into()));
        }
        if tau < T::zero() {
            return Err(GpError::InvalidSample(format!("negative clock {tau}")));
        }
        let evicted = if self.is_full() {
            self.entries.pop_front()
        } else {
            None
        };
        self.entries.push_back(Sample {
            eta,
            xi2,
            tau_at_jump: tau,
        });
        self.admitted += 1;
        Ok(evicted)
    }

    /// Time elapsed between the admission of sample `j` and the newest admission.
    pub fn age(&self, j: usize) -> T {
        self.entries
            .iter()
            .skip(j + 1)
            .fold(T::zero(), |s, smp| s + smp.tau_at_jump)
    }

    /// Ages of all samples, oldest first.
    pub fn ages(&self) -> Vec<T> {
        let mut out = vec![T::zero(); self.len()];
        let mut acc = T::zero();
        for (j, smp) in self.entries.iter().enumerate().rev() {
            out[j] = acc;
            acc = acc + smp.tau_at_jump;
        }
        out
    }

    /// Euclidean norm of all stored values, for logging.
    pub fn norm(&self) -> T {
        self.entries
            .iter()
            .flat_map(|s| s.eta.iter().chain(&s.xi2).chain(std::iter::once(&s.tau_at_jump)))
            .fold(T::zero(), |a, &v| a + v * v)
            .sqrt()
    }
}
