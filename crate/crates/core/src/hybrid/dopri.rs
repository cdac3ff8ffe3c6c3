//! Dormand-Prince 5(4) with Hairer's continuous extension.

use crate::Scalar;

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
/// Fifth-order weights minus fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

/// Stage storage reused across steps.
pub(crate) struct Stepper<T> {
    k: [Vec<T>; 7],
    tmp: Vec<T>,
    pub y1: Vec<T>,
    pub err: Vec<T>,
}

/// Coefficients of the continuous extension over one accepted step.
pub(crate) struct Dense<T> {
    pub t0: T,
    pub h: T,
    r: [Vec<T>; 5],
}

impl<T: Scalar> Dense<T> {
    pub fn eval(&self, theta: T, out: &mut [T]) {
        let one = T::one();
        let s1 = one - theta;
        for i in 0..out.len() {
            out[i] = self.r[0][i]
                + theta * (self.r[1][i] + s1 * (self.r[2][i] + theta * (self.r[3][i] + s1 * self.r[4][i])));
        }
    }
}

impl<T: Scalar> Stepper<T> {
    pub fn new(n: usize) -> Self {
        Self {
            k: std::array::from_fn(|_| vec![T::zero(); n]),
            tmp: vec![T::zero(); n],
            y1: vec![T::zero(); n],
            err: vec![T::zero(); n],
        }
    }

    /// Derivative at the start of the next step (FSAL).
    pub fn k1(&self) -> &[T] {
        &self.k[0]
    }

    pub fn set_k1(&mut self, f: impl FnOnce(&mut [T])) {
        f(&mut self.k[0]);
    }

    /// Attempts a step from `(t, y)`; `k1` must hold `f(t, y)`. Leaves the
    /// solution in `y1`, the error estimate in `err`, and `f(t+h, y1)` in the
    /// last stage.
    pub fn attempt(&mut self, t: T, y: &[T], h: T, f: &impl Fn(T, &[T], &mut [T])) {
        let n = y.len();
        for s in 1..7 {
            for i in 0..n {
                let mut acc = T::zero();
                for (j, &a) in A[s].iter().enumerate().take(s) {
                    if a != 0.0 {
                        acc = acc + T::lit(a) * self.k[j][i];
                    }
                }
                self.tmp[i] = y[i] + h * acc;
            }
            let (_, tail) = self.k.split_at_mut(s);
            f(t + T::lit(C[s]) * h, &self.tmp, &mut tail[0]);
            if s == 6 {
                self.y1.copy_from_slice(&self.tmp);
            }
        }
        for i in 0..n {
            let mut acc = T::zero();
            for (j, &e) in E.iter().enumerate() {
                if e != 0.0 {
                    acc = acc + T::lit(e) * self.k[j][i];
                }
            }
            self.err[i] = h * acc;
        }
    }

    /// RMS of the error scaled by `atol + rtol·max(|y0|, |y1|)`.
    pub fn error_norm(&self, y0: &[T], rtol: T, atol: T) -> T {
        let n = y0.len();
        if n == 0 {
            return T::zero();
        }
        let mut s = T::zero();
        for i in 0..n {
            let sc = atol + rtol * y0[i].abs().max(self.y1[i].abs());
            let r = self.err[i] / sc;
            s = s + r * r;
        }
        (s / T::from_usize_lossy(n)).sqrt()
    }

    pub fn stages_finite(&self) -> bool {
        self.k.iter().all(|k| k.iter().all(|v| v.is_finite())) && self.y1.iter().all(|v| v.is_finite())
    }

    pub fn dense(&self, t0: T, y0: &[T], h: T) -> Dense<T> {
        let n = y0.len();
        let mut r: [Vec<T>; 5] = std::array::from_fn(|_| vec![T::zero(); n]);
        for i in 0..n {
            let dy = self.y1[i] - y0[i];
            let bspl = h * self.k[0][i] - dy;
            r[0][i] = y0[i];
            r[1][i] = dy;
            r[2][i] = bspl;
            r[3][i] = dy - h * self.k[6][i] - bspl;
            let mut acc = T::zero();
            for (j, &d) in D.iter().enumerate() {
                if d != 0.0 {
                    acc = acc + T::lit(d) * self.k[j][i];
                }
            }
            r[4][i] = h * acc;
        }
        Dense { t0, h, r }
    }

    /// Moves the last stage into the first (FSAL).
    pub fn advance(&mut self) {
        self.k.swap(0, 6);
    }
}
