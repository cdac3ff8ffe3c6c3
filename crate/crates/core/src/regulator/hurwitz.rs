use crate::linalg::Matrix;
use crate::Scalar;

/// Routh test for `sⁿ + a₁sⁿ⁻¹ + … + aₙ` with `coeffs = [a₁, …, aₙ]`.
pub fn is_hurwitz<T: Scalar>(coeffs: &[T]) -> bool {
    let n = coeffs.len();
    if n == 0 {
        return true;
    }
    if coeffs.iter().any(|c| !c.is_finite() || *c <= T::zero()) {
        return false;
    }
    let mut poly = Vec::with_capacity(n + 1);
    poly.push(T::one());
    poly.extend_from_slice(coeffs);
    let width = n / 2 + 1;
    let mut prev: Vec<T> = (0..width).map(|k| poly.get(2 * k).copied().unwrap_or(T::zero())).collect();
    let mut cur: Vec<T> = (0..width).map(|k| poly.get(2 * k + 1).copied().unwrap_or(T::zero())).collect();
    for _ in 0..n {
        if cur[0] <= T::zero() {
            return false;
        }
        let mut next = vec![T::zero(); width];
        for k in 0..width - 1 {
            next[k] = (cur[0] * prev[k + 1] - prev[0] * cur[k + 1]) / cur[0];
        }
        prev = cur;
        cur = next;
    }
    true
}

/// Companion matrix of `sⁿ + a₁sⁿ⁻¹ + … + aₙ` in controllable form.
pub fn companion_matrix<T: Scalar>(coeffs: &[T]) -> Matrix<T> {
    let n = coeffs.len();
    let mut m = Matrix::zeros(n, n);
    for i in 0..n.saturating_sub(1) {
        m[(i, i + 1)] = T::one();
    }
    for j in 0..n {
        m[(n - 1, j)] = -coeffs[n - 1 - j];
    }
    m
}
