//! Small dense helpers for symmetric positive-definite matrices stored
//! row-major in flat slices. Dimensions here are tiny (a Gaussian's `d`), so
//! plain loops beat pulling in a matrix type on the clustering hot path.

/// Relative pivot threshold: a pivot at or below `PIVOT_RTOL * trace` marks
/// the matrix as numerically singular.
pub const PIVOT_RTOL: f64 = 1e-12;

/// Lower-triangular Cholesky factor of `a` (d×d, row-major).
///
/// Returns `None` when `a` is not numerically positive definite, including
/// when any pivot falls below `PIVOT_RTOL * trace(a)`.
pub fn cholesky(a: &[f64], d: usize) -> Option<Vec<f64>> {
    debug_assert_eq!(a.len(), d * d);
    let trace: f64 = (0..d).map(|i| a[i * d + i]).sum();
    if !(trace > 0.0) || !trace.is_finite() {
        return None;
    }
    let floor = PIVOT_RTOL * trace;
    let mut l = vec![0.0; d * d];
    for j in 0..d {
        let mut diag = a[j * d + j];
        for k in 0..j {
            diag -= l[j * d + k] * l[j * d + k];
        }
        if !(diag > floor) {
            return None;
        }
        let ljj = diag.sqrt();
        l[j * d + j] = ljj;
        for i in (j + 1)..d {
            let mut s = a[i * d + j];
            for k in 0..j {
                s -= l[i * d + k] * l[j * d + k];
            }
            l[i * d + j] = s / ljj;
        }
    }
    Some(l)
}

/// Solves `L x = b` in place for lower-triangular `L`.
pub fn forward_solve(l: &[f64], d: usize, b: &mut [f64]) {
    for i in 0..d {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * d + k] * b[k];
        }
        b[i] = s / l[i * d + i];
    }
}

/// Solves `Lᵀ x = b` in place for lower-triangular `L`.
pub fn backward_solve_transpose(l: &[f64], d: usize, b: &mut [f64]) {
    for i in (0..d).rev() {
        let mut s = b[i];
        for k in (i + 1)..d {
            s -= l[k * d + i] * b[k];
        }
        b[i] = s / l[i * d + i];
    }
}

/// `ln |A|` from the Cholesky factor of `A`.
pub fn log_det(l: &[f64], d: usize) -> f64 {
    2.0 * (0..d).map(|i| l[i * d + i].ln()).sum::<f64>()
}

/// `A⁻¹` from the Cholesky factor of `A`, row-major.
pub fn inverse(l: &[f64], d: usize) -> Vec<f64> {
    let mut inv = vec![0.0; d * d];
    let mut col = vec![0.0; d];
    for j in 0..d {
        col.iter_mut().for_each(|c| *c = 0.0);
        col[j] = 1.0;
        forward_solve(l, d, &mut col);
        backward_solve_transpose(l, d, &mut col);
        for i in 0..d {
            inv[i * d + j] = col[i];
        }
    }
    inv
}

/// `‖L₂⁻¹ L₁‖²_F`, i.e. `tr(A₂⁻¹ A₁)` for Cholesky factors `L₁`, `L₂`.
pub fn trace_of_solve(l2: &[f64], l1: &[f64], d: usize) -> f64 {
    let mut col = vec![0.0; d];
    let mut total = 0.0;
    for j in 0..d {
        for i in 0..d {
            col[i] = l1[i * d + j];
        }
        forward_solve(l2, d, &mut col);
        total += col.iter().map(|c| c * c).sum::<f64>();
    }
    total
}

/// `bᵀ A⁻¹ b` from the Cholesky factor of `A`.
pub fn quad_form_inv(l: &[f64], d: usize, b: &[f64]) -> f64 {
    let mut v = b.to_vec();
    forward_solve(l, d, &mut v);
    v.iter().map(|x| x * x).sum()
}
