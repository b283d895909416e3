use nalgebra::{DMatrix, DVector};

/// Singular values, descending.
pub fn singular_values(a: &DMatrix<f64>) -> Vec<f64> {
    let mut s: Vec<f64> = a.singular_values().iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Number of singular values above `tol`.
pub fn numerical_rank(a: &DMatrix<f64>, tol: f64) -> usize {
    singular_values(a).into_iter().filter(|&s| s > tol).count()
}

/// Orthonormal basis of the right null space of a square matrix: the right
/// singular vectors whose singular values do not exceed `tol`.
pub fn null_space(a: &DMatrix<f64>, tol: f64) -> Vec<DVector<f64>> {
    let n = a.ncols();
    if a.nrows() < n {
        let mut padded = DMatrix::zeros(n, n);
        padded.view_mut((0, 0), (a.nrows(), n)).copy_from(a);
        return null_space(&padded, tol);
    }
    let svd = a.clone().svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let mut out: Vec<(f64, DVector<f64>)> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= tol)
        .map(|(i, &s)| (s, v_t.row(i).transpose()))
        .collect();
    out.sort_by(|x, y| x.0.total_cmp(&y.0));
    out.into_iter().map(|(_, v)| v).collect()
}

/// Ratio of extreme singular values; infinite for singular input.
pub fn condition_number(a: &DMatrix<f64>) -> f64 {
    let s = singular_values(a);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        _ => f64::INFINITY,
    }
}
