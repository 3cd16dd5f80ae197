use nalgebra::DMatrix;

/// Pfaffian of a real antisymmetric matrix by skew Gaussian elimination with
/// pivoting. Odd dimensions give 0.
pub fn pfaffian(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    assert!(m.is_square(), "pfaffian needs a square matrix");
    if n % 2 == 1 {
        return 0.0;
    }
    let mut a = m.clone();
    let mut result = 1.0;
    for k in (0..n).step_by(2) {
        let pivot = (k + 1..n).max_by(|&i, &j| a[(k, i)].abs().total_cmp(&a[(k, j)].abs())).expect("k + 1 < n");
        if pivot != k + 1 {
            a.swap_rows(k + 1, pivot);
            a.swap_columns(k + 1, pivot);
            result = -result;
        }
        let p = a[(k, k + 1)];
        if p == 0.0 {
            return 0.0;
        }
        result *= p;
        // Clear rows and columns k + 2.. against the pivot pair.
        for i in k + 2..n {
            let f = a[(k, i)] / p;
            if f != 0.0 {
                for j in 0..n {
                    let v = a[(k + 1, j)];
                    a[(i, j)] -= f * v;
                }
                for j in 0..n {
                    let v = a[(j, k + 1)];
                    a[(j, i)] -= f * v;
                }
            }
        }
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cases() {
        let j = DMatrix::from_row_slice(2, 2, &[0.0, 3.0, -3.0, 0.0]);
        assert_eq!(pfaffian(&j), 3.0);
        // Pf of a 4x4 matrix is a12 a34 - a13 a24 + a14 a23.
        let (a12, a13, a14, a23, a24, a34) = (1.0, 2.0, 3.0, 4.0, 5.0, 6.0);
        let m = DMatrix::from_row_slice(4, 4, &[
            0.0, a12, a13, a14,
            -a12, 0.0, a23, a24,
            -a13, -a23, 0.0, a34,
            -a14, -a24, -a34, 0.0,
        ]);
        assert!((pfaffian(&m) - (a12 * a34 - a13 * a24 + a14 * a23)).abs() < 1e-12);
    }

    #[test]
    fn square_is_the_determinant() {
        let b = DMatrix::from_fn(6, 6, |i, j| ((i * 7 + j * 3) % 5) as f64 - 2.0);
        let m = &b - b.transpose();
        let pf = pfaffian(&m);
        assert!((pf * pf - m.determinant()).abs() < 1e-8 * m.determinant().abs().max(1.0));
    }
}
