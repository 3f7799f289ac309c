//! Finite-difference weights on arbitrary nodes (Fornberg's recursion).

/// Weights `w[k][j]` such that `sum_j w[k][j] f(x[j])` approximates the
/// k-th derivative of `f` at `z`, for all `k = 0..=m`. Exact whenever `f`
/// is a polynomial of degree `< x.len()`.
pub fn fd_weights(x: &[f64], z: f64, m: usize) -> Vec<Vec<f64>> {
    let n = x.len();
    assert!(n > m, "need more than {m} nodes for derivative order {m}");
    let mut c = vec![vec![0.0; n]; m + 1];
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// First derivative at `z` from samples on arbitrary nodes.
pub fn derivative_at(x: &[f64], f: &[f64], z: f64) -> f64 {
    let w = fd_weights(x, z, 1);
    w[1].iter().zip(f).map(|(wj, fj)| wj * fj).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn recovers_centered_five_point_stencils() {
        let x = [-2.0, -1.0, 0.0, 1.0, 2.0];
        let w = fd_weights(&x, 0.0, 2);
        let d1 = [1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0];
        let d2 = [-1.0 / 12.0, 16.0 / 12.0, -30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0];
        for j in 0..5 {
            assert_relative_eq!(w[1][j], d1[j], epsilon = 1e-13);
            assert_relative_eq!(w[2][j], d2[j], epsilon = 1e-13);
        }
    }

    #[test]
    fn exact_on_polynomials_at_offgrid_point() {
        let x = [0.1, 0.5, 0.7, 1.3, 2.0];
        let p = |t: f64| 2.0 - t + 3.0 * t * t * t;
        let dp = |t: f64| -1.0 + 9.0 * t * t;
        let f: Vec<f64> = x.iter().map(|&t| p(t)).collect();
        let z = 0.9;
        let w = fd_weights(&x, z, 1);
        let interp: f64 = w[0].iter().zip(&f).map(|(a, b)| a * b).sum();
        assert_relative_eq!(interp, p(z), max_relative = 1e-12);
        assert_relative_eq!(derivative_at(&x, &f, z), dp(z), max_relative = 1e-12);
    }

    #[test]
    fn interpolation_weights_sum_to_one() {
        let x = [0.3, 0.31, 0.36, 0.5];
        let w = fd_weights(&x, 0.4, 0);
        assert_relative_eq!(w[0].iter().sum::<f64>(), 1.0, epsilon = 1e-12);
    }
}
