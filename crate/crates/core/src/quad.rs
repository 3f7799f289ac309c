//! Quadrature on irregular radial grids.
//!
//! Radial profiles routinely behave like `C * rho^p` near the origin and in
//! the far field, so a fixed-degree polynomial rule loses accuracy exactly
//! where the fields are largest. The composite rule here fits each cell with
//! a local cubic, in log-log coordinates when the local data allows it
//! (same nonzero sign, positive abscissae), and falls back to a plain cubic
//! otherwise. Pure power laws integrate to machine precision, smooth data
//! integrates at fourth order.

use std::sync::OnceLock;

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre recurrence for P_n(x) and P_n'(x)
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn gl8() -> &'static (Vec<f64>, Vec<f64>) {
    static GL8: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    GL8.get_or_init(|| gauss_legendre(8))
}

/// Value at `x` of the Lagrange interpolant through `(xs[j], ys[j])`.
pub fn lagrange_eval(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let mut acc = 0.0;
    for j in 0..xs.len() {
        let mut lj = 1.0;
        for k in 0..xs.len() {
            if k != j {
                lj *= (x - xs[k]) / (xs[j] - xs[k]);
            }
        }
        acc += ys[j] * lj;
    }
    acc
}

fn stencil(n: usize, i: usize) -> std::ops::Range<usize> {
    debug_assert!(n >= 4);
    let j0 = i.saturating_sub(1).min(n - 4);
    j0..j0 + 4
}

fn cell_integral(xs: &[f64], ys: &[f64], a: f64, b: f64, allow_loglog: bool) -> f64 {
    let (nodes, weights) = gl8();
    // The log-log model only helps where the data actually looks like a
    // power law sampled geometrically: narrow log-cells and log-values
    // close to a straight line in log-abscissa. Anything else (uniform
    // grids near zero, shifted singularities) integrates better as a
    // plain cubic.
    let mut loglog = allow_loglog
        && xs[0] > 0.0
        && ys.iter().all(|&y| y != 0.0)
        && ys.iter().all(|&y| y.signum() == ys[0].signum())
        && xs.windows(2).all(|w| w[1] / w[0] <= 1.12);
    if loglog {
        let l0 = (xs[0].ln(), ys[0].abs().ln());
        let l3 = (xs[3].ln(), ys[3].abs().ln());
        let slope = (l3.1 - l0.1) / (l3.0 - l0.0);
        for j in [1, 2] {
            let dev = ys[j].abs().ln() - (l0.1 + slope * (xs[j].ln() - l0.0));
            if dev.abs() > 2e-4 {
                loglog = false;
            }
        }
    }
    if loglog {
        let sign = ys[0].signum();
        let lx: Vec<f64> = xs.iter().map(|&x| x.ln()).collect();
        let ly: Vec<f64> = ys.iter().map(|&y| y.abs().ln()).collect();
        let (la, lb) = (a.ln(), b.ln());
        let (mid, half) = (0.5 * (la + lb), 0.5 * (lb - la));
        let mut acc = 0.0;
        for (&t, &w) in nodes.iter().zip(weights) {
            let u = mid + half * t;
            // du substitution: integrand f(x) dx = |f| sign e^u du
            acc += w * (lagrange_eval(&lx, &ly, u) + u).exp();
        }
        sign * half * acc
    } else {
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        let mut acc = 0.0;
        for (&t, &w) in nodes.iter().zip(weights) {
            acc += w * lagrange_eval(xs, ys, mid + half * t);
        }
        half * acc
    }
}

/// Integral of the sampled function over the whole grid span.
///
/// `x` must be strictly increasing with at least 4 points.
pub fn integrate_grid(x: &[f64], f: &[f64]) -> f64 {
    cumulative_grid(x, f).last().copied().unwrap()
}

/// Running integral from `x[0]`; entry `i` holds the integral up to `x[i]`.
pub fn cumulative_grid(x: &[f64], f: &[f64]) -> Vec<f64> {
    cumulative_impl(x, f, true)
}

/// Running integral that always stays on the plain-cubic branch. The cell
/// rule is then exactly linear in the samples, which superposition-sensitive
/// callers need; pure power laws lose the log-log exactness but keep fourth
/// order.
pub fn cumulative_grid_linear(x: &[f64], f: &[f64]) -> Vec<f64> {
    cumulative_impl(x, f, false)
}

fn cumulative_impl(x: &[f64], f: &[f64], allow_loglog: bool) -> Vec<f64> {
    assert_eq!(x.len(), f.len());
    assert!(x.len() >= 4, "need at least 4 samples, got {}", x.len());
    debug_assert!(x.windows(2).all(|w| w[0] < w[1]));
    let mut out = Vec::with_capacity(x.len());
    out.push(0.0);
    let mut acc = 0.0;
    for i in 0..x.len() - 1 {
        let r = stencil(x.len(), i);
        acc += cell_integral(&x[r.clone()], &f[r], x[i], x[i + 1], allow_loglog);
        out.push(acc);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gauss_legendre_exact_for_polynomials() {
        let (nodes, weights) = gauss_legendre(8);
        for k in 0..=15usize {
            let num: f64 = nodes.iter().zip(&weights).map(|(x, w)| w * x.powi(k as i32)).sum();
            let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
            assert_relative_eq!(num, exact, epsilon = 1e-14);
        }
        let (_, w4) = gauss_legendre(4);
        assert_relative_eq!(w4.iter().sum::<f64>(), 2.0, epsilon = 1e-14);
    }

    fn geometric_grid(a: f64, b: f64, ratio: f64) -> Vec<f64> {
        let mut g = vec![a];
        while *g.last().unwrap() < b {
            let next = g.last().unwrap() * ratio;
            g.push(next.min(b));
        }
        g
    }

    #[test]
    fn power_law_integrates_to_machine_precision() {
        for p in [-1.5, -2.0, 2.7, 0.0] {
            let x = geometric_grid(0.1, 10.0, 1.05);
            let f: Vec<f64> = x.iter().map(|&r| 3.0 * r.powf(p)).collect();
            let exact = if p == -1.0 {
                3.0 * (10.0f64 / 0.1).ln()
            } else {
                3.0 * (10.0f64.powf(p + 1.0) - 0.1f64.powf(p + 1.0)) / (p + 1.0)
            };
            assert_relative_eq!(integrate_grid(&x, &f), exact, max_relative = 1e-12);
        }
    }

    #[test]
    fn smooth_oscillation_fourth_order() {
        // fast oscillation keeps every stencil on the plain-cubic branch,
        // so this measures the composite order of the linear model
        let err_at = |m: usize| {
            let x: Vec<f64> = (0..=m).map(|i| 3.0 * i as f64 / m as f64).collect();
            let f: Vec<f64> = x.iter().map(|&t| (20.0 * t).sin()).collect();
            (integrate_grid(&x, &f) - (1.0 - 60.0f64.cos()) / 20.0).abs()
        };
        let (e1, e2) = (err_at(1000), err_at(2000));
        assert!(e2 < 1e-7, "error at m=2000: {e2:.3e}");
        let order = (e1 / e2).log2();
        assert!(order > 3.5, "observed order {order:.2} (errors {e1:.3e}, {e2:.3e})");
    }

    #[test]
    fn smooth_decay_on_geometric_grid() {
        let x = geometric_grid(0.5, 20.0, 1.01);
        let f: Vec<f64> = x.iter().map(|&t| (-t).exp()).collect();
        let exact = (-0.5f64).exp() - (-20.0f64).exp();
        assert_relative_eq!(integrate_grid(&x, &f), exact, max_relative = 1e-8);
    }

    #[test]
    fn sign_changing_data_uses_linear_branch() {
        let x: Vec<f64> = (0..=1000).map(|i| 10.0 * i as f64 / 1000.0).collect();
        let f: Vec<f64> = x.iter().map(|&t| (t - 5.0) * (-t).exp()).collect();
        let exact = -4.0 - 6.0 * (-10.0f64).exp();
        assert_relative_eq!(integrate_grid(&x, &f), exact, max_relative = 1e-8);
    }

    #[test]
    fn linear_variant_superposes_exactly_and_stays_accurate() {
        let x = geometric_grid(0.01, 20.0, 1.02);
        let f: Vec<f64> = x.iter().map(|&r| (-0.3 * r).exp()).collect();
        let g: Vec<f64> = x.iter().map(|&r| r / (1.0 + r * r)).collect();
        let combo: Vec<f64> = f.iter().zip(&g).map(|(a, b)| 0.7 * a - 1.3 * b).collect();
        let cf = cumulative_grid_linear(&x, &f);
        let cg = cumulative_grid_linear(&x, &g);
        let cc = cumulative_grid_linear(&x, &combo);
        for i in 0..x.len() {
            let lin = 0.7 * cf[i] - 1.3 * cg[i];
            assert!((cc[i] - lin).abs() <= 1e-12 * (1.0 + lin.abs()));
        }

        let p: Vec<f64> = x.iter().map(|&r| r.powf(2.5)).collect();
        let exact = (20.0f64.powf(3.5) - 0.01f64.powf(3.5)) / 3.5;
        let got = *cumulative_grid_linear(&x, &p).last().unwrap();
        assert_relative_eq!(got, exact, max_relative = 1e-8);
    }

    #[test]
    fn cumulative_ends_at_total() {
        let x = geometric_grid(0.01, 5.0, 1.03);
        let f: Vec<f64> = x.iter().map(|&r| r * r / (1.0 + r)).collect();
        let cum = cumulative_grid(&x, &f);
        assert_eq!(cum.len(), x.len());
        assert_eq!(cum[0], 0.0);
        assert_relative_eq!(*cum.last().unwrap(), integrate_grid(&x, &f), epsilon = 1e-15);
    }
}
