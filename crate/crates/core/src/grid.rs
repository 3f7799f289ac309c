//! Radial sample grids.

/// `n_cells + 1` equispaced points covering [a, b].
pub fn uniform(a: f64, b: f64, n_cells: usize) -> Vec<f64> {
    assert!(n_cells >= 1 && b > a);
    (0..=n_cells).map(|i| a + (b - a) * i as f64 / n_cells as f64).collect()
}

/// Geometric progression from `a` to `b` with the given ratio; the last
/// point is clamped to `b` exactly.
pub fn geometric(a: f64, b: f64, ratio: f64) -> Vec<f64> {
    assert!(a > 0.0 && b > a && ratio > 1.0);
    let mut g = vec![a];
    loop {
        let next = g.last().unwrap() * ratio;
        if next >= b * (1.0 - 1e-12) {
            g.push(b);
            return g;
        }
        g.push(next);
    }
}

/// Sample grid for radial solution output: geometric refinement toward the
/// launch radius, a uniform core where profiles have their structure, and a
/// ratio-1.01 geometric tail past rho = 1.
pub fn radial_output_grid(r0: f64, rmax: f64) -> Vec<f64> {
    assert!(r0 > 0.0 && rmax > 1.0);
    let mut g = Vec::new();
    if r0 < 0.0099 {
        g.extend_from_slice(&geometric(r0, 0.01, 1.1));
    } else {
        g.push(r0);
    }
    let core = uniform(0.01_f64.max(r0), 1.0, 200);
    g.extend_from_slice(&core[1..]);
    let tail = geometric(1.0, rmax, 1.01);
    g.extend_from_slice(&tail[1..]);
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strictly_increasing(g: &[f64]) -> bool {
        g.windows(2).all(|w| w[0] < w[1])
    }

    #[test]
    fn uniform_endpoints() {
        let g = uniform(0.0, 2.0, 4);
        assert_eq!(g, vec![0.0, 0.5, 1.0, 1.5, 2.0]);
    }

    #[test]
    fn geometric_hits_both_ends() {
        let g = geometric(0.01, 5.0, 1.07);
        assert_eq!(g[0], 0.01);
        assert_eq!(*g.last().unwrap(), 5.0);
        assert!(strictly_increasing(&g));
    }

    #[test]
    fn output_grid_is_monotone_and_spans() {
        for r0 in [1e-4, 1e-2, 0.3] {
            let g = radial_output_grid(r0, 100.0);
            assert_eq!(g[0], r0);
            assert_eq!(*g.last().unwrap(), 100.0);
            assert!(strictly_increasing(&g), "grid not increasing for r0 = {r0}");
        }
    }
}
