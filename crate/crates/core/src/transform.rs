//! Reduced-mass lift between radial densities in dimension n and radial
//! fields in dimension n + 2, with weighted-norm evaluation.
//!
//! The lift sends a density c to
//!     w(r) = (2 r^n)^{-1} int_0^r c(s) s^{n-1} ds,
//! its inverse is the pointwise expression c = 2n w + 2 r w'. Both are
//! linear; the quadrature and differentiation rules here preserve that
//! exactly. Norms are radial L^q integrals against the surface measure of
//! the ambient dimension, with an optional |xi|^{-2} weight for lifted
//! fields; power-law tails are extrapolated analytically via the field's
//! declared tail exponent, and non-integrable combinations are rejected
//! naming the offending exponent.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::interp::derivative_at;
use crate::quad::{cumulative_grid_linear, integrate_grid};

/// Where a radial field lives: dimension n or the lifted dimension n + 2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Ambient {
    PhysicalN,
    ReducedNPlus2,
}

impl Ambient {
    pub fn dimension(self, n: usize) -> usize {
        match self {
            Ambient::PhysicalN => n,
            Ambient::ReducedNPlus2 => n + 2,
        }
    }
}

/// Radial samples of a function on one of the two ambients. `tail_exponent`
/// declares power-law decay `values ~ rho^{-t}` beyond the grid; it is
/// validated against the sampled last decade on construction.
#[derive(Clone, Debug, Serialize)]
pub struct RadialField {
    pub ambient: Ambient,
    pub n: usize,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub tail_exponent: Option<f64>,
}

impl RadialField {
    pub fn new(
        ambient: Ambient,
        n: usize,
        grid: Vec<f64>,
        values: Vec<f64>,
        tail_exponent: Option<f64>,
    ) -> Result<RadialField> {
        if n < 1 {
            return Err(Error::precondition("dimension n must be >= 1"));
        }
        if grid.len() != values.len() {
            return Err(Error::precondition(format!(
                "grid has {} points but values has {}",
                grid.len(),
                values.len()
            )));
        }
        if grid.len() < 8 {
            return Err(Error::precondition("need at least 8 radial samples"));
        }
        if !(grid[0] >= 0.0 && grid[0] <= 1e-3) {
            return Err(Error::precondition(format!(
                "grid must start in [0, 1e-3], got {:e}",
                grid[0]
            )));
        }
        if grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::precondition("grid must be strictly increasing"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::precondition("field values must be finite"));
        }
        let field = RadialField { ambient, n, grid, values, tail_exponent };
        if let Some(t) = tail_exponent {
            let drift = field.tail_drift(t);
            if !(drift < 0.05) {
                return Err(Error::precondition(format!(
                    "declared tail exponent {t} does not fit: values * rho^{t} \
                     drifts by {drift:.2} over the last decade"
                )));
            }
        }
        Ok(field)
    }

    /// Relative spread of `values * rho^t` over the sampled last decade;
    /// zero for an identically vanishing tail.
    fn tail_drift(&self, t: f64) -> f64 {
        let r_end = *self.grid.last().unwrap();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (r, v) in self.grid.iter().zip(&self.values) {
            if *r >= 0.1 * r_end {
                let m = v * r.powf(t);
                lo = lo.min(m);
                hi = hi.max(m);
            }
        }
        let scale = lo.abs().max(hi.abs());
        if scale == 0.0 { 0.0 } else { (hi - lo) / scale }
    }

    /// Same samples with every radius scaled by `s > 0` (the field
    /// `r -> f(r / s)`). Tail behavior is unchanged.
    pub fn rescaled_argument(&self, s: f64) -> RadialField {
        RadialField {
            ambient: self.ambient,
            n: self.n,
            grid: self.grid.iter().map(|r| r * s).collect(),
            values: self.values.clone(),
            tail_exponent: self.tail_exponent,
        }
    }
}

/// Default radial grid for transform work: geometric from 1e-6 out to
/// `rmax`. The density is set by the lift/inverse round trip: fourth-order
/// differentiation of a sharp mollifier bump needs ~0.2% spacing to stay
/// below the module's 1e-6 sup budget.
pub fn transform_grid(rmax: f64) -> Vec<f64> {
    crate::grid::geometric(1e-6, rmax, 1.002)
}

/// Try the preferred tail tag, fall back to untagged if the sampled tail
/// does not actually follow it.
fn with_tail_or_none(
    ambient: Ambient,
    n: usize,
    grid: Vec<f64>,
    values: Vec<f64>,
    tail: Option<f64>,
) -> Result<RadialField> {
    if let Some(t) = tail {
        if let Ok(f) = RadialField::new(ambient, n, grid.clone(), values.clone(), Some(t)) {
            return Ok(f);
        }
    }
    RadialField::new(ambient, n, grid, values, None)
}

/// Lift a density to the reduced ambient:
/// `w(r) = (2 r^n)^{-1} int_0^r c(s) s^{n-1} ds`.
/// The piece below the first grid point extends `c` as a constant; take the
/// grid down to ~1e-8 for densities with an origin singularity.
pub fn apply_a(c: &RadialField) -> Result<RadialField> {
    if c.ambient != Ambient::PhysicalN {
        return Err(Error::precondition("the lift takes a density on the physical ambient"));
    }
    if c.grid[0] == 0.0 {
        return Err(Error::precondition(
            "the lift divides by r^n; the density grid must start at a positive radius",
        ));
    }
    let n = c.n;
    let nf = n as f64;
    // Reject moments that diverge at the origin: c ~ r^p with p <= -n.
    let (v0, v1) = (c.values[0], c.values[1]);
    if v0 != 0.0 && v1 != 0.0 && (v0 > 0.0) == (v1 > 0.0) {
        let p = (v1 / v0).abs().ln() / (c.grid[1] / c.grid[0]).ln();
        if p <= -nf + 1e-9 {
            return Err(Error::precondition(format!(
                "origin moment integral diverges: density behaves like r^{p:.3} \
                 near 0, needs an exponent > {}",
                -nf
            )));
        }
    }
    // Linear cell rule so superposition survives exactly; the moment
    // integrand v * r^{n-1} is smooth wherever v is, so fourth order is
    // plenty on the default geometric grids.
    let moment: Vec<f64> =
        c.grid.iter().zip(&c.values).map(|(r, v)| v * r.powi(n as i32 - 1)).collect();
    let cumulative = cumulative_grid_linear(&c.grid, &moment);
    let origin = c.values[0] * c.grid[0].powi(n as i32) / nf;
    let values: Vec<f64> = c
        .grid
        .iter()
        .zip(&cumulative)
        .map(|(r, m)| (origin + m) / (2.0 * r.powi(n as i32)))
        .collect();
    // A tail c ~ r^{-t} lifts to w ~ r^{-min(t, n)} (for t > n the moment
    // converges and only the 1/r^n prefactor survives); t = n is the
    // logarithmic edge case, left untagged. An untagged density that keeps
    // its moment inside the grid still lifts to a clean 1/r^n tail, so try
    // that tag too.
    let tail = match c.tail_exponent {
        Some(t) if t < nf - 0.05 => Some(t),
        Some(t) if t > nf + 0.05 => Some(nf),
        Some(_) => None,
        None => Some(nf),
    };
    with_tail_or_none(Ambient::ReducedNPlus2, n, c.grid.clone(), values, tail)
}

/// Five-point range centered on `i`, clamped to the array.
fn stencil5(len: usize, i: usize) -> std::ops::Range<usize> {
    let start = i.saturating_sub(2).min(len - 5);
    start..start + 5
}

/// Invert the lift pointwise: `c(r) = 2n w(r) + 2 r w'(r)`, with the
/// derivative from fourth-order finite differences (one-sided stencils at
/// the boundaries).
pub fn apply_a_inverse(w: &RadialField) -> Result<RadialField> {
    if w.ambient != Ambient::ReducedNPlus2 {
        return Err(Error::precondition("the inverse lift takes a field on the reduced ambient"));
    }
    let n = w.n;
    let nf = n as f64;
    let values: Vec<f64> = (0..w.grid.len())
        .map(|i| {
            let s = stencil5(w.grid.len(), i);
            let dw = derivative_at(&w.grid[s.clone()], &w.values[s], w.grid[i]);
            2.0 * nf * w.values[i] + 2.0 * w.grid[i] * dw
        })
        .collect();
    // w ~ r^{-t} maps to (2n - 2t) r^{-t}; at t = n the leading coefficient
    // cancels and the tag is dropped.
    let tail = match w.tail_exponent {
        Some(t) if (t - nf).abs() > 0.05 => Some(t),
        _ => None,
    };
    with_tail_or_none(Ambient::PhysicalN, n, w.grid.clone(), values, tail)
}

/// Which L^q integral to evaluate: exponent, ambient, and whether the
/// |xi|^{-2} weight of the lifted spaces applies.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct NormSpec {
    pub exponent: f64,
    pub ambient: Ambient,
    pub weighted: bool,
}

/// A norm value together with the share contributed by the analytic tail
/// extrapolation; near-critical exponents show up as a large share.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct NormEstimate {
    pub value: f64,
    pub tail_fraction: f64,
}

/// Surface measure of the unit sphere in dimension d: 2 pi^{d/2} / Gamma(d/2).
pub fn surface_area(d: usize) -> f64 {
    assert!(d >= 1);
    let pi = std::f64::consts::PI;
    if d % 2 == 0 {
        // Gamma(d/2) = (d/2 - 1)!
        let k = d / 2;
        let mut gamma = 1.0;
        for j in 1..k {
            gamma *= j as f64;
        }
        2.0 * pi.powi(k as i32) / gamma
    } else {
        // Gamma(k + 1/2) = sqrt(pi) (2k)! / (4^k k!) for d = 2k + 1; the
        // sqrt(pi) cancels against pi^{d/2}
        let k = d / 2;
        let mut ratio = 1.0; // 4^k k! / (2k)!
        for j in 1..=k {
            ratio *= 2.0 / (2.0 * j as f64 - 1.0);
        }
        2.0 * pi.powi(k as i32) * ratio
    }
}

pub fn norm(field: &RadialField, spec: &NormSpec) -> Result<f64> {
    Ok(norm_detailed(field, spec)?.value)
}

/// Radial L^q norm with surface constant, origin closure, and analytic tail.
///
/// The integrand is |f|^q r^{d-1} (r^{-2} when weighted). Below the first
/// grid point the integrand is extended by the power law through the first
/// two samples; beyond the last point the declared tail exponent is used
/// (no extrapolation when untagged, i.e. truncated fields integrate as
/// truncated). Divergent origin or tail exponents are errors.
pub fn norm_detailed(field: &RadialField, spec: &NormSpec) -> Result<NormEstimate> {
    if !(spec.exponent >= 1.0 && spec.exponent.is_finite()) {
        return Err(Error::precondition(format!(
            "norm exponent q = {} must lie in [1, infinity)",
            spec.exponent
        )));
    }
    if spec.ambient != field.ambient {
        return Err(Error::precondition("norm ambient does not match the field's ambient"));
    }
    let q = spec.exponent;
    let d = field.ambient.dimension(field.n) as f64;
    let e = d - 1.0 - if spec.weighted { 2.0 } else { 0.0 };
    let g: Vec<f64> =
        field.grid.iter().zip(&field.values).map(|(r, v)| v.abs().powf(q) * r.powf(e)).collect();
    let core = integrate_grid(&field.grid, &g);

    // Grids that already reach rho = 0 leave no gap to close.
    let origin = if field.grid[0] == 0.0 || g[0] == 0.0 || g[1] == 0.0 {
        0.5 * g[0] * field.grid[0]
    } else {
        let p = (g[1] / g[0]).ln() / (field.grid[1] / field.grid[0]).ln();
        if p <= -1.0 + 1e-9 {
            return Err(Error::precondition(format!(
                "norm diverges at the origin: field ~ r^{:.3} gives integrand \
                 exponent {p:.3} <= -1",
                (p - e) / q
            )));
        }
        g[0] * field.grid[0] / (p + 1.0)
    };

    let tail = match field.tail_exponent {
        Some(t) => {
            let p_tail = e - q * t;
            if p_tail >= -1.0 - 1e-9 {
                return Err(Error::precondition(format!(
                    "norm tail diverges: field ~ r^-{t} gives integrand \
                     exponent {p_tail:.3} >= -1"
                )));
            }
            let g_end = *g.last().unwrap();
            let r_end = *field.grid.last().unwrap();
            g_end * r_end / (-p_tail - 1.0)
        }
        None => 0.0,
    };

    let total = core + origin + tail;
    let value = (surface_area(d as usize) * total).powf(1.0 / q);
    Ok(NormEstimate { value, tail_fraction: if total > 0.0 { tail / total } else { 0.0 } })
}
