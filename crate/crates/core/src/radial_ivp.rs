//! Initial value problems for radial ODEs of the form
//!
//! ```text
//!     u'' + (m / rho) u' + G(rho, u, u') = 0,        u(0) = a0,  u'(0) = 0,
//! ```
//!
//! where `m` is a friction dimension and `G` collects every regular term.
//! The coordinate singularity at rho = 0 is handled by launching with a
//! truncated power series: substituting `u = sum a_k rho^k` turns the
//! singular pair `u'' + (m/rho) u'` into `(k+2)(k+1+m) a_{k+2}` at order
//! `rho^k`, so the recursion
//!
//! ```text
//!     a_{k+2} = -g_k / ((k+2)(k+1+m)),      g_k = [rho^k] G(rho, u, u'),
//! ```
//!
//! determines all coefficients from `a0` (with `a1 = 0`). Away from the
//! origin the integrator is an adaptive Dormand-Prince 5(4) scheme whose
//! step is additionally capped by `c / rho`: the friction coefficient grows
//! linearly in rho, and the cap keeps `h * rho / 2` inside the explicit
//! stability region regardless of how smooth the solution looks to the
//! error estimator. Linear homogeneous equations are renormalized after
//! every accepted step, so decaying solutions never underflow and growing
//! ones never overflow; dense segments carry the accumulated log-scale.

use crate::error::{Error, Result};
use crate::rk::{Dopri5, Step, StepControl};
use crate::series::Series;
use serde::{Deserialize, Serialize};

/// Right-hand side data for a radial IVP. `regular_part` is G evaluated
/// pointwise, `regular_part_series` is the same operation on truncated
/// power series (used only for the launch, so it may allocate freely).
/// The series result at order `rho^k` must depend only on coefficients
/// `a_0 ..= a_{k+1}`, which holds for any G polynomial in
/// `(rho, u, rho u', u'^2 ...)` without a bare `1/rho`.
pub trait RadialOde {
    fn friction_dim(&self) -> f64;
    fn regular_part(&self, rho: f64, u: f64, du: f64) -> f64;
    fn regular_part_series(&self, u: &Series, du: &Series) -> Series;

    /// Linear homogeneous equations opt in to state renormalization.
    fn linear_homogeneous(&self) -> bool {
        false
    }
}

pub const DEFAULT_LAUNCH_RADIUS: f64 = 1e-2;
pub const DEFAULT_TRUNCATION_ORDER: usize = 12;
pub const DEFAULT_BLOWUP_GUARD: f64 = 1e8;

/// Taylor polynomial of the regular solution at the origin, valid on
/// `[0, launch_radius]`.
#[derive(Clone, Debug, Deserialize, Serialize)]
pub struct SeriesLaunch {
    pub coefficients: Vec<f64>,
    pub launch_radius: f64,
    pub truncation_order: usize,
}

impl SeriesLaunch {
    fn series(&self) -> Series {
        Series { c: self.coefficients.clone() }
    }

    pub fn eval(&self, rho: f64) -> f64 {
        self.coefficients.iter().rev().fold(0.0, |acc, &a| acc * rho + a)
    }

    pub fn eval_deriv(&self, rho: f64) -> f64 {
        let mut acc = 0.0;
        for k in (1..self.coefficients.len()).rev() {
            acc = acc * rho + self.coefficients[k] * k as f64;
        }
        acc
    }

    /// `u'' + (m/rho) u' + G` evaluated on the polynomial at `rho`; should
    /// vanish to truncation accuracy on the launch interval.
    pub fn residual(&self, ode: &dyn RadialOde, rho: f64) -> f64 {
        let s = self.series();
        let (u, du, ddu) = (s.eval(rho), s.eval_deriv(rho), s.eval_second_deriv(rho));
        ddu + ode.friction_dim() / rho * du + ode.regular_part(rho, u, du)
    }
}

/// Compute the launch polynomial for `u(0) = initial_value`.
///
/// The launch radius adapts to the coefficient growth: it is the largest
/// radius `<= 1e-2` at which every term `|a_k r^k|` stays below
/// `1e-3 * max(1, |a0|)`, so steep profiles (large initial values) hand
/// off to the integrator while the series still converges fast.
pub fn launch_series(
    ode: &dyn RadialOde,
    initial_value: f64,
    order: usize,
) -> Result<SeriesLaunch> {
    if order < 4 {
        return Err(Error::precondition(format!("truncation order {order} < 4")));
    }
    let m = ode.friction_dim();
    let mut u = Series::zeros(order);
    u.c[0] = initial_value;
    for k in 0..=order - 2 {
        let g = ode.regular_part_series(&u, &u.deriv());
        let denom = (k + 2) as f64 * (k as f64 + 1.0 + m);
        u.c[k + 2] = -g.c[k] / denom;
    }

    let scale = 1e-3 * initial_value.abs().max(1.0);
    let mut r0: f64 = DEFAULT_LAUNCH_RADIUS;
    for (k, &a) in u.c.iter().enumerate().skip(2) {
        if a != 0.0 {
            r0 = r0.min((scale / a.abs()).powf(1.0 / k as f64));
        }
    }
    Ok(SeriesLaunch { coefficients: u.c, launch_radius: r0, truncation_order: order })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminationReason {
    ReachedRmax,
    BlowupGuard,
    ToleranceFailure,
}

/// One accepted integrator step plus the log of the renormalization factor
/// in force while it was taken: the true solution on the step's interval is
/// `exp(log_scale) * step.eval(rho)`.
#[derive(Clone, Copy, Debug)]
pub struct DenseSeg {
    pub step: Step<2>,
    pub log_scale: f64,
}

#[derive(Clone, Debug)]
pub struct IvpResult {
    pub grid: Vec<f64>,
    pub value: Vec<f64>,
    pub derivative: Vec<f64>,
    pub terminated_at: f64,
    pub termination_reason: TerminationReason,
    pub launch: SeriesLaunch,
    pub segments: Vec<DenseSeg>,
    pub n_evals: usize,
}

impl IvpResult {
    fn segment_at(&self, rho: f64) -> &DenseSeg {
        let i = self
            .segments
            .partition_point(|s| s.step.t1() < rho)
            .min(self.segments.len() - 1);
        &self.segments[i]
    }

    /// `(u, u')` at any radius in `[0, terminated_at]`. Values whose true
    /// magnitude exceeds f64 range come back infinite; use `eval_raw` when
    /// the log-scale matters.
    pub fn eval(&self, rho: f64) -> [f64; 2] {
        let ([u, du], log_scale) = self.eval_raw(rho);
        let s = log_scale.exp();
        [u * s, du * s]
    }

    /// `([u, u'], log_scale)` with the renormalization factored out.
    pub fn eval_raw(&self, rho: f64) -> ([f64; 2], f64) {
        if rho <= self.launch.launch_radius {
            return ([self.launch.eval(rho), self.launch.eval_deriv(rho)], 0.0);
        }
        let seg = self.segment_at(rho);
        (seg.step.eval(rho), seg.log_scale)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct IntegrateOptions {
    pub blowup_guard: f64,
    /// Step cap coefficient: h <= step_cap / max(1, rho).
    pub step_cap: f64,
    /// Absolute tolerance; defaults to rtol * 1e-6 when None.
    pub atol: Option<f64>,
    /// Sample `grid`/`value`/`derivative` on the standard output grid.
    pub sample_output: bool,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        IntegrateOptions {
            blowup_guard: DEFAULT_BLOWUP_GUARD,
            step_cap: 4.0,
            atol: None,
            sample_output: true,
        }
    }
}

pub fn integrate(
    ode: &dyn RadialOde,
    launch: &SeriesLaunch,
    rmax: f64,
    tol: f64,
) -> Result<IvpResult> {
    integrate_with(ode, launch, rmax, tol, IntegrateOptions::default())
}

/// Monomial coefficients (in the normalized cell coordinate) of the cubic
/// matching value and scaled slope at both cell ends.
fn hermite(y0: f64, hd0: f64, y1: f64, hd1: f64) -> [f64; 4] {
    [y0, hd0, 3.0 * (y1 - y0) - 2.0 * hd0 - hd1, 2.0 * (y0 - y1) + hd0 + hd1]
}

/// One dense segment per grid cell from tabulated `(u, u')`: the value
/// channel interpolates `(u, u')` at both ends, the derivative channel
/// `(u', u'')` with `u''` supplied by the equation. On grids that resolve
/// the solution the cells match the integrator's dense output to about the
/// integration tolerance.
pub fn hermite_cells(
    ode: &dyn RadialOde,
    grid: &[f64],
    value: &[f64],
    derivative: &[f64],
) -> Vec<DenseSeg> {
    let m = ode.friction_dim();
    let ddu = |rho: f64, u: f64, du: f64| -(m / rho) * du - ode.regular_part(rho, u, du);
    let mut cells = Vec::with_capacity(grid.len().saturating_sub(1));
    for i in 0..grid.len().saturating_sub(1) {
        let (a, b) = (grid[i], grid[i + 1]);
        let h = b - a;
        let (u0, u1) = (value[i], value[i + 1]);
        let (d0, d1) = (derivative[i], derivative[i + 1]);
        let cu = hermite(u0, h * d0, u1, h * d1);
        let cd = hermite(d0, h * ddu(a, u0, d0), d1, h * ddu(b, u1, d1));
        cells.push(DenseSeg { step: Step::from_cubic(a, h, [cu, cd]), log_scale: 0.0 });
    }
    cells
}

/// Swap the per-step dense output for Hermite cells on the sampled grid.
/// A stiffness-capped integration to large rmax stores tens of thousands of
/// steps; the sampled grid carries the same information in a few thousand
/// cells once the solution is smooth on the grid scale. Requires sampled
/// output and an unscaled trajectory.
pub fn compact_dense_output(ode: &dyn RadialOde, result: &mut IvpResult) {
    assert!(result.grid.len() >= 2, "compaction needs sampled output");
    assert!(
        result.segments.iter().all(|s| s.log_scale == 0.0),
        "compaction would lose renormalization scales"
    );
    result.segments = hermite_cells(ode, &result.grid, &result.value, &result.derivative);
}

pub fn integrate_with(
    ode: &dyn RadialOde,
    launch: &SeriesLaunch,
    rmax: f64,
    tol: f64,
    opts: IntegrateOptions,
) -> Result<IvpResult> {
    if !(tol > 0.0 && tol <= 1e-3) {
        return Err(Error::precondition(format!("tolerance {tol:e} outside (0, 1e-3]")));
    }
    let r0 = launch.launch_radius;
    if !(r0 > 0.0 && r0 < rmax) {
        return Err(Error::precondition(format!(
            "launch radius {r0:e} must lie in (0, rmax = {rmax})"
        )));
    }

    let m = ode.friction_dim();
    let rhs = |rho: f64, y: &[f64; 2]| {
        let g = ode.regular_part(rho, y[0], y[1]);
        [y[1], -(m / rho) * y[1] - g]
    };
    let ctrl = StepControl {
        rtol: tol,
        atol: opts.atol.unwrap_or(tol * 1e-6),
        h_max: opts.step_cap,
        max_steps: 50_000_000,
    };
    let y0 = [launch.eval(r0), launch.eval_deriv(r0)];
    let mut integ = Dopri5::new(rhs, r0, y0, ctrl);

    let renormalize = ode.linear_homogeneous();
    let mut log_scale = 0.0;
    let mut segments = Vec::new();
    let mut termination = TerminationReason::ReachedRmax;
    while integ.t() < rmax {
        integ.ctrl.h_max = opts.step_cap / integ.t().max(1.0);
        match integ.step(rmax) {
            Ok(step) => segments.push(DenseSeg { step, log_scale }),
            Err(_) => {
                termination = TerminationReason::ToleranceFailure;
                break;
            }
        }
        let y = integ.y();
        if !(y[0].is_finite() && y[1].is_finite()) {
            termination = TerminationReason::ToleranceFailure;
            break;
        }
        if !renormalize && y[0].abs() > opts.blowup_guard {
            termination = TerminationReason::BlowupGuard;
            break;
        }
        if renormalize {
            let mag = y[0].abs().max(y[1].abs());
            if mag > 0.0 && (mag > 1e3 || mag < 1e-3) {
                integ.rescale(1.0 / mag);
                log_scale += mag.ln();
            }
        }
    }
    if segments.is_empty() {
        return Err(Error::numerical(format!(
            "no step could be taken from the launch radius {r0:e}"
        )));
    }

    let terminated_at = integ.t();
    let mut result = IvpResult {
        grid: Vec::new(),
        value: Vec::new(),
        derivative: Vec::new(),
        terminated_at,
        termination_reason: termination,
        launch: launch.clone(),
        segments,
        n_evals: integ.n_evals,
    };
    if opts.sample_output {
        let grid = if terminated_at > 1.0 {
            crate::grid::radial_output_grid(r0, terminated_at)
        } else {
            crate::grid::uniform(r0, terminated_at, 400)
        };
        for &rho in &grid {
            let [u, du] = result.eval(rho);
            result.value.push(u);
            result.derivative.push(du);
        }
        result.grid = grid;
    }
    Ok(result)
}

/// Radii where the solution changes sign, each refined by bisection on the
/// dense output to well below 1e-10. Only simple (sign-changing) roots are
/// detected; tangential zeros are invisible to this scan.
pub fn find_sign_changes(result: &IvpResult) -> Vec<f64> {
    let mut zeros = Vec::new();

    // launch interval first: the polynomial is cheap to scan
    let r0 = result.launch.launch_radius;
    let mut prev = (0.0, result.launch.eval(0.0));
    for j in 1..=8 {
        let rho = r0 * j as f64 / 8.0;
        let cur = (rho, result.launch.eval(rho));
        push_bracket(&mut zeros, prev, cur, |x| result.launch.eval(x));
        prev = cur;
    }

    for seg in &result.segments {
        let s = &seg.step;
        let mut prev = (s.t0, s.eval(s.t0)[0]);
        for j in 1..=8 {
            let rho = s.t0 + s.h * j as f64 / 8.0;
            let cur = (rho, s.eval(rho)[0]);
            push_bracket(&mut zeros, prev, cur, |x| s.eval(x)[0]);
            prev = cur;
        }
    }
    zeros
}

fn push_bracket(
    zeros: &mut Vec<f64>,
    (mut a, mut fa): (f64, f64),
    (mut b, fb): (f64, f64),
    f: impl Fn(f64) -> f64,
) {
    if fa == 0.0 {
        // grazing a sample point exactly: record once
        if zeros.last().is_none_or(|&z| z < a - 1e-12) {
            zeros.push(a);
        }
        return;
    }
    if fa.signum() * fb.signum() >= 0.0 {
        return;
    }
    for _ in 0..80 {
        let mid = 0.5 * (a + b);
        if mid == a || mid == b {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            a = mid;
            break;
        }
        if fa.signum() * fm.signum() < 0.0 {
            b = mid;
        } else {
            a = mid;
            fa = fm;
        }
        if b - a < 1e-13 * b.abs().max(1.0) {
            break;
        }
    }
    zeros.push(0.5 * (a + b));
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// u'' + u = 0 dressed as a radial problem with zero friction.
    struct Cosine;

    impl RadialOde for Cosine {
        fn friction_dim(&self) -> f64 {
            0.0
        }
        fn regular_part(&self, _rho: f64, u: f64, _du: f64) -> f64 {
            u
        }
        fn regular_part_series(&self, u: &Series, _du: &Series) -> Series {
            u.clone()
        }
        fn linear_homogeneous(&self) -> bool {
            true
        }
    }

    /// u'' + (1/rho) u' + u = 0, the zeroth Bessel equation.
    struct BesselZero;

    impl RadialOde for BesselZero {
        fn friction_dim(&self) -> f64 {
            1.0
        }
        fn regular_part(&self, _rho: f64, u: f64, _du: f64) -> f64 {
            u
        }
        fn regular_part_series(&self, u: &Series, _du: &Series) -> Series {
            u.clone()
        }
        fn linear_homogeneous(&self) -> bool {
            true
        }
    }

    #[test]
    fn cosine_series_is_taylor() {
        let launch = launch_series(&Cosine, 1.0, 8).unwrap();
        let expect = [1.0, 0.0, -0.5, 0.0, 1.0 / 24.0, 0.0, -1.0 / 720.0, 0.0, 1.0 / 40320.0];
        for (a, e) in launch.coefficients.iter().zip(expect) {
            assert_relative_eq!(a, &e, epsilon = 1e-15);
        }
    }

    #[test]
    fn cosine_zeros_land_on_half_odd_pi() {
        let launch = launch_series(&Cosine, 1.0, 12).unwrap();
        let res = integrate(&Cosine, &launch, 8.5, 1e-10).unwrap();
        assert_eq!(res.termination_reason, TerminationReason::ReachedRmax);
        let zeros = find_sign_changes(&res);
        let expect = [
            std::f64::consts::FRAC_PI_2,
            3.0 * std::f64::consts::FRAC_PI_2,
            5.0 * std::f64::consts::FRAC_PI_2,
        ];
        assert_eq!(zeros.len(), 3);
        for (z, e) in zeros.iter().zip(expect) {
            assert!((z - e).abs() < 1e-8, "zero {z} vs {e}");
        }
    }

    #[test]
    fn bessel_zeros_match_reference() {
        // first three roots of J0, to 13 digits
        let launch = launch_series(&BesselZero, 1.0, 14).unwrap();
        let res = integrate(&BesselZero, &launch, 9.0, 1e-11).unwrap();
        let zeros = find_sign_changes(&res);
        let expect = [2.404825557695773, 5.520078110286311, 8.653727912911013];
        assert_eq!(zeros.len(), 3);
        for (z, e) in zeros.iter().zip(expect) {
            assert!((z - e).abs() < 1e-8, "zero {z} vs {e}");
        }
    }

    #[test]
    fn bessel_series_residual_vanishes() {
        let launch = launch_series(&BesselZero, 1.0, 12).unwrap();
        let r0 = launch.launch_radius;
        for rho in [0.25 * r0, 0.5 * r0, r0] {
            assert!(launch.residual(&BesselZero, rho).abs() < 1e-14);
        }
    }

    #[test]
    fn handoff_from_half_launch_radius_agrees() {
        let tol = 1e-10;
        let launch = launch_series(&BesselZero, 1.0, 12).unwrap();
        let r0 = launch.launch_radius;
        let mut half = launch.clone();
        half.launch_radius = 0.5 * r0;
        let res = integrate_with(
            &BesselZero,
            &half,
            r0,
            tol,
            IntegrateOptions { sample_output: false, ..Default::default() },
        )
        .unwrap();
        let [u, du] = res.eval(r0);
        assert!((u - launch.eval(r0)).abs() < 10.0 * tol);
        assert!((du - launch.eval_deriv(r0)).abs() < 10.0 * tol);
    }

    #[test]
    fn launch_scales_linearly_for_linear_ode() {
        let l1 = launch_series(&BesselZero, 1.0, 12).unwrap();
        let l3 = launch_series(&BesselZero, 3.0, 12).unwrap();
        let r1 = integrate(&BesselZero, &l1, 6.0, 1e-11).unwrap();
        let r3 = integrate(&BesselZero, &l3, 6.0, 1e-11).unwrap();
        for rho in [0.5, 1.7, 4.4, 5.9] {
            let a = r1.eval(rho);
            let b = r3.eval(rho);
            assert_relative_eq!(3.0 * a[0], b[0], max_relative = 1e-10, epsilon = 1e-12);
            assert_relative_eq!(3.0 * a[1], b[1], max_relative = 1e-10, epsilon = 1e-12);
        }
    }

    /// u'' + (3/rho) u' = u^2 blows up in finite radius from a large start.
    struct Blower;

    impl RadialOde for Blower {
        fn friction_dim(&self) -> f64 {
            3.0
        }
        fn regular_part(&self, _rho: f64, u: f64, _du: f64) -> f64 {
            -u * u
        }
        fn regular_part_series(&self, u: &Series, _du: &Series) -> Series {
            u.mul(u).scale(-1.0)
        }
    }

    #[test]
    fn blowup_guard_terminates_early() {
        let launch = launch_series(&Blower, 20.0, 12).unwrap();
        let res = integrate(&Blower, &launch, 10.0, 1e-9).unwrap();
        assert_eq!(res.termination_reason, TerminationReason::BlowupGuard);
        assert!(res.terminated_at < 10.0);
        let last = *res.value.last().unwrap();
        assert!(last > 1e7, "guard fired at magnitude {last:.3e}");
    }

    #[test]
    fn tolerance_outside_contract_is_rejected() {
        let launch = launch_series(&BesselZero, 1.0, 12).unwrap();
        assert!(integrate(&BesselZero, &launch, 5.0, 0.0).is_err());
        assert!(integrate(&BesselZero, &launch, 5.0, 1e-2).is_err());
        assert!(launch_series(&BesselZero, 1.0, 3).is_err());
    }

    /// u'' + (6/rho + rho/2) u' + u = 0: the drift makes the far field
    /// stiff for an explicit method; the step cap keeps it stable.
    struct StiffDrift;

    impl RadialOde for StiffDrift {
        fn friction_dim(&self) -> f64 {
            6.0
        }
        fn regular_part(&self, rho: f64, u: f64, du: f64) -> f64 {
            0.5 * rho * du + u
        }
        fn regular_part_series(&self, u: &Series, du: &Series) -> Series {
            du.shift_up().scale(0.5).add(u)
        }
        fn linear_homogeneous(&self) -> bool {
            true
        }
    }

    #[test]
    fn capped_steps_self_converge_in_stiff_tail() {
        let launch = launch_series(&StiffDrift, 1.0, 12).unwrap();
        let coarse = integrate(&StiffDrift, &launch, 150.0, 1e-8).unwrap();
        let fine = integrate(&StiffDrift, &launch, 150.0, 1e-11).unwrap();
        assert_eq!(coarse.termination_reason, TerminationReason::ReachedRmax);
        for rho in [30.0, 75.0, 149.0] {
            let a = coarse.eval(rho)[0];
            let b = fine.eval(rho)[0];
            assert_relative_eq!(a, b, max_relative = 1e-6);
        }
    }

    #[test]
    fn launch_radius_shrinks_for_steep_profiles() {
        let steep = launch_series(&Blower, 1e6, 12).unwrap();
        assert!(steep.launch_radius < 1e-3);
        let scale = 2e-3 * 1e6;
        for (k, &a) in steep.coefficients.iter().enumerate().skip(2) {
            let term = (a.abs() * steep.launch_radius.powi(k as i32)).abs();
            assert!(term <= scale, "term {k} too large: {term:.3e}");
        }
    }
}
