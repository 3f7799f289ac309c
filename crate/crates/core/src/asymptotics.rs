//! Large-amplitude limit of the profile family. Rescaling
//! u(rho) = alpha * w(sqrt(alpha) rho) turns the profile equation into a
//! family with 1/alpha coefficients whose limit drops the drift entirely;
//! the limit tail obeys rho^2 w -> 1. In log-radius the tail becomes an
//! autonomous second-order flow (saddle at the origin, sink at (1, 0)),
//! and the limit probe can be compared against an explicit Euler equation
//! whose oscillation window is exactly 2 < n < 10.

use crate::error::{Error, Result};
use crate::radial_ivp::{self, IntegrateOptions, IvpResult, RadialOde, TerminationReason};
use crate::rk::{Dopri5, Step, StepControl};
use crate::series::Series;
use serde::Serialize;

/// Rescaled profile equation; `inv_alpha = 0` selects the limit system.
struct RescaledOde {
    n: f64,
    inv_alpha: f64,
}

impl RadialOde for RescaledOde {
    fn friction_dim(&self) -> f64 {
        self.n + 1.0
    }

    fn regular_part(&self, rho: f64, u: f64, du: f64) -> f64 {
        self.inv_alpha * (u + 0.5 * rho * du) + 2.0 * self.n * u * u + 2.0 * rho * u * du
    }

    fn regular_part_series(&self, u: &Series, du: &Series) -> Series {
        u.add(&du.shift_up().scale(0.5))
            .scale(self.inv_alpha)
            .add(&u.mul(u).scale(2.0 * self.n))
            .add(&u.mul(du).shift_up().scale(2.0))
    }
}

/// Rescaled probe around a stored rescaled profile, shift and coupling
/// pinned at lambda = 0, mu = 1; both scale out of the limit anyway.
struct RescaledProbeOde<'a> {
    n: f64,
    inv_alpha: f64,
    base: &'a IvpResult,
    base_series: Series,
}

impl RadialOde for RescaledProbeOde<'_> {
    fn friction_dim(&self) -> f64 {
        self.n + 1.0
    }

    fn regular_part(&self, rho: f64, f: f64, df: f64) -> f64 {
        let [u, du] = self.base.eval(rho);
        self.inv_alpha * (0.5 * rho * df + f)
            + 2.0 * rho * u * df
            + (4.0 * self.n * u + 2.0 * rho * du) * f
    }

    fn regular_part_series(&self, f: &Series, df: &Series) -> Series {
        let mut c = self.base_series.c.clone();
        c.resize(f.order() + 1, 0.0);
        let u = Series { c };
        let du = u.deriv();
        df.shift_up()
            .scale(0.5)
            .add(&f)
            .scale(self.inv_alpha)
            .add(&u.mul(df).shift_up().scale(2.0))
            .add(&u.mul(f).scale(4.0 * self.n))
            .add(&du.mul(f).shift_up().scale(2.0))
    }

    fn linear_homogeneous(&self) -> bool {
        true
    }
}

/// Rescaled profile w and probe g on a shared grid. `alpha` is
/// `f64::INFINITY` for the limit system.
#[derive(Clone, Debug)]
pub struct RescaledSolution {
    pub n: usize,
    pub alpha: f64,
    pub grid: Vec<f64>,
    pub u_tilde: Vec<f64>,
    pub f_tilde: Vec<f64>,
    pub rmax: f64,
    pub u_ivp: IvpResult,
    pub f_ivp: IvpResult,
}

impl RescaledSolution {
    pub fn eval_u(&self, rho: f64) -> [f64; 2] {
        self.u_ivp.eval(rho)
    }

    pub fn eval_f(&self, rho: f64) -> [f64; 2] {
        self.f_ivp.eval(rho)
    }

    /// Sign changes of the probe, refined to well below 1e-10.
    pub fn f_zeros(&self) -> Vec<f64> {
        radial_ivp::find_sign_changes(&self.f_ivp)
    }
}

pub fn solve_rescaled(n: usize, alpha: f64, rmax: f64, tol: f64) -> Result<RescaledSolution> {
    if n < 3 {
        return Err(Error::precondition(format!("dimension n = {n} must be >= 3")));
    }
    if !(alpha > 0.0) {
        return Err(Error::precondition(format!("alpha = {alpha} must be positive or infinite")));
    }
    if !(rmax > 1.0) {
        return Err(Error::precondition(format!("rmax = {rmax} must exceed 1")));
    }
    let inv_alpha = if alpha.is_infinite() { 0.0 } else { 1.0 / alpha };

    // the rescaled drift is rho/(2 alpha), so the stability step cap can
    // relax by a factor alpha; the limit system needs no cap at all
    let opts = IntegrateOptions {
        step_cap: if alpha.is_infinite() { f64::INFINITY } else { 4.0 * alpha.max(1.0) },
        ..IntegrateOptions::default()
    };

    let ode = RescaledOde { n: n as f64, inv_alpha };
    let launch = radial_ivp::launch_series(&ode, 1.0, radial_ivp::DEFAULT_TRUNCATION_ORDER)?;
    let u_ivp = radial_ivp::integrate_with(&ode, &launch, rmax, tol, opts)?;
    if u_ivp.termination_reason != TerminationReason::ReachedRmax {
        return Err(Error::numerical(format!(
            "rescaled profile stopped at rho = {} ({:?})",
            u_ivp.terminated_at, u_ivp.termination_reason
        )));
    }

    let probe = RescaledProbeOde {
        n: n as f64,
        inv_alpha,
        base: &u_ivp,
        base_series: Series { c: u_ivp.launch.coefficients.clone() },
    };
    let f_launch = radial_ivp::launch_series(&probe, 1.0, radial_ivp::DEFAULT_TRUNCATION_ORDER)?;
    let f_ivp = radial_ivp::integrate_with(&probe, &f_launch, rmax, tol, opts)?;
    if f_ivp.termination_reason != TerminationReason::ReachedRmax {
        return Err(Error::numerical(format!(
            "rescaled probe stopped at rho = {} ({:?})",
            f_ivp.terminated_at, f_ivp.termination_reason
        )));
    }

    let grid = u_ivp.grid.clone();
    let u_tilde = u_ivp.value.clone();
    let f_tilde: Vec<f64> = grid.iter().map(|&r| f_ivp.eval(r)[0]).collect();

    // positivity and the tail envelope 0 <= rho^2 w <= 2 transfer from the
    // unrescaled profile and survive the limit
    for (&r, &u) in grid.iter().zip(&u_tilde) {
        if !(u > -1e-12) {
            return Err(Error::numerical(format!("rescaled profile not positive at rho = {r}")));
        }
        let r2u = r * r * u;
        if !(-1e-9..=2.0 + 1e-9).contains(&r2u) {
            return Err(Error::numerical(format!(
                "rho^2 w = {r2u} outside [0, 2] at rho = {r}"
            )));
        }
    }

    Ok(RescaledSolution { n, alpha, grid, u_tilde, f_tilde, rmax, u_ivp, f_ivp })
}

/// Tail of the limit profile in log radius: z(t) = rho^2 w(rho) at
/// rho = e^t solves the autonomous flow
///   z'' + (n - 4 + 2z) z' - 2(n-2)(z - z^2) = 0,
/// launched on the unstable direction of the saddle (0, 0) and settling at
/// the sink (1, 0). E is the damped-oscillator energy
/// z'^2/2 + 2(n-2)(z^3/3 - z^2/2), non-increasing for n >= 4.
#[derive(Clone, Debug)]
pub struct PhaseTrajectory {
    pub n: usize,
    pub t: Vec<f64>,
    pub z: Vec<f64>,
    pub zdot: Vec<f64>,
    /// n = 3 only: zeta = z' + z, positive along the whole trajectory.
    pub zeta: Option<Vec<f64>>,
    pub energy: Vec<f64>,
}

impl PhaseTrajectory {
    /// Distance of the terminal state from the sink (1, 0).
    pub fn sink_distance(&self) -> f64 {
        let m = self.z.len() - 1;
        ((self.z[m] - 1.0).powi(2) + self.zdot[m].powi(2)).sqrt()
    }

    /// Transverse self-intersection test on the sampled polyline,
    /// excluding adjacent segments. A smooth trajectory of the autonomous
    /// flow cannot cross itself; a crossing here means the samples do not
    /// come from one such trajectory.
    pub fn has_self_intersection(&self) -> bool {
        let p: Vec<(f64, f64)> = self.z.iter().copied().zip(self.zdot.iter().copied()).collect();
        let m = p.len() - 1;
        for i in 0..m {
            for j in i + 2..m {
                if segments_cross(p[i], p[i + 1], p[j], p[j + 1]) {
                    return true;
                }
            }
        }
        false
    }
}

fn orient(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> f64 {
    (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0)
}

fn segments_cross(a: (f64, f64), b: (f64, f64), c: (f64, f64), d: (f64, f64)) -> bool {
    orient(a, b, c) * orient(a, b, d) < 0.0 && orient(c, d, a) * orient(c, d, b) < 0.0
}

pub fn emden_trajectory(n: usize, t0: f64, t1: f64, tol: f64) -> Result<PhaseTrajectory> {
    if n < 3 {
        return Err(Error::precondition(format!("dimension n = {n} must be >= 3")));
    }
    if !(t0 <= -5.0) {
        return Err(Error::precondition(format!(
            "t0 = {t0} must be <= -5 (launch deep in the saddle's linear regime)"
        )));
    }
    if !(t1 > t0) {
        return Err(Error::precondition(format!("empty time window [{t0}, {t1}]")));
    }
    let nf = n as f64;

    // launch by matching the limit profile at rho_0 = e^{t0}; the
    // precondition keeps rho_0 inside the series launch region
    let ode = RescaledOde { n: nf, inv_alpha: 0.0 };
    let launch = radial_ivp::launch_series(&ode, 1.0, radial_ivp::DEFAULT_TRUNCATION_ORDER)?;
    let rho0 = t0.exp();
    let (w, dw) = (launch.eval(rho0), launch.eval_deriv(rho0));
    let z0 = rho0 * rho0 * w;
    let zd0 = 2.0 * z0 + rho0.powi(3) * dw;

    let rhs = |_t: f64, y: &[f64; 2]| {
        let (z, zd) = (y[0], y[1]);
        [zd, -(nf - 4.0 + 2.0 * z) * zd + 2.0 * (nf - 2.0) * (z - z * z)]
    };
    let ctrl = StepControl { rtol: tol, atol: tol * 1e-3, ..StepControl::default() };
    let mut integ = Dopri5::new(rhs, t0, [z0, zd0], ctrl);

    let m = ((t1 - t0) / 0.01).ceil() as usize;
    let t: Vec<f64> = (0..=m).map(|i| t0 + (t1 - t0) * i as f64 / m as f64).collect();
    let mut z = vec![0.0; m + 1];
    let mut zdot = vec![0.0; m + 1];
    (z[0], zdot[0]) = (z0, zd0);

    let mut next = 1;
    while integ.t() < t1 && next <= m {
        let step: Step<2> = integ.step(t1)?;
        while next <= m && t[next] <= step.t1() + 1e-12 {
            let y = step.eval(t[next].min(step.t1()));
            (z[next], zdot[next]) = (y[0], y[1]);
            next += 1;
        }
    }

    let energy: Vec<f64> = z
        .iter()
        .zip(&zdot)
        .map(|(&zz, &zd)| 0.5 * zd * zd + 2.0 * (nf - 2.0) * (zz * zz * zz / 3.0 - zz * zz / 2.0))
        .collect();
    let zeta = (n == 3).then(|| z.iter().zip(&zdot).map(|(&zz, &zd)| zd + zz).collect());

    let traj = PhaseTrajectory { n, t, z, zdot, zeta, energy };

    for i in 0..=m {
        if !(traj.z[i] > 0.0 && traj.z[i] < 10.0 && traj.zdot[i].abs() < 10.0) {
            return Err(Error::numerical(format!(
                "phase point ({}, {}) at t = {} left the expected box",
                traj.z[i], traj.zdot[i], traj.t[i]
            )));
        }
        if let Some(zeta) = &traj.zeta {
            if !(zeta[i] > 0.0) {
                return Err(Error::numerical(format!("zeta <= 0 at t = {}", traj.t[i])));
            }
        }
        if n >= 4 && i > 0 && traj.energy[i] > traj.energy[i - 1] + 1e-9 {
            return Err(Error::numerical(format!("energy increased at t = {}", traj.t[i])));
        }
    }
    Ok(traj)
}

/// Euler comparison data: y'' + (A/rho) y' + (B/rho^2) y = 0 with
/// A = n + 3 and B = 4(n-1) - eps'. Solutions oscillate in rho exactly
/// when the indicial discriminant (A-1)^2 - 4B is negative, with zeros
/// spaced geometrically by e^{pi / mu_osc}.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ComparisonSetup {
    pub n: usize,
    pub a: f64,
    pub b: f64,
    pub eps_prime: f64,
    pub discriminant: f64,
    pub mu_osc: Option<f64>,
}

impl ComparisonSetup {
    /// Predicted zeros rho_eps * e^{k pi / mu_osc}, k = 0, 1, ... up to
    /// rmax; k = 0 is the matching radius itself.
    pub fn euler_zeros(&self, rho_eps: f64, rmax: f64) -> Vec<f64> {
        let Some(mu) = self.mu_osc else { return Vec::new() };
        let ratio = (std::f64::consts::PI / mu).exp();
        let mut zeros = vec![rho_eps];
        while let Some(&last) = zeros.last() {
            let next = last * ratio;
            if next > rmax {
                break;
            }
            zeros.push(next);
        }
        zeros
    }
}

pub fn euler_oracle(n: usize, eps_prime: f64) -> Result<ComparisonSetup> {
    if !(0.0..1.0).contains(&eps_prime) {
        return Err(Error::precondition(format!("eps' = {eps_prime} must lie in [0, 1)")));
    }
    let nf = n as f64;
    let a = nf + 3.0;
    let b = 4.0 * (nf - 1.0) - eps_prime;
    let discriminant = (a - 1.0) * (a - 1.0) - 4.0 * b;
    let mu_osc = (discriminant < 0.0).then(|| 0.5 * (-discriminant).sqrt());
    Ok(ComparisonSetup { n, a, b, eps_prime, discriminant, mu_osc })
}

/// Both second-order equations reduced to normal form g'' + W g = 0. For
/// the limit probe the potential is
///   W~(rho) = (3n-2) w + rho w' - rho^2 w^2 + ((n+1)/2 - (n+1)^2/4)/rho^2,
/// and for the Euler comparison W(rho) = (B + A/2 - A^2/4)/rho^2; the two
/// agree at infinity up to eps'/rho^2 by the tail limits rho^2 w -> 1,
/// rho^3 w' -> -2.
#[derive(Clone, Debug)]
pub struct NormalFormPotentials {
    pub setup: ComparisonSetup,
    pub rho_eps: f64,
    pub grid: Vec<f64>,
    pub v_tilde: Vec<f64>,
    pub v_euler: Vec<f64>,
}

const EPS_PRIME_LADDER: [f64; 4] = [0.0, 1e-3, 1e-2, 1e-1];

fn v_tilde_at(limit: &RescaledSolution, rho: f64) -> f64 {
    let nf = limit.n as f64;
    let [u, du] = limit.eval_u(rho);
    let c = (nf + 1.0) / 2.0 - (nf + 1.0) * (nf + 1.0) / 4.0;
    (3.0 * nf - 2.0) * u + rho * du - rho * rho * u * u + c / (rho * rho)
}

/// Matching radius and potential ordering for one eps' candidate: the
/// smallest grid radius beyond which the tail is 0.05-close to its limits
/// and W~ >= W holds through rmax.
fn select_rho_eps(limit: &RescaledSolution, setup: &ComparisonSetup) -> Option<(usize, f64)> {
    let euler_c = setup.b + setup.a / 2.0 - setup.a * setup.a / 4.0;
    let mut start = None;
    for (i, &rho) in limit.grid.iter().enumerate().rev() {
        if rho <= 1.0 {
            break;
        }
        let [u, du] = limit.eval_u(rho);
        let close = (rho * rho * u - 1.0).abs() < 0.05 && (rho.powi(3) * du + 2.0).abs() < 0.1;
        let ordered = v_tilde_at(limit, rho) >= euler_c / (rho * rho);
        if close && ordered {
            start = Some(i);
        } else {
            break;
        }
    }
    start.map(|i| (i, limit.grid[i]))
}

pub fn normal_form_potentials(
    limit: &RescaledSolution,
    setup: &ComparisonSetup,
) -> Result<NormalFormPotentials> {
    if !limit.alpha.is_infinite() {
        return Err(Error::precondition(
            "potential comparison is defined for the limit system (alpha infinite)",
        ));
    }
    for eps in EPS_PRIME_LADDER.into_iter().filter(|&e| e >= setup.eps_prime) {
        let candidate = euler_oracle(limit.n, eps)?;
        if candidate.mu_osc.is_none() {
            continue;
        }
        if let Some((i, rho_eps)) = select_rho_eps(limit, &candidate) {
            if rho_eps > limit.rmax / 2.0 {
                continue;
            }
            let grid: Vec<f64> = limit.grid[i..].to_vec();
            let euler_c = candidate.b + candidate.a / 2.0 - candidate.a * candidate.a / 4.0;
            let v_tilde: Vec<f64> = grid.iter().map(|&r| v_tilde_at(limit, r)).collect();
            let v_euler: Vec<f64> = grid.iter().map(|&r| euler_c / (r * r)).collect();
            return Ok(NormalFormPotentials { setup: candidate, rho_eps, grid, v_tilde, v_euler });
        }
    }
    Err(Error::numerical(format!(
        "no eps' in {EPS_PRIME_LADDER:?} orders the potentials below rho = {} (tail not converged)",
        limit.rmax / 2.0
    )))
}

/// Oscillation window report: zeros of the limit probe against the Euler
/// prediction. For 3 <= n <= 9 each full predicted interval must bracket a
/// probe zero; for n >= 10 the zero count is recorded without assertion.
#[derive(Clone, Debug, Serialize)]
pub struct ZeroWindowReport {
    pub n: usize,
    pub discriminant: f64,
    pub mu_osc: Option<f64>,
    pub oscillating: bool,
    pub eps_prime: Option<f64>,
    pub rho_eps: Option<f64>,
    pub rmax: f64,
    pub zeros_found: Vec<f64>,
    pub intervals_checked: usize,
    pub bracketing_verified: Option<bool>,
}

pub fn verify_zero_window(n: usize, rmax: f64) -> Result<ZeroWindowReport> {
    if !(3..=12).contains(&n) {
        return Err(Error::precondition(format!("dimension n = {n} outside [3, 12]")));
    }
    let tol = 1e-10;
    let setup = euler_oracle(n, 0.0)?;

    if setup.mu_osc.is_none() {
        let limit = solve_rescaled(n, f64::INFINITY, rmax, tol)?;
        return Ok(ZeroWindowReport {
            n,
            discriminant: setup.discriminant,
            mu_osc: None,
            oscillating: false,
            eps_prime: None,
            rho_eps: None,
            rmax,
            zeros_found: limit.f_zeros(),
            intervals_checked: 0,
            bracketing_verified: None,
        });
    }

    // oscillating side: grow the window until at least one full predicted
    // interval [rho_eps e^{k pi/mu}, rho_eps e^{(k+1) pi/mu}] fits
    let mut r = rmax;
    for _ in 0..4 {
        let limit = solve_rescaled(n, f64::INFINITY, r, tol)?;
        let nf = normal_form_potentials(&limit, &setup)?;
        let euler = nf.setup.euler_zeros(nf.rho_eps, r);
        if euler.len() >= 2 {
            let zeros = limit.f_zeros();
            let mut all = true;
            for pair in euler.windows(2) {
                if !zeros.iter().any(|&z| pair[0] <= z && z <= pair[1]) {
                    all = false;
                }
            }
            return Ok(ZeroWindowReport {
                n,
                discriminant: nf.setup.discriminant,
                mu_osc: nf.setup.mu_osc,
                oscillating: true,
                eps_prime: Some(nf.setup.eps_prime),
                rho_eps: Some(nf.rho_eps),
                rmax: r,
                zeros_found: zeros,
                intervals_checked: euler.len() - 1,
                bracketing_verified: Some(all),
            });
        }
        let mu = nf.setup.mu_osc.unwrap();
        r = (nf.rho_eps * (std::f64::consts::PI / mu).exp() * 1.05).max(r * 1.5);
        if r > 1e4 {
            break;
        }
    }
    Err(Error::numerical(format!(
        "no full Euler interval below rho = 1e4 for n = {n}: prediction window unreachable"
    )))
}
