//! Second-order probe around a fixed radial profile. The probe f solves
//!
//!   f'' + ((n+1)/rho + rho/2 + 2 rho u) f' + (1 - lambda) f
//!       + mu (4n u + 2 rho u') f = 0,     f(0) = 1, f'(0) = 0,
//!
//! where u is the profile. Zeros of f, counted via Sturm oscillation
//! theory, equal the number of eigenvalues of the weighted self-adjoint
//! realization above the shift lambda. The module also tabulates the
//! weight functions H and pi and classifies the coupling mu by the
//! positivity/oscillation trichotomy.

use crate::error::{Error, Result};
use crate::profile::{ProfileSolution, RadialCoefficient};
use crate::quad;
use crate::radial_ivp::{self, IvpResult, RadialOde, TerminationReason};
use crate::series::Series;
use serde::Serialize;

/// Probe equation as a radial IVP. Only the (n+1)/rho singularity lives in
/// the friction slot; the drift rho/2 + 2 rho u and the zeroth-order terms
/// form the regular part.
struct ProbeOde<'a> {
    sol: &'a ProfileSolution,
    lambda: f64,
    mu: f64,
}

impl ProbeOde<'_> {
    fn nf(&self) -> f64 {
        self.sol.n as f64
    }

    /// Profile launch coefficients as a series of the requested order.
    fn profile_series(&self, order: usize) -> Series {
        let mut c = self.sol.launch().coefficients.clone();
        c.resize(order + 1, 0.0);
        Series { c }
    }
}

impl RadialOde for ProbeOde<'_> {
    fn friction_dim(&self) -> f64 {
        self.nf() + 1.0
    }

    fn regular_part(&self, rho: f64, f: f64, df: f64) -> f64 {
        let [u, du] = self.sol.eval(rho);
        (0.5 * rho + 2.0 * rho * u) * df
            + (1.0 - self.lambda) * f
            + self.mu * (4.0 * self.nf() * u + 2.0 * rho * du) * f
    }

    fn regular_part_series(&self, f: &Series, df: &Series) -> Series {
        let u = self.profile_series(f.order());
        let du = u.deriv();
        df.shift_up()
            .scale(0.5)
            .add(&u.mul(df).shift_up().scale(2.0))
            .add(&f.scale(1.0 - self.lambda))
            .add(&u.mul(f).scale(4.0 * self.nf() * self.mu))
            .add(&du.mul(f).shift_up().scale(2.0 * self.mu))
    }

    fn linear_homogeneous(&self) -> bool {
        true
    }
}

/// One probe run: the normalized solution, its zeros (each refined to well
/// below 1e-10 and simple), and the dense integrator output for later
/// log-scale evaluation.
#[derive(Clone, Debug)]
pub struct EigenProbe {
    pub n: usize,
    pub alpha: f64,
    pub lambda: f64,
    pub mu: f64,
    pub grid: Vec<f64>,
    pub f: Vec<f64>,
    pub df: Vec<f64>,
    pub zeros: Vec<f64>,
    pub rmax: f64,
    pub ivp: IvpResult,
}

pub fn solve_linearized(
    sol: &ProfileSolution,
    lambda: f64,
    mu: f64,
    rmax: f64,
    tol: f64,
) -> Result<EigenProbe> {
    if !(rmax > 1.0) {
        return Err(Error::precondition(format!("probe radius rmax = {rmax} must exceed 1")));
    }
    if rmax > sol.rmax * (1.0 + 1e-12) {
        return Err(Error::precondition(format!(
            "probe radius {rmax} exceeds the profile's solved range {}",
            sol.rmax
        )));
    }
    let ode = ProbeOde { sol, lambda, mu };
    let launch = radial_ivp::launch_series(&ode, 1.0, sol.launch().truncation_order)?;
    let ivp = radial_ivp::integrate(&ode, &launch, rmax, tol)?;
    if ivp.termination_reason != TerminationReason::ReachedRmax {
        return Err(Error::numerical(format!(
            "probe integration stopped at rho = {} ({:?})",
            ivp.terminated_at, ivp.termination_reason
        )));
    }
    let zeros = radial_ivp::find_sign_changes(&ivp);
    for &z in &zeros {
        // a zero with vanishing derivative would force f = 0 identically,
        // contradicting f(0) = 1; renormalized state is O(1), so anything
        // at roundoff scale flags a tangency the bisection misread
        let ([_, df], _) = ivp.eval_raw(z);
        if df.abs() <= 1e-10 {
            return Err(Error::numerical(format!("zero at rho = {z} is not simple")));
        }
    }
    Ok(EigenProbe {
        n: sol.n,
        alpha: sol.alpha,
        lambda,
        mu,
        grid: ivp.grid.clone(),
        f: ivp.value.clone(),
        df: ivp.derivative.clone(),
        zeros,
        rmax,
        ivp,
    })
}

/// Tail certificate on the last decade of a probe: fixed sign and
/// increasing magnitude after removing the shared e^{-rho^2/8} envelope.
/// The generic branch decays algebraically, so its weighted magnitude
/// grows like e^{rho^2/8} modulo powers; contamination by the decaying
/// branch (~e^{-rho^2/4}) shows up immediately as a falling weighted
/// magnitude or a sign flip.
fn tail_certificate(ivp: &IvpResult, rmax: f64) -> bool {
    let lo = rmax / 10.0;
    let mut sign = 0.0;
    let mut prev = f64::NEG_INFINITY;
    for &rho in ivp.grid.iter().filter(|&&r| r >= lo) {
        let ([f, _], log_scale) = ivp.eval_raw(rho);
        if sign == 0.0 {
            sign = f.signum();
        } else if f.signum() != sign {
            return false;
        }
        let weighted = f.abs().ln() + log_scale + rho * rho / 8.0;
        if weighted < prev - 1e-9 {
            return false;
        }
        prev = weighted;
    }
    sign != 0.0
}

/// Number of eigenvalues of the weighted operator strictly above `lambda`,
/// obtained as the zero count of the mu = 1 probe. The count is certified
/// by re-probing on the doubled range: both counts must agree and the far
/// probe must pass the tail certificate, otherwise the count has not
/// stabilized and a larger rmax is required.
pub fn count_unstable_eigenvalues(sol: &ProfileSolution, lambda: f64, rmax: f64) -> Result<usize> {
    if 2.0 * rmax > sol.rmax * (1.0 + 1e-12) {
        return Err(Error::precondition(format!(
            "stabilization re-probes at 2 rmax = {}: solve the profile at least that far out",
            2.0 * rmax
        )));
    }
    let tol = 1e-10;
    let near = solve_linearized(sol, lambda, 1.0, rmax, tol)?;
    let far = solve_linearized(sol, lambda, 1.0, 2.0 * rmax, tol)?;
    if near.zeros.len() != far.zeros.len() || !tail_certificate(&far.ivp, 2.0 * rmax) {
        return Err(Error::numerical(format!(
            "zero count not stabilized ({} inside rho = {rmax}, {} inside {}): increase rmax",
            near.zeros.len(),
            far.zeros.len(),
            2.0 * rmax
        )));
    }
    Ok(near.zeros.len())
}

/// Log-scale tabulations of the two weights
///   H(rho) = exp int_1^rho ((n+1)/s + s/2 + s u) ds,
///   pi(r)  = exp int_0^r  (s/2 + s u) ds,
/// interpolable anywhere on the profile's grid range.
#[derive(Clone, Debug)]
pub struct WeightFunctions {
    pub n: usize,
    pub log_h: RadialCoefficient,
    pub log_pi: RadialCoefficient,
}

impl WeightFunctions {
    pub fn log_h_at(&self, rho: f64) -> f64 {
        self.log_h.eval(rho)
    }

    pub fn log_pi_at(&self, r: f64) -> f64 {
        self.log_pi.eval(r)
    }

    pub fn h_at(&self, rho: f64) -> f64 {
        self.log_h_at(rho).exp()
    }

    pub fn pi_at(&self, r: f64) -> f64 {
        self.log_pi_at(r).exp()
    }
}

pub fn weights(sol: &ProfileSolution) -> Result<WeightFunctions> {
    let n1 = sol.n as f64 + 1.0;
    let x = &sol.grid;

    // int_0^{x0} s u ds from the launch polynomial: sum a_k x0^{k+2}/(k+2)
    let launch = sol.launch();
    let x0 = x[0];
    let origin: f64 = launch
        .coefficients
        .iter()
        .enumerate()
        .map(|(k, &a)| a * x0.powi(k as i32 + 2) / (k as f64 + 2.0))
        .sum();

    // cumulative int_{x0}^{x_i} s u ds, one 8-point Gauss rule per cell
    // against the dense profile: exactness to degree 15 keeps the error at
    // roundoff even where u varies on scales below the grid spacing
    let (gx, gw) = quad::gauss_legendre(8);
    let cell = |a: f64, b: f64| -> f64 {
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        gx.iter()
            .zip(&gw)
            .map(|(&t, &w)| {
                let s = mid + half * t;
                w * half * s * sol.eval(s)[0]
            })
            .sum()
    };
    let mut cum = Vec::with_capacity(x.len());
    let mut acc = 0.0;
    cum.push(0.0);
    for i in 1..x.len() {
        acc += cell(x[i - 1], x[i]);
        cum.push(acc);
    }

    // anchor H at rho = 1 exactly (the grid carries a node there)
    let i1 = x.partition_point(|&g| g < 1.0).min(x.len() - 1);
    if (x[i1] - 1.0).abs() > 1e-9 {
        return Err(Error::numerical(format!(
            "profile grid has no node at rho = 1 (nearest {})",
            x[i1]
        )));
    }
    let cum1 = cum[i1] + cell(x[i1], 1.0);

    let log_h: Vec<f64> = x
        .iter()
        .zip(&cum)
        .map(|(&r, &c)| n1 * r.ln() + (r * r - 1.0) / 4.0 + (c - cum1))
        .collect();
    // pi carries an exact node at the origin, where its log vanishes
    let mut pi_grid = vec![0.0];
    pi_grid.extend_from_slice(x);
    let mut log_pi = vec![0.0];
    log_pi.extend(x.iter().zip(&cum).map(|(&r, &c)| r * r / 4.0 + origin + c));

    // both integrands are strictly positive, so the tabulations must rise
    for i in 1..x.len() {
        if !(log_h[i] > log_h[i - 1]) || !(log_pi[i + 1] > log_pi[i]) {
            return Err(Error::numerical(format!(
                "weight tabulation not increasing near rho = {}",
                x[i]
            )));
        }
    }

    Ok(WeightFunctions {
        n: sol.n,
        log_h: RadialCoefficient { grid: x.clone(), values: log_h },
        log_pi: RadialCoefficient { grid: pi_grid, values: log_pi },
    })
}

/// Where the coupling mu sits relative to the principal eigenvalue of the
/// weighted problem at shift lambda.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MuClass {
    SubcriticalPositive,
    CriticalCandidate,
    SupercriticalOscillating,
}

/// Trichotomy probe: a zero anywhere means the coupling is supercritical;
/// otherwise the Green-type integral int_1^rmax drho / (H f^2) decides.
/// For subcritical couplings f tracks the generic algebraic branch and the
/// integrand dies like e^{-rho^2/4}, so the integral converges well inside
/// rmax; a critical coupling keeps f on the decaying branch and the
/// integrand blows up instead. Convergence is declared when the tail
/// estimate from the boundary log-slope is under 1% of the accumulated
/// integral.
pub fn classify_mu(sol: &ProfileSolution, lambda: f64, mu: f64, rmax: f64) -> Result<MuClass> {
    if !(lambda > 0.0) {
        return Err(Error::precondition(format!("shift lambda = {lambda} must be > 0")));
    }
    let probe = solve_linearized(sol, lambda, mu, rmax, 1e-10)?;
    if !probe.zeros.is_empty() {
        return Ok(MuClass::SupercriticalOscillating);
    }
    let w = weights(sol)?;

    let start = probe.ivp.grid.partition_point(|&r| r < 1.0);
    let xs: Vec<f64> = probe.ivp.grid[start..].to_vec();
    if xs.len() < 4 {
        return Err(Error::precondition(format!(
            "rmax = {rmax} leaves too little of [1, rmax] to test convergence"
        )));
    }
    let gs: Vec<f64> = xs
        .iter()
        .map(|&rho| {
            let ([f, _], log_scale) = probe.ivp.eval_raw(rho);
            let log_f = f.abs().ln() + log_scale;
            (-(w.log_h_at(rho) + 2.0 * log_f)).exp()
        })
        .collect();
    let accumulated = quad::integrate_grid(&xs, &gs);

    let m = gs.len();
    let tail = if gs[m - 1] == 0.0 {
        // integrand already under the representable floor
        0.0
    } else {
        let slope = (gs[m - 1] / gs[m - 2]).ln() / (xs[m - 1] - xs[m - 2]);
        if slope < -1e-9 { gs[m - 1] / -slope } else { f64::INFINITY }
    };

    if tail < 0.01 * accumulated {
        Ok(MuClass::SubcriticalPositive)
    } else {
        Ok(MuClass::CriticalCandidate)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::solve_profile;
    use crate::radial_ivp::{integrate, launch_series};
    use crate::rk::{Dopri5, StepControl};

    /// Confluent hypergeometric series M(a, b, z); fine for moderate |z|.
    fn kummer_m(a: f64, b: f64, z: f64) -> f64 {
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 0..200 {
            let kf = k as f64;
            term *= (a + kf) * z / ((b + kf) * (kf + 1.0));
            sum += term;
            if term.abs() < 1e-17 * sum.abs().max(1.0) {
                break;
            }
        }
        sum
    }

    /// The probe equation with the profile removed:
    ///   f'' + ((n+1)/rho + rho/2) f' + (1 - lambda) f = 0,
    /// solved exactly by M(1 - lambda, (n+2)/2, -rho^2/4).
    struct DriftFree {
        n: f64,
        lambda: f64,
    }

    impl RadialOde for DriftFree {
        fn friction_dim(&self) -> f64 {
            self.n + 1.0
        }
        fn regular_part(&self, rho: f64, f: f64, df: f64) -> f64 {
            0.5 * rho * df + (1.0 - self.lambda) * f
        }
        fn regular_part_series(&self, f: &Series, df: &Series) -> Series {
            df.shift_up().scale(0.5).add(&f.scale(1.0 - self.lambda))
        }
        fn linear_homogeneous(&self) -> bool {
            true
        }
    }

    #[test]
    fn drift_free_probe_matches_confluent_series() {
        for lambda in [0.0, 0.3] {
            let ode = DriftFree { n: 5.0, lambda };
            let launch = launch_series(&ode, 1.0, 12).unwrap();
            let ivp = integrate(&ode, &launch, 8.0, 1e-12).unwrap();
            for rho in [0.5, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0] {
                let exact = kummer_m(1.0 - lambda, 3.5, -rho * rho / 4.0);
                let got = ivp.eval(rho)[0];
                assert!(
                    (got - exact).abs() < 1e-9 * (1.0 + exact.abs()),
                    "lambda={lambda} rho={rho}: {got} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn vanishing_profile_recovers_drift_free_probe() {
        // with alpha ~ 1e-8 the 2 rho u drift and the potential scale
        // out of the picture, so mu = 0 probes collapse onto the
        // profile-free equation
        let sol = solve_profile(5, 1e-8, 12.0, 1e-10).unwrap();
        let p = solve_linearized(&sol, 0.3, 0.0, 8.0, 1e-11).unwrap();
        for rho in [0.5, 2.0, 4.0, 6.0] {
            let exact = kummer_m(0.7, 3.5, -rho * rho / 4.0);
            let got = p.ivp.eval(rho)[0];
            assert!(
                (got - exact).abs() < 1e-6 * (1.0 + exact.abs()),
                "rho={rho}: {got} vs {exact}"
            );
        }
        assert!(p.zeros.is_empty());
    }

    #[test]
    fn zero_count_landmarks_at_n5() {
        // alpha below 1/(16n) = 0.0125 admits no unstable eigenvalue
        let small = solve_profile(5, 0.01, 100.0, 1e-10).unwrap();
        assert_eq!(count_unstable_eigenvalues(&small, 0.0, 40.0).unwrap(), 0);

        let big = solve_profile(5, 5.0, 100.0, 1e-10).unwrap();
        assert_eq!(count_unstable_eigenvalues(&big, 0.0, 40.0).unwrap(), 1);
        let probe = solve_linearized(&big, 0.0, 1.0, 40.0, 1e-10).unwrap();
        assert_eq!(probe.zeros.len(), 1);
        assert!(
            (probe.zeros[0] - 2.751).abs() < 5e-3,
            "first zero at {}",
            probe.zeros[0]
        );

        // large shifts dominate the potential
        assert_eq!(count_unstable_eigenvalues(&big, 10.0, 40.0).unwrap(), 0);
    }

    #[test]
    fn zero_count_monotone_in_shift_and_coupling() {
        let sol = solve_profile(5, 5.0, 60.0, 1e-10).unwrap();

        let mut last = usize::MAX;
        for lambda in [0.0, 0.05, 0.11, 0.3] {
            let c = solve_linearized(&sol, lambda, 1.0, 25.0, 1e-10).unwrap().zeros.len();
            assert!(c <= last, "count rose from {last} to {c} at lambda={lambda}");
            last = c;
        }

        let mut last = 0;
        for mu in [0.25, 1.0, 4.0, 16.0] {
            let c = solve_linearized(&sol, 0.0, mu, 25.0, 1e-10).unwrap().zeros.len();
            assert!(c >= last, "count fell from {last} to {c} at mu={mu}");
            last = c;
        }
        assert!(last >= 2, "strong coupling should oscillate, got {last} zeros");
    }

    #[test]
    fn unstabilized_count_advises_larger_rmax() {
        let sol = solve_profile(5, 5.0, 20.0, 1e-10).unwrap();
        // the only zero sits near 2.751, so counts at 1.5 and 3 disagree
        let err = count_unstable_eigenvalues(&sol, 0.0, 1.5).unwrap_err();
        assert!(!err.is_precondition());
        assert!(err.to_string().contains("increase rmax"), "{err}");

        // doubling past the profile range is caught up front
        let err = count_unstable_eigenvalues(&sol, 0.0, 15.0).unwrap_err();
        assert!(err.is_precondition());
    }

    #[test]
    fn probe_scales_linearly_with_initial_value() {
        let sol = solve_profile(5, 5.0, 30.0, 1e-10).unwrap();
        let ode = ProbeOde { sol: &sol, lambda: 0.0, mu: 1.0 };
        let unit = launch_series(&ode, 1.0, 12).unwrap();
        let tripled = launch_series(&ode, 3.0, 12).unwrap();
        let a = integrate(&ode, &unit, 20.0, 1e-11).unwrap();
        let b = integrate(&ode, &tripled, 20.0, 1e-11).unwrap();
        for rho in [1.0, 5.0, 12.0, 19.0] {
            let fa = a.eval(rho)[0];
            let fb = b.eval(rho)[0];
            assert!((fb - 3.0 * fa).abs() < 1e-9 * (1.0 + fa.abs()), "rho={rho}");
        }
        let za = radial_ivp::find_sign_changes(&a);
        let zb = radial_ivp::find_sign_changes(&b);
        assert_eq!(za.len(), zb.len());
        for (x, y) in za.iter().zip(&zb) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    /// Independent quadrature oracle: push int s u ds through the adaptive
    /// stepper at a much tighter tolerance and compare tabulations.
    fn oracle_su_integral(sol: &ProfileSolution, a: f64, b: f64) -> f64 {
        let ctrl = StepControl { rtol: 1e-13, atol: 1e-16, ..StepControl::default() };
        let mut integ = Dopri5::new(|s: f64, _y: &[f64; 1]| [s * sol.eval(s)[0]], a, [0.0], ctrl);
        while integ.t() < b {
            integ.step(b).unwrap();
        }
        integ.y()[0]
    }

    #[test]
    fn weight_tabulations_match_direct_quadrature() {
        let sol = solve_profile(5, 1.0, 60.0, 1e-11).unwrap();
        let w = weights(&sol).unwrap();

        assert!(w.log_h_at(1.0).abs() < 1e-10, "H(1) != 1");
        assert!(w.log_pi_at(0.0).abs() < 1e-9, "pi(0) != 1");

        // strip the closed-form parts and compare the quadrature piece
        for rho in [2.0003, 7.1, 31.0] {
            let quad_part = w.log_h_at(rho) - 6.0 * rho.ln() - (rho * rho - 1.0) / 4.0;
            let oracle = oracle_su_integral(&sol, 1.0, rho);
            assert!(
                (quad_part - oracle).abs() < 1e-8 * (1.0 + oracle.abs()),
                "rho={rho}: {quad_part} vs {oracle}"
            );
        }

        // steep-launch case: u varies on the 1/sqrt(alpha) scale
        let steep = solve_profile(5, 100.0, 60.0, 1e-11).unwrap();
        let ws = weights(&steep).unwrap();
        let got = ws.log_pi_at(0.5) - ws.log_pi_at(0.01) - (0.25 - 1e-4) / 4.0;
        let oracle = oracle_su_integral(&steep, 0.01, 0.5);
        assert!(
            (got - oracle).abs() < 1e-8 * (1.0 + oracle.abs()),
            "{got} vs {oracle}"
        );
    }

    #[test]
    fn weight_growth_tracks_profile_tail() {
        let sol = solve_profile(5, 1.0, 100.0, 1e-10).unwrap();
        let w = weights(&sol).unwrap();

        // log H = (n+1+ell) log rho + rho^2/4 + O(1); measure the slope of
        // the remainder over an e-fold and compare with the frozen tail
        // limit ell(n=5, alpha=1)
        let q = |rho: f64| w.log_h_at(rho) - 6.0 * rho.ln() - rho * rho / 4.0;
        let slope = (q(81.9) - q(30.1)) / (81.9f64 / 30.1).ln();
        assert!((slope - 0.9666475).abs() < 0.1, "slope {slope}");

        let mut prev_h = f64::NEG_INFINITY;
        let mut prev_pi = f64::NEG_INFINITY;
        for i in 0..40 {
            let rho = 1.1 + 88.9 * i as f64 / 39.0;
            let (lh, lp) = (w.log_h_at(rho), w.log_pi_at(rho));
            assert!(lh > prev_h && lp > prev_pi, "weights not increasing at rho={rho}");
            (prev_h, prev_pi) = (lh, lp);
        }
    }

    #[test]
    fn coupling_classification_brackets_the_critical_value() {
        let sol = solve_profile(5, 5.0, 60.0, 1e-10).unwrap();
        let (lambda, rmax) = (0.05, 10.0);

        assert!(classify_mu(&sol, 0.0, 1.0, rmax).unwrap_err().is_precondition());

        assert_eq!(classify_mu(&sol, lambda, 0.0, rmax).unwrap(), MuClass::SubcriticalPositive);
        // below the uniform lower bound 1/(16 n alpha) = 0.0025
        assert_eq!(classify_mu(&sol, lambda, 0.002, rmax).unwrap(), MuClass::SubcriticalPositive);
        assert_eq!(
            classify_mu(&sol, lambda, 50.0, rmax).unwrap(),
            MuClass::SupercriticalOscillating
        );

        // bisect on zero-presence to land within roundoff of the critical
        // coupling, where the probe rides the decaying branch past rmax
        let (mut lo, mut hi) = (0.002, 50.0);
        assert!(solve_linearized(&sol, lambda, lo, rmax, 1e-10).unwrap().zeros.is_empty());
        assert!(!solve_linearized(&sol, lambda, hi, rmax, 1e-10).unwrap().zeros.is_empty());
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if solve_linearized(&sol, lambda, mid, rmax, 1e-10).unwrap().zeros.is_empty() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        // classify at the certified zero-free endpoint: within roundoff of
        // the transition the decaying branch still dominates out to rmax,
        // so the integral cannot be certified convergent
        assert_eq!(classify_mu(&sol, lambda, lo, rmax).unwrap(), MuClass::CriticalCandidate);
        assert_eq!(
            classify_mu(&sol, lambda, lo - 1e-4, rmax).unwrap(),
            MuClass::SubcriticalPositive
        );
        assert_eq!(
            classify_mu(&sol, lambda, hi + 1e-4, rmax).unwrap(),
            MuClass::SupercriticalOscillating
        );
    }
}
