//! Explicit Dormand-Prince 5(4) stepper with dense output.
//!
//! This is the classic 7-stage FSAL pair. The integrator is exposed as a
//! manually driven object rather than a one-shot function because callers
//! need per-step control: radial solvers cap the step against a
//! rho-dependent stability bound, rescale the state of linear systems to
//! dodge overflow, and stream dense segments without storing them.

use crate::error::{Error, Result};

const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];

const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
const B: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

#[derive(Clone, Copy, Debug)]
pub struct StepControl {
    pub rtol: f64,
    pub atol: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for StepControl {
    fn default() -> Self {
        StepControl { rtol: 1e-10, atol: 1e-14, h_max: f64::INFINITY, max_steps: 50_000_000 }
    }
}

/// One accepted step together with its quartic interpolant.
#[derive(Clone, Copy, Debug)]
pub struct Step<const N: usize> {
    pub t0: f64,
    pub h: f64,
    rcont: [[f64; N]; 5],
}

impl<const N: usize> Step<N> {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.t0 && t <= self.t1()
    }

    pub fn eval(&self, t: f64) -> [f64; N] {
        let th = (t - self.t0) / self.h;
        let th1 = 1.0 - th;
        let mut out = [0.0; N];
        for i in 0..N {
            let r = &self.rcont;
            out[i] = r[0][i] + th * (r[1][i] + th1 * (r[2][i] + th * (r[3][i] + th1 * r[4][i])));
        }
        out
    }

    /// Build a segment from per-component cubics `c0 + c1 th + c2 th^2 + c3 th^3`
    /// in the normalized step coordinate `th = (t - t0) / h`. Lets callers
    /// reconstruct dense output from tabulated data (e.g. Hermite cells).
    pub fn from_cubic(t0: f64, h: f64, c: [[f64; 4]; N]) -> Step<N> {
        let mut rcont = [[0.0; N]; 5];
        for i in 0..N {
            let [c0, c1, c2, c3] = c[i];
            rcont[0][i] = c0;
            rcont[1][i] = c1 + c2 + c3;
            rcont[2][i] = -c2 - c3;
            rcont[3][i] = -c3;
        }
        Step { t0, h, rcont }
    }
}

pub struct Dopri5<F, const N: usize> {
    rhs: F,
    t: f64,
    y: [f64; N],
    k1: [f64; N],
    h: f64,
    pub ctrl: StepControl,
    pub n_evals: usize,
    pub n_accepted: usize,
    pub n_rejected: usize,
    just_rejected: bool,
}

impl<F, const N: usize> Dopri5<F, N>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    pub fn new(mut rhs: F, t0: f64, y0: [f64; N], ctrl: StepControl) -> Self {
        let k1 = rhs(t0, &y0);
        let mut s = Dopri5 {
            rhs,
            t: t0,
            y: y0,
            k1,
            h: 0.0,
            ctrl,
            n_evals: 1,
            n_accepted: 0,
            n_rejected: 0,
            just_rejected: false,
        };
        s.h = s.initial_step();
        s
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn y(&self) -> &[f64; N] {
        &self.y
    }

    /// Scale the state by a positive factor. Only meaningful for linear
    /// homogeneous systems, where the rescaled trajectory solves the same
    /// equation; the cached FSAL slope scales along.
    pub fn rescale(&mut self, factor: f64) {
        for i in 0..N {
            self.y[i] *= factor;
            self.k1[i] *= factor;
        }
    }

    fn scaled_norm(&self, v: &[f64; N], y0: &[f64; N], y1: &[f64; N]) -> f64 {
        let mut acc = 0.0;
        for i in 0..N {
            let sk = self.ctrl.atol + self.ctrl.rtol * y0[i].abs().max(y1[i].abs());
            let q = v[i] / sk;
            acc += q * q;
        }
        (acc / N as f64).sqrt()
    }

    /// Standard starting-step heuristic: balance the size of the first
    /// Euler step against a crude second-derivative estimate.
    fn initial_step(&mut self) -> f64 {
        let y = self.y;
        let k1 = self.k1;
        let d0 = self.scaled_norm(&y, &y, &y);
        let d1 = self.scaled_norm(&k1, &y, &y);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let h0 = h0.min(self.ctrl.h_max);
        let mut y1 = [0.0; N];
        for i in 0..N {
            y1[i] = y[i] + h0 * k1[i];
        }
        let f1 = (self.rhs)(self.t + h0, &y1);
        self.n_evals += 1;
        let mut diff = [0.0; N];
        for i in 0..N {
            diff[i] = f1[i] - k1[i];
        }
        let d2 = self.scaled_norm(&diff, &y, &y) / h0;
        let d_max = d1.max(d2);
        let h1 = if d_max <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / d_max).powf(0.2) };
        h1.min(100.0 * h0).min(self.ctrl.h_max)
    }

    /// Advance by one accepted step, never past `t_end`, and return the
    /// dense interpolant of the step taken.
    pub fn step(&mut self, t_end: f64) -> Result<Step<N>> {
        loop {
            if self.n_accepted + self.n_rejected >= self.ctrl.max_steps {
                return Err(Error::numerical(format!(
                    "step budget exhausted at t = {:.6e}",
                    self.t
                )));
            }
            let mut h = self.h.min(self.ctrl.h_max);
            let last = self.t + 1.01 * h >= t_end;
            if last {
                h = t_end - self.t;
            }
            if h <= 1e-14 * self.t.abs().max(1.0) {
                return Err(Error::numerical(format!(
                    "step size collapsed to {:.3e} at t = {:.6e}",
                    h, self.t
                )));
            }

            let t = self.t;
            let y = self.y;
            let k1 = self.k1;
            let mut stage = |tc: f64, coeffs: &[f64], ks: &[[f64; N]]| {
                let mut ya = y;
                for (a, k) in coeffs.iter().zip(ks) {
                    for i in 0..N {
                        ya[i] += h * a * k[i];
                    }
                }
                self.n_evals += 1;
                (self.rhs)(t + tc * h, &ya)
            };
            let k2 = stage(C[0], &A2, &[k1]);
            let k3 = stage(C[1], &A3, &[k1, k2]);
            let k4 = stage(C[2], &A4, &[k1, k2, k3]);
            let k5 = stage(C[3], &A5, &[k1, k2, k3, k4]);
            let k6 = stage(C[4], &A6, &[k1, k2, k3, k4, k5]);
            let ks = [k1, k2, k3, k4, k5, k6];

            let mut y1 = y;
            for (b, k) in B.iter().zip(&ks) {
                for i in 0..N {
                    y1[i] += h * b * k[i];
                }
            }
            self.n_evals += 1;
            let k7 = (self.rhs)(t + h, &y1);

            let ks = [k1, k2, k3, k4, k5, k6, k7];
            let mut err_vec = [0.0; N];
            for (e, k) in E.iter().zip(&ks) {
                for i in 0..N {
                    err_vec[i] += h * e * k[i];
                }
            }
            let err = self.scaled_norm(&err_vec, &y, &y1);

            if err <= 1.0 {
                let fac_max = if self.just_rejected { 1.0 } else { 5.0 };
                let fac = (0.9 * err.powf(-0.2)).clamp(0.2, fac_max);
                let mut rcont = [[0.0; N]; 5];
                for i in 0..N {
                    let delta = y1[i] - self.y[i];
                    rcont[0][i] = self.y[i];
                    rcont[1][i] = delta;
                    rcont[2][i] = h * k1[i] - delta;
                    rcont[3][i] = delta - h * k7[i] - rcont[2][i];
                    let mut d = 0.0;
                    for (dj, k) in D.iter().zip(&ks) {
                        d += dj * k[i];
                    }
                    rcont[4][i] = h * d;
                }
                let step = Step { t0: self.t, h, rcont };
                self.t += h;
                self.y = y1;
                self.k1 = k7;
                self.h = h * fac;
                self.n_accepted += 1;
                self.just_rejected = false;
                return Ok(step);
            }
            self.h = h * (0.9 * err.powf(-0.2)).max(0.1);
            self.n_rejected += 1;
            self.just_rejected = true;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn drive<F: FnMut(f64, &[f64; 2]) -> [f64; 2]>(
        rhs: F,
        y0: [f64; 2],
        t_end: f64,
        ctrl: StepControl,
    ) -> (Vec<Step<2>>, [f64; 2]) {
        let mut integ = Dopri5::new(rhs, 0.0, y0, ctrl);
        let mut steps = Vec::new();
        while integ.t() < t_end {
            steps.push(integ.step(t_end).unwrap());
        }
        (steps, *integ.y())
    }

    #[test]
    fn exponential_growth_accuracy() {
        let ctrl = StepControl { rtol: 1e-10, atol: 1e-14, ..Default::default() };
        let (_, y) = drive(|_, y| [y[0], y[1]], [1.0, 1.0], 1.0, ctrl);
        assert_relative_eq!(y[0], std::f64::consts::E, max_relative = 1e-9);
    }

    #[test]
    fn dense_output_tracks_cosine() {
        let ctrl = StepControl { rtol: 1e-10, atol: 1e-14, ..Default::default() };
        let (steps, _) = drive(|_, y| [y[1], -y[0]], [1.0, 0.0], 10.0, ctrl);
        for step in &steps {
            for j in 0..5 {
                let t = step.t0 + step.h * j as f64 / 4.0;
                let y = step.eval(t);
                assert_relative_eq!(y[0], t.cos(), epsilon = 1e-8);
                assert_relative_eq!(y[1], -t.sin(), epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn dense_output_is_high_order() {
        // max dense-output error between nodes should drop by ~2^5 when
        // the step cap is halved
        let err_at = |h_max: f64| {
            let ctrl = StepControl { rtol: 1e-3, atol: 1e-3, h_max, ..Default::default() };
            let (steps, _) = drive(|_, y| [y[1], -y[0]], [1.0, 0.0], 3.0, ctrl);
            let mut worst: f64 = 0.0;
            for step in &steps {
                for j in 1..8 {
                    let t = step.t0 + step.h * j as f64 / 8.0;
                    worst = worst.max((step.eval(t)[0] - t.cos()).abs());
                }
            }
            worst
        };
        let (e1, e2) = (err_at(0.2), err_at(0.1));
        let order = (e1 / e2).log2();
        assert!(order > 4.0, "observed dense order {order:.2} (errors {e1:.3e}, {e2:.3e})");
    }

    #[test]
    fn rescale_commutes_with_linear_flow() {
        let ctrl = StepControl { rtol: 1e-12, atol: 1e-16, ..Default::default() };
        let rhs = |_: f64, y: &[f64; 2]| [y[1], -0.3 * y[0] + 0.1 * y[1]];
        let (_, y_plain) = drive(rhs, [1.0, 0.0], 4.0, ctrl);

        let mut integ = Dopri5::new(rhs, 0.0, [1.0, 0.0], ctrl);
        let mut log_scale = 0.0;
        while integ.t() < 4.0 {
            integ.step(4.0).unwrap();
            let m = integ.y()[0].abs().max(integ.y()[1].abs());
            integ.rescale(1.0 / m);
            log_scale += m.ln();
        }
        let y = integ.y();
        assert_relative_eq!(y[0] * log_scale.exp(), y_plain[0], max_relative = 1e-9);
        assert_relative_eq!(y[1] * log_scale.exp(), y_plain[1], max_relative = 1e-9);
    }

    #[test]
    fn step_never_overshoots() {
        let ctrl = StepControl::default();
        let (steps, _) = drive(|t, _| [t.cos(), 0.0], [0.0, 0.0], 2.5, ctrl);
        let last = steps.last().unwrap();
        assert_relative_eq!(last.t1(), 2.5, epsilon = 1e-12);
    }

    #[test]
    fn cubic_segment_reproduces_its_polynomials() {
        let c = [[1.0, -2.0, 0.5, 3.0], [0.25, 4.0, -1.5, -0.75]];
        let step = Step::from_cubic(2.0, 0.5, c);
        for &th in &[0.0, 0.17, 0.5, 0.83, 1.0] {
            let got = step.eval(2.0 + 0.5 * th);
            for i in 0..2 {
                let [c0, c1, c2, c3] = c[i];
                let want = c0 + th * (c1 + th * (c2 + th * c3));
                assert_relative_eq!(got[i], want, epsilon = 1e-14);
            }
        }
    }
}
