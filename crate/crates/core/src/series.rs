//! Truncated power series around the origin.
//!
//! Everything here is plain dense arithmetic on coefficient vectors. The
//! intended use is launching regular solutions of radial ODEs off the
//! coordinate singularity at rho = 0, where the series order stays small
//! (a dozen terms) and products are cheap.

/// Polynomial `sum c[k] x^k`, truncated at a fixed order `c.len() - 1`.
///
/// Binary operations require equal orders; the constructors below make it
/// easy to keep every intermediate at the common truncation order.
#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub c: Vec<f64>,
}

impl Series {
    pub fn zeros(order: usize) -> Self {
        Series { c: vec![0.0; order + 1] }
    }

    pub fn constant(value: f64, order: usize) -> Self {
        let mut s = Series::zeros(order);
        s.c[0] = value;
        s
    }

    pub fn order(&self) -> usize {
        self.c.len() - 1
    }

    pub fn add(&self, other: &Series) -> Series {
        assert_eq!(self.c.len(), other.c.len());
        Series { c: self.c.iter().zip(&other.c).map(|(a, b)| a + b).collect() }
    }

    pub fn scale(&self, factor: f64) -> Series {
        Series { c: self.c.iter().map(|a| a * factor).collect() }
    }

    /// Product truncated at the common order.
    pub fn mul(&self, other: &Series) -> Series {
        assert_eq!(self.c.len(), other.c.len());
        let mut out = Series::zeros(self.order());
        for (i, &a) in self.c.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (j, &b) in other.c.iter().take(self.c.len() - i).enumerate() {
                out.c[i + j] += a * b;
            }
        }
        out
    }

    /// Termwise derivative, re-padded to the same truncation order.
    ///
    /// The top coefficient of the result is unknown at this truncation and
    /// is set to zero; callers must not rely on the derivative's top term.
    pub fn deriv(&self) -> Series {
        let mut out = Series::zeros(self.order());
        for k in 1..self.c.len() {
            out.c[k - 1] = self.c[k] * k as f64;
        }
        out
    }

    /// Multiplication by `x`, truncated to the same order.
    pub fn shift_up(&self) -> Series {
        let mut out = Series::zeros(self.order());
        for k in 0..self.c.len() - 1 {
            out.c[k + 1] = self.c[k];
        }
        out
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.c.iter().rev().fold(0.0, |acc, &a| acc * x + a)
    }

    pub fn eval_deriv(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for k in (1..self.c.len()).rev() {
            acc = acc * x + self.c[k] * k as f64;
        }
        acc
    }

    pub fn eval_second_deriv(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for k in (2..self.c.len()).rev() {
            acc = acc * x + self.c[k] * (k * (k - 1)) as f64;
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn product_truncates() {
        // (1 + x)^2 = 1 + 2x + x^2 at order 2
        let p = Series { c: vec![1.0, 1.0, 0.0] };
        let q = p.mul(&p);
        assert_eq!(q.c, vec![1.0, 2.0, 1.0]);
        // order 1 drops the x^2 term
        let p1 = Series { c: vec![1.0, 1.0] };
        assert_eq!(p1.mul(&p1).c, vec![1.0, 2.0]);
    }

    #[test]
    fn horner_matches_naive() {
        let p = Series { c: vec![2.0, -1.0, 0.5, 3.0] };
        let x = 0.37;
        let naive = 2.0 - x + 0.5 * x * x + 3.0 * x * x * x;
        assert_relative_eq!(p.eval(x), naive, max_relative = 1e-15);
        assert_relative_eq!(p.eval_deriv(x), -1.0 + x + 9.0 * x * x, max_relative = 1e-14);
        assert_relative_eq!(p.eval_second_deriv(x), 1.0 + 18.0 * x, max_relative = 1e-14);
    }

    #[test]
    fn deriv_and_shift() {
        let p = Series { c: vec![1.0, 2.0, 3.0] };
        assert_eq!(p.deriv().c, vec![2.0, 6.0, 0.0]);
        assert_eq!(p.shift_up().c, vec![0.0, 1.0, 2.0]);
    }
}
