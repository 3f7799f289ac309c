//! Parameter searches over the profile family.
//!
//! Three questions are answered by bisection on stabilized probe zero
//! counts: at which amplitude does the probe first acquire k zeros
//! (`find_alpha_with_k_zeros`), at which amplitude does the shifted probe
//! first acquire a zero (`find_alpha_bar`, the onset of an eigenvalue above
//! a prescribed shift), and how far can the shift grow before a given
//! profile's zero count drops to zero (`find_lambda_max`, the top of the
//! unstable spectrum).
//!
//! The searches do not assume the zero count is monotone in the amplitude:
//! bisection runs on the indicator "count >= k" inside the first bracket
//! acquired by doubling from the proven-stable floor 1/(16 n), and the
//! result is the lowest crossing inside that bracket. Every result carries
//! a certificate naming the two endpoint probes and their differing counts;
//! `verify_certificate` re-runs exactly those probes.

use serde::Serialize;

use crate::cache::solve_profile_cached;
use crate::error::{Error, Result};
use crate::linearized::count_unstable_eigenvalues;
use crate::profile::ProfileSolution;

/// Radius the search solves profiles out to; twice the largest probe radius
/// the stabilization policy may request.
pub const SEARCH_PROFILE_RMAX: f64 = 800.0;
/// Tolerance for profiles and probes inside searches.
pub const SEARCH_TOL: f64 = 1e-10;
/// Amplitudes above this are not explored; bracket acquisition fails instead.
pub const ALPHA_MAX: f64 = 1e6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchTarget {
    AlphaK,
    AlphaBar,
    LambdaMax,
}

/// One endpoint of a bisection certificate. The probe is fully described:
/// solving the profile at `alpha` and counting probe zeros at shift
/// `lambda` with radius `rmax` reproduces `zero_count`. The amplitude
/// searches vary `alpha` at fixed shift; `find_lambda_max` varies `lambda`
/// at fixed amplitude.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct BracketProbe {
    pub alpha: f64,
    pub lambda: f64,
    pub zero_count: usize,
    pub rmax: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SearchResult {
    pub n: usize,
    pub target: SearchTarget,
    /// Bracket midpoint.
    pub value: f64,
    pub bracket: (f64, f64),
    /// Number of stabilized count evaluations spent.
    pub evaluations: usize,
    /// The final (low, high) endpoint probes; their counts differ.
    pub certificate: (BracketProbe, BracketProbe),
}

/// Zero count with the escalating-radius policy: start at 50, double on
/// stabilization failures, give up when the next doubling could not be
/// certified against the profile's own extent.
fn stabilized_count(sol: &ProfileSolution, lambda: f64) -> Result<(usize, f64)> {
    let mut rmax = 50.0_f64;
    loop {
        match count_unstable_eigenvalues(sol, lambda, rmax) {
            Ok(count) => return Ok((count, rmax)),
            Err(e) => {
                // The count itself re-probes at 2 rmax, so doubling rmax
                // needs 4x the current radius from the profile.
                if e.is_precondition() || 4.0 * rmax > sol.rmax * (1.0 + 1e-12) {
                    return Err(e);
                }
                rmax *= 2.0;
            }
        }
    }
}

fn probe_alpha(n: usize, alpha: f64, lambda: f64, evals: &mut usize) -> Result<BracketProbe> {
    let sol = solve_profile_cached(n, alpha, SEARCH_PROFILE_RMAX, SEARCH_TOL)?;
    let (zero_count, rmax) = stabilized_count(&sol, lambda)?;
    *evals += 1;
    Ok(BracketProbe { alpha, lambda, zero_count, rmax })
}

fn check_search_preconditions(n: usize, tol: f64) -> Result<()> {
    if !(3..=9).contains(&n) {
        return Err(Error::precondition(format!("dimension n = {n} outside [3, 9]")));
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::precondition(format!("tolerance {tol:e} must be positive")));
    }
    Ok(())
}

/// Bisection on the indicator `zero count >= k` over the amplitude, with the
/// probe shifted by `lambda`.
fn bisect_alpha(
    n: usize,
    lambda: f64,
    k: usize,
    tol: f64,
    target: SearchTarget,
) -> Result<SearchResult> {
    let mut evals = 0;
    let floor = 1.0 / (16.0 * n as f64);
    let mut lo = probe_alpha(n, floor, lambda, &mut evals)?;
    if lo.zero_count >= k {
        return Err(Error::numerical(format!(
            "probe already has {} zero(s) at the proven-stable amplitude {floor:.6e}",
            lo.zero_count
        )));
    }
    let mut hi = loop {
        let alpha = 2.0 * lo.alpha;
        if alpha > ALPHA_MAX {
            return Err(Error::numerical(format!(
                "no amplitude below {ALPHA_MAX:e} gives the probe {k} zero(s) \
                 (shift {lambda}, n = {n})"
            )));
        }
        let p = probe_alpha(n, alpha, lambda, &mut evals)?;
        if p.zero_count >= k {
            break p;
        }
        lo = p;
    };
    while hi.alpha - lo.alpha > tol {
        let mid = 0.5 * (lo.alpha + hi.alpha);
        if mid <= lo.alpha || mid >= hi.alpha {
            break; // f64 resolution exhausted
        }
        let p = probe_alpha(n, mid, lambda, &mut evals)?;
        if p.zero_count >= k {
            hi = p;
        } else {
            lo = p;
        }
    }
    Ok(SearchResult {
        n,
        target,
        value: 0.5 * (lo.alpha + hi.alpha),
        bracket: (lo.alpha, hi.alpha),
        evaluations: evals,
        certificate: (lo, hi),
    })
}

/// Smallest amplitude (within tol, lowest crossing in the acquired bracket)
/// whose unshifted probe shows at least `k` zeros.
pub fn find_alpha_with_k_zeros(n: usize, k: usize, tol: f64) -> Result<SearchResult> {
    check_search_preconditions(n, tol)?;
    if k < 1 {
        return Err(Error::precondition("zero count target k must be >= 1"));
    }
    bisect_alpha(n, 0.0, k, tol, SearchTarget::AlphaK)
}

/// Onset amplitude for the shifted probe: the infimum of amplitudes whose
/// probe at shift `lambda_bar` has a positive zero. Guaranteed to sit at or
/// above the stability floor 1/(16 n).
pub fn find_alpha_bar(n: usize, lambda_bar: f64, tol: f64) -> Result<SearchResult> {
    check_search_preconditions(n, tol)?;
    if !(lambda_bar > 0.0) {
        return Err(Error::precondition(format!("shift {lambda_bar} must be > 0")));
    }
    let result = bisect_alpha(n, lambda_bar, 1, tol, SearchTarget::AlphaBar)?;
    let floor = 1.0 / (16.0 * n as f64);
    if result.value < floor {
        return Err(Error::numerical(format!(
            "onset amplitude {:.6e} fell below the proven floor {floor:.6e}",
            result.value
        )));
    }
    Ok(result)
}

/// Largest shift at which the profile's probe still has a zero: bisection
/// on the transition of the stabilized count from >= 1 to 0. The profile
/// must be solved far enough out for the radius policy (rmax >= 100; the
/// searches use `SEARCH_PROFILE_RMAX`).
pub fn find_lambda_max(sol: &ProfileSolution, tol: f64) -> Result<SearchResult> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::precondition(format!("tolerance {tol:e} must be positive")));
    }
    let mut evals = 0;
    let probe = |lambda: f64, evals: &mut usize| -> Result<BracketProbe> {
        let (zero_count, rmax) = stabilized_count(sol, lambda)?;
        *evals += 1;
        Ok(BracketProbe { alpha: sol.alpha, lambda, zero_count, rmax })
    };
    let mut lo = probe(0.0, &mut evals)?;
    if lo.zero_count == 0 {
        return Err(Error::precondition("profile is spectrally stable at this alpha"));
    }
    let mut hi = loop {
        let lambda = if lo.lambda == 0.0 { 0.1 } else { 2.0 * lo.lambda };
        if lambda > 1e7 {
            return Err(Error::numerical(
                "probe keeps its zeros past shift 1e7; no upper bracket",
            ));
        }
        let p = probe(lambda, &mut evals)?;
        if p.zero_count == 0 {
            break p;
        }
        lo = p;
    };
    while hi.lambda - lo.lambda > tol {
        let mid = 0.5 * (lo.lambda + hi.lambda);
        if mid <= lo.lambda || mid >= hi.lambda {
            break;
        }
        let p = probe(mid, &mut evals)?;
        if p.zero_count >= 1 {
            lo = p;
        } else {
            hi = p;
        }
    }
    Ok(SearchResult {
        n: sol.n,
        target: SearchTarget::LambdaMax,
        value: 0.5 * (lo.lambda + hi.lambda),
        bracket: (lo.lambda, hi.lambda),
        evaluations: evals,
        certificate: (lo, hi),
    })
}

/// Convenience composition: solve (or fetch) the profile at `alpha` with the
/// search defaults and run `find_lambda_max` on it.
pub fn find_lambda_max_at(n: usize, alpha: f64, tol: f64) -> Result<SearchResult> {
    let sol = solve_profile_cached(n, alpha, SEARCH_PROFILE_RMAX, SEARCH_TOL)?;
    find_lambda_max(&sol, tol)
}

/// Strict test of the localization inequality `lambda_max < 1 - n/(2r)`;
/// the radius must lie in the window (n/2, 2n/3) where the right side is a
/// usable gap.
pub fn check_localization_condition(n: usize, r: f64, lambda_max: f64) -> Result<bool> {
    let nf = n as f64;
    if !(r > nf / 2.0 && r < 2.0 * nf / 3.0) {
        return Err(Error::precondition(format!(
            "localization radius r = {r} outside (n/2, 2n/3) = ({}, {})",
            nf / 2.0,
            2.0 * nf / 3.0
        )));
    }
    Ok(lambda_max < 1.0 - nf / (2.0 * r))
}

/// Re-run the two certificate probes with the search defaults and confirm
/// they still bracket: both zero counts reproduce and they differ across
/// the endpoints.
pub fn verify_certificate(result: &SearchResult) -> Result<bool> {
    let recount = |p: &BracketProbe| -> Result<usize> {
        let sol = solve_profile_cached(result.n, p.alpha, SEARCH_PROFILE_RMAX, SEARCH_TOL)?;
        count_unstable_eigenvalues(&sol, p.lambda, p.rmax)
    };
    let (lo, hi) = (&result.certificate.0, &result.certificate.1);
    let (c_lo, c_hi) = (recount(lo)?, recount(hi)?);
    Ok(c_lo == lo.zero_count && c_hi == hi.zero_count && c_lo != c_hi)
}
