//! Small numeric kernels: grids, adaptive quadrature, derivative-free
//! one-dimensional maximization.

use crate::error::{SolveError, SolveResult};
use crate::scalar::Real;

/// `n` evenly spaced points covering `[lo, hi]` inclusive.
pub fn linspace<T: Real>(lo: T, hi: T, n: usize) -> Vec<T> {
    assert!(n >= 2, "linspace needs at least two points");
    let step = (hi - lo) / T::from_usize_c(n - 1);
    let mut xs: Vec<T> = (0..n).map(|i| lo + step * T::from_usize_c(i)).collect();
    // pin the endpoint; accumulated rounding must not push it past hi
    xs[n - 1] = hi;
    xs
}

fn simpson<T: Real, F: Fn(T) -> T>(f: &F, a: T, fa: T, b: T, fb: T) -> (T, T, T) {
    let m = (a + b) / T::c(2.0);
    let fm = f(m);
    let est = (b - a) / T::c(6.0) * (fa + T::c(4.0) * fm + fb);
    (m, fm, est)
}

fn adaptive_step<T: Real, F: Fn(T) -> T>(
    f: &F,
    a: T,
    fa: T,
    b: T,
    fb: T,
    m: T,
    fm: T,
    whole: T,
    tol: T,
    depth: u32,
) -> Result<T, T> {
    let (lm, flm, left) = simpson(f, a, fa, m, fm);
    let (rm, frm, right) = simpson(f, m, fm, b, fb);
    let delta = left + right - whole;
    if delta.abs() <= T::c(15.0) * tol {
        return Ok(left + right + delta / T::c(15.0));
    }
    if depth == 0 {
        // give back the refined estimate along with the residual
        return Err(delta.abs());
    }
    let half = tol / T::c(2.0);
    let l = adaptive_step(f, a, fa, m, fm, lm, flm, left, half, depth - 1);
    let r = adaptive_step(f, m, fm, b, fb, rm, frm, right, half, depth - 1);
    match (l, r) {
        (Ok(x), Ok(y)) => Ok(x + y),
        (Err(e), _) | (_, Err(e)) => Err(e),
    }
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance
/// `tol`. Returns a `QuadratureFailure` carrying the residual if the
/// refinement depth is exhausted first.
pub fn adaptive_simpson<T: Real, F: Fn(T) -> T>(f: F, a: T, b: T, tol: T) -> SolveResult<T> {
    if a == b {
        return Ok(T::zero());
    }
    let fa = f(a);
    let fb = f(b);
    let (m, fm, whole) = simpson(&f, a, fa, b, fb);
    adaptive_step(&f, a, fa, b, fb, m, fm, whole, tol, 40).map_err(|residual| {
        SolveError::QuadratureFailure {
            residual: residual.to_f64_lossy(),
            tolerance: tol.to_f64_lossy(),
        }
    })
}

/// Golden-section maximization of a unimodal `f` on `[lo, hi]`.
/// Returns `(argmax, max)` to within `tol` in the argument.
pub fn golden_section_max<T: Real, F: Fn(T) -> T>(f: F, lo: T, hi: T, tol: T) -> (T, T) {
    let inv_phi = (T::c(5.0).sqrt() - T::one()) / T::c(2.0);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = (a + b) / T::c(2.0);
    (x, f(x))
}

/// Index of the largest value, lowest index on ties.
pub fn argmax<T: Real>(values: &[T]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}
