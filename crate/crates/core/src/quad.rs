//! Quadrature helpers: composite Simpson on sampled data, trapezoid
//! fallback for non-uniform grids, and an adaptive Simpson for function
//! integrands.

use crate::error::{Error, Result};
use crate::scalar::{real, Real};

/// Returns true when the sample times are uniformly spaced to within a
/// relative slack of 1e-9.
pub fn is_uniform<T: Real>(times: &[T]) -> bool {
    if times.len() < 3 {
        return true;
    }
    let h = times[1] - times[0];
    if h <= T::zero() {
        return false;
    }
    let slack = h * real::<T>(1e-9);
    times.windows(2).all(|w| ((w[1] - w[0]) - h).abs() <= slack)
}

/// Composite Simpson over uniformly spaced samples. Handles an odd number
/// of intervals with a 3/8 tail; a single interval degrades to trapezoid.
/// All weights are non-negative, so non-negative data integrates to a
/// non-negative value.
pub fn integrate_uniform<T: Real>(values: &[T], h: T) -> Result<T> {
    let n = values.len();
    if n < 2 {
        return Err(Error::invalid("values", "need at least two samples"));
    }
    let intervals = n - 1;
    let half = real::<T>(0.5);
    if intervals == 1 {
        return Ok(h * half * (values[0] + values[1]));
    }
    let third = h / real::<T>(3.0);
    let simpson_block = |vals: &[T]| -> T {
        // vals covers an even number of intervals
        let m = vals.len() - 1;
        let mut acc = vals[0] + vals[m];
        let four = real::<T>(4.0);
        let two = real::<T>(2.0);
        for (k, &v) in vals.iter().enumerate().take(m).skip(1) {
            acc = acc + if k % 2 == 1 { four * v } else { two * v };
        }
        third * acc
    };
    if intervals.is_multiple_of(2) {
        return Ok(simpson_block(values));
    }
    // odd: 3/8 rule on the last three intervals
    let eighth = h * real::<T>(3.0) / real::<T>(8.0);
    let tail_start = n - 4;
    let three = real::<T>(3.0);
    let tail = eighth
        * (values[tail_start]
            + three * values[tail_start + 1]
            + three * values[tail_start + 2]
            + values[tail_start + 3]);
    if intervals == 3 {
        return Ok(tail);
    }
    Ok(simpson_block(&values[..=tail_start]) + tail)
}

/// Trapezoid rule on arbitrary strictly increasing sample times.
pub fn trapezoid<T: Real>(times: &[T], values: &[T]) -> Result<T> {
    if times.len() != values.len() {
        return Err(Error::DimensionMismatch {
            left: times.len(),
            right: values.len(),
            context: "trapezoid samples",
        });
    }
    if times.len() < 2 {
        return Err(Error::invalid("times", "need at least two samples"));
    }
    let half = real::<T>(0.5);
    let mut acc = T::zero();
    for k in 1..times.len() {
        acc = acc + half * (times[k] - times[k - 1]) * (values[k] + values[k - 1]);
    }
    Ok(acc)
}

/// Integrates sampled data: Simpson when the grid is uniform, trapezoid
/// otherwise.
pub fn integrate_samples<T: Real>(times: &[T], values: &[T]) -> Result<T> {
    if times.len() != values.len() {
        return Err(Error::DimensionMismatch {
            left: times.len(),
            right: values.len(),
            context: "integration samples",
        });
    }
    if is_uniform(times) {
        integrate_uniform(values, times[1] - times[0])
    } else {
        trapezoid(times, values)
    }
}

/// Adaptive Simpson quadrature of a smooth function on [a, b].
///
/// `tol` is a relative tolerance against a global scale estimated from a
/// coarse scan of ∫|f| over the interval, so regions where the integrand
/// is negligible terminate immediately instead of recursing toward the
/// arithmetic floor.
pub fn adaptive_simpson<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T, tol: T) -> T {
    if a == b {
        return T::zero();
    }
    let half = real::<T>(0.5);
    let six = real::<T>(6.0);
    // coarse L1 scan for the termination scale
    let scans = 32;
    let step = (b - a) / real::<T>(scans as f64);
    let mut l1 = T::zero();
    for k in 0..=scans {
        l1 = l1 + f(a + step * real::<T>(k as f64)).abs();
    }
    l1 = l1 * step.abs();
    let floor = T::min_positive_value().sqrt();
    let abs_tol = (tol * l1).abs().max(floor);
    let m = (a + b) * half;
    let fa = f(a);
    let fm = f(m);
    let fb = f(b);
    let whole = (b - a) / six * (fa + real::<T>(4.0) * fm + fb);
    adaptive_step(f, a, b, fa, fm, fb, whole, abs_tol, 40)
}

#[allow(clippy::too_many_arguments)]
fn adaptive_step<T: Real, F: Fn(T) -> T>(
    f: &F,
    a: T,
    b: T,
    fa: T,
    fm: T,
    fb: T,
    whole: T,
    abs_tol: T,
    depth: usize,
) -> T {
    let half = real::<T>(0.5);
    let six = real::<T>(6.0);
    let four = real::<T>(4.0);
    let m = (a + b) * half;
    let lm = (a + m) * half;
    let rm = (m + b) * half;
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / six * (fa + four * flm + fm);
    let right = (b - m) / six * (fm + four * frm + fb);
    let delta = left + right - whole;
    let fifteen = real::<T>(15.0);
    if depth == 0 || delta.abs() <= fifteen * abs_tol {
        return left + right + delta / fifteen;
    }
    let sub_tol = abs_tol * half;
    adaptive_step(f, a, m, fa, flm, fm, left, sub_tol, depth - 1)
        + adaptive_step(f, m, b, fm, frm, fb, right, sub_tol, depth - 1)
}

/// Cumulative trapezoid of sampled data; output[0] = 0.
pub fn cumulative_trapezoid<T: Real>(times: &[T], values: &[T]) -> Result<Vec<T>> {
    if times.len() != values.len() {
        return Err(Error::DimensionMismatch {
            left: times.len(),
            right: values.len(),
            context: "cumulative trapezoid",
        });
    }
    let half = real::<T>(0.5);
    let mut out = Vec::with_capacity(times.len());
    let mut acc = T::zero();
    out.push(T::zero());
    for k in 1..times.len() {
        acc = acc + half * (times[k] - times[k - 1]) * (values[k] + values[k - 1]);
        out.push(acc);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|k| a + (b - a) * (k as f64) / ((n - 1) as f64))
            .collect()
    }

    #[test]
    fn simpson_exact_on_cubics() {
        // Simpson integrates cubics exactly: int_0^2 x^3 = 4
        let times = linspace(0.0, 2.0, 9);
        let vals: Vec<f64> = times.iter().map(|&t| t * t * t).collect();
        let got = integrate_samples(&times, &vals).unwrap();
        assert!((got - 4.0).abs() < 1e-13);
    }

    #[test]
    fn simpson_odd_interval_count() {
        // 7 intervals forces the 3/8 tail; cubic stays exact
        let times = linspace(0.0, 2.0, 8);
        let vals: Vec<f64> = times.iter().map(|&t| t * t * t).collect();
        let got = integrate_samples(&times, &vals).unwrap();
        assert!((got - 4.0).abs() < 1e-13);
    }

    #[test]
    fn simpson_triple_interval_pure_three_eighth() {
        let times = linspace(0.0, 3.0, 4);
        let vals: Vec<f64> = times.iter().map(|&t| t * t * t).collect();
        let got = integrate_samples(&times, &vals).unwrap();
        assert!((got - 81.0 / 4.0).abs() < 1e-12);
    }

    #[test]
    fn sine_convergence_fourth_order() {
        // halving h must shrink the Simpson error by about 16
        let exact = 1.0 - (1.0f64).cos();
        let err = |n: usize| {
            let times = linspace(0.0, 1.0, n);
            let vals: Vec<f64> = times.iter().map(|&t| t.sin()).collect();
            (integrate_samples(&times, &vals).unwrap() - exact).abs()
        };
        let e1 = err(33);
        let e2 = err(65);
        let order = (e1 / e2).log2();
        assert!(order > 3.5 && order < 4.5, "observed order {order}");
    }

    #[test]
    fn trapezoid_fallback_on_nonuniform() {
        let times = vec![0.0, 0.1, 0.35, 0.7, 1.0];
        let vals: Vec<f64> = times.iter().map(|&t| 2.0 * t).collect();
        // linear data: trapezoid exact
        let got = integrate_samples(&times, &vals).unwrap();
        assert!((got - 1.0).abs() < 1e-14);
    }

    #[test]
    fn nonneg_data_nonneg_integral() {
        let times = linspace(0.0, 1.0, 10); // 9 intervals, odd
        let vals = vec![0.0, 1.0, 0.0, 2.0, 0.0, 3.0, 0.0, 1.0, 0.0, 5.0];
        assert!(integrate_samples(&times, &vals).unwrap() >= 0.0);
    }

    #[test]
    fn adaptive_matches_closed_forms() {
        let f = |x: f64| (-x * x).exp();
        // int_0^3 exp(-x^2) = sqrt(pi)/2 erf(3)
        let exact = (std::f64::consts::PI).sqrt() / 2.0 * libm::erf(3.0);
        let got = adaptive_simpson(&f, 0.0, 3.0, 1e-10);
        assert!((got - exact).abs() < 1e-9, "got {got} exact {exact}");
        let g = |x: f64| 1.0 / (1.0 + x * x);
        let got2 = adaptive_simpson(&g, 0.0, 1.0, 1e-10);
        assert!((got2 - std::f64::consts::FRAC_PI_4).abs() < 1e-9);
    }

    #[test]
    fn cumulative_trapezoid_endpoints() {
        let times = linspace(0.0, 1.0, 101);
        let vals: Vec<f64> = times.iter().map(|&t| 3.0 * t * t).collect();
        let cum = cumulative_trapezoid(&times, &vals).unwrap();
        assert_eq!(cum[0], 0.0);
        assert!((cum[100] - 1.0).abs() < 1e-3);
        // monotone for nonneg integrand
        assert!(cum.windows(2).all(|w| w[1] >= w[0]));
    }
}
