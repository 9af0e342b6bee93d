//! Bracketed scalar root finding: secant steps guarded by bisection.

use crate::error::{Error, Result};

pub const MAX_ITERATIONS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub f: f64,
    pub iterations: usize,
}

/// Finds `x` in `[lo, hi]` with `|f(x)| <= f_tol` or a bracket narrower than `x_tol`.
///
/// Each iteration tries the secant (regula falsi, Illinois-weighted) point and falls back
/// to bisection when it would leave the middle 90% of the bracket or after a step that
/// failed to halve it.
pub fn find_root<F>(mut f: F, lo: f64, hi: f64, x_tol: f64, f_tol: f64) -> Result<Root>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    if fa.abs() <= f_tol {
        return Ok(Root { x: a, f: fa, iterations: 0 });
    }
    if fb.abs() <= f_tol {
        return Ok(Root { x: b, f: fb, iterations: 0 });
    }
    if fa.signum() == fb.signum() || fa.is_nan() || fb.is_nan() {
        return Err(Error::NoSignChange { lo: a, hi: b, f_lo: fa, f_hi: fb });
    }
    let mut side = 0i8;
    let mut last_width = b - a;
    let mut slow = false;
    let mut best = if fa.abs() < fb.abs() { (a, fa) } else { (b, fb) };
    for it in 1..=MAX_ITERATIONS {
        let width = b - a;
        let mut x = (a * fb - b * fa) / (fb - fa);
        if slow || !(x > a + 0.05 * width && x < b - 0.05 * width) {
            x = 0.5 * (a + b);
        }
        let fx = f(x)?;
        if fx.abs() < best.1.abs() {
            best = (x, fx);
        }
        if fx.abs() <= f_tol {
            return Ok(Root { x, f: fx, iterations: it });
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        } else {
            b = x;
            fb = fx;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
        // force a bisection whenever a step fails to halve the bracket
        slow = (b - a) > 0.5 * last_width;
        last_width = b - a;
        if (b - a).abs() <= x_tol {
            return Ok(Root { x: best.0, f: best.1, iterations: it });
        }
    }
    Err(Error::RootNotConverged { iterations: MAX_ITERATIONS, best: best.1.abs() })
}

/// First sign change of `f` on a uniform grid of `samples` points over `[lo, hi]`,
/// refined with [`find_root`].
pub fn first_crossing<F>(mut f: F, lo: f64, hi: f64, samples: usize, x_tol: f64) -> Result<Option<Root>>
where
    F: FnMut(f64) -> Result<f64>,
{
    let samples = samples.max(2);
    let step = (hi - lo) / (samples - 1) as f64;
    let mut prev = (lo, f(lo)?);
    for k in 1..samples {
        let x = lo + step * k as f64;
        let fx = f(x)?;
        if fx == 0.0 || fx.signum() != prev.1.signum() {
            return find_root(&mut f, prev.0, x, x_tol, 0.0).map(Some);
        }
        prev = (x, fx);
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_root() {
        let r = find_root(|x| Ok(x * x * x - 2.0), 0.0, 3.0, 1e-14, 0.0).unwrap();
        assert!((r.x - 2f64.cbrt()).abs() < 1e-12);
        assert!(r.iterations <= MAX_ITERATIONS);
    }

    #[test]
    fn flat_function_converges_by_bracket() {
        // very flat near the root: secant steps stall, bisection finishes
        let r = find_root(|x: f64| Ok((x - 0.3).powi(9)), -1.0, 2.0, 1e-10, 0.0).unwrap();
        assert!((r.x - 0.3).abs() < 1e-3);
    }

    #[test]
    fn no_sign_change() {
        let e = find_root(|x| Ok(x * x + 1.0), -1.0, 1.0, 1e-12, 0.0).unwrap_err();
        assert!(matches!(e, Error::NoSignChange { .. }));
    }

    #[test]
    fn reversed_bracket_and_endpoint_root() {
        let r = find_root(|x| Ok(x - 1.0), 1.0, -3.0, 1e-12, 0.0).unwrap();
        assert_eq!(r.x, 1.0);
        assert_eq!(r.iterations, 0);
    }

    #[test]
    fn crossing_on_grid() {
        let r = first_crossing(|x: f64| Ok(x.cos()), 0.0, 10.0, 50, 1e-13).unwrap().unwrap();
        assert!((r.x - std::f64::consts::FRAC_PI_2).abs() < 1e-10);
        assert!(first_crossing(|_| Ok(1.0), 0.0, 1.0, 10, 1e-6).unwrap().is_none());
    }
}
