//! Bessel functions, spherical Bessel functions and bracketed root finding.
//!
//! Cylindrical J0, J1, Y0, Y1 come from `libm` (the msun implementations).

use std::f64::consts::PI;

pub fn bessel_j0(x: f64) -> f64 {
    libm::j0(x)
}

pub fn bessel_j1(x: f64) -> f64 {
    libm::j1(x)
}

pub fn bessel_y0(x: f64) -> f64 {
    libm::y0(x)
}

pub fn bessel_y1(x: f64) -> f64 {
    libm::y1(x)
}

/// (2l+1)!! = 1 * 3 * 5 * ... * (2l+1); the empty product for l = -1 is 1.
pub fn double_factorial_odd(l: i32) -> f64 {
    (0..=l).map(|k| (2 * k + 1) as f64).product()
}

/// Spherical Bessel function of the first kind j_l(x), x > 0.
pub fn spherical_j(l: u32, x: f64) -> f64 {
    let lf = l as f64;
    if x < lf + 0.5 {
        // Power series; upward recurrence is unstable for x < l.
        let x2 = -0.5 * x * x;
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..60 {
            term *= x2 / (k as f64 * (2.0 * lf + 2.0 * k as f64 + 1.0));
            sum += term;
            if term.abs() < 1e-17 * sum.abs() {
                break;
            }
        }
        return x.powi(l as i32) / double_factorial_odd(l as i32) * sum;
    }
    let j0 = x.sin() / x;
    if l == 0 {
        return j0;
    }
    let j1 = x.sin() / (x * x) - x.cos() / x;
    let (mut a, mut b) = (j0, j1);
    for n in 1..l {
        let c = (2.0 * n as f64 + 1.0) / x * b - a;
        a = b;
        b = c;
    }
    b
}

/// Spherical Bessel function of the second kind y_l(x), x > 0.
pub fn spherical_y(l: u32, x: f64) -> f64 {
    let y0 = -x.cos() / x;
    if l == 0 {
        return y0;
    }
    let y1 = -x.cos() / (x * x) - x.sin() / x;
    let (mut a, mut b) = (y0, y1);
    for n in 1..l {
        let c = (2.0 * n as f64 + 1.0) / x * b - a;
        a = b;
        b = c;
    }
    b
}

/// Root of `f` in `[a, b]` given a sign change, by the Illinois variant of
/// regula falsi with a bisection safeguard. Returns `None` without a sign
/// change.
pub fn bracketed_root<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, xtol: f64) -> Option<f64> {
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Some(a);
    }
    if fb == 0.0 {
        return Some(b);
    }
    if fa.signum() == fb.signum() {
        return None;
    }
    let mut side = 0i8;
    for _ in 0..200 {
        let mut x = (a * fb - b * fa) / (fb - fa);
        // Keep the iterate strictly inside and fall back to bisection when the
        // secant step stalls near an end.
        let w = b - a;
        if !(x > a + 0.01 * w && x < b - 0.01 * w) {
            x = 0.5 * (a + b);
        }
        let fx = f(x);
        if fx == 0.0 {
            return Some(x);
        }
        if fx.signum() == fb.signum() {
            b = x;
            fb = fx;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = x;
            fa = fx;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
        if (b - a).abs() <= xtol * (a.abs() + b.abs()).max(f64::MIN_POSITIVE) {
            break;
        }
    }
    Some(0.5 * (a + b))
}

/// All roots of `f` in `(lo, hi]`, found by scanning with step `step` for
/// sign changes and refining each bracket.
pub fn scan_roots<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, step: f64, xtol: f64) -> Vec<f64> {
    let mut roots = Vec::new();
    if !(hi > lo) || !(step > 0.0) {
        return roots;
    }
    let n = ((hi - lo) / step).ceil() as usize;
    let mut a = lo;
    let mut fa = f(a);
    for i in 1..=n {
        let b = (lo + i as f64 * step).min(hi);
        let fb = f(b);
        if fa.signum() != fb.signum() || fb == 0.0 {
            if let Some(r) = bracketed_root(&f, a, b, xtol) {
                if r > lo {
                    roots.push(r);
                }
            }
        }
        a = b;
        fa = fb;
    }
    roots.dedup_by(|x, y| (*x - *y).abs() <= 4.0 * xtol * x.abs());
    roots
}

/// The first `count` positive zeros of J0.
pub fn j0_zeros(count: usize) -> Vec<f64> {
    (1..=count)
        .map(|s| {
            // McMahon: the s-th zero lies within 0.1 of (s - 1/4) pi.
            let guess = (s as f64 - 0.25) * PI;
            bracketed_root(bessel_j0, guess - 0.3, guess + 0.3, 1e-15)
                .expect("J0 zero bracket")
        })
        .collect()
}
