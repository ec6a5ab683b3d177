//! Quadrature helpers: composite Simpson on uniform grids and a small
//! adaptive Simpson for momentum-space averages.

use num_complex::Complex64;

/// Composite Simpson for uniformly spaced samples with step `h`.
///
/// Prefers an odd number of samples; a trailing trapezoid handles the last
/// interval otherwise.
pub fn simpson_uniform(h: f64, values: &[f64]) -> f64 {
    let n = values.len();
    assert!(n >= 3, "need at least 3 samples");
    let odd_len = if n % 2 == 1 { n } else { n - 1 };
    let mut s = values[0] + values[odd_len - 1];
    for (j, v) in values.iter().enumerate().take(odd_len - 1).skip(1) {
        s += if j % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    let mut total = s * h / 3.0;
    if odd_len != n {
        total += 0.5 * h * (values[n - 2] + values[n - 1]);
    }
    total
}

pub fn simpson_uniform_complex(h: f64, values: &[Complex64]) -> Complex64 {
    let re: Vec<f64> = values.iter().map(|z| z.re).collect();
    let im: Vec<f64> = values.iter().map(|z| z.im).collect();
    Complex64::new(simpson_uniform(h, &re), simpson_uniform(h, &im))
}

/// Adaptive Simpson to absolute tolerance `tol` on [a, b].
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson_rule(a, b, fa, fm, fb);
    adaptive_step(f, a, b, fa, fm, fb, whole, tol, 40)
}

fn simpson_rule(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adaptive_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson_rule(a, m, fa, flm, fm);
    let right = simpson_rule(m, b, fm, frm, fb);
    let err = left + right - whole;
    if depth == 0 || err.abs() <= 15.0 * tol {
        left + right + err / 15.0
    } else {
        adaptive_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + adaptive_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}
