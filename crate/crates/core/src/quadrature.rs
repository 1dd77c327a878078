//! Gauss–Legendre rules and the composite / adaptive drivers built on them.

use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{CloakError, Result};

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`,
/// nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n
        let mut x = ((4 * i + 3) as f64 * std::f64::consts::PI / (4.0 * nf + 2.0)).cos()
            * (1.0 - (nf - 1.0) / (8.0 * nf * nf * nf));
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = nf * (x * pn - pm) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn gl16() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(16))
}

/// 16-point rule on `[a, b]`.
pub fn gl16_panel<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> Complex64 {
    let (nodes, weights) = gl16();
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    let mut acc = Complex64::new(0.0, 0.0);
    for (x, w) in nodes.iter().zip(weights) {
        acc += f(mid + half * x) * *w;
    }
    acc * half
}

/// Sum of [`gl16_panel`] over `panels` equal sub-intervals.
pub fn composite<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64, panels: usize) -> Complex64 {
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|k| gl16_panel(f, a + k as f64 * h, if k + 1 == panels { b } else { a + (k + 1) as f64 * h }))
        .sum()
}

/// Composite rule over consecutive breakpoints, doubling the panel count on
/// every segment until two successive totals agree to
/// `tol · max(|I|, floor)`. `initial_width` fixes the starting panel size.
pub fn composite_doubling<F: Fn(f64) -> Complex64>(
    f: &F,
    breaks: &[f64],
    initial_width: f64,
    tol: f64,
    floor: f64,
) -> Result<Complex64> {
    let mut panels: Vec<usize> = breaks
        .windows(2)
        .map(|w| (((w[1] - w[0]) / initial_width).ceil() as usize).max(1))
        .collect();
    let eval = |panels: &[usize]| -> Complex64 {
        breaks
            .windows(2)
            .zip(panels)
            .map(|(w, &p)| composite(f, w[0], w[1], p))
            .sum()
    };
    let mut prev = eval(&panels);
    let mut change = f64::INFINITY;
    for _ in 0..12 {
        panels.iter_mut().for_each(|p| *p *= 2);
        let next = eval(&panels);
        change = (next - prev).norm();
        if change <= tol * next.norm().max(floor) {
            return Ok(next);
        }
        prev = next;
    }
    Err(CloakError::Accuracy {
        requested: tol,
        achieved: change / prev.norm().max(floor),
    })
}

/// Adaptive bisection: accept a panel when its 16-point value agrees with
/// the sum over its two halves.
pub fn adaptive<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64, tol: f64, floor: f64) -> Result<Complex64> {
    let whole = gl16_panel(f, a, b);
    let scale = whole.norm().max(floor);
    let mut worst = 0.0f64;
    let out = adaptive_rec(f, a, b, whole, tol * scale, 1e-15 * scale, 0, &mut worst);
    if worst > 0.0 {
        return Err(CloakError::Accuracy {
            requested: tol,
            achieved: worst / scale,
        });
    }
    Ok(out)
}

fn adaptive_rec<F: Fn(f64) -> Complex64>(
    f: &F,
    a: f64,
    b: f64,
    whole: Complex64,
    abs_tol: f64,
    min_tol: f64,
    depth: u32,
    worst: &mut f64,
) -> Complex64 {
    let m = 0.5 * (a + b);
    let (l, r) = (gl16_panel(f, a, m), gl16_panel(f, m, b));
    let diff = (l + r - whole).norm();
    if diff <= abs_tol.max(min_tol) {
        return l + r;
    }
    if depth >= 40 {
        *worst = worst.max(diff);
        return l + r;
    }
    adaptive_rec(f, a, m, l, 0.5 * abs_tol, min_tol, depth + 1, worst)
        + adaptive_rec(f, m, b, r, 0.5 * abs_tol, min_tol, depth + 1, worst)
}
