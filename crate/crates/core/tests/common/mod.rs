#![allow(dead_code)]

use std::io::Write;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// Tensor Gauss-Legendre rule for `f` on `[x0, x1] x [y0, y1]`.
pub fn integrate_box<F: Fn(f64, f64) -> f64>(
    f: &F,
    rule: &[(f64, f64)],
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
) -> f64 {
    if x1 <= x0 || y1 <= y0 {
        return 0.0;
    }
    let (hx, hy) = (0.5 * (x1 - x0), 0.5 * (y1 - y0));
    let (cx, cy) = (0.5 * (x1 + x0), 0.5 * (y1 + y0));
    let mut total = 0.0;
    for &(u, wu) in rule {
        for &(v, wv) in rule {
            total += wu * wv * f(cx + hx * u, cy + hy * v);
        }
    }
    total * hx * hy
}

/// Integral of `f` over `[0, 1]^2 ∩ [xa, xb] x [ya, yb]`, with one rule per
/// cell of the sixths grid so piecewise-smooth integrands are smooth per cell.
pub fn integrate_sixths<F: Fn(f64, f64) -> f64>(
    f: &F,
    rule: &[(f64, f64)],
    xa: f64,
    xb: f64,
    ya: f64,
    yb: f64,
) -> f64 {
    let mut total = 0.0;
    for i in 0..6 {
        for j in 0..6 {
            let (x0, x1) = ((i as f64 / 6.0).max(xa), ((i + 1) as f64 / 6.0).min(xb));
            let (y0, y1) = ((j as f64 / 6.0).max(ya), ((j + 1) as f64 / 6.0).min(yb));
            total += integrate_box(f, rule, x0, x1, y0, y1);
        }
    }
    total
}

/// `a = 2 ln(27/16)`.
pub fn a() -> f64 {
    2.0 * (27.0f64 / 16.0).ln()
}

/// Prints one acceptance line, bypassing the test harness's output capture.
pub fn report(id: u32, title: &str, detail: &str, pass: bool) {
    let line = format!(
        "criterion {id:>2} [{}] {title}: {detail}\n",
        if pass { "PASS" } else { "FAIL" }
    );
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
}
