#![allow(dead_code)]

use std::f64::consts::PI;

/// Composite Simpson rule on `n` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + h * i as f64);
    }
    s * h / 3.0
}

/// `p_ℓ` from the derivative definition: `(-1)^ℓ e^{x²/2} dℓ/dxℓ e^{-x²/2}`,
/// expanded as the explicit sum `ℓ! Σ_m (-1)^m x^{ℓ-2m} / (m! (ℓ-2m)! 2^m)`.
pub fn hermite_explicit(ell: usize, x: f64) -> f64 {
    let fact = |n: usize| (1..=n).map(|k| k as f64).product::<f64>();
    (0..=ell / 2)
        .map(|m| {
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            sign * fact(ell) / (fact(m) * fact(ell - 2 * m) * 2f64.powi(m as i32)) * x.powi((ell - 2 * m) as i32)
        })
        .sum()
}

/// Normalizing constant by brute-force Simpson quadrature.
pub fn norm_oracle(ell: usize) -> f64 {
    1.0 / simpson(|x| hermite_explicit(ell, x).powi(2) * (-0.5 * x * x).exp(), -30.0, 30.0, 200_000)
}

pub fn gauss_density(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// `∫|F_Q - F_P|` by the trapezoid rule on a uniform grid of `m` points over
/// `[lo, hi]`, merged with the sample points so `F_Q` is constant on every cell.
pub fn trapezoid_w1(points: &[f64], density: impl Fn(f64) -> f64, lo: f64, hi: f64, m: usize) -> f64 {
    let mut grid: Vec<f64> = (0..m).map(|i| lo + (hi - lo) * i as f64 / (m - 1) as f64).collect();
    grid.extend_from_slice(points);
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = points.len() as f64;
    let mut fp = 0.0;
    let mut total = 0.0;
    let mut prev_d = density(grid[0]);
    for w in grid.windows(2) {
        let h = w[1] - w[0];
        if h == 0.0 {
            continue;
        }
        let d = density(w[1]);
        let fp_next = fp + 0.5 * h * (prev_d + d);
        let mid = 0.5 * (w[0] + w[1]);
        let fq = points.partition_point(|&x| x <= mid) as f64 / n;
        total += 0.5 * h * ((fq - fp).abs() + (fq - fp_next).abs());
        fp = fp_next;
        prev_d = d;
    }
    total
}
