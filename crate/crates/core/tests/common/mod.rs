//! Independent oracles shared by the integration suites.
#![allow(dead_code)]

use epd_hodograph::epd::CoeffTable;
use epd_hodograph::{Hierarchy, RiemannPoint, TimeVector};
use num_rational::BigRational;

/// Coefficients of `(1 - β1 w)^e (1 - β2 w)^e` up to `w^order`, by
/// convolving two binomial series.
pub fn binomial_product(e: f64, beta1: f64, beta2: f64, order: usize) -> Vec<f64> {
    let single = |beta: f64| {
        let mut c = vec![1.0; order + 1];
        for j in 1..=order {
            c[j] = c[j - 1] * (e - (j as f64 - 1.0)) / j as f64 * (-beta);
        }
        c
    };
    let (p, q) = (single(beta1), single(beta2));
    (0..=order).map(|k| (0..=k).map(|j| p[j] * q[k - j]).sum()).collect()
}

/// `h(λ)` as the polynomial part of `Σ t_n λ^{s_n - 1} G(1/λ)`, with
/// `G(w) = ((1 - β1 w)(1 - β2 w))^{-ε}`; ascending coefficients.
pub fn h_oracle(t: &TimeVector, beta1: f64, beta2: f64) -> Vec<f64> {
    let hier = t.hierarchy();
    let top = hier.series_index(t.top());
    let g = binomial_product(-hier.eps_f64(), beta1, beta2, top);
    let mut h = vec![0.0; top.max(1)];
    for (n, v) in t.slots() {
        let s = hier.series_index(n);
        for (k, gk) in g.iter().enumerate().take(s) {
            h[s - 1 - k] += v * gk;
        }
    }
    h
}

pub fn eval_poly(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// Central difference of order `k ≤ 4`, error `O(h²)`.
pub fn central_diff<F: Fn(f64) -> f64>(f: F, x: f64, h: f64, k: usize) -> f64 {
    match k {
        1 => (f(x + h) - f(x - h)) / (2.0 * h),
        2 => (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h),
        3 => (f(x + 2.0 * h) - 2.0 * f(x + h) + 2.0 * f(x - h) - f(x - 2.0 * h)) / (2.0 * h.powi(3)),
        4 => (f(x + 2.0 * h) - 4.0 * f(x + h) + 6.0 * f(x) - 4.0 * f(x - h) + f(x - 2.0 * h)) / h.powi(4),
        _ => panic!("central_diff supports k <= 4"),
    }
}

/// Benney times for which `h(λ) = c (λ - β1)^{n1+1} (λ - β2)^{n2+1}`, so that
/// `(β1, β2)` is a point of class `(n1, n2)`. Read off as the coefficients of
/// the polynomial part of `h(λ) √((λ - β1)(λ - β2))`.
pub fn benney_times_for_class(beta1: f64, beta2: f64, n1: u32, n2: u32, c: f64) -> TimeVector {
    let mut h = vec![c];
    for (root, mult) in [(beta1, n1 + 1), (beta2, n2 + 1)] {
        for _ in 0..mult {
            let mut next = vec![0.0; h.len() + 1];
            for (k, hk) in h.iter().enumerate() {
                next[k + 1] += hk;
                next[k] -= root * hk;
            }
            h = next;
        }
    }
    let deg = h.len() - 1;
    // √((λ-β1)(λ-β2)) = λ Σ g_k λ^{-k}
    let g = binomial_product(0.5, beta1, beta2, deg + 1);
    let mut times = vec![0.0; deg + 1];
    for (m, hm) in h.iter().enumerate() {
        for (k, gk) in g.iter().enumerate().take(m + 2) {
            let power = m + 1 - k;
            if power >= 1 {
                times[power - 1] += hm * gk;
            }
        }
    }
    TimeVector::new(Hierarchy::Benney, times).unwrap()
}

/// Benney cubic case `t = (x, t2, t3)`: eliminating `s = β1 + β2 = -2 t2 / (3 t3)`.
pub fn cubic_closed_form(x: f64, t2: f64, t3: f64) -> Option<(f64, f64)> {
    let a = -t2 / (3.0 * t3);
    let b = (2.0 / 3.0) * (x + t2 * a + 1.5 * t3 * a * a) / t3;
    let disc = a * a - b;
    (disc > 0.0).then(|| (a + disc.sqrt(), a - disc.sqrt()))
}

/// `x` placing the cubic solution at a prescribed pair.
pub fn cubic_x_for(beta1: f64, beta2: f64, t3: f64) -> (f64, f64) {
    let a = (beta1 + beta2) / 2.0;
    let b = beta1 * beta2;
    let t2 = -3.0 * t3 * a;
    let x = 1.5 * t3 * b - t2 * a - 1.5 * t3 * a * a;
    (x, t2)
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

/// `C_k` from the recurrence, for cross-checks against `binomial_product`.
pub fn recurrence_coeffs(eps: &BigRational, p: &RiemannPoint, order: usize) -> Vec<f64> {
    let table = CoeffTable::at_point(eps, p, order);
    (0..=order).map(|k| table.float(k).unwrap()).collect()
}
