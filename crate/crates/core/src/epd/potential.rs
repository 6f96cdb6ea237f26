//! Evaluation of `W`, the polynomial `h(λ)` and the derivative tower of `W`.
//!
//! Write `G(λ) = V(λ) λ^m ((λ-β1)(λ-β2))^{-ε}` so that `W = [λ^{-1}] G` at
//! infinity, and `h = G_⊕`. Differentiating under the residue gives
//!
//! ```text
//! ∂^i_{β1} ∂^j_{β2} W = (ε)_i (ε)_j Σ_{β = β1, β2} Res_β h(λ) / ((λ-β1)^i (λ-β2)^j)
//! ```
//!
//! for `i + j ≥ 1`, because the negative part of `G` contributes nothing to
//! the residue at infinity once divided by at least one power of `λ - β`.
//! Both residues are read off from Taylor coefficients of `h` at `β1` and `β2`.

use num_complex::Complex64;
use num_rational::BigRational;
use serde::Serialize;

use super::series::{float_coeffs, CoeffTable};
use super::{Hierarchy, RiemannPoint, TimeVector};
use crate::error::{Error, Result};
use crate::poly::Poly2;

/// Extra series terms carried beyond the top time slot by default.
pub const DEFAULT_EXTRA_ORDER: usize = 6;

/// `h(λ) = (V(λ) λ^m ((λ-β1)(λ-β2))^{-ε})_⊕`, ascending coefficients.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HPolynomial {
    pub coeffs: Vec<f64>,
    /// Order of the series table the coefficients were built from.
    pub order: usize,
}

impl HPolynomial {
    pub fn degree(&self) -> usize {
        self.coeffs.iter().rposition(|c| *c != 0.0).unwrap_or(0)
    }

    pub fn eval(&self, lambda: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, c| acc * lambda + *c)
    }

    pub fn eval_real(&self, lambda: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * lambda + c)
    }

    /// Taylor coefficients `h^{(r)}(p)/r!`, `r = 0..=deg`.
    pub fn taylor_at(&self, p: Complex64) -> Vec<Complex64> {
        taylor_shift(&self.coeffs, p)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }
}

/// Coefficients of `q(x) = h(x + p)` (ascending), by repeated synthetic division.
pub fn taylor_shift(coeffs: &[f64], p: Complex64) -> Vec<Complex64> {
    let mut a: Vec<Complex64> = coeffs.iter().map(|c| Complex64::new(*c, 0.0)).collect();
    if a.is_empty() {
        return vec![Complex64::new(0.0, 0.0)];
    }
    let n = a.len() - 1;
    for i in 0..n {
        for j in (i..n).rev() {
            let carry = p * a[j + 1];
            a[j] += carry;
        }
    }
    a
}

/// Rising factorial `(ε)_k`.
pub fn pochhammer(eps: f64, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (eps + j as f64))
}

/// `binom(p + m - 1, m)`, the magnitude of `[z^m] (1 + z)^{-p}`; `[m == 0]` when `p = 0`.
fn inverse_power_coeff(p: usize, m: usize) -> f64 {
    if p == 0 {
        return if m == 0 { 1.0 } else { 0.0 };
    }
    (0..m).fold(1.0, |acc, k| acc * (p + k) as f64 / (k + 1) as f64)
}

fn required_order(t: &TimeVector) -> usize {
    t.hierarchy().series_index(t.top())
}

fn resolve_order(t: &TimeVector, order: Option<usize>) -> Result<usize> {
    let need = required_order(t);
    match order {
        None => Ok(t.top() + DEFAULT_EXTRA_ORDER),
        Some(k) if k < need => Err(Error::TruncationExceeded {
            requested: need,
            available: k,
        }),
        Some(k) => Ok(k),
    }
}

fn h_from_table(t: &TimeVector, c: &[f64], order: usize) -> HPolynomial {
    let hier = t.hierarchy();
    let deg = hier.series_index(t.top()).saturating_sub(1);
    let mut coeffs = vec![0.0; deg + 1];
    for (n, v) in t.slots() {
        if v == 0.0 {
            continue;
        }
        let s = hier.series_index(n);
        // λ^{s-1-k} C_k for k = 0..=s-1
        for k in 0..s {
            coeffs[s - 1 - k] += v * c[k];
        }
    }
    HPolynomial { coeffs, order }
}

fn w_from_table(t: &TimeVector, c: &[f64]) -> f64 {
    let hier = t.hierarchy();
    t.slots()
        .map(|(n, v)| if v == 0.0 { 0.0 } else { v * c[hier.series_index(n)] })
        .sum()
}

/// `W`, `h` and the Taylor data of `h` at both invariants, for one `(t, β)`.
#[derive(Clone, Debug)]
pub struct Potential {
    hierarchy: Hierarchy,
    eps: f64,
    point: RiemannPoint,
    coeffs: Vec<f64>,
    h: HPolynomial,
    value: f64,
    taylor: [Vec<Complex64>; 2],
}

impl Potential {
    pub fn new(t: &TimeVector, p: &RiemannPoint) -> Result<Self> {
        Self::with_order(t, p, None)
    }

    pub fn with_order(t: &TimeVector, p: &RiemannPoint, order: Option<usize>) -> Result<Self> {
        let order = resolve_order(t, order)?;
        let eps = t.hierarchy().eps_f64();
        let coeffs = float_coeffs(eps, p.a(), p.b(), order);
        Ok(Self::assemble(t, *p, eps, coeffs))
    }

    fn assemble(t: &TimeVector, point: RiemannPoint, eps: f64, coeffs: Vec<f64>) -> Self {
        let order = coeffs.len() - 1;
        let h = h_from_table(t, &coeffs, order);
        let value = w_from_table(t, &coeffs);
        let taylor = [h.taylor_at(point.beta1()), h.taylor_at(point.beta2())];
        Self {
            hierarchy: t.hierarchy(),
            eps,
            point,
            coeffs,
            h,
            value,
            taylor,
        }
    }

    /// Same point, different times; reuses the series table when it is long enough.
    pub fn for_times(&self, t: &TimeVector) -> Result<Self> {
        if t.hierarchy() != self.hierarchy {
            return Err(Error::InvalidInput(format!(
                "hierarchy mismatch: {} vs {}",
                t.hierarchy(),
                self.hierarchy
            )));
        }
        if required_order(t) <= self.order() {
            Ok(Self::assemble(t, self.point, self.eps, self.coeffs.clone()))
        } else {
            Self::new(t, &self.point)
        }
    }

    pub fn hierarchy(&self) -> Hierarchy {
        self.hierarchy
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn point(&self) -> &RiemannPoint {
        &self.point
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn series(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn h(&self) -> &HPolynomial {
        &self.h
    }

    /// `W(t, β)`; real in both regimes.
    pub fn value(&self) -> f64 {
        self.value
    }

    /// Taylor coefficients of `h` at `β_i`, `i ∈ {1, 2}`.
    pub fn taylor(&self, i: usize) -> &[Complex64] {
        &self.taylor[i - 1]
    }

    /// Largest Taylor coefficient magnitude of `h` over both invariants.
    pub fn taylor_scale(&self) -> f64 {
        self.taylor
            .iter()
            .flatten()
            .fold(0.0, |m, c| m.max(c.norm()))
    }

    /// `∂^i_{β1} ∂^j_{β2} W` for `i + j ≥ 1`.
    pub fn partial(&self, i: usize, j: usize) -> Complex64 {
        assert!(i + j >= 1, "partial(0, 0) is W itself; use value()");
        let d = self.point.beta1() - self.point.beta2();
        let t1 = &self.taylor[0];
        let t2 = &self.taylor[1];
        let tc = |t: &[Complex64], r: usize| t.get(r).copied().unwrap_or_default();
        let mut res = Complex64::new(0.0, 0.0);
        // Residue at β1: [δ^{i-1}] h(β1+δ) (δ + D)^{-j}
        for m in 0..i {
            let c = inverse_power_coeff(j, m) * if m % 2 == 0 { 1.0 } else { -1.0 };
            if c != 0.0 {
                res += tc(t1, i - 1 - m) * c * d.powi(-((j + m) as i32));
            }
        }
        // Residue at β2: [δ^{j-1}] h(β2+δ) (δ - D)^{-i}
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        for m in 0..j {
            let c = inverse_power_coeff(i, m) * sign;
            if c != 0.0 {
                res += tc(t2, j - 1 - m) * c * d.powi(-((i + m) as i32));
            }
        }
        res * pochhammer(self.eps, i) * pochhammer(self.eps, j)
    }

    /// `∂^k W / ∂β_i^k` from the Taylor coefficient of order `k-1` at `β_i`.
    pub fn pure(&self, i: usize, k: usize) -> Complex64 {
        assert!(k >= 1);
        let t = &self.taylor[i - 1];
        t.get(k - 1).copied().unwrap_or_default() * pochhammer(self.eps, k)
    }

    /// `[W_1, W_2]`.
    pub fn gradient(&self) -> [Complex64; 2] {
        [self.pure(1, 1), self.pure(2, 1)]
    }

    /// Mixed derivative through the EPD relation `W_12 = ε (W_1 - W_2)/(β1 - β2)`.
    pub fn w12_epd(&self) -> Complex64 {
        let [w1, w2] = self.gradient();
        (w1 - w2) * self.eps / (self.point.beta1() - self.point.beta2())
    }
}

/// `W(t, β)`. Elliptic points return the real value (the imaginary part is
/// identically zero because `a`, `b` are real there).
pub fn eval_w(t: &TimeVector, p: &RiemannPoint) -> Result<f64> {
    Ok(Potential::new(t, p)?.value())
}

/// `W` evaluated with independent complex `β1, β2` (no conjugacy imposed).
pub fn eval_w_complex(t: &TimeVector, beta1: Complex64, beta2: Complex64) -> Complex64 {
    let hier = t.hierarchy();
    let eps = hier.eps_f64();
    let a = (beta1 + beta2) * 0.5;
    let b = beta1 * beta2;
    let order = required_order(t);
    let mut c = Vec::with_capacity(order + 1);
    c.push(Complex64::new(1.0, 0.0));
    if order >= 1 {
        c.push(a * (2.0 * eps));
    }
    for k in 1..order {
        let kf = k as f64;
        let next = (a * c[k] * (2.0 * (kf + eps)) - b * c[k - 1] * (kf + 2.0 * eps - 1.0)) / (kf + 1.0);
        c.push(next);
    }
    t.slots()
        .map(|(n, v)| if v == 0.0 { Complex64::default() } else { c[hier.series_index(n)] * v })
        .sum()
}

pub fn h_polynomial(t: &TimeVector, p: &RiemannPoint) -> Result<HPolynomial> {
    Ok(Potential::new(t, p)?.h)
}

/// `∂^k W/∂β_i^k` for `k = 1..=max_k` at a hyperbolic point.
pub fn derivative_tower(t: &TimeVector, p: &RiemannPoint, i: usize, max_k: usize) -> Result<Vec<f64>> {
    if p.is_elliptic() {
        return Err(Error::Inconsistent {
            times: t.hierarchy().to_string(),
            point: "elliptic",
        });
    }
    if !(i == 1 || i == 2) {
        return Err(Error::InvalidInput(format!("invariant index {i} not in {{1, 2}}")));
    }
    let pot = Potential::new(t, p)?;
    if max_k > pot.order() {
        return Err(Error::TruncationExceeded {
            requested: max_k,
            available: pot.order(),
        });
    }
    Ok((1..=max_k).map(|k| pot.pure(i, k).re).collect())
}

/// Characteristic speed of the `t_n` flow for invariant `β_i` (Benney hierarchy).
pub fn char_speed(n: usize, p: &RiemannPoint, i: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidInput("Benney flows start at n = 1".into()));
    }
    flow_speed(Hierarchy::Benney, n, p, i)
}

/// Ratio `∂_{t_n} β_i / ∂_x β_i` on hodograph solutions, for any hierarchy.
///
/// Equals `h_{e_n}(β_i) / h_{e_x}(β_i)`; the denominator is 1 for both the
/// Benney (`x = t_1`) and dToda (`x = x_0`) layouts.
pub fn flow_speed(hierarchy: Hierarchy, n: usize, p: &RiemannPoint, i: usize) -> Result<f64> {
    if p.is_elliptic() {
        return Err(Error::Inconsistent {
            times: hierarchy.to_string(),
            point: "elliptic",
        });
    }
    if n < hierarchy.first_slot() {
        return Err(Error::InvalidInput(format!("no slot {n} in {hierarchy}")));
    }
    let flow = Potential::new(&TimeVector::unit(hierarchy, n)?, p)?;
    let base = flow.for_times(&TimeVector::unit(hierarchy, hierarchy.x_slot())?)?;
    let beta = p.beta(i).re;
    Ok(flow.h().eval_real(beta) / base.h().eval_real(beta))
}

/// Exact `W` as a polynomial in `(β1, β2)` for rational times
/// (`times[k]` at slot `first_slot + k`).
pub fn w_polynomial_exact(hierarchy: Hierarchy, times: &[BigRational]) -> Poly2 {
    let first = hierarchy.first_slot();
    let top = first + times.len().saturating_sub(1);
    let table = CoeffTable::symbolic(&hierarchy.eps_exact(), hierarchy.series_index(top));
    let mut w = Poly2::zero();
    for (k, v) in times.iter().enumerate() {
        let idx = hierarchy.series_index(first + k);
        let c = table.poly_beta(idx).expect("table covers top slot");
        w = &w + &c.scale(v);
    }
    w
}
