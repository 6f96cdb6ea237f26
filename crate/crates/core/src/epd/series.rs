//! Coefficients of `(1 - 2aw + bw²)^{-ε} = Σ_k C_k w^k`.
//!
//! With `w = 1/λ`, `(1 - 2aw + bw²) = (1 - β1/λ)(1 - β2/λ)`, so these are the
//! Laurent coefficients at infinity that the residue formulas for `W` pick out.
//! All three backends run the same recurrence
//! `(k+1) C_{k+1} = 2a (k+ε) C_k - b (k+2ε-1) C_{k-1}`, `C_0 = 1`, `C_1 = 2εa`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::RiemannPoint;
use crate::poly::Poly2;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeriesBackend {
    ExactRational,
    Float,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Coefficients {
    /// Polynomials in `(a, b)`.
    Symbolic(Vec<Poly2>),
    /// Exact values at a rational `(a, b)`.
    Rational(Vec<BigRational>),
    Float(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoeffTable {
    eps: BigRational,
    order: usize,
    coeffs: Coefficients,
}

impl CoeffTable {
    /// Symbolic table `C_0..C_order` as exact polynomials in `(a, b)`.
    pub fn symbolic(eps: &BigRational, order: usize) -> Self {
        let a = Poly2::x();
        let b = Poly2::y();
        let coeffs = run_recurrence(
            eps,
            order,
            Poly2::one(),
            |c: &Poly2, k: &BigRational| c.scale(k),
            |p: &Poly2| &a * p,
            |p: &Poly2| &b * p,
            |x: &Poly2, y: &Poly2| x + y,
        );
        Self {
            eps: eps.clone(),
            order,
            coeffs: Coefficients::Symbolic(coeffs),
        }
    }

    /// Exact table evaluated at rational `(a, b)`.
    pub fn exact_at(eps: &BigRational, a: &BigRational, b: &BigRational, order: usize) -> Self {
        let coeffs = run_recurrence(
            eps,
            order,
            BigRational::one(),
            |c: &BigRational, k: &BigRational| c * k,
            |p: &BigRational| a * p,
            |p: &BigRational| b * p,
            |x: &BigRational, y: &BigRational| x + y,
        );
        Self {
            eps: eps.clone(),
            order,
            coeffs: Coefficients::Rational(coeffs),
        }
    }

    /// Floating table at `(a, b)`.
    pub fn float_at(eps: &BigRational, a: f64, b: f64, order: usize) -> Self {
        let e = crate::poly::rat_to_f64(eps);
        Self {
            eps: eps.clone(),
            order,
            coeffs: Coefficients::Float(float_coeffs(e, a, b, order)),
        }
    }

    /// Floating table at the `(a, b)` of a Riemann point (real in both regimes).
    pub fn at_point(eps: &BigRational, p: &RiemannPoint, order: usize) -> Self {
        Self::float_at(eps, p.a(), p.b(), order)
    }

    pub fn eps(&self) -> &BigRational {
        &self.eps
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn backend(&self) -> SeriesBackend {
        match self.coeffs {
            Coefficients::Float(_) => SeriesBackend::Float,
            _ => SeriesBackend::ExactRational,
        }
    }

    pub fn coefficients(&self) -> &Coefficients {
        &self.coeffs
    }

    /// `C_k` as a polynomial in `(a, b)`; `None` for evaluated tables.
    pub fn poly_ab(&self, k: usize) -> Option<&Poly2> {
        match &self.coeffs {
            Coefficients::Symbolic(c) => c.get(k),
            _ => None,
        }
    }

    /// `C_k` rewritten as a polynomial in `(β1, β2)`.
    pub fn poly_beta(&self, k: usize) -> Option<Poly2> {
        self.poly_ab(k).map(Poly2::ab_to_beta)
    }

    pub fn rational(&self, k: usize) -> Option<&BigRational> {
        match &self.coeffs {
            Coefficients::Rational(c) => c.get(k),
            _ => None,
        }
    }

    pub fn float(&self, k: usize) -> Option<f64> {
        match &self.coeffs {
            Coefficients::Float(c) => c.get(k).copied(),
            Coefficients::Rational(c) => c.get(k).map(crate::poly::rat_to_f64),
            Coefficients::Symbolic(_) => None,
        }
    }
}

/// Shared recurrence driver, generic over the coefficient carrier.
fn run_recurrence<T, S, A, B, P>(
    eps: &BigRational,
    order: usize,
    one: T,
    scale: S,
    times_a: A,
    times_b: B,
    plus: P,
) -> Vec<T>
where
    T: Clone,
    S: Fn(&T, &BigRational) -> T,
    A: Fn(&T) -> T,
    B: Fn(&T) -> T,
    P: Fn(&T, &T) -> T,
{
    let two = BigRational::from_integer(BigInt::from(2));
    let mut out = Vec::with_capacity(order + 1);
    out.push(one.clone());
    if order == 0 {
        return out;
    }
    out.push(scale(&times_a(&one), &(&two * eps)));
    for k in 1..order {
        let kk = BigRational::from_integer(BigInt::from(k as i64));
        let denom = &kk + BigRational::one();
        let ca = &two * (&kk + eps) / &denom;
        let cb = -(&kk + &two * eps - BigRational::one()) / &denom;
        let next = if cb.is_zero() {
            scale(&times_a(&out[k]), &ca)
        } else {
            plus(&scale(&times_a(&out[k]), &ca), &scale(&times_b(&out[k - 1]), &cb))
        };
        out.push(next);
    }
    out
}

/// Floating-point `C_0..C_order` at `(a, b)`.
pub fn float_coeffs(eps: f64, a: f64, b: f64, order: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(order + 1);
    out.push(1.0);
    if order == 0 {
        return out;
    }
    out.push(2.0 * eps * a);
    for k in 1..order {
        let kf = k as f64;
        let next = (2.0 * a * (kf + eps) * out[k] - b * (kf + 2.0 * eps - 1.0) * out[k - 1]) / (kf + 1.0);
        out.push(next);
    }
    out
}
