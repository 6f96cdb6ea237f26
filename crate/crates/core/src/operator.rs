//! Euler-Poisson-Darboux operators `L_ε = ∂x∂y - ε/(x-y) (∂x - ∂y)` acting on
//! rational functions `p(x, y) / (x - y)^m` with exact coefficients.
//!
//! The class is closed under `∂x`, `∂y`, products and division by `(x - y)`,
//! so every identity check below ends in an exact comparison with zero.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::epd::series::CoeffTable;
use crate::poly::{rat, Poly2};

/// `numerator / (x - y)^denom_power`, kept in canonical form: the numerator
/// is not divisible by `(x - y)` unless the power is zero.
#[derive(Clone, PartialEq, Eq)]
pub struct RationalXY {
    numerator: Poly2,
    denom_power: u32,
}

impl RationalXY {
    pub fn new(numerator: Poly2, denom_power: u32) -> Self {
        let mut f = Self {
            numerator,
            denom_power,
        };
        f.canonicalize();
        f
    }

    pub fn polynomial(p: Poly2) -> Self {
        Self::new(p, 0)
    }

    pub fn zero() -> Self {
        Self::polynomial(Poly2::zero())
    }

    pub fn constant(c: BigRational) -> Self {
        Self::polynomial(Poly2::constant(c))
    }

    /// `1 / (x - y)^m`.
    pub fn inverse_diff_power(m: u32) -> Self {
        Self::new(Poly2::one(), m)
    }

    pub fn numerator(&self) -> &Poly2 {
        &self.numerator
    }

    pub fn denom_power(&self) -> u32 {
        self.denom_power
    }

    pub fn is_zero(&self) -> bool {
        self.numerator.is_zero()
    }

    fn canonicalize(&mut self) {
        if self.numerator.is_zero() {
            self.denom_power = 0;
            return;
        }
        while self.denom_power > 0 {
            match self.numerator.div_x_minus_y() {
                Some(q) => {
                    self.numerator = q;
                    self.denom_power -= 1;
                }
                None => break,
            }
        }
    }

    /// Numerator rescaled to denominator power `m ≥ self.denom_power`.
    fn numerator_at(&self, m: u32) -> Poly2 {
        debug_assert!(m >= self.denom_power);
        let diff = &Poly2::x() - &Poly2::y();
        &self.numerator * &diff.pow(m - self.denom_power)
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        Self::new(self.numerator.scale(c), self.denom_power)
    }

    /// Multiplication by `(x - y)^k`.
    pub fn times_diff_power(&self, k: u32) -> Self {
        if k <= self.denom_power {
            Self::new(self.numerator.clone(), self.denom_power - k)
        } else {
            let diff = &Poly2::x() - &Poly2::y();
            Self::new(&self.numerator * &diff.pow(k - self.denom_power), 0)
        }
    }

    /// Division by `(x - y)`.
    pub fn over_diff(&self) -> Self {
        Self::new(self.numerator.clone(), self.denom_power + 1)
    }

    pub fn diff_x(&self) -> Self {
        // (N/(x-y)^m)_x = ((x-y) N_x - m N) / (x-y)^{m+1}
        let m = self.denom_power;
        if m == 0 {
            return Self::new(self.numerator.diff_x(), 0);
        }
        let diff = &Poly2::x() - &Poly2::y();
        let num = &(&diff * &self.numerator.diff_x())
            - &self.numerator.scale(&BigRational::from_integer(BigInt::from(m)));
        Self::new(num, m + 1)
    }

    pub fn diff_y(&self) -> Self {
        // (N/(x-y)^m)_y = ((x-y) N_y + m N) / (x-y)^{m+1}
        let m = self.denom_power;
        if m == 0 {
            return Self::new(self.numerator.diff_y(), 0);
        }
        let diff = &Poly2::x() - &Poly2::y();
        let num = &(&diff * &self.numerator.diff_y())
            + &self.numerator.scale(&BigRational::from_integer(BigInt::from(m)));
        Self::new(num, m + 1)
    }

    /// Exact value at a point off the diagonal; `None` when `x = y` and `m > 0`.
    pub fn eval_rational(&self, x: &BigRational, y: &BigRational) -> Option<BigRational> {
        let n = self.numerator.eval_rational(x, y);
        if self.denom_power == 0 {
            return Some(n);
        }
        let d = x - y;
        if d.is_zero() {
            return None;
        }
        let mut den = BigRational::one();
        for _ in 0..self.denom_power {
            den *= &d;
        }
        Some(n / den)
    }
}

impl Add for &RationalXY {
    type Output = RationalXY;
    fn add(self, rhs: &RationalXY) -> RationalXY {
        let m = self.denom_power.max(rhs.denom_power);
        RationalXY::new(&self.numerator_at(m) + &rhs.numerator_at(m), m)
    }
}

impl Sub for &RationalXY {
    type Output = RationalXY;
    fn sub(self, rhs: &RationalXY) -> RationalXY {
        let m = self.denom_power.max(rhs.denom_power);
        RationalXY::new(&self.numerator_at(m) - &rhs.numerator_at(m), m)
    }
}

impl Mul for &RationalXY {
    type Output = RationalXY;
    fn mul(self, rhs: &RationalXY) -> RationalXY {
        RationalXY::new(&self.numerator * &rhs.numerator, self.denom_power + rhs.denom_power)
    }
}

impl Neg for &RationalXY {
    type Output = RationalXY;
    fn neg(self) -> RationalXY {
        RationalXY {
            numerator: -&self.numerator,
            denom_power: self.denom_power,
        }
    }
}

impl fmt::Debug for RationalXY {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for RationalXY {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let num = self.numerator.display_with(["x", "y"]);
        match self.denom_power {
            0 => write!(f, "{num}"),
            1 => write!(f, "({num})/(x - y)"),
            m => write!(f, "({num})/(x - y)^{m}"),
        }
    }
}

/// `L_ε f = f_xy - ε (f_x - f_y)/(x - y)`.
pub fn apply_l(eps: &BigRational, f: &RationalXY) -> RationalXY {
    let fx = f.diff_x();
    let fy = f.diff_y();
    let fxy = fx.diff_y();
    let first = (&fx - &fy).over_diff().scale(eps);
    &fxy - &first
}

/// `L̃_ε = (x - y) L_ε`.
pub fn apply_l_tilde(eps: &BigRational, f: &RationalXY) -> RationalXY {
    apply_l(eps, f).times_diff_power(1)
}

/// `L_{ε+1}(L_μ f) - L_{μ+1}(L_ε f)`; identically zero.
pub fn check_commutation(eps: &BigRational, mu: &BigRational, f: &RationalXY) -> RationalXY {
    let one = BigRational::one();
    let lhs = apply_l(&(eps + &one), &apply_l(mu, f));
    let rhs = apply_l(&(mu + &one), &apply_l(eps, f));
    &lhs - &rhs
}

/// `∂x∂y (L̃_{-1/2} f) - L̃_{1/2} (∂x∂y f)`; identically zero.
pub fn check_tilde_duality(f: &RationalXY) -> RationalXY {
    let lhs = apply_l_tilde(&rat(-1, 2), f).diff_x().diff_y();
    let rhs = apply_l_tilde(&rat(1, 2), &f.diff_x().diff_y());
    &lhs - &rhs
}

/// `C^ε_n(x, y)`, the `n`-th coefficient of `((1 - xw)(1 - yw))^{-ε}`.
pub fn gegenbauer_xy(eps: &BigRational, n: usize) -> RationalXY {
    let table = CoeffTable::symbolic(eps, n);
    RationalXY::polynomial(table.poly_beta(n).expect("order n table"))
}

/// Residuals of the index-shift relation applied to `W_ε = C^ε_n`.
#[derive(Clone, Debug)]
pub struct IndexShiftResidual {
    /// `L_{ε+1}(L_μ C^ε_n)`: `L_μ W_ε` solves `E(ε+1, ε+1)`.
    pub shifted_epd: RationalXY,
    /// `L_μ C^ε_n - ε(ε-μ) C^{ε+1}_{n-2}`: the normalized form with the
    /// generating-function normalization of `W_{ε+1}`.
    pub normalized: RationalXY,
}

impl IndexShiftResidual {
    pub fn is_zero(&self) -> bool {
        self.shifted_epd.is_zero() && self.normalized.is_zero()
    }
}

pub fn check_index_shift(eps: &BigRational, mu: &BigRational, n: usize) -> IndexShiftResidual {
    let one = BigRational::one();
    let w = gegenbauer_xy(eps, n);
    let lw = apply_l(mu, &w);
    let shifted_epd = apply_l(&(eps + &one), &lw);
    let expected = if n >= 2 {
        gegenbauer_xy(&(eps + &one), n - 2).scale(&(eps * (eps - mu)))
    } else {
        RationalXY::zero()
    };
    IndexShiftResidual {
        shifted_epd,
        normalized: &lw - &expected,
    }
}

/// Random element with numerator total degree `≤ max_degree`, small integer
/// coefficients and denominator power `≤ max_power`.
pub fn random_rational_xy<R: Rng>(rng: &mut R, max_degree: u32, max_power: u32) -> RationalXY {
    let mut p = Poly2::zero();
    let terms = rng.random_range(1..=8);
    for _ in 0..terms {
        let i = rng.random_range(0..=max_degree);
        let j = rng.random_range(0..=max_degree - i);
        let num = rng.random_range(-9i64..=9);
        let den = rng.random_range(1i64..=4);
        p.add_term(i, j, rat(num, den));
    }
    let m = rng.random_range(0..=max_power);
    RationalXY::new(p, m)
}

/// The half-integer grid `{-3/2, -1, …, 3/2}`.
pub fn half_integer_grid() -> Vec<BigRational> {
    (-3..=3).map(|k| rat(k, 2)).collect()
}

/// Outcome of a batch of exact identity checks.
#[derive(Clone, Debug, Serialize)]
pub struct IdentityReport {
    pub trials: usize,
    pub seed: u64,
    pub commutation_checks: usize,
    pub commutation_nonzero: usize,
    pub duality_checks: usize,
    pub duality_nonzero: usize,
    pub epd_checks: usize,
    pub epd_nonzero: usize,
    pub index_shift_checks: usize,
    pub index_shift_nonzero: usize,
    /// Human-readable description of each failure (empty when all vanish).
    pub failures: Vec<String>,
}

impl IdentityReport {
    pub fn all_zero(&self) -> bool {
        self.commutation_nonzero == 0
            && self.duality_nonzero == 0
            && self.epd_nonzero == 0
            && self.index_shift_nonzero == 0
    }
}

/// Runs every operator identity on `trials` random inputs over the
/// half-integer `(ε, μ)` grid, plus the Gegenbauer-solution checks.
pub fn verify_identities(trials: usize, seed: u64) -> IdentityReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = half_integer_grid();
    let mut report = IdentityReport {
        trials,
        seed,
        commutation_checks: 0,
        commutation_nonzero: 0,
        duality_checks: 0,
        duality_nonzero: 0,
        epd_checks: 0,
        epd_nonzero: 0,
        index_shift_checks: 0,
        index_shift_nonzero: 0,
        failures: Vec::new(),
    };
    let inputs: Vec<RationalXY> = (0..trials).map(|_| random_rational_xy(&mut rng, 6, 3)).collect();
    for f in &inputs {
        for eps in &grid {
            for mu in &grid {
                report.commutation_checks += 1;
                let r = check_commutation(eps, mu, f);
                if !r.is_zero() {
                    report.commutation_nonzero += 1;
                    report.failures.push(format!("commutation eps={eps} mu={mu} f={f}: {r}"));
                }
            }
        }
        report.duality_checks += 1;
        let r = check_tilde_duality(f);
        if !r.is_zero() {
            report.duality_nonzero += 1;
            report.failures.push(format!("duality f={f}: {r}"));
        }
    }
    for eps in [rat(1, 2), rat(-1, 2)] {
        for n in 0..=6 {
            report.epd_checks += 1;
            let r = apply_l(&eps, &gegenbauer_xy(&eps, n));
            if !r.is_zero() {
                report.epd_nonzero += 1;
                report.failures.push(format!("L_{eps} C_{n}: {r}"));
            }
        }
    }
    for eps in &grid {
        for mu in &grid {
            for n in 0..=6 {
                report.index_shift_checks += 1;
                let r = check_index_shift(eps, mu, n);
                if !r.is_zero() {
                    report.index_shift_nonzero += 1;
                    report.failures.push(format!(
                        "index shift eps={eps} mu={mu} n={n}: {:?} / {:?}",
                        r.shifted_epd, r.normalized
                    ));
                }
            }
        }
    }
    report
}
