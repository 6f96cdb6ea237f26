//! Exact bivariate polynomials with rational coefficients.
//!
//! `Poly2` is the shared carrier for the symbolic series coefficients (in the
//! variables `(a, b)` or `(β1, β2)`) and for the numerators of
//! [`RationalXY`](crate::operator::RationalXY). Terms are stored sparsely,
//! keyed by the exponent pair `(i, j)` of `x^i y^j`; zero coefficients are
//! never stored, so structural equality is polynomial equality.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Shorthand for an exact rational from a numerator/denominator pair.
pub fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Lossy conversion of an exact rational to `f64`.
pub fn rat_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

#[derive(Clone, PartialEq, Eq, Default)]
pub struct Poly2 {
    terms: BTreeMap<(u32, u32), BigRational>,
}

impl Poly2 {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        Self::monomial(c, 0, 0)
    }

    pub fn monomial(c: BigRational, i: u32, j: u32) -> Self {
        let mut p = Self::zero();
        p.add_term(i, j, c);
        p
    }

    /// The polynomial `x`.
    pub fn x() -> Self {
        Self::monomial(BigRational::one(), 1, 0)
    }

    /// The polynomial `y`.
    pub fn y() -> Self {
        Self::monomial(BigRational::one(), 0, 1)
    }

    /// Builds a polynomial from `(i, j, coefficient)` triples; repeated
    /// exponents accumulate.
    pub fn from_terms<I>(terms: I) -> Self
    where
        I: IntoIterator<Item = (u32, u32, BigRational)>,
    {
        let mut p = Self::zero();
        for (i, j, c) in terms {
            p.add_term(i, j, c);
        }
        p
    }

    pub fn add_term(&mut self, i: u32, j: u32, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry((i, j)).or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&(i, j));
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, i: u32, j: u32) -> BigRational {
        self.terms.get(&(i, j)).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &BigRational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|(i, j)| i + j).max()
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self.terms.iter().map(|(k, v)| (*k, v * c)).collect(),
        }
    }

    pub fn diff_x(&self) -> Self {
        let mut out = Self::zero();
        for (&(i, j), c) in &self.terms {
            if i > 0 {
                out.add_term(i - 1, j, c * BigRational::from_integer(BigInt::from(i)));
            }
        }
        out
    }

    pub fn diff_y(&self) -> Self {
        let mut out = Self::zero();
        for (&(i, j), c) in &self.terms {
            if j > 0 {
                out.add_term(i, j - 1, c * BigRational::from_integer(BigInt::from(j)));
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Substitutes `x -> px`, `y -> py`.
    pub fn compose(&self, px: &Poly2, py: &Poly2) -> Self {
        let max_i = self.terms.keys().map(|k| k.0).max().unwrap_or(0);
        let max_j = self.terms.keys().map(|k| k.1).max().unwrap_or(0);
        let xs: Vec<Poly2> = powers(px, max_i);
        let ys: Vec<Poly2> = powers(py, max_j);
        let mut out = Self::zero();
        for (&(i, j), c) in &self.terms {
            let term = (&xs[i as usize] * &ys[j as usize]).scale(c);
            out = &out + &term;
        }
        out
    }

    /// Rewrites a polynomial in `(a, b)` as one in `(β1, β2)` through
    /// `a = (β1 + β2)/2`, `b = β1 β2`.
    pub fn ab_to_beta(&self) -> Self {
        let a = (&Poly2::x() + &Poly2::y()).scale(&rat(1, 2));
        let b = &Poly2::x() * &Poly2::y();
        self.compose(&a, &b)
    }

    /// The univariate polynomial `p(y, y)`, returned with `x`-exponent 0.
    pub fn on_diagonal(&self) -> Self {
        let mut out = Self::zero();
        for (&(i, j), c) in &self.terms {
            out.add_term(0, i + j, c.clone());
        }
        out
    }

    /// Exact division by `(x - y)`; `None` when the remainder is nonzero.
    pub fn div_x_minus_y(&self) -> Option<Self> {
        if self.is_zero() {
            return Some(Self::zero());
        }
        // View p as sum_i p_i(y) x^i and run synthetic division by (x - y):
        // q_{d-1} = p_d, q_{i-1} = p_i + y q_i, remainder p_0 + y q_0.
        let deg_x = self.terms.keys().map(|k| k.0).max().unwrap_or(0);
        let mut rows: Vec<BTreeMap<u32, BigRational>> = vec![BTreeMap::new(); deg_x as usize + 1];
        for (&(i, j), c) in &self.terms {
            rows[i as usize].insert(j, c.clone());
        }
        let shift_add = |p: &BTreeMap<u32, BigRational>, q: &BTreeMap<u32, BigRational>| {
            let mut r = p.clone();
            for (j, c) in q {
                let e = r.entry(j + 1).or_insert_with(BigRational::zero);
                *e += c;
            }
            r.retain(|_, v| !v.is_zero());
            r
        };
        let mut quotient: Vec<BTreeMap<u32, BigRational>> = vec![BTreeMap::new(); deg_x as usize];
        if deg_x == 0 {
            return None;
        }
        quotient[deg_x as usize - 1] = rows[deg_x as usize].clone();
        for i in (1..deg_x as usize).rev() {
            quotient[i - 1] = shift_add(&rows[i], &quotient[i]);
        }
        let remainder = shift_add(&rows[0], &quotient[0]);
        if !remainder.is_empty() {
            return None;
        }
        let mut out = Self::zero();
        for (i, row) in quotient.into_iter().enumerate() {
            for (j, c) in row {
                out.add_term(i as u32, j, c);
            }
        }
        Some(out)
    }

    pub fn eval_rational(&self, x: &BigRational, y: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for (&(i, j), c) in &self.terms {
            acc += c * pow_rat(x, i) * pow_rat(y, j);
        }
        acc
    }

    pub fn eval_f64(&self, x: f64, y: f64) -> f64 {
        self.terms
            .iter()
            .map(|(&(i, j), c)| rat_to_f64(c) * x.powi(i as i32) * y.powi(j as i32))
            .sum()
    }

    pub fn eval_complex(&self, x: Complex64, y: Complex64) -> Complex64 {
        self.terms
            .iter()
            .map(|(&(i, j), c)| x.powu(i) * y.powu(j) * rat_to_f64(c))
            .sum()
    }

    /// Renders with the given variable names, highest total degree first.
    pub fn display_with<'a>(&'a self, vars: [&'a str; 2]) -> PolyDisplay<'a> {
        PolyDisplay { poly: self, vars }
    }
}

fn powers(p: &Poly2, n: u32) -> Vec<Poly2> {
    let mut out = Vec::with_capacity(n as usize + 1);
    out.push(Poly2::one());
    for k in 1..=n as usize {
        let next = &out[k - 1] * p;
        out.push(next);
    }
    out
}

fn pow_rat(x: &BigRational, n: u32) -> BigRational {
    let mut acc = BigRational::one();
    for _ in 0..n {
        acc *= x;
    }
    acc
}

impl Add for &Poly2 {
    type Output = Poly2;
    fn add(self, rhs: &Poly2) -> Poly2 {
        let mut out = self.clone();
        for (&(i, j), c) in &rhs.terms {
            out.add_term(i, j, c.clone());
        }
        out
    }
}

impl Add for Poly2 {
    type Output = Poly2;
    fn add(self, rhs: Poly2) -> Poly2 {
        &self + &rhs
    }
}

impl Sub for &Poly2 {
    type Output = Poly2;
    fn sub(self, rhs: &Poly2) -> Poly2 {
        let mut out = self.clone();
        for (&(i, j), c) in &rhs.terms {
            out.add_term(i, j, -c.clone());
        }
        out
    }
}

impl Sub for Poly2 {
    type Output = Poly2;
    fn sub(self, rhs: Poly2) -> Poly2 {
        &self - &rhs
    }
}

impl Mul for &Poly2 {
    type Output = Poly2;
    fn mul(self, rhs: &Poly2) -> Poly2 {
        let mut out = Poly2::zero();
        for (&(i1, j1), c1) in &self.terms {
            for (&(i2, j2), c2) in &rhs.terms {
                out.add_term(i1 + i2, j1 + j2, c1 * c2);
            }
        }
        out
    }
}

impl Mul for Poly2 {
    type Output = Poly2;
    fn mul(self, rhs: Poly2) -> Poly2 {
        &self * &rhs
    }
}

impl Neg for &Poly2 {
    type Output = Poly2;
    fn neg(self) -> Poly2 {
        Poly2 {
            terms: self.terms.iter().map(|(k, v)| (*k, -v.clone())).collect(),
        }
    }
}

impl Neg for Poly2 {
    type Output = Poly2;
    fn neg(self) -> Poly2 {
        -&self
    }
}

impl fmt::Debug for Poly2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display_with(["x", "y"]))
    }
}

pub struct PolyDisplay<'a> {
    poly: &'a Poly2,
    vars: [&'a str; 2],
}

impl fmt::Display for PolyDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.poly.is_zero() {
            return write!(f, "0");
        }
        let mut keys: Vec<&(u32, u32)> = self.poly.terms.keys().collect();
        keys.sort_by(|a, b| (b.0 + b.1).cmp(&(a.0 + a.1)).then(b.0.cmp(&a.0)));
        for (n, key) in keys.into_iter().enumerate() {
            let c = &self.poly.terms[key];
            let (i, j) = *key;
            let neg = c.is_negative();
            if n == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            let mag = c.abs();
            let mut factors: Vec<String> = Vec::new();
            if !mag.is_one() || (i == 0 && j == 0) {
                factors.push(mag.to_string());
            }
            for (var, e) in self.vars.iter().zip([i, j]) {
                match e {
                    0 => {}
                    1 => factors.push((*var).to_string()),
                    _ => factors.push(format!("{var}^{e}")),
                }
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}
