//! Generating-function engine for the Benney and dToda potentials.
//!
//! The potential is `W(t, β) = Σ_n v_n C^ε_{n+d+1}(a, b)` where `C^ε_k` are the
//! coefficients of `(1 - 2aw + bw²)^{-ε}`, `a = (β1 + β2)/2`, `b = β1 β2`, and
//! `d` is the hierarchy offset (`-1` for Benney-type times starting at `t_1`,
//! `0` for dToda times starting at `x_0`). Residue integrals are never
//! computed numerically; everything goes through the three-term recurrence in
//! [`series`].

pub mod potential;
pub mod series;

use std::fmt;

use num_complex::Complex64;
use num_rational::{BigRational, Rational64};
use num_traits::ToPrimitive;
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

pub use potential::{
    char_speed, derivative_tower, eval_w, eval_w_complex, flow_speed, h_polynomial, w_polynomial_exact,
    HPolynomial, Potential,
};
pub use series::{CoeffTable, SeriesBackend};

/// Flow hierarchy together with its Euler-Poisson-Darboux index.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Hierarchy {
    /// 1-layer Benney, `ε = 1/2`, times `t_1 = x, t_2, …`.
    Benney,
    /// dispersionless Toda, `ε = -1/2`, times `x_0, x_1, …`.
    DToda,
    /// Benney-type layout with an arbitrary rational index.
    GeneralEps(Rational64),
}

impl Hierarchy {
    pub fn eps(&self) -> Rational64 {
        match self {
            Hierarchy::Benney => Rational64::new(1, 2),
            Hierarchy::DToda => Rational64::new(-1, 2),
            Hierarchy::GeneralEps(e) => *e,
        }
    }

    pub fn eps_exact(&self) -> BigRational {
        let e = self.eps();
        BigRational::new((*e.numer()).into(), (*e.denom()).into())
    }

    pub fn eps_f64(&self) -> f64 {
        self.eps().to_f64().unwrap_or(f64::NAN)
    }

    /// Index of the first time slot (1 for Benney-type, 0 for dToda).
    pub fn first_slot(&self) -> usize {
        match self {
            Hierarchy::DToda => 0,
            _ => 1,
        }
    }

    /// The slot playing the role of the spatial variable.
    pub fn x_slot(&self) -> usize {
        self.first_slot()
    }

    /// Series index of the coefficient multiplying time slot `n`.
    pub fn series_index(&self, n: usize) -> usize {
        match self {
            Hierarchy::DToda => n + 1,
            _ => n,
        }
    }

    /// Human name of time slot `n` (`x`, `t2`, … or `x0`, `x1`, …).
    pub fn slot_name(&self, n: usize) -> String {
        match self {
            Hierarchy::DToda => format!("x{n}"),
            _ if n == 1 => "x".to_string(),
            _ => format!("t{n}"),
        }
    }

    /// Inverse of [`slot_name`](Self::slot_name); also accepts `t1` for Benney.
    pub fn parse_slot(&self, name: &str) -> Option<usize> {
        let name = name.trim();
        match self {
            Hierarchy::DToda => name.strip_prefix('x')?.parse().ok(),
            _ => {
                if name == "x" {
                    return Some(1);
                }
                let n: usize = name.strip_prefix('t')?.parse().ok()?;
                (n >= 1).then_some(n)
            }
        }
    }
}

impl fmt::Display for Hierarchy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Hierarchy::Benney => write!(f, "benney"),
            Hierarchy::DToda => write!(f, "dtoda"),
            Hierarchy::GeneralEps(e) => write!(f, "eps={e}"),
        }
    }
}

impl Serialize for Hierarchy {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Finite list of flow parameters. Entries past the stored ones are exactly zero.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeVector {
    hierarchy: Hierarchy,
    values: Vec<f64>,
}

impl TimeVector {
    /// `values[k]` is the time at slot `hierarchy.first_slot() + k`.
    pub fn new(hierarchy: Hierarchy, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidInput(format!(
                "time vector for {hierarchy} needs at least the {} slot",
                hierarchy.slot_name(hierarchy.first_slot())
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite time value {v}")));
        }
        Ok(Self { hierarchy, values })
    }

    /// Builds a vector from `(slot, value)` pairs; unspecified slots are zero.
    pub fn from_slots(hierarchy: Hierarchy, slots: &[(usize, f64)]) -> Result<Self> {
        let first = hierarchy.first_slot();
        let top = slots.iter().map(|s| s.0).max().unwrap_or(first).max(first);
        let mut values = vec![0.0; top - first + 1];
        for &(n, v) in slots {
            if n < first {
                return Err(Error::InvalidInput(format!(
                    "slot {n} is below the first slot {first} of {hierarchy}"
                )));
            }
            values[n - first] = v;
        }
        Self::new(hierarchy, values)
    }

    /// The unit vector with a single 1 at slot `n`.
    pub fn unit(hierarchy: Hierarchy, n: usize) -> Result<Self> {
        Self::from_slots(hierarchy, &[(n, 1.0)])
    }

    pub fn hierarchy(&self) -> Hierarchy {
        self.hierarchy
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, n: usize) -> f64 {
        let first = self.hierarchy.first_slot();
        if n < first {
            return 0.0;
        }
        self.values.get(n - first).copied().unwrap_or(0.0)
    }

    pub fn set(&mut self, n: usize, v: f64) {
        let first = self.hierarchy.first_slot();
        assert!(n >= first, "slot {n} below first slot {first}");
        if n - first >= self.values.len() {
            self.values.resize(n - first + 1, 0.0);
        }
        self.values[n - first] = v;
    }

    pub fn with(&self, n: usize, v: f64) -> Self {
        let mut out = self.clone();
        out.set(n, v);
        out
    }

    /// Highest slot with a nonzero entry (the first slot when all vanish).
    pub fn top(&self) -> usize {
        let first = self.hierarchy.first_slot();
        self.values
            .iter()
            .rposition(|v| *v != 0.0)
            .map_or(first, |k| k + first)
    }

    /// Iterator over `(slot, value)` for the stored slots.
    pub fn slots(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        let first = self.hierarchy.first_slot();
        self.values.iter().enumerate().map(move |(k, v)| (k + first, *v))
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            hierarchy: self.hierarchy,
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl fmt::Display for TimeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .slots()
            .filter(|(_, v)| *v != 0.0)
            .map(|(n, v)| format!("{}={v}", self.hierarchy.slot_name(n)))
            .collect();
        write!(f, "{}", parts.join(","))
    }
}

/// Serialized as an ordered map from slot name to value.
impl Serialize for TimeVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.values.len()))?;
        for (n, v) in self.slots() {
            map.serialize_entry(&self.hierarchy.slot_name(n), &v)?;
        }
        map.end()
    }
}

/// A pair of Riemann invariants.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RiemannPoint {
    /// Real and distinct `β1, β2`.
    Hyperbolic(f64, f64),
    /// `β1 = β`, `β2 = conj(β)`, `Im β ≠ 0`.
    Elliptic(Complex64),
}

impl RiemannPoint {
    pub fn hyperbolic(beta1: f64, beta2: f64) -> Result<Self> {
        if !(beta1.is_finite() && beta2.is_finite()) {
            return Err(Error::InvalidInput("non-finite Riemann invariant".into()));
        }
        if beta1 == beta2 {
            return Err(Error::Degenerate(format!(
                "beta1 = beta2 = {beta1} is a reduced solution"
            )));
        }
        Ok(RiemannPoint::Hyperbolic(beta1, beta2))
    }

    pub fn elliptic(beta: Complex64) -> Result<Self> {
        if !(beta.re.is_finite() && beta.im.is_finite()) {
            return Err(Error::InvalidInput("non-finite Riemann invariant".into()));
        }
        if beta.im == 0.0 {
            return Err(Error::Degenerate("elliptic point with Im beta = 0".into()));
        }
        Ok(RiemannPoint::Elliptic(beta))
    }

    pub fn beta1(&self) -> Complex64 {
        match *self {
            RiemannPoint::Hyperbolic(b1, _) => Complex64::new(b1, 0.0),
            RiemannPoint::Elliptic(b) => b,
        }
    }

    pub fn beta2(&self) -> Complex64 {
        match *self {
            RiemannPoint::Hyperbolic(_, b2) => Complex64::new(b2, 0.0),
            RiemannPoint::Elliptic(b) => b.conj(),
        }
    }

    pub fn beta(&self, i: usize) -> Complex64 {
        if i == 1 {
            self.beta1()
        } else {
            self.beta2()
        }
    }

    /// `a = (β1 + β2)/2`, real in both regimes.
    pub fn a(&self) -> f64 {
        match *self {
            RiemannPoint::Hyperbolic(b1, b2) => 0.5 * (b1 + b2),
            RiemannPoint::Elliptic(b) => b.re,
        }
    }

    /// `b = β1 β2`, real in both regimes.
    pub fn b(&self) -> f64 {
        match *self {
            RiemannPoint::Hyperbolic(b1, b2) => b1 * b2,
            RiemannPoint::Elliptic(b) => b.norm_sqr(),
        }
    }

    pub fn is_elliptic(&self) -> bool {
        matches!(self, RiemannPoint::Elliptic(_))
    }

    /// Same point with the invariant labels exchanged (hyperbolic only;
    /// elliptic points swap to the conjugate).
    pub fn swapped(&self) -> Self {
        match *self {
            RiemannPoint::Hyperbolic(b1, b2) => RiemannPoint::Hyperbolic(b2, b1),
            RiemannPoint::Elliptic(b) => RiemannPoint::Elliptic(b.conj()),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            RiemannPoint::Hyperbolic(..) => "hyperbolic",
            RiemannPoint::Elliptic(_) => "elliptic",
        }
    }
}

impl Serialize for RiemannPoint {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let b1 = self.beta1();
        let b2 = self.beta2();
        [[b1.re, b1.im], [b2.re, b2.im]].serialize(s)
    }
}

/// `(u, v) = (-(β1 + β2), (β1 - β2)²/4)`.
pub fn uv_map(p: &RiemannPoint) -> (f64, f64) {
    match *p {
        RiemannPoint::Hyperbolic(b1, b2) => (-(b1 + b2), 0.25 * (b1 - b2) * (b1 - b2)),
        RiemannPoint::Elliptic(b) => (-2.0 * b.re, -b.im * b.im),
    }
}

/// Inverse of [`uv_map`]; picks `β1 > β2` when `v > 0` and `Im β1 > 0` when `v < 0`.
pub fn uv_unmap(u: f64, v: f64) -> Result<RiemannPoint> {
    if !(u.is_finite() && v.is_finite()) {
        return Err(Error::InvalidInput("non-finite (u, v)".into()));
    }
    if v == 0.0 {
        return Err(Error::Degenerate("v = 0 corresponds to beta1 = beta2".into()));
    }
    let centre = -0.5 * u;
    if v > 0.0 {
        let half = v.sqrt();
        Ok(RiemannPoint::Hyperbolic(centre + half, centre - half))
    } else {
        Ok(RiemannPoint::Elliptic(Complex64::new(centre, (-v).sqrt())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uv_examples() {
        assert_eq!(uv_map(&RiemannPoint::Hyperbolic(2.0, -2.0)), (0.0, 4.0));
        assert_eq!(uv_map(&RiemannPoint::Hyperbolic(3.0, 1.0)), (-4.0, 1.0));
        assert_eq!(uv_unmap(-4.0, 1.0).unwrap(), RiemannPoint::Hyperbolic(3.0, 1.0));
        let p = uv_unmap(0.0, -1.0).unwrap();
        assert_eq!(p.beta1(), Complex64::new(0.0, 1.0));
        assert_eq!(p.beta2(), Complex64::new(0.0, -1.0));
        assert!(matches!(uv_unmap(1.0, 0.0), Err(Error::Degenerate(_))));
    }

    #[test]
    fn elliptic_sign_of_v() {
        let p = RiemannPoint::elliptic(Complex64::new(0.3, -0.7)).unwrap();
        let (_, v) = uv_map(&p);
        assert!(v < 0.0);
        assert!(RiemannPoint::elliptic(Complex64::new(1.0, 0.0)).is_err());
        assert!(RiemannPoint::hyperbolic(1.0, 1.0).is_err());
    }

    #[test]
    fn time_vector_layout() {
        let t = TimeVector::from_slots(Hierarchy::Benney, &[(4, 1.0), (2, -0.5)]).unwrap();
        assert_eq!(t.values(), &[0.0, -0.5, 0.0, 1.0]);
        assert_eq!(t.top(), 4);
        assert_eq!(t.get(9), 0.0);
        assert_eq!(t.to_string(), "t2=-0.5,t4=1");
        let d = TimeVector::from_slots(Hierarchy::DToda, &[(0, 1.0), (1, 1.0)]).unwrap();
        assert_eq!(d.top(), 1);
        assert_eq!(d.to_string(), "x0=1,x1=1");
        assert!(TimeVector::new(Hierarchy::Benney, vec![]).is_err());
        assert!(TimeVector::from_slots(Hierarchy::Benney, &[(0, 1.0)]).is_err());
    }

    #[test]
    fn slot_names_round_trip() {
        for h in [Hierarchy::Benney, Hierarchy::DToda] {
            for n in h.first_slot()..8 {
                assert_eq!(h.parse_slot(&h.slot_name(n)), Some(n));
            }
        }
        assert_eq!(Hierarchy::Benney.parse_slot("t1"), Some(1));
        assert_eq!(Hierarchy::Benney.parse_slot("t0"), None);
        assert_eq!(Hierarchy::DToda.parse_slot("t2"), None);
    }
}
