//! Critical points of `W`: the hodograph equations `∂W/∂β_i = 0`, their
//! classification into regular and singular sectors, and the augmented
//! systems that cut out the singular classes.

mod locus;
mod branches;
mod singular;

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Serialize, Serializer};

use crate::epd::potential::Potential;
use crate::epd::{RiemannPoint, TimeVector};
use crate::error::{Error, Result};
use crate::newton::{self, NewtonOptions};

pub use locus::{trace_locus, GridAxis, Locus, LocusSample};
pub use branches::{compare_closed_forms, BranchFormula, ClassComparison, ItemComparison, ClosedFormReport};
pub use singular::{scan_singular, solve_singular, ScanBox, SingularSeed, Unknown};

/// Default relative threshold below which a Taylor coefficient of `h` counts as zero.
pub const DEFAULT_ZERO_TOL: f64 = 1e-8;
/// Distance `|β1 - β2|` below which iterates are declared collapsed.
pub const DEFAULT_MERGE_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SingularClass {
    Regular,
    /// `h` vanishes to order exactly `n1 + 1` at `β1` and `n2 + 1` at `β2`.
    Sing(u32, u32),
}

impl SingularClass {
    /// `Regular` for `(0, 0)`, `Sing(n1, n2)` otherwise.
    pub fn from_orders(n1: u32, n2: u32) -> Self {
        if n1 == 0 && n2 == 0 {
            SingularClass::Regular
        } else {
            SingularClass::Sing(n1, n2)
        }
    }

    pub fn orders(&self) -> (u32, u32) {
        match *self {
            SingularClass::Regular => (0, 0),
            SingularClass::Sing(n1, n2) => (n1, n2),
        }
    }

    pub fn swapped(&self) -> Self {
        let (n1, n2) = self.orders();
        Self::from_orders(n2, n1)
    }
}

impl fmt::Display for SingularClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SingularClass::Regular => write!(f, "regular"),
            SingularClass::Sing(n1, n2) => write!(f, "sing({n1},{n2})"),
        }
    }
}

impl Serialize for SingularClass {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Residuals {
    /// `max(|W_1|, |W_2|)`.
    pub gradient: f64,
    /// Max over the extra vanishing conditions of the singular class (0 when none).
    pub constraints: f64,
    /// `|W_12|`, computed independently of the EPD relation.
    pub off_diagonal: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HodographPoint {
    pub t: TimeVector,
    pub p: RiemannPoint,
    pub sector: SingularClass,
    pub residuals: Residuals,
    /// `(W_11, W_22)`.
    pub hessian_diag: (f64, f64),
    /// Truncation order of the series table.
    pub order: usize,
    pub iterations: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveOptions {
    pub newton: NewtonOptions,
    pub merge_tol: f64,
    pub zero_tol: f64,
    /// Series truncation order; `None` uses the default for the time vector.
    pub order: Option<usize>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            newton: NewtonOptions::default(),
            merge_tol: DEFAULT_MERGE_TOL,
            zero_tol: DEFAULT_ZERO_TOL,
            order: None,
        }
    }
}

impl SolveOptions {
    /// Newton options with the residual tolerance scaled to the size of `t`.
    pub(crate) fn newton_for(&self, t: &TimeVector) -> NewtonOptions {
        NewtonOptions {
            tol: self.newton.tol * t.max_abs().max(1.0),
            ..self.newton
        }
    }
}

fn hyperbolic_pair(p: &RiemannPoint) -> Result<(f64, f64)> {
    match *p {
        RiemannPoint::Hyperbolic(b1, b2) if b1 != b2 => Ok((b1, b2)),
        RiemannPoint::Hyperbolic(b1, _) => Err(Error::Degenerate(format!(
            "seed beta1 = beta2 = {b1} is a reduced point"
        ))),
        RiemannPoint::Elliptic(_) => Err(Error::Inconsistent {
            times: "hyperbolic solver".into(),
            point: "elliptic",
        }),
    }
}

fn check_merge(b1: f64, b2: f64, merge_tol: f64) -> Result<()> {
    if (b1 - b2).abs() < merge_tol {
        Err(Error::Collapse { beta1: b1, beta2: b2 })
    } else {
        Ok(())
    }
}

/// Builds the output record for a converged point of class `sector`.
fn finish_point(
    t: &TimeVector,
    pot: &Potential,
    sector: SingularClass,
    iterations: usize,
) -> HodographPoint {
    let [w1, w2] = pot.gradient();
    let (n1, n2) = sector.orders();
    let mut constraints: f64 = 0.0;
    for k in 2..=n1 as usize + 1 {
        constraints = constraints.max(pot.pure(1, k).norm());
    }
    for k in 2..=n2 as usize + 1 {
        constraints = constraints.max(pot.pure(2, k).norm());
    }
    HodographPoint {
        t: t.clone(),
        p: *pot.point(),
        sector,
        residuals: Residuals {
            gradient: w1.norm().max(w2.norm()),
            constraints,
            off_diagonal: pot.partial(1, 1).norm(),
        },
        hessian_diag: (pot.partial(2, 0).re, pot.partial(0, 2).re),
        order: pot.order(),
        iterations,
    }
}

/// Solves `W_1 = W_2 = 0` for `(β1, β2)` at fixed times.
///
/// The Jacobian uses the analytic `W_11`, `W_22` and the EPD relation for
/// `W_12`. Converged points whose Hessian diagonal vanishes are reported as
/// [`Error::SingularHessian`].
pub fn solve_regular(t: &TimeVector, seed: &RiemannPoint, opts: &SolveOptions) -> Result<HodographPoint> {
    let (s1, s2) = hyperbolic_pair(seed)?;
    let system = |v: &[f64]| -> Result<newton::Linearization> {
        check_merge(v[0], v[1], opts.merge_tol)?;
        let pot = Potential::with_order(t, &RiemannPoint::Hyperbolic(v[0], v[1]), opts.order)?;
        let [w1, w2] = pot.gradient();
        let w12 = pot.w12_epd().re;
        let f = DVector::from_vec(vec![w1.re, w2.re]);
        let j = DMatrix::from_row_slice(2, 2, &[pot.pure(1, 2).re, w12, w12, pot.pure(2, 2).re]);
        Ok((f, j))
    };
    let report = newton::solve(system, &[s1, s2], &opts.newton_for(t))?;
    let (b1, b2) = (report.x[0], report.x[1]);
    check_merge(b1, b2, opts.merge_tol)?;
    let pot = Potential::with_order(t, &RiemannPoint::Hyperbolic(b1, b2), opts.order)?;
    let scale = pot.taylor_scale();
    let h1 = pot.taylor(1).get(1).copied().unwrap_or_default().norm();
    let h2 = pot.taylor(2).get(1).copied().unwrap_or_default().norm();
    if h1 <= opts.zero_tol * scale || h2 <= opts.zero_tol * scale {
        return Err(Error::SingularHessian {
            w11: pot.pure(1, 2).re,
            w22: pot.pure(2, 2).re,
        });
    }
    Ok(finish_point(t, &pot, SingularClass::Regular, report.iterations))
}

/// Order of vanishing of `h` at `β_i`, read from its Taylor coefficients.
fn vanishing_order(pot: &Potential, i: usize, zero_tol: f64) -> Result<usize> {
    let scale = pot.taylor_scale();
    if scale == 0.0 {
        return Err(Error::AllCoefficientsVanish { invariant: i });
    }
    let lower = zero_tol * scale;
    let upper = 10.0 * lower;
    for (r, c) in pot.taylor(i).iter().enumerate() {
        let v = c.norm();
        if v <= lower {
            continue;
        }
        if v <= upper {
            return Err(Error::ToleranceAmbiguity {
                invariant: i,
                order: r,
                value: v,
                lower,
                upper,
            });
        }
        return Ok(r);
    }
    Err(Error::AllCoefficientsVanish { invariant: i })
}

/// Sector of a hodograph point from the zero orders of `h` at `β1`, `β2`.
///
/// `zero_tol` is relative to the largest Taylor coefficient of `h` at either
/// invariant; coefficients within a factor 10 above it are ambiguous and
/// reported rather than guessed.
pub fn classify(t: &TimeVector, p: &RiemannPoint, zero_tol: f64) -> Result<SingularClass> {
    let pot = Potential::new(t, p)?;
    classify_potential(&pot, zero_tol)
}

pub(crate) fn classify_potential(pot: &Potential, zero_tol: f64) -> Result<SingularClass> {
    let mut orders = [0u32; 2];
    for i in 1..=2 {
        let r = vanishing_order(pot, i, zero_tol)?;
        if r == 0 {
            return Err(Error::NotCritical {
                invariant: i,
                value: pot.taylor(i)[0].norm(),
            });
        }
        orders[i - 1] = (r - 1) as u32;
    }
    Ok(SingularClass::from_orders(orders[0], orders[1]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::epd::Hierarchy;

    fn benney(vals: &[f64]) -> TimeVector {
        TimeVector::new(Hierarchy::Benney, vals.to_vec()).unwrap()
    }

    #[test]
    fn cubic_closed_form() {
        // s = β1 + β2 = -2 t2 / (3 t3), p = β1 β2 = (16x + 16 t2 s + 18 t3 s²)/(24 t3)
        let (x, t2, t3) = (-0.7, 0.4, 1.3);
        let t = benney(&[x, t2, t3]);
        let s = -2.0 * t2 / (3.0 * t3);
        let p = (16.0 * x + 16.0 * t2 * s + 18.0 * t3 * s * s) / (24.0 * t3);
        let d = (s * s - 4.0 * p).sqrt();
        let (e1, e2) = ((s + d) / 2.0, (s - d) / 2.0);
        let pt = solve_regular(&t, &RiemannPoint::Hyperbolic(e1 + 0.3, e2 - 0.2), &SolveOptions::default()).unwrap();
        let RiemannPoint::Hyperbolic(b1, b2) = pt.p else { unreachable!() };
        assert!((b1 - e1).abs() < 1e-12 && (b2 - e2).abs() < 1e-12);
        assert_eq!(pt.sector, SingularClass::Regular);
        assert!(pt.residuals.off_diagonal < 1e-9);
    }

    #[test]
    fn linear_times_collapse() {
        let t = benney(&[0.8, -0.5]);
        let err = solve_regular(&t, &RiemannPoint::Hyperbolic(1.0, -1.0), &SolveOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Collapse { .. }), "{err:?}");
    }

    #[test]
    fn pure_t4_collapses() {
        // h = λ³ + aλ² + (3a² - b)λ/2 + C3 vanishing at β1, β2 forces the third
        // root to be -3a and b = 5a², so real distinct roots do not exist.
        let t = benney(&[0.0, 0.0, 0.0, 1.0]);
        let err = solve_regular(&t, &RiemannPoint::Hyperbolic(1.0, -1.0), &SolveOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Collapse { .. }), "{err:?}");
    }

    #[test]
    fn quartic_with_lower_times() {
        let t = benney(&[0.1, -1.0, 0.2, 1.0]);
        let pt = solve_regular(&t, &RiemannPoint::Hyperbolic(1.0, -1.0), &SolveOptions::default()).unwrap();
        assert!(pt.residuals.gradient < 1e-10);
        assert!(pt.residuals.off_diagonal < 1e-9);
    }

    #[test]
    fn classify_scaling_invariant() {
        let t = benney(&[-0.7, 0.4, 1.3]);
        let seed = RiemannPoint::Hyperbolic(0.9, -1.1);
        let pt = solve_regular(&t, &seed, &SolveOptions::default()).unwrap();
        for c in [0.5, -3.0, 7.0] {
            assert_eq!(classify(&t.scaled(c), &pt.p, DEFAULT_ZERO_TOL).unwrap(), SingularClass::Regular);
        }
    }

    #[test]
    fn classify_rejects_non_critical() {
        let t = benney(&[1.0, 0.0, 1.0]);
        let err = classify(&t, &RiemannPoint::Hyperbolic(0.3, -0.2), DEFAULT_ZERO_TOL).unwrap_err();
        assert!(matches!(err, Error::NotCritical { .. }));
        let zero = benney(&[0.0]);
        assert!(matches!(
            classify(&zero, &RiemannPoint::Hyperbolic(0.3, -0.2), DEFAULT_ZERO_TOL),
            Err(Error::AllCoefficientsVanish { .. })
        ));
    }

    #[test]
    fn class_display() {
        assert_eq!(SingularClass::from_orders(0, 0), SingularClass::Regular);
        assert_eq!(SingularClass::Sing(1, 0).to_string(), "sing(1,0)");
        assert_eq!(SingularClass::Sing(2, 1).swapped(), SingularClass::Sing(1, 2));
    }
}
