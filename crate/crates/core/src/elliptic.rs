//! Hodograph points with complex conjugate invariants `β2 = conj(β1)`.
//!
//! `W` is real there, the hodograph system reduces to the single complex
//! equation `∂W/∂β̄ = ε h(β̄) = 0`, and the singular classes are read from
//! the zero order of `h` at `β`. The `(u, v)` chart with `v < 0` gives an
//! equivalent real description.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Serialize, Serializer};

use crate::epd::potential::{eval_w_complex, Potential};
use crate::epd::series::CoeffTable;
use crate::epd::{Hierarchy, RiemannPoint, TimeVector};
use crate::error::{Error, Result};
use crate::hodograph::SolveOptions;
use crate::newton::{self, lstsq};
use crate::poly::{rat, Poly2};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EllipticClass {
    Regular,
    /// `∂^k W/∂β̄^k = 0` for `k ≤ n + 1`, `∂^{n+2} W/∂β̄^{n+2} ≠ 0`.
    SingN(u32),
}

impl fmt::Display for EllipticClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EllipticClass::Regular => write!(f, "regular"),
            EllipticClass::SingN(n) => write!(f, "sing({n})"),
        }
    }
}

impl Serialize for EllipticClass {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// First and second derivatives of `W` in the chart `u = -2U`, `v = -V²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct UvDerivatives {
    pub w_u: f64,
    pub w_v: f64,
    pub w_uu: f64,
    pub w_uv: f64,
    pub w_vv: f64,
}

impl UvDerivatives {
    /// `W_uu - v W_vv - (ε + 1/2) W_v`, zero for every solution of the EPD equation.
    pub fn epd_residual(&self, eps: f64, v: f64) -> f64 {
        self.w_uu - v * self.w_vv - (eps + 0.5) * self.w_v
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EllipticPoint {
    pub t: TimeVector,
    #[serde(serialize_with = "complex_pair")]
    pub beta: Complex64,
    pub sector: EllipticClass,
    /// Max modulus over the equations that were solved.
    pub residual: f64,
    /// `|∂^k W/∂β̄^k|` for `k = 1..=4`.
    pub derivatives: Vec<f64>,
    pub uv: UvDerivatives,
    /// `|Im W|`, zero up to round-off.
    pub im_w: f64,
    pub order: usize,
    pub iterations: usize,
}

fn complex_pair<S: Serializer>(z: &Complex64, s: S) -> std::result::Result<S::Ok, S::Error> {
    [z.re, z.im].serialize(s)
}

fn check_real_collapse(v: f64, merge_tol: f64) -> Result<()> {
    if v.abs() < merge_tol {
        Err(Error::RealCollapse { v })
    } else {
        Ok(())
    }
}

fn elliptic_potential(t: &TimeVector, u: f64, v: f64, opts: &SolveOptions) -> Result<Potential> {
    check_real_collapse(v, opts.merge_tol)?;
    Potential::with_order(t, &RiemannPoint::Elliptic(Complex64::new(u, v)), opts.order)
}

/// `(W_u, W_v, W_uu, W_uv, W_vv)` at an elliptic point.
pub fn uv_derivatives(pot: &Potential) -> Result<UvDerivatives> {
    let p = pot.point();
    if !p.is_elliptic() {
        return Err(Error::Degenerate("the (u, v) chart needs v < 0".into()));
    }
    // s = (β1 - β2)/2 = i V, v = s².
    let s = (p.beta1() - p.beta2()) * 0.5;
    let v = s * s;
    let [w1, w2] = pot.gradient();
    let w11 = pot.partial(2, 0);
    let w12 = pot.partial(1, 1);
    let w22 = pot.partial(0, 2);
    let w_u = -(w1 + w2) * 0.5;
    let w_v = (w1 - w2) / (s * 2.0);
    let w_uu = (w11 + w12 * 2.0 + w22) * 0.25;
    let w_uv = -(w11 - w22) / (s * 4.0);
    let w_vv = (w11 - w12 * 2.0 + w22) / (v * 4.0) - (w1 - w2) / (s * v * 4.0);
    Ok(UvDerivatives {
        w_u: w_u.re,
        w_v: w_v.re,
        w_uu: w_uu.re,
        w_uv: w_uv.re,
        w_vv: w_vv.re,
    })
}

/// Sector from the zero order of `h` at `β` (equivalently of `∂^k W/∂β̄^k`).
pub fn classify_elliptic(t: &TimeVector, beta: Complex64, zero_tol: f64) -> Result<EllipticClass> {
    let pot = Potential::new(t, &RiemannPoint::elliptic(beta)?)?;
    classify_pot(&pot, zero_tol)
}

fn classify_pot(pot: &Potential, zero_tol: f64) -> Result<EllipticClass> {
    let scale = pot.taylor_scale();
    if scale == 0.0 {
        return Err(Error::AllCoefficientsVanish { invariant: 1 });
    }
    let lower = zero_tol * scale;
    let upper = 10.0 * lower;
    for (r, c) in pot.taylor(1).iter().enumerate() {
        let v = c.norm();
        if v <= lower {
            continue;
        }
        if v <= upper {
            return Err(Error::ToleranceAmbiguity {
                invariant: 1,
                order: r,
                value: v,
                lower,
                upper,
            });
        }
        return match r {
            0 => Err(Error::NotCritical { invariant: 1, value: v }),
            1 => Ok(EllipticClass::Regular),
            _ => Ok(EllipticClass::SingN(r as u32 - 1)),
        };
    }
    Err(Error::AllCoefficientsVanish { invariant: 1 })
}

fn finish(t: &TimeVector, pot: &Potential, sector: EllipticClass, n: u32, iterations: usize) -> Result<EllipticPoint> {
    let residual = (1..=n as usize + 1).map(|k| pot.pure(2, k).norm()).fold(0.0, f64::max);
    let beta = pot.point().beta1();
    Ok(EllipticPoint {
        t: t.clone(),
        beta,
        sector,
        residual,
        derivatives: (1..=4).map(|k| pot.pure(2, k).norm()).collect(),
        uv: uv_derivatives(pot)?,
        im_w: eval_w_complex(t, beta, beta.conj()).im.abs(),
        order: pot.order(),
        iterations,
    })
}

/// Rows `Re, Im` of `∂^k W/∂β̄^k` and their derivatives in `(U, V)`.
fn push_rows(pot: &Potential, k: usize, f: &mut Vec<f64>, jac: &mut Vec<[f64; 2]>) {
    let g = pot.pure(2, k);
    // d/dU = W_{1 2^k} + W_{2^{k+1}}, d/dV = i (W_{1 2^k} - W_{2^{k+1}})
    let mixed = pot.partial(1, k);
    let pure = pot.partial(0, k + 1);
    let du = mixed + pure;
    let dv = (mixed - pure) * Complex64::i();
    f.push(g.re);
    f.push(g.im);
    jac.push([du.re, dv.re]);
    jac.push([du.im, dv.im]);
}

/// Solves `∂W/∂β̄ = 0` for `β = U + iV` by Newton in `(U, V)`.
pub fn solve_elliptic(t: &TimeVector, seed: Complex64, opts: &SolveOptions) -> Result<EllipticPoint> {
    if seed.im == 0.0 || !seed.re.is_finite() || !seed.im.is_finite() {
        return Err(Error::Degenerate(format!("elliptic seed needs finite Im beta != 0, got {seed}")));
    }
    let system = |x: &[f64]| -> Result<newton::Linearization> {
        let pot = elliptic_potential(t, x[0], x[1], opts)?;
        let mut f = Vec::with_capacity(2);
        let mut jac = Vec::with_capacity(2);
        push_rows(&pot, 1, &mut f, &mut jac);
        Ok((DVector::from_vec(f), DMatrix::from_fn(2, 2, |r, c| jac[r][c])))
    };
    let report = newton::solve(system, &[seed.re, seed.im], &opts.newton_for(t))?;
    let pot = elliptic_potential(t, report.x[0], report.x[1], opts)?;
    let sector = classify_pot(&pot, opts.zero_tol)?;
    finish(t, &pot, sector, 0, report.iterations)
}

/// Solves the class-`n` system: `∂^k W/∂β̄^k = 0` for `k ≤ n + 1`, i.e.
/// `2n + 2` real equations in `(U, V)` and the `2n` free time `slots`.
pub fn solve_elliptic_singular(
    t_fixed: &TimeVector,
    n: u32,
    slots: &[usize],
    seed: Complex64,
    time_seed: Option<&[f64]>,
    opts: &SolveOptions,
) -> Result<EllipticPoint> {
    if n == 0 {
        return Err(Error::InvalidInput("singular class needs n >= 1".into()));
    }
    if slots.len() != 2 * n as usize {
        return Err(Error::BadArity {
            expected: 2 * n as usize,
            got: slots.len(),
        });
    }
    let hier = t_fixed.hierarchy();
    if slots.iter().any(|s| *s < hier.first_slot()) {
        return Err(Error::InvalidInput(format!("slot outside {hier}")));
    }
    if seed.im == 0.0 {
        return Err(Error::Degenerate("elliptic seed needs Im beta != 0".into()));
    }
    let n_eq = n as usize + 1;
    let with_times = |x: &[f64]| {
        let mut t = t_fixed.clone();
        for (s, v) in slots.iter().zip(x) {
            t.set(*s, *v);
        }
        t
    };
    let units: Vec<TimeVector> = slots
        .iter()
        .map(|s| TimeVector::unit(hier, *s))
        .collect::<Result<_>>()?;
    let rows = |pot: &Potential| -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
        let mut f = Vec::with_capacity(2 * n_eq);
        let mut jac2 = Vec::with_capacity(2 * n_eq);
        for k in 1..=n_eq {
            push_rows(pot, k, &mut f, &mut jac2);
        }
        let mut jac: Vec<Vec<f64>> = jac2.iter().map(|r| r.to_vec()).collect();
        for unit in &units {
            let up = pot.for_times(unit)?;
            for k in 1..=n_eq {
                let g = up.pure(2, k);
                jac[2 * (k - 1)].push(g.re);
                jac[2 * (k - 1) + 1].push(g.im);
            }
        }
        Ok((f, jac))
    };
    let times0 = match time_seed {
        Some(v) if v.len() == slots.len() => v.to_vec(),
        Some(v) => {
            return Err(Error::BadArity {
                expected: slots.len(),
                got: v.len(),
            })
        }
        None => {
            let mut t0 = t_fixed.clone();
            for s in slots {
                t0.set(*s, 0.0);
            }
            let pot = elliptic_potential(&t0, seed.re, seed.im, opts)?;
            let (f, jac) = rows(&pot)?;
            let g = DMatrix::from_fn(f.len(), slots.len(), |r, c| jac[r][2 + c]);
            lstsq(&g, &(-DVector::from_vec(f)))
                .ok_or_else(|| Error::Degenerate("time fit failed".into()))?
                .as_slice()
                .to_vec()
        }
    };
    let system = |x: &[f64]| -> Result<newton::Linearization> {
        let t = with_times(&x[2..]);
        let pot = elliptic_potential(&t, x[0], x[1], opts)?;
        let (f, jac) = rows(&pot)?;
        let m = f.len();
        Ok((DVector::from_vec(f), DMatrix::from_fn(m, m, |r, c| jac[r][c])))
    };
    let mut x0 = vec![seed.re, seed.im];
    x0.extend(times0);
    let report = newton::solve(system, &x0, &opts.newton_for(t_fixed))?;
    let t = with_times(&report.x[2..]);
    let pot = elliptic_potential(&t, report.x[0], report.x[1], opts)?;
    let next = pot.taylor(1).get(n as usize + 1).copied().unwrap_or_default();
    if next.norm() <= opts.zero_tol * pot.taylor_scale() {
        return Err(Error::DeeperSingularity {
            value: pot.pure(1, n as usize + 2).norm(),
        });
    }
    let sector = classify_pot(&pot, opts.zero_tol)?;
    if sector != EllipticClass::SingN(n) {
        return Err(Error::DeeperSingularity {
            value: pot.pure(1, n as usize + 2).norm(),
        });
    }
    finish(&t, &pot, sector, n, report.iterations)
}

/// Elliptic gradient catastrophe: `∂W/∂β = ∂²W/∂β² = 0`, `∂³W/∂β³ ≠ 0`,
/// solved for `β` and two free time slots.
pub fn find_catastrophe(
    t_fixed: &TimeVector,
    slots: [usize; 2],
    seed: Complex64,
    opts: &SolveOptions,
) -> Result<EllipticPoint> {
    solve_elliptic_singular(t_fixed, 1, &slots, seed, None, opts)
}

/// `W_uu`, `W_uv`, `W_vv` at a catastrophe point; all three vanish.
pub fn catastrophe_uv_conditions(p: &EllipticPoint) -> [f64; 3] {
    [p.uv.w_uu, p.uv.w_uv, p.uv.w_vv]
}

/// Coefficient of `t_n` in `W` restricted to `β = U + iV`, as an exact
/// polynomial in `(U, V)`.
pub fn uv_coefficient(n: usize) -> Poly2 {
    let table = CoeffTable::symbolic(&rat(1, 2), n);
    let c = table.poly_ab(n).expect("table has order n");
    let u = Poly2::x();
    let v2 = Poly2::y().pow(2);
    c.compose(&u, &(&u.pow(2) + &v2))
}

/// Closed forms of the `(U, V)` coefficients of `t_1, …, t_5`.
pub fn reference_uv_coefficients() -> Vec<Poly2> {
    let p = |terms: &[(u32, u32, i64, i64)]| Poly2::from_terms(terms.iter().map(|&(i, j, a, b)| (i, j, rat(a, b))));
    vec![
        p(&[(1, 0, 1, 1)]),
        p(&[(2, 0, 1, 1), (0, 2, -1, 2)]),
        p(&[(3, 0, 1, 1), (1, 2, -3, 2)]),
        p(&[(4, 0, 1, 1), (2, 2, -3, 1), (0, 4, 3, 8)]),
        p(&[(5, 0, 1, 1), (3, 2, -5, 1), (1, 4, 15, 8)]),
    ]
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UvCoefficientCheck {
    pub slot: usize,
    pub derived: String,
    pub reference: String,
    pub matches: bool,
}

/// Exact comparison of the derived and reference `(U, V)` coefficients,
/// plus the alternative `t2` coefficient `U² - V²/8` (which does not match).
pub fn uv_coefficient_report() -> (Vec<UvCoefficientCheck>, UvCoefficientCheck) {
    let vars = ["U", "V"];
    let checks = reference_uv_coefficients()
        .into_iter()
        .enumerate()
        .map(|(k, reference)| {
            let derived = uv_coefficient(k + 1);
            UvCoefficientCheck {
                slot: k + 1,
                matches: derived == reference,
                derived: derived.display_with(vars).to_string(),
                reference: reference.display_with(vars).to_string(),
            }
        })
        .collect();
    let alt = Poly2::from_terms([(2, 0, rat(1, 1)), (0, 2, rat(-1, 8))]);
    let derived = uv_coefficient(2);
    let alt_check = UvCoefficientCheck {
        slot: 2,
        matches: derived == alt,
        derived: derived.display_with(vars).to_string(),
        reference: alt.display_with(vars).to_string(),
    };
    (checks, alt_check)
}

/// `W` at `β = U + iV` from the exact `(U, V)` coefficient polynomials.
pub fn eval_w_uv(t: &TimeVector, u: f64, v: f64) -> Result<f64> {
    if t.hierarchy() != Hierarchy::Benney {
        return Err(Error::InvalidInput("the (U, V) expansion is for the Benney hierarchy".into()));
    }
    Ok(t.slots()
        .filter(|(_, c)| *c != 0.0)
        .map(|(n, c)| c * uv_coefficient(n).eval_f64(u, v))
        .sum())
}

/// Exact `(U, V²)` of the class-1 point for `t3, t4, t5` with `t5 ≠ 0`:
/// `U = -t4/(5 t5)`, `V² = 2 (t3 - 2 t4²/(5 t5)) / (5 t5)`.
pub fn catastrophe_center(t3: &BigRational, t4: &BigRational, t5: &BigRational) -> Option<(BigRational, BigRational)> {
    if t5.is_zero() {
        return None;
    }
    let five = rat(5, 1);
    let two = rat(2, 1);
    let u = -t4 / (&five * t5);
    let v2 = &two * (t3 - &two * t4 * t4 / (&five * t5)) / (&five * t5);
    Some((u, v2))
}
