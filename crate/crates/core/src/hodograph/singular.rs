use std::collections::HashSet;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::{check_merge, classify_potential, finish_point, HodographPoint, SingularClass, SolveOptions};
use crate::epd::potential::Potential;
use crate::epd::{Hierarchy, RiemannPoint, TimeVector};
use crate::error::{Error, Result};
use crate::newton::{self, lstsq};

/// One unknown of an augmented hodograph system.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Unknown {
    Beta1,
    Beta2,
    /// A time slot of the hierarchy.
    Time(usize),
}

impl Unknown {
    /// Accepts `beta1`, `beta2` and slot names of `hierarchy`.
    pub fn parse(hierarchy: Hierarchy, name: &str) -> Result<Self> {
        match name.trim() {
            "beta1" | "b1" => Ok(Unknown::Beta1),
            "beta2" | "b2" => Ok(Unknown::Beta2),
            other => hierarchy
                .parse_slot(other)
                .map(Unknown::Time)
                .ok_or_else(|| Error::InvalidInput(format!("unknown `{other}` is neither beta1, beta2 nor a {hierarchy} slot"))),
        }
    }

    pub fn name(&self, hierarchy: Hierarchy) -> String {
        match self {
            Unknown::Beta1 => "beta1".into(),
            Unknown::Beta2 => "beta2".into(),
            Unknown::Time(n) => hierarchy.slot_name(*n),
        }
    }
}

/// Starting point: both invariants, and optionally the free times in the
/// order they appear among the unknowns (fitted by least squares otherwise).
#[derive(Clone, Debug, PartialEq)]
pub struct SingularSeed {
    pub beta: (f64, f64),
    pub times: Option<Vec<f64>>,
}

impl SingularSeed {
    pub fn new(beta1: f64, beta2: f64) -> Self {
        Self {
            beta: (beta1, beta2),
            times: None,
        }
    }
}

/// The system `∂^k W/∂β_i^k = 0`, `1 ≤ k ≤ n_i + 1`, with a chosen set of unknowns.
struct System<'a> {
    base: &'a TimeVector,
    unknowns: &'a [Unknown],
    equations: Vec<(usize, usize)>,
    opts: &'a SolveOptions,
}

impl<'a> System<'a> {
    fn new(base: &'a TimeVector, class: (u32, u32), unknowns: &'a [Unknown], opts: &'a SolveOptions) -> Result<Self> {
        let (n1, n2) = class;
        let expected = (n1 + n2 + 2) as usize;
        if unknowns.len() != expected {
            return Err(Error::BadArity {
                expected,
                got: unknowns.len(),
            });
        }
        let distinct: HashSet<_> = unknowns.iter().collect();
        if distinct.len() != unknowns.len() {
            return Err(Error::InvalidInput("repeated unknown".into()));
        }
        let hier = base.hierarchy();
        for u in unknowns {
            if let Unknown::Time(n) = u {
                if *n < hier.first_slot() {
                    return Err(Error::InvalidInput(format!("slot {n} does not exist in {hier}")));
                }
            }
        }
        let mut equations: Vec<(usize, usize)> = (1..=n1 as usize + 1).map(|k| (1, k)).collect();
        equations.extend((1..=n2 as usize + 1).map(|k| (2, k)));
        Ok(Self {
            base,
            unknowns,
            equations,
            opts,
        })
    }

    fn time_slots(&self) -> Vec<usize> {
        self.unknowns
            .iter()
            .filter_map(|u| if let Unknown::Time(n) = u { Some(*n) } else { None })
            .collect()
    }

    /// Splits a state vector into `(β1, β2, t)`.
    fn unpack(&self, v: &[f64], seed: (f64, f64)) -> (f64, f64, TimeVector) {
        let (mut b1, mut b2) = seed;
        let mut t = self.base.clone();
        for (u, x) in self.unknowns.iter().zip(v) {
            match u {
                Unknown::Beta1 => b1 = *x,
                Unknown::Beta2 => b2 = *x,
                Unknown::Time(n) => t.set(*n, *x),
            }
        }
        (b1, b2, t)
    }

    fn pack(&self, b1: f64, b2: f64, times: &[f64]) -> Vec<f64> {
        let mut it = times.iter();
        self.unknowns
            .iter()
            .map(|u| match u {
                Unknown::Beta1 => b1,
                Unknown::Beta2 => b2,
                Unknown::Time(_) => *it.next().expect("one value per time unknown"),
            })
            .collect()
    }

    fn potential(&self, t: &TimeVector, b1: f64, b2: f64) -> Result<Potential> {
        check_merge(b1, b2, self.opts.merge_tol)?;
        Potential::with_order(t, &RiemannPoint::Hyperbolic(b1, b2), self.opts.order)
    }

    fn residual(&self, pot: &Potential) -> DVector<f64> {
        DVector::from_iterator(
            self.equations.len(),
            self.equations.iter().map(|&(i, k)| pot.pure(i, k).re),
        )
    }

    /// Columns `∂F/∂t_n` for every time unknown, from unit time vectors.
    fn time_columns(&self, pot: &Potential) -> Result<Vec<DVector<f64>>> {
        self.time_slots()
            .into_iter()
            .map(|n| {
                let unit = pot.for_times(&TimeVector::unit(self.base.hierarchy(), n)?)?;
                Ok(self.residual(&unit))
            })
            .collect()
    }

    fn linearize(&self, v: &[f64], seed: (f64, f64)) -> Result<newton::Linearization> {
        let (b1, b2, t) = self.unpack(v, seed);
        let pot = self.potential(&t, b1, b2)?;
        let f = self.residual(&pot);
        let m = self.equations.len();
        let mut j = DMatrix::zeros(m, self.unknowns.len());
        let mut time_cols = self.time_columns(&pot)?.into_iter();
        for (c, u) in self.unknowns.iter().enumerate() {
            match u {
                Unknown::Beta1 => {
                    for (r, &(i, k)) in self.equations.iter().enumerate() {
                        j[(r, c)] = if i == 1 { pot.partial(k + 1, 0) } else { pot.partial(1, k) }.re;
                    }
                }
                Unknown::Beta2 => {
                    for (r, &(i, k)) in self.equations.iter().enumerate() {
                        j[(r, c)] = if i == 1 { pot.partial(k, 1) } else { pot.partial(0, k + 1) }.re;
                    }
                }
                Unknown::Time(_) => j.set_column(c, &time_cols.next().expect("column per slot")),
            }
        }
        Ok((f, j))
    }

    /// Least-squares fit of the free times at fixed `β`: the system is linear in `t`.
    fn fit_times(&self, b1: f64, b2: f64) -> Result<Vec<f64>> {
        let slots = self.time_slots();
        if slots.is_empty() {
            return Ok(Vec::new());
        }
        let mut t0 = self.base.clone();
        for n in &slots {
            t0.set(*n, 0.0);
        }
        let pot = self.potential(&t0, b1, b2)?;
        let f0 = self.residual(&pot);
        let cols = self.time_columns(&pot)?;
        let g = DMatrix::from_columns(&cols);
        let tau = lstsq(&g, &(-f0)).ok_or_else(|| Error::Degenerate("time fit failed".into()))?;
        Ok(tau.as_slice().to_vec())
    }
}

/// Solves the augmented system of class `(n1, n2)`.
///
/// Needs exactly `n1 + n2 + 2` unknowns. Invariants not listed as unknowns
/// stay at their seed value; time slots not listed stay at their value in
/// `t_fixed`. The result is checked for `Δ = W^{(n1+2)}_{β1} W^{(n2+2)}_{β2} ≠ 0`
/// and classified again.
pub fn solve_singular(
    t_fixed: &TimeVector,
    class: (u32, u32),
    unknowns: &[Unknown],
    seed: &SingularSeed,
    opts: &SolveOptions,
) -> Result<HodographPoint> {
    let sys = System::new(t_fixed, class, unknowns, opts)?;
    let (s1, s2) = seed.beta;
    if !(s1.is_finite() && s2.is_finite()) {
        return Err(Error::InvalidInput("non-finite seed".into()));
    }
    let n_times = sys.time_slots().len();
    let times = match &seed.times {
        Some(v) if v.len() == n_times => v.clone(),
        Some(v) => {
            return Err(Error::BadArity {
                expected: n_times,
                got: v.len(),
            })
        }
        None => sys.fit_times(s1, s2)?,
    };
    let x0 = sys.pack(s1, s2, &times);
    let report = newton::solve(|v| sys.linearize(v, seed.beta), &x0, &opts.newton_for(t_fixed))?;
    let (b1, b2, t) = sys.unpack(&report.x, seed.beta);
    let pot = sys.potential(&t, b1, b2)?;

    let (n1, n2) = class;
    let scale = pot.taylor_scale();
    let d1 = pot.taylor(1).get(n1 as usize + 1).copied().unwrap_or_default();
    let d2 = pot.taylor(2).get(n2 as usize + 1).copied().unwrap_or_default();
    let delta = (pot.pure(1, n1 as usize + 2) * pot.pure(2, n2 as usize + 2)).re;
    if d1.norm() <= opts.zero_tol * scale || d2.norm() <= opts.zero_tol * scale {
        return Err(Error::DegenerateDelta { delta });
    }
    let expected = SingularClass::from_orders(n1, n2);
    if classify_potential(&pot, opts.zero_tol)? != expected {
        return Err(Error::DegenerateDelta { delta });
    }
    Ok(finish_point(&t, &pot, expected, report.iterations))
}

/// Rectangular seed grid for `(β1, β2)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanBox {
    pub lo: f64,
    pub hi: f64,
    /// Nodes per axis.
    pub n: usize,
}

impl ScanBox {
    /// Symmetric box sized from the root bound of `h` for the fixed times.
    pub fn for_times(t: &TimeVector, unknowns: &[Unknown]) -> Self {
        let free: HashSet<usize> = unknowns
            .iter()
            .filter_map(|u| if let Unknown::Time(n) = u { Some(*n) } else { None })
            .collect();
        let fixed: Vec<(usize, f64)> = t.slots().filter(|(n, v)| *v != 0.0 && !free.contains(n)).collect();
        let mut r: f64 = 1.0;
        if let Some(&(top, lead)) = fixed.last() {
            for &(n, v) in &fixed[..fixed.len() - 1] {
                r = r.max((v / lead).abs().powf(1.0 / (top - n) as f64));
            }
        }
        Self {
            lo: -2.0 * r,
            hi: 2.0 * r,
            n: 14,
        }
    }

    fn nodes(&self) -> Vec<(f64, f64)> {
        let step = (self.hi - self.lo) / self.n as f64;
        let at = |i: usize| self.lo + (i as f64 + 0.5) * step;
        let mut out = Vec::with_capacity(self.n * self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                if i != j {
                    out.push((at(i), at(j)));
                }
            }
        }
        out
    }
}

fn same_point(a: &HodographPoint, b: &HodographPoint) -> bool {
    let close = |x: f64, y: f64| (x - y).abs() <= 1e-7 * (1.0 + x.abs().max(y.abs()));
    let (a1, a2) = (a.p.beta1().re, a.p.beta2().re);
    let (b1, b2) = (b.p.beta1().re, b.p.beta2().re);
    close(a1, b1) && close(a2, b2) && a.t.values().iter().zip(b.t.values()).all(|(x, y)| close(*x, *y))
}

/// All distinct solutions of class `class` reachable from a grid of seeds,
/// sorted by `β1`. Both invariants must be unknowns.
pub fn scan_singular(
    t_fixed: &TimeVector,
    class: (u32, u32),
    unknowns: &[Unknown],
    scan: &ScanBox,
    opts: &SolveOptions,
) -> Result<Vec<HodographPoint>> {
    // Validate arity before the scan so input errors are not swallowed.
    System::new(t_fixed, class, unknowns, opts)?;
    if !(unknowns.contains(&Unknown::Beta1) && unknowns.contains(&Unknown::Beta2)) {
        return Err(Error::InvalidInput("a beta scan needs beta1 and beta2 among the unknowns".into()));
    }
    let found: Vec<HodographPoint> = scan
        .nodes()
        .par_iter()
        .filter_map(|&(b1, b2)| solve_singular(t_fixed, class, unknowns, &SingularSeed::new(b1, b2), opts).ok())
        .collect();
    let mut distinct: Vec<HodographPoint> = Vec::new();
    for p in found {
        if !distinct.iter().any(|q| same_point(q, &p)) {
            distinct.push(p);
        }
    }
    distinct.sort_by(|a, b| a.p.beta1().re.total_cmp(&b.p.beta1().re));
    Ok(distinct)
}
