//! Closed-form singular points for `t = (x, t2, t3, t4)` compared against
//! the solver. Two of the printed formulas contain typographical slips; both
//! the printed and the corrected variant are evaluated and reported.

use serde::Serialize;

use super::singular::{scan_singular, ScanBox, Unknown};
use super::{HodographPoint, SingularClass, SolveOptions};
use crate::epd::{Hierarchy, TimeVector};
use crate::error::{Error, Result};

/// Agreement threshold between a formula and a solver point.
const MATCH_TOL: f64 = 1e-8;

/// `(x, β1, β2)` predicted by one closed-form branch.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BranchFormula {
    pub x: f64,
    pub beta1: f64,
    pub beta2: f64,
}

impl BranchFormula {
    fn distance(&self, p: &HodographPoint) -> f64 {
        let dx = (self.x - p.t.get(1)).abs();
        let d1 = (self.beta1 - p.p.beta1().re).abs();
        let d2 = (self.beta2 - p.p.beta2().re).abs();
        dx.max(d1).max(d2)
    }

    fn min_distance(&self, points: &[HodographPoint]) -> f64 {
        points.iter().map(|p| self.distance(p)).fold(f64::INFINITY, f64::min)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ItemComparison {
    pub item: u8,
    pub printed: BranchFormula,
    pub corrected: BranchFormula,
    /// Description of the correction, when the printed form differs.
    pub correction: Option<&'static str>,
    /// Distance to the nearest solver point of the same class.
    pub printed_error: f64,
    pub corrected_error: f64,
    pub printed_matches: bool,
    pub corrected_matches: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassComparison {
    pub class: SingularClass,
    pub solver_points: Vec<HodographPoint>,
    pub items: Vec<ItemComparison>,
    /// Every solver point is reproduced by at least one corrected formula.
    pub all_points_matched: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClosedFormReport {
    pub t2: f64,
    pub t3: f64,
    pub t4: f64,
    /// `t4² (3 t3² - 8 t2 t4)`.
    pub radicand: f64,
    /// Radicand zero: the branches merge onto `β1 = β2`.
    pub degenerate: bool,
    pub classes: Vec<ClassComparison>,
    /// One line per formula whose printed form disagrees with the solver.
    pub discrepancies: Vec<String>,
}

impl ClosedFormReport {
    pub fn all_matched(&self) -> bool {
        self.classes.iter().all(|c| c.all_points_matched && !c.solver_points.is_empty())
    }
}

struct Formulas {
    printed: [BranchFormula; 4],
    corrected: [BranchFormula; 4],
}

fn formulas(t2: f64, t3: f64, t4: f64) -> Formulas {
    let core = 3.0 * t3 * t3 - 8.0 * t2 * t4;
    let r = (t4 * t4 * core).max(0.0).sqrt();
    let r_slip = (t3 * t3 * core).max(0.0).sqrt();
    let s15 = 15f64.sqrt();
    let k = 8.0 * t2 * t4 - 3.0 * t3 * t3;
    let den_x = 360.0 * t4.powi(3);
    let x_with = |mid: f64, sign: f64| (-45.0 * t4 * t3.powi(3) + mid + sign * s15 * k * r) / den_x;
    let mid = 180.0 * t2 * t4 * t4 * t3;
    let mid_slip = 180.0 * t2 * t3 * t3 * t3;
    let xp = x_with(mid, 1.0);
    let xm = x_with(mid, -1.0);
    let d20 = 20.0 * t4 * t4;
    let d12 = 12.0 * t4 * t4;
    let neg5 = -(5.0 * t3 * t4 + s15 * r) / d20;
    let pos5 = (-5.0 * t3 * t4 + s15 * r) / d20;
    let neg3 = -(3.0 * t3 * t4 + s15 * r) / d12;
    let pos3 = (-3.0 * t3 * t4 + s15 * r) / d12;
    let f = |x, beta1, beta2| BranchFormula { x, beta1, beta2 };
    let corrected = [f(xp, neg5, pos3), f(xm, pos5, neg3), f(xm, neg3, pos5), f(xp, pos3, neg5)];
    let mut printed = corrected;
    printed[0].beta2 = (-3.0 * t3 * t4 + s15 * r_slip) / d12;
    printed[1].x = x_with(mid_slip, -1.0);
    Formulas { printed, corrected }
}

const CORRECTIONS: [Option<&str>; 4] = [
    Some("beta2 radicand t3^2(3t3^2-8t2t4) read as t4^2(3t3^2-8t2t4)"),
    Some("x term 180 t2 t3^2 t3 read as 180 t2 t4^2 t3"),
    None,
    None,
];

/// Evaluates the four closed-form branches of the classes `(1,0)` and `(0,1)`
/// at `(t2, t3, t4)` and compares them with points found by the singular
/// solver, which is the reference.
pub fn compare_closed_forms(t2: f64, t3: f64, t4: f64, opts: &SolveOptions) -> Result<ClosedFormReport> {
    if ![t2, t3, t4].iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidInput("non-finite time".into()));
    }
    if t4 == 0.0 {
        return Err(Error::InvalidInput("the closed forms need t4 != 0".into()));
    }
    let core = 3.0 * t3 * t3 - 8.0 * t2 * t4;
    let radicand = t4 * t4 * core;
    let size = 3.0 * t3 * t3 + 8.0 * (t2 * t4).abs();
    let degenerate = core.abs() <= 1e-12 * size || core == 0.0;
    if !degenerate && radicand < 0.0 {
        return Err(Error::RadicandNegative { radicand });
    }
    let fs = formulas(t2, t3, t4);
    let t = TimeVector::new(Hierarchy::Benney, vec![0.0, t2, t3, t4])?;
    let unknowns = [Unknown::Time(1), Unknown::Beta1, Unknown::Beta2];
    let scan = ScanBox::for_times(&t, &unknowns);

    let mut classes = Vec::with_capacity(2);
    let mut discrepancies = Vec::new();
    for (class, items) in [((1, 0), [0usize, 1]), ((0, 1), [2, 3])] {
        let points = if degenerate {
            Vec::new()
        } else {
            scan_singular(&t, class, &unknowns, &scan, opts)?
        };
        let mut comparisons = Vec::with_capacity(2);
        for idx in items {
            let printed = fs.printed[idx];
            let corrected = fs.corrected[idx];
            let printed_error = printed.min_distance(&points);
            let corrected_error = corrected.min_distance(&points);
            let cmp = ItemComparison {
                item: idx as u8 + 1,
                printed,
                corrected,
                correction: CORRECTIONS[idx],
                printed_error,
                corrected_error,
                printed_matches: printed_error <= MATCH_TOL,
                corrected_matches: corrected_error <= MATCH_TOL,
            };
            if !degenerate && !cmp.printed_matches {
                discrepancies.push(format!(
                    "item {}: printed formula gives (x, beta1, beta2) = ({:.12}, {:.12}, {:.12}), {:.3e} from the nearest solver point{}",
                    cmp.item,
                    printed.x,
                    printed.beta1,
                    printed.beta2,
                    printed_error,
                    match (cmp.correction, cmp.corrected_matches) {
                        (Some(c), true) => format!("; matches after correction ({c})"),
                        (Some(c), false) => format!("; still off after correction ({c})"),
                        (None, _) => String::new(),
                    }
                ));
            }
            comparisons.push(cmp);
        }
        let all_points_matched = points
            .iter()
            .all(|p| items.iter().any(|&i| fs.corrected[i].distance(p) <= MATCH_TOL));
        classes.push(ClassComparison {
            class: SingularClass::from_orders(class.0, class.1),
            solver_points: points,
            items: comparisons,
            all_points_matched,
        });
    }
    Ok(ClosedFormReport {
        t2,
        t3,
        t4,
        radicand,
        degenerate,
        classes,
        discrepancies,
    })
}
