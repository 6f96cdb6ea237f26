use rayon::prelude::*;
use serde::Serialize;

use super::singular::{scan_singular, solve_singular, ScanBox, SingularSeed, Unknown};
use super::{HodographPoint, SingularClass, SolveOptions};
use crate::epd::TimeVector;
use crate::error::{Error, Result};

/// Values taken by one time slot across the grid.
#[derive(Clone, Debug, PartialEq)]
pub struct GridAxis {
    pub slot: usize,
    pub values: Vec<f64>,
}

impl GridAxis {
    /// `n ≥ 2` equally spaced values from `lo` to `hi` inclusive.
    pub fn linspace(slot: usize, lo: f64, hi: f64, n: usize) -> Self {
        let values = match n {
            0 => Vec::new(),
            1 => vec![lo],
            _ => (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect(),
        };
        Self { slot, values }
    }

    pub fn reversed(&self) -> Self {
        Self {
            slot: self.slot,
            values: self.values.iter().rev().copied().collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LocusSample {
    pub branch: usize,
    pub param1: f64,
    pub param2: f64,
    /// `None` at gaps, where the continuation did not converge.
    pub point: Option<HodographPoint>,
    pub failure: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Locus {
    pub class: SingularClass,
    pub params: [String; 2],
    pub branches: usize,
    /// Grouped by branch, each branch in grid-path order.
    pub samples: Vec<LocusSample>,
}

impl Locus {
    pub fn converged(&self) -> impl Iterator<Item = &HodographPoint> {
        self.samples.iter().filter_map(|s| s.point.as_ref())
    }

    pub fn gaps(&self) -> usize {
        self.samples.iter().filter(|s| s.point.is_none()).count()
    }
}

/// Boustrophedon order over the grid, so consecutive nodes are neighbours.
fn serpentine(n1: usize, n2: usize) -> Vec<(usize, usize)> {
    let mut path = Vec::with_capacity(n1 * n2);
    for j in 0..n2 {
        if j % 2 == 0 {
            path.extend((0..n1).map(|i| (i, j)));
        } else {
            path.extend((0..n1).rev().map(|i| (i, j)));
        }
    }
    path
}

fn free_times(p: &HodographPoint, unknowns: &[Unknown]) -> Vec<f64> {
    unknowns
        .iter()
        .filter_map(|u| if let Unknown::Time(n) = u { Some(p.t.get(*n)) } else { None })
        .collect()
}

fn seed_from(p: &HodographPoint, unknowns: &[Unknown]) -> SingularSeed {
    SingularSeed {
        beta: (p.p.beta1().re, p.p.beta2().re),
        times: Some(free_times(p, unknowns)),
    }
}

/// Samples the locus of class `class` over a grid in two fixed time slots.
///
/// The first node where a coarse `β` scan converges provides the branches
/// (ordered by `β1`); each branch is then continued along a serpentine path
/// through the grid, seeding every node from the last converged sample.
/// Non-converged nodes are recorded as gaps.
pub fn trace_locus(
    t_base: &TimeVector,
    class: (u32, u32),
    unknowns: &[Unknown],
    axis1: &GridAxis,
    axis2: &GridAxis,
    opts: &SolveOptions,
) -> Result<Locus> {
    let hier = t_base.hierarchy();
    for axis in [axis1, axis2] {
        if unknowns.contains(&Unknown::Time(axis.slot)) {
            return Err(Error::InvalidInput(format!(
                "grid slot {} is also an unknown",
                hier.slot_name(axis.slot)
            )));
        }
        if axis.slot < hier.first_slot() {
            return Err(Error::InvalidInput(format!("slot {} does not exist in {hier}", axis.slot)));
        }
        if axis.values.is_empty() {
            return Err(Error::InvalidInput("empty grid axis".into()));
        }
    }
    if axis1.slot == axis2.slot {
        return Err(Error::InvalidInput("grid axes must be distinct slots".into()));
    }
    let node_times = |(i, j): (usize, usize)| {
        t_base
            .with(axis1.slot, axis1.values[i])
            .with(axis2.slot, axis2.values[j])
    };
    let path = serpentine(axis1.values.len(), axis2.values.len());

    let mut start = None;
    for (k, &node) in path.iter().enumerate() {
        let t = node_times(node);
        let found = scan_singular(&t, class, unknowns, &ScanBox::for_times(&t, unknowns), opts)?;
        if !found.is_empty() {
            start = Some((k, found));
            break;
        }
    }
    let Some((k0, roots)) = start else {
        return Err(Error::EmptyLocus);
    };

    let trace_branch = |branch: usize, root: &HodographPoint| -> Vec<(usize, LocusSample)> {
        let mut out = Vec::with_capacity(path.len());
        let mut run = |order: &mut dyn Iterator<Item = usize>| {
            let mut last = root.clone();
            for k in order {
                let (i, j) = path[k];
                let t = node_times((i, j));
                let res = solve_singular(&t, class, unknowns, &seed_from(&last, unknowns), opts);
                let sample = LocusSample {
                    branch,
                    param1: axis1.values[i],
                    param2: axis2.values[j],
                    point: res.as_ref().ok().cloned(),
                    failure: res.as_ref().err().map(|e| e.to_string()),
                };
                if let Ok(p) = res {
                    last = p;
                }
                out.push((k, sample));
            }
        };
        run(&mut (k0..path.len()));
        run(&mut (0..k0).rev());
        out.sort_by_key(|(k, _)| *k);
        out
    };

    let per_branch: Vec<Vec<(usize, LocusSample)>> = roots
        .par_iter()
        .enumerate()
        .map(|(b, root)| trace_branch(b, root))
        .collect();
    Ok(Locus {
        class: SingularClass::from_orders(class.0, class.1),
        params: [hier.slot_name(axis1.slot), hier.slot_name(axis2.slot)],
        branches: roots.len(),
        samples: per_branch.into_iter().flatten().map(|(_, s)| s).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::epd::Hierarchy;

    const XB: [Unknown; 3] = [Unknown::Time(1), Unknown::Beta1, Unknown::Beta2];

    #[test]
    fn serpentine_path_is_adjacent() {
        let p = serpentine(3, 3);
        assert_eq!(p.len(), 9);
        for w in p.windows(2) {
            let d = w[0].0.abs_diff(w[1].0) + w[0].1.abs_diff(w[1].1);
            assert_eq!(d, 1);
        }
    }

    #[test]
    fn locus_10_small_grid() {
        let t = TimeVector::new(Hierarchy::Benney, vec![0.0, 0.0, 0.0, 1.0]).unwrap();
        let a1 = GridAxis::linspace(2, -1.2, -0.8, 3);
        let a2 = GridAxis::linspace(3, 0.3, 0.6, 3);
        let locus = trace_locus(&t, (1, 0), &XB, &a1, &a2, &SolveOptions::default()).unwrap();
        assert_eq!(locus.branches, 2);
        assert_eq!(locus.samples.len(), 18);
        assert_eq!(locus.gaps(), 0);
        for p in locus.converged() {
            assert_eq!(p.sector, SingularClass::Sing(1, 0));
            assert!(p.residuals.gradient < 1e-10 && p.residuals.constraints < 1e-10);
        }
    }

    #[test]
    fn grid_slot_cannot_be_unknown() {
        let t = TimeVector::new(Hierarchy::Benney, vec![0.0, 0.0, 0.0, 1.0]).unwrap();
        let a1 = GridAxis::linspace(1, -1.0, 1.0, 2);
        let a2 = GridAxis::linspace(3, 0.3, 0.6, 2);
        assert!(matches!(
            trace_locus(&t, (1, 0), &XB, &a1, &a2, &SolveOptions::default()),
            Err(Error::InvalidInput(_))
        ));
    }
}
