//! Finite-difference checks that hodograph solutions `β(x, t_n)` solve the
//! diagonal flows `∂_{t_n} β_i = c_i(β) ∂_x β_i` and, in `(u, v)`, the
//! Benney and dToda systems.

use rayon::prelude::*;
use serde::Serialize;

use crate::epd::potential::flow_speed;
use crate::epd::{Hierarchy, RiemannPoint, TimeVector};
use crate::error::{Error, Result};
use crate::hodograph::{scan_singular, solve_regular, ScanBox, SolveOptions, Unknown};

/// Grid in `(x, t_n)`: `nx × nt` nodes, finite-difference step `h`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FlowGrid {
    pub x: (f64, f64),
    pub nx: usize,
    pub t: (f64, f64),
    pub nt: usize,
    pub h: f64,
}

impl FlowGrid {
    /// Step defaults to `1e-3` of the larger patch width.
    pub fn new(x: (f64, f64), nx: usize, t: (f64, f64), nt: usize) -> Self {
        let width = (x.1 - x.0).abs().max((t.1 - t.0).abs());
        let h = if width > 0.0 { 1e-3 * width } else { 1e-3 };
        Self { x, nx, t, nt, h }
    }

    pub fn with_step(self, h: f64) -> Self {
        Self { h, ..self }
    }

    fn axis(range: (f64, f64), n: usize) -> Vec<f64> {
        match n {
            0 => Vec::new(),
            1 => vec![range.0],
            _ => (0..n).map(|k| range.0 + (range.1 - range.0) * k as f64 / (n - 1) as f64).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlowNode {
    pub x: f64,
    pub t: f64,
    pub beta: (f64, f64),
    /// `∂_t β_i - c_i ∂_x β_i` by centered differences.
    pub residual: [f64; 2],
    /// Residuals of the `(u, v)` system, where one is defined for the flow.
    pub uv_residual: Option<[f64; 2]>,
    pub v: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlowReport {
    pub hierarchy: Hierarchy,
    pub flow: String,
    pub h: f64,
    pub nodes: Vec<FlowNode>,
    /// Max over nodes and invariants of the diagonal residual.
    pub max_residual: f64,
    pub max_uv_residual: Option<f64>,
    /// `v > 0` at every node.
    pub hyperbolic: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlowConvergence {
    pub coarse: FlowReport,
    pub fine: FlowReport,
    /// `log2` of the ratio of max residuals under `h → h/2`.
    pub order: f64,
    /// Same for the `(u, v)` residuals.
    pub uv_order: Option<f64>,
}

struct Flow<'a> {
    base: &'a TimeVector,
    slot: usize,
    opts: &'a SolveOptions,
}

impl Flow<'_> {
    fn times(&self, x: f64, t: f64) -> TimeVector {
        let xs = self.base.hierarchy().x_slot();
        let mut out = self.base.with(xs, x);
        if self.slot == xs {
            out.set(xs, x + t);
        } else {
            out.set(self.slot, t);
        }
        out
    }

    fn solve(&self, x: f64, t: f64, seed: &RiemannPoint) -> Result<(f64, f64)> {
        let pt = solve_regular(&self.times(x, t), seed, self.opts).map_err(|e| Error::GridCrossesSingularity {
            x,
            t,
            source: Box::new(e),
        })?;
        Ok((pt.p.beta1().re, pt.p.beta2().re))
    }

    fn first_seed(&self, x: f64, t: f64) -> Result<RiemannPoint> {
        let times = self.times(x, t);
        let unknowns = [Unknown::Beta1, Unknown::Beta2];
        let roots = scan_singular(&times, (0, 0), &unknowns, &ScanBox::for_times(&times, &unknowns), self.opts)?;
        roots.first().map(|p| p.p).ok_or(Error::GridCrossesSingularity {
            x,
            t,
            source: Box::new(Error::EmptyLocus),
        })
    }

    fn node(&self, x: f64, t: f64, centre: (f64, f64), h: f64) -> Result<FlowNode> {
        let seed = RiemannPoint::Hyperbolic(centre.0, centre.1);
        let xp = self.solve(x + h, t, &seed)?;
        let xm = self.solve(x - h, t, &seed)?;
        let tp = self.solve(x, t + h, &seed)?;
        let tm = self.solve(x, t - h, &seed)?;
        let dx = ((xp.0 - xm.0) / (2.0 * h), (xp.1 - xm.1) / (2.0 * h));
        let dt = ((tp.0 - tm.0) / (2.0 * h), (tp.1 - tm.1) / (2.0 * h));
        let hier = self.base.hierarchy();
        let p = RiemannPoint::Hyperbolic(centre.0, centre.1);
        let c1 = flow_speed(hier, self.slot, &p, 1)?;
        let c2 = flow_speed(hier, self.slot, &p, 2)?;
        let residual = [dt.0 - c1 * dx.0, dt.1 - c2 * dx.1];

        let (b1, b2) = centre;
        let u = -(b1 + b2);
        let v = 0.25 * (b1 - b2) * (b1 - b2);
        let u_x = -(dx.0 + dx.1);
        let u_t = -(dt.0 + dt.1);
        let v_x = 0.5 * (b1 - b2) * (dx.0 - dx.1);
        let v_t = 0.5 * (b1 - b2) * (dt.0 - dt.1);
        let uv_residual = match (hier, self.slot) {
            (Hierarchy::Benney, 2) => Some([u_t + u * u_x + v_x, v_t + u_x * v + u * v_x]),
            (Hierarchy::DToda, 1) => Some([u_t + v_x, v_t + v * u_x]),
            _ => None,
        };
        Ok(FlowNode {
            x,
            t,
            beta: centre,
            residual,
            uv_residual,
            v,
        })
    }

    fn run(&self, grid: &FlowGrid, seed: Option<RiemannPoint>) -> Result<FlowReport> {
        let hier = self.base.hierarchy();
        if grid.h <= 0.0 || !grid.h.is_finite() {
            return Err(Error::InvalidInput(format!("step h = {} must be positive", grid.h)));
        }
        let xs = FlowGrid::axis(grid.x, grid.nx);
        let ts = FlowGrid::axis(grid.t, grid.nt);
        if xs.is_empty() || ts.is_empty() {
            return Err(Error::InvalidInput("empty flow grid".into()));
        }
        let mut seed = match seed {
            Some(s) => s,
            None => self.first_seed(xs[0], ts[0])?,
        };
        // Continuation pass over a serpentine path for the node centres.
        let mut centres = Vec::with_capacity(xs.len() * ts.len());
        for (j, &t) in ts.iter().enumerate() {
            let row: Vec<usize> = if j % 2 == 0 {
                (0..xs.len()).collect()
            } else {
                (0..xs.len()).rev().collect()
            };
            for i in row {
                let c = self.solve(xs[i], t, &seed)?;
                seed = RiemannPoint::Hyperbolic(c.0, c.1);
                centres.push((xs[i], t, c));
            }
        }
        let nodes: Vec<FlowNode> = centres
            .par_iter()
            .map(|&(x, t, c)| self.node(x, t, c, grid.h))
            .collect::<Result<_>>()?;
        let max_residual = nodes
            .iter()
            .flat_map(|n| n.residual)
            .fold(0.0_f64, |m, r| m.max(r.abs()));
        let max_uv_residual = nodes
            .iter()
            .map(|n| n.uv_residual.map(|r| r[0].abs().max(r[1].abs())))
            .collect::<Option<Vec<f64>>>()
            .map(|v| v.into_iter().fold(0.0, f64::max));
        Ok(FlowReport {
            hierarchy: hier,
            flow: hier.slot_name(self.slot),
            h: grid.h,
            hyperbolic: nodes.iter().all(|n| n.v > 0.0),
            nodes,
            max_residual,
            max_uv_residual,
        })
    }
}

fn flow_residual(
    hierarchy: Hierarchy,
    n: usize,
    base: &TimeVector,
    grid: &FlowGrid,
    seed: Option<RiemannPoint>,
    opts: &SolveOptions,
) -> Result<FlowReport> {
    if base.hierarchy() != hierarchy {
        return Err(Error::InvalidInput(format!(
            "time vector is {}, expected {hierarchy}",
            base.hierarchy()
        )));
    }
    if n < hierarchy.first_slot() {
        return Err(Error::InvalidInput(format!("no flow {n} in {hierarchy}")));
    }
    Flow { base, slot: n, opts }.run(grid, seed)
}

/// Residuals of `∂_{t_n} β_i = c_i ∂_x β_i` on a Benney grid in `(x, t_n)`.
pub fn benney_flow_residual(
    n: usize,
    base: &TimeVector,
    grid: &FlowGrid,
    seed: Option<RiemannPoint>,
    opts: &SolveOptions,
) -> Result<FlowReport> {
    flow_residual(Hierarchy::Benney, n, base, grid, seed, opts)
}

/// Residuals of the `x_n` flow on a dToda grid in `(x_0, x_n)`.
pub fn dtoda_flow_residual(
    n: usize,
    base: &TimeVector,
    grid: &FlowGrid,
    seed: Option<RiemannPoint>,
    opts: &SolveOptions,
) -> Result<FlowReport> {
    flow_residual(Hierarchy::DToda, n, base, grid, seed, opts)
}

/// Runs the grid at `h` and `h/2` and estimates the order of the residual.
pub fn flow_convergence(
    n: usize,
    base: &TimeVector,
    grid: &FlowGrid,
    seed: Option<RiemannPoint>,
    opts: &SolveOptions,
) -> Result<FlowConvergence> {
    let hier = base.hierarchy();
    let coarse = flow_residual(hier, n, base, grid, seed, opts)?;
    let fine = flow_residual(hier, n, base, &grid.with_step(grid.h / 2.0), seed, opts)?;
    let order = (coarse.max_residual / fine.max_residual).log2();
    let uv_order = match (coarse.max_uv_residual, fine.max_uv_residual) {
        (Some(a), Some(b)) => Some((a / b).log2()),
        _ => None,
    };
    Ok(FlowConvergence {
        coarse,
        fine,
        order,
        uv_order,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SliceSample {
    pub x: f64,
    pub beta1: f64,
    pub beta2: f64,
}

/// `β(x)` at `t2 = 0` for the initial data fixed by `t3`, `t4`.
pub fn initial_data_slice(
    t3: f64,
    t4: f64,
    x: (f64, f64),
    n: usize,
    seed: Option<RiemannPoint>,
    opts: &SolveOptions,
) -> Result<Vec<SliceSample>> {
    let base = TimeVector::new(Hierarchy::Benney, vec![0.0, 0.0, t3, t4])?;
    let flow = Flow {
        base: &base,
        slot: 2,
        opts,
    };
    let xs = FlowGrid::axis(x, n);
    let Some(&x0) = xs.first() else {
        return Err(Error::InvalidInput("empty x range".into()));
    };
    let mut seed = match seed {
        Some(s) => s,
        None => flow.first_seed(x0, 0.0)?,
    };
    xs.iter()
        .map(|&x| {
            let (b1, b2) = flow.solve(x, 0.0, &seed)?;
            seed = RiemannPoint::Hyperbolic(b1, b2);
            Ok(SliceSample { x, beta1: b1, beta2: b2 })
        })
        .collect()
}

/// Largest gap between one explicit Euler step `β + dt c(β) β_x` from the
/// slice and the direct hodograph solution at `t2 = dt`; it is `O(dt²)`.
pub fn evolve_slice_check(
    t3: f64,
    t4: f64,
    slice: &[SliceSample],
    dt: f64,
    opts: &SolveOptions,
) -> Result<f64> {
    let base = TimeVector::new(Hierarchy::Benney, vec![0.0, 0.0, t3, t4])?;
    let flow = Flow {
        base: &base,
        slot: 2,
        opts,
    };
    let h = 1e-4;
    let mut worst: f64 = 0.0;
    for s in slice {
        let seed = RiemannPoint::Hyperbolic(s.beta1, s.beta2);
        let xp = flow.solve(s.x + h, 0.0, &seed)?;
        let xm = flow.solve(s.x - h, 0.0, &seed)?;
        let bx = ((xp.0 - xm.0) / (2.0 * h), (xp.1 - xm.1) / (2.0 * h));
        let c1 = flow_speed(Hierarchy::Benney, 2, &seed, 1)?;
        let c2 = flow_speed(Hierarchy::Benney, 2, &seed, 2)?;
        let stepped = (s.beta1 + dt * c1 * bx.0, s.beta2 + dt * c2 * bx.1);
        let direct = flow.solve(s.x, dt, &seed)?;
        worst = worst.max((stepped.0 - direct.0).abs()).max((stepped.1 - direct.1).abs());
    }
    Ok(worst)
}
