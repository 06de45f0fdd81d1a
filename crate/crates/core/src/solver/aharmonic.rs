use super::boundary::BoundaryData;
use super::cg::{pcg, CgStats};
use super::fast::TensorSolver;
use crate::error::{Error, Result};
use crate::mesh::{assemble_stiffness, check_exponent, Grid, GridFunction};

/// Interior nodes held at prescribed values (zero for slit and
/// harmonic-measure problems).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Pinned {
    pub nodes: Vec<usize>,
    pub values: Vec<f64>,
}

impl Pinned {
    pub fn zero(nodes: Vec<usize>) -> Self {
        let values = vec![0.0; nodes.len()];
        Self { nodes, values }
    }

    pub fn push(&mut self, node: usize, value: f64) {
        self.nodes.push(node);
        self.values.push(value);
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Relative residual target.
    pub tol: f64,
    /// Iteration cap; `None` means `20 ×` the unknown count.
    pub max_iter: Option<usize>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: None,
        }
    }
}

/// Solves `div(|x₂|^a ∇u) = 0` with Dirichlet data `bc` and optional pinned
/// interior nodes.
pub fn solve_aharmonic(
    grid: &Grid,
    a: f64,
    bc: &BoundaryData,
    pinned: Option<&Pinned>,
) -> Result<GridFunction> {
    solve_aharmonic_with(grid, a, bc, pinned, &SolveOptions::default()).map(|(u, _)| u)
}

/// As [`solve_aharmonic`], also returning the iteration statistics.
///
/// Conjugate gradients run on the free nodes, preconditioned by the exact
/// interior inverse of [`TensorSolver`]; without pinned nodes this converges
/// in a single step.
pub fn solve_aharmonic_with(
    grid: &Grid,
    a: f64,
    bc: &BoundaryData,
    pinned: Option<&Pinned>,
    opts: &SolveOptions,
) -> Result<(GridFunction, CgStats)> {
    check_exponent(a)?;
    if bc.grid != *grid {
        return Err(Error::GridMismatch(format!(
            "boundary data for {}x{}, grid {}x{}",
            bc.grid.nx, bc.grid.ny, grid.nx, grid.ny
        )));
    }
    let k = assemble_stiffness(grid, a)?;
    let fast = TensorSolver::new(&k);
    let n = grid.len();

    // Lifted data and free-node mask.
    let mut u = vec![0.0; n];
    let mut free = vec![false; n];
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let p = grid.index(i, j);
            if grid.is_boundary(i, j) {
                u[p] = bc.values[p];
            } else {
                free[p] = true;
            }
        }
    }
    if let Some(pin) = pinned {
        if pin.nodes.len() != pin.values.len() {
            return Err(Error::InvalidParameter(
                "pinned node and value counts differ".into(),
            ));
        }
        for (&p, &v) in pin.nodes.iter().zip(&pin.values) {
            if p >= n {
                return Err(Error::InvalidParameter(format!("pinned node {p} out of range")));
            }
            free[p] = false;
            u[p] = v;
        }
    }
    let free_idx: Vec<usize> = (0..n).filter(|&p| free[p]).collect();
    let ku = k.apply(&u);
    let b: Vec<f64> = free_idx.iter().map(|&p| -ku[p]).collect();

    let mut full = vec![0.0; n];
    let mut full_out = vec![0.0; n];
    let apply = |x: &[f64], out: &mut [f64]| {
        let mut buf = vec![0.0; n];
        for (&p, &v) in free_idx.iter().zip(x) {
            buf[p] = v;
        }
        let kb = k.apply(&buf);
        for (o, &p) in out.iter_mut().zip(&free_idx) {
            *o = kb[p];
        }
    };
    let mut precond = |r: &[f64], out: &mut [f64]| {
        full.iter_mut().for_each(|v| *v = 0.0);
        for (&p, &v) in free_idx.iter().zip(r) {
            full[p] = v;
        }
        full_out.copy_from_slice(&fast.solve_full(&full));
        for (o, &p) in out.iter_mut().zip(&free_idx) {
            *o = full_out[p];
        }
    };
    let mut x = vec![0.0; free_idx.len()];
    precond(&b, &mut x);
    let max_iter = opts.max_iter.unwrap_or(20 * free_idx.len().max(1));
    let stats = pcg(apply, precond, &b, &mut x, opts.tol, max_iter)?;
    for (&p, &v) in free_idx.iter().zip(&x) {
        u[p] = v;
    }
    log::debug!(
        "a-harmonic solve on {}x{}: {} iterations, residual {:.2e}",
        grid.nx,
        grid.ny,
        stats.iterations,
        stats.residual
    );
    Ok((GridFunction::new(*grid, a, u)?, stats))
}
