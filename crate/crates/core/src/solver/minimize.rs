//! Minimization of `J` by continuation in the smoothing width.
//!
//! For a fixed thin trace the Dirichlet part is minimized by the discrete
//! a-harmonic extension, so the problem reduces exactly to the interior thin
//! nodes:
//!
//! ```text
//! J_ε(t) = E* + (t - t*)ᵀ S (t - t*) + Σ mᵢ φ_ε(tᵢ)
//! ```
//!
//! where `t*` and `E*` are the trace and energy of the a-harmonic extension of
//! the boundary data and `S` is the thin Schur complement. Each stage runs a
//! Newton-type descent on this reduced functional with Armijo backtracking.

use nalgebra::{DMatrix, DVector};

use super::aharmonic::{solve_aharmonic_with, SolveOptions};
use super::boundary::BoundaryData;
use super::fast::{TensorSolver, ThinReduction};
use crate::energy::{phase_density, total_energy, EnergyBreakdown, SmoothingSchedule};
use crate::error::{Error, Result};
use crate::mesh::{accumulate_linear, assemble_stiffness, Grid, GridFunction, PhaseMeasure, ProblemParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimizeOptions {
    /// Stage stops when `‖∇J_ε‖ ≤ descent_tol · (1 + |J_ε|)`.
    pub descent_tol: f64,
    /// Relative residual of the initial a-harmonic solve.
    pub cg_tol: f64,
    /// Iteration cap per stage.
    pub max_iterations: usize,
    /// After the last stage, snap near-zero trace values to zero and improve
    /// the resulting coincidence set node by node.
    pub polish: bool,
    /// Cap on accepted coincidence-set moves.
    pub max_moves: usize,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self {
            descent_tol: 1e-8,
            cg_tol: 1e-10,
            max_iterations: 500,
            polish: true,
            max_moves: 4096,
        }
    }
}

/// Descent history of one smoothing stage.
#[derive(Debug, Clone, PartialEq)]
pub struct StageReport {
    pub eps: f64,
    pub iterations: usize,
    /// `J_ε` after the stage.
    pub energy: f64,
    pub gradient_norm: f64,
    pub converged: bool,
    /// The step fell below `1e-14` before the gradient test was met.
    pub line_search_failed: bool,
    /// `J_ε` after every accepted step, starting with the initial value.
    pub history: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct MinimizerResult {
    pub u: GridFunction,
    pub energy: EnergyBreakdown,
    /// Exact energy of the a-harmonic extension of the boundary data.
    pub initial_energy: EnergyBreakdown,
    pub stages: Vec<StageReport>,
    /// Largest `|K u|` over interior nodes off the thin row and thin nodes
    /// with `|u| > 0.1 h^s`.
    pub residual_off_coincidence: f64,
    /// Whether the final trace came from the coincidence projection.
    pub polished: bool,
    /// Accepted single-node changes of the coincidence set.
    pub coincidence_moves: usize,
}

impl MinimizerResult {
    /// True when some stage ended on a failed line search.
    pub fn has_warnings(&self) -> bool {
        self.stages.iter().any(|s| s.line_search_failed)
    }
}

struct Reduced<'a> {
    red: &'a ThinReduction,
    t_star: Vec<f64>,
    e_star: f64,
    mass: f64,
    end_traces: [f64; 2],
    p: ProblemParams,
}

impl Reduced<'_> {
    fn delta(&self, t: &[f64]) -> Vec<f64> {
        t.iter().zip(&self.t_star).map(|(a, b)| a - b).collect()
    }

    fn energy(&self, t: &[f64], eps: f64) -> f64 {
        let quad = self.red.energy(&self.delta(t));
        let phase: f64 = t.iter().map(|&ti| phase_density(ti, &self.p, eps).0).sum::<f64>();
        let ends: f64 = self
            .end_traces
            .iter()
            .map(|&ti| phase_density(ti, &self.p, eps).0)
            .sum();
        self.e_star + quad + self.mass * phase + 0.5 * self.mass * ends
    }

    fn gradient(&self, t: &[f64], eps: f64) -> Vec<f64> {
        let sd = self.red.apply(&self.delta(t));
        sd.iter()
            .zip(t)
            .map(|(s, &ti)| 2.0 * s + self.mass * phase_density(ti, &self.p, eps).1)
            .collect()
    }

    /// Newton direction, falling back to the curvature-clipped Hessian when
    /// the true one is indefinite.
    fn direction(&self, t: &[f64], g: &[f64], eps: f64) -> Vec<f64> {
        let n = t.len();
        let curv: Vec<f64> = t
            .iter()
            .map(|&ti| self.mass * phase_density(ti, &self.p, eps).2)
            .collect();
        let rhs = DVector::from_iterator(n, g.iter().map(|v| -v));
        let build = |clip: bool| {
            let mut h: DMatrix<f64> = &self.red.schur * 2.0;
            for (i, c) in curv.iter().enumerate() {
                h[(i, i)] += if clip { c.max(0.0) } else { *c };
            }
            h
        };
        let chol = build(false)
            .cholesky()
            .or_else(|| build(true).cholesky())
            .expect("clipped Hessian is positive definite");
        chol.solve(&rhs).as_slice().to_vec()
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn run_stage(reduced: &Reduced, t: &mut Vec<f64>, eps: f64, opts: &MinimizeOptions) -> StageReport {
    let mut energy = reduced.energy(t, eps);
    let mut history = vec![energy];
    let mut g = reduced.gradient(t, eps);
    let mut gnorm = norm(&g);
    let mut iterations = 0;
    let mut converged = gnorm <= opts.descent_tol * (1.0 + energy.abs());
    let mut line_search_failed = false;
    while !converged && iterations < opts.max_iterations {
        iterations += 1;
        let mut d = reduced.direction(t, &g, eps);
        let mut slope: f64 = d.iter().zip(&g).map(|(a, b)| a * b).sum();
        if !(slope < 0.0) {
            d = g.iter().map(|v| -v).collect();
            slope = -gnorm * gnorm;
        }
        let mut step = 1.0;
        let accepted = loop {
            let trial: Vec<f64> = t.iter().zip(&d).map(|(a, b)| a + step * b).collect();
            let e = reduced.energy(&trial, eps);
            if e <= energy + 1e-4 * step * slope {
                break Some((trial, e));
            }
            step *= 0.5;
            if step < 1e-14 {
                break None;
            }
        };
        match accepted {
            Some((trial, e)) => {
                *t = trial;
                energy = e;
                history.push(e);
                g = reduced.gradient(t, eps);
                gnorm = norm(&g);
                converged = gnorm <= opts.descent_tol * (1.0 + energy.abs());
            }
            None => {
                line_search_failed = true;
                log::warn!("line search failed at eps = {eps:.3e} after {iterations} iterations");
                break;
            }
        }
    }
    StageReport {
        eps,
        iterations,
        energy,
        gradient_norm: gnorm,
        converged,
        line_search_failed,
        history,
    }
}

/// Minimizes `J` over fields with boundary values `bc`.
pub fn minimize(
    p: &ProblemParams,
    bc: &BoundaryData,
    sched: &SmoothingSchedule,
    grid: &Grid,
) -> Result<MinimizerResult> {
    minimize_with(p, bc, sched, grid, &MinimizeOptions::default())
}

pub fn minimize_with(
    p: &ProblemParams,
    bc: &BoundaryData,
    sched: &SmoothingSchedule,
    grid: &Grid,
    opts: &MinimizeOptions,
) -> Result<MinimizerResult> {
    if bc.grid != *grid {
        return Err(Error::GridMismatch("boundary data built for another grid".into()));
    }
    let solve_opts = SolveOptions {
        tol: opts.cg_tol,
        max_iter: None,
    };
    let (u0, _) = solve_aharmonic_with(grid, p.a, bc, None, &solve_opts)?;
    let k = assemble_stiffness(grid, p.a)?;
    let fast = TensorSolver::new(&k);
    let red = fast.thin_reduction();
    let nx = grid.nx;
    let j0 = grid.thin_row();
    let trace0 = u0.thin_trace().to_vec();
    let reduced = Reduced {
        red: &red,
        t_star: trace0[1..nx - 1].to_vec(),
        e_star: k.energy(&u0.values),
        mass: grid.h(),
        end_traces: [trace0[0], trace0[nx - 1]],
        p: *p,
    };

    let build = |t: &[f64]| -> Result<GridFunction> {
        let interior = red.extend(&reduced.delta(t));
        let ext = fast.extend(&interior);
        let values = u0.values.iter().zip(&ext).map(|(a, b)| a + b).collect();
        let mut u = u0.with_values(values)?;
        // Keep the thin row bit-exact.
        u.values[j0 * nx + 1..j0 * nx + nx - 1].copy_from_slice(t);
        Ok(u)
    };

    let mut t = reduced.t_star.clone();
    let mut stages = Vec::new();
    for eps in sched.stages() {
        let report = run_stage(&reduced, &mut t, eps, opts);
        log::debug!(
            "stage eps={:.3e}: {} iterations, J_eps={:.10e}, |g|={:.2e}",
            eps,
            report.iterations,
            report.energy,
            report.gradient_norm
        );
        stages.push(report);
    }

    let initial_energy = total_energy(&u0, p)?;
    let mut best_t = t.clone();
    let mut best_e = reduced.exact_energy(&t);
    let mut polished = false;
    let mut moves = 0;
    if opts.polish {
        for frac in [0.25, 0.5, 1.0] {
            let theta = frac * sched.eps_end;
            let zero: Vec<bool> = t.iter().map(|v| v.abs() <= theta).collect();
            if let Some(cand) = reduced.project(&zero) {
                let e = reduced.exact_energy(&cand);
                if e < best_e {
                    best_e = e;
                    best_t = cand;
                    polished = true;
                }
            }
        }
        let (t_local, e_local, m) = reduced.coincidence_search(&best_t, best_e, opts.max_moves);
        if m > 0 {
            best_t = t_local;
            best_e = e_local;
            polished = true;
            moves = m;
        }
    }
    let (best_u, best) = if initial_energy.total < best_e {
        polished = false;
        (u0.clone(), initial_energy)
    } else {
        let u = build(&best_t)?;
        let e = total_energy(&u, p)?;
        (u, e)
    };

    let tau = 0.1 * grid.h().powf(p.s());
    let r = k.apply(&best_u.values);
    let mut residual: f64 = 0.0;
    for jj in 1..grid.ny - 1 {
        for ii in 1..nx - 1 {
            let q = grid.index(ii, jj);
            if jj != j0 || best_u.values[q].abs() > tau {
                residual = residual.max(r[q].abs());
            }
        }
    }
    Ok(MinimizerResult {
        u: best_u,
        energy: best,
        initial_energy,
        stages,
        residual_off_coincidence: residual,
        polished,
        coincidence_moves: moves,
    })
}

impl Reduced<'_> {
    /// Exact `J` of the extension of trace `t`.
    fn exact_energy(&self, t: &[f64]) -> f64 {
        let mut m = PhaseMeasure::default();
        let mut prev = self.end_traces[0];
        for &v in t.iter().chain(std::iter::once(&self.end_traces[1])) {
            accumulate_linear(&mut m, prev, v, self.mass);
            prev = v;
        }
        self.e_star
            + self.red.energy(&self.delta(t))
            + self.p.lambda_plus * m.positive
            + self.p.lambda_minus * m.negative
    }

    /// Trace vanishing on `zero` that minimizes the Dirichlet energy:
    /// `δ_Z = -t*_Z`, `S_FF δ_F = -S_FZ δ_Z`. `None` when `zero` is empty.
    fn project(&self, zero: &[bool]) -> Option<Vec<f64>> {
        if !zero.iter().any(|&z| z) {
            return None;
        }
        let free: Vec<usize> = (0..zero.len()).filter(|&i| !zero[i]).collect();
        let s = &self.red.schur;
        let mut out = vec![0.0; zero.len()];
        if !free.is_empty() {
            let nf = free.len();
            let sff = DMatrix::from_fn(nf, nf, |i, j| s[(free[i], free[j])]);
            let rhs = DVector::from_fn(nf, |i, _| {
                (0..zero.len())
                    .filter(|&z| zero[z])
                    .map(|z| s[(free[i], z)] * self.t_star[z])
                    .sum::<f64>()
            });
            let delta_f = sff.cholesky()?.solve(&rhs);
            for (i, &f) in free.iter().enumerate() {
                out[f] = self.t_star[f] + delta_f[i];
            }
        }
        Some(out)
    }

    /// Steepest descent over coincidence sets: each move adds or removes one
    /// node (or a mirrored pair of nodes) at an edge of the zero set, or at a
    /// sign change when it is empty, and re-projects. Returns the final trace,
    /// its energy and the move count.
    fn coincidence_search(&self, t: &[f64], energy: f64, max_moves: usize) -> (Vec<f64>, f64, usize) {
        let n = t.len();
        let mut zero: Vec<bool> = t.iter().map(|&v| v == 0.0).collect();
        let mut best_t = t.to_vec();
        let mut best_e = energy;
        let mut moves = 0;
        while moves < max_moves {
            let mut candidates = Vec::new();
            for i in 0..n {
                let left = i > 0 && zero[i - 1];
                let right = i + 1 < n && zero[i + 1];
                if zero[i] && !(left && right) {
                    candidates.push(i);
                } else if !zero[i] && (left || right) {
                    candidates.push(i);
                } else if !zero.iter().any(|&z| z) {
                    let next = if i + 1 < n { best_t[i + 1] } else { self.end_traces[1] };
                    if best_t[i] * next <= 0.0 {
                        candidates.push(i);
                    }
                }
            }
            // Mirrored pairs keep reflection-symmetric problems symmetric.
            let mut groups: Vec<Vec<usize>> = candidates.iter().map(|&i| vec![i]).collect();
            for &i in &candidates {
                let m = n - 1 - i;
                if i < m && candidates.contains(&m) {
                    groups.push(vec![i, m]);
                }
            }
            let mut step: Option<(Vec<usize>, Vec<f64>, f64)> = None;
            for group in groups {
                let flip = |zero: &mut Vec<bool>| group.iter().for_each(|&i| zero[i] = !zero[i]);
                flip(&mut zero);
                let cand = if zero.iter().any(|&z| z) {
                    self.project(&zero)
                } else {
                    Some(self.t_star.clone())
                };
                flip(&mut zero);
                if let Some(c) = cand {
                    let e = self.exact_energy(&c);
                    if e < step.as_ref().map_or(best_e, |s| s.2) - 1e-14 * (1.0 + best_e.abs()) {
                        step = Some((group, c, e));
                    }
                }
            }
            match step {
                Some((group, c, e)) => {
                    group.iter().for_each(|&i| zero[i] = !zero[i]);
                    best_t = c;
                    best_e = e;
                    moves += 1;
                }
                None => break,
            }
        }
        (best_t, best_e, moves)
    }
}
