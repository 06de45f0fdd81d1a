//! The functional `J`, its smoothed relaxation `J_ε` and the gradient of `J_ε`.

use crate::error::{invalid, Error, Result};
use crate::mesh::{assemble_stiffness, Field, Grid, GridFunction, ProblemParams};

/// The parts of `J(u)`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EnergyBreakdown {
    pub dirichlet: f64,
    pub phase_plus: f64,
    pub phase_minus: f64,
    pub total: f64,
}

impl EnergyBreakdown {
    pub fn new(dirichlet: f64, phase_plus: f64, phase_minus: f64) -> Self {
        Self {
            dirichlet,
            phase_plus,
            phase_minus,
            total: dirichlet + phase_plus + phase_minus,
        }
    }

    pub const CSV_HEADER: &'static str = "dirichlet,phase_plus,phase_minus,total";

    pub fn csv_row(&self) -> String {
        format!(
            "{:.12e},{:.12e},{:.12e},{:.12e}",
            self.dirichlet, self.phase_plus, self.phase_minus, self.total
        )
    }
}

pub(crate) fn check_params(u: &GridFunction, p: &ProblemParams) -> Result<()> {
    if u.a != p.a {
        return Err(Error::GridMismatch(format!(
            "field built for a = {} evaluated with a = {}",
            u.a, p.a
        )));
    }
    Ok(())
}

/// Exact `J(u)`: the stiffness quadratic form plus the phase measures of the
/// piecewise-linear thin trace, with zero crossings located on the interpolant.
pub fn total_energy(u: &GridFunction, p: &ProblemParams) -> Result<EnergyBreakdown> {
    check_params(u, p)?;
    let k = assemble_stiffness(&u.grid, u.a)?;
    let dirichlet = k.energy(&u.values);
    let m = u.thin_phase_measure(-1.0, 1.0);
    Ok(EnergyBreakdown::new(
        dirichlet,
        p.lambda_plus * m.positive,
        p.lambda_minus * m.negative,
    ))
}

/// One-sided cubic smoothstep: `0` for `t ≤ 0`, `3x² - 2x³` with `x = t/ε`
/// on `(0, ε)`, `1` for `t ≥ ε`.
pub fn smooth_step(t: f64, eps: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= eps {
        1.0
    } else {
        let x = t / eps;
        x * x * (3.0 - 2.0 * x)
    }
}

pub fn smooth_step_derivative(t: f64, eps: f64) -> f64 {
    if t <= 0.0 || t >= eps {
        0.0
    } else {
        let x = t / eps;
        6.0 * x * (1.0 - x) / eps
    }
}

pub fn smooth_step_second_derivative(t: f64, eps: f64) -> f64 {
    if t <= 0.0 || t >= eps {
        0.0
    } else {
        let x = t / eps;
        (6.0 - 12.0 * x) / (eps * eps)
    }
}

/// Smoothed phase density `λ⁺ H_ε(t) + λ⁻ H_ε(-t)` and its first two derivatives.
pub(crate) fn phase_density(t: f64, p: &ProblemParams, eps: f64) -> (f64, f64, f64) {
    (
        p.lambda_plus * smooth_step(t, eps) + p.lambda_minus * smooth_step(-t, eps),
        p.lambda_plus * smooth_step_derivative(t, eps)
            - p.lambda_minus * smooth_step_derivative(-t, eps),
        p.lambda_plus * smooth_step_second_derivative(t, eps)
            + p.lambda_minus * smooth_step_second_derivative(-t, eps),
    )
}

/// Trapezoid weights of the thin row: `h` inside, `h/2` at the two ends.
pub fn thin_masses(grid: &Grid) -> Vec<f64> {
    let h = grid.h();
    let mut m = vec![h; grid.nx];
    m[0] = 0.5 * h;
    m[grid.nx - 1] = 0.5 * h;
    m
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("smoothing width eps = {eps} must be positive")))
    }
}

/// `J_ε(u)`: the Dirichlet part plus the trapezoid rule for the smoothed
/// phase density on the nodal trace.
pub fn smoothed_energy(u: &GridFunction, p: &ProblemParams, eps: f64) -> Result<f64> {
    check_eps(eps)?;
    check_params(u, p)?;
    let k = assemble_stiffness(&u.grid, u.a)?;
    let phase: f64 = thin_masses(&u.grid)
        .iter()
        .zip(u.thin_trace())
        .map(|(m, &t)| m * phase_density(t, p, eps).0)
        .sum();
    Ok(k.energy(&u.values) + phase)
}

/// Gradient of [`smoothed_energy`] with respect to all nodal values.
pub fn smoothed_gradient(u: &GridFunction, p: &ProblemParams, eps: f64) -> Result<Vec<f64>> {
    check_eps(eps)?;
    check_params(u, p)?;
    let k = assemble_stiffness(&u.grid, u.a)?;
    let mut g = k.apply(&u.values);
    g.iter_mut().for_each(|v| *v *= 2.0);
    let start = u.grid.thin_row() * u.grid.nx;
    for (i, (m, &t)) in thin_masses(&u.grid).iter().zip(u.thin_trace()).enumerate() {
        g[start + i] += m * phase_density(t, p, eps).1;
    }
    Ok(g)
}

/// Geometric continuation `ε_start, ε_start·f, …` down to `ε_end`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothingSchedule {
    pub eps_start: f64,
    pub eps_end: f64,
    pub factor: f64,
}

impl SmoothingSchedule {
    pub fn new(eps_start: f64, eps_end: f64, factor: f64) -> Result<Self> {
        if !(eps_end > 0.0 && eps_start >= eps_end && eps_start.is_finite()) {
            return Err(invalid(format!(
                "schedule needs eps_start >= eps_end > 0, got {eps_start} and {eps_end}"
            )));
        }
        if !(factor > 0.0 && factor < 1.0) {
            return Err(invalid(format!("schedule factor {factor} must lie in (0, 1)")));
        }
        Ok(Self {
            eps_start,
            eps_end,
            factor,
        })
    }

    /// `8h → h` halving.
    pub fn default_for(grid: &Grid) -> Self {
        let h = grid.h();
        Self {
            eps_start: 8.0 * h,
            eps_end: h,
            factor: 0.5,
        }
    }

    /// The stage widths; the last one is exactly `eps_end`.
    pub fn stages(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let mut eps = self.eps_start;
        while eps > self.eps_end * (1.0 + 1e-9) {
            out.push(eps);
            eps *= self.factor;
        }
        out.push(self.eps_end);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params(a: f64, lp: f64, lm: f64) -> ProblemParams {
        ProblemParams::new(a, lp, lm).unwrap()
    }

    #[test]
    fn energy_examples() {
        let g = Grid::new(33).unwrap();
        let zero = GridFunction::zeros(&g, 0.0).unwrap();
        assert_eq!(total_energy(&zero, &params(0.0, 1.0, 1.0)).unwrap().total, 0.0);
        let u = GridFunction::from_fn(&g, 0.0, |p| p[0]);
        let e = total_energy(&u, &params(0.0, 0.0, 0.0)).unwrap();
        assert!((e.dirichlet - 4.0).abs() < 1e-12);
        let u = GridFunction::from_fn(&g, 0.5, |p| p[0]);
        let e = total_energy(&u, &params(0.5, 2.0, 3.0)).unwrap();
        assert!((e.dirichlet - 8.0 / 3.0).abs() < 1e-12);
        assert!((e.phase_plus - 2.0).abs() < 1e-14);
        assert!((e.phase_minus - 3.0).abs() < 1e-14);
        assert!((e.total - (8.0 / 3.0 + 5.0)).abs() < 1e-12);
        assert!(total_energy(&u, &params(0.0, 2.0, 3.0)).is_err());
    }

    #[test]
    fn scaling_and_reflection() {
        let g = Grid::new(17).unwrap();
        let p = params(0.3, 1.5, 0.5);
        let f = |q: [f64; 2]| (2.0 * q[0] + 0.3).sin() + q[1];
        let u = GridFunction::from_fn(&g, 0.3, f);
        let base = total_energy(&u, &p).unwrap();
        let scaled = total_energy(&u.with_values(u.values.iter().map(|v| 3.0 * v).collect()).unwrap(), &p).unwrap();
        assert_eq!(scaled.phase_plus, base.phase_plus);
        assert!((scaled.dirichlet - 9.0 * base.dirichlet).abs() < 1e-12 * scaled.dirichlet);
        let mirrored = GridFunction::from_fn(&g, 0.3, |q| f([-q[0], q[1]]));
        let m = total_energy(&mirrored, &p).unwrap();
        assert!((m.total - base.total).abs() < 1e-12 * base.total);
        let neg = u.with_values(u.values.iter().map(|v| -v).collect()).unwrap();
        let swapped = params(0.3, 0.5, 1.5);
        let n = total_energy(&neg, &swapped).unwrap();
        assert!((n.phase_plus - base.phase_minus).abs() < 1e-14);
        assert!((n.phase_minus - base.phase_plus).abs() < 1e-14);
    }

    #[test]
    fn smoothing_examples() {
        let g = Grid::new(33).unwrap();
        let p = params(0.0, 1.0, 1.0);
        let zero = GridFunction::zeros(&g, 0.0).unwrap();
        assert_eq!(smoothed_energy(&zero, &p, 0.1).unwrap(), 0.0);
        let lifted = GridFunction::from_fn(&g, 0.0, |_| 0.2);
        let e = smoothed_energy(&lifted, &params(0.0, 1.5, 4.0), 0.1).unwrap();
        assert!((e - 3.0).abs() < 1e-14);
        assert!(smoothed_energy(&zero, &p, 0.0).is_err());
        // Convergence to the exact phase part for the linear trace.
        let u = GridFunction::from_fn(&g, 0.0, |q| q[0]);
        let exact = total_energy(&u, &p).unwrap();
        let mut prev = f64::INFINITY;
        for eps in [0.25, 0.125, 0.0625] {
            let diff = (smoothed_energy(&u, &p, eps).unwrap() - exact.total).abs();
            assert!(diff <= 1.05 * eps, "{eps}: {diff}");
            assert!(diff < prev);
            prev = diff;
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let g = Grid::new(17).unwrap();
        let p = params(-0.4, 1.3, 0.7);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let u = GridFunction::from_fn(&g, -0.4, |_| rng.random_range(-0.3..0.3));
        let eps = 0.4;
        let grad = smoothed_gradient(&u, &p, eps).unwrap();
        let step = 1e-5;
        for k in 0..g.len() {
            let mut plus = u.values.clone();
            plus[k] += step;
            let mut minus = u.values.clone();
            minus[k] -= step;
            let fd = (smoothed_energy(&u.with_values(plus).unwrap(), &p, eps).unwrap()
                - smoothed_energy(&u.with_values(minus).unwrap(), &p, eps).unwrap())
                / (2.0 * step);
            assert!((fd - grad[k]).abs() <= 1e-6 * grad[k].abs().max(1e-2), "{k}: {fd} vs {}", grad[k]);
        }
    }

    #[test]
    fn gradient_special_cases() {
        let g = Grid::new(9).unwrap();
        let big = GridFunction::from_fn(&g, 0.2, |_| 50.0);
        let grad = smoothed_gradient(&big, &params(0.2, 1.0, 1.0), 0.1).unwrap();
        assert!(grad.iter().all(|v| v.abs() < 1e-10));
        let u = GridFunction::from_fn(&g, 0.2, |q| q[0] * q[1] + q[0]);
        let grad = smoothed_gradient(&u, &params(0.2, 0.0, 0.0), 0.1).unwrap();
        let k = assemble_stiffness(&g, 0.2).unwrap().apply(&u.values);
        for (a, b) in grad.iter().zip(&k) {
            assert_eq!(*a, 2.0 * b);
        }
    }

    #[test]
    fn schedule_stages() {
        let g = Grid::new(129).unwrap();
        let s = SmoothingSchedule::default_for(&g);
        let st = s.stages();
        assert_eq!(st.len(), 4);
        assert_eq!(*st.last().unwrap(), g.h());
        assert!(SmoothingSchedule::new(0.1, 0.2, 0.5).is_err());
        assert!(SmoothingSchedule::new(0.1, 0.05, 1.0).is_err());
    }
}
