//! Steiner symmetrization along rows and the collapsing barrier.

use std::fmt::Write as _;

use crate::error::{invalid, Result};
use crate::mesh::{
    assemble_stiffness, sphere_integrals, Ball, Field, Grid, GridFunction, PhaseMeasure, Point, ProblemParams,
};
use crate::quadrature::tanh_sinh_nodes;

#[derive(Debug, Clone, PartialEq)]
pub struct SymmetrizationReport {
    pub energy_before: f64,
    pub energy_after: f64,
    /// Per row, measure of `{u = 0}` before and after.
    pub zero_slice_measures: Vec<(f64, f64)>,
    pub fixed_point: bool,
    /// Rows holding a value above the level `M`.
    pub violating_rows: Vec<usize>,
}

impl SymmetrizationReport {
    pub const CSV_HEADER: &'static str = "energy_before,energy_after,fixed_point";

    pub fn csv_row(&self) -> String {
        format!("{:.17e},{:.17e},{}", self.energy_before, self.energy_after, self.fixed_point)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{}", Self::CSV_HEADER);
        let _ = writeln!(s, "{}", self.csv_row());
        s
    }
}

/// Center-out positions of a row of odd length: center, then `+1`, `-1`,
/// `+2`, `-2`, …
fn center_out(n: usize) -> impl Iterator<Item = usize> {
    let c = n / 2;
    (0..n).map(move |k| {
        let step = (k + 1) / 2;
        if k % 2 == 1 {
            c + step
        } else {
            c - step
        }
    })
}

/// Replaces `M - u` on every row by its symmetric decreasing rearrangement
/// in `x₁`.
pub fn steiner_symmetrize(u: &GridFunction, level: f64) -> Result<(GridFunction, SymmetrizationReport)> {
    if !level.is_finite() {
        return Err(invalid("symmetrization level must be finite"));
    }
    let grid = &u.grid;
    let (nx, ny) = (grid.nx, grid.ny);
    let h = grid.h();
    let mut out = u.values.clone();
    let mut zero_slice_measures = Vec::with_capacity(ny);
    let mut violating_rows = Vec::new();
    for j in 0..ny {
        let row = &u.values[j * nx..(j + 1) * nx];
        if row.iter().any(|&v| v > level) {
            violating_rows.push(j);
        }
        let mut w: Vec<f64> = row.iter().map(|&v| level - v).collect();
        w.sort_by(|p, q| q.total_cmp(p));
        for (value, i) in w.iter().zip(center_out(nx)) {
            out[j * nx + i] = level - value;
        }
        let zeros = |r: &[f64]| r.iter().filter(|&&v| v == 0.0).count() as f64 * h;
        zero_slice_measures.push((zeros(row), zeros(&out[j * nx..(j + 1) * nx])));
    }
    let k = assemble_stiffness(grid, u.a)?;
    let energy_before = k.energy(&u.values);
    let energy_after = k.energy(&out);
    let fixed_point = out == u.values;
    let v = u.with_values(out)?;
    Ok((
        v,
        SymmetrizationReport {
            energy_before,
            energy_after,
            zero_slice_measures,
            fixed_point,
            violating_rows,
        },
    ))
}

/// `v_ε = 0` for `|x| ≤ 1 - √ε`, `√ε(|x| - 1) + ε` up to the unit circle,
/// and `ε` beyond it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierField {
    pub a: f64,
    pub eps: f64,
}

impl BarrierField {
    pub fn new(a: f64, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(invalid(format!("barrier parameter {eps} must lie in (0, 1)")));
        }
        crate::mesh::check_exponent(a)?;
        Ok(Self { a, eps })
    }

    /// Radius of the inner zero disk.
    pub fn inner_radius(&self) -> f64 {
        1.0 - self.eps.sqrt()
    }

    pub fn to_grid(&self, grid: &Grid) -> GridFunction {
        GridFunction::from_fn(grid, self.a, |p| self.value(p))
    }
}

impl Field for BarrierField {
    fn a(&self) -> f64 {
        self.a
    }

    fn value(&self, p: Point) -> f64 {
        let r = p[0].hypot(p[1]);
        let s = self.eps.sqrt();
        (s * (r - 1.0) + self.eps).clamp(0.0, self.eps)
    }

    fn gradient(&self, p: Point) -> [f64; 2] {
        let r = p[0].hypot(p[1]);
        if r <= self.inner_radius() || r >= 1.0 {
            return [0.0, 0.0];
        }
        let s = self.eps.sqrt();
        [s * p[0] / r, s * p[1] / r]
    }

    /// Radial integration split at the kinks of the profile.
    fn dirichlet_in_ball(&self, ball: &Ball) -> Result<f64> {
        if ball.center != [0.0, 0.0] {
            return Err(invalid("barrier energy is integrated on centered balls only"));
        }
        let rho = self.inner_radius();
        if ball.radius <= rho {
            return Ok(0.0);
        }
        let hi = ball.radius.min(1.0);
        let mut total = 0.0;
        for node in tanh_sinh_nodes(rho, hi, 48) {
            let b = Ball {
                center: [0.0, 0.0],
                radius: node.x,
            };
            total += node.weight * sphere_integrals(self, &b, 256).w_grad2;
        }
        Ok(total)
    }

    fn thin_phase_measure(&self, lo: f64, hi: f64) -> PhaseMeasure {
        let rho = self.inner_radius();
        let overlap = |a: f64, b: f64| (b.min(hi) - a.max(lo)).max(0.0);
        PhaseMeasure {
            positive: overlap(rho, f64::INFINITY) + overlap(f64::NEG_INFINITY, -rho),
            negative: 0.0,
        }
    }
}

/// `J(v_ε)` on the unit disk: weighted Dirichlet energy plus the phase terms
/// of the trace on `(-1, 1)`.
pub fn barrier_energy(eps: f64, p: &ProblemParams) -> Result<f64> {
    let v = BarrierField::new(p.a, eps)?;
    let dirichlet = v.dirichlet_in_ball(&Ball {
        center: [0.0, 0.0],
        radius: 1.0,
    })?;
    let m = v.thin_phase_measure(-1.0, 1.0);
    Ok(dirichlet + p.lambda_plus * m.positive + p.lambda_minus * m.negative)
}

/// The curve `ε ↦ J(v_ε)` as CSV.
pub fn barrier_curve_csv(eps: &[f64], p: &ProblemParams) -> Result<String> {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "# barrier a={} lambda_plus={} lambda_minus={}",
        p.a, p.lambda_plus, p.lambda_minus
    );
    s.push_str("eps,energy\n");
    for &e in eps {
        let _ = writeln!(s, "{e:.17e},{:.17e}", barrier_energy(e, p)?);
    }
    Ok(s)
}
