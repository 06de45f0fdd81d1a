//! Rescalings, growth fits, free boundary extraction and the harmonic
//! measure experiment.

use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::error::{invalid, Error, Result};
use crate::mesh::{Ball, Field, Grid, GridFunction, ProblemParams};
use crate::monotonicity::least_squares;
use crate::solver::{solve_aharmonic_with, BoundaryData, BoundaryKind, Pinned, SolveOptions};

/// `u_r(x) = u((x0, 0) + r x) / r^s` sampled on a grid of the same size.
pub fn rescale(u: &GridFunction, x0: f64, r: f64, p: &ProblemParams) -> Result<GridFunction> {
    if u.a != p.a {
        return Err(invalid(format!("field has a = {}, parameters a = {}", u.a, p.a)));
    }
    u.grid.check_ball(&Ball::thin(x0, r)?)?;
    let scale = r.powf(-p.s());
    let values = (0..u.grid.len())
        .map(|k| {
            let [x, y] = u.grid.coords(k);
            let q = [(x0 + r * x).clamp(-1.0, 1.0), (r * y).clamp(-1.0, 1.0)];
            scale * u.value(q)
        })
        .collect();
    GridFunction::new(u.grid, u.a, values)
}

/// Least-squares fit `sup ≈ C r^exponent` in log-log coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthFit {
    pub exponent: f64,
    pub constant: f64,
    /// Root-mean-square residual of the log-log fit.
    pub residual: f64,
    pub radii: Vec<f64>,
    pub sup: Vec<f64>,
}

impl GrowthFit {
    pub const CSV_HEADER: &'static str = "exponent,constant,residual";

    pub fn csv_row(&self) -> String {
        format!("{:.17e},{:.17e},{:.17e}", self.exponent, self.constant, self.residual)
    }

    pub fn within(&self, target: f64, tol: f64) -> bool {
        (self.exponent - target).abs() <= tol
    }
}

fn circle_sup<F: Field + ?Sized>(u: &F, x0: f64, r: f64, f: impl Fn(f64) -> f64) -> f64 {
    let m = u
        .resolution()
        .map_or(1024, |h| (4.0 * (2.0 * PI * r / h).ceil()) as usize)
        .max(256);
    let m = m.div_ceil(4) * 4;
    (0..m)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / m as f64;
            f(u.value([x0 + r * t.cos(), r * t.sin()]))
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

fn fit_growth<F: Field + ?Sized>(
    u: &F,
    x0: f64,
    radii: &[f64],
    f: impl Fn(f64) -> f64,
) -> Result<GrowthFit> {
    if radii.len() < 5 {
        return Err(invalid(format!("growth fits need at least 5 radii, got {}", radii.len())));
    }
    let mut sup = Vec::with_capacity(radii.len());
    for &r in radii {
        let ball = Ball::thin(x0, r)?;
        if !u.contains_ball(&ball) {
            return Err(Error::BallOutsideGrid {
                x: x0,
                y: 0.0,
                radius: r,
            });
        }
        let v = circle_sup(u, x0, r, &f);
        if !(v > 1e-12) {
            return Err(Error::DegenerateField(format!(
                "sup over the circle of radius {r} about {x0} is {v:e}"
            )));
        }
        sup.push(v);
    }
    let lx: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let ly: Vec<f64> = sup.iter().map(|v| v.ln()).collect();
    let (slope, intercept, residual) = least_squares(&lx, &ly);
    Ok(GrowthFit {
        exponent: slope,
        constant: intercept.exp(),
        residual,
        radii: radii.to_vec(),
        sup,
    })
}

/// Growth exponent of `sup_{∂B_r(x0,0)} |u|`.
pub fn homogeneity_exponent<F: Field + ?Sized>(u: &F, x0: f64, radii: &[f64]) -> Result<GrowthFit> {
    fit_growth(u, x0, radii, f64::abs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Positive,
    Negative,
}

impl Phase {
    pub fn sign(&self) -> f64 {
        match self {
            Self::Positive => 1.0,
            Self::Negative => -1.0,
        }
    }
}

/// Thin-line decomposition of a trace.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSets {
    /// Boundary points of `{trace > τ}`, increasing.
    pub gamma_plus: Vec<f64>,
    /// Boundary points of `{trace < -τ}`, increasing.
    pub gamma_minus: Vec<f64>,
    /// Maximal intervals where `|trace| ≤ τ`.
    pub coincidence: Vec<(f64, f64)>,
    /// `min |γ⁺ - γ⁻|`, infinite when a set is empty.
    pub separation: f64,
    pub tau: f64,
}

impl PhaseSets {
    pub fn gamma(&self, phase: Phase) -> &[f64] {
        match phase {
            Phase::Positive => &self.gamma_plus,
            Phase::Negative => &self.gamma_minus,
        }
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# tau={:e} separation={:e}", self.tau, self.separation);
        s.push_str("set,left,right\n");
        for g in &self.gamma_plus {
            let _ = writeln!(s, "gamma_plus,{g:.17e},{g:.17e}");
        }
        for g in &self.gamma_minus {
            let _ = writeln!(s, "gamma_minus,{g:.17e},{g:.17e}");
        }
        for (l, r) in &self.coincidence {
            let _ = writeln!(s, "coincidence,{l:.17e},{r:.17e}");
        }
        s
    }
}

/// Default extraction threshold `0.1 h^s`.
pub fn default_tau(grid: &Grid, p: &ProblemParams) -> f64 {
    0.1 * grid.h().powf(p.s())
}

/// Scans a piecewise-linear trace sampled at `xs`.
pub fn phase_sets_from_trace(xs: &[f64], trace: &[f64], tau: f64) -> Result<PhaseSets> {
    if !(tau >= 0.0) {
        return Err(invalid(format!("threshold {tau} must be nonnegative")));
    }
    if xs.len() != trace.len() || xs.len() < 2 {
        return Err(invalid("trace and abscissae must match and have two or more points"));
    }
    let level = |x0: f64, x1: f64, v0: f64, v1: f64, c: f64| x0 + (c - v0) / (v1 - v0) * (x1 - x0);
    let mut gamma_plus = Vec::new();
    let mut gamma_minus = Vec::new();
    let mut coincidence: Vec<(f64, f64)> = Vec::new();
    for i in 0..xs.len() - 1 {
        let (x0, x1, v0, v1) = (xs[i], xs[i + 1], trace[i], trace[i + 1]);
        if (v0 > tau) != (v1 > tau) {
            gamma_plus.push(level(x0, x1, v0, v1, tau));
        }
        if (v0 < -tau) != (v1 < -tau) {
            gamma_minus.push(level(x0, x1, v0, v1, -tau));
        }
        // Part of the segment inside the band |v| ≤ τ.
        let (mut lo, mut hi) = (x0, x1);
        if v0 == v1 {
            if v0.abs() > tau {
                continue;
            }
        } else {
            let a = level(x0, x1, v0, v1, -tau);
            let b = level(x0, x1, v0, v1, tau);
            lo = lo.max(a.min(b));
            hi = hi.min(a.max(b));
            if lo > hi {
                continue;
            }
        }
        match coincidence.last_mut() {
            Some(last) if lo <= last.1 + 1e-12 * (1.0 + lo.abs()) => last.1 = last.1.max(hi),
            _ => coincidence.push((lo, hi)),
        }
    }
    gamma_plus.dedup();
    gamma_minus.dedup();
    let mut separation = f64::INFINITY;
    for g in &gamma_plus {
        for m in &gamma_minus {
            separation = separation.min((g - m).abs());
        }
    }
    Ok(PhaseSets {
        gamma_plus,
        gamma_minus,
        coincidence,
        separation,
        tau,
    })
}

/// Free boundaries of the thin trace of `u`; `tau` defaults to `0.1 h^s`.
pub fn extract_free_boundaries(u: &GridFunction, p: &ProblemParams, tau: Option<f64>) -> Result<PhaseSets> {
    let g = &u.grid;
    let xs: Vec<f64> = (0..g.nx).map(|i| g.x(i)).collect();
    phase_sets_from_trace(&xs, u.thin_trace(), tau.unwrap_or_else(|| default_tau(g, p)))
}

/// Geometric radii from `8h` up to `min(0.45, separation/2, (1-|x0|)/2)`,
/// about eight per octave. Empty when that range is empty.
pub fn growth_radii(grid: &Grid, x0: f64, separation: f64) -> Vec<f64> {
    let lo = 8.0 * grid.h();
    let hi = 0.45f64.min(0.5 * separation).min(0.5 * (1.0 - x0.abs()));
    if !(hi > lo) {
        return Vec::new();
    }
    let count = ((hi / lo).log2() * 8.0).ceil().max(1.0) as usize;
    (0..=count)
        .map(|k| lo * (hi / lo).powf(k as f64 / count as f64))
        .collect()
}

/// Growth of `sup_{∂B_r} u⁺` (or `u⁻`) about an extracted free boundary point.
pub fn nondegeneracy_fit<F: Field + ?Sized>(
    u: &F,
    phases: &PhaseSets,
    x0: f64,
    phase: Phase,
    radii: &[f64],
) -> Result<GrowthFit> {
    if !phases.gamma(phase).iter().any(|g| (g - x0).abs() <= 1e-9) {
        return Err(Error::NotFreeBoundary(x0));
    }
    let sign = phase.sign();
    fit_growth(u, x0, radii, |v| (sign * v).max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolidSignCheck {
    /// Nodal minimum of `±u` over the closed ball.
    pub min_signed: f64,
    pub threshold: f64,
    pub verdict: bool,
}

/// Whether `±u ≥ -τ_solid` at every node of `B_r(x0, 0)`, `τ_solid = 0.1 h^s`.
pub fn solid_sign_check(
    u: &GridFunction,
    p: &ProblemParams,
    x0: f64,
    phase: Phase,
    r: f64,
) -> Result<SolidSignCheck> {
    let ball = Ball::thin(x0, r)?;
    u.grid.check_ball(&ball)?;
    let sign = phase.sign();
    let g = &u.grid;
    let mut min_signed = f64::INFINITY;
    for k in 0..g.len() {
        let [x, y] = g.coords(k);
        if (x - x0).powi(2) + y * y <= r * r {
            min_signed = min_signed.min(sign * u.values[k]);
        }
    }
    let threshold = default_tau(g, p);
    Ok(SolidSignCheck {
        min_signed,
        threshold,
        verdict: min_signed >= -threshold,
    })
}

/// Boundary pieces of the upper half disk.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArcPiece {
    /// `{x₂ ≥ 1/2}` on the unit circle.
    E1,
    /// `{0 < x₂ < 1/2}` on the unit circle.
    E2,
}

impl ArcPiece {
    fn indicator(&self, y: f64) -> f64 {
        let upper = y >= 0.5;
        match self {
            Self::E1 => f64::from(upper),
            Self::E2 => f64::from(!upper && y > 0.0),
        }
    }
}

#[derive(Debug, Clone)]
pub struct HarmonicMeasure {
    /// `min ω(0, x₂)/x₂^{1-a}` over `x₂ ∈ [2h, 1/2)`.
    pub c_fit: f64,
    /// `max ω(0, x₂)/x₂^{1-a}` over the same nodes.
    pub big_c_fit: f64,
    /// Fitted `β` in `ω(0, x₂) ≈ κ x₂^β` on `[2h, 0.3]`.
    pub exponent: f64,
    pub kappa: f64,
    pub omega: GridFunction,
}

/// a-harmonic measure of an arc piece in the upper half of the unit disk.
///
/// Nodes with `x₂ ≤ 0` are held at zero, nodes outside the disk with
/// `x₂ > 0` at the indicator of the piece, evaluated at the radial projection
/// of the node onto the circle.
pub fn harmonic_measure_bounds(grid: &Grid, a: f64, piece: ArcPiece) -> Result<HarmonicMeasure> {
    let bc = BoundaryData::from_fn(grid, BoundaryKind::Custom, |[x, y]| {
        let r = x.hypot(y);
        if y > 0.0 {
            piece.indicator(y / r)
        } else {
            0.0
        }
    });
    let mut pinned = Pinned::default();
    for j in 1..grid.ny - 1 {
        for i in 1..grid.nx - 1 {
            let k = grid.index(i, j);
            let [x, y] = grid.coords(k);
            let r = x.hypot(y);
            if y <= 0.0 {
                pinned.push(k, 0.0);
            } else if r >= 1.0 {
                pinned.push(k, piece.indicator(y / r));
            }
        }
    }
    let opts = SolveOptions {
        tol: 1e-12,
        max_iter: None,
    };
    let (omega, _) = solve_aharmonic_with(grid, a, &bc, Some(&pinned), &opts)?;
    let h = grid.h();
    let ic = (grid.nx - 1) / 2;
    let j0 = grid.thin_row();
    let mut lx = Vec::new();
    let mut ly = Vec::new();
    let mut c_fit = f64::INFINITY;
    let mut big_c_fit: f64 = 0.0;
    for j in j0 + 1..grid.ny {
        let y = grid.y(j);
        let w = omega.at(ic, j);
        if y >= 2.0 * h - 1e-12 && y <= 0.3 + 1e-12 && w > 0.0 {
            lx.push(y.ln());
            ly.push(w.ln());
        }
        if y >= 2.0 * h - 1e-12 && y < 0.5 {
            let ratio = w / y.powf(1.0 - a);
            c_fit = c_fit.min(ratio);
            big_c_fit = big_c_fit.max(ratio);
        }
    }
    if lx.len() < 2 {
        return Err(Error::DegenerateField("harmonic measure vanishes on the axis".into()));
    }
    let (exponent, intercept, _) = least_squares(&lx, &ly);
    Ok(HarmonicMeasure {
        c_fit,
        big_c_fit,
        exponent,
        kappa: intercept.exp(),
        omega,
    })
}
