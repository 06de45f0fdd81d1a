//! Uniform grid over `D = [-1, 1]²`, problem parameters, nodal fields and the
//! weighted stiffness operator.

mod field;
mod sphere;
mod stiffness;
pub mod weight;

pub use field::{Field, GridFunction, PhaseMeasure};
pub(crate) use field::accumulate_linear;
pub use sphere::{
    default_sphere_points, sphere_integrals, sphere_quadrature, SphereIntegrals, SphereIntegrand,
};
pub use stiffness::{assemble_stiffness, SymTridiag, WeightedStiffness};
pub use weight::weight_cell_integral;

use crate::error::{invalid, Error, Result};

/// A point of the plane, `[x₁, x₂]`.
pub type Point = [f64; 2];

/// Ambient dimension. Formulas keep it symbolic; only the plane is discretized.
pub const DIM: usize = 2;

/// The triple `(a, λ⁺, λ⁻)` with the derived homogeneity degree `s = (1 - a)/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemParams {
    pub a: f64,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
}

impl ProblemParams {
    pub fn new(a: f64, lambda_plus: f64, lambda_minus: f64) -> Result<Self> {
        if !(a > -1.0 && a < 1.0) {
            return Err(invalid(format!("weight exponent a = {a} must lie in (-1, 1)")));
        }
        if !(lambda_plus >= 0.0 && lambda_plus.is_finite()) {
            return Err(invalid(format!("lambda_plus = {lambda_plus} must be >= 0")));
        }
        if !(lambda_minus >= 0.0 && lambda_minus.is_finite()) {
            return Err(invalid(format!("lambda_minus = {lambda_minus} must be >= 0")));
        }
        Ok(Self {
            a,
            lambda_plus,
            lambda_minus,
        })
    }

    /// Pure weighted Dirichlet problem (`λ± = 0`).
    pub fn harmonic(a: f64) -> Result<Self> {
        Self::new(a, 0.0, 0.0)
    }

    /// Homogeneity degree of blow-ups, `s = (1 - a)/2`.
    pub fn s(&self) -> f64 {
        0.5 * (1.0 - self.a)
    }

    pub fn n(&self) -> usize {
        DIM
    }
}

pub(crate) fn check_exponent(a: f64) -> Result<()> {
    if a > -1.0 && a < 1.0 {
        Ok(())
    } else {
        Err(invalid(format!("weight exponent a = {a} must lie in (-1, 1)")))
    }
}

/// Uniform square grid on `[-1, 1]²` with an odd node count per axis, so the
/// thin line `x₂ = 0` is the middle grid row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
}

impl Grid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 3 || n % 2 == 0 {
            return Err(invalid(format!(
                "grid node count {n} must be odd and at least 3"
            )));
        }
        Ok(Self { nx: n, ny: n })
    }

    /// Mesh width `2/(n - 1)`.
    pub fn h(&self) -> f64 {
        2.0 / (self.nx - 1) as f64
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Node abscissa; exactly `0` at the middle column and `±1` at the ends.
    pub fn x(&self, i: usize) -> f64 {
        (2 * i) as f64 / (self.nx - 1) as f64 - 1.0
    }

    pub fn y(&self, j: usize) -> f64 {
        (2 * j) as f64 / (self.ny - 1) as f64 - 1.0
    }

    /// Index of the thin row `x₂ = 0`.
    pub fn thin_row(&self) -> usize {
        (self.ny - 1) / 2
    }

    /// Row-major node index (rows are constant `x₂`).
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn coords(&self, index: usize) -> Point {
        [self.x(index % self.nx), self.y(index / self.nx)]
    }

    pub fn is_boundary(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i + 1 == self.nx || j + 1 == self.ny
    }

    /// Cell containing `x`, clamped to the grid: `(cell index, local coordinate in [0,1])`.
    pub fn locate_x(&self, x: f64) -> (usize, f64) {
        let h = self.h();
        let t = (x + 1.0) / h;
        let i = (t.floor().max(0.0) as usize).min(self.nx - 2);
        (i, (x - self.x(i)) / h)
    }

    pub fn locate_y(&self, y: f64) -> usize {
        let t = (y + 1.0) / self.h();
        (t.floor().max(0.0) as usize).min(self.ny - 2)
    }

    /// Whether the closed ball lies in `[-1, 1]²` (touching the boundary is allowed).
    pub fn contains_ball(&self, ball: &Ball) -> bool {
        let slack = 1e-12;
        ball.center[0] - ball.radius >= -1.0 - slack
            && ball.center[0] + ball.radius <= 1.0 + slack
            && ball.center[1] - ball.radius >= -1.0 - slack
            && ball.center[1] + ball.radius <= 1.0 + slack
    }

    pub fn check_ball(&self, ball: &Ball) -> Result<()> {
        if self.contains_ball(ball) {
            Ok(())
        } else {
            Err(Error::BallOutsideGrid {
                x: ball.center[0],
                y: ball.center[1],
                radius: ball.radius,
            })
        }
    }
}

/// Ball `B_r(x₀)`; thin-centered when `x₀` lies on `x₂ = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ball {
    pub center: Point,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Point, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(invalid(format!("ball radius {radius} must be positive")));
        }
        Ok(Self { center, radius })
    }

    /// Ball centered at the thin point `(x0, 0)`.
    pub fn thin(x0: f64, radius: f64) -> Result<Self> {
        Self::new([x0, 0.0], radius)
    }

    pub fn contains(&self, p: Point) -> bool {
        let dx = p[0] - self.center[0];
        let dy = p[1] - self.center[1];
        dx * dx + dy * dy < self.radius * self.radius
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_derive_s() {
        let p = ProblemParams::new(0.5, 1.0, 2.0).unwrap();
        assert_eq!(p.s(), 0.25);
        assert_eq!(p.n(), 2);
        assert!(ProblemParams::new(1.0, 0.0, 0.0).is_err());
        assert!(ProblemParams::new(-1.0, 0.0, 0.0).is_err());
        assert!(ProblemParams::new(0.0, -1.0, 0.0).is_err());
    }

    #[test]
    fn grid_has_exact_thin_row() {
        let g = Grid::new(129).unwrap();
        assert_eq!(g.y(g.thin_row()), 0.0);
        assert_eq!(g.x(0), -1.0);
        assert_eq!(g.x(128), 1.0);
        assert_eq!(g.h(), 2.0 / 128.0);
        assert!(Grid::new(128).is_err());
        let (i, t) = g.locate_x(1.0);
        assert_eq!(i, 127);
        assert!((t - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ball_containment() {
        let g = Grid::new(9).unwrap();
        assert!(g.check_ball(&Ball::thin(0.0, 1.0).unwrap()).is_ok());
        assert!(g.check_ball(&Ball::thin(0.5, 0.6).unwrap()).is_err());
    }
}
