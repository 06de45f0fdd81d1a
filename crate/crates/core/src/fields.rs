//! Closed-form homogeneous a-harmonic fields used as exact test data.

use crate::mesh::{Field, Grid, GridFunction, Point};
use crate::solver::{slit_profile, SlitSide};

/// Homogeneous fields about the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HomogeneousTerm {
    /// `1`, degree 0.
    Constant,
    /// `x₁`, degree 1.
    LinearX1,
    /// `sign(x₂)|x₂|^{1-a}`, degree `1-a`.
    OddPower,
    /// `x₁² - x₂²/(1+a)`, degree 2.
    Quadratic,
    /// `x₁ sign(x₂)|x₂|^{1-a}`, degree `2-a`.
    MixedOdd,
    /// `((|x| ± x₁)/2)^s`, degree `s`; a-harmonic off the slit ray.
    Slit(SlitSide),
    /// `max(x₂, 0)^{1-a}`, degree `1-a`; a-harmonic in the upper half plane.
    UpperPower,
}

impl HomogeneousTerm {
    pub fn degree(&self, a: f64) -> f64 {
        match self {
            Self::Constant => 0.0,
            Self::LinearX1 => 1.0,
            Self::OddPower | Self::UpperPower => 1.0 - a,
            Self::Quadratic => 2.0,
            Self::MixedOdd => 2.0 - a,
            Self::Slit(_) => 0.5 * (1.0 - a),
        }
    }

    pub fn value(&self, a: f64, p: Point) -> f64 {
        let [x, y] = p;
        let odd = || y.signum() * y.abs().powf(1.0 - a);
        match self {
            Self::Constant => 1.0,
            Self::LinearX1 => x,
            Self::OddPower => {
                if y == 0.0 {
                    0.0
                } else {
                    odd()
                }
            }
            Self::Quadratic => x * x - y * y / (1.0 + a),
            Self::MixedOdd => {
                if y == 0.0 {
                    0.0
                } else {
                    x * odd()
                }
            }
            Self::Slit(side) => slit_profile(p, 0.5 * (1.0 - a), *side),
            Self::UpperPower => {
                if y > 0.0 {
                    y.powf(1.0 - a)
                } else {
                    0.0
                }
            }
        }
    }

    /// Gradient; zero on the singular sets where it is undefined.
    pub fn gradient(&self, a: f64, p: Point) -> [f64; 2] {
        let [x, y] = p;
        // d/dy of sign(y)|y|^{1-a}
        let dodd = || {
            if y == 0.0 {
                0.0
            } else {
                (1.0 - a) * y.abs().powf(-a)
            }
        };
        match self {
            Self::Constant => [0.0, 0.0],
            Self::LinearX1 => [1.0, 0.0],
            Self::OddPower => [0.0, dodd()],
            Self::Quadratic => [2.0 * x, -2.0 * y / (1.0 + a)],
            Self::MixedOdd => {
                let v = if y == 0.0 {
                    0.0
                } else {
                    y.signum() * y.abs().powf(1.0 - a)
                };
                [v, x * dodd()]
            }
            Self::Slit(side) => {
                let s = 0.5 * (1.0 - a);
                let sx = match side {
                    SlitSide::Negative => 1.0,
                    SlitSide::Positive => -1.0,
                };
                let xs = sx * x;
                let r = xs.hypot(y);
                let q = if xs >= 0.0 { 0.5 * (r + xs) } else { 0.5 * y * y / (r - xs) };
                if q == 0.0 {
                    return [0.0, 0.0];
                }
                let qs = q.powf(s);
                [sx * s * qs / r, s * qs / q * y / (2.0 * r)]
            }
            Self::UpperPower => {
                if y > 0.0 {
                    [0.0, (1.0 - a) * y.powf(-a)]
                } else {
                    [0.0, 0.0]
                }
            }
        }
    }
}

/// Linear combination of homogeneous terms about a common center.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticField {
    pub a: f64,
    pub terms: Vec<(f64, HomogeneousTerm)>,
    pub center: Point,
}

impl AnalyticField {
    pub fn new(a: f64, term: HomogeneousTerm) -> Self {
        Self {
            a,
            terms: vec![(1.0, term)],
            center: [0.0, 0.0],
        }
    }

    pub fn plus(mut self, coeff: f64, term: HomogeneousTerm) -> Self {
        self.terms.push((coeff, term));
        self
    }

    pub fn scaled(mut self, c: f64) -> Self {
        for t in &mut self.terms {
            t.0 *= c;
        }
        self
    }

    pub fn centered(mut self, center: Point) -> Self {
        self.center = center;
        self
    }

    /// Degree if the field is homogeneous (all terms share one degree).
    pub fn degree(&self) -> Option<f64> {
        let d = self.terms.first()?.1.degree(self.a);
        self.terms
            .iter()
            .all(|(_, t)| (t.degree(self.a) - d).abs() < 1e-15)
            .then_some(d)
    }

    pub fn to_grid(&self, grid: &Grid) -> GridFunction {
        GridFunction::from_fn(grid, self.a, |p| self.value(p))
    }

    fn local(&self, p: Point) -> Point {
        [p[0] - self.center[0], p[1] - self.center[1]]
    }
}

impl Field for AnalyticField {
    fn a(&self) -> f64 {
        self.a
    }

    fn value(&self, p: Point) -> f64 {
        let q = self.local(p);
        self.terms.iter().map(|(c, t)| c * t.value(self.a, q)).sum()
    }

    fn gradient(&self, p: Point) -> [f64; 2] {
        let q = self.local(p);
        self.terms.iter().fold([0.0, 0.0], |acc, (c, t)| {
            let g = t.gradient(self.a, q);
            [acc[0] + c * g[0], acc[1] + c * g[1]]
        })
    }
}
