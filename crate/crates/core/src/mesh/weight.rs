//! Exact vertical integrals of the weight `|y|^a` and of the fitted vertical
//! shape functions.
//!
//! Vertical shape functions are not linear: on a cell `[y0, y1]` the upper
//! shape function is
//!
//! ```text
//! ψ(y) = ∫_{y0}^{y} |t|^{-a} dt / ∫_{y0}^{y1} |t|^{-a} dt
//! ```
//!
//! i.e. the one-dimensional a-harmonic profile through the cell. Products
//! `|y|^a ψ'²` are then proportional to `|y|^{-a}`, so the vertical stiffness
//! is `1 / ∫|t|^{-a}` exactly, and fields of the form `c0 + c1 sign(y)|y|^{1-a}`
//! are reproduced without error. For `a = 0` the functions are the usual hats.

use crate::error::{invalid, Result};
use crate::quadrature::gauss16;

/// `∫_{y0}^{y1} |t|^a dt` via the antiderivative `sign(t)|t|^{1+a}/(1+a)`.
///
/// Same-sign intervals are evaluated as `|y0|^{1+a} expm1((1+a) ln(y1/y0))/(1+a)`
/// so narrow cells far from the thin line keep full relative accuracy;
/// intervals straddling `t = 0` are split there.
pub fn weight_cell_integral(y0: f64, y1: f64, a: f64) -> Result<f64> {
    if a <= -1.0 || !a.is_finite() {
        return Err(invalid(format!(
            "weight exponent a = {a} is not integrable (need a > -1)"
        )));
    }
    if !(y0 < y1) {
        return Err(invalid(format!("empty interval [{y0}, {y1}]")));
    }
    Ok(power_integral(y0, y1, a))
}

/// `∫_{y0}^{y1} |t|^p dt` for `p > -1` and `y0 <= y1`; no validation.
pub(crate) fn power_integral(y0: f64, y1: f64, p: f64) -> f64 {
    let q = 1.0 + p;
    if y0 >= 0.0 {
        positive_power_integral(y0, y1, q)
    } else if y1 <= 0.0 {
        positive_power_integral(-y1, -y0, q)
    } else {
        (y1.powf(q) + (-y0).powf(q)) / q
    }
}

/// `(hi^q - lo^q) / q` for `0 <= lo <= hi`, without cancellation.
fn positive_power_integral(lo: f64, hi: f64, q: f64) -> f64 {
    if lo == 0.0 {
        return hi.powf(q) / q;
    }
    if hi == lo {
        return 0.0;
    }
    if hi > 2.0 * lo {
        // No cancellation to avoid, and lo^q may underflow.
        return (hi.powf(q) - lo.powf(q)) / q;
    }
    lo.powf(q) * (q * ((hi - lo) / lo).ln_1p()).exp_m1() / q
}

/// Vertical cell with fitted shape functions.
#[derive(Debug, Clone, Copy)]
pub struct FittedCell {
    pub y0: f64,
    pub y1: f64,
    pub a: f64,
    /// `∫_{y0}^{y1} |t|^{-a} dt`.
    pub span: f64,
}

/// Integrals over a sub-interval `[ya, yb]` of a fitted cell:
/// `[∫w, ∫wψ, ∫wψ²]` with `w = |y|^a` and `ψ` the upper shape function.
pub type Moments = [f64; 3];

impl FittedCell {
    pub fn new(y0: f64, y1: f64, a: f64) -> Self {
        Self {
            y0,
            y1,
            a,
            span: power_integral(y0, y1, -a),
        }
    }

    fn touches_zero(&self) -> bool {
        self.y0 == 0.0 || self.y1 == 0.0
    }

    /// Upper shape function (0 at `y0`, 1 at `y1`).
    pub fn psi(&self, y: f64) -> f64 {
        if y <= self.y0 {
            return 0.0;
        }
        if y >= self.y1 {
            return 1.0;
        }
        (power_integral(self.y0, y, -self.a) / self.span).clamp(0.0, 1.0)
    }

    /// Derivative of the upper shape function, `|y|^{-a} / span`.
    pub fn dpsi(&self, y: f64) -> f64 {
        y.abs().powf(-self.a) / self.span
    }

    /// `∫_{ya}^{yb} |y|^{-a} dy / span²`, the vertical factor of `∫ w ψ'²`.
    pub fn gradient_factor(&self, ya: f64, yb: f64) -> f64 {
        if yb <= ya {
            return 0.0;
        }
        power_integral(ya, yb, -self.a) / (self.span * self.span)
    }

    /// Weighted moments over `[ya, yb] ⊂ [y0, y1]`.
    pub fn moments(&self, ya: f64, yb: f64) -> Moments {
        if yb <= ya {
            return [0.0; 3];
        }
        let a = self.a;
        if self.touches_zero() {
            // Cell [0, h] (or its mirror): with b = 1 - a the shape function
            // attached to the node away from zero is (|y|/h)^b.
            let h = self.y1 - self.y0;
            let (lo, hi) = if self.y0 == 0.0 { (ya, yb) } else { (-yb, -ya) };
            let b = 1.0 - a;
            let m0 = power_integral(lo, hi, a);
            // ∫ y^a (y/h)^b = ∫ y / h^b ;  ∫ y^a (y/h)^{2b} = ∫ y^{2-a} / h^{2b}
            let hb = h.powf(b);
            let far1 = (hi * hi - lo * lo) / (2.0 * hb);
            let far2 = power_integral(lo, hi, 2.0 - a) / (hb * hb);
            if self.y0 == 0.0 {
                // ψ is the far function.
                [m0, far1, far2]
            } else {
                // ψ = 1 - far.
                [m0, m0 - far1, m0 - 2.0 * far1 + far2]
            }
        } else {
            let mut m = [0.0; 3];
            let rule = gauss16();
            let half = 0.5 * (yb - ya);
            let mid = 0.5 * (yb + ya);
            for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
                let y = mid + half * x;
                let wy = w * half * y.abs().powf(a);
                let p = self.psi(y);
                m[0] += wy;
                m[1] += wy * p;
                m[2] += wy * p * p;
            }
            // The exact zeroth moment is available in closed form.
            m[0] = power_integral(ya, yb, a);
            m
        }
    }

    /// Full-cell mass matrix `[[∫wψ0², ∫wψ0ψ1], [·, ∫wψ1²]]` as (m00, m01, m11).
    pub fn mass(&self) -> (f64, f64, f64) {
        let [m0, m1, m2] = self.moments(self.y0, self.y1);
        (m0 - 2.0 * m1 + m2, m1 - m2, m2)
    }

    /// Full-cell stiffness coefficient: the cell matrix is `k [[1,-1],[-1,1]]`.
    pub fn stiffness(&self) -> f64 {
        1.0 / self.span
    }
}
