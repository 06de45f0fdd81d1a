//! Integrals over circles `∂B_r(x₀)` with the weight `|x₂|^a`.
//!
//! Angles are split where the circle crosses the thin line (the weight and
//! the normal derivative of thin-singular fields blow up or vanish there) and
//! into pieces of at most a quarter turn; each piece uses a tanh-sinh rule.
//! Near a crossing the height `x₂` is recomputed from the angular distance to
//! the crossing so that `|x₂|^a` keeps full relative accuracy.

use std::f64::consts::{FRAC_PI_2, PI};

use super::field::{ball_error, Field};
use super::Ball;
use crate::error::Result;
use crate::quadrature::tanh_sinh_nodes;

/// Integrand selector for [`sphere_quadrature`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SphereIntegrand {
    /// `w u²`
    U2,
    /// `w u u_ν`
    UUn,
    /// `w |∇u|²`
    Grad2,
    /// `w u_ν²`
    Un2,
    /// `w ((1-a) u/(√2 r) - √2 u_ν)²`
    Weiss,
}

/// All circle integrals computed in one pass.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SphereIntegrals {
    pub w_u2: f64,
    pub w_u_un: f64,
    pub w_grad2: f64,
    pub w_un2: f64,
    pub w_weiss: f64,
}

impl SphereIntegrals {
    pub fn get(&self, which: SphereIntegrand) -> f64 {
        match which {
            SphereIntegrand::U2 => self.w_u2,
            SphereIntegrand::UUn => self.w_u_un,
            SphereIntegrand::Grad2 => self.w_grad2,
            SphereIntegrand::Un2 => self.w_un2,
            SphereIntegrand::Weiss => self.w_weiss,
        }
    }
}

/// Default angular point count `max(64, ⌈8·2πr/h⌉)`.
pub fn default_sphere_points(radius: f64, h: f64) -> usize {
    let m = (8.0 * 2.0 * PI * radius / h).ceil();
    (m as usize).max(64)
}

/// One integrand over `∂B`; errors if the ball leaves the field's domain.
pub fn sphere_quadrature<F: Field + ?Sized>(
    u: &F,
    ball: &Ball,
    integrand: SphereIntegrand,
    m: usize,
) -> Result<f64> {
    if !u.contains_ball(ball) {
        return Err(ball_error(ball));
    }
    Ok(sphere_integrals(u, ball, m).get(integrand))
}

/// Angular break points in `[θ₀, θ₀ + 2π]` with the crossing flags of each end.
struct Piece {
    lo: f64,
    hi: f64,
    lo_crossing: bool,
    hi_crossing: bool,
}

fn pieces(ball: &Ball) -> Vec<Piece> {
    let r = ball.radius;
    let y0 = ball.center[1];
    let mut cuts: Vec<(f64, bool)> = Vec::new();
    if y0.abs() <= r {
        let t1 = (-y0 / r).clamp(-1.0, 1.0).asin();
        let t2 = PI - t1;
        cuts.push((t1, true));
        if (t2 - t1).abs() > 0.0 && (t2 - t1 - 2.0 * PI).abs() > 0.0 {
            cuts.push((t2, true));
        }
    }
    if cuts.is_empty() {
        cuts.push((0.0, false));
    }
    cuts.sort_by(|p, q| p.0.total_cmp(&q.0));
    let first = cuts[0];
    cuts.push((first.0 + 2.0 * PI, first.1));
    let mut out = Vec::new();
    for w in cuts.windows(2) {
        let (a, ca) = w[0];
        let (b, cb) = w[1];
        let k = ((b - a) / FRAC_PI_2).ceil().max(1.0) as usize;
        let step = (b - a) / k as f64;
        for s in 0..k {
            out.push(Piece {
                lo: a + s as f64 * step,
                hi: if s + 1 == k { b } else { a + (s + 1) as f64 * step },
                lo_crossing: ca && s == 0,
                hi_crossing: cb && s + 1 == k,
            });
        }
    }
    out
}

/// Computes all five integrals with about `2m` tanh-sinh nodes.
pub fn sphere_integrals<F: Field + ?Sized>(u: &F, ball: &Ball, m: usize) -> SphereIntegrals {
    let a = u.a();
    let r = ball.radius;
    let [x0, y0] = ball.center;
    let total_nodes = 2 * m.max(16);
    let mut acc = SphereIntegrals::default();
    for piece in pieces(ball) {
        let len = piece.hi - piece.lo;
        let n = ((total_nodes as f64) * len / (2.0 * PI)).ceil() as usize + 8;
        for node in tanh_sinh_nodes(piece.lo, piece.hi, n) {
            let theta = node.x;
            let (s, c) = theta.sin_cos();
            let y = if piece.lo_crossing && node.from_lo <= node.to_hi {
                let d = node.from_lo;
                2.0 * r * (piece.lo + 0.5 * d).cos() * (0.5 * d).sin()
            } else if piece.hi_crossing && node.to_hi < node.from_lo {
                let d = node.to_hi;
                -2.0 * r * (piece.hi - 0.5 * d).cos() * (0.5 * d).sin()
            } else {
                y0 + r * s
            };
            let p = [x0 + r * c, y];
            let w = y.abs().powf(a);
            if !w.is_finite() || w == 0.0 {
                continue;
            }
            let val = u.value(p);
            let g = u.gradient(p);
            let un = g[0] * c + g[1] * s;
            let weight = node.weight * r * w;
            let grad2 = g[0] * g[0] + g[1] * g[1];
            let weiss = (1.0 - a) * val / (std::f64::consts::SQRT_2 * r)
                - std::f64::consts::SQRT_2 * un;
            acc.w_u2 += weight * val * val;
            acc.w_u_un += weight * val * un;
            acc.w_grad2 += weight * grad2;
            acc.w_un2 += weight * un * un;
            acc.w_weiss += weight * weiss * weiss;
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{Grid, GridFunction};

    #[test]
    fn linear_field_on_unit_circle() {
        let g = Grid::new(33).unwrap();
        let u = GridFunction::from_fn(&g, 0.0, |p| p[0]);
        let ball = Ball::thin(0.0, 1.0).unwrap();
        let m = default_sphere_points(1.0, g.h());
        let v = sphere_integrals(&u, &ball, m);
        assert!((v.w_u2 - PI).abs() < 1e-12);
        assert!((v.w_u_un - PI).abs() < 1e-12);
        assert!((v.w_grad2 - 2.0 * PI).abs() < 1e-12);
        let zero = GridFunction::zeros(&g, 0.0).unwrap();
        for which in [
            SphereIntegrand::U2,
            SphereIntegrand::UUn,
            SphereIntegrand::Grad2,
            SphereIntegrand::Un2,
            SphereIntegrand::Weiss,
        ] {
            assert_eq!(sphere_quadrature(&zero, &ball, which, m).unwrap(), 0.0);
        }
    }

    #[test]
    fn singular_weight_circle_integral() {
        // ∮ |y|^a r dθ on a thin-centered circle = r^{1+a} · 2√π Γ((1+a)/2)/Γ(1+a/2).
        let g = Grid::new(17).unwrap();
        for &(a, closed) in &[(-0.5, 10.488230217168477), (0.5, 4.792560938942368)] {
            let u = GridFunction::from_fn(&g, a, |_| 1.0);
            let r: f64 = 0.5;
            let v = sphere_integrals(&u, &Ball::thin(0.0, r).unwrap(), 64).w_u2;
            let exact = r.powf(1.0 + a) * closed;
            assert!((v - exact).abs() < 1e-8 * exact, "a={a}: {v} vs {exact}");
            // Off-center circle crossing the thin line.
            let v = sphere_integrals(&u, &Ball::new([0.1, 0.2], 0.5).unwrap(), 64).w_u2;
            let t1 = (-0.4f64).asin();
            let t2 = PI - t1;
            let f = |t: f64| (0.2 + 0.5 * t.sin()).abs().powf(a) * 0.5;
            // Remove the endpoint singularities with t = end ± v².
            let arc = |lo: f64, hi: f64| {
                let half = (0.5 * (hi - lo)).sqrt();
                let rule = crate::quadrature::GaussLegendre::new(200);
                rule.integrate(0.0, half, |v| 2.0 * v * f(lo + v * v))
                    + rule.integrate(0.0, half, |v| 2.0 * v * f(hi - v * v))
            };
            let oracle = arc(t1, t2) + arc(t2, t1 + 2.0 * PI);
            assert!((v - oracle).abs() < 1e-6 * oracle, "a={a}: {v} vs {oracle}");
        }
    }

    #[test]
    fn escaping_ball_is_rejected() {
        let g = Grid::new(9).unwrap();
        let u = GridFunction::zeros(&g, 0.0).unwrap();
        let ball = Ball::thin(0.8, 0.5).unwrap();
        assert!(sphere_quadrature(&u, &ball, SphereIntegrand::U2, 64).is_err());
    }
}
