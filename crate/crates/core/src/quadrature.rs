//! One-dimensional quadrature rules shared by the mesh, diagnostics and the
//! spherical eigensolver.
//!
//! Three rules are provided:
//! - fixed-order Gauss–Legendre, for smooth integrands on short intervals;
//! - tanh-sinh, for integrands with algebraic endpoint singularities such as
//!   `|sin θ|^a` or `|y|^{-a}` at the thin line;
//! - adaptive Gauss–Legendre bisection, used where neither of the above is
//!   accurate enough on its own.

use std::sync::OnceLock;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Computes the `n`-point rule by Newton iteration on `P_n`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            // Chebyshev-like initial guess for the i-th largest root.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// Integrates `f` over `[lo, hi]`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, lo: f64, hi: f64, mut f: F) -> f64 {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let (p, prev) = if n == 0 { (1.0, 0.0) } else { (p1, p0) };
    let d = if n == 0 {
        0.0
    } else {
        n as f64 * (x * p - prev) / (x * x - 1.0)
    };
    (p, d)
}

/// Shared 16-point rule.
pub fn gauss16() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(16))
}

/// Shared 10-point rule used by the adaptive integrator.
pub fn gauss10() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(10))
}

/// Half-width of the tanh-sinh parameter interval. At `t = 6` the nodes sit
/// within ~1e-270 of the endpoints, enough to capture `x^{-0.9}` tails.
const TANH_SINH_T: f64 = 6.0;

/// A single tanh-sinh node mapped onto `[lo, hi]`.
#[derive(Debug, Clone, Copy)]
pub struct TanhSinhNode {
    /// Abscissa in `[lo, hi]`.
    pub x: f64,
    /// Distance from `lo` (accurate even when tiny).
    pub from_lo: f64,
    /// Distance to `hi` (accurate even when tiny).
    pub to_hi: f64,
    pub weight: f64,
}

/// Tanh-sinh nodes on `[lo, hi]` with `n` points.
///
/// Distances to both endpoints are computed without cancellation so that
/// callers can evaluate singular weights like `|t - lo|^a` near the ends.
pub fn tanh_sinh_nodes(lo: f64, hi: f64, n: usize) -> Vec<TanhSinhNode> {
    let n = n.max(3);
    let len = hi - lo;
    let step = 2.0 * TANH_SINH_T / (n - 1) as f64;
    let half_pi = std::f64::consts::FRAC_PI_2;
    (0..n)
        .filter_map(|k| {
            let t = -TANH_SINH_T + k as f64 * step;
            let z = half_pi * t.sinh();
            let e = (-2.0 * z.abs()).exp();
            // 1/cosh^2(z) = 4 e^{-2|z|} / (1 + e^{-2|z|})^2
            let sech2 = 4.0 * e / ((1.0 + e) * (1.0 + e));
            let weight = step * half_pi * t.cosh() * sech2 * 0.5 * len;
            // 1 + tanh z and 1 - tanh z, each accurate on its small side.
            let (one_plus, one_minus) = if z >= 0.0 {
                (2.0 / (1.0 + e), 2.0 * e / (1.0 + e))
            } else {
                (2.0 * e / (1.0 + e), 2.0 / (1.0 + e))
            };
            let from_lo = 0.5 * len * one_plus;
            let to_hi = 0.5 * len * one_minus;
            if weight == 0.0 || from_lo <= 0.0 || to_hi <= 0.0 {
                return None;
            }
            let x = if z < 0.0 { lo + from_lo } else { hi - to_hi };
            Some(TanhSinhNode {
                x,
                from_lo,
                to_hi,
                weight,
            })
        })
        .collect()
}

/// Integrates `f` over `[lo, hi]` with an `n`-point tanh-sinh rule.
pub fn tanh_sinh<F: FnMut(f64) -> f64>(lo: f64, hi: f64, n: usize, mut f: F) -> f64 {
    tanh_sinh_nodes(lo, hi, n)
        .into_iter()
        .map(|node| node.weight * f(node.x))
        .sum()
}

/// Adaptive Gauss–Legendre integration by recursive bisection.
///
/// Each panel is accepted once the 10-point value over the panel agrees with
/// the sum over its two halves to `rel_tol` (relative to the running scale)
/// or the depth limit is reached.
pub fn adaptive_gauss<F: FnMut(f64) -> f64>(lo: f64, hi: f64, rel_tol: f64, mut f: F) -> f64 {
    let rule = gauss10();
    let whole = rule.integrate(lo, hi, &mut f);
    adaptive_step(rule, lo, hi, whole, rel_tol, 0, &mut f)
}

fn adaptive_step<F: FnMut(f64) -> f64>(
    rule: &GaussLegendre,
    lo: f64,
    hi: f64,
    whole: f64,
    rel_tol: f64,
    depth: usize,
    f: &mut F,
) -> f64 {
    let mid = 0.5 * (lo + hi);
    let left = rule.integrate(lo, mid, &mut *f);
    let right = rule.integrate(mid, hi, &mut *f);
    let refined = left + right;
    let scale = refined.abs().max(whole.abs());
    if !refined.is_finite() {
        return refined;
    }
    if depth >= 48 || (refined - whole).abs() <= rel_tol * scale || scale == 0.0 {
        return refined;
    }
    adaptive_step(rule, lo, mid, left, rel_tol, depth + 1, f)
        + adaptive_step(rule, mid, hi, right, rel_tol, depth + 1, f)
}
