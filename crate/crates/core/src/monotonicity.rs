//! Almgren frequency, Weiss energy, scaled Dirichlet energy and the
//! differential identities between the ball and sphere integrals.
//!
//! With `D(r) = ∫_{B_r} w|∇u|²`, `H(r) = ∫_{∂B_r} w u²` and `w = |x₂|^a`:
//!
//! ```text
//! N(r) = r D(r) / H(r)
//! W(r) = r^{1-n} (D(r) + λ⁺|{u>0} ∩ B'_r| + λ⁻|{u<0} ∩ B'_r|) - s r^{-n} H(r)
//! ```

use std::fmt::Write as _;
use std::io::Write;

use crate::error::{invalid, Error, Result};
use crate::mesh::{
    default_sphere_points, sphere_integrals, Ball, Field, Point, ProblemParams, SphereIntegrals, DIM,
};
use crate::quadrature::GaussLegendre;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveKind {
    Almgren,
    Weiss,
    /// `r^{-(n-|a|)} D(r)`
    ScaledDirichlet,
    /// `r^{-(n+a)} D(r)`
    ScaledDirichletEven,
    /// `H(r)`
    Height,
    /// `D(r)`
    Dirichlet,
}

impl CurveKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Almgren => "almgren",
            Self::Weiss => "weiss",
            Self::ScaledDirichlet => "scaled_dirichlet",
            Self::ScaledDirichletEven => "scaled_dirichlet_even",
            Self::Height => "H",
            Self::Dirichlet => "D",
        }
    }
}

/// A sampled map `r ↦ value`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticCurve {
    pub kind: CurveKind,
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    /// Largest decrease between consecutive radii (zero for nondecreasing curves).
    pub slack: f64,
    pub a: f64,
    pub x0: Point,
}

impl DiagnosticCurve {
    pub fn new(kind: CurveKind, radii: Vec<f64>, values: Vec<f64>, a: f64, x0: Point) -> Self {
        let slack = values
            .windows(2)
            .map(|w| w[0] - w[1])
            .fold(0.0, f64::max);
        Self {
            kind,
            radii,
            values,
            slack,
            a,
            x0,
        }
    }

    fn scale(&self) -> f64 {
        self.values.iter().fold(0.0, |m: f64, v| m.max(v.abs()))
    }

    /// `slack / max |value|`.
    pub fn relative_slack(&self) -> f64 {
        let s = self.scale();
        if s > 0.0 {
            self.slack / s
        } else {
            0.0
        }
    }

    /// Largest decrease between any two radii, `max_{i<j} (vᵢ - vⱼ)`.
    pub fn max_drop(&self) -> f64 {
        let mut best: f64 = 0.0;
        let mut peak = f64::NEG_INFINITY;
        for &v in &self.values {
            peak = peak.max(v);
            best = best.max(peak - v);
        }
        best
    }

    pub fn relative_max_drop(&self) -> f64 {
        let s = self.scale();
        if s > 0.0 {
            self.max_drop() / s
        } else {
            0.0
        }
    }

    pub fn max_deviation(&self, target: f64) -> f64 {
        self.values.iter().fold(0.0, |m: f64, v| m.max((v - target).abs()))
    }

    /// Value at `r = 0` of the least-squares line in `r` through the first
    /// `count` samples.
    pub fn extrapolate_to_zero(&self, count: usize) -> Result<f64> {
        let k = count.min(self.radii.len());
        if k < 2 {
            return Err(invalid("extrapolation needs at least two radii"));
        }
        let (_, intercept, _) = least_squares(&self.radii[..k], &self.values[..k]);
        Ok(intercept)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(self.to_csv().as_bytes())?;
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "# kind={} a={} x0=({},{}) slack={:e}",
            self.kind.name(),
            self.a,
            self.x0[0],
            self.x0[1],
            self.slack
        );
        s.push_str("r,value\n");
        for (r, v) in self.radii.iter().zip(&self.values) {
            let _ = writeln!(s, "{r:.17e},{v:.17e}");
        }
        s
    }
}

/// Slope, intercept and root-mean-square residual of `y ≈ slope·x + intercept`.
pub(crate) fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let rss: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - slope * a - intercept).powi(2))
        .sum();
    (slope, intercept, (rss / n).sqrt())
}

/// Geometric radii from `4h` to `0.45` with ratio `2^{1/8}`.
pub fn default_radii(h: f64) -> Vec<f64> {
    let q = 2f64.powf(0.125);
    let mut out = Vec::new();
    let mut r = 4.0 * h;
    while r <= 0.45 * (1.0 + 1e-12) {
        out.push(r);
        r *= q;
    }
    out
}

fn check_radii(radii: &[f64]) -> Result<()> {
    if radii.is_empty() {
        return Err(invalid("no radii given"));
    }
    if radii[0] <= 0.0 || radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("radii must be positive and strictly increasing"));
    }
    Ok(())
}

fn ball_in<F: Field + ?Sized>(u: &F, center: Point, r: f64) -> Result<Ball> {
    let b = Ball::new(center, r)?;
    if !u.contains_ball(&b) {
        return Err(Error::BallOutsideGrid {
            x: center[0],
            y: center[1],
            radius: r,
        });
    }
    Ok(b)
}

fn sphere_points<F: Field + ?Sized>(u: &F, r: f64) -> usize {
    u.resolution().map_or(512, |h| default_sphere_points(r, h))
}

fn sphere<F: Field + ?Sized>(u: &F, ball: &Ball) -> SphereIntegrals {
    sphere_integrals(u, ball, sphere_points(u, ball.radius))
}

/// `D(r)` for each radius.
pub fn dirichlet_curve<F: Field + ?Sized>(u: &F, x0: Point, radii: &[f64]) -> Result<DiagnosticCurve> {
    check_radii(radii)?;
    let values = radii
        .iter()
        .map(|&r| u.dirichlet_in_ball(&ball_in(u, x0, r)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(DiagnosticCurve::new(CurveKind::Dirichlet, radii.to_vec(), values, u.a(), x0))
}

/// `H(r)` for each radius.
pub fn height_curve<F: Field + ?Sized>(u: &F, x0: Point, radii: &[f64]) -> Result<DiagnosticCurve> {
    check_radii(radii)?;
    let values = radii
        .iter()
        .map(|&r| Ok(sphere(u, &ball_in(u, x0, r)?).w_u2))
        .collect::<Result<Vec<_>>>()?;
    Ok(DiagnosticCurve::new(CurveKind::Height, radii.to_vec(), values, u.a(), x0))
}

/// `N(r) = r D(r) / H(r)` about the thin point `(x0, 0)`.
pub fn almgren_frequency<F: Field + ?Sized>(u: &F, x0: f64, radii: &[f64]) -> Result<DiagnosticCurve> {
    check_radii(radii)?;
    let center = [x0, 0.0];
    let mut values = Vec::with_capacity(radii.len());
    for &r in radii {
        let ball = ball_in(u, center, r)?;
        let h = sphere(u, &ball).w_u2;
        if h < 1e-14 {
            return Err(Error::DegenerateField(format!(
                "H({r}) = {h:e} about x0 = {x0}"
            )));
        }
        values.push(r * u.dirichlet_in_ball(&ball)? / h);
    }
    Ok(DiagnosticCurve::new(CurveKind::Almgren, radii.to_vec(), values, u.a(), center))
}

fn check_field_params<F: Field + ?Sized>(u: &F, p: &ProblemParams) -> Result<()> {
    if u.a() != p.a {
        return Err(invalid(format!(
            "field has a = {} but parameters have a = {}",
            u.a(),
            p.a
        )));
    }
    Ok(())
}

fn weiss_at<F: Field + ?Sized>(u: &F, x0: f64, p: &ProblemParams, r: f64) -> Result<f64> {
    let ball = ball_in(u, [x0, 0.0], r)?;
    let d = u.dirichlet_in_ball(&ball)?;
    let h = sphere(u, &ball).w_u2;
    let m = u.thin_phase_measure(x0 - r, x0 + r);
    let n = DIM as f64;
    let bulk = d + p.lambda_plus * m.positive + p.lambda_minus * m.negative;
    Ok(bulk / r.powf(n - 1.0) - p.s() / r.powf(n) * h)
}

/// `W(r)` about the thin point `(x0, 0)`; the slack is the largest decrease
/// between consecutive radii.
pub fn weiss_energy<F: Field + ?Sized>(
    u: &F,
    x0: f64,
    p: &ProblemParams,
    radii: &[f64],
) -> Result<DiagnosticCurve> {
    check_field_params(u, p)?;
    check_radii(radii)?;
    let values = radii
        .iter()
        .map(|&r| weiss_at(u, x0, p, r))
        .collect::<Result<Vec<_>>>()?;
    Ok(DiagnosticCurve::new(CurveKind::Weiss, radii.to_vec(), values, u.a(), [x0, 0.0]))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeissGap {
    /// `W(r₂) - W(r₁)`
    pub gap: f64,
    /// `∫_{r₁}^{r₂} ρ^{1-n} ∫_{∂B_ρ} w ((1-a)u/(√2ρ) - √2 u_ν)² dρ`
    pub integral: f64,
    pub mismatch: f64,
}

impl WeissGap {
    pub fn relative_mismatch(&self) -> f64 {
        let s = self.gap.abs().max(self.integral.abs());
        if s > 0.0 {
            self.mismatch / s
        } else {
            0.0
        }
    }
}

/// Compares the increase of `W` over `[r₁, r₂]` with the integrated
/// derivative formula, using 32 Gauss points in the radius.
pub fn weiss_gap_vs_integral<F: Field + ?Sized>(
    u: &F,
    x0: f64,
    p: &ProblemParams,
    r1: f64,
    r2: f64,
) -> Result<WeissGap> {
    check_field_params(u, p)?;
    if !(r1 > 0.0 && r2 > r1) {
        return Err(invalid(format!("need 0 < r1 < r2, got {r1}, {r2}")));
    }
    let gap = weiss_at(u, x0, p, r2)? - weiss_at(u, x0, p, r1)?;
    let n = DIM as f64;
    let rule = GaussLegendre::new(32);
    let mut integral = 0.0;
    for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
        let rho = 0.5 * (r1 + r2) + 0.5 * (r2 - r1) * t;
        let ball = ball_in(u, [x0, 0.0], rho)?;
        integral += 0.5 * (r2 - r1) * w * rho.powf(1.0 - n) * sphere(u, &ball).w_weiss;
    }
    Ok(WeissGap {
        gap,
        integral,
        mismatch: (gap - integral).abs(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScaledMode {
    /// Center must lie on the thin line.
    CenteredThin,
    /// Any center.
    OffCenter,
}

/// Scaled Dirichlet energies with the two exponents `n-|a|` and `n+a`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledDirichlet {
    pub odd_exponent: DiagnosticCurve,
    pub even_exponent: DiagnosticCurve,
}

pub fn scaled_dirichlet<F: Field + ?Sized>(
    u: &F,
    x0: Point,
    radii: &[f64],
    mode: ScaledMode,
) -> Result<ScaledDirichlet> {
    if mode == ScaledMode::CenteredThin && x0[1] != 0.0 {
        return Err(invalid(format!(
            "thin-centered mode needs x0 on the thin line, got x2 = {}",
            x0[1]
        )));
    }
    let d = dirichlet_curve(u, x0, radii)?;
    let a = u.a();
    let n = DIM as f64;
    let scaled = |e: f64| -> Vec<f64> {
        d.radii
            .iter()
            .zip(&d.values)
            .map(|(r, v)| v / r.powf(e))
            .collect()
    };
    Ok(ScaledDirichlet {
        odd_exponent: DiagnosticCurve::new(
            CurveKind::ScaledDirichlet,
            radii.to_vec(),
            scaled(n - a.abs()),
            a,
            x0,
        ),
        even_exponent: DiagnosticCurve::new(
            CurveKind::ScaledDirichletEven,
            radii.to_vec(),
            scaled(n + a),
            a,
            x0,
        ),
    })
}

/// Relative residuals of the three identities at one radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityResiduals {
    pub r: f64,
    /// `D' = (n-2+a)/r D + 2 ∫_{∂B_r} w u_ν²`
    pub d_prime: f64,
    /// `D = ∫_{∂B_r} w u u_ν`
    pub byparts: f64,
    /// `H' = (n-1+a)/r H + 2D`
    pub h_prime: f64,
}

impl IdentityResiduals {
    pub fn max(&self) -> f64 {
        self.d_prime.max(self.byparts).max(self.h_prime)
    }
}

fn relative(lhs: f64, rhs: f64) -> f64 {
    let s = lhs.abs().max(rhs.abs());
    if s > 1e-300 {
        (lhs - rhs).abs() / s
    } else {
        0.0
    }
}

/// Derivative of the quadratic through three samples, evaluated at `x[k]`.
fn three_point(x: [f64; 3], y: [f64; 3], k: usize) -> f64 {
    let t = x[k];
    let mut d = 0.0;
    for i in 0..3 {
        let mut num = 0.0;
        let mut den = 1.0;
        for j in 0..3 {
            if j == i {
                continue;
            }
            den *= x[i] - x[j];
            let mut prod = 1.0;
            for m in 0..3 {
                if m != i && m != j {
                    prod *= t - x[m];
                }
            }
            num += prod;
        }
        d += y[i] * num / den;
    }
    d
}

/// Derivative of a sampled curve: second-order differences in `log r`,
/// applied to `log v` where all stencil values are positive (exact for power
/// laws), one-sided at the ends.
pub(crate) fn curve_derivative(radii: &[f64], values: &[f64]) -> Vec<f64> {
    let n = radii.len();
    (0..n)
        .map(|i| {
            let start = i.saturating_sub(1).min(n - 3);
            let k = i - start;
            let idx = [start, start + 1, start + 2];
            let lr = idx.map(|j| radii[j].ln());
            if idx.iter().all(|&j| values[j] > 0.0) {
                let lv = idx.map(|j| values[j].ln());
                values[i] / radii[i] * three_point(lr, lv, k)
            } else {
                let v = idx.map(|j| values[j]);
                three_point(lr, v, k) / radii[i]
            }
        })
        .collect()
}

/// Residuals of the Dirichlet-derivative, integration-by-parts and
/// height-derivative identities about the thin point `(x0, 0)`.
pub fn frequency_identity_residuals<F: Field + ?Sized>(
    u: &F,
    x0: f64,
    radii: &[f64],
) -> Result<Vec<IdentityResiduals>> {
    check_radii(radii)?;
    if radii.len() < 3 {
        return Err(invalid("identity residuals need at least three radii"));
    }
    let a = u.a();
    let n = DIM as f64;
    let center = [x0, 0.0];
    let mut d = Vec::with_capacity(radii.len());
    let mut sph = Vec::with_capacity(radii.len());
    for &r in radii {
        let ball = ball_in(u, center, r)?;
        d.push(u.dirichlet_in_ball(&ball)?);
        sph.push(sphere(u, &ball));
    }
    let h: Vec<f64> = sph.iter().map(|s| s.w_u2).collect();
    let dp = curve_derivative(radii, &d);
    let hp = curve_derivative(radii, &h);
    Ok((0..radii.len())
        .map(|i| {
            let r = radii[i];
            IdentityResiduals {
                r,
                d_prime: relative(dp[i], (n - 2.0 + a) / r * d[i] + 2.0 * sph[i].w_un2),
                byparts: relative(d[i], sph[i].w_u_un),
                h_prime: relative(hp[i], (n - 1.0 + a) / r * h[i] + 2.0 * d[i]),
            }
        })
        .collect())
}
