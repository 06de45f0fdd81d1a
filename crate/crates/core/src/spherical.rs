//! Weighted eigenproblems on the unit circle and its arcs.
//!
//! On `S¹` the spherical part of the a-Laplacian is the Sturm–Liouville
//! operator `-(w f')' = λ w f` with `w(θ) = |sin θ|^a`. A homogeneous
//! function `r^α f(θ)` is a-harmonic off the origin exactly when
//! `λ = α(α + n - 2 + a)`.
//!
//! Discretization: piecewise-linear elements on meshes graded toward the
//! angles where the weight degenerates, element integrals by tanh-sinh
//! quadrature, and a dense symmetric-definite eigensolve.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::ops::Range;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{invalid, Error, Result};
use crate::mesh::{check_exponent, Grid, GridFunction, DIM};
use crate::quadrature::tanh_sinh_nodes;

/// Open subset of `S¹` on which the eigenproblem is posed.
#[derive(Debug, Clone, PartialEq)]
pub enum ArcDomain {
    FullCircle,
    /// `(0, π)` with Dirichlet ends.
    UpperSemicircle,
    /// `S¹ ∖ {π}`, parametrized by `(-π, π)` with Dirichlet ends.
    SlitCircle,
    /// Disjoint open arcs `(lo, hi)` in radians, each with Dirichlet ends.
    Arcs(Vec<(f64, f64)>),
}

impl ArcDomain {
    /// Parses `full`, `upper`, `slit` or `arcs:<lo>:<hi>[;<lo>:<hi>…]`.
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "full" => return Ok(Self::FullCircle),
            "upper" => return Ok(Self::UpperSemicircle),
            "slit" => return Ok(Self::SlitCircle),
            _ => {}
        }
        let rest = s
            .trim()
            .strip_prefix("arcs:")
            .ok_or_else(|| invalid(format!("unknown domain '{s}' (expected full, upper, slit, arcs:lo:hi)")))?;
        let mut arcs = Vec::new();
        for part in rest.split(';') {
            let (lo, hi) = part
                .split_once(':')
                .ok_or_else(|| invalid(format!("arc '{part}' must be lo:hi")))?;
            let lo: f64 = lo.trim().parse().map_err(|_| invalid(format!("bad arc start '{lo}'")))?;
            let hi: f64 = hi.trim().parse().map_err(|_| invalid(format!("bad arc end '{hi}'")))?;
            arcs.push((lo, hi));
        }
        let dom = Self::Arcs(arcs);
        dom.arcs()?;
        Ok(dom)
    }

    pub fn name(&self) -> String {
        match self {
            Self::FullCircle => "full".into(),
            Self::UpperSemicircle => "upper".into(),
            Self::SlitCircle => "slit".into(),
            Self::Arcs(arcs) => {
                let parts: Vec<String> = arcs.iter().map(|(l, h)| format!("{l}:{h}")).collect();
                format!("arcs:{}", parts.join(";"))
            }
        }
    }

    /// Arcs of a proper domain, sorted; `None` for the full circle.
    fn arcs(&self) -> Result<Option<Vec<(f64, f64)>>> {
        let mut arcs = match self {
            Self::FullCircle => return Ok(None),
            Self::UpperSemicircle => vec![(0.0, PI)],
            Self::SlitCircle => vec![(-PI, PI)],
            Self::Arcs(a) => a.clone(),
        };
        if arcs.is_empty() {
            return Err(invalid("arc domain is empty"));
        }
        arcs.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut total = 0.0;
        for (i, &(lo, hi)) in arcs.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(invalid(format!("arc ({lo}, {hi}) is empty or not finite")));
            }
            if lo < -2.0 * PI || hi > 2.0 * PI {
                return Err(invalid(format!("arc ({lo}, {hi}) outside [-2π, 2π]")));
            }
            if i > 0 && lo < arcs[i - 1].1 {
                return Err(invalid("arcs overlap"));
            }
            total += hi - lo;
        }
        if total > 2.0 * PI + 1e-12 || arcs.last().unwrap().1 - arcs[0].0 > 2.0 * PI + 1e-12 {
            return Err(invalid("arcs cover more than the circle"));
        }
        Ok(Some(arcs))
    }
}

/// `α = (-(n-2+a) + √((n-2+a)² + 4λ))/2`; the constant mode (`λ ≤ 1e-10`)
/// has degree 0 for every `a`.
pub fn degree_from_eigenvalue(lambda: f64, a: f64) -> f64 {
    if lambda <= 1e-10 {
        return 0.0;
    }
    let b = DIM as f64 - 2.0 + a;
    0.5 * (-b + (b * b + 4.0 * lambda).sqrt())
}

/// `λ = α(α + n - 2 + a)`.
pub fn eigenvalue_from_degree(alpha: f64, a: f64) -> f64 {
    alpha * (alpha + DIM as f64 - 2.0 + a)
}

/// Default element count.
pub const DEFAULT_ELEMENTS: usize = 512;

/// Eigenpairs of the weighted operator on an [`ArcDomain`].
#[derive(Debug, Clone)]
pub struct SphericalSpectrum {
    pub domain: ArcDomain,
    pub a: f64,
    pub eigenvalues: Vec<f64>,
    pub degrees: Vec<f64>,
    /// Mesh angles, arc by arc; Dirichlet endpoints included, and for the
    /// full circle the closing node `2π`.
    pub theta: Vec<f64>,
    /// Ranges of `theta` belonging to each arc.
    pub arcs: Vec<Range<usize>>,
    /// Weight-normalized eigenfunctions at `theta`.
    pub eigenvectors: Vec<Vec<f64>>,
    stiffness: DMatrix<f64>,
    mass: DMatrix<f64>,
    dofs: Vec<usize>,
}

impl SphericalSpectrum {
    /// Eigenfunction `k` at angle `phi` (any representative mod 2π); zero
    /// off the domain.
    pub fn eval(&self, k: usize, phi: f64) -> f64 {
        let f = &self.eigenvectors[k];
        for shift in [0.0, 2.0 * PI, -2.0 * PI, 4.0 * PI] {
            let t = phi + shift;
            for r in &self.arcs {
                let th = &self.theta[r.clone()];
                if t < th[0] || t > th[th.len() - 1] {
                    continue;
                }
                let i = th.partition_point(|&x| x <= t).clamp(1, th.len() - 1);
                let (t0, t1) = (th[i - 1], th[i]);
                let s = if t1 > t0 { (t - t0) / (t1 - t0) } else { 0.0 };
                return (1.0 - s) * f[r.start + i - 1] + s * f[r.start + i];
            }
        }
        0.0
    }

    /// `|fᵀKf - λ fᵀMf|` for pair `k`, the discrete Rayleigh defect.
    pub fn rayleigh_defect(&self, k: usize) -> f64 {
        let v = nalgebra::DVector::from_iterator(self.dofs.len(), self.dofs.iter().map(|&d| self.eigenvectors[k][d]));
        let kf = (&self.stiffness * &v).dot(&v);
        let mf = (&self.mass * &v).dot(&v);
        (kf - self.eigenvalues[k] * mf).abs()
    }

    /// `∫ w f_j f_k` by the discrete mass matrix.
    pub fn weighted_inner(&self, j: usize, k: usize) -> f64 {
        let gather = |i: usize| {
            nalgebra::DVector::from_iterator(self.dofs.len(), self.dofs.iter().map(|&d| self.eigenvectors[i][d]))
        };
        (&self.mass * gather(j)).dot(&gather(k))
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# domain={} a={} elements={}", self.domain.name(), self.a, self.theta.len() - self.arcs.len());
        s.push_str("k,lambda,alpha\n");
        for (k, (l, al)) in self.eigenvalues.iter().zip(&self.degrees).enumerate() {
            let _ = writeln!(s, "{},{l:.17e},{al:.17e}", k + 1);
        }
        s
    }

    pub fn eigenfunction_csv(&self, k: usize) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "# domain={} a={} k={} lambda={:e} alpha={:e}",
            self.domain.name(),
            self.a,
            k + 1,
            self.eigenvalues[k],
            self.degrees[k]
        );
        s.push_str("theta,f\n");
        for (t, v) in self.theta.iter().zip(&self.eigenvectors[k]) {
            let _ = writeln!(s, "{t:.17e},{v:.17e}");
        }
        s
    }
}

fn is_singular(t: f64) -> bool {
    let k = (t / PI).round();
    (t - k * PI).abs() <= 1e-14
}

/// Nodes on `[lo, hi)`, graded with exponent `g` toward singular ends.
fn graded_piece(lo: f64, hi: f64, count: usize, g: f64) -> Vec<f64> {
    let (sl, sh) = (is_singular(lo), is_singular(hi));
    let len = hi - lo;
    (0..count)
        .map(|k| {
            let t = k as f64 / count as f64;
            match (sl, sh) {
                (true, true) if t > 0.5 => hi - len * 0.5 * (2.0 * (1.0 - t)).powf(g),
                (true, true) => lo + len * 0.5 * (2.0 * t).powf(g),
                (true, false) => lo + len * t.powf(g),
                (false, true) => hi - len * (1.0 - t).powf(g),
                (false, false) => lo + len * t,
            }
        })
        .collect()
}

/// Mesh nodes of `[lo, hi]`, both ends included.
fn arc_nodes(lo: f64, hi: f64, elements: usize, g: f64) -> Vec<f64> {
    let mut breaks = vec![lo];
    let mut k = (lo / PI).floor() + 1.0;
    while k * PI < hi - 1e-14 {
        if k * PI > lo + 1e-14 {
            breaks.push(k * PI);
        }
        k += 1.0;
    }
    breaks.push(hi);
    let mut nodes = Vec::new();
    for w in breaks.windows(2) {
        let count = ((elements as f64 * (w[1] - w[0]) / (hi - lo)).round() as usize).max(8);
        nodes.extend(graded_piece(w[0], w[1], count, g));
    }
    nodes.push(hi);
    nodes
}

/// `∫ w`, `∫ w ξ`, `∫ w ξ²` over `[t0, t1]` with `ξ = (θ - t0)/(t1 - t0)`.
fn element_moments(t0: f64, t1: f64, a: f64) -> [f64; 3] {
    let (sl, sh) = (is_singular(t0), is_singular(t1));
    let len = t1 - t0;
    let mut out = [0.0; 3];
    for node in tanh_sinh_nodes(t0, t1, 48) {
        let s = if sl && node.from_lo <= node.to_hi {
            node.from_lo.sin()
        } else if sh && node.to_hi < node.from_lo {
            node.to_hi.sin()
        } else {
            node.x.sin().abs()
        };
        let w = node.weight * s.powf(a);
        if !w.is_finite() {
            continue;
        }
        let xi = node.from_lo / len;
        out[0] += w;
        out[1] += w * xi;
        out[2] += w * xi * xi;
    }
    out
}

/// First `k` eigenpairs on `dom` with about `m` elements.
pub fn solve_spectrum(dom: &ArcDomain, a: f64, k: usize, m: usize) -> Result<SphericalSpectrum> {
    check_exponent(a)?;
    if k == 0 {
        return Err(invalid("requested zero eigenpairs"));
    }
    if !(16..=4096).contains(&m) {
        return Err(invalid(format!("element count {m} outside [16, 4096]")));
    }
    let g = (2.0 / (1.0 - a)).clamp(1.0, 4.0);
    let arcs = dom.arcs()?;
    let mut theta = Vec::new();
    let mut ranges = Vec::new();
    // Global node index → dof (None for Dirichlet nodes) and element list.
    let mut dof_of: Vec<Option<usize>> = Vec::new();
    let mut elements: Vec<(usize, usize)> = Vec::new();
    let mut ndof = 0;
    match &arcs {
        None => {
            let nodes = arc_nodes(0.0, 2.0 * PI, m, g);
            let n = nodes.len() - 1;
            for i in 0..=n {
                dof_of.push(Some(if i == n { 0 } else { i }));
            }
            ndof = n;
            elements.extend((0..n).map(|i| (i, i + 1)));
            ranges.push(0..nodes.len());
            theta = nodes;
        }
        Some(arcs) => {
            let total: f64 = arcs.iter().map(|(l, h)| h - l).sum();
            for &(lo, hi) in arcs {
                let count = ((m as f64 * (hi - lo) / total).round() as usize).max(16);
                let nodes = arc_nodes(lo, hi, count, g);
                let start = theta.len();
                for i in 0..nodes.len() {
                    if i == 0 || i + 1 == nodes.len() {
                        dof_of.push(None);
                    } else {
                        dof_of.push(Some(ndof));
                        ndof += 1;
                    }
                }
                elements.extend((start..start + nodes.len() - 1).map(|i| (i, i + 1)));
                ranges.push(start..start + nodes.len());
                theta.extend(nodes);
            }
        }
    }
    if k > ndof {
        return Err(invalid(format!("requested {k} pairs from {ndof} unknowns")));
    }
    let mut stiff = DMatrix::zeros(ndof, ndof);
    let mut mass = DMatrix::zeros(ndof, ndof);
    let mut element_k = Vec::with_capacity(elements.len());
    for &(i, j) in &elements {
        let (t0, t1) = (theta[i], theta[j]);
        let [w0, w1, w2] = element_moments(t0, t1, a);
        let len = t1 - t0;
        let ke = w0 / (len * len);
        element_k.push(ke);
        let me = [[w0 - 2.0 * w1 + w2, w1 - w2], [w1 - w2, w2]];
        let ids = [dof_of[i], dof_of[j]];
        for (p, dp) in ids.iter().enumerate() {
            let Some(dp) = dp else { continue };
            for (q, dq) in ids.iter().enumerate() {
                let Some(dq) = dq else { continue };
                stiff[(*dp, *dq)] += if p == q { ke } else { -ke };
                mass[(*dp, *dq)] += me[p][q];
            }
        }
    }
    let chol = mass.clone().cholesky().ok_or(Error::IndefiniteMass)?;
    let l = chol.l();
    let x = l
        .solve_lower_triangular(&stiff)
        .ok_or(Error::IndefiniteMass)?;
    let c = l
        .solve_lower_triangular(&x.transpose())
        .ok_or(Error::IndefiniteMass)?;
    let c = (&c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::new(c);
    let mut order: Vec<usize> = (0..ndof).collect();
    order.sort_by(|&p, &q| eig.eigenvalues[p].total_cmp(&eig.eigenvalues[q]));
    let lt = l.transpose();
    let mut pairs = Vec::new();
    for &idx in order.iter().take((k + 8).min(ndof)) {
        let y = eig.eigenvectors.column(idx).into_owned();
        let f = lt.solve_upper_triangular(&y).ok_or(Error::IndefiniteMass)?;
        let mut full: Vec<f64> = dof_of.iter().map(|d| d.map_or(0.0, |d| f[d])).collect();
        // Sign convention: the entry of largest magnitude is positive.
        let peak = full.iter().fold(0.0f64, |m, &v| if v.abs() > m.abs() { v } else { m });
        if peak < 0.0 {
            full.iter_mut().for_each(|v| *v = -*v);
        }
        // Rayleigh quotient from element differences: the dense eigensolve
        // loses absolute accuracy on strongly graded meshes.
        let energy: f64 = elements
            .iter()
            .zip(&element_k)
            .map(|(&(i, j), ke)| ke * (full[i] - full[j]).powi(2))
            .sum();
        let fv = nalgebra::DVector::from_iterator(ndof, f.iter().copied());
        let norm = (&mass * &fv).dot(&fv);
        pairs.push((energy / norm, full));
    }
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
    pairs.truncate(k);
    let (eigenvalues, eigenvectors): (Vec<f64>, Vec<Vec<f64>>) = pairs.into_iter().unzip();
    let dofs: Vec<usize> = {
        let mut first = vec![usize::MAX; ndof];
        for (node, d) in dof_of.iter().enumerate() {
            if let Some(d) = d {
                if first[*d] == usize::MAX {
                    first[*d] = node;
                }
            }
        }
        first
    };
    let degrees = eigenvalues.iter().map(|&l| degree_from_eigenvalue(l, a)).collect();
    Ok(SphericalSpectrum {
        domain: dom.clone(),
        a,
        eigenvalues,
        degrees,
        theta,
        arcs: ranges,
        eigenvectors,
        stiffness: stiff,
        mass,
        dofs,
    })
}

/// Smallest positive degree of the full-circle spectrum.
pub fn min_positive_degree(a: f64) -> Result<f64> {
    let spec = solve_spectrum(&ArcDomain::FullCircle, a, 6, DEFAULT_ELEMENTS)?;
    spec.degrees
        .iter()
        .copied()
        .find(|&d| d > 1e-6)
        .ok_or_else(|| Error::DegenerateField("no positive degree among the first modes".into()))
}

/// Margins `λ_k(S¹) - γ_k(dom)` for `k = 1..=count`.
pub fn courant_fischer_compare(dom: &ArcDomain, a: f64, count: usize, m: usize) -> Result<Vec<f64>> {
    if *dom == ArcDomain::FullCircle {
        return Err(invalid("comparison needs a proper subdomain"));
    }
    let full = solve_spectrum(&ArcDomain::FullCircle, a, count, m)?;
    let sub = solve_spectrum(dom, a, count, m)?;
    Ok(full
        .eigenvalues
        .iter()
        .zip(&sub.eigenvalues)
        .map(|(l, g)| l - g)
        .collect())
}

/// `r^α f(θ)` for eigenpair `index`, zero off the domain.
pub fn homogeneous_field(spec: &SphericalSpectrum, index: usize, grid: &Grid) -> Result<GridFunction> {
    if index >= spec.degrees.len() {
        return Err(invalid(format!("mode {index} not computed")));
    }
    let alpha = spec.degrees[index];
    if !(alpha > 0.0) {
        return Err(invalid(format!("mode {index} has degree {alpha}; need a positive degree")));
    }
    Ok(GridFunction::from_fn(grid, spec.a, |[x, y]| {
        let r = x.hypot(y);
        if r == 0.0 {
            0.0
        } else {
            r.powf(alpha) * spec.eval(index, y.atan2(x))
        }
    }))
}
