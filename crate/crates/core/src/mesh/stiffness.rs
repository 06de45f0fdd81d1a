use super::weight::FittedCell;
use super::{check_exponent, Grid};
use crate::error::Result;

/// Symmetric tridiagonal matrix stored by diagonal and super-diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiag {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiag {
    fn zeros(n: usize) -> Self {
        Self {
            diag: vec![0.0; n],
            off: vec![0.0; n.saturating_sub(1)],
        }
    }

    fn add_cell(&mut self, k: usize, m00: f64, m01: f64, m11: f64) {
        self.diag[k] += m00;
        self.diag[k + 1] += m11;
        self.off[k] += m01;
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Entry `(i, j)`; zero outside the band.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        if i == j {
            self.diag[i]
        } else if i + 1 == j {
            self.off[i]
        } else if j + 1 == i {
            self.off[j]
        } else {
            0.0
        }
    }
}

/// Weighted stiffness operator of the form `∫ |x₂|^a ⟨∇u, ∇v⟩` on a grid.
///
/// The trial space is a tensor product of linear hats in `x₁` and fitted
/// hats in `x₂` (see [`super::weight`]). Because the weight depends on `x₂`
/// only, the operator factors exactly as `Aₓ ⊗ M_y + Mₓ ⊗ A_y` where the
/// `x`-factors are the uniform P1 matrices and the `y`-factors carry the
/// weight. Entries are products of 1D entries, so symmetry is exact.
#[derive(Debug, Clone)]
pub struct WeightedStiffness {
    pub grid: Grid,
    pub a: f64,
    pub stiff_x: SymTridiag,
    pub mass_x: SymTridiag,
    pub stiff_y: SymTridiag,
    pub mass_y: SymTridiag,
}

/// Assembles the weighted stiffness operator for `grid` and exponent `a`.
pub fn assemble_stiffness(grid: &Grid, a: f64) -> Result<WeightedStiffness> {
    check_exponent(a)?;
    let h = grid.h();
    let mut stiff_x = SymTridiag::zeros(grid.nx);
    let mut mass_x = SymTridiag::zeros(grid.nx);
    for i in 0..grid.nx - 1 {
        stiff_x.add_cell(i, 1.0 / h, -1.0 / h, 1.0 / h);
        mass_x.add_cell(i, h / 3.0, h / 6.0, h / 3.0);
    }
    let mut stiff_y = SymTridiag::zeros(grid.ny);
    let mut mass_y = SymTridiag::zeros(grid.ny);
    for j in 0..grid.ny - 1 {
        let cell = FittedCell::new(grid.y(j), grid.y(j + 1), a);
        let k = cell.stiffness();
        stiff_y.add_cell(j, k, -k, k);
        let (m00, m01, m11) = cell.mass();
        mass_y.add_cell(j, m00, m01, m11);
    }
    Ok(WeightedStiffness {
        grid: *grid,
        a,
        stiff_x,
        mass_x,
        stiff_y,
        mass_y,
    })
}

/// Applies a symmetric tridiagonal matrix along rows (`x`-direction).
fn apply_along_x(t: &SymTridiag, u: &[f64], out: &mut [f64], nx: usize) {
    for (row_in, row_out) in u.chunks_exact(nx).zip(out.chunks_exact_mut(nx)) {
        for i in 0..nx {
            let mut v = t.diag[i] * row_in[i];
            if i > 0 {
                v += t.off[i - 1] * row_in[i - 1];
            }
            if i + 1 < nx {
                v += t.off[i] * row_in[i + 1];
            }
            row_out[i] = v;
        }
    }
}

/// `out += T ⊗ (·)` along columns (`y`-direction).
fn add_along_y(t: &SymTridiag, u: &[f64], out: &mut [f64], nx: usize, ny: usize) {
    for j in 0..ny {
        let d = t.diag[j];
        let (lo, hi) = (j.checked_sub(1), (j + 1 < ny).then_some(j + 1));
        for i in 0..nx {
            let mut v = d * u[j * nx + i];
            if let Some(l) = lo {
                v += t.off[l] * u[l * nx + i];
            }
            if let Some(hh) = hi {
                v += t.off[j] * u[hh * nx + i];
            }
            out[j * nx + i] += v;
        }
    }
}

impl WeightedStiffness {
    /// `K u` over all nodes (boundary rows included).
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; u.len()];
        self.apply_into(u, &mut out);
        out
    }

    pub fn apply_into(&self, u: &[f64], out: &mut [f64]) {
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        assert_eq!(u.len(), nx * ny);
        let mut tmp = vec![0.0; u.len()];
        out.iter_mut().for_each(|v| *v = 0.0);
        apply_along_x(&self.stiff_x, u, &mut tmp, nx);
        add_along_y(&self.mass_y, &tmp, out, nx, ny);
        apply_along_x(&self.mass_x, u, &mut tmp, nx);
        add_along_y(&self.stiff_y, &tmp, out, nx, ny);
    }

    /// Quadratic form `uᵀ K u`, the weighted Dirichlet energy.
    pub fn energy(&self, u: &[f64]) -> f64 {
        let ku = self.apply(u);
        u.iter().zip(&ku).map(|(a, b)| a * b).sum()
    }

    /// Entry `K[p, q]` for node indices `p`, `q`.
    pub fn entry(&self, p: usize, q: usize) -> f64 {
        let nx = self.grid.nx;
        let (ip, jp) = (p % nx, p / nx);
        let (iq, jq) = (q % nx, q / nx);
        self.stiff_x.entry(ip, iq) * self.mass_y.entry(jp, jq)
            + self.mass_x.entry(ip, iq) * self.stiff_y.entry(jp, jq)
    }

    /// Nonzero entries `(p, q, value)` in row-major order.
    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        let mut out = Vec::with_capacity(9 * nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                let p = j * nx + i;
                for jq in j.saturating_sub(1)..=(j + 1).min(ny - 1) {
                    for iq in i.saturating_sub(1)..=(i + 1).min(nx - 1) {
                        let q = jq * nx + iq;
                        out.push((p, q, self.entry(p, q)));
                    }
                }
            }
        }
        out
    }
}
