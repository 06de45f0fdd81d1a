//! Direct solver for the interior block of the weighted stiffness operator.
//!
//! On interior columns the `x₁`-factors of `K = Aₓ ⊗ M_y + Mₓ ⊗ A_y` are the
//! uniform P1 matrices, which the orthonormal sine transform
//! `Q_ik = √(2/(N+1)) sin(π i k/(N+1))` diagonalizes simultaneously. Each sine
//! mode `k` then leaves a symmetric tridiagonal system in `x₂`,
//! `T_k = α_k M_y + β_k A_y`, solved by Thomas elimination.
//!
//! The same factorization gives the Schur complement of `K` onto the thin row
//! in closed form: `S = Q diag(σ_k) Q` with `σ_k = 1 / (T_k⁻¹)_{j₀ j₀}`.

use nalgebra::DMatrix;

use crate::mesh::{Grid, WeightedStiffness};

#[derive(Debug, Clone)]
struct ModeFactor {
    off: Vec<f64>,
    denom: Vec<f64>,
    cprime: Vec<f64>,
}

impl ModeFactor {
    fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        let n = diag.len();
        let mut denom = vec![0.0; n];
        let mut cprime = vec![0.0; n.saturating_sub(1)];
        denom[0] = diag[0];
        for j in 0..n {
            if j > 0 {
                denom[j] = diag[j] - off[j - 1] * cprime[j - 1];
            }
            if j + 1 < n {
                cprime[j] = off[j] / denom[j];
            }
        }
        Self { off, denom, cprime }
    }

    fn solve_in_place(&self, v: &mut [f64]) {
        let n = v.len();
        v[0] /= self.denom[0];
        for j in 1..n {
            v[j] = (v[j] - self.off[j - 1] * v[j - 1]) / self.denom[j];
        }
        for j in (0..n - 1).rev() {
            v[j] -= self.cprime[j] * v[j + 1];
        }
    }
}

/// Fast solver for `K_II x = b` on all interior nodes (zero Dirichlet data).
#[derive(Debug, Clone)]
pub struct TensorSolver {
    pub grid: Grid,
    nxi: usize,
    nyi: usize,
    q: DMatrix<f64>,
    modes: Vec<ModeFactor>,
}

impl TensorSolver {
    pub fn new(k: &WeightedStiffness) -> Self {
        let grid = k.grid;
        let nxi = grid.nx - 2;
        let nyi = grid.ny - 2;
        let h = grid.h();
        let n1 = (nxi + 1) as f64;
        let scale = (2.0 / n1).sqrt();
        let q = DMatrix::from_fn(nxi, nxi, |i, kk| {
            scale * (std::f64::consts::PI * ((i + 1) * (kk + 1)) as f64 / n1).sin()
        });
        let modes = (0..nxi)
            .map(|kk| {
                let theta = std::f64::consts::PI * (kk + 1) as f64 / n1;
                let alpha = 2.0 / h * (1.0 - theta.cos());
                let beta = h / 3.0 * (2.0 + theta.cos());
                let diag = (1..=nyi)
                    .map(|j| alpha * k.mass_y.diag[j] + beta * k.stiff_y.diag[j])
                    .collect();
                let off = (1..nyi)
                    .map(|j| alpha * k.mass_y.off[j] + beta * k.stiff_y.off[j])
                    .collect();
                ModeFactor::new(diag, off)
            })
            .collect();
        Self {
            grid,
            nxi,
            nyi,
            q,
            modes,
        }
    }

    pub fn interior_len(&self) -> usize {
        self.nxi * self.nyi
    }

    /// Solves for interior values stored row-major (`j` slow, `i` fast, both
    /// counted from the first interior node).
    pub fn solve_interior(&self, rhs: &[f64]) -> Vec<f64> {
        assert_eq!(rhs.len(), self.interior_len());
        let x = DMatrix::from_column_slice(self.nxi, self.nyi, rhs);
        let mut modal = (&self.q * x).transpose();
        for (kk, mode) in self.modes.iter().enumerate() {
            mode.solve_in_place(modal.column_mut(kk).as_mut_slice());
        }
        let out = &self.q * modal.transpose();
        out.as_slice().to_vec()
    }

    /// `K_II⁻¹` applied to a full-grid vector whose boundary entries are
    /// ignored; the result has zero boundary entries.
    pub fn solve_full(&self, rhs: &[f64]) -> Vec<f64> {
        let interior = self.restrict(rhs);
        self.extend(&self.solve_interior(&interior))
    }

    pub fn restrict(&self, full: &[f64]) -> Vec<f64> {
        let nx = self.grid.nx;
        let mut out = Vec::with_capacity(self.interior_len());
        for j in 1..=self.nyi {
            out.extend_from_slice(&full[j * nx + 1..j * nx + 1 + self.nxi]);
        }
        out
    }

    pub fn extend(&self, interior: &[f64]) -> Vec<f64> {
        let nx = self.grid.nx;
        let mut out = vec![0.0; self.grid.len()];
        for j in 1..=self.nyi {
            out[j * nx + 1..j * nx + 1 + self.nxi]
                .copy_from_slice(&interior[(j - 1) * self.nxi..j * self.nxi]);
        }
        out
    }

    /// Reduction of the interior problem onto the interior thin nodes.
    pub fn thin_reduction(&self) -> ThinReduction {
        let j0 = self.grid.thin_row() - 1;
        let mut sigma = Vec::with_capacity(self.nxi);
        let mut profile = DMatrix::zeros(self.nyi, self.nxi);
        for (kk, mode) in self.modes.iter().enumerate() {
            let mut z = vec![0.0; self.nyi];
            z[j0] = 1.0;
            mode.solve_in_place(&mut z);
            let s = 1.0 / z[j0];
            sigma.push(s);
            for (j, v) in z.iter().enumerate() {
                profile[(j, kk)] = v * s;
            }
            profile[(j0, kk)] = 1.0;
        }
        let schur = &self.q * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(sigma.clone()))
            * &self.q;
        ThinReduction {
            q: self.q.clone(),
            sigma,
            profile,
            schur,
            nxi: self.nxi,
            thin_interior_row: j0,
        }
    }
}

/// Schur complement of the interior stiffness block onto the interior thin
/// nodes, and the matching discrete a-harmonic extension.
#[derive(Debug, Clone)]
pub struct ThinReduction {
    q: DMatrix<f64>,
    pub sigma: Vec<f64>,
    /// Column `k`: interior vertical profile of sine mode `k`, equal to one on the thin row.
    profile: DMatrix<f64>,
    /// Dense `S = Q diag(σ) Q`.
    pub schur: DMatrix<f64>,
    nxi: usize,
    thin_interior_row: usize,
}

impl ThinReduction {
    /// Interior values (row-major, as in [`TensorSolver::solve_interior`]) of
    /// the function that equals `delta` on the interior thin nodes, vanishes
    /// on `∂D` and has zero residual at every other interior node.
    pub fn extend(&self, delta: &[f64]) -> Vec<f64> {
        assert_eq!(delta.len(), self.nxi);
        let d = nalgebra::DVector::from_column_slice(delta);
        let coeff = &self.q * d;
        let mut modal = self.profile.clone();
        for (kk, c) in coeff.iter().enumerate() {
            modal.column_mut(kk).scale_mut(*c);
        }
        let out = &self.q * modal.transpose();
        let mut v = out.as_slice().to_vec();
        let row = self.thin_interior_row * self.nxi;
        v[row..row + self.nxi].copy_from_slice(delta);
        v
    }

    /// `δᵀ S δ`, the Dirichlet energy of [`ThinReduction::extend`].
    pub fn energy(&self, delta: &[f64]) -> f64 {
        let d = nalgebra::DVector::from_column_slice(delta);
        let c = &self.q * d;
        c.iter().zip(&self.sigma).map(|(ci, s)| s * ci * ci).sum()
    }

    /// `S δ`.
    pub fn apply(&self, delta: &[f64]) -> Vec<f64> {
        let d = nalgebra::DVector::from_column_slice(delta);
        let mut c = &self.q * d;
        for (ci, s) in c.iter_mut().zip(&self.sigma) {
            *ci *= s;
        }
        (&self.q * c).as_slice().to_vec()
    }
}
