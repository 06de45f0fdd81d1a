use std::path::Path;

use crate::error::{invalid, Error, Result};
use crate::mesh::{Grid, GridFunction, Point};

/// Which ray of the thin line carries the slit of a homogeneous profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlitSide {
    /// Profile vanishes on `{x₁ < 0, x₂ = 0}`.
    Negative,
    /// Profile vanishes on `{x₁ > 0, x₂ = 0}`.
    Positive,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryKind {
    LinearX1,
    Constant(f64),
    /// `((|x| ± x₁)/2)^α`, the slit profile; a-harmonic off the slit when `α = (1-a)/2`.
    HomogeneousProfile { alpha: f64, side: SlitSide },
    Custom,
}

/// Dirichlet data on `∂D`, stored as a full-length nodal vector whose
/// interior entries are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryData {
    pub kind: BoundaryKind,
    pub grid: Grid,
    pub values: Vec<f64>,
}

/// `((|x| + σx₁)/2)^α` evaluated without cancellation near the slit.
pub fn slit_profile(p: Point, alpha: f64, side: SlitSide) -> f64 {
    let x = match side {
        SlitSide::Negative => p[0],
        SlitSide::Positive => -p[0],
    };
    let y = p[1];
    let r = x.hypot(y);
    if r == 0.0 {
        return 0.0;
    }
    let q = if x >= 0.0 { 0.5 * (r + x) } else { 0.5 * y * y / (r - x) };
    q.powf(alpha)
}

impl BoundaryData {
    pub fn from_fn<F: FnMut(Point) -> f64>(grid: &Grid, kind: BoundaryKind, mut f: F) -> Self {
        let mut values = vec![0.0; grid.len()];
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                if grid.is_boundary(i, j) {
                    let k = grid.index(i, j);
                    values[k] = f(grid.coords(k));
                }
            }
        }
        Self {
            kind,
            grid: *grid,
            values,
        }
    }

    pub fn linear(grid: &Grid) -> Self {
        Self::from_fn(grid, BoundaryKind::LinearX1, |p| p[0])
    }

    pub fn constant(grid: &Grid, c: f64) -> Self {
        Self::from_fn(grid, BoundaryKind::Constant(c), |_| c)
    }

    pub fn profile(grid: &Grid, alpha: f64, side: SlitSide) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(invalid(format!("profile degree {alpha} must be positive")));
        }
        Ok(Self::from_fn(
            grid,
            BoundaryKind::HomogeneousProfile { alpha, side },
            |p| slit_profile(p, alpha, side),
        ))
    }

    /// Boundary values of a stored field.
    pub fn from_grid_function(u: &GridFunction) -> Self {
        let g = u.grid;
        Self::from_fn(&g, BoundaryKind::Custom, |p| {
            let i = ((p[0] + 1.0) / g.h()).round() as usize;
            let j = ((p[1] + 1.0) / g.h()).round() as usize;
            u.at(i, j)
        })
    }

    /// Parses `linear`, `const:<c>`, `profile:<alpha>[:negative|:positive]`
    /// or `file:<path>`.
    pub fn from_preset(preset: &str, grid: &Grid) -> Result<Self> {
        let preset = preset.trim();
        if preset == "linear" {
            return Ok(Self::linear(grid));
        }
        if let Some(c) = preset.strip_prefix("const:") {
            let c: f64 = c
                .parse()
                .map_err(|_| invalid(format!("bad constant in boundary preset '{preset}'")))?;
            return Ok(Self::constant(grid, c));
        }
        if let Some(rest) = preset.strip_prefix("profile:") {
            let mut parts = rest.split(':');
            let alpha: f64 = parts
                .next()
                .unwrap_or("")
                .parse()
                .map_err(|_| invalid(format!("bad degree in boundary preset '{preset}'")))?;
            let side = match parts.next() {
                None | Some("negative") => SlitSide::Negative,
                Some("positive") => SlitSide::Positive,
                Some(other) => {
                    return Err(invalid(format!("unknown slit side '{other}' in '{preset}'")))
                }
            };
            return Self::profile(grid, alpha, side);
        }
        if let Some(path) = preset.strip_prefix("file:") {
            let u = GridFunction::load(Path::new(path))?;
            if u.grid != *grid {
                return Err(Error::GridMismatch(format!(
                    "boundary file {path} is {}x{}, expected {}x{}",
                    u.grid.nx, u.grid.ny, grid.nx, grid.ny
                )));
            }
            return Ok(Self::from_grid_function(&u));
        }
        Err(invalid(format!(
            "unknown boundary preset '{preset}' (expected linear, const:<c>, profile:<alpha>, file:<path>)"
        )))
    }
}
