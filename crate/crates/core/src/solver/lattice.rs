use crate::energy::total_energy;
use crate::error::Result;
use crate::mesh::{GridFunction, ProblemParams};

/// Nodal maximum and minimum of two fields and the defect of
/// `J(max) + J(min) = J(u) + J(v)`.
#[derive(Debug, Clone)]
pub struct LatticeCombination {
    pub wmax: GridFunction,
    pub wmin: GridFunction,
    pub identity_residual: f64,
}

pub fn lattice_combine(u: &GridFunction, v: &GridFunction, p: &ProblemParams) -> Result<LatticeCombination> {
    u.same_shape(v)?;
    let (hi, lo): (Vec<f64>, Vec<f64>) = u
        .values
        .iter()
        .zip(&v.values)
        .map(|(&a, &b)| (a.max(b), a.min(b)))
        .unzip();
    let wmax = u.with_values(hi)?;
    let wmin = u.with_values(lo)?;
    let lhs = total_energy(&wmax, p)?.total + total_energy(&wmin, p)?.total;
    let rhs = total_energy(u, p)?.total + total_energy(v, p)?.total;
    Ok(LatticeCombination {
        wmax,
        wmin,
        identity_residual: (lhs - rhs).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Grid;

    #[test]
    fn equal_inputs_are_fixed() {
        let g = Grid::new(9).unwrap();
        let u = GridFunction::from_fn(&g, 0.2, |p| p[0] * p[1] - 0.1);
        let p = ProblemParams::new(0.2, 1.0, 2.0).unwrap();
        let l = lattice_combine(&u, &u, &p).unwrap();
        assert_eq!(l.wmax, u);
        assert_eq!(l.wmin, u);
        assert_eq!(l.identity_residual, 0.0);
    }

    #[test]
    fn shifted_linear_pair() {
        let g = Grid::new(65).unwrap();
        let p = ProblemParams::new(0.0, 1.0, 1.0).unwrap();
        let u = GridFunction::from_fn(&g, 0.0, |q| q[0]);
        let v = GridFunction::from_fn(&g, 0.0, |q| q[0] + 0.5);
        let l = lattice_combine(&u, &v, &p).unwrap();
        assert!(l.identity_residual <= 1e-12);
        assert_eq!(l.wmax, v);
    }

    #[test]
    fn mismatched_grids_rejected() {
        let u = GridFunction::zeros(&Grid::new(9).unwrap(), 0.0).unwrap();
        let v = GridFunction::zeros(&Grid::new(11).unwrap(), 0.0).unwrap();
        let p = ProblemParams::new(0.0, 1.0, 1.0).unwrap();
        assert!(lattice_combine(&u, &v, &p).is_err());
    }
}
