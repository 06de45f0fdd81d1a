use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;

use super::sphere::sphere_integrals;
use super::weight::FittedCell;
use super::{check_exponent, Ball, Grid, Point};
use crate::error::{Error, Result};
use crate::quadrature::tanh_sinh_nodes;

/// Measure of the positive and negative parts of a thin trace on an interval.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PhaseMeasure {
    pub positive: f64,
    pub negative: f64,
}

/// A scalar field on (part of) the plane that the diagnostics can integrate.
///
/// [`GridFunction`] is the discrete implementation; closed-form fields in
/// [`crate::fields`] implement it as well so that diagnostics can be checked
/// against exact data.
pub trait Field: Sync {
    /// Weight exponent of the measure `|x₂|^a dx`.
    fn a(&self) -> f64;

    fn value(&self, p: Point) -> f64;

    fn gradient(&self, p: Point) -> [f64; 2];

    /// Whether the closed ball lies where the field is defined.
    fn contains_ball(&self, _ball: &Ball) -> bool {
        true
    }

    /// Mesh width of a discrete field; `None` for closed forms.
    fn resolution(&self) -> Option<f64> {
        None
    }

    /// `∫_{B} |x₂|^a |∇u|²`.
    ///
    /// The default integrates circle averages in the radius with a tanh-sinh
    /// rule, split where circles start to cross the thin line.
    fn dirichlet_in_ball(&self, ball: &Ball) -> Result<f64> {
        if !self.contains_ball(ball) {
            return Err(ball_error(ball));
        }
        let r = ball.radius;
        let dist = ball.center[1].abs();
        let mut breaks = vec![0.0];
        if dist > 0.0 && dist < r {
            breaks.push(dist);
        }
        breaks.push(r);
        let mut total = 0.0;
        for w in breaks.windows(2) {
            for node in tanh_sinh_nodes(w[0], w[1], 64) {
                let b = Ball {
                    center: ball.center,
                    radius: node.x,
                };
                total += node.weight * sphere_integrals(self, &b, 256).w_grad2;
            }
        }
        Ok(total)
    }

    /// Measure of `{u(·,0) > 0}` and `{u(·,0) < 0}` in `[lo, hi] × {0}`.
    ///
    /// The default samples the trace on a fine uniform partition and measures
    /// the piecewise-linear interpolant.
    fn thin_phase_measure(&self, lo: f64, hi: f64) -> PhaseMeasure {
        let n = 8192;
        let step = (hi - lo) / n as f64;
        let mut out = PhaseMeasure::default();
        let mut prev = self.value([lo, 0.0]);
        for k in 1..=n {
            let next = self.value([lo + k as f64 * step, 0.0]);
            accumulate_linear(&mut out, prev, next, step);
            prev = next;
        }
        out
    }
}

pub(crate) fn ball_error(ball: &Ball) -> Error {
    Error::BallOutsideGrid {
        x: ball.center[0],
        y: ball.center[1],
        radius: ball.radius,
    }
}

/// Adds the positive and negative measure of the linear function from `u0`
/// to `u1` over a segment of length `len`.
pub(crate) fn accumulate_linear(out: &mut PhaseMeasure, u0: f64, u1: f64, len: f64) {
    if len <= 0.0 {
        return;
    }
    if u0 > 0.0 && u1 > 0.0 || (u0 > 0.0 && u1 == 0.0) || (u0 == 0.0 && u1 > 0.0) {
        out.positive += len;
    } else if u0 < 0.0 && u1 < 0.0 || (u0 < 0.0 && u1 == 0.0) || (u0 == 0.0 && u1 < 0.0) {
        out.negative += len;
    } else if u0 == 0.0 && u1 == 0.0 {
    } else {
        // Strict sign change.
        let f = u0 / (u0 - u1);
        if u0 > 0.0 {
            out.positive += f * len;
            out.negative += (1.0 - f) * len;
        } else {
            out.negative += f * len;
            out.positive += (1.0 - f) * len;
        }
    }
}

#[derive(Debug, Clone)]
struct RowCell {
    cell: FittedCell,
    m00: f64,
    m01: f64,
    m11: f64,
    stiff: f64,
}

/// Nodal field on a [`Grid`].
///
/// Between nodes the field is linear in `x₁` and follows the fitted vertical
/// shape functions in `x₂`; gradients are those of this interpolant.
#[derive(Debug, Clone)]
pub struct GridFunction {
    pub grid: Grid,
    pub a: f64,
    pub values: Vec<f64>,
    rows: Vec<RowCell>,
}

impl PartialEq for GridFunction {
    fn eq(&self, other: &Self) -> bool {
        self.grid == other.grid && self.a == other.a && self.values == other.values
    }
}

fn row_cells(grid: &Grid, a: f64) -> Vec<RowCell> {
    (0..grid.ny - 1)
        .map(|j| {
            let cell = FittedCell::new(grid.y(j), grid.y(j + 1), a);
            let (m00, m01, m11) = cell.mass();
            RowCell {
                cell,
                m00,
                m01,
                m11,
                stiff: cell.stiffness(),
            }
        })
        .collect()
}

impl GridFunction {
    pub fn new(grid: Grid, a: f64, values: Vec<f64>) -> Result<Self> {
        check_exponent(a)?;
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a {}x{} grid",
                values.len(),
                grid.nx,
                grid.ny
            )));
        }
        Ok(Self {
            rows: row_cells(&grid, a),
            grid,
            a,
            values,
        })
    }

    pub fn zeros(grid: &Grid, a: f64) -> Result<Self> {
        Self::new(*grid, a, vec![0.0; grid.len()])
    }

    /// Samples `f` at the nodes.
    ///
    /// # Panics
    /// If `a` is outside `(-1, 1)`.
    pub fn from_fn<F: FnMut(Point) -> f64>(grid: &Grid, a: f64, mut f: F) -> Self {
        let values = (0..grid.len()).map(|k| f(grid.coords(k))).collect();
        Self::new(*grid, a, values).expect("weight exponent must lie in (-1, 1)")
    }

    /// Same grid and exponent, new values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        if values.len() != self.grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for {} nodes",
                values.len(),
                self.grid.len()
            )));
        }
        Ok(Self {
            grid: self.grid,
            a: self.a,
            values,
            rows: self.rows.clone(),
        })
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    /// Nodal values of the thin row `x₂ = 0`.
    pub fn thin_trace(&self) -> &[f64] {
        let j = self.grid.thin_row();
        &self.values[j * self.grid.nx..(j + 1) * self.grid.nx]
    }

    pub fn same_shape(&self, other: &GridFunction) -> Result<()> {
        if self.grid != other.grid || self.a != other.a {
            return Err(Error::GridMismatch(format!(
                "{}x{} (a = {}) vs {}x{} (a = {})",
                self.grid.nx, self.grid.ny, self.a, other.grid.nx, other.grid.ny, other.a
            )));
        }
        Ok(())
    }

    fn corners(&self, i: usize, j: usize) -> [f64; 4] {
        let nx = self.grid.nx;
        let k = j * nx + i;
        [
            self.values[k],
            self.values[k + 1],
            self.values[k + nx],
            self.values[k + nx + 1],
        ]
    }

    /// Energy `∫ |y|^a |∇u|²` over the whole cell `(i, j)`.
    fn cell_energy(&self, i: usize, j: usize) -> f64 {
        let [u00, u10, u01, u11] = self.corners(i, j);
        let row = &self.rows[j];
        let h = self.grid.h();
        let (d0, d1) = (u10 - u00, u11 - u01);
        let (e0, e1) = (u01 - u00, u11 - u10);
        (d0 * d0 * row.m00 + 2.0 * d0 * d1 * row.m01 + d1 * d1 * row.m11) / h
            + row.stiff * h * (e0 * e0 + e0 * e1 + e1 * e1) / 3.0
    }

    /// Energy over the part of cell `(i, j)` inside `ball`.
    ///
    /// For fixed `y` the `x`-integral over the chord is closed-form (the
    /// `x₁`-derivative is constant along `x₁`, the `x₂`-derivative linear), so
    /// only the vertical integral is numerical. It is split where the circle
    /// meets the cell's vertical edges and done by tanh-sinh, which absorbs
    /// the square-root behaviour at tangency and `|y|^{±a}` at the thin line.
    fn clipped_cell_energy(&self, i: usize, j: usize, ball: &Ball) -> f64 {
        let [u00, u10, u01, u11] = self.corners(i, j);
        let row = &self.rows[j];
        let h = self.grid.h();
        let (xa, xb) = (self.grid.x(i), self.grid.x(i + 1));
        let (ya, yb) = (row.cell.y0, row.cell.y1);
        let [cx, cy] = ball.center;
        let r = ball.radius;
        let lo = ya.max(cy - r);
        let hi = yb.min(cy + r);
        if hi <= lo {
            return 0.0;
        }
        let (d0, d1) = (u10 - u00, u11 - u01);
        let (e0, e1) = (u01 - u00, u11 - u10);
        let delta = e1 - e0;
        let a = self.a;
        let span2 = row.cell.span * row.cell.span;

        let mut breaks = vec![lo, hi];
        for &xe in &[xa, xb] {
            let dx = xe - cx;
            let disc = r * r - dx * dx;
            if disc > 0.0 {
                let s = disc.sqrt();
                for y in [cy - s, cy + s] {
                    if y > lo && y < hi {
                        breaks.push(y);
                    }
                }
            }
        }
        breaks.sort_by(|p, q| p.total_cmp(q));

        let mut total = 0.0;
        for w in breaks.windows(2) {
            if w[1] <= w[0] {
                continue;
            }
            for node in tanh_sinh_nodes(w[0], w[1], 64) {
                let y = node.x;
                let dy = y - cy;
                let half = (r * r - dy * dy).max(0.0).sqrt();
                let p = xa.max(cx - half);
                let q = xb.min(cx + half);
                if q <= p {
                    continue;
                }
                let psi = row.cell.psi(y);
                let ux = (d0 + psi * (d1 - d0)) / h;
                let (tp, tq) = ((p - xa) / h, (q - xa) / h);
                let ey = h
                    * (e0 * e0 * (tq - tp)
                        + e0 * delta * (tq * tq - tp * tp)
                        + delta * delta * (tq * tq * tq - tp * tp * tp) / 3.0);
                let ay = y.abs();
                let wx = ay.powf(a) * (q - p) * ux * ux;
                let wy = if ay == 0.0 { 0.0 } else { ay.powf(-a) * ey / span2 };
                total += node.weight * (wx + wy);
            }
        }
        total
    }

    /// Writes the plain-text table `# nx ny a` followed by `x y u` rows.
    pub fn write_text<W: Write>(&self, mut out: W) -> Result<()> {
        let mut buf = String::with_capacity(self.grid.len() * 40);
        writeln!(buf, "# {} {} {}", self.grid.nx, self.grid.ny, self.a).unwrap();
        for (k, v) in self.values.iter().enumerate() {
            let [x, y] = self.grid.coords(k);
            writeln!(buf, "{x:.17e} {y:.17e} {v:.17e}").unwrap();
        }
        out.write_all(buf.as_bytes())?;
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_text(std::io::BufWriter::new(file))
    }

    /// Reads the format produced by [`GridFunction::write_text`]. Comment
    /// lines after the header and blank lines are ignored.
    pub fn read_text<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines();
        let header = loop {
            match lines.next() {
                Some(line) => {
                    let line = line?;
                    if !line.trim().is_empty() {
                        break line;
                    }
                }
                None => return Err(Error::Format("empty grid function file".into())),
            }
        };
        let fields: Vec<&str> = header
            .trim()
            .strip_prefix('#')
            .ok_or_else(|| Error::Format(format!("missing '# nx ny a' header: {header}")))?
            .split_whitespace()
            .collect();
        if fields.len() != 3 {
            return Err(Error::Format(format!("header must be '# nx ny a': {header}")));
        }
        let parse_usize = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| Error::Format(format!("bad node count '{s}'")))
        };
        let nx = parse_usize(fields[0])?;
        let ny = parse_usize(fields[1])?;
        let a: f64 = fields[2]
            .parse()
            .map_err(|_| Error::Format(format!("bad exponent '{}'", fields[2])))?;
        if nx != ny {
            return Err(Error::Format(format!("grid must be square, got {nx}x{ny}")));
        }
        let grid = Grid::new(nx)?;
        let mut values = Vec::with_capacity(grid.len());
        for (lineno, line) in lines.enumerate() {
            let line = line?;
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = t.split_whitespace().collect();
            if cols.len() != 3 {
                return Err(Error::Format(format!(
                    "line {}: expected 'x y u', got '{t}'",
                    lineno + 2
                )));
            }
            let v: f64 = cols[2]
                .parse()
                .map_err(|_| Error::Format(format!("line {}: bad value '{}'", lineno + 2, cols[2])))?;
            values.push(v);
        }
        if values.len() != grid.len() {
            return Err(Error::Format(format!(
                "header announces {} nodes but {} rows were found",
                grid.len(),
                values.len()
            )));
        }
        Self::new(grid, a, values)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::read_text(std::io::BufReader::new(file))
    }
}

impl Field for GridFunction {
    fn a(&self) -> f64 {
        self.a
    }

    fn value(&self, p: Point) -> f64 {
        let (i, t) = self.grid.locate_x(p[0]);
        let j = self.grid.locate_y(p[1]);
        let psi = self.rows[j].cell.psi(p[1]);
        let [u00, u10, u01, u11] = self.corners(i, j);
        (1.0 - psi) * ((1.0 - t) * u00 + t * u10) + psi * ((1.0 - t) * u01 + t * u11)
    }

    fn gradient(&self, p: Point) -> [f64; 2] {
        let (i, t) = self.grid.locate_x(p[0]);
        let j = self.grid.locate_y(p[1]);
        let cell = &self.rows[j].cell;
        let psi = cell.psi(p[1]);
        let [u00, u10, u01, u11] = self.corners(i, j);
        let h = self.grid.h();
        let ux = ((1.0 - psi) * (u10 - u00) + psi * (u11 - u01)) / h;
        let uy = ((1.0 - t) * (u01 - u00) + t * (u11 - u10)) * cell.dpsi(p[1]);
        [ux, uy]
    }

    fn contains_ball(&self, ball: &Ball) -> bool {
        self.grid.contains_ball(ball)
    }

    fn resolution(&self) -> Option<f64> {
        Some(self.grid.h())
    }

    /// Exact for the interpolant: whole cells use the stiffness entries and
    /// cut cells the chord integration of `clipped_cell_energy`.
    fn dirichlet_in_ball(&self, ball: &Ball) -> Result<f64> {
        if !self.grid.contains_ball(ball) {
            return Err(ball_error(ball));
        }
        let [cx, cy] = ball.center;
        let r = ball.radius;
        let r2 = r * r;
        let g = &self.grid;
        let i_lo = g.locate_x(cx - r).0;
        let i_hi = g.locate_x(cx + r).0;
        let j_lo = g.locate_y(cy - r);
        let j_hi = g.locate_y(cy + r);
        let mut total = 0.0;
        for j in j_lo..=j_hi {
            let (ya, yb) = (g.y(j), g.y(j + 1));
            let ny_far = (ya - cy).abs().max((yb - cy).abs());
            let ny_near = if cy < ya {
                ya - cy
            } else if cy > yb {
                cy - yb
            } else {
                0.0
            };
            for i in i_lo..=i_hi {
                let (xa, xb) = (g.x(i), g.x(i + 1));
                let nx_far = (xa - cx).abs().max((xb - cx).abs());
                let nx_near = if cx < xa {
                    xa - cx
                } else if cx > xb {
                    cx - xb
                } else {
                    0.0
                };
                if nx_near * nx_near + ny_near * ny_near >= r2 {
                    continue;
                }
                if nx_far * nx_far + ny_far * ny_far <= r2 {
                    total += self.cell_energy(i, j);
                } else {
                    total += self.clipped_cell_energy(i, j, ball);
                }
            }
        }
        Ok(total)
    }

    /// Exact for the piecewise-linear thin trace.
    fn thin_phase_measure(&self, lo: f64, hi: f64) -> PhaseMeasure {
        let g = &self.grid;
        let trace = self.thin_trace();
        let h = g.h();
        let mut out = PhaseMeasure::default();
        let lo = lo.max(-1.0);
        let hi = hi.min(1.0);
        if hi <= lo {
            return out;
        }
        for i in 0..g.nx - 1 {
            let (xa, xb) = (g.x(i), g.x(i + 1));
            let p = xa.max(lo);
            let q = xb.min(hi);
            if q <= p {
                continue;
            }
            let at = |x: f64| {
                let t = (x - xa) / h;
                (1.0 - t) * trace[i] + t * trace[i + 1]
            };
            let (u0, u1) = if p == xa && q == xb {
                (trace[i], trace[i + 1])
            } else {
                (at(p), at(q))
            };
            accumulate_linear(&mut out, u0, u1, q - p);
        }
        out
    }
}
