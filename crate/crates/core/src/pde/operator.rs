use super::grid::Grid;

/// Row `(lower, diag, upper)` of a tridiagonal matrix.
pub type Row = (f64, f64, f64);

/// A discretised one-dimensional elliptic operator on a fixed grid.
///
/// Rows must have non-negative off-diagonals and non-positive row sums so
/// that implicit steps keep solutions non-negative.
pub trait SpatialOperator: Send + Sync {
    fn name(&self) -> &'static str;
    fn grid(&self) -> &Grid;
    /// Row of the operator at node `i`. End rows carry a zero-flux condition;
    /// solvers replace them for Dirichlet ends.
    fn row(&self, i: usize) -> Row;

    fn apply(&self, u: &[f64]) -> Vec<f64> {
        let n = u.len();
        (0..n)
            .map(|i| {
                let (l, d, up) = self.row(i);
                let left = if i > 0 { l * u[i - 1] } else { 0.0 };
                let right = if i + 1 < n { up * u[i + 1] } else { 0.0 };
                left + d * u[i] + right
            })
            .collect()
    }
}

/// `A(r) Δ` for radial functions in dimension `dim`, finite-volume form
/// `A(r_i) / V_i * [F_{i+1/2} (u_{i+1} - u_i)/h_+ - F_{i-1/2} (u_i - u_{i-1})/h_-]`
/// with face areas `F = r^{dim-1}` and shell volumes `V`.
#[derive(Clone, Debug)]
pub struct RadialFiniteVolume {
    grid: Grid,
    rows: Vec<Row>,
}

/// `(b^dim - a^dim) / dim` without cancellation for thin shells.
fn shell_volume(a: f64, b: f64, dim: f64) -> f64 {
    if a <= 0.0 {
        return b.powf(dim) / dim;
    }
    a.powf(dim) * (dim * ((b - a) / a).ln_1p()).exp_m1() / dim
}

impl RadialFiniteVolume {
    pub fn new(grid: Grid, a: impl Fn(f64) -> f64, dim: f64) -> Self {
        let r = &grid.nodes;
        let n = r.len();
        let face = |x: f64| if x <= 0.0 { 0.0 } else { x.powf(dim - 1.0) };
        let mut rows = Vec::with_capacity(n);
        for i in 0..n {
            let lo = if i == 0 {
                r[0]
            } else {
                0.5 * (r[i - 1] + r[i])
            };
            let hi = if i + 1 == n {
                r[i]
            } else {
                0.5 * (r[i] + r[i + 1])
            };
            // Volumes and fluxes are scaled by r_i^(1-dim) to stay in range near tiny radii.
            let scale = if r[i] > 0.0 {
                r[i].powf(1.0 - dim)
            } else {
                1.0
            };
            let vol = shell_volume(lo, hi, dim) * scale;
            let ai = a(r[i]);
            let lower = if i > 0 {
                ai * face(lo) * scale / (r[i] - r[i - 1]) / vol
            } else {
                0.0
            };
            let upper = if i + 1 < n {
                ai * face(hi) * scale / (r[i + 1] - r[i]) / vol
            } else {
                0.0
            };
            rows.push((lower, -(lower + upper), upper));
        }
        RadialFiniteVolume { grid, rows }
    }
}

impl SpatialOperator for RadialFiniteVolume {
    fn name(&self) -> &'static str {
        "radial-finite-volume"
    }

    fn grid(&self) -> &Grid {
        &self.grid
    }

    fn row(&self, i: usize) -> Row {
        self.rows[i]
    }
}

/// `P(z) u'' + Q(z) u'` on a nonuniform grid: central differences, falling
/// back to upwinding where central weights would turn negative.
#[derive(Clone, Debug)]
pub struct LineStencil {
    grid: Grid,
    rows: Vec<Row>,
    upwinded: usize,
}

impl LineStencil {
    pub fn new(grid: Grid, p: impl Fn(f64) -> f64, q: impl Fn(f64) -> f64) -> Self {
        let z = &grid.nodes;
        let n = z.len();
        let mut rows = Vec::with_capacity(n);
        let mut upwinded = 0;
        for i in 0..n {
            let (pi, qi) = (p(z[i]), q(z[i]));
            if i == 0 || i + 1 == n {
                // Mirror ghost node: zero flux.
                let h = if i == 0 { z[1] - z[0] } else { z[i] - z[i - 1] };
                let w = 2.0 * pi / (h * h);
                rows.push(if i == 0 { (0.0, -w, w) } else { (w, -w, 0.0) });
                continue;
            }
            let (hm, hp) = (z[i] - z[i - 1], z[i + 1] - z[i]);
            let dm = 2.0 * pi / (hm * (hm + hp));
            let dp = 2.0 * pi / (hp * (hm + hp));
            let cm = -qi * hp / (hm * (hm + hp));
            let cp = qi * hm / (hp * (hm + hp));
            let (mut lower, mut upper) = (dm + cm, dp + cp);
            if lower < 0.0 || upper < 0.0 {
                upwinded += 1;
                lower = dm + (-qi).max(0.0) / hm;
                upper = dp + qi.max(0.0) / hp;
            }
            rows.push((lower, -(lower + upper), upper));
        }
        LineStencil {
            grid,
            rows,
            upwinded,
        }
    }

    /// Number of nodes where the upwind fallback was used.
    pub fn upwinded(&self) -> usize {
        self.upwinded
    }
}

impl SpatialOperator for LineStencil {
    fn name(&self) -> &'static str {
        "line-stencil"
    }

    fn grid(&self) -> &Grid {
        &self.grid
    }

    fn row(&self, i: usize) -> Row {
        self.rows[i]
    }
}
