//! Uniform Q1 grid on the pixel lattice.
//!
//! One node per pixel at unit spacing, so a W x H image yields
//! (W-1)(H-1) unit square cells and nodal fields share the image's
//! row-major layout. The discrete semi-inner product is realized as
//! trapezoidal (lumped) nodal quadrature for mass terms and 2x2 Gauss
//! quadrature for diffusion terms.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum FemError {
    #[error("grid needs at least 2 nodes per direction, got {width}x{height}")]
    TooSmall { width: usize, height: usize },
    #[error("dimension mismatch: {0}")]
    BadDimensions(String),
    #[error("non-positive detector value {value} at a quadrature point")]
    NonPositiveDetector { value: f64 },
}

/// Nodal coefficient vector, node-major matching image row-major order.
pub type NodalField = Vec<f64>;

/// Uniform grid of unit square cells, nodes indexed `iy * nx + ix`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grid {
    nx: usize,
    ny: usize,
}

/// One Gauss point offset from the cell edge: (1 - 1/sqrt(3)) / 2.
const GAUSS_LO: f64 = 0.211_324_865_405_187_12;
const GAUSS_HI: f64 = 1.0 - GAUSS_LO;
/// 1D Gauss abscissae on [0, 1]; each 2D point carries weight 1/4.
pub const GAUSS_1D: [f64; 2] = [GAUSS_LO, GAUSS_HI];
pub const GAUSS_WEIGHT: f64 = 0.25;

/// Grid with one node per pixel; requires at least 2x2 pixels.
pub fn build_grid(width: usize, height: usize) -> Result<Grid, FemError> {
    if width < 2 || height < 2 {
        return Err(FemError::TooSmall { width, height });
    }
    Ok(Grid {
        nx: width,
        ny: height,
    })
}

impl Grid {
    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn node_count(&self) -> usize {
        self.nx * self.ny
    }

    pub fn cells_x(&self) -> usize {
        self.nx - 1
    }

    pub fn cells_y(&self) -> usize {
        self.ny - 1
    }

    pub fn cell_count(&self) -> usize {
        self.cells_x() * self.cells_y()
    }

    pub fn node_index(&self, ix: usize, iy: usize) -> usize {
        debug_assert!(ix < self.nx && iy < self.ny);
        iy * self.nx + ix
    }

    /// The four node indices of cell (cx, cy), local order
    /// (0,0), (1,0), (0,1), (1,1).
    pub fn cell_nodes(&self, cx: usize, cy: usize) -> [usize; 4] {
        let base = self.node_index(cx, cy);
        [base, base + 1, base + self.nx, base + self.nx + 1]
    }

    /// Checks a nodal field's length against the grid.
    pub fn check_field(&self, field: &[f64]) -> Result<(), FemError> {
        if field.len() != self.node_count() {
            return Err(FemError::BadDimensions(format!(
                "nodal field has length {}, grid has {} nodes",
                field.len(),
                self.node_count()
            )));
        }
        Ok(())
    }
}

/// Diagonal lumped mass weights: 1 interior, 1/2 edge, 1/4 corner.
///
/// This is nodal trapezoidal quadrature on unit cells; the weights sum to
/// the domain area (nx-1)(ny-1) exactly, and `(u, v)^h = sum m_p u_p v_p`.
pub fn lumped_mass(grid: &Grid) -> NodalField {
    let weight_1d = |i: usize, n: usize| -> f64 {
        if i == 0 || i + 1 == n {
            0.5
        } else {
            1.0
        }
    };
    let mut mass = Vec::with_capacity(grid.node_count());
    for iy in 0..grid.ny {
        let wy = weight_1d(iy, grid.ny);
        for ix in 0..grid.nx {
            mass.push(wy * weight_1d(ix, grid.nx));
        }
    }
    mass
}

/// Exact stiffness matrix of the bilinear basis on the unit square:
/// diagonal 2/3, edge-adjacent -1/6, diagonally opposite -1/3.
pub fn q1_local_stiffness() -> [[f64; 4]; 4] {
    let d = 2.0 / 3.0;
    let e = -1.0 / 6.0;
    let x = -1.0 / 3.0;
    [[d, e, e, x], [e, d, x, e], [e, x, d, e], [x, e, e, d]]
}

/// Values of the four bilinear shape functions at local (x, y).
pub fn shape_values(x: f64, y: f64) -> [f64; 4] {
    [
        (1.0 - x) * (1.0 - y),
        x * (1.0 - y),
        (1.0 - x) * y,
        x * y,
    ]
}

/// Gradients (d/dx, d/dy) of the four shape functions at local (x, y).
pub fn shape_gradients(x: f64, y: f64) -> [[f64; 2]; 4] {
    [
        [-(1.0 - y), -(1.0 - x)],
        [1.0 - y, -x],
        [-y, 1.0 - x],
        [y, x],
    ]
}

/// Per-cell values at the four 2x2 Gauss points.
///
/// Gauss point `2*jy + jx` sits at `(GAUSS_1D[jx], GAUSS_1D[jy])` in local
/// cell coordinates; cells are stored row-major (`cy * cells_x + cx`).
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureField {
    pub cells_x: usize,
    pub cells_y: usize,
    pub values: Vec<[f64; 4]>,
}

impl QuadratureField {
    pub fn constant(grid: &Grid, value: f64) -> Self {
        Self {
            cells_x: grid.cells_x(),
            cells_y: grid.cells_y(),
            values: vec![[value; 4]; grid.cell_count()],
        }
    }

    pub fn matches(&self, grid: &Grid) -> bool {
        self.cells_x == grid.cells_x()
            && self.cells_y == grid.cells_y()
            && self.values.len() == grid.cell_count()
    }

    /// Pointwise map, e.g. applying an edge detector to interpolated values.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            cells_x: self.cells_x,
            cells_y: self.cells_y,
            values: self
                .values
                .iter()
                .map(|v| [f(v[0]), f(v[1]), f(v[2]), f(v[3])])
                .collect(),
        }
    }
}

/// Bilinear interpolation of a nodal field at the 2x2 Gauss points.
pub fn interpolate_to_quadrature(grid: &Grid, field: &[f64]) -> Result<QuadratureField, FemError> {
    grid.check_field(field)?;
    let mut values = Vec::with_capacity(grid.cell_count());
    for cy in 0..grid.cells_y() {
        for cx in 0..grid.cells_x() {
            let n = grid.cell_nodes(cx, cy);
            let v = [field[n[0]], field[n[1]], field[n[2]], field[n[3]]];
            let mut cell = [0.0; 4];
            for (jy, &gy) in GAUSS_1D.iter().enumerate() {
                for (jx, &gx) in GAUSS_1D.iter().enumerate() {
                    let s = shape_values(gx, gy);
                    cell[2 * jy + jx] = s[0] * v[0] + s[1] * v[1] + s[2] * v[2] + s[3] * v[3];
                }
            }
            values.push(cell);
        }
    }
    Ok(QuadratureField {
        cells_x: grid.cells_x(),
        cells_y: grid.cells_y(),
        values,
    })
}

/// |grad u| of the Q1 interpolant at the 2x2 Gauss points.
pub fn gradient_magnitude_at_quadrature(
    grid: &Grid,
    field: &[f64],
) -> Result<QuadratureField, FemError> {
    grid.check_field(field)?;
    let mut values = Vec::with_capacity(grid.cell_count());
    for cy in 0..grid.cells_y() {
        for cx in 0..grid.cells_x() {
            let n = grid.cell_nodes(cx, cy);
            let v = [field[n[0]], field[n[1]], field[n[2]], field[n[3]]];
            let mut cell = [0.0; 4];
            for (jy, &gy) in GAUSS_1D.iter().enumerate() {
                for (jx, &gx) in GAUSS_1D.iter().enumerate() {
                    let g = shape_gradients(gx, gy);
                    let dx: f64 = (0..4).map(|p| g[p][0] * v[p]).sum();
                    let dy: f64 = (0..4).map(|p| g[p][1] * v[p]).sum();
                    cell[2 * jy + jx] = dx.hypot(dy);
                }
            }
            values.push(cell);
        }
    }
    Ok(QuadratureField {
        cells_x: grid.cells_x(),
        cells_y: grid.cells_y(),
        values,
    })
}
