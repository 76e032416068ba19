//! Uniform grids on the unit interval and unit square with a Dirichlet /
//! damped boundary partition, plus the trapezoid quadratures used everywhere
//! else in the crate.
//!
//! In 1-D the damped boundary is the single node at `x = 1`. In 2-D it is
//! the open side `{x = 1}`; the four corners belong to the Dirichlet part.

use crate::error::{Error, Result};
use crate::measure::BoundaryTrace;

/// Role of a node in the boundary partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Interior,
    Dirichlet,
    Damped,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DomainMesh {
    dim: usize,
    nx: usize,
    ny: usize,
    hx: f64,
    hy: f64,
    nodes: Vec<[f64; 2]>,
    kinds: Vec<NodeKind>,
    gamma0: Vec<usize>,
    gamma1: Vec<usize>,
    /// Trapezoid weights for integrals over the domain.
    weights: Vec<f64>,
    /// Trapezoid weights for integrals along the damped boundary.
    gamma1_weights: Vec<f64>,
}

impl DomainMesh {
    /// Unit interval with `n_cells` cells; Dirichlet at `x = 0`, damped at `x = 1`.
    pub fn interval(n_cells: usize) -> Result<Self> {
        if n_cells < 2 {
            return Err(Error::InvalidMesh(format!(
                "interval needs at least 2 cells, got {n_cells}"
            )));
        }
        let h = 1.0 / n_cells as f64;
        let nodes: Vec<[f64; 2]> = (0..=n_cells).map(|i| [i as f64 * h, 0.0]).collect();
        let mut kinds = vec![NodeKind::Interior; n_cells + 1];
        kinds[0] = NodeKind::Dirichlet;
        kinds[n_cells] = NodeKind::Damped;
        let mut weights = vec![h; n_cells + 1];
        weights[0] = 0.5 * h;
        weights[n_cells] = 0.5 * h;
        Ok(Self {
            dim: 1,
            nx: n_cells,
            ny: 0,
            hx: h,
            hy: 0.0,
            nodes,
            kinds,
            gamma0: vec![0],
            gamma1: vec![n_cells],
            weights,
            gamma1_weights: vec![1.0],
        })
    }

    /// Unit square with `nx` by `ny` cells. The damped part is the set of
    /// nodes on `{x = 1}` strictly between the corners.
    pub fn rectangle(nx: usize, ny: usize) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(Error::InvalidMesh(format!(
                "rectangle needs at least 2 cells per direction, got {nx}x{ny}"
            )));
        }
        let hx = 1.0 / nx as f64;
        let hy = 1.0 / ny as f64;
        let count = (nx + 1) * (ny + 1);
        let mut nodes = Vec::with_capacity(count);
        let mut kinds = Vec::with_capacity(count);
        let mut weights = Vec::with_capacity(count);
        let mut gamma0 = Vec::new();
        let mut gamma1 = Vec::new();
        for j in 0..=ny {
            for i in 0..=nx {
                let idx = j * (nx + 1) + i;
                nodes.push([i as f64 * hx, j as f64 * hy]);
                let on_x_edge = i == 0 || i == nx;
                let on_y_edge = j == 0 || j == ny;
                let kind = if i == nx && !on_y_edge {
                    gamma1.push(idx);
                    NodeKind::Damped
                } else if on_x_edge || on_y_edge {
                    gamma0.push(idx);
                    NodeKind::Dirichlet
                } else {
                    NodeKind::Interior
                };
                kinds.push(kind);
                let wx = if on_x_edge { 0.5 * hx } else { hx };
                let wy = if on_y_edge { 0.5 * hy } else { hy };
                weights.push(wx * wy);
            }
        }
        let gamma1_weights = vec![hy; gamma1.len()];
        Ok(Self {
            dim: 2,
            nx,
            ny,
            hx,
            hy,
            nodes,
            kinds,
            gamma0,
            gamma1,
            weights,
            gamma1_weights,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Cells along x.
    pub fn nx(&self) -> usize {
        self.nx
    }

    /// Cells along y (0 in 1-D).
    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn hx(&self) -> f64 {
        self.hx
    }

    pub fn hy(&self) -> f64 {
        self.hy
    }

    /// Smallest grid spacing.
    pub fn h(&self) -> f64 {
        if self.dim == 1 {
            self.hx
        } else {
            self.hx.min(self.hy)
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    pub fn kind(&self, node: usize) -> NodeKind {
        self.kinds[node]
    }

    pub fn interior_mask(&self) -> Vec<bool> {
        self.kinds
            .iter()
            .map(|k| *k == NodeKind::Interior)
            .collect()
    }

    pub fn gamma0(&self) -> &[usize] {
        &self.gamma0
    }

    pub fn gamma1(&self) -> &[usize] {
        &self.gamma1
    }

    pub fn gamma1_coords(&self) -> Vec<[f64; 2]> {
        self.gamma1.iter().map(|&n| self.nodes[n]).collect()
    }

    /// Unit outward normal at a boundary node; `None` for interior nodes.
    /// Corners get the normalized diagonal.
    pub fn outward_normal(&self, node: usize) -> Option<[f64; 2]> {
        if self.kinds[node] == NodeKind::Interior {
            return None;
        }
        if self.dim == 1 {
            return Some(if node == 0 { [-1.0, 0.0] } else { [1.0, 0.0] });
        }
        let (i, j) = self.ij(node);
        let nx = if i == 0 {
            -1.0
        } else if i == self.nx {
            1.0
        } else {
            0.0
        };
        let ny = if j == 0 {
            -1.0
        } else if j == self.ny {
            1.0
        } else {
            0.0
        };
        let len = f64::hypot(nx, ny);
        Some([nx / len, ny / len])
    }

    /// Degrees of freedom: every node not pinned by the Dirichlet condition.
    pub fn dofs(&self) -> Vec<usize> {
        (0..self.nodes.len())
            .filter(|&n| self.kinds[n] != NodeKind::Dirichlet)
            .collect()
    }

    /// Grid index pair `(i, j)` of a node (`j = 0` in 1-D).
    pub fn ij(&self, node: usize) -> (usize, usize) {
        if self.dim == 1 {
            (node, 0)
        } else {
            (node % (self.nx + 1), node / (self.nx + 1))
        }
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        if self.dim == 1 {
            i
        } else {
            j * (self.nx + 1) + i
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn gamma1_weights(&self) -> &[f64] {
        &self.gamma1_weights
    }

    /// Trapezoid approximation of the integral of a nodal field over the domain.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        assert_eq!(f.len(), self.nodes.len(), "nodal field length");
        f.iter().zip(&self.weights).map(|(v, w)| v * w).sum()
    }

    /// Boundary nodes (union of both parts), sorted.
    pub fn boundary_nodes(&self) -> Vec<usize> {
        let mut all: Vec<usize> = self.gamma0.iter().chain(&self.gamma1).copied().collect();
        all.sort_unstable();
        all
    }
}

/// Uniform time grid on `[0, tau]`.
#[derive(Debug, Clone, Copy)]
pub struct TimeGrid {
    tau: f64,
    dt: f64,
    n_steps: usize,
    cfl_factor: f64,
}

impl PartialEq for TimeGrid {
    // Grids built from a step count carry a NaN cfl factor; compare it bitwise.
    fn eq(&self, other: &Self) -> bool {
        self.tau == other.tau
            && self.dt == other.dt
            && self.n_steps == other.n_steps
            && self.cfl_factor.to_bits() == other.cfl_factor.to_bits()
    }
}

impl TimeGrid {
    /// Largest uniform step with `dt <= cfl_factor * h` that divides `tau`.
    pub fn new(tau: f64, h: f64, cfl_factor: f64) -> Result<Self> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::InvalidTimeGrid(format!(
                "tau must be positive, got {tau}"
            )));
        }
        if !(h > 0.0) {
            return Err(Error::InvalidTimeGrid(format!(
                "grid spacing must be positive, got {h}"
            )));
        }
        if !(cfl_factor > 0.0 && cfl_factor.is_finite()) {
            return Err(Error::InvalidTimeGrid(format!(
                "cfl_factor must be positive, got {cfl_factor}"
            )));
        }
        if cfl_factor > 1.0 {
            return Err(Error::Cfl {
                dt: cfl_factor * h,
                limit: h,
            });
        }
        let n_steps = (tau / (cfl_factor * h) - 1e-9).ceil().max(2.0) as usize;
        Ok(Self {
            tau,
            dt: tau / n_steps as f64,
            n_steps,
            cfl_factor,
        })
    }

    pub fn for_mesh(mesh: &DomainMesh, tau: f64, cfl_factor: f64) -> Result<Self> {
        Self::new(tau, mesh.h(), cfl_factor)
    }

    /// Exactly `n_steps` steps of size `tau / n_steps`.
    pub fn with_steps(tau: f64, n_steps: usize) -> Result<Self> {
        if !(tau > 0.0) || n_steps < 2 {
            return Err(Error::InvalidTimeGrid(format!(
                "need tau > 0 and at least 2 steps, got tau={tau}, n_steps={n_steps}"
            )));
        }
        Ok(Self {
            tau,
            dt: tau / n_steps as f64,
            n_steps,
            cfl_factor: f64::NAN,
        })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn cfl_factor(&self) -> f64 {
        self.cfl_factor
    }

    pub fn sample_count(&self) -> usize {
        self.n_steps + 1
    }

    pub fn time(&self, n: usize) -> f64 {
        if n == self.n_steps {
            self.tau
        } else {
            n as f64 * self.dt
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.n_steps).map(|n| self.time(n)).collect()
    }

    /// Trapezoid weights on the time samples.
    pub fn weights(&self) -> Vec<f64> {
        let mut w = vec![self.dt; self.n_steps + 1];
        w[0] *= 0.5;
        w[self.n_steps] *= 0.5;
        w
    }

    /// Explicit leapfrog stability: `dt * sqrt(sum 1/h_i^2) <= 1`.
    pub fn check_stability(&self, mesh: &DomainMesh) -> Result<()> {
        let inv = if mesh.dim() == 1 {
            1.0 / (mesh.hx() * mesh.hx())
        } else {
            1.0 / (mesh.hx() * mesh.hx()) + 1.0 / (mesh.hy() * mesh.hy())
        };
        let limit = 1.0 / inv.sqrt();
        if self.dt > limit * (1.0 + 1e-12) {
            return Err(Error::Cfl { dt: self.dt, limit });
        }
        Ok(())
    }
}

/// A real value per mesh node.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn zeros(mesh: &DomainMesh) -> Self {
        Self {
            values: vec![0.0; mesh.node_count()],
        }
    }

    /// Samples `f` at every node and zeroes the Dirichlet part, giving an element of V.
    pub fn from_fn(mesh: &DomainMesh, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = mesh
            .nodes()
            .iter()
            .enumerate()
            .map(|(n, p)| {
                if mesh.kind(n) == NodeKind::Dirichlet {
                    0.0
                } else {
                    f(p[0], p[1])
                }
            })
            .collect();
        Self { values }
    }

    pub fn from_values(mesh: &DomainMesh, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.node_count() {
            return Err(Error::Shape {
                what: "grid function",
                expected: mesh.node_count(),
                found: values.len(),
            });
        }
        Ok(Self { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// True if the function vanishes on the Dirichlet nodes.
    pub fn is_in_v(&self, mesh: &DomainMesh) -> bool {
        mesh.gamma0().iter().all(|&n| self.values[n] == 0.0)
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| alpha * v).collect(),
        }
    }

    /// Trapezoid L²(Ω) inner product.
    pub fn dot(&self, other: &Self, mesh: &DomainMesh) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .zip(mesh.weights())
            .map(|((a, b), w)| a * b * w)
            .sum()
    }

    pub fn l2_norm(&self, mesh: &DomainMesh) -> f64 {
        self.dot(self, mesh).sqrt()
    }

    pub fn gamma1_values(&self, mesh: &DomainMesh) -> Vec<f64> {
        mesh.gamma1().iter().map(|&n| self.values[n]).collect()
    }
}

/// Composite trapezoid integral of `f` (one value per Γ₁ node) along Γ₁.
/// In 1-D Γ₁ is a point and the value itself is returned.
pub fn integrate_gamma1(f: &[f64], mesh: &DomainMesh) -> Result<f64> {
    if f.len() != mesh.gamma1().len() {
        return Err(Error::Shape {
            what: "gamma1 integrand",
            expected: mesh.gamma1().len(),
            found: f.len(),
        });
    }
    Ok(f.iter()
        .zip(mesh.gamma1_weights())
        .map(|(v, w)| v * w)
        .sum())
}

/// Squared L²(Σ₁) norm of a boundary trace: trapezoid in space and time.
pub fn integrate_sigma1(trace: &BoundaryTrace) -> Result<f64> {
    if trace.sample_count() < 2 {
        return Err(Error::InvalidArgument(
            "boundary trace needs at least two time samples".into(),
        ));
    }
    Ok(trace.map(|v| v * v).integrate())
}
