//! The mixed Dirichlet/Neumann Laplacian, its eigenpairs, and the harmonic
//! lifting of Neumann data on the damped boundary.
//!
//! The operator is stored in weighted form: a symmetric stiffness matrix `K`
//! (edge differences with trapezoid weights) and the diagonal trapezoid mass
//! `M`, so that `Δ_h = -M⁻¹K`. On the damped side this coincides with the
//! usual ghost-node reflection of the Neumann condition, and `K` is symmetric
//! by construction.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::domain::{DomainMesh, GridFunction, NodeKind};
use crate::error::{Error, Result};
use crate::linalg::{BandCholesky, Csr};
use crate::measure::BoundaryTrace;

/// Default relative threshold for [`vanishing_set_fraction`].
pub const VANISHING_EPS: f64 = 1e-3;

#[derive(Debug, Clone)]
pub struct MixedLaplacian {
    stiffness: Csr,
    mass: Vec<f64>,
    /// Γ₁ quadrature weight per node (0 off Γ₁).
    boundary_weight: Vec<f64>,
    dofs: Vec<usize>,
}

/// Builds the stiffness/mass pair for the mixed problem on `mesh`.
pub fn assemble_mixed_laplacian(mesh: &DomainMesh) -> MixedLaplacian {
    let n = mesh.node_count();
    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    if mesh.dim() == 1 {
        let w = 1.0 / mesh.hx();
        for i in 0..mesh.nx() {
            edges.push((i, i + 1, w));
        }
    } else {
        let (nx, ny, hx, hy) = (mesh.nx(), mesh.ny(), mesh.hx(), mesh.hy());
        // Rows j = 0 and j = ny are entirely Dirichlet; their edges carry no dofs.
        for j in 1..ny {
            for i in 0..nx {
                edges.push((mesh.index(i, j), mesh.index(i + 1, j), hy / hx));
            }
        }
        for i in 1..=nx {
            let wx = if i == nx { 0.5 * hx } else { hx };
            for j in 0..ny {
                edges.push((mesh.index(i, j), mesh.index(i, j + 1), wx / hy));
            }
        }
    }

    let free = |k: usize| mesh.kind(k) != NodeKind::Dirichlet;
    let mut triplets = Vec::with_capacity(4 * edges.len());
    for (a, b, w) in edges {
        if free(a) {
            triplets.push((a, a, w));
        }
        if free(b) {
            triplets.push((b, b, w));
        }
        if free(a) && free(b) {
            triplets.push((a, b, -w));
            triplets.push((b, a, -w));
        }
    }

    let mut boundary_weight = vec![0.0; n];
    for (&node, &w) in mesh.gamma1().iter().zip(mesh.gamma1_weights()) {
        boundary_weight[node] = w;
    }
    MixedLaplacian {
        stiffness: Csr::from_triplets(n, triplets),
        mass: mesh.weights().to_vec(),
        boundary_weight,
        dofs: mesh.dofs(),
    }
}

impl MixedLaplacian {
    pub fn dofs(&self) -> &[usize] {
        &self.dofs
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn boundary_weight(&self) -> &[f64] {
        &self.boundary_weight
    }

    pub fn stiffness(&self) -> &Csr {
        &self.stiffness
    }

    /// `K u` over all nodes (zero on Dirichlet rows).
    pub fn stiffness_apply(&self, u: &[f64]) -> Vec<f64> {
        self.stiffness.mul_vec(u)
    }

    /// Discrete Laplacian with homogeneous Neumann data on Γ₁: `-M⁻¹ K u`.
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let mut out = self.stiffness.mul_vec(u);
        // Dirichlet rows of K are empty, so those entries stay zero.
        for (o, m) in out.iter_mut().zip(&self.mass) {
            *o = -*o / m;
        }
        out
    }

    /// Discrete Laplacian with Neumann data `g` (one value per Γ₁ node in mesh order).
    pub fn apply_with_neumann(&self, u: &[f64], mesh: &DomainMesh, g: &[f64]) -> Vec<f64> {
        let mut out = self.apply(u);
        for (&node, gv) in mesh.gamma1().iter().zip(g) {
            out[node] += self.boundary_weight[node] * gv / self.mass[node];
        }
        out
    }

    /// The symmetric, negative semidefinite matrix `-K` restricted to the dofs.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let m = self.dofs.len();
        DMatrix::from_fn(m, m, |r, c| -self.stiffness.get(self.dofs[r], self.dofs[c]))
    }

    /// Diagonal of the mass matrix on the dofs.
    pub fn mass_dofs(&self) -> Vec<f64> {
        self.dofs.iter().map(|&k| self.mass[k]).collect()
    }

    /// Generalized eigenpairs of `K φ = λ M φ` on the dofs, ascending, M-orthonormal.
    fn dense_eigen(&self) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
        let m = self.dofs.len();
        let inv_sqrt: Vec<f64> = self.mass_dofs().iter().map(|w| 1.0 / w.sqrt()).collect();
        let sym = DMatrix::from_fn(m, m, |r, c| {
            self.stiffness.get(self.dofs[r], self.dofs[c]) * inv_sqrt[r] * inv_sqrt[c]
        });
        let eig = SymmetricEigen::try_new(sym, 1e-14, 10_000)
            .ok_or_else(|| Error::Eigen(format!("symmetric QR did not converge for {m} dofs")))?;
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let mut lambdas = Vec::with_capacity(m);
        let mut vecs = Vec::with_capacity(m);
        for idx in order {
            lambdas.push(eig.eigenvalues[idx]);
            let col = eig.eigenvectors.column(idx);
            let mut v: Vec<f64> = (0..m).map(|r| col[r] * inv_sqrt[r]).collect();
            normalize_sign(&mut v);
            vecs.push(v);
        }
        Ok((lambdas, vecs))
    }
}

/// Flips `v` so that its first entry of significant size is positive.
fn normalize_sign(v: &mut [f64]) {
    let max = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if let Some(first) = v.iter().find(|x| x.abs() > 1e-3 * max) {
        if *first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

/// Eigenpairs `(λ_k, φ_k)` of `-Δ_h` with the mixed boundary conditions.
#[derive(Debug, Clone)]
pub struct EigenBasis {
    lambdas: Vec<f64>,
    phis: Vec<GridFunction>,
    /// Separation indices `(m, n)` on the rectangle; `(k, 0)` on the interval.
    labels: Vec<(usize, usize)>,
}

impl EigenBasis {
    pub fn count(&self) -> usize {
        self.lambdas.len()
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn lambda(&self, k: usize) -> f64 {
        self.lambdas[k]
    }

    pub fn phi(&self, k: usize) -> &GridFunction {
        &self.phis[k]
    }

    pub fn phis(&self) -> &[GridFunction] {
        &self.phis
    }

    pub fn label(&self, k: usize) -> (usize, usize) {
        self.labels[k]
    }

    /// Coefficients `⟨f, φ_k⟩` in the trapezoid inner product.
    pub fn project(&self, f: &[f64], mesh: &DomainMesh) -> Vec<f64> {
        let w = mesh.weights();
        self.phis
            .iter()
            .map(|phi| {
                phi.values
                    .iter()
                    .zip(f)
                    .zip(w)
                    .map(|((p, v), w)| p * v * w)
                    .sum()
            })
            .collect()
    }

    /// Max-norm deviation of the Gram matrix from the identity.
    pub fn orthonormality_defect(&self, mesh: &DomainMesh) -> f64 {
        let mut worst = 0.0f64;
        for (j, a) in self.phis.iter().enumerate() {
            for (k, b) in self.phis.iter().enumerate().skip(j) {
                let target = if j == k { 1.0 } else { 0.0 };
                worst = worst.max((a.dot(b, mesh) - target).abs());
            }
        }
        worst
    }
}

/// First `count` eigenpairs of the mixed Laplacian.
///
/// The interval uses a dense symmetric solve. The rectangle operator is the
/// Kronecker sum of two 1-D operators (Dirichlet/Neumann in x, Dirichlet in
/// y), so its eigenpairs are assembled from the 1-D factors exactly.
pub fn eigen_decompose(mesh: &DomainMesh, count: usize) -> Result<EigenBasis> {
    let available = mesh.dofs().len();
    if count == 0 || count > available {
        return Err(Error::EigenCount {
            requested: count,
            available,
        });
    }
    if mesh.dim() == 1 {
        return eigen_decompose_dense(mesh, count);
    }

    let x_mesh = DomainMesh::interval(mesh.nx())?;
    let (lx, vx) = assemble_mixed_laplacian(&x_mesh).dense_eigen()?;
    let (ly, vy) = dirichlet_factor(mesh.ny(), mesh.hy())?;

    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(lx.len() * ly.len());
    for (m, a) in lx.iter().enumerate() {
        for (n, b) in ly.iter().enumerate() {
            pairs.push((a + b, m, n));
        }
    }
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0).then((p.1, p.2).cmp(&(q.1, q.2))));
    pairs.truncate(count);

    let mut lambdas = Vec::with_capacity(count);
    let mut phis = Vec::with_capacity(count);
    let mut labels = Vec::with_capacity(count);
    for (lam, m, n) in pairs {
        let mut phi = GridFunction::zeros(mesh);
        // x dofs are i = 1..=nx, y dofs j = 1..ny-1.
        for j in 1..mesh.ny() {
            for i in 1..=mesh.nx() {
                phi.values[mesh.index(i, j)] = vx[m][i - 1] * vy[n][j - 1];
            }
        }
        lambdas.push(lam);
        phis.push(phi);
        labels.push((m, n + 1));
    }
    Ok(EigenBasis {
        lambdas,
        phis,
        labels,
    })
}

/// Eigenpairs from a dense solve on the full dof set (any dimension).
pub fn eigen_decompose_dense(mesh: &DomainMesh, count: usize) -> Result<EigenBasis> {
    let op = assemble_mixed_laplacian(mesh);
    let available = op.dofs().len();
    if count == 0 || count > available {
        return Err(Error::EigenCount {
            requested: count,
            available,
        });
    }
    let (lambdas, vecs) = op.dense_eigen()?;
    let phis = vecs
        .into_iter()
        .take(count)
        .map(|v| {
            let mut phi = GridFunction::zeros(mesh);
            for (&node, val) in op.dofs().iter().zip(v) {
                phi.values[node] = val;
            }
            phi
        })
        .collect();
    Ok(EigenBasis {
        lambdas: lambdas[..count].to_vec(),
        phis,
        labels: (0..count).map(|k| (k, 0)).collect(),
    })
}

/// Dirichlet-Dirichlet 1-D factor on `ny` cells: interior dofs only.
fn dirichlet_factor(ny: usize, hy: f64) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let m = ny - 1;
    let w = 1.0 / hy;
    // Mass is uniform (hy), so the symmetric form is K / hy.
    let sym = DMatrix::from_fn(m, m, |r, c| {
        if r == c {
            2.0 * w / hy
        } else if r.abs_diff(c) == 1 {
            -w / hy
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::try_new(sym, 1e-14, 10_000)
        .ok_or_else(|| Error::Eigen(format!("Dirichlet factor did not converge ({m} dofs)")))?;
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let scale = 1.0 / hy.sqrt();
    let mut lambdas = Vec::with_capacity(m);
    let mut vecs = Vec::with_capacity(m);
    for idx in order {
        lambdas.push(eig.eigenvalues[idx]);
        let col = eig.eigenvectors.column(idx);
        let mut v: Vec<f64> = col.iter().map(|x| x * scale).collect();
        normalize_sign(&mut v);
        vecs.push(v);
    }
    Ok((lambdas, vecs))
}

/// Solution of `Δ_h w = 0`, `w|Γ₀ = 0`, `∂ν w|Γ₁ = h`.
#[derive(Debug, Clone)]
pub struct HarmonicExtension {
    pub boundary: Vec<f64>,
    pub w: GridFunction,
    /// Max-norm residual of the discrete system, relative to the data.
    pub residual: f64,
}

/// Factored solver for repeated harmonic liftings on one mesh.
#[derive(Debug, Clone)]
pub struct HarmonicExtender {
    mesh: DomainMesh,
    op: MixedLaplacian,
    chol: BandCholesky,
    /// Position of each Γ₁ node in the dof ordering.
    gamma1_dof: Vec<usize>,
}

impl HarmonicExtender {
    pub fn new(mesh: &DomainMesh) -> Result<Self> {
        let op = assemble_mixed_laplacian(mesh);
        let dofs = op.dofs().to_vec();
        let mut pos = vec![usize::MAX; mesh.node_count()];
        for (p, &node) in dofs.iter().enumerate() {
            pos[node] = p;
        }
        let mut bw = 0;
        for (r, &node) in dofs.iter().enumerate() {
            for (c, _) in op.stiffness().row(node) {
                if pos[c] != usize::MAX {
                    bw = bw.max(r.abs_diff(pos[c]));
                }
            }
        }
        let k = op.stiffness();
        let chol = BandCholesky::factor(dofs.len(), bw, |r, c| k.get(dofs[r], dofs[c]))?;
        let gamma1_dof = mesh.gamma1().iter().map(|&n| pos[n]).collect();
        Ok(Self {
            mesh: mesh.clone(),
            op,
            chol,
            gamma1_dof,
        })
    }

    pub fn mesh(&self) -> &DomainMesh {
        &self.mesh
    }

    pub fn extend(&self, h: &[f64]) -> Result<HarmonicExtension> {
        let g1 = self.mesh.gamma1();
        if h.len() != g1.len() {
            return Err(Error::Shape {
                what: "Neumann datum",
                expected: g1.len(),
                found: h.len(),
            });
        }
        let dofs = self.op.dofs();
        let mut rhs = vec![0.0; dofs.len()];
        for ((&p, &node), hv) in self.gamma1_dof.iter().zip(g1).zip(h) {
            rhs[p] = self.op.boundary_weight()[node] * hv;
        }
        let sol = self.chol.solve(&rhs);
        if sol.iter().any(|v| !v.is_finite()) {
            return Err(Error::LinearSolve("non-finite harmonic extension".into()));
        }
        let mut w = GridFunction::zeros(&self.mesh);
        for (&node, v) in dofs.iter().zip(&sol) {
            w.values[node] = *v;
        }
        let kw = self.op.stiffness_apply(&w.values);
        let scale = rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let resid = dofs
            .iter()
            .enumerate()
            .map(|(p, &node)| (kw[node] - rhs[p]).abs())
            .fold(0.0f64, f64::max);
        let residual = if scale > 0.0 { resid / scale } else { resid };
        Ok(HarmonicExtension {
            boundary: h.to_vec(),
            w,
            residual,
        })
    }

    /// Operator norm of `h ↦ w` from L²(Γ₁) to L²(Ω) on this mesh.
    pub fn operator_norm(&self) -> Result<f64> {
        let m = self.mesh.gamma1().len();
        let sw: Vec<f64> = self.mesh.gamma1_weights().to_vec();
        let mut cols = Vec::with_capacity(m);
        for j in 0..m {
            let mut e = vec![0.0; m];
            e[j] = 1.0;
            cols.push(self.extend(&e)?.w);
        }
        let gram = DMatrix::from_fn(m, m, |a, b| {
            cols[a].dot(&cols[b], &self.mesh) / (sw[a] * sw[b]).sqrt()
        });
        let eig = SymmetricEigen::try_new(gram, 1e-14, 10_000)
            .ok_or_else(|| Error::Eigen("extension Gram matrix".into()))?;
        Ok(eig.eigenvalues.iter().fold(0.0f64, |a, &v| a.max(v)).sqrt())
    }
}

/// One-shot harmonic lifting of the Γ₁ datum `h`.
pub fn harmonic_extend(mesh: &DomainMesh, h: &[f64]) -> Result<HarmonicExtension> {
    HarmonicExtender::new(mesh)?.extend(h)
}

/// Time-dependent lifting `G(t)` of a boundary datum and its time derivatives.
#[derive(Debug, Clone)]
pub struct TimeExtension {
    pub g: Vec<GridFunction>,
    pub g_dot: Vec<GridFunction>,
    pub g_ddot: Vec<GridFunction>,
}

/// Lifts each time sample of `g` and differentiates the lifted field in time
/// (centered inside, second-order one-sided at the ends).
pub fn extend_time_dependent(mesh: &DomainMesh, g: &BoundaryTrace) -> Result<TimeExtension> {
    let ns = g.sample_count();
    if ns < 4 {
        return Err(Error::InvalidArgument(
            "time-dependent lifting needs at least 4 samples".into(),
        ));
    }
    if g.node_count() != mesh.gamma1().len() {
        return Err(Error::Shape {
            what: "boundary trace nodes",
            expected: mesh.gamma1().len(),
            found: g.node_count(),
        });
    }
    let ext = HarmonicExtender::new(mesh)?;
    let lifted: Vec<GridFunction> = (0..ns)
        .map(|n| ext.extend(g.sample(n)).map(|e| e.w))
        .collect::<Result<_>>()?;
    let dt = g.dt();
    let nodes = mesh.node_count();
    let combine = |coef: &[(usize, f64)], scale: f64| -> GridFunction {
        let mut out = vec![0.0; nodes];
        for &(idx, c) in coef {
            for (o, v) in out.iter_mut().zip(&lifted[idx].values) {
                *o += c * v;
            }
        }
        out.iter_mut().for_each(|o| *o *= scale);
        GridFunction { values: out }
    };
    let last = ns - 1;
    let mut g_dot = Vec::with_capacity(ns);
    let mut g_ddot = Vec::with_capacity(ns);
    for n in 0..ns {
        let (d1, d2) = if n == 0 {
            (
                combine(&[(0, -3.0), (1, 4.0), (2, -1.0)], 0.5 / dt),
                combine(&[(0, 2.0), (1, -5.0), (2, 4.0), (3, -1.0)], 1.0 / (dt * dt)),
            )
        } else if n == last {
            (
                combine(&[(last, 3.0), (last - 1, -4.0), (last - 2, 1.0)], 0.5 / dt),
                combine(
                    &[
                        (last, 2.0),
                        (last - 1, -5.0),
                        (last - 2, 4.0),
                        (last - 3, -1.0),
                    ],
                    1.0 / (dt * dt),
                ),
            )
        } else {
            (
                combine(&[(n + 1, 1.0), (n - 1, -1.0)], 0.5 / dt),
                combine(&[(n + 1, 1.0), (n, -2.0), (n - 1, 1.0)], 1.0 / (dt * dt)),
            )
        };
        g_dot.push(d1);
        g_ddot.push(d2);
    }
    Ok(TimeExtension {
        g: lifted,
        g_dot,
        g_ddot,
    })
}

/// Share of Γ₁ nodes where `|phi| < eps · max_Γ₁ |phi|`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct VanishingSet {
    pub fraction: f64,
    /// Set when `phi` vanishes identically on Γ₁ (fraction reported as 1).
    pub degenerate: bool,
}

pub fn vanishing_set_fraction(
    phi: &GridFunction,
    mesh: &DomainMesh,
    eps: f64,
) -> Result<VanishingSet> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "eps must be positive, got {eps}"
        )));
    }
    let trace = phi.gamma1_values(mesh);
    let max = trace.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if max == 0.0 {
        return Ok(VanishingSet {
            fraction: 1.0,
            degenerate: true,
        });
    }
    let small = trace.iter().filter(|v| v.abs() < eps * max).count();
    Ok(VanishingSet {
        fraction: small as f64 / trace.len() as f64,
        degenerate: false,
    })
}
