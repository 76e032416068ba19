//! Boundary traces on Σ₁ = Γ₁ × (0, τ), the norms the stability statements
//! are phrased in, and the seeded noise model.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::domain::{integrate_sigma1, DomainMesh, TimeGrid};
use crate::error::{Error, Result};
use crate::wave::{DampingField, WaveTrajectory};

/// Values of a scalar field at every (time sample, Γ₁ node).
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryTrace {
    time: TimeGrid,
    coords: Vec<[f64; 2]>,
    space_weights: Vec<f64>,
    /// Row-major: sample `n`, node `j` at `n * nodes + j`.
    values: Vec<f64>,
}

impl BoundaryTrace {
    pub fn zeros(mesh: &DomainMesh, tg: &TimeGrid) -> Self {
        Self::from_fn(mesh, tg, |_, _| 0.0)
    }

    pub fn from_fn(mesh: &DomainMesh, tg: &TimeGrid, f: impl Fn(f64, [f64; 2]) -> f64) -> Self {
        let coords = mesh.gamma1_coords();
        let mut values = Vec::with_capacity(tg.sample_count() * coords.len());
        for t in tg.times() {
            values.extend(coords.iter().map(|&p| f(t, p)));
        }
        Self {
            time: *tg,
            coords,
            space_weights: mesh.gamma1_weights().to_vec(),
            values,
        }
    }

    /// Builds from one row of Γ₁ values per time sample.
    pub fn from_samples(mesh: &DomainMesh, tg: &TimeGrid, rows: Vec<Vec<f64>>) -> Result<Self> {
        let nodes = mesh.gamma1().len();
        if rows.len() != tg.sample_count() {
            return Err(Error::Shape {
                what: "trace samples",
                expected: tg.sample_count(),
                found: rows.len(),
            });
        }
        let mut values = Vec::with_capacity(rows.len() * nodes);
        for row in rows {
            if row.len() != nodes {
                return Err(Error::Shape {
                    what: "trace nodes",
                    expected: nodes,
                    found: row.len(),
                });
            }
            values.extend(row);
        }
        Ok(Self {
            time: *tg,
            coords: mesh.gamma1_coords(),
            space_weights: mesh.gamma1_weights().to_vec(),
            values,
        })
    }

    pub fn time_grid(&self) -> &TimeGrid {
        &self.time
    }

    pub fn dt(&self) -> f64 {
        self.time.dt()
    }

    pub fn times(&self) -> Vec<f64> {
        self.time.times()
    }

    pub fn sample_count(&self) -> usize {
        self.values.len() / self.coords.len().max(1)
    }

    pub fn node_count(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[[f64; 2]] {
        &self.coords
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn at(&self, sample: usize, node: usize) -> f64 {
        self.values[sample * self.coords.len() + node]
    }

    /// Γ₁ values at one time sample.
    pub fn sample(&self, n: usize) -> &[f64] {
        let m = self.coords.len();
        &self.values[n * m..(n + 1) * m]
    }

    /// Time series at one Γ₁ node.
    pub fn node_series(&self, j: usize) -> Vec<f64> {
        (0..self.sample_count()).map(|n| self.at(n, j)).collect()
    }

    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> Self {
        Self {
            values: self.values.iter().map(|&v| f(v)).collect(),
            ..self.clone()
        }
    }

    fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.values.len(), other.values.len(), "trace shapes differ");
        Self {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
            ..self.clone()
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        self.map(|v| alpha * v)
    }

    /// Multiplies each node's series by a per-node factor (e.g. `b` on Γ₁).
    pub fn scale_nodes(&self, factors: &[f64]) -> Self {
        let m = self.coords.len();
        assert_eq!(factors.len(), m, "per-node factor length");
        Self {
            values: self
                .values
                .iter()
                .enumerate()
                .map(|(k, v)| v * factors[k % m])
                .collect(),
            ..self.clone()
        }
    }

    /// Trapezoid integral of the trace over Σ₁ (linear in the trace).
    pub fn integrate(&self) -> f64 {
        let tw = self.time.weights();
        let m = self.coords.len();
        let mut total = 0.0;
        for (n, w) in tw.iter().enumerate() {
            let row: f64 = self.values[n * m..(n + 1) * m]
                .iter()
                .zip(&self.space_weights)
                .map(|(v, s)| v * s)
                .sum();
            total += w * row;
        }
        total
    }

    /// Time integral at one node.
    pub fn integrate_node(&self, j: usize) -> f64 {
        self.time
            .weights()
            .iter()
            .enumerate()
            .map(|(n, w)| w * self.at(n, j))
            .sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// `∂ν u` on Γ₁ from interior values with the second-order one-sided
/// three-point stencil. This stencil differs from the ghost-node relation
/// that imposes the boundary condition.
pub fn neumann_trace(traj: &WaveTrajectory, mesh: &DomainMesh) -> BoundaryTrace {
    let hx = mesh.hx();
    let nx = mesh.nx();
    let stencil: Vec<[usize; 3]> = mesh
        .gamma1()
        .iter()
        .map(|&node| {
            let (_, j) = mesh.ij(node);
            [node, mesh.index(nx - 1, j), mesh.index(nx - 2, j)]
        })
        .collect();
    let rows = traj
        .states()
        .iter()
        .map(|s| {
            let u = &s.u.values;
            stencil
                .iter()
                .map(|[a, b, c]| (3.0 * u[*a] - 4.0 * u[*b] + u[*c]) / (2.0 * hx))
                .collect()
        })
        .collect();
    BoundaryTrace::from_samples(mesh, traj.time_grid(), rows).expect("trajectory matches mesh")
}

/// `∂_t u` restricted to Γ₁.
pub fn velocity_trace(traj: &WaveTrajectory, mesh: &DomainMesh) -> BoundaryTrace {
    let rows = traj
        .states()
        .iter()
        .map(|s| s.v.gamma1_values(mesh))
        .collect();
    BoundaryTrace::from_samples(mesh, traj.time_grid(), rows).expect("trajectory matches mesh")
}

/// `u` restricted to Γ₁.
pub fn displacement_trace(traj: &WaveTrajectory, mesh: &DomainMesh) -> BoundaryTrace {
    let rows = traj
        .states()
        .iter()
        .map(|s| s.u.gamma1_values(mesh))
        .collect();
    BoundaryTrace::from_samples(mesh, traj.time_grid(), rows).expect("trajectory matches mesh")
}

/// L²(Σ₁) norm.
pub fn l2_sigma1_norm(trace: &BoundaryTrace) -> f64 {
    integrate_sigma1(trace).map(f64::sqrt).unwrap_or(0.0)
}

/// Discrete surrogate of the B_{1/2,1}(Γ₁) norm.
///
/// On the interval Γ₁ is a point and the norm is `|b|`. On the rectangle the
/// Γ₁ values are odd-reflected about both side endpoints into a periodic
/// sequence of period 2, and the result is `Σ_n (1 + ξ_n²)^{1/4} |b̂_n|` with
/// `b̂_n` the normalized DFT coefficients and `ξ_n = π n` (signed).
pub fn besov_half_norm(b: &DampingField, mesh: &DomainMesh) -> f64 {
    let vals = b.values();
    if mesh.dim() == 1 {
        return vals[0].abs();
    }
    let ny = mesh.ny();
    let period = 2 * ny;
    let mut seq = vec![Complex::new(0.0, 0.0); period];
    for (j, &v) in vals.iter().enumerate() {
        seq[j + 1] = Complex::new(v, 0.0);
        seq[period - j - 1] = Complex::new(-v, 0.0);
    }
    let fft = FftPlanner::<f64>::new().plan_fft_forward(period);
    fft.process(&mut seq);
    let scale = 1.0 / period as f64;
    seq.iter()
        .enumerate()
        .map(|(n, c)| {
            let k = if n <= period / 2 {
                n as f64
            } else {
                n as f64 - period as f64
            };
            let xi = std::f64::consts::PI * k;
            (1.0 + xi * xi).powf(0.25) * c.norm() * scale
        })
        .sum()
}

/// Adds i.i.d. uniform noise of amplitude `level · max|trace|` from a seeded generator.
pub fn add_noise(trace: &BoundaryTrace, level: f64, seed: u64) -> Result<BoundaryTrace> {
    if !(level >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "noise level must be nonnegative, got {level}"
        )));
    }
    if level == 0.0 {
        return Ok(trace.clone());
    }
    let amp = level * trace.max_abs();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(trace.map(|v| v + amp * rng.random_range(-1.0..=1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::GridFunction;
    use crate::wave::WaveState;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn line(n: usize) -> DomainMesh {
        DomainMesh::interval(n).unwrap()
    }

    #[test]
    fn sigma1_quadrature_examples() {
        let mesh = line(8);
        let tg = TimeGrid::with_steps(2.0, 400).unwrap();
        let zero = BoundaryTrace::zeros(&mesh, &tg);
        assert_eq!(integrate_sigma1(&zero).unwrap(), 0.0);
        let one = BoundaryTrace::from_fn(&mesh, &tg, |_, _| 1.0);
        assert!((integrate_sigma1(&one).unwrap() - 2.0).abs() < 1e-12);
        let s = BoundaryTrace::from_fn(&mesh, &tg, |t, _| (PI * t / 2.0).sin());
        assert!((integrate_sigma1(&s).unwrap() - 1.0).abs() < 1e-4);
    }

    #[test]
    fn sigma1_norm_closed_form() {
        // ‖b ∂_t u₀‖ with u₀ = cos(√λ₀ t) √2 sin(πx/2): b π / √2.
        let mesh = line(8);
        let tg = TimeGrid::with_steps(2.0, 2000).unwrap();
        let b = 0.5;
        let lam: f64 = (PI / 2.0).powi(2);
        let tr = BoundaryTrace::from_fn(&mesh, &tg, |t, _| {
            -b * (2.0 * lam).sqrt() * (lam.sqrt() * t).sin()
        });
        let norm = l2_sigma1_norm(&tr);
        assert!((norm - b * PI / 2f64.sqrt()).abs() < 1e-5, "{norm}");
        assert!((l2_sigma1_norm(&tr.scaled(-3.0)) - 3.0 * norm).abs() < 1e-13 * norm);
        assert_eq!(l2_sigma1_norm(&BoundaryTrace::zeros(&mesh, &tg)), 0.0);
    }

    #[test]
    fn sigma1_quadrature_second_order() {
        let err = |n: usize| {
            let mesh = DomainMesh::rectangle(4, n).unwrap();
            let tg = TimeGrid::with_steps(1.0, n).unwrap();
            let tr = BoundaryTrace::from_fn(&mesh, &tg, |t, p| (PI * p[1]).sin() * (t * 2.0).cos());
            // ∫ sin(πy) dy ∫ cos(2t) dt = (2/π)(sin 2 / 2)
            (tr.integrate() - 2.0 / PI * 2f64.sin() / 2.0).abs()
        };
        let e: Vec<f64> = [16usize, 32, 64, 128].iter().map(|&n| err(n)).collect();
        let slope = crate::fit::loglog_slope(&[16.0, 32.0, 64.0, 128.0], &e);
        assert!(slope <= -1.9, "{slope}");
    }

    fn linear_profile_traj(mesh: &DomainMesh, tg: &TimeGrid, omega: f64) -> WaveTrajectory {
        let states = tg
            .times()
            .into_iter()
            .map(|t| WaveState {
                u: GridFunction::from_fn(mesh, |x, _| x * (omega * t).sin()),
                v: GridFunction::from_fn(mesh, |x, _| x * omega * (omega * t).cos()),
            })
            .collect();
        WaveTrajectory::from_states(mesh, *tg, states)
    }

    #[test]
    fn neumann_trace_of_linear_profile() {
        let mesh = line(16);
        let tg = TimeGrid::with_steps(1.0, 50).unwrap();
        let traj = linear_profile_traj(&mesh, &tg, 2.0);
        let tr = neumann_trace(&traj, &mesh);
        for (n, t) in tg.times().into_iter().enumerate() {
            assert!((tr.at(n, 0) - (2.0 * t).sin()).abs() < 1e-12);
        }
        let vt = velocity_trace(&traj, &mesh);
        assert!((vt.at(10, 0) - 2.0 * (2.0 * tg.time(10)).cos()).abs() < 1e-12);
    }

    #[test]
    fn besov_surrogate_properties() {
        let mesh = DomainMesh::rectangle(8, 16).unwrap();
        let zero = DampingField::new(&mesh, vec![0.0; 15]).unwrap();
        assert_eq!(besov_half_norm(&zero, &mesh), 0.0);
        let b = DampingField::from_fn(&mesh, |y| 0.3 + 0.2 * (PI * y).sin());
        let base = besov_half_norm(&b, &mesh);
        for rho in [0.5, 0.25, 0.1, 3.0] {
            let scaled = besov_half_norm(&b.scaled(rho), &mesh);
            assert!((scaled - rho * base).abs() <= 1e-13 * rho * base);
        }
        // Dominates the L²(Γ₁) norm (Parseval with weights ≥ 1).
        let l2 = crate::domain::integrate_gamma1(
            &b.values().iter().map(|v| v * v).collect::<Vec<_>>(),
            &mesh,
        )
        .unwrap()
        .sqrt();
        assert!(base >= l2);

        let point = line(4);
        let b1 = DampingField::new(&point, vec![0.5]).unwrap();
        assert_eq!(besov_half_norm(&b1, &point), 0.5);
    }

    #[test]
    fn besov_single_sine_mode() {
        // sin(πy) reflects to a single Fourier pair at n = ±1: 2 · ½ · (1+π²)^{1/4}.
        let mesh = DomainMesh::rectangle(4, 32).unwrap();
        let b = DampingField::from_fn(&mesh, |y| (PI * y).sin());
        let v = besov_half_norm(&b, &mesh);
        assert!((v - (1.0 + PI * PI).powf(0.25)).abs() < 1e-12, "{v}");
    }

    #[test]
    fn noise_is_seeded_and_bounded() {
        let mesh = DomainMesh::rectangle(4, 8).unwrap();
        let tg = TimeGrid::with_steps(1.0, 40).unwrap();
        let tr = BoundaryTrace::from_fn(&mesh, &tg, |t, p| (t * 3.0 + p[1]).sin());
        assert_eq!(add_noise(&tr, 0.0, 7).unwrap(), tr);
        let a = add_noise(&tr, 0.01, 7).unwrap();
        let b = add_noise(&tr, 0.01, 7).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, add_noise(&tr, 0.01, 8).unwrap());
        assert!(a.sub(&tr).max_abs() <= 0.01 * tr.max_abs());
        assert!(add_noise(&tr, -1.0, 0).is_err());
    }

    proptest! {
        #[test]
        fn sigma1_norm_triangle_inequality(
            a in proptest::collection::vec(-10.0f64..10.0, 7 * 11),
            b in proptest::collection::vec(-10.0f64..10.0, 7 * 11),
        ) {
            let mesh = DomainMesh::rectangle(3, 8).unwrap();
            let tg = TimeGrid::with_steps(1.5, 10).unwrap();
            let rows = |v: &Vec<f64>| v.chunks(7).map(|c| c.to_vec()).collect::<Vec<_>>();
            let ta = BoundaryTrace::from_samples(&mesh, &tg, rows(&a)).unwrap();
            let tb = BoundaryTrace::from_samples(&mesh, &tg, rows(&b)).unwrap();
            let lhs = l2_sigma1_norm(&ta.add(&tb));
            prop_assert!(lhs <= l2_sigma1_norm(&ta) + l2_sigma1_norm(&tb) + 1e-12);
        }

        #[test]
        fn trace_integral_linear_and_monotone(
            a in proptest::collection::vec(0.0f64..5.0, 3 * 6),
            b in proptest::collection::vec(0.0f64..5.0, 3 * 6),
            alpha in -3.0f64..3.0,
        ) {
            let mesh = DomainMesh::rectangle(3, 4).unwrap();
            let tg = TimeGrid::with_steps(1.0, 5).unwrap();
            let rows = |v: &Vec<f64>| v.chunks(3).map(|c| c.to_vec()).collect::<Vec<_>>();
            let ta = BoundaryTrace::from_samples(&mesh, &tg, rows(&a)).unwrap();
            let tb = BoundaryTrace::from_samples(&mesh, &tg, rows(&b)).unwrap();
            let lin = ta.scaled(alpha).add(&tb).integrate();
            prop_assert!((lin - (alpha * ta.integrate() + tb.integrate())).abs() < 1e-9);
            prop_assert!(ta.integrate() >= 0.0);
            prop_assert!(ta.add(&tb).integrate() >= ta.integrate() - 1e-12);
            let g: Vec<f64> = a[..3].to_vec();
            let sg = crate::domain::integrate_gamma1(&g, &mesh).unwrap();
            prop_assert!(sg >= 0.0);
        }
    }
}
