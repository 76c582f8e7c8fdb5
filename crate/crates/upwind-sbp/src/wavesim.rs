//! Verification problem: u_tt = u_xx on [-0.5, 0.5], homogeneous Neumann
//! boundaries, Gaussian initial profile at rest.
//!
//! Spatial operator: A = -H^(-1) (D+)^T H D+, the self-adjoint-in-H Neumann
//! discretization built from the derivative pair. Two time integrators:
//! exact-in-time spectral evolution (for measuring spatial convergence
//! orders without time-error contamination) and an explicit second-order
//! two-step scheme (the integrator the Courant numbers refer to).

use crate::error::Result;
use crate::grid::GridMode;
use crate::operators::OperatorSet;
use crate::optim::BuiltScheme;
use crate::spectra::operator_norm;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

pub const GAUSS_SIGMA: f64 = 0.05;

/// Grid sizes (cell counts) of the refinement sequence used for every
/// reported convergence fit.
pub const REFINEMENT_CELLS: [usize; 10] = [100, 110, 120, 130, 150, 170, 200, 230, 260, 300];

pub fn gaussian(x: f64) -> f64 {
    (-0.5 * (x / GAUSS_SIGMA) * (x / GAUSS_SIGMA)).exp()
}

/// Exact Neumann solution by reflection: the even periodized extension makes
/// mirror sources at every integer offset. `images` controls the truncation;
/// the Gaussian tail makes a handful of images overkill for t of order 1.
pub fn exact_solution(xs: &[f64], t: f64, images: i64) -> Vec<f64> {
    xs.iter()
        .map(|&x| {
            let mut u = 0.0;
            for m in -images..=images {
                let m = m as f64;
                u += 0.5 * (gaussian(x - t - m) + gaussian(x + t - m));
            }
            u
        })
        .collect()
}

/// Eigendecomposition of the Neumann operator, prepared for evolution.
/// With B = H^(1/2) D+ H^(-1/2) and G = B^T B (symmetric PSD), the operator
/// is A = -H^(-1/2) G H^(1/2), and u(t) = H^(-1/2) V cos(omega t) V^T H^(1/2) u0.
pub struct WaveOperator {
    /// nodes shifted onto [-0.5, 0.5]
    pub xs: Vec<f64>,
    pub h: f64,
    sqrt_h: DVector<f64>,
    omega: DVector<f64>,
    v: DMatrix<f64>,
    /// largest singular value of B; the explicit-scheme step bound is 2/this.
    pub lambda_full: f64,
}

pub fn wave_operator(op: &OperatorSet) -> WaveOperator {
    let n = op.n_cells();
    let sqrt_h = DVector::from_fn(n + 1, |i, _| op.norm()[i].sqrt());
    let mut b = op.dplus().clone();
    for i in 0..=n {
        for j in 0..=n {
            b[(i, j)] *= sqrt_h[i] / sqrt_h[j];
        }
    }
    let g = b.transpose() * &b;
    let g = (&g + g.transpose()) * 0.5;
    let eigen = nalgebra::SymmetricEigen::new(g);
    let omega = eigen.eigenvalues.map(|w| w.max(0.0).sqrt());
    let lambda_full = omega.iter().fold(0.0f64, |a, &w| a.max(w));
    let xs: Vec<f64> = op.grid().nodes().iter().map(|&x| x - 0.5).collect();
    WaveOperator { xs, h: op.h(), sqrt_h, omega, v: eigen.eigenvectors, lambda_full }
}

impl WaveOperator {
    /// Exact-in-time evolution of initial data at rest.
    pub fn evolve(&self, u0: &[f64], t: f64) -> Vec<f64> {
        let n = u0.len();
        let w = DVector::from_fn(n, |i, _| u0[i] * self.sqrt_h[i]);
        let mut y = self.v.transpose() * w;
        for i in 0..n {
            y[i] *= (self.omega[i] * t).cos();
        }
        let u = &self.v * y;
        (0..n).map(|i| u[i] / self.sqrt_h[i]).collect()
    }

    /// C-norm error of the evolved Gaussian against the reflected exact solution.
    pub fn gaussian_error(&self, t: f64) -> f64 {
        let u0: Vec<f64> = self.xs.iter().map(|&x| gaussian(x)).collect();
        let u = self.evolve(&u0, t);
        let exact = exact_solution(&self.xs, t, 8);
        u.iter()
            .zip(&exact)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max)
    }
}

/// Explicit second-order two-step integration of u_tt = A u from data at
/// rest: u^1 = u^0 + (dt^2/2) A u^0, then u^(n+1) = 2u^n - u^(n-1) + dt^2 A u^n.
pub struct LeapfrogRun {
    pub dt: f64,
    pub steps: usize,
    /// (time, C-norm error vs the reflected exact solution) at sample times.
    pub samples: Vec<(f64, f64)>,
    /// max-norm of the state after every step.
    pub max_norms: Vec<f64>,
}

pub fn apply_neumann(op: &OperatorSet, u: &DVector<f64>) -> DVector<f64> {
    // A u = -H^(-1) (D+)^T H (D+ u)
    let n = op.n_cells();
    let du = op.dplus() * u;
    let mut w = DVector::zeros(n + 1);
    for i in 0..=n {
        w[i] = du[i] * op.norm()[i];
    }
    let v = op.dplus().transpose() * w;
    DVector::from_fn(n + 1, |i, _| -v[i] / op.norm()[i])
}

pub fn simulate_leapfrog(
    op: &OperatorSet,
    u0: &[f64],
    t_final: f64,
    cfl: f64,
    sample_times: &[f64],
    track_exact: bool,
) -> LeapfrogRun {
    let lambda_full = operator_norm(op);
    let dt = cfl * 2.0 / lambda_full;
    let steps = (t_final / dt).ceil() as usize;
    let xs: Vec<f64> = op.grid().nodes().iter().map(|&x| x - 0.5).collect();
    let mut prev = DVector::from_column_slice(u0);
    let a0 = apply_neumann(op, &prev);
    let mut cur = &prev + a0 * (0.5 * dt * dt);
    let mut max_norms = Vec::with_capacity(steps + 1);
    max_norms.push(prev.amax());
    max_norms.push(cur.amax());
    let mut samples = Vec::new();
    let mut sample_iter = sample_times.iter().copied().peekable();
    for step in 1..=steps {
        let t = step as f64 * dt;
        while let Some(&ts) = sample_iter.peek() {
            if ts <= t + dt * 0.5 {
                sample_iter.next();
                let err = if track_exact {
                    let exact = exact_solution(&xs, t, 8);
                    cur.iter()
                        .zip(&exact)
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0f64, f64::max)
                } else {
                    cur.amax()
                };
                samples.push((t, err));
            } else {
                break;
            }
        }
        let acc = apply_neumann(op, &cur);
        let next = &cur * 2.0 - &prev + acc * (dt * dt);
        prev = cur;
        cur = next;
        max_norms.push(cur.amax());
    }
    LeapfrogRun { dt, steps, samples, max_norms }
}

/// Least-squares slope of log(err) against log(h).
pub fn fit_order(pairs: &[(f64, f64)]) -> f64 {
    let n = pairs.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(h, e) in pairs {
        let x = h.ln();
        let y = e.ln();
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

#[derive(Clone, Debug)]
pub struct ConvergenceRow {
    pub n_cells: usize,
    pub h: f64,
    pub error: f64,
}

#[derive(Clone, Debug)]
pub struct ConvergenceStudy {
    pub t: f64,
    pub rows: Vec<ConvergenceRow>,
    pub fitted_order: f64,
}

/// Spatial convergence at time t over the standard refinement sequence,
/// using exact-in-time evolution.
pub fn convergence_study(scheme: &BuiltScheme, t: f64, cells: &[usize]) -> Result<ConvergenceStudy> {
    let rows: Vec<ConvergenceRow> = cells
        .par_iter()
        .map(|&n| -> Result<ConvergenceRow> {
            let op = scheme.assemble(n, GridMode::Scaled)?;
            let w = wave_operator(&op);
            Ok(ConvergenceRow { n_cells: n, h: op.h(), error: w.gaussian_error(t) })
        })
        .collect::<Result<Vec<_>>>()?;
    let pairs: Vec<(f64, f64)> = rows.iter().map(|r| (r.h, r.error)).collect();
    Ok(ConvergenceStudy { t, rows, fitted_order: fit_order(&pairs) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::boundary_family;
    use crate::grid::{Grid, ShiftParams};
    use crate::operators::assemble;
    use crate::stencil::InteriorStencil;

    fn small_op(p: usize, n: usize) -> OperatorSet {
        let st = InteriorStencil::new(p);
        let sp = ShiftParams::none();
        let fam = boundary_family(&st, &sp).unwrap();
        let grid = Grid::new(p, sp, n, GridMode::Scaled).unwrap();
        assemble(&st, &grid, &fam.mu, &fam.e_matrix(&vec![0.0; fam.dim()])).unwrap()
    }

    #[test]
    fn exact_solution_images_converged() {
        let xs: Vec<f64> = (0..=64).map(|i| -0.5 + i as f64 / 64.0).collect();
        for t in [0.0, 0.17, 0.5, 1.3] {
            let a = exact_solution(&xs, t, 8);
            let b = exact_solution(&xs, t, 16);
            let diff = a
                .iter()
                .zip(&b)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0f64, f64::max);
            assert!(diff < 1e-13, "t={t}: image truncation error {diff}");
        }
    }

    #[test]
    fn exact_solution_starts_at_initial_profile() {
        let xs: Vec<f64> = (0..=50).map(|i| -0.5 + i as f64 / 50.0).collect();
        let u = exact_solution(&xs, 0.0, 8);
        for (&x, &v) in xs.iter().zip(&u) {
            assert!((v - gaussian(x)).abs() < 1e-13);
        }
    }

    #[test]
    fn neumann_preserves_constants() {
        let op = small_op(2, 40);
        let ones = DVector::from_element(41, 1.0);
        let a = apply_neumann(&op, &ones);
        assert!(a.amax() < 1e-10, "constant should be in the kernel: {}", a.amax());
    }

    #[test]
    fn spectral_evolution_is_time_reversible() {
        let op = small_op(2, 60);
        let w = wave_operator(&op);
        let u0: Vec<f64> = w.xs.iter().map(|&x| gaussian(x)).collect();
        // cos(omega t) evolution is even in t
        let fwd = w.evolve(&u0, 0.37);
        let bwd = w.evolve(&u0, -0.37);
        for (a, b) in fwd.iter().zip(&bwd) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn wave_error_small_before_boundary_contact() {
        // At t = 0.2 the pulse is far from the walls; even a modest grid
        // resolves it to high accuracy.
        let op = small_op(2, 100);
        let w = wave_operator(&op);
        let err = w.gaussian_error(0.2);
        assert!(err < 5e-3, "t=0.2 error {err}");
    }

    #[test]
    fn leapfrog_matches_spectral_at_small_cfl() {
        let op = small_op(2, 60);
        let w = wave_operator(&op);
        let u0: Vec<f64> = w.xs.iter().map(|&x| gaussian(x)).collect();
        let t = 0.25;
        let run = simulate_leapfrog(&op, &u0, t, 0.02, &[t], true);
        let spectral_err = w.gaussian_error(t);
        let (_, leap_err) = run.samples[0];
        // both approximate the same exact solution; the time error at
        // cfl = 0.02 is far below the spatial error
        assert!(
            (leap_err - spectral_err).abs() < 2e-4 + 0.2 * spectral_err,
            "leapfrog {leap_err} vs spectral {spectral_err}"
        );
    }

    #[test]
    fn fit_order_recovers_synthetic_slope() {
        let pairs: Vec<(f64, f64)> = [0.01, 0.02, 0.04]
            .iter()
            .map(|&h: &f64| (h, 3.0 * h.powf(4.0)))
            .collect();
        assert!((fit_order(&pairs) - 4.0).abs() < 1e-10);
    }
}
