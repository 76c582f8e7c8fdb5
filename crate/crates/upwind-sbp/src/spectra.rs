//! Spectral quantities governing the explicit time step.
//!
//! lambda_int: the largest modulus of the interior-stencil symbol
//! sum_j beta_j exp(i j theta) over theta in [0, 2pi), for unit spacing.
//! The time-step bound away from boundaries is dt <= 2 h / lambda_int.
//!
//! lambda_full: the largest singular value of the similarity-symmetrized
//! operator B = H^(1/2) D+ H^(-1/2); the global bound is dt <= 2 / lambda_full
//! (for the scaled operator). Shifted closures inflate lambda_full, and the
//! ratio lambda_int / lambda_full measures the Courant-number loss.

use crate::operators::OperatorSet;
use crate::stencil::InteriorStencil;
use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

fn symbol_cache() -> &'static Mutex<HashMap<usize, f64>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, f64>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// max_theta |sum_j beta_j e^(i j theta)| for the unit-spacing stencil:
/// dense sampling followed by parabolic refinement of the peak.
pub fn interior_symbol_max(stencil: &InteriorStencil) -> f64 {
    if let Some(v) = symbol_cache().lock().unwrap().get(&stencil.p()) {
        return *v;
    }
    let beta = stencil.forward_f64();
    let offs = stencil.offsets();
    let modulus_sq = |theta: f64| -> f64 {
        let mut re = 0.0;
        let mut im = 0.0;
        for (&j, &b) in offs.iter().zip(&beta) {
            let (s, c) = (j as f64 * theta).sin_cos();
            re += b * c;
            im += b * s;
        }
        re * re + im * im
    };
    let samples = 400_000usize;
    let step = std::f64::consts::TAU / samples as f64;
    let mut best_k = 0usize;
    let mut best = 0.0f64;
    for k in 0..samples {
        let v = modulus_sq(k as f64 * step);
        if v > best {
            best = v;
            best_k = k;
        }
    }
    // three-point parabolic refinement, iterated on a shrinking bracket
    let mut center = best_k as f64 * step;
    let mut width = step;
    for _ in 0..40 {
        let (fl, fc, fr) = (
            modulus_sq(center - width),
            modulus_sq(center),
            modulus_sq(center + width),
        );
        let denom = fl - 2.0 * fc + fr;
        if denom.abs() > 0.0 {
            let delta = 0.5 * (fl - fr) / denom;
            center += delta.clamp(-1.0, 1.0) * width;
        }
        width *= 0.5;
        best = best.max(modulus_sq(center));
    }
    let result = best.sqrt();
    symbol_cache().lock().unwrap().insert(stencil.p(), result);
    result
}

/// Largest singular value of H^(1/2) D+ H^(-1/2) for the assembled (scaled)
/// operator, from the symmetric eigenproblem of B^T B.
pub fn operator_norm(op: &OperatorSet) -> f64 {
    let n = op.n_cells();
    let s: Vec<f64> = (0..=n).map(|i| op.norm()[i].sqrt()).collect();
    let mut b = op.dplus().clone();
    for i in 0..=n {
        for j in 0..=n {
            b[(i, j)] *= s[i] / s[j];
        }
    }
    let g = b.transpose() * &b;
    let g = (&g + g.transpose()) * 0.5;
    let eigen = g.symmetric_eigenvalues();
    eigen.iter().fold(0.0f64, |acc, &v| acc.max(v)).max(0.0).sqrt()
}

#[derive(Clone, Copy, Debug)]
pub struct SpectralReport {
    /// Interior symbol maximum divided by the grid spacing.
    pub lambda_int: f64,
    /// Largest singular value of the symmetrized full operator.
    pub lambda_full: f64,
    /// lambda_int / lambda_full: Courant-number reduction caused by the
    /// boundary closure (1 would mean no loss).
    pub ratio: f64,
    /// 2 h / lambda_int: the away-from-boundary Courant bound in units of h.
    pub interior_courant: f64,
}

pub fn spectral_report(op: &OperatorSet) -> SpectralReport {
    let stencil = InteriorStencil::new(op.p());
    let sym = interior_symbol_max(&stencil);
    let lambda_int = sym / op.h();
    let lambda_full = operator_norm(op);
    SpectralReport {
        lambda_int,
        lambda_full,
        ratio: lambda_int / lambda_full,
        interior_courant: 2.0 / sym,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::boundary_family;
    use crate::grid::{Grid, GridMode, ShiftParams};
    use crate::operators::assemble;

    #[test]
    fn symbol_max_second_order() {
        // p=1: beta = (-3/2, 2, -1/2) on offsets (0,1,2); at theta = pi the
        // symbol is -3/2 - 2 - 1/2 = -4, and that is the maximum.
        let st = InteriorStencil::new(1);
        let m = interior_symbol_max(&st);
        assert!((m - 4.0).abs() < 1e-9, "{m}");
    }

    #[test]
    fn symbol_max_fourth_order() {
        // p=2 gives 8/3: the interior Courant number 2/(8/3) = 0.75.
        let st = InteriorStencil::new(2);
        let m = interior_symbol_max(&st);
        assert!((m - 8.0 / 3.0).abs() < 1e-9, "{m}");
        assert!((2.0 / m - 0.75).abs() < 1e-9);
    }

    #[test]
    fn operator_norm_bounds_spectrum() {
        let st = InteriorStencil::new(2);
        let sp = ShiftParams::from_strings(&["0.64701892044823239"]).unwrap();
        let fam = boundary_family(&st, &sp).unwrap();
        let grid = Grid::new(2, sp, 40, GridMode::Scaled).unwrap();
        let op = assemble(&st, &grid, &fam.mu, &fam.e_matrix(&vec![0.0; fam.dim()])).unwrap();
        let rep = spectral_report(&op);
        // the closure can only inflate the norm: ratio in (0, 1]
        assert!(rep.ratio > 0.0 && rep.ratio <= 1.0 + 1e-12, "ratio {}", rep.ratio);
        assert!(rep.lambda_full >= rep.lambda_int * 0.99);
        // unit-interval scaling: lambda_int = symbol / h
        assert!((rep.interior_courant - 0.75).abs() < 1e-9);
    }

    #[test]
    fn ratio_is_grid_size_stable() {
        let st = InteriorStencil::new(2);
        let fam = boundary_family(&st, &ShiftParams::none()).unwrap();
        let mut ratios = Vec::new();
        for n in [40usize, 80] {
            let grid = Grid::new(2, ShiftParams::none(), n, GridMode::Scaled).unwrap();
            let op = assemble(&st, &grid, &fam.mu, &fam.e_matrix(&vec![0.0; fam.dim()])).unwrap();
            ratios.push(spectral_report(&op).ratio);
        }
        assert!(
            (ratios[0] - ratios[1]).abs() < 5e-3,
            "boundary-driven ratio should not drift with N: {ratios:?}"
        );
    }
}
