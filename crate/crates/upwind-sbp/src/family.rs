//! Boundary closure family.
//!
//! The 2p x 2p left corner block of D+ and the 2p norm weights mu are coupled
//! through one joint linear system: each corner row of D+ and of D- must
//! differentiate monomials x^n, n = 0..=p, exactly, while the two corners are
//! tied together by the summation-by-parts relation. Writing e_{i,j} =
//! mu_{i+1} d_{i,j} makes every equation linear in (e, mu) jointly:
//!
//!   rows for D+:  sum_j e_{i,j} x_j^n - n x_i^(n-1) mu_{i+1} = -sum_c beta_{c-i} x_c^n
//!   rows for D-:  sum_j e_{j,i} x_j^n + n x_i^(n-1) mu_{i+1} = -[i=0][n=0] - sum_c beta_{i-c} x_c^n
//!
//! with c running over the interior-stencil columns that poke into the
//! closure. Full-pivot elimination over the e-columns splits the system into
//! a triangular part (defining e from mu) and a residual block DS that
//! involves mu alone. DS has full column rank 2p, its least-squares solution
//! is exact, and (p-1)^2 e-columns stay free; those are the family parameters.

use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::grid::ShiftParams;
use crate::stencil::InteriorStencil;
use nalgebra::DMatrix;

/// Joint accuracy system in extended precision. Unknown layout: the 4p^2
/// entries e_{i,j} in row-major order, then mu_1..mu_2p.
pub struct AccuracySystem {
    pub p: usize,
    /// Exactness degree; the construction uses p, larger values are only for
    /// demonstrating that the system becomes insoluble.
    pub accuracy: usize,
    pub rows: Vec<Vec<Dd>>,
    pub rhs: Vec<Dd>,
}

impl AccuracySystem {
    pub fn e_unknowns(&self) -> usize {
        4 * self.p * self.p
    }

    pub fn mu_unknowns(&self) -> usize {
        2 * self.p
    }
}

fn monomial(x: Dd, n: i64) -> Dd {
    if n < 0 {
        Dd::ZERO
    } else {
        x.powi(n as u32)
    }
}

/// Left-closure node positions x_0..x_count in units of the interior spacing.
fn unit_nodes(shifts: &ShiftParams, count: usize) -> Vec<Dd> {
    let mut xs = Vec::with_capacity(count);
    let mut acc = Dd::ZERO;
    xs.push(acc);
    for i in 1..count {
        let step = shifts.values().get(i - 1).copied().unwrap_or(Dd::ONE);
        acc = acc + step;
        xs.push(acc);
    }
    xs
}

pub fn build_accuracy_system(
    stencil: &InteriorStencil,
    shifts: &ShiftParams,
    accuracy: usize,
) -> AccuracySystem {
    let p = stencil.p();
    let n2 = 2 * p;
    let ne = 4 * p * p;
    let beta = stencil.forward_dd();
    let beta_at = |off: i64| -> Dd {
        // offsets run -p+1 ..= p+1
        beta[(off + p as i64 - 1) as usize]
    };
    let xs = unit_nodes(shifts, 3 * p + 1);
    let mut rows = Vec::with_capacity(2 * n2 * (accuracy + 1));
    let mut rhs = Vec::with_capacity(rows.capacity());
    // D+ corner rows
    for i in 0..n2 {
        for n in 0..=accuracy as i64 {
            let mut row = vec![Dd::ZERO; ne + n2];
            for j in 0..n2 {
                row[i * n2 + j] = monomial(xs[j], n);
            }
            row[ne + i] = -Dd::from_i128(n as i128) * monomial(xs[i], n - 1);
            let mut r = Dd::ZERO;
            let c_hi = (i + p + 1).min(3 * p);
            for c in n2..=c_hi {
                r = r - beta_at(c as i64 - i as i64) * monomial(xs[c], n);
            }
            rows.push(row);
            rhs.push(r);
        }
    }
    // D- corner rows (transposed e indexing, opposite mu sign)
    for i in 0..n2 {
        for n in 0..=accuracy as i64 {
            let mut row = vec![Dd::ZERO; ne + n2];
            for j in 0..n2 {
                row[j * n2 + i] = monomial(xs[j], n);
            }
            row[ne + i] = Dd::from_i128(n as i128) * monomial(xs[i], n - 1);
            let mut r = Dd::ZERO;
            if i == 0 && n == 0 {
                r = r - Dd::ONE;
            }
            if i + p >= n2 + 1 {
                for c in n2..=(i + p - 1) {
                    r = r - beta_at(i as i64 - c as i64) * monomial(xs[c], n);
                }
            }
            rows.push(row);
            rhs.push(r);
        }
    }
    AccuracySystem { p, accuracy, rows, rhs }
}

/// Result of full-pivot elimination over the e-columns.
pub struct Triangularized {
    pub p: usize,
    pub pivots: Vec<(usize, usize)>,
    pub rows: Vec<Vec<Dd>>,
    pub rhs: Vec<Dd>,
    pub used_row: Vec<bool>,
    pub used_col: Vec<bool>,
}

impl Triangularized {
    pub fn e_rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn ds_row_indices(&self) -> Vec<usize> {
        (0..self.rows.len()).filter(|&r| !self.used_row[r]).collect()
    }
}

/// Gaussian elimination with full pivoting restricted to the e-columns.
/// Stops when every remaining entry is below a relative threshold; the rows
/// never chosen are the DS block, the columns never chosen are the free
/// family parameters.
pub fn triangularize(sys: &AccuracySystem) -> Triangularized {
    let ne = sys.e_unknowns();
    let ncols = ne + sys.mu_unknowns();
    let m = sys.rows.len();
    let mut rows = sys.rows.clone();
    let mut rhs = sys.rhs.clone();
    let mut used_row = vec![false; m];
    let mut used_col = vec![false; ne];
    let mut pivots = Vec::new();
    let mut max_abs = 0.0f64;
    for row in &rows {
        for v in &row[..ne] {
            max_abs = max_abs.max(v.abs().to_f64());
        }
    }
    // True pivots stay O(1)-ish while eliminated residue sits near the Dd
    // rounding floor; anything in between would be a modeling bug, caught by
    // the rank assertions downstream.
    let threshold = max_abs * 1e-20;
    for _ in 0..ne {
        let (mut best, mut br, mut bc) = (0.0f64, usize::MAX, usize::MAX);
        for r in 0..m {
            if used_row[r] {
                continue;
            }
            for c in 0..ne {
                if used_col[c] {
                    continue;
                }
                let v = rows[r][c].abs().to_f64();
                if v > best {
                    best = v;
                    br = r;
                    bc = c;
                }
            }
        }
        if best < threshold {
            break;
        }
        used_row[br] = true;
        used_col[bc] = true;
        pivots.push((br, bc));
        let piv_row = rows[br].clone();
        let piv_rhs = rhs[br];
        let piv_val = piv_row[bc];
        for r in 0..m {
            if r == br || rows[r][bc].is_zero() {
                continue;
            }
            let f = rows[r][bc] / piv_val;
            for c in 0..ncols {
                rows[r][c] = rows[r][c] - f * piv_row[c];
            }
            rhs[r] = rhs[r] - f * piv_rhs;
        }
    }
    Triangularized { p: sys.p, pivots, rows, rhs, used_row, used_col }
}

/// The norm-weight subsystem and its solution.
pub struct DsSolution {
    pub p: usize,
    pub mu_dd: Vec<Dd>,
    pub mu: Vec<f64>,
    pub ds_rows: usize,
    pub e_rank: usize,
    /// max |DS mu - rhs| over the DS rows.
    pub residual: f64,
}

impl DsSolution {
    pub fn mu_positive(&self) -> bool {
        self.mu.iter().all(|&v| v > 0.0)
    }
}

/// Solve the DS block in the least-squares sense via normal equations in
/// extended precision. With rank 2p the least-squares solution is the exact
/// one, which the residual check confirms.
pub fn solve_ds(tri: &Triangularized) -> Result<DsSolution> {
    let p = tri.p;
    let n2 = 2 * p;
    let ne = 4 * p * p;
    let ds_idx = tri.ds_row_indices();
    let nds = ds_idx.len();
    let ds: Vec<&[Dd]> = ds_idx.iter().map(|&r| &tri.rows[r][ne..ne + n2]).collect();
    let b: Vec<Dd> = ds_idx.iter().map(|&r| tri.rhs[r]).collect();
    // normal equations M mu = y
    let mut m = vec![vec![Dd::ZERO; n2]; n2];
    let mut y = vec![Dd::ZERO; n2];
    for r in 0..nds {
        for i in 0..n2 {
            for j in 0..n2 {
                m[i][j] = m[i][j] + ds[r][i] * ds[r][j];
            }
            y[i] = y[i] + ds[r][i] * b[r];
        }
    }
    let mu_dd = solve_dense_dd(&mut m, &mut y).ok_or(Error::RankDeficient {
        expected: n2,
        got: 0,
    })?;
    let mut residual = 0.0f64;
    for r in 0..nds {
        let mut acc = -b[r];
        for i in 0..n2 {
            acc = acc + ds[r][i] * mu_dd[i];
        }
        residual = residual.max(acc.abs().to_f64());
    }
    let mu: Vec<f64> = mu_dd.iter().map(|v| v.to_f64()).collect();
    Ok(DsSolution { p, mu_dd, mu, ds_rows: nds, e_rank: tri.e_rank(), residual })
}

/// In-place Gaussian elimination with partial pivoting; None on a zero pivot.
fn solve_dense_dd(a: &mut [Vec<Dd>], b: &mut [Dd]) -> Option<Vec<Dd>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&r, &s| {
            a[r][col].abs().to_f64().total_cmp(&a[s][col].abs().to_f64())
        })?;
        if a[piv][col].abs().to_f64() == 0.0 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] = a[r][c] - f * a[col][c];
            }
            b[r] = b[r] - f * b[col];
        }
    }
    Some((0..n).map(|r| b[r] / a[r][r]).collect())
}

/// Affine family of admissible boundary closures: e(c) = e_part + sum c_k e_null_k,
/// all satisfying accuracy and the summation-by-parts coupling for the solved mu.
#[derive(Clone)]
pub struct BoundaryFamily {
    pub p: usize,
    pub mu_dd: Vec<Dd>,
    pub mu: Vec<f64>,
    pub e_part: DMatrix<f64>,
    pub e_null: Vec<DMatrix<f64>>,
    pub ds_rows: usize,
    pub e_rank: usize,
    pub ds_residual: f64,
}

impl BoundaryFamily {
    pub fn dim(&self) -> usize {
        self.e_null.len()
    }

    /// e(c) for a parameter vector of length dim().
    pub fn e_matrix(&self, c: &[f64]) -> DMatrix<f64> {
        assert_eq!(c.len(), self.e_null.len(), "parameter count");
        let mut e = self.e_part.clone();
        for (ck, ek) in c.iter().zip(&self.e_null) {
            e += ek * *ck;
        }
        e
    }
}

pub const DS_RESIDUAL_BOUND: f64 = 1e-9;

/// Full closure-family construction for one (p, shifts) pair.
pub fn boundary_family(stencil: &InteriorStencil, shifts: &ShiftParams) -> Result<BoundaryFamily> {
    let p = stencil.p();
    let n2 = 2 * p;
    let ne = 4 * p * p;
    let expected_rank = 4 * p * p - (p - 1) * (p - 1);
    let sys = build_accuracy_system(stencil, shifts, p);
    let tri = triangularize(&sys);
    if tri.e_rank() != expected_rank {
        return Err(Error::RankDeficient { expected: expected_rank, got: tri.e_rank() });
    }
    let ds = solve_ds(&tri)?;
    if ds.residual > DS_RESIDUAL_BOUND {
        return Err(Error::ResidualTooLarge { residual: ds.residual, bound: DS_RESIDUAL_BOUND });
    }
    for (i, &v) in ds.mu.iter().enumerate() {
        if v <= 0.0 {
            return Err(Error::NonPositiveNorm { index: i + 1, value: v });
        }
    }
    // particular solution: free e-columns pinned to zero
    let mut e_part_v = vec![Dd::ZERO; ne];
    for &(r, c) in &tri.pivots {
        let mut acc = tri.rhs[r];
        for k in 0..n2 {
            acc = acc - tri.rows[r][ne + k] * ds.mu_dd[k];
        }
        e_part_v[c] = acc / tri.rows[r][c];
    }
    // null basis: one vector per free column
    let free_cols: Vec<usize> = (0..ne).filter(|&c| !tri.used_col[c]).collect();
    let mut e_null = Vec::with_capacity(free_cols.len());
    for &fc in &free_cols {
        let mut v = vec![Dd::ZERO; ne];
        v[fc] = Dd::ONE;
        for &(r, c) in &tri.pivots {
            v[c] = -tri.rows[r][fc] / tri.rows[r][c];
        }
        e_null.push(dd_vec_to_matrix(&v, n2));
    }
    Ok(BoundaryFamily {
        p,
        mu: ds.mu.clone(),
        mu_dd: ds.mu_dd.clone(),
        e_part: dd_vec_to_matrix(&e_part_v, n2),
        e_null,
        ds_rows: ds.ds_rows,
        e_rank: ds.e_rank,
        ds_residual: ds.residual,
    })
}

fn dd_vec_to_matrix(v: &[Dd], n2: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n2, n2, |i, j| v[i * n2 + j].to_f64())
}

/// DS solve without the positivity gate, for probing scheme existence.
pub fn ds_solution(stencil: &InteriorStencil, shifts: &ShiftParams) -> Result<DsSolution> {
    let sys = build_accuracy_system(stencil, shifts, stencil.p());
    solve_ds(&triangularize(&sys))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform(k: usize) -> ShiftParams {
        ShiftParams::from_strings(&vec!["1"; k]).unwrap()
    }

    #[test]
    fn ranks_match_structure_p2() {
        let st = InteriorStencil::new(2);
        let sys = build_accuracy_system(&st, &ShiftParams::none(), 2);
        assert_eq!(sys.rows.len(), 2 * 4 * 3);
        let tri = triangularize(&sys);
        assert_eq!(tri.e_rank(), 4 * 4 - 1);
        assert_eq!(tri.ds_row_indices().len(), 9);
        let ds = solve_ds(&tri).unwrap();
        assert!(ds.residual < 1e-25, "residual {}", ds.residual);
        assert!(ds.mu_positive());
    }

    #[test]
    fn family_dimension_is_p_minus_1_squared() {
        for p in 2..=4usize {
            let st = InteriorStencil::new(p);
            let fam = boundary_family(&st, &uniform(0)).ok();
            if let Some(fam) = fam {
                assert_eq!(fam.dim(), (p - 1) * (p - 1), "p={p}");
                assert_eq!(fam.ds_rows, (p + 1) * (p + 1), "p={p}");
            }
        }
        // shifted grids for the orders whose uniform closure has sign failures
        let st5 = InteriorStencil::new(5);
        let sp = ShiftParams::from_strings(&["0.50900297608285072"]).unwrap();
        let fam = boundary_family(&st5, &sp).unwrap();
        assert_eq!(fam.dim(), 16);
    }

    #[test]
    fn uniform_positivity_pattern() {
        // Positive norm weights on the uniform grid exist for p = 2, 3, 4 only.
        for p in 2..=6usize {
            let st = InteriorStencil::new(p);
            let ds = ds_solution(&st, &ShiftParams::none()).unwrap();
            assert_eq!(ds.mu_positive(), p <= 4, "p={p}: {:?}", ds.mu);
        }
    }

    #[test]
    fn published_shift_restores_positivity_at_p5() {
        let st = InteriorStencil::new(5);
        let sp = ShiftParams::from_strings(&["0.37366515483267776", "0.79308655639992476"]).unwrap();
        let ds = ds_solution(&st, &sp).unwrap();
        assert!(ds.mu_positive());
    }

    #[test]
    fn raising_accuracy_past_p_breaks_solvability() {
        let st = InteriorStencil::new(2);
        let sys = build_accuracy_system(&st, &ShiftParams::none(), 3);
        let tri = triangularize(&sys);
        let ds = solve_ds(&tri).unwrap();
        assert!(
            ds.residual > 1e-6,
            "over-determined system should leave a large residual, got {}",
            ds.residual
        );
    }

    #[test]
    fn null_vectors_satisfy_homogeneous_system() {
        let st = InteriorStencil::new(3);
        let sp = ShiftParams::from_strings(&["0.55959440808516225"]).unwrap();
        let fam = boundary_family(&st, &sp).unwrap();
        let sys = build_accuracy_system(&st, &sp, 3);
        for ek in &fam.e_null {
            for (row, _) in sys.rows.iter().zip(&sys.rhs) {
                let mut acc = 0.0;
                for i in 0..6 {
                    for j in 0..6 {
                        acc += row[i * 6 + j].to_f64() * ek[(i, j)];
                    }
                }
                assert!(acc.abs() < 1e-10, "null vector leaks into rhs: {acc}");
            }
        }
    }

    #[test]
    fn particular_solution_satisfies_full_system() {
        let st = InteriorStencil::new(2);
        let sp = ShiftParams::from_strings(&["0.64701892044823239"]).unwrap();
        let fam = boundary_family(&st, &sp).unwrap();
        let sys = build_accuracy_system(&st, &sp, 2);
        for (row, rhs) in sys.rows.iter().zip(&sys.rhs) {
            let mut acc = -rhs.to_f64();
            for i in 0..4 {
                for j in 0..4 {
                    acc += row[i * 4 + j].to_f64() * fam.e_part[(i, j)];
                }
            }
            for k in 0..4 {
                acc += row[16 + k].to_f64() * fam.mu[k];
            }
            assert!(acc.abs() < 1e-12, "residual {acc}");
        }
    }
}
