//! Assembly of the full derivative pair on a grid, verification of the
//! summation-by-parts identity, and the JSON exchange format.
//!
//! Layout of D+ (D- mirrors it):
//!   rows 0..2p-1        left closure: e(c)/mu over columns 0..2p-1, then the
//!                       interior-stencil spill-over block over columns 2p..3p
//!   rows 2p..N-2p       pure interior stencil
//!   rows N-2p+1..N      right closure, the point reflection of the left one:
//!                       D+[N-i, N-j] = -D-[i, j]
//!
//! The reflection is exact in floating point (negation only), so the two ends
//! satisfy the same accuracy and coupling relations by construction.

use crate::error::{Error, Result};
use crate::grid::{Grid, GridMode, ShiftParams};
use crate::stencil::InteriorStencil;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug)]
pub struct OperatorSet {
    grid: Grid,
    mu: Vec<f64>,
    norm: DVector<f64>,
    dplus: DMatrix<f64>,
    dminus: DMatrix<f64>,
}

impl OperatorSet {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn order(&self) -> usize {
        self.grid.order()
    }

    pub fn p(&self) -> usize {
        self.grid.p()
    }

    pub fn shift_count(&self) -> usize {
        self.grid.shift_count()
    }

    pub fn n_cells(&self) -> usize {
        self.grid.n_cells()
    }

    pub fn h(&self) -> f64 {
        self.grid.h()
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    /// Diagonal of the norm matrix H (already scaled by h).
    pub fn norm(&self) -> &DVector<f64> {
        &self.norm
    }

    pub fn dplus(&self) -> &DMatrix<f64> {
        &self.dplus
    }

    pub fn dminus(&self) -> &DMatrix<f64> {
        &self.dminus
    }

    /// Recover the free-parameter block: e_{i,j} = mu_{i+1} * D+[i,j] for
    /// i, j < 2p. Inverse of the assembly, used to rebuild on another grid.
    pub fn corner_e(&self) -> DMatrix<f64> {
        let n2 = 2 * self.p();
        DMatrix::from_fn(n2, n2, |i, j| self.dplus[(i, j)] * self.mu[i] * self.h())
    }

    /// Reassemble the same closure on a grid with a different cell count.
    pub fn rebuild(&self, n_cells: usize, mode: GridMode) -> Result<OperatorSet> {
        let stencil = InteriorStencil::new(self.p());
        let grid = Grid::new(self.p(), self.grid.shifts().clone(), n_cells, mode)?;
        assemble(&stencil, &grid, &self.mu, &self.corner_e())
    }
}

/// Assemble D+, D-, H from a closure block e and norm weights mu.
pub fn assemble(
    stencil: &InteriorStencil,
    grid: &Grid,
    mu: &[f64],
    e: &DMatrix<f64>,
) -> Result<OperatorSet> {
    let p = stencil.p();
    let n2 = 2 * p;
    assert_eq!(mu.len(), n2, "need 2p norm weights");
    assert_eq!((e.nrows(), e.ncols()), (n2, n2), "closure block is 2p x 2p");
    for (i, &v) in mu.iter().enumerate() {
        if v <= 0.0 {
            return Err(Error::NonPositiveNorm { index: i + 1, value: v });
        }
    }
    let n = grid.n_cells();
    let h = grid.h();
    let beta = stencil.forward_f64();
    let offsets = stencil.offsets();
    let beta_at = |off: i64| beta[(off + p as i64 - 1) as usize];
    let mut dplus = DMatrix::<f64>::zeros(n + 1, n + 1);
    let mut dminus = DMatrix::<f64>::zeros(n + 1, n + 1);
    // interior rows
    for i in n2..=(n - n2) {
        for (&off, &b) in offsets.iter().zip(&beta) {
            dplus[(i, (i as i64 + off) as usize)] = b;
            dminus[(i, (i as i64 - off) as usize)] = -b;
        }
    }
    // left closure rows over columns 0..3p
    let wide = 3 * p + 1;
    let mut lp = DMatrix::<f64>::zeros(n2, wide);
    let mut lm = DMatrix::<f64>::zeros(n2, wide);
    for i in 0..n2 {
        for j in 0..n2 {
            lp[(i, j)] = e[(i, j)] / mu[i];
            let q = if i == 0 && j == 0 { -1.0 } else { 0.0 };
            lm[(i, j)] = (q - e[(j, i)]) / mu[i];
        }
        for c in n2..=(i + p + 1).min(3 * p) {
            lp[(i, c)] = beta_at(c as i64 - i as i64) / mu[i];
        }
        if i + p >= n2 + 1 {
            for c in n2..=(i + p - 1) {
                lm[(i, c)] = -beta_at(i as i64 - c as i64) / mu[i];
            }
        }
    }
    for i in 0..n2 {
        for j in 0..wide {
            dplus[(i, j)] = lp[(i, j)];
            dminus[(i, j)] = lm[(i, j)];
            // right closure by point reflection
            dplus[(n - i, n - j)] = -lm[(i, j)];
            dminus[(n - i, n - j)] = -lp[(i, j)];
        }
    }
    let inv_h = 1.0 / h;
    dplus *= inv_h;
    dminus *= inv_h;
    let mut norm = DVector::from_element(n + 1, h);
    for i in 0..n2 {
        norm[i] = mu[i] * h;
        norm[n - i] = mu[i] * h;
    }
    Ok(OperatorSet { grid: grid.clone(), mu: mu.to_vec(), norm, dplus, dminus })
}

/// The interior-stencil spill-over block of a left closure: rows 0..2p-1,
/// columns 2p..3p, entries beta_{c-i}/mu_{i+1} where the forward stencil of
/// row i reaches column c.
pub fn closure_coupling_block(stencil: &InteriorStencil, mu: &[f64]) -> DMatrix<f64> {
    let p = stencil.p();
    let n2 = 2 * p;
    let beta = stencil.forward_f64();
    let beta_at = |off: i64| beta[(off + p as i64 - 1) as usize];
    let mut block = DMatrix::<f64>::zeros(n2, p + 1);
    for i in 0..n2 {
        for c in n2..=(i + p + 1).min(3 * p) {
            block[(i, c - n2)] = beta_at(c as i64 - i as i64) / mu[i];
        }
    }
    block
}

#[derive(Clone, Copy, Debug)]
pub struct SbpReport {
    /// max |(D+)^T H + H D- - Q| over all entries.
    pub identity_residual: f64,
    /// Bound the identity residual is held to: 1e-10 / h.
    pub identity_bound: f64,
    /// max |(u, D+ v)_H + (D- u, v)_H - (u_N v_N - u_0 v_0)| over sampled u, v.
    pub bilinear_residual: f64,
}

impl SbpReport {
    pub fn ok(&self) -> bool {
        self.identity_residual <= self.identity_bound
    }
}

/// Check the summation-by-parts identity two ways: entrywise on the matrix
/// (D+)^T H + H D- = diag(-1, 0, ..., 0, 1) and weakly on pseudorandom vector
/// pairs (the discrete integration-by-parts statement users actually rely on).
pub fn verify_sbp(op: &OperatorSet) -> SbpReport {
    let n = op.n_cells();
    let hd = op.norm();
    let mut r = op.dplus.transpose();
    for j in 0..=n {
        for i in 0..=n {
            r[(i, j)] = r[(i, j)] * hd[j] + hd[i] * op.dminus[(i, j)];
        }
    }
    r[(0, 0)] += 1.0;
    r[(n, n)] -= 1.0;
    let identity_residual = r.amax();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5B91DD);
    let mut bilinear_residual = 0.0f64;
    for _ in 0..20 {
        let u = DVector::from_fn(n + 1, |_, _| rng.gen_range(-1.0..1.0));
        let v = DVector::from_fn(n + 1, |_, _| rng.gen_range(-1.0..1.0));
        let dv = &op.dplus * &v;
        let du = &op.dminus * &u;
        let mut acc = 0.0;
        for i in 0..=n {
            acc += hd[i] * (u[i] * dv[i] + du[i] * v[i]);
        }
        acc -= u[n] * v[n] - u[0] * v[0];
        bilinear_residual = bilinear_residual.max(acc.abs());
    }
    SbpReport {
        identity_residual,
        identity_bound: 1e-10 / op.h(),
        bilinear_residual,
    }
}

#[derive(Clone, Debug)]
pub struct AccuracyReport {
    /// residuals[n] = max over rows of |D+ x^n - n x^(n-1)| (and D- alike),
    /// for n = 0..=p over the whole grid.
    pub residuals: Vec<f64>,
}

/// Monomial exactness through degree p on every row (interior rows are exact
/// through 2p, checked separately by the stencil moments).
pub fn verify_boundary_order(op: &OperatorSet) -> AccuracyReport {
    let p = op.p();
    let xs = op.grid().nodes();
    let n = op.n_cells();
    let mut residuals = Vec::with_capacity(p + 1);
    for deg in 0..=p as i32 {
        let f = DVector::from_fn(n + 1, |i, _| xs[i].powi(deg));
        let fp = DVector::from_fn(n + 1, |i, _| {
            if deg == 0 { 0.0 } else { deg as f64 * xs[i].powi(deg - 1) }
        });
        let rp = (&op.dplus * &f) - &fp;
        let rm = (&op.dminus * &f) - &fp;
        residuals.push(rp.amax().max(rm.amax()));
    }
    AccuracyReport { residuals }
}

/// max |P D+ P + D-| where P is the index reversal; zero when the right
/// closure is the exact point reflection of the left one.
pub fn reflection_residual(op: &OperatorSet) -> f64 {
    let n = op.n_cells();
    let mut worst = 0.0f64;
    for i in 0..=n {
        for j in 0..=n {
            let v = op.dplus[(n - i, n - j)] + op.dminus[(i, j)];
            worst = worst.max(v.abs());
        }
    }
    worst
}

/// JSON schema for an operator set. Shift spacings keep their source decimal
/// strings; all other numbers are shortest round-tripping decimals, so
/// parse -> serialize is byte-identical.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct OperatorSetJson {
    pub p: usize,
    pub K: usize,
    pub N: usize,
    pub mode: GridMode,
    pub h_params: Vec<String>,
    pub mu: Vec<f64>,
    pub dplus_rows: Vec<SparseRow>,
    pub dminus_rows: Vec<SparseRow>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SparseRow {
    pub row: usize,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
}

fn to_sparse_rows(m: &DMatrix<f64>) -> Vec<SparseRow> {
    (0..m.nrows())
        .map(|r| {
            let mut cols = Vec::new();
            let mut vals = Vec::new();
            for c in 0..m.ncols() {
                if m[(r, c)] != 0.0 {
                    cols.push(c);
                    vals.push(m[(r, c)]);
                }
            }
            SparseRow { row: r, cols, vals }
        })
        .collect()
}

impl OperatorSet {
    pub fn to_json(&self) -> OperatorSetJson {
        OperatorSetJson {
            p: self.p(),
            K: self.shift_count(),
            N: self.n_cells(),
            mode: self.grid.mode(),
            h_params: self.grid.shifts().strings().to_vec(),
            mu: self.mu.clone(),
            dplus_rows: to_sparse_rows(&self.dplus),
            dminus_rows: to_sparse_rows(&self.dminus),
        }
    }

    pub fn from_json(json: &OperatorSetJson) -> Result<OperatorSet> {
        let shifts = if json.h_params.is_empty() {
            ShiftParams::none()
        } else {
            ShiftParams::from_strings(&json.h_params)?
        };
        let grid = Grid::new(json.p, shifts, json.N, json.mode)?;
        if json.mu.len() != 2 * json.p {
            return Err(Error::InvalidParameter(format!(
                "expected {} norm weights, found {}",
                2 * json.p,
                json.mu.len()
            )));
        }
        let mut dplus = DMatrix::<f64>::zeros(json.N + 1, json.N + 1);
        let mut dminus = DMatrix::<f64>::zeros(json.N + 1, json.N + 1);
        for (target, rows) in [(&mut dplus, &json.dplus_rows), (&mut dminus, &json.dminus_rows)] {
            for row in rows.iter() {
                if row.cols.len() != row.vals.len() || row.row > json.N {
                    return Err(Error::InvalidParameter("malformed sparse row".into()));
                }
                for (&c, &v) in row.cols.iter().zip(&row.vals) {
                    target[(row.row, c)] = v;
                }
            }
        }
        let h = grid.h();
        let mut norm = DVector::from_element(json.N + 1, h);
        for i in 0..2 * json.p {
            norm[i] = json.mu[i] * h;
            norm[json.N - i] = json.mu[i] * h;
        }
        Ok(OperatorSet { grid, mu: json.mu.clone(), norm, dplus, dminus })
    }

    pub fn write_json(&self, w: impl std::io::Write) -> Result<()> {
        serde_json::to_writer(w, &self.to_json())?;
        Ok(())
    }

    pub fn read_json(r: impl std::io::Read) -> Result<OperatorSet> {
        let json: OperatorSetJson = serde_json::from_reader(r)?;
        OperatorSet::from_json(&json)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::boundary_family;

    fn build(p: usize, shifts: &[&str], n: usize, mode: GridMode) -> OperatorSet {
        let st = InteriorStencil::new(p);
        let sp = if shifts.is_empty() {
            ShiftParams::none()
        } else {
            ShiftParams::from_strings(shifts).unwrap()
        };
        let fam = boundary_family(&st, &sp).unwrap();
        let grid = Grid::new(p, sp, n, mode).unwrap();
        let c = vec![0.0; fam.dim()];
        assemble(&st, &grid, &fam.mu, &fam.e_matrix(&c)).unwrap()
    }

    #[test]
    fn sbp_identity_uniform_p2() {
        let op = build(2, &[], 24, GridMode::Unit);
        let rep = verify_sbp(&op);
        assert!(rep.identity_residual < 1e-13, "{}", rep.identity_residual);
        assert!(rep.bilinear_residual < 1e-11, "{}", rep.bilinear_residual);
    }

    #[test]
    fn sbp_identity_shifted_scaled_p3() {
        let op = build(3, &["0.52989554067209088", "0.9577049256058392"], 40, GridMode::Scaled);
        let rep = verify_sbp(&op);
        assert!(rep.ok(), "residual {} bound {}", rep.identity_residual, rep.identity_bound);
    }

    #[test]
    fn right_closure_is_exact_reflection() {
        let op = build(2, &["0.64701892044823239"], 20, GridMode::Unit);
        assert_eq!(reflection_residual(&op), 0.0);
    }

    #[test]
    fn monomials_differentiated_through_p() {
        let op = build(3, &["0.55959440808516225"], 30, GridMode::Scaled);
        let rep = verify_boundary_order(&op);
        for (n, r) in rep.residuals.iter().enumerate() {
            assert!(*r < 1e-8, "degree {n}: residual {r}");
        }
    }

    #[test]
    fn second_derivative_norm_product_is_symmetric() {
        // H (D- D+) - Q D+ must be symmetric: with (D+)^T H + H D- = Q,
        // H D- D+ - Q D+ = -(D+)^T H D+.
        let op = build(2, &["0.64701892044823239"], 20, GridMode::Unit);
        let n = op.n_cells();
        let mut m = op.dminus() * op.dplus();
        for i in 0..=n {
            for j in 0..=n {
                m[(i, j)] *= op.norm()[i];
            }
        }
        for j in 0..=n {
            m[(0, j)] += op.dplus()[(0, j)];
            m[(n, j)] -= op.dplus()[(n, j)];
        }
        let asym = (&m - m.transpose()).amax();
        assert!(asym < 1e-9, "asymmetry {asym}");
    }

    #[test]
    fn coupling_block_matches_assembled_matrix_at_minimal_size() {
        // The smallest legal grid, N+1 = 4p+2, still keeps the left closure
        // rows clear of the reflected right closure.
        for (p, shifts) in [(2usize, vec![]), (3, vec!["0.55959440808516225"])] {
            let st = InteriorStencil::new(p);
            let sp = if shifts.is_empty() {
                ShiftParams::none()
            } else {
                ShiftParams::from_strings(&shifts).unwrap()
            };
            let fam = boundary_family(&st, &sp).unwrap();
            let grid = Grid::new(p, sp, 4 * p + 1, GridMode::Unit).unwrap();
            let op = assemble(&st, &grid, &fam.mu, &fam.e_matrix(&vec![0.0; fam.dim()])).unwrap();
            let block = closure_coupling_block(&st, &fam.mu);
            for i in 0..2 * p {
                for c in 0..=p {
                    assert_eq!(block[(i, c)], op.dplus()[(i, 2 * p + c)], "p={p} i={i} c={c}");
                }
            }
        }
    }

    #[test]
    fn json_round_trip_is_byte_identical() {
        let op = build(2, &["0.64701892044823239"], 20, GridMode::Scaled);
        let s1 = serde_json::to_string(&op.to_json()).unwrap();
        let parsed: OperatorSetJson = serde_json::from_str(&s1).unwrap();
        let back = OperatorSet::from_json(&parsed).unwrap();
        let s2 = serde_json::to_string(&back.to_json()).unwrap();
        assert_eq!(s1, s2);
        assert_eq!(op.dplus(), back.dplus());
        assert_eq!(op.norm(), back.norm());
    }

    #[test]
    fn rebuild_preserves_closure() {
        let op = build(2, &["0.64701892044823239"], 20, GridMode::Scaled);
        let big = op.rebuild(40, GridMode::Scaled).unwrap();
        assert_eq!(big.n_cells(), 40);
        let rep = verify_sbp(&big);
        assert!(rep.ok());
        // corner entries agree after undoing the 1/h scaling
        for i in 0..4 {
            for j in 0..4 {
                let a = op.dplus()[(i, j)] * op.h();
                let b = big.dplus()[(i, j)] * big.h();
                assert!((a - b).abs() < 1e-12);
            }
        }
    }
}
