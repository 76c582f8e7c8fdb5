//! Interior stencils for the forward/backward first-derivative pair.
//!
//! The forward stencil lives on offsets -p+1 ..= p+1 (one node ahead of
//! center) and is the unique solution of the 2p+1 moment conditions
//! sum_j beta_j j^n = delta_{n,1}, n = 0..2p. The backward stencil is its
//! point reflection, beta^-_j = -beta^+_{-j}, so the pair shares one set of
//! coefficients.

use crate::dd::Dd;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

#[derive(Clone, Debug)]
pub struct InteriorStencil {
    p: usize,
    offsets: Vec<i64>,
    forward: Vec<BigRational>,
}

impl InteriorStencil {
    /// Solve the moment system exactly. Panics only if the Vandermonde matrix
    /// on distinct integer offsets were singular, which it never is.
    pub fn new(p: usize) -> InteriorStencil {
        assert!(p >= 1, "order 2p needs p >= 1");
        let offsets: Vec<i64> = (-(p as i64) + 1..=p as i64 + 1).collect();
        let m = offsets.len();
        let mut a: Vec<Vec<BigRational>> = (0..m)
            .map(|n| {
                offsets
                    .iter()
                    .map(|&j| BigRational::from(BigInt::from(j)).pow(n as i32))
                    .collect()
            })
            .collect();
        let mut b: Vec<BigRational> = (0..m)
            .map(|n| {
                if n == 1 {
                    BigRational::one()
                } else {
                    BigRational::zero()
                }
            })
            .collect();
        for col in 0..m {
            let piv = (col..m)
                .find(|&r| !a[r][col].is_zero())
                .expect("integer Vandermonde is nonsingular");
            a.swap(col, piv);
            b.swap(col, piv);
            for r in 0..m {
                if r != col && !a[r][col].is_zero() {
                    let f = &a[r][col] / &a[col][col];
                    for c in 0..m {
                        let t = &f * &a[col][c];
                        a[r][c] -= t;
                    }
                    let t = &f * &b[col];
                    b[r] -= t;
                }
            }
        }
        let forward: Vec<BigRational> = (0..m).map(|r| &b[r] / &a[r][r]).collect();
        InteriorStencil { p, offsets, forward }
    }

    pub fn p(&self) -> usize {
        self.p
    }

    /// Offsets of the forward stencil, -p+1 ..= p+1.
    pub fn offsets(&self) -> &[i64] {
        &self.offsets
    }

    pub fn forward(&self) -> &[BigRational] {
        &self.forward
    }

    /// Backward coefficients on the mirrored offsets -p-1 ..= p-1, stored in
    /// the order matching `offsets().iter().map(|j| -j).rev()`.
    pub fn backward(&self) -> Vec<BigRational> {
        self.forward.iter().rev().map(|c| -c).collect()
    }

    pub fn forward_f64(&self) -> Vec<f64> {
        self.forward.iter().map(rational_to_f64).collect()
    }

    pub fn forward_dd(&self) -> Vec<Dd> {
        self.forward.iter().map(rational_to_dd).collect()
    }

    /// Residuals of the moment conditions n = 0 ..= through; exact zeros for
    /// n <= 2p by construction, and the n = 2p+1 entry measures the leading
    /// truncation term.
    pub fn moment_residuals(&self, through: usize) -> Vec<BigRational> {
        (0..=through)
            .map(|n| {
                let mut s = BigRational::zero();
                for (&j, c) in self.offsets.iter().zip(&self.forward) {
                    s += c * BigRational::from(BigInt::from(j)).pow(n as i32);
                }
                if n == 1 {
                    s -= BigRational::one();
                }
                s
            })
            .collect()
    }

    /// Largest n such that moments 0..=n all vanish (with the n = 1
    /// normalization); equals 2p for a correct stencil.
    pub fn verify_order(&self) -> usize {
        let mut order = 0;
        for (n, r) in self.moment_residuals(2 * self.p + 2).iter().enumerate() {
            if !r.is_zero() {
                break;
            }
            order = n;
        }
        order
    }
}

fn rational_to_f64(x: &BigRational) -> f64 {
    rational_to_dd(x).to_f64()
}

fn rational_to_dd(x: &BigRational) -> Dd {
    // Stencil numerators/denominators stay far below i128 range for p <= 6.
    let n = x.numer().to_i128().expect("stencil numerator fits i128");
    let d = x.denom().to_i128().expect("stencil denominator fits i128");
    Dd::from_ratio(n, d)
}

/// Signed magnitude of the leading error moment, |sum beta_j j^(2p+1)|/(2p+1)!,
/// useful only for reporting.
pub fn leading_error_constant(st: &InteriorStencil) -> f64 {
    let mr = st.moment_residuals(2 * st.p + 1);
    let mut fact = BigRational::one();
    for k in 1..=(2 * st.p as i64 + 1) {
        fact *= BigRational::from(BigInt::from(k));
    }
    rational_to_f64(&(mr[2 * st.p + 1].abs() / fact))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frac(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn second_order_matches_hand_solution() {
        // p=1: offsets (0,1,2), coefficients (-3/2, 2, -1/2).
        let st = InteriorStencil::new(1);
        assert_eq!(st.offsets(), &[0, 1, 2]);
        assert_eq!(st.forward(), &[frac(-3, 2), frac(2, 1), frac(-1, 2)]);
    }

    #[test]
    fn fourth_order_matches_hand_solution() {
        // p=2: offsets (-1,0,1,2,3), coefficients (-1/4,-5/6,3/2,-1/2,1/12).
        let st = InteriorStencil::new(2);
        assert_eq!(st.offsets(), &[-1, 0, 1, 2, 3]);
        assert_eq!(
            st.forward(),
            &[frac(-1, 4), frac(-5, 6), frac(3, 2), frac(-1, 2), frac(1, 12)]
        );
    }

    #[test]
    fn moment_conditions_hold_exactly_up_to_2p() {
        for p in 1..=6 {
            let st = InteriorStencil::new(p);
            assert_eq!(st.verify_order(), 2 * p, "p={p}");
        }
    }

    #[test]
    fn backward_is_reflected_negation() {
        let st = InteriorStencil::new(3);
        let fwd = st.forward();
        let bwd = st.backward();
        for (k, c) in bwd.iter().enumerate() {
            assert_eq!(*c, -fwd[fwd.len() - 1 - k].clone());
        }
    }

    #[test]
    fn matches_lagrange_derivative_oracle() {
        // Independent construction: derivative at 0 of the Lagrange basis on
        // the same offsets. l_k'(0) = sum_{m != k} 1/(x_k - x_m) * prod ...
        for p in 1..=6 {
            let st = InteriorStencil::new(p);
            let xs: Vec<f64> = st.offsets().iter().map(|&j| j as f64).collect();
            let coeffs = st.forward_f64();
            for (k, &xk) in xs.iter().enumerate() {
                let mut deriv = 0.0;
                for (m, &xm) in xs.iter().enumerate() {
                    if m == k {
                        continue;
                    }
                    let mut prod = 1.0 / (xk - xm);
                    for (j, &xj) in xs.iter().enumerate() {
                        if j != k && j != m {
                            prod *= (0.0 - xj) / (xk - xj);
                        }
                    }
                    deriv += prod;
                }
                assert!(
                    (deriv - coeffs[k]).abs() <= 1e-12 * coeffs[k].abs().max(1.0),
                    "p={p} k={k}: {deriv} vs {}",
                    coeffs[k]
                );
            }
        }
    }

    #[test]
    fn error_constant_positive() {
        for p in 1..=6 {
            assert!(leading_error_constant(&InteriorStencil::new(p)) > 0.0);
        }
    }
}
