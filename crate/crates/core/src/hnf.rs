//! Row-style Hermite normal form over the integers.
//!
//! The form computed here is the canonical one: pivots are positive, entries
//! above a pivot are reduced into `[0, pivot)`, and pivot columns strictly
//! increase. Two generating sets with the same integer row span therefore
//! produce identical output. The unimodular transform is tracked so that the
//! kernel of the generator matrix comes out for free.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

/// Hermite normal form of an integer row lattice, with the transform.
#[derive(Debug, Clone)]
pub struct RowHnf {
    /// The nonzero HNF rows.
    pub rows: Vec<Vec<BigInt>>,
    /// Pivot column of each HNF row; strictly increasing.
    pub pivots: Vec<usize>,
    /// Unimodular `U` with `U · input = [rows; 0]`.
    pub transform: Vec<Vec<BigInt>>,
    cols: usize,
}

impl RowHnf {
    pub fn compute(input: &[Vec<BigInt>]) -> RowHnf {
        let m = input.len();
        let cols = input.first().map_or(0, Vec::len);
        assert!(input.iter().all(|r| r.len() == cols), "ragged matrix");

        let mut a: Vec<Vec<BigInt>> = input.to_vec();
        let mut u: Vec<Vec<BigInt>> = (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| if i == j { BigInt::from(1) } else { BigInt::zero() })
                    .collect()
            })
            .collect();

        let mut pivots = Vec::new();
        let mut pr = 0; // next pivot row
        for col in 0..cols {
            // Gcd-eliminate column `col` among rows pr.. until one nonzero entry remains.
            loop {
                let mut best: Option<usize> = None;
                for r in pr..m {
                    if !a[r][col].is_zero() {
                        best = match best {
                            None => Some(r),
                            Some(b) if a[r][col].abs() < a[b][col].abs() => Some(r),
                            keep => keep,
                        };
                    }
                }
                let Some(b) = best else { break };
                a.swap(pr, b);
                u.swap(pr, b);
                let mut any_left = false;
                for r in (pr + 1)..m {
                    if !a[r][col].is_zero() {
                        let q = a[r][col].div_floor(&a[pr][col]);
                        row_sub(&mut a, r, pr, &q);
                        row_sub(&mut u, r, pr, &q);
                        any_left = any_left || !a[r][col].is_zero();
                    }
                }
                if !any_left {
                    break;
                }
            }
            if pr < m && !a[pr][col].is_zero() {
                if a[pr][col].is_negative() {
                    row_negate(&mut a, pr);
                    row_negate(&mut u, pr);
                }
                // Reduce the entries above the pivot into [0, pivot).
                for r in 0..pr {
                    let q = a[r][col].div_floor(&a[pr][col]);
                    if !q.is_zero() {
                        row_sub(&mut a, r, pr, &q);
                        row_sub(&mut u, r, pr, &q);
                    }
                }
                pivots.push(col);
                pr += 1;
            }
        }

        let rows = a[..pr].to_vec();
        RowHnf {
            rows,
            pivots,
            transform: u,
            cols,
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Rows of the transform that map the input to zero: an integer basis of
    /// the left kernel of the input matrix.
    pub fn kernel(&self) -> &[Vec<BigInt>] {
        &self.transform[self.rank()..]
    }

    /// Integer coordinates of `target` in the HNF row basis, if any.
    pub fn solve(&self, target: &[BigInt]) -> Option<Vec<BigInt>> {
        assert_eq!(target.len(), self.cols);
        let mut rem = target.to_vec();
        let mut coeffs = Vec::with_capacity(self.rank());
        for (row, &pc) in self.rows.iter().zip(&self.pivots) {
            let (q, r) = rem[pc].div_rem(&row[pc]);
            if !r.is_zero() {
                return None;
            }
            if !q.is_zero() {
                for k in pc..self.cols {
                    rem[k] -= &q * &row[k];
                }
            }
            coeffs.push(q);
        }
        rem.iter().all(Zero::is_zero).then_some(coeffs)
    }
}

fn row_sub(m: &mut [Vec<BigInt>], dst: usize, src: usize, q: &BigInt) {
    if q.is_zero() {
        return;
    }
    // Split borrows: dst != src always holds at call sites.
    let (lo, hi) = if dst < src {
        let (a, b) = m.split_at_mut(src);
        (&mut a[dst], &b[0])
    } else {
        let (a, b) = m.split_at_mut(dst);
        (&mut b[0], &a[src])
    };
    for k in 0..lo.len() {
        lo[k] -= q * &hi[k];
    }
}

fn row_negate(m: &mut [Vec<BigInt>], r: usize) {
    for x in &mut m[r] {
        *x = -std::mem::take(x);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: &[&[i64]]) -> Vec<Vec<BigInt>> {
        rows.iter()
            .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
            .collect()
    }

    #[test]
    fn gcd_collapse() {
        let h = RowHnf::compute(&mat(&[&[2, 0], &[3, 0]]));
        assert_eq!(h.rows, mat(&[&[1, 0]]));
        assert_eq!(h.pivots, vec![0]);
        assert_eq!(h.kernel().len(), 1);
    }

    #[test]
    fn identity_is_fixed() {
        let id = mat(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]);
        let h = RowHnf::compute(&id);
        assert_eq!(h.rows, id);
    }

    #[test]
    fn above_pivot_entries_are_reduced() {
        let h = RowHnf::compute(&mat(&[&[3, 0], &[2, 1]]));
        // Canonical form of the lattice spanned by (3,0),(2,1).
        assert_eq!(h.rows, mat(&[&[1, 2], &[0, 3]]));
    }

    #[test]
    fn transform_reproduces_rows() {
        let input = mat(&[&[4, 2, 0], &[6, 3, 1], &[2, 1, 5]]);
        let h = RowHnf::compute(&input);
        for (k, row) in h.rows.iter().enumerate() {
            let mut acc = vec![BigInt::zero(); 3];
            for (c, g) in h.transform[k].iter().zip(&input) {
                for j in 0..3 {
                    acc[j] += c * &g[j];
                }
            }
            assert_eq!(&acc, row);
        }
        for kr in h.kernel() {
            let mut acc = vec![BigInt::zero(); 3];
            for (c, g) in kr.iter().zip(&input) {
                for j in 0..3 {
                    acc[j] += c * &g[j];
                }
            }
            assert!(acc.iter().all(Zero::is_zero));
        }
    }

    #[test]
    fn solve_membership() {
        let h = RowHnf::compute(&mat(&[&[2, 1], &[0, 3]]));
        assert_eq!(
            h.solve(&[BigInt::from(2), BigInt::from(4)]),
            Some(vec![BigInt::from(1), BigInt::from(1)])
        );
        assert_eq!(h.solve(&[BigInt::from(1), BigInt::from(0)]), None);
    }
}
