//! Exact linear algebra over `Q` and `Z`: reduced row echelon form,
//! nullspaces, Hermite normal form and integer kernels.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type QMatrix = Vec<Vec<BigRational>>;
pub type ZMatrix = Vec<Vec<BigInt>>;

pub fn to_rational(rows: &[Vec<i64>]) -> QMatrix {
    rows.iter()
        .map(|r| {
            r.iter()
                .map(|&x| BigRational::from_integer(x.into()))
                .collect()
        })
        .collect()
}

/// Reduces `rows` in place to reduced row echelon form (zero rows dropped)
/// and returns the pivot columns.
pub fn rref(rows: &mut QMatrix, cols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][c].recip();
        for x in rows[r].iter_mut() {
            *x *= &inv;
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let factor = row[c].clone();
            for (x, p) in row.iter_mut().zip(&pivot_row) {
                *x -= &factor * p;
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    rows.truncate(r);
    pivots
}

pub fn rank(rows: &QMatrix, cols: usize) -> usize {
    let mut m = rows.clone();
    rref(&mut m, cols).len()
}

/// Basis of `{x : rows · x = 0}`, one vector per free column, in RREF
/// parameterization.
pub fn nullspace(rows: &QMatrix, cols: usize) -> QMatrix {
    let mut m = rows.clone();
    let pivots = rref(&mut m, cols);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![BigRational::zero(); cols];
            v[f] = BigRational::one();
            for (row, &pc) in m.iter().zip(&pivots) {
                v[pc] = -row[f].clone();
            }
            v
        })
        .collect()
}

/// Canonical basis of a subspace: RREF of its spanning vectors, so each
/// vector's first nonzero entry is 1.
pub fn canonical_basis(vectors: &QMatrix, cols: usize) -> QMatrix {
    let mut m = vectors.clone();
    rref(&mut m, cols);
    m
}

/// Row Hermite normal form restricted to the first `pivot_cols` columns;
/// the remaining columns ride along. Returns the number of pivot rows; rows
/// after that have zeros in the first `pivot_cols` columns.
fn hermite_partial(rows: &mut ZMatrix, pivot_cols: usize) -> usize {
    let mut r = 0;
    for c in 0..pivot_cols {
        if r == rows.len() {
            break;
        }
        loop {
            let best = (r..rows.len())
                .filter(|&i| !rows[i][c].is_zero())
                .min_by(|&i, &j| rows[i][c].abs().cmp(&rows[j][c].abs()));
            let Some(best) = best else { break };
            rows.swap(r, best);
            let mut done = true;
            for i in r + 1..rows.len() {
                if rows[i][c].is_zero() {
                    continue;
                }
                let q = rows[i][c].div_floor(&rows[r][c]);
                let pivot_row = rows[r].clone();
                for (x, p) in rows[i].iter_mut().zip(&pivot_row) {
                    *x -= &q * p;
                }
                if !rows[i][c].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if r < rows.len() && !rows[r][c].is_zero() {
            if rows[r][c].is_negative() {
                for x in rows[r].iter_mut() {
                    *x = -x.clone();
                }
            }
            let pivot_row = rows[r].clone();
            for row in rows.iter_mut().take(r) {
                let q = row[c].div_floor(&pivot_row[c]);
                if q.is_zero() {
                    continue;
                }
                for (x, p) in row.iter_mut().zip(&pivot_row) {
                    *x -= &q * p;
                }
            }
            r += 1;
        }
    }
    r
}

/// Hermite normal form of the row lattice: nonzero rows, positive pivots,
/// entries above each pivot reduced into `[0, pivot)`.
pub fn hnf(rows: &ZMatrix, cols: usize) -> ZMatrix {
    let mut m = rows.clone();
    let r = hermite_partial(&mut m, cols);
    m.truncate(r);
    m
}

/// Basis of the integer lattice `{x in Z^cols : rows · x = 0}`.
pub fn integer_kernel(rows: &ZMatrix, cols: usize) -> ZMatrix {
    let nrows = rows.len();
    let mut aug: ZMatrix = (0..cols)
        .map(|j| {
            let mut row: Vec<BigInt> = rows.iter().map(|r| r[j].clone()).collect();
            row.extend((0..cols).map(|k| if k == j { BigInt::one() } else { BigInt::zero() }));
            row
        })
        .collect();
    let r = hermite_partial(&mut aug, nrows);
    let kernel: ZMatrix = aug[r..].iter().map(|row| row[nrows..].to_vec()).collect();
    hnf(&kernel, cols)
}

/// Coordinates of `v` in a lattice basis given in Hermite normal form, or
/// `None` if `v` is not in the lattice.
pub fn coordinates_in_hnf(basis: &ZMatrix, v: &[BigInt]) -> Option<Vec<BigInt>> {
    let mut rest = v.to_vec();
    let mut coords = Vec::with_capacity(basis.len());
    for row in basis {
        let c = row.iter().position(|x| !x.is_zero())?;
        let (q, rem) = rest[c].div_rem(&row[c]);
        if !rem.is_zero() {
            return None;
        }
        for (x, b) in rest.iter_mut().zip(row) {
            *x -= &q * b;
        }
        coords.push(q);
    }
    rest.iter().all(Zero::is_zero).then_some(coords)
}

/// Rank by fraction-free (Bareiss) elimination over `Z`. Shares no code with
/// the rational path so it can serve as an independent cross-check.
pub fn bareiss_rank(rows: &ZMatrix, cols: usize) -> usize {
    let mut m = rows.clone();
    let mut prev = BigInt::one();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        for i in r + 1..m.len() {
            for j in c + 1..cols {
                let v = (&m[r][c] * &m[i][j] - &m[i][c] * &m[r][j]) / &prev;
                m[i][j] = v;
            }
            m[i][c] = BigInt::zero();
        }
        prev = m[r][c].clone();
        r += 1;
        if r == m.len() {
            break;
        }
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(rows: &[&[i64]]) -> ZMatrix {
        rows.iter()
            .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
            .collect()
    }

    fn q(rows: &[&[i64]]) -> QMatrix {
        to_rational(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>())
    }

    #[test]
    fn nullspace_dimension_and_membership() {
        let m = q(&[&[1, 1, 0, 0], &[0, 0, 1, -1], &[1, 1, 1, -1]]);
        let ns = nullspace(&m, 4);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            for row in &m {
                let dot: BigRational = row.iter().zip(v).map(|(a, b)| a * b).sum();
                assert!(dot.is_zero());
            }
        }
    }

    #[test]
    fn hnf_of_small_lattice() {
        let h = hnf(&z(&[&[2, 4], &[3, 5]]), 2);
        // lattice generated by (2,4),(3,5) = {(1,1)·a + (0,2)·b}
        assert_eq!(h, z(&[&[1, 1], &[0, 2]]));
        let h = hnf(&z(&[&[4], &[6]]), 1);
        assert_eq!(h, z(&[&[2]]));
    }

    #[test]
    fn kernel_of_integer_matrix() {
        let k = integer_kernel(&z(&[&[2, 3, 0]]), 3);
        assert_eq!(k.len(), 2);
        for v in &k {
            let dot: BigInt = v[0].clone() * 2 + v[1].clone() * 3;
            assert!(dot.is_zero());
        }
        // (3,-2,0) must be primitive in the kernel lattice
        let target = [BigInt::from(3), BigInt::from(-2), BigInt::from(0)];
        assert!(coordinates_in_hnf(&k, &target).is_some());
    }

    #[test]
    fn bareiss_agrees_with_rref() {
        let rows = [
            vec![1i64, 2, 3],
            vec![2, 4, 6],
            vec![0, 1, 1],
            vec![1, 3, 4],
        ];
        let zr: ZMatrix = rows
            .iter()
            .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
            .collect();
        assert_eq!(bareiss_rank(&zr, 3), 2);
        assert_eq!(rank(&to_rational(&rows), 3), 2);
    }
}
